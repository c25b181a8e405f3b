//! Walk characteristics over the canonical C-sequences.
//!
//! For α ≤ β the walk from β down to α repeatedly steps to `min(C_β ∖ α)`.
//! Four characteristics are computed along it:
//!
//! * `ρ(α,β)  = max{ |C_β ∩ α|, ρ(α, min(C_β∖α)), ρ(ξ,α) : ξ ∈ C_β ∩ α }`,
//!   with `ρ(α,α) = 0`;
//! * `ρ1(α,β) = max{ |C_β ∩ α|, ρ1(α, min(C_β∖α)) }`, with `ρ1(α,α) = 0`;
//! * `ρ2(α,β) = ρ2(α, min(C_β∖α)) + 1`, with `ρ2(α,α) = 0` — the number of
//!   walk steps;
//! * `ρ̄(α,β)  = 2^{ρ(α,β)} · (2·|{ξ ≤ α : ρ(ξ,α) ≤ ρ(α,β)}| + 1)`.
//!
//! `ρ ≥ ρ1` pointwise, and both are subadditive:
//! `f(α,γ) ≤ max{f(α,β), f(β,γ)}` and `f(α,β) ≤ max{f(α,γ), f(β,γ)}`
//! for α ≤ β ≤ γ (ρ only for the second); the property suite samples both.
//!
//! All evaluation goes through a [`WalkContext`] holding the memo tables.
//! Results are independent of memo state: the recursion order is fixed, a
//! full memo is a hard error (never silent eviction), and identical inputs
//! give identical outputs on fresh and warm contexts alike.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::ord::{c_below_and_step, Kind, Limits, OrdError, Ordinal};

/// The four walk characteristics, as named in CLI surfaces and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkFn {
    Rho,
    Rho1,
    Rho2,
    RhoBar,
}

impl WalkFn {
    pub fn parse(s: &str) -> Option<WalkFn> {
        match s {
            "rho" => Some(WalkFn::Rho),
            "rho1" => Some(WalkFn::Rho1),
            "rho2" => Some(WalkFn::Rho2),
            "rhobar" => Some(WalkFn::RhoBar),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WalkFn::Rho => "rho",
            WalkFn::Rho1 => "rho1",
            WalkFn::Rho2 => "rho2",
            WalkFn::RhoBar => "rhobar",
        }
    }
}

/// Sublevel enumeration only exists for ρ and ρ1 (ρ2 sublevels are infinite:
/// `ρ2(n, ω) = 1` for every n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SublevelFn {
    Rho,
    Rho1,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WalkError {
    #[error(transparent)]
    Ord(#[from] OrdError),
    #[error("walk requires α ≤ β, got α = {alpha}, β = {beta}")]
    OrderViolation { alpha: String, beta: String },
    #[error("walk recursion exceeded depth limit {limit}")]
    DepthLimit { limit: u32 },
    #[error("walk memo is full ({capacity} entries); raise Limits::memo_capacity")]
    MemoFull { capacity: usize },
    #[error("natural overflow while computing {what}")]
    Overflow { what: String },
    #[error("sublevel enumeration is unsupported for {what}: the set is not finite in general")]
    UnsupportedSublevel { what: String },
}

/// Counters maintained by a [`WalkContext`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WalkStats {
    pub hits: u64,
    pub misses: u64,
    pub entries: usize,
    pub max_depth: u32,
}

type Memo = HashMap<(Ordinal, Ordinal), u64>;

/// Memoized evaluator for the walk characteristics.
///
/// Single-writer: methods take `&mut self`. Share a context across threads
/// behind a mutex, or give each thread its own (values never disagree).
#[derive(Debug, Default)]
pub struct WalkContext {
    limits: Limits,
    rho: Memo,
    rho1: Memo,
    rho2: Memo,
    sublevels: HashMap<(bool, Ordinal, u64), BTreeSet<Ordinal>>,
    stats: WalkStats,
}

impl WalkContext {
    pub fn new() -> Self {
        Self::with_limits(Limits::default())
    }

    pub fn with_limits(limits: Limits) -> Self {
        WalkContext { limits, ..Default::default() }
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn stats(&self) -> WalkStats {
        WalkStats {
            entries: self.rho.len() + self.rho1.len() + self.rho2.len(),
            ..self.stats
        }
    }

    /// Dispatch by function name; the ρ̄ value is what `eval` returns for
    /// [`WalkFn::RhoBar`].
    pub fn eval(&mut self, f: WalkFn, alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
        match f {
            WalkFn::Rho => self.rho(alpha, beta),
            WalkFn::Rho1 => self.rho1(alpha, beta),
            WalkFn::Rho2 => self.rho2(alpha, beta),
            WalkFn::RhoBar => self.rho_bar(alpha, beta),
        }
    }

    pub fn rho(&mut self, alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
        self.rec(Which::Rho, alpha, beta, 0)
    }

    pub fn rho1(&mut self, alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
        self.rec(Which::Rho1, alpha, beta, 0)
    }

    pub fn rho2(&mut self, alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
        self.rec(Which::Rho2, alpha, beta, 0)
    }

    /// `ρ̄(α,β) = 2^{ρ(α,β)} · (2·|{ξ ≤ α : ρ(ξ,α) ≤ ρ(α,β)}| + 1)`.
    ///
    /// Injective in the first coordinate: `ρ̄(α,γ) ≠ ρ̄(β,γ)` for α < β ≤ γ.
    /// Overflow past 2⁶⁴ is a hard error.
    pub fn rho_bar(&mut self, alpha: &Ordinal, beta: &Ordinal) -> Result<u64, WalkError> {
        let r = self.rho(alpha, beta)?;
        let pow = 1u64
            .checked_shl(u32::try_from(r).unwrap_or(u32::MAX))
            .ok_or_else(|| WalkError::Overflow { what: format!("2^{r}") })?;
        let count = self.sublevel(SublevelFn::Rho, alpha, r)?.len() as u64;
        let odd = count
            .checked_mul(2)
            .and_then(|x| x.checked_add(1))
            .ok_or_else(|| WalkError::Overflow { what: "2·count+1".to_string() })?;
        pow.checked_mul(odd)
            .ok_or_else(|| WalkError::Overflow { what: format!("2^{r}·(2·{count}+1)") })
    }

    /// `{ξ ≤ α : ρ(ξ,α) ≤ c}` as an exact finite set (ascending).
    pub fn sublevel_rho(&mut self, alpha: &Ordinal, c: u64) -> Result<BTreeSet<Ordinal>, WalkError> {
        self.sublevel(SublevelFn::Rho, alpha, c)
    }

    /// `{ξ ≤ α : ρ1(ξ,α) ≤ c}` as an exact finite set (ascending).
    pub fn sublevel_rho1(&mut self, alpha: &Ordinal, c: u64) -> Result<BTreeSet<Ordinal>, WalkError> {
        self.sublevel(SublevelFn::Rho1, alpha, c)
    }

    /// Exact sublevel enumeration for ρ or ρ1.
    ///
    /// Soundness of the candidate generation, in walk terms: any ξ < α with
    /// f(ξ,α) ≤ c satisfies `|C_α ∩ ξ| ≤ ρ1(ξ,α) ≤ ρ(ξ,α) ≤ c`, so the walk
    /// from α to ξ enters at the k-th fundamental-sequence element with
    /// k = |C_α ∩ ξ| ≤ c, and f(ξ,α) ≥ f(ξ, α[k]); hence ξ already lies in
    /// the (k, c) sublevel of α[k]. Candidates are therefore α itself plus
    /// the union of the sublevel sets of α[0..=c], filtered by f(·,α) ≤ c.
    /// Successor α = γ+1 only reroutes through γ (C_{γ+1} = {γ} adds no
    /// entries below ξ ≤ γ), and finite α admits a full scan.
    pub fn sublevel(
        &mut self,
        f: SublevelFn,
        alpha: &Ordinal,
        c: u64,
    ) -> Result<BTreeSet<Ordinal>, WalkError> {
        let key = (matches!(f, SublevelFn::Rho), alpha.clone(), c);
        if let Some(hit) = self.sublevels.get(&key) {
            return Ok(hit.clone());
        }
        let eval = |ctx: &mut Self, x: &Ordinal, a: &Ordinal| match f {
            SublevelFn::Rho => ctx.rho(x, a),
            SublevelFn::Rho1 => ctx.rho1(x, a),
        };
        let mut out = BTreeSet::new();
        if let Some(n) = alpha.as_nat() {
            for k in 0..=n {
                let xi = Ordinal::from_nat(k);
                if eval(self, &xi, alpha)? <= c {
                    out.insert(xi);
                }
            }
        } else {
            let mut candidates: BTreeSet<Ordinal> = BTreeSet::new();
            candidates.insert(alpha.clone());
            match alpha.kind() {
                Kind::Zero => unreachable!("zero is finite"),
                Kind::Successor(gamma) => {
                    candidates.extend(self.sublevel(f, &gamma, c)?);
                }
                Kind::Limit => {
                    let limits = self.limits;
                    for k in 0..=c {
                        let ak = alpha.fund_seq_with(k, &limits)?;
                        candidates.extend(self.sublevel(f, &ak, c)?);
                    }
                }
            }
            for xi in candidates {
                if eval(self, &xi, alpha)? <= c {
                    out.insert(xi);
                }
            }
        }
        self.sublevels.insert(key, out.clone());
        Ok(out)
    }

    /// The walk from β down to α: `[β, min(C_β∖α), ..., α]`, strictly
    /// descending, of length `ρ2(α,β) + 1`.
    pub fn walk_trace(&mut self, alpha: &Ordinal, beta: &Ordinal) -> Result<Vec<Ordinal>, WalkError> {
        if alpha > beta {
            return Err(WalkError::OrderViolation {
                alpha: alpha.to_string(),
                beta: beta.to_string(),
            });
        }
        let mut trace = vec![beta.clone()];
        let mut current = beta.clone();
        loop {
            if &current == alpha {
                return Ok(trace);
            }
            if trace.len() >= self.limits.depth_limit as usize {
                return Err(WalkError::DepthLimit { limit: self.limits.depth_limit });
            }
            current = crate::ord::c_step(&current, alpha, &self.limits)?;
            trace.push(current.clone());
        }
    }

    fn rec(&mut self, which: Which, alpha: &Ordinal, beta: &Ordinal, depth: u32) -> Result<u64, WalkError> {
        if alpha > beta {
            return Err(WalkError::OrderViolation {
                alpha: alpha.to_string(),
                beta: beta.to_string(),
            });
        }
        if alpha == beta {
            return Ok(0);
        }
        if depth >= self.limits.depth_limit {
            return Err(WalkError::DepthLimit { limit: self.limits.depth_limit });
        }
        if depth > self.stats.max_depth {
            self.stats.max_depth = depth;
        }
        let key = (alpha.clone(), beta.clone());
        if let Some(&v) = self.memo(which).get(&key) {
            self.stats.hits += 1;
            return Ok(v);
        }
        self.stats.misses += 1;
        let (below, step) = c_below_and_step(beta, alpha, &self.limits)?;
        let value = match which {
            Which::Rho => {
                let mut v = below.len() as u64;
                v = v.max(self.rec(which, alpha, &step, depth + 1)?);
                for xi in &below {
                    v = v.max(self.rec(which, xi, alpha, depth + 1)?);
                }
                v
            }
            Which::Rho1 => {
                let count = below.len() as u64;
                count.max(self.rec(which, alpha, &step, depth + 1)?)
            }
            Which::Rho2 => self
                .rec(which, alpha, &step, depth + 1)?
                .checked_add(1)
                .ok_or_else(|| WalkError::Overflow { what: "ρ2 step count".to_string() })?,
        };
        let capacity = self.limits.memo_capacity;
        let memo = self.memo_mut(which);
        if memo.len() >= capacity {
            return Err(WalkError::MemoFull { capacity });
        }
        memo.insert(key, value);
        Ok(value)
    }

    fn memo(&self, which: Which) -> &Memo {
        match which {
            Which::Rho => &self.rho,
            Which::Rho1 => &self.rho1,
            Which::Rho2 => &self.rho2,
        }
    }

    fn memo_mut(&mut self, which: Which) -> &mut Memo {
        match which {
            Which::Rho => &mut self.rho,
            Which::Rho1 => &mut self.rho1,
            Which::Rho2 => &mut self.rho2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Which {
    Rho,
    Rho1,
    Rho2,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).expect(s)
    }

    fn set(items: &[&str]) -> BTreeSet<Ordinal> {
        items.iter().map(|s| o(s)).collect()
    }

    #[test]
    fn boundary_is_zero() {
        let mut ctx = WalkContext::new();
        for s in ["0", "5", "w", "w*2+3", "w^w"] {
            let a = o(s);
            assert_eq!(ctx.rho(&a, &a).unwrap(), 0);
            assert_eq!(ctx.rho1(&a, &a).unwrap(), 0);
            assert_eq!(ctx.rho2(&a, &a).unwrap(), 0);
        }
    }

    #[test]
    fn rho_small_examples() {
        let mut ctx = WalkContext::new();
        assert_eq!(ctx.rho(&o("1"), &o("w")).unwrap(), 1);
        assert_eq!(ctx.rho(&o("2"), &o("w")).unwrap(), 2);
        assert_eq!(ctx.rho1(&o("1"), &o("w")).unwrap(), 1);
        assert_eq!(ctx.rho1(&o("2"), &o("w")).unwrap(), 2);
        // Successor owners only reroute: C_{α+1} = {α}.
        assert_eq!(ctx.rho1(&o("w"), &o("w+1")).unwrap(), 0);
        assert_eq!(ctx.rho(&o("w"), &o("w+1")).unwrap(), 0);
        // Finite walks never accumulate anything.
        for j in 0..6u64 {
            for k in j..6u64 {
                assert_eq!(ctx.rho(&Ordinal::from_nat(j), &Ordinal::from_nat(k)).unwrap(), 0);
            }
        }
    }

    #[test]
    fn rho2_counts_steps() {
        let mut ctx = WalkContext::new();
        assert_eq!(ctx.rho2(&o("w"), &o("w+1")).unwrap(), 1);
        assert_eq!(ctx.rho2(&o("5"), &o("w*2")).unwrap(), 2);
        assert_eq!(ctx.rho2(&o("3"), &o("w")).unwrap(), 1);
    }

    #[test]
    fn rho_bar_examples() {
        let mut ctx = WalkContext::new();
        assert_eq!(ctx.rho_bar(&o("0"), &o("1")).unwrap(), 3);
        assert_eq!(ctx.rho_bar(&o("0"), &o("w")).unwrap(), 3);
        assert_eq!(ctx.rho_bar(&o("1"), &o("w")).unwrap(), 10);
    }

    #[test]
    fn rho_bar_overflow_is_hard() {
        let mut ctx = WalkContext::new();
        // ρ(64, ω) = 64, and 2^64 does not fit.
        assert!(matches!(
            ctx.rho_bar(&o("64"), &o("w")),
            Err(WalkError::Overflow { .. })
        ));
    }

    #[test]
    fn order_violation_rejected() {
        let mut ctx = WalkContext::new();
        assert!(matches!(
            ctx.rho(&o("w"), &o("3")),
            Err(WalkError::OrderViolation { .. })
        ));
    }

    #[test]
    fn sublevel_examples() {
        let mut ctx = WalkContext::new();
        assert_eq!(ctx.sublevel_rho(&o("0"), 0).unwrap(), set(&["0"]));
        assert_eq!(ctx.sublevel_rho(&o("w"), 0).unwrap(), set(&["0", "w"]));
        assert_eq!(ctx.sublevel_rho(&o("w"), 2).unwrap(), set(&["0", "1", "2", "w"]));
    }

    #[test]
    fn trace_examples() {
        let mut ctx = WalkContext::new();
        assert_eq!(
            ctx.walk_trace(&o("5"), &o("w*2")).unwrap(),
            vec![o("w*2"), o("w"), o("5")]
        );
        assert_eq!(ctx.walk_trace(&o("w"), &o("w")).unwrap(), vec![o("w")]);
        // Trace length is ρ2 + 1.
        for (a, b) in [("0", "w"), ("3", "w^2"), ("w", "w^2+w*2"), ("w+1", "w^w")] {
            let steps = ctx.rho2(&o(a), &o(b)).unwrap();
            let trace = ctx.walk_trace(&o(a), &o(b)).unwrap();
            assert_eq!(trace.len() as u64, steps + 1, "({a},{b})");
            assert!(trace.windows(2).all(|w| w[0] > w[1]), "strictly descending");
        }
    }

    #[test]
    fn rho_dominates_rho1_sampled() {
        let mut ctx = WalkContext::new();
        let pool: Vec<Ordinal> = ["0", "1", "2", "7", "w", "w+3", "w*2", "w*2+1", "w^2", "w^2+w+1", "w^3*2", "w^w"]
            .iter()
            .map(|s| o(s))
            .collect();
        for a in &pool {
            for b in &pool {
                if a <= b {
                    let r = ctx.rho(a, b).unwrap();
                    let r1 = ctx.rho1(a, b).unwrap();
                    assert!(r >= r1, "ρ({a},{b}) = {r} < ρ1 = {r1}");
                }
            }
        }
    }

    #[test]
    fn memo_state_never_changes_values() {
        let mut warm = WalkContext::new();
        let pairs = [("1", "w"), ("2", "w"), ("w", "w^2"), ("w+1", "w^2*2"), ("3", "w^w")];
        // Warm up in one order, then compare against fresh contexts per pair.
        for (a, b) in pairs.iter().rev() {
            let _ = warm.rho(&o(a), &o(b)).unwrap();
        }
        for (a, b) in pairs {
            let mut fresh = WalkContext::new();
            assert_eq!(warm.rho(&o(a), &o(b)).unwrap(), fresh.rho(&o(a), &o(b)).unwrap());
            assert_eq!(warm.rho_bar(&o(a), &o(b)).unwrap(), fresh.rho_bar(&o(a), &o(b)).unwrap());
        }
        assert!(warm.stats().hits > 0);
    }

    #[test]
    fn guards_fire() {
        let mut tiny_depth = WalkContext::with_limits(Limits { depth_limit: 1, ..Limits::default() });
        assert!(matches!(
            tiny_depth.rho(&o("1"), &o("w")),
            Err(WalkError::DepthLimit { limit: 1 })
        ));
        let mut tiny_memo = WalkContext::with_limits(Limits { memo_capacity: 1, ..Limits::default() });
        assert!(matches!(
            tiny_memo.rho(&o("2"), &o("w^2")),
            Err(WalkError::MemoFull { capacity: 1 })
        ));
    }
}
