//! Towers: ⊆*-increasing chains of subsets of ω indexed by ordinals,
//! strict in both directions — `|a_α ∖ a_β| < ω` exactly when α ≤ β.
//!
//! Pair certificates make every check exact without materializing the
//! astronomically long periods the builder produces: `diff_bound m`
//! asserts `a_i ∖ a_j ⊆ [0, m)` (verified by an exact scan below m and a
//! window probe past it), and an optional arithmetic-progression witness
//! `(start, stride)` asserts an infinite subset of `a_j ∖ a_i` (verified by
//! sampling the progression). The builder records tight bounds and derived
//! progressions by construction; external manifests may supply their own.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::{run_check_with_replay, MatrixError, MatrixProvider};
use crate::ord::{c_step, Limits as OrdLimits, Ordinal};
use crate::report::{config_value, Report};

use super::{
    ep_of, member, parse_set_expr, strip_comment, Ep, OmegaSetExpr, SetEnv, SetsError, SetsLimits,
};

/// A certificate for one ordered pair of stages (i < j).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCert {
    /// `a_i ∖ a_j ⊆ [0, diff_bound)`.
    pub diff_bound: u64,
    /// `{start + k·stride} ⊆ a_j ∖ a_i` — evidence that the reverse
    /// difference is infinite.
    pub witness: Option<(u64, u64)>,
}

/// A finite tower fragment.
#[derive(Debug, Clone)]
pub struct Tower {
    indices: Vec<Ordinal>,
    sets: Vec<OmegaSetExpr>,
    certs: BTreeMap<(usize, usize), PairCert>,
    /// Per-stage EP forms, computed at most once and shared by every
    /// pairwise decision (`None` = not EP-computable within the caps).
    eps: Vec<OnceLock<Option<Ep>>>,
}

impl Tower {
    pub fn new(
        indices: Vec<Ordinal>,
        sets: Vec<OmegaSetExpr>,
        certs: BTreeMap<(usize, usize), PairCert>,
    ) -> Result<Self, SetsError> {
        if indices.len() != sets.len() {
            return Err(SetsError::Guard {
                what: format!("{} indices but {} sets", indices.len(), sets.len()),
            });
        }
        if indices.is_empty() {
            return Err(SetsError::Guard { what: "a tower needs at least one stage".to_string() });
        }
        let eps = (0..sets.len()).map(|_| OnceLock::new()).collect();
        Ok(Tower { indices, sets, certs, eps })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor requires ≥ 1 stage
    }

    pub fn indices(&self) -> &[Ordinal] {
        &self.indices
    }

    pub fn set_at(&self, pos: usize) -> &OmegaSetExpr {
        &self.sets[pos]
    }

    pub fn position(&self, index: &Ordinal) -> Option<usize> {
        self.indices.iter().position(|i| i == index)
    }

    pub fn cert(&self, i: usize, j: usize) -> Option<&PairCert> {
        self.certs.get(&(i, j))
    }

    pub fn certs(&self) -> &BTreeMap<(usize, usize), PairCert> {
        &self.certs
    }

    /// The stage's EP form, computed at most once per tower (with the
    /// limits of the first query). Deep stage expressions make `ep_of`
    /// expensive, so pairwise decisions must not recompute it per pair.
    fn stage_ep(&self, pos: usize, limits: &SetsLimits) -> Option<&Ep> {
        self.eps[pos].get_or_init(|| ep_of(&self.sets[pos], limits)).as_ref()
    }
}

/// Decision about the finiteness of a difference `a ∖ b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiffDecision {
    /// EP-decided exactly.
    FiniteExact(BTreeSet<u64>),
    /// All elements found below the certified bound; a window past the
    /// bound was scanned clean.
    FiniteCertified { elements: BTreeSet<u64>, bound: u64, window: u64 },
    /// EP-decided infinite.
    Infinite,
    /// The certificate is contradicted by a concrete element.
    CertBroken { x: u64, why: String },
    Undecided { scanned_to: u64, found: usize },
}

/// Decision about the infinitude of a difference `big ∖ small`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InfDecision {
    /// EP-decided infinite.
    InfiniteExact,
    /// A stream of distinct elements; `certified` means they came from a
    /// certificate progression (verified pointwise), not a blind scan.
    Stream { sample: Vec<u64>, certified: bool },
    /// EP-decided finite — definite violation.
    ProvablyFinite(BTreeSet<u64>),
    /// A witness progression element failed a membership test.
    CertBroken { x: u64, why: String },
    Undecided { scanned_to: u64, found: usize },
}

/// Decides `a ∖ b` finite: exactly on the EP fragment, by certificate
/// otherwise.
pub fn decide_diff_finite(
    a: &OmegaSetExpr,
    b: &OmegaSetExpr,
    cert: Option<&PairCert>,
    limits: &SetsLimits,
) -> DiffDecision {
    let a_ep = ep_of(a, limits);
    let b_ep = ep_of(b, limits);
    decide_diff_finite_with(a_ep.as_ref(), b_ep.as_ref(), a, b, cert, limits)
}

/// `decide_diff_finite` with the per-side EP forms already computed, so
/// tower-wide sweeps pay for each stage's EP lowering once, not per pair.
fn decide_diff_finite_with(
    a_ep: Option<&Ep>,
    b_ep: Option<&Ep>,
    a: &OmegaSetExpr,
    b: &OmegaSetExpr,
    cert: Option<&PairCert>,
    limits: &SetsLimits,
) -> DiffDecision {
    if let (Some(ea), Some(eb)) = (a_ep, b_ep) {
        if let Ok(ep) = ea.diff(eb, limits.expansion_cap) {
            return match ep.finite_elements() {
                Some(els) => DiffDecision::FiniteExact(els),
                None => DiffDecision::Infinite,
            };
        }
    }
    let in_diff = |x: u64| member(a, x) && !member(b, x);
    if let Some(c) = cert {
        let elements: BTreeSet<u64> = (0..c.diff_bound).filter(|&x| in_diff(x)).collect();
        for x in c.diff_bound..c.diff_bound.saturating_add(limits.cert_window) {
            if in_diff(x) {
                return DiffDecision::CertBroken {
                    x,
                    why: format!("element {x} of the difference lies at or past the bound {}", c.diff_bound),
                };
            }
        }
        return DiffDecision::FiniteCertified {
            elements,
            bound: c.diff_bound,
            window: limits.cert_window,
        };
    }
    let found = (0..limits.scan_bound).filter(|&x| in_diff(x)).count();
    DiffDecision::Undecided { scanned_to: limits.scan_bound, found }
}

/// Decides `big ∖ small` infinite: exactly on the EP fragment, by witness
/// progression, or by a blind witness-stream scan.
pub fn decide_diff_infinite(
    big: &OmegaSetExpr,
    small: &OmegaSetExpr,
    cert: Option<&PairCert>,
    limits: &SetsLimits,
) -> InfDecision {
    let big_ep = ep_of(big, limits);
    let small_ep = ep_of(small, limits);
    decide_diff_infinite_with(big_ep.as_ref(), small_ep.as_ref(), big, small, cert, limits)
}

/// `decide_diff_infinite` with the per-side EP forms already computed.
fn decide_diff_infinite_with(
    big_ep: Option<&Ep>,
    small_ep: Option<&Ep>,
    big: &OmegaSetExpr,
    small: &OmegaSetExpr,
    cert: Option<&PairCert>,
    limits: &SetsLimits,
) -> InfDecision {
    if let (Some(eb), Some(es)) = (big_ep, small_ep) {
        if let Ok(ep) = eb.diff(es, limits.expansion_cap) {
            return if ep.is_eventually_empty() {
                InfDecision::ProvablyFinite(ep.finite_elements().expect("finite"))
            } else {
                InfDecision::InfiniteExact
            };
        }
    }
    let in_diff = |x: u64| member(big, x) && !member(small, x);
    if let Some((start, stride)) = cert.and_then(|c| c.witness) {
        if stride == 0 {
            return InfDecision::CertBroken { x: start, why: "witness stride 0".to_string() };
        }
        let mut sample = Vec::with_capacity(limits.witness_count);
        for k in 0..limits.witness_count as u64 {
            let x = match start.checked_add(k.checked_mul(stride).unwrap_or(u64::MAX)) {
                Some(v) => v,
                None => {
                    return InfDecision::CertBroken {
                        x: start,
                        why: "witness progression overflows".to_string(),
                    }
                }
            };
            if !in_diff(x) {
                return InfDecision::CertBroken {
                    x,
                    why: format!("progression element {x} is not in the difference"),
                };
            }
            sample.push(x);
        }
        return InfDecision::Stream { sample, certified: true };
    }
    let mut sample = Vec::new();
    for x in 0..limits.scan_bound {
        if in_diff(x) {
            sample.push(x);
            if sample.len() >= limits.witness_count {
                return InfDecision::Stream { sample, certified: false };
            }
        }
    }
    InfDecision::Undecided { scanned_to: limits.scan_bound, found: sample.len() }
}

/// Exact element set of `a_i ∖ a_j`, or an error explaining why none is
/// available.
pub(crate) fn exact_diff_elements(
    t: &Tower,
    i: usize,
    j: usize,
    limits: &SetsLimits,
) -> Result<BTreeSet<u64>, SetsError> {
    match decide_diff_finite_with(
        t.stage_ep(i, limits),
        t.stage_ep(j, limits),
        t.set_at(i),
        t.set_at(j),
        t.cert(i, j),
        limits,
    ) {
        DiffDecision::FiniteExact(e) | DiffDecision::FiniteCertified { elements: e, .. } => Ok(e),
        DiffDecision::Infinite => {
            Err(SetsError::Guard { what: "the difference is infinite".to_string() })
        }
        DiffDecision::CertBroken { x, why } => {
            Err(SetsError::CertificateViolated { what: format!("{why} (x = {x})") })
        }
        DiffDecision::Undecided { scanned_to, .. } => Err(SetsError::Undecided {
            what: format!("difference not EP-decidable and no certificate (scanned to {scanned_to})"),
        }),
    }
}

/// `ρ_TO(α, β) = min{ ξ : a_α ∖ ξ ⊆ a_β }` — one past the largest
/// difference element, 0 when the difference is empty.
pub fn rho_to(
    t: &Tower,
    alpha: &Ordinal,
    beta: &Ordinal,
    limits: &SetsLimits,
) -> Result<u64, SetsError> {
    let i = t.position(alpha).ok_or_else(|| SetsError::NotAnIndex(alpha.to_string()))?;
    let j = t.position(beta).ok_or_else(|| SetsError::NotAnIndex(beta.to_string()))?;
    if i > j {
        return Err(SetsError::OrderViolation {
            alpha: alpha.to_string(),
            beta: beta.to_string(),
        });
    }
    if i == j {
        return Ok(0);
    }
    let els = exact_diff_elements(t, i, j, limits)?;
    Ok(els.iter().next_back().map_or(0, |m| m + 1))
}

/// `F^TO_n(β) = { α < β : a_α ∖ a_β ⊆ n }`, exactly.
pub fn hausdorff_tower(
    t: &Tower,
    n: u64,
    beta: &Ordinal,
    limits: &SetsLimits,
) -> Result<BTreeSet<Ordinal>, SetsError> {
    let j = t.position(beta).ok_or_else(|| SetsError::NotAnIndex(beta.to_string()))?;
    let mut out = BTreeSet::new();
    for i in 0..j {
        let els = exact_diff_elements(t, i, j, limits)?;
        if els.iter().all(|&x| x < n) {
            out.insert(t.indices[i].clone());
        }
    }
    Ok(out)
}

/// Is `v` on the canonical C-sequence of the limit ordinal `lambda`?
fn on_c_sequence(lambda: &Ordinal, v: &Ordinal, ord_limits: &OrdLimits) -> Result<bool, SetsError> {
    if v >= lambda {
        return Ok(false);
    }
    Ok(&c_step(lambda, v, ord_limits)? == v)
}

/// Builds a tower over the given strictly ascending indices, starting from
/// the even numbers.
///
/// Successor stages add every other element of the current complement (the
/// seed picks each stage's phase). Limit stages take the diagonal union of
/// the run's stages that lie on the limit's C-sequence — the immediately
/// preceding index must be one of them — with strictly increasing cuts at
/// least the tight difference bounds, plus a fresh "every other element of
/// the complement" block to keep the chain strict. Tight difference
/// certificates and progression witnesses are recorded for every pair.
pub fn build_tower(
    indices: &[Ordinal],
    seed: u64,
    limits: &SetsLimits,
) -> Result<Tower, SetsError> {
    if indices.is_empty() {
        return Err(SetsError::Guard { what: "no indices given".to_string() });
    }
    if indices.len() > limits.max_stages {
        return Err(SetsError::Guard {
            what: format!("{} stages exceed the builder cap {}", indices.len(), limits.max_stages),
        });
    }
    for w in indices.windows(2) {
        if w[0] >= w[1] {
            return Err(SetsError::OrderViolation {
                alpha: w[1].to_string(),
                beta: w[0].to_string(),
            });
        }
    }
    let ord_limits = OrdLimits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut exprs: Vec<OmegaSetExpr> = Vec::with_capacity(indices.len());
    let mut comps: Vec<Ep> = Vec::with_capacity(indices.len());
    // AP added when stepping from stage k to k+1 — always disjoint from
    // a_k and inside every later stage above the dirty bound.
    let mut picked: Vec<(u64, u64)> = Vec::new();
    let mut dirty: Vec<u64> = Vec::with_capacity(indices.len());
    let mut run_start = 0usize;

    exprs.push(super::evens());
    comps.push(Ep::residues(2, [1])?);
    dirty.push(0);

    for k in 1..indices.len() {
        let prev = k - 1;
        let phase: bool = rng.gen();
        if indices[k].is_limit() {
            // Children: stages of the current run whose index sits on the
            // limit's C-sequence.
            let mut children = Vec::new();
            for p in run_start..k {
                if on_c_sequence(&indices[k], &indices[p], &ord_limits)? {
                    children.push(p);
                }
            }
            if children.last() != Some(&prev) {
                return Err(SetsError::Guard {
                    what: format!(
                        "index {} immediately below the limit {} is not on its C-sequence",
                        indices[prev], indices[k]
                    ),
                });
            }
            // Tight per-child bounds against the newest child, then force
            // strict increase. Within a run the chain is an actual
            // inclusion, so each difference lives below the dirty bound.
            let mut cuts: Vec<u64> = Vec::with_capacity(children.len());
            for &p in &children {
                let d = OmegaSetExpr::diff(exprs[p].clone(), exprs[prev].clone());
                let tight =
                    (0..dirty[prev]).filter(|&x| member(&d, x)).max().map_or(0, |m| m + 1);
                let cut = match cuts.last() {
                    Some(&c) => tight.max(c + 1),
                    None => tight,
                };
                cuts.push(cut);
            }
            let cut_last = *cuts.last().expect("children nonempty");
            let block = comps[prev].every_other(phase);
            let ap = block
                .first_periodic_progression()
                .ok_or_else(|| SetsError::Guard { what: "complement exhausted".to_string() })?;
            let diag = OmegaSetExpr::diagonal(
                children.iter().map(|&p| exprs[p].clone()).collect(),
                cuts,
            )?;
            let expr = OmegaSetExpr::union(diag, OmegaSetExpr::Ep(block.clone()));

            // Beyond every cut the stage looks like a_{k−1} ∪ block, so its
            // complement continues the previous complement minus the block;
            // below the cuts, evaluate the stage expression directly.
            let w = comps[prev].diff(&block, limits.expansion_cap)?;
            let boundary = cut_last.max(w.prefix_len());
            let prefix_ones: BTreeSet<u64> =
                (0..boundary).filter(|&x| !member(&expr, x)).collect();
            let comp = w.rebase(boundary).with_prefix(prefix_ones)?;
            // Defensive window check of the complement shadow.
            for x in 0..boundary + 256 {
                if comp.member(x) == member(&expr, x) {
                    return Err(SetsError::Guard {
                        what: format!("complement shadow disagrees with the stage at {x}"),
                    });
                }
            }
            if comp.is_eventually_empty() {
                return Err(SetsError::Guard {
                    what: "complement would become finite".to_string(),
                });
            }
            picked.push(ap);
            dirty.push(dirty[prev].max(cut_last));
            exprs.push(expr);
            comps.push(comp);
            run_start = k;
        } else {
            let block = comps[prev].every_other(phase);
            let ap = block
                .first_periodic_progression()
                .ok_or_else(|| SetsError::Guard { what: "complement exhausted".to_string() })?;
            let expr = OmegaSetExpr::union(exprs[prev].clone(), OmegaSetExpr::Ep(block.clone()));
            let comp = comps[prev].diff(&block, limits.expansion_cap)?;
            if comp.is_eventually_empty() {
                return Err(SetsError::Guard {
                    what: "complement would become finite".to_string(),
                });
            }
            picked.push(ap);
            dirty.push(dirty[prev]);
            exprs.push(expr);
            comps.push(comp);
        }
    }

    // Tight certificates and witnesses for every pair.
    let mut certs = BTreeMap::new();
    for i in 0..indices.len() {
        for j in (i + 1)..indices.len() {
            let d = OmegaSetExpr::diff(exprs[i].clone(), exprs[j].clone());
            let elements: BTreeSet<u64> = (0..dirty[j]).filter(|&x| member(&d, x)).collect();
            let diff_bound = elements.iter().next_back().map_or(0, |m| m + 1);
            let (start, stride) = picked[i];
            let advanced = if start >= dirty[j] {
                start
            } else {
                start + (dirty[j] - start).div_ceil(stride) * stride
            };
            certs.insert((i, j), PairCert { diff_bound, witness: Some((advanced, stride)) });
        }
    }

    Tower::new(indices.to_vec(), exprs, certs)
}

/// Verifies the tower conditions pairwise.
///
/// Records: `tower.indices` (strictly ascending), `tower.diff-finite`
/// (`a_i ∖ a_j` finite for i < j), `tower.diff-infinite` (`a_j ∖ a_i`
/// infinite), `tower.cert-tight` (recorded bounds are exactly one past the
/// largest difference element).
pub fn validate_tower(t: &Tower, limits: &SetsLimits, replay: &str) -> Report {
    let config = config_value(&[
        ("stages", serde_json::json!(t.len())),
        ("indices", serde_json::json!(t.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>())),
        ("certificates", serde_json::json!(t.certs().len())),
    ]);
    let mut records = Vec::new();

    records.push(run_check_with_replay("tower.indices", "⊆*-chain order", replay, |c| {
        for w in t.indices().windows(2) {
            if w[0] >= w[1] {
                return c.fail(
                    serde_json::json!({"first": w[0].to_string(), "second": w[1].to_string()}),
                    format!("{} does not precede {}", w[0], w[1]),
                );
            }
        }
        c.note(format!("{} indices ascending", t.len()));
    }));

    records.push(run_check_with_replay("tower.diff-finite", "a_α ∖ a_β finite for α ≤ β", replay, |c| {
        let mut undecided: Option<String> = None;
        let mut exact = 0usize;
        let mut certified = 0usize;
        for i in 0..t.len() {
            for j in (i + 1)..t.len() {
                match decide_diff_finite_with(
                    t.stage_ep(i, limits),
                    t.stage_ep(j, limits),
                    t.set_at(i),
                    t.set_at(j),
                    t.cert(i, j),
                    limits,
                ) {
                    DiffDecision::FiniteExact(_) => exact += 1,
                    DiffDecision::FiniteCertified { .. } => certified += 1,
                    DiffDecision::Infinite => {
                        return c.fail(
                            serde_json::json!({"alpha": t.indices()[i].to_string(), "beta": t.indices()[j].to_string()}),
                            format!("a_{} ∖ a_{} is infinite", t.indices()[i], t.indices()[j]),
                        )
                    }
                    DiffDecision::CertBroken { x, why } => {
                        return c.fail(
                            serde_json::json!({
                                "alpha": t.indices()[i].to_string(),
                                "beta": t.indices()[j].to_string(),
                                "x": x,
                            }),
                            why,
                        )
                    }
                    DiffDecision::Undecided { scanned_to, found } => {
                        undecided.get_or_insert(format!(
                            "pair ({}, {}) undecided (scanned to {scanned_to}, found {found})",
                            t.indices()[i], t.indices()[j]
                        ));
                    }
                }
            }
        }
        match undecided {
            Some(msg) => c.error(msg),
            None => c.note(format!("{exact} pairs EP-exact, {certified} certificate-checked")),
        }
    }));

    records.push(run_check_with_replay("tower.diff-infinite", "a_β ∖ a_α infinite for α < β", replay, |c| {
        let mut undecided: Option<String> = None;
        let mut streams = 0usize;
        for i in 0..t.len() {
            for j in (i + 1)..t.len() {
                match decide_diff_infinite_with(
                    t.stage_ep(j, limits),
                    t.stage_ep(i, limits),
                    t.set_at(j),
                    t.set_at(i),
                    t.cert(i, j),
                    limits,
                ) {
                    InfDecision::InfiniteExact => {}
                    InfDecision::Stream { .. } => streams += 1,
                    InfDecision::ProvablyFinite(els) => {
                        return c.fail(
                            serde_json::json!({
                                "alpha": t.indices()[i].to_string(),
                                "beta": t.indices()[j].to_string(),
                                "difference": els.iter().collect::<Vec<_>>(),
                            }),
                            format!("a_{} ∖ a_{} is finite — the chain is not strict", t.indices()[j], t.indices()[i]),
                        )
                    }
                    InfDecision::CertBroken { x, why } => {
                        return c.fail(
                            serde_json::json!({
                                "alpha": t.indices()[i].to_string(),
                                "beta": t.indices()[j].to_string(),
                                "x": x,
                            }),
                            why,
                        )
                    }
                    InfDecision::Undecided { scanned_to, found } => {
                        undecided.get_or_insert(format!(
                            "pair ({}, {}) undecided (scanned to {scanned_to}, found {found})",
                            t.indices()[i], t.indices()[j]
                        ));
                    }
                }
            }
        }
        match undecided {
            Some(msg) => c.error(msg),
            None => c.note(format!("{streams} pairs via witness streams, rest EP-exact")),
        }
    }));

    records.push(run_check_with_replay("tower.cert-tight", "certificate tightness", replay, |c| {
        let mut checked = 0usize;
        for (&(i, j), cert) in t.certs() {
            if i >= t.len() || j >= t.len() || i >= j {
                return c.fail(
                    serde_json::json!({"i": i, "j": j}),
                    format!("certificate addresses a bad pair ({i}, {j})"),
                );
            }
            let els = match exact_diff_elements(t, i, j, limits) {
                Ok(e) => e,
                Err(e) => return c.error(e.to_string()),
            };
            let tight = els.iter().next_back().map_or(0, |m| m + 1);
            if tight != cert.diff_bound {
                return c.fail(
                    serde_json::json!({
                        "i": i,
                        "j": j,
                        "bound": cert.diff_bound,
                        "tight": tight,
                    }),
                    format!("bound {} for pair ({i}, {j}) is not tight (exact: {tight})", cert.diff_bound),
                );
            }
            checked += 1;
        }
        c.note(format!("{checked} certificates tight"));
    }));

    Report::new(config, records)
}

/// The Hausdorff-tower matrix `F^TO_ξ(β)` as a provider over the tower's
/// index family.
pub struct TowerMatrix {
    tower: Arc<Tower>,
    limits: SetsLimits,
    name: String,
}

impl TowerMatrix {
    pub fn new(tower: Arc<Tower>, name: impl Into<String>) -> Self {
        TowerMatrix { tower, limits: SetsLimits::default(), name: name.into() }
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }
}

impl MatrixProvider for TowerMatrix {
    fn name(&self) -> &str {
        &self.name
    }

    fn in_index_set(&self, alpha: &Ordinal) -> bool {
        self.tower.position(alpha).is_some()
    }

    fn member(&self, gamma: &Ordinal, xi: u64, beta: &Ordinal) -> Result<bool, MatrixError> {
        let j = self
            .tower
            .position(beta)
            .ok_or_else(|| MatrixError::NotInIndexSet { alpha: beta.to_string() })?;
        let Some(i) = self.tower.position(gamma) else {
            return Ok(false);
        };
        if i >= j {
            return Ok(false);
        }
        let els = exact_diff_elements(&self.tower, i, j, &self.limits)
            .map_err(|e| MatrixError::IncompleteData { what: e.to_string() })?;
        Ok(els.iter().all(|&x| x < xi))
    }

    fn enumerate(&self, xi: u64, beta: &Ordinal) -> Option<Result<BTreeSet<Ordinal>, MatrixError>> {
        let j = match self.tower.position(beta) {
            Some(j) => j,
            None => return Some(Err(MatrixError::NotInIndexSet { alpha: beta.to_string() })),
        };
        let mut out = BTreeSet::new();
        for i in 0..j {
            match self.member(&self.tower.indices()[i], xi, beta) {
                Ok(true) => {
                    out.insert(self.tower.indices()[i].clone());
                }
                Ok(false) => {}
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(out))
    }

    fn witness_g3(&self, xi: u64, alpha: &Ordinal, beta: &Ordinal) -> Option<Result<u64, MatrixError>> {
        // γ ∈ F_ξ(α) gives a_γ∖a_β ⊆ (a_γ∖a_α) ∪ (a_α∖a_β), so
        // η = max{ξ, ρ_TO(α, β)} works.
        match rho_to(&self.tower, alpha, beta, &self.limits) {
            Ok(r) => Some(Ok(r.max(xi))),
            Err(e) => Some(Err(MatrixError::IncompleteData { what: e.to_string() })),
        }
    }

    fn witness_g4(&self, xi: u64, delta: &Ordinal, beta: &Ordinal) -> Option<Result<u64, MatrixError>> {
        // Computed from the finite family: η = max ρ_TO(γ, δ) over
        // γ ∈ F_ξ(β) below δ.
        let listed = match self.enumerate(xi, beta)? {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        let mut eta = 0u64;
        for gamma in listed.iter().filter(|g| *g < delta) {
            match rho_to(&self.tower, gamma, delta, &self.limits) {
                Ok(r) => eta = eta.max(r),
                Err(e) => return Some(Err(MatrixError::IncompleteData { what: e.to_string() })),
            }
        }
        Some(Ok(eta))
    }

    fn is_strong(&self) -> bool {
        true
    }
}

/// Parses a tower manifest: `set <name> = (sexpr)` lines, `index <ord>
/// set=<name>` lines, and optional `cert <i> <j> bound=<m>
/// [witness=<start>+<stride>k]` lines keyed by 0-based stage positions.
pub fn parse_tower_manifest(text: &str) -> Result<Tower, SetsError> {
    let mut env = SetEnv::new();
    let mut indices = Vec::new();
    let mut sets = Vec::new();
    let mut certs = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| SetsError::Parse { line: line_no, msg };
        if let Some(rest) = line.strip_prefix("set ") {
            let (name, src) = rest
                .split_once('=')
                .ok_or_else(|| perr("expected `set <name> = (sexpr)`".to_string()))?;
            let expr = parse_set_expr(src, &env).map_err(perr)?;
            env.insert(name.trim(), expr);
        } else if let Some(rest) = line.strip_prefix("index ") {
            let (ord_src, set_ref) = rest
                .split_once(" set=")
                .ok_or_else(|| perr("expected `index <ord> set=<name>`".to_string()))?;
            let index = Ordinal::parse(ord_src.trim()).map_err(|e| perr(e.to_string()))?;
            let expr = env.get(set_ref.trim()).map_err(|e| perr(e.to_string()))?.clone();
            indices.push(index);
            sets.push(expr);
        } else if let Some(rest) = line.strip_prefix("cert ") {
            let (pair, cert) = parse_cert_line(rest).map_err(perr)?;
            certs.insert(pair, cert);
        } else {
            return Err(perr(format!("unrecognized line {line:?}")));
        }
    }
    Tower::new(indices, sets, certs)
}

/// Parses `"<i> <j> bound=<m> [witness=<start>+<stride>k]"`.
pub(crate) fn parse_cert_line(rest: &str) -> Result<((usize, usize), PairCert), String> {
    let words: Vec<&str> = rest.split_whitespace().collect();
    if words.len() < 3 {
        return Err("expected `<i> <j> bound=<m> [witness=<start>+<stride>k]`".to_string());
    }
    let i: usize = words[0].parse().map_err(|e| format!("bad position: {e}"))?;
    let j: usize = words[1].parse().map_err(|e| format!("bad position: {e}"))?;
    let bound = words[2]
        .strip_prefix("bound=")
        .ok_or("expected bound=<m>")?
        .parse::<u64>()
        .map_err(|e| format!("bad bound: {e}"))?;
    let witness = match words.get(3) {
        None => None,
        Some(w) => {
            let body = w.strip_prefix("witness=").ok_or("expected witness=<start>+<stride>k")?;
            let body = body.strip_suffix('k').ok_or("witness must end in k")?;
            let (s, t) = body.split_once('+').ok_or("witness must be <start>+<stride>k")?;
            Some((
                s.parse::<u64>().map_err(|e| format!("bad start: {e}"))?,
                t.parse::<u64>().map_err(|e| format!("bad stride: {e}"))?,
            ))
        }
    };
    Ok(((i, j), PairCert { diff_bound: bound, witness }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;
    use crate::sets::{evens, Finiteness};

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).expect(s)
    }

    const REPLAY: &str = "ordlab tower verify";

    fn lim() -> SetsLimits {
        SetsLimits::default()
    }

    fn two_stage_tower() -> Tower {
        // a_0 = evens, a_1 = ω ∖ {0}.
        let a1 = OmegaSetExpr::diff(OmegaSetExpr::Ep(Ep::full()), OmegaSetExpr::Ep(Ep::finite(BTreeSet::from([0]))));
        Tower::new(vec![o("0"), o("1")], vec![evens(), a1], BTreeMap::new()).unwrap()
    }

    #[test]
    fn rho_to_examples() {
        let t = two_stage_tower();
        assert_eq!(rho_to(&t, &o("0"), &o("0"), &lim()).unwrap(), 0);
        assert_eq!(rho_to(&t, &o("0"), &o("1"), &lim()).unwrap(), 1);
        assert!(matches!(
            rho_to(&t, &o("1"), &o("0"), &lim()),
            Err(SetsError::OrderViolation { .. })
        ));

        // a_0 = evens, a_1 = (evens ∖ {0,2}) ∪ odds: difference {0, 2}.
        let a1 = OmegaSetExpr::union(
            OmegaSetExpr::diff(evens(), OmegaSetExpr::Ep(Ep::finite(BTreeSet::from([0, 2])))),
            super::super::odds(),
        );
        let t2 = Tower::new(vec![o("0"), o("1")], vec![evens(), a1], BTreeMap::new()).unwrap();
        assert_eq!(rho_to(&t2, &o("0"), &o("1"), &lim()).unwrap(), 3);
    }

    #[test]
    fn hausdorff_examples() {
        let t = two_stage_tower();
        assert_eq!(
            hausdorff_tower(&t, 1, &o("1"), &lim()).unwrap(),
            BTreeSet::from([o("0")])
        );
        assert_eq!(hausdorff_tower(&t, 0, &o("1"), &lim()).unwrap(), BTreeSet::new());
        assert_eq!(hausdorff_tower(&t, 3, &o("0"), &lim()).unwrap(), BTreeSet::new());
    }

    #[test]
    fn build_small_towers() {
        let t = build_tower(&[o("0"), o("1")], 11, &lim()).unwrap();
        let report = validate_tower(&t, &lim(), REPLAY);
        assert!(report.all_pass(), "{}", report.to_text());

        let t1 = build_tower(&[o("5")], 0, &lim()).unwrap();
        assert!(validate_tower(&t1, &lim(), REPLAY).all_pass());

        assert!(matches!(
            build_tower(&[o("1"), o("0")], 0, &lim()),
            Err(SetsError::OrderViolation { .. })
        ));
    }

    #[test]
    fn build_tower_with_limit_stage() {
        let indices: Vec<Ordinal> = (0..6u64).map(Ordinal::from_nat).chain([o("w")]).collect();
        let t = build_tower(&indices, 3, &lim()).unwrap();
        let report = validate_tower(&t, &lim(), REPLAY);
        assert!(report.all_pass(), "{}", report.to_text());
        // The limit stage stores a genuine diagonal.
        assert!(matches!(
            t.set_at(6),
            OmegaSetExpr::Union(a, _) if matches!(**a, OmegaSetExpr::Diagonal { .. })
        ));
        // ρ_TO is defined on every pair.
        for i in 0..t.len() {
            for j in i..t.len() {
                rho_to(&t, &t.indices()[i], &t.indices()[j], &lim()).unwrap();
            }
        }
    }

    #[test]
    fn limit_needs_its_predecessor_on_the_c_sequence() {
        // C_{ω·2} = {ω, ω+1, …} misses 5.
        assert!(matches!(
            build_tower(&[o("0"), o("5"), o("w*2")], 0, &lim()),
            Err(SetsError::Guard { .. })
        ));
    }

    #[test]
    fn rho_to_transitive_on_built_towers() {
        let indices: Vec<Ordinal> = (0..5u64).map(Ordinal::from_nat).chain([o("w")]).collect();
        let t = build_tower(&indices, 9, &lim()).unwrap();
        let n = t.len();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let ij = rho_to(&t, &t.indices()[i], &t.indices()[j], &lim()).unwrap();
                    let jk = rho_to(&t, &t.indices()[j], &t.indices()[k], &lim()).unwrap();
                    let ik = rho_to(&t, &t.indices()[i], &t.indices()[k], &lim()).unwrap();
                    assert!(ik <= ij.max(jk), "ρ_TO not transitive at ({i},{j},{k})");
                }
            }
        }
    }

    #[test]
    fn validator_catches_reversed_and_broken_data() {
        let t = two_stage_tower();
        // Reverse the stage order: a_1 ∖ a_0 = odds ∖ {0} … infinite.
        let reversed = Tower::new(
            t.indices().to_vec(),
            vec![t.set_at(1).clone(), t.set_at(0).clone()],
            BTreeMap::new(),
        )
        .unwrap();
        let report = validate_tower(&reversed, &lim(), REPLAY);
        assert_eq!(report.status_of("tower.diff-finite"), Some(Status::Fail));

        // A loose certificate bound is flagged.
        let mut certs = BTreeMap::new();
        certs.insert((0, 1), PairCert { diff_bound: 7, witness: None });
        let loose = Tower::new(t.indices().to_vec(), vec![t.set_at(0).clone(), t.set_at(1).clone()], certs).unwrap();
        let report = validate_tower(&loose, &lim(), REPLAY);
        assert_eq!(report.status_of("tower.cert-tight"), Some(Status::Fail));
    }

    #[test]
    fn tower_matrix_agrees_with_hausdorff_check() {
        let indices: Vec<Ordinal> = (0..4u64).map(Ordinal::from_nat).chain([o("w")]).collect();
        let t = Arc::new(build_tower(&indices, 5, &lim()).unwrap());
        let p = TowerMatrix::new(Arc::clone(&t), "tower-test");
        for beta in t.indices() {
            for n in 0..6u64 {
                let via_check = hausdorff_tower(&t, n, beta, &lim()).unwrap();
                let via_provider = p.enumerate(n, beta).unwrap().unwrap();
                assert_eq!(via_check, via_provider, "n = {n}, β = {beta}");
            }
        }
    }

    #[test]
    fn manifest_round_trip() {
        let text = "\
# two stages
set a0 = (mod 2 0)
set a1 = (union (mod 2 0) (ap 1 4))
index 0 set=a0
index w set=a1
cert 0 1 bound=0 witness=1+4k
";
        let t = parse_tower_manifest(text).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.cert(0, 1).unwrap().witness, Some((1, 4)));
        let report = validate_tower(&t, &lim(), REPLAY);
        assert!(report.all_pass(), "{}", report.to_text());
        assert!(matches!(
            parse_tower_manifest("index 0 set=missing"),
            Err(SetsError::Parse { .. })
        ));
    }

    #[test]
    fn diagonal_member_semantics_match_the_expression() {
        let indices: Vec<Ordinal> = (0..4u64).map(Ordinal::from_nat).chain([o("w")]).collect();
        let t = build_tower(&indices, 2, &lim()).unwrap();
        // The stored expression is evaluable and the stage is infinite
        // (witness stream from its own certificate).
        let last = t.set_at(4);
        match super::super::finiteness(last, &lim()) {
            Finiteness::Undecided { found, .. } => assert!(found > 100),
            other => panic!("expected a scan report, got {other:?}"),
        }
    }
}
