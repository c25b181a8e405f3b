//! Decidable subsets of ω: an eventually-periodic kernel closed under
//! boolean operations, plus a guarded `Diagonal` construct for the limit
//! stages of towers.
//!
//! Membership is decidable for every expression. Exact finiteness and
//! emptiness decisions are available on the EP-closed fragment (no
//! `Diagonal` and no blow-up past the expansion caps); everything else is
//! answered by certificates or bounded scans and reported `Undecided`
//! rather than assumed.
//!
//! The EP kernel is stored sparsely — a finite prefix plus a residue set
//! modulo a period length — so sets whose periods are astronomically long
//! but thin (the "every other element of the complement" iterates reach
//! periods ~2^41 with a single residue) stay O(1) in memory.

pub mod gap;
pub mod tower;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use gap::{
    gap_F_member, hausdorff_gap, parse_gap_manifest, splitter_check, validate_pregap, GapMatrix,
    PreGap, Side, SplitterOutcome,
};
pub use tower::{
    build_tower, hausdorff_tower, parse_tower_manifest, rho_to, validate_tower, PairCert, Tower,
    TowerMatrix,
};

#[derive(Debug, Error)]
pub enum SetsError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown set name {0:?}")]
    UnknownName(String),
    #[error("{0} is not an index of the family")]
    NotAnIndex(String),
    #[error("order violation: {alpha} must come strictly before {beta}")]
    OrderViolation { alpha: String, beta: String },
    #[error("undecided: {what}")]
    Undecided { what: String },
    #[error("certificate violated: {what}")]
    CertificateViolated { what: String },
    #[error("guard exceeded: {what}")]
    Guard { what: String },
    #[error(transparent)]
    Ord(#[from] crate::ord::OrdError),
}

/// Evaluation guards for the sets module.
#[derive(Debug, Clone, Copy)]
pub struct SetsLimits {
    /// Cap on expanded residue counts (and dense loops) in EP operations.
    pub expansion_cap: u64,
    /// Scan horizon for undecided finiteness / emptiness probes.
    pub scan_bound: u64,
    /// Witness-stream length demanded for infinitude evidence.
    pub witness_count: usize,
    /// Extra window scanned past a certificate bound before accepting it.
    pub cert_window: u64,
    /// Maximum number of tower stages the builder will attempt.
    pub max_stages: usize,
}

impl Default for SetsLimits {
    fn default() -> Self {
        SetsLimits {
            expansion_cap: 1 << 16,
            scan_bound: 1 << 16,
            witness_count: 64,
            cert_window: 512,
            max_stages: 58,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm_checked(a: u64, b: u64) -> Option<u64> {
    (a / gcd(a, b)).checked_mul(b)
}

/// An eventually periodic subset of ω, stored sparsely: `x` is a member iff
/// `x < prefix_len` and `x ∈ prefix_ones`, or `x ≥ prefix_len` and
/// `(x − prefix_len) mod modulus ∈ residue_ones`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ep {
    prefix_len: u64,
    prefix_ones: BTreeSet<u64>,
    modulus: u64,
    residue_ones: BTreeSet<u64>,
}

impl Ep {
    pub fn new(
        prefix_len: u64,
        prefix_ones: BTreeSet<u64>,
        modulus: u64,
        residue_ones: BTreeSet<u64>,
    ) -> Result<Self, SetsError> {
        if modulus == 0 {
            return Err(SetsError::Guard { what: "EP period must be nonempty".to_string() });
        }
        if prefix_ones.iter().any(|&x| x >= prefix_len) {
            return Err(SetsError::Guard { what: "prefix member outside the prefix".to_string() });
        }
        if residue_ones.iter().any(|&r| r >= modulus) {
            return Err(SetsError::Guard { what: "residue outside the period".to_string() });
        }
        Ok(Ep { prefix_len, prefix_ones, modulus, residue_ones })
    }

    /// From explicit bit strings, e.g. prefix "0101", period "10".
    pub fn from_bits(prefix: &str, period: &str) -> Result<Self, SetsError> {
        let parse_bits = |s: &str| -> Result<Vec<bool>, SetsError> {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(SetsError::Guard { what: format!("bad bit {other:?}") }),
                })
                .collect()
        };
        let p = parse_bits(prefix)?;
        let w = parse_bits(period)?;
        if w.is_empty() {
            return Err(SetsError::Guard { what: "EP period must be nonempty".to_string() });
        }
        Ep::new(
            p.len() as u64,
            p.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i as u64).collect(),
            w.len() as u64,
            w.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i as u64).collect(),
        )
    }

    pub fn empty() -> Self {
        Ep { prefix_len: 0, prefix_ones: BTreeSet::new(), modulus: 1, residue_ones: BTreeSet::new() }
    }

    pub fn full() -> Self {
        Ep { prefix_len: 0, prefix_ones: BTreeSet::new(), modulus: 1, residue_ones: BTreeSet::from([0]) }
    }

    /// The finite set `elements`.
    pub fn finite(elements: BTreeSet<u64>) -> Self {
        let prefix_len = elements.iter().next_back().map_or(0, |m| m + 1);
        Ep { prefix_len, prefix_ones: elements, modulus: 1, residue_ones: BTreeSet::new() }
    }

    /// `{ x : x ≡ r (mod k) for some selected r }`.
    pub fn residues(k: u64, rs: impl IntoIterator<Item = u64>) -> Result<Self, SetsError> {
        Ep::new(0, BTreeSet::new(), k, rs.into_iter().collect())
    }

    /// The arithmetic progression `{ start + k·stride : k ≥ 0 }`.
    pub fn progression(start: u64, stride: u64) -> Result<Self, SetsError> {
        Ep::new(start, BTreeSet::new(), stride, BTreeSet::from([0]))
    }

    pub fn member(&self, x: u64) -> bool {
        if x < self.prefix_len {
            self.prefix_ones.contains(&x)
        } else {
            self.residue_ones.contains(&((x - self.prefix_len) % self.modulus))
        }
    }

    pub fn prefix_len(&self) -> u64 {
        self.prefix_len
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_eventually_empty(&self) -> bool {
        self.residue_ones.is_empty()
    }

    /// Exact element set when finite, `None` when infinite.
    pub fn finite_elements(&self) -> Option<BTreeSet<u64>> {
        self.is_eventually_empty().then(|| self.prefix_ones.clone())
    }

    /// First `k` members, ascending.
    pub fn first_members(&self, k: usize) -> Vec<u64> {
        let mut out: Vec<u64> = self.prefix_ones.iter().copied().take(k).collect();
        if !self.residue_ones.is_empty() {
            let mut block = 0u64;
            'outer: loop {
                for &r in &self.residue_ones {
                    if out.len() >= k {
                        break 'outer;
                    }
                    out.push(self.prefix_len + block * self.modulus + r);
                }
                block += 1;
            }
        }
        out
    }

    /// Replaces the prefix bits, keeping the periodic part and prefix
    /// length (use [`Ep::rebase`] first to move the boundary).
    pub fn with_prefix(&self, prefix_ones: BTreeSet<u64>) -> Result<Ep, SetsError> {
        Ep::new(self.prefix_len, prefix_ones, self.modulus, self.residue_ones.clone())
    }

    /// An arithmetic progression `(start, stride)` wholly inside the set —
    /// the first periodic residue class — when the set is infinite.
    pub fn first_periodic_progression(&self) -> Option<(u64, u64)> {
        self.residue_ones.iter().next().map(|&r| (self.prefix_len + r, self.modulus))
    }

    /// Moves the prefix boundary forward to `new_len ≥ prefix_len`, keeping
    /// the set identical (pattern values in between become prefix bits).
    pub fn rebase(&self, new_len: u64) -> Ep {
        if new_len <= self.prefix_len {
            return self.clone();
        }
        let mut prefix_ones = self.prefix_ones.clone();
        for x in self.prefix_len..new_len {
            if self.member(x) {
                prefix_ones.insert(x);
            }
        }
        let shift = (new_len - self.prefix_len) % self.modulus;
        let residue_ones = self
            .residue_ones
            .iter()
            .map(|&r| (r + self.modulus - shift) % self.modulus)
            .collect();
        Ep { prefix_len: new_len, prefix_ones, modulus: self.modulus, residue_ones }
    }

    fn binary(
        &self,
        other: &Ep,
        op: impl Fn(bool, bool) -> bool,
        cap: u64,
    ) -> Result<Ep, SetsError> {
        let prefix_len = self.prefix_len.max(other.prefix_len);
        if prefix_len > cap {
            return Err(SetsError::Guard { what: format!("prefix {prefix_len} exceeds cap {cap}") });
        }
        let a = self.rebase(prefix_len);
        let b = other.rebase(prefix_len);
        let modulus = lcm_checked(a.modulus, b.modulus)
            .ok_or_else(|| SetsError::Guard { what: "period lcm overflows".to_string() })?;
        let expansions = (modulus / a.modulus)
            .saturating_mul(a.residue_ones.len() as u64)
            .max((modulus / b.modulus).saturating_mul(b.residue_ones.len() as u64));
        let dense = op(false, false);
        if (dense && modulus > cap) || (!dense && expansions > cap) {
            return Err(SetsError::Guard {
                what: format!("EP operation would expand past cap {cap} (modulus {modulus})"),
            });
        }
        let expand = |e: &Ep| -> BTreeSet<u64> {
            let mut out = BTreeSet::new();
            for &r in &e.residue_ones {
                let mut v = r;
                while v < modulus {
                    out.insert(v);
                    v += e.modulus;
                }
            }
            out
        };
        let ra = expand(&a);
        let rb = expand(&b);
        let residue_ones: BTreeSet<u64> = if dense {
            (0..modulus).filter(|r| op(ra.contains(r), rb.contains(r))).collect()
        } else {
            ra.union(&rb).filter(|r| op(ra.contains(*r), rb.contains(*r))).copied().collect()
        };
        let prefix_ones = (0..prefix_len)
            .filter(|&x| op(self.member(x), other.member(x)))
            .collect();
        Ok(Ep { prefix_len, prefix_ones, modulus, residue_ones })
    }

    pub fn union(&self, other: &Ep, cap: u64) -> Result<Ep, SetsError> {
        self.binary(other, |a, b| a || b, cap)
    }

    pub fn intersect(&self, other: &Ep, cap: u64) -> Result<Ep, SetsError> {
        self.binary(other, |a, b| a && b, cap)
    }

    pub fn diff(&self, other: &Ep, cap: u64) -> Result<Ep, SetsError> {
        self.binary(other, |a, b| a && !b, cap)
    }

    pub fn complement(&self, cap: u64) -> Result<Ep, SetsError> {
        if self.modulus > cap || self.prefix_len > cap {
            return Err(SetsError::Guard {
                what: format!("complement would densify past cap {cap}"),
            });
        }
        Ok(Ep {
            prefix_len: self.prefix_len,
            prefix_ones: (0..self.prefix_len).filter(|x| !self.prefix_ones.contains(x)).collect(),
            modulus: self.modulus,
            residue_ones: (0..self.modulus).filter(|r| !self.residue_ones.contains(r)).collect(),
        })
    }

    /// The set of every other member (positions `phase, phase+2, …` in
    /// ascending enumeration). Exact: the result's period is at most twice
    /// this set's, regardless of how thin it is.
    pub fn every_other(&self, phase: bool) -> Ep {
        let sel = phase as u64;
        let prefix_members: Vec<u64> = self.prefix_ones.iter().copied().collect();
        let prefix_ones: BTreeSet<u64> = prefix_members
            .iter()
            .enumerate()
            .filter(|(i, _)| (*i as u64) % 2 == sel)
            .map(|(_, &x)| x)
            .collect();
        let t = prefix_members.len() as u64;
        let m = self.residue_ones.len() as u64;
        let residues: Vec<u64> = self.residue_ones.iter().copied().collect();
        if m == 0 {
            return Ep {
                prefix_len: self.prefix_len,
                prefix_ones,
                modulus: self.modulus,
                residue_ones: BTreeSet::new(),
            };
        }
        if m % 2 == 0 {
            // Same parity at every period boundary.
            let residue_ones = residues
                .iter()
                .enumerate()
                .filter(|(i, _)| (t + *i as u64) % 2 == sel)
                .map(|(_, &r)| r)
                .collect();
            Ep { prefix_len: self.prefix_len, prefix_ones, modulus: self.modulus, residue_ones }
        } else {
            // Parity alternates per period: the pattern repeats every 2
            // periods.
            let mut residue_ones = BTreeSet::new();
            for block in 0..2u64 {
                for (i, &r) in residues.iter().enumerate() {
                    if (t + block * m + i as u64) % 2 == sel {
                        residue_ones.insert(block * self.modulus + r);
                    }
                }
            }
            Ep {
                prefix_len: self.prefix_len,
                prefix_ones,
                modulus: self.modulus * 2,
                residue_ones,
            }
        }
    }
}

impl fmt::Display for Ep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ones: Vec<String> = self.prefix_ones.iter().map(|x| x.to_string()).collect();
        let rs: Vec<String> = self.residue_ones.iter().map(|r| r.to_string()).collect();
        write!(
            f,
            "ep(prefix<{}: {{{}}}, mod {}: {{{}}})",
            self.prefix_len,
            ones.join(","),
            self.modulus,
            rs.join(",")
        )
    }
}

/// A decidable subset of ω.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OmegaSetExpr {
    Ep(Ep),
    Union(Box<OmegaSetExpr>, Box<OmegaSetExpr>),
    Intersect(Box<OmegaSetExpr>, Box<OmegaSetExpr>),
    Diff(Box<OmegaSetExpr>, Box<OmegaSetExpr>),
    Complement(Box<OmegaSetExpr>),
    /// `⋃_i (child_i ∖ [0, cut_i))` with strictly increasing cuts.
    Diagonal { children: Vec<OmegaSetExpr>, cuts: Vec<u64> },
}

impl OmegaSetExpr {
    pub fn ep(e: Ep) -> Self {
        OmegaSetExpr::Ep(e)
    }

    pub fn union(a: OmegaSetExpr, b: OmegaSetExpr) -> Self {
        OmegaSetExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn intersect(a: OmegaSetExpr, b: OmegaSetExpr) -> Self {
        OmegaSetExpr::Intersect(Box::new(a), Box::new(b))
    }

    pub fn diff(a: OmegaSetExpr, b: OmegaSetExpr) -> Self {
        OmegaSetExpr::Diff(Box::new(a), Box::new(b))
    }

    pub fn complement(a: OmegaSetExpr) -> Self {
        OmegaSetExpr::Complement(Box::new(a))
    }

    pub fn sym_diff(a: OmegaSetExpr, b: OmegaSetExpr) -> Self {
        OmegaSetExpr::union(
            OmegaSetExpr::diff(a.clone(), b.clone()),
            OmegaSetExpr::diff(b, a),
        )
    }

    pub fn diagonal(children: Vec<OmegaSetExpr>, cuts: Vec<u64>) -> Result<Self, SetsError> {
        if children.len() != cuts.len() {
            return Err(SetsError::Guard {
                what: format!("{} children but {} cuts", children.len(), cuts.len()),
            });
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SetsError::Guard { what: "cuts must be strictly increasing".to_string() });
        }
        Ok(OmegaSetExpr::Diagonal { children, cuts })
    }
}

/// Decidable membership.
pub fn member(e: &OmegaSetExpr, x: u64) -> bool {
    match e {
        OmegaSetExpr::Ep(ep) => ep.member(x),
        OmegaSetExpr::Union(a, b) => member(a, x) || member(b, x),
        OmegaSetExpr::Intersect(a, b) => member(a, x) && member(b, x),
        OmegaSetExpr::Diff(a, b) => member(a, x) && !member(b, x),
        OmegaSetExpr::Complement(a) => !member(a, x),
        OmegaSetExpr::Diagonal { children, cuts } => children
            .iter()
            .zip(cuts.iter())
            .any(|(child, &cut)| cut <= x && member(child, x)),
    }
}

/// Exact EP form of an expression, when one is computable: `None` for
/// anything containing a `Diagonal` or blowing past the expansion cap.
pub fn ep_of(e: &OmegaSetExpr, limits: &SetsLimits) -> Option<Ep> {
    let cap = limits.expansion_cap;
    match e {
        OmegaSetExpr::Ep(ep) => Some(ep.clone()),
        OmegaSetExpr::Union(a, b) => ep_of(a, limits)?.union(&ep_of(b, limits)?, cap).ok(),
        OmegaSetExpr::Intersect(a, b) => ep_of(a, limits)?.intersect(&ep_of(b, limits)?, cap).ok(),
        OmegaSetExpr::Diff(a, b) => ep_of(a, limits)?.diff(&ep_of(b, limits)?, cap).ok(),
        OmegaSetExpr::Complement(a) => ep_of(a, limits)?.complement(cap).ok(),
        OmegaSetExpr::Diagonal { .. } => None,
    }
}

/// Outcome of a finiteness query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finiteness {
    Finite(BTreeSet<u64>),
    Infinite,
    /// No exact decision: what a bounded scan saw.
    Undecided { scanned_to: u64, found: usize, sample: Vec<u64> },
}

/// Exact on the EP-decidable fragment; a bounded scan report otherwise.
pub fn finiteness(e: &OmegaSetExpr, limits: &SetsLimits) -> Finiteness {
    if let Some(ep) = ep_of(e, limits) {
        return match ep.finite_elements() {
            Some(set) => Finiteness::Finite(set),
            None => Finiteness::Infinite,
        };
    }
    let mut found = 0usize;
    let mut sample = Vec::new();
    for x in 0..limits.scan_bound {
        if member(e, x) {
            found += 1;
            if sample.len() < 16 {
                sample.push(x);
            }
        }
    }
    Finiteness::Undecided { scanned_to: limits.scan_bound, found, sample }
}

/// A named environment of set expressions, as read from a set file.
#[derive(Debug, Clone, Default)]
pub struct SetEnv {
    names: Vec<String>,
    map: std::collections::BTreeMap<String, OmegaSetExpr>,
}

impl SetEnv {
    pub fn new() -> Self {
        SetEnv::default()
    }

    pub fn get(&self, name: &str) -> Result<&OmegaSetExpr, SetsError> {
        self.map.get(name).ok_or_else(|| SetsError::UnknownName(name.to_string()))
    }

    pub fn insert(&mut self, name: &str, expr: OmegaSetExpr) {
        if !self.map.contains_key(name) {
            self.names.push(name.to_string());
        }
        self.map.insert(name.to_string(), expr);
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Parses a set file: `name = (sexpr)` lines, `#` comments. Later lines
    /// may reference earlier names (inlined at parse time).
    pub fn parse(text: &str) -> Result<Self, SetsError> {
        let mut env = SetEnv::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (name, expr_src) = line.split_once('=').ok_or_else(|| SetsError::Parse {
                line: line_no,
                msg: "expected `name = (sexpr)`".to_string(),
            })?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
                return Err(SetsError::Parse { line: line_no, msg: format!("bad set name {name:?}") });
            }
            let expr = parse_set_expr(expr_src, &env)
                .map_err(|msg| SetsError::Parse { line: line_no, msg })?;
            env.insert(name, expr);
        }
        Ok(env)
    }
}

pub(crate) fn strip_comment(raw: &str) -> &str {
    match raw.find('#') {
        Some(pos) => raw[..pos].trim(),
        None => raw.trim(),
    }
}

/// Parses one s-expression against an environment of named sets.
///
/// Forms: `(ep prefix=0101 period=10)`, `(fin 1 2 3)`, `(mod k r…)`,
/// `(ap start stride)`, `(all)`, `(none)`, `(union E…)`, `(inter E…)`,
/// `(diff E E)`, `(comp E)`, `(diag (E…) cuts=(c…))`, or a bare name.
pub fn parse_set_expr(src: &str, env: &SetEnv) -> Result<OmegaSetExpr, String> {
    let spaced = src.replace('(', " ( ").replace(')', " ) ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let (expr, used) = parse_tokens(&tokens, 0, env)?;
    if used != tokens.len() {
        return Err(format!("trailing tokens after expression: {:?}", &tokens[used..]));
    }
    Ok(expr)
}

fn parse_tokens(
    tokens: &[&str],
    pos: usize,
    env: &SetEnv,
) -> Result<(OmegaSetExpr, usize), String> {
    let tok = *tokens.get(pos).ok_or("unexpected end of expression")?;
    if tok != "(" {
        // Bare name reference.
        return Ok((env.get(tok).map_err(|e| e.to_string())?.clone(), pos + 1));
    }
    let head = *tokens.get(pos + 1).ok_or("empty form")?;
    let mut cur = pos + 2;
    let close = |cur: usize| -> Result<usize, String> {
        if tokens.get(cur) == Some(&")") {
            Ok(cur + 1)
        } else {
            Err(format!("expected `)` after {head} form"))
        }
    };
    match head {
        "ep" => {
            let mut prefix = "";
            let mut period = "";
            while let Some(&t) = tokens.get(cur) {
                if t == ")" {
                    break;
                }
                if let Some(v) = t.strip_prefix("prefix=") {
                    prefix = v;
                } else if let Some(v) = t.strip_prefix("period=") {
                    period = v;
                } else {
                    return Err(format!("unexpected token {t:?} in ep form"));
                }
                cur += 1;
            }
            let ep = Ep::from_bits(prefix, period).map_err(|e| e.to_string())?;
            Ok((OmegaSetExpr::Ep(ep), close(cur)?))
        }
        "fin" => {
            let mut elems = BTreeSet::new();
            while let Some(&t) = tokens.get(cur) {
                if t == ")" {
                    break;
                }
                elems.insert(t.parse::<u64>().map_err(|e| e.to_string())?);
                cur += 1;
            }
            Ok((OmegaSetExpr::Ep(Ep::finite(elems)), close(cur)?))
        }
        "mod" => {
            let k = tokens
                .get(cur)
                .ok_or("mod form needs a modulus")?
                .parse::<u64>()
                .map_err(|e| e.to_string())?;
            cur += 1;
            let mut rs = Vec::new();
            while let Some(&t) = tokens.get(cur) {
                if t == ")" {
                    break;
                }
                rs.push(t.parse::<u64>().map_err(|e| e.to_string())?);
                cur += 1;
            }
            let ep = Ep::residues(k, rs).map_err(|e| e.to_string())?;
            Ok((OmegaSetExpr::Ep(ep), close(cur)?))
        }
        "ap" => {
            let start = tokens
                .get(cur)
                .ok_or("ap form needs start and stride")?
                .parse::<u64>()
                .map_err(|e| e.to_string())?;
            let stride = tokens
                .get(cur + 1)
                .ok_or("ap form needs start and stride")?
                .parse::<u64>()
                .map_err(|e| e.to_string())?;
            let ep = Ep::progression(start, stride).map_err(|e| e.to_string())?;
            Ok((OmegaSetExpr::Ep(ep), close(cur + 2)?))
        }
        "all" => Ok((OmegaSetExpr::Ep(Ep::full()), close(cur)?)),
        "none" => Ok((OmegaSetExpr::Ep(Ep::empty()), close(cur)?)),
        "union" | "inter" => {
            let mut parts = Vec::new();
            while tokens.get(cur).is_some_and(|t| *t != ")") {
                let (e, next) = parse_tokens(tokens, cur, env)?;
                parts.push(e);
                cur = next;
            }
            if parts.is_empty() {
                return Err(format!("{head} form needs at least one operand"));
            }
            let mut it = parts.into_iter();
            let first = it.next().expect("nonempty");
            let folded = it.fold(first, |acc, e| {
                if head == "union" {
                    OmegaSetExpr::union(acc, e)
                } else {
                    OmegaSetExpr::intersect(acc, e)
                }
            });
            Ok((folded, close(cur)?))
        }
        "diff" => {
            let (a, next) = parse_tokens(tokens, cur, env)?;
            let (b, next) = parse_tokens(tokens, next, env)?;
            Ok((OmegaSetExpr::diff(a, b), close(next)?))
        }
        "comp" => {
            let (a, next) = parse_tokens(tokens, cur, env)?;
            Ok((OmegaSetExpr::complement(a), close(next)?))
        }
        "diag" => {
            if tokens.get(cur) != Some(&"(") {
                return Err("diag form needs a parenthesized child list".to_string());
            }
            cur += 1;
            let mut children = Vec::new();
            while tokens.get(cur).is_some_and(|t| *t != ")") {
                let (e, next) = parse_tokens(tokens, cur, env)?;
                children.push(e);
                cur = next;
            }
            cur = close(cur).map_err(|_| "unclosed diag child list".to_string())?;
            if tokens.get(cur) != Some(&"cuts=") || tokens.get(cur + 1) != Some(&"(") {
                return Err("diag form needs cuts=(…)".to_string());
            }
            cur += 2;
            let mut cuts = Vec::new();
            while let Some(&t) = tokens.get(cur) {
                if t == ")" {
                    break;
                }
                cuts.push(t.parse::<u64>().map_err(|e| e.to_string())?);
                cur += 1;
            }
            cur = close(cur)?;
            let d = OmegaSetExpr::diagonal(children, cuts).map_err(|e| e.to_string())?;
            Ok((d, close(cur)?))
        }
        other => Err(format!("unknown form {other:?}")),
    }
}

/// Common fixture: the even numbers.
pub fn evens() -> OmegaSetExpr {
    OmegaSetExpr::Ep(Ep::residues(2, [0]).expect("valid"))
}

/// Common fixture: the odd numbers.
pub fn odds() -> OmegaSetExpr {
    OmegaSetExpr::Ep(Ep::residues(2, [1]).expect("valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim() -> SetsLimits {
        SetsLimits::default()
    }

    #[test]
    fn ep_membership_basics() {
        let e = Ep::from_bits("0101", "10").unwrap();
        // Prefix: 1, 3; then pattern from x=4: 4, 6, 8, …
        assert!(!e.member(0));
        assert!(e.member(1));
        assert!(e.member(3));
        assert!(e.member(4));
        assert!(!e.member(5));
        assert!(e.member(6));
        assert_eq!(e.first_members(5), vec![1, 3, 4, 6, 8]);
    }

    #[test]
    fn member_examples() {
        assert!(member(&evens(), 4));
        assert!(!member(&OmegaSetExpr::complement(evens()), 4));
        let diag = OmegaSetExpr::diagonal(vec![evens(), odds()], vec![0, 10]).unwrap();
        assert!(member(&diag, 11)); // 11 is odd and ≥ 10
        assert!(!member(&diag, 9)); // 9 is odd but below its cut, and not even
        assert!(member(&diag, 8)); // even, cut 0
    }

    #[test]
    fn finiteness_examples() {
        assert_eq!(
            finiteness(&OmegaSetExpr::intersect(evens(), odds()), &lim()),
            Finiteness::Finite(BTreeSet::new())
        );
        assert_eq!(finiteness(&evens(), &lim()), Finiteness::Infinite);
        let with3 = OmegaSetExpr::union(evens(), OmegaSetExpr::Ep(Ep::finite(BTreeSet::from([3]))));
        assert_eq!(
            finiteness(&OmegaSetExpr::sym_diff(evens(), with3), &lim()),
            Finiteness::Finite(BTreeSet::from([3]))
        );
    }

    #[test]
    fn diagonal_is_undecided_but_scanned() {
        let diag = OmegaSetExpr::diagonal(vec![evens()], vec![4]).unwrap();
        match finiteness(&diag, &SetsLimits { scan_bound: 100, ..lim() }) {
            Finiteness::Undecided { scanned_to: 100, found, sample } => {
                assert_eq!(found, 48); // evens in [4, 100)
                assert_eq!(sample[0], 4);
            }
            other => panic!("expected Undecided, got {other:?}"),
        }
    }

    #[test]
    fn every_other_of_odds_is_the_right_progression() {
        let odds_ep = Ep::residues(2, [1]).unwrap();
        let picked = odds_ep.every_other(false);
        // Odd numbers 1,3,5,7,… — every other starting at position 0: 1,5,9,…
        for x in [1u64, 5, 9, 13] {
            assert!(picked.member(x), "{x}");
        }
        for x in [0u64, 2, 3, 7, 11] {
            assert!(!picked.member(x), "{x}");
        }
        let other = odds_ep.every_other(true);
        assert!(other.member(3) && other.member(7) && !other.member(1) && !other.member(5));
    }

    #[test]
    fn every_other_stays_sparse_under_iteration() {
        // Start from odds and repeatedly remove every other member: after k
        // steps the set is a single residue class mod 2^{k+1}.
        let mut c = Ep::residues(2, [1]).unwrap();
        for step in 0..40 {
            let picked = c.every_other(false);
            c = c.diff(&picked, 1 << 16).unwrap_or_else(|_| {
                // Sparse path: both share power-of-two moduli, so the cap
                // should never trip; fail loudly if it does.
                panic!("expansion cap tripped at step {step}")
            });
            assert!(c.residue_ones.len() <= 2, "step {step}: {} residues", c.residue_ones.len());
        }
        assert!(c.modulus >= 1 << 40);
        let first = c.first_members(3);
        assert_eq!(first.len(), 3);
        assert_eq!(first[1] - first[0], c.modulus);
    }

    #[test]
    fn ep_ops_agree_with_bitmap_brute_force() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let ep = |rng: &mut StdRng| -> Ep {
                let plen = rng.gen_range(0..5u64);
                let mlen = rng.gen_range(1..6u64);
                let p: BTreeSet<u64> = (0..plen).filter(|_| rng.gen_bool(0.5)).collect();
                let r: BTreeSet<u64> = (0..mlen).filter(|_| rng.gen_bool(0.5)).collect();
                Ep::new(plen, p, mlen, r).unwrap()
            };
            let a = ep(&mut rng);
            let b = ep(&mut rng);
            let bound = 4 * (a.prefix_len.max(b.prefix_len) + a.modulus * b.modulus);
            let u = a.union(&b, 1 << 16).unwrap();
            let i = a.intersect(&b, 1 << 16).unwrap();
            let d = a.diff(&b, 1 << 16).unwrap();
            let n = a.complement(1 << 16).unwrap();
            for x in 0..bound {
                assert_eq!(u.member(x), a.member(x) || b.member(x));
                assert_eq!(i.member(x), a.member(x) && b.member(x));
                assert_eq!(d.member(x), a.member(x) && !b.member(x));
                assert_eq!(n.member(x), !a.member(x));
            }
        }
    }

    #[test]
    fn rebase_preserves_the_set() {
        let e = Ep::from_bits("011", "101").unwrap();
        let r = e.rebase(7);
        for x in 0..40 {
            assert_eq!(e.member(x), r.member(x), "x = {x}");
        }
    }

    #[test]
    fn parser_round_trips() {
        let mut env = SetEnv::new();
        env.insert("evens", evens());
        let e = parse_set_expr("(diff (union evens (fin 3)) (mod 4 0))", &env).unwrap();
        // evens ∪ {3} minus multiples of 4 = {2, 3, 6, 10, 14, …}
        assert!(member(&e, 2) && member(&e, 3) && member(&e, 6) && !member(&e, 4) && !member(&e, 0));

        let d = parse_set_expr("(diag ((mod 2 0) (mod 2 1)) cuts=(0 10))", &env).unwrap();
        assert!(member(&d, 11) && !member(&d, 9));

        let ap = parse_set_expr("(ap 7 8)", &env).unwrap();
        assert!(member(&ap, 7) && member(&ap, 15) && !member(&ap, 8));

        assert!(parse_set_expr("(diag ((mod 2 0)) cuts=(5 4))", &env).is_err());
        assert!(parse_set_expr("nosuch", &env).is_err());
        assert!(parse_set_expr("(union)", &env).is_err());
    }

    #[test]
    fn set_env_files() {
        let text = "\
# named sets
evens = (mod 2 0)
odds  = (comp evens)
both  = (union evens odds)
";
        let env = SetEnv::parse(text).unwrap();
        assert!(member(env.get("odds").unwrap(), 3));
        assert_eq!(finiteness(env.get("both").unwrap(), &lim()), Finiteness::Infinite);
        assert!(matches!(
            SetEnv::parse("x = (undefined-form)"),
            Err(SetsError::Parse { line: 1, .. })
        ));
    }
}
