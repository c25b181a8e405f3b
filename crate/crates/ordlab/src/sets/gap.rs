//! Pre-gaps: pairs of ⊆*-increasing chains `(a_α)`, `(b_α)` with
//! `a_α ∩ b_α = ∅` at every index, the associated intersection matrix
//! `F^G_ξ(β) = { α < β : a_α ∩ b_β ⊆ ξ }`, and the splitter test that
//! separates genuine gaps from split ones.
//!
//! The key computational identity: for α < β the pointwise containment
//! `a_α ∩ b_β ⊆ a_α ∖ a_β` holds (an element of both meets `a_β` only by
//! violating the disjointness at β), so the intersection inherits the
//! finiteness — and the certified bound — of the coordinate difference.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::matrix::{run_check_with_replay, MatrixError, MatrixProvider};
use crate::ord::Ordinal;
use crate::report::{config_value, Report};

use super::tower::{decide_diff_finite, parse_cert_line, DiffDecision, PairCert};
use super::{
    ep_of, finiteness, member, parse_set_expr, strip_comment, Finiteness, OmegaSetExpr, SetEnv,
    SetsError, SetsLimits,
};

/// Which coordinate of a pre-gap a finding refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => write!(f, "a-side"),
            Side::B => write!(f, "b-side"),
        }
    }
}

/// A finite pre-gap fragment: two set chains over one ascending index list.
#[derive(Debug, Clone)]
pub struct PreGap {
    indices: Vec<Ordinal>,
    a: Vec<OmegaSetExpr>,
    b: Vec<OmegaSetExpr>,
    a_certs: BTreeMap<(usize, usize), PairCert>,
    b_certs: BTreeMap<(usize, usize), PairCert>,
}

impl PreGap {
    pub fn new(
        indices: Vec<Ordinal>,
        a: Vec<OmegaSetExpr>,
        b: Vec<OmegaSetExpr>,
        a_certs: BTreeMap<(usize, usize), PairCert>,
        b_certs: BTreeMap<(usize, usize), PairCert>,
    ) -> Result<Self, SetsError> {
        if indices.len() != a.len() || indices.len() != b.len() {
            return Err(SetsError::Guard {
                what: format!(
                    "{} indices but {} a-sets and {} b-sets",
                    indices.len(),
                    a.len(),
                    b.len()
                ),
            });
        }
        if indices.is_empty() {
            return Err(SetsError::Guard { what: "a pre-gap needs at least one stage".to_string() });
        }
        Ok(PreGap { indices, a, b, a_certs, b_certs })
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

    pub fn position(&self, index: &Ordinal) -> Option<usize> {
        self.indices.iter().position(|i| i == index)
    }

    pub fn side_at(&self, side: Side, pos: usize) -> &OmegaSetExpr {
        match side {
            Side::A => &self.a[pos],
            Side::B => &self.b[pos],
        }
    }

    pub fn cert(&self, side: Side, i: usize, j: usize) -> Option<&PairCert> {
        match side {
            Side::A => self.a_certs.get(&(i, j)),
            Side::B => self.b_certs.get(&(i, j)),
        }
    }
}

/// Exact elements of `a_i ∩ b_j`, i ≠ j. EP-decided when possible;
/// otherwise bounded through the containment in the coordinate-difference
/// certificate (i < j: `⊆ a_i ∖ a_j`; i > j: `⊆ b_j ∖ b_i`).
pub(crate) fn exact_intersection(
    g: &PreGap,
    i: usize,
    j: usize,
    limits: &SetsLimits,
) -> Result<BTreeSet<u64>, SetsError> {
    let d = OmegaSetExpr::intersect(g.a[i].clone(), g.b[j].clone());
    if let Some(ep) = ep_of(&d, limits) {
        return ep.finite_elements().ok_or_else(|| SetsError::Guard {
            what: format!("a_{} ∩ b_{} is infinite", g.indices[i], g.indices[j]),
        });
    }
    let cert = if i < j { g.cert(Side::A, i, j) } else { g.cert(Side::B, j, i) };
    let Some(cert) = cert else {
        return Err(SetsError::Undecided {
            what: format!(
                "a_{} ∩ b_{} is not EP-decidable and no certificate covers the pair",
                g.indices[i], g.indices[j]
            ),
        });
    };
    let elements: BTreeSet<u64> = (0..cert.diff_bound).filter(|&x| member(&d, x)).collect();
    for x in cert.diff_bound..cert.diff_bound.saturating_add(limits.cert_window) {
        if member(&d, x) {
            return Err(SetsError::CertificateViolated {
                what: format!(
                    "intersection element {x} at or past the certified bound {}",
                    cert.diff_bound
                ),
            });
        }
    }
    Ok(elements)
}

/// `α ∈ F^G_ξ(β)`, i.e. `a_α ∩ b_β ⊆ ξ`. Requires α strictly before β in
/// the index list.
#[allow(non_snake_case)]
pub fn gap_F_member(
    g: &PreGap,
    alpha: &Ordinal,
    xi: u64,
    beta: &Ordinal,
    limits: &SetsLimits,
) -> Result<bool, SetsError> {
    let i = g.position(alpha).ok_or_else(|| SetsError::NotAnIndex(alpha.to_string()))?;
    let j = g.position(beta).ok_or_else(|| SetsError::NotAnIndex(beta.to_string()))?;
    if i >= j {
        return Err(SetsError::OrderViolation {
            alpha: alpha.to_string(),
            beta: beta.to_string(),
        });
    }
    let els = exact_intersection(g, i, j, limits)?;
    Ok(els.iter().all(|&x| x < xi))
}

/// `F^G_n(β)` as an explicit set of indices.
pub fn hausdorff_gap(
    g: &PreGap,
    n: u64,
    beta: &Ordinal,
    limits: &SetsLimits,
) -> Result<BTreeSet<Ordinal>, SetsError> {
    let j = g.position(beta).ok_or_else(|| SetsError::NotAnIndex(beta.to_string()))?;
    let mut out = BTreeSet::new();
    for i in 0..j {
        let els = exact_intersection(g, i, j, limits)?;
        if els.iter().all(|&x| x < n) {
            out.insert(g.indices[i].clone());
        }
    }
    Ok(out)
}

/// Outcome of [`splitter_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitterOutcome {
    /// `c` splits the pre-gap; `xi[i]` bounds `(a_i ∖ c) ∪ (c ∩ b_i)`.
    Splits { xi: Vec<u64> },
    /// A definitely infinite leftover on the named side of stage `index`.
    Fails { index: usize, side: Side },
    /// The leftover at stage `index` is not EP-decidable.
    Undecided { index: usize, side: Side, scanned_to: u64 },
}

/// Does `c` split the pre-gap — `a_α ⊆* c` and `c ∩ b_α =* ∅` for every α?
///
/// Scan order is fixed: every a-side in ascending index order, then every
/// b-side; the first failing or undecidable side is reported.
pub fn splitter_check(c: &OmegaSetExpr, g: &PreGap, limits: &SetsLimits) -> SplitterOutcome {
    let mut a_max: Vec<u64> = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        let left = OmegaSetExpr::diff(g.a[i].clone(), c.clone());
        match finiteness(&left, limits) {
            Finiteness::Finite(els) => a_max.push(els.iter().next_back().map_or(0, |m| m + 1)),
            Finiteness::Infinite => return SplitterOutcome::Fails { index: i, side: Side::A },
            Finiteness::Undecided { scanned_to, .. } => {
                return SplitterOutcome::Undecided { index: i, side: Side::A, scanned_to }
            }
        }
    }
    let mut xi = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        let left = OmegaSetExpr::intersect(c.clone(), g.b[i].clone());
        match finiteness(&left, limits) {
            Finiteness::Finite(els) => {
                xi.push(a_max[i].max(els.iter().next_back().map_or(0, |m| m + 1)))
            }
            Finiteness::Infinite => return SplitterOutcome::Fails { index: i, side: Side::B },
            Finiteness::Undecided { scanned_to, .. } => {
                return SplitterOutcome::Undecided { index: i, side: Side::B, scanned_to }
            }
        }
    }
    SplitterOutcome::Splits { xi }
}

/// Verifies the pre-gap conditions.
///
/// Records: `gap.indices` (strictly ascending), `gap.condition-1` (both
/// coordinates ⊆*-increasing), `gap.condition-2` (`a_α ∩ b_α = ∅`
/// exactly), `gap.remark` (the cross containments `a_α ∩ b_β ⊆ a_α ∖ a_β`
/// for α < β and `⊆ b_β ∖ b_α` for α > β, pointwise, from which the cross
/// intersections inherit condition-1's finiteness).
pub fn validate_pregap(g: &PreGap, limits: &SetsLimits, replay: &str) -> Report {
    let config = config_value(&[
        ("stages", serde_json::json!(g.len())),
        ("indices", serde_json::json!(g.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>())),
        (
            "certificates",
            serde_json::json!({"a": g.a_certs.len(), "b": g.b_certs.len()}),
        ),
    ]);
    let mut records = Vec::new();

    records.push(run_check_with_replay("gap.indices", "index order", replay, |c| {
        for w in g.indices().windows(2) {
            if w[0] >= w[1] {
                return c.fail(
                    serde_json::json!({"first": w[0].to_string(), "second": w[1].to_string()}),
                    format!("{} does not precede {}", w[0], w[1]),
                );
            }
        }
        c.note(format!("{} indices ascending", g.len()));
    }));

    records.push(run_check_with_replay("gap.condition-1", "(1) both chains ⊆*-increasing", replay, |c| {
        let mut undecided: Option<String> = None;
        let mut decided = 0usize;
        for (side, chain) in [(Side::A, &g.a), (Side::B, &g.b)] {
            for i in 0..g.len() {
                for j in (i + 1)..g.len() {
                    match decide_diff_finite(&chain[i], &chain[j], g.cert(side, i, j), limits) {
                        DiffDecision::FiniteExact(_) | DiffDecision::FiniteCertified { .. } => {
                            decided += 1
                        }
                        DiffDecision::Infinite => {
                            return c.fail(
                                serde_json::json!({
                                    "side": side.to_string(),
                                    "alpha": g.indices[i].to_string(),
                                    "beta": g.indices[j].to_string(),
                                }),
                                format!(
                                    "{side} difference at ({}, {}) is infinite",
                                    g.indices[i], g.indices[j]
                                ),
                            )
                        }
                        DiffDecision::CertBroken { x, why } => {
                            return c.fail(
                                serde_json::json!({
                                    "side": side.to_string(),
                                    "alpha": g.indices[i].to_string(),
                                    "beta": g.indices[j].to_string(),
                                    "x": x,
                                }),
                                why,
                            )
                        }
                        DiffDecision::Undecided { scanned_to, found } => {
                            undecided.get_or_insert(format!(
                                "{side} pair ({}, {}) undecided (scanned to {scanned_to}, found {found})",
                                g.indices[i], g.indices[j]
                            ));
                        }
                    }
                }
            }
        }
        match undecided {
            Some(msg) => c.error(msg),
            None => c.note(format!("{decided} coordinate pairs finite")),
        }
    }));

    records.push(run_check_with_replay("gap.condition-2", "(2) a_α ∩ b_α = ∅", replay, |c| {
        let mut undecided: Option<String> = None;
        for i in 0..g.len() {
            let meet = OmegaSetExpr::intersect(g.a[i].clone(), g.b[i].clone());
            if let Some(ep) = ep_of(&meet, limits) {
                match ep.finite_elements() {
                    Some(els) if els.is_empty() => {}
                    Some(els) => {
                        return c.fail(
                            serde_json::json!({
                                "alpha": g.indices[i].to_string(),
                                "elements": els.iter().collect::<Vec<_>>(),
                            }),
                            format!("a and b meet at index {} in {:?}", g.indices[i], els),
                        )
                    }
                    None => {
                        return c.fail(
                            serde_json::json!({"alpha": g.indices[i].to_string()}),
                            format!("a ∩ b at index {} is infinite", g.indices[i]),
                        )
                    }
                }
            } else if let Some(x) = (0..limits.scan_bound).find(|&x| member(&meet, x)) {
                return c.fail(
                    serde_json::json!({"alpha": g.indices[i].to_string(), "x": x}),
                    format!("a and b meet at index {} (element {x})", g.indices[i]),
                );
            } else {
                undecided.get_or_insert(format!(
                    "disjointness at {} only scanned to {}",
                    g.indices[i], limits.scan_bound
                ));
            }
        }
        match undecided {
            Some(msg) => c.error(msg),
            None => c.note(format!("{} stages exactly disjoint", g.len())),
        }
    }));

    records.push(run_check_with_replay("gap.remark", "cross intersections finite", replay, |c| {
        let mut pairs = 0usize;
        for i in 0..g.len() {
            for j in 0..g.len() {
                if i == j {
                    continue;
                }
                pairs += 1;
                for x in 0..limits.scan_bound {
                    if !(member(&g.a[i], x) && member(&g.b[j], x)) {
                        continue;
                    }
                    let contained = if i < j { !member(&g.a[j], x) } else { !member(&g.b[i], x) };
                    if !contained {
                        let superset =
                            if i < j { "a_α ∖ a_β" } else { "b_β ∖ b_α" };
                        return c.fail(
                            serde_json::json!({
                                "alpha": g.indices[i].to_string(),
                                "beta": g.indices[j].to_string(),
                                "x": x,
                            }),
                            format!(
                                "element {x} of a_{} ∩ b_{} escapes {superset}",
                                g.indices[i], g.indices[j]
                            ),
                        );
                    }
                }
            }
        }
        c.note(format!(
            "{pairs} cross pairs contained in coordinate differences (finiteness inherited from (1))"
        ));
    }));

    Report::new(config, records)
}

/// The pre-gap intersection matrix as a provider over the gap's index
/// family.
pub struct GapMatrix {
    gap: Arc<PreGap>,
    limits: SetsLimits,
    name: String,
}

impl GapMatrix {
    pub fn new(gap: Arc<PreGap>, name: impl Into<String>) -> Self {
        GapMatrix { gap, limits: SetsLimits::default(), name: name.into() }
    }

    pub fn gap(&self) -> &Arc<PreGap> {
        &self.gap
    }
}

impl MatrixProvider for GapMatrix {
    fn name(&self) -> &str {
        &self.name
    }

    fn in_index_set(&self, alpha: &Ordinal) -> bool {
        self.gap.position(alpha).is_some()
    }

    fn member(&self, gamma: &Ordinal, xi: u64, beta: &Ordinal) -> Result<bool, MatrixError> {
        let j = self
            .gap
            .position(beta)
            .ok_or_else(|| MatrixError::NotInIndexSet { alpha: beta.to_string() })?;
        let Some(i) = self.gap.position(gamma) else {
            return Ok(false);
        };
        if i >= j {
            return Ok(false);
        }
        let els = exact_intersection(&self.gap, i, j, &self.limits)
            .map_err(|e| MatrixError::IncompleteData { what: e.to_string() })?;
        Ok(els.iter().all(|&x| x < xi))
    }

    fn enumerate(&self, xi: u64, beta: &Ordinal) -> Option<Result<BTreeSet<Ordinal>, MatrixError>> {
        let j = match self.gap.position(beta) {
            Some(j) => j,
            None => return Some(Err(MatrixError::NotInIndexSet { alpha: beta.to_string() })),
        };
        let mut out = BTreeSet::new();
        for i in 0..j {
            match exact_intersection(&self.gap, i, j, &self.limits) {
                Ok(els) if els.iter().all(|&x| x < xi) => {
                    out.insert(self.gap.indices[i].clone());
                }
                Ok(_) => {}
                Err(e) => return Some(Err(MatrixError::IncompleteData { what: e.to_string() })),
            }
        }
        Some(Ok(out))
    }

    fn witness_g3(&self, xi: u64, alpha: &Ordinal, beta: &Ordinal) -> Option<Result<u64, MatrixError>> {
        // No uniform formula: computed pointwise over the finite family.
        let listed = match self.enumerate(xi, alpha)? {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        let j = match self.gap.position(beta) {
            Some(j) => j,
            None => return Some(Err(MatrixError::NotInIndexSet { alpha: beta.to_string() })),
        };
        let mut eta = xi;
        for gamma in &listed {
            let i = self.gap.position(gamma).expect("enumerated index");
            if i >= j {
                continue;
            }
            match exact_intersection(&self.gap, i, j, &self.limits) {
                Ok(els) => eta = eta.max(els.iter().next_back().map_or(0, |m| m + 1)),
                Err(e) => return Some(Err(MatrixError::IncompleteData { what: e.to_string() })),
            }
        }
        Some(Ok(eta))
    }

    fn witness_g4(&self, xi: u64, delta: &Ordinal, beta: &Ordinal) -> Option<Result<u64, MatrixError>> {
        let listed = match self.enumerate(xi, beta)? {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        let d = match self.gap.position(delta) {
            Some(d) => d,
            None => return Some(Err(MatrixError::NotInIndexSet { alpha: delta.to_string() })),
        };
        let mut eta = 0u64;
        for gamma in listed.iter().filter(|g| *g < delta) {
            let i = self.gap.position(gamma).expect("enumerated index");
            match exact_intersection(&self.gap, i, d, &self.limits) {
                Ok(els) => eta = eta.max(els.iter().next_back().map_or(0, |m| m + 1)),
                Err(e) => return Some(Err(MatrixError::IncompleteData { what: e.to_string() })),
            }
        }
        Some(Ok(eta))
    }

    fn is_strong(&self) -> bool {
        true
    }
}

/// Parses a pre-gap manifest: `set <name> = (sexpr)`, `index <ord> a=<name>
/// b=<name>`, and optional `cert <a|b> <i> <j> bound=<m>
/// [witness=<start>+<stride>k]` lines keyed by 0-based stage positions.
pub fn parse_gap_manifest(text: &str) -> Result<PreGap, SetsError> {
    let mut env = SetEnv::new();
    let mut indices = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut a_certs = BTreeMap::new();
    let mut b_certs = BTreeMap::new();
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
            let words: Vec<&str> = rest.split_whitespace().collect();
            if words.len() != 3 {
                return Err(perr("expected `index <ord> a=<name> b=<name>`".to_string()));
            }
            let index = Ordinal::parse(words[0]).map_err(|e| perr(e.to_string()))?;
            let a_name = words[1]
                .strip_prefix("a=")
                .ok_or_else(|| perr("expected a=<name>".to_string()))?;
            let b_name = words[2]
                .strip_prefix("b=")
                .ok_or_else(|| perr("expected b=<name>".to_string()))?;
            indices.push(index);
            a.push(env.get(a_name).map_err(|e| perr(e.to_string()))?.clone());
            b.push(env.get(b_name).map_err(|e| perr(e.to_string()))?.clone());
        } else if let Some(rest) = line.strip_prefix("cert ") {
            let (side, rest) = rest
                .split_once(' ')
                .ok_or_else(|| perr("expected `cert <a|b> <i> <j> …`".to_string()))?;
            let (pair, cert) = parse_cert_line(rest).map_err(perr)?;
            match side {
                "a" => a_certs.insert(pair, cert),
                "b" => b_certs.insert(pair, cert),
                other => return Err(perr(format!("unknown side {other:?}"))),
            };
        } else {
            return Err(perr(format!("unrecognized line {line:?}")));
        }
    }
    PreGap::new(indices, a, b, a_certs, b_certs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::report::Status;
    use crate::sets::Ep;

    const REPLAY: &str = "ordlab gap verify";

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).expect(s)
    }

    fn lim() -> SetsLimits {
        SetsLimits::default()
    }

    fn mod4() -> PreGap {
        parse_gap_manifest(fixtures::MOD4_PREGAP).expect("fixture parses")
    }

    #[test]
    fn mod4_fixture_passes_including_remark() {
        let g = mod4();
        let report = validate_pregap(&g, &lim(), REPLAY);
        assert!(report.all_pass(), "{}", report.to_text());
        assert_eq!(report.status_of("gap.remark"), Some(Status::Pass));
    }

    #[test]
    fn reversed_chain_fails_condition_1_with_pair_witness() {
        let g = mod4();
        let mut a: Vec<OmegaSetExpr> = (0..g.len()).map(|i| g.a[i].clone()).collect();
        a.swap(0, 1);
        let bad = PreGap::new(
            g.indices.clone(),
            a,
            g.b.clone(),
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        let report = validate_pregap(&bad, &lim(), REPLAY);
        let rec = report.record("gap.condition-1").unwrap();
        assert_eq!(rec.status, Status::Fail);
        let ce = rec.counterexample.as_ref().unwrap();
        assert_eq!(ce["side"], "a-side");
        assert_eq!(ce["alpha"], "0");
        assert_eq!(ce["beta"], "1");
    }

    #[test]
    fn meeting_chains_fail_condition_2() {
        // a_0 and b_0 share the element 0.
        let shared = OmegaSetExpr::Ep(Ep::finite(BTreeSet::from([0])));
        let g = PreGap::new(
            vec![o("0")],
            vec![OmegaSetExpr::union(super::super::evens(), shared.clone())],
            vec![OmegaSetExpr::union(super::super::odds(), shared)],
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        let report = validate_pregap(&g, &lim(), REPLAY);
        let rec = report.record("gap.condition-2").unwrap();
        assert_eq!(rec.status, Status::Fail);
        assert_eq!(rec.counterexample.as_ref().unwrap()["elements"], serde_json::json!([0]));
    }

    #[test]
    fn gap_f_member_examples() {
        let g = mod4();
        // a_0 ∩ b_1 = ∅ — in F_ξ for every ξ, even 0.
        assert!(gap_F_member(&g, &o("0"), 0, &o("1"), &lim()).unwrap());
        // Equal indices are out of order — F only looks strictly back.
        assert!(matches!(
            gap_F_member(&g, &o("1"), 5, &o("1"), &lim()),
            Err(SetsError::OrderViolation { .. })
        ));

        // A pair meeting exactly in {2}: needs ξ = 3.
        let a0 = OmegaSetExpr::union(
            OmegaSetExpr::Ep(Ep::residues(4, [0]).unwrap()),
            OmegaSetExpr::Ep(Ep::finite(BTreeSet::from([2]))),
        );
        let a1 = OmegaSetExpr::union(a0.clone(), OmegaSetExpr::Ep(Ep::residues(4, [1]).unwrap()));
        let b0 = OmegaSetExpr::Ep(Ep::residues(4, [3]).unwrap());
        let b1 = OmegaSetExpr::union(b0.clone(), OmegaSetExpr::Ep(Ep::residues(4, [2]).unwrap()));
        let g2 = PreGap::new(
            vec![o("0"), o("1")],
            vec![a0, a1],
            vec![b0, b1],
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(!gap_F_member(&g2, &o("0"), 2, &o("1"), &lim()).unwrap());
        assert!(gap_F_member(&g2, &o("0"), 3, &o("1"), &lim()).unwrap());
    }

    #[test]
    fn splitter_frozen_examples() {
        let g = mod4();
        let c_good = OmegaSetExpr::Ep(Ep::residues(4, [0, 1]).unwrap());
        match splitter_check(&c_good, &g, &lim()) {
            SplitterOutcome::Splits { xi } => assert_eq!(xi.len(), g.len()),
            other => panic!("expected a split, got {other:?}"),
        }

        let c_all = OmegaSetExpr::Ep(Ep::full());
        assert_eq!(
            splitter_check(&c_all, &g, &lim()),
            SplitterOutcome::Fails { index: 0, side: Side::B }
        );

        let c_evens = super::super::evens();
        assert_eq!(
            splitter_check(&c_evens, &g, &lim()),
            SplitterOutcome::Fails { index: 1, side: Side::A }
        );
    }

    #[test]
    fn splitter_undecided_on_diagonal_splitters() {
        let g = mod4();
        let c = OmegaSetExpr::diagonal(vec![OmegaSetExpr::Ep(Ep::full())], vec![0]).unwrap();
        match splitter_check(&c, &g, &lim()) {
            SplitterOutcome::Undecided { index: 0, side: Side::A, .. } => {}
            other => panic!("expected undecided on the first a-side, got {other:?}"),
        }
    }

    #[test]
    fn hausdorff_gap_examples() {
        let g = mod4();
        // All earlier a-chains meet b_2 in at most {2} (only a_2 contains 2,
        // and it is not earlier than itself).
        let at2 = hausdorff_gap(&g, 0, &o("2"), &lim()).unwrap();
        assert_eq!(at2, BTreeSet::from([o("0"), o("1")]));
        assert_eq!(hausdorff_gap(&g, 4, &o("0"), &lim()).unwrap(), BTreeSet::new());
    }

    #[test]
    fn gap_matrix_agrees_with_direct_membership() {
        let g = Arc::new(mod4());
        let p = GapMatrix::new(Arc::clone(&g), "gap-test");
        for beta in g.indices() {
            for xi in 0..4u64 {
                let listed = p.enumerate(xi, beta).unwrap().unwrap();
                for alpha in g.indices().iter().filter(|a| *a < beta) {
                    assert_eq!(
                        listed.contains(alpha),
                        gap_F_member(&g, alpha, xi, beta, &lim()).unwrap(),
                        "α = {alpha}, ξ = {xi}, β = {beta}"
                    );
                }
            }
        }
        // G3-style inclusion: F_ξ(α) ⊆ F_η(β) for the computed η.
        let (alpha, beta) = (&g.indices()[1], &g.indices()[2]);
        for xi in 0..4u64 {
            let eta = p.witness_g3(xi, alpha, beta).unwrap().unwrap();
            let fa = p.enumerate(xi, alpha).unwrap().unwrap();
            let fb = p.enumerate(eta, beta).unwrap().unwrap();
            assert!(fa.is_subset(&fb), "ξ = {xi}, η = {eta}");
        }
    }

    #[test]
    fn manifest_errors() {
        assert!(matches!(
            parse_gap_manifest("index 0 a=x b=y"),
            Err(SetsError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_gap_manifest("set x = (mod 2 0)\nindex 0 a=x"),
            Err(SetsError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_gap_manifest("set x = (mod 2 0)\ncert c 0 1 bound=2"),
            Err(SetsError::Parse { line: 2, .. })
        ));
    }
}
