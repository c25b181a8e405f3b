//! The group of finite ordinal sets under symmetric difference, topologized
//! by a matrix.
//!
//! Elements are finite sets of ordinals; `a △ b` is the group operation,
//! `∅` the identity, every element its own inverse, and the group is
//! abelian. A matrix provider turns into a neighborhood base at the
//! identity via
//!
//! ```text
//! U_ξ(α) = { a finite : a ∩ F_ξ(α) = ∅ },
//! ```
//!
//! and more generally a finite subbase selection `K = {(ξᵢ, βᵢ)}` gives
//! `U_K = ⋂ᵢ U_{ξᵢ}(βᵢ)`. The six neighborhood-base axioms hold with
//! explicit witnesses: products and translates stay inside the same `U`
//! because `a △ b ⊆ a ∪ b`; inverses are free (self-inverse); conjugation
//! is trivial (abelian); two basic entries contain a common third via the
//! G2/G3 witnesses; and no nonempty `a` survives every neighborhood because
//! `ρ_F(γ, α)` pins each γ ∈ a into some `F_ξ(α)`.
//!
//! `restriction_cover` is the trace-topology computation: restricted to
//! sets below δ, the neighborhood `U_ξ(α)` is covered by `U_η(δ)` with
//! η from the G3 witness when α ≤ δ and from the G4 witness (strong
//! providers only) when δ < α.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::matrix::{rho_f, run_check_with_replay, MatrixError, MatrixProvider};
use crate::ord::Ordinal;
use crate::report::{config_value, Report};

/// A finite set of ordinals — one element of the symmetric-difference group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Hash)]
pub struct GroupElement(BTreeSet<Ordinal>);

impl GroupElement {
    pub fn empty() -> Self {
        GroupElement(BTreeSet::new())
    }

    pub fn new(items: impl IntoIterator<Item = Ordinal>) -> Self {
        GroupElement(items.into_iter().collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Ordinal> {
        self.0.iter()
    }

    pub fn contains(&self, x: &Ordinal) -> bool {
        self.0.contains(x)
    }

    pub fn as_set(&self) -> &BTreeSet<Ordinal> {
        &self.0
    }

    /// `self △ other` — the group operation.
    pub fn sym_diff(&self, other: &GroupElement) -> GroupElement {
        GroupElement(self.0.symmetric_difference(&other.0).cloned().collect())
    }

    /// Parses `{1, w, w+1}`; `{}` is the identity.
    pub fn parse(s: &str) -> Result<Self, String> {
        let t = s.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| format!("expected braces around a set, got {s:?}"))?;
        let mut items = BTreeSet::new();
        for part in inner.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            items.insert(Ordinal::parse(part).map_err(|e| e.to_string())?);
        }
        Ok(GroupElement(items))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{{}}}",
            self.0.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(", ")
        )
    }
}

/// A neighborhood of the identity: a finite intersection of basic entries
/// `U_ξ(β)` over one provider. A basic neighborhood is the singleton case.
#[derive(Clone)]
pub struct Neighborhood {
    provider: Arc<dyn MatrixProvider>,
    pairs: Vec<(u64, Ordinal)>,
}

impl Neighborhood {
    /// `U_ξ(α)`; α must be an owner of the provider.
    pub fn basic(provider: Arc<dyn MatrixProvider>, xi: u64, alpha: Ordinal) -> Result<Self, MatrixError> {
        Neighborhood::subbase(provider, vec![(xi, alpha)])
    }

    /// `⋂ U_{ξᵢ}(βᵢ)` for a nonempty selection with owners in the index set.
    pub fn subbase(
        provider: Arc<dyn MatrixProvider>,
        pairs: Vec<(u64, Ordinal)>,
    ) -> Result<Self, MatrixError> {
        if pairs.is_empty() {
            return Err(MatrixError::InvalidFamily { why: "empty subbase selection".to_string() });
        }
        for (_, beta) in &pairs {
            if !provider.in_index_set(beta) {
                return Err(MatrixError::NotInIndexSet { alpha: beta.to_string() });
            }
        }
        Ok(Neighborhood { provider, pairs })
    }

    pub fn provider(&self) -> &Arc<dyn MatrixProvider> {
        &self.provider
    }

    pub fn pairs(&self) -> &[(u64, Ordinal)] {
        &self.pairs
    }

    pub fn is_basic(&self) -> bool {
        self.pairs.len() == 1
    }

    /// `a ∈ U` — a avoids every selected `F_ξ(β)`.
    pub fn contains(&self, a: &GroupElement) -> Result<bool, MatrixError> {
        for (xi, beta) in &self.pairs {
            for gamma in a.iter() {
                if self.provider.member(gamma, *xi, beta)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.pairs.iter().map(|(xi, b)| format!("U_{xi}({b})")).collect();
        write!(f, "{}", parts.join(" ∩ "))
    }
}

/// Free-function form of the membership test.
pub fn in_neighborhood(a: &GroupElement, u: &Neighborhood) -> Result<bool, MatrixError> {
    u.contains(a)
}

/// Outcome of a convergence scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Convergence {
    /// Least index t such that every element from t on lies in U.
    TailIndex(usize),
    /// The last element violates, so no tail works; all violating indices.
    Counterexample(Vec<usize>),
}

/// Scans a sequence against one neighborhood. An empty sequence converges
/// with tail 0.
pub fn converges(seq: &[GroupElement], u: &Neighborhood) -> Result<Convergence, MatrixError> {
    let mut violations = Vec::new();
    for (i, a) in seq.iter().enumerate() {
        if !u.contains(a)? {
            violations.push(i);
        }
    }
    match violations.last() {
        None => Ok(Convergence::TailIndex(0)),
        Some(&last) if last + 1 < seq.len() => Ok(Convergence::TailIndex(last + 1)),
        Some(_) => Ok(Convergence::Counterexample(violations)),
    }
}

/// Trace of `U_ξ(α)` on sets below δ: least η with
/// `[δ]^{<ω} ∩ U_η(δ) ⊆ U_ξ(α)` obtainable from the provider's witnesses,
/// i.e. η with `F_ξ(α) ∩ δ ⊆ F_η(δ)`.
///
/// α ≤ δ routes through the G3 witness, δ < α through the G4 witness (strong
/// providers only — `Unsupported` otherwise). When the provider can
/// enumerate `F_ξ(α)` the inclusion is re-checked pointwise before the
/// witness is returned.
pub fn restriction_cover(
    delta: &Ordinal,
    xi: u64,
    alpha: &Ordinal,
    p: &dyn MatrixProvider,
) -> Result<u64, MatrixError> {
    for x in [delta, alpha] {
        if !p.in_index_set(x) {
            return Err(MatrixError::NotInIndexSet { alpha: x.to_string() });
        }
    }
    if alpha == delta {
        return Ok(xi);
    }
    let eta = if alpha < delta {
        match p.witness_g3(xi, alpha, delta) {
            Some(r) => r?,
            None => {
                return Err(MatrixError::Unsupported {
                    what: format!("provider {} offers no G3 witness", p.name()),
                })
            }
        }
    } else {
        if !p.is_strong() {
            return Err(MatrixError::Unsupported {
                what: format!("restriction below a larger owner needs a strong provider; {} is not", p.name()),
            });
        }
        match p.witness_g4(xi, delta, alpha) {
            Some(r) => r?,
            None => {
                return Err(MatrixError::Unsupported {
                    what: format!("strong provider {} offers no G4 witness", p.name()),
                })
            }
        }
    };
    // Post-condition self-test on enumerable data: F_ξ(α) ∩ δ ⊆ F_η(δ).
    if let Some(listed) = p.enumerate(xi, alpha) {
        for gamma in listed?.iter().filter(|g| *g < delta) {
            if !p.member(gamma, eta, delta)? {
                return Err(MatrixError::OrderViolationInData {
                    what: format!(
                        "witness η = {eta} fails: {gamma} ∈ F_{xi}({alpha}) ∩ {delta} but ∉ F_{eta}({delta})"
                    ),
                });
            }
        }
    }
    Ok(eta)
}

/// Options for [`verify_group_axioms`].
#[derive(Debug, Clone)]
pub struct GroupVerifyOptions {
    /// Cap on (a,b) pairs examined per neighborhood in the closure checks.
    pub max_pairs: usize,
    /// Search bound handed to `rho_f` for the separation axiom.
    pub separation_bound: u64,
    pub seed: u64,
    pub replay: String,
}

impl Default for GroupVerifyOptions {
    fn default() -> Self {
        GroupVerifyOptions {
            max_pairs: 20_000,
            separation_bound: 65536,
            seed: 0,
            replay: String::new(),
        }
    }
}

/// Verifies the six neighborhood-base axioms for `([κ⁺]^{<ω}, △)` against a
/// finite base and element sample.
///
/// Records `group.axiom-1` … `group.axiom-6`:
/// 1. products: a, b ∈ U ⟹ a △ b ∈ U (V = U works since a △ b ⊆ a ∪ b);
/// 2. inverses: a △ a = ∅ and ∅ ∈ U;
/// 3. translates: a, x ∈ U ⟹ a △ x ∈ U;
/// 4. conjugates: x △ (a △ x) = a (abelian, so x V x⁻¹ = V);
/// 5. intersections: basic pairs over one provider embed a common basic
///    neighborhood via ζ = max{η, witness_g3(ξ, α, β)}; other shapes use the
///    subbase union;
/// 6. separation: every nonempty sampled a is excluded from some `U_ξ(α)`
///    found via `ρ_F` on one of its points.
pub fn verify_group_axioms(
    base: &[Neighborhood],
    elements: &[GroupElement],
    opts: &GroupVerifyOptions,
) -> Report {
    let config = config_value(&[
        ("base_size", serde_json::json!(base.len())),
        ("elements", serde_json::json!(elements.len())),
        ("max_pairs", serde_json::json!(opts.max_pairs)),
        ("seed", serde_json::json!(opts.seed)),
    ]);

    let mut records = Vec::new();
    let replay = opts.replay.clone();

    records.push(run_check_with_replay("group.axiom-1", "neighborhood axiom (1): V·V ⊆ U", &replay, |c| {
        let mut checked = 0usize;
        for u in base {
            let inside: Vec<&GroupElement> = match members_of(u, elements) {
                Ok(v) => v,
                Err(e) => return c.error(e.to_string()),
            };
            for a in &inside {
                for b in &inside {
                    if checked >= opts.max_pairs {
                        break;
                    }
                    checked += 1;
                    let prod = a.sym_diff(b);
                    match u.contains(&prod) {
                        Ok(true) => {}
                        Ok(false) => {
                            return c.fail(
                                serde_json::json!({
                                    "u": u.to_string(),
                                    "a": a.to_string(),
                                    "b": b.to_string(),
                                    "product": prod.to_string(),
                                }),
                                format!("{a} △ {b} = {prod} escapes {u}"),
                            )
                        }
                        Err(e) => return c.error(e.to_string()),
                    }
                }
            }
        }
        c.note(format!("{checked} products stayed inside their neighborhood"));
    }));

    records.push(run_check_with_replay("group.axiom-2", "neighborhood axiom (2): V⁻¹ ⊆ U", &replay, |c| {
        for a in elements {
            let double = a.sym_diff(a);
            if !double.is_empty() {
                return c.fail(
                    serde_json::json!({"a": a.to_string(), "a_sym_a": double.to_string()}),
                    format!("{a} is not self-inverse"),
                );
            }
        }
        for u in base {
            match u.contains(&GroupElement::empty()) {
                Ok(true) => {}
                Ok(false) => {
                    return c.fail(
                        serde_json::json!({"u": u.to_string()}),
                        format!("identity ∅ escapes {u}"),
                    )
                }
                Err(e) => return c.error(e.to_string()),
            }
        }
        c.note(format!("{} elements self-inverse, identity in every base entry", elements.len()));
    }));

    records.push(run_check_with_replay("group.axiom-3", "neighborhood axiom (3): Vx ⊆ U", &replay, |c| {
        let mut checked = 0usize;
        for u in base {
            let inside: Vec<&GroupElement> = match members_of(u, elements) {
                Ok(v) => v,
                Err(e) => return c.error(e.to_string()),
            };
            for x in &inside {
                for a in &inside {
                    if checked >= opts.max_pairs {
                        break;
                    }
                    checked += 1;
                    let translated = a.sym_diff(x);
                    match u.contains(&translated) {
                        Ok(true) => {}
                        Ok(false) => {
                            return c.fail(
                                serde_json::json!({
                                    "u": u.to_string(),
                                    "x": x.to_string(),
                                    "a": a.to_string(),
                                    "translate": translated.to_string(),
                                }),
                                format!("translate {a} △ {x} escapes {u}"),
                            )
                        }
                        Err(e) => return c.error(e.to_string()),
                    }
                }
            }
        }
        c.note(format!("{checked} translates stayed inside"));
    }));

    records.push(run_check_with_replay("group.axiom-4", "neighborhood axiom (4): xVx⁻¹ ⊆ U", &replay, |c| {
        let mut checked = 0usize;
        for x in elements.iter().take(64) {
            for a in elements.iter().take(64) {
                checked += 1;
                let conj = x.sym_diff(&a.sym_diff(x));
                if &conj != a {
                    return c.fail(
                        serde_json::json!({
                            "x": x.to_string(),
                            "a": a.to_string(),
                            "conjugate": conj.to_string(),
                        }),
                        format!("x △ (a △ x) ≠ a for x = {x}, a = {a}"),
                    );
                }
            }
        }
        c.note(format!("{checked} conjugates fixed pointwise (abelian)"));
    }));

    records.push(run_check_with_replay("group.axiom-5", "neighborhood axiom (5): W ⊆ U ∩ V", &replay, |c| {
        let mut checked = 0usize;
        for (i, u) in base.iter().enumerate() {
            for v in &base[i..] {
                if !Arc::ptr_eq(u.provider(), v.provider()) {
                    continue;
                }
                let w = if u.is_basic() && v.is_basic() {
                    // Order the two entries and lift the smaller owner via G3.
                    let (xi, alpha) = u.pairs()[0].clone();
                    let (eta, beta) = v.pairs()[0].clone();
                    let ((xi, alpha), (eta, beta)) = if alpha <= beta {
                        ((xi, alpha), (eta, beta))
                    } else {
                        ((eta, beta), (xi, alpha))
                    };
                    let xi0 = match u.provider().witness_g3(xi, &alpha, &beta) {
                        None => return c.skip("provider offers no G3 witness for the basic-pair case"),
                        Some(Err(e)) => return c.error(e.to_string()),
                        Some(Ok(x)) => x,
                    };
                    match Neighborhood::basic(Arc::clone(u.provider()), xi0.max(eta), beta.clone()) {
                        Ok(w) => w,
                        Err(e) => return c.error(e.to_string()),
                    }
                } else {
                    // Subbase entries: the union of the selections.
                    let mut pairs = u.pairs().to_vec();
                    pairs.extend(v.pairs().iter().cloned());
                    match Neighborhood::subbase(Arc::clone(u.provider()), pairs) {
                        Ok(w) => w,
                        Err(e) => return c.error(e.to_string()),
                    }
                };
                for a in elements {
                    checked += 1;
                    let in_w = match w.contains(a) {
                        Ok(b) => b,
                        Err(e) => return c.error(e.to_string()),
                    };
                    if !in_w {
                        continue;
                    }
                    for (label, nb) in [("U", u), ("V", v)] {
                        match nb.contains(a) {
                            Ok(true) => {}
                            Ok(false) => {
                                return c.fail(
                                    serde_json::json!({
                                        "w": w.to_string(),
                                        "escapee": a.to_string(),
                                        "missed": label,
                                        "u": u.to_string(),
                                        "v": v.to_string(),
                                    }),
                                    format!("{a} ∈ {w} but ∉ {nb}"),
                                )
                            }
                            Err(e) => return c.error(e.to_string()),
                        }
                    }
                }
            }
        }
        c.note(format!("{checked} pointwise containments through witnesses"));
    }));

    records.push(run_check_with_replay("group.axiom-6", "neighborhood axiom (6): {e} = ⋂U", &replay, |c| {
        let owners: Vec<(Arc<dyn MatrixProvider>, Ordinal)> = base
            .iter()
            .flat_map(|u| {
                u.pairs()
                    .iter()
                    .map(|(_, beta)| (Arc::clone(u.provider()), beta.clone()))
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut separated = 0usize;
        for a in elements.iter().filter(|a| !a.is_empty()) {
            let mut found = false;
            'search: for gamma in a.iter() {
                for (p, owner) in &owners {
                    if gamma >= owner {
                        continue;
                    }
                    let xi = match rho_f(p.as_ref(), gamma, owner, opts.separation_bound) {
                        Ok(v) => v,
                        Err(MatrixError::NotFoundWithinBound { .. }) => continue,
                        Err(e) => return c.error(e.to_string()),
                    };
                    let u = match Neighborhood::basic(Arc::clone(p), xi, owner.clone()) {
                        Ok(u) => u,
                        Err(e) => return c.error(e.to_string()),
                    };
                    match u.contains(a) {
                        Ok(false) => {
                            found = true;
                            separated += 1;
                            break 'search;
                        }
                        Ok(true) => {
                            return c.fail(
                                serde_json::json!({
                                    "a": a.to_string(),
                                    "gamma": gamma.to_string(),
                                    "owner": owner.to_string(),
                                    "xi": xi,
                                }),
                                format!(
                                    "ρ_F({gamma},{owner}) = {xi} yet {a} still lies in U_{xi}({owner})"
                                ),
                            )
                        }
                        Err(e) => return c.error(e.to_string()),
                    }
                }
            }
            if !found {
                return c.fail(
                    serde_json::json!({"a": a.to_string()}),
                    format!("no base owner sits above any point of {a}; the base cannot separate it"),
                );
            }
        }
        c.note(format!("{separated} nonempty elements separated from the identity"));
    }));

    Report::new(config, records)
}

fn members_of<'e>(
    u: &Neighborhood,
    elements: &'e [GroupElement],
) -> Result<Vec<&'e GroupElement>, MatrixError> {
    let mut out = Vec::new();
    for a in elements {
        if u.contains(a)? {
            out.push(a);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::rho_matrix;
    use crate::walks::WalkContext;
    use std::sync::Mutex;

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).expect(s)
    }

    fn g(s: &str) -> GroupElement {
        GroupElement::parse(s).expect(s)
    }

    fn rho_provider() -> Arc<dyn MatrixProvider> {
        Arc::new(rho_matrix(&Arc::new(Mutex::new(WalkContext::new()))))
    }

    #[test]
    fn sym_diff_examples() {
        assert_eq!(g("{1, 2}").sym_diff(&g("{2, 3}")), g("{1, 3}"));
        assert_eq!(g("{w, 4}").sym_diff(&g("{}")), g("{4, w}"));
        assert_eq!(g("{w, 4}").sym_diff(&g("{w, 4}")), g("{}"));
        assert_eq!(g("{1, w}").to_string(), "{1, w}");
    }

    #[test]
    fn neighborhood_membership_examples() {
        let p = rho_provider();
        let u0 = Neighborhood::basic(Arc::clone(&p), 0, o("w")).unwrap();
        assert!(u0.contains(&g("{1}")).unwrap());
        assert!(!u0.contains(&g("{0}")).unwrap());
        assert!(u0.contains(&g("{}")).unwrap());
        // Anti-monotone in ξ: U_η(α) ⊆ U_ξ(α) for ξ ≤ η.
        let u3 = Neighborhood::basic(Arc::clone(&p), 3, o("w")).unwrap();
        for a in ["{1}", "{2}", "{5}", "{1, 4}", "{7, w}"] {
            let a = g(a);
            if u3.contains(&a).unwrap() {
                assert!(u0.contains(&a).unwrap(), "{a} ∈ U_3 must imply ∈ U_0");
            }
        }
    }

    #[test]
    fn converges_examples() {
        let p = rho_provider();
        let u = Neighborhood::basic(Arc::clone(&p), 0, o("w")).unwrap();
        let seq: Vec<GroupElement> =
            (0..=20).map(|n| GroupElement::new([Ordinal::from_nat(n)])).collect();
        assert_eq!(converges(&seq, &u).unwrap(), Convergence::TailIndex(1));

        let empties: Vec<GroupElement> = (0..5).map(|_| GroupElement::empty()).collect();
        assert_eq!(converges(&empties, &u).unwrap(), Convergence::TailIndex(0));

        let zeros: Vec<GroupElement> = (0..5).map(|_| g("{0}")).collect();
        assert_eq!(
            converges(&zeros, &u).unwrap(),
            Convergence::Counterexample(vec![0, 1, 2, 3, 4])
        );
    }

    #[test]
    fn restriction_cover_examples() {
        let ctx = Arc::new(Mutex::new(WalkContext::new()));
        let strong = rho_matrix(&ctx);
        // δ below the owner goes through the G4 witness: here ρ(ω, ω·2) = 0.
        assert_eq!(restriction_cover(&o("w"), 0, &o("w*2"), &strong).unwrap(), 0);
        // Identity case.
        assert_eq!(restriction_cover(&o("w"), 4, &o("w"), &strong).unwrap(), 4);
        // Non-strong provider cannot cover below a larger owner.
        let weak = crate::matrix::rho1_matrix(&ctx);
        assert!(matches!(
            restriction_cover(&o("w"), 0, &o("w*2"), &weak),
            Err(MatrixError::Unsupported { .. })
        ));
        // α ≤ δ works for any transitive provider.
        assert!(restriction_cover(&o("w*2"), 1, &o("w"), &weak).is_ok());
    }

    #[test]
    fn group_axioms_pass_on_a_small_sample() {
        let p = rho_provider();
        let base: Vec<Neighborhood> = [(0u64, "w"), (1, "w"), (2, "w*2"), (0, "w^2")]
            .iter()
            .map(|(xi, a)| Neighborhood::basic(Arc::clone(&p), *xi, o(a)).unwrap())
            .collect();
        let mut elements = vec![GroupElement::empty()];
        let pool = ["1", "2", "3", "5", "8", "w", "w+1", "w+3", "w*2"];
        for i in 0..pool.len() {
            elements.push(GroupElement::new([o(pool[i])]));
            for j in (i + 1)..pool.len() {
                elements.push(GroupElement::new([o(pool[i]), o(pool[j])]));
            }
        }
        let report = verify_group_axioms(&base, &elements, &GroupVerifyOptions::default());
        assert!(report.all_pass(), "{}", report.to_text());
    }

    #[test]
    fn separation_fails_when_base_has_no_owner_above() {
        let p = rho_provider();
        let base = vec![Neighborhood::basic(Arc::clone(&p), 0, o("w")).unwrap()];
        let elements = vec![g("{w*2}")]; // above every owner in the base
        let report = verify_group_axioms(&base, &elements, &GroupVerifyOptions::default());
        assert_eq!(report.status_of("group.axiom-6"), Some(crate::report::Status::Fail));
    }
}
