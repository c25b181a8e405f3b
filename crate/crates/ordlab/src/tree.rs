//! Explicit tree fragments and the ℓ∞ calculus of finite sequences.
//!
//! A fragment stores finitely many ordinal-valued nodes. Level indices α
//! are fixed points of left multiplication by ω (`mul_omega_left(α) = α`),
//! so the α-th level occupies `[α, α+ω)` and the node at offset η is
//! literally the ordinal α + η. Parent links strictly decrease level and
//! predecessor chains must be stored completely: the derived matrix
//!
//! ```text
//! F^T_ξ(α) = { γ < α : γ ≺ α+η for some η ≤ ξ }
//! ```
//!
//! is chain-determined, so missing data is a hard `IncompleteData` error,
//! never interpolated. [`verify_tree_matrix`] checks the four matrix axioms
//! on a fragment, computing the G3 witness as the sup of the level-β offsets
//! above each α + ε, and the G4 witness from the unique same-level
//! predecessor on each chain — two distinct same-level predecessors are a
//! tree-order violation and surface as a G4 counterexample.
//!
//! The second half of the module is the ℓ∞ calculus: finite natural-valued
//! sequences with `‖s − t‖ = max |s(γ) − t(γ)|` over the common domain,
//! neighborhoods `F^∞_n(t) = { s at lower level : ‖s − t‖ ≤ n }`, the
//! inclusion witness `k = ‖t − s‖ + max{m, n}`, and nodes generated from the
//! walk characteristic ρ₂.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::matrix::{run_check_with_replay, MatrixError, MatrixProvider};
use crate::ord::Ordinal;
use crate::report::{config_value, Report};
use crate::walks::{WalkContext, WalkError};

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("incomplete fragment data: {what}")]
    IncompleteData { what: String },
    #[error("level {level} is not fixed under left multiplication by ω (ω·{level} = {product})")]
    LevelNotFixed { level: String, product: String },
    #[error("node {node} does not split as level {level} + offset {offset}")]
    SplitMismatch { node: String, level: String, offset: u64 },
    #[error("tree-order violation: {what}")]
    OrderViolation { what: String },
}

impl From<TreeError> for MatrixError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::OrderViolation { what } => MatrixError::OrderViolationInData { what },
            other => MatrixError::IncompleteData { what: other.to_string() },
        }
    }
}

#[derive(Debug, Clone)]
struct NodeInfo {
    level: Ordinal,
    offset: u64,
    /// Parents accumulate as a set so malformed (multi-parent) fragments can
    /// still be ingested and reported; a valid tree has at most one.
    parents: BTreeSet<Ordinal>,
}

/// A finite tree fragment with ordinal node labels.
#[derive(Debug, Clone, Default)]
pub struct ExplicitTree {
    nodes: BTreeMap<Ordinal, NodeInfo>,
}

/// Splits an ordinal as level + finite offset, requiring the level to be an
/// ω-multiplication fixed point.
pub fn split_label(node: &Ordinal) -> Result<(Ordinal, u64), TreeError> {
    let mut offset = 0u64;
    let mut head: Vec<(Ordinal, u64)> = Vec::new();
    for term in node.terms() {
        if term.exp.is_zero() {
            offset = term.coeff;
        } else {
            head.push((term.exp.clone(), term.coeff));
        }
    }
    let level = Ordinal::from_terms(head).expect("head of a canonical ordinal stays canonical");
    let product = level.mul_omega_left();
    if product != level {
        return Err(TreeError::LevelNotFixed {
            level: level.to_string(),
            product: product.to_string(),
        });
    }
    Ok((level, offset))
}

impl ExplicitTree {
    pub fn new() -> Self {
        ExplicitTree::default()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, node: &Ordinal) -> bool {
        self.nodes.contains_key(node)
    }

    pub fn node_values(&self) -> impl Iterator<Item = &Ordinal> {
        self.nodes.keys()
    }

    pub fn level_of(&self, node: &Ordinal) -> Option<&Ordinal> {
        self.nodes.get(node).map(|i| &i.level)
    }

    pub fn parents_of(&self, node: &Ordinal) -> Option<&BTreeSet<Ordinal>> {
        self.nodes.get(node).map(|i| &i.parents)
    }

    /// Inserts a node, deriving its level and offset from the value. A
    /// repeated insert with a different parent accumulates (and will be
    /// flagged by validation); with the same parent it is idempotent.
    pub fn insert(&mut self, node: Ordinal, parent: Option<Ordinal>) -> Result<(), TreeError> {
        let (level, offset) = split_label(&node)?;
        let entry = self.nodes.entry(node).or_insert(NodeInfo {
            level,
            offset,
            parents: BTreeSet::new(),
        });
        if let Some(p) = parent {
            entry.parents.insert(p);
        }
        Ok(())
    }

    /// Distinct stored level indices, ascending.
    pub fn levels(&self) -> Vec<Ordinal> {
        let mut out: BTreeSet<Ordinal> = BTreeSet::new();
        for info in self.nodes.values() {
            out.insert(info.level.clone());
        }
        out.into_iter().collect()
    }

    /// Offsets stored at one level, ascending.
    pub fn offsets_at(&self, level: &Ordinal) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .nodes
            .values()
            .filter(|i| &i.level == level)
            .map(|i| i.offset)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Nodes with no stored child.
    pub fn leaves(&self) -> Vec<Ordinal> {
        let parents: BTreeSet<&Ordinal> =
            self.nodes.values().flat_map(|i| i.parents.iter()).collect();
        self.nodes.keys().filter(|n| !parents.contains(n)).cloned().collect()
    }

    /// The ≺-predecessor closure of a node, including the node itself.
    /// Every ancestor must itself be stored; a dangling parent is
    /// `IncompleteData`.
    pub fn chain(&self, node: &Ordinal) -> Result<BTreeSet<Ordinal>, TreeError> {
        let mut out = BTreeSet::new();
        let mut stack = vec![node.clone()];
        while let Some(x) = stack.pop() {
            if !out.insert(x.clone()) {
                continue;
            }
            let info = self.nodes.get(&x).ok_or_else(|| TreeError::IncompleteData {
                what: format!("node {x} is referenced but not stored"),
            })?;
            for p in &info.parents {
                stack.push(p.clone());
            }
        }
        Ok(out)
    }

    /// Structural violations: parent links that fail to decrease level and
    /// nodes with more than one parent. Empty means the fragment is a tree.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (node, info) in &self.nodes {
            if info.parents.len() > 1 {
                let ps: Vec<String> = info.parents.iter().map(|p| p.to_string()).collect();
                out.push(format!("node {node} has {} parents: {}", info.parents.len(), ps.join(", ")));
            }
            for p in &info.parents {
                match self.nodes.get(p) {
                    None => out.push(format!("node {node} has unstored parent {p}")),
                    Some(pi) if pi.level >= info.level => out.push(format!(
                        "parent {p} (level {}) does not sit strictly below {node} (level {})",
                        pi.level, info.level
                    )),
                    Some(_) => {}
                }
            }
        }
        out
    }

    /// Parses the line-oriented fragment format:
    /// `node <ord> level <ord> offset <nat> parent <ord|root>`.
    /// `#` comments and blank lines are skipped. Duplicate node lines with
    /// differing parents accumulate; a duplicate that disagrees on level or
    /// offset is a parse error.
    pub fn parse(text: &str) -> Result<Self, TreeError> {
        let mut tree = ExplicitTree::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            if words.len() != 8
                || words[0] != "node"
                || words[2] != "level"
                || words[4] != "offset"
                || words[6] != "parent"
            {
                return Err(TreeError::Parse {
                    line: line_no,
                    msg: format!("expected `node <ord> level <ord> offset <nat> parent <ord|root>`, got {line:?}"),
                });
            }
            let perr = |msg: String| TreeError::Parse { line: line_no, msg };
            let node = Ordinal::parse(words[1]).map_err(|e| perr(e.to_string()))?;
            let level = Ordinal::parse(words[3]).map_err(|e| perr(e.to_string()))?;
            let offset: u64 = words[5].parse().map_err(|_| perr(format!("bad offset {:?}", words[5])))?;
            let parent = if words[7] == "root" {
                None
            } else {
                Some(Ordinal::parse(words[7]).map_err(|e| perr(e.to_string()))?)
            };

            let (derived_level, derived_offset) = split_label(&node)?;
            if derived_level != level || derived_offset != offset {
                return Err(perr(format!(
                    "node {node} splits as level {derived_level} offset {derived_offset}, not level {level} offset {offset}"
                )));
            }
            if let Some(existing) = tree.nodes.get(&node) {
                if existing.level != level || existing.offset != offset {
                    return Err(perr(format!("node {node} re-declared with conflicting labels")));
                }
            }
            tree.insert(node, parent)?;
        }
        Ok(tree)
    }
}

/// `γ ∈ F^T_ξ(α)` — γ lies below α and on the stored chain of some α + η
/// with η ≤ ξ. The level must be stored with all offsets up to ξ present.
#[allow(non_snake_case)]
pub fn tree_F_member(
    t: &ExplicitTree,
    gamma: &Ordinal,
    xi: u64,
    alpha: &Ordinal,
) -> Result<bool, TreeError> {
    if t.offsets_at(alpha).is_empty() {
        return Err(TreeError::IncompleteData { what: format!("level {alpha} is not represented") });
    }
    let mut chains = Vec::new();
    for eta in 0..=xi {
        let node = alpha.add(&Ordinal::from_nat(eta));
        if !t.contains(&node) {
            return Err(TreeError::IncompleteData {
                what: format!("offset {eta} at level {alpha} is missing (node {node})"),
            });
        }
        chains.push(node);
    }
    if gamma >= alpha {
        return Ok(false);
    }
    for node in &chains {
        if t.chain(node)?.contains(gamma) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Exact enumeration of `F^T_ξ(α)` from stored chains.
#[allow(non_snake_case)]
pub fn tree_F_enumerate(
    t: &ExplicitTree,
    xi: u64,
    alpha: &Ordinal,
) -> Result<BTreeSet<Ordinal>, TreeError> {
    if t.offsets_at(alpha).is_empty() {
        return Err(TreeError::IncompleteData { what: format!("level {alpha} is not represented") });
    }
    let mut out = BTreeSet::new();
    for eta in 0..=xi {
        let node = alpha.add(&Ordinal::from_nat(eta));
        if !t.contains(&node) {
            return Err(TreeError::IncompleteData {
                what: format!("offset {eta} at level {alpha} is missing (node {node})"),
            });
        }
        out.extend(t.chain(&node)?.into_iter().filter(|g| g < alpha));
    }
    Ok(out)
}

/// G3 witness: η = max over ε ≤ ξ of the least level-β offset whose chain
/// passes through α + ε.
fn g3_sup_witness(
    t: &ExplicitTree,
    xi: u64,
    alpha: &Ordinal,
    beta: &Ordinal,
) -> Result<u64, TreeError> {
    let beta_offsets = t.offsets_at(beta);
    let mut sup = 0u64;
    for eps in 0..=xi {
        let lower = alpha.add(&Ordinal::from_nat(eps));
        if !t.contains(&lower) {
            return Err(TreeError::IncompleteData {
                what: format!("offset {eps} at level {alpha} is missing"),
            });
        }
        let mut found = None;
        for &eta in &beta_offsets {
            let upper = beta.add(&Ordinal::from_nat(eta));
            if t.chain(&upper)?.contains(&lower) {
                found = Some(eta);
                break;
            }
        }
        match found {
            Some(eta) => sup = sup.max(eta),
            None => {
                return Err(TreeError::IncompleteData {
                    what: format!("no stored node at level {beta} extends {lower}"),
                })
            }
        }
    }
    Ok(sup)
}

/// G4 witness: max over ε ≤ ξ of the offset of the unique level-δ
/// predecessor of β + ε. Two same-level predecessors are a tree-order
/// violation; a chain that skips the level entirely is incomplete data.
fn g4_unique_witness(
    t: &ExplicitTree,
    xi: u64,
    delta: &Ordinal,
    beta: &Ordinal,
) -> Result<u64, TreeError> {
    let mut out = 0u64;
    for eps in 0..=xi {
        let upper = beta.add(&Ordinal::from_nat(eps));
        if !t.contains(&upper) {
            return Err(TreeError::IncompleteData {
                what: format!("offset {eps} at level {beta} is missing"),
            });
        }
        let preds: Vec<Ordinal> = t
            .chain(&upper)?
            .into_iter()
            .filter(|n| t.level_of(n) == Some(delta))
            .collect();
        match preds.len() {
            1 => {
                let (_, off) = split_label(&preds[0])?;
                out = out.max(off);
            }
            0 => {
                return Err(TreeError::IncompleteData {
                    what: format!("chain of {upper} has no stored node at level {delta}"),
                })
            }
            _ => {
                let ps: Vec<String> = preds.iter().map(|p| p.to_string()).collect();
                return Err(TreeError::OrderViolation {
                    what: format!(
                        "chain of {upper} meets level {delta} at {} nodes: {}",
                        preds.len(),
                        ps.join(", ")
                    ),
                });
            }
        }
    }
    Ok(out)
}

/// A fragment exposed through the matrix-provider interface. The index set
/// is the set of stored level indices.
pub struct TreeMatrix {
    tree: Arc<ExplicitTree>,
    name: String,
}

impl TreeMatrix {
    pub fn new(tree: Arc<ExplicitTree>, name: impl Into<String>) -> Self {
        TreeMatrix { tree, name: name.into() }
    }

    pub fn tree(&self) -> &ExplicitTree {
        &self.tree
    }
}

impl MatrixProvider for TreeMatrix {
    fn name(&self) -> &str {
        &self.name
    }

    fn in_index_set(&self, alpha: &Ordinal) -> bool {
        !self.tree.offsets_at(alpha).is_empty()
    }

    fn member(&self, gamma: &Ordinal, xi: u64, alpha: &Ordinal) -> Result<bool, MatrixError> {
        Ok(tree_F_member(&self.tree, gamma, xi, alpha)?)
    }

    fn enumerate(&self, xi: u64, alpha: &Ordinal) -> Option<Result<BTreeSet<Ordinal>, MatrixError>> {
        Some(tree_F_enumerate(&self.tree, xi, alpha).map_err(Into::into))
    }

    fn witness_g3(&self, xi: u64, alpha: &Ordinal, beta: &Ordinal) -> Option<Result<u64, MatrixError>> {
        if alpha == beta {
            return Some(Ok(xi));
        }
        Some(g3_sup_witness(&self.tree, xi, alpha, beta).map_err(Into::into))
    }

    fn witness_g4(&self, xi: u64, delta: &Ordinal, beta: &Ordinal) -> Option<Result<u64, MatrixError>> {
        if delta == beta {
            return Some(Ok(xi));
        }
        Some(g4_unique_witness(&self.tree, xi, delta, beta).map_err(Into::into))
    }

    fn is_strong(&self) -> bool {
        true
    }
}

/// Verifies the matrix axioms on a fragment over the given levels.
///
/// Records: `tree.order` (structural tree-order checks), `tree.G1`
/// (fragment-relative coverage: every stored node below a level lies on a
/// stored chain through it), `tree.G2` (monotone in ξ), `tree.G3` (sup
/// witness + pointwise inclusion), `tree.G4` (unique same-level predecessor
/// witness + pointwise inclusion). On a multi-parent fragment `tree.order`
/// and `tree.G4` fail with the offending nodes.
/// Replay hint attached to tree verification records.
const TREE_REPLAY: &str = "ordlab tree verify";

pub fn verify_tree_matrix(t: &ExplicitTree, levels: &[Ordinal], xi_max: u64) -> Report {
    let config = config_value(&[
        ("levels", serde_json::json!(levels.iter().map(|l| l.to_string()).collect::<Vec<_>>())),
        ("xi_max", serde_json::json!(xi_max)),
        ("nodes", serde_json::json!(t.len())),
    ]);
    let mut records = Vec::new();

    records.push(run_check_with_replay("tree.order", "tree order: unique parent, levels decrease", TREE_REPLAY, |c| {
        let violations = t.violations();
        if let Some(first) = violations.first() {
            return c.fail(
                serde_json::json!({"violations": violations}),
                first.clone(),
            );
        }
        // Chains are well-founded because parents strictly decrease level.
        for node in t.node_values() {
            if let Err(e) = t.chain(node) {
                return c.error(e.to_string());
            }
        }
        c.note(format!("{} nodes, all chains stored and strictly descending", t.len()));
    }));

    records.push(run_check_with_replay("tree.G1", "G1: stored nodes below a level are covered", TREE_REPLAY, |c| {
        for alpha in levels {
            let offsets = t.offsets_at(alpha);
            if offsets.is_empty() {
                return c.error(format!("level {alpha} is not represented"));
            }
            let max_off = *offsets.last().expect("nonempty");
            for gamma in t.node_values().filter(|g| *g < alpha) {
                match tree_F_member(t, gamma, max_off, alpha) {
                    Ok(true) => {}
                    Ok(false) => {
                        return c.fail(
                            serde_json::json!({"gamma": gamma.to_string(), "alpha": alpha.to_string()}),
                            format!("stored node {gamma} lies on no chain through level {alpha}"),
                        )
                    }
                    Err(e) => return c.error(e.to_string()),
                }
            }
        }
        c.note("every stored node below each level is on a stored chain".to_string());
    }));

    records.push(run_check_with_replay("tree.G2", "G2: F_ξ(α) ⊆ F_{ξ+1}(α)", TREE_REPLAY, |c| {
        for alpha in levels {
            let offsets = t.offsets_at(alpha);
            let cap = xi_max.min(offsets.len().saturating_sub(1) as u64);
            for xi in 0..cap {
                let smaller = match tree_F_enumerate(t, xi, alpha) {
                    Ok(s) => s,
                    Err(e) => return c.error(e.to_string()),
                };
                let larger = match tree_F_enumerate(t, xi + 1, alpha) {
                    Ok(s) => s,
                    Err(e) => return c.error(e.to_string()),
                };
                if let Some(missing) = smaller.iter().find(|g| !larger.contains(*g)) {
                    return c.fail(
                        serde_json::json!({
                            "gamma": missing.to_string(),
                            "alpha": alpha.to_string(),
                            "xi": xi,
                        }),
                        format!("{missing} ∈ F_{xi}({alpha}) but ∉ F_{}({alpha})", xi + 1),
                    );
                }
            }
        }
        c.note("monotone in ξ on all stored levels".to_string());
    }));

    records.push(run_check_with_replay("tree.G3", "G3: F_ξ(α) ⊆ F_η(β) with η = sup of offsets", TREE_REPLAY, |c| {
        for (i, alpha) in levels.iter().enumerate() {
            for beta in &levels[i..] {
                if alpha == beta {
                    continue;
                }
                let cap = xi_max.min(t.offsets_at(alpha).len().saturating_sub(1) as u64);
                for xi in 0..=cap {
                    let eta = match g3_sup_witness(t, xi, alpha, beta) {
                        Ok(v) => v,
                        Err(e) => return c.error(e.to_string()),
                    };
                    let lower = match tree_F_enumerate(t, xi, alpha) {
                        Ok(s) => s,
                        Err(e) => return c.error(e.to_string()),
                    };
                    let upper = match tree_F_enumerate(t, eta, beta) {
                        Ok(s) => s,
                        Err(e) => return c.error(e.to_string()),
                    };
                    if let Some(missing) = lower.iter().find(|g| !upper.contains(*g)) {
                        return c.fail(
                            serde_json::json!({
                                "gamma": missing.to_string(),
                                "alpha": alpha.to_string(),
                                "beta": beta.to_string(),
                                "xi": xi,
                                "eta": eta,
                            }),
                            format!("{missing} ∈ F_{xi}({alpha}) but ∉ F_{eta}({beta})"),
                        );
                    }
                }
            }
        }
        c.note("sup witnesses verified pointwise".to_string());
    }));

    records.push(run_check_with_replay("tree.G4", "G4: unique same-level predecessor witness", TREE_REPLAY, |c| {
        for (i, delta) in levels.iter().enumerate() {
            for beta in &levels[i..] {
                if delta == beta {
                    continue;
                }
                let cap = xi_max.min(t.offsets_at(beta).len().saturating_sub(1) as u64);
                for xi in 0..=cap {
                    let eta = match g4_unique_witness(t, xi, delta, beta) {
                        Ok(v) => v,
                        Err(TreeError::OrderViolation { what }) => {
                            return c.fail(
                                serde_json::json!({
                                    "delta": delta.to_string(),
                                    "beta": beta.to_string(),
                                    "xi": xi,
                                    "violation": what,
                                }),
                                what,
                            )
                        }
                        Err(e) => return c.error(e.to_string()),
                    };
                    let upper = match tree_F_enumerate(t, xi, beta) {
                        Ok(s) => s,
                        Err(e) => return c.error(e.to_string()),
                    };
                    let lower = match tree_F_enumerate(t, eta, delta) {
                        Ok(s) => s,
                        Err(e) => return c.error(e.to_string()),
                    };
                    for gamma in upper.iter().filter(|g| *g < delta) {
                        if !lower.contains(gamma) {
                            return c.fail(
                                serde_json::json!({
                                    "gamma": gamma.to_string(),
                                    "delta": delta.to_string(),
                                    "beta": beta.to_string(),
                                    "xi": xi,
                                    "eta": eta,
                                }),
                                format!("{gamma} ∈ F_{xi}({beta}) ∩ {delta} but ∉ F_{eta}({delta})"),
                            );
                        }
                    }
                }
            }
        }
        c.note("unique predecessors found; restrictions covered".to_string());
    }));

    Report::new(config, records)
}

/// All maximal chains of the fragment (one per leaf), each sorted by node
/// value, plus their lengths.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BranchReport {
    pub chains: Vec<Vec<String>>,
    pub max_length: usize,
}

pub fn branch_check(t: &ExplicitTree) -> Result<BranchReport, TreeError> {
    let mut chains = Vec::new();
    for leaf in t.leaves() {
        let chain: Vec<String> = t.chain(&leaf)?.iter().map(|n| n.to_string()).collect();
        chains.push(chain);
    }
    chains.sort();
    let max_length = chains.iter().map(|ch| ch.len()).max().unwrap_or(0);
    Ok(BranchReport { chains, max_length })
}

/// Antichain diagnostics: per-level widths and the leaf count. For a valid
/// (single-parent) fragment the maximal antichain size is exactly the leaf
/// count; for malformed fragments it is reported as a lower bound.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AntichainReport {
    pub leaf_count: usize,
    pub level_widths: Vec<(String, usize)>,
    pub max_antichain: usize,
    pub exact: bool,
}

pub fn antichain_check(t: &ExplicitTree) -> AntichainReport {
    let level_widths: Vec<(String, usize)> = t
        .levels()
        .iter()
        .map(|l| (l.to_string(), t.offsets_at(l).len()))
        .collect();
    let leaf_count = t.leaves().len();
    AntichainReport {
        leaf_count,
        level_widths,
        max_antichain: leaf_count,
        exact: t.violations().is_empty(),
    }
}

/// A node of the ℓ∞ calculus: an explicit finite sequence of naturals, or a
/// descriptor generating `⟨ρ₂(γ, β) : γ < α⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FinSeqNode {
    Explicit(Vec<u64>),
    Rho2 { beta: Ordinal, alpha: u64 },
}

impl FinSeqNode {
    /// Parses `(1, 2, 3)`, `()`, or `rho2 beta=<ord> alpha=<nat>`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix("rho2") {
            let mut beta = None;
            let mut alpha = None;
            for part in rest.split_whitespace() {
                if let Some(v) = part.strip_prefix("beta=") {
                    beta = Some(Ordinal::parse(v).map_err(|e| e.to_string())?);
                } else if let Some(v) = part.strip_prefix("alpha=") {
                    alpha = Some(v.parse::<u64>().map_err(|e| e.to_string())?);
                } else {
                    return Err(format!("unexpected token {part:?} in rho2 descriptor"));
                }
            }
            return Ok(FinSeqNode::Rho2 {
                beta: beta.ok_or("rho2 descriptor needs beta=")?,
                alpha: alpha.ok_or("rho2 descriptor needs alpha=")?,
            });
        }
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("expected a parenthesized tuple or rho2 descriptor, got {s:?}"))?;
        let mut values = Vec::new();
        for part in inner.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            values.push(part.parse::<u64>().map_err(|e| e.to_string())?);
        }
        Ok(FinSeqNode::Explicit(values))
    }

    /// The concrete finite sequence: explicit values as-is, generated
    /// descriptors expanded through the walk context.
    pub fn expand(&self, ctx: &Arc<Mutex<WalkContext>>) -> Result<Vec<u64>, WalkError> {
        match self {
            FinSeqNode::Explicit(v) => Ok(v.clone()),
            FinSeqNode::Rho2 { beta, alpha } => {
                let mut guard = ctx.lock().expect("walk context poisoned");
                (0..*alpha)
                    .map(|g| guard.rho2(&Ordinal::from_nat(g), beta))
                    .collect()
            }
        }
    }
}

impl fmt::Display for FinSeqNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FinSeqNode::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(", "))
            }
            FinSeqNode::Rho2 { beta, alpha } => write!(f, "rho2 beta={beta} alpha={alpha}"),
        }
    }
}

/// `⟨ρ₂(γ, β) : γ < α⟩` as an explicit node.
pub fn gen_rho2_node(
    beta: &Ordinal,
    alpha: u64,
    ctx: &Arc<Mutex<WalkContext>>,
) -> Result<FinSeqNode, WalkError> {
    FinSeqNode::Rho2 { beta: beta.clone(), alpha }.expand(ctx).map(FinSeqNode::Explicit)
}

/// `‖s − t‖` — the maximum coordinate gap over the common domain, 0 when
/// the common domain is empty.
pub fn norm_diff(s: &[u64], t: &[u64]) -> u64 {
    s.iter().zip(t.iter()).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0)
}

/// `s ∈ F^∞_n(t)` — s sits at a strictly lower level and `‖s − t‖ ≤ n`.
#[allow(non_snake_case)]
pub fn linf_F_member(s: &[u64], t: &[u64], n: u64) -> bool {
    s.len() < t.len() && norm_diff(s, t) <= n
}

/// The inclusion witness `k = ‖t − s‖ + max{m, n}` for
/// `F^∞_m(s) ⊆ F^∞_k(t)`.
pub fn linf_witness_k(s: &[u64], t: &[u64], m: u64, n: u64) -> u64 {
    norm_diff(s, t) + m.max(n)
}

/// Coordinates of the common domain where the two sequences disagree.
pub fn coherence_check(s: &[u64], t: &[u64]) -> BTreeSet<usize> {
    s.iter()
        .zip(t.iter())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i)
        .collect()
}

/// A sampled lower bound for `sup |ρ₂(γ, β₁) − ρ₂(γ, β₂)|` over
/// caller-chosen finite coordinates. This probes finitely many points of an
/// infinite-domain comparison and is a lower bound only, never an exact sup.
pub fn sampled_norm_lower_bound(
    ctx: &Arc<Mutex<WalkContext>>,
    beta1: &Ordinal,
    beta2: &Ordinal,
    coords: &[u64],
) -> Result<u64, WalkError> {
    let mut guard = ctx.lock().expect("walk context poisoned");
    let mut best = 0u64;
    for &g in coords {
        let gamma = Ordinal::from_nat(g);
        let a = guard.rho2(&gamma, beta1)?;
        let b = guard.rho2(&gamma, beta2)?;
        best = best.max(a.abs_diff(b));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).expect(s)
    }

    /// Three levels (0, ω^ω, ω^ω·2) with three offsets each; chains follow
    /// the offsets straight down.
    pub(crate) fn braid_fragment() -> ExplicitTree {
        let mut t = ExplicitTree::new();
        for k in 0..3u64 {
            t.insert(Ordinal::from_nat(k), None).unwrap();
            t.insert(o("w^w").add(&Ordinal::from_nat(k)), Some(Ordinal::from_nat(k))).unwrap();
            t.insert(
                o("w^w*2").add(&Ordinal::from_nat(k)),
                Some(o("w^w").add(&Ordinal::from_nat(k))),
            )
            .unwrap();
        }
        t
    }

    #[test]
    fn split_label_examples() {
        assert_eq!(split_label(&o("w^w+5")).unwrap(), (o("w^w"), 5));
        assert_eq!(split_label(&o("2")).unwrap(), (Ordinal::zero(), 2));
        assert_eq!(split_label(&o("w^w*2")).unwrap(), (o("w^w*2"), 0));
        // ω·(ω·3) = ω²·3 ≠ ω·3, so ω·3+1 has no valid level.
        assert!(matches!(split_label(&o("w*3+1")), Err(TreeError::LevelNotFixed { .. })));
    }

    #[test]
    fn membership_examples() {
        let t = braid_fragment();
        assert!(tree_F_member(&t, &o("0"), 0, &o("w^w")).unwrap());
        assert!(!tree_F_member(&t, &o("1"), 0, &o("w^w")).unwrap());
        assert!(tree_F_member(&t, &o("1"), 1, &o("w^w")).unwrap());
        // γ at or above the level is never a member.
        assert!(!tree_F_member(&t, &o("w^w"), 2, &o("w^w")).unwrap());
        assert!(!tree_F_member(&t, &o("w^w*2+5"), 2, &o("w^w")).unwrap());
        // Offsets beyond the stored ones are incomplete data, not false.
        assert!(matches!(
            tree_F_member(&t, &o("0"), 3, &o("w^w")),
            Err(TreeError::IncompleteData { .. })
        ));
        // Chains through two levels.
        assert!(tree_F_member(&t, &o("w^w+1"), 1, &o("w^w*2")).unwrap());
        assert!(!tree_F_member(&t, &o("w^w+1"), 0, &o("w^w*2")).unwrap());
    }

    #[test]
    fn braid_fragment_passes_all_axioms() {
        let t = braid_fragment();
        let report = verify_tree_matrix(&t, &t.levels(), 2);
        assert!(report.all_pass(), "{}", report.to_text());
    }

    #[test]
    fn two_parent_mutant_fails_g4_with_uniqueness_counterexample() {
        let mut t = braid_fragment();
        // Second parent for ω^ω·2: its chain now meets level ω^ω twice.
        t.insert(o("w^w*2"), Some(o("w^w+1"))).unwrap();
        let report = verify_tree_matrix(&t, &t.levels(), 2);
        assert_eq!(report.status_of("tree.order"), Some(Status::Fail));
        assert_eq!(report.status_of("tree.G4"), Some(Status::Fail));
        let rec = report.record("tree.G4").unwrap();
        let detail = rec.detail.clone().unwrap_or_default();
        // Both parents propagate down, so the doubled chain is caught at the
        // first level inspected; any "2 nodes" hit is the uniqueness breach.
        assert!(detail.contains("at 2 nodes"), "detail: {detail}");
        assert!(rec.counterexample.is_some());
    }

    #[test]
    fn single_level_fragment_passes_vacuously() {
        let mut t = ExplicitTree::new();
        for k in 0..3u64 {
            t.insert(Ordinal::from_nat(k), None).unwrap();
        }
        let report = verify_tree_matrix(&t, &t.levels(), 2);
        assert!(report.all_pass(), "{}", report.to_text());
    }

    #[test]
    fn parse_round_trip_and_conflicts() {
        let text = "\
# a two-level fragment
node 0 level 0 offset 0 parent root
node w^w level w^w offset 0 parent 0
node w^w+1 level w^w offset 1 parent 0
";
        let t = ExplicitTree::parse(text).unwrap();
        assert_eq!(t.len(), 3);
        assert!(tree_F_member(&t, &o("0"), 1, &o("w^w")).unwrap());

        let conflicting = "node w^w level w^w offset 0 parent root\nnode w^w level 0 offset 0 parent root\n";
        assert!(matches!(ExplicitTree::parse(conflicting), Err(TreeError::Parse { line: 2, .. })));

        let misdeclared = "node w^w+1 level w^w offset 2 parent root\n";
        assert!(ExplicitTree::parse(misdeclared).is_err());
    }

    #[test]
    fn branch_and_antichain_reports() {
        let t = braid_fragment();
        let branches = branch_check(&t).unwrap();
        assert_eq!(branches.chains.len(), 3);
        assert_eq!(branches.max_length, 3);

        // Star: one root, four children.
        let mut star = ExplicitTree::new();
        star.insert(Ordinal::zero(), None).unwrap();
        for k in 0..4u64 {
            star.insert(o("w^w").add(&Ordinal::from_nat(k)), Some(Ordinal::zero())).unwrap();
        }
        let anti = antichain_check(&star);
        assert_eq!(anti.max_antichain, 4);
        assert!(anti.exact);

        let empty = ExplicitTree::new();
        assert_eq!(branch_check(&empty).unwrap().chains.len(), 0);
        assert_eq!(antichain_check(&empty).max_antichain, 0);
    }

    #[test]
    fn linf_norm_and_membership_examples() {
        assert_eq!(norm_diff(&[1, 5], &[3, 1]), 4);
        assert_eq!(norm_diff(&[2], &[2, 7]), 0);
        assert_eq!(norm_diff(&[4, 4], &[4, 4]), 0);
        assert_eq!(norm_diff(&[], &[9]), 0);

        assert!(linf_F_member(&[3], &[3, 9], 0));
        assert!(!linf_F_member(&[3, 9], &[3, 9], 5));
        assert!(!linf_F_member(&[0], &[4, 4], 3));

        assert_eq!(linf_witness_k(&[0, 0], &[2, 1], 1, 3), 5);
        assert_eq!(linf_witness_k(&[7], &[7], 0, 0), 0);
        assert_eq!(linf_witness_k(&[5, 5], &[5, 5, 1], 4, 1), 4);

        assert_eq!(coherence_check(&[1, 2, 3], &[1, 5, 3]), BTreeSet::from([1]));
        assert!(coherence_check(&[9, 9], &[9, 9]).is_empty());
        assert!(coherence_check(&[], &[7]).is_empty());
    }

    #[test]
    fn rho2_generated_nodes() {
        let ctx = Arc::new(Mutex::new(WalkContext::new()));
        let n3 = gen_rho2_node(&o("3"), 3, &ctx).unwrap();
        assert_eq!(n3, FinSeqNode::Explicit(vec![3, 2, 1]));
        let nw = gen_rho2_node(&o("w"), 3, &ctx).unwrap();
        assert_eq!(nw, FinSeqNode::Explicit(vec![1, 1, 1]));
        let empty = gen_rho2_node(&o("w^2"), 0, &ctx).unwrap();
        assert_eq!(empty, FinSeqNode::Explicit(vec![]));
    }

    #[test]
    fn finseq_parse_and_display() {
        assert_eq!(FinSeqNode::parse("(1, 2, 3)").unwrap(), FinSeqNode::Explicit(vec![1, 2, 3]));
        assert_eq!(FinSeqNode::parse("()").unwrap(), FinSeqNode::Explicit(vec![]));
        let d = FinSeqNode::parse("rho2 beta=w^2 alpha=4").unwrap();
        assert_eq!(d, FinSeqNode::Rho2 { beta: o("w^2"), alpha: 4 });
        assert_eq!(d.to_string(), "rho2 beta=w^2 alpha=4");
        let ctx = Arc::new(Mutex::new(WalkContext::new()));
        assert_eq!(d.expand(&ctx).unwrap().len(), 4);
    }

    #[test]
    fn witness_inclusion_and_restriction_monotonicity() {
        // Small explicit universe: all sequences of length ≤ 3 over {0,1,2}.
        let mut universe: Vec<Vec<u64>> = vec![vec![]];
        for len in 1..=3usize {
            let mut next = Vec::new();
            for u in universe.iter().filter(|u| u.len() == len - 1) {
                for v in 0..3u64 {
                    let mut w = u.clone();
                    w.push(v);
                    next.push(w);
                }
            }
            universe.extend(next);
        }
        let s = vec![1, 1];
        let t = vec![1, 2, 0];
        for m in 0..3u64 {
            for n in 0..3u64 {
                let k = linf_witness_k(&s, &t, m, n);
                for u in &universe {
                    if linf_F_member(u, &s, m) {
                        assert!(
                            linf_F_member(u, &t, k),
                            "u={u:?} in F_{m}(s) but not F_{k}(t)"
                        );
                    }
                }
            }
        }
        // s ⊑ t (initial segment) gives F_n(s) ⊆ F_n(t) directly.
        let s2 = vec![1, 2];
        for n in 0..3u64 {
            for u in &universe {
                if linf_F_member(u, &s2, n) {
                    assert!(linf_F_member(u, &t, n));
                }
            }
        }
    }

    #[test]
    fn sampled_lower_bound_is_labeled_and_bounded() {
        let ctx = Arc::new(Mutex::new(WalkContext::new()));
        let lb = sampled_norm_lower_bound(&ctx, &o("w"), &o("w*2"), &[0, 1, 2, 3, 4]).unwrap();
        // ρ₂(n, ω) = 1 and ρ₂(n, ω·2) = 2 for n > 0, so the bound is 1.
        assert_eq!(lb, 1);
    }
}
