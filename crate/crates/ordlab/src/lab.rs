//! Config-driven suite runner.
//!
//! A suite is a named recipe ("rho-full" or "full") plus knobs: the ordinal
//! universe to sample, tolerance bounds, and which structures (tree, tower,
//! pre-gap) to put under test.  Suites are described by TOML files or invoked
//! by builtin name; every referenced file is loaded and parsed *before* any
//! check runs, so configuration mistakes abort with a distinct error instead
//! of producing a half-finished report.
//!
//! Runs are deterministic: the same config and seed produce byte-identical
//! canonical reports, regardless of how many worker threads execute the
//! sections.  The environment variable `LAB_SEED` overrides the config seed.

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::fixtures::resolve_input;
use crate::group::{verify_group_axioms, GroupElement, GroupVerifyOptions, Neighborhood};
use crate::matrix::{rho_matrix, run_check_with_replay, verify_axioms, VerifyOptions};
use crate::ord::Ordinal;
use crate::report::{config_value, CheckRecord, Report};
use crate::sample::SamplerSpec;
use crate::sets::{
    build_tower, parse_gap_manifest, parse_set_expr, parse_tower_manifest, rho_to, splitter_check,
    validate_pregap, validate_tower, PreGap, SetEnv, SetsLimits, Side, SplitterOutcome, Tower,
};
use crate::tree::{linf_F_member, linf_witness_k, verify_tree_matrix, ExplicitTree};
use crate::walks::WalkContext;

/// Errors that make a suite impossible to run.  The CLI maps these to exit
/// code 2 (configuration error), as opposed to exit code 1 (checks failed).
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T, LabError> {
    Err(LabError::Config(msg.into()))
}

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

/// Top-level suite description, deserialized from TOML.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Recipe name: "rho-full" or "full".
    pub suite: String,
    /// Base RNG seed; `LAB_SEED` in the environment overrides it.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub universe: UniverseConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub structures: Structures,
    /// Label used in replay strings; set automatically by [`SuiteConfig::load`].
    #[serde(skip)]
    pub source: Option<String>,
}

fn default_seed() -> u64 {
    7
}

/// Where the ordinal universe comes from.  At most one field may be set;
/// leaving all unset uses the default sampler.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseConfig {
    /// Path (or `fixture:<name>`) of a file with one ordinal per line.
    pub file: Option<String>,
    /// Sampler spec, e.g. `"count=120,exp=5,coeff=4"`.
    pub sampler: Option<String>,
    /// Explicit list of ordinal expressions.
    pub list: Option<Vec<String>>,
}

/// Bounds controlling how much work each section does.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Neighbourhood depth bound for matrix axiom checks.
    pub xi_max: u64,
    /// Scan bound used when searching for separating indices.
    pub coverage_bound: u64,
    /// Number of group elements generated for the group section.
    pub group_elements: usize,
    /// Cap on element pairs examined per group axiom.
    pub max_pairs: usize,
    /// Cap on ordered triples examined by the walk-inequality section.
    pub max_triples: usize,
    /// Number of stages in the constructed tower (last index is a limit).
    pub tower_length: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            xi_max: 8,
            coverage_bound: 1 << 16,
            group_elements: 120,
            max_pairs: 20_000,
            max_triples: 300_000,
            tower_length: 12,
        }
    }
}

/// Structures put under test by the "full" recipe.  Each entry is a path or
/// `fixture:<name>`; unset entries fall back to the bundled fixtures (and,
/// for the tower, to a freshly constructed one).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Structures {
    pub tree: Option<String>,
    pub tower: Option<String>,
    pub gap: Option<String>,
}

impl SuiteConfig {
    /// Builtin recipe by name.
    pub fn builtin(name: &str) -> Option<SuiteConfig> {
        match name {
            "rho-full" | "full" => Some(SuiteConfig {
                suite: name.to_string(),
                seed: default_seed(),
                source: Some(name.to_string()),
                ..SuiteConfig::default()
            }),
            _ => None,
        }
    }

    /// Names of the builtin recipes.
    pub fn builtin_names() -> &'static [&'static str] {
        &["rho-full", "full"]
    }

    pub fn from_toml(text: &str) -> Result<SuiteConfig, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(format!("invalid suite config: {e}")))
    }

    /// CLI entry point: `arg` is a builtin recipe name or a TOML file path.
    /// A file of the same name as a builtin wins, so configs can shadow.
    pub fn load(arg: &str) -> Result<SuiteConfig, LabError> {
        if !std::path::Path::new(arg).exists() {
            if let Some(b) = SuiteConfig::builtin(arg) {
                return Ok(b);
            }
        }
        let text = std::fs::read_to_string(arg)
            .map_err(|e| LabError::Config(format!("cannot read suite config {arg}: {e}")))?;
        let mut cfg = SuiteConfig::from_toml(&text)?;
        cfg.source = Some(arg.to_string());
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// Universe parsing
// ---------------------------------------------------------------------------

/// Parse a universe file: one ordinal expression per line; blank lines and
/// lines starting with `#` are ignored.  The result is sorted and deduplicated.
pub fn parse_universe(text: &str) -> Result<Vec<Ordinal>, String> {
    let mut set = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ord = Ordinal::parse(line)
            .map_err(|e| format!("universe line {}: {e}", lineno + 1))?;
        set.insert(ord);
    }
    Ok(set.into_iter().collect())
}

// ---------------------------------------------------------------------------
// Resolution: turn a config into ready-to-run data, or fail fast
// ---------------------------------------------------------------------------

struct Resolved {
    suite: String,
    seed: u64,
    universe: Vec<Ordinal>,
    tol: Tolerances,
    tree: ExplicitTree,
    tower: TowerPlan,
    gap: PreGap,
    replay: String,
    config_echo: serde_json::Value,
}

enum TowerPlan {
    /// Construct a tower of the given length (indices 0..len-1 and ω).
    Build { length: usize },
    /// Verify a tower loaded from a manifest.
    Manifest(Tower),
}

fn effective_seed(cfg: &SuiteConfig, lab_seed: Option<&str>) -> Result<u64, LabError> {
    match lab_seed {
        None => Ok(cfg.seed),
        Some(s) => s
            .trim()
            .parse::<u64>()
            .map_err(|_| LabError::Config(format!("LAB_SEED must be an unsigned integer, got {s:?}"))),
    }
}

fn resolve(cfg: &SuiteConfig, lab_seed: Option<&str>) -> Result<Resolved, LabError> {
    if !SuiteConfig::builtin_names().contains(&cfg.suite.as_str()) {
        return cfg_err(format!(
            "unknown suite {:?}; available: {}",
            cfg.suite,
            SuiteConfig::builtin_names().join(", ")
        ));
    }
    let seed = effective_seed(cfg, lab_seed)?;

    // Universe: exactly one source, default sampler when none given.
    let sources = [
        cfg.universe.file.is_some(),
        cfg.universe.sampler.is_some(),
        cfg.universe.list.is_some(),
    ]
    .iter()
    .filter(|b| **b)
    .count();
    if sources > 1 {
        return cfg_err("universe: set at most one of `file`, `sampler`, `list`");
    }
    let (universe, universe_echo) = if let Some(path) = &cfg.universe.file {
        let text = resolve_input(path)
            .map_err(|e| LabError::Config(format!("universe file {path}: {e}")))?;
        let u = parse_universe(&text).map_err(LabError::Config)?;
        (u, serde_json::json!({ "file": path }))
    } else if let Some(list) = &cfg.universe.list {
        let mut set = BTreeSet::new();
        for s in list {
            let ord = Ordinal::parse(s)
                .map_err(|e| LabError::Config(format!("universe list entry {s:?}: {e}")))?;
            set.insert(ord);
        }
        (
            set.into_iter().collect(),
            serde_json::json!({ "list_len": list.len() }),
        )
    } else {
        let spec_text = cfg.universe.sampler.as_deref().unwrap_or("");
        let spec = SamplerSpec::parse(spec_text).map_err(LabError::Config)?;
        let u = spec.realize(seed);
        (u, serde_json::json!({ "sampler": spec_text, "count": spec.count }))
    };
    if universe.len() < 3 {
        return cfg_err(format!(
            "universe has {} ordinals; at least 3 are required",
            universe.len()
        ));
    }

    if cfg.tolerances.tower_length < 3 || cfg.tolerances.tower_length > 58 {
        return cfg_err("tolerances.tower_length must be between 3 and 58");
    }
    if cfg.tolerances.group_elements < 4 {
        return cfg_err("tolerances.group_elements must be at least 4");
    }

    // Structures: parse everything referenced, before running anything.
    let tree_src = cfg.structures.tree.as_deref().unwrap_or("fixture:braid-tree");
    let tree_text = resolve_input(tree_src)
        .map_err(|e| LabError::Config(format!("tree {tree_src}: {e}")))?;
    let tree = ExplicitTree::parse(&tree_text)
        .map_err(|e| LabError::Config(format!("tree {tree_src}: {e}")))?;

    let gap_src = cfg.structures.gap.as_deref().unwrap_or("fixture:mod4-pregap");
    let gap_text = resolve_input(gap_src)
        .map_err(|e| LabError::Config(format!("pre-gap {gap_src}: {e}")))?;
    let gap = parse_gap_manifest(&gap_text)
        .map_err(|e| LabError::Config(format!("pre-gap {gap_src}: {e}")))?;

    let tower = match &cfg.structures.tower {
        None => TowerPlan::Build {
            length: cfg.tolerances.tower_length,
        },
        Some(src) => {
            let text = resolve_input(src)
                .map_err(|e| LabError::Config(format!("tower {src}: {e}")))?;
            let t = parse_tower_manifest(&text)
                .map_err(|e| LabError::Config(format!("tower {src}: {e}")))?;
            TowerPlan::Manifest(t)
        }
    };

    let source = cfg.source.as_deref().unwrap_or("<config>");
    let replay = format!("LAB_SEED={seed} ordlab lab run {source}");
    let config_echo = config_value(&[
        ("suite", serde_json::json!(cfg.suite)),
        ("seed", serde_json::json!(seed)),
        ("universe", universe_echo),
        ("universe_size", serde_json::json!(universe.len())),
        ("xi_max", serde_json::json!(cfg.tolerances.xi_max)),
        ("coverage_bound", serde_json::json!(cfg.tolerances.coverage_bound)),
        ("group_elements", serde_json::json!(cfg.tolerances.group_elements)),
        ("max_pairs", serde_json::json!(cfg.tolerances.max_pairs)),
        ("max_triples", serde_json::json!(cfg.tolerances.max_triples)),
        ("tree", serde_json::json!(tree_src)),
        ("gap", serde_json::json!(gap_src)),
        (
            "tower",
            match &cfg.structures.tower {
                None => serde_json::json!({ "build_length": cfg.tolerances.tower_length }),
                Some(src) => serde_json::json!(src),
            },
        ),
    ]);

    Ok(Resolved {
        suite: cfg.suite.clone(),
        seed,
        universe,
        tol: cfg.tolerances.clone(),
        tree,
        tower,
        gap,
        replay,
        config_echo,
    })
}

// ---------------------------------------------------------------------------
// Sections
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    WalkInequalities,
    MatrixRho,
    GroupRho,
    TreeFragment,
    LinfWitness,
    Tower,
    Gap,
}

fn sections_for(suite: &str) -> Vec<Section> {
    let mut v = vec![
        Section::WalkInequalities,
        Section::MatrixRho,
        Section::GroupRho,
    ];
    if suite == "full" {
        v.extend([
            Section::TreeFragment,
            Section::LinfWitness,
            Section::Tower,
            Section::Gap,
        ]);
    }
    v
}

fn run_section(section: Section, r: &Resolved) -> Vec<CheckRecord> {
    match section {
        Section::WalkInequalities => walk_section(r),
        Section::MatrixRho => matrix_section(r),
        Section::GroupRho => group_section(r),
        Section::TreeFragment => tree_section(r),
        Section::LinfWitness => linf_section(r),
        Section::Tower => tower_section(r),
        Section::Gap => gap_section(r),
    }
}

/// ρ two-sided inequalities over sampled triples, and ρ ≥ ρ₁ over pairs.
fn walk_section(r: &Resolved) -> Vec<CheckRecord> {
    let n = r.universe.len();
    let mut ctx = WalkContext::new();

    // Precompute the ρ and ρ₁ tables once; the triple loops then run on
    // plain integers.  An evaluation error poisons the dependent records
    // as undecided rather than failing them.
    let mut rho = vec![vec![0u64; n]; n];
    let mut rho1 = vec![vec![0u64; n]; n];
    let mut eval_error: Option<String> = None;
    'outer: for i in 0..n {
        for j in (i + 1)..n {
            match ctx.rho(&r.universe[i], &r.universe[j]) {
                Ok(v) => rho[i][j] = v,
                Err(e) => {
                    eval_error = Some(format!(
                        "rho({}, {}) failed: {e}",
                        r.universe[i], r.universe[j]
                    ));
                    break 'outer;
                }
            }
            match ctx.rho1(&r.universe[i], &r.universe[j]) {
                Ok(v) => rho1[i][j] = v,
                Err(e) => {
                    eval_error = Some(format!(
                        "rho1({}, {}) failed: {e}",
                        r.universe[i], r.universe[j]
                    ));
                    break 'outer;
                }
            }
        }
    }

    let mut records = Vec::new();
    let uni = &r.universe;
    let max_triples = r.tol.max_triples;

    records.push(run_check_with_replay(
        "walk.S1",
        "ρ(α,γ) ≤ max{ρ(α,β), ρ(β,γ)} for α < β < γ",
        &r.replay,
        |c| {
            if let Some(e) = &eval_error {
                return c.error(e.clone());
            }
            let mut seen = 0usize;
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        if seen >= max_triples {
                            return c.note(format!("{seen} triples checked (capped)"));
                        }
                        seen += 1;
                        if rho[i][k] > rho[i][j].max(rho[j][k]) {
                            return c.fail(
                                serde_json::json!({
                                    "alpha": uni[i].to_string(),
                                    "beta": uni[j].to_string(),
                                    "gamma": uni[k].to_string(),
                                    "rho_alpha_gamma": rho[i][k],
                                    "rho_alpha_beta": rho[i][j],
                                    "rho_beta_gamma": rho[j][k],
                                }),
                                "two-sided inequality (first form) violated".to_string(),
                            );
                        }
                    }
                }
            }
            c.note(format!("{seen} triples checked"));
        },
    ));

    records.push(run_check_with_replay(
        "walk.S2",
        "ρ(α,β) ≤ max{ρ(α,γ), ρ(β,γ)} for α < β < γ",
        &r.replay,
        |c| {
            if let Some(e) = &eval_error {
                return c.error(e.clone());
            }
            let mut seen = 0usize;
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        if seen >= max_triples {
                            return c.note(format!("{seen} triples checked (capped)"));
                        }
                        seen += 1;
                        if rho[i][j] > rho[i][k].max(rho[j][k]) {
                            return c.fail(
                                serde_json::json!({
                                    "alpha": uni[i].to_string(),
                                    "beta": uni[j].to_string(),
                                    "gamma": uni[k].to_string(),
                                    "rho_alpha_beta": rho[i][j],
                                    "rho_alpha_gamma": rho[i][k],
                                    "rho_beta_gamma": rho[j][k],
                                }),
                                "two-sided inequality (second form) violated".to_string(),
                            );
                        }
                    }
                }
            }
            c.note(format!("{seen} triples checked"));
        },
    ));

    records.push(run_check_with_replay(
        "walk.rho-ge-rho1",
        "ρ(α,β) ≥ ρ₁(α,β) on all sampled pairs",
        &r.replay,
        |c| {
            if let Some(e) = &eval_error {
                return c.error(e.clone());
            }
            let mut seen = 0usize;
            for i in 0..n {
                for j in (i + 1)..n {
                    seen += 1;
                    if rho[i][j] < rho1[i][j] {
                        return c.fail(
                            serde_json::json!({
                                "alpha": uni[i].to_string(),
                                "beta": uni[j].to_string(),
                                "rho": rho[i][j],
                                "rho1": rho1[i][j],
                            }),
                            "ρ is smaller than ρ₁".to_string(),
                        );
                    }
                }
            }
            c.note(format!("{seen} pairs checked"));
        },
    ));

    records
}

/// Matrix axioms G1–G4 for the ρ-induced matrix over the universe.
fn matrix_section(r: &Resolved) -> Vec<CheckRecord> {
    let ctx = Arc::new(Mutex::new(WalkContext::new()));
    let provider = rho_matrix(&ctx);
    let opts = VerifyOptions {
        xi_max: r.tol.xi_max,
        coverage_bound: r.tol.coverage_bound,
        seed: r.seed,
        replay: r.replay.clone(),
    };
    verify_axioms(&provider, &r.universe, &opts).records
}

/// Group axioms for basic neighbourhoods of the ρ-induced matrix.
fn group_section(r: &Resolved) -> Vec<CheckRecord> {
    let ctx = Arc::new(Mutex::new(WalkContext::new()));
    let provider: Arc<dyn crate::matrix::MatrixProvider> = Arc::new(rho_matrix(&ctx));

    // Deterministic base: small depths over a spread of owners, plus a top
    // owner strictly above every universe point so each nonempty element has
    // a neighbourhood able to separate it from the identity.
    let top = match r.universe.last().and_then(|m| m.terms().first()) {
        None => Ordinal::omega(),
        Some(term) => Ordinal::omega_pow(term.exp.succ()),
    };
    let mut owners: Vec<&Ordinal> = pick_spread(&r.universe, 4);
    owners.push(&top);
    let mut base = Vec::new();
    for (i, alpha) in owners.iter().enumerate() {
        for xi in 0..=2u64 {
            // Vary depth by owner so the base is not a plain product.
            if (xi + i as u64) % 3 != 2 {
                match Neighborhood::basic(provider.clone(), xi, (*alpha).clone()) {
                    Ok(nbhd) => base.push(nbhd),
                    Err(e) => {
                        return vec![run_check_with_replay(
                            "group.base",
                            "basic neighbourhood construction",
                            &r.replay,
                            |c| c.error(format!("neighbourhood (ξ={xi}, {alpha}): {e}")),
                        )];
                    }
                }
            }
        }
    }

    // Deterministic elements: finite subsets of the universe.
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed ^ 0x67726f75); // "grou"
    let mut elements = vec![GroupElement::empty()];
    while elements.len() < r.tol.group_elements {
        let size = rng.gen_range(1..=4usize);
        let mut set = BTreeSet::new();
        for _ in 0..size {
            let idx = rng.gen_range(0..r.universe.len());
            set.insert(r.universe[idx].clone());
        }
        elements.push(GroupElement::new(set));
    }

    let opts = GroupVerifyOptions {
        max_pairs: r.tol.max_pairs,
        separation_bound: r.tol.coverage_bound,
        seed: r.seed,
        replay: r.replay.clone(),
    };
    verify_group_axioms(&base, &elements, &opts).records
}

/// Pick up to `k` entries spread across a sorted slice (always including the
/// first and last).
fn pick_spread(v: &[Ordinal], k: usize) -> Vec<&Ordinal> {
    if v.is_empty() || k == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let steps = k.min(v.len());
    for i in 0..steps {
        let idx = if steps == 1 {
            0
        } else {
            i * (v.len() - 1) / (steps - 1)
        };
        if out.last() != Some(&&v[idx]) {
            out.push(&v[idx]);
        }
    }
    out
}

/// Tree-order and matrix-axiom checks for the configured tree fragment.
fn tree_section(r: &Resolved) -> Vec<CheckRecord> {
    let levels = r.tree.levels();
    verify_tree_matrix(&r.tree, &levels, r.tol.xi_max).records
}

/// ℓ∞ witness inclusion over the universe of sequences in 3^{≤3}.
fn linf_section(r: &Resolved) -> Vec<CheckRecord> {
    let nodes = small_seq_universe(3, 3);
    vec![run_check_with_replay(
        "tree.linf-witness",
        "F^∞_m(s) ⊆ F^∞_k(t) with k = ‖t−s‖ + max{m,n}",
        &r.replay,
        |c| {
            let mut checked = 0usize;
            for s in &nodes {
                for t in &nodes {
                    // The inclusion only makes sense when t sits at least as
                    // high as s; otherwise the level condition already fails.
                    if s.len() > t.len() {
                        continue;
                    }
                    for m in 0..=2u64 {
                        for nn in 0..=2u64 {
                            let k = linf_witness_k(s, t, m, nn);
                            for u in &nodes {
                                if linf_F_member(u, s, m) && !linf_F_member(u, t, k) {
                                    return c.fail(
                                        serde_json::json!({
                                            "s": format!("{s:?}"),
                                            "t": format!("{t:?}"),
                                            "u": format!("{u:?}"),
                                            "m": m,
                                            "n": nn,
                                            "k": k,
                                        }),
                                        "witness inclusion violated".to_string(),
                                    );
                                }
                            }
                            checked += 1;
                        }
                    }
                }
            }
            c.note(format!("{checked} (s,t,m,n) combinations checked"));
        },
    )]
}

/// All sequences over {0..base-1} of length ≤ max_len.
fn small_seq_universe(base: u64, max_len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<u64>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for v in 0..base {
                let mut t = s.clone();
                t.push(v);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Build (or load) the tower, validate it, and check ρ_TO transitivity.
fn tower_section(r: &Resolved) -> Vec<CheckRecord> {
    let limits = SetsLimits::default();
    let tower = match &r.tower {
        TowerPlan::Manifest(t) => Ok(t.clone()),
        TowerPlan::Build { length } => {
            let mut indices: Vec<Ordinal> =
                (0..(*length as u64 - 1)).map(Ordinal::from_nat).collect();
            indices.push(Ordinal::omega());
            build_tower(&indices, r.seed, &limits).map_err(|e| e.to_string())
        }
    };

    let tower = match tower {
        Ok(t) => t,
        Err(why) => {
            // Construction failed: emit a single undecided record instead of
            // the whole tower block.
            return vec![run_check_with_replay(
                "tower.build",
                "tower construction",
                &r.replay,
                |c| c.error(format!("tower construction failed: {why}")),
            )];
        }
    };

    let mut records = validate_tower(&tower, &limits, &r.replay).records;
    records.push(run_check_with_replay(
        "tower.rho-to-transitive",
        "ρ_TO(α,γ) ≤ max{ρ_TO(α,β), ρ_TO(β,γ)}",
        &r.replay,
        |c| {
            let idx = tower.indices();
            let n = idx.len();
            let mut table = vec![vec![0u64; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    match rho_to(&tower, &idx[i], &idx[j], &limits) {
                        Ok(v) => table[i][j] = v,
                        Err(e) => return c.error(format!(
                            "rho_TO({}, {}) undecided: {e}",
                            idx[i], idx[j]
                        )),
                    }
                }
            }
            let mut triples = 0usize;
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        triples += 1;
                        if table[i][k] > table[i][j].max(table[j][k]) {
                            return c.fail(
                                serde_json::json!({
                                    "alpha": idx[i].to_string(),
                                    "beta": idx[j].to_string(),
                                    "gamma": idx[k].to_string(),
                                    "rho_to_alpha_gamma": table[i][k],
                                    "rho_to_alpha_beta": table[i][j],
                                    "rho_to_beta_gamma": table[j][k],
                                }),
                                "ρ_TO transitivity violated".to_string(),
                            );
                        }
                    }
                }
            }
            c.note(format!("{triples} triples checked"));
        },
    ));
    records
}

/// Validate the configured pre-gap and check the splitter examples.
fn gap_section(r: &Resolved) -> Vec<CheckRecord> {
    let limits = SetsLimits::default();
    let mut records = validate_pregap(&r.gap, &limits, &r.replay).records;

    // Splitter candidates with known expected outcomes against the bundled
    // mod-4 pre-gap.  For a custom pre-gap only decidability is checked.
    let default_gap = r.gap.len() == 3
        && parse_gap_manifest(crate::fixtures::fixture("mod4-pregap").unwrap())
            .map(|g| g.indices() == r.gap.indices())
            .unwrap_or(false);
    let gap = &r.gap;
    records.push(run_check_with_replay(
        "gap.splitter",
        "splitter candidates decide as expected",
        &r.replay,
        |c| {
            let candidates = [
                ("(union (mod 4 0) (mod 4 1))", "splits"),
                ("(all)", "fails"),
                ("(mod 2 0)", "fails"),
            ];
            let env = SetEnv::new();
            for (expr_text, expected) in candidates {
                let expr = match parse_set_expr(expr_text, &env) {
                    Ok(e) => e,
                    Err(e) => return c.error(format!("candidate {expr_text}: {e}")),
                };
                let outcome = splitter_check(&expr, gap, &limits);
                let got = match &outcome {
                    SplitterOutcome::Splits { .. } => "splits",
                    SplitterOutcome::Fails { .. } => "fails",
                    SplitterOutcome::Undecided { index, side, scanned_to } => {
                        return c.error(format!(
                            "candidate {expr_text}: undecided at stage {index} ({}) after scanning to {scanned_to}",
                            match side { Side::A => "a-side", Side::B => "b-side" },
                        ));
                    }
                };
                if default_gap && got != expected {
                    return c.fail(
                        serde_json::json!({
                            "candidate": expr_text,
                            "expected": expected,
                            "got": got,
                        }),
                        "splitter outcome differs from expected".to_string(),
                    );
                }
            }
            c.note(if default_gap {
                "3 candidates matched expected outcomes".to_string()
            } else {
                "3 candidates decided (custom pre-gap: outcomes not pinned)".to_string()
            });
        },
    ));
    records
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// Run a suite on a single thread.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report, LabError> {
    run_suite_jobs(cfg, 1)
}

/// Run a suite with up to `jobs` worker threads.  The report is identical to
/// a single-threaded run: sections are independent and records are sorted.
pub fn run_suite_jobs(cfg: &SuiteConfig, jobs: usize) -> Result<Report, LabError> {
    let lab_seed = std::env::var("LAB_SEED").ok();
    let resolved = resolve(cfg, lab_seed.as_deref())?;
    let sections = sections_for(&resolved.suite);
    let jobs = jobs.max(1).min(sections.len().max(1));

    let mut records: Vec<CheckRecord> = Vec::new();
    if jobs <= 1 {
        for s in &sections {
            records.extend(run_section(*s, &resolved));
        }
    } else {
        let resolved_ref = &resolved;
        let chunks: Vec<Vec<Section>> = (0..jobs)
            .map(|w| {
                sections
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % jobs == w)
                    .map(|(_, s)| *s)
                    .collect()
            })
            .collect();
        let mut results: Vec<Vec<CheckRecord>> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .into_iter()
                .map(|chunk| {
                    scope.spawn(move || {
                        let mut out = Vec::new();
                        for s in chunk {
                            out.extend(run_section(s, resolved_ref));
                        }
                        out
                    })
                })
                .collect();
            for h in handles {
                results.push(h.join().expect("lab worker panicked"));
            }
        });
        for r in results {
            records.extend(r);
        }
    }

    Ok(Report::new(resolved.config_echo, records))
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Output format for rendered reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<ReportFormat, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            other => Err(format!("unknown format {other:?}; use json, csv, or text")),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Text => "txt",
        }
    }
}

/// Render a report in the requested format.
pub fn emit_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Text => report.to_text(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    #[test]
    fn builtin_rho_full_passes_and_is_deterministic() {
        let cfg = SuiteConfig {
            universe: UniverseConfig {
                sampler: Some("count=24,exp=4,coeff=3".to_string()),
                ..UniverseConfig::default()
            },
            ..SuiteConfig::builtin("rho-full").unwrap()
        };
        let a = run_suite(&cfg).unwrap();
        assert!(a.all_pass(), "rho-full should pass:\n{}", a.to_text());
        for id in ["walk.S1", "walk.S2", "walk.rho-ge-rho1", "matrix.G1", "matrix.G4"] {
            assert_eq!(a.status_of(id), Some(Status::Pass), "{id}");
        }
        for i in 1..=6 {
            assert_eq!(
                a.status_of(&format!("group.axiom-{i}")),
                Some(Status::Pass),
                "group.axiom-{i}"
            );
        }
        let b = run_suite(&cfg).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
    }

    #[test]
    fn full_suite_includes_structure_sections() {
        let cfg = SuiteConfig {
            universe: UniverseConfig {
                sampler: Some("count=12,exp=3,coeff=2".to_string()),
                ..UniverseConfig::default()
            },
            tolerances: Tolerances {
                group_elements: 24,
                tower_length: 6,
                ..Tolerances::default()
            },
            ..SuiteConfig::builtin("full").unwrap()
        };
        let report = run_suite(&cfg).unwrap();
        assert!(report.all_pass(), "full should pass:\n{}", report.to_text());
        for id in [
            "tree.order",
            "tree.G1",
            "tree.linf-witness",
            "tower.indices",
            "tower.cert-tight",
            "tower.rho-to-transitive",
            "gap.condition-1",
            "gap.remark",
            "gap.splitter",
        ] {
            assert!(report.record(id).is_some(), "missing record {id}");
            assert_eq!(report.status_of(id), Some(Status::Pass), "{id}");
        }
    }

    #[test]
    fn jobs_sharding_matches_single_threaded_output() {
        let cfg = SuiteConfig {
            universe: UniverseConfig {
                sampler: Some("count=10,exp=3,coeff=2".to_string()),
                ..UniverseConfig::default()
            },
            tolerances: Tolerances {
                group_elements: 12,
                tower_length: 5,
                ..Tolerances::default()
            },
            ..SuiteConfig::builtin("full").unwrap()
        };
        let single = run_suite_jobs(&cfg, 1).unwrap();
        let sharded = run_suite_jobs(&cfg, 4).unwrap();
        assert_eq!(single.canonical_json(), sharded.canonical_json());
    }

    #[test]
    fn lab_seed_override_and_validation() {
        let cfg = SuiteConfig::builtin("rho-full").unwrap();
        assert_eq!(effective_seed(&cfg, None).unwrap(), cfg.seed);
        assert_eq!(effective_seed(&cfg, Some("123")).unwrap(), 123);
        assert!(effective_seed(&cfg, Some("not-a-number")).is_err());
    }

    #[test]
    fn config_errors_abort_before_running() {
        // Unknown suite name.
        let mut cfg = SuiteConfig::builtin("rho-full").unwrap();
        cfg.suite = "bogus".to_string();
        assert!(matches!(run_suite(&cfg), Err(LabError::Config(_))));

        // Missing structure file.
        let mut cfg = SuiteConfig::builtin("full").unwrap();
        cfg.structures.tree = Some("/no/such/file.tree".to_string());
        let err = run_suite(&cfg).unwrap_err();
        assert!(err.to_string().contains("/no/such/file.tree"));

        // Over-specified universe.
        let mut cfg = SuiteConfig::builtin("rho-full").unwrap();
        cfg.universe.file = Some("fixture:universe-small".to_string());
        cfg.universe.sampler = Some("count=5".to_string());
        assert!(matches!(run_suite(&cfg), Err(LabError::Config(_))));

        // Bad sampler spec.
        let mut cfg = SuiteConfig::builtin("rho-full").unwrap();
        cfg.universe.sampler = Some("count=0,bogus=1".to_string());
        assert!(matches!(run_suite(&cfg), Err(LabError::Config(_))));
    }

    #[test]
    fn toml_round_trip_and_shadowing_rules() {
        let text = r#"
            suite = "rho-full"
            seed = 99

            [universe]
            sampler = "count=16,exp=3,coeff=2"

            [tolerances]
            xi_max = 4
            group_elements = 16
        "#;
        let cfg = SuiteConfig::from_toml(text).unwrap();
        assert_eq!(cfg.suite, "rho-full");
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.tolerances.xi_max, 4);
        // Unset tolerances keep their defaults.
        assert_eq!(cfg.tolerances.max_pairs, Tolerances::default().max_pairs);
        let report = run_suite(&cfg).unwrap();
        assert!(report.all_pass(), "{}", report.to_text());

        // Unknown keys are rejected.
        assert!(SuiteConfig::from_toml("suite = \"rho-full\"\nbogus = 1").is_err());

        // Builtin names resolve when no such file exists.
        let loaded = SuiteConfig::load("rho-full").unwrap();
        assert_eq!(loaded.suite, "rho-full");
        assert!(SuiteConfig::load("no-such-suite").is_err());
    }

    #[test]
    fn universe_file_and_list_sources() {
        let mut cfg = SuiteConfig::builtin("rho-full").unwrap();
        cfg.universe.file = Some("fixture:universe-small".to_string());
        cfg.tolerances.group_elements = 12;
        let report = run_suite(&cfg).unwrap();
        assert!(report.all_pass(), "{}", report.to_text());

        let mut cfg = SuiteConfig::builtin("rho-full").unwrap();
        cfg.universe.list = Some(
            ["0", "1", "2", "w", "w+1", "w*2", "w^2", "w^2+w*3+4"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        );
        cfg.tolerances.group_elements = 12;
        let report = run_suite(&cfg).unwrap();
        assert!(report.all_pass(), "{}", report.to_text());
    }

    #[test]
    fn parse_universe_rejects_bad_lines() {
        let ok = parse_universe("# comment\n0\nw\n\nw^2\n").unwrap();
        assert_eq!(ok.len(), 3);
        assert!(parse_universe("0\nnot-an-ordinal\n").is_err());
    }

    #[test]
    fn report_formats_render() {
        let cfg = SuiteConfig {
            universe: UniverseConfig {
                sampler: Some("count=8,exp=3,coeff=2".to_string()),
                ..UniverseConfig::default()
            },
            tolerances: Tolerances {
                group_elements: 8,
                ..Tolerances::default()
            },
            ..SuiteConfig::builtin("rho-full").unwrap()
        };
        let report = run_suite(&cfg).unwrap();
        assert!(emit_report(&report, ReportFormat::Json).contains("\"records\""));
        assert!(emit_report(&report, ReportFormat::Csv).starts_with("id,"));
        assert!(emit_report(&report, ReportFormat::Text).contains("walk.S1"));
        assert_eq!(ReportFormat::parse("csv").unwrap(), ReportFormat::Csv);
        assert!(ReportFormat::parse("yaml").is_err());
    }
}
