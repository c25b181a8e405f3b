//! `ordlab` — command-line front end for the ordlab verification library.
//!
//! Exit codes: 0 — success and no failed checks; 1 — a verification report
//! contains failures (or a convergence/splitter check came out negative);
//! 2 — usage, configuration, or input errors.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ordlab::fixtures::{fixture_names, resolve_input};
use ordlab::group::{
    converges, restriction_cover, verify_group_axioms, Convergence, GroupElement,
    GroupVerifyOptions, Neighborhood,
};
use ordlab::lab::{emit_report, parse_universe, run_suite_jobs, ReportFormat, SuiteConfig};
use ordlab::matrix::{rho1_matrix, rho_matrix, verify_axioms, MatrixProvider, VerifyOptions};
use ordlab::ord::Ordinal;
use ordlab::report::Report;
use ordlab::sample::SamplerSpec;
use ordlab::sets::{
    build_tower, finiteness, gap_F_member, hausdorff_gap, hausdorff_tower, member,
    parse_gap_manifest, parse_set_expr, parse_tower_manifest, rho_to, splitter_check,
    validate_pregap, validate_tower, Finiteness, GapMatrix, SetEnv, SetsLimits, SplitterOutcome,
    TowerMatrix,
};
use ordlab::tree::{
    linf_F_member, linf_witness_k, norm_diff, verify_tree_matrix, ExplicitTree,
    FinSeqNode, TreeMatrix,
};
use ordlab::walks::{SublevelFn, WalkContext, WalkFn};

#[derive(Parser)]
#[command(
    name = "ordlab",
    version,
    about = "Exact ordinal walks, transitive matrices, and structure verification"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Walk characteristics: evaluation, sublevel sets, traces.
    Walk {
        #[command(subcommand)]
        cmd: WalkCmd,
    },
    /// Matrix axiom verification for a provider over a universe.
    Matrix {
        #[command(subcommand)]
        cmd: MatrixCmd,
    },
    /// Group axioms, convergence, and restriction traces.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// Explicit tree fragments and the ℓ∞ calculus.
    Tree {
        #[command(subcommand)]
        cmd: TreeCmd,
    },
    /// Decidable ω-set expressions.
    Sets {
        #[command(subcommand)]
        cmd: SetsCmd,
    },
    /// Towers: construction, verification, two-sided neighbourhoods.
    Tower {
        #[command(subcommand)]
        cmd: TowerCmd,
    },
    /// Pre-gaps: verification, splitters, two-sided neighbourhoods.
    Gap {
        #[command(subcommand)]
        cmd: GapCmd,
    },
    /// Config-driven verification suites.
    Lab {
        #[command(subcommand)]
        cmd: LabCmd,
    },
    /// Bundled example inputs.
    Fixture {
        #[command(subcommand)]
        cmd: FixtureCmd,
    },
}

// ---------------------------------------------------------------------------
// walk
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum WalkCmd {
    /// Evaluate a walk characteristic at a pair α ≤ β.
    Eval {
        /// Characteristic: rho, rho1, rho2, or rhobar.
        #[arg(long = "fn", value_name = "NAME")]
        func: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
    },
    /// Enumerate the sublevel set {ξ ≤ α : f(ξ, α) ≤ c}.
    Sublevel {
        /// Characteristic: rho or rho1.
        #[arg(long = "fn", value_name = "NAME", default_value = "rho")]
        func: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        c: u64,
    },
    /// Print the walk from β down to α.
    Trace {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
    },
}

fn walk_cmd(cmd: WalkCmd) -> Result<i32> {
    let mut ctx = WalkContext::new();
    match cmd {
        WalkCmd::Eval { func, alpha, beta } => {
            let f = WalkFn::parse(&func)
                .ok_or_else(|| anyhow!("unknown walk function {func:?}; use rho, rho1, rho2, or rhobar"))?;
            let a = parse_ordinal(&alpha)?;
            let b = parse_ordinal(&beta)?;
            let v = ctx.eval(f, &a, &b)?;
            println!("{v}");
            Ok(0)
        }
        WalkCmd::Sublevel { func, alpha, c } => {
            let f = match func.as_str() {
                "rho" => SublevelFn::Rho,
                "rho1" => SublevelFn::Rho1,
                other => bail!("sublevel supports rho and rho1, got {other:?}"),
            };
            let a = parse_ordinal(&alpha)?;
            let set = ctx.sublevel(f, &a, c)?;
            println!("{}", join_ordinals(&set));
            Ok(0)
        }
        WalkCmd::Trace { alpha, beta } => {
            let a = parse_ordinal(&alpha)?;
            let b = parse_ordinal(&beta)?;
            let steps = ctx.walk_trace(&a, &b)?;
            let rendered: Vec<String> = steps.iter().map(|o| o.to_string()).collect();
            println!("{}", rendered.join(" -> "));
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// matrix
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum MatrixCmd {
    /// Verify the transitivity axioms for a provider over a universe.
    Verify {
        /// Provider: rho, rho1, tower:<manifest>, tree:<file>, or gap:<manifest>.
        #[arg(long)]
        provider: String,
        /// Universe: a file (one ordinal per line, `fixture:` allowed) or
        /// `sampler:count=..,exp=..,coeff=..[,seed=..]`.
        #[arg(long, default_value = "sampler:")]
        universe: String,
        #[arg(long, default_value_t = 8)]
        xi_max: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn matrix_cmd(cmd: MatrixCmd) -> Result<i32> {
    match cmd {
        MatrixCmd::Verify { provider, universe, xi_max, seed, out } => {
            let ctx = Arc::new(Mutex::new(WalkContext::new()));
            let p = make_provider(&provider, &ctx)?;
            let uni = load_universe(&universe, seed)?;
            let opts = VerifyOptions {
                xi_max,
                seed,
                replay: format!(
                    "ordlab matrix verify --provider {provider} --universe {universe} --xi-max {xi_max} --seed {seed}"
                ),
                ..VerifyOptions::default()
            };
            let report = verify_axioms(p.as_ref(), &uni, &opts);
            out.emit(&report)?;
            Ok(report.exit_code())
        }
    }
}

// ---------------------------------------------------------------------------
// group
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum GroupCmd {
    /// Verify the topological group axioms for a base of neighbourhoods.
    Verify {
        /// Provider backing the neighbourhoods (see `matrix verify`).
        #[arg(long, default_value = "rho")]
        provider: String,
        /// Base entry "ξ,α"; repeat for more entries.
        #[arg(long = "nbhd", required = true)]
        nbhds: Vec<String>,
        /// File with one group element per line, e.g. `{1, w, w^2}`.
        #[arg(long)]
        elements: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Scan a sequence of group elements against one neighbourhood.
    Converge {
        #[arg(long, default_value = "rho")]
        provider: String,
        /// File with one group element per line.
        #[arg(long)]
        seq: String,
        /// Neighbourhood "ξ,α"; repeat to intersect several.
        #[arg(long = "nbhd", required = true)]
        nbhds: Vec<String>,
    },
    /// Least η with [δ]^{<ω} ∩ U_η(δ) ⊆ U_ξ(α).
    Restrict {
        #[arg(long, default_value = "rho")]
        provider: String,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        xi: u64,
        #[arg(long)]
        alpha: String,
    },
}

fn group_cmd(cmd: GroupCmd) -> Result<i32> {
    let ctx = Arc::new(Mutex::new(WalkContext::new()));
    match cmd {
        GroupCmd::Verify { provider, nbhds, elements, seed, out } => {
            let p = make_provider(&provider, &ctx)?;
            let base = parse_base(&nbhds, &p)?;
            let elems = load_elements(&elements)?;
            let opts = GroupVerifyOptions {
                seed,
                replay: format!(
                    "ordlab group verify --provider {provider} --elements {elements} ..."
                ),
                ..GroupVerifyOptions::default()
            };
            let report = verify_group_axioms(&base, &elems, &opts);
            out.emit(&report)?;
            Ok(report.exit_code())
        }
        GroupCmd::Converge { provider, seq, nbhds, } => {
            let p = make_provider(&provider, &ctx)?;
            let pairs = parse_pairs(&nbhds)?;
            let u = Neighborhood::subbase(p, pairs).map_err(|e| anyhow!("{e}"))?;
            let elems = load_elements(&seq)?;
            match converges(&elems, &u).map_err(|e| anyhow!("{e}"))? {
                Convergence::TailIndex(t) => {
                    println!("converges: tail index {t}");
                    Ok(0)
                }
                Convergence::Counterexample(bad) => {
                    let shown: Vec<String> = bad.iter().map(|i| i.to_string()).collect();
                    println!("does not converge: violations at indices {}", shown.join(", "));
                    Ok(1)
                }
            }
        }
        GroupCmd::Restrict { provider, delta, xi, alpha } => {
            let p = make_provider(&provider, &ctx)?;
            let d = parse_ordinal(&delta)?;
            let a = parse_ordinal(&alpha)?;
            let eta = restriction_cover(&d, xi, &a, p.as_ref()).map_err(|e| anyhow!("{e}"))?;
            println!("{eta}");
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// tree
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum TreeCmd {
    /// Verify tree order and matrix axioms for an explicit tree fragment.
    Verify {
        /// Tree file (`fixture:` allowed).
        file: String,
        #[arg(long, default_value_t = 8)]
        xi_max: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// ℓ∞ calculus on finite sequences: norms, membership, witnesses.
    Linf {
        /// Operation: norm, member, or witness.
        #[arg(long)]
        op: String,
        /// Sequence like "(3, 2, 1)" or "rho2 beta=<ord> alpha=<n>".
        #[arg(long)]
        s: String,
        #[arg(long)]
        t: String,
        #[arg(long, default_value_t = 0)]
        m: u64,
        #[arg(long, default_value_t = 0)]
        n: u64,
    },
}

fn tree_cmd(cmd: TreeCmd) -> Result<i32> {
    match cmd {
        TreeCmd::Verify { file, xi_max, out } => {
            let text = resolve_input(&file)?;
            let tree = ExplicitTree::parse(&text).map_err(|e| anyhow!("{file}: {e}"))?;
            let levels = tree.levels();
            let report = verify_tree_matrix(&tree, &levels, xi_max);
            out.emit(&report)?;
            Ok(report.exit_code())
        }
        TreeCmd::Linf { op, s, t, m, n } => {
            let ctx = Arc::new(Mutex::new(WalkContext::new()));
            let sv = FinSeqNode::parse(&s).map_err(|e| anyhow!("--s: {e}"))?.expand(&ctx)?;
            let tv = FinSeqNode::parse(&t).map_err(|e| anyhow!("--t: {e}"))?.expand(&ctx)?;
            match op.as_str() {
                "norm" => {
                    println!("{}", norm_diff(&sv, &tv));
                    Ok(0)
                }
                "member" => {
                    let inside = linf_F_member(&sv, &tv, n);
                    println!("{inside}");
                    Ok(if inside { 0 } else { 1 })
                }
                "witness" => {
                    println!("{}", linf_witness_k(&sv, &tv, m, n));
                    Ok(0)
                }
                other => bail!("unknown linf op {other:?}; use norm, member, or witness"),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// sets
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum SetsCmd {
    /// Evaluate an ω-set expression: membership and finiteness.
    Eval {
        /// S-expression, e.g. "(union (mod 4 1) (fin 0 2))".
        #[arg(long)]
        expr: String,
        /// Optional definitions file with `set <name> = (<expr>)` lines.
        #[arg(long)]
        sets: Option<String>,
        /// Test membership of a single natural number.
        #[arg(long)]
        member: Option<u64>,
        /// Report exact finiteness instead of a sample.
        #[arg(long, default_value_t = false)]
        finiteness: bool,
    },
}

fn sets_cmd(cmd: SetsCmd) -> Result<i32> {
    match cmd {
        SetsCmd::Eval { expr, sets, member: member_q, finiteness: finiteness_q } => {
            let env = match sets {
                None => SetEnv::new(),
                Some(path) => {
                    let text = resolve_input(&path)?;
                    SetEnv::parse(&text).map_err(|e| anyhow!("{path}: {e}"))?
                }
            };
            let e = parse_set_expr(&expr, &env).map_err(|e| anyhow!("--expr: {e}"))?;
            let limits = SetsLimits::default();
            if let Some(x) = member_q {
                println!("{}", member(&e, x));
                return Ok(0);
            }
            if finiteness_q {
                match finiteness(&e, &limits) {
                    Finiteness::Finite(els) => {
                        println!("finite: {{{}}}", join_nats(&els));
                    }
                    Finiteness::Infinite => println!("infinite"),
                    Finiteness::Undecided { scanned_to, found, .. } => {
                        println!("undecided: {found} elements below {scanned_to}");
                    }
                }
                return Ok(0);
            }
            // Default: a peek at the set.
            let sample: Vec<String> = (0..64u64)
                .filter(|x| member(&e, *x))
                .take(16)
                .map(|x| x.to_string())
                .collect();
            println!("members below 64 (first 16): {{{}}}", sample.join(", "));
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// tower
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum TowerCmd {
    /// Construct a tower (indices 0..length-2 and ω) and verify it.
    Build {
        #[arg(long, default_value_t = 12)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Verify a tower manifest: chain order, certificates, tightness.
    Verify {
        /// Manifest file (`fixture:` allowed).
        file: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Two-sided neighbourhood F_n(β) of a tower.
    Hausdorff {
        file: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        beta: String,
    },
    /// Evaluate ρ_TO at a pair of tower indices.
    Rho {
        file: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
    },
}

fn tower_cmd(cmd: TowerCmd) -> Result<i32> {
    let limits = SetsLimits::default();
    match cmd {
        TowerCmd::Build { length, seed, out } => {
            if length < 3 {
                bail!("--length must be at least 3");
            }
            let mut indices: Vec<Ordinal> =
                (0..(length as u64 - 1)).map(Ordinal::from_nat).collect();
            indices.push(Ordinal::omega());
            let tower = build_tower(&indices, seed, &limits).map_err(|e| anyhow!("{e}"))?;
            let replay = format!("ordlab tower build --length {length} --seed {seed}");
            let report = validate_tower(&tower, &limits, &replay);
            out.emit(&report)?;
            Ok(report.exit_code())
        }
        TowerCmd::Verify { file, out } => {
            let tower = load_tower(&file)?;
            let replay = format!("ordlab tower verify {file}");
            let report = validate_tower(&tower, &limits, &replay);
            out.emit(&report)?;
            Ok(report.exit_code())
        }
        TowerCmd::Hausdorff { file, n, beta } => {
            let tower = load_tower(&file)?;
            let b = parse_ordinal(&beta)?;
            let set = hausdorff_tower(&tower, n, &b, &limits).map_err(|e| anyhow!("{e}"))?;
            println!("{}", join_ordinals(&set));
            Ok(0)
        }
        TowerCmd::Rho { file, alpha, beta } => {
            let tower = load_tower(&file)?;
            let a = parse_ordinal(&alpha)?;
            let b = parse_ordinal(&beta)?;
            let v = rho_to(&tower, &a, &b, &limits).map_err(|e| anyhow!("{e}"))?;
            println!("{v}");
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// gap
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum GapCmd {
    /// Verify a pre-gap manifest: chain order, disjointness, coordination.
    Verify {
        /// Manifest file (`fixture:` allowed).
        file: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Test a candidate splitter against a pre-gap.
    Split {
        file: String,
        /// Candidate set expression.
        #[arg(long)]
        c: String,
    },
    /// Two-sided neighbourhood F_n(β) of a pre-gap.
    Hausdorff {
        file: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        beta: String,
    },
    /// Membership ξ-bound check: is a_α ∩ b_β ⊆ ξ?
    Member {
        file: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        xi: u64,
        #[arg(long)]
        beta: String,
    },
}

fn gap_cmd(cmd: GapCmd) -> Result<i32> {
    let limits = SetsLimits::default();
    match cmd {
        GapCmd::Verify { file, out } => {
            let gap = load_gap(&file)?;
            let replay = format!("ordlab gap verify {file}");
            let report = validate_pregap(&gap, &limits, &replay);
            out.emit(&report)?;
            Ok(report.exit_code())
        }
        GapCmd::Split { file, c } => {
            let gap = load_gap(&file)?;
            let expr = parse_set_expr(&c, &SetEnv::new()).map_err(|e| anyhow!("--c: {e}"))?;
            match splitter_check(&expr, &gap, &limits) {
                SplitterOutcome::Splits { xi } => {
                    let shown: Vec<String> = xi.iter().map(|v| v.to_string()).collect();
                    println!("splits: xi = [{}]", shown.join(", "));
                    Ok(0)
                }
                SplitterOutcome::Fails { index, side } => {
                    println!("fails at stage {index} ({side})");
                    Ok(1)
                }
                SplitterOutcome::Undecided { index, side, scanned_to } => {
                    bail!("undecided at stage {index} ({side}) after scanning to {scanned_to}")
                }
            }
        }
        GapCmd::Hausdorff { file, n, beta } => {
            let gap = load_gap(&file)?;
            let b = parse_ordinal(&beta)?;
            let set = hausdorff_gap(&gap, n, &b, &limits).map_err(|e| anyhow!("{e}"))?;
            println!("{}", join_ordinals(&set));
            Ok(0)
        }
        GapCmd::Member { file, alpha, xi, beta } => {
            let gap = load_gap(&file)?;
            let a = parse_ordinal(&alpha)?;
            let b = parse_ordinal(&beta)?;
            let inside = gap_F_member(&gap, &a, xi, &b, &limits).map_err(|e| anyhow!("{e}"))?;
            println!("{inside}");
            Ok(if inside { 0 } else { 1 })
        }
    }
}

// ---------------------------------------------------------------------------
// lab
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum LabCmd {
    /// Run a suite: a builtin name ("rho-full", "full") or a TOML config.
    Run {
        config: String,
        /// Directory for the report file (created if missing).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format: json, csv, or text.
        #[arg(long, default_value = "json")]
        format: String,
        /// Worker threads for independent sections.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List builtin suites.
    List,
}

fn lab_cmd(cmd: LabCmd) -> Result<i32> {
    match cmd {
        LabCmd::Run { config, out, format, jobs } => {
            let format = ReportFormat::parse(&format).map_err(|e| anyhow!(e))?;
            let cfg = SuiteConfig::load(&config)?;
            let report = run_suite_jobs(&cfg, jobs)?;
            let rendered = emit_report(&report, format);
            match out {
                None => print!("{rendered}"),
                Some(dir) => {
                    std::fs::create_dir_all(&dir)
                        .with_context(|| format!("creating {}", dir.display()))?;
                    let path = dir.join(format!("report.{}", format.extension()));
                    std::fs::write(&path, &rendered)
                        .with_context(|| format!("writing {}", path.display()))?;
                    println!("{}", path.display());
                    println!("{}", summary_line(&report));
                }
            }
            Ok(report.exit_code())
        }
        LabCmd::List => {
            for name in SuiteConfig::builtin_names() {
                println!("{name}");
            }
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// fixture
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum FixtureCmd {
    /// List bundled fixtures.
    List,
    /// Print a bundled fixture to stdout.
    Emit { name: String },
}

fn fixture_cmd(cmd: FixtureCmd) -> Result<i32> {
    match cmd {
        FixtureCmd::List => {
            for name in fixture_names() {
                println!("{name}");
            }
            Ok(0)
        }
        FixtureCmd::Emit { name } => {
            let text = ordlab::fixtures::fixture(&name)
                .ok_or_else(|| anyhow!("unknown fixture {name:?}; try `ordlab fixture list`"))?;
            print!("{text}");
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

/// Common `--out FILE` / `--format` pair for report-producing commands.
#[derive(Args)]
struct OutArgs {
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json, csv, or text (default: json for files, text for stdout).
    #[arg(long)]
    format: Option<String>,
}

impl OutArgs {
    fn emit(&self, report: &Report) -> Result<()> {
        let format = match (&self.format, &self.out) {
            (Some(f), _) => ReportFormat::parse(f).map_err(|e| anyhow!(e))?,
            (None, Some(path)) => match path.extension().and_then(|e| e.to_str()) {
                Some("json") => ReportFormat::Json,
                Some("csv") => ReportFormat::Csv,
                _ => ReportFormat::Text,
            },
            (None, None) => ReportFormat::Text,
        };
        let rendered = emit_report(report, format);
        match &self.out {
            None => print!("{rendered}"),
            Some(path) => {
                std::fs::write(path, &rendered)
                    .with_context(|| format!("writing {}", path.display()))?;
                eprintln!("{}", summary_line(report));
            }
        }
        Ok(())
    }
}

fn summary_line(report: &Report) -> String {
    let s = &report.summary;
    format!(
        "summary: {} pass, {} fail, {} skipped, {} undecided",
        s.pass, s.fail, s.skipped, s.undecided
    )
}

fn parse_ordinal(s: &str) -> Result<Ordinal> {
    Ordinal::parse(s).map_err(|e| anyhow!("bad ordinal {s:?}: {e}"))
}

fn join_ordinals<'a>(set: impl IntoIterator<Item = &'a Ordinal>) -> String {
    let shown: Vec<String> = set.into_iter().map(|o| o.to_string()).collect();
    shown.join(", ")
}

fn join_nats(set: &BTreeSet<u64>) -> String {
    let shown: Vec<String> = set.iter().map(|x| x.to_string()).collect();
    shown.join(", ")
}

/// Build a provider from a CLI spec: `rho`, `rho1`, `tower:<file>`,
/// `tree:<file>`, or `gap:<file>`.
fn make_provider(
    spec: &str,
    ctx: &Arc<Mutex<WalkContext>>,
) -> Result<Arc<dyn MatrixProvider>> {
    if spec == "rho" {
        return Ok(Arc::new(rho_matrix(ctx)));
    }
    if spec == "rho1" {
        return Ok(Arc::new(rho1_matrix(ctx)));
    }
    if let Some(path) = spec.strip_prefix("tower:") {
        let tower = load_tower(path)?;
        return Ok(Arc::new(TowerMatrix::new(Arc::new(tower), spec)));
    }
    if let Some(path) = spec.strip_prefix("tree:") {
        let text = resolve_input(path)?;
        let tree = ExplicitTree::parse(&text).map_err(|e| anyhow!("{path}: {e}"))?;
        return Ok(Arc::new(TreeMatrix::new(Arc::new(tree), spec)));
    }
    if let Some(path) = spec.strip_prefix("gap:") {
        let gap = load_gap(path)?;
        return Ok(Arc::new(GapMatrix::new(Arc::new(gap), spec)));
    }
    bail!("unknown provider {spec:?}; use rho, rho1, tower:<file>, tree:<file>, or gap:<file>")
}

fn load_tower(path: &str) -> Result<ordlab::sets::Tower> {
    let text = resolve_input(path)?;
    parse_tower_manifest(&text).map_err(|e| anyhow!("{path}: {e}"))
}

fn load_gap(path: &str) -> Result<ordlab::sets::PreGap> {
    let text = resolve_input(path)?;
    parse_gap_manifest(&text).map_err(|e| anyhow!("{path}: {e}"))
}

/// Universe argument: `sampler:<spec>` or a file path (`fixture:` allowed).
fn load_universe(arg: &str, seed: u64) -> Result<Vec<Ordinal>> {
    if let Some(spec_text) = arg.strip_prefix("sampler:") {
        let spec = SamplerSpec::parse(spec_text).map_err(|e| anyhow!("--universe: {e}"))?;
        return Ok(spec.realize(seed));
    }
    let text = resolve_input(arg)?;
    parse_universe(&text).map_err(|e| anyhow!("{arg}: {e}"))
}

/// Element file: one group element per line, `{a, b, c}`; blanks and `#`
/// comments ignored.
fn load_elements(path: &str) -> Result<Vec<GroupElement>> {
    let text = resolve_input(path)?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let e = GroupElement::parse(line)
            .map_err(|e| anyhow!("{path} line {}: {e}", lineno + 1))?;
        out.push(e);
    }
    Ok(out)
}

fn parse_pairs(nbhds: &[String]) -> Result<Vec<(u64, Ordinal)>> {
    let mut pairs = Vec::new();
    for raw in nbhds {
        let (xi, alpha) = raw
            .split_once(',')
            .ok_or_else(|| anyhow!("--nbhd expects \"xi,alpha\", got {raw:?}"))?;
        let xi: u64 = xi.trim().parse().with_context(|| format!("--nbhd {raw:?}: bad ξ"))?;
        let alpha = parse_ordinal(alpha.trim())?;
        pairs.push((xi, alpha));
    }
    Ok(pairs)
}

fn parse_base(nbhds: &[String], p: &Arc<dyn MatrixProvider>) -> Result<Vec<Neighborhood>> {
    let mut base = Vec::new();
    for (xi, alpha) in parse_pairs(nbhds)? {
        let u = Neighborhood::basic(Arc::clone(p), xi, alpha).map_err(|e| anyhow!("{e}"))?;
        base.push(u);
    }
    Ok(base)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Walk { cmd } => walk_cmd(cmd),
        Cmd::Matrix { cmd } => matrix_cmd(cmd),
        Cmd::Group { cmd } => group_cmd(cmd),
        Cmd::Tree { cmd } => tree_cmd(cmd),
        Cmd::Sets { cmd } => sets_cmd(cmd),
        Cmd::Tower { cmd } => tower_cmd(cmd),
        Cmd::Gap { cmd } => gap_cmd(cmd),
        Cmd::Lab { cmd } => lab_cmd(cmd),
        Cmd::Fixture { cmd } => fixture_cmd(cmd),
    }
}

fn main() {
    let code = match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}
