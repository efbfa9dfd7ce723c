//! `topex` — one binary over the whole toolkit: sign-string bookkeeping,
//! stretching trees, finite topology verification, iterated means, and
//! box-counting dimension. Exit codes: 0 success, 1 invalid input or usage,
//! 2 a verification-style check ran and failed.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use topex_core::dimension::{box_count, rasterize_union, stretched_union_dimension, DEFAULT_SCALES};
use topex_core::finite_topology::{
    check_expanding_with_cap, coproduct_with_cap, verify_fractal_family, FamilyPresentation, TaggedSpace,
};
use topex_core::index_algebra::{
    chart_composition, chart_index, enumerate_lambda_with_cap, format_composition, parent, SignString,
};
use topex_core::mean_functions::{
    iterated_mean, lemma_l1_convergence, mean_derivative_check, valid_range, DeltaSchedule, SampledFunction,
    WeierstrassParams, DEFAULT_CELLS,
};
use topex_core::stretching::{
    build_tree_with_cap, verify_stretching_axioms, EpsilonSchedule, ExpansionTree, Interval, OpenBox,
};

const DERIVATIVE_REL_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "topex", version, about = "Stretching trees, coproduct topologies, iterated means, box counting")]
struct Cli {
    /// JSON object with fallback values for flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the sign strings of step n, optionally with chart bookkeeping.
    Lambda(LambdaArgs),
    /// Build a stretching expansion tree.
    Stretch(StretchArgs),
    /// Finite-topology operations on JSON presentations.
    Topology {
        #[command(subcommand)]
        cmd: TopologyCmd,
    },
    /// Evaluate iterated means of a generator function.
    Mean(MeanArgs),
    /// Box-counting estimate for a stretched union.
    Dimension(DimensionArgs),
    /// DOT diagrams: tree layout or chart-transition arrows.
    Diagram(DiagramArgs),
}

#[derive(Args)]
struct LambdaArgs {
    #[arg(long)]
    step: Option<usize>,
    /// Emit a CSV table sign_string,k,primed,composition instead of a plain list.
    #[arg(long)]
    chart_table: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StretchArgs {
    /// Base box, one "lo,hi" pair per axis joined by ';'.
    #[arg(long)]
    base: Option<String>,
    /// Stretching amounts "e0,e1,...", strictly decreasing.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    /// Also run the interval-process condition checks (exit 2 on failure).
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TopologyCmd {
    /// Check the family axioms and the expansion property of a presentation.
    Verify {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Materialize the coproduct topology of tagged spaces.
    Coproduct {
        #[arg(long)]
        spaces: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MeanArgs {
    /// Sign word sigma_0..sigma_n, e.g. "+-".
    #[arg(long)]
    signs: Option<String>,
    /// Window widths delta_0,...,delta_n, strictly decreasing.
    #[arg(long)]
    deltas: Option<String>,
    /// Generator: "identity" or "weierstrass:amp,freq,terms".
    #[arg(long = "f")]
    function: Option<String>,
    /// Sample abscissas "start:end:step".
    #[arg(long)]
    xs: Option<String>,
    /// Sampling domain "lo,hi" for the generator.
    #[arg(long)]
    domain: Option<String>,
    /// Grid cells for the sampled representation.
    #[arg(long)]
    cells: Option<usize>,
    /// Compare d/dx of the mean against the fundamental-theorem value.
    #[arg(long)]
    check_derivative: bool,
    /// Tabulate the next-window identification error and require decrease.
    #[arg(long)]
    check_l1: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DimensionArgs {
    /// Tree JSON as emitted by `stretch --format json`.
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    step: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagramArgs {
    /// Tree JSON: emit the parent/child tree layout.
    #[arg(long, conflicts_with = "chart_step")]
    tree: Option<PathBuf>,
    /// Step n: emit chart-transition arrows for steps 0..=n.
    #[arg(long)]
    chart_step: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Anything that should terminate the run: `Invalid` exits 1, `CheckFailed`
/// exits 2 after its report has been printed.
enum Failure {
    Invalid(String),
    CheckFailed(String),
}

impl From<topex_core::Error> for Failure {
    fn from(e: topex_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type RunResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are success paths; everything else is a usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(f) => return report(f),
    };
    let result = match cli.cmd {
        Cmd::Lambda(args) => run_lambda(args, &config),
        Cmd::Stretch(args) => run_stretch(args, &config),
        Cmd::Topology { cmd } => run_topology(cmd, &config),
        Cmd::Mean(args) => run_mean(args, &config),
        Cmd::Dimension(args) => run_dimension(args, &config),
        Cmd::Diagram(args) => run_diagram(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    match f {
        Failure::Invalid(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Failure::CheckFailed(msg) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}

type Config = BTreeMap<String, serde_json::Value>;

fn load_config(path: Option<&std::path::Path>) -> Result<Config, Failure> {
    let Some(path) = path else {
        return Ok(Config::new());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("config {}: {e}", path.display())))
}

fn cfg_str(config: &Config, key: &str) -> Option<String> {
    config.get(key).and_then(|v| match v {
        serde_json::Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    })
}

fn cfg_usize(config: &Config, key: &str) -> Option<usize> {
    config.get(key).and_then(|v| v.as_u64()).map(|v| v as usize)
}

fn cap_override(default: usize) -> Result<usize, Failure> {
    match std::env::var("TOPEX_CAP") {
        Ok(v) => v
            .parse()
            .map_err(|_| Failure::Invalid(format!("TOPEX_CAP: {v:?} is not a cap value"))),
        Err(_) => Ok(default),
    }
}

fn write_out(out: Option<&PathBuf>, text: &str) -> RunResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Invalid(format!("--{flag} is required")))
}

// ---- lambda ----------------------------------------------------------------

fn run_lambda(args: LambdaArgs, config: &Config) -> RunResult {
    let step = require(args.step.or_else(|| cfg_usize(config, "step")), "step")?;
    let cap = cap_override(topex_core::DEFAULT_STEP_CAP)?;
    let strings = enumerate_lambda_with_cap(step, cap)?;
    let format = args.format.unwrap_or(if args.chart_table { Format::Csv } else { Format::Text });
    let text = match (format, args.chart_table) {
        (Format::Text, false) => {
            let mut s = String::new();
            for j in &strings {
                s.push_str(&j.to_string());
                s.push('\n');
            }
            s
        }
        (Format::Csv, _) | (Format::Text, true) => {
            let mut s = String::from("sign_string,k,primed,composition\n");
            for j in &strings {
                let chart = chart_index(j);
                let comp = format_composition(&chart_composition(j));
                s.push_str(&format!("{j},{},{},{comp}\n", chart.k, chart.primed));
            }
            s
        }
        (Format::Json, _) => {
            let rows: Vec<serde_json::Value> = strings
                .iter()
                .map(|j| {
                    let chart = chart_index(j);
                    serde_json::json!({
                        "sign_string": j.to_string(),
                        "k": chart.k,
                        "primed": chart.primed,
                        "composition": format_composition(&chart_composition(j)),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("serializable") + "\n"
        }
        (Format::Dot, _) => return Err(Failure::Invalid("lambda has no dot format; see `diagram`".to_string())),
    };
    write_out(args.out.as_ref(), &text)
}

// ---- stretch ---------------------------------------------------------------

fn parse_base(text: &str) -> Result<OpenBox, Failure> {
    let mut sides = Vec::new();
    for part in text.split(';') {
        let (lo, hi) = part
            .split_once(',')
            .ok_or_else(|| Failure::Invalid(format!("base: expected \"lo,hi\", got {part:?}")))?;
        let lo: f64 = lo.trim().parse().map_err(|_| Failure::Invalid(format!("base: bad number {lo:?}")))?;
        let hi: f64 = hi.trim().parse().map_err(|_| Failure::Invalid(format!("base: bad number {hi:?}")))?;
        sides.push(Interval::new(lo, hi)?);
    }
    Ok(OpenBox::new(sides)?)
}

fn parse_floats(text: &str, flag: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Failure::Invalid(format!("{flag}: bad number {p:?}")))
        })
        .collect()
}

fn tree_csv(tree: &ExpansionTree) -> String {
    let mut s = String::from("sign_string,lo,hi\n");
    for (j, node) in tree.nodes() {
        let lo: Vec<String> = node.sides().iter().map(|i| i.lo().to_string()).collect();
        let hi: Vec<String> = node.sides().iter().map(|i| i.hi().to_string()).collect();
        s.push_str(&format!("{j},{},{}\n", lo.join(";"), hi.join(";")));
    }
    s
}

fn box_label(b: &OpenBox) -> String {
    b.sides()
        .iter()
        .map(|i| format!("]{},{}[", i.lo(), i.hi()))
        .collect::<Vec<_>>()
        .join("x")
}

fn tree_dot(tree: &ExpansionTree) -> String {
    let mut s = String::from("digraph expansion_tree {\n  rankdir=TB;\n");
    s.push_str(&format!("  root [label=\"{}\"];\n", box_label(tree.base())));
    for (j, node) in tree.nodes() {
        s.push_str(&format!("  \"{j}\" [label=\"{j} {}\"];\n", box_label(node)));
    }
    for (j, _) in tree.nodes() {
        if j.step() == 0 {
            s.push_str(&format!("  root -> \"{j}\";\n"));
        } else {
            let p = parent(j).expect("non-root node");
            s.push_str(&format!("  \"{p}\" -> \"{j}\";\n"));
        }
    }
    s.push_str("}\n");
    s
}

fn run_stretch(args: StretchArgs, config: &Config) -> RunResult {
    let base = parse_base(&require(args.base.or_else(|| cfg_str(config, "base")), "base")?)?;
    let eps_raw = require(args.eps.or_else(|| cfg_str(config, "eps")), "eps")?;
    let eps = EpsilonSchedule::new(parse_floats(&eps_raw, "eps")?)?;
    let depth = require(args.depth.or_else(|| cfg_usize(config, "depth")), "depth")?;
    let cap = cap_override(topex_core::DEFAULT_STEP_CAP)?;
    let tree = build_tree_with_cap(base, eps, depth, cap)?;
    let format = args.format.unwrap_or(Format::Json);
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&tree).expect("serializable") + "\n",
        Format::Csv => tree_csv(&tree),
        Format::Dot => tree_dot(&tree),
        Format::Text => tree_csv(&tree),
    };
    write_out(args.out.as_ref(), &text)?;
    if args.verify {
        let report = verify_stretching_axioms(&tree)?;
        if !report.all_pass() {
            let failed: Vec<String> = report
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.description.clone())
                .collect();
            return Err(Failure::CheckFailed(failed.join("; ")));
        }
    }
    Ok(())
}

// ---- topology --------------------------------------------------------------

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn run_topology(cmd: TopologyCmd, _config: &Config) -> RunResult {
    match cmd {
        TopologyCmd::Verify { family, format, out } => {
            let pres: FamilyPresentation = read_json(&family)?;
            let cap = cap_override(topex_core::DEFAULT_COPRODUCT_CAP)?;
            let family_report = verify_fractal_family(&pres)?;
            let expanding = check_expanding_with_cap(&pres, cap)?;
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => {
                    serde_json::to_string_pretty(&serde_json::json!({
                        "family": family_report,
                        "expanding": expanding,
                    }))
                    .expect("serializable")
                        + "\n"
                }
                _ => {
                    let mut s = String::new();
                    for c in family_report.axioms.iter().chain(&expanding.clauses) {
                        let verdict = if c.pass { "pass" } else { "FAIL" };
                        match &c.witness {
                            Some(w) => s.push_str(&format!("{}: {verdict} ({w})\n", c.axiom)),
                            None => s.push_str(&format!("{}: {verdict}\n", c.axiom)),
                        }
                    }
                    s
                }
            };
            write_out(out.as_ref(), &text)?;
            if !family_report.all_pass() || !expanding.all_pass() {
                let first = family_report
                    .axioms
                    .iter()
                    .chain(&expanding.clauses)
                    .find(|c| !c.pass)
                    .expect("some check failed");
                return Err(Failure::CheckFailed(format!("axiom {}", first.axiom)));
            }
            Ok(())
        }
        TopologyCmd::Coproduct { spaces, format, out } => {
            let tagged: TaggedSpace = read_json(&spaces)?;
            let cap = cap_override(topex_core::DEFAULT_COPRODUCT_CAP)?;
            let cop = coproduct_with_cap(&tagged, cap)?;
            let opens: Vec<BTreeMap<&String, Vec<String>>> = cop
                .opens()
                .iter()
                .map(|components| {
                    cop.tags()
                        .iter()
                        .zip(cop.constituents())
                        .zip(components)
                        .map(|((tag, space), &mask)| (tag, space.names_of(mask).into_iter().collect()))
                        .collect()
                })
                .collect();
            let value = serde_json::json!({
                "tags": cop.tags(),
                "point_count": cop.point_count(),
                "open_count": opens.len(),
                "opens": opens,
            });
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => serde_json::to_string_pretty(&value).expect("serializable") + "\n",
                _ => return Err(Failure::Invalid("coproduct supports json output only".to_string())),
            };
            write_out(out.as_ref(), &text)
        }
    }
}

// ---- mean ------------------------------------------------------------------

fn parse_xs(text: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::Invalid(format!("xs: expected \"start:end:step\", got {text:?}")));
    }
    let nums = parse_floats(&parts.join(","), "xs")?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0 && end >= start) {
        return Err(Failure::Invalid(format!("xs: empty or backwards range {text:?}")));
    }
    let mut xs = Vec::new();
    let count = ((end - start) / step).round() as usize;
    for i in 0..=count {
        let x = start + i as f64 * step;
        if x <= end + step * 1e-9 {
            xs.push(x);
        }
    }
    Ok(xs)
}

enum Generator {
    Identity,
    Weierstrass(WeierstrassParams),
}

fn parse_generator(text: &str) -> Result<Generator, Failure> {
    if text == "identity" {
        return Ok(Generator::Identity);
    }
    if let Some(rest) = text.strip_prefix("weierstrass:") {
        let nums = parse_floats(rest, "f")?;
        if nums.len() != 3 {
            return Err(Failure::Invalid(format!("f: weierstrass needs amp,freq,terms, got {rest:?}")));
        }
        let params = WeierstrassParams::new(nums[0], nums[1] as u32, nums[2] as u32)?;
        if !params.is_rough() {
            eprintln!("warning: amp*freq = {} stays below the roughness threshold", nums[0] * nums[1]);
        }
        return Ok(Generator::Weierstrass(params));
    }
    Err(Failure::Invalid(format!("f: expected \"identity\" or \"weierstrass:amp,freq,terms\", got {text:?}")))
}

fn run_mean(args: MeanArgs, config: &Config) -> RunResult {
    let signs: SignString = require(args.signs.or_else(|| cfg_str(config, "signs")), "signs")?
        .parse()
        .map_err(|e: topex_core::Error| Failure::Invalid(e.to_string()))?;
    let deltas_raw = require(args.deltas.or_else(|| cfg_str(config, "deltas")), "deltas")?;
    let deltas = DeltaSchedule::new(parse_floats(&deltas_raw, "deltas")?)?;
    let gen_raw = args
        .function
        .or_else(|| cfg_str(config, "f"))
        .unwrap_or_else(|| "weierstrass:0.5,13,30".to_string());
    let generator = parse_generator(&gen_raw)?;
    let domain_raw = args.domain.or_else(|| cfg_str(config, "domain")).unwrap_or_else(|| "0,1".to_string());
    let domain_nums = parse_floats(&domain_raw, "domain")?;
    if domain_nums.len() != 2 {
        return Err(Failure::Invalid(format!("domain: expected \"lo,hi\", got {domain_raw:?}")));
    }
    let domain = Interval::new(domain_nums[0], domain_nums[1])?;
    let cells = args.cells.or_else(|| cfg_usize(config, "cells")).unwrap_or(DEFAULT_CELLS);
    let f = match &generator {
        Generator::Identity => SampledFunction::sample(|t| t, domain, cells)?,
        Generator::Weierstrass(p) => {
            let p = *p;
            SampledFunction::sample(move |t| p.eval(t), domain, cells)?
        }
    };
    let range = valid_range(&f, &signs, &deltas)?;
    let xs = match args.xs.or_else(|| cfg_str(config, "xs")) {
        Some(text) => parse_xs(&text)?,
        None => {
            // Default sweep: eight points across the valid range.
            (1..=8).map(|i| range.lo() + i as f64 * range.length() / 9.0).collect()
        }
    };
    for &x in &xs {
        if x < range.lo() || x > range.hi() {
            return Err(Failure::Invalid(format!(
                "xs: {x} outside the valid range [{}, {}]",
                range.lo(),
                range.hi()
            )));
        }
    }

    if args.check_derivative {
        let (d0, s0) = (deltas.deltas()[0], signs.signs()[0]);
        let mut text = String::from("x,numeric,analytic,rel_err\n");
        let mut worst: f64 = 0.0;
        for &x in &xs {
            // Snap to the grid: the stencil is exact at node-aligned probes.
            let k = ((x - f.domain().lo()) / f.step()).round();
            let x = f.domain().lo() + k * f.step();
            let (num, ana) = mean_derivative_check(&f, x, d0, s0)?;
            let rel = (num - ana).abs() / ana.abs().max(1.0);
            worst = worst.max(rel);
            text.push_str(&format!("{x},{num},{ana},{rel:e}\n"));
        }
        write_out(args.out.as_ref(), &text)?;
        if worst > DERIVATIVE_REL_TOL {
            return Err(Failure::CheckFailed(format!("derivative identity off by {worst:e}")));
        }
        return Ok(());
    }

    if args.check_l1 {
        let last = *deltas.deltas().last().expect("non-empty");
        let seq: Vec<f64> = (3..=10).map(|k| 0.5f64.powi(k)).filter(|&d| d < last).collect();
        if seq.len() < 2 {
            return Err(Failure::Invalid(format!("deltas: final window {last} leaves no room for the 2^-3..2^-10 sweep")));
        }
        let x = range.lo() + range.length() * 0.5;
        let sigma = signs.last_sign();
        let rows = lemma_l1_convergence(&f, x, &signs, &deltas, sigma, &seq)?;
        let mut text = String::from("delta_next,abs_error\n");
        for row in &rows {
            text.push_str(&format!("{},{:e}\n", row.delta_next, row.abs_error));
        }
        write_out(args.out.as_ref(), &text)?;
        let decreasing = rows.windows(2).all(|w| w[1].abs_error < w[0].abs_error);
        if !decreasing {
            return Err(Failure::CheckFailed("identification error is not strictly decreasing".to_string()));
        }
        return Ok(());
    }

    let format = args.format.unwrap_or(Format::Csv);
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        rows.push((x, iterated_mean(&f, x, &signs, &deltas)?));
    }
    let text = match format {
        Format::Csv | Format::Text => {
            let mut s = String::from("x,F(x),err_bound\n");
            for (x, v) in &rows {
                s.push_str(&format!("{x},{},{:e}\n", v.value, v.err_bound));
            }
            s
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|(x, v)| serde_json::json!({"x": x, "value": v.value, "err_bound": v.err_bound}))
                .collect();
            serde_json::to_string_pretty(&items).expect("serializable") + "\n"
        }
        Format::Dot => return Err(Failure::Invalid("mean has no dot format".to_string())),
    };
    write_out(args.out.as_ref(), &text)
}

// ---- dimension -------------------------------------------------------------

fn run_dimension(args: DimensionArgs, config: &Config) -> RunResult {
    let tree: ExpansionTree = read_json(&args.tree)?;
    let step = require(args.step.or_else(|| cfg_usize(config, "step")), "step")?;
    let resolution = args.resolution.or_else(|| cfg_usize(config, "resolution")).unwrap_or(1024);
    let result = if tree.base().dim() == 1 {
        // 1-d trees are still measurable; the 2-d entry point rejects them.
        let boxes: Vec<OpenBox> = tree
            .level(step)
            .map(|(_, b)| b.clone())
            .collect();
        let grid = rasterize_union(&boxes, resolution)?;
        box_count(&grid, &DEFAULT_SCALES)?
    } else {
        stretched_union_dimension(&tree, step, resolution)?
    };
    let text = match args.format.unwrap_or(Format::Csv) {
        Format::Csv | Format::Text => {
            let mut s = String::from("scale,count\n");
            for (scale, count) in result.scales.iter().zip(&result.counts) {
                s.push_str(&format!("{scale},{count}\n"));
            }
            s.push_str("slope,r2\n");
            s.push_str(&format!("{},{}\n", result.slope, result.r2));
            s
        }
        Format::Json => serde_json::to_string_pretty(&result).expect("serializable") + "\n",
        Format::Dot => return Err(Failure::Invalid("dimension has no dot format".to_string())),
    };
    write_out(args.out.as_ref(), &text)
}

// ---- diagram ---------------------------------------------------------------

fn chart_dot(max_step: usize) -> Result<String, Failure> {
    let mut s = String::from("digraph charts {\n  rankdir=TB;\n  root [label=\"X\"];\n");
    let mut all = Vec::new();
    for n in 0..=max_step {
        all.extend(enumerate_lambda_with_cap(n, topex_core::DEFAULT_STEP_CAP)?);
    }
    for j in &all {
        let chart = chart_index(j);
        let mark = if chart.primed { "'" } else { "" };
        s.push_str(&format!("  \"{j}\" [label=\"X{mark}_{}\"];\n", chart.k));
    }
    for j in &all {
        let chart = chart_index(j);
        let label = if chart.primed {
            format!("T_{}*phi_{}", chart.k, chart.k)
        } else {
            format!("phi_{}", chart.k)
        };
        let source = if j.step() == 0 {
            "root".to_string()
        } else {
            format!("\"{}\"", parent(j).expect("step > 0"))
        };
        s.push_str(&format!("  {source} -> \"{j}\" [label=\"{label}\"];\n"));
    }
    s.push_str("}\n");
    Ok(s)
}

fn run_diagram(args: DiagramArgs) -> RunResult {
    let text = match (args.tree, args.chart_step) {
        (Some(path), None) => {
            let tree: ExpansionTree = read_json(&path)?;
            tree_dot(&tree)
        }
        (None, Some(step)) => chart_dot(step)?,
        _ => return Err(Failure::Invalid("diagram needs exactly one of --tree or --chart-step".to_string())),
    };
    write_out(args.out.as_ref(), &text)
}
