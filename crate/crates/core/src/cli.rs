//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid arguments or
//! parameters, 3 a gap certificate exceeded its claimed bound.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::achievable::{all_achievable, best_achievable};
use crate::bounds::bound_report;
use crate::error::Error;
use crate::lattice_sim::{
    coverage_experiment, run_lattice_sim, sw_rate_check, CoverageConfig, SimConfig, SimGains,
};
use crate::lattice_sim::coverage::{distortion_for_information, DEFAULT_EPSILON, DEFAULT_MUTUAL_INFORMATION};
use crate::model::{make_preset, Capacity, ScenarioCase};
use crate::output::{
    fmt_f64, fmt_opt, manifest_path, svg_lines, svg_region, OutputFormat, RunManifest, Series, Table,
};
use crate::scaling::{
    case_scaling, certify_gaps, decade_grid, required_region_case_c, sweep_sum_capacity, Coupling,
    GapCertificate, GapRegime, PrelogMethod, SplitMode,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RELAY_SCALING_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "relay-scaling", version, about = "Bounds, lattice rates and simulations for two-relay reception with an interferer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Outer bounds and every applicable achievable rate at one operating point.
    Bounds(BoundsArgs),
    /// Best rate versus total link capacity.
    Sweep(SweepArgs),
    /// Link capacities required for a target rate (case C).
    Region(RegionArgs),
    /// Certify the bound-to-achievable gap over a power grid.
    Gaps(GapsArgs),
    /// Estimate pre-log factors with coupled link capacities.
    Scaling(ScalingArgs),
    /// Monte Carlo run of the scalar lattice scheme.
    Simulate(SimulateArgs),
    /// Random-codebook covering experiment.
    Cover(CoverArgs),
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// csv, json or svg.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Output file; defaults to $RELAY_SCALING_OUT_DIR/<command>.<ext>, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    case: ScenarioCase,
    #[arg(long, allow_hyphen_values = true)]
    px: f64,
    #[arg(long, allow_hyphen_values = true)]
    pj: f64,
    #[arg(long, allow_hyphen_values = true)]
    c1: Option<Capacity>,
    #[arg(long, allow_hyphen_values = true)]
    c2: Option<Capacity>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    case: ScenarioCase,
    #[arg(long, allow_hyphen_values = true)]
    px: f64,
    #[arg(long, allow_hyphen_values = true)]
    pj: f64,
    /// start:end[:step] of C1 + C2 in bits.
    #[arg(long, default_value = "0:40:0.25", allow_hyphen_values = true)]
    sum: RangeSpec,
    /// optimal or equal.
    #[arg(long, default_value = "optimal")]
    split: SplitMode,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RegionArgs {
    /// Target rate in bits.
    #[arg(long, allow_hyphen_values = true)]
    rate: f64,
    #[arg(long, allow_hyphen_values = true)]
    px: f64,
    #[arg(long, allow_hyphen_values = true)]
    pj: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct GapsArgs {
    #[arg(long)]
    case: ScenarioCase,
    /// `default` (10^1..10^9, five points per decade) or lo:hi:per_decade in decades.
    #[arg(long, default_value = "default")]
    grid: GridSpec,
    /// Emit every grid point instead of one summary row per regime.
    #[arg(long)]
    detail: bool,
    /// Certify against this gap in bits instead of each regime's own bound.
    #[arg(long)]
    bound: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long)]
    case: ScenarioCase,
    /// pj=px, pj=px^k or pj=<fixed power>.
    #[arg(long, default_value = "pj=px")]
    coupling: Coupling,
    /// start:end[:step] of log2(P_X).
    #[arg(long, default_value = "10:40")]
    exponents: RangeSpec,
    /// Multiplies the prescribed link capacities.
    #[arg(long, default_value_t = 1.0)]
    factor: f64,
    /// finite-difference or ratio.
    #[arg(long, default_value = "finite-difference")]
    method: PrelogMethod,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// a, b or c; overridden by --gain-a/--gain-b.
    #[arg(long, default_value = "b")]
    case: ScenarioCase,
    #[arg(long, allow_hyphen_values = true, requires = "gain_b")]
    gain_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "gain_a")]
    gain_b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    px: f64,
    #[arg(long, allow_hyphen_values = true)]
    pj: f64,
    #[arg(long, allow_hyphen_values = true)]
    pn1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pn2: Option<f64>,
    #[arg(long, default_value = "inf", allow_hyphen_values = true)]
    c1: Capacity,
    #[arg(long, default_value = "inf", allow_hyphen_values = true)]
    c2: Capacity,
    #[arg(long, default_value = "1000000", value_parser = parse_count)]
    samples: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// gaussian, uniform or bpsk.
    #[arg(long, default_value = "gaussian")]
    interferer: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Codebook rate in bits; defaults to I(Y;U) + --rate-offset.
    #[arg(long, allow_hyphen_values = true)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 0.25, allow_hyphen_values = true)]
    rate_offset: f64,
    #[arg(long, default_value_t = 1.0)]
    source_variance: f64,
    /// Test-channel distortion; defaults to the value giving --information bits.
    #[arg(long)]
    distortion: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MUTUAL_INFORMATION)]
    information: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value = "500", value_parser = parse_count)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("'{s}' is not a nonnegative integer")),
    }
}

/// Inclusive arithmetic range `start:end[:step]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl RangeSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.start > self.end {
            return Vec::new();
        }
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl FromStr for RangeSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Invalid(format!("range '{s}' must be start:end or start:end:step"));
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let (start, end, step) = match parts[..] {
            [a, b] => (a, b, 1.0),
            [a, b, c] => (a, b, c),
            _ => return Err(bad()),
        };
        if !(step > 0.0) || !start.is_finite() || !end.is_finite() || !step.is_finite() {
            return Err(bad());
        }
        Ok(RangeSpec { start, end, step })
    }
}

/// Decade grid `10^lo .. 10^hi` with a fixed number of points per decade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: i32,
    pub hi: i32,
    pub per_decade: u32,
}

impl GridSpec {
    pub const DEFAULT: GridSpec = GridSpec {
        lo: 1,
        hi: 9,
        per_decade: 5,
    };
}

impl FromStr for GridSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "default" {
            return Ok(GridSpec::DEFAULT);
        }
        let bad = || Error::Invalid(format!("grid '{s}' must be 'default' or lo:hi:per_decade"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].parse().map_err(|_| bad())?;
        let hi = parts[1].parse().map_err(|_| bad())?;
        let per_decade = parts[2].parse().map_err(|_| bad())?;
        if hi < lo || per_decade == 0 {
            return Err(bad());
        }
        Ok(GridSpec { lo, hi, per_decade })
    }
}

enum CliError {
    Usage(String),
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite(_) => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

/// Rendered result of a command in every format it supports.
struct Emission {
    table: Table,
    json: Value,
    svg: Option<String>,
}

struct Outcome {
    emission: Emission,
    manifest: RunManifest,
    violation: Option<String>,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let (name, output) = command_output(&cli.command);
    let result = execute(&cli.command).and_then(|outcome| {
        write_outcome(name, output, outcome, stdout, stderr)
    });
    match result {
        Ok(None) => EXIT_OK,
        Ok(Some(violation)) => {
            let _ = writeln!(stderr, "certificate violated: {violation}");
            EXIT_VIOLATION
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn command_output(cmd: &Command) -> (&'static str, &OutputArgs) {
    match cmd {
        Command::Bounds(a) => ("bounds", &a.output),
        Command::Sweep(a) => ("sweep", &a.output),
        Command::Region(a) => ("region", &a.output),
        Command::Gaps(a) => ("gaps", &a.output),
        Command::Scaling(a) => ("scaling", &a.output),
        Command::Simulate(a) => ("simulate", &a.output),
        Command::Cover(a) => ("cover", &a.output),
    }
}

fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Region(a) => cmd_region(a),
        Command::Gaps(a) => cmd_gaps(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Cover(a) => cmd_cover(a),
    }
}

fn write_outcome(
    name: &str,
    output: &OutputArgs,
    mut outcome: Outcome,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Option<String>, CliError> {
    let path = output.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{name}.{}", output.format.extension())))
    });
    if let Some(p) = &path {
        outcome.manifest.outputs.push(p.display().to_string());
    }
    let body = match output.format {
        OutputFormat::Csv => outcome.emission.table.to_csv()?,
        OutputFormat::Json => {
            let doc = json!({ "manifest": outcome.manifest, "result": outcome.emission.json });
            to_json(&doc)?
        }
        OutputFormat::Svg => outcome
            .emission
            .svg
            .take()
            .ok_or_else(|| CliError::Usage(format!("{name} has no svg output")))?,
    };
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&p, body)?;
            std::fs::write(manifest_path(&p), to_json(&outcome.manifest)?)?;
            writeln!(stderr, "wrote {}", p.display())?;
        }
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(outcome.violation)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Failure(e.to_string()))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    // only plain data structures reach here; non-finite floats become null
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn cap_str(c: Option<Capacity>) -> Value {
    c.map_or(Value::Null, |c| Value::String(c.to_string()))
}

fn preset(case: ScenarioCase, px: f64, pj: f64, c1: Option<Capacity>, c2: Option<Capacity>) -> Result<crate::model::ChannelConfig, Error> {
    make_preset(case, px, pj, c1, c2)
}

fn cmd_bounds(a: &BoundsArgs) -> Result<Outcome, CliError> {
    let cfg = preset(a.case, a.px, a.pj, a.c1, a.c2)?;
    let bounds = bound_report(&cfg)?;
    let rates = all_achievable(&cfg)?;
    let best = best_achievable(&cfg)?;
    let mut table = Table::new("bounds/v1", &["quantity", "label", "value"]);
    for t in &bounds.terms {
        table.push(vec!["cutset_term".into(), t.label.clone(), fmt_f64(t.value)]);
    }
    table.push(vec!["cutset".into(), String::new(), fmt_f64(bounds.cutset_min)]);
    if let Some(m) = bounds.modulo_bound {
        table.push(vec!["modulo".into(), String::new(), fmt_f64(m)]);
    }
    table.push(vec!["outer_bound".into(), String::new(), fmt_f64(bounds.binding)]);
    for r in &rates {
        table.push(vec!["achievable".into(), r.scheme.to_string(), fmt_f64(r.rate)]);
    }
    table.push(vec!["best".into(), best.scheme.to_string(), fmt_f64(best.rate)]);
    let params = json!({
        "case": a.case.short_name(), "px": a.px, "pj": a.pj,
        "c1": cap_str(a.c1), "c2": cap_str(a.c2),
    });
    Ok(Outcome {
        emission: Emission {
            table,
            json: json!({ "bounds": bounds, "achievable": rates, "best": best }),
            svg: None,
        },
        manifest: RunManifest::new("bounds", params, None),
        violation: None,
    })
}

fn cmd_sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    let sums = a.sum.values();
    let rows = sweep_sum_capacity(a.case, a.px, a.pj, &sums, a.split)?;
    let mut table = Table::new(
        "sweep/v1",
        &["sum_capacity", "c1", "c2", "best_rate", "winning_scheme", "cutset", "modulo"],
    );
    for r in &rows {
        table.push(vec![
            fmt_f64(r.sum_capacity),
            fmt_f64(r.c1),
            fmt_f64(r.c2),
            fmt_f64(r.best_rate),
            r.winning_scheme.to_string(),
            fmt_f64(r.cutset),
            fmt_opt(r.modulo),
        ]);
    }
    let curve = |f: &dyn Fn(&crate::scaling::SweepRow) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter().filter_map(|r| f(r).map(|y| (r.sum_capacity, y))).collect()
    };
    let mut series = vec![
        Series { name: "best rate".into(), points: curve(&|r| Some(r.best_rate)) },
        Series { name: "cut-set".into(), points: curve(&|r| Some(r.cutset)) },
    ];
    if a.case == ScenarioCase::CaseC {
        series.push(Series { name: "modulo".into(), points: curve(&|r| r.modulo) });
    }
    let title = format!("{} rate versus C1 + C2", a.case);
    let params = json!({
        "case": a.case.short_name(), "px": a.px, "pj": a.pj,
        "sum": [a.sum.start, a.sum.end, a.sum.step], "split": format!("{:?}", a.split).to_lowercase(),
    });
    Ok(Outcome {
        emission: Emission {
            table,
            json: to_value(&rows),
            svg: Some(svg_lines(&title, "C1 + C2 (bits)", "rate (bits)", &series)),
        },
        manifest: RunManifest::new("sweep", params, None),
        violation: None,
    })
}

fn cmd_region(a: &RegionArgs) -> Result<Outcome, CliError> {
    let region = required_region_case_c(a.rate, a.px, a.pj)?;
    let mut table = Table::new("region/v1", &["kind", "label", "c1", "c2", "rhs"]);
    let n = region.vertices.len();
    for (k, &(c1, c2)) in region.vertices.iter().enumerate() {
        table.push(vec!["vertex".into(), format!("P{}", n - k), fmt_f64(c1), fmt_f64(c2), String::new()]);
    }
    for h in &region.constraints {
        table.push(vec![
            "constraint".into(),
            h.label.clone(),
            fmt_f64(h.c1_weight),
            fmt_f64(h.c2_weight),
            fmt_f64(h.rhs),
        ]);
    }
    let title = format!("link capacities for rate {}", fmt_f64(a.rate));
    let params = json!({ "rate": a.rate, "px": a.px, "pj": a.pj });
    Ok(Outcome {
        emission: Emission {
            table,
            svg: Some(svg_region(&title, &region.vertices)),
            json: to_value(&region),
        },
        manifest: RunManifest::new("region", params, None),
        violation: None,
    })
}

fn regime_name(r: GapRegime) -> &'static str {
    match r {
        GapRegime::CaseAStrongInterferer => "a-strong-interferer",
        GapRegime::CaseAWeakInterferer => "a-weak-interferer",
        GapRegime::CaseB => "b",
        GapRegime::CaseCModulo => "c-modulo",
        GapRegime::CaseCCutset => "c-cutset",
    }
}

fn cmd_gaps(a: &GapsArgs) -> Result<Outcome, CliError> {
    let grid = decade_grid(a.grid.lo, a.grid.hi, a.grid.per_decade);
    let mut certs: Vec<GapCertificate> = certify_gaps(a.case, &grid)?;
    if let Some(b) = a.bound {
        if !b.is_finite() {
            return Err(CliError::Usage(format!("--bound {b} must be finite")));
        }
        for c in &mut certs {
            c.claimed_bound = b;
            c.holds = c.max_gap <= b;
        }
    }
    let table = if a.detail {
        let mut t = Table::new("gaps-points/v1", &["case", "regime", "p_x", "p_j", "gap"]);
        for c in &certs {
            for p in &c.points {
                t.push(vec![
                    a.case.short_name().into(),
                    regime_name(c.regime).into(),
                    fmt_f64(p.p_x),
                    fmt_f64(p.p_j),
                    fmt_f64(p.gap),
                ]);
            }
        }
        t
    } else {
        let mut t = Table::new(
            "gaps/v1",
            &["case", "regime", "bound_used", "points", "max_gap", "claimed_bound", "holds"],
        );
        for c in &certs {
            t.push(vec![
                a.case.short_name().into(),
                regime_name(c.regime).into(),
                c.bound_used.clone(),
                c.points.len().to_string(),
                fmt_f64(c.max_gap),
                fmt_f64(c.claimed_bound),
                c.holds.to_string(),
            ]);
        }
        t
    };
    let violation = certs
        .iter()
        .filter(|c| !c.holds)
        .map(|c| format!("{} max gap {} > {}", regime_name(c.regime), c.max_gap, c.claimed_bound))
        .reduce(|x, y| x + "; " + &y);
    let params = json!({
        "case": a.case.short_name(),
        "grid": { "lo": a.grid.lo, "hi": a.grid.hi, "per_decade": a.grid.per_decade },
        "detail": a.detail,
        "bound": a.bound,
    });
    Ok(Outcome {
        emission: Emission {
            table,
            json: to_value(&certs),
            svg: None,
        },
        manifest: RunManifest::new("gaps", params, None),
        violation,
    })
}

fn cmd_scaling(a: &ScalingArgs) -> Result<Outcome, CliError> {
    let exponents = a.exponents.values();
    let s = case_scaling(a.case, a.coupling, a.factor, &exponents, a.method)?;
    let mut table = Table::new("scaling/v1", &["kind", "log2_px", "achievable", "outer_bound"]);
    for (k, e) in s.achievable.exponent_grid.iter().enumerate() {
        table.push(vec![
            "sample".into(),
            fmt_f64(*e),
            fmt_f64(s.achievable.rate_samples[k]),
            fmt_f64(s.outer_bound.rate_samples[k]),
        ]);
    }
    table.push(vec![
        "prelog".into(),
        String::new(),
        fmt_f64(s.achievable.prelog),
        fmt_f64(s.outer_bound.prelog),
    ]);
    let zip = |v: &[f64]| -> Vec<(f64, f64)> { exponents.iter().copied().zip(v.iter().copied()).collect() };
    let series = [
        Series { name: "achievable".into(), points: zip(&s.achievable.rate_samples) },
        Series { name: "outer bound".into(), points: zip(&s.outer_bound.rate_samples) },
    ];
    let params = json!({
        "case": a.case.short_name(), "coupling": a.coupling.to_string(),
        "exponents": [a.exponents.start, a.exponents.end, a.exponents.step],
        "factor": a.factor, "method": format!("{:?}", a.method),
    });
    Ok(Outcome {
        emission: Emission {
            table,
            json: to_value(&s),
            svg: Some(svg_lines(&format!("{} scaling", a.case), "log2 P_X", "rate (bits)", &series)),
        },
        manifest: RunManifest::new("scaling", params, None),
        violation: None,
    })
}

fn fresh_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let seed = fresh_seed(a.seed);
    let gains = match (a.gain_a, a.gain_b) {
        (Some(ga), Some(gb)) => SimGains::General { a: ga, b: gb },
        _ => SimGains::from_case(a.case)?,
    };
    let mut cfg = SimConfig::new(gains, a.px, a.pj, a.c1, a.c2, a.samples, seed);
    if let Some(p) = a.pn1 {
        cfg.p_n1 = p;
    }
    if let Some(p) = a.pn2 {
        cfg.p_n2 = p;
    }
    cfg.alpha_override = a.alpha;
    cfg.interferer = a.interferer.clone();
    let stats = run_lattice_sim(&cfg)?;
    let sw = if gains == SimGains::CaseC {
        Some(sw_rate_check(&cfg)?)
    } else {
        None
    };

    let mut table = Table::new("simulate/v1", &["field", "value"]);
    let mut put = |k: &str, v: String| table.push(vec![k.to_string(), v]);
    put("empirical_var_neq", fmt_f64(stats.empirical_var_neq));
    put("analytic_var_neq", fmt_f64(stats.analytic_var_neq));
    put("var_ratio", fmt_f64(stats.empirical_var_neq / stats.analytic_var_neq));
    put("identity_max_residual", fmt_f64(stats.identity_max_residual));
    put("cell_size", fmt_f64(stats.cell_size));
    put("dither_uniformity_pvalue", fmt_f64(stats.dither_uniformity_pvalue));
    put("x_v_correlation", fmt_opt(stats.x_v_correlation));
    put("rate_estimate", fmt_f64(stats.rate_estimate));
    put("analytic_rate", fmt_f64(stats.analytic_rate));
    put("alpha", fmt_f64(stats.alpha));
    put("p_d1", fmt_f64(stats.p_d1));
    put("p_d2", fmt_f64(stats.p_d2));
    put("samples", stats.samples.to_string());
    put("seed", stats.seed.to_string());
    put("interferer", stats.interferer.clone());
    if let Some(sw) = &sw {
        put("sw_required_rate", fmt_f64(sw.required_rate));
        put("sw_satisfied", sw.satisfied.to_string());
    }
    Ok(Outcome {
        emission: Emission {
            table,
            json: json!({ "stats": stats, "sw_check": sw }),
            svg: None,
        },
        manifest: RunManifest::new("simulate", to_value(&cfg), Some(seed)),
        violation: None,
    })
}

fn cmd_cover(a: &CoverArgs) -> Result<Outcome, CliError> {
    let seed = fresh_seed(a.seed);
    let distortion = a
        .distortion
        .unwrap_or_else(|| distortion_for_information(a.source_variance, a.information));
    let mut cfg = CoverageConfig {
        block_length: a.n,
        codebook_rate: 0.0,
        source_variance: a.source_variance,
        test_channel_distortion: distortion,
        typicality_epsilon: a.epsilon,
        trials: a.trials as usize,
        seed,
    };
    cfg.codebook_rate = a.rate.unwrap_or_else(|| (cfg.mutual_information() + a.rate_offset).max(0.0));
    let report = coverage_experiment(&cfg)?;
    let mut table = Table::new("cover/v1", &["field", "value"]);
    let mut put = |k: &str, v: String| table.push(vec![k.to_string(), v]);
    put("coverage", fmt_f64(report.coverage));
    put("covered", report.covered.to_string());
    put("trials", report.trials.to_string());
    put("codebook_rate", fmt_f64(cfg.codebook_rate));
    put("codebook_size", report.codebook_size.to_string());
    put("mutual_information", fmt_f64(report.mutual_information));
    put("source_typical_fraction", fmt_f64(report.source_typical_fraction));
    put("coverage_floor", fmt_f64(report.coverage_floor));
    put("seed", seed.to_string());
    Ok(Outcome {
        emission: Emission {
            table,
            json: json!({ "config": cfg, "report": report }),
            svg: None,
        },
        manifest: RunManifest::new("cover", to_value(&cfg), Some(seed)),
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("relay-scaling").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn range_spec() {
        let r: RangeSpec = "0:1:0.25".parse().unwrap();
        assert_eq!(r.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!("10:12".parse::<RangeSpec>().unwrap().values(), vec![10.0, 11.0, 12.0]);
        assert!("5:1".parse::<RangeSpec>().unwrap().values().is_empty());
        assert!("1:2:0".parse::<RangeSpec>().is_err());
        assert!("1".parse::<RangeSpec>().is_err());
    }

    #[test]
    fn grid_spec() {
        assert_eq!("default".parse::<GridSpec>().unwrap(), GridSpec::DEFAULT);
        assert_eq!("2:4:3".parse::<GridSpec>().unwrap(), GridSpec { lo: 2, hi: 4, per_decade: 3 });
        assert!("4:2:3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn count_accepts_scientific_notation() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("42"), Ok(42));
        assert!(parse_count("1.5").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_capture(&["bounds", "--case", "a", "--px", "-1", "--pj", "15", "--c2", "1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bounds", "--case", "z", "--px", "1", "--pj", "1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bounds", "--case", "a", "--px", "15", "--pj", "15", "--c2", "1", "--format", "svg"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }
}
