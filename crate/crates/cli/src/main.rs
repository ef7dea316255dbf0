//! `fdsc`: experiment runner for full-diversity space codes.
//!
//! Every subcommand can be driven by flags, by a flat TOML file passed with
//! `--config`, or both; flags override file values. Results go to stdout or
//! `--output` as UTF-8 CSV with LF line endings.
//!
//! Exit codes: 0 success, 2 invalid input, 3 property violation (`farey
//! --mode verify`), 1 for I/O failures.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fdsc_core::analysis::full_diversity_check;
use fdsc_core::constellation::error_set;
use fdsc_core::experiment::{
    bound_rows, figure_preset, BoundScenario, Command, CurveResult, CurveSpec, ExperimentSpec, FadingConvention,
    Scenario, Scheme,
};
use fdsc_core::farey::{breakpoints, breakpoints_of_order, farey, neighbor_properties, successive_properties};
use fdsc_core::optimizer::{closed_form_fdsc, grid_search_fdsc, DesignSolution};
use fdsc_core::simulator::{BitLabeling, DEFAULT_MIN_ERRORS};

const THREADS_ENV: &str = "OWC_FDSC_THREADS";

#[derive(Parser, Debug)]
#[command(name = "fdsc", version, about = "Full-diversity space code design and simulation")]
struct Cli {
    /// Flat TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Farey sequences and optimizer breakpoints.
    Farey(FareyArgs),
    /// Closed-form optimal 2x2 code, optionally checked by grid search.
    Design(DesignArgs),
    /// Error-probability bounds next to exact or simulated references.
    Bounds(BoundsArgs),
    /// BER simulation of FDSC and spatial multiplexing.
    Simulate(SimulateArgs),
    /// BER curves of a figure preset.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FareyMode {
    Sequence,
    Breakpoints,
    Verify,
}

#[derive(Args, Debug)]
struct FareyArgs {
    /// Order of the sequence.
    #[arg(long, conflicts_with = "p")]
    k: Option<u64>,
    /// PAM bits; selects order 2^p - 1.
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<FareyMode>,
}

#[derive(Args, Debug)]
struct DesignArgs {
    #[arg(long)]
    p: Option<u64>,
    /// Grid step of the search oracle, `1/K` or a decimal.
    #[arg(long)]
    oracle: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioKind {
    Siso,
    Mimo,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    scenario: Option<ScenarioKind>,
    /// Standard deviation of ln h.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    p_op: Option<f64>,
    /// SNR grid in dB: `a,b,c` or `start:stop:step`.
    #[arg(long)]
    rho_db: Option<String>,
    /// Monte Carlo samples per point (MIMO).
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed of the Monte Carlo streams.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LabelingArg {
    Natural,
    Gray,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConventionArg {
    LogAmplitude,
    LogIntensity,
}

#[derive(Args, Debug)]
struct SimOverrides {
    /// Trial cap per SNR point.
    #[arg(long)]
    max_trials: Option<u64>,
    /// Stop a point once this many bit errors are seen (at least 50).
    #[arg(long)]
    min_errors: Option<u64>,
    /// Base seed; results do not depend on the thread count.
    #[arg(long)]
    seed: Option<u64>,
    /// How `sigma2` maps to the spread of ln h.
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    /// Bit-to-level mapping of the PAM symbols.
    #[arg(long, value_enum)]
    labeling: Option<LabelingArg>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Comma-separated schemes: fdsc, sm.
    #[arg(long)]
    scheme: Option<String>,
    /// Comma-separated fading parameters.
    #[arg(long)]
    sigma2: Option<String>,
    /// SNR grid in dB: `a,b,c` or `start:stop:step`.
    #[arg(long)]
    snr_db: Option<String>,
    /// Bits per PAM symbol.
    #[arg(long)]
    bits: Option<u64>,
    #[command(flatten)]
    sim: SimOverrides,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    #[arg(long)]
    figure: Option<u64>,
    #[command(flatten)]
    sim: SimOverrides,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Invalid(anyhow::Error),
    Violation(String),
    Io(anyhow::Error),
}

impl From<fdsc_core::Error> for Failure {
    fn from(e: fdsc_core::Error) -> Self {
        Failure::Invalid(e.into())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn invalid(e: anyhow::Error) -> Failure {
    Failure::Invalid(e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("property violation: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Outcome<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| invalid(anyhow!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Io(e.into()))
}

fn run(cli: Cli) -> Outcome<()> {
    configure_threads()?;
    let file_spec = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Io)?;
            Some(ExperimentSpec::from_toml_str(&text).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let command = match (&cli.command, &file_spec) {
        (Some(cmd), _) => command_of(cmd),
        (None, Some(spec)) => spec.command,
        (None, None) => return Err(invalid(anyhow!("no subcommand given and no --config file"))),
    };
    let mut spec = match file_spec {
        Some(spec) if spec.command != command => {
            return Err(invalid(anyhow!(
                "config is for `{:?}` but the subcommand is `{:?}`",
                spec.command,
                command
            )))
        }
        Some(spec) => spec,
        None => ExperimentSpec::new(command),
    };
    if let Some(cmd) = &cli.command {
        apply_flags(cmd, &mut spec)?;
    }
    if let Some(out) = cli.output {
        spec.output_path = Some(out);
    }

    let mut text = String::new();
    let result = match command {
        Command::Farey => cmd_farey(&spec, &mut text),
        Command::Design => cmd_design(&spec, &mut text),
        Command::Bounds => cmd_bounds(&spec, &mut text),
        Command::Simulate => cmd_simulate(&spec, &mut text),
        Command::Reproduce => cmd_reproduce(&spec, &mut text),
    };
    // Verify mode reports before signalling the violation.
    if matches!(result, Ok(()) | Err(Failure::Violation(_))) {
        emit(&spec, &text)?;
    }
    result
}

fn emit(spec: &ExperimentSpec, text: &str) -> Outcome<()> {
    match &spec.output_path {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Io),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(e.into()))
        }
    }
}

fn command_of(cmd: &Cmd) -> Command {
    match cmd {
        Cmd::Farey(_) => Command::Farey,
        Cmd::Design(_) => Command::Design,
        Cmd::Bounds(_) => Command::Bounds,
        Cmd::Simulate(_) => Command::Simulate,
        Cmd::Reproduce(_) => Command::Reproduce,
    }
}

fn set_u64(spec: &mut ExperimentSpec, key: &str, v: Option<u64>) -> Outcome<()> {
    if let Some(v) = v {
        let v = i64::try_from(v).map_err(|_| invalid(anyhow!("`{key}` is too large")))?;
        spec.set(key, v);
    }
    Ok(())
}

fn set_f64(spec: &mut ExperimentSpec, key: &str, v: Option<f64>) {
    if let Some(v) = v {
        spec.set(key, v);
    }
}

fn set_str(spec: &mut ExperimentSpec, key: &str, v: Option<&str>) {
    if let Some(v) = v {
        spec.set(key, v);
    }
}

fn set_list(spec: &mut ExperimentSpec, key: &str, v: Option<&str>) -> Outcome<()> {
    if let Some(v) = v {
        spec.set(key, parse_grid(v).map_err(invalid)?);
    }
    Ok(())
}

fn apply_sim_overrides(spec: &mut ExperimentSpec, sim: &SimOverrides) -> Outcome<()> {
    set_u64(spec, "max_trials", sim.max_trials)?;
    set_u64(spec, "min_errors", sim.min_errors)?;
    set_u64(spec, "seed", sim.seed)?;
    set_str(
        spec,
        "convention",
        sim.convention.map(|c| match c {
            ConventionArg::LogAmplitude => "log_amplitude",
            ConventionArg::LogIntensity => "log_intensity",
        }),
    );
    set_str(
        spec,
        "labeling",
        sim.labeling.map(|l| match l {
            LabelingArg::Natural => "natural",
            LabelingArg::Gray => "gray",
        }),
    );
    Ok(())
}

fn apply_flags(cmd: &Cmd, spec: &mut ExperimentSpec) -> Outcome<()> {
    match cmd {
        Cmd::Farey(a) => {
            if a.k.is_some() {
                spec.parameters.remove("p");
            }
            if a.p.is_some() {
                spec.parameters.remove("k");
            }
            set_u64(spec, "k", a.k)?;
            set_u64(spec, "p", a.p)?;
            set_str(
                spec,
                "mode",
                a.mode.map(|m| match m {
                    FareyMode::Sequence => "sequence",
                    FareyMode::Breakpoints => "breakpoints",
                    FareyMode::Verify => "verify",
                }),
            );
        }
        Cmd::Design(a) => {
            set_u64(spec, "p", a.p)?;
            set_str(spec, "oracle", a.oracle.as_deref());
        }
        Cmd::Bounds(a) => {
            set_str(
                spec,
                "scenario",
                a.scenario.map(|s| match s {
                    ScenarioKind::Siso => "siso",
                    ScenarioKind::Mimo => "mimo",
                }),
            );
            set_f64(spec, "sigma", a.sigma);
            set_f64(spec, "p_op", a.p_op);
            set_list(spec, "rho_db", a.rho_db.as_deref())?;
            set_u64(spec, "trials", a.trials)?;
            set_u64(spec, "seed", a.seed)?;
        }
        Cmd::Simulate(a) => {
            if let Some(s) = &a.scheme {
                let items: Vec<toml::Value> = s.split(',').map(|x| x.trim().into()).collect();
                spec.set("scheme", items);
            }
            set_list(spec, "sigma2", a.sigma2.as_deref())?;
            set_list(spec, "snr_db", a.snr_db.as_deref())?;
            set_u64(spec, "bits", a.bits)?;
            apply_sim_overrides(spec, &a.sim)?;
        }
        Cmd::Reproduce(a) => {
            set_u64(spec, "figure", a.figure)?;
            apply_sim_overrides(spec, &a.sim)?;
        }
    }
    Ok(())
}

/// `a,b,c` or `start:stop:step` (inclusive of `stop`).
fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [list] => list
            .split(',')
            .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad number `{x}`")))
            .collect(),
        [a, b, c] => {
            let (lo, hi, step): (f64, f64, f64) = (a.trim().parse()?, b.trim().parse()?, c.trim().parse()?);
            if !(step > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
                bail!("range `{s}` needs start <= stop and a positive step");
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            if n > 100_000 {
                bail!("range `{s}` has too many points");
            }
            Ok((0..=n).map(|k| lo + step * k as f64).collect())
        }
        _ => bail!("grid `{s}` must be a comma list or start:stop:step"),
    }
}

fn req<T>(v: fdsc_core::Result<Option<T>>, key: &str) -> Outcome<T> {
    v?.ok_or_else(|| invalid(anyhow!("missing parameter `{key}`")))
}

fn opt<T>(v: fdsc_core::Result<Option<T>>, default: T) -> Outcome<T> {
    Ok(v?.unwrap_or(default))
}

fn str_list(spec: &ExperimentSpec, key: &str) -> Outcome<Option<Vec<String>>> {
    match spec.get(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s.split(',').map(|x| x.trim().to_string()).collect())),
        Some(toml::Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| invalid(anyhow!("`{key}` entries must be strings")))
            })
            .collect::<Outcome<_>>()
            .map(Some),
        Some(v) => Err(invalid(anyhow!("`{key}` must be a string or list, got {v}"))),
    }
}

fn small_u32(v: u64, key: &str) -> Outcome<u32> {
    u32::try_from(v).map_err(|_| invalid(anyhow!("`{key}` out of range")))
}

fn cmd_farey(spec: &ExperimentSpec, out: &mut String) -> Outcome<()> {
    let mode = opt(spec.get_str("mode"), "sequence")?;
    let k = match (spec.get_u64("k")?, spec.get_u64("p")?) {
        (Some(_), Some(_)) => return Err(invalid(anyhow!("give either k or p, not both"))),
        (Some(k), None) => k,
        (None, Some(p)) => {
            let p = small_u32(p, "p")?;
            if !(1..=fdsc_core::farey::MAX_PAM_BITS).contains(&p) {
                return Err(invalid(anyhow!("p must be in 1..={}", fdsc_core::farey::MAX_PAM_BITS)));
            }
            (1u64 << p) - 1
        }
        (None, None) => return Err(invalid(anyhow!("missing parameter `k` or `p`"))),
    };
    match mode {
        "sequence" => {
            for t in farey(k)? {
                writeln!(out, "{t}").unwrap();
            }
        }
        "breakpoints" => {
            let terms = match spec.get_u64("p")? {
                Some(p) => breakpoints(small_u32(p, "p")?)?,
                None => breakpoints_of_order(k)?,
            };
            for t in terms {
                writeln!(out, "{t}").unwrap();
            }
        }
        "verify" => {
            if k < 4 {
                return Err(invalid(anyhow!("verify needs k >= 4, got {k}")));
            }
            writeln!(out, "order,check,cases,violations").unwrap();
            let mut failed = Vec::new();
            for order in 4..=k {
                for (name, report) in [
                    ("successive", successive_properties(order)?),
                    ("neighbor", neighbor_properties(order)?),
                ] {
                    writeln!(out, "{order},{name},{},{}", report.checks, report.violations.len()).unwrap();
                    if let Some(v) = report.violations.first() {
                        failed.push(format!("order {order}: {:?} at {:?}", v.kind, v.terms));
                    }
                }
            }
            if !failed.is_empty() {
                return Err(Failure::Violation(failed.join("; ")));
            }
        }
        other => return Err(invalid(anyhow!("unknown farey mode `{other}`"))),
    }
    Ok(())
}

/// `1/K` or a decimal step whose reciprocal is an integer.
fn parse_step(s: &str) -> anyhow::Result<u64> {
    let s = s.trim();
    if let Some(den) = s.strip_prefix("1/") {
        let k: u64 = den.trim().parse().with_context(|| format!("bad oracle step `{s}`"))?;
        if k == 0 {
            bail!("oracle step denominator must be positive");
        }
        return Ok(k);
    }
    let step: f64 = s.parse().with_context(|| format!("bad oracle step `{s}`"))?;
    if !(step > 0.0 && step <= 1.0) {
        bail!("oracle step must be in (0, 1], got {step}");
    }
    let k = (1.0 / step).round();
    if ((1.0 / step) - k).abs() > 1e-9 * k {
        bail!("oracle step {step} is not 1/K for an integer K");
    }
    Ok(k as u64)
}

fn write_matrix(out: &mut String, sol: &DesignSolution) {
    let code = &sol.code;
    match code.exact() {
        Some((ints, den)) => {
            let rows: Vec<String> = ints
                .chunks(code.cols())
                .map(|r| format!("[{}]", r.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")))
                .collect();
            writeln!(out, "F = (1/{den}) [{}]", rows.join(", ")).unwrap();
        }
        None => {
            let rows: Vec<String> = code
                .entries()
                .chunks(code.cols())
                .map(|r| format!("[{}]", r.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")))
                .collect();
            writeln!(out, "F = [{}]", rows.join(", ")).unwrap();
        }
    }
}

fn cmd_design(spec: &ExperimentSpec, out: &mut String) -> Outcome<()> {
    let p = small_u32(req(spec.get_u64("p"), "p")?, "p")?;
    let sol = closed_form_fdsc(p)?;
    writeln!(out, "p = {p}").unwrap();
    write_matrix(out, &sol);
    writeln!(out, "objective = {} ({:e})", sol.objective_exact, sol.objective_exact.to_f64()).unwrap();
    let (lo, hi) = &sol.breakpoint_pair;
    writeln!(out, "breakpoints = {lo}, {hi}").unwrap();
    let errors = error_set(&sol.code, p, sol.code.cols())?;
    let check = full_diversity_check(&errors)?;
    writeln!(out, "full_diversity = {}", check.full_diversity).unwrap();

    if let Some(step) = spec.get_str("oracle")? {
        let divisions = parse_step(step).map_err(invalid)?;
        let grid = grid_search_fdsc(p, divisions)?;
        let best = grid.objective_exact.to_f64();
        let closed = sol.objective_exact.to_f64();
        writeln!(out, "oracle step = 1/{divisions}").unwrap();
        write_matrix(out, &grid);
        writeln!(out, "oracle objective = {} ({best:e})", grid.objective_exact).unwrap();
        writeln!(out, "relative gap = {:.6}", (closed - best) / closed).unwrap();
    }
    Ok(())
}

fn cmd_bounds(spec: &ExperimentSpec, out: &mut String) -> Outcome<()> {
    let kind = opt(spec.get_str("scenario"), "siso")?;
    let sigma = opt(spec.get_f64("sigma"), 0.5)?;
    let p_op = opt(spec.get_f64("p_op"), 1.0)?;
    let rho_db = match spec.get_f64_list("rho_db")? {
        Some(g) => g,
        None => (0..=16).map(|k| 5.0 * k as f64).collect(),
    };
    let scenario = match kind {
        "siso" => BoundScenario::Siso { sigma, p_op },
        "mimo" => BoundScenario::Mimo {
            sigma,
            p_op,
            trials: opt(spec.get_u64("trials"), 1_000_000)?,
            seed: opt(spec.get_u64("seed"), 1)?,
        },
        other => return Err(invalid(anyhow!("unknown bounds scenario `{other}`"))),
    };
    let rows = bound_rows(&scenario, &rho_db)?;
    writeln!(out, "rho_db,exact_or_mc,lower,upper_dominant,upper_remainder,in_regime").unwrap();
    for r in rows {
        match r.bounds {
            Some(b) => writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},true",
                r.rho_db,
                r.reference,
                b.lower(),
                b.upper_dominant(),
                b.upper_remainder()
            ),
            None => writeln!(out, "{},{:e},,,,false", r.rho_db, r.reference),
        }
        .unwrap();
    }
    Ok(())
}

fn convention(spec: &ExperimentSpec, default: FadingConvention) -> Outcome<FadingConvention> {
    match spec.get_str("convention")? {
        None => Ok(default),
        Some("log_amplitude") => Ok(FadingConvention::LogAmplitude),
        Some("log_intensity") => Ok(FadingConvention::LogIntensity),
        Some(other) => Err(invalid(anyhow!("unknown convention `{other}`"))),
    }
}

fn labeling(spec: &ExperimentSpec, default: BitLabeling) -> Outcome<BitLabeling> {
    match spec.get_str("labeling")? {
        None => Ok(default),
        Some("natural") => Ok(BitLabeling::Natural),
        Some("gray") => Ok(BitLabeling::Gray),
        Some(other) => Err(invalid(anyhow!("unknown labeling `{other}`"))),
    }
}

fn apply_scenario_overrides(spec: &ExperimentSpec, s: &mut Scenario) -> Outcome<()> {
    s.max_trials = opt(spec.get_u64("max_trials"), s.max_trials)?;
    s.min_errors = opt(spec.get_u64("min_errors"), s.min_errors)?;
    s.seed = opt(spec.get_u64("seed"), s.seed)?;
    s.convention = convention(spec, s.convention)?;
    s.labeling = labeling(spec, s.labeling)?;
    Ok(())
}

fn run_scenario(scenario: &Scenario, out: &mut String) -> Outcome<()> {
    for curve in &scenario.curves {
        // Refuse the whole run before any output if a code is unfair.
        scenario.sim_config(curve)?.validate()?;
    }
    let results = scenario.run()?;
    write_ber_csv(out, &results);
    Ok(())
}

fn write_ber_csv(out: &mut String, results: &[CurveResult]) {
    writeln!(out, "scheme,sigma2,snr_db,ber,ci_low,ci_high,errors,trials").unwrap();
    for r in results {
        for p in &r.points {
            writeln!(
                out,
                "{},{},{},{:e},{:e},{:e},{},{}",
                r.scheme, r.sigma2, p.snr_db, p.ber, p.ci_low, p.ci_high, p.bit_errors, p.trials
            )
            .unwrap();
        }
    }
}

fn cmd_simulate(spec: &ExperimentSpec, out: &mut String) -> Outcome<()> {
    let schemes: Vec<Scheme> = str_list(spec, "scheme")?
        .unwrap_or_else(|| vec!["fdsc".into(), "sm".into()])
        .iter()
        .map(|s| s.parse::<Scheme>())
        .collect::<fdsc_core::Result<_>>()?;
    let sigma2 = opt(spec.get_f64_list("sigma2"), vec![0.5])?;
    let snr_grid_db = opt(spec.get_f64_list("snr_db"), (0..=10).map(|k| 3.0 * k as f64).collect())?;
    let bits = small_u32(opt(spec.get_u64("bits"), 1)?, "bits")?;
    let mut scenario = Scenario {
        rx: 2,
        tx: 2,
        bits,
        convention: FadingConvention::default(),
        labeling: BitLabeling::default(),
        max_trials: 1_000_000,
        min_errors: DEFAULT_MIN_ERRORS,
        seed: 1,
        curves: schemes
            .iter()
            .flat_map(|&scheme| {
                sigma2.iter().map(move |&s| CurveSpec {
                    scheme,
                    sigma2: s,
                    snr_grid_db: Vec::new(),
                })
            })
            .collect(),
    };
    for c in &mut scenario.curves {
        c.snr_grid_db = snr_grid_db.clone();
    }
    apply_scenario_overrides(spec, &mut scenario)?;
    run_scenario(&scenario, out)
}

fn cmd_reproduce(spec: &ExperimentSpec, out: &mut String) -> Outcome<()> {
    let figure = small_u32(req(spec.get_u64("figure"), "figure")?, "figure")?;
    let mut scenario = figure_preset(figure)?;
    apply_scenario_overrides(spec, &mut scenario)?;
    run_scenario(&scenario, out)
}
