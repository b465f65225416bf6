//! `pointproc` command-line front end.
//!
//! Every subcommand reads plain CSV/JSON files and writes CSV or a single JSON
//! document. Exit codes: 0 on success, 1 for usage and validation errors,
//! 2 for numeric failures (an impossible event under the model, an
//! inconsistent hazard, an exploding simulation).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use pointproc::{
    anticipativity_report, fit_markov, fit_mle, girsanov_log_ratio, gof_exp1, ihf_compensator, intensity_at, io,
    log_likelihood_ratio, markov_log_ratio, model_compensator, simulate_ensemble, simulate_from_hazard,
    simulate_thinning, time_rescale, CompensatorPath, EventSequence, Family, FitOptions, GaussianPath, HazardSpec,
    IntensityModel, MarkovModel, RandomStream, StatePath, VelocityPath,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Lib(#[from] pointproc::Error),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "pointproc", version, about = "Counting processes, compensators and likelihood ratios")]
#[command(args_override_self = true)]
struct Cli {
    /// JSON object of flag values (keys are long flag names); explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate event times from an intensity model or a hazard spec.
    Simulate(SimulateArgs),
    /// Compensator path of an event file, as `t,value` breakpoints.
    Compensate(CompensateArgs),
    /// Log-likelihood ratio against a reference process.
    #[command(subcommand)]
    Loglik(LoglikCommand),
    /// Maximum-likelihood fits.
    #[command(subcommand)]
    Fit(FitCommand),
    /// Time-rescaling Kolmogorov-Smirnov test against Exp(1).
    Gof(GofArgs),
    /// Drift of N - A when A is built from a look-ahead intensity.
    DemoAnticipative(DemoArgs),
    /// `t,lambda,N` rows of a simulated Hawkes path with constant kernel.
    PlotData(PlotArgs),
}

#[derive(Debug, Args)]
struct Source {
    /// Inline `kind:p1,p2,...` or a JSON model file.
    #[arg(long, conflicts_with = "hazard")]
    model: Option<String>,
    /// JSON hazard spec (waiting-time laws).
    #[arg(long)]
    hazard: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    seed: u64,
    /// Write an ensemble (`path_id,time`) instead of a single path.
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompensateArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    events: PathBuf,
    /// Observation horizon; defaults to the last event.
    #[arg(long)]
    horizon: Option<f64>,
    /// Extra breakpoints for model compensators.
    #[arg(long, default_value_t = 1.0)]
    grid_step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum LoglikCommand {
    /// Events against the unit Poisson process.
    Point {
        #[arg(long)]
        model: String,
        #[arg(long)]
        events: PathBuf,
        /// Time up to which the ratio is taken; defaults to the horizon.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Sampled path against standard Brownian motion.
    Gaussian {
        /// `t,value` CSV of the path.
        #[arg(long)]
        path: PathBuf,
        /// `t,value` CSV of the velocity on the same grid.
        #[arg(long, conflicts_with = "c")]
        velocity: Option<PathBuf>,
        /// Constant velocity.
        #[arg(long)]
        c: Option<f64>,
    },
    /// State path of a chain against a reference chain.
    Markov {
        #[arg(long)]
        path: PathBuf,
        /// JSON chain `{"n", "p", "v0"}`.
        #[arg(long)]
        p: PathBuf,
        /// Reference chain; defaults to the uniform chain.
        #[arg(long)]
        p0: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum FitCommand {
    /// Fit a parametric intensity by maximum likelihood.
    Point {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        family: String,
        /// Comma-separated starting values.
        #[arg(long)]
        init: String,
        /// Comma-separated parameter names held at their starting value.
        #[arg(long)]
        fix: Option<String>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
    },
    /// Empirical transition matrix from state paths.
    Markov {
        #[arg(long, required = true, num_args = 1..)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        n_states: usize,
    },
}

#[derive(Debug, Args)]
struct GofArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[arg(long)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 100_000)]
    n_paths: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Baseline `a,b,c` of `a + b exp(-c t)`.
    #[arg(long)]
    mu: String,
    #[arg(long)]
    phi0: f64,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    seed: u64,
    /// Spacing of the dense rows.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run_cli<O: Write, E: Write>(argv: &[String], stdout: &mut O, stderr: &mut E) -> i32 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Splices the flags stored in `--config FILE` in front of the explicit
/// ones, so that with `args_override_self` the explicit flags win.
fn expand_config(argv: &[String]) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let p = it.next().ok_or_else(|| usage("--config needs a file"))?;
            config = Some(PathBuf::from(p));
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else {
            rest.push(a.clone());
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let value: Value =
        serde_json::from_reader(BufReader::new(open(&path)?)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(usage(format!("{}: expected a JSON object", path.display())));
    };
    let mut injected = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => injected.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => injected.extend([flag, s]),
            Value::Number(n) => injected.extend([flag, n.to_string()]),
            Value::Array(items) => {
                injected.push(flag);
                for item in items {
                    injected.push(match item {
                        Value::String(s) => s,
                        other => other.to_string(),
                    });
                }
            }
            Value::Object(_) => return Err(usage(format!("config key `{key}`: nested objects are not flags"))),
        }
    }
    // subcommand names are the leading bare words after the program name
    let at = rest.iter().skip(1).position(|a| a.starts_with('-')).map_or(rest.len(), |i| i + 1);
    rest.splice(at..at, injected);
    Ok(rest)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

fn with_output<O: Write>(
    out: &Option<PathBuf>,
    stdout: &mut O,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

fn print_json<O: Write>(stdout: &mut O, v: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *stdout, v).map_err(|e| CliError::Output(e.into()))?;
    writeln!(stdout)?;
    Ok(())
}

fn load_model(spec: &str) -> Result<IntensityModel> {
    let path = Path::new(spec);
    if path.is_file() {
        let m: IntensityModel =
            serde_json::from_reader(BufReader::new(open(path)?)).map_err(|e| usage(format!("{spec}: {e}")))?;
        m.validate()?;
        Ok(m)
    } else {
        Ok(spec.parse()?)
    }
}

fn load_hazard(path: &Path) -> Result<HazardSpec> {
    let spec: HazardSpec =
        serde_json::from_reader(BufReader::new(open(path)?)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

fn load_events(path: &Path, horizon: Option<f64>) -> Result<EventSequence> {
    Ok(io::read_events(BufReader::new(open(path)?), horizon)?)
}

fn load_chain(path: &Path) -> Result<MarkovModel> {
    Ok(MarkovModel::read_json(BufReader::new(open(path)?))?)
}

enum Loaded {
    Model(IntensityModel),
    Hazard(HazardSpec),
}

fn load_source(s: &Source) -> Result<Loaded> {
    match (&s.model, &s.hazard) {
        (Some(m), None) => Ok(Loaded::Model(load_model(m)?)),
        (None, Some(h)) => Ok(Loaded::Hazard(load_hazard(h)?)),
        _ => Err(usage("exactly one of --model or --hazard is required")),
    }
}

fn compensator(src: &Loaded, events: &EventSequence, grid_step: f64) -> Result<CompensatorPath> {
    Ok(match src {
        Loaded::Model(m) => model_compensator(m, events, grid_step)?,
        Loaded::Hazard(h) => ihf_compensator(h, events)?,
    })
}

fn parse_list(field: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| usage(format!("{field}: `{v}` is not a number"))))
        .collect()
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("{field}: {v} must be > 0")))
    }
}

fn dispatch<O: Write>(cmd: Command, stdout: &mut O) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a, stdout),
        Command::Compensate(a) => {
            positive("grid-step", a.grid_step)?;
            let src = load_source(&a.source)?;
            let events = load_events(&a.events, a.horizon)?;
            let path = compensator(&src, &events, a.grid_step)?;
            with_output(&a.out, stdout, |w| Ok(path.write_csv(w)?))
        }
        Command::Loglik(c) => loglik(c, stdout),
        Command::Fit(c) => fit(c, stdout),
        Command::Gof(a) => {
            let src = load_source(&a.source)?;
            let events = load_events(&a.events, a.horizon)?;
            let path = compensator(&src, &events, 1.0)?;
            let ks = gof_exp1(&time_rescale(&events, &path)?.waits())?;
            print_json(stdout, &json!({ "ks": ks }))
        }
        Command::DemoAnticipative(a) => {
            let r = anticipativity_report(a.n_paths, a.a, a.t, a.t + a.a, a.seed)?;
            print_json(
                stdout,
                &json!({
                    "a": r.a,
                    "t": r.t,
                    "n_paths": r.n_paths,
                    "drift": r.drift,
                    "drift_se": r.drift_se,
                    "expected_drift": r.expected_drift,
                    "anticipative_passed": r.anticipative.passed,
                    "control_passed": r.control.passed,
                }),
            )
        }
        Command::PlotData(a) => plot_data(a, stdout),
    }
}

fn simulate<O: Write>(a: SimulateArgs, stdout: &mut O) -> Result<()> {
    let src = load_source(&a.source)?;
    match a.n_paths {
        Some(n) => {
            let paths = match &src {
                Loaded::Model(m) => simulate_ensemble(m, a.horizon, n, a.seed)?,
                Loaded::Hazard(h) => simulate_ensemble(h, a.horizon, n, a.seed)?,
            };
            with_output(&a.out, stdout, |w| Ok(io::write_ensemble(&paths, w)?))
        }
        None => {
            let stream = RandomStream::new(a.seed, 0);
            let path = match &src {
                Loaded::Model(m) => simulate_thinning(m, a.horizon, stream)?,
                Loaded::Hazard(h) => simulate_from_hazard(h, a.horizon, stream)?,
            };
            with_output(&a.out, stdout, |w| Ok(io::write_events(&path, w)?))
        }
    }
}

fn params_json(names: &[&str], values: &[f64]) -> Value {
    Value::Object(names.iter().zip(values).map(|(n, v)| (n.to_string(), json!(v))).collect::<Map<_, _>>())
}

fn finite_loglik(l: f64) -> Result<f64> {
    if l.is_finite() {
        Ok(l)
    } else {
        Err(pointproc::Error::NonFiniteLikelihood.into())
    }
}

fn loglik<O: Write>(c: LoglikCommand, stdout: &mut O) -> Result<()> {
    match c {
        LoglikCommand::Point { model, events, t, horizon } => {
            let model = load_model(&model)?;
            let horizon = horizon.or(t);
            let events = load_events(&events, horizon)?;
            let t = t.unwrap_or(events.horizon());
            let l = finite_loglik(log_likelihood_ratio(&events, &model, t)?)?;
            let (names, values): (Vec<_>, Vec<_>) = model.params().into_iter().unzip();
            print_json(stdout, &json!({ "loglik": l, "params": params_json(&names, &values) }))
        }
        LoglikCommand::Gaussian { path, velocity, c } => {
            let w = GaussianPath::read_csv(BufReader::new(open(&path)?))?;
            let phi = match (velocity, c) {
                (Some(p), None) => VelocityPath::read_csv(BufReader::new(open(&p)?))?,
                (None, Some(c)) => VelocityPath::constant(w.grid().to_vec(), c)?,
                _ => return Err(usage("exactly one of --velocity or --c is required")),
            };
            let l = finite_loglik(girsanov_log_ratio(&w, &phi)?)?;
            print_json(stdout, &json!({ "loglik": l }))
        }
        LoglikCommand::Markov { path, p, p0 } => {
            let p = load_chain(&p)?;
            let p0 = match p0 {
                Some(f) => load_chain(&f)?,
                None => MarkovModel::uniform(p.n_states()),
            };
            let x = StatePath::read_csv(BufReader::new(open(&path)?), p.n_states())?;
            let l = finite_loglik(markov_log_ratio(&x, &p, &p0)?)?;
            print_json(stdout, &json!({ "loglik": l }))
        }
    }
}

fn fit<O: Write>(c: FitCommand, stdout: &mut O) -> Result<()> {
    match c {
        FitCommand::Point { events, family, init, fix, horizon, tol, max_iter } => {
            positive("tol", tol)?;
            let family: Family = family.parse()?;
            let init = parse_list("init", &init)?;
            let names = family.param_names();
            let mut fixed = vec![false; names.len()];
            for name in fix.iter().flat_map(|f| f.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
                let i = names
                    .iter()
                    .position(|n| *n == name)
                    .ok_or_else(|| usage(format!("fix: `{name}` is not a parameter of this family")))?;
                fixed[i] = true;
            }
            let events = load_events(&events, horizon)?;
            let opts = FitOptions { max_iter, tol, fixed, ..FitOptions::default() };
            let r = fit_mle(&events, family, &init, &opts)?;
            let ks = match model_compensator(&r.model(), &events, 1.0).and_then(|a| time_rescale(&events, &a)) {
                Ok(tau) if !tau.times().is_empty() => serde_json::to_value(gof_exp1(&tau.waits())?).ok(),
                _ => None,
            };
            let se: Map<String, Value> = names
                .iter()
                .zip(&r.std_errors)
                .map(|(n, s)| (n.to_string(), s.map_or(Value::Null, |v| json!(v))))
                .collect();
            print_json(
                stdout,
                &json!({
                    "loglik": r.loglik,
                    "params": params_json(names, &r.params),
                    "converged": r.converged,
                    "ks": ks,
                    "std_errors": se,
                    "iterations": r.iterations,
                    "at_boundary": r.at_boundary,
                    "initial_loglik": r.initial_loglik,
                }),
            )
        }
        FitCommand::Markov { paths, n_states } => {
            if n_states == 0 {
                return Err(usage("n-states: must be > 0"));
            }
            let xs = paths
                .iter()
                .map(|p| Ok(StatePath::read_csv(BufReader::new(open(p)?), n_states)?))
                .collect::<Result<Vec<_>>>()?;
            let fit = fit_markov(&xs, n_states)?;
            fit.model.write_json(&mut *stdout)?;
            writeln!(stdout)?;
            Ok(())
        }
    }
}

fn plot_data<O: Write>(a: PlotArgs, stdout: &mut O) -> Result<()> {
    positive("step", a.step)?;
    let mu = parse_list("mu", &a.mu)?;
    let [ma, mb, mc] = mu[..] else {
        return Err(usage("mu: expected three values a,b,c"));
    };
    let model = IntensityModel::HawkesConst { a: ma, b: mb, c: mc, phi0: a.phi0 };
    let events = simulate_thinning(&model, a.horizon, RandomStream::new(a.seed, 0))?;
    let n_grid = (a.horizon / a.step).floor() as usize;
    let mut rows: Vec<f64> = (0..=n_grid).map(|k| k as f64 * a.step).filter(|&t| t <= a.horizon).collect();
    rows.extend_from_slice(events.times());
    rows.sort_by(f64::total_cmp);
    rows.dedup();
    with_output(&a.out, stdout, |w| {
        writeln!(w, "t,lambda,N")?;
        for t in rows {
            writeln!(w, "{t},{},{}", intensity_at(&model, &events, t)?, events.count(t))?;
        }
        Ok(())
    })
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
