//! Command-line front end: `params`, `simulate`, `dims`, `verify`, `export`.
//!
//! Options come from flags and from an optional flat TOML file given with
//! `--config`; flags win. Exit codes: 0 success, 1 a check or hard assertion
//! failed, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dimension::{
    auto_eps_grid, local_dimension, minkowski_regression, theoretical_dimensions, DimensionReport,
};
use crate::error::{IcrtError, Result};
use crate::io::{
    fmt_f64, list_runs, read_run, rep_stem, segment_rows, theta_digest, write_json, write_run, write_table,
    write_table_file, RunHeader, SCHEMA_VERSION, SEGMENTS_HEADER,
};
use crate::measure::{
    compactness_criterion, expected_mass, log_inverse_expected_mass, psi, sample_mu, sample_mu_within,
    MuRealization,
};
use crate::params::{make_theta, validate, ThetaFamily, ThetaRealization};
use crate::rng::SeedStream;
use crate::rtree::{to_dot, IcrtTree};
use crate::stickbreak::{sample_classical_with_measure, sample_cuts_new, CutSequence, StopRule};
use crate::verify::{run_check, CheckResult, CheckSpec, LemmaId, Verdict, WeightSequence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "icrt", version, about = "Simulate and analyze inhomogeneous continuum random trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
    /// Flat TOML file with default values for any option.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Analytic profile of a family: expected mass, psi, scales, compactness, dimensions.
    Params,
    /// Sample cut sequences and write them with their measures.
    Simulate,
    /// Dimension estimates for simulated trees.
    Dims,
    /// Run lemma checks and print one JSON line per check.
    Verify,
    /// Write segment tables and DOT graphs of simulated trees.
    Export,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Brownian,
    Powerlaw,
    Harmonic,
    Explicit,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    New,
    Classical,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Lower end of the radius grid: `auto` or a length.
#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(untagged)]
pub enum EpsBound {
    #[serde(with = "auto_keyword")]
    Auto,
    Length(f64),
}

mod auto_keyword {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "auto" {
            Ok(())
        } else {
            Err(D::Error::custom("expected \"auto\" or a number"))
        }
    }
}

impl FromStr for EpsBound {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(EpsBound::Auto);
        }
        s.parse::<f64>().map(EpsBound::Length).map_err(|_| format!("expected 'auto' or a length, got '{s}'"))
    }
}

/// Every option, as a flag and as a config key. Key names in the file carry
/// their unit where one applies (`horizon_length`, `eps_min`).
#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    #[arg(long, global = true, value_enum)]
    pub family: Option<FamilyName>,
    /// Power-law decay exponent, in (1/2, 1).
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Drift weight of an explicit family.
    #[arg(long, global = true)]
    pub theta0: Option<f64>,
    /// Atom weights of an explicit family, comma separated, non-increasing.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    pub theta: Option<Vec<f64>>,
    /// The explicit weights are a truncation of a longer sequence.
    #[arg(long, global = true)]
    pub truncated: bool,
    /// Number of atoms K kept from an infinite family.
    #[arg(long, global = true, value_name = "K")]
    pub atoms: Option<usize>,
    /// Stop after N cuts.
    #[arg(long, global = true, value_name = "N")]
    pub cuts: Option<usize>,
    /// Stop at the last cut before length L.
    #[arg(long, global = true, value_name = "L")]
    #[serde(rename = "horizon_length")]
    pub horizon: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub algorithm: Option<Algorithm>,
    /// Lemma id or alias, or `all`.
    #[arg(long, global = true, value_name = "ID")]
    pub lemma: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Significance level of the checks.
    #[arg(long, global = true)]
    pub level: Option<f64>,
    /// Simulate families whose nondegeneracy cannot be decided.
    #[arg(long, global = true)]
    pub force: bool,
    /// Directory written by `simulate`.
    #[arg(long, global = true, value_name = "DIR")]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, value_name = "auto|LENGTH")]
    pub eps_min: Option<EpsBound>,
    #[arg(long, global = true, value_name = "LENGTH")]
    pub eps_max: Option<f64>,
    #[arg(long, global = true)]
    pub eps_points: Option<usize>,
    /// Points sampled for local dimensions.
    #[arg(long, global = true)]
    pub local_points: Option<usize>,
    /// Largest dyadic exponent of the analytic grids.
    #[arg(long, global = true)]
    pub j_max: Option<usize>,
    /// Terms of the compactness sum.
    #[arg(long, global = true)]
    pub terms: Option<usize>,
    /// Weights for the weighted law of large numbers: constant, linear,
    /// power:EXPONENT or geometric:RATIO.
    #[arg(long, global = true)]
    pub lln_weights: Option<String>,
    /// Also write DOT graphs.
    #[arg(long, global = true)]
    pub dot: bool,
}

macro_rules! prefer {
    ($a:expr, $b:expr; $($opt:ident),*; $($flag:ident),*) => {
        Options {
            $($opt: $a.$opt.or($b.$opt),)*
            $($flag: $a.$flag || $b.$flag,)*
        }
    };
}

impl Options {
    /// Values of `self`, falling back to `file`.
    pub fn over(self, file: Options) -> Options {
        prefer!(self, file;
            family, alpha, theta0, theta, atoms, cuts, horizon, seed, reps, workers, out, algorithm, lemma,
            format, level, input, eps_min, eps_max, eps_points, local_points, j_max, terms, lln_weights;
            truncated, force, dot)
    }

    pub fn from_toml(text: &str) -> Result<Options> {
        toml::from_str(text).map_err(|e| IcrtError::Config(e.to_string()))
    }
}

/// Validated options shared by the subcommands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub family: ThetaFamily,
    pub atoms: usize,
    pub stop: StopRule,
    pub seed: u64,
    pub reps: usize,
    pub out: Option<PathBuf>,
    pub algorithm: Algorithm,
    pub format: Format,
    pub force: bool,
    pub options: Options,
}

fn usage(msg: impl Into<String>) -> IcrtError {
    IcrtError::InvalidParameter(msg.into())
}

pub fn family_from(o: &Options) -> Result<ThetaFamily> {
    let name = o.family.unwrap_or(FamilyName::Brownian);
    let stray = |flag: &str| usage(format!("--{flag} does not apply to family {name:?}").to_lowercase());
    if name != FamilyName::Powerlaw && o.alpha.is_some() {
        return Err(stray("alpha"));
    }
    if name != FamilyName::Explicit && (o.theta0.is_some() || o.theta.is_some() || o.truncated) {
        return Err(stray("theta0/--theta/--truncated"));
    }
    let family = match name {
        FamilyName::Brownian => ThetaFamily::Brownian,
        FamilyName::Harmonic => ThetaFamily::Harmonic,
        FamilyName::Powerlaw => {
            ThetaFamily::power_law(o.alpha.ok_or_else(|| usage("family powerlaw needs --alpha"))?)
        }
        FamilyName::Explicit => {
            let atoms = o.theta.clone().unwrap_or_default();
            let theta0 = match o.theta0 {
                Some(t) => t,
                None => (1.0 - atoms.iter().map(|w| w * w).sum::<f64>()).max(0.0).sqrt(),
            };
            ThetaFamily::Explicit { theta0, atoms, truncated: o.truncated }
        }
    };
    family.check()?;
    Ok(family)
}

impl RunConfig {
    pub fn from_options(options: Options) -> Result<RunConfig> {
        let family = family_from(&options)?;
        let atoms = match &family {
            ThetaFamily::Explicit { atoms, .. } => options.atoms.unwrap_or(atoms.len()),
            _ => options.atoms.unwrap_or(10_000),
        };
        let stop = match (options.cuts, options.horizon) {
            (Some(n), None) => StopRule::Cuts(n),
            (None, Some(h)) => StopRule::Horizon(h),
            (Some(n), Some(h)) => StopRule::Both { cuts: n, horizon: h },
            (None, None) => StopRule::Cuts(1000),
        };
        if let Some(h) = options.horizon {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(usage(format!("horizon must be a finite non-negative length, got {h}")));
            }
        }
        let reps = options.reps.unwrap_or(1);
        if reps == 0 {
            return Err(usage("reps must be positive"));
        }
        if options.workers == Some(0) {
            return Err(usage("workers must be positive"));
        }
        if let Some(l) = options.level {
            if !(l > 0.0 && l <= 0.1) {
                return Err(usage(format!("level must lie in (0, 0.1], got {l}")));
            }
        }
        Ok(RunConfig {
            family,
            atoms,
            stop,
            seed: options.seed.unwrap_or(0),
            reps,
            out: options.out.clone(),
            algorithm: options.algorithm.unwrap_or_default(),
            format: options.format.unwrap_or_default(),
            force: options.force,
            options,
        })
    }

    fn theta(&self) -> Result<ThetaRealization> {
        let theta = make_theta(&self.family, self.atoms)?;
        let report = validate(&theta, &self.family);
        if !report.simulable(self.force) {
            return Err(IcrtError::HypothesisFailed(format!(
                "family is not simulable ({}); pass --force when nondegeneracy is unknown",
                report.notes.join("; ")
            )));
        }
        Ok(theta)
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Reports go to `stdout`, diagnostics to standard error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("icrt: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error that stopped a command.
pub fn exit_code(e: &IcrtError) -> i32 {
    match e {
        IcrtError::InvalidParameter(_)
        | IcrtError::Config(_)
        | IcrtError::UnsortedWeights { .. }
        | IcrtError::NotNormalized { .. }
        | IcrtError::NegativeLength(_)
        | IcrtError::BeyondHorizon { .. }
        | IcrtError::OutOfRange { .. }
        | IcrtError::TooFewPoints(_) => EXIT_USAGE,
        _ => EXIT_CHECK_FAILED,
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    let file = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| IcrtError::Config(format!("{}: {e}", p.display())))?;
            Options::from_toml(&text)?
        }
        None => Options::default(),
    };
    let config = RunConfig::from_options(cli.options.over(file))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.options.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| usage(e.to_string()))?;
    let mut buf = Vec::new();
    let result = pool.install(|| match cli.command {
        Command::Params => cmd_params(&config, &mut buf),
        Command::Simulate => cmd_simulate(&config, &mut buf),
        Command::Dims => cmd_dims(&config, &mut buf),
        Command::Verify => cmd_verify(&config, &mut buf),
        Command::Export => cmd_export(&config, &mut buf),
    });
    stdout.write_all(&buf)?;
    result
}

fn out_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn print_json<T: Serialize>(stdout: &mut dyn Write, value: &T) -> Result<()> {
    writeln!(stdout, "{}", serde_json::to_string(value)?)?;
    Ok(())
}

pub fn cmd_params(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let family = &config.family;
    let theta = make_theta(family, config.atoms)?;
    let validation = validate(&theta, family);
    let j_max = config.options.j_max.unwrap_or(40);
    let terms = config.options.terms.unwrap_or(30);
    let criterion = compactness_criterion(family, terms)?;
    let dims = theoretical_dimensions(family, j_max)?;
    let profile: Vec<Vec<String>> = (-4..=j_max as i32)
        .map(|j| {
            let l = (j as f64).exp2();
            vec![fmt_f64(l), fmt_f64(expected_mass(family, l)), fmt_f64(psi(family, l))]
        })
        .collect();
    let scales: Vec<Vec<String>> = (1..=terms)
        .map(|n| {
            let m = (n as f64).exp2();
            let log_scale = log_inverse_expected_mass(family, m)?;
            Ok(vec![n.to_string(), fmt_f64(m), fmt_f64(log_scale), fmt_f64(criterion.terms[n - 1])])
        })
        .collect::<Result<_>>()?;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "family": family,
        "atoms": config.atoms,
        "theta_digest": theta_digest(&theta),
        "residual_square_mass": theta.residual_square_mass,
        "validation": validation,
        "criterion": criterion,
        "dimensions": dims,
    });
    const PROFILE: [&str; 4] = ["schema_version", "l", "expected_mass", "psi"];
    const SCALES: [&str; 5] = ["schema_version", "n", "mass", "log_scale", "term"];
    match config.format {
        Format::Json => print_json(stdout, &report)?,
        Format::Csv => write_table(&mut *stdout, &PROFILE, &profile)?,
    }
    if let Some(dir) = &config.out {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("params.json"), &report)?;
        write_table_file(&dir.join("profile.csv"), &PROFILE, &profile)?;
        write_table_file(&dir.join("scales.csv"), &SCALES, &scales)?;
    }
    let ok = validation.all_pass() && criterion.sandwich_holds;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// One replication: cuts and the measure they were drawn from.
fn simulate_one(config: &RunConfig, theta: &ThetaRealization, rep: u64) -> Result<(CutSequence, MuRealization)> {
    let seeds = SeedStream::new(config.seed);
    let mut rng = seeds.replication(rep, 0);
    let (mut cuts, mu) = match config.algorithm {
        Algorithm::Classical => sample_classical_with_measure(theta, config.stop, &mut rng)?,
        Algorithm::New => {
            let mu = match config.stop {
                StopRule::Horizon(h) => sample_mu_within(theta, h, &mut rng)?,
                _ if theta.atoms.is_empty() => MuRealization::new(theta.drift(), Vec::new(), None)?,
                _ => sample_mu(theta, &mut rng),
            };
            let cuts = sample_cuts_new(&mu, config.stop, &mut rng)?;
            (cuts, mu)
        }
    };
    cuts.seed = Some(config.seed);
    cuts.stream = Some(rep);
    Ok((cuts, mu))
}

fn measure_horizon(stop: StopRule, cuts: &CutSequence) -> f64 {
    match stop {
        StopRule::Horizon(h) => h,
        StopRule::Both { horizon, .. } => horizon.max(cuts.total_length()),
        StopRule::Cuts(_) => cuts.total_length(),
    }
}

fn height(tree: &IcrtTree) -> Result<f64> {
    let sk = tree.skeleton(tree.total_length())?;
    Ok(sk.depth.iter().cloned().fold(0.0, f64::max))
}

pub fn cmd_simulate(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    use rayon::prelude::*;
    let theta = config.theta()?;
    let dir = out_dir(config)?;
    let digest = theta_digest(&theta);
    let rows = (0..config.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let (cuts, mu) = simulate_one(config, &theta, rep)?;
            let stem = rep_stem(rep);
            let header = RunHeader {
                schema_version: SCHEMA_VERSION,
                seed: config.seed,
                replication: rep,
                provenance: cuts.provenance,
                family: config.family.clone(),
                atoms: theta.k(),
                theta_digest: digest.clone(),
                residual_square_mass: theta.residual_square_mass,
                drift: mu.drift(),
                stop: config.stop,
                cuts: cuts.len(),
                total_length: cuts.total_length(),
                measure_horizon: measure_horizon(config.stop, &cuts),
                cuts_file: format!("{stem}.csv"),
                measure_file: format!("{stem}_mu.csv"),
            };
            write_run(&dir, &header, &cuts, &mu)?;
            let tree = IcrtTree::build(&cuts)?;
            if config.options.dot {
                fs::write(dir.join(format!("{stem}.dot")), to_dot(&tree.skeleton(tree.total_length())?))?;
            }
            let total_mass = cuts.cum_mass.last().copied().unwrap_or(0.0);
            Ok(vec![
                rep.to_string(),
                cuts.len().to_string(),
                fmt_f64(cuts.total_length()),
                fmt_f64(total_mass),
                fmt_f64(height(&tree)?),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    const SUMMARY: [&str; 6] = ["schema_version", "rep", "cuts", "total_length", "total_mass", "height"];
    write_table_file(&dir.join("summary.csv"), &SUMMARY, &rows)?;
    let mut effective = config.options.clone();
    effective.family.get_or_insert(FamilyName::Brownian);
    effective.seed = Some(config.seed);
    effective.reps = Some(config.reps);
    effective.atoms = Some(config.atoms);
    effective.algorithm = Some(config.algorithm);
    if effective.cuts.is_none() && effective.horizon.is_none() {
        effective.cuts = Some(1000);
    }
    let manifest = toml::to_string(&effective).map_err(|e| IcrtError::Config(e.to_string()))?;
    fs::write(dir.join("run.toml"), manifest)?;
    print_json(
        stdout,
        &json!({
            "schema_version": SCHEMA_VERSION,
            "out": dir.display().to_string(),
            "reps": config.reps,
            "algorithm": config.algorithm,
            "stop": config.stop,
            "theta_digest": digest,
        }),
    )?;
    Ok(EXIT_OK)
}

/// Radius grid for a tree of the given diameter.
fn eps_grid(o: &Options, diameter: f64) -> Result<Vec<f64>> {
    let points = o.eps_points.unwrap_or(8);
    if points < 3 {
        return Err(usage("eps_points must be at least 3"));
    }
    match o.eps_min.unwrap_or(EpsBound::Auto) {
        EpsBound::Auto if o.eps_max.is_none() => Ok(auto_eps_grid(diameter, points)),
        bound => {
            let lo = match bound {
                EpsBound::Auto => diameter / 200.0,
                EpsBound::Length(e) => e,
            };
            let hi = o.eps_max.unwrap_or(diameter / 8.0);
            if !(lo > 0.0 && hi > lo) {
                return Err(usage(format!("need 0 < eps_min < eps_max, got {lo} and {hi}")));
            }
            Ok((0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect())
        }
    }
}

fn dimension_report(
    config: &RunConfig,
    family: &ThetaFamily,
    cuts: &CutSequence,
    mu: &MuRealization,
    rep: u64,
) -> Result<(DimensionReport, Vec<Vec<String>>)> {
    let tree = IcrtTree::build(cuts)?;
    let l = tree.total_length();
    if l <= 0.0 {
        return Err(usage("the tree is a single point; nothing to measure"));
    }
    let diameter = tree.skeleton(l)?.diameter();
    let grid = eps_grid(&config.options, diameter)?;
    let fit = minkowski_regression(&tree, l, &grid)?;
    let mut rng = SeedStream::new(config.seed).replication(rep, 1);
    let points = config.options.local_points.unwrap_or(200);
    let local = local_dimension(&tree, mu, l, points, &grid, &mut rng)?;
    let theory = theoretical_dimensions(family, config.options.j_max.unwrap_or(40))?;
    let rows = fit.eps.iter().zip(&fit.counts).map(|(e, n)| vec![fmt_f64(*e), n.to_string()]).collect();
    let report = DimensionReport {
        schema_version: SCHEMA_VERSION,
        theory: Some(theory),
        box_counting: Some(fit),
        local: Some(local),
    };
    Ok((report, rows))
}

pub fn cmd_dims(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    const COUNTS: [&str; 3] = ["schema_version", "eps", "balls"];
    let mut reports = Vec::new();
    match &config.options.input {
        Some(input) => {
            if !input.is_dir() {
                return Err(usage(format!("input directory {} does not exist", input.display())));
            }
            let reps = list_runs(input)?;
            if reps.is_empty() {
                return Err(usage(format!("no simulated runs in {}", input.display())));
            }
            for rep in reps {
                let run = read_run(input, rep)?;
                let (report, rows) = dimension_report(config, &run.header.family, &run.cuts, &run.mu, rep)?;
                reports.push((rep, report, rows));
            }
        }
        None => {
            let theta = config.theta()?;
            for rep in 0..config.reps as u64 {
                let (cuts, mu) = simulate_one(config, &theta, rep)?;
                let (report, rows) = dimension_report(config, &config.family, &cuts, &mu, rep)?;
                reports.push((rep, report, rows));
            }
        }
    }
    for (rep, report, rows) in &reports {
        match config.format {
            Format::Json => print_json(stdout, report)?,
            Format::Csv => write_table(&mut *stdout, &COUNTS, rows)?,
        }
        if let Some(dir) = &config.out {
            fs::create_dir_all(dir)?;
            write_json(&dir.join(format!("dims_{}.json", rep_stem(*rep))), report)?;
            write_table_file(&dir.join(format!("dims_{}.csv", rep_stem(*rep))), &COUNTS, rows)?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_weights(s: &str) -> Result<WeightSequence> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (s, None),
    };
    let num = |a: Option<&str>| -> Result<f64> {
        a.and_then(|x| x.parse().ok()).ok_or_else(|| usage(format!("lln weights '{s}' need a numeric argument")))
    };
    match kind {
        "constant" => Ok(WeightSequence::Constant),
        "linear" => Ok(WeightSequence::Linear),
        "power" => Ok(WeightSequence::Power { exponent: num(arg)? }),
        "geometric" => Ok(WeightSequence::Geometric { ratio: num(arg)? }),
        _ => Err(usage(format!("unknown lln weights '{s}'"))),
    }
}

/// Check specs requested by the options, all validated before any run.
pub fn check_specs(config: &RunConfig) -> Result<Vec<CheckSpec>> {
    let o = &config.options;
    let lemma = o.lemma.as_deref().ok_or_else(|| usage("verify needs --lemma ID (or all)"))?;
    let ids: Vec<LemmaId> = if lemma == "all" { LemmaId::ALL.to_vec() } else { vec![lemma.parse()?] };
    let weights = o.lln_weights.as_deref().map(parse_weights).transpose()?;
    ids.into_iter()
        .map(|id| {
            let mut spec = CheckSpec::new(id, config.family.clone());
            spec.seed = config.seed;
            spec.force = config.force;
            if let Some(r) = o.reps {
                spec.reps = r;
            }
            if let Some(k) = o.atoms {
                spec.atoms = k;
            } else if let ThetaFamily::Explicit { atoms, .. } = &config.family {
                spec.atoms = atoms.len();
            }
            if let Some(a) = o.level {
                spec.alpha = a;
            }
            if let Some(n) = o.cuts {
                spec.cuts = n;
            }
            if let Some(h) = o.horizon {
                spec.horizon = h;
            }
            if let Some(w) = weights {
                spec.lln.weights = w;
            }
            spec.check()?;
            Ok(spec)
        })
        .collect()
}

pub fn cmd_verify(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let specs = check_specs(config)?;
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for spec in &specs {
        let line = match run_check(spec) {
            Ok(r) => {
                if r.failed() {
                    code = EXIT_CHECK_FAILED;
                }
                rows.push(summary_row(&r));
                serde_json::to_value(&r)?
            }
            Err(IcrtError::HypothesisFailed(reason)) => {
                code = EXIT_CHECK_FAILED;
                rows.push(vec![
                    spec.lemma.to_string(),
                    spec.family.name().into(),
                    "refused".into(),
                    spec.reps.to_string(),
                    spec.seed.to_string(),
                ]);
                json!({
                    "lemma": spec.lemma,
                    "family": spec.family.name(),
                    "verdict": "refused",
                    "reason": reason,
                    "reps": spec.reps,
                    "seed": spec.seed,
                })
            }
            Err(e) => return Err(e),
        };
        let text = serde_json::to_string(&line)?;
        if config.format == Format::Json {
            writeln!(stdout, "{text}")?;
        }
        lines.push(text);
    }
    const SUMMARY: [&str; 6] = ["schema_version", "lemma", "family", "verdict", "reps", "seed"];
    if config.format == Format::Csv {
        write_table(&mut *stdout, &SUMMARY, &rows)?;
    }
    if let Some(dir) = &config.out {
        fs::create_dir_all(dir)?;
        let mut all = lines.join("\n");
        all.push('\n');
        fs::write(dir.join("verify.jsonl"), all)?;
        write_table_file(&dir.join("verify.csv"), &SUMMARY, &rows)?;
    }
    Ok(code)
}

fn summary_row(r: &CheckResult) -> Vec<String> {
    let verdict = match r.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Monitor => "monitor",
    };
    vec![r.lemma.to_string(), r.family.clone(), verdict.into(), r.reps.to_string(), r.seed.to_string()]
}

fn export_tree(config: &RunConfig, dir: &Path, rep: u64, cuts: &CutSequence) -> Result<()> {
    let tree = IcrtTree::build(cuts)?;
    let stem = rep_stem(rep);
    let rows = segment_rows(&tree);
    match config.format {
        Format::Csv => write_table_file(&dir.join(format!("{stem}_segments.csv")), &SEGMENTS_HEADER, &rows)?,
        Format::Json => {
            let segments: Vec<serde_json::Value> = (0..tree.segments())
                .map(|k| {
                    json!({
                        "segment": k + 1,
                        "start": tree.seg_start(k),
                        "end": tree.ends()[k],
                        "parent": tree.parent(k).map_or(0, |p| p + 1),
                        "glue": tree.glue()[k],
                        "attach_depth": tree.attach_depth(k),
                    })
                })
                .collect();
            write_json(
                &dir.join(format!("{stem}_segments.json")),
                &json!({ "schema_version": SCHEMA_VERSION, "segments": segments }),
            )?;
        }
    }
    if config.options.dot {
        fs::write(dir.join(format!("{stem}.dot")), to_dot(&tree.skeleton(tree.total_length())?))?;
    }
    Ok(())
}

pub fn cmd_export(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let dir = out_dir(config)?;
    let mut exported = Vec::new();
    match &config.options.input {
        Some(input) => {
            if !input.is_dir() {
                return Err(usage(format!("input directory {} does not exist", input.display())));
            }
            let reps = list_runs(input)?;
            if reps.is_empty() {
                return Err(usage(format!("no simulated runs in {}", input.display())));
            }
            for rep in reps {
                let run = read_run(input, rep)?;
                export_tree(config, &dir, rep, &run.cuts)?;
                exported.push(rep);
            }
        }
        None => {
            let theta = config.theta()?;
            for rep in 0..config.reps as u64 {
                let (cuts, _) = simulate_one(config, &theta, rep)?;
                export_tree(config, &dir, rep, &cuts)?;
                exported.push(rep);
            }
        }
    }
    print_json(stdout, &json!({ "schema_version": SCHEMA_VERSION, "out": dir.display().to_string(), "reps": exported }))?;
    Ok(EXIT_OK)
}
