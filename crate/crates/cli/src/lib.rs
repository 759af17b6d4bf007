//! `cvsd`: run cross-validation SE studies, estimate on user data, inspect
//! error covariance components.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid input or
//! configuration, 3 numerical failure (including an aborted study).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cvsd_core::adhoc::{var_cvkm, var_cvkr, AdhocForm, Var3Criterion};
use cvsd_core::influence::{if_partial_cvkr, if_sd_cvkm, if_sd_cvn_reduction, if_sd_err_cvn};
use cvsd_core::simulation::{
    estimate_components, permutation_ratio, run_study, write_report_csv, write_report_json, write_trials_csv,
    ComponentsConfig, ComponentsReport, StudyConfig, StudyReport, SCHEMA_VERSION,
};
use cvsd_core::{
    auc_cvk, auc_cvkm, auc_cvkr, auc_cvn, err_cvk, err_loo, plan_cvk, plan_cvkm, plan_cvkr, ClassifierKind,
    ClassifierSpec, CvAucResult, CvOptions, Error, Pairing, Remainder, TieRule, TwoClassDataset, ZeroDenPolicy,
};

/// Print to stdout, ignoring a closed pipe (e.g. output piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        self.code
    }

    fn invalid(message: impl fmt::Display) -> Self {
        CliError {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) => 2,
            Error::Numerical { .. } | Error::Coverage { .. } | Error::StudyAborted { .. } => 3,
            Error::Io(_) | Error::Json(_) => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "cvsd", version, about = "Cross-validation AUC estimates and their standard errors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte-Carlo study described by a JSON config.
    Simulate(SimulateArgs),
    /// Estimate the AUC and its SEs on a labelled CSV dataset.
    Estimate(EstimateArgs),
    /// Estimate the covariance components of the K-fold error rate.
    Components(ComponentsArgs),
    /// Print C(n, n/2)/n^n for even n up to a bound.
    Ratio(RatioArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Top-level seed; overrides any seed in the config.
    #[arg(long)]
    pub seed: u64,
    /// Worker threads, 0 = one per core.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Cvn,
    Cvk,
    Cvkr,
    Cvkm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    Lda,
    Qda,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PairingArg {
    Full,
    Matched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Strict,
    Skip,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV with a header, a label column (1/2) and feature columns.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the label column; defaults to `label`, else the first column.
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long, value_enum, default_value = "lda")]
    pub classifier: ClassifierArg,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    #[arg(long, value_enum, default_value = "cvkm")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long, default_value_t = 200)]
    pub r: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "full")]
    pub pairing: PairingArg,
    #[arg(long, value_enum, default_value = "strict")]
    pub zero_den: PolicyArg,
    #[arg(long, default_value_t = 0.0)]
    pub tie_tolerance: f64,
    /// Give leftover observations to the lowest folds instead of rejecting.
    #[arg(long)]
    pub ragged: bool,
    /// Also write the JSON result here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComponentsArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides any seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long)]
    pub n_max: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a).map(|_| ()),
        Command::Estimate(a) => cmd_estimate(a).map(|_| ()),
        Command::Components(a) => cmd_components(a).map(|_| ()),
        Command::Ratio(a) => cmd_ratio(a).map(|_| ()),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";
pub const TRIALS_CSV: &str = "trials.csv";

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<StudyReport> {
    let mut cfg = StudyConfig::from_json(&read(&args.config)?)?;
    cfg.seed = args.seed;
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    let run = run_study(&cfg)?;
    fs::create_dir_all(&args.out_dir)?;
    write_report_csv(&run.report, &args.out_dir.join(REPORT_CSV))?;
    write_report_json(&run.report, &args.out_dir.join(REPORT_JSON))?;
    write_trials_csv(&run.trials, &args.out_dir.join(TRIALS_CSV))?;
    print_study(&run.report);
    Ok(run.report)
}

fn print_study(r: &StudyReport) {
    let c = &r.config;
    say!(
        "{:?} n1={} n2={} p={} c={:.4} K={} M={} R={} trials={} failed={}",
        c.classifier.kind,
        c.n1,
        c.n2,
        c.p,
        c.c.unwrap_or(f64::NAN),
        c.k,
        c.m,
        c.r,
        r.trials,
        r.failed_trials
    );
    if let Some(a) = r.mean_true_auc {
        say!("  true AUC                {a:.4}");
    }
    for e in &r.estimators {
        say!(
            "  {:<6} AUC {:.4} ± {:.4}   true SD {:.4} ± {:.4}",
            e.estimator, e.mean_auc, e.mean_auc_mc_se, e.true_sd, e.true_sd_mc_se
        );
        for s in &e.se {
            say!(
                "    {:<10} mean {:.4} ± {:.4}  sd {:.4}  bias {:+.4}  rms {:.4}  (normalized bias {:+.3}, rms {:.3})",
                s.name, s.mean, s.mean_mc_se, s.sd, s.bias, s.rms, s.norm_bias, s.norm_rms
            );
        }
    }
}

/// Read a labelled dataset. The label column holds 1 or 2.
pub fn read_dataset(path: &Path, label_column: Option<&str>) -> CliResult<TwoClassDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::invalid(format!("header: {e}")))?
        .clone();
    let label = match label_column {
        Some(name) => headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::invalid(format!("no column named {name}")))?,
        None => headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case("label"))
            .unwrap_or(0),
    };
    if headers.len() < 2 {
        return Err(CliError::invalid("need a label column and at least one feature"));
    }
    let mut rows: Vec<(u8, Vec<f64>)> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::invalid(format!("row {}: {e}", line + 1)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::invalid(format!("row {}: cannot parse {s:?}", line + 1)))
        };
        let y = match rec.get(label).map(str::trim) {
            Some("1") => 1,
            Some("2") => 2,
            other => return Err(CliError::invalid(format!("row {}: label must be 1 or 2, got {other:?}", line + 1))),
        };
        let x = rec
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != label)
            .map(|(_, s)| parse(s))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push((y, x));
    }
    Ok(TwoClassDataset::from_labeled(rows.iter().map(|(y, x)| (*y, x.as_slice())))?)
}

#[derive(Debug, Serialize)]
pub struct Estimate {
    pub schema_version: u32,
    pub mode: String,
    pub classifier: ClassifierSpec,
    pub n1: usize,
    pub n2: usize,
    pub p: usize,
    pub k: Option<usize>,
    pub repetitions: Option<usize>,
    pub seed: u64,
    pub auc: f64,
    /// SE estimates keyed by name (`sd_if`, `sd_if_i`, `sd_adhoc`, `sd_var1` ...).
    pub se: Vec<(String, f64)>,
    /// K-fold (or leave-one-out) error rate and its naive / IF SE.
    pub err: Option<f64>,
    pub err_se: Option<f64>,
    pub trainings: usize,
    pub ridge_activations: usize,
    pub covered_pairs: Option<usize>,
    pub uncovered_pairs: Option<usize>,
}

fn adhoc_forms(r: &CvAucResult, se: &mut Vec<(String, f64)>) -> CliResult<()> {
    for (name, form) in [
        ("sd_var1", AdhocForm::Var1),
        ("sd_var2", AdhocForm::Var2),
        ("sd_var3", AdhocForm::Var3(Var3Criterion::Unbiased)),
    ] {
        let usable = r.per_rep.iter().all(|rep| match form {
            AdhocForm::Var2 => rep.matched.is_some(),
            _ => rep.pairs.is_some(),
        });
        if usable {
            se.push((name.into(), var_cvkr(&r.per_rep, form)?.sqrt()));
        }
    }
    Ok(())
}

pub fn cmd_estimate(a: &EstimateArgs) -> CliResult<Estimate> {
    let data = read_dataset(&a.data, a.label_column.as_deref())?;
    let spec = ClassifierSpec {
        kind: match a.classifier {
            ClassifierArg::Lda => ClassifierKind::Lda,
            ClassifierArg::Qda => ClassifierKind::Qda,
        },
        ridge: a.ridge,
    };
    spec.validate()?;
    let options = CvOptions {
        ties: TieRule::new(a.tie_tolerance)?,
        zero_den: match a.zero_den {
            PolicyArg::Strict => ZeroDenPolicy::Strict,
            PolicyArg::Skip => ZeroDenPolicy::Skip,
        },
    };
    let pairing = match a.pairing {
        PairingArg::Full => Pairing::Full,
        PairingArg::Matched => Pairing::Matched,
    };
    let remainder = if a.ragged { Remainder::Ragged } else { Remainder::Reject };
    let (n1, n2) = (data.n1(), data.n2());
    let mut se = Vec::new();
    let (result, k, reps, err, err_se);
    match a.mode {
        ModeArg::Cvn => {
            let r = auc_cvn(&data, &spec, &options)?;
            se.push(("sd_if".into(), if_sd_cvn_reduction(&r.per_obs_auc1, &r.per_obs_auc2, r.auc)?));
            let e = err_loo(&data, &spec)?;
            err = Some(e.err);
            err_se = Some(if_sd_err_cvn(&e.pooled_errors())?);
            result = r;
            k = None;
            reps = None;
        }
        ModeArg::Cvk => {
            let plan = plan_cvk(n1, n2, a.k, a.k, a.seed, remainder)?;
            let r = auc_cvk(&data, &spec, &plan, pairing, &options)?;
            adhoc_forms(&r, &mut se)?;
            let e = err_cvk(&data, &spec, &plan)?;
            err = Some(e.err);
            err_se = Some(cvsd_core::adhoc::naive_var_err_cvk(&e.fold_errors)?.sqrt());
            result = r;
            k = Some(a.k);
            reps = Some(1);
        }
        ModeArg::Cvkr => {
            let plan = plan_cvkr(n1, n2, a.k, a.r, a.seed, remainder)?;
            let r = auc_cvkr(&data, &spec, &plan, pairing, &options)?;
            adhoc_forms(&r, &mut se)?;
            se.push(("sd_if_i".into(), if_partial_cvkr(&r, &plan)?.sd_first_term));
            result = r;
            err = None;
            err_se = None;
            k = Some(a.k);
            reps = Some(a.r);
        }
        ModeArg::Cvkm => {
            let plan = plan_cvkm(n1, n2, a.k, a.m, a.seed, remainder)?;
            let r = auc_cvkm(&data, &spec, &plan, &options)?;
            let inf = if_sd_cvkm(&r, &plan)?;
            se.push(("sd_if".into(), inf.sd));
            se.push(("sd_if_i".into(), inf.sd_first_term));
            se.push(("sd_adhoc".into(), var_cvkm(&r.auc_11m, plan.k1(), plan.k2())?.sqrt()));
            result = r;
            err = None;
            err_se = None;
            k = Some(a.k);
            reps = Some(a.m);
        }
    }
    let is_mc = a.mode == ModeArg::Cvkm;
    let out = Estimate {
        schema_version: SCHEMA_VERSION,
        mode: format!("{:?}", a.mode).to_lowercase(),
        classifier: spec,
        n1,
        n2,
        p: data.dim(),
        k,
        repetitions: reps,
        seed: a.seed,
        auc: result.auc,
        se,
        err,
        err_se,
        trainings: result.diagnostics.trainings,
        ridge_activations: result.diagnostics.ridge_activations,
        covered_pairs: is_mc.then_some(result.diagnostics.valid_pairs),
        uncovered_pairs: is_mc.then_some(result.diagnostics.uncovered_pairs),
    };
    let text = serde_json::to_string_pretty(&out).map_err(Error::from)?;
    say!("{text}");
    if let Some(path) = &a.out {
        fs::write(path, format!("{text}\n"))?;
    }
    Ok(out)
}

pub fn cmd_components(a: &ComponentsArgs) -> CliResult<ComponentsReport> {
    let mut cfg = ComponentsConfig::from_json(&read(&a.config)?)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let r = estimate_components(&cfg)?;
    let c = &r.components;
    say!("n = {} (fold size {}), K = {}, trials = {}", r.n, r.n_k, r.k, r.n_mc);
    say!("sigma2            {:.6}", c.sigma2);
    say!("omega             {:.6}", c.omega);
    say!("gamma             {:.6}", c.gamma);
    say!("mu                {:.6}", c.mu);
    say!("MC var of error   {:.6} ± {:.6}", r.mc_var, r.mc_var_se);
    say!("decomposition     {:.6} ± {:.6}", r.reconstruction, r.reconstruction_se);
    say!("mean naive var    {:.6} ± {:.6}", r.mean_naive_var, r.mean_naive_var_se);
    say!("observed bias     {:+.6} ± {:.6}", r.observed_bias, r.observed_bias_se);
    say!("predicted -gamma  {:+.6}", r.predicted_bias);
    say!("difference        {:+.6} ± {:.6}", r.bias_gap, r.bias_gap_se);
    if let Some(path) = &a.out {
        let text = serde_json::to_string_pretty(&r).map_err(Error::from)?;
        fs::write(path, format!("{text}\n"))?;
    }
    Ok(r)
}

pub fn cmd_ratio(a: &RatioArgs) -> CliResult<Vec<(usize, f64)>> {
    if a.n_max < 2 {
        return Err(CliError::invalid("n_max must be at least 2"));
    }
    let rows: Vec<(usize, f64)> = (1..=a.n_max / 2)
        .map(|h| permutation_ratio(2 * h).map(|r| (2 * h, r)))
        .collect::<Result<_, _>>()?;
    let mut text = String::from("n,ratio\n");
    for (n, r) in &rows {
        text.push_str(&format!("{n},{r:e}\n"));
    }
    match &a.out {
        Some(path) => fs::write(path, &text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(rows)
}
