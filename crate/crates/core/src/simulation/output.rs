//! Report files: a wide CSV with one row per study cell, a long CSV of
//! per-trial values, and the full report as JSON.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::study::{StudyReport, TrialOutcome};
use crate::error::{Error, Result};

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("csv: {other:?}")),
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Header and values of the wide report row.
pub fn report_columns(report: &StudyReport) -> Vec<(String, String)> {
    let cfg = &report.config;
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    let mut cols: Vec<(String, String)> = vec![
        ("classifier".into(), format!("{:?}", cfg.classifier.kind).to_lowercase()),
        ("n1".into(), cfg.n1.to_string()),
        ("n2".into(), cfg.n2.to_string()),
        ("p".into(), cfg.p.to_string()),
        ("c".into(), opt(cfg.c)),
        ("bayes_auc".into(), opt(cfg.bayes_auc)),
        ("k".into(), cfg.k.to_string()),
        ("m".into(), cfg.m.to_string()),
        ("r".into(), cfg.r.to_string()),
        ("n_mc".into(), cfg.n_mc.to_string()),
        ("seed".into(), cfg.seed.to_string()),
        ("trials".into(), report.trials.to_string()),
        ("failed_trials".into(), report.failed_trials.to_string()),
        ("true_auc".into(), opt(report.mean_true_auc)),
    ];
    for e in &report.estimators {
        let name = &e.estimator;
        cols.push((format!("{name}_auc"), fmt(e.mean_auc)));
        cols.push((format!("{name}_auc_mc_se"), fmt(e.mean_auc_mc_se)));
        cols.push((format!("{name}_true_sd"), fmt(e.true_sd)));
        cols.push((format!("{name}_true_sd_mc_se"), fmt(e.true_sd_mc_se)));
        for s in &e.se {
            let base = format!("{name}_{}", s.name);
            for (suffix, v) in [
                ("mean", s.mean),
                ("mean_mc_se", s.mean_mc_se),
                ("sd", s.sd),
                ("bias", s.bias),
                ("rms", s.rms),
                ("norm_mean", s.norm_mean),
                ("norm_bias", s.norm_bias),
                ("norm_sd", s.norm_sd),
                ("norm_rms", s.norm_rms),
            ] {
                cols.push((format!("{base}_{suffix}"), fmt(v)));
            }
        }
    }
    cols
}

pub fn write_report_csv(report: &StudyReport, path: &Path) -> Result<()> {
    let cols = report_columns(report);
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(cols.iter().map(|c| c.0.as_str())).map_err(csv_error)?;
    w.write_record(cols.iter().map(|c| c.1.as_str())).map_err(csv_error)?;
    w.flush()?;
    Ok(())
}

/// Columns `trial,estimator,quantity,value`.
pub fn write_trials_csv(trials: &[TrialOutcome], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["trial", "estimator", "quantity", "value"]).map_err(csv_error)?;
    for t in trials {
        let trial = t.trial.to_string();
        for v in &t.values {
            w.write_record([trial.as_str(), &v.estimator, &v.quantity, &fmt(v.value)])
                .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_json(report: &StudyReport, path: &Path) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, report)?;
    writeln!(f)?;
    Ok(())
}
