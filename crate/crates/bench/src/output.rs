//! Campaign outputs: one trace CSV per trial, a versioned JSON summary and a
//! gnuplot-ready residual file.
//!
//! Layout under `out_dir/<label>/`:
//! * `trial_NNN.csv` with header `iter,f,gnorm_scaled,alpha,q_applies,f_evals,g_evals`
//! * `summary.json`
//! * `residuals.dat`: `iter gnorm_scaled` rows, one block per trial, blocks
//!   separated by two blank lines (gnuplot `index`)
//! * `config.txt`: the resolved configuration

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use npqn_core::trace::TraceRecord;

use crate::config::ExperimentConfig;
use crate::runner::{Campaign, Summary, TrialResult};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;
pub const TRACE_HEADER: &str = "iter,f,gnorm_scaled,alpha,q_applies,f_evals,g_evals";

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("trace line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("summary serialization: {0}")]
    Json(#[from] serde_json::Error),
}

/// Floats use the shortest representation that parses back to the same
/// bits.
pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut s = String::with_capacity(64 * (trace.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in trace {
        let _ = writeln!(s, "{},{:?},{:?},{:?},{},{},{}", r.k, r.f, r.gnorm_scaled, r.alpha, r.q_applies, r.f_evals, r.g_evals);
    }
    s
}

/// Parses [`trace_csv`] output. Flags are not stored and come back as 0.
pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>, OutputError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => return Err(OutputError::Parse { line: 1, reason: "missing header".into() }),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |reason: String| OutputError::Parse { line: i + 1, reason };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", f.len())));
        }
        let int = |s: &str| s.trim().parse::<usize>().map_err(|e| err(e.to_string()));
        let flt = |s: &str| s.trim().parse::<f64>().map_err(|e| err(e.to_string()));
        out.push(TraceRecord {
            k: int(f[0])?,
            f: flt(f[1])?,
            gnorm_scaled: flt(f[2])?,
            alpha: flt(f[3])?,
            flags: 0,
            q_applies: int(f[4])?,
            f_evals: int(f[5])?,
            g_evals: int(f[6])?,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    schema_version: u32,
    label: String,
    config: &'a ExperimentConfig,
    summary: &'a Summary,
    trials: &'a [TrialResult],
}

pub fn summary_json(campaign: &Campaign) -> Result<String, OutputError> {
    let doc = SummaryDoc {
        schema_version: SUMMARY_SCHEMA_VERSION,
        label: campaign.config.run_label(),
        config: &campaign.config,
        summary: &campaign.summary,
        trials: &campaign.trials,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn residual_dat(campaign: &Campaign) -> String {
    let mut s = format!("# {}: iter gnorm_scaled\n", campaign.config.run_label());
    for (i, t) in campaign.trials.iter().enumerate() {
        if i > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# trial {}", t.trial);
        for r in &t.trace {
            let _ = writeln!(s, "{} {:?}", r.k, r.gnorm_scaled);
        }
    }
    s
}

fn write(path: &Path, text: &str) -> Result<(), OutputError> {
    std::fs::write(path, text).map_err(|source| OutputError::Write { path: path.to_path_buf(), source })
}

/// Writes every output file and returns the campaign directory. Files are
/// written in trial order by the calling thread.
pub fn emit_outputs(campaign: &Campaign) -> Result<PathBuf, OutputError> {
    let dir = campaign.config.out_dir.join(campaign.config.run_label());
    std::fs::create_dir_all(&dir).map_err(|source| OutputError::Write { path: dir.clone(), source })?;
    for t in &campaign.trials {
        write(&dir.join(format!("trial_{:03}.csv", t.trial)), &trace_csv(&t.trace))?;
    }
    write(&dir.join("summary.json"), &summary_json(campaign)?)?;
    write(&dir.join("residuals.dat"), &residual_dat(campaign))?;
    write(&dir.join("config.txt"), &campaign.config.to_text())?;
    Ok(dir)
}
