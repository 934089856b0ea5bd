//! Experiment runner for the QD-probability sweeps.
//!
//! `run` evaluates one experiment and writes `<out>/<experiment>.csv` (and an
//! SVG plot unless disabled); `validate_report` resolves a configuration and
//! lists anything suspicious about it without computing anything.

pub mod config;
pub mod csv;
pub mod experiment;
pub mod plot;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qd_core::channel::db_to_linear;

pub use config::{Experiment, ExperimentConfig};
pub use experiment::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub csv_path: PathBuf,
    pub svg_path: Option<PathBuf>,
    pub table: Table,
}

/// Evaluates `cfg` on `cfg.workers` threads (or the global pool when 0).
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    cfg.validate()?;
    if cfg.workers == 0 {
        experiment::evaluate(cfg)
    } else {
        qd_core::mc::with_workers(cfg.workers, || experiment::evaluate(cfg))
            .map_err(|e| CliError::Config(format!("key 'workers': {e}")))?
    }
}

/// Evaluates `cfg` and writes its artifacts into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutput, CliError> {
    let table = evaluate(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let csv_path = out_dir.join(format!("{}.csv", cfg.experiment));
    std::fs::write(&csv_path, csv::render(&table)).map_err(|e| CliError::io(&csv_path, e))?;
    let svg_path = if cfg.plots {
        let p = out_dir.join(format!("{}.svg", cfg.experiment));
        std::fs::write(&p, plot::render(&table)).map_err(|e| CliError::io(&p, e))?;
        Some(p)
    } else {
        None
    };
    Ok(RunOutput {
        csv_path,
        svg_path,
        table,
    })
}

/// Resolved configuration, unit conversions and warnings. Returns the
/// report and the number of warnings.
pub fn validate_report(cfg: &ExperimentConfig) -> (String, usize) {
    let mut out = String::new();
    let _ = writeln!(out, "# resolved configuration");
    out.push_str(&cfg.render());
    if let Err(e) = cfg.validate() {
        let _ = writeln!(out, "\nerror: {e}");
        return (out, 1);
    }
    let _ = writeln!(out, "\n# conversions");
    for &k in &cfg.k_db {
        let _ = writeln!(out, "K = {k} dB -> {} linear", db_to_linear(k));
    }
    let _ = writeln!(out, "theta_1 = {} deg -> {} rad", cfg.theta_1_deg, cfg.theta_1_deg.to_radians());
    for &d in &cfg.theta_delta_deg {
        let t2 = cfg.theta_1_deg + d;
        let _ = writeln!(out, "theta_2 = {t2} deg -> {} rad", t2.to_radians());
    }
    let mut warnings: Vec<String> = Vec::new();
    for p in experiment::points(cfg) {
        match experiment::geometry(cfg, &p).scenario() {
            Ok(s) => {
                for w in s.warnings() {
                    let line = format!("K={} dB, beta_delta={}: {w}", p.k_db, p.beta_delta);
                    if !warnings.contains(&line) {
                        warnings.push(line);
                    }
                }
            }
            Err(e) => warnings.push(format!(
                "K={} dB, beta_delta={}, theta_delta={} deg: {e}",
                p.k_db, p.beta_delta, p.theta_delta_deg
            )),
        }
    }
    let _ = writeln!(out, "\n# warnings");
    if warnings.is_empty() {
        let _ = writeln!(out, "none");
    }
    for w in &warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    (out, warnings.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(e: Experiment) -> ExperimentConfig {
        let mut c = ExperimentConfig::preset(e);
        c.set("samples", "2000").unwrap();
        c.set("k_db", "0,5,10").unwrap();
        c
    }

    #[test]
    fn table_one_defaults_have_no_warnings() {
        let (_, n) = validate_report(&ExperimentConfig::preset(Experiment::Custom));
        assert_eq!(n, 0);
    }

    #[test]
    fn weak_first_user_warns() {
        let mut c = ExperimentConfig::preset(Experiment::Custom);
        c.set("beta_delta", "0.5").unwrap();
        let (text, n) = validate_report(&c);
        assert!(n > 0);
        assert!(text.contains("not decoded first"), "{text}");
    }

    #[test]
    fn small_shape_warns() {
        let mut c = ExperimentConfig::preset(Experiment::Custom);
        c.set("n_antennas", "2").unwrap();
        c.set("k_db", "-100").unwrap();
        c.set("beta_delta", "0.01").unwrap();
        let (text, _) = validate_report(&c);
        assert!(text.contains("shape"), "{text}");
    }

    #[test]
    fn every_experiment_produces_rows() {
        for e in Experiment::ALL {
            let t = evaluate(&quick(e)).unwrap();
            assert!(!t.rows.is_empty());
            for r in &t.rows {
                assert_eq!(r.values.len(), t.value_columns.len());
                assert!(r.runtime_ms.is_none());
            }
            let text = csv::render(&t);
            assert!(!text.contains('\r'));
            assert_eq!(text.lines().count(), t.rows.len() + 1);
            assert!(plot::render(&t).starts_with("<svg"));
        }
    }

    #[test]
    fn fig2_rows_follow_schema() {
        let t = evaluate(&quick(Experiment::Fig2)).unwrap();
        let text = csv::render(&t);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k_db,beta_delta,theta_delta_deg,analytic_quadrature,analytic_series,mc_value,mc_std_error,runtime_ms"
        );
        assert_eq!(t.rows.len(), 6);
        // β_Δ ≥ 5 gives θ_W/θ_S ≥ 1, so the series column stays empty
        assert!(t.rows.iter().all(|r| r.values[1].is_none()));
    }

    #[test]
    fn timing_fills_runtime() {
        let mut c = quick(Experiment::Fig5);
        c.set("timing", "true").unwrap();
        let t = evaluate(&c).unwrap();
        assert!(t.rows.iter().all(|r| r.runtime_ms.is_some()));
    }

    #[test]
    fn unusable_configs_exit_with_config_code() {
        let mut c = quick(Experiment::Custom);
        c.set("n_antennas", "2").unwrap();
        c.set("k_db", "-100").unwrap();
        let e = evaluate(&c).unwrap_err();
        assert_eq!(e.exit_code(), 2, "{e}");
        let mut c = quick(Experiment::Custom);
        c.k_db.clear();
        assert_eq!(evaluate(&c).unwrap_err().exit_code(), 2);
    }
}
