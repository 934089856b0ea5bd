//! Sweep evaluation. Every sweep point is computed independently and rows
//! come back in sweep order.

use std::time::Instant;

use rayon::prelude::*;

use qd_core::dist::inverse_gamma_moments;
use qd_core::mc::{
    empirical_inverse_power_moments, empirical_power_moments, empirical_projector_trace,
    empirical_quadform_moments, estimate_qd_prob,
};
use qd_core::qd::{qd_prob_quadrature, qd_prob_series_with, PairGeometry, SeriesSpec};
use qd_core::quadform::{expected_outer, expected_projector};
use qd_core::stream::derive_seed;
use qd_core::{QdError, QuadratureSpec};

use crate::config::{Experiment, ExperimentConfig};
use crate::CliError;

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub k_db: f64,
    pub beta_delta: f64,
    pub theta_delta_deg: f64,
}

/// One output row; `values` line up with [`Table::value_columns`].
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub point: Point,
    pub quantity: Option<&'static str>,
    pub values: Vec<Option<f64>>,
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub experiment: Experiment,
    pub value_columns: &'static [&'static str],
    pub rows: Vec<Row>,
}

pub const PROBABILITY_COLUMNS: &[&str] = &["analytic_quadrature", "analytic_series", "mc_value", "mc_std_error"];
pub const ESTIMATOR_COLUMNS: &[&str] = &["analytic", "mc_value", "mc_std_error"];

/// Sweep order: β_Δ outermost, then θ_Δ, then K, so each curve is contiguous.
pub fn points(cfg: &ExperimentConfig) -> Vec<Point> {
    let mut out = Vec::new();
    for &beta_delta in &cfg.beta_delta {
        for &theta_delta_deg in &cfg.theta_delta_deg {
            for &k_db in &cfg.k_db {
                out.push(Point {
                    k_db,
                    beta_delta,
                    theta_delta_deg,
                });
            }
        }
    }
    out
}

pub fn geometry(cfg: &ExperimentConfig, p: &Point) -> PairGeometry {
    PairGeometry {
        k_db: p.k_db,
        theta_1_deg: cfg.theta_1_deg,
        theta_delta_deg: p.theta_delta_deg,
        beta_delta: p.beta_delta,
        n_antennas: cfg.n_antennas,
        r_i: cfg.rates.0,
        r_j: cfg.rates.1,
    }
}

fn at(p: &Point, e: QdError) -> CliError {
    let ctx = format!(
        "K={} dB, beta_delta={}, theta_delta={} deg",
        p.k_db, p.beta_delta, p.theta_delta_deg
    );
    if e.is_numerical() {
        CliError::Numerical(format!("{ctx}: {e}"))
    } else {
        CliError::Config(format!("{ctx}: {e}"))
    }
}

/// Evaluates every sweep point of `cfg` on the current thread pool.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let pts = points(cfg);
    let per_point: Vec<Vec<Row>> = pts
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let start = Instant::now();
            let seed = derive_seed(cfg.seed, idx as u64);
            let mut rows = eval_point(cfg, p, seed).map_err(|e| at(p, e))?;
            if cfg.timing {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                for r in &mut rows {
                    r.runtime_ms = Some(ms);
                }
            }
            Ok(rows)
        })
        .collect::<Result<_, CliError>>()?;
    Ok(Table {
        experiment: cfg.experiment,
        value_columns: if cfg.experiment.is_probability() {
            PROBABILITY_COLUMNS
        } else {
            ESTIMATOR_COLUMNS
        },
        rows: per_point.concat(),
    })
}

fn row(point: &Point, quantity: Option<&'static str>, values: Vec<Option<f64>>) -> Row {
    Row {
        point: *point,
        quantity,
        values,
        runtime_ms: None,
    }
}

fn when<T>(on: bool, f: impl FnOnce() -> qd_core::Result<T>) -> qd_core::Result<Option<T>> {
    if on {
        f().map(Some)
    } else {
        Ok(None)
    }
}

fn eval_point(cfg: &ExperimentConfig, p: &Point, seed: u64) -> qd_core::Result<Vec<Row>> {
    let s = geometry(cfg, p).scenario()?;
    let m = cfg.methods;
    let n = cfg.samples;
    let quad = QuadratureSpec::default();
    let rows = match cfg.experiment {
        Experiment::Fig2 | Experiment::Fig3 | Experiment::Custom => {
            let q = when(m.quadrature, || Ok(qd_prob_quadrature(&s, &quad)?.probability))?;
            let series = if m.series {
                match qd_prob_series_with(&s, &SeriesSpec::default()) {
                    Ok(r) => Some(r.probability),
                    Err(QdError::SeriesDivergence { .. }) => None,
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            let (mv, me) = if m.mc {
                let e = estimate_qd_prob(&s, n, seed)?;
                (Some(e.value), Some(e.std_error))
            } else {
                (None, None)
            };
            vec![row(p, None, vec![q, series, mv, me])]
        }
        Experiment::Fig4 => {
            let user = &s.user_i;
            let g = qd_core::channel::power_surrogate(user);
            let inv = inverse_gamma_moments(&g).ok();
            let (pm, im) = if m.mc {
                (
                    Some(empirical_power_moments(user, n, seed)?),
                    Some(empirical_inverse_power_moments(user, n, seed)?),
                )
            } else {
                (None, None)
            };
            let an = |v: Option<f64>| if m.quadrature { v } else { None };
            vec![
                row(p, Some("power_mean"), vec![an(Some(g.mean())), pm.map(|e| e.mean), pm.map(|e| e.mean_std_error)]),
                row(p, Some("power_var"), vec![an(Some(g.var())), pm.map(|e| e.variance), pm.map(|e| e.variance_std_error)]),
                row(p, Some("inv_power_mean"), vec![an(inv.map(|x| x.0)), im.map(|e| e.mean), im.map(|e| e.mean_std_error)]),
                row(p, Some("inv_power_var"), vec![an(inv.map(|x| x.1)), im.map(|e| e.variance), im.map(|e| e.variance_std_error)]),
            ]
        }
        Experiment::Fig5 => {
            let user = &s.user_j;
            let outer = when(m.quadrature, || Ok(expected_outer(user).trace()))?;
            let proj = when(m.quadrature, || Ok(expected_projector(user)?.trace()))?;
            let t = if m.mc { Some(empirical_projector_trace(user, n, seed)?) } else { None };
            vec![
                row(p, Some("trace_outer"), vec![outer, t.map(|t| t.outer.value), t.map(|t| t.outer.std_error)]),
                row(p, Some("trace_projector"), vec![proj, t.map(|t| t.projector.value), t.map(|t| t.projector.std_error)]),
            ]
        }
        Experiment::Fig6 | Experiment::Fig7 => {
            let v = when(m.quadrature, || Ok(s.surrogates()?.v))?;
            let e = if m.mc { Some(empirical_quadform_moments(&s, n, seed)?) } else { None };
            if cfg.experiment == Experiment::Fig6 {
                vec![row(p, Some("quadform_mean"), vec![v.map(|v| v.mean()), e.map(|e| e.mean), e.map(|e| e.mean_std_error)])]
            } else {
                vec![row(p, Some("quadform_var"), vec![v.map(|v| v.var()), e.map(|e| e.variance), e.map(|e| e.variance_std_error)])]
            }
        }
    };
    Ok(rows)
}
