//! Monte-Carlo estimators.
//!
//! Trials are cut into chunks of [`CHUNK`] draws. Chunk `c` reads from
//! `stream(seed, c)` and the per-chunk results are merged in chunk order,
//! so every estimate depends on `(seed, n)` only and not on how many
//! workers ran it.

use rayon::prelude::*;

use crate::channel::{ChannelParams, ChannelSampler, ChannelVector};
use crate::error::{QdError, Result};
use crate::qd::{indicator_raw, QdScenario};
use crate::quadform::HermitianMatrix;
use crate::stream::{stream, StreamRng};
use crate::C64;

/// Draws per chunk.
pub const CHUNK: usize = 8192;

/// Smallest accepted sample count.
pub const MIN_SAMPLES: usize = 1000;

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Sample mean and sample variance, each with a standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub mean_std_error: f64,
    pub variance: f64,
    pub variance_std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl MomentEstimate {
    /// Two-pass moments of `xs`; the variance error uses the fourth central
    /// moment, `√((m₄ − s⁴)/n)`.
    fn from_samples(xs: &[f64], seed: u64) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &x in xs {
            let d2 = (x - mean) * (x - mean);
            m2 += d2;
            m4 += d2 * d2;
        }
        let variance = m2 / (n - 1.0);
        let m4 = m4 / n;
        Self {
            mean,
            mean_std_error: (variance / n).sqrt(),
            variance,
            variance_std_error: ((m4 - variance * variance).max(0.0) / n).sqrt(),
            n_samples: xs.len(),
            seed,
        }
    }
}

/// `tr(Π_g)` and `tr(g gᴴ)` sample means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorTrace {
    pub projector: McEstimate,
    pub outer: McEstimate,
    /// Largest `|tr(Π_g) − 1|` over all draws.
    pub max_projector_deviation: f64,
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(QdError::InvalidParameter(format!(
            "Monte-Carlo sample count {n} is below {MIN_SAMPLES}"
        )));
    }
    Ok(())
}

/// Runs `f(rng, len)` for every chunk in parallel and returns the results
/// in chunk order.
fn per_chunk<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(n - c * CHUNK);
            f(&mut stream(seed, c as u64), len)
        })
        .collect()
}

/// Per-draw samples of `f(g)` for one user, in draw order.
fn single_user_samples<F>(p: &ChannelParams, n: usize, seed: u64, f: F) -> Vec<f64>
where
    F: Fn(&[C64]) -> f64 + Sync,
{
    let sampler = p.sampler();
    per_chunk(n, seed, |rng, len| {
        let mut g = vec![C64::new(0.0, 0.0); sampler.n_antennas()];
        (0..len)
            .map(|_| {
                sampler.sample_into(rng, &mut g);
                f(&g)
            })
            .collect::<Vec<_>>()
    })
    .concat()
}

/// Draws `g_i` then `g_j` independently for every trial.
fn pair_samples<T, F>(s: &QdScenario, n: usize, seed: u64, f: F) -> Vec<Vec<T>>
where
    T: Send,
    F: Fn(&[C64], &[C64]) -> T + Sync,
{
    let (si, sj): (ChannelSampler, ChannelSampler) = (s.user_i.sampler(), s.user_j.sampler());
    let dim = si.n_antennas();
    per_chunk(n, seed, |rng, len| {
        let mut gi = vec![C64::new(0.0, 0.0); dim];
        let mut gj = vec![C64::new(0.0, 0.0); dim];
        (0..len)
            .map(|_| {
                si.sample_into(rng, &mut gi);
                sj.sample_into(rng, &mut gj);
                f(&gi, &gj)
            })
            .collect()
    })
}

/// Fraction of `n` sampled channel pairs that are quasi-degraded.
pub fn estimate_qd_prob(s: &QdScenario, n: usize, seed: u64) -> Result<McEstimate> {
    check_samples(n)?;
    let (r_i, r_j) = (s.r_i, s.r_j);
    let hits: u64 = pair_samples(s, n, seed, |gi, gj| indicator_raw(gi, gj, r_i, r_j))
        .iter()
        .map(|c| c.iter().filter(|&&b| b).count() as u64)
        .sum();
    let p = hits as f64 / n as f64;
    Ok(McEstimate {
        value: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        n_samples: n,
        seed,
    })
}

/// Sample mean and variance of `‖g‖²`.
pub fn empirical_power_moments(p: &ChannelParams, n: usize, seed: u64) -> Result<MomentEstimate> {
    check_samples(n)?;
    let xs = single_user_samples(p, n, seed, |g| g.iter().map(|z| z.norm_sqr()).sum());
    Ok(MomentEstimate::from_samples(&xs, seed))
}

/// Sample mean and variance of `Ψ = ‖g‖⁻²`.
pub fn empirical_inverse_power_moments(p: &ChannelParams, n: usize, seed: u64) -> Result<MomentEstimate> {
    check_samples(n)?;
    let xs = single_user_samples(p, n, seed, |g| 1.0 / g.iter().map(|z| z.norm_sqr()).sum::<f64>());
    Ok(MomentEstimate::from_samples(&xs, seed))
}

/// Sample means of `tr(Π_g)` and `tr(g gᴴ)`. The projector is formed
/// explicitly for every draw.
pub fn empirical_projector_trace(p: &ChannelParams, n: usize, seed: u64) -> Result<ProjectorTrace> {
    check_samples(n)?;
    let pairs: Vec<(f64, f64)> = {
        let sampler = p.sampler();
        per_chunk(n, seed, |rng, len| {
            let mut g = vec![C64::new(0.0, 0.0); sampler.n_antennas()];
            (0..len)
                .map(|_| {
                    sampler.sample_into(rng, &mut g);
                    let v = ChannelVector::new(g.clone()).expect("finite draw");
                    let outer = HermitianMatrix::outer(&v).trace();
                    let proj = HermitianMatrix::projector(&v).expect("nonzero draw").trace();
                    (proj, outer)
                })
                .collect::<Vec<_>>()
        })
        .concat()
    };
    let proj: Vec<f64> = pairs.iter().map(|x| x.0).collect();
    let outer: Vec<f64> = pairs.iter().map(|x| x.1).collect();
    let max_dev = proj.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
    let as_est = |xs: &[f64]| {
        let m = MomentEstimate::from_samples(xs, seed);
        McEstimate {
            value: m.mean,
            std_error: m.mean_std_error,
            n_samples: n,
            seed,
        }
    };
    Ok(ProjectorTrace {
        projector: as_est(&proj),
        outer: as_est(&outer),
        max_projector_deviation: max_dev,
    })
}

/// Sample mean and variance of `g_iᴴ Π_{g_j} g_i = |g_jᴴ g_i|²/‖g_j‖²` over
/// independent pairs.
pub fn empirical_quadform_moments(s: &QdScenario, n: usize, seed: u64) -> Result<MomentEstimate> {
    check_samples(n)?;
    let xs = pair_samples(s, n, seed, |gi, gj| {
        let nj: f64 = gj.iter().map(|z| z.norm_sqr()).sum();
        crate::channel::inner(gj, gi).norm_sqr() / nj
    })
    .concat();
    Ok(MomentEstimate::from_samples(&xs, seed))
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| QdError::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn dpc_parts(gi: &ChannelVector, gj: &ChannelVector) -> Result<(f64, f64, f64)> {
    let ni = gi.norm_sqr();
    let nj = gj.norm_sqr();
    if ni == 0.0 || nj == 0.0 {
        return Err(QdError::ZeroVector);
    }
    let theta = crate::qd::cos2_angle(gi, gj)?;
    Ok((ni, nj, theta))
}

/// DPC power `r_j/‖g_j‖² + (r_i/‖g_i‖²)(1+r_j)/(1 + r_j sin Θ)` with `Θ` the
/// squared cosine between the channels. `sin` is applied to `Θ` itself.
pub fn dpc_power(gi: &ChannelVector, gj: &ChannelVector, r_i: f64, r_j: f64) -> Result<f64> {
    let (ni, nj, theta) = dpc_parts(gi, gj)?;
    Ok(r_j / nj + (r_i / ni) * (1.0 + r_j) / (1.0 + r_j * theta.sin()))
}

/// Non-canonical reading of [`dpc_power`] with `sin²(Θ)` in place of
/// `sin(Θ)`, for side-by-side diagnostics only.
pub fn dpc_power_sin_squared(gi: &ChannelVector, gj: &ChannelVector, r_i: f64, r_j: f64) -> Result<f64> {
    let (ni, nj, theta) = dpc_parts(gi, gj)?;
    let s = theta.sin();
    Ok(r_j / nj + (r_i / ni) * (1.0 + r_j) / (1.0 + r_j * s * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample, steering_vector};
    use crate::qd::{qd_indicator, qd_prob_quadrature, PairGeometry};
    use crate::specfn::QuadratureSpec;
    use proptest::prelude::*;

    fn vector(entries: &[(f64, f64)]) -> ChannelVector {
        ChannelVector::new(entries.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn small_sample_counts_are_rejected() {
        let s = PairGeometry::default().scenario().unwrap();
        assert!(estimate_qd_prob(&s, 999, 1).is_err());
        assert!(estimate_qd_prob(&s, 1000, 1).is_ok());
    }

    #[test]
    fn worker_count_does_not_change_estimate() {
        let s = PairGeometry {
            beta_delta: 5.0,
            ..PairGeometry::default()
        }
        .scenario()
        .unwrap();
        let one = with_workers(1, || estimate_qd_prob(&s, 200_000, 42)).unwrap().unwrap();
        let eight = with_workers(8, || estimate_qd_prob(&s, 200_000, 42)).unwrap().unwrap();
        assert_eq!(one.value.to_bits(), eight.value.to_bits());
        let m1 = with_workers(1, || empirical_quadform_moments(&s, 50_000, 3)).unwrap().unwrap();
        let m8 = with_workers(8, || empirical_quadform_moments(&s, 50_000, 3)).unwrap().unwrap();
        assert_eq!(m1, m8);
    }

    #[test]
    fn chunk_boundaries_do_not_matter_for_length() {
        let p = ChannelParams::from_db_degrees(1.0, 0.0, 30.0, 4).unwrap();
        let m = empirical_power_moments(&p, CHUNK * 2 + 17, 5).unwrap();
        assert_eq!(m.n_samples, CHUNK * 2 + 17);
    }

    #[test]
    fn rayleigh_estimate_matches_quadrature() {
        for beta_delta in [1.0, 5.0, 25.0] {
            let s = PairGeometry {
                beta_delta,
                ..PairGeometry::default()
            }
            .scenario()
            .unwrap();
            let q = qd_prob_quadrature(&s, &QuadratureSpec::default()).unwrap();
            let mc = estimate_qd_prob(&s, 200_000, 11).unwrap();
            let gap = (mc.value - q.probability).abs();
            // The surrogate for Θ puts mass above 1 that the integral drops;
            // for a strong user i that mass is mostly QD mass.
            let slack = if beta_delta > 5.0 { q.theta_tail_mass } else { 0.0 };
            assert!(
                gap <= 3.0 * mc.std_error + 0.02 + slack,
                "β_Δ={beta_delta}: mc {} vs {}",
                mc.value,
                q.probability
            );
        }
    }

    #[test]
    fn strong_user_high_k_is_nearly_always_degraded() {
        let s = PairGeometry {
            k_db: 10.0,
            beta_delta: 1e4,
            ..PairGeometry::default()
        }
        .scenario()
        .unwrap();
        assert!(estimate_qd_prob(&s, 20_000, 2).unwrap().value > 0.99);
    }

    #[test]
    fn power_mean_is_n_beta() {
        let p = ChannelParams::from_db_degrees(3.0, 10.0, 30.0, 4).unwrap();
        let m = empirical_power_moments(&p, 200_000, 8).unwrap();
        assert!((m.mean - 12.0).abs() < 4.0 * m.mean_std_error);
    }

    #[test]
    fn power_variance_matches_component_sum() {
        // V[|g_n|²] = 2σ²(σ² + 2|m_n|²) per real component pair, σ² = β/(2(K+1))
        let p = ChannelParams::from_db_degrees(1.0, 7.0, 30.0, 4).unwrap();
        let k = p.k_factor();
        let s2 = 1.0 / (2.0 * (k + 1.0));
        let mean_sq = k / (k + 1.0);
        let expect = 4.0 * (2.0 * s2 * s2 * 2.0 + 4.0 * s2 * mean_sq);
        let m = empirical_power_moments(&p, 400_000, 9).unwrap();
        assert!((m.variance - expect).abs() < 4.0 * m.variance_std_error, "{} vs {expect}", m.variance);
    }

    #[test]
    fn inverse_power_matches_rayleigh_closed_form() {
        // ‖g‖² ~ Γ(N, β) exactly at K = 0
        let p = ChannelParams::from_db_degrees(2.0, f64::NEG_INFINITY, 0.0, 6).unwrap();
        let m = empirical_inverse_power_moments(&p, 200_000, 12).unwrap();
        let (mean, var) = crate::dist::inverse_gamma_moments(&crate::GammaSurrogate::new(6.0, 2.0).unwrap()).unwrap();
        assert!((m.mean - mean).abs() < 4.0 * m.mean_std_error);
        assert!((m.variance - var).abs() < 4.0 * m.variance_std_error);
    }

    #[test]
    fn projector_trace_is_one_per_draw() {
        let p = ChannelParams::from_db_degrees(2.0, 0.0, 10.0, 4).unwrap();
        let t = empirical_projector_trace(&p, 20_000, 4).unwrap();
        assert!(t.max_projector_deviation < 1e-10);
        assert!((t.outer.value - 8.0).abs() < 4.0 * t.outer.std_error);
    }

    #[test]
    fn quadform_variance_vanishes_for_pure_los() {
        let s = PairGeometry {
            k_db: 80.0,
            ..PairGeometry::default()
        }
        .scenario()
        .unwrap();
        let m = empirical_quadform_moments(&s, 5_000, 6).unwrap();
        assert!(m.variance < 1e-6, "{}", m.variance);
        let a = steering_vector(&s.user_i);
        let b = steering_vector(&s.user_j);
        let los = a.inner(&b).unwrap().norm_sqr() / 4.0;
        assert!((m.mean - los).abs() < 1e-3);
    }

    #[test]
    fn dpc_orthogonal_and_printed_example() {
        let gi = vector(&[(2.0, 0.0), (0.0, 0.0)]);
        let gj = vector(&[(0.0, 0.0), (0.0, 3.0)]);
        let v = dpc_power(&gi, &gj, 1.5, 0.5).unwrap();
        assert!((v - (0.5 / 9.0 + 1.5 * 1.5 / 4.0)).abs() < 1e-15);

        // ‖g_i‖² = 180.5, ‖g_j‖² = 13.5, Θ = 0.236
        let c = 0.236f64.sqrt();
        let gi = vector(&[(180.5f64.sqrt() * c, 0.0), (180.5f64.sqrt() * (1.0 - c * c).sqrt(), 0.0)]);
        let gj = vector(&[(13.5f64.sqrt(), 0.0), (0.0, 0.0)]);
        let expect = 1.0 / 13.5 + (1.0 / 180.5) * 2.0 / (1.0 + 0.236f64.sin());
        let v = dpc_power(&gi, &gj, 1.0, 1.0).unwrap();
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 0.0830546).abs() < 1e-6);
        let s2 = dpc_power_sin_squared(&gi, &gj, 1.0, 1.0).unwrap();
        assert!(s2 > v);
        assert_eq!(dpc_power(&gi, &vector(&[(0.0, 0.0), (0.0, 0.0)]), 1.0, 1.0), Err(QdError::ZeroVector));
    }

    proptest! {
        #[test]
        fn dpc_is_homogeneous(c in 0.1f64..10.0, seed in 0u64..1000) {
            let p = ChannelParams::from_db_degrees(1.0, 3.0, 20.0, 4).unwrap();
            let mut rng = stream(seed, 0);
            let gi = sample(&p, &mut rng);
            let gj = sample(&p, &mut rng);
            let base = dpc_power(&gi, &gj, 1.0, 2.0).unwrap();
            let scaled = dpc_power(&gi.scaled(c.sqrt()), &gj.scaled(c.sqrt()), 1.0, 2.0).unwrap();
            prop_assert!((scaled - base / c).abs() <= 1e-10 * base);
        }

        #[test]
        fn indicator_is_scale_invariant(c in 1e-3f64..1e3, seed in 0u64..10_000, k_db in 0.0f64..10.0) {
            let pi = ChannelParams::from_db_degrees(10.0, k_db, 30.0, 4).unwrap();
            let pj = ChannelParams::from_db_degrees(1.0, k_db, 40.0, 4).unwrap();
            let mut rng = stream(seed, 1);
            let gi = sample(&pi, &mut rng);
            let gj = sample(&pj, &mut rng);
            let a = qd_indicator(&gi, &gj, 1.0, 1.0).unwrap();
            let b = qd_indicator(&gi.scaled(c), &gj.scaled(c), 1.0, 1.0).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
