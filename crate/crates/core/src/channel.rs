//! MISO Rician channel model over a half-wavelength uniform linear array.
//!
//! `g = √β (√(1/(K+1)) h + √(K/(K+1)) a)` with `h ~ CN(0, I)` and `a` the
//! ULA steering vector. Antennas are indexed from 0, so entry `n` of `a` has
//! phase `φ_n = n·π·sin θ` and `a[0] = 1`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Index;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dist::{squared_gaussian_surrogate, sum_match, GammaSurrogate};
use crate::error::{QdError, Result};
use crate::C64;

/// Converts a ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One user's large-scale channel description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    beta: f64,
    k_factor: f64,
    theta: f64,
    n_antennas: usize,
}

impl ChannelParams {
    /// `beta` is the linear path-loss gain, `k_factor` the linear Rician
    /// factor, `theta` the azimuth in radians.
    pub fn new(beta: f64, k_factor: f64, theta: f64, n_antennas: usize) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(QdError::InvalidParameter(format!(
                "path-loss gain must be positive and finite (got {beta})"
            )));
        }
        if !(k_factor >= 0.0) || !k_factor.is_finite() {
            return Err(QdError::InvalidParameter(format!(
                "Rician factor must be nonnegative and finite (got {k_factor})"
            )));
        }
        if !(theta > -FRAC_PI_2 && theta <= FRAC_PI_2) {
            return Err(QdError::InvalidParameter(format!(
                "azimuth must lie in (-pi/2, pi/2] (got {theta})"
            )));
        }
        if n_antennas < 2 {
            return Err(QdError::InvalidParameter(format!(
                "at least two antennas are required (got {n_antennas})"
            )));
        }
        Ok(Self {
            beta,
            k_factor,
            theta,
            n_antennas,
        })
    }

    /// Boundary constructor: Rician factor in dB, azimuth in degrees.
    pub fn from_db_degrees(beta: f64, k_db: f64, theta_deg: f64, n_antennas: usize) -> Result<Self> {
        Self::new(beta, db_to_linear(k_db), theta_deg.to_radians(), n_antennas)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn k_factor(&self) -> f64 {
        self.k_factor
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    /// Same channel with the path-loss gain multiplied by `c`.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(beta, self.k_factor, self.theta, self.n_antennas)
    }

    /// Phase `φ_n = n·π·sin θ` of antenna `n`.
    pub fn phase(&self, n: usize) -> f64 {
        n as f64 * PI * self.theta.sin()
    }

    /// Amplitude of the LOS part, `√(βK/(K+1))`.
    fn los_amplitude(&self) -> f64 {
        (self.beta * self.k_factor / (self.k_factor + 1.0)).sqrt()
    }

    /// Per-entry NLOS power `β/(K+1)`.
    fn nlos_power(&self) -> f64 {
        self.beta / (self.k_factor + 1.0)
    }

    pub fn sampler(&self) -> ChannelSampler {
        let (mean, cov_scale) = mean_and_cov(self);
        ChannelSampler {
            mean: mean.0,
            component_sd: (0.5 * cov_scale).sqrt(),
        }
    }
}

/// One realization of a length-N complex channel vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector(Vec<C64>);

impl ChannelVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QdError::InvalidParameter(format!(
                "channel entry {i} is not finite"
            )));
        }
        Ok(Self(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `selfᴴ · other`.
    pub fn inner(&self, other: &ChannelVector) -> Result<C64> {
        if self.len() != other.len() {
            return Err(QdError::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(inner(&self.0, &other.0))
    }

    pub fn scaled(&self, c: f64) -> ChannelVector {
        ChannelVector(self.0.iter().map(|z| z * c).collect())
    }
}

impl Index<usize> for ChannelVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl From<ChannelVector> for Vec<C64> {
    fn from(v: ChannelVector) -> Self {
        v.0
    }
}

/// `xᴴ y` on raw slices of equal length.
pub(crate) fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// ULA steering vector: entry `n` is `exp(−i n π sin θ)`.
pub fn steering_vector(p: &ChannelParams) -> ChannelVector {
    ChannelVector(
        (0..p.n_antennas)
            .map(|n| C64::from_polar(1.0, -p.phase(n)))
            .collect(),
    )
}

/// Gaussian law of the real and imaginary parts of entry `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryMoments {
    pub mean_re: f64,
    pub mean_im: f64,
    /// Variance shared by the real and imaginary parts, `β/(2(K+1))`.
    pub var_component: f64,
}

pub fn entry_moments(p: &ChannelParams, n: usize) -> Result<EntryMoments> {
    if n >= p.n_antennas {
        return Err(QdError::IndexOutOfRange {
            index: n,
            len: p.n_antennas,
        });
    }
    let amp = p.los_amplitude();
    let phi = p.phase(n);
    Ok(EntryMoments {
        mean_re: amp * phi.cos(),
        mean_im: -amp * phi.sin(),
        var_component: 0.5 * p.nlos_power(),
    })
}

/// Mean vector `√(βK/(K+1))·a` and the scalar `β/(K+1)` of the isotropic
/// covariance `(β/(K+1))·I`.
pub fn mean_and_cov(p: &ChannelParams) -> (ChannelVector, f64) {
    let amp = p.los_amplitude();
    let a = steering_vector(p);
    (a.scaled(amp), p.nlos_power())
}

/// Draws one channel realization.
pub fn sample<R: Rng + ?Sized>(p: &ChannelParams, rng: &mut R) -> ChannelVector {
    let sampler = p.sampler();
    let mut out = vec![C64::new(0.0, 0.0); p.n_antennas];
    sampler.sample_into(rng, &mut out);
    ChannelVector(out)
}

/// Precomputed mean and noise level for repeated sampling.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    mean: Vec<C64>,
    component_sd: f64,
}

impl ChannelSampler {
    pub fn n_antennas(&self) -> usize {
        self.mean.len()
    }

    /// Fills `out` (length N) with one realization.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [C64]) {
        debug_assert_eq!(out.len(), self.mean.len());
        for (o, m) in out.iter_mut().zip(&self.mean) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *o = m + C64::new(re, im) * self.component_sd;
        }
    }
}

/// Gamma surrogate for the channel power `‖g‖²`: every `X_n²` and `Y_n²`
/// is fitted separately, then the 2N fits are moment-matched into one.
pub fn power_surrogate(p: &ChannelParams) -> GammaSurrogate {
    let parts: Vec<GammaSurrogate> = (0..p.n_antennas)
        .flat_map(|n| {
            let m = entry_moments(p, n).expect("index in range");
            [
                squared_gaussian_surrogate(m.mean_re, m.var_component),
                squared_gaussian_surrogate(m.mean_im, m.var_component),
            ]
        })
        .collect::<Result<_>>()
        .expect("positive component variance");
    sum_match(&parts).expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::stream;

    fn params(beta: f64, k: f64, theta_deg: f64, n: usize) -> ChannelParams {
        ChannelParams::new(beta, k, theta_deg.to_radians(), n).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ChannelParams::new(0.0, 1.0, 0.0, 4).is_err());
        assert!(ChannelParams::new(1.0, -0.1, 0.0, 4).is_err());
        assert!(ChannelParams::new(1.0, 1.0, 0.0, 1).is_err());
        assert!(ChannelParams::new(1.0, 1.0, -FRAC_PI_2, 4).is_err());
        assert!(ChannelParams::new(1.0, 1.0, FRAC_PI_2, 4).is_ok());
        let p = ChannelParams::from_db_degrees(1.0, 10.0, 30.0, 4).unwrap();
        assert!((p.k_factor() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn steering_vector_examples() {
        let a = steering_vector(&params(1.0, 1.0, 0.0, 4));
        assert!(a.entries().iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
        let a = steering_vector(&ChannelParams::new(1.0, 1.0, FRAC_PI_2, 2).unwrap());
        assert!((a[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let a = steering_vector(&params(1.0, 1.0, 30.0, 4));
        assert!((a[2] - C64::new(-1.0, 0.0)).norm() < 1e-14);
        for theta in [-80.0, -10.0, 17.0, 60.0] {
            let a = steering_vector(&params(1.0, 1.0, theta, 7));
            assert!(a.entries().iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
            assert!((a.norm_sqr() - 7.0).abs() < 1e-13);
        }
    }

    #[test]
    fn entry_moments_examples() {
        let m = entry_moments(&params(2.0, 0.0, 30.0, 4), 3).unwrap();
        assert_eq!((m.mean_re, m.mean_im), (0.0, 0.0));
        assert!((m.var_component - 1.0).abs() < 1e-15);
        let m = entry_moments(&params(1.0, 1.0, 30.0, 4), 0).unwrap();
        assert!((m.mean_re - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.mean_im, 0.0);
        assert!((m.var_component - 0.25).abs() < 1e-15);
        let m = entry_moments(&params(1.0, 1e9, 30.0, 4), 1).unwrap();
        assert!(m.var_component < 1e-9);
        assert!((m.mean_re.powi(2) + m.mean_im.powi(2) - 1.0).abs() < 1e-8);
        assert!(matches!(
            entry_moments(&params(1.0, 1.0, 30.0, 4), 4),
            Err(QdError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn mean_and_cov_examples() {
        let (m, s) = mean_and_cov(&params(3.0, 0.0, 10.0, 4));
        assert_eq!(m.norm_sqr(), 0.0);
        assert_eq!(s, 3.0);
        let (m, s) = mean_and_cov(&params(1.0, 1.0, 10.0, 4));
        assert!((m.norm_sqr() - 2.0).abs() < 1e-14);
        assert_eq!(s, 0.5);
        assert_eq!(mean_and_cov(&params(4.0, 3.0, 10.0, 4)).1, 1.0);
    }

    #[test]
    fn power_surrogate_rayleigh_and_mean() {
        for n in 2..9 {
            let s = power_surrogate(&params(1.0, 0.0, 30.0, n));
            assert!((s.shape() - n as f64).abs() < 1e-12);
            assert!((s.scale() - 1.0).abs() < 1e-12);
        }
        for &(b, k, t, n) in &[(1.0, 10.0, 30.0, 4), (25.0, 0.3, -40.0, 6), (0.01, 3.0, 5.0, 2)] {
            let s = power_surrogate(&params(b, k, t, n));
            assert!(((s.mean() - b * n as f64) / (b * n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_los_limit_is_deterministic() {
        let p = params(2.0, 1e12, 30.0, 4);
        let mut rng = stream(1, 0);
        let g = sample(&p, &mut rng);
        let a = steering_vector(&p);
        for i in 0..4 {
            assert!((g[i] - a[i] * 2f64.sqrt()).norm() < 1e-5);
        }
    }

    #[test]
    fn sample_moments_match_model() {
        let p = params(2.0, 1.5, 30.0, 4);
        let mut rng = stream(42, 0);
        let n = 1_000_000;
        let mut sum = vec![C64::new(0.0, 0.0); 4];
        let mut sum_sq_re = vec![0.0; 4];
        let mut sum_sq_im = vec![0.0; 4];
        let sampler = p.sampler();
        let mut g = vec![C64::new(0.0, 0.0); 4];
        for _ in 0..n {
            sampler.sample_into(&mut rng, &mut g);
            for i in 0..4 {
                sum[i] += g[i];
                sum_sq_re[i] += g[i].re * g[i].re;
                sum_sq_im[i] += g[i].im * g[i].im;
            }
        }
        let (mean, cov) = mean_and_cov(&p);
        let sd = (cov / 2.0).sqrt();
        for i in 0..4 {
            let m = sum[i] / n as f64;
            let se = sd / (n as f64).sqrt();
            assert!((m.re - mean[i].re).abs() < 4.0 * se);
            assert!((m.im - mean[i].im).abs() < 4.0 * se);
            let var_re = sum_sq_re[i] / n as f64 - m.re * m.re;
            let var_im = sum_sq_im[i] / n as f64 - m.im * m.im;
            let em = entry_moments(&p, i).unwrap();
            assert!((var_re / em.var_component - 1.0).abs() < 0.01);
            assert!((var_im / em.var_component - 1.0).abs() < 0.01);
        }
    }
}
