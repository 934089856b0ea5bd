//! Complex quadratic forms `Zᴴ A Z` and their first two moments.
//!
//! The random vector is always circularly-symmetric complex Gaussian with an
//! arbitrary mean `μ` and isotropic covariance `σ²·I`, which is the only
//! covariance the Rician model produces. For that family
//!
//! ```text
//! E[Zᴴ A Z] = σ² tr(A) + μᴴ A μ
//! V[Zᴴ A Z] = σ⁴ tr(A²) + 2σ² μᴴ A² μ
//! ```
//!
//! hold exactly for deterministic Hermitian `A`. For a random matrix `S`
//! the same expressions evaluated at `E[S]` are used as the approximation.

use crate::channel::{inner, mean_and_cov, power_surrogate, steering_vector, ChannelParams, ChannelVector};
use crate::dist::{gamma_from_moments, inverse_gamma_moments, GammaSurrogate};
use crate::error::{QdError, Result};
use crate::C64;

const HERMITIAN_TOL: f64 = 1e-12;

/// Dense N×N Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    /// Builds from row-major entries, checking `A = Aᴴ` to 1e-12.
    pub fn from_row_major(n: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(QdError::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        for i in 0..n {
            for j in i..n {
                let d = data[i * n + j] - data[j * n + i].conj();
                if d.norm() > HERMITIAN_TOL {
                    return Err(QdError::InvalidParameter(format!(
                        "matrix is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Result<Self> {
        let data = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self::from_row_major(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// `v vᴴ`.
    pub fn outer(v: &ChannelVector) -> Self {
        let e = v.entries();
        let n = e.len();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(e[i] * e[j].conj());
            }
        }
        Self { n, data }
    }

    /// Orthogonal projector `Π_v = v (vᴴv)⁻¹ vᴴ` onto `span{v}`.
    pub fn projector(v: &ChannelVector) -> Result<Self> {
        let p = v.norm_sqr();
        if p == 0.0 {
            return Err(QdError::ZeroVector);
        }
        Ok(Self::outer(v).scaled(1.0 / p))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.n)?;
        Ok(Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// `A²`, Hermitian whenever `A` is.
    pub fn square(&self) -> Self {
        let n = self.n;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    data[i * n + j] += a * self.data[k * n + j];
                }
            }
        }
        Self { n, data }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    /// `tr(A²) = Σ|a_ij|²` for Hermitian `A`.
    pub fn trace_of_square(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `A v` on a raw slice.
    fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| inner_row(&self.data[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(QdError::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        Ok(())
    }
}

fn inner_row(row: &[C64], v: &[C64]) -> C64 {
    row.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Mean and variance of a quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadFormMoments {
    pub mean: f64,
    pub variance: f64,
}

/// `zᴴ A z`; the imaginary part is roundoff for Hermitian `A` and dropped.
pub fn eval_quadform(a: &HermitianMatrix, z: &ChannelVector) -> Result<f64> {
    a.check_dim(z.len())?;
    let v = inner(z.entries(), &a.apply(z.entries()));
    debug_assert!(v.im.abs() <= 1e-10 * v.re.abs().max(1.0));
    Ok(v.re)
}

/// `E[Zᴴ A Z] = σ² tr(A) + μᴴ A μ` for `Z ~ CN(μ, σ²I)`.
pub fn mean_det(a: &HermitianMatrix, mu: &ChannelVector, cov_scale: f64) -> Result<f64> {
    check_cov(cov_scale)?;
    Ok(cov_scale * a.trace() + eval_quadform(a, mu)?)
}

/// `V[Zᴴ A Z] = σ⁴ tr(A²) + 2σ² μᴴ A² μ` for `Z ~ CN(μ, σ²I)`.
pub fn var_det(a: &HermitianMatrix, mu: &ChannelVector, cov_scale: f64) -> Result<f64> {
    check_cov(cov_scale)?;
    a.check_dim(mu.len())?;
    let a_mu = a.apply(mu.entries());
    let mu_a2_mu: f64 = a_mu.iter().map(|z| z.norm_sqr()).sum();
    Ok(cov_scale * cov_scale * a.trace_of_square() + 2.0 * cov_scale * mu_a2_mu)
}

fn check_cov(cov_scale: f64) -> Result<()> {
    if !(cov_scale >= 0.0) || !cov_scale.is_finite() {
        return Err(QdError::Domain {
            what: "covariance scale",
            value: cov_scale,
        });
    }
    Ok(())
}

/// `E[g gᴴ] = (βK/(K+1)) a aᴴ + (β/(K+1)) I`.
pub fn expected_outer(p: &ChannelParams) -> HermitianMatrix {
    let n = p.n_antennas();
    let los = p.beta() * p.k_factor() / (p.k_factor() + 1.0);
    let nlos = p.beta() / (p.k_factor() + 1.0);
    let mut data = Vec::with_capacity(n * n);
    for m in 0..n {
        for k in 0..n {
            let d = p.phase(m) - p.phase(k);
            let mut v = C64::new(los * d.cos(), -los * d.sin());
            if m == k {
                v += nlos;
            }
            data.push(v);
        }
    }
    HermitianMatrix { n, data }
}

/// `E[Π_g] ≈ E[g gᴴ]·E[‖g‖⁻²]`, treating `g` and its inverse power as
/// independent and taking `E[‖g‖⁻²]` from the inverse of the power
/// surrogate. Requires the surrogate shape to exceed 2.
pub fn expected_projector(p: &ChannelParams) -> Result<HermitianMatrix> {
    let (inv_mean, _) = inverse_gamma_moments(&power_surrogate(p))?;
    Ok(expected_outer(p).scaled(inv_mean))
}

/// Moments of `Zᴴ S Z` for a random Hermitian `S` with mean `es`,
/// independent of `Z ~ CN(μ, σ²I)`: mean `tr(E[S]Σ) + μᴴE[S]μ`, variance
/// `tr(Σ²E[S]²) + 2μᴴΣE[S]²μ`.
pub fn stoch_moments(es: &HermitianMatrix, mu: &ChannelVector, cov_scale: f64) -> Result<QuadFormMoments> {
    Ok(QuadFormMoments {
        mean: mean_det(es, mu, cov_scale)?,
        variance: var_det(es, mu, cov_scale)?,
    })
}

/// Gamma surrogate for the angle numerator `g_iᴴ Π_{g_j} g_i`.
pub fn theta_numerator_surrogate(pi: &ChannelParams, pj: &ChannelParams) -> Result<GammaSurrogate> {
    if pi.n_antennas() != pj.n_antennas() {
        return Err(QdError::DimensionMismatch {
            expected: pi.n_antennas(),
            found: pj.n_antennas(),
        });
    }
    let es = expected_projector(pj)?;
    let (mu, cov) = mean_and_cov(pi);
    let m = stoch_moments(&es, &mu, cov)?;
    gamma_from_moments(m.mean, m.variance)
}

/// `a aᴴ / N`, the pure-LOS projector.
pub fn los_projector(p: &ChannelParams) -> HermitianMatrix {
    HermitianMatrix::outer(&steering_vector(p)).scaled(1.0 / p.n_antennas() as f64)
}
