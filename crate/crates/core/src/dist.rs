//! Gamma-family surrogates and second-order moment matching.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{QdError, Result};
use crate::specfn::{gauss_2f1, inc_beta_pair, ln_beta, ln_gamma, reg_inc_gamma};

/// A gamma law `Γ(shape, scale)` standing in for a nonnegative random
/// quantity whose first two moments it reproduces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSurrogate {
    shape: f64,
    scale: f64,
}

impl GammaSurrogate {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(QdError::Domain {
                what: "gamma shape",
                value: shape,
            });
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(QdError::Domain {
                what: "gamma scale",
                value: scale,
            });
        }
        Ok(Self { shape, scale })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn var(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.shape - 1.0) * x.ln()
            - x / self.scale
            - ln_gamma(self.shape).expect("validated shape")
            - self.shape * self.scale.ln()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x == 0.0 {
            match self.shape.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => 1.0 / self.scale,
                _ => f64::INFINITY,
            }
        } else {
            self.ln_pdf(x).exp()
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            reg_inc_gamma(self.shape, x / self.scale).expect("validated shape")
        }
    }

    /// Same law with the scale multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.shape, self.scale * c)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Gamma::new(self.shape, self.scale)
            .expect("validated parameters")
            .sample(rng)
    }
}

/// Two-moment gamma fit: `k = mean²/var`, `θ = var/mean`.
pub fn gamma_from_moments(mean: f64, var: f64) -> Result<GammaSurrogate> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(QdError::Domain {
            what: "gamma_from_moments mean",
            value: mean,
        });
    }
    if !(var > 0.0) || !var.is_finite() {
        return Err(QdError::Domain {
            what: "gamma_from_moments variance",
            value: var,
        });
    }
    GammaSurrogate::new(mean * mean / var, var / mean)
}

/// Gamma fit to `X²` for `X ~ N(mu, sigma2)`.
///
/// `E[X²] = σ² + μ²` and `V[X²] = 2σ²(σ² + 2μ²)`.
pub fn squared_gaussian_surrogate(mu: f64, sigma2: f64) -> Result<GammaSurrogate> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(QdError::Domain {
            what: "squared_gaussian_surrogate variance",
            value: sigma2,
        });
    }
    let mu2 = mu * mu;
    gamma_from_moments(sigma2 + mu2, 2.0 * sigma2 * (sigma2 + 2.0 * mu2))
}

/// Moment-matched gamma law for the sum of independent gamma variables.
pub fn sum_match(parts: &[GammaSurrogate]) -> Result<GammaSurrogate> {
    if parts.is_empty() {
        return Err(QdError::Empty("sum_match needs at least one part"));
    }
    // Scales are measured relative to the largest one, so equal parts sum
    // without rounding and the fitted shape is exactly their total shape.
    let r = parts.iter().map(GammaSurrogate::scale).fold(0.0, f64::max);
    let (mean, var) = parts.iter().fold((0.0, 0.0), |(m, v), g| {
        let t = g.scale() / r;
        (m + g.shape() * t, v + g.shape() * t * t)
    });
    GammaSurrogate::new(mean * mean / var, r * var / mean)
}

/// Mean and variance of `1/Z` for `Z ~ Γ(k, θ)`; defined for `k > 2`.
pub fn inverse_gamma_moments(g: &GammaSurrogate) -> Result<(f64, f64)> {
    let k = g.shape();
    if !(k > 2.0) {
        return Err(QdError::ShapeTooSmall { shape: k });
    }
    let th = g.scale();
    let mean = 1.0 / ((k - 1.0) * th);
    let var = 1.0 / ((k - 1.0) * (k - 1.0) * (k - 2.0) * th * th);
    Ok((mean, var))
}

/// Law of `V/W` for independent gamma variables `V` (numerator) and `W`
/// (denominator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPrimeSurrogate {
    pub numerator: GammaSurrogate,
    pub denominator: GammaSurrogate,
}

impl BetaPrimeSurrogate {
    pub fn new(numerator: GammaSurrogate, denominator: GammaSurrogate) -> Self {
        Self {
            numerator,
            denominator,
        }
    }

    /// θ_den/θ_num; `V/W · ratio` is a standard Beta-prime variable.
    fn scale_ratio(&self) -> f64 {
        self.denominator.scale() / self.numerator.scale()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let a = self.numerator.shape();
        let b = self.denominator.shape();
        let r = self.scale_ratio();
        (a - 1.0) * x.ln() + a * r.ln() - (a + b) * (x * r).ln_1p()
            - ln_beta(a, b).expect("validated shapes")
    }

    /// Density of `V/W` at `x ≥ 0`.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            let a = self.numerator.shape();
            return match a.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => self.ln_pdf_at_zero_unit_shape().exp(),
                _ => f64::INFINITY,
            };
        }
        self.ln_pdf(x).exp()
    }

    fn ln_pdf_at_zero_unit_shape(&self) -> f64 {
        let b = self.denominator.shape();
        self.scale_ratio().ln() - ln_beta(1.0, b).expect("validated shapes")
    }

    /// `P[V/W ≥ q]` through the regularized incomplete beta function:
    /// `I_{1/(1+c)}(α_w, α_v)` with `c = q·θ_w/θ_v`.
    pub fn sf(&self, q: f64) -> f64 {
        if !(q > 0.0) {
            return 1.0;
        }
        if q.is_infinite() {
            return 0.0;
        }
        let c = q * self.scale_ratio();
        let (x, y) = if c > 1.0 {
            let inv = 1.0 / c;
            (inv / (1.0 + inv), 1.0 / (1.0 + inv))
        } else {
            (1.0 / (1.0 + c), c / (1.0 + c))
        };
        inc_beta_pair(self.denominator.shape(), self.numerator.shape(), x, y)
            .expect("validated shapes")
            .0
    }

    pub fn cdf(&self, q: f64) -> f64 {
        1.0 - self.sf(q)
    }

    /// `P[V/W ≥ q]` through the Gauss hypergeometric closed form
    /// `(ρ/q)^{α_w} ₂F₁(α_v+α_w, α_w; α_w+1; −ρ/q) / (α_w B(α_v, α_w))`,
    /// `ρ = θ_v/θ_w`. Independent of [`Self::sf`]; used to cross-check it.
    pub fn sf_hypergeometric(&self, q: f64) -> Result<f64> {
        if !(q > 0.0) {
            return Ok(1.0);
        }
        if q.is_infinite() {
            return Ok(0.0);
        }
        let a = self.numerator.shape();
        let b = self.denominator.shape();
        let rho_over_q = self.numerator.scale() / (self.denominator.scale() * q);
        let ln_front = b * rho_over_q.ln() - b.ln() - ln_beta(a, b)?;
        let f = gauss_2f1(a + b, b, b + 1.0, -rho_over_q)?;
        Ok(ln_front.exp() * f)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.numerator.sample(rng) / self.denominator.sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfn::{integrate, QuadratureSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn g(k: f64, th: f64) -> GammaSurrogate {
        GammaSurrogate::new(k, th).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn gamma_from_moments_examples() {
        let s = gamma_from_moments(2.0, 2.0).unwrap();
        assert_eq!((s.shape(), s.scale()), (2.0, 1.0));
        let s = gamma_from_moments(0.5, 0.5).unwrap();
        assert_eq!((s.shape(), s.scale()), (0.5, 1.0));
        assert!(gamma_from_moments(0.0, 1.0).is_err());
        assert!(gamma_from_moments(1.0, -1.0).is_err());
    }

    #[test]
    fn squared_gaussian_examples() {
        let s = squared_gaussian_surrogate(0.0, 1.0).unwrap();
        assert!(close(s.shape(), 0.5, 1e-15) && close(s.scale(), 2.0, 1e-15));
        let s = squared_gaussian_surrogate(0.0, 0.5).unwrap();
        assert!(close(s.shape(), 0.5, 1e-15) && close(s.scale(), 1.0, 1e-15));
        let s = squared_gaussian_surrogate(3.0, 1.0).unwrap();
        assert!(close(s.mean(), 10.0, 1e-14) && close(s.var(), 38.0, 1e-14));
        assert!(close(s.shape(), 100.0 / 38.0, 1e-14) && close(s.scale(), 3.8, 1e-14));
        assert!(squared_gaussian_surrogate(1.0, 0.0).is_err());
    }

    #[test]
    fn squared_gaussian_moments_by_sampling() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let n = 1_000_000;
        let normal = rand_distr::Normal::new(3.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..n).map(|_| { let x: f64 = normal.sample(&mut rng); x * x }).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 10.0).abs() < 4.0 * (38.0f64 / n as f64).sqrt());
        assert!((var - 38.0).abs() / 38.0 < 0.01);
    }

    #[test]
    fn sum_match_examples() {
        let n = 4;
        let parts = vec![g(0.5, 2.0); 2 * n];
        let s = sum_match(&parts).unwrap();
        assert!(close(s.shape(), n as f64, 1e-14) && close(s.scale(), 2.0, 1e-14));
        let single = sum_match(&[g(1.7, 0.3)]).unwrap();
        assert!(close(single.shape(), 1.7, 1e-14) && close(single.scale(), 0.3, 1e-14));
        let s = sum_match(&[g(1.0, 1.0), g(2.0, 3.0)]).unwrap();
        assert!(close(s.mean(), 7.0, 1e-14) && close(s.var(), 19.0, 1e-14));
        assert!(close(s.shape(), 49.0 / 19.0, 1e-14) && close(s.scale(), 19.0 / 7.0, 1e-14));
        assert!(matches!(sum_match(&[]), Err(QdError::Empty(_))));
    }

    #[test]
    fn inverse_gamma_examples() {
        let (m, v) = inverse_gamma_moments(&g(3.0, 1.0)).unwrap();
        assert!(close(m, 0.5, 1e-15) && close(v, 0.25, 1e-15));
        let (m, v) = inverse_gamma_moments(&g(3.0, 2.0)).unwrap();
        assert!(close(m, 0.25, 1e-15) && close(v, 1.0 / 16.0, 1e-15));
        let (m, v) = inverse_gamma_moments(&g(4.0, 0.5)).unwrap();
        assert!(close(m, 2.0 / 3.0, 1e-15) && close(v, 2.0 / 9.0, 1e-15));
        assert!(matches!(
            inverse_gamma_moments(&g(2.0, 1.0)),
            Err(QdError::ShapeTooSmall { .. })
        ));
    }

    #[test]
    fn beta_prime_pdf_examples() {
        let bp = BetaPrimeSurrogate::new(g(1.0, 1.0), g(1.0, 1.0));
        assert!(close(bp.pdf(1.0), 0.25, 1e-14));
        let bp = BetaPrimeSurrogate::new(g(2.0, 1.0), g(2.0, 1.0));
        assert!(close(bp.pdf(1.0), 0.375, 1e-14));
        assert_eq!(bp.pdf(0.0), 0.0);
    }

    #[test]
    fn beta_prime_sf_examples() {
        let bp = BetaPrimeSurrogate::new(g(3.0, 1.0), g(3.0, 1.0));
        assert_eq!(bp.sf(0.0), 1.0);
        assert_eq!(bp.sf(f64::INFINITY), 0.0);
        assert!(bp.sf(1e12) < 1e-30);
        assert!(close(bp.sf(1.0), 0.5, 1e-13));
    }

    #[test]
    fn beta_prime_pdf_integrates_to_one() {
        let spec = QuadratureSpec::default();
        for &(a, ta, b, tb) in &[(0.7, 2.0, 3.5, 0.4), (4.0, 1.0, 9.0, 3.0), (1.0, 0.1, 0.6, 5.0)] {
            let bp = BetaPrimeSurrogate::new(g(a, ta), g(b, tb));
            // substitute x = t/(1-t) to map [0,∞) onto (0,1)
            let total = integrate(
                |t| bp.pdf(t / (1.0 - t)) / ((1.0 - t) * (1.0 - t)),
                0.0,
                1.0,
                &spec,
            )
            .unwrap()
            .value;
            assert!((total - 1.0).abs() < 1e-6, "{a} {ta} {b} {tb}: {total}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn moments_round_trip(k in 0.05f64..200.0, th in 1e-3f64..1e3) {
            let s = g(k, th);
            let r = gamma_from_moments(s.mean(), s.var()).unwrap();
            prop_assert!(close(r.shape(), k, 1e-12) && close(r.scale(), th, 1e-12));
        }

        #[test]
        fn sum_match_preserves_moments(parts in proptest::collection::vec((0.1f64..20.0, 0.01f64..10.0), 1..12)) {
            let gs: Vec<_> = parts.iter().map(|&(k, t)| g(k, t)).collect();
            let s = sum_match(&gs).unwrap();
            let m: f64 = gs.iter().map(|x| x.mean()).sum();
            let v: f64 = gs.iter().map(|x| x.var()).sum();
            prop_assert!(close(s.mean(), m, 1e-12) && close(s.var(), v, 1e-12));
        }

        #[test]
        fn sf_matches_integrated_pdf(
            a in 0.8f64..12.0, ta in 0.1f64..10.0, b in 0.8f64..12.0, tb in 0.1f64..10.0, u in 0.05f64..0.95,
        ) {
            let bp = BetaPrimeSurrogate::new(g(a, ta), g(b, tb));
            // choose q at a quantile-ish location so the tail is not negligible
            let q = u / (1.0 - u) * ta / tb;
            let spec = QuadratureSpec { rel_tol: 1e-10, ..QuadratureSpec::default() };
            // ∫_q^∞ pdf, via x = q + t/(1-t)
            let tail = integrate(|t| bp.pdf(q + t / (1.0 - t)) / ((1.0 - t) * (1.0 - t)), 0.0, 1.0, &spec)
                .unwrap().value;
            prop_assert!(close(bp.sf(q), tail, 1e-6), "sf {} tail {}", bp.sf(q), tail);
        }

        #[test]
        fn sf_routes_agree(
            a in 0.5f64..25.0, ta in 0.05f64..20.0, b in 0.5f64..25.0, tb in 0.05f64..20.0, q in 0.01f64..100.0,
        ) {
            let bp = BetaPrimeSurrogate::new(g(a, ta), g(b, tb));
            let beta_route = bp.sf(q);
            let hyp_route = bp.sf_hypergeometric(q).unwrap();
            prop_assume!(beta_route > 1e-200);
            prop_assert!(close(hyp_route, beta_route, 1e-8), "beta {beta_route} hyp {hyp_route}");
        }
    }
}
