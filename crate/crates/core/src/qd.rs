//! Quasi-degradation condition and its analytic probability.
//!
//! A channel pair with fixed decoding order `(i, j)` is quasi-degraded when
//! `Q(Θ) ≤ Ξ`, with `Θ` the squared cosine of the angle between the two
//! channels and `Ξ = ‖g_i‖²/‖g_j‖²`. The analytic route approximates
//!
//! * `W = ‖g_i‖² ~ Γ(α_W, θ_W)` and `S = ‖g_j‖² ~ Γ(α_S, θ_S)`, so `Ξ` is
//!   Beta-prime;
//! * `V = g_iᴴ Π_{g_j} g_i ~ Γ(α_V, θ_V)`, so `Θ = V/W` is Beta-prime too;
//!
//! and evaluates `P_QD = ∫₀¹ P[Ξ ≥ Q(ϑ)] f_Θ(ϑ) dϑ`.

use crate::channel::{inner, power_surrogate, ChannelParams, ChannelVector};
use crate::dist::{BetaPrimeSurrogate, GammaSurrogate};
use crate::error::{QdError, Result};
use crate::quadform::{eval_quadform, theta_numerator_surrogate, HermitianMatrix};
use crate::specfn::{integrate, ln_beta, QuadratureSpec};
use crate::C64;

/// QD threshold `Q(Θ) = (1+r_i)/Θ − r_i Θ/(1 + r_j(1−Θ))²` for `Θ ∈ (0, 1]`.
pub fn q_threshold(theta: f64, r_i: f64, r_j: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(QdError::Domain {
            what: "q_threshold angle",
            value: theta,
        });
    }
    Ok(q_unchecked(theta, r_i, r_j))
}

#[inline]
fn q_unchecked(theta: f64, r_i: f64, r_j: f64) -> f64 {
    let d = 1.0 + r_j * (1.0 - theta);
    (1.0 + r_i) / theta - r_i * theta / (d * d)
}

/// `Θ = |g_jᴴ g_i|² / (‖g_i‖² ‖g_j‖²)`.
pub fn cos2_angle(gi: &ChannelVector, gj: &ChannelVector) -> Result<f64> {
    let ni = gi.norm_sqr();
    let nj = gj.norm_sqr();
    if ni == 0.0 || nj == 0.0 {
        return Err(QdError::ZeroVector);
    }
    let ip = gj.inner(gi)?;
    Ok((ip.norm_sqr() / (ni * nj)).clamp(0.0, 1.0))
}

/// `Θ = g_iᴴ Π_{g_j} g_i / ‖g_i‖²`, the projector form of [`cos2_angle`].
pub fn cos2_angle_projector(gi: &ChannelVector, gj: &ChannelVector) -> Result<f64> {
    let ni = gi.norm_sqr();
    if ni == 0.0 {
        return Err(QdError::ZeroVector);
    }
    let pi = HermitianMatrix::projector(gj)?;
    Ok(eval_quadform(&pi, gi)? / ni)
}

/// Whether the pair `(g_i, g_j)` is quasi-degraded for rates `(r_i, r_j)`.
pub fn qd_indicator(gi: &ChannelVector, gj: &ChannelVector, r_i: f64, r_j: f64) -> Result<bool> {
    if gi.len() != gj.len() {
        return Err(QdError::DimensionMismatch {
            expected: gi.len(),
            found: gj.len(),
        });
    }
    if gi.norm_sqr() == 0.0 || gj.norm_sqr() == 0.0 {
        return Err(QdError::ZeroVector);
    }
    Ok(indicator_raw(gi.entries(), gj.entries(), r_i, r_j))
}

/// Unchecked [`qd_indicator`] on raw slices of equal length and nonzero norm.
pub(crate) fn indicator_raw(gi: &[C64], gj: &[C64], r_i: f64, r_j: f64) -> bool {
    let ni: f64 = gi.iter().map(|z| z.norm_sqr()).sum();
    let nj: f64 = gj.iter().map(|z| z.norm_sqr()).sum();
    let theta = (inner(gj, gi).norm_sqr() / (ni * nj)).clamp(0.0, 1.0);
    theta > 0.0 && q_unchecked(theta, r_i, r_j) <= ni / nj
}

/// Two users, their target rates, and the decoding order `(i, j)`: user `i`
/// is decoded first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdScenario {
    pub user_i: ChannelParams,
    pub user_j: ChannelParams,
    pub r_i: f64,
    pub r_j: f64,
}

/// Something suspicious about a scenario that does not prevent evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum QdWarning {
    /// `β_i/β_j < 1`: decoding the weaker user first.
    DecodeOrder { beta_ratio: f64 },
    /// A power surrogate with shape ≤ 2 has no inverse-gamma mean.
    ShapeTooSmall { user: char, shape: f64 },
}

impl std::fmt::Display for QdWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QdWarning::DecodeOrder { beta_ratio } => write!(
                f,
                "path-loss ratio beta_i/beta_j = {beta_ratio} < 1: the stronger user is not decoded first"
            ),
            QdWarning::ShapeTooSmall { user, shape } => write!(
                f,
                "power surrogate of user {user} has shape {shape} <= 2; the inverse-gamma mean is undefined"
            ),
        }
    }
}

impl QdScenario {
    pub fn new(user_i: ChannelParams, user_j: ChannelParams, r_i: f64, r_j: f64) -> Result<Self> {
        if user_i.n_antennas() != user_j.n_antennas() {
            return Err(QdError::DimensionMismatch {
                expected: user_i.n_antennas(),
                found: user_j.n_antennas(),
            });
        }
        for r in [r_i, r_j] {
            if !(r > 0.0) || !r.is_finite() {
                return Err(QdError::InvalidParameter(format!(
                    "target rates must be positive (got {r})"
                )));
            }
        }
        Ok(Self {
            user_i,
            user_j,
            r_i,
            r_j,
        })
    }

    /// Both path-loss gains multiplied by `c`.
    pub fn with_gain_scale(&self, c: f64) -> Result<Self> {
        Self::new(
            self.user_i.with_beta(self.user_i.beta() * c)?,
            self.user_j.with_beta(self.user_j.beta() * c)?,
            self.r_i,
            self.r_j,
        )
    }

    pub fn beta_ratio(&self) -> f64 {
        self.user_i.beta() / self.user_j.beta()
    }

    pub fn warnings(&self) -> Vec<QdWarning> {
        let mut out = Vec::new();
        let ratio = self.beta_ratio();
        if ratio < 1.0 {
            out.push(QdWarning::DecodeOrder { beta_ratio: ratio });
        }
        for (user, p) in [('i', &self.user_i), ('j', &self.user_j)] {
            let shape = power_surrogate(p).shape();
            if shape <= 2.0 {
                out.push(QdWarning::ShapeTooSmall { user, shape });
            }
        }
        out
    }

    /// The three gamma surrogates `W`, `S`, `V`.
    pub fn surrogates(&self) -> Result<QdSurrogates> {
        Ok(QdSurrogates {
            w: power_surrogate(&self.user_i),
            s: power_surrogate(&self.user_j),
            v: theta_numerator_surrogate(&self.user_i, &self.user_j)?,
        })
    }
}

/// Two-user geometry in the units used by the experiments: user `i` (user 1)
/// at azimuth `theta_1_deg` with path-loss gain `beta_delta`, user `j` (user 2)
/// at `theta_1_deg + theta_delta_deg` with unit gain, both with Rician factor
/// `k_db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub k_db: f64,
    pub theta_1_deg: f64,
    pub theta_delta_deg: f64,
    pub beta_delta: f64,
    pub n_antennas: usize,
    pub r_i: f64,
    pub r_j: f64,
}

impl Default for PairGeometry {
    /// θ₁ = 30°, θ_Δ = 10°, β_Δ = 1, K = 0 dB, N = 4, r₁ = r₂ = 1.
    fn default() -> Self {
        Self {
            k_db: 0.0,
            theta_1_deg: 30.0,
            theta_delta_deg: 10.0,
            beta_delta: 1.0,
            n_antennas: 4,
            r_i: 1.0,
            r_j: 1.0,
        }
    }
}

impl PairGeometry {
    pub fn scenario(&self) -> Result<QdScenario> {
        let user_i =
            ChannelParams::from_db_degrees(self.beta_delta, self.k_db, self.theta_1_deg, self.n_antennas)?;
        let user_j = ChannelParams::from_db_degrees(
            1.0,
            self.k_db,
            self.theta_1_deg + self.theta_delta_deg,
            self.n_antennas,
        )?;
        QdScenario::new(user_i, user_j, self.r_i, self.r_j)
    }
}

/// Fitted surrogates for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdSurrogates {
    /// `‖g_i‖²`
    pub w: GammaSurrogate,
    /// `‖g_j‖²`
    pub s: GammaSurrogate,
    /// `g_iᴴ Π_{g_j} g_i`
    pub v: GammaSurrogate,
}

impl QdSurrogates {
    /// Law of `Ξ = W/S`.
    pub fn xi(&self) -> BetaPrimeSurrogate {
        BetaPrimeSurrogate::new(self.w, self.s)
    }

    /// Law of `Θ = V/W`, supported on `[0, ∞)`.
    pub fn theta(&self) -> BetaPrimeSurrogate {
        BetaPrimeSurrogate::new(self.v, self.w)
    }

    /// `θ_W/θ_S`, the ratio governing convergence of the series route.
    pub fn series_ratio(&self) -> f64 {
        self.w.scale() / self.s.scale()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdMethod {
    Quadrature,
    Series,
    /// The printed closed-form series with a `ϑ`-independent `Θ` factor.
    /// Kept for comparison only.
    SeriesLiteral,
}

impl std::fmt::Display for QdMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            QdMethod::Quadrature => "quadrature",
            QdMethod::Series => "series",
            QdMethod::SeriesLiteral => "series-literal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdAnalyticResult {
    /// Probability clamped to `[0, 1]`.
    pub probability: f64,
    /// Value before clamping.
    pub unclamped: f64,
    pub method: QdMethod,
    pub series_terms_used: usize,
    /// Accumulated absolute error bound of every quadrature involved, plus
    /// the series truncation bound where applicable.
    pub quadrature_error_bound: f64,
    /// `P[V/W > 1]` under the surrogate: mass of `Θ` discarded by
    /// integrating over `[0, 1]` only.
    pub theta_tail_mass: f64,
}

impl QdAnalyticResult {
    fn new(raw: f64, method: QdMethod, terms: usize, err: f64, tail: f64) -> Self {
        Self {
            probability: raw.clamp(0.0, 1.0),
            unclamped: raw,
            method,
            series_terms_used: terms,
            quadrature_error_bound: err,
            theta_tail_mass: tail,
        }
    }
}

/// QD probability by direct quadrature of `∫₀¹ P[Ξ ≥ Q(ϑ)] f_Θ(ϑ) dϑ`.
pub fn qd_prob_quadrature(s: &QdScenario, spec: &QuadratureSpec) -> Result<QdAnalyticResult> {
    let sur = s.surrogates()?;
    let xi = sur.xi();
    let theta = sur.theta();
    let (r_i, r_j) = (s.r_i, s.r_j);
    let res = integrate(
        |t| xi.sf(q_unchecked(t, r_i, r_j)) * theta.pdf(t),
        0.0,
        1.0,
        spec,
    )?;
    Ok(QdAnalyticResult::new(
        res.value,
        QdMethod::Quadrature,
        0,
        res.error_bound,
        theta.sf(1.0),
    ))
}

/// Controls for the series routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSpec {
    pub max_terms: usize,
    /// Stop once `|term| < tol·|partial sum|` and terms are decreasing.
    pub tol: f64,
    /// Quadrature used for each inner integral.
    pub quadrature: QuadratureSpec,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        Self {
            max_terms: 5000,
            tol: 1e-10,
            quadrature: QuadratureSpec {
                rel_tol: 1e-10,
                abs_tol: 1e-15,
                max_subdivisions: 2000,
            },
        }
    }
}

/// QD probability from the hypergeometric series of `P[Ξ ≥ q]` integrated
/// term by term against `f_Θ`:
///
/// ```text
/// P = ρ^{α_S}/(α_S B(α_W, α_S)) Σ_k (α_W+α_S)_k (α_S)_k / ((α_S+1)_k k!) (−ρ)^k
///       ∫₀¹ Q(ϑ)^{−(k+α_S)} f_Θ(ϑ) dϑ,          ρ = θ_W/θ_S.
/// ```
///
/// Converges for `ρ < 1` (because `Q ≥ 1` on `(0, 1]`); otherwise returns
/// [`QdError::SeriesDivergence`].
pub fn qd_prob_series(s: &QdScenario, max_terms: usize, tol: f64) -> Result<QdAnalyticResult> {
    qd_prob_series_with(
        s,
        &SeriesSpec {
            max_terms,
            tol,
            ..SeriesSpec::default()
        },
    )
}

pub fn qd_prob_series_with(s: &QdScenario, spec: &SeriesSpec) -> Result<QdAnalyticResult> {
    let sur = s.surrogates()?;
    let (aw, as_) = (sur.w.shape(), sur.s.shape());
    let rho = sur.series_ratio();
    let theta = sur.theta();
    let (r_i, r_j) = (s.r_i, s.r_j);
    let ln_front = as_ * rho.ln() - as_.ln() - ln_beta(aw, as_)?;
    let front = ln_front.exp();
    let quad = spec.quadrature;
    let alternating = hyp_term_series(aw, as_, rho, spec, |k| {
        let e = k as f64 + as_;
        integrate(
            |t| (-e * q_unchecked(t, r_i, r_j).ln()).exp() * theta.pdf(t),
            0.0,
            1.0,
            &quad,
        )
        .map(|r| (r.value, r.error_bound))
    });
    let sum = match alternating {
        Err(QdError::NonConvergence { what: CANCELLATION, .. }) => {
            pfaff_term_series(aw, as_, rho, spec, |t| q_unchecked(t, r_i, r_j), |t| theta.pdf(t))?
        }
        other => other?,
    };
    Ok(QdAnalyticResult::new(
        front * sum.value,
        QdMethod::Series,
        sum.terms,
        front * sum.error_bound,
        theta.sf(1.0),
    ))
}

/// The closed-form series without the `Θ` density inside the integral:
///
/// ```text
/// Σ_k (α_W+α_S)_k (α_S)_k / ((α_S+1)_k k!) (−θ_W/θ_S)^k (1+θ_W/θ_V)^{−(α_V+α_W)} G(k)
/// G(k) = ∫₀¹ Q(ϑ)^{−(k+α_S)} dϑ
/// ```
///
/// with the standard rising factorial `(a)_k = a(a+1)…(a+k−1)`. The `Θ`
/// weighting has no `ϑ` dependence here, so this does not agree with
/// [`qd_prob_quadrature`]; it exists for side-by-side diagnostics.
pub fn qd_prob_series_literal(s: &QdScenario, spec: &SeriesSpec) -> Result<QdAnalyticResult> {
    let sur = s.surrogates()?;
    let (aw, as_, av) = (sur.w.shape(), sur.s.shape(), sur.v.shape());
    let rho = sur.series_ratio();
    let front = (-(av + aw) * (sur.w.scale() / sur.v.scale()).ln_1p()).exp();
    let quad = spec.quadrature;
    let (r_i, r_j) = (s.r_i, s.r_j);
    let sum = hyp_term_series(aw, as_, rho, spec, |k| {
        g_integral(k, r_i, r_j, as_, &quad).map(|v| (v, v * quad.rel_tol))
    })?;
    Ok(QdAnalyticResult::new(
        front * sum.value,
        QdMethod::SeriesLiteral,
        sum.terms,
        front * sum.error_bound,
        sur.theta().sf(1.0),
    ))
}

/// `G(k, r_i, r_j, α_S) = ∫₀¹ Q(ϑ)^{−(k+α_S)} dϑ`.
pub fn g_integral(k: usize, r_i: f64, r_j: f64, alpha_s: f64, spec: &QuadratureSpec) -> Result<f64> {
    let e = k as f64 + alpha_s;
    Ok(integrate(|t| (-e * q_unchecked(t, r_i, r_j).ln()).exp(), 0.0, 1.0, spec)?.value)
}

struct SeriesSum {
    value: f64,
    error_bound: f64,
    terms: usize,
}

/// `Σ_k c_k (−ρ)^k G_k` with `c_k = (α_W+α_S)_k (α_S)_k / ((α_S+1)_k k!)`
/// and `0 ≤ G_{k+1} ≤ G_k`.
fn hyp_term_series<F>(aw: f64, as_: f64, rho: f64, spec: &SeriesSpec, mut inner: F) -> Result<SeriesSum>
where
    F: FnMut(usize) -> Result<(f64, f64)>,
{
    if !(rho < 1.0) {
        return Err(QdError::SeriesDivergence { ratio: rho });
    }
    let a = aw + as_;
    // Past this index the coefficient ratio c_{k+1}ρ/c_k is below one, so
    // with G_k nonincreasing the terms alternate with decreasing magnitude.
    let monotone_from = ((a - 1.0) * rho / (1.0 - rho)).max(0.0).ceil() as usize;
    let mut ln_coef_rho: f64 = 0.0; // ln(c_k ρ^k)
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut first_mag = None;
    for k in 0..spec.max_terms {
        let (g, g_err) = inner(k)?;
        let mag = ln_coef_rho.exp();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * mag * g;
        sum += term;
        err += mag * g_err;
        let first = *first_mag.get_or_insert(term.abs().max(f64::MIN_POSITIVE));
        if term.abs() > 1e6 * first {
            // Cancellation would swamp the result even though the series converges.
            return Err(QdError::NonConvergence {
                what: CANCELLATION,
                iterations: k + 1,
            });
        }
        if k >= monotone_from && term.abs() <= spec.tol * sum.abs() {
            return Ok(SeriesSum {
                value: sum,
                error_bound: err + term.abs(),
                terms: k + 1,
            });
        }
        let kf = k as f64;
        ln_coef_rho += ((a + kf) / (kf + 1.0)).ln() + ((as_ + kf) / (as_ + kf + 1.0)).ln() + rho.ln();
    }
    Err(QdError::NonConvergence {
        what: "QD probability series",
        iterations: spec.max_terms,
    })
}

const CANCELLATION: &str = "alternating QD series (cancellation)";

/// The same expansion after the Pfaff transformation
/// `₂F₁(a, b; b+1; −x) = (1+x)^{−a} Σ_k (a)_k/(b+1)_k (x/(1+x))^k`, with
/// `a = α_W+α_S`, `b = α_S`, `x = ρ/Q(ϑ)`. All terms are positive and each
/// inner integral is at most `ρ/(1+ρ)` times the previous one.
fn pfaff_term_series(
    aw: f64,
    as_: f64,
    rho: f64,
    spec: &SeriesSpec,
    q: impl Fn(f64) -> f64,
    weight: impl Fn(f64) -> f64,
) -> Result<SeriesSum> {
    let a = aw + as_;
    let w_max = rho / (1.0 + rho);
    let mut ln_coef: f64 = 0.0; // ln((a)_k/(b+1)_k)
    let mut sum = 0.0;
    let mut err = 0.0;
    for k in 0..spec.max_terms {
        let kf = k as f64;
        let h = integrate(
            |t| {
                let qt = q(t);
                let ln = -as_ * qt.ln() - a * (rho / qt).ln_1p() + kf * (rho / (qt + rho)).ln();
                ln.exp() * weight(t)
            },
            0.0,
            1.0,
            &spec.quadrature,
        )?;
        let c = ln_coef.exp();
        let term = c * h.value;
        sum += term;
        err += c * h.error_bound;
        let ratio = (a + kf) / (as_ + 1.0 + kf) * w_max;
        if ratio < 1.0 && term * ratio / (1.0 - ratio) <= spec.tol * sum {
            return Ok(SeriesSum {
                value: sum,
                error_bound: err + term * ratio / (1.0 - ratio),
                terms: k + 1,
            });
        }
        ln_coef += ((a + kf) / (as_ + 1.0 + kf)).ln();
    }
    Err(QdError::NonConvergence {
        what: "QD probability series",
        iterations: spec.max_terms,
    })
}

/// Tries the series route and falls back to quadrature when it diverges.
pub fn qd_prob_auto(s: &QdScenario, series: &SeriesSpec, quad: &QuadratureSpec) -> Result<QdAnalyticResult> {
    match qd_prob_series_with(s, series) {
        Err(QdError::SeriesDivergence { .. }) => qd_prob_quadrature(s, quad),
        other => other,
    }
}

/// Sum of pairwise QD probabilities over a user set.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseBound {
    /// Raw sum, not clamped.
    pub value: f64,
    pub exceeds_one: bool,
    /// `(i, j, P^{(i,j)})` for every pair summed.
    pub pairs: Vec<(usize, usize, f64)>,
}

/// Sums `pair_prob(i, j)` over all unordered pairs `i < j` of `n_users`.
pub fn pairwise_sum<F>(n_users: usize, mut pair_prob: F) -> Result<PairwiseBound>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    if n_users < 2 {
        return Err(QdError::InvalidParameter(format!(
            "pairwise bound needs at least two users (got {n_users})"
        )));
    }
    let mut pairs = Vec::new();
    for i in 0..n_users {
        for j in i + 1..n_users {
            pairs.push((i, j, pair_prob(i, j)?));
        }
    }
    let value = pairs.iter().map(|p| p.2).sum::<f64>();
    Ok(PairwiseBound {
        value,
        exceeds_one: value > 1.0,
        pairs,
    })
}

/// Pairwise QD bound: for every pair `i < j` in list order, user `i` is
/// decoded first and `P^{(i,j)}` comes from [`qd_prob_quadrature`].
pub fn pairwise_lower_bound(users: &[ChannelParams], rates: &[f64], spec: &QuadratureSpec) -> Result<PairwiseBound> {
    if users.len() != rates.len() {
        return Err(QdError::DimensionMismatch {
            expected: users.len(),
            found: rates.len(),
        });
    }
    pairwise_sum(users.len(), |i, j| {
        let s = QdScenario::new(users[i], users[j], rates[i], rates[j])?;
        Ok(qd_prob_quadrature(&s, spec)?.probability)
    })
}
