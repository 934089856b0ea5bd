//! Quasi-degradation (QD) probability of a two-user NOMA downlink over MISO
//! Rician fading channels.
//!
//! Two independent routes are provided:
//!
//! * an analytic pipeline that replaces the channel powers and the angle
//!   numerator by moment-matched gamma surrogates and integrates the
//!   resulting Beta-prime laws ([`qd::qd_prob_quadrature`],
//!   [`qd::qd_prob_series`]);
//! * a Monte-Carlo oracle that samples channel pairs and counts how often the
//!   QD condition holds ([`mc::estimate_qd_prob`]).
//!
//! Module map:
//!
//! | module       | contents                                              |
//! |--------------|-------------------------------------------------------|
//! | [`specfn`]   | log-gamma, incomplete beta/gamma, ₂F₁, quadrature     |
//! | [`dist`]     | gamma and Beta-prime surrogates, moment matching      |
//! | [`channel`]  | ULA steering vector, Rician sampling, power surrogate |
//! | [`quadform`] | complex quadratic forms and their moments             |
//! | [`qd`]       | QD threshold, analytic QD probability, pairwise bound |
//! | [`mc`]       | Monte-Carlo estimators and the DPC power formula      |
//! | [`stream`]   | reproducible per-task random streams                  |

pub mod channel;
pub mod dist;
pub mod error;
pub mod mc;
pub mod qd;
pub mod quadform;
pub mod specfn;
pub mod stream;

pub use channel::{ChannelParams, ChannelVector};
pub use dist::{BetaPrimeSurrogate, GammaSurrogate};
pub use error::{QdError, Result};
pub use mc::{McEstimate, MomentEstimate};
pub use qd::{QdAnalyticResult, QdMethod, QdScenario};
pub use quadform::{HermitianMatrix, QuadFormMoments};
pub use specfn::QuadratureSpec;

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
