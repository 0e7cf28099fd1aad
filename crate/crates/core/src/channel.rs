//! Closed-form statistics of the time-variant channel impulse response.
//!
//! The channel between a mobile transmitter and a mobile transparent receiver
//! is the probability h(t,τ) that a molecule released at time t is observed
//! inside the receiver volume τ seconds later. Conditioned on the
//! transmitter–receiver distance at release time, h is a Gaussian bump in
//! that distance; the distance itself diffuses, which makes h(t,τ) a
//! non-stationary stochastic process. This module evaluates its mean,
//! autocorrelation function, variance, normalized ACF, and coherence time.
//!
//! All exponentials are assembled in log space and exponentiated once, so
//! results degrade gracefully (to 0.0) instead of producing NaN when the
//! argument of the exponential is very large.

use crate::config::{EffectiveDiffusion, Vec3};
use crate::{Error, Result};

/// Shorthand quantities used throughout the second-order statistics.
#[derive(Debug, Clone, Copy)]
pub struct Notation {
    /// φ = V_obs / (4π·D₁·τ)^{3/2} (dimensionless).
    pub phi_coef: f64,
    /// α = 1 / (4·D₁·τ) (m⁻²).
    pub alpha: f64,
    d2: f64,
}

impl Notation {
    pub fn new(tau: f64, eff: &EffectiveDiffusion) -> Result<Self> {
        if !(tau > 0.0) || eff.d1 <= 0.0 {
            return Err(Error::Domain(format!(
                "notation requires tau > 0 and d1 > 0 (tau = {tau}, d1 = {})",
                eff.d1
            )));
        }
        Ok(Notation {
            phi_coef: (eff.v_obs.ln() - 1.5 * (4.0 * std::f64::consts::PI * eff.d1 * tau).ln()).exp(),
            alpha: 1.0 / (4.0 * eff.d1 * tau),
            d2: eff.d2,
        })
    }

    /// λ(t) = (4π·D₂·t)^{−3/2} (m⁻³).
    pub fn lambda_of(&self, t: f64) -> f64 {
        (-1.5 * (4.0 * std::f64::consts::PI * self.d2 * t).ln()).exp()
    }

    /// β(t) = 1 / (4·D₂·t) (m⁻²).
    pub fn beta_of(&self, t: f64) -> f64 {
        1.0 / (4.0 * self.d2 * t)
    }
}

/// ln of V·(4π·s)^{−3/2}·exp(−r²/(4s)). Shared by every first/second-moment
/// expression so that coinciding cases agree bit for bit.
fn ln_gauss_prob(v_obs: f64, spread: f64, r_sq: f64) -> f64 {
    v_obs.ln() - 1.5 * (4.0 * std::f64::consts::PI * spread).ln() - r_sq / (4.0 * spread)
}

/// ln m(t); see [`mean_cir`]. Kept separate so ratios of moments can be
/// formed without intermediate underflow.
fn ln_mean_cir(t: f64, tau: f64, x0: f64, eff: &EffectiveDiffusion) -> Result<f64> {
    if !(tau > 0.0) || eff.d1 <= 0.0 {
        return Err(Error::Domain(format!(
            "mean impulse response requires tau > 0 and d1 > 0 (tau = {tau}, d1 = {})",
            eff.d1
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("release time must be >= 0, got {t}")));
    }
    Ok(ln_gauss_prob(eff.v_obs, eff.d1 * tau + eff.d2 * t, x0 * x0))
}

/// ln φ(t1,t1); see [`acf_equal`].
fn ln_acf_equal(t1: f64, tau: f64, x0: f64, eff: &EffectiveDiffusion) -> Result<f64> {
    if !(t1 >= 0.0) {
        return Err(Error::Domain(format!("time must be >= 0, got {t1}")));
    }
    let a = eff.d1 * tau;
    if !(tau > 0.0) || eff.d1 <= 0.0 {
        return Err(Error::Domain(format!("requires tau > 0 and d1 > 0 (tau = {tau}, d1 = {})", eff.d1)));
    }
    if t1 == 0.0 || eff.d2 == 0.0 {
        return Ok(2.0 * ln_gauss_prob(eff.v_obs, a, x0 * x0));
    }
    let c = a + 2.0 * eff.d2 * t1;
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(2.0 * eff.v_obs.ln() - 1.5 * (four_pi * a).ln() - 1.5 * (four_pi * c).ln()
        - x0 * x0 / (2.0 * c))
}

/// ln φ(t1,t2); see [`acf`].
fn ln_acf(t1: f64, t2: f64, tau: f64, x0: f64, eff: &EffectiveDiffusion) -> Result<f64> {
    if !(t1 >= 0.0) || !t2.is_finite() {
        return Err(Error::Domain(format!("times must be finite and >= 0, got ({t1}, {t2})")));
    }
    if t2 < t1 {
        return Err(Error::Argument(format!("times must be ordered t1 <= t2, got ({t1}, {t2})")));
    }
    if t1 == t2 || eff.d2 == 0.0 {
        return ln_acf_equal(t1, tau, x0, eff);
    }
    if t1 == 0.0 {
        return Ok(ln_gauss_prob(eff.v_obs, eff.d1 * tau, x0 * x0)
            + ln_mean_cir(t2, tau, x0, eff)?);
    }
    let notation = Notation::new(tau, eff)?;
    let alpha = notation.alpha;
    let beta1 = notation.beta_of(t1);
    let beta21 = notation.beta_of(t2 - t1);
    // Q collects the quadratic-form determinant of the two correlated
    // displacement coordinates; kappa completes the square in x.
    let q = (alpha + beta1) * (alpha + beta21) + alpha * beta21;
    let kappa = -(alpha * beta1 * x0 * x0) * ((alpha + 2.0 * beta21) / q);
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(2.0 * (eff.v_obs.ln() - 1.5 * (four_pi * eff.d1 * tau).ln())
        - 1.5 * (four_pi * eff.d2 * t1).ln()
        - 1.5 * (four_pi * eff.d2 * (t2 - t1)).ln()
        + 3.0 * (2.0 * std::f64::consts::PI).ln()
        - 1.5 * (4.0 * q).ln()
        + kappa)
}

/// Impulse response conditioned on a known transmitter–receiver distance:
/// the probability of observing a molecule at lag `tau` when released at
/// distance `r_star`.
///
/// Values above 1 are possible when the point-source Gaussian is evaluated
/// inside the receiver volume (model validity limit); they are reported via
/// `log::warn!` but never clamped.
pub fn cir_conditional(r_star: f64, tau: f64, eff: &EffectiveDiffusion) -> Result<f64> {
    if !(tau > 0.0) || eff.d1 <= 0.0 {
        return Err(Error::Domain(format!(
            "conditional impulse response is singular for tau <= 0 or d1 = 0 (tau = {tau}, d1 = {})",
            eff.d1
        )));
    }
    if !(r_star >= 0.0) {
        return Err(Error::Domain(format!("distance must be >= 0, got {r_star}")));
    }
    let h = ln_gauss_prob(eff.v_obs, eff.d1 * tau, r_star * r_star).exp();
    if h > 1.0 {
        log::warn!(
            "conditional impulse response {h} > 1 at r* = {r_star}, tau = {tau}: \
             point-source model is outside its validity region"
        );
    }
    Ok(h)
}

/// Gaussian density (m⁻³) of the relative transmitter–receiver displacement
/// at time `t`, starting from `r0`.
pub fn displacement_pdf(r: Vec3, t: f64, r0: Vec3, eff: &EffectiveDiffusion) -> Result<f64> {
    if !(t > 0.0) || eff.d2 <= 0.0 {
        return Err(Error::Domain(format!(
            "displacement density is degenerate for t <= 0 or d2 = 0 (t = {t}, d2 = {}); \
             callers must branch on the deterministic case",
            eff.d2
        )));
    }
    let spread = eff.d2 * t;
    Ok((-1.5 * (4.0 * std::f64::consts::PI * spread).ln() - (r - r0).norm_sq() / (4.0 * spread)).exp())
}

/// Mean impulse response m(t) at release time `t` and lag `tau`, for initial
/// distance `x0`. At t = 0 (or d2 = 0) this coincides exactly with
/// [`cir_conditional`] at `x0`.
pub fn mean_cir(t: f64, tau: f64, x0: f64, eff: &EffectiveDiffusion) -> Result<f64> {
    Ok(ln_mean_cir(t, tau, x0, eff)?.exp())
}

/// Equal-time autocorrelation φ(t1,t1) = E{h²(t1,τ)}.
pub fn acf_equal(t1: f64, tau: f64, x0: f64, eff: &EffectiveDiffusion) -> Result<f64> {
    if !(t1 >= 0.0) {
        return Err(Error::Domain(format!("time must be >= 0, got {t1}")));
    }
    if t1 == 0.0 || eff.d2 == 0.0 {
        // Deterministic distance: E{h²} = h² exactly.
        let h = cir_conditional(x0, tau, eff)?;
        return Ok(h * h);
    }
    Ok(ln_acf_equal(t1, tau, x0, eff)?.exp())
}

/// Autocorrelation function φ(t1,t2) = E{h(t1,τ)·h(t2,τ)} for 0 ≤ t1 ≤ t2.
///
/// The closed form is singular at t1 = 0 and t2 = t1, so those cases use the
/// exact limits: φ(0,t2) = h(τ|x0)·m(t2) (the initial distance is
/// deterministic) and φ(t1,t1) = [`acf_equal`].
pub fn acf(t1: f64, t2: f64, tau: f64, x0: f64, eff: &EffectiveDiffusion) -> Result<f64> {
    if t1 >= 0.0 && t2 >= t1 {
        if t1 == t2 {
            return acf_equal(t1, tau, x0, eff);
        }
        if eff.d2 == 0.0 {
            let h = cir_conditional(x0, tau, eff)?;
            return Ok(h * h);
        }
        if t1 == 0.0 {
            return Ok(cir_conditional(x0, tau, eff)? * mean_cir(t2, tau, x0, eff)?);
        }
    }
    Ok(ln_acf(t1, t2, tau, x0, eff)?.exp())
}

/// Relative tolerance below which a negative variance is attributed to
/// floating-point cancellation and clamped to zero.
pub const VARIANCE_CANCELLATION_TOL: f64 = 1e-15;

/// Variance σ²(t) = φ(t,t) − m²(t) of the time-variant impulse response.
pub fn variance(t: f64, tau: f64, x0: f64, eff: &EffectiveDiffusion) -> Result<f64> {
    let second = acf_equal(t, tau, x0, eff)?;
    let mean = mean_cir(t, tau, x0, eff)?;
    let var = second - mean * mean;
    if var < 0.0 {
        if -var <= VARIANCE_CANCELLATION_TOL * second {
            return Ok(0.0);
        }
        return Err(Error::InternalConsistency(format!(
            "variance came out negative beyond cancellation tolerance: phi = {second}, m^2 = {}",
            mean * mean
        )));
    }
    Ok(var)
}

/// Normalized autocorrelation ρ(t1,t2) = φ(t1,t2)/√(φ(t1,t1)·φ(t2,t2)),
/// exactly 1 when t1 = t2. The ratio is formed in log space, so it stays
/// meaningful even where the individual moments underflow.
pub fn normalized_acf(t1: f64, t2: f64, tau: f64, x0: f64, eff: &EffectiveDiffusion) -> Result<f64> {
    if t2 < t1 {
        return Err(Error::Argument(format!("times must be ordered t1 <= t2, got ({t1}, {t2})")));
    }
    if t1 == t2 {
        return Ok(1.0);
    }
    let ln_num = ln_acf(t1, t2, tau, x0, eff)?;
    let ln_d1 = ln_acf_equal(t1, tau, x0, eff)?;
    let ln_d2 = ln_acf_equal(t2, tau, x0, eff)?;
    if !ln_d1.is_finite() || !ln_d2.is_finite() {
        return Err(Error::Domain(format!(
            "normalized ACF undefined: zero second moment at t1 = {t1} or t2 = {t2}"
        )));
    }
    Ok((ln_num - 0.5 * (ln_d1 + ln_d2)).exp())
}

/// Result of a coherence-time search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceEstimate {
    /// Smallest t2 found with ρ(0,t2) < η (s).
    pub time: f64,
    /// Whether ρ(0,·) was nonincreasing on the scan grid up to the crossing.
    /// The first crossing is returned either way.
    pub monotone_scan: bool,
}

/// Number of forward-scan points used by [`coherence_time`].
const COHERENCE_SCAN_POINTS: usize = 1000;
/// Relative bisection tolerance for the crossing time.
const COHERENCE_REL_TOL: f64 = 1e-3;

/// Default search horizon: one hundred bit intervals comfortably covers the
/// decorrelation scales of interest here.
pub fn default_horizon(t_bit: f64) -> f64 {
    100.0 * t_bit
}

/// Coherence time T^c: the smallest t2 in (0, t_max] with ρ(0,t2) < η,
/// located by a forward scan (step t_max/1000) refined by bisection to 0.1%
/// relative tolerance.
pub fn coherence_time(
    eta: f64,
    tau: f64,
    x0: f64,
    eff: &EffectiveDiffusion,
    t_max: f64,
) -> Result<CoherenceEstimate> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Argument(format!("eta must lie in (0, 1), got {eta}")));
    }
    if !(t_max > 0.0) {
        return Err(Error::Argument(format!("t_max must be > 0, got {t_max}")));
    }
    let rho_at = |t: f64| normalized_acf(0.0, t, tau, x0, eff);

    let step = t_max / COHERENCE_SCAN_POINTS as f64;
    let mut monotone = true;
    let mut prev_t = 0.0;
    let mut prev_rho = 1.0;
    for k in 1..=COHERENCE_SCAN_POINTS {
        let t = step * k as f64;
        let rho = rho_at(t)?;
        if rho > prev_rho * (1.0 + 1e-12) {
            monotone = false;
        }
        if rho < eta {
            if k == 1 {
                return Ok(CoherenceEstimate { time: t, monotone_scan: monotone });
            }
            let (mut lo, mut hi) = (prev_t, t);
            while hi - lo > COHERENCE_REL_TOL * hi {
                let mid = 0.5 * (lo + hi);
                if rho_at(mid)? < eta {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(CoherenceEstimate { time: hi, monotone_scan: monotone });
        }
        prev_t = t;
        prev_rho = rho;
    }
    Err(Error::CoherenceNotReached { rho_at_horizon: rho_at(t_max)? })
}

/// Channel statistics evaluated over a release-time grid.
#[derive(Debug, Clone)]
pub struct ChannelStats {
    /// Release-time grid (s).
    pub times: Vec<f64>,
    /// m(t) per grid point.
    pub mean: Vec<f64>,
    /// φ(t,t) per grid point.
    pub phi_diag: Vec<f64>,
    /// σ²(t) per grid point.
    pub sigma2: Vec<f64>,
    /// Optional (t1, t2, ρ(t1,t2)) triples.
    pub rho_pairs: Vec<(f64, f64, f64)>,
    /// Coherence time for the requested η, if one was requested and reached.
    pub coherence_time: Option<f64>,
}

impl ChannelStats {
    /// Evaluate mean, second moment, and variance on `times`, ρ on `pairs`,
    /// and optionally the coherence time for `(eta, t_max)`.
    pub fn evaluate(
        tau: f64,
        x0: f64,
        eff: &EffectiveDiffusion,
        times: &[f64],
        pairs: &[(f64, f64)],
        eta_horizon: Option<(f64, f64)>,
    ) -> Result<ChannelStats> {
        let mut mean = Vec::with_capacity(times.len());
        let mut phi_diag = Vec::with_capacity(times.len());
        let mut sigma2 = Vec::with_capacity(times.len());
        for &t in times {
            mean.push(mean_cir(t, tau, x0, eff)?);
            phi_diag.push(acf_equal(t, tau, x0, eff)?);
            sigma2.push(variance(t, tau, x0, eff)?);
        }
        let mut rho_pairs = Vec::with_capacity(pairs.len());
        for &(t1, t2) in pairs {
            rho_pairs.push((t1, t2, normalized_acf(t1, t2, tau, x0, eff)?));
        }
        let coherence = match eta_horizon {
            Some((eta, t_max)) => Some(coherence_time(eta, tau, x0, eff, t_max)?.time),
            None => None,
        };
        Ok(ChannelStats { times: times.to_vec(), mean, phi_diag, sigma2, rho_pairs, coherence_time: coherence })
    }
}
