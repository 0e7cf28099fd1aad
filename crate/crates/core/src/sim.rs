//! Particle-based Monte-Carlo simulation of transmitter, receiver, and
//! molecule diffusion, plus trajectory-level estimators used to validate the
//! closed-form channel statistics.
//!
//! Free diffusion is exactly simulable at any step size (increments are
//! Gaussian), so detector-level experiments sample relative positions at bit
//! boundaries directly, while impulse-response validation steps all particles
//! at the configured Δt because molecule counting requires it.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::channel::cir_conditional;
use crate::config::{EffectiveDiffusion, PhysicalConfig, Vec3};
use crate::detect::BitSequence;
use crate::rng::{run_trials, RngStream, LANE_PARTICLES, LANE_TRAJECTORY};
use crate::stats::mean_stderr;
use crate::{Error, Result};

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Relative transmitter–receiver displacement sampled at bit-interval
/// boundaries: `samples[j] = r(j·T)` for j = 0..L−1, with
/// `samples[0] = [x0, 0, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeTrajectory {
    pub samples: Vec<Vec3>,
    /// Sampling step, the bit interval T (s).
    pub step: f64,
}

impl RelativeTrajectory {
    /// Distance |r(j·T)| for the j-th bit interval (0-based).
    pub fn distance(&self, j: usize) -> f64 {
        self.samples[j].norm()
    }

    /// A static trajectory pinned at the initial distance.
    pub fn frozen(x0: f64, step: f64, len: usize) -> Self {
        RelativeTrajectory { samples: vec![Vec3::new(x0, 0.0, 0.0); len], step }
    }
}

/// Molecule counts observed inside the receiver at a series of times.
///
/// `times` are seconds from the run origin: the release instant for impulse
/// runs, the start of the first bit interval for transmission runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    pub times: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Advance a particle by one free-diffusion step: each coordinate gains an
/// independent zero-mean Gaussian with variance 2·D·dt.
pub fn gaussian_step<R: Rng>(pos: Vec3, d: f64, dt: f64, rng: &mut R) -> Vec3 {
    let normal = Normal::new(0.0, (2.0 * d * dt).sqrt()).expect("valid std dev");
    Vec3::new(
        pos.x + normal.sample(rng),
        pos.y + normal.sample(rng),
        pos.z + normal.sample(rng),
    )
}

/// Sample the relative transmitter–receiver trajectory at bit-interval
/// resolution. Exact at this step size: free-diffusion increments over T are
/// Gaussian with per-coordinate variance 2·D₂·T.
pub fn sample_relative_trajectory<R: Rng>(
    config: &PhysicalConfig,
    eff: &EffectiveDiffusion,
    rng: &mut R,
) -> RelativeTrajectory {
    let mut samples = Vec::with_capacity(config.seq_len);
    let mut current = Vec3::new(config.r_0, 0.0, 0.0);
    samples.push(current);
    for _ in 1..config.seq_len {
        current = gaussian_step(current, eff.d2, config.t_bit, rng);
        samples.push(current);
    }
    RelativeTrajectory { samples, step: config.t_bit }
}

fn steps_in(span: f64, dt: f64, what: &str) -> Result<usize> {
    let ratio = span / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::Argument(format!("{what} ({span} s) must be a multiple of dt ({dt} s)")));
    }
    Ok(rounded as usize)
}

/// Simulate one impulse-response realization: advance transmitter and
/// receiver to the release time, release all molecules at the transmitter's
/// center, then track everything in steps of Δt, counting molecules inside
/// the (transparent) receiver at every step up to the sampling offset τ_s.
///
/// `counts[k] / N_A` estimates h(release_time, (k+1)·Δt).
pub fn simulate_impulse<R: Rng>(
    config: &PhysicalConfig,
    release_time: f64,
    rng: &mut R,
) -> Result<ObservationSeries> {
    if release_time < 0.0 {
        return Err(Error::Argument(format!("release time must be >= 0, got {release_time}")));
    }
    let pre_steps = steps_in(release_time, config.dt, "release time")?;
    let obs_steps = steps_in(config.tau_s, config.dt, "tau_s")?;

    // Receiver path: through the release instant and the observation window.
    let mut rx = Vec3::new(config.r_0, 0.0, 0.0);
    for _ in 0..pre_steps {
        rx = gaussian_step(rx, config.d_rx, config.dt, rng);
    }
    let mut rx_path = Vec::with_capacity(obs_steps);
    for _ in 0..obs_steps {
        rx = gaussian_step(rx, config.d_rx, config.dt, rng);
        rx_path.push(rx);
    }

    // Transmitter only matters up to the release instant.
    let mut tx = Vec3::ZERO;
    for _ in 0..pre_steps {
        tx = gaussian_step(tx, config.d_tx, config.dt, rng);
    }

    let radius_sq = config.a_rx * config.a_rx;
    let mut counts = vec![0u64; obs_steps];
    for _ in 0..config.n_a {
        let mut mol = tx;
        for (k, rx_pos) in rx_path.iter().enumerate() {
            mol = gaussian_step(mol, config.d_a, config.dt, rng);
            if (mol - *rx_pos).norm_sq() <= radius_sq {
                counts[k] += 1;
            }
        }
    }
    let times = (1..=obs_steps).map(|k| k as f64 * config.dt).collect();
    Ok(ObservationSeries { times, counts })
}

/// Average impulse-response estimate over independent realizations.
#[derive(Debug, Clone)]
pub struct ImpulseEstimate {
    /// Observation lags (s).
    pub taus: Vec<f64>,
    /// Estimated h(t, τ) per lag.
    pub h_mean: Vec<f64>,
    /// Standard error per lag.
    pub h_stderr: Vec<f64>,
}

/// Run [`simulate_impulse`] over `trials` independent realizations and
/// average counts/N_A per observation lag.
pub fn impulse_response_estimate(
    config: &PhysicalConfig,
    release_time: f64,
    trials: u64,
    threads: Option<usize>,
) -> Result<ImpulseEstimate> {
    config.validate()?;
    if config.n_a == 0 {
        return Err(Error::Argument("impulse estimation needs n_a > 0".into()));
    }
    steps_in(release_time, config.dt, "release time")?;
    let per_trial: Vec<Vec<u64>> = run_trials(trials, threads, |trial| {
        let mut rng = RngStream::new(config.seed, trial).lane(LANE_PARTICLES);
        simulate_impulse(config, release_time, &mut rng)
            .expect("validated config cannot fail")
            .counts
    });
    let obs_steps = per_trial[0].len();
    let mut h_mean = Vec::with_capacity(obs_steps);
    let mut h_stderr = Vec::with_capacity(obs_steps);
    for k in 0..obs_steps {
        let fractions: Vec<f64> =
            per_trial.iter().map(|c| c[k] as f64 / config.n_a as f64).collect();
        let (m, se) = mean_stderr(&fractions);
        h_mean.push(m);
        h_stderr.push(se);
    }
    let taus = (1..=obs_steps).map(|k| k as f64 * config.dt).collect();
    Ok(ImpulseEstimate { taus, h_mean, h_stderr })
}

/// Simulate one full transmission: molecules are released at the start of
/// every bit interval carrying a 1, all particles advance in steps of Δt,
/// and the count inside the receiver is recorded at each sampling instant
/// j·T + τ_s. Background noise adds an independent Poisson(n̄_A) count per
/// observation. Molecules are never absorbed, so earlier intervals keep
/// contributing intersymbol interference.
pub fn simulate_transmission<R: Rng>(
    config: &PhysicalConfig,
    bits: &BitSequence,
    rng: &mut R,
) -> Result<ObservationSeries> {
    if bits.len() != config.seq_len {
        return Err(Error::Argument(format!(
            "bit sequence length {} does not match configured length {}",
            bits.len(),
            config.seq_len
        )));
    }
    let steps_per_bit = steps_in(config.t_bit, config.dt, "t_bit")?;
    let offset_steps = steps_in(config.tau_s, config.dt, "tau_s")?;
    let total_steps = (config.seq_len - 1) * steps_per_bit + offset_steps;

    let noise = if config.n_a_bar > 0.0 {
        Some(Poisson::new(config.n_a_bar).expect("valid noise mean"))
    } else {
        None
    };

    let mut tx = Vec3::ZERO;
    let mut rx = Vec3::new(config.r_0, 0.0, 0.0);
    let mut molecules: Vec<Vec3> = Vec::new();
    let radius_sq = config.a_rx * config.a_rx;

    let mut times = Vec::with_capacity(config.seq_len);
    let mut counts = Vec::with_capacity(config.seq_len);

    for step in 1..=total_steps {
        // Releases happen at interval starts, i.e. at the instant the
        // previous step landed on; the very first release is at time 0.
        if (step - 1) % steps_per_bit == 0 {
            let j = (step - 1) / steps_per_bit;
            if j < config.seq_len && bits.bit(j) {
                molecules.extend(std::iter::repeat(tx).take(config.n_a as usize));
            }
        }

        tx = gaussian_step(tx, config.d_tx, config.dt, rng);
        rx = gaussian_step(rx, config.d_rx, config.dt, rng);
        for mol in &mut molecules {
            *mol = gaussian_step(*mol, config.d_a, config.dt, rng);
        }

        if step >= offset_steps && (step - offset_steps) % steps_per_bit == 0 {
            let j = (step - offset_steps) / steps_per_bit;
            if j < config.seq_len {
                let inside =
                    molecules.iter().filter(|m| (**m - rx).norm_sq() <= radius_sq).count() as u64;
                let noise_count = match &noise {
                    Some(p) => p.sample(rng) as u64,
                    None => 0,
                };
                times.push(step as f64 * config.dt);
                counts.push(inside + noise_count);
            }
        }
    }
    debug_assert_eq!(counts.len(), config.seq_len);
    Ok(ObservationSeries { times, counts })
}

/// Monte-Carlo estimate of the autocorrelation E{h(t1,τ)·h(t2,τ)}: relative
/// positions are sampled exactly at t1 and t2 (Markov chain of Gaussian
/// increments) and the impulse response is evaluated analytically on them.
/// Molecules are not simulated here; this isolates the second-order
/// statistics of the trajectory process.
pub fn empirical_acf(
    config: &PhysicalConfig,
    eff: &EffectiveDiffusion,
    t1: f64,
    t2: f64,
    tau: f64,
    trials: u64,
    threads: Option<usize>,
) -> Result<McEstimate> {
    if t2 < t1 || t1 < 0.0 {
        return Err(Error::Argument(format!("requires 0 <= t1 <= t2, got ({t1}, {t2})")));
    }
    cir_conditional(config.r_0, tau, eff)?;
    let r0 = Vec3::new(config.r_0, 0.0, 0.0);
    let values: Vec<f64> = run_trials(trials, threads, |trial| {
        let mut rng = RngStream::new(config.seed, trial).lane(LANE_TRAJECTORY);
        let r1 = gaussian_step(r0, eff.d2, t1, &mut rng);
        let r2 = gaussian_step(r1, eff.d2, t2 - t1, &mut rng);
        let h1 = cir_conditional(r1.norm(), tau, eff).expect("domain checked above");
        let h2 = cir_conditional(r2.norm(), tau, eff).expect("domain checked above");
        h1 * h2
    });
    let (mean, stderr) = mean_stderr(&values);
    Ok(McEstimate { mean, stderr, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::derive_effective;
    use crate::stats::sample_variance;
    use approx::assert_relative_eq;

    fn baseline() -> (PhysicalConfig, EffectiveDiffusion) {
        let cfg = PhysicalConfig::baseline();
        let eff = derive_effective(&cfg).unwrap();
        (cfg, eff)
    }

    #[test]
    fn gaussian_step_zero_diffusion_is_identity() {
        let mut rng = RngStream::new(1, 0).rng();
        let pos = Vec3::new(1.0, -2.0, 3.0);
        let stepped = gaussian_step(pos, 0.0, 1.0, &mut rng);
        assert_eq!(stepped, pos);
    }

    #[test]
    fn gaussian_step_moments_match_target() {
        let d = 5e-9;
        let dt = 5e-6;
        let mut rng = RngStream::new(2, 0).rng();
        let n = 1_000_000;
        let mut deltas = Vec::with_capacity(n);
        let mut pos = Vec3::ZERO;
        for _ in 0..n {
            let next = gaussian_step(pos, d, dt, &mut rng);
            deltas.push(next.x - pos.x);
            pos = next;
        }
        let target = 2.0 * d * dt;
        let var = sample_variance(&deltas);
        assert!((var - target).abs() < 0.01 * target, "variance {var} vs {target}");
        let (mean, se) = mean_stderr(&deltas);
        assert!(mean.abs() <= 3.0 * se, "mean {mean} exceeds 3 se {se}");
    }

    #[test]
    fn trajectory_starts_at_initial_distance() {
        let (cfg, eff) = baseline();
        let mut rng = RngStream::new(3, 0).rng();
        let traj = sample_relative_trajectory(&cfg, &eff, &mut rng);
        assert_eq!(traj.samples.len(), cfg.seq_len);
        assert_eq!(traj.samples[0], Vec3::new(cfg.r_0, 0.0, 0.0));
        assert_eq!(traj.step, cfg.t_bit);
    }

    #[test]
    fn trajectory_static_when_both_nodes_fixed() {
        let cfg = PhysicalConfig { d_tx: 0.0, d_rx: 0.0, ..PhysicalConfig::baseline() };
        let eff = derive_effective(&cfg).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        let traj = sample_relative_trajectory(&cfg, &eff, &mut rng);
        for s in &traj.samples {
            assert_eq!(*s, Vec3::new(cfg.r_0, 0.0, 0.0));
        }
    }

    #[test]
    fn trajectory_mean_squared_displacement() {
        let (cfg, eff) = baseline();
        let trials = 100_000u64;
        let js = [1usize, 10, 49];
        let sq: Vec<[f64; 3]> = run_trials(trials, None, |trial| {
            let mut rng = RngStream::new(cfg.seed, trial).lane(LANE_TRAJECTORY);
            let traj = sample_relative_trajectory(&cfg, &eff, &mut rng);
            let r0 = Vec3::new(cfg.r_0, 0.0, 0.0);
            [
                (traj.samples[js[0]] - r0).norm_sq(),
                (traj.samples[js[1]] - r0).norm_sq(),
                (traj.samples[js[2]] - r0).norm_sq(),
            ]
        });
        for (slot, &j) in js.iter().enumerate() {
            let vals: Vec<f64> = sq.iter().map(|v| v[slot]).collect();
            let (mean, _) = mean_stderr(&vals);
            let expected = 6.0 * eff.d2 * j as f64 * cfg.t_bit;
            assert!(
                (mean - expected).abs() < 0.02 * expected,
                "MSD at j = {j}: {mean} vs {expected}"
            );
        }
    }

    #[test]
    fn impulse_with_no_molecules_counts_nothing() {
        let (mut cfg, _) = baseline();
        cfg.n_a = 0;
        let mut rng = RngStream::new(5, 0).rng();
        let series = simulate_impulse(&cfg, 0.0, &mut rng).unwrap();
        assert!(series.counts.iter().all(|&c| c == 0));
        assert_eq!(series.times.len(), 7);
    }

    #[test]
    fn impulse_estimate_matches_conditional_cir_at_release() {
        // Frozen conditional response at the baseline operating point.
        let (cfg, _) = baseline();
        let cfg = PhysicalConfig { trials: 1000, seed: 11, ..cfg };
        let est = impulse_response_estimate(&cfg, 0.0, cfg.trials, None).unwrap();
        let last = est.taus.len() - 1;
        assert_relative_eq!(est.taus[last], cfg.tau_s, max_relative = 1e-12);
        let expected = 1.0388891448514225e-3;
        let dev = (est.h_mean[last] - expected).abs();
        assert!(
            dev <= 3.0 * est.h_stderr[last],
            "h-hat {} vs {expected} (3 se = {})",
            est.h_mean[last],
            3.0 * est.h_stderr[last]
        );
    }

    #[test]
    fn transmission_all_zero_bits_is_pure_noise() {
        let (cfg, _) = baseline();
        let cfg = PhysicalConfig { seq_len: 4, ..cfg };
        let bits = BitSequence::from_bools(vec![false; 4]);
        let trials = 3000u64;
        let sums: Vec<f64> = run_trials(trials, None, |trial| {
            let mut rng = RngStream::new(cfg.seed, trial).lane(LANE_PARTICLES);
            let series = simulate_transmission(&cfg, &bits, &mut rng).unwrap();
            series.counts.iter().map(|&c| c as f64).sum::<f64>() / 4.0
        });
        let (mean, se) = mean_stderr(&sums);
        assert!(
            (mean - cfg.n_a_bar).abs() <= 3.0 * se,
            "noise mean {mean} vs {} (3 se = {})",
            cfg.n_a_bar,
            3.0 * se
        );
    }

    #[test]
    fn empirical_acf_static_channel_is_exact() {
        let cfg = PhysicalConfig { d_tx: 0.0, d_rx: 0.0, ..PhysicalConfig::baseline() };
        let eff = derive_effective(&cfg).unwrap();
        let est = empirical_acf(&cfg, &eff, 5e-3, 10e-3, cfg.tau_s, 200, None).unwrap();
        let h = cir_conditional(cfg.r_0, cfg.tau_s, &eff).unwrap();
        assert_relative_eq!(est.mean, h * h, max_relative = 1e-12);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn observation_series_is_deterministic_per_stream() {
        let (cfg, _) = baseline();
        let cfg = PhysicalConfig { seq_len: 2, n_a: 500, ..cfg };
        let bits = BitSequence::from_bools(vec![true, true]);
        let run = |stream: RngStream| {
            let mut rng = stream.lane(LANE_PARTICLES);
            simulate_transmission(&cfg, &bits, &mut rng).unwrap()
        };
        let a = run(RngStream::new(9, 3));
        let b = run(RngStream::new(9, 3));
        assert_eq!(a, b);
        let c = run(RngStream::new(9, 4));
        assert_ne!(a, c);
    }
}
