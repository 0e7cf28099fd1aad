//! Monte-Carlo evaluation of the expected per-interval error probability for
//! detectors with perfect and outdated channel knowledge.
//!
//! The expectation runs over relative trajectories (sampled exactly at bit
//! boundaries), transmitted bit sequences (i.i.d. with the configured prior)
//! and received counts (Poisson around the realized means). Both CSI modes
//! are evaluated on common random numbers: trajectory, bits, and counts live
//! in purpose-keyed RNG lanes that do not depend on the CSI mode, so the two
//! detectors see the identical channel and the gap estimator loses the
//! shared-noise variance. All reductions run in trial order, which makes
//! results bit-identical across thread counts.

use rand_distr::{Distribution, Poisson};

use crate::config::{EffectiveDiffusion, PhysicalConfig};
use crate::detect::{
    conditional_error_prob, detect_sequence, detect_sequence_genie, optimal_threshold,
    signal_model, BitSequence, CsiMode, ThresholdBits,
};
use crate::rng::{run_trials, RngStream, LANE_BITS, LANE_COUNTS, LANE_TRAJECTORY};
use crate::sim::{sample_relative_trajectory, McEstimate, ObservationSeries, RelativeTrajectory};
use crate::stats::mean_stderr;
use crate::{Error, Result};

/// Expected error probabilities of one bit interval under both CSI modes.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    /// Bit-interval number, 1-based (sampling instant (j−1)·T + τ_s).
    pub j: usize,
    pub pe_perfect: f64,
    pub pe_outdated: f64,
    /// |pe_outdated − pe_perfect|.
    pub gap: f64,
    pub stderr_perfect: f64,
    pub stderr_outdated: f64,
    pub trials: u64,
}

/// Per-interval records plus sequence-averaged error probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub records: Vec<BerRecord>,
    /// (1/L)·Σ_j pe_perfect(j).
    pub avg_perfect: f64,
    /// (1/L)·Σ_j pe_outdated(j).
    pub avg_outdated: f64,
    pub trials: u64,
}

/// One sampled channel/data realization shared by both detectors.
struct TrialRealization {
    trajectory: RelativeTrajectory,
    bits: BitSequence,
    counts: ObservationSeries,
}

fn sample_realization(config: &PhysicalConfig, eff: &EffectiveDiffusion, trial: u64) -> TrialRealization {
    let stream = RngStream::new(config.seed, trial);
    let mut traj_rng = stream.lane(LANE_TRAJECTORY);
    let trajectory = sample_relative_trajectory(config, eff, &mut traj_rng);
    let mut bits_rng = stream.lane(LANE_BITS);
    let bits = BitSequence::random(config.seq_len, config.p1, &mut bits_rng);
    let mut counts_rng = stream.lane(LANE_COUNTS);
    let mut counts = Vec::with_capacity(config.seq_len);
    let mut times = Vec::with_capacity(config.seq_len);
    for j in 0..config.seq_len {
        let mean = crate::detect::mean_received_perfect(bits.as_slice(), j, &trajectory, config, eff)
            .expect("validated config");
        let count = if mean > 0.0 {
            Poisson::new(mean).expect("positive mean").sample(&mut counts_rng) as u64
        } else {
            0
        };
        counts.push(count);
        times.push(j as f64 * config.t_bit + config.tau_s);
    }
    TrialRealization { trajectory, bits, counts: ObservationSeries { times, counts } }
}

fn check_interval(config: &PhysicalConfig, j: usize) -> Result<usize> {
    if j < 1 || j > config.seq_len {
        return Err(Error::Argument(format!(
            "bit interval j must satisfy 1 <= j <= {}, got {j}",
            config.seq_len
        )));
    }
    Ok(j - 1)
}

/// Semianalytic expected error probability of interval `j` (1-based):
/// trajectories and *past* bits are sampled, thresholds use the true bits
/// (genie aid, so the closed-form conditional error applies per
/// realization), and the current bit is averaged out analytically:
/// pe = P0·Pr(N ≥ ξ | λ0) + P1·Pr(N < ξ | λ1) under the true count
/// statistics. For a static channel the integrand is constant and the
/// estimate carries zero Monte-Carlo variance.
pub fn expected_error_semianalytic(
    config: &PhysicalConfig,
    eff: &EffectiveDiffusion,
    j: usize,
    csi: CsiMode,
    trials: u64,
    threads: Option<usize>,
) -> Result<McEstimate> {
    config.validate()?;
    let idx = check_interval(config, j)?;
    let values: Vec<f64> = run_trials(trials, threads, |trial| {
        let stream = RngStream::new(config.seed, trial);
        let mut traj_rng = stream.lane(LANE_TRAJECTORY);
        let trajectory = sample_relative_trajectory(config, eff, &mut traj_rng);
        let mut bits_rng = stream.lane(LANE_BITS);
        let bits = BitSequence::random(config.seq_len, config.p1, &mut bits_rng);

        // Threshold from the detector's channel view, genie past bits.
        let view = signal_model(bits.as_slice(), idx, csi, &trajectory, config, eff)
            .expect("validated config");
        // True count statistics come from the realized trajectory.
        let truth = signal_model(bits.as_slice(), idx, CsiMode::Perfect, &trajectory, config, eff)
            .expect("validated config");
        let xi = match optimal_threshold(view, config.p0(), config.p1) {
            Ok(xi) => xi,
            // Degenerate view: same midpoint fallback as the decoder.
            Err(_) => (view.lambda0 + (view.lambda1 - view.lambda0) / 2.0).ceil().max(0.0) as u64,
        };
        config.p0() * conditional_error_prob(false, truth.lambda0, xi)
            + config.p1 * conditional_error_prob(true, truth.lambda1, xi)
    });
    let (mean, stderr) = mean_stderr(&values);
    Ok(McEstimate { mean, stderr, trials })
}

/// Fully empirical expected error probability of interval `j` (1-based):
/// sample trajectory, bits, and Poisson counts, run the sequential decoder,
/// and average the error indicator. This is the default pipeline because the
/// practical detector feeds decisions back into its thresholds.
pub fn expected_error_empirical(
    config: &PhysicalConfig,
    eff: &EffectiveDiffusion,
    j: usize,
    csi: CsiMode,
    policy: ThresholdBits,
    trials: u64,
    threads: Option<usize>,
) -> Result<McEstimate> {
    config.validate()?;
    let idx = check_interval(config, j)?;
    let values: Vec<f64> = run_trials(trials, threads, |trial| {
        let real = sample_realization(config, eff, trial);
        let decoded = match policy {
            ThresholdBits::Estimated => {
                detect_sequence(&real.counts, csi, &real.trajectory, config, eff)
            }
            ThresholdBits::Genie => detect_sequence_genie(
                &real.counts,
                csi,
                &real.trajectory,
                &real.bits,
                config,
                eff,
            ),
        }
        .expect("validated config");
        (decoded.bits.bit(idx) != real.bits.bit(idx)) as u64 as f64
    });
    let (mean, stderr) = mean_stderr(&values);
    Ok(McEstimate { mean, stderr, trials })
}

/// Evaluate the full error-probability curve for both CSI modes on common
/// random numbers, plus the sequence-averaged error probability.
pub fn ber_curve(
    config: &PhysicalConfig,
    eff: &EffectiveDiffusion,
    policy: ThresholdBits,
    trials: u64,
    threads: Option<usize>,
) -> Result<BerCurve> {
    config.validate()?;
    let len = config.seq_len;
    let outcomes: Vec<(Vec<bool>, Vec<bool>)> = run_trials(trials, threads, |trial| {
        let real = sample_realization(config, eff, trial);
        let decode = |csi: CsiMode| match policy {
            ThresholdBits::Estimated => {
                detect_sequence(&real.counts, csi, &real.trajectory, config, eff)
            }
            ThresholdBits::Genie => detect_sequence_genie(
                &real.counts,
                csi,
                &real.trajectory,
                &real.bits,
                config,
                eff,
            ),
        };
        let perfect = decode(CsiMode::Perfect).expect("validated config");
        let outdated = decode(CsiMode::Outdated).expect("validated config");
        let errs = |out: &crate::detect::DetectionOutcome| {
            (0..len).map(|i| out.bits.bit(i) != real.bits.bit(i)).collect::<Vec<bool>>()
        };
        (errs(&perfect), errs(&outdated))
    });

    let mut records = Vec::with_capacity(len);
    for idx in 0..len {
        let perfect: Vec<f64> = outcomes.iter().map(|(p, _)| p[idx] as u64 as f64).collect();
        let outdated: Vec<f64> = outcomes.iter().map(|(_, o)| o[idx] as u64 as f64).collect();
        let (pe_p, se_p) = mean_stderr(&perfect);
        let (pe_o, se_o) = mean_stderr(&outdated);
        records.push(BerRecord {
            j: idx + 1,
            pe_perfect: pe_p,
            pe_outdated: pe_o,
            gap: (pe_o - pe_p).abs(),
            stderr_perfect: se_p,
            stderr_outdated: se_o,
            trials,
        });
    }
    let avg_perfect = records.iter().map(|r| r.pe_perfect).sum::<f64>() / len as f64;
    let avg_outdated = records.iter().map(|r| r.pe_outdated).sum::<f64>() / len as f64;
    Ok(BerCurve { records, avg_perfect, avg_outdated, trials })
}
