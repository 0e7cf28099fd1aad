//! Particle-level validation: the Brownian simulator against the closed-form
//! statistics it is supposed to realize.

use mcchan_core::channel::{cir_conditional, mean_cir};
use mcchan_core::config::{derive_effective, PhysicalConfig};
use mcchan_core::detect::BitSequence;
use mcchan_core::rng::{run_trials, RngStream, LANE_PARTICLES};
use mcchan_core::sim::{impulse_response_estimate, simulate_transmission};
use mcchan_core::stats::mean_stderr;

#[test]
fn impulse_estimate_tracks_mean_response_at_nonzero_release_time() {
    let cfg = PhysicalConfig { trials: 2000, seed: 42, ..PhysicalConfig::baseline() };
    let eff = derive_effective(&cfg).unwrap();
    let t = 5e-3;
    let est = impulse_response_estimate(&cfg, t, cfg.trials, None).unwrap();
    let last = est.taus.len() - 1;
    let expected = mean_cir(t, cfg.tau_s, cfg.r_0, &eff).unwrap();
    let dev = (est.h_mean[last] - expected).abs();
    assert!(
        dev <= 3.0 * est.h_stderr[last],
        "h-hat {} vs m(t) {expected} (3 se = {})",
        est.h_mean[last],
        3.0 * est.h_stderr[last]
    );
}

#[test]
fn halving_the_step_leaves_the_estimate_statistically_unchanged() {
    let coarse_cfg = PhysicalConfig { trials: 1500, seed: 7, ..PhysicalConfig::baseline() };
    let fine_cfg = PhysicalConfig { dt: 2.5e-6, seed: 8, ..coarse_cfg.clone() };
    let coarse = impulse_response_estimate(&coarse_cfg, 0.0, coarse_cfg.trials, None).unwrap();
    let fine = impulse_response_estimate(&fine_cfg, 0.0, fine_cfg.trials, None).unwrap();
    let (hc, sec) = (*coarse.h_mean.last().unwrap(), *coarse.h_stderr.last().unwrap());
    let (hf, sef) = (*fine.h_mean.last().unwrap(), *fine.h_stderr.last().unwrap());
    assert!((coarse.taus.last().unwrap() - fine.taus.last().unwrap()).abs() < 1e-12);
    let combined = (sec * sec + sef * sef).sqrt();
    assert!(
        (hc - hf).abs() <= 2.0 * combined,
        "step halving moved the estimate: {hc} vs {hf} (2 se = {})",
        2.0 * combined
    );
}

#[test]
fn single_one_transmission_matches_expected_count() {
    // One interval, bit 1: the release-time distance is deterministic, so
    // the expected count is N_A times the conditional response plus noise.
    let cfg = PhysicalConfig { seq_len: 1, trials: 2000, seed: 5, ..PhysicalConfig::baseline() };
    let eff = derive_effective(&cfg).unwrap();
    let bits = BitSequence::from_bools(vec![true]);
    let counts: Vec<f64> = run_trials(cfg.trials, None, |trial| {
        let mut rng = RngStream::new(cfg.seed, trial).lane(LANE_PARTICLES);
        simulate_transmission(&cfg, &bits, &mut rng).unwrap().counts[0] as f64
    });
    let (mean, se) = mean_stderr(&counts);
    let expected =
        cfg.n_a as f64 * cir_conditional(cfg.r_0, cfg.tau_s, &eff).unwrap() + cfg.n_a_bar;
    assert!(
        (mean - expected).abs() <= 3.0 * se,
        "count mean {mean} vs {expected} (3 se = {})",
        3.0 * se
    );
}

#[test]
fn two_ones_show_the_intersymbol_term() {
    // Static channel: the second sample sees the first interval's molecules
    // at lag T + tau_s on top of the current-bit term.
    let cfg = PhysicalConfig {
        d_tx: 0.0,
        d_rx: 0.0,
        n_a: 10_000,
        seq_len: 2,
        trials: 1000,
        seed: 12,
        ..PhysicalConfig::baseline()
    };
    let eff = derive_effective(&cfg).unwrap();
    let bits = BitSequence::from_bools(vec![true, true]);
    let per_trial: Vec<[f64; 2]> = run_trials(cfg.trials, None, |trial| {
        let mut rng = RngStream::new(cfg.seed, trial).lane(LANE_PARTICLES);
        let s = simulate_transmission(&cfg, &bits, &mut rng).unwrap();
        [s.counts[0] as f64, s.counts[1] as f64]
    });
    let first: Vec<f64> = per_trial.iter().map(|c| c[0]).collect();
    let second: Vec<f64> = per_trial.iter().map(|c| c[1]).collect();
    let (m1, se1) = mean_stderr(&first);
    let (m2, se2) = mean_stderr(&second);
    let h_now = cir_conditional(cfg.r_0, cfg.tau_s, &eff).unwrap();
    let h_lag = cir_conditional(cfg.r_0, cfg.t_bit + cfg.tau_s, &eff).unwrap();
    let expected1 = cfg.n_a as f64 * h_now + cfg.n_a_bar;
    let expected2 = cfg.n_a as f64 * (h_now + h_lag) + cfg.n_a_bar;
    assert!((m1 - expected1).abs() <= 3.0 * se1, "first sample {m1} vs {expected1}");
    assert!((m2 - expected2).abs() <= 3.0 * se2, "second sample {m2} vs {expected2}");
    // The interference term itself, on the paired difference.
    let diffs: Vec<f64> = per_trial.iter().map(|c| c[1] - c[0]).collect();
    let (md, sed) = mean_stderr(&diffs);
    let isi = cfg.n_a as f64 * h_lag;
    assert!((md - isi).abs() <= 3.0 * sed, "interference term {md} vs {isi} (3 se = {})", 3.0 * sed);
}

#[test]
fn particle_counts_track_first_moment_theory_with_mobility() {
    // Cross-validation of the particle pipeline against the closed-form
    // mean: with mobile nodes the expected count at interval j is the sum of
    // mean responses of all earlier releases (plus noise). Short intervals
    // make the interference terms substantial.
    let cfg = PhysicalConfig {
        t_bit: 0.1e-3,
        n_a: 3000,
        seq_len: 10,
        trials: 600,
        seed: 33,
        ..PhysicalConfig::baseline()
    };
    let eff = derive_effective(&cfg).unwrap();
    let pattern: Vec<bool> = (0..cfg.seq_len).map(|j| j % 2 == 0).collect();
    let bits = BitSequence::from_bools(pattern.clone());
    let per_trial: Vec<Vec<f64>> = run_trials(cfg.trials, None, |trial| {
        let mut rng = RngStream::new(cfg.seed, trial).lane(LANE_PARTICLES);
        simulate_transmission(&cfg, &bits, &mut rng)
            .unwrap()
            .counts
            .iter()
            .map(|&c| c as f64)
            .collect()
    });
    for j in 0..cfg.seq_len {
        let samples: Vec<f64> = per_trial.iter().map(|c| c[j]).collect();
        let (mean, se) = mean_stderr(&samples);
        let mut expected = cfg.n_a_bar;
        for i in 0..=j {
            if pattern[i] {
                let lag = (j - i) as f64 * cfg.t_bit + cfg.tau_s;
                expected +=
                    cfg.n_a as f64 * mean_cir(i as f64 * cfg.t_bit, lag, cfg.r_0, &eff).unwrap();
            }
        }
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "interval {j}: sim {mean} vs theory {expected} (3 se = {})",
            3.0 * se
        );
    }
}
