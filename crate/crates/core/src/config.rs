//! Physical and protocol parameters, geometry primitives, and derived
//! quantities shared by every other module. All values are SI.

use crate::{Error, Result};

/// A point or displacement in 3-D space (meters).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// All physical and protocol parameters of one link, in SI base units.
///
/// The transmitter sits at the origin at time zero and the receiver at
/// `[r_0, 0, 0]`; both diffuse freely, as do the signaling molecules.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalConfig {
    /// Diffusion coefficient of the signaling molecules (m²/s).
    pub d_a: f64,
    /// Transmitter diffusion coefficient (m²/s).
    pub d_tx: f64,
    /// Receiver diffusion coefficient (m²/s).
    pub d_rx: f64,
    /// Receiver radius (m).
    pub a_rx: f64,
    /// Initial transmitter–receiver distance x₀ (m).
    pub r_0: f64,
    /// Molecules released per bit "1".
    pub n_a: u64,
    /// Mean number of noise molecules inside the receiver at any instant.
    pub n_a_bar: f64,
    /// Bit interval (s).
    pub t_bit: f64,
    /// Sampling offset within a bit interval (s).
    pub tau_s: f64,
    /// Transmitted sequence length (bits).
    pub seq_len: usize,
    /// Prior probability of bit 1.
    pub p1: f64,
    /// Particle-simulation time step (s).
    pub dt: f64,
    /// Monte-Carlo realization count.
    pub trials: u64,
    /// RNG seed.
    pub seed: u64,
}

impl PhysicalConfig {
    /// Baseline parameter set for the bundled experiments: a micron-scale
    /// link in a blood-plasma-like medium, 0.5 ms signaling with a sample
    /// near the impulse-response peak.
    pub fn baseline() -> Self {
        PhysicalConfig {
            d_a: 5e-9,
            d_tx: 20e-13,
            d_rx: 1e-13,
            a_rx: 0.15e-6,
            r_0: 1e-6,
            n_a: 30_000,
            n_a_bar: 10.0,
            t_bit: 0.5e-3,
            tau_s: 0.035e-3,
            seq_len: 50,
            p1: 0.5,
            dt: 5e-6,
            trials: 10_000,
            seed: 1,
        }
    }

    /// Prior probability of bit 0.
    pub fn p0(&self) -> f64 {
        1.0 - self.p1
    }

    /// Check every invariant, naming the first field that fails.
    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: String) -> Error {
            Error::InvalidConfig { field, reason }
        }
        let nonneg = [
            ("d_a", self.d_a),
            ("d_tx", self.d_tx),
            ("d_rx", self.d_rx),
            ("n_a_bar", self.n_a_bar),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(bad(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        let pos = [("a_rx", self.a_rx), ("r_0", self.r_0), ("t_bit", self.t_bit), ("dt", self.dt)];
        for (name, v) in pos {
            if !v.is_finite() || v <= 0.0 {
                return Err(bad(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !self.tau_s.is_finite() || self.tau_s <= 0.0 || self.tau_s > self.t_bit {
            return Err(bad(
                "tau_s",
                format!("must satisfy 0 < tau_s <= t_bit, got {} (t_bit = {})", self.tau_s, self.t_bit),
            ));
        }
        if !self.p1.is_finite() || !(0.0..=1.0).contains(&self.p1) {
            return Err(bad("p1", format!("must lie in [0, 1], got {}", self.p1)));
        }
        if self.seq_len < 1 {
            return Err(bad("seq_len", "must be >= 1".into()));
        }
        if self.trials < 1 {
            return Err(bad("trials", "must be >= 1".into()));
        }
        // Particle counting happens on step boundaries, so dt must divide
        // both the sampling offset and the bit interval.
        if !divides(self.dt, self.tau_s) {
            return Err(bad("dt", format!("must divide tau_s ({} / {} is not integral)", self.tau_s, self.dt)));
        }
        if !divides(self.dt, self.t_bit) {
            return Err(bad("dt", format!("must divide t_bit ({} / {} is not integral)", self.t_bit, self.dt)));
        }
        Ok(())
    }
}

fn divides(step: f64, span: f64) -> bool {
    let ratio = span / step;
    let rounded = ratio.round();
    rounded >= 1.0 && (ratio - rounded).abs() <= 1e-9 * rounded
}

/// Derived diffusion coefficients and receiver volume.
///
/// `d1` governs the motion of a molecule relative to the moving receiver,
/// `d2` the relative transmitter–receiver displacement process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDiffusion {
    /// D₁ = D_A + D_rx (m²/s).
    pub d1: f64,
    /// D₂ = D_rx + D_tx (m²/s).
    pub d2: f64,
    /// Receiver (observation) volume, (4/3)·π·a_rx³ (m³).
    pub v_obs: f64,
}

/// Compute the effective diffusion coefficients and receiver volume for a
/// validated configuration.
pub fn derive_effective(config: &PhysicalConfig) -> Result<EffectiveDiffusion> {
    config.validate()?;
    Ok(EffectiveDiffusion {
        d1: config.d_a + config.d_rx,
        d2: config.d_rx + config.d_tx,
        v_obs: 4.0 / 3.0 * std::f64::consts::PI * config.a_rx.powi(3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn baseline_effective_coefficients() {
        let eff = derive_effective(&PhysicalConfig::baseline()).unwrap();
        assert_eq!(eff.d1, 5.0001e-9);
        assert_eq!(eff.d2, 21e-13);
        // Frozen from an independent 40-digit evaluation of (4/3)·π·a³.
        assert_relative_eq!(eff.v_obs, 1.4137166941154070e-20, max_relative = 1e-14);
    }

    #[test]
    fn zero_diffusion_is_allowed() {
        let cfg = PhysicalConfig { d_a: 0.0, d_tx: 0.0, d_rx: 0.0, ..PhysicalConfig::baseline() };
        let eff = derive_effective(&cfg).unwrap();
        assert_eq!(eff.d1, 0.0);
        assert_eq!(eff.d2, 0.0);
    }

    #[test]
    fn derive_effective_is_pure() {
        let cfg = PhysicalConfig::baseline();
        let a = derive_effective(&cfg).unwrap();
        let b = derive_effective(&cfg).unwrap();
        assert_eq!(a.d1.to_bits(), b.d1.to_bits());
        assert_eq!(a.d2.to_bits(), b.d2.to_bits());
        assert_eq!(a.v_obs.to_bits(), b.v_obs.to_bits());
    }

    #[test]
    fn swapping_coefficients_preserves_sums() {
        let cfg = PhysicalConfig::baseline();
        let eff = derive_effective(&cfg).unwrap();
        let swapped_a_rx = PhysicalConfig { d_a: cfg.d_rx, d_rx: cfg.d_a, ..cfg.clone() };
        assert_eq!(derive_effective(&swapped_a_rx).unwrap().d1, eff.d1);
        let swapped_rx_tx = PhysicalConfig { d_rx: cfg.d_tx, d_tx: cfg.d_rx, ..cfg };
        assert_eq!(derive_effective(&swapped_rx_tx).unwrap().d2, eff.d2);
    }

    #[test]
    fn validation_names_offending_field() {
        let cfg = PhysicalConfig { a_rx: 0.0, ..PhysicalConfig::baseline() };
        match derive_effective(&cfg) {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "a_rx"),
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
        let cfg = PhysicalConfig { tau_s: 1.0, ..PhysicalConfig::baseline() };
        match derive_effective(&cfg) {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "tau_s"),
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
        let cfg = PhysicalConfig { dt: 3e-6, ..PhysicalConfig::baseline() };
        match derive_effective(&cfg) {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "dt"),
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
    }

    #[test]
    fn step_divisibility_tolerates_rounding() {
        // 0.035 ms / 5 µs = 7 exactly in decimal, not in binary.
        assert!(divides(5e-6, 0.035e-3));
        assert!(divides(5e-6, 0.5e-3));
        assert!(!divides(3e-6, 0.035e-3));
    }
}
