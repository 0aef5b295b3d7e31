//! Seeded synthetic capacity-fade batteries shaped like the public
//! run-to-failure cells: a linear fade down to the threshold that slows
//! afterwards, short capacity-regeneration bumps after rest periods, and
//! Gaussian measurement noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataio::Battery;

/// Shape of one synthetic cell, in percent of rated capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub id: &'static str,
    pub cycles: usize,
    pub start: f64,
    /// Cycle at which the noise-free fade reaches 70 %.
    pub nominal_failure: usize,
    /// Fade rate after the nominal failure, relative to the rate before it.
    pub tail: f64,
    /// Cycles after which capacity temporarily recovers.
    pub bumps: &'static [usize],
    pub bump_height: f64,
    pub noise_sd: f64,
}

/// Profiles loosely matching B0005, B0006, B0007 and B0018.
pub const PROFILES: [Profile; 4] = [
    Profile { id: "B0005", cycles: 168, start: 92.8, nominal_failure: 125, tail: 0.5, bumps: &[30, 46, 88, 132], bump_height: 1.2, noise_sd: 0.15 },
    Profile { id: "B0006", cycles: 168, start: 101.8, nominal_failure: 108, tail: 0.5, bumps: &[30, 46, 88, 132], bump_height: 1.5, noise_sd: 0.2 },
    Profile { id: "B0007", cycles: 168, start: 94.5, nominal_failure: 166, tail: 0.5, bumps: &[30, 46, 88, 132], bump_height: 1.0, noise_sd: 0.15 },
    Profile { id: "B0018", cycles: 132, start: 92.8, nominal_failure: 97, tail: 0.5, bumps: &[18, 50, 77], bump_height: 1.2, noise_sd: 0.15 },
];

pub fn profile(id: &str) -> Option<&'static Profile> {
    PROFILES.iter().find(|p| p.id == id)
}

impl Profile {
    /// Noise-free percentage capacity at 1-based `cycle`.
    pub fn nominal(&self, cycle: usize) -> f64 {
        let u = cycle as f64 / self.nominal_failure as f64;
        let fade = if u <= 1.0 { u } else { 1.0 + self.tail * (u - 1.0) };
        let regen: f64 = self
            .bumps
            .iter()
            .filter(|&&b| cycle > b)
            .map(|&b| self.bump_height * (-((cycle - b - 1) as f64) / 3.0).exp())
            .sum();
        self.start - (self.start - 70.0) * fade + regen
    }

    /// Percentage capacities for all cycles, with noise drawn from a stream
    /// seeded by `seed` and the profile id.
    pub fn generate_hi(&self, seed: u64) -> Vec<f64> {
        let stream = self.id.bytes().fold(seed, |h, b| h.rotate_left(8) ^ u64::from(b));
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        let noise = Normal::new(0.0, self.noise_sd).expect("finite noise sd");
        (1..=self.cycles).map(|k| self.nominal(k) + noise.sample(&mut rng)).collect()
    }

    /// The profile as a battery with `rated_ah` nominal capacity.
    pub fn battery(&self, seed: u64, rated_ah: f64, eta: f64) -> Battery {
        let capacity_ah = self.generate_hi(seed).iter().map(|hi| hi * rated_ah / 100.0).collect();
        Battery::from_capacity(self.id, (1..=self.cycles as u32).collect(), capacity_ah, rated_ah, eta)
            .expect("synthetic profiles are valid")
    }
}
