//! Standard-normal integration draws for the simulated likelihood.
//!
//! Draws for an individual are a pure function of (seed, individual id,
//! scheme), so every likelihood evaluation sees the same draws (common
//! random numbers) and parallel evaluation needs no shared state.
//!
//! The quasi-random scheme is a Halton sequence with one prime base per
//! latent dimension, an initial burn-in, consecutive per-individual segments
//! and an optional seeded random-shift scramble. Uniforms are mapped to
//! normals through the inverse CDF.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Points skipped at the start of each Halton dimension.
pub const HALTON_BURN_IN: u64 = 10;

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Draw scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawScheme {
    QuasiRandomLowDiscrepancy,
    PseudoRandom,
}

/// Settings controlling the simulated-likelihood draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawSettings {
    pub n_draws: usize,
    pub scheme: DrawScheme,
    pub seed: u64,
    pub scramble: bool,
}

impl Default for DrawSettings {
    fn default() -> Self {
        DrawSettings {
            n_draws: 500,
            scheme: DrawScheme::QuasiRandomLowDiscrepancy,
            seed: 0,
            scramble: false,
        }
    }
}

/// Radical inverse of `index` in the given base: the base-b digit reversal
/// mapped into [0, 1). The base-2 sequence starts 1/2, 1/4, 3/4, ... at
/// indices 1, 2, 3.
pub fn radical_inverse(base: u64, mut index: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut fraction = 0.0;
    let mut scale = inv_base;
    while index > 0 {
        fraction += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    fraction
}

/// Inverse standard-normal CDF applied to a uniform in (0, 1); inputs are
/// clamped away from 0 and 1 so the result stays finite.
fn normal_quantile(u: f64) -> f64 {
    let clamped = u.clamp(1e-15, 1.0 - 1e-15);
    // unwrap: parameters (0, 1) are always valid
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(clamped)
}

/// Generates `settings.n_draws` standard-normal vectors of dimension `dim`
/// for one individual. Deterministic per (seed, individual, scheme).
pub fn generate_draws(settings: &DrawSettings, individual: u64, dim: usize) -> Result<Vec<Vec<f64>>> {
    if settings.n_draws == 0 {
        return Err(Error::Config("n_draws must be >= 1".into()));
    }
    if dim == 0 {
        return Ok(vec![Vec::new(); settings.n_draws]);
    }
    match settings.scheme {
        DrawScheme::PseudoRandom => {
            // One independent stream per individual, keyed on (seed, id).
            let mut key = [0u8; 32];
            key[..8].copy_from_slice(&settings.seed.to_le_bytes());
            key[8..16].copy_from_slice(&individual.to_le_bytes());
            key[16] = 0x9e;
            let mut rng = ChaCha8Rng::from_seed(key);
            Ok((0..settings.n_draws)
                .map(|_| {
                    (0..dim)
                        .map(|_| normal_quantile(rng.gen_range(0.0..1.0)))
                        .collect()
                })
                .collect())
        }
        DrawScheme::QuasiRandomLowDiscrepancy => {
            if dim > PRIMES.len() {
                return Err(Error::Config(format!(
                    "quasi-random draws support up to {} dimensions, requested {dim}",
                    PRIMES.len()
                )));
            }
            let shifts: Vec<f64> = if settings.scramble {
                let mut key = [0u8; 32];
                key[..8].copy_from_slice(&settings.seed.to_le_bytes());
                key[16] = 0x51;
                let mut rng = ChaCha8Rng::from_seed(key);
                (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect()
            } else {
                vec![0.0; dim]
            };
            let start = HALTON_BURN_IN as u128 + individual as u128 * settings.n_draws as u128;
            Ok((0..settings.n_draws)
                .map(|r| {
                    let index = (start + r as u128) as u64;
                    (0..dim)
                        .map(|d| {
                            let u = radical_inverse(PRIMES[d], index) + shifts[d];
                            normal_quantile(u.fract())
                        })
                        .collect()
                })
                .collect())
        }
    }
}
