//! Monte Carlo simulation of the secrecy rates straight from their
//! expectation definitions.
//!
//! Samples are drawn in fixed chunks of [`CHUNK`]. Chunk `k` uses
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `k`, and the
//! per-chunk `(n, mean, M2)` moments are merged pairwise in chunk order. The
//! estimate is therefore bit-identical for any number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{OmaGains, RateMode};
use crate::error::{Error, Result};
use crate::model::{derive_stats, ChannelStats, SystemConfig};

/// Samples per independently seeded chunk.
pub const CHUNK: usize = 1 << 16;
pub const MIN_SAMPLES: usize = 10_000;

/// A sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// bits/s/Hz.
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    /// `|value − mean|` in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        if self.stderr == 0.0 {
            return if value == self.mean { 0.0 } else { f64::INFINITY };
        }
        (value - self.mean).abs() / self.stderr
    }
}

/// Estimated (noise-free part) channel gains of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    /// `g̃_p = max_m g̃_m`.
    pub primary_max: f64,
    pub near: f64,
    pub far: f64,
    pub eve: f64,
}

impl ChannelDraw {
    pub fn strong(&self) -> f64 {
        self.near.max(self.far)
    }

    pub fn weak(&self) -> f64 {
        self.near.min(self.far)
    }
}

/// Draws independent exponential gains with the means of a [`ChannelStats`].
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    primary: Vec<f64>,
    near: f64,
    far: f64,
    eve: f64,
}

impl ChannelSampler {
    pub fn new(stats: &ChannelStats) -> Self {
        Self {
            primary: stats.omega_tilde_pr(),
            near: stats.near.omega_tilde,
            far: stats.far.omega_tilde,
            eve: stats.eve.omega_tilde,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelDraw {
        let primary_max = self
            .primary
            .iter()
            .map(|&m| exponential(rng, m))
            .fold(0.0, f64::max);
        ChannelDraw {
            primary_max,
            near: exponential(rng, self.near),
            far: exponential(rng, self.far),
            eve: exponential(rng, self.eve),
        }
    }
}

/// `−mean·ln U` with `U` uniform on `(0, 1]`.
fn exponential<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    let u = 1.0 - rng.gen::<f64>();
    -mean * u.ln()
}

/// `min(P_max, I_p / g̃_p)`.
pub fn transmit_power(p_max: f64, i_peak: f64, primary_max: f64) -> f64 {
    if primary_max * p_max <= i_peak {
        p_max
    } else {
        i_peak / primary_max
    }
}

/// Instantaneous secrecy rate of one realization, in bits/s/Hz.
pub fn secrecy_rate(config: &SystemConfig, mode: RateMode, oma: OmaGains, draw: &ChannelDraw) -> f64 {
    let p = transmit_power(config.p_max, config.i_peak, draw.primary_max);
    let (s2, a) = (config.sigma_eps2, config.a_s);
    let (gs, gw, ge) = (draw.strong(), draw.weak(), draw.eve);
    debug_assert!(gs >= gw);
    let nats = match mode {
        RateMode::NomaStrong => (p * (s2 + a * gs)).ln_1p() - (p * (s2 + a * ge)).ln_1p(),
        RateMode::NomaWeak => {
            let weak = |g: f64| ((1.0 + p * (s2 + g)) / (1.0 + p * (s2 + a * g))).ln();
            weak(gw) - weak(ge)
        }
        RateMode::OmaStrong | RateMode::OmaWeak => {
            let shift = match oma {
                OmaGains::Unshifted => 0.0,
                OmaGains::WithEstimationNoise => s2,
            };
            let g = if mode == RateMode::OmaStrong { gs } else { gw };
            0.5 * ((p * (shift + g)).ln_1p() - (p * (shift + ge)).ln_1p())
        }
    };
    nats.max(0.0) * std::f64::consts::LOG2_E
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let (na, nb) = (self.n as f64, other.n as f64);
        let delta = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * nb / n as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n as f64,
        }
    }
}

fn merge_pairwise(parts: &[Moments]) -> Moments {
    match parts.len() {
        0 => Moments { n: 0, mean: 0.0, m2: 0.0 },
        1 => parts[0],
        len => {
            let (l, r) = parts.split_at(len / 2);
            merge_pairwise(l).merge(merge_pairwise(r))
        }
    }
}

/// Generator for chunk `index` of the run seeded with `seed`.
pub fn chunk_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Monte Carlo secrecy rate; OMA modes use the unshifted gains.
pub fn mc_esr(config: &SystemConfig, mode: RateMode, n: usize, seed: u64) -> Result<McEstimate> {
    mc_esr_with(config, mode, OmaGains::Unshifted, n, seed)
}

pub fn mc_esr_with(config: &SystemConfig, mode: RateMode, oma: OmaGains, n: usize, seed: u64) -> Result<McEstimate> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidConfig {
            field: "mc_samples",
            reason: format!("at least {MIN_SAMPLES} samples required, got {n}"),
        });
    }
    config.validate()?;
    let stats = derive_stats(config)?;
    let sampler = ChannelSampler::new(&stats);
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let len = CHUNK.min(n - k * CHUNK);
            let mut m = Moments { n: 0, mean: 0.0, m2: 0.0 };
            for _ in 0..len {
                let x = secrecy_rate(config, mode, oma, &sampler.draw(&mut rng));
                m.n += 1;
                let delta = x - m.mean;
                m.mean += delta / m.n as f64;
                m.m2 += delta * (x - m.mean);
            }
            m
        })
        .collect();
    let total = merge_pairwise(&parts);
    let var = total.m2 / (total.n - 1) as f64;
    Ok(McEstimate {
        mean: total.mean,
        stderr: (var / total.n as f64).sqrt(),
        n: total.n,
    })
}
