//! Memoryless binary-input channel models producing per-bit log-likelihood
//! ratios from transmitted codewords.
//!
//! All randomness goes through ChaCha8 with per-frame substreams: the
//! generator is seeded from the channel seed and the frame index selects the
//! stream, so frame `f` produces the same noise regardless of how many
//! frames run concurrently.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::gf2::BitVec;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("code rate must lie in (0, 1], got {0}")]
    InvalidRate(f64),
    #[error("signal-to-noise ratio must be positive, got {0}")]
    InvalidSnr(f64),
    #[error("crossover probability must lie in (0, 1/2), got {0}")]
    InvalidCrossover(f64),
}

/// Per-bit channel LLR vector; positive entries favor bit 0.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    /// All entries must be finite.
    pub fn new(values: Vec<f64>) -> Option<Self> {
        if values.iter().all(|v| v.is_finite()) {
            Some(Self(values))
        } else {
            None
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Objective value of a binary word under this LLR vector.
    pub fn objective_of(&self, word: &BitVec) -> f64 {
        assert_eq!(word.len(), self.len());
        (0..self.len())
            .filter(|&i| word.get(i))
            .map(|i| self.0[i])
            .sum()
    }

    /// Component-wise sign flip on the support of `word`: the LLR vector an
    /// observer would see if `word` had been XORed onto the transmission.
    pub fn reflect(&self, word: &BitVec) -> LlrVector {
        assert_eq!(word.len(), self.len());
        LlrVector(
            self.0
                .iter()
                .enumerate()
                .map(|(i, &v)| if word.get(i) { -v } else { v })
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for LlrVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn snr_db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Noise standard deviation for a given information SNR in dB, code rate and
/// per-symbol energy: `sigma = sqrt(ec / (2 * r * snr))`.
pub fn snr_db_to_sigma(snr_db: f64, rate: f64, ec: f64) -> f64 {
    (ec / (2.0 * rate * snr_db_to_linear(snr_db))).sqrt()
}

fn substream(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

/// Binary-input AWGN channel parameterized by the code rate and the linear
/// information SNR. Each LLR is Gaussian with mean
/// `4 * r * snr * (-1)^x_i` and variance `8 * r * snr`.
#[derive(Clone, Debug)]
pub struct AwgnChannel {
    rate: f64,
    snr_b: f64,
    seed: u64,
    via_symbols: bool,
}

impl AwgnChannel {
    /// `snr_b` is on the linear scale; use [`Self::from_db`] for decibels.
    pub fn new(rate: f64, snr_b: f64, seed: u64) -> Result<Self, ChannelError> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(ChannelError::InvalidRate(rate));
        }
        if !(snr_b > 0.0) || !snr_b.is_finite() {
            return Err(ChannelError::InvalidSnr(snr_b));
        }
        Ok(Self {
            rate,
            snr_b,
            seed,
            via_symbols: false,
        })
    }

    pub fn from_db(rate: f64, snr_db: f64, seed: u64) -> Result<Self, ChannelError> {
        Self::new(rate, snr_db_to_linear(snr_db), seed)
    }

    /// Sample unit-energy channel symbols and convert to LLRs instead of
    /// drawing the LLRs directly. Both routes realize the same law; the
    /// symbol route exists for cross-validation.
    pub fn via_symbols(mut self, enabled: bool) -> Self {
        self.via_symbols = enabled;
        self
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn snr_b(&self) -> f64 {
        self.snr_b
    }

    pub fn transmit(&self, x: &BitVec, frame: u64) -> LlrVector {
        let mut rng = substream(self.seed, frame);
        let values = if self.via_symbols {
            // y_i = (-1)^{x_i} * sqrt(Ec) + sigma * z with Ec = 1, then
            // lambda_i = 2 y_i / sigma^2.
            let sigma2 = 1.0 / (2.0 * self.rate * self.snr_b);
            let sigma = sigma2.sqrt();
            (0..x.len())
                .map(|i| {
                    let sign = if x.get(i) { -1.0 } else { 1.0 };
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let y = sign + sigma * z;
                    2.0 * y / sigma2
                })
                .collect()
        } else {
            let mean = 4.0 * self.rate * self.snr_b;
            let std = (8.0 * self.rate * self.snr_b).sqrt();
            (0..x.len())
                .map(|i| {
                    let sign = if x.get(i) { -1.0 } else { 1.0 };
                    let z: f64 = StandardNormal.sample(&mut rng);
                    sign * mean + std * z
                })
                .collect()
        };
        LlrVector::new(values).expect("gaussian samples are finite")
    }
}

/// Binary symmetric channel: flips each bit with probability `p < 1/2`;
/// every LLR has magnitude `ln((1-p)/p)`.
#[derive(Clone, Debug)]
pub struct BscChannel {
    p: f64,
    seed: u64,
}

impl BscChannel {
    pub fn new(p: f64, seed: u64) -> Result<Self, ChannelError> {
        if !(p > 0.0 && p < 0.5) {
            return Err(ChannelError::InvalidCrossover(p));
        }
        Ok(Self { p, seed })
    }

    pub fn crossover(&self) -> f64 {
        self.p
    }

    pub fn llr_magnitude(&self) -> f64 {
        ((1.0 - self.p) / self.p).ln()
    }

    pub fn transmit(&self, x: &BitVec, frame: u64) -> LlrVector {
        let mut rng = substream(self.seed, frame);
        let mag = self.llr_magnitude();
        let values = (0..x.len())
            .map(|i| {
                let flipped = rng.random::<f64>() < self.p;
                let received_one = x.get(i) != flipped;
                if received_one {
                    -mag
                } else {
                    mag
                }
            })
            .collect();
        LlrVector::new(values).expect("BSC LLRs are finite")
    }
}
