//! Decryption-failure analysis: the Gaussian-heuristic estimate of
//! `Pr[|E| >= bound]` and a direct Monte Carlo sampler of `E`.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::params::{ParameterSet, MESSAGE_BITS};
use crate::rng::{FastNoiseSampler, NoiseSampler};

/// Which variance expression to use for the decryption error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorModel {
    /// `e2 + <e1, s>` only.
    Paper,
    /// Also counts the `<e, r>` term from the key's own error.
    Full,
}

impl ErrorModel {
    pub const ALL: [ErrorModel; 2] = [ErrorModel::Paper, ErrorModel::Full];

    pub fn name(self) -> &'static str {
        match self {
            ErrorModel::Paper => "paper_model",
            ErrorModel::Full => "full_model",
        }
    }
}

impl fmt::Display for ErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper_model" | "paper" => Ok(ErrorModel::Paper),
            "full_model" | "full" => Ok(ErrorModel::Full),
            _ => Err(format!("unknown failure model '{s}' (expected paper_model or full_model)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FailureEstimate {
    pub model: ErrorModel,
    pub sigma_e: f64,
    pub log10_per_bit: f64,
    /// Union bound over the 256 message bits, capped at probability 1.
    pub log10_per_ct: f64,
}

/// Standard deviation of the decryption error under `model`.
pub fn error_stddev(p: &ParameterSet, model: ErrorModel) -> f64 {
    let se2 = p.sigma_e * p.sigma_e;
    let terms = match model {
        ErrorModel::Paper => 1.0,
        ErrorModel::Full => 2.0,
    };
    (se2 + terms * p.n as f64 * se2 * p.sigma_s * p.sigma_s).sqrt()
}

/// Smallest `|E|` that can flip a decoded bit: `ceil(floor(q/2) / 2)`.
///
/// For `q = 1103` this is 276; every `|E| <= 275` decodes correctly for both
/// message values.
pub fn failure_bound(q: u32) -> u32 {
    (q / 2).div_ceil(2)
}

/// Continuous threshold used by the Gaussian heuristic: the failure bound
/// minus one half.
pub fn threshold(q: u32) -> f64 {
    f64::from(failure_bound(q)) - 0.5
}

/// Heuristic failure probabilities, in log10.
pub fn failure_log10(p: &ParameterSet, model: ErrorModel) -> FailureEstimate {
    let sigma_e = error_stddev(p, model);
    let log10_per_bit = if sigma_e > 0.0 {
        log10_two_sided_tail(threshold(p.q) / sigma_e)
    } else {
        f64::NEG_INFINITY
    };
    FailureEstimate {
        model,
        sigma_e,
        log10_per_bit,
        log10_per_ct: (log10_per_bit + (MESSAGE_BITS as f64).log10()).min(0.0),
    }
}

/// `log10(2 * Q(z)) = log10(erfc(z / sqrt 2))`, finite far past f64 underflow.
pub fn log10_two_sided_tail(z: f64) -> f64 {
    ln_erfc(z / std::f64::consts::SQRT_2) / std::f64::consts::LN_10
}

/// Natural log of `erfc(x)`.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 20.0 {
        return libm::erfc(x).ln();
    }
    // erfc(x) = exp(-x^2) / sqrt(pi) * 1 / (x + (1/2) / (x + 1 / (x + (3/2) / (x + ...))))
    let mut cf = x;
    for k in (1..=60).rev() {
        cf = x + (k as f64 / 2.0) / cf;
    }
    -x * x - 0.5 * std::f64::consts::PI.ln() - cf.ln()
}

/// Outcome of [`monte_carlo_failure`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloResult {
    pub trials: u64,
    pub failures: u64,
    /// `failures / trials`.
    pub rate: f64,
    pub mean: f64,
    /// Population standard deviation of the sampled errors.
    pub stddev: f64,
}

impl MonteCarloResult {
    pub fn log10_rate(&self) -> f64 {
        self.rate.log10()
    }
}

/// Trials sharing one `(s, e)` draw. Each batch has its own PRNG substream, so
/// results do not depend on how batches are spread over threads.
pub const MONTE_CARLO_BATCH: u64 = 256;

#[derive(Default)]
struct Tally {
    failures: u64,
    sum: i128,
    sum_sq: i128,
}

/// Sample the decryption error `E = <e, r> + e2 - <e1, s>` directly and count
/// `|E| >= failure_bound(q)`.
///
/// Each batch of [`MONTE_CARLO_BATCH`] trials draws fresh `s` and `e` and, per
/// trial, fresh `r`, `e1` and `e2`. The `r` and `e1` samples take 32 bits each
/// from one 64-bit output, plus 32 more in the rare case the prefix is ambiguous. Batch `b` is driven by xoshiro256++ seeded
/// with `BLAKE3(seed || b)`.
pub fn monte_carlo_failure(p: &ParameterSet, trials: u64, seed: &[u8; 32], threads: usize) -> MonteCarloResult {
    if trials == 0 {
        return MonteCarloResult { trials, failures: 0, rate: 0.0, mean: 0.0, stddev: 0.0 };
    }
    let secret = FastNoiseSampler::new(NoiseSampler::for_sigma(p.sigma_s));
    let error = FastNoiseSampler::new(NoiseSampler::for_sigma(p.sigma_e));
    let bound = i64::from(failure_bound(p.q));
    let batches = trials.div_ceil(MONTE_CARLO_BATCH);
    let next = AtomicU64::new(0);
    let total = Mutex::new(Tally::default());

    let worker = || {
        let mut local = Tally::default();
        let mut s = vec![0i32; p.n];
        let mut e = vec![0i32; p.n];
        loop {
            let b = next.fetch_add(1, Ordering::Relaxed);
            if b >= batches {
                break;
            }
            let mut hasher = blake3::Hasher::new();
            hasher.update(seed);
            hasher.update(&b.to_le_bytes());
            let mut rng = Xoshiro256PlusPlus::from_seed(*hasher.finalize().as_bytes());
            for (sj, ej) in s.iter_mut().zip(e.iter_mut()) {
                *sj = secret.sample(rng.next_u64());
                *ej = error.sample(rng.next_u64());
            }
            let count = MONTE_CARLO_BATCH.min(trials - b * MONTE_CARLO_BATCH);
            for _ in 0..count {
                let mut acc: i64 = 0;
                for (&sj, &ej) in s.iter().zip(e.iter()) {
                    let w = rng.next_u64();
                    let r = secret.sample_split((w >> 32) as u32, || rng.next_u32());
                    let e1 = error.sample_split(w as u32, || rng.next_u32());
                    acc += i64::from(ej * r - sj * e1);
                }
                let big_e = acc + i64::from(error.sample(rng.next_u64()));
                local.failures += u64::from(big_e.abs() >= bound);
                local.sum += i128::from(big_e);
                local.sum_sq += i128::from(big_e * big_e);
            }
        }
        let mut t = total.lock().unwrap();
        t.failures += local.failures;
        t.sum += local.sum;
        t.sum_sq += local.sum_sq;
    };

    std::thread::scope(|scope| {
        for _ in 1..threads.max(1) {
            scope.spawn(&worker);
        }
        worker();
    });

    let t = total.into_inner().unwrap();
    let nt = trials as f64;
    let mean = t.sum as f64 / nt;
    // exact integer numerator: trials * sum_sq - sum^2
    let var_num = i128::from(trials) * t.sum_sq - t.sum * t.sum;
    MonteCarloResult {
        trials,
        failures: t.failures,
        rate: t.failures as f64 / nt,
        mean,
        stddev: (var_num as f64).sqrt() / nt,
    }
}
