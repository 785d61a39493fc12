//! Randomness: the AES-256-CTR DRBG, domain-separated BLAKE3 streams, the
//! CDT noise sampler for the error distribution, and expansion of the public
//! matrix from its seed.
//!
//! Everything here except [`Drbg::from_os_entropy`] and reseeding is a pure
//! function of its inputs.

use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes256;
use zeroize::Zeroize;

use crate::error::RngError;
use crate::params::ParameterSet;

/// Length of a DRBG seed: 32 bytes of AES key followed by a 16-byte counter block.
pub const DRBG_SEED_BYTES: usize = 48;

/// Number of `generate` calls between reseeds from the OS.
pub const RESEED_INTERVAL: u64 = 1 << 16;

/// Noise samples are supported on `[-NOISE_BOUND, NOISE_BOUND]`.
pub const NOISE_BOUND: i32 = 15;

const CDT_CELLS: usize = 2 * NOISE_BOUND as usize + 1;
const CDT_THRESHOLDS: usize = CDT_CELLS - 1;
const TWO_POW_64: u128 = 1 << 64;

/// Consecutive rejected draws for one matrix entry before expansion gives up.
pub const REJECTION_CAP: u32 = 1 << 20;

/// Anything that yields a deterministic or random byte stream.
pub trait ByteSource {
    fn fill(&mut self, out: &mut [u8]) -> Result<(), RngError>;

    fn next_u64(&mut self) -> Result<u64, RngError> {
        let mut b = [0u8; 8];
        self.fill(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
}

/// A finite byte source over a borrowed slice.
pub struct SliceSource<'a> {
    data: &'a [u8],
}

impl<'a> SliceSource<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        SliceSource { data }
    }

    pub fn remaining(&self) -> usize {
        self.data.len()
    }
}

impl ByteSource for SliceSource<'_> {
    fn fill(&mut self, out: &mut [u8]) -> Result<(), RngError> {
        if out.len() > self.data.len() {
            return Err(RngError::StreamExhausted);
        }
        let (head, tail) = self.data.split_at(out.len());
        out.copy_from_slice(head);
        self.data = tail;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reseed {
    OsEntropy,
    Disabled,
}

/// AES-256 in counter mode.
///
/// Output block `i` is `AES_K(counter + i)` with the 128-bit counter encoded
/// big-endian. A generate call always consumes whole blocks, so the counter
/// never repeats under one key.
pub struct Drbg {
    cipher: Aes256,
    counter: u128,
    calls_since_reseed: u64,
    reseed: Reseed,
}

impl Drbg {
    /// Seed from the operating system; reseeds every [`RESEED_INTERVAL`] calls.
    pub fn from_os_entropy() -> Result<Self, RngError> {
        let seed = os_entropy()?;
        let mut drbg = Drbg::from_seed(&seed);
        drbg.reseed = Reseed::OsEntropy;
        Ok(drbg)
    }

    /// Deterministic instance for tests and golden files. Never reseeds.
    pub fn from_seed(seed: &[u8; DRBG_SEED_BYTES]) -> Self {
        let (key, ctr) = seed.split_at(32);
        let mut ctr_bytes = [0u8; 16];
        ctr_bytes.copy_from_slice(ctr);
        Drbg {
            cipher: Aes256::new(key.into()),
            counter: u128::from_be_bytes(ctr_bytes),
            calls_since_reseed: 0,
            reseed: Reseed::Disabled,
        }
    }

    pub fn counter(&self) -> u128 {
        self.counter
    }

    pub fn generate(&mut self, out: &mut [u8]) -> Result<(), RngError> {
        if self.reseed == Reseed::OsEntropy && self.calls_since_reseed >= RESEED_INTERVAL {
            self.reseed_from_os()?;
        }
        self.calls_since_reseed += 1;
        self.keystream(out);
        Ok(())
    }

    pub fn array<const N: usize>(&mut self) -> Result<[u8; N], RngError> {
        let mut out = [0u8; N];
        self.generate(&mut out)?;
        Ok(out)
    }

    fn keystream(&mut self, out: &mut [u8]) {
        for chunk in out.chunks_mut(16) {
            let mut block = self.counter.to_be_bytes().into();
            self.cipher.encrypt_block(&mut block);
            chunk.copy_from_slice(&block[..chunk.len()]);
            self.counter = self.counter.wrapping_add(1);
        }
    }

    fn reseed_from_os(&mut self) -> Result<(), RngError> {
        let fresh = os_entropy()?;
        let mut own = [0u8; DRBG_SEED_BYTES];
        self.keystream(&mut own);
        for (o, f) in own.iter_mut().zip(fresh) {
            *o ^= f;
        }
        let next = Drbg::from_seed(&own);
        self.cipher = next.cipher;
        self.counter = next.counter;
        self.calls_since_reseed = 0;
        own.zeroize();
        Ok(())
    }
}

impl ByteSource for Drbg {
    fn fill(&mut self, out: &mut [u8]) -> Result<(), RngError> {
        self.generate(out)
    }
}

fn os_entropy() -> Result<[u8; DRBG_SEED_BYTES], RngError> {
    let mut seed = [0u8; DRBG_SEED_BYTES];
    getrandom::getrandom(&mut seed).map_err(|e| RngError::EntropyUnavailable(e.to_string()))?;
    Ok(seed)
}

/// Domain labels for the BLAKE3 extendable-output streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Public matrix expansion.
    MatrixA,
    /// FO hash of `m || pk`.
    FoHash,
    /// Per-bit encryption randomness.
    BitRandomness,
    /// Session-key derivation.
    Kdf,
    /// Implicit-rejection input.
    Reject,
    /// Hybrid-layer subkey.
    FileKey,
    /// Key-generation noise for `s`.
    SecretNoise,
    /// Key-generation noise for `e`.
    ErrorNoise,
}

impl Domain {
    pub const ALL: [Domain; 8] = [
        Domain::MatrixA,
        Domain::FoHash,
        Domain::BitRandomness,
        Domain::Kdf,
        Domain::Reject,
        Domain::FileKey,
        Domain::SecretNoise,
        Domain::ErrorNoise,
    ];

    pub const fn label(self) -> &'static [u8] {
        match self {
            Domain::MatrixA => b"KyFrogA",
            Domain::FoHash => b"KyFrogH",
            Domain::BitRandomness => b"KyFrogR",
            Domain::Kdf => b"KyFrogKDFv1",
            Domain::Reject => b"KyFrogRej",
            Domain::FileKey => b"KyFrogFile",
            Domain::SecretNoise => b"KyFrogSK",
            Domain::ErrorNoise => b"KyFrogSE",
        }
    }
}

/// Unbounded BLAKE3 output over `label || input`.
pub struct XofStream {
    reader: blake3::OutputReader,
}

impl XofStream {
    /// `parts` are concatenated after the label.
    pub fn new(domain: Domain, parts: &[&[u8]]) -> Self {
        let mut hasher = blake3::Hasher::new();
        hasher.update(domain.label());
        for part in parts {
            hasher.update(part);
        }
        XofStream {
            reader: hasher.finalize_xof(),
        }
    }

    pub fn read(&mut self, out: &mut [u8]) {
        self.reader.fill(out);
    }

    pub fn array<const N: usize>(mut self) -> [u8; N] {
        let mut out = [0u8; N];
        self.read(&mut out);
        out
    }
}

impl ByteSource for XofStream {
    fn fill(&mut self, out: &mut [u8]) -> Result<(), RngError> {
        self.read(out);
        Ok(())
    }
}

/// The first `len` bytes of the stream for `(domain, input)`.
pub fn xof_stream(domain: Domain, input: &[u8], len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    XofStream::new(domain, &[input]).read(&mut out);
    out
}

/// Fixed-point masses (units of 2^-64) of the sigma = 1.4 distribution on
/// |x| = 1..=15; the mass at 0 is whatever remains of 2^64.
const SIGMA_1_4_MASSES: [u64; NOISE_BOUND as usize] = [
    4_072_980_623_299_218_817,
    1_894_715_980_339_131_973,
    529_172_266_155_001_440,
    88_730_149_704_624_354,
    8_932_366_547_449_045,
    539_862_350_560_276,
    19_589_381_712_638,
    426_755_963_935,
    5_581_612_108,
    43_828_932,
    206_625,
    585,
    1,
    0,
    0,
];

/// Cumulative-distribution-table sampler for the rounded Gaussian on
/// `[-15, 15]`.
///
/// One 64-bit uniform word per sample. `thresholds[k]` is the total mass of
/// the cells `-15..=-15+k`; the sample is `-15` plus the number of thresholds
/// the word reaches. Every threshold is compared on every draw.
#[derive(Clone, Debug)]
pub struct NoiseSampler {
    sigma: f64,
    thresholds: [u128; CDT_THRESHOLDS],
    /// Low 64 bits of each threshold.
    low: [u64; CDT_THRESHOLDS],
    /// -1 (all ones) where the threshold is below 2^64, else 0.
    reachable: [i32; CDT_THRESHOLDS],
}

impl NoiseSampler {
    /// The sampler for `sigma`. `1.4` uses a table computed offline to full
    /// 64-bit precision; other values are computed here in double precision.
    pub fn for_sigma(sigma: f64) -> Self {
        if sigma == 1.4 {
            Self::from_half_masses(sigma, &SIGMA_1_4_MASSES)
        } else {
            Self::computed(sigma)
        }
    }

    fn computed(sigma: f64) -> Self {
        assert!(sigma >= 0.0 && sigma.is_finite(), "sigma must be finite and nonnegative");
        let mut half = [0u64; NOISE_BOUND as usize];
        if sigma > 0.0 {
            let rho = |x: f64| (-x * x / (2.0 * sigma * sigma)).exp();
            let total: f64 = 1.0 + 2.0 * (1..=NOISE_BOUND).map(|x| rho(f64::from(x))).sum::<f64>();
            for (i, m) in half.iter_mut().enumerate() {
                let p = rho((i + 1) as f64) / total;
                *m = (p * TWO_POW_64 as f64).round() as u64;
            }
        }
        Self::from_half_masses(sigma, &half)
    }

    fn from_half_masses(sigma: f64, half: &[u64; NOISE_BOUND as usize]) -> Self {
        let masses = symmetric_masses(half);
        let mut thresholds = [0u128; CDT_THRESHOLDS];
        let mut acc = 0u128;
        for (t, m) in thresholds.iter_mut().zip(masses.iter()) {
            acc += m;
            *t = acc;
        }
        let low = thresholds.map(|t| t as u64);
        let reachable = thresholds.map(|t| if t < TWO_POW_64 { -1 } else { 0 });
        NoiseSampler {
            sigma,
            thresholds,
            low,
            reachable,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Exact cell masses for `-15..=15`, in units of 2^-64. They sum to 2^64.
    pub fn cell_masses(&self) -> [u128; CDT_CELLS] {
        let mut out = [0u128; CDT_CELLS];
        let mut prev = 0u128;
        for (o, &t) in out.iter_mut().zip(self.thresholds.iter()) {
            *o = t - prev;
            prev = t;
        }
        out[CDT_CELLS - 1] = TWO_POW_64 - prev;
        out
    }

    /// Map one uniform word to a sample. Branch-free full-table scan.
    #[inline]
    pub fn sample(&self, word: u64) -> i32 {
        let mut x = -NOISE_BOUND;
        for k in 0..CDT_THRESHOLDS {
            x += self.reaches(word, k);
        }
        x
    }

    /// 1 iff `word >= thresholds[k]`; a threshold of 2^64 is never reached.
    #[inline(always)]
    fn reaches(&self, word: u64, k: usize) -> i32 {
        let (_, borrow) = word.overflowing_sub(self.low[k]);
        ((borrow as i32) ^ 1) & self.reachable[k]
    }

    /// Draw `n` samples, one 64-bit little-endian word each.
    pub fn sample_vector<S: ByteSource + ?Sized>(&self, src: &mut S, n: usize) -> Result<Vec<i32>, RngError> {
        let mut buf = vec![0u8; 8 * n];
        src.fill(&mut buf)?;
        let words: Vec<u64> = buf
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        buf.zeroize();
        // threshold-major so each pass is a straight loop over the words
        let mut out = vec![-NOISE_BOUND; n];
        for k in 0..CDT_THRESHOLDS {
            for (x, &w) in out.iter_mut().zip(&words) {
                *x += self.reaches(w, k);
            }
        }
        Ok(out)
    }
}

fn symmetric_masses(half: &[u64; NOISE_BOUND as usize]) -> [u128; CDT_CELLS] {
    let b = NOISE_BOUND as usize;
    let mut masses = [0u128; CDT_CELLS];
    let mut tails = 0u128;
    for (i, &m) in half.iter().enumerate() {
        masses[b + 1 + i] = u128::from(m);
        masses[b - 1 - i] = u128::from(m);
        tails += 2 * u128::from(m);
    }
    assert!(tails <= TWO_POW_64, "noise tail masses exceed 1");
    masses[b] = TWO_POW_64 - tails;
    masses
}

/// Variable-time sampler producing exactly the same outputs as
/// [`NoiseSampler::sample`], for statistics where timing does not matter.
#[derive(Clone)]
pub struct FastNoiseSampler {
    inner: NoiseSampler,
    by_prefix: Vec<i8>,
}

const PREFIX_BITS: u32 = 12;
const AMBIGUOUS: i8 = i8::MIN;

impl FastNoiseSampler {
    pub fn new(inner: NoiseSampler) -> Self {
        let shift = 64 - PREFIX_BITS;
        let by_prefix = (0..1u64 << PREFIX_BITS)
            .map(|h| {
                let lo = inner.sample(h << shift);
                let hi = inner.sample((h << shift) | ((1u64 << shift) - 1));
                if lo == hi {
                    lo as i8
                } else {
                    AMBIGUOUS
                }
            })
            .collect();
        FastNoiseSampler { inner, by_prefix }
    }

    #[inline]
    pub fn sample(&self, word: u64) -> i32 {
        let v = self.by_prefix[(word >> (64 - PREFIX_BITS)) as usize];
        if v == AMBIGUOUS {
            self.inner.sample(word)
        } else {
            i32::from(v)
        }
    }

    /// Sample from the high half of a 64-bit word, fetching the low half from
    /// `low` only when the 16-bit prefix does not decide the cell. Equal in
    /// distribution to [`FastNoiseSampler::sample`] on a uniform word.
    #[inline]
    pub fn sample_split(&self, high: u32, low: impl FnOnce() -> u32) -> i32 {
        let v = self.by_prefix[(high >> (32 - PREFIX_BITS)) as usize];
        if v == AMBIGUOUS {
            self.inner.sample((u64::from(high) << 32) | u64::from(low()))
        } else {
            i32::from(v)
        }
    }
}

/// Acceptance bound for 16-bit words: the largest multiple of `q` not above 2^16.
pub fn rejection_bound(q: u32) -> u32 {
    (65_536 / q) * q
}

/// Row-by-row expansion of the public matrix, so callers need not hold all
/// `n * n` entries.
///
/// Entries come from little-endian 16-bit words `w` of the `KyFrogA` stream
/// over `seedA`; `w` is accepted iff `w < rejection_bound(q)` and yields `w mod q`.
pub struct RowExpander {
    stream: XofStream,
    buf: Vec<u8>,
    pos: usize,
    n: usize,
    q: u32,
    bound: u32,
    rows_done: usize,
}

const EXPAND_BUF: usize = 8192;

impl RowExpander {
    pub fn new(seed_a: &[u8; 32], p: &ParameterSet) -> Self {
        assert!(p.q < 1 << 16, "matrix expansion needs q < 2^16");
        RowExpander {
            stream: XofStream::new(Domain::MatrixA, &[seed_a]),
            buf: vec![0u8; EXPAND_BUF],
            pos: EXPAND_BUF,
            n: p.n,
            q: p.q,
            bound: rejection_bound(p.q),
            rows_done: 0,
        }
    }

    #[inline]
    fn next_word(&mut self) -> u32 {
        if self.pos == self.buf.len() {
            self.stream.read(&mut self.buf);
            self.pos = 0;
        }
        let w = u32::from(u16::from_le_bytes([self.buf[self.pos], self.buf[self.pos + 1]]));
        self.pos += 2;
        w
    }

    fn next_entry(&mut self) -> Result<u16, RngError> {
        for _ in 0..REJECTION_CAP {
            let w = self.next_word();
            if w < self.bound {
                return Ok((w % self.q) as u16);
            }
        }
        Err(RngError::RejectionCapExceeded)
    }

    /// Fill `row` (length `n`) with the next row. Returns `false` once all
    /// `n` rows have been produced.
    pub fn next_row(&mut self, row: &mut [u16]) -> Result<bool, RngError> {
        assert_eq!(row.len(), self.n);
        if self.rows_done == self.n {
            return Ok(false);
        }
        for x in row.iter_mut() {
            *x = self.next_entry()?;
        }
        self.rows_done += 1;
        Ok(true)
    }
}

/// The public `n x n` matrix, row-major, entries in `[0, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixA {
    n: usize,
    entries: Vec<u16>,
}

impl MatrixA {
    pub fn expand(seed_a: &[u8; 32], p: &ParameterSet) -> Result<Self, RngError> {
        let mut rows = RowExpander::new(seed_a, p);
        let mut entries = vec![0u16; p.n * p.n];
        for row in entries.chunks_exact_mut(p.n) {
            rows.next_row(row)?;
        }
        Ok(MatrixA { n: p.n, entries })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[u16] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[u16] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drbg_known_answer() {
        let mut d = Drbg::from_seed(&[0u8; 48]);
        let out: [u8; 32] = d.array().unwrap();
        assert_eq!(
            hex::encode(out),
            "dc95c078a2408989ad48a21492842087530f8afbc74536b9a963b4f1c4cb738b"
        );
        let mut seed = [0u8; 48];
        for (i, b) in seed.iter_mut().enumerate() {
            *b = i as u8;
        }
        let out: [u8; 32] = Drbg::from_seed(&seed).array().unwrap();
        assert_eq!(
            hex::encode(out),
            "61a6936e4e8f101c1cc1f993b542a0d4b3b2f089cd2a435206ca05f23127a19b"
        );
    }

    #[test]
    fn drbg_determinism_and_distinct_seeds() {
        let a: [u8; 32] = Drbg::from_seed(&[7u8; 48]).array().unwrap();
        let b: [u8; 32] = Drbg::from_seed(&[7u8; 48]).array().unwrap();
        let c: [u8; 32] = Drbg::from_seed(&[8u8; 48]).array().unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn drbg_counter_advances_per_block() {
        let mut d = Drbg::from_seed(&[0u8; 48]);
        d.generate(&mut []).unwrap();
        assert_eq!(d.counter(), 0);
        d.generate(&mut [0u8; 17]).unwrap();
        assert_eq!(d.counter(), 2);
        // partial blocks are discarded, never reused
        let mut whole = Drbg::from_seed(&[0u8; 48]);
        let mut three = [0u8; 48];
        whole.generate(&mut three).unwrap();
        let next: [u8; 16] = d.array().unwrap();
        assert_eq!(next, three[32..48]);
    }

    #[test]
    fn drbg_os_reseeds_after_interval() {
        let mut d = Drbg::from_os_entropy().unwrap();
        for _ in 0..RESEED_INTERVAL {
            d.generate(&mut [0u8; 1]).unwrap();
        }
        let before = d.counter();
        d.generate(&mut [0u8; 1]).unwrap();
        assert_eq!(d.calls_since_reseed, 1);
        // reseeding installs a fresh random counter
        assert_ne!(d.counter(), before + 1);
    }

    #[test]
    fn xof_known_answer() {
        let out = xof_stream(Domain::MatrixA, &[0u8; 32], 64);
        assert_eq!(
            hex::encode(out),
            "509c6c0bf1af28c947df84e0f03ff28a0cfd89f892d38801aa50936cf5a0fa80\
             4f4176fa0b80fff4f85b30ac2139a81774cd7e15ca4e34ce3de8659fde877acd"
        );
    }

    #[test]
    fn xof_prefix_and_separation() {
        let long = xof_stream(Domain::FoHash, b"abc", 300);
        let short = xof_stream(Domain::FoHash, b"abc", 100);
        assert_eq!(&long[..100], &short[..]);
        assert_ne!(
            xof_stream(Domain::MatrixA, b"x", 32),
            xof_stream(Domain::BitRandomness, b"x", 32)
        );
        let labels: std::collections::HashSet<_> = Domain::ALL.iter().map(|d| d.label()).collect();
        assert_eq!(labels.len(), Domain::ALL.len());
    }

    #[test]
    fn reference_table_is_symmetric_and_complete() {
        let s = NoiseSampler::for_sigma(1.4);
        let m = s.cell_masses();
        assert_eq!(m.iter().sum::<u128>(), TWO_POW_64);
        for k in 0..15 {
            assert_eq!(m[k], m[30 - k]);
        }
        assert!(s.thresholds.windows(2).all(|w| w[0] <= w[1]));
        // mass at zero as computed offline: 5256561533390930157 (+1 from normalisation)
        assert_eq!(m[15], 5_256_561_533_390_930_158);
    }

    #[test]
    fn computed_table_tracks_reference_table() {
        let exact = NoiseSampler::for_sigma(1.4).cell_masses();
        let approx = NoiseSampler::computed(1.4).cell_masses();
        for (a, b) in exact.iter().zip(approx.iter()) {
            let diff = a.abs_diff(*b);
            assert!(diff <= 1 << 12, "cell differs by {diff}");
        }
    }

    #[test]
    fn sampler_boundaries() {
        let s = NoiseSampler::for_sigma(1.4);
        let m = s.cell_masses();
        // cumulative mass up to (but excluding) zero
        let below_zero: u128 = m[..15].iter().sum();
        assert_eq!(s.sample((below_zero - 1) as u64), -1);
        assert_eq!(s.sample(below_zero as u64), 0);
        let through_zero = below_zero + m[15];
        assert_eq!(s.sample((through_zero - 1) as u64), 0);
        assert_eq!(s.sample(through_zero as u64), 1);
        assert_eq!(s.sample(0), -13);
        assert_eq!(s.sample(u64::MAX), 13);
    }

    #[test]
    fn zero_sigma_is_point_mass() {
        let s = NoiseSampler::for_sigma(0.0);
        for w in [0, 1, u64::MAX / 2, u64::MAX] {
            assert_eq!(s.sample(w), 0);
        }
    }

    #[test]
    fn sample_vector_needs_eight_bytes_per_coefficient() {
        let s = NoiseSampler::for_sigma(1.4);
        let data = [0u8; 15];
        let mut src = SliceSource::new(&data);
        assert_eq!(s.sample_vector(&mut src, 2), Err(RngError::StreamExhausted));
        let mut src = SliceSource::new(&data);
        assert_eq!(s.sample_vector(&mut src, 1).unwrap().len(), 1);
        assert_eq!(src.remaining(), 7);
    }

    #[test]
    fn fast_sampler_agrees_on_cell_edges() {
        let s = NoiseSampler::for_sigma(1.4);
        let f = FastNoiseSampler::new(s.clone());
        for &t in &s.thresholds {
            for d in [0u128, 1, 2] {
                for w in [t.wrapping_sub(d), t + d] {
                    if w < TWO_POW_64 {
                        assert_eq!(f.sample(w as u64), s.sample(w as u64));
                    }
                }
            }
        }
    }

    #[test]
    fn rejection_bound_for_reference_modulus() {
        assert_eq!(rejection_bound(1103), 59 * 1103);
        assert_eq!(rejection_bound(1103), 65_077);
    }

    #[test]
    fn small_matrix_is_deterministic_and_reduced() {
        let p = ParameterSet::new(37, 1, 1103, 1.4, 1.4).unwrap();
        let a = MatrixA::expand(&[3u8; 32], &p).unwrap();
        let b = MatrixA::expand(&[3u8; 32], &p).unwrap();
        let c = MatrixA::expand(&[4u8; 32], &p).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.entries().iter().all(|&x| u32::from(x) < p.q));
        assert_eq!(a.row(2)[5], a.get(2, 5));
    }

    #[test]
    fn matrix_follows_the_rejection_rule() {
        let p = ParameterSet::new(8, 1, 1103, 1.4, 1.4).unwrap();
        let seed = [9u8; 32];
        let a = MatrixA::expand(&seed, &p).unwrap();
        let raw = xof_stream(Domain::MatrixA, &seed, 4096);
        let expected: Vec<u16> = raw
            .chunks_exact(2)
            .map(|c| u32::from(u16::from_le_bytes([c[0], c[1]])))
            .filter(|&w| w < 65_077)
            .map(|w| (w % 1103) as u16)
            .take(64)
            .collect();
        assert_eq!(a.entries(), &expected[..]);
    }

    #[test]
    fn row_expander_stops_after_n_rows() {
        let p = ParameterSet::new(4, 1, 1103, 1.4, 1.4).unwrap();
        let mut rows = RowExpander::new(&[0u8; 32], &p);
        let mut row = [0u16; 4];
        for _ in 0..4 {
            assert!(rows.next_row(&mut row).unwrap());
        }
        assert!(!rows.next_row(&mut row).unwrap());
    }
}
