//! Single-bit LWE public-key encryption.
//!
//! `t = A s + e`, `u = A^T r + e1`, `v = <t, r> + e2 + floor(q/2) m`, all mod `q`.
//! Decryption decodes `v - <u, s>` to whichever of `0` and `floor(q/2)` is
//! circularly closer, ties going to 1.

use zeroize::Zeroize;

use crate::error::{KeyFormatError, ParamsError, RngError};
use crate::params::{derive_sizes, ParameterSet, SEED_BYTES};
use crate::rng::{ByteSource, Domain, Drbg, MatrixA, NoiseSampler, XofStream, NOISE_BOUND};

pub const PK_FILE_MAGIC: &[u8; 4] = b"KYPK";
pub const SK_FILE_MAGIC: &[u8; 4] = b"KYSK";
pub const KEY_FILE_VERSION: u8 = 0x01;
pub const KEY_FILE_HEADER_BYTES: usize = 5;

/// Reduction modulo `q` without data-dependent division.
#[derive(Clone, Copy, Debug)]
pub struct Modulus {
    q: u32,
    /// floor(2^64 / q)
    ratio: u64,
}

impl Modulus {
    pub fn new(q: u32) -> Self {
        assert!(q >= 2);
        Modulus {
            q,
            ratio: ((1u128 << 64) / u128::from(q)) as u64,
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// `x mod q`.
    #[inline]
    pub fn reduce(&self, x: u64) -> u32 {
        let quot = ((u128::from(x) * u128::from(self.ratio)) >> 64) as u64;
        // the estimate is low by at most one
        let r = x.wrapping_sub(quot.wrapping_mul(u64::from(self.q)));
        let t = r.wrapping_sub(u64::from(self.q));
        let keep_r = 0u64.wrapping_sub(t >> 63);
        ((r & keep_r) | (t & !keep_r)) as u32
    }

    /// `x mod q` for signed `x` with `|x| < 2^62`.
    #[inline]
    pub fn reduce_signed(&self, x: i64) -> u32 {
        // 2^62 rounded up to a multiple of q keeps the operand nonnegative
        let lift = ((1u64 << 62) / u64::from(self.q) + 1) * u64::from(self.q);
        self.reduce((x + lift as i64) as u64)
    }
}

/// Branch-free decoder: 1 iff `v'` is at least as close to `floor(q/2)` as to 0.
#[inline]
pub fn decode_bit(v_prime: u32, q: u32) -> u8 {
    let q = q as i32;
    let v = v_prime as i32;
    let h = q / 2;
    let wrap = q - v;
    let lt = (v - wrap) >> 31;
    let d0 = (v & lt) | (wrap & !lt);
    let x = v - h;
    let sign = x >> 31;
    let dh = (x ^ sign) - sign;
    (((d0 - dh) >> 31) + 1) as u8
}

/// Map a residue to the centered range `(-q/2, q/2]`.
pub fn center(x: u32, q: u32) -> i32 {
    let x = x as i32;
    let q = q as i32;
    if x > q / 2 {
        x - q
    } else {
        x
    }
}

/// Checks that the KEM's fixed-width arithmetic holds for `p`: 16-bit
/// coefficient words and 32-bit accumulation of `A^T r`.
pub fn check_kem_support(p: &ParameterSet) -> Result<(), ParamsError> {
    p.validate()?;
    let acc_bound = (p.n as u64) * (NOISE_BOUND as u64) * u64::from(p.q - 1) + NOISE_BOUND as u64;
    let product_bound = u64::from(p.q - 1) * NOISE_BOUND as u64;
    if p.q >= 1 << 16 || p.n > u32::MAX as usize || acc_bound >= 1 << 31 || product_bound >= 1 << 15 {
        return Err(ParamsError::UnsupportedByKem(p.to_string()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PublicKey {
    params: ParameterSet,
    seed_a: [u8; SEED_BYTES],
    t: Vec<u16>,
}

impl PublicKey {
    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn seed_a(&self) -> &[u8; SEED_BYTES] {
        &self.seed_a
    }

    pub fn t(&self) -> &[u16] {
        &self.t
    }

    /// `seedA || t`, with `t` packed at `bits_per_coeff` bits per
    /// coefficient, least significant bit first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let sizes = derive_sizes(&self.params).expect("validated at construction");
        let mut out = Vec::with_capacity(sizes.pk_bytes);
        out.extend_from_slice(&self.seed_a);
        out.extend(pack_bits(&self.t, sizes.bits_per_coeff));
        debug_assert_eq!(out.len(), sizes.pk_bytes);
        out
    }

    pub fn from_bytes(params: &ParameterSet, bytes: &[u8]) -> Result<Self, KeyFormatError> {
        let sizes = derive_sizes(params).map_err(|_| KeyFormatError::Header)?;
        if bytes.len() != sizes.pk_bytes {
            return Err(KeyFormatError::Length {
                expected: sizes.pk_bytes,
                actual: bytes.len(),
            });
        }
        let (seed, packed) = bytes.split_at(SEED_BYTES);
        let t = unpack_bits(packed, sizes.bits_per_coeff, params.n);
        if let Some(index) = t.iter().position(|&x| u32::from(x) >= params.q) {
            return Err(KeyFormatError::Coefficient { index });
        }
        // padding bits past the last coefficient must be zero
        if pack_bits(&t, sizes.bits_per_coeff) != packed {
            return Err(KeyFormatError::Coefficient { index: params.n });
        }
        Ok(PublicKey {
            params: *params,
            seed_a: seed.try_into().expect("32-byte seed"),
            t,
        })
    }

    pub fn to_file_bytes(&self) -> Vec<u8> {
        let mut out = file_header(PK_FILE_MAGIC);
        out.extend(self.to_bytes());
        out
    }

    pub fn from_file_bytes(params: &ParameterSet, bytes: &[u8]) -> Result<Self, KeyFormatError> {
        Self::from_bytes(params, strip_header(PK_FILE_MAGIC, bytes)?)
    }
}

/// The secret vector `s`, stored mod `q`. Wiped on drop.
#[derive(Clone, PartialEq)]
pub struct SecretKey {
    params: ParameterSet,
    s: Vec<u16>,
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecretKey").field("params", &self.params).finish_non_exhaustive()
    }
}

impl Drop for SecretKey {
    fn drop(&mut self) {
        self.s.zeroize();
    }
}

impl SecretKey {
    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn coefficients(&self) -> &[u16] {
        &self.s
    }

    /// `n` little-endian 16-bit words.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.s.iter().flat_map(|x| x.to_le_bytes()).collect()
    }

    pub fn from_bytes(params: &ParameterSet, bytes: &[u8]) -> Result<Self, KeyFormatError> {
        if bytes.len() != 2 * params.n {
            return Err(KeyFormatError::Length {
                expected: 2 * params.n,
                actual: bytes.len(),
            });
        }
        let s: Vec<u16> = bytes.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
        for (index, &x) in s.iter().enumerate() {
            if u32::from(x) >= params.q || center(u32::from(x), params.q).abs() > NOISE_BOUND {
                return Err(KeyFormatError::Coefficient { index });
            }
        }
        Ok(SecretKey { params: *params, s })
    }

    pub fn to_file_bytes(&self) -> Vec<u8> {
        let mut out = file_header(SK_FILE_MAGIC);
        out.extend(self.to_bytes());
        out
    }

    pub fn from_file_bytes(params: &ParameterSet, bytes: &[u8]) -> Result<Self, KeyFormatError> {
        Self::from_bytes(params, strip_header(SK_FILE_MAGIC, bytes)?)
    }
}

fn file_header(magic: &[u8; 4]) -> Vec<u8> {
    let mut out = magic.to_vec();
    out.push(KEY_FILE_VERSION);
    out
}

fn strip_header<'a>(magic: &[u8; 4], bytes: &'a [u8]) -> Result<&'a [u8], KeyFormatError> {
    if bytes.len() < KEY_FILE_HEADER_BYTES || &bytes[..4] != magic || bytes[4] != KEY_FILE_VERSION {
        return Err(KeyFormatError::Header);
    }
    Ok(&bytes[KEY_FILE_HEADER_BYTES..])
}

/// Little-endian bit packing: bit `j` of value `i` lands at stream bit `i * bits + j`.
pub fn pack_bits(values: &[u16], bits: u32) -> Vec<u8> {
    let mut out = vec![0u8; (values.len() * bits as usize).div_ceil(8)];
    let mut acc = 0u32;
    let mut filled = 0u32;
    let mut pos = 0;
    for &v in values {
        acc |= u32::from(v) << filled;
        filled += bits;
        while filled >= 8 {
            out[pos] = acc as u8;
            pos += 1;
            acc >>= 8;
            filled -= 8;
        }
    }
    if filled > 0 {
        out[pos] = acc as u8;
    }
    out
}

pub fn unpack_bits(bytes: &[u8], bits: u32, count: usize) -> Vec<u16> {
    let mask = (1u32 << bits) - 1;
    let mut out = Vec::with_capacity(count);
    let mut acc = 0u32;
    let mut filled = 0u32;
    let mut iter = bytes.iter();
    while out.len() < count {
        while filled < bits {
            acc |= u32::from(*iter.next().unwrap_or(&0)) << filled;
            filled += 8;
        }
        out.push((acc & mask) as u16);
        acc >>= bits;
        filled -= bits;
    }
    out
}

/// One encrypted bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitCiphertext {
    pub u: Vec<u16>,
    pub v: u16,
}

/// Noise vectors drawn for one bit encryption, in stream order. Wiped on drop.
pub struct EncryptionNoise {
    pub r: Vec<i32>,
    pub e1: Vec<i32>,
    pub e2: i32,
}

impl Drop for EncryptionNoise {
    fn drop(&mut self) {
        self.r.zeroize();
        self.e1.zeroize();
        self.e2.zeroize();
    }
}

/// `acc += row * r`. Every product `|A_ij * r_i| <= (q - 1) * 15` fits 16 bits
/// ([`check_kem_support`] enforces it, and bounds the 32-bit sums).
#[inline]
fn axpy(acc: &mut [i32], row: &[u16], r: i16) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: AVX2 support was just checked.
            unsafe { axpy_avx2(acc, row, r) };
            return;
        }
    }
    axpy_portable(acc, row, r);
}

#[inline(always)]
fn axpy_portable(acc: &mut [i32], row: &[u16], r: i16) {
    for (slot, &x) in acc.iter_mut().zip(row) {
        *slot = slot.wrapping_add(i32::from((x as i16).wrapping_mul(r)));
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn axpy_avx2(acc: &mut [i32], row: &[u16], r: i16) {
    axpy_portable(acc, row, r);
}

/// The PKE for one parameter set and its pair of noise samplers.
#[derive(Clone, Debug)]
pub struct Pke {
    params: ParameterSet,
    modulus: Modulus,
    secret_noise: NoiseSampler,
    error_noise: NoiseSampler,
}

impl Pke {
    pub fn new(params: &ParameterSet) -> Result<Self, ParamsError> {
        Self::with_samplers(
            params,
            NoiseSampler::for_sigma(params.sigma_s),
            NoiseSampler::for_sigma(params.sigma_e),
        )
    }

    /// Use explicit samplers: `secret_noise` for `s` and `r`, `error_noise`
    /// for `e`, `e1` and `e2`.
    pub fn with_samplers(
        params: &ParameterSet,
        secret_noise: NoiseSampler,
        error_noise: NoiseSampler,
    ) -> Result<Self, ParamsError> {
        check_kem_support(params)?;
        Ok(Pke {
            params: *params,
            modulus: Modulus::new(params.q),
            secret_noise,
            error_noise,
        })
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn expand_a(&self, seed_a: &[u8; SEED_BYTES]) -> Result<MatrixA, RngError> {
        MatrixA::expand(seed_a, &self.params)
    }

    /// `seedA` and a 32-byte noise seed from the DRBG, then [`Pke::keygen_from_seeds`].
    pub fn keygen(&self, drbg: &mut Drbg) -> Result<(PublicKey, SecretKey), RngError> {
        let seed_a: [u8; SEED_BYTES] = drbg.array()?;
        let mut noise_seed: [u8; 32] = drbg.array()?;
        let out = self.keygen_from_seeds(&seed_a, &noise_seed);
        noise_seed.zeroize();
        out
    }

    pub fn keygen_from_seeds(
        &self,
        seed_a: &[u8; SEED_BYTES],
        noise_seed: &[u8; 32],
    ) -> Result<(PublicKey, SecretKey), RngError> {
        let a = self.expand_a(seed_a)?;
        let (mut s, mut e) = self.keygen_noise(noise_seed)?;
        let q = self.params.q;
        let t = (0..self.params.n)
            .map(|i| {
                let dot: i64 = a.row(i).iter().zip(&s).map(|(&x, &y)| i64::from(x) * i64::from(y)).sum();
                self.modulus.reduce_signed(dot + i64::from(e[i])) as u16
            })
            .collect();
        let s_stored = s.iter().map(|&x| self.modulus.reduce_signed(i64::from(x)) as u16).collect();
        s.zeroize();
        e.zeroize();
        debug_assert!(q < 1 << 16);
        Ok((
            PublicKey {
                params: self.params,
                seed_a: *seed_a,
                t,
            },
            SecretKey {
                params: self.params,
                s: s_stored,
            },
        ))
    }

    /// The centered `(s, e)` that [`Pke::keygen_from_seeds`] draws from `noise_seed`.
    pub fn keygen_noise(&self, noise_seed: &[u8; 32]) -> Result<(Vec<i32>, Vec<i32>), RngError> {
        let n = self.params.n;
        let s = self
            .secret_noise
            .sample_vector(&mut XofStream::new(Domain::SecretNoise, &[noise_seed]), n)?;
        let e = self
            .error_noise
            .sample_vector(&mut XofStream::new(Domain::ErrorNoise, &[noise_seed]), n)?;
        Ok((s, e))
    }

    /// Draw `r`, `e1`, `e2` (in that order) from `noise`.
    pub fn sample_encryption_noise<S: ByteSource + ?Sized>(&self, noise: &mut S) -> Result<EncryptionNoise, RngError> {
        let n = self.params.n;
        let r = self.secret_noise.sample_vector(noise, n)?;
        let e1 = self.error_noise.sample_vector(noise, n)?;
        let e2 = self.error_noise.sample_vector(noise, 1)?[0];
        Ok(EncryptionNoise { r, e1, e2 })
    }

    pub fn encrypt_bit<S: ByteSource + ?Sized>(
        &self,
        pk: &PublicKey,
        a: &MatrixA,
        m: u8,
        noise: &mut S,
    ) -> Result<BitCiphertext, RngError> {
        let en = self.sample_encryption_noise(noise)?;
        Ok(self.encrypt_with_noise(pk, a, m, &en))
    }

    pub fn encrypt_with_noise(&self, pk: &PublicKey, a: &MatrixA, m: u8, noise: &EncryptionNoise) -> BitCiphertext {
        self.encrypt_batch(pk, a, &[(m, noise)]).pop().expect("one job")
    }

    /// Encrypt several bits, sharing each pass over `A` between them.
    pub fn encrypt_batch(&self, pk: &PublicKey, a: &MatrixA, jobs: &[(u8, &EncryptionNoise)]) -> Vec<BitCiphertext> {
        const GROUP: usize = 8;
        let n = self.params.n;
        debug_assert_eq!(a.dimension(), n);
        let mut out = Vec::with_capacity(jobs.len());
        let mut acc = vec![0i32; GROUP * n];
        for group in jobs.chunks(GROUP) {
            acc.fill(0);
            // A^T r for each job, one row of A at a time
            for i in 0..n {
                let row = a.row(i);
                for (slots, (_, noise)) in acc.chunks_exact_mut(n).zip(group) {
                    axpy(slots, row, noise.r[i] as i16);
                }
            }
            for (slots, &(m, noise)) in acc.chunks_exact(n).zip(group) {
                let u = slots
                    .iter()
                    .zip(&noise.e1)
                    .map(|(&x, &e)| self.modulus.reduce_signed(i64::from(x) + i64::from(e)) as u16)
                    .collect();
                let tr: i64 = pk.t.iter().zip(&noise.r).map(|(&x, &y)| i64::from(x) * i64::from(y)).sum();
                let encoded = i64::from(self.params.half_q()) * i64::from(m & 1);
                let v = self.modulus.reduce_signed(tr + i64::from(noise.e2) + encoded) as u16;
                out.push(BitCiphertext { u, v });
            }
        }
        acc.zeroize();
        out
    }

    /// `v - <u, s> mod q`.
    pub fn phase(&self, sk: &SecretKey, c: &BitCiphertext) -> u32 {
        let dot = c.u.iter().zip(&sk.s).fold(0u64, |d, (&x, &y)| d.wrapping_add(u64::from(x) * u64::from(y)));
        let q = u64::from(self.params.q);
        self.modulus.reduce(u64::from(c.v) + q - u64::from(self.modulus.reduce(dot)))
    }

    pub fn decrypt_bit(&self, sk: &SecretKey, c: &BitCiphertext) -> u8 {
        decode_bit(self.phase(sk, c), self.params.q)
    }

    /// The centered decryption error `v' - floor(q/2) m` for a ciphertext of bit `m`.
    pub fn decryption_error(&self, sk: &SecretKey, c: &BitCiphertext, m: u8) -> i32 {
        let q = self.params.q;
        let shifted = (self.phase(sk, c) + q - self.params.half_q() * u32::from(m & 1)) % q;
        center(shifted, q)
    }
}
