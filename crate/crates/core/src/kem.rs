//! FO-transformed KEM over the single-bit PKE, with implicit rejection.
//!
//! Ciphertext layout (all integers little-endian):
//!
//! ```text
//! "KYFG" | 0x01 | n: u32 | 256: u32 | 256 x ( u: n x u16 | v: u16 )
//! ```
//!
//! Encapsulation hashes `m || pk` into `seed_r || K_raw`; bit `i` of `m` is
//! encrypted with noise from the `KyFrogR` stream over `seed_r || LE32(i)`,
//! and the session key is `KDF(K_raw || ct)`. Decapsulation re-encrypts the
//! decrypted message and mask-selects between that key and the rejection key
//! `KDF(Hash(rej || pk || ct) || ct)`.

use std::fmt;

use zeroize::Zeroize;

use crate::error::{CtFormatError, KemError, ParamsError, RngError};
use crate::params::{derive_sizes, ParameterSet, CT_HEADER_BYTES, MESSAGE_BITS, REFERENCE};
use crate::pke::{BitCiphertext, Pke, PublicKey, SecretKey};
use crate::rng::{Domain, Drbg, MatrixA, XofStream};

pub const CT_MAGIC: &[u8; 4] = b"KYFG";
pub const CT_VERSION: u8 = 0x01;
pub const SHARED_KEY_BYTES: usize = 32;
pub const MESSAGE_BYTES: usize = MESSAGE_BITS / 8;

/// A 256-bit session key. Compared in constant time; wiped on drop.
#[derive(Clone)]
pub struct SharedKey([u8; SHARED_KEY_BYTES]);

impl SharedKey {
    pub fn as_bytes(&self) -> &[u8; SHARED_KEY_BYTES] {
        &self.0
    }

    pub fn from_bytes(bytes: [u8; SHARED_KEY_BYTES]) -> Self {
        SharedKey(bytes)
    }
}

impl PartialEq for SharedKey {
    fn eq(&self, other: &Self) -> bool {
        constant_time_equal(&self.0, &other.0) == 1
    }
}

impl Eq for SharedKey {}

impl fmt::Debug for SharedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SharedKey(..)")
    }
}

impl Drop for SharedKey {
    fn drop(&mut self) {
        self.0.zeroize();
    }
}

/// 256 bit-ciphertexts for dimension `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KemCiphertext {
    n: u32,
    bits: Vec<BitCiphertext>,
}

impl KemCiphertext {
    pub fn new(bits: Vec<BitCiphertext>) -> Self {
        assert_eq!(bits.len(), MESSAGE_BITS);
        let n = bits[0].u.len();
        assert!(bits.iter().all(|b| b.u.len() == n));
        KemCiphertext {
            n: u32::try_from(n).expect("n fits the 32-bit header field"),
            bits,
        }
    }

    pub fn bits(&self) -> &[BitCiphertext] {
        &self.bits
    }

    pub fn encoded_len(n: usize) -> usize {
        CT_HEADER_BYTES + MESSAGE_BITS * (2 * n + 2)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::encoded_len(self.n as usize));
        out.extend_from_slice(CT_MAGIC);
        out.push(CT_VERSION);
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&(MESSAGE_BITS as u32).to_le_bytes());
        for b in &self.bits {
            for &x in &b.u {
                out.extend_from_slice(&x.to_le_bytes());
            }
            out.extend_from_slice(&b.v.to_le_bytes());
        }
        out
    }

    /// Parse and fully validate against `params`: length, magic, version,
    /// header fields and every coefficient below `q`.
    pub fn decode(params: &ParameterSet, bytes: &[u8]) -> Result<Self, CtFormatError> {
        let n = params.n;
        let expected = Self::encoded_len(n);
        if bytes.len() < CT_HEADER_BYTES {
            return Err(CtFormatError::Length {
                expected,
                actual: bytes.len(),
            });
        }
        if &bytes[..4] != CT_MAGIC {
            return Err(CtFormatError::Magic);
        }
        if bytes[4] != CT_VERSION {
            return Err(CtFormatError::Version(bytes[4]));
        }
        let n_field = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes"));
        let bit_field = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes"));
        if n_field as usize != n {
            return Err(CtFormatError::Dimension(n_field));
        }
        if bit_field as usize != MESSAGE_BITS {
            return Err(CtFormatError::BitCount(bit_field));
        }
        if bytes.len() != expected {
            return Err(CtFormatError::Length {
                expected,
                actual: bytes.len(),
            });
        }
        let words = &bytes[CT_HEADER_BYTES..];
        let mut bits = Vec::with_capacity(MESSAGE_BITS);
        for (i, chunk) in words.chunks_exact(2 * n + 2).enumerate() {
            let mut coeffs = Vec::with_capacity(n + 1);
            for (j, w) in chunk.chunks_exact(2).enumerate() {
                let x = u16::from_le_bytes([w[0], w[1]]);
                if u32::from(x) >= params.q {
                    return Err(CtFormatError::Coefficient {
                        offset: CT_HEADER_BYTES + i * (2 * n + 2) + 2 * j,
                    });
                }
                coeffs.push(x);
            }
            let v = coeffs.pop().expect("n + 1 words");
            bits.push(BitCiphertext { u: coeffs, v });
        }
        Ok(KemCiphertext {
            n: n_field,
            bits,
        })
    }
}

/// Constant-time equality of two byte strings: 1 iff equal.
///
/// Lengths are public and compared first; otherwise every byte pair is read
/// regardless of where the first difference is.
pub fn constant_time_equal(a: &[u8], b: &[u8]) -> u8 {
    if a.len() != b.len() {
        return 0;
    }
    fold_difference(a.len(), |i| (a[i], b[i]))
}

fn fold_difference(len: usize, mut pair: impl FnMut(usize) -> (u8, u8)) -> u8 {
    let mut diff = 0u8;
    for i in 0..len {
        let (x, y) = pair(i);
        diff |= x ^ y;
    }
    let diff = std::hint::black_box(diff);
    // 1 iff diff == 0
    ((u16::from(diff).wrapping_sub(1) >> 8) & 1) as u8
}

/// `flag == 1 ? good : bad`, by masking.
fn select_key(flag: u8, good: &[u8; SHARED_KEY_BYTES], bad: &[u8; SHARED_KEY_BYTES]) -> SharedKey {
    let mask = 0u8.wrapping_sub(std::hint::black_box(flag) & 1);
    let mut out = [0u8; SHARED_KEY_BYTES];
    for ((o, g), b) in out.iter_mut().zip(good).zip(bad) {
        *o = (g & mask) | (b & !mask);
    }
    SharedKey(out)
}

fn kdf(key_material: &[u8; 32], ct: &[u8]) -> [u8; SHARED_KEY_BYTES] {
    XofStream::new(Domain::Kdf, &[key_material, ct]).array()
}

/// `KDF(Hash(rej || pk || ct) || ct)`.
pub fn rejection_key(pk_bytes: &[u8], ct: &[u8]) -> SharedKey {
    let mut seed: [u8; 32] = XofStream::new(Domain::Reject, &[pk_bytes, ct]).array();
    let key = kdf(&seed, ct);
    seed.zeroize();
    SharedKey(key)
}

struct FoHash {
    seed_r: [u8; 32],
    k_raw: [u8; 32],
}

impl Drop for FoHash {
    fn drop(&mut self) {
        self.seed_r.zeroize();
        self.k_raw.zeroize();
    }
}

fn fo_hash(m: &[u8; MESSAGE_BYTES], pk_bytes: &[u8]) -> FoHash {
    let mut h: [u8; 64] = XofStream::new(Domain::FoHash, &[m, pk_bytes]).array();
    let mut out = FoHash {
        seed_r: [0; 32],
        k_raw: [0; 32],
    };
    out.seed_r.copy_from_slice(&h[..32]);
    out.k_raw.copy_from_slice(&h[32..]);
    h.zeroize();
    out
}

/// Bit `i` of `m`, least significant bit of byte 0 first.
fn message_bit(m: &[u8; MESSAGE_BYTES], i: usize) -> u8 {
    (m[i / 8] >> (i % 8)) & 1
}

/// The KEM for one parameter set.
#[derive(Clone, Debug)]
pub struct Kem {
    pke: Pke,
}

impl Kem {
    pub fn new(params: &ParameterSet) -> Result<Self, ParamsError> {
        Ok(Kem { pke: Pke::new(params)? })
    }

    pub fn reference() -> Self {
        Kem::new(&REFERENCE).expect("reference set is supported")
    }

    pub fn from_pke(pke: Pke) -> Self {
        Kem { pke }
    }

    pub fn pke(&self) -> &Pke {
        &self.pke
    }

    pub fn params(&self) -> &ParameterSet {
        self.pke.params()
    }

    pub fn ciphertext_bytes(&self) -> usize {
        derive_sizes(self.params()).expect("validated").ct_bytes
    }

    pub fn keygen(&self, drbg: &mut Drbg) -> Result<(PublicKey, SecretKey), KemError> {
        Ok(self.pke.keygen(drbg)?)
    }

    /// Encapsulate to `pk` with a fresh 256-bit message from `drbg`.
    pub fn encap(&self, pk: &PublicKey, drbg: &mut Drbg) -> Result<(Vec<u8>, SharedKey), KemError> {
        let mut m: [u8; MESSAGE_BYTES] = drbg.array()?;
        let out = self.encap_derand(pk, &m);
        m.zeroize();
        Ok(out?)
    }

    /// Encapsulation with the message supplied by the caller. The output is a
    /// deterministic function of `(m, pk)`; `m` must be uniformly random and
    /// secret for the result to be secure.
    pub fn encap_derand(&self, pk: &PublicKey, m: &[u8; MESSAGE_BYTES]) -> Result<(Vec<u8>, SharedKey), RngError> {
        let pk_bytes = pk.to_bytes();
        let a = self.pke.expand_a(pk.seed_a())?;
        let h = fo_hash(m, &pk_bytes);
        let ct = self.encrypt_message(pk, &a, m, &h.seed_r)?.encode();
        let key = SharedKey(kdf(&h.k_raw, &ct));
        Ok((ct, key))
    }

    fn encrypt_message(
        &self,
        pk: &PublicKey,
        a: &MatrixA,
        m: &[u8; MESSAGE_BYTES],
        seed_r: &[u8; 32],
    ) -> Result<KemCiphertext, RngError> {
        let noises = (0..MESSAGE_BITS)
            .map(|i| {
                let tag = (i as u32).to_le_bytes();
                self.pke
                    .sample_encryption_noise(&mut XofStream::new(Domain::BitRandomness, &[seed_r, &tag]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let jobs: Vec<_> = noises.iter().enumerate().map(|(i, nz)| (message_bit(m, i), nz)).collect();
        Ok(KemCiphertext::new(self.pke.encrypt_batch(pk, a, &jobs)))
    }

    /// Decapsulate. Any malformed or inauthentic ciphertext yields the
    /// implicit-rejection key; there is no error for bad input.
    ///
    /// The only error is a catastrophic failure expanding the public matrix,
    /// which depends on `pk` alone.
    pub fn decap(&self, sk: &SecretKey, pk: &PublicKey, ct: &[u8]) -> Result<SharedKey, RngError> {
        let pk_bytes = pk.to_bytes();
        let parsed = match KemCiphertext::decode(self.params(), ct) {
            Ok(parsed) => parsed,
            Err(_) => return Ok(rejection_key(&pk_bytes, ct)),
        };
        let mut m_hat = [0u8; MESSAGE_BYTES];
        for (i, c) in parsed.bits().iter().enumerate() {
            m_hat[i / 8] |= self.pke.decrypt_bit(sk, c) << (i % 8);
        }
        let h = fo_hash(&m_hat, &pk_bytes);
        let a = self.pke.expand_a(pk.seed_a())?;
        let reencrypted = self.encrypt_message(pk, &a, &m_hat, &h.seed_r)?.encode();
        m_hat.zeroize();
        let flag = constant_time_equal(ct, &reencrypted);
        let mut good = kdf(&h.k_raw, ct);
        let bad = rejection_key(&pk_bytes, ct);
        let key = select_key(flag, &good, bad.as_bytes());
        good.zeroize();
        Ok(key)
    }
}
