//! Hybrid file encryption: a KEM ciphertext and an AES-256-GCM payload in one
//! container.
//!
//! ```text
//! "KYFH" | 0x01 | kem_ct_len: u32 LE | kem_ct | nonce (12) | tag (16) | payload
//! ```
//!
//! The GCM key is `KyFrogFile(K)` for the encapsulated key `K`, and the bytes
//! from the magic through the end of `kem_ct` are the associated data. One
//! GCM call covers the whole file, which caps plaintexts at 64 GiB.

use aes_gcm::aead::{AeadInPlace, KeyInit};
use aes_gcm::{Aes256Gcm, Key, Nonce, Tag};
use zeroize::Zeroize;

use crate::error::{AuthenticationFailure, KemError};
use crate::kem::{Kem, KemCiphertext, SharedKey};
use crate::params::CT_HEADER_BYTES;
use crate::pke::{PublicKey, SecretKey};
use crate::rng::{xof_stream, Domain, Drbg};

pub const CONTAINER_MAGIC: &[u8; 4] = b"KYFH";
pub const CONTAINER_VERSION: u8 = 0x01;
/// Magic, version and the length field.
pub const CONTAINER_HEADER_BYTES: usize = 4 + 1 + 4;
pub const NONCE_BYTES: usize = 12;
pub const TAG_BYTES: usize = 16;

/// Largest plaintext one container can hold (the GCM per-key limit).
pub const MAX_PLAINTEXT_BYTES: u64 = (1 << 36) - 32;

/// A parsed container.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridContainer {
    pub kem_ct: Vec<u8>,
    pub nonce: [u8; NONCE_BYTES],
    pub tag: [u8; TAG_BYTES],
    pub payload: Vec<u8>,
}

impl HybridContainer {
    /// Total encoded length for a given KEM ciphertext and payload.
    pub fn encoded_len(kem_ct_len: usize, payload_len: usize) -> usize {
        CONTAINER_HEADER_BYTES + kem_ct_len + NONCE_BYTES + TAG_BYTES + payload_len
    }

    fn associated_data(kem_ct: &[u8]) -> Vec<u8> {
        let mut ad = Vec::with_capacity(CONTAINER_HEADER_BYTES + kem_ct.len());
        ad.extend_from_slice(CONTAINER_MAGIC);
        ad.push(CONTAINER_VERSION);
        ad.extend_from_slice(&(kem_ct.len() as u32).to_le_bytes());
        ad.extend_from_slice(kem_ct);
        ad
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Self::associated_data(&self.kem_ct);
        out.reserve(NONCE_BYTES + TAG_BYTES + self.payload.len());
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.tag);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Split a container into its fields. The KEM ciphertext must describe its
    /// own length consistently with `kem_ct_len`.
    pub fn parse(bytes: &[u8]) -> Result<Self, AuthenticationFailure> {
        if bytes.len() < CONTAINER_HEADER_BYTES || &bytes[..4] != CONTAINER_MAGIC || bytes[4] != CONTAINER_VERSION {
            return Err(AuthenticationFailure);
        }
        let kem_ct_len = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let rest = &bytes[CONTAINER_HEADER_BYTES..];
        if kem_ct_len < CT_HEADER_BYTES || rest.len() < kem_ct_len + NONCE_BYTES + TAG_BYTES {
            return Err(AuthenticationFailure);
        }
        let (kem_ct, rest) = rest.split_at(kem_ct_len);
        let n_field = u32::from_le_bytes(kem_ct[5..9].try_into().unwrap()) as usize;
        if KemCiphertext::encoded_len(n_field) != kem_ct_len {
            return Err(AuthenticationFailure);
        }
        let (nonce, rest) = rest.split_at(NONCE_BYTES);
        let (tag, payload) = rest.split_at(TAG_BYTES);
        Ok(HybridContainer {
            kem_ct: kem_ct.to_vec(),
            nonce: nonce.try_into().unwrap(),
            tag: tag.try_into().unwrap(),
            payload: payload.to_vec(),
        })
    }
}

fn file_cipher(key: &SharedKey) -> Aes256Gcm {
    let mut k = xof_stream(Domain::FileKey, key.as_bytes(), 32);
    let cipher = Aes256Gcm::new(Key::<Aes256Gcm>::from_slice(&k));
    k.zeroize();
    cipher
}

/// Encrypt `plaintext` to `pk`.
pub fn encrypt_file(kem: &Kem, pk: &PublicKey, plaintext: &[u8], drbg: &mut Drbg) -> Result<Vec<u8>, KemError> {
    assert!(
        plaintext.len() as u64 <= MAX_PLAINTEXT_BYTES,
        "plaintext exceeds the single-message GCM limit"
    );
    let (kem_ct, key) = kem.encap(pk, drbg)?;
    let nonce: [u8; NONCE_BYTES] = drbg.array()?;
    let ad = HybridContainer::associated_data(&kem_ct);
    let mut payload = plaintext.to_vec();
    let tag = file_cipher(&key)
        .encrypt_in_place_detached(Nonce::from_slice(&nonce), &ad, &mut payload)
        .expect("plaintext length checked above");
    Ok(HybridContainer {
        kem_ct,
        nonce,
        tag: tag.into(),
        payload,
    }
    .to_bytes())
}

/// Decrypt a container. Every failure, from framing to a rejected KEM
/// ciphertext to a bad tag, is the same [`AuthenticationFailure`].
pub fn decrypt_file(kem: &Kem, sk: &SecretKey, pk: &PublicKey, container: &[u8]) -> Result<Vec<u8>, AuthenticationFailure> {
    let c = HybridContainer::parse(container)?;
    let key = kem.decap(sk, pk, &c.kem_ct).map_err(|_| AuthenticationFailure)?;
    let ad = HybridContainer::associated_data(&c.kem_ct);
    let mut plaintext = c.payload;
    match file_cipher(&key).decrypt_in_place_detached(
        Nonce::from_slice(&c.nonce),
        &ad,
        &mut plaintext,
        Tag::from_slice(&c.tag),
    ) {
        Ok(()) => Ok(plaintext),
        Err(_) => {
            plaintext.zeroize();
            Err(AuthenticationFailure)
        }
    }
}
