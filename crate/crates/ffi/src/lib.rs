//! C ABI for the reference KEM parameter set.
//!
//! Keys live behind opaque handles that the caller frees with the matching
//! `*_free` function. Every function returns a [`KyfrogStatus`]; output
//! buffers are only written on success. Decapsulation never reports an
//! invalid ciphertext: it succeeds with the implicit-rejection key.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::OnceLock;

use kyfrog::kem::{Kem, SHARED_KEY_BYTES};
use kyfrog::pke::{PublicKey, SecretKey};
use kyfrog::rng::{Drbg, DRBG_SEED_BYTES};
use kyfrog::REFERENCE;
use zeroize::Zeroize;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KyfrogStatus {
    Ok = 0,
    NullPointer = 1,
    BufferSize = 2,
    InvalidKey = 3,
    Entropy = 4,
    Internal = 5,
}

/// Opaque public key.
pub struct KyfrogPublicKey(PublicKey);

/// Opaque secret key. Wiped when freed.
pub struct KyfrogSecretKey(SecretKey);

fn kem() -> &'static Kem {
    static KEM: OnceLock<Kem> = OnceLock::new();
    KEM.get_or_init(Kem::reference)
}

fn guard(f: impl FnOnce() -> KyfrogStatus) -> KyfrogStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(KyfrogStatus::Internal)
}

unsafe fn input<'a>(p: *const u8, len: usize) -> Option<&'a [u8]> {
    if p.is_null() {
        (len == 0).then_some(&[])
    } else {
        Some(slice::from_raw_parts(p, len))
    }
}

unsafe fn write_exact(out: *mut u8, out_len: usize, data: &[u8]) -> KyfrogStatus {
    if out.is_null() {
        return KyfrogStatus::NullPointer;
    }
    if out_len != data.len() {
        return KyfrogStatus::BufferSize;
    }
    ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
    KyfrogStatus::Ok
}

fn seeded(seed: *const u8) -> Option<Drbg> {
    if seed.is_null() {
        return None;
    }
    // SAFETY: callers pass DRBG_SEED_BYTES readable bytes.
    let seed: &[u8; DRBG_SEED_BYTES] = unsafe { &*(seed as *const [u8; DRBG_SEED_BYTES]) };
    Some(Drbg::from_seed(seed))
}

/// Encoded public-key length (seed plus packed `t`).
#[no_mangle]
pub extern "C" fn kyfrog_public_key_bytes() -> usize {
    REFERENCE.derive_sizes().unwrap().pk_bytes
}

#[no_mangle]
pub extern "C" fn kyfrog_secret_key_bytes() -> usize {
    REFERENCE.derive_sizes().unwrap().sk_bytes
}

#[no_mangle]
pub extern "C" fn kyfrog_ciphertext_bytes() -> usize {
    REFERENCE.derive_sizes().unwrap().ct_bytes
}

#[no_mangle]
pub extern "C" fn kyfrog_shared_key_bytes() -> usize {
    SHARED_KEY_BYTES
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn kyfrog_status_string(status: KyfrogStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        KyfrogStatus::Ok => b"ok\0",
        KyfrogStatus::NullPointer => b"null pointer argument\0",
        KyfrogStatus::BufferSize => b"buffer has the wrong size\0",
        KyfrogStatus::InvalidKey => b"invalid key encoding\0",
        KyfrogStatus::Entropy => b"entropy source unavailable\0",
        KyfrogStatus::Internal => b"internal error\0",
    };
    s.as_ptr().cast()
}

fn keygen_with(drbg: &mut Drbg, pk_out: *mut *mut KyfrogPublicKey, sk_out: *mut *mut KyfrogSecretKey) -> KyfrogStatus {
    if pk_out.is_null() || sk_out.is_null() {
        return KyfrogStatus::NullPointer;
    }
    match kem().keygen(drbg) {
        Ok((pk, sk)) => {
            // SAFETY: both out-pointers checked non-null above.
            unsafe {
                *pk_out = Box::into_raw(Box::new(KyfrogPublicKey(pk)));
                *sk_out = Box::into_raw(Box::new(KyfrogSecretKey(sk)));
            }
            KyfrogStatus::Ok
        }
        Err(_) => KyfrogStatus::Internal,
    }
}

/// Generate a key pair from operating-system entropy.
///
/// # Safety
/// `pk_out` and `sk_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_keygen(pk_out: *mut *mut KyfrogPublicKey, sk_out: *mut *mut KyfrogSecretKey) -> KyfrogStatus {
    guard(|| match Drbg::from_os_entropy() {
        Ok(mut d) => keygen_with(&mut d, pk_out, sk_out),
        Err(_) => KyfrogStatus::Entropy,
    })
}

/// Deterministic key generation from a 48-byte DRBG seed. For tests only.
///
/// # Safety
/// `seed` must point to 48 readable bytes; `pk_out` and `sk_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_keygen_from_seed(
    seed: *const u8,
    pk_out: *mut *mut KyfrogPublicKey,
    sk_out: *mut *mut KyfrogSecretKey,
) -> KyfrogStatus {
    guard(|| match seeded(seed) {
        Some(mut d) => keygen_with(&mut d, pk_out, sk_out),
        None => KyfrogStatus::NullPointer,
    })
}

/// # Safety
/// `pk` must be a live handle; `out` must be valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_public_key_serialize(pk: *const KyfrogPublicKey, out: *mut u8, out_len: usize) -> KyfrogStatus {
    guard(|| match pk.as_ref() {
        Some(pk) => write_exact(out, out_len, &pk.0.to_bytes()),
        None => KyfrogStatus::NullPointer,
    })
}

/// # Safety
/// `data` must be valid for `len` reads; `pk_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_public_key_deserialize(
    data: *const u8,
    len: usize,
    pk_out: *mut *mut KyfrogPublicKey,
) -> KyfrogStatus {
    guard(|| {
        let Some(bytes) = input(data, len) else {
            return KyfrogStatus::NullPointer;
        };
        if pk_out.is_null() {
            return KyfrogStatus::NullPointer;
        }
        match PublicKey::from_bytes(&REFERENCE, bytes) {
            Ok(pk) => {
                *pk_out = Box::into_raw(Box::new(KyfrogPublicKey(pk)));
                KyfrogStatus::Ok
            }
            Err(_) => KyfrogStatus::InvalidKey,
        }
    })
}

/// # Safety
/// `sk` must be a live handle; `out` must be valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_secret_key_serialize(sk: *const KyfrogSecretKey, out: *mut u8, out_len: usize) -> KyfrogStatus {
    guard(|| match sk.as_ref() {
        Some(sk) => {
            let mut bytes = sk.0.to_bytes();
            let status = write_exact(out, out_len, &bytes);
            bytes.zeroize();
            status
        }
        None => KyfrogStatus::NullPointer,
    })
}

/// # Safety
/// `data` must be valid for `len` reads; `sk_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_secret_key_deserialize(
    data: *const u8,
    len: usize,
    sk_out: *mut *mut KyfrogSecretKey,
) -> KyfrogStatus {
    guard(|| {
        let Some(bytes) = input(data, len) else {
            return KyfrogStatus::NullPointer;
        };
        if sk_out.is_null() {
            return KyfrogStatus::NullPointer;
        }
        match SecretKey::from_bytes(&REFERENCE, bytes) {
            Ok(sk) => {
                *sk_out = Box::into_raw(Box::new(KyfrogSecretKey(sk)));
                KyfrogStatus::Ok
            }
            Err(_) => KyfrogStatus::InvalidKey,
        }
    })
}

unsafe fn encap_with(
    drbg: &mut Drbg,
    pk: *const KyfrogPublicKey,
    ct_out: *mut u8,
    ct_len: usize,
    key_out: *mut u8,
) -> KyfrogStatus {
    let Some(pk) = pk.as_ref() else {
        return KyfrogStatus::NullPointer;
    };
    if ct_out.is_null() || key_out.is_null() {
        return KyfrogStatus::NullPointer;
    }
    if ct_len != kyfrog_ciphertext_bytes() {
        return KyfrogStatus::BufferSize;
    }
    match kem().encap(&pk.0, drbg) {
        Ok((ct, key)) => {
            ptr::copy_nonoverlapping(ct.as_ptr(), ct_out, ct.len());
            ptr::copy_nonoverlapping(key.as_bytes().as_ptr(), key_out, SHARED_KEY_BYTES);
            KyfrogStatus::Ok
        }
        Err(_) => KyfrogStatus::Internal,
    }
}

/// Encapsulate a fresh key. `ct_len` must equal `kyfrog_ciphertext_bytes()`;
/// `key_out` receives 32 bytes.
///
/// # Safety
/// `pk` must be a live handle; the output buffers must be valid for writes of the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_encap(
    pk: *const KyfrogPublicKey,
    ct_out: *mut u8,
    ct_len: usize,
    key_out: *mut u8,
) -> KyfrogStatus {
    guard(|| match Drbg::from_os_entropy() {
        Ok(mut d) => encap_with(&mut d, pk, ct_out, ct_len, key_out),
        Err(_) => KyfrogStatus::Entropy,
    })
}

/// Deterministic encapsulation from a 48-byte DRBG seed. For tests only.
///
/// # Safety
/// As [`kyfrog_encap`], and `seed` must point to 48 readable bytes.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_encap_from_seed(
    seed: *const u8,
    pk: *const KyfrogPublicKey,
    ct_out: *mut u8,
    ct_len: usize,
    key_out: *mut u8,
) -> KyfrogStatus {
    guard(|| match seeded(seed) {
        Some(mut d) => encap_with(&mut d, pk, ct_out, ct_len, key_out),
        None => KyfrogStatus::NullPointer,
    })
}

/// Decapsulate `ct`. Malformed or forged ciphertexts of any length still
/// return `KYFROG_STATUS_OK` with the implicit-rejection key.
///
/// # Safety
/// `sk` and `pk` must be live handles; `ct` must be valid for `ct_len` reads;
/// `key_out` must be valid for 32 writes.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_decap(
    sk: *const KyfrogSecretKey,
    pk: *const KyfrogPublicKey,
    ct: *const u8,
    ct_len: usize,
    key_out: *mut u8,
) -> KyfrogStatus {
    guard(|| {
        let (Some(sk), Some(pk), Some(ct)) = (sk.as_ref(), pk.as_ref(), input(ct, ct_len)) else {
            return KyfrogStatus::NullPointer;
        };
        if key_out.is_null() {
            return KyfrogStatus::NullPointer;
        }
        match kem().decap(&sk.0, &pk.0, ct) {
            Ok(key) => {
                ptr::copy_nonoverlapping(key.as_bytes().as_ptr(), key_out, SHARED_KEY_BYTES);
                KyfrogStatus::Ok
            }
            Err(_) => KyfrogStatus::Internal,
        }
    })
}

/// Free a public key. Null is ignored.
///
/// # Safety
/// `pk` must be null or a handle from this library not already freed.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_public_key_free(pk: *mut KyfrogPublicKey) {
    if !pk.is_null() {
        drop(Box::from_raw(pk));
    }
}

/// Free and wipe a secret key. Null is ignored.
///
/// # Safety
/// `sk` must be null or a handle from this library not already freed.
#[no_mangle]
pub unsafe extern "C" fn kyfrog_secret_key_free(sk: *mut KyfrogSecretKey) {
    if !sk.is_null() {
        drop(Box::from_raw(sk));
    }
}
