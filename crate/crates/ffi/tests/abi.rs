use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use kyfrog_ffi::*;

fn keypair(seed: u8) -> (*mut KyfrogPublicKey, *mut KyfrogSecretKey) {
    let (mut pk, mut sk) = (ptr::null_mut(), ptr::null_mut());
    let s = unsafe { kyfrog_keygen_from_seed([seed; 48].as_ptr(), &mut pk, &mut sk) };
    assert_eq!(s, KyfrogStatus::Ok);
    (pk, sk)
}

#[test]
fn sizes() {
    assert_eq!(kyfrog_public_key_bytes(), 1440);
    assert_eq!(kyfrog_secret_key_bytes(), 2048);
    assert_eq!(kyfrog_ciphertext_bytes(), 524_813);
    assert_eq!(kyfrog_shared_key_bytes(), 32);
}

#[test]
fn encap_decap_and_rejection() {
    let (pk, sk) = keypair(1);
    let mut ct = vec![0u8; kyfrog_ciphertext_bytes()];
    let (mut k1, mut k2, mut k3) = ([0u8; 32], [0u8; 32], [0u8; 32]);
    unsafe {
        assert_eq!(kyfrog_encap_from_seed([2; 48].as_ptr(), pk, ct.as_mut_ptr(), ct.len(), k1.as_mut_ptr()), KyfrogStatus::Ok);
        assert_eq!(kyfrog_decap(sk, pk, ct.as_ptr(), ct.len(), k2.as_mut_ptr()), KyfrogStatus::Ok);
        // truncated input still succeeds, with a different key
        assert_eq!(kyfrog_decap(sk, pk, ct.as_ptr(), 100, k3.as_mut_ptr()), KyfrogStatus::Ok);
        assert_eq!(kyfrog_decap(sk, pk, ptr::null(), 0, k3.as_mut_ptr()), KyfrogStatus::Ok);
        kyfrog_public_key_free(pk);
        kyfrog_secret_key_free(sk);
    }
    // matches the library directly
    let kem = kyfrog::kem::Kem::reference();
    let mut d = kyfrog::rng::Drbg::from_seed(&[1; 48]);
    let (lpk, lsk) = kem.keygen(&mut d).unwrap();
    let mut d = kyfrog::rng::Drbg::from_seed(&[2; 48]);
    let (lct, lk) = kem.encap(&lpk, &mut d).unwrap();
    assert_eq!(lct, ct);
    assert_eq!(lk.as_bytes(), &k1);
    assert_eq!(kem.decap(&lsk, &lpk, &ct).unwrap().as_bytes(), &k2);
    assert_ne!(k3, k2);
}

#[test]
fn serialization_roundtrip_and_errors() {
    let (pk, sk) = keypair(3);
    let mut pk_bytes = vec![0u8; kyfrog_public_key_bytes()];
    let mut sk_bytes = vec![0u8; kyfrog_secret_key_bytes()];
    unsafe {
        assert_eq!(kyfrog_public_key_serialize(pk, pk_bytes.as_mut_ptr(), pk_bytes.len()), KyfrogStatus::Ok);
        assert_eq!(kyfrog_secret_key_serialize(sk, sk_bytes.as_mut_ptr(), sk_bytes.len()), KyfrogStatus::Ok);
        assert_eq!(
            kyfrog_public_key_serialize(pk, pk_bytes.as_mut_ptr(), pk_bytes.len() - 1),
            KyfrogStatus::BufferSize
        );

        let (mut pk2, mut sk2) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(kyfrog_public_key_deserialize(pk_bytes.as_ptr(), pk_bytes.len(), &mut pk2), KyfrogStatus::Ok);
        assert_eq!(kyfrog_secret_key_deserialize(sk_bytes.as_ptr(), sk_bytes.len(), &mut sk2), KyfrogStatus::Ok);
        let mut again = vec![0u8; pk_bytes.len()];
        assert_eq!(kyfrog_public_key_serialize(pk2, again.as_mut_ptr(), again.len()), KyfrogStatus::Ok);
        assert_eq!(again, pk_bytes);

        let mut bad = ptr::null_mut();
        assert_eq!(kyfrog_public_key_deserialize(pk_bytes.as_ptr(), 10, &mut bad), KyfrogStatus::InvalidKey);
        let mut junk_sk = sk_bytes.clone();
        junk_sk[0..2].copy_from_slice(&500u16.to_le_bytes());
        let mut bad_sk = ptr::null_mut();
        assert_eq!(kyfrog_secret_key_deserialize(junk_sk.as_ptr(), junk_sk.len(), &mut bad_sk), KyfrogStatus::InvalidKey);
        assert!(bad.is_null() && bad_sk.is_null());
        assert_eq!(kyfrog_public_key_deserialize(ptr::null(), 5, &mut bad), KyfrogStatus::NullPointer);

        for h in [pk, pk2] {
            kyfrog_public_key_free(h);
        }
        for h in [sk, sk2] {
            kyfrog_secret_key_free(h);
        }
        kyfrog_public_key_free(ptr::null_mut());
    }
}

#[test]
fn null_and_size_checks() {
    let (pk, sk) = keypair(4);
    let mut key = [0u8; 32];
    let mut small = vec![0u8; 16];
    unsafe {
        assert_eq!(kyfrog_encap(ptr::null(), small.as_mut_ptr(), 16, key.as_mut_ptr()), KyfrogStatus::NullPointer);
        assert_eq!(kyfrog_encap(pk, small.as_mut_ptr(), 16, key.as_mut_ptr()), KyfrogStatus::BufferSize);
        assert_eq!(kyfrog_decap(sk, ptr::null(), small.as_ptr(), 16, key.as_mut_ptr()), KyfrogStatus::NullPointer);
        assert_eq!(kyfrog_keygen(ptr::null_mut(), ptr::null_mut()), KyfrogStatus::NullPointer);
        let msg = CStr::from_ptr(kyfrog_status_string(KyfrogStatus::BufferSize));
        assert_eq!(msg.to_str().unwrap(), "buffer has the wrong size");
        kyfrog_public_key_free(pk);
        kyfrog_secret_key_free(sk);
    }
}

#[test]
fn header_declares_every_export_and_compiles() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/kyfrog.h")).unwrap();
    for name in [
        "kyfrog_keygen(",
        "kyfrog_keygen_from_seed(",
        "kyfrog_encap(",
        "kyfrog_encap_from_seed(",
        "kyfrog_decap(",
        "kyfrog_public_key_serialize(",
        "kyfrog_public_key_deserialize(",
        "kyfrog_secret_key_serialize(",
        "kyfrog_secret_key_deserialize(",
        "kyfrog_public_key_free(",
        "kyfrog_secret_key_free(",
        "kyfrog_status_string(",
        "typedef struct KyfrogPublicKey KyfrogPublicKey;",
        "KYFROG_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(dir.join("include/kyfrog.h"))
        .output()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
