use std::collections::HashSet;

use kyfrog::hybrid::*;
use kyfrog::kem::Kem;
use kyfrog::rng::Drbg;
use kyfrog::{AuthenticationFailure, ParameterSet};

fn small_kem() -> Kem {
    Kem::new(&ParameterSet::new(48, 1, 1103, 1.4, 1.4).unwrap()).unwrap()
}

#[test]
fn roundtrip_various_sizes() {
    let kem = small_kem();
    let mut d = Drbg::from_seed(&[5; 48]);
    let (pk, sk) = kem.keygen(&mut d).unwrap();
    for len in [0usize, 1, 15, 16, 17, 4096, 100_000] {
        let msg: Vec<u8> = (0..len).map(|i| (i * 31 % 251) as u8).collect();
        let c = encrypt_file(&kem, &pk, &msg, &mut d).unwrap();
        assert_eq!(c.len(), HybridContainer::encoded_len(kem.ciphertext_bytes(), len));
        assert_eq!(decrypt_file(&kem, &sk, &pk, &c).unwrap(), msg);
    }
}

#[test]
fn container_layout() {
    let kem = small_kem();
    let mut d = Drbg::from_seed(&[6; 48]);
    let (pk, _) = kem.keygen(&mut d).unwrap();
    let c = encrypt_file(&kem, &pk, b"abc", &mut d).unwrap();
    assert_eq!(&c[..4], b"KYFH");
    assert_eq!(c[4], 1);
    let len = u32::from_le_bytes(c[5..9].try_into().unwrap()) as usize;
    assert_eq!(len, kem.ciphertext_bytes());
    assert_eq!(&c[9..13], b"KYFG");
    let parsed = HybridContainer::parse(&c).unwrap();
    assert_eq!(parsed.payload.len(), 3);
    assert_eq!(parsed.to_bytes(), c);
}

#[test]
fn every_region_fails_the_same_way() {
    let kem = small_kem();
    let mut d = Drbg::from_seed(&[7; 48]);
    let (pk, sk) = kem.keygen(&mut d).unwrap();
    let c = encrypt_file(&kem, &pk, b"attack at dawn", &mut d).unwrap();
    let ct_len = kem.ciphertext_bytes();
    let regions = [
        0,                  // magic
        4,                  // version
        5,                  // kem_ct_len
        9 + 20,             // kem_ct
        9 + ct_len,         // nonce
        9 + ct_len + 12,    // tag
        9 + ct_len + 28,    // payload
    ];
    for pos in regions {
        let mut bad = c.clone();
        bad[pos] ^= 0x01;
        assert_eq!(decrypt_file(&kem, &sk, &pk, &bad), Err(AuthenticationFailure), "byte {pos}");
    }
    for cut in [0, 3, 9, 9 + ct_len, c.len() - 1] {
        assert_eq!(decrypt_file(&kem, &sk, &pk, &c[..cut]), Err(AuthenticationFailure), "cut {cut}");
    }
    let mut longer = c.clone();
    longer.push(0);
    assert_eq!(decrypt_file(&kem, &sk, &pk, &longer), Err(AuthenticationFailure));
}

#[test]
fn length_field_is_authenticated() {
    // A container whose kem_ct_len and embedded ciphertext agree with each
    // other but not with what was encrypted must not decrypt.
    let kem = small_kem();
    let mut d = Drbg::from_seed(&[8; 48]);
    let (pk, sk) = kem.keygen(&mut d).unwrap();
    let c = encrypt_file(&kem, &pk, b"payload", &mut d).unwrap();
    let mut parsed = HybridContainer::parse(&c).unwrap();
    parsed.kem_ct.push(0);
    assert_eq!(decrypt_file(&kem, &sk, &pk, &parsed.to_bytes()), Err(AuthenticationFailure));
}

#[test]
fn nonces_do_not_repeat() {
    let kem = small_kem();
    let mut d = Drbg::from_seed(&[9; 48]);
    let (pk, _) = kem.keygen(&mut d).unwrap();
    let ct_len = kem.ciphertext_bytes();
    let mut seen = HashSet::new();
    for _ in 0..2000 {
        let c = encrypt_file(&kem, &pk, &[], &mut d).unwrap();
        assert!(seen.insert(c[9 + ct_len..9 + ct_len + 12].to_vec()));
    }
}
