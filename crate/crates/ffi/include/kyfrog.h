#ifndef KYFROG_H
#define KYFROG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KyfrogStatus {
  KYFROG_STATUS_OK = 0,
  KYFROG_STATUS_NULL_POINTER = 1,
  KYFROG_STATUS_BUFFER_SIZE = 2,
  KYFROG_STATUS_INVALID_KEY = 3,
  KYFROG_STATUS_ENTROPY = 4,
  KYFROG_STATUS_INTERNAL = 5,
} KyfrogStatus;

/**
 * Opaque public key.
 */
typedef struct KyfrogPublicKey KyfrogPublicKey;

/**
 * Opaque secret key. Wiped when freed.
 */
typedef struct KyfrogSecretKey KyfrogSecretKey;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Encoded public-key length (seed plus packed `t`).
 */
size_t kyfrog_public_key_bytes(void);

size_t kyfrog_secret_key_bytes(void);

size_t kyfrog_ciphertext_bytes(void);

size_t kyfrog_shared_key_bytes(void);

/**
 * Static, NUL-terminated description of a status code.
 */
const char *kyfrog_status_string(enum KyfrogStatus status);

/**
 * Generate a key pair from operating-system entropy.
 *
 * # Safety
 * `pk_out` and `sk_out` must be valid for writes.
 */
enum KyfrogStatus kyfrog_keygen(struct KyfrogPublicKey **pk_out, struct KyfrogSecretKey **sk_out);

/**
 * Deterministic key generation from a 48-byte DRBG seed. For tests only.
 *
 * # Safety
 * `seed` must point to 48 readable bytes; `pk_out` and `sk_out` must be valid for writes.
 */
enum KyfrogStatus kyfrog_keygen_from_seed(const uint8_t *seed,
                                          struct KyfrogPublicKey **pk_out,
                                          struct KyfrogSecretKey **sk_out);

/**
 * # Safety
 * `pk` must be a live handle; `out` must be valid for `out_len` writes.
 */
enum KyfrogStatus kyfrog_public_key_serialize(const struct KyfrogPublicKey *pk,
                                              uint8_t *out,
                                              size_t out_len);

/**
 * # Safety
 * `data` must be valid for `len` reads; `pk_out` must be valid for writes.
 */
enum KyfrogStatus kyfrog_public_key_deserialize(const uint8_t *data,
                                                size_t len,
                                                struct KyfrogPublicKey **pk_out);

/**
 * # Safety
 * `sk` must be a live handle; `out` must be valid for `out_len` writes.
 */
enum KyfrogStatus kyfrog_secret_key_serialize(const struct KyfrogSecretKey *sk,
                                              uint8_t *out,
                                              size_t out_len);

/**
 * # Safety
 * `data` must be valid for `len` reads; `sk_out` must be valid for writes.
 */
enum KyfrogStatus kyfrog_secret_key_deserialize(const uint8_t *data,
                                                size_t len,
                                                struct KyfrogSecretKey **sk_out);

/**
 * Encapsulate a fresh key. `ct_len` must equal `kyfrog_ciphertext_bytes()`;
 * `key_out` receives 32 bytes.
 *
 * # Safety
 * `pk` must be a live handle; the output buffers must be valid for writes of the stated sizes.
 */
enum KyfrogStatus kyfrog_encap(const struct KyfrogPublicKey *pk,
                               uint8_t *ct_out,
                               size_t ct_len,
                               uint8_t *key_out);

/**
 * Deterministic encapsulation from a 48-byte DRBG seed. For tests only.
 *
 * # Safety
 * As [`kyfrog_encap`], and `seed` must point to 48 readable bytes.
 */
enum KyfrogStatus kyfrog_encap_from_seed(const uint8_t *seed,
                                         const struct KyfrogPublicKey *pk,
                                         uint8_t *ct_out,
                                         size_t ct_len,
                                         uint8_t *key_out);

/**
 * Decapsulate `ct`. Malformed or forged ciphertexts of any length still
 * return `KYFROG_STATUS_OK` with the implicit-rejection key.
 *
 * # Safety
 * `sk` and `pk` must be live handles; `ct` must be valid for `ct_len` reads;
 * `key_out` must be valid for 32 writes.
 */
enum KyfrogStatus kyfrog_decap(const struct KyfrogSecretKey *sk,
                               const struct KyfrogPublicKey *pk,
                               const uint8_t *ct,
                               size_t ct_len,
                               uint8_t *key_out);

/**
 * Free a public key. Null is ignored.
 *
 * # Safety
 * `pk` must be null or a handle from this library not already freed.
 */
void kyfrog_public_key_free(struct KyfrogPublicKey *pk);

/**
 * Free and wipe a secret key. Null is ignored.
 *
 * # Safety
 * `sk` must be null or a handle from this library not already freed.
 */
void kyfrog_secret_key_free(struct KyfrogSecretKey *sk);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KYFROG_H */
