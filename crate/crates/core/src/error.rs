use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("dimension n must be at least 1")]
    ZeroDimension,
    #[error("module rank k = {0} is unsupported (only k = 1)")]
    UnsupportedRank(usize),
    #[error("modulus q = {0} is not a prime >= 5")]
    ModulusNotPrime(u32),
    #[error("{name} = {value} must be finite and positive")]
    BadSigma { name: &'static str, value: f64 },
    #[error("parameter set {0} is outside the range supported by the KEM")]
    UnsupportedByKem(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RngError {
    #[error("operating-system entropy source unavailable: {0}")]
    EntropyUnavailable(String),
    #[error("byte stream exhausted")]
    StreamExhausted,
    #[error("matrix expansion exceeded the rejection-sampling safety cap")]
    RejectionCapExceeded,
}

/// Malformed key encodings and key files.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyFormatError {
    #[error("expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("bad key file header")]
    Header,
    #[error("coefficient {index} out of range")]
    Coefficient { index: usize },
}

/// Reasons a byte string fails to parse as a KEM ciphertext.
///
/// Decapsulation never reports these; every class maps to implicit rejection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CtFormatError {
    #[error("expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("bad magic")]
    Magic,
    #[error("unsupported version {0}")]
    Version(u8),
    #[error("dimension field {0} does not match the key")]
    Dimension(u32),
    #[error("bit-count field {0} is not 256")]
    BitCount(u32),
    #[error("coefficient word at byte offset {offset} is not below q")]
    Coefficient { offset: usize },
}

#[derive(Debug, Error)]
pub enum KemError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Rng(#[from] RngError),
}

/// The single failure signal of hybrid decryption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("authentication failure")]
pub struct AuthenticationFailure;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("record fingerprint {found} does not match parameter set {expected}")]
    FingerprintMismatch { expected: String, found: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum HuntError {
    #[error("invalid hunt configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("run log line {line}: {reason}")]
pub struct LogParseError {
    pub line: usize,
    pub reason: String,
}
