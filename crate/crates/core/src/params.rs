//! Parameter sets and the sizes derived from them.

use std::fmt;

use crate::error::ParamsError;

/// Number of message bits carried by one KEM ciphertext.
pub const MESSAGE_BITS: usize = 256;

/// Length of the ciphertext header: magic, version, `n`, bit count.
pub const CT_HEADER_BYTES: usize = 4 + 1 + 4 + 4;

/// Length of the matrix seed stored at the front of a public key.
pub const SEED_BYTES: usize = 32;

/// An LWE parameter set `(n, k, q, sigma_s, sigma_e)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParameterSet {
    pub n: usize,
    pub k: usize,
    pub q: u32,
    pub sigma_s: f64,
    pub sigma_e: f64,
}

/// The `(1024, 1, 1103, 1.4, 1.4)` instance.
pub const REFERENCE: ParameterSet = ParameterSet {
    n: 1024,
    k: 1,
    q: 1103,
    sigma_s: 1.4,
    sigma_e: 1.4,
};

impl ParameterSet {
    pub const fn reference() -> Self {
        REFERENCE
    }

    /// Build and validate a parameter set.
    pub fn new(n: usize, k: usize, q: u32, sigma_s: f64, sigma_e: f64) -> Result<Self, ParamsError> {
        let p = ParameterSet {
            n,
            k,
            q,
            sigma_s,
            sigma_e,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.n == 0 {
            return Err(ParamsError::ZeroDimension);
        }
        if self.k != 1 {
            return Err(ParamsError::UnsupportedRank(self.k));
        }
        if self.q < 5 || !is_prime(u64::from(self.q)) {
            return Err(ParamsError::ModulusNotPrime(self.q));
        }
        for (name, s) in [("sigma_s", self.sigma_s), ("sigma_e", self.sigma_e)] {
            if !(s.is_finite() && s > 0.0) {
                return Err(ParamsError::BadSigma { name, value: s });
            }
        }
        Ok(())
    }

    /// `floor(q / 2)`, the encoding of a one bit.
    pub fn half_q(&self) -> u32 {
        self.q / 2
    }

    pub fn derive_sizes(&self) -> Result<DerivedSizes, ParamsError> {
        derive_sizes(self)
    }
}

impl fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(n={}, k={}, q={}, sigma_s={}, sigma_e={})",
            self.n, self.k, self.q, self.sigma_s, self.sigma_e
        )
    }
}

/// Sizes and constants that follow from a [`ParameterSet`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedSizes {
    pub bits_per_coeff: u32,
    pub pk_bytes: usize,
    pub sk_bytes: usize,
    pub ct_bytes: usize,
    /// `sigma_e / q`.
    pub alpha: f64,
}

impl DerivedSizes {
    /// `alpha` printed with 16 significant digits.
    pub fn alpha_string(&self) -> String {
        format_significant(self.alpha, 16)
    }
}

/// Compute the sizes implied by `p`.
pub fn derive_sizes(p: &ParameterSet) -> Result<DerivedSizes, ParamsError> {
    p.validate()?;
    let bits_per_coeff = bits_for(p.q);
    let packed_t = (p.n * bits_per_coeff as usize).div_ceil(8);
    Ok(DerivedSizes {
        bits_per_coeff,
        pk_bytes: SEED_BYTES + packed_t,
        sk_bytes: 2 * p.n,
        ct_bytes: CT_HEADER_BYTES + MESSAGE_BITS * (2 * p.n + 2),
        alpha: p.sigma_e / f64::from(p.q),
    })
}

/// `ceil(log2 q)`.
pub fn bits_for(q: u32) -> u32 {
    32 - (q - 1).leading_zeros()
}

fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin. The witness set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}
/// is exact for every 64-bit input, which covers the 32-bit moduli used here.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
