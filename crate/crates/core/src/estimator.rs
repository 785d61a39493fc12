//! Security estimates: a built-in primal-uSVP (core-SVP) approximation and a
//! reader for records produced by an external estimator.
//!
//! # Record format
//!
//! One record per line, whitespace-separated `key=value` fields:
//!
//! ```text
//! n=1024 k=1 q=1103 sigma_s=1.4 sigma_e=1.4 classical_bits=325.3 quantum_bits=325.3 estimator_version=lattice-estimator@unknown
//! ```
//!
//! All eight keys are required, in any order. Blank lines and lines starting
//! with `#` are ignored. `estimator_version` may not contain whitespace.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use crate::error::EstimatorError;
use crate::params::ParameterSet;

/// Classical core-SVP cost per unit of blocksize.
pub const CLASSICAL_PER_BETA: f64 = 0.292;
/// Quantum core-SVP cost per unit of blocksize.
pub const QUANTUM_PER_BETA: f64 = 0.265;
pub const MIN_BETA: u32 = 2;
pub const MAX_BETA: u32 = 1500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimateSource {
    BuiltinCoreSvp,
    ExternalBridge,
    Fixture,
}

impl EstimateSource {
    pub fn name(self) -> &'static str {
        match self {
            EstimateSource::BuiltinCoreSvp => "builtin_core_svp",
            EstimateSource::ExternalBridge => "external_bridge",
            EstimateSource::Fixture => "fixture",
        }
    }
}

impl fmt::Display for EstimateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecurityEstimate {
    pub classical_bits: f64,
    pub quantum_bits: f64,
    pub source: EstimateSource,
    /// Blocksize found by the builtin search; `None` for records and for
    /// beyond-scale results.
    pub beta: Option<u32>,
}

impl SecurityEstimate {
    /// A builtin search that found no blocksize up to [`MAX_BETA`]. Both bit
    /// counts are infinite so the result clears every threshold.
    pub fn beyond_scale() -> Self {
        SecurityEstimate {
            classical_bits: f64::INFINITY,
            quantum_bits: f64::INFINITY,
            source: EstimateSource::BuiltinCoreSvp,
            beta: None,
        }
    }

    pub fn is_beyond_scale(&self) -> bool {
        self.classical_bits.is_infinite()
    }

    fn from_beta(beta: u32) -> Self {
        SecurityEstimate {
            classical_bits: CLASSICAL_PER_BETA * f64::from(beta),
            quantum_bits: QUANTUM_PER_BETA * f64::from(beta),
            source: EstimateSource::BuiltinCoreSvp,
            beta: Some(beta),
        }
    }
}

/// Root-Hermite factor reached by BKZ with blocksize `beta`.
///
/// Uses the asymptotic formula from `beta = 40` up and a straight line from
/// `1.0219` at `beta = 2` below that, where the formula is not meaningful.
pub fn root_hermite_factor(beta: u32) -> f64 {
    const SMALL_BETA_DELTA: f64 = 1.0219;
    fn asymptotic(b: f64) -> f64 {
        use std::f64::consts::{E, PI};
        ((b / (2.0 * PI * E)) * (PI * b).powf(1.0 / b)).powf(1.0 / (2.0 * (b - 1.0)))
    }
    if beta >= 40 {
        asymptotic(f64::from(beta))
    } else {
        let t = (f64::from(beta) - 2.0) / 38.0;
        SMALL_BETA_DELTA + t * (asymptotic(40.0) - SMALL_BETA_DELTA)
    }
}

/// Whether BKZ-`beta` recovers the short vector using `m` samples:
/// `sigma_e * sqrt(beta) <= delta^(2 beta - d - 1) * q^(m / d)` with `d = m + n + 1`.
fn usvp_succeeds(n: usize, m: usize, beta: u32, ln_sigma: f64, ln_q: f64, ln_delta: f64) -> bool {
    let d = (m + n + 1) as f64;
    let lhs = ln_sigma + 0.5 * f64::from(beta).ln();
    let rhs = (2.0 * f64::from(beta) - d - 1.0) * ln_delta + (m as f64 / d) * ln_q;
    lhs <= rhs
}

/// Smallest blocksize in `[MIN_BETA, MAX_BETA]` for which some sample count
/// `1 <= m <= n` satisfies the primal-uSVP success condition.
pub fn primal_usvp_beta(p: &ParameterSet) -> Option<u32> {
    let ln_sigma = p.sigma_e.ln();
    let ln_q = f64::from(p.q).ln();
    (MIN_BETA..=MAX_BETA).find(|&beta| {
        let ln_delta = root_hermite_factor(beta).ln();
        (1..=p.n).any(|m| usvp_succeeds(p.n, m, beta, ln_sigma, ln_q, ln_delta))
    })
}

/// Builtin core-SVP estimate. Deterministic; `0.292 * beta` classical and
/// `0.265 * beta` quantum bits.
pub fn estimate_builtin(p: &ParameterSet) -> SecurityEstimate {
    match primal_usvp_beta(p) {
        Some(beta) => SecurityEstimate::from_beta(beta),
        None => SecurityEstimate::beyond_scale(),
    }
}

/// One externally produced estimate together with the parameters it is for.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRecord {
    pub params: ParameterSet,
    pub classical_bits: f64,
    pub quantum_bits: f64,
    pub estimator_version: String,
}

const RECORD_KEYS: [&str; 8] = [
    "n",
    "k",
    "q",
    "sigma_s",
    "sigma_e",
    "classical_bits",
    "quantum_bits",
    "estimator_version",
];

/// Canonical text of a parameter set as it appears in records.
pub fn fingerprint(p: &ParameterSet) -> String {
    format!("n={} k={} q={} sigma_s={} sigma_e={}", p.n, p.k, p.q, p.sigma_s, p.sigma_e)
}

impl EstimateRecord {
    pub fn fingerprint(&self) -> String {
        fingerprint(&self.params)
    }

    pub fn to_line(&self) -> String {
        format!(
            "{} classical_bits={} quantum_bits={} estimator_version={}",
            self.fingerprint(),
            self.classical_bits,
            self.quantum_bits,
            self.estimator_version
        )
    }

    /// Parse one record line. `line_no` is only used in errors.
    pub fn parse_line(line: &str, line_no: usize) -> Result<Self, EstimatorError> {
        let err = |reason: String| EstimatorError::Parse { line: line_no, reason };
        let mut fields = HashMap::new();
        for tok in line.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| err(format!("'{tok}' is not key=value")))?;
            if !RECORD_KEYS.contains(&k) {
                return Err(err(format!("unknown key '{k}'")));
            }
            if fields.insert(k, v).is_some() {
                return Err(err(format!("duplicate key '{k}'")));
            }
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| err(format!("missing key '{k}'")));
        fn num<T: std::str::FromStr>(v: &str, k: &str, line: usize) -> Result<T, EstimatorError> {
            v.parse().map_err(|_| EstimatorError::Parse {
                line,
                reason: format!("bad value '{v}' for {k}"),
            })
        }
        let params = ParameterSet {
            n: num(get("n")?, "n", line_no)?,
            k: num(get("k")?, "k", line_no)?,
            q: num(get("q")?, "q", line_no)?,
            sigma_s: num(get("sigma_s")?, "sigma_s", line_no)?,
            sigma_e: num(get("sigma_e")?, "sigma_e", line_no)?,
        };
        let classical_bits: f64 = num(get("classical_bits")?, "classical_bits", line_no)?;
        let quantum_bits: f64 = num(get("quantum_bits")?, "quantum_bits", line_no)?;
        if !(classical_bits > 0.0 && quantum_bits > 0.0 && quantum_bits <= classical_bits) {
            return Err(err("need 0 < quantum_bits <= classical_bits".into()));
        }
        Ok(EstimateRecord {
            params,
            classical_bits,
            quantum_bits,
            estimator_version: get("estimator_version")?.to_string(),
        })
    }
}

/// Parse every record in `text`.
pub fn parse_records(text: &str) -> Result<Vec<EstimateRecord>, EstimatorError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| EstimateRecord::parse_line(l, i + 1))
        .collect()
}

/// Accept `record` as the estimate for `p` if its fingerprint matches exactly.
pub fn estimate_external(p: &ParameterSet, record: &EstimateRecord) -> Result<SecurityEstimate, EstimatorError> {
    if record.params != *p {
        return Err(EstimatorError::FingerprintMismatch {
            expected: fingerprint(p),
            found: record.fingerprint(),
        });
    }
    Ok(SecurityEstimate {
        classical_bits: record.classical_bits,
        quantum_bits: record.quantum_bits,
        source: EstimateSource::ExternalBridge,
        beta: None,
    })
}

/// A set of stored records looked up by parameter set.
#[derive(Clone, Debug, Default)]
pub struct FixtureTable {
    records: Vec<EstimateRecord>,
}

impl FixtureTable {
    pub fn new(records: Vec<EstimateRecord>) -> Self {
        FixtureTable { records }
    }

    pub fn parse(text: &str) -> Result<Self, EstimatorError> {
        parse_records(text).map(Self::new)
    }

    pub fn load(path: &Path) -> std::io::Result<Result<Self, EstimatorError>> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn records(&self) -> &[EstimateRecord] {
        &self.records
    }

    pub fn lookup(&self, p: &ParameterSet) -> Option<SecurityEstimate> {
        let rec = self.records.iter().find(|r| r.params == *p)?;
        let mut est = estimate_external(p, rec).ok()?;
        est.source = EstimateSource::Fixture;
        Some(est)
    }
}

/// Where the hunter gets its security numbers.
#[derive(Clone, Debug)]
pub enum Oracle {
    Builtin,
    Fixture(FixtureTable),
}

impl Oracle {
    /// `None` when the oracle has nothing for `p`.
    pub fn estimate(&self, p: &ParameterSet) -> Option<SecurityEstimate> {
        match self {
            Oracle::Builtin => Some(estimate_builtin(p)),
            Oracle::Fixture(t) => t.lookup(p),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Oracle::Builtin => "builtin",
            Oracle::Fixture(_) => "fixture",
        }
    }
}
