//! Parallel search over moduli `q` with security and failure filters, the
//! run-log format, and summaries over sets of run logs.
//!
//! # Run-log format
//!
//! A header block of `key=value` lines, then (unless `records=omitted`) the
//! CSV header `q,alpha,classical_bits,quantum_bits,log10_fail_per_ct,accepted`
//! and one row per `q` in the range. Lines starting with `#` are comments.
//! The `accepted` column is `yes`, `no`, `skipped` (q not prime) or
//! `unevaluated` (the oracle had no estimate); numeric cells are empty when
//! not computed. `elapsed_seconds` has at most three decimals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{HuntError, LogParseError};
use crate::estimator::Oracle;
use crate::failure::{failure_log10, ErrorModel};
use crate::params::{is_prime, ParameterSet, REFERENCE};

pub const CSV_HEADER: &str = "q,alpha,classical_bits,quantum_bits,log10_fail_per_ct,accepted";
pub const SUMMARY_CSV_HEADER: &str =
    "number_of_runs,total_candidates,avg_candidates_per_run,min_elapsed_seconds,max_elapsed_seconds,avg_elapsed_seconds";

/// Moduli handed to a worker at a time.
const CHUNK: u32 = 32;

#[derive(Clone, Debug)]
pub struct HuntConfig {
    pub n: usize,
    pub k: usize,
    pub sigma_s: f64,
    pub sigma_e: f64,
    pub q_lo: u32,
    pub q_hi: u32,
    pub min_classical_bits: f64,
    pub min_quantum_bits: f64,
    pub max_log10_fail: f64,
    pub threads: usize,
    pub oracle: Oracle,
    pub failure_model: ErrorModel,
}

impl HuntConfig {
    /// Reference dimension and noise, default thresholds, builtin oracle.
    pub fn new(q_lo: u32, q_hi: u32) -> Self {
        HuntConfig {
            n: REFERENCE.n,
            k: REFERENCE.k,
            sigma_s: REFERENCE.sigma_s,
            sigma_e: REFERENCE.sigma_e,
            q_lo,
            q_hi,
            min_classical_bits: 320.0,
            min_quantum_bits: 320.0,
            max_log10_fail: -150.0,
            threads: 1,
            oracle: Oracle::Builtin,
            failure_model: ErrorModel::Full,
        }
    }

    pub fn validate(&self) -> Result<(), HuntError> {
        if self.q_lo > self.q_hi {
            return Err(HuntError::Config(format!("q_lo {} > q_hi {}", self.q_lo, self.q_hi)));
        }
        if self.threads == 0 {
            return Err(HuntError::Config("threads must be at least 1".into()));
        }
        for (name, v) in [
            ("min_classical_bits", self.min_classical_bits),
            ("min_quantum_bits", self.min_quantum_bits),
            ("max_log10_fail", self.max_log10_fail),
        ] {
            if !v.is_finite() {
                return Err(HuntError::Config(format!("{name} must be finite")));
            }
        }
        // Any prime q is fine here, including 2 and 3, so only the other fields are checked.
        self.params_for(5).validate()?;
        Ok(())
    }

    /// The parameter set for modulus `q`. Not validated: the hunter also
    /// evaluates primes below 5.
    pub fn params_for(&self, q: u32) -> ParameterSet {
        ParameterSet {
            n: self.n,
            k: self.k,
            q,
            sigma_s: self.sigma_s,
            sigma_e: self.sigma_e,
        }
    }

    /// `accepted` as a function of the record's numbers.
    pub fn accepts(&self, classical: f64, quantum: f64, log10_fail: f64) -> bool {
        classical >= self.min_classical_bits && quantum >= self.min_quantum_bits && log10_fail <= self.max_log10_fail
    }

    fn header(&self) -> Vec<(String, String)> {
        vec![
            ("n".into(), self.n.to_string()),
            ("k".into(), self.k.to_string()),
            ("sigma_s".into(), self.sigma_s.to_string()),
            ("sigma_e".into(), self.sigma_e.to_string()),
            ("oracle".into(), self.oracle.name().into()),
            ("failure_model".into(), self.failure_model.name().into()),
            ("min_classical_bits".into(), self.min_classical_bits.to_string()),
            ("min_quantum_bits".into(), self.min_quantum_bits.to_string()),
            ("max_log10_fail".into(), self.max_log10_fail.to_string()),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CandidateStatus {
    Accepted,
    Rejected,
    /// `q` is not prime.
    Skipped,
    /// The oracle had no estimate for this `q`.
    Unevaluated,
}

impl CandidateStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateStatus::Accepted => "yes",
            CandidateStatus::Rejected => "no",
            CandidateStatus::Skipped => "skipped",
            CandidateStatus::Unevaluated => "unevaluated",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "yes" => CandidateStatus::Accepted,
            "no" => CandidateStatus::Rejected,
            "skipped" => CandidateStatus::Skipped,
            "unevaluated" => CandidateStatus::Unevaluated,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateRecord {
    pub q: u32,
    pub alpha: Option<f64>,
    pub classical_bits: Option<f64>,
    pub quantum_bits: Option<f64>,
    pub log10_fail_per_ct: Option<f64>,
    pub status: CandidateStatus,
}

impl CandidateRecord {
    pub fn accepted(&self) -> bool {
        self.status == CandidateStatus::Accepted
    }

    pub fn to_csv(&self) -> String {
        fn cell(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{}",
            self.q,
            cell(self.alpha),
            cell(self.classical_bits),
            cell(self.quantum_bits),
            cell(self.log10_fail_per_ct),
            self.status.as_str()
        )
    }

    fn parse_csv(line: &str, line_no: usize) -> Result<Self, LogParseError> {
        let err = |reason: String| LogParseError { line: line_no, reason };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(err(format!("expected 6 columns, found {}", cols.len())));
        }
        let opt = |s: &str| -> Result<Option<f64>, LogParseError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| err(format!("bad number '{s}'")))
            }
        };
        Ok(CandidateRecord {
            q: cols[0].parse().map_err(|_| err(format!("bad q '{}'", cols[0])))?,
            alpha: opt(cols[1])?,
            classical_bits: opt(cols[2])?,
            quantum_bits: opt(cols[3])?,
            log10_fail_per_ct: opt(cols[4])?,
            status: CandidateStatus::parse(cols[5]).ok_or_else(|| err(format!("bad status '{}'", cols[5])))?,
        })
    }
}

/// Evaluate one modulus.
pub fn evaluate(cfg: &HuntConfig, q: u32) -> CandidateRecord {
    if !is_prime(u64::from(q)) {
        return CandidateRecord {
            q,
            alpha: None,
            classical_bits: None,
            quantum_bits: None,
            log10_fail_per_ct: None,
            status: CandidateStatus::Skipped,
        };
    }
    let p = cfg.params_for(q);
    let fail = failure_log10(&p, cfg.failure_model).log10_per_ct;
    let est = cfg.oracle.estimate(&p);
    let status = match est {
        None => CandidateStatus::Unevaluated,
        Some(e) if cfg.accepts(e.classical_bits, e.quantum_bits, fail) => CandidateStatus::Accepted,
        Some(_) => CandidateStatus::Rejected,
    };
    CandidateRecord {
        q,
        alpha: Some(p.sigma_e / f64::from(q)),
        classical_bits: est.map(|e| e.classical_bits),
        quantum_bits: est.map(|e| e.quantum_bits),
        log10_fail_per_ct: Some(fail),
        status,
    }
}

/// One hunter run: metadata plus, when retained, every per-`q` record.
#[derive(Clone, Debug, PartialEq)]
pub struct HunterRunLog {
    pub cpu_model: String,
    pub compiler: String,
    pub threads: usize,
    pub q_lo: u32,
    pub q_hi: u32,
    pub elapsed_ms: u64,
    pub candidate_count: u64,
    /// Remaining header fields (the configuration echo), in file order.
    pub config: Vec<(String, String)>,
    pub records: Option<Vec<CandidateRecord>>,
}

/// Run the search described by `cfg`. Records come back sorted by `q`
/// whatever the thread count.
pub fn hunt(cfg: &HuntConfig) -> Result<HunterRunLog, HuntError> {
    cfg.validate()?;
    let start = Instant::now();
    let next = AtomicU32::new(0);
    let span = cfg.q_hi - cfg.q_lo;
    let done = Mutex::new(Vec::with_capacity(span as usize + 1));
    let chunks = span / CHUNK + 1;

    let worker = || {
        let mut local = Vec::new();
        loop {
            let c = next.fetch_add(1, Ordering::Relaxed);
            if c >= chunks {
                break;
            }
            let lo = cfg.q_lo + c * CHUNK;
            let hi = lo.saturating_add(CHUNK - 1).min(cfg.q_hi);
            local.extend((lo..=hi).map(|q| evaluate(cfg, q)));
        }
        done.lock().unwrap().append(&mut local);
    };
    std::thread::scope(|scope| {
        for _ in 1..cfg.threads {
            scope.spawn(&worker);
        }
        worker();
    });

    let mut records = done.into_inner().unwrap();
    records.sort_by_key(|r| r.q);
    let elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(HunterRunLog {
        cpu_model: cpu_model(),
        compiler: env!("KYFROG_RUSTC_VERSION").to_string(),
        threads: cfg.threads,
        q_lo: cfg.q_lo,
        q_hi: cfg.q_hi,
        elapsed_ms,
        candidate_count: records.iter().filter(|r| r.accepted()).count() as u64,
        config: cfg.header(),
        records: Some(records),
    })
}

fn cpu_model() -> String {
    std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        })
        .unwrap_or_else(|| std::env::consts::ARCH.to_string())
}

/// `ms` as seconds with exactly three decimals.
pub fn format_millis(ms: u64) -> String {
    format!("{}.{:03}", ms / 1000, ms % 1000)
}

/// Parse a non-negative decimal with at most three fractional digits into
/// milliseconds, exactly.
pub fn parse_millis(s: &str) -> Option<u64> {
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    if whole.is_empty() || frac.len() > 3 || !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let frac_ms: u64 = format!("{frac:0<3}").parse().ok()?;
    whole.parse::<u64>().ok()?.checked_mul(1000)?.checked_add(frac_ms)
}

impl HunterRunLog {
    pub fn elapsed_seconds(&self) -> String {
        format_millis(self.elapsed_ms)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "cpu_model={}", self.cpu_model);
        let _ = writeln!(out, "compiler={}", self.compiler);
        let _ = writeln!(out, "threads={}", self.threads);
        let _ = writeln!(out, "q_lo={}", self.q_lo);
        let _ = writeln!(out, "q_hi={}", self.q_hi);
        for (k, v) in &self.config {
            let _ = writeln!(out, "{k}={v}");
        }
        let _ = writeln!(out, "elapsed_seconds={}", self.elapsed_seconds());
        let _ = writeln!(out, "candidate_count={}", self.candidate_count);
        match &self.records {
            None => out.push_str("records=omitted\n"),
            Some(rs) => {
                out.push_str("records=included\n");
                out.push_str(CSV_HEADER);
                out.push('\n');
                for r in rs {
                    out.push_str(&r.to_csv());
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, LogParseError> {
        let mut header: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut order = Vec::new();
        let mut rows: Option<Vec<CandidateRecord>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rs) = rows.as_mut() {
                rs.push(CandidateRecord::parse_csv(line, line_no)?);
            } else if line == CSV_HEADER {
                rows = Some(Vec::new());
            } else {
                let (k, v) = line.split_once('=').ok_or(LogParseError {
                    line: line_no,
                    reason: "expected key=value".into(),
                })?;
                if header.insert(k.to_string(), (line_no, v.to_string())).is_some() {
                    return Err(LogParseError {
                        line: line_no,
                        reason: format!("duplicate key '{k}'"),
                    });
                }
                order.push(k.to_string());
            }
        }
        let last = text.lines().count();
        let mut take = |k: &str| {
            header.remove(k).ok_or(LogParseError {
                line: last,
                reason: format!("missing header key '{k}'"),
            })
        };
        fn num<T: std::str::FromStr>((line, v): (usize, String), k: &str) -> Result<T, LogParseError> {
            v.parse().map_err(|_| LogParseError {
                line,
                reason: format!("bad value '{v}' for {k}"),
            })
        }
        let cpu_model = take("cpu_model")?.1;
        let compiler = take("compiler").map(|x| x.1).unwrap_or_default();
        let threads = num(take("threads")?, "threads")?;
        let q_lo: u32 = num(take("q_lo")?, "q_lo")?;
        let q_hi: u32 = num(take("q_hi")?, "q_hi")?;
        let (el_line, el) = take("elapsed_seconds")?;
        let elapsed_ms = parse_millis(&el).ok_or(LogParseError {
            line: el_line,
            reason: format!("bad elapsed_seconds '{el}'"),
        })?;
        let (cc_line, cc) = take("candidate_count")?;
        let candidate_count = num((cc_line, cc), "candidate_count")?;
        let (rec_line, rec) = take("records")?;
        match (rec.as_str(), rows.is_some()) {
            ("omitted", false) | ("included", true) => {}
            _ => {
                return Err(LogParseError {
                    line: rec_line,
                    reason: format!("records={rec} does not match the file body"),
                })
            }
        }
        if q_lo > q_hi {
            return Err(LogParseError {
                line: last,
                reason: "q_lo > q_hi".into(),
            });
        }
        if let Some(rs) = &rows {
            let in_order = rs.iter().map(|r| u64::from(r.q)).eq(u64::from(q_lo)..=u64::from(q_hi));
            if !in_order {
                return Err(LogParseError {
                    line: last,
                    reason: "records must list every q in range exactly once, ascending".into(),
                });
            }
            let accepted = rs.iter().filter(|r| r.accepted()).count() as u64;
            if accepted != candidate_count {
                return Err(LogParseError {
                    line: cc_line,
                    reason: format!("candidate_count={candidate_count} but {accepted} records are accepted"),
                });
            }
        }
        let config = order
            .into_iter()
            .filter_map(|k| header.remove(&k).map(|(_, v)| (k, v)))
            .collect();
        Ok(HunterRunLog {
            cpu_model,
            compiler,
            threads,
            q_lo,
            q_hi,
            elapsed_ms,
            candidate_count,
            config,
            records: rows,
        })
    }
}

/// Aggregate over a set of runs. Times are kept in integer milliseconds and
/// averages are formatted from exact ratios.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub number_of_runs: u64,
    pub total_candidates: u64,
    pub min_elapsed_ms: u64,
    pub max_elapsed_ms: u64,
    pub total_elapsed_ms: u64,
}

/// `num / den` rounded half-up to `decimals` places; `0` when `den == 0`.
pub fn format_ratio(num: u64, den: u64, decimals: u32) -> String {
    if den == 0 {
        return format_ratio(0, 1, decimals);
    }
    let scale = 10u128.pow(decimals);
    let scaled = (u128::from(num) * scale * 2 + u128::from(den)) / (2 * u128::from(den));
    let (whole, frac) = (scaled / scale, scaled % scale);
    if decimals == 0 {
        whole.to_string()
    } else {
        format!("{whole}.{frac:0width$}", width = decimals as usize)
    }
}

impl RunSummary {
    pub fn avg_candidates(&self) -> String {
        format_ratio(self.total_candidates, self.number_of_runs, 3)
    }

    pub fn avg_elapsed_seconds(&self) -> String {
        format_ratio(self.total_elapsed_ms, self.number_of_runs * 1000, 3)
    }

    pub fn min_elapsed_seconds(&self) -> String {
        format_millis(self.min_elapsed_ms)
    }

    pub fn max_elapsed_seconds(&self) -> String {
        format_millis(self.max_elapsed_ms)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.number_of_runs,
            self.total_candidates,
            self.avg_candidates(),
            self.min_elapsed_seconds(),
            self.max_elapsed_seconds(),
            self.avg_elapsed_seconds()
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{SUMMARY_CSV_HEADER}\n{}\n", self.csv_row())
    }
}

pub fn summarize_logs(logs: &[HunterRunLog]) -> RunSummary {
    if logs.is_empty() {
        return RunSummary::default();
    }
    RunSummary {
        number_of_runs: logs.len() as u64,
        total_candidates: logs.iter().map(|l| l.candidate_count).sum(),
        min_elapsed_ms: logs.iter().map(|l| l.elapsed_ms).min().unwrap_or(0),
        max_elapsed_ms: logs.iter().map(|l| l.elapsed_ms).max().unwrap_or(0),
        total_elapsed_ms: logs.iter().map(|l| l.elapsed_ms).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn permissive(q_lo: u32, q_hi: u32) -> HuntConfig {
        HuntConfig {
            min_classical_bits: 0.0,
            min_quantum_bits: 0.0,
            max_log10_fail: 0.0,
            ..HuntConfig::new(q_lo, q_hi)
        }
    }

    #[test]
    fn every_prime_up_to_100_accepted_with_zero_thresholds() {
        let log = hunt(&permissive(2, 100)).unwrap();
        assert_eq!(log.candidate_count, 25);
        let rs = log.records.unwrap();
        assert_eq!(rs.len(), 99);
        assert_eq!(rs.iter().filter(|r| r.status == CandidateStatus::Skipped).count(), 74);
    }

    #[test]
    fn empty_prime_range() {
        let log = hunt(&HuntConfig::new(24, 28)).unwrap();
        assert_eq!(log.candidate_count, 0);
        assert!(log.records.unwrap().iter().all(|r| r.status == CandidateStatus::Skipped));
    }

    #[test]
    fn thread_count_does_not_change_records() {
        let mut cfg = HuntConfig::new(1000, 1300);
        let one = hunt(&cfg).unwrap();
        cfg.threads = 7;
        let seven = hunt(&cfg).unwrap();
        assert_eq!(one.records, seven.records);
        assert_eq!(one.candidate_count, seven.candidate_count);
    }

    #[test]
    fn bad_configs() {
        assert!(hunt(&HuntConfig::new(10, 5)).is_err());
        assert!(hunt(&HuntConfig { threads: 0, ..HuntConfig::new(5, 10) }).is_err());
        assert!(hunt(&HuntConfig { max_log10_fail: f64::NAN, ..HuntConfig::new(5, 10) }).is_err());
    }

    #[test]
    fn missing_oracle_entries_are_unevaluated() {
        let cfg = HuntConfig {
            oracle: Oracle::Fixture(Default::default()),
            ..permissive(1100, 1110)
        };
        let log = hunt(&cfg).unwrap();
        assert_eq!(log.candidate_count, 0);
        let statuses: Vec<_> = log.records.unwrap().iter().map(|r| r.status).collect();
        assert!(statuses.contains(&CandidateStatus::Unevaluated));
    }

    #[test]
    fn log_text_roundtrip() {
        let log = hunt(&permissive(90, 140)).unwrap();
        let parsed = HunterRunLog::parse(&log.to_text()).unwrap();
        assert_eq!(parsed, log);
    }

    #[test]
    fn log_parse_rejects_inconsistent_files() {
        let log = hunt(&permissive(90, 100)).unwrap();
        assert_eq!(log.candidate_count, 1);
        let text = log.to_text();
        let miscount = text.replace("candidate_count=1", "candidate_count=2");
        assert!(HunterRunLog::parse(&miscount).is_err());
        let dropped_row = text.replace("91,,,,,skipped\n", "");
        assert!(HunterRunLog::parse(&dropped_row).is_err());
        assert!(HunterRunLog::parse(&text.replace("records=included", "records=omitted")).is_err());
        assert!(HunterRunLog::parse("cpu_model=x\nthreads=1\n").is_err());
    }

    #[test]
    fn millis_are_exact() {
        assert_eq!(parse_millis("20.001"), Some(20_001));
        assert_eq!(parse_millis("120.006"), Some(120_006));
        assert_eq!(parse_millis("7"), Some(7_000));
        assert_eq!(parse_millis("7.5"), Some(7_500));
        for bad in ["", ".5", "1.2345", "-1", "1e3", "x"] {
            assert_eq!(parse_millis(bad), None, "{bad}");
        }
        assert_eq!(format_millis(61_253), "61.253");
        assert_eq!(format_millis(5), "0.005");
    }

    #[test]
    fn ratio_formatting() {
        assert_eq!(format_ratio(6638, 16, 3), "414.875");
        assert_eq!(format_ratio(2, 3, 3), "0.667");
        assert_eq!(format_ratio(1, 0, 3), "0.000");
        assert_eq!(format_ratio(5, 2, 0), "3");
    }

    #[test]
    fn empty_summary_is_zero() {
        let s = summarize_logs(&[]);
        assert_eq!(s, RunSummary::default());
        assert_eq!(s.csv_row(), "0,0,0.000,0.000,0.000,0.000");
    }
}
