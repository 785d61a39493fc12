use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use kyfrog::estimator::{FixtureTable, Oracle};
use kyfrog::failure::{failure_log10, monte_carlo_failure, ErrorModel};
use kyfrog::hunter::{hunt, summarize_logs, HuntConfig, HunterRunLog};
use kyfrog::hybrid::{decrypt_file, encrypt_file};
use kyfrog::kem::Kem;
use kyfrog::pke::{PublicKey, SecretKey};
use kyfrog::rng::{Drbg, DRBG_SEED_BYTES};
use kyfrog::{ParameterSet, REFERENCE};

/// Log10 failure bound the reference parameters were selected against.
const CLAIMED_LOG10_FAIL: f64 = -150.0;

#[derive(Parser)]
#[command(name = "kyfrog", version, about = "Plain-LWE KEM, hybrid file encryption and parameter tooling")]
struct Cli {
    /// Fixed 48-byte DRBG seed (hex). Test use only.
    #[arg(long, global = true, hide = true, value_name = "HEX", requires = "insecure_deterministic")]
    drbg_seed: Option<String>,

    #[arg(long, global = true, hide = true)]
    insecure_deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Force {
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair.
    Keygen {
        #[arg(long)]
        pk_out: PathBuf,
        #[arg(long)]
        sk_out: PathBuf,
        #[command(flatten)]
        force: Force,
    },
    /// Encapsulate a fresh shared key to a public key.
    Encap {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        ct_out: PathBuf,
        #[arg(long)]
        key_out: PathBuf,
        #[command(flatten)]
        force: Force,
    },
    /// Decapsulate. Invalid ciphertexts silently give the rejection key.
    Decap {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        key_out: PathBuf,
        #[command(flatten)]
        force: Force,
    },
    /// Encrypt a file to a public key.
    Encrypt {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        force: Force,
    },
    /// Decrypt a file.
    Decrypt {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        force: Force,
    },
    /// Print the reference parameter set and derived sizes.
    Params {
        /// Print a CSV header and row instead of key=value lines.
        #[arg(long)]
        csv: bool,
    },
    /// Estimate the decryption-failure probability.
    AnalyzeFailure {
        #[command(flatten)]
        set: SetArgs,
        /// Also run this many Monte Carlo trials.
        #[arg(long)]
        monte_carlo: Option<u64>,
        /// 32-byte Monte Carlo seed (hex).
        #[arg(long, default_value = "00")]
        seed: String,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Search moduli for parameter sets meeting the security and failure thresholds.
    Hunt {
        #[arg(long)]
        q_lo: u32,
        #[arg(long)]
        q_hi: u32,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// `builtin` or `fixture:FILE`.
        #[arg(long, default_value = "builtin")]
        oracle: String,
        /// Minimum classical and quantum bits.
        #[arg(long, default_value_t = 320.0)]
        min_bits: f64,
        #[arg(long, default_value_t = -150.0, allow_hyphen_values = true)]
        max_log10_fail: f64,
        #[arg(long, default_value = "full_model")]
        failure_model: ErrorModel,
        /// Write the run log here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        force: Force,
    },
    /// Summarize hunter run logs as CSV.
    Summarize {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
    /// Time keygen, encap and decap.
    Bench {
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        iterations: u32,
    },
}

#[derive(Args)]
struct SetArgs {
    #[arg(long, default_value_t = REFERENCE.n)]
    n: usize,
    #[arg(long, default_value_t = REFERENCE.q)]
    q: u32,
    #[arg(long, default_value_t = REFERENCE.sigma_s)]
    sigma_s: f64,
    #[arg(long, default_value_t = REFERENCE.sigma_e)]
    sigma_e: f64,
}

enum Failure {
    Usage(String),
    Io(String),
    Auth(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Auth(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Auth(m) => m,
        }
    }
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn check_writable(path: &Path, force: &Force) -> Res<()> {
    if !force.force && path.exists() {
        return Err(Failure::Io(format!("{} exists (use --force to overwrite)", path.display())));
    }
    Ok(())
}

fn write(path: &Path, data: &[u8], force: &Force) -> Res<()> {
    let mut opts = OpenOptions::new();
    opts.write(true);
    if force.force {
        opts.create(true).truncate(true);
    } else {
        opts.create_new(true);
    }
    opts.open(path)
        .and_then(|mut f| f.write_all(data))
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn drbg(cli: &Cli) -> Res<Drbg> {
    match &cli.drbg_seed {
        Some(h) => {
            let bytes = hex::decode(h).map_err(|e| Failure::Usage(format!("--drbg-seed: {e}")))?;
            let seed: [u8; DRBG_SEED_BYTES] = bytes
                .try_into()
                .map_err(|_| Failure::Usage(format!("--drbg-seed must be {DRBG_SEED_BYTES} bytes")))?;
            Ok(Drbg::from_seed(&seed))
        }
        None => Drbg::from_os_entropy().map_err(|e| Failure::Io(e.to_string())),
    }
}

fn load_pk(path: &Path) -> Res<PublicKey> {
    PublicKey::from_file_bytes(&REFERENCE, &read(path)?)
        .map_err(|e| Failure::Auth(format!("{}: invalid public key: {e}", path.display())))
}

fn load_sk(path: &Path) -> Res<SecretKey> {
    SecretKey::from_file_bytes(&REFERENCE, &read(path)?)
        .map_err(|e| Failure::Auth(format!("{}: invalid secret key: {e}", path.display())))
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("internal failure: {e}"))
}

fn run(cli: &Cli) -> Res<()> {
    let kem = Kem::reference();
    match &cli.command {
        Command::Keygen { pk_out, sk_out, force } => {
            check_writable(pk_out, force)?;
            check_writable(sk_out, force)?;
            let (pk, sk) = kem.keygen(&mut drbg(cli)?).map_err(internal)?;
            write(pk_out, &pk.to_file_bytes(), force)?;
            write(sk_out, &sk.to_file_bytes(), force)?;
        }
        Command::Encap { pk, ct_out, key_out, force } => {
            let pk = load_pk(pk)?;
            check_writable(ct_out, force)?;
            check_writable(key_out, force)?;
            let (ct, key) = kem.encap(&pk, &mut drbg(cli)?).map_err(internal)?;
            write(ct_out, &ct, force)?;
            write(key_out, key.as_bytes(), force)?;
        }
        Command::Decap { sk, pk, ct, key_out, force } => {
            let (sk, pk) = (load_sk(sk)?, load_pk(pk)?);
            let ct = read(ct)?;
            check_writable(key_out, force)?;
            let key = kem.decap(&sk, &pk, &ct).map_err(internal)?;
            write(key_out, key.as_bytes(), force)?;
        }
        Command::Encrypt { pk, input, out, force } => {
            let pk = load_pk(pk)?;
            let data = read(input)?;
            check_writable(out, force)?;
            let container = encrypt_file(&kem, &pk, &data, &mut drbg(cli)?).map_err(internal)?;
            write(out, &container, force)?;
        }
        Command::Decrypt { sk, pk, input, out, force } => {
            let (sk, pk) = (load_sk(sk)?, load_pk(pk)?);
            let container = read(input)?;
            check_writable(out, force)?;
            let plain = decrypt_file(&kem, &sk, &pk, &container).map_err(|e| Failure::Auth(e.to_string()))?;
            write(out, &plain, force)?;
        }
        Command::Params { csv } => print_params(*csv),
        Command::AnalyzeFailure {
            set,
            monte_carlo,
            seed,
            threads,
        } => analyze_failure(set, *monte_carlo, seed, *threads)?,
        Command::Hunt {
            q_lo,
            q_hi,
            threads,
            oracle,
            min_bits,
            max_log10_fail,
            failure_model,
            out,
            force,
        } => {
            let oracle = parse_oracle(oracle)?;
            let cfg = HuntConfig {
                threads: *threads,
                oracle,
                min_classical_bits: *min_bits,
                min_quantum_bits: *min_bits,
                max_log10_fail: *max_log10_fail,
                failure_model: *failure_model,
                ..HuntConfig::new(*q_lo, *q_hi)
            };
            if let Some(out) = out {
                check_writable(out, force)?;
            }
            let log = hunt(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
            eprintln!(
                "evaluated q in [{}, {}]: {} candidates in {} s",
                log.q_lo,
                log.q_hi,
                log.candidate_count,
                log.elapsed_seconds()
            );
            match out {
                Some(out) => write(out, log.to_text().as_bytes(), force)?,
                None => print!("{}", log.to_text()),
            }
        }
        Command::Summarize { logs } => {
            let mut parsed = Vec::with_capacity(logs.len());
            for path in logs {
                let text = String::from_utf8(read(path)?)
                    .map_err(|_| Failure::Auth(format!("{}: not UTF-8 text", path.display())))?;
                parsed.push(HunterRunLog::parse(&text).map_err(|e| Failure::Auth(format!("{}: {e}", path.display())))?);
            }
            print!("{}", summarize_logs(&parsed).to_csv());
        }
        Command::Bench { iterations } => bench(cli, &kem, *iterations)?,
    }
    Ok(())
}

fn parse_oracle(spec: &str) -> Res<Oracle> {
    if spec == "builtin" {
        return Ok(Oracle::Builtin);
    }
    let path = spec
        .strip_prefix("fixture:")
        .ok_or_else(|| Failure::Usage(format!("--oracle must be builtin or fixture:FILE, not '{spec}'")))?;
    let text = String::from_utf8(read(Path::new(path))?).map_err(|_| Failure::Auth(format!("{path}: not UTF-8 text")))?;
    FixtureTable::parse(&text)
        .map(Oracle::Fixture)
        .map_err(|e| Failure::Auth(format!("{path}: {e}")))
}

fn print_params(csv: bool) {
    let p = REFERENCE;
    let d = p.derive_sizes().expect("reference set is valid");
    let rows = [
        ("n", p.n.to_string()),
        ("k", p.k.to_string()),
        ("q", p.q.to_string()),
        ("sigma_s", p.sigma_s.to_string()),
        ("sigma_e", p.sigma_e.to_string()),
        ("bits_per_coeff", d.bits_per_coeff.to_string()),
        ("alpha", d.alpha_string()),
        ("pk", d.pk_bytes.to_string()),
        ("sk", d.sk_bytes.to_string()),
        ("ct", d.ct_bytes.to_string()),
    ];
    if csv {
        let (keys, vals): (Vec<_>, Vec<_>) = rows.iter().map(|(k, v)| (*k, v.as_str())).unzip();
        println!("{}\n{}", keys.join(","), vals.join(","));
    } else {
        for (k, v) in rows {
            println!("{k}={v}");
        }
    }
}

fn analyze_failure(set: &SetArgs, trials: Option<u64>, seed: &str, threads: usize) -> Res<()> {
    let p = ParameterSet::new(set.n, 1, set.q, set.sigma_s, set.sigma_e).map_err(|e| Failure::Usage(e.to_string()))?;
    let seed_bytes = hex::decode(seed).map_err(|e| Failure::Usage(format!("--seed: {e}")))?;
    if seed_bytes.len() > 32 {
        return Err(Failure::Usage("--seed is at most 32 bytes".into()));
    }
    let mut seed = [0u8; 32];
    seed[..seed_bytes.len()].copy_from_slice(&seed_bytes);

    let estimates: Vec<_> = ErrorModel::ALL.iter().map(|&m| failure_log10(&p, m)).collect();
    println!("n={} q={} sigma_s={} sigma_e={}", p.n, p.q, p.sigma_s, p.sigma_e);
    for e in &estimates {
        let m = e.model.name();
        println!("{m}.sigma_E={:.6}", e.sigma_e);
        println!("{m}.log10_per_bit={:.6}", e.log10_per_bit);
        println!("{m}.log10_per_ct={:.6}", e.log10_per_ct);
    }
    println!("claimed_log10_fail_per_ct={CLAIMED_LOG10_FAIL}");
    let mc = trials.map(|t| monte_carlo_failure(&p, t, &seed, threads.max(1)));
    if let Some(r) = &mc {
        println!("monte_carlo.trials={}", r.trials);
        println!("monte_carlo.failures={}", r.failures);
        println!("monte_carlo.log10_per_bit={:.6}", r.log10_rate());
        println!("monte_carlo.stddev={:.6}", r.stddev);
    }
    println!();
    println!("model,sigma_E,log10_per_bit,log10_per_ct,claimed_log10_fail_per_ct");
    for e in &estimates {
        println!(
            "{},{:.6},{:.6},{:.6},{}",
            e.model, e.sigma_e, e.log10_per_bit, e.log10_per_ct, CLAIMED_LOG10_FAIL
        );
    }
    if let Some(r) = &mc {
        println!(
            "monte_carlo,{:.6},{:.6},{:.6},{}",
            r.stddev,
            r.log10_rate(),
            (r.log10_rate() + 256f64.log10()).min(0.0),
            CLAIMED_LOG10_FAIL
        );
    }
    Ok(())
}

fn bench(cli: &Cli, kem: &Kem, iterations: u32) -> Res<()> {
    let mut rng = drbg(cli)?;
    let mut times: [Vec<f64>; 3] = Default::default();
    let ms = |t: Instant| t.elapsed().as_secs_f64() * 1e3;
    for _ in 0..iterations {
        let t = Instant::now();
        let (pk, sk) = kem.keygen(&mut rng).map_err(internal)?;
        times[0].push(ms(t));
        let t = Instant::now();
        let (ct, _) = kem.encap(&pk, &mut rng).map_err(internal)?;
        times[1].push(ms(t));
        let t = Instant::now();
        let _ = kem.decap(&sk, &pk, &ct).map_err(internal)?;
        times[2].push(ms(t));
    }
    println!("operation,iterations,mean_ms,median_ms");
    for (name, mut v) in ["keygen", "encap", "decap"].into_iter().zip(times) {
        v.sort_by(f64::total_cmp);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let mid = v.len() / 2;
        let median = if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 };
        println!("{name},{iterations},{mean:.3},{median:.3}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("kyfrog: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
