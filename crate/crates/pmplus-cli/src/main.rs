//! Command-line front end: key generation, file/stdin hashing, property
//! test suites and a throughput benchmark.
//!
//! Exit codes are a stable contract: 0 success, 1 property failure,
//! 2 I/O error, 3 key validation error, 64 usage error.

use clap::{Parser, Subcommand, ValueEnum};
use pmplus::keygen::{self, AnySchedule};
use pmplus::tree::{digest_hex, Finalizer, Hasher, KeySchedule};
use pmplus::Word;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

mod suites;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_KEY: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "pmplus", about = "Universal hashing over pseudo+Mersenne prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bits {
    #[value(name = "32")]
    B32,
    #[value(name = "64")]
    B64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key schedule file
    Keygen {
        #[arg(long)]
        bits: Bits,
        /// Deterministic seed; omitted means OS entropy
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hash files (or stdin when no files or "-" are given)
    Hash {
        #[arg(long)]
        key: PathBuf,
        files: Vec<PathBuf>,
    },
    /// Run a property/quality suite; nonzero exit on failure
    Test {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Throughput benchmark over a geometric length grid, CSV on stdout
    Bench {
        #[arg(long)]
        bits: Bits,
        #[arg(long)]
        key: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Reduction,
    Regularity,
    Universality,
    Avalanche,
    Mix,
    TreeEquivalence,
    NhFraction,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems exit 64; --help/--version are plain success.
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::Keygen { bits, seed, out } => cmd_keygen(bits, seed, out),
        Command::Hash { key, files } => cmd_hash(key, files),
        Command::Test { suite, seed } => cmd_test(suite, seed),
        Command::Bench { bits, key } => cmd_bench(bits, key),
    };
    ExitCode::from(code)
}

/// --seed wins, then PMPLUS_SEED, then OS entropy; always echoed.
fn resolve_seed(cli_seed: Option<u64>) -> u64 {
    cli_seed
        .or_else(|| {
            std::env::var("PMPLUS_SEED")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| rand::rngs::OsRng.next_u64())
}

fn cmd_keygen(bits: Bits, seed: Option<u64>, out: PathBuf) -> u8 {
    let bytes = match bits {
        Bits::B32 => keygen::save(&match seed {
            Some(s) => keygen::generate_seeded::<u32>(s),
            None => keygen::generate_entropy::<u32>(),
        }),
        Bits::B64 => keygen::save(&match seed {
            Some(s) => keygen::generate_seeded::<u64>(s),
            None => keygen::generate_entropy::<u64>(),
        }),
    };
    if let Err(err) = fs::write(&out, &bytes) {
        eprintln!("pmplus: cannot write {}: {err}", out.display());
        return EXIT_IO;
    }
    // Fingerprint under a fixed public schedule; key material itself is
    // never echoed.
    let fp_schedule = keygen::generate_seeded::<u64>(0);
    let fp = pmplus::hash_oneshot(&fp_schedule, &bytes).unwrap();
    eprintln!(
        "wrote {} ({} bytes, fingerprint {})",
        out.display(),
        bytes.len(),
        digest_hex(fp)
    );
    EXIT_OK
}

fn load_schedule(path: &PathBuf) -> Result<AnySchedule, u8> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(err) => {
            eprintln!("pmplus: cannot read key file {}: {err}", path.display());
            return Err(EXIT_IO);
        }
    };
    keygen::load_any(&bytes).map_err(|err| {
        eprintln!("pmplus: invalid key file {}: {err}", path.display());
        EXIT_KEY
    })
}

fn hash_reader<W: Word + Finalizer>(
    schedule: &KeySchedule<W>,
    reader: &mut dyn Read,
) -> io::Result<W> {
    let mut hasher = Hasher::new(schedule);
    let mut buf = vec![0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher
            .update(&buf[..n])
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    }
    Ok(hasher.finalize())
}

fn hash_input(schedule: &AnySchedule, reader: &mut dyn Read) -> io::Result<String> {
    match schedule {
        AnySchedule::W32(s) => Ok(digest_hex(hash_reader(s, reader)?)),
        AnySchedule::W64(s) => Ok(digest_hex(hash_reader(s, reader)?)),
    }
}

fn cmd_hash(key: PathBuf, files: Vec<PathBuf>) -> u8 {
    let schedule = match load_schedule(&key) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let stdin_only = files.is_empty();
    let targets: Vec<PathBuf> = if stdin_only { vec![PathBuf::from("-")] } else { files };
    for path in targets {
        let result = if path.as_os_str() == "-" {
            hash_input(&schedule, &mut io::stdin().lock())
        } else {
            match fs::File::open(&path) {
                Ok(mut f) => hash_input(&schedule, &mut f),
                Err(err) => Err(err),
            }
        };
        match result {
            Ok(digest) => println!("{digest}  {}", path.display()),
            Err(err) => {
                eprintln!("pmplus: cannot hash {}: {err}", path.display());
                return EXIT_IO;
            }
        }
    }
    EXIT_OK
}

fn cmd_test(suite: Suite, seed: Option<u64>) -> u8 {
    let seed = resolve_seed(seed);
    println!("seed={seed}");
    let passed = match suite {
        Suite::Reduction => suites::reduction(seed),
        Suite::Regularity => suites::regularity(seed),
        Suite::Universality => suites::universality(seed),
        Suite::Avalanche => suites::avalanche(seed),
        Suite::Mix => suites::mix(seed),
        Suite::TreeEquivalence => suites::tree_equivalence(seed),
        Suite::NhFraction => suites::nh_fraction(),
    };
    if passed {
        println!("result=pass");
        EXIT_OK
    } else {
        println!("result=fail");
        EXIT_FAIL
    }
}

#[cfg(target_arch = "x86_64")]
fn cycle_counter() -> Option<u64> {
    // Safety: RDTSC is unprivileged on every x86-64 target we build for.
    Some(unsafe { core::arch::x86_64::_rdtsc() })
}

#[cfg(not(target_arch = "x86_64"))]
fn cycle_counter() -> Option<u64> {
    None
}

fn bench_one<W: Word + Finalizer>(schedule: &KeySchedule<W>, data: &[u8]) -> (f64, Option<f64>) {
    const REPS: usize = 11;
    let mut samples = Vec::with_capacity(REPS);
    let mut cycle_samples = Vec::with_capacity(REPS);
    // Warm-up touches the buffer and primes caches.
    let _ = pmplus::hash_oneshot(schedule, data).unwrap();
    for _ in 0..REPS {
        let c0 = cycle_counter();
        let t0 = Instant::now();
        let digest = pmplus::hash_oneshot(schedule, data).unwrap();
        let dt = t0.elapsed();
        let c1 = cycle_counter();
        std::hint::black_box(digest);
        samples.push(data.len() as f64 / dt.as_nanos().max(1) as f64);
        if let (Some(c0), Some(c1)) = (c0, c1) {
            if c1 > c0 {
                cycle_samples.push(data.len() as f64 / (c1 - c0) as f64);
            }
        }
    }
    samples.sort_by(|a, b| a.total_cmp(b));
    cycle_samples.sort_by(|a, b| a.total_cmp(b));
    let median = samples[samples.len() / 2];
    let cycles = if cycle_samples.is_empty() {
        None
    } else {
        Some(cycle_samples[cycle_samples.len() / 2])
    };
    (median, cycles)
}

fn cmd_bench(bits: Bits, key: PathBuf) -> u8 {
    let schedule = match load_schedule(&key) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let mut data = vec![0u8; 256 * 1024];
    ChaCha12Rng::seed_from_u64(0xbe7c).fill_bytes(&mut data);
    let have_cycles = cycle_counter().is_some();
    let mut out = io::stdout().lock();
    if have_cycles {
        let _ = writeln!(out, "length,bytes_per_ns,bytes_per_cycle");
    } else {
        let _ = writeln!(out, "length,bytes_per_ns");
    }
    let mut length = 64usize;
    while length <= 256 * 1024 {
        let slice = &data[..length];
        let (ns, cycles) = match (&schedule, bits) {
            (AnySchedule::W32(s), Bits::B32) => bench_one(s, slice),
            (AnySchedule::W64(s), Bits::B64) => bench_one(s, slice),
            _ => {
                eprintln!("pmplus: key file width does not match --bits");
                return EXIT_KEY;
            }
        };
        if have_cycles {
            let _ = writeln!(out, "{length},{ns:.4},{:.4}", cycles.unwrap_or(0.0));
        } else {
            let _ = writeln!(out, "{length},{ns:.4}");
        }
        length *= 2;
    }
    EXIT_OK
}
