//! Command-line surface. Every subcommand prints deterministic output:
//! JSON objects (or CSV for `bounds`, plain text files for the
//! constructions) on standard out, single-line JSON errors on standard
//! error, and wall-clock timing on standard error only when `--timings`
//! is set, so standard out is byte-identical across runs and worker
//! counts.
//!
//! Exit codes: 0 success (a `false` verdict is a successful run), 2
//! invalid argument or unreadable input, 3 exceeded resource cap, 4
//! failed mathematical precondition (the violation witness is attached
//! to the error JSON), 1 internal error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::arith::{build_table, PrimeTable};
use crate::asymptotics::{
    alpha_bracket, envelope_h2, envelope_h3plus, log_of_bigcount, tn_exact, tn_grouped,
    BoundParams,
};
use crate::basis::{build_basis, verify_injection};
use crate::constructions::{
    count_a1_families, count_h3plus_families, seeded_h2_family, seeded_h3plus_family, Cut,
    FamilySpec,
};
use crate::enumeration::{count_exact_report, extremal_size};
use crate::error::{Error, Result};
use crate::files::{
    format_basis_file, format_certificate_file, format_family_file, parse_basis_text,
    read_set_file, write_text,
};
use crate::property::{possesses_ph, possesses_rs, Witness};

/// Seed used when none is given. Fixed, never time-based.
pub const DEFAULT_SEED: u64 = 42;

/// Number of alpha product terms behind the `bounds` CSV columns.
const BOUNDS_ALPHA_TERMS: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "divprod",
    version,
    about = "Exact computation and constructions for product-divisibility properties of integer sets"
)]
struct Cli {
    /// Worker threads for the exact counter (wall time only; output
    /// bytes never depend on this).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Report wall-clock seconds as JSON on standard error.
    #[arg(long, global = true)]
    timings: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the set in FILE has the order-h property.
    Check {
        /// Set file: one positive integer per line, '#' lines ignored.
        #[arg(long)]
        file: PathBuf,
        /// Property order (number of cofactors).
        #[arg(long)]
        h: u32,
    },
    /// Decide the split form: no product of r elements divides a product
    /// of s other elements.
    RsCheck {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
    },
    /// Exact number of subsets of [1, n] with the order-h property.
    Count {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        h: u32,
    },
    /// Maximum size of a good subset of [1, n], with a witness set.
    Extremal {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        h: u32,
    },
    /// The product of (floor(n/p) + 1) over primes sqrt(n) < p <= n, by
    /// two independent algorithms.
    Tn {
        #[arg(long)]
        n: u64,
    },
    /// Bracket the growth constant from its defining product.
    Alpha {
        /// Number of product terms.
        #[arg(long, default_value_t = 10_000)]
        terms: u64,
    },
    /// Log-count envelopes as CSV.
    Bounds {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        h: u32,
        /// Low multiplier for the order-2 correction term.
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
        /// High multiplier for the order-2 correction term.
        #[arg(long, default_value_t = 1.0)]
        c2: f64,
    },
    /// Build a seeded order-2 family and emit it as a family file.
    ConstructH2 {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write the family file here and print a JSON summary instead.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a seeded order-h family (h >= 3) and emit it as a family
    /// file.
    ConstructH3 {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        h: u32,
        /// Interval cut: sqrt-over-log, sqrt, or a number.
        #[arg(long, default_value = "sqrt-over-log")]
        cut: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact number of families the construction of the given order can
    /// produce.
    CountFamilies {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        h: u32,
        /// Interval cut for orders >= 3 (ignored for order 2, which
        /// always cuts at sqrt).
        #[arg(long, default_value = "sqrt-over-log")]
        cut: String,
    },
    /// Build a verified multiplicative basis of order h for [n].
    Basis {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        h: u32,
        /// Write the basis file here and print a JSON summary instead.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Match a good set injectively into a basis and report the
    /// certificate.
    VerifyInjection {
        /// Set file.
        #[arg(long)]
        set: PathBuf,
        /// Basis file produced by the basis subcommand.
        #[arg(long)]
        basis: PathBuf,
        /// Write the certificate file here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct CheckOut {
    verdict: bool,
    h: u32,
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Witness>,
}

#[derive(Serialize)]
struct RsCheckOut {
    verdict: bool,
    r: u32,
    s: u32,
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Witness>,
}

#[derive(Serialize)]
struct CountOut {
    n: u64,
    h: u32,
    count: String,
    edges: usize,
    components: usize,
}

#[derive(Serialize)]
struct ExtremalOut {
    n: u64,
    h: u32,
    size: usize,
    set: Vec<u64>,
}

#[derive(Serialize)]
struct TnOut {
    n: u64,
    tn: String,
    grouped_agrees: bool,
}

#[derive(Serialize)]
struct AlphaOut {
    terms: u64,
    low: f64,
    high: f64,
}

#[derive(Serialize)]
struct FamilyOut {
    n: u64,
    h: u32,
    seed: u64,
    cut: String,
    size: usize,
    verified: bool,
    file: String,
}

#[derive(Serialize)]
struct CountFamiliesOut {
    n: u64,
    h: u32,
    cut: String,
    count: String,
}

#[derive(Serialize)]
struct BasisOut {
    n: u64,
    h: u32,
    size: usize,
    extras: usize,
    verified: bool,
    file: String,
}

#[derive(Serialize)]
struct InjectionOut {
    n: u64,
    h: u32,
    size: usize,
    matched: usize,
    perfect: bool,
    unmatched: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hall_members: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hall_neighborhood: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

#[derive(Serialize)]
struct ErrorOut {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Witness>,
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut line = serde_json::to_string(value).expect("output structs always serialize");
    line.push('\n');
    line
}

/// Table sized for a set with the given maximum; never below 3 so the
/// sieve has something to work with.
fn table_for(max: u64) -> Result<PrimeTable> {
    build_table(max.max(3))
}

/// Extract the universe from a basis file header without a prime table.
fn peek_basis_universe(text: &str) -> Result<u64> {
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(body) = trimmed.strip_prefix('#') {
            for token in body.split_whitespace() {
                if let Some(value) = token.strip_prefix("n=") {
                    return value.parse().map_err(|_| {
                        Error::Parse(format!("basis header has a malformed n field: '{token}'"))
                    });
                }
            }
        }
        break;
    }
    Err(Error::Parse("basis file has no header with an n= field".into()))
}

fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Check { file, h } => {
            let set = read_set_file(file)?;
            let table = table_for(set.max().unwrap_or(1))?;
            let (verdict, witness) = possesses_ph(&set, *h, &table)?;
            Ok(json_line(&CheckOut { verdict, h: *h, size: set.len(), witness }))
        }
        Command::RsCheck { file, r, s } => {
            let set = read_set_file(file)?;
            let (verdict, witness) = possesses_rs(&set, *r, *s)?;
            Ok(json_line(&RsCheckOut { verdict, r: *r, s: *s, size: set.len(), witness }))
        }
        Command::Count { n, h } => {
            let report = count_exact_report(*n, *h, cli.workers.max(1))?;
            Ok(json_line(&CountOut {
                n: *n,
                h: *h,
                count: report.count.to_string(),
                edges: report.edge_count,
                components: report.component_sizes.len(),
            }))
        }
        Command::Extremal { n, h } => {
            let (size, set) = extremal_size(*n, *h)?;
            Ok(json_line(&ExtremalOut { n: *n, h: *h, size, set: set.elements().to_vec() }))
        }
        Command::Tn { n } => {
            let table = table_for(*n)?;
            let exact = tn_exact(*n, &table)?;
            let grouped = tn_grouped(*n, &table)?;
            Ok(json_line(&TnOut {
                n: *n,
                tn: exact.to_string(),
                grouped_agrees: exact == grouped,
            }))
        }
        Command::Alpha { terms } => {
            if *terms == 0 {
                return Err(Error::InvalidArgument(
                    "alpha needs at least one product term".into(),
                ));
            }
            let (low, high) = alpha_bracket(*terms);
            Ok(json_line(&AlphaOut { terms: *terms, low, high }))
        }
        Command::Bounds { n, h, c1, c2 } => {
            let table = table_for(*n)?;
            let log_t = log_of_bigcount(&tn_exact(*n, &table)?).ln();
            let (lo, hi) = match h {
                0 | 1 => {
                    return Err(Error::InvalidArgument(format!(
                        "bounds are defined for orders >= 2, got {h}"
                    )))
                }
                2 => envelope_h2(*n, BoundParams::new(*c1, *c2)?, &table)?,
                _ => envelope_h3plus(*n, &table)?,
            };
            let (alpha_low, alpha_high) = alpha_bracket(BOUNDS_ALPHA_TERMS);
            let mut out = String::from("n,h,log_t,envelope_low,envelope_high,alpha_low,alpha_high\n");
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                n,
                h,
                log_t,
                lo.ln(),
                hi.ln(),
                alpha_low,
                alpha_high
            ));
            Ok(out)
        }
        Command::ConstructH2 { n, seed, out } => {
            let table = table_for(*n)?;
            let family = seeded_h2_family(*n, *seed, &table)?;
            let spec = FamilySpec::new(*n, 2, Cut::Sqrt, *seed)?;
            let text = format_family_file(&spec, &family);
            match out {
                None => Ok(text),
                Some(path) => {
                    write_text(path, &text)?;
                    Ok(json_line(&FamilyOut {
                        n: *n,
                        h: 2,
                        seed: *seed,
                        cut: spec.cut.label(*n),
                        size: family.len(),
                        verified: true,
                        file: path.display().to_string(),
                    }))
                }
            }
        }
        Command::ConstructH3 { n, h, cut, seed, out } => {
            let table = table_for(*n)?;
            let spec = FamilySpec::new(*n, *h, Cut::parse(cut)?, *seed)?;
            let family = seeded_h3plus_family(&spec, &table)?;
            let text = format_family_file(&spec, &family);
            match out {
                None => Ok(text),
                Some(path) => {
                    write_text(path, &text)?;
                    Ok(json_line(&FamilyOut {
                        n: *n,
                        h: *h,
                        seed: *seed,
                        cut: spec.cut.label(*n),
                        size: family.len(),
                        verified: true,
                        file: path.display().to_string(),
                    }))
                }
            }
        }
        Command::CountFamilies { n, h, cut } => {
            let table = table_for(*n)?;
            let (label, count) = if *h == 2 {
                (Cut::Sqrt.label(*n), count_a1_families(*n, &table)?)
            } else {
                let spec = FamilySpec::new(*n, *h, Cut::parse(cut)?, DEFAULT_SEED)?;
                (spec.cut.label(*n), count_h3plus_families(&spec, &table)?)
            };
            Ok(json_line(&CountFamiliesOut {
                n: *n,
                h: *h,
                cut: label,
                count: count.to_string(),
            }))
        }
        Command::Basis { n, h, out } => {
            let table = table_for(*n)?;
            let basis = build_basis(*n, *h, &table)?;
            let text = format_basis_file(&basis)?;
            match out {
                None => Ok(text),
                Some(path) => {
                    write_text(path, &text)?;
                    Ok(json_line(&BasisOut {
                        n: *n,
                        h: *h,
                        size: basis.len(),
                        extras: basis.extras().len(),
                        verified: true,
                        file: path.display().to_string(),
                    }))
                }
            }
        }
        Command::VerifyInjection { set, basis, out } => {
            let set_data = read_set_file(set)?;
            let basis_text = std::fs::read_to_string(basis)?;
            let universe = peek_basis_universe(&basis_text)?;
            let table = table_for(universe.max(set_data.max().unwrap_or(1)))?;
            let basis_data = parse_basis_text(&basis_text, &table)?;
            let cert = verify_injection(&set_data, &basis_data, &table)?;
            let file = match out {
                None => None,
                Some(path) => {
                    write_text(path, &format_certificate_file(&cert))?;
                    Some(path.display().to_string())
                }
            };
            Ok(json_line(&InjectionOut {
                n: basis_data.universe(),
                h: basis_data.order(),
                size: set_data.len(),
                matched: cert.pairs.len(),
                perfect: cert.unmatched.is_empty(),
                unmatched: cert.unmatched.clone(),
                hall_members: cert.hall_violator.as_ref().map(|v| v.members.clone()),
                hall_neighborhood: cert.hall_violator.as_ref().map(|v| v.neighborhood.clone()),
                file,
            }))
        }
    }
}

/// Parses `argv` and runs one subcommand, returning the process exit
/// code. All success output goes to standard out; errors and timing go
/// to standard error as single-line JSON.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let payload = ErrorOut { error: e.to_string(), witness: None };
            eprintln!("{}", serde_json::to_string(&payload).expect("error serializes"));
            return 2;
        }
    };
    let started = std::time::Instant::now();
    let outcome = dispatch(&cli);
    let code = match outcome {
        Ok(stdout_text) => {
            print!("{stdout_text}");
            0
        }
        Err(err) => {
            let code = err.exit_code();
            let message = err.to_string();
            let witness = match err {
                Error::Precondition { witness, .. } => witness,
                _ => None,
            };
            let payload = ErrorOut { error: message, witness };
            eprintln!("{}", serde_json::to_string(&payload).expect("error serializes"));
            code
        }
    };
    if cli.timings {
        eprintln!("{{\"seconds\":{}}}", started.elapsed().as_secs_f64());
    }
    code
}
