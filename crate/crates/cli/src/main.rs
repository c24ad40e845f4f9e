use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use halfweight::forms::{FrickeSign, SpaceKind};

mod commands;
mod render;

use commands::{CliError, Outcome};

#[derive(Parser, Debug)]
#[command(
    name = "halfweight",
    version,
    about = "Half-integral weight forms of level 4 and their L-functions"
)]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 128)]
    bits: usize,

    /// Series precision (number of q-expansion coefficients). Chosen per task when omitted.
    #[arg(long, global = true)]
    prec: Option<usize>,

    /// Output format. Each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
#[command(allow_negative_numbers = true)]
enum Command {
    /// Print q-expansion coefficients of a named form.
    ///
    /// FORM is one of theta, P, F2, Delta4, Delta4_product, D2, plus_form(k),
    /// minus_form(k), monomial(a,b).
    Expand {
        form: String,
        /// Number of coefficients; defaults to --prec, then 20.
        n_terms: Option<usize>,
    },
    /// Echelon basis of a space of weight k + 1/2 (full, cusp, plus or minus).
    Basis { k: u32, kind: SpaceKind },
    /// Hecke matrices T(p^2), characteristic polynomials and eigenforms.
    Hecke {
        k: u32,
        /// + or -
        sign: FrickeSign,
        /// Comma-separated odd primes, e.g. 3,5.
        primes: String,
        /// Number of eigenform coefficients to print.
        #[arg(long, default_value_t = 20)]
        terms: usize,
    },
    /// Completed L-function L*(f, s).
    ///
    /// Without --eigen, f is Delta4*theta^(2k-7) for + and Delta4*D2*theta^(2k-11) for -.
    Lstar {
        k: u32,
        sign: FrickeSign,
        /// Point s as a, a+bi or p/q.
        #[arg(allow_hyphen_values = true)]
        s: String,
        /// Use the N-th Hecke eigenform of the space instead.
        #[arg(long, value_name = "N")]
        eigen: Option<usize>,
        /// Also evaluate by numerical integration and compare.
        #[arg(long)]
        cross_check: bool,
    },
    /// L*(f, sigma) on a real grid, with sign changes.
    Scan {
        k: u32,
        sign: FrickeSign,
        #[arg(allow_hyphen_values = true)]
        lo: String,
        #[arg(allow_hyphen_values = true)]
        hi: String,
        step: String,
        #[arg(long, value_name = "N")]
        eigen: Option<usize>,
    },
    /// Run the verification suites and emit the report.
    Verify {
        #[arg(long, default_value_t = 10)]
        kmax: u32,
        /// Zero every timing so that the report is reproducible byte for byte.
        #[arg(long)]
        no_timings: bool,
    },
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.bits < 64 {
        return Err(CliError::Usage(format!("--bits must be at least 64, got {}", cli.bits)));
    }
    let ctx = commands::Context {
        bits: cli.bits,
        prec: cli.prec,
    };
    match &cli.command {
        Command::Expand { form, n_terms } => commands::expand(&ctx, form, *n_terms, cli.format.unwrap_or(Format::Text)),
        Command::Basis { k, kind } => commands::basis(&ctx, *k, *kind, cli.format.unwrap_or(Format::Text)),
        Command::Hecke { k, sign, primes, terms } => {
            commands::hecke(&ctx, *k, *sign, primes, *terms, cli.format.unwrap_or(Format::Text))
        }
        Command::Lstar {
            k,
            sign,
            s,
            eigen,
            cross_check,
        } => commands::lstar(
            &ctx,
            *k,
            *sign,
            s,
            *eigen,
            *cross_check,
            cli.format.unwrap_or(Format::Text),
        ),
        Command::Scan {
            k,
            sign,
            lo,
            hi,
            step,
            eigen,
        } => commands::scan(
            &ctx,
            *k,
            *sign,
            [lo, hi, step],
            *eigen,
            cli.format.unwrap_or(Format::Text),
        ),
        Command::Verify { kmax, no_timings } => {
            commands::verify(&ctx, *kmax, *no_timings, cli.format.unwrap_or(Format::Json))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if let Some(note) = &outcome.note {
                eprintln!("{note}");
            }
            let written = match &cli.out {
                Some(path) => {
                    std::fs::write(path, &outcome.body).map_err(|e| format!("cannot write {}: {e}", path.display()))
                }
                None => {
                    print!("{}", outcome.body);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if outcome.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
