//! Command line interface: amplitude construction, verification suites, and
//! point evaluation. Exit code 0 means every selected check passed, 1 means
//! some check failed, 2 is a usage error.

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::amplitudes::{amplitude, save_amplitude};
use crate::diffcalc::Theory;
use crate::exactalg::{format_ratfn, parse_ratfn};
use crate::kinspace::{build_space, LegSet};

use super::{
    suite_annihilation, suite_base_case, suite_commutators, suite_golden, suite_residues,
    suite_vanishing_instance, CheckReport, OpFamily,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TheoryArg {
    Ym,
    Gr,
}

impl From<TheoryArg> for Theory {
    fn from(t: TheoryArg) -> Theory {
        match t {
            TheoryArg::Ym => Theory::YM,
            TheoryArg::Gr => Theory::GR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "kinamps",
    about = "Exact tree amplitudes on the constrained kinematic space and their differential-operator checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute an amplitude, cache it when applicable, and print it
    Amp(AmpArgs),
    /// Run a verification suite
    Check(CheckArgs),
    /// Evaluate an expression at a seeded sample point
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct AmpArgs {
    #[arg(long, value_enum)]
    theory: TheoryArg,
    #[arg(long)]
    n: usize,
    /// Write the result to the cache directory as well
    #[arg(long)]
    cache: bool,
}

#[derive(Debug, Subcommand)]
enum CheckWhat {
    /// Annihilation of the amplitude by every named operator
    Annihilate {
        #[arg(long, value_enum)]
        theory: TheoryArg,
        #[arg(long)]
        n: usize,
        /// Comma-separated operator families (X,Y,Z,A,B,C); default all
        #[arg(long)]
        ops: Option<String>,
    },
    /// Commutator identities on the degree-two monomial basis
    Commutators {
        #[arg(long, value_enum)]
        theory: TheoryArg,
        #[arg(long)]
        n: usize,
    },
    /// Pole orders and residue factorization over all splits
    Residues {
        #[arg(long, value_enum)]
        theory: TheoryArg,
        #[arg(long)]
        n: usize,
    },
    /// The brute-force vanishing instance (degree-4 polarization ansatz)
    Vanishing,
    /// Proportionality against the shipped reference expressions
    Golden {
        #[arg(long)]
        n: usize,
    },
    /// Three-point base-case identities
    Base,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(subcommand)]
    what: CheckWhat,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Number of legs of the kinematic space
    #[arg(long)]
    n: usize,
    /// Seed of the deterministic sample point
    #[arg(long, default_value = "42")]
    seed: u64,
    /// Expression in the canonical grammar
    expr: String,
}

fn emit_reports(reports: &[CheckReport], format: Format) -> i32 {
    match format {
        Format::Text => {
            for r in reports {
                print!("{}", r.to_text());
            }
        }
        Format::Json => {
            if reports.len() == 1 {
                println!("{}", reports[0].to_json());
            } else {
                let all: Vec<serde_json::Value> = reports
                    .iter()
                    .map(|r| serde_json::from_str(&r.to_json()).expect("valid json"))
                    .collect();
                println!("{}", serde_json::to_string_pretty(&all).expect("valid json"));
            }
        }
    }
    if reports.iter().all(|r| r.passed()) {
        0
    } else {
        1
    }
}

fn run(cli: Cli) -> crate::error::Result<i32> {
    match cli.command {
        Command::Amp(args) => {
            let space = build_space(&LegSet::canonical(args.n))?;
            let amp = amplitude(&space, args.theory.into())?;
            if args.cache {
                let path = save_amplitude(&amp)?;
                eprintln!("cached at {}", path.display());
            }
            match cli.format {
                Format::Text => {
                    println!("theory: {}", amp.theory.name());
                    println!("n: {}", amp.legs.len());
                    println!("normalization: {}", amp.normalization);
                    println!("sha256: {}", amp.content_hash());
                    println!("{}", format_ratfn(&amp.value, amp.catalog().as_ref()));
                }
                Format::Json => {
                    let doc = serde_json::json!({
                        "theory": amp.theory.name(),
                        "n": amp.legs.len(),
                        "normalization": amp.normalization.to_string(),
                        "sha256": amp.content_hash(),
                        "value": format_ratfn(&amp.value, amp.catalog().as_ref()),
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
                }
            }
            Ok(0)
        }
        Command::Check(args) => {
            let reports = match args.what {
                CheckWhat::Annihilate { theory, n, ops } => {
                    let families = match ops {
                        Some(s) => OpFamily::parse_list(&s)?,
                        None => OpFamily::all(),
                    };
                    vec![suite_annihilation(theory.into(), n, &families)?]
                }
                CheckWhat::Commutators { theory, n } => {
                    vec![suite_commutators(n, theory.into())?]
                }
                CheckWhat::Residues { theory, n } => {
                    vec![suite_residues(theory.into(), n)?]
                }
                CheckWhat::Vanishing => vec![suite_vanishing_instance()?],
                CheckWhat::Golden { n } => vec![suite_golden(n)?],
                CheckWhat::Base => vec![suite_base_case()?],
            };
            Ok(emit_reports(&reports, cli.format))
        }
        Command::Eval(args) => {
            let space = build_space(&LegSet::canonical(args.n))?;
            let cat = space.catalog();
            let f = parse_ratfn(&args.expr, cat.as_ref())?;
            let f = space.to_normal_form(&f)?;
            let point = space.sample_point(args.seed);
            let value = f.evaluate(&point)?;
            match cli.format {
                Format::Text => println!("{value}"),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({ "value": value.to_string() })
                ),
            }
            Ok(0)
        }
    }
}

/// Entry point used by the thin binary. Returns the process exit code.
pub fn cli_main(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap renders help/version on stdout with success status
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
