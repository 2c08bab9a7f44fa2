//! `slz`: command-line driver for slz-core.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure (a
//! `diagnostics.json` is still written), 1 when `validate` reports a failed
//! criterion.

mod opts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::opts::{Fail, Opts};

#[derive(Parser)]
#[command(name = "slz", version, about = "Spectral analysis for singular Sturm-Liouville operators")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalues of a truncation, as CSV.
    Eig(Common),
    /// Partial zeta values over a truncation grid.
    ZetaPartial(Common),
    /// Characteristic function values on real z.
    Charfn(Common),
    /// Spectral zeta function by contour integration.
    SpectralZeta(Common),
    /// Truncation sweep and rate statistics, with a gnuplot script.
    Convrate(Common),
    /// Run the acceptance criteria.
    Validate(Common),
    /// Read all options from a JSON config (key `command` selects the command).
    Run { config: PathBuf },
}

#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// Catalog name, e.g. harmonic_full or laguerre(1).
    #[arg(long)]
    problem: Option<String>,
    /// Problem parameter, repeatable.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long = "expr-p")]
    expr_p: Option<String>,
    #[arg(long = "expr-q")]
    expr_q: Option<String>,
    #[arg(long = "expr-r")]
    expr_r: Option<String>,
    /// Interval of a custom problem; "inf" and "-inf" allowed.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true)]
    interval: Option<Vec<String>>,
    /// Truncation points; commands that need only a left point use C.
    #[arg(long, num_args = 1..=2, value_names = ["C", "D"], allow_negative_numbers = true)]
    truncate: Option<Vec<f64>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// start:stop:linN, start:stop:logN or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// RE,IM
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Eigenvalue indices, comma separated.
    #[arg(long)]
    j: Option<String>,
    /// dirichlet, neumann, robin:ANGLE or friedrichs.
    #[arg(long = "bc-left")]
    bc_left: Option<String>,
    /// recursive, direct or lg (zeta-partial).
    #[arg(long)]
    method: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    shift: Option<f64>,
    #[arg(long)]
    rank: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    anchor: Option<f64>,
    /// Ray angle over pi (spectral-zeta).
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Criteria to run (validate), comma separated.
    #[arg(long)]
    only: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, opts) = match cli.cmd {
        Cmd::Eig(c) => ("eig", Opts::from_args(c)),
        Cmd::ZetaPartial(c) => ("zeta-partial", Opts::from_args(c)),
        Cmd::Charfn(c) => ("charfn", Opts::from_args(c)),
        Cmd::SpectralZeta(c) => ("spectral-zeta", Opts::from_args(c)),
        Cmd::Convrate(c) => ("convrate", Opts::from_args(c)),
        Cmd::Validate(c) => ("validate", Opts::from_args(c)),
        Cmd::Run { config } => match Opts::from_config(&config) {
            Ok((name, o)) => (name, Ok(o)),
            Err(f) => return report("run", None, f),
        },
    };
    let opts = match opts {
        Ok(o) => o,
        Err(f) => return report(name, None, f),
    };
    match commands::dispatch(name, &opts) {
        Ok(code) => ExitCode::from(code),
        Err(f) => report(name, Some(&opts), f),
    }
}

fn report(command: &str, opts: Option<&Opts>, fail: Fail) -> ExitCode {
    match fail {
        Fail::Usage(msg) => {
            eprintln!("slz {command}: {msg}");
            ExitCode::from(2)
        }
        Fail::Numeric(msg) => {
            eprintln!("slz {command}: {msg}");
            if let Some(o) = opts {
                let doc = serde_json::json!({ "command": command, "error": msg, "options": o.to_json() });
                if let Err(e) = commands::write(&o.out, "diagnostics.json", &commands::pretty(&doc)) {
                    eprintln!("slz {command}: could not write diagnostics: {e}");
                }
            }
            ExitCode::from(3)
        }
    }
}
