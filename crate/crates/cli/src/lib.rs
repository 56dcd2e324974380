//! Command-line front end for `locgauss`.
//!
//! Exit codes: 0 success, 1 malformed input, 2 invalid state, 3 negative
//! decision (`decide` only), 4 disagreement with the oracle beyond the
//! margin band (`oracle-check` only).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use locgauss::criteria::{
    accessible_region, compare, decide_general, decide_local_1, decide_local_2, linspace,
    DecideOptions, DegenerateMode, TransformDecision, Witness, DEFAULT_TOL,
};
use locgauss::gmaps::MapFile;
use locgauss::oracle::{region_scan_decide, ScanConfig};
use locgauss::states::{
    mat2_to_rows, mat4_to_rows, reduce_to_normal_form, CovarianceMatrix, StateFile,
};
use locgauss::{Error, InvariantVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_INVALID_STATE: i32 = 2;
pub const EXIT_IMPOSSIBLE: i32 = 3;
pub const EXIT_DISAGREEMENT: i32 = 4;

/// Oracle disagreements with `|margin|` below this are expected.
pub const MARGIN_BAND: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Malformed(String),
    #[error("{0}")]
    InvalidState(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Malformed(_) | CliError::Io(_) => EXIT_MALFORMED,
            CliError::InvalidState(_) => EXIT_INVALID_STATE,
        }
    }
}

/// Library errors on a state are the state's fault unless the file itself
/// could not be understood.
fn state_error(path: &Path, e: Error) -> CliError {
    match e {
        Error::Format(msg) => CliError::Malformed(format!("{}: {msg}", path.display())),
        other => CliError::InvalidState(format!("{}: {other}", path.display())),
    }
}

fn request_error(e: Error) -> CliError {
    CliError::Malformed(e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "locgauss",
    version,
    about = "Convertibility of two-mode Gaussian states under local Gaussian operations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a state file and print its invariants.
    Validate { file: PathBuf },
    /// Print the invariant vector of a state.
    Invariants { file: PathBuf },
    /// Print local symplectic blocks bringing a state to normal form.
    Reduce { file: PathBuf },
    /// Decide whether one state can be turned into another.
    Decide {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        /// Restrict the operation to one mode.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), conflicts_with = "general")]
        local: Option<u8>,
        /// Operations on both modes (the default).
        #[arg(long)]
        general: bool,
        #[command(flatten)]
        opts: DecisionFlags,
    },
    /// Order two states by convertibility.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        opts: DecisionFlags,
    },
    /// Write the grid of targets reachable by operations on mode 1 as CSV.
    Region {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        xi1pp: f64,
        #[arg(long, allow_negative_numbers = true)]
        xmin: f64,
        #[arg(long, allow_negative_numbers = true)]
        xmax: f64,
        #[arg(long, allow_negative_numbers = true)]
        ymin: f64,
        #[arg(long, allow_negative_numbers = true)]
        ymax: f64,
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the general decision with a brute-force grid scan.
    OracleCheck {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long, default_value_t = 1024)]
        nx: usize,
        #[arg(long, default_value_t = 1024)]
        ny: usize,
        #[command(flatten)]
        opts: DecisionFlags,
    },
}

#[derive(Args, Debug)]
struct DecisionFlags {
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Closed-form degenerate inequalities only (default).
    #[arg(long, conflicts_with = "reflexive_closure")]
    strict: bool,
    /// Also accept every state as reachable from itself.
    #[arg(long)]
    reflexive_closure: bool,
}

impl DecisionFlags {
    fn options(&self) -> DecideOptions {
        let mode = if self.reflexive_closure {
            DegenerateMode::ReflexiveClosure
        } else {
            DegenerateMode::Strict
        };
        DecideOptions {
            tol: self.tol,
            mode,
        }
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() {
                EXIT_MALFORMED
            } else {
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn read_state_file(path: &Path) -> Result<StateFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    StateFile::parse(&text).map_err(|e| state_error(path, e))
}

fn load_state(path: &Path) -> Result<(CovarianceMatrix, InvariantVector), CliError> {
    let gamma = read_state_file(path)?
        .to_state()
        .map_err(|e| state_error(path, e))?;
    let xi = gamma.invariants().map_err(|e| state_error(path, e))?;
    Ok((gamma, xi))
}

fn print_json(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(value).expect("json values serialise")
    )?;
    Ok(())
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::Intersection { x, y } => json!({ "kind": "intersection", "x": x, "y": y }),
        Witness::Local1(system) => json!({
            "kind": "local1",
            "m1": mat2_to_rows(&system.m1),
            "g1": mat2_to_rows(&system.g1),
            "m2": mat2_to_rows(&system.m2),
            "theta": system.theta,
            "map": MapFile::from(&system.assemble()),
        }),
        Witness::Map(map) => json!({ "kind": "map", "map": MapFile::from(map) }),
        Witness::Identity => json!({ "kind": "identity" }),
    }
}

fn decision_json(d: &TransformDecision, from: &InvariantVector, to: &InvariantVector) -> Value {
    json!({
        "possible": d.possible,
        "margin": d.margin,
        "route": d.route,
        "witness": d.witness.as_ref().map(witness_json),
        "from_xi": from.to_array(),
        "to_xi": to.to_array(),
    })
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Validate { file } => {
            let state = read_state_file(&file)?;
            let checked = state.to_state().and_then(|g| g.invariants());
            match checked {
                Ok(xi) => {
                    print_json(out, &json!({ "valid": true, "xi": xi.to_array() }))?;
                    Ok(EXIT_OK)
                }
                Err(Error::Format(msg)) => Err(CliError::Malformed(msg)),
                Err(e) => {
                    print_json(out, &json!({ "valid": false, "error": e.to_string() }))?;
                    Ok(EXIT_INVALID_STATE)
                }
            }
        }
        Command::Invariants { file } => {
            let (_, xi) = load_state(&file)?;
            print_json(out, &json!({ "xi": xi.to_array() }))?;
            Ok(EXIT_OK)
        }
        Command::Reduce { file } => {
            let (gamma, xi) = load_state(&file)?;
            let red = reduce_to_normal_form(&gamma).map_err(|e| state_error(&file, e))?;
            print_json(
                out,
                &json!({
                    "s1": mat2_to_rows(&red.s1),
                    "s2": mat2_to_rows(&red.s2),
                    "normal_form": mat4_to_rows(red.gamma_nf.matrix()),
                    "xi": xi.to_array(),
                }),
            )?;
            Ok(EXIT_OK)
        }
        Command::Decide {
            from,
            to,
            local,
            general: _,
            opts,
        } => {
            let (_, a) = load_state(&from)?;
            let (_, b) = load_state(&to)?;
            let opts = opts.options();
            let decision = match local {
                Some(1) => decide_local_1(&a, &b, &opts),
                Some(_) => decide_local_2(&a, &b, &opts),
                None => decide_general(&a, &b, &opts),
            }
            .map_err(request_error)?;
            print_json(out, &decision_json(&decision, &a, &b))?;
            Ok(if decision.possible {
                EXIT_OK
            } else {
                EXIT_IMPOSSIBLE
            })
        }
        Command::Compare { a, b, opts } => {
            let (_, xa) = load_state(&a)?;
            let (_, xb) = load_state(&b)?;
            let relation = compare(&xa, &xb, &opts.options()).map_err(request_error)?;
            print_json(out, &json!({ "relation": relation }))?;
            Ok(EXIT_OK)
        }
        Command::Region {
            state,
            xi1pp,
            xmin,
            xmax,
            ymin,
            ymax,
            nx,
            ny,
            out: path,
        } => {
            let (_, xi) = load_state(&state)?;
            if nx == 0 || ny == 0 {
                return Err(CliError::Malformed(
                    "grid needs at least one point per axis".into(),
                ));
            }
            let grid_x = linspace(xmin, xmax, nx);
            let grid_y = linspace(ymin, ymax, ny);
            let region = accessible_region(&xi, xi1pp, &grid_x, &grid_y).map_err(request_error)?;
            let csv = region.to_csv();
            match path {
                Some(p) => std::fs::write(p, csv)?,
                None => out.write_all(csv.as_bytes())?,
            }
            Ok(EXIT_OK)
        }
        Command::OracleCheck {
            from,
            to,
            nx,
            ny,
            opts,
        } => {
            let (_, a) = load_state(&from)?;
            let (_, b) = load_state(&to)?;
            let opts = opts.options();
            let decision = decide_general(&a, &b, &opts).map_err(request_error)?;
            let cfg = ScanConfig::new(nx, ny, opts.tol).map_err(request_error)?;
            // the scan covers correlated sources and targets only
            let oracle = match region_scan_decide(&a, &b, &cfg) {
                Ok(v) => Some(v),
                Err(Error::ZeroCorrelation) => None,
                Err(e) => return Err(request_error(e)),
            };
            let agree = oracle.map(|o| o == decision.possible);
            let within_band = decision.margin.abs() < MARGIN_BAND;
            print_json(
                out,
                &json!({
                    "decision": decision.possible,
                    "oracle": oracle,
                    "agree": agree,
                    "margin": decision.margin,
                    "within_band": within_band,
                    "route": decision.route,
                }),
            )?;
            Ok(if agree == Some(false) && !within_band {
                EXIT_DISAGREEMENT
            } else {
                EXIT_OK
            })
        }
    }
}
