use std::path::PathBuf;
use std::process::ExitCode;

use sturmtrace_cli::commands::{
    cmd_condnum, cmd_forward, cmd_invert, cmd_noise_sweep, cmd_traces, output_dir,
};
use sturmtrace_cli::{CliError, ExperimentConfig};

const USAGE: &str = "\
sturmtrace - string density reconstruction from eigenvalue data

USAGE:
  sturmtrace <COMMAND> --config <PATH> [--out <DIR>] [--spectrum <PATH>]

COMMANDS:
  forward      Solve the forward problem; write spectrum.csv
  traces       Build Chebyshev trace targets; write traces.csv
  invert       Reconstruct the density; write result.json, density.csv, residuals.csv
  condnum      Condition-number study of the trace Jacobian; write condnum.csv
  noise-sweep  Reconstruct under seeded noise; write noise_sweep.csv

OPTIONS:
  --config <PATH>    Experiment configuration file (required)
  --out <DIR>        Output directory (default: the config's output_dir, or ./out)
  --spectrum <PATH>  Eigenvalue CSV for traces/invert (default: solve internally)
  --help             Show this help

EXIT CODES:
  0  success
  1  usage, configuration, or I/O error
  2  numerical failure
";

struct Args {
    command: String,
    config: PathBuf,
    out: Option<PathBuf>,
    spectrum: Option<PathBuf>,
}

fn parse_args(mut argv: std::env::Args) -> Result<Args, CliError> {
    let _ = argv.next();
    let command = match argv.next() {
        Some(cmd) if cmd == "--help" || cmd == "-h" => {
            print!("{USAGE}");
            std::process::exit(0);
        }
        Some(cmd) => cmd,
        None => return Err(CliError::usage("missing command".into())),
    };
    let mut config = None;
    let mut out = None;
    let mut spectrum = None;
    while let Some(flag) = argv.next() {
        match flag.as_str() {
            "--config" => config = Some(PathBuf::from(next_value(&mut argv, "--config")?)),
            "--out" => out = Some(PathBuf::from(next_value(&mut argv, "--out")?)),
            "--spectrum" => spectrum = Some(PathBuf::from(next_value(&mut argv, "--spectrum")?)),
            "--help" | "-h" => {
                print!("{USAGE}");
                std::process::exit(0);
            }
            other => return Err(CliError::usage(format!("unknown flag '{other}'"))),
        }
    }
    let config = config.ok_or_else(|| CliError::usage("missing --config <PATH>".into()))?;
    Ok(Args {
        command,
        config,
        out,
        spectrum,
    })
}

fn next_value(argv: &mut std::env::Args, flag: &str) -> Result<String, CliError> {
    argv.next()
        .ok_or_else(|| CliError::usage(format!("{flag} needs a value")))
}

fn run() -> Result<(), CliError> {
    let args = parse_args(std::env::args())?;
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let cfg = ExperimentConfig::parse(&text)?;
    let out = output_dir(&cfg, args.out.as_deref());
    let spectrum = args.spectrum.as_deref();
    match args.command.as_str() {
        "forward" => cmd_forward(&cfg, &out),
        "traces" => cmd_traces(&cfg, &out, spectrum),
        "invert" => cmd_invert(&cfg, &out, spectrum),
        "condnum" => cmd_condnum(&cfg, &out),
        "noise-sweep" => cmd_noise_sweep(&cfg, &out),
        other => Err(CliError::usage(format!(
            "unknown command '{other}' (forward | traces | invert | condnum | noise-sweep)"
        ))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, CliError::Usage(_)) {
                eprintln!("run with --help for usage");
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
