use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use jext::cli::{parse_config, run, write_report, CliError, Command, Format, Report, EXIT_INPUT, EXIT_NUMERIC};

/// Extensions of non-negative block Jacobi operators.
#[derive(Debug, Parser)]
#[command(name = "jext", version)]
struct Args {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output file; CSV writes one `<stem>-<table>.<ext>` per table.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn threads() -> Option<usize> {
    std::env::var("JEXT_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn execute(args: &Args) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = parse_config(&text)?;
    Ok(run(&cfg, args.command))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    if let Some(n) = threads() {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = std::panic::catch_unwind(|| execute(&args));
    let code = match outcome {
        Ok(Ok(report)) => match write_report(&report, args.format, args.out.as_deref()) {
            Ok(_) => report.exit_code,
            Err(e) => {
                eprintln!("jext: {e}");
                e.exit_code()
            }
        },
        Ok(Err(e)) => {
            eprintln!("jext: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("jext: internal failure");
            EXIT_NUMERIC
        }
    };
    ExitCode::from(code as u8)
}
