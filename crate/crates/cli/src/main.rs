mod args;
mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, Format};
use output::{digest_inputs, pretty, render_csv, Failure, Io, RunManifest};

fn manifest_path(cli: &Cli) -> Option<PathBuf> {
    if let Some(path) = &cli.global.manifest {
        return Some(path.clone());
    }
    let out = cli.global.out.as_ref()?;
    if matches!(cli.command, Command::LowerBound { .. }) {
        return Some(out.join("manifest.json"));
    }
    let mut name = out.file_name()?.to_os_string();
    name.push(".manifest.json");
    Some(out.with_file_name(name))
}

/// Commands whose `--out` names an artifact rather than the report.
fn report_to_stdout(command: &Command) -> bool {
    matches!(command, Command::Learn { .. } | Command::LowerBound { .. } | Command::Gap { .. })
}

fn execute(cli: &Cli, io: &mut Io) -> Result<(), Failure> {
    let outcome = commands::execute(&cli.command, &cli.global, io)?;
    let text = match cli.global.format {
        Format::Json => pretty(&outcome.report),
        Format::Csv => render_csv(&outcome),
    };
    match (&cli.global.out, report_to_stdout(&cli.command)) {
        (Some(path), false) => io.write(path, &text)?,
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Input(format!("stdout: {e}")))?;
        }
    }
    outcome.status
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    if let Some(jobs) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot start {jobs} worker threads: {e}");
            return ExitCode::from(64);
        }
    }

    let mut io = Io::default();
    let result = execute(&cli, &mut io);
    let code = result.as_ref().err().map_or(0, Failure::code);
    if let Err(failure) = &result {
        eprintln!("error: {}", failure.message());
    }

    if let Some(path) = manifest_path(&cli) {
        let manifest = RunManifest {
            subcommand: cli.command.name(),
            version: env!("CARGO_PKG_VERSION"),
            seed: cli.global.seed.unwrap_or(0),
            config: &cli,
            inputs: digest_inputs(&io.inputs),
            outputs: io.outputs.clone(),
            exit_code: code,
        };
        let text = pretty(&output::to_json(&manifest));
        if let Err(e) = std::fs::write(&path, text) {
            eprintln!("error: cannot write manifest {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(code as u8)
}
