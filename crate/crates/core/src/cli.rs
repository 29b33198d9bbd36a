//! Command-line front end. Exit codes: 0 success, 2 configuration or
//! validation error, 1 runtime or I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config;
use crate::emit::write_bundle;
use crate::experiment::{self, preset_la, preset_li, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "plasmodium", version, about = "Slime mould lateral inhibition / activation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a built-in preset.
    Preset {
        #[arg(value_enum)]
        name: PresetName,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetName {
    Li,
    La,
}

/// Parse `args` (including the program name) and execute, reporting to the
/// given streams. Returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match cli.command {
        Command::Run { config, seed, out: dir } => match load(&config, err) {
            Ok(mut c) => {
                if let Some(s) = seed {
                    c.seed = s;
                }
                execute(&c, &dir, out, err)
            }
            Err(code) => code,
        },
        Command::Preset { name, out: dir, seed } => {
            let mut c = match name {
                PresetName::Li => preset_li(),
                PresetName::La => preset_la(),
            };
            if let Some(s) = seed {
                c.seed = s;
            }
            execute(&c, &dir, out, err)
        }
        Command::Validate { config } => match load(&config, err) {
            Ok(c) => match report_violations(&c, err) {
                EXIT_OK => {
                    let _ = writeln!(out, "{}: ok", config.display());
                    EXIT_OK
                }
                code => code,
            },
            Err(code) => code,
        },
    }
}

/// [`run_cli`] on the process's standard streams.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn load(path: &Path, err: &mut dyn Write) -> Result<ExperimentConfig, i32> {
    config::load(path).map_err(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_CONFIG
    })
}

fn report_violations(c: &ExperimentConfig, err: &mut dyn Write) -> i32 {
    let violations = experiment::validate(c);
    if violations.is_empty() {
        return EXIT_OK;
    }
    for v in &violations {
        let _ = writeln!(err, "violation: {v}");
    }
    EXIT_CONFIG
}

fn execute(c: &ExperimentConfig, dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let code = report_violations(c, err);
    if code != EXIT_OK {
        return code;
    }
    let record = match experiment::run(c) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    match write_bundle(&record, dir) {
        Ok(summary) => {
            let _ = writeln!(out, "{summary}");
            let _ = writeln!(out, "output: {}", dir.display());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_cli(
            std::iter::once("plasmodium").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn missing_config_is_exit_2() {
        let (code, _, err) = call(&["run", "--config", "/nonexistent/missing.cfg"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("missing.cfg"));
    }

    #[test]
    fn usage_errors_are_exit_2() {
        assert_eq!(call(&["bogus"]).0, 2);
        assert_eq!(call(&["preset", "xx"]).0, 2);
        assert_eq!(call(&[]).0, 2);
    }

    #[test]
    fn help_is_exit_0() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("preset"));
    }

    #[test]
    fn validate_reports_violations() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.cfg");
        std::fs::write(&bad, "preset = li\ndecay = 1.5\n").unwrap();
        let (code, _, err) = call(&["validate", "--config", bad.to_str().unwrap()]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("decay"));

        let good = dir.path().join("good.cfg");
        std::fs::write(&good, "preset = la\n").unwrap();
        let (code, out, _) = call(&["validate", "--config", good.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("ok"));
    }

    #[test]
    fn unwritable_output_is_exit_1() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("small.cfg");
        std::fs::write(
            &cfg,
            "preset = li\nwidth = 30\nheight = 12\nborder_rows = 2\npopulation = 50\ntotal_steps = 20\n",
        )
        .unwrap();
        // A regular file where the output directory should be.
        let blocker = dir.path().join("blocker");
        std::fs::write(&blocker, "").unwrap();
        let (code, _, err) = call(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            blocker.join("out").to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_RUNTIME, "{err}");
    }
}
