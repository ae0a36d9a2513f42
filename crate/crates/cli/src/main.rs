use clap::{Parser, ValueEnum};
use pinlab_cli::{dispatch, exit_code, parse_config, CliError, ConfigError, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Interface pinning laboratory: percolation surfaces, cell solutions, supersolution
/// certificates and forward evolution in random obstacle fields.
#[derive(Parser, Debug)]
#[command(name = "pinlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// `key = value` file; `#` starts a comment.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one key (repeatable); applied after the file and PINLAB_SEED.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Seed; takes precedence over PINLAB_SEED and the config file.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    output_dir: Option<PathBuf>,

    #[arg(long, value_parser = ["csv", "jsonl"])]
    format: Option<String>,

    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Command {
    Percolate,
    Cell,
    Build,
    Verify,
    Evolve,
    Scan,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Percolate => Subcommand::Percolate,
            Command::Cell => Subcommand::Cell,
            Command::Build => Subcommand::Build,
            Command::Verify => Subcommand::Verify,
            Command::Evolve => Subcommand::Evolve,
            Command::Scan => Subcommand::Scan,
        }
    }
}

fn config_text(cli: &Cli) -> Result<String, CliError> {
    let mut text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut push = |k: &str, v: &str| {
        text.push('\n');
        text.push_str(&format!("{k} = {v}"));
    };
    if let Ok(seed) = std::env::var("PINLAB_SEED") {
        push("seed", seed.trim());
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .filter(|(_, v)| !v.contains(['\n', '#']))
            .ok_or_else(|| ConfigError::Syntax { line: 0, text: kv.clone() })?;
        push(k.trim(), v.trim());
    }
    if let Some(seed) = cli.seed {
        push("seed", &seed.to_string());
    }
    if let Some(dir) = &cli.output_dir {
        push("output_dir", &dir.to_string_lossy());
    }
    if let Some(f) = &cli.format {
        push("format", f);
    }
    if let Some(t) = cli.threads {
        push("threads", &t.to_string());
    }
    Ok(text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config_text(&cli)
        .and_then(|text| Ok(parse_config(&text, Some(cli.command.into()))?))
        .and_then(|cfg| dispatch(&cfg));
    if let Err(e) = &result {
        eprintln!("pinlab: {e}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
