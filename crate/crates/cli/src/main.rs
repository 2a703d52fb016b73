use std::path::PathBuf;
use std::process::ExitCode;

use chr_cli::{convert_units, parse_config, run_study, Format, RunOptions, Study, Unit};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Phase-space Cherenkov emission studies.
#[derive(Debug, Parser)]
#[command(name = "chr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spreading time t_d and its inverse against the photon angle.
    SpreadingTime(RunArgs),
    /// Photon angles where 1/t_d vanishes.
    SingularAngles(RunArgs),
    /// Effective correlation radius along a chosen direction.
    CorrelationRadius(RunArgs),
    /// Flash duration sigma_t.
    FlashDuration(RunArgs),
    /// Arrival-time shift on a transverse-momentum triangle.
    ArrivalShift(RunArgs),
    /// Arrival-time shift in a dispersive medium.
    DispersionScan(RunArgs),
    /// 2-D Wigner-function map.
    WignerMap(RunArgs),
    /// Wigner maps for a set of final-electron momentum offsets.
    DeltaPScan(RunArgs),
    /// Free electron density at a fixed time.
    Snapshot(RunArgs),
    /// Validate a scenario file and print its canonical form.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Convert a value between units.
    #[command(allow_negative_numbers = true)]
    Convert { value: f64, from: Unit, to: Unit },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for map evaluation.
    #[arg(long, env = "CHR_WORKERS")]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "csv+svg")]
    format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

fn study_of(command: &Command) -> Option<(Study, &RunArgs)> {
    let pair = match command {
        Command::SpreadingTime(a) => (Study::SpreadingTime, a),
        Command::SingularAngles(a) => (Study::SingularAngles, a),
        Command::CorrelationRadius(a) => (Study::CorrelationRadius, a),
        Command::FlashDuration(a) => (Study::FlashDuration, a),
        Command::ArrivalShift(a) => (Study::ArrivalShift, a),
        Command::DispersionScan(a) => (Study::DispersionScan, a),
        Command::WignerMap(a) => (Study::WignerMap, a),
        Command::DeltaPScan(a) => (Study::DeltaPScan, a),
        Command::Snapshot(a) => (Study::Snapshot, a),
        Command::Check { .. } | Command::Convert { .. } => return None,
    };
    Some(pair)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match &cli.command {
        Command::Convert { value, from, to } => {
            let converted = convert_units(*value, *from, *to).map_err(|e| e.to_string())?;
            println!("{}", chr_cli::output::format_number(converted));
            return Ok(ExitCode::SUCCESS);
        }
        Command::Check { config } => {
            let parsed = parse_config(config, None).map_err(|e| format!("{}:\n{e}", config.display()))?;
            print!("{}", parsed.to_canonical());
            return Ok(ExitCode::SUCCESS);
        }
        _ => {}
    }
    let (study, args) = study_of(&cli.command).expect("study subcommand");
    if args.workers == Some(0) {
        return Err("--workers must be at least 1".to_owned());
    }
    let mut config =
        parse_config(&args.config, Some(study)).map_err(|e| format!("{}:\n{e}", args.config.display()))?;
    if config.output_name.is_none() {
        config.output_name = args.config.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    let options = RunOptions {
        out_dir: args.out_dir.clone(),
        workers: args.workers,
        format: match args.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::CsvSvg => Format::CsvSvg,
        },
        base_dir: args
            .config
            .parent()
            .map(PathBuf::from)
            .unwrap_or_default(),
    };
    let report = run_study(&config, &options).map_err(|e| e.to_string())?;
    for file in &report.files {
        eprintln!("wrote {}", file.display());
    }
    if report.omitted > 0 {
        eprintln!("{} sweep point(s) skipped", report.omitted);
    }
    if report.flagged() {
        eprintln!("warning: flagged results ({})", report.flags);
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
