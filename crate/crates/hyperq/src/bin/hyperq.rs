use clap::{Parser, Subcommand, ValueEnum};
use hyperq::cli_reporting::{error_json, export_fixtures, run, to_canonical_string, Command, InputSpec};
use hyperq::HyperqError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hyperq", version, about = "Circuits, stable bases, Steinberg operators and nested-set charts")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Input JSON file (`-` for stdin).
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Output file, or directory for export-fixtures.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Use symbolic / cyclotomic-exact evaluation instead of seeded points.
    #[arg(long, global = true)]
    exact: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Smoothness, circuits, rank-2 flats and fixed points.
    Analyze,
    /// Stable-basis monomials and the transition matrix.
    Stab,
    /// Steinberg operator matrices.
    Steinberg,
    /// Holonomy, commutativity and independence checks.
    Verify,
    /// Zero-dimensional layers and layer posets.
    Layers,
    /// Maximal nested sets and adapted bases.
    Nested,
    /// Chart maps, regularized functions and projective maps.
    Chart,
    /// Boundary extension of the Grassmannian family.
    Extend,
    /// Fan, regularity and stratified charts.
    Fan,
    /// Write the fixture corpus.
    ExportFixtures,
}

fn read_input(path: &Option<PathBuf>) -> Result<String, HyperqError> {
    match path {
        None => Err(HyperqError::InvalidInput("--in is required".into())),
        Some(p) if p.as_os_str() == "-" => {
            std::io::read_to_string(std::io::stdin()).map_err(|e| HyperqError::Io(e.to_string()))
        }
        Some(p) => std::fs::read_to_string(p).map_err(|e| HyperqError::Io(format!("{}: {}", p.display(), e))),
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), HyperqError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| HyperqError::Io(e.to_string())),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn main_inner(cli: &Cli) -> Result<i32, HyperqError> {
    let command = match cli.command {
        Cmd::Analyze => Command::Analyze,
        Cmd::Stab => Command::Stab,
        Cmd::Steinberg => Command::Steinberg,
        Cmd::Verify => Command::Verify,
        Cmd::Layers => Command::Layers,
        Cmd::Nested => Command::Nested,
        Cmd::Chart => Command::Chart,
        Cmd::Extend => Command::Extend,
        Cmd::Fan => Command::Fan,
        Cmd::ExportFixtures => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("fixtures"));
            for p in export_fixtures(&dir)? {
                println!("{}", p.display());
            }
            return Ok(0);
        }
    };
    let text = read_input(&cli.input)?;
    let (spec, sha) = InputSpec::parse(&text)?;
    let report = run(command, &spec, &sha, cli.exact)?;
    let body = match cli.format {
        Format::Json => to_canonical_string(&report.to_json()),
        Format::Csv => report.to_csv(),
    };
    emit(&body, &cli.out)?;
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprint!("{}", to_canonical_string(&error_json(&e)));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
