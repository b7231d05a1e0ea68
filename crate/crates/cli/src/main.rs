use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use photonpair::design::{self, GvmCondition};
use photonpair::io;
use photonpair::pipeline::{self, OutputSelection, PipelineOptions};
use photonpair::scenario::{Auto, ScenarioConfig};
use photonpair::{Dispersion, Error, Material, SellmeierTable};

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_COMPUTE: u8 = 4;
const EXIT_IO: u8 = 5;

const DATA_DIR_VAR: &str = "PHOTONPAIR_DATA_DIR";

/// Heralded single-photon source simulation and design.
#[derive(Parser)]
#[command(name = "photonpair", version)]
struct Cli {
    /// Worker threads for the numerical stages (default: one per core).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and print its JSON report.
    Report(RunArgs),
    /// Write the Wigner grid, contours and marginals of a scenario as CSV.
    Wigner(RunArgs),
    /// Solve for a group-velocity-matched degenerate wavelength and cut angle.
    Design(DesignArgs),
    /// Run a scenario over a grid of crystal lengths and pump bandwidths.
    Scan(ScanArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, short)]
    scenario: PathBuf,
    /// Output directory (overrides `output_dir` in the scenario).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long, value_parser = parse_level)]
    contour_level: Option<f64>,
    /// Write report.json.
    #[arg(long)]
    json: bool,
    /// Write the CSV data files.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct DesignArgs {
    material: Material,
    condition: GvmCondition,
    /// Degenerate wavelength search range `lo:hi` in nm.
    #[arg(value_parser = parse_range)]
    range: (f64, f64),
    /// Crystal length for the reported walkoff times, mm.
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of CSV.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ScanArgs {
    /// Base scenario; defaults to BBO type II at 800 nm.
    #[arg(long, short)]
    scenario: Option<PathBuf>,
    /// Crystal lengths, mm.
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<f64>>,
    /// Pump bandwidths (FWHM), nm.
    #[arg(long, value_delimiter = ',')]
    fwhms: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid_n: Option<usize>,
    /// Print JSON instead of CSV.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    csv: bool,
}

fn parse_level(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: `{s}`"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1), got {v}"))
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("not a number: `{x}`"));
    let (lo, hi) = (num(lo)?, num(hi)?);
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => EXIT_PARSE,
        Error::InvalidParameter { .. } => EXIT_USAGE,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_COMPUTE,
    }
}

fn dispersion() -> photonpair::Result<Dispersion> {
    match std::env::var_os(DATA_DIR_VAR) {
        Some(dir) => Ok(Dispersion::new(SellmeierTable::from_dir(Path::new(&dir))?)),
        None => Ok(Dispersion::default()),
    }
}

fn load(args: &RunArgs) -> photonpair::Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(&args.scenario)?;
    if let Some(n) = args.grid_n {
        cfg.grid_n = Auto::Value(n);
    }
    if let Some(l) = args.contour_level {
        cfg.contour_level = l;
    }
    Ok(cfg)
}

/// Neither flag means both.
fn selection(json: bool, csv: bool) -> OutputSelection {
    if json || csv {
        OutputSelection { csv, json }
    } else {
        OutputSelection { csv: true, json: true }
    }
}

fn stdout_line(text: &str) -> photonpair::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn report(args: &RunArgs) -> photonpair::Result<()> {
    let disp = dispersion()?;
    let cfg = load(args)?;
    let mut out = pipeline::run(&disp, &cfg, PipelineOptions::default())?;
    if let Some(dir) = args.out.as_ref().or(cfg.output_dir.as_ref()) {
        pipeline::write_outputs(&mut out, dir, selection(args.json, args.csv))?;
    }
    stdout_line(&out.report.to_json()?)
}

fn wigner(args: &RunArgs) -> photonpair::Result<()> {
    let disp = dispersion()?;
    let mut cfg = load(args)?;
    cfg.numerical = true;
    cfg.schmidt = false;
    cfg.joint_temporal = false;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let which = OutputSelection {
        csv: true,
        json: args.json,
    };
    let mut out = pipeline::run(&disp, &cfg, PipelineOptions::default())?;
    for p in pipeline::write_outputs(&mut out, &dir, which)? {
        stdout_line(&p.display().to_string())?;
    }
    Ok(())
}

fn design(args: &DesignArgs) -> photonpair::Result<()> {
    let disp = dispersion()?;
    if !(args.length > 0.0 && args.length.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "length",
            reason: format!("must be positive, got {}", args.length),
        });
    }
    let (lo, hi) = args.range;
    let sol = design::find(&disp, args.material, args.condition, lo, hi, args.length)?;
    let which = selection(args.json, args.csv);
    let json = serde_json::to_string_pretty(&sol).map_err(|e| Error::Numeric(e.to_string()))?;
    let csv = io::records_csv(std::slice::from_ref(&sol))?;
    if let Some(d) = &args.out {
        if which.json {
            io::write_json(&d.join(io::DESIGN_JSON_FILE), &sol)?;
        }
        if which.csv {
            io::write_atomic(&d.join(io::DESIGN_CSV_FILE), csv.as_bytes())?;
        }
    }
    if args.json {
        stdout_line(&json)
    } else {
        stdout_line(csv.trim_end())
    }
}

fn scan(args: &ScanArgs) -> photonpair::Result<()> {
    let disp = dispersion()?;
    let mut base = match &args.scenario {
        Some(p) => ScenarioConfig::load(p)?,
        None => design::default_scan_base(),
    };
    if let Some(n) = args.grid_n {
        base.grid_n = Auto::Value(n);
    }
    let lengths = args.lengths.clone().unwrap_or_else(|| design::DEFAULT_SCAN_LENGTHS_MM.to_vec());
    let fwhms = args.fwhms.clone().unwrap_or_else(|| design::DEFAULT_SCAN_FWHMS_NM.to_vec());
    let table = design::scan(&disp, &base, &lengths, &fwhms, PipelineOptions::default())?;
    let which = selection(args.json, args.csv);
    let csv = io::records_csv(&table.records)?;
    if let Some(d) = &args.out {
        if which.json {
            io::write_json(&d.join(io::SCAN_JSON_FILE), &table)?;
        }
        if which.csv {
            io::write_atomic(&d.join(io::SCAN_CSV_FILE), csv.as_bytes())?;
        }
    }
    if args.json {
        let json = serde_json::to_string_pretty(&table).map_err(|e| Error::Numeric(e.to_string()))?;
        stdout_line(&json)
    } else {
        stdout_line(csv.trim_end())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match &cli.command {
        Command::Report(a) => report(a),
        Command::Wigner(a) => wigner(a),
        Command::Design(a) => design(a),
        Command::Scan(a) => scan(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
