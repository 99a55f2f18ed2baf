use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use meshmorph::harness::{run_case, run_sweep, write_case_outputs, Config, OutputFormat};
use meshmorph::io::{read_vtk, write_element_metrics};
use meshmorph::quality::quality_report;
use meshmorph::sensitivity::{verify_fd, SensitivityBlocks, DEFAULT_H_SCHEDULE};
use meshmorph::yeoh::deform_hyperelastic;
use meshmorph::Error;

#[derive(Parser)]
#[command(name = "meshmorph", version, about = "Mesh deformation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Reserved; the solvers are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run every model section of a config once.
    Run { config: PathBuf },
    /// Run the [sweep] grid of a config.
    Sweep { config: PathBuf },
    /// Finite-difference check of the sensitivity blocks for the Yeoh solve.
    VerifySensitivity {
        config: PathBuf,
        /// Also dump the blocks as Matrix Market files.
        #[arg(long)]
        dump_matrices: bool,
    },
    /// Quality of a deformed VTK mesh against its reference.
    Quality { vtk_in: PathBuf, vtk_ref: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Vtk,
    Both,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Vtk => OutputFormat::Vtk,
            Format::Both => OutputFormat::Both,
        }
    }
}

enum Failure {
    Config(Error),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_)
            | Error::InvalidSpec(_)
            | Error::InvalidMotion(_)
            | Error::SweepTooLarge { .. }
            | Error::Parse { .. } => Failure::Config(e),
            e => Failure::Run(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = cli.seed;
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { config } => run(config, &cli.out, cli.format.into()),
        Command::Sweep { config } => sweep(config, &cli.out),
        Command::VerifySensitivity {
            config,
            dump_matrices,
        } => verify(config, &cli.out, *dump_matrices),
        Command::Quality { vtk_in, vtk_ref } => quality(vtk_in, vtk_ref, &cli.out),
    }
}

fn run(path: &Path, out: &Path, format: OutputFormat) -> Result<(), Failure> {
    let config = Config::load(path).map_err(Failure::Config)?;
    let result = run_case(&config)?;
    let written = write_case_outputs(&config, &result, out, format)?;
    for (e, _) in &result.rows {
        match e.report() {
            Some(r) => println!(
                "{:<15} min_skewness {:.4}  area_ratio [{:.4}, {:.4}]  inverted {}",
                e.model.name(),
                r.min_skewness,
                r.min_area_ratio,
                r.max_area_ratio,
                r.inverted_count()
            ),
            None => println!("{:<15} {}", e.model.name(), e.status()),
        }
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn sweep(path: &Path, out: &Path) -> Result<(), Failure> {
    let config = Config::load(path).map_err(Failure::Config)?;
    config.validate()?;
    let Some(_) = &config.sweep else {
        return Err(Error::InvalidConfig("no [sweep] section in config".into()).into());
    };
    let prepared = config.prepare()?;
    let result = run_sweep(&config, &prepared)?;
    fs::create_dir_all(out).map_err(Error::from)?;
    let file = out.join(format!(
        "sweep_{}_{}.csv",
        result.problem,
        result.model.name()
    ));
    result.write_csv(fs::File::create(&file).map_err(Error::from)?)?;
    println!("{} points, {} failed", result.points.len(), result.failed());
    if let Some(best) = result.best() {
        let params: Vec<String> = result
            .keys
            .iter()
            .zip(&best.values)
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        println!(
            "best min_skewness {:.4} at {}",
            best.evaluation.min_skewness().unwrap_or(f64::NAN),
            params.join(" ")
        );
    }
    println!("wrote {}", file.display());
    Ok(())
}

fn verify(path: &Path, out: &Path, dump: bool) -> Result<(), Failure> {
    let config = Config::load(path).map_err(Failure::Config)?;
    config.validate()?;
    let prepared = config.prepare()?;
    let settings = config.model_settings();
    let (_, state) = deform_hyperelastic(&prepared.mesh, &prepared.motion, &settings.yeoh)?;
    let blocks = SensitivityBlocks::compute(&state)?;
    let report = verify_fd(&blocks, &state, &DEFAULT_H_SCHEDULE)?;
    fs::create_dir_all(out).map_err(Error::from)?;
    let file = out.join("fd_report.csv");
    report.write_csv(fs::File::create(&file).map_err(Error::from)?)?;
    println!("wrote {}", file.display());
    if dump {
        for (name, m) in [
            ("tangent", &blocks.tangent),
            ("dD_dx", &blocks.d_dx),
            ("dD_du", &blocks.d_du),
        ] {
            let p = out.join(format!("{name}.mtx"));
            m.write_matrix_market(fs::File::create(&p).map_err(Error::from)?)?;
            println!("wrote {}", p.display());
        }
    }
    for block in ["dD_dx", "dD_du"] {
        if let Some(e) = report.best(block) {
            println!(
                "{block}: relative error {:.3e} at h = {:e} ({})",
                e.relative_error,
                e.h,
                if e.pass { "pass" } else { "FAIL" }
            );
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Run("finite-difference check failed".into()))
    }
}

fn quality(vtk_in: &Path, vtk_ref: &Path, out: &Path) -> Result<(), Failure> {
    let (deformed, _) = read_vtk(vtk_in)?;
    let (reference, _) = read_vtk(vtk_ref)?;
    let report = quality_report(&deformed, &reference, None)?;
    println!(
        "min_skewness {:.6}  min_area_ratio {:.6}  max_area_ratio {:.6}  inverted {}",
        report.min_skewness,
        report.min_area_ratio,
        report.max_area_ratio,
        report.inverted_count()
    );
    fs::create_dir_all(out).map_err(Error::from)?;
    let file = out.join("quality.csv");
    write_element_metrics(fs::File::create(&file).map_err(Error::from)?, &report, None)?;
    println!("wrote {}", file.display());
    Ok(())
}
