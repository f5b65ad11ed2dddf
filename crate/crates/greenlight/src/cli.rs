//! Command-line surface.
//!
//! Exit codes: 0 on success, 1 on any validation, parse, or usage error,
//! 2 on an I/O failure.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::compare::{
    compare_report, exhaustive_search, fixed_timer_program, BaselineSpec, CompareError,
    OracleResult,
};
use crate::ga::{
    evolve, EvolutionLog, GaConfig, GaError, Genome, Individual, SearchMode, DEFAULT_GREEN_BOUNDS,
};
use crate::io::{
    emit_plot_data, export_sumo_files, load_scenario, write_atomic, write_generation_log,
    write_vehicle_table, LoadError,
};
use crate::signal::{ParseProgramError, SignalProgram};
use crate::sim::{simulate, Fitness, Scenario, SimError, SimResult};

#[derive(Parser, Debug)]
#[command(
    name = "greenlight",
    version,
    about = "Evolve traffic-light phase programs for one intersection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Duration,
    String,
}

impl From<ModeArg> for SearchMode {
    fn from(mode: ModeArg) -> SearchMode {
        match mode {
            ModeArg::Duration => SearchMode::Duration,
            ModeArg::String => SearchMode::String,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation of a program literal over a scenario.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Program literal, e.g. GGrr:30;yyrr:3;rrGG:30;rryy:3
        #[arg(long)]
        program: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve a program with the genetic algorithm and write run artifacts.
    Evolve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        generations: u32,
        #[arg(long, default_value_t = 20)]
        population: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Duration)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force the fixed-timer family over a green-duration grid.
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
        /// Grid as START..END:STEP (inclusive), e.g. 5..60:5
        #[arg(long, default_value = "5..60:5")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write SUMO plain-XML node/edge/route files for a scenario.
    ExportSumo {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve with defaults, compare against the fixed-timer baseline, and
    /// write all run artifacts.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Invalid(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> CliError {
        match e {
            LoadError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> CliError {
        CliError::Invalid(e.to_string())
    }
}

impl From<ParseProgramError> for CliError {
    fn from(e: ParseProgramError) -> CliError {
        CliError::Invalid(format!("bad --program literal: {e}"))
    }
}

impl From<GaError> for CliError {
    fn from(e: GaError) -> CliError {
        CliError::Invalid(e.to_string())
    }
}

impl From<CompareError> for CliError {
    fn from(e: CompareError) -> CliError {
        CliError::Invalid(e.to_string())
    }
}

/// Parses args, dispatches, and maps every failure to its exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            scenario,
            program,
            out,
        } => {
            let scenario = load_scenario(&scenario)?;
            let program: SignalProgram = program.parse()?;
            let result = simulate(&scenario, &program)?;
            println!("program: {program}");
            println!("fitness: {}", result.fitness);
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                write_vehicle_table(&result, &dir.join("vehicle_table.csv"))?;
                println!("wrote {}", dir.join("vehicle_table.csv").display());
            }
            Ok(())
        }
        Command::Evolve {
            scenario,
            seed,
            generations,
            population,
            mode,
            out,
        } => {
            let scenario = load_scenario(&scenario)?;
            let mut config = GaConfig::new(seed);
            config.generations = generations;
            config.population_size = population;
            config.mode = mode.into();
            let run = run_evolution(&scenario, &config)?;
            print_evolution_summary(&run);
            if let Some(dir) = out {
                write_run_artifacts(&dir, &scenario, &run)?;
            }
            Ok(())
        }
        Command::Oracle {
            scenario,
            grid,
            out,
        } => {
            let scenario = load_scenario(&scenario)?;
            let grid = parse_grid(&grid)?;
            let oracle = exhaustive_search(&scenario, &grid)?;
            println!("best program: {}", oracle.best_program);
            println!("best fitness: {}", oracle.best_fitness);
            println!("table entries: {}", oracle.table.len());
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                write_atomic(
                    &dir.join("oracle_table.tsv"),
                    &oracle_table_to_string(&oracle),
                )?;
                println!("wrote {}", dir.join("oracle_table.tsv").display());
            }
            Ok(())
        }
        Command::ExportSumo { scenario, out } => {
            let scenario = load_scenario(&scenario)?;
            export_sumo_files(&scenario, &out)?;
            println!("wrote SUMO files to {}", out.display());
            Ok(())
        }
        Command::Compare {
            scenario,
            seed,
            out,
        } => {
            let scenario = load_scenario(&scenario)?;
            let config = GaConfig::new(seed);
            let run = run_evolution(&scenario, &config)?;
            print!("{}", run.report_text);
            if let Some(dir) = out {
                write_run_artifacts(&dir, &scenario, &run)?;
            }
            Ok(())
        }
    }
}

/// Everything one evolution run produces; shared by `evolve` and `compare`.
struct EvolutionRun {
    best: Individual,
    log: EvolutionLog,
    best_result: SimResult,
    baseline_fitness: Fitness,
    report_text: String,
}

fn run_evolution(scenario: &Scenario, config: &GaConfig) -> Result<EvolutionRun, CliError> {
    let baseline_program = fixed_timer_program(&BaselineSpec::default());
    let template = Genome::from_program(baseline_program.clone(), DEFAULT_GREEN_BOUNDS)?;
    let (best, log) = evolve(config, scenario, &template)?;
    let best_result = simulate(scenario, &best.genome.program)?;
    let baseline_fitness = simulate(scenario, &baseline_program)?.fitness;
    let report = compare_report(&log, baseline_fitness, best_result.fitness)?;
    Ok(EvolutionRun {
        best,
        log,
        best_result,
        baseline_fitness,
        report_text: report.render(),
    })
}

fn print_evolution_summary(run: &EvolutionRun) {
    println!("best program: {}", run.best.genome.program);
    println!("best fitness: {}", run.best_result.fitness);
    println!("baseline fitness: {}", run.baseline_fitness);
}

fn write_run_artifacts(
    dir: &Path,
    scenario: &Scenario,
    run: &EvolutionRun,
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    write_vehicle_table(&run.best_result, &dir.join("vehicle_table.csv"))?;
    write_generation_log(&run.log, &dir.join("generation_log.csv"))?;
    emit_plot_data(&run.log, &run.baseline_fitness, &dir.join("plot_data.tsv"))?;
    write_atomic(&dir.join("comparison_report.txt"), &run.report_text)?;
    export_sumo_files(scenario, &dir.join("sumo"))?;
    println!("wrote run artifacts to {}", dir.display());
    Ok(())
}

fn oracle_table_to_string(oracle: &OracleResult) -> String {
    let mut out = String::from("g_ns\tg_ew\tunserved\tmakespan\tmean_total\n");
    for e in &oracle.table {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            e.green_ns, e.green_ew, e.fitness.unserved, e.fitness.makespan, e.fitness.mean_total
        ));
    }
    out
}

/// Parses START..END:STEP into the inclusive arithmetic progression.
fn parse_grid(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = || {
        CliError::Invalid(format!(
            "bad --grid `{text}`, expected START..END:STEP like 5..60:5"
        ))
    };
    let (range, step) = text.split_once(':').ok_or_else(bad)?;
    let (start, end) = range.split_once("..").ok_or_else(bad)?;
    let start: u32 = start.parse().map_err(|_| bad())?;
    let end: u32 = end.parse().map_err(|_| bad())?;
    let step: u32 = step.parse().map_err(|_| bad())?;
    if start < 1 || step < 1 || start > end {
        return Err(bad());
    }
    Ok((start..=end).step_by(step as usize).collect())
}
