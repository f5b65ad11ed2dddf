//! Result serialization: per-vehicle table, generation log, and plot data.
//!
//! Every writer renders to a string first and then replaces the target file
//! whole (write to a temp sibling, rename), so partially written artifacts
//! never exist and reruns with the same inputs are byte-identical.

use std::fs;
use std::io;
use std::path::Path;

use crate::ga::EvolutionLog;
use crate::sim::{Fitness, SimResult};

/// Whole-file replace: write a temp sibling, then rename over the target.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, contents)?;
    fs::rename(tmp, path)
}

pub fn vehicle_table_to_string(result: &SimResult) -> String {
    let mut out = String::from("Car Number,Entrance Time,Departure Time,Total Time\n");
    for o in &result.outcomes {
        match o.departure_time {
            Some(d) => {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    o.id,
                    o.entrance_time,
                    d,
                    d - o.entrance_time
                ));
            }
            None => out.push_str(&format!("{},{},,\n", o.id, o.entrance_time)),
        }
    }
    out
}

/// CSV of per-vehicle timings, one row per vehicle in id order. Unserved
/// vehicles leave the departure and total fields empty.
pub fn write_vehicle_table(result: &SimResult, path: &Path) -> io::Result<()> {
    write_atomic(path, &vehicle_table_to_string(result))
}

pub fn generation_log_to_string(log: &EvolutionLog) -> String {
    let mut out =
        String::from("generation,unserved,best_makespan,best_mean,mean_makespan,best_program\n");
    for e in &log.entries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.generation,
            e.best_fitness.unserved,
            e.best_fitness.makespan,
            e.best_fitness.mean_total,
            e.mean_makespan,
            e.best_program,
        ));
    }
    out
}

/// CSV of the evolution trace, one row per logged generation. Rational
/// columns print exact (`13/2`), not rounded.
pub fn write_generation_log(log: &EvolutionLog, path: &Path) -> io::Result<()> {
    write_atomic(path, &generation_log_to_string(log))
}

pub fn plot_data_to_string(log: &EvolutionLog, baseline: &Fitness) -> String {
    let mut out = String::new();
    for e in &log.entries {
        out.push_str(&format!("{}\t{}\n", e.generation, e.best_fitness.makespan));
    }
    out.push_str(&format!("# baseline_makespan {}\n", baseline.makespan));
    out
}

/// Two-column TSV of generation vs best makespan, with the baseline makespan
/// as a trailing comment for plotting tools to pick up.
pub fn emit_plot_data(log: &EvolutionLog, baseline: &Fitness, path: &Path) -> io::Result<()> {
    write_atomic(path, &plot_data_to_string(log, baseline))
}
