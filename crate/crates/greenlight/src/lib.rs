//! Evolves traffic-light phase programs for a single signalized intersection.
//!
//! The pieces, bottom up:
//!
//! - [`signal`]: phase programs (the evolvable "scheduling string"), their
//!   cyclic time semantics, and safety validation.
//! - [`sim`]: a deterministic discrete-time queue microsimulation producing
//!   per-vehicle timings and a lexicographic fitness tuple.
//! - [`ga`]: the genetic algorithm over programs: seeded population,
//!   pairwise tournaments, single-point crossover, bounded mutation with
//!   repair, and elitist replacement.
//! - [`compare`]: the fixed-timer baseline, an exhaustive grid-search
//!   oracle, and the improvement report.
//! - [`io`]: scenario files, result artifacts (CSV/TSV), and SUMO export.
//! - [`cli`]: the command-line front end.
//!
//! Everything is deterministic: the simulator is pure integer arithmetic and
//! all GA randomness flows from one seeded generator, so identical inputs
//! always produce byte-identical artifacts.

pub mod cli;
pub mod compare;
pub mod ga;
pub mod io;
pub mod signal;
pub mod sim;

pub use compare::{
    compare_report, exhaustive_search, fixed_timer_program, BaselineSpec, ComparisonReport,
};
pub use ga::{evolve, GaConfig, Genome, Individual, Populace, SearchMode};
pub use signal::{ConflictMatrix, Movement, Phase, SignalProgram, SignalState};
pub use sim::{
    better, fitness_of, simulate, Fitness, Scenario, SimResult, Vehicle, VehicleOutcome,
};
