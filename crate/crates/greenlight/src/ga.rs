//! Genetic search over signal programs.
//!
//! A [`Genome`] is a signal program plus per-phase duration bounds and a
//! mutability mask (green phases evolve, clearance yellows stay fixed). The
//! engine runs a classic generational GA: pairwise tournament selection,
//! single-point crossover, small duration mutations (optionally
//! state-character flips with repair), and elitist replacement.
//!
//! All randomness flows from one `ChaCha8Rng` seeded with [`GaConfig::seed`],
//! consumed in a fixed documented order, so a run is a pure function of its
//! inputs.

use std::fmt;

use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::signal::{ConflictMatrix, Movement, SignalColor, SignalProgram, Violation};
use crate::sim::{better, simulate, Fitness, Scenario, SimError};

/// Tournament size is pinned at 2: each selection is one head-to-head duel.
pub const TOURNAMENT_SIZE: usize = 2;

/// Default duration bounds applied to green phases of a template.
pub const DEFAULT_GREEN_BOUNDS: DurationBounds = DurationBounds { min: 1, max: 120 };

/// Inclusive duration bounds for one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DurationBounds {
    pub min: u32,
    pub max: u32,
}

impl DurationBounds {
    pub fn fixed(duration: u32) -> DurationBounds {
        DurationBounds {
            min: duration,
            max: duration,
        }
    }

    pub fn contains(self, duration: u32) -> bool {
        self.min <= duration && duration <= self.max
    }

    pub fn clamp(self, duration: u32) -> u32 {
        duration.clamp(self.min, self.max)
    }
}

/// An evolvable signal program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genome {
    pub program: SignalProgram,
    pub bounds: Vec<DurationBounds>,
    /// true where the GA may touch the phase.
    pub mutable: Vec<bool>,
}

impl Genome {
    pub fn new(
        program: SignalProgram,
        bounds: Vec<DurationBounds>,
        mutable: Vec<bool>,
    ) -> Result<Genome, GaError> {
        let genome = Genome {
            program,
            bounds,
            mutable,
        };
        genome.check()?;
        Ok(genome)
    }

    /// Wraps a program as a genome: phases showing any green become mutable
    /// with `green_bounds`, all other phases are pinned at their duration.
    pub fn from_program(
        program: SignalProgram,
        green_bounds: DurationBounds,
    ) -> Result<Genome, GaError> {
        let mutable: Vec<bool> = program
            .phases
            .iter()
            .map(|p| Movement::ALL.into_iter().any(|m| p.state.is_green(m)))
            .collect();
        let bounds = program
            .phases
            .iter()
            .zip(&mutable)
            .map(|(p, &m)| {
                if m {
                    green_bounds
                } else {
                    DurationBounds::fixed(p.duration)
                }
            })
            .collect();
        Genome::new(program, bounds, mutable)
    }

    pub fn decode(&self) -> SignalProgram {
        self.program.clone()
    }

    fn check(&self) -> Result<(), GaError> {
        if self.bounds.len() != self.program.phases.len()
            || self.mutable.len() != self.program.phases.len()
        {
            return Err(GaError::ShapeMismatch);
        }
        for (i, phase) in self.program.phases.iter().enumerate() {
            if !self.bounds[i].contains(phase.duration) {
                return Err(GaError::OutOfBounds { phase: i });
            }
        }
        self.program
            .validate(&ConflictMatrix::standard())
            .map_err(GaError::InvalidTemplate)?;
        Ok(())
    }

    fn same_shape(&self, other: &Genome) -> bool {
        self.program.phases.len() == other.program.phases.len()
            && self.bounds == other.bounds
            && self.mutable == other.mutable
    }

    fn mutable_indices(&self) -> Vec<usize> {
        self.mutable
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| if m { Some(i) } else { None })
            .collect()
    }
}

/// A genome with its (lazily computed) fitness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    pub genome: Genome,
    pub fitness: Option<Fitness>,
}

impl Individual {
    pub fn unevaluated(genome: Genome) -> Individual {
        Individual {
            genome,
            fitness: None,
        }
    }
}

/// The population container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Populace {
    pub members: Vec<Individual>,
}

/// Which part of the genome mutation may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Phase durations only.
    #[default]
    Duration,
    /// Durations plus green/red character flips (with repair).
    String,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchMode::Duration => f.write_str("duration"),
            SearchMode::String => f.write_str("string"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: u32,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Largest absolute duration change a single mutation may apply.
    pub max_duration_delta: u32,
    pub elitism_count: usize,
    pub mode: SearchMode,
    pub seed: u64,
}

impl GaConfig {
    pub fn new(seed: u64) -> GaConfig {
        GaConfig {
            population_size: 20,
            generations: 200,
            crossover_prob: 0.9,
            mutation_prob: 0.2,
            max_duration_delta: 5,
            elitism_count: 1,
            mode: SearchMode::Duration,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size < 2 {
            return Err(GaError::InvalidConfig("population_size must be at least 2"));
        }
        if self.elitism_count < 1 || self.elitism_count >= self.population_size {
            return Err(GaError::InvalidConfig(
                "elitism_count must satisfy 1 <= elitism_count < population_size",
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(GaError::InvalidConfig("crossover_prob must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(GaError::InvalidConfig("mutation_prob must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// One generation's snapshot in the evolution log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationStats {
    pub generation: u32,
    pub best_fitness: Fitness,
    /// Mean makespan over the whole population.
    pub mean_makespan: Ratio<u64>,
    /// Best member's program in literal text form.
    pub best_program: String,
}

/// Per-generation best/mean trace of one evolution run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvolutionLog {
    pub entries: Vec<GenerationStats>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("genome does not decode to a valid program: {0}")]
    InvalidTemplate(Violation),
    #[error("phase {phase} duration violates its bounds")]
    OutOfBounds { phase: usize },
    #[error("genomes have different phase counts, bounds, or masks")]
    ShapeMismatch,
    #[error("tournament ran on an unevaluated member")]
    Unevaluated,
    #[error("no local repair restores validity")]
    IrreparableGenome,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A single state-character flip, kept so repair can undo it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharFlip {
    pub phase: usize,
    pub movement: Movement,
    pub previous: SignalColor,
}

/// Builds the initial population: member 0 is the template untouched, every
/// other member redraws each mutable duration uniformly within its bounds.
///
/// RNG order: members 1..P-1 in order, mutable phases in index order.
pub fn seed_population(
    config: &GaConfig,
    template: &Genome,
    rng: &mut impl Rng,
) -> Result<Populace, GaError> {
    template.check()?;
    let mut members = Vec::with_capacity(config.population_size);
    members.push(Individual::unevaluated(template.clone()));
    for _ in 1..config.population_size {
        let mut genome = template.clone();
        for i in 0..genome.program.phases.len() {
            if genome.mutable[i] {
                let b = genome.bounds[i];
                genome.program.phases[i].duration = rng.random_range(b.min..=b.max);
            }
        }
        members.push(Individual::unevaluated(genome));
    }
    Ok(Populace { members })
}

/// Head-to-head duel between two members: strictly better fitness wins,
/// ties go to the lower index.
fn tournament_pick(populace: &Populace, i: usize, j: usize) -> Result<usize, GaError> {
    let fi = populace.members[i].fitness.ok_or(GaError::Unevaluated)?;
    let fj = populace.members[j].fitness.ok_or(GaError::Unevaluated)?;
    Ok(match better(&fi, &fj) {
        std::cmp::Ordering::Less => i,
        std::cmp::Ordering::Greater => j,
        std::cmp::Ordering::Equal => i.min(j),
    })
}

/// Draws two distinct members uniformly and returns the winner's index.
///
/// RNG order: first index over `0..P`, second over `0..P-1` shifted past the
/// first.
pub fn select_parent(populace: &Populace, rng: &mut impl Rng) -> Result<usize, GaError> {
    let p = populace.members.len();
    if p < TOURNAMENT_SIZE {
        return Err(GaError::InvalidConfig(
            "populace must hold at least 2 members",
        ));
    }
    let i = rng.random_range(0..p);
    let mut j = rng.random_range(0..p - 1);
    if j >= i {
        j += 1;
    }
    tournament_pick(populace, i, j)
}

fn splice(a: &Genome, b: &Genome, cut: usize) -> Genome {
    let mut child = a.clone();
    child.program.phases[cut..].copy_from_slice(&b.program.phases[cut..]);
    child
}

/// Single-point crossover. With probability `crossover_prob` picks a cut in
/// `[1, K-1]` and splices `a`'s head onto `b`'s tail; otherwise the child is
/// a copy of `a`. Bounds and masks come from the (identical) parents.
///
/// RNG order: one coin, then the cut only when the coin lands.
pub fn crossover(
    a: &Genome,
    b: &Genome,
    config: &GaConfig,
    rng: &mut impl Rng,
) -> Result<Genome, GaError> {
    if !a.same_shape(b) || a.program.phases.len() < 2 {
        return Err(GaError::ShapeMismatch);
    }
    if !rng.random_bool(config.crossover_prob) {
        return Ok(a.clone());
    }
    let k = a.program.phases.len();
    let cut = rng.random_range(1..k);
    Ok(splice(a, b, cut))
}

fn apply_duration_delta(genome: &mut Genome, phase: usize, delta: i64) {
    let b = genome.bounds[phase];
    let new = (genome.program.phases[phase].duration as i64 + delta).max(0) as u32;
    genome.program.phases[phase].duration = b.clamp(new);
}

fn draw_nonzero_delta(max_delta: u32, rng: &mut impl Rng) -> i64 {
    // Uniform over {-max..-1, 1..max}.
    let idx = rng.random_range(0..2 * max_delta as i64);
    if idx < max_delta as i64 {
        -(idx + 1)
    } else {
        idx - max_delta as i64 + 1
    }
}

fn mutate_duration(genome: &Genome, config: &GaConfig, rng: &mut impl Rng) -> Genome {
    let sites = genome.mutable_indices();
    if sites.is_empty() || config.max_duration_delta == 0 {
        return genome.clone();
    }
    let site = sites[rng.random_range(0..sites.len())];
    let delta = draw_nonzero_delta(config.max_duration_delta, rng);
    let mut child = genome.clone();
    apply_duration_delta(&mut child, site, delta);
    child
}

fn mutate_flip(genome: &Genome, rng: &mut impl Rng) -> Genome {
    let sites = genome.mutable_indices();
    if sites.is_empty() {
        return genome.clone();
    }
    let site = sites[rng.random_range(0..sites.len())];
    let movement = Movement::ALL[rng.random_range(0..Movement::ALL.len())];
    let previous = genome.program.phases[site].state.color(movement);
    let flipped = match previous {
        SignalColor::Green => SignalColor::Red,
        SignalColor::Red => SignalColor::Green,
        // Repair-inserted yellows are not flip targets.
        SignalColor::Yellow => return genome.clone(),
    };
    let mut child = genome.clone();
    child.program.phases[site]
        .state
        .set_color(movement, flipped);
    let flip = CharFlip {
        phase: site,
        movement,
        previous,
    };
    match repair(&child, &ConflictMatrix::standard(), Some(flip)) {
        Ok(repaired) => repaired,
        Err(_) => genome.clone(),
    }
}

/// Mutates a genome with probability `mutation_prob`, otherwise returns it
/// unchanged. DURATION mode nudges one mutable phase's duration by a nonzero
/// delta in `[-max_duration_delta, +max_duration_delta]`, clamped to bounds.
/// STRING mode additionally flips one movement's character G<->r in a
/// mutable phase (even odds against a duration nudge) and repairs the result;
/// an irreparable flip is discarded. The output is always valid.
///
/// RNG order: mutation coin; in STRING mode a branch coin; then site (and
/// movement for flips, or delta for nudges).
pub fn mutate(genome: &Genome, config: &GaConfig, rng: &mut impl Rng) -> Genome {
    if !rng.random_bool(config.mutation_prob) {
        return genome.clone();
    }
    match config.mode {
        SearchMode::Duration => mutate_duration(genome, config, rng),
        SearchMode::String => {
            if rng.random_bool(0.5) {
                mutate_duration(genome, config, rng)
            } else {
                mutate_flip(genome, rng)
            }
        }
    }
}

/// Restores validity after a character flip.
///
/// An already-valid genome comes back unchanged. A flip that put green (or
/// yellow) on conflicting movements is reverted. A flip that created a
/// green-to-red transition with no clearance gets a yellow written into the
/// following phase when that phase is mutable, else the flip is reverted.
/// If no such fix yields a valid genome the mutation is declared irreparable
/// and the caller discards it.
pub fn repair(
    genome: &Genome,
    conflicts: &ConflictMatrix,
    flip: Option<CharFlip>,
) -> Result<Genome, GaError> {
    if genome.program.validate(conflicts).is_ok() {
        return Ok(genome.clone());
    }

    let revert = |flip: Option<CharFlip>| -> Result<Genome, GaError> {
        let flip = flip.ok_or(GaError::IrreparableGenome)?;
        let mut reverted = genome.clone();
        reverted.program.phases[flip.phase]
            .state
            .set_color(flip.movement, flip.previous);
        if reverted.program.validate(conflicts).is_ok() {
            Ok(reverted)
        } else {
            Err(GaError::IrreparableGenome)
        }
    };

    match genome.program.validate(conflicts) {
        Err(Violation::ConflictingGreens { .. }) => return revert(flip),
        Err(Violation::MissingYellow { .. }) => {}
        _ => return Err(GaError::IrreparableGenome),
    }

    // Insert clearance yellows for every uncovered green-to-red transition.
    let mut fixed = genome.clone();
    let k = fixed.program.phases.len();
    for i in 0..k {
        let next = (i + 1) % k;
        for m in Movement::ALL {
            if fixed.program.phases[i].state.color(m) == SignalColor::Green
                && fixed.program.phases[next].state.color(m) == SignalColor::Red
            {
                if !fixed.mutable[next] {
                    return revert(flip);
                }
                fixed.program.phases[next]
                    .state
                    .set_color(m, SignalColor::Yellow);
            }
        }
    }
    if fixed.program.validate(conflicts).is_ok() {
        Ok(fixed)
    } else {
        revert(flip)
    }
}

fn evaluate(populace: &mut Populace, scenario: &Scenario) -> Result<(), GaError> {
    // Sequential for reproducibility of error order; simulate itself is pure,
    // so members could be farmed out as long as results land by index.
    for member in &mut populace.members {
        if member.fitness.is_none() {
            member.genome.check()?;
            let result = simulate(scenario, &member.genome.program)?;
            member.fitness = Some(result.fitness);
        }
    }
    Ok(())
}

/// Index of the best evaluated member, ties to the lowest index.
fn best_index(populace: &Populace) -> Result<usize, GaError> {
    let mut best = 0usize;
    for i in 1..populace.members.len() {
        if tournament_pick(populace, best, i)? == i {
            best = i;
        }
    }
    Ok(best)
}

fn record(log: &mut EvolutionLog, generation: u32, populace: &Populace) -> Result<(), GaError> {
    let best = best_index(populace)?;
    let makespan_sum: u64 = populace
        .members
        .iter()
        .map(|m| {
            m.fitness
                .map(|f| f.makespan as u64)
                .ok_or(GaError::Unevaluated)
        })
        .sum::<Result<u64, GaError>>()?;
    log.entries.push(GenerationStats {
        generation,
        best_fitness: populace.members[best].fitness.expect("best is evaluated"),
        mean_makespan: Ratio::new(makespan_sum, populace.members.len() as u64),
        best_program: populace.members[best].genome.program.to_string(),
    });
    Ok(())
}

fn next_generation(
    populace: &Populace,
    config: &GaConfig,
    rng: &mut impl Rng,
) -> Result<Populace, GaError> {
    let mut order: Vec<(Fitness, usize)> = populace
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| m.fitness.ok_or(GaError::Unevaluated).map(|f| (f, i)))
        .collect::<Result<_, _>>()?;
    order.sort();
    let mut members: Vec<Individual> = order[..config.elitism_count]
        .iter()
        .map(|&(_, i)| populace.members[i].clone())
        .collect();
    while members.len() < config.population_size {
        let pa = select_parent(populace, rng)?;
        let pb = select_parent(populace, rng)?;
        let child = crossover(
            &populace.members[pa].genome,
            &populace.members[pb].genome,
            config,
            rng,
        )?;
        let child = mutate(&child, config, rng);
        members.push(Individual::unevaluated(child));
    }
    Ok(Populace { members })
}

/// Runs the full generational loop and returns the best individual found
/// plus the per-generation log (generation 0 is the seeded population, so a
/// run of G generations logs G+1 entries).
///
/// Randomness comes from a single ChaCha8 stream seeded with `config.seed`
/// and is consumed in this fixed order: population seeding, then per
/// generation, per offspring slot: parent A draws, parent B draws, crossover
/// coin (+cut), mutation coin (+branch/site/delta or movement). No draws
/// happen during fitness evaluation.
pub fn evolve(
    config: &GaConfig,
    scenario: &Scenario,
    template: &Genome,
) -> Result<(Individual, EvolutionLog), GaError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut populace = seed_population(config, template, &mut rng)?;
    evaluate(&mut populace, scenario)?;

    let mut log = EvolutionLog::default();
    record(&mut log, 0, &populace)?;
    let mut best = populace.members[best_index(&populace)?].clone();

    for generation in 1..=config.generations {
        populace = next_generation(&populace, config, &mut rng)?;
        evaluate(&mut populace, scenario)?;
        record(&mut log, generation, &populace)?;
        let candidate = &populace.members[best_index(&populace)?];
        let candidate_fitness = candidate.fitness.expect("evaluated");
        let best_fitness = best.fitness.expect("evaluated");
        if better(&candidate_fitness, &best_fitness) == std::cmp::Ordering::Less {
            best = candidate.clone();
        }
    }
    Ok((best, log))
}
