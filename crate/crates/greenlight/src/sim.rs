//! Deterministic discrete-time queue simulation of one signalized intersection.
//!
//! Each movement owns a FIFO queue fed by the scenario's arrival schedule.
//! Time advances in whole-second ticks. During a green, the stop line serves
//! at most one vehicle per tick (saturation flow of 1 veh/s), but service only
//! begins once the green run is `startup_lost` seconds old: a freshly started
//! platoon needs time to get moving. Green runs are maximal: two adjacent
//! phases both showing green for a movement, including across the cyclic
//! wrap, count as one uninterrupted green.
//!
//! Everything is integer arithmetic and there is no randomness, so results
//! are bit-reproducible and cheap to re-verify by hand.

use std::cmp::Ordering;
use std::collections::VecDeque;

use num_rational::Ratio;
use thiserror::Error;

use crate::signal::{ConflictMatrix, Movement, SignalColor, SignalProgram, Violation};

/// Saturation flow: stop-line departures per movement per tick during green.
pub const SATURATION_PER_TICK: u32 = 1;

/// One vehicle of the arrival schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vehicle {
    /// 1-based, contiguous, assigned in arrival order.
    pub id: u32,
    pub movement: Movement,
    pub entrance_time: u32,
}

/// An arrival schedule plus the simulation constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    /// Sorted by `(entrance_time, id)`.
    pub vehicles: Vec<Vehicle>,
    pub horizon: u32,
    /// Seconds from green onset until the stop line starts serving.
    pub startup_lost: u32,
    /// Seconds to traverse the junction after leaving the stop line.
    pub cross_time: u32,
}

pub const DEFAULT_STARTUP_LOST: u32 = 2;
pub const DEFAULT_CROSS_TIME: u32 = 3;

impl Scenario {
    /// Builds a scenario from `(movement, entrance_time)` pairs given in
    /// declaration order: arrivals are stably sorted by entrance time and ids
    /// are assigned 1-based in the resulting order.
    pub fn from_arrivals(arrivals: Vec<(Movement, u32)>, horizon: u32) -> Scenario {
        let mut arrivals = arrivals;
        arrivals.sort_by_key(|&(_, entrance)| entrance);
        let vehicles = arrivals
            .into_iter()
            .enumerate()
            .map(|(i, (movement, entrance_time))| Vehicle {
                id: i as u32 + 1,
                movement,
                entrance_time,
            })
            .collect();
        Scenario {
            vehicles,
            horizon,
            startup_lost: DEFAULT_STARTUP_LOST,
            cross_time: DEFAULT_CROSS_TIME,
        }
    }

    pub fn with_timing(mut self, startup_lost: u32, cross_time: u32) -> Scenario {
        self.startup_lost = startup_lost;
        self.cross_time = cross_time;
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.horizon < 1 {
            return Err(ScenarioError::ZeroHorizon);
        }
        if self.cross_time < 1 {
            return Err(ScenarioError::ZeroCrossTime);
        }
        for (i, v) in self.vehicles.iter().enumerate() {
            if v.id != i as u32 + 1 {
                return Err(ScenarioError::IdsNotContiguous { position: i });
            }
            if v.entrance_time >= self.horizon {
                return Err(ScenarioError::EntranceBeyondHorizon { id: v.id });
            }
            if i > 0 {
                let prev = &self.vehicles[i - 1];
                if (prev.entrance_time, prev.id) > (v.entrance_time, v.id) {
                    return Err(ScenarioError::NotSorted { position: i });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("cross_time must be at least 1")]
    ZeroCrossTime,
    #[error("vehicle ids must be contiguous from 1 (broken at position {position})")]
    IdsNotContiguous { position: usize },
    #[error("vehicle {id} enters at or after the horizon")]
    EntranceBeyondHorizon { id: u32 },
    #[error("vehicles not sorted by (entrance_time, id) at position {position}")]
    NotSorted { position: usize },
}

/// Per-vehicle result row. `departure_time` is `None` when the vehicle did
/// not exit the system by the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VehicleOutcome {
    pub id: u32,
    pub entrance_time: u32,
    pub departure_time: Option<u32>,
}

impl VehicleOutcome {
    pub fn total_time(&self) -> Option<u32> {
        self.departure_time.map(|d| d - self.entrance_time)
    }
}

/// Aggregate result quality, ordered lexicographically: fewer unserved
/// vehicles first, then smaller makespan, then smaller mean total time.
/// Lower is better. Field order carries the derived `Ord`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fitness {
    /// Vehicles not out of the system by the horizon.
    pub unserved: u32,
    /// Latest departure time over served vehicles, 0 if none.
    pub makespan: u32,
    /// Mean total (exit minus entrance) time over served vehicles, 0 if none.
    pub mean_total: Ratio<u64>,
}

impl Fitness {
    pub fn new(unserved: u32, makespan: u32, mean_total: Ratio<u64>) -> Fitness {
        Fitness {
            unserved,
            makespan,
            mean_total,
        }
    }

    pub fn from_outcomes(outcomes: &[VehicleOutcome]) -> Fitness {
        let mut unserved = 0u32;
        let mut makespan = 0u32;
        let mut total_sum = 0u64;
        let mut served = 0u64;
        for o in outcomes {
            match o.departure_time {
                Some(d) => {
                    served += 1;
                    makespan = makespan.max(d);
                    total_sum += (d - o.entrance_time) as u64;
                }
                None => unserved += 1,
            }
        }
        let mean_total = if served == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(total_sum, served)
        };
        Fitness {
            unserved,
            makespan,
            mean_total,
        }
    }

    pub fn mean_total_f64(&self) -> f64 {
        *self.mean_total.numer() as f64 / *self.mean_total.denom() as f64
    }
}

impl std::fmt::Display for Fitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "unserved={} makespan={} mean_total={}",
            self.unserved, self.makespan, self.mean_total
        )
    }
}

/// Lexicographic comparison; `Ordering::Less` means `a` is the better result.
pub fn better(a: &Fitness, b: &Fitness) -> Ordering {
    a.cmp(b)
}

/// Recomputes the fitness tuple from a result's outcome rows.
pub fn fitness_of(result: &SimResult) -> Fitness {
    Fitness::from_outcomes(&result.outcomes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimResult {
    /// Same order as `scenario.vehicles`.
    pub outcomes: Vec<VehicleOutcome>,
    pub fitness: Fitness,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid program: {0}")]
    InvalidProgram(#[from] Violation),
    #[error("invalid scenario: {0}")]
    InvalidScenario(#[from] ScenarioError),
}

/// For each movement and cycle position, how many consecutive green seconds
/// precede that position (cyclically). `None` where the light is not green;
/// `u64::MAX` when the whole cycle is green for the movement.
fn green_ages(program: &SignalProgram, cycle: u32) -> [Vec<Option<u64>>; 4] {
    let cycle = cycle as usize;
    let mut greens: [Vec<bool>; 4] = std::array::from_fn(|_| Vec::with_capacity(cycle));
    for phase in &program.phases {
        for m in Movement::ALL {
            let g = phase.state.color(m) == SignalColor::Green;
            for _ in 0..phase.duration {
                greens[m.index()].push(g);
            }
        }
    }
    std::array::from_fn(|mi| {
        let g = &greens[mi];
        let mut ages = vec![None; cycle];
        if g.iter().all(|&x| x) {
            ages.fill(Some(u64::MAX));
            return ages;
        }
        let mut run = 0u64;
        for i in 0..2 * cycle {
            if g[i % cycle] {
                run += 1;
                if i >= cycle {
                    ages[i - cycle] = Some(run - 1);
                }
            } else {
                run = 0;
            }
        }
        ages
    })
}

/// Runs the tick loop over `[0, horizon)` and reports per-vehicle outcomes
/// plus the aggregate fitness tuple.
///
/// Per tick: arrivals join their movement's queue first, then each movement
/// showing a sufficiently old green serves the head of its queue. A served
/// vehicle leaves the stop line at tick `t` and exits at `t + cross_time`;
/// if that exit would land past the horizon the vehicle counts as unserved.
pub fn simulate(scenario: &Scenario, program: &SignalProgram) -> Result<SimResult, SimError> {
    program.validate(&ConflictMatrix::standard())?;
    scenario.validate()?;

    let cycle = program.cycle_length().expect("validated non-empty");
    let ages = green_ages(program, cycle);
    let startup = scenario.startup_lost as u64;

    let n = scenario.vehicles.len();
    let mut departures: Vec<Option<u32>> = vec![None; n];
    let mut queues: [VecDeque<usize>; 4] = Default::default();
    let mut next_arrival = 0usize;

    for t in 0..scenario.horizon {
        while next_arrival < n && scenario.vehicles[next_arrival].entrance_time == t {
            queues[scenario.vehicles[next_arrival].movement.index()].push_back(next_arrival);
            next_arrival += 1;
        }
        let pos = (t % cycle) as usize;
        for mi in 0..4 {
            if let Some(age) = ages[mi][pos] {
                if age.min(t as u64) >= startup {
                    if let Some(vi) = queues[mi].pop_front() {
                        let exit = t as u64 + scenario.cross_time as u64;
                        if exit <= scenario.horizon as u64 {
                            departures[vi] = Some(exit as u32);
                        }
                    }
                }
            }
        }
        // Nothing left to arrive or serve: later ticks are no-ops.
        if next_arrival == n && queues.iter().all(|q| q.is_empty()) {
            break;
        }
    }

    let outcomes: Vec<VehicleOutcome> = scenario
        .vehicles
        .iter()
        .zip(&departures)
        .map(|(v, d)| VehicleOutcome {
            id: v.id,
            entrance_time: v.entrance_time,
            departure_time: *d,
        })
        .collect();
    let fitness = Fitness::from_outcomes(&outcomes);
    Ok(SimResult { outcomes, fitness })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ns_ew_program() -> SignalProgram {
        "GGrr:10;yyrr:3;rrGG:10;rryy:3".parse().unwrap()
    }

    fn lone(movement: Movement, entrance: u32, horizon: u32) -> Scenario {
        Scenario::from_arrivals(vec![(movement, entrance)], horizon)
    }

    #[test]
    fn empty_system_has_zero_fitness() {
        let scenario = Scenario::from_arrivals(vec![], 100);
        let result = simulate(&scenario, &ns_ew_program()).unwrap();
        assert_eq!(result.outcomes, vec![]);
        assert_eq!(result.fitness, Fitness::new(0, 0, Ratio::from_integer(0)));
    }

    #[test]
    fn lone_vehicle_waits_out_the_startup_delay() {
        let result = simulate(&lone(Movement::Ns, 0, 100), &ns_ew_program()).unwrap();
        assert_eq!(result.outcomes[0].departure_time, Some(5));
        assert_eq!(result.outcomes[0].total_time(), Some(5));
    }

    #[test]
    fn platoon_drains_at_one_per_second_after_startup() {
        let scenario = Scenario::from_arrivals(
            vec![(Movement::Ns, 0), (Movement::Ns, 0), (Movement::Ns, 0)],
            100,
        );
        let result = simulate(&scenario, &ns_ew_program()).unwrap();
        let departures: Vec<_> = result.outcomes.iter().map(|o| o.departure_time).collect();
        assert_eq!(departures, vec![Some(5), Some(6), Some(7)]);
        assert_eq!(result.fitness, Fitness::new(0, 7, Ratio::from_integer(6)));
    }

    #[test]
    fn red_first_program_delays_until_the_green_run() {
        let program: SignalProgram = "rrGG:10;rryy:3;GGrr:10;yyrr:3".parse().unwrap();
        let result = simulate(&lone(Movement::Ns, 0, 100), &program).unwrap();
        // NS green run starts at t=13, stop line opens at 15, exit 15+3.
        assert_eq!(result.outcomes[0].departure_time, Some(18));
        assert_eq!(result.outcomes[0].total_time(), Some(18));
    }

    #[test]
    fn exit_exactly_at_horizon_counts_as_served() {
        let program: SignalProgram = "GGrr:10".parse().unwrap();
        let served = simulate(&lone(Movement::Ns, 0, 5), &program).unwrap();
        assert_eq!(served.outcomes[0].departure_time, Some(5));
        let unserved = simulate(&lone(Movement::Ns, 0, 4), &program).unwrap();
        assert_eq!(unserved.outcomes[0].departure_time, None);
        assert_eq!(unserved.fitness.unserved, 1);
    }

    #[test]
    fn perpetual_green_serves_arrivals_without_restarting_the_clock() {
        // The single green run begins at t=0; a vehicle arriving later joins
        // an already-flowing stream.
        let program: SignalProgram = "GGrr:10".parse().unwrap();
        for entrance in [0u32, 1, 2, 5, 50] {
            let result = simulate(&lone(Movement::Ns, entrance, 1000), &program).unwrap();
            let expected = entrance.max(DEFAULT_STARTUP_LOST) + DEFAULT_CROSS_TIME;
            assert_eq!(
                result.outcomes[0].departure_time,
                Some(expected),
                "entrance {entrance}"
            );
        }
    }

    #[test]
    fn green_runs_merge_across_the_cyclic_wrap() {
        // NS is green over [16,21) and [0,5): one run across the wrap.
        let program: SignalProgram = "GGrr:5;yyrr:3;rrGG:5;rryy:3;GGrr:5".parse().unwrap();
        assert_eq!(program.cycle_length(), Ok(21));

        // Mid-cycle green onset at t=16 pays the startup delay.
        let result = simulate(&lone(Movement::Ns, 16, 1000), &program).unwrap();
        assert_eq!(result.outcomes[0].departure_time, Some(21));

        // At t=21 (cycle position 0) the run is already 5 seconds old.
        let result = simulate(&lone(Movement::Ns, 21, 1000), &program).unwrap();
        assert_eq!(result.outcomes[0].departure_time, Some(24));
    }

    #[test]
    fn fitness_of_recomputes_the_tuple() {
        let scenario = Scenario::from_arrivals(
            vec![(Movement::Ns, 0), (Movement::Ns, 0), (Movement::Ns, 0)],
            100,
        );
        let result = simulate(&scenario, &ns_ew_program()).unwrap();
        assert_eq!(fitness_of(&result), result.fitness);
        assert_eq!(
            fitness_of(&result),
            Fitness::new(0, 7, Ratio::from_integer(6))
        );
    }

    #[test]
    fn fitness_from_outcomes_handles_edge_shapes() {
        assert_eq!(
            Fitness::from_outcomes(&[]),
            Fitness::new(0, 0, Ratio::from_integer(0))
        );
        let outcomes = [
            VehicleOutcome {
                id: 1,
                entrance_time: 0,
                departure_time: Some(9),
            },
            VehicleOutcome {
                id: 2,
                entrance_time: 3,
                departure_time: None,
            },
        ];
        let fitness = Fitness::from_outcomes(&outcomes);
        assert_eq!(fitness.unserved, 1);
        assert_eq!(fitness.makespan, 9);
        assert_eq!(fitness.mean_total, Ratio::from_integer(9));
    }

    #[test]
    fn better_orders_lexicographically() {
        let f = |u, m, t| Fitness::new(u, m, Ratio::from_integer(t));
        assert_eq!(better(&f(0, 100, 50), &f(0, 120, 40)), Ordering::Less);
        assert_eq!(better(&f(1, 50, 10), &f(0, 500, 300)), Ordering::Greater);
        assert_eq!(better(&f(0, 100, 50), &f(0, 100, 50)), Ordering::Equal);
        // Mean breaks ties only when unserved and makespan agree.
        assert_eq!(
            better(
                &Fitness::new(0, 100, Ratio::new(13, 2)),
                &Fitness::new(0, 100, Ratio::from_integer(7))
            ),
            Ordering::Less
        );
    }

    #[test]
    fn simulation_is_deterministic() {
        let scenario = Scenario::from_arrivals(
            (0..50)
                .map(|i| (Movement::ALL[i % 4], i as u32 * 3))
                .collect(),
            600,
        );
        let a = simulate(&scenario, &ns_ew_program()).unwrap();
        let b = simulate(&scenario, &ns_ew_program()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fifo_is_preserved_per_movement() {
        let scenario = Scenario::from_arrivals(
            vec![
                (Movement::Ns, 0),
                (Movement::Ns, 1),
                (Movement::Ew, 0),
                (Movement::Ns, 4),
                (Movement::Ew, 2),
            ],
            200,
        );
        let result = simulate(&scenario, &ns_ew_program()).unwrap();
        for m in Movement::ALL {
            let departures: Vec<u32> = scenario
                .vehicles
                .iter()
                .zip(&result.outcomes)
                .filter(|(v, _)| v.movement == m)
                .filter_map(|(_, o)| o.departure_time)
                .collect();
            assert!(
                departures.windows(2).all(|w| w[0] < w[1]),
                "{m}: {departures:?}"
            );
        }
    }

    #[test]
    fn longer_horizon_never_hurts() {
        let scenario = Scenario::from_arrivals(
            (0..30).map(|i| (Movement::ALL[i % 2], i as u32)).collect(),
            40,
        );
        let short = simulate(&scenario, &ns_ew_program()).unwrap();
        let mut extended = scenario.clone();
        extended.horizon = 400;
        let long = simulate(&extended, &ns_ew_program()).unwrap();
        assert!(long.fitness.unserved <= short.fitness.unserved);
        for (s, l) in short.outcomes.iter().zip(&long.outcomes) {
            if let Some(d) = s.departure_time {
                assert_eq!(l.departure_time, Some(d));
            }
        }
    }

    #[test]
    fn at_most_one_departure_per_movement_per_tick() {
        let scenario = Scenario::from_arrivals((0..40).map(|_| (Movement::Ns, 0)).collect(), 500);
        let result = simulate(&scenario, &ns_ew_program()).unwrap();
        let mut stop_line_ticks: Vec<u32> = result
            .outcomes
            .iter()
            .filter_map(|o| o.departure_time)
            .map(|d| d - DEFAULT_CROSS_TIME)
            .collect();
        stop_line_ticks.sort_unstable();
        stop_line_ticks.dedup();
        let served = result
            .outcomes
            .iter()
            .filter(|o| o.departure_time.is_some())
            .count();
        assert_eq!(stop_line_ticks.len(), served);
    }

    #[test]
    fn rejects_invalid_program_and_scenario() {
        let scenario = lone(Movement::Ns, 0, 100);
        let unsafe_program: SignalProgram = "GGGG:10".parse().unwrap();
        assert!(matches!(
            simulate(&scenario, &unsafe_program),
            Err(SimError::InvalidProgram(_))
        ));

        let mut late = lone(Movement::Ns, 0, 100);
        late.vehicles[0].entrance_time = 100;
        assert!(matches!(
            simulate(&late, &ns_ew_program()),
            Err(SimError::InvalidScenario(
                ScenarioError::EntranceBeyondHorizon { id: 1 }
            ))
        ));
    }
}
