//! The line-oriented scenario file format.
//!
//! ```text
//! # comment
//! horizon 3600
//! startup_lost 2
//! cross_time 3
//! vehicle NS 0
//! demand EW 6 0 60
//! ```
//!
//! `demand M R S E` expands to arrivals at `S + round(k * 60/R)` for
//! k = 0, 1, ... while the arrival is before `E`. Expanded and explicit
//! vehicles merge and sort by `(entrance_time, declaration order)`; ids are
//! assigned 1-based in that final order. `horizon` is required; the timing
//! constants default to `startup_lost 2` and `cross_time 3`.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::signal::Movement;
use crate::sim::{Scenario, ScenarioError, DEFAULT_CROSS_TIME, DEFAULT_STARTUP_LOST};

/// Hard cap on demand expansion so a typo'd rate cannot end in an OOM.
const MAX_VEHICLES: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required directive `horizon`")]
    MissingHorizon,
    #[error(transparent)]
    Invalid(#[from] ScenarioError),
}

fn parse_err(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Parse {
        line,
        message: message.into(),
    }
}

fn int_field(line: usize, directive: &str, token: &str) -> Result<u32, LoadError> {
    token.parse().map_err(|_| {
        parse_err(
            line,
            format!("non-integer value `{token}` for `{directive}`"),
        )
    })
}

fn movement_field(line: usize, token: &str) -> Result<Movement, LoadError> {
    Movement::from_name(token).ok_or_else(|| {
        parse_err(
            line,
            format!("unknown movement `{token}`, expected NS, SN, EW, or WE"),
        )
    })
}

/// Nearest-integer `k * 60 / rate` with halves rounding up.
fn demand_arrival(start: u32, k: u64, rate: u32) -> u64 {
    let num = 2 * k * 60 + rate as u64;
    start as u64 + num / (2 * rate as u64)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, LoadError> {
    let mut horizon: Option<u32> = None;
    let mut startup_lost = DEFAULT_STARTUP_LOST;
    let mut cross_time = DEFAULT_CROSS_TIME;
    let mut arrivals: Vec<(Movement, u32)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match tokens[0] {
            "horizon" | "startup_lost" | "cross_time" => {
                if tokens.len() != 2 {
                    return Err(parse_err(
                        line,
                        format!("`{}` takes exactly one value", tokens[0]),
                    ));
                }
                let value = int_field(line, tokens[0], tokens[1])?;
                match tokens[0] {
                    "horizon" => horizon = Some(value),
                    "startup_lost" => startup_lost = value,
                    _ => cross_time = value,
                }
            }
            "vehicle" => {
                if tokens.len() != 3 {
                    return Err(parse_err(line, "`vehicle` takes MOVEMENT ENTRANCE_S"));
                }
                let movement = movement_field(line, tokens[1])?;
                let entrance = int_field(line, "vehicle", tokens[2])?;
                arrivals.push((movement, entrance));
            }
            "demand" => {
                if tokens.len() != 5 {
                    return Err(parse_err(
                        line,
                        "`demand` takes MOVEMENT RATE_PER_MIN START_S END_S",
                    ));
                }
                let movement = movement_field(line, tokens[1])?;
                let rate = int_field(line, "demand", tokens[2])?;
                let start = int_field(line, "demand", tokens[3])?;
                let end = int_field(line, "demand", tokens[4])?;
                if rate < 1 {
                    return Err(parse_err(line, "demand rate must be at least 1 per minute"));
                }
                let mut k = 0u64;
                loop {
                    let arrival = demand_arrival(start, k, rate);
                    if arrival >= end as u64 {
                        break;
                    }
                    arrivals.push((movement, arrival as u32));
                    if arrivals.len() > MAX_VEHICLES {
                        return Err(parse_err(
                            line,
                            format!("demand expands past {MAX_VEHICLES} vehicles"),
                        ));
                    }
                    k += 1;
                }
            }
            other => {
                return Err(parse_err(line, format!("unknown directive `{other}`")));
            }
        }
    }

    let horizon = horizon.ok_or(LoadError::MissingHorizon)?;
    let scenario = Scenario::from_arrivals(arrivals, horizon).with_timing(startup_lost, cross_time);
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

/// Serializes a scenario with every arrival explicit; feeding the output back
/// through [`parse_scenario`] reproduces the scenario exactly.
pub fn scenario_to_string(scenario: &Scenario) -> String {
    let mut out = String::new();
    out.push_str(&format!("horizon {}\n", scenario.horizon));
    out.push_str(&format!("startup_lost {}\n", scenario.startup_lost));
    out.push_str(&format!("cross_time {}\n", scenario.cross_time));
    for v in &scenario.vehicles {
        out.push_str(&format!("vehicle {} {}\n", v.movement, v.entrance_time));
    }
    out
}
