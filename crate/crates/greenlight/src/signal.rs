//! Traffic-light phase programs for a single four-approach intersection.
//!
//! A [`SignalProgram`] is an ordered list of [`Phase`]s interpreted cyclically
//! from simulation time 0. Each phase holds one [`SignalState`]: a four
//! character word (one character per through movement, canonical order
//! NS, SN, EW, WE) over the alphabet `G`/`y`/`r`.
//!
//! Programs have a compact literal text form used in logs and on the command
//! line: semicolon-separated `STATE:DURATION` tokens with no whitespace, e.g.
//! `GGrr:30;yyrr:3;rrGG:30;rryy:3`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// The four through movements, in canonical word order.
///
/// The index of a movement in this order is its position in every
/// [`SignalState`] word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Movement {
    /// North to south.
    Ns,
    /// South to north.
    Sn,
    /// East to west.
    Ew,
    /// West to east.
    We,
}

impl Movement {
    pub const ALL: [Movement; 4] = [Movement::Ns, Movement::Sn, Movement::Ew, Movement::We];

    /// Position of this movement in a state word.
    pub fn index(self) -> usize {
        match self {
            Movement::Ns => 0,
            Movement::Sn => 1,
            Movement::Ew => 2,
            Movement::We => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Movement::Ns => "NS",
            Movement::Sn => "SN",
            Movement::Ew => "EW",
            Movement::We => "WE",
        }
    }

    pub fn from_name(name: &str) -> Option<Movement> {
        match name {
            "NS" => Some(Movement::Ns),
            "SN" => Some(Movement::Sn),
            "EW" => Some(Movement::Ew),
            "WE" => Some(Movement::We),
            _ => None,
        }
    }
}

impl fmt::Display for Movement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One signal head color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalColor {
    Green,
    Yellow,
    Red,
}

impl SignalColor {
    pub fn as_char(self) -> char {
        match self {
            SignalColor::Green => 'G',
            SignalColor::Yellow => 'y',
            SignalColor::Red => 'r',
        }
    }

    pub fn from_char(c: char) -> Option<SignalColor> {
        match c {
            'G' => Some(SignalColor::Green),
            'y' => Some(SignalColor::Yellow),
            'r' => Some(SignalColor::Red),
            _ => None,
        }
    }

    /// Yellow still occupies the junction, so for conflict purposes it
    /// counts the same as green.
    pub fn occupies(self) -> bool {
        !matches!(self, SignalColor::Red)
    }
}

/// A four-character signal word, one color per movement in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignalState {
    colors: [SignalColor; 4],
}

impl SignalState {
    pub fn new(colors: [SignalColor; 4]) -> SignalState {
        SignalState { colors }
    }

    pub fn color(&self, movement: Movement) -> SignalColor {
        self.colors[movement.index()]
    }

    pub fn set_color(&mut self, movement: Movement, color: SignalColor) {
        self.colors[movement.index()] = color;
    }

    pub fn is_green(&self, movement: Movement) -> bool {
        self.color(movement) == SignalColor::Green
    }
}

impl FromStr for SignalState {
    type Err = ParseProgramError;

    fn from_str(s: &str) -> Result<SignalState, ParseProgramError> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 4 {
            return Err(ParseProgramError::BadStateWord(s.to_string()));
        }
        let mut colors = [SignalColor::Red; 4];
        for (i, c) in chars.into_iter().enumerate() {
            colors[i] = SignalColor::from_char(c)
                .ok_or_else(|| ParseProgramError::BadStateWord(s.to_string()))?;
        }
        Ok(SignalState { colors })
    }
}

impl fmt::Display for SignalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.colors {
            write!(f, "{}", c.as_char())?;
        }
        Ok(())
    }
}

/// A signal state held for a fixed number of whole seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase {
    pub state: SignalState,
    pub duration: u32,
}

impl Phase {
    pub fn new(state: SignalState, duration: u32) -> Phase {
        Phase { state, duration }
    }
}

/// A cyclic sequence of phases, starting at simulation time 0.
///
/// Phase `i` occupies the half-open interval `[start_i, start_i + duration_i)`
/// within one cycle, and the whole program repeats every
/// [`cycle_length`](SignalProgram::cycle_length) seconds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignalProgram {
    pub phases: Vec<Phase>,
}

impl SignalProgram {
    pub fn new(phases: Vec<Phase>) -> SignalProgram {
        SignalProgram { phases }
    }

    /// Sum of all phase durations.
    pub fn cycle_length(&self) -> Result<u32, Violation> {
        if self.phases.is_empty() {
            return Err(Violation::EmptyProgram);
        }
        Ok(self.phases.iter().map(|p| p.duration).sum())
    }

    /// The state shown at second `t`, wrapping modulo the cycle length.
    pub fn state_at(&self, t: u64) -> Result<SignalState, Violation> {
        Ok(self.phases[self.phase_index_at(t)?].state)
    }

    /// Index of the phase containing second `t`.
    pub fn phase_index_at(&self, t: u64) -> Result<usize, Violation> {
        let cycle = self.cycle_length()?;
        if cycle == 0 {
            return Err(Violation::NonPositiveDuration { phase: 0 });
        }
        let mut offset = (t % cycle as u64) as u32;
        for (i, phase) in self.phases.iter().enumerate() {
            if offset < phase.duration {
                return Ok(i);
            }
            offset -= phase.duration;
        }
        // Unreachable when durations sum to the cycle length, which they do
        // by construction; a zero-duration tail phase can never contain t.
        Ok(self.phases.len() - 1)
    }

    pub fn validate(&self, conflicts: &ConflictMatrix) -> Result<(), Violation> {
        validate_program(self, conflicts)
    }
}

impl fmt::Display for SignalProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, phase) in self.phases.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}:{}", phase.state, phase.duration)?;
        }
        Ok(())
    }
}

impl FromStr for SignalProgram {
    type Err = ParseProgramError;

    fn from_str(s: &str) -> Result<SignalProgram, ParseProgramError> {
        if s.is_empty() {
            return Err(ParseProgramError::Empty);
        }
        let mut phases = Vec::new();
        for token in s.split(';') {
            let (word, duration) = token
                .split_once(':')
                .ok_or_else(|| ParseProgramError::BadToken(token.to_string()))?;
            let state: SignalState = word.parse()?;
            let duration: u32 = duration
                .parse()
                .map_err(|_| ParseProgramError::BadDuration(token.to_string()))?;
            phases.push(Phase::new(state, duration));
        }
        Ok(SignalProgram::new(phases))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseProgramError {
    #[error("empty program literal")]
    Empty,
    #[error("bad phase token `{0}`, expected STATE:DURATION")]
    BadToken(String),
    #[error("bad state word `{0}`, expected 4 characters from {{G,y,r}}")]
    BadStateWord(String),
    #[error("bad duration in token `{0}`")]
    BadDuration(String),
}

/// Which movement pairs may not show green (or yellow) at the same time.
///
/// For the single-intersection topology the two north-south movements are
/// mutually compatible, the two east-west movements are mutually compatible,
/// and every cross pair conflicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictMatrix {
    conflicts: [[bool; 4]; 4],
}

impl ConflictMatrix {
    /// The fixed matrix for the four through movements.
    pub fn standard() -> ConflictMatrix {
        let mut conflicts = [[false; 4]; 4];
        for a in Movement::ALL {
            for b in Movement::ALL {
                let ns_axis_a = matches!(a, Movement::Ns | Movement::Sn);
                let ns_axis_b = matches!(b, Movement::Ns | Movement::Sn);
                conflicts[a.index()][b.index()] = ns_axis_a != ns_axis_b;
            }
        }
        ConflictMatrix { conflicts }
    }

    pub fn conflicts(&self, a: Movement, b: Movement) -> bool {
        self.conflicts[a.index()][b.index()]
    }
}

impl Default for ConflictMatrix {
    fn default() -> ConflictMatrix {
        ConflictMatrix::standard()
    }
}

/// A safety violation found by [`validate_program`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("phase {phase} shows green/yellow on conflicting movements {a} and {b}")]
    ConflictingGreens {
        phase: usize,
        a: Movement,
        b: Movement,
    },
    #[error("movement {movement} goes green to red after phase {phase} with no yellow between")]
    MissingYellow { phase: usize, movement: Movement },
    #[error("phase {phase} has duration 0")]
    NonPositiveDuration { phase: usize },
    #[error("program has no phases")]
    EmptyProgram,
}

/// Checks a program against the safety rules, reporting the first violation.
///
/// Rules, in priority order:
/// 1. no phase may show green or yellow simultaneously on two conflicting
///    movements;
/// 2. every green-to-red transition between consecutive phases (including the
///    wrap from last to first) must pass through a yellow phase for that
///    movement;
/// 3. every duration must be at least 1 second;
/// 4. the program must have at least one phase.
pub fn validate_program(
    program: &SignalProgram,
    conflicts: &ConflictMatrix,
) -> Result<(), Violation> {
    for (i, phase) in program.phases.iter().enumerate() {
        for (ai, a) in Movement::ALL.into_iter().enumerate() {
            for b in Movement::ALL.into_iter().skip(ai + 1) {
                if conflicts.conflicts(a, b)
                    && phase.state.color(a).occupies()
                    && phase.state.color(b).occupies()
                {
                    return Err(Violation::ConflictingGreens { phase: i, a, b });
                }
            }
        }
    }
    let k = program.phases.len();
    for i in 0..k {
        let next = &program.phases[(i + 1) % k];
        for m in Movement::ALL {
            if program.phases[i].state.color(m) == SignalColor::Green
                && next.state.color(m) == SignalColor::Red
            {
                return Err(Violation::MissingYellow {
                    phase: i,
                    movement: m,
                });
            }
        }
    }
    for (i, phase) in program.phases.iter().enumerate() {
        if phase.duration < 1 {
            return Err(Violation::NonPositiveDuration { phase: i });
        }
    }
    if program.phases.is_empty() {
        return Err(Violation::EmptyProgram);
    }
    Ok(())
}
