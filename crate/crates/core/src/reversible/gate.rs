use std::fmt;

use serde::Serialize;

use super::bits::BitString;
use crate::error::{Error, Result};

/// A control line; `polarity` is the bit value that enables the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub bit: usize,
    pub polarity: bool,
}

impl Control {
    pub fn on(bit: usize) -> Self {
        Control { bit, polarity: true }
    }

    pub fn off(bit: usize) -> Self {
        Control {
            bit,
            polarity: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Toward the least significant bit: halves a value whose low bit is 0.
    Right,
    Left,
}

impl Direction {
    fn reversed(self) -> Self {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum GateKind {
    Not,
    Cnot,
    Toffoli,
    Mcx,
    ControlledSwap,
    ControlledShift,
    ControlledAdd,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::Not,
        GateKind::Cnot,
        GateKind::Toffoli,
        GateKind::Mcx,
        GateKind::ControlledSwap,
        GateKind::ControlledShift,
        GateKind::ControlledAdd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Not => "not",
            GateKind::Cnot => "cnot",
            GateKind::Toffoli => "toffoli",
            GateKind::Mcx => "mcx",
            GateKind::ControlledSwap => "cswap",
            GateKind::ControlledShift => "cshift",
            GateKind::ControlledAdd => "cadd",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A basis-state permutation acting on bit addresses of a circuit.
///
/// Multi-bit operands are listed least significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    Not {
        controls: Vec<Control>,
        target: usize,
    },
    Swap {
        controls: Vec<Control>,
        a: usize,
        b: usize,
    },
    Rotate {
        controls: Vec<Control>,
        bits: Vec<usize>,
        direction: Direction,
    },
    /// `dst ± src mod 2^w`.
    Add {
        controls: Vec<Control>,
        src: Vec<usize>,
        dst: Vec<usize>,
        subtract: bool,
    },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Not { controls, .. } => match controls.len() {
                0 => GateKind::Not,
                1 => GateKind::Cnot,
                2 => GateKind::Toffoli,
                _ => GateKind::Mcx,
            },
            Gate::Swap { .. } => GateKind::ControlledSwap,
            Gate::Rotate { .. } => GateKind::ControlledShift,
            Gate::Add { .. } => GateKind::ControlledAdd,
        }
    }

    pub fn controls(&self) -> &[Control] {
        match self {
            Gate::Not { controls, .. }
            | Gate::Swap { controls, .. }
            | Gate::Rotate { controls, .. }
            | Gate::Add { controls, .. } => controls,
        }
    }

    /// Bits the gate may change.
    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::Not { target, .. } => vec![*target],
            Gate::Swap { a, b, .. } => vec![*a, *b],
            Gate::Rotate { bits, .. } => bits.clone(),
            Gate::Add { src, dst, .. } => src.iter().chain(dst).copied().collect(),
        }
    }

    /// Controls followed by targets.
    pub fn support(&self) -> Vec<usize> {
        let mut bits: Vec<usize> = self.controls().iter().map(|c| c.bit).collect();
        bits.extend(self.targets());
        bits
    }

    /// Rejects out-of-range, repeated or overlapping bit addresses.
    pub fn validate(&self, width: usize) -> Result<()> {
        let support = self.support();
        if let Some(&bit) = support.iter().find(|&&b| b >= width) {
            return Err(Error::Circuit(format!(
                "{} gate addresses bit {bit} outside width {width}",
                self.kind()
            )));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Circuit(format!(
                "{} gate uses bit {} more than once",
                self.kind(),
                w[0]
            )));
        }
        match self {
            Gate::Rotate { bits, .. } if bits.is_empty() || bits.len() > 64 => Err(Error::Circuit(
                format!("shift over {} bits is unsupported", bits.len()),
            )),
            Gate::Add { src, dst, .. }
                if src.len() != dst.len() || src.is_empty() || src.len() > 64 =>
            {
                Err(Error::Circuit(format!(
                    "adder operands have widths {} and {}",
                    src.len(),
                    dst.len()
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Rotate {
                controls,
                bits,
                direction,
            } => Gate::Rotate {
                controls: controls.clone(),
                bits: bits.clone(),
                direction: direction.reversed(),
            },
            Gate::Add {
                controls,
                src,
                dst,
                subtract,
            } => Gate::Add {
                controls: controls.clone(),
                src: src.clone(),
                dst: dst.clone(),
                subtract: !subtract,
            },
            other => other.clone(),
        }
    }

    fn enabled(&self, state: &BitString) -> bool {
        self.controls()
            .iter()
            .all(|c| state.get(c.bit) == c.polarity)
    }

    pub fn apply(&self, state: &mut BitString) {
        if !self.enabled(state) {
            return;
        }
        match self {
            Gate::Not { target, .. } => state.flip(*target),
            Gate::Swap { a, b, .. } => {
                let (x, y) = (state.get(*a), state.get(*b));
                state.set(*a, y);
                state.set(*b, x);
            }
            Gate::Rotate {
                bits, direction, ..
            } => {
                let w = bits.len() as u32;
                let value = state.gather(bits);
                let rotated = match direction {
                    Direction::Right => (value >> 1) | ((value & 1) << (w - 1)),
                    Direction::Left => ((value << 1) & mask(w)) | (value >> (w - 1)),
                };
                state.scatter(bits, rotated);
            }
            Gate::Add {
                src, dst, subtract, ..
            } => {
                let w = src.len() as u32;
                let (s, d) = (state.gather(src), state.gather(dst));
                let sum = if *subtract {
                    d.wrapping_sub(s)
                } else {
                    d.wrapping_add(s)
                };
                state.scatter(dst, sum & mask(w));
            }
        }
    }
}

pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}
