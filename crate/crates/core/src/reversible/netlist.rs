//! Line-oriented netlist text.
//!
//! ```text
//! register u 4 input
//! toffoli +3 -5 -> 7
//! cswap +3 -> 1 2
//! cshift.r +3 -> 4 5 6 7
//! cadd +3 -> 0 1 | 4 5
//! ```
//!
//! Controls are `+bit` (fires on 1) or `-bit` (fires on 0); multi-bit
//! operands are listed least significant first. `#` starts a comment.

use std::fmt::Write;

use super::circuit::{RegisterLayout, ReversibleCircuit, Role};
use super::gate::{Control, Direction, Gate};
use crate::error::{Error, Result};

pub fn to_netlist(circuit: &ReversibleCircuit) -> String {
    let mut out = String::new();
    for r in circuit.layout().registers() {
        writeln!(out, "register {} {} {}", r.name, r.width, r.role.name()).unwrap();
    }
    for g in circuit.gates() {
        let keyword = match g {
            Gate::Rotate {
                direction: Direction::Right,
                ..
            } => "cshift.r".to_string(),
            Gate::Rotate { .. } => "cshift.l".to_string(),
            Gate::Add { subtract: true, .. } => "csub".to_string(),
            other => other.kind().name().to_string(),
        };
        let controls: Vec<String> = g
            .controls()
            .iter()
            .map(|c| format!("{}{}", if c.polarity { '+' } else { '-' }, c.bit))
            .collect();
        let join = |v: &[usize]| v.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ");
        let targets = match g {
            Gate::Not { target, .. } => target.to_string(),
            Gate::Swap { a, b, .. } => format!("{a} {b}"),
            Gate::Rotate { bits, .. } => join(bits),
            Gate::Add { src, dst, .. } => format!("{} | {}", join(src), join(dst)),
        };
        let mut line = keyword;
        for c in controls {
            line.push(' ');
            line.push_str(&c);
        }
        writeln!(out, "{line} -> {targets}").unwrap();
    }
    out
}

pub fn parse_netlist(text: &str) -> Result<ReversibleCircuit> {
    let mut layout = RegisterLayout::new();
    let mut gates = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let err = |detail: String| Error::Netlist {
            line: line_no,
            detail,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        if keyword == "register" {
            if !gates.is_empty() {
                return Err(err("registers must precede gates".into()));
            }
            let fields: Vec<&str> = words.collect();
            let [name, width, role] = fields[..] else {
                return Err(err("expected `register NAME WIDTH ROLE`".into()));
            };
            let width = width
                .parse()
                .map_err(|_| err(format!("bad register width {width:?}")))?;
            let role = Role::parse(role).ok_or_else(|| err(format!("unknown role {role:?}")))?;
            layout
                .add(name, width, role)
                .map_err(|e| err(e.to_string()))?;
            continue;
        }
        let (head, tail) = line
            .split_once("->")
            .ok_or_else(|| err("missing `->` between controls and targets".into()))?;
        let mut head = head.split_whitespace();
        head.next();
        let controls = head
            .map(|tok| {
                let (polarity, bit) = match tok.split_at(1) {
                    ("+", rest) => (true, rest),
                    ("-", rest) => (false, rest),
                    _ => return Err(err(format!("control {tok:?} needs a + or - prefix"))),
                };
                let bit = bit.parse().map_err(|_| err(format!("bad bit address {tok:?}")))?;
                Ok(Control { bit, polarity })
            })
            .collect::<Result<Vec<_>>>()?;
        let bits = |s: &str| -> Result<Vec<usize>> {
            s.split_whitespace()
                .map(|t| t.parse().map_err(|_| err(format!("bad bit address {t:?}"))))
                .collect()
        };
        let gate = match keyword {
            "not" | "cnot" | "toffoli" | "mcx" => {
                let [target] = bits(tail)?[..] else {
                    return Err(err("NOT-family gates take one target".into()));
                };
                Gate::Not { controls, target }
            }
            "cswap" => {
                let [a, b] = bits(tail)?[..] else {
                    return Err(err("cswap takes two targets".into()));
                };
                Gate::Swap { controls, a, b }
            }
            "cshift.r" | "cshift.l" => Gate::Rotate {
                controls,
                bits: bits(tail)?,
                direction: if keyword == "cshift.r" {
                    Direction::Right
                } else {
                    Direction::Left
                },
            },
            "cadd" | "csub" => {
                let (src, dst) = tail
                    .split_once('|')
                    .ok_or_else(|| err("adder needs `src | dst`".into()))?;
                Gate::Add {
                    controls,
                    src: bits(src)?,
                    dst: bits(dst)?,
                    subtract: keyword == "csub",
                }
            }
            other => return Err(err(format!("unknown gate {other:?}"))),
        };
        if matches!(gate, Gate::Not { .. }) && gate.kind().name() != keyword {
            return Err(err(format!(
                "{keyword} does not match {} controls",
                gate.controls().len()
            )));
        }
        gates.push((line_no, gate));
    }
    let mut circuit = ReversibleCircuit::new(layout);
    for (line, gate) in gates {
        circuit.push(gate).map_err(|e| Error::Netlist {
            line,
            detail: e.to_string(),
        })?;
    }
    Ok(circuit)
}
