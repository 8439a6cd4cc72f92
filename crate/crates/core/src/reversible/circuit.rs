use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use super::bits::BitString;
use super::gate::{Control, Direction, Gate, GateKind};
use crate::error::{Error, Result};

/// Widest circuit [`verify_permutation`] checks by enumerating the whole basis.
pub const MAX_GLOBAL_CHECK_WIDTH: usize = 24;

/// Widest single-gate support enumerated by the gate-local check.
pub const MAX_LOCAL_CHECK_WIDTH: usize = 24;

/// Most branches [`simulate_circuit`] accepts in a superposition.
pub const MAX_BRANCHES: usize = 1 << 16;

/// Entry and exit contract of a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    /// Arbitrary on entry, unconstrained on exit.
    Input,
    /// Arbitrary on entry, returned unchanged.
    RestoredInput,
    /// Zero on entry, holds the result on exit.
    Output,
    /// Zero on entry and on exit.
    Clean,
    /// Zero on entry, left holding history.
    Garbage,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Input => "input",
            Role::RestoredInput => "restored-input",
            Role::Output => "output",
            Role::Clean => "clean",
            Role::Garbage => "garbage",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        [
            Role::Input,
            Role::RestoredInput,
            Role::Output,
            Role::Clean,
            Role::Garbage,
        ]
        .into_iter()
        .find(|r| r.name() == s)
    }

    pub fn is_input(self) -> bool {
        matches!(self, Role::Input | Role::RestoredInput)
    }
}

/// Location of a register inside the circuit's bit string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reg {
    pub offset: usize,
    pub width: usize,
}

impl Reg {
    pub fn bit(&self, i: usize) -> usize {
        assert!(i < self.width, "bit {i} outside register of width {}", self.width);
        self.offset + i
    }

    pub fn bits(&self) -> Vec<usize> {
        (self.offset..self.offset + self.width).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Register {
    pub name: String,
    pub width: usize,
    pub role: Role,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
}

impl RegisterLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, width: usize, role: Role) -> Result<Reg> {
        if width == 0 || width > 64 {
            return Err(Error::Circuit(format!(
                "register {name} has unsupported width {width}"
            )));
        }
        if self.registers.iter().any(|r| r.name == name) {
            return Err(Error::Circuit(format!("register name {name} is already used")));
        }
        let offset = self.width();
        self.registers.push(Register {
            name: name.to_string(),
            width,
            role,
        });
        Ok(Reg { offset, width })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn width(&self) -> usize {
        self.registers.iter().map(|r| r.width).sum()
    }

    pub fn get(&self, name: &str) -> Result<(Reg, Role)> {
        let mut offset = 0;
        for r in &self.registers {
            if r.name == name {
                return Ok((
                    Reg {
                        offset,
                        width: r.width,
                    },
                    r.role,
                ));
            }
            offset += r.width;
        }
        Err(Error::Circuit(format!("no register named {name}")))
    }

    fn with_offsets(&self) -> impl Iterator<Item = (&Register, Reg)> {
        self.registers.iter().scan(0, |offset, r| {
            let reg = Reg {
                offset: *offset,
                width: r.width,
            };
            *offset += r.width;
            Some((r, reg))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversibleCircuit {
    layout: RegisterLayout,
    gates: Vec<Gate>,
}

impl ReversibleCircuit {
    pub fn new(layout: RegisterLayout) -> Self {
        ReversibleCircuit {
            layout,
            gates: Vec::new(),
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn width(&self) -> usize {
        self.layout.width()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.width())?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn x(&mut self, target: usize) -> Result<()> {
        self.mcx(&[], target)
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.mcx(&[Control::on(control)], target)
    }

    pub fn ccx(&mut self, a: usize, b: usize, target: usize) -> Result<()> {
        self.mcx(&[Control::on(a), Control::on(b)], target)
    }

    pub fn mcx(&mut self, controls: &[Control], target: usize) -> Result<()> {
        self.push(Gate::Not {
            controls: controls.to_vec(),
            target,
        })
    }

    pub fn cswap(&mut self, controls: &[Control], a: usize, b: usize) -> Result<()> {
        self.push(Gate::Swap {
            controls: controls.to_vec(),
            a,
            b,
        })
    }

    pub fn rotate(&mut self, controls: &[Control], reg: Reg, direction: Direction) -> Result<()> {
        self.push(Gate::Rotate {
            controls: controls.to_vec(),
            bits: reg.bits(),
            direction,
        })
    }

    /// Appends `other`, which must share this circuit's width.
    pub fn append(&mut self, other: &[Gate]) -> Result<()> {
        for g in other {
            self.push(g.clone())?;
        }
        Ok(())
    }

    pub fn inverse(&self) -> ReversibleCircuit {
        ReversibleCircuit {
            layout: self.layout.clone(),
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Basis state with the named registers set and every other bit zero.
    pub fn encode(&self, values: &[(&str, u64)]) -> Result<BitString> {
        let mut state = BitString::zeros(self.width());
        for &(name, value) in values {
            let (reg, _) = self.layout.get(name)?;
            if reg.width < 64 && value >> reg.width != 0 {
                return Err(Error::Circuit(format!(
                    "value {value} does not fit register {name} of width {}",
                    reg.width
                )));
            }
            state.write(reg.offset, reg.width, value);
        }
        Ok(state)
    }

    pub fn read(&self, state: &BitString, name: &str) -> Result<u64> {
        let (reg, _) = self.layout.get(name)?;
        Ok(state.read(reg.offset, reg.width))
    }

    pub fn run(&self, state: &mut BitString) {
        for g in &self.gates {
            g.apply(state);
        }
    }

    /// Registers violating their exit contract after running from `input`,
    /// which must satisfy the entry contract.
    pub fn contract_violations(&self, input: &BitString) -> Result<Vec<String>> {
        for (r, reg) in self.layout.with_offsets() {
            if !r.role.is_input() && input.read(reg.offset, reg.width) != 0 {
                return Err(Error::Circuit(format!(
                    "register {} must enter as zero",
                    r.name
                )));
            }
        }
        let mut output = input.clone();
        self.run(&mut output);
        Ok(self
            .layout
            .with_offsets()
            .filter(|(r, reg)| match r.role {
                Role::Clean => output.read(reg.offset, reg.width) != 0,
                Role::RestoredInput => {
                    output.read(reg.offset, reg.width) != input.read(reg.offset, reg.width)
                }
                _ => false,
            })
            .map(|(r, _)| r.name.clone())
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CircuitState {
    Basis(BitString),
    Superposition(Vec<(BitString, Complex64)>),
}

/// Runs the circuit on a basis state or, branch by branch, on a sparse
/// superposition. Output branches are sorted by basis state.
pub fn simulate_circuit(circuit: &ReversibleCircuit, input: &CircuitState) -> Result<CircuitState> {
    let check = |s: &BitString| {
        if s.width() != circuit.width() {
            Err(Error::Circuit(format!(
                "state width {} does not match circuit width {}",
                s.width(),
                circuit.width()
            )))
        } else {
            Ok(())
        }
    };
    match input {
        CircuitState::Basis(s) => {
            check(s)?;
            let mut out = s.clone();
            circuit.run(&mut out);
            Ok(CircuitState::Basis(out))
        }
        CircuitState::Superposition(branches) => {
            if branches.len() > MAX_BRANCHES {
                return Err(Error::Circuit(format!(
                    "{} branches exceed the limit of {MAX_BRANCHES}",
                    branches.len()
                )));
            }
            let mut merged: BTreeMap<BitString, Complex64> = BTreeMap::new();
            for (s, amp) in branches {
                check(s)?;
                let mut out = s.clone();
                circuit.run(&mut out);
                *merged.entry(out).or_default() += amp;
            }
            Ok(CircuitState::Superposition(merged.into_iter().collect()))
        }
    }
}

/// How [`verify_permutation`] established its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PermutationCheck {
    /// Every basis state of the full width was mapped and images compared.
    Global,
    /// Every gate was enumerated over its own support and found bijective;
    /// a composition of bijections is a bijection.
    GateLocal,
}

pub fn permutation_check_method(circuit: &ReversibleCircuit) -> PermutationCheck {
    if circuit.width() <= MAX_GLOBAL_CHECK_WIDTH {
        PermutationCheck::Global
    } else {
        PermutationCheck::GateLocal
    }
}

/// True iff the circuit is a bijection on its basis. Narrow circuits are
/// checked exhaustively; wider ones gate by gate.
pub fn verify_permutation(circuit: &ReversibleCircuit) -> Result<bool> {
    for g in circuit.gates() {
        g.validate(circuit.width())?;
    }
    match permutation_check_method(circuit) {
        PermutationCheck::Global => Ok(verify_global(circuit)),
        PermutationCheck::GateLocal => {
            for g in circuit.gates() {
                if !gate_is_bijective(g)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

fn verify_global(circuit: &ReversibleCircuit) -> bool {
    let width = circuit.width();
    let size = 1usize << width;
    let mut seen = vec![0u64; size.div_ceil(64)];
    for index in 0..size as u64 {
        let mut s = BitString::from_index(width, index);
        circuit.run(&mut s);
        let image = s.to_index() as usize;
        if seen[image / 64] >> (image % 64) & 1 == 1 {
            return false;
        }
        seen[image / 64] |= 1 << (image % 64);
    }
    true
}

/// Enumerates the gate over its support bits, relabeled to `0..k`.
pub fn gate_is_bijective(gate: &Gate) -> Result<bool> {
    let support = gate.support();
    let k = support.len();
    if k > MAX_LOCAL_CHECK_WIDTH {
        return Err(Error::Circuit(format!(
            "{} gate support of {k} bits is too wide to enumerate",
            gate.kind()
        )));
    }
    let relabel: HashMap<usize, usize> = support.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let local = relabel_gate(gate, &relabel);
    let size = 1usize << k;
    let mut seen = vec![false; size];
    for index in 0..size as u64 {
        let mut s = BitString::from_index(k, index);
        local.apply(&mut s);
        let image = s.to_index() as usize;
        if std::mem::replace(&mut seen[image], true) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn relabel_gate(gate: &Gate, map: &HashMap<usize, usize>) -> Gate {
    let controls = gate
        .controls()
        .iter()
        .map(|c| Control {
            bit: map[&c.bit],
            polarity: c.polarity,
        })
        .collect();
    let bits = |v: &[usize]| v.iter().map(|b| map[b]).collect::<Vec<_>>();
    match gate {
        Gate::Not { target, .. } => Gate::Not {
            controls,
            target: map[target],
        },
        Gate::Swap { a, b, .. } => Gate::Swap {
            controls,
            a: map[a],
            b: map[b],
        },
        Gate::Rotate {
            bits: reg,
            direction,
            ..
        } => Gate::Rotate {
            controls,
            bits: bits(reg),
            direction: *direction,
        },
        Gate::Add {
            src, dst, subtract, ..
        } => Gate::Add {
            controls,
            src: bits(src),
            dst: bits(dst),
            subtract: *subtract,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateCount {
    pub total: usize,
    pub by_kind: BTreeMap<GateKind, usize>,
}

pub fn gate_count(circuit: &ReversibleCircuit) -> GateCount {
    let mut by_kind = BTreeMap::new();
    for g in circuit.gates() {
        *by_kind.entry(g.kind()).or_insert(0) += 1;
    }
    GateCount {
        total: circuit.gates().len(),
        by_kind,
    }
}

/// CSV with columns `n,total` followed by one column per gate kind.
pub fn write_gate_count_csv<W: Write>(rows: &[(u32, GateCount)], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["n".to_string(), "total".to_string()];
    header.extend(GateKind::ALL.iter().map(|k| k.name().to_string()));
    out.write_record(&header)?;
    for (n, count) in rows {
        let mut record = vec![n.to_string(), count.total.to_string()];
        record.extend(
            GateKind::ALL
                .iter()
                .map(|k| count.by_kind.get(k).copied().unwrap_or(0).to_string()),
        );
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Least-squares fits of gate counts against bit width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    /// `count ≈ c·n²`.
    pub c: f64,
    pub r2_quadratic: f64,
    /// `count ≈ a + b·n`.
    pub a: f64,
    pub b: f64,
    pub r2_linear: f64,
}

pub fn fit_scaling(points: &[(u32, usize)]) -> ScalingFit {
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y as f64).collect();
    let len = xs.len() as f64;
    let mean = ys.iter().sum::<f64>() / len;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let r2 = |pred: &dyn Fn(f64) -> f64| {
        let ss_res: f64 = xs.iter().zip(&ys).map(|(&x, y)| (y - pred(x)).powi(2)).sum();
        1.0 - ss_res / ss_tot
    };

    let c = xs.iter().zip(&ys).map(|(x, y)| x * x * y).sum::<f64>()
        / xs.iter().map(|x| x.powi(4)).sum::<f64>();
    let mx = xs.iter().sum::<f64>() / len;
    let b = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - mean)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let a = mean - b * mx;
    ScalingFit {
        c,
        r2_quadratic: r2(&|x| c * x * x),
        a,
        b,
        r2_linear: r2(&|x| a + b * x),
    }
}
