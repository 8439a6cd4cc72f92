//! Bit-level reversible circuits: a gate model over named registers,
//! simulation, bijection checks, gate counting, a text netlist, and the
//! binary GCD and Jacobi networks.

mod arith;
mod bits;
mod circuit;
pub mod gcd;
mod gate;
pub mod jacobi;
mod netlist;

pub use arith::{add_in_place, compare_greater, controlled_subtract, controlled_swap, nonzero_flag};
pub use bits::BitString;
pub use circuit::{
    fit_scaling, gate_count, gate_is_bijective, permutation_check_method, simulate_circuit,
    verify_permutation, write_gate_count_csv, CircuitState, GateCount, PermutationCheck, Reg,
    Register, RegisterLayout, ReversibleCircuit, Role, ScalingFit, MAX_BRANCHES,
    MAX_GLOBAL_CHECK_WIDTH, MAX_LOCAL_CHECK_WIDTH,
};
pub use gate::{Control, Direction, Gate, GateKind};
pub use gcd::{build_gcd_circuit, build_gcd_circuit_clean};
pub use jacobi::{build_jacobi_circuit, build_jacobi_circuit_clean, decode_jacobi};
pub use netlist::{parse_netlist, to_netlist};

use crate::error::{Error, Result};

/// Smallest and largest operand widths the constructions accept.
pub const MIN_BITS: u32 = 2;
pub const MAX_BITS: u32 = 32;

/// Register receiving the result in the clean-output variants.
pub const OUT: &str = "out";

fn check_bits(n: u32) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&n) {
        return Err(Error::Circuit(format!(
            "bit width {n} outside [{MIN_BITS}, {MAX_BITS}]"
        )));
    }
    Ok(())
}

/// Compute, copy `output` into a fresh `out` register, uncompute.
pub fn clean_output(base: &ReversibleCircuit, output: &str) -> Result<ReversibleCircuit> {
    let (src, _) = base.layout().get(output)?;
    let mut layout = RegisterLayout::new();
    for r in base.layout().registers() {
        let role = if r.role.is_input() {
            Role::RestoredInput
        } else {
            Role::Clean
        };
        layout.add(&r.name, r.width, role)?;
    }
    let out = layout.add(OUT, src.width, Role::Output)?;
    let mut c = ReversibleCircuit::new(layout);
    c.append(base.gates())?;
    for i in 0..src.width {
        c.cx(src.bit(i), out.bit(i))?;
    }
    c.append(base.inverse().gates())?;
    Ok(c)
}
