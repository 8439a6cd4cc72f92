//! Binary Jacobi network for a fixed odd modulus. Mirrors
//! `numtheory::jacobi_binary`: `2n` unrolled rounds of halve-or-subtract on
//! `a`, with the reciprocity and second-supplement sign flips controlled on
//! the two and three lowest bits.

use super::arith::{compare_greater, controlled_subtract, controlled_swap, nonzero_flag};
use super::circuit::{RegisterLayout, ReversibleCircuit, Role};
use super::gate::{Control, Direction};
use super::{check_bits, clean_output};
use crate::error::{Error, Result};
use crate::numtheory::JacobiValue;

pub const A: &str = "a";
pub const B: &str = "b";
pub const SIGN: &str = "sign";
pub const UNIT: &str = "unit";
pub const R: &str = "r";
pub const GO: &str = "go";
pub const EVEN: &str = "even";
pub const CMP: &str = "cmp";
pub const TMP: &str = "tmp";
pub const CARRY: &str = "carry";

/// `|m⟩|0…⟩ -> |…⟩|r⟩` with `r = 1` for `χ_N(m) = 1`, `N - 1` for `-1` and
/// `0` for `0`.
pub fn build_jacobi_circuit(n: u32, modulus: u64) -> Result<ReversibleCircuit> {
    check_bits(n)?;
    if modulus % 2 == 0 || modulus < 3 || modulus >> n != 0 {
        return Err(Error::InvalidModulus {
            modulus: modulus.to_string(),
            reason: "the Jacobi network needs an odd modulus with 3 <= N < 2^n",
        });
    }
    let w = n as usize;
    let rounds = 2 * w;
    let mut layout = RegisterLayout::new();
    let a = layout.add(A, w, Role::Input)?;
    let b = layout.add(B, w, Role::Garbage)?;
    let sign = layout.add(SIGN, 1, Role::Garbage)?.bit(0);
    let go = layout.add(GO, rounds, Role::Garbage)?;
    let even = layout.add(EVEN, rounds, Role::Garbage)?;
    let cmp = layout.add(CMP, rounds, Role::Garbage)?;
    let unit = layout.add(UNIT, 1, Role::Garbage)?.bit(0);
    let r = layout.add(R, w, Role::Output)?;
    let tmp = layout.add(TMP, w, Role::Clean)?;
    let carry = layout.add(CARRY, 1, Role::Clean)?.bit(0);
    let mut c = ReversibleCircuit::new(layout);

    for i in 0..w {
        if modulus >> i & 1 == 1 {
            c.x(b.bit(i))?;
        }
    }

    for j in 0..rounds {
        let (g, e, k) = (go.bit(j), even.bit(j), cmp.bit(j));
        nonzero_flag(&mut c, &[], a, g)?;
        c.mcx(&[Control::on(g), Control::off(a.bit(0))], e)?;
        let odd = [Control::on(g), Control::off(e)];
        compare_greater(&mut c, &odd, b, a, carry, k)?;
        // Both odd here, so bit 1 decides the residue mod 4.
        c.mcx(&[Control::on(k), Control::on(a.bit(1)), Control::on(b.bit(1))], sign)?;
        controlled_swap(&mut c, &[Control::on(k)], a, b)?;
        controlled_subtract(&mut c, &odd, b, a, tmp, carry)?;
        c.rotate(&[Control::on(g)], a, Direction::Right)?;
        // b mod 8 in {3, 5} iff bits 1 and 2 differ.
        if w >= 3 {
            c.mcx(&[Control::on(g), Control::on(b.bit(1)), Control::off(b.bit(2))], sign)?;
            c.mcx(&[Control::on(g), Control::off(b.bit(1)), Control::on(b.bit(2))], sign)?;
        } else {
            c.mcx(&[Control::on(g), Control::on(b.bit(1))], sign)?;
        }
    }

    let mut is_one = vec![Control::on(b.bit(0))];
    is_one.extend((1..w).map(|i| Control::off(b.bit(i))));
    c.mcx(&is_one, unit)?;
    c.mcx(&[Control::on(unit), Control::off(sign)], r.bit(0))?;
    for i in 0..w {
        if (modulus - 1) >> i & 1 == 1 {
            c.mcx(&[Control::on(unit), Control::on(sign)], r.bit(i))?;
        }
    }
    Ok(c)
}

/// [`build_jacobi_circuit`] with the result copied to `out` and everything
/// else uncomputed.
pub fn build_jacobi_circuit_clean(n: u32, modulus: u64) -> Result<ReversibleCircuit> {
    clean_output(&build_jacobi_circuit(n, modulus)?, R)
}

/// Reads the `r` encoding back as a symbol value.
pub fn decode_jacobi(r: u64, modulus: u64) -> Option<JacobiValue> {
    match r {
        0 => Some(JacobiValue::Zero),
        1 => Some(JacobiValue::One),
        x if x == modulus - 1 => Some(JacobiValue::MinusOne),
        _ => None,
    }
}
