//! Binary GCD network. Mirrors `numtheory::binary_gcd` stage by stage:
//! a zero-input swap, stripping common factors of two, making `u` odd, `2n`
//! unrolled subtract-and-halve rounds, and a final shift of the result.

use super::arith::{compare_greater, controlled_subtract, controlled_swap, nonzero_flag};
use super::circuit::{RegisterLayout, ReversibleCircuit, Role};
use super::gate::{Control, Direction};
use super::{check_bits, clean_output};
use crate::error::Result;

pub const U: &str = "u";
pub const V: &str = "v";
pub const R: &str = "r";
pub const ZERO: &str = "zero";
pub const STRIP: &str = "strip";
pub const ODDIFY: &str = "oddify";
pub const GO: &str = "go";
pub const EVEN: &str = "even";
pub const CMP: &str = "cmp";
pub const TMP: &str = "tmp";
pub const CARRY: &str = "carry";

/// Unrolled main-loop rounds for `n`-bit operands.
pub fn gcd_rounds(n: u32) -> usize {
    2 * n as usize
}

/// `|u⟩|v⟩|0…⟩ -> |…⟩|gcd(u, v)⟩_r|garbage⟩`, with `gcd(u, 0) = u`.
pub fn build_gcd_circuit(n: u32) -> Result<ReversibleCircuit> {
    check_bits(n)?;
    let w = n as usize;
    let rounds = gcd_rounds(n);
    let mut layout = RegisterLayout::new();
    let u = layout.add(U, w, Role::Input)?;
    let v = layout.add(V, w, Role::Input)?;
    let r = layout.add(R, w, Role::Output)?;
    let zero = layout.add(ZERO, 1, Role::Garbage)?.bit(0);
    let strip = layout.add(STRIP, w - 1, Role::Garbage)?;
    let oddify = layout.add(ODDIFY, w - 1, Role::Garbage)?;
    let go = layout.add(GO, rounds, Role::Garbage)?;
    let even = layout.add(EVEN, rounds, Role::Garbage)?;
    let cmp = layout.add(CMP, rounds, Role::Garbage)?;
    let tmp = layout.add(TMP, w, Role::Clean)?;
    let carry = layout.add(CARRY, 1, Role::Clean)?.bit(0);
    let mut c = ReversibleCircuit::new(layout);

    let all_off: Vec<Control> = u.bits().into_iter().map(Control::off).collect();
    c.mcx(&all_off, zero)?;
    controlled_swap(&mut c, &[Control::on(zero)], u, v)?;

    for i in 0..w - 1 {
        let flag = strip.bit(i);
        c.mcx(&[Control::off(u.bit(0)), Control::off(v.bit(0))], flag)?;
        c.rotate(&[Control::on(flag)], u, Direction::Right)?;
        c.rotate(&[Control::on(flag)], v, Direction::Right)?;
    }
    for i in 0..w - 1 {
        let flag = oddify.bit(i);
        c.mcx(&[Control::off(u.bit(0))], flag)?;
        c.rotate(&[Control::on(flag)], u, Direction::Right)?;
    }

    for j in 0..rounds {
        let (g, e, k) = (go.bit(j), even.bit(j), cmp.bit(j));
        nonzero_flag(&mut c, &[], v, g)?;
        c.mcx(&[Control::on(g), Control::off(v.bit(0))], e)?;
        let odd = [Control::on(g), Control::off(e)];
        compare_greater(&mut c, &odd, u, v, carry, k)?;
        controlled_swap(&mut c, &[Control::on(k)], u, v)?;
        controlled_subtract(&mut c, &odd, u, v, tmp, carry)?;
        c.rotate(&[Control::on(g)], v, Direction::Right)?;
    }

    for i in 0..w {
        c.cx(u.bit(i), r.bit(i))?;
    }
    for i in 0..w - 1 {
        c.rotate(&[Control::on(strip.bit(i))], r, Direction::Left)?;
    }
    Ok(c)
}

/// [`build_gcd_circuit`] followed by a copy into `out` and the inverse
/// network: inputs are restored and every other register returns to 0.
pub fn build_gcd_circuit_clean(n: u32) -> Result<ReversibleCircuit> {
    clean_output(&build_gcd_circuit(n)?, R)
}
