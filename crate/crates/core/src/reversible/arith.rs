//! Ripple-carry building blocks (Cuccaro MAJ/UMA chains) over registers of
//! equal width. Every block returns its scratch bits to their entry values.

use super::circuit::{Reg, ReversibleCircuit};
use super::gate::{Control, Gate};
use crate::error::Result;

fn maj(c: &mut ReversibleCircuit, x: usize, y: usize, z: usize) -> Result<()> {
    c.cx(z, y)?;
    c.cx(z, x)?;
    c.ccx(x, y, z)
}

fn maj_inverse(c: &mut ReversibleCircuit, x: usize, y: usize, z: usize) -> Result<()> {
    c.ccx(x, y, z)?;
    c.cx(z, x)?;
    c.cx(z, y)
}

fn uma(c: &mut ReversibleCircuit, x: usize, y: usize, z: usize) -> Result<()> {
    c.ccx(x, y, z)?;
    c.cx(z, x)?;
    c.cx(x, y)
}

/// `b += a mod 2^w`; `carry` enters and leaves as 0.
pub fn add_in_place(c: &mut ReversibleCircuit, a: Reg, b: Reg, carry: usize) -> Result<()> {
    let w = a.width;
    maj(c, carry, b.bit(0), a.bit(0))?;
    for i in 1..w {
        maj(c, a.bit(i - 1), b.bit(i), a.bit(i))?;
    }
    for i in (1..w).rev() {
        uma(c, a.bit(i - 1), b.bit(i), a.bit(i))?;
    }
    uma(c, carry, b.bit(0), a.bit(0))
}

/// `flag ^= controls ∧ (x > y)`, unsigned.
///
/// Runs the carry chain of `y + ¬x + 1`, whose carry out is `y >= x`, copies
/// its complement and unwinds the chain.
pub fn compare_greater(
    c: &mut ReversibleCircuit,
    controls: &[Control],
    x: Reg,
    y: Reg,
    carry: usize,
    flag: usize,
) -> Result<()> {
    let w = x.width;
    for i in 0..w {
        c.x(x.bit(i))?;
    }
    c.x(carry)?;
    maj(c, carry, y.bit(0), x.bit(0))?;
    for i in 1..w {
        maj(c, x.bit(i - 1), y.bit(i), x.bit(i))?;
    }
    let mut copy = controls.to_vec();
    copy.push(Control::off(x.bit(w - 1)));
    c.mcx(&copy, flag)?;
    for i in (1..w).rev() {
        maj_inverse(c, x.bit(i - 1), y.bit(i), x.bit(i))?;
    }
    maj_inverse(c, carry, y.bit(0), x.bit(0))?;
    c.x(carry)?;
    for i in 0..w {
        c.x(x.bit(i))?;
    }
    Ok(())
}

/// `dst -= src mod 2^w` when all controls hold, as `¬(¬dst + src)` with the
/// addend masked into `tmp`. `tmp` and `carry` enter and leave as 0.
pub fn controlled_subtract(
    c: &mut ReversibleCircuit,
    controls: &[Control],
    src: Reg,
    dst: Reg,
    tmp: Reg,
    carry: usize,
) -> Result<()> {
    let mask = |c: &mut ReversibleCircuit| -> Result<()> {
        for i in 0..src.width {
            let mut ctl = controls.to_vec();
            ctl.push(Control::on(src.bit(i)));
            c.mcx(&ctl, tmp.bit(i))?;
        }
        Ok(())
    };
    for i in 0..dst.width {
        c.x(dst.bit(i))?;
    }
    mask(c)?;
    add_in_place(c, tmp, dst, carry)?;
    mask(c)?;
    for i in 0..dst.width {
        c.x(dst.bit(i))?;
    }
    Ok(())
}

/// `flag ^= controls ∧ (reg != 0)`.
pub fn nonzero_flag(c: &mut ReversibleCircuit, controls: &[Control], reg: Reg, flag: usize) -> Result<()> {
    c.mcx(controls, flag)?;
    let mut all_zero = controls.to_vec();
    all_zero.extend(reg.bits().into_iter().map(Control::off));
    c.mcx(&all_zero, flag)
}

/// Swaps two registers bitwise under `controls`.
pub fn controlled_swap(c: &mut ReversibleCircuit, controls: &[Control], x: Reg, y: Reg) -> Result<()> {
    for i in 0..x.width {
        c.push(Gate::Swap {
            controls: controls.to_vec(),
            a: x.bit(i),
            b: y.bit(i),
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reversible::circuit::{RegisterLayout, Role};

    fn harness(w: usize) -> (ReversibleCircuit, [Reg; 4], usize) {
        let mut layout = RegisterLayout::new();
        let x = layout.add("x", w, Role::Input).unwrap();
        let y = layout.add("y", w, Role::Input).unwrap();
        let tmp = layout.add("tmp", w, Role::Clean).unwrap();
        let carry = layout.add("carry", 1, Role::Clean).unwrap();
        let flag = layout.add("flag", 2, Role::Garbage).unwrap();
        (ReversibleCircuit::new(layout), [x, y, tmp, flag], carry.bit(0))
    }

    #[test]
    fn blocks_match_integer_arithmetic() {
        for w in 1..=4usize {
            let (mut add, [x, y, _, _], carry) = harness(w);
            add_in_place(&mut add, x, y, carry).unwrap();

            let (mut cmp, [x2, y2, _, f2], carry2) = harness(w);
            compare_greater(&mut cmp, &[Control::on(f2.bit(1))], x2, y2, carry2, f2.bit(0)).unwrap();

            let (mut sub, [x3, y3, tmp3, f3], carry3) = harness(w);
            controlled_subtract(&mut sub, &[Control::on(f3.bit(1))], x3, y3, tmp3, carry3).unwrap();

            let m = (1u64 << w) - 1;
            for a in 0..=m {
                for b in 0..=m {
                    let mut s = add.encode(&[("x", a), ("y", b)]).unwrap();
                    add.run(&mut s);
                    assert_eq!(add.read(&s, "x").unwrap(), a);
                    assert_eq!(add.read(&s, "y").unwrap(), (a + b) & m);
                    assert!(add.contract_violations(&add.encode(&[("x", a), ("y", b)]).unwrap()).unwrap().is_empty());

                    for ctl in [0, 1] {
                        let mut s = cmp.encode(&[("x", a), ("y", b)]).unwrap();
                        s.set(f2.bit(1), ctl == 1);
                        cmp.run(&mut s);
                        assert_eq!(s.get(f2.bit(0)), ctl == 1 && a > b, "w={w} {a} > {b}");
                        assert_eq!((cmp.read(&s, "x").unwrap(), cmp.read(&s, "y").unwrap()), (a, b));
                        assert_eq!(cmp.read(&s, "carry").unwrap(), 0);

                        let mut s = sub.encode(&[("x", a), ("y", b)]).unwrap();
                        s.set(f3.bit(1), ctl == 1);
                        sub.run(&mut s);
                        let expect = if ctl == 1 { b.wrapping_sub(a) & m } else { b };
                        assert_eq!(sub.read(&s, "y").unwrap(), expect);
                        assert_eq!(sub.read(&s, "tmp").unwrap(), 0);
                        assert_eq!(sub.read(&s, "carry").unwrap(), 0);
                    }
                }
            }
        }
    }
}
