//! Classical number theory.
//!
//! Two kinds of routines live here. The binary GCD and binary Jacobi
//! algorithms are the ones the reversible circuits translate; they never
//! factor their arguments and run on any [`BinaryNat`] (machine words or
//! arbitrary-precision [`Natural`]s). The trial-division routines
//! ([`euler_phi`], [`squarefree_oracle`], [`jacobi_oracle`]) factor their
//! input and exist only as desk-scale ground truth.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative integer.
pub type Natural = BigUint;

/// Unsigned integers the binary algorithms can run on.
///
/// Only halving, comparison, subtraction and low-bit inspection are needed,
/// which is what makes the algorithms translatable into reversible circuits.
pub trait BinaryNat: Clone + Ord + fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn is_even(&self) -> bool;
    /// `self mod 2^count` for `count <= 32`.
    fn low_bits(&self, count: u32) -> u32;
    fn halve(&mut self);
    /// `self -= rhs`; callers guarantee `self >= rhs`.
    fn sub_in_place(&mut self, rhs: &Self);
    fn bit_len(&self) -> u64;
    fn shl(self, bits: u64) -> Self;
}

impl BinaryNat for u64 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
    fn is_even(&self) -> bool {
        *self & 1 == 0
    }
    fn low_bits(&self, count: u32) -> u32 {
        (*self & ((1u64 << count) - 1)) as u32
    }
    fn halve(&mut self) {
        *self >>= 1;
    }
    fn sub_in_place(&mut self, rhs: &Self) {
        *self -= *rhs;
    }
    fn bit_len(&self) -> u64 {
        u64::from(64 - self.leading_zeros())
    }
    fn shl(self, bits: u64) -> Self {
        self << bits
    }
}

impl BinaryNat for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn is_even(&self) -> bool {
        !self.bit(0)
    }
    fn low_bits(&self, count: u32) -> u32 {
        (0..count).fold(0, |acc, i| acc | (u32::from(self.bit(u64::from(i))) << i))
    }
    fn halve(&mut self) {
        *self >>= 1u32;
    }
    fn sub_in_place(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn bit_len(&self) -> u64 {
        self.bits()
    }
    fn shl(self, bits: u64) -> Self {
        self << bits
    }
}

/// Value of a Legendre or Jacobi symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JacobiValue {
    MinusOne,
    Zero,
    One,
}

impl JacobiValue {
    pub fn to_i8(self) -> i8 {
        match self {
            JacobiValue::MinusOne => -1,
            JacobiValue::Zero => 0,
            JacobiValue::One => 1,
        }
    }

    pub fn from_i8(value: i8) -> Option<Self> {
        match value {
            -1 => Some(JacobiValue::MinusOne),
            0 => Some(JacobiValue::Zero),
            1 => Some(JacobiValue::One),
            _ => None,
        }
    }

    fn signed(negative: bool) -> Self {
        if negative {
            JacobiValue::MinusOne
        } else {
            JacobiValue::One
        }
    }
}

impl Mul for JacobiValue {
    type Output = JacobiValue;

    fn mul(self, rhs: Self) -> Self {
        JacobiValue::from_i8(self.to_i8() * rhs.to_i8()).expect("product of unit signs")
    }
}

impl fmt::Display for JacobiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_i8())
    }
}

/// The pair `(r, s)` with `N = r * s^2` and `r` square-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SquareFreeDecomposition {
    pub r: u64,
    pub s: u64,
}

impl SquareFreeDecomposition {
    pub const ONE: SquareFreeDecomposition = SquareFreeDecomposition { r: 1, s: 1 };

    pub fn value(&self) -> u128 {
        u128::from(self.r) * u128::from(self.s) * u128::from(self.s)
    }
}

impl fmt::Display for SquareFreeDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * {}^2", self.r, self.s)
    }
}

/// Binary GCD, one halving or one subtract-and-halve per round.
///
/// The round structure is the one the reversible GCD circuit unrolls: move a
/// zero `u` out of the way, strip common factors of two, make `u` odd, then
/// loop on `v` until it reaches zero. Total rounds never exceed
/// `2 * (bitlen(u) + bitlen(v))`.
pub fn binary_gcd<T: BinaryNat>(u: &T, v: &T) -> T {
    let bound = 2 * (u.bit_len() + v.bit_len());
    let (mut u, mut v) = (u.clone(), v.clone());
    if u.is_zero() {
        std::mem::swap(&mut u, &mut v);
    }
    if u.is_zero() {
        return u;
    }

    let mut rounds = 0;
    let mut shift = 0;
    while u.is_even() && v.is_even() {
        u.halve();
        v.halve();
        shift += 1;
        rounds += 1;
    }
    while u.is_even() {
        u.halve();
        rounds += 1;
    }
    while !v.is_zero() {
        if v.is_even() {
            v.halve();
        } else {
            if u > v {
                std::mem::swap(&mut u, &mut v);
            }
            v.sub_in_place(&u);
            v.halve();
        }
        rounds += 1;
    }
    debug_assert!(rounds <= bound.max(1));
    u.shl(shift)
}

/// Number of main-loop rounds [`binary_gcd`] runs after `u` has been made odd.
///
/// The reversible circuit unrolls exactly `2n` of these for `n`-bit inputs.
pub fn binary_gcd_main_rounds(u: u64, v: u64) -> u32 {
    let (mut u, mut v) = if u == 0 { (v, 0) } else { (u, v) };
    if u == 0 {
        return 0;
    }
    let common = u.trailing_zeros().min(v.trailing_zeros());
    u >>= common;
    v = if v == 0 { 0 } else { v >> common };
    u >>= u.trailing_zeros();
    let mut rounds = 0;
    while v != 0 {
        if v & 1 == 0 {
            v >>= 1;
        } else {
            if u > v {
                std::mem::swap(&mut u, &mut v);
            }
            v = (v - u) >> 1;
        }
        rounds += 1;
    }
    rounds
}

// b mod 8 in {3, 5}, i.e. (2/b) = -1.
fn two_is_nonresidue<T: BinaryNat>(b: &T) -> bool {
    matches!(b.low_bits(3), 3 | 5)
}

fn check_odd_modulus<T: BinaryNat>(n: &T) -> Result<()> {
    if n.is_zero() || n.is_even() {
        return Err(Error::InvalidModulus {
            modulus: format!("{n:?}"),
            reason: "Jacobi modulus must be odd and positive",
        });
    }
    Ok(())
}

/// Binary Jacobi symbol `(m / n)` for odd `n`.
///
/// Each round either halves `a` (flipping the sign when `b ≡ 3, 5 mod 8`) or,
/// with `a` odd, orders the pair (flipping when both are `3 mod 4`) and
/// replaces `a` by `(a - b) / 2`. Only the low three bits of `b` and low two
/// bits of `a` ever steer the sign.
pub fn jacobi_binary<T: BinaryNat>(m: &T, n: &T) -> Result<JacobiValue> {
    check_odd_modulus(n)?;
    let (mut a, mut b) = (m.clone(), n.clone());
    let mut negative = false;
    while !a.is_zero() {
        if a.is_even() {
            a.halve();
        } else {
            if a < b {
                std::mem::swap(&mut a, &mut b);
                if a.low_bits(2) == 3 && b.low_bits(2) == 3 {
                    negative = !negative;
                }
            }
            a.sub_in_place(&b);
            a.halve();
        }
        if two_is_nonresidue(&b) {
            negative = !negative;
        }
    }
    Ok(if b.is_one() {
        JacobiValue::signed(negative)
    } else {
        JacobiValue::Zero
    })
}

/// Stein's GCD on machine words, halving runs batched with `trailing_zeros`.
pub fn gcd_u64(mut u: u64, mut v: u64) -> u64 {
    if u == 0 {
        return v;
    }
    if v == 0 {
        return u;
    }
    let shift = (u | v).trailing_zeros();
    u >>= u.trailing_zeros();
    loop {
        v >>= v.trailing_zeros();
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        v -= u;
        if v == 0 {
            return u << shift;
        }
    }
}

/// Binary Jacobi symbol on machine words with batched halving.
pub fn jacobi_u64(m: u64, n: u64) -> Result<JacobiValue> {
    check_odd_modulus(&n)?;
    let (mut a, mut b) = (m % n, n);
    let mut negative = false;
    while a != 0 {
        let twos = a.trailing_zeros();
        a >>= twos;
        if twos & 1 == 1 && two_is_nonresidue(&b) {
            negative = !negative;
        }
        if a < b {
            std::mem::swap(&mut a, &mut b);
            if a & 3 == 3 && b & 3 == 3 {
                negative = !negative;
            }
        }
        a -= b;
    }
    Ok(if b == 1 {
        JacobiValue::signed(negative)
    } else {
        JacobiValue::Zero
    })
}

/// `χ_n(m)` for every `m` in `[0, n)`, as `-1, 0, +1`.
///
/// Prime arguments are evaluated with the binary Jacobi algorithm and
/// composites are filled in by complete multiplicativity over a linear sieve,
/// so `n` itself is never factored.
pub fn jacobi_table(n: u64) -> Result<Vec<i8>> {
    check_odd_modulus(&n)?;
    let size = usize::try_from(n).map_err(|_| Error::InvalidModulus {
        modulus: n.to_string(),
        reason: "too large for a dense table",
    })?;
    let mut table = vec![0i8; size];
    if n == 1 {
        table[0] = 1;
        return Ok(table);
    }
    table[1] = 1;
    let mut least_factor = vec![0u32; size];
    let mut primes: Vec<u32> = Vec::new();
    for m in 2..size {
        if least_factor[m] == 0 {
            least_factor[m] = m as u32;
            primes.push(m as u32);
            table[m] = jacobi_u64(m as u64, n)?.to_i8();
        }
        let lf = least_factor[m];
        for &p in &primes {
            if p > lf {
                break;
            }
            let composite = m * p as usize;
            if composite >= size {
                break;
            }
            least_factor[composite] = p;
            table[composite] = table[m] * table[p as usize];
        }
    }
    Ok(table)
}

/// `base^exp mod modulus` by square-and-multiply.
pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = u128::from(modulus);
    let mut result = 1u128;
    let mut acc = u128::from(base) % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * acc % m;
        }
        acc = acc * acc % m;
        exp >>= 1;
    }
    result as u64
}

pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Legendre symbol via Euler's criterion, `m^((p-1)/2) mod p`.
pub fn legendre(m: u64, p: u64) -> Result<JacobiValue> {
    if p == 2 || !is_prime_trial(p) {
        return Err(Error::NotOddPrime(p));
    }
    Ok(match mod_pow(m % p, (p - 1) / 2, p) {
        0 => JacobiValue::Zero,
        1 => JacobiValue::One,
        _ => JacobiValue::MinusOne,
    })
}

/// Prime factorization `(p, e)` by trial division, ascending in `p`.
pub fn factorize_trial(mut n: u64) -> Vec<(u64, u32)> {
    let mut factors = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        factors.push((n, 1));
    }
    factors
}

/// Jacobi symbol as the product of Legendre symbols over the trial-division
/// factorization of `n`. Test oracle only.
pub fn jacobi_oracle(m: u64, n: u64) -> Result<JacobiValue> {
    check_odd_modulus(&n)?;
    factorize_trial(n)
        .into_iter()
        .try_fold(JacobiValue::One, |acc, (p, e)| {
            let symbol = legendre(m, p)?;
            Ok((0..e).fold(acc, |acc, _| acc * symbol))
        })
}

/// Euler's totient by trial division.
pub fn euler_phi(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    factorize_trial(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Ground-truth square-free decomposition by full factorization.
pub fn squarefree_oracle(n: u64) -> SquareFreeDecomposition {
    factorize_trial(n)
        .into_iter()
        .fold(SquareFreeDecomposition::ONE, |acc, (p, e)| {
            SquareFreeDecomposition {
                r: if e % 2 == 1 { acc.r * p } else { acc.r },
                s: acc.s * p.pow(e / 2),
            }
        })
}

pub fn is_squarefree(n: u64) -> bool {
    squarefree_oracle(n).s == 1
}

/// `n = 2^two_exponent * odd_core` with `odd_core` odd.
pub fn strip_even(n: u64) -> Result<(u64, u32)> {
    if n == 0 {
        return Err(crate::error::out_of_range("numtheory", "cannot strip the even part of 0"));
    }
    let e = n.trailing_zeros();
    Ok((n >> e, e))
}

/// Square-free decomposition contributed by `2^two_exponent`.
pub fn two_power_decomposition(two_exponent: u32) -> SquareFreeDecomposition {
    SquareFreeDecomposition {
        r: if two_exponent % 2 == 1 { 2 } else { 1 },
        s: 1u64 << (two_exponent / 2),
    }
}

/// Integer square root if `n` is a perfect square.
pub fn perfect_square_root(n: u64) -> Option<u64> {
    let root = n.sqrt();
    (root * root == n).then_some(root)
}

pub fn natural_to_u64(value: &Natural) -> Option<u64> {
    value.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn euclid(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let r = a % b;
            a = b;
            b = r;
        }
        a
    }

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(binary_gcd(&0u64, &7), 7);
        assert_eq!(binary_gcd(&7u64, &0), 7);
        assert_eq!(binary_gcd(&0u64, &0), 0);
        assert_eq!(binary_gcd(&12u64, &18), 6);
        for m in 1..45u64 {
            assert_eq!(binary_gcd(&m, &45), euclid(m, 45), "m = {m}");
        }
    }

    #[test]
    fn gcd_on_naturals_matches_words() {
        let big = nat(2).pow(100u32) * nat(3 * 5 * 7);
        let other = nat(2).pow(40u32) * nat(5 * 11);
        assert_eq!(binary_gcd(&big, &other), nat(2).pow(40u32) * nat(5));
        for u in 0..64u64 {
            for v in 0..64u64 {
                assert_eq!(binary_gcd(&nat(u), &nat(v)), nat(gcd_u64(u, v)));
            }
        }
    }

    #[test]
    fn gcd_invariants_exhaustive_small() {
        for u in 0..300u64 {
            for v in 0..300u64 {
                let g = binary_gcd(&u, &v);
                assert_eq!(g, euclid(u, v));
                assert_eq!(g, gcd_u64(u, v));
                assert_eq!(g, binary_gcd(&v, &u));
            }
        }
    }

    #[test]
    fn main_rounds_within_two_n() {
        for n in 1..=10u32 {
            for u in 0..(1u64 << n) {
                for v in 0..(1u64 << n) {
                    assert!(binary_gcd_main_rounds(u, v) <= 2 * n);
                }
            }
        }
    }

    #[test]
    fn jacobi_examples() {
        for n in (3..200u64).step_by(2) {
            assert_eq!(jacobi_binary(&1u64, &n).unwrap(), JacobiValue::One);
        }
        assert_eq!(jacobi_binary(&6u64, &15).unwrap(), JacobiValue::Zero);
        assert_eq!(jacobi_binary(&2u64, &15).unwrap(), JacobiValue::One);
        assert_eq!(jacobi_oracle(2, 9).unwrap(), JacobiValue::One);
        assert_eq!(jacobi_oracle(2, 15).unwrap(), JacobiValue::One);
        assert!(jacobi_binary(&3u64, &10).is_err());
        assert!(jacobi_binary(&3u64, &0).is_err());
        assert!(jacobi_u64(3, 10).is_err());
    }

    #[test]
    fn jacobi_is_periodic_in_m() {
        for n in (3..120u64).step_by(2) {
            for m in 0..n {
                let base = jacobi_binary(&m, &n).unwrap();
                assert_eq!(jacobi_binary(&(m + n), &n).unwrap(), base);
                assert_eq!(jacobi_binary(&(m + 5 * n), &n).unwrap(), base);
            }
        }
    }

    #[test]
    fn jacobi_agrees_with_legendre_product_up_to_2000() {
        for n in (3..=2000u64).step_by(2) {
            let table = jacobi_table(n).unwrap();
            for m in 0..n {
                let expected = jacobi_oracle(m, n).unwrap();
                assert_eq!(jacobi_binary(&m, &n).unwrap(), expected, "({m}/{n})");
                assert_eq!(jacobi_u64(m, n).unwrap(), expected, "({m}/{n})");
                assert_eq!(table[m as usize], expected.to_i8(), "table ({m}/{n})");
            }
        }
    }

    #[test]
    fn jacobi_completely_multiplicative() {
        for n in (3..=301u64).step_by(2) {
            for m1 in 0..n {
                for m2 in (0..n).step_by(7) {
                    let lhs = jacobi_u64(m1 * m2 % n, n).unwrap();
                    let rhs = jacobi_u64(m1, n).unwrap() * jacobi_u64(m2, n).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn jacobi_on_naturals() {
        let n = nat(1_000_000_007) * nat(998_244_353);
        let m = nat(123_456_789_012_345);
        let expected = jacobi_u64(123_456_789_012_345 % 1_000_000_007, 1_000_000_007).unwrap()
            * jacobi_u64(123_456_789_012_345 % 998_244_353, 998_244_353).unwrap();
        assert_eq!(jacobi_binary(&m, &n).unwrap(), expected);
    }

    #[test]
    fn legendre_matches_residue_enumeration() {
        assert_eq!(legendre(0, 5).unwrap(), JacobiValue::Zero);
        assert_eq!(legendre(4, 7).unwrap(), JacobiValue::One);
        assert_eq!(legendre(2, 5).unwrap(), JacobiValue::MinusOne);
        assert_eq!(legendre(3, 9), Err(Error::NotOddPrime(9)));
        assert_eq!(legendre(3, 2), Err(Error::NotOddPrime(2)));
        for p in (3..400u64).filter(|&p| is_prime_trial(p)) {
            let residues: std::collections::BTreeSet<u64> = (1..p).map(|x| x * x % p).collect();
            for m in 0..p {
                let expected = if m == 0 {
                    JacobiValue::Zero
                } else if residues.contains(&m) {
                    JacobiValue::One
                } else {
                    JacobiValue::MinusOne
                };
                assert_eq!(legendre(m, p).unwrap(), expected);
            }
        }
    }

    #[test]
    fn phi_matches_coprime_count() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(45), 24);
        for n in 1..=1500u64 {
            let count = (1..=n).filter(|&m| euclid(m, n) == 1).count() as u64;
            assert_eq!(euler_phi(n), count, "phi({n})");
        }
    }

    #[test]
    fn phi_gcd_product_identity() {
        for m in 1..120u64 {
            for n in 1..120u64 {
                let g = euclid(m, n);
                assert_eq!(euler_phi(m * n) * euler_phi(g), euler_phi(m) * euler_phi(n) * g);
            }
        }
    }

    #[test]
    fn squarefree_oracle_examples() {
        assert_eq!(squarefree_oracle(1), SquareFreeDecomposition { r: 1, s: 1 });
        assert_eq!(squarefree_oracle(45), SquareFreeDecomposition { r: 5, s: 3 });
        assert_eq!(squarefree_oracle(105), SquareFreeDecomposition { r: 105, s: 1 });
    }

    #[test]
    fn squarefree_oracle_reconstructs_up_to_1e5() {
        for n in 1..=100_000u64 {
            let d = squarefree_oracle(n);
            assert_eq!(d.value(), u128::from(n));
            let mut p = 2;
            while p * p <= d.r {
                assert_ne!(d.r % (p * p), 0, "r = {} of {n} has square divisor", d.r);
                p += 1;
            }
        }
    }

    #[test]
    fn strip_even_examples() {
        assert_eq!(strip_even(8).unwrap(), (1, 3));
        assert_eq!(two_power_decomposition(3), SquareFreeDecomposition { r: 2, s: 2 });
        assert_eq!(strip_even(45).unwrap(), (45, 0));
        assert_eq!(strip_even(12).unwrap(), (3, 2));
        assert_eq!(two_power_decomposition(2), SquareFreeDecomposition { r: 1, s: 2 });
        assert!(strip_even(0).is_err());
    }

    #[test]
    fn perfect_squares() {
        assert_eq!(perfect_square_root(3969), Some(63));
        assert_eq!(perfect_square_root(0), Some(0));
        assert_eq!(perfect_square_root(45), None);
    }

    proptest! {
        #[test]
        fn gcd_properties(u in 0u64..10_000, v in 0u64..10_000, k in 1u64..50) {
            let g = binary_gcd(&u, &v);
            prop_assert_eq!(g, binary_gcd(&v, &u));
            if g != 0 {
                prop_assert_eq!(u % g, 0);
                prop_assert_eq!(v % g, 0);
            }
            prop_assert_eq!(binary_gcd(&(k * u), &(k * v)), k * g);
        }

        #[test]
        fn jacobi_word_and_natural_paths_agree(m in 0u64..1_000_000, half in 1u64..500_000) {
            let n = 2 * half + 1;
            prop_assert_eq!(jacobi_u64(m, n).unwrap(), jacobi_binary(&nat(m), &nat(n)).unwrap());
        }
    }
}
