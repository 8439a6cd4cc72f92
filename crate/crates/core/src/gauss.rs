//! Gauss sums `G(a, χ_N) = Σ_m χ_N(m) e^{2πi a m / N}` of the Jacobi
//! character, evaluated by direct summation.
//!
//! The FFT-based route lives in [`crate::qsim`]; keeping this module on plain
//! summation gives the simulator an independent reference.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{out_of_range, Error, Result};
use crate::numtheory::{euler_phi, gcd_u64, jacobi_table, jacobi_u64, squarefree_oracle};

/// Absolute tolerance for a single sum with `N <= 10^4`.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Tolerance for identities amplified by `φ(N)/φ(x)`.
pub const RATIO_TOLERANCE: f64 = 1e-6;

/// Largest modulus accepted by full-table operations (`O(N^2)` work).
pub const MAX_TABLE_MODULUS: u64 = 10_000;

fn check_modulus(n: u64) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidModulus {
            modulus: n.to_string(),
            reason: "Gauss sums need an odd modulus of at least 3",
        });
    }
    Ok(())
}

/// `e^{2πi j / n}` for `j` in `[0, n)`.
#[derive(Debug, Clone)]
pub struct RootsOfUnity {
    roots: Vec<Complex64>,
}

impl RootsOfUnity {
    pub fn new(n: u64) -> Self {
        let roots = (0..n)
            .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64))
            .collect();
        RootsOfUnity { roots }
    }

    pub fn get(&self, j: u64) -> Complex64 {
        self.roots[j as usize]
    }
}

// Σ_{m<n} χ_n(m) e^{2πi a m / n} for any odd n >= 1 (χ_1 is identically 1).
fn character_sum(a: u64, n: u64) -> Result<Complex64> {
    let a = a % n;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 0..n {
        let chi = jacobi_u64(m, n)?.to_i8();
        if chi == 0 {
            continue;
        }
        let phase = (u128::from(a) * u128::from(m) % u128::from(n)) as f64;
        sum += f64::from(chi) * Complex64::from_polar(1.0, TAU * phase / n as f64);
    }
    Ok(sum)
}

/// Direct `O(N)` evaluation of `G(a, χ_N)`.
pub fn gauss_sum(a: u64, n: u64) -> Result<Complex64> {
    check_modulus(n)?;
    character_sum(a, n)
}

/// `ε_N`: `1` for `N ≡ 1 (mod 4)`, `i` for `N ≡ 3 (mod 4)`.
pub fn epsilon(n: u64) -> Complex64 {
    if n % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    }
}

/// `ε_N χ_N(a) √N`, valid for square-free `N` and `a` coprime to `N`.
pub fn gauss_closed_form(a: u64, n: u64) -> Result<Complex64> {
    check_modulus(n)?;
    if squarefree_oracle(n).s != 1 {
        return Err(Error::NotSquareFree(n));
    }
    if gcd_u64(a % n, n) != 1 {
        return Err(Error::NotCoprime { a, modulus: n });
    }
    let chi = f64::from(jacobi_u64(a, n)?.to_i8());
    Ok(epsilon(n) * chi * (n as f64).sqrt())
}

/// `|G(t z^2, χ_N) - φ(N)/φ(x) · G(t, χ_x)|` with `x = N / z^2`.
pub fn reduction_residual(t: u64, z: u64, n: u64) -> Result<f64> {
    check_modulus(n)?;
    let square = z
        .checked_mul(z)
        .filter(|&sq| sq != 0 && n % sq == 0)
        .ok_or(Error::NotDivisor {
            context: "gauss",
            divisor: z.saturating_mul(z),
            value: n,
        })?;
    if gcd_u64(t % n, n) != 1 {
        return Err(Error::NotCoprime { a: t, modulus: n });
    }
    let x = n / square;
    let lhs = character_sum((u128::from(t) * u128::from(square) % u128::from(n)) as u64, n)?;
    let scale = euler_phi(n) as f64 / euler_phi(x) as f64;
    let rhs = scale * character_sum(t % x, x)?;
    Ok((lhs - rhs).norm())
}

/// The reduction `G(t z^2, χ_N) = φ(N)/φ(x) · G(t, χ_x)` at [`RATIO_TOLERANCE`].
pub fn gauss_reduction_check(t: u64, z: u64, n: u64) -> Result<bool> {
    Ok(reduction_residual(t, z, n)? <= RATIO_TOLERANCE)
}

/// All sums `G(a, χ_N)` for `a` in `[0, N)`.
#[derive(Debug, Clone)]
pub struct GaussSumTable {
    modulus: u64,
    values: Vec<Complex64>,
}

#[derive(Debug, Serialize)]
struct TableRow {
    a: u64,
    re: f64,
    im: f64,
    gcd: u64,
}

impl GaussSumTable {
    /// Direct `O(N^2)` summation; `N` is capped at [`MAX_TABLE_MODULUS`].
    pub fn compute(n: u64) -> Result<Self> {
        check_modulus(n)?;
        if n > MAX_TABLE_MODULUS {
            return Err(out_of_range(
                "gauss",
                format!("table modulus {n} exceeds {MAX_TABLE_MODULUS}"),
            ));
        }
        let chi = jacobi_table(n)?;
        let roots = RootsOfUnity::new(n);
        let support: Vec<(u64, f64)> = chi
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(m, &c)| (m as u64, f64::from(c)))
            .collect();
        let values = (0..n)
            .map(|a| {
                support.iter().fold(Complex64::new(0.0, 0.0), |acc, &(m, c)| {
                    acc + c * roots.get(a * m % n)
                })
            })
            .collect();
        Ok(GaussSumTable { modulus: n, values })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, a: u64) -> Complex64 {
        self.values[(a % self.modulus) as usize]
    }

    /// `|Σ_a |G(a)|^2 - N φ(N)|`.
    pub fn parseval_residual(&self) -> f64 {
        let total: f64 = self.values.iter().map(|g| g.norm_sqr()).sum();
        (total - (self.modulus * euler_phi(self.modulus)) as f64).abs()
    }

    /// CSV with columns `a,re,im,gcd`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        for (a, g) in self.values.iter().enumerate() {
            let a = a as u64;
            out.serialize(TableRow {
                a,
                re: g.re,
                im: g.im,
                gcd: gcd_u64(a, self.modulus),
            })?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Outcome of checking both halves of the square-free dichotomy.
#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub modulus: u64,
    pub squarefree: bool,
    /// Largest deviation from the predicted value over all `a`.
    pub max_violation: f64,
    /// Coprime `a` values with `G(a) != 0` beyond tolerance.
    pub coprime_nonzero: u64,
}

impl DichotomyReport {
    pub fn holds(&self) -> bool {
        self.max_violation < SUM_TOLERANCE
    }
}

/// Checks `G(a) = 0` on non-coprime `a` and `|G(a)| = √N` on coprime `a` when
/// `N` is square-free, and `G(a) = 0` on coprime `a` otherwise.
pub fn verify_dichotomy(n: u64) -> Result<DichotomyReport> {
    let table = GaussSumTable::compute(n)?;
    Ok(dichotomy_from_table(&table))
}

pub fn dichotomy_from_table(table: &GaussSumTable) -> DichotomyReport {
    let n = table.modulus();
    let squarefree = squarefree_oracle(n).s == 1;
    let root_n = (n as f64).sqrt();
    let mut max_violation = 0.0f64;
    let mut coprime_nonzero = 0;
    for (a, g) in table.values().iter().enumerate() {
        let coprime = gcd_u64(a as u64, n) == 1;
        let magnitude = g.norm();
        if coprime && magnitude > SUM_TOLERANCE {
            coprime_nonzero += 1;
        }
        let violation = match (squarefree, coprime) {
            (true, true) => (magnitude - root_n).abs(),
            (true, false) | (false, true) => magnitude,
            // Non-coprime sums of non-square-free moduli are unconstrained.
            (false, false) => 0.0,
        };
        max_violation = max_violation.max(violation);
    }
    DichotomyReport {
        modulus: n,
        squarefree,
        max_violation,
        coprime_nonzero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{is_squarefree, perfect_square_root};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn single_sum_examples() {
        assert!(gauss_sum(3, 15).unwrap().norm() < SUM_TOLERANCE);
        assert!(gauss_sum(1, 45).unwrap().norm() < SUM_TOLERANCE);
        let root5 = Complex64::new(5f64.sqrt(), 0.0);
        assert!(close(gauss_sum(1, 5).unwrap(), root5, SUM_TOLERANCE));
        assert!(gauss_sum(1, 10).is_err());
        assert!(gauss_sum(1, 1).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let root5 = 5f64.sqrt();
        assert!(close(gauss_closed_form(1, 5).unwrap(), Complex64::new(root5, 0.0), 1e-12));
        assert!(close(
            gauss_closed_form(1, 3).unwrap(),
            Complex64::new(0.0, 3f64.sqrt()),
            1e-12
        ));
        assert!(close(gauss_closed_form(2, 5).unwrap(), Complex64::new(-root5, 0.0), 1e-12));
        for (a, n) in [(1, 5), (1, 3), (2, 5)] {
            assert!(close(gauss_closed_form(a, n).unwrap(), gauss_sum(a, n).unwrap(), SUM_TOLERANCE));
        }
        assert_eq!(gauss_closed_form(1, 45), Err(Error::NotSquareFree(45)));
        assert_eq!(gauss_closed_form(3, 15), Err(Error::NotCoprime { a: 3, modulus: 15 }));
    }

    #[test]
    fn epsilon_validated_for_squarefree_up_to_2000() {
        for n in (3..=2000u64).step_by(2).filter(|&n| is_squarefree(n)) {
            let g1 = gauss_sum(1, n).unwrap();
            assert!(close(g1, epsilon(n) * (n as f64).sqrt(), SUM_TOLERANCE), "N = {n}: {g1}");
        }
    }

    #[test]
    fn reduction_examples() {
        assert!(gauss_reduction_check(1, 3, 45).unwrap());
        assert!(gauss_reduction_check(2, 3, 45).unwrap());
        assert!(gauss_reduction_check(1, 1, 15).unwrap());
        // both sides are 6·√5·χ_5(t)
        let lhs = gauss_sum(9, 45).unwrap();
        assert!(close(lhs, Complex64::new(6.0 * 5f64.sqrt(), 0.0), 1e-9));
        let lhs = gauss_sum(18, 45).unwrap();
        assert!(close(lhs, Complex64::new(-6.0 * 5f64.sqrt(), 0.0), 1e-9));
        assert!(matches!(gauss_reduction_check(1, 2, 45), Err(Error::NotDivisor { .. })));
        assert!(matches!(gauss_reduction_check(3, 3, 45), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn reduction_to_unit_modulus() {
        // N = z^2: x = 1 and G(t, χ_1) = 1.
        assert!(gauss_reduction_check(2, 3, 9).unwrap());
        assert!(gauss_reduction_check(1, 15, 225).unwrap());
    }

    #[test]
    fn dichotomy_examples() {
        let r15 = verify_dichotomy(15).unwrap();
        assert!(r15.squarefree && r15.holds());
        let table = GaussSumTable::compute(15).unwrap();
        for a in [1u64, 2, 4, 7, 8, 11, 13, 14] {
            assert!((table.get(a).norm() - 15f64.sqrt()).abs() < SUM_TOLERANCE);
        }
        let r45 = verify_dichotomy(45).unwrap();
        assert!(!r45.squarefree && r45.holds());
        let r9 = verify_dichotomy(9).unwrap();
        assert!(r9.holds());
        assert_eq!(r9.coprime_nonzero, 0);
    }

    #[test]
    fn table_agrees_with_single_sums() {
        for n in [3u64, 9, 15, 45, 105, 121, 225] {
            let table = GaussSumTable::compute(n).unwrap();
            for a in 0..n {
                assert!(close(table.get(a), gauss_sum(a, n).unwrap(), 1e-10));
            }
        }
        assert!(GaussSumTable::compute(MAX_TABLE_MODULUS + 1).is_err());
    }

    #[test]
    fn parseval_and_conjugation_up_to_500() {
        for n in (3..=500u64).step_by(2) {
            let table = GaussSumTable::compute(n).unwrap();
            assert!(table.parseval_residual() < n as f64 * 1e-9, "Parseval N = {n}");
            let chi_minus_one = f64::from(jacobi_u64(n - 1, n).unwrap().to_i8());
            for a in 1..n {
                let mirrored = table.get(n - a);
                assert!(close(mirrored, table.get(a).conj(), SUM_TOLERANCE), "N = {n}, a = {a}");
                assert!(close(mirrored, table.get(a) * chi_minus_one, SUM_TOLERANCE), "N = {n}, a = {a}");
            }
            // χ_N is principal exactly when N is a perfect square.
            if perfect_square_root(n).is_none() {
                assert!(table.get(0).norm() < SUM_TOLERANCE, "G(0) for N = {n}");
            } else {
                assert!((table.get(0).re - euler_phi(n) as f64).abs() < SUM_TOLERANCE);
            }
        }
    }

    #[test]
    fn csv_has_expected_columns() {
        let mut buf = Vec::new();
        GaussSumTable::compute(5).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("a,re,im,gcd"));
        assert_eq!(lines.count(), 5);
    }
}
