//! Asymptotic cost curves of three ways to obtain a square-free
//! decomposition, as functions of the decimal length of `N`. Hidden
//! constants are 1; only shape and ordering are meaningful.

use std::io::Write;

use serde::Serialize;

use crate::error::{out_of_range, Result};

/// Smallest decimal length accepted; `ln ln L` is positive from here on.
pub const MIN_DIGITS: u32 = 2;

/// `(64/9)^{1/3}`.
pub fn nfs_constant() -> f64 {
    (64.0f64 / 9.0).cbrt()
}

fn log_size(digits: u32) -> Result<f64> {
    if digits < MIN_DIGITS {
        return Err(out_of_range(
            "costmodel",
            format!("digits must be at least {MIN_DIGITS}, got {digits}"),
        ));
    }
    Ok(digits as f64 * std::f64::consts::LN_10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OursCost {
    /// `L² (ln L)²`.
    pub expected: f64,
    /// `L³`.
    pub worst: f64,
}

/// Cost of the Gauss-sum algorithm, with `L = digits · ln 10`.
pub fn cost_ours(digits: u32) -> Result<OursCost> {
    let l = log_size(digits)?;
    Ok(OursCost {
        expected: (l * l.ln()).powi(2),
        worst: l.powi(3),
    })
}

/// `L³ ln L ln ln L`.
pub fn cost_shor(digits: u32) -> Result<f64> {
    let l = log_size(digits)?;
    Ok(l.powi(3) * l.ln() * l.ln().ln())
}

/// `exp(c L^{1/3} (ln L)^{2/3})`.
pub fn cost_nfs_with(digits: u32, c: f64) -> Result<f64> {
    Ok(10f64.powf(log10_nfs(digits, c)?))
}

pub fn cost_nfs(digits: u32) -> Result<f64> {
    cost_nfs_with(digits, nfs_constant())
}

fn log10_nfs(digits: u32, c: f64) -> Result<f64> {
    let l = log_size(digits)?;
    Ok(c * l.cbrt() * l.ln().powf(2.0 / 3.0) / std::f64::consts::LN_10)
}

/// All curves at one length, in `log10` units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostPoint {
    pub digits: u32,
    pub ours_expected: f64,
    pub ours_worst: f64,
    pub shor: f64,
    pub nfs: f64,
}

pub fn cost_point(digits: u32, c: f64) -> Result<CostPoint> {
    let ours = cost_ours(digits)?;
    Ok(CostPoint {
        digits,
        ours_expected: ours.expected.log10(),
        ours_worst: ours.worst.log10(),
        shor: cost_shor(digits)?.log10(),
        nfs: log10_nfs(digits, c)?,
    })
}

/// Points for `start, start + step, …, <= end`.
pub fn curves(start: u32, end: u32, step: u32, c: f64) -> Result<Vec<CostPoint>> {
    if step == 0 || start > end {
        return Err(out_of_range(
            "costmodel",
            format!("invalid range [{start}, {end}] with step {step}"),
        ));
    }
    (start..=end).step_by(step as usize).map(|d| cost_point(d, c)).collect()
}

/// CSV `digits,ours_expected,ours_worst,shor,nfs` with `log10` costs.
pub fn emit_curves<W: Write>(start: u32, end: u32, step: u32, writer: W) -> Result<Vec<CostPoint>> {
    let points = curves(start, end, step, nfs_constant())?;
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["digits", "ours_expected", "ours_worst", "shor", "nfs"])?;
    for p in &points {
        out.write_record([
            p.digits.to_string(),
            format!("{:.6}", p.ours_expected),
            format!("{:.6}", p.ours_worst),
            format!("{:.6}", p.shor),
            format!("{:.6}", p.nfs),
        ])?;
    }
    out.flush()?;
    Ok(points)
}

/// Smallest length in `[MIN_DIGITS, max_digits]` from which the NFS curve
/// stays above both quantum curves.
pub fn nfs_crossing(max_digits: u32, c: f64) -> Result<Option<u32>> {
    let points = curves(MIN_DIGITS, max_digits, 1, c)?;
    let above = |p: &CostPoint| p.nfs > p.shor && p.nfs > p.ours_expected;
    Ok(points
        .iter()
        .rposition(|p| !above(p))
        .map_or(Some(MIN_DIGITS), |i| points.get(i + 1).map(|p| p.digits)))
}

/// `log10(shor / ours_expected)`.
pub fn shor_gap(digits: u32) -> Result<f64> {
    let p = cost_point(digits, nfs_constant())?;
    Ok(p.shor - p.ours_expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_of_expected_costs() {
        let l = |d: f64| d * std::f64::consts::LN_10;
        let expect = 4.0 * (l(200.0).ln() / l(100.0).ln()).powi(2);
        let got = cost_ours(200).unwrap().expected / cost_ours(100).unwrap().expected;
        assert!((got - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn curves_are_monotone_and_ordered() {
        let points = curves(2, 1000, 1, nfs_constant()).unwrap();
        for w in points.windows(2) {
            assert!(w[1].ours_expected > w[0].ours_expected);
            assert!(w[1].ours_worst > w[0].ours_worst);
            assert!(w[1].shor > w[0].shor);
            assert!(w[1].nfs > w[0].nfs);
        }
        for p in &points {
            assert!([p.ours_expected, p.ours_worst, p.shor, p.nfs].iter().all(|x| x.is_finite()));
            if p.digits >= 8 {
                assert!(p.ours_worst >= p.ours_expected);
            }
            if p.digits >= 10 {
                assert!(p.shor > p.ours_expected);
            }
            if p.digits >= 50 {
                assert!(p.nfs > p.shor && p.shor > p.ours_expected, "{p:?}");
            }
        }
    }

    #[test]
    fn nfs_is_superlinear_in_cube_root() {
        let f = |d: u32| log10_nfs(d, nfs_constant()).unwrap() / (d as f64).cbrt();
        assert!(f(1000) > f(100) && f(100) > f(10));
    }

    #[test]
    fn crossing_is_stable_in_the_constant() {
        for i in 0..=10 {
            let c = 1.5 + 0.05 * i as f64;
            let d = nfs_crossing(1000, c).unwrap().unwrap();
            assert!(d <= 50, "c = {c}: crossing at {d}");
        }
    }

    #[test]
    fn emitted_rows() {
        let mut buf = Vec::new();
        assert_eq!(emit_curves(2, 2, 1, &mut buf).unwrap().len(), 1);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("digits,ours_expected,ours_worst,shor,nfs"));
        assert_eq!(text.lines().count(), 2);
        assert_eq!(emit_curves(2, 1000, 1, std::io::sink()).unwrap().len(), 999);
        assert!(emit_curves(1, 5, 1, std::io::sink()).is_err());
        assert!(emit_curves(5, 4, 1, std::io::sink()).is_err());
        assert!(emit_curves(2, 4, 0, std::io::sink()).is_err());
    }

    #[test]
    fn direct_values() {
        assert!(cost_nfs(50).unwrap() > cost_shor(50).unwrap());
        assert!((cost_nfs(100).unwrap().log10() - log10_nfs(100, nfs_constant()).unwrap()).abs() < 1e-9);
        assert!(shor_gap(300).unwrap() > 0.0);
    }
}
