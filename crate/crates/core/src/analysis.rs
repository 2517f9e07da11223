//! Characteristic polynomials, the tight ratios ρ_m and ratio reports.
//!
//! `P_m(x) = 2x^m - x^(m-1) - ... - x - 2` has exactly one positive root,
//! written ρ_m. It lies in `[1, 2)` because `P_m(1) = -(m-1) <= 0` and
//! `P_m(2) = 2^m > 0`.

use std::ops::Add;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::opt_bnb;
use crate::lpt::lpt_makespan;
use crate::model::Instance;

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Doubling steps allowed while looking for an upper bracket.
const MAX_BRACKET_DOUBLINGS: u32 = 64;
/// Grid cells per unit length when scanning for the rightmost sign change.
const SCAN_CELLS: usize = 20_000;

/// Real polynomial; `coefficients[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicPolynomial {
    coefficients: Vec<f64>,
}

impl CharacteristicPolynomial {
    pub fn new(mut coefficients: Vec<f64>) -> Result<Self> {
        while coefficients.len() > 1 && *coefficients.last().unwrap() == 0.0 {
            coefficients.pop();
        }
        if coefficients.len() < 2 {
            return Err(Error::ZeroDegree);
        }
        Ok(CharacteristicPolynomial { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn leading(&self) -> f64 {
        *self.coefficients.last().unwrap()
    }

    /// Bound on the magnitude of every root (Cauchy).
    fn root_bound(&self) -> f64 {
        let lead = self.leading().abs();
        1.0 + self.coefficients[..self.degree()]
            .iter()
            .map(|c| c.abs() / lead)
            .fold(0.0, f64::max)
    }

    /// `self + c0 + c1 x`, used for the shifted sums `Σ P_i(x) + 3 - 2x`.
    pub fn plus_linear(&self, c0: f64, c1: f64) -> Self {
        let mut c = self.coefficients.clone();
        c[0] += c0;
        c[1] += c1;
        CharacteristicPolynomial { coefficients: c }
    }
}

impl Add for &CharacteristicPolynomial {
    type Output = CharacteristicPolynomial;

    fn add(self, other: &CharacteristicPolynomial) -> CharacteristicPolynomial {
        let len = self.coefficients.len().max(other.coefficients.len());
        let coefficients = (0..len)
            .map(|k| {
                self.coefficients.get(k).copied().unwrap_or(0.0)
                    + other.coefficients.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        CharacteristicPolynomial { coefficients }
    }
}

/// `P_m(x) = 2x^m - x^(m-1) - ... - x - 2`.
pub fn char_poly(m: usize) -> Result<CharacteristicPolynomial> {
    if m == 0 {
        return Err(Error::ZeroProcessors);
    }
    let mut c = vec![-1.0; m + 1];
    c[0] = -2.0;
    c[m] = 2.0;
    CharacteristicPolynomial::new(c)
}

/// `Σ_{i ∈ subset} P_i`.
pub fn char_poly_sum(subset: &[usize]) -> Result<CharacteristicPolynomial> {
    let mut iter = subset.iter();
    let first = iter.next().ok_or(Error::ZeroDegree)?;
    iter.try_fold(char_poly(*first)?, |acc, &i| Ok(&acc + &char_poly(i)?))
}

/// Bisects a sign change on `[lo, hi]` down to width `tol`.
fn bisect(poly: &CharacteristicPolynomial, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = poly.eval(lo);
    if f_lo == 0.0 {
        return lo;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = poly.eval(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest positive real root, to absolute tolerance `tol`.
///
/// Finds an upper bracket by doubling from 2 past the Cauchy root bound,
/// then marches left on a fine grid to the rightmost sign change and bisects
/// it. Roots of even multiplicity (no sign change) are not detected.
pub fn max_positive_root(poly: &CharacteristicPolynomial, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::OutOfRange {
            what: "tolerance",
            detail: format!("{tol} is not positive"),
        });
    }
    let bound = poly.root_bound();
    let mut upper = 2.0f64;
    let mut doublings = 0;
    while upper <= bound {
        upper *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(Error::NoPositiveRoot);
        }
    }
    let cells = (SCAN_CELLS as f64 * upper).ceil() as usize;
    let step = upper / cells as f64;
    let mut hi = upper;
    let mut f_hi = poly.eval(hi);
    for k in (0..cells).rev() {
        let lo = k as f64 * step;
        let f_lo = poly.eval(lo);
        if f_lo == 0.0 {
            return if lo > 0.0 { Ok(lo) } else { Err(Error::NoPositiveRoot) };
        }
        if (f_lo < 0.0) != (f_hi < 0.0) {
            return Ok(bisect(poly, lo, hi, tol));
        }
        hi = lo;
        f_hi = f_lo;
    }
    Err(Error::NoPositiveRoot)
}

const RHO_CACHE: usize = 32;

fn rho_cache() -> &'static [OnceLock<f64>; RHO_CACHE] {
    static CACHE: OnceLock<[OnceLock<f64>; RHO_CACHE]> = OnceLock::new();
    CACHE.get_or_init(|| std::array::from_fn(|_| OnceLock::new()))
}

fn compute_rho(m: usize) -> Result<f64> {
    let p = char_poly(m)?;
    if m == 1 {
        return Ok(1.0);
    }
    // Bisect to full binary64 resolution on [1, 2].
    Ok(bisect(&p, 1.0, 2.0, 0.0))
}

/// ρ_m, the unique positive root of `P_m`.
pub fn rho(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::ZeroProcessors);
    }
    match rho_cache().get(m) {
        Some(cell) => {
            if let Some(&v) = cell.get() {
                return Ok(v);
            }
            let v = compute_rho(m)?;
            Ok(*cell.get_or_init(|| v))
        }
        None => compute_rho(m),
    }
}

/// Upper bound `2m/(m+1)` on the LPT ratio for `m` uniform processors.
pub fn gis_bound(m: usize) -> f64 {
    2.0 * m as f64 / (m as f64 + 1.0)
}

/// Tight LPT ratio `4/3 - 1/(3m)` for `m` identical processors.
pub fn graham_bound(m: usize) -> f64 {
    4.0 / 3.0 - 1.0 / (3.0 * m as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub m: usize,
    pub n: usize,
    pub lpt: f64,
    pub opt: f64,
    pub ratio: f64,
    pub rho_m: f64,
    /// ρ_m is the proven worst case only for m <= 5.
    pub rho_m_tight: bool,
    pub gis_bound: f64,
    pub graham_bound: f64,
    pub nodes_explored: u64,
}

/// LPT makespan over exact OPT for one instance.
pub fn approx_ratio(instance: &Instance, node_budget: u64) -> Result<RatioReport> {
    if instance.smallest_size() <= 0.0 {
        return Err(Error::DegenerateInstance);
    }
    let lpt = lpt_makespan(instance);
    let opt = opt_bnb(instance, node_budget)?;
    let m = instance.m();
    Ok(RatioReport {
        m,
        n: instance.n(),
        lpt,
        opt: opt.makespan,
        ratio: lpt / opt.makespan,
        rho_m: rho(m)?,
        rho_m_tight: m <= 5,
        gis_bound: gis_bound(m),
        graham_bound: graham_bound(m),
        nodes_explored: opt.nodes_explored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::DEFAULT_NODE_BUDGET;

    #[test]
    fn char_poly_examples() {
        assert_eq!(char_poly(1).unwrap().coefficients(), &[-2.0, 2.0]);
        assert_eq!(char_poly(2).unwrap().coefficients(), &[-2.0, -1.0, 2.0]);
        assert_eq!(
            char_poly(5).unwrap().coefficients(),
            &[-2.0, -1.0, -1.0, -1.0, -1.0, 2.0]
        );
        assert!(matches!(char_poly(0), Err(Error::ZeroProcessors)));
    }

    #[test]
    fn roots_of_small_polys() {
        let r1 = max_positive_root(&char_poly(1).unwrap(), 1e-12).unwrap();
        assert!((r1 - 1.0).abs() < 1e-12);
        let closed = (1.0 + 17f64.sqrt()) / 4.0;
        let r2 = max_positive_root(&char_poly(2).unwrap(), 1e-12).unwrap();
        assert!((r2 - closed).abs() < 1e-12);
        assert!((rho(2).unwrap() - closed).abs() < 1e-15);
    }

    #[test]
    fn sum_of_two_and_three_stays_below_rho3() {
        let p = char_poly_sum(&[2, 3]).unwrap();
        let r = max_positive_root(&p, 1e-12).unwrap();
        assert!(p.eval(r).abs() < 1e-9);
        assert!(r <= rho(3).unwrap() + 1e-9);
    }

    #[test]
    fn no_positive_root_is_an_error() {
        let p = CharacteristicPolynomial::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(max_positive_root(&p, 1e-12), Err(Error::NoPositiveRoot)));
        let q = CharacteristicPolynomial::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(max_positive_root(&q, 1e-12), Err(Error::NoPositiveRoot)));
    }

    #[test]
    fn rightmost_of_several_roots() {
        // (x - 0.5)(x - 3) = x^2 - 3.5x + 1.5
        let p = CharacteristicPolynomial::new(vec![1.5, -3.5, 1.0]).unwrap();
        let r = max_positive_root(&p, 1e-13).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rho_values_two_decimals() {
        let rounded: Vec<f64> = (2..=5)
            .map(|m| (rho(m).unwrap() * 100.0).round() / 100.0)
            .collect();
        assert_eq!(rounded, vec![1.28, 1.38, 1.43, 1.46]);
        assert_eq!(rho(1).unwrap(), 1.0);
        assert!(rho(0).is_err());
    }

    #[test]
    fn rho_monotone_and_residual_small() {
        for m in 1..=10 {
            let r = rho(m).unwrap();
            assert!(char_poly(m).unwrap().eval(r).abs() <= 1e-9);
            assert!(r < rho(m + 1).unwrap());
        }
        // Beyond the cache.
        assert!(rho(40).unwrap() < 1.5);
    }

    #[test]
    fn rho_sandwiched_by_bounds() {
        for m in 2..=5 {
            let r = rho(m).unwrap();
            assert!(graham_bound(m) <= r && r <= gis_bound(m));
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(gis_bound(3), 1.5);
        assert!((graham_bound(2) - 7.0 / 6.0).abs() < 1e-15);
        assert_eq!(graham_bound(1), 1.0);
    }

    #[test]
    fn ratio_examples() {
        let i = Instance::new(vec![1.0, 1.0], vec![3.0, 3.0, 2.0, 2.0, 2.0]).unwrap();
        let r = approx_ratio(&i, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!((r.lpt, r.opt), (7.0, 6.0));
        assert!((r.ratio - 7.0 / 6.0).abs() < 1e-15);

        let single = Instance::new(vec![1.3], vec![2.0, 1.5, 1.0]).unwrap();
        assert_eq!(approx_ratio(&single, DEFAULT_NODE_BUDGET).unwrap().ratio, 1.0);

        let zero = Instance::new(vec![1.0], vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            approx_ratio(&zero, DEFAULT_NODE_BUDGET),
            Err(Error::DegenerateInstance)
        ));
    }
}
