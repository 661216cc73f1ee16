//! Zeros of P_n by Sturm bisection on the recurrence, and the theorems about
//! their location: interlacing, monotonicity in λ and t, and the bound on the
//! largest zero.

pub mod density;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FreudError, Result};
use crate::hankel::RecurrenceTable;
use crate::moments::WeightParams;
use crate::scalar::{self, BigReal};

pub use density::{scaled_zero_compare, DensityLaw, KolmogorovReport};

/// Sorted zeros of P_n.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroSet {
    pub n: usize,
    pub zeros: Vec<BigReal>,
    #[serde(skip)]
    pub context: WeightParams,
}

impl ZeroSet {
    /// The positive zeros, largest first: entry ℓ − 1 holds x_{ℓ,n}.
    pub fn positive_desc(&self) -> Vec<BigReal> {
        self.zeros.iter().rev().take(self.n / 2).cloned().collect()
    }

    pub fn largest(&self) -> Option<&BigReal> {
        self.zeros.last()
    }
}

/// Number of zeros of P_n above x, from the signs of q_0 = x,
/// q_k = x − β_k / q_{k−1} (the pivots of xI − J for the Jacobi matrix J).
fn count_above(betas: &[BigReal], n: usize, x: &BigReal, tiny: &BigReal) -> usize {
    let mut count = 0;
    let mut q = x.clone();
    for k in 0..n {
        if k > 0 {
            q = x - &betas[k] / &q;
        }
        if q.is_zero() {
            q = tiny.clone();
        }
        if q.is_negative() {
            count += 1;
        }
    }
    count
}

/// Bisection for the ν-th largest zero (ν ≥ 1) in (lo, hi).
fn bisect(betas: &[BigReal], n: usize, nu: usize, mut lo: BigReal, mut hi: BigReal, tol: &BigReal, tiny: &BigReal) -> BigReal {
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / 2i64;
        if count_above(betas, n, &mid, tiny) >= nu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2i64
}

struct Setup {
    betas: Vec<BigReal>,
    bound: BigReal,
    tol: BigReal,
    tiny: BigReal,
}

fn setup(table: &RecurrenceTable, n: usize, tol: f64) -> Result<Setup> {
    if n == 0 {
        return Err(FreudError::Parameter("P_0 has no zeros".into()));
    }
    if !(tol > 0.0) {
        return Err(FreudError::Parameter("zero tolerance must be positive".into()));
    }
    table.require(n.saturating_sub(1))?;
    let bits = table.params().working_bits();
    let betas: Vec<BigReal> = table.coeffs()[..n].iter().map(|b| b.with_precision(bits)).collect();
    if let Some(k) = betas.iter().skip(1).position(|b| !b.is_positive()) {
        return Err(FreudError::NonPositive { n: k + 1, bits });
    }
    // Gershgorin: every zero lies below max_k (√β_k + √β_{k+1}).
    let roots: Vec<BigReal> = betas.iter().map(BigReal::sqrt).chain([BigReal::zero(bits)]).collect();
    let bound = roots
        .windows(2)
        .map(|w| &w[0] + &w[1])
        .fold(BigReal::zero(bits), |acc, v| if v > acc { v } else { acc })
        * 1.0625
        + 1i64;
    Ok(Setup {
        betas,
        bound,
        tol: BigReal::from_f64(tol, bits),
        tiny: BigReal::pow2(-(bits as i32), bits),
    })
}

/// All zeros of P_n to |Δx| < tol. Positive zeros are found by bisection and
/// reflected; 0 is included exactly for odd n.
pub fn zeros(table: &RecurrenceTable, n: usize, tol: f64) -> Result<ZeroSet> {
    let s = setup(table, n, tol)?;
    let bits = table.params().working_bits();
    let positive: Vec<BigReal> = (1..=n / 2)
        .into_par_iter()
        .map(|nu| bisect(&s.betas, n, nu, BigReal::zero(bits), s.bound.clone(), &s.tol, &s.tiny))
        .collect();
    let mut out: Vec<BigReal> = positive.iter().map(|z| -z).collect();
    if n % 2 == 1 {
        out.push(BigReal::zero(bits));
    }
    out.extend(positive.into_iter().rev());
    Ok(ZeroSet {
        n,
        zeros: out,
        context: table.params().clone(),
    })
}

/// All zeros by bisection over the whole interval, without using symmetry.
pub fn zeros_unsymmetrised(table: &RecurrenceTable, n: usize, tol: f64) -> Result<ZeroSet> {
    let s = setup(table, n, tol)?;
    let mut out: Vec<BigReal> = (1..=n)
        .into_par_iter()
        .map(|nu| bisect(&s.betas, n, nu, -s.bound.clone(), s.bound.clone(), &s.tol, &s.tiny))
        .collect();
    out.reverse();
    Ok(ZeroSet {
        n,
        zeros: out,
        context: table.params().clone(),
    })
}

/// Outcome of the interlacing theorem checks.
#[derive(Clone, Debug, Default, Serialize)]
pub struct InterlacingReport {
    /// Number of individual inequalities tested.
    pub checked: usize,
    /// Description of every inequality that failed.
    pub violations: Vec<String>,
    /// max |x_{ℓ,2n}^{λ+1} − x_{ℓ,2n+1}^{λ}|.
    pub equality_deviation: f64,
}

impl InterlacingReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(what());
        }
    }
}

/// Consecutive-degree interlacing up to degree 2 n_max + 1 and, for every
/// shift k, the two chains
/// x_{ℓ+1,2n}^λ < x_{ℓ,2n−1}^λ < x_{ℓ,2n−1}^{λ+k} < x_{ℓ,2n−1}^{λ+1} < x_{ℓ,2n}^λ,
/// x_{ℓ+1,2n+1}^λ < x_{ℓ,2n}^λ < x_{ℓ,2n}^{λ+k} < x_{ℓ,2n}^{λ+1} = x_{ℓ,2n+1}^λ
/// for 1 ≤ n ≤ n_max. With k = 1 the comparison with λ + 1 is an identity
/// and is tested as ≤ within `tol`.
pub fn interlacing_check(params: &WeightParams, n_max: usize, ks: &[f64], tol: f64) -> Result<InterlacingReport> {
    let top = 2 * n_max + 1;
    let lo = RecurrenceTable::from_hankel(params, top)?;
    let bits = lo.precision_bits();
    let family = |p: &WeightParams| -> Result<Vec<Vec<BigReal>>> {
        let t = RecurrenceTable::from_hankel_fixed(&p.with_precision(bits), top)?;
        (1..=top).map(|d| Ok(zeros(&t, d, tol)?.positive_desc())).collect()
    };
    let base: Vec<Vec<BigReal>> = (1..=top)
        .map(|d| Ok(zeros(&lo, d, tol)?.positive_desc()))
        .collect::<Result<_>>()?;
    let plus_one = family(&params.shift_lambda_int(1))?;
    // z[d - 1][ℓ - 1] = x_{ℓ,d}.
    let x = |z: &[Vec<BigReal>], l: usize, d: usize| z[d - 1][l - 1].clone();
    let slack = BigReal::from_f64(tol, bits) * 4i64;
    let mut report = InterlacingReport::default();

    // Consecutive degrees: positive zeros of P_d and P_{d+1} alternate.
    for d in 1..top {
        let (a, b) = (&base[d - 1], &base[d]);
        for (l, za) in a.iter().enumerate() {
            report.expect(za < &b[l], || format!("x_{{{},{}}} < x_{{{},{}}}", l + 1, d, l + 1, d + 1));
            if let Some(zb) = b.get(l + 1) {
                report.expect(zb < za, || format!("x_{{{},{}}} < x_{{{},{}}}", l + 2, d + 1, l + 1, d));
            }
        }
    }

    let mut eq_dev = BigReal::zero(bits);
    for n in 1..=n_max {
        for l in 1..=n {
            let d = (x(&plus_one, l, 2 * n) - x(&base, l, 2 * n + 1)).abs();
            if d > eq_dev {
                eq_dev = d;
            }
        }
    }
    let dev = eq_dev.to_f64();
    report.equality_deviation = dev;
    report.expect(eq_dev <= slack, || format!("x^(λ+1)_(ℓ,2n) = x^λ_(ℓ,2n+1) off by {dev}"));

    for &k in ks {
        if !(k > 0.0 && k <= 1.0) {
            return Err(FreudError::Parameter(format!("shift k must lie in (0, 1], got {k}")));
        }
        let exact_one = k == 1.0;
        let shifted = if exact_one {
            plus_one.clone()
        } else {
            family(&params.shift_lambda(&scalar::exact_from_f64(k)?)?)?
        };
        let mid_ok = |a: &BigReal, b: &BigReal| if exact_one { a <= &(b + &slack) } else { a < b };
        for n in 1..=n_max {
            for l in 1..n {
                let e = [
                    x(&base, l + 1, 2 * n),
                    x(&base, l, 2 * n - 1),
                    x(&shifted, l, 2 * n - 1),
                    x(&plus_one, l, 2 * n - 1),
                    x(&base, l, 2 * n),
                ];
                report.expect(e[0] < e[1], || format!("k={k} n={n} ℓ={l}: x^λ_(ℓ+1,2n) < x^λ_(ℓ,2n-1)"));
                report.expect(e[1] < e[2], || format!("k={k} n={n} ℓ={l}: x^λ_(ℓ,2n-1) < x^(λ+k)_(ℓ,2n-1)"));
                report.expect(mid_ok(&e[2], &e[3]), || format!("k={k} n={n} ℓ={l}: x^(λ+k)_(ℓ,2n-1) < x^(λ+1)_(ℓ,2n-1)"));
                report.expect(e[3] < e[4], || format!("k={k} n={n} ℓ={l}: x^(λ+1)_(ℓ,2n-1) < x^λ_(ℓ,2n)"));

                let o = [
                    x(&base, l + 1, 2 * n + 1),
                    x(&base, l, 2 * n),
                    x(&shifted, l, 2 * n),
                    x(&plus_one, l, 2 * n),
                ];
                report.expect(o[0] < o[1], || format!("k={k} n={n} ℓ={l}: x^λ_(ℓ+1,2n+1) < x^λ_(ℓ,2n)"));
                report.expect(o[1] < o[2], || format!("k={k} n={n} ℓ={l}: x^λ_(ℓ,2n) < x^(λ+k)_(ℓ,2n)"));
                report.expect(mid_ok(&o[2], &o[3]), || format!("k={k} n={n} ℓ={l}: x^(λ+k)_(ℓ,2n) < x^(λ+1)_(ℓ,2n)"));
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lambda,
    T,
}

/// Positive zeros of P_n along a parameter grid and whether each increases.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub n: usize,
    pub direction: Direction,
    /// increasing[ν − 1] refers to x_{ν,n}.
    pub increasing: Vec<bool>,
    /// zeros[i][ν − 1] is x_{ν,n} at grid point i.
    pub zeros: Vec<Vec<f64>>,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.increasing.iter().all(|&b| b)
    }
}

/// Checks that each positive zero of P_n strictly increases along an
/// ascending grid of λ or t values; a grid of fewer than two points is
/// trivially monotone.
pub fn monotonicity_check(params: &WeightParams, n: usize, direction: Direction, grid: &[f64]) -> Result<MonotonicityReport> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(FreudError::Parameter("grid must be strictly ascending".into()));
    }
    let tol = 2f64.powi(-(params.precision_bits() as i32) / 2).max(1e-300);
    let sets: Vec<Vec<BigReal>> = grid
        .par_iter()
        .map(|&g| {
            let value = scalar::exact_from_f64(g)?;
            let p = match direction {
                Direction::Lambda => WeightParams::from_exact(params.m(), params.t_exact().clone(), value, params.precision_bits())?,
                Direction::T => params.with_t(value),
            };
            let table = RecurrenceTable::from_hankel(&p, n)?;
            Ok(zeros(&table, n, tol)?.positive_desc())
        })
        .collect::<Result<_>>()?;
    let count = n / 2;
    let increasing = (0..count)
        .map(|nu| sets.windows(2).all(|w| w[0][nu] < w[1][nu]))
        .collect();
    Ok(MonotonicityReport {
        n,
        direction,
        increasing,
        zeros: sets.iter().map(|s| s.iter().map(BigReal::to_f64).collect()).collect(),
    })
}

/// The bound max_{1≤k≤n−1} √(c_n β_k) with c_n = 4cos²(π/(n+1)) + ε on the largest zero.
#[derive(Clone, Debug, Serialize)]
pub struct ExtremeBound {
    pub n: usize,
    pub bound: BigReal,
    pub largest: BigReal,
    pub ok: bool,
}

pub fn extreme_zero_bound(table: &RecurrenceTable, n: usize, epsilon: f64) -> Result<ExtremeBound> {
    if n < 2 {
        return Err(FreudError::Parameter(format!("the extreme-zero bound needs n >= 2, got {n}")));
    }
    if !(epsilon > 0.0) {
        return Err(FreudError::Parameter("epsilon must be positive".into()));
    }
    let bits = table.params().working_bits();
    let set = zeros(table, n, 2f64.powi(-(bits as i32) / 2))?;
    let angle = BigReal::pi(bits) / (n as i64 + 1);
    let c_n = angle.cos().square() * 4i64 + BigReal::from_f64(epsilon, bits);
    let max_beta = BigReal::max_abs(&table.coeffs()[1..n], bits);
    let bound = (c_n * max_beta).sqrt();
    let largest = set.largest().cloned().unwrap_or_else(|| BigReal::zero(bits));
    let ok = largest.is_positive() && largest < bound;
    Ok(ExtremeBound { n, bound, largest, ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomials::eval_with_derivatives;

    fn table(m: u32, t: f64, lambda: f64, count: usize) -> RecurrenceTable {
        RecurrenceTable::from_hankel(&WeightParams::new(m, t, lambda, 256).unwrap(), count).unwrap()
    }

    #[test]
    fn small_degrees() {
        let t = table(2, 0.4, 0.1, 6);
        let z2 = zeros(&t, 2, 1e-40).unwrap();
        let r = t.beta(1).unwrap().sqrt();
        assert!((&z2.zeros[1] - &r).abs().to_f64() < 1e-39);
        assert!((&z2.zeros[0] + &r).abs().to_f64() < 1e-39);
        let z3 = zeros(&t, 3, 1e-40).unwrap();
        assert!(z3.zeros[1].is_zero());
        let r3 = (t.beta(1).unwrap() + t.beta(2).unwrap()).sqrt();
        assert!((&z3.zeros[2] - &r3).abs().to_f64() < 1e-39);
    }

    #[test]
    fn residuals_and_symmetry() {
        let t = table(3, 1.0, 0.5, 16);
        let tol = 1e-40;
        let z = zeros(&t, 8, tol).unwrap();
        assert_eq!(z.zeros.len(), 8);
        for w in z.zeros.windows(2) {
            assert!(w[0] < w[1]);
        }
        for x in &z.zeros {
            let (p, dp, _) = eval_with_derivatives(&t, 8, x).unwrap();
            assert!(p.abs() < dp.abs() * tol);
        }
        for n in [7, 12, 15] {
            let a = zeros(&t, n, tol).unwrap();
            let b = zeros_unsymmetrised(&t, n, tol).unwrap();
            for (x, y) in a.zeros.iter().zip(&b.zeros) {
                assert!((x - y).abs().to_f64() < 2.0 * tol);
            }
        }
    }

    #[test]
    fn interlacing_chains() {
        let p = WeightParams::new(3, 1.0, 0.5, 256).unwrap();
        let r = interlacing_check(&p, 4, &[0.3, 0.7, 1.0], 1e-40).unwrap();
        assert!(r.holds(), "{:?}", r.violations);
        assert!(r.equality_deviation < 1e-25);
        assert!(r.checked > 100);
        let trivial = interlacing_check(&p, 1, &[0.5], 1e-40).unwrap();
        assert!(trivial.holds());
        assert!(interlacing_check(&p, 2, &[1.5], 1e-30).is_err());
    }

    #[test]
    fn monotone_in_both_directions() {
        let p = WeightParams::new(2, 0.5, 0.5, 256).unwrap();
        let lam = monotonicity_check(&p, 2, Direction::Lambda, &[-0.5, 0.0, 0.5, 1.5]).unwrap();
        assert!(lam.holds());
        let t = monotonicity_check(&p, 7, Direction::T, &[-1.0, 0.0, 1.0]).unwrap();
        assert!(t.holds() && t.increasing.len() == 3);
        assert!(monotonicity_check(&p, 5, Direction::T, &[0.3]).unwrap().holds());
        assert!(monotonicity_check(&p, 5, Direction::T, &[0.3, 0.1]).is_err());
    }

    #[test]
    fn extreme_bound() {
        let t = table(2, 0.0, -0.5, 20);
        for n in 2..=20 {
            let b = extreme_zero_bound(&t, n, 1e-8).unwrap();
            assert!(b.ok, "n={n}");
        }
        let b2 = extreme_zero_bound(&t, 2, 1e-8).unwrap();
        let expected = (t.beta(1).unwrap() * (1.0 + 1e-8)).sqrt();
        assert!(((&b2.bound - &expected) / &expected).abs().to_f64() < 1e-12);
        assert!(extreme_zero_bound(&t, 1, 1e-8).is_err());
        assert!(extreme_zero_bound(&t, 4, 0.0).is_err());
    }
}
