//! Independent quadrature for integrals against the weight.
//!
//! Everything is expressed in the half-line variable s = x²: an even integrand
//! F(x²) integrates against ω over ℝ to ∫_0^∞ F(s) s^λ e^{ts − s^m} ds. The
//! interval (0, a) uses tanh-sinh nodes, which absorb the s^λ endpoint
//! singularity. The tail (a, ∞) is rewritten in u = s^m and covered by
//! exp-sinh nodes, so e^{−s^m} becomes a plain e^{−u}.

use rayon::prelude::*;

use crate::error::{FreudError, Result};
use crate::hankel::{Method, RecurrenceTable};
use crate::moments::WeightParams;
use crate::polynomials::{MonicPolynomial, Parity};
use crate::scalar::BigReal;

/// Largest |u| on the transformed axis.
const MAX_ABSCISSA: f64 = 12.0;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Relative change between successive levels that counts as converged.
    pub target_tol: f64,
    /// Number of step halvings allowed, starting from step 1/2.
    pub max_levels: u32,
    /// Boundary between the tanh-sinh and exp-sinh pieces.
    pub split_point: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            target_tol: 1e-30,
            max_levels: 10,
            split_point: 1.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(target_tol: f64) -> Self {
        QuadratureSpec {
            target_tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.target_tol > 0.0) {
            return Err(FreudError::Parameter("quadrature tolerance must be positive".into()));
        }
        if self.max_levels < 4 {
            return Err(FreudError::Parameter("quadrature needs at least 4 levels".into()));
        }
        if !(self.split_point > 0.0) {
            return Err(FreudError::Parameter("split point must be positive".into()));
        }
        Ok(())
    }

    /// Working precision: twice the bits of the tolerance plus guard bits.
    pub fn bits(&self) -> u32 {
        let tol_bits = (-self.target_tol.log2()).ceil().max(1.0) as u32;
        (2 * tol_bits + 32).max(128)
    }
}

/// Nodes s_i and weights w_i with Σ w_i F(s_i) ≈ ∫_0^∞ F(s) s^λ e^{ts−s^m} ds.
#[derive(Clone, Debug)]
pub struct HalfLineRule {
    pub nodes: Vec<BigReal>,
    pub weights: Vec<BigReal>,
}

impl HalfLineRule {
    /// The rule with step 2^{−level} on both pieces.
    pub fn new(params: &WeightParams, level: u32, split: f64, bits: u32) -> Self {
        let h = BigReal::pow2(-(level as i32), bits);
        let lambda = BigReal::from_rational(params.lambda_exact(), bits);
        let t = BigReal::from_rational(params.t_exact(), bits);
        let m = params.m() as i64;
        let a = BigReal::from_decimal_f64(split, bits);
        let half_pi = BigReal::pi(bits) / 2i64;
        let eps = BigReal::pow2(-(bits as i32) - 8, bits);
        let kmax = (MAX_ABSCISSA * f64::from(1u32 << level)) as i64;

        let weight = |s: &BigReal| -> BigReal {
            (s.powf(&lambda) * (&t * s - s.powi(m as i32)).exp()).with_precision(bits)
        };

        // (0, a): s = a / (1 + e^{−2v}), v = (π/2) sinh u.
        let left = |k: i64| -> (BigReal, BigReal) {
            let u = &h * k;
            let v = &half_pi * u.sinh();
            let s = &a / (BigReal::one(bits) + (&v * -2i64).exp());
            let sech2 = (v.cosh().square()).recip();
            let ds = &a / 2i64 * sech2 * &half_pi * u.cosh();
            let w = &ds * weight(&s) * &h;
            (s, w)
        };
        // (a, ∞): s = (a^m + e^{(π/2) sinh u})^{1/m}.
        let am = a.powi(m as i32);
        let inv_m = BigReal::ratio(1, m, bits);
        let right = |k: i64| -> (BigReal, BigReal) {
            let u = &h * k;
            let e = (&half_pi * u.sinh()).exp();
            let big_u = &am + &e;
            let s = big_u.powf(&inv_m);
            let du = e * &half_pi * u.cosh();
            // ds = (1/m) u^{1/m − 1} du; e^{−s^m} = e^{−u}.
            let jac = &s / &big_u / m;
            let w = du * jac * s.powf(&lambda) * (&t * &s - &big_u).exp() * &h;
            (s, w)
        };

        let collect = |f: &(dyn Fn(i64) -> (BigReal, BigReal) + Sync)| -> Vec<(BigReal, BigReal)> {
            let mut out: Vec<(BigReal, BigReal)> = (-kmax..=kmax).into_par_iter().map(f).collect();
            let total = BigReal::sum(out.iter().map(|(_, w)| w), bits);
            let cutoff = total.abs() * &eps;
            out.retain(|(_, w)| w.abs() > cutoff);
            out
        };
        let mut pairs = collect(&left);
        pairs.extend(collect(&right));
        let (nodes, weights) = pairs.into_iter().unzip();
        HalfLineRule { nodes, weights }
    }

    /// (Σ w_i F(s_i), Σ |w_i F(s_i)|) for several integrands at once.
    pub fn apply_many(&self, f: &(dyn Fn(&BigReal) -> Vec<BigReal> + Sync)) -> Vec<(BigReal, BigReal)> {
        let per_node: Vec<Vec<BigReal>> = self
            .nodes
            .par_iter()
            .zip(&self.weights)
            .map(|(s, w)| f(s).into_iter().map(|v| v * w).collect())
            .collect();
        let count = per_node.first().map_or(0, Vec::len);
        let bits = self.weights.first().map_or(128, BigReal::precision_bits);
        (0..count)
            .map(|j| {
                let mut sum = BigReal::zero(bits);
                let mut abs = BigReal::zero(bits);
                for row in &per_node {
                    sum += &row[j];
                    abs += row[j].abs();
                }
                (sum, abs)
            })
            .collect()
    }
}

/// ∫_0^∞ f(s) s^λ e^{ts − s^m} ds, halving the step until successive levels
/// agree to target_tol relative to ∫|f| times the weight.
pub fn integrate_halfline(
    f: &(dyn Fn(&BigReal) -> BigReal + Sync),
    params: &WeightParams,
    spec: &QuadratureSpec,
) -> Result<BigReal> {
    let many = |s: &BigReal| vec![f(s)];
    Ok(integrate_halfline_many(&many, params, spec)?.remove(0))
}

/// Several integrals sharing one sequence of rules.
pub fn integrate_halfline_many(
    f: &(dyn Fn(&BigReal) -> Vec<BigReal> + Sync),
    params: &WeightParams,
    spec: &QuadratureSpec,
) -> Result<Vec<BigReal>> {
    spec.validate()?;
    let bits = spec.bits();
    let tol = BigReal::from_f64(spec.target_tol, bits);
    let mut previous: Option<Vec<BigReal>> = None;
    for level in 1..=spec.max_levels {
        let rule = HalfLineRule::new(params, level, spec.split_point, bits);
        let current = rule.apply_many(f);
        if let Some(prev) = &previous {
            let converged = current
                .iter()
                .zip(prev)
                .all(|((sum, abs), p)| (sum - p).abs() <= &tol * abs);
            if converged && level >= 3 {
                return Ok(current.into_iter().map(|(s, _)| s).collect());
            }
        }
        previous = Some(current.into_iter().map(|(s, _)| s).collect());
    }
    Err(FreudError::NonConvergence {
        what: "half-line quadrature",
        levels: spec.max_levels,
    })
}

/// ∫_a^b f by tanh-sinh, halving the step until successive levels agree to
/// `tol` relative to ∫|f|. Endpoint singularities of algebraic type are fine.
pub fn integrate_interval(
    f: &(dyn Fn(&BigReal) -> BigReal + Sync),
    a: &BigReal,
    b: &BigReal,
    tol: f64,
    max_levels: u32,
) -> Result<BigReal> {
    let spec = QuadratureSpec {
        target_tol: tol,
        max_levels,
        split_point: 1.0,
    };
    spec.validate()?;
    let bits = spec.bits().max(a.precision_bits());
    let half_pi = BigReal::pi(bits) / 2i64;
    let mid = (a + b) / 2i64;
    let half = (b - a) / 2i64;
    let tol_big = BigReal::from_f64(tol, bits);
    let mut previous: Option<BigReal> = None;
    for level in 1..=max_levels {
        let h = BigReal::pow2(-(level as i32), bits);
        let kmax = (MAX_ABSCISSA * f64::from(1u32 << level)) as i64;
        let terms: Vec<(BigReal, BigReal)> = (-kmax..=kmax)
            .into_par_iter()
            .filter_map(|k| {
                let u = &h * k;
                let v = &half_pi * u.sinh();
                let y = v.tanh();
                // Nodes that round onto an endpoint carry no weight.
                if (y.abs() - 1i64).is_zero() {
                    return None;
                }
                let w = &half_pi * u.cosh() / v.cosh().square() * &half * &h;
                let fx = f(&(&mid + &half * &y));
                if !fx.is_finite() {
                    return None;
                }
                let term = fx * w;
                Some((term.abs(), term))
            })
            .collect();
        let sum = BigReal::sum(terms.iter().map(|(_, t)| t), bits);
        let abs = BigReal::sum(terms.iter().map(|(a, _)| a), bits);
        if let Some(prev) = &previous {
            if level >= 3 && (&sum - prev).abs() <= &tol_big * &abs {
                return Ok(sum);
            }
        }
        previous = Some(sum);
    }
    Err(FreudError::NonConvergence {
        what: "interval quadrature",
        levels: max_levels,
    })
}

/// μ_0, μ_2, …, μ_{2K} by quadrature.
pub fn oracle_even_moments(params: &WeightParams, k_max: usize, spec: &QuadratureSpec) -> Result<Vec<BigReal>> {
    let f = |s: &BigReal| {
        let mut out = Vec::with_capacity(k_max + 1);
        let mut p = BigReal::one(s.precision_bits());
        for _ in 0..=k_max {
            out.push(p.clone());
            p *= s;
        }
        out
    };
    integrate_halfline_many(&f, params, spec)
}

/// μ_k by quadrature; exact zero for odd k.
pub fn oracle_moment(params: &WeightParams, k: usize, spec: &QuadratureSpec) -> Result<BigReal> {
    if k % 2 == 1 {
        return Ok(BigReal::zero(params.precision_bits()));
    }
    let f = |s: &BigReal| s.powi((k / 2) as i32);
    integrate_halfline(&f, params, spec)
}

/// Coefficients of Q with Q(x²) = x^shift · p(x) · q(x), for an even product.
fn even_product_in_s(p: &[BigReal], q: &[BigReal], shift: usize, bits: u32) -> Vec<BigReal> {
    let deg = p.len() + q.len() + shift;
    let mut out = vec![BigReal::zero(bits); deg / 2 + 1];
    for (i, a) in p.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in q.iter().enumerate() {
            let k = i + j + shift;
            if k % 2 == 0 && !b.is_zero() {
                out[k / 2] += a * b;
            }
        }
    }
    out
}

fn horner(coeffs: &[BigReal], s: &BigReal) -> BigReal {
    let mut acc = BigReal::zero(s.precision_bits());
    for c in coeffs.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

/// ∫_ℝ x^shift p(x) q(x) ω(x) dx, zero when the integrand is odd.
pub fn weighted_integral(
    p: &[BigReal],
    p_parity: Parity,
    q: &[BigReal],
    q_parity: Parity,
    shift: usize,
    params: &WeightParams,
    spec: &QuadratureSpec,
) -> Result<BigReal> {
    let odd = (p_parity != q_parity) ^ (shift % 2 == 1);
    if odd {
        return Ok(BigReal::zero(params.precision_bits()));
    }
    let bits = spec.bits();
    let poly = even_product_in_s(p, q, shift, bits);
    let f = |s: &BigReal| horner(&poly, s);
    integrate_halfline(&f, params, spec)
}

/// ⟨p, q⟩ = ∫ p q ω dx; mixed parity gives exact 0.
pub fn inner_product(p: &MonicPolynomial, q: &MonicPolynomial, params: &WeightParams, spec: &QuadratureSpec) -> Result<BigReal> {
    weighted_integral(p.coeffs(), p.parity(), q.coeffs(), q.parity(), 0, params, spec)
}

/// β_1 … β_N by the discretised Stieltjes procedure on the quadrature rule,
/// refining the rule until successive levels agree.
pub fn recurrence(params: &WeightParams, count: usize, spec: &QuadratureSpec) -> Result<RecurrenceTable> {
    spec.validate()?;
    let bits = spec.bits();
    let tol = BigReal::from_f64(spec.target_tol, bits);
    let mut previous: Option<(Vec<BigReal>, BigReal)> = None;
    for level in 1..=spec.max_levels {
        let rule = HalfLineRule::new(params, level, spec.split_point, bits);
        let current = stieltjes(&rule, count, bits);
        if let Some((prev, _)) = &previous {
            let converged = current
                .0
                .iter()
                .zip(prev)
                .all(|(a, b)| (a - b).abs() <= &tol * a.abs());
            if converged && level >= 3 {
                let (betas, h0) = current;
                let out_bits = params.precision_bits().min(bits);
                let betas = betas.into_iter().map(|b| b.with_precision(out_bits)).collect();
                return RecurrenceTable::new(params.with_precision(out_bits), betas, h0.with_precision(out_bits), Method::Oracle);
            }
        }
        previous = Some(current);
    }
    Err(FreudError::NonConvergence {
        what: "Stieltjes procedure",
        levels: spec.max_levels,
    })
}

fn stieltjes(rule: &HalfLineRule, count: usize, bits: u32) -> (Vec<BigReal>, BigReal) {
    let xs: Vec<BigReal> = rule.nodes.iter().map(BigReal::sqrt).collect();
    let zero = BigReal::zero(bits);
    let mut prev = vec![zero.clone(); xs.len()];
    let mut cur = vec![BigReal::one(bits); xs.len()];
    let norm = |p: &[BigReal]| -> BigReal {
        p.iter()
            .zip(&rule.weights)
            .fold(BigReal::zero(bits), |acc, (v, w)| acc + v.square() * w)
    };
    let h0 = norm(&cur);
    let mut h_prev = h0.clone();
    let mut beta = zero;
    let mut betas = Vec::with_capacity(count);
    for _ in 0..count {
        let next: Vec<BigReal> = xs
            .iter()
            .zip(cur.iter().zip(&prev))
            .map(|(x, (c, p))| x * c - &beta * p)
            .collect();
        let h = norm(&next);
        beta = &h / &h_prev;
        betas.push(beta.clone());
        h_prev = h;
        prev = cur;
        cur = next;
    }
    (betas, h0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{moment, mu0};
    use crate::polynomials::generate;
    use crate::scalar::gamma;

    fn rel(a: &BigReal, b: &BigReal) -> f64 {
        ((a - b) / b).abs().to_f64()
    }

    #[test]
    fn gamma_reduction() {
        let p = WeightParams::new(2, 0.0, -0.5, 256).unwrap();
        let spec = QuadratureSpec::with_tol(1e-25);
        let one = |_: &BigReal| BigReal::one(spec.bits());
        let v = integrate_halfline(&one, &p, &spec).unwrap();
        let expected = gamma(&BigReal::from_decimal_f64(0.25, 256)).unwrap() / 2i64;
        assert!(rel(&v, &expected) < 1e-24);
    }

    #[test]
    fn matches_hypergeometric_moments() {
        let spec = QuadratureSpec::with_tol(1e-25);
        for (m, t, lambda) in [(3, 1.0, 0.5), (2, 1.0, 0.5), (4, -1.0, -0.5), (2, 0.7, 2.0)] {
            let p = WeightParams::new(m, t, lambda, 256).unwrap();
            let oracle = oracle_even_moments(&p, 6, &spec).unwrap();
            for (k, q) in oracle.iter().enumerate() {
                assert!(rel(q, &moment(&p, 2 * k).unwrap()) < 1e-22, "m={m} t={t} k={k}");
            }
            let s = |s: &BigReal| s.clone();
            let shifted = integrate_halfline(&s, &p, &spec).unwrap();
            assert!(rel(&shifted, &mu0(&p.shift_lambda_int(1)).unwrap()) < 1e-22);
        }
    }

    #[test]
    fn orthogonality_of_generated_polynomials() {
        let p = WeightParams::new(3, 1.0, 0.5, 256).unwrap();
        let table = RecurrenceTable::from_hankel(&p, 9).unwrap();
        let ps = generate(&table, 8).unwrap();
        let spec = QuadratureSpec::with_tol(1e-28);
        assert!(inner_product(&ps[1], &ps[2], &p, &spec).unwrap().is_zero());
        assert!(rel(&inner_product(&ps[0], &ps[0], &p, &spec).unwrap(), &mu0(&p).unwrap()) < 1e-25);
        let h3 = table.beta(3).unwrap() * table.beta(2).unwrap() * table.beta(1).unwrap() * mu0(&p).unwrap();
        assert!(rel(&inner_product(&ps[3], &ps[3], &p, &spec).unwrap(), &h3) < 1e-25);
        for i in 0..=8 {
            for j in (i + 2..=8).step_by(2) {
                let v = inner_product(&ps[i], &ps[j], &p, &spec).unwrap();
                let scale = (&table.norms()[i] * &table.norms()[j]).sqrt();
                assert!((v / scale).abs().to_f64() < 1e-20, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn stieltjes_matches_hankel() {
        let p = WeightParams::new(2, 0.5, 0.0, 256).unwrap();
        let hankel = RecurrenceTable::from_hankel(&p, 12).unwrap();
        let oracle = recurrence(&p, 12, &QuadratureSpec::with_tol(1e-30)).unwrap();
        assert_eq!(oracle.method(), Method::Oracle);
        for n in 1..=12 {
            assert!(rel(oracle.beta(n).unwrap(), hankel.beta(n).unwrap()) < 1e-25, "n={n}");
        }
    }

    #[test]
    fn interval_rule() {
        let bits = 192;
        let f = |x: &BigReal| (BigReal::one(x.precision_bits()) - x.square()).sqrt();
        let v = integrate_interval(&f, &BigReal::from_i64(-1, bits), &BigReal::one(bits), 1e-40, 10).unwrap();
        assert!(rel(&v, &(BigReal::pi(bits) / 2i64)) < 1e-38);
    }

    #[test]
    fn spec_validation() {
        let p = WeightParams::new(2, 0.0, 0.0, 128).unwrap();
        let bad = QuadratureSpec {
            max_levels: 2,
            ..Default::default()
        };
        let f = |_: &BigReal| BigReal::one(128);
        assert!(integrate_halfline(&f, &p, &bad).is_err());
        let tight = QuadratureSpec {
            target_tol: 1e-60,
            max_levels: 4,
            split_point: 1.0,
        };
        assert!(matches!(
            integrate_halfline(&f, &p, &tight),
            Err(FreudError::NonConvergence { .. })
        ));
    }

    #[test]
    fn level_doubling_converges_fast() {
        let p = WeightParams::new(3, 1.0, 0.5, 256).unwrap();
        let exact = mu0(&p).unwrap();
        let bits = 256;
        let err = |level| {
            let rule = HalfLineRule::new(&p, level, 1.0, bits);
            let v = rule.apply_many(&|_: &BigReal| vec![BigReal::one(bits)]).remove(0).0;
            rel(&v, &exact)
        };
        let (e3, e4, e5) = (err(3), err(4), err(5));
        assert!(e4 < e3 * 1e-3 && e5 < e4 * 1e-3, "{e3} {e4} {e5}");
    }
}
