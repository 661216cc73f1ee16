//! Identities linking the families at λ and λ + 1, and the order-two
//! quasi-orthogonality of P_n(x; λ) for −2 < λ < −1.

use rug::Rational;
use serde::Serialize;

use super::{eval_with_derivatives, monic_coeffs, Parity};
use crate::error::{FreudError, Result};
use crate::hankel::{betas_from_even_moments, RecurrenceTable};
use crate::moments::{partition_sum, WeightParams};
use crate::oracle::{weighted_integral, QuadratureSpec};
use crate::scalar::BigReal;

/// Largest relative residual over the sample points of each identity:
/// 0. x P_{2n}(x; λ+1) = P_{2n+1}(x; λ)
/// 1. x² P_{2n−1}(x; λ+1) = x P_{2n}(x; λ) − {β_{2n}(λ) + P'_{2n+1}(0; λ)/P'_{2n−1}(0; λ)} P_{2n−1}(x; λ)
/// 2. P_{2n+1}(x; λ) = P_{2n+1}(x; λ+1) + β_{2n}(λ+1) P_{2n−1}(x; λ+1)
/// 3. P_{2n}(x; λ) = P_{2n}(x; λ+1) − β_{2n}(λ) β_{2n−1}(λ+1) P'_{2n−1}(0; λ)/P'_{2n+1}(0; λ) P_{2n−2}(x; λ+1)
///
/// Identities 1 and 3 only exist for n ≥ 1 and report 0 at n = 0.
#[derive(Clone, Debug, Serialize)]
pub struct MixedReport {
    pub n: usize,
    pub residuals: [f64; 4],
    /// Precision shared by both families.
    pub precision_bits: u32,
}

impl MixedReport {
    pub fn max(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

fn rel(lhs: &BigReal, rhs: &BigReal) -> BigReal {
    let scale = lhs.abs() + rhs.abs();
    if scale.is_zero() {
        scale
    } else {
        (lhs - rhs).abs() / scale
    }
}

fn worse(acc: &mut BigReal, r: BigReal) {
    if r > *acc {
        *acc = r;
    }
}

/// Checks the four mixed identities at index n over the sample points.
pub fn mixed_recurrence_check(params: &WeightParams, n: usize, xs: &[BigReal]) -> Result<MixedReport> {
    let count = 2 * n + 2;
    let lo = RecurrenceTable::from_hankel(params, count)?;
    let bits = lo.precision_bits();
    let hi = RecurrenceTable::from_hankel_fixed(&params.shift_lambda_int(1).with_precision(bits), count)?;
    let wbits = params.with_precision(bits).working_bits();
    let zero = BigReal::zero(wbits);
    let p = |t: &RecurrenceTable, k: isize, x: &BigReal| -> Result<(BigReal, BigReal)> {
        if k < 0 {
            return Ok((zero.clone(), zero.clone()));
        }
        let (v, d, _) = eval_with_derivatives(t, k as usize, x)?;
        Ok((v, d))
    };
    let ni = n as isize;
    let origin = BigReal::zero(wbits);
    let dp0 = |k: isize| -> Result<BigReal> { Ok(p(&lo, k, &origin)?.1) };

    let mut out = [zero.clone(), zero.clone(), zero.clone(), zero.clone()];
    for x in xs {
        let x = x.with_precision(wbits);
        let lhs = &x * p(&hi, 2 * ni, &x)?.0;
        worse(&mut out[0], rel(&lhs, &p(&lo, 2 * ni + 1, &x)?.0));

        let odd_hi = p(&hi, 2 * ni + 1, &x)?.0 + hi.beta(2 * n)? * p(&hi, 2 * ni - 1, &x)?.0;
        worse(&mut out[2], rel(&p(&lo, 2 * ni + 1, &x)?.0, &odd_hi));

        if n >= 1 {
            let a = dp0(2 * ni + 1)? / dp0(2 * ni - 1)?;
            let coeff = lo.beta(2 * n)? + a;
            let lhs = x.square() * p(&hi, 2 * ni - 1, &x)?.0;
            let rhs = &x * p(&lo, 2 * ni, &x)?.0 - coeff * p(&lo, 2 * ni - 1, &x)?.0;
            worse(&mut out[1], rel(&lhs, &rhs));

            let c = lo.beta(2 * n)? * hi.beta(2 * n - 1)? * dp0(2 * ni - 1)? / dp0(2 * ni + 1)?;
            let rhs = p(&hi, 2 * ni, &x)?.0 - c * p(&hi, 2 * ni - 2, &x)?.0;
            worse(&mut out[3], rel(&p(&lo, 2 * ni, &x)?.0, &rhs));
        }
    }
    Ok(MixedReport {
        n,
        residuals: out.map(|r| r.to_f64()),
        precision_bits: bits,
    })
}

/// ∫ x^k P_n(x; λ) |x|^{2λ+3} e^{tx² − x^{2m}} dx for k = 0 … n−1, together with
/// the Cauchy–Schwarz bound (∫ P_n² ·)^{1/2} (∫ x^{2k} ·)^{1/2} for each k.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiReport {
    pub n: usize,
    pub integrals: Vec<BigReal>,
    pub scale: Vec<BigReal>,
}

impl QuasiReport {
    /// Largest |integral| / scale over k = 0 … n−3, where orthogonality holds.
    pub fn orthogonal_part(&self) -> f64 {
        self.integrals
            .iter()
            .zip(&self.scale)
            .take(self.n.saturating_sub(2))
            .map(|(v, s)| (v.abs() / s).to_f64())
            .fold(0.0, f64::max)
    }
}

/// P_n(x; λ) for −2 < λ < −1 integrated against the admissible weight at λ + 1.
///
/// The moments at λ are the analytic continuation: μ_0(λ) from the partition
/// sum, μ_{2j}(λ) = μ_0(λ + j) for j ≥ 1, which are ordinary moments.
pub fn quasi_orthogonality_check(
    m: u32,
    t: &Rational,
    lambda: &Rational,
    n: usize,
    bits: u32,
    spec: &QuadratureSpec,
) -> Result<QuasiReport> {
    if !(*lambda > -2 && *lambda < -1) {
        return Err(FreudError::Parameter(format!(
            "quasi-orthogonality needs -2 < lambda < -1, got {}",
            lambda.to_f64()
        )));
    }
    let shifted = WeightParams::from_exact(m, t.clone(), Rational::from(lambda + 1u32), bits)?;
    let wbits = shifted.working_bits().max(spec.bits());
    let count = n.max(1);
    let mut even = vec![partition_sum(m, t, lambda, wbits)?];
    let mut current = shifted.with_precision(wbits);
    for _ in 1..=count {
        even.push(partition_sum(m, t, current.lambda_exact(), wbits)?);
        current = current.shift_lambda_int(1);
    }
    let mut coeffs = vec![BigReal::zero(wbits)];
    coeffs.extend(betas_from_even_moments(&even, count)?);
    let polys = monic_coeffs(&coeffs, n, wbits);
    let pn = &polys[n];
    let parity = Parity::of(n);
    let one = [BigReal::one(wbits)];

    let norm = weighted_integral(pn, parity, pn, parity, 0, &shifted, spec)?;
    let mut integrals = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    for k in 0..n {
        integrals.push(weighted_integral(pn, parity, &one, Parity::Even, k, &shifted, spec)?);
        let mono = weighted_integral(&one, Parity::Even, &one, Parity::Even, 2 * k, &shifted, spec)?;
        scale.push((&norm * mono).sqrt());
    }
    Ok(QuasiReport { n, integrals, scale })
}
