//! Hankel determinants of the moment sequence and the recurrence coefficients
//! they determine.
//!
//! For a symmetric weight the full Hankel determinant factors as
//! Δ_{2n} = A_n B_n and Δ_{2n+1} = A_{n+1} B_n, where A_n and B_n are the
//! Hankel determinants of μ_0, μ_2, … and μ_2, μ_4, … respectively. The
//! parity factors are half the size, so they are the primary route to β_n.

use rayon::prelude::*;
use rug::Rational;
use serde::Serialize;

use crate::error::{FreudError, Result};
use crate::moments::{MomentTable, WeightParams};
use crate::scalar::{self, BigReal};

/// Maximum number of precision doublings in the adaptive policy.
pub const MAX_RETRIES: u32 = 3;

/// Bits per requested coefficient in the initial adaptive precision.
pub const BITS_PER_BETA: u32 = 24;

/// Where a recurrence table came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hankel,
    Painleve,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Hankel => "hankel",
            Method::Painleve => "painleve",
            Method::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// β_1 … β_N of the symmetric recurrence P_{n+1} = x P_n − β_n P_{n−1},
/// together with the norms h_n = β_n h_{n−1}, h_0 = μ_0.
///
/// Index 0 of the coefficient vector holds β_0 = 0.
#[derive(Clone, Debug)]
pub struct RecurrenceTable {
    params: WeightParams,
    coeffs: Vec<BigReal>,
    norms: Vec<BigReal>,
    method: Method,
    truncated: bool,
}

impl RecurrenceTable {
    /// Builds a table from β_1 … β_N and h_0, checking positivity.
    pub fn new(params: WeightParams, betas: Vec<BigReal>, h0: BigReal, method: Method) -> Result<Self> {
        let bits = params.precision_bits();
        if let Some(i) = betas.iter().position(|b| !b.is_positive()) {
            return Err(FreudError::NonPositive { n: i + 1, bits });
        }
        if !h0.is_positive() {
            return Err(FreudError::NonPositive { n: 0, bits });
        }
        let mut coeffs = Vec::with_capacity(betas.len() + 1);
        coeffs.push(BigReal::zero(bits));
        coeffs.extend(betas);
        let mut norms = Vec::with_capacity(coeffs.len());
        norms.push(h0);
        for b in &coeffs[1..] {
            let next = norms.last().unwrap() * b;
            norms.push(next);
        }
        Ok(RecurrenceTable {
            params,
            coeffs,
            norms,
            method,
            truncated: false,
        })
    }

    pub(crate) fn mark_truncated(mut self, truncated: bool) -> Self {
        self.truncated = truncated;
        self
    }

    /// β_1 … β_N by the parity determinant route, with the adaptive precision
    /// policy: start at max(256, 24 N, requested) bits and double on failure.
    pub fn from_hankel(params: &WeightParams, count: usize) -> Result<Self> {
        let start = params
            .precision_bits()
            .max(scalar::DEFAULT_PRECISION)
            .max(BITS_PER_BETA.saturating_mul(count as u32));
        let mut bits = start;
        let mut last = None;
        for _ in 0..=MAX_RETRIES {
            match Self::from_hankel_fixed(&params.with_precision(bits), count) {
                Ok(table) => return Ok(table),
                Err(e @ (FreudError::NonPositive { .. } | FreudError::PrecisionExhausted { .. })) => {
                    last = Some(e);
                    bits *= 2;
                }
                Err(e) => return Err(e),
            }
        }
        Err(FreudError::PrecisionExhausted {
            retries: MAX_RETRIES,
            message: format!(
                "{count} recurrence coefficients from {start} to {} bits: {}",
                bits / 2,
                last.map(|e| e.to_string()).unwrap_or_default()
            ),
        })
    }

    /// β_1 … β_N at exactly the precision in `params`; fails rather than
    /// escalating when positivity or the full-determinant cross-check fails.
    pub fn from_hankel_fixed(params: &WeightParams, count: usize) -> Result<Self> {
        let bits = params.precision_bits();
        let moments = MomentTable::compute(params, count.max(1))?;
        let minors = ParityMinors::compute(moments.even_moments(), count / 2 + 1, count.div_ceil(2))?;
        let betas = (1..=count).map(|n| minors.beta(n)).collect::<Result<Vec<_>>>()?;
        if let Some(i) = betas.iter().position(|b| !b.is_positive()) {
            return Err(FreudError::NonPositive { n: i + 1, bits });
        }

        let full = leading_minors(full_hankel(&moments, count + 1)?)?;
        let tol = BigReal::pow2(-((bits / 2) as i32), bits);
        for n in 1..=count {
            let cross = &full[n + 1] * &full[n - 1] / full[n].square();
            let rel = ((&cross - &betas[n - 1]) / &betas[n - 1]).abs();
            if rel > tol {
                return Err(FreudError::PrecisionExhausted {
                    retries: 0,
                    message: format!(
                        "parity and full determinant forms of beta_{n} disagree by {} at {bits} bits",
                        rel.to_short(3)
                    ),
                });
            }
        }
        let betas = betas.into_iter().map(|b| b.with_precision(bits)).collect();
        let h0 = moments.even(0).with_precision(bits);
        Self::new(params.clone(), betas, h0, Method::Hankel)
    }

    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn precision_bits(&self) -> u32 {
        self.params.precision_bits()
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// True when forward generation stopped before the requested count.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// N, the index of the last stored coefficient.
    pub fn len(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// β_0 = 0, β_1, …, β_N.
    pub fn coeffs(&self) -> &[BigReal] {
        &self.coeffs
    }

    /// β_1, …, β_N.
    pub fn betas(&self) -> &[BigReal] {
        &self.coeffs[1..]
    }

    /// β_n for 0 ≤ n ≤ N.
    pub fn beta(&self, n: usize) -> Result<&BigReal> {
        self.coeffs.get(n).ok_or(FreudError::InsufficientBetas {
            needed: n,
            available: self.len(),
        })
    }

    /// h_0, …, h_N.
    pub fn norms(&self) -> &[BigReal] {
        &self.norms
    }

    /// Requires at least `n` coefficients.
    pub fn require(&self, n: usize) -> Result<()> {
        if n > self.len() {
            Err(FreudError::InsufficientBetas {
                needed: n,
                available: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

/// Determinants of all leading principal submatrices, [1, d_1, …, d_n], by
/// fraction-free (Bareiss) elimination without pivoting.
///
/// Without row exchanges the k-th Bareiss pivot is exactly the k-th leading
/// minor, so one O(n³) pass yields all of them. A zero pivot is reported as a
/// range error; for positive definite input it signals precision exhaustion.
pub fn leading_minors(mut a: Vec<Vec<BigReal>>) -> Result<Vec<BigReal>> {
    let n = a.len();
    let bits = a
        .iter()
        .flatten()
        .map(BigReal::precision_bits)
        .max()
        .unwrap_or(scalar::DEFAULT_PRECISION);
    let mut minors = Vec::with_capacity(n + 1);
    minors.push(BigReal::one(bits));
    let mut prev = BigReal::one(bits);
    for k in 0..n {
        let pivot = a[k][k].clone();
        if pivot.is_zero() {
            return Err(FreudError::range("hankel", format!("leading minor {} vanished", k + 1)));
        }
        minors.push(pivot.clone());
        let (head, tail) = a.split_at_mut(k + 1);
        let row_k = &head[k];
        tail.par_iter_mut().for_each(|row| {
            let lead = row[k].clone();
            for j in k + 1..n {
                row[j] = (&pivot * &row[j] - &lead * &row_k[j]) / &prev;
            }
        });
        prev = pivot;
    }
    Ok(minors)
}

/// Determinant by Bareiss elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<BigReal>>) -> BigReal {
    let n = a.len();
    let bits = a
        .iter()
        .flatten()
        .map(BigReal::precision_bits)
        .max()
        .unwrap_or(scalar::DEFAULT_PRECISION);
    let mut sign = 1i64;
    let mut prev = BigReal::one(bits);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
            .unwrap();
        if a[p][k].is_zero() {
            return BigReal::zero(bits);
        }
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        let pivot = a[k][k].clone();
        let (head, tail) = a.split_at_mut(k + 1);
        let row_k = &head[k];
        for row in tail.iter_mut() {
            let lead = row[k].clone();
            for j in k + 1..n {
                row[j] = (&pivot * &row[j] - &lead * &row_k[j]) / &prev;
            }
        }
        prev = pivot;
    }
    if n == 0 {
        BigReal::one(bits)
    } else {
        a[n - 1][n - 1].clone() * sign
    }
}

fn full_hankel(moments: &MomentTable, n: usize) -> Result<Vec<Vec<BigReal>>> {
    if n > 0 {
        moments.get(2 * n - 2)?;
    }
    (0..n)
        .map(|j| (0..n).map(|k| moments.get(j + k)).collect())
        .collect()
}

fn parity_matrix(even: &[BigReal], n: usize, offset: usize) -> Result<Vec<Vec<BigReal>>> {
    if n > 0 && 2 * n - 2 + offset >= even.len() {
        return Err(FreudError::InsufficientMoments {
            needed: 2 * (2 * n - 2 + offset),
            available: 2 * (even.len() - 1),
        });
    }
    Ok((0..n)
        .map(|j| (0..n).map(|k| even[j + k + offset].clone()).collect())
        .collect())
}

/// Δ_n = det[μ_{j+k}]_{j,k=0}^{n−1}, with Δ_0 = 1.
pub fn hankel_det(moments: &MomentTable, n: usize) -> Result<BigReal> {
    let bits = moments.even(0).precision_bits();
    if n == 0 {
        return Ok(BigReal::one(bits));
    }
    Ok(determinant(full_hankel(moments, n)?))
}

/// (A_n, B_n): Hankel determinants of μ_0, μ_2, … and of μ_2, μ_4, ….
pub fn parity_dets(moments: &MomentTable, n: usize) -> Result<(BigReal, BigReal)> {
    let bits = moments.even(0).precision_bits();
    if n == 0 {
        return Ok((BigReal::one(bits), BigReal::one(bits)));
    }
    let even = moments.even_moments();
    let a = determinant(parity_matrix(even, n, 0)?);
    let b = determinant(parity_matrix(even, n, 1)?);
    Ok((a, b))
}

/// β_n from the parity form
/// β_{2k} = A_{k+1}B_{k−1}/(A_k B_k), β_{2k+1} = A_k B_{k+1}/(A_{k+1} B_k).
///
/// With `verify` set the full form Δ_{n+1}Δ_{n−1}/Δ_n² is also evaluated and
/// a disagreement beyond 2^{−bits/2} is reported as precision exhaustion.
pub fn beta_from_hankel(moments: &MomentTable, n: usize, verify: bool) -> Result<BigReal> {
    if n == 0 {
        return Err(FreudError::Parameter("beta index must be positive".into()));
    }
    let minors = ParityMinors::compute(moments.even_moments(), n / 2 + 1, n.div_ceil(2))?;
    let beta = minors.beta(n)?;
    let bits = moments.params().precision_bits();
    if !beta.is_positive() {
        return Err(FreudError::NonPositive { n, bits });
    }
    if verify {
        let d = leading_minors(full_hankel(moments, n + 1)?)?;
        let full = &d[n + 1] * &d[n - 1] / d[n].square();
        let tol = BigReal::pow2(-((bits / 2) as i32), bits);
        if ((&full - &beta) / &beta).abs() > tol {
            return Err(FreudError::PrecisionExhausted {
                retries: 0,
                message: format!("parity and full determinant forms of beta_{n} disagree"),
            });
        }
    }
    Ok(beta)
}

/// All leading parity minors A_0 … A_a and B_0 … B_b of an even-moment list.
#[derive(Clone, Debug)]
pub struct ParityMinors {
    pub a: Vec<BigReal>,
    pub b: Vec<BigReal>,
}

impl ParityMinors {
    /// `even` holds μ_0, μ_2, …; no sign assumption is made on the entries.
    pub fn compute(even: &[BigReal], a_size: usize, b_size: usize) -> Result<Self> {
        let (a, b) = rayon::join(
            || parity_matrix(even, a_size, 0).and_then(leading_minors),
            || parity_matrix(even, b_size, 1).and_then(leading_minors),
        );
        Ok(ParityMinors { a: a?, b: b? })
    }

    /// β_n from the stored minors.
    pub fn beta(&self, n: usize) -> Result<BigReal> {
        let k = n / 2;
        let get = |v: &[BigReal], i: usize| {
            v.get(i).cloned().ok_or(FreudError::InsufficientMoments {
                needed: 2 * n,
                available: 0,
            })
        };
        if n % 2 == 0 {
            let a1 = get(&self.a, k + 1)?;
            let b0 = get(&self.b, k - 1)?;
            Ok(a1 * b0 / (get(&self.a, k)? * get(&self.b, k)?))
        } else {
            let a0 = get(&self.a, k)?;
            let b1 = get(&self.b, k + 1)?;
            Ok(a0 * b1 / (get(&self.a, k + 1)? * get(&self.b, k)?))
        }
    }
}

/// β_1 … β_count from an even-moment list with no positivity requirement.
/// Serves analytically continued moments, where β_n may be negative.
pub(crate) fn betas_from_even_moments(even: &[BigReal], count: usize) -> Result<Vec<BigReal>> {
    let minors = ParityMinors::compute(even, count / 2 + 1, count.div_ceil(2))?;
    (1..=count).map(|n| minors.beta(n)).collect()
}

/// Residual of β_{2n} = d/dt ln(B_n/A_n) and β_{2n+1} = d/dt ln(A_{n+1}/B_n)
/// with central differences of step h; returns the larger of the two.
pub fn beta_tderivative_check(params: &WeightParams, n: usize, h: f64) -> Result<BigReal> {
    let h = scalar::exact_from_f64(h)?;
    if h <= 0 {
        return Err(FreudError::Parameter("difference step must be positive".into()));
    }
    let bits = params.working_bits();
    let logs = |t: Rational| -> Result<(BigReal, BigReal)> {
        let p = params.with_t(t);
        let moments = MomentTable::compute(&p, 2 * n + 2)?;
        let m = ParityMinors::compute(moments.even_moments(), n + 2, n + 1)?;
        let even = (&m.b[n] / &m.a[n]).ln();
        let odd = (&m.a[n + 1] / &m.b[n]).ln();
        Ok((even, odd))
    };
    let t = params.t_exact().clone();
    let (plus, minus) = rayon::join(
        || logs(Rational::from(&t + &h)),
        || logs(Rational::from(&t - &h)),
    );
    let ((ep, op), (em, om)) = (plus?, minus?);
    let two_h = BigReal::from_rational(&h, bits) * 2i64;

    let moments = MomentTable::compute(params, 2 * n + 2)?;
    let m = ParityMinors::compute(moments.even_moments(), n + 2, n + 1)?;
    let beta_even = if n == 0 { BigReal::zero(bits) } else { m.beta(2 * n)? };
    let beta_odd = m.beta(2 * n + 1)?;
    let r_even = ((ep - em) / &two_h - beta_even).abs();
    let r_odd = ((op - om) / &two_h - beta_odd).abs();
    Ok(if r_even > r_odd { r_even } else { r_odd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::gamma;

    fn params(m: u32, t: f64, lambda: f64, bits: u32) -> WeightParams {
        WeightParams::new(m, t, lambda, bits).unwrap()
    }

    fn rel(a: &BigReal, b: &BigReal) -> f64 {
        ((a - b) / b).abs().to_f64()
    }

    #[test]
    fn small_determinants() {
        let p = params(2, 0.3, 0.2, 256);
        let mt = MomentTable::compute(&p, 6).unwrap();
        assert_eq!(hankel_det(&mt, 0).unwrap(), 1.0);
        assert!(rel(&hankel_det(&mt, 1).unwrap(), mt.even(0)) < 1e-70);
        let d2 = mt.even(0) * mt.even(1);
        assert!(rel(&hankel_det(&mt, 2).unwrap(), &d2) < 1e-70);

        let (a1, b1) = parity_dets(&mt, 1).unwrap();
        assert_eq!(&a1, mt.even(0));
        assert_eq!(&b1, mt.even(1));
        let (a2, b2) = parity_dets(&mt, 2).unwrap();
        assert!(rel(&a2, &(mt.even(0) * mt.even(2) - mt.even(1).square())) < 1e-60);
        assert!(rel(&b2, &(mt.even(1) * mt.even(3) - mt.even(2).square())) < 1e-60);
    }

    #[test]
    fn parity_factorisation() {
        let p = params(2, 0.0, -0.5, 512);
        let mt = MomentTable::compute(&p, 13).unwrap();
        for n in 1..=6 {
            let (a, b) = parity_dets(&mt, n).unwrap();
            let (a1, _) = parity_dets(&mt, n + 1).unwrap();
            assert!(rel(&hankel_det(&mt, 2 * n).unwrap(), &(&a * &b)) < 1e-60, "even n={n}");
            assert!(rel(&hankel_det(&mt, 2 * n + 1).unwrap(), &(a1 * &b)) < 1e-60, "odd n={n}");
        }
    }

    #[test]
    fn leading_minors_match_determinants() {
        let p = params(3, 1.0, 0.5, 256);
        let mt = MomentTable::compute(&p, 8).unwrap();
        let minors = leading_minors(full_hankel(&mt, 8).unwrap()).unwrap();
        for n in 0..=8 {
            assert!(rel(&minors[n], &hankel_det(&mt, n).unwrap()) < 1e-50);
        }
    }

    #[test]
    fn first_beta() {
        let p = params(2, 0.0, -0.5, 256);
        let mt = MomentTable::compute(&p, 2).unwrap();
        let b1 = beta_from_hankel(&mt, 1, true).unwrap();
        let quarter = BigReal::from_decimal_f64(0.25, 288);
        let expected = gamma(&(quarter.clone() * 3i64)).unwrap() / gamma(&quarter).unwrap();
        assert!(rel(&b1, &expected) < 1e-70);
        assert!((b1.to_f64() - 0.3379891).abs() < 1e-6);
    }

    #[test]
    fn parity_and_full_forms_agree() {
        let p = params(3, 0.7, 0.3, 512);
        let mt = MomentTable::compute(&p, 13).unwrap();
        for n in 1..=12 {
            let parity = beta_from_hankel(&mt, n, false).unwrap();
            let d = leading_minors(full_hankel(&mt, n + 1).unwrap()).unwrap();
            let full = &d[n + 1] * &d[n - 1] / d[n].square();
            assert!(rel(&parity, &full) < 1e-30, "n={n}");
        }
    }

    #[test]
    fn table_norms_are_determinant_ratios() {
        let p = params(2, -1.0, 0.5, 256);
        let table = RecurrenceTable::from_hankel(&p, 10).unwrap();
        assert_eq!(table.method(), Method::Hankel);
        assert_eq!(table.len(), 10);
        assert_eq!(table.beta(0).unwrap(), &0.0);
        let mt = MomentTable::compute(&table.params().clone(), 11).unwrap();
        for n in 0..=10 {
            let ratio = hankel_det(&mt, n + 1).unwrap() / hankel_det(&mt, n).unwrap();
            assert!(rel(&table.norms()[n], &ratio) < 1e-50, "n={n}");
        }
        assert!(matches!(table.beta(11), Err(FreudError::InsufficientBetas { .. })));
    }

    #[test]
    fn adaptive_start_precision() {
        let p = params(2, 0.0, 0.0, 64);
        let table = RecurrenceTable::from_hankel(&p, 30).unwrap();
        assert!(table.precision_bits() >= 720);
    }

    #[test]
    fn tderivative_identity() {
        let p = params(2, 0.5, 0.0, 256);
        assert!(beta_tderivative_check(&p, 0, 1e-7).unwrap().to_f64() < 1e-12);
        let r1 = beta_tderivative_check(&p, 1, 1e-4).unwrap().to_f64();
        let r2 = beta_tderivative_check(&p, 1, 5e-5).unwrap().to_f64();
        assert!(beta_tderivative_check(&p, 1, 1e-7).unwrap().to_f64() < 1e-12);
        let ratio = r2 / r1;
        assert!((0.2..0.3).contains(&ratio), "ratio {ratio}");
    }
}
