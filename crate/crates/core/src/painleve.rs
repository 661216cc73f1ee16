//! The discrete Painlevé-I hierarchy satisfied by the recurrence coefficients:
//! the V^{(2m)} coefficients, the string equation
//! 2m V_n^{(2m)} − 2t β_n = n + (λ+½)(1 − (−1)^n), forward generation of β_n
//! from it, the Volterra lattice in t, and the large-n limit of β_n.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::{Integer, Rational};

use crate::error::{FreudError, Result};
use crate::hankel::{Method, RecurrenceTable};
use crate::moments::WeightParams;
use crate::scalar::{self, BigReal};

/// Ratio to the asymptotic envelope beyond which forward generation stops.
pub const ENVELOPE_LIMIT: f64 = 1e5;

/// Read access to β_k with the boundary convention β_k = 0 for k ≤ 0.
#[derive(Clone, Copy)]
pub struct Lattice<'a> {
    coeffs: &'a [BigReal],
    bits: u32,
}

impl<'a> Lattice<'a> {
    /// `coeffs[k]` is β_k; index 0 is ignored and read as 0.
    pub fn new(coeffs: &'a [BigReal]) -> Self {
        let bits = coeffs
            .iter()
            .map(BigReal::precision_bits)
            .max()
            .unwrap_or(scalar::DEFAULT_PRECISION);
        Lattice { coeffs, bits }
    }

    pub fn from_table(table: &'a RecurrenceTable) -> Self {
        Lattice::new(table.coeffs())
    }

    /// Index of the last available coefficient.
    pub fn top(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn beta(&self, k: isize) -> Result<BigReal> {
        if k <= 0 {
            return Ok(BigReal::zero(self.bits));
        }
        self.coeffs
            .get(k as usize)
            .cloned()
            .ok_or(FreudError::InsufficientBetas {
                needed: k as usize,
                available: self.top(),
            })
    }
}

/// Coefficients of x^{2·power} P_n in the P-basis, from repeated use of
/// x² P_k = P_{k+2} + (β_k + β_{k+1}) P_k + β_{k−1} β_k P_{k−2}.
///
/// With `target` set, terms that can no longer reach P_target are dropped.
pub fn expand_x2m(
    lattice: &Lattice<'_>,
    n: usize,
    power: usize,
    target: Option<usize>,
) -> Result<BTreeMap<usize, BigReal>> {
    let mut current = BTreeMap::new();
    current.insert(n, BigReal::one(lattice.bits()));
    for step in 0..power {
        let remaining = power - step - 1;
        let keep = |k: usize| match target {
            Some(tg) => k.abs_diff(tg) <= 2 * remaining,
            None => true,
        };
        let mut next: BTreeMap<usize, BigReal> = BTreeMap::new();
        let mut add = |k: usize, v: BigReal| {
            if keep(k) {
                *next.entry(k).or_insert_with(|| BigReal::zero(v.precision_bits())) += v;
            }
        };
        for (&k, c) in &current {
            let ki = k as isize;
            add(k + 2, c.clone());
            if keep(k) {
                add(k, c * (lattice.beta(ki)? + lattice.beta(ki + 1)?));
            }
            if k >= 2 && keep(k - 2) {
                add(k - 2, c * lattice.beta(ki - 1)? * lattice.beta(ki)?);
            }
        }
        current = next;
    }
    Ok(current)
}

/// C^{(2·power)}_{n,k}: the coefficient of P_k in x^{2·power} P_n.
pub fn c_coeff(lattice: &Lattice<'_>, n: usize, k: usize, power: usize) -> Result<BigReal> {
    let map = expand_x2m(lattice, n, power, Some(k))?;
    Ok(map.get(&k).cloned().unwrap_or_else(|| BigReal::zero(lattice.bits())))
}

/// V_n^{(2m)} = β_n (β_{n−1} C^{(2m−2)}_{n−2,n} + C^{(2m−2)}_{n,n}), the
/// generic route through the x² expansion. V_n = 0 for n ≤ 0.
pub fn v_generic(lattice: &Lattice<'_>, m: usize, n: isize) -> Result<BigReal> {
    if n <= 0 {
        return Ok(BigReal::zero(lattice.bits()));
    }
    let nu = n as usize;
    let diag = c_coeff(lattice, nu, nu, m - 1)?;
    let inner = if nu >= 2 {
        lattice.beta(n - 1)? * c_coeff(lattice, nu - 2, nu, m - 1)? + diag
    } else {
        diag
    };
    Ok(lattice.beta(n)? * inner)
}

/// V_n^{(2m)} from the closed forms for m = 1 … 5.
pub fn v_closed(lattice: &Lattice<'_>, m: usize, n: isize) -> Result<BigReal> {
    if n <= 0 {
        return Ok(BigReal::zero(lattice.bits()));
    }
    let v = |order: usize, k: isize| v_closed(lattice, order, k);
    let b = |k: isize| lattice.beta(k);
    match m {
        1 => b(n),
        2 => Ok(b(n)? * (b(n + 1)? + b(n)? + b(n - 1)?)),
        3 => Ok(b(n)? * (v(2, n + 1)? + v(2, n)? + v(2, n - 1)? + b(n + 1)? * b(n - 1)?)),
        4 => {
            let triple = b(n + 1)? * b(n)? * b(n - 1)?;
            Ok(b(n)? * (v(3, n + 1)? + v(3, n)? + v(3, n - 1)?)
                + v(2, n)? * b(n + 1)? * b(n - 1)?
                + triple * (b(n + 2)? + b(n - 2)?))
        }
        5 => {
            let triple = b(n + 1)? * b(n)? * b(n - 1)?;
            let tail = (b(n)? + b(n - 1)?) * b(n + 2)?
                + (b(n + 1)? + b(n)?) * b(n - 2)?
                + b(n + 2)? * b(n - 2)?;
            Ok(b(n)? * (v(4, n + 1)? + v(4, n)? + v(4, n - 1)?)
                + v(3, n)? * b(n + 1)? * b(n - 1)?
                + &triple * (v(2, n + 2)? + v(2, n - 2)?)
                + triple * tail)
        }
        _ => Err(FreudError::Parameter(format!(
            "closed forms cover m = 1 to 5, got {m}"
        ))),
    }
}

/// V_n^{(2m)} for n = 1 … n_max.
#[derive(Clone, Debug)]
pub struct VTable {
    pub order: usize,
    pub values: Vec<BigReal>,
}

impl VTable {
    /// V_n for 1 ≤ n ≤ n_max.
    pub fn get(&self, n: usize) -> Option<&BigReal> {
        n.checked_sub(1).and_then(|i| self.values.get(i))
    }
}

/// V_n^{(2m)} for n = 1 … n_max via the generic recursion.
pub fn v_table(table: &RecurrenceTable, m: usize, n_max: usize) -> Result<VTable> {
    if m == 0 {
        return Err(FreudError::Parameter("m must be positive".into()));
    }
    let needed = n_max + m - 1;
    if needed > table.len() {
        return Err(FreudError::range(
            "painleve",
            format!(
                "V^({}) up to n = {n_max} needs beta_{needed}, table holds {}",
                2 * m,
                table.len()
            ),
        ));
    }
    let lattice = Lattice::from_table(table);
    let values = (1..=n_max as isize)
        .into_par_iter()
        .map(|n| v_generic(&lattice, m, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(VTable { order: 2 * m, values })
}

/// n + (λ + ½)(1 − (−1)^n).
pub fn string_rhs(params: &WeightParams, n: usize) -> BigReal {
    let bits = params.working_bits();
    let base = BigReal::from_u64(n as u64, bits);
    if n % 2 == 1 {
        base + (params.lambda() + 0.5) * 2i64
    } else {
        base
    }
}

fn signed_string_residual(lattice: &Lattice<'_>, params: &WeightParams, m: usize, n: usize) -> Result<BigReal> {
    let v = v_generic(lattice, m, n as isize)?;
    Ok(v * (2 * m) as i64 - params.t() * lattice.beta(n as isize)? * 2i64 - string_rhs(params, n))
}

/// |2m V_n^{(2m)} − 2t β_n − n − (λ+½)(1 − (−1)^n)|.
pub fn string_residual(table: &RecurrenceTable, n: usize) -> Result<BigReal> {
    let m = table.params().m() as usize;
    check_window(table, m, n)?;
    Ok(signed_string_residual(&Lattice::from_table(table), table.params(), m, n)?.abs())
}

/// The same residual from the explicit m = 2 and m = 3 forms.
pub fn string_residual_printed(table: &RecurrenceTable, n: usize) -> Result<BigReal> {
    let params = table.params();
    let m = params.m() as usize;
    check_window(table, m, n)?;
    let l = Lattice::from_table(table);
    let n_i = n as isize;
    let b = |k: isize| l.beta(n_i + k);
    let lhs = match m {
        2 => b(0)? * (b(-1)? + b(0)? + b(1)?) * 4i64,
        3 => {
            let inner = b(-2)? * b(-1)?
                + b(-1)?.square()
                + b(-1)? * b(0)? * 2i64
                + b(-1)? * b(1)?
                + b(0)?.square()
                + b(0)? * b(1)? * 2i64
                + b(1)?.square()
                + b(1)? * b(2)?;
            b(0)? * inner * 6i64
        }
        _ => {
            return Err(FreudError::Parameter(format!(
                "explicit string equations exist for m = 2 and 3, got {m}"
            )))
        }
    };
    Ok((lhs - params.t() * b(0)? * 2i64 - string_rhs(params, n)).abs())
}

fn check_window(table: &RecurrenceTable, m: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(FreudError::Parameter("string equation index must be positive".into()));
    }
    if n + m - 1 > table.len() {
        return Err(FreudError::range(
            "painleve",
            format!("string equation at n = {n} needs beta_{}, table holds {}", n + m - 1, table.len()),
        ));
    }
    Ok(())
}

/// β_1 … β_{n_max} generated from seeds by solving the string equation at n
/// for its highest-index coefficient β_{n+m−1}, which enters affinely.
///
/// At least m − 1 seeds are required. Generation is exponentially unstable
/// off the true orbit; it stops early, flagging the table as truncated, when a
/// generated value is non-positive or departs from the asymptotic envelope by
/// more than a factor of 10⁵.
pub fn beta_forward(params: &WeightParams, seeds: &[BigReal], n_max: usize) -> Result<RecurrenceTable> {
    let m = params.m() as usize;
    if seeds.len() < m - 1 {
        return Err(FreudError::Seed(format!(
            "m = {m} needs at least {} seeds, got {}",
            m - 1,
            seeds.len()
        )));
    }
    if let Some(i) = seeds.iter().position(|s| !s.is_positive()) {
        return Err(FreudError::Seed(format!("seed beta_{} is not positive", i + 1)));
    }
    let bits = params.working_bits();
    let mut coeffs = vec![BigReal::zero(bits)];
    coeffs.extend(seeds.iter().take(n_max).map(|s| s.with_precision(bits)));

    let limit = freud_limit(m as u32, bits);
    let mut truncated = false;
    while coeffs.len() <= n_max {
        let top = coeffs.len();
        let n = top + 1 - m;
        let residual_at = |value: BigReal| -> Result<BigReal> {
            let mut trial = coeffs.clone();
            trial.push(value);
            signed_string_residual(&Lattice::new(&trial), params, m, n)
        };
        let r0 = residual_at(BigReal::zero(bits))?;
        let r1 = residual_at(BigReal::one(bits))?;
        let slope = &r1 - &r0;
        if slope.is_zero() {
            truncated = true;
            break;
        }
        let next = -r0 / slope;
        let envelope = &limit * BigReal::from_u64(top as u64, bits).powf(&BigReal::ratio(1, m as i64, bits));
        let departure = ((&next - &envelope) / &envelope).abs();
        if !next.is_positive() || departure > ENVELOPE_LIMIT {
            truncated = true;
            break;
        }
        coeffs.push(next);
    }

    let mu0 = crate::moments::mu0(params)?;
    let out_bits = params.precision_bits();
    let betas = coeffs[1..].iter().map(|b| b.with_precision(out_bits)).collect();
    Ok(RecurrenceTable::new(params.clone(), betas, mu0, Method::Painleve)?.mark_truncated(truncated))
}

/// |dβ_n/dt − β_n(β_{n+1} − β_{n−1})| with a central difference of step h,
/// using Hankel coefficients rebuilt at t − h, t, t + h.
pub fn volterra_residual(params: &WeightParams, n: usize, h: f64) -> Result<BigReal> {
    if n == 0 {
        return Err(FreudError::Parameter("Volterra index must be positive".into()));
    }
    let h = scalar::exact_from_f64(h)?;
    if h <= 0 {
        return Err(FreudError::Parameter("difference step must be positive".into()));
    }
    let t = params.t_exact().clone();
    let points = [Rational::from(&t - &h), t.clone(), Rational::from(&t + &h)];
    let tables = points
        .par_iter()
        .map(|tp| RecurrenceTable::from_hankel(&params.with_t(tp.clone()), n + 1))
        .collect::<Result<Vec<_>>>()?;
    let bits = tables.iter().map(|t| t.precision_bits()).max().unwrap_or(params.precision_bits());
    let two_h = BigReal::from_rational(&h, bits) * 2i64;
    let derivative = (tables[2].beta(n)? - tables[0].beta(n)?) / two_h;
    let mid = &tables[1];
    let rhs = mid.beta(n)? * (mid.beta(n + 1)? - mid.beta(n - 1)?);
    Ok((derivative - rhs).abs())
}

/// (1/2)_m as an exact rational.
pub fn half_pochhammer(m: u32) -> Rational {
    (0..m).fold(Rational::from(1), |acc, k| acc * Rational::from((2 * k as i64 + 1, 2)))
}

/// lim β_n / n^{1/m} = (1/4)((m−1)!/(1/2)_m)^{1/m}.
pub fn freud_limit(m: u32, bits: u32) -> BigReal {
    let ratio = Rational::from(Integer::factorial(m - 1)) / half_pochhammer(m);
    let base = BigReal::from_rational(&ratio, bits + scalar::GUARD_BITS);
    let root = base.powf(&BigReal::ratio(1, m as i64, bits + scalar::GUARD_BITS));
    (root / 4i64).with_precision(bits)
}

/// The scaling radius a_n, with a_n² = ((m−1)! n/(1/2)_m)^{1/m}.
pub fn mrs_number(m: u32, n: u64, bits: u32) -> BigReal {
    let ratio = Rational::from(Integer::factorial(m - 1)) * n / half_pochhammer(m);
    let wp = bits + scalar::GUARD_BITS;
    let a2 = BigReal::from_rational(&ratio, wp).powf(&BigReal::ratio(1, m as i64, wp));
    a2.sqrt().with_precision(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hankel(m: u32, t: f64, lambda: f64, bits: u32, count: usize) -> RecurrenceTable {
        RecurrenceTable::from_hankel(&WeightParams::new(m, t, lambda, bits).unwrap(), count).unwrap()
    }

    #[test]
    fn low_order_v_values() {
        let t = hankel(2, 0.3, 0.1, 256, 6);
        let l = Lattice::from_table(&t);
        for n in 1..=4 {
            assert_eq!(v_generic(&l, 1, n).unwrap(), l.beta(n).unwrap());
        }
        let b1 = l.beta(1).unwrap();
        let b2 = l.beta(2).unwrap();
        let v1 = v_generic(&l, 2, 1).unwrap();
        assert!(((v1 - &b1 * (&b2 + &b1)) / &b1).abs().to_f64() < 1e-70);
    }

    #[test]
    fn generic_recursion_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let coeffs: Vec<BigReal> = (0..16)
                .map(|_| BigReal::from_f64(rng.gen_range(0.1..3.0), 256))
                .collect();
            let l = Lattice::new(&coeffs);
            for m in 1..=5 {
                for n in 1..=10 {
                    let g = v_generic(&l, m, n).unwrap();
                    let c = v_closed(&l, m, n).unwrap();
                    assert!(((&g - &c) / &c).abs().to_f64() < 1e-70, "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn string_equation_on_hankel_betas() {
        for (m, t, lambda) in [(2, 0.0, 0.5), (3, 1.5, -0.5), (4, -1.0, 2.0)] {
            let table = hankel(m, t, lambda, 256, 14);
            for n in 1..=10 {
                let r = string_residual(&table, n).unwrap();
                assert!(r.to_f64() < 1e-30, "m={m} n={n} r={r}");
            }
        }
    }

    #[test]
    fn printed_forms_agree_with_generic() {
        for m in [2, 3] {
            let table = hankel(m, 1.0, 0.5, 320, 12);
            for n in 1..=8 {
                let a = string_residual(&table, n).unwrap();
                let b = string_residual_printed(&table, n).unwrap();
                assert!(a.to_f64() < 1e-40 && b.to_f64() < 1e-40);
            }
        }
    }

    #[test]
    fn first_string_equation_reduces_to_moment_ratio() {
        let table = hankel(2, 0.0, 0.5, 256, 3);
        let b1 = table.beta(1).unwrap();
        let b2 = table.beta(2).unwrap();
        let lhs = b1 * (b1 + b2) * 4i64;
        assert!((lhs.to_f64() - 3.0).abs() < 1e-30);
    }

    #[test]
    fn window_errors() {
        let table = hankel(3, 0.0, 0.0, 256, 5);
        assert!(matches!(string_residual(&table, 5), Err(FreudError::Range { .. })));
        assert!(matches!(v_table(&table, 3, 5), Err(FreudError::Range { .. })));
        assert_eq!(v_table(&table, 3, 3).unwrap().values.len(), 3);
    }

    #[test]
    fn forward_generation_tracks_hankel() {
        let p = WeightParams::new(2, 0.0, -0.5, 512).unwrap();
        let reference = RecurrenceTable::from_hankel(&p, 20).unwrap();
        let seed = reference.beta(1).unwrap().clone();
        let fwd = beta_forward(&p, &[seed], 20).unwrap();
        assert!(!fwd.is_truncated());
        assert_eq!(fwd.method(), Method::Painleve);
        for n in 1..=20 {
            let a = fwd.beta(n).unwrap();
            let b = reference.beta(n).unwrap();
            assert!(((a - b) / b).abs().to_f64() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn forward_generation_rejects_bad_seeds() {
        let p = WeightParams::new(3, 0.0, 0.0, 256).unwrap();
        let one = BigReal::one(256);
        assert!(matches!(beta_forward(&p, &[one.clone()], 10), Err(FreudError::Seed(_))));
        assert!(matches!(
            beta_forward(&p, &[one.clone(), -one], 10),
            Err(FreudError::Seed(_))
        ));
    }

    #[test]
    fn forward_generation_flags_instability() {
        let p = WeightParams::new(2, 0.0, -0.5, 128).unwrap();
        let fwd = beta_forward(&p, &[BigReal::from_f64(0.5, 128)], 200).unwrap();
        assert!(fwd.is_truncated());
        assert!(fwd.len() < 200);
    }

    #[test]
    fn volterra_second_order() {
        let p = WeightParams::new(2, 0.3, 0.0, 320).unwrap();
        assert!(volterra_residual(&p, 3, 1e-6).unwrap().to_f64() < 1e-10);
        let r1 = volterra_residual(&p, 1, 1e-3).unwrap().to_f64();
        let r2 = volterra_residual(&p, 1, 5e-4).unwrap().to_f64();
        assert!((0.2..0.3).contains(&(r2 / r1)));
    }

    #[test]
    fn limits_and_scaling_radius() {
        assert!((freud_limit(2, 128).to_f64() - 1.0 / 12f64.sqrt()).abs() < 1e-15);
        assert!((freud_limit(3, 128).to_f64() - 60f64.powf(-1.0 / 3.0)).abs() < 1e-15);
        let m4 = 0.25 * (32.0f64 / 35.0).powf(0.25);
        assert!((freud_limit(4, 128).to_f64() - m4).abs() < 1e-15);
        assert!((mrs_number(2, 1, 128).square().to_f64() - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((mrs_number(3, 1, 128).square().to_f64() - (16.0f64 / 15.0).cbrt()).abs() < 1e-15);
        for m in 2..=5u32 {
            let n = 37u64;
            let a2 = mrs_number(m, n, 256).square();
            let scaled = a2 / 4i64 / BigReal::from_u64(n, 256).powf(&BigReal::ratio(1, m as i64, 256));
            assert!(((scaled - freud_limit(m, 256)).abs()).to_f64() < 1e-60);
        }
    }
}
