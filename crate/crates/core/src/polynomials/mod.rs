//! Monic orthogonal polynomials built from a recurrence table, their basis
//! expansions, and the identities they satisfy.

pub mod decomposition;
pub mod dense;
pub mod ladder;
pub mod mixed;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{FreudError, Result};
use crate::hankel::RecurrenceTable;
use crate::moments::WeightParams;
use crate::painleve::{expand_x2m, Lattice};
use crate::scalar::BigReal;

pub use decomposition::{quadratic_decompose, HalfLinePolynomial, QuadraticDecomposition};
pub use dense::{wronskian, Poly};
pub use ladder::{D0Convention, LadderPair, LadderResolution, LadderSystem};
pub use mixed::{mixed_recurrence_check, quasi_orthogonality_check, MixedReport, QuasiReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// P_n with ascending coefficients. Coefficients of the wrong parity are
/// exact zeros and the leading coefficient is exactly 1.
#[derive(Clone, Debug)]
pub struct MonicPolynomial {
    degree: usize,
    coeffs: Vec<BigReal>,
    parity: Parity,
    context: WeightParams,
}

impl MonicPolynomial {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[BigReal] {
        &self.coeffs
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn context(&self) -> &WeightParams {
        &self.context
    }

    /// Horner evaluation on the stored coefficients.
    pub fn eval(&self, x: &BigReal) -> BigReal {
        self.as_poly().eval(x)
    }

    pub fn as_poly(&self) -> Poly {
        Poly::from_coeffs(self.coeffs.clone(), self.context.working_bits())
    }
}

/// P_0 … P_N from P_{n+1} = x P_n − β_n P_{n−1}.
pub fn generate(table: &RecurrenceTable, count: usize) -> Result<Vec<MonicPolynomial>> {
    table.require(count.saturating_sub(1))?;
    let params = table.params();
    Ok(wrap(monic_coeffs(table.coeffs(), count, params.working_bits()), params))
}

/// Coefficient vectors of P_0 … P_N; `coeffs` holds β_0, β_1, … and no sign
/// is assumed on the entries.
pub(crate) fn monic_coeffs(coeffs: &[BigReal], count: usize, bits: u32) -> Vec<Vec<BigReal>> {
    let zero = BigReal::zero(bits);
    let mut out: Vec<Vec<BigReal>> = Vec::with_capacity(count + 1);
    out.push(vec![BigReal::one(bits)]);
    if count >= 1 {
        out.push(vec![zero.clone(), BigReal::one(bits)]);
    }
    for n in 1..count {
        let beta = &coeffs[n];
        let mut next = vec![zero.clone(); n + 2];
        next[n + 1] = BigReal::one(bits);
        // Only powers with the parity of n + 1 are touched.
        for k in ((n + 1) % 2..=n.saturating_sub(1)).step_by(2) {
            let shifted = if k >= 1 { out[n][k - 1].clone() } else { zero.clone() };
            next[k] = shifted - beta * &out[n - 1][k];
        }
        out.push(next);
    }
    out
}

pub(crate) fn wrap(coeffs: Vec<Vec<BigReal>>, params: &WeightParams) -> Vec<MonicPolynomial> {
    coeffs
        .into_iter()
        .enumerate()
        .map(|(n, coeffs)| MonicPolynomial {
            degree: n,
            coeffs,
            parity: Parity::of(n),
            context: params.clone(),
        })
        .collect()
}

/// P_n(x) by running the recurrence at x.
pub fn eval(table: &RecurrenceTable, n: usize, x: &BigReal) -> Result<BigReal> {
    Ok(eval_with_derivatives(table, n, x)?.0)
}

/// (P_n(x), P_n'(x), P_n''(x)) by the recurrence and its derivatives.
pub fn eval_with_derivatives(table: &RecurrenceTable, n: usize, x: &BigReal) -> Result<(BigReal, BigReal, BigReal)> {
    table.require(n.saturating_sub(1))?;
    let bits = table.params().working_bits().max(x.precision_bits());
    let x = x.with_precision(bits);
    let zero = BigReal::zero(bits);
    let (mut p0, mut p1) = (zero.clone(), BigReal::one(bits));
    let (mut d0, mut d1) = (zero.clone(), zero.clone());
    let (mut s0, mut s1) = (zero.clone(), zero);
    for k in 0..n {
        let beta = table.beta(k)?;
        let p2 = &x * &p1 - beta * &p0;
        let d2 = &p1 + &x * &d1 - beta * &d0;
        let s2 = &d1 * 2i64 + &x * &s1 - beta * &s0;
        (p0, p1) = (p1, p2);
        (d0, d1) = (d1, d2);
        (s0, s1) = (s1, s2);
    }
    Ok((p1, d1, s1))
}

/// C^{(2m)}_{n,n+2ℓ}: coefficients of x^{2m} P_n in the P-basis.
#[derive(Clone, Debug)]
pub struct X2mExpansion {
    pub n: usize,
    pub power: usize,
    /// Map from basis index k to the coefficient of P_k.
    pub coeffs: BTreeMap<usize, BigReal>,
}

impl X2mExpansion {
    /// C_{n,n+2ℓ} for ℓ in −power … power; zero when the index is negative.
    pub fn get(&self, ell: isize) -> BigReal {
        let k = self.n as isize + 2 * ell;
        if k < 0 {
            return BigReal::zero(self.coeffs.values().next().map_or(64, BigReal::precision_bits));
        }
        self.coeffs
            .get(&(k as usize))
            .cloned()
            .unwrap_or_else(|| BigReal::zero(self.coeffs.values().next().map_or(64, BigReal::precision_bits)))
    }
}

/// Expansion of x^{2·power} P_n by repeated use of the x² recurrence.
pub fn x2m_expansion(table: &RecurrenceTable, n: usize, power: usize) -> Result<X2mExpansion> {
    if n + 2 * power > table.len() + 1 {
        return Err(FreudError::range(
            "polynomials",
            format!(
                "x^{} P_{n} needs beta up to {}, table holds {}",
                2 * power,
                n + 2 * power - 1,
                table.len()
            ),
        ));
    }
    let coeffs = expand_x2m(&Lattice::from_table(table), n, power, None)?;
    Ok(X2mExpansion { n, power, coeffs })
}

/// ρ_{n,2ℓ} for ℓ = 0 … m in x P_n' = Σ ρ_{n,2ℓ} P_{n−2ℓ}.
#[derive(Clone, Debug)]
pub struct StructureCoeffs {
    pub n: usize,
    /// ρ_{n,0}, ρ_{n,2}, …, ρ_{n,2m}.
    pub rho: Vec<BigReal>,
    /// Largest |ρ_{n,j}| over the coefficients that must vanish (j odd or
    /// j > 2m), relative to the largest ρ.
    pub tail_max: BigReal,
}

impl StructureCoeffs {
    pub fn get(&self, ell: usize) -> BigReal {
        self.rho
            .get(ell)
            .cloned()
            .unwrap_or_else(|| BigReal::zero(self.rho[0].precision_bits()))
    }
}

/// Expands x P_n' in the P-basis by synthetic division against P_n, P_{n−1}, ….
pub fn structure_coeffs(table: &RecurrenceTable, n: usize) -> Result<StructureCoeffs> {
    let m = table.params().m() as usize;
    let basis = generate(table, n)?;
    let bits = table.params().working_bits();
    let target = &basis[n];
    let mut rem: Vec<BigReal> = target
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c * k as i64)
        .collect();
    let mut all = vec![BigReal::zero(bits); n + 1];
    for d in (0..=n).rev() {
        let c = rem[d].clone();
        if c.is_zero() {
            continue;
        }
        for (k, b) in basis[d].coeffs().iter().enumerate() {
            rem[k] -= &c * b;
        }
        all[n - d] = c;
    }
    let rho: Vec<BigReal> = (0..=m)
        .map(|ell| all.get(2 * ell).cloned().unwrap_or_else(|| BigReal::zero(bits)))
        .collect();
    let scale = BigReal::max_abs(&rho, bits);
    let tail = BigReal::max_abs(
        all.iter()
            .enumerate()
            .filter(|(j, _)| j % 2 == 1 || *j > 2 * m)
            .map(|(_, v)| v),
        bits,
    );
    let tail_max = if scale.is_zero() { tail } else { tail / scale };
    Ok(StructureCoeffs { n, rho, tail_max })
}

/// Residuals of the four lines of the algebraic system satisfied by ρ at n:
/// ρ_{n,0} = n; ρ_{n+1,2} − ρ_{n,2} = 2β_n;
/// ρ_{n+1,2ℓ} − ρ_{n,2ℓ} = β_{n−2ℓ+2}ρ_{n,2ℓ−2} − β_n ρ_{n−1,2ℓ−2} (2 ≤ ℓ ≤ m−1);
/// β_{n−2m} ρ_{n,2m} = β_n ρ_{n−1,2m}. Each entry is the largest absolute
/// residual of that line.
pub fn structure_system_residuals(table: &RecurrenceTable, n: usize) -> Result<[BigReal; 4]> {
    if n == 0 {
        return Err(FreudError::Parameter("structure system index must be positive".into()));
    }
    let m = table.params().m() as usize;
    let l = Lattice::from_table(table);
    let prev = structure_coeffs(table, n - 1)?;
    let cur = structure_coeffs(table, n)?;
    let next = structure_coeffs(table, n + 1)?;
    let b = |k: isize| l.beta(k);
    let ni = n as isize;
    let bits = table.params().working_bits();

    let r0 = (cur.get(0) - BigReal::from_u64(n as u64, bits)).abs();
    let r1 = (next.get(1) - cur.get(1) - b(ni)? * 2i64).abs();
    let mut r2 = BigReal::zero(bits);
    for ell in 2..m {
        let lhs = next.get(ell) - cur.get(ell);
        let rhs = b(ni - 2 * ell as isize + 2)? * cur.get(ell - 1) - b(ni)? * prev.get(ell - 1);
        let r = (lhs - rhs).abs();
        if r > r2 {
            r2 = r;
        }
    }
    let r3 = (b(ni - 2 * m as isize)? * cur.get(m) - b(ni)? * prev.get(m)).abs();
    Ok([r0, r1, r2, r3])
}
