//! Quadratic decomposition P_{2n}(x) = B_n(x²), P_{2n+1}(x) = x R_n(x²).
//!
//! B_0 = 1, B_1 = y − β_1, B_{n+1} = (y − β_{2n} − β_{2n+1}) B_n − β_{2n−1} β_{2n} B_{n−1};
//! R_0 = 1, R_1 = y − β_1 − β_2, R_{n+1} = (y − β_{2n+2} − β_{2n+1}) R_n − β_{2n+1} β_{2n} R_{n−1}.
//! Both are orthogonal on (0, ∞), B against y^λ e^{ty − y^m} with norms h_{2n}
//! and R against y^{λ+1} e^{ty − y^m} with norms h_{2n+1}.

use serde::Serialize;

use super::{generate, Parity};
use crate::error::{FreudError, Result};
use crate::hankel::RecurrenceTable;
use crate::moments::WeightParams;
use crate::oracle::{weighted_integral, QuadratureSpec};
use crate::scalar::BigReal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    B,
    R,
}

/// A monic polynomial in the half-line variable y = x².
#[derive(Clone, Debug)]
pub struct HalfLinePolynomial {
    pub family: Family,
    pub degree: usize,
    /// Ascending powers of y.
    pub coeffs: Vec<BigReal>,
}

impl HalfLinePolynomial {
    pub fn eval(&self, y: &BigReal) -> BigReal {
        let mut acc = BigReal::zero(y.precision_bits());
        for c in self.coeffs.iter().rev() {
            acc = acc * y + c;
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct QuadraticDecomposition {
    pub b: Vec<HalfLinePolynomial>,
    pub r: Vec<HalfLinePolynomial>,
    table: RecurrenceTable,
}

/// Largest relative deviations of the half-line Gram matrices from diag(h).
#[derive(Clone, Debug, Serialize)]
pub struct HalfLineOrthogonality {
    /// max |⟨F_i, F_j⟩| / √(h_i h_j) over i ≠ j.
    pub off_diagonal: f64,
    /// max |⟨F_n, F_n⟩ − h| / h.
    pub norm_error: f64,
}

fn three_term(a: &[BigReal], b: &[BigReal], count: usize, family: Family, bits: u32) -> Vec<HalfLinePolynomial> {
    // F_{n+1} = (y − a_n) F_n − b_n F_{n−1}.
    let zero = BigReal::zero(bits);
    let mut out: Vec<Vec<BigReal>> = vec![vec![BigReal::one(bits)]];
    for n in 0..count {
        let mut next = vec![zero.clone(); n + 2];
        for (k, c) in out[n].iter().enumerate() {
            next[k + 1] += c;
            next[k] -= &a[n] * c;
        }
        if n >= 1 {
            for (k, c) in out[n - 1].iter().enumerate() {
                next[k] -= &b[n] * c;
            }
        }
        out.push(next);
    }
    out.into_iter()
        .enumerate()
        .map(|(degree, coeffs)| HalfLinePolynomial { family, degree, coeffs })
        .collect()
}

/// B_0 … B_N and R_0 … R_N; needs β_1 … β_{2N+1}.
pub fn quadratic_decompose(table: &RecurrenceTable, count: usize) -> Result<QuadraticDecomposition> {
    table.require(2 * count + 1)?;
    let bits = table.params().working_bits();
    let beta = |k: usize| table.coeffs()[k].with_precision(bits);
    let zero = BigReal::zero(bits);

    let (mut ab, mut bb, mut ar, mut br) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for n in 0..count {
        ab.push(beta(2 * n) + beta(2 * n + 1));
        bb.push(if n >= 1 { beta(2 * n - 1) * beta(2 * n) } else { zero.clone() });
        ar.push(beta(2 * n + 2) + beta(2 * n + 1));
        br.push(beta(2 * n + 1) * beta(2 * n));
    }
    Ok(QuadraticDecomposition {
        b: three_term(&ab, &bb, count, Family::B, bits),
        r: three_term(&ar, &br, count, Family::R, bits),
        table: table.clone(),
    })
}

impl QuadraticDecomposition {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Largest |coefficient| difference between B_n(x²), x R_n(x²) and P_{2n}, P_{2n+1}.
    pub fn substitution_residual(&self) -> Result<BigReal> {
        let count = self.b.len() - 1;
        let ps = generate(&self.table, 2 * count + 1)?;
        let bits = self.table.params().working_bits();
        let mut worst = BigReal::zero(bits);
        for n in 0..=count {
            for (poly, p, shift) in [(&self.b[n], &ps[2 * n], 0), (&self.r[n], &ps[2 * n + 1], 1)] {
                for (k, c) in p.coeffs().iter().enumerate() {
                    let expected = if k >= shift && (k - shift) % 2 == 0 {
                        poly.coeffs[(k - shift) / 2].clone()
                    } else {
                        BigReal::zero(bits)
                    };
                    let d = (c - expected).abs();
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Gram matrices of both families on the half line by quadrature.
    pub fn orthogonality(&self, spec: &QuadratureSpec) -> Result<(HalfLineOrthogonality, HalfLineOrthogonality)> {
        let params = self.table.params();
        let norms = self.table.norms();
        let b = gram(&self.b, params, 0, |n| &norms[2 * n], spec)?;
        let r = gram(&self.r, params, 1, |n| &norms[2 * n + 1], spec)?;
        Ok((b, r))
    }
}

fn gram<'a>(
    family: &[HalfLinePolynomial],
    params: &WeightParams,
    extra_power: usize,
    norm: impl Fn(usize) -> &'a BigReal,
    spec: &QuadratureSpec,
) -> Result<HalfLineOrthogonality> {
    if family.is_empty() {
        return Err(FreudError::range("polynomials", "empty decomposition"));
    }
    // An even polynomial in x has its y-coefficients on the even powers of x.
    let spread = |p: &HalfLinePolynomial| -> Vec<BigReal> {
        let bits = p.coeffs[0].precision_bits();
        let mut out = vec![BigReal::zero(bits); 2 * p.coeffs.len() - 1];
        for (k, c) in p.coeffs.iter().enumerate() {
            out[2 * k] = c.clone();
        }
        out
    };
    let xs: Vec<Vec<BigReal>> = family.iter().map(spread).collect();
    let (mut off, mut diag) = (0f64, 0f64);
    for i in 0..xs.len() {
        for j in i..xs.len() {
            let v = weighted_integral(&xs[i], Parity::Even, &xs[j], Parity::Even, 2 * extra_power, params, spec)?;
            if i == j {
                diag = diag.max(((v - norm(i)) / norm(i)).abs().to_f64());
            } else {
                off = off.max((v.abs() / (norm(i) * norm(j)).sqrt()).to_f64());
            }
        }
    }
    Ok(HalfLineOrthogonality {
        off_diagonal: off,
        norm_error: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_members_and_substitution() {
        let p = WeightParams::new(3, 0.8, 0.25, 256).unwrap();
        let t = RecurrenceTable::from_hankel(&p, 13).unwrap();
        let d = quadratic_decompose(&t, 6).unwrap();
        let b1 = t.beta(1).unwrap();
        assert!((&d.b[1].coeffs[0] + b1).is_zero());
        assert!((&d.r[1].coeffs[0] + b1 + t.beta(2).unwrap()).is_zero());
        assert_eq!(d.b[1].coeffs[1], 1.0);
        assert!(d.substitution_residual().unwrap().to_f64() < 1e-60);
        let ps = generate(&t, 4).unwrap();
        let x = BigReal::from_decimal_f64(0.7, 288);
        let diff = ps[4].eval(&x) - d.b[2].eval(&x.square());
        assert!(diff.abs().to_f64() < 1e-70, "{diff}");
    }

    #[test]
    fn half_line_orthogonality() {
        let p = WeightParams::new(2, 0.5, 0.5, 256).unwrap();
        let t = RecurrenceTable::from_hankel(&p, 11).unwrap();
        let d = quadratic_decompose(&t, 5).unwrap();
        let (b, r) = d.orthogonality(&QuadratureSpec::with_tol(1e-28)).unwrap();
        assert!(b.off_diagonal < 1e-20 && b.norm_error < 1e-20, "{b:?}");
        assert!(r.off_diagonal < 1e-20 && r.norm_error < 1e-20, "{r:?}");
    }

    #[test]
    fn needs_enough_betas() {
        let p = WeightParams::new(2, 0.0, 0.0, 256).unwrap();
        let t = RecurrenceTable::from_hankel(&p, 6).unwrap();
        assert!(quadratic_decompose(&t, 3).is_err());
        assert!(quadratic_decompose(&t, 2).is_ok());
    }
}
