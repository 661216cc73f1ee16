use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::BigReal;

/// A real polynomial with ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<BigReal>,
    bits: u32,
}

impl Poly {
    pub fn zero(bits: u32) -> Self {
        Poly {
            coeffs: Vec::new(),
            bits,
        }
    }

    pub fn constant(c: BigReal) -> Self {
        let bits = c.precision_bits();
        Poly { coeffs: vec![c], bits }
    }

    /// x^k.
    pub fn monomial(k: usize, bits: u32) -> Self {
        let mut coeffs = vec![BigReal::zero(bits); k + 1];
        coeffs[k] = BigReal::one(bits);
        Poly { coeffs, bits }
    }

    pub fn from_coeffs(coeffs: Vec<BigReal>, bits: u32) -> Self {
        Poly { coeffs, bits }
    }

    pub fn coeffs(&self) -> &[BigReal] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigReal> {
        self.coeffs
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Coefficient of x^k, zero beyond the stored length.
    pub fn coeff(&self, k: usize) -> BigReal {
        self.coeffs.get(k).cloned().unwrap_or_else(|| BigReal::zero(self.bits))
    }

    /// Index of the highest non-zero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// Degree ignoring coefficients below `rel` times the largest one.
    pub fn numerical_degree(&self, rel: &BigReal) -> Option<usize> {
        let max = BigReal::max_abs(&self.coeffs, self.bits);
        if max.is_zero() {
            return None;
        }
        let cutoff = max * rel;
        self.coeffs.iter().rposition(|c| c.abs() > cutoff)
    }

    pub fn eval(&self, x: &BigReal) -> BigReal {
        let mut acc = BigReal::zero(self.bits.max(x.precision_bits()));
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as i64)
            .collect();
        Poly::from_coeffs(coeffs, self.bits)
    }

    /// x^k times the polynomial.
    pub fn shift(&self, k: usize) -> Poly {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut coeffs = vec![BigReal::zero(self.bits); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly::from_coeffs(coeffs, self.bits)
    }

    pub fn scale(&self, c: &BigReal) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect(), self.bits)
    }

    /// Largest |coefficient|.
    pub fn max_abs(&self) -> BigReal {
        BigReal::max_abs(&self.coeffs, self.bits)
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Poly::from_coeffs(coeffs, self.bits.max(rhs.bits))
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        Poly::from_coeffs(coeffs, self.bits.max(rhs.bits))
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        let bits = self.bits.max(rhs.bits);
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Poly::zero(bits);
        }
        let mut coeffs = vec![BigReal::zero(bits); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::from_coeffs(coeffs, bits)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| -c).collect(), self.bits)
    }
}

/// The Wronskian W(f, g) = f g' − f' g.
pub fn wronskian(f: &Poly, g: &Poly) -> Poly {
    &(f * &g.derivative()) - &(&f.derivative() * g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Poly {
        Poly::from_coeffs(v.iter().map(|&c| BigReal::from_f64(c, 128)).collect(), 128)
    }

    #[test]
    fn arithmetic() {
        let a = p(&[1.0, 2.0]);
        let b = p(&[0.0, 0.0, 3.0]);
        assert_eq!((&a * &b).coeffs(), p(&[0.0, 0.0, 3.0, 6.0]).coeffs());
        assert_eq!((&a + &b).degree(), Some(2));
        assert_eq!((&a - &a).degree(), None);
        assert_eq!(b.derivative().coeffs(), p(&[0.0, 6.0]).coeffs());
        assert_eq!(a.shift(2).coeffs(), p(&[0.0, 0.0, 1.0, 2.0]).coeffs());
        assert_eq!(b.eval(&BigReal::from_f64(2.0, 128)), 12.0);
    }

    #[test]
    fn wronskian_of_self_vanishes() {
        let f = p(&[0.5, -1.0, 0.0, 2.0]);
        assert_eq!(wronskian(&f, &f).degree(), None);
        let g = p(&[0.0, 1.0]);
        let w = wronskian(&p(&[1.0]), &g);
        assert_eq!(w.coeffs()[0], 1.0);
    }
}
