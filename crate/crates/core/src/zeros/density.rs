//! The limiting zero density of the scaled polynomials P_n(N^{1/(2m)} x) as
//! n/N → ℓ, and its comparison with finite-n zeros.

use rug::{Integer, Rational};
use serde::Serialize;

use super::zeros;
use crate::error::{FreudError, Result};
use crate::hankel::RecurrenceTable;
use crate::moments::WeightParams;
use crate::oracle::integrate_interval;
use crate::painleve::half_pochhammer;
use crate::scalar::{pfq, BigReal};

/// a_m(ℓ) = [2m/(cπ(2m−1))] √(1 − x²/c²) ₂F₁(1, 1−m; 3/2−m; x²/c²) on (−c, c),
/// c = 2aℓ^{1/(2m)}, a = ½((m−1)!/(½)_m)^{1/(2m)}.
#[derive(Clone, Debug, Serialize)]
pub struct DensityLaw {
    pub m: u32,
    pub ell: BigReal,
    pub a: BigReal,
    pub c: BigReal,
    #[serde(skip)]
    bits: u32,
}

impl DensityLaw {
    pub fn new(m: u32, ell: f64, bits: u32) -> Result<Self> {
        if m < 2 {
            return Err(FreudError::Parameter(format!("m must be at least 2, got {m}")));
        }
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(FreudError::Parameter(format!("ell must be positive, got {ell}")));
        }
        let ell = BigReal::from_decimal_f64(ell, bits);
        let ratio = Rational::from(Integer::factorial(m - 1)) / half_pochhammer(m);
        let inv = BigReal::ratio(1, 2 * m as i64, bits);
        let a = BigReal::from_rational(&ratio, bits).powf(&inv) / 2i64;
        let c = &a * ell.powf(&inv) * 2i64;
        Ok(DensityLaw { m, ell, a, c, bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// 2m / (cπ(2m − 1)), the value at the origin.
    fn prefactor(&self) -> BigReal {
        let m = self.m as i64;
        BigReal::from_i64(2 * m, self.bits) / (&self.c * BigReal::pi(self.bits) * (2 * m - 1))
    }

    fn z(&self, x: &BigReal) -> Result<BigReal> {
        let z = (x / &self.c).square();
        if z >= 1.0 {
            return Err(FreudError::Domain(format!(
                "x = {} lies outside the support (-c, c), c = {}",
                x.to_short(12),
                self.c.to_short(12)
            )));
        }
        Ok(z)
    }

    /// The density in the form with the terminating ₂F₁(1, 1−m; 3/2−m; ·).
    pub fn density(&self, x: &BigReal) -> Result<BigReal> {
        let z = self.z(x)?;
        let bits = self.bits;
        let m = self.m as i64;
        let f = pfq(
            &[BigReal::one(bits), BigReal::from_i64(1 - m, bits)],
            &[BigReal::ratio(3 - 2 * m, 2, bits)],
            &z,
            &BigReal::pow2(-(bits as i32), bits),
        )?;
        Ok(self.prefactor() * (BigReal::one(bits) - z).sqrt() * f)
    }

    /// The same density as [2m/(cπ(2m−1))] ₂F₁(½, ½−m; 3/2−m; x²/c²).
    pub fn density_series_form(&self, x: &BigReal) -> Result<BigReal> {
        let z = self.z(x)?;
        let bits = self.bits;
        let m = self.m as i64;
        let f = pfq(
            &[BigReal::ratio(1, 2, bits), BigReal::ratio(1 - 2 * m, 2, bits)],
            &[BigReal::ratio(3 - 2 * m, 2, bits)],
            &z,
            &BigReal::pow2(-(bits as i32), bits),
        )?;
        Ok(self.prefactor() * f)
    }

    /// ∫_{−c}^{x} of the density; 0 left of the support and 1 right of it.
    pub fn cdf(&self, x: &BigReal, tol: f64) -> Result<BigReal> {
        let bits = self.bits;
        if x <= &-self.c.clone() {
            return Ok(BigReal::zero(bits));
        }
        if x >= &self.c {
            return Ok(BigReal::one(bits));
        }
        // Integrate in u = x/c, where the support is (−1, 1).
        let u = x / &self.c;
        let f = |v: &BigReal| {
            let x = v * &self.c;
            self.density(&x).unwrap_or_else(|_| BigReal::zero(bits)) * &self.c
        };
        integrate_interval(&f, &BigReal::from_i64(-1, bits), &u, tol, 12)
    }

    /// ∫_{−c}^{c} of the density.
    pub fn total_mass(&self, tol: f64) -> Result<BigReal> {
        let bits = self.bits;
        let f = |v: &BigReal| {
            let x = v * &self.c;
            self.density(&x).unwrap_or_else(|_| BigReal::zero(bits)) * &self.c
        };
        integrate_interval(&f, &BigReal::from_i64(-1, bits), &BigReal::one(bits), tol, 12)
    }
}

/// Zeros of P_n scaled by N^{−1/(2m)} against the density law at ℓ = n/N.
#[derive(Clone, Debug, Serialize)]
pub struct KolmogorovReport {
    pub n: usize,
    pub big_n: usize,
    pub ell: f64,
    /// sup |F_empirical − F_law|.
    pub distance: f64,
    pub scaled_zeros: Vec<BigReal>,
}

pub fn scaled_zero_compare(params: &WeightParams, n: usize, big_n: usize) -> Result<KolmogorovReport> {
    if n == 0 || big_n == 0 {
        return Err(FreudError::Parameter("n and N must be positive".into()));
    }
    let ell = n as f64 / big_n as f64;
    let table = RecurrenceTable::from_hankel(params, n)?;
    let bits = 128;
    let law = DensityLaw::new(params.m(), ell, bits)?;
    let set = zeros(&table, n, 1e-30)?;
    let scale = BigReal::from_u64(big_n as u64, bits).powf(&BigReal::ratio(-1, 2 * params.m() as i64, bits));
    let scaled: Vec<BigReal> = set.zeros.iter().map(|z| z.with_precision(bits) * &scale).collect();
    let mut distance = 0f64;
    for (i, z) in scaled.iter().enumerate() {
        let f = law.cdf(z, 1e-20)?.to_f64();
        let below = i as f64 / n as f64;
        let above = (i + 1) as f64 / n as f64;
        distance = distance.max((f - below).abs()).max((above - f).abs());
    }
    Ok(KolmogorovReport {
        n,
        big_n,
        ell,
        distance,
        scaled_zeros: scaled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_and_origin_value() {
        let law = DensityLaw::new(3, 1.0, 128).unwrap();
        assert!((law.c.to_f64() - 1.010815).abs() < 1e-6);
        let d0 = law.density(&BigReal::zero(128)).unwrap();
        assert!((d0.to_f64() - 0.37789).abs() < 1e-5);
        let expected = 6.0 / (law.c.to_f64() * std::f64::consts::PI * 5.0);
        assert!((d0.to_f64() - expected).abs() < 1e-14);
        assert!(matches!(law.density(&law.c), Err(FreudError::Domain(_))));
        assert!(law.density(&(&law.c * 1.5)).is_err());
    }

    #[test]
    fn forms_agree_and_mass_is_one() {
        for m in [2, 3, 5] {
            let law = DensityLaw::new(m, 0.7, 192).unwrap();
            for i in 1..50 {
                let x = &law.c * (-0.95 + 1.9 * i as f64 / 50.0);
                let a = law.density(&x).unwrap();
                let b = law.density_series_form(&x).unwrap();
                assert!(((a - b) / law.prefactor()).abs().to_f64() < 1e-25);
            }
            let mass = law.total_mass(1e-25).unwrap();
            assert!((mass.to_f64() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn vanishes_at_the_edge() {
        let law = DensityLaw::new(4, 2.0, 128).unwrap();
        let near = &law.c * (1.0 - 1e-12);
        assert!(law.density(&near).unwrap().to_f64() < 1e-5);
        assert!(law.cdf(&law.c, 1e-20).unwrap() == 1.0);
        let half = law.cdf(&BigReal::zero(128), 1e-20).unwrap();
        assert!((half.to_f64() - 0.5).abs() < 1e-18);
    }

    #[test]
    fn kolmogorov_distance_shrinks() {
        let p = WeightParams::new(3, 1.0, 0.5, 256).unwrap();
        let small = scaled_zero_compare(&p, 10, 10).unwrap();
        let large = scaled_zero_compare(&p, 40, 40).unwrap();
        assert!(small.distance < 0.15, "{}", small.distance);
        assert!(large.distance < small.distance, "{} {}", small.distance, large.distance);
    }
}
