//! The ladder functions C_n, D_n and the second-order ODE
//! J P''_{n+1} + K P'_{n+1} + L P_{n+1} = 0.
//!
//! C_0 = −1 + 2(t x² − m x^{2m} + λ + 1), D_{−1} = 0,
//! C_{n+1} = −C_n + 2x D_n/β_n,
//! D_{n+1} = −x + (β_n/β_{n−1}) D_{n−1} + x² D_n/β_n − x C_n,
//! and J = x D_{n+1}, K = C_0 D_{n+1} − x D'_{n+1} + D_{n+1},
//! L = W(½(C_{n+1} − C_0), D_{n+1}) − D_{n+1} Σ_{j=0}^{n} D_j/β_j.
//!
//! The initial D_0 = 2x{m Σ_{j=1}^{m} μ_{2j−2} x^{2m−2j} − t μ_0} and the value
//! standing in for β_0 are fixed only up to convention; [`LadderSystem::resolve`]
//! tries each candidate and keeps the first for which the ODE holds and
//! deg D_n stays at most 2m − 1.

use serde::Serialize;

use super::dense::{wronskian, Poly};
use super::eval_with_derivatives;
use crate::error::{FreudError, Result};
use crate::hankel::RecurrenceTable;
use crate::moments::MomentTable;
use crate::scalar::BigReal;

/// Candidate normalisations of D_0 and of the β_0 divisor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum D0Convention {
    /// D_0 with raw moments; β_0 taken as h_0 = μ_0.
    AsPrinted,
    /// D_0 with moments divided by μ_0; β_0 taken as 1.
    Normalised,
    /// −D_0 with moments divided by μ_0; β_0 taken as 1.
    NegatedNormalised,
}

impl D0Convention {
    pub const ALL: [D0Convention; 3] = [
        D0Convention::AsPrinted,
        D0Convention::Normalised,
        D0Convention::NegatedNormalised,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            D0Convention::AsPrinted => "as-printed",
            D0Convention::Normalised => "normalised",
            D0Convention::NegatedNormalised => "negated-normalised",
        }
    }
}

/// C_n and D_n at one index.
#[derive(Clone, Debug)]
pub struct LadderPair {
    pub n: usize,
    pub c: Poly,
    pub d: Poly,
}

/// C_0 … C_{N+1} and D_{−1} … D_{N+1} under one D_0 convention.
#[derive(Clone, Debug)]
pub struct LadderSystem {
    table: RecurrenceTable,
    convention: D0Convention,
    c: Vec<Poly>,
    /// d[k] holds D_{k−1}.
    d: Vec<Poly>,
    /// β_0 under the convention, then β_1, β_2, ….
    divisors: Vec<BigReal>,
}

impl LadderSystem {
    /// Builds the ladder up to C_{n_max+1}, D_{n_max+1}; needs β_1 … β_{n_max}.
    pub fn new(table: &RecurrenceTable, convention: D0Convention, n_max: usize) -> Result<Self> {
        table.require(n_max.max(1))?;
        let params = table.params();
        let m = params.m() as usize;
        let bits = params.working_bits();
        let moments = MomentTable::compute(params, m - 1)?;
        let mu0 = moments.even(0).with_precision(bits);

        let mut c0 = vec![BigReal::zero(bits); 2 * m + 1];
        c0[0] = params.lambda() * 2i64 + 1i64;
        c0[2] = params.t() * 2i64;
        c0[2 * m] = BigReal::from_i64(-2 * m as i64, bits);
        let c0 = Poly::from_coeffs(c0, bits);

        let mut d0 = vec![BigReal::zero(bits); 2 * m];
        for j in 1..=m {
            d0[2 * m - 2 * j + 1] += moments.even(j - 1) * (2 * m) as i64;
        }
        d0[1] -= params.t() * &mu0 * 2i64;
        let d0 = Poly::from_coeffs(d0, bits);
        let (d0, beta0) = match convention {
            D0Convention::AsPrinted => (d0, mu0.clone()),
            D0Convention::Normalised => (d0.scale(&mu0.recip()), BigReal::one(bits)),
            D0Convention::NegatedNormalised => (d0.scale(&-mu0.recip()), BigReal::one(bits)),
        };

        let mut divisors = vec![beta0];
        divisors.extend(table.coeffs()[1..=n_max].iter().map(|b| b.with_precision(bits)));

        let x = Poly::monomial(1, bits);
        let mut c = vec![c0];
        let mut d = vec![Poly::zero(bits), d0];
        for n in 0..=n_max {
            let bn = &divisors[n];
            let (cn, dn, dprev) = (&c[n], &d[n + 1], &d[n]);
            let c_next = &(-cn) + &dn.shift(1).scale(&(BigReal::from_i64(2, bits) / bn));
            let mut d_next = &dn.shift(2).scale(&bn.recip()) - &cn.shift(1);
            d_next = &d_next - &x;
            if n >= 1 {
                d_next = &d_next + &dprev.scale(&(bn / &divisors[n - 1]));
            }
            c.push(c_next);
            d.push(d_next);
        }
        Ok(LadderSystem {
            table: table.clone(),
            convention,
            c,
            d,
            divisors,
        })
    }

    /// Tries each convention in turn and adopts the first whose ODE residual
    /// vanishes at the sample points for n = 0 … n_max − 1 and whose D_n obey
    /// the degree bound.
    pub fn resolve(table: &RecurrenceTable, n_max: usize, samples: &[BigReal]) -> Result<LadderResolution> {
        let tol = BigReal::pow2(-((table.precision_bits() / 2) as i32), 64);
        let mut trials = Vec::new();
        for convention in D0Convention::ALL {
            let system = LadderSystem::new(table, convention, n_max)?;
            let mut worst = BigReal::zero(64);
            for n in 0..n_max {
                for x in samples {
                    let (r, scale) = system.ode_residual(n, x)?;
                    let rel = if scale.is_zero() { r.abs() } else { r.abs() / scale };
                    if rel > worst {
                        worst = rel;
                    }
                }
            }
            let degree_ok = system.degree_bound_holds();
            let ok = worst < tol && degree_ok;
            trials.push(ConventionTrial {
                convention,
                max_relative_residual: worst.to_f64(),
                degree_bound: degree_ok,
            });
            if ok {
                return Ok(LadderResolution {
                    adopted: Some(convention),
                    system: Some(system),
                    trials,
                });
            }
        }
        Ok(LadderResolution {
            adopted: None,
            system: None,
            trials,
        })
    }

    pub fn convention(&self) -> D0Convention {
        self.convention
    }

    /// Largest n for which C_n and D_n are available.
    pub fn n_max(&self) -> usize {
        self.c.len() - 1
    }

    pub fn pair(&self, n: usize) -> Result<LadderPair> {
        if n > self.n_max() {
            return Err(FreudError::range(
                "polynomials",
                format!("ladder built up to n = {}, asked for {n}", self.n_max()),
            ));
        }
        Ok(LadderPair {
            n,
            c: self.c[n].clone(),
            d: self.d[n + 1].clone(),
        })
    }

    /// True when every D_n has numerical degree at most 2m − 1 and every C_n
    /// is even.
    pub fn degree_bound_holds(&self) -> bool {
        let m = self.table.params().m() as usize;
        let rel = BigReal::pow2(-((self.table.precision_bits() / 2) as i32), 64);
        let d_ok = self.d[1..]
            .iter()
            .all(|d| d.numerical_degree(&rel).is_none_or(|deg| deg < 2 * m));
        let c_even = self.c.iter().all(|c| {
            let scale = c.max_abs() * &rel;
            c.coeffs().iter().skip(1).step_by(2).all(|v| v.abs() <= scale)
        });
        d_ok && c_even
    }

    /// (J, K, L) for the ODE satisfied by P_{n+1}.
    pub fn ode_coeffs(&self, n: usize) -> Result<(Poly, Poly, Poly)> {
        if n + 1 > self.n_max() {
            return Err(FreudError::range(
                "polynomials",
                format!("ODE for P_{} needs the ladder at n = {}", n + 1, n + 1),
            ));
        }
        let c0 = &self.c[0];
        let d1 = &self.d[n + 2];
        let j = d1.shift(1);
        let k = &(&(c0 * d1) - &d1.derivative().shift(1)) + d1;
        let half = BigReal::ratio(1, 2, c0.bits());
        let f = (&self.c[n + 1] - c0).scale(&half);
        let mut sum = Poly::zero(c0.bits());
        for jdx in 0..=n {
            sum = &sum + &self.d[jdx + 1].scale(&self.divisors[jdx].recip());
        }
        let l = &wronskian(&f, d1) - &(d1 * &sum);
        Ok((j, k, l))
    }

    /// (J P'' + K P' + L P at x, |J P''| + |K P'| + |L P|) for P = P_{n+1}.
    pub fn ode_residual(&self, n: usize, x: &BigReal) -> Result<(BigReal, BigReal)> {
        let (j, k, l) = self.ode_coeffs(n)?;
        let (p, dp, ddp) = eval_with_derivatives(&self.table, n + 1, x)?;
        let a = j.eval(x) * ddp;
        let b = k.eval(x) * dp;
        let c = l.eval(x) * p;
        let scale = a.abs() + b.abs() + c.abs();
        Ok((a + b + c, scale))
    }
}

/// Outcome of one convention in the resolution procedure.
#[derive(Clone, Debug, Serialize)]
pub struct ConventionTrial {
    pub convention: D0Convention,
    pub max_relative_residual: f64,
    pub degree_bound: bool,
}

/// The adopted convention, if any, with the diagnostics for every candidate.
#[derive(Clone, Debug)]
pub struct LadderResolution {
    pub adopted: Option<D0Convention>,
    pub system: Option<LadderSystem>,
    pub trials: Vec<ConventionTrial>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::WeightParams;

    fn samples(bits: u32) -> Vec<BigReal> {
        [0.31, -0.77, 1.12, 0.05, -1.4]
            .iter()
            .map(|&v| BigReal::from_decimal_f64(v, bits))
            .collect()
    }

    #[test]
    fn initial_c_at_origin() {
        let p = WeightParams::new(2, 0.4, 0.3, 256).unwrap();
        let table = RecurrenceTable::from_hankel(&p, 4).unwrap();
        let sys = LadderSystem::new(&table, D0Convention::AsPrinted, 3).unwrap();
        let c0 = sys.pair(0).unwrap().c;
        assert!((c0.eval(&BigReal::zero(64)).to_f64() - 1.6).abs() < 1e-30);
    }

    #[test]
    fn resolution_adopts_a_convention() {
        for m in [2u32, 3] {
            let p = WeightParams::new(m, 0.5, 0.3, 256).unwrap();
            let table = RecurrenceTable::from_hankel(&p, 10).unwrap();
            let res = LadderSystem::resolve(&table, 7, &samples(256)).unwrap();
            assert_eq!(res.adopted, Some(D0Convention::NegatedNormalised), "{:?}", res.trials);
            let sys = res.system.unwrap();
            for n in 0..=6 {
                let pair = sys.pair(n).unwrap();
                assert!(pair.d.numerical_degree(&BigReal::pow2(-100, 64)).unwrap() < 2 * m as usize);
                for x in samples(256) {
                    let (r, scale) = sys.ode_residual(n, &x).unwrap();
                    assert!((r.abs() / scale).to_f64() < 1e-20);
                }
            }
        }
    }

    #[test]
    fn ode_index_range() {
        let p = WeightParams::new(2, 0.0, 0.0, 256).unwrap();
        let table = RecurrenceTable::from_hankel(&p, 4).unwrap();
        let sys = LadderSystem::new(&table, D0Convention::NegatedNormalised, 3).unwrap();
        assert!(sys.ode_coeffs(4).is_err());
        assert!(sys.ode_coeffs(3).is_ok());
    }
}
