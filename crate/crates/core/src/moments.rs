//! The weight |x|^{2λ+1} exp(t x² − x^{2m}), its moments and the moment ODE.
//!
//! The first moment comes from the finite partition sum of ₂F_m series at
//! argument (t/m)^m. Higher even moments use the exact λ-shift
//! μ_{2k}(t; λ) = μ_0(t; λ + k); no numerical differentiation in t is involved.

use rayon::prelude::*;
use rug::Rational;

use crate::error::{FreudError, Result};
use crate::scalar::{self, gamma, BigReal, GUARD_BITS, MIN_PRECISION};

/// Parameters (m, t, λ) of the weight together with the requested precision.
///
/// `t` and `λ` are held as exact rationals so that precision changes and
/// integer λ-shifts never introduce rounding of the parameters themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightParams {
    m: u32,
    t: Rational,
    lambda: Rational,
    precision_bits: u32,
}

impl WeightParams {
    /// Parameters from decimal values; `0.3` means exactly 3/10.
    pub fn new(m: u32, t: f64, lambda: f64, precision_bits: u32) -> Result<Self> {
        Self::from_exact(
            m,
            scalar::exact_from_f64(t)?,
            scalar::exact_from_f64(lambda)?,
            precision_bits,
        )
    }

    /// Parameters from decimal strings, as accepted on the command line.
    pub fn parse(m: u32, t: &str, lambda: &str, precision_bits: u32) -> Result<Self> {
        Self::from_exact(
            m,
            scalar::parse_exact(t)?,
            scalar::parse_exact(lambda)?,
            precision_bits,
        )
    }

    pub fn from_exact(m: u32, t: Rational, lambda: Rational, precision_bits: u32) -> Result<Self> {
        if m < 2 {
            return Err(FreudError::Parameter(format!("m must be at least 2, got {m}")));
        }
        if lambda <= -1 {
            return Err(FreudError::Parameter(format!(
                "lambda must exceed -1 for the moments to exist, got {}",
                lambda.to_f64()
            )));
        }
        if precision_bits < MIN_PRECISION {
            return Err(FreudError::Parameter(format!(
                "precision must be at least {MIN_PRECISION} bits, got {precision_bits}"
            )));
        }
        Ok(WeightParams {
            m,
            t,
            lambda,
            precision_bits,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Internal working precision: requested bits plus guard bits.
    pub fn working_bits(&self) -> u32 {
        self.precision_bits + GUARD_BITS
    }

    pub fn t_exact(&self) -> &Rational {
        &self.t
    }

    pub fn lambda_exact(&self) -> &Rational {
        &self.lambda
    }

    /// t rounded to the working precision.
    pub fn t(&self) -> BigReal {
        BigReal::from_rational(&self.t, self.working_bits())
    }

    /// λ rounded to the working precision.
    pub fn lambda(&self) -> BigReal {
        BigReal::from_rational(&self.lambda, self.working_bits())
    }

    pub fn t_f64(&self) -> f64 {
        self.t.to_f64()
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda.to_f64()
    }

    /// The same weight with λ replaced by λ + `shift`.
    pub fn shift_lambda(&self, shift: &Rational) -> Result<Self> {
        Self::from_exact(
            self.m,
            self.t.clone(),
            Rational::from(&self.lambda + shift),
            self.precision_bits,
        )
    }

    /// λ + k for integer k ≥ 0, which can never leave the admissible range.
    pub fn shift_lambda_int(&self, k: u32) -> Self {
        let mut out = self.clone();
        out.lambda += k;
        out
    }

    pub fn with_t(&self, t: Rational) -> Self {
        let mut out = self.clone();
        out.t = t;
        out
    }

    pub fn with_precision(&self, precision_bits: u32) -> Self {
        let mut out = self.clone();
        out.precision_bits = precision_bits.max(MIN_PRECISION);
        out
    }
}

/// ω(x) = |x|^{2λ+1} exp(t x² − x^{2m}).
pub fn weight_eval(params: &WeightParams, x: &BigReal) -> Result<BigReal> {
    let bits = params.working_bits();
    let x = x.with_precision(bits);
    let exponent = params.lambda() * 2i64 + 1i64;
    let x2 = x.square();
    let gauss = (params.t() * &x2 - x2.powi(params.m as i32)).exp();
    if x.is_zero() {
        return if exponent.is_positive() {
            Ok(BigReal::zero(params.precision_bits))
        } else if exponent.is_zero() {
            Ok(BigReal::one(params.precision_bits))
        } else {
            Err(FreudError::Domain(
                "weight is infinite at x = 0 when lambda < -1/2".into(),
            ))
        };
    }
    Ok((x.abs().powf(&exponent) * gauss).with_precision(params.precision_bits))
}

/// The partition sum
/// (1/m) Σ_{k=1}^{m} t^{k-1}/(k-1)! Γ((λ+k)/m) ₂F_m((λ+k)/m, 1; k/m, …, (m+k-1)/m; (t/m)^m)
/// without any restriction on λ beyond the Γ poles. For λ > −1 this is μ_0.
pub(crate) fn partition_sum(m: u32, t: &Rational, lambda: &Rational, precision_bits: u32) -> Result<BigReal> {
    let mut extra = 0u32;
    loop {
        let wp = precision_bits + GUARD_BITS + extra;
        let (value, magnitude) = partition_sum_at(m, t, lambda, wp)?;
        if value.is_zero() {
            return Err(FreudError::range("moments", "partition sum cancelled to zero"));
        }
        let ratio = &magnitude / &value.abs();
        let lost = if ratio > 1.0 { ratio.to_f64().log2() } else { 0.0 };
        if !lost.is_finite() || lost > precision_bits as f64 {
            return Err(FreudError::range(
                "moments",
                format!(
                    "hypergeometric terms exceed 2^{precision_bits} relative to the first moment at t = {}",
                    t.to_f64()
                ),
            ));
        }
        if lost <= (GUARD_BITS / 2) as f64 || extra > 0 {
            return Ok(value.with_precision(precision_bits));
        }
        extra = lost.ceil() as u32 + GUARD_BITS;
    }
}

fn partition_sum_at(m: u32, t: &Rational, lambda: &Rational, wp: u32) -> Result<(BigReal, BigReal)> {
    let t = BigReal::from_rational(t, wp);
    let lambda = BigReal::from_rational(lambda, wp);
    let mm = BigReal::from_u64(m as u64, wp);
    let z = (&t / &mm).powi(m as i32);
    let tol = BigReal::pow2(-(wp as i32), wp);
    let one = BigReal::one(wp);

    let mut total = BigReal::zero(wp);
    let mut magnitude = BigReal::zero(wp);
    let mut factorial = BigReal::one(wp);
    for k in 1..=m {
        if k > 1 {
            factorial *= &BigReal::from_u64((k - 1) as u64, wp);
        }
        let t_pow = t.powi((k - 1) as i32);
        if t_pow.is_zero() {
            continue;
        }
        let a0 = (&lambda + k as i64) / &mm;
        let upper = [a0.clone(), one.clone()];
        let lower: Vec<BigReal> = (k..k + m)
            .map(|j| BigReal::ratio(j as i64, m as i64, wp))
            .collect();
        let series = scalar::pfq_detailed(&upper, &lower, &z, &tol)?;
        let outer = t_pow / &factorial * gamma(&a0)?;
        let inner_mag = if series.max_term > 1.0 {
            series.max_term.clone()
        } else {
            one.clone()
        };
        magnitude += outer.abs() * inner_mag;
        total += outer * series.value;
    }
    Ok((total / &mm, magnitude / &mm))
}

/// μ_0(t; λ, m) from the hypergeometric partition sum.
pub fn mu0(params: &WeightParams) -> Result<BigReal> {
    partition_sum(params.m, &params.t, &params.lambda, params.precision_bits)
}

/// μ_k: zero for odd k, μ_0 at λ + k/2 for even k.
pub fn moment(params: &WeightParams, k: usize) -> Result<BigReal> {
    if k % 2 == 1 {
        return Ok(BigReal::zero(params.precision_bits));
    }
    mu0(&params.shift_lambda_int((k / 2) as u32))
}

/// m μ_{2m} − t μ_2 − (λ+1) μ_0, which vanishes identically.
pub fn moment_ode_residual(params: &WeightParams) -> Result<BigReal> {
    let m = params.m as usize;
    let table = MomentTable::compute(params, m)?;
    let wp = params.working_bits();
    let lhs = table.even(m).with_precision(wp) * m as i64
        - params.t() * table.even(1)
        - (params.lambda() + 1i64) * table.even(0);
    Ok(lhs.with_precision(params.precision_bits))
}

/// Even moments μ_0, μ_2, …, μ_{2K} of one weight.
#[derive(Clone, Debug)]
pub struct MomentTable {
    params: WeightParams,
    even_moments: Vec<BigReal>,
}

impl MomentTable {
    /// μ_0 … μ_{2K}, evaluated in parallel over the λ-shifts.
    pub fn compute(params: &WeightParams, k_max: usize) -> Result<Self> {
        let even_moments = (0..=k_max)
            .into_par_iter()
            .map(|j| mu0(&params.shift_lambda_int(j as u32)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(params.clone(), even_moments)
    }

    /// Wraps precomputed even moments, checking positivity.
    pub fn from_values(params: WeightParams, even_moments: Vec<BigReal>) -> Result<Self> {
        if even_moments.is_empty() {
            return Err(FreudError::Parameter("moment table needs at least mu_0".into()));
        }
        if let Some(j) = even_moments.iter().position(|v| !v.is_positive()) {
            return Err(FreudError::range(
                "moments",
                format!("even moment mu_{} is not strictly positive", 2 * j),
            ));
        }
        Ok(MomentTable {
            params,
            even_moments,
        })
    }

    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    /// K, the index of the last stored even moment μ_{2K}.
    pub fn k_max(&self) -> usize {
        self.even_moments.len() - 1
    }

    pub fn even_moments(&self) -> &[BigReal] {
        &self.even_moments
    }

    /// μ_{2j}. Panics if j > K.
    pub fn even(&self, j: usize) -> &BigReal {
        &self.even_moments[j]
    }

    /// μ_k for any k, with exact zeros at odd indices.
    pub fn get(&self, k: usize) -> Result<BigReal> {
        if k % 2 == 1 {
            return Ok(BigReal::zero(self.even_moments[0].precision_bits()));
        }
        self.even_moments
            .get(k / 2)
            .cloned()
            .ok_or(FreudError::InsufficientMoments {
                needed: k,
                available: 2 * self.k_max(),
            })
    }
}
