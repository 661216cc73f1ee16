//! Arbitrary-precision reals and the special functions the other modules need.
//!
//! [`BigReal`] wraps an MPFR float. Binary operations run at the larger of the
//! two operand precisions, so mixing a 256-bit parameter with a 1024-bit moment
//! never silently truncates the moment.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{FreudError, Result};

/// Smallest precision any [`BigReal`] carries.
pub const MIN_PRECISION: u32 = 64;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;

/// Extra bits carried internally by the special functions before rounding.
pub const GUARD_BITS: u32 = 32;

/// Consecutive sub-tolerance terms required before a series is truncated.
const SERIES_QUIET_TERMS: usize = 3;

const SERIES_MAX_TERMS: usize = 2_000_000;

#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigReal(Float);

fn clamp_prec(bits: u32) -> u32 {
    bits.max(MIN_PRECISION)
}

impl BigReal {
    pub fn zero(bits: u32) -> Self {
        BigReal(Float::new(clamp_prec(bits)))
    }

    pub fn one(bits: u32) -> Self {
        Self::from_i64(1, bits)
    }

    pub fn from_i64(v: i64, bits: u32) -> Self {
        BigReal(Float::with_val(clamp_prec(bits), v))
    }

    pub fn from_u64(v: u64, bits: u32) -> Self {
        BigReal(Float::with_val(clamp_prec(bits), v))
    }

    /// Exact binary value of `v`.
    pub fn from_f64(v: f64, bits: u32) -> Self {
        BigReal(Float::with_val(clamp_prec(bits), v))
    }

    /// The decimal number `v` prints as, rounded once to `bits`.
    ///
    /// `from_decimal_f64(0.3, 256)` is 3/10 to 256 bits rather than the
    /// binary double nearest 0.3.
    pub fn from_decimal_f64(v: f64, bits: u32) -> Self {
        Self::parse(&format!("{v:e}"), bits).expect("f64 always prints as a valid decimal")
    }

    pub fn parse(s: &str, bits: u32) -> Result<Self> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| FreudError::Parameter(format!("cannot parse {s:?} as a real: {e}")))?;
        let v = Float::with_val(clamp_prec(bits), parsed);
        if !v.is_finite() {
            return Err(FreudError::Parameter(format!("{s:?} is not finite")));
        }
        Ok(BigReal(v))
    }

    pub fn ratio(num: i64, den: i64, bits: u32) -> Self {
        let p = clamp_prec(bits);
        BigReal(Float::with_val(p, num) / Float::with_val(p, den))
    }

    pub fn pi(bits: u32) -> Self {
        BigReal(Float::with_val(clamp_prec(bits), Constant::Pi))
    }

    pub fn from_rational(q: &Rational, bits: u32) -> Self {
        BigReal(Float::with_val(clamp_prec(bits), q))
    }

    pub fn from_float(f: Float) -> Self {
        let p = f.prec();
        if p < MIN_PRECISION {
            BigReal(Float::with_val(MIN_PRECISION, f))
        } else {
            BigReal(f)
        }
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn precision_bits(&self) -> u32 {
        self.0.prec()
    }

    /// Same value rounded (or padded) to `bits`.
    pub fn with_precision(&self, bits: u32) -> Self {
        BigReal(Float::with_val(clamp_prec(bits), &self.0))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_finite() && !self.0.is_zero() && self.0.is_sign_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_finite() && !self.0.is_zero() && self.0.is_sign_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        BigReal(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Self {
        BigReal(self.0.clone().sqrt())
    }

    pub fn exp(&self) -> Self {
        BigReal(self.0.clone().exp())
    }

    pub fn ln(&self) -> Self {
        BigReal(self.0.clone().ln())
    }

    pub fn cos(&self) -> Self {
        BigReal(self.0.clone().cos())
    }

    pub fn sinh(&self) -> Self {
        BigReal(self.0.clone().sinh())
    }

    pub fn cosh(&self) -> Self {
        BigReal(self.0.clone().cosh())
    }

    pub fn tanh(&self) -> Self {
        BigReal(self.0.clone().tanh())
    }

    pub fn recip(&self) -> Self {
        BigReal(self.0.clone().recip())
    }

    pub fn square(&self) -> Self {
        BigReal(self.0.clone().square())
    }

    pub fn powi(&self, k: i32) -> Self {
        BigReal(Float::with_val(self.0.prec(), (&self.0).pow(k)))
    }

    /// `self^e` for real `e`; the base must be non-negative.
    pub fn powf(&self, e: &BigReal) -> Self {
        let p = self.0.prec().max(e.0.prec());
        BigReal(Float::with_val(p, (&self.0).pow(&e.0)))
    }

    /// `2^k` at the given precision.
    pub fn pow2(k: i32, bits: u32) -> Self {
        let p = clamp_prec(bits);
        BigReal(Float::with_val(p, Float::with_val(p, 2).pow(k)))
    }

    pub fn max_abs<'a>(vals: impl IntoIterator<Item = &'a BigReal>, bits: u32) -> Self {
        vals.into_iter()
            .fold(BigReal::zero(bits), |acc, v| if v.abs() > acc { v.abs() } else { acc })
    }

    /// Decimal digits needed to round-trip a value at `bits` of precision.
    pub fn round_trip_digits(bits: u32) -> usize {
        ((bits as f64) * std::f64::consts::LOG10_2).ceil() as usize + 1
    }

    /// Round-trip-exact decimal rendering in scientific notation.
    pub fn to_decimal(&self) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        let digits = Self::round_trip_digits(self.0.prec());
        self.0.to_string_radix(10, Some(digits))
    }

    /// Short rendering for diagnostics.
    pub fn to_short(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, Some(digits))
    }

    pub fn sum<'a>(vals: impl IntoIterator<Item = &'a BigReal>, bits: u32) -> Self {
        let mut acc = BigReal::zero(bits);
        for v in vals {
            acc += v;
        }
        acc
    }
}

/// Finite values serialise as JSON numbers carrying every round-trip digit;
/// NaN and infinities fall back to strings.
impl serde::Serialize for BigReal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let text = self.to_decimal();
        if self.is_finite() {
            if let Ok(n) = text.parse::<serde_json::Number>() {
                return n.serialize(serializer);
            }
        }
        serializer.serialize_str(&text)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => f.write_str(&self.to_short(d.max(1))),
            None => f.write_str(&self.to_decimal()),
        }
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({}, {} bits)", self.to_short(20), self.precision_bits())
    }
}

impl PartialEq<f64> for BigReal {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for BigReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

macro_rules! binop {
    ($Trait:ident, $method:ident, $AssignTrait:ident, $assign:ident) => {
        impl<'a> $Trait<&'a BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'a BigReal) -> BigReal {
                let p = self.0.prec().max(rhs.0.prec());
                BigReal(Float::with_val(p, (&self.0).$method(&rhs.0)))
            }
        }
        impl $Trait<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $Trait<&'a BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'a BigReal) -> BigReal {
                (&self).$method(rhs)
            }
        }
        impl<'a> $Trait<BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                self.$method(&rhs)
            }
        }
        impl<'a> $Trait<f64> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: f64) -> BigReal {
                let p = self.0.prec();
                BigReal(Float::with_val(p, (&self.0).$method(rhs)))
            }
        }
        impl $Trait<f64> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: f64) -> BigReal {
                (&self).$method(rhs)
            }
        }
        impl<'a> $Trait<i64> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: i64) -> BigReal {
                let p = self.0.prec();
                BigReal(Float::with_val(p, (&self.0).$method(rhs)))
            }
        }
        impl $Trait<i64> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: i64) -> BigReal {
                (&self).$method(rhs)
            }
        }
        impl<'a> $AssignTrait<&'a BigReal> for BigReal {
            fn $assign(&mut self, rhs: &'a BigReal) {
                if rhs.0.prec() > self.0.prec() {
                    self.0.set_prec(rhs.0.prec());
                }
                self.0.$assign(&rhs.0);
            }
        }
        impl $AssignTrait<BigReal> for BigReal {
            fn $assign(&mut self, rhs: BigReal) {
                self.$assign(&rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

impl<'a> Neg for &'a BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0.clone())
    }
}

/// Parses a decimal literal ("0.3", "-1.5e-7", "2", "3/7") into an exact rational.
pub fn parse_exact(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || FreudError::Parameter(format!("cannot parse {s:?} as an exact decimal"));
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_exact(num)?;
        let den = parse_exact(den)?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(num / den);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str_radix(&all_digits, 10).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Integer::from(10);
    if scale >= 0 {
        value *= ten.pow(scale as u32);
    } else {
        value /= ten.pow((-scale) as u32);
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Exact rational for the decimal `v` prints as.
pub fn exact_from_f64(v: f64) -> Result<Rational> {
    if !v.is_finite() {
        return Err(FreudError::Parameter(format!("{v} is not finite")));
    }
    parse_exact(&format!("{v:e}"))
}

/// True when `x` is one of 0, -1, -2, ...
pub fn is_nonpositive_integer(x: &BigReal) -> bool {
    x.is_integer() && !x.is_positive()
}

/// Γ(x), evaluated with guard bits and rounded to the precision of `x`.
pub fn gamma(x: &BigReal) -> Result<BigReal> {
    if !x.is_finite() {
        return Err(FreudError::Parameter("gamma of a non-finite value".into()));
    }
    if is_nonpositive_integer(x) {
        return Err(FreudError::Pole(x.to_short(12)));
    }
    let bits = x.precision_bits();
    let wide = Float::with_val(bits + GUARD_BITS, x.as_float());
    Ok(BigReal(Float::with_val(bits, wide.gamma())))
}

/// Rising factorial (a)_k = a(a+1)...(a+k-1), with (a)_0 = 1.
pub fn pochhammer(a: &BigReal, k: usize) -> BigReal {
    let bits = a.precision_bits();
    let mut acc = Float::with_val(bits + GUARD_BITS, 1);
    let mut term = Float::with_val(bits + GUARD_BITS, a.as_float());
    for _ in 0..k {
        acc *= &term;
        term += 1;
    }
    BigReal(Float::with_val(bits, acc))
}

/// Diagnostics from a hypergeometric summation.
#[derive(Debug, Clone)]
pub struct SeriesSum {
    pub value: BigReal,
    /// Largest |term| seen; the ratio to |value| measures cancellation.
    pub max_term: BigReal,
    pub terms: usize,
}

fn nonpositive_integer_index(x: &BigReal) -> Option<usize> {
    if is_nonpositive_integer(x) {
        Some((-x).to_f64().round() as usize)
    } else {
        None
    }
}

/// Generalised hypergeometric series pFq(a; b; z).
///
/// Summation stops once `SERIES_QUIET_TERMS` consecutive terms fall below
/// `tol * |partial sum|`, or when an upper parameter terminates the series.
pub fn pfq(a: &[BigReal], b: &[BigReal], z: &BigReal, tol: &BigReal) -> Result<BigReal> {
    pfq_detailed(a, b, z, tol).map(|s| s.value)
}

pub fn pfq_detailed(a: &[BigReal], b: &[BigReal], z: &BigReal, tol: &BigReal) -> Result<SeriesSum> {
    let bits = a
        .iter()
        .chain(b)
        .map(BigReal::precision_bits)
        .chain([z.precision_bits(), tol.precision_bits()])
        .max()
        .unwrap_or(DEFAULT_PRECISION);

    // Series terminates after term index `stop` when some a_i = -stop.
    let terminating = a.iter().filter_map(nonpositive_integer_index).min();
    for bj in b {
        if let Some(nb) = nonpositive_integer_index(bj) {
            let safe = matches!(terminating, Some(stop) if stop <= nb);
            if !safe {
                return Err(FreudError::Parameter(format!(
                    "lower parameter {} is a non-positive integer and the series does not terminate before it",
                    bj.to_short(12)
                )));
            }
        }
    }

    let p = a.len();
    let q = b.len();
    if terminating.is_none() && !z.is_zero() {
        if p > q + 1 {
            return Err(FreudError::Divergence(format!(
                "{p}F{q} with p > q+1 and no terminating upper parameter"
            )));
        }
        if p == q + 1 && z.abs() >= 1.0 {
            return Err(FreudError::Divergence(format!(
                "{p}F{q} outside the unit disc (|z| = {})",
                z.to_short(8)
            )));
        }
    }

    let wp = bits + GUARD_BITS;
    let a: Vec<Float> = a.iter().map(|v| Float::with_val(wp, v.as_float())).collect();
    let b: Vec<Float> = b.iter().map(|v| Float::with_val(wp, v.as_float())).collect();
    let z = Float::with_val(wp, z.as_float());
    let tol = Float::with_val(wp, tol.as_float());

    let mut term = Float::with_val(wp, 1);
    let mut sum = Float::with_val(wp, 1);
    let mut max_term = Float::with_val(wp, 1);
    let mut quiet = 0usize;
    let mut k = 0usize;
    loop {
        if let Some(stop) = terminating {
            if k >= stop {
                break;
            }
        }
        if k >= SERIES_MAX_TERMS {
            return Err(FreudError::NonConvergence {
                what: "hypergeometric series",
                levels: SERIES_MAX_TERMS as u32,
            });
        }
        // term_{k+1} = term_k * prod(a_i + k) / prod(b_j + k) * z / (k + 1)
        for ai in &a {
            term *= Float::with_val(wp, ai + k as u64);
        }
        for bj in &b {
            term /= Float::with_val(wp, bj + k as u64);
        }
        term *= &z;
        term /= (k + 1) as u64;
        sum += &term;
        k += 1;

        let mag = Float::with_val(wp, term.abs_ref());
        if mag > max_term {
            max_term = mag.clone();
        }
        if terminating.is_none() {
            let bound = Float::with_val(wp, sum.abs_ref()) * &tol;
            if mag <= bound {
                quiet += 1;
                if quiet >= SERIES_QUIET_TERMS {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }

    Ok(SeriesSum {
        value: BigReal(Float::with_val(bits, sum)),
        max_term: BigReal(Float::with_val(bits, max_term)),
        terms: k + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BITS: u32 = 256;

    fn r(v: f64) -> BigReal {
        BigReal::from_decimal_f64(v, BITS)
    }

    fn tol() -> BigReal {
        BigReal::pow2(-(BITS as i32), BITS)
    }

    fn close(a: &BigReal, b: &BigReal, rel: f64) -> bool {
        let d = (a - b).abs();
        d <= b.abs() * rel
    }

    #[test]
    fn gamma_known_values() {
        let half = gamma(&r(0.5)).unwrap();
        let sqrt_pi = BigReal::pi(BITS).sqrt();
        assert!(close(&half, &sqrt_pi, 1e-70));
        assert_eq!(gamma(&r(1.0)).unwrap(), 1.0);
        let quarter = gamma(&r(0.25)).unwrap();
        assert!((quarter.to_f64() - 3.6256099082).abs() < 1e-10);
    }

    #[test]
    fn gamma_poles() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(gamma(&r(x)), Err(FreudError::Pole(_))));
        }
        assert!(gamma(&r(-0.5)).is_ok());
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(&r(0.5), 3), BigReal::ratio(15, 8, BITS));
        assert_eq!(pochhammer(&r(2.0), 0), 1.0);
        let a = r(0.37);
        for k in 0..10 {
            let lhs = pochhammer(&a, k + 1);
            let rhs = pochhammer(&a, k) * (&a + k as i64);
            assert!(close(&lhs, &rhs, 1e-70));
        }
    }

    #[test]
    fn pfq_exponential_and_origin() {
        let e = pfq(&[], &[], &r(1.0), &tol()).unwrap();
        assert!(close(&e, &BigReal::one(BITS).exp(), 1e-70));
        let m = 3.0;
        let at_zero = pfq(&[r(1.0), r(1.0 - m)], &[r(1.5 - m)], &r(0.0), &tol()).unwrap();
        assert_eq!(at_zero, 1.0);
    }

    #[test]
    fn pfq_euler_transformation() {
        // 2F1(1/2, 1/2-m; 3/2-m; z) = (1-z)^(1/2) 2F1(1, 1-m; 3/2-m; z)
        let m = 3.0;
        let z = r(0.25);
        let lhs = pfq(&[r(0.5), r(0.5 - m)], &[r(1.5 - m)], &z, &tol()).unwrap();
        let rhs = (BigReal::one(BITS) - &z).sqrt()
            * pfq(&[r(1.0), r(1.0 - m)], &[r(1.5 - m)], &z, &tol()).unwrap();
        assert!(close(&lhs, &rhs, 1e-60), "{lhs} vs {rhs}");
    }

    #[test]
    fn pfq_terminating_matches_finite_sum() {
        // 2F1(-4, 2.5; 1.5; 0.7) as an explicit finite sum.
        let (a1, a2, b1, z) = (r(-4.0), r(2.5), r(1.5), r(0.7));
        let series = pfq(&[a1.clone(), a2.clone()], &[b1.clone()], &z, &tol()).unwrap();
        let mut direct = BigReal::zero(BITS);
        let mut fact = BigReal::one(BITS);
        for k in 0..=4usize {
            if k > 0 {
                fact *= &BigReal::from_i64(k as i64, BITS);
            }
            direct += pochhammer(&a1, k) * pochhammer(&a2, k) / pochhammer(&b1, k) / &fact
                * z.powi(k as i32);
        }
        assert!(close(&series, &direct, 1e-70));
    }

    #[test]
    fn pfq_rejects_bad_parameters() {
        assert!(matches!(
            pfq(&[r(1.0)], &[r(-2.0)], &r(0.5), &tol()),
            Err(FreudError::Parameter(_))
        ));
        // terminates at k = 2 before (−3)_k hits zero at k = 4
        assert!(pfq(&[r(-2.0)], &[r(-3.0)], &r(0.5), &tol()).is_ok());
        assert!(matches!(
            pfq(&[r(1.0), r(1.0), r(1.0)], &[r(2.0)], &r(0.5), &tol()),
            Err(FreudError::Divergence(_))
        ));
        assert!(matches!(
            pfq(&[r(1.0), r(1.0)], &[r(2.0)], &r(1.5), &tol()),
            Err(FreudError::Divergence(_))
        ));
    }

    #[test]
    fn mixed_precision_promotes() {
        let a = BigReal::one(128);
        let b = BigReal::one(512);
        assert_eq!((&a + &b).precision_bits(), 512);
        assert_eq!((&b * &a).precision_bits(), 512);
        assert_eq!(BigReal::one(8).precision_bits(), MIN_PRECISION);
    }

    #[test]
    fn exact_decimals() {
        assert_eq!(parse_exact("0.3").unwrap(), Rational::from((3, 10)));
        assert_eq!(parse_exact("-1.5e-2").unwrap(), Rational::from((-3, 200)));
        assert_eq!(parse_exact("2").unwrap(), Rational::from(2));
        assert_eq!(parse_exact("1/3").unwrap(), Rational::from((1, 3)));
        assert_eq!(exact_from_f64(0.7).unwrap(), Rational::from((7, 10)));
        assert!(parse_exact("abc").is_err());
        assert!(parse_exact("1/0").is_err());
    }

    #[test]
    fn decimal_round_trip() {
        let x = BigReal::from_decimal_f64(0.3, BITS);
        let back = BigReal::parse(&x.to_decimal(), BITS).unwrap();
        assert_eq!(x, back);
    }
}
