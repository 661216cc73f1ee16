//! Named self-check suites. Each recomputes an identity the library is built
//! on and reports its worst residual against a fixed tolerance.

use rug::Rational;
use serde::Serialize;

use crate::error::{FreudError, Result};
use crate::hankel::{hankel_det, parity_dets, RecurrenceTable};
use crate::moments::{moment, moment_ode_residual, MomentTable, WeightParams};
use crate::oracle::{oracle_even_moments, QuadratureSpec};
use crate::painleve::{string_residual, string_residual_printed, volterra_residual};
use crate::polynomials::{
    eval_with_derivatives, mixed_recurrence_check, quadratic_decompose, quasi_orthogonality_check, structure_system_residuals,
    LadderSystem,
};
use crate::scalar::BigReal;
use crate::zeros::{extreme_zero_bound, interlacing_check, monotonicity_check, scaled_zero_compare, zeros, DensityLaw, Direction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    MomentsOde,
    HankelParity,
    String,
    Volterra,
    Structure,
    LadderOde,
    Mixed,
    Quasi,
    Quaddecomp,
    ZerosInterlace,
    ZerosBounds,
    Density,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::MomentsOde,
        Suite::HankelParity,
        Suite::String,
        Suite::Volterra,
        Suite::Structure,
        Suite::LadderOde,
        Suite::Mixed,
        Suite::Quasi,
        Suite::Quaddecomp,
        Suite::ZerosInterlace,
        Suite::ZerosBounds,
        Suite::Density,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::MomentsOde => "moments-ode",
            Suite::HankelParity => "hankel-parity",
            Suite::String => "string",
            Suite::Volterra => "volterra",
            Suite::Structure => "structure",
            Suite::LadderOde => "ladder-ode",
            Suite::Mixed => "mixed",
            Suite::Quasi => "quasi",
            Suite::Quaddecomp => "quaddecomp",
            Suite::ZerosInterlace => "zeros-interlace",
            Suite::ZerosBounds => "zeros-bounds",
            Suite::Density => "density",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| FreudError::Parameter(format!("unknown suite '{name}'")))
    }

    /// Expands a list of names, where "all" selects every suite. Duplicates are
    /// dropped and the canonical order is kept. An empty selection is an error.
    pub fn select<S: AsRef<str>>(names: &[S]) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for name in names {
            let name = name.as_ref().trim();
            if name.is_empty() {
                continue;
            }
            if name == "all" {
                out.extend(Suite::ALL);
            } else {
                out.push(Suite::from_name(name)?);
            }
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(FreudError::Parameter("no verification suite selected".into()));
        }
        Ok(out)
    }
}

/// Outcome of one suite at one m.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub m: u32,
    pub pass: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Tolerance actually enforced: the nominal one, relaxed to 2^{−bits/2} when
/// the precision cannot support it.
fn tol(nominal: f64, bits: u32) -> f64 {
    nominal.max(2f64.powi(-(bits as i32) / 2))
}

fn result(suite: Suite, params: &WeightParams, residual: f64, tolerance: f64, detail: String) -> SuiteResult {
    SuiteResult {
        suite: suite.name(),
        m: params.m(),
        pass: residual.is_finite() && residual <= tolerance,
        max_residual: residual,
        tolerance,
        detail,
    }
}

fn rel(a: &BigReal, b: &BigReal) -> f64 {
    if b.is_zero() {
        a.abs().to_f64()
    } else {
        ((a - b) / b).abs().to_f64()
    }
}

/// Ten fixed sample points spread over the bulk of the zero range.
pub fn sample_points(bits: u32) -> Vec<BigReal> {
    [-1.37, -0.91, -0.52, -0.18, 0.07, 0.29, 0.64, 0.88, 1.23, 1.71]
        .iter()
        .map(|&v| BigReal::from_decimal_f64(v, bits))
        .collect()
}

pub fn run_suite(suite: Suite, params: &WeightParams) -> Result<SuiteResult> {
    let bits = params.precision_bits();
    match suite {
        Suite::MomentsOde => {
            let mu0 = moment(params, 0)?;
            let ode = (moment_ode_residual(params)? / mu0).abs().to_f64();
            let spec = QuadratureSpec::with_tol(1e-25);
            let oracle = oracle_even_moments(params, 10, &spec)?;
            let table = MomentTable::compute(params, 10)?;
            let quad = oracle
                .iter()
                .enumerate()
                .map(|(k, q)| rel(q, table.even(k)))
                .fold(0.0, f64::max);
            let t_ode = tol(1e-30, bits);
            let t_quad = 1e-20;
            let mut r = result(
                suite,
                params,
                ode.max(quad),
                t_quad,
                format!("ode relative {ode:.3e} (tol {t_ode:.0e}); quadrature relative {quad:.3e} for k <= 10"),
            );
            r.pass &= ode <= t_ode;
            Ok(r)
        }
        Suite::HankelParity => {
            let moments = MomentTable::compute(params, 13)?;
            let mut worst = 0f64;
            for n in 0..=6 {
                let (a, b) = parity_dets(&moments, n)?;
                let (a1, _) = parity_dets(&moments, n + 1)?;
                worst = worst.max(rel(&(&a * &b), &hankel_det(&moments, 2 * n)?));
                worst = worst.max(rel(&(&a1 * &b), &hankel_det(&moments, 2 * n + 1)?));
            }
            Ok(result(suite, params, worst, tol(0.0, bits), "Delta_2n = A_n B_n, Delta_2n+1 = A_n+1 B_n, n <= 6".into()))
        }
        Suite::String => {
            let m = params.m() as usize;
            let table = RecurrenceTable::from_hankel(params, 20 + m)?;
            let mut worst = BigReal::zero(64);
            let mut printed_gap = 0f64;
            for n in 1..=20 {
                let r = string_residual(&table, n)?;
                if m <= 3 {
                    let p = string_residual_printed(&table, n)?;
                    printed_gap = printed_gap.max((&p - &r).abs().to_f64());
                }
                if r > worst {
                    worst = r;
                }
            }
            let t = 1e-20;
            let mut out = result(suite, params, worst.to_f64(), t, format!("n <= 20 at {} bits", table.precision_bits()));
            if m <= 3 {
                out.pass &= printed_gap <= t;
                out.detail.push_str(&format!("; explicit form differs by {printed_gap:.3e}"));
            }
            Ok(out)
        }
        Suite::Volterra => {
            let mut worst = 0f64;
            let mut ratios = Vec::new();
            for n in 1..=6 {
                let r1 = volterra_residual(params, n, 1e-3)?;
                let r2 = volterra_residual(params, n, 5e-4)?;
                let ratio = (r2 / r1).to_f64();
                ratios.push(format!("{ratio:.4}"));
                worst = worst.max((ratio - 0.25).abs());
            }
            Ok(result(
                suite,
                params,
                worst,
                0.05,
                format!("residual(h/2)/residual(h) for n = 1..6: {}", ratios.join(" ")),
            ))
        }
        Suite::Structure => {
            let table = RecurrenceTable::from_hankel(params, 14)?;
            let mut worst = BigReal::zero(64);
            for n in 1..=12 {
                for r in structure_system_residuals(&table, n)? {
                    if r > worst {
                        worst = r;
                    }
                }
            }
            Ok(result(suite, params, worst.to_f64(), tol(1e-30, bits), "all four lines, n <= 12".into()))
        }
        Suite::LadderOde => {
            let table = RecurrenceTable::from_hankel(params, 10)?;
            let samples = sample_points(table.params().working_bits());
            let res = LadderSystem::resolve(&table, 7, &samples)?;
            let trials = res
                .trials
                .iter()
                .map(|t| format!("{}: {:.3e}{}", t.convention.as_str(), t.max_relative_residual, if t.degree_bound { "" } else { " (degree bound fails)" }))
                .collect::<Vec<_>>()
                .join("; ");
            let Some(system) = res.system else {
                return Ok(result(suite, params, f64::INFINITY, 1e-20, format!("no D_0 convention satisfies the ODE: {trials}")));
            };
            let mut worst = 0f64;
            for n in 0..=6 {
                for x in &samples {
                    let (r, scale) = system.ode_residual(n, x)?;
                    worst = worst.max((r.abs() / scale).to_f64());
                }
            }
            Ok(result(
                suite,
                params,
                worst,
                1e-20,
                format!("adopted {}; {trials}", system.convention().as_str()),
            ))
        }
        Suite::Mixed => {
            let samples = sample_points(params.working_bits());
            let mut worst = 0f64;
            for n in 0..=6 {
                worst = worst.max(mixed_recurrence_check(params, n, &samples)?.max());
            }
            Ok(result(suite, params, worst, tol(1e-25, bits), "four mixed identities, n <= 6".into()))
        }
        Suite::Quasi => {
            let spec = QuadratureSpec::with_tol(1e-30);
            let lambda = Rational::from((-3, 2));
            let mut worst = 0f64;
            for n in 3..=6 {
                let r = quasi_orthogonality_check(params.m(), params.t_exact(), &lambda, n, bits.max(256), &spec)?;
                worst = worst.max(r.orthogonal_part());
            }
            Ok(result(suite, params, worst, 1e-20, "lambda = -1.5, k <= n - 3, n = 3..6".into()))
        }
        Suite::Quaddecomp => {
            let table = RecurrenceTable::from_hankel(params, 13)?;
            let d = quadratic_decompose(&table, 6)?;
            let sub = d.substitution_residual()?.to_f64();
            let (b, r) = d.orthogonality(&QuadratureSpec::with_tol(1e-28))?;
            let orth = b.off_diagonal.max(b.norm_error).max(r.off_diagonal).max(r.norm_error);
            let t_sub = tol(1e-30, bits);
            let mut out = result(suite, params, orth, 1e-20, format!("substitution residual {sub:.3e}; half-line Gram deviation {orth:.3e}"));
            out.pass &= sub <= t_sub;
            Ok(out)
        }
        Suite::ZerosInterlace => {
            let r = interlacing_check(params, 8, &[0.3, 0.7, 1.0], 1e-40)?;
            let mut out = result(
                suite,
                params,
                r.equality_deviation,
                1e-25,
                format!("{} inequalities, {} violated", r.checked, r.violations.len()),
            );
            out.pass &= r.holds();
            if let Some(v) = r.violations.first() {
                out.detail.push_str(&format!("; first: {v}"));
            }
            Ok(out)
        }
        Suite::ZerosBounds => {
            let table = RecurrenceTable::from_hankel(params, 20)?;
            let mut ok = true;
            let mut margin = f64::INFINITY;
            for n in 2..=20 {
                let b = extreme_zero_bound(&table, n, 1e-8)?;
                ok &= b.ok;
                margin = margin.min(((&b.bound - &b.largest) / &b.bound).to_f64());
            }
            let tol_z = 1e-40;
            let mut worst = 0f64;
            for n in [8, 15] {
                for z in zeros(&table, n, tol_z)?.zeros {
                    let (p, dp, _) = eval_with_derivatives(&table, n, &z)?;
                    worst = worst.max((p.abs() / dp.abs()).to_f64() / tol_z);
                }
            }
            let lam = params.lambda_f64();
            let t = params.t_f64();
            let mono_l = monotonicity_check(params, 6, Direction::Lambda, &[lam, lam + 0.25, lam + 0.5])?;
            let mono_t = monotonicity_check(params, 6, Direction::T, &[t - 0.25, t, t + 0.25])?;
            let mut out = result(
                suite,
                params,
                worst,
                1.0,
                format!(
                    "extreme bound n <= 20 {} (smallest relative margin {margin:.3e}); monotone in lambda {}, in t {}",
                    if ok { "holds" } else { "fails" },
                    mono_l.holds(),
                    mono_t.holds()
                ),
            );
            out.pass &= ok && mono_l.holds() && mono_t.holds();
            Ok(out)
        }
        Suite::Density => {
            let law = DensityLaw::new(params.m(), 1.0, 192)?;
            let mass = (law.total_mass(1e-25)?.to_f64() - 1.0).abs();
            let mut forms = 0f64;
            let scale = law.density(&BigReal::zero(192))?;
            for i in 1..=50 {
                let x = &law.c * (-0.98 + 1.96 * i as f64 / 51.0);
                let d = law.density(&x)? - law.density_series_form(&x)?;
                forms = forms.max((d / &scale).abs().to_f64());
            }
            let k10 = scaled_zero_compare(params, 10, 10)?.distance;
            let k40 = scaled_zero_compare(params, 40, 40)?.distance;
            let mut out = result(
                suite,
                params,
                forms,
                1e-25,
                format!("mass error {mass:.3e}; Kolmogorov distance n=10: {k10:.4}, n=40: {k40:.4}"),
            );
            out.pass &= mass <= 1e-15 && k40 < k10;
            Ok(out)
        }
    }
}

/// Runs the selected suites at every m. A suite that errors is reported as a
/// failure with the error text; only invalid parameters abort the run.
pub fn run_suites(suites: &[Suite], ms: &[u32], t: &Rational, lambda: &Rational, bits: u32) -> Result<Vec<SuiteResult>> {
    let mut out = Vec::new();
    for &m in ms {
        let params = WeightParams::from_exact(m, t.clone(), lambda.clone(), bits)?;
        for &suite in suites {
            out.push(run_suite(suite, &params).unwrap_or_else(|e| SuiteResult {
                suite: suite.name(),
                m,
                pass: false,
                max_residual: f64::NAN,
                tolerance: f64::NAN,
                detail: format!("{}: {e}", e.kind()),
            }));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        assert_eq!(Suite::select(&["all"]).unwrap().len(), 12);
        assert_eq!(Suite::select(&["mixed", "string", "mixed"]).unwrap(), vec![Suite::String, Suite::Mixed]);
        assert!(Suite::select::<&str>(&[]).is_err());
        assert!(Suite::select(&[""]).is_err());
        assert!(Suite::select(&["nope"]).is_err());
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()).unwrap(), s);
        }
    }

    #[test]
    fn fast_suites_pass() {
        let p = WeightParams::new(2, 0.5, 0.5, 256).unwrap();
        for s in [Suite::MomentsOde, Suite::HankelParity, Suite::String, Suite::Structure, Suite::Mixed] {
            let r = run_suite(s, &p).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }
}
