//! The full verification suite behind `hecke verify-all`.

use std::time::Instant;

use serde::Serialize;

use crate::envelope::{
    envelope_coefficients, exponent_table, exponents, optimize_parameters, rho_from_coefficients,
    verify_envelope, Family,
};
use crate::error::Result;
use crate::hecke::{build_coefficient_table, Backend, CoefficientTable};
use crate::lfunctions::{
    decomposition_residual, power_to_trace_basis, trace_polynomial, IntPolynomial,
};
use crate::sums::{
    default_checkpoints, fit_exponent, power_sum_series, sandwich_check, sato_tate_stats,
    sign_count_diagnostic, sign_count_exponent, signed_sum_ratio,
};

/// Rounded exponent table for `r = 0, 0.5, ..., 4`, one row per exponent in
/// the order `delta^-, rho^-, theta, rho^+, delta^+`. Every entry is the
/// closed form rounded to four decimals.
pub const REFERENCE_TABLE: [[f64; 9]; 5] = [
    [-0.5, -0.2929, 0.0, 0.4142, 1.0, 1.8284, 3.0, 4.6569, 7.0],
    [
        -0.3333, -0.2113, 0.0, 0.3660, 1.0, 2.0981, 4.0, 7.2942, 13.0,
    ],
    [0.0, -0.1512, 0.0, 0.3581, 1.0, 2.1043, 4.0, 7.2781, 13.0],
    [0.0, -0.1185, 0.0, 0.3502, 1.0, 2.1115, 4.0, 7.2576, 13.0],
    [
        0.0, -0.0652, 0.0, 0.2899, 1.0, 2.5266, 5.6667, 12.0177, 24.7778,
    ],
];

pub const REFERENCE_R: [f64; 9] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];

/// Scales for the suite.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifyConfig {
    pub max_x: usize,
    pub grid: usize,
    pub depth: usize,
    pub bins: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_x: 1_000_000,
            grid: 100_000,
            depth: 6,
            bins: 50,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn timed(
    id: u32,
    name: &'static str,
    f: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn exponent_table_check() -> CriterionResult {
    timed(1, "exponent table", || {
        let rows = exponent_table(&REFERENCE_R);
        let mut worst = 0.0f64;
        for (i, row) in rows.iter().enumerate() {
            for (k, v) in row.values().iter().enumerate() {
                worst = worst.max((v - REFERENCE_TABLE[k][i]).abs());
            }
        }
        Ok((
            worst <= 5e-5,
            format!("45 entries, max deviation {worst:.1e}"),
        ))
    })
}

pub fn integer_coincidences() -> CriterionResult {
    timed(2, "integer coincidences", || {
        let mut worst = 0.0f64;
        for (r, want) in [(1.0, 0.0), (2.0, 1.0), (3.0, 4.0), (4.0, 13.0)] {
            let e = exponents(r);
            for v in [e.rho_minus, e.theta, e.rho_plus] {
                worst = worst.max((v - want).abs());
            }
            for family in [Family::Minus, Family::Plus] {
                let c = envelope_coefficients(r, family)?;
                worst = worst.max((rho_from_coefficients(&c) - want).abs());
            }
        }
        Ok((worst <= 1e-10, format!("max deviation {worst:.1e}")))
    })
}

pub const ENVELOPE_R: [f64; 7] = [0.1, 0.5, 0.9, 1.5, 2.5, 3.5, 5.0];

pub fn envelope_validity(grid: usize) -> CriterionResult {
    timed(3, "envelope validity", || {
        let mut ok = true;
        let (mut worst_value, mut worst_deriv) = (0.0f64, 0.0f64);
        let mut failures = Vec::new();
        for r in ENVELOPE_R {
            for family in [Family::Minus, Family::Plus] {
                let rep = verify_envelope(r, family, grid)?;
                let res = envelope_coefficients(r, family)?.constraint_residuals();
                worst_value = worst_value.max(res.value);
                worst_deriv = worst_deriv.max(res.derivative);
                if !rep.passed {
                    failures.push(format!("{}@{r}", family.name()));
                }
                ok &= rep.passed;
            }
        }
        ok &= worst_value <= 1e-10 && worst_deriv <= 1e-5;
        Ok((
            ok,
            format!(
                "14 envelopes on {grid} points, constraint residuals {worst_value:.1e} / {worst_deriv:.1e}{}",
                if failures.is_empty() {
                    String::new()
                } else {
                    format!(", failing {}", failures.join(" "))
                }
            ),
        ))
    })
}

pub fn exponent_consistency() -> CriterionResult {
    timed(4, "exponent consistency", || {
        let mut worst = 0.0f64;
        for i in 1..=50 {
            let r = 6.0 * i as f64 / 50.0;
            let e = exponents(r);
            let minus = rho_from_coefficients(&envelope_coefficients(r, Family::Minus)?);
            let plus = rho_from_coefficients(&envelope_coefficients(r, Family::Plus)?);
            worst = worst
                .max((minus - e.rho_minus).abs())
                .max((plus - e.rho_plus).abs());
        }
        Ok((
            worst <= 1e-9,
            format!("50 values of r, max deviation {worst:.1e}"),
        ))
    })
}

pub fn oracle_equivalence() -> CriterionResult {
    timed(5, "oracle equivalence", || {
        let fast = build_coefficient_table(5000, Backend::Fast)?;
        let oracle = build_coefficient_table(5000, Backend::Oracle)?;
        let mismatches = fast
            .taus()
            .iter()
            .zip(oracle.taus())
            .filter(|(a, b)| a != b)
            .count();
        Ok((
            mismatches == 0,
            format!("n <= 5000, {mismatches} mismatches"),
        ))
    })
}

pub fn hecke_deligne(table: &CoefficientTable) -> CriterionResult {
    timed(6, "Hecke relations and Deligne bound", || {
        let rep = table.check_hecke_identities(300)?;
        let deligne = table.deligne_exact(table.bound())?;
        Ok((
            rep.max_hecke_residual <= 1e-9 && deligne.passed(),
            format!(
                "Hecke residual {:.1e} (m, n <= 300), exact bound on n <= {}: {} violations",
                rep.max_hecke_residual,
                deligne.checked,
                deligne.violations.len()
            ),
        ))
    })
}

pub fn trace_identities() -> CriterionResult {
    timed(7, "trace identities", || {
        let polys: [&[i64]; 5] = [
            &[1],
            &[-1, 0, 1],
            &[1, 0, -3, 0, 1],
            &[-1, 0, 6, 0, -5, 0, 1],
            &[1, 0, -10, 0, 15, 0, -7, 0, 1],
        ];
        let rows: [&[i64]; 4] = [&[1, 1], &[2, 3, 1], &[5, 9, 5, 1], &[14, 28, 20, 7, 1]];
        let mut ok = true;
        for (i, want) in polys.iter().enumerate() {
            ok &= trace_polynomial(2 * i)? == IntPolynomial::new(want.to_vec());
        }
        for (j, want) in rows.iter().enumerate() {
            let row = power_to_trace_basis(j + 1)?;
            ok &= row == want.to_vec();
            // at x = 2 every T_{2i} equals 2i + 1
            let at_two: i64 = row
                .iter()
                .enumerate()
                .map(|(i, c)| c * (2 * i as i64 + 1))
                .sum();
            ok &= at_two == 4i64.pow(j as u32 + 1);
        }
        Ok((
            ok,
            "trace polynomials up to degree 8, power rows j = 1..4".into(),
        ))
    })
}

pub fn local_decomposition(table: &CoefficientTable, depth: usize) -> CriterionResult {
    timed(8, "local decomposition", || {
        let mut worst = 0.0f64;
        for p in table.sieve().primes().take_while(|&p| p <= 100) {
            let theta = table.prime_local_data(p as u64)?.theta_p;
            for j in 1..=4 {
                let res = decomposition_residual(theta, j, depth)?;
                worst = worst.max(res.coeff(1).abs());
            }
        }
        Ok((
            worst <= 1e-9,
            format!("p <= 100, j = 1..4, depth {depth}: max degree-1 residual {worst:.1e}"),
        ))
    })
}

pub const SANDWICH_R: [f64; 4] = [0.5, 1.5, 2.5, 3.5];
pub const SANDWICH_TERMWISE_LIMIT: u64 = 10_000;

pub fn sandwich(table: &CoefficientTable) -> CriterionResult {
    timed(9, "sandwich", || {
        let cps = default_checkpoints(table.bound() as u64);
        let mut ok = true;
        let mut parts = Vec::new();
        for r in SANDWICH_R {
            let rep = sandwich_check(table, r, &cps)?;
            let termwise_ok = rep
                .first_violation
                .map_or(true, |n| n > SANDWICH_TERMWISE_LIMIT);
            ok &= termwise_ok && rep.summatory_ordered;
            parts.push(format!(
                "r={r}: first violation {}, ordered {}",
                rep.first_violation
                    .map_or("none".to_string(), |n| n.to_string()),
                rep.summatory_ordered
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}

pub const FIT_RANGE: (u64, u64) = (10_000, 1_000_000);

pub fn growth_fits(table: &CoefficientTable) -> CriterionResult {
    timed(10, "growth fits", || {
        let cps = default_checkpoints(table.bound() as u64);
        let s1 = power_sum_series(table, 1.0, &cps)?.restrict(FIT_RANGE.0, FIT_RANGE.1);
        let s2 = power_sum_series(table, 2.0, &cps)?.restrict(FIT_RANGE.0, FIT_RANGE.1);
        let f1 = fit_exponent(&s1)?;
        let f2 = fit_exponent(&s2)?;
        Ok((
            (-0.15..=0.15).contains(&f1.rho_hat) && (0.6..=1.4).contains(&f2.rho_hat),
            format!(
                "rho_hat(1) = {:.4}, rho_hat(2) = {:.4}",
                f1.rho_hat, f2.rho_hat
            ),
        ))
    })
}

pub const KS_THRESHOLD: f64 = 0.05;

pub fn sato_tate(table: &CoefficientTable, bins: usize) -> CriterionResult {
    timed(11, "Sato-Tate distribution", || {
        let rep = sato_tate_stats(table, table.bound(), bins)?;
        Ok((
            rep.ks <= KS_THRESHOLD,
            format!("{} primes, KS distance {:.4}", rep.primes, rep.ks),
        ))
    })
}

pub fn sign_diagnostics(table: &CoefficientTable) -> CriterionResult {
    timed(12, "signed-sum and sign-count diagnostics", || {
        let x = table.bound() as u64;
        let cps = default_checkpoints(x);
        let ratios = signed_sum_ratio(table, &cps)?;
        let finite = ratios.iter().all(|(_, v)| v.is_finite());
        let max_ratio = ratios.iter().map(|p| p.1).fold(0.0, f64::max);
        let cor = sign_count_diagnostic(table, &cps)?;
        let last = cor.rows.last().unwrap();
        let xf = x as f64;
        let floor = 0.3 * xf / xf.ln().powf(0.423);
        let floors_ok = last.n_plus as f64 >= floor && last.n_minus as f64 >= floor;
        Ok((
            finite && cor.holds && floors_ok,
            format!(
                "max ratio {max_ratio:.4}, Cauchy-Schwarz {}, N+ = {}, N- = {}, floor {floor:.0}, normalized {:.4} / {:.4} (exponent {:.4})",
                cor.holds,
                last.n_plus,
                last.n_minus,
                last.normalized_plus,
                last.normalized_minus,
                sign_count_exponent()
            ),
        ))
    })
}

pub const OPTIMIZER_STEP: f64 = 1e-3;

pub fn optimizer() -> CriterionResult {
    timed(13, "contact-point optimizer", || {
        let minus = optimize_parameters(0.5, Family::Minus, OPTIMIZER_STEP)?;
        let plus = optimize_parameters(0.5, Family::Plus, OPTIMIZER_STEP)?;
        let close = |p: &crate::envelope::OptimizedParams, k: f64, e: f64| {
            (p.kappa - k).abs() <= 2e-3 && (p.eta - e).abs() <= 2e-3
        };
        Ok((
            close(&minus, 0.25, 0.75) && close(&plus, 0.070871, 0.529129),
            format!(
                "minus ({:.3}, {:.3}), plus ({:.3}, {:.3})",
                minus.kappa, minus.eta, plus.kappa, plus.eta
            ),
        ))
    })
}

/// Run criteria 1 to 13 on a fast table of size `config.max_x`.
pub fn run_all(config: &VerifyConfig) -> Result<Vec<CriterionResult>> {
    let table = build_coefficient_table(config.max_x, Backend::Fast)?;
    Ok(run_with_table(&table, config))
}

pub fn run_with_table(table: &CoefficientTable, config: &VerifyConfig) -> Vec<CriterionResult> {
    vec![
        exponent_table_check(),
        integer_coincidences(),
        envelope_validity(config.grid),
        exponent_consistency(),
        oracle_equivalence(),
        hecke_deligne(table),
        trace_identities(),
        local_decomposition(table, config.depth),
        sandwich(table),
        growth_fits(table),
        sato_tate(table, config.bins),
        sign_diagnostics(table),
        optimizer(),
    ]
}
