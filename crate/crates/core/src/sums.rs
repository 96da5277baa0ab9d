//! Summatory functions of Hecke eigenvalues and desk-scale diagnostics.
//!
//! Every series is evaluated on a list of checkpoints. The summands between
//! consecutive checkpoints are reduced independently (pairwise) and then
//! accumulated in order, so results do not depend on the thread count.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::{
    envelope_coefficients, in_minus_region, in_plus_region, rho_plus_closed, Family,
};
use crate::error::{Error, Result};
use crate::hecke::CoefficientTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SeriesKind {
    PowerSum(f64),
    SignedSum,
    SignCountPlus,
    SignCountMinus,
    EnvelopeLower(f64),
    EnvelopeUpper(f64),
}

/// Values of a summatory function at ascending checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumSeries {
    pub kind: SeriesKind,
    pub checkpoints: Vec<u64>,
    pub values: Vec<f64>,
}

impl SumSeries {
    /// The sub-series with `lo <= x <= hi`.
    pub fn restrict(&self, lo: u64, hi: u64) -> SumSeries {
        let (checkpoints, values) = self
            .checkpoints
            .iter()
            .zip(&self.values)
            .filter(|(&x, _)| lo <= x && x <= hi)
            .map(|(&x, &v)| (x, v))
            .unzip();
        SumSeries {
            kind: self.kind,
            checkpoints,
            values,
        }
    }

    pub fn last(&self) -> Option<(u64, f64)> {
        Some((*self.checkpoints.last()?, *self.values.last()?))
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// CSV with header `x,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.checkpoints.iter().zip(&self.values) {
            out.push_str(&format!("{x},{v:e}\n"));
        }
        out
    }
}

/// Geometric checkpoints `10^2, 10^{2 + 1/per_decade}, ...` up to `max`,
/// rounded to integers, with `max` itself appended.
pub fn geometric_checkpoints(max: u64, per_decade: u32) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let x = 10f64.powf(2.0 + k as f64 / per_decade as f64).round() as u64;
        if x > max {
            break;
        }
        if out.last() != Some(&x) {
            out.push(x);
        }
        k += 1;
    }
    if out.last() != Some(&max) {
        out.push(max);
    }
    out
}

/// Checkpoint grid used by the CLI: quarter-decade steps from 100.
pub fn default_checkpoints(max: u64) -> Vec<u64> {
    geometric_checkpoints(max, 4)
}

fn validate_checkpoints(table: &CoefficientTable, checkpoints: &[u64]) -> Result<()> {
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidCheckpoints);
    }
    let max = *checkpoints.last().unwrap();
    if max > table.bound() as u64 {
        return Err(Error::BoundExceeded {
            what: "checkpoint",
            value: max,
            limit: table.bound() as u64,
        });
    }
    Ok(())
}

/// Pairwise sum, so rounding does not depend on how work is split.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Prefix sums of `term(n)` at each checkpoint.
fn cumulative<F>(checkpoints: &[u64], term: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync,
{
    let segments: Vec<(usize, usize)> = checkpoints
        .iter()
        .scan(1usize, |start, &x| {
            let seg = (*start, x as usize);
            *start = x as usize + 1;
            Some(seg)
        })
        .collect();
    let partial: Vec<f64> = segments
        .par_iter()
        .map(|&(lo, hi)| {
            let terms: Vec<f64> = (lo..=hi).map(&term).collect();
            pairwise_sum(&terms)
        })
        .collect();
    partial
        .iter()
        .scan(0.0, |acc, &s| {
            *acc += s;
            Some(*acc)
        })
        .collect()
}

/// `|lambda|^{2r}`, with `0^0 = 0` so that `r = 0` counts nonvanishing terms.
#[inline]
fn abs_power(lambda: f64, tau_is_zero: bool, r: f64) -> f64 {
    if tau_is_zero {
        0.0
    } else if r == 0.0 {
        1.0
    } else {
        lambda.abs().powf(2.0 * r)
    }
}

/// `S*(x; r) = sum_{n <= x} |lambda(n)|^{2r}`.
pub fn power_sum_series(
    table: &CoefficientTable,
    r: f64,
    checkpoints: &[u64],
) -> Result<SumSeries> {
    if !(r >= 0.0) {
        return Err(Error::OutOfRange {
            what: "r",
            value: r,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    validate_checkpoints(table, checkpoints)?;
    let lam = table.lambdas();
    let taus = table.taus();
    let values = cumulative(checkpoints, |n| abs_power(lam[n], taus[n - 1] == 0, r));
    Ok(SumSeries {
        kind: SeriesKind::PowerSum(r),
        checkpoints: checkpoints.to_vec(),
        values,
    })
}

/// `S(x) = sum_{n <= x} lambda(n)`.
pub fn signed_sum_series(table: &CoefficientTable, checkpoints: &[u64]) -> Result<SumSeries> {
    validate_checkpoints(table, checkpoints)?;
    let lam = table.lambdas();
    Ok(SumSeries {
        kind: SeriesKind::SignedSum,
        checkpoints: checkpoints.to_vec(),
        values: cumulative(checkpoints, |n| lam[n]),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SignCounts {
    pub plus: SumSeries,
    pub minus: SumSeries,
    pub zeros: Vec<u64>,
}

/// Counts of `n <= x` with `tau(n) > 0`, `< 0` and `= 0` (exact sign test).
pub fn sign_counts(table: &CoefficientTable, checkpoints: &[u64]) -> Result<SignCounts> {
    validate_checkpoints(table, checkpoints)?;
    let taus = table.taus();
    let (mut plus, mut minus, mut zeros) = (Vec::new(), Vec::new(), Vec::new());
    let (mut p, mut m, mut z) = (0u64, 0u64, 0u64);
    let mut n = 1usize;
    for &x in checkpoints {
        while n <= x as usize {
            match taus[n - 1].signum() {
                1 => p += 1,
                -1 => m += 1,
                _ => z += 1,
            }
            n += 1;
        }
        plus.push(p as f64);
        minus.push(m as f64);
        zeros.push(z);
    }
    Ok(SignCounts {
        plus: SumSeries {
            kind: SeriesKind::SignCountPlus,
            checkpoints: checkpoints.to_vec(),
            values: plus,
        },
        minus: SumSeries {
            kind: SeriesKind::SignCountMinus,
            checkpoints: checkpoints.to_vec(),
            values: minus,
        },
        zeros,
    })
}

/// Lower or upper envelope of `|lambda(n)|^{2r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Role {
    Lower,
    Upper,
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "lower" => Ok(Role::Lower),
            "upper" => Ok(Role::Upper),
            other => Err(format!("unknown role `{other}` (expected lower or upper)")),
        }
    }
}

/// The envelope family playing `role` at `r`. On the shared boundary
/// `r = 1, 2, 3, 4` the minus family is the lower one.
pub fn family_for(role: Role, r: f64) -> Family {
    let lower = Family::minorant_for(r);
    match role {
        Role::Lower => lower,
        Role::Upper => lower.other(),
    }
}

/// Termwise values `lambda_role(n)` for `n <= limit` (index 0 unused).
///
/// Multiplicative, with prime values from the envelope polynomial. At
/// higher prime powers the minorant vanishes and the majorant equals
/// `|lambda(p^nu)|^{2r}`.
pub fn envelope_terms(
    table: &CoefficientTable,
    r: f64,
    role: Role,
    limit: usize,
) -> Result<Vec<f64>> {
    if !(r > 0.0) {
        return Err(Error::NonpositiveR(r));
    }
    if !(in_minus_region(r) || in_plus_region(r)) {
        unreachable!("the two regions cover [0, inf)");
    }
    if limit > table.bound() {
        return Err(Error::BoundExceeded {
            what: "envelope limit",
            value: limit as u64,
            limit: table.bound() as u64,
        });
    }
    let coeffs = envelope_coefficients(r, family_for(role, r))?;
    let lam = table.lambdas();
    let taus = table.taus();
    let sieve = table.sieve();
    let mut vals = vec![0.0; limit + 1];
    if limit >= 1 {
        vals[1] = 1.0;
    }
    for n in 2..=limit {
        let (p, nu, rest) = sieve.split(n);
        let local = if nu == 1 {
            coeffs.at_prime(lam[p])
        } else {
            match role {
                Role::Lower => 0.0,
                Role::Upper => {
                    let q = n / rest;
                    abs_power(lam[q], taus[q - 1] == 0, r)
                }
            }
        };
        vals[n] = local * vals[rest];
    }
    Ok(vals)
}

/// `sum_{n <= x} lambda_role(n)` at each checkpoint.
pub fn envelope_summatory(
    table: &CoefficientTable,
    r: f64,
    role: Role,
    checkpoints: &[u64],
) -> Result<SumSeries> {
    validate_checkpoints(table, checkpoints)?;
    let terms = envelope_terms(table, r, role, *checkpoints.last().unwrap() as usize)?;
    let kind = match role {
        Role::Lower => SeriesKind::EnvelopeLower(r),
        Role::Upper => SeriesKind::EnvelopeUpper(r),
    };
    Ok(SumSeries {
        kind,
        checkpoints: checkpoints.to_vec(),
        values: cumulative(checkpoints, |n| terms[n]),
    })
}

/// Slack allowed in the termwise sandwich.
pub const SANDWICH_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub r: f64,
    pub lower_family: Family,
    /// min over n of `|lambda(n)|^{2r} - lower(n)`
    pub worst_lower_margin: f64,
    pub worst_lower_n: u64,
    /// min over n of `upper(n) - |lambda(n)|^{2r}`
    pub worst_upper_margin: f64,
    pub worst_upper_n: u64,
    pub lower_violations: usize,
    pub upper_violations: usize,
    /// up to 20 violating `n`
    pub violating_n: Vec<u64>,
    pub first_violation: Option<u64>,
    /// lower <= power sum <= upper at every checkpoint
    pub summatory_ordered: bool,
    pub lower: SumSeries,
    pub power: SumSeries,
    pub upper: SumSeries,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.lower_violations == 0 && self.upper_violations == 0 && self.summatory_ordered
    }
}

/// Termwise check `lower(n) <= |lambda(n)|^{2r} <= upper(n)` for every
/// `n <= max checkpoint`, plus the summatory ordering at each checkpoint.
pub fn sandwich_check(
    table: &CoefficientTable,
    r: f64,
    checkpoints: &[u64],
) -> Result<SandwichReport> {
    validate_checkpoints(table, checkpoints)?;
    let limit = *checkpoints.last().unwrap() as usize;
    let lower = envelope_terms(table, r, Role::Lower, limit)?;
    let upper = envelope_terms(table, r, Role::Upper, limit)?;
    let lam = table.lambdas();
    let taus = table.taus();

    let mut worst_lower = (f64::INFINITY, 0u64);
    let mut worst_upper = (f64::INFINITY, 0u64);
    let (mut lower_violations, mut upper_violations) = (0, 0);
    let mut violating_n = Vec::new();
    for n in 1..=limit {
        let v = abs_power(lam[n], taus[n - 1] == 0, r);
        let lo_margin = v - lower[n];
        let up_margin = upper[n] - v;
        if lo_margin < worst_lower.0 {
            worst_lower = (lo_margin, n as u64);
        }
        if up_margin < worst_upper.0 {
            worst_upper = (up_margin, n as u64);
        }
        let bad_lo = lo_margin < -SANDWICH_SLACK;
        let bad_up = up_margin < -SANDWICH_SLACK;
        lower_violations += bad_lo as usize;
        upper_violations += bad_up as usize;
        if (bad_lo || bad_up) && violating_n.len() < 20 {
            violating_n.push(n as u64);
        }
    }

    let lower_s = SumSeries {
        kind: SeriesKind::EnvelopeLower(r),
        checkpoints: checkpoints.to_vec(),
        values: cumulative(checkpoints, |n| lower[n]),
    };
    let upper_s = SumSeries {
        kind: SeriesKind::EnvelopeUpper(r),
        checkpoints: checkpoints.to_vec(),
        values: cumulative(checkpoints, |n| upper[n]),
    };
    let power = power_sum_series(table, r, checkpoints)?;
    let summatory_ordered = (0..checkpoints.len()).all(|i| {
        let slack = SANDWICH_SLACK * checkpoints[i] as f64;
        lower_s.values[i] <= power.values[i] + slack && power.values[i] <= upper_s.values[i] + slack
    });

    Ok(SandwichReport {
        r,
        lower_family: family_for(Role::Lower, r),
        worst_lower_margin: worst_lower.0,
        worst_lower_n: worst_lower.1,
        worst_upper_margin: worst_upper.0,
        worst_upper_n: worst_upper.1,
        lower_violations,
        upper_violations,
        first_violation: violating_n.first().copied(),
        violating_n,
        summatory_ordered,
        lower: lower_s,
        power,
        upper: upper_s,
    })
}

/// Least-squares fit of `log(S(x)/x) = rho log log x + c`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitResult {
    pub rho_hat: f64,
    pub intercept: f64,
    /// max absolute regression residual
    pub residual: f64,
}

/// Fit the growth exponent over the checkpoints with `x >= 100`.
pub fn fit_exponent(series: &SumSeries) -> Result<FitResult> {
    let mut pts = Vec::new();
    for (&x, &v) in series.checkpoints.iter().zip(&series.values) {
        if x < 100 {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::NonpositiveValue { x, value: v });
        }
        let xf = x as f64;
        pts.push((xf.ln().ln(), (v / xf).ln()));
    }
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} checkpoints with x >= 100, need at least 5",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mean_z = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_z).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_z) * (p.1 - mean_y)).sum();
    let rho_hat = sxy / sxx;
    let intercept = mean_y - rho_hat * mean_z;
    let residual = pts
        .iter()
        .map(|&(z, y)| (y - rho_hat * z - intercept).abs())
        .fold(0.0, f64::max);
    Ok(FitResult {
        rho_hat,
        intercept,
        residual,
    })
}

/// `|S(x)| / (x^{1/3} (log x)^{rho_{1/2}^+})` at each checkpoint.
pub fn signed_sum_ratio(table: &CoefficientTable, checkpoints: &[u64]) -> Result<Vec<(u64, f64)>> {
    if let Some(&x) = checkpoints.iter().find(|&&x| x < 2) {
        return Err(Error::OutOfRange {
            what: "checkpoint",
            value: x as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    let s = signed_sum_series(table, checkpoints)?;
    let rho = rho_plus_closed(0.5);
    Ok(s.checkpoints
        .iter()
        .zip(&s.values)
        .map(|(&x, &v)| {
            let xf = x as f64;
            (x, v.abs() / (xf.cbrt() * xf.ln().powf(rho)))
        })
        .collect())
}

/// The exponent `1 - 1/sqrt(3)` in the sign-count lower bound.
pub fn sign_count_exponent() -> f64 {
    1.0 - 1.0 / 3f64.sqrt()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SignCountRow {
    pub x: u64,
    /// sum of |lambda(n)| over n <= x with lambda(n) > 0
    pub a_plus: f64,
    pub a_minus: f64,
    /// S*(x; 1)
    pub b: f64,
    pub n_plus: u64,
    pub n_minus: u64,
    /// (A^+)^2 / B, a lower bound for N^+
    pub cs_bound_plus: f64,
    pub cs_bound_minus: f64,
    /// N^+ (log x)^{1 - 1/sqrt 3} / x
    pub normalized_plus: f64,
    pub normalized_minus: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SignCountReport {
    pub rows: Vec<SignCountRow>,
    /// Cauchy–Schwarz holds at every checkpoint
    pub holds: bool,
}

pub fn sign_count_diagnostic(
    table: &CoefficientTable,
    checkpoints: &[u64],
) -> Result<SignCountReport> {
    validate_checkpoints(table, checkpoints)?;
    let lam = table.lambdas();
    let taus = table.taus();
    let a_plus = cumulative(checkpoints, |n| {
        if taus[n - 1] > 0 {
            lam[n].abs()
        } else {
            0.0
        }
    });
    let a_minus = cumulative(checkpoints, |n| {
        if taus[n - 1] < 0 {
            lam[n].abs()
        } else {
            0.0
        }
    });
    let b = power_sum_series(table, 1.0, checkpoints)?;
    let counts = sign_counts(table, checkpoints)?;
    let e = sign_count_exponent();
    let mut holds = true;
    let rows = checkpoints
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let xf = x as f64;
            let (np, nm) = (counts.plus.values[i], counts.minus.values[i]);
            let row = SignCountRow {
                x,
                a_plus: a_plus[i],
                a_minus: a_minus[i],
                b: b.values[i],
                n_plus: np as u64,
                n_minus: nm as u64,
                cs_bound_plus: a_plus[i] * a_plus[i] / b.values[i],
                cs_bound_minus: a_minus[i] * a_minus[i] / b.values[i],
                normalized_plus: np * xf.ln().powf(e) / xf,
                normalized_minus: nm * xf.ln().powf(e) / xf,
            };
            holds &= row.cs_bound_plus <= np + 1e-9 && row.cs_bound_minus <= nm + 1e-9;
            row
        })
        .collect();
    Ok(SignCountReport { rows, holds })
}

/// CDF of the Sato–Tate measure `(2/pi) sin^2(theta) d theta` on `[0, pi]`.
pub fn sato_tate_cdf(theta: f64) -> f64 {
    (theta - theta.sin() * theta.cos()) / PI
}

/// Kolmogorov–Smirnov distance between the empirical law of `angles` and
/// the Sato–Tate measure.
pub fn ks_distance_sato_tate(angles: &[f64]) -> f64 {
    let mut sorted = angles.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = sato_tate_cdf(t);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct SatoTateReport {
    pub primes: usize,
    pub bins: usize,
    /// counts of theta_p in `[k pi / bins, (k+1) pi / bins)`
    pub histogram: Vec<u64>,
    /// expected counts under the Sato–Tate measure
    pub expected: Vec<f64>,
    pub ks: f64,
}

/// Histogram of the angles `theta_p` for primes `p <= x` and their KS
/// distance to the Sato–Tate law.
pub fn sato_tate_stats(table: &CoefficientTable, x: usize, bins: usize) -> Result<SatoTateReport> {
    if bins < 10 {
        return Err(Error::OutOfRange {
            what: "bins",
            value: bins as f64,
            lo: 10.0,
            hi: f64::INFINITY,
        });
    }
    if x > table.bound() {
        return Err(Error::BoundExceeded {
            what: "X",
            value: x as u64,
            limit: table.bound() as u64,
        });
    }
    let angles = table
        .sieve()
        .primes()
        .take_while(|&p| p <= x)
        .map(|p| table.prime_local_data(p as u64).map(|d| d.theta_p))
        .collect::<Result<Vec<_>>>()?;
    let mut histogram = vec![0u64; bins];
    for &t in &angles {
        let k = ((t / PI) * bins as f64).floor() as usize;
        histogram[k.min(bins - 1)] += 1;
    }
    let expected = (0..bins)
        .map(|k| {
            let lo = PI * k as f64 / bins as f64;
            let hi = PI * (k + 1) as f64 / bins as f64;
            angles.len() as f64 * (sato_tate_cdf(hi) - sato_tate_cdf(lo))
        })
        .collect();
    Ok(SatoTateReport {
        primes: angles.len(),
        bins,
        histogram,
        expected,
        ks: ks_distance_sato_tate(&angles),
    })
}
