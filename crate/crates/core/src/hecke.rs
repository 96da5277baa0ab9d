//! Exact Fourier coefficients of the discriminant newform and the derived
//! normalized Hecke eigenvalues.
//!
//! `tau(n)` is stored exactly as `i128`; the normalized eigenvalue is
//! `lambda(n) = tau(n) / n^{11/2}`, which is multiplicative, satisfies the
//! Hecke relation and Deligne's bound `|lambda(n)| <= d(n)`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize, gcd, Sieve};
use crate::error::{Error, Result};
use crate::series;

/// Largest table bound for the NTT backend. Up to here
/// `|tau(n)| <= d(n) n^{11/2} < 2^127`.
pub const FAST_CAP: usize = 3_000_000;
/// Largest table bound for the quadratic-time oracle backend.
pub const ORACLE_CAP: usize = 10_000;

/// A holomorphic newform, identified by weight and level. Only the
/// discriminant form (weight 12, level 1) is supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FormSpec {
    weight: u32,
    level: u32,
}

impl FormSpec {
    pub fn new(weight: u32, level: u32) -> Result<Self> {
        if weight != 12 || level != 1 {
            return Err(Error::UnsupportedForm { weight, level });
        }
        Ok(FormSpec { weight, level })
    }

    pub fn delta() -> Self {
        FormSpec {
            weight: 12,
            level: 1,
        }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// The exponent `(k - 1) / 2` in `a_f(n) = lambda_f(n) n^{(k-1)/2}`.
    pub fn normalizing_exponent(&self) -> f64 {
        (self.weight as f64 - 1.0) / 2.0
    }
}

impl Default for FormSpec {
    fn default() -> Self {
        Self::delta()
    }
}

/// How to compute the coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Backend {
    /// Sparse eta cube squared three times with multi-prime NTTs.
    Fast,
    /// Direct multiplication by `(1 - q^m)` factors.
    Oracle,
}

impl Backend {
    pub fn cap(self) -> usize {
        match self {
            Backend::Fast => FAST_CAP,
            Backend::Oracle => ORACLE_CAP,
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fast" => Ok(Backend::Fast),
            "oracle" => Ok(Backend::Oracle),
            other => Err(format!(
                "unknown backend `{other}` (expected fast or oracle)"
            )),
        }
    }
}

/// Where a table's coefficients came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Fast,
    Oracle,
    Cache,
}

impl From<Backend> for Provenance {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Fast => Provenance::Fast,
            Backend::Oracle => Provenance::Oracle,
        }
    }
}

/// Exact coefficients `tau(1..=X)` with normalized eigenvalues and sieve data.
///
/// Immutable after construction; share it freely across threads.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    spec: FormSpec,
    /// `raw[n] = tau(n)`; `raw[0]` is unused and zero.
    raw: Vec<i128>,
    lambda: Vec<f64>,
    sieve: Sieve,
    provenance: Provenance,
}

/// Local data of the form at an unramified prime.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PrimeLocalData {
    pub p: u64,
    pub lambda_p: f64,
    /// Angle in `[0, pi]` with `lambda_p = 2 cos(theta_p)`.
    pub theta_p: f64,
    #[serde(skip)]
    pub alpha: Complex64,
    #[serde(skip)]
    pub beta: Complex64,
}

/// Maxima returned by [`CoefficientTable::check_hecke_identities`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HeckeReport {
    pub m: usize,
    /// max |lambda(m) lambda(n) - sum_{d | (m,n)} lambda(mn/d^2)|
    pub max_hecke_residual: f64,
    /// max (|lambda(n)| - d(n)); nonpositive when Deligne's bound holds
    pub max_deligne_excess: f64,
    /// max |lambda(p^nu) - sin((nu+1) theta) / sin(theta)|, nu <= 6
    pub max_angle_residual: f64,
}

/// Outcome of the exact check `tau(n)^2 <= d(n)^2 n^11`.
#[derive(Clone, Debug, Serialize)]
pub struct DeligneReport {
    pub checked: usize,
    pub violations: Vec<u64>,
    /// max |lambda(n)| / d(n) over the checked range (floating diagnostic)
    pub max_ratio: f64,
}

impl DeligneReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Build a table of `tau(1..=x)` with the chosen backend.
pub fn build_coefficient_table(x: usize, backend: Backend) -> Result<CoefficientTable> {
    if x == 0 || x > backend.cap() {
        return Err(Error::BoundExceeded {
            what: "table bound X",
            value: x as u64,
            limit: backend.cap() as u64,
        });
    }
    let taus = match backend {
        Backend::Fast => series::tau_fast(x)?,
        Backend::Oracle => series::tau_oracle(x),
    };
    CoefficientTable::from_taus(FormSpec::delta(), taus, backend.into())
}

/// Sign-aware ratio `sin((nu+1) theta) / sin(theta)` with the limits at
/// `theta = 0` and `theta = pi`.
pub fn sin_ratio(theta: f64, nu: u32) -> f64 {
    let s = theta.sin();
    if s.abs() < 1e-300 || theta <= 0.0 || theta >= PI {
        let n = nu as f64 + 1.0;
        return if theta >= PI / 2.0 && nu % 2 == 1 {
            -n
        } else {
            n
        };
    }
    ((nu as f64 + 1.0) * theta).sin() / s
}

/// `lambda(p^nu)` from `lambda(p)` by the three-term recurrence.
pub fn prime_power_by_recurrence(lambda_p: f64, nu: u32) -> f64 {
    let (mut prev, mut cur) = (1.0, lambda_p);
    if nu == 0 {
        return 1.0;
    }
    for _ in 1..nu {
        (prev, cur) = (cur, lambda_p * cur - prev);
    }
    cur
}

impl CoefficientTable {
    /// Wrap `tau(1), ..., tau(X)` (the slice starts at `n = 1`).
    pub fn from_taus(spec: FormSpec, taus: Vec<i128>, provenance: Provenance) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::BoundExceeded {
                what: "table bound X",
                value: 0,
                limit: FAST_CAP as u64,
            });
        }
        if taus.len() > FAST_CAP {
            return Err(Error::BoundExceeded {
                what: "table bound X",
                value: taus.len() as u64,
                limit: FAST_CAP as u64,
            });
        }
        if taus[0] != 1 {
            return Err(Error::MalformedCache(format!(
                "leading coefficient is {}, expected 1",
                taus[0]
            )));
        }
        let mut raw = Vec::with_capacity(taus.len() + 1);
        raw.push(0);
        raw.extend(taus);
        let k = spec.normalizing_exponent();
        let lambda = raw
            .par_iter()
            .enumerate()
            .map(|(n, &t)| {
                if n == 0 {
                    0.0
                } else {
                    t as f64 / (n as f64).powf(k)
                }
            })
            .collect();
        let sieve = Sieve::new(raw.len() - 1);
        Ok(CoefficientTable {
            spec,
            raw,
            lambda,
            sieve,
            provenance,
        })
    }

    pub fn spec(&self) -> FormSpec {
        self.spec
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// The table bound X.
    pub fn bound(&self) -> usize {
        self.raw.len() - 1
    }

    pub fn sieve(&self) -> &Sieve {
        &self.sieve
    }

    /// `tau(1), ..., tau(X)`.
    pub fn taus(&self) -> &[i128] {
        &self.raw[1..]
    }

    pub fn tau(&self, n: usize) -> Option<i128> {
        (n >= 1 && n <= self.bound()).then(|| self.raw[n])
    }

    /// Normalized eigenvalues indexed by `n`; entry 0 is unused.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    fn check_in_table(&self, what: &'static str, n: u64) -> Result<()> {
        if n == 0 || n > self.bound() as u64 {
            return Err(Error::BoundExceeded {
                what,
                value: n,
                limit: self.bound() as u64,
            });
        }
        Ok(())
    }

    /// `lambda(n)`. Inside the table this is `tau(n) / n^{11/2}`; beyond it,
    /// `n` is factored and assembled by multiplicativity, using the table
    /// for prime powers it holds and the recurrence otherwise.
    pub fn eigenvalue(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::BoundExceeded {
                what: "n",
                value: 0,
                limit: self.bound() as u64,
            });
        }
        if n <= self.bound() as u64 {
            return Ok(self.lambda[n as usize]);
        }
        let mut value = 1.0;
        for (p, nu) in factorize(n) {
            if p > self.bound() as u64 {
                return Err(Error::UnreachablePrime {
                    n,
                    p,
                    bound: self.bound() as u64,
                });
            }
            let q = p.checked_pow(nu).filter(|&q| q <= self.bound() as u64);
            value *= match q {
                Some(q) => self.lambda[q as usize],
                None => prime_power_by_recurrence(self.lambda[p as usize], nu),
            };
        }
        Ok(value)
    }

    /// `lambda(n)` assembled purely from `lambda(p)` by multiplicativity and
    /// the prime-power recurrence.
    pub fn eigenvalue_by_recurrence(&self, n: u64) -> Result<f64> {
        let mut value = 1.0;
        for (p, nu) in factorize(n) {
            if p > self.bound() as u64 {
                return Err(Error::UnreachablePrime {
                    n,
                    p,
                    bound: self.bound() as u64,
                });
            }
            value *= prime_power_by_recurrence(self.lambda[p as usize], nu);
        }
        Ok(value)
    }

    pub fn prime_local_data(&self, p: u64) -> Result<PrimeLocalData> {
        self.check_in_table("p", p)?;
        if !self.sieve.is_prime(p as usize) {
            return Err(Error::NotPrime(p));
        }
        let lambda_p = self.lambda[p as usize];
        if lambda_p.abs() > 2.0 + 1e-9 {
            return Err(Error::DeligneViolation {
                p,
                lambda: lambda_p,
            });
        }
        let theta_p = (lambda_p / 2.0).clamp(-1.0, 1.0).acos();
        Ok(PrimeLocalData {
            p,
            lambda_p,
            theta_p,
            alpha: Complex64::from_polar(1.0, theta_p),
            beta: Complex64::from_polar(1.0, -theta_p),
        })
    }

    /// Hecke relation, Deligne bound and angle recurrence over `m, n <= M`.
    pub fn check_hecke_identities(&self, m_max: usize) -> Result<HeckeReport> {
        if m_max == 0 || m_max.saturating_mul(m_max) > self.bound() {
            return Err(Error::BoundExceeded {
                what: "M^2",
                value: (m_max as u64).saturating_mul(m_max as u64),
                limit: self.bound() as u64,
            });
        }
        let lam = &self.lambda;
        let max_hecke_residual = (1..=m_max)
            .into_par_iter()
            .map(|m| {
                let mut worst = 0.0f64;
                for n in 1..=m_max {
                    let g = gcd(m as u64, n as u64) as usize;
                    let rhs: f64 = (1..=g)
                        .filter(|d| g % d == 0)
                        .map(|d| lam[m * n / (d * d)])
                        .sum();
                    worst = worst.max((lam[m] * lam[n] - rhs).abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max);

        let max_deligne_excess = (1..=m_max)
            .map(|n| lam[n].abs() - self.sieve.divisor_count(n) as f64)
            .fold(f64::NEG_INFINITY, f64::max);

        let mut max_angle_residual = 0.0f64;
        for p in self.sieve.primes().take_while(|&p| p <= m_max) {
            let theta = self.prime_local_data(p as u64)?.theta_p;
            if theta < 1e-6 || theta > PI - 1e-6 {
                continue;
            }
            for nu in 1..=6 {
                let rec = prime_power_by_recurrence(lam[p], nu);
                max_angle_residual = max_angle_residual.max((rec - sin_ratio(theta, nu)).abs());
            }
        }

        Ok(HeckeReport {
            m: m_max,
            max_hecke_residual,
            max_deligne_excess,
            max_angle_residual,
        })
    }

    /// Exact check of `tau(n)^2 <= d(n)^2 n^{11}` for `n <= limit`.
    pub fn deligne_exact(&self, limit: usize) -> Result<DeligneReport> {
        self.check_in_table("Deligne check limit", limit as u64)?;
        let violations: Vec<u64> = (1..=limit)
            .into_par_iter()
            .filter(|&n| {
                let tau = BigInt::from(self.raw[n]);
                let d = BigInt::from(self.sieve.divisor_count(n));
                let bound = &d * &d * BigInt::from(n).pow(11);
                &tau * &tau > bound
            })
            .map(|n| n as u64)
            .collect();
        let max_ratio = (1..=limit)
            .map(|n| self.lambda[n].abs() / self.sieve.divisor_count(n) as f64)
            .fold(0.0, f64::max);
        Ok(DeligneReport {
            checked: limit,
            violations,
            max_ratio,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small() -> CoefficientTable {
        build_coefficient_table(2_000, Backend::Oracle).unwrap()
    }

    #[test]
    fn form_spec_rejects_other_forms() {
        assert!(FormSpec::new(12, 1).is_ok());
        assert!(matches!(
            FormSpec::new(24, 1),
            Err(Error::UnsupportedForm { .. })
        ));
        assert!(FormSpec::new(12, 11).is_err());
    }

    #[test]
    fn bounds_are_enforced() {
        assert!(matches!(
            build_coefficient_table(ORACLE_CAP + 1, Backend::Oracle),
            Err(Error::BoundExceeded { .. })
        ));
        assert!(matches!(
            build_coefficient_table(FAST_CAP + 1, Backend::Fast),
            Err(Error::BoundExceeded { .. })
        ));
        assert!(build_coefficient_table(0, Backend::Fast).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        let t = small();
        let l2 = -24.0 / 2f64.powf(5.5);
        let l3 = 252.0 / 3f64.powf(5.5);
        assert_eq!(t.eigenvalue(1).unwrap(), 1.0);
        assert_relative_eq!(t.eigenvalue(2).unwrap(), l2, max_relative = 1e-14);
        assert_relative_eq!(
            t.eigenvalue(4).unwrap(),
            l2 * l2 - 1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(t.eigenvalue(6).unwrap(), l2 * l3, max_relative = 1e-12);
    }

    #[test]
    fn eigenvalue_beyond_table() {
        let t = small();
        // 2^11 = 2048 > 2000: recurrence path
        let direct = t.eigenvalue(2048).unwrap();
        let l2 = t.eigenvalue(2).unwrap();
        assert_relative_eq!(
            direct,
            prime_power_by_recurrence(l2, 11),
            max_relative = 1e-12
        );
        // 1999 * 3 = 5997 beyond table, prime factors inside
        let v = t.eigenvalue(5997).unwrap();
        assert_relative_eq!(v, t.eigenvalue(1999).unwrap() * t.eigenvalue(3).unwrap());
        assert!(matches!(
            t.eigenvalue(2003),
            Err(Error::UnreachablePrime { p: 2003, .. })
        ));
    }

    #[test]
    fn exact_and_recurrence_paths_agree() {
        let t = small();
        for n in 1..=2000u64 {
            let a = t.eigenvalue(n).unwrap();
            let b = t.eigenvalue_by_recurrence(n).unwrap();
            assert!(
                (a - b).abs() <= 1e-9 * a.abs().max(1.0),
                "n = {n}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn local_data() {
        let t = small();
        let d2 = t.prime_local_data(2).unwrap();
        assert_relative_eq!(d2.lambda_p, -0.530330085889911, max_relative = 1e-12);
        assert_relative_eq!(2.0 * d2.theta_p.cos(), d2.lambda_p, epsilon = 1e-12);
        let d3 = t.prime_local_data(3).unwrap();
        assert!((2.0 * d3.theta_p.cos() - d3.lambda_p).abs() <= 1e-12);
        assert_relative_eq!((d3.alpha * d3.beta).re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(d3.alpha.norm(), 1.0, epsilon = 1e-15);
        assert_relative_eq!((d3.alpha + d3.beta).re, d3.lambda_p, epsilon = 1e-12);
        assert!(matches!(t.prime_local_data(4), Err(Error::NotPrime(4))));
        assert!(t.prime_local_data(2003).is_err());
    }

    #[test]
    fn zero_lambda_gives_right_angle() {
        // no tau(p) = 0 is known, so exercise the formula on a synthetic table
        let mut taus = vec![0i128; 5];
        taus[0] = 1;
        let t = CoefficientTable::from_taus(FormSpec::delta(), taus, Provenance::Cache).unwrap();
        let d = t.prime_local_data(3).unwrap();
        assert_relative_eq!(d.theta_p, PI / 2.0);
    }

    #[test]
    fn corrupted_data_violates_deligne() {
        let mut taus = vec![0i128; 3];
        taus[0] = 1;
        taus[1] = 1_000; // |lambda(2)| = 1000 / 2^5.5 > 2
        let t = CoefficientTable::from_taus(FormSpec::delta(), taus, Provenance::Cache).unwrap();
        assert!(matches!(
            t.prime_local_data(2),
            Err(Error::DeligneViolation { p: 2, .. })
        ));
        assert_eq!(t.deligne_exact(3).unwrap().violations, vec![2]);
    }

    #[test]
    fn hecke_identities_small() {
        let t = small();
        let r = t.check_hecke_identities(1).unwrap();
        assert_eq!(r.max_hecke_residual, 0.0);
        assert_eq!(r.max_deligne_excess, 0.0);
        assert_eq!(r.max_angle_residual, 0.0);
        let r = t.check_hecke_identities(44).unwrap();
        assert!(r.max_hecke_residual <= 1e-9, "{r:?}");
        assert!(r.max_deligne_excess <= 0.0);
        assert!(r.max_angle_residual <= 1e-9);
        assert!(t.check_hecke_identities(45).is_err());
    }

    #[test]
    fn multiplicativity() {
        let t = small();
        for m in 1..=44u64 {
            for n in 1..=44u64 {
                if gcd(m, n) == 1 {
                    let lhs = t.eigenvalue(m * n).unwrap();
                    let rhs = t.eigenvalue(m).unwrap() * t.eigenvalue(n).unwrap();
                    assert!((lhs - rhs).abs() <= 1e-9, "{m} {n}");
                }
            }
        }
    }

    #[test]
    fn deligne_exact_small() {
        let t = small();
        let rep = t.deligne_exact(2000).unwrap();
        assert!(rep.passed());
        assert!(rep.max_ratio <= 1.0);
    }

    #[test]
    fn sin_ratio_limits() {
        assert_eq!(sin_ratio(0.0, 3), 4.0);
        assert_eq!(sin_ratio(PI, 3), -4.0);
        assert_eq!(sin_ratio(PI, 2), 3.0);
        assert_relative_eq!(
            sin_ratio(1.0, 2),
            prime_power_by_recurrence(2.0 * 1f64.cos(), 2),
            max_relative = 1e-12
        );
    }
}
