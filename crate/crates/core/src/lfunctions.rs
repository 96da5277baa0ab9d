//! Trace polynomials and local Euler factors.
//!
//! Writing `x = alpha + beta = 2 cos(theta)` for the trace at a prime, the
//! trace of the symmetric `m`-th power is the Chebyshev-type polynomial
//! `T_m(x)` with `T_m(2 cos theta) = sin((m+1) theta) / sin(theta)`. Even
//! powers of `x` expand in the `T_{2i}` with nonnegative integer
//! coefficients; the constant term is the power of `zeta` and the rest are
//! the exponents of the symmetric power L-functions in the local
//! factorization of `sum_nu lambda(p^nu)^{2j} T^nu`.

use std::ops::{Add, Mul, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hecke::{sin_ratio, CoefficientTable};

/// Integer polynomial in `x`, coefficients in ascending degree with no
/// trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: i64) -> Self {
        Self::new(vec![c])
    }

    /// `x^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0; n + 1];
        coeffs[n] = 1;
        IntPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> i64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c as f64)
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }
}

impl Add for &IntPolynomial {
    type Output = IntPolynomial;

    fn add(self, rhs: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;

    fn sub(self, rhs: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;

    fn mul(self, rhs: &IntPolynomial) -> IntPolynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return IntPolynomial::zero();
        }
        let mut out = vec![0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }
}

pub const MAX_SYM_DEGREE: usize = 8;

/// `T_n` for every `n <= max` by `T_{n+1} = x T_n - T_{n-1}`.
fn trace_polynomials(max: usize) -> Vec<IntPolynomial> {
    let x = IntPolynomial::monomial(1);
    let mut out = vec![IntPolynomial::constant(1), x.clone()];
    while out.len() <= max {
        let n = out.len();
        let next = &(&x * &out[n - 1]) - &out[n - 2];
        out.push(next);
    }
    out.truncate(max + 1);
    out
}

/// The trace polynomial of the symmetric `m`-th power, `m` even and `<= 8`.
pub fn trace_polynomial(m: usize) -> Result<IntPolynomial> {
    if m % 2 == 1 || m > MAX_SYM_DEGREE {
        return Err(Error::UnsupportedDegree(m));
    }
    Ok(trace_polynomials(m).swap_remove(m))
}

/// `(c_0, ..., c_j)` with `x^{2j} = sum_i c_i T_{2i}(x)`, `0 <= j <= 4`.
pub fn power_to_trace_basis(j: usize) -> Result<Vec<i64>> {
    if j > MAX_SYM_DEGREE / 2 {
        return Err(Error::UnsupportedDegree(2 * j));
    }
    let t = trace_polynomials(2 * j);
    let mut rest = IntPolynomial::monomial(2 * j);
    let mut row = vec![0; j + 1];
    // T_{2i} is monic of degree 2i: peel off the top term each step
    for i in (0..=j).rev() {
        let c = rest.coeff(2 * i);
        row[i] = c;
        rest = &rest - &t[2 * i].scale(c);
    }
    debug_assert_eq!(rest, IntPolynomial::zero());
    Ok(row)
}

/// Expand `sum_i row_i T_{2i}` back into the monomial basis.
pub fn trace_basis_to_polynomial(row: &[i64]) -> IntPolynomial {
    let t = trace_polynomials(2 * row.len().saturating_sub(1));
    row.iter()
        .enumerate()
        .fold(IntPolynomial::zero(), |acc, (i, &c)| {
            &acc + &t[2 * i].scale(c)
        })
}

/// Powers of zeta and of the even symmetric power L-functions in the local
/// factorization of `F_j`, `j = 1..4`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Multiplicities {
    /// `m_j`, the power of zeta, for `j = 1..4`
    pub m: [i64; 4],
    /// rows of `x^{2j}` in the `T_{2i}` basis for `j = 0..4`
    pub trace_basis: Vec<Vec<i64>>,
}

impl Multiplicities {
    pub fn new() -> Self {
        let trace_basis: Vec<Vec<i64>> = (0..=4)
            .map(|j| power_to_trace_basis(j).expect("j <= 4"))
            .collect();
        let m = [1, 2, 3, 4].map(|j| trace_basis[j][0]);
        Multiplicities { m, trace_basis }
    }

    /// Exponents of `L(sym^2), L(sym^4), ...` in `G_j`.
    pub fn g_exponents(&self, j: usize) -> &[i64] {
        &self.trace_basis[j][1..]
    }

    pub fn zeta_exponent(&self, j: usize) -> i64 {
        self.trace_basis[j][0]
    }
}

impl Default for Multiplicities {
    fn default() -> Self {
        Self::new()
    }
}

/// Truncated power series in `T = p^{-s}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalSeries {
    pub p: Option<u64>,
    coeffs: Vec<f64>,
}

impl LocalSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a local series has at least a constant term"
        );
        LocalSeries { p: None, coeffs }
    }

    pub fn one(depth: usize) -> Self {
        let mut c = vec![0.0; depth + 1];
        c[0] = 1.0;
        Self::new(c)
    }

    /// `(1 - T)^{-1}`, the local factor of zeta.
    pub fn geometric(depth: usize) -> Self {
        Self::new(vec![1.0; depth + 1])
    }

    pub fn with_prime(mut self, p: u64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn depth(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs[i]
    }

    pub fn mul(&self, other: &LocalSeries) -> LocalSeries {
        let depth = self.depth().min(other.depth());
        let mut out = vec![0.0; depth + 1];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = (0..=i).map(|k| self.coeffs[k] * other.coeffs[i - k]).sum();
        }
        LocalSeries {
            p: self.p.or(other.p),
            coeffs: out,
        }
    }

    pub fn pow(&self, n: u32) -> LocalSeries {
        (0..n).fold(LocalSeries::one(self.depth()), |acc, _| acc.mul(self))
    }

    /// Formal quotient `self / other`.
    pub fn div(&self, other: &LocalSeries) -> Result<LocalSeries> {
        let d0 = other.coeffs[0];
        if d0 == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let depth = self.depth().min(other.depth());
        let mut q = vec![0.0; depth + 1];
        for i in 0..=depth {
            let acc: f64 = (1..=i).map(|k| other.coeffs[k] * q[i - k]).sum();
            q[i] = (self.coeffs[i] - acc) / d0;
        }
        Ok(LocalSeries {
            p: self.p.or(other.p),
            coeffs: q,
        })
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::OutOfRange {
            what: "theta",
            value: theta,
            lo: 0.0,
            hi: std::f64::consts::PI,
        });
    }
    Ok(())
}

/// `prod_{j=0..m} (1 - e^{i(m-2j) theta} T)^{-1}` to the given depth.
///
/// Conjugate roots are paired into real quadratics
/// `(1 - 2 cos(k theta) T + T^2)^{-1}`, whose coefficients follow the
/// recurrence `c_n = 2 cos(k theta) c_{n-1} - c_{n-2}`.
pub fn sym_local_factor(theta: f64, m: usize, depth: usize) -> Result<LocalSeries> {
    check_theta(theta)?;
    if m > MAX_SYM_DEGREE {
        return Err(Error::UnsupportedDegree(m));
    }
    if depth == 0 {
        return Err(Error::OutOfRange {
            what: "depth",
            value: 0.0,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let mut acc = if m % 2 == 0 {
        LocalSeries::geometric(depth)
    } else {
        LocalSeries::one(depth)
    };
    let mut k = m;
    while k >= 1 {
        let c = 2.0 * (k as f64 * theta).cos();
        let mut q = vec![0.0; depth + 1];
        q[0] = 1.0;
        q[1] = c;
        for n in 2..=depth {
            q[n] = c * q[n - 1] - q[n - 2];
        }
        acc = acc.mul(&LocalSeries::new(q));
        if k < 2 {
            break;
        }
        k -= 2;
    }
    Ok(acc)
}

/// The local series `sum_nu lambda(p^nu)^{2j} T^nu` at angle `theta`.
pub fn power_series_local(theta: f64, j: usize, depth: usize) -> Result<LocalSeries> {
    check_theta(theta)?;
    Ok(LocalSeries::new(
        (0..=depth as u32)
            .map(|nu| sin_ratio(theta, nu).powi(2 * j as i32))
            .collect(),
    ))
}

/// The product `zeta_p^{m_j} prod_i L_p(sym^{2i})^{e_i}` predicted for `F_j`.
pub fn predicted_factor(theta: f64, j: usize, depth: usize) -> Result<LocalSeries> {
    let mult = Multiplicities::new();
    let mut acc = LocalSeries::geometric(depth).pow(mult.zeta_exponent(j) as u32);
    for (i, &e) in mult.g_exponents(j).iter().enumerate() {
        let sym = sym_local_factor(theta, 2 * (i + 1), depth)?;
        acc = acc.mul(&sym.pow(e as u32));
    }
    Ok(acc)
}

/// The quotient `H_{j,p} = F_{j,p} / (zeta_p^{m_j} G_{j,p})`. Its constant
/// term is 1 and its linear term vanishes when the trace identity holds.
pub fn decomposition_residual(theta: f64, j: usize, depth: usize) -> Result<LocalSeries> {
    if !(1..=4).contains(&j) {
        return Err(Error::UnsupportedDegree(2 * j));
    }
    if depth < 2 {
        return Err(Error::OutOfRange {
            what: "depth",
            value: depth as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    let f = power_series_local(theta, j, depth)?;
    f.div(&predicted_factor(theta, j, depth)?)
}

/// One row of the residual dump.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub p: u64,
    pub j: usize,
    pub series: LocalSeries,
}

/// Residual series for every prime `p <= max_p` and `j = 1..4`.
pub fn residuals_for_primes(
    table: &CoefficientTable,
    max_p: usize,
    depth: usize,
) -> Result<Vec<ResidualRow>> {
    let mut rows = Vec::new();
    for p in table.sieve().primes().take_while(|&p| p <= max_p) {
        let theta = table.prime_local_data(p as u64)?.theta_p;
        for j in 1..=4 {
            let series = decomposition_residual(theta, j, depth)?.with_prime(p as u64);
            rows.push(ResidualRow {
                p: p as u64,
                j,
                series,
            });
        }
    }
    Ok(rows)
}

/// CSV with header `p,j,depth,c1,...,c{depth}`.
pub fn residual_csv(rows: &[ResidualRow]) -> String {
    let depth = rows.first().map_or(0, |r| r.series.depth());
    let mut out = String::from("p,j,depth");
    for i in 1..=depth {
        out.push_str(&format!(",c{i}"));
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{},{},{}", row.p, row.j, row.series.depth()));
        for c in &row.series.coeffs()[1..] {
            out.push_str(&format!(",{c:e}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn listed_trace_polynomials() {
        assert_eq!(trace_polynomial(0).unwrap(), IntPolynomial::constant(1));
        assert_eq!(trace_polynomial(2).unwrap().coeffs(), &[-1, 0, 1]);
        assert_eq!(trace_polynomial(4).unwrap().coeffs(), &[1, 0, -3, 0, 1]);
        assert_eq!(
            trace_polynomial(6).unwrap().coeffs(),
            &[-1, 0, 6, 0, -5, 0, 1]
        );
        assert_eq!(
            trace_polynomial(8).unwrap().coeffs(),
            &[1, 0, -10, 0, 15, 0, -7, 0, 1]
        );
        assert!(matches!(
            trace_polynomial(3),
            Err(Error::UnsupportedDegree(3))
        ));
        assert!(trace_polynomial(10).is_err());
    }

    #[test]
    fn trace_polynomial_is_sin_ratio() {
        for m in [0, 2, 4, 6, 8] {
            let t = trace_polynomial(m).unwrap();
            for i in 1..50 {
                let theta = i as f64 * PI / 50.0;
                let want = sin_ratio(theta, m as u32);
                assert_abs_diff_eq!(t.eval(2.0 * theta.cos()), want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn basis_rows() {
        assert_eq!(power_to_trace_basis(0).unwrap(), vec![1]);
        assert_eq!(power_to_trace_basis(1).unwrap(), vec![1, 1]);
        assert_eq!(power_to_trace_basis(2).unwrap(), vec![2, 3, 1]);
        assert_eq!(power_to_trace_basis(3).unwrap(), vec![5, 9, 5, 1]);
        assert_eq!(power_to_trace_basis(4).unwrap(), vec![14, 28, 20, 7, 1]);
        assert!(power_to_trace_basis(5).is_err());
    }

    #[test]
    fn basis_rows_at_two() {
        // T_{2i}(2) = 2i + 1
        for j in 0..=4 {
            let row = power_to_trace_basis(j).unwrap();
            let total: i64 = row
                .iter()
                .enumerate()
                .map(|(i, c)| c * (2 * i as i64 + 1))
                .sum();
            assert_eq!(total, 4i64.pow(j as u32));
        }
    }

    #[test]
    fn basis_roundtrip() {
        for j in 0..=4 {
            let row = power_to_trace_basis(j).unwrap();
            assert_eq!(
                trace_basis_to_polynomial(&row),
                IntPolynomial::monomial(2 * j)
            );
        }
    }

    #[test]
    fn multiplicities() {
        let m = Multiplicities::new();
        assert_eq!(m.m, [1, 2, 5, 14]);
        assert_eq!(m.g_exponents(1), &[1]);
        assert_eq!(m.g_exponents(2), &[3, 1]);
        assert_eq!(m.g_exponents(3), &[9, 5, 1]);
        assert_eq!(m.g_exponents(4), &[28, 20, 7, 1]);
    }

    #[test]
    fn zeta_factor_is_geometric() {
        let s = sym_local_factor(1.234, 0, 5).unwrap();
        assert_eq!(s.coeffs(), &[1.0; 6]);
    }

    #[test]
    fn sym_factor_linear_term() {
        let s = sym_local_factor(PI / 2.0, 2, 2).unwrap();
        assert_abs_diff_eq!(s.coeff(1), -1.0, epsilon = 1e-15);
        let theta = 0.7;
        let s = sym_local_factor(theta, 4, 1).unwrap();
        let t4 = trace_polynomial(4).unwrap();
        assert_abs_diff_eq!(s.coeff(1), t4.eval(2.0 * theta.cos()), epsilon = 1e-12);
    }

    /// Complex-root expansion of the same Euler factor, as an independent
    /// oracle for the real quadratic pairing.
    fn sym_factor_complex(theta: f64, m: usize, depth: usize) -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); depth + 1];
        acc[0] = Complex64::new(1.0, 0.0);
        for j in 0..=m {
            let root = Complex64::from_polar(1.0, (m as f64 - 2.0 * j as f64) * theta);
            // multiply by the geometric series in root * T
            for n in 1..=depth {
                let prev = acc[n - 1];
                acc[n] += root * prev;
            }
        }
        acc
    }

    #[test]
    fn sym_factor_matches_complex_roots() {
        for m in 0..=8 {
            for &theta in &[0.0, 0.3, 1.1, PI / 2.0, 2.9, PI] {
                let real = sym_local_factor(theta, m, 6).unwrap();
                let cplx = sym_factor_complex(theta, m, 6);
                for (r, c) in real.coeffs().iter().zip(&cplx) {
                    assert!(c.im.abs() <= 1e-12, "m={m} theta={theta}: {c}");
                    assert_abs_diff_eq!(*r, c.re, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn series_division_inverts_multiplication() {
        let a = LocalSeries::new(vec![1.0, 0.5, -2.0, 3.0]);
        let b = LocalSeries::new(vec![1.0, -1.0, 0.25, 0.0]);
        let q = a.mul(&b).div(&b).unwrap();
        for (x, y) in q.coeffs().iter().zip(a.coeffs()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        let zero = LocalSeries::new(vec![0.0, 1.0]);
        assert!(matches!(a.div(&zero), Err(Error::DivisionByZero)));
    }

    #[test]
    fn residual_linear_term_vanishes() {
        for j in 1..=4 {
            for i in 0..=100 {
                let theta = i as f64 * PI / 100.0;
                let h = decomposition_residual(theta, j, 4).unwrap();
                assert_abs_diff_eq!(h.coeff(0), 1.0, epsilon = 1e-12);
                assert!(
                    h.coeff(1).abs() <= 1e-9,
                    "j={j} theta={theta} {:?}",
                    h.coeffs()
                );
            }
        }
        let h = decomposition_residual(PI / 2.0, 3, 2).unwrap();
        assert!(h.coeff(1).abs() < 1e-15);
        assert!(h.coeff(2).is_finite());
        assert!(decomposition_residual(1.0, 5, 4).is_err());
        assert!(decomposition_residual(1.0, 1, 1).is_err());
    }

    #[test]
    fn trace_identity_on_grid() {
        // degree-1 coefficient of F_j equals m_j + sum e_i T_{2i}(x)
        let mult = Multiplicities::new();
        let t: Vec<_> = (0..=4).map(|i| trace_polynomial(2 * i).unwrap()).collect();
        for i in 0..1000 {
            let theta = i as f64 * PI / 999.0;
            let x = 2.0 * theta.cos();
            for j in 1..=4 {
                let f1 = power_series_local(theta, j, 1).unwrap().coeff(1);
                let predicted = mult.zeta_exponent(j) as f64
                    + mult
                        .g_exponents(j)
                        .iter()
                        .enumerate()
                        .map(|(k, &e)| e as f64 * t[k + 1].eval(x))
                        .sum::<f64>();
                assert!((f1 - predicted).abs() <= 1e-10 * f1.abs().max(1.0));
            }
        }
    }

    #[test]
    fn csv_layout() {
        let rows = vec![ResidualRow {
            p: 2,
            j: 1,
            series: LocalSeries::new(vec![1.0, 0.0, 0.5]).with_prime(2),
        }];
        let csv = residual_csv(&rows);
        assert_eq!(csv, "p,j,depth,c1,c2\n2,1,2,0e0,5e-1\n");
    }
}
