//! Exact truncated q-series for the discriminant form
//! `Delta = q * prod_{n >= 1} (1 - q^n)^24`.

use crate::error::Result;
use crate::ntt;

/// First `len` coefficients of `prod (1 - q^n)^3`, from Jacobi's identity
/// `sum_{k >= 0} (-1)^k (2k + 1) q^{k(k+1)/2}`.
pub fn eta_cube(len: usize) -> Vec<i128> {
    let mut out = vec![0i128; len];
    let mut k = 0usize;
    loop {
        let e = k * (k + 1) / 2;
        if e >= len {
            break;
        }
        let c = (2 * k + 1) as i128;
        out[e] = if k % 2 == 0 { c } else { -c };
        k += 1;
    }
    out
}

/// `tau(1), ..., tau(x)` by squaring the sparse eta cube three times.
pub fn tau_fast(x: usize) -> Result<Vec<i128>> {
    let mut s = eta_cube(x);
    for _ in 0..3 {
        s = ntt::square_truncated(&s, x)?;
    }
    Ok(s)
}

/// `tau(1), ..., tau(x)` by direct multiplication with `(1 - q^m)`, one
/// factor at a time. Each of the 24 rounds sweeps every `m < x`, so the
/// intermediate series after a round are truncated powers of eta.
pub fn tau_oracle(x: usize) -> Vec<i128> {
    let mut s = vec![0i128; x];
    if x == 0 {
        return s;
    }
    s[0] = 1;
    for _ in 0..24 {
        for m in 1..x {
            for i in (m..x).rev() {
                s[i] -= s[i - m];
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_cube_leading_terms() {
        // (1 - q)^3 (1 - q^2)^3 ... = 1 - 3q + 5q^3 - 7q^6 + 9q^10 - ...
        let e = eta_cube(11);
        assert_eq!(e, vec![1, -3, 0, 5, 0, 0, -7, 0, 0, 0, 9]);
    }

    #[test]
    fn oracle_small_hand_expansion() {
        assert_eq!(tau_oracle(1), vec![1]);
        assert_eq!(tau_oracle(3), vec![1, -24, 252]);
    }

    #[test]
    fn known_tau_values() {
        // OEIS A000594
        let expected = [
            1i128, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944,
        ];
        assert_eq!(tau_oracle(12), expected);
        assert_eq!(tau_fast(12).unwrap(), expected);
    }

    #[test]
    fn fast_matches_oracle() {
        assert_eq!(tau_fast(600).unwrap(), tau_oracle(600));
    }
}
