//! Exact integer convolution by number-theoretic transforms over several
//! 62-bit primes, recombined with a balanced Garner CRT.
//!
//! Each prime has the form `c * 2^26 + 1` (or `c * 2^27 + 1`), so transforms
//! up to length 2^26 are available. The product of the four moduli is about
//! 2^248, which leaves ample room above any coefficient that fits in an
//! `i128`; a reconstructed value outside the `i128` range is reported as
//! [`Error::Overflow`].

use rayon::prelude::*;

use crate::error::{Error, Result};

/// NTT-friendly primes just below 2^62, paired with a primitive root.
pub const PRIMES: [(u64, u64); 4] = [
    (0x3fff_ffff_cc00_0001, 5),
    (0x3fff_ffff_3400_0001, 3),
    (0x3fff_fffe_0800_0001, 6),
    (0x3fff_fffd_7800_0001, 3),
];

/// Largest supported transform length (every prime has 2^26 | p - 1).
pub const MAX_TRANSFORM_LEN: usize = 1 << 26;

/// Magnitude budget for a single convolution output, in bits. The CRT
/// modulus exceeds 2^247, so anything below this reconstructs uniquely.
const MAGNITUDE_BUDGET_BITS: f64 = 246.0;

/// Arithmetic modulo an odd prime below 2^62 in Montgomery form (R = 2^64).
#[derive(Clone, Copy, Debug)]
pub struct Modulus {
    p: u64,
    /// p^-1 mod 2^64
    p_inv: u64,
    /// R^2 mod p
    r2: u64,
}

impl Modulus {
    pub fn new(p: u64) -> Self {
        assert!(
            p % 2 == 1 && p < 1 << 62,
            "modulus must be odd and below 2^62"
        );
        let mut inv = p;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Modulus { p, p_inv: inv, r2 }
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.p
    }

    /// x * R^-1 mod p, for x < p * 2^64.
    #[inline(always)]
    fn reduce(&self, x: u128) -> u64 {
        let m = (x as u64).wrapping_mul(self.p_inv);
        let y = ((m as u128 * self.p as u128) >> 64) as u64;
        let (out, borrow) = ((x >> 64) as u64).overflowing_sub(y);
        if borrow {
            out.wrapping_add(self.p)
        } else {
            out
        }
    }

    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn to_mont(&self, a: u64) -> u64 {
        self.mul(a % self.p, self.r2)
    }

    #[inline]
    pub fn from_mont(&self, a: u64) -> u64 {
        self.reduce(a as u128)
    }

    /// Montgomery-form power of a Montgomery-form base.
    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = self.to_mont(1);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Residue of a signed integer, in Montgomery form.
    #[inline]
    pub fn from_i128(&self, v: i128) -> u64 {
        self.to_mont(v.rem_euclid(self.p as i128) as u64)
    }
}

/// Precomputed twiddles for power-of-two transforms of one length.
struct Plan {
    m: Modulus,
    len: usize,
    roots: Vec<u64>,
    inv_roots: Vec<u64>,
    len_inv: u64,
}

impl Plan {
    fn new(p: u64, generator: u64, len: usize) -> Self {
        debug_assert!(len.is_power_of_two() && len <= MAX_TRANSFORM_LEN);
        let m = Modulus::new(p);
        let g = m.to_mont(generator);
        let w = m.pow(g, (p - 1) / len as u64);
        let w_inv = m.pow(w, len as u64 - 1);
        let half = (len / 2).max(1);
        let mut roots = Vec::with_capacity(half);
        let mut inv_roots = Vec::with_capacity(half);
        let (mut a, mut b) = (m.to_mont(1), m.to_mont(1));
        for _ in 0..half {
            roots.push(a);
            inv_roots.push(b);
            a = m.mul(a, w);
            b = m.mul(b, w_inv);
        }
        let len_inv = m.pow(m.to_mont(len as u64), p - 2);
        Plan {
            m,
            len,
            roots,
            inv_roots,
            len_inv,
        }
    }

    fn transform(&self, a: &mut [u64], inverse: bool) {
        let n = self.len;
        debug_assert_eq!(a.len(), n);
        bit_reverse(a);
        let roots = if inverse {
            &self.inv_roots
        } else {
            &self.roots
        };
        let m = &self.m;
        let mut half = 1;
        while half < n {
            let step = n / (2 * half);
            for block in a.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (i, (u, v)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = m.mul(*v, roots[i * step]);
                    let x = *u;
                    *u = m.add(x, t);
                    *v = m.sub(x, t);
                }
            }
            half *= 2;
        }
        if inverse {
            for x in a.iter_mut() {
                *x = m.mul(*x, self.len_inv);
            }
        }
    }
}

fn bit_reverse(a: &mut [u64]) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
}

/// Residues modulo one prime of the truncated product of `a` and `b`.
fn convolve_mod(p: u64, g: u64, a: &[i128], b: Option<&[i128]>, len: usize) -> Vec<u64> {
    let full = a.len() + b.map_or(a.len(), <[i128]>::len) - 1;
    let size = full.next_power_of_two();
    let plan = Plan::new(p, g, size);
    let m = plan.m;

    let mut fa = vec![0u64; size];
    for (dst, &v) in fa.iter_mut().zip(a) {
        *dst = m.from_i128(v);
    }
    plan.transform(&mut fa, false);
    match b {
        Some(b) => {
            let mut fb = vec![0u64; size];
            for (dst, &v) in fb.iter_mut().zip(b) {
                *dst = m.from_i128(v);
            }
            plan.transform(&mut fb, false);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x = m.mul(*x, *y);
            }
        }
        None => {
            for x in fa.iter_mut() {
                *x = m.mul(*x, *x);
            }
        }
    }
    plan.transform(&mut fa, true);
    fa.truncate(len);
    for x in fa.iter_mut() {
        *x = m.from_mont(*x);
    }
    fa
}

/// Balanced mixed-radix (Garner) reconstruction, one coefficient at a time.
struct Garner {
    moduli: [u64; 4],
    /// inverse of p_0 * ... * p_{i-1} modulo p_i
    inverses: [u64; 4],
}

impl Garner {
    fn new() -> Self {
        let moduli = PRIMES.map(|(p, _)| p);
        let mut inverses = [1u64; 4];
        for i in 1..4 {
            let pi = moduli[i] as u128;
            let prefix = moduli[..i]
                .iter()
                .fold(1u128, |acc, &q| acc * (q as u128 % pi) % pi);
            inverses[i] = pow_mod(prefix as u64, moduli[i] - 2, moduli[i]);
        }
        Garner { moduli, inverses }
    }

    fn reconstruct(&self, residues: [u64; 4]) -> Option<i128> {
        let mut digits = [0i128; 4];
        for i in 0..4 {
            let pi = self.moduli[i];
            // value of the digits found so far, modulo p_i
            let mut partial = 0u128;
            let mut radix = 1u128;
            for k in 0..i {
                let d = digits[k].rem_euclid(pi as i128) as u128;
                partial = (partial + d * radix) % pi as u128;
                radix = radix * (self.moduli[k] as u128 % pi as u128) % pi as u128;
            }
            let diff = (residues[i] as u128 + pi as u128 - partial) % pi as u128;
            let d = (diff * self.inverses[i] as u128 % pi as u128) as u64;
            digits[i] = if d > pi / 2 {
                d as i128 - pi as i128
            } else {
                d as i128
            };
        }
        let mut v = digits[3];
        for i in (0..3).rev() {
            v = v
                .checked_mul(self.moduli[i] as i128)?
                .checked_add(digits[i])?;
        }
        Some(v)
    }
}

fn pow_mod(b: u64, mut e: u64, p: u64) -> u64 {
    let p = p as u128;
    let mut acc = 1u128;
    let mut b = b as u128 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc as u64
}

fn log2_max_abs(a: &[i128]) -> f64 {
    a.iter()
        .map(|v| v.unsigned_abs())
        .max()
        .map_or(f64::NEG_INFINITY, |m| (m as f64).log2())
}

fn check_budget(a: &[i128], b: &[i128]) -> Result<()> {
    let terms = a.len().min(b.len()).max(1) as f64;
    let bits = log2_max_abs(a) + log2_max_abs(b) + terms.log2();
    if bits >= MAGNITUDE_BUDGET_BITS {
        return Err(Error::Overflow { index: 0 });
    }
    Ok(())
}

fn exact_product(a: &[i128], b: Option<&[i128]>, len: usize) -> Result<Vec<i128>> {
    let a = &a[..a.len().min(len)];
    let b = b.map(|b| &b[..b.len().min(len)]);
    if a.is_empty() || b.is_some_and(<[i128]>::is_empty) || len == 0 {
        return Ok(vec![0; len]);
    }
    check_budget(a, b.unwrap_or(a))?;
    let full = a.len() + b.map_or(a.len(), <[i128]>::len) - 1;
    if full.next_power_of_two() > MAX_TRANSFORM_LEN {
        return Err(Error::BoundExceeded {
            what: "convolution length",
            value: full as u64,
            limit: MAX_TRANSFORM_LEN as u64,
        });
    }
    let out_len = len.min(full);

    let residues: Vec<Vec<u64>> = PRIMES
        .par_iter()
        .map(|&(p, g)| convolve_mod(p, g, a, b, out_len))
        .collect();

    let garner = Garner::new();
    let mut out = vec![0i128; len];
    out[..out_len]
        .par_iter_mut()
        .enumerate()
        .try_for_each(|(i, slot)| {
            let r = [
                residues[0][i],
                residues[1][i],
                residues[2][i],
                residues[3][i],
            ];
            *slot = garner.reconstruct(r).ok_or(Error::Overflow { index: i })?;
            Ok::<(), Error>(())
        })?;
    Ok(out)
}

/// First `len` coefficients of the product `a * b`, computed exactly.
pub fn mul_truncated(a: &[i128], b: &[i128], len: usize) -> Result<Vec<i128>> {
    exact_product(a, Some(b), len)
}

/// First `len` coefficients of `a * a`, computed exactly.
pub fn square_truncated(a: &[i128], len: usize) -> Result<Vec<i128>> {
    exact_product(a, None, len)
}
