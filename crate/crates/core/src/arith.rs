//! Smallest-prime-factor sieve with divisor counts.

/// Sieve data for `0..=limit`.
#[derive(Clone, Debug)]
pub struct Sieve {
    spf: Vec<u32>,
    divisors: Vec<u32>,
}

impl Sieve {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let mut divisors = vec![0u32; limit + 1];
        if limit >= 1 {
            divisors[1] = 1;
        }
        for n in 2..=limit {
            let (_, nu, rest) = split_prime_power(&spf, n);
            divisors[n] = divisors[rest] * (nu + 1);
        }
        Sieve { spf, divisors }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    /// Smallest prime factor of `n`, for `2 <= n <= limit`.
    #[inline]
    pub fn smallest_prime_factor(&self, n: usize) -> usize {
        self.spf[n] as usize
    }

    #[inline]
    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && n <= self.limit() && self.spf[n] as usize == n
    }

    /// d(n), the number of divisors.
    #[inline]
    pub fn divisor_count(&self, n: usize) -> u32 {
        self.divisors[n]
    }

    /// Writes `n = p^nu * rest` with `p` the smallest prime factor.
    #[inline]
    pub fn split(&self, n: usize) -> (usize, u32, usize) {
        split_prime_power(&self.spf, n)
    }

    pub fn primes(&self) -> impl Iterator<Item = usize> + '_ {
        (2..=self.limit()).filter(move |&n| self.spf[n] as usize == n)
    }
}

fn split_prime_power(spf: &[u32], n: usize) -> (usize, u32, usize) {
    let p = spf[n] as usize;
    let mut rest = n;
    let mut nu = 0;
    while rest % p == 0 {
        rest /= p;
        nu += 1;
    }
    (p, nu, rest)
}

/// Prime factorization by trial division, for arguments beyond any sieve.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut nu = 0;
            while n % d == 0 {
                n /= d;
                nu += 1;
            }
            out.push((d, nu));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_basics() {
        let s = Sieve::new(100);
        let primes: Vec<_> = s.primes().take(10).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(s.primes().count(), 25);
        assert_eq!(s.divisor_count(1), 1);
        assert_eq!(s.divisor_count(12), 6);
        assert_eq!(s.divisor_count(60), 12);
        assert_eq!(s.divisor_count(97), 2);
        assert_eq!(s.split(72), (2, 3, 9));
        assert!(!s.is_prime(1));
        assert!(!s.is_prime(91));
    }

    #[test]
    fn divisor_counts_match_brute_force() {
        let s = Sieve::new(500);
        for n in 1..=500usize {
            let brute = (1..=n).filter(|d| n % d == 0).count() as u32;
            assert_eq!(s.divisor_count(n), brute, "n = {n}");
        }
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(1_000_003), vec![(1_000_003, 1)]);
        assert_eq!(gcd(12, 18), 6);
    }
}
