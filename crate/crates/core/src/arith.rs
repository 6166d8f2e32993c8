//! Elementary arithmetic functions: factorization, von Mangoldt, Moebius, Euler phi.
//!
//! Single values use trial division. Ranges of the von Mangoldt function are
//! served from a smallest-prime-factor sieve ([`VonMangoldtTable`]).

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Prime factorization `n = prod p^e` by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Lambda(n) = log p if n = p^m (m >= 1), else 0. Lambda(0) is taken to be 0.
pub fn von_mangoldt(n: u64) -> f64 {
    let f = factorize(n);
    if f.len() == 1 {
        (f[0].0 as f64).ln()
    } else {
        0.0
    }
}

pub fn moebius(n: u64) -> i32 {
    if n == 0 {
        return 0;
    }
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = (result as u128 * base as u128 % m as u128) as u64;
        }
        base = (base as u128 * base as u128 % m as u128) as u64;
        exp >>= 1;
    }
    result
}

/// Multiplicative order of `a` modulo `m` (requires gcd(a, m) = 1).
pub fn multiplicative_order(a: u64, m: u64) -> u64 {
    let phi = euler_phi(m);
    let mut order = phi;
    for (p, _) in factorize(phi) {
        while order % p == 0 && pow_mod(a, order / p, m) == 1 {
            order /= p;
        }
    }
    order
}

/// Least generator of the cyclic group (Z/p^e Z)^* for an odd prime p.
pub fn least_primitive_root(p: u64, e: u32) -> u64 {
    debug_assert!(p > 2);
    let m = p.pow(e);
    let phi = euler_phi(m);
    (2..m)
        .find(|&g| gcd(g, m) == 1 && multiplicative_order(g, m) == phi)
        .expect("odd prime powers have primitive roots")
}

/// Modular inverse of `a` modulo `m`, if it exists.
pub fn inverse_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// `n mod m` for a signed `n`, in `[0, m)`.
pub fn reduce_signed(n: i64, m: u64) -> u64 {
    n.rem_euclid(m as i64) as u64
}

/// log_+ u = max(log u, 1).
pub fn log_plus(u: f64) -> f64 {
    u.ln().max(1.0)
}

/// Table of Lambda(n) for 0 <= n <= limit, built with a smallest-prime-factor sieve.
#[derive(Debug, Clone)]
pub struct VonMangoldtTable {
    values: Vec<f64>,
}

impl VonMangoldtTable {
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
        let mut values = vec![0.0; limit + 1];
        for n in 2..=limit {
            let p = spf[n] as usize;
            let mut m = n;
            while m % p == 0 {
                m /= p;
            }
            if m == 1 {
                values[n] = (p as f64).ln();
            }
        }
        Self { values }
    }

    pub fn limit(&self) -> usize {
        self.values.len() - 1
    }

    /// Lambda(n); panics when `n` exceeds the table limit.
    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }

    /// Iterates over `(n, Lambda(n))` for prime powers `lo <= n <= hi`.
    pub fn prime_powers(&self, lo: usize, hi: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let hi = hi.min(self.limit());
        (lo.max(2)..=hi).filter_map(move |n| {
            let v = self.values[n];
            (v != 0.0).then_some((n, v))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_values() {
        assert!((von_mangoldt(8) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(von_mangoldt(12), 0.0);
        assert_eq!(von_mangoldt(1), 0.0);
        assert_eq!(moebius(12), 0);
        assert_eq!(moebius(1), 1);
        assert_eq!(moebius(6), 1);
        assert_eq!(moebius(30), -1);
        assert_eq!(euler_phi(12), 4);
        assert_eq!(euler_phi(1), 1);
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(least_primitive_root(3, 1), 2);
        assert_eq!(least_primitive_root(5, 1), 2);
        assert_eq!(least_primitive_root(7, 1), 3);
        assert_eq!(least_primitive_root(3, 2), 2);
        assert_eq!(least_primitive_root(41, 1), 6);
    }

    #[test]
    fn inverse() {
        assert_eq!(inverse_mod(3, 7), Some(5));
        assert_eq!(inverse_mod(2, 4), None);
        assert_eq!(reduce_signed(-1, 4), 3);
    }

    #[test]
    fn sieve_matches_trial_division() {
        let table = VonMangoldtTable::new(5000);
        for n in 0..=5000u64 {
            assert_eq!(table.get(n as usize), von_mangoldt(n), "n = {n}");
        }
    }

    #[test]
    fn chebyshev_bound_on_non_coprime_terms() {
        // sum_{n <= N, gcd(n, M) > 1} Lambda(n) <= 2 log M log N
        let table = VonMangoldtTable::new(10_000);
        let checkpoints = [10usize, 100, 1000, 10_000];
        for m in 2..=10_000u64 {
            let mut lhs = 0.0;
            let mut next = 0;
            for (k, v) in table.prime_powers(2, 10_000) {
                while next < checkpoints.len() && k > checkpoints[next] {
                    let n = checkpoints[next] as f64;
                    assert!(lhs <= 2.0 * (m as f64).ln() * n.ln(), "M={m} N={n}");
                    next += 1;
                }
                if gcd(k as u64, m) > 1 {
                    lhs += v;
                }
            }
            assert!(lhs <= 2.0 * (m as f64).ln() * 10_000f64.ln(), "M={m}");
        }
    }
}
