//! Elementary multiplicative arithmetic on machine-sized integers.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{invalid, Error, Result};

/// A positive integer together with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredInt {
    pub value: u64,
    /// `(prime, exponent)` pairs, primes strictly increasing.
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInt {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

pub fn factor(n: u64) -> Result<FactoredInt> {
    if n == 0 {
        return invalid("factor: n must be positive");
    }
    if n > 1u64 << 63 {
        return invalid("factor: n exceeds 2^63");
    }
    let mut factors = Vec::new();
    let mut m = n;
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut m);
    push(3, &mut m);
    let mut p = 5u64;
    while p.saturating_mul(p) <= m {
        push(p, &mut m);
        push(p + 2, &mut m);
        p += 6;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(FactoredInt { value: n, factors })
}

/// Factorization of a value already known to be positive.
pub(crate) fn fac(n: u64) -> FactoredInt {
    factor(n).expect("positive argument")
}

pub fn mobius(n: &FactoredInt) -> i64 {
    if n.is_squarefree() {
        if n.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

pub fn euler_phi(n: &FactoredInt) -> u64 {
    n.factors
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Σ_{d|n} d^t, exactly.
pub fn sigma(t: u32, n: &FactoredInt) -> BigUint {
    let mut acc = BigUint::one();
    for &(p, e) in &n.factors {
        let pt = BigUint::from(p).pow(t);
        let mut term = BigUint::one();
        let mut local = BigUint::one();
        for _ in 0..e {
            term *= &pt;
            local += &term;
        }
        acc *= local;
    }
    acc
}

/// Number of divisors.
pub fn sigma0(n: &FactoredInt) -> u64 {
    n.factors.iter().map(|&(_, e)| u64::from(e) + 1).product()
}

/// Sum of divisors.
pub fn sigma1(n: &FactoredInt) -> u64 {
    n.factors
        .iter()
        .map(|&(p, e)| (p.pow(e + 1) - 1) / (p - 1))
        .product()
}

/// ν(N) = N ∏_{p|N} (1 + 1/p), the index of Γ₀(N).
pub fn nu_index(n: &FactoredInt) -> u64 {
    n.factors
        .iter()
        .map(|&(p, e)| (p + 1) * p.pow(e - 1))
        .product()
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

pub fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

pub fn mod_inverse(x: i64, c: u64) -> Result<u64> {
    if c == 0 {
        return invalid("mod_inverse: modulus must be positive");
    }
    if c == 1 {
        return Ok(0);
    }
    let ci = c as i128;
    let (mut r0, mut r1) = (ci, (x as i128).rem_euclid(ci));
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(Error::NotInvertible { x, c });
    }
    Ok(s0.rem_euclid(ci) as u64)
}

/// Kronecker symbol (D | m) for a discriminant-like D.
pub fn kronecker_chi(d: i64, m: u64) -> Result<i64> {
    if d.rem_euclid(4) > 1 {
        return invalid(format!("kronecker_chi: D = {d} is not 0 or 1 mod 4"));
    }
    if m == 0 {
        return invalid("kronecker_chi: m must be positive");
    }
    Ok(kronecker(d, m))
}

/// General Kronecker symbol (a | n) for n > 0.
pub(crate) fn kronecker(a: i64, mut n: u64) -> i64 {
    let mut result = 1i64;
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
        n >>= twos;
    }
    // Jacobi symbol for odd n.
    let mut a = a.rem_euclid(n as i64) as u64;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            result = -result;
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// #{x mod K : x² − t x + n ≡ 0 (mod K)} by exhaustive scan.
pub fn count_congruence_roots(t: i64, n: i64, k: u64) -> u64 {
    let kk = k as i128;
    let t = (t as i128).rem_euclid(kk);
    let n = (n as i128).rem_euclid(kk);
    (0..kk)
        .filter(|&x| (x * x - t * x + n).rem_euclid(kk) == 0)
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_examples() {
        assert!(factor(1).unwrap().factors.is_empty());
        assert_eq!(factor(12).unwrap().factors, vec![(2, 2), (3, 1)]);
        assert_eq!(
            factor(9120).unwrap().factors,
            vec![(2, 5), (3, 1), (5, 1), (19, 1)]
        );
        assert!(factor(0).is_err());
        let big = (1u64 << 61) - 1;
        assert_eq!(factor(big).unwrap().factors, vec![(big, 1)]);
    }

    #[test]
    fn multiplicative_examples() {
        assert_eq!(mobius(&fac(1)), 1);
        assert_eq!(mobius(&fac(6)), 1);
        assert_eq!(mobius(&fac(12)), 0);
        assert_eq!(euler_phi(&fac(1)), 1);
        assert_eq!(euler_phi(&fac(6)), 2);
        assert_eq!(euler_phi(&fac(12)), 4);
        assert_eq!(sigma(0, &fac(12)), BigUint::from(6u32));
        assert_eq!(sigma(1, &fac(6)), BigUint::from(12u32));
        assert_eq!(sigma(0, &fac(1)), BigUint::from(1u32));
        assert_eq!(nu_index(&fac(1)), 1);
        assert_eq!(nu_index(&fac(6)), 12);
        assert_eq!(nu_index(&fac(5)), 6);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(1, 7).unwrap(), 1);
        assert_eq!(mod_inverse(2, 5).unwrap(), 3);
        assert_eq!(mod_inverse(4, 9).unwrap(), 7);
        assert_eq!(mod_inverse(-2, 5).unwrap(), 2);
        assert!(matches!(mod_inverse(6, 9), Err(Error::NotInvertible { .. })));
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker_chi(-4, 3).unwrap(), -1);
        assert_eq!(kronecker_chi(-3, 2).unwrap(), -1);
        assert_eq!(kronecker_chi(-23, 1).unwrap(), 1);
        assert!(kronecker_chi(-2, 3).is_err());
        assert!(kronecker_chi(7, 3).is_err());
    }

    fn is_qr(a: i64, p: u64) -> bool {
        (1..p).any(|x| ((x * x) as i64 - a).rem_euclid(p as i64) == 0)
    }

    #[test]
    fn kronecker_matches_residue_counts() {
        let primes = [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
        for d in -200i64..=200 {
            if d.rem_euclid(4) > 1 || d == 0 {
                continue;
            }
            for &p in &primes {
                let expect = if d.rem_euclid(p as i64) == 0 {
                    0
                } else if is_qr(d, p) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(d, p), expect, "D={d} p={p}");
            }
            // At 2 the symbol depends on D mod 8.
            let expect2 = match d.rem_euclid(8) {
                1 | 7 => 1,
                3 | 5 => -1,
                _ => 0,
            };
            assert_eq!(kronecker(d, 2), expect2);
            // Complete multiplicativity in m.
            for m1 in 1..15u64 {
                for m2 in 1..15u64 {
                    assert_eq!(kronecker(d, m1 * m2), kronecker(d, m1) * kronecker(d, m2));
                }
            }
        }
    }

    #[test]
    fn congruence_root_examples() {
        assert_eq!(count_congruence_roots(0, 1, 2), 1);
        assert_eq!(count_congruence_roots(5, 3, 1), 1);
        // x = 2 is a double root: 4 - 2 + 1 = 3.
        assert_eq!(count_congruence_roots(1, 1, 3), 1);
        assert_eq!(count_congruence_roots(1, 1, 5), 0);
    }

    #[test]
    fn congruence_roots_crt() {
        for k1 in 1..=20u64 {
            for k2 in 1..=20u64 {
                if k1 * k2 > 200 || gcd(k1, k2) != 1 {
                    continue;
                }
                for t in -6..6 {
                    for n in 1..8 {
                        assert_eq!(
                            count_congruence_roots(t, n, k1 * k2),
                            count_congruence_roots(t, n, k1) * count_congruence_roots(t, n, k2)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn divisors_sorted() {
        assert_eq!(fac(12).divisors(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(fac(1).divisors(), vec![1]);
    }

    #[test]
    fn isqrt_edges() {
        for n in 0..10_000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), 4294967295);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn multiplicativity(a in 1u64..1_000_000, b in 1u64..1_000_000) {
                prop_assume!(gcd(a, b) == 1);
                let (fa, fb, fab) = (fac(a), fac(b), fac(a * b));
                prop_assert_eq!(mobius(&fab), mobius(&fa) * mobius(&fb));
                prop_assert_eq!(euler_phi(&fab), euler_phi(&fa) * euler_phi(&fb));
                prop_assert_eq!(nu_index(&fab), nu_index(&fa) * nu_index(&fb));
                for t in 0..4 {
                    prop_assert_eq!(sigma(t, &fab), sigma(t, &fa) * sigma(t, &fb));
                }
            }

            #[test]
            fn inverse_round_trip(x in -10_000i64..10_000, c in 1u64..100_000) {
                if let Ok(inv) = mod_inverse(x, c) {
                    prop_assert_eq!(((x as i128).rem_euclid(c as i128) * inv as i128) % c as i128, (1 % c) as i128);
                } else {
                    prop_assert!(gcd(x.unsigned_abs(), c) > 1);
                }
            }
        }
    }
}
