//! Elementary number theory over machine integers: gcd/xgcd, modular
//! arithmetic, prime generation, factorization of small integers, Euler phi,
//! Kronecker symbols and multiplicative orders.
//!
//! Everything here works on `u64`/`i64`; the exact big-integer arithmetic
//! lives in the linear algebra and cyclotomic modules.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Extended gcd: returns (g, x, y) with a*x + b*y = g = gcd(a, b), g >= 0.
pub fn xgcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
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

/// Inverse of a mod n; requires gcd(a, n) = 1.
pub fn inv_mod(a: u64, n: u64) -> u64 {
    assert!(n > 0);
    let (g, x, _) = xgcd((a % n) as i64, n as i64);
    assert_eq!(g, 1, "inv_mod: {} not invertible mod {}", a, n);
    x.rem_euclid(n as i64) as u64
}

pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division plus Pollard rho for larger factors.
/// Returns (prime, exponent) pairs with primes ascending.
pub fn factor(n: u64) -> Vec<(u64, u32)> {
    let mut n = n;
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in [2u64, 3, 5] {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut d = 7u64;
    let wheel = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut wi = 0;
    while d * d <= n && d < 1_000_000 {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += wheel[wi];
        wi = (wi + 1) % 8;
    }
    if n > 1 {
        if is_prime(n) {
            out.push((n, 1));
        } else {
            let mut stack = vec![n];
            let mut primes = Vec::new();
            while let Some(m) = stack.pop() {
                if is_prime(m) {
                    primes.push(m);
                } else {
                    let f = pollard_rho(m);
                    stack.push(f);
                    stack.push(m / f);
                }
            }
            primes.sort_unstable();
            let mut i = 0;
            while i < primes.len() {
                let p = primes[i];
                let mut e = 0;
                while i < primes.len() && primes[i] == p {
                    e += 1;
                    i += 1;
                }
                out.push((p, e));
            }
        }
    }
    out.sort_unstable();
    out
}

fn pollard_rho(n: u64) -> u64 {
    assert!(n > 1 && !is_prime(n));
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factor(n) {
        let cur = divs.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for d in &cur {
                divs.push(d * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn euler_phi(n: u64) -> u64 {
    let mut out = n;
    for (p, _) in factor(n) {
        out = out / p * (p - 1);
    }
    out
}

/// sigma_0(n), the number of divisors.
pub fn sigma0(n: u64) -> u64 {
    factor(n).iter().map(|&(_, e)| (e + 1) as u64).product()
}

/// Multiplicative order of a mod n; requires gcd(a, n) = 1.
pub fn mult_order(a: u64, n: u64) -> u64 {
    assert_eq!(gcd(a % n, n), 1);
    let phi = euler_phi(n);
    let mut ord = phi;
    for (p, _) in factor(phi) {
        while ord % p == 0 && pow_mod(a, ord / p, n) == 1 {
            ord /= p;
        }
    }
    ord
}

/// Kronecker symbol (a|n), fully general.
pub fn kronecker(a: i64, n: i64) -> i64 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut a = a;
    let mut n = n;
    let mut sign = 1i64;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    // strip factors of 2 from n
    let mut t = 0;
    while n % 2 == 0 {
        n /= 2;
        t += 1;
    }
    if t > 0 {
        if a % 2 == 0 {
            return 0;
        }
        // (a|2) = (2|a) for odd a
        if t % 2 == 1 {
            let r = (a % 8 + 8) % 8;
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
    }
    a = ((a % n) + n) % n;
    // Jacobi symbol loop
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Primes up to and including `bound`, by sieve.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return vec![];
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2;
    while p * p <= n {
        if sieve[p] {
            let mut q = p * p;
            while q <= n {
                sieve[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    (2..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

/// Smallest primitive root mod p^e (p odd prime) or mod 2, 4.
pub fn primitive_root(modulus: u64) -> u64 {
    assert!(modulus >= 2);
    if modulus == 2 {
        return 1;
    }
    if modulus == 4 {
        return 3;
    }
    let f = factor(modulus);
    assert!(
        f.len() == 1 && f[0].0 % 2 == 1,
        "primitive_root: modulus must be 2, 4 or an odd prime power"
    );
    let phi = euler_phi(modulus);
    let phi_factors = factor(phi);
    'g: for g in 2..modulus {
        if gcd(g, modulus) != 1 {
            continue;
        }
        for &(q, _) in &phi_factors {
            if pow_mod(g, phi / q, modulus) == 1 {
                continue 'g;
            }
        }
        return g;
    }
    unreachable!("no primitive root found")
}

/// gcd of a list of BigInt, nonnegative; 0 for an empty or all-zero list.
pub fn bigint_gcd_all<'a>(items: impl Iterator<Item = &'a BigInt>) -> BigInt {
    let mut g = BigInt::zero();
    for x in items {
        if x.is_zero() {
            continue;
        }
        g = num_integer::Integer::gcd(&g, x);
        if g.is_one() {
            break;
        }
    }
    g.abs()
}

/// Greatest common divisor of two u128 values (used for torsion gcd streams).
pub fn gcd_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::gcd(a, b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xgcd_identity() {
        for a in -50i64..50 {
            for b in -50i64..50 {
                let (g, x, y) = xgcd(a, b);
                assert_eq!(a * x + b * y, g);
                assert_eq!(g, gcd(a.unsigned_abs(), b.unsigned_abs()) as i64);
            }
        }
    }

    #[test]
    fn factor_roundtrip() {
        for n in 1u64..2000 {
            let f = factor(n);
            let prod: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, n);
            for &(p, _) in &f {
                assert!(is_prime(p));
            }
        }
    }

    #[test]
    fn phi_and_orders() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(82), 40);
        assert_eq!(euler_phi(40), 16);
        assert_eq!(mult_order(47, 82), 40); // 47 generates (Z/82)^x
        assert_eq!(mult_order(199, 40), 2); // 199 = -1 mod 40
        assert_eq!(mult_order(3, 4), 2);
        assert_eq!(mult_order(5 % 4, 4), 1);
    }

    #[test]
    fn kronecker_quadratic_reciprocity_spots() {
        // (-23|p) for split/inert primes in Q(sqrt(-23))
        assert_eq!(kronecker(-23, 2), 1); // -23 = 1 mod 8, 2 splits
        assert_eq!(kronecker(-23, 3), 1);
        assert_eq!(kronecker(-23, 5), -1);
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(5, 11), 1);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(12, 3), 0);
        // chi_8 is the even character of conductor 8
        assert_eq!(kronecker(8, 7), 1);
        assert_eq!(kronecker(8, 3), -1);
        assert_eq!(kronecker(8, 5), -1);
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(4), 3);
        for &m in &[3u64, 5, 7, 9, 11, 13, 25, 27, 49, 121] {
            let g = primitive_root(m);
            assert_eq!(mult_order(g, m), euler_phi(m));
        }
    }

    #[test]
    fn sieve_matches_is_prime() {
        let ps = primes_up_to(500);
        for n in 2..=500u64 {
            assert_eq!(ps.contains(&n), is_prime(n));
        }
    }
}
