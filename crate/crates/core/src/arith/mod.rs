//! Elementary number theory on machine integers.

mod character;
mod factor;
mod lseries;

pub use character::DirichletCharacter;
pub use factor::{factorize, is_prime, Factorization};
pub use lseries::{digamma, dirichlet_l, hurwitz_zeta};

use num_rational::Ratio;

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    gcd(a as i128, b as i128) as u64
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd_u64(a, b) * b
}

/// gcd of the four coordinates (0 for the zero vector).
pub fn content(x: &[i64; 4]) -> i64 {
    x.iter().fold(0i128, |g, &v| gcd(g, v as i128)) as i64
}

/// Least non-negative residue.
pub fn modp(a: i128, m: i128) -> i128 {
    let r = a % m;
    if r < 0 {
        r + m
    } else {
        r
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (modp(a, m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| modp(s0, m))
}

/// Exponent of `p` in `n` (n != 0).
pub fn valuation(mut n: i128, p: u64) -> u32 {
    debug_assert!(n != 0);
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn isqrt(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: i128) -> bool {
    n >= 0 && {
        let r = isqrt(n as u128);
        r * r == n as u128
    }
}

/// Kronecker symbol (a/n).
pub fn kronecker(a: i64, n: i64) -> i8 {
    let (mut a, mut n) = (a as i128, n as i128);
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut sign = 1i8;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    let v = n.trailing_zeros();
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        n >>= v;
        if v % 2 == 1 && (modp(a, 8) == 3 || modp(a, 8) == 5) {
            sign = -sign;
        }
    }
    // Jacobi symbol (a/n) for odd positive n.
    a = modp(a, n);
    while a != 0 {
        let t = a.trailing_zeros();
        a >>= t;
        if t % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        (a, n) = (n % a, a);
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Möbius function, Euler's totient and θ₁(n) = ∏_{p|n} (1 − 1/p).
pub fn mu_phi_theta1(n: u64) -> (i8, u64, Ratio<u64>) {
    assert!(n >= 1);
    let f = factorize(n);
    let mut mu = 1i8;
    let mut phi = 1u64;
    let (mut num, mut den) = (1u64, 1u64);
    for &(p, e) in &f.factors {
        mu = if e > 1 { 0 } else { -mu };
        phi *= (p - 1) * p.pow(e - 1);
        num *= p - 1;
        den *= p;
    }
    (mu, phi, Ratio::new(num, den))
}

pub fn moebius(n: u64) -> i8 {
    mu_phi_theta1(n).0
}

pub fn euler_phi(n: u64) -> u64 {
    mu_phi_theta1(n).1
}

/// θ₂(n) = θ₁(n)·∏_{p∤n}(1 − p⁻²), evaluated as θ₁(n)/(ζ(2)∏_{p|n}(1 − p⁻²)).
///
/// The closed form is accurate to a few ulps, far below any sensible `tol`.
pub fn theta2(n: u64, tol: f64) -> f64 {
    assert!(n >= 1 && tol > 0.0);
    let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let mut v = 1.0 / zeta2;
    for p in factorize(n).primes() {
        let pf = p as f64;
        v *= (1.0 - 1.0 / pf) / (1.0 - 1.0 / (pf * pf));
    }
    v
}

/// Ramanujan sum c_q(m) = Σ_{d | gcd(q,m)} d·μ(q/d).
pub fn ramanujan_sum(q: u64, m: i128) -> i128 {
    assert!(q >= 1);
    let g = gcd(q as i128, m) as u64;
    divisors(g)
        .into_iter()
        .map(|d| d as i128 * moebius(q / d) as i128)
        .sum()
}

/// c_q(m) for m = 0, …, q − 1.
pub fn ramanujan_table(q: u64) -> Vec<i128> {
    (0..q as i128).map(|m| ramanujan_sum(q, m)).collect()
}

/// Sorted divisors of n.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n).factors {
        let len = out.len();
        let mut pk = 1;
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

/// Primes up to and including `n` (sieve of Eratosthenes).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i as u64))
        .collect()
}

/// Squarefree kernel with sign: n = s·m² with s squarefree.
pub fn squarefree_part(n: i64) -> i64 {
    assert!(n != 0);
    let mut s = n.signum();
    for (p, e) in factorize(n.unsigned_abs()).factors {
        if e % 2 == 1 {
            s *= p as i64;
        }
    }
    s
}

/// Discriminant of ℚ(√n) for non-square n.
pub fn fundamental_discriminant(n: i64) -> i64 {
    let d = squarefree_part(n);
    if modp(d as i128, 4) == 1 {
        d
    } else {
        4 * d
    }
}

/// Numbers up to `limit` whose prime factors all lie in `primes`, ascending.
pub fn smooth_numbers(primes: &[u64], limit: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for &p in primes {
        let len = out.len();
        for i in 0..len {
            let mut v = out[i];
            while let Some(w) = v.checked_mul(p).filter(|&w| w <= limit) {
                out.push(w);
                v = w;
            }
        }
    }
    out.sort_unstable();
    out
}
