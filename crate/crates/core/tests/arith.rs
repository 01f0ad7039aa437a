use conecount_core::arith::*;
use num_rational::Ratio;
use proptest::prelude::*;
use std::f64::consts::PI;

fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Legendre symbol by listing squares mod p.
fn legendre_oracle(a: i64, p: i64) -> i8 {
    let r = a.rem_euclid(p);
    if r == 0 {
        0
    } else if (1..p).any(|x| (x * x) % p == r) {
        1
    } else {
        -1
    }
}

fn ramanujan_oracle(q: u64, m: i64) -> i64 {
    let s: f64 = (1..=q)
        .filter(|&a| gcd(a as i128, q as i128) == 1)
        .map(|a| (2.0 * PI * a as f64 * m as f64 / q as f64).cos())
        .sum();
    s.round() as i64
}

#[test]
fn factorization_examples() {
    assert!(factorize(1).factors.is_empty());
    assert_eq!(factorize(12).factors, vec![(2, 2), (3, 1)]);
    assert_eq!(factorize(9991).factors, vec![(97, 1), (103, 1)]);
    // semiprime beyond trial division
    let (p, q) = (1_000_000_007u64, 998_244_353u64);
    assert_eq!(factorize(p * q).factors, vec![(q, 1), (p, 1)]);
    assert!(is_prime(18_446_744_073_709_551_557));
}

#[test]
fn kronecker_examples() {
    assert_eq!(kronecker(-4, 2), 0);
    assert_eq!(kronecker(-4, 10), 0);
    assert_eq!(kronecker(-4, 5), 1);
    assert_eq!(kronecker(-4, 7), -1);
}

#[test]
fn kronecker_matches_legendre_on_primes() {
    for p in primes_up_to(200).into_iter().filter(|&p| p > 2) {
        for a in -50..50 {
            assert_eq!(kronecker(a, p as i64), legendre_oracle(a, p as i64), "({a}/{p})");
        }
    }
}

#[test]
fn mu_phi_theta_examples() {
    assert_eq!(mu_phi_theta1(1), (1, 1, Ratio::from_integer(1)));
    assert_eq!(mu_phi_theta1(12), (0, 4, Ratio::new(1, 3)));
    assert_eq!(mu_phi_theta1(30), (-1, 8, Ratio::new(4, 15)));
}

#[test]
fn phi_is_n_theta1() {
    for n in 1..=100_000u64 {
        let (_, phi, theta) = mu_phi_theta1(n);
        assert_eq!(Ratio::from_integer(phi), theta * n, "n = {n}");
    }
}

#[test]
fn phi_by_enumeration() {
    for n in 1..=300u64 {
        let count = (1..=n).filter(|&a| gcd(a as i128, n as i128) == 1).count() as u64;
        assert_eq!(euler_phi(n), count);
    }
}

#[test]
fn theta2_values() {
    assert!((theta2(1, 1e-12) - 6.0 / (PI * PI)).abs() < 1e-12);
    assert!((theta2(2, 1e-12) - 4.0 / (PI * PI)).abs() < 1e-12);
    for n in [3u64, 12, 30, 77] {
        let euler: f64 = factorize(n).primes().map(|p| 1.0 - 1.0 / (p * p) as f64).product();
        let (_, _, t1) = mu_phi_theta1(n);
        let t1 = *t1.numer() as f64 / *t1.denom() as f64;
        assert!((theta2(n, 1e-12) * euler - t1 * theta2(1, 1e-12)).abs() < 1e-12);
    }
}

#[test]
fn ramanujan_examples_and_oracle() {
    assert_eq!(ramanujan_sum(1, 17), 1);
    assert_eq!(ramanujan_sum(6, 4), -1);
    assert_eq!(ramanujan_sum(5, 5), 4);
    for q in 1..=100u64 {
        for m in -30..=30i64 {
            assert_eq!(ramanujan_sum(q, m as i128), ramanujan_oracle(q, m) as i128, "c_{q}({m})");
        }
    }
}

#[test]
fn ramanujan_bounded_by_gcd() {
    for q in 1..=500u64 {
        for m in (-500..=500i128).step_by(7) {
            let g = if m == 0 { q as i128 } else { gcd(q as i128, m) };
            assert!(ramanujan_sum(q, m).abs() <= g);
        }
    }
}

#[test]
fn l_value_examples() {
    let zeta2 = PI * PI / 6.0;
    let l = |chi: &DirichletCharacter, s: f64| dirichlet_l(chi, s, 1e-12).unwrap();
    assert!((l(&DirichletCharacter::principal(1), 2.0) - zeta2).abs() < 1e-10);
    assert!((l(&DirichletCharacter::kronecker(-4).unwrap(), 1.0) - PI / 4.0).abs() < 1e-10);
    assert!((l(&DirichletCharacter::principal(4), 2.0) - 0.75 * zeta2).abs() < 1e-10);
    assert!((l(&DirichletCharacter::kronecker(-4).unwrap(), 2.0) - 0.915_965_594_177_219).abs() < 1e-10);
    assert!(matches!(
        dirichlet_l(&DirichletCharacter::principal(3), 1.0, 1e-9),
        Err(conecount_core::Error::Divergent)
    ));
}

#[test]
fn l_value_against_partial_sums() {
    // Σ_{n ≤ N} χ(n)/n² with the tail bounded by 1/N
    let n_terms = 10_000_000i64;
    for d in [-4i64, 5, -3, 12, -8] {
        let chi = DirichletCharacter::kronecker(d).unwrap();
        let partial: f64 = (1..=n_terms).map(|n| chi.value(n) as f64 / (n as f64 * n as f64)).sum();
        let tol = 1e-9;
        assert!((dirichlet_l(&chi, 2.0, tol).unwrap() - partial).abs() <= 2.0 * tol + 1.0 / n_terms as f64);
    }
}

proptest! {
    #[test]
    fn factorization_reconstructs(n in 1u64..u64::MAX / 2) {
        let f = factorize(n);
        let mut prod = 1u128;
        let mut last = 0;
        for &(p, e) in &f.factors {
            prop_assert!(p > last && is_prime(p));
            last = p;
            prod *= (p as u128).pow(e);
        }
        prop_assert_eq!(prod, n as u128);
    }

    #[test]
    fn small_factorization_matches_trial_division(n in 1u64..2_000_000) {
        prop_assert_eq!(factorize(n).factors, trial_division(n));
    }

    #[test]
    fn kronecker_multiplicative(a in -1000i64..1000, m in 1i64..1000, n in 1i64..1000) {
        prop_assert_eq!(kronecker(a, m * n), kronecker(a, m) * kronecker(a, n));
    }

    #[test]
    fn character_multiplicative_and_periodic(
        d in prop::sample::select(vec![-4i64, -3, 5, -7, 8, -8, 12, 13, -20]),
        l in 1u64..30, m in -500i64..500, n in -500i64..500,
    ) {
        if let Ok(chi) = DirichletCharacter::product(l, d) {
            prop_assert_eq!(chi.value(m * n), chi.value(m) * chi.value(n));
            prop_assert_eq!(chi.value(m), chi.value(m + chi.modulus() as i64));
            let coprime = gcd(m as i128, chi.modulus() as i128) == 1;
            prop_assert_eq!(chi.value(m) != 0, coprime);
        }
    }
}
