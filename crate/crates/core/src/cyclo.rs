//! Exact elements of the cyclotomic ring ℤ[ζ_n].
//!
//! Complete exponential sums are integer combinations of roots of unity, so
//! they are stored exactly as a histogram of exponents reduced modulo the
//! cyclotomic polynomial Φ_n. The reduced coefficient vector in the power
//! basis 1, ζ, …, ζ^{φ(n)−1} is canonical, which makes equality testing exact.

use crate::arith::{divisors, euler_phi, lcm_u64, moebius};
use num_complex::Complex64;
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cyclotomic {
    order: u64,
    coeffs: Vec<i128>,
}

/// Φ_n, lowest coefficient first, from Φ_n = ∏_{d|n} (x^d − 1)^{μ(n/d)}.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i128> {
    assert!(n >= 1);
    let divs = divisors(n);
    let sigma: u64 = divs.iter().sum();
    let mut poly = vec![0i128; sigma as usize + 1];
    poly[0] = 1;
    let mut deg = 0usize;
    // multiply first so every division below is exact
    for &d in &divs {
        if moebius(n / d) == 1 {
            let d = d as usize;
            for i in (0..=deg).rev() {
                poly[i + d] += poly[i];
                poly[i] = -poly[i];
            }
            deg += d;
        }
    }
    for &d in &divs {
        if moebius(n / d) == -1 {
            let d = d as usize;
            // divide by x^d − 1: q_i = −p_i + q_{i−d}, processed from the bottom
            let mut q = vec![0i128; deg - d + 1];
            for i in 0..=deg - d {
                q[i] = -poly[i] + if i >= d { q[i - d] } else { 0 };
            }
            deg -= d;
            poly[..=deg].copy_from_slice(&q);
            for c in poly.iter_mut().skip(deg + 1) {
                *c = 0;
            }
        }
    }
    poly.truncate(deg + 1);
    poly
}

impl Cyclotomic {
    pub fn zero(order: u64) -> Self {
        Self { order, coeffs: vec![0; euler_phi(order) as usize] }
    }

    pub fn integer(order: u64, v: i128) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = v;
        z
    }

    /// Σ_k hist[k]·ζ_n^k, with `hist.len() == n`.
    pub fn from_exponents(order: u64, hist: &[i128]) -> Self {
        assert_eq!(hist.len() as u64, order);
        let phi = cyclotomic_polynomial(order);
        let d = phi.len() - 1;
        let mut p = hist.to_vec();
        for i in (d..p.len()).rev() {
            let c = p[i];
            if c != 0 {
                for j in 0..d {
                    p[i - d + j] -= c * phi[j];
                }
                p[i] = 0;
            }
        }
        p.truncate(d);
        Self { order, coeffs: p }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The value as a rational integer, when it is one.
    pub fn as_integer(&self) -> Option<i128> {
        self.coeffs[1..].iter().all(|&c| c == 0).then(|| self.coeffs[0])
    }

    /// Re-express in ℤ[ζ_m] for a multiple m of the order.
    pub fn lift(&self, m: u64) -> Self {
        assert!(m % self.order == 0, "{m} is not a multiple of {}", self.order);
        if m == self.order {
            return self.clone();
        }
        let step = (m / self.order) as usize;
        let mut hist = vec![0i128; m as usize];
        for (k, &c) in self.coeffs.iter().enumerate() {
            hist[k * step] += c;
        }
        Self::from_exponents(m, &hist)
    }

    fn exponents(&self) -> Vec<i128> {
        let mut h = vec![0i128; self.order as usize];
        h[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        h
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = lcm_u64(self.order, other.order);
        let (a, b) = (self.lift(m), other.lift(m));
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        Self { order: m, coeffs }
    }

    pub fn scale(&self, k: i128) -> Self {
        Self { order: self.order, coeffs: self.coeffs.iter().map(|&c| c * k).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = lcm_u64(self.order, other.order);
        let (a, b) = (self.lift(m).exponents(), other.lift(m).exponents());
        let n = m as usize;
        let mut h = vec![0i128; n];
        for (i, &x) in a.iter().enumerate().filter(|(_, &x)| x != 0) {
            for (j, &y) in b.iter().enumerate().filter(|(_, &y)| y != 0) {
                h[(i + j) % n] += x * y;
            }
        }
        Self::from_exponents(m, &h)
    }

    /// Multiply by ζ_order^k.
    pub fn rotate(&self, k: i128) -> Self {
        let n = self.order as i128;
        let shift = k.rem_euclid(n) as usize;
        let mut h = vec![0i128; n as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            h[(i + shift) % n as usize] += c;
        }
        Self::from_exponents(self.order, &h)
    }

    /// Equality as algebraic numbers, across different orders.
    pub fn same_value(&self, other: &Self) -> bool {
        let m = lcm_u64(self.order, other.order);
        self.lift(m) == other.lift(m)
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(k, &c)| Complex64::from_polar(c as f64, TAU * k as f64 / n))
            .sum()
    }
}

/// Root-of-unity phase e(k/n) in floating point.
pub fn unit_phase(k: i128, n: u64) -> Complex64 {
    let r = k.rem_euclid(n as i128) as f64;
    Complex64::from_polar(1.0, TAU * r / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        let p105 = cyclotomic_polynomial(105);
        assert_eq!(p105.len(), 49);
        assert_eq!(p105[7], -2);
    }

    #[test]
    fn full_orbit_sums() {
        // Σ_{k mod n} ζ^k = 0 and the primitive roots sum to μ(n).
        for n in 1..60u64 {
            let all = Cyclotomic::from_exponents(n, &vec![1; n as usize]);
            assert_eq!(all.as_integer(), Some(if n == 1 { 1 } else { 0 }));
            let prim: Vec<i128> =
                (0..n).map(|k| (crate::arith::gcd_u64(k, n) == 1) as i128).collect();
            let v = Cyclotomic::from_exponents(n, &prim);
            assert_eq!(v.as_integer(), Some(moebius(n) as i128));
        }
    }

    #[test]
    fn lift_and_multiply() {
        let mut h = vec![0; 4];
        h[1] = 1;
        let i = Cyclotomic::from_exponents(4, &h);
        assert_eq!(i.mul(&i).as_integer(), Some(-1));
        let i12 = i.lift(12);
        assert!(i12.same_value(&i));
        let z = i.to_complex();
        assert!((z.re).abs() < 1e-15 && (z.im - 1.0).abs() < 1e-15);
    }
}
