//! Dirichlet L-values through the Hurwitz zeta function.
//!
//! L(s, χ) = m⁻ˢ Σ_{a=1}^{m} χ(a) ζ(s, a/m) for s ≠ 1, and at s = 1 the
//! non-principal case reduces to L(1, χ) = −(1/m) Σ χ(a) ψ(a/m) because the
//! character sums to zero over a period.

use super::DirichletCharacter;
use crate::{Error, Result};

// B_{2j} / (2j)! for j = 1..=10.
const EM_COEFFS: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

// B_{2j} for j = 1..=10.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174_611.0 / 330.0,
];

/// Hurwitz zeta ζ(s, a) for s > 0, s ≠ 1, a > 0, with an estimate of the
/// Euler-Maclaurin truncation error.
pub fn hurwitz_zeta(s: f64, a: f64) -> (f64, f64) {
    assert!(s > 0.0 && s != 1.0 && a > 0.0);
    let n = 24.0_f64.max(2.0 * s);
    let n_terms = n as usize;
    let mut head = 0.0;
    for k in (0..n_terms).rev() {
        head += (k as f64 + a).powf(-s);
    }
    let x = n_terms as f64 + a;
    let mut total = head + x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising = s (s+1) ... (s+2j-2)
    let mut rising = s;
    let mut last = 0.0;
    for (j, &c) in EM_COEFFS.iter().enumerate() {
        let exp = -s - 2.0 * j as f64 - 1.0;
        last = c * rising * x.powf(exp);
        total += last;
        rising *= (s + 2.0 * j as f64 + 1.0) * (s + 2.0 * j as f64 + 2.0);
    }
    (total, last.abs())
}

/// Digamma function for x > 0.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 0.0;
    let mut y = x;
    while y < 20.0 {
        shift += 1.0 / y;
        y += 1.0;
    }
    let y2 = y * y;
    let mut pow = y2;
    let mut tail = 0.0;
    for (j, &b) in BERNOULLI.iter().enumerate() {
        tail += b / (2.0 * (j + 1) as f64 * pow);
        pow *= y2;
    }
    y.ln() - 0.5 / y - tail - shift
}

/// 𝕃(s, χ) = Σ χ(n) n⁻ˢ for real s > 0.
pub fn dirichlet_l(chi: &DirichletCharacter, s: f64, tol: f64) -> Result<f64> {
    if !(s > 0.0) || !(tol > 0.0) {
        return Err(Error::Precondition(format!("need s > 0 and tol > 0, got s = {s}, tol = {tol}")));
    }
    if chi.is_principal() && s <= 1.0 {
        return Err(Error::Divergent);
    }
    let m = chi.modulus();
    let mf = m as f64;
    if s == 1.0 {
        let mut acc = 0.0;
        for a in 1..=m {
            let v = chi.value(a as i64);
            if v != 0 {
                acc += v as f64 * digamma(a as f64 / mf);
            }
        }
        return Ok(-acc / mf);
    }
    let mut acc = 0.0;
    let mut err = 0.0;
    for a in 1..=m {
        let v = chi.value(a as i64);
        if v != 0 {
            let (z, e) = hurwitz_zeta(s, a as f64 / mf);
            acc += v as f64 * z;
            err += e;
        }
    }
    let scale = mf.powf(-s);
    let err = err * scale + acc.abs() * scale * 1e-15 * mf;
    if err > tol {
        return Err(Error::Range(format!("L-value error estimate {err:e} exceeds tol {tol:e}")));
    }
    Ok(acc * scale)
}
