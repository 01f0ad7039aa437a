//! p-adic densities, the modified singular series and the derived measures.
//!
//! Counting residues of the full cone mod p^k never stabilizes, because of
//! the vertex: the non-primitive solutions contribute Σ_j p^{-2j} times the
//! primitive density, with an error of order p^{-k}. The primitive count does
//! stabilize exactly (Hensel, once k > 2·v_p(∇F)), so densities are computed
//! from primitive counts and the full density is recovered as
//! σ_p = σ*_p / (1 − p⁻²). For p | L the class is primitive by definition
//! and the count is already the density.

use crate::arith::{self, dirichlet_l, euler_phi, factorize, modp, valuation, DirichletCharacter};
use crate::brauer;
use crate::expsums::CongruenceData;
use crate::quadform::QuadraticForm;
use crate::{Error, Result};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

pub type Q = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMethod {
    ClosedForm,
    RawCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalDensity {
    pub p: u64,
    /// σ_p(𝒲; L, Γ).
    pub value: Q,
    /// Density of primitive solutions; equals `value` when p | L.
    pub primitive_value: Q,
    pub stabilized_at: u32,
    pub method: DensityMethod,
}

/// Number of v mod p^k with F(v) ≡ 0 mod p^k, and either v ≡ Γ mod p^e
/// (e = ord_p L > 0) or v primitive (e = 0).
pub fn primitive_count(f: &QuadraticForm, p: u64, k: u32, cong: &CongruenceData) -> u64 {
    let e = valuation(cong.modulus() as i128, p);
    let m = p.pow(k) as i64;
    let pe = p.pow(e.min(k)) as i64;
    let gamma = cong.gamma();
    let g = f.gram();
    // fibre over the last coordinate: a t² + b t + c with b = 2Σ a_{3j} v_j
    let a = g[3][3] as i64;
    // roots[b][c] = #{t : a t² + b t + c ≡ 0}, for admissible t
    let build = |admissible: &dyn Fn(i64) -> bool| -> Vec<u32> {
        let mut table = vec![0u32; (m * m) as usize];
        for t in (0..m).filter(|&t| admissible(t)) {
            let at2 = (a.rem_euclid(m) * t % m) * t % m;
            for b in 0..m {
                let v = (at2 + b * t) % m;
                let c = (m - v) % m;
                table[(b * m + c) as usize] += 1;
            }
        }
        table
    };
    let p_i = p as i64;
    let (t_any, t_unit);
    let t_cong;
    if e > 0 {
        let g3 = gamma[3].rem_euclid(pe);
        t_cong = build(&|t| t % pe == g3);
        t_any = Vec::new();
        t_unit = Vec::new();
    } else {
        t_cong = Vec::new();
        t_any = build(&|_| true);
        t_unit = build(&|t| t % p_i != 0);
    }
    let step = if e > 0 { pe } else { 1 };
    let start = |i: usize| if e > 0 { gamma[i].rem_euclid(pe) } else { 0 };
    let mut total = 0u64;
    let mut v0 = start(0);
    while v0 < m {
        let mut v1 = start(1);
        while v1 < m {
            let mut v2 = start(2);
            while v2 < m {
                let v = [v0 as i128, v1 as i128, v2 as i128, 0];
                let c = modp(f.eval_mod(&v, m as i128), m as i128) as i64;
                let b = (2 * (g[3][0] * v0 + g[3][1] * v1 + g[3][2] * v2)).rem_euclid(m);
                let idx = (b * m + c) as usize;
                total += if e > 0 {
                    t_cong[idx]
                } else if v0 % p_i == 0 && v1 % p_i == 0 && v2 % p_i == 0 {
                    t_unit[idx]
                } else {
                    t_any[idx]
                } as u64;
                v2 += step;
            }
            v1 += step;
        }
        v0 += step;
    }
    total
}

/// All solutions of F(v) ≡ 0 mod p^k, primitive or not (no congruence).
pub fn full_count(f: &QuadraticForm, p: u64, k: u32) -> u64 {
    let m = p.pow(k) as i128;
    let mut n = 0u64;
    let mi = m as i64;
    for a in 0..mi {
        for b in 0..mi {
            for c in 0..mi {
                for d in 0..mi {
                    if f.eval_mod(&[a as i128, b as i128, c as i128, d as i128], m) == 0 {
                        n += 1;
                    }
                }
            }
        }
    }
    n
}

fn ratio(num: u64, p: u64, k: u32) -> Q {
    Q::new(num as i128, (p as i128).pow(3 * k))
}

/// (1 − ψ/p²)/(1 − ψ/p) and the primitive version, for p ∤ 2Δ.
pub fn closed_form_density(f: &QuadraticForm, p: u64) -> (Q, Q) {
    let psi = f.psi(p as i64) as i128;
    let p = p as i128;
    let full = Q::new(p * p - psi, p * (p - psi));
    let prim = full * Q::new(p * p - 1, p * p);
    (full, prim)
}

/// σ_p(𝒲; L, Γ).
pub fn sigma_p(f: &QuadraticForm, p: u64, cong: &CongruenceData, max_k: u32) -> Result<LocalDensity> {
    let e = valuation(cong.modulus() as i128, p);
    if max_k < e + 2 {
        return Err(Error::Precondition(format!("max_k = {max_k} must be at least ord_p(L) + 2 = {}", e + 2)));
    }
    let bad = 2 * f.disc().unsigned_abs() as u128 * cong.modulus() as u128;
    if bad % p as u128 != 0 {
        let (full, prim) = closed_form_density(f, p);
        return Ok(LocalDensity { p, value: full, primitive_value: prim, stabilized_at: 1, method: DensityMethod::ClosedForm });
    }
    let t_max = valuation(2 * f.disc() as i128, p);
    let mut k = (e + 2).max(2 * t_max + 1);
    if k + 1 > max_k {
        return Err(Error::NotStabilized { p, max_k });
    }
    let mut prev = ratio(primitive_count(f, p, k, cong), p, k);
    while k < max_k {
        k += 1;
        let cur = ratio(primitive_count(f, p, k, cong), p, k);
        if cur == prev {
            if cur.is_zero() {
                return Err(Error::Insoluble(p));
            }
            let value = if e > 0 { cur } else { cur * Q::new((p * p) as i128, (p * p - 1) as i128) };
            return Ok(LocalDensity { p, value, primitive_value: cur, stabilized_at: k - 1, method: DensityMethod::RawCount });
        }
        prev = cur;
    }
    Err(Error::NotStabilized { p, max_k })
}

/// Primes dividing 2ΔL.
pub fn bad_primes(f: &QuadraticForm, l: u64) -> Vec<u64> {
    factorize(2 * f.disc().unsigned_abs() * l).primes().collect()
}

pub const MAX_K: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SingularSeries {
    pub value: f64,
    pub truncation_prime: u64,
    /// Bound on |value − limit|.
    pub tail_bound: f64,
    pub l1: f64,
    pub bad_factors: BTreeMap<u64, LocalDensity>,
    /// Set when `tail_bound` exceeds the requested tolerance.
    pub warning: Option<String>,
}

fn psi_character(f: &QuadraticForm) -> DirichletCharacter {
    DirichletCharacter::kronecker(4 * f.disc()).expect("4Δ is a discriminant")
}

/// 𝔖̃_{L,Γ}(𝒲) = 𝕃(1, ψ)∏_p (1 − ψ(p)/p)σ_p, truncated at p_max.
pub fn singular_series_w(f: &QuadraticForm, cong: &CongruenceData, tol: f64, p_max: u64) -> Result<SingularSeries> {
    let bad = bad_primes(f, cong.modulus());
    let p_max = p_max.max(*bad.last().unwrap()).max(7);
    let mut log_prod = 0.0;
    let mut bad_factors = BTreeMap::new();
    for p in arith::primes_up_to(p_max) {
        let psi = f.psi(p as i64) as f64;
        if bad.contains(&p) {
            let d = sigma_p(f, p, cong, MAX_K)?;
            log_prod += ((1.0 - psi / p as f64) * d.value.to_f64().unwrap()).ln();
            bad_factors.insert(p, d);
        } else {
            let pf = p as f64;
            log_prod += (-psi / (pf * pf)).ln_1p();
        }
    }
    let l1 = dirichlet_l(&psi_character(f), 1.0, tol.min(1e-10))?;
    let value = l1 * log_prod.exp();
    // Σ_{p > P} |log(1 − ψ/p²)| ≤ Σ_{n > P} 1/(n² − 1) ≤ 1/P
    let tail_bound = value.abs() * (1.0 / p_max as f64).exp_m1();
    let warning = (tail_bound > tol)
        .then(|| format!("tail bound {tail_bound:.3e} exceeds tol {tol:.1e} at p_max = {p_max}"));
    Ok(SingularSeries { value, truncation_prime: p_max, tail_bound, l1, bad_factors, warning })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub series_w: f64,
    pub tamagawa_v: f64,
    pub omega_f: f64,
    pub truncation_prime: u64,
    pub tail_bound: f64,
    pub l_values: BTreeMap<String, f64>,
    /// Set when L²·𝔖_V leaves [10⁻³, 10³].
    pub diagnostic: Option<String>,
    pub warnings: Vec<String>,
}

/// 𝔖̃, ω_f = 𝔖̃/𝕃(2, χ₀[L]) and 𝔖_V = φ(L)ω_f.
pub fn measures(f: &QuadraticForm, cong: &CongruenceData, tol: f64, p_max: u64) -> Result<DensityReport> {
    let l = cong.modulus();
    let s = singular_series_w(f, cong, tol, p_max)?;
    let l2 = dirichlet_l(&DirichletCharacter::principal(l), 2.0, 1e-13)?;
    let omega_f = s.value / l2;
    let tamagawa_v = euler_phi(l) as f64 * omega_f;
    let mut l_values = BTreeMap::new();
    l_values.insert("L(1,psi)".to_string(), s.l1);
    l_values.insert(format!("L(2,chi0[{l}])"), l2);
    let scaled = tamagawa_v * (l as f64).powi(2);
    let diagnostic = (!(1e-3..=1e3).contains(&scaled))
        .then(|| format!("L^2 * tamagawa = {scaled:.3e} outside [1e-3, 1e3]"));
    Ok(DensityReport {
        series_w: s.value,
        tamagawa_v,
        omega_f,
        truncation_prime: s.truncation_prime,
        tail_bound: s.tail_bound / l2,
        l_values,
        diagnostic,
        warnings: s.warning.into_iter().collect(),
    })
}

/// 𝔖_V through the expanded product
/// 𝕃(1,ψ)·∏_{p|L} p^{e}(1 − 1/p)(1 − ψ/p)σ_p·∏_{p∤L}(1 − ψ/p)σ*_p,
/// returned with its tail bound.
pub fn tamagawa_by_product(f: &QuadraticForm, cong: &CongruenceData, p_max: u64) -> Result<(f64, f64)> {
    let l = cong.modulus();
    let bad = bad_primes(f, l);
    let p_max = p_max.max(*bad.last().unwrap()).max(7);
    let mut log_prod = 0.0;
    for p in arith::primes_up_to(p_max) {
        let psi = Q::new(f.psi(p as i64) as i128, p as i128);
        let factor = if bad.contains(&p) {
            let d = sigma_p(f, p, cong, MAX_K)?;
            let e = valuation(l as i128, p);
            if e > 0 {
                let pe = Q::from_integer((p as i128).pow(e));
                pe * (Q::one() - Q::new(1, p as i128)) * (Q::one() - psi) * d.value
            } else {
                (Q::one() - psi) * d.primitive_value
            }
        } else {
            let (_, prim) = closed_form_density(f, p);
            (Q::one() - psi) * prim
        };
        log_prod += factor.to_f64().unwrap().ln();
    }
    let l1 = dirichlet_l(&psi_character(f), 1.0, 1e-12)?;
    let value = l1 * log_prod.exp();
    // good factors are (1 − p⁻²)(1 − ψp⁻²), so the log tail is at most 2/P
    let tail = value.abs() * (2.0 / p_max as f64).exp_m1();
    Ok((value, tail))
}

/// (1 − ψ(p)p⁻ˢ)⁻¹(1 − p⁻ˢ)⁻¹ for p ∤ 2Δ.
pub fn artin_local_factor(f: &QuadraticForm, p: u64, s: f64) -> Result<f64> {
    if (2 * f.disc()).rem_euclid(p as i64) == 0 {
        return Err(Error::Precondition(format!("p = {p} divides 2Δ")));
    }
    let x = (p as f64).powf(-s);
    Ok(1.0 / ((1.0 - f.psi(p as i64) as f64 * x) * (1.0 - x)))
}

/// 𝕃(2, ψχ₀[L]) / 𝕃(2, χ₀[L]).
pub fn bias_ratio(f: &QuadraticForm, l: u64) -> Result<f64> {
    let twisted = DirichletCharacter::product(l, 4 * f.disc())?;
    let num = dirichlet_l(&twisted, 2.0, 1e-13)?;
    let den = dirichlet_l(&DirichletCharacter::principal(l), 2.0, 1e-13)?;
    Ok(num / den)
}

/// Closed form of the secondary term: ±ℐ·ω_f·𝕃(2, ψχ₀[L]), with the sign
/// fixed by whether the class and component meet the Brauer-Manin set, and
/// 0 when the conductor does not divide L.
pub fn k_closed(
    f: &QuadraticForm,
    g: &[i64; 4],
    cong: &CongruenceData,
    component: usize,
    leray: f64,
    tol: f64,
    p_max: u64,
) -> Result<f64> {
    if leray < 0.0 {
        return Err(Error::Precondition("singular integral must be non-negative".into()));
    }
    let l = cong.modulus();
    if l % f.conductor() != 0 {
        return Ok(0.0);
    }
    let xi = brauer::xi_density(f, g, cong, component)?;
    let omega = measures(f, cong, tol, p_max)?.omega_f;
    let twisted = DirichletCharacter::product(l, 4 * f.disc())?;
    let lv = dirichlet_l(&twisted, 2.0, 1e-13)?;
    let sign = if xi == 2 { 1.0 } else { -1.0 };
    Ok(sign * leray * omega * lv)
}
