//! Hilbert symbols, local invariants of the quaternion class (Δ, g) and the
//! obstruction density Ξ.

use crate::arith::{self, gcd, inv_mod, is_prime, kronecker, modp, valuation};
use crate::expsums::CongruenceData;
use crate::quadform::{mulmod_i, QuadraticForm, Vec4};
use crate::{Error, Result};
use nalgebra::{Matrix4, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Place {
    Finite(u64),
    Infinite,
}

/// An element of ½ℤ/ℤ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Invariant {
    #[default]
    Zero,
    Half,
}

impl Invariant {
    pub fn from_symbol(s: i8) -> Self {
        if s == 1 {
            Invariant::Zero
        } else {
            Invariant::Half
        }
    }
}

impl std::ops::Add for Invariant {
    type Output = Invariant;
    fn add(self, o: Invariant) -> Invariant {
        if self == o {
            Invariant::Zero
        } else {
            Invariant::Half
        }
    }
}

impl std::iter::Sum for Invariant {
    fn sum<I: Iterator<Item = Invariant>>(iter: I) -> Invariant {
        iter.fold(Invariant::Zero, |a, b| a + b)
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::Zero => "0",
            Invariant::Half => "1/2",
        })
    }
}

fn split_p(a: i128, p: u64) -> (u32, i128) {
    let v = valuation(a, p);
    (v, a / (p as i128).pow(v))
}

/// Hilbert symbol (a, b)_v.
pub fn hilbert_symbol(a: i128, b: i128, place: Place) -> i8 {
    assert!(a != 0 && b != 0);
    match place {
        Place::Infinite => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => {
            let (alpha, u) = split_p(a, 2);
            let (beta, v) = split_p(b, 2);
            let eps = |x: i128| (modp(x, 4) == 3) as u32;
            let omega = |x: i128| matches!(modp(x, 8), 3 | 5) as u32;
            let e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Finite(p) => {
            let (alpha, u) = split_p(a, p);
            let (beta, v) = split_p(b, p);
            let eps = ((p - 1) / 2) as u32;
            let leg = |x: i128| kronecker(modp(x, p as i128) as i64, p as i64) as i32;
            let mut s = if (alpha * beta * eps) % 2 == 0 { 1 } else { -1 };
            if beta % 2 == 1 {
                s *= leg(u);
            }
            if alpha % 2 == 1 {
                s *= leg(v);
            }
            s as i8
        }
    }
}

pub fn local_invariant(a: i128, b: i128, place: Place) -> Invariant {
    Invariant::from_symbol(hilbert_symbol(a, b, place))
}

fn eval_linear(g: &Vec4, x: &[i128; 4], m: i128) -> i128 {
    (0..4).fold(0, |acc, i| modp(acc + mulmod_i(g[i] as i128, x[i], m), m))
}

fn seed_for(p: u64, cong: &CongruenceData, g: &Vec4) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut mix = |v: i64| {
        h ^= v as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    mix(p as i64);
    mix(cong.modulus() as i64);
    cong.gamma().iter().chain(g.iter()).for_each(|&v| mix(v));
    h
}

/// Hensel-liftable starting residues x mod p^K in the class.
fn starting_points(f: &QuadraticForm, p: u64, k: u32, e: u32, cong: &CongruenceData, t_max: u32, rng: &mut ChaCha8Rng) -> Vec<([i128; 4], u32)> {
    let pk = (p as i128).pow(k);
    let pe = (p as i128).pow(e);
    let span = pk / pe;
    let gamma = cong.gamma().map(|v| modp(v as i128, pe));
    let accept = |x: &[i128; 4]| -> Option<u32> {
        if x.iter().all(|&v| v % p as i128 == 0) || f.eval_mod(x, pk) != 0 {
            return None;
        }
        let grad = gradient_mod(f, x, pk);
        let t = grad.iter().map(|&d| if d == 0 { k } else { valuation(d, p) }).min().unwrap();
        (t <= t_max && 2 * t < k).then_some(t)
    };
    let mut found = Vec::new();
    let space = (span as f64).powi(4);
    if space <= (1u64 << 20) as f64 {
        let s = span as i64;
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    for d in 0..s {
                        let x = [a, b, c, d]
                            .iter()
                            .zip(&gamma)
                            .map(|(&y, &g)| g + pe * y as i128)
                            .collect::<Vec<_>>();
                        let x = [x[0], x[1], x[2], x[3]];
                        if let Some(t) = accept(&x) {
                            found.push((x, t));
                        }
                    }
                }
            }
        }
        found.shuffle(rng);
    } else {
        for _ in 0..400_000 {
            let x = gamma.map(|g| g + pe * rng.gen_range(0..span));
            if let Some(t) = accept(&x) {
                found.push((x, t));
                if found.len() >= 64 {
                    break;
                }
            }
        }
    }
    found
}

fn gradient_mod(f: &QuadraticForm, x: &[i128; 4], m: i128) -> [i128; 4] {
    let g = f.gram();
    let mut out = [0i128; 4];
    for i in 0..4 {
        let mut s = 0i128;
        for j in 0..4 {
            s = modp(s + mulmod_i(2 * g[i][j] as i128, x[j], m), m);
        }
        out[i] = s;
    }
    out
}

/// Newton iteration along one coordinate until F(x) ≡ 0 mod p^M.
fn newton_lift(f: &QuadraticForm, mut x: [i128; 4], p: u64, t: u32, big: i128) -> Option<[i128; 4]> {
    for _ in 0..200 {
        let fx = f.eval_mod(&x, big);
        if fx == 0 {
            return Some(x);
        }
        let grad = gradient_mod(f, &x, big);
        let i = (0..4).find(|&i| grad[i] != 0 && valuation(grad[i], p) == t)?;
        let pt = (p as i128).pow(t);
        let s = valuation(fx, p);
        if s <= t {
            return None;
        }
        let unit = grad[i] / pt;
        let inv = inv_mod(unit, big)?;
        let delta = mulmod_i(fx / pt, inv, big);
        x[i] = modp(x[i] - delta, big);
    }
    None
}

/// inv_p(Δ, g(x_p)) for x_p a p-adic point of the punctured cone in the class.
///
/// Several independent lifts are evaluated; disagreement means the invariant
/// is not constant on the class and is reported as an error.
pub fn invariant_at_p(f: &QuadraticForm, g: &Vec4, p: u64, cong: &CongruenceData) -> Result<Invariant> {
    const LIFTS: usize = 4;
    assert!(is_prime(p));
    let e = valuation(cong.modulus() as i128, p);
    let t_max = valuation(2 * f.disc() as i128, p);
    let k = (e + t_max).max(2 * t_max + 1).max(1);
    let m = (62.0 / (p as f64).log2()).floor() as u32;
    let big = (p as i128).pow(m);
    let pk = (p as i128).pow(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(p, cong, g));
    let starts = starting_points(f, p, k, e, cong, t_max, &mut rng);
    if starts.is_empty() {
        return Err(Error::Insoluble(p));
    }
    let need = if p == 2 { 3 } else { 1 };
    let mut seen: Vec<Invariant> = Vec::new();
    'outer: for (x0, t) in starts.iter().cycle().take(starts.len().max(LIFTS) * 4) {
        for _ in 0..8 {
            let x = x0.map(|v| v + pk * rng.gen_range(0..big / pk));
            let Some(x) = newton_lift(f, x, p, *t, big) else { continue };
            let prec = (p as i128).pow(m - t);
            let y = eval_linear(g, &x, prec);
            if y == 0 {
                continue;
            }
            if valuation(y, p) + need > m - t {
                continue;
            }
            seen.push(local_invariant(f.disc() as i128, y, Place::Finite(p)));
            if seen.len() >= LIFTS {
                break 'outer;
            }
            continue 'outer;
        }
    }
    match seen.first() {
        None => Err(Error::PrecisionExhausted(p)),
        Some(&first) if seen.iter().all(|&s| s == first) => Ok(first),
        Some(_) => Err(Error::NotLocallyConstant(p)),
    }
}

/// Finite part of the evaluation map.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoEvaluation {
    pub per_place: BTreeMap<u64, Invariant>,
    pub rho: Invariant,
    /// Good primes sampled and found to carry invariant 0.
    pub good_checked: Vec<u64>,
}

/// ρ_f = Σ_{p | 2ΔL} inv_p(Δ, g(·)), with five good primes checked to vanish.
pub fn rho_f_eval(f: &QuadraticForm, g: &Vec4, cong: &CongruenceData) -> Result<RhoEvaluation> {
    let bad = 2 * f.disc().unsigned_abs() * cong.modulus();
    let mut per_place = BTreeMap::new();
    for p in arith::factorize(bad).primes() {
        per_place.insert(p, invariant_at_p(f, g, p, cong)?);
    }
    let mut good_checked = Vec::new();
    for p in arith::primes_up_to(200).into_iter().filter(|&p| bad % p != 0).take(5) {
        if invariant_at_p(f, g, p, cong)? != Invariant::Zero {
            return Err(Error::GoodPrimeInvariant(p));
        }
        good_checked.push(p);
    }
    let rho = per_place.values().copied().sum();
    Ok(RhoEvaluation { per_place, rho, good_checked })
}

/// Real points on the cone, sampled on the given component.
pub fn sample_real_points(f: &QuadraticForm, component: usize, n: usize, seed: u64) -> Vec<[f64; 4]> {
    let info = f.real_components();
    let m = Matrix4::from_fn(|i, j| f.gram()[i][j] as f64);
    let eig = SymmetricEigen::new(m);
    let pos: Vec<usize> = (0..4).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    let neg: Vec<usize> = (0..4).filter(|&i| eig.eigenvalues[i] < 0.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        // unit vectors in each definite block make F vanish
        let mut x = [0.0; 4];
        for block in [&pos, &neg] {
            let mut c: Vec<f64> = block.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-3 {
                continue;
            }
            c.iter_mut().for_each(|v| *v /= norm);
            for (&i, &ci) in block.iter().zip(&c) {
                let scale = ci / eig.eigenvalues[i].abs().sqrt();
                for r in 0..4 {
                    x[r] += scale * eig.eigenvectors[(r, i)];
                }
            }
        }
        if x.iter().all(|v| v.abs() < 1e-12) {
            continue;
        }
        if info.component_of(&x) != component {
            x = x.map(|v| -v);
        }
        if info.component_of(&x) == component {
            out.push(x);
        }
    }
    out
}

/// inv_∞(Δ, g) on a real component.
pub fn infinite_invariant(f: &QuadraticForm, g: &Vec4, component: usize) -> Result<Invariant> {
    let info = f.real_components();
    if component >= info.count {
        return Err(Error::Precondition(format!("component {component} out of range")));
    }
    let gnorm = g.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
    let mut sign = None;
    for x in sample_real_points(f, component, 64, 17) {
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let gx: f64 = g.iter().zip(&x).map(|(&a, b)| a as f64 * b).sum();
        if gx.abs() < 1e-9 * gnorm * xn {
            continue;
        }
        let s = gx > 0.0;
        match sign {
            None => sign = Some(s),
            Some(prev) if prev != s => {
                return Err(Error::Precondition("tangent form changes sign on a component".into()))
            }
            _ => {}
        }
    }
    let positive = sign.ok_or_else(|| Error::Precondition("tangent form vanishes on samples".into()))?;
    let gsign: i128 = if positive { 1 } else { -1 };
    Ok(local_invariant(f.disc() as i128, gsign, Place::Infinite))
}

/// Ξ ∈ {0, 2}: 2 iff ρ_f + inv_∞ vanishes on the component.
pub fn xi_density(f: &QuadraticForm, g: &Vec4, cong: &CongruenceData, component: usize) -> Result<u8> {
    let rho = rho_f_eval(f, g, cong)?.rho;
    let inf = infinite_invariant(f, g, component)?;
    Ok(if rho + inf == Invariant::Zero { 2 } else { 0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrauerEvaluation {
    pub g: Vec4,
    pub class: CongruenceData,
    pub per_place: BTreeMap<Place, Invariant>,
    pub rho_f: Invariant,
    pub component_inv: Vec<Invariant>,
    pub xi: Vec<u8>,
}

pub fn evaluate(f: &QuadraticForm, g: &Vec4, cong: &CongruenceData) -> Result<BrauerEvaluation> {
    let rho = rho_f_eval(f, g, cong)?;
    let comps = f.real_components().count;
    let component_inv = (0..comps).map(|c| infinite_invariant(f, g, c)).collect::<Result<Vec<_>>>()?;
    let xi = component_inv.iter().map(|&i| if i + rho.rho == Invariant::Zero { 2 } else { 0 }).collect();
    let per_place = rho.per_place.iter().map(|(&p, &v)| (Place::Finite(p), v)).collect();
    Ok(BrauerEvaluation { g: *g, class: cong.clone(), per_place, rho_f: rho.rho, component_inv, xi })
}

/// A class and real component known to meet the Brauer-Manin set.
#[derive(Debug, Clone, PartialEq)]
pub struct UnobstructedBase {
    class: CongruenceData,
    component: usize,
}

impl UnobstructedBase {
    /// Certified by a primitive integral zero in the class.
    pub fn from_global_point(f: &QuadraticForm, cong: &CongruenceData, x: &Vec4) -> Result<Self> {
        if f.eval(x) != 0 || arith::content(x) != 1 || !cong.contains(x) {
            return Err(Error::Precondition(format!("{x:?} is not a primitive zero in the class")));
        }
        let component = f.real_components().component_of(&x.map(|v| v as f64));
        Ok(Self { class: cong.clone(), component })
    }

    /// Certified by Ξ = 2.
    pub fn from_brauer(f: &QuadraticForm, g: &Vec4, cong: &CongruenceData, component: usize) -> Result<Self> {
        if xi_density(f, g, cong, component)? != 2 {
            return Err(Error::Precondition("class is obstructed on this component".into()));
        }
        Ok(Self { class: cong.clone(), component })
    }

    pub fn class(&self) -> &CongruenceData {
        &self.class
    }

    pub fn component(&self) -> usize {
        self.component
    }
}

/// Whether γ·Γ₀ is obstructed on the base component: iff ψ_F(γ) = −1.
pub fn obstructed_by_character(f: &QuadraticForm, base: &UnobstructedBase, gamma: i64) -> Result<bool> {
    let l = base.class.modulus();
    if l % f.conductor() != 0 {
        return Err(Error::Precondition(format!("conductor {} does not divide L = {l}", f.conductor())));
    }
    if gcd(gamma as i128, l as i128) != 1 {
        return Err(Error::Precondition(format!("{gamma} is not a unit mod {l}")));
    }
    Ok(f.psi(modp(gamma as i128, l as i128) as i64) == -1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form1() -> QuadraticForm {
        QuadraticForm::from_upper_triangle([1, 0, 0, 0, 1, 0, 0, 1, 0, -1]).unwrap()
    }

    #[test]
    fn symbols() {
        assert_eq!(hilbert_symbol(-1, -1, Place::Infinite), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Finite(2)), -1);
        assert_eq!(hilbert_symbol(2, 3, Place::Finite(3)), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Finite(3)), 1);
    }

    #[test]
    fn components_differ() {
        let f = form1();
        let g = [1, 0, 0, -1];
        let a = infinite_invariant(&f, &g, 0).unwrap();
        let b = infinite_invariant(&f, &g, 1).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn base_point_is_unobstructed() {
        let f = form1();
        let (x0, g) = f.find_point_and_tangent(2).unwrap();
        let cong = CongruenceData::new(&f, 4, [1, 0, 0, 1]).unwrap();
        let comp = f.real_components().component_of(&x0.map(|v| v as f64));
        assert_eq!(xi_density(&f, &g, &cong, comp).unwrap(), 2);
        assert_eq!(xi_density(&f, &g, &cong, 1 - comp).unwrap(), 0);
        let twisted = cong.scaled(&f, 3).unwrap();
        assert_eq!(xi_density(&f, &g, &twisted, comp).unwrap(), 0);
    }
}
