//! Complete quadratic exponential sums attached to a congruence class.
//!
//! Every sum here is a finite integer combination of roots of unity. Values
//! are accumulated as exponent histograms and reduced exactly in ℤ[ζ_N]
//! (see [`crate::cyclo`]); a floating-point evaluation of the raw histogram is
//! kept alongside so that the two can be compared.
//!
//! The inner sum over units `a` is always a Ramanujan sum, so each residue
//! vector contributes an integer weight c_q(·) times a single root of unity.

use crate::arith::{self, euler_phi, factorize, gcd, inv_mod, modp, ramanujan_sum, ramanujan_table, DirichletCharacter};
use crate::cyclo::{unit_phase, Cyclotomic};
use crate::quadform::{dot, QuadraticForm, Vec4};
use crate::{Error, Result};
use num_complex::Complex64;

/// Largest q for the direct evaluation of S_q(c).
pub const PLAIN_CEILING: u64 = 120;
/// Largest q·L for the direct evaluation of S_{q,L,λ}(c).
pub const FULL_CEILING: u64 = 48;
/// Largest q₂·L² for the direct evaluation of 𝒮_{q₂,L,λ}(x; c).
pub const SCRIPT_CEILING: u64 = 256;

/// A congruence class Γ mod L on the cone, with an integral lift λ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceData {
    modulus: u64,
    gamma: Vec4,
    lift: Vec4,
}

impl CongruenceData {
    /// The empty condition: L = 1, λ = 0.
    pub fn trivial() -> Self {
        Self { modulus: 1, gamma: [0; 4], lift: [0; 4] }
    }

    /// Class of Γ mod L, lifted to residues in [0, L).
    pub fn new(f: &QuadraticForm, modulus: u64, gamma: Vec4) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidClass("modulus must be positive".into()));
        }
        let l = modulus as i128;
        let lift = gamma.map(|g| modp(g as i128, l) as i64);
        Self::with_lift(f, modulus, lift)
    }

    /// Class with an explicit lift λ, |λ|∞ ≤ L.
    pub fn with_lift(f: &QuadraticForm, modulus: u64, lift: Vec4) -> Result<Self> {
        let l = modulus as i128;
        if modulus == 0 {
            return Err(Error::InvalidClass("modulus must be positive".into()));
        }
        if lift.iter().any(|&v| (v as i128).abs() > l) {
            return Err(Error::InvalidClass(format!("lift {lift:?} exceeds the modulus {modulus}")));
        }
        if f.eval(&lift) % l != 0 {
            return Err(Error::InvalidClass(format!("F{lift:?} is not divisible by {modulus}")));
        }
        let g = lift.iter().fold(l, |acc, &v| gcd(acc, v as i128));
        if g != 1 {
            return Err(Error::InvalidClass(format!("{lift:?} is not primitive mod {modulus}")));
        }
        let gamma = lift.map(|v| modp(v as i128, l) as i64);
        Ok(Self { modulus, gamma, lift })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn gamma(&self) -> Vec4 {
        self.gamma
    }

    pub fn lift(&self) -> Vec4 {
        self.lift
    }

    /// The class d·Γ for a unit d mod L.
    pub fn scaled(&self, f: &QuadraticForm, d: i64) -> Result<Self> {
        Self::new(f, self.modulus, self.gamma.map(|g| g * d))
    }

    /// F(λ)/L.
    pub fn f_lift_over_l(&self, f: &QuadraticForm) -> i128 {
        f.eval(&self.lift) / self.modulus as i128
    }

    pub fn contains(&self, x: &Vec4) -> bool {
        let l = self.modulus as i128;
        (0..4).all(|i| modp(x[i] as i128 - self.gamma[i] as i128, l) == 0)
    }
}

/// H_{λ,L}(y) = F(λ)/L + ∇F(λ)·y.
pub fn h_value(f: &QuadraticForm, cong: &CongruenceData, y: &Vec4) -> i128 {
    let grad = f.gradient(&cong.lift);
    cong.f_lift_over_l(f) + (0..4).map(|i| grad[i] * y[i] as i128).sum::<i128>()
}

/// q = q₁q₂ with gcd(q₁, 2LΔ) = 1, q₂ | (2LΔ)^∞, and F(λ)/L = k₂q₁ + k₁q₂L.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QDecomposition {
    pub q: u64,
    pub q1: u64,
    pub q2: u64,
    pub k1: i128,
    pub k2: i128,
}

pub fn decompose(f: &QuadraticForm, cong: &CongruenceData, q: u64) -> QDecomposition {
    let bad = 2 * cong.modulus as i128 * f.disc().unsigned_abs() as i128;
    let mut q1 = 1u64;
    for (p, e) in factorize(q).factors {
        if bad % p as i128 != 0 {
            q1 *= p.pow(e);
        }
    }
    let q2 = q / q1;
    let m = q2 as i128 * cong.modulus as i128;
    let n = cong.f_lift_over_l(f);
    let k2 = modp(n * inv_mod(q1 as i128, m).expect("q1 is coprime to q2 L"), m);
    let k1 = (n - k2 * q1 as i128) / m;
    QDecomposition { q, q1, q2, k1, k2 }
}

/// An exact exponential-sum value: `exact / denominator`.
#[derive(Debug, Clone)]
pub struct ExpSumValue {
    pub exact: Cyclotomic,
    pub denominator: u64,
    /// Direct floating-point evaluation of the unreduced histogram.
    pub raw: Complex64,
    /// |raw − exact|.
    pub residual: f64,
}

impl ExpSumValue {
    fn from_histogram(order: u64, hist: &[i128], denominator: u64) -> Self {
        let exact = Cyclotomic::from_exponents(order, hist);
        let raw: Complex64 = hist
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(k, &c)| unit_phase(k as i128, order) * c as f64)
            .sum::<Complex64>()
            / denominator as f64;
        Self::from_exact_with_raw(exact, denominator, raw)
    }

    fn from_exact_with_raw(exact: Cyclotomic, denominator: u64, raw: Complex64) -> Self {
        let residual = (raw - exact.to_complex() / denominator as f64).norm();
        Self { exact, denominator, raw, residual }
    }

    fn from_exact(exact: Cyclotomic) -> Self {
        let raw = exact.to_complex();
        Self { exact, denominator: 1, raw, residual: 0.0 }
    }

    /// The value as a rational integer, when it is one.
    pub fn value(&self) -> Option<i128> {
        let v = self.exact.as_integer()?;
        (v % self.denominator as i128 == 0).then(|| v / self.denominator as i128)
    }

    pub fn to_complex(&self) -> Complex64 {
        self.exact.to_complex() / self.denominator as f64
    }

    /// Exact equality as algebraic numbers.
    pub fn same_value(&self, other: &Self) -> bool {
        self.exact
            .scale(other.denominator as i128)
            .same_value(&other.exact.scale(self.denominator as i128))
    }
}

fn check_c(c: &Vec4) {
    debug_assert!(c.iter().all(|v| v.abs() < 1 << 20));
}

fn odometer(x: &mut Vec4, n: i64) -> bool {
    for v in x.iter_mut() {
        *v += 1;
        if *v < n {
            return true;
        }
        *v = 0;
    }
    false
}

/// Σ_x weight(x)·e_n(c·x) for every c in `cs`, over the listed (x, weight).
fn accumulate(order: u64, terms: &[(Vec4, i128)], cs: &[Vec4]) -> Vec<Vec<i128>> {
    let n = order as usize;
    let xmax = terms.iter().flat_map(|(x, _)| x.iter()).map(|v| v.abs()).max().unwrap_or(0);
    let cmax = cs.iter().flatten().map(|v| v.abs()).max().unwrap_or(0);
    let wsum: i128 = terms.iter().map(|(_, w)| w.abs()).sum();
    let span = 4 * xmax * cmax;
    if span > 1 << 16 || xmax > i32::MAX as i64 || wsum > i64::MAX as i128 {
        let mut hists = vec![vec![0i128; n]; cs.len()];
        for (x, w) in terms {
            for (c, h) in cs.iter().zip(hists.iter_mut()) {
                let t = (c[0] * x[0] + c[1] * x[1] + c[2] * x[2] + c[3] * x[3]).rem_euclid(order as i64);
                h[t as usize] += w;
            }
        }
        return hists;
    }
    if let Some(h) = accumulate_separable(n, terms, cs) {
        return h;
    }
    // small dot products: reduce mod n through a table, c-vectors in L1-sized blocks
    let table: Vec<u32> = (-span..=span).map(|t| t.rem_euclid(order as i64) as u32).collect();
    let packed: Vec<([i32; 4], i64)> = terms.iter().map(|(x, w)| (x.map(|v| v as i32), *w as i64)).collect();
    let mut flat = vec![0i64; n * cs.len()];
    const BLOCK: usize = 16;
    for (bi, block) in cs.chunks(BLOCK).enumerate() {
        let cb: Vec<[i32; 4]> = block.iter().map(|c| c.map(|v| v as i32)).collect();
        let hist = &mut flat[bi * BLOCK * n..(bi * BLOCK + block.len()) * n];
        for (x, w) in &packed {
            for (j, c) in cb.iter().enumerate() {
                let d = c[0] * x[0] + c[1] * x[1] + c[2] * x[2] + c[3] * x[3];
                hist[j * n + table[(d as i64 + span) as usize] as usize] += w;
            }
        }
    }
    flat.chunks(n).map(|h| h.iter().map(|&v| v as i128).collect()).collect()
}

// For many c sharing few (c₂, c₃): fold x₂, x₃ into per-(x₀, x₁) histograms
// once per (c₂, c₃), then shift-add rows by c₀x₀ + c₁x₁. None when the
// direct loop is cheaper.
fn accumulate_separable(n: usize, terms: &[(Vec4, i128)], cs: &[Vec4]) -> Option<Vec<Vec<i128>>> {
    let lo = |i: usize| terms.iter().map(|(x, _)| x[i]).min().unwrap_or(0);
    let hi = |i: usize| terms.iter().map(|(x, _)| x[i]).max().unwrap_or(0);
    let (m0, m1) = (lo(0), lo(1));
    let (r0, r1) = ((hi(0) - m0 + 1) as usize, (hi(1) - m1 + 1) as usize);
    let rows = r0 * r1;
    let mut pairs: Vec<(i64, i64)> = cs.iter().map(|c| (c[2], c[3])).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let direct = cs.len() * terms.len();
    let separable = pairs.len() * (terms.len() + rows * n) + cs.len() * rows * n;
    if terms.is_empty() || separable * 2 > direct || rows * n > 1 << 24 {
        return None;
    }
    let ni = n as i64;
    let mut out = vec![vec![0i128; n]; cs.len()];
    let mut table = vec![0i64; rows * n];
    for &(c2, c3) in &pairs {
        table.iter_mut().for_each(|v| *v = 0);
        for (x, w) in terms {
            let row = (x[0] - m0) as usize * r1 + (x[1] - m1) as usize;
            let t = (c2 * x[2] + c3 * x[3]).rem_euclid(ni) as usize;
            table[row * n + t] += *w as i64;
        }
        let live: Vec<usize> = (0..rows).filter(|&r| table[r * n..(r + 1) * n].iter().any(|&v| v != 0)).collect();
        for (c, h) in cs.iter().zip(out.iter_mut()) {
            if (c[2], c[3]) != (c2, c3) {
                continue;
            }
            let mut acc = vec![0i64; 2 * n];
            for &row in &live {
                let (x0, x1) = ((row / r1) as i64 + m0, (row % r1) as i64 + m1);
                let shift = (c[0] * x0 + c[1] * x1).rem_euclid(ni) as usize;
                let src = &table[row * n..(row + 1) * n];
                for (a, &v) in acc[shift..shift + n].iter_mut().zip(src) {
                    *a += v;
                }
            }
            for t in 0..n {
                h[t] = (acc[t] + acc[t + n]) as i128;
            }
        }
    }
    Some(out)
}

/// Evaluation path for S_q(c).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlainPath {
    Direct,
    Multiplicative,
}

/// S_q(c) = Σ_{a unit mod q} Σ_{b mod q} e_q(aF(b) + c·b).
pub fn s_q_plain(f: &QuadraticForm, q: u64, c: &Vec4, path: PlainPath) -> Result<ExpSumValue> {
    Ok(s_q_plain_batch(f, q, std::slice::from_ref(c), path)?.remove(0))
}

pub fn s_q_plain_batch(f: &QuadraticForm, q: u64, cs: &[Vec4], path: PlainPath) -> Result<Vec<ExpSumValue>> {
    assert!(q >= 1);
    cs.iter().for_each(check_c);
    match path {
        PlainPath::Direct => {
            if q > PLAIN_CEILING {
                return Err(Error::Range(format!("S_q direct needs q <= {PLAIN_CEILING}, got {q}")));
            }
            let cq = ramanujan_table(q);
            let gram = f.gram();
            let mut terms = Vec::new();
            let mut b = [0i64; 4];
            loop {
                let v: i64 = (0..4).map(|i| b[i] * (0..4).map(|j| gram[i][j] * b[j]).sum::<i64>()).sum();
                let w = cq[v.rem_euclid(q as i64) as usize];
                if w != 0 {
                    terms.push((b, w));
                }
                if !odometer(&mut b, q as i64) {
                    break;
                }
            }
            Ok(accumulate(q, &terms, cs)
                .iter()
                .map(|h| ExpSumValue::from_histogram(q, h, 1))
                .collect())
        }
        PlainPath::Multiplicative => {
            let mut acc = vec![1i128; cs.len()];
            for (p, e) in factorize(q).factors {
                let pk = p.pow(e);
                let parts = s_q_plain_batch(f, pk, cs, PlainPath::Direct)?;
                for (a, v) in acc.iter_mut().zip(parts) {
                    let v = v.value().ok_or(Error::Precondition(format!("S_{pk}(c) is not rational")))?;
                    *a = a.checked_mul(v).ok_or(Error::Overflow("S_q product"))?;
                }
            }
            Ok(acc.into_iter().map(|v| ExpSumValue::from_exact(Cyclotomic::integer(1, v))).collect())
        }
    }
}

/// ℛ(q; c) = q²ψ_F(q)·c_q(−F*(c)) for q coprime to 2Δ.
pub fn r_sum(f: &QuadraticForm, q: u64, c: &Vec4) -> Result<ExpSumValue> {
    Ok(ExpSumValue::from_exact(Cyclotomic::integer(1, r_sum_int(f, q, c)?)))
}

pub fn r_sum_int(f: &QuadraticForm, q: u64, c: &Vec4) -> Result<i128> {
    if gcd(q as i128, 2 * f.disc() as i128) != 1 {
        return Err(Error::Precondition(format!("q = {q} shares a factor with 2Δ")));
    }
    let q2 = q as i128 * q as i128;
    Ok(q2 * f.psi(q as i64) as i128 * ramanujan_sum(q, -f.eval_adjoint(c)))
}

/// Evaluation path for S_{q,L,λ}(c).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullMode {
    Brute,
    Crt,
}

/// The phased sum e_{qL²}(c·λ)·S_{q,L,λ}(c), as an element of ℤ[ζ_{qL²}].
pub fn s_full(f: &QuadraticForm, cong: &CongruenceData, q: u64, c: &Vec4, mode: FullMode) -> Result<ExpSumValue> {
    Ok(s_full_batch(f, cong, q, std::slice::from_ref(c), mode)?.remove(0))
}

fn phase_by_lift(l: u64, q: u64, lift: &Vec4, c: &Vec4, hist_ql: &[i128]) -> Vec<i128> {
    // ζ_{qL}^k · ζ_{qL²}^{c·λ} = ζ_{qL²}^{kL + c·λ}
    let n = (q * l * l) as i128;
    let shift = dot(c, lift);
    let mut out = vec![0i128; n as usize];
    for (k, &v) in hist_ql.iter().enumerate() {
        if v != 0 {
            out[modp(k as i128 * l as i128 + shift, n) as usize] += v;
        }
    }
    out
}

pub fn s_full_batch(
    f: &QuadraticForm,
    cong: &CongruenceData,
    q: u64,
    cs: &[Vec4],
    mode: FullMode,
) -> Result<Vec<ExpSumValue>> {
    cs.iter().for_each(check_c);
    let l = cong.modulus;
    let li = l as i128;
    let lift = cong.lift;
    let order = q * l * l;
    match mode {
        FullMode::Brute => {
            let n = q * l;
            if n > FULL_CEILING {
                return Err(Error::Range(format!("S_full brute needs qL <= {FULL_CEILING}, got {n}")));
            }
            let cq = ramanujan_table(q);
            let mut terms = Vec::new();
            let mut s = [0i64; 4];
            // qL ≤ FULL_CEILING keeps everything below in i64
            let g = f.gram();
            let grad = f.gradient(&lift).map(|v| v as i64);
            let fl = cong.f_lift_over_l(f) as i64;
            let (qi, l64) = (q as i64, l as i64);
            loop {
                let h = fl + (0..4).map(|i| grad[i] * s[i]).sum::<i64>();
                if h % l64 == 0 {
                    let fs: i64 = (0..4).map(|i| s[i] * (0..4).map(|j| g[i][j] * s[j]).sum::<i64>()).sum();
                    let u = h / l64 + fs;
                    let w = cq[u.rem_euclid(qi) as usize];
                    if w != 0 {
                        terms.push((s, w));
                    }
                }
                if !odometer(&mut s, n as i64) {
                    break;
                }
            }
            Ok(accumulate(n, &terms, cs)
                .iter()
                .zip(cs)
                .map(|(h, c)| ExpSumValue::from_histogram(order, &phase_by_lift(l, q, &lift, c, h), 1))
                .collect())
        }
        FullMode::Crt => {
            let d = decompose(f, cong, q);
            let n2 = d.q2 * l;
            if n2 > FULL_CEILING {
                return Err(Error::Range(format!("S2 factor needs q2 L <= {FULL_CEILING}, got {n2}")));
            }
            let grad = f.gradient(&lift);
            let q1 = d.q1 as i128;
            let cq = ramanujan_table(d.q2);
            let mut terms = Vec::new();
            let mut s = [0i64; 4];
            loop {
                let gs: i128 = (0..4).map(|i| grad[i] * s[i] as i128).sum();
                let bracket = q1 * q1 * li * f.eval(&s) + q1 * (gs + d.k2);
                if bracket % li == 0 {
                    let w = cq[modp(bracket / li, d.q2 as i128) as usize];
                    if w != 0 {
                        terms.push((s, w));
                    }
                }
                if !odometer(&mut s, n2 as i64) {
                    break;
                }
            }
            let hists = accumulate(n2, &terms, cs);
            let inv = inv_mod(d.q2 as i128 * li * li, q1).expect("q1 coprime to q2 L");
            let mut out = Vec::with_capacity(cs.len());
            for (c, h2) in cs.iter().zip(&hists) {
                let s2 = Cyclotomic::from_exponents(n2, h2);
                let r = r_sum_int(f, d.q1, c)?;
                let s1 = Cyclotomic::integer(d.q1, r).rotate(-inv * dot(c, &lift));
                let s = s1.mul(&s2).lift(q * l);
                let mut hist = vec![0i128; (q * l) as usize];
                hist[..s.coeffs().len()].copy_from_slice(s.coeffs());
                let phased = phase_by_lift(l, q, &lift, c, &hist);
                let exact = Cyclotomic::from_exponents(order, &phased);
                let raw2 = ExpSumValue::from_histogram(n2, h2, 1).raw;
                let raw = unit_phase(dot(c, &lift), order) * unit_phase(-inv * dot(c, &lift), d.q1) * r as f64 * raw2;
                out.push(ExpSumValue::from_exact_with_raw(exact, 1, raw));
            }
            Ok(out)
        }
    }
}

/// 𝒮_{q₂,L,λ}(x; c), an element of ℤ[ζ_{q₂L²}].
pub fn script_s(f: &QuadraticForm, cong: &CongruenceData, q2: u64, x: i64, c: &Vec4) -> Result<ExpSumValue> {
    Ok(script_s_batch(f, cong, q2, x, std::slice::from_ref(c))?.remove(0))
}

pub fn script_s_batch(
    f: &QuadraticForm,
    cong: &CongruenceData,
    q2: u64,
    x: i64,
    cs: &[Vec4],
) -> Result<Vec<ExpSumValue>> {
    cs.iter().for_each(check_c);
    let l = cong.modulus;
    let li = l as i128;
    let order = q2 * l * l;
    if order > SCRIPT_CEILING {
        return Err(Error::Range(format!("script S needs q2 L^2 <= {SCRIPT_CEILING}, got {order}")));
    }
    let xbar = inv_mod(x as i128, li)
        .ok_or_else(|| Error::Precondition(format!("x = {x} is not a unit mod {l}")))?;
    let base = cong.lift.map(|v| modp(xbar * v as i128, li) as i64);
    let n = (q2 * l) as i64;
    let cq = ramanujan_table(q2);
    let mut terms = Vec::new();
    let mut g = [0i64; 4];
    // q₂L² ≤ SCRIPT_CEILING keeps F(α) in i64
    let gram = f.gram();
    let (l2, q2i) = ((l * l) as i64, q2 as i64);
    loop {
        let alpha = [0, 1, 2, 3].map(|i| base[i] + l as i64 * g[i]);
        let v: i64 = (0..4).map(|i| alpha[i] * (0..4).map(|j| gram[i][j] * alpha[j]).sum::<i64>()).sum();
        if v % l2 == 0 {
            let w = cq[(v / l2).rem_euclid(q2i) as usize];
            if w != 0 {
                terms.push((alpha, w));
            }
        }
        if !odometer(&mut g, n) {
            break;
        }
    }
    Ok(accumulate(order, &terms, cs)
        .iter()
        .map(|h| ExpSumValue::from_histogram(order, h, 1))
        .collect())
}

fn require_character_mod(chi: &DirichletCharacter, l: u64) -> Result<()> {
    if l % chi.modulus() != 0 {
        return Err(Error::Precondition(format!(
            "character of modulus {} is not defined mod {l}",
            chi.modulus()
        )));
    }
    Ok(())
}

/// 𝒜_{q₂,L,λ}(χ; c) = (1/φ(L)) Σ_{x unit mod L} χ(x)𝒮_{q₂,L,λ}(x; c).
pub fn a_char(
    f: &QuadraticForm,
    cong: &CongruenceData,
    q2: u64,
    chi: &DirichletCharacter,
    c: &Vec4,
) -> Result<ExpSumValue> {
    let l = cong.modulus;
    require_character_mod(chi, l)?;
    let order = q2 * l * l;
    let mut acc = Cyclotomic::zero(order);
    let mut raw = Complex64::new(0.0, 0.0);
    for x in (1..=l as i64).filter(|&x| gcd(x as i128, l as i128) == 1) {
        let v = chi.value(x);
        if v == 0 {
            continue;
        }
        let s = script_s(f, cong, q2, x, c)?;
        acc = acc.add(&s.exact.scale(v as i128));
        raw += s.raw * v as f64;
    }
    let phi = euler_phi(l);
    Ok(ExpSumValue::from_exact_with_raw(acc, phi, raw / phi as f64))
}

/// ψ̃·χ₀[L], the character entering ℬ.
pub fn b_character(f: &QuadraticForm, l: u64) -> Result<DirichletCharacter> {
    DirichletCharacter::product(l, f.field_discriminant())
}

/// Partial sum of ℬ_{L,λ}(c) with its tail estimate.
#[derive(Debug, Clone)]
pub struct BCoefficient {
    pub value: Complex64,
    /// (u, 𝒜_u/u⁴) for the evaluated u, ascending.
    pub terms: Vec<(u64, Complex64)>,
    pub cutoff: u64,
    /// C·L³·Σ_{u > cutoff} gcd(u, L)^{1/2}/u, with C = max_u |𝒜_u|/((uL)³gcd(u,L)^{1/2}).
    pub tail_estimate: f64,
}

/// ℬ_{L,λ}(c) summed over u | (2ΔL)^∞ with u ≤ max_u (and u·L² within the
/// direct range).
pub fn b_coeff_truncated(f: &QuadraticForm, cong: &CongruenceData, c: &Vec4, max_u: u64) -> Result<BCoefficient> {
    let l = cong.modulus;
    if l % f.conductor() != 0 {
        return Ok(BCoefficient { value: Complex64::new(0.0, 0.0), terms: Vec::new(), cutoff: max_u, tail_estimate: 0.0 });
    }
    let chi = b_character(f, l)?;
    let bad = 2 * f.disc().unsigned_abs() * l;
    let primes: Vec<u64> = factorize(bad).primes().collect();
    let limit = max_u.min(SCRIPT_CEILING / (l * l));
    let theta = arith::theta2(bad, 1e-15);
    let mut terms = Vec::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut cmax = 0.0f64;
    let lf = l as f64;
    for u in arith::smooth_numbers(&primes, limit) {
        let a = a_char(f, cong, u, &chi, c)?.to_complex();
        let t = a / (u as f64).powi(4);
        let g = (gcd(u as i128, l as i128) as f64).sqrt();
        cmax = cmax.max(a.norm() / ((u as f64 * lf).powi(3) * g));
        terms.push((u, theta * t));
        total += theta * t;
    }
    let tail = theta * cmax * lf.powi(3) * smooth_tail(&primes, limit, l);
    Ok(BCoefficient { value: total, terms, cutoff: limit, tail_estimate: tail })
}

// Σ_{u > cutoff, u | (∏ primes)^∞} gcd(u, L)^{1/2}/u, exact up to 10¹⁵ and
// bounded beyond by L^{1/2}·V^{-1/2}·∏(1 − p^{-1/2})^{-1}.
fn smooth_tail(primes: &[u64], cutoff: u64, l: u64) -> f64 {
    const V: u64 = 1_000_000_000_000_000;
    let mut s = 0.0;
    for u in arith::smooth_numbers(primes, V) {
        if u > cutoff {
            s += (gcd(u as i128, l as i128) as f64).sqrt() / u as f64;
        }
    }
    let prod: f64 = primes.iter().map(|&p| 1.0 / (1.0 - (p as f64).powf(-0.5))).product();
    s + (l as f64).sqrt() * (V as f64).powf(-0.5) * prod
}

/// ℬ_{L,λ}(c) to within `tol`, or a range error carrying the best estimate.
pub fn b_coeff(f: &QuadraticForm, cong: &CongruenceData, c: &Vec4, tol: f64) -> Result<BCoefficient> {
    let b = b_coeff_truncated(f, cong, c, u64::MAX)?;
    if b.tail_estimate > tol {
        return Err(Error::Range(format!(
            "tail estimate {:.3e} after u <= {} exceeds tol {tol:.1e}",
            b.tail_estimate, b.cutoff
        )));
    }
    Ok(b)
}
