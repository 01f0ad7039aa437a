//! Exact identity suites for the exponential sums, local densities,
//! measures and Hilbert symbols.

use conecount_core::arith::{
    euler_phi, fundamental_discriminant, gcd, mu_phi_theta1, valuation, DirichletCharacter,
};
use conecount_core::brauer::{hilbert_symbol, Place};
use conecount_core::cyclo::Cyclotomic;
use conecount_core::expsums::{
    a_char, b_coeff_truncated, decompose, r_sum_int, s_full_batch, s_q_plain_batch, script_s_batch,
    CongruenceData, FullMode, PlainPath,
};
use conecount_core::lattice::classes_mod;
use conecount_core::localdens::{closed_form_density, measures, sigma_p, tamagawa_by_product, MAX_K};
use conecount_core::{Error, QuadraticForm, Result};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::time::Instant;

const MAX_MESSAGES: usize = 10;

/// Common truncation u ≤ 8 for both sides of the ℬ flip.
const B_FLIP_CUTOFF: u64 = 8;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub checked: u64,
    pub failed: u64,
    /// The first few failures.
    pub messages: Vec<String>,
    pub elapsed_ms: u64,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), checked: 0, failed: 0, messages: Vec::new(), elapsed_ms: 0 }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0 && self.checked > 0
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.messages.len() < MAX_MESSAGES {
                self.messages.push(msg());
            }
        }
    }

    fn fail(&mut self, msg: String) {
        self.check(false, || msg);
    }

    fn timed(mut self, start: Instant) -> Self {
        self.elapsed_ms = start.elapsed().as_millis() as u64;
        self
    }
}

/// diag(1, 1, 1, −1) and diag(1, 1, −1, −3).
pub fn test_forms() -> Vec<QuadraticForm> {
    [[1, 0, 0, 0, 1, 0, 0, 1, 0, -1], [1, 0, 0, 0, 1, 0, 0, -1, 0, -3]]
        .into_iter()
        .map(|u| QuadraticForm::from_upper_triangle(u).expect("test form"))
        .collect()
}

fn c_box(c_max: i64) -> Vec<[i64; 4]> {
    let r = -c_max..=c_max;
    let mut out = Vec::new();
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

/// Up to `per_l` classes mod L, spread evenly over the lexicographic list.
pub fn sample_classes(f: &QuadraticForm, l: u64, per_l: usize) -> Vec<CongruenceData> {
    let all = classes_mod(f, l);
    let step = (all.len() / per_l.max(1)).max(1);
    all.iter()
        .step_by(step)
        .take(per_l)
        .map(|g| CongruenceData::new(f, l, *g).expect("class on the cone"))
        .collect()
}

/// Multiplicativity of S_q(c) over coprime splittings q = q₁q₂ ≤ q_max, and
/// the two forms of the CRT reconstruction of the phased S_{q,L,λ}(c):
/// brute force = ℛ(q₁)·S⁽²⁾ from the σ-sum = ℛ(q₁)·𝒮_{q₂,L,λ}(q₁).
pub fn exact_sum_suite(f: &QuadraticForm, q_max: u64, l_max: u64, c_max: i64, per_l: usize) -> SuiteResult {
    let start = Instant::now();
    let mut res = SuiteResult::new("exponential-sum identities");
    let cs = c_box(c_max);
    let plain: Vec<Vec<Cyclotomic>> = (1..=q_max)
        .map(|q| {
            s_q_plain_batch(f, q, &cs, PlainPath::Direct)
                .expect("within direct range")
                .into_iter()
                .map(|v| v.exact)
                .collect()
        })
        .collect();
    for q in 2..=q_max {
        for q1 in 2..q {
            let q2 = q / q1;
            if q % q1 != 0 || q1 > q2 || q2 == 1 || gcd(q1 as i128, q2 as i128) != 1 {
                continue;
            }
            for (k, c) in cs.iter().enumerate() {
                let prod = plain[q1 as usize - 1][k].mul(&plain[q2 as usize - 1][k]);
                res.check(prod.same_value(&plain[q as usize - 1][k]), || {
                    format!("S_{q}({c:?}) != S_{q1} S_{q2}")
                });
            }
        }
    }
    for l in 1..=l_max {
        for cong in sample_classes(f, l, per_l) {
            for q in 1..=q_max {
                let run = |res: &mut SuiteResult| -> Result<()> {
                    let brute = s_full_batch(f, &cong, q, &cs, FullMode::Brute)?;
                    let crt = s_full_batch(f, &cong, q, &cs, FullMode::Crt)?;
                    let d = decompose(f, &cong, q);
                    let script = script_s_batch(f, &cong, d.q2, (d.q1 % l) as i64, &cs)?;
                    for (k, c) in cs.iter().enumerate() {
                        let tag = || format!("q={q} L={l} lambda={:?} c={c:?}", cong.lift());
                        res.check(brute[k].same_value(&crt[k]), || format!("brute != crt at {}", tag()));
                        let r = r_sum_int(f, d.q1, c)?;
                        let rs = script[k].exact.scale(r);
                        res.check(brute[k].exact.same_value(&rs), || format!("brute != R*script at {}", tag()));
                    }
                    Ok(())
                };
                if let Err(e) = run(&mut res) {
                    res.fail(format!("q={q} L={l}: {e}"));
                }
            }
        }
    }
    res.timed(start)
}

/// Primitive c with F*(c) = 0 and |c|∞ ≤ bound.
pub fn adjoint_zeros(f: &QuadraticForm, bound: i64, limit: usize) -> Vec<[i64; 4]> {
    c_box(bound)
        .into_iter()
        .filter(|c| c.iter().any(|&v| v != 0))
        .filter(|c| c.iter().fold(0i128, |g, &v| gcd(g, v as i128)) == 1)
        .filter(|c| f.eval_adjoint(c) == 0)
        .take(limit)
        .collect()
}

/// S_q(0) = q³θ₁(q)ψ_F(q) and S_q(c) = φ(q³)ψ_F(q) when F*(c) = 0, for q
/// coprime to 2Δ.
pub fn closed_form_suite(f: &QuadraticForm, q_max: u64) -> SuiteResult {
    let start = Instant::now();
    let mut res = SuiteResult::new("closed forms of S_q");
    let zeros = adjoint_zeros(f, 5, 4);
    if zeros.is_empty() {
        res.fail("no c with F*(c) = 0 found".into());
    }
    let mut cs = vec![[0i64; 4]];
    cs.extend(&zeros);
    let two_delta = 2 * f.disc() as i128;
    for q in (1..=q_max).filter(|&q| gcd(q as i128, two_delta) == 1) {
        let vals = match s_q_plain_batch(f, q, &cs, PlainPath::Direct) {
            Ok(v) => v,
            Err(e) => {
                res.fail(format!("q={q}: {e}"));
                continue;
            }
        };
        let psi = f.psi(q as i64) as i128;
        let (_, _, theta1) = mu_phi_theta1(q);
        let expect0 = Ratio::from_integer(q as u128 * q as u128 * q as u128) * Ratio::new(*theta1.numer() as u128, *theta1.denom() as u128);
        let expect0 = if expect0.is_integer() { Some(expect0.to_integer() as i128 * psi) } else { None };
        res.check(expect0.is_some() && vals[0].value() == expect0, || {
            format!("S_{q}(0) = {:?}, expected {expect0:?}", vals[0].value())
        });
        let phi3 = euler_phi(q) as i128 * (q as i128).pow(2);
        for (c, v) in zeros.iter().zip(&vals[1..]) {
            res.check(v.value() == Some(phi3 * psi), || {
                format!("S_{q}({c:?}) = {:?}, expected {}", v.value(), phi3 * psi)
            });
            let r = r_sum_int(f, q, c);
            res.check(r.as_ref().ok() == Some(&(phi3 * psi)), || format!("R({q}; {c:?}) = {r:?}"));
        }
    }
    res.timed(start)
}

/// Real characters mod L: the principal one and the Kronecker characters of
/// fundamental discriminants whose conductor divides L.
pub fn real_characters(l: u64) -> Vec<DirichletCharacter> {
    let mut out = vec![DirichletCharacter::principal(l)];
    for d in -(l as i64)..=(l as i64) {
        if d == 0 || d == 1 || fundamental_discriminant(d) != d || l % d.unsigned_abs() != 0 {
            continue;
        }
        if let Ok(chi) = DirichletCharacter::product(l, d) {
            out.push(chi);
        }
    }
    out
}

/// 𝒜_{q₂,L,dλ}(χ; c) = χ(d)𝒜_{q₂,L,λ}(χ; c) on random samples, and
/// ℬ_{L,dλ}(c) = ψ_F(d)ℬ_{L,λ}(c) at equal truncation.
pub fn flipping_suite(f: &QuadraticForm, samples: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let mut res = SuiteResult::new("flipping");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moduli = [1u64, 2, 3, 4, 5, 6, 8, 12];
    let mut done = 0;
    while done < samples {
        let l = moduli[rng.gen_range(0..moduli.len())];
        let q2 = rng.gen_range(1..=8u64);
        if q2 * l * l > 256 || q2 * l > 32 {
            continue;
        }
        let classes = classes_mod(f, l);
        let g = classes[rng.gen_range(0..classes.len())];
        let d = loop {
            let d = rng.gen_range(1..200i64);
            if gcd(d as i128, l as i128) == 1 {
                break d;
            }
        };
        let chars = real_characters(l);
        let chi = &chars[rng.gen_range(0..chars.len())];
        let c: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-2..=2));
        done += 1;
        let run = || -> Result<bool> {
            let cong = CongruenceData::new(f, l, g)?;
            let flipped = cong.scaled(f, d)?;
            let a = a_char(f, &cong, q2, chi, &c)?;
            let b = a_char(f, &flipped, q2, chi, &c)?;
            let sign = chi.value(d) as i128;
            Ok(b.exact.same_value(&a.exact.scale(sign)) && a.denominator == b.denominator)
        };
        match run() {
            Ok(ok) => res.check(ok, || format!("A flip fails: q2={q2} L={l} Gamma={g:?} d={d} c={c:?}")),
            Err(e) => res.fail(format!("q2={q2} L={l}: {e}")),
        }
    }
    let l = f.conductor();
    for g in classes_mod(f, l).into_iter().take(3) {
        for d in (2..l as i64 + 8).filter(|&d| gcd(d as i128, l as i128) == 1).take(3) {
            for c in [[0, 0, 0, 0], [1, 0, 0, 1], [1, -1, 2, 0]] {
                let run = || -> Result<(f64, f64)> {
                    let cong = CongruenceData::new(f, l, g)?;
                    let base = b_coeff_truncated(f, &cong, &c, B_FLIP_CUTOFF)?;
                    let flip = b_coeff_truncated(f, &cong.scaled(f, d)?, &c, B_FLIP_CUTOFF)?;
                    let psi = f.psi(d) as f64;
                    Ok(((flip.value - base.value * psi).norm(), base.value.norm()))
                };
                match run() {
                    Ok((diff, size)) => res.check(diff <= 1e-9 * size.max(1e-300), || {
                        format!("B flip fails: L={l} Gamma={g:?} d={d} c={c:?}: |diff| = {diff:e}")
                    }),
                    Err(e) => res.fail(format!("B flip L={l}: {e}")),
                }
            }
        }
    }
    res.timed(start)
}

fn strip_squares(mut a: i128, p: u64) -> i128 {
    let p2 = (p * p) as i128;
    while a % p2 == 0 {
        a /= p2;
    }
    a
}

/// Whether ax² + by² = z² has a nonzero solution over ℚ_p, by search in the
/// three affine charts. In the chart where coordinate i equals 1 the
/// partial derivative has valuation δ = v(2) + v(coef_i), so a solution mod
/// p^{2δ+1} lifts, and every p-adic solution reduces to one.
pub fn soluble_at(a: i128, b: i128, p: u64) -> bool {
    let (a, b) = (strip_squares(a, p), strip_squares(b, p));
    let coef = [a, b, -1i128];
    let v2 = u32::from(p == 2);
    for i in 0..3 {
        let k = 2 * (v2 + valuation(coef[i], p)) + 1;
        let m = (p as i128).pow(k);
        let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
        for s in 0..m {
            let base = coef[i] + coef[j1] * s * s;
            for t in 0..m {
                if (base + coef[j2] * t * t) % m == 0 {
                    return true;
                }
            }
        }
    }
    false
}

fn nonzero(rng: &mut ChaCha8Rng, bound: i64) -> i128 {
    loop {
        let v = rng.gen_range(-bound..=bound);
        if v != 0 {
            return v as i128;
        }
    }
}

/// Σ_v inv_v(a, b) = 0 on random pairs, and symbol agreement with the
/// solubility oracle for p ≤ 13.
pub fn hilbert_suite(pairs: usize, oracle_pairs: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let mut res = SuiteResult::new("Hilbert symbols");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..pairs {
        let (a, b) = (nonzero(&mut rng, 1_000_000), nonzero(&mut rng, 1_000_000));
        let mut places = vec![Place::Infinite];
        let n = (2 * a * b).unsigned_abs() as u64;
        places.extend(conecount_core::arith::factorize(n).primes().map(Place::Finite));
        let prod: i32 = places.iter().map(|&v| hilbert_symbol(a, b, v) as i32).product();
        res.check(prod == 1, || format!("reciprocity fails for ({a}, {b})"));
    }
    for _ in 0..oracle_pairs {
        let (a, b) = (nonzero(&mut rng, 500), nonzero(&mut rng, 500));
        for p in [2u64, 3, 5, 7, 11, 13] {
            let sym = hilbert_symbol(a, b, Place::Finite(p));
            let sol = soluble_at(a, b, p);
            res.check((sym == 1) == sol, || format!("({a}, {b})_{p} = {sym} but soluble = {sol}"));
        }
    }
    res.timed(start)
}

/// Stabilized σ_p against closed forms for p ∤ 2Δ, p ≤ p_max: the good-prime
/// formula when p ∤ L and the Hensel count p^{−3e} when p^e ∥ L.
pub fn density_suite(f: &QuadraticForm, moduli: &[u64], p_max: u64) -> SuiteResult {
    let start = Instant::now();
    let mut res = SuiteResult::new("local density stabilization");
    let two_delta = 2 * f.disc() as i128;
    for &l in moduli {
        let cong = if l == 1 { CongruenceData::trivial() } else { sample_classes(f, l, 1).remove(0) };
        for p in conecount_core::arith::primes_up_to(p_max) {
            if two_delta % p as i128 == 0 {
                continue;
            }
            let e = valuation(l as i128, p);
            let expect = if e == 0 {
                closed_form_density(f, p).0
            } else {
                Ratio::new(1, (p as i128).pow(3 * e))
            };
            match sigma_p(f, p, &cong, MAX_K) {
                Ok(d) => res.check(d.value == expect, || {
                    format!("sigma_{p} (L={l}) = {} but closed form {expect}", d.value)
                }),
                Err(e) => res.fail(format!("sigma_{p} (L={l}): {e}")),
            }
        }
    }
    res.timed(start)
}

/// ω_f additivity under Γ mod L → its lifts mod pL, class-independence of 𝔖̃
/// under Γ → γΓ, and 𝔖_V = φ(L)ω_f against the expanded product.
pub fn measure_suite(f: &QuadraticForm, l: u64, refine: &[u64], tol: f64, p_max: u64) -> SuiteResult {
    let start = Instant::now();
    let mut res = SuiteResult::new("measure coherence");
    let run = |res: &mut SuiteResult| -> Result<()> {
        // first class with points over every ℤ_p
        let (cong, base) = classes_mod(f, l)
            .into_iter()
            .find_map(|g| {
                let cong = CongruenceData::new(f, l, g).ok()?;
                measures(f, &cong, tol, p_max).ok().map(|m| (cong, m))
            })
            .ok_or_else(|| Error::Precondition(format!("no soluble class mod {l}")))?;
        for &p in refine {
            let lp = l * p;
            let mut sum = 0.0;
            let mut err = base.tail_bound;
            for g in classes_mod(f, lp) {
                if (0..4).all(|i| (g[i] - cong.gamma()[i]).rem_euclid(l as i64) == 0) {
                    match measures(f, &CongruenceData::new(f, lp, g)?, tol, p_max) {
                        Ok(m) => {
                            sum += m.omega_f;
                            err += m.tail_bound;
                        }
                        // no p-adic points: measure zero
                        Err(Error::Insoluble(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            res.check((sum - base.omega_f).abs() <= 3.0 * err, || {
                format!("omega_f(L={l}) = {} but lifts mod {lp} sum to {sum} (err {err:e})", base.omega_f)
            });
        }
        for gamma in (2..l as i64).filter(|&g| gcd(g as i128, l as i128) == 1) {
            let m = measures(f, &cong.scaled(f, gamma)?, tol, p_max)?;
            res.check((m.series_w - base.series_w).abs() <= 1e-12 * base.series_w.abs(), || {
                format!("series differs between Gamma and {gamma}*Gamma")
            });
        }
        let phi = euler_phi(l) as f64;
        res.check(base.tamagawa_v == phi * base.omega_f, || "tamagawa_v != phi(L) omega_f".into());
        let (prod, tail) = tamagawa_by_product(f, &cong, p_max)?;
        res.check((prod - base.tamagawa_v).abs() <= 3.0 * (tail + phi * base.tail_bound), || {
            format!("product path {prod} vs {}", base.tamagawa_v)
        });
        Ok(())
    };
    if let Err(e) = run(&mut res) {
        res.fail(e.to_string());
    }
    res.timed(start)
}
