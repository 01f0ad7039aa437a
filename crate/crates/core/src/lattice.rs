//! Exact enumeration of integral zeros of F and the weighted counting
//! functions built on it.

use crate::arith::{content, gcd, inv_mod, moebius, modp};
use crate::expsums::CongruenceData;
use crate::quadform::{QuadraticForm, RealComponentInfo, Vec4};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Read, Write};

/// Number of slabs the outer coordinate is cut into. Fixed so that
/// floating-point sums do not depend on the thread count.
pub const PARTITIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// η(|u − m|/r) with η(t) = exp(−1/(1 − t²)) on |t| < 1.
    Bump { center: [f64; 4], radius: f64 },
    /// Indicator of the closed box lo ≤ u ≤ hi.
    Box { lo: [f64; 4], hi: [f64; 4] },
}

/// A compactly supported weight w₀ on ℝ⁴, applied as w₀(x/B).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    kind: WeightKind,
    /// Component filter: (separator, index).
    component: Option<([f64; 4], usize)>,
    symmetric: bool,
}

pub fn bump_profile(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn norm(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl WeightFunction {
    pub fn new(kind: WeightKind, symmetric: bool) -> Result<Self> {
        let w = Self { kind, component: None, symmetric };
        w.validate()?;
        Ok(w)
    }

    pub fn bump(center: [f64; 4], radius: f64) -> Result<Self> {
        Self::new(WeightKind::Bump { center, radius }, false)
    }

    pub fn indicator(lo: [f64; 4], hi: [f64; 4]) -> Result<Self> {
        Self::new(WeightKind::Box { lo, hi }, false)
    }

    /// Restrict to one real component of the cone.
    pub fn on_component(mut self, info: &RealComponentInfo, index: usize) -> Result<Self> {
        if index >= info.count {
            return Err(Error::InvalidWeight(format!("component {index} out of range")));
        }
        if let Some(sep) = info.separator {
            if self.symmetric {
                return Err(Error::InvalidWeight("x -> -x swaps the two components".into()));
            }
            self.component = Some((sep, index));
        }
        Ok(self)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn component(&self) -> Option<usize> {
        self.component.map(|(_, i)| i)
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            WeightKind::Bump { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidWeight("radius must be positive".into()));
                }
                if norm(center) <= *radius {
                    return Err(Error::InvalidWeight("support contains the origin".into()));
                }
            }
            WeightKind::Box { lo, hi } => {
                if (0..4).any(|i| !(lo[i] <= hi[i])) {
                    return Err(Error::InvalidWeight("box has lo > hi".into()));
                }
                if (0..4).all(|i| lo[i] <= 0.0 && 0.0 <= hi[i]) {
                    return Err(Error::InvalidWeight("support contains the origin".into()));
                }
                if self.symmetric && (0..4).all(|i| lo[i] <= -hi[i] && -lo[i] <= hi[i]) {
                    return Err(Error::InvalidWeight("box meets its reflection".into()));
                }
            }
        }
        Ok(())
    }

    fn base(&self, u: &[f64; 4]) -> f64 {
        match &self.kind {
            WeightKind::Bump { center, radius } => {
                let d: f64 = (0..4).map(|i| (u[i] - center[i]).powi(2)).sum::<f64>().sqrt();
                bump_profile(d / radius)
            }
            WeightKind::Box { lo, hi } => ((0..4).all(|i| lo[i] <= u[i] && u[i] <= hi[i])) as u8 as f64,
        }
    }

    /// w₀(u).
    pub fn eval(&self, u: &[f64; 4]) -> f64 {
        if let Some((sep, idx)) = &self.component {
            let s: f64 = (0..4).map(|i| sep[i] * u[i]).sum();
            if usize::from(s < 0.0) != *idx {
                return 0.0;
            }
        }
        let mut v = self.base(u);
        if self.symmetric {
            v += self.base(&u.map(|x| -x));
        }
        v
    }

    /// Axis-parallel boxes (in u) covering the support, one per mirror image.
    pub fn support_boxes(&self) -> Vec<([f64; 4], [f64; 4])> {
        let b = match &self.kind {
            WeightKind::Bump { center, radius } => (center.map(|c| c - radius), center.map(|c| c + radius)),
            WeightKind::Box { lo, hi } => (*lo, *hi),
        };
        let mut out = vec![b];
        if self.symmetric {
            out.push((b.1.map(|v| -v), b.0.map(|v| -v)));
        }
        out
    }

    /// max |u|∞ over the support.
    pub fn support_radius(&self) -> f64 {
        self.support_boxes()
            .iter()
            .flat_map(|(lo, hi)| lo.iter().chain(hi.iter()).map(|v| v.abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    /// Pieces whose sum is w₀, each with one support box.
    pub fn pieces(&self) -> Vec<WeightFunction> {
        if !self.symmetric {
            return vec![self.clone()];
        }
        let mirror = match &self.kind {
            WeightKind::Bump { center, radius } => WeightKind::Bump { center: center.map(|c| -c), radius: *radius },
            WeightKind::Box { lo, hi } => WeightKind::Box { lo: hi.map(|v| -v), hi: lo.map(|v| -v) },
        };
        let plain = |kind| WeightFunction { kind, component: self.component, symmetric: false };
        vec![plain(self.kind.clone()), plain(mirror)]
    }
}

/// What to enumerate: zeros of F in an integer box, optionally filtered.
#[derive(Debug, Clone)]
pub struct EnumRequest<'a> {
    pub form: &'a QuadraticForm,
    pub lo: Vec4,
    pub hi: Vec4,
    pub class: Option<&'a CongruenceData>,
    pub primitive: bool,
    pub component: Option<([f64; 4], usize)>,
}

impl EnumRequest<'_> {
    fn keep(&self, x: &Vec4) -> bool {
        if (0..4).any(|i| x[i] < self.lo[i] || x[i] > self.hi[i]) {
            return false;
        }
        if let Some(c) = self.class {
            if !c.contains(x) {
                return false;
            }
        }
        if self.primitive && content(x) != 1 {
            return false;
        }
        if let Some((sep, idx)) = &self.component {
            let s: f64 = (0..4).map(|i| sep[i] * x[i] as f64).sum();
            if usize::from(s < 0.0) != *idx {
                return false;
            }
        }
        true
    }

    fn axis_values(&self, i: usize) -> Vec<i64> {
        let (lo, hi) = (self.lo[i], self.hi[i]);
        match self.class {
            Some(c) if c.modulus() > 1 => {
                let l = c.modulus() as i64;
                let start = lo + (c.gamma()[i] - lo).rem_euclid(l);
                (0..).map(|j| start + j * l).take_while(|&v| v <= hi).collect()
            }
            _ => (lo..=hi).collect(),
        }
    }
}

fn int_sqrt_exact(d: i128) -> Option<i128> {
    if d < 0 {
        return None;
    }
    let mut s = (d as f64).sqrt() as i128;
    while s * s > d {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= d {
        s += 1;
    }
    (s * s == d).then_some(s)
}

/// Visit every zero of F selected by `req`, each exactly once.
///
/// The outer coordinate is cut into [`PARTITIONS`] slabs (or `partitions` if
/// given); slabs are processed in parallel and merged in slab order.
pub fn enumerate_solutions<A, I, V, M>(req: &EnumRequest, partitions: Option<usize>, init: I, visit: V, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, Vec4) + Sync,
    M: Fn(A, A) -> A,
{
    let g = req.form.gram();
    let parts = partitions.unwrap_or(PARTITIONS).max(1);
    let Some(k) = (0..4).find(|&i| g[i][i] != 0) else {
        return scan_4d(req, parts, init, visit, merge);
    };
    let others: Vec<usize> = (0..4).filter(|&i| i != k).collect();
    let (o0, o1, o2) = (others[0], others[1], others[2]);
    let outer = req.axis_values(o0);
    let mid = req.axis_values(o1);
    let inner = req.axis_values(o2);
    let chunk = outer.len().div_ceil(parts).max(1);
    // β² − aF(x with x_k = 0) ≤ 18·G²·X², which must fit in i64
    let gmax = g.iter().flatten().map(|v| v.unsigned_abs() as f64).fold(0.0, f64::max);
    let xmax = req.lo.iter().chain(req.hi.iter()).map(|v| v.unsigned_abs() as f64).fold(0.0, f64::max);
    let fast = 18.0 * (gmax * xmax).powi(2) < 2f64.powi(62);
    let results: Vec<A> = outer
        .par_chunks(chunk)
        .map(|slab| {
            let mut acc = init();
            let mut emit = |x: &mut Vec4, roots: [Option<i64>; 2]| {
                for t in roots.into_iter().flatten() {
                    x[k] = t;
                    if req.keep(x) {
                        visit(&mut acc, *x);
                    }
                }
            };
            let mut x = [0i64; 4];
            for &v0 in slab {
                x[o0] = v0;
                for &v1 in &mid {
                    x[o1] = v1;
                    if fast {
                        let a = g[k][k];
                        let beta01 = g[k][o0] * v0 + g[k][o1] * v1;
                        let c01 = g[o0][o0] * v0 * v0 + 2 * g[o0][o1] * v0 * v1 + g[o1][o1] * v1 * v1;
                        let lin = 2 * (g[o2][o0] * v0 + g[o2][o1] * v1);
                        for &v2 in &inner {
                            let beta = beta01 + g[k][o2] * v2;
                            let c = c01 + (lin + g[o2][o2] * v2) * v2;
                            let Some(s) = square_root_i64(beta * beta - a * c) else { continue };
                            x[o2] = v2;
                            emit(&mut x, quadratic_roots(a as i128, beta as i128, s as i128));
                        }
                    } else {
                        let a = g[k][k] as i128;
                        for &v2 in &inner {
                            x[o2] = v2;
                            x[k] = 0;
                            let beta: i128 = others.iter().map(|&j| g[k][j] as i128 * x[j] as i128).sum();
                            let c = req.form.eval(&x);
                            let Some(s) = int_sqrt_exact(beta * beta - a * c) else { continue };
                            emit(&mut x, quadratic_roots(a, beta, s));
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut it = results.into_iter();
    let first = it.next().unwrap_or_else(&init);
    it.fold(first, merge)
}

/// Integer roots of a t² + 2βt + c given s² = β² − ac.
fn quadratic_roots(a: i128, beta: i128, s: i128) -> [Option<i64>; 2] {
    let root = |num: i128| (num % a == 0).then(|| (num / a) as i64);
    let r1 = root(-beta + s);
    let r2 = if s == 0 { None } else { root(-beta - s) };
    [r1, r2]
}

/// Bit i set iff i is a square mod 64.
const SQUARES_MOD_64: u64 = {
    let mut m = 0u64;
    let mut i = 0;
    while i < 64 {
        m |= 1 << ((i * i) % 64);
        i += 1;
    }
    m
};

fn square_root_i64(d: i64) -> Option<i64> {
    if d < 0 || (SQUARES_MOD_64 >> (d & 63)) & 1 == 0 {
        return None;
    }
    let mut s = (d as f64).sqrt() as i64;
    while s * s > d {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= d {
        s += 1;
    }
    (s * s == d).then_some(s)
}

fn scan_4d<A, I, V, M>(req: &EnumRequest, parts: usize, init: I, visit: V, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, Vec4) + Sync,
    M: Fn(A, A) -> A,
{
    let axes: Vec<Vec<i64>> = (0..4).map(|i| req.axis_values(i)).collect();
    let chunk = axes[0].len().div_ceil(parts).max(1);
    let results: Vec<A> = axes[0]
        .par_chunks(chunk)
        .map(|slab| {
            let mut acc = init();
            for &a in slab {
                for &b in &axes[1] {
                    for &c in &axes[2] {
                        for &d in &axes[3] {
                            let x = [a, b, c, d];
                            if req.form.eval(&x) == 0 && req.keep(&x) {
                                visit(&mut acc, x);
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut it = results.into_iter();
    let first = it.next().unwrap_or_else(&init);
    it.fold(first, merge)
}

/// All selected zeros, in enumeration order.
pub fn collect_solutions(req: &EnumRequest, partitions: Option<usize>) -> Vec<Vec4> {
    enumerate_solutions(
        req,
        partitions,
        Vec::new,
        |acc: &mut Vec<Vec4>, x| acc.push(x),
        |mut a, b| {
            a.extend(b);
            a
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountMode {
    W,
    WPrimitive,
    V,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    /// Zeros visited in the support boxes.
    pub raw_count: u64,
    pub weighted_sum: f64,
    pub b: f64,
    pub class: CongruenceData,
    pub mode: CountMode,
}

fn box_bounds(lo: &[f64; 4], hi: &[f64; 4], b: f64, d: i64) -> (Vec4, Vec4) {
    // generous integer bounds; the weight itself decides membership
    let s = b / d as f64;
    let l = lo.map(|v| (v * s).floor() as i64 - 1);
    let h = hi.map(|v| (v * s).ceil() as i64 + 1);
    (l, h)
}

/// Σ w₀(d·x/B) over zeros x in the class, optionally primitive only.
fn weighted_count(
    f: &QuadraticForm,
    w: &WeightFunction,
    b: f64,
    d: i64,
    cong: &CongruenceData,
    primitive: bool,
) -> (u64, f64) {
    let boxes = w.support_boxes();
    let mut raw = 0u64;
    let mut sum = 0.0;
    for (bi, (lo, hi)) in boxes.iter().enumerate() {
        let (ilo, ihi) = box_bounds(lo, hi, b, d);
        let earlier: Vec<(Vec4, Vec4)> = boxes[..bi].iter().map(|(l, h)| box_bounds(l, h, b, d)).collect();
        let req = EnumRequest {
            form: f,
            lo: ilo,
            hi: ihi,
            class: (cong.modulus() > 1).then_some(cong),
            primitive,
            component: None,
        };
        let (r, s) = enumerate_solutions(
            &req,
            None,
            || (0u64, 0.0f64),
            |acc, x| {
                if earlier.iter().any(|(l, h)| (0..4).all(|i| l[i] <= x[i] && x[i] <= h[i])) {
                    return;
                }
                acc.0 += 1;
                let u = x.map(|v| (v * d) as f64 / b);
                acc.1 += w.eval(&u);
            },
            |a, c| (a.0 + c.0, a.1 + c.1),
        );
        raw += r;
        sum += s;
    }
    (raw, sum)
}

/// 𝒩_𝒲(w̃_B; (L, Γ)) = Σ_{x ≡ Γ mod L, F(x) = 0} w₀(x/B).
pub fn count_w(f: &QuadraticForm, w: &WeightFunction, b: f64, cong: &CongruenceData) -> CountResult {
    let (raw_count, weighted_sum) = weighted_count(f, w, b, 1, cong, false);
    CountResult { raw_count, weighted_sum, b, class: cong.clone(), mode: CountMode::W }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimitiveMode {
    Direct,
    Moebius,
}

/// 𝒩_{𝒲°}: the same sum restricted to primitive x.
pub fn count_wo(
    f: &QuadraticForm,
    w: &WeightFunction,
    b: f64,
    cong: &CongruenceData,
    mode: PrimitiveMode,
) -> Result<CountResult> {
    let l = cong.modulus();
    let (raw_count, weighted_sum) = match mode {
        PrimitiveMode::Direct => weighted_count(f, w, b, 1, cong, true),
        PrimitiveMode::Moebius => {
            // primitive x = d·y: Σ_d μ(d) Σ_{y ≡ d̄Γ} w₀(d·y/B), zero once d > B·R
            let dmax = (b * w.support_radius()).floor() as i64 + 1;
            let mut raw = 0u64;
            let mut sum = 0.0;
            for d in 1..=dmax {
                let mu = moebius(d as u64);
                if mu == 0 || gcd(d as i128, l as i128) != 1 {
                    continue;
                }
                let dbar = inv_mod(d as i128, l as i128).unwrap() as i64;
                let class = if l > 1 { cong.scaled(f, dbar)? } else { cong.clone() };
                let (r, s) = weighted_count(f, w, b, d, &class, false);
                raw += r;
                sum += mu as f64 * s;
            }
            (raw, sum)
        }
    };
    Ok(CountResult { raw_count, weighted_sum, b, class: cong.clone(), mode: CountMode::WPrimitive })
}

/// 𝒩_V = ½ Σ_{γ unit mod L} 𝒩_{𝒲°}(w̃_B; (L, γΓ)) for symmetric w.
pub fn count_v(f: &QuadraticForm, w: &WeightFunction, b: f64, cong: &CongruenceData) -> Result<CountResult> {
    if !w.is_symmetric() {
        return Err(Error::AsymmetricWeight);
    }
    let l = cong.modulus() as i64;
    let mut raw = 0u64;
    let mut sum = 0.0;
    for gamma in (1..=l).filter(|&g| gcd(g as i128, l as i128) == 1) {
        let class = if l > 1 { cong.scaled(f, gamma)? } else { cong.clone() };
        let r = count_wo(f, w, b, &class, PrimitiveMode::Direct)?;
        raw += r.raw_count;
        sum += r.weighted_sum;
    }
    Ok(CountResult { raw_count: raw, weighted_sum: 0.5 * sum, b, class: cong.clone(), mode: CountMode::V })
}

/// Primitive classes Γ mod L on the cone, lexicographic.
pub fn classes_mod(f: &QuadraticForm, l: u64) -> Vec<Vec4> {
    let li = l as i64;
    let mut out = Vec::new();
    let mut x = [0i64; 4];
    loop {
        let g = x.iter().fold(l as i128, |acc, &v| gcd(acc, v as i128));
        if g == 1 && modp(f.eval(&x), l as i128) == 0 {
            out.push(x);
        }
        let mut i = 3;
        loop {
            x[i] += 1;
            if x[i] < li {
                break;
            }
            x[i] = 0;
            if i == 0 {
                return out;
            }
            i -= 1;
        }
    }
}

/// Little-endian i64 quadruples.
pub fn write_points<W: Write>(mut out: W, points: &[Vec4]) -> io::Result<()> {
    for p in points {
        for v in p {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_points<R: Read>(mut input: R) -> io::Result<Vec<Vec4>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % 32 != 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "length is not a multiple of 32"));
    }
    Ok(bytes
        .chunks_exact(32)
        .map(|c| {
            let v = |i: usize| i64::from_le_bytes(c[8 * i..8 * i + 8].try_into().unwrap());
            [v(0), v(1), v(2), v(3)]
        })
        .collect())
}
