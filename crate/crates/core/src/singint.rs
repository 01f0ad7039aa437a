//! The real density ℐ(w₀) = ∫ w₀ δ(F) dx, computed two ways.

use crate::lattice::WeightFunction;
use crate::quadform::QuadraticForm;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LerayMethod {
    SurfaceQuadrature,
    SlabLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LerayResult {
    pub value: f64,
    pub method: LerayMethod,
    pub est_error: f64,
    pub samples_or_nodes: u64,
    /// Set when slab extrapolation residuals fail to shrink.
    pub warning: Option<String>,
}

/// Minimum |∂_kF| accepted on the support.
pub const SINGULAR_THRESHOLD: f64 = 1e-8;

fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// F restricted to the line x_{≠k} fixed: a t² + b t + c.
struct Fiber {
    a: f64,
    b: f64,
    c: f64,
}

impl Fiber {
    fn new(f: &QuadraticForm, k: usize, x: &[f64; 4]) -> Self {
        let g = f.gram();
        let mut y = *x;
        y[k] = 0.0;
        let b = 2.0 * (0..4).filter(|&j| j != k).map(|j| g[k][j] as f64 * y[j]).sum::<f64>();
        Fiber { a: g[k][k] as f64, b, c: f.eval_f64(&y) }
    }

    /// Real roots of a t² + b t + c = level, ascending.
    fn roots(&self, level: f64) -> Vec<f64> {
        let c = self.c - level;
        let d = self.b * self.b - 4.0 * self.a * c;
        if d < 0.0 {
            return Vec::new();
        }
        let s = d.sqrt();
        // stable form
        let q = -0.5 * (self.b + self.b.signum() * s);
        let mut r = if q == 0.0 {
            vec![0.0]
        } else {
            let (r1, r2) = (q / self.a, c / q);
            if s == 0.0 { vec![r1] } else { vec![r1, r2] }
        };
        r.sort_by(f64::total_cmp);
        r
    }

    fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }

    fn slope(&self, t: f64) -> f64 {
        2.0 * self.a * t + self.b
    }
}

fn others(k: usize) -> [usize; 3] {
    let v: Vec<usize> = (0..4).filter(|&i| i != k).collect();
    [v[0], v[1], v[2]]
}

/// Midpoint nodes of an n³ grid over the box, with cell volume.
fn grid_axes(lo: &[f64; 4], hi: &[f64; 4], k: usize, n: usize, shift: [f64; 3]) -> ([Vec<f64>; 3], f64) {
    let o = others(k);
    let mut vol = 1.0;
    let axes = [0, 1, 2].map(|j| {
        let (a, b) = (lo[o[j]], hi[o[j]]);
        let h = (b - a) / n as f64;
        vol *= h;
        (0..n).map(|i| a + (i as f64 + shift[j]) * h).collect::<Vec<f64>>()
    });
    (axes, vol)
}

/// Pick the coordinate whose partial derivative stays furthest from zero,
/// relative to |∇F|, on sampled support points.
fn choose_coordinate(f: &QuadraticForm, w: &WeightFunction) -> Result<usize> {
    let g = f.gram();
    let mut best: Option<(f64, f64, usize)> = None;
    for k in (0..4).filter(|&k| g[k][k] != 0) {
        let mut worst_rel = f64::INFINITY;
        let mut worst_abs = f64::INFINITY;
        for (lo, hi) in w.support_boxes() {
            let (axes, _) = grid_axes(&lo, &hi, k, 12, [0.5; 3]);
            let o = others(k);
            for &u0 in &axes[0] {
                for &u1 in &axes[1] {
                    for &u2 in &axes[2] {
                        let mut x = [0.0; 4];
                        x[o[0]] = u0;
                        x[o[1]] = u1;
                        x[o[2]] = u2;
                        let fib = Fiber::new(f, k, &x);
                        for t in fib.roots(0.0) {
                            x[k] = t;
                            if w.eval(&x) <= 0.0 {
                                continue;
                            }
                            let grad = f.gradient_f64(&x);
                            let gn = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
                            worst_abs = worst_abs.min(grad[k].abs());
                            worst_rel = worst_rel.min(grad[k].abs() / gn);
                        }
                    }
                }
            }
        }
        if best.as_ref().is_none_or(|b| worst_rel > b.0) {
            best = Some((worst_rel, worst_abs, k));
        }
    }
    let (_, abs, k) = best.ok_or_else(|| Error::SingularSurface("no nonzero diagonal coefficient".into()))?;
    if abs < SINGULAR_THRESHOLD {
        return Err(Error::SingularSurface(format!("|dF/dx{k}| vanishes on the support")));
    }
    Ok(k)
}

fn surface_at(f: &QuadraticForm, w: &WeightFunction, k: usize, n: usize) -> Result<f64> {
    let o = others(k);
    let mut total = 0.0;
    for (lo, hi) in w.support_boxes() {
        let (axes, vol) = grid_axes(&lo, &hi, k, n, [0.5; 3]);
        let slices: Vec<Result<f64>> = axes[0]
            .par_iter()
            .map(|&u0| {
                let mut acc = Vec::with_capacity(axes[1].len());
                for &u1 in &axes[1] {
                    let mut row = 0.0;
                    for &u2 in &axes[2] {
                        let mut x = [0.0; 4];
                        x[o[0]] = u0;
                        x[o[1]] = u1;
                        x[o[2]] = u2;
                        let fib = Fiber::new(f, k, &x);
                        for t in fib.roots(0.0) {
                            if t < lo[k] || t > hi[k] {
                                continue;
                            }
                            x[k] = t;
                            let wv = w.eval(&x);
                            if wv == 0.0 {
                                continue;
                            }
                            let d = fib.slope(t).abs();
                            if d < SINGULAR_THRESHOLD {
                                return Err(Error::SingularSurface(format!("|dF/dx{k}| = {d:e} at {x:?}")));
                            }
                            row += wv / d;
                        }
                    }
                    acc.push(row);
                }
                Ok(pairwise_sum(&acc))
            })
            .collect();
        let slices = slices.into_iter().collect::<Result<Vec<f64>>>()?;
        total += vol * pairwise_sum(&slices);
    }
    Ok(total)
}

/// Leray measure by a tensor midpoint rule on the three free coordinates,
/// summing w/|∂_kF| over the real roots in x_k. The error estimate compares
/// grids of size n/2 and n.
pub fn leray_surface(f: &QuadraticForm, w: &WeightFunction, grid: usize) -> Result<LerayResult> {
    if grid < 2 {
        return Err(Error::Precondition("grid must be at least 2".into()));
    }
    let k = choose_coordinate(f, w)?;
    let coarse = surface_at(f, w, k, grid / 2)?;
    let fine = surface_at(f, w, k, grid)?;
    Ok(LerayResult {
        value: fine,
        method: LerayMethod::SurfaceQuadrature,
        est_error: (fine - coarse).abs() / 3.0,
        samples_or_nodes: (grid as u64).pow(3),
        warning: None,
    })
}

const GL_NODES: [f64; 5] = [0.0, -0.538_469_310_105_683, 0.538_469_310_105_683, -0.906_179_845_938_664, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
    0.236_926_885_056_189,
];

/// ∫ w over {0 ≤ F < ε} ∩ support along one fiber, by Gauss–Legendre on
/// the exact x_k intervals.
fn fiber_slab(fib: &Fiber, w: &WeightFunction, x: &mut [f64; 4], k: usize, lo: f64, hi: f64, eps: f64) -> f64 {
    let mut cuts: Vec<f64> = vec![lo, hi];
    cuts.extend(fib.roots(0.0).into_iter().chain(fib.roots(eps)).filter(|&t| t > lo && t < hi));
    cuts.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let m = fib.eval(0.5 * (a + b));
        if !(0.0..eps).contains(&m) {
            continue;
        }
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (z, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            x[k] = c + h * z;
            sum += wt * h * w.eval(x);
        }
    }
    sum
}

fn slab_at(f: &QuadraticForm, w: &WeightFunction, k: usize, n: usize, eps: f64, shift: [f64; 3]) -> f64 {
    let o = others(k);
    let mut total = 0.0;
    for (lo, hi) in w.support_boxes() {
        let (axes, vol) = grid_axes(&lo, &hi, k, n, shift);
        let slices: Vec<f64> = axes[0]
            .par_iter()
            .map(|&u0| {
                let mut acc = Vec::with_capacity(axes[1].len());
                for &u1 in &axes[1] {
                    let mut row = 0.0;
                    for &u2 in &axes[2] {
                        let mut x = [0.0; 4];
                        x[o[0]] = u0;
                        x[o[1]] = u1;
                        x[o[2]] = u2;
                        let fib = Fiber::new(f, k, &x);
                        row += fiber_slab(&fib, w, &mut x, k, lo[k], hi[k], eps);
                    }
                    acc.push(row);
                }
                pairwise_sum(&acc)
            })
            .collect();
        total += vol * pairwise_sum(&slices);
    }
    total / eps
}

/// Neville extrapolation of the points (x_i, y_i) to x = 0.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// Raw slab averages (1/ε)∫_{0 ≤ F < ε} w for each ε, on a grid shifted by
/// a seeded random offset.
pub fn slab_values(f: &QuadraticForm, w: &WeightFunction, eps: &[f64], samples: usize, seed: u64) -> Result<Vec<f64>> {
    let k = choose_coordinate(f, w)?;
    let n = (samples as f64).cbrt().round().max(2.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
    Ok(eps.iter().map(|&e| slab_at(f, w, k, n, e, shift)).collect())
}

/// Slab volume limit with Richardson extrapolation in ε.
pub fn leray_slab(
    f: &QuadraticForm,
    w: &WeightFunction,
    epsilon_schedule: &[f64],
    samples: usize,
    seed: u64,
) -> Result<LerayResult> {
    if epsilon_schedule.len() < 3 {
        return Err(Error::Precondition("need at least 3 slab widths".into()));
    }
    if epsilon_schedule.windows(2).any(|p| !(p[1] < p[0])) || epsilon_schedule.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Precondition("slab widths must be positive and decreasing".into()));
    }
    let ys = slab_values(f, w, epsilon_schedule, samples, seed)?;
    let ys2 = slab_values(f, w, epsilon_schedule, samples, seed.wrapping_add(1))?;
    let xs = epsilon_schedule;
    let n = xs.len();
    // successive extrapolants using the last m widths
    let ests: Vec<f64> = (2..=n).map(|m| extrapolate_to_zero(&xs[n - m..], &ys[n - m..])).collect();
    let value = ests[ests.len() - 1];
    let extrap_err = (ests[ests.len() - 1] - ests[ests.len() - 2]).abs();
    let other = extrapolate_to_zero(xs, &ys2);
    let sampling_err = (other - value).abs();
    let diffs: Vec<f64> = ests.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    let warning = (diffs.len() >= 2 && diffs[diffs.len() - 1] > diffs[diffs.len() - 2] && extrap_err > 1e-12 * value.abs())
        .then(|| "slab extrapolation residuals do not decrease".to_string());
    let per_axis = (samples as f64).cbrt().round().max(2.0) as u64;
    Ok(LerayResult {
        value,
        method: LerayMethod::SlabLimit,
        est_error: extrap_err + sampling_err,
        samples_or_nodes: per_axis.pow(3) * n as u64,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fiber_roots_stable() {
        let fib = Fiber { a: 1.0, b: -1e8, c: 1.0 };
        let r = fib.roots(0.0);
        assert!((r[0] - 1e-8).abs() < 1e-20);
        assert!((r[1] - 1e8).abs() < 1e-4);
    }

    #[test]
    fn neville_linear() {
        let v = extrapolate_to_zero(&[0.4, 0.2, 0.1], &[3.4, 3.2, 3.1]);
        assert!((v - 3.0).abs() < 1e-12);
    }
}
