//! Integral quaternary quadratic forms F(x) = xᵀAx.

use crate::arith::{self, content, fundamental_discriminant, is_square, kronecker};
use crate::{Error, Result};
use nalgebra::{Matrix4, SymmetricEigen};

pub type Vec4 = [i64; 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    gram: [[i64; 4]; 4],
    disc: i64,
    adjugate: [[i64; 4]; 4],
    conductor: u64,
    signature: (u8, u8),
}

/// Topology of the real points of the punctured cone.
#[derive(Debug, Clone, PartialEq)]
pub struct RealComponentInfo {
    pub count: usize,
    /// Present iff `count == 2`; sign(v·x) tells the components apart.
    pub separator: Option<[f64; 4]>,
}

impl RealComponentInfo {
    /// Component index (0 or 1) of a nonzero real point on the cone.
    pub fn component_of(&self, x: &[f64; 4]) -> usize {
        match &self.separator {
            None => 0,
            Some(v) => usize::from(dot_f(v, x) < 0.0),
        }
    }
}

fn dot_f(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn det3(m: [[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn minor(a: &[[i64; 4]; 4], r: usize, c: usize) -> i128 {
    let mut m = [[0i128; 3]; 3];
    let mut ii = 0;
    for i in (0..4).filter(|&i| i != r) {
        let mut jj = 0;
        for j in (0..4).filter(|&j| j != c) {
            m[ii][jj] = a[i][j] as i128;
            jj += 1;
        }
        ii += 1;
    }
    det3(m)
}

impl QuadraticForm {
    /// Upper triangle of A in row-major order: a00 a01 a02 a03 a11 a12 a13 a22 a23 a33.
    pub fn from_upper_triangle(u: [i64; 10]) -> Result<Self> {
        let mut gram = [[0i64; 4]; 4];
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                gram[i][j] = u[k];
                gram[j][i] = u[k];
                k += 1;
            }
        }
        Self::from_gram(gram)
    }

    /// Polynomial coefficients of x_i x_j (i ≤ j, same order as the upper
    /// triangle). Off-diagonal coefficients must be even.
    pub fn from_polynomial(coeffs: [i64; 10]) -> Result<Self> {
        let mut u = coeffs;
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                if i != j {
                    if coeffs[k] % 2 != 0 {
                        return Err(Error::OddCrossTerm(i, j));
                    }
                    u[k] = coeffs[k] / 2;
                }
                k += 1;
            }
        }
        Self::from_upper_triangle(u)
    }

    /// Doubles every polynomial coefficient, making cross terms even.
    pub fn scale_polynomial_by_two(coeffs: [i64; 10]) -> [i64; 10] {
        coeffs.map(|c| 2 * c)
    }

    pub fn from_gram(gram: [[i64; 4]; 4]) -> Result<Self> {
        for i in 0..4 {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        let mut adj = [[0i128; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                adj[j][i] = sign * minor(&gram, i, j);
            }
        }
        let det: i128 = (0..4).map(|j| gram[0][j] as i128 * adj[j][0]).sum();
        if det == 0 {
            return Err(Error::Singular);
        }
        let disc = i64::try_from(det).map_err(|_| Error::Overflow("discriminant"))?;
        let mut adjugate = [[0i64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                adjugate[i][j] = i64::try_from(adj[i][j]).map_err(|_| Error::Overflow("adjugate"))?;
            }
        }
        let m = Matrix4::from_fn(|i, j| gram[i][j] as f64);
        let eig = SymmetricEigen::new(m);
        let pos = eig.eigenvalues.iter().filter(|&&e| e > 0.0).count() as u8;
        let signature = (pos, 4 - pos);
        if pos == 0 || pos == 4 {
            return Err(Error::NotIsotropic);
        }
        if is_square(det) {
            return Err(Error::SquareDiscriminant(disc));
        }
        let conductor = fundamental_discriminant(disc).unsigned_abs();
        Ok(Self { gram, disc, adjugate, conductor, signature })
    }

    pub fn gram(&self) -> &[[i64; 4]; 4] {
        &self.gram
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn adjugate(&self) -> &[[i64; 4]; 4] {
        &self.adjugate
    }

    /// |discriminant of ℚ(√Δ)|.
    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Discriminant of ℚ(√Δ), so that ψ̃ = (D/·) is the primitive character.
    pub fn field_discriminant(&self) -> i64 {
        fundamental_discriminant(self.disc)
    }

    pub fn signature(&self) -> (u8, u8) {
        self.signature
    }

    pub fn upper_triangle(&self) -> [i64; 10] {
        let mut u = [0i64; 10];
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                u[k] = self.gram[i][j];
                k += 1;
            }
        }
        u
    }

    pub fn eval(&self, x: &Vec4) -> i128 {
        let g = &self.gram;
        let mut s = 0i128;
        for i in 0..4 {
            let xi = x[i] as i128;
            s += g[i][i] as i128 * xi * xi;
            for j in i + 1..4 {
                s += 2 * g[i][j] as i128 * xi * x[j] as i128;
            }
        }
        s
    }

    /// F evaluated on i128 coordinates with wrapping arithmetic, for use
    /// modulo powers of two.
    pub fn eval_wrapping(&self, x: &[i128; 4]) -> i128 {
        let g = &self.gram;
        let mut s = 0i128;
        for i in 0..4 {
            for j in 0..4 {
                s = s.wrapping_add((g[i][j] as i128).wrapping_mul(x[i]).wrapping_mul(x[j]));
            }
        }
        s
    }

    /// F evaluated modulo m on arbitrary i128 coordinates.
    pub fn eval_mod(&self, x: &[i128; 4], m: i128) -> i128 {
        let r: Vec<i128> = x.iter().map(|&v| arith::modp(v, m)).collect();
        let mut s = 0i128;
        for i in 0..4 {
            let mut row = 0i128;
            for j in 0..4 {
                row = arith::modp(row + self.gram[i][j] as i128 * r[j], m);
            }
            s = arith::modp(s + mulmod_i(row, r[i], m), m);
        }
        s
    }

    pub fn eval_f64(&self, x: &[f64; 4]) -> f64 {
        let g = &self.gram;
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += g[i][j] as f64 * x[i] * x[j];
            }
        }
        s
    }

    /// F*(c) = cᵀ adj(A) c.
    pub fn eval_adjoint(&self, c: &Vec4) -> i128 {
        let a = &self.adjugate;
        let mut s = 0i128;
        for i in 0..4 {
            for j in 0..4 {
                s += a[i][j] as i128 * c[i] as i128 * c[j] as i128;
            }
        }
        s
    }

    /// ∇F(x) = 2Ax.
    pub fn gradient(&self, x: &Vec4) -> [i128; 4] {
        let mut g = [0i128; 4];
        for i in 0..4 {
            for j in 0..4 {
                g[i] += 2 * self.gram[i][j] as i128 * x[j] as i128;
            }
        }
        g
    }

    pub fn gradient_f64(&self, x: &[f64; 4]) -> [f64; 4] {
        let mut g = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                g[i] += 2.0 * self.gram[i][j] as f64 * x[j];
            }
        }
        g
    }

    /// ψ_F(n) = (4Δ/n).
    pub fn psi(&self, n: i64) -> i8 {
        kronecker(4 * self.disc, n)
    }

    pub fn real_components(&self) -> RealComponentInfo {
        if self.disc > 0 {
            return RealComponentInfo { count: 1, separator: None };
        }
        let m = Matrix4::from_fn(|i, j| self.gram[i][j] as f64);
        let eig = SymmetricEigen::new(m);
        let (pos, _) = self.signature;
        // the eigenvalue whose sign occurs once
        let want_positive = pos == 1;
        let idx = (0..4)
            .find(|&i| (eig.eigenvalues[i] > 0.0) == want_positive)
            .expect("signature has a unique-sign eigenvalue");
        let col = eig.eigenvectors.column(idx);
        let mut v = [col[0], col[1], col[2], col[3]];
        // fix the orientation: largest coordinate positive
        let k = (0..4).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
        if v[k] < 0.0 {
            v = v.map(|t| -t);
        }
        RealComponentInfo { count: 2, separator: Some(v) }
    }

    /// First primitive zero in shells |x|∞ = 1, 2, …, bound, each scanned
    /// lexicographically with coordinates running from +r down to −r, and the
    /// tangent form ∇F(x₀)·X divided by its content.
    pub fn find_point_and_tangent(&self, bound: i64) -> Result<(Vec4, Vec4)> {
        for r in 1..=bound {
            let vals: Vec<i64> = (-r..=r).rev().collect();
            for &a in &vals {
                for &b in &vals {
                    for &c in &vals {
                        for &d in &vals {
                            let x = [a, b, c, d];
                            if x.iter().map(|v| v.abs()).max() != Some(r) {
                                continue;
                            }
                            if self.eval(&x) == 0 && content(&x) == 1 {
                                return Ok((x, self.tangent_form(&x)));
                            }
                        }
                    }
                }
            }
        }
        Err(Error::NotFound(bound))
    }

    /// ∇F(x)·X with content removed.
    pub fn tangent_form(&self, x: &Vec4) -> Vec4 {
        let g = self.gradient(x);
        let c = g.iter().fold(0i128, |acc, &v| arith::gcd(acc, v));
        g.map(|v| (v / c) as i64)
    }
}

pub(crate) fn mulmod_i(a: i128, b: i128, m: i128) -> i128 {
    if let Some(p) = a.checked_mul(b) {
        return arith::modp(p, m);
    }
    // double-and-add for moduli near the i128 range
    let (mut a, mut b) = (arith::modp(a, m), arith::modp(b, m));
    let mut r = 0i128;
    while b > 0 {
        if b & 1 == 1 {
            r = arith::modp(r + a, m);
        }
        a = arith::modp(a + a, m);
        b >>= 1;
    }
    r
}

pub fn dot(a: &Vec4, b: &Vec4) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: [i64; 4]) -> Result<QuadraticForm> {
        QuadraticForm::from_upper_triangle([d[0], 0, 0, 0, d[1], 0, 0, d[2], 0, d[3]])
    }

    #[test]
    fn invariants() {
        let f = diag([1, 1, 1, -1]).unwrap();
        assert_eq!(f.disc(), -1);
        assert_eq!(f.signature(), (3, 1));
        assert_eq!(f.conductor(), 4);
        assert_eq!(f.adjugate(), &[[-1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]]);
        let g = diag([1, 1, -1, -3]).unwrap();
        assert_eq!((g.disc(), g.signature(), g.conductor()), (3, (2, 2), 12));
    }

    #[test]
    fn rejects() {
        assert_eq!(diag([1, 1, 1, 1]), Err(Error::NotIsotropic));
        assert_eq!(diag([1, 1, -1, -1]), Err(Error::SquareDiscriminant(1)));
        assert_eq!(diag([1, 0, 1, -1]), Err(Error::Singular));
        let mut m = [[0i64; 4]; 4];
        m[0][1] = 1;
        assert_eq!(QuadraticForm::from_gram(m), Err(Error::NotSymmetric));
        assert_eq!(
            QuadraticForm::from_polynomial([1, 1, 0, 0, 1, 0, 0, 1, 0, -1]),
            Err(Error::OddCrossTerm(0, 1))
        );
    }

    #[test]
    fn psi_values() {
        let f = diag([1, 1, 1, -1]).unwrap();
        assert_eq!((f.psi(5), f.psi(7), f.psi(2)), (1, -1, 0));
    }

    #[test]
    fn components() {
        let f = diag([1, 1, 1, -1]).unwrap();
        let rc = f.real_components();
        assert_eq!(rc.count, 2);
        let v = rc.separator.unwrap();
        assert!((v[3] - 1.0).abs() < 1e-12);
        assert_ne!(rc.component_of(&[1.0, 0.0, 0.0, 1.0]), rc.component_of(&[1.0, 0.0, 0.0, -1.0]));
        assert_eq!(diag([1, 1, -1, -3]).unwrap().real_components().count, 1);
    }

    #[test]
    fn point_and_tangent() {
        let f = diag([1, 1, 1, -1]).unwrap();
        let (x, g) = f.find_point_and_tangent(2).unwrap();
        assert_eq!(x, [1, 0, 0, 1]);
        assert_eq!(g, [1, 0, 0, -1]);
        assert_eq!(dot(&g, &x), 0);
        let f2 = diag([1, 1, -1, -3]).unwrap();
        let (y, h) = f2.find_point_and_tangent(2).unwrap();
        assert_eq!(f2.eval(&y), 0);
        assert_eq!(dot(&h, &y), 0);
    }
}
