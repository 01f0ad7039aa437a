use conecount_core::arith::content;
use conecount_core::quadform::dot;
use conecount_core::{Error, QuadraticForm};
use proptest::prelude::*;

const FORMS: [[i64; 10]; 4] = [
    [1, 0, 0, 0, 1, 0, 0, 1, 0, -1],
    [1, 0, 0, 0, 1, 0, 0, -1, 0, -3],
    [2, 1, 0, 0, 2, 0, 0, 1, 0, -1],
    [0, 1, 1, 1, 0, 1, 1, 0, 1, 0],
];

fn forms() -> Vec<QuadraticForm> {
    FORMS.iter().map(|u| QuadraticForm::from_upper_triangle(*u).unwrap()).collect()
}

/// Determinant by cofactor expansion over permutations.
fn det_oracle(a: &[[i64; 4]; 4]) -> i128 {
    let mut total = 0i128;
    let idx = [0usize, 1, 2, 3];
    for p0 in idx {
        for p1 in idx.iter().copied().filter(|&v| v != p0) {
            for p2 in idx.iter().copied().filter(|&v| v != p0 && v != p1) {
                let p3 = 6 - p0 - p1 - p2;
                let perm = [p0, p1, p2, p3];
                let inversions = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
                let sign = if inversions % 2 == 0 { 1 } else { -1 };
                total += sign * (0..4).map(|i| a[i][perm[i]] as i128).product::<i128>();
            }
        }
    }
    total
}

#[test]
fn invariants_of_examples() {
    let f = forms();
    assert_eq!(f[0].disc(), -1);
    assert_eq!(f[0].conductor(), 4);
    assert_eq!(f[0].signature(), (3, 1));
    assert_eq!(f[0].real_components().count, 2);
    assert_eq!(f[1].disc(), 3);
    assert_eq!(f[1].conductor(), 12);
    assert_eq!(f[1].signature(), (2, 2));
    assert_eq!(f[1].real_components().count, 1);
    assert_eq!(f[3].disc(), -3);
    assert_eq!(f[3].conductor(), 3);
    assert_eq!(f[3].psi(2), 0);
    assert_eq!(f[3].psi(5), -1);
    assert_eq!(f[3].psi(7), 1);
}

#[test]
fn rejects_degenerate_input() {
    let mut g = [[0i64; 4]; 4];
    g[0][1] = 1;
    assert!(matches!(QuadraticForm::from_gram(g), Err(Error::NotSymmetric)));
    assert!(matches!(QuadraticForm::from_upper_triangle([1, 0, 0, 0, 1, 0, 0, 1, 0, 0]), Err(Error::Singular)));
    assert!(matches!(QuadraticForm::from_upper_triangle([1, 0, 0, 0, 1, 0, 0, 1, 0, 1]), Err(Error::NotIsotropic)));
    assert!(matches!(
        QuadraticForm::from_upper_triangle([1, 0, 0, 0, 1, 0, 0, -1, 0, -1]),
        Err(Error::SquareDiscriminant(1))
    ));
    assert!(matches!(QuadraticForm::from_polynomial([1, 1, 0, 0, 1, 0, 0, 1, 0, -1]), Err(Error::OddCrossTerm(0, 1))));
    let doubled = QuadraticForm::scale_polynomial_by_two([1, 1, 0, 0, 1, 0, 0, 1, 0, -1]);
    let f = QuadraticForm::from_polynomial(doubled).unwrap();
    assert_eq!(f.eval(&[1, 1, 0, 0]), 2 * 3);
}

#[test]
fn adjugate_inverts_gram() {
    for f in forms() {
        assert_eq!(f.disc() as i128, det_oracle(f.gram()));
        let (a, adj) = (f.gram(), f.adjugate());
        for i in 0..4 {
            for j in 0..4 {
                let s: i128 = (0..4).map(|k| a[i][k] as i128 * adj[k][j] as i128).sum();
                assert_eq!(s, if i == j { f.disc() as i128 } else { 0 });
            }
        }
        let back = QuadraticForm::from_upper_triangle(f.upper_triangle()).unwrap();
        assert_eq!(back, f);
    }
}

#[test]
fn base_point_and_tangent() {
    for f in forms() {
        let (x, t) = f.find_point_and_tangent(10).unwrap();
        assert_eq!(f.eval(&x), 0);
        assert_eq!(content(&x), 1);
        assert_eq!(content(&t), 1);
        // the tangent hyperplane contains its point of tangency
        assert_eq!(dot(&t, &x), 0);
    }
}

proptest! {
    #[test]
    fn eval_agrees_across_representations(
        i in 0usize..4,
        x in prop::array::uniform4(-10_000i64..10_000),
        m in 2i128..10_000,
    ) {
        let f = &forms()[i];
        let v = f.eval(&x);
        let xi = x.map(|c| c as i128);
        prop_assert_eq!(f.eval_mod(&xi, m), v.rem_euclid(m));
        prop_assert_eq!(f.eval_wrapping(&xi), v);
        let xf = x.map(|c| c as f64);
        prop_assert!((f.eval_f64(&xf) - v as f64).abs() <= 1e-9 * (1.0 + v.abs() as f64) + 1e-6);
        // Euler: ∇F(x)·x = 2F(x)
        let g = f.gradient(&x);
        prop_assert_eq!((0..4).map(|k| g[k] * x[k] as i128).sum::<i128>(), 2 * v);
    }

    #[test]
    fn polarization(i in 0usize..4, x in prop::array::uniform4(-300i64..300), y in prop::array::uniform4(-300i64..300)) {
        let f = &forms()[i];
        let s = [x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]];
        let g = f.gradient(&x);
        let bxy: i128 = (0..4).map(|k| g[k] * y[k] as i128).sum();
        prop_assert_eq!(f.eval(&s), f.eval(&x) + f.eval(&y) + bxy);
    }

    #[test]
    fn adjoint_of_gradient(i in 0usize..4, x in prop::array::uniform4(-200i64..200)) {
        // F*(Ax) = Δ F(x), so F*(∇F(x)) = 4Δ F(x)
        let f = &forms()[i];
        let g = f.gradient(&x).map(|v| v as i64);
        prop_assert_eq!(f.eval_adjoint(&g), 4 * f.disc() as i128 * f.eval(&x));
    }

    #[test]
    fn components_swap_under_negation(x in prop::array::uniform4(-1.0f64..1.0)) {
        let info = forms()[0].real_components();
        let s = info.separator.unwrap();
        let d: f64 = s.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assume!(d.abs() > 1e-9);
        let neg = x.map(|v| -v);
        prop_assert_ne!(info.component_of(&x), info.component_of(&neg));
    }
}
