use conecount_core::lattice::WeightFunction;
use conecount_core::singint::{leray_slab, leray_surface, slab_values};
use conecount_core::QuadraticForm;

fn form1() -> QuadraticForm {
    QuadraticForm::from_upper_triangle([1, 0, 0, 0, 1, 0, 0, 1, 0, -1]).unwrap()
}

fn sheet_bump(scale: f64) -> WeightFunction {
    let f = form1();
    WeightFunction::bump([0.6 * scale, 0.0, 0.8 * scale, 1.0 * scale], 0.5 * scale)
        .unwrap()
        .on_component(&f.real_components(), 0)
        .unwrap()
}

#[test]
fn surface_positive_and_grid_stable() {
    let f = form1();
    let w = sheet_bump(1.0);
    let a = leray_surface(&f, &w, 32).unwrap();
    let b = leray_surface(&f, &w, 64).unwrap();
    println!("{a:?}\n{b:?}");
    assert!(a.value > 0.0);
    assert!((a.value - b.value).abs() < 0.01 * b.value);
}

#[test]
fn surface_scaling_law() {
    let f = form1();
    let base = leray_surface(&f, &sheet_bump(1.0), 48).unwrap();
    for s in [2.0, 3.0] {
        let r = leray_surface(&f, &sheet_bump(s), 48).unwrap();
        let err = s * s * base.est_error + r.est_error + 1e-9 * r.value;
        assert!((r.value - s * s * base.value).abs() <= err.max(1e-9 * r.value), "s = {s}");
    }
}

#[test]
fn slab_agrees_with_surface() {
    let f = form1();
    let w = sheet_bump(1.0);
    let surf = leray_surface(&f, &w, 64).unwrap();
    let slab = leray_slab(&f, &w, &[0.04, 0.02, 0.01], 40_000, 7).unwrap();
    println!("{surf:?}\n{slab:?}");
    assert!((surf.value - slab.value).abs() < 0.01 * surf.value);
}

#[test]
fn slab_bias_is_linear() {
    let f = form1();
    let w = sheet_bump(1.0);
    let truth = leray_surface(&f, &w, 64).unwrap().value;
    let v = slab_values(&f, &w, &[0.08, 0.04], 40_000, 3).unwrap();
    let ratio = (v[0] - truth) / (v[1] - truth);
    println!("bias ratio {ratio}");
    assert!(ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5);
}
