//! Experiment drivers: empirical counts against predicted constants.

use crate::config::{ExperimentConfig, ExperimentKind, Setup};
use crate::identities;
use crate::report::{Report, Row};
use crate::HarnessError;
use conecount_core::arith::gcd;
use conecount_core::brauer::{self, UnobstructedBase};
use conecount_core::expsums::CongruenceData;
use conecount_core::lattice::{count_v, count_w, count_wo, enumerate_solutions, EnumRequest, PrimitiveMode};
use conecount_core::localdens::{bias_ratio, measures, tamagawa_by_product};
use conecount_core::singint::{leray_slab, leray_surface};
use conecount_core::QuadraticForm;
use std::collections::BTreeMap;
use std::time::Instant;

/// Slab widths for the cross-check of the singular integral.
pub const SLAB_SCHEDULE: [f64; 3] = [0.04, 0.02, 0.01];
pub const SLAB_SAMPLES: usize = 40_000;

/// Predicted constants shared by the experiments.
#[derive(Debug, Clone)]
pub struct Constants {
    pub leray: f64,
    pub leray_err: f64,
    pub series_w: f64,
    pub omega_f: f64,
    pub tamagawa_v: f64,
    /// Ξ on the weight's component, if it has one.
    pub xi: Option<u8>,
    /// 𝕃(2, ψχ₀[L])/𝕃(2, χ₀[L]) when the conductor divides L.
    pub bias_r: Option<f64>,
    pub map: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

/// Point and tangent form used for the evaluation map.
pub fn base_point(f: &QuadraticForm) -> Result<([i64; 4], [i64; 4]), HarnessError> {
    Ok(f.find_point_and_tangent(20)?)
}

pub fn constants(cfg: &ExperimentConfig, s: &Setup) -> Result<Constants, HarnessError> {
    let f = &s.form;
    let surf = leray_surface(f, &s.weight, cfg.tolerances.leray_grid)?;
    let slab = leray_slab(f, &s.weight, &SLAB_SCHEDULE, SLAB_SAMPLES, cfg.seed)?;
    let dens = measures(f, &s.class, cfg.tolerances.series, cfg.p_max)?;
    let (product, _) = tamagawa_by_product(f, &s.class, cfg.p_max)?;
    let (_, g) = base_point(f)?;
    let xi = match s.weight.component() {
        Some(c) => Some(brauer::xi_density(f, &g, &s.class, c)?),
        None => None,
    };
    let bias_r = if cfg.l % f.conductor() == 0 { Some(bias_ratio(f, cfg.l)?) } else { None };
    let mut map = BTreeMap::new();
    map.insert("I".into(), surf.value);
    map.insert("I_err".into(), surf.est_error);
    map.insert("I_slab".into(), slab.value);
    map.insert("I_slab_err".into(), slab.est_error);
    map.insert("series_w".into(), dens.series_w);
    map.insert("omega_f".into(), dens.omega_f);
    map.insert("tamagawa_v".into(), dens.tamagawa_v);
    map.insert("tamagawa_v_product".into(), product);
    map.insert("series_tail".into(), dens.tail_bound);
    for (k, v) in &dens.l_values {
        map.insert(k.clone(), *v);
    }
    if let Some(x) = xi {
        map.insert("xi".into(), x as f64);
    }
    if let Some(r) = bias_r {
        map.insert("r".into(), r);
    }
    let mut warnings = dens.warnings.clone();
    warnings.extend(dens.diagnostic.clone());
    warnings.extend(slab.warning.clone());
    if (surf.value - slab.value).abs() > 0.01 * surf.value.abs() {
        warnings.push(format!("surface {} and slab {} estimates differ by more than 1%", surf.value, slab.value));
    }
    Ok(Constants {
        leray: surf.value,
        leray_err: surf.est_error,
        series_w: dens.series_w,
        omega_f: dens.omega_f,
        tamagawa_v: dens.tamagawa_v,
        xi,
        bias_r,
        map,
        warnings,
    })
}

fn gamma_label(g: &[i64; 4]) -> String {
    format!("{} {} {} {}", g[0], g[1], g[2], g[3])
}

fn row(kind: &str, b: f64, class: &CongruenceData, psi: i8, empirical: f64, predicted: f64, xi: Option<u8>, t: Instant) -> Row {
    Row {
        experiment: kind.to_string(),
        b,
        l: class.modulus(),
        gamma: gamma_label(&class.gamma()),
        psi,
        empirical,
        predicted,
        ratio: Row::ratio_of(empirical, predicted),
        xi,
        runtime_ms: t.elapsed().as_millis() as u64,
    }
}

/// Windowed verdict at the largest B plus improvement over the schedule.
fn window_verdicts(report: &mut Report, window: f64) {
    let (Some(first), Some(last)) = (report.rows.first(), report.rows.last()) else { return };
    let (r0, r1) = (first.ratio, last.ratio);
    let (b0, b1) = (first.b, last.b);
    report.verdict(
        "leading constant",
        (r1 - 1.0).abs() <= window,
        format!("ratio {r1:.5} at B = {b1}, window ±{window}"),
    );
    if report.rows.len() > 1 {
        report.verdict(
            "improves with B",
            (r1 - 1.0).abs() <= (r0 - 1.0).abs(),
            format!("|ratio - 1|: {:.5} at B = {b0}, {:.5} at B = {b1}", (r0 - 1.0).abs(), (r1 - 1.0).abs()),
        );
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let setup = cfg.validate()?;
    match cfg.kind {
        ExperimentKind::Hlwo => hlwo(cfg, &setup),
        ExperimentKind::Tamagawa => tamagawa(cfg, &setup),
        ExperimentKind::Bias => bias(cfg, &setup),
        ExperimentKind::ObstructionScan => obstruction_scan(cfg, &setup),
        ExperimentKind::Identities => Ok(identities_report(cfg.seed)),
    }
}

fn with_constants(kind: ExperimentKind, k: &Constants) -> Report {
    let mut report = Report::new(kind.name());
    report.constants = k.map.clone();
    report.warnings = k.warnings.clone();
    report
}

/// 𝒩_{𝒲°} against Ξ·ℐ·ω_f·B².
pub fn hlwo(cfg: &ExperimentConfig, s: &Setup) -> Result<Report, HarnessError> {
    let k = constants(cfg, s)?;
    let xi = k.xi.expect("component checked in validation");
    let mut report = with_constants(ExperimentKind::Hlwo, &k);
    for &b in &cfg.b_schedule {
        let t = Instant::now();
        let n = count_wo(&s.form, &s.weight, b, &s.class, PrimitiveMode::Direct)?;
        let pred = xi as f64 * k.leray * k.omega_f * b * b;
        report.rows.push(row("hlwo", b, &s.class, 1, n.weighted_sum, pred, Some(xi), t));
    }
    if xi == 0 {
        let zero = report.rows.iter().all(|r| r.empirical == 0.0);
        report.verdict("obstructed class is empty", zero, "Xi = 0 predicts no primitive points");
    } else {
        window_verdicts(&mut report, cfg.tolerances.ratio_window);
    }
    Ok(report)
}

/// 𝒩_V against ½ℐ·𝔖_V·B².
pub fn tamagawa(cfg: &ExperimentConfig, s: &Setup) -> Result<Report, HarnessError> {
    let k = constants(cfg, s)?;
    let mut report = with_constants(ExperimentKind::Tamagawa, &k);
    for &b in &cfg.b_schedule {
        let t = Instant::now();
        let n = count_v(&s.form, &s.weight, b, &s.class)?;
        let pred = 0.5 * k.leray * k.tamagawa_v * b * b;
        report.rows.push(row("tamagawa", b, &s.class, 1, n.weighted_sum, pred, None, t));
    }
    window_verdicts(&mut report, cfg.tolerances.ratio_window);
    Ok(report)
}

/// First unit γ mod L with ψ_F(γ) = −1.
pub fn twisting_unit(f: &QuadraticForm, l: u64) -> Option<i64> {
    (1..l as i64).find(|&g| gcd(g as i128, l as i128) == 1 && f.psi(g) == -1)
}

/// 𝒩_𝒲 on Γ and on γΓ with ψ_F(γ) = −1: each against ℐ𝔖̃(1 ± r)B², and
/// their quotient against (1 + r)/(1 − r).
pub fn bias(cfg: &ExperimentConfig, s: &Setup) -> Result<Report, HarnessError> {
    let k = constants(cfg, s)?;
    let f = &s.form;
    let r = k.bias_r.expect("conductor checked in validation");
    let xi = k.xi.expect("component checked in validation");
    // the sign of the secondary term follows Ξ of the base class
    let r = if xi == 2 { r } else { -r };
    let gamma = twisting_unit(f, cfg.l)
        .ok_or_else(|| HarnessError::Config { field: "L".into(), message: "no unit with psi = -1".into() })?;
    let twisted = s.class.scaled(f, gamma)?;
    let mut report = with_constants(ExperimentKind::Bias, &k);
    let predicted_ratio = (1.0 + r) / (1.0 - r);
    let mut last = None;
    for &b in &cfg.b_schedule {
        let main = k.leray * k.series_w * b * b;
        let t = Instant::now();
        let plus = count_w(f, &s.weight, b, &s.class).weighted_sum;
        report.rows.push(row("bias", b, &s.class, 1, plus, main * (1.0 + r), Some(xi), t));
        let t = Instant::now();
        let minus = count_w(f, &s.weight, b, &twisted).weighted_sum;
        report.rows.push(row("bias", b, &twisted, -1, minus, main * (1.0 - r), Some(2 - xi), t));
        let t = Instant::now();
        let mut q = row("bias", b, &s.class, 0, plus / minus, predicted_ratio, None, t);
        q.gamma = format!("ratio 1:{gamma}");
        report.rows.push(q.clone());
        last = Some(q);
    }
    if let Some(q) = last {
        report.verdict(
            "class ratio",
            (q.ratio - 1.0).abs() <= cfg.tolerances.bias_window,
            format!("empirical {:.5} vs (1+r)/(1-r) = {predicted_ratio:.5} at B = {}", q.empirical, q.b),
        );
    }
    Ok(report)
}

/// Primitive zeros with |x|∞ ≤ B in one class, on one real component.
pub fn primitive_points_in_box(f: &QuadraticForm, class: &CongruenceData, b: i64, component: usize) -> u64 {
    let info = f.real_components();
    let mut lo = [-b; 4];
    let mut hi = [b; 4];
    let sep = info.separator;
    if let Some(v) = sep {
        // a coordinate separator lets the box be halved up front
        let axis: Vec<usize> = (0..4).filter(|&i| v[i] != 0.0).collect();
        if axis.len() == 1 {
            let i = axis[0];
            if (v[i] > 0.0) == (component == 0) {
                lo[i] = 0;
            } else {
                hi[i] = 0;
            }
        }
    }
    let req = EnumRequest {
        form: f,
        lo,
        hi,
        class: (class.modulus() > 1).then_some(class),
        primitive: true,
        component: sep.map(|v| (v, component)),
    };
    enumerate_solutions(&req, None, || 0u64, |n, _| *n += 1, |a, b| a + b)
}

/// For every unit γ mod L: ψ_F(γ), Ξ of γΓ on the component, and the
/// exhaustive primitive count to the largest B.
pub fn obstruction_scan(cfg: &ExperimentConfig, s: &Setup) -> Result<Report, HarnessError> {
    let f = &s.form;
    let component = s.weight.component().expect("component checked in validation");
    let (_, g) = base_point(f)?;
    let b = *cfg.b_schedule.last().expect("validated") as i64;
    let base_xi = brauer::xi_density(f, &g, &s.class, component)?;
    let mut report = Report::new(ExperimentKind::ObstructionScan.name());
    report.constants.insert("xi_base".into(), base_xi as f64);
    let base = if base_xi == 2 { Some(UnobstructedBase::from_brauer(f, &g, &s.class, component)?) } else { None };
    let mut agree = true;
    let mut empty = true;
    for gamma in (1..cfg.l as i64).filter(|&x| gcd(x as i128, cfg.l as i128) == 1) {
        let t = Instant::now();
        let class = s.class.scaled(f, gamma)?;
        let xi = brauer::xi_density(f, &g, &class, component)?;
        let psi = f.psi(gamma);
        if let Some(base) = &base {
            let obstructed = brauer::obstructed_by_character(f, base, gamma)?;
            agree &= obstructed == (xi == 0);
        }
        let n = primitive_points_in_box(f, &class, b, component);
        if xi == 0 && n != 0 {
            empty = false;
        }
        report.rows.push(row("obstruction-scan", b as f64, &class, psi, n as f64, 0.0, Some(xi), t));
    }
    if base.is_some() {
        report.verdict("psi decides the obstruction", agree, "Xi = 0 exactly when psi(gamma) = -1");
    }
    report.verdict("obstructed classes are empty", empty, format!("no primitive points with |x| <= {b} where Xi = 0"));
    Ok(report)
}

/// The exact identity suites at their acceptance ranges, as a report.
pub fn identities_report(seed: u64) -> Report {
    let mut report = Report::new(ExperimentKind::Identities.name());
    let mut suites = Vec::new();
    for f in identities::test_forms() {
        suites.push(identities::exact_sum_suite(&f, 12, 4, 2, 3));
        suites.push(identities::closed_form_suite(&f, 60));
        suites.push(identities::flipping_suite(&f, 50, seed));
        suites.push(identities::density_suite(&f, &[1, 4, 12], 13));
        suites.push(identities::measure_suite(&f, f.conductor(), &[2, 3], 1e-3, 2000));
    }
    suites.push(identities::hilbert_suite(500, 100, seed));
    for s in suites {
        let detail = if s.passed() {
            format!("{} checks in {} ms", s.checked, s.elapsed_ms)
        } else {
            format!("{} of {} failed: {}", s.failed, s.checked, s.messages.join("; "))
        };
        report.verdict(&s.name, s.passed(), detail);
    }
    report
}
