use conecount_core::arith::{euler_phi, gcd};
use conecount_core::expsums::CongruenceData;
use conecount_core::lattice::classes_mod;
use conecount_core::localdens::*;
use conecount_core::quadform::Vec4;
use conecount_core::QuadraticForm;
use num_rational::Ratio;
use proptest::prelude::*;

fn form1() -> QuadraticForm {
    QuadraticForm::from_upper_triangle([1, 0, 0, 0, 1, 0, 0, 1, 0, -1]).unwrap()
}

fn form2() -> QuadraticForm {
    QuadraticForm::from_upper_triangle([1, 0, 0, 0, 1, 0, 0, -1, 0, -3]).unwrap()
}

/// Solutions mod p^k counted by visiting all of (ℤ/p^k)⁴.
fn count_oracle(f: &QuadraticForm, p: u64, k: u32, cong: &CongruenceData) -> u64 {
    let m = p.pow(k) as i64;
    let l = cong.modulus() as i64;
    let pe = gcd(l as i128, m as i128) as i64;
    let gamma = cong.gamma();
    let mut n = 0;
    for idx in 0..m.pow(4) {
        let v: Vec4 = [idx % m, (idx / m) % m, (idx / (m * m)) % m, idx / (m * m * m)];
        if f.eval(&v).rem_euclid(m as i128) != 0 {
            continue;
        }
        let ok = if pe > 1 {
            (0..4).all(|i| (v[i] - gamma[i]).rem_euclid(pe) == 0)
        } else {
            v.iter().any(|&x| x % p as i64 != 0)
        };
        n += u64::from(ok);
    }
    n
}

#[test]
fn primitive_count_matches_oracle() {
    let trivial = CongruenceData::trivial();
    for f in [form1(), form2()] {
        for (p, k) in [(2u64, 1u32), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (5, 2), (7, 1)] {
            assert_eq!(primitive_count(&f, p, k, &trivial), count_oracle(&f, p, k, &trivial), "p^k = {p}^{k}");
        }
        for l in [2u64, 4, 3] {
            for gamma in classes_mod(&f, l) {
                let cong = CongruenceData::new(&f, l, gamma).unwrap();
                let p: u64 = if l == 3 { 3 } else { 2 };
                for k in 1..=3u32 {
                    if p.pow(k) > 9 {
                        continue;
                    }
                    assert_eq!(primitive_count(&f, p, k, &cong), count_oracle(&f, p, k, &cong), "L = {l}, {gamma:?}");
                }
            }
        }
    }
}

#[test]
fn classes_partition_primitive_solutions() {
    let f = form1();
    let trivial = CongruenceData::trivial();
    for k in 2..=5u32 {
        let total: u64 = classes_mod(&f, 4)
            .into_iter()
            .map(|g| primitive_count(&f, 2, k, &CongruenceData::new(&f, 4, g).unwrap()))
            .sum();
        assert_eq!(total, primitive_count(&f, 2, k, &trivial), "k = {k}");
    }
}

#[test]
fn good_prime_counts() {
    // a nonsingular quaternary quadric mod p has p³ + ψ(p)(p² − p) zeros
    for f in [form1(), form2()] {
        for p in [5u64, 7, 11, 13] {
            let psi = f.psi(p as i64) as i64;
            let p_i = p as i64;
            assert_eq!(full_count(&f, p, 1) as i64, p_i.pow(3) + psi * (p_i * p_i - p_i));
            let (_, prim) = closed_form_density(&f, p);
            let trivial = CongruenceData::trivial();
            for k in 1..=2u32 {
                let r = Ratio::new(primitive_count(&f, p, k, &trivial) as i128, (p as i128).pow(3 * k));
                assert_eq!(r, prim, "p = {p}, k = {k}");
            }
        }
    }
}

#[test]
fn bad_prime_density_stabilizes_at_raw_count() {
    let f = form1();
    for gamma in classes_mod(&f, 4) {
        let cong = CongruenceData::new(&f, 4, gamma).unwrap();
        match sigma_p(&f, 2, &cong, MAX_K) {
            Ok(d) => {
                assert_eq!(d.method, DensityMethod::RawCount);
                let k = d.stabilized_at + 1;
                let r = Ratio::new(primitive_count(&f, 2, k, &cong) as i128, 1i128 << (3 * k));
                assert_eq!(r, d.value);
                assert_eq!(d.value, d.primitive_value);
            }
            Err(conecount_core::Error::Insoluble(2)) => {
                assert_eq!(primitive_count(&f, 2, 6, &cong), 0);
            }
            Err(e) => panic!("{e}"),
        }
    }
    let cong = CongruenceData::new(&f, 4, [1, 0, 0, 1]).unwrap();
    assert!(sigma_p(&f, 2, &cong, 3).is_err());
    assert_eq!(sigma_p(&f, 5, &cong, MAX_K).unwrap().method, DensityMethod::ClosedForm);
    assert_eq!(bad_primes(&form2(), 4), vec![2, 3]);
}

#[test]
fn measures_are_consistent() {
    let f = form1();
    let cong = CongruenceData::new(&f, 4, [1, 0, 0, 1]).unwrap();
    let m = measures(&f, &cong, 1e-3, 2000).unwrap();
    assert!((m.tamagawa_v - euler_phi(4) as f64 * m.omega_f).abs() < 1e-15);
    let (prod, tail) = tamagawa_by_product(&f, &cong, 2000).unwrap();
    assert!((prod - m.tamagawa_v).abs() <= tail + m.tail_bound + 1e-12);
    assert!(m.diagnostic.is_none());
    // raising the truncation moves the value by less than the bound
    let s1 = singular_series_w(&f, &cong, 1e-3, 500).unwrap();
    let s2 = singular_series_w(&f, &cong, 1e-3, 5000).unwrap();
    assert!((s1.value - s2.value).abs() <= s1.tail_bound);
    assert!(s2.warning.is_none());
}

#[test]
fn bias_ratio_and_local_factors() {
    let f = form1();
    let catalan = 0.915_965_594_177_219_015;
    let l2 = 0.75 * std::f64::consts::PI.powi(2) / 6.0;
    assert!((bias_ratio(&f, 4).unwrap() - catalan / l2).abs() < 1e-10);
    assert!(artin_local_factor(&f, 2, 2.0).is_err());
    let x: f64 = 1.0 / 25.0;
    let psi = f.psi(5) as f64;
    assert!((artin_local_factor(&f, 5, 2.0).unwrap() - 1.0 / ((1.0 - psi * x) * (1.0 - x))).abs() < 1e-15);
}

proptest! {
    #[test]
    fn unit_scaling_preserves_counts(gi in 0usize..64, d in 1i64..64, k in 3u32..6) {
        prop_assume!(d % 2 == 1);
        let f = form1();
        let classes = classes_mod(&f, 8);
        let cong = CongruenceData::new(&f, 8, classes[gi % classes.len()]).unwrap();
        let scaled = cong.scaled(&f, d).unwrap();
        prop_assert_eq!(primitive_count(&f, 2, k, &cong), primitive_count(&f, 2, k, &scaled));
    }
}
