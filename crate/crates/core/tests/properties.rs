mod common;

use common::{clear_of_surfaces, jacobian_fd_error, presets, root_mismatch};
use glioma_core::equilibria::{
    cardano_cubic_roots, glioma_free_equilibrium, polynomial_root_oracle, positive_quadratic_root,
    CubicCoefficients, VALID_RESIDUAL,
};
use glioma_core::model::{rhs, rhs_with, Switching};
use glioma_core::stability::eigenvalues;
use glioma_core::{NondimParams, State};
use nalgebra::SMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn state(max: f64) -> impl Strategy<Value = State> {
    prop::array::uniform7(0.0..=max).prop_map(State::from_array)
}

fn preset() -> impl Strategy<Value = NondimParams> {
    (0usize..2).prop_map(|k| presets()[k])
}

proptest! {
    #[test]
    fn rhs_is_finite_on_the_nonnegative_orthant(s in state(5.0), p in preset(), eps in 0.0..1e-2) {
        prop_assert!(rhs(&s, &p).is_finite());
        prop_assert!(rhs_with(&s, &p, Switching::from_smoothing(eps)).is_finite());
    }

    #[test]
    fn boundary_faces_are_not_left(s in state(2.0), p in preset(), face in 0usize..7) {
        let mut a = s.to_array();
        a[face] = 0.0;
        let d = rhs(&State::from_array(a), &p).to_array();
        prop_assert!(d[face] >= 0.0, "component {} has rate {}", face, d[face]);
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences(s in state(2.0), p in preset()) {
        prop_assume!(clear_of_surfaces(&s, &p));
        let err = jacobian_fd_error(&s, &p);
        prop_assert!(err <= 1e-6, "relative error {:e}", err);
    }

    #[test]
    fn narrow_smoothing_agrees_with_sharp_switches_off_the_surfaces(s in state(2.0), p in preset()) {
        prop_assume!(clear_of_surfaces(&s, &p));
        let sharp = rhs(&s, &p);
        let smooth = rhs_with(&s, &p, Switching::Smooth(1e-9));
        prop_assert!(sharp.distance(&smooth) <= 1e-12 * sharp.max_abs().max(1.0));
    }

    #[test]
    fn spectrum_is_closed_under_conjugation(entries in prop::array::uniform32(-1.0f64..1.0), tail in prop::array::uniform17(-1.0f64..1.0)) {
        let data: Vec<f64> = entries.iter().chain(tail.iter()).copied().collect();
        let m = SMatrix::<f64, 7, 7>::from_row_slice(&data);
        let eig = eigenvalues(&m).unwrap();
        prop_assert_eq!(eig.len(), 7);
        for z in &eig {
            prop_assert!(eig.iter().any(|w| *w == z.conj()), "{} lacks its conjugate", z);
        }
        let trace: f64 = (0..7).map(|i| m[(i, i)]).sum();
        let sum: Complex64 = eig.iter().sum();
        prop_assert!((sum.re - trace).abs() < 1e-10 && sum.im.abs() < 1e-10);
    }

    #[test]
    fn glioma_free_equilibrium_survives_parameter_jitter(scale in prop::array::uniform4(0.9f64..1.1)) {
        let mut p = NondimParams::glioma_free();
        p.p1 *= scale[0];
        p.p4 *= scale[1];
        p.phi *= scale[2];
        p.delta *= scale[3];
        let e1 = glioma_free_equilibrium(&p).unwrap();
        prop_assert!(e1.exists);
        prop_assert!(e1.residual < VALID_RESIDUAL, "residual {:e}", e1.residual);
        prop_assert!(e1.point.validate().is_ok());
        prop_assert_eq!(e1.point.g2, 0.0);
        prop_assert_eq!(e1.point.g3, 0.0);
    }

    #[test]
    fn parameter_keys_round_trip(value in 0.0f64..10.0, key in prop::sample::select(NondimParams::<f64>::KEYS)) {
        let mut p = NondimParams::glioma_free();
        p.set(key, value).unwrap();
        prop_assert_eq!(p.get(key), Some(value));
    }
}

const DRAWS: usize = 1000;

#[test]
fn quadratic_root_agrees_with_companion_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut compared = 0;
    for _ in 0..DRAWS {
        let (mut a, mut b, mut c): (f64, f64, f64) = (
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
        );
        if a < 0.0 {
            (a, b, c) = (-a, -b, -c);
        }
        let oracle = polynomial_root_oracle(&[a, b, c]).unwrap();
        let scale = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let largest_real = oracle
            .iter()
            .filter(|z| z.im.abs() <= 1e-12 * scale)
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        match positive_quadratic_root(a, b, c) {
            Some(r) => {
                compared += 1;
                assert!(
                    (r - largest_real).abs() <= 1e-10 * scale,
                    "a={a} b={b} c={c}: {r} vs {largest_real}"
                );
            }
            None => assert!(
                largest_real <= 1e-10 * scale,
                "a={a} b={b} c={c}: missed root {largest_real}"
            ),
        }
    }
    assert!(
        compared > DRAWS / 4,
        "only {compared} draws had a positive root"
    );
}

#[test]
fn cardano_roots_agree_with_companion_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for _ in 0..DRAWS {
        let (l2, l3, l4) = (
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
        );
        let cubic = CubicCoefficients::monic(l2, l3, l4);
        let got = cardano_cubic_roots(&cubic);
        let want = polynomial_root_oracle(&[1.0, l2, l3, l4]).unwrap();
        let err = root_mismatch(&got, &want);
        assert!(err <= 1e-10, "l = ({l2}, {l3}, {l4}): mismatch {err:e}");
    }
}
