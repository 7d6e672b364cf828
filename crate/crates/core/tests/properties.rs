//! Property-based invariants of evaluation, geometry and persistence.

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use ssgmix::io::ModelRecord;
use ssgmix::{adjusted_rand_index, bic, component_geometry, free_parameters, ComponentParams, MixtureModel};

fn labels(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(1..=k, n)
}

fn label_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (2usize..60).prop_flat_map(|n| (labels(n, 4), labels(n, 5)))
}

fn component(d: usize) -> impl Strategy<Value = ComponentParams<f64>> {
    (
        0.3f64..1.99,
        proptest::collection::vec(-5.0f64..5.0, d),
        proptest::collection::vec(-2.0f64..2.0, d * d),
        proptest::collection::vec(-5.0f64..5.0, d),
    )
        .prop_map(move |(alpha, mu, a, lambda)| {
            let a = Array2::from_shape_vec((d, d), a).unwrap();
            let sigma = a.dot(&a.t()) + Array2::<f64>::eye(d) * 0.1;
            ComponentParams::new(alpha, Array1::from(mu), sigma, Array1::from(lambda)).unwrap()
        })
}

fn model() -> impl Strategy<Value = MixtureModel<f64>> {
    (1usize..4, 1usize..4).prop_flat_map(|(k, d)| {
        (proptest::collection::vec(0.05f64..1.0, k), proptest::collection::vec(component(d), k)).prop_map(|(w, c)| {
            let s: f64 = w.iter().sum();
            MixtureModel::new(w.iter().map(|v| v / s).collect(), c).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn ari_is_symmetric((a, b) in label_pair()) {
        let ab = adjusted_rand_index(&a, &b).unwrap();
        let ba = adjusted_rand_index(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1.0..=1.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn ari_ignores_relabeling((a, b) in label_pair(), shift in 1usize..10) {
        // Map label l -> a permuted, shifted alphabet.
        let relabeled: Vec<usize> = a.iter().map(|&l| 100 + (5 - l) * shift).collect();
        let x = adjusted_rand_index(&a, &b).unwrap();
        let y = adjusted_rand_index(&relabeled, &b).unwrap();
        prop_assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn ari_of_partition_with_itself_is_one(a in labels(30, 4)) {
        let v = adjusted_rand_index(&a, &a).unwrap();
        let distinct = a.iter().collect::<std::collections::BTreeSet<_>>().len();
        let ok = if distinct > 1 { (v - 1.0).abs() < 1e-12 } else { v == 0.0 || v == 1.0 };
        prop_assert!(ok);
    }

    #[test]
    fn bic_grows_with_parameter_count(loglik in -1e4f64..0.0, n in 3usize..10_000, k in 1usize..6, d in 1usize..6) {
        prop_assert!(free_parameters(k + 1, d) > free_parameters(k, d));
        prop_assert!(bic(loglik, n, k + 1, d) > bic(loglik, n, k, d));
        prop_assert!(bic(loglik, n, k, d + 1) > bic(loglik, n, k, d));
    }

    #[test]
    fn geometry_invariants(theta in (1usize..4).prop_flat_map(component)) {
        let g = component_geometry(&theta).unwrap();
        prop_assert!(g.delta > 0.0 && g.delta <= 1.0);
        // Ω = Σ + λλᵀ and Ω Ω⁻¹ = I.
        let d = theta.dim();
        let prod = g.omega.dot(&g.omega_inv);
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod[[i, j]] - want).abs() < 1e-6 * (1.0 + g.omega[[i, i]]));
                let o = theta.sigma[[i, j]] + theta.lambda[i] * theta.lambda[j];
                prop_assert!((g.omega[[i, j]] - o).abs() < 1e-12 * (1.0 + o.abs()));
            }
        }
    }

    #[test]
    fn model_json_round_trip_is_byte_identical(m in model()) {
        let first = ModelRecord::from_model(&m, None).to_json();
        let back = ModelRecord::from_json(&first).unwrap();
        let model_back = back.to_model().unwrap();
        prop_assert_eq!(&model_back, &m);
        prop_assert_eq!(ModelRecord::from_model(&model_back, None).to_json(), first);
    }
}

#[test]
fn ari_hand_cases() {
    assert!((adjusted_rand_index(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap() + 0.5).abs() < 1e-12);
    assert_eq!(adjusted_rand_index(&[1, 1, 1, 1], &[1, 2, 3, 4]).unwrap(), 0.0);
    assert!(adjusted_rand_index(&[1, 2], &[1]).is_err());
}

#[test]
fn bic_reference_values() {
    assert_eq!(free_parameters(2, 2), 17);
    assert!((bic(0.0, 3, 1, 1) - 4.0 * 3f64.ln()).abs() < 1e-12);
}
