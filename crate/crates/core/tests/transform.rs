mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use vqh_core::qubo::{brute_force_solve, ChordEncoding, Configuration, QuboProblem};

fn arb_qubo(max_n: usize) -> impl Strategy<Value = QuboProblem> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(prop::option::weighted(0.7, -5.0f64..5.0), pairs),
        )
            .prop_map(move |(linear, upper)| {
                let mut quadratic = BTreeMap::new();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if let Some(b) = upper[k] {
                            quadratic.insert((i, j), b);
                        }
                        k += 1;
                    }
                }
                QuboProblem::unlabeled(linear, quadratic).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ising_energy_is_affine_in_cost(q in arb_qubo(8)) {
        let n = q.n();
        let h = q.to_ising();
        let m = problem_matrix(&q);
        for k in 0..1usize << n {
            let bits = bits_of(k, n);
            let cost = matrix_cost(&m, &bits);
            let energy = ising_energy_direct(h.fields(), h.couplings(), &bits);
            prop_assert!((energy - (4.0 * cost - h.offset())).abs() < 1e-9);
            let c = Configuration::from_bits(bits).unwrap();
            prop_assert!((q.cost(&c).unwrap() - cost).abs() < 1e-9);
            prop_assert!((h.energy(&c).unwrap() - energy).abs() < 1e-9);
        }
    }

    #[test]
    fn brute_force_matches_plain_enumeration(q in arb_qubo(9)) {
        let n = q.n();
        let m = problem_matrix(&q);
        let costs: Vec<f64> = (0..1usize << n).map(|k| matrix_cost(&m, &bits_of(k, n))).collect();
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let expected: BTreeSet<Vec<u8>> = (0..costs.len())
            .filter(|&k| costs[k] - min <= 1e-9)
            .map(|k| bits_of(k, n))
            .collect();
        let got = brute_force_solve(&q).unwrap();
        prop_assert!((got.min_cost - min).abs() < 1e-9);
        let got_set: BTreeSet<Vec<u8>> = got.minimizers.iter().map(|c| c.bits().to_vec()).collect();
        prop_assert_eq!(got_set, expected);
    }

    #[test]
    fn csv_round_trip(q in arb_qubo(12)) {
        let back = QuboProblem::parse_csv(&q.to_csv()).unwrap();
        prop_assert_eq!(back, q);
    }

    #[test]
    fn interpolation_endpoints_and_midpoint(a in arb_qubo(6), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_qubo(&mut rng, a.n(), false);
        let (ha, hb) = (a.to_ising(), b.to_ising());
        prop_assert_eq!(ha.interpolate(&hb, 0.0).unwrap(), ha.clone());
        prop_assert_eq!(ha.interpolate(&hb, 1.0).unwrap(), hb.clone());
        let mid = ha.interpolate(&hb, 0.5).unwrap().diagonal();
        for ((m, x), y) in mid.iter().zip(ha.diagonal()).zip(hb.diagonal()) {
            prop_assert!((m - 0.5 * (x + y)).abs() < 1e-9);
        }
    }
}

#[test]
fn integer_problems_have_identical_argmin_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = 1 + (rand::Rng::gen_range(&mut rng, 0..8));
        let q = random_qubo(&mut rng, n, true);
        let h = q.to_ising();
        let energies = h.diagonal();
        let lowest = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let ising_argmin: Vec<Vec<u8>> = (0..energies.len())
            .filter(|&k| energies[k] == lowest)
            .map(|k| bits_of(k, n))
            .collect();
        let mut ising_argmin = ising_argmin;
        ising_argmin.sort();
        let qubo_argmin: Vec<Vec<u8>> = brute_force_solve(&q)
            .unwrap()
            .minimizers
            .iter()
            .map(|c| c.bits().to_vec())
            .collect();
        assert_eq!(qubo_argmin, ising_argmin);
    }
}

#[test]
fn chord_ground_states() {
    let linear = chord(&["C", "E", "G"], ChordEncoding::Linear);
    let sol = brute_force_solve(&linear).unwrap();
    assert_eq!(sol.min_cost, -3.0);
    assert_eq!(sol.minimizers.len(), 1);
    assert_eq!(sol.minimizers[0].to_string(), "100010010000");

    // balanced encoding: the chord and its complement are degenerate
    let balanced = chord(&["C", "E", "G"], ChordEncoding::Balanced);
    let sol = brute_force_solve(&balanced).unwrap();
    let names: Vec<String> = sol.minimizers.iter().map(ToString::to_string).collect();
    assert_eq!(names, vec!["011101101111", "100010010000"]);
    let h = balanced.to_ising();
    assert!(h.fields().iter().all(|&f| f == 0.0));
    for c in &sol.minimizers {
        assert_eq!(h.energy(c).unwrap(), -12.0);
    }
}
