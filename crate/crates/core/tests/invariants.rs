//! Property tests over random joints.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use piclab::boolean::{hadamard_transform, noise_spectrum};
use piclab::bounds::{map_error, pic_fano_bound};
use piclab::dist::{chi_squared, entropy, mutual_information, JointPmf};
use piclab::pic::{conditional_energy, decompose, mmse_of_function};
use piclab::privacy::{default_t_grid, funnel_estimate, funnel_region_bounds, perfect_privacy_map};
use piclab::LogBase;

fn joint(m: usize, n: usize, cells: &[f64]) -> JointPmf<f64> {
    let cells = &cells[..m * n];
    let total: f64 = cells.iter().sum();
    let rows: Vec<Vec<f64>> = cells.chunks(n).map(|r| r.iter().map(|v| v / total).collect()).collect();
    JointPmf::from_rows(&rows).unwrap()
}

fn arb_joint(max: usize) -> impl Strategy<Value = JointPmf<f64>> {
    (2..=max, 2..=max)
        .prop_flat_map(|(m, n)| prop::collection::vec(0.01f64..1.0, m * n).prop_map(move |c| joint(m, n, &c)))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, rng_seed: proptest::test_runner::RngSeed::Fixed(0x5EED), ..ProptestConfig::default() })]

    #[test]
    fn spectrum_is_ordered_and_sums_to_chi_squared(j in arb_joint(5)) {
        let dec = decompose(&j, 1e-6).unwrap();
        prop_assert!(dec.lambdas.iter().all(|&l| (0.0..=1.0).contains(&l)));
        prop_assert!(dec.lambdas.windows(2).all(|w| w[0] >= w[1]));
        let sum: f64 = dec.lambdas.iter().sum();
        assert_abs_diff_eq!(sum, chi_squared(&j), epsilon = 1e-10);
    }

    #[test]
    fn principal_functions_are_orthonormal_and_rebuild_the_joint(j in arb_joint(5)) {
        let dec = decompose(&j, 1e-6).unwrap();
        let k = dec.d() + 1;
        for a in 0..k {
            for b in 0..k {
                let gram: f64 = (0..j.m()).map(|x| j.px()[x] * dec.f[(x, a)] * dec.f[(x, b)]).sum();
                assert_abs_diff_eq!(gram, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-10);
            }
        }
        for x in 0..j.m() {
            for y in 0..j.n() {
                let rebuilt: f64 = (0..k).map(|c| dec.sigmas[c] * dec.f[(x, c)] * dec.g[(y, c)]).sum::<f64>()
                    * j.px()[x] * j.py()[y];
                assert_abs_diff_eq!(rebuilt, j.get(x, y), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mmse_matches_direct_conditional_expectation(j in arb_joint(4), f in prop::collection::vec(-1.0f64..1.0, 4)) {
        let f = &f[..j.m()];
        let mean: f64 = j.px().iter().zip(f).map(|(p, v)| p * v).sum();
        let var: f64 = j.px().iter().zip(f).map(|(p, v)| p * (v - mean).powi(2)).sum();
        prop_assume!(var > 1e-6);
        let rep = mmse_of_function(&j, f).unwrap();
        let direct = var - conditional_energy(&j, f).unwrap();
        assert_abs_diff_eq!(rep.mmse, direct, epsilon = 1e-9);
        prop_assert!(rep.coefficients.iter().map(|c| c * c).sum::<f64>() <= 1.0 + 1e-8);
    }

    #[test]
    fn information_is_bounded_by_entropies(j in arb_joint(5)) {
        let mi = mutual_information(&j, LogBase::Two);
        prop_assert!(mi >= 0.0);
        prop_assert!(mi <= entropy(j.px(), LogBase::Two).min(entropy(j.py(), LogBase::Two)) + 1e-12);
    }

    #[test]
    fn map_error_dominates_pic_bound(j in arb_joint(6)) {
        let dec = decompose(&j, 1e-6).unwrap();
        let b = pic_fano_bound(j.px(), &dec.lambdas).unwrap();
        prop_assert!(map_error(&j) >= b.value - 1e-9);
    }

    #[test]
    fn hadamard_is_an_involution(v in prop::collection::vec(-1.0f64..1.0, 16)) {
        let mut w = v.clone();
        hadamard_transform(&mut w).unwrap();
        hadamard_transform(&mut w).unwrap();
        for (a, b) in v.iter().zip(&w) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn noise_spectrum_starts_at_one(c in prop::collection::vec(0.01f64..1.0, 8)) {
        let s: f64 = c.iter().sum();
        let p: Vec<f64> = c.iter().map(|v| v / s).collect();
        let spec = noise_spectrum(&p).unwrap();
        assert_abs_diff_eq!(spec.c[0], 1.0, epsilon = 1e-12);
        prop_assert!(spec.c.iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn wide_joints_admit_perfect_privacy(m in 2usize..4, cells in prop::collection::vec(0.01f64..1.0, 20)) {
        let j = joint(m, m + 1, &cells);
        let map = perfect_privacy_map(&j, 1e-9).unwrap().unwrap();
        prop_assert!(map.t0 > 0.0 && map.t0 <= 1.0 + 1e-12);
        prop_assert!(map.residual <= 1e-18);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, rng_seed: proptest::test_runner::RngSeed::Fixed(0x5EED), ..ProptestConfig::default() })]

    #[test]
    fn funnel_estimates_lie_in_the_region(j in arb_joint(3), seed in 0u64..1000) {
        let grid = default_t_grid(&j, LogBase::Two, 4);
        for p in funnel_region_bounds(&j, &grid, LogBase::Two).unwrap() {
            let e = funnel_estimate(&j, p.t, 2, seed, LogBase::Two).unwrap();
            prop_assert!(e.utility >= p.t - 1e-9);
            prop_assert!(e.leakage >= p.lower - 1e-9 && e.leakage <= p.upper + 1e-9);
        }
    }
}
