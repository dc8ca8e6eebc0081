use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use clausius_lab::info::{
    accessible_info_lower, average_state, erasure_budget, holevo_chi, mutual_information, sampling, vn_entropy,
    DensityMatrix, Ensemble, Povm,
};
use clausius_lab::Constants;

fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|x| -x * x.ln()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measurement_never_beats_holevo(seed in any::<u64>(), dim in 2usize..=4, states in 1usize..=4, outcomes in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = sampling::random_ensemble(&mut rng, dim, states).unwrap();
        let m = sampling::random_povm(&mut rng, dim, outcomes).unwrap();
        let chi = holevo_chi(&e).unwrap();
        let im = mutual_information(&e, &m).unwrap();
        prop_assert!(im >= -1e-12);
        prop_assert!(im <= chi + 1e-10);
        prop_assert!(chi <= shannon(e.probabilities()) + 1e-10);
        prop_assert!(chi <= (dim as f64).ln() + 1e-10);
    }

    #[test]
    fn coarse_graining_loses_information(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = sampling::random_ensemble(&mut rng, 2, 3).unwrap();
        let m = sampling::random_povm(&mut rng, 2, 4).unwrap();
        let coarse = m.coarsened(0, 1).unwrap();
        prop_assert!(mutual_information(&e, &coarse).unwrap() <= mutual_information(&e, &m).unwrap() + 1e-12);
    }
}

#[test]
fn orthogonal_states_are_fully_readable() {
    let c = |x: f64| Complex64::new(x, 0.0);
    let e = Ensemble::new(
        vec![0.3, 0.7],
        vec![
            DensityMatrix::pure(&[c(1.0), c(0.0)]).unwrap(),
            DensityMatrix::pure(&[c(0.0), c(1.0)]).unwrap(),
        ],
    )
    .unwrap();
    let h = shannon(&[0.3, 0.7]);
    assert!((holevo_chi(&e).unwrap() - h).abs() < 1e-12);
    assert!((mutual_information(&e, &Povm::computational(2).unwrap()).unwrap() - h).abs() < 1e-12);
    assert!((accessible_info_lower(&e, 16).unwrap().value - h).abs() < 1e-9);
}

#[test]
fn erasure_budget_for_non_orthogonal_pair() {
    let c = |x: f64| Complex64::new(x, 0.0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let e = Ensemble::new(
        vec![0.5, 0.5],
        vec![
            DensityMatrix::pure(&[c(1.0), c(0.0)]).unwrap(),
            DensityMatrix::pure(&[c(r), c(r)]).unwrap(),
        ],
    )
    .unwrap();
    let b = erasure_budget(&e, 1.0, &Constants::NATURAL).unwrap();
    let s = vn_entropy(&average_state(&e).unwrap()).unwrap();
    assert!(b.q_martin.abs() < 1e-12);
    assert!((b.q_amy - s).abs() < 1e-12);
    assert!((b.q_shared - s).abs() < 1e-12);
}
