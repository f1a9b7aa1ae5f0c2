//! Property tests for the algebraic invariants.

use coopraman::allocation::{allocate_power, ExpectedChannel};
use coopraman::channel::{AttenuationModel, Band};
use coopraman::reconstruction::normalized_mse;
use proptest::prelude::*;

proptest! {
    /// Mean-normalized MSE is invariant under positive rescaling of the
    /// estimate.
    #[test]
    fn score_is_scale_invariant(
        values in prop::collection::vec(0.0f64..10.0, 4..64),
        truth in prop::collection::vec(0.001f64..10.0, 4..64),
        scale in 0.001f64..1000.0,
    ) {
        let n = values.len().min(truth.len());
        let est = &values[..n];
        let truth = &truth[..n];
        prop_assume!(est.iter().sum::<f64>() > 0.0);
        let (base, _) = normalized_mse(est, truth);
        let scaled: Vec<f64> = est.iter().map(|v| v * scale).collect();
        let (rescored, _) = normalized_mse(&scaled, truth);
        prop_assert!((base - rescored).abs() <= 1e-9 * base.max(1.0));
    }

    /// One-leg path gains compose multiplicatively over distance.
    #[test]
    fn path_gain_semigroup(
        mu in 0.0f64..5000.0,
        d1 in 0.0f64..0.01,
        d2 in 0.0f64..0.01,
    ) {
        let model = AttenuationModel::flat(mu, 1).unwrap();
        let joint = model.path_gain(Band::Sub(0), d1 + d2).unwrap();
        let split = model.path_gain(Band::Sub(0), d1).unwrap()
            * model.path_gain(Band::Sub(0), d2).unwrap();
        prop_assert!((joint - split).abs() <= 1e-12 * joint.max(1e-300));
    }

    /// Inverse-channel allocation equalizes the channel-power product,
    /// conserves the budget, and is inverse-monotone for any channel vector.
    #[test]
    fn allocation_invariants(
        exponents in prop::collection::vec(-6.0f64..3.0, 2..64),
        p_s in 0.001f64..10.0,
    ) {
        let h_values: Vec<f64> = exponents.iter().map(|e| 10f64.powf(*e)).collect();
        let h = ExpectedChannel::new(h_values.clone()).unwrap();
        let alloc = allocate_power(&h, p_s).unwrap();
        let products: Vec<f64> = h_values
            .iter()
            .zip(alloc.per_band())
            .map(|(h, p)| h * p)
            .collect();
        let hi = products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = products.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!((hi - lo) / hi <= 1e-12);
        prop_assert!((alloc.budget() - p_s).abs() / p_s <= 1e-9);
        for i in 0..h_values.len() {
            for j in 0..h_values.len() {
                if h_values[i] < h_values[j] {
                    prop_assert!(alloc.per_band()[i] > alloc.per_band()[j]);
                }
            }
        }
    }
}
