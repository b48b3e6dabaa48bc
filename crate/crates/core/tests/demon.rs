use qkolab_core::demon::{
    background_information_report, demon_step, multiphoton_comparison, BackgroundSetting,
    LedgerMode, BOLTZMANN,
};
use qkolab_core::quantum::fidelity;

#[test]
fn post_state_is_the_measured_basis_vector() {
    for seed in 0..200 {
        let step = demon_step(10, seed, BOLTZMANN, 300.0).unwrap();
        let theta = step.theta;
        // outcome 0 ↔ cos θ|0⟩ + sin θ|1⟩
        let amp = step.post_state.amplitudes();
        let expected = if step.record.outcome_bit == 0 {
            [theta.cos(), theta.sin()]
        } else {
            [-theta.sin(), theta.cos()]
        };
        let overlap = (amp[0].conj() * expected[0] + amp[1].conj() * expected[1]).norm();
        assert!((overlap - 1.0).abs() < 1e-12, "seed {seed}");
        assert!((step.p0 - 0.5).abs() < 1e-12);
    }
}

#[test]
fn same_seed_same_step() {
    let a = demon_step(12, 77, BOLTZMANN, 300.0).unwrap();
    let b = demon_step(12, 77, BOLTZMANN, 300.0).unwrap();
    assert_eq!(a.record, b.record);
    assert_eq!(fidelity(&a.post_state, &b.post_state).unwrap(), 1.0);
}

#[test]
fn entangled_cost_exceeds_product_in_both_modes() {
    for mode in [LedgerMode::Formula, LedgerMode::Simulated] {
        for n in 2..=5 {
            let c = multiphoton_comparison(n, 3, mode, 2f64.powi(-6), BOLTZMANN, 300.0, 9).unwrap();
            assert!(c.entangled_exceeds_product, "n={n}, {mode:?}");
            assert!(c.entangled.is_consistent() && c.product.is_consistent());
        }
    }
}

#[test]
fn background_grows_with_setting() {
    let single = background_information_report(BackgroundSetting::Single, 8, 1e-3, 0).unwrap();
    let product =
        background_information_report(BackgroundSetting::MultiProduct { n: 4 }, 8, 1e-3, 0)
            .unwrap();
    let projection =
        background_information_report(BackgroundSetting::MultiProjection { n: 4 }, 8, 1e-3, 0)
            .unwrap();
    assert!(single.descriptor_bits < product.descriptor_bits);
    assert!(product.descriptor_bits < projection.descriptor_bits);
    assert!(projection.cbe_upper_bits.is_some() && single.cbe_upper_bits.is_none());
}
