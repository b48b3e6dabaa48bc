use qkolab_core::codes::{concatenated_code, hadamard_code, CodeSpec};
use qkolab_core::smp::{
    monte_carlo, run_classical_equality, run_quantum_equality, ClassicalVariant, Decision,
    ExperimentConfig, PairMode, Protocol,
};
use qkolab_core::BitString;

fn config(protocol: Protocol, n: usize, trials: u64, pairs: PairMode) -> ExperimentConfig {
    ExperimentConfig {
        n,
        code: CodeSpec::Hadamard,
        protocol,
        trials,
        master_seed: 3,
        k: 1,
        pairs,
    }
}

#[test]
fn equal_inputs_are_never_rejected() {
    for protocol in [
        Protocol::Quantum,
        Protocol::Classical(ClassicalVariant::SingleIndex),
    ] {
        let r = monte_carlo(&config(protocol, 5, 20_000, PairMode::Equal)).unwrap();
        assert_eq!(r.errors, 0, "{}", protocol.id());
        assert_eq!(r.per_direction_errors.false_not_equal.errors, 0);
    }
}

#[test]
fn transcript_counts_match_payloads() {
    let code = hadamard_code(4).unwrap();
    let (x, y) = (BitString::from_u64(3, 4), BitString::from_u64(12, 4));
    let t = run_quantum_equality(&x, &y, &code, 2, 5).unwrap();
    assert_eq!(t.qubits, 2 * 2 * 5);
    assert_eq!(t.classical_bits, 0);
    assert_eq!(t.swap_outcomes.len(), 2);
    let t =
        run_classical_equality(&x, &y, &code, ClassicalVariant::MultiIndex { s: 4 }, 5).unwrap();
    assert_eq!(t.classical_bits, 2 * 4 * (4 + 1));
}

#[test]
fn more_copies_reduce_quantum_error() {
    let rates: Vec<f64> = (1..=3)
        .map(|k| {
            let mut c = config(Protocol::Quantum, 4, 40_000, PairMode::Unequal);
            c.k = k;
            monte_carlo(&c).unwrap().error_rate
        })
        .collect();
    assert!(rates[0] > rates[1] && rates[1] > rates[2], "{rates:?}");
}

#[test]
fn results_depend_only_on_seed() {
    let c = config(
        Protocol::Classical(ClassicalVariant::MultiIndex { s: 3 }),
        6,
        5_000,
        PairMode::Mixed,
    );
    assert_eq!(monte_carlo(&c).unwrap(), monte_carlo(&c).unwrap());
}

#[test]
fn concatenated_code_protocol_runs() {
    let code = concatenated_code(6, 3).unwrap();
    let x = BitString::from_u64(0b101101, 6);
    let t = run_classical_equality(&x, &x, &code, ClassicalVariant::SingleIndex, 1).unwrap();
    assert_ne!(t.decision, Decision::NotEqual);
}
