use qkolab_core::codes::hadamard_code;
use qkolab_core::complexity::{
    bell_pair_circuit, circuit_from_text, circuit_to_text, encode_circuit, knet_upper,
    mixed_complexity_upper, track_stepwise, CircuitEncoding, PolyBound, PurificationCandidate,
};
use qkolab_core::fingerprint::build_hx_circuit;
use qkolab_core::quantum::{partial_trace, DensityMatrix};
use qkolab_core::rng::rng_from_seed;
use qkolab_core::BitString;
use rand::Rng;

/// `m + c·log2²(m)` with the constant used for the size regime check.
fn size_scale(m: usize) -> f64 {
    let l = (m as f64).log2();
    m as f64 + 20.0 * l * l
}

#[test]
fn fingerprint_circuit_size_tracks_code_length() {
    let mut rng = rng_from_seed(2024);
    for n in 8..=10 {
        let code = hadamard_code(n).unwrap();
        for _ in 0..4 {
            let x = BitString::from_u64(rng.random_range(0..1u64 << n), n);
            let bits =
                knet_upper(&build_hx_circuit(&code, &x).unwrap()).compressed_length_bits as f64;
            let scale = size_scale(code.m());
            assert!(
                (0.5 * scale..=1.5 * scale).contains(&bits),
                "n={n}, x={x}: {bits} bits outside [0.5, 1.5] × {scale}"
            );
        }
    }
}

#[test]
fn compressed_size_never_far_above_raw() {
    // bounded expansion of the compressor on real circuits
    for n in 1..=6 {
        let code = hadamard_code(n).unwrap();
        let x = BitString::from_u64((1 << n) - 1, n);
        let s = knet_upper(&build_hx_circuit(&code, &x).unwrap());
        assert!(
            s.compressed_length_bits <= s.raw_length_bits + 64,
            "n={n}: {s:?}"
        );
    }
}

#[test]
fn circuit_file_formats_agree() {
    let code = hadamard_code(4).unwrap();
    let c = build_hx_circuit(&code, &BitString::from_u64(0b1010, 4)).unwrap();
    let via_text = circuit_from_text(&circuit_to_text(&c)).unwrap();
    let enc = CircuitEncoding::from_container(&encode_circuit(&c).to_container()).unwrap();
    assert_eq!(via_text, c);
    assert_eq!(enc.decode().unwrap(), c);
    assert_eq!(knet_upper(&via_text), knet_upper(&c));
}

#[test]
fn stepwise_profile_is_bounded_by_final_prefix() {
    let c = bell_pair_circuit(6).unwrap();
    let steps = track_stepwise(
        &c,
        PolyBound {
            a: 0.0,
            b: 0.0,
            d: 1.0,
        },
    );
    assert_eq!(steps.len(), c.len());
    assert!(steps.iter().all(|s| s.exceeds_bound));
    assert!(steps
        .windows(2)
        .all(|w| w[0].raw_length_bits <= w[1].raw_length_bits));
    assert_eq!(
        steps.last().unwrap().knet_upper_bits,
        knet_upper(&c).compressed_length_bits
    );
}

#[test]
fn bell_purification_admitted_for_maximally_mixed_target() {
    let n = 3;
    let target = DensityMatrix::maximally_mixed(n).unwrap();
    let bell = bell_pair_circuit(n).unwrap();
    let keep: Vec<usize> = (0..n).map(|j| 2 * j).collect();
    assert!(
        partial_trace(&bell.run().unwrap(), &keep)
            .unwrap()
            .max_deviation(&target)
            .unwrap()
            < 1e-12
    );
    let product = {
        let mut c = qkolab_core::quantum::Circuit::exact(2 * n).unwrap();
        c.h(0).unwrap();
        c
    };
    let candidates = [
        PurificationCandidate {
            name: "bell".into(),
            circuit: bell.clone(),
            keep: keep.clone(),
        },
        PurificationCandidate {
            name: "product".into(),
            circuit: product,
            keep,
        },
    ];
    let r = mixed_complexity_upper(&target, &candidates, 1e-6).unwrap();
    assert_eq!(r.best, "bell");
    assert!(r.candidates[0].admitted);
    assert!(!r.candidates[1].admitted);
    assert_eq!(r.knet_upper_bits, knet_upper(&bell).compressed_length_bits);
}
