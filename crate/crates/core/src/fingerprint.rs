//! Fingerprint states `|h_x⟩ = m^{-1/2} Σ_i |i⟩|E_i(x)⟩`, their preparation
//! circuits, the readout program that recovers `E(x)`, and fixed-point
//! classical descriptions of statevectors.
//!
//! Register layout: index qubits `0..k` (index `i` big-endian), then the
//! value qubit, so amplitude `2i + v` carries `|i⟩|v⟩`. Preparation circuits
//! append their ancillas after the value qubit.

use serde::Serialize;

use crate::bits::{BitReader, BitString};
use crate::codes::LinearCode;
use crate::error::{Error, Result};
use crate::quantum::{fidelity, Circuit, StateVector, C64, MAX_QUBITS};

/// Identifier of the multi-controlled-X construction used by
/// [`build_hx_circuit`]; bumping it changes encoded circuit lengths.
pub const MCX_DECOMPOSITION_ID: &str = "mcx-vchain-cliffordt-v1";

/// Fidelity at or above `1 − EXACT_TOL` counts as a perfect readout.
pub const EXACT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Fingerprint {
    pub x: BitString,
    pub codeword: BitString,
    pub state: StateVector,
}

impl Fingerprint {
    /// Codeword length `m`.
    pub fn m(&self) -> usize {
        self.codeword.len()
    }

    pub fn index_qubits(&self) -> usize {
        self.state.qubits() - 1
    }

    /// Total register size `M = ceil(log2 m) + 1`.
    pub fn qubits(&self) -> usize {
        self.state.qubits()
    }
}

/// `ceil(log2 m)`.
pub fn index_qubits(m: usize) -> usize {
    m.next_power_of_two().trailing_zeros() as usize
}

/// Qubits of a fingerprint for codeword length `m`.
pub fn fingerprint_qubits(m: usize) -> usize {
    index_qubits(m) + 1
}

/// Builds `|h_x⟩` directly. For `m` not a power of two the index register is
/// rounded up and positions `≥ m` carry zero amplitude.
pub fn build_fingerprint(code: &LinearCode, x: &BitString) -> Result<Fingerprint> {
    let codeword = code.encode(x)?;
    let m = codeword.len();
    let q = fingerprint_qubits(m);
    if q > MAX_QUBITS {
        return Err(Error::cap(format!(
            "fingerprint for m = {m} needs {q} qubits (cap {MAX_QUBITS})"
        )));
    }
    let amp = C64::new(1.0 / (m as f64).sqrt(), 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); 1 << q];
    for (i, bit) in codeword.iter().enumerate() {
        amps[2 * i + usize::from(bit)] = amp;
    }
    Ok(Fingerprint {
        x: x.clone(),
        codeword,
        state: StateVector::normalized(amps)?,
    })
}

/// Fraction of positions where `E(x)` and `E(y)` agree, which equals
/// `⟨h_x|h_y⟩`.
pub fn overlap(code: &LinearCode, x: &BitString, y: &BitString) -> Result<f64> {
    let ex = code.encode(x)?;
    let ey = code.encode(y)?;
    let distance = ex.hamming_distance(&ey)?;
    Ok((ex.len() - distance) as f64 / ex.len() as f64)
}

/// Ancillas the preparation circuit needs for `k` index qubits.
pub fn circuit_ancillas(k: usize) -> usize {
    k.saturating_sub(2)
}

/// Prepares `|h_x⟩ ⊗ |0…0⟩_ancillas` from `|0…0⟩`: Hadamards on the index
/// register, then for every position with `E_i(x) = 1` an X on the value
/// qubit controlled on the index register holding `i`.
///
/// Zero-controls are realized by X conjugation; X layers between
/// consecutive positions are merged so only changed controls are toggled.
pub fn build_hx_circuit(code: &LinearCode, x: &BitString) -> Result<Circuit> {
    let m = code.m();
    if !m.is_power_of_two() {
        return Err(Error::input(format!(
            "circuit construction needs m a power of two, got {m}"
        )));
    }
    let codeword = code.encode(x)?;
    let k = index_qubits(m);
    let value = k;
    let ancillas: Vec<usize> = (k + 1..k + 1 + circuit_ancillas(k)).collect();
    let mut c = Circuit::exact(k + 1 + ancillas.len())?;
    for j in 0..k {
        c.h(j)?;
    }
    let controls: Vec<usize> = (0..k).collect();
    let mut flipped = vec![false; k];
    for i in (0..m).filter(|&i| codeword.get(i)) {
        for (j, f) in flipped.iter_mut().enumerate() {
            let want = (i >> (k - 1 - j)) & 1 == 0;
            if *f != want {
                c.x(j)?;
                *f = want;
            }
        }
        c.mcx(&controls, value, &ancillas)?;
    }
    for (j, f) in flipped.iter().enumerate() {
        if *f {
            c.x(j)?;
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionStatus {
    Exact,
    Corrected,
    NotACodeword,
}

impl ExtractionStatus {
    pub fn label(&self) -> &'static str {
        match self {
            ExtractionStatus::Exact => "exact",
            ExtractionStatus::Corrected => "corrected",
            ExtractionStatus::NotACodeword => "not_a_codeword",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extraction {
    /// Read-out word; `None` when some position had no usable majority.
    pub word: Option<BitString>,
    pub status: ExtractionStatus,
    /// Message whose fingerprint the state was accepted as.
    pub message: Option<BitString>,
    /// Fidelity to that message's fingerprint when the word is a codeword.
    pub fidelity: Option<f64>,
}

/// Reads `Ẽ_i` at every position as the value carrying the larger share of
/// the squared amplitude at index `i`, then classifies the word:
///
/// * `exact` — a codeword whose fingerprint matches the state to `1 − 1e-10`;
/// * `corrected` — a codeword whose fingerprint has fidelity `≥ 1 − ε`
///   (only with a tolerance `ε ≤ 1 − Δ²` supplied);
/// * `not_a_codeword` — anything else, including ties and empty positions.
pub fn extract_codeword(
    state: &StateVector,
    code: &LinearCode,
    epsilon: Option<f64>,
) -> Result<Extraction> {
    let m = code.m();
    let q = fingerprint_qubits(m);
    if state.qubits() != q {
        return Err(Error::DimensionMismatch(q, state.qubits()));
    }
    if let Some(eps) = epsilon {
        let delta = code
            .delta_verified()
            .ok_or_else(|| Error::input("tolerant extraction needs a code with verified Δ"))?;
        if !(0.0..=1.0 - delta * delta).contains(&eps) {
            return Err(Error::input(format!(
                "tolerance ε = {eps} must lie in [0, 1 − Δ²] = [0, {}]",
                1.0 - delta * delta
            )));
        }
    }
    let rejected = Extraction {
        word: None,
        status: ExtractionStatus::NotACodeword,
        message: None,
        fidelity: None,
    };
    let mut word = BitString::with_capacity(m);
    for i in 0..m {
        let zero = state.amplitude(2 * i).norm_sqr();
        let one = state.amplitude(2 * i + 1).norm_sqr();
        if zero == one {
            return Ok(rejected);
        }
        word.push(one > zero);
    }
    let Some(message) = code.message_for(&word)? else {
        return Ok(Extraction {
            word: Some(word),
            ..rejected
        });
    };
    let f = fidelity(state, &build_fingerprint(code, &message)?.state)?;
    let status = if f >= 1.0 - EXACT_TOL {
        ExtractionStatus::Exact
    } else if epsilon.is_some_and(|eps| f >= 1.0 - eps) {
        ExtractionStatus::Corrected
    } else {
        ExtractionStatus::NotACodeword
    };
    let accepted = status != ExtractionStatus::NotACodeword;
    Ok(Extraction {
        word: Some(word),
        status,
        message: accepted.then_some(message),
        fidelity: Some(f),
    })
}

/// Widest fixed-point component the description format allows.
pub const MAX_COMPONENT_BITS: usize = 62;
pub const DESCRIPTION_HEADER_BITS: usize = 64;

/// Fixed-point amplitude list: every real and imaginary part as a `p`-bit
/// two's-complement integer `k` standing for `k · 2^{1−p}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedDescription {
    pub q: usize,
    pub p: usize,
    /// Real parts in basis order, then imaginary parts.
    pub components: Vec<i64>,
}

/// Component bits for per-component precision `ε_a`:
/// `ceil(log2(1/ε_a)) + 1`. The extra bit halves the grid so the rounding
/// error per component is at most `ε_a / 2`, which is what the fidelity
/// bound `1 − 2^{q−1} ε_a²` needs in the worst case.
pub fn component_bits(epsilon_a: f64) -> Result<usize> {
    if !(epsilon_a > 0.0 && epsilon_a < 1.0) {
        return Err(Error::input(format!(
            "precision ε_a must lie in (0, 1), got {epsilon_a}"
        )));
    }
    let p = (1.0 / epsilon_a).log2().ceil() as usize + 1;
    if p > MAX_COMPONENT_BITS {
        return Err(Error::cap(format!(
            "ε_a = {epsilon_a:e} needs {p} bits per component (max {MAX_COMPONENT_BITS})"
        )));
    }
    Ok(p)
}

/// Bits of a description of a `q`-qubit state at `p` bits per component,
/// before byte padding: `2^{q+1} p + 64`.
pub fn description_length_bits(q: usize, p: usize) -> usize {
    (1usize << (q + 1)) * p + DESCRIPTION_HEADER_BITS
}

pub fn quantize_state(s: &StateVector, epsilon_a: f64) -> Result<QuantizedDescription> {
    quantize_with_bits(s, component_bits(epsilon_a)?)
}

pub fn quantize_with_bits(s: &StateVector, p: usize) -> Result<QuantizedDescription> {
    if !(2..=MAX_COMPONENT_BITS).contains(&p) {
        return Err(Error::cap(format!(
            "component width {p} outside 2..={MAX_COMPONENT_BITS}"
        )));
    }
    let scale = (1u64 << (p - 1)) as f64;
    let (lo, hi) = (-(1i64 << (p - 1)), (1i64 << (p - 1)) - 1);
    let q = |c: f64| ((c * scale).round() as i64).clamp(lo, hi);
    let amps = s.amplitudes();
    let components = amps
        .iter()
        .map(|a| q(a.re))
        .chain(amps.iter().map(|a| q(a.im)))
        .collect();
    Ok(QuantizedDescription {
        q: s.qubits(),
        p,
        components,
    })
}

/// Decodes and renormalizes.
pub fn decode_state(d: &QuantizedDescription) -> Result<StateVector> {
    d.state()
}

impl QuantizedDescription {
    pub fn length_bits(&self) -> usize {
        description_length_bits(self.q, self.p)
    }

    pub fn state(&self) -> Result<StateVector> {
        let dim = 1usize << self.q;
        let scale = 2f64.powi(1 - self.p as i32);
        let amps = (0..dim)
            .map(|i| {
                C64::new(
                    self.components[i] as f64 * scale,
                    self.components[dim + i] as f64 * scale,
                )
            })
            .collect();
        StateVector::normalized(amps)
    }

    /// Header (16-bit q, 16-bit p, 32 reserved zero bits), then components,
    /// zero-padded to a byte boundary.
    pub fn to_bits(&self) -> BitString {
        let mut out = BitString::with_capacity(self.length_bits() + 7);
        out.push_bits(self.q as u64, 16);
        out.push_bits(self.p as u64, 16);
        out.push_bits(0, 32);
        let mask = if self.p == 64 {
            u64::MAX
        } else {
            (1u64 << self.p) - 1
        };
        for &c in &self.components {
            out.push_bits(c as u64 & mask, self.p);
        }
        out.pad_to_byte();
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.to_bits().to_bytes()
    }

    pub fn from_bits(bits: &BitString) -> Result<Self> {
        let mut r = BitReader::new(bits);
        let q = r.read(16)? as usize;
        let p = r.read(16)? as usize;
        let reserved = r.read(32)?;
        if reserved != 0 {
            return Err(Error::decode(32, "reserved header bits must be zero"));
        }
        if q > MAX_QUBITS {
            return Err(Error::cap(format!(
                "description declares {q} qubits (cap {MAX_QUBITS})"
            )));
        }
        if !(2..=MAX_COMPONENT_BITS).contains(&p) {
            return Err(Error::decode(
                16,
                format!("component width {p} outside 2..={MAX_COMPONENT_BITS}"),
            ));
        }
        let count = 2usize << q;
        let mut components = Vec::with_capacity(count);
        for _ in 0..count {
            let raw = r.read(p)?;
            // sign-extend from p bits
            let shift = 64 - p;
            components.push(((raw << shift) as i64) >> shift);
        }
        let padding = r.remaining();
        if padding >= 8 || r.read(padding)? != 0 {
            return Err(Error::decode(
                description_length_bits(q, p),
                "trailing bits beyond byte padding",
            ));
        }
        Ok(QuantizedDescription { q, p, components })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::from_bits(&BitString::from_bytes(bytes, bytes.len() * 8)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{concatenated_code, hadamard_code};
    use crate::quantum::inner_product;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn all_messages(n: usize) -> impl Iterator<Item = BitString> {
        (0..1u64 << n).map(move |v| BitString::from_u64(v, n))
    }

    #[test]
    fn fingerprint_amplitudes() {
        let code = hadamard_code(2).unwrap();
        let f = build_fingerprint(&code, &bits("10")).unwrap();
        assert_eq!(f.qubits(), 3);
        let support: Vec<usize> = (0..8)
            .filter(|&i| f.state.amplitude(i).norm() > 0.0)
            .collect();
        // |00⟩|0⟩, |01⟩|0⟩, |10⟩|1⟩, |11⟩|1⟩
        assert_eq!(support, vec![0b000, 0b010, 0b101, 0b111]);
        for &i in &support {
            assert!((f.state.amplitude(i).re - 0.5).abs() < 1e-15);
        }
        let zero = build_fingerprint(&code, &bits("00")).unwrap();
        let support: Vec<usize> = (0..8)
            .filter(|&i| zero.state.amplitude(i).norm() > 0.0)
            .collect();
        assert_eq!(support, vec![0, 2, 4, 6]);
    }

    #[test]
    fn overlap_matches_statevectors() {
        for n in 1..=4 {
            let code = hadamard_code(n).unwrap();
            let fps: Vec<_> = all_messages(n)
                .map(|x| build_fingerprint(&code, &x).unwrap())
                .collect();
            for a in &fps {
                for b in &fps {
                    let o = overlap(&code, &a.x, &b.x).unwrap();
                    let ip = inner_product(&a.state, &b.state).unwrap();
                    assert!((o - ip.re).abs() < 1e-12 && ip.im.abs() < 1e-12);
                    if a.x != b.x {
                        assert_eq!(o, 0.5);
                    }
                }
            }
        }
    }

    #[test]
    fn non_power_of_two_codes_pad_the_index_register() {
        let code = concatenated_code(3, 3).unwrap();
        let f = build_fingerprint(&code, &bits("101")).unwrap();
        assert_eq!(f.qubits(), 5);
        assert!((f.state.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(f.state.amplitudes()[18..].iter().all(|a| a.norm() == 0.0));
        assert!(build_hx_circuit(&code, &bits("101")).is_err());
        let e = extract_codeword(&f.state, &code, None).unwrap();
        assert_eq!(e.status, ExtractionStatus::Exact);
        assert_eq!(e.message, Some(bits("101")));
    }

    #[test]
    fn circuits_prepare_fingerprints() {
        for n in 1..=4 {
            let code = hadamard_code(n).unwrap();
            for x in all_messages(n) {
                let c = build_hx_circuit(&code, &x).unwrap();
                let f = build_fingerprint(&code, &x).unwrap();
                let anc = StateVector::zero(c.qubits() - f.qubits()).ok();
                let target = match anc {
                    Some(a) if c.qubits() > f.qubits() => f.state.tensor(&a).unwrap(),
                    _ => f.state.clone(),
                };
                let fid = fidelity(&c.run().unwrap(), &target).unwrap();
                assert!(fid >= 1.0 - 1e-10, "n={n} x={x} fidelity {fid}");
            }
        }
    }

    #[test]
    fn zero_codeword_circuit_is_hadamards_only() {
        let code = hadamard_code(3).unwrap();
        let c = build_hx_circuit(&code, &bits("000")).unwrap();
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn gate_count_grows_like_m_k_squared() {
        for n in 1..=8 {
            let code = hadamard_code(n).unwrap();
            let ones = BitString::from_bools(std::iter::repeat_n(true, n));
            let c = build_hx_circuit(&code, &ones).unwrap();
            let (m, k) = (code.m(), n);
            assert!(c.len() <= 40 * m * k * k, "n={n}: {} gates", c.len());
        }
    }

    #[test]
    fn exact_states_decode() {
        for n in 1..=5 {
            let code = hadamard_code(n).unwrap();
            for x in all_messages(n) {
                let f = build_fingerprint(&code, &x).unwrap();
                let e = extract_codeword(&f.state, &code, None).unwrap();
                assert_eq!(e.status, ExtractionStatus::Exact);
                assert_eq!(e.word.as_ref(), Some(&f.codeword));
                assert_eq!(e.message, Some(x));
            }
        }
    }

    #[test]
    fn ties_and_random_states_are_rejected() {
        let code = hadamard_code(2).unwrap();
        let uniform = StateVector::normalized(vec![C64::new(1.0, 0.0); 8]).unwrap();
        assert_eq!(
            extract_codeword(&uniform, &code, None).unwrap().status,
            ExtractionStatus::NotACodeword
        );

        let code = hadamard_code(5).unwrap();
        let mut rng = rng_from_seed(21);
        let rejected = (0..200)
            .filter(|_| {
                let s = StateVector::random(6, &mut rng).unwrap();
                extract_codeword(&s, &code, Some(0.7)).unwrap().status
                    == ExtractionStatus::NotACodeword
            })
            .count();
        assert!(rejected >= 195, "{rejected}");
    }

    #[test]
    fn tolerance_must_respect_exclusion_rule() {
        let code = hadamard_code(2).unwrap();
        let f = build_fingerprint(&code, &bits("11")).unwrap();
        assert!(extract_codeword(&f.state, &code, Some(0.76)).is_err());
        assert!(extract_codeword(&f.state, &code, Some(0.75)).is_ok());
    }

    #[test]
    fn description_lengths() {
        assert_eq!(
            description_length_bits(3, 10) - DESCRIPTION_HEADER_BITS,
            160
        );
        let s = StateVector::zero(3).unwrap();
        let d = quantize_with_bits(&s, 10).unwrap();
        assert_eq!(d.length_bits(), 224);
        assert_eq!(d.to_bits().len(), 224);
        assert_eq!(component_bits(2f64.powi(-12)).unwrap(), 13);
        assert_eq!(component_bits(0.3).unwrap(), 3);
        assert!(component_bits(1e-19).is_err());
    }

    #[test]
    fn basis_state_survives_quantization() {
        let s = StateVector::zero(2).unwrap();
        for eps in [0.4, 0.1, 1e-3] {
            let back = decode_state(&quantize_state(&s, eps).unwrap()).unwrap();
            assert!((fidelity(&s, &back).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn layout_is_bit_exact() {
        let s =
            StateVector::from_amplitudes(vec![C64::new(0.6, 0.0), C64::new(0.0, -0.8)]).unwrap();
        let d = quantize_with_bits(&s, 4).unwrap();
        // scale 2^3: 0.6→5, 0.0→0 | 0.0→0, −0.8→−6
        assert_eq!(d.components, vec![5, 0, 0, -6]);
        let b = d.to_bits();
        assert_eq!(
            b.to_string(),
            format!("{:016b}{:016b}{}0101000000001010", 1, 4, "0".repeat(32))
        );
        assert_eq!(QuantizedDescription::from_bits(&b).unwrap(), d);
        assert_eq!(QuantizedDescription::from_bytes(&d.to_bytes()).unwrap(), d);
    }

    #[test]
    fn random_state_fidelity_at_q6() {
        let mut rng = rng_from_seed(6);
        let eps: f64 = 2f64.powi(-12);
        for _ in 0..100 {
            let s = StateVector::random(6, &mut rng).unwrap();
            let back = decode_state(&quantize_state(&s, eps).unwrap()).unwrap();
            assert!(1.0 - fidelity(&s, &back).unwrap() <= 32.0 * eps * eps);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn quantization_bound(seed in any::<u64>(), q in 1usize..8, e in 1u32..30) {
            let eps = 0.9f64.powi(e as i32 * 2) * 0.5;
            let s = StateVector::random(q, &mut rng_from_seed(seed)).unwrap();
            let d = quantize_state(&s, eps).unwrap();
            prop_assert_eq!(d.to_bits().len(), d.length_bits().div_ceil(8) * 8);
            let deficit = 1.0 - fidelity(&s, &decode_state(&d).unwrap()).unwrap();
            prop_assert!(deficit <= 2f64.powi(q as i32 - 1) * eps * eps + 1e-15);
        }
    }
}
