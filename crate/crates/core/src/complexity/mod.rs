//! Compression-based complexity estimators.
//!
//! Every number here is an *upper bound* produced by the frozen compressor
//! in [`crate::kcl`]: `knet_upper` compresses a circuit's bit-exact encoding,
//! `cbe_upper` compresses a quantized amplitude list. Neither claims to be a
//! minimum; where several candidate circuits are known the smallest value is
//! taken.

mod encoding;

pub use encoding::{
    circuit_from_text, circuit_to_text, decode_circuit, encode_circuit, gate_bits, target_bits,
    CircuitEncoding, CONTAINER_MAGIC, FORMAT_VERSION, HEADER_BITS, OPCODE_BITS,
};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::codes::LinearCode;
use crate::error::{Error, Result};
use crate::fingerprint::{component_bits, quantize_with_bits};
use crate::kcl::{kcl_upper, ComplexitySurrogate, METHOD_ID};
use crate::quantum::{
    partial_trace, uhlmann_fidelity, Circuit, DensityMatrix, StateVector, C64, MAX_CIRCUIT_QUBITS,
    MAX_QUBITS,
};
use crate::rng::rng_from_seed;

/// Slack on the admission test `F² ≥ 1 − ε`, absorbing eigensolver round-off.
pub const ADMISSION_TOL: f64 = 1e-10;

/// Smallest corpus the Observation-1 experiment accepts.
pub const MIN_CORPUS: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub subject: String,
    pub knet_upper_bits: Option<usize>,
    pub knet_raw_bits: Option<usize>,
    pub cbe_upper_bits: Option<usize>,
    pub cbe_raw_bits: Option<usize>,
    pub epsilon: Option<f64>,
    pub method_id: String,
}

impl ComplexityReport {
    pub fn new(subject: impl Into<String>) -> Self {
        ComplexityReport {
            subject: subject.into(),
            knet_upper_bits: None,
            knet_raw_bits: None,
            cbe_upper_bits: None,
            cbe_raw_bits: None,
            epsilon: None,
            method_id: METHOD_ID.to_string(),
        }
    }

    pub fn with_knet(mut self, s: &ComplexitySurrogate) -> Self {
        self.knet_upper_bits = Some(s.compressed_length_bits);
        self.knet_raw_bits = Some(s.raw_length_bits);
        self
    }

    pub fn with_cbe(mut self, s: &ComplexitySurrogate, epsilon_a: f64) -> Self {
        self.cbe_upper_bits = Some(s.compressed_length_bits);
        self.cbe_raw_bits = Some(s.raw_length_bits);
        self.epsilon = Some(epsilon_a);
        self
    }
}

/// Upper bound on the network complexity of the state `c` prepares: the
/// compressed length of its padded encoding. The angle precision is the
/// circuit basis's `p`.
pub fn knet_upper(c: &Circuit) -> ComplexitySurrogate {
    kcl_upper(&encode_circuit(c).payload)
}

/// Compressed length of the `ε_a`-quantized amplitude description.
pub fn cbe_upper(s: &StateVector, epsilon_a: f64) -> Result<ComplexitySurrogate> {
    cbe_upper_with_bits(s, component_bits(epsilon_a)?)
}

/// Same as [`cbe_upper`] with an explicit component width. The raw length is
/// the unpadded description, `2^{q+1} p + 64`.
pub fn cbe_upper_with_bits(s: &StateVector, p: usize) -> Result<ComplexitySurrogate> {
    let d = quantize_with_bits(s, p)?;
    Ok(kcl_upper(&d.to_bits().slice(0, d.length_bits())))
}

/// `Σ_i √p_i |u_i⟩|u_i⟩` over the eigendecomposition of `r`; the reference
/// register is the second half of the qubits.
pub fn purify(r: &DensityMatrix) -> Result<StateVector> {
    let q = r.qubits();
    if 2 * q > MAX_QUBITS {
        return Err(Error::cap(format!(
            "purifying {q} qubits needs {} (cap {MAX_QUBITS})",
            2 * q
        )));
    }
    let dim = r.dim();
    let mut amps = vec![C64::new(0.0, 0.0); dim * dim];
    for (p, u) in r.eigen() {
        if p <= 0.0 {
            continue;
        }
        let w = p.sqrt();
        for a in 0..dim {
            let ua = u[a] * w;
            if ua == C64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..dim {
                amps[a * dim + b] += ua * u[b];
            }
        }
    }
    StateVector::normalized(amps)
}

/// A circuit proposed as a purification: after running it, the qubits in
/// `keep` should hold the target mixed state.
#[derive(Clone, Debug)]
pub struct PurificationCandidate {
    pub name: String,
    pub circuit: Circuit,
    pub keep: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateOutcome {
    pub name: String,
    pub fidelity: f64,
    pub admitted: bool,
    pub knet_upper_bits: Option<usize>,
    pub raw_length_bits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedComplexity {
    pub best: String,
    pub knet_upper_bits: usize,
    pub epsilon: f64,
    pub candidates: Vec<CandidateOutcome>,
    pub method_id: String,
}

/// Minimum `knet_upper` over the candidates whose reduced state satisfies
/// `F(r, ρ̃)² ≥ 1 − ε`. Rejected candidates stay in the report with their
/// fidelity.
pub fn mixed_complexity_upper(
    r: &DensityMatrix,
    candidates: &[PurificationCandidate],
    epsilon: f64,
) -> Result<MixedComplexity> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::input(format!("ε must lie in [0, 1), got {epsilon}")));
    }
    let mut outcomes = Vec::with_capacity(candidates.len());
    for cand in candidates {
        if cand.keep.len() != r.qubits() {
            return Err(Error::input(format!(
                "candidate {:?} keeps {} qubits, target has {}",
                cand.name,
                cand.keep.len(),
                r.qubits()
            )));
        }
        let reduced = partial_trace(&cand.circuit.run()?, &cand.keep)?;
        let fidelity = uhlmann_fidelity(r, &reduced)?;
        let admitted = fidelity * fidelity >= 1.0 - epsilon - ADMISSION_TOL;
        let k = knet_upper(&cand.circuit);
        outcomes.push(CandidateOutcome {
            name: cand.name.clone(),
            fidelity,
            admitted,
            knet_upper_bits: admitted.then_some(k.compressed_length_bits),
            raw_length_bits: k.raw_length_bits,
        });
    }
    let best = outcomes
        .iter()
        .filter_map(|o| o.knet_upper_bits.map(|b| (b, o.name.clone())))
        .min_by(|a, b| a.0.cmp(&b.0))
        .ok_or_else(|| Error::input("no candidate purification is admissible at this ε"))?;
    Ok(MixedComplexity {
        best: best.1,
        knet_upper_bits: best.0,
        epsilon,
        candidates: outcomes,
        method_id: METHOD_ID.to_string(),
    })
}

/// `n` Bell pairs on `2n` qubits, pair `j` on qubits `(2j, 2j+1)`:
/// `H(2j)` then `CNOT(2j, 2j+1)`. Tracing out the odd qubits leaves `I/2^n`.
pub fn bell_pair_circuit(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::input("need at least one pair"));
    }
    if 2 * n > MAX_CIRCUIT_QUBITS {
        return Err(Error::cap(format!(
            "{n} pairs exceed the {MAX_CIRCUIT_QUBITS}-qubit encoding limit"
        )));
    }
    let mut c = Circuit::exact(2 * n)?;
    for j in 0..n {
        c.h(2 * j)?.cnot(2 * j, 2 * j + 1)?;
    }
    Ok(c)
}

/// Polynomial envelope `a·t^b + d` for stepwise tracking.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolyBound {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl PolyBound {
    pub fn at(&self, t: usize) -> f64 {
        self.a * (t as f64).powf(self.b) + self.d
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub knet_upper_bits: usize,
    pub raw_length_bits: usize,
    pub bound_bits: f64,
    pub exceeds_bound: bool,
}

/// `knet_upper` of every prefix `c[..t]`, `t = 1..=len`, flagged against
/// the envelope.
pub fn track_stepwise(c: &Circuit, bound: PolyBound) -> Vec<StepReport> {
    (1..=c.len())
        .into_par_iter()
        .map(|t| {
            let k = knet_upper(&c.prefix(t));
            let bound_bits = bound.at(t);
            StepReport {
                step: t,
                knet_upper_bits: k.compressed_length_bits,
                raw_length_bits: k.raw_length_bits,
                bound_bits,
                exceeds_bound: k.compressed_length_bits as f64 > bound_bits,
            }
        })
        .collect()
}

/// Spearman rank correlation with average ranks for ties. `NaN` when either
/// side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::input("need at least two samples"));
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Corpus from periodic to PRNG-random: string `j` of `size` has each bit
/// set independently with probability `0.5·j/(size−1)`, so the first is
/// all zeros and the last is fair coin flips.
pub fn density_ladder_corpus(n: usize, size: usize, seed: u64) -> Vec<BitString> {
    let mut rng = rng_from_seed(seed);
    (0..size)
        .map(|j| {
            let p = if size > 1 {
                0.5 * j as f64 / (size - 1) as f64
            } else {
                0.0
            };
            BitString::from_bools((0..n).map(|_| rng.random_bool(p)))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationPair {
    pub x: String,
    pub kcl_x_bits: usize,
    pub kcl_codeword_bits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observation1Report {
    pub code: String,
    pub n: usize,
    pub m: usize,
    pub corpus_size: usize,
    pub seed: u64,
    pub spearman: f64,
    pub pairs: Vec<CorrelationPair>,
    pub method_id: String,
}

/// Rank correlation between `kcl_upper(x)` and `kcl_upper(E(x))` over a
/// density-ladder corpus.
pub fn observation1_experiment(
    code: &LinearCode,
    corpus_size: usize,
    seed: u64,
) -> Result<Observation1Report> {
    if corpus_size < MIN_CORPUS {
        return Err(Error::input(format!(
            "corpus of {corpus_size} strings is below the minimum {MIN_CORPUS}"
        )));
    }
    let corpus = density_ladder_corpus(code.n(), corpus_size, seed);
    let pairs = corpus
        .par_iter()
        .map(|x| {
            let e = code.encode(x)?;
            Ok(CorrelationPair {
                x: x.to_string(),
                kcl_x_bits: kcl_upper(x).compressed_length_bits,
                kcl_codeword_bits: kcl_upper(&e).compressed_length_bits,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = pairs.iter().map(|p| p.kcl_x_bits as f64).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.kcl_codeword_bits as f64).collect();
    Ok(Observation1Report {
        code: code.descriptor().name,
        n: code.n(),
        m: code.m(),
        corpus_size,
        seed,
        spearman: spearman(&xs, &ys)?,
        pairs,
        method_id: METHOD_ID.to_string(),
    })
}

/// Dense identity check used by tests and the acceptance suite: the largest
/// entry of `|ρ − I/2^q|`.
pub fn deviation_from_maximally_mixed(rho: &DensityMatrix) -> f64 {
    let dim = rho.dim();
    let target = DMatrix::<C64>::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
    (rho.matrix() - target)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
