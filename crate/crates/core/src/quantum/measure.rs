use rand::Rng;

use super::circuit::Circuit;
use super::density::DensityMatrix;
use super::state::{fidelity, inner_product, StateVector, MAX_QUBITS};
use super::{C64, NORM_TOL};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::kcl::{kcl_upper, ComplexitySurrogate};
use crate::rng::rng_from_seed;

/// `4^q` outcomes are enumerated, so the POVM is capped at 8 qubits.
pub const MAX_POVM_QUBITS: usize = 8;

/// Closed-form SWAP-test outcome distribution `[P(0), P(1)]`.
pub fn swap_test(a: &StateVector, b: &StateVector) -> Result<[f64; 2]> {
    let f = fidelity(a, b)?;
    let p0 = (1.0 + f) / 2.0;
    Ok([p0, 1.0 - p0])
}

/// The literal SWAP-test circuit on `2q + 1` qubits: the ancilla is qubit 0,
/// the first register qubits `1..=q`, the second `q+1..=2q`.
pub fn swap_test_circuit(q: usize) -> Result<Circuit> {
    let mut c = Circuit::exact(2 * q + 1)?;
    c.h(0)?;
    for j in 0..q {
        c.cswap(0, 1 + j, 1 + q + j)?;
    }
    c.h(0)?;
    Ok(c)
}

/// Ancilla distribution obtained by simulating [`swap_test_circuit`] on
/// `|0⟩|a⟩|b⟩`.
pub fn swap_test_circuit_probabilities(a: &StateVector, b: &StateVector) -> Result<[f64; 2]> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let q = a.qubits();
    if 2 * q + 1 > MAX_QUBITS {
        return Err(Error::cap(format!(
            "SWAP-test circuit on {q}-qubit states needs {} qubits (cap {MAX_QUBITS})",
            2 * q + 1
        )));
    }
    let input = StateVector::zero(1)?.tensor(a)?.tensor(b)?;
    let out = swap_test_circuit(q)?.apply(&input)?;
    let half = out.dim() / 2;
    let p0: f64 = out.amplitudes()[..half].iter().map(|z| z.norm_sqr()).sum();
    let p1: f64 = out.amplitudes()[half..].iter().map(|z| z.norm_sqr()).sum();
    Ok([p0, p1])
}

/// One SWAP-test run: 0 or 1 drawn from the closed-form distribution.
pub fn sample_swap_test<R: Rng + ?Sized>(
    a: &StateVector,
    b: &StateVector,
    rng: &mut R,
) -> Result<u8> {
    let [_, p1] = swap_test(a, b)?;
    Ok(u8::from(rng.random::<f64>() < p1))
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasurementBasis {
    Computational,
    /// Orthonormal vectors; outcome `k` is vector `k`.
    Orthonormal(Vec<StateVector>),
}

impl MeasurementBasis {
    pub fn orthonormal(vectors: Vec<StateVector>) -> Result<Self> {
        let dim = vectors
            .first()
            .map(|v| v.dim())
            .ok_or_else(|| Error::input("empty basis"))?;
        if vectors.len() != dim {
            return Err(Error::input(format!(
                "{} vectors cannot span dimension {dim}",
                vectors.len()
            )));
        }
        for (i, u) in vectors.iter().enumerate() {
            for v in &vectors[i + 1..] {
                let ip = inner_product(u, v)?.norm();
                if ip > NORM_TOL {
                    return Err(Error::Numeric(format!("basis vectors overlap by {ip:e}")));
                }
            }
        }
        Ok(MeasurementBasis::Orthonormal(vectors))
    }

    fn probabilities(&self, s: &StateVector) -> Result<Vec<f64>> {
        match self {
            MeasurementBasis::Computational => Ok(s.probabilities()),
            MeasurementBasis::Orthonormal(vs) => vs.iter().map(|v| fidelity(v, s)).collect(),
        }
    }
}

pub fn sample_measurement_with<R: Rng + ?Sized>(
    s: &StateVector,
    basis: &MeasurementBasis,
    rng: &mut R,
) -> Result<usize> {
    let probs = basis.probabilities(s)?;
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, p) in probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        acc += p;
        last = k;
        if u < acc {
            return Ok(k);
        }
    }
    Ok(last)
}

/// Outcome `k` with probability `|⟨b_k|s⟩|²`, reproducible for a fixed seed.
pub fn sample_measurement(s: &StateVector, basis: &MeasurementBasis, seed: u64) -> Result<usize> {
    sample_measurement_with(s, basis, &mut rng_from_seed(seed))
}

/// Bloch directions of the tetrahedral single-qubit POVM.
fn tetrahedron() -> [[f64; 3]; 4] {
    let s2 = 2f64.sqrt();
    let s23 = (2.0f64 / 3.0).sqrt();
    [
        [0.0, 0.0, 1.0],
        [2.0 * s2 / 3.0, 0.0, -1.0 / 3.0],
        [-s2 / 3.0, s23, -1.0 / 3.0],
        [-s2 / 3.0, -s23, -1.0 / 3.0],
    ]
}

/// `M_k = (I + r_k·σ)/4`.
fn povm_elements() -> [[[C64; 2]; 2]; 4] {
    tetrahedron().map(|[x, y, z]| {
        [
            [C64::new((1.0 + z) / 4.0, 0.0), C64::new(x / 4.0, -y / 4.0)],
            [C64::new(x / 4.0, y / 4.0), C64::new((1.0 - z) / 4.0, 0.0)],
        ]
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PovmDistribution {
    pub q: usize,
    /// Indexed by outcome string `k_0 k_1 … k_{q-1}` read as a base-4
    /// number with qubit 0's outcome most significant.
    pub probabilities: Vec<f64>,
    pub surrogate: ComplexitySurrogate,
}

impl PovmDistribution {
    /// 16-bit q, then each probability as a 32-bit fixed-point fraction.
    pub fn serialize(q: usize, probabilities: &[f64]) -> BitString {
        let mut out = BitString::with_capacity(16 + 32 * probabilities.len());
        out.push_bits(q as u64, 16);
        let scale = 2f64.powi(32);
        for &p in probabilities {
            let v = (p.clamp(0.0, 1.0) * scale).round().min(u32::MAX as f64) as u64;
            out.push_bits(v, 32);
        }
        out
    }
}

fn tensor_povm(rho: &DensityMatrix) -> Result<PovmDistribution> {
    let q = rho.qubits();
    if q > MAX_POVM_QUBITS {
        return Err(Error::cap(format!(
            "POVM on {q} qubits exceeds the cap of {MAX_POVM_QUBITS}"
        )));
    }
    let elements = povm_elements();
    // t[o][i][j]: outcomes so far `o`, remaining row `i`, remaining column `j`.
    let mut outcomes = 1usize;
    let mut side = rho.dim();
    let mut t: Vec<C64> = rho.matrix().transpose().iter().copied().collect(); // row-major
    for _ in 0..q {
        let half = side / 2;
        let mut next = vec![C64::new(0.0, 0.0); outcomes * 4 * half * half];
        for o in 0..outcomes {
            let block = &t[o * side * side..(o + 1) * side * side];
            for (k, m) in elements.iter().enumerate() {
                let dst = &mut next[(o * 4 + k) * half * half..(o * 4 + k + 1) * half * half];
                for a in 0..2 {
                    for b in 0..2 {
                        let w = m[a][b];
                        // contributes M[a][b]·ρ[(b,i)][(a,j)]
                        for i in 0..half {
                            let src = &block[(b * half + i) * side + a * half
                                ..(b * half + i) * side + a * half + half];
                            for (d, s) in dst[i * half..(i + 1) * half].iter_mut().zip(src) {
                                *d += w * s;
                            }
                        }
                    }
                }
            }
        }
        t = next;
        outcomes *= 4;
        side = half;
    }
    let probabilities: Vec<f64> = t.iter().map(|z| z.re.max(0.0)).collect();
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Numeric(format!("POVM probabilities sum to {total}")));
    }
    let surrogate = kcl_upper(&PovmDistribution::serialize(q, &probabilities));
    Ok(PovmDistribution {
        q,
        probabilities,
        surrogate,
    })
}

/// Outcome distribution of the tetrahedral POVM applied to every qubit.
pub fn povm_outcome_distribution(s: &StateVector) -> Result<PovmDistribution> {
    if s.qubits() > MAX_POVM_QUBITS {
        return Err(Error::cap(format!(
            "POVM on {} qubits exceeds the cap of {MAX_POVM_QUBITS}",
            s.qubits()
        )));
    }
    tensor_povm(&DensityMatrix::from_pure(s)?)
}

pub fn povm_outcome_distribution_density(rho: &DensityMatrix) -> Result<PovmDistribution> {
    tensor_povm(rho)
}
