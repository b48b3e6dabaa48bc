use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{C64, NORM_TOL};
use crate::error::{Error, Result};

/// Largest register the statevector simulator accepts.
pub const MAX_QUBITS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    q: usize,
    amps: Vec<C64>,
}

fn check_qubits(q: usize) -> Result<()> {
    if q > MAX_QUBITS {
        return Err(Error::cap(format!(
            "{q} qubits exceeds the statevector cap of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl StateVector {
    /// `|0…0⟩` on `q` qubits.
    pub fn zero(q: usize) -> Result<Self> {
        Self::basis(q, 0)
    }

    pub fn basis(q: usize, index: usize) -> Result<Self> {
        check_qubits(q)?;
        let dim = 1usize << q;
        if index >= dim {
            return Err(Error::input(format!(
                "basis index {index} out of range for {q} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { q, amps })
    }

    /// Takes amplitudes that must already be normalized.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let s = Self::from_raw(amps)?;
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Numeric(format!("state norm² is {norm}, expected 1")));
        }
        Ok(s)
    }

    /// Takes arbitrary nonzero amplitudes and rescales them to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let mut s = Self::from_raw(amps)?;
        let norm = s.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numeric(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        for a in &mut s.amps {
            *a /= norm;
        }
        Ok(s)
    }

    fn from_raw(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::input(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let q = dim.trailing_zeros() as usize;
        check_qubits(q)?;
        Ok(StateVector { q, amps })
    }

    /// Haar-random pure state: normalized complex Gaussian vector.
    pub fn random<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Result<Self> {
        check_qubits(q)?;
        let amps = (0..1usize << q)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps)
    }

    pub fn qubits(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `self ⊗ other`; `self` occupies the leading (most significant) qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        check_qubits(self.q + other.q)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(StateVector {
            q: self.q + other.q,
            amps,
        })
    }

    /// `[re, im]` pairs in basis-rank order, the statevector dump layout.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.amps.iter().map(|a| [a.re, a.im]).collect()
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        Self::from_amplitudes(pairs.iter().map(|p| C64::new(p[0], p[1])).collect())
    }
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        StateVector::from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

/// `⟨a|b⟩`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::zero(1).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let plus = StateVector::from_amplitudes(vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        assert_eq!(fidelity(&zero, &zero).unwrap(), 1.0);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            fidelity(&zero, &StateVector::zero(2).unwrap()),
            Err(Error::DimensionMismatch(2, 4))
        ));
    }

    #[test]
    fn caps_and_validation() {
        assert!(matches!(StateVector::zero(21), Err(Error::CapExceeded(_))));
        assert!(StateVector::from_amplitudes(vec![C64::new(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![C64::new(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn random_states_are_normalized_and_seeded() {
        let a = StateVector::random(5, &mut rng_from_seed(3)).unwrap();
        let b = StateVector::random(5, &mut rng_from_seed(3)).unwrap();
        assert_eq!(a, b);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_puts_left_factor_first() {
        let one = StateVector::basis(1, 1).unwrap();
        let zero = StateVector::zero(1).unwrap();
        let s = one.tensor(&zero).unwrap();
        assert_eq!(s.amplitude(2), C64::new(1.0, 0.0));
    }

    #[test]
    fn json_dump_roundtrip() {
        let s = StateVector::random(3, &mut rng_from_seed(9)).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.starts_with("[["));
        let back: StateVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
