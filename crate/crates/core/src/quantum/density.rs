use nalgebra::DMatrix;
use rand::Rng;

use super::state::StateVector;
use super::{C64, EIGEN_FLOOR, NORM_TOL};
use crate::error::{Error, Result};

/// Largest register held as a dense density matrix.
pub const MAX_DENSITY_QUBITS: usize = 10;

/// Singular values at or below this count as zero in Schmidt ranks.
pub const SCHMIDT_TOL: f64 = 1e-9;

/// Eigenvalues below this are round-off and are dropped before square
/// roots, where noise of order 1e-16 would otherwise grow to 1e-8.
const ROUNDOFF: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    q: usize,
    m: DMatrix<C64>,
}

fn check_density_qubits(q: usize) -> Result<()> {
    if q > MAX_DENSITY_QUBITS {
        return Err(Error::cap(format!(
            "{q}-qubit density matrix exceeds the cap of {MAX_DENSITY_QUBITS}"
        )));
    }
    Ok(())
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() {
            return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
        }
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::input(format!(
                "dimension {dim} is not a power of two"
            )));
        }
        let q = dim.trailing_zeros() as usize;
        check_density_qubits(q)?;
        let herm_err = (&m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm_err > NORM_TOL {
            return Err(Error::Numeric(format!(
                "matrix is not Hermitian (max deviation {herm_err:e})"
            )));
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::Numeric(format!("trace is {trace}, expected 1")));
        }
        let rho = DensityMatrix { q, m };
        let min = rho
            .eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -EIGEN_FLOOR {
            return Err(Error::Numeric(format!(
                "matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    pub fn from_pure(s: &StateVector) -> Result<Self> {
        check_density_qubits(s.qubits())?;
        let v = nalgebra::DVector::from_column_slice(s.amplitudes());
        Ok(DensityMatrix {
            q: s.qubits(),
            m: &v * v.adjoint(),
        })
    }

    pub fn maximally_mixed(q: usize) -> Result<Self> {
        check_density_qubits(q)?;
        let dim = 1usize << q;
        Ok(DensityMatrix {
            q,
            m: DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0)),
        })
    }

    /// Random mixed state `Σ w_i |ψ_i⟩⟨ψ_i|` of the given rank with
    /// Haar-random components and uniform-simplex weights.
    pub fn random<R: Rng + ?Sized>(q: usize, rank: usize, rng: &mut R) -> Result<Self> {
        check_density_qubits(q)?;
        if rank == 0 {
            return Err(Error::input("rank must be at least 1"));
        }
        let dim = 1usize << q;
        let weights: Vec<f64> = (0..rank)
            .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
            .collect();
        let total: f64 = weights.iter().sum();
        let mut m = DMatrix::zeros(dim, dim);
        for w in weights {
            let psi = StateVector::random(q, rng)?;
            let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
            m += (&v * v.adjoint()) * C64::new(w / total, 0.0);
        }
        Ok(DensityMatrix { q, m })
    }

    pub fn qubits(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .hermitian()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Eigenpairs sorted by descending eigenvalue.
    pub fn eigen(&self) -> Vec<(f64, Vec<C64>)> {
        let e = self.hermitian().symmetric_eigen();
        let mut pairs: Vec<(f64, Vec<C64>)> = e
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| (l, e.eigenvectors.column(k).iter().copied().collect()))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        pairs
    }

    fn hermitian(&self) -> DMatrix<C64> {
        (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_deviation(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok((&self.m - &other.m)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    fn sqrt(&self) -> Result<DMatrix<C64>> {
        let e = self.hermitian().symmetric_eigen();
        let mut roots = Vec::with_capacity(self.dim());
        for &l in e.eigenvalues.iter() {
            if l < -EIGEN_FLOOR {
                return Err(Error::Numeric(format!(
                    "density matrix has negative eigenvalue {l:e}"
                )));
            }
            roots.push(C64::new(if l > ROUNDOFF { l.sqrt() } else { 0.0 }, 0.0));
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(roots));
        Ok(&e.eigenvectors * d * e.eigenvectors.adjoint())
    }
}

/// Sorted, deduplicated, in-range qubit list.
fn check_subset(keep: &[usize], q: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::input("qubit set must be nonempty"));
    }
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    if k.len() != keep.len() {
        return Err(Error::input("qubit set has duplicates"));
    }
    if let Some(&bad) = k.iter().find(|&&i| i >= q) {
        return Err(Error::QubitOutOfRange {
            index: bad,
            qubits: q,
        });
    }
    Ok(k)
}

/// Splits every basis index of a `q`-qubit register into (kept part, rest),
/// each packed in ascending qubit order.
fn split_indices(q: usize, keep: &[usize]) -> Vec<(usize, usize)> {
    let kept_mask: Vec<bool> = (0..q).map(|j| keep.binary_search(&j).is_ok()).collect();
    (0..1usize << q)
        .map(|i| {
            let (mut a, mut b) = (0usize, 0usize);
            for (j, &kept) in kept_mask.iter().enumerate() {
                let bit = (i >> (q - 1 - j)) & 1;
                if kept {
                    a = (a << 1) | bit;
                } else {
                    b = (b << 1) | bit;
                }
            }
            (a, b)
        })
        .collect()
}

/// Amplitudes reshaped into a `2^|rows| × 2^(q−|rows|)` matrix.
fn reshape(s: &StateVector, rows: &[usize]) -> DMatrix<C64> {
    let q = s.qubits();
    let mut a = DMatrix::zeros(1 << rows.len(), 1 << (q - rows.len()));
    for (i, (r, c)) in split_indices(q, rows).into_iter().enumerate() {
        a[(r, c)] = s.amplitude(i);
    }
    a
}

/// States that can be reduced to a subset of their qubits.
pub trait PartialTrace {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix>;
}

impl PartialTrace for StateVector {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = check_subset(keep, self.qubits())?;
        check_density_qubits(keep.len())?;
        let a = reshape(self, &keep);
        Ok(DensityMatrix {
            q: keep.len(),
            m: &a * a.adjoint(),
        })
    }
}

impl PartialTrace for DensityMatrix {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = check_subset(keep, self.q)?;
        let split = split_indices(self.q, &keep);
        let kdim = 1usize << keep.len();
        // full index from (kept, rest)
        let mut compose = vec![0usize; self.dim()];
        let rest_dim = self.dim() / kdim;
        for (i, &(a, b)) in split.iter().enumerate() {
            compose[a * rest_dim + b] = i;
        }
        let mut out = DMatrix::zeros(kdim, kdim);
        for (i, &(a, b)) in split.iter().enumerate() {
            for c in 0..kdim {
                out[(a, c)] += self.m[(i, compose[c * rest_dim + b])];
            }
        }
        Ok(DensityMatrix {
            q: keep.len(),
            m: out,
        })
    }
}

/// Reduced state on the qubits in `keep`, in ascending qubit order.
pub fn partial_trace<S: PartialTrace + ?Sized>(s: &S, keep: &[usize]) -> Result<DensityMatrix> {
    s.partial_trace(keep)
}

/// `F(r, s) = tr √(√r s √r)`.
pub fn uhlmann_fidelity(r: &DensityMatrix, s: &DensityMatrix) -> Result<f64> {
    if r.dim() != s.dim() {
        return Err(Error::DimensionMismatch(r.dim(), s.dim()));
    }
    let root = r.sqrt()?;
    let inner = DensityMatrix {
        q: r.q,
        m: &root * &s.m * &root,
    };
    let mut f = 0.0;
    for l in inner.eigenvalues() {
        if l < -EIGEN_FLOOR {
            return Err(Error::Numeric(format!(
                "second argument is not positive (eigenvalue {l:e})"
            )));
        }
        if l > ROUNDOFF {
            f += l.sqrt();
        }
    }
    Ok(f.min(1.0))
}

/// Number of Schmidt coefficients across the cut `partition | rest`.
pub fn schmidt_rank(s: &StateVector, partition: &[usize]) -> Result<usize> {
    let part = check_subset(partition, s.qubits())?;
    if part.len() == s.qubits() {
        return Err(Error::input(
            "partition must be a proper subset of the qubits",
        ));
    }
    let a = reshape(s, &part);
    Ok(a.singular_values()
        .iter()
        .filter(|&&v| v > SCHMIDT_TOL)
        .count()
        .max(1))
}
