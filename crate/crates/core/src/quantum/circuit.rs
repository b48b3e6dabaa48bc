use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::state::{StateVector, MAX_QUBITS};
use super::C64;
use crate::error::{Error, Result};

/// Rotation angle `2π·k / 2^bits`, the only angles the quantized basis can
/// express.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Angle {
    k: u64,
    bits: u8,
}

pub const MAX_ANGLE_BITS: u8 = 63;

impl Angle {
    pub fn new(k: u64, bits: u8) -> Result<Self> {
        if bits == 0 || bits > MAX_ANGLE_BITS {
            return Err(Error::input(format!(
                "angle precision must be 1..={MAX_ANGLE_BITS} bits, got {bits}"
            )));
        }
        if k >> bits != 0 {
            return Err(Error::input(format!(
                "angle numerator {k} does not fit in {bits} bits"
            )));
        }
        Ok(Angle { k, bits })
    }

    /// Nearest representable angle to `theta` (taken modulo 2π).
    pub fn from_radians(theta: f64, bits: u8) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::input("angle must be finite"));
        }
        Angle::new(0, bits)?;
        let turns = (theta / (2.0 * PI)).rem_euclid(1.0);
        let scale = (1u64 << bits) as f64;
        let k = (turns * scale).round() as u64 & ((1u64 << bits) - 1);
        Angle::new(k, bits)
    }

    /// Bits needed so the angle grid spacing is at most `2π·ε`:
    /// `ceil(log2(1/ε))`.
    pub fn precision_for(epsilon: f64) -> Result<u8> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::input(format!(
                "precision ε must lie in (0, 1), got {epsilon}"
            )));
        }
        let p = (1.0 / epsilon).log2().ceil().max(1.0);
        if p > MAX_ANGLE_BITS as f64 {
            return Err(Error::cap(format!("ε = {epsilon:e} needs {p} angle bits")));
        }
        Ok(p as u8)
    }

    pub fn numerator(&self) -> u64 {
        self.k
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn radians(&self) -> f64 {
        2.0 * PI * self.k as f64 / (1u64 << self.bits) as f64
    }
}

/// Opcodes in basis order; the discriminant is the encoded 6-bit opcode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Opcode {
    H = 0,
    X = 1,
    Z = 2,
    S = 3,
    T = 4,
    Cnot = 5,
    Ry = 6,
    Rz = 7,
}

impl Opcode {
    pub const ALL: [Opcode; 8] = [
        Opcode::H,
        Opcode::X,
        Opcode::Z,
        Opcode::S,
        Opcode::T,
        Opcode::Cnot,
        Opcode::Ry,
        Opcode::Rz,
    ];

    pub fn from_code(code: u8) -> Option<Opcode> {
        Opcode::ALL.get(code as usize).copied()
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Opcode::H => "h",
            Opcode::X => "x",
            Opcode::Z => "z",
            Opcode::S => "s",
            Opcode::T => "t",
            Opcode::Cnot => "cnot",
            Opcode::Ry => "ry",
            Opcode::Rz => "rz",
        }
    }

    pub fn from_name(name: &str) -> Option<Opcode> {
        Opcode::ALL.iter().copied().find(|op| op.name() == name)
    }

    pub fn arity(self) -> usize {
        if self == Opcode::Cnot {
            2
        } else {
            1
        }
    }

    pub fn parametrized(self) -> bool {
        matches!(self, Opcode::Ry | Opcode::Rz)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    S(usize),
    T(usize),
    Cnot { control: usize, target: usize },
    Ry { target: usize, angle: Angle },
    Rz { target: usize, angle: Angle },
}

impl Gate {
    /// Assembles a gate from its encoded parts.
    pub fn from_parts(op: Opcode, targets: &[usize], angle: Option<Angle>) -> Result<Gate> {
        if targets.len() != op.arity() {
            return Err(Error::input(format!(
                "{} takes {} qubit(s), got {}",
                op.name(),
                op.arity(),
                targets.len()
            )));
        }
        if angle.is_some() != op.parametrized() {
            return Err(Error::input(format!(
                "{} {} an angle",
                op.name(),
                if op.parametrized() {
                    "requires"
                } else {
                    "does not take"
                }
            )));
        }
        let t = targets[0];
        Ok(match op {
            Opcode::H => Gate::H(t),
            Opcode::X => Gate::X(t),
            Opcode::Z => Gate::Z(t),
            Opcode::S => Gate::S(t),
            Opcode::T => Gate::T(t),
            Opcode::Cnot => Gate::Cnot {
                control: t,
                target: targets[1],
            },
            Opcode::Ry => Gate::Ry {
                target: t,
                angle: angle.expect("checked above"),
            },
            Opcode::Rz => Gate::Rz {
                target: t,
                angle: angle.expect("checked above"),
            },
        })
    }

    pub fn opcode(&self) -> Opcode {
        match self {
            Gate::H(_) => Opcode::H,
            Gate::X(_) => Opcode::X,
            Gate::Z(_) => Opcode::Z,
            Gate::S(_) => Opcode::S,
            Gate::T(_) => Opcode::T,
            Gate::Cnot { .. } => Opcode::Cnot,
            Gate::Ry { .. } => Opcode::Ry,
            Gate::Rz { .. } => Opcode::Rz,
        }
    }

    /// Qubits acted on; for CNOT the control comes first.
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::H(t) | Gate::X(t) | Gate::Z(t) | Gate::S(t) | Gate::T(t) => vec![t],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Ry { target, .. } | Gate::Rz { target, .. } => vec![target],
        }
    }

    pub fn angle(&self) -> Option<Angle> {
        match *self {
            Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    fn matrix(&self) -> Option<[[C64; 2]; 2]> {
        let r = |x: f64| C64::new(x, 0.0);
        let zero = r(0.0);
        Some(match *self {
            Gate::H(_) => [
                [r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)],
                [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
            ],
            Gate::X(_) => [[zero, r(1.0)], [r(1.0), zero]],
            Gate::Z(_) => [[r(1.0), zero], [zero, r(-1.0)]],
            Gate::S(_) => [[r(1.0), zero], [zero, C64::new(0.0, 1.0)]],
            Gate::T(_) => [[r(1.0), zero], [zero, C64::from_polar(1.0, PI / 4.0)]],
            Gate::Ry { angle, .. } => {
                let (s, c) = (angle.radians() / 2.0).sin_cos();
                [[r(c), r(-s)], [r(s), r(c)]]
            }
            Gate::Rz { angle, .. } => {
                let half = angle.radians() / 2.0;
                [
                    [C64::from_polar(1.0, -half), zero],
                    [zero, C64::from_polar(1.0, half)],
                ]
            }
            Gate::Cnot { .. } => return None,
        })
    }
}

/// Which gate set a circuit draws from. The exact basis is
/// {H, X, Z, S, T, CNOT}; the quantized extension adds RY and RZ with angles
/// on a `p`-bit grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateBasis {
    Exact,
    QuantizedRotation { p: u8 },
}

impl GateBasis {
    pub fn flag(&self) -> u8 {
        match self {
            GateBasis::Exact => 0,
            GateBasis::QuantizedRotation { .. } => 1,
        }
    }

    pub fn angle_bits(&self) -> u8 {
        match self {
            GateBasis::Exact => 0,
            GateBasis::QuantizedRotation { p } => *p,
        }
    }

    pub fn from_parts(flag: u8, p: u8) -> Result<Self> {
        match (flag, p) {
            (0, 0) => Ok(GateBasis::Exact),
            (0, _) => Err(Error::input("exact basis must record angle precision 0")),
            (1, 1..=MAX_ANGLE_BITS) => Ok(GateBasis::QuantizedRotation { p }),
            (1, _) => Err(Error::input(format!(
                "rotation precision {p} outside 1..={MAX_ANGLE_BITS}"
            ))),
            _ => Err(Error::input(format!("unknown basis flag {flag}"))),
        }
    }

    pub fn allows(&self, op: Opcode) -> bool {
        !op.parametrized() || matches!(self, GateBasis::QuantizedRotation { .. })
    }
}

/// Largest register a circuit may declare (the encoding has a 16-bit field).
pub const MAX_CIRCUIT_QUBITS: usize = u16::MAX as usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    q: usize,
    basis: GateBasis,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(q: usize, basis: GateBasis) -> Result<Self> {
        if q == 0 || q > MAX_CIRCUIT_QUBITS {
            return Err(Error::input(format!(
                "qubit count must be 1..={MAX_CIRCUIT_QUBITS}, got {q}"
            )));
        }
        if let GateBasis::QuantizedRotation { p } = basis {
            GateBasis::from_parts(1, p)?;
        }
        Ok(Circuit {
            q,
            basis,
            gates: Vec::new(),
        })
    }

    pub fn exact(q: usize) -> Result<Self> {
        Circuit::new(q, GateBasis::Exact)
    }

    pub fn qubits(&self) -> usize {
        self.q
    }

    pub fn basis(&self) -> GateBasis {
        self.basis
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The circuit made of the first `t` gates.
    pub fn prefix(&self, t: usize) -> Circuit {
        Circuit {
            q: self.q,
            basis: self.basis,
            gates: self.gates[..t.min(self.gates.len())].to_vec(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let targets = gate.targets();
        for &t in &targets {
            if t >= self.q {
                return Err(Error::QubitOutOfRange {
                    index: t,
                    qubits: self.q,
                });
            }
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::input(format!(
                "two-qubit gate needs distinct qubits, got {} twice",
                targets[0]
            )));
        }
        if !self.basis.allows(gate.opcode()) {
            return Err(Error::input(format!(
                "{} is not in the exact-finite basis",
                gate.opcode().name()
            )));
        }
        if let Some(angle) = gate.angle() {
            if angle.bits() != self.basis.angle_bits() {
                return Err(Error::input(format!(
                    "angle has {} bits but the basis fixes {}",
                    angle.bits(),
                    self.basis.angle_bits()
                )));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn h(&mut self, t: usize) -> Result<&mut Self> {
        self.push(Gate::H(t))?;
        Ok(self)
    }

    pub fn x(&mut self, t: usize) -> Result<&mut Self> {
        self.push(Gate::X(t))?;
        Ok(self)
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.push(Gate::Cnot { control, target })?;
        Ok(self)
    }

    /// T† = T⁷, written as T·S·Z.
    pub fn tdg(&mut self, t: usize) -> Result<&mut Self> {
        self.push(Gate::T(t))?;
        self.push(Gate::S(t))?;
        self.push(Gate::Z(t))?;
        Ok(self)
    }

    /// Toffoli in the standard 6-CNOT Clifford+T form.
    pub fn toffoli(&mut self, c1: usize, c2: usize, t: usize) -> Result<&mut Self> {
        if c1 == c2 || c1 == t || c2 == t {
            return Err(Error::input("Toffoli needs three distinct qubits"));
        }
        self.h(t)?;
        self.cnot(c2, t)?;
        self.tdg(t)?;
        self.cnot(c1, t)?;
        self.push(Gate::T(t))?;
        self.cnot(c2, t)?;
        self.tdg(t)?;
        self.cnot(c1, t)?;
        self.push(Gate::T(c2))?;
        self.push(Gate::T(t))?;
        self.h(t)?;
        self.cnot(c1, c2)?;
        self.push(Gate::T(c1))?;
        self.tdg(c2)?;
        self.cnot(c1, c2)?;
        Ok(self)
    }

    /// Controlled SWAP of `a` and `b`.
    pub fn cswap(&mut self, control: usize, a: usize, b: usize) -> Result<&mut Self> {
        self.cnot(b, a)?;
        self.toffoli(control, a, b)?;
        self.cnot(b, a)?;
        Ok(self)
    }

    /// X on `target` conditioned on all `controls` being 1, as a V-chain of
    /// Toffolis through clean ancillas (`controls.len() − 2` of them), which
    /// are returned to `|0⟩`.
    pub fn mcx(
        &mut self,
        controls: &[usize],
        target: usize,
        ancillas: &[usize],
    ) -> Result<&mut Self> {
        let k = controls.len();
        match k {
            0 => return self.x(target),
            1 => return self.cnot(controls[0], target),
            2 => return self.toffoli(controls[0], controls[1], target),
            _ => {}
        }
        if ancillas.len() < k - 2 {
            return Err(Error::input(format!(
                "{k} controls need {} ancillas, got {}",
                k - 2,
                ancillas.len()
            )));
        }
        let chain = |c: &mut Circuit, j: usize| -> Result<()> {
            // j-th link: ancilla j ← control j+1 ∧ (ancilla j−1 or control 0)
            let prev = if j == 0 { controls[0] } else { ancillas[j - 1] };
            c.toffoli(controls[j + 1], prev, ancillas[j])?;
            Ok(())
        };
        for j in 0..k - 2 {
            chain(self, j)?;
        }
        self.toffoli(controls[k - 1], ancillas[k - 3], target)?;
        for j in (0..k - 2).rev() {
            chain(self, j)?;
        }
        Ok(self)
    }

    pub fn apply(&self, s0: &StateVector) -> Result<StateVector> {
        if s0.qubits() != self.q {
            return Err(Error::DimensionMismatch(self.q, s0.qubits()));
        }
        if self.q > MAX_QUBITS {
            return Err(Error::cap(format!(
                "cannot simulate {} qubits (cap {MAX_QUBITS})",
                self.q
            )));
        }
        let mut s = s0.clone();
        for g in &self.gates {
            apply_gate(&mut s, g);
        }
        Ok(s)
    }

    /// `apply` on `|0…0⟩`.
    pub fn run(&self) -> Result<StateVector> {
        self.apply(&StateVector::zero(self.q)?)
    }
}

fn apply_gate(s: &mut StateVector, g: &Gate) {
    let q = s.qubits();
    let amps = s.amplitudes_mut();
    let mask_of = |t: usize| 1usize << (q - 1 - t);
    if let Gate::Cnot { control, target } = *g {
        let (cm, tm) = (mask_of(control), mask_of(target));
        for i in 0..amps.len() {
            if i & cm != 0 && i & tm == 0 {
                amps.swap(i, i | tm);
            }
        }
        return;
    }
    let t = g.targets()[0];
    let stride = mask_of(t);
    let m = g.matrix().expect("single-qubit gate");
    let diagonal = m[0][1] == C64::new(0.0, 0.0) && m[1][0] == C64::new(0.0, 0.0);
    for block in amps.chunks_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        if diagonal {
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                *a *= m[0][0];
                *b *= m[1][1];
            }
        } else {
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m[0][0] * x + m[0][1] * y;
                *b = m[1][0] * x + m[1][1] * y;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::fidelity;
    use crate::rng::rng_from_seed;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::Rng;

    /// Dense `2^q × 2^q` matrix of one gate, built independently of the
    /// strided kernel.
    fn dense(q: usize, g: &Gate) -> DMatrix<C64> {
        let dim = 1 << q;
        let bit = |i: usize, t: usize| (i >> (q - 1 - t)) & 1;
        let mut u = DMatrix::zeros(dim, dim);
        if let Gate::Cnot { control, target } = *g {
            for i in 0..dim {
                let j = if bit(i, control) == 1 {
                    i ^ (1 << (q - 1 - target))
                } else {
                    i
                };
                u[(j, i)] = C64::new(1.0, 0.0);
            }
            return u;
        }
        let t = g.targets()[0];
        let m = g.matrix().unwrap();
        for i in 0..dim {
            for j in 0..dim {
                if (i ^ j) & !(1 << (q - 1 - t)) == 0 {
                    u[(i, j)] = m[bit(i, t)][bit(j, t)];
                }
            }
        }
        u
    }

    fn dense_apply(c: &Circuit, s: &StateVector) -> Vec<C64> {
        let mut v = nalgebra::DVector::from_vec(s.amplitudes().to_vec());
        for g in c.gates() {
            v = dense(c.qubits(), g) * v;
        }
        v.iter().copied().collect()
    }

    fn random_circuit<R: Rng>(q: usize, len: usize, rng: &mut R) -> Circuit {
        let mut c = Circuit::new(q, GateBasis::QuantizedRotation { p: 8 }).unwrap();
        for _ in 0..len {
            let op = Opcode::ALL[rng.random_range(0..8)];
            let a = rng.random_range(0..q);
            let targets = if op.arity() == 2 {
                let b = (a + rng.random_range(1..q)) % q;
                vec![a, b]
            } else {
                vec![a]
            };
            let angle = op
                .parametrized()
                .then(|| Angle::new(rng.random_range(0..256), 8).unwrap());
            c.push(Gate::from_parts(op, &targets, angle).unwrap())
                .unwrap();
        }
        c
    }

    #[test]
    fn hadamard_then_cnot_matches_dense_oracle() {
        let mut c = Circuit::exact(2).unwrap();
        c.h(0).unwrap().h(1).unwrap().cnot(0, 1).unwrap();
        let s = c.run().unwrap();
        let expected = dense_apply(&c, &StateVector::zero(2).unwrap());
        for (a, b) in s.amplitudes().iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
        // H⊗H|00⟩ is invariant under CNOT
        for a in s.amplitudes() {
            assert!((a - C64::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn single_hadamard_and_empty_circuit() {
        let s0 = StateVector::zero(1).unwrap();
        assert_eq!(Circuit::exact(1).unwrap().apply(&s0).unwrap(), s0);
        let mut c = Circuit::exact(1).unwrap();
        c.h(0).unwrap();
        let s = c.run().unwrap();
        assert!((s.amplitude(0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude(1).re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let mut c = Circuit::exact(2).unwrap();
        assert!(matches!(
            c.push(Gate::H(2)),
            Err(Error::QubitOutOfRange {
                index: 2,
                qubits: 2
            })
        ));
        assert!(c.cnot(1, 1).is_err());
        let angle = Angle::new(3, 4).unwrap();
        assert!(c.push(Gate::Ry { target: 0, angle }).is_err());
        let mut r = Circuit::new(1, GateBasis::QuantizedRotation { p: 5 }).unwrap();
        assert!(r.push(Gate::Ry { target: 0, angle }).is_err());
        assert!(Angle::new(16, 4).is_err());
        assert!(Gate::from_parts(Opcode::H, &[0], Some(angle)).is_err());
    }

    #[test]
    fn angle_quantization() {
        assert_eq!(Angle::precision_for(1e-3).unwrap(), 10);
        assert_eq!(Angle::precision_for(0.25).unwrap(), 2);
        let a = Angle::from_radians(PI / 2.0, 4).unwrap();
        assert_eq!(a.numerator(), 4);
        let b = Angle::from_radians(-PI / 2.0, 4).unwrap();
        assert_eq!(b.numerator(), 12);
        assert!((Angle::from_radians(2.0 * PI - 1e-9, 4).unwrap().radians()).abs() < 1e-12);
    }

    #[test]
    fn toffoli_truth_table() {
        for input in 0..8 {
            let mut c = Circuit::exact(3).unwrap();
            c.toffoli(0, 1, 2).unwrap();
            let out = c.apply(&StateVector::basis(3, input).unwrap()).unwrap();
            let expected = if input & 0b110 == 0b110 {
                input ^ 1
            } else {
                input
            };
            assert!(
                (out.amplitude(expected) - C64::new(1.0, 0.0)).norm() < 1e-12,
                "input {input}"
            );
        }
    }

    #[test]
    fn mcx_flips_only_on_all_ones_and_cleans_ancillas() {
        let k = 4;
        // qubits: controls 0..4, target 4, ancillas 5..7
        let q = 7;
        for input in 0..(1 << (k + 1)) {
            let mut c = Circuit::exact(q).unwrap();
            c.mcx(&[0, 1, 2, 3], 4, &[5, 6]).unwrap();
            let index = input << 2;
            let out = c.apply(&StateVector::basis(q, index).unwrap()).unwrap();
            let expected = if input >> 1 == 0b1111 {
                index ^ 0b100
            } else {
                index
            };
            assert!(
                (out.amplitude(expected).norm() - 1.0).abs() < 1e-10,
                "input {input:05b}"
            );
        }
    }

    #[test]
    fn cswap_swaps_when_control_set() {
        let mut c = Circuit::exact(3).unwrap();
        c.cswap(0, 1, 2).unwrap();
        let out = c.apply(&StateVector::basis(3, 0b110).unwrap()).unwrap();
        assert!((out.amplitude(0b101).norm() - 1.0).abs() < 1e-12);
        let out = c.apply(&StateVector::basis(3, 0b010).unwrap()).unwrap();
        assert!((out.amplitude(0b010).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_matches_dense_products() {
        let mut rng = rng_from_seed(11);
        for _ in 0..50 {
            let q = rng.random_range(2..5);
            let c = random_circuit(q, 12, &mut rng);
            let s = StateVector::random(q, &mut rng).unwrap();
            let fast = c.apply(&s).unwrap();
            for (a, b) in fast.amplitudes().iter().zip(dense_apply(&c, &s)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn circuits_preserve_norm(seed in any::<u64>(), q in 1usize..7, len in 0usize..40) {
            let mut rng = rng_from_seed(seed);
            let c = if q == 1 {
                let mut c = Circuit::new(1, GateBasis::QuantizedRotation { p: 8 }).unwrap();
                for _ in 0..len {
                    c.push(Gate::Ry { target: 0, angle: Angle::new(rng.random_range(0..256), 8).unwrap() }).unwrap();
                    c.push(Gate::T(0)).unwrap();
                }
                c
            } else {
                random_circuit(q, len, &mut rng)
            };
            let s = StateVector::random(q, &mut rng).unwrap();
            let out = c.apply(&s).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn prefix_then_rest_equals_whole(seed in any::<u64>(), cut in 0usize..20) {
            let mut rng = rng_from_seed(seed);
            let c = random_circuit(3, 20, &mut rng);
            let whole = c.run().unwrap();
            let mut rest = Circuit::new(3, c.basis()).unwrap();
            for g in &c.gates()[cut..] {
                rest.push(*g).unwrap();
            }
            let split = rest.apply(&c.prefix(cut).run().unwrap()).unwrap();
            prop_assert!(fidelity(&whole, &split).unwrap() > 1.0 - 1e-12);
        }
    }
}
