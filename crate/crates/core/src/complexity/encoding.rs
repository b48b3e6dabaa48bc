//! Bit-exact circuit serialization.
//!
//! Header: 8-bit format version, 16-bit qubit count, 8-bit basis flag
//! (0 exact, 1 quantized rotation), 8-bit angle precision `p` (0 for the
//! exact basis), 32-bit gate count. Each gate: 6-bit opcode, then
//! `ceil(log2 q)` bits per target qubit, then a `p`-bit angle numerator for
//! rotations. The stream is zero-padded to a whole byte.
//!
//! The container file is the 4-byte magic `QKCE` followed by the padded
//! payload bytes. The text form lists the same fields line by line.

use std::fmt::Write as _;

use crate::bits::{BitReader, BitString};
use crate::error::{Error, Result};
use crate::quantum::{Angle, Circuit, Gate, GateBasis, Opcode};

pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_BITS: usize = 8 + 16 + 8 + 8 + 32;
pub const OPCODE_BITS: usize = 6;
pub const CONTAINER_MAGIC: &[u8; 4] = b"QKCE";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitEncoding {
    pub format_version: u8,
    pub basis: GateBasis,
    /// Full bit stream, header included, padded to a byte boundary.
    pub payload: BitString,
}

/// Bits per qubit index: `ceil(log2 q)`.
pub fn target_bits(q: usize) -> usize {
    q.next_power_of_two().trailing_zeros() as usize
}

/// Unpadded length of a gate record.
pub fn gate_bits(op: Opcode, q: usize, basis: GateBasis) -> usize {
    OPCODE_BITS
        + op.arity() * target_bits(q)
        + if op.parametrized() {
            basis.angle_bits() as usize
        } else {
            0
        }
}

pub fn encode_circuit(c: &Circuit) -> CircuitEncoding {
    let q = c.qubits();
    let width = target_bits(q);
    let basis = c.basis();
    let mut out = BitString::with_capacity(HEADER_BITS + c.len() * 24);
    out.push_bits(FORMAT_VERSION as u64, 8);
    out.push_bits(q as u64, 16);
    out.push_bits(basis.flag() as u64, 8);
    out.push_bits(basis.angle_bits() as u64, 8);
    out.push_bits(c.len() as u64, 32);
    for g in c.gates() {
        out.push_bits(g.opcode().code() as u64, OPCODE_BITS);
        for t in g.targets() {
            out.push_bits(t as u64, width);
        }
        if let Some(a) = g.angle() {
            out.push_bits(a.numerator(), a.bits() as usize);
        }
    }
    out.pad_to_byte();
    CircuitEncoding {
        format_version: FORMAT_VERSION,
        basis,
        payload: out,
    }
}

pub fn decode_circuit(payload: &BitString) -> Result<Circuit> {
    let mut r = BitReader::new(payload);
    let version = r.read(8)? as u8;
    if version != FORMAT_VERSION {
        return Err(Error::decode(
            0,
            format!("unsupported format version {version}"),
        ));
    }
    let q = r.read(16)? as usize;
    if q == 0 {
        return Err(Error::decode(8, "qubit count is zero"));
    }
    let flag = r.read(8)? as u8;
    let p = r.read(8)? as u8;
    let basis = GateBasis::from_parts(flag, p).map_err(|e| Error::decode(24, e.to_string()))?;
    let count = r.read(32)? as usize;
    let width = target_bits(q);
    let mut c = Circuit::new(q, basis)?;
    for _ in 0..count {
        let at = r.position();
        let code = r.read(OPCODE_BITS)? as u8;
        let op = Opcode::from_code(code)
            .ok_or_else(|| Error::decode(at, format!("unknown opcode {code}")))?;
        let targets = (0..op.arity())
            .map(|_| r.read(width).map(|t| t as usize))
            .collect::<Result<Vec<_>>>()?;
        let angle = if op.parametrized() {
            if p == 0 {
                return Err(Error::decode(
                    at,
                    format!("{} in the exact basis", op.name()),
                ));
            }
            Some(Angle::new(r.read(p as usize)?, p)?)
        } else {
            None
        };
        let gate =
            Gate::from_parts(op, &targets, angle).map_err(|e| Error::decode(at, e.to_string()))?;
        c.push(gate).map_err(|e| Error::decode(at, e.to_string()))?;
    }
    let end = r.position();
    let padding = r.remaining();
    if padding >= 8 {
        return Err(Error::decode(
            end,
            format!("{padding} trailing bits after the last gate"),
        ));
    }
    if r.read(padding)? != 0 {
        return Err(Error::decode(end, "nonzero padding bits"));
    }
    Ok(c)
}

impl CircuitEncoding {
    pub fn decode(&self) -> Result<Circuit> {
        decode_circuit(&self.payload)
    }

    pub fn to_container(&self) -> Vec<u8> {
        let mut out = CONTAINER_MAGIC.to_vec();
        out.extend(self.payload.to_bytes());
        out
    }

    pub fn from_container(bytes: &[u8]) -> Result<Self> {
        let body = bytes
            .strip_prefix(CONTAINER_MAGIC.as_slice())
            .ok_or_else(|| Error::decode(0, "missing QKCE magic"))?;
        let payload = BitString::from_bytes(body, body.len() * 8)?;
        let c = decode_circuit(&payload).map_err(|e| match e {
            Error::Decode { offset, reason } => Error::decode(offset + 32, reason),
            other => other,
        })?;
        Ok(CircuitEncoding {
            format_version: FORMAT_VERSION,
            basis: c.basis(),
            payload,
        })
    }
}

/// Text form: `qkce 1`, `qubits <q>`, `basis exact` or `basis rotation <p>`,
/// then one gate per line (`h 0`, `cnot 0 1`, `ry 2 37` with the angle as
/// its numerator over `2^p`). `#` starts a comment.
pub fn circuit_to_text(c: &Circuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "qkce {FORMAT_VERSION}");
    let _ = writeln!(s, "qubits {}", c.qubits());
    match c.basis() {
        GateBasis::Exact => s.push_str("basis exact\n"),
        GateBasis::QuantizedRotation { p } => {
            let _ = writeln!(s, "basis rotation {p}");
        }
    }
    for g in c.gates() {
        s.push_str(g.opcode().name());
        for t in g.targets() {
            let _ = write!(s, " {t}");
        }
        if let Some(a) = g.angle() {
            let _ = write!(s, " {}", a.numerator());
        }
        s.push('\n');
    }
    s
}

pub fn circuit_from_text(text: &str) -> Result<Circuit> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let bad = |line: usize, msg: String| Error::input(format!("line {line}: {msg}"));
    let mut header = |key: &str| -> Result<(usize, Vec<String>)> {
        let (n, l) = lines
            .next()
            .ok_or_else(|| Error::input(format!("missing `{key}` line")))?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(bad(n, format!("expected `{key}`")));
        }
        Ok((n, parts.map(str::to_string).collect()))
    };
    let num = |line: usize, s: &str| -> Result<u64> {
        s.parse()
            .map_err(|_| bad(line, format!("not a number: {s:?}")))
    };

    let (n, v) = header("qkce")?;
    if v.len() != 1 || num(n, &v[0])? != FORMAT_VERSION as u64 {
        return Err(bad(n, format!("expected `qkce {FORMAT_VERSION}`")));
    }
    let (n, v) = header("qubits")?;
    if v.len() != 1 {
        return Err(bad(n, "expected `qubits <q>`".into()));
    }
    let q = num(n, &v[0])? as usize;
    let (n, v) = header("basis")?;
    let basis = match v.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["exact"] => GateBasis::Exact,
        ["rotation", p] => GateBasis::QuantizedRotation {
            p: u8::try_from(num(n, p)?).map_err(|_| bad(n, "precision too large".into()))?,
        },
        _ => {
            return Err(bad(
                n,
                "expected `basis exact` or `basis rotation <p>`".into(),
            ))
        }
    };
    let mut c = Circuit::new(q, basis)?;
    for (n, l) in lines {
        let mut parts = l.split_whitespace();
        let name = parts.next().expect("non-empty line");
        let op = Opcode::from_name(name).ok_or_else(|| bad(n, format!("unknown gate {name:?}")))?;
        let args = parts.map(|a| num(n, a)).collect::<Result<Vec<_>>>()?;
        let want = op.arity() + usize::from(op.parametrized());
        if args.len() != want {
            return Err(bad(n, format!("{name} takes {want} argument(s)")));
        }
        let targets: Vec<usize> = args[..op.arity()].iter().map(|&t| t as usize).collect();
        let angle = if op.parametrized() {
            Some(
                Angle::new(args[op.arity()], basis.angle_bits())
                    .map_err(|e| bad(n, e.to_string()))?,
            )
        } else {
            None
        };
        let gate = Gate::from_parts(op, &targets, angle).map_err(|e| bad(n, e.to_string()))?;
        c.push(gate).map_err(|e| bad(n, e.to_string()))?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_circuit(seed: u64, rotations: bool) -> Circuit {
        let mut rng = rng_from_seed(seed);
        let q = rng.random_range(1..40);
        let p = rng.random_range(1..=20);
        let basis = if rotations {
            GateBasis::QuantizedRotation { p }
        } else {
            GateBasis::Exact
        };
        let mut c = Circuit::new(q, basis).unwrap();
        let ops: Vec<Opcode> = Opcode::ALL
            .into_iter()
            .filter(|op| basis.allows(*op) && (q > 1 || op.arity() == 1))
            .collect();
        for _ in 0..rng.random_range(0..60) {
            let op = ops[rng.random_range(0..ops.len())];
            let a = rng.random_range(0..q);
            let targets = if op.arity() == 2 {
                vec![a, (a + rng.random_range(1..q)) % q]
            } else {
                vec![a]
            };
            let angle = op
                .parametrized()
                .then(|| Angle::new(rng.random_range(0..1u64 << p), p).unwrap());
            c.push(Gate::from_parts(op, &targets, angle).unwrap())
                .unwrap();
        }
        c
    }

    #[test]
    fn empty_circuit_is_header_only() {
        let e = encode_circuit(&Circuit::exact(2).unwrap());
        assert_eq!(e.payload.len(), HEADER_BITS);
        assert_eq!(e.payload.to_bytes(), vec![1, 0, 2, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn hand_encoded_bell_prefix() {
        let mut c = Circuit::exact(2).unwrap();
        c.h(0).unwrap().cnot(0, 1).unwrap();
        let e = encode_circuit(&c);
        let expected = [
            "00000001",
            "0000000000000010",
            "00000000",
            "00000000",
            "00000000000000000000000000000010",
            "000000", // H
            "0",
            "000101", // CNOT
            "0",
            "1",
            "0", // padding
        ]
        .concat();
        assert_eq!(e.payload.to_string(), expected);
        assert_eq!(e.payload.len(), 88);
        assert_eq!(e.decode().unwrap(), c);
    }

    #[test]
    fn rotation_gate_layout() {
        let mut c = Circuit::new(3, GateBasis::QuantizedRotation { p: 5 }).unwrap();
        c.push(Gate::Rz {
            target: 2,
            angle: Angle::new(19, 5).unwrap(),
        })
        .unwrap();
        let e = encode_circuit(&c);
        assert_eq!(
            e.payload.slice(HEADER_BITS, HEADER_BITS + 13).to_string(),
            "0001111010011"
        );
        assert_eq!(e.payload.read_bits(24, 16).unwrap(), 0x0105);
    }

    #[test]
    fn decode_errors_carry_offsets() {
        let mut c = Circuit::exact(2).unwrap();
        c.h(0).unwrap();
        let mut bits = encode_circuit(&c).payload;
        bits.set(HEADER_BITS, true); // opcode 32
        match decode_circuit(&bits) {
            Err(Error::Decode { offset, .. }) => assert_eq!(offset, HEADER_BITS),
            other => panic!("{other:?}"),
        }
        let truncated = encode_circuit(&c).payload.slice(0, 40);
        assert!(matches!(
            decode_circuit(&truncated),
            Err(Error::Decode { .. })
        ));
        let mut extra = encode_circuit(&c).payload;
        extra.push_bits(0, 8);
        assert!(decode_circuit(&extra).is_err());
    }

    #[test]
    fn container_roundtrip() {
        let c = random_circuit(3, true);
        let e = encode_circuit(&c);
        let bytes = e.to_container();
        assert_eq!(&bytes[..4], b"QKCE");
        assert_eq!(CircuitEncoding::from_container(&bytes).unwrap(), e);
        assert!(CircuitEncoding::from_container(b"QKCX").is_err());
    }

    #[test]
    fn text_form() {
        let mut c = Circuit::new(2, GateBasis::QuantizedRotation { p: 4 }).unwrap();
        c.h(0).unwrap().cnot(0, 1).unwrap();
        c.push(Gate::Ry {
            target: 1,
            angle: Angle::new(7, 4).unwrap(),
        })
        .unwrap();
        let text = circuit_to_text(&c);
        assert_eq!(
            text,
            "qkce 1\nqubits 2\nbasis rotation 4\nh 0\ncnot 0 1\nry 1 7\n"
        );
        assert_eq!(circuit_from_text(&text).unwrap(), c);
        assert!(circuit_from_text("qkce 1\nqubits 2\nbasis exact\nry 0 1\n").is_err());
        assert!(circuit_from_text("qkce 1\nqubits 2\nbasis exact\nfoo 0\n").is_err());
        let commented = "# bell\nqkce 1\nqubits 2\n\nbasis exact\nh 0 # first\ncnot 0 1\n";
        assert_eq!(circuit_from_text(commented).unwrap().len(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn roundtrip(seed in any::<u64>(), rotations in any::<bool>()) {
            let c = random_circuit(seed, rotations);
            let e = encode_circuit(&c);
            prop_assert_eq!(e.payload.len() % 8, 0);
            let raw: usize = HEADER_BITS + c.gates().iter().map(|g| gate_bits(g.opcode(), c.qubits(), c.basis())).sum::<usize>();
            prop_assert_eq!(e.payload.len(), raw.div_ceil(8) * 8);
            prop_assert_eq!(&decode_circuit(&e.payload).unwrap(), &c);
            prop_assert_eq!(&circuit_from_text(&circuit_to_text(&c)).unwrap(), &c);
        }
    }
}
