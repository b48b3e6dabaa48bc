//! Binary linear codes with measured distance.
//!
//! A code is stored as its `n × m` generator matrix over GF(2); the codeword
//! of message `x` is `x·G`. Message bit `i` selects row `i`, and bit 0 is the
//! leftmost character of the text form.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, splitmix64};

/// Exhaustive verification enumerates all `2^n` messages; this is the cap.
pub const EXHAUSTIVE_LIMIT: usize = 4096;
pub const MAX_HADAMARD_N: usize = 16;

/// Seed for sampled verification when the caller does not supply one.
pub const DEFAULT_VERIFY_SEED: u64 = 0x5EED_C0DE;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verification {
    Unverified,
    Exhaustive,
    Sampled { samples: usize },
}

impl Verification {
    pub fn label(&self) -> String {
        match self {
            Verification::Unverified => "unverified".to_string(),
            Verification::Exhaustive => "exhaustive".to_string(),
            Verification::Sampled { samples } => format!("sampled:{samples}"),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "unverified" => Ok(Verification::Unverified),
            "exhaustive" => Ok(Verification::Exhaustive),
            _ => s
                .strip_prefix("sampled:")
                .and_then(|k| k.parse().ok())
                .map(|samples| Verification::Sampled { samples })
                .ok_or_else(|| Error::input(format!("unknown verification mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearCode {
    pub name: String,
    n: usize,
    m: usize,
    generator: Vec<BitString>,
    delta_verified: Option<f64>,
    verification: Verification,
}

impl LinearCode {
    /// A code from generator rows; distance is left unverified.
    pub fn from_generator(name: impl Into<String>, generator: Vec<BitString>) -> Result<Self> {
        let n = generator.len();
        if n == 0 {
            return Err(Error::input("generator needs at least one row"));
        }
        let m = generator[0].len();
        if let Some(bad) = generator.iter().find(|r| r.len() != m) {
            return Err(Error::LengthMismatch {
                expected: m,
                got: bad.len(),
            });
        }
        if m < n {
            return Err(Error::input(format!(
                "codeword length {m} is shorter than message length {n}"
            )));
        }
        Ok(LinearCode {
            name: name.into(),
            n,
            m,
            generator,
            delta_verified: None,
            verification: Verification::Unverified,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn generator(&self) -> &[BitString] {
        &self.generator
    }

    pub fn delta_verified(&self) -> Option<f64> {
        self.delta_verified
    }

    pub fn verification(&self) -> Verification {
        self.verification
    }

    pub fn rate_c(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    /// `x·G` over GF(2).
    pub fn encode(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut out = BitString::zeros(self.m);
        for (i, row) in self.generator.iter().enumerate() {
            if x.get(i) {
                out.xor_assign(row)?;
            }
        }
        Ok(out)
    }

    /// Codeword bit `i` of message `x`.
    pub fn codeword_bit(&self, x: &BitString, i: usize) -> bool {
        (0..self.n)
            .filter(|&r| x.get(r) && self.generator[r].get(i))
            .count()
            % 2
            == 1
    }

    /// A message whose codeword is `w`, or `None` when `w` is not a codeword.
    pub fn message_for(&self, w: &BitString) -> Result<Option<BitString>> {
        if w.len() != self.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                got: w.len(),
            });
        }
        // Gaussian elimination that tracks which generator rows each reduced
        // row is made of.
        let mut basis: Vec<(usize, BitString, BitString)> = Vec::new();
        for (i, row) in self.generator.iter().enumerate() {
            let mut v = row.clone();
            let mut combo = BitString::zeros(self.n);
            combo.set(i, true);
            for (pivot, b, c) in &basis {
                if v.get(*pivot) {
                    v.xor_assign(b)?;
                    combo.xor_assign(c)?;
                }
            }
            if let Some(pivot) = (0..self.m).find(|&k| v.get(k)) {
                basis.push((pivot, v, combo));
            }
        }
        let mut residual = w.clone();
        let mut x = BitString::zeros(self.n);
        for (pivot, b, c) in &basis {
            if residual.get(*pivot) {
                residual.xor_assign(b)?;
                x.xor_assign(c)?;
            }
        }
        Ok(residual.is_zero().then_some(x))
    }

    pub fn is_codeword(&self, w: &BitString) -> Result<bool> {
        Ok(self.message_for(w)?.is_some())
    }

    /// Measures Δ and records it on the code.
    pub fn verified(mut self, mode: VerifyMode) -> Result<Self> {
        let delta = verify_distance(&self, mode)?;
        self.delta_verified = Some(delta);
        self.verification = match mode {
            VerifyMode::Exhaustive => Verification::Exhaustive,
            VerifyMode::Sampled { samples, .. } => Verification::Sampled { samples },
        };
        Ok(self)
    }

    pub fn descriptor(&self) -> CodeDescriptor {
        CodeDescriptor {
            name: self.name.clone(),
            n: self.n,
            m: self.m,
            generator: self
                .generator
                .iter()
                .map(|r| to_hex(&r.to_bytes()))
                .collect(),
            delta_verified: self.delta_verified,
            verification_mode: self.verification.label(),
        }
    }

    pub fn from_descriptor(d: &CodeDescriptor) -> Result<Self> {
        let rows = d
            .generator
            .iter()
            .map(|h| BitString::from_bytes(&from_hex(h)?, d.m))
            .collect::<Result<Vec<_>>>()?;
        let mut code = LinearCode::from_generator(d.name.clone(), rows)?;
        if code.n != d.n {
            return Err(Error::LengthMismatch {
                expected: d.n,
                got: code.n,
            });
        }
        code.verification = Verification::parse(&d.verification_mode)?;
        code.delta_verified = d.delta_verified;
        if code.delta_verified.is_some() == (code.verification == Verification::Unverified) {
            return Err(Error::input(
                "delta_verified must be present exactly when the code is verified",
            ));
        }
        Ok(code)
    }
}

/// Named code family, resolved against a message length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeSpec {
    Hadamard,
    Concatenated { c: usize },
}

impl CodeSpec {
    pub fn build(&self, n: usize) -> Result<LinearCode> {
        match *self {
            CodeSpec::Hadamard => hadamard_code(n),
            CodeSpec::Concatenated { c } => concatenated_code(n, c),
        }
    }

    pub fn id(&self) -> String {
        match self {
            CodeSpec::Hadamard => "hadamard".to_string(),
            CodeSpec::Concatenated { c } => format!("concatenated:{c}"),
        }
    }
}

impl std::str::FromStr for CodeSpec {
    type Err = Error;

    /// `hadamard` or `concatenated:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "hadamard" {
            return Ok(CodeSpec::Hadamard);
        }
        s.strip_prefix("concatenated:")
            .and_then(|c| c.parse().ok())
            .map(|c| CodeSpec::Concatenated { c })
            .ok_or_else(|| {
                Error::input(format!(
                    "unknown code {s:?} (expected hadamard or concatenated:<c>)"
                ))
            })
    }
}

/// Code descriptor file contents. Generator rows are hex strings of the
/// row bits packed MSB-first and zero padded to whole bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeDescriptor {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub generator: Vec<String>,
    pub delta_verified: Option<f64>,
    pub verification_mode: String,
}

fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn from_hex(s: &str) -> Result<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return Err(Error::input(format!("hex row has odd length {}", s.len())));
    }
    (0..s.len())
        .step_by(2)
        .map(|i| {
            u8::from_str_radix(&s[i..i + 2], 16)
                .map_err(|e| Error::input(format!("bad hex {:?}: {e}", &s[i..i + 2])))
        })
        .collect()
}

/// Δ = 1 − (minimum distance)/m. For a linear code the minimum distance is
/// the minimum weight over nonzero messages; a message mapping to the zero
/// word gives distance 0 and Δ = 1.
pub fn verify_distance(code: &LinearCode, mode: VerifyMode) -> Result<f64> {
    let min_weight = match mode {
        VerifyMode::Exhaustive => {
            if code.n >= usize::BITS as usize || 1usize << code.n > EXHAUSTIVE_LIMIT {
                return Err(Error::cap(format!(
                    "exhaustive verification needs 2^{} messages (limit {EXHAUSTIVE_LIMIT}); use sampled mode",
                    code.n
                )));
            }
            // Gray-code walk: each step flips one message bit, i.e. XORs one row.
            let mut word = BitString::zeros(code.m);
            let mut best = usize::MAX;
            for step in 1u64..1 << code.n {
                let row = step.trailing_zeros() as usize;
                word.xor_assign(&code.generator[row])?;
                best = best.min(word.count_ones());
            }
            best
        }
        VerifyMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::input(
                    "sampled verification needs at least one sample",
                ));
            }
            let mut rng = rng_from_seed(seed);
            let mut best = usize::MAX;
            let mut drawn = 0;
            while drawn < samples {
                let x = BitString::from_bools((0..code.n).map(|_| rng.random_bool(0.5)));
                if x.is_zero() {
                    continue;
                }
                best = best.min(code.encode(&x)?.count_ones());
                drawn += 1;
            }
            best
        }
    };
    Ok(1.0 - min_weight as f64 / code.m as f64)
}

/// Hadamard code: position `z ∈ {0,1}^n` carries `⟨x, z⟩ mod 2`, positions in
/// integer order of `z`. `m = 2^n` and Δ = 1/2.
pub fn hadamard_code(n: usize) -> Result<LinearCode> {
    if !(1..=MAX_HADAMARD_N).contains(&n) {
        return Err(Error::input(format!(
            "Hadamard code needs 1 <= n <= {MAX_HADAMARD_N}, got {n}"
        )));
    }
    let m = 1usize << n;
    let rows = (0..n)
        .map(|i| {
            let shift = n - 1 - i;
            BitString::from_bools((0..m).map(|z| (z >> shift) & 1 == 1))
        })
        .collect();
    let code = LinearCode::from_generator(format!("hadamard-{n}"), rows)?;
    if 1usize << n <= EXHAUSTIVE_LIMIT {
        code.verified(VerifyMode::Exhaustive)
    } else {
        code.verified(VerifyMode::Sampled {
            samples: EXHAUSTIVE_LIMIT,
            seed: DEFAULT_VERIFY_SEED,
        })
    }
}

/// Simplex code of dimension `k`: columns are the nonzero `k`-bit vectors in
/// integer order `1..2^k`.
pub fn simplex_code(k: usize) -> Result<LinearCode> {
    if !(1..=MAX_HADAMARD_N).contains(&k) {
        return Err(Error::input(format!(
            "simplex code needs 1 <= k <= {MAX_HADAMARD_N}, got {k}"
        )));
    }
    let rows = (0..k)
        .map(|i| {
            let shift = k - 1 - i;
            BitString::from_bools((1..1usize << k).map(|z| (z >> shift) & 1 == 1))
        })
        .collect();
    LinearCode::from_generator(format!("simplex-{k}"), rows)
}

/// Systematic code of rate `1/c`: the codeword is `c` blocks `x·B_j`, where
/// `B_0` is the identity and the other blocks are invertible `n × n` matrices
/// drawn from a generator seeded by `(n, c)`. Invertibility makes every block
/// of a nonzero message nonzero, so the minimum distance is at least `c`.
/// Δ is measured, never assumed.
pub fn concatenated_code(n: usize, c: usize) -> Result<LinearCode> {
    if n == 0 {
        return Err(Error::input("message length must be at least 1"));
    }
    if c < 2 {
        return Err(Error::input(format!(
            "rate factor c must be at least 2, got {c}"
        )));
    }
    let m = n
        .checked_mul(c)
        .ok_or_else(|| Error::input("code too long"))?;
    let mut rng = rng_from_seed(splitmix64(((n as u64) << 32) ^ c as u64));
    let mut rows: Vec<BitString> = vec![BitString::with_capacity(m); n];
    for block in 0..c {
        let b = if block == 0 {
            (0..n)
                .map(|i| BitString::from_bools((0..n).map(|j| i == j)))
                .collect()
        } else {
            random_invertible(n, &mut rng)
        };
        for (row, brow) in rows.iter_mut().zip(&b) {
            row.extend_from(brow);
        }
    }
    let code = LinearCode::from_generator(format!("concatenated-{n}x{c}"), rows)?;
    if n < usize::BITS as usize && 1usize << n <= EXHAUSTIVE_LIMIT {
        code.verified(VerifyMode::Exhaustive)
    } else {
        code.verified(VerifyMode::Sampled {
            samples: EXHAUSTIVE_LIMIT,
            seed: DEFAULT_VERIFY_SEED,
        })
    }
}

fn random_invertible<R: Rng>(n: usize, rng: &mut R) -> Vec<BitString> {
    loop {
        let rows: Vec<BitString> = (0..n)
            .map(|_| BitString::from_bools((0..n).map(|_| rng.random_bool(0.5))))
            .collect();
        if rank(&rows) == n {
            return rows;
        }
    }
}

fn rank(rows: &[BitString]) -> usize {
    let mut basis: Vec<(usize, BitString)> = Vec::new();
    for r in rows {
        let mut v = r.clone();
        for (pivot, b) in &basis {
            if v.get(*pivot) {
                v.xor_assign(b).expect("equal lengths");
            }
        }
        if let Some(p) = (0..v.len()).find(|&k| v.get(k)) {
            basis.push((p, v));
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn simplex_examples() {
        let code = simplex_code(3).unwrap();
        assert_eq!(code.encode(&bits("000")).unwrap(), bits("0000000"));
        assert_eq!(code.encode(&bits("100")).unwrap(), bits("0001111"));
        let delta = verify_distance(&code, VerifyMode::Exhaustive).unwrap();
        assert!((delta - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_examples() {
        let h1 = hadamard_code(1).unwrap();
        assert_eq!(h1.encode(&bits("0")).unwrap(), bits("00"));
        assert_eq!(h1.encode(&bits("1")).unwrap(), bits("01"));
        let h2 = hadamard_code(2).unwrap();
        assert_eq!(h2.encode(&bits("10")).unwrap(), bits("0011"));
        assert_eq!(h2.encode(&bits("01")).unwrap(), bits("0101"));
        assert_eq!(h2.encode(&bits("11")).unwrap(), bits("0110"));
        let h3 = hadamard_code(3).unwrap();
        assert_eq!(h3.delta_verified(), Some(0.5));
        assert_eq!(h3.verification(), Verification::Exhaustive);
        assert!(hadamard_code(0).is_err());
        assert!(hadamard_code(17).is_err());
    }

    #[test]
    fn exhaustive_mode_refuses_large_codes() {
        let code = hadamard_code(13).unwrap();
        assert!(matches!(code.verification(), Verification::Sampled { .. }));
        assert!(matches!(
            verify_distance(&code, VerifyMode::Exhaustive),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn concatenated_is_deterministic_and_measured() {
        let a = concatenated_code(4, 4).unwrap();
        let b = concatenated_code(4, 4).unwrap();
        assert_eq!(a.generator(), b.generator());
        assert_eq!(a.m(), 16);
        let d = a.delta_verified().unwrap();
        assert!((0.0..=1.0).contains(&d));
        // every block of a nonzero message is nonzero
        assert!(d <= 1.0 - 4.0 / 16.0 + 1e-12);

        let rep = concatenated_code(1, 5).unwrap();
        assert_eq!(rep.encode(&bits("1")).unwrap(), bits("11111"));
        assert_eq!(rep.delta_verified(), Some(0.0));
    }

    #[test]
    fn membership_recovers_messages() {
        let code = concatenated_code(5, 3).unwrap();
        let x = bits("10110");
        let w = code.encode(&x).unwrap();
        assert_eq!(code.message_for(&w).unwrap(), Some(x));
        let mut bad = w.clone();
        bad.set(0, !bad.get(0));
        assert!(!code.is_codeword(&bad).unwrap());
    }

    #[test]
    fn descriptor_roundtrip() {
        let code = simplex_code(3)
            .unwrap()
            .verified(VerifyMode::Exhaustive)
            .unwrap();
        let d = code.descriptor();
        assert_eq!(d.generator[0], "1e");
        assert_eq!(d.verification_mode, "exhaustive");
        let json = serde_json::to_string(&d).unwrap();
        let back: CodeDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(LinearCode::from_descriptor(&back).unwrap(), code);
    }

    #[test]
    fn code_spec_parsing() {
        assert_eq!("hadamard".parse::<CodeSpec>().unwrap(), CodeSpec::Hadamard);
        let c: CodeSpec = "concatenated:3".parse().unwrap();
        assert_eq!(c, CodeSpec::Concatenated { c: 3 });
        assert_eq!(c.id(), "concatenated:3");
        assert!("golay".parse::<CodeSpec>().is_err());
        assert_eq!(c.build(4).unwrap().m(), 12);
    }

    #[test]
    fn sampled_verification_records_count() {
        let code = hadamard_code(6)
            .unwrap()
            .verified(VerifyMode::Sampled {
                samples: 50,
                seed: 1,
            })
            .unwrap();
        assert_eq!(code.verification().label(), "sampled:50");
        assert_eq!(code.delta_verified(), Some(0.5));
    }

    proptest::proptest! {
        #[test]
        fn encoding_is_linear(n in 1usize..=10, c in 2usize..=4, a in proptest::prelude::any::<u64>(), b in proptest::prelude::any::<u64>()) {
            let x = BitString::from_u64(a & ((1 << n) - 1), n);
            let y = BitString::from_u64(b & ((1 << n) - 1), n);
            let mut xy = x.clone();
            xy.xor_assign(&y).unwrap();
            for code in [hadamard_code(n).unwrap(), concatenated_code(n, c).unwrap()] {
                let mut sum = code.encode(&x).unwrap();
                sum.xor_assign(&code.encode(&y).unwrap()).unwrap();
                proptest::prop_assert_eq!(code.encode(&xy).unwrap(), sum);
            }
        }
    }
}
