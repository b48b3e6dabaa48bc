//! Shannon prefix codes for sorted probability lists.
//!
//! Symbol `i` gets `l_i = ceil(log2(1/p_i))` bits: the leading bits of the
//! binary expansion of the cumulative probability of the symbols before it.
//! Cumulative sums are carried in 120-bit fixed point so the expansion bits
//! are exact for every probability a double can represent above `2^-64`.

use crate::bits::BitString;
use crate::error::{Error, Result};

pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;
pub const MAX_CODEWORD_BITS: usize = 64;

const FRACTION_BITS: u32 = 120;

#[derive(Clone, Debug, PartialEq)]
pub struct PrefixCode {
    pub codewords: Vec<BitString>,
    pub lengths: Vec<usize>,
}

impl PrefixCode {
    pub fn kraft_sum(&self) -> f64 {
        kraft_sum(&self.lengths)
    }

    pub fn is_prefix_free(&self) -> bool {
        is_prefix_free(&self.codewords)
    }
}

/// Smallest `l` with `2^-l <= p`, computed without logarithms.
pub fn shannon_length(p: f64) -> Result<usize> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::input(format!("probability {p} outside (0, 1]")));
    }
    let mut l = 0usize;
    let mut scale = 1.0f64;
    while scale > p {
        l += 1;
        scale *= 0.5;
        if l > MAX_CODEWORD_BITS {
            return Err(Error::cap(format!(
                "probability {p:e} needs more than {MAX_CODEWORD_BITS} codeword bits"
            )));
        }
    }
    Ok(l)
}

fn to_fixed(p: f64) -> u128 {
    // exact for p >= 2^-67 (53 mantissa bits inside 120 fraction bits)
    (p * 2f64.powi(FRACTION_BITS as i32)) as u128
}

pub fn shannon_code(p: &[f64]) -> Result<PrefixCode> {
    if p.is_empty() {
        return Err(Error::input("empty probability list"));
    }
    if let Some(bad) = p.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::input(format!(
            "probabilities must be positive, got {bad}"
        )));
    }
    if p.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::input(
            "probabilities must be sorted in descending order",
        ));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::input(format!("probabilities sum to {total}, not 1")));
    }

    let mut codewords = Vec::with_capacity(p.len());
    let mut lengths = Vec::with_capacity(p.len());
    let mut cumulative: u128 = 0;
    for &pi in p {
        let l = shannon_length(pi)?;
        let fraction = cumulative & ((1u128 << FRACTION_BITS) - 1);
        let word = if l == 0 {
            0
        } else {
            (fraction >> (FRACTION_BITS as usize - l)) as u64
        };
        codewords.push(BitString::from_u64(word, l));
        lengths.push(l);
        cumulative += to_fixed(pi);
    }
    let code = PrefixCode { codewords, lengths };
    // Sums that exceed 1 inside the tolerance can wrap the expansion; refuse
    // rather than hand back a colliding code.
    if !code.is_prefix_free() {
        return Err(Error::Numeric(
            "cumulative sums collide; distribution too far from normalized".into(),
        ));
    }
    Ok(code)
}

pub fn kraft_sum(lengths: &[usize]) -> f64 {
    lengths.iter().map(|&l| 2f64.powi(-(l as i32))).sum()
}

/// No codeword is a prefix of another. After sorting lexicographically, a
/// prefix relation can only hold between neighbours.
pub fn is_prefix_free(codewords: &[BitString]) -> bool {
    let mut words: Vec<String> = codewords.iter().map(|w| w.to_string()).collect();
    words.sort();
    words.windows(2).all(|w| !w[1].starts_with(w[0].as_str()))
}
