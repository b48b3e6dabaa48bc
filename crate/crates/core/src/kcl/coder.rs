//! Binary arithmetic coder with bit-granular output.
//!
//! Integer coder in the Witten–Neal–Cleary style with 32-bit registers and
//! 16-bit probabilities. Termination emits two bits plus pending bits; the
//! decoder treats everything past the end of its input as zeros.

use crate::bits::BitString;

const TOP: u64 = 0xFFFF_FFFF;
const HALF: u64 = 0x8000_0000;
const QUARTER: u64 = 0x4000_0000;
const THREE_QUARTERS: u64 = 0xC000_0000;

pub const PROB_BITS: u32 = 16;
pub const PROB_ONE: u32 = 1 << PROB_BITS;

/// Adaptive probability that the next bit is 1, from halved KT counts.
#[derive(Clone, Copy, Debug, Default)]
pub struct BitModel {
    n0: u32,
    n1: u32,
}

impl BitModel {
    const LIMIT: u32 = 255;
    const MIN_P: u32 = 24;

    /// P(bit = 1) in units of 2^-16, clamped away from 0 and 1.
    #[inline]
    pub fn p1(&self) -> u32 {
        let num = (2 * self.n1 as u64 + 1) << PROB_BITS;
        let den = 2 * (self.n0 + self.n1) as u64 + 2;
        ((num / den) as u32).clamp(Self::MIN_P, PROB_ONE - Self::MIN_P)
    }

    #[inline]
    pub fn update(&mut self, bit: bool) {
        if bit {
            self.n1 += 1;
        } else {
            self.n0 += 1;
        }
        if self.n0 + self.n1 > Self::LIMIT {
            self.n0 = self.n0.div_ceil(2);
            self.n1 = self.n1.div_ceil(2);
        }
    }

    /// Ideal code length of `bit` under the current state, in bits.
    #[inline]
    pub fn cost(&self, bit: bool) -> f64 {
        let p1 = self.p1() as f64 / PROB_ONE as f64;
        -(if bit { p1 } else { 1.0 - p1 }).log2()
    }
}

pub struct Encoder {
    low: u64,
    high: u64,
    pending: u64,
    out: BitString,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Encoder {
            low: 0,
            high: TOP,
            pending: 0,
            out: BitString::new(),
        }
    }

    fn emit(&mut self, bit: bool) {
        self.out.push(bit);
        for _ in 0..self.pending {
            self.out.push(!bit);
        }
        self.pending = 0;
    }

    /// Codes `bit` with P(1) = `p1` / 2^16.
    pub fn encode(&mut self, bit: bool, p1: u32) {
        let range = self.high - self.low + 1;
        let p0 = (PROB_ONE - p1) as u64;
        let split = self.low + ((range * p0) >> PROB_BITS) - 1;
        if bit {
            self.low = split + 1;
        } else {
            self.high = split;
        }
        loop {
            if self.high < HALF {
                self.emit(false);
            } else if self.low >= HALF {
                self.emit(true);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    /// Codes with an adaptive model and updates it.
    pub fn encode_with(&mut self, bit: bool, model: &mut BitModel) {
        self.encode(bit, model.p1());
        model.update(bit);
    }

    pub fn finish(mut self) -> BitString {
        self.pending += 1;
        if self.low < QUARTER {
            self.emit(false);
        } else {
            self.emit(true);
        }
        self.out
    }
}

pub struct Decoder<'a> {
    input: &'a BitString,
    pos: usize,
    low: u64,
    high: u64,
    value: u64,
}

impl<'a> Decoder<'a> {
    pub fn new(input: &'a BitString, start: usize) -> Self {
        let mut d = Decoder {
            input,
            pos: start,
            low: 0,
            high: TOP,
            value: 0,
        };
        for _ in 0..32 {
            d.value = (d.value << 1) | d.next_bit();
        }
        d
    }

    fn next_bit(&mut self) -> u64 {
        let b = if self.pos < self.input.len() {
            u64::from(self.input.get(self.pos))
        } else {
            0
        };
        self.pos += 1;
        b
    }

    pub fn decode(&mut self, p1: u32) -> bool {
        let range = self.high - self.low + 1;
        let p0 = (PROB_ONE - p1) as u64;
        let split = self.low + ((range * p0) >> PROB_BITS) - 1;
        let bit = self.value > split;
        if bit {
            self.low = split + 1;
        } else {
            self.high = split;
        }
        loop {
            if self.high < HALF {
                // nothing to subtract
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.value -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.value -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.value = (self.value << 1) | self.next_bit();
        }
        bit
    }

    pub fn decode_with(&mut self, model: &mut BitModel) -> bool {
        let bit = self.decode(model.p1());
        model.update(bit);
        bit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roundtrip_with_fixed_and_adaptive_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bits: Vec<bool> = (0..5000).map(|_| rng.random_bool(0.2)).collect();
        let probs: Vec<u32> = (0..5000).map(|_| rng.random_range(30..65500)).collect();

        let mut enc = Encoder::new();
        let mut m = BitModel::default();
        for (i, &b) in bits.iter().enumerate() {
            if i % 2 == 0 {
                enc.encode(b, probs[i]);
            } else {
                enc.encode_with(b, &mut m);
            }
        }
        let out = enc.finish();

        let mut dec = Decoder::new(&out, 0);
        let mut m = BitModel::default();
        for (i, &b) in bits.iter().enumerate() {
            let got = if i % 2 == 0 {
                dec.decode(probs[i])
            } else {
                dec.decode_with(&mut m)
            };
            assert_eq!(got, b, "mismatch at {i}");
        }
    }

    #[test]
    fn skewed_source_codes_near_entropy() {
        let mut enc = Encoder::new();
        let mut m = BitModel::default();
        for i in 0..4000 {
            enc.encode_with(i % 50 == 0, &mut m);
        }
        let out = enc.finish();
        // H(0.02) * 4000 ~ 566 bits
        assert!(out.len() < 700, "{}", out.len());
    }
}
