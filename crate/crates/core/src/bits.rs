//! Packed bit strings.
//!
//! Bit `i` of a [`BitString`] is the `i`-th character of its text form, so the
//! text `"0011"` has bit 0 = 0 and bit 3 = 1. When packed into bytes the first
//! bit lands in the most significant position of the first byte.

use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn mask(i: usize) -> u64 {
    1u64 << (63 - (i % 64))
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitString {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = BitString::new();
        for b in bits {
            s.push(b);
        }
        s
    }

    /// The `width` low bits of `value`, most significant first.
    pub fn from_u64(value: u64, width: usize) -> Self {
        let mut s = BitString::with_capacity(width);
        s.push_bits(value, width);
        s
    }

    /// Unpacks the first `len` bits of `bytes`.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if len > bytes.len() * 8 {
            return Err(Error::LengthMismatch {
                expected: len.div_ceil(8),
                got: bytes.len(),
            });
        }
        let mut s = BitString::with_capacity(len);
        for i in 0..len {
            s.push(bytes[i / 8] & (0x80 >> (i % 8)) != 0);
        }
        Ok(s)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / 64] & mask(i) != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        if value {
            self.words[i / 64] |= mask(i);
        } else {
            self.words[i / 64] &= !mask(i);
        }
    }

    #[inline]
    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        if value {
            let i = self.len - 1;
            self.words[i / 64] |= mask(i);
        }
    }

    /// Appends the `width` low bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: usize) {
        assert!(width <= 64);
        for k in (0..width).rev() {
            self.push((value >> k) & 1 == 1);
        }
    }

    pub fn extend_from(&mut self, other: &BitString) {
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    /// Reads `width` bits starting at `offset` as an unsigned integer.
    pub fn read_bits(&self, offset: usize, width: usize) -> Result<u64> {
        if width > 64 {
            return Err(Error::input("cannot read more than 64 bits at once"));
        }
        if offset + width > self.len {
            return Err(Error::decode(
                offset,
                format!(
                    "need {width} bits, {} left",
                    self.len.saturating_sub(offset)
                ),
            ));
        }
        let mut v = 0u64;
        for i in offset..offset + width {
            v = (v << 1) | u64::from(self.get(i));
        }
        Ok(v)
    }

    /// Integer value of the whole string, most significant bit first.
    pub fn to_u64(&self) -> Result<u64> {
        self.read_bits(0, self.len)
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        assert!(start <= end && end <= self.len);
        BitString::from_bools((start..end).map(|i| self.get(i)))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn hamming_distance(&self, other: &BitString) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                got: other.len,
            });
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// In-place XOR with an equal-length string.
    pub fn xor_assign(&mut self, other: &BitString) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                got: other.len,
            });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Packs into bytes, first bit in the MSB of byte 0, zero padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for (i, b) in self.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    /// Pads with zeros up to the next multiple of 8 bits.
    pub fn pad_to_byte(&mut self) {
        while !self.len.is_multiple_of(8) {
            self.push(false);
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitString) -> Result<bool> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                got: other.len,
            });
        }
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones % 2 == 1)
    }
}

impl BitXor for &BitString {
    type Output = BitString;

    /// Panics on length mismatch; use [`BitString::xor_assign`] for a checked form.
    fn bitxor(self, rhs: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_assign(rhs)
            .expect("xor of unequal-length bit strings");
        out
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({}:\"{self}\")", self.len)
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = BitString::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                other => {
                    return Err(Error::input(format!(
                        "invalid bit character {other:?} at position {i}"
                    )))
                }
            }
        }
        Ok(out)
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sequential reader over a [`BitString`], used by the binary decoders.
pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a BitString) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read(&mut self, width: usize) -> Result<u64> {
        let v = self.bits.read_bits(self.pos, width)?;
        self.pos += width;
        Ok(v)
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        Ok(self.read(1)? == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip_and_positions() {
        let s: BitString = "0011".parse().unwrap();
        assert_eq!(s.len(), 4);
        assert!(!s.get(0));
        assert!(s.get(3));
        assert_eq!(s.to_string(), "0011");
        assert_eq!(s.to_u64().unwrap(), 3);
    }

    #[test]
    fn rejects_bad_characters() {
        assert!("01x1".parse::<BitString>().is_err());
    }

    #[test]
    fn bytes_are_msb_first_and_padded() {
        let s: BitString = "1000000011".parse().unwrap();
        assert_eq!(s.to_bytes(), vec![0x80, 0xC0]);
        assert_eq!(BitString::from_bytes(&[0x80, 0xC0], 10).unwrap(), s);
    }

    #[test]
    fn crosses_word_boundaries() {
        let mut s = BitString::zeros(130);
        s.set(63, true);
        s.set(64, true);
        s.set(129, true);
        assert_eq!(s.count_ones(), 3);
        assert_eq!(s.read_bits(62, 4).unwrap(), 0b0110);
        let t = s.slice(60, 70);
        assert_eq!(t.to_string(), "0001100000");
    }

    #[test]
    fn xor_distance_and_dot() {
        let a: BitString = "1100".parse().unwrap();
        let b: BitString = "1010".parse().unwrap();
        assert_eq!((&a ^ &b).to_string(), "0110");
        assert_eq!(a.hamming_distance(&b).unwrap(), 2);
        assert!(a.dot(&b).unwrap());
        assert!(a.hamming_distance(&BitString::zeros(3)).is_err());
    }

    #[test]
    fn reader_reports_offset_on_underrun() {
        let s = BitString::from_u64(0b101, 3);
        let mut r = BitReader::new(&s);
        assert_eq!(r.read(2).unwrap(), 0b10);
        match r.read(2) {
            Err(Error::Decode { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
