//! Bit-level LZ77 with adaptive arithmetic coding and an optional reversible
//! pre-filter (XOR-delta or word-wise difference) at a fixed stride.
//!
//! Stream layout (coded mode, after the mode bit): the filter descriptor,
//! `gamma(len + 1)`, then arithmetic-coded ops over the
//! filtered bits. Each op is a literal bit or a back-reference
//! `(distance, length, inverted)`; a reference may reuse the previous distance,
//! and an inverted reference copies the complement of the source bits.

use std::collections::HashMap;

use super::coder::{BitModel, Decoder, Encoder};
use crate::bits::{BitReader, BitString};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Params {
    /// Literal bits are modelled with this many preceding bits as context.
    pub(crate) lit_order: usize,
    /// Largest stride tried for the pre-filters; 0 disables them.
    pub(crate) max_stride: usize,
    /// How many of the best-scoring strides get a full trial compression.
    pub(crate) stride_trials: usize,
    pub(crate) min_match: usize,
    /// Distances up to this bound are searched exhaustively.
    pub(crate) short_window: usize,
    pub(crate) hash_bits: usize,
    pub(crate) chain_limit: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            lit_order: 0,
            max_stride: 96,
            stride_trials: 2,
            min_match: 2,
            short_window: 64,
            hash_bits: 16,
            chain_limit: 256,
        }
    }
}

fn put_gamma(out: &mut BitString, v: u64) {
    debug_assert!(v >= 1);
    let nb = 64 - v.leading_zeros() as usize;
    for _ in 1..nb {
        out.push(false);
    }
    out.push_bits(v, nb);
}

fn get_gamma(r: &mut BitReader<'_>) -> Result<u64> {
    let mut zeros = 0;
    while !r.read_bit()? {
        zeros += 1;
        if zeros > 63 {
            return Err(Error::decode(r.position(), "gamma prefix too long"));
        }
    }
    let rest = r.read(zeros)?;
    Ok((1u64 << zeros) | rest)
}

const GAMMA_SLOTS: usize = 48;

/// Elias-gamma shaped integer coder with adaptive bit models.
#[derive(Clone)]
struct GammaModel {
    unary: [BitModel; GAMMA_SLOTS],
    mantissa: Vec<[BitModel; GAMMA_SLOTS]>,
}

impl GammaModel {
    fn new() -> Self {
        GammaModel {
            unary: [BitModel::default(); GAMMA_SLOTS],
            mantissa: vec![[BitModel::default(); GAMMA_SLOTS]; GAMMA_SLOTS],
        }
    }

    fn width(v: u64) -> usize {
        64 - v.leading_zeros() as usize
    }

    fn encode(&mut self, enc: &mut Encoder, v: u64) {
        let nb = Self::width(v);
        for i in 1..nb {
            enc.encode_with(true, &mut self.unary[i - 1]);
        }
        enc.encode_with(false, &mut self.unary[nb - 1]);
        for k in (0..nb - 1).rev() {
            enc.encode_with((v >> k) & 1 == 1, &mut self.mantissa[nb][k]);
        }
    }

    fn decode(&mut self, dec: &mut Decoder<'_>) -> Result<u64> {
        let mut nb = 1;
        while dec.decode_with(&mut self.unary[nb - 1]) {
            nb += 1;
            if nb >= GAMMA_SLOTS {
                return Err(Error::decode(0, "integer code too long"));
            }
        }
        let mut v = 1u64;
        for k in (0..nb - 1).rev() {
            v = (v << 1) | u64::from(dec.decode_with(&mut self.mantissa[nb][k]));
        }
        Ok(v)
    }

    fn cost(&self, v: u64) -> f64 {
        let nb = Self::width(v);
        let mut c = 0.0;
        for i in 1..nb {
            c += self.unary[i - 1].cost(true);
        }
        c += self.unary[nb - 1].cost(false);
        for k in (0..nb - 1).rev() {
            c += self.mantissa[nb][k].cost((v >> k) & 1 == 1);
        }
        c
    }
}

/// Adaptive state shared by encoder and decoder.
struct Model {
    lit_order: usize,
    min_match: usize,
    is_match: [BitModel; 2],
    is_rep: BitModel,
    is_inverted: BitModel,
    literal: Vec<BitModel>,
    distance: GammaModel,
    length: GammaModel,
    last_was_match: usize,
    last_distance: usize,
}

impl Model {
    fn new(p: &Params) -> Self {
        Model {
            lit_order: p.lit_order,
            min_match: p.min_match,
            is_match: [BitModel::default(); 2],
            is_rep: BitModel::default(),
            is_inverted: BitModel::default(),
            literal: vec![BitModel::default(); 1 << p.lit_order],
            distance: GammaModel::new(),
            length: GammaModel::new(),
            last_was_match: 0,
            last_distance: 0,
        }
    }

    fn lit_ctx(&self, bits: &[u8], pos: usize) -> usize {
        let mut ctx = 0;
        for k in 1..=self.lit_order {
            ctx = (ctx << 1) | if pos >= k { bits[pos - k] as usize } else { 0 };
        }
        ctx
    }

    fn literal_span_cost(&self, bits: &[u8], pos: usize, len: usize) -> f64 {
        let flag = &self.is_match[self.last_was_match];
        let mut c = 0.0;
        for i in pos..pos + len {
            // the flag context is "previous op was a literal" after the first bit
            let f = if i == pos { flag } else { &self.is_match[0] };
            c += f.cost(false) + self.literal[self.lit_ctx(bits, i)].cost(bits[i] == 1);
        }
        c
    }

    fn match_cost(&self, distance: usize, len: usize, inverted: bool) -> f64 {
        let mut c = self.is_match[self.last_was_match].cost(true) + self.is_inverted.cost(inverted);
        if distance == self.last_distance {
            c += self.is_rep.cost(true);
        } else {
            c += self.is_rep.cost(false) + self.distance.cost(distance as u64);
        }
        c + self.length.cost((len - self.min_match + 1) as u64)
    }
}

struct MatchFinder {
    hash_bits: usize,
    chain_limit: usize,
    short_window: usize,
    chains: HashMap<u64, Vec<usize>>,
    inserted: usize,
}

impl MatchFinder {
    fn new(p: &Params) -> Self {
        MatchFinder {
            hash_bits: p.hash_bits,
            chain_limit: p.chain_limit,
            short_window: p.short_window,
            chains: HashMap::new(),
            inserted: 0,
        }
    }

    fn key(&self, bits: &[u8], pos: usize) -> Option<u64> {
        if pos + self.hash_bits > bits.len() {
            return None;
        }
        Some(
            bits[pos..pos + self.hash_bits]
                .iter()
                .fold(0u64, |k, &b| (k << 1) | b as u64),
        )
    }

    fn insert_upto(&mut self, bits: &[u8], end: usize) {
        while self.inserted < end {
            if let Some(k) = self.key(bits, self.inserted) {
                let chain = self.chains.entry(k).or_default();
                chain.push(self.inserted);
                if chain.len() > 2 * self.chain_limit {
                    chain.drain(..self.chain_limit);
                }
            }
            self.inserted += 1;
        }
    }

    fn match_len(bits: &[u8], src: usize, pos: usize, inverted: bool) -> usize {
        let flip = u8::from(inverted);
        let mut l = 0;
        while pos + l < bits.len() && bits[src + l] ^ flip == bits[pos + l] {
            l += 1;
        }
        l
    }

    /// Matches at `pos` that are not dominated by a closer, at-least-as-long
    /// match of either polarity, as `(distance, length, inverted)`.
    fn frontier(&self, bits: &[u8], pos: usize) -> Vec<(usize, usize, bool)> {
        let mut all = Vec::new();
        let mut push = |d: usize| {
            for inv in [false, true] {
                let l = Self::match_len(bits, pos - d, pos, inv);
                if l > 0 {
                    all.push((d, l, inv));
                }
            }
        };
        for d in 1..=self.short_window.min(pos) {
            push(d);
        }
        if let Some(k) = self.key(bits, pos) {
            let full = (1u64 << self.hash_bits) - 1;
            for key in [k, !k & full] {
                if let Some(chain) = self.chains.get(&key) {
                    for &src in chain.iter().rev().take(self.chain_limit) {
                        if src < pos && pos - src > self.short_window {
                            push(pos - src);
                        }
                    }
                }
            }
        }
        all.sort_by_key(|&(d, l, _)| (d, std::cmp::Reverse(l)));
        let mut front: Vec<(usize, usize, bool)> = Vec::new();
        for c in all {
            if front.last().is_none_or(|&(_, l, _)| c.1 > l) {
                front.push(c);
            }
        }
        front
    }

    /// Longest plain and longest inverted match at `pos` as `(distance, length)`;
    /// ties go to the smaller distance.
    fn longest(&self, bits: &[u8], pos: usize) -> [(usize, usize); 2] {
        let mut best = [(0usize, 0usize); 2];
        let consider = |d: usize, inv: bool, best: &mut [(usize, usize); 2]| {
            let slot = &mut best[usize::from(inv)];
            let l = Self::match_len(bits, pos - d, pos, inv);
            if l > slot.1 || (l == slot.1 && l > 0 && d < slot.0) {
                *slot = (d, l);
            }
        };
        for d in 1..=self.short_window.min(pos) {
            consider(d, false, &mut best);
            consider(d, true, &mut best);
        }
        if let Some(k) = self.key(bits, pos) {
            let full = (1u64 << self.hash_bits) - 1;
            for (key, inv) in [(k, false), (!k & full, true)] {
                if let Some(chain) = self.chains.get(&key) {
                    for &src in chain.iter().rev().take(self.chain_limit) {
                        if src < pos && pos - src > self.short_window {
                            consider(pos - src, inv, &mut best);
                        }
                    }
                }
            }
        }
        best
    }
}

/// Reversible pre-filter applied before the LZ stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Filter {
    None,
    /// `y[t] = x[t] ^ x[t - stride]`.
    Xor(usize),
    /// The input is cut into `stride`-bit words starting at bit `phase`; each
    /// word after the first is replaced by its difference from the previous
    /// word modulo `2^stride`. Bits outside whole words pass through.
    Sub {
        stride: usize,
        phase: usize,
    },
}

impl Filter {
    fn apply(self, bits: &[u8]) -> Vec<u8> {
        match self {
            Filter::None => bits.to_vec(),
            Filter::Xor(s) => (0..bits.len())
                .map(|t| {
                    if t >= s {
                        bits[t] ^ bits[t - s]
                    } else {
                        bits[t]
                    }
                })
                .collect(),
            Filter::Sub { stride, phase } => {
                let mut out = bits.to_vec();
                let words = bits.len().saturating_sub(phase) / stride;
                for k in 1..words {
                    let cur = phase + k * stride;
                    word_op(&mut out[cur..cur + stride], &bits[cur - stride..cur], true);
                }
                out
            }
        }
    }

    fn invert(self, filtered: &[u8]) -> Vec<u8> {
        let mut out = filtered.to_vec();
        match self {
            Filter::None => {}
            Filter::Xor(s) => {
                for t in s..out.len() {
                    out[t] ^= out[t - s];
                }
            }
            Filter::Sub { stride, phase } => {
                let words = out.len().saturating_sub(phase) / stride;
                for k in 1..words {
                    let cur = phase + k * stride;
                    let (done, rest) = out.split_at_mut(cur);
                    word_op(&mut rest[..stride], &done[cur - stride..], false);
                }
            }
        }
        out
    }

    fn write(self, out: &mut BitString) {
        match self {
            Filter::None => put_gamma(out, 1),
            Filter::Xor(s) => {
                put_gamma(out, s as u64 + 1);
                out.push(false);
            }
            Filter::Sub { stride, phase } => {
                put_gamma(out, stride as u64 + 1);
                out.push(true);
                put_gamma(out, phase as u64 + 1);
            }
        }
    }

    fn read(r: &mut BitReader<'_>) -> Result<Filter> {
        let stride = (get_gamma(r)? - 1) as usize;
        if stride == 0 {
            return Ok(Filter::None);
        }
        if !r.read_bit()? {
            return Ok(Filter::Xor(stride));
        }
        let phase = (get_gamma(r)? - 1) as usize;
        if phase >= stride {
            return Err(Error::decode(
                r.position(),
                format!("filter phase {phase} not below stride {stride}"),
            ));
        }
        Ok(Filter::Sub { stride, phase })
    }
}

/// `word = word - other` (or `+` when `subtract` is false) modulo 2^len,
/// both MSB-first bit slices of equal length.
fn word_op(word: &mut [u8], other: &[u8], subtract: bool) {
    let mut carry = 0u8;
    for i in (0..word.len()).rev() {
        let (a, b) = (word[i], other[i]);
        if subtract {
            word[i] = a ^ b ^ carry;
            carry = u8::from(a < b + carry);
        } else {
            let sum = a + b + carry;
            word[i] = sum & 1;
            carry = sum >> 1;
        }
    }
}

fn ones(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b == 1).count()
}

/// Filters worth a full trial, best-scoring first: the plain stream, the XOR
/// strides whose output has the most zero bits, and for each of those strides
/// the word-difference phase with the most zero bits.
fn candidate_filters(bits: &[u8], p: &Params) -> Vec<Filter> {
    let mut out = vec![Filter::None];
    let mut scored: Vec<(usize, usize)> = (1..=p.max_stride.min(bits.len().saturating_sub(1)))
        .map(|s| {
            (
                (s..bits.len()).filter(|&t| bits[t] != bits[t - s]).count(),
                s,
            )
        })
        .collect();
    scored.sort();
    for (_, stride) in scored.into_iter().take(p.stride_trials) {
        out.push(Filter::Xor(stride));
        if bits.len() >= 2 * stride {
            let best = (0..stride)
                .map(|phase| Filter::Sub { stride, phase })
                .min_by_key(|f| ones(&f.apply(bits)))
                .expect("stride is positive");
            out.push(best);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    Literal,
    Match {
        distance: usize,
        len: usize,
        inverted: bool,
    },
}

/// Codes `op` at `pos` and advances the model.
fn emit(enc: &mut Encoder, model: &mut Model, bits: &[u8], pos: usize, op: Op) {
    let ctx = model.last_was_match;
    match op {
        Op::Match {
            distance,
            len,
            inverted,
        } => {
            enc.encode_with(true, &mut model.is_match[ctx]);
            enc.encode_with(inverted, &mut model.is_inverted);
            if distance == model.last_distance {
                enc.encode_with(true, &mut model.is_rep);
            } else {
                enc.encode_with(false, &mut model.is_rep);
                model.distance.encode(enc, distance as u64);
            }
            model.length.encode(enc, (len - model.min_match + 1) as u64);
            model.last_distance = distance;
            model.last_was_match = 1;
        }
        Op::Literal => {
            enc.encode_with(false, &mut model.is_match[ctx]);
            let lc = model.lit_ctx(bits, pos);
            enc.encode_with(bits[pos] == 1, &mut model.literal[lc]);
            model.last_was_match = 0;
        }
    }
}

fn op_len(op: Op) -> usize {
    match op {
        Op::Literal => 1,
        Op::Match { len, .. } => len,
    }
}

/// Greedy parse: at each position take the match with the largest estimated
/// saving over literals, if any. Returns the coded stream, the parse, and the
/// final model state.
fn greedy(bits: &[u8], p: &Params) -> (BitString, Vec<Op>, Model) {
    let mut enc = Encoder::new();
    let mut model = Model::new(p);
    let mut finder = MatchFinder::new(p);
    let mut ops = Vec::new();
    let mut pos = 0;
    while pos < bits.len() {
        finder.insert_upto(bits, pos);
        let mut choice = Op::Literal;
        let mut best_saving = 0.0;
        let mut weigh = |d: usize, l: usize, inv: bool| {
            if l < p.min_match {
                return;
            }
            let saving = model.literal_span_cost(bits, pos, l) - model.match_cost(d, l, inv);
            if saving > best_saving {
                best_saving = saving;
                choice = Op::Match {
                    distance: d,
                    len: l,
                    inverted: inv,
                };
            }
        };
        if model.last_distance > 0 && model.last_distance <= pos {
            for inv in [false, true] {
                let l = MatchFinder::match_len(bits, pos - model.last_distance, pos, inv);
                weigh(model.last_distance, l, inv);
            }
        }
        for (inv, (d, l)) in [false, true].into_iter().zip(finder.longest(bits, pos)) {
            if d > 0 {
                weigh(d, l, inv);
            }
        }
        emit(&mut enc, &mut model, bits, pos, choice);
        ops.push(choice);
        pos += op_len(choice);
    }
    (enc.finish(), ops, model)
}

/// Matches at least this long are taken without examining the positions
/// they cover.
const NICE_LEN: usize = 128;

/// Minimum-price parse under the static prices of `prices` (a model that has
/// already seen the data once). Match lengths are tried at their maximum, at
/// the minimum, and at every power of two in between.
fn optimal(bits: &[u8], p: &Params, prices: &Model) -> Vec<Op> {
    let n = bits.len();
    let mut finder = MatchFinder::new(p);
    let mut cost = vec![f64::INFINITY; n + 1];
    let mut from: Vec<Op> = vec![Op::Literal; n + 1];
    cost[0] = 0.0;
    let mut skip_to = 0;
    let lit_flag = prices.is_match[0].cost(false);
    let match_flag = prices.is_match[0].cost(true);
    for pos in 0..n {
        if pos < skip_to {
            continue;
        }
        let here = cost[pos];
        let lit = here + lit_flag + prices.literal[prices.lit_ctx(bits, pos)].cost(bits[pos] == 1);
        if lit < cost[pos + 1] {
            cost[pos + 1] = lit;
            from[pos + 1] = Op::Literal;
        }
        finder.insert_upto(bits, pos);
        for (d, lmax, inv) in finder.frontier(bits, pos) {
            if lmax < p.min_match {
                continue;
            }
            if lmax >= NICE_LEN {
                skip_to = skip_to.max(pos + lmax);
            }
            let head = here
                + match_flag
                + prices.is_inverted.cost(inv)
                + prices.is_rep.cost(false)
                + prices.distance.cost(d as u64);
            let mut lens = vec![p.min_match, lmax];
            let mut l = p.min_match.next_power_of_two();
            while l < lmax {
                lens.push(l);
                l *= 2;
            }
            for l in lens {
                let c = head + prices.length.cost((l - p.min_match + 1) as u64);
                if c < cost[pos + l] {
                    cost[pos + l] = c;
                    from[pos + l] = Op::Match {
                        distance: d,
                        len: l,
                        inverted: inv,
                    };
                }
            }
        }
    }
    let mut ops = Vec::new();
    let mut pos = n;
    while pos > 0 {
        let op = from[pos];
        ops.push(op);
        pos -= op_len(op);
    }
    ops.reverse();
    ops
}

fn encode_ops(bits: &[u8], p: &Params) -> BitString {
    let (greedy_out, greedy_ops, model) = greedy(bits, p);
    let ops = optimal(bits, p, &model);
    if ops == greedy_ops {
        return greedy_out;
    }
    let mut enc = Encoder::new();
    let mut model = Model::new(p);
    let mut pos = 0;
    for op in ops {
        emit(&mut enc, &mut model, bits, pos, op);
        pos += op_len(op);
    }
    let out = enc.finish();
    if out.len() < greedy_out.len() {
        out
    } else {
        greedy_out
    }
}

/// Compresses under one filter; output excludes the mode bit.
fn compress_filtered(raw: &[u8], filter: Filter, p: &Params) -> BitString {
    let mut out = BitString::new();
    filter.write(&mut out);
    put_gamma(&mut out, raw.len() as u64 + 1);
    out.extend_from(&encode_ops(&filter.apply(raw), p));
    out
}

/// Width of the explicit length field carried by stored blocks.
pub(crate) const STORED_LEN_BITS: usize = 32;

/// Full compressor output: a mode bit, then either a stored block
/// (`STORED_LEN_BITS`-bit length + raw bits) or the coded stream.
/// The empty string is always a stored block.
pub(crate) fn compress(input: &BitString, p: &Params) -> BitString {
    let stored_len = STORED_LEN_BITS + input.len();
    let mut best: Option<BitString> = None;
    if !input.is_empty() {
        let raw: Vec<u8> = input.iter().map(u8::from).collect();
        for f in candidate_filters(&raw, p) {
            let c = compress_filtered(&raw, f, p);
            if best.as_ref().is_none_or(|b| c.len() < b.len()) {
                best = Some(c);
            }
        }
    }
    let mut out = BitString::new();
    match best {
        Some(b) if b.len() < stored_len => {
            out.push(true);
            out.extend_from(&b);
        }
        _ => {
            out.push(false);
            out.push_bits(input.len() as u64, STORED_LEN_BITS);
            out.extend_from(input);
        }
    }
    out
}

pub(crate) fn decompress(data: &BitString, p: &Params) -> Result<BitString> {
    if data.is_empty() {
        return Err(Error::decode(0, "missing mode bit"));
    }
    let mut r = BitReader::new(data);
    if !r.read_bit()? {
        let len = r.read(STORED_LEN_BITS)? as usize;
        if r.remaining() != len {
            return Err(Error::decode(
                r.position(),
                format!(
                    "stored block declares {len} bits, {} present",
                    r.remaining()
                ),
            ));
        }
        return Ok(data.slice(1 + STORED_LEN_BITS, data.len()));
    }
    let filter = Filter::read(&mut r)?;
    let len = (get_gamma(&mut r)? - 1) as usize;
    let mut dec = Decoder::new(data, r.position());
    let mut model = Model::new(p);
    let mut bits: Vec<u8> = Vec::with_capacity(len);
    while bits.len() < len {
        let ctx = model.last_was_match;
        if dec.decode_with(&mut model.is_match[ctx]) {
            let flip = u8::from(dec.decode_with(&mut model.is_inverted));
            let d = if dec.decode_with(&mut model.is_rep) {
                model.last_distance
            } else {
                model.distance.decode(&mut dec)? as usize
            };
            let l = (model.length.decode(&mut dec)? as usize) + p.min_match - 1;
            if d == 0 || d > bits.len() || bits.len() + l > len {
                return Err(Error::decode(
                    bits.len(),
                    format!("invalid back-reference d={d} l={l}"),
                ));
            }
            for _ in 0..l {
                bits.push(bits[bits.len() - d] ^ flip);
            }
            model.last_distance = d;
            model.last_was_match = 1;
        } else {
            let lc = model.lit_ctx(&bits, bits.len());
            let b = dec.decode_with(&mut model.literal[lc]);
            bits.push(u8::from(b));
            model.last_was_match = 0;
        }
    }
    let raw = filter.invert(&bits);
    Ok(BitString::from_bools(raw.into_iter().map(|b| b == 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn roundtrip(s: &BitString) -> usize {
        let p = Params::default();
        let c = compress(s, &p);
        assert_eq!(&decompress(&c, &p).unwrap(), s);
        c.len()
    }

    #[test]
    fn gamma_roundtrip() {
        let mut s = BitString::new();
        for v in [1u64, 2, 3, 17, 1 << 40] {
            put_gamma(&mut s, v);
        }
        let mut r = BitReader::new(&s);
        for v in [1u64, 2, 3, 17, 1 << 40] {
            assert_eq!(get_gamma(&mut r).unwrap(), v);
        }
    }

    #[test]
    fn roundtrips_structured_and_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let random = BitString::from_bools((0..3000).map(|_| rng.random_bool(0.5)));
        let sparse = BitString::from_bools((0..3000).map(|_| rng.random_bool(0.03)));
        let periodic = BitString::from_bools((0..2000).map(|i| i % 7 < 3));
        let mut counter = BitString::new();
        for i in 0..200u64 {
            counter.push_bits(0b101, 3);
            counter.push_bits(i, 9);
        }
        assert!(roundtrip(&random) <= 3033);
        assert!(roundtrip(&sparse) < 1000);
        assert!(roundtrip(&periodic) < 100);
        assert!(roundtrip(&counter) < counter.len() / 2);
        for n in 0..40 {
            roundtrip(&BitString::from_bools((0..n).map(|i| i % 3 == 0)));
        }
    }

    #[test]
    fn filters_invert() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bits: Vec<u8> = (0..301).map(|_| rng.random_range(0..2)).collect();
        for f in [
            Filter::None,
            Filter::Xor(1),
            Filter::Xor(17),
            Filter::Sub {
                stride: 9,
                phase: 4,
            },
            Filter::Sub {
                stride: 64,
                phase: 0,
            },
        ] {
            assert_eq!(f.invert(&f.apply(&bits)), bits, "{f:?}");
        }
    }

    #[test]
    fn word_difference_flattens_counters() {
        let mut counter = BitString::new();
        counter.push_bits(0b101, 5);
        for i in 0..256u64 {
            counter.push_bits(0b110, 3);
            counter.push_bits(3 * i, 10);
        }
        assert!(roundtrip(&counter) < 200, "{}", roundtrip(&counter));
    }

    #[test]
    fn rejects_truncated_stream() {
        let p = Params::default();
        let s = BitString::from_bools((0..500).map(|i| i % 5 == 0));
        let c = compress(&s, &p);
        let cut = c.slice(0, 4);
        assert!(decompress(&cut, &p).is_err() || decompress(&cut, &p).unwrap() != s);
    }
}
