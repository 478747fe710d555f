//! LSB matching revisited over pixel pairs.
//!
//! A pair `(x1, x2)` carries two bits: `m1 = LSB(x1)` and
//! `m2 = LSB(floor(x1 / 2) + x2)`. Embedding changes at most one of the two
//! values, by exactly one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, StegoError};
use crate::par::{self, Execution};
use crate::raster::Channel;
use crate::region::PairLocus;

/// Ordered message bits, most-significant bit of each byte first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitStream {
    bits: Vec<bool>,
}

impl BitStream {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitStream { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Length after padding to a whole number of pairs.
    pub fn padded_len(&self) -> usize {
        padded_bits(self.bits.len())
    }

    /// Number of pairs needed to carry the stream.
    pub fn pairs_needed(&self) -> usize {
        self.padded_len() / 2
    }

    /// Bit pairs in embedding order; an odd tail is completed with a 0.
    pub fn bit_pairs(&self) -> impl Iterator<Item = (bool, bool)> + '_ {
        self.bits
            .chunks(2)
            .map(|c| (c[0], c.get(1).copied().unwrap_or(false)))
    }
}

/// Rounds a bit count up to even.
pub fn padded_bits(n: usize) -> usize {
    n + (n & 1)
}

/// Expands each byte into eight bits, MSB first.
pub fn encode_message(text: &[u8]) -> BitStream {
    let bits = text
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1 == 1))
        .collect();
    BitStream { bits }
}

/// Packs bits back into bytes; the length must be a multiple of 8.
pub fn decode_message(bits: &BitStream) -> Result<Vec<u8>> {
    if !bits.len().is_multiple_of(8) {
        return Err(StegoError::BitLength(bits.len()));
    }
    Ok(bits
        .bits
        .chunks(8)
        .map(|byte| byte.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
        .collect())
}

/// `LSB(floor(a / 2) + b)`.
#[inline]
pub fn pair_function(a: u8, b: u8) -> bool {
    ((a >> 1) as u16 + b as u16) & 1 == 1
}

#[inline]
fn lsb(v: u8) -> bool {
    v & 1 == 1
}

/// Seeded source for the free `+1`/`-1` choice when only the second pixel moves.
#[derive(Debug, Clone)]
pub struct DeterministicRng {
    inner: ChaCha8Rng,
}

impl DeterministicRng {
    pub fn new(seed: u64) -> Self {
        DeterministicRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `stream` of the generator for `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        DeterministicRng { inner }
    }

    pub fn next_bit(&mut self) -> bool {
        self.inner.gen()
    }

    fn sign(&mut self) -> i16 {
        if self.next_bit() {
            1
        } else {
            -1
        }
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}

impl Default for DeterministicRng {
    fn default() -> Self {
        Self::new(0)
    }
}

/// Two horizontally adjacent intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EmbedUnit {
    pub first: u8,
    pub second: u8,
}

impl EmbedUnit {
    pub fn new(first: u8, second: u8) -> Self {
        EmbedUnit { first, second }
    }

    pub fn is_saturated(&self) -> bool {
        is_saturated(self.first) || is_saturated(self.second)
    }
}

#[inline]
pub fn is_saturated(v: u8) -> bool {
    v == 0 || v == 255
}

fn shift(v: u8, delta: i16) -> u8 {
    (v as i16 + delta) as u8
}

/// Hides `(m1, m2)` in `unit`. Both values must lie in `1..=254`.
pub fn embed_pair(
    unit: EmbedUnit,
    m1: bool,
    m2: bool,
    rng: &mut DeterministicRng,
) -> Result<EmbedUnit> {
    if unit.is_saturated() {
        return Err(StegoError::InvalidParameter(format!(
            "saturated embedding unit ({}, {})",
            unit.first, unit.second
        )));
    }
    let EmbedUnit { first, second } = unit;
    if lsb(first) == m1 {
        if pair_function(first, second) == m2 {
            Ok(unit)
        } else {
            Ok(EmbedUnit::new(first, shift(second, rng.sign())))
        }
    } else {
        // floor((x+1)/2) and floor((x-1)/2) differ by one, so exactly one sign fits.
        let up = shift(first, 1);
        let first = if pair_function(up, second) == m2 {
            up
        } else {
            shift(first, -1)
        };
        Ok(EmbedUnit::new(first, second))
    }
}

/// `(LSB(first), pair_function(first, second))`.
pub fn extract_pair(unit: EmbedUnit) -> (bool, bool) {
    (lsb(unit.first), pair_function(unit.first, unit.second))
}

fn check_locus(channel: &Channel, p: &PairLocus) -> Result<()> {
    if !p.col.is_multiple_of(2) {
        return Err(StegoError::InvalidPair {
            row: p.row,
            col: p.col,
            reason: "odd column",
        });
    }
    if p.row >= channel.height() || p.col + 1 >= channel.width() {
        return Err(StegoError::InvalidPair {
            row: p.row,
            col: p.col,
            reason: "out of bounds",
        });
    }
    Ok(())
}

/// Embeds `bits` into the first `bits.pairs_needed()` pairs of `pairs`.
pub fn embed_stream(
    channel: &Channel,
    pairs: &[PairLocus],
    bits: &BitStream,
    rng: &mut DeterministicRng,
) -> Result<Channel> {
    let needed = bits.pairs_needed();
    if needed > pairs.len() {
        return Err(StegoError::Capacity {
            required: bits.padded_len(),
            available: 2 * pairs.len(),
        });
    }
    let used = &pairs[..needed];
    let mut seen = std::collections::HashSet::with_capacity(needed);
    for p in used {
        check_locus(channel, p)?;
        if !seen.insert(*p) {
            return Err(StegoError::InvalidPair {
                row: p.row,
                col: p.col,
                reason: "duplicate pair",
            });
        }
        let unit = EmbedUnit::new(*channel.get(p.row, p.col), *channel.get(p.row, p.col + 1));
        if unit.is_saturated() {
            return Err(StegoError::SaturatedPair {
                row: p.row,
                col: p.col,
            });
        }
    }

    let mut out = channel.clone();
    for (p, (m1, m2)) in used.iter().zip(bits.bit_pairs()) {
        let unit = EmbedUnit::new(*out.get(p.row, p.col), *out.get(p.row, p.col + 1));
        let y = embed_pair(unit, m1, m2, rng)?;
        *out.get_mut(p.row, p.col) = y.first;
        *out.get_mut(p.row, p.col + 1) = y.second;
    }
    Ok(out)
}

/// Reads `nbits` bits back from `pairs` in order.
pub fn extract_stream(channel: &Channel, pairs: &[PairLocus], nbits: usize) -> Result<BitStream> {
    if nbits > 2 * pairs.len() {
        return Err(StegoError::Capacity {
            required: nbits,
            available: 2 * pairs.len(),
        });
    }
    let mut bits = Vec::with_capacity(padded_bits(nbits));
    for p in &pairs[..padded_bits(nbits) / 2] {
        check_locus(channel, p)?;
        let (m1, m2) = extract_pair(EmbedUnit::new(
            *channel.get(p.row, p.col),
            *channel.get(p.row, p.col + 1),
        ));
        bits.push(m1);
        bits.push(m2);
    }
    bits.truncate(nbits);
    Ok(BitStream { bits })
}

/// Outcome counts from [`simulate_modification_rate`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModificationStats {
    pub pairs: u64,
    pub changed_values: u64,
    pub unchanged_pairs: u64,
}

impl ModificationStats {
    /// Mean changed pixels per embedded bit.
    pub fn per_bit(&self) -> f64 {
        self.changed_values as f64 / (2 * self.pairs) as f64
    }

    /// Mean changed pixels per pair.
    pub fn per_pair(&self) -> f64 {
        self.changed_values as f64 / self.pairs as f64
    }

    pub fn zero_change_rate(&self) -> f64 {
        self.unchanged_pairs as f64 / self.pairs as f64
    }

    fn merge(self, other: Self) -> Self {
        ModificationStats {
            pairs: self.pairs + other.pairs,
            changed_values: self.changed_values + other.changed_values,
            unchanged_pairs: self.unchanged_pairs + other.unchanged_pairs,
        }
    }
}

const SIM_CHUNK: u64 = 8192;

/// Embeds uniformly random bit pairs into uniformly random non-saturated
/// units and counts the changes. Chunk `k` draws from stream `k` of `seed`,
/// so the counts do not depend on `exec`.
pub fn simulate_modification_rate(trials: u64, seed: u64, exec: Execution) -> ModificationStats {
    let chunks: Vec<u64> = (0..trials.div_ceil(SIM_CHUNK)).collect();
    par::map_collect(&chunks, exec, |&k| {
        let n = SIM_CHUNK.min(trials - k * SIM_CHUNK);
        let mut rng = DeterministicRng::with_stream(seed, k);
        let mut stats = ModificationStats::default();
        for _ in 0..n {
            let unit = EmbedUnit::new(rng.rng().gen_range(1..=254), rng.rng().gen_range(1..=254));
            let (m1, m2) = (rng.next_bit(), rng.next_bit());
            let y = embed_pair(unit, m1, m2, &mut rng).expect("unit is non-saturated");
            let changed = (y.first != unit.first) as u64 + (y.second != unit.second) as u64;
            stats.pairs += 1;
            stats.changed_values += changed;
            stats.unchanged_pairs += (changed == 0) as u64;
        }
        stats
    })
    .into_iter()
    .fold(ModificationStats::default(), ModificationStats::merge)
}
