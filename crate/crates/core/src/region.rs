//! Threshold-based region selection and the shared key record.
//!
//! Pairs are the fixed non-overlapping column pairs `(2j, 2j + 1)` within a
//! row. A pair qualifies at threshold `t` when its absolute intensity
//! difference is at least `t` and neither pixel is 0 or 255.

use crate::error::{Result, StegoError};
use crate::lsbmr::{is_saturated, padded_bits, BitStream};
use crate::raster::{Channel, ChannelId};

/// First pixel of an embedding pair; the second is `(row, col + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairLocus {
    pub row: usize,
    pub col: usize,
}

impl PairLocus {
    pub fn new(row: usize, col: usize) -> Self {
        PairLocus { row, col }
    }
}

/// Non-saturated pairs of `channel` in raster order, with their absolute difference.
pub(crate) fn candidate_pairs(channel: &Channel) -> impl Iterator<Item = (PairLocus, u8)> + '_ {
    (0..channel.height()).flat_map(move |row| {
        channel
            .row(row)
            .chunks_exact(2)
            .enumerate()
            .filter(|(_, p)| !is_saturated(p[0]) && !is_saturated(p[1]))
            .map(move |(j, p)| (PairLocus::new(row, 2 * j), p[0].abs_diff(p[1])))
    })
}

/// Pairs whose difference is at least `t`, in raster order. `t = 0` keeps
/// every non-saturated pair.
pub fn qualifying_pairs(channel: &Channel, t: u8) -> Vec<PairLocus> {
    candidate_pairs(channel)
        .filter(|&(_, d)| d >= t)
        .map(|(p, _)| p)
        .collect()
}

/// Largest `t` in `1..=255` leaving room for `required_bits` (padded to even).
pub fn compute_threshold(channel: &Channel, required_bits: usize) -> Result<u8> {
    if required_bits == 0 {
        return Err(StegoError::InvalidParameter(
            "required bit count must be at least 1".into(),
        ));
    }
    let needed = padded_bits(required_bits) / 2;
    let mut histogram = [0usize; 256];
    for (_, d) in candidate_pairs(channel) {
        histogram[d as usize] += 1;
    }
    let mut available = 0;
    for t in (1..=255u8).rev() {
        available += histogram[t as usize];
        if available >= needed {
            return Ok(t);
        }
    }
    Err(StegoError::Capacity {
        required: padded_bits(required_bits),
        available: 2 * available,
    })
}

/// Most bits the channel can carry at `t = 1`.
pub fn threshold_capacity(channel: &Channel) -> usize {
    2 * candidate_pairs(channel).filter(|&(_, d)| d >= 1).count()
}

/// Everything the receiver needs to pull the message back out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionKey {
    pub channel: ChannelId,
    pub threshold: u8,
    pub message_bit_length: u64,
    pub image_width: u32,
    pub image_height: u32,
    pub pairs: Vec<PairLocus>,
}

impl RegionKey {
    /// Checks bounds, pairing, ordering and capacity.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(StegoError::InvalidKey(msg));
        if self.threshold == 0 {
            return invalid("threshold must be in 1..=255".into());
        }
        if (self.message_bit_length as u128) > 2 * self.pairs.len() as u128 {
            return invalid(format!(
                "{} pairs cannot hold {} bits",
                self.pairs.len(),
                self.message_bit_length
            ));
        }
        let (w, h) = (self.image_width as usize, self.image_height as usize);
        let mut prev: Option<PairLocus> = None;
        for p in &self.pairs {
            if p.col % 2 != 0 {
                return invalid(format!("pair ({}, {}) has an odd column", p.row, p.col));
            }
            if p.row >= h || p.col + 1 >= w {
                return invalid(format!("pair ({}, {}) is out of bounds", p.row, p.col));
            }
            if prev.is_some_and(|q| q >= *p) {
                return invalid(format!(
                    "pair ({}, {}) is out of raster order",
                    p.row, p.col
                ));
            }
            prev = Some(*p);
        }
        Ok(())
    }
}

/// Selects the threshold region for `bits` and records it as a key.
pub fn build_key(channel_id: ChannelId, channel: &Channel, bits: &BitStream) -> Result<RegionKey> {
    if bits.is_empty() {
        return Err(StegoError::Empty("message"));
    }
    let threshold = compute_threshold(channel, bits.len())?;
    let mut pairs = qualifying_pairs(channel, threshold);
    pairs.truncate(bits.pairs_needed());
    Ok(key_for_pairs(channel_id, channel, threshold, bits, pairs))
}

pub(crate) fn key_for_pairs(
    channel_id: ChannelId,
    channel: &Channel,
    threshold: u8,
    bits: &BitStream,
    pairs: Vec<PairLocus>,
) -> RegionKey {
    RegionKey {
        channel: channel_id,
        threshold,
        message_bit_length: bits.len() as u64,
        image_width: channel.width() as u32,
        image_height: channel.height() as u32,
        pairs,
    }
}

const MAGIC: &[u8; 4] = b"STGK";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 28;
const CRC_LEN: usize = 4;
const PAIR_LEN: usize = 8;

/// Binary key record, little-endian, CRC-32 trailer.
pub fn serialize_key(key: &RegionKey) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + PAIR_LEN * key.pairs.len() + CRC_LEN);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(key.channel.index() as u8);
    out.push(key.threshold);
    out.push(0);
    out.extend_from_slice(&key.image_width.to_le_bytes());
    out.extend_from_slice(&key.image_height.to_le_bytes());
    out.extend_from_slice(&key.message_bit_length.to_le_bytes());
    out.extend_from_slice(&(key.pairs.len() as u32).to_le_bytes());
    for p in &key.pairs {
        out.extend_from_slice(&(p.row as u32).to_le_bytes());
        out.extend_from_slice(&(p.col as u32).to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

/// Parses and validates a key record.
pub fn deserialize_key(data: &[u8]) -> Result<RegionKey> {
    if data.len() < HEADER_LEN + CRC_LEN {
        return Err(StegoError::KeyTruncated(data.len()));
    }
    let (body, trailer) = data.split_at(data.len() - CRC_LEN);
    let stored = le_u32(trailer, 0);
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(StegoError::KeyChecksum { stored, computed });
    }
    if &body[..4] != MAGIC {
        return Err(StegoError::KeyMagic);
    }
    if body[4] != VERSION {
        return Err(StegoError::KeyVersion(body[4]));
    }
    let channel = ChannelId::from_index(body[5])
        .ok_or_else(|| StegoError::InvalidKey(format!("channel id {}", body[5])))?;
    if body[7] != 0 {
        return Err(StegoError::InvalidKey("reserved byte is not zero".into()));
    }
    let count = le_u32(body, 24) as usize;
    if body.len() != HEADER_LEN + PAIR_LEN * count {
        return Err(StegoError::InvalidKey(format!(
            "{count} pairs declared but {} body bytes present",
            body.len()
        )));
    }
    let pairs = body[HEADER_LEN..]
        .chunks_exact(PAIR_LEN)
        .map(|rec| PairLocus::new(le_u32(rec, 0) as usize, le_u32(rec, 4) as usize))
        .collect();
    let key = RegionKey {
        channel,
        threshold: body[6],
        image_width: le_u32(body, 8),
        image_height: le_u32(body, 12),
        message_bit_length: u64::from_le_bytes(body[16..24].try_into().unwrap()),
        pairs,
    };
    key.validate()?;
    Ok(key)
}
