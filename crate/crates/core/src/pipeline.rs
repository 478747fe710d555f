//! End-to-end embedding and extraction on colour rasters.

use std::fmt;
use std::str::FromStr;

use crate::edges::{
    adaptive_edge_selection, edge_capacity, CannyParams, EdgeDetector, MagnitudeForm,
};
use crate::error::{Result, StegoError};
use crate::lsbmr::{
    decode_message, embed_stream, encode_message, extract_stream, BitStream, DeterministicRng,
};
use crate::raster::{Channel, ChannelId, RgbRaster};
use crate::region::{self, compute_threshold, qualifying_pairs, PairLocus, RegionKey};

/// Region selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Threshold,
    Sobel,
    Canny,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Threshold, Method::Sobel, Method::Canny];

    pub fn name(self) -> &'static str {
        match self {
            Method::Threshold => "threshold",
            Method::Sobel => "sobel",
            Method::Canny => "canny",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = StegoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "threshold" => Ok(Method::Threshold),
            "sobel" => Ok(Method::Sobel),
            "canny" => Ok(Method::Canny),
            other => Err(StegoError::InvalidParameter(format!(
                "unknown method {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedOptions {
    pub channel: ChannelId,
    pub method: Method,
    pub seed: u64,
    pub canny: CannyParams,
    /// Magnitude form for the Sobel baseline.
    pub sobel_magnitude: MagnitudeForm,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            channel: ChannelId::R,
            method: Method::Threshold,
            seed: 0,
            canny: CannyParams::default(),
            sobel_magnitude: MagnitudeForm::Sqrt,
        }
    }
}

impl EmbedOptions {
    fn detector(&self) -> Option<EdgeDetector> {
        match self.method {
            Method::Threshold => None,
            Method::Sobel => Some(EdgeDetector::Sobel {
                magnitude: self.sobel_magnitude,
            }),
            Method::Canny => Some(EdgeDetector::Canny(self.canny)),
        }
    }
}

/// Pairs chosen for a payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub pairs: Vec<PairLocus>,
    /// Threshold `T`, Sobel magnitude threshold or Canny `high_frac`.
    pub parameter: f64,
    /// Value recorded in the key's threshold byte.
    pub key_threshold: u8,
    /// Pairs qualifying at `parameter`, of which `pairs` is a prefix.
    pub available: usize,
}

/// Picks embedding pairs in `plane` for `required_bits`.
pub fn select_region(
    plane: &Channel,
    required_bits: usize,
    opts: &EmbedOptions,
) -> Result<Selection> {
    match opts.detector() {
        None => {
            let t = compute_threshold(plane, required_bits)?;
            let mut pairs = qualifying_pairs(plane, t);
            let available = pairs.len();
            pairs.truncate(crate::lsbmr::padded_bits(required_bits) / 2);
            Ok(Selection {
                pairs,
                parameter: t as f64,
                key_threshold: t,
                available,
            })
        }
        Some(detector) => {
            let sel = adaptive_edge_selection(plane, required_bits, &detector)?;
            let min_diff = sel
                .pairs
                .iter()
                .map(|p| {
                    plane
                        .get(p.row, p.col)
                        .abs_diff(*plane.get(p.row, p.col + 1))
                })
                .min()
                .unwrap_or(1);
            Ok(Selection {
                pairs: sel.pairs,
                parameter: sel.parameter,
                key_threshold: min_diff.max(1),
                available: sel.available,
            })
        }
    }
}

/// Most bits `plane` can carry with `opts.method` at its loosest setting.
pub fn max_capacity(plane: &Channel, opts: &EmbedOptions) -> Result<usize> {
    match opts.detector() {
        None => Ok(region::threshold_capacity(plane)),
        Some(detector) => edge_capacity(plane, &detector),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedOutcome {
    pub stego: RgbRaster,
    pub key: RegionKey,
    pub parameter: f64,
}

/// Hides `message` in one plane of `cover`.
pub fn embed_message(
    cover: &RgbRaster,
    message: &[u8],
    opts: &EmbedOptions,
) -> Result<EmbedOutcome> {
    let bits = encode_message(message);
    embed_bits(cover, &bits, opts)
}

pub fn embed_bits(
    cover: &RgbRaster,
    bits: &BitStream,
    opts: &EmbedOptions,
) -> Result<EmbedOutcome> {
    if bits.is_empty() {
        return Err(StegoError::Empty("message"));
    }
    let plane = cover.channel(opts.channel);
    let selection = select_region(&plane, bits.len(), opts)?;
    let mut rng = DeterministicRng::new(opts.seed);
    let marked = embed_stream(&plane, &selection.pairs, bits, &mut rng)?;
    let stego = cover.with_channel(opts.channel, &marked)?;
    let key = region::key_for_pairs(
        opts.channel,
        &plane,
        selection.key_threshold,
        bits,
        selection.pairs,
    );
    key.validate()?;
    Ok(EmbedOutcome {
        stego,
        key,
        parameter: selection.parameter,
    })
}

/// Reads the bits listed by `key` out of `stego`.
pub fn extract_bits(stego: &RgbRaster, key: &RegionKey) -> Result<BitStream> {
    let dims = (key.image_width as usize, key.image_height as usize);
    if dims != (stego.width(), stego.height()) {
        return Err(StegoError::mismatch(dims, (stego.width(), stego.height())));
    }
    let nbits = usize::try_from(key.message_bit_length)
        .map_err(|_| StegoError::InvalidKey("message length overflows".into()))?;
    extract_stream(&stego.channel(key.channel), &key.pairs, nbits)
}

pub fn extract_message(stego: &RgbRaster, key: &RegionKey) -> Result<Vec<u8>> {
    decode_message(&extract_bits(stego, key)?)
}
