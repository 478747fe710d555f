//! 24-bit uncompressed BMP (BITMAPINFOHEADER) codec.

use super::RgbRaster;
use crate::error::{Result, StegoError};

const FILE_HEADER_LEN: usize = 14;
const INFO_HEADER_LEN: usize = 40;
const BI_RGB: u32 = 0;

fn truncated(what: &str) -> StegoError {
    StegoError::Unreadable(format!("truncated BMP: {what}"))
}

fn u16_at(b: &[u8], at: usize) -> Result<u16> {
    b.get(at..at + 2)
        .map(|s| u16::from_le_bytes([s[0], s[1]]))
        .ok_or_else(|| truncated("header"))
}

fn u32_at(b: &[u8], at: usize) -> Result<u32> {
    b.get(at..at + 4)
        .map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
        .ok_or_else(|| truncated("header"))
}

fn stride(width: usize) -> usize {
    (width * 3 + 3) & !3
}

pub(super) fn decode(bytes: &[u8]) -> Result<RgbRaster> {
    if bytes.len() < FILE_HEADER_LEN + INFO_HEADER_LEN {
        return Err(truncated("header"));
    }
    let data_offset = u32_at(bytes, 10)? as usize;
    let header_len = u32_at(bytes, 14)? as usize;
    if header_len < INFO_HEADER_LEN {
        return Err(StegoError::UnsupportedFormat(format!(
            "BMP info header of {header_len} bytes; BITMAPINFOHEADER or later required"
        )));
    }
    let width = u32_at(bytes, 18)? as i32;
    let height = u32_at(bytes, 22)? as i32;
    let bpp = u16_at(bytes, 28)?;
    let compression = u32_at(bytes, 30)?;
    if bpp != 24 {
        return Err(StegoError::UnsupportedFormat(format!(
            "{bpp}-bit BMP; only 24-bit is supported"
        )));
    }
    if compression != BI_RGB {
        return Err(StegoError::UnsupportedFormat(format!(
            "compressed BMP (method {compression})"
        )));
    }
    if width <= 0 || height == 0 {
        return Err(StegoError::ZeroDimension);
    }
    let w = width as usize;
    let h = height.unsigned_abs() as usize;
    let top_down = height < 0;
    let row_len = stride(w);
    let needed = data_offset
        .checked_add(
            row_len
                .checked_mul(h)
                .ok_or_else(|| truncated("size overflow"))?,
        )
        .ok_or_else(|| truncated("size overflow"))?;
    if bytes.len() < needed {
        return Err(truncated("pixel data"));
    }

    let mut pixels = Vec::with_capacity(w * h);
    for row in 0..h {
        let stored = if top_down { row } else { h - 1 - row };
        let start = data_offset + stored * row_len;
        pixels.extend(
            bytes[start..start + w * 3]
                .chunks_exact(3)
                .map(|bgr| [bgr[2], bgr[1], bgr[0]]),
        );
    }
    RgbRaster::new(w, h, pixels)
}

pub(super) fn encode(raster: &RgbRaster) -> Vec<u8> {
    let (w, h) = (raster.width(), raster.height());
    let row_len = stride(w);
    let data_offset = FILE_HEADER_LEN + INFO_HEADER_LEN;
    let image_size = row_len * h;
    let mut out = Vec::with_capacity(data_offset + image_size);

    out.extend_from_slice(b"BM");
    out.extend_from_slice(&((data_offset + image_size) as u32).to_le_bytes());
    out.extend_from_slice(&[0; 4]);
    out.extend_from_slice(&(data_offset as u32).to_le_bytes());

    out.extend_from_slice(&(INFO_HEADER_LEN as u32).to_le_bytes());
    out.extend_from_slice(&(w as i32).to_le_bytes());
    out.extend_from_slice(&(h as i32).to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&24u16.to_le_bytes());
    out.extend_from_slice(&BI_RGB.to_le_bytes());
    out.extend_from_slice(&(image_size as u32).to_le_bytes());
    // 72 dpi
    out.extend_from_slice(&2835i32.to_le_bytes());
    out.extend_from_slice(&2835i32.to_le_bytes());
    out.extend_from_slice(&[0; 8]);

    let pad = row_len - w * 3;
    for row in (0..h).rev() {
        for col in 0..w {
            let [r, g, b] = raster.pixel(row, col);
            out.extend_from_slice(&[b, g, r]);
        }
        out.extend(std::iter::repeat_n(0, pad));
    }
    out
}
