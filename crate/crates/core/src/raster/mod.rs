//! Lossless image I/O and RGB plane separation.
//!
//! Pixels are indexed row-major from the top-left corner: `(row, col)`.

mod bmp;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use image::{ImageFormat as CodecFormat, RgbImage, RgbaImage};

use crate::error::{Result, StegoError};

/// A row-major `width x height` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// One 8-bit colour plane.
pub type Channel = Grid<u8>;

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Grid {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Grid<T> {
    /// Wraps row-major `data`; fails unless `data.len() == width * height`.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(StegoError::InvalidParameter(format!(
                "grid data has {} entries, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Grid {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.width + col]
    }

    #[inline]
    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut T {
        &mut self.data[row * self.width + col]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub(crate) fn ensure_same_dims<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(StegoError::mismatch(self.dims(), other.dims()));
        }
        Ok(())
    }
}

impl<T: Copy> Grid<T> {
    /// Value at `(row, col)` with out-of-range coordinates clamped to the border.
    #[inline]
    pub fn get_clamped(&self, row: isize, col: isize) -> T {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.data[r * self.width + c]
    }

    pub fn transpose(&self) -> Grid<T> {
        Grid::from_fn(self.height, self.width, |r, c| *self.get(c, r))
    }
}

/// Colour plane selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelId {
    R,
    G,
    B,
}

impl ChannelId {
    pub const ALL: [ChannelId; 3] = [ChannelId::R, ChannelId::G, ChannelId::B];

    pub fn index(self) -> usize {
        match self {
            ChannelId::R => 0,
            ChannelId::G => 1,
            ChannelId::B => 2,
        }
    }

    pub fn from_index(index: u8) -> Option<Self> {
        match index {
            0 => Some(ChannelId::R),
            1 => Some(ChannelId::G),
            2 => Some(ChannelId::B),
            _ => None,
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelId::R => "r",
            ChannelId::G => "g",
            ChannelId::B => "b",
        })
    }
}

impl FromStr for ChannelId {
    type Err = StegoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" | "red" => Ok(ChannelId::R),
            "g" | "green" => Ok(ChannelId::G),
            "b" | "blue" => Ok(ChannelId::B),
            other => Err(StegoError::InvalidParameter(format!(
                "unknown channel {other:?}"
            ))),
        }
    }
}

/// An 8-bit RGB image. An alpha plane read from a PNG rides along untouched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbRaster {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
    alpha: Option<Vec<u8>>,
}

impl RgbRaster {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(StegoError::ZeroDimension);
        }
        if pixels.len() != width * height {
            return Err(StegoError::InvalidParameter(format!(
                "raster has {} pixels, expected {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(RgbRaster {
            width,
            height,
            pixels,
            alpha: None,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Attaches an alpha plane; `None` removes it.
    pub fn with_alpha(mut self, alpha: Option<Vec<u8>>) -> Result<Self> {
        if let Some(a) = &alpha {
            if a.len() != self.pixels.len() {
                return Err(StegoError::InvalidParameter(format!(
                    "alpha plane has {} entries, expected {}",
                    a.len(),
                    self.pixels.len()
                )));
            }
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn alpha(&self) -> Option<&[u8]> {
        self.alpha.as_deref()
    }

    pub fn channel(&self, id: ChannelId) -> Channel {
        let i = id.index();
        Grid {
            width: self.width,
            height: self.height,
            data: self.pixels.iter().map(|p| p[i]).collect(),
        }
    }

    /// Copy of `self` with one plane replaced.
    pub fn with_channel(&self, id: ChannelId, plane: &Channel) -> Result<Self> {
        if plane.dims() != (self.width, self.height) {
            return Err(StegoError::mismatch(
                (self.width, self.height),
                plane.dims(),
            ));
        }
        let i = id.index();
        let mut out = self.clone();
        for (p, v) in out.pixels.iter_mut().zip(plane.as_slice()) {
            p[i] = *v;
        }
        Ok(out)
    }
}

/// Separates the three colour planes.
pub fn split_channels(raster: &RgbRaster) -> (Channel, Channel, Channel) {
    (
        raster.channel(ChannelId::R),
        raster.channel(ChannelId::G),
        raster.channel(ChannelId::B),
    )
}

/// Recombines three planes of equal size into a raster (without alpha).
pub fn merge_channels(r: &Channel, g: &Channel, b: &Channel) -> Result<RgbRaster> {
    r.ensure_same_dims(g)?;
    r.ensure_same_dims(b)?;
    let pixels = r
        .as_slice()
        .iter()
        .zip(g.as_slice())
        .zip(b.as_slice())
        .map(|((&r, &g), &b)| [r, g, b])
        .collect();
    RgbRaster::new(r.width(), r.height(), pixels)
}

/// Lossless on-disk formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Bmp,
    Png,
}

impl ImageFormat {
    /// Picks a format from the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        match ext.as_deref() {
            Some("bmp") => Ok(ImageFormat::Bmp),
            Some("png") => Ok(ImageFormat::Png),
            Some("jpg") | Some("jpeg") => Err(StegoError::UnsupportedFormat(
                "JPEG is lossy and would destroy the payload".into(),
            )),
            other => Err(StegoError::UnsupportedFormat(format!(
                "unknown image extension {other:?}"
            ))),
        }
    }
}

impl FromStr for ImageFormat {
    type Err = StegoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bmp" => Ok(ImageFormat::Bmp),
            "png" => Ok(ImageFormat::Png),
            other => Err(StegoError::UnsupportedFormat(other.to_string())),
        }
    }
}

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Reads a 24-bit BMP or an 8-bit RGB/RGBA PNG.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbRaster> {
    let bytes = fs::read(path.as_ref())?;
    decode_image(&bytes)
}

/// Decodes BMP or PNG bytes, sniffing the format from the signature.
pub fn decode_image(bytes: &[u8]) -> Result<RgbRaster> {
    if bytes.starts_with(b"BM") {
        bmp::decode(bytes)
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(&[0xFF, 0xD8]) {
        Err(StegoError::UnsupportedFormat(
            "JPEG is lossy and would destroy the payload".into(),
        ))
    } else {
        Err(StegoError::Unreadable("not a BMP or PNG file".into()))
    }
}

fn decode_png(bytes: &[u8]) -> Result<RgbRaster> {
    let img = image::load_from_memory_with_format(bytes, CodecFormat::Png)
        .map_err(|e| StegoError::Unreadable(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(StegoError::ZeroDimension);
    }
    match img {
        image::DynamicImage::ImageRgb8(buf) => {
            let pixels = buf.pixels().map(|p| p.0).collect();
            RgbRaster::new(w, h, pixels)
        }
        image::DynamicImage::ImageRgba8(buf) => {
            let pixels = buf.pixels().map(|p| [p[0], p[1], p[2]]).collect();
            let alpha = buf.pixels().map(|p| p[3]).collect();
            RgbRaster::new(w, h, pixels)?.with_alpha(Some(alpha))
        }
        other => Err(StegoError::UnsupportedFormat(format!(
            "PNG colour type {:?}; only 8-bit RGB/RGBA is supported",
            other.color()
        ))),
    }
}

/// Writes `raster` losslessly. BMP output has no alpha plane.
pub fn save_image(raster: &RgbRaster, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let bytes = encode_image(raster, format)?;
    fs::write(path.as_ref(), bytes)?;
    Ok(())
}

pub fn encode_image(raster: &RgbRaster, format: ImageFormat) -> Result<Vec<u8>> {
    match format {
        ImageFormat::Bmp => Ok(bmp::encode(raster)),
        ImageFormat::Png => encode_png(raster),
    }
}

fn encode_png(raster: &RgbRaster) -> Result<Vec<u8>> {
    let (w, h) = (raster.width as u32, raster.height as u32);
    let mut out = std::io::Cursor::new(Vec::new());
    let result = match &raster.alpha {
        None => {
            let data = raster.pixels.iter().flatten().copied().collect();
            RgbImage::from_raw(w, h, data)
                .expect("buffer sized from raster")
                .write_to(&mut out, CodecFormat::Png)
        }
        Some(alpha) => {
            let data = raster
                .pixels
                .iter()
                .zip(alpha)
                .flat_map(|(p, &a)| [p[0], p[1], p[2], a])
                .collect();
            RgbaImage::from_raw(w, h, data)
                .expect("buffer sized from raster")
                .write_to(&mut out, CodecFormat::Png)
        }
    };
    result.map_err(|e| StegoError::UnsupportedFormat(e.to_string()))?;
    Ok(out.into_inner())
}
