//! Cover/stego quality: mean squared error and peak signal-to-noise ratio.

use std::fmt;

use crate::error::{Result, StegoError};
use crate::raster::{Channel, ChannelId, RgbRaster};

/// PSNR peak term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsnrPeak {
    /// `256 * 256`
    #[default]
    Paper,
    /// `255 * 255`
    Classic,
}

impl PsnrPeak {
    pub fn numerator(self) -> f64 {
        match self {
            PsnrPeak::Paper => 65536.0,
            PsnrPeak::Classic => 65025.0,
        }
    }
}

/// Which planes a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricScope {
    Channel(ChannelId),
    All,
}

impl fmt::Display for MetricScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricScope::Channel(id) => write!(f, "{id}"),
            MetricScope::All => f.write_str("all"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    /// Infinite when `mse == 0`.
    pub psnr: f64,
    pub scope: MetricScope,
    pub pixel_count: usize,
}

/// Sum of squared differences, exact.
pub fn squared_error(cover: &Channel, stego: &Channel) -> Result<u64> {
    cover.ensure_same_dims(stego)?;
    Ok(cover
        .as_slice()
        .iter()
        .zip(stego.as_slice())
        .map(|(&a, &b)| {
            let d = a as i64 - b as i64;
            (d * d) as u64
        })
        .sum())
}

pub fn mse(cover: &Channel, stego: &Channel) -> Result<f64> {
    let sse = squared_error(cover, stego)?;
    Ok(sse as f64 / cover.len() as f64)
}

/// `10 log10(65536 / mse)`; `+inf` for a perfect match.
pub fn psnr(mse_value: f64) -> Result<f64> {
    psnr_with(mse_value, PsnrPeak::Paper)
}

pub fn psnr_with(mse_value: f64, peak: PsnrPeak) -> Result<f64> {
    if mse_value.is_nan() || mse_value < 0.0 {
        return Err(StegoError::InvalidParameter(format!(
            "mse must be non-negative, got {mse_value}"
        )));
    }
    if mse_value == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak.numerator() / mse_value).log10())
}

/// Number of pixels that differ between the two planes.
pub fn count_modified(cover: &Channel, stego: &Channel) -> Result<usize> {
    cover.ensure_same_dims(stego)?;
    Ok(cover
        .as_slice()
        .iter()
        .zip(stego.as_slice())
        .filter(|(a, b)| a != b)
        .count())
}

/// MSE and PSNR over one plane or all three.
pub fn quality_report(
    cover: &RgbRaster,
    stego: &RgbRaster,
    scope: MetricScope,
    peak: PsnrPeak,
) -> Result<QualityReport> {
    if (cover.width(), cover.height()) != (stego.width(), stego.height()) {
        return Err(StegoError::mismatch(
            (cover.width(), cover.height()),
            (stego.width(), stego.height()),
        ));
    }
    let planes: &[ChannelId] = match &scope {
        MetricScope::Channel(id) => std::slice::from_ref(id),
        MetricScope::All => &ChannelId::ALL,
    };
    let mut sse = 0u64;
    for &id in planes {
        sse += squared_error(&cover.channel(id), &stego.channel(id))?;
    }
    let pixel_count = planes.len() * cover.width() * cover.height();
    let mse = sse as f64 / pixel_count as f64;
    Ok(QualityReport {
        mse,
        psnr: psnr_with(mse, peak)?,
        scope,
        pixel_count,
    })
}

/// Direction in which a metric improves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Better {
    Lower,
    Higher,
}

/// Relative gain of `proposed` over `baseline`, in percent.
pub fn improvement_pct(baseline: f64, proposed: f64, better: Better) -> Result<f64> {
    if baseline == 0.0 {
        return Err(StegoError::InvalidParameter(
            "baseline must be non-zero".into(),
        ));
    }
    Ok(match better {
        Better::Lower => (baseline - proposed) / baseline * 100.0,
        Better::Higher => (proposed - baseline) / baseline * 100.0,
    })
}
