//! Sobel and Canny edge detection and the edge-region pair baselines.
//!
//! Gradient masks follow the horizontal-derivative convention: `gx` grows
//! with intensity to the right, `gy` with intensity towards the top row.
//! All convolutions replicate the border pixels.

use std::collections::VecDeque;

use crate::error::{Result, StegoError};
use crate::lsbmr::{is_saturated, padded_bits};
use crate::par::{self, Execution};
use crate::raster::{Channel, Grid};
use crate::region::PairLocus;

const SOBEL_X: [[i32; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
const SOBEL_Y: [[i32; 3]; 3] = [[1, 2, 1], [0, 0, 0], [-1, -2, -1]];

/// Boolean edge mask, `true` marks an edge pixel.
pub type EdgeMap = Grid<bool>;

/// Gradient magnitude formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MagnitudeForm {
    /// `sqrt(gx^2 + gy^2)`
    #[default]
    Sqrt,
    /// `|gx| + |gy|`
    Abs,
}

impl MagnitudeForm {
    #[inline]
    pub fn apply(self, gx: i32, gy: i32) -> f64 {
        match self {
            MagnitudeForm::Sqrt => ((gx as f64).powi(2) + (gy as f64).powi(2)).sqrt(),
            MagnitudeForm::Abs => (gx.abs() + gy.abs()) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub gx: Grid<i32>,
    pub gy: Grid<i32>,
    pub magnitude: Grid<f64>,
    /// Degrees, `-atan(gy / gx)`.
    pub direction: Grid<f64>,
}

fn correlate3(channel: &Channel, mask: &[[i32; 3]; 3], exec: Execution) -> Grid<i32> {
    let (w, h) = channel.dims();
    let mut out = Grid::filled(w, h, 0i32);
    par::fill_rows(out.as_mut_slice(), w, exec, |row, dst| {
        let r = row as isize;
        for (col, v) in dst.iter_mut().enumerate() {
            let c = col as isize;
            let mut acc = 0;
            for (dr, weights) in mask.iter().enumerate() {
                for (dc, &k) in weights.iter().enumerate() {
                    if k != 0 {
                        acc += k * channel.get_clamped(r + dr as isize - 1, c + dc as isize - 1)
                            as i32;
                    }
                }
            }
            *v = acc;
        }
    });
    out
}

/// Edge direction in degrees. `gx = 0` maps to 90 when `gy != 0`, else 0.
#[inline]
pub fn gradient_direction(gx: i32, gy: i32) -> f64 {
    if gx == 0 {
        if gy == 0 {
            0.0
        } else {
            90.0
        }
    } else {
        -(gy as f64 / gx as f64).atan().to_degrees()
    }
}

fn field_from(gx: Grid<i32>, gy: Grid<i32>, form: MagnitudeForm) -> GradientField {
    let pairs: Vec<(i32, i32)> = gx
        .as_slice()
        .iter()
        .zip(gy.as_slice())
        .map(|(&x, &y)| (x, y))
        .collect();
    let (w, h) = gx.dims();
    let magnitude =
        Grid::from_vec(w, h, pairs.iter().map(|&(x, y)| form.apply(x, y)).collect()).unwrap();
    let direction = Grid::from_vec(
        w,
        h,
        pairs
            .iter()
            .map(|&(x, y)| gradient_direction(x, y))
            .collect(),
    )
    .unwrap();
    GradientField {
        gx,
        gy,
        magnitude,
        direction,
    }
}

/// Sobel responses with the square-root magnitude.
pub fn sobel_gradient(channel: &Channel) -> GradientField {
    sobel_gradient_with(channel, MagnitudeForm::Sqrt, Execution::default())
}

pub fn sobel_gradient_with(
    channel: &Channel,
    form: MagnitudeForm,
    exec: Execution,
) -> GradientField {
    let gx = correlate3(channel, &SOBEL_X, exec);
    let gy = correlate3(channel, &SOBEL_Y, exec);
    field_from(gx, gy, form)
}

/// Elementwise `|gx| + |gy|`.
pub fn magnitude_abs(gx: &Grid<i32>, gy: &Grid<i32>) -> Result<Grid<f64>> {
    gx.ensure_same_dims(gy)?;
    let (w, h) = gx.dims();
    let data = gx
        .as_slice()
        .iter()
        .zip(gy.as_slice())
        .map(|(&x, &y)| MagnitudeForm::Abs.apply(x, y))
        .collect();
    Grid::from_vec(w, h, data)
}

fn check_threshold(t: f64, what: &str) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(StegoError::InvalidParameter(format!(
            "{what} must be a finite non-negative number, got {t}"
        )));
    }
    Ok(())
}

/// Flags pixels whose square-root Sobel magnitude reaches `edge_threshold`.
pub fn sobel_edge_map(channel: &Channel, edge_threshold: f64) -> Result<EdgeMap> {
    check_threshold(edge_threshold, "edge threshold")?;
    Ok(sobel_gradient(channel)
        .magnitude
        .map(|&m| m >= edge_threshold))
}

/// Normalised `ksize x ksize` Gaussian weights, row-major.
pub fn gaussian_kernel(sigma: f64, ksize: usize) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(StegoError::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if ksize < 3 || ksize.is_multiple_of(2) {
        return Err(StegoError::InvalidParameter(format!(
            "kernel size must be odd and at least 3, got {ksize}"
        )));
    }
    let half = (ksize / 2) as isize;
    let two_s2 = 2.0 * sigma * sigma;
    let mut k: Vec<f64> = (-half..=half)
        .flat_map(|dy| (-half..=half).map(move |dx| (dy, dx)))
        .map(|(dy, dx)| (-((dx * dx + dy * dy) as f64) / two_s2).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    Ok(k)
}

pub fn gaussian_smooth(channel: &Channel, sigma: f64, ksize: usize) -> Result<Channel> {
    gaussian_smooth_with(channel, sigma, ksize, Execution::default())
}

/// Gaussian blur, rounded to the nearest intensity.
pub fn gaussian_smooth_with(
    channel: &Channel,
    sigma: f64,
    ksize: usize,
    exec: Execution,
) -> Result<Channel> {
    let kernel = gaussian_kernel(sigma, ksize)?;
    let half = (ksize / 2) as isize;
    let (w, h) = channel.dims();
    let mut out = Grid::filled(w, h, 0u8);
    par::fill_rows(out.as_mut_slice(), w, exec, |row, dst| {
        for (col, v) in dst.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, weight) in kernel.iter().enumerate() {
                let dy = (i / ksize) as isize - half;
                let dx = (i % ksize) as isize - half;
                acc += weight * channel.get_clamped(row as isize + dy, col as isize + dx) as f64;
            }
            *v = acc.round().clamp(0.0, 255.0) as u8;
        }
    });
    Ok(out)
}

/// The four traceable directions around a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Direction {
    pub fn degrees(self) -> u16 {
        match self {
            Direction::Deg0 => 0,
            Direction::Deg45 => 45,
            Direction::Deg90 => 90,
            Direction::Deg135 => 135,
        }
    }

    /// Neighbour step `(drow, dcol)` along the direction, with rows growing downwards.
    fn step(self) -> (isize, isize) {
        match self {
            Direction::Deg0 => (0, 1),
            Direction::Deg45 => (1, 1),
            Direction::Deg90 => (1, 0),
            Direction::Deg135 => (1, -1),
        }
    }
}

/// Buckets an angle (taken modulo 180) into the nearest direction; lower bounds are inclusive.
pub fn quantize_direction(theta: f64) -> Direction {
    let t = theta.rem_euclid(180.0);
    if !(22.5..157.5).contains(&t) {
        Direction::Deg0
    } else if t < 67.5 {
        Direction::Deg45
    } else if t < 112.5 {
        Direction::Deg90
    } else {
        Direction::Deg135
    }
}

/// Thins ridges to one pixel along the gradient direction.
///
/// A pixel survives when it is strictly above its backward neighbour and at
/// least its forward neighbour, so a plateau keeps exactly one pixel.
/// Neighbours outside the grid count as 0.
pub fn nonmax_suppress(magnitude: &Grid<f64>, direction: &Grid<Direction>) -> Result<Grid<f64>> {
    magnitude.ensure_same_dims(direction)?;
    let (w, h) = magnitude.dims();
    let at = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
            0.0
        } else {
            *magnitude.get(r as usize, c as usize)
        }
    };
    Ok(Grid::from_fn(w, h, |row, col| {
        let m = *magnitude.get(row, col);
        let (dr, dc) = direction.get(row, col).step();
        let (r, c) = (row as isize, col as isize);
        if m > at(r - dr, c - dc) && m >= at(r + dr, c + dc) {
            m
        } else {
            0.0
        }
    }))
}

/// Two-level thresholding: pixels at or above `high` seed edges that grow
/// through 8-connected pixels at or above `low`.
pub fn hysteresis(magnitude: &Grid<f64>, low: f64, high: f64) -> Result<EdgeMap> {
    check_threshold(low, "low threshold")?;
    check_threshold(high, "high threshold")?;
    if low > high {
        return Err(StegoError::InvalidParameter(format!(
            "low threshold {low} exceeds high threshold {high}"
        )));
    }
    let (w, h) = magnitude.dims();
    let mut edges = Grid::filled(w, h, false);
    let mut queue = VecDeque::new();
    for row in 0..h {
        for col in 0..w {
            if *magnitude.get(row, col) >= high {
                *edges.get_mut(row, col) = true;
                queue.push_back((row, col));
            }
        }
    }
    while let Some((row, col)) = queue.pop_front() {
        for nr in row.saturating_sub(1)..=(row + 1).min(h - 1) {
            for nc in col.saturating_sub(1)..=(col + 1).min(w - 1) {
                if !*edges.get(nr, nc) && *magnitude.get(nr, nc) >= low {
                    *edges.get_mut(nr, nc) = true;
                    queue.push_back((nr, nc));
                }
            }
        }
    }
    Ok(edges)
}

/// Canny settings. Thresholds are relative: `high = high_frac * max`,
/// `low = low_ratio * high`, where `max` is the largest suppressed magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub sigma: f64,
    pub ksize: usize,
    pub high_frac: f64,
    pub low_ratio: f64,
    pub magnitude: MagnitudeForm,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            sigma: 1.4,
            ksize: 5,
            high_frac: 0.20,
            low_ratio: 0.40,
            magnitude: MagnitudeForm::Abs,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        gaussian_kernel(self.sigma, self.ksize)?;
        for (name, v) in [("high_frac", self.high_frac), ("low_ratio", self.low_ratio)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(StegoError::InvalidParameter(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Suppressed gradient magnitude, before hysteresis.
fn canny_response(channel: &Channel, params: &CannyParams, exec: Execution) -> Result<Grid<f64>> {
    params.validate()?;
    let smooth = gaussian_smooth_with(channel, params.sigma, params.ksize, exec)?;
    let field = sobel_gradient_with(&smooth, params.magnitude, exec);
    let direction = field.direction.map(|&t| quantize_direction(t));
    nonmax_suppress(&field.magnitude, &direction)
}

fn threshold_response(suppressed: &Grid<f64>, high_frac: f64, low_ratio: f64) -> Result<EdgeMap> {
    let max = suppressed.as_slice().iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Ok(suppressed.map(|_| false));
    }
    let high = high_frac * max;
    hysteresis(suppressed, low_ratio * high, high)
}

pub fn canny(channel: &Channel, params: &CannyParams) -> Result<EdgeMap> {
    let suppressed = canny_response(channel, params, Execution::default())?;
    threshold_response(&suppressed, params.high_frac, params.low_ratio)
}

/// Even-column pairs with both pixels flagged and neither saturated.
pub fn edge_pairs(edge_map: &EdgeMap, channel: &Channel) -> Result<Vec<PairLocus>> {
    edge_map.ensure_same_dims(channel)?;
    Ok(pairs_where(channel, |row, col| {
        *edge_map.get(row, col) && *edge_map.get(row, col + 1)
    }))
}

fn pairs_where(channel: &Channel, keep: impl Fn(usize, usize) -> bool) -> Vec<PairLocus> {
    let mut out = Vec::new();
    for row in 0..channel.height() {
        for col in (0..channel.width().saturating_sub(1)).step_by(2) {
            let (a, b) = (*channel.get(row, col), *channel.get(row, col + 1));
            if !is_saturated(a) && !is_saturated(b) && keep(row, col) {
                out.push(PairLocus::new(row, col));
            }
        }
    }
    out
}

/// Edge detector driving the baseline region selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeDetector {
    Sobel { magnitude: MagnitudeForm },
    Canny(CannyParams),
}

impl Default for EdgeDetector {
    fn default() -> Self {
        EdgeDetector::Sobel {
            magnitude: MagnitudeForm::Sqrt,
        }
    }
}

/// Reductions of `high_frac` tried by the Canny sweep.
pub const CANNY_SWEEP_STEPS: usize = 50;
/// Factor applied to `high_frac` at each sweep step.
pub const CANNY_SWEEP_FACTOR: f64 = 0.9;

/// Result of an adaptive edge sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSelection {
    /// Exactly enough pairs for the padded payload, in raster order.
    pub pairs: Vec<PairLocus>,
    /// Sobel magnitude threshold or Canny `high_frac` reached.
    pub parameter: f64,
    /// Pairs available at `parameter` before truncation.
    pub available: usize,
}

/// Picks edge pairs for `required_bits`, loosening the detector only as far
/// as needed. Returns the pairs and the final parameter: the Sobel magnitude
/// threshold or the Canny `high_frac`.
pub fn adaptive_edge_pairs(
    channel: &Channel,
    required_bits: usize,
    detector: &EdgeDetector,
) -> Result<(Vec<PairLocus>, f64)> {
    adaptive_edge_selection(channel, required_bits, detector).map(|s| (s.pairs, s.parameter))
}

pub fn adaptive_edge_selection(
    channel: &Channel,
    required_bits: usize,
    detector: &EdgeDetector,
) -> Result<EdgeSelection> {
    if required_bits == 0 {
        return Err(StegoError::InvalidParameter(
            "required bit count must be at least 1".into(),
        ));
    }
    let need = padded_bits(required_bits) / 2;
    match detector {
        EdgeDetector::Sobel { magnitude } => {
            let field = sobel_gradient_with(channel, *magnitude, Execution::default());
            let mag = &field.magnitude;
            // a pair survives threshold t iff its weaker pixel does
            let scored: Vec<(PairLocus, f64)> = pairs_where(channel, |_, _| true)
                .into_iter()
                .map(|p| (p, mag.get(p.row, p.col).min(*mag.get(p.row, p.col + 1))))
                .collect();
            if scored.len() < need {
                return Err(StegoError::Capacity {
                    required: 2 * need,
                    available: 2 * scored.len(),
                });
            }
            let mut strengths: Vec<f64> = scored.iter().map(|&(_, s)| s).collect();
            strengths.sort_unstable_by(|a, b| b.total_cmp(a));
            let threshold = strengths[need - 1];
            let mut pairs: Vec<PairLocus> = scored
                .into_iter()
                .filter(|&(_, s)| s >= threshold)
                .map(|(p, _)| p)
                .collect();
            let available = pairs.len();
            pairs.truncate(need);
            Ok(EdgeSelection {
                pairs,
                parameter: threshold,
                available,
            })
        }
        EdgeDetector::Canny(params) => {
            let suppressed = canny_response(channel, params, Execution::default())?;
            let mut high_frac = params.high_frac;
            let mut available = 0;
            for step in 0..=CANNY_SWEEP_STEPS {
                if step > 0 {
                    high_frac *= CANNY_SWEEP_FACTOR;
                }
                let map = threshold_response(&suppressed, high_frac, params.low_ratio)?;
                let mut pairs = edge_pairs(&map, channel)?;
                available = pairs.len();
                if available >= need {
                    pairs.truncate(need);
                    return Ok(EdgeSelection {
                        pairs,
                        parameter: high_frac,
                        available,
                    });
                }
            }
            Err(StegoError::Capacity {
                required: 2 * need,
                available: 2 * available,
            })
        }
    }
}

/// Most bits the detector can carry at its loosest setting.
pub fn edge_capacity(channel: &Channel, detector: &EdgeDetector) -> Result<usize> {
    match detector {
        EdgeDetector::Sobel { .. } => Ok(2 * pairs_where(channel, |_, _| true).len()),
        EdgeDetector::Canny(params) => {
            let suppressed = canny_response(channel, params, Execution::default())?;
            let loosest = params.high_frac * CANNY_SWEEP_FACTOR.powi(CANNY_SWEEP_STEPS as i32);
            let map = threshold_response(&suppressed, loosest, params.low_ratio)?;
            Ok(2 * edge_pairs(&map, channel)?.len())
        }
    }
}
