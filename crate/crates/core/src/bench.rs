//! Corpus benchmark: every (image, method, payload) cell is embedded,
//! verified by extraction and scored, then aggregated per payload.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::edges::{CannyParams, MagnitudeForm};
use crate::error::{Result, StegoError};
use crate::metrics::{self, improvement_pct, Better};
use crate::par::{self, Execution};
use crate::pipeline::{embed_message, extract_message, EmbedOptions, Method};
use crate::raster::{load_image, ChannelId, RgbRaster};

pub const DEFAULT_PAYLOADS: [usize; 4] = [400, 600, 900, 1200];

pub const RECORDS_HEADER: [&str; 8] = [
    "image",
    "method",
    "payload_bits",
    "threshold_or_param",
    "mse",
    "psnr",
    "modified_pixels",
    "elapsed_ms",
];

pub const SUMMARY_HEADER: [&str; 8] = [
    "payload_bits",
    "method",
    "mean_mse",
    "mean_psnr",
    "mse_improvement_vs_sobel_pct",
    "mse_improvement_vs_canny_pct",
    "psnr_improvement_vs_sobel_pct",
    "psnr_improvement_vs_canny_pct",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub payloads: Vec<usize>,
    pub methods: Vec<Method>,
    pub channel: ChannelId,
    pub seed: u64,
    pub canny: CannyParams,
    pub sobel_magnitude: MagnitudeForm,
    /// Record wall-clock time per cell; off keeps reports byte-reproducible.
    pub timing: bool,
    pub exec: Execution,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            payloads: DEFAULT_PAYLOADS.to_vec(),
            methods: Method::ALL.to_vec(),
            channel: ChannelId::R,
            seed: 0,
            canny: CannyParams::default(),
            sobel_magnitude: MagnitudeForm::Sqrt,
            timing: false,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub image_id: String,
    pub method: Method,
    pub payload_bits: usize,
    pub threshold_or_param: f64,
    pub mse: f64,
    pub psnr: f64,
    pub modified_pixels: usize,
    pub pixel_count: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub payload_bits: usize,
    pub method: Method,
    pub mean_mse: f64,
    pub mean_psnr: f64,
    pub mse_vs_sobel: Option<f64>,
    pub mse_vs_canny: Option<f64>,
    pub psnr_vs_sobel: Option<f64>,
    pub psnr_vs_canny: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchSummary {
    pub rows: Vec<SummaryRow>,
    /// Per image, `(payload_bits, T)` for the threshold method in payload order.
    pub threshold_series: BTreeMap<String, Vec<(usize, f64)>>,
}

impl BenchSummary {
    pub fn row(&self, payload_bits: usize, method: Method) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.payload_bits == payload_bits && r.method == method)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Printable-ASCII message of `ceil(payload_bits / 8)` bytes, fixed by
/// `(seed, image_id, payload_bits)`.
pub fn bench_message(seed: u64, image_id: &str, payload_bits: usize) -> Vec<u8> {
    let mix = seed
        ^ fnv1a(image_id.as_bytes()).rotate_left(17)
        ^ (payload_bits as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(mix);
    (0..payload_bits.div_ceil(8))
        .map(|_| rng.gen_range(0x20u8..=0x7e))
        .collect()
}

/// Runs one cell, verifying the round trip.
pub fn evaluate_cell(
    image_id: &str,
    cover: &RgbRaster,
    method: Method,
    payload_bits: usize,
    cfg: &BenchConfig,
) -> Result<BenchRecord> {
    let message = bench_message(cfg.seed, image_id, payload_bits);
    let opts = EmbedOptions {
        channel: cfg.channel,
        method,
        seed: cfg.seed,
        canny: cfg.canny,
        sobel_magnitude: cfg.sobel_magnitude,
    };
    let start = Instant::now();
    let out = embed_message(cover, &message, &opts)?;
    let elapsed = start.elapsed();
    if extract_message(&out.stego, &out.key)? != message {
        return Err(StegoError::Verification(format!(
            "{image_id}/{method}/{payload_bits}: extracted message differs"
        )));
    }
    let before = cover.channel(cfg.channel);
    let after = out.stego.channel(cfg.channel);
    let mse = metrics::mse(&before, &after)?;
    let modified = metrics::count_modified(&before, &after)?;
    let sse = metrics::squared_error(&before, &after)?;
    if sse != modified as u64 {
        return Err(StegoError::Verification(format!(
            "{image_id}/{method}/{payload_bits}: a pixel moved by more than one"
        )));
    }
    Ok(BenchRecord {
        image_id: image_id.to_string(),
        method,
        payload_bits,
        threshold_or_param: out.parameter,
        mse,
        psnr: metrics::psnr(mse)?,
        modified_pixels: modified,
        pixel_count: before.len(),
        elapsed_ms: if cfg.timing {
            elapsed.as_secs_f64() * 1e3
        } else {
            0.0
        },
    })
}

/// All cells for one image; capacity shortfalls are logged and skipped.
pub fn evaluate_image(
    image_id: &str,
    cover: &RgbRaster,
    cfg: &BenchConfig,
) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for &payload in &cfg.payloads {
            match evaluate_cell(image_id, cover, method, payload, cfg) {
                Ok(rec) => out.push(rec),
                Err(StegoError::Capacity { required, available }) => log::warn!(
                    "skipping {image_id}/{method}/{payload}: needs {required} bits, {available} available"
                ),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// Evaluates every image (concurrently under [`Execution::Parallel`]);
/// records come back sorted by image, method, payload.
pub fn evaluate_corpus(
    images: &[(String, RgbRaster)],
    cfg: &BenchConfig,
) -> Result<Vec<BenchRecord>> {
    let per_image = par::map_collect(images, cfg.exec, |(id, raster)| {
        evaluate_image(id, raster, cfg)
    });
    let mut records = Vec::new();
    for r in per_image {
        records.extend(r?);
    }
    records.sort_by(|a, b| {
        (&a.image_id, a.method, a.payload_bits).cmp(&(&b.image_id, b.method, b.payload_bits))
    });
    Ok(records)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-payload means and improvements of each method over the edge baselines.
pub fn summarize(records: &[BenchRecord]) -> Result<BenchSummary> {
    if records.is_empty() {
        return Err(StegoError::Empty("benchmark records"));
    }
    let mut groups: BTreeMap<(usize, Method), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.payload_bits, r.method))
            .or_default()
            .push(r);
    }
    let means: BTreeMap<(usize, Method), (f64, f64)> = groups
        .iter()
        .map(|(k, rs)| {
            let m = mean(rs.iter().map(|r| r.mse)).unwrap();
            let p = mean(rs.iter().map(|r| r.psnr)).unwrap();
            (*k, (m, p))
        })
        .collect();

    let vs = |payload: usize, baseline: Method, value: f64, psnr: bool| -> Option<f64> {
        let (bm, bp) = means.get(&(payload, baseline))?;
        if psnr {
            improvement_pct(*bp, value, Better::Higher).ok()
        } else {
            improvement_pct(*bm, value, Better::Lower).ok()
        }
    };
    let rows = means
        .iter()
        .map(|(&(payload, method), &(mse, psnr))| SummaryRow {
            payload_bits: payload,
            method,
            mean_mse: mse,
            mean_psnr: psnr,
            mse_vs_sobel: vs(payload, Method::Sobel, mse, false),
            mse_vs_canny: vs(payload, Method::Canny, mse, false),
            psnr_vs_sobel: vs(payload, Method::Sobel, psnr, true),
            psnr_vs_canny: vs(payload, Method::Canny, psnr, true),
        })
        .collect();

    let mut threshold_series: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.method == Method::Threshold) {
        threshold_series
            .entry(r.image_id.clone())
            .or_default()
            .push((r.payload_bits, r.threshold_or_param));
    }
    threshold_series
        .values_mut()
        .for_each(|s| s.sort_by_key(|&(p, _)| p));
    Ok(BenchSummary {
        rows,
        threshold_series,
    })
}

fn fmt6(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.6}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt6).unwrap_or_default()
}

pub fn write_records_csv(records: &[BenchRecord], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        w.write_record([
            r.image_id.clone(),
            r.method.to_string(),
            r.payload_bits.to_string(),
            fmt6(r.threshold_or_param),
            fmt6(r.mse),
            fmt6(r.psnr),
            r.modified_pixels.to_string(),
            format!("{:.3}", r.elapsed_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv(summary: &BenchSummary, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in &summary.rows {
        w.write_record([
            r.payload_bits.to_string(),
            r.method.to_string(),
            fmt6(r.mean_mse),
            fmt6(r.mean_psnr),
            fmt_opt(r.mse_vs_sobel),
            fmt_opt(r.mse_vs_canny),
            fmt_opt(r.psnr_vs_sobel),
            fmt_opt(r.psnr_vs_canny),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Loads every `.bmp`/`.png` in `dir`, keyed by file name, in name order.
pub fn load_corpus(dir: &Path) -> Result<Vec<(String, RgbRaster)>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("bmp") || e.eq_ignore_ascii_case("png"))
        })
        .collect();
    paths.sort();
    let mut images = Vec::with_capacity(paths.len());
    for p in paths {
        let id = p.file_name().unwrap().to_string_lossy().into_owned();
        match load_image(&p) {
            Ok(img) => images.push((id, img)),
            Err(e) => log::warn!("skipping {id}: {e}"),
        }
    }
    if images.is_empty() {
        return Err(StegoError::Empty("corpus contains no loadable images"));
    }
    Ok(images)
}

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Benchmarks a corpus directory, writing `records.csv` and `summary.csv` into `report_dir`.
pub fn run_bench(corpus_dir: &Path, cfg: &BenchConfig, report_dir: &Path) -> Result<BenchSummary> {
    if cfg.payloads.is_empty() {
        return Err(StegoError::Empty("payload list"));
    }
    let images = load_corpus(corpus_dir)?;
    let records = evaluate_corpus(&images, cfg)?;
    let summary = summarize(&records)?;
    fs::create_dir_all(report_dir)?;
    write_records_csv(&records, fs::File::create(report_dir.join(RECORDS_FILE))?)?;
    write_summary_csv(&summary, fs::File::create(report_dir.join(SUMMARY_FILE))?)?;
    Ok(summary)
}
