//! Command-line front end. [`run`] executes one command in-process and
//! returns its exit code and output; `main` only prints them.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchConfig};
use crate::edges::{CannyParams, MagnitudeForm};
use crate::error::StegoError;
use crate::metrics::{self, MetricScope, PsnrPeak};
use crate::par::Execution;
use crate::pipeline::{self, EmbedOptions, Method};
use crate::raster::{load_image, save_image, ChannelId, ImageFormat};
use crate::region::{deserialize_key, serialize_key};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CAPACITY: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_KEY: i32 = 4;

/// Result of one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl CommandOutcome {
    fn ok(stdout: impl Into<Vec<u8>>) -> Self {
        CommandOutcome {
            exit_code: EXIT_OK,
            stdout: stdout.into(),
            stderr: String::new(),
        }
    }

    fn fail(exit_code: i32, msg: impl Into<String>) -> Self {
        CommandOutcome {
            exit_code,
            stdout: Vec::new(),
            stderr: msg.into(),
        }
    }

    pub fn stdout_str(&self) -> String {
        String::from_utf8_lossy(&self.stdout).into_owned()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "edgestego",
    version,
    about = "Threshold-region LSBMR steganography for colour bitmaps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hide a message in a cover image and write the stego image plus key.
    Embed(EmbedArgs),
    /// Recover a message using a stego image and its key.
    Extract(ExtractArgs),
    /// Report the region a payload would use.
    Capacity(CapacityArgs),
    /// MSE and PSNR between a cover and a stego image.
    Metrics(MetricsArgs),
    /// Benchmark all methods over a directory of images.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ChannelArg {
    R,
    G,
    B,
}

impl From<ChannelArg> for ChannelId {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::R => ChannelId::R,
            ChannelArg::G => ChannelId::G,
            ChannelArg::B => ChannelId::B,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Threshold,
    Sobel,
    Canny,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Threshold => Method::Threshold,
            MethodArg::Sobel => Method::Sobel,
            MethodArg::Canny => Method::Canny,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MagnitudeArg {
    Sqrt,
    Abs,
}

impl From<MagnitudeArg> for MagnitudeForm {
    fn from(m: MagnitudeArg) -> Self {
        match m {
            MagnitudeArg::Sqrt => MagnitudeForm::Sqrt,
            MagnitudeArg::Abs => MagnitudeForm::Abs,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
enum DenominatorArg {
    #[default]
    Paper,
    Classic,
}

impl From<DenominatorArg> for PsnrPeak {
    fn from(d: DenominatorArg) -> Self {
        match d {
            DenominatorArg::Paper => PsnrPeak::Paper,
            DenominatorArg::Classic => PsnrPeak::Classic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
enum ScopeArg {
    #[default]
    Single,
    All,
}

#[derive(Debug, Args)]
struct EdgeArgs {
    /// Gaussian sigma for Canny.
    #[arg(long, default_value_t = 1.4)]
    sigma: f64,
    /// Gaussian kernel size for Canny (odd).
    #[arg(long, default_value_t = 5)]
    ksize: usize,
    /// Canny high threshold as a fraction of the peak suppressed magnitude.
    #[arg(long = "high-frac", default_value_t = 0.20)]
    high_frac: f64,
    /// Canny low threshold as a fraction of the high threshold.
    #[arg(long = "low-ratio", default_value_t = 0.40)]
    low_ratio: f64,
    /// Gradient magnitude form (default: sqrt for Sobel, abs for Canny).
    #[arg(long, value_enum)]
    magnitude: Option<MagnitudeArg>,
}

impl EdgeArgs {
    fn options(&self, channel: ChannelArg, method: MethodArg, seed: u64) -> EmbedOptions {
        let mut canny = CannyParams {
            sigma: self.sigma,
            ksize: self.ksize,
            high_frac: self.high_frac,
            low_ratio: self.low_ratio,
            ..CannyParams::default()
        };
        let mut sobel_magnitude = MagnitudeForm::Sqrt;
        if let Some(m) = self.magnitude {
            canny.magnitude = m.into();
            sobel_magnitude = m.into();
        }
        EmbedOptions {
            channel: channel.into(),
            method: method.into(),
            seed,
            canny,
            sobel_magnitude,
        }
    }
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long)]
    cover: PathBuf,
    /// Output stego image (.bmp or .png).
    #[arg(long)]
    stego: PathBuf,
    /// Output key file.
    #[arg(long)]
    key: PathBuf,
    #[arg(
        long,
        conflicts_with = "message_file",
        required_unless_present = "message_file"
    )]
    message: Option<String>,
    #[arg(long = "message-file")]
    message_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "r")]
    channel: ChannelArg,
    #[arg(long, value_enum, default_value = "threshold")]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "psnr-denominator", value_enum, default_value = "paper")]
    psnr_denominator: DenominatorArg,
    #[command(flatten)]
    edge: EdgeArgs,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long)]
    stego: PathBuf,
    #[arg(long)]
    key: PathBuf,
    /// Write the message here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[arg(long)]
    cover: PathBuf,
    #[arg(long, value_enum, default_value = "r")]
    channel: ChannelArg,
    #[arg(long, value_enum, default_value = "threshold")]
    method: MethodArg,
    /// Payload size in bits.
    #[arg(long = "payload-bits")]
    payload_bits: usize,
    #[command(flatten)]
    edge: EdgeArgs,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    cover: PathBuf,
    #[arg(long)]
    stego: PathBuf,
    #[arg(long, value_enum, default_value = "r")]
    channel: ChannelArg,
    #[arg(long, value_enum, default_value = "single")]
    channels: ScopeArg,
    #[arg(long = "psnr-denominator", value_enum, default_value = "paper")]
    psnr_denominator: DenominatorArg,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of .bmp/.png cover images.
    #[arg(long)]
    corpus: PathBuf,
    /// Report directory for records.csv and summary.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = bench::DEFAULT_PAYLOADS)]
    payloads: Vec<usize>,
    #[arg(long, value_enum, default_value = "r")]
    channel: ChannelArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock time per cell (reports are then not reproducible).
    #[arg(long)]
    timing: bool,
    /// Process images one at a time.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    edge: EdgeArgs,
}

fn exit_code(err: &StegoError) -> i32 {
    match err {
        StegoError::Capacity { .. } => EXIT_CAPACITY,
        StegoError::Io(_)
        | StegoError::Unreadable(_)
        | StegoError::UnsupportedFormat(_)
        | StegoError::ZeroDimension
        | StegoError::Csv(_) => EXIT_IO,
        StegoError::KeyTruncated(_)
        | StegoError::KeyChecksum { .. }
        | StegoError::KeyMagic
        | StegoError::KeyVersion(_)
        | StegoError::InvalidKey(_)
        | StegoError::Verification(_) => EXIT_KEY,
        StegoError::DimensionMismatch { .. }
        | StegoError::SaturatedPair { .. }
        | StegoError::InvalidPair { .. }
        | StegoError::InvalidParameter(_)
        | StegoError::BitLength(_)
        | StegoError::Empty(_) => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    CommandOutcome::ok(e.to_string())
                }
                _ => CommandOutcome::fail(EXIT_USAGE, e.to_string()),
            };
        }
    };
    match cli.command {
        Command::Embed(a) => cmd_embed(&a),
        Command::Extract(a) => cmd_extract(&a),
        Command::Capacity(a) => cmd_capacity(&a),
        Command::Metrics(a) => cmd_metrics(&a),
        Command::Bench(a) => cmd_bench(&a),
    }
}

fn failure(err: StegoError) -> CommandOutcome {
    CommandOutcome::fail(exit_code(&err), format!("error: {err}"))
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}

fn fmt_parameter(method: Method, v: f64) -> String {
    match method {
        Method::Threshold => format!("threshold: {}", v as u8),
        Method::Sobel => format!("sobel_threshold: {v:.6}"),
        Method::Canny => format!("canny_high_frac: {v:.6}"),
    }
}

fn cmd_embed(a: &EmbedArgs) -> CommandOutcome {
    let run = || -> Result<String, StegoError> {
        let format = ImageFormat::from_path(&a.stego)?;
        let message = match (&a.message, &a.message_file) {
            (Some(m), _) => m.as_bytes().to_vec(),
            (None, Some(p)) => fs::read(p)?,
            (None, None) => unreachable!("clap requires one message source"),
        };
        if message.is_empty() {
            return Err(StegoError::Empty("message"));
        }
        let cover = load_image(&a.cover)?;
        let opts = a.edge.options(a.channel, a.method, a.seed);
        let out = pipeline::embed_message(&cover, &message, &opts)?;
        save_image(&out.stego, &a.stego, format)?;
        fs::write(&a.key, serialize_key(&out.key))?;
        let q = metrics::quality_report(
            &cover,
            &out.stego,
            MetricScope::Channel(opts.channel),
            a.psnr_denominator.into(),
        )?;
        let mut s = String::new();
        writeln!(s, "method: {}", opts.method).unwrap();
        writeln!(s, "channel: {}", opts.channel).unwrap();
        writeln!(s, "{}", fmt_parameter(opts.method, out.parameter)).unwrap();
        writeln!(s, "pairs: {}", out.key.pairs.len()).unwrap();
        writeln!(s, "bits: {}", out.key.message_bit_length).unwrap();
        writeln!(s, "mse: {:.6}", q.mse).unwrap();
        writeln!(s, "psnr: {}", fmt_db(q.psnr)).unwrap();
        Ok(s)
    };
    run().map(CommandOutcome::ok).unwrap_or_else(failure)
}

fn cmd_extract(a: &ExtractArgs) -> CommandOutcome {
    let run = || -> Result<Vec<u8>, StegoError> {
        let key_bytes = fs::read(&a.key)?;
        let key = deserialize_key(&key_bytes)?;
        let stego = load_image(&a.stego)?;
        let message = pipeline::extract_message(&stego, &key).map_err(|e| match e {
            StegoError::DimensionMismatch { .. } | StegoError::BitLength(_) => {
                StegoError::InvalidKey(format!("key does not match image: {e}"))
            }
            other => other,
        })?;
        match &a.out {
            Some(path) => {
                fs::write(path, &message)?;
                Ok(Vec::new())
            }
            None => Ok(message),
        }
    };
    run().map(CommandOutcome::ok).unwrap_or_else(failure)
}

fn cmd_capacity(a: &CapacityArgs) -> CommandOutcome {
    let run = || -> Result<String, StegoError> {
        let cover = load_image(&a.cover)?;
        let opts = a.edge.options(a.channel, a.method, 0);
        let plane = cover.channel(opts.channel);
        let max_bits = pipeline::max_capacity(&plane, &opts)?;
        let sel = pipeline::select_region(&plane, a.payload_bits, &opts)?;
        let mut s = String::new();
        writeln!(s, "method: {}", opts.method).unwrap();
        writeln!(s, "channel: {}", opts.channel).unwrap();
        writeln!(s, "payload_bits: {}", a.payload_bits).unwrap();
        writeln!(s, "{}", fmt_parameter(opts.method, sel.parameter)).unwrap();
        writeln!(s, "pairs_used: {}", sel.pairs.len()).unwrap();
        writeln!(s, "pairs_qualifying: {}", sel.available).unwrap();
        writeln!(s, "max_bits: {max_bits}").unwrap();
        Ok(s)
    };
    run().map(CommandOutcome::ok).unwrap_or_else(failure)
}

fn cmd_metrics(a: &MetricsArgs) -> CommandOutcome {
    let run = || -> Result<String, StegoError> {
        let cover = load_image(&a.cover)?;
        let stego = load_image(&a.stego)?;
        let scope = match a.channels {
            ScopeArg::Single => MetricScope::Channel(a.channel.into()),
            ScopeArg::All => MetricScope::All,
        };
        let q = metrics::quality_report(&cover, &stego, scope, a.psnr_denominator.into())?;
        Ok(format!(
            "scope: {}\npixels: {}\nmse: {:.6}\npsnr: {}\n",
            q.scope,
            q.pixel_count,
            q.mse,
            fmt_db(q.psnr)
        ))
    };
    run().map(CommandOutcome::ok).unwrap_or_else(failure)
}

fn cmd_bench(a: &BenchArgs) -> CommandOutcome {
    let run = || -> Result<String, StegoError> {
        let opts = a.edge.options(a.channel, MethodArg::Threshold, a.seed);
        let cfg = BenchConfig {
            payloads: a.payloads.clone(),
            methods: Method::ALL.to_vec(),
            channel: opts.channel,
            seed: a.seed,
            canny: opts.canny,
            sobel_magnitude: opts.sobel_magnitude,
            timing: a.timing,
            exec: if a.sequential {
                Execution::Sequential
            } else {
                Execution::default()
            },
        };
        let summary = bench::run_bench(&a.corpus, &cfg, &a.out)?;
        let mut buf = Vec::new();
        bench::write_summary_csv(&summary, &mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    };
    run().map(CommandOutcome::ok).unwrap_or_else(failure)
}
