//! # edgestego
//!
//! Hides messages in colour bitmaps with LSB matching revisited, placing the
//! payload on pixel pairs whose intensity difference clears a threshold
//! chosen from the message size. Sobel and Canny edge regions are provided as
//! baselines, along with MSE/PSNR scoring and a corpus benchmark.
//!
//! ```
//! use edgestego::{embed_message, extract_message, EmbedOptions, RgbRaster};
//!
//! let cover = RgbRaster::from_fn(64, 64, |r, c| {
//!     let v = ((r * 31 + c * 17) % 250 + 3) as u8;
//!     [v, v / 2 + 1, 200]
//! })
//! .unwrap();
//! let out = embed_message(&cover, b"hello", &EmbedOptions::default()).unwrap();
//! assert_eq!(extract_message(&out.stego, &out.key).unwrap(), b"hello");
//! ```

pub mod bench;
pub mod cli;
pub mod edges;
pub mod error;
pub mod lsbmr;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod raster;
pub mod region;

pub use edges::{CannyParams, EdgeDetector, EdgeMap, GradientField, MagnitudeForm};
pub use error::{Result, StegoError};
pub use lsbmr::{BitStream, DeterministicRng, EmbedUnit};
pub use metrics::{MetricScope, PsnrPeak, QualityReport};
pub use par::Execution;
pub use pipeline::{embed_message, extract_message, EmbedOptions, EmbedOutcome, Method};
pub use raster::{Channel, ChannelId, Grid, ImageFormat, RgbRaster};
pub use region::{PairLocus, RegionKey};
