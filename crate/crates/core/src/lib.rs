//! Training-free image segmentation with an inverse-QFT pixel classifier.
//!
//! Each pixel's channels are encoded as qubit relative phases; the 8-point
//! inverse DFT of the resulting product state gives a probability per basis
//! state and the pixel takes the most probable one. The crate also carries
//! the Otsu and k-means comparison methods, binary mIOU scoring with void
//! exclusion, and PNG/JPEG I/O.
//!
//! ```
//! use iqft_core::iqft::{classify_rgb_pixel, AngleParams};
//!
//! let params = AngleParams::uniform(std::f64::consts::PI).unwrap();
//! assert_eq!(classify_rgb_pixel([0.0, 0.0, 0.0], &params).unwrap().value(), 0);
//! ```
//!
//! Per-pixel kernels run on the rayon pool when the `parallel` feature is
//! enabled (the default); see [`exec::Execution`].

pub mod baselines;
mod error;
pub mod exec;
pub mod imageio;
pub mod iqft;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod theta;

pub use error::{Error, Result};
pub use exec::Execution;
