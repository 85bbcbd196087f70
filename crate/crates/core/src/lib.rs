//! Multimodal image registration with histograms of oriented phase
//! congruency (HOPC).
//!
//! The crate is generic over the floating-point scalar used for rasters,
//! filter responses and descriptors ([`Real`], implemented for `f32` and
//! `f64`). The aliases below fix the scalar to `f64`, which is what the
//! pipeline and the command-line tool use.

pub mod error;
pub mod eval;
mod fft;
pub mod descriptor;
pub mod phasecong;
pub mod pipeline;
pub mod raster;
pub mod scalar;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};
pub use raster::{Homography, Image, Point2};
pub use scalar::Real;

pub type GrayImage = Image<f64>;
pub type GrayImage32 = Image<f32>;
