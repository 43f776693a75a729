//! Edge detection built around zero-dilated extended Sobel kernels.
//!
//! The crate provides:
//!
//! - [`image`]: grayscale image / binary edge map types with PGM and PNG I/O
//! - [`kernels`]: the classical 3x3 Sobel pair, its zero-dilated extensions
//!   (5x5 up to 15x15) and a registry of comparison kernels
//! - [`filtering`]: 2-D convolution with replicate borders, Gaussian
//!   smoothing and gradient magnitude/orientation
//! - [`pipeline`]: the 4-step thresholded edge detector
//! - [`canny`]: a Canny detector with pluggable gradient kernels
//! - [`eval`]: tolerant ground-truth matching and precision/recall/F1
//!   benchmarking over datasets

pub mod canny;
pub mod error;
pub mod eval;
pub mod filtering;
pub mod image;
pub mod kernels;
pub mod pipeline;

pub use crate::canny::{CannyConfig, ThresholdSource};
pub use crate::error::{Error, Result};
pub use crate::eval::{ConfusionCounts, EvalReport, Prf};
pub use crate::filtering::{GradientField, Plane};
pub use crate::image::{EdgeMap, GrayImage};
pub use crate::kernels::{Axis, Kernel, KernelChoice};
pub use crate::pipeline::PipelineConfig;
