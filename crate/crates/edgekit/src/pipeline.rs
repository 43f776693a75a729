//! The 4-step thresholded edge detector: grayscale input, Gaussian
//! smoothing, gradient magnitude, binary threshold.

use crate::error::{Error, Result};
use crate::filtering::{gaussian_blur, gradient, normalize_magnitude};
use crate::image::{EdgeMap, GrayImage, MAX_VALUE};
use crate::kernels::KernelChoice;

/// Configuration for the thresholded pipeline.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PipelineConfig {
    pub kernel: KernelChoice,
    pub sigma: f64,
    pub gaussian_ksize: usize,
    /// Skip the Gaussian smoothing step entirely.
    pub skip_smoothing: bool,
    /// Threshold on the normalized magnitude, in `[0, 255]`.
    pub threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            kernel: KernelChoice::Extended(3),
            sigma: 1.4,
            gaussian_ksize: 5,
            skip_smoothing: false,
            threshold: 128.0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.gaussian_ksize.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "gaussian ksize must be odd, got {}",
                self.gaussian_ksize
            )));
        }
        if !(0.0..=255.0).contains(&self.threshold) {
            return Err(Error::InvalidArgument(format!(
                "threshold must be in [0, 255], got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Normalized gradient magnitude after the smoothing and gradient stages
/// (pipeline steps 2 and 3). Shared by single-threshold detection and the
/// threshold sweep.
pub fn magnitude_image(image: &GrayImage, config: &PipelineConfig) -> Result<GrayImage> {
    config.validate()?;
    let smoothed;
    let source = if config.skip_smoothing {
        image
    } else {
        smoothed = gaussian_blur(image, config.sigma, config.gaussian_ksize)?;
        &smoothed
    };
    let (kx, ky) = config.kernel.pair()?;
    let field = gradient(source, &kx, &ky)?;
    Ok(normalize_magnitude(&field))
}

/// Threshold a magnitude image: a pixel is an edge iff its value is `>=`
/// the threshold.
pub fn threshold_magnitude(magnitude: &GrayImage, threshold: f64) -> EdgeMap {
    let data = magnitude
        .data()
        .iter()
        .map(|&v| if v >= threshold { MAX_VALUE } else { 0 })
        .collect();
    EdgeMap::new(magnitude.width(), magnitude.height(), data)
        .expect("thresholded values are binary")
}

/// Run all four pipeline steps.
pub fn detect_edges(image: &GrayImage, config: &PipelineConfig) -> Result<EdgeMap> {
    let magnitude = magnitude_image(image, config)?;
    Ok(threshold_magnitude(&magnitude, config.threshold))
}

/// Threshold sweep: the gradient is computed once, then thresholded per
/// entry. Entry `i` equals `detect_edges` at `thresholds[i]`.
pub fn detect_edges_sweep(
    image: &GrayImage,
    config: &PipelineConfig,
    thresholds: &[f64],
) -> Result<Vec<EdgeMap>> {
    if thresholds.is_empty() {
        return Err(Error::InvalidArgument(
            "threshold sweep needs at least one threshold".into(),
        ));
    }
    if let Some(t) = thresholds.iter().find(|t| !(0.0..=255.0).contains(*t)) {
        return Err(Error::InvalidArgument(format!(
            "sweep threshold {t} outside [0, 255]"
        )));
    }
    let magnitude = magnitude_image(image, config)?;
    Ok(thresholds
        .iter()
        .map(|&t| threshold_magnitude(&magnitude, t))
        .collect())
}

/// The default sweep grid: integer thresholds 1..=255. Threshold 0 is
/// excluded as degenerate (every pixel passes a `>= 0` test).
pub fn default_thresholds() -> Vec<f64> {
    (1..=255).map(|t| t as f64).collect()
}
