//! Canny edge detection with pluggable gradient kernels.
//!
//! Stages: Gaussian smoothing, gradient magnitude/orientation, non-maximum
//! suppression, double threshold derived from the maximum magnitude, edge
//! tracking by hysteresis.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::filtering::{gaussian_blur, gradient, GradientField, Plane};
use crate::image::{EdgeMap, GrayImage, MAX_VALUE};
use crate::kernels::KernelChoice;

/// Where `max(input)` for the double threshold comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ThresholdSource {
    /// Maximum of the gradient magnitude plane feeding suppression. Adapts
    /// the thresholds to the kernel family; the default.
    GradientPlane,
    /// Maximum intensity of the source image, the literal reading.
    SourceImage,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CannyConfig {
    pub kernel: KernelChoice,
    pub sigma: f64,
    pub gaussian_ksize: usize,
    pub high_ratio: f64,
    pub low_ratio: f64,
    pub threshold_source: ThresholdSource,
}

impl Default for CannyConfig {
    fn default() -> Self {
        CannyConfig {
            kernel: KernelChoice::Extended(3),
            sigma: 1.4,
            gaussian_ksize: 5,
            high_ratio: 0.7,
            low_ratio: 0.3,
            threshold_source: ThresholdSource::GradientPlane,
        }
    }
}

impl CannyConfig {
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
        for (name, r) in [
            ("high-ratio", self.high_ratio),
            ("low-ratio", self.low_ratio),
        ] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be in (0, 1], got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// High and low thresholds: `T_h = max * high_ratio`, `T_l = T_h * low_ratio`.
pub fn double_threshold(max_magnitude: f64, config: &CannyConfig) -> (f64, f64) {
    let high = max_magnitude * config.high_ratio;
    let low = high * config.low_ratio;
    (high, low)
}

/// Quantize an orientation to one of 4 direction bins and return the pixel
/// offset along that direction. Bins are 0, 45, 90, 135 degrees; angles on
/// a 22.5-degree boundary round toward the lower bin.
fn direction_offset(orientation: f64) -> (isize, isize) {
    let deg = orientation.to_degrees().rem_euclid(180.0);
    // half-down rounding to the nearest multiple of 45
    let bin = ((deg / 45.0 - 0.5).ceil() as isize).rem_euclid(4);
    match bin {
        0 => (1, 0),  // gradient along x: compare left/right
        1 => (1, 1),  // 45 degrees
        2 => (0, 1),  // gradient along y: compare up/down
        _ => (-1, 1), // 135 degrees
    }
}

/// Non-maximum suppression: a pixel survives iff its magnitude is `>=` both
/// neighbors along the quantized gradient direction. Neighbors outside the
/// image count as 0.
pub fn non_max_suppression(field: &GradientField) -> Plane {
    let (w, h) = (field.width as isize, field.height as isize);
    let mut data = vec![0.0; field.magnitude.len()];
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            let m = field.magnitude[idx];
            if m == 0.0 {
                continue;
            }
            let (dx, dy) = direction_offset(field.orientation[idx]);
            let neighbor = |nx: isize, ny: isize| -> f64 {
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    0.0
                } else {
                    field.magnitude[(ny * w + nx) as usize]
                }
            };
            if m >= neighbor(x + dx, y + dy) && m >= neighbor(x - dx, y - dy) {
                data[idx] = m;
            }
        }
    }
    Plane {
        width: field.width,
        height: field.height,
        data,
    }
}

/// Edge tracking: strong pixels (`>= high`) seed a flood fill over
/// 8-connected weak pixels (`>= low`). Uses an explicit worklist.
pub fn hysteresis(suppressed: &Plane, high: f64, low: f64) -> Result<EdgeMap> {
    if low > high {
        return Err(Error::InvalidArgument(format!(
            "low threshold {low} exceeds high threshold {high}"
        )));
    }
    let (w, h) = (suppressed.width as isize, suppressed.height as isize);
    let mut keep = vec![false; suppressed.data.len()];
    let mut queue = VecDeque::new();
    for (i, &v) in suppressed.data.iter().enumerate() {
        if v >= high {
            keep[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w as usize) as isize, (i / w as usize) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let ni = (ny * w + nx) as usize;
                if !keep[ni] && suppressed.data[ni] >= low {
                    keep[ni] = true;
                    queue.push_back(ni);
                }
            }
        }
    }
    let data = keep
        .into_iter()
        .map(|k| if k { MAX_VALUE } else { 0 })
        .collect();
    EdgeMap::new(suppressed.width, suppressed.height, data)
}

/// Full Canny run: smoothing, gradient, suppression, hysteresis.
pub fn canny(image: &GrayImage, config: &CannyConfig) -> Result<EdgeMap> {
    config.validate()?;
    let smoothed = gaussian_blur(image, config.sigma, config.gaussian_ksize)?;
    let (kx, ky) = config.kernel.pair()?;
    let field = gradient(&smoothed, &kx, &ky)?;
    if field.max_magnitude() <= crate::filtering::MAGNITUDE_NOISE_FLOOR {
        // constant input: only rounding residue in the gradient plane
        return EdgeMap::new(
            image.width(),
            image.height(),
            vec![0; image.width() * image.height()],
        );
    }
    let max = match config.threshold_source {
        ThresholdSource::GradientPlane => field.max_magnitude(),
        ThresholdSource::SourceImage => image.max_intensity(),
    };
    let suppressed = non_max_suppression(&field);
    let (high, low) = double_threshold(max, config);
    hysteresis(&suppressed, high, low)
}
