//! 2-D convolution with replicate borders, Gaussian smoothing and the
//! gradient magnitude/orientation field.
//!
//! Kernels are applied as correlation (no flip). Zero coefficients are
//! skipped, so the dilated kernels cost the same six taps per pixel at every
//! size. Each output pixel is an independent fixed-order sum, which keeps
//! row-parallel execution bitwise deterministic.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::kernels::{Axis, Kernel};

/// A real-valued response plane with image dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-pixel gradient magnitude and orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    /// `sqrt(gx^2 + gy^2)` per pixel, non-negative.
    pub magnitude: Vec<f64>,
    /// `atan2(gy, gx)` per pixel, in `(-pi, pi]`.
    pub orientation: Vec<f64>,
}

impl GradientField {
    pub fn magnitude_plane(&self) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.magnitude.clone(),
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude.iter().copied().fold(0.0, f64::max)
    }
}

/// Correlate `image` with `kernel`, replicate border, output same size.
pub fn convolve(image: &GrayImage, kernel: &Kernel) -> Plane {
    let (w, h) = (image.width(), image.height());
    let c = (kernel.size() - 1) as isize / 2;
    let taps = kernel.nonzero_taps();
    let mut data = vec![0.0; w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(i, j, weight) in &taps {
                let sy = y as isize + i as isize - c;
                let sx = x as isize + j as isize - c;
                acc += weight * image.get_clamped(sx, sy);
            }
            *out = acc;
        }
    });
    Plane {
        width: w,
        height: h,
        data,
    }
}

/// Sampled 2-D Gaussian, normalized to sum 1.
pub fn gaussian_kernel_2d(sigma: f64, ksize: usize) -> Result<Vec<f64>> {
    if sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if ksize.is_multiple_of(2) || ksize == 0 {
        return Err(Error::InvalidArgument(format!(
            "Gaussian kernel size must be odd, got {ksize}"
        )));
    }
    let c = (ksize - 1) as isize / 2;
    let mut coeffs = Vec::with_capacity(ksize * ksize);
    for i in 0..ksize as isize {
        for j in 0..ksize as isize {
            let dy = (i - c) as f64;
            let dx = (j - c) as f64;
            coeffs.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
        }
    }
    let sum: f64 = coeffs.iter().sum();
    for v in &mut coeffs {
        *v /= sum;
    }
    Ok(coeffs)
}

/// Smooth with a normalized sampled Gaussian; output clamped to `[0, 255]`.
pub fn gaussian_blur(image: &GrayImage, sigma: f64, ksize: usize) -> Result<GrayImage> {
    let coeffs = gaussian_kernel_2d(sigma, ksize)?;
    let (w, h) = (image.width(), image.height());
    let c = (ksize - 1) as isize / 2;
    let mut data = vec![0.0; w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..ksize {
                for j in 0..ksize {
                    let sy = y as isize + i as isize - c;
                    let sx = x as isize + j as isize - c;
                    acc += coeffs[i * ksize + j] * image.get_clamped(sx, sy);
                }
            }
            *out = acc.clamp(0.0, 255.0);
        }
    });
    GrayImage::new(w, h, data)
}

/// Gradient magnitude and orientation from an x/y kernel pair.
pub fn gradient(image: &GrayImage, kx: &Kernel, ky: &Kernel) -> Result<GradientField> {
    if kx.axis() != Axis::X || ky.axis() != Axis::Y {
        return Err(Error::InvalidArgument(format!(
            "gradient needs an (x, y) kernel pair, got ({}, {})",
            kx.axis(),
            ky.axis()
        )));
    }
    if kx.size() != ky.size() {
        return Err(Error::InvalidArgument(format!(
            "kernel sizes differ: {} vs {}",
            kx.size(),
            ky.size()
        )));
    }
    let gx = convolve(image, kx);
    let gy = convolve(image, ky);
    let magnitude: Vec<f64> = gx
        .data
        .iter()
        .zip(&gy.data)
        .map(|(&x, &y)| (x * x + y * y).sqrt())
        .collect();
    let orientation: Vec<f64> = gx
        .data
        .iter()
        .zip(&gy.data)
        .map(|(&x, &y)| y.atan2(x))
        .collect();
    Ok(GradientField {
        width: image.width(),
        height: image.height(),
        magnitude,
        orientation,
    })
}

/// Magnitudes at or below this are floating-point residue, not gradient.
/// A constant image leaves sums around 1e-14 behind; real responses on
/// 8-bit data are orders of magnitude larger.
pub const MAGNITUDE_NOISE_FLOOR: f64 = 1e-9;

/// Rescale magnitudes so the maximum maps to exactly 255. A field whose
/// maximum is below the noise floor comes out all-zero, so constant images
/// do not get their rounding residue amplified. This makes the 0..255
/// threshold sweep comparable across kernel families.
pub fn normalize_magnitude(field: &GradientField) -> GrayImage {
    let max = field.max_magnitude();
    let data = if max <= MAGNITUDE_NOISE_FLOOR {
        vec![0.0; field.magnitude.len()]
    } else {
        // m/max is exactly 1.0 at the maximum, so it lands on 255 exactly
        field.magnitude.iter().map(|&m| m / max * 255.0).collect()
    };
    GrayImage::new(field.width, field.height, data).expect("normalized values are in range")
}
