//! Benchmark helpers shared by the criterion targets.

use edgekit::GrayImage;
use rand::{Rng, SeedableRng};

/// Deterministic random test image.
pub fn random_image(seed: u64, width: usize, height: usize) -> GrayImage {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height)
        .map(|_| rng.gen_range(0.0..=255.0))
        .collect();
    GrayImage::new(width, height, data).expect("valid dimensions")
}
