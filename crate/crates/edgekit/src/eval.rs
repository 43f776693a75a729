//! Ground-truth comparison and the filter benchmark.
//!
//! Matching is tolerant: a candidate edge pixel counts as a true positive
//! when some ground-truth edge pixel lies within a Chebyshev radius, which
//! amounts to dilating the mask and testing membership. This is a
//! deterministic stand-in for the BSDS bipartite matcher; numbers differ
//! from it at the margins, in both directions.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{EdgeMap, GrayImage};

/// True positive / false positive / false negative pixel counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

/// Precision, recall and F1, each in `[0, 1]`. Degenerate denominators
/// yield 0 so threshold sweeps stay totally ordered.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision `TP/(TP+FP)`, recall `TP/(TP+FN)` and F1 `2TP/(2TP+FP+FN)`.
pub fn prf(counts: &ConfusionCounts) -> Prf {
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Prf {
        precision: ratio(counts.tp, counts.tp + counts.fp),
        recall: ratio(counts.tp, counts.tp + counts.fn_),
        f1: ratio(2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn_),
    }
}

/// Matching tolerance in pixels (Chebyshev distance).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Tolerance {
    Fixed(usize),
    /// `round(0.0075 * image diagonal)` per image, mirroring the BSDS
    /// maxDist convention.
    Auto,
}

impl Tolerance {
    pub fn radius(&self, width: usize, height: usize) -> usize {
        match self {
            Tolerance::Fixed(r) => *r,
            Tolerance::Auto => {
                let diag = ((width * width + height * height) as f64).sqrt();
                (0.0075 * diag).round() as usize
            }
        }
    }
}

/// Dilate a boolean mask by a Chebyshev radius (separable sliding OR).
fn dilate(mask: &[bool], width: usize, height: usize, radius: usize) -> Vec<bool> {
    if radius == 0 {
        return mask.to_vec();
    }
    let r = radius as isize;
    let mut horiz = vec![false; mask.len()];
    for y in 0..height {
        let row = &mask[y * width..(y + 1) * width];
        for x in 0..width as isize {
            let lo = (x - r).max(0) as usize;
            let hi = ((x + r) as usize).min(width - 1);
            horiz[y * width + x as usize] = row[lo..=hi].iter().any(|&b| b);
        }
    }
    let mut out = vec![false; mask.len()];
    for y in 0..height as isize {
        let lo = (y - r).max(0) as usize;
        let hi = ((y + r) as usize).min(height - 1);
        for x in 0..width {
            out[y as usize * width + x] = (lo..=hi).any(|yy| horiz[yy * width + x]);
        }
    }
    out
}

/// Count TP/FP/FN for a candidate map against one or more annotator masks.
///
/// TP: candidate edge pixels with a ground-truth edge (any annotator)
/// within the tolerance radius. FP: the rest of the candidate pixels.
/// FN: pixels of the annotator union with no candidate pixel within the
/// radius. Tolerance 0 is exact set comparison against the union.
pub fn match_edges(
    candidate: &EdgeMap,
    ground_truths: &[EdgeMap],
    tolerance: usize,
) -> Result<ConfusionCounts> {
    if ground_truths.is_empty() {
        return Err(Error::EmptyDataset("no ground-truth masks".into()));
    }
    let (w, h) = (candidate.width(), candidate.height());
    for gt in ground_truths {
        if gt.width() != w || gt.height() != h {
            return Err(Error::Dimension(format!(
                "ground truth {}x{} vs candidate {w}x{h}",
                gt.width(),
                gt.height()
            )));
        }
    }
    let mut union = vec![false; w * h];
    for gt in ground_truths {
        for (u, &v) in union.iter_mut().zip(gt.data()) {
            *u |= v == 255;
        }
    }
    let cand: Vec<bool> = candidate.data().iter().map(|&v| v == 255).collect();
    let gt_dilated = dilate(&union, w, h, tolerance);
    let cand_dilated = dilate(&cand, w, h, tolerance);

    let mut counts = ConfusionCounts::default();
    for i in 0..w * h {
        if cand[i] {
            if gt_dilated[i] {
                counts.tp += 1;
            } else {
                counts.fp += 1;
            }
        }
        if union[i] && !cand_dilated[i] {
            counts.fn_ += 1;
        }
    }
    Ok(counts)
}

/// One image plus its annotator masks.
#[derive(Debug, Clone)]
pub struct Sample {
    pub name: String,
    pub image: GrayImage,
    pub ground_truths: Vec<EdgeMap>,
}

/// A benchmark dataset. Samples are kept sorted by name so reports do not
/// depend on directory listing order.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(mut samples: Vec<Sample>) -> Self {
        samples.sort_by(|a, b| a.name.cmp(&b.name));
        Dataset { samples }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Load a dataset from `<root>/images/*.{pgm,png}` with masks under
/// `<root>/groundtruth/<stem>/*.{pgm,png}`. Images without a usable ground
/// truth are skipped and reported in the second return value.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<(Dataset, Vec<String>)> {
    let root = root.as_ref();
    let images_dir = root.join("images");
    let entries = std::fs::read_dir(&images_dir)
        .map_err(|e| Error::io(format!("listing {}", images_dir.display()), e))?;
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("pgm") | Some("png")
            )
        })
        .collect();
    paths.sort();
    for path in paths {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let image = match crate::image::load_image(&path) {
            Ok(img) => img,
            Err(e) => {
                skipped.push(format!("{stem}: {e}"));
                continue;
            }
        };
        let gt_dir = root.join("groundtruth").join(&stem);
        let mut gt_paths: Vec<_> = match std::fs::read_dir(&gt_dir) {
            Ok(entries) => entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    matches!(
                        p.extension().and_then(|e| e.to_str()),
                        Some("pgm") | Some("png")
                    )
                })
                .collect(),
            Err(_) => {
                skipped.push(format!("{stem}: no ground-truth directory"));
                continue;
            }
        };
        gt_paths.sort();
        let mut ground_truths = Vec::new();
        let mut failed = false;
        for gp in gt_paths {
            match crate::image::load_edge_map(&gp) {
                Ok(map) if map.width() == image.width() && map.height() == image.height() => {
                    ground_truths.push(map)
                }
                Ok(_) => {
                    skipped.push(format!("{stem}: ground-truth dimension mismatch"));
                    failed = true;
                    break;
                }
                Err(e) => {
                    skipped.push(format!("{stem}: {e}"));
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            continue;
        }
        if ground_truths.is_empty() {
            skipped.push(format!("{stem}: no ground-truth masks"));
            continue;
        }
        samples.push(Sample {
            name: stem,
            image,
            ground_truths,
        });
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no usable samples under {}",
            root.display()
        )));
    }
    Ok((Dataset::new(samples), skipped))
}

/// Best threshold and scores for one image.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ImageResult {
    pub name: String,
    pub best_threshold: f64,
    pub best: Prf,
    pub counts: ConfusionCounts,
}

/// Benchmark result for one filter over a dataset.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalReport {
    pub filter: String,
    /// Threshold grid the sweep ran over.
    pub thresholds: Vec<f64>,
    pub tolerance: Tolerance,
    /// Dataset-best threshold (ODS-style): maximizes overall F1 with
    /// summed counts; smallest threshold wins ties.
    pub best_threshold: f64,
    pub overall: Prf,
    /// Summed counts at the best threshold; equals the per-image sum.
    pub overall_counts: ConfusionCounts,
    /// Per-image best thresholds (OIS-style), for completeness.
    pub per_image: Vec<ImageResult>,
}

/// Sweep a detector over a threshold grid on every image and pick the
/// dataset-best threshold by overall F1.
///
/// `detector` maps an image to one edge map per grid entry; entry `i` must
/// correspond to `thresholds[i]`. Images run concurrently; aggregation is
/// commutative addition, so results are independent of scheduling and of
/// dataset file order.
pub fn evaluate_filter<F>(
    dataset: &Dataset,
    filter_label: &str,
    detector: F,
    thresholds: &[f64],
    tolerance: Tolerance,
) -> Result<EvalReport>
where
    F: Fn(&GrayImage) -> Result<Vec<EdgeMap>> + Sync,
{
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("no samples to evaluate".into()));
    }
    if thresholds.is_empty() {
        return Err(Error::InvalidArgument("empty threshold grid".into()));
    }

    // per image: counts for every threshold
    let per_image_counts: Vec<(String, Vec<ConfusionCounts>)> = dataset
        .samples()
        .par_iter()
        .map(|sample| {
            let maps = detector(&sample.image)?;
            if maps.len() != thresholds.len() {
                return Err(Error::InvalidArgument(format!(
                    "detector returned {} maps for {} thresholds",
                    maps.len(),
                    thresholds.len()
                )));
            }
            let radius = tolerance.radius(sample.image.width(), sample.image.height());
            let counts = maps
                .iter()
                .map(|m| match_edges(m, &sample.ground_truths, radius))
                .collect::<Result<Vec<_>>>()?;
            Ok((sample.name.clone(), counts))
        })
        .collect::<Result<_>>()?;

    let mut overall_per_threshold = vec![ConfusionCounts::default(); thresholds.len()];
    for (_, counts) in &per_image_counts {
        for (total, c) in overall_per_threshold.iter_mut().zip(counts) {
            total.add(c);
        }
    }

    let best_f1_index = |counts: &[ConfusionCounts]| {
        let mut best = 0;
        let mut best_f1 = f64::NEG_INFINITY;
        for (i, c) in counts.iter().enumerate() {
            let f1 = prf(c).f1;
            if f1 > best_f1 {
                best_f1 = f1;
                best = i;
            }
        }
        best
    };

    let best = best_f1_index(&overall_per_threshold);
    let per_image = per_image_counts
        .iter()
        .map(|(name, counts)| {
            let i = best_f1_index(counts);
            ImageResult {
                name: name.clone(),
                best_threshold: thresholds[i],
                best: prf(&counts[i]),
                counts: counts[i],
            }
        })
        .collect();

    Ok(EvalReport {
        filter: filter_label.to_string(),
        thresholds: thresholds.to_vec(),
        tolerance,
        best_threshold: thresholds[best],
        overall: prf(&overall_per_threshold[best]),
        overall_counts: overall_per_threshold[best],
        per_image,
    })
}

/// How the benchmark turns an image into edge maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BenchMode {
    /// Thresholded 4-step pipeline with a sweep over the grid.
    Threshold,
    /// Canny detector; its output is already binary, so the sweep
    /// degenerates to a single run per image.
    Canny,
}

/// Shared parameters for a benchmark run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BenchConfig {
    pub mode: BenchMode,
    pub sigma: f64,
    pub gaussian_ksize: usize,
    /// Threshold mode only: skip the Gaussian stage.
    pub skip_smoothing: bool,
    pub high_ratio: f64,
    pub low_ratio: f64,
    pub threshold_source: crate::canny::ThresholdSource,
    pub thresholds: Vec<f64>,
    pub tolerance: Tolerance,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            mode: BenchMode::Threshold,
            sigma: 1.4,
            gaussian_ksize: 5,
            skip_smoothing: false,
            high_ratio: 0.7,
            low_ratio: 0.3,
            threshold_source: crate::canny::ThresholdSource::GradientPlane,
            thresholds: crate::pipeline::default_thresholds(),
            tolerance: Tolerance::Auto,
        }
    }
}

/// Run every filter over the dataset, one report per filter in input order.
pub fn compare_filters(
    dataset: &Dataset,
    filters: &[crate::kernels::KernelChoice],
    config: &BenchConfig,
) -> Result<Vec<EvalReport>> {
    filters
        .iter()
        .map(|&choice| {
            let label = choice.label();
            match config.mode {
                BenchMode::Threshold => {
                    let pipeline = crate::pipeline::PipelineConfig {
                        kernel: choice,
                        sigma: config.sigma,
                        gaussian_ksize: config.gaussian_ksize,
                        skip_smoothing: config.skip_smoothing,
                        threshold: 0.0,
                    };
                    evaluate_filter(
                        dataset,
                        &label,
                        |img| {
                            crate::pipeline::detect_edges_sweep(img, &pipeline, &config.thresholds)
                        },
                        &config.thresholds,
                        config.tolerance,
                    )
                }
                BenchMode::Canny => {
                    let canny_cfg = crate::canny::CannyConfig {
                        kernel: choice,
                        sigma: config.sigma,
                        gaussian_ksize: config.gaussian_ksize,
                        high_ratio: config.high_ratio,
                        low_ratio: config.low_ratio,
                        threshold_source: config.threshold_source,
                    };
                    let grid = [0.0];
                    evaluate_filter(
                        dataset,
                        &label,
                        |img| Ok(vec![crate::canny::canny(img, &canny_cfg)?]),
                        &grid,
                        config.tolerance,
                    )
                }
            }
        })
        .collect()
}

pub const CSV_SCHEMA: &str = "edgekit-report v1: filter,recall,precision,f1,best_threshold";

/// Render reports as CSV with a schema-version header comment.
pub fn render_csv(reports: &[EvalReport]) -> String {
    let mut out = format!("# {CSV_SCHEMA}\n");
    out.push_str("filter,recall,precision,f1,best_threshold\n");
    for r in reports {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{}\n",
            r.filter, r.overall.recall, r.overall.precision, r.overall.f1, r.best_threshold
        ));
    }
    out
}

/// Render full per-image detail as JSON, keyed metadata first.
pub fn render_json(
    reports: &[EvalReport],
    metadata: &BTreeMap<String, serde_json::Value>,
) -> String {
    let value = serde_json::json!({
        "schema": CSV_SCHEMA,
        "metadata": metadata,
        "reports": reports,
    });
    serde_json::to_string_pretty(&value).expect("reports serialize")
}
