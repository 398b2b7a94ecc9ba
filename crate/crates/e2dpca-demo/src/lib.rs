//! Interactive browser demo for the stacking-radius family.
//!
//! Three operations back the static page in `www/`: a map of where each
//! pixel lands after column stacking, eigen-images of a synthesized corpus,
//! and an accuracy-versus-radius sweep. Everything returns JSON strings so
//! the page needs no framework and no generated bindings beyond wasm-pack's.
//!
//! The `_impl` functions are plain Rust and carry the tests; the
//! `#[wasm_bindgen]` exports are thin wrappers that only translate errors.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use e2dpca::dataset::{self, SplitPolicy, SplitSpec};
use e2dpca::model::{self, Metric, Method, ModelConfig};
use e2dpca::reshape::{Direction, StackConfig};

#[derive(Serialize)]
struct StackingLayout {
    stacked_rows: usize,
    stacked_cols: usize,
    /// Source pixel `(row, col)` for every stacked cell in row-major order,
    /// or null for zero padding.
    cells: Vec<Option<(usize, usize)>>,
}

fn stacking_layout_impl(
    rows: usize,
    cols: usize,
    r: usize,
    direction: &str,
) -> Result<String, String> {
    if rows == 0 || cols == 0 {
        return Err("image dimensions must be positive".into());
    }
    let direction: Direction = direction.parse()?;
    let cfg = StackConfig::new(r, direction).map_err(|e| e.to_string())?;
    let (stacked_rows, stacked_cols) =
        cfg.stacked_shape((rows, cols)).map_err(|e| e.to_string())?;

    // In the stacked source (the image itself, or its transpose for the row
    // direction), stacked cell (block * m + i, j) holds source (i, r*j + block).
    let (m, n) = match direction {
        Direction::Column => (rows, cols),
        Direction::Row => (cols, rows),
    };
    let mut cells = Vec::with_capacity(stacked_rows * stacked_cols);
    for sr in 0..stacked_rows {
        let block = sr / m;
        let i = sr % m;
        for sc in 0..stacked_cols {
            let c = r * sc + block;
            let cell = if c < n {
                match direction {
                    Direction::Column => Some((i, c)),
                    Direction::Row => Some((c, i)),
                }
            } else {
                None
            };
            cells.push(cell);
        }
    }
    serde_json::to_string(&StackingLayout { stacked_rows, stacked_cols, cells })
        .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct EigenImages {
    /// Patch dimensions every rendered eigenvector uses.
    rows: usize,
    cols: usize,
    eigenvalues: Vec<f64>,
    /// One min-max normalized grayscale patch per axis, row-major.
    images: Vec<Vec<u8>>,
}

fn render_patch(pixels: &[f64]) -> Vec<u8> {
    let lo = pixels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pixels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-12 {
        return vec![128; pixels.len()];
    }
    pixels
        .iter()
        .map(|&v| ((v - lo) / (hi - lo) * 255.0).round() as u8)
        .collect()
}

/// Synthesized demo corpus with adjustable difficulty: base gray levels sit
/// in the middle of the range so the per-pixel noise amplitude can go all
/// the way to 80 before values could leave 0 ..= 255.
fn demo_corpus(
    subjects: usize,
    per_subject: usize,
    shape: (usize, usize),
    seed: u64,
    noise: f64,
) -> Result<dataset::LabeledDataset, String> {
    dataset::synthesize_with(subjects, per_subject, shape, seed, (80.0, 175.0), noise)
        .map_err(|e| e.to_string())
}

fn eigen_images_impl(
    subjects: usize,
    per_subject: usize,
    rows: usize,
    cols: usize,
    seed: u64,
    noise: f64,
    method: &str,
    direction: &str,
    r: usize,
    d: usize,
) -> Result<String, String> {
    let method: Method = method.parse()?;
    let direction: Direction = direction.parse()?;
    let ds = demo_corpus(subjects, per_subject, (rows, cols), seed, noise)?;
    let cfg = ModelConfig::new(method, direction, r, d, Metric::ColumnSumL2)
        .map_err(|e| e.to_string())?;
    let basis = model::train(ds.images(), &cfg).map_err(|e| e.to_string())?;

    // A PCA eigenvector is a whole image laid out column-major. A stacked
    // eigenvector covers r adjacent columns (or rows), shown as a patch in
    // the image's own orientation.
    let (prows, pcols) = match (method, direction) {
        (Method::Pca, _) => (rows, cols),
        (_, Direction::Column) => (rows, cfg.r()),
        (_, Direction::Row) => (cfg.r(), cols),
    };
    let mut images = Vec::with_capacity(cfg.d());
    for k in 0..cfg.d() {
        let v = basis.vectors().column(k);
        let mut patch = vec![0.0; prows * pcols];
        match (method, direction) {
            (Method::Pca, _) => {
                for (idx, &value) in v.iter().enumerate() {
                    let (i, j) = (idx % rows, idx / rows);
                    patch[i * pcols + j] = value;
                }
            }
            (_, Direction::Column) => {
                for (idx, &value) in v.iter().enumerate() {
                    let (block, i) = (idx / rows, idx % rows);
                    patch[i * pcols + block] = value;
                }
            }
            (_, Direction::Row) => {
                for (idx, &value) in v.iter().enumerate() {
                    let (block, i) = (idx / cols, idx % cols);
                    patch[block * pcols + i] = value;
                }
            }
        }
        images.push(render_patch(&patch));
    }

    serde_json::to_string(&EigenImages {
        rows: prows,
        cols: pcols,
        eigenvalues: basis.eigenvalues().to_vec(),
        images,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SweepPoint {
    r: usize,
    accuracy: f64,
    coefficients: usize,
}

fn radius_sweep_impl(
    subjects: usize,
    per_subject: usize,
    rows: usize,
    cols: usize,
    seed: u64,
    noise: f64,
    direction: &str,
    d: usize,
    train_per_subject: usize,
) -> Result<String, String> {
    let direction: Direction = direction.parse()?;
    let ds = demo_corpus(subjects, per_subject, (rows, cols), seed, noise)?;
    let spec = SplitSpec { train_per_subject, policy: SplitPolicy::FirstK };
    let (train_set, test_set) = dataset::split(&ds, &spec).map_err(|e| e.to_string())?;

    // No timing here: the page runs this per slider tick and wasm has no
    // monotonic clock anyway. The CLI is the place for timing numbers.
    let limit = StackConfig::radius_limit(direction, (rows, cols));
    let mut points = Vec::with_capacity(limit);
    for r in 1..=limit {
        let cfg = ModelConfig::new(Method::E2dpca, direction, r, d, Metric::ColumnSumL2)
            .map_err(|e| e.to_string())?;
        let basis = model::train(train_set.images(), &cfg).map_err(|e| e.to_string())?;
        let gallery: Vec<model::FeatureMatrix> = train_set
            .iter()
            .map(|(im, label)| {
                let mut f = model::extract(im, &basis)?;
                f.label = Some(label);
                Ok(f)
            })
            .collect::<Result<_, model::ModelError>>()
            .map_err(|e| e.to_string())?;
        let mut correct = 0usize;
        for (im, label) in test_set.iter() {
            let f = model::extract(im, &basis).map_err(|e| e.to_string())?;
            let predicted =
                model::classify(&f, &gallery, cfg.metric()).map_err(|e| e.to_string())?;
            if predicted == label {
                correct += 1;
            }
        }
        points.push(SweepPoint {
            r,
            accuracy: correct as f64 / test_set.len() as f64,
            coefficients: basis.feature_coefficients(),
        });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

/// Where every pixel of a `rows x cols` image lands after stacking with
/// radius `r` along `direction` ("row" or "column"). Returns JSON.
#[wasm_bindgen]
pub fn stacking_layout(
    rows: usize,
    cols: usize,
    r: usize,
    direction: &str,
) -> Result<String, JsError> {
    stacking_layout_impl(rows, cols, r, direction).map_err(|e| JsError::new(&e))
}

/// Trains on a synthesized corpus and renders the top `d` eigenvectors as
/// grayscale patches. Returns JSON.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn eigen_images(
    subjects: usize,
    per_subject: usize,
    rows: usize,
    cols: usize,
    seed: u64,
    noise: f64,
    method: &str,
    direction: &str,
    r: usize,
    d: usize,
) -> Result<String, JsError> {
    eigen_images_impl(subjects, per_subject, rows, cols, seed, noise, method, direction, r, d)
        .map_err(|e| JsError::new(&e))
}

/// Recognition accuracy and feature size of every radius from 1 to the
/// direction's limit, on a synthesized corpus. Returns JSON.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn radius_sweep(
    subjects: usize,
    per_subject: usize,
    rows: usize,
    cols: usize,
    seed: u64,
    noise: f64,
    direction: &str,
    d: usize,
    train_per_subject: usize,
) -> Result<String, JsError> {
    radius_sweep_impl(
        subjects,
        per_subject,
        rows,
        cols,
        seed,
        noise,
        direction,
        d,
        train_per_subject,
    )
    .map_err(|e| JsError::new(&e))
}
