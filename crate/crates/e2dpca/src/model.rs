//! Projection bases, feature extraction, and the nearest neighbor classifier.
//!
//! Training picks the leading eigenvectors of the appropriate scatter:
//! the stacked image scatter for 2DPCA and its generalization, the pixel
//! covariance (via the Gram route) for PCA. A probe image is projected onto
//! those axes and classified by the nearest training feature.

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, EigenPair, LinalgError, Matrix};
use crate::reshape::{self, Direction, ReshapeError, StackConfig};
use crate::scatter::{self, ScatterError};

/// Off-diagonal tolerance handed to the eigensolvers during training.
const EIG_TOL: f64 = 1e-10;

/// Serialized basis files start with these bytes.
const BASIS_MAGIC: [u8; 4] = *b"E2DP";
const BASIS_VERSION: u16 = 1;

#[derive(Debug)]
pub enum ModelError {
    /// Scatter accumulation failed (empty set, mixed shapes, ...).
    Scatter(ScatterError),
    /// Eigendecomposition failed.
    Linalg(LinalgError),
    /// Stacking failed.
    Reshape(ReshapeError),
    /// The requested feature count must be at least 1.
    ZeroFeatureCount,
    /// More eigenvectors requested than the decomposition can provide.
    DimensionTooLarge { d: usize, available: usize },
    /// All training images are identical, so every scatter is zero and no
    /// projection axis is better than any other.
    ZeroScatter,
    /// A probe image does not match the shape the basis was trained on.
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Two feature matrices cannot be compared.
    FeatureShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    /// A gallery entry is missing its label.
    MissingLabel { index: usize },
    /// Classification needs a non-empty gallery.
    EmptyGallery,
    /// Reading or writing a serialized basis failed.
    Io(io::Error),
    /// A serialized basis is malformed.
    Corrupt { detail: String },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Scatter(e) => write!(f, "{e}"),
            ModelError::Linalg(e) => write!(f, "{e}"),
            ModelError::Reshape(e) => write!(f, "{e}"),
            ModelError::ZeroFeatureCount => write!(f, "feature count d must be at least 1"),
            ModelError::DimensionTooLarge { d, available } => write!(
                f,
                "requested {d} projection axes but the decomposition only provides {available}"
            ),
            ModelError::ZeroScatter => write!(
                f,
                "training images are all identical; the scatter is zero and no basis exists"
            ),
            ModelError::ShapeMismatch { expected, got } => write!(
                f,
                "image is {}x{} but the basis was trained on {}x{} images",
                got.0, got.1, expected.0, expected.1
            ),
            ModelError::FeatureShapeMismatch { left, right } => write!(
                f,
                "cannot compare features of shape {}x{} and {}x{}",
                left.0, left.1, right.0, right.1
            ),
            ModelError::MissingLabel { index } => {
                write!(f, "gallery entry {index} has no label")
            }
            ModelError::EmptyGallery => write!(f, "classification needs a non-empty gallery"),
            ModelError::Io(e) => write!(f, "basis io failed: {e}"),
            ModelError::Corrupt { detail } => write!(f, "corrupt basis file: {detail}"),
        }
    }
}

impl std::error::Error for ModelError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ModelError::Scatter(e) => Some(e),
            ModelError::Linalg(e) => Some(e),
            ModelError::Reshape(e) => Some(e),
            ModelError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<ScatterError> for ModelError {
    fn from(e: ScatterError) -> ModelError {
        ModelError::Scatter(e)
    }
}

impl From<LinalgError> for ModelError {
    fn from(e: LinalgError) -> ModelError {
        ModelError::Linalg(e)
    }
}

impl From<ReshapeError> for ModelError {
    fn from(e: ReshapeError) -> ModelError {
        ModelError::Reshape(e)
    }
}

impl From<io::Error> for ModelError {
    fn from(e: io::Error) -> ModelError {
        ModelError::Io(e)
    }
}

/// The three members of the method family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "pca")]
    Pca,
    #[serde(rename = "2dpca")]
    TwoDpca,
    #[serde(rename = "e2dpca")]
    E2dpca,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Pca => write!(f, "pca"),
            Method::TwoDpca => write!(f, "2dpca"),
            Method::E2dpca => write!(f, "e2dpca"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Method, String> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(Method::Pca),
            "2dpca" => Ok(Method::TwoDpca),
            "e2dpca" => Ok(Method::E2dpca),
            other => Err(format!("unknown method '{other}' (expected pca, 2dpca, or e2dpca)")),
        }
    }
}

/// Distance between two feature matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Sum over feature columns of the Euclidean column distance. This is
    /// the usual 2DPCA matrix distance and the default everywhere.
    ColumnSumL2,
    /// Plain Frobenius distance between the feature matrices.
    Frobenius,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::ColumnSumL2 => write!(f, "column-sum-l2"),
            Metric::Frobenius => write!(f, "frobenius"),
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Metric, String> {
        match s.to_ascii_lowercase().as_str() {
            "column-sum-l2" | "column_sum_l2" => Ok(Metric::ColumnSumL2),
            "frobenius" => Ok(Metric::Frobenius),
            other => Err(format!(
                "unknown metric '{other}' (expected column-sum-l2 or frobenius)"
            )),
        }
    }
}

/// A fully specified training configuration.
///
/// Constructors normalize the radius: plain 2DPCA is the radius-1 member of
/// the family and PCA does not stack at all, so both store `r = 1` and the
/// equality `TwoDpca == E2dpca with r = 1` holds structurally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelConfig {
    method: Method,
    direction: Direction,
    r: usize,
    d: usize,
    metric: Metric,
}

impl ModelConfig {
    pub fn new(
        method: Method,
        direction: Direction,
        r: usize,
        d: usize,
        metric: Metric,
    ) -> Result<ModelConfig, ModelError> {
        if d == 0 {
            return Err(ModelError::ZeroFeatureCount);
        }
        // The vectorized method has no stacking axis at all and the plain 2D
        // method has no radius, so those knobs normalize away and equivalent
        // configurations compare equal.
        let (direction, r) = match method {
            Method::Pca => (Direction::Column, 1),
            Method::TwoDpca => (direction, 1),
            Method::E2dpca => {
                if r == 0 {
                    return Err(ModelError::Reshape(ReshapeError::ZeroRadius));
                }
                (direction, r)
            }
        };
        Ok(ModelConfig { method, direction, r, d, metric })
    }

    pub fn pca(d: usize) -> Result<ModelConfig, ModelError> {
        ModelConfig::new(Method::Pca, Direction::Column, 1, d, Metric::ColumnSumL2)
    }

    pub fn two_dpca(direction: Direction, d: usize) -> Result<ModelConfig, ModelError> {
        ModelConfig::new(Method::TwoDpca, direction, 1, d, Metric::ColumnSumL2)
    }

    pub fn e2dpca(r: usize, direction: Direction, d: usize) -> Result<ModelConfig, ModelError> {
        ModelConfig::new(Method::E2dpca, direction, r, d, Metric::ColumnSumL2)
    }

    pub fn with_metric(mut self, metric: Metric) -> ModelConfig {
        self.metric = metric;
        self
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Stacking config for the 2D family members.
    fn stack_config(&self) -> StackConfig {
        StackConfig::new(self.r, self.direction).expect("r validated at construction")
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.method {
            Method::Pca => write!(f, "pca d={}", self.d),
            Method::TwoDpca => write!(f, "2dpca {} d={}", self.direction, self.d),
            Method::E2dpca => write!(f, "e2dpca {} r={} d={}", self.direction, self.r, self.d),
        }
    }
}

/// A trained projection: the leading scatter eigenvectors as columns, with
/// everything needed to extract features from new images.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBasis {
    cfg: ModelConfig,
    image_shape: (usize, usize),
    mean: Matrix,
    /// One unit eigenvector per column, `d` columns, sorted by eigenvalue.
    vectors: Matrix,
    eigenvalues: Vec<f64>,
}

impl ProjectionBasis {
    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn image_shape(&self) -> (usize, usize) {
        self.image_shape
    }

    pub fn mean(&self) -> &Matrix {
        &self.mean
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of entries in a feature matrix extracted with this basis.
    pub fn feature_coefficients(&self) -> usize {
        let (rows, cols) = self.feature_shape();
        rows * cols
    }

    /// Shape of the feature matrix [`extract`] produces.
    pub fn feature_shape(&self) -> (usize, usize) {
        match self.cfg.method {
            Method::Pca => (self.cfg.d, 1),
            Method::TwoDpca | Method::E2dpca => {
                let (_, super_cols) = self
                    .cfg
                    .stack_config()
                    .stacked_shape(self.image_shape)
                    .expect("shape validated at training time");
                (super_cols, self.cfg.d)
            }
        }
    }
}

/// A projected image, optionally tagged with its subject label.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub matrix: Matrix,
    pub label: Option<u32>,
}

impl FeatureMatrix {
    pub fn labeled(matrix: Matrix, label: u32) -> FeatureMatrix {
        FeatureMatrix { matrix, label: Some(label) }
    }
}

/// Total variance `(1/M) * sum_j ||A_j - mean||_F^2`, which is the trace of
/// every scatter in the family.
fn total_variance(images: &[Matrix], mean: &Matrix) -> f64 {
    let mut sum = 0.0;
    for im in images {
        let dev = im.sub(mean).expect("shapes checked by caller");
        sum += dev.data().iter().map(|v| v * v).sum::<f64>();
    }
    sum / images.len() as f64
}

/// True when the variance is at the level of mean-computation rounding noise
/// rather than genuine image differences.
fn variance_is_noise(tv: f64, sample_count: usize, mean: &Matrix) -> bool {
    let eps = 1e-12 * sample_count as f64;
    let scale = 1.0 + mean.data().iter().map(|v| v * v).sum::<f64>();
    tv <= eps * eps * scale
}

fn basis_matrix(pairs: &[EigenPair], d: usize) -> (Matrix, Vec<f64>) {
    let dim = pairs[0].vector.len();
    let mut vectors = Matrix::zeros(dim, d);
    let mut values = Vec::with_capacity(d);
    for (k, pair) in pairs.iter().take(d).enumerate() {
        for (i, v) in pair.vector.iter().enumerate() {
            vectors[(i, k)] = *v;
        }
        values.push(pair.value);
    }
    (vectors, values)
}

/// Trains a projection basis on a uniform set of images.
///
/// PCA goes through the Gram eigensolver so the full pixel covariance is
/// never materialized; the number of usable axes is then bounded by the
/// nonzero rank of the centered sample set, at most `M - 1`. The 2D family
/// decomposes the stacked scatter; when a large radius makes the stacked
/// rows outnumber the stacked columns gathered across the whole training
/// set, the same Gram route computes identical eigenvectors from the
/// smaller system instead, and the axis count is bounded by the rank it
/// finds.
pub fn train(images: &[Matrix], cfg: &ModelConfig) -> Result<ProjectionBasis, ModelError> {
    let mean = scatter::mean_image(images)?;
    let image_shape = mean.shape();

    let tv = total_variance(images, &mean);
    if variance_is_noise(tv, images.len(), &mean) {
        return Err(ModelError::ZeroScatter);
    }

    let (vectors, eigenvalues) = match cfg.method {
        Method::Pca => {
            let samples: Vec<Vec<f64>> = images
                .iter()
                .map(|im| {
                    let dev = im.sub(&mean).expect("shapes checked above");
                    reshape::vectorize(&dev).column(0)
                })
                .collect();
            let pairs = linalg::gram_eig(&samples, EIG_TOL)?;
            if pairs.len() < cfg.d {
                return Err(ModelError::DimensionTooLarge { d: cfg.d, available: pairs.len() });
            }
            basis_matrix(&pairs, cfg.d)
        }
        Method::TwoDpca | Method::E2dpca => {
            let stack_cfg = cfg.stack_config();
            let (stacked_rows, stacked_cols) = stack_cfg.stacked_shape(image_shape)?;
            let pairs = if images.len() * stacked_cols < stacked_rows {
                let mut columns = Vec::with_capacity(images.len() * stacked_cols);
                for im in images {
                    let dev = im.sub(&mean).expect("shapes checked above");
                    let b = reshape::stack_columns(&dev, &stack_cfg)?;
                    for j in 0..stacked_cols {
                        columns.push(b.column(j));
                    }
                }
                let mut pairs = linalg::gram_eig(&columns, EIG_TOL)?;
                // gram_eig averages over every stacked column while the
                // scatter averages over images only, so the eigenvalues
                // come back short by the per-image column count.
                for p in &mut pairs {
                    p.value *= stacked_cols as f64;
                }
                pairs
            } else {
                let s = scatter::scatter_e2d(images, &stack_cfg)?;
                linalg::sym_eig(&s.matrix, EIG_TOL)?
            };
            if pairs.len() < cfg.d {
                return Err(ModelError::DimensionTooLarge { d: cfg.d, available: pairs.len() });
            }
            basis_matrix(&pairs, cfg.d)
        }
    };

    Ok(ProjectionBasis { cfg: *cfg, image_shape, mean, vectors, eigenvalues })
}

/// Projects an image onto a trained basis.
///
/// PCA features are the `d x 1` coefficients of the centered, vectorized
/// image. The 2D family projects the stacked image `B` as `B^T * V`, giving
/// a `ceil(width / r) x d` feature matrix, uncentered as in standard 2DPCA.
pub fn extract(image: &Matrix, basis: &ProjectionBasis) -> Result<FeatureMatrix, ModelError> {
    if image.shape() != basis.image_shape {
        return Err(ModelError::ShapeMismatch {
            expected: basis.image_shape,
            got: image.shape(),
        });
    }
    let matrix = match basis.cfg.method {
        Method::Pca => {
            let dev = image.sub(&basis.mean).expect("shape checked above");
            let v = reshape::vectorize(&dev);
            let mut f = vec![0.0; basis.cfg.d];
            for i in 0..v.rows() {
                let vi = v[(i, 0)];
                if vi == 0.0 {
                    continue;
                }
                for (fk, bk) in f.iter_mut().zip(basis.vectors.row(i)) {
                    *fk += vi * bk;
                }
            }
            Matrix::new(basis.cfg.d, 1, f)?
        }
        Method::TwoDpca | Method::E2dpca => {
            let b = reshape::stack_columns(image, &basis.cfg.stack_config())?;
            b.transpose().matmul(&basis.vectors)?
        }
    };
    Ok(FeatureMatrix { matrix, label: None })
}

/// Distance between two feature matrices of identical shape.
pub fn distance(a: &FeatureMatrix, b: &FeatureMatrix, metric: Metric) -> Result<f64, ModelError> {
    if a.matrix.shape() != b.matrix.shape() {
        return Err(ModelError::FeatureShapeMismatch {
            left: a.matrix.shape(),
            right: b.matrix.shape(),
        });
    }
    let (rows, cols) = a.matrix.shape();
    let mut acc = vec![0.0; cols];
    for i in 0..rows {
        let ra = a.matrix.row(i);
        let rb = b.matrix.row(i);
        for (j, s) in acc.iter_mut().enumerate() {
            let d = ra[j] - rb[j];
            *s += d * d;
        }
    }
    Ok(match metric {
        Metric::ColumnSumL2 => acc.iter().map(|s| s.sqrt()).sum(),
        Metric::Frobenius => acc.iter().sum::<f64>().sqrt(),
    })
}

/// Nearest neighbor over the gallery. Every gallery entry must carry a
/// label; ties keep the earliest entry.
pub fn classify(
    probe: &FeatureMatrix,
    gallery: &[FeatureMatrix],
    metric: Metric,
) -> Result<u32, ModelError> {
    if gallery.is_empty() {
        return Err(ModelError::EmptyGallery);
    }
    let mut best_label = None;
    let mut best_dist = f64::INFINITY;
    for (index, entry) in gallery.iter().enumerate() {
        let label = entry.label.ok_or(ModelError::MissingLabel { index })?;
        let dist = distance(probe, entry, metric)?;
        if dist < best_dist {
            best_dist = dist;
            best_label = Some(label);
        }
    }
    Ok(best_label.expect("gallery is non-empty"))
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_matrix<W: Write>(w: &mut W, m: &Matrix) -> io::Result<()> {
    write_u64(w, m.rows() as u64)?;
    write_u64(w, m.cols() as u64)?;
    for v in m.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_exact<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N], ModelError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            ModelError::Corrupt { detail: "file ends mid-record".into() }
        } else {
            ModelError::Io(e)
        }
    })?;
    Ok(buf)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, ModelError> {
    Ok(u64::from_le_bytes(read_exact::<R, 8>(r)?))
}

fn read_dim<R: Read>(r: &mut R, what: &str) -> Result<usize, ModelError> {
    let v = read_u64(r)?;
    // A billion rows is not a plausible basis; reject before allocating.
    if v == 0 || v > 1 << 30 {
        return Err(ModelError::Corrupt { detail: format!("implausible {what} {v}") });
    }
    Ok(v as usize)
}

fn read_matrix<R: Read>(r: &mut R, what: &str) -> Result<Matrix, ModelError> {
    let rows = read_dim(r, &format!("{what} row count"))?;
    let cols = read_dim(r, &format!("{what} column count"))?;
    if rows.saturating_mul(cols) > (1 << 28) {
        return Err(ModelError::Corrupt {
            detail: format!("{what} dimensions {rows}x{cols} are implausibly large"),
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(f64::from_le_bytes(read_exact::<R, 8>(r)?));
    }
    Matrix::new(rows, cols, data)
        .map_err(|e| ModelError::Corrupt { detail: format!("{what}: {e}") })
}

impl ProjectionBasis {
    /// Writes the basis in the versioned little-endian binary format.
    /// Floats are raw IEEE bits, so a round trip is exact.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), ModelError> {
        w.write_all(&BASIS_MAGIC)?;
        w.write_all(&BASIS_VERSION.to_le_bytes())?;
        let method = match self.cfg.method {
            Method::Pca => 0u8,
            Method::TwoDpca => 1,
            Method::E2dpca => 2,
        };
        let direction = match self.cfg.direction {
            Direction::Column => 0u8,
            Direction::Row => 1,
        };
        let metric = match self.cfg.metric {
            Metric::ColumnSumL2 => 0u8,
            Metric::Frobenius => 1,
        };
        w.write_all(&[method, direction, metric, 0])?;
        write_u64(w, self.cfg.r as u64)?;
        write_u64(w, self.cfg.d as u64)?;
        write_u64(w, self.image_shape.0 as u64)?;
        write_u64(w, self.image_shape.1 as u64)?;
        write_matrix(w, &self.mean)?;
        write_u64(w, self.eigenvalues.len() as u64)?;
        for v in &self.eigenvalues {
            w.write_all(&v.to_le_bytes())?;
        }
        write_matrix(w, &self.vectors)?;
        Ok(())
    }

    /// Reads a basis written by [`ProjectionBasis::write_to`], validating
    /// magic, version, enum tags, and internal shape consistency.
    pub fn read_from<R: Read>(r: &mut R) -> Result<ProjectionBasis, ModelError> {
        let magic = read_exact::<R, 4>(r)?;
        if magic != BASIS_MAGIC {
            return Err(ModelError::Corrupt { detail: format!("bad magic {magic:02x?}") });
        }
        let version = u16::from_le_bytes(read_exact::<R, 2>(r)?);
        if version != BASIS_VERSION {
            return Err(ModelError::Corrupt {
                detail: format!("unsupported version {version}"),
            });
        }
        let [method, direction, metric, _reserved] = read_exact::<R, 4>(r)?;
        let method = match method {
            0 => Method::Pca,
            1 => Method::TwoDpca,
            2 => Method::E2dpca,
            t => return Err(ModelError::Corrupt { detail: format!("unknown method tag {t}") }),
        };
        let direction = match direction {
            0 => Direction::Column,
            1 => Direction::Row,
            t => {
                return Err(ModelError::Corrupt { detail: format!("unknown direction tag {t}") })
            }
        };
        let metric = match metric {
            0 => Metric::ColumnSumL2,
            1 => Metric::Frobenius,
            t => return Err(ModelError::Corrupt { detail: format!("unknown metric tag {t}") }),
        };
        let r_radius = read_dim(r, "radius")?;
        let d = read_dim(r, "feature count")?;
        let rows = read_dim(r, "image height")?;
        let cols = read_dim(r, "image width")?;
        let mean = read_matrix(r, "mean image")?;
        let value_count = read_dim(r, "eigenvalue count")?;
        let mut eigenvalues = Vec::with_capacity(value_count);
        for _ in 0..value_count {
            eigenvalues.push(f64::from_le_bytes(read_exact::<R, 8>(r)?));
        }
        let vectors = read_matrix(r, "basis vectors")?;

        let cfg = ModelConfig::new(method, direction, r_radius, d, metric)
            .map_err(|e| ModelError::Corrupt { detail: e.to_string() })?;
        if cfg.r() != r_radius {
            return Err(ModelError::Corrupt {
                detail: format!("radius {r_radius} is invalid for method {method}"),
            });
        }
        let basis = ProjectionBasis {
            cfg,
            image_shape: (rows, cols),
            mean,
            vectors,
            eigenvalues,
        };
        basis.validate_shapes()?;
        Ok(basis)
    }

    fn validate_shapes(&self) -> Result<(), ModelError> {
        let corrupt = |detail: String| ModelError::Corrupt { detail };
        if self.mean.shape() != self.image_shape {
            return Err(corrupt(format!(
                "mean image is {}x{}, expected {}x{}",
                self.mean.rows(),
                self.mean.cols(),
                self.image_shape.0,
                self.image_shape.1
            )));
        }
        if self.eigenvalues.len() != self.cfg.d {
            return Err(corrupt(format!(
                "{} eigenvalues stored for d={}",
                self.eigenvalues.len(),
                self.cfg.d
            )));
        }
        if self.vectors.cols() != self.cfg.d {
            return Err(corrupt(format!(
                "{} basis columns stored for d={}",
                self.vectors.cols(),
                self.cfg.d
            )));
        }
        let expected_rows = match self.cfg.method {
            Method::Pca => self.image_shape.0 * self.image_shape.1,
            Method::TwoDpca | Method::E2dpca => {
                self.cfg
                    .stack_config()
                    .stacked_shape(self.image_shape)
                    .map_err(|e| corrupt(e.to_string()))?
                    .0
            }
        };
        if self.vectors.rows() != expected_rows {
            return Err(corrupt(format!(
                "basis vectors have {} rows, expected {expected_rows}",
                self.vectors.rows()
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ProjectionBasis, ModelError> {
        let mut r = BufReader::new(File::open(path)?);
        ProjectionBasis::read_from(&mut r)
    }
}
