//! Scatter matrices over image sets, at three granularities.
//!
//! For images `A_1 .. A_M` with mean `Abar`, the 2D image scatter is
//!
//! ```text
//! S2D = (1/M) * sum_j (A_j - Abar)(A_j - Abar)^T
//! ```
//!
//! The classical 1D pixel covariance is the same construction applied to the
//! vectorized images, and the stacked variant applies it to column-stacked
//! images. The three are one family: writing the 1D scatter as an `n x n`
//! grid of `m x m` blocks, block `(i, p)` is the cross-covariance of image
//! columns `i` and `p` ([`block_of_s1d`]), the 2D scatter is the sum of the
//! diagonal blocks, and the radius-`r` scatter assembles each `r x r` group
//! of blocks into one super-block. The tests pin those identities down.

use std::fmt;

use crate::linalg::Matrix;
use crate::reshape::{self, ReshapeError, StackConfig};

/// Widest vectorized dimension `scatter_1d` will materialize directly. The
/// full ORL pixel covariance would be 10304 x 10304; anything in that league
/// must go through `linalg::gram_eig` instead of an explicit scatter.
pub const S1D_DIRECT_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum ScatterError {
    /// At least one image is required.
    EmptyImageSet,
    /// Image at `index` does not match the shape of the first image.
    ShapeMismatch {
        index: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// The vectorized dimension is too large to form entry by entry.
    AmbientTooLarge { dim: usize, limit: usize },
    /// A block column index is outside the image width.
    ColumnOutOfRange { index: usize, cols: usize },
    /// Stacking the images failed.
    Reshape(ReshapeError),
}

impl fmt::Display for ScatterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScatterError::EmptyImageSet => write!(f, "scatter needs at least one image"),
            ScatterError::ShapeMismatch { index, expected, got } => write!(
                f,
                "image {index} is {}x{}, expected {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
            ScatterError::AmbientTooLarge { dim, limit } => write!(
                f,
                "vectorized dimension {dim} exceeds the direct scatter limit {limit}; \
                 use the Gram eigensolver for spaces this large"
            ),
            ScatterError::ColumnOutOfRange { index, cols } => {
                write!(f, "column index {index} is out of range for width {cols}")
            }
            ScatterError::Reshape(e) => write!(f, "reshape failed: {e}"),
        }
    }
}

impl std::error::Error for ScatterError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ScatterError::Reshape(e) => Some(e),
            _ => None,
        }
    }
}

impl From<ReshapeError> for ScatterError {
    fn from(e: ReshapeError) -> ScatterError {
        ScatterError::Reshape(e)
    }
}

/// Which member of the scatter family a matrix is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterKind {
    /// Pixel covariance of vectorized images.
    OneD,
    /// Image scatter of the raw 2D images.
    TwoD,
    /// Image scatter of column-stacked images with the given radius.
    Stacked { r: usize },
}

/// A scatter matrix tagged with its kind and the number of images that went
/// into it. Always square, symmetric, and positive semidefinite up to
/// rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterMatrix {
    pub kind: ScatterKind,
    pub matrix: Matrix,
    pub sample_count: usize,
}

impl ScatterMatrix {
    /// Side length of the square scatter.
    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }
}

fn check_uniform(images: &[Matrix]) -> Result<(usize, usize), ScatterError> {
    let first = match images.first() {
        Some(im) => im.shape(),
        None => return Err(ScatterError::EmptyImageSet),
    };
    for (index, im) in images.iter().enumerate().skip(1) {
        if im.shape() != first {
            return Err(ScatterError::ShapeMismatch { index, expected: first, got: im.shape() });
        }
    }
    Ok(first)
}

/// Entrywise mean of a non-empty set of equally shaped images.
pub fn mean_image(images: &[Matrix]) -> Result<Matrix, ScatterError> {
    let (rows, cols) = check_uniform(images)?;
    let mut mean = Matrix::zeros(rows, cols);
    for im in images {
        mean = mean.add(im).expect("shapes checked above");
    }
    Ok(mean.scaled(1.0 / images.len() as f64))
}

/// The 2D image scatter `(1/M) * sum_j (A_j - Abar)(A_j - Abar)^T`,
/// accumulated column by column in dataset order.
pub fn scatter_2d(images: &[Matrix]) -> Result<ScatterMatrix, ScatterError> {
    let (rows, cols) = check_uniform(images)?;
    let mean = mean_image(images)?;
    let mut s = Matrix::zeros(rows, rows);
    let mut column = vec![0.0; rows];
    for im in images {
        let dev = im.sub(&mean).expect("shapes checked above");
        for j in 0..cols {
            for (i, c) in column.iter_mut().enumerate() {
                *c = dev[(i, j)];
            }
            for (i, &di) in column.iter().enumerate() {
                if di == 0.0 {
                    continue;
                }
                let row = i * rows;
                for (k, &dk) in column.iter().enumerate() {
                    s.data_mut()[row + k] += di * dk;
                }
            }
        }
    }
    Ok(ScatterMatrix {
        kind: ScatterKind::TwoD,
        matrix: s.scaled(1.0 / images.len() as f64),
        sample_count: images.len(),
    })
}

/// The classical pixel covariance over vectorized images, formed entry by
/// entry. Only valid while `rows * cols` stays at or below
/// [`S1D_DIRECT_LIMIT`]; larger problems must use the Gram route.
pub fn scatter_1d(images: &[Matrix]) -> Result<ScatterMatrix, ScatterError> {
    let (rows, cols) = check_uniform(images)?;
    let dim = rows * cols;
    if dim > S1D_DIRECT_LIMIT {
        return Err(ScatterError::AmbientTooLarge { dim, limit: S1D_DIRECT_LIMIT });
    }
    let mean = mean_image(images)?;
    let mut s = Matrix::zeros(dim, dim);
    for im in images {
        let dev = reshape::vectorize(&im.sub(&mean).expect("shapes checked above"));
        let v = dev.column(0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            let row = i * dim;
            for (k, &vk) in v.iter().enumerate() {
                s.data_mut()[row + k] += vi * vk;
            }
        }
    }
    Ok(ScatterMatrix {
        kind: ScatterKind::OneD,
        matrix: s.scaled(1.0 / images.len() as f64),
        sample_count: images.len(),
    })
}

/// Block `(i, p)` of the pixel covariance seen as an `n x n` grid of
/// `m x m` blocks: the cross-covariance of image columns `i` and `p`,
///
/// ```text
/// (1/M) * sum_j (A_j(i) - Abar(i)) (A_j(p) - Abar(p))^T
/// ```
///
/// with zero-based column indices. Formed directly from the columns, so it
/// works for images whose vectorized dimension is far past the direct
/// scatter limit.
pub fn block_of_s1d(images: &[Matrix], i: usize, p: usize) -> Result<Matrix, ScatterError> {
    let (rows, cols) = check_uniform(images)?;
    for index in [i, p] {
        if index >= cols {
            return Err(ScatterError::ColumnOutOfRange { index, cols });
        }
    }
    let mean = mean_image(images)?;
    let mut block = Matrix::zeros(rows, rows);
    for im in images {
        let dev = im.sub(&mean).expect("shapes checked above");
        let u = dev.column(i);
        let w = dev.column(p);
        for (a, &ua) in u.iter().enumerate() {
            if ua == 0.0 {
                continue;
            }
            let row = a * rows;
            for (b, &wb) in w.iter().enumerate() {
                block.data_mut()[row + b] += ua * wb;
            }
        }
    }
    Ok(block.scaled(1.0 / images.len() as f64))
}

/// Image scatter of the column-stacked images: stack every image with `cfg`,
/// then apply [`scatter_2d`]. Radius 1 reproduces the plain 2D scatter and
/// the full-width radius reproduces the pixel covariance.
pub fn scatter_e2d(images: &[Matrix], cfg: &StackConfig) -> Result<ScatterMatrix, ScatterError> {
    check_uniform(images)?;
    let stacked: Vec<Matrix> = images
        .iter()
        .map(|im| reshape::stack_columns(im, cfg))
        .collect::<Result<_, _>>()?;
    let s = scatter_2d(&stacked)?;
    Ok(ScatterMatrix {
        kind: ScatterKind::Stacked { r: cfg.r() },
        matrix: s.matrix,
        sample_count: s.sample_count,
    })
}
