//! Column stacking: the reshape that connects 2DPCA to PCA.
//!
//! For radius `r`, groups of `r` adjacent columns are stacked vertically, so
//! an `m x n` image becomes an `(r * m) x ceil(n / r)` matrix. When `n` is
//! not a multiple of `r` the image is first padded on the right with zero
//! columns. Radius 1 is the identity and radius `n` concatenates every
//! column into one long vector. The row direction applies the same
//! construction to the transposed image.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum ReshapeError {
    /// The stacking radius must be at least 1.
    ZeroRadius,
    /// The radius exceeds the stackable extent of the image.
    RadiusTooLarge { r: usize, limit: usize, direction: Direction },
    /// An unstack call received a matrix whose shape cannot come from the
    /// claimed original shape and config.
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
}

impl fmt::Display for ReshapeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReshapeError::ZeroRadius => write!(f, "stacking radius must be at least 1"),
            ReshapeError::RadiusTooLarge { r, limit, direction } => write!(
                f,
                "stacking radius {r} exceeds the {direction}-direction limit {limit}"
            ),
            ReshapeError::ShapeMismatch { expected, got } => write!(
                f,
                "stacked matrix is {}x{}, expected {}x{} for this config",
                got.0, got.1, expected.0, expected.1
            ),
        }
    }
}

impl std::error::Error for ReshapeError {}

/// Which image axis the stacking runs along.
///
/// `Column` stacks columns of the image itself; `Row` stacks columns of the
/// transposed image, i.e. the image's rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Column,
    Row,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Column => write!(f, "column"),
            Direction::Row => write!(f, "row"),
        }
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Direction, String> {
        match s.to_ascii_lowercase().as_str() {
            "column" | "col" => Ok(Direction::Column),
            "row" => Ok(Direction::Row),
            other => Err(format!("unknown direction '{other}' (expected row or column)")),
        }
    }
}

/// Stacking radius plus direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StackConfig {
    r: usize,
    direction: Direction,
}

impl StackConfig {
    pub fn new(r: usize, direction: Direction) -> Result<StackConfig, ReshapeError> {
        if r == 0 {
            return Err(ReshapeError::ZeroRadius);
        }
        Ok(StackConfig { r, direction })
    }

    pub fn column(r: usize) -> Result<StackConfig, ReshapeError> {
        StackConfig::new(r, Direction::Column)
    }

    pub fn row(r: usize) -> Result<StackConfig, ReshapeError> {
        StackConfig::new(r, Direction::Row)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Upper bound on `r` for an image of the given shape: the column count
    /// in the column direction, the row count in the row direction.
    pub fn radius_limit(direction: Direction, shape: (usize, usize)) -> usize {
        match direction {
            Direction::Column => shape.1,
            Direction::Row => shape.0,
        }
    }

    /// Shape of the stacked output for an input of shape `(rows, cols)`.
    pub fn stacked_shape(&self, shape: (usize, usize)) -> Result<(usize, usize), ReshapeError> {
        let (rows, cols) = match self.direction {
            Direction::Column => shape,
            Direction::Row => (shape.1, shape.0),
        };
        let limit = cols;
        if self.r > limit {
            return Err(ReshapeError::RadiusTooLarge {
                r: self.r,
                limit,
                direction: self.direction,
            });
        }
        Ok((self.r * rows, cols.div_ceil(self.r)))
    }
}

/// Pads `a` on the right with zero columns up to the next multiple of `r`.
/// Returns the input unchanged when the width already divides evenly.
pub fn pad_columns(a: &Matrix, r: usize) -> Result<Matrix, ReshapeError> {
    if r == 0 {
        return Err(ReshapeError::ZeroRadius);
    }
    let rem = a.cols() % r;
    if rem == 0 {
        return Ok(a.clone());
    }
    let padded_cols = a.cols() + (r - rem);
    let mut out = Matrix::zeros(a.rows(), padded_cols);
    for i in 0..a.rows() {
        for (j, v) in a.row(i).iter().enumerate() {
            out[(i, j)] = *v;
        }
    }
    Ok(out)
}

/// Stacks groups of `r` adjacent columns vertically.
///
/// In the column direction, output column `j` is the concatenation of padded
/// input columns `r*j, r*j + 1, ..., r*j + r - 1` from top to bottom. The row
/// direction stacks the transposed image instead.
pub fn stack_columns(a: &Matrix, cfg: &StackConfig) -> Result<Matrix, ReshapeError> {
    let source;
    let a = match cfg.direction {
        Direction::Column => a,
        Direction::Row => {
            source = a.transpose();
            &source
        }
    };
    if cfg.r > a.cols() {
        return Err(ReshapeError::RadiusTooLarge {
            r: cfg.r,
            limit: a.cols(),
            direction: cfg.direction,
        });
    }
    let padded = pad_columns(a, cfg.r)?;
    let m = padded.rows();
    let super_cols = padded.cols() / cfg.r;
    let mut out = Matrix::zeros(cfg.r * m, super_cols);
    for block in 0..cfg.r {
        for i in 0..m {
            for j in 0..super_cols {
                out[(block * m + i, j)] = padded[(i, cfg.r * j + block)];
            }
        }
    }
    Ok(out)
}

/// Inverse of [`stack_columns`]: rebuilds the original `original_shape`
/// image, dropping any zero padding the forward pass introduced.
pub fn unstack_columns(
    b: &Matrix,
    original_shape: (usize, usize),
    cfg: &StackConfig,
) -> Result<Matrix, ReshapeError> {
    let expected = cfg.stacked_shape(original_shape)?;
    if b.shape() != expected {
        return Err(ReshapeError::ShapeMismatch { expected, got: b.shape() });
    }
    let (rows, cols) = match cfg.direction {
        Direction::Column => original_shape,
        Direction::Row => (original_shape.1, original_shape.0),
    };
    let mut out = Matrix::zeros(rows, cols);
    for j in 0..cols {
        let block = j % cfg.r;
        let super_col = j / cfg.r;
        for i in 0..rows {
            out[(i, j)] = b[(block * rows + i, super_col)];
        }
    }
    match cfg.direction {
        Direction::Column => Ok(out),
        Direction::Row => Ok(out.transpose()),
    }
}

/// Concatenates all columns of `a` into a single `(rows * cols) x 1` column,
/// which is stacking with the radius equal to the full width.
pub fn vectorize(a: &Matrix) -> Matrix {
    let (m, n) = a.shape();
    let mut out = Matrix::zeros(m * n, 1);
    for j in 0..n {
        for i in 0..m {
            out[(j * m + i, 0)] = a[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn pad_columns_extends_to_multiple_of_r() {
        let a = mat(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let padded = pad_columns(&a, 2).unwrap();
        assert_eq!(padded.shape(), (2, 4));
        assert_eq!(padded.row(0), &[1.0, 2.0, 3.0, 0.0]);
        assert_eq!(padded.row(1), &[4.0, 5.0, 6.0, 0.0]);
    }

    #[test]
    fn pad_columns_is_identity_on_exact_multiples() {
        let a = mat(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(pad_columns(&a, 2).unwrap(), a);
        assert_eq!(pad_columns(&a, 1).unwrap(), a);
        assert!(matches!(pad_columns(&a, 0), Err(ReshapeError::ZeroRadius)));
    }

    #[test]
    fn stack_radius_one_is_identity() {
        let a = mat(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let cfg = StackConfig::column(1).unwrap();
        assert_eq!(stack_columns(&a, &cfg).unwrap(), a);
    }

    #[test]
    fn stack_full_width_matches_vectorize() {
        let a = mat(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let cfg = StackConfig::column(2).unwrap();
        let stacked = stack_columns(&a, &cfg).unwrap();
        assert_eq!(stacked.shape(), (4, 1));
        assert_eq!(stacked.column(0), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(stacked, vectorize(&a));
    }

    #[test]
    fn stack_pads_odd_widths_with_zero_columns() {
        let a = mat(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let cfg = StackConfig::column(2).unwrap();
        let stacked = stack_columns(&a, &cfg).unwrap();
        assert_eq!(stacked.shape(), (4, 2));
        assert_eq!(stacked.column(0), vec![1.0, 4.0, 2.0, 5.0]);
        assert_eq!(stacked.column(1), vec![3.0, 6.0, 0.0, 0.0]);
    }

    #[test]
    fn row_direction_stacks_the_transpose() {
        let a = mat(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let cfg = StackConfig::row(2).unwrap();
        let stacked = stack_columns(&a, &cfg).unwrap();
        assert_eq!(stacked, stack_columns(&a.transpose(), &StackConfig::column(2).unwrap()).unwrap());
        assert_eq!(stacked.shape(), (6, 1));
    }

    #[test]
    fn stack_rejects_oversized_radius() {
        let a = mat(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let err = stack_columns(&a, &StackConfig::column(3).unwrap()).unwrap_err();
        assert_eq!(
            err,
            ReshapeError::RadiusTooLarge { r: 3, limit: 2, direction: Direction::Column }
        );
        assert!(stack_columns(&a, &StackConfig::row(3).unwrap()).is_ok());
        assert!(stack_columns(&a, &StackConfig::row(4).unwrap()).is_err());
    }

    #[test]
    fn unstack_round_trips_with_padding() {
        let a = mat(&[&[1.0, 2.0, 3.0, 4.0, 5.0], &[6.0, 7.0, 8.0, 9.0, 10.0]]);
        for direction in [Direction::Column, Direction::Row] {
            let limit = StackConfig::radius_limit(direction, a.shape());
            for r in 1..=limit {
                let cfg = StackConfig::new(r, direction).unwrap();
                let stacked = stack_columns(&a, &cfg).unwrap();
                let back = unstack_columns(&stacked, a.shape(), &cfg).unwrap();
                assert_eq!(back, a, "round trip failed for r={r} {direction}");
            }
        }
    }

    #[test]
    fn unstack_rejects_inconsistent_shapes() {
        let cfg = StackConfig::column(2).unwrap();
        let wrong = Matrix::zeros(3, 3);
        assert!(matches!(
            unstack_columns(&wrong, (2, 4), &cfg),
            Err(ReshapeError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn vectorize_orders_column_major() {
        let a = mat(&[&[1.0, 4.0], &[2.0, 5.0], &[3.0, 6.0]]);
        let v = vectorize(&a);
        assert_eq!(v.shape(), (6, 1));
        assert_eq!(v.column(0), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn stacked_shape_agrees_with_stack_columns() {
        let a = Matrix::zeros(5, 7);
        for direction in [Direction::Column, Direction::Row] {
            let limit = StackConfig::radius_limit(direction, a.shape());
            for r in 1..=limit {
                let cfg = StackConfig::new(r, direction).unwrap();
                let stacked = stack_columns(&a, &cfg).unwrap();
                assert_eq!(stacked.shape(), cfg.stacked_shape(a.shape()).unwrap());
            }
        }
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;
        use rand::{RngExt, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        /// Image with strictly positive entries so the nonzero multiset
        /// check cannot be fooled by padding.
        fn positive_image() -> impl Strategy<Value = Matrix> {
            (1usize..9, 1usize..9, 0u64..10_000).prop_map(|(rows, cols, seed)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let data = (0..rows * cols)
                    .map(|_| rng.random_range(1.0..255.0))
                    .collect();
                Matrix::new(rows, cols, data).unwrap()
            })
        }

        fn config_for(shape: (usize, usize)) -> impl Strategy<Value = StackConfig> {
            prop_oneof![Just(Direction::Column), Just(Direction::Row)].prop_flat_map(
                move |direction| {
                    let limit = StackConfig::radius_limit(direction, shape);
                    (1..=limit).prop_map(move |r| StackConfig::new(r, direction).unwrap())
                },
            )
        }

        proptest! {
            #[test]
            fn stack_unstack_round_trip(
                (a, cfg) in positive_image().prop_flat_map(|a| {
                    let shape = a.shape();
                    (Just(a), config_for(shape))
                })
            ) {
                let stacked = stack_columns(&a, &cfg).unwrap();
                prop_assert_eq!(stacked.shape(), cfg.stacked_shape(a.shape()).unwrap());
                let back = unstack_columns(&stacked, a.shape(), &cfg).unwrap();
                prop_assert_eq!(back, a);
            }

            #[test]
            fn stacking_preserves_entries_and_column_order(
                (a, cfg) in positive_image().prop_flat_map(|a| {
                    let shape = a.shape();
                    (Just(a), config_for(shape))
                })
            ) {
                let stacked = stack_columns(&a, &cfg).unwrap();

                let mut before: Vec<f64> = a.data().iter().copied().collect();
                let mut after: Vec<f64> = stacked.data().iter().copied().filter(|v| *v != 0.0).collect();
                before.sort_by(f64::total_cmp);
                after.sort_by(f64::total_cmp);
                prop_assert_eq!(before, after);

                // Reading both matrices column by column gives the same
                // sequence once padding zeros are taken into account.
                let source = match cfg.direction() {
                    Direction::Column => a.clone(),
                    Direction::Row => a.transpose(),
                };
                let padded = pad_columns(&source, cfg.r()).unwrap();
                let flat_padded: Vec<f64> = (0..padded.cols())
                    .flat_map(|j| padded.column(j))
                    .collect();
                let flat_stacked: Vec<f64> = (0..stacked.cols())
                    .flat_map(|j| stacked.column(j))
                    .collect();
                prop_assert_eq!(flat_padded, flat_stacked);
            }
        }
    }
}
