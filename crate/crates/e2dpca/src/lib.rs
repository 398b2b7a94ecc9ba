//! Image-as-matrix subspace methods for face recognition.
//!
//! The crate implements one family of feature extractors parameterized by a
//! column stacking radius `r`. An image is reshaped by stacking groups of `r`
//! adjacent columns on top of each other, a scatter matrix is accumulated over
//! the reshaped training images, and its leading eigenvectors become the
//! projection axes. The two classical methods fall out as the endpoints:
//!
//! * `r = 1` leaves images untouched and reproduces 2DPCA,
//! * `r = n` (every column stacked) turns each image into a single long
//!   vector and reproduces ordinary PCA on pixel vectors.
//!
//! Intermediate radii trade feature compactness against accuracy. The
//! [`model`] module ties extraction to a nearest neighbor classifier, the
//! [`dataset`] module loads PGM image corpora laid out like the ORL face
//! database, and [`experiment`] runs timed train/test splits for the CLI.

pub mod dataset;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod reshape;
pub mod scatter;
