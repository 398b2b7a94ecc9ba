//! PGM images, labeled corpora, and train/test splits.
//!
//! The on-disk layout follows the ORL face database: one directory per
//! subject named `s1, s2, ...`, each holding images `1.pgm, 2.pgm, ...`.
//! A flat layout with files named `s<subject>_<image>.pgm` is accepted too.
//! Both binary (`P5`) and ASCII (`P2`) PGM files parse, with `#` comments,
//! and only 8-bit images (maxval up to 255) are supported.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Matrix;

#[derive(Debug)]
pub enum DatasetError {
    /// The file does not start with `P5` or `P2`.
    BadMagic { found: String },
    /// A header field is not a decimal number.
    NonNumericHeader { token: String },
    /// The file ends inside the header.
    UnexpectedEof { expected: &'static str },
    /// Width or height is zero.
    ZeroDimension,
    /// Only 8-bit images are supported, so maxval must be 1 ..= 255.
    MaxvalOutOfRange { maxval: u32 },
    /// Fewer raster samples than `width * height`.
    TruncatedRaster { expected: usize, got: usize },
    /// An ASCII raster sample exceeds the declared maxval.
    SampleOutOfRange { value: u32, maxval: u32 },
    /// A pixel handed to the writer or dataset is not an integer in 0 ..= 255.
    PixelOutOfRange { value: f64 },
    Io(io::Error),
    /// Error context: which file a nested error refers to.
    At { path: PathBuf, source: Box<DatasetError> },
    /// The root directory contains no recognizable subjects.
    NoSubjects { root: PathBuf },
    /// Subject or image numbering has a gap; the named path is the one that
    /// should exist but does not.
    MissingPath { path: PathBuf },
    /// Two files claim the same subject and image number.
    DuplicateImage { path: PathBuf },
    /// An image's shape differs from the rest of the corpus.
    InconsistentShape {
        path: PathBuf,
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// A dataset needs at least one image.
    EmptyDataset,
    /// Image and label counts differ.
    LabelCountMismatch { images: usize, labels: usize },
    /// Image at `index` has a different shape than image 0.
    ShapeMismatch {
        index: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// A split cannot leave a subject without test images.
    InvalidSplit {
        subject: u32,
        available: usize,
        requested: usize,
    },
    /// Synthesis parameters are out of range.
    InvalidParams { detail: String },
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::BadMagic { found } => {
                write!(f, "not a PGM file: magic is '{found}', expected P5 or P2")
            }
            DatasetError::NonNumericHeader { token } => {
                write!(f, "header token '{token}' is not a decimal number")
            }
            DatasetError::UnexpectedEof { expected } => {
                write!(f, "file ended while reading {expected}")
            }
            DatasetError::ZeroDimension => write!(f, "image dimensions must be positive"),
            DatasetError::MaxvalOutOfRange { maxval } => {
                write!(f, "maxval {maxval} unsupported, expected 1 ..= 255")
            }
            DatasetError::TruncatedRaster { expected, got } => {
                write!(f, "raster has {got} samples, expected {expected}")
            }
            DatasetError::SampleOutOfRange { value, maxval } => {
                write!(f, "raster sample {value} exceeds maxval {maxval}")
            }
            DatasetError::PixelOutOfRange { value } => {
                write!(f, "pixel value {value} is not an integer in 0 ..= 255")
            }
            DatasetError::Io(e) => write!(f, "{e}"),
            DatasetError::At { path, source } => write!(f, "{}: {source}", path.display()),
            DatasetError::NoSubjects { root } => write!(
                f,
                "no subjects found under {} (expected s1/, s2/, ... or s1_1.pgm, ...)",
                root.display()
            ),
            DatasetError::MissingPath { path } => {
                write!(f, "numbering gap: {} does not exist", path.display())
            }
            DatasetError::DuplicateImage { path } => {
                write!(f, "{} duplicates an already-loaded image number", path.display())
            }
            DatasetError::InconsistentShape { path, expected, got } => write!(
                f,
                "{} is {}x{}, but the corpus is {}x{}",
                path.display(),
                got.0,
                got.1,
                expected.0,
                expected.1
            ),
            DatasetError::EmptyDataset => write!(f, "dataset needs at least one image"),
            DatasetError::LabelCountMismatch { images, labels } => {
                write!(f, "{images} images but {labels} labels")
            }
            DatasetError::ShapeMismatch { index, expected, got } => write!(
                f,
                "image {index} is {}x{}, expected {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
            DatasetError::InvalidSplit { subject, available, requested } => write!(
                f,
                "subject {subject} has {available} images; training on {requested} per subject \
                 leaves no test images"
            ),
            DatasetError::InvalidParams { detail } => write!(f, "{detail}"),
        }
    }
}

impl std::error::Error for DatasetError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            DatasetError::Io(e) => Some(e),
            DatasetError::At { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

impl From<io::Error> for DatasetError {
    fn from(e: io::Error) -> DatasetError {
        DatasetError::Io(e)
    }
}

fn at(path: &Path, source: DatasetError) -> DatasetError {
    DatasetError::At { path: path.to_path_buf(), source: Box::new(source) }
}

fn is_pgm_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c)
}

/// Advances past whitespace and `#` comments, which run to end of line.
fn skip_filler(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        if is_pgm_space(bytes[*pos]) {
            *pos += 1;
        } else if bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

fn next_token<'a>(
    bytes: &'a [u8],
    pos: &mut usize,
    expected: &'static str,
) -> Result<&'a [u8], DatasetError> {
    skip_filler(bytes, pos);
    if *pos >= bytes.len() {
        return Err(DatasetError::UnexpectedEof { expected });
    }
    let start = *pos;
    while *pos < bytes.len() && !is_pgm_space(bytes[*pos]) && bytes[*pos] != b'#' {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

fn numeric_token(
    bytes: &[u8],
    pos: &mut usize,
    expected: &'static str,
) -> Result<u32, DatasetError> {
    let token = next_token(bytes, pos, expected)?;
    let text = std::str::from_utf8(token).unwrap_or("<binary>");
    text.parse::<u32>()
        .map_err(|_| DatasetError::NonNumericHeader { token: text.to_string() })
}

/// Parses a binary (`P5`) or ASCII (`P2`) PGM image into a matrix with one
/// row per raster line. Only maxval up to 255 is accepted, i.e. one byte per
/// sample in the binary form.
pub fn parse_pgm(bytes: &[u8]) -> Result<Matrix, DatasetError> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos, "magic number")?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(DatasetError::BadMagic {
                found: String::from_utf8_lossy(other).into_owned(),
            })
        }
    };
    let width = numeric_token(bytes, &mut pos, "width")? as usize;
    let height = numeric_token(bytes, &mut pos, "height")? as usize;
    if width == 0 || height == 0 {
        return Err(DatasetError::ZeroDimension);
    }
    let maxval = numeric_token(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(DatasetError::MaxvalOutOfRange { maxval });
    }
    let expected = width * height;

    let data = if binary {
        // Comments may still follow the maxval; after them exactly one
        // whitespace byte separates the header from the raster.
        while pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        }
        if pos >= bytes.len() || !is_pgm_space(bytes[pos]) {
            return Err(DatasetError::UnexpectedEof { expected: "raster separator" });
        }
        pos += 1;
        let raster = &bytes[pos..];
        if raster.len() < expected {
            return Err(DatasetError::TruncatedRaster { expected, got: raster.len() });
        }
        raster[..expected].iter().map(|&b| b as f64).collect()
    } else {
        let mut data = Vec::new();
        for got in 0..expected {
            skip_filler(bytes, &mut pos);
            if pos >= bytes.len() {
                return Err(DatasetError::TruncatedRaster { expected, got });
            }
            let value = numeric_token(bytes, &mut pos, "raster sample")?;
            if value > maxval {
                return Err(DatasetError::SampleOutOfRange { value, maxval });
            }
            data.push(value as f64);
        }
        data
    };

    Ok(Matrix::new(height, width, data).expect("dimensions and values validated"))
}

/// Writes a matrix of integral gray values in 0 ..= 255 as a binary PGM.
/// Together with [`parse_pgm`] this round-trips images exactly.
pub fn write_pgm_p5<W: Write>(image: &Matrix, w: &mut W) -> Result<(), DatasetError> {
    let mut raster = Vec::with_capacity(image.rows() * image.cols());
    for &v in image.data() {
        if v < 0.0 || v > 255.0 || v.fract() != 0.0 {
            return Err(DatasetError::PixelOutOfRange { value: v });
        }
        raster.push(v as u8);
    }
    write!(w, "P5\n{} {}\n255\n", image.cols(), image.rows())?;
    w.write_all(&raster)?;
    Ok(())
}

/// Images with parallel subject labels, all the same shape, with integral
/// pixel values in 0 ..= 255.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    images: Vec<Matrix>,
    labels: Vec<u32>,
    shape: (usize, usize),
}

impl LabeledDataset {
    pub fn new(images: Vec<Matrix>, labels: Vec<u32>) -> Result<LabeledDataset, DatasetError> {
        if images.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        if images.len() != labels.len() {
            return Err(DatasetError::LabelCountMismatch {
                images: images.len(),
                labels: labels.len(),
            });
        }
        let shape = images[0].shape();
        for (index, im) in images.iter().enumerate() {
            if im.shape() != shape {
                return Err(DatasetError::ShapeMismatch {
                    index,
                    expected: shape,
                    got: im.shape(),
                });
            }
            for &v in im.data() {
                if v < 0.0 || v > 255.0 || v.fract() != 0.0 {
                    return Err(DatasetError::PixelOutOfRange { value: v });
                }
            }
        }
        Ok(LabeledDataset { images, labels, shape })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn images(&self) -> &[Matrix] {
        &self.images
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Matrix, u32)> {
        self.images.iter().zip(self.labels.iter().copied())
    }

    /// Number of distinct subjects.
    pub fn subject_count(&self) -> usize {
        let mut labels: Vec<u32> = self.labels.clone();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }
}

fn parse_prefixed_number(name: &str, prefix: char) -> Option<u32> {
    let rest = name.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// `s12_7.pgm` -> (12, 7)
fn parse_flat_name(name: &str) -> Option<(u32, u32)> {
    let stem = name.strip_suffix(".pgm")?;
    let (subject, image) = stem.split_once('_')?;
    let subject = parse_prefixed_number(subject, 's')?;
    if image.is_empty() || !image.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((subject, image.parse().ok()?))
}

fn read_image(path: &Path, expected: Option<(usize, usize)>) -> Result<Matrix, DatasetError> {
    let bytes = fs::read(path).map_err(|e| at(path, DatasetError::Io(e)))?;
    let image = parse_pgm(&bytes).map_err(|e| at(path, e))?;
    if let Some(shape) = expected {
        if image.shape() != shape {
            return Err(DatasetError::InconsistentShape {
                path: path.to_path_buf(),
                expected: shape,
                got: image.shape(),
            });
        }
    }
    Ok(image)
}

/// Loads an ORL-layout corpus from `root`.
///
/// Subjects must be numbered contiguously from 1, and so must the images of
/// each subject; a gap reports the exact missing path. Images come back
/// ordered by subject, then by image number, with the subject number as the
/// label.
pub fn load_orl(root: &Path) -> Result<LabeledDataset, DatasetError> {
    let mut subject_dirs: BTreeMap<u32, PathBuf> = BTreeMap::new();
    let mut flat: BTreeMap<u32, BTreeMap<u32, PathBuf>> = BTreeMap::new();
    for entry in fs::read_dir(root).map_err(|e| at(root, DatasetError::Io(e)))? {
        let entry = entry.map_err(|e| at(root, DatasetError::Io(e)))?;
        let path = entry.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if path.is_dir() {
            if let Some(subject) = parse_prefixed_number(name, 's') {
                subject_dirs.insert(subject, path);
            }
        } else if let Some((subject, image)) = parse_flat_name(name) {
            if flat.entry(subject).or_default().insert(image, path.clone()).is_some() {
                return Err(DatasetError::DuplicateImage { path });
            }
        }
    }

    let per_subject: Vec<(u32, BTreeMap<u32, PathBuf>)> = if !subject_dirs.is_empty() {
        let mut out = Vec::new();
        for (subject, dir) in subject_dirs {
            let mut images: BTreeMap<u32, PathBuf> = BTreeMap::new();
            for entry in fs::read_dir(&dir).map_err(|e| at(&dir, DatasetError::Io(e)))? {
                let entry = entry.map_err(|e| at(&dir, DatasetError::Io(e)))?;
                let path = entry.path();
                let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                    continue;
                };
                let Some(stem) = name.strip_suffix(".pgm") else {
                    continue;
                };
                if !stem.is_empty() && stem.bytes().all(|b| b.is_ascii_digit()) {
                    if let Ok(number) = stem.parse::<u32>() {
                        if images.insert(number, path.clone()).is_some() {
                            return Err(DatasetError::DuplicateImage { path });
                        }
                    }
                }
            }
            if images.is_empty() {
                return Err(DatasetError::MissingPath { path: dir.join("1.pgm") });
            }
            out.push((subject, images));
        }
        out
    } else if !flat.is_empty() {
        flat.into_iter().collect()
    } else {
        return Err(DatasetError::NoSubjects { root: root.to_path_buf() });
    };

    for (expected, (subject, _)) in (1u32..).zip(per_subject.iter()) {
        if *subject != expected {
            return Err(DatasetError::MissingPath { path: root.join(format!("s{expected}")) });
        }
    }

    let mut images = Vec::new();
    let mut labels = Vec::new();
    let mut shape = None;
    for (subject, numbered) in &per_subject {
        for (expected, (number, path)) in (1u32..).zip(numbered.iter()) {
            if *number != expected {
                let missing = path
                    .parent()
                    .unwrap_or(root)
                    .join(format!("{expected}.pgm"));
                return Err(DatasetError::MissingPath { path: missing });
            }
            let image = read_image(path, shape)?;
            shape.get_or_insert(image.shape());
            images.push(image);
            labels.push(*subject);
        }
    }
    LabeledDataset::new(images, labels)
}

/// How the per-subject images are divided into train and test sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPolicy {
    /// Images 1 ..= k of each subject train, the rest test.
    FirstK,
    /// A seeded per-subject shuffle picks which k images train. The same
    /// seed always produces the same split.
    SeededRandom(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_per_subject: usize,
    pub policy: SplitPolicy,
}

/// Splits a dataset into train and test parts, per subject.
///
/// Every subject keeps its dataset order in both halves, contributes exactly
/// `train_per_subject` training images, and must have at least one image
/// left over for testing.
pub fn split(
    ds: &LabeledDataset,
    spec: &SplitSpec,
) -> Result<(LabeledDataset, LabeledDataset), DatasetError> {
    if spec.train_per_subject == 0 {
        return Err(DatasetError::InvalidParams {
            detail: "train_per_subject must be at least 1".into(),
        });
    }
    let mut groups: Vec<(u32, Vec<usize>)> = Vec::new();
    for (i, &label) in ds.labels().iter().enumerate() {
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, indices)) => indices.push(i),
            None => groups.push((label, vec![i])),
        }
    }

    let mut in_train = vec![false; ds.len()];
    for (label, indices) in &groups {
        if indices.len() <= spec.train_per_subject {
            return Err(DatasetError::InvalidSplit {
                subject: *label,
                available: indices.len(),
                requested: spec.train_per_subject,
            });
        }
        let chosen: Vec<usize> = match spec.policy {
            SplitPolicy::FirstK => indices[..spec.train_per_subject].to_vec(),
            SplitPolicy::SeededRandom(seed) => {
                let stream = seed ^ (*label as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let mut rng = ChaCha8Rng::seed_from_u64(stream);
                let mut pool = indices.clone();
                pool.shuffle(&mut rng);
                pool[..spec.train_per_subject].to_vec()
            }
        };
        for i in chosen {
            in_train[i] = true;
        }
    }

    let mut train_images = Vec::new();
    let mut train_labels = Vec::new();
    let mut test_images = Vec::new();
    let mut test_labels = Vec::new();
    for i in 0..ds.len() {
        if in_train[i] {
            train_images.push(ds.images[i].clone());
            train_labels.push(ds.labels[i]);
        } else {
            test_images.push(ds.images[i].clone());
            test_labels.push(ds.labels[i]);
        }
    }
    Ok((
        LabeledDataset::new(train_images, train_labels)?,
        LabeledDataset::new(test_images, test_labels)?,
    ))
}

/// Synthesizes a separable corpus: each subject gets a random base image and
/// every sample is the base plus small pixel noise, rounded back to integral
/// gray values. Base levels span [40, 215] and noise stays within +-8, an
/// amplitude ratio of roughly eleven, so subjects form well-separated
/// clusters and nearest neighbor classification should be perfect.
pub fn synthesize(
    subjects: usize,
    per_subject: usize,
    shape: (usize, usize),
    seed: u64,
) -> Result<LabeledDataset, DatasetError> {
    synthesize_with(subjects, per_subject, shape, seed, (40.0, 215.0), 8.0)
}

/// [`synthesize`] with explicit base range and noise amplitude. A zero
/// amplitude makes every image of a subject identical to its base.
pub fn synthesize_with(
    subjects: usize,
    per_subject: usize,
    shape: (usize, usize),
    seed: u64,
    base_range: (f64, f64),
    noise: f64,
) -> Result<LabeledDataset, DatasetError> {
    let (rows, cols) = shape;
    if subjects == 0 || per_subject == 0 || rows == 0 || cols == 0 {
        return Err(DatasetError::InvalidParams {
            detail: "subjects, per_subject, and dimensions must all be at least 1".into(),
        });
    }
    let (lo, hi) = base_range;
    if !(lo < hi) || !noise.is_finite() || noise < 0.0 {
        return Err(DatasetError::InvalidParams {
            detail: format!("invalid base range [{lo}, {hi}] or noise {noise}"),
        });
    }
    if lo - noise < 0.0 || hi + noise > 255.0 {
        return Err(DatasetError::InvalidParams {
            detail: format!(
                "base range [{lo}, {hi}] with noise {noise} can leave 0 ..= 255"
            ),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::with_capacity(subjects * per_subject);
    let mut labels = Vec::with_capacity(subjects * per_subject);
    for subject in 1..=subjects as u32 {
        let base: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(lo..=hi)).collect();
        for _ in 0..per_subject {
            let data: Vec<f64> = base
                .iter()
                .map(|&b| {
                    let jitter = if noise > 0.0 { rng.random_range(-noise..=noise) } else { 0.0 };
                    (b + jitter).round()
                })
                .collect();
            images.push(Matrix::new(rows, cols, data).expect("values validated by range"));
            labels.push(subject);
        }
    }
    LabeledDataset::new(images, labels)
}
