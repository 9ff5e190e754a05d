//! MNIST IDX ingestion and relation samples for the two tasks.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::relnet::Io;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledImageSet {
    pub rows: usize,
    pub cols: usize,
    /// Pixels scaled to `[0, 1]`, row-major.
    pub images: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Truncated(format!("{what} header")))
}

fn check_magic(bytes: &[u8], expected: u32, what: &str) -> Result<()> {
    let found = read_u32(bytes, 0, what)?;
    if found != expected {
        return Err(Error::BadMagic { expected, found });
    }
    Ok(())
}

/// Parses an IDX3 image file: magic, count, rows, cols, then one byte per pixel.
pub fn parse_images(bytes: &[u8]) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    check_magic(bytes, IMAGE_MAGIC, "image file")?;
    let count = read_u32(bytes, 4, "image file")? as usize;
    let rows = read_u32(bytes, 8, "image file")? as usize;
    let cols = read_u32(bytes, 12, "image file")? as usize;
    let pixels = rows * cols;
    let body = &bytes[16..];
    if body.len() < count * pixels {
        return Err(Error::Truncated(format!(
            "image data: expected {} bytes, found {}",
            count * pixels,
            body.len()
        )));
    }
    let images = body[..count * pixels]
        .chunks_exact(pixels.max(1))
        .take(count)
        .map(|img| img.iter().map(|&b| b as f64 / 255.0).collect())
        .collect();
    Ok((rows, cols, images))
}

/// Parses an IDX1 label file: magic, count, then one byte per label.
pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC, "label file")?;
    let count = read_u32(bytes, 4, "label file")? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(Error::Truncated(format!("label data: expected {count} bytes, found {}", body.len())));
    }
    Ok(body[..count].to_vec())
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabeledImageSet> {
    let (rows, cols, images) = parse_images(&fs::read(images_path)?)?;
    let labels = parse_labels(&fs::read(labels_path)?)?;
    if images.len() != labels.len() {
        return Err(Error::CountMismatch { images: images.len(), labels: labels.len() });
    }
    Ok(LabeledImageSet { rows, cols, images, labels })
}

/// Loads `train-*` or `t10k-*` files from a directory holding the standard
/// uncompressed MNIST distribution.
pub fn load_mnist_dir(dir: impl AsRef<Path>, train: bool) -> Result<LabeledImageSet> {
    let prefix = if train { "train" } else { "t10k" };
    let dir = dir.as_ref();
    load_idx(
        dir.join(format!("{prefix}-images-idx3-ubyte")),
        dir.join(format!("{prefix}-labels-idx1-ubyte")),
    )
}

impl LabeledImageSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    /// IDX3 bytes for the images; pixels are rounded back to bytes.
    pub fn images_to_idx(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.len() * self.pixels());
        for word in [IMAGE_MAGIC, self.len() as u32, self.rows as u32, self.cols as u32] {
            out.extend_from_slice(&word.to_be_bytes());
        }
        for img in &self.images {
            out.extend(img.iter().map(|p| (p * 255.0).round() as u8));
        }
        out
    }

    pub fn labels_to_idx(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.len());
        out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
        out.extend_from_slice(&(self.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.labels);
        out
    }
}

/// Keeps only digits 0 and 1, in their original order.
pub fn filter_binary(set: &LabeledImageSet) -> Result<LabeledImageSet> {
    let (images, labels): (Vec<_>, Vec<_>) = set
        .images
        .iter()
        .zip(&set.labels)
        .filter(|(_, &l)| l <= 1)
        .map(|(img, &l)| (img.clone(), l))
        .unzip();
    if labels.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(LabeledImageSet { rows: set.rows, cols: set.cols, images, labels })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Addition,
    Xor,
}

impl Task {
    pub fn parse(s: &str) -> Option<Task> {
        match s {
            "addition" => Some(Task::Addition),
            "xor" => Some(Task::Xor),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stimuli {
    /// `(alpha, beta, gamma)` for X, Y, Z.
    Numbers([f64; 3]),
    /// Pixel vectors and labels for X, Y, Z.
    Images { images: [Vec<f64>; 3], labels: [u8; 3] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationSample {
    pub stimuli: Stimuli,
    pub direction: Io,
}

impl RelationSample {
    pub fn task(&self) -> Task {
        match self.stimuli {
            Stimuli::Numbers(_) => Task::Addition,
            Stimuli::Images { .. } => Task::Xor,
        }
    }

    pub fn with_direction(mut self, direction: Io) -> Self {
        self.direction = direction;
        self
    }

    /// Checks the relation the sample is supposed to satisfy.
    pub fn is_consistent(&self) -> bool {
        match &self.stimuli {
            Stimuli::Numbers([a, b, g]) => (0.0..1.0).contains(g) && *g == wrap_sum(*a, *b),
            Stimuli::Images { labels, .. } => labels.iter().all(|&l| l <= 1) && labels[2] == labels[0] ^ labels[1],
        }
    }
}

/// Addition with periodic boundaries on the unit interval.
pub fn wrap_sum(alpha: f64, beta: f64) -> f64 {
    let s = alpha + beta;
    s - s.floor()
}

pub fn addition_sample(alpha: f64, beta: f64, direction: Io) -> RelationSample {
    RelationSample {
        stimuli: Stimuli::Numbers([alpha, beta, wrap_sum(alpha, beta)]),
        direction,
    }
}

/// Draws `alpha, beta` uniformly from `[0, 1)`. The direction defaults to Z;
/// the trainer assigns the real one.
pub fn sample_addition<R: Rng + ?Sized>(rng: &mut R) -> RelationSample {
    let alpha: f64 = rng.random();
    let beta: f64 = rng.random();
    addition_sample(alpha, beta, Io::Z)
}

/// Indexes a binary image set by label for repeated XOR draws.
#[derive(Clone, Debug)]
pub struct XorSampler<'a> {
    set: &'a LabeledImageSet,
    by_label: [Vec<usize>; 2],
}

impl<'a> XorSampler<'a> {
    pub fn new(set: &'a LabeledImageSet) -> Result<Self> {
        let mut by_label = [Vec::new(), Vec::new()];
        for (i, &l) in set.labels.iter().enumerate() {
            if l <= 1 {
                by_label[l as usize].push(i);
            }
        }
        if by_label.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameter("XOR sampling needs images of both 0 and 1".into()));
        }
        Ok(Self { set, by_label })
    }

    pub fn set(&self) -> &LabeledImageSet {
        self.set
    }

    pub fn image_with_label<R: Rng + ?Sized>(&self, label: u8, rng: &mut R) -> &'a [f64] {
        let pool = &self.by_label[label as usize];
        &self.set.images[pool[rng.random_range(0..pool.len())]]
    }

    /// Samples a label pair uniformly, derives the third label by XOR and
    /// picks one random image per label.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RelationSample {
        let a: u8 = rng.random_range(0..2);
        let b: u8 = rng.random_range(0..2);
        self.sample_with_labels(a, b, rng)
    }

    pub fn sample_with_labels<R: Rng + ?Sized>(&self, a: u8, b: u8, rng: &mut R) -> RelationSample {
        let labels = [a, b, a ^ b];
        let images = labels.map(|l| self.image_with_label(l, rng).to_vec());
        RelationSample { stimuli: Stimuli::Images { images, labels }, direction: Io::Z }
    }
}

pub fn sample_xor<R: Rng + ?Sized>(train: &LabeledImageSet, rng: &mut R) -> Result<RelationSample> {
    Ok(XorSampler::new(train)?.sample(rng))
}
