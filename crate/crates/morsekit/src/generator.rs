//! Dataset generation: frame partitioning, intensity assignment, noising,
//! normalization, and mass generation with the difficulty variations.
//!
//! Determinism contract: every sample is produced from its own RNG
//! substream keyed by `(master_seed, class, ordinal)`, and the train/test
//! split from `(master_seed, class)`. Identical config and seed give
//! byte-identical datasets regardless of execution order or thread count.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codebook::{self, Codeword, SymbolKind, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::rng::{substream, StreamKind};

/// All tunable generation knobs. Construct via [`GenerationConfig::baseline`],
/// [`GenerationConfig::variant`] or deserialize from TOML, then `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub frame_len: usize,
    /// Inclusive (lo, hi) length intervals.
    pub dot_range: (usize, usize),
    pub dash_range: (usize, usize),
    pub space_range: (usize, usize),
    pub leading_spaces: bool,
    /// Additive noise std, in pre-normalization intensity units.
    pub noise_sigma: f64,
    pub intensity_mean: f64,
    pub intensity_std: f64,
    pub intensity_max: f64,
    pub per_class: usize,
    pub master_seed: u64,
    pub quantization_decimals: u32,
}

impl GenerationConfig {
    pub fn baseline() -> Self {
        GenerationConfig {
            frame_len: 64,
            dot_range: (1, 3),
            dash_range: (4, 9),
            space_range: (1, 3),
            leading_spaces: false,
            noise_sigma: 0.0,
            intensity_mean: 12.0,
            intensity_std: 4.0 / 3.0,
            intensity_max: 16.0,
            per_class: 7000,
            master_seed: 0,
            quantization_decimals: 3,
        }
    }

    /// Family-4 geometry: everything in the family-3 config scaled by 4.
    pub fn dilated() -> Self {
        GenerationConfig {
            frame_len: 256,
            dot_range: (4, 12),
            dash_range: (12, 36),
            space_range: (4, 12),
            leading_spaces: true,
            ..Self::baseline()
        }
    }

    /// Config for dataset variant `family.sigma` at a size factor.
    ///
    /// Family 1 is the noisy baseline, 2 adds leading spaces, 3 widens the
    /// dash range to overlap dots and spaces, 4 dilates family 3 by 4.
    /// `size_factor` scales the per-class example count (1.0 = 7000).
    pub fn variant(family: u32, sigma: u32, size_factor: f64) -> Result<Self> {
        if !(1..=4).contains(&family) || sigma > 4 {
            return Err(Error::InvalidVariant { family, sigma });
        }
        let mut cfg = Self::baseline();
        cfg.noise_sigma = f64::from(sigma);
        if family >= 2 {
            cfg.leading_spaces = true;
        }
        if family >= 3 {
            cfg.dash_range = (3, 9);
        }
        if family == 4 {
            cfg.frame_len = 256;
            cfg.dot_range = (4, 12);
            cfg.dash_range = (12, 36);
            cfg.space_range = (4, 12);
        }
        cfg.per_class = (7000.0 * size_factor).round() as usize;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("dot_range", self.dot_range),
            ("dash_range", self.dash_range),
            ("space_range", self.space_range),
        ] {
            if lo < 1 || lo > hi {
                return Err(Error::InvalidConfig(format!(
                    "{} = [{}, {}] must satisfy 1 <= lo <= hi",
                    name, lo, hi
                )));
            }
        }
        if self.frame_len == 0 || self.per_class == 0 {
            return Err(Error::InvalidConfig(
                "frame_len and per_class must be positive".into(),
            ));
        }
        if self.noise_sigma < 0.0 || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidConfig("noise_sigma must be >= 0".into()));
        }
        if self.intensity_mean - 3.0 * self.intensity_std < self.intensity_max / 2.0 {
            return Err(Error::InvalidConfig(
                "intensity mean - 3*std must stay in the upper half of the range".into(),
            ));
        }
        for cw in codebook::all_codewords() {
            let (_, max_extent) = codebook::codeword_extent_bounds(cw, self);
            if max_extent > self.frame_len {
                return Err(Error::InvalidConfig(format!(
                    "codeword {:?} can extend to {} which exceeds frame_len {}",
                    cw.label, max_extent, self.frame_len
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 digest binding dataset files to their generating config.
    pub fn digest(&self) -> [u8; 32] {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(&canonical);
        hasher.finalize().into()
    }

}

/// Randomness the generator consumes, as an explicit interface so tests
/// can substitute stub draws.
pub trait Sampler {
    /// Uniform integer in the inclusive range `[lo, hi]`.
    fn int_in(&mut self, lo: usize, hi: usize) -> usize;
    /// Draw from Normal(mean, std).
    fn normal(&mut self, mean: f64, std: f64) -> f64;
}

/// Real sampler over any `rand` RNG.
pub struct RngSampler<R: Rng> {
    rng: R,
}

impl<R: Rng> RngSampler<R> {
    pub fn new(rng: R) -> Self {
        RngSampler { rng }
    }
}

impl<R: Rng> Sampler for RngSampler<R> {
    fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    fn normal(&mut self, mean: f64, std: f64) -> f64 {
        Normal::new(mean, std)
            .expect("valid normal parameters")
            .sample(&mut self.rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    MarkDot,
    MarkDash,
    Gap,
    Lead,
    Trail,
}

impl RunKind {
    pub fn is_mark(self) -> bool {
        matches!(self, RunKind::MarkDot | RunKind::MarkDash)
    }
}

/// A frame as an ordered sequence of runs summing to `frame_len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLayout {
    pub runs: Vec<(RunKind, usize)>,
}

impl FrameLayout {
    pub fn total_len(&self) -> usize {
        self.runs.iter().map(|(_, len)| len).sum()
    }
}

/// One quantized labeled frame. Values are multiples of the quantization
/// step (0.001) in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub values: Vec<f64>,
    pub label_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n_features: usize,
    pub n_classes: usize,
    pub samples: Vec<Sample>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub config: GenerationConfig,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Step 1: lay the codeword out in the frame. Lengths are drawn uniformly
/// from their ranges in left-to-right order; with leading spaces enabled
/// the slack splits as LEAD ~ uniform on {0..slack}, remainder TRAIL.
pub fn partition_frame(
    codeword: &Codeword,
    cfg: &GenerationConfig,
    sampler: &mut dyn Sampler,
) -> FrameLayout {
    let mut runs: Vec<(RunKind, usize)> = Vec::with_capacity(codeword.symbols.len() * 2 + 1);
    let mut extent = 0;
    for (i, symbol) in codeword.symbols.iter().enumerate() {
        if i > 0 {
            let gap = sampler.int_in(cfg.space_range.0, cfg.space_range.1);
            runs.push((RunKind::Gap, gap));
            extent += gap;
        }
        let (kind, (lo, hi)) = match symbol {
            SymbolKind::Dot => (RunKind::MarkDot, cfg.dot_range),
            SymbolKind::Dash => (RunKind::MarkDash, cfg.dash_range),
        };
        let len = sampler.int_in(lo, hi);
        runs.push((kind, len));
        extent += len;
    }
    debug_assert!(extent <= cfg.frame_len);
    let slack = cfg.frame_len - extent;
    let lead = if cfg.leading_spaces && slack > 0 {
        sampler.int_in(0, slack)
    } else {
        0
    };
    let trail = slack - lead;
    if lead > 0 {
        runs.insert(0, (RunKind::Lead, lead));
    }
    if trail > 0 {
        runs.push((RunKind::Trail, trail));
    }
    FrameLayout { runs }
}

/// Step 2: marks get independent Normal(mean, std) draws clipped to
/// `[0, intensity_max]`; spaces are exactly 0.
pub fn render_intensity(
    layout: &FrameLayout,
    cfg: &GenerationConfig,
    sampler: &mut dyn Sampler,
) -> Vec<f64> {
    let mut frame = Vec::with_capacity(cfg.frame_len);
    for &(kind, len) in &layout.runs {
        if kind.is_mark() {
            for _ in 0..len {
                let v = sampler.normal(cfg.intensity_mean, cfg.intensity_std);
                frame.push(v.clamp(0.0, cfg.intensity_max));
            }
        } else {
            frame.extend(std::iter::repeat(0.0).take(len));
        }
    }
    frame
}

/// Step 3a: additive Normal(0, sigma) noise on every position, clipped
/// back to `[0, max]`. `sigma = 0` is the bit-exact identity.
pub fn apply_noise(frame: &[f64], sigma: f64, max: f64, sampler: &mut dyn Sampler) -> Vec<f64> {
    if sigma == 0.0 {
        return frame.to_vec();
    }
    frame
        .iter()
        .map(|&v| (v + sampler.normal(0.0, sigma)).clamp(0.0, max))
        .collect()
}

/// Step 3b: divide by the intensity maximum and round half-away-from-zero
/// to the configured number of decimals.
pub fn normalize(frame: &[f64], cfg: &GenerationConfig) -> Vec<f64> {
    let scale = 10f64.powi(cfg.quantization_decimals as i32);
    frame
        .iter()
        .map(|&v| (v / cfg.intensity_max * scale).round() / scale)
        .collect()
}

/// Steps 1-3 composed for one sample.
pub fn generate_sample(
    codeword: &Codeword,
    cfg: &GenerationConfig,
    sampler: &mut dyn Sampler,
) -> Sample {
    let layout = partition_frame(codeword, cfg, sampler);
    let raw = render_intensity(&layout, cfg, sampler);
    let noisy = apply_noise(&raw, cfg.noise_sigma, cfg.intensity_max, sampler);
    Sample {
        values: normalize(&noisy, cfg),
        label_index: codeword.index,
    }
}

fn sample_for(class: usize, ordinal: usize, cfg: &GenerationConfig) -> Sample {
    let rng = substream(cfg.master_seed, StreamKind::Sample, class as u64, ordinal as u64);
    let mut sampler = RngSampler::new(rng);
    generate_sample(&codebook::all_codewords()[class], cfg, &mut sampler)
}

fn class_samples(class: usize, cfg: &GenerationConfig) -> Vec<Sample> {
    (0..cfg.per_class)
        .map(|ordinal| sample_for(class, ordinal, cfg))
        .collect()
}

/// Per-class test ordinals for the stratified 6/7-1/7 split.
fn test_ordinals(class: usize, cfg: &GenerationConfig) -> Vec<usize> {
    let test_count = (cfg.per_class as f64 / 7.0).round() as usize;
    let mut rng = substream(cfg.master_seed, StreamKind::Split, class as u64, 0);
    let mut picked = rand::seq::index::sample(&mut rng, cfg.per_class, test_count).into_vec();
    picked.sort_unstable();
    picked
}

fn assemble(cfg: GenerationConfig, per_class_samples: Vec<Vec<Sample>>) -> Dataset {
    let total = NUM_CLASSES * cfg.per_class;
    let mut samples = Vec::with_capacity(total);
    let mut train_indices = Vec::with_capacity(total);
    let mut test_indices = Vec::with_capacity(total / 7 + NUM_CLASSES);
    for (class, class_block) in per_class_samples.into_iter().enumerate() {
        let base = samples.len();
        let test = test_ordinals(class, &cfg);
        let mut test_iter = test.iter().peekable();
        for ordinal in 0..class_block.len() {
            let idx = base + ordinal;
            if test_iter.peek() == Some(&&ordinal) {
                test_indices.push(idx);
                test_iter.next();
            } else {
                train_indices.push(idx);
            }
        }
        samples.extend(class_block);
    }
    Dataset {
        n_features: cfg.frame_len,
        n_classes: NUM_CLASSES,
        samples,
        train_indices,
        test_indices,
        config: cfg,
    }
}

/// Generate the full dataset sequentially.
pub fn generate_dataset_serial(cfg: &GenerationConfig) -> Result<Dataset> {
    cfg.validate()?;
    let blocks: Vec<Vec<Sample>> = (0..NUM_CLASSES).map(|c| class_samples(c, cfg)).collect();
    Ok(assemble(cfg.clone(), blocks))
}

/// Generate the full dataset, fanning classes out across the rayon pool
/// when the `parallel` feature is enabled. Output is identical to
/// [`generate_dataset_serial`].
#[cfg(feature = "parallel")]
pub fn generate_dataset(cfg: &GenerationConfig) -> Result<Dataset> {
    use rayon::prelude::*;
    cfg.validate()?;
    let blocks: Vec<Vec<Sample>> = (0..NUM_CLASSES)
        .into_par_iter()
        .map(|c| class_samples(c, cfg))
        .collect();
    Ok(assemble(cfg.clone(), blocks))
}

#[cfg(not(feature = "parallel"))]
pub fn generate_dataset(cfg: &GenerationConfig) -> Result<Dataset> {
    generate_dataset_serial(cfg)
}

/// Chance that a dot, dash or intermediate space of this codeword lands
/// on an ambiguous length, under the discrete uniform length model.
pub fn confusion_probability(codeword: &Codeword, cfg: &GenerationConfig) -> f64 {
    fn span(r: (usize, usize)) -> usize {
        r.1 - r.0 + 1
    }
    fn inter(a: (usize, usize), b: (usize, usize)) -> usize {
        let lo = a.0.max(b.0);
        let hi = a.1.min(b.1);
        if lo > hi {
            0
        } else {
            hi - lo + 1
        }
    }

    let dots = codeword.dots() as f64;
    let dashes = codeword.dashes() as f64;
    let gaps = codeword.gaps() as f64;
    let total = dots + dashes + gaps;
    if total == 0.0 {
        return 0.0;
    }
    let p_dash = inter(cfg.dash_range, cfg.dot_range) as f64 / span(cfg.dash_range) as f64;
    let p_dot = inter(cfg.dot_range, cfg.dash_range) as f64 / span(cfg.dot_range) as f64;
    let p_gap = inter(cfg.space_range, cfg.dash_range) as f64 / span(cfg.space_range) as f64;
    (dashes * p_dash + dots * p_dot + gaps * p_gap) / total
}

/// Run-length decomposition of a frame: `(is_nonzero, len)` runs in order.
pub fn decode_runs(values: &[f64]) -> Vec<(bool, usize)> {
    let mut runs: Vec<(bool, usize)> = Vec::new();
    for &v in values {
        let mark = v != 0.0;
        match runs.last_mut() {
            Some((m, len)) if *m == mark => *len += 1,
            _ => runs.push((mark, 1)),
        }
    }
    runs
}
