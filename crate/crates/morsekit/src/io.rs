//! On-disk dataset carrier and CSV export.
//!
//! Binary layout (all integers little-endian):
//!   magic    8 bytes  "MORSEDS1"
//!   header   n_features u32, n_classes u32, sample count u64,
//!            per-class count u32, config digest 32 bytes,
//!            config length u32, config JSON bytes
//!   body     per sample: label u16, then n_features values stored as
//!            thousandths (u16, 0..=1000)
//!   footer   test-membership bitset, one bit per sample (LSB first)
//!
//! Thousandths storage losslessly round-trips the 3-decimal quantization
//! and keeps files byte-identical across platforms.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::generator::{Dataset, GenerationConfig, Sample};

pub const MAGIC: [u8; 8] = *b"MORSEDS1";

fn to_thousandths(v: f64) -> u16 {
    (v * 1000.0).round() as u16
}

pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    if dataset.n_features > u16::MAX as usize {
        return Err(Error::SerializationOverflow(dataset.n_features));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&(dataset.n_features as u32).to_le_bytes())?;
    w.write_all(&(dataset.n_classes as u32).to_le_bytes())?;
    w.write_all(&(dataset.len() as u64).to_le_bytes())?;
    w.write_all(&(dataset.config.per_class as u32).to_le_bytes())?;
    w.write_all(&dataset.config.digest())?;
    let config_json = serde_json::to_vec(&dataset.config)?;
    w.write_all(&(config_json.len() as u32).to_le_bytes())?;
    w.write_all(&config_json)?;
    for sample in &dataset.samples {
        w.write_all(&(sample.label_index as u16).to_le_bytes())?;
        for &v in &sample.values {
            w.write_all(&to_thousandths(v).to_le_bytes())?;
        }
    }
    let mut bitset = vec![0u8; dataset.len().div_ceil(8)];
    for &i in &dataset.test_indices {
        bitset[i / 8] |= 1 << (i % 8);
    }
    w.write_all(&bitset)?;
    w.flush()?;
    Ok(())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], section: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::CorruptFile(format!("truncated while reading {}", section)))
}

fn read_u32(r: &mut impl Read, section: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, section)?;
    Ok(u32::from_le_bytes(b))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    read_exact(&mut r, &mut magic, "magic")?;
    if magic != MAGIC {
        return Err(Error::BadMagic { expected: MAGIC, found: magic });
    }
    let n_features = read_u32(&mut r, "header")? as usize;
    let n_classes = read_u32(&mut r, "header")? as usize;
    let mut count_bytes = [0u8; 8];
    read_exact(&mut r, &mut count_bytes, "header")?;
    let sample_count = u64::from_le_bytes(count_bytes) as usize;
    let per_class = read_u32(&mut r, "header")? as usize;
    let mut digest = [0u8; 32];
    read_exact(&mut r, &mut digest, "config digest")?;
    let config_len = read_u32(&mut r, "config block")? as usize;
    let mut config_json = vec![0u8; config_len];
    read_exact(&mut r, &mut config_json, "config block")?;
    let config: GenerationConfig = serde_json::from_slice(&config_json)?;
    if config.digest() != digest {
        return Err(Error::CorruptFile(
            "config digest does not match stored config".into(),
        ));
    }
    if config.per_class != per_class {
        return Err(Error::CorruptFile("per-class count disagrees with config".into()));
    }

    let mut samples = Vec::with_capacity(sample_count);
    let mut row = vec![0u8; 2 + 2 * n_features];
    for _ in 0..sample_count {
        read_exact(&mut r, &mut row, "sample body")?;
        let label = u16::from_le_bytes([row[0], row[1]]) as usize;
        if label >= n_classes {
            return Err(Error::CorruptFile(format!(
                "label {} out of range for {} classes",
                label, n_classes
            )));
        }
        let mut values = Vec::with_capacity(n_features);
        for i in 0..n_features {
            let t = u16::from_le_bytes([row[2 + 2 * i], row[3 + 2 * i]]);
            if t > 1000 {
                return Err(Error::BoundsViolation(t));
            }
            values.push(t as f64 / 1000.0);
        }
        samples.push(Sample { values, label_index: label });
    }
    let mut bitset = vec![0u8; sample_count.div_ceil(8)];
    read_exact(&mut r, &mut bitset, "split footer")?;
    let mut trailing = Vec::new();
    r.read_to_end(&mut trailing)?;
    if !trailing.is_empty() {
        return Err(Error::CorruptFile(format!(
            "{} unexpected trailing bytes",
            trailing.len()
        )));
    }
    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();
    for i in 0..sample_count {
        if bitset[i / 8] & (1 << (i % 8)) != 0 {
            test_indices.push(i);
        } else {
            train_indices.push(i);
        }
    }
    Ok(Dataset {
        n_features,
        n_classes,
        samples,
        train_indices,
        test_indices,
        config,
    })
}

/// CSV export: header `label,f0,...`, values printed with 3 decimals.
pub fn export_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "label")?;
    for i in 0..dataset.n_features {
        write!(w, ",f{}", i)?;
    }
    writeln!(w)?;
    for sample in &dataset.samples {
        write!(w, "{}", sample.label_index)?;
        for &v in &sample.values {
            write!(w, ",{:.3}", v)?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
