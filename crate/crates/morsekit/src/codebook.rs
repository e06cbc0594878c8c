//! Fixed mapping from the 64 class labels to their dot/dash codewords.
//!
//! The table ships as a fixture (`fixtures/codebook.tsv`, one
//! `<label>\t<dot-dash string>` line per entry) and is parsed and fully
//! validated once at startup. Index order is letters A-Z, digits 0-9,
//! then the 28 symbols in fixture order.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::generator::GenerationConfig;

const FIXTURE: &str = include_str!("../fixtures/codebook.tsv");

pub const NUM_CLASSES: usize = 64;

/// Maximum symbols per codeword the fixture is allowed to use.
pub const MAX_SYMBOLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Dot,
    Dash,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub label: char,
    pub index: usize,
    pub symbols: Vec<SymbolKind>,
}

impl Codeword {
    pub fn dots(&self) -> usize {
        self.symbols.iter().filter(|s| **s == SymbolKind::Dot).count()
    }

    pub fn dashes(&self) -> usize {
        self.symbols.iter().filter(|s| **s == SymbolKind::Dash).count()
    }

    /// Gaps between consecutive symbols.
    pub fn gaps(&self) -> usize {
        self.symbols.len() - 1
    }
}

struct Codebook {
    words: Vec<Codeword>,
    by_label: HashMap<char, usize>,
}

fn parse_fixture(text: &str) -> Result<Codebook> {
    let mut words = Vec::new();
    let mut by_label = HashMap::new();
    let mut seen_symbols: HashMap<Vec<SymbolKind>, char> = HashMap::new();

    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::InvalidCodebook(format!("line {}: {}", lineno + 1, msg));
        let (label_str, code_str) = line
            .split_once('\t')
            .ok_or_else(|| bad("missing tab separator".into()))?;
        let mut chars = label_str.chars();
        let label = chars.next().ok_or_else(|| bad("empty label".into()))?;
        if chars.next().is_some() {
            return Err(bad(format!("label {:?} is not a single character", label_str)));
        }
        let symbols: Vec<SymbolKind> = code_str
            .chars()
            .map(|c| match c {
                '.' => Ok(SymbolKind::Dot),
                '-' => Ok(SymbolKind::Dash),
                other => Err(bad(format!("invalid symbol char {:?}", other))),
            })
            .collect::<Result<_>>()?;
        if symbols.is_empty() || symbols.len() > MAX_SYMBOLS {
            return Err(bad(format!(
                "codeword length {} out of range 1..={}",
                symbols.len(),
                MAX_SYMBOLS
            )));
        }
        if by_label.contains_key(&label) {
            return Err(bad(format!("duplicate label {:?}", label)));
        }
        if let Some(prev) = seen_symbols.insert(symbols.clone(), label) {
            return Err(bad(format!(
                "labels {:?} and {:?} share the same codeword",
                prev, label
            )));
        }
        let index = words.len();
        by_label.insert(label, index);
        words.push(Codeword { label, index, symbols });
    }

    if words.len() != NUM_CLASSES {
        return Err(Error::InvalidCodebook(format!(
            "expected {} entries, found {}",
            NUM_CLASSES,
            words.len()
        )));
    }
    Ok(Codebook { words, by_label })
}

fn codebook() -> &'static Codebook {
    static TABLE: OnceLock<Codebook> = OnceLock::new();
    TABLE.get_or_init(|| parse_fixture(FIXTURE).expect("bundled codebook fixture is valid"))
}

/// Look up the canonical codeword for a label.
pub fn codeword_of(label: char) -> Result<&'static Codeword> {
    let table = codebook();
    table
        .by_label
        .get(&label)
        .map(|&i| &table.words[i])
        .ok_or(Error::UnknownLabel(label))
}

/// All 64 codewords in index order.
pub fn all_codewords() -> &'static [Codeword] {
    &codebook().words
}

/// Minimum and maximum frame extent of a codeword under the config's
/// length ranges: symbols plus the gaps between them, no lead/trail.
pub fn codeword_extent_bounds(codeword: &Codeword, cfg: &GenerationConfig) -> (usize, usize) {
    let mut min_len = 0;
    let mut max_len = 0;
    for symbol in &codeword.symbols {
        let (lo, hi) = match symbol {
            SymbolKind::Dot => cfg.dot_range,
            SymbolKind::Dash => cfg.dash_range,
        };
        min_len += lo;
        max_len += hi;
    }
    let gaps = codeword.gaps();
    min_len += gaps * cfg.space_range.0;
    max_len += gaps * cfg.space_range.1;
    (min_len, max_len)
}
