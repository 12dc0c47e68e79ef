//! Tag populations: distinct same-length IDs, reproducible generation, and
//! the one-ID-per-line text format.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tag::{IdParseError, TagId};

/// A finite set of distinct tags sharing one ID length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    k: usize,
    tags: Vec<TagId>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PopulationError {
    #[error("tag IDs have mixed lengths ({0} and {1})")]
    MixedLengths(usize, usize),
    #[error("duplicate tag ID {0}")]
    Duplicate(TagId),
    #[error("{requested} tags requested but only {capacity} distinct IDs exist for this shape")]
    CapacityExceeded { requested: usize, capacity: u64 },
    #[error("shared prefix length {prefix_len} exceeds ID length {k}")]
    PrefixTooLong { prefix_len: usize, k: usize },
}

impl Population {
    /// Validates distinctness and uniform length.
    pub fn new(tags: Vec<TagId>) -> Result<Population, PopulationError> {
        let k = tags.first().map(TagId::len).unwrap_or(1);
        let mut seen = HashSet::with_capacity(tags.len());
        for tag in &tags {
            if tag.len() != k {
                return Err(PopulationError::MixedLengths(k, tag.len()));
            }
            if !seen.insert(tag.clone()) {
                return Err(PopulationError::Duplicate(tag.clone()));
            }
        }
        Ok(Population { k, tags })
    }

    /// An empty population still needs a wire length for queries.
    pub fn empty(k: usize) -> Population {
        assert!(k >= 1);
        Population { k, tags: Vec::new() }
    }

    /// Builds a population without the distinctness check. Identification
    /// runs on such a population are expected to abort with an
    /// assumption-violation error instead of looping; this exists to
    /// exercise that path.
    pub fn from_tags_unchecked(tags: Vec<TagId>) -> Population {
        let k = tags.first().map(TagId::len).unwrap_or(1);
        assert!(
            tags.iter().all(|t| t.len() == k),
            "tag IDs have mixed lengths"
        );
        Population { k, tags }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[TagId] {
        &self.tags
    }

    pub fn contains(&self, id: &TagId) -> bool {
        self.tags.iter().any(|t| t == id)
    }
}

/// How generated IDs are spread over the ID space. Query-tree style
/// protocols are sensitive to this; the splitting protocol is not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Independent uniform draws, duplicates rejected.
    UniformRandom,
    /// Consecutive integers starting from a seed-derived base, wrapping
    /// modulo 2^K.
    SequentialFromBase,
    /// All IDs share one random prefix; suffixes are distinct uniform draws.
    ClusteredPrefix { shared_prefix_len: usize },
}

/// A reproducible recipe for a population: identical specs (seed included)
/// always generate identical populations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub n: usize,
    pub k: usize,
    pub distribution: Distribution,
    pub seed: u64,
}

impl PopulationSpec {
    pub fn generate(&self) -> Result<Population, PopulationError> {
        assert!(self.k >= 1, "ID length must be at least 1");
        check_capacity(self.n, self.k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let tags = match &self.distribution {
            Distribution::UniformRandom => distinct_random_ids(&mut rng, self.k, self.n),
            Distribution::SequentialFromBase => sequential_ids(self.seed, self.k, self.n),
            Distribution::ClusteredPrefix { shared_prefix_len } => {
                let l = *shared_prefix_len;
                if l > self.k {
                    return Err(PopulationError::PrefixTooLong {
                        prefix_len: l,
                        k: self.k,
                    });
                }
                let suffix_len = self.k - l;
                check_capacity_for(self.n, suffix_len)?;
                let prefix: Vec<u8> = (0..l).map(|_| rng.gen_range(0..=1u8)).collect();
                let suffixes = if suffix_len == 0 {
                    vec![Vec::new(); self.n.min(1)]
                } else {
                    distinct_random_bits(&mut rng, suffix_len, self.n)
                };
                suffixes
                    .into_iter()
                    .map(|suffix| {
                        let mut bits = prefix.clone();
                        bits.extend(suffix);
                        TagId::from_bits(bits)
                    })
                    .collect()
            }
        };
        debug_assert_eq!(tags.len(), self.n);
        Ok(Population { k: self.k, tags })
    }
}

fn check_capacity(n: usize, k: usize) -> Result<(), PopulationError> {
    check_capacity_for(n, k)
}

fn check_capacity_for(n: usize, bit_len: usize) -> Result<(), PopulationError> {
    if n <= 1 {
        return Ok(());
    }
    // 2^bit_len saturates past 63 bits; no usize count can exceed that.
    if bit_len < 64 {
        let capacity = 1u64 << bit_len;
        if n as u64 > capacity {
            return Err(PopulationError::CapacityExceeded {
                requested: n,
                capacity,
            });
        }
    }
    Ok(())
}

fn distinct_random_ids(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Vec<TagId> {
    distinct_random_bits(rng, k, n)
        .into_iter()
        .map(TagId::from_bits)
        .collect()
}

/// Draws `n` distinct uniform bit strings of the given length. Dense
/// requests (more than half the space) enumerate and partially shuffle
/// instead of rejection-sampling so saturation stays cheap.
fn distinct_random_bits(rng: &mut ChaCha8Rng, bit_len: usize, n: usize) -> Vec<Vec<u8>> {
    if n == 0 {
        return Vec::new();
    }
    let dense = bit_len < 64 && (n as u64) > (1u64 << bit_len) / 2;
    if dense {
        let space = 1u64 << bit_len;
        let mut values: Vec<u64> = (0..space).collect();
        for i in 0..n {
            let j = rng.gen_range(i..values.len());
            values.swap(i, j);
        }
        values.truncate(n);
        return values
            .into_iter()
            .map(|v| (0..bit_len).map(|i| ((v >> (bit_len - 1 - i)) & 1) as u8).collect())
            .collect();
    }
    let mut seen: HashSet<Vec<u8>> = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let bits: Vec<u8> = (0..bit_len).map(|_| rng.gen_range(0..=1u8)).collect();
        if seen.insert(bits.clone()) {
            out.push(bits);
        }
    }
    out
}

/// Consecutive K-bit integers starting at the seed's low bits, wrapping
/// modulo 2^K. N <= 2^K keeps them distinct.
fn sequential_ids(seed: u64, k: usize, n: usize) -> Vec<TagId> {
    let mut bits = vec![0u8; k];
    for i in 0..k.min(64) {
        bits[k - 1 - i] = ((seed >> i) & 1) as u8;
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(TagId::from_bits(bits.clone()));
        for slot in bits.iter_mut().rev() {
            if *slot == 0 {
                *slot = 1;
                break;
            }
            *slot = 0;
        }
    }
    out
}

/// Errors from reading a population file.
#[derive(Debug, Error)]
pub enum PopulationFileError {
    #[error("I/O error reading population: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: IdParseError,
    },
    #[error("line {line}: duplicate tag ID {id}")]
    Duplicate { line: usize, id: TagId },
    #[error("line {line}: ID length {found} differs from earlier length {expected}")]
    LengthMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
}

/// Parses the text format: one 0/1 ID per line, `#` lines are comments,
/// blank lines are skipped, duplicates are rejected. An empty file yields
/// the empty population (wire length 1).
pub fn parse_population(text: &str) -> Result<Population, PopulationFileError> {
    let mut tags: Vec<TagId> = Vec::new();
    let mut seen: HashSet<TagId> = HashSet::new();
    let mut k: Option<usize> = None;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let id = TagId::parse(trimmed).map_err(|source| PopulationFileError::Parse { line, source })?;
        match k {
            None => k = Some(id.len()),
            Some(expected) if expected != id.len() => {
                return Err(PopulationFileError::LengthMismatch {
                    line,
                    expected,
                    found: id.len(),
                });
            }
            Some(_) => {}
        }
        if !seen.insert(id.clone()) {
            return Err(PopulationFileError::Duplicate { line, id });
        }
        tags.push(id);
    }
    Ok(match k {
        Some(k) => Population { k, tags },
        None => Population::empty(1),
    })
}

pub fn load_population(path: &Path) -> Result<Population, PopulationFileError> {
    parse_population(&fs::read_to_string(path)?)
}

/// Writes the same text format back out.
pub fn save_population(population: &Population, path: &Path) -> io::Result<()> {
    let mut text = String::new();
    for tag in population.tags() {
        text.push_str(&tag.to_string());
        text.push('\n');
    }
    fs::write(path, text)
}
