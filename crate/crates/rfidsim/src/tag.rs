//! Tag identifiers, their ±1 signal encoding, and reader query masks.
//!
//! A tag ID is a fixed-length bit string. On the air interface the bits are
//! transmitted as antipodal symbols: bit 0 becomes -1 and bit 1 becomes +1
//! (Manchester-style line coding, where the 0-signal is the complement of
//! the 1-signal). An optional one-bit prefix forces a leading +1 symbol in
//! front of every ID, which makes the first position of any summed answer
//! equal the responder count.

use std::fmt;

use thiserror::Error;

/// Errors from parsing tag IDs out of text.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum IdParseError {
    #[error("invalid character {found:?} at position {position}; tag IDs contain only '0' and '1'")]
    InvalidSymbol { position: usize, found: char },
    #[error("empty tag ID; length must be at least 1")]
    Empty,
    #[error("tag ID has length {found}, expected {expected}")]
    WrongLength { expected: usize, found: usize },
}

/// A fixed-length binary tag identifier.
///
/// The canonical text rendering is the bit string most-significant-first,
/// e.g. `"011010"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagId {
    bits: Vec<u8>,
}

impl TagId {
    /// Parses a tag ID from a 0/1 string.
    pub fn parse(text: &str) -> Result<TagId, IdParseError> {
        if text.is_empty() {
            return Err(IdParseError::Empty);
        }
        let mut bits = Vec::with_capacity(text.len());
        for (position, ch) in text.chars().enumerate() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                found => return Err(IdParseError::InvalidSymbol { position, found }),
            }
        }
        Ok(TagId { bits })
    }

    /// Parses a tag ID and checks it against an expected bit length.
    pub fn parse_with_len(text: &str, expected: usize) -> Result<TagId, IdParseError> {
        let id = TagId::parse(text)?;
        if id.len() != expected {
            return Err(IdParseError::WrongLength {
                expected,
                found: id.len(),
            });
        }
        Ok(id)
    }

    /// Builds a tag ID from raw bits (each 0 or 1).
    pub fn from_bits(bits: Vec<u8>) -> TagId {
        assert!(!bits.is_empty(), "tag ID needs at least one bit");
        assert!(bits.iter().all(|&b| b <= 1), "tag ID bits must be 0 or 1");
        TagId { bits }
    }

    /// Number of bits (the ID length K).
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// The bits, most-significant-first.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// True if this ID starts with the given prefix bits.
    pub fn has_prefix(&self, prefix: &[u8]) -> bool {
        self.bits.len() >= prefix.len() && self.bits[..prefix.len()] == *prefix
    }
}

impl fmt::Display for TagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

/// Number of symbol positions on the wire for ID length `k`.
pub fn wire_len(k: usize, prefix_enabled: bool) -> usize {
    if prefix_enabled {
        k + 1
    } else {
        k
    }
}

/// A tag ID as transmitted: a sequence of -1/+1 symbols, optionally led by
/// the forced +1 prefix symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignalForm {
    symbols: Vec<i8>,
}

impl SignalForm {
    /// Encodes a tag ID: bit 0 maps to -1, bit 1 to +1. When the prefix is
    /// enabled a leading +1 is prepended.
    pub fn encode(tag: &TagId, prefix_enabled: bool) -> SignalForm {
        let mut symbols = Vec::with_capacity(wire_len(tag.len(), prefix_enabled));
        if prefix_enabled {
            symbols.push(1);
        }
        symbols.extend(tag.bits().iter().map(|&b| if b == 1 { 1i8 } else { -1i8 }));
        SignalForm { symbols }
    }

    /// The -1/+1 symbols, prefix first when present.
    pub fn symbols(&self) -> &[i8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The tag-side matching rule: true iff every constrained mask position
    /// holds exactly this signal's symbol.
    ///
    /// Panics if the mask length differs from the signal length; reader and
    /// tags always agree on the wire length.
    pub fn matches(&self, mask: &Mask) -> bool {
        assert_eq!(
            self.symbols.len(),
            mask.cells.len(),
            "signal/mask length mismatch"
        );
        self.symbols
            .iter()
            .zip(&mask.cells)
            .all(|(&s, &m)| m == 0 || m == s)
    }
}

/// A reader query: one ternary cell per wire position. `0` is a wildcard,
/// `+1`/`-1` require an exact symbol match. The all-zero mask matches every
/// tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    cells: Vec<i8>,
}

impl Mask {
    /// The all-wildcard mask of the given wire length.
    pub fn wildcard(len: usize) -> Mask {
        Mask {
            cells: vec![0; len],
        }
    }

    pub fn from_cells(cells: Vec<i8>) -> Mask {
        assert!(cells.iter().all(|&c| (-1..=1).contains(&c)));
        Mask { cells }
    }

    /// Constrains one position to -1 or +1.
    pub fn set(&mut self, position: usize, sign: i8) {
        assert!(sign == 1 || sign == -1, "mask constraint must be +1 or -1");
        self.cells[position] = sign;
    }

    /// Releases one position back to wildcard.
    pub fn clear(&mut self, position: usize) {
        self.cells[position] = 0;
    }

    pub fn cells(&self) -> &[i8] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Renders the mask over the alphabet `{+, -, .}`, wildcard as `.`.
    pub fn render(&self) -> String {
        self.cells
            .iter()
            .map(|&c| match c {
                1 => '+',
                -1 => '-',
                _ => '.',
            })
            .collect()
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
