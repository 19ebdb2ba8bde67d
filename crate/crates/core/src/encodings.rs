//! Per-symbol vectors for the five feature schemes and their resources.
//!
//! Scheme layout for the jamo-level vectors is `[0,19)` first sound,
//! `[19,40)` second sound, `[40,67)` third sound; the 118-dim variant
//! appends one dimension per standalone compatibility letter. The
//! character-level schemes are backed by a syllable vocabulary (one-hot),
//! a dense vector table (fastText-style text file), or the 67-dim
//! multi-hot composition of the syllable's sound indices.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::hangul::{
    classify_codepoint, decompose, standalone_slot, CodepointClass, SlotKind, CHO_COUNT,
    JONG_COUNT, JUNG_COUNT, STANDALONE_COUNT,
};

/// Width of the jamo one-hot and character multi-hot vectors (19 + 21 + 27).
pub const JAMO_DIM: usize = CHO_COUNT + JUNG_COUNT + JONG_COUNT;
/// Width of the extended jamo vector (67 + 51 standalone letters).
pub const JAMO_EXT_DIM: usize = JAMO_DIM + STANDALONE_COUNT;

const SECOND_OFFSET: usize = CHO_COUNT;
const THIRD_OFFSET: usize = CHO_COUNT + JUNG_COUNT;

/// The five featurization schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingScheme {
    /// (i) jamo-level one-hot, 67 dims.
    Jamo67,
    /// (ii) jamo-level one-hot with standalone letters, 118 dims.
    Jamo118,
    /// (iii) character-level one-hot over a syllable vocabulary.
    CharOneHot,
    /// (iv) character-level dense vectors from a pretrained table.
    CharDense,
    /// (v) character-level multi-hot over the 67 sound dimensions.
    CharMultiHot,
}

impl EncodingScheme {
    pub const ALL: [EncodingScheme; 5] = [
        EncodingScheme::Jamo67,
        EncodingScheme::Jamo118,
        EncodingScheme::CharOneHot,
        EncodingScheme::CharDense,
        EncodingScheme::CharMultiHot,
    ];

    /// Positions consumed per full syllable: 3 for the jamo-level schemes
    /// (first/second/third sound spreading), 1 otherwise.
    pub fn expansion(self) -> usize {
        if self.is_jamo_level() {
            3
        } else {
            1
        }
    }

    pub fn is_jamo_level(self) -> bool {
        matches!(self, EncodingScheme::Jamo67 | EncodingScheme::Jamo118)
    }

    pub fn name(self) -> &'static str {
        match self {
            EncodingScheme::Jamo67 => "jamo67",
            EncodingScheme::Jamo118 => "jamo118",
            EncodingScheme::CharOneHot => "char-onehot",
            EncodingScheme::CharDense => "char-dense",
            EncodingScheme::CharMultiHot => "multihot",
        }
    }
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncodingScheme {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jamo67" => Ok(EncodingScheme::Jamo67),
            "jamo118" => Ok(EncodingScheme::Jamo118),
            "char-onehot" => Ok(EncodingScheme::CharOneHot),
            "char-dense" => Ok(EncodingScheme::CharDense),
            "multihot" => Ok(EncodingScheme::CharMultiHot),
            other => Err(EncodingError::UnknownScheme(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("unknown scheme '{0}' (expected jamo67|jamo118|char-onehot|char-dense|multihot)")]
    UnknownScheme(String),
    #[error("slot index out of range: {0}")]
    SlotOutOfRange(String),
    #[error("scheme {0} requires a vocabulary file")]
    MissingVocabulary(EncodingScheme),
    #[error("scheme {0} requires a dense vector file")]
    MissingVectors(EncodingScheme),
}

/// Request for one jamo-level vector: a filled or empty syllable slot, or a
/// standalone letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRequest {
    /// First-sound index 0..19.
    First(u8),
    /// Second-sound index 0..21.
    Second(u8),
    /// Third-sound value 0..=27 where 0 is the empty slot.
    Third(u8),
    /// Standalone letter index 0..51.
    Standalone(u8),
}

fn check_slot(req: SlotRequest) -> Result<(), EncodingError> {
    let ok = match req {
        SlotRequest::First(i) => (i as usize) < CHO_COUNT,
        SlotRequest::Second(j) => (j as usize) < JUNG_COUNT,
        SlotRequest::Third(k) => (k as usize) <= JONG_COUNT,
        SlotRequest::Standalone(s) => (s as usize) < STANDALONE_COUNT,
    };
    if ok {
        Ok(())
    } else {
        Err(EncodingError::SlotOutOfRange(format!("{req:?}")))
    }
}

/// Hot dimension of a request under the 67-dim scheme (i).
///
/// `None` for the empty third slot and for standalone letters, which
/// scheme (i) does not represent.
pub fn jamo67_index(req: SlotRequest) -> Result<Option<usize>, EncodingError> {
    check_slot(req)?;
    Ok(match req {
        SlotRequest::First(i) => Some(i as usize),
        SlotRequest::Second(j) => Some(SECOND_OFFSET + j as usize),
        SlotRequest::Third(0) => None,
        SlotRequest::Third(k) => Some(THIRD_OFFSET + k as usize - 1),
        SlotRequest::Standalone(_) => None,
    })
}

/// Hot dimension under the 118-dim scheme (ii): syllable slots share the
/// 67-dim layout, standalone letter `s` maps to `67 + s`.
pub fn jamo118_index(req: SlotRequest) -> Result<Option<usize>, EncodingError> {
    check_slot(req)?;
    Ok(match req {
        SlotRequest::Standalone(s) => Some(JAMO_DIM + s as usize),
        other => jamo67_index(other)?,
    })
}

pub fn encode_jamo67(req: SlotRequest) -> Result<Vec<f64>, EncodingError> {
    let mut v = vec![0.0; JAMO_DIM];
    if let Some(i) = jamo67_index(req)? {
        v[i] = 1.0;
    }
    Ok(v)
}

pub fn encode_jamo118(req: SlotRequest) -> Result<Vec<f64>, EncodingError> {
    let mut v = vec![0.0; JAMO_EXT_DIM];
    if let Some(i) = jamo118_index(req)? {
        v[i] = 1.0;
    }
    Ok(v)
}

/// Multi-hot dimensions of a syllable or standalone letter: one per filled
/// sound slot in the 67-dim layout. Returns `None` for symbols the scheme
/// cannot represent (spaces and non-Korean code points).
pub fn multihot_indices(c: char) -> Option<Vec<u32>> {
    match classify_codepoint(c) {
        CodepointClass::PrecomposedSyllable => {
            let t = decompose(c).expect("classified as syllable");
            let mut idx = vec![t.cho as u32, (SECOND_OFFSET + t.jung as usize) as u32];
            if t.jong > 0 {
                idx.push((THIRD_OFFSET + t.jong as usize - 1) as u32);
            }
            Some(idx)
        }
        CodepointClass::StandaloneJamo(i) => {
            let slot = standalone_slot(i);
            let dim = match slot.kind {
                SlotKind::First => slot.index as usize,
                SlotKind::Second => SECOND_OFFSET + slot.index as usize,
                SlotKind::Third => THIRD_OFFSET + slot.index as usize,
            };
            Some(vec![dim as u32])
        }
        _ => None,
    }
}

/// 67-dim multi-hot vector of a syllable or standalone letter.
pub fn encode_char_multihot(c: char) -> Vec<f64> {
    let idx = multihot_indices(c)
        .unwrap_or_else(|| panic!("'{c}' is not representable under the multi-hot scheme"));
    let mut v = vec![0.0; JAMO_DIM];
    for i in idx {
        v[i as usize] = 1.0;
    }
    v
}

/// Ordered set of precomposed syllables; index = one-hot dimension.
#[derive(Debug, Clone, Default)]
pub struct CharVocabulary {
    chars: Vec<char>,
    index: HashMap<char, usize>,
}

impl CharVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Distinct precomposed syllables of a corpus in first-appearance order.
    /// Standalone letters and non-Korean symbols are excluded.
    pub fn from_corpus<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v = Self::new();
        for line in lines {
            for c in line.as_ref().chars() {
                if classify_codepoint(c) == CodepointClass::PrecomposedSyllable {
                    v.insert(c);
                }
            }
        }
        v
    }

    /// Vocabulary from an explicit symbol stream, keeping only syllables.
    pub fn from_syllables<I: IntoIterator<Item = char>>(chars: I) -> Self {
        let mut v = Self::new();
        for c in chars {
            if classify_codepoint(c) == CodepointClass::PrecomposedSyllable {
                v.insert(c);
            }
        }
        v
    }

    fn insert(&mut self, c: char) {
        if !self.index.contains_key(&c) {
            self.index.insert(c, self.chars.len());
            self.chars.push(c);
        }
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn char_at(&self, idx: usize) -> Option<char> {
        self.chars.get(idx).copied()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    /// One syllable per line; line number = index.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(File::create(path)?);
        for c in &self.chars {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, VectorLoadError> {
        let file = File::open(path).map_err(|e| VectorLoadError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut v = Self::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| VectorLoadError::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let mut chars = t.chars();
            let c = chars.next().unwrap();
            if chars.next().is_some()
                || classify_codepoint(c) != CodepointClass::PrecomposedSyllable
            {
                return Err(VectorLoadError::BadVocabLine { line: lineno + 1, text: t.to_string() });
            }
            v.insert(c);
        }
        Ok(v)
    }
}

/// Build a vocabulary from a text corpus (see [`CharVocabulary::from_corpus`]).
pub fn build_char_vocab<I, S>(corpus: I) -> CharVocabulary
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    CharVocabulary::from_corpus(corpus)
}

/// One-hot vector over a vocabulary; all-zero for out-of-vocabulary symbols.
pub fn encode_char_onehot(c: char, vocab: &CharVocabulary) -> Vec<f64> {
    let mut v = vec![0.0; vocab.len()];
    if let Some(i) = vocab.index_of(c) {
        v[i] = 1.0;
    }
    v
}

#[derive(Debug, Error)]
pub enum VectorLoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected {expected} values, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("line {line}: '{token}' is not a number")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: entry '{token}' has no values")]
    EmptyRow { line: usize, token: String },
    #[error("vocabulary line {line}: expected a single precomposed syllable, found '{text}'")]
    BadVocabLine { line: usize, text: String },
}

/// Token → dense vector map with a uniform width.
///
/// Lookup of an absent key returns `None`, distinguishable from a stored
/// zero vector. Vectors are reference-counted so feature rows can share
/// them without copying.
#[derive(Debug, Clone, Default)]
pub struct DenseVectorTable {
    width: usize,
    keys: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<Arc<[f64]>>,
}

impl DenseVectorTable {
    /// Build a table in memory. Duplicate keys keep their first position but
    /// take the last value, like the file loader.
    pub fn from_entries<I>(entries: I) -> Result<Self, VectorLoadError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut t = DenseVectorTable::default();
        for (lineno, (key, vec)) in entries.into_iter().enumerate() {
            t.push(lineno + 1, key, vec)?;
        }
        Ok(t)
    }

    /// Parse a whitespace-separated text file: an optional `count dim`
    /// header line, then one `token v1 .. vdim` line per entry.
    pub fn load(path: &Path) -> Result<Self, VectorLoadError> {
        let file = File::open(path).map_err(|e| VectorLoadError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut reader = BufReader::new(file);
        Self::from_reader(&mut reader).map_err(|e| match e {
            VectorLoadError::Io { source, .. } => VectorLoadError::Io {
                path: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    pub fn from_reader<R: BufRead>(reader: &mut R) -> Result<Self, VectorLoadError> {
        let mut t = DenseVectorTable::default();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| VectorLoadError::Io {
                path: String::from("<reader>"),
                source: e,
            })?;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            // fastText-style "count dim" header: exactly two integer fields
            if lineno == 0
                && values.len() == 1
                && token.parse::<u64>().is_ok()
                && values[0].parse::<u64>().is_ok()
            {
                continue;
            }
            let mut vec = Vec::with_capacity(values.len());
            for v in &values {
                vec.push(v.parse::<f64>().map_err(|_| VectorLoadError::BadNumber {
                    line: lineno + 1,
                    token: v.to_string(),
                })?);
            }
            t.push(lineno + 1, token.to_string(), vec)?;
        }
        Ok(t)
    }

    fn push(&mut self, line: usize, key: String, vec: Vec<f64>) -> Result<(), VectorLoadError> {
        if vec.is_empty() {
            return Err(VectorLoadError::EmptyRow { line, token: key });
        }
        if self.vectors.is_empty() {
            self.width = vec.len();
        } else if vec.len() != self.width {
            return Err(VectorLoadError::RaggedRow {
                line,
                expected: self.width,
                found: vec.len(),
            });
        }
        match self.index.get(&key) {
            Some(&i) => self.vectors[i] = vec.into(),
            None => {
                self.index.insert(key.clone(), self.vectors.len());
                self.keys.push(key);
                self.vectors.push(vec.into());
            }
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&Arc<[f64]>> {
        self.index.get(token).map(|&i| &self.vectors[i])
    }

    pub fn get_char(&self, c: char) -> Option<&Arc<[f64]>> {
        let mut buf = [0u8; 4];
        self.get(c.encode_utf8(&mut buf))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.keys.iter().map(|s| s.as_str())
    }

    /// Write the table in the loader's text layout, with a `count dim`
    /// header. Values print as shortest round-tripping decimals.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(File::create(path)?);
        writeln!(w, "{} {}", self.len(), self.width)?;
        for (key, vec) in self.keys.iter().zip(&self.vectors) {
            write!(w, "{key}")?;
            for v in vec.iter() {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Vocabulary of the table's single-syllable keys, in file order.
    pub fn syllable_vocab(&self) -> CharVocabulary {
        CharVocabulary::from_syllables(self.keys.iter().filter_map(|k| {
            let mut chars = k.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Some(c),
                _ => None,
            }
        }))
    }
}

/// Dense vector of a syllable; zero vector for absent keys.
pub fn encode_char_dense(c: char, table: &DenseVectorTable) -> Vec<f64> {
    match table.get_char(c) {
        Some(v) => v.to_vec(),
        None => vec![0.0; table.width()],
    }
}

/// A scheme bound to the resources it needs, ready to emit vectors.
#[derive(Debug, Clone)]
pub enum Encoder {
    Jamo67,
    Jamo118,
    CharOneHot(CharVocabulary),
    CharDense(DenseVectorTable),
    CharMultiHot,
}

impl Encoder {
    pub fn scheme(&self) -> EncodingScheme {
        match self {
            Encoder::Jamo67 => EncodingScheme::Jamo67,
            Encoder::Jamo118 => EncodingScheme::Jamo118,
            Encoder::CharOneHot(_) => EncodingScheme::CharOneHot,
            Encoder::CharDense(_) => EncodingScheme::CharDense,
            Encoder::CharMultiHot => EncodingScheme::CharMultiHot,
        }
    }

    /// Vector width of the scheme (Table 1 "Dimension" column).
    pub fn dim(&self) -> usize {
        match self {
            Encoder::Jamo67 => JAMO_DIM,
            Encoder::Jamo118 => JAMO_EXT_DIM,
            Encoder::CharOneHot(v) => v.len(),
            Encoder::CharDense(t) => t.width(),
            Encoder::CharMultiHot => JAMO_DIM,
        }
    }

    pub fn expansion(&self) -> usize {
        self.scheme().expansion()
    }

    pub fn vocab(&self) -> Option<&CharVocabulary> {
        match self {
            Encoder::CharOneHot(v) => Some(v),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&DenseVectorTable> {
        match self {
            Encoder::CharDense(t) => Some(t),
            _ => None,
        }
    }
}
