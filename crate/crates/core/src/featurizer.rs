//! Raw text → fixed-length, right-aligned feature matrices.
//!
//! Tokenization keeps syllables, standalone letters and spaces; every
//! other code point is dropped. Each symbol expands to one vector under
//! the character-level schemes and a syllable expands to three vectors
//! (first/second/third sound, the third all-zero when the slot is empty)
//! under the jamo-level schemes. The expanded sequence is placed at the
//! right end of an `L x D` matrix, zero-padded on the left; sequences
//! longer than `L` keep their rightmost window.

use std::io::Write;
use std::sync::Arc;

use crate::encodings::{jamo118_index, multihot_indices, Encoder, EncodingScheme};
use crate::hangul::{classify_codepoint, decompose, CodepointClass};

/// A tokenized symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Syllable(char),
    /// Standalone compatibility letter, by its index in the 51-symbol table.
    Standalone(u8),
    Space,
}

/// Strip non-representable code points, keeping every space.
pub fn tokenize(text: &str) -> Vec<Symbol> {
    text.chars()
        .filter_map(|c| match classify_codepoint(c) {
            CodepointClass::PrecomposedSyllable => Some(Symbol::Syllable(c)),
            CodepointClass::StandaloneJamo(i) => Some(Symbol::Standalone(i)),
            CodepointClass::Space => Some(Symbol::Space),
            CodepointClass::Other => None,
        })
        .collect()
}

/// One row of a feature matrix, stored compactly.
///
/// The one-/multi-hot schemes touch at most three columns per row and the
/// dense scheme shares vectors with its table, so rows never materialize
/// the full `D` width unless asked to.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureRow {
    Zero,
    /// Columns holding 1.0.
    Ones(Vec<u32>),
    Dense(Arc<[f64]>),
}

impl FeatureRow {
    pub fn is_zero(&self) -> bool {
        match self {
            FeatureRow::Zero => true,
            FeatureRow::Ones(idx) => idx.is_empty(),
            FeatureRow::Dense(v) => v.iter().all(|&x| x == 0.0),
        }
    }

    pub fn value(&self, col: usize) -> f64 {
        match self {
            FeatureRow::Zero => 0.0,
            FeatureRow::Ones(idx) => {
                if idx.contains(&(col as u32)) {
                    1.0
                } else {
                    0.0
                }
            }
            FeatureRow::Dense(v) => v[col],
        }
    }

    pub fn write_dense(&self, out: &mut [f64]) {
        out.fill(0.0);
        match self {
            FeatureRow::Zero => {}
            FeatureRow::Ones(idx) => {
                for &i in idx {
                    out[i as usize] = 1.0;
                }
            }
            FeatureRow::Dense(v) => out.copy_from_slice(v),
        }
    }
}

/// `L x D` sequence of vectors, right-aligned with zero padding on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    seq_len: usize,
    dim: usize,
    occupancy: usize,
    rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of trailing rows that belong to the expanded symbol sequence.
    pub fn occupancy(&self) -> usize {
        self.occupancy
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.seq_len && col < self.dim);
        self.rows[row].value(col)
    }

    pub fn row_dense(&self, row: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        self.rows[row].write_dense(&mut v);
        v
    }

    /// Debug dump: one row per line, space-separated reals.
    pub fn write_text<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let mut buf = vec![0.0; self.dim];
        for row in &self.rows {
            row.write_dense(&mut buf);
            let mut first = true;
            for v in &buf {
                if !first {
                    write!(w, " ")?;
                }
                write!(w, "{v}")?;
                first = false;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn push_symbol_rows(enc: &Encoder, sym: Symbol, rows: &mut Vec<FeatureRow>) {
    match enc.scheme() {
        EncodingScheme::Jamo67 | EncodingScheme::Jamo118 => match sym {
            Symbol::Syllable(c) => {
                let t = decompose(c).expect("tokenizer only passes syllables");
                rows.push(FeatureRow::Ones(vec![t.cho as u32]));
                rows.push(FeatureRow::Ones(vec![19 + t.jung as u32]));
                if t.jong > 0 {
                    rows.push(FeatureRow::Ones(vec![40 + t.jong as u32 - 1]));
                } else {
                    rows.push(FeatureRow::Zero);
                }
            }
            Symbol::Standalone(i) => {
                if enc.scheme() == EncodingScheme::Jamo118 {
                    let dim = jamo118_index(crate::encodings::SlotRequest::Standalone(i))
                        .expect("index from the tokenizer is in range")
                        .expect("standalone letters are representable under (ii)");
                    rows.push(FeatureRow::Ones(vec![dim as u32]));
                } else {
                    rows.push(FeatureRow::Zero);
                }
            }
            Symbol::Space => rows.push(FeatureRow::Zero),
        },
        EncodingScheme::CharOneHot => match sym {
            Symbol::Syllable(c) => match enc.vocab().and_then(|v| v.index_of(c)) {
                Some(i) => rows.push(FeatureRow::Ones(vec![i as u32])),
                None => rows.push(FeatureRow::Zero),
            },
            _ => rows.push(FeatureRow::Zero),
        },
        EncodingScheme::CharDense => match sym {
            Symbol::Syllable(c) => match enc.table().and_then(|t| t.get_char(c)) {
                Some(v) => rows.push(FeatureRow::Dense(Arc::clone(v))),
                None => rows.push(FeatureRow::Zero),
            },
            _ => rows.push(FeatureRow::Zero),
        },
        EncodingScheme::CharMultiHot => match sym {
            Symbol::Syllable(c) => {
                rows.push(FeatureRow::Ones(multihot_indices(c).expect("syllable")))
            }
            Symbol::Standalone(i) => {
                let c = crate::hangul::standalone_char(i);
                rows.push(FeatureRow::Ones(multihot_indices(c).expect("standalone letter")))
            }
            Symbol::Space => rows.push(FeatureRow::Zero),
        },
    }
}

/// Featurize `text` into `max_len` rows under the encoder's scheme.
pub fn featurize(enc: &Encoder, text: &str, max_len: usize) -> FeatureMatrix {
    assert!(max_len > 0, "sequence length must be positive");
    let mut expanded = Vec::new();
    for sym in tokenize(text) {
        push_symbol_rows(enc, sym, &mut expanded);
    }
    let dim = enc.dim();
    if expanded.len() >= max_len {
        // keep the rightmost window: sentence enders carry the label signal
        let cut = expanded.len() - max_len;
        FeatureMatrix { seq_len: max_len, dim, occupancy: max_len, rows: expanded.split_off(cut) }
    } else {
        let occupancy = expanded.len();
        let mut rows = Vec::with_capacity(max_len);
        rows.resize(max_len - occupancy, FeatureRow::Zero);
        rows.extend(expanded);
        FeatureMatrix { seq_len: max_len, dim, occupancy, rows }
    }
}

/// Exact expanded length of `text` before padding or truncation.
pub fn expansion_bound(text: &str, scheme: EncodingScheme) -> usize {
    tokenize(text)
        .iter()
        .map(|sym| match (sym, scheme.is_jamo_level()) {
            (Symbol::Syllable(_), true) => 3,
            _ => 1,
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{encode_char_dense, DenseVectorTable};
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("배고파!"),
            vec![Symbol::Syllable('배'), Symbol::Syllable('고'), Symbol::Syllable('파')]
        );
        let k = crate::hangul::standalone_index('ㅋ').unwrap();
        assert_eq!(
            tokenize("ㅋㅋ 굿"),
            vec![
                Symbol::Standalone(k),
                Symbol::Standalone(k),
                Symbol::Space,
                Symbol::Syllable('굿')
            ]
        );
        assert_eq!(tokenize(""), vec![]);
        // consecutive and leading/trailing spaces are all kept
        assert_eq!(tokenize(" a  "), vec![Symbol::Space, Symbol::Space, Symbol::Space]);
    }

    #[test]
    fn featurize_dense_right_aligned() {
        let table = DenseVectorTable::from_reader(
            &mut "배 1 2\n고 3 4\n파 5 6\n".as_bytes(),
        )
        .unwrap();
        let enc = Encoder::CharDense(table.clone());
        let m = featurize(&enc, "배고파", 140);
        assert_eq!((m.seq_len(), m.dim(), m.occupancy()), (140, 2, 3));
        for r in 0..137 {
            assert!(m.rows()[r].is_zero());
        }
        assert_eq!(m.row_dense(137), encode_char_dense('배', &table));
        assert_eq!(m.row_dense(138), encode_char_dense('고', &table));
        assert_eq!(m.row_dense(139), encode_char_dense('파', &table));
    }

    #[test]
    fn featurize_jamo_spreading() {
        let enc = Encoder::Jamo67;
        let m = featurize(&enc, "가", 6);
        assert_eq!(m.occupancy(), 3);
        for r in 0..3 {
            assert!(m.rows()[r].is_zero());
        }
        assert_eq!(m.rows()[3], FeatureRow::Ones(vec![0]));
        assert_eq!(m.rows()[4], FeatureRow::Ones(vec![19]));
        assert!(m.rows()[5].is_zero());
    }

    #[test]
    fn featurize_empty_text() {
        let m = featurize(&Encoder::CharMultiHot, "", 8);
        assert_eq!(m.occupancy(), 0);
        assert!(m.rows().iter().all(|r| r.is_zero()));
    }

    #[test]
    fn truncation_keeps_rightmost_window() {
        let enc = Encoder::CharMultiHot;
        let m = featurize(&enc, "가나다라마", 3);
        assert_eq!((m.seq_len(), m.occupancy()), (3, 3));
        assert_eq!(m.rows()[0], FeatureRow::Ones(multihot_indices('다').unwrap()));
        assert_eq!(m.rows()[2], FeatureRow::Ones(multihot_indices('마').unwrap()));
    }

    #[test]
    fn standalone_costs_one_position_everywhere() {
        assert_eq!(expansion_bound("배고파", EncodingScheme::Jamo67), 9);
        assert_eq!(expansion_bound("배고파", EncodingScheme::CharDense), 3);
        assert_eq!(expansion_bound("ㅋ 가", EncodingScheme::Jamo118), 5);
        assert_eq!(expansion_bound("ㅋ 가", EncodingScheme::CharMultiHot), 3);
    }

    #[test]
    fn jamo_schemes_share_prefix_columns() {
        // both schemes expand symbols identically, and (ii)'s standalone bits
        // live above column 67, so the 67-column prefix always agrees
        let text = "ㅋㅋ 간다 뷁!";
        let a = featurize(&Encoder::Jamo67, text, 32);
        let b = featurize(&Encoder::Jamo118, text, 32);
        for r in 0..32 {
            for c in 0..67 {
                assert_eq!(a.value(r, c), b.value(r, c), "row {r} col {c}");
            }
        }
    }

    #[test]
    fn matrix_text_dump() {
        let m = featurize(&Encoder::CharMultiHot, "가", 2);
        let mut out = Vec::new();
        m.write_text(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].split(' ').all(|t| t == "0"));
        let row1: Vec<&str> = lines[1].split(' ').collect();
        assert_eq!(row1.len(), 67);
        assert_eq!(row1[0], "1");
        assert_eq!(row1[19], "1");
    }

    proptest! {
        // arbitrary text, including Hangul, never breaks the length law
        #[test]
        fn length_law(text in ".*", len in 1usize..48) {
            let enc = Encoder::CharMultiHot;
            let m = featurize(&enc, &text, len);
            prop_assert_eq!(m.seq_len(), len);
            prop_assert_eq!(m.rows().len(), len);
            prop_assert!(m.occupancy() <= len);
            // leading L - occupancy rows are all-zero
            for r in 0..len - m.occupancy() {
                prop_assert!(m.rows()[r].is_zero());
            }
            prop_assert_eq!(m.occupancy(), expansion_bound(&text, EncodingScheme::CharMultiHot).min(len));
        }

        #[test]
        fn determinism(text in "[가-힣ㄱ-ㅣ a-z!?0-9]{0,40}") {
            let enc = Encoder::Jamo118;
            let a = featurize(&enc, &text, 30);
            let b = featurize(&enc, &text, 30);
            prop_assert_eq!(a, b);
        }

        // the last row is nonzero whenever the final symbol is representable
        #[test]
        fn right_alignment(text in "[가-힣]{1,20}") {
            let m = featurize(&Encoder::CharMultiHot, &text, 25);
            prop_assert!(!m.rows()[24].is_zero());
        }
    }
}
