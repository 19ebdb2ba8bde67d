//! Hangul code-point classification and syllable ↔ jamo conversion.
//!
//! A precomposed syllable block encodes three slots: the first sound
//! (initial consonant, 19 candidates), the second sound (vowel, 21
//! candidates) and an optional third sound (final consonant, 27
//! candidates). The block offset from U+AC00 is
//! `(cho * 21 + jung) * 28 + jong`, with `jong = 0` for an empty third
//! slot. Standalone letters are the 51 compatibility jamo starting at
//! U+3131: 30 consonant symbols followed by 21 vowel symbols.

use thiserror::Error;

/// First code point of the precomposed syllable block ('가').
pub const SYLLABLE_BASE: u32 = 0xAC00;
/// Number of precomposed syllables (19 * 21 * 28).
pub const SYLLABLE_COUNT: u32 = 11_172;
/// First compatibility jamo ('ㄱ').
pub const STANDALONE_BASE: u32 = 0x3131;
/// Number of standalone compatibility letters.
pub const STANDALONE_COUNT: usize = 51;
/// Consonant symbols at the head of the compatibility range.
pub const STANDALONE_CONSONANTS: usize = 30;

/// First-sound inventory size.
pub const CHO_COUNT: usize = 19;
/// Second-sound inventory size.
pub const JUNG_COUNT: usize = 21;
/// Non-empty third-sound inventory size.
pub const JONG_COUNT: usize = 27;

const JUNG_PER_CHO: u32 = 21 * 28;
const JONG_PER_JUNG: u32 = 28;

/// Citation (compatibility) forms of the 19 first-sound consonants.
pub const CHO_CHARS: [char; CHO_COUNT] = [
    'ㄱ', 'ㄲ', 'ㄴ', 'ㄷ', 'ㄸ', 'ㄹ', 'ㅁ', 'ㅂ', 'ㅃ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅉ', 'ㅊ',
    'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ',
];

/// Compatibility forms of the 21 vowels, in second-sound order.
pub const JUNG_CHARS: [char; JUNG_COUNT] = [
    'ㅏ', 'ㅐ', 'ㅑ', 'ㅒ', 'ㅓ', 'ㅔ', 'ㅕ', 'ㅖ', 'ㅗ', 'ㅘ', 'ㅙ', 'ㅚ', 'ㅛ', 'ㅜ', 'ㅝ',
    'ㅞ', 'ㅟ', 'ㅠ', 'ㅡ', 'ㅢ', 'ㅣ',
];

/// Compatibility forms of the 27 non-empty third-sound consonants.
/// Index `k` corresponds to `jong = k + 1` in a [`JamoTriple`].
pub const JONG_CHARS: [char; JONG_COUNT] = [
    'ㄱ', 'ㄲ', 'ㄳ', 'ㄴ', 'ㄵ', 'ㄶ', 'ㄷ', 'ㄹ', 'ㄺ', 'ㄻ', 'ㄼ', 'ㄽ', 'ㄾ', 'ㄿ', 'ㅀ',
    'ㅁ', 'ㅂ', 'ㅄ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅊ', 'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ',
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HangulError {
    #[error("'{0}' is not a precomposed Hangul syllable")]
    NotSyllable(char),
    #[error("jamo indices out of range: cho={cho} jung={jung} jong={jong}")]
    IndexOutOfRange { cho: u8, jung: u8, jong: u8 },
}

/// Decomposed syllable: first/second/third-sound indices.
///
/// `jong = 0` means the third slot is empty; values 1..=27 index the
/// non-empty finals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JamoTriple {
    pub cho: u8,
    pub jung: u8,
    pub jong: u8,
}

impl JamoTriple {
    pub fn new(cho: u8, jung: u8, jong: u8) -> Result<Self, HangulError> {
        if (cho as usize) < CHO_COUNT && (jung as usize) < JUNG_COUNT && (jong as usize) <= JONG_COUNT
        {
            Ok(JamoTriple { cho, jung, jong })
        } else {
            Err(HangulError::IndexOutOfRange { cho, jung, jong })
        }
    }

    /// True when the syllable has no final consonant.
    pub fn has_empty_jong(&self) -> bool {
        self.jong == 0
    }
}

/// Classification of a Unicode scalar for featurization purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodepointClass {
    /// One of the 11,172 composed syllable blocks.
    PrecomposedSyllable,
    /// Standalone compatibility letter, with its index in the 51-symbol table.
    StandaloneJamo(u8),
    /// The ordinary space between eojeol.
    Space,
    /// Everything else: digits, Latin, punctuation, CJK ideographs, archaic jamo, ...
    Other,
}

/// Total classification of any Unicode scalar into exactly one class.
pub fn classify_codepoint(c: char) -> CodepointClass {
    let cp = c as u32;
    if cp.wrapping_sub(SYLLABLE_BASE) < SYLLABLE_COUNT {
        CodepointClass::PrecomposedSyllable
    } else if cp.wrapping_sub(STANDALONE_BASE) < STANDALONE_COUNT as u32 {
        CodepointClass::StandaloneJamo((cp - STANDALONE_BASE) as u8)
    } else if c == ' ' {
        CodepointClass::Space
    } else {
        CodepointClass::Other
    }
}

/// Split a precomposed syllable into its three sound indices.
pub fn decompose(c: char) -> Result<JamoTriple, HangulError> {
    let offset = (c as u32).wrapping_sub(SYLLABLE_BASE);
    if offset >= SYLLABLE_COUNT {
        return Err(HangulError::NotSyllable(c));
    }
    Ok(JamoTriple {
        cho: (offset / JUNG_PER_CHO) as u8,
        jung: (offset % JUNG_PER_CHO / JONG_PER_JUNG) as u8,
        jong: (offset % JONG_PER_JUNG) as u8,
    })
}

/// Inverse of [`decompose`].
pub fn compose(t: JamoTriple) -> Result<char, HangulError> {
    if (t.cho as usize) >= CHO_COUNT || (t.jung as usize) >= JUNG_COUNT || (t.jong as usize) > JONG_COUNT
    {
        return Err(HangulError::IndexOutOfRange { cho: t.cho, jung: t.jung, jong: t.jong });
    }
    let cp = SYLLABLE_BASE + (t.cho as u32 * 21 + t.jung as u32) * 28 + t.jong as u32;
    Ok(char::from_u32(cp).expect("syllable block code point"))
}

/// Syllable slot a standalone letter is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    First,
    Second,
    Third,
}

/// Slot assignment of a standalone letter: a consonant maps to its
/// first-sound index when it is one of the 19 initials, otherwise to its
/// third-sound index (cluster finals such as ㅄ exist only there); a vowel
/// maps to its second-sound index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StandaloneSlot {
    pub kind: SlotKind,
    /// Zero-based index within the slot's inventory (19, 21 or 27 entries).
    pub index: u8,
}

pub fn standalone_slot(index: u8) -> StandaloneSlot {
    assert!((index as usize) < STANDALONE_COUNT, "standalone index {index} out of range");
    if (index as usize) < STANDALONE_CONSONANTS {
        let c = standalone_char(index);
        if let Some(pos) = CHO_CHARS.iter().position(|&x| x == c) {
            StandaloneSlot { kind: SlotKind::First, index: pos as u8 }
        } else {
            let pos = JONG_CHARS
                .iter()
                .position(|&x| x == c)
                .expect("every compatibility consonant is an initial or a final");
            StandaloneSlot { kind: SlotKind::Third, index: pos as u8 }
        }
    } else {
        StandaloneSlot { kind: SlotKind::Second, index: index - STANDALONE_CONSONANTS as u8 }
    }
}

/// Compatibility character for a standalone index.
pub fn standalone_char(index: u8) -> char {
    assert!((index as usize) < STANDALONE_COUNT);
    char::from_u32(STANDALONE_BASE + index as u32).expect("compatibility jamo code point")
}

/// Standalone index of a compatibility character, if it is one.
pub fn standalone_index(c: char) -> Option<u8> {
    match classify_codepoint(c) {
        CodepointClass::StandaloneJamo(i) => Some(i),
        _ => None,
    }
}

/// Citation form of a first-sound index.
pub fn cho_char(idx: u8) -> char {
    CHO_CHARS[idx as usize]
}

/// Citation form of a second-sound index.
pub fn jung_char(idx: u8) -> char {
    JUNG_CHARS[idx as usize]
}

/// Citation form of a third-sound value (1..=27); `None` for the empty slot.
pub fn jong_char(jong: u8) -> Option<char> {
    if jong == 0 {
        None
    } else {
        Some(JONG_CHARS[jong as usize - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_codepoint('간'), CodepointClass::PrecomposedSyllable);
        assert_eq!(classify_codepoint(' '), CodepointClass::Space);
        assert_eq!(classify_codepoint('ㅋ'), CodepointClass::StandaloneJamo(26));
        assert_eq!(classify_codepoint('7'), CodepointClass::Other);
        assert_eq!(classify_codepoint('a'), CodepointClass::Other);
        assert_eq!(classify_codepoint('!'), CodepointClass::Other);
        assert_eq!(classify_codepoint('中'), CodepointClass::Other);
        // archaic/filler code points around the compatibility range
        assert_eq!(classify_codepoint('\u{1113}'), CodepointClass::Other);
        assert_eq!(classify_codepoint('\u{3164}'), CodepointClass::Other);
        assert_eq!(classify_codepoint('\u{3130}'), CodepointClass::Other);
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose('간').unwrap(), JamoTriple { cho: 0, jung: 0, jong: 4 });
        assert_eq!(decompose('가').unwrap(), JamoTriple { cho: 0, jung: 0, jong: 0 });
        // last syllable of the block: offset 11,171 = (18 * 21 + 20) * 28 + 27
        let last = char::from_u32(SYLLABLE_BASE + SYLLABLE_COUNT - 1).unwrap();
        assert_eq!(decompose(last).unwrap(), JamoTriple { cho: 18, jung: 20, jong: 27 });
        assert_eq!(decompose('a'), Err(HangulError::NotSyllable('a')));
        assert_eq!(decompose('ㅋ'), Err(HangulError::NotSyllable('ㅋ')));
    }

    #[test]
    fn compose_examples() {
        assert_eq!(compose(JamoTriple { cho: 0, jung: 0, jong: 4 }).unwrap(), '간');
        assert_eq!(compose(JamoTriple { cho: 0, jung: 0, jong: 0 }).unwrap(), '가');
        assert!(compose(JamoTriple { cho: 19, jung: 0, jong: 0 }).is_err());
        assert!(compose(JamoTriple { cho: 0, jung: 21, jong: 0 }).is_err());
        assert!(compose(JamoTriple { cho: 0, jung: 0, jong: 28 }).is_err());
    }

    #[test]
    fn round_trip_all_syllables() {
        let mut seen = std::collections::HashSet::new();
        for cho in 0..CHO_COUNT as u8 {
            for jung in 0..JUNG_COUNT as u8 {
                for jong in 0..=JONG_COUNT as u8 {
                    let t = JamoTriple { cho, jung, jong };
                    let s = compose(t).unwrap();
                    assert!(seen.insert(s), "duplicate syllable {s}");
                    assert_eq!(decompose(s).unwrap(), t);
                }
            }
        }
        assert_eq!(seen.len(), SYLLABLE_COUNT as usize);
    }

    #[test]
    fn standalone_slots() {
        // ㅋ is a first-sound consonant
        let k = standalone_index('ㅋ').unwrap();
        assert_eq!(standalone_slot(k), StandaloneSlot { kind: SlotKind::First, index: 15 });
        // ㅄ is a cluster final, absent from the first-sound inventory
        let ps = standalone_index('ㅄ').unwrap();
        assert_eq!(standalone_slot(ps), StandaloneSlot { kind: SlotKind::Third, index: 17 });
        // ㅏ is the first vowel
        let a = standalone_index('ㅏ').unwrap();
        assert_eq!(standalone_slot(a), StandaloneSlot { kind: SlotKind::Second, index: 0 });
        // every standalone letter resolves to some slot
        for i in 0..STANDALONE_COUNT as u8 {
            let slot = standalone_slot(i);
            let bound = match slot.kind {
                SlotKind::First => CHO_COUNT,
                SlotKind::Second => JUNG_COUNT,
                SlotKind::Third => JONG_COUNT,
            };
            assert!((slot.index as usize) < bound);
        }
    }

    #[test]
    fn inventory_sizes() {
        assert_eq!(CHO_CHARS.len(), 19);
        assert_eq!(JUNG_CHARS.len(), 21);
        assert_eq!(JONG_CHARS.len(), 27);
        assert_eq!(STANDALONE_COUNT, 51);
        assert_eq!(19 * 21 * 28, SYLLABLE_COUNT as usize);
    }

    #[test]
    fn display_tables_match_compat_range() {
        // vowels are contiguous right after the 30 consonants
        for (i, &c) in JUNG_CHARS.iter().enumerate() {
            assert_eq!(standalone_char((STANDALONE_CONSONANTS + i) as u8), c);
        }
        assert_eq!(jong_char(4), Some('ㄴ'));
        assert_eq!(jong_char(0), None);
        assert_eq!(cho_char(0), 'ㄱ');
        assert_eq!(jung_char(0), 'ㅏ');
    }

    proptest! {
        #[test]
        fn classification_is_total_and_consistent(cp in 0u32..=0x10FFFF) {
            if let Some(c) = char::from_u32(cp) {
                match classify_codepoint(c) {
                    CodepointClass::PrecomposedSyllable => {
                        prop_assert!(decompose(c).is_ok());
                    }
                    CodepointClass::StandaloneJamo(i) => {
                        prop_assert!((i as usize) < STANDALONE_COUNT);
                        prop_assert_eq!(standalone_char(i), c);
                    }
                    CodepointClass::Space => prop_assert_eq!(c, ' '),
                    CodepointClass::Other => prop_assert!(decompose(c).is_err()),
                }
            }
        }
    }
}
