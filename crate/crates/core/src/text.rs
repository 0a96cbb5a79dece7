//! Unicode normalization and tokenization shared by every module.
//!
//! All text is NFC-normalized. Case folding applies to Latin-script
//! characters only, so CJK text and combining diacritics (Yorùbá tone marks)
//! pass through untouched.

use unicode_normalization::UnicodeNormalization;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

pub fn is_latin(c: char) -> bool {
    matches!(c,
        'A'..='Z' | 'a'..='z'
        | '\u{00C0}'..='\u{00D6}' | '\u{00D8}'..='\u{00F6}' | '\u{00F8}'..='\u{02AF}'
        | '\u{1D00}'..='\u{1D7F}'
        | '\u{1E00}'..='\u{1EFF}'
        | '\u{2C60}'..='\u{2C7F}'
        | '\u{A720}'..='\u{A7FF}'
        | '\u{AB30}'..='\u{AB6F}'
        | '\u{FF21}'..='\u{FF3A}' | '\u{FF41}'..='\u{FF5A}')
}

/// Lowercases Latin-script characters and leaves everything else as is.
pub fn fold_latin(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if is_latin(c) {
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// Collapses runs of whitespace to a single space and trims both ends.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Grouping key of a PET surface string: NFC, collapsed whitespace, Latin case folding.
pub fn pet_key(pet: &str) -> String {
    fold_latin(&collapse_whitespace(&nfc(pet)))
}

pub fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Normal form of a single word token: NFC, surrounding punctuation
/// stripped, Latin case folded. May return an empty string.
pub fn normalize_token(token: &str) -> String {
    let token = nfc(token);
    fold_latin(token.trim_matches(is_punctuation))
}

/// Whitespace tokenizer used for sensitivity scoring and word-vector features.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(normalize_token)
        .filter(|t| !t.is_empty())
        .collect()
}
