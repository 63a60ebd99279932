//! Tokenizers shared by the classifier, the embedder and the readability
//! rubric.

/// Lowercased alphanumeric tokens; everything else is a separator.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Lowercased purely alphabetic words (apostrophes removed), used where
/// numbers should not count as words.
pub fn alpha_words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphabetic() || c == '\''))
        .map(|w| w.replace('\'', "").to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}
