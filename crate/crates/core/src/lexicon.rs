//! Shipped word lists: sentiment keywords for annotating unlabeled comments,
//! a common-word dictionary and a professional-jargon lexicon for the
//! readability rubric.

use std::collections::HashSet;
use std::sync::OnceLock;

use crate::corpus::SentimentLabel;
use crate::text::alpha_words;

const POSITIVE: &str = include_str!("../data/positive_words.txt");
const NEGATIVE: &str = include_str!("../data/negative_words.txt");
const COMMON: &str = include_str!("../data/common_words.txt");
const JARGON: &str = include_str!("../data/jargon.txt");

pub struct WordList(HashSet<&'static str>);

impl WordList {
    fn parse(source: &'static str) -> Self {
        WordList(
            source
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn contains_exact(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    /// Exact match, or a match after stripping one common English suffix.
    pub fn contains(&self, word: &str) -> bool {
        if self.0.contains(word) {
            return true;
        }
        if let Some(stem) = word.strip_suffix("ies") {
            if self.0.contains(format!("{stem}y").as_str()) {
                return true;
            }
        }
        ["s", "es", "ed", "d", "ing", "ly", "er", "est"]
            .iter()
            .filter_map(|suffix| word.strip_suffix(suffix))
            .any(|stem| !stem.is_empty() && self.0.contains(stem))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

macro_rules! word_list {
    ($name:ident, $source:expr) => {
        pub fn $name() -> &'static WordList {
            static LIST: OnceLock<WordList> = OnceLock::new();
            LIST.get_or_init(|| WordList::parse($source))
        }
    };
}

word_list!(positive_words, POSITIVE);
word_list!(negative_words, NEGATIVE);
word_list!(common_words, COMMON);
word_list!(jargon_words, JARGON);

/// Keyword-count sentiment: more positive than negative hits is positive,
/// the reverse is negative, anything else is neutral.
pub fn annotate_sentiment(text: &str) -> SentimentLabel {
    let (pos, neg) = alpha_words(text).iter().fold((0usize, 0usize), |(p, n), w| {
        (
            p + usize::from(positive_words().contains_exact(w)),
            n + usize::from(negative_words().contains_exact(w)),
        )
    });
    match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => SentimentLabel::Positive,
        std::cmp::Ordering::Less => SentimentLabel::Negative,
        std::cmp::Ordering::Equal => SentimentLabel::Neutral,
    }
}
