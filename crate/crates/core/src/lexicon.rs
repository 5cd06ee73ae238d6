//! The category lexicon: cue words driving the rule-based tagger, loaded from
//! a JSON data file so prompt or vocabulary changes never require code edits.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morph;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed lexicon JSON: {0}")]
    Json(#[from] serde_json::Error),
}

const EMBEDDED: &str = include_str!("../data/lexicon.json");

/// Cue-word lists keyed by salient category.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryLexicon {
    sequencers: Vec<String>,
    temporal: Vec<String>,
    heat: Vec<String>,
    where_prepositions: Vec<String>,
    boundary_prepositions: Vec<String>,
    verbs: Vec<String>,
    adverbs: Vec<String>,
    #[serde(default)]
    intransitive_verbs: Vec<String>,
    #[serde(skip)]
    verb_set: HashSet<String>,
    #[serde(skip)]
    adverb_set: HashSet<String>,
}

impl CategoryLexicon {
    /// The lexicon shipped with the crate.
    pub fn embedded() -> Self {
        Self::from_json(EMBEDDED).expect("embedded lexicon is well-formed")
    }

    pub fn from_json(json: &str) -> Result<Self, LexiconError> {
        let mut lex: CategoryLexicon = serde_json::from_str(json)?;
        lex.verb_set = lex.verbs.iter().map(|v| morph::lemma(v)).collect();
        lex.adverb_set = lex.adverbs.iter().map(|a| a.to_lowercase()).collect();
        Ok(lex)
    }

    pub fn from_path(path: &Path) -> Result<Self, LexiconError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn is_verb_lemma(&self, lemma: &str) -> bool {
        self.verb_set.contains(lemma)
    }

    pub fn is_adverb(&self, word: &str) -> bool {
        self.adverb_set.contains(&word.to_lowercase())
    }

    pub fn is_intransitive(&self, lemma: &str) -> bool {
        self.intransitive_verbs.iter().any(|v| v == lemma)
    }

    pub fn is_where_preposition(&self, word: &str) -> bool {
        let w = word.to_lowercase();
        self.where_prepositions.iter().any(|p| *p == w)
    }

    pub fn is_boundary_preposition(&self, word: &str) -> bool {
        let w = word.to_lowercase();
        self.boundary_prepositions.iter().any(|p| *p == w)
    }

    pub fn is_temporal(&self, word: &str) -> bool {
        let w = word.to_lowercase();
        self.temporal.iter().any(|t| *t == w)
    }

    /// Sequencer cue starting at token `i`; returns how many tokens it spans.
    pub fn sequencer_at(&self, tokens: &[Token], i: usize) -> Option<usize> {
        self.phrase_at(&self.sequencers, tokens, i)
    }

    /// Heat-level phrase starting at token `i`; longest match wins.
    pub fn heat_phrase_at(&self, tokens: &[Token], i: usize) -> Option<usize> {
        self.phrase_at(&self.heat, tokens, i)
    }

    fn phrase_at(&self, phrases: &[String], tokens: &[Token], i: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for phrase in phrases {
            let words: Vec<&str> = phrase.split_whitespace().collect();
            if words.is_empty() || i + words.len() > tokens.len() {
                continue;
            }
            let matches = words
                .iter()
                .enumerate()
                .all(|(k, w)| tokens[i + k].is_word() && tokens[i + k].lower == *w);
            if matches && best.map(|b| words.len() > b).unwrap_or(true) {
                best = Some(words.len());
            }
        }
        best
    }
}

/// A token with byte offsets into the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub lower: String,
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Punct,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '-' || c == '\u{00b0}'
}

/// Split text into word and punctuation tokens, preserving byte offsets.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut iter = text.char_indices().peekable();
    while let Some(&(start, c)) = iter.peek() {
        if c.is_whitespace() {
            iter.next();
            continue;
        }
        if is_word_char(c) {
            let mut end = start;
            while let Some(&(i, ch)) = iter.peek() {
                if is_word_char(ch) {
                    end = i + ch.len_utf8();
                    iter.next();
                } else {
                    break;
                }
            }
            let slice = &text[start..end];
            tokens.push(Token {
                text: slice.to_string(),
                lower: slice.to_lowercase(),
                start,
                end,
                kind: TokenKind::Word,
            });
        } else {
            iter.next();
            tokens.push(Token {
                text: c.to_string(),
                lower: c.to_lowercase().to_string(),
                start,
                end: start + c.len_utf8(),
                kind: TokenKind::Punct,
            });
        }
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_lexicon_loads() {
        let lex = CategoryLexicon::embedded();
        assert!(lex.is_verb_lemma("boil"));
        assert!(lex.is_verb_lemma("stir"));
        assert!(!lex.is_verb_lemma("tomato"));
        assert!(lex.is_where_preposition("into"));
        assert!(lex.is_adverb("gently"));
        assert!(lex.is_intransitive("wait"));
    }

    #[test]
    fn tokenize_offsets() {
        let text = "Boil the eggs, stirring.";
        let tokens = tokenize(text);
        assert_eq!(tokens[0].text, "Boil");
        assert_eq!(tokens[0].start, 0);
        assert_eq!(&text[tokens[2].start..tokens[2].end], "eggs");
        assert_eq!(tokens[3].kind, TokenKind::Punct);
        assert_eq!(tokens.last().unwrap().text, ".");
    }

    #[test]
    fn multiword_cues() {
        let lex = CategoryLexicon::embedded();
        let tokens = tokenize("cook as soon as the oven is hot over medium heat");
        assert_eq!(lex.sequencer_at(&tokens, 1), Some(3));
        let heat_at = tokens.iter().position(|t| t.lower == "medium").unwrap();
        assert_eq!(lex.heat_phrase_at(&tokens, heat_at), Some(2));
    }
}
