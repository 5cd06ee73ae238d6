//! Small rule-based lemmatizer and text normalization helpers.
//!
//! Full morphological analysis is out of scope: an irregular-form table plus
//! s/es/ies/ed/ing suffix stripping covers the vocabulary that shows up in
//! recipe instructions.

use std::collections::HashMap;

use once_cell::sync::Lazy;

/// Irregular or suffix-rule-defeating forms, inflected -> lemma.
static IRREGULAR: Lazy<HashMap<&'static str, &'static str>> = Lazy::new(|| {
    let pairs: &[(&str, &str)] = &[
        // nouns
        ("children", "child"),
        ("cloves", "clove"),
        ("dishes", "dish"),
        ("halves", "half"),
        ("knives", "knife"),
        ("leaves", "leaf"),
        ("loaves", "loaf"),
        ("potatoes", "potato"),
        ("shelves", "shelf"),
        ("tomatoes", "tomato"),
        ("molasses", "molasses"),
        ("couscous", "couscous"),
        ("hummus", "hummus"),
        // verbs whose stripped stem needs no restored 'e'
        ("basting", "baste"),
        ("basted", "baste"),
        ("baking", "bake"),
        ("baked", "bake"),
        ("boned", "bone"),
        ("carving", "carve"),
        ("carved", "carve"),
        ("coating", "coat"),
        ("cubing", "cube"),
        ("cubed", "cube"),
        ("deglazing", "deglaze"),
        ("deglazed", "deglaze"),
        ("dicing", "dice"),
        ("diced", "dice"),
        ("drizzling", "drizzle"),
        ("drizzled", "drizzle"),
        ("freezing", "freeze"),
        ("froze", "freeze"),
        ("frozen", "freeze"),
        ("glazing", "glaze"),
        ("glazed", "glaze"),
        ("grating", "grate"),
        ("grated", "grate"),
        ("juicing", "juice"),
        ("juiced", "juice"),
        ("julienning", "julienne"),
        ("kneading", "knead"),
        ("ladling", "ladle"),
        ("ladled", "ladle"),
        ("left", "leave"),
        ("made", "make"),
        ("making", "make"),
        ("marinating", "marinate"),
        ("marinated", "marinate"),
        ("mincing", "mince"),
        ("minced", "mince"),
        ("pureeing", "puree"),
        ("pureed", "puree"),
        ("reducing", "reduce"),
        ("reduced", "reduce"),
        ("rinsing", "rinse"),
        ("rinsed", "rinse"),
        ("scraping", "scrape"),
        ("scraped", "scrape"),
        ("serving", "serve"),
        ("served", "serve"),
        ("slicing", "slice"),
        ("sliced", "slice"),
        ("sauteing", "saute"),
        ("sauteed", "saute"),
        ("took", "take"),
        ("taken", "take"),
        ("taking", "take"),
        ("tasting", "taste"),
        ("tasted", "taste"),
        ("whisking", "whisk"),
    ];
    pairs.iter().copied().collect()
});

const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u'];

fn is_vowel(c: char) -> bool {
    VOWELS.contains(&c)
}

/// True when the stem ends consonant-vowel-consonant, the classic signal that
/// a silent 'e' was dropped before -ed/-ing ("grat" -> "grate").
fn ends_cvc(stem: &str) -> bool {
    let chars: Vec<char> = stem.chars().collect();
    if chars.len() < 3 {
        return false;
    }
    let [a, b, c] = [chars[chars.len() - 3], chars[chars.len() - 2], chars[chars.len() - 1]];
    // no restored 'e' after x/w/y ("mix", not "mixe")
    !is_vowel(a) && is_vowel(b) && !is_vowel(c) && !matches!(c, 'x' | 'w' | 'y')
}

fn strip_inflection(word: &str, suffix: &str) -> Option<String> {
    let stem = word.strip_suffix(suffix)?;
    if stem.len() < 2 {
        return None;
    }
    let chars: Vec<char> = stem.chars().collect();
    let last = chars[chars.len() - 1];
    // undo consonant doubling: stirring -> stirr -> stir
    if chars.len() >= 2 && last == chars[chars.len() - 2] && !is_vowel(last) && last != 's' && last != 'l' {
        return Some(stem[..stem.len() - 1].to_string());
    }
    if ends_cvc(stem) {
        return Some(format!("{stem}e"));
    }
    Some(stem.to_string())
}

/// Lemmatize a single lowercase word. Unknown words pass through unchanged.
pub fn lemma(word: &str) -> String {
    let w = word.trim().to_lowercase();
    if w.is_empty() {
        return w;
    }
    if let Some(l) = IRREGULAR.get(w.as_str()) {
        return (*l).to_string();
    }
    if let Some(stem) = w.strip_suffix("ies") {
        if stem.len() >= 2 {
            return format!("{stem}y");
        }
    }
    for suffix in ["ing", "ed"] {
        if w.ends_with(suffix) {
            if let Some(l) = strip_inflection(&w, suffix) {
                return l;
            }
        }
    }
    if let Some(stem) = w.strip_suffix("es") {
        if stem.ends_with("ss")
            || stem.ends_with('x')
            || stem.ends_with('z')
            || stem.ends_with("ch")
            || stem.ends_with("sh")
            || stem.ends_with('o')
        {
            return stem.to_string();
        }
    }
    if w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && w.len() > 2 {
        return w[..w.len() - 1].to_string();
    }
    w
}

const ARTICLES: &[&str] = &["the", "a", "an", "some", "your"];

/// Drop leading articles/determiners from a noun phrase: "the eggs" -> "eggs".
pub fn strip_articles(phrase: &str) -> &str {
    let mut rest = phrase.trim();
    loop {
        let mut advanced = false;
        for art in ARTICLES {
            if let Some(tail) = rest.strip_prefix(art) {
                if tail.starts_with(char::is_whitespace) {
                    rest = tail.trim_start();
                    advanced = true;
                    break;
                }
            }
        }
        if !advanced {
            return rest;
        }
    }
}

/// Lemma of the head noun of a noun phrase, taken as its last alphabetic token:
/// "the chicken broth" -> "broth".
pub fn head_noun_lemma(phrase: &str) -> Option<String> {
    let stripped = strip_articles(&phrase.to_lowercase());
    stripped
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && t.chars().any(|c| c.is_alphabetic()))
        .next_back()
        .map(lemma)
}

/// Normalize a free-text condition into a snake_case identifier usable as an
/// atomic proposition: "the water is boiling" -> "water_is_boiling".
pub fn normalize_condition(text: &str) -> String {
    let stripped = strip_articles(&text.trim().to_lowercase());
    let mut out = String::with_capacity(stripped.len());
    let mut last_sep = true;
    for c in stripped.chars() {
        if c.is_alphanumeric() {
            out.push(c);
            last_sep = false;
        } else if !last_sep {
            out.push('_');
            last_sep = true;
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}

/// Ground a surface argument for use in a primitive call: lowercase and strip
/// articles, otherwise verbatim.
pub fn ground_argument(text: &str) -> String {
    strip_articles(&text.trim().to_lowercase()).to_string()
}

/// Render a grounded argument as a pythonic identifier for prompt signatures.
pub fn identifier(text: &str) -> String {
    normalize_condition(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_plurals() {
        assert_eq!(lemma("eggs"), "egg");
        assert_eq!(lemma("tomatoes"), "tomato");
        assert_eq!(lemma("dishes"), "dish");
        assert_eq!(lemma("berries"), "berry");
        assert_eq!(lemma("apple"), "apple");
    }

    #[test]
    fn lemma_verb_forms() {
        assert_eq!(lemma("stirring"), "stir");
        assert_eq!(lemma("chopped"), "chop");
        assert_eq!(lemma("baking"), "bake");
        assert_eq!(lemma("grated"), "grate");
        assert_eq!(lemma("mixed"), "mix");
        assert_eq!(lemma("boiling"), "boil");
        assert_eq!(lemma("refrigerate"), "refrigerate");
    }

    #[test]
    fn articles_and_heads() {
        assert_eq!(strip_articles("the eggs"), "eggs");
        assert_eq!(strip_articles("an apple"), "apple");
        assert_eq!(head_noun_lemma("the chicken broth").as_deref(), Some("broth"));
        assert_eq!(head_noun_lemma("the eggs").as_deref(), Some("egg"));
        assert_eq!(head_noun_lemma("   ").as_deref(), None);
    }

    #[test]
    fn condition_normalization() {
        assert_eq!(normalize_condition("the water is boiling"), "water_is_boiling");
        assert_eq!(normalize_condition("water boiling"), "water_boiling");
        assert_eq!(normalize_condition("golden brown"), "golden_brown");
        assert_eq!(normalize_condition("10 minutes"), "10_minutes");
    }
}
