//! Preprocessing: sentence segmentation of raw steps and heuristic
//! zero-anaphora resolution (filling implicit direct objects).

use std::collections::VecDeque;

use crate::lexicon::{tokenize, CategoryLexicon, Token};
use crate::model::{InstructionStep, SalientCategory};
use crate::morph;

const ABBREVIATIONS: &[&str] = &[
    "min", "mins", "hr", "hrs", "sec", "secs", "tbsp", "tsp", "oz", "lb", "lbs", "approx", "etc",
    "vs", "pkg", "qt", "pt",
];

/// Split raw recipe text into one step per sentence.
///
/// Boundaries are `.`, `!`, and `;` outside parentheses. A period inside a
/// decimal number, after a leading list marker ("1."), or after a known
/// abbreviation followed by a lowercase continuation is not a boundary.
pub fn segment_steps(raw: &str) -> Vec<InstructionStep> {
    let mut sentences: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut depth: i32 = 0;
    let chars: Vec<(usize, char)> = raw.char_indices().collect();

    for (k, &(_, c)) in chars.iter().enumerate() {
        match c {
            '(' | '[' => {
                depth += 1;
                current.push(c);
            }
            ')' | ']' => {
                depth = (depth - 1).max(0);
                current.push(c);
            }
            '.' if depth == 0 => {
                let prev = k.checked_sub(1).map(|i| chars[i].1);
                let next = chars.get(k + 1).map(|&(_, ch)| ch);
                let next_word_char = next_non_space(&chars, k + 1);
                let decimal = prev.map(|p| p.is_ascii_digit()).unwrap_or(false)
                    && next.map(|n| n.is_ascii_digit()).unwrap_or(false);
                let list_marker = !current.trim().is_empty()
                    && current.trim().chars().all(|ch| ch.is_ascii_digit());
                let abbreviation = trailing_word(&current)
                    .map(|w| ABBREVIATIONS.contains(&w.to_lowercase().as_str()))
                    .unwrap_or(false)
                    && next_word_char.map(|n| n.is_lowercase()).unwrap_or(false);
                if decimal || list_marker || abbreviation {
                    current.push(c);
                } else {
                    sentences.push(std::mem::take(&mut current));
                }
            }
            '!' | ';' if depth == 0 => {
                sentences.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        sentences.push(current);
    }

    sentences
        .into_iter()
        .map(|s| strip_list_marker(s.trim()).to_string())
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, text)| InstructionStep::preprocessed(i + 1, text))
        .collect()
}

fn next_non_space(chars: &[(usize, char)], from: usize) -> Option<char> {
    chars[from..].iter().map(|&(_, c)| c).find(|c| !c.is_whitespace())
}

fn trailing_word(s: &str) -> Option<&str> {
    s.trim_end().rsplit(|c: char| !c.is_alphanumeric()).next().filter(|w| !w.is_empty())
}

fn strip_list_marker(s: &str) -> &str {
    let trimmed = s.trim_start();
    let digits = trimmed.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &trimmed[digits..];
        if let Some(after) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            if after.starts_with(char::is_whitespace) {
                return after.trim_start();
            }
        }
    }
    trimmed
}

/// One remembered discourse entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FocusEntry {
    pub entity: String,
    pub step_index: usize,
    pub role: SalientCategory,
}

/// Recency stack of entities available for implicit-object resolution.
/// What entities always outrank Where entities.
#[derive(Debug, Clone)]
pub struct FocusStack {
    whats: VecDeque<FocusEntry>,
    wheres: VecDeque<FocusEntry>,
    depth: usize,
}

impl Default for FocusStack {
    fn default() -> Self {
        FocusStack::new(8)
    }
}

impl FocusStack {
    pub fn new(depth: usize) -> Self {
        FocusStack { whats: VecDeque::new(), wheres: VecDeque::new(), depth }
    }

    pub fn push_what(&mut self, entity: &str, step_index: usize) {
        self.push(SalientCategory::What, entity, step_index);
    }

    pub fn push_where(&mut self, entity: &str, step_index: usize) {
        self.push(SalientCategory::Where, entity, step_index);
    }

    fn push(&mut self, role: SalientCategory, entity: &str, step_index: usize) {
        let entity = entity.trim();
        if entity.is_empty() {
            return;
        }
        let tier = if role == SalientCategory::What { &mut self.whats } else { &mut self.wheres };
        tier.push_front(FocusEntry { entity: entity.to_string(), step_index, role });
        tier.truncate(self.depth);
    }

    /// Most salient entity: most recent What, else most recent Where.
    pub fn top(&self) -> Option<&str> {
        self.whats
            .front()
            .or_else(|| self.wheres.front())
            .map(|e| e.entity.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = &FocusEntry> {
        self.whats.iter().chain(self.wheres.iter())
    }

    pub fn is_empty(&self) -> bool {
        self.whats.is_empty() && self.wheres.is_empty()
    }
}

/// Fill in implicit direct objects: a step whose first verb has no object
/// noun phrase before the first preposition, adverb, sequencer, or sentence
/// end receives the most recently mentioned entity. Tokens are never deleted
/// or reordered; at most one noun phrase is inserted after the head verb.
pub fn resolve_zero_anaphora(
    steps: &[InstructionStep],
    stack: &mut FocusStack,
    lexicon: &CategoryLexicon,
) -> Vec<InstructionStep> {
    steps.iter().map(|step| resolve_step(step, stack, lexicon)).collect()
}

fn resolve_step(
    step: &InstructionStep,
    stack: &mut FocusStack,
    lexicon: &CategoryLexicon,
) -> InstructionStep {
    let tokens = tokenize(&step.text);
    let analysis = match analyze(&tokens, lexicon) {
        Some(a) => a,
        None => return step.clone(),
    };

    let mut out = step.clone();
    out.provenance = crate::model::Provenance::Preprocessed;

    if analysis.negated {
        // never guess an object for a prohibition
        push_entities(&analysis, step.index, stack);
        return out;
    }

    match (&analysis.object, lexicon.is_intransitive(&analysis.verb_lemma)) {
        (Some(_), _) | (None, true) => {
            push_entities(&analysis, step.index, stack);
        }
        (None, false) => match stack.top() {
            Some(entity) => {
                let insert_at = analysis.verb_end;
                let mut text = step.text.clone();
                text.insert_str(insert_at, &format!(" {entity}"));
                out.text = text;
                // the inserted entity stays where it was in the stack
                push_where_only(&analysis, step.index, stack);
            }
            None => {
                out.unresolved = true;
            }
        },
    }
    out
}

struct StepAnalysis {
    verb_lemma: String,
    verb_end: usize,
    negated: bool,
    object: Option<String>,
    where_entity: Option<String>,
}

fn push_entities(analysis: &StepAnalysis, step_index: usize, stack: &mut FocusStack) {
    if let Some(w) = &analysis.where_entity {
        stack.push_where(w, step_index);
    }
    if let Some(o) = &analysis.object {
        stack.push_what(o, step_index);
    }
}

fn push_where_only(analysis: &StepAnalysis, step_index: usize, stack: &mut FocusStack) {
    if let Some(w) = &analysis.where_entity {
        stack.push_where(w, step_index);
    }
}

/// Locate the head verb, its explicit object NP (if any), and the first
/// Where NP.
fn analyze(tokens: &[Token], lexicon: &CategoryLexicon) -> Option<StepAnalysis> {
    let words: Vec<(usize, &Token)> =
        tokens.iter().enumerate().filter(|(_, t)| t.is_word()).collect();
    let (mut vi, _) = *words.first()?;

    let mut negated = false;
    if matches!(tokens[vi].lower.as_str(), "do" | "don't" | "never") {
        negated = true;
        // skip do-support and the negator itself
        let mut next = words.iter().skip(1).map(|&(i, _)| i);
        vi = next.next()?;
        if tokens[vi].lower == "not" {
            vi = next.next()?;
        }
    }
    let verb = &tokens[vi];
    let verb_lemma = morph::lemma(&verb.lower);

    let mut object: Option<String> = None;
    let mut object_end = vi;
    let mut i = vi + 1;
    let mut np_start: Option<usize> = None;
    while i < tokens.len() {
        let t = &tokens[i];
        if !t.is_word() {
            break;
        }
        if lexicon.is_boundary_preposition(&t.lower)
            || lexicon.is_adverb(&t.lower)
            || lexicon.sequencer_at(tokens, i).is_some()
            || lexicon.is_temporal(&t.lower)
            || matches!(t.lower.as_str(), "and" | "or" | "then")
        {
            break;
        }
        if np_start.is_none() {
            np_start = Some(i);
        }
        object_end = i;
        i += 1;
    }
    if let Some(s) = np_start {
        let span = (tokens[s].start, tokens[object_end].end);
        object = Some(text_between(tokens, span));
    }

    // first Where NP after the object region
    let mut where_entity = None;
    let mut j = object_end.max(vi) + 1;
    while j < tokens.len() {
        let t = &tokens[j];
        if t.is_word() && lexicon.is_where_preposition(&t.lower) {
            let (np, _) = noun_phrase_after(tokens, j + 1, lexicon);
            if let Some(np) = np {
                where_entity = Some(np);
                break;
            }
        }
        j += 1;
    }

    Some(StepAnalysis { verb_lemma, verb_end: verb.end, negated, object, where_entity })
}

/// Collect the noun phrase starting at token `from`, stopping at punctuation,
/// prepositions, or cue words. Returns the phrase and the index past its end.
pub(crate) fn noun_phrase_after(
    tokens: &[Token],
    from: usize,
    lexicon: &CategoryLexicon,
) -> (Option<String>, usize) {
    let mut end = None;
    let mut i = from;
    while i < tokens.len() {
        let t = &tokens[i];
        if !t.is_word()
            || lexicon.is_boundary_preposition(&t.lower)
            || lexicon.sequencer_at(tokens, i).is_some()
            || lexicon.is_temporal(&t.lower)
            || matches!(t.lower.as_str(), "and" | "or" | "then")
        {
            break;
        }
        end = Some(i);
        i += 1;
    }
    match end {
        Some(e) => (Some(text_between(tokens, (tokens[from].start, tokens[e].end))), e + 1),
        None => (None, from),
    }
}

fn text_between(tokens: &[Token], span: (usize, usize)) -> String {
    let mut parts = Vec::new();
    for t in tokens {
        if t.start >= span.0 && t.end <= span.1 {
            parts.push(t.text.as_str());
        }
    }
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(steps: &[InstructionStep]) -> Vec<&str> {
        steps.iter().map(|s| s.text.as_str()).collect()
    }

    #[test]
    fn segments_two_sentences() {
        let steps = segment_steps("Preheat oven to 350F. Grease a pan.");
        assert_eq!(texts(&steps), vec!["Preheat oven to 350F", "Grease a pan"]);
        assert_eq!(steps[0].index, 1);
        assert_eq!(steps[1].index, 2);
    }

    #[test]
    fn segments_on_semicolon() {
        let steps = segment_steps("Bake for 25 min; cool on rack.");
        assert_eq!(texts(&steps), vec!["Bake for 25 min", "cool on rack"]);
    }

    #[test]
    fn empty_input_gives_no_steps() {
        assert!(segment_steps("").is_empty());
        assert!(segment_steps("   \n ").is_empty());
    }

    #[test]
    fn decimals_and_list_markers_are_not_boundaries() {
        let steps = segment_steps("1. Add 2.5 cups of flour. Mix well.");
        assert_eq!(texts(&steps), vec!["Add 2.5 cups of flour", "Mix well"]);
    }

    #[test]
    fn parenthesized_periods_are_not_boundaries() {
        let steps = segment_steps("Core the apples (approx. 4 min. each). Slice thinly.");
        assert_eq!(steps.len(), 2);
        assert!(steps[0].text.contains("approx. 4 min."));
    }

    #[test]
    fn abbreviation_followed_by_lowercase_is_not_a_boundary() {
        let steps = segment_steps("Simmer 10 min. then remove from heat.");
        assert_eq!(texts(&steps), vec!["Simmer 10 min. then remove from heat"]);
    }

    #[test]
    fn carries_object_forward() {
        let lex = CategoryLexicon::embedded();
        let steps = vec![
            InstructionStep::raw(1, "Place the chicken in the pan."),
            InstructionStep::raw(2, "Cook for 10 minutes."),
        ];
        let mut stack = FocusStack::default();
        let resolved = resolve_zero_anaphora(&steps, &mut stack, &lex);
        assert_eq!(resolved[0].text, "Place the chicken in the pan.");
        assert_eq!(resolved[1].text, "Cook the chicken for 10 minutes.");
        assert!(!resolved[1].unresolved);
    }

    #[test]
    fn empty_stack_flags_step() {
        let lex = CategoryLexicon::embedded();
        let steps = vec![InstructionStep::raw(1, "Stir.")];
        let mut stack = FocusStack::default();
        let resolved = resolve_zero_anaphora(&steps, &mut stack, &lex);
        assert_eq!(resolved[0].text, "Stir.");
        assert!(resolved[0].unresolved);
    }

    #[test]
    fn what_outranks_where_across_steps() {
        let lex = CategoryLexicon::embedded();
        let steps = vec![
            InstructionStep::raw(1, "Chop the onion."),
            InstructionStep::raw(2, "Add to the pot."),
            InstructionStep::raw(3, "Simmer."),
        ];
        let mut stack = FocusStack::default();
        let resolved = resolve_zero_anaphora(&steps, &mut stack, &lex);
        assert_eq!(resolved[1].text, "Add the onion to the pot.");
        assert_eq!(resolved[2].text, "Simmer the onion.");
    }

    #[test]
    fn resolution_is_idempotent_and_preserves_count() {
        let lex = CategoryLexicon::embedded();
        let steps = vec![
            InstructionStep::raw(1, "Chop the onion."),
            InstructionStep::raw(2, "Add to the pot."),
            InstructionStep::raw(3, "Wait for 10 minutes."),
            InstructionStep::raw(4, "Do not overmix."),
        ];
        let once = resolve_zero_anaphora(&steps, &mut FocusStack::default(), &lex);
        let twice = resolve_zero_anaphora(&once, &mut FocusStack::default(), &lex);
        assert_eq!(once.len(), steps.len());
        assert_eq!(texts(&once), texts(&twice));
        // intransitive and negated steps pass through untouched
        assert_eq!(once[2].text, "Wait for 10 minutes.");
        assert_eq!(once[3].text, "Do not overmix.");
    }
}
