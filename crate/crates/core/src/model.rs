//! Shared domain vocabulary: recipes, instruction steps, salient categories,
//! action descriptions, primitive action schemas, and grounded primitive calls.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morph;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),
    #[error("invalid action literal `{literal}`: {reason}")]
    InvalidActionLiteral { literal: String, reason: String },
    #[error("invalid primitive set config: {0}")]
    InvalidPrimitiveConfig(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Whether a step carries the raw recipe text or the preprocessed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Raw,
    Preprocessed,
}

/// One imperative sentence of a recipe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionStep {
    /// 1-based ordinal within the recipe.
    pub index: usize,
    pub text: String,
    pub provenance: Provenance,
    /// Set when zero-anaphora resolution needed an implicit object but the
    /// focus stack was empty.
    #[serde(default)]
    pub unresolved: bool,
}

impl InstructionStep {
    pub fn raw(index: usize, text: impl Into<String>) -> Self {
        InstructionStep { index, text: text.into(), provenance: Provenance::Raw, unresolved: false }
    }

    pub fn preprocessed(index: usize, text: impl Into<String>) -> Self {
        InstructionStep {
            index,
            text: text.into(),
            provenance: Provenance::Preprocessed,
            unresolved: false,
        }
    }
}

/// A recipe: an id, a title, ingredients, and an ordered list of steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recipe {
    pub id: String,
    pub title: String,
    pub ingredients: Vec<String>,
    pub steps: Vec<InstructionStep>,
}

/// Wire form of a recipe: steps are plain strings.
#[derive(Debug, Serialize, Deserialize)]
struct RecipeDoc {
    id: String,
    title: String,
    #[serde(default)]
    ingredients: Vec<String>,
    steps: Vec<String>,
}

impl Recipe {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        ingredients: Vec<String>,
        steps: Vec<String>,
    ) -> Result<Self, ModelError> {
        if steps.is_empty() {
            return Err(ModelError::InvalidRecipe("recipe has no steps".into()));
        }
        Ok(Recipe {
            id: id.into(),
            title: title.into(),
            ingredients,
            steps: steps
                .into_iter()
                .enumerate()
                .map(|(i, text)| InstructionStep::raw(i + 1, text))
                .collect(),
        })
    }

    pub fn from_json(json: &str) -> Result<Self, ModelError> {
        let doc: RecipeDoc = serde_json::from_str(json)?;
        Recipe::new(doc.id, doc.title, doc.ingredients, doc.steps)
    }

    /// Plain-text input: one step per line, blank lines ignored.
    pub fn from_plain_text(id: impl Into<String>, text: &str) -> Result<Self, ModelError> {
        let steps: Vec<String> =
            text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
        Recipe::new(id, "untitled", Vec::new(), steps)
    }

    pub fn to_json(&self) -> String {
        let doc = RecipeDoc {
            id: self.id.clone(),
            title: self.title.clone(),
            ingredients: self.ingredients.clone(),
            steps: self.steps.iter().map(|s| s.text.clone()).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("recipe serializes")
    }
}

/// The six salient categories a cooking action is described by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SalientCategory {
    Verb,
    What,
    Where,
    How,
    Time,
    Temperature,
}

impl SalientCategory {
    pub const ALL: [SalientCategory; 6] = [
        SalientCategory::Verb,
        SalientCategory::What,
        SalientCategory::Where,
        SalientCategory::How,
        SalientCategory::Time,
        SalientCategory::Temperature,
    ];

    pub fn parse(label: &str) -> Option<Self> {
        match label.to_lowercase().as_str() {
            "verb" => Some(SalientCategory::Verb),
            "what" => Some(SalientCategory::What),
            "where" => Some(SalientCategory::Where),
            "how" => Some(SalientCategory::How),
            "time" => Some(SalientCategory::Time),
            "temperature" | "temp" => Some(SalientCategory::Temperature),
            _ => None,
        }
    }
}

impl fmt::Display for SalientCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SalientCategory::Verb => "Verb",
            SalientCategory::What => "What",
            SalientCategory::Where => "Where",
            SalientCategory::How => "How",
            SalientCategory::Time => "Time",
            SalientCategory::Temperature => "Temperature",
        };
        f.write_str(s)
    }
}

/// A tagged substring of a step, with byte offsets into the step text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub category: SalientCategory,
    pub text: String,
    pub span: (usize, usize),
}

impl Chunk {
    pub fn new(category: SalientCategory, text: impl Into<String>, span: (usize, usize)) -> Self {
        Chunk { category, text: text.into(), span }
    }
}

/// How a Time expression sequences the surrounding actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sequencer {
    Until,
    Before,
    Once,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeKind {
    Duration,
    Condition,
}

/// A parsed Time expression: either a duration or a sequencing condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSpec {
    pub raw: String,
    pub kind: TimeKind,
    pub sequencer: Option<Sequencer>,
    pub payload: String,
}

impl TimeSpec {
    /// Classify a raw time expression. Deterministic, so re-reading a rendered
    /// action yields the identical TimeSpec.
    pub fn from_raw(raw: &str) -> Self {
        let raw = raw.trim().to_string();
        let lower = raw.to_lowercase();
        let mappings: [(&str, Sequencer); 7] = [
            ("until ", Sequencer::Until),
            ("till ", Sequencer::Until),
            ("before ", Sequencer::Before),
            ("once ", Sequencer::Once),
            ("after ", Sequencer::Once),
            ("when ", Sequencer::Once),
            ("as soon as ", Sequencer::Once),
        ];
        for (cue, seq) in mappings {
            if let Some(rest) = lower.strip_prefix(cue) {
                let payload_start = raw.len() - rest.len();
                return TimeSpec {
                    raw: raw.clone(),
                    kind: TimeKind::Condition,
                    sequencer: Some(seq),
                    payload: raw[payload_start..].trim().to_string(),
                };
            }
        }
        let payload = lower
            .strip_prefix("for ")
            .map(|rest| raw[raw.len() - rest.len()..].trim().to_string())
            .unwrap_or_else(|| raw.clone());
        TimeSpec { raw, kind: TimeKind::Duration, sequencer: None, payload }
    }
}

/// The function representation of one detected action:
/// `verb(What?, Where?, How?, Time, Temperature)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDescription {
    /// Lowercase lemma of the main verb.
    pub verb: String,
    pub what: Option<String>,
    #[serde(rename = "where")]
    pub where_: Option<String>,
    pub how: Option<String>,
    pub time: Option<TimeSpec>,
    pub temperature: Option<String>,
    /// 1-based index of the step this action came from.
    pub source_step: usize,
    /// 0-based position among the step's actions, increasing with text order.
    pub ordinal_in_step: usize,
}

impl ActionDescription {
    pub fn new(verb: impl Into<String>) -> Self {
        ActionDescription {
            verb: morph::lemma(&verb.into()),
            what: None,
            where_: None,
            how: None,
            time: None,
            temperature: None,
            source_step: 0,
            ordinal_in_step: 0,
        }
    }

    pub fn with_what(mut self, what: impl Into<String>) -> Self {
        self.what = Some(what.into());
        self
    }

    pub fn with_where(mut self, where_: impl Into<String>) -> Self {
        self.where_ = Some(where_.into());
        self
    }

    pub fn with_how(mut self, how: impl Into<String>) -> Self {
        self.how = Some(how.into());
        self
    }

    pub fn with_time_raw(mut self, raw: &str) -> Self {
        self.time = Some(TimeSpec::from_raw(raw));
        self
    }

    pub fn with_temperature(mut self, t: impl Into<String>) -> Self {
        self.temperature = Some(t.into());
        self
    }

    /// Render as a function-call string with named parameters, absent ones
    /// omitted: `boil(what=the eggs, time=until the water is boiling)`.
    pub fn render_call(&self) -> String {
        let mut params = Vec::new();
        if let Some(v) = &self.what {
            params.push(format!("what={v}"));
        }
        if let Some(v) = &self.where_ {
            params.push(format!("where={v}"));
        }
        if let Some(v) = &self.how {
            params.push(format!("how={v}"));
        }
        if let Some(t) = &self.time {
            params.push(format!("time={}", t.raw));
        }
        if let Some(v) = &self.temperature {
            params.push(format!("temperature={v}"));
        }
        format!("{}({})", self.verb, params.join(", "))
    }

    /// Inverse of [`render_call`](Self::render_call). Also accepts positional
    /// arguments, filled in category order (what, where, how, time,
    /// temperature): `boil(eggs)` means `boil(what=eggs)`.
    pub fn parse_call(literal: &str) -> Result<Self, ModelError> {
        let literal = literal.trim();
        let err = |reason: &str| ModelError::InvalidActionLiteral {
            literal: literal.to_string(),
            reason: reason.to_string(),
        };
        let open = literal.find('(').ok_or_else(|| err("missing `(`"))?;
        if !literal.ends_with(')') {
            return Err(err("missing trailing `)`"));
        }
        let verb = literal[..open].trim();
        if verb.is_empty() {
            return Err(err("empty verb"));
        }
        let body = &literal[open + 1..literal.len() - 1];
        let mut action = ActionDescription::new(verb);
        let positional_order = ["what", "where", "how", "time", "temperature"];
        let mut next_positional = 0usize;
        for piece in body.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let (key, value) = match piece.split_once('=') {
                Some((k, v)) => (k.trim().to_lowercase(), v.trim()),
                None => {
                    if next_positional >= positional_order.len() {
                        return Err(err("too many positional arguments"));
                    }
                    let k = positional_order[next_positional].to_string();
                    next_positional += 1;
                    (k, piece)
                }
            };
            match key.as_str() {
                "what" => action.what = Some(value.to_string()),
                "where" => action.where_ = Some(value.to_string()),
                "how" => action.how = Some(value.to_string()),
                "time" => action.time = Some(TimeSpec::from_raw(value)),
                "temperature" => action.temperature = Some(value.to_string()),
                other => return Err(err(&format!("unknown parameter `{other}`"))),
            }
        }
        Ok(action)
    }
}

impl fmt::Display for ActionDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_call())
    }
}

/// Schema of one robot-executable primitive action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveSchema {
    pub name: String,
    pub param_roles: Vec<String>,
}

impl PrimitiveSchema {
    pub fn new(name: &str, param_roles: &[&str]) -> Self {
        PrimitiveSchema {
            name: name.to_string(),
            param_roles: param_roles.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.param_roles.len()
    }
}

/// The set of primitive actions the robot can execute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveSet {
    schemas: Vec<PrimitiveSchema>,
    by_name: HashMap<String, usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PrimitiveSetDoc {
    actions: Vec<PrimitiveSetEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PrimitiveSetEntry {
    name: String,
    params: Vec<String>,
}

impl PrimitiveSet {
    pub fn new(schemas: Vec<PrimitiveSchema>) -> Result<Self, ModelError> {
        let mut by_name = HashMap::new();
        for (i, schema) in schemas.iter().enumerate() {
            if by_name.insert(schema.name.clone(), i).is_some() {
                return Err(ModelError::InvalidPrimitiveConfig(format!(
                    "duplicate primitive name `{}`",
                    schema.name
                )));
            }
        }
        Ok(PrimitiveSet { schemas, by_name })
    }

    /// Load a set from the `{"actions":[{"name":...,"params":[...]}]}` config.
    pub fn from_json(json: &str) -> Result<Self, ModelError> {
        let doc: PrimitiveSetDoc = serde_json::from_str(json)?;
        PrimitiveSet::new(
            doc.actions
                .into_iter()
                .map(|e| PrimitiveSchema { name: e.name, param_roles: e.params })
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let doc = PrimitiveSetDoc {
            actions: self
                .schemas
                .iter()
                .map(|s| PrimitiveSetEntry { name: s.name.clone(), params: s.param_roles.clone() })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("primitive set serializes")
    }

    pub fn schemas(&self) -> &[PrimitiveSchema] {
        &self.schemas
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    /// Case-sensitive schema lookup.
    pub fn get(&self, name: &str) -> Option<&PrimitiveSchema> {
        self.by_name.get(name).map(|&i| &self.schemas[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    /// Schema whose lowercase name equals the given verb lemma, if any. This
    /// is the membership test behind the identity short-circuit.
    pub fn schema_for_verb(&self, verb: &str) -> Option<&PrimitiveSchema> {
        self.schemas.iter().find(|s| s.name.to_lowercase() == verb)
    }

    /// True iff the call names a schema in this set and matches its arity.
    pub fn is_admissible(&self, call: &PrimitiveCall) -> bool {
        match self.get(&call.name) {
            Some(schema) => schema.arity() == call.args.len(),
            None => false,
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.schemas.iter().map(|s| s.name.as_str())
    }
}

/// The default 12-schema primitive set. The admissible set is configurable at
/// load time; this one covers a household kitchen manipulator.
pub fn default_primitive_set() -> PrimitiveSet {
    PrimitiveSet::new(vec![
        PrimitiveSchema::new("GoTo", &["target"]),
        PrimitiveSchema::new("PickUp", &["object"]),
        PrimitiveSchema::new("PutOn", &["object", "surface"]),
        PrimitiveSchema::new("PutIn", &["object", "container"]),
        PrimitiveSchema::new("OpenObject", &["object"]),
        PrimitiveSchema::new("CloseObject", &["object"]),
        PrimitiveSchema::new("ToggleOn", &["appliance"]),
        PrimitiveSchema::new("ToggleOff", &["appliance"]),
        PrimitiveSchema::new("SliceObject", &["object"]),
        PrimitiveSchema::new("BreakObject", &["object"]),
        PrimitiveSchema::new("PourInto", &["source", "destination"]),
        PrimitiveSchema::new("Wait", &["condition"]),
    ])
    .expect("default set has unique names")
}

/// A grounded call to one primitive (or cached) action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimitiveCall {
    pub name: String,
    pub args: Vec<String>,
}

impl PrimitiveCall {
    pub fn new(name: impl Into<String>, args: &[&str]) -> Self {
        PrimitiveCall { name: name.into(), args: args.iter().map(|s| s.to_string()).collect() }
    }

    /// `Name(arg1, arg2)`, or the bare name for zero-argument calls.
    pub fn render(&self) -> String {
        if self.args.is_empty() {
            self.name.clone()
        } else {
            format!("{}({})", self.name, self.args.join(", "))
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        let open = match text.find('(') {
            Some(i) => i,
            None => {
                return valid_name(text).then(|| PrimitiveCall { name: text.into(), args: vec![] })
            }
        };
        if !text.ends_with(')') {
            return None;
        }
        let name = text[..open].trim();
        if !valid_name(name) {
            return None;
        }
        let body = &text[open + 1..text.len() - 1];
        let args: Vec<String> = if body.trim().is_empty() {
            Vec::new()
        } else {
            body.split(',').map(|a| a.trim().trim_matches(|c| c == '"' || c == '\'').to_string()).collect()
        };
        if args.iter().any(|a| a.is_empty()) {
            return None;
        }
        Some(PrimitiveCall { name: name.to_string(), args })
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.chars().next().map(|c| c.is_alphabetic() || c == '_').unwrap_or(false)
        && name.chars().all(|c| c.is_alphanumeric() || c == '_')
}

impl fmt::Display for PrimitiveCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Where a reduction policy came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyOrigin {
    /// The action is itself primitive; the policy is the one-call identity.
    Identity,
    /// Generated by the LLM during this run.
    Llm,
    /// Served from the action library cache.
    Library,
    /// Shipped in a seed library file.
    Seed,
}

/// An ordered sequence of primitive calls realizing one high-level action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionPolicy {
    pub key: String,
    pub calls: Vec<PrimitiveCall>,
    pub origin: PolicyOrigin,
}

impl ReductionPolicy {
    pub fn new(key: impl Into<String>, calls: Vec<PrimitiveCall>, origin: PolicyOrigin) -> Self {
        ReductionPolicy { key: key.into(), calls, origin }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_set_contents() {
        let set = default_primitive_set();
        assert_eq!(set.len(), 12);
        let names: Vec<&str> = set.names().collect();
        let unique: std::collections::HashSet<&&str> = names.iter().collect();
        assert_eq!(unique.len(), 12);
        assert_eq!(set.get("Wait").map(|s| s.arity()), Some(1));
        assert!(set.contains("SliceObject"));
        assert!(!set.contains("Marinate"));
        // membership is case-sensitive
        assert!(!set.contains("sliceobject"));
    }

    #[test]
    fn admissibility() {
        let set = default_primitive_set();
        assert!(set.is_admissible(&PrimitiveCall::new("Wait", &["water boiling"])));
        assert!(!set.is_admissible(&PrimitiveCall::new("Marinate", &["chicken"])));
        // arity mismatch: PutIn takes two arguments
        assert!(!set.is_admissible(&PrimitiveCall::new("PutIn", &["apple"])));
    }

    #[test]
    fn action_render_parse_round_trip() {
        let action = ActionDescription::new("boil")
            .with_what("the eggs")
            .with_time_raw("until the water is boiling");
        let rendered = action.render_call();
        assert_eq!(rendered, "boil(what=the eggs, time=until the water is boiling)");
        let back = ActionDescription::parse_call(&rendered).unwrap();
        assert_eq!(back.verb, action.verb);
        assert_eq!(back.what, action.what);
        assert_eq!(back.time, action.time);
    }

    #[test]
    fn action_parse_positional() {
        let action = ActionDescription::parse_call("boil(eggs)").unwrap();
        assert_eq!(action.verb, "boil");
        assert_eq!(action.what.as_deref(), Some("eggs"));
        assert!(ActionDescription::parse_call("boil eggs").is_err());
        assert!(ActionDescription::parse_call("(eggs)").is_err());
    }

    #[test]
    fn time_spec_classification() {
        let t = TimeSpec::from_raw("until the water is boiling");
        assert_eq!(t.kind, TimeKind::Condition);
        assert_eq!(t.sequencer, Some(Sequencer::Until));
        assert_eq!(t.payload, "the water is boiling");

        let t = TimeSpec::from_raw("for 10 minutes");
        assert_eq!(t.kind, TimeKind::Duration);
        assert_eq!(t.sequencer, None);
        assert_eq!(t.payload, "10 minutes");

        let t = TimeSpec::from_raw("before serving");
        assert_eq!(t.sequencer, Some(Sequencer::Before));
    }

    #[test]
    fn recipe_wire_format() {
        let json = r#"{"id":"r1","title":"Toast","ingredients":["bread"],"steps":["Toast the bread.","Serve warm."]}"#;
        let recipe = Recipe::from_json(json).unwrap();
        assert_eq!(recipe.steps.len(), 2);
        assert_eq!(recipe.steps[0].index, 1);
        assert_eq!(recipe.steps[1].index, 2);
        assert!(Recipe::from_json(r#"{"id":"x","title":"y","ingredients":[],"steps":[]}"#).is_err());
    }

    #[test]
    fn primitive_call_render_parse() {
        let call = PrimitiveCall::new("PutIn", &["apple", "fridge"]);
        assert_eq!(call.render(), "PutIn(apple, fridge)");
        assert_eq!(PrimitiveCall::parse("PutIn(apple, fridge)").unwrap(), call);
        assert_eq!(
            PrimitiveCall::parse("water_boiling").unwrap(),
            PrimitiveCall { name: "water_boiling".into(), args: vec![] }
        );
        assert!(PrimitiveCall::parse("3bad(x)").is_none());
    }
}
