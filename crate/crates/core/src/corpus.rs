//! Review ingestion, filtering, score labeling and class balancing.
//!
//! Input records are JSONL objects or CSV rows with the columns `id`, `text`,
//! `score` and optional `date`, `reviewer`, `location`, `trip_type`,
//! `hotel_id`. Any other column is carried through untouched.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use rand::seq::index;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::rng;
use crate::textpipe::Tokenizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScaleKind {
    FivePoint,
    TenPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreScale {
    pub kind: ScaleKind,
    pub min: f64,
    pub max: f64,
}

impl ScoreScale {
    /// Star ratings: integers 1 to 5.
    pub const FIVE_POINT: ScoreScale = ScoreScale {
        kind: ScaleKind::FivePoint,
        min: 1.0,
        max: 5.0,
    };
    /// Any number in \[0, 10\].
    pub const TEN_POINT: ScoreScale = ScoreScale {
        kind: ScaleKind::TenPoint,
        min: 0.0,
        max: 10.0,
    };

    pub fn name(&self) -> &'static str {
        match self.kind {
            ScaleKind::FivePoint => "five-point",
            ScaleKind::TenPoint => "ten-point",
        }
    }

    pub fn is_valid(&self, score: f64) -> bool {
        if !score.is_finite() || score < self.min || score > self.max {
            return false;
        }
        match self.kind {
            ScaleKind::FivePoint => score.fract() == 0.0,
            ScaleKind::TenPoint => true,
        }
    }

    pub fn validate(&self, score: f64) -> Result<f64> {
        if self.is_valid(score) {
            Ok(score)
        } else {
            Err(Error::InvalidScore {
                score,
                scale: self.name(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarityLabel {
    Positive,
    Negative,
}

impl PolarityLabel {
    pub const ALL: [PolarityLabel; 2] = [PolarityLabel::Positive, PolarityLabel::Negative];

    pub fn as_str(self) -> &'static str {
        match self {
            PolarityLabel::Positive => "positive",
            PolarityLabel::Negative => "negative",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            PolarityLabel::Positive => "pos",
            PolarityLabel::Negative => "neg",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            PolarityLabel::Positive => PolarityLabel::Negative,
            PolarityLabel::Negative => PolarityLabel::Positive,
        }
    }

    /// +1 for positive, -1 for negative.
    pub fn sign(self) -> f64 {
        match self {
            PolarityLabel::Positive => 1.0,
            PolarityLabel::Negative => -1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" => Some(PolarityLabel::Positive),
            "negative" | "neg" => Some(PolarityLabel::Negative),
            _ => None,
        }
    }
}

impl fmt::Display for PolarityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TripType {
    Family,
    Friends,
    Couple,
    SoloTraveler,
    Businessman,
}

impl TripType {
    pub fn parse(s: &str) -> Option<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "family" => Some(TripType::Family),
            "friends" => Some(TripType::Friends),
            "couple" => Some(TripType::Couple),
            "solotraveler" | "solo" => Some(TripType::SoloTraveler),
            "businessman" | "business" => Some(TripType::Businessman),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub text: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trip_type: Option<TripType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hotel_id: Option<String>,
    /// Unrecognized input fields, preserved verbatim.
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl Review {
    pub fn new(id: impl Into<String>, text: impl Into<String>, score: f64) -> Self {
        Review {
            id: id.into(),
            text: text.into(),
            score,
            date: None,
            reviewer: None,
            location: None,
            trip_type: None,
            hotel_id: None,
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    ScoreThreshold,
    Annotated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDocument {
    #[serde(flatten)]
    pub review: Review,
    pub label: PolarityLabel,
    pub label_source: LabelSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    /// CSV for `.csv` paths, JSONL otherwise.
    pub fn from_path(path: &str) -> Self {
        if path.to_ascii_lowercase().ends_with(".csv") {
            InputFormat::Csv
        } else {
            InputFormat::Jsonl
        }
    }
}

const KNOWN_FIELDS: [&str; 8] = ["id", "text", "score", "date", "reviewer", "location", "trip_type", "hotel_id"];

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn invalid(line: usize, message: impl Into<String>) -> Error {
    Error::Validation {
        line,
        message: message.into(),
    }
}

fn value_as_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn optional_string(fields: &Map<String, Value>, key: &str) -> Option<String> {
    fields
        .get(key)
        .and_then(value_as_string)
        .filter(|s| !s.trim().is_empty())
}

/// Builds a validated review from a field map (one JSON object or CSV row).
fn review_from_fields(mut fields: Map<String, Value>, scale: ScoreScale, line: usize) -> Result<Review> {
    let id = fields
        .get("id")
        .and_then(value_as_string)
        .ok_or_else(|| parse_err(line, "missing required field `id`"))?;
    let text = match fields.get("text") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(parse_err(line, "field `text` must be a string")),
        None => return Err(parse_err(line, "missing required field `text`")),
    };
    let score = match fields.get("score") {
        Some(Value::Number(n)) => n.as_f64().ok_or_else(|| parse_err(line, "unrepresentable score"))?,
        Some(Value::String(s)) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("score `{s}` is not a number")))?,
        Some(_) => return Err(parse_err(line, "field `score` must be a number")),
        None => return Err(parse_err(line, "missing required field `score`")),
    };
    if text.trim().is_empty() {
        return Err(invalid(line, "text is empty"));
    }
    scale
        .validate(score)
        .map_err(|e| invalid(line, e.to_string()))?;
    let date = match optional_string(&fields, "date") {
        Some(s) => Some(
            NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
                .map_err(|_| invalid(line, format!("date `{s}` is not YYYY-MM-DD")))?,
        ),
        None => None,
    };
    let trip_type = match optional_string(&fields, "trip_type") {
        Some(s) => Some(TripType::parse(&s).ok_or_else(|| invalid(line, format!("unknown trip_type `{s}`")))?),
        None => None,
    };
    let reviewer = optional_string(&fields, "reviewer");
    let location = optional_string(&fields, "location");
    let hotel_id = optional_string(&fields, "hotel_id");
    for key in KNOWN_FIELDS {
        fields.remove(key);
    }
    Ok(Review {
        id,
        text,
        score,
        date,
        reviewer,
        location,
        trip_type,
        hotel_id,
        extra: fields.into_iter().collect(),
    })
}

/// Parses one JSONL record. `line` is the 1-based input line for errors.
pub fn parse_review_record(record: &str, scale: ScoreScale, line: usize) -> Result<Review> {
    let value: Value = serde_json::from_str(record).map_err(|e| parse_err(line, e.to_string()))?;
    match value {
        Value::Object(fields) => review_from_fields(fields, scale, line),
        _ => Err(parse_err(line, "record is not a JSON object")),
    }
}

/// Moves `label`/`label_source` out of the review's extra fields.
fn into_labeled(mut review: Review, line: usize) -> Result<LabeledDocument> {
    let label = review
        .extra
        .remove("label")
        .ok_or_else(|| parse_err(line, "missing required field `label`"))?;
    let label = label
        .as_str()
        .and_then(PolarityLabel::parse)
        .ok_or_else(|| invalid(line, format!("label {label} is not positive/negative")))?;
    let label_source = match review.extra.remove("label_source") {
        None | Some(Value::Null) => LabelSource::Annotated,
        Some(Value::String(s)) if s.is_empty() => LabelSource::Annotated,
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|_| invalid(line, format!("unknown label_source {v}")))?,
    };
    Ok(LabeledDocument {
        review,
        label,
        label_source,
    })
}

fn read_jsonl(reader: impl BufRead, scale: ScoreScale) -> Result<Vec<Review>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| parse_err(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_review_record(&line, scale, line_no)?);
    }
    Ok(out)
}

fn read_csv(reader: impl BufRead, scale: ScoreScale) -> Result<Vec<Review>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // header occupies line 1
        let line_no = record
            .as_ref()
            .ok()
            .and_then(|r| r.position())
            .map_or(i + 2, |p| p.line() as usize);
        let record = record.map_err(|e| parse_err(line_no, e.to_string()))?;
        let fields: Map<String, Value> = headers
            .iter()
            .zip(record.iter())
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
            .collect();
        out.push(review_from_fields(fields, scale, line_no)?);
    }
    Ok(out)
}

pub fn read_reviews(reader: impl BufRead, format: InputFormat, scale: ScoreScale) -> Result<Vec<Review>> {
    match format {
        InputFormat::Jsonl => read_jsonl(reader, scale),
        InputFormat::Csv => read_csv(reader, scale),
    }
}

/// Reads a labeled corpus (requires a `label` field per record).
pub fn read_labeled(reader: impl BufRead, format: InputFormat, scale: ScoreScale) -> Result<Vec<LabeledDocument>> {
    // Labels sit in extra fields until split out; line numbers follow record order.
    let reviews = read_reviews(reader, format, scale)?;
    reviews
        .into_iter()
        .enumerate()
        .map(|(i, r)| into_labeled(r, i + 1))
        .collect()
}

pub fn write_jsonl<T: Serialize>(mut writer: impl Write, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

/// True iff the review has at least `min_words` tokenizer tokens.
pub fn word_count_filter(review: &Review, min_words: usize) -> bool {
    word_count_filter_with(review, min_words, &Tokenizer::default())
}

pub fn word_count_filter_with(review: &Review, min_words: usize, tokenizer: &Tokenizer) -> bool {
    let n = tokenizer.count(&review.text);
    n > 0 && n >= min_words
}

const FUNCTION_WORDS: &str = include_str!("../data/english_function_words.txt");
pub const DEFAULT_ENGLISH_THRESHOLD: f64 = 0.15;
const MIN_LANGUAGE_TOKENS: usize = 5;

/// Language filter: share of tokens that are English function words.
#[derive(Debug, Clone)]
pub struct EnglishDetector {
    words: std::collections::HashSet<&'static str>,
    pub threshold: f64,
}

impl Default for EnglishDetector {
    fn default() -> Self {
        Self::with_threshold(DEFAULT_ENGLISH_THRESHOLD)
    }
}

impl EnglishDetector {
    pub fn with_threshold(threshold: f64) -> Self {
        let words = FUNCTION_WORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        EnglishDetector { words, threshold }
    }

    /// `(accepted, ratio)`; texts under five tokens are rejected with ratio 0.
    pub fn detect(&self, text: &str) -> (bool, f64) {
        let tokens = Tokenizer::default().tokenize(text);
        if tokens.len() < MIN_LANGUAGE_TOKENS {
            return (false, 0.0);
        }
        let hits = tokens.iter().filter(|t| self.words.contains(t.as_str())).count();
        let ratio = hits as f64 / tokens.len() as f64;
        (ratio >= self.threshold, ratio)
    }

    pub fn function_word_count(&self) -> usize {
        self.words.len()
    }
}

pub fn is_english(text: &str) -> (bool, f64) {
    EnglishDetector::default().detect(text)
}

/// Strict thresholds for ten-point labeling: `score > positive_above` is
/// positive, `score < negative_below` negative, anything between discarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelThresholds {
    pub positive_above: f64,
    pub negative_below: f64,
}

impl Default for LabelThresholds {
    fn default() -> Self {
        LabelThresholds {
            positive_above: 8.0,
            negative_below: 4.0,
        }
    }
}

pub fn label_by_score(review: &Review, scale: ScoreScale) -> Result<Option<PolarityLabel>> {
    label_by_score_with(review, scale, LabelThresholds::default())
}

pub fn label_by_score_with(
    review: &Review,
    scale: ScoreScale,
    thresholds: LabelThresholds,
) -> Result<Option<PolarityLabel>> {
    if scale.kind != ScaleKind::TenPoint {
        return Err(Error::UnsupportedScale);
    }
    let score = scale.validate(review.score)?;
    Ok(if score > thresholds.positive_above {
        Some(PolarityLabel::Positive)
    } else if score < thresholds.negative_below {
        Some(PolarityLabel::Negative)
    } else {
        None
    })
}

/// Samples `per_class` documents of each label without replacement. The
/// output keeps input order.
pub fn balance_sample(docs: &[LabeledDocument], per_class: usize, seed: u64) -> Result<Vec<LabeledDocument>> {
    let mut chosen: Vec<usize> = Vec::with_capacity(2 * per_class);
    for (tag, label) in PolarityLabel::ALL.into_iter().enumerate() {
        let members: Vec<usize> = docs
            .iter()
            .enumerate()
            .filter(|(_, d)| d.label == label)
            .map(|(i, _)| i)
            .collect();
        if members.len() < per_class {
            return Err(Error::InsufficientData {
                label,
                needed: per_class,
                available: members.len(),
            });
        }
        let mut rng = rng::substream(seed, tag as u64);
        chosen.extend(index::sample(&mut rng, members.len(), per_class).into_iter().map(|k| members[k]));
    }
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| docs[i].clone()).collect())
}

pub fn exclude_score(reviews: &[Review], excluded: f64) -> Vec<Review> {
    reviews.iter().filter(|r| r.score != excluded).cloned().collect()
}

/// Map key for scores: numeric order, rendered as the shortest decimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreKey(pub f64);

impl Eq for ScoreKey {}

impl PartialOrd for ScoreKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ScoreKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for ScoreKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for ScoreKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScoreKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map(ScoreKey).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub per_score: BTreeMap<ScoreKey, usize>,
    pub per_label: BTreeMap<PolarityLabel, usize>,
}

impl CorpusStats {
    pub fn of_labeled(docs: &[LabeledDocument]) -> Self {
        let mut stats = score_distribution(docs.iter().map(|d| &d.review));
        for d in docs {
            *stats.per_label.entry(d.label).or_insert(0) += 1;
        }
        stats
    }
}

pub fn score_distribution<'a>(reviews: impl IntoIterator<Item = &'a Review>) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for r in reviews {
        stats.total += 1;
        *stats.per_score.entry(ScoreKey(r.score)).or_insert(0) += 1;
    }
    stats
}
