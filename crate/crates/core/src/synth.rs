//! Seeded synthetic review corpora for tests, benchmarks and demos.
//!
//! Texts are English-looking word salads: class-specific opinion words,
//! shared hotel vocabulary as noise, and function words as glue so that the
//! language filter accepts them. Word choice within each list is Zipf-like.

use chrono::NaiveDate;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::corpus::{LabelSource, LabeledDocument, PolarityLabel, Review, TripType};
use crate::rng::{self, Rng as ChaRng};

pub const POSITIVE_WORDS: &[&str] = &[
    "excellent", "wonderful", "friendly", "spotless", "lovely", "perfect", "amazing", "comfortable",
    "helpful", "beautiful", "delicious", "fantastic", "superb", "welcoming", "cozy", "charming",
    "gorgeous", "pleasant", "relaxing", "quiet", "stunning", "attentive", "generous", "modern",
    "outstanding", "brilliant", "impeccable", "recommend", "enjoyed", "loved", "great", "awesome",
    "courteous", "elegant", "tasty", "fresh", "convenient", "peaceful", "delightful", "professional",
    "spacious", "clean", "fabulous", "memorable", "terrific", "smiling", "warm", "marvelous",
];

pub const NEGATIVE_WORDS: &[&str] = &[
    "dirty", "rude", "terrible", "awful", "noisy", "broken", "horrible", "disgusting", "smelly",
    "cold", "unhelpful", "filthy", "worst", "disappointing", "overpriced", "stained", "moldy",
    "cramped", "uncomfortable", "poor", "bad", "slow", "ignored", "leaking", "damp", "mouldy",
    "shabby", "unfriendly", "tiny", "avoid", "refund", "complaint", "bugs", "cockroach",
    "disaster", "nightmare", "greasy", "stale", "outdated", "unsafe", "loud", "rusty",
    "unacceptable", "dreadful", "lukewarm", "sticky", "miserable", "hostile",
];

pub const SHARED_WORDS: &[&str] = &[
    "room", "hotel", "breakfast", "staff", "location", "bed", "bathroom", "shower", "reception",
    "pool", "view", "city", "station", "night", "stay", "restaurant", "bar", "coffee", "towels",
    "floor", "window", "street", "price", "parking", "wifi", "elevator", "check", "desk", "area",
    "beach", "minutes", "walk", "center", "airport", "taxi", "family", "friends", "weekend",
    "business", "trip", "holiday", "booking", "service", "food", "dinner", "lobby", "pillow",
    "balcony", "garden", "door", "key", "manager", "morning", "evening", "day", "time", "week",
    "tea", "juice", "bread", "eggs", "fruit", "menu", "table", "chair", "sofa", "lamp", "light",
    "air", "conditioning", "heating", "water", "pressure", "television", "channel", "noise",
    "corridor", "stairs", "luggage", "bag", "suitcase", "map", "museum", "shop", "market",
    "square", "bus", "metro", "train", "road", "car", "rental", "tour", "guide",
];

const GLUE: &[&str] = &[
    "the", "was", "and", "very", "with", "of", "to", "a", "in", "it", "we", "our", "is", "for",
    "at", "on", "this", "that", "but", "were", "they", "there", "had", "so",
];

const FOREIGN: &[&str] = &[
    "la", "camera", "era", "pulita", "e", "il", "personale", "gentile", "colazione", "ottima",
    "posizione", "perfetta", "molto", "bella", "stanza", "abbiamo", "dormito", "bene", "struttura",
    "consiglio", "vicino", "centro", "letto", "comodo", "bagno", "piccolo", "grazie",
];

/// Generation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Probability that a content word comes from the shared list.
    pub noise_share: f64,
    /// Probability that a class word is drawn from the opposite class.
    pub contamination: f64,
    /// Probability that a function word precedes each content word.
    pub glue_rate: f64,
    pub min_words: usize,
    pub max_words: usize,
    /// Zipf exponent for word choice within a list.
    pub zipf_exponent: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            noise_share: 0.30,
            contamination: 0.10,
            glue_rate: 0.6,
            min_words: 20,
            max_words: 60,
            zipf_exponent: 1.0,
        }
    }
}

/// Text polarity of a generated review, independent of its score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tone {
    Positive,
    Negative,
    Mixed,
}

impl From<PolarityLabel> for Tone {
    fn from(l: PolarityLabel) -> Self {
        match l {
            PolarityLabel::Positive => Tone::Positive,
            PolarityLabel::Negative => Tone::Negative,
        }
    }
}

struct Lists {
    pos: WeightedIndex<f64>,
    neg: WeightedIndex<f64>,
    shared: WeightedIndex<f64>,
}

fn zipf(n: usize, s: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|r| 1.0 / (r as f64).powf(s))).expect("non-empty list")
}

/// Text generator with cached Zipf tables.
pub struct TextGenerator {
    cfg: SynthConfig,
    lists: Lists,
}

impl TextGenerator {
    pub fn new(cfg: SynthConfig) -> Self {
        let lists = Lists {
            pos: zipf(POSITIVE_WORDS.len(), cfg.zipf_exponent),
            neg: zipf(NEGATIVE_WORDS.len(), cfg.zipf_exponent),
            shared: zipf(SHARED_WORDS.len(), cfg.zipf_exponent),
        };
        TextGenerator { cfg, lists }
    }

    fn class_word(&self, rng: &mut ChaRng, positive: bool) -> &'static str {
        if positive {
            POSITIVE_WORDS[self.lists.pos.sample(rng)]
        } else {
            NEGATIVE_WORDS[self.lists.neg.sample(rng)]
        }
    }

    /// A review with `n_words` content words.
    pub fn text_with_len(&self, rng: &mut ChaRng, tone: Tone, n_words: usize) -> String {
        let mut words: Vec<&str> = Vec::with_capacity(n_words * 2);
        for _ in 0..n_words {
            if rng.gen_bool(self.cfg.glue_rate) {
                words.push(GLUE[rng.gen_range(0..GLUE.len())]);
            }
            let w = if rng.gen_bool(self.cfg.noise_share) {
                SHARED_WORDS[self.lists.shared.sample(rng)]
            } else {
                let own = match tone {
                    Tone::Positive => true,
                    Tone::Negative => false,
                    Tone::Mixed => rng.gen_bool(0.5),
                };
                let flip = tone != Tone::Mixed && rng.gen_bool(self.cfg.contamination);
                self.class_word(rng, own != flip)
            };
            words.push(w);
        }
        let mut text = String::new();
        for (i, w) in words.iter().enumerate() {
            if i > 0 {
                text.push_str(if rng.gen_bool(0.08) { ". " } else { " " });
            }
            text.push_str(w);
        }
        if let Some(first) = text.get(0..1) {
            let upper = first.to_ascii_uppercase();
            text.replace_range(0..1, &upper);
        }
        text.push('.');
        text
    }

    pub fn text(&self, rng: &mut ChaRng, tone: Tone) -> String {
        let n = rng.gen_range(self.cfg.min_words..=self.cfg.max_words);
        self.text_with_len(rng, tone, n)
    }
}

fn foreign_text(rng: &mut ChaRng) -> String {
    let n = rng.gen_range(20..40);
    (0..n).map(|_| FOREIGN[rng.gen_range(0..FOREIGN.len())]).collect::<Vec<_>>().join(" ")
}

fn date(rng: &mut ChaRng) -> NaiveDate {
    let base = NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date");
    base + chrono::Days::new(rng.gen_range(0..1000))
}

const TRIP_TYPES: [TripType; 5] = [
    TripType::Family,
    TripType::Friends,
    TripType::Couple,
    TripType::SoloTraveler,
    TripType::Businessman,
];

/// Balanced annotated corpus: `per_class` documents of each polarity,
/// alternating positive and negative.
pub fn labeled_benchmark(per_class: usize, seed: u64, cfg: &SynthConfig) -> Vec<LabeledDocument> {
    let gen = TextGenerator::new(cfg.clone());
    let mut rng = rng::substream(seed, 0xBE7C);
    let mut out = Vec::with_capacity(2 * per_class);
    for i in 0..2 * per_class {
        let label = if i % 2 == 0 { PolarityLabel::Positive } else { PolarityLabel::Negative };
        let score = match label {
            PolarityLabel::Positive => 9.0,
            PolarityLabel::Negative => 2.0,
        };
        out.push(LabeledDocument {
            review: Review::new(format!("s{i:06}"), gen.text(&mut rng, label.into()), score),
            label,
            label_source: LabelSource::Annotated,
        });
    }
    out
}

/// Ten-point scored reviews: strong, neutral-band, short and non-English
/// texts mixed in roughly the proportions of a raw crawl.
pub fn ten_point_reviews(n: usize, seed: u64, cfg: &SynthConfig) -> Vec<Review> {
    let gen = TextGenerator::new(cfg.clone());
    let mut rng = rng::substream(seed, 0x10);
    (0..n)
        .map(|i| {
            let roll: f64 = rng.gen();
            let (score, tone) = if roll < 0.45 {
                (rng.gen_range(85..=100) as f64 / 10.0, Tone::Positive)
            } else if roll < 0.75 {
                (rng.gen_range(10..=39) as f64 / 10.0, Tone::Negative)
            } else {
                (rng.gen_range(40..=80) as f64 / 10.0, Tone::Mixed)
            };
            let kind: f64 = rng.gen();
            let text = if kind < 0.05 {
                let n_words = rng.gen_range(3..10);
                gen.text_with_len(&mut rng, tone, n_words)
            } else if kind < 0.10 {
                foreign_text(&mut rng)
            } else {
                gen.text(&mut rng, tone)
            };
            let mut r = Review::new(format!("b{i:06}"), text, score);
            r.hotel_id = Some(format!("h{:03}", rng.gen_range(0..50)));
            r.date = Some(date(&mut rng));
            r
        })
        .collect()
}

/// Per-score share of the five-point corpus and the rate at which the text
/// tone disagrees with the score.
const FIVE_POINT_PROFILE: [(u8, f64, f64); 5] = [
    (5, 0.48, 0.03),
    (4, 0.37, 0.085),
    (3, 0.06, 0.0),
    (2, 0.05, 0.17),
    (1, 0.04, 0.045),
];

/// Five-point scored reviews including score 3 and deliberately mismatched
/// texts. Mismatched texts are mixed or opposite in tone.
pub fn five_point_reviews(n: usize, seed: u64, cfg: &SynthConfig) -> Vec<Review> {
    let gen = TextGenerator::new(cfg.clone());
    let mut rng = rng::substream(seed, 0x05);
    let weights = WeightedIndex::new(FIVE_POINT_PROFILE.iter().map(|p| p.1)).expect("weights");
    (0..n)
        .map(|i| {
            let (score, _, mismatch) = FIVE_POINT_PROFILE[weights.sample(&mut rng)];
            let natural = if score >= 4 { Tone::Positive } else { Tone::Negative };
            let tone = if score == 3 {
                Tone::Mixed
            } else if rng.gen_bool(mismatch) {
                if rng.gen_bool(0.5) {
                    Tone::Mixed
                } else if natural == Tone::Positive {
                    Tone::Negative
                } else {
                    Tone::Positive
                }
            } else {
                natural
            };
            let text = if rng.gen_bool(0.03) { foreign_text(&mut rng) } else { gen.text(&mut rng, tone) };
            let mut r = Review::new(format!("t{i:06}"), text, f64::from(score));
            r.date = Some(date(&mut rng));
            r.trip_type = Some(TRIP_TYPES[rng.gen_range(0..TRIP_TYPES.len())]);
            r.reviewer = Some(format!("user{}", rng.gen_range(0..5000)));
            r.location = Some("Rome".to_string());
            r.hotel_id = Some(format!("h{:03}", rng.gen_range(0..50)));
            r
        })
        .collect()
}
