//! Acceptance suite. Each test covers one criterion and prints a single
//! `PASS`/`FAIL` line, written straight to the process stdout so it shows
//! up even when libtest captures output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use polarity_gap::classify::{train_svm_detailed, ClassifierKind, FeatureConfig, FeatureSpace, TrainingConfig};
use polarity_gap::corpus::PolarityLabel::{self, Negative as N, Positive as P};
use polarity_gap::error::Error;
use polarity_gap::eval::{self, compare, metrics, stratified_folds, Comparison, ConfusionMatrix};
use polarity_gap::exec::Execution;
use polarity_gap::featsel::{information_gain, rank_and_select};
use polarity_gap::mismatch::{compute_pm, expected_polarity, report_from_breakdown, ScoreBreakdown, ScoreCounts};
use polarity_gap::synth::{labeled_benchmark, SynthConfig};
use polarity_gap::textpipe::{porter_stem, Analyzer, PipelineConfig, SparseVector, Stopwords};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(criterion: &str, pass: bool, detail: &str) {
    let line = format!("[{}] {criterion}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn finish(self, criterion: &str, elapsed: Duration, budget: Duration) {
        let mut s = self;
        s.check(elapsed < budget, format!("runtime {elapsed:.2?} < {budget:?}"));
        let pass = s.failures.is_empty();
        let detail = if pass {
            s.notes.join("; ")
        } else {
            format!("failed: {}", s.failures.join("; "))
        };
        verdict(criterion, pass, &detail);
        assert!(pass, "{criterion}: {detail}");
    }
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_1_pm_rule_exactness() {
    let t = Instant::now();
    let mut c = Checks::new();
    let table = [
        (P, 5, 0),
        (P, 4, 0),
        (N, 1, 0),
        (N, 2, 0),
        (P, 1, 1),
        (P, 2, 1),
        (N, 4, 1),
        (N, 5, 1),
    ];
    let mut correct = 0;
    for (label, score, pm) in table {
        let ok = compute_pm(label, score).ok() == Some(pm)
            && (expected_polarity(score).unwrap() == label) == (pm == 0);
        correct += usize::from(ok);
        c.check(ok, format!("({label}, {score}) -> {pm}"));
    }
    let neutral = [P, N].iter().all(|&l| matches!(compute_pm(l, 3), Err(Error::NeutralScore)))
        && matches!(expected_polarity(3), Err(Error::NeutralScore));
    c.check(neutral, "score 3 is a neutral-score error".into());
    c.notes = vec![format!("{correct}/8 truth-table entries exact, score-3 error path ok")];
    c.finish("1 PM rule exactness", t.elapsed(), Duration::from_secs(1));
}

// ---------------------------------------------------------------- 2

fn reported_breakdown() -> ScoreBreakdown {
    [(5u8, 81783u64, 2462u64), (4, 59314, 5476), (2, 1522, 7266), (1, 284, 6193)]
        .into_iter()
        .map(|(s, p, n)| {
            (
                s,
                ScoreCounts {
                    predicted_pos: p,
                    predicted_neg: n,
                },
            )
        })
        .collect()
}

#[test]
fn criterion_2_reported_arithmetic() {
    let t = Instant::now();
    let r = report_from_breakdown(&reported_breakdown()).unwrap();
    let mut c = Checks::new();
    let totals: BTreeMap<u8, u64> = r.per_score.iter().map(|(&s, row)| (s, row.total)).collect();
    c.check(
        totals == BTreeMap::from([(5, 84245), (4, 64790), (2, 8788), (1, 6477)]) && r.total == 164_300,
        format!("per-score totals {totals:?}, total {}", r.total),
    );
    c.check(
        (r.overall_match_rate - 94.07).abs() <= 0.005,
        format!("match rate {:.4} vs 94.07 (±0.005)", r.overall_match_rate),
    );
    for (score, target) in [(5u8, 3.0), (4, 8.5), (2, 17.3), (1, 4.4)] {
        let got = r.per_score_mismatch_pct[&score];
        c.check(
            (got - target).abs() <= 0.05,
            format!("score {score} mismatch {got:.3}% vs {target} (±0.05)"),
        );
    }
    let fp1 = r.fp_share_by_score[&1];
    c.check((fp1 - 15.7).abs() <= 0.5, format!("FP share at 1 = {fp1:.2}% vs 15.7 (±0.5)"));
    let fn5 = r.fn_share_by_score[&5];
    c.check((fn5 - 31.0).abs() <= 0.5, format!("FN share at 5 = {fn5:.2}% vs 31.0 (±0.5)"));
    c.finish("2 reported-arithmetic reproduction", t.elapsed(), Duration::from_secs(1));
}

// ---------------------------------------------------------------- 3

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

fn random_matrix(rng: &mut ChaCha8Rng, max: u64) -> ConfusionMatrix {
    ConfusionMatrix {
        tp: rng.gen_range(0..=max),
        tn: rng.gen_range(0..=max),
        fp: rng.gen_range(0..=max),
        fn_: rng.gen_range(0..=max),
    }
}

fn expand(cm: &ConfusionMatrix) -> (Vec<PolarityLabel>, Vec<PolarityLabel>) {
    let mut predicted = Vec::new();
    let mut actual = Vec::new();
    for (n, a, p) in [(cm.tp, P, P), (cm.tn, N, N), (cm.fp, N, P), (cm.fn_, P, N)] {
        for _ in 0..n {
            actual.push(a);
            predicted.push(p);
        }
    }
    (predicted, actual)
}

#[test]
fn criterion_3_metrics_fidelity() {
    let t = Instant::now();
    let mut c = Checks::new();
    let cm = ConfusionMatrix {
        tp: 141_097,
        fn_: 7_938,
        fp: 1_806,
        tn: 13_459,
    };
    let m = metrics(&cm);
    c.check(
        (m.accuracy - 94.07).abs() <= 0.005 && cm.total() == 164_300,
        format!("accuracy {:.4}%", m.accuracy),
    );
    // hand arithmetic on the printed cells
    let p_pos = 141_097.0 / 142_903.0 * 100.0;
    let r_pos = 141_097.0 / 149_035.0 * 100.0;
    let p_neg = 13_459.0 / 21_397.0 * 100.0;
    let r_neg = 13_459.0 / 15_265.0 * 100.0;
    let f = |p: f64, r: f64| 2.0 / (1.0 / p + 1.0 / r);
    let pos = m.per_class.positive;
    let neg = m.per_class.negative;
    let exact = rel_close(pos.precision, p_pos, 1e-9)
        && rel_close(pos.recall, r_pos, 1e-9)
        && rel_close(pos.f_score, f(p_pos, r_pos), 1e-9)
        && rel_close(neg.precision, p_neg, 1e-9)
        && rel_close(neg.recall, r_neg, 1e-9)
        && rel_close(neg.f_score, f(p_neg, r_neg), 1e-9)
        && rel_close(m.accuracy, 154_556.0 / 164_300.0 * 100.0, 1e-9);
    c.check(
        exact,
        format!(
            "P/R/F pos {:.2}/{:.2}/{:.2} neg {:.2}/{:.2}/{:.2} match hand arithmetic to 1e-9",
            pos.precision, pos.recall, pos.f_score, neg.precision, neg.recall, neg.f_score
        ),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut sym_ok = 0;
    let mut perm_ok = 0;
    for _ in 0..1000 {
        let cm = random_matrix(&mut rng, 40);
        let a = metrics(&cm);
        let b = metrics(&cm.swapped());
        if a.accuracy == b.accuracy && a.per_class.positive == b.per_class.negative && a.per_class.negative == b.per_class.positive {
            sym_ok += 1;
        }
        let (mut p, mut act) = expand(&cm);
        let mut idx: Vec<usize> = (0..p.len()).collect();
        idx.shuffle(&mut rng);
        p = idx.iter().map(|&i| p[i]).collect();
        act = idx.iter().map(|&i| act[i]).collect();
        if eval::confusion(&p, &act).map(|x| metrics(&x)).ok() == Some(a) {
            perm_ok += 1;
        }
    }
    c.check(sym_ok == 1000, format!("class-swap symmetry on {sym_ok}/1000 random matrices"));
    c.check(perm_ok == 1000, format!("permutation invariance on {perm_ok}/1000 random matrices"));
    c.finish("3 metrics fidelity", t.elapsed(), Duration::from_secs(10));
}

// ---------------------------------------------------------------- 4

/// Entropy bookkeeping done per document with probabilities, independent of
/// the contingency-table code under test.
fn oracle_gain(labels: &[PolarityLabel], present: &[bool]) -> f64 {
    let n = labels.len() as f64;
    let h = |members: &[usize]| -> f64 {
        if members.is_empty() {
            return 0.0;
        }
        let mut total = 0.0;
        for class in [P, N] {
            let p = members.iter().filter(|&&i| labels[i] == class).count() as f64 / members.len() as f64;
            if p > 0.0 {
                total -= p * p.log2();
            }
        }
        total
    };
    let all: Vec<usize> = (0..labels.len()).collect();
    let with: Vec<usize> = all.iter().copied().filter(|&i| present[i]).collect();
    let without: Vec<usize> = all.iter().copied().filter(|&i| !present[i]).collect();
    h(&all) - (with.len() as f64 / n) * h(&with) - (without.len() as f64 / n) * h(&without)
}

fn labels_from_mask(n: usize, mask: u32) -> Vec<PolarityLabel> {
    (0..n).map(|i| if mask >> i & 1 == 1 { P } else { N }).collect()
}

#[test]
fn criterion_4_information_gain_oracle() {
    let t = Instant::now();
    let mut c = Checks::new();
    let tol = 1e-10;
    let mut single = 0usize;
    let mut single_bad = 0usize;
    for n in 2..=8usize {
        for lmask in 1..(1u32 << n) - 1 {
            let labels = labels_from_mask(n, lmask);
            for pmask in 0..1u32 << n {
                let present: Vec<bool> = (0..n).map(|i| pmask >> i & 1 == 1).collect();
                // weights of varying magnitude: presence is what counts
                let docs: Vec<(SparseVector, PolarityLabel)> = (0..n)
                    .map(|i| {
                        let v = if present[i] {
                            SparseVector::from_pairs(vec![(0, 0.5 + i as f64)])
                        } else {
                            SparseVector::new()
                        };
                        (v, labels[i])
                    })
                    .collect();
                single += 1;
                if (information_gain(&docs, 0) - oracle_gain(&labels, &present)).abs() > tol {
                    single_bad += 1;
                }
            }
        }
    }
    c.check(single_bad == 0, format!("{} of {single} single-attribute corpora (n<=8) agree", single - single_bad));

    // whole corpora with several attributes, through the ranking path
    let mut corpora = 0usize;
    let mut corpora_bad = 0usize;
    for (n, m) in [(2usize, 4usize), (3, 4), (4, 3), (5, 2), (6, 2), (8, 1)] {
        for lmask in 1..(1u32 << n) - 1 {
            let labels = labels_from_mask(n, lmask);
            for pmask in 0..1u64 << (n * m) {
                let present = |doc: usize, attr: usize| pmask >> (attr * n + doc) & 1 == 1;
                let docs: Vec<(SparseVector, PolarityLabel)> = (0..n)
                    .map(|d| ((0..m as u32).filter(|&a| present(d, a as usize)).map(|a| (a, 1.0)).collect(), labels[d]))
                    .collect();
                let sel = rank_and_select(&docs, m, 0.0, Execution::Sequential);
                let ok = (0..m).all(|a| {
                    let col: Vec<bool> = (0..n).map(|d| present(d, a)).collect();
                    let g = oracle_gain(&labels, &col);
                    match sel.ranked.iter().find(|s| s.attribute_id == a as u32) {
                        Some(s) => (s.gain - g).abs() <= tol,
                        None => g <= tol,
                    }
                });
                corpora += 1;
                corpora_bad += usize::from(!ok);
            }
        }
    }
    c.check(
        corpora_bad == 0,
        format!("{} of {corpora} multi-attribute corpora rank consistently", corpora - corpora_bad),
    );
    c.finish("4 information-gain oracle", t.elapsed(), Duration::from_secs(30));
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_5_porter_conformance() {
    let t = Instant::now();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let voc = std::fs::read_to_string(dir.join("porter_voc.txt")).unwrap();
    let out = std::fs::read_to_string(dir.join("porter_output.txt")).unwrap();
    let pairs: Vec<(&str, &str)> = voc.lines().zip(out.lines()).collect();
    let matched = pairs.iter().filter(|(w, e)| porter_stem(w) == *e).count();
    let mut c = Checks::new();
    c.check(
        pairs.len() >= 10_000 && voc.lines().count() == out.lines().count(),
        format!("{} vocabulary entries", pairs.len()),
    );
    c.check(matched == pairs.len(), format!("{matched}/{} stems exact", pairs.len()));
    c.finish("5 Porter stemmer conformance", t.elapsed(), Duration::from_secs(5));
}

// ---------------------------------------------------------------- 6, 7

struct Benchmark {
    comparison: Comparison,
    elapsed: Duration,
}

const BENCH_SEED: u64 = 42;

fn benchmark() -> &'static Benchmark {
    static CELL: OnceLock<Benchmark> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let docs = labeled_benchmark(2000, BENCH_SEED, &SynthConfig::default());
        let texts: Vec<&str> = docs.iter().map(|d| d.review.text.as_str()).collect();
        let labels: Vec<PolarityLabel> = docs.iter().map(|d| d.label).collect();
        let trainers: Vec<TrainingConfig> = [ClassifierKind::Svm, ClassifierKind::NaiveBayes, ClassifierKind::Tree]
            .into_iter()
            .map(TrainingConfig::for_classifier)
            .collect();
        let comparison = compare(
            &texts,
            &labels,
            &FeatureConfig::default(),
            &Stopwords::english(),
            &trainers,
            5,
            BENCH_SEED,
            Execution::default(),
        )
        .unwrap();
        Benchmark {
            comparison,
            elapsed: t.elapsed(),
        }
    })
}

#[test]
fn criterion_6_svm_desk_scale() {
    let t = Instant::now();
    let b = benchmark();
    let svm = b.comparison.report(ClassifierKind::Svm).unwrap();
    let mut c = Checks::new();
    c.check(
        svm.averaged.accuracy >= 95.0,
        format!("5-fold SVM accuracy {:.2}% >= 95%", svm.averaged.accuracy),
    );
    c.check(
        svm.folds.iter().all(|f| f.converged == Some(true)),
        "SMO converged in every fold".into(),
    );

    // KKT feasibility on the full benchmark
    let docs = labeled_benchmark(2000, BENCH_SEED, &SynthConfig::default());
    let features = FeatureConfig::default();
    let analyzer = Analyzer::new(&features.pipeline, Stopwords::english());
    let stems: Vec<Vec<String>> = docs.iter().map(|d| analyzer.analyze(&d.review.text)).collect();
    let labels: Vec<PolarityLabel> = docs.iter().map(|d| d.label).collect();
    let (space, vectors) =
        FeatureSpace::fit(&features, Stopwords::english(), &stems, &labels, Execution::default()).unwrap();
    let train: Vec<(SparseVector, PolarityLabel)> = vectors.into_iter().zip(labels.iter().copied()).collect();
    let cfg = TrainingConfig::default();
    let (_, diag) = train_svm_detailed(&train, space.dimension(), &cfg).unwrap();
    let in_box = diag.alphas.iter().all(|&a| (0.0..=cfg.c_parameter).contains(&a));
    c.check(in_box, format!("0 <= alpha <= C for all {} multipliers", diag.alphas.len()));
    c.check(
        diag.sum_alpha_y().abs() < 1e-6,
        format!("|sum alpha*y| = {:.2e} < 1e-6", diag.sum_alpha_y().abs()),
    );
    c.finish(
        "6 SVM correctness at desk scale",
        b.elapsed + t.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_7_classifier_ordering() {
    let t = Instant::now();
    let b = benchmark();
    let acc = |k| b.comparison.report(k).unwrap().averaged.accuracy;
    let (svm, nb, tree) = (acc(ClassifierKind::Svm), acc(ClassifierKind::NaiveBayes), acc(ClassifierKind::Tree));
    let mut c = Checks::new();
    c.check(svm >= nb, format!("SVM {svm:.2}% >= NB {nb:.2}%"));
    c.check(svm >= tree, format!("SVM {svm:.2}% >= tree {tree:.2}%"));
    c.finish("7 classifier ordering", b.elapsed + t.elapsed(), Duration::from_secs(300));
}

// ---------------------------------------------------------------- 8

fn cli(dir: &Path, args: &[&str], threads: &str) {
    let out = Command::new(env!("CARGO_BIN_EXE_polarity-gap"))
        .args(args)
        .current_dir(dir)
        .env("POLARITY_GAP_THREADS", threads)
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

const OUTPUTS: [&str; 8] = [
    "labeled.jsonl",
    "model.json",
    "records.jsonl",
    "report.json",
    "tables.txt",
    "prepare.json",
    "detect.json",
    "selection.json",
];

const MANIFESTS: [&str; 4] = [
    "labeled.jsonl.manifest.json",
    "model.json.manifest.json",
    "records.jsonl.manifest.json",
    "report.json.manifest.json",
];

fn pipeline(dir: &Path, threads: &str) {
    cli(dir, &["generate", "--kind", "ten-point", "-n", "12000", "--seed", "5", "-o", "booking.jsonl"], threads);
    cli(dir, &["generate", "--kind", "five-point", "-n", "20000", "--seed", "6", "-o", "trip.jsonl"], threads);
    cli(
        dir,
        &["prepare", "-i", "booking.jsonl", "-o", "labeled.jsonl", "--seed", "7", "--summary", "prepare.json"],
        threads,
    );
    cli(
        dir,
        &["train", "-i", "labeled.jsonl", "-o", "model.json", "--seed", "7", "--selection-report", "selection.json"],
        threads,
    );
    cli(
        dir,
        &["detect", "-m", "model.json", "-i", "trip.jsonl", "-o", "records.jsonl", "--summary", "detect.json"],
        threads,
    );
    cli(
        dir,
        &[
            "report", "-i", "records.jsonl", "-o", "report.json", "--table", "tables.txt", "--sample", "6", "--seed",
            "7", "--corpus", "trip.jsonl",
        ],
        threads,
    );
}

fn manifest_without_timestamps(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("started_at");
    obj.remove("finished_at");
    v
}

#[test]
fn criterion_8_determinism() {
    let t = Instant::now();
    let runs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    pipeline(runs[0].path(), "0");
    pipeline(runs[1].path(), "0");
    pipeline(runs[2].path(), "1");
    let mut c = Checks::new();
    for name in OUTPUTS {
        let bytes: Vec<Vec<u8>> = runs.iter().map(|d| std::fs::read(d.path().join(name)).unwrap()).collect();
        c.check(
            bytes[0] == bytes[1] && !bytes[0].is_empty(),
            format!("{name} identical across seeded reruns"),
        );
        c.check(bytes[0] == bytes[2], format!("{name} identical with --threads 1"));
    }
    for name in MANIFESTS {
        let m: Vec<serde_json::Value> = runs.iter().map(|d| manifest_without_timestamps(&d.path().join(name))).collect();
        c.check(m[0] == m[1] && m[0] == m[2], format!("{name} identical outside timestamps"));
    }
    let model: serde_json::Value =
        serde_json::from_slice(&std::fs::read(runs[0].path().join("model.json")).unwrap()).unwrap();
    let sidecar = manifest_without_timestamps(&runs[0].path().join("model.json.manifest.json"));
    c.check(
        model["manifest_id"] == sidecar["manifest_id"],
        "model references its manifest".into(),
    );
    let passed = c.notes.len();
    c.notes = vec![format!("{passed} comparisons over 3 runs of prepare/train/detect/report")];
    c.finish("8 determinism", t.elapsed(), Duration::from_secs(120));
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_9_leakage_guard() {
    let t = Instant::now();
    let mut c = Checks::new();
    let features = FeatureConfig::default();
    let stopwords = Stopwords::english();
    let analyzer = Analyzer::new(&PipelineConfig::default(), stopwords.clone());
    let mut checked = 0;
    let mut leaks = 0;
    let mut visible = 0;
    for seed in 0..10u64 {
        let docs = labeled_benchmark(60, 100 + seed, &SynthConfig::default());
        let labels: Vec<PolarityLabel> = docs.iter().map(|d| d.label).collect();
        let k = 5;
        let folds = stratified_folds(&labels, k, seed).unwrap();
        let sentinel = |f: usize| format!("zyxsentinel{}", (b'a' + f as u8) as char);
        let texts: Vec<String> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| format!("{} {}", d.review.text, sentinel(folds.fold_of(i))))
            .collect();
        let stems: Vec<Vec<String>> = texts.iter().map(|t| analyzer.analyze(t)).collect();
        let report = eval::cross_validate(
            &texts,
            &labels,
            &features,
            &stopwords,
            &TrainingConfig::default(),
            k,
            seed,
            Execution::default(),
        )
        .unwrap();
        for fold in 0..k {
            let (space, _, _) =
                eval::fit_fold(&stems, &labels, &folds, fold, &features, &stopwords, Execution::Sequential).unwrap();
            let vocab = space.pipeline.vocabulary();
            assert_eq!(vocab.sha256(), report.folds[fold].vocabulary_sha256);
            for other in 0..k {
                let stem = analyzer.analyze(&sentinel(other)).pop().unwrap();
                let present = vocab.id(&stem).is_some();
                if other == fold {
                    checked += 1;
                    leaks += usize::from(present);
                } else {
                    visible += usize::from(present);
                }
            }
        }
    }
    c.check(leaks == 0, format!("{checked} fold models over 10 seeds, {leaks} contain their test-only sentinel"));
    c.check(
        visible == 10 * 5 * 4,
        format!("sentinels of training folds are visible ({visible}/200), so the probe is live"),
    );
    c.finish("9 leakage guard", t.elapsed(), Duration::from_secs(60));
}
