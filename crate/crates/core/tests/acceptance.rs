//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.
//! Every expected value is computed here by an oracle that shares no code with the library.

use std::collections::{BTreeMap, HashMap};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use medaug::augment::{
    build_provider, eligible_units, merge_corpus, run_augmentation, write_records, AugmentConfig,
    DriftVerdict, PromptTemplate, Verdict,
};
use medaug::baseline::{build_gazetteer, generate_synthetic, tag_corpus, RuleSet, SyntheticSpec};
use medaug::corpus::{
    parse_document, serialize_annotations, validate_corpus, AnnotatedDocument, Corpus, EventLabel,
    MentionSpan, Split, StandoffError,
};
use medaug::evalkit::{score_with, MatchPolicy, MetricsReport, ScoreOptions, TaskMode};
use medaug::textproc::{decode_bio, encode_bio, tokenize, LabelScheme, SentenceUnit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, failures: &[String], detail: String) -> Outcome {
    let detail = match failures.first() {
        None => detail,
        Some(first) => format!("{detail}; {} failure(s), first: {first}", failures.len()),
    };
    Outcome {
        name,
        pass: failures.is_empty(),
        detail,
    }
}

const LABELS: [EventLabel; 3] = [
    EventLabel::Disposition,
    EventLabel::NoDisposition,
    EventLabel::Undetermined,
];

fn chars_slice(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end - start).collect()
}

// ---------------------------------------------------------------------------------------------
// Brute-force scoring oracle

/// Maximum one-to-one matching size by exhaustive DP over subsets of predictions.
fn max_matching(
    gold: &[&MentionSpan],
    pred: &[&MentionSpan],
    ok: &dyn Fn(&MentionSpan, &MentionSpan) -> bool,
) -> u64 {
    fn go(
        i: usize,
        used: u32,
        gold: &[&MentionSpan],
        pred: &[&MentionSpan],
        ok: &dyn Fn(&MentionSpan, &MentionSpan) -> bool,
        memo: &mut HashMap<(usize, u32), u64>,
    ) -> u64 {
        if i == gold.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, used)) {
            return v;
        }
        let mut best = go(i + 1, used, gold, pred, ok, memo);
        for (j, p) in pred.iter().enumerate() {
            if used & (1 << j) == 0 && ok(gold[i], p) {
                best = best.max(1 + go(i + 1, used | (1 << j), gold, pred, ok, memo));
            }
        }
        memo.insert((i, used), best);
        best
    }
    go(0, 0, gold, pred, ok, &mut HashMap::new())
}

#[derive(Default, Clone, Copy, Debug)]
struct Tally {
    tp: u64,
    fp: u64,
    fn_: u64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn prf(t: Tally) -> [f64; 3] {
    let p = ratio(t.tp, t.tp + t.fp);
    let r = ratio(t.tp, t.tp + t.fn_);
    let f = if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    };
    [p, r, f]
}

struct OracleBlock {
    micro: Tally,
    per_class: BTreeMap<String, Tally>,
}

impl OracleBlock {
    fn macro_prf(&self) -> [f64; 3] {
        let present: Vec<[f64; 3]> = self
            .per_class
            .values()
            .filter(|t| t.tp + t.fp + t.fn_ > 0)
            .map(|t| prf(*t))
            .collect();
        if present.is_empty() {
            return [0.0; 3];
        }
        let n = present.len() as f64;
        [0, 1, 2].map(|k| present.iter().map(|v| v[k]).sum::<f64>() / n)
    }
}

fn oracle(
    gold: &Corpus,
    pred: &BTreeMap<String, Vec<MentionSpan>>,
    task: TaskMode,
    lenient: bool,
) -> OracleBlock {
    let class = |m: &MentionSpan| -> String {
        match task {
            TaskMode::Identification => "Drug".into(),
            TaskMode::EventClassification => m.label.as_str().into(),
        }
    };
    let ok = move |g: &MentionSpan, p: &MentionSpan| {
        if lenient {
            g.start.max(p.start) < g.end.min(p.end)
        } else {
            g.start == p.start && g.end == p.end
        }
    };
    let mut per_class: BTreeMap<String, Tally> = BTreeMap::new();
    let empty = Vec::new();
    for (id, doc) in &gold.documents {
        let preds = pred.get(id).unwrap_or(&empty);
        let mut classes: Vec<String> = doc.mentions.iter().chain(preds).map(class).collect();
        classes.sort();
        classes.dedup();
        for c in classes {
            let g: Vec<&MentionSpan> = doc.mentions.iter().filter(|m| class(m) == c).collect();
            let p: Vec<&MentionSpan> = preds.iter().filter(|m| class(m) == c).collect();
            let tp = max_matching(&g, &p, &ok);
            let t = per_class.entry(c).or_default();
            t.tp += tp;
            t.fp += p.len() as u64 - tp;
            t.fn_ += g.len() as u64 - tp;
        }
    }
    let mut micro = Tally::default();
    for t in per_class.values() {
        micro.tp += t.tp;
        micro.fp += t.fp;
        micro.fn_ += t.fn_;
    }
    OracleBlock { micro, per_class }
}

fn random_span(rng: &mut ChaCha8Rng, len: usize) -> (usize, usize) {
    let start = rng.gen_range(0..len - 1);
    let end = (start + rng.gen_range(1..=8)).min(len);
    (start, end)
}

fn mention(text: &str, id: usize, (s, e): (usize, usize), label: EventLabel) -> MentionSpan {
    MentionSpan::new(format!("T{id}"), s, e, chars_slice(text, s, e), label)
}

fn random_scoring_case(
    rng: &mut ChaCha8Rng,
    disjoint_gold: bool,
) -> (Corpus, BTreeMap<String, Vec<MentionSpan>>) {
    let mut gold = Corpus::new("rand");
    let mut preds = BTreeMap::new();
    for d in 0..rng.gen_range(1..=20) {
        let len = rng.gen_range(30..80);
        let text: String = (0..len)
            .map(|_| b"abcdefgh ."[rng.gen_range(0..10)] as char)
            .collect();
        let mut g: Vec<MentionSpan> = Vec::new();
        for _ in 0..rng.gen_range(0..=10) {
            for _try in 0..20 {
                let span = random_span(rng, len);
                let clash = g.iter().any(|m| span.0 < m.end && m.start < span.1);
                if !disjoint_gold || !clash {
                    let label = LABELS[rng.gen_range(0..3)];
                    g.push(mention(&text, g.len() + 1, span, label));
                    break;
                }
            }
        }
        let mut p = Vec::new();
        for i in 0..rng.gen_range(0..=10) {
            let roll = rng.gen_range(0..10);
            let (span, label) = if !g.is_empty() && roll < 7 {
                let src = &g[rng.gen_range(0..g.len())];
                let label = if rng.gen_bool(0.7) {
                    src.label
                } else {
                    LABELS[rng.gen_range(0..3)]
                };
                if roll < 4 {
                    ((src.start, src.end), label)
                } else {
                    let s = (src.start as i64 + rng.gen_range(-3..=3)).clamp(0, len as i64 - 1);
                    let e = (src.end as i64 + rng.gen_range(-3..=3)).clamp(s + 1, len as i64);
                    ((s as usize, e as usize), label)
                }
            } else {
                (random_span(rng, len), LABELS[rng.gen_range(0..3)])
            };
            p.push(mention(&text, i + 1, span, label));
        }
        let id = format!("r{d:02}");
        gold.insert(
            AnnotatedDocument {
                doc_id: id.clone(),
                text,
                mentions: g,
            },
            Split::Test,
        );
        preds.insert(id, p);
    }
    (gold, preds)
}

fn compare(report: &MetricsReport, o_strict: &OracleBlock, o_len: &OracleBlock) -> f64 {
    let mut worst: f64 = 0.0;
    for (block, o) in [(&report.strict, o_strict), (&report.lenient, o_len)] {
        let m = prf(o.micro);
        worst = worst
            .max((block.micro.precision - m[0]).abs())
            .max((block.micro.recall - m[1]).abs())
            .max((block.micro.fscore - m[2]).abs());
        if (block.micro.tp, block.micro.fp, block.micro.fn_)
            != (o.micro.tp, o.micro.fp, o.micro.fn_)
        {
            worst = f64::INFINITY;
        }
        let mac = o.macro_prf();
        worst = worst
            .max((block.macro_avg.precision - mac[0]).abs())
            .max((block.macro_avg.recall - mac[1]).abs())
            .max((block.macro_avg.fscore - mac[2]).abs());
        for (c, t) in &o.per_class {
            match block.per_class.get(c) {
                Some(got) if (got.tp, got.fp, got.fn_) == (t.tp, t.fp, t.fn_) => {
                    let v = prf(*t);
                    worst = worst
                        .max((got.precision - v[0]).abs())
                        .max((got.recall - v[1]).abs())
                        .max((got.fscore - v[2]).abs());
                }
                _ => worst = f64::INFINITY,
            }
        }
    }
    worst
}

struct ScorerStats {
    monotonicity_violations: usize,
    monotonicity_checks: usize,
}

fn scorer_oracle_equivalence(stats: &mut ScorerStats) -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut disjoint_cases = 0;
    let mut greedy_short = 0;
    let mut greedy_short_disjoint = 0;
    for case in 0..500 {
        let disjoint = case % 2 == 0;
        disjoint_cases += disjoint as usize;
        let (gold, pred) = random_scoring_case(&mut rng, disjoint);
        for task in [TaskMode::Identification, TaskMode::EventClassification] {
            let os = oracle(&gold, &pred, task, false);
            let ol = oracle(&gold, &pred, task, true);
            let report = score_with(&gold, &pred, task, &ScoreOptions::default()).unwrap();
            let diff = compare(&report, &os, &ol);
            worst = worst.max(diff);
            if diff > 1e-12 {
                failures.push(format!("case {case} {task:?}: max deviation {diff}"));
            }
            let greedy = score_with(
                &gold,
                &pred,
                task,
                &ScoreOptions {
                    policy: MatchPolicy::Greedy,
                    ..ScoreOptions::default()
                },
            )
            .unwrap();
            if greedy.strict.micro.tp != os.micro.tp {
                failures.push(format!("case {case} {task:?}: greedy strict tp differs"));
            }
            if greedy.lenient.micro.tp > ol.micro.tp {
                failures.push(format!(
                    "case {case} {task:?}: greedy lenient tp above oracle"
                ));
            }
            if greedy.lenient.micro.tp < ol.micro.tp {
                greedy_short += 1;
                greedy_short_disjoint += disjoint as usize;
            }
            stats.monotonicity_checks += 1;
            if report.lenient.micro.tp < report.strict.micro.tp {
                stats.monotonicity_violations += 1;
            }
        }
    }
    let elapsed = t0.elapsed();
    if elapsed > Duration::from_secs(30) {
        failures.push(format!("runtime {elapsed:?} exceeds 30 s"));
    }
    outcome(
        "scorer oracle equivalence",
        &failures,
        format!(
            "500 corpora x 2 tasks ({disjoint_cases} with non-overlapping gold), strict+lenient \
             micro/macro/per-class max |dev| = {worst:e} (tol 1e-12); greedy lenient tp <= oracle \
             everywhere, below it in {greedy_short} case(s) ({greedy_short_disjoint} with \
             non-overlapping gold, which the default maximum policy avoids); {elapsed:.2?} (limit 30 s)"
        ),
    )
}

// ---------------------------------------------------------------------------------------------

fn hand_fixture() -> Outcome {
    let text = "Start Lipitor 20mg daily. Continue metformin.";
    let gold = parse_document(
        "fx",
        text,
        "T1\tDisposition 6 13\tLipitor\nT2\tNoDisposition 35 44\tmetformin\n",
    )
    .unwrap();
    let mut c = Corpus::new("fixture");
    c.insert(gold, Split::Test);
    let pred = BTreeMap::from([(
        "fx".to_string(),
        vec![
            mention(text, 1, (6, 13), EventLabel::Disposition),
            mention(text, 2, (36, 44), EventLabel::NoDisposition),
        ],
    )]);
    let r = score_with(
        &c,
        &pred,
        TaskMode::EventClassification,
        &ScoreOptions::default(),
    )
    .unwrap();
    let s = &r.strict.micro;
    let l = &r.lenient.micro;
    let mut failures = Vec::new();
    if [s.precision, s.recall, s.fscore] != [0.5, 0.5, 0.5] {
        failures.push(format!(
            "strict micro {:?}",
            [s.precision, s.recall, s.fscore]
        ));
    }
    if [l.precision, l.recall, l.fscore] != [1.0, 1.0, 1.0] {
        failures.push(format!(
            "lenient micro {:?}",
            [l.precision, l.recall, l.fscore]
        ));
    }
    if r.strict.macro_avg.fscore != 0.5 {
        failures.push(format!("strict MacroF {}", r.strict.macro_avg.fscore));
    }
    outcome(
        "hand fixture",
        &failures,
        format!(
            "strict micro P/R/F = {}/{}/{}, lenient micro P/R/F = {}/{}/{}, strict MacroF = {} \
             over {} classes (exact)",
            s.precision,
            s.recall,
            s.fscore,
            l.precision,
            l.recall,
            l.fscore,
            r.strict.macro_avg.fscore,
            r.strict.macro_avg.classes
        ),
    )
}

// ---------------------------------------------------------------------------------------------

fn standoff_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let alphabet: Vec<char> = "abcXYZ019 .,;:-()\n\téßü中文µ".chars().collect();
    let mut failures = Vec::new();
    for d in 0..1000 {
        let len = rng.gen_range(1..120);
        let text: String = (0..len)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect();
        let mut expected = Vec::new();
        let mut ann = String::new();
        for i in 0..rng.gen_range(0..12) {
            let (s, e) = if len > 1 {
                random_span(&mut rng, len)
            } else {
                (0, 1)
            };
            let surface = chars_slice(&text, s, e).replace('\n', " ");
            let drug = rng.gen_bool(0.2);
            let label = LABELS[rng.gen_range(0..3)];
            let written = if drug { "Drug" } else { label.as_str() };
            ann.push_str(&format!("T{}\t{written} {s} {e}\t{surface}\n", i + 1));
            let label = if drug {
                EventLabel::Undetermined
            } else {
                label
            };
            expected.push((format!("T{}", i + 1), s, e, label, drug));
        }
        let id = format!("doc{d}");
        let first = match parse_document(&id, &text, &ann) {
            Ok(doc) => doc,
            Err(e) => {
                failures.push(format!("{id}: first parse failed: {e}"));
                continue;
            }
        };
        let mut got: Vec<_> = first
            .mentions
            .iter()
            .map(|m| {
                (
                    m.mention_id.clone(),
                    m.start,
                    m.end,
                    m.label,
                    m.from_drug_label,
                )
            })
            .collect();
        got.sort();
        expected.sort();
        if got != expected {
            failures.push(format!("{id}: parsed mentions differ from generated"));
        }
        let again = parse_document(&id, &first.text, &serialize_annotations(&first));
        if again.as_ref() != Ok(&first) {
            failures.push(format!("{id}: parse(serialize(doc)) != doc"));
        }
    }

    let text = "Start Lipitor 20mg daily.";
    type Check = fn(&StandoffError) -> bool;
    let malformed: [(&str, &str, Check); 10] = [
        ("MalformedLine", "T1\tDisposition 6 13\n", |e| {
            matches!(e, StandoffError::MalformedLine { .. })
        }),
        (
            "InvalidMentionId",
            "T-1\tDisposition 6 13\tLipitor\n",
            |e| matches!(e, StandoffError::InvalidMentionId { .. }),
        ),
        ("InvalidOffset", "T1\tDisposition 6 1x\tLipitor\n", |e| {
            matches!(e, StandoffError::InvalidOffset { .. })
        }),
        (
            "DiscontinuousSpan",
            "T1\tDisposition 0 5;6 13\tStart Lipitor\n",
            |e| matches!(e, StandoffError::DiscontinuousSpan { .. }),
        ),
        (
            "UnsupportedAnnotation",
            "#1\tAnnotatorNotes T1\tcheck dose\n",
            |e| matches!(e, StandoffError::UnsupportedAnnotation { .. }),
        ),
        ("UnknownLabel", "T1\tStatin 6 13\tLipitor\n", |e| {
            matches!(e, StandoffError::UnknownLabel { .. })
        }),
        ("EmptySpan", "T1\tDisposition 6 6\t\n", |e| {
            matches!(e, StandoffError::EmptySpan { .. })
        }),
        ("OffsetOutOfRange", "T1\tDisposition 6 99\tLipitor\n", |e| {
            matches!(e, StandoffError::OffsetOutOfRange { .. })
        }),
        ("SurfaceMismatch", "T1\tDisposition 6 13\tLipitol\n", |e| {
            matches!(e, StandoffError::SurfaceMismatch { .. })
        }),
        (
            "DuplicateMentionId",
            "T1\tDisposition 6 13\tLipitor\nT1\tDisposition 14 18\t20mg\n",
            |e| matches!(e, StandoffError::DuplicateMentionId { .. }),
        ),
    ];
    for (name, ann, check) in &malformed {
        match parse_document("bad", text, ann) {
            Err(e) if check(&e) => {}
            other => failures.push(format!("{name} fixture gave {other:?}")),
        }
    }
    outcome(
        "standoff round-trip",
        &failures,
        format!(
            "1000 generated documents parse -> serialize -> parse to equality; {} malformed \
             categories each yield their designated error",
            malformed.len()
        ),
    )
}

// ---------------------------------------------------------------------------------------------

fn bio_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let words = [
        "Start",
        "Lipitor",
        "20",
        "mg",
        "daily",
        "insulin",
        "glargine",
        "stop",
        "aspirin",
        "Continue",
        "metformin",
        "x2",
        "Vit",
        "D",
        "µg",
    ];
    let puncts = [".", ",", "(", ")", "/", "-"];
    let mut failures = Vec::new();
    let mut mentions_total = 0;
    for u in 0..1000 {
        let mut text = String::new();
        for k in 0..rng.gen_range(1..25) {
            if k > 0 && rng.gen_bool(0.8) {
                text.push(' ');
            }
            if rng.gen_bool(0.2) {
                text.push_str(puncts[rng.gen_range(0..puncts.len())]);
            } else {
                text.push_str(words[rng.gen_range(0..words.len())]);
            }
        }
        let tokens = tokenize(&text);
        let mut mentions = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if rng.gen_bool(0.3) {
                let n = rng.gen_range(1..=3).min(tokens.len() - i);
                let (s, e) = (tokens[i].start, tokens[i + n - 1].end);
                let label = LABELS[rng.gen_range(0..3)];
                mentions.push(mention(&text, mentions.len() + 1, (s, e), label));
                i += n;
            } else {
                i += 1;
            }
        }
        mentions_total += mentions.len();
        let unit = SentenceUnit {
            doc_id: format!("u{u}"),
            start: 0,
            end: text.chars().count(),
            text: text.clone(),
            mentions,
        };
        let want: Vec<(usize, usize, String)> = unit
            .mentions
            .iter()
            .map(|m| (m.start, m.end, m.label.as_str().to_string()))
            .collect();
        let enc = encode_bio(&unit, LabelScheme::Event);
        let got: Vec<(usize, usize, String)> = decode_bio(&enc.sequence)
            .spans
            .into_iter()
            .map(|s| (s.start, s.end, s.label))
            .collect();
        if got != want || enc.snapped != 0 || enc.dropped != 0 {
            failures.push(format!("unit {u} event scheme: {want:?} -> {got:?}"));
        }
        let enc = encode_bio(&unit, LabelScheme::Identification);
        let got: Vec<(usize, usize)> = decode_bio(&enc.sequence)
            .spans
            .into_iter()
            .map(|s| (s.start, s.end))
            .collect();
        let want: Vec<(usize, usize)> = want.iter().map(|w| (w.0, w.1)).collect();
        // adjacent same-class mentions stay distinct because each starts with a B tag
        if got != want {
            failures.push(format!(
                "unit {u} identification scheme: {want:?} -> {got:?}"
            ));
        }
    }
    outcome(
        "BIO codec round-trip",
        &failures,
        format!(
            "1000 units, {mentions_total} token-aligned mentions: decode(encode(u)) reproduces \
             (start, end, label) exactly under both tag sets"
        ),
    )
}

// ---------------------------------------------------------------------------------------------

fn augmentation_pipeline() -> Outcome {
    let t0 = Instant::now();
    let corpus = generate_synthetic(&SyntheticSpec::new(200, 2024)).unwrap();
    let mut cfg = AugmentConfig::new(99);
    cfg.fraction = 0.10;
    let template = PromptTemplate::builtin();
    let provider = build_provider(&cfg.provider).unwrap();
    let run = run_augmentation(&corpus, &cfg, &template, provider.as_ref(), 1).unwrap();
    let mut failures = Vec::new();

    // (a) sample size
    let n = eligible_units(&corpus).len();
    let expected_k = ((0.10 * n as f64).round() as usize).max(1);
    if run.units.len() != expected_k {
        failures.push(format!(
            "sampled {} units, expected {expected_k}",
            run.units.len()
        ));
    }
    let mut ids: Vec<String> = run.units.iter().map(|u| u.unit_id()).collect();
    ids.dedup();
    if ids.len() != run.units.len()
        || run
            .units
            .iter()
            .any(|u| corpus.split_of(&u.doc_id) != Split::Train)
    {
        failures.push("sample has repeats or non-train units".into());
    }

    // (b) entity conservation
    let source: HashMap<(String, usize), &SentenceUnit> = run
        .units
        .iter()
        .map(|u| ((u.doc_id.clone(), u.start), u))
        .collect();
    let accepted: Vec<_> = run
        .records
        .iter()
        .filter(|r| r.verdict == Verdict::Accepted)
        .collect();
    for r in &accepted {
        let unit = source[&(r.source_doc_id.clone(), r.unit_start)];
        let bag = |ms: &[MentionSpan]| {
            let mut v: Vec<(String, EventLabel)> = ms
                .iter()
                .map(|m| (m.surface.to_lowercase(), m.label))
                .collect();
            v.sort();
            v
        };
        let cand = r.candidate_text.as_deref().unwrap_or_default();
        let spans_ok = !r.realigned_mentions.is_empty()
            && r.realigned_mentions.iter().all(|m| {
                m.start < m.end
                    && m.end <= cand.chars().count()
                    && chars_slice(cand, m.start, m.end) == m.surface
            });
        if bag(&r.realigned_mentions) != bag(&unit.mentions) || !spans_ok {
            failures.push(format!("{} breaks entity conservation", r.record_id));
        }
    }

    // (c) drift, recomputed from label counts
    let dist = |labels: Vec<EventLabel>| -> [f64; 3] {
        let n = labels.len() as f64;
        LABELS.map(|l| labels.iter().filter(|&&x| x == l).count() as f64 / n)
    };
    let src = dist(
        run.units
            .iter()
            .flat_map(|u| &u.mentions)
            .map(|m| m.label)
            .collect(),
    );
    let acc = dist(
        accepted
            .iter()
            .flat_map(|r| &r.realigned_mentions)
            .map(|m| m.label)
            .collect(),
    );
    let l1: f64 = (0..3).map(|i| (src[i] - acc[i]).abs()).sum();
    let band = if l1 <= cfg.drift_threshold / 2.0 {
        DriftVerdict::Pass
    } else if l1 <= cfg.drift_threshold {
        DriftVerdict::Warn
    } else {
        DriftVerdict::Fail
    };
    let drift_line = match &run.drift {
        Ok(d) => {
            if (d.l1_distance - l1).abs() > 1e-12 || d.verdict != band {
                failures.push(format!(
                    "drift l1 {} / {:?} vs oracle {l1} / {band:?}",
                    d.l1_distance, d.verdict
                ));
            }
            format!("l1 = {:.4} -> {:?}", d.l1_distance, d.verdict)
        }
        Err(e) => {
            failures.push(format!("no drift report: {e}"));
            String::new()
        }
    };

    // (d) merge
    let accepted_owned: Vec<_> = accepted.iter().map(|r| (*r).clone()).collect();
    let merged = merge_corpus(&corpus, &accepted_owned).unwrap();
    let errors = validate_corpus(&merged)
        .iter()
        .filter(|i| i.is_error())
        .count();
    if merged.documents.len() != corpus.documents.len() + accepted.len() || errors > 0 {
        failures.push(format!(
            "merged {} docs (expected {}), {errors} validation errors",
            merged.documents.len(),
            corpus.documents.len() + accepted.len()
        ));
    }
    if merged
        .documents
        .keys()
        .filter(|k| Corpus::is_augmented(k))
        .any(|k| merged.split_of(k) != Split::Train)
    {
        failures.push("augmented document outside train".into());
    }

    // (e) bit-identical reruns, with 1 and with 4 workers
    let log = write_records(&run.records);
    for jobs in [1, 4] {
        let again = run_augmentation(&corpus, &cfg, &template, provider.as_ref(), jobs).unwrap();
        let same_drift = match (&again.drift, &run.drift) {
            (Ok(a), Ok(b)) => a.to_json() == b.to_json(),
            _ => false,
        };
        let remerged = merge_corpus(&corpus, &again.accepted()).unwrap();
        if write_records(&again.records) != log || !same_drift || remerged != merged {
            failures.push(format!("rerun with {jobs} worker(s) differs"));
        }
    }
    let elapsed = t0.elapsed();
    if elapsed > Duration::from_secs(60) {
        failures.push(format!("runtime {elapsed:?} exceeds 60 s"));
    }
    outcome(
        "augmentation pipeline (mock provider)",
        &failures,
        format!(
            "200 docs, N = {n} eligible units, sampled {} = max(1, round(0.10 N)); {} accepted, \
             all entity-conserving; drift {drift_line}; merged {} docs, 0 validation errors; \
             reruns (1 and 4 workers) byte-identical; {elapsed:.2?} (limit 60 s)",
            run.units.len(),
            accepted.len(),
            merged.documents.len()
        ),
    )
}

// ---------------------------------------------------------------------------------------------

fn closed_loop(stats: &mut ScorerStats) -> Outcome {
    let corpus = generate_synthetic(&SyntheticSpec::new(150, 31)).unwrap();
    let gaz = build_gazetteer(&corpus).unwrap();
    let full = RuleSet::default();
    let crippled = full.without(EventLabel::Disposition);
    let mut micro_f = |rules: &RuleSet, task: TaskMode| {
        let pred = tag_corpus(&corpus, &gaz, rules);
        let r = score_with(&corpus, &pred, task, &ScoreOptions::default()).unwrap();
        stats.monotonicity_checks += 1;
        if r.lenient.micro.tp < r.strict.micro.tp {
            stats.monotonicity_violations += 1;
        }
        r.strict.micro.fscore
    };
    let id_full = micro_f(&full, TaskMode::Identification);
    let ev_full = micro_f(&full, TaskMode::EventClassification);
    let id_cut = micro_f(&crippled, TaskMode::Identification);
    let ev_cut = micro_f(&crippled, TaskMode::EventClassification);
    let mut failures = Vec::new();
    if id_full != 1.0 || ev_full != 1.0 {
        failures.push(format!("full rules: id F {id_full}, event F {ev_full}"));
    }
    if ev_cut >= 1.0 || id_cut != 1.0 {
        failures.push(format!(
            "without Disposition: id F {id_cut}, event F {ev_cut}"
        ));
    }
    outcome(
        "closed-loop synth -> tag -> score",
        &failures,
        format!(
            "strict micro F: identification {id_full}, event {ev_full}; without Disposition \
             triggers: identification {id_cut}, event {ev_cut:.4} (< 1)"
        ),
    )
}

fn main() -> ExitCode {
    let mut stats = ScorerStats {
        monotonicity_violations: 0,
        monotonicity_checks: 0,
    };
    let mut results = vec![
        scorer_oracle_equivalence(&mut stats),
        hand_fixture(),
        standoff_round_trip(),
        bio_round_trip(),
        augmentation_pipeline(),
        closed_loop(&mut stats),
    ];
    let violations = if stats.monotonicity_violations == 0 {
        Vec::new()
    } else {
        vec![format!("{} report(s)", stats.monotonicity_violations)]
    };
    results.push(outcome(
        "lenient >= strict",
        &violations,
        format!(
            "lenient micro tp >= strict micro tp in all {} randomized and closed-loop reports \
             (both tasks)",
            stats.monotonicity_checks
        ),
    ));
    let mut all = true;
    for r in &results {
        all &= r.pass;
        println!(
            "{} {}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
