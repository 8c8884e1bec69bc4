//! Fuzz harness bodies. Each takes raw bytes, feeds them to one parser or decoder entry point
//! and asserts the invariants its output must hold. Shared with the seed replay test.

use medaug::augment::{parse_chat_response, read_records, write_records, AugmentConfig};
use medaug::baseline::SyntheticSpec;
use medaug::corpus::{
    parse_document, parse_manifest, parse_standoff, parse_standoff_lenient, serialize_annotations,
    validate_document, AnnotatedDocument, MentionSpan,
};
use medaug::evalkit::MetricsReport;
use medaug::textproc::{
    decode_bio, parse_conll, split_sentences, tokenize, write_conll, BioTag, Decoded,
    TaggedSequence, Token,
};

fn utf8(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

fn slice(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end - start).collect()
}

fn check_spans(decoded: &Decoded, limit: usize) {
    let mut last = 0;
    for s in &decoded.spans {
        assert!(s.start < s.end && s.end <= limit, "bad span {s:?}");
        assert!(s.start >= last, "spans out of order");
        last = s.end;
    }
}

pub fn standoff(data: &[u8]) {
    let Some(src) = utf8(data) else { return };
    let (lenient, errors) = parse_standoff_lenient(src);
    match parse_standoff(src) {
        Ok(strict) => {
            assert!(errors.is_empty());
            assert_eq!(strict, lenient);
        }
        Err(_) => assert!(!errors.is_empty()),
    }
    for w in lenient.windows(2) {
        assert!(w[0].line < w[1].line);
    }
}

/// Input is `<text>\0<annotations>`.
pub fn document(data: &[u8]) {
    let Some(src) = utf8(data) else { return };
    let (text, ann) = src.split_once('\0').unwrap_or((src, ""));
    let Ok(doc) = parse_document("fuzz", text, ann) else {
        return;
    };
    let len = doc.char_len();
    for m in &doc.mentions {
        assert!(m.start < m.end && m.end <= len);
        assert_eq!(slice(&doc.text, m.start, m.end), m.surface);
    }
    let again = parse_document("fuzz", &doc.text, &serialize_annotations(&doc))
        .expect("serialized annotations parse");
    assert_eq!(again, doc);
    let _ = validate_document(&doc);
}

pub fn manifest(data: &[u8]) {
    let Some(src) = utf8(data) else { return };
    if let Ok(rows) = parse_manifest(src) {
        for (id, _) in rows {
            assert!(!id.is_empty());
        }
    }
}

pub fn conll(data: &[u8]) {
    let Some(src) = utf8(data) else { return };
    let Ok(blocks) = parse_conll(src) else { return };
    let seqs: Vec<TaggedSequence> = blocks.iter().map(|b| b.to_sequence()).collect();
    for seq in &seqs {
        assert_eq!(seq.tokens.len(), seq.tags.len());
        let limit = seq.tokens.iter().map(|t| t.end).max().unwrap_or(0);
        check_spans(&decode_bio(seq), limit.max(1));
    }
    if blocks.iter().all(|b| b.doc_id.is_some()) {
        let written = write_conll(seqs.iter().map(|s| (s, 0)));
        let reparsed = parse_conll(&written).expect("written conll parses");
        assert_eq!(reparsed, blocks);
    }
}

/// Whitespace-separated tags, decoded over one-char tokens `a a a ...`.
pub fn bio_tags(data: &[u8]) {
    let Some(src) = utf8(data) else { return };
    let mut tags = Vec::new();
    for word in src.split_whitespace() {
        if let Ok(tag) = word.parse::<BioTag>() {
            assert_eq!(tag.to_string(), word);
            tags.push(tag);
        }
    }
    let tokens: Vec<Token> = (0..tags.len())
        .map(|i| Token {
            surface: "a".into(),
            start: 2 * i,
            end: 2 * i + 1,
        })
        .collect();
    let text = vec!["a"; tags.len()].join(" ");
    let begins = tags.iter().filter(|t| matches!(t, BioTag::B(_))).count();
    let inside = tags.iter().filter(|t| **t != BioTag::O).count();
    let seq = TaggedSequence {
        doc_id: "fuzz".into(),
        tokens,
        tags,
    };
    let decoded = decode_bio(&seq);
    check_spans(&decoded, text.chars().count().max(1));
    assert!(decoded.spans.len() >= begins && decoded.spans.len() <= inside);
    assert_eq!(decoded.spans.len(), begins + decoded.repairs);
    let _ = decoded.to_mentions(&text);
}

pub fn chat_response(data: &[u8]) {
    let Some(src) = utf8(data) else { return };
    if let Ok(content) = parse_chat_response(src) {
        assert!(!content.trim().is_empty());
    }
}

pub fn records(data: &[u8]) {
    let Some(src) = utf8(data) else { return };
    let Ok(records) = read_records(src) else {
        return;
    };
    let again = read_records(&write_records(&records)).expect("written records parse");
    assert_eq!(again, records);
}

/// Tokenize and sentence-split, with a mention on every third alphanumeric token.
pub fn text(data: &[u8]) {
    let Some(src) = utf8(data) else { return };
    let tokens = tokenize(src);
    let mut last = 0;
    for t in &tokens {
        assert!(t.start >= last && t.start < t.end);
        assert_eq!(slice(src, t.start, t.end), t.surface);
        assert!(!t.surface.chars().any(char::is_whitespace));
        last = t.end;
    }
    let mentions: Vec<MentionSpan> = tokens
        .iter()
        .filter(|t| t.surface.chars().all(char::is_alphanumeric))
        .step_by(3)
        .enumerate()
        .map(|(i, t)| {
            MentionSpan::new(
                format!("T{}", i + 1),
                t.start,
                t.end,
                t.surface.clone(),
                medaug::EventLabel::Undetermined,
            )
        })
        .collect();
    let count = mentions.len();
    let Ok(doc) = AnnotatedDocument::new("fuzz", src, mentions) else {
        return;
    };
    let units = split_sentences(&doc);
    let mut last = 0;
    let mut seen = 0;
    for u in &units {
        assert!(u.start >= last && u.start < u.end && u.end <= doc.char_len());
        assert_eq!(slice(src, u.start, u.end), u.text);
        assert!(slice(src, last, u.start).chars().all(char::is_whitespace));
        for m in &u.mentions {
            assert!(m.end <= u.end - u.start);
            assert_eq!(slice(&u.text, m.start, m.end), m.surface);
        }
        seen += u.mentions.len();
        last = u.end;
    }
    assert_eq!(seen, count);
}

pub fn report(data: &[u8]) {
    let Some(src) = utf8(data) else { return };
    let Ok(report) = MetricsReport::from_json(src) else {
        return;
    };
    let json = report.to_json();
    let again = MetricsReport::from_json(&json).expect("written report parses");
    assert_eq!(again.to_json(), json);
}

/// First byte picks the config type; the rest is TOML.
pub fn configs(data: &[u8]) {
    let Some((&which, rest)) = data.split_first() else {
        return;
    };
    let Some(src) = utf8(rest) else { return };
    if which % 2 == 0 {
        if let Ok(spec) = SyntheticSpec::from_toml(src) {
            assert!(spec.validate().is_ok());
        }
    } else if let Ok(cfg) = AugmentConfig::from_toml(src) {
        assert!(cfg.validate().is_ok());
    }
}
