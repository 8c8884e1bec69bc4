use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

fn flush(run: &mut Option<(usize, String)>, tokens: &mut Vec<Token>, end: usize) {
    if let Some((start, surface)) = run.take() {
        tokens.push(Token {
            surface,
            start,
            end,
        });
    }
}

/// Split text into maximal alphanumeric runs and single punctuation characters. Whitespace
/// separates tokens and never belongs to one. Offsets are char offsets into `text`.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run: Option<(usize, String)> = None;
    let mut pos = 0;
    for c in text.chars() {
        if c.is_alphanumeric() {
            run.get_or_insert_with(|| (pos, String::new())).1.push(c);
        } else {
            flush(&mut run, &mut tokens, pos);
            if !c.is_whitespace() {
                tokens.push(Token {
                    surface: c.to_string(),
                    start: pos,
                    end: pos + 1,
                });
            }
        }
        pos += 1;
    }
    flush(&mut run, &mut tokens, pos);
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tok(s: &str, a: usize, b: usize) -> Token {
        Token {
            surface: s.into(),
            start: a,
            end: b,
        }
    }

    #[test]
    fn lipitor_dose() {
        assert_eq!(
            tokenize("Lipitor 20mg."),
            vec![tok("Lipitor", 0, 7), tok("20mg", 8, 12), tok(".", 12, 13)]
        );
    }

    #[test]
    fn empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" \n\t").is_empty());
    }

    #[test]
    fn unicode_offsets_are_chars() {
        let t = tokenize("Évite l'aspirine");
        assert_eq!(t[0], tok("Évite", 0, 5));
        assert_eq!(t[1], tok("l", 6, 7));
        assert_eq!(t[2], tok("'", 7, 8));
        assert_eq!(t[3], tok("aspirine", 8, 16));
    }

    proptest! {
        #[test]
        fn surfaces_plus_gaps_reproduce_text(s in "[a-zA-Z0-9 .,;:()\\-\n\téß]{0,60}") {
            let chars: Vec<char> = s.chars().collect();
            let tokens = tokenize(&s);
            let mut rebuilt = String::new();
            let mut pos = 0;
            for t in &tokens {
                prop_assert!(t.start < t.end);
                prop_assert!(t.start >= pos);
                let gap: String = chars[pos..t.start].iter().collect();
                prop_assert!(gap.chars().all(char::is_whitespace));
                rebuilt.push_str(&gap);
                let surface: String = chars[t.start..t.end].iter().collect();
                prop_assert_eq!(&surface, &t.surface);
                prop_assert!(!surface.chars().any(char::is_whitespace));
                rebuilt.push_str(&t.surface);
                pos = t.end;
            }
            rebuilt.extend(&chars[pos..]);
            prop_assert_eq!(&rebuilt, &s);
            prop_assert_eq!(tokenize(&s), tokens);
        }
    }
}
