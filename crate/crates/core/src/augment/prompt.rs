use std::path::{Path, PathBuf};

use crate::textproc::SentenceUnit;

pub const DEFAULT_TEMPLATE_ID: &str = "default";

const TEXT: &str = "{TEXT}";
const ENTITY_LIST: &str = "{ENTITY_LIST}";

const DEFAULT_BODY: &str = "Paraphrase the following sentence from a clinical note. \
Keep each of these medication names exactly as written, and keep how many times each one \
appears: {ENTITY_LIST}. Do not add or remove medications and do not change what is being \
done with them or the patient's condition. Return only the paraphrased sentence.\n\n\
Sentence: {TEXT}\n";

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("template `{id}` is missing the {placeholder} placeholder")]
    MissingPlaceholder {
        id: String,
        placeholder: &'static str,
    },
    #[error("template `{id}` not found (looked for {path})")]
    NotFound { id: String, path: PathBuf },
    #[error("cannot read template {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub template_id: String,
    pub body: String,
}

impl PromptTemplate {
    pub fn new(
        template_id: impl Into<String>,
        body: impl Into<String>,
    ) -> Result<Self, TemplateError> {
        let t = PromptTemplate {
            template_id: template_id.into(),
            body: body.into(),
        };
        for placeholder in [TEXT, ENTITY_LIST] {
            if !t.body.contains(placeholder) {
                return Err(TemplateError::MissingPlaceholder {
                    id: t.template_id,
                    placeholder,
                });
            }
        }
        Ok(t)
    }

    pub fn builtin() -> Self {
        PromptTemplate::new(DEFAULT_TEMPLATE_ID, DEFAULT_BODY).expect("built-in template")
    }

    /// Look up `<dir>/<id>.txt`. The `default` id falls back to the built-in template when no
    /// such file exists.
    pub fn load(dir: Option<&Path>, id: &str) -> Result<Self, TemplateError> {
        let path = dir.map(|d| d.join(format!("{id}.txt")));
        match path {
            Some(p) if p.is_file() => {
                let body = std::fs::read_to_string(&p).map_err(|source| TemplateError::Io {
                    path: p.clone(),
                    source,
                })?;
                PromptTemplate::new(id, body)
            }
            _ if id == DEFAULT_TEMPLATE_ID => Ok(PromptTemplate::builtin()),
            p => Err(TemplateError::NotFound {
                id: id.into(),
                path: p.unwrap_or_else(|| PathBuf::from(format!("{id}.txt"))),
            }),
        }
    }
}

/// Unit mention surfaces, deduplicated case-insensitively in source order.
pub(crate) fn entity_names(unit: &SentenceUnit) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    unit.mentions
        .iter()
        .filter(|m| seen.insert(crate::text::normalize_ws_lower(&m.surface)))
        .map(|m| m.surface.clone())
        .collect()
}

/// Substitute both placeholders in one left-to-right pass. Braces in the unit text, and any
/// other brace sequence in the template, are copied through unchanged.
pub fn render_prompt(t: &PromptTemplate, unit: &SentenceUnit) -> String {
    let entities = entity_names(unit).join(", ");
    let mut out = String::with_capacity(t.body.len() + unit.text.len() + entities.len());
    let mut rest = t.body.as_str();
    while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        if let Some(after) = tail.strip_prefix(TEXT) {
            out.push_str(&unit.text);
            rest = after;
        } else if let Some(after) = tail.strip_prefix(ENTITY_LIST) {
            out.push_str(&entities);
            rest = after;
        } else {
            out.push('{');
            rest = &tail[1..];
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EventLabel, MentionSpan};

    fn unit(text: &str, mentions: &[(usize, usize, &str)]) -> SentenceUnit {
        SentenceUnit {
            doc_id: "d".into(),
            start: 0,
            end: text.chars().count(),
            text: text.into(),
            mentions: mentions
                .iter()
                .enumerate()
                .map(|(i, &(s, e, surf))| {
                    MentionSpan::new(format!("T{}", i + 1), s, e, surf, EventLabel::Disposition)
                })
                .collect(),
        }
    }

    #[test]
    fn substitutes_both_placeholders() {
        let t = PromptTemplate::new("t", "Rephrase: {TEXT}. Keep: {ENTITY_LIST}").unwrap();
        let u = unit("Start Lipitor 20mg daily.", &[(6, 13, "Lipitor")]);
        assert_eq!(
            render_prompt(&t, &u),
            "Rephrase: Start Lipitor 20mg daily.. Keep: Lipitor"
        );
    }

    #[test]
    fn lists_every_entity_once() {
        let t = PromptTemplate::builtin();
        let u = unit(
            "Stop aspirin, start Lipitor, lipitor again.",
            &[(5, 12, "aspirin"), (20, 27, "Lipitor"), (29, 36, "lipitor")],
        );
        let p = render_prompt(&t, &u);
        assert!(p.contains("aspirin, Lipitor."));
        assert!(!p.contains("Lipitor, lipitor."));
    }

    #[test]
    fn braces_pass_through() {
        let t = PromptTemplate::new("t", "{x} {TEXT} {ENTITY_LIST}{").unwrap();
        let u = unit("dose {ENTITY_LIST} {TEXT}", &[]);
        assert_eq!(render_prompt(&t, &u), "{x} dose {ENTITY_LIST} {TEXT} {");
    }

    #[test]
    fn placeholders_required() {
        assert!(matches!(
            PromptTemplate::new("t", "only {TEXT}"),
            Err(TemplateError::MissingPlaceholder {
                placeholder: "{ENTITY_LIST}",
                ..
            })
        ));
    }

    #[test]
    fn load_from_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("short.txt"), "{TEXT} / {ENTITY_LIST}").unwrap();
        assert_eq!(
            PromptTemplate::load(Some(dir.path()), "short")
                .unwrap()
                .body,
            "{TEXT} / {ENTITY_LIST}"
        );
        assert_eq!(
            PromptTemplate::load(Some(dir.path()), "default").unwrap(),
            PromptTemplate::builtin()
        );
        assert!(PromptTemplate::load(None, "missing").is_err());
    }
}
