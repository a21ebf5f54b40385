//! Sentence-level rule extraction.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::compliance::ner::{EntityKind, EntityMention};
use crate::compliance::segment::SectionUnit;
use crate::model::{Modality, RuleAction, RuleClause};

/// A rule plus extraction bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedRule {
    pub clause: RuleClause,
    /// The source sentence, verbatim.
    pub sentence: String,
    /// Byte span of the sentence within the section body.
    pub span: (usize, usize),
    /// Set when a modality was found but no condition could be extracted.
    pub needs_review: bool,
}

const ABBREVIATIONS: &[&str] = &["e.g.", "i.e.", "etc.", "sec.", "viz.", "no.", "cl."];

/// Byte spans of sentences in `text`.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let lower = text.to_ascii_lowercase();
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if matches!(b, b'.' | b'!' | b'?' | b';') {
            let at_end = i + 1 == bytes.len() || bytes[i + 1].is_ascii_whitespace();
            let abbreviation = b == b'.'
                && ABBREVIATIONS.iter().any(|a| {
                    let end = i + 1;
                    end >= a.len()
                        && lower[..end].ends_with(a)
                        && (end == a.len() || !bytes[end - a.len() - 1].is_ascii_alphanumeric())
                        // "No." only counts when a number follows
                        && (*a != "no." || lower[end..].trim_start().starts_with(|c: char| c.is_ascii_digit()))
                });
            if at_end && !abbreviation {
                push_trimmed(text, start, i + 1, &mut spans);
                start = i + 1;
            }
        }
        i += 1;
    }
    push_trimmed(text, start, bytes.len(), &mut spans);
    spans
}

fn push_trimmed(text: &str, start: usize, end: usize, spans: &mut Vec<(usize, usize)>) {
    let slice = &text[start..end];
    let lead = slice.len() - slice.trim_start().len();
    let trimmed = slice.trim();
    if !trimmed.is_empty() {
        spans.push((start + lead, start + lead + trimmed.len()));
    }
}

struct Trigger {
    modality: Modality,
    /// Byte range of the trigger within the sentence.
    start: usize,
    end: usize,
}

fn regexes() -> &'static [(Modality, Regex)] {
    static RES: OnceLock<Vec<(Modality, Regex)>> = OnceLock::new();
    RES.get_or_init(|| {
        let table: &[(Modality, &str)] = &[
            (
                Modality::OnlyIf,
                r"(?i)\bonly\b[^.;]*?\b(?:with|if|when|in|after|upon|by|under|for)\b|\bunless\b|\bexcept\s+(?:with|where|when)\b",
            ),
            (
                Modality::MustNot,
                r"(?i)\b(?:shall|must|may)\s+not\b|\bcannot\b|\bcan\s+not\b|^\s*(?:no|not|never)\b",
            ),
            (Modality::May, r"(?i)\bmay\b"),
            (Modality::Must, r"(?i)\b(?:shall|must)\b"),
        ];
        table
            .iter()
            .map(|(m, p)| (*m, Regex::new(p).expect("modality regex compiles")))
            .collect()
    })
}

fn citation_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\b(?:Sec(?:tion)?|SECTION)\.?\s*\d+[A-Z]?(?:\s*\(\s*[0-9a-z]+(?:\s*[–-]\s*[0-9a-z]+)?\s*\))*")
            .expect("citation regex compiles")
    })
}

fn find_trigger(sentence: &str) -> Option<Trigger> {
    regexes().iter().find_map(|(modality, re)| {
        re.find(sentence).map(|m| Trigger {
            modality: *modality,
            start: m.start(),
            end: m.end(),
        })
    })
}

fn clean_condition(raw: &str) -> String {
    raw.trim()
        .trim_end_matches(['.', ';', '!', '?', ','])
        .trim()
        .to_string()
}

fn action_from_canonical(canonical: &str) -> Option<RuleAction> {
    match canonical {
        "collection" => Some(RuleAction::Collect),
        "processing" => Some(RuleAction::Process),
        "sharing" => Some(RuleAction::Share),
        "erasure" => Some(RuleAction::Erase),
        _ => None,
    }
}

fn span_distance(a: (usize, usize), b: (usize, usize)) -> usize {
    b.0.saturating_sub(a.1).max(a.0.saturating_sub(b.1))
}

/// Nearest statutory reference to `sentence` in the body, else the heading's
/// own section reference, else empty.
fn nearest_citation(section: &SectionUnit, sentence: (usize, usize)) -> String {
    let body_hit = citation_regex()
        .find_iter(&section.body)
        .min_by_key(|m| span_distance((m.start(), m.end()), sentence));
    if let Some(m) = body_hit {
        return m.as_str().trim().to_string();
    }
    citation_regex()
        .find(&section.heading)
        .map(|m| m.as_str().trim().trim_end_matches('.').to_string())
        .unwrap_or_default()
}

pub fn extract_rules(section: &SectionUnit, mentions: &[EntityMention]) -> Vec<ExtractedRule> {
    let mut rules = Vec::new();
    for (s, e) in sentence_spans(&section.body) {
        let sentence = &section.body[s..e];
        let Some(trigger) = find_trigger(sentence) else {
            continue;
        };
        let trigger_abs = s + trigger.start;
        let action = mentions
            .iter()
            .filter(|m| m.kind == EntityKind::Action && m.offset >= s && m.end() <= e)
            .min_by_key(|m| m.offset.abs_diff(trigger_abs))
            .and_then(|m| action_from_canonical(&m.canonical))
            .unwrap_or(RuleAction::Share);
        let condition = clean_condition(&sentence[trigger.end..]);
        let citation = nearest_citation(section, (s, e));
        let (modality, needs_review) = if condition.is_empty() {
            (Modality::May, true)
        } else {
            (trigger.modality, false)
        };
        rules.push(ExtractedRule {
            clause: RuleClause {
                modality,
                action,
                condition,
                citation,
            },
            sentence: sentence.to_string(),
            span: (s, e),
            needs_review,
        });
    }
    rules
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compliance::ner::{recognize_entities, Gazetteer};
    use crate::compliance::segment::Theme;

    fn run(body: &str) -> Vec<ExtractedRule> {
        let section = SectionUnit {
            theme: Theme::Other,
            heading: String::new(),
            body: body.to_string(),
            span: (0, body.len()),
        };
        let mentions = recognize_entities(&section, &Gazetteer::regulation_entities());
        extract_rules(&section, &mentions)
    }

    #[test]
    fn explicit_consent_row() {
        let rules = run(
            "Only with explicit consent. Can be shared with doctors or insurers under Sec 7(f–g) for emergencies or treatment.",
        );
        assert_eq!(rules.len(), 1);
        let c = &rules[0].clause;
        assert_eq!(c.modality, Modality::OnlyIf);
        assert_eq!(c.action, RuleAction::Share);
        assert_eq!(c.condition, "explicit consent");
        assert_eq!(c.citation, "Sec 7(f–g)");
        assert!(!rules[0].needs_review);
    }

    #[test]
    fn no_marketing_sharing() {
        let rules = run("No marketing-based sharing.");
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].clause.modality, Modality::MustNot);
        assert_eq!(rules[0].clause.action, RuleAction::Share);
        assert_eq!(rules[0].clause.condition, "marketing-based sharing");
    }

    #[test]
    fn sentence_without_modality_yields_nothing() {
        assert!(run("Personal data is information about a person.").is_empty());
    }

    #[test]
    fn nearest_action_is_used() {
        let rules = run("The Data Fiduciary shall erase personal data upon withdrawal of consent.");
        assert_eq!(rules[0].clause.modality, Modality::Must);
        assert_eq!(rules[0].clause.action, RuleAction::Erase);
        assert_eq!(
            rules[0].clause.condition,
            "erase personal data upon withdrawal of consent"
        );
    }

    #[test]
    fn shall_not_beats_shall() {
        let rules = run("A Data Fiduciary shall not process data of a child for tracking.");
        assert_eq!(rules[0].clause.modality, Modality::MustNot);
        assert_eq!(rules[0].clause.action, RuleAction::Process);
    }

    #[test]
    fn unless_is_only_if() {
        let rules = run("Data shall not be shared unless the Data Principal consents.");
        assert_eq!(rules[0].clause.modality, Modality::OnlyIf);
        assert_eq!(rules[0].clause.condition, "the Data Principal consents");
    }

    #[test]
    fn empty_clause_is_downgraded_and_flagged() {
        let rules = run("The Board shall.");
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].clause.modality, Modality::May);
        assert!(rules[0].clause.condition.is_empty());
        assert!(rules[0].needs_review);
    }

    #[test]
    fn citation_falls_back_to_heading() {
        let section = SectionUnit {
            theme: Theme::Consent,
            heading: "Section 6. Consent".into(),
            body: "Consent must be free and specific.".into(),
            span: (0, 10),
        };
        let rules = extract_rules(&section, &[]);
        assert_eq!(rules[0].clause.citation, "Section 6");
    }

    #[test]
    fn abbreviations_do_not_split() {
        let spans = sentence_spans("Entities (e.g. NGOs) may share. Next one.");
        assert_eq!(spans.len(), 2);
    }
}
