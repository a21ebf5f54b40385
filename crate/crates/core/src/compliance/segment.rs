use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theme {
    Consent,
    UserRights,
    FiduciaryObligations,
    CrossBorderTransfer,
    Other,
}

impl fmt::Display for Theme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Theme::Consent => "Consent",
            Theme::UserRights => "UserRights",
            Theme::FiduciaryObligations => "FiduciaryObligations",
            Theme::CrossBorderTransfer => "CrossBorderTransfer",
            Theme::Other => "Other",
        };
        f.write_str(s)
    }
}

/// A contiguous unit of the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionUnit {
    pub theme: Theme,
    pub heading: String,
    pub body: String,
    /// Byte offsets `[start, end)` into the segmented text.
    pub span: (usize, usize),
}

/// Heading patterns, matched at paragraph starts.
#[derive(Debug, Clone)]
pub struct HeadingPatterns {
    patterns: Vec<Regex>,
}

impl HeadingPatterns {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self> {
        let patterns = patterns
            .iter()
            .map(|p| {
                let p = p.as_ref();
                let anchored = if p.starts_with('^') {
                    p.to_string()
                } else {
                    format!("^(?:{p})")
                };
                Regex::new(&anchored)
                    .map_err(|e| Error::Config(format!("heading pattern `{p}`: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(HeadingPatterns { patterns })
    }

    /// Length of the heading marker at the start of `paragraph`, if any.
    fn marker_len(&self, paragraph: &str) -> Option<usize> {
        self.patterns
            .iter()
            .filter_map(|re| re.find(paragraph).map(|m| m.end()))
            .max()
    }
}

impl Default for HeadingPatterns {
    fn default() -> Self {
        HeadingPatterns::new(&[
            r"(?:Section|SECTION|Chapter|CHAPTER)\s+\d+[A-Z]?\.?",
            r"\d+\.\s",
        ])
        .expect("default heading patterns compile")
    }
}

const THEME_KEYWORDS: &[(Theme, &[&str])] = &[
    (Theme::Consent, &["consent", "consents"]),
    (Theme::UserRights, &["right", "rights"]),
    (
        Theme::FiduciaryObligations,
        &["fiduciary", "fiduciaries", "obligation", "obligations"],
    ),
    (
        Theme::CrossBorderTransfer,
        &[
            "outside india",
            "territory",
            "territories",
            "cross-border",
            "cross border",
        ],
    ),
];

const HEADING_WEIGHT: usize = 3;

fn count_phrase(haystack: &str, phrase: &str) -> usize {
    let bytes = haystack.as_bytes();
    let is_word = |b: u8| b.is_ascii_alphanumeric();
    haystack
        .match_indices(phrase)
        .filter(|(i, m)| {
            let before_ok = *i == 0 || !is_word(bytes[i - 1]);
            let end = i + m.len();
            let after_ok = end == bytes.len() || !is_word(bytes[end]);
            before_ok && after_ok
        })
        .count()
}

/// Keyword vote; heading hits weigh more than body hits. Ties resolve in
/// declaration order.
pub fn classify_theme(heading: &str, body: &str) -> Theme {
    let heading = heading.to_ascii_lowercase();
    let body = body.to_ascii_lowercase();
    let mut best = (0usize, Theme::Other);
    for (theme, words) in THEME_KEYWORDS {
        let score: usize = words
            .iter()
            .map(|w| HEADING_WEIGHT * count_phrase(&heading, w) + count_phrase(&body, w))
            .sum();
        if score > best.0 {
            best = (score, *theme);
        }
    }
    best.1
}

/// Byte spans of paragraphs (runs of non-blank lines).
fn paragraph_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if content.trim().is_empty() {
            if let Some(s) = start.take() {
                spans.push((s, end));
            }
        } else {
            let lead = content.len() - content.trim_start().len();
            if start.is_none() {
                start = Some(offset + lead);
            }
            end = offset + content.trim_end().len();
        }
        offset += line.len();
    }
    if let Some(s) = start {
        spans.push((s, end));
    }
    spans
}

/// Heading part of a heading paragraph: the marker plus the title words up to
/// the first sentence break.
fn split_heading(paragraph: &str, marker_len: usize) -> usize {
    let rest = &paragraph[marker_len..];
    let mut cut = paragraph.len();
    for delim in [". ", ": ", " — ", " - "] {
        if let Some(i) = rest.find(delim) {
            cut = cut.min(marker_len + i);
        }
    }
    cut
}

pub fn segment_sections(text: &str, patterns: &HeadingPatterns) -> Vec<SectionUnit> {
    let paragraphs = paragraph_spans(text);
    if paragraphs.is_empty() {
        return Vec::new();
    }
    let starts: Vec<(usize, usize)> = paragraphs
        .iter()
        .filter_map(|&(s, e)| patterns.marker_len(&text[s..e]).map(|m| (s, m)))
        .collect();
    let text_end = paragraphs.last().map(|p| p.1).unwrap_or(0);

    let mut units = Vec::new();
    if starts.is_empty() {
        let (s, e) = (paragraphs[0].0, text_end);
        units.push(SectionUnit {
            theme: Theme::Other,
            heading: String::new(),
            body: text[s..e].to_string(),
            span: (s, e),
        });
        return units;
    }

    if paragraphs[0].0 < starts[0].0 {
        let s = paragraphs[0].0;
        let e = text[..starts[0].0].trim_end().len();
        units.push(SectionUnit {
            theme: Theme::Other,
            heading: String::new(),
            body: text[s..e].to_string(),
            span: (s, e),
        });
    }

    for (i, &(start, marker)) in starts.iter().enumerate() {
        let end = match starts.get(i + 1) {
            Some(&(next, _)) => text[..next].trim_end().len(),
            None => text_end,
        };
        let first_para_end = paragraphs
            .iter()
            .find(|p| p.0 == start)
            .map(|p| p.1)
            .unwrap_or(end);
        let heading_end = start + split_heading(&text[start..first_para_end], marker);
        let heading = text[start..heading_end].trim().to_string();
        let body = text[heading_end..end]
            .trim_start_matches(['.', ':', ' ', '-', '—'])
            .trim()
            .to_string();
        units.push(SectionUnit {
            theme: classify_theme(&heading, &body),
            heading,
            body,
            span: (start, end),
        });
    }
    units
}
