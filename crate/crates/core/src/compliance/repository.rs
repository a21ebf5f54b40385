//! Line-oriented compliance repository file.
//!
//! ```text
//! tuple := principal ';' domain ';' rule ('|' rule)* ';' receiver (',' receiver)* ';' sensitivity ';' validated
//! rule  := modality ':' action ':' condition ':' citation
//! ```
//!
//! Lines starting with `#` are comments. A backslash escapes the next
//! character; writers escape only the delimiters that are significant in a
//! field's position, so hand-written files survive a load/save cycle
//! byte for byte.

use std::path::Path;

use crate::canon::{Domain, Principal};
use crate::error::{Error, Result};
use crate::model::{ComplianceTuple, RuleClause};

const SHIPPED: &str = include_str!("../../data/compliance_repository.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
enum Line {
    /// Comment or blank line, kept verbatim.
    Verbatim(String),
    Tuple(ComplianceTuple),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComplianceRepository {
    lines: Vec<Line>,
    trailing_newline: bool,
}

fn escape(field: &str, specials: &[char]) -> String {
    let mut out = String::with_capacity(field.len());
    for ch in field.chars() {
        if ch == '\\' || specials.contains(&ch) {
            out.push('\\');
        }
        match ch {
            '\n' => out.push('n'),
            '\r' => out.push('r'),
            c => out.push(c),
        }
    }
    out
}

/// Splits on unescaped `delim`, leaving escapes in place.
fn split_escaped(s: &str, delim: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut escaped = false;
    for (i, ch) in s.char_indices() {
        if escaped {
            escaped = false;
        } else if ch == '\\' {
            escaped = true;
        } else if ch == delim {
            parts.push(&s[start..i]);
            start = i + ch.len_utf8();
        }
    }
    parts.push(&s[start..]);
    parts
}

fn unescape(s: &str, line: usize) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(ch) = chars.next() {
        if ch == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('r') => out.push('\r'),
                Some(c) => out.push(c),
                None => return Err(Error::parse(line, "dangling escape at end of field")),
            }
        } else {
            out.push(ch);
        }
    }
    Ok(out)
}

fn escape_head(field: &str) -> String {
    let escaped = escape(field, &[';']);
    if escaped.starts_with('#') {
        format!("\\{escaped}")
    } else {
        escaped
    }
}

pub fn format_tuple(t: &ComplianceTuple) -> String {
    let rules: Vec<String> = t
        .rules
        .iter()
        .map(|r| {
            let f = |s: &str| escape(s, &[';', '|', ':']);
            format!(
                "{}:{}:{}:{}",
                r.modality.as_str(),
                r.action.as_str(),
                f(&r.condition),
                f(&r.citation)
            )
        })
        .collect();
    let receivers: Vec<String> = t
        .receiving_entities
        .iter()
        .map(|r| escape(r, &[';', ',']))
        .collect();
    format!(
        "{};{};{};{};{};{}",
        escape_head(&t.data_principal),
        escape(&t.domain, &[';']),
        rules.join("|"),
        receivers.join(","),
        t.sensitivity,
        t.validated
    )
}

pub fn parse_tuple(line: &str, line_no: usize) -> Result<ComplianceTuple> {
    let fields = split_escaped(line, ';');
    if fields.len() != 6 {
        return Err(Error::parse(
            line_no,
            format!("expected 6 `;`-separated fields, found {}", fields.len()),
        ));
    }
    let rules = split_escaped(fields[2], '|')
        .into_iter()
        .map(|raw| {
            let parts = split_escaped(raw, ':');
            if parts.len() != 4 {
                return Err(Error::parse(
                    line_no,
                    format!("rule `{raw}` needs modality:action:condition:citation"),
                ));
            }
            RuleClause::new(
                parts[0]
                    .parse()
                    .map_err(|e: Error| Error::parse(line_no, e.to_string()))?,
                parts[1]
                    .parse()
                    .map_err(|e: Error| Error::parse(line_no, e.to_string()))?,
                unescape(parts[2], line_no)?,
                unescape(parts[3], line_no)?,
            )
            .map_err(|e| Error::parse(line_no, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let receiving_entities = split_escaped(fields[3], ',')
        .into_iter()
        .map(|r| unescape(r, line_no))
        .collect::<Result<Vec<_>>>()?;
    let validated = match fields[5] {
        "true" => true,
        "false" => false,
        other => {
            return Err(Error::parse(
                line_no,
                format!("validated must be true/false, got `{other}`"),
            ))
        }
    };
    let tuple = ComplianceTuple {
        data_principal: unescape(fields[0], line_no)?,
        domain: unescape(fields[1], line_no)?,
        rules,
        receiving_entities,
        sensitivity: fields[4]
            .parse()
            .map_err(|e: Error| Error::parse(line_no, e.to_string()))?,
        validated,
    };
    tuple
        .validate()
        .map_err(|e| Error::parse(line_no, e.to_string()))?;
    Ok(tuple)
}

impl ComplianceRepository {
    pub fn new() -> Self {
        ComplianceRepository {
            lines: Vec::new(),
            trailing_newline: true,
        }
    }

    pub fn from_tuples(tuples: impl IntoIterator<Item = ComplianceTuple>) -> Self {
        let mut repo = Self::new();
        for t in tuples {
            repo.push(t);
        }
        repo
    }

    /// The curated repository shipped with the crate.
    pub fn shipped() -> Self {
        Self::parse(SHIPPED).expect("shipped repository parses")
    }

    pub fn shipped_text() -> &'static str {
        SHIPPED
    }

    pub fn push(&mut self, tuple: ComplianceTuple) {
        self.lines.push(Line::Tuple(tuple));
    }

    pub fn push_comment(&mut self, comment: &str) {
        for line in comment.lines() {
            self.lines.push(Line::Verbatim(format!("# {line}")));
        }
    }

    pub fn tuples(&self) -> impl Iterator<Item = &ComplianceTuple> {
        self.lines.iter().filter_map(|l| match l {
            Line::Tuple(t) => Some(t),
            Line::Verbatim(_) => None,
        })
    }

    pub fn len(&self) -> usize {
        self.tuples().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tuples whose canonical (domain, principal) equal the given pair.
    pub fn matching(&self, domain: &Domain, principal: &Principal) -> Vec<&ComplianceTuple> {
        self.tuples()
            .filter(|t| &t.canonical_domain() == domain && &t.principal() == principal)
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Vec::new();
        for (idx, raw) in text.split('\n').enumerate() {
            lines.push((idx + 1, raw));
        }
        let trailing_newline = text.ends_with('\n');
        if trailing_newline {
            lines.pop();
        }
        let mut repo = ComplianceRepository {
            lines: Vec::with_capacity(lines.len()),
            trailing_newline,
        };
        for (line_no, raw) in lines {
            if raw.trim().is_empty() || raw.starts_with('#') {
                repo.lines.push(Line::Verbatim(raw.to_string()));
            } else {
                repo.lines.push(Line::Tuple(parse_tuple(raw, line_no)?));
            }
        }
        Ok(repo)
    }

    pub fn to_text(&self) -> String {
        let mut out = self
            .lines
            .iter()
            .map(|l| match l {
                Line::Verbatim(s) => s.clone(),
                Line::Tuple(t) => format_tuple(t),
            })
            .collect::<Vec<_>>()
            .join("\n");
        if self.trailing_newline && !self.lines.is_empty() {
            out.push('\n');
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
