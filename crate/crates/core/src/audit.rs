//! Compliance justification report and trace verification.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::anonymize::{anonymisation_score, cell_distance, ColumnContext, TransformResult};
use crate::canon::{Domain, Principal};
use crate::error::Result;
use crate::model::{
    AccessRequest, AnonymizationAction, AttributeClass, AuditEntry, Cell, DataProfile,
    SensitivityLevel, Strategy, TrustLevel,
};
use crate::sensitivity::{AttributeFinding, SensitivityFinding, DEFAULT_LOW_RULE};
use crate::store::{DatasetMetadata, TableSlice};

pub const REPORT_TITLE: &str = "Context-Aware Anonymization and Compliance Justification";
pub const STRUCTURED_MARKER: &str = "--- structured ---";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeLine {
    pub name: String,
    pub class: AttributeClass,
    pub action: String,
    pub level: Option<SensitivityLevel>,
    pub citations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub request_id: String,
    pub requester: String,
    pub trust: TrustLevel,
    pub purpose: String,
    pub dataset: String,
    pub owner: String,
    pub domain: String,
    pub attributes: Vec<AttributeLine>,
    pub sensitivity: SensitivityLevel,
    pub defaulted: bool,
    pub legal_basis: String,
    pub citations: Vec<String>,
    pub strategy: String,
    pub technique: String,
    pub strategy_rationale: String,
    pub score: f64,
    pub log: Vec<AuditEntry>,
}

pub fn format_score(score: f64) -> String {
    format!("{score:.4}")
}

pub fn render_report(
    request: &AccessRequest,
    profile: &DataProfile,
    finding: &SensitivityFinding,
    strategy: &Strategy,
    result: &TransformResult,
) -> Report {
    let citations: Vec<String> = finding.citations().into_iter().map(String::from).collect();
    let action_of: BTreeMap<&str, &AnonymizationAction> = result
        .audit
        .iter()
        .map(|e| (e.column.as_str(), &e.action))
        .collect();
    let attributes = finding
        .attributes
        .iter()
        .map(|a: &AttributeFinding| AttributeLine {
            name: a.name.clone(),
            class: a.class,
            action: action_of
                .get(a.name.as_str())
                .map(|x| x.to_string())
                .unwrap_or_else(|| strategy.action_for(a.class).to_string()),
            level: a.level,
            citations: if a.class == AttributeClass::SensitiveValue {
                citations.clone()
            } else {
                Vec::new()
            },
        })
        .collect();
    Report {
        request_id: request.request_id(),
        requester: request.email.clone(),
        trust: profile.trust,
        purpose: request.purpose.clone(),
        dataset: profile.dataset_id.clone(),
        owner: Principal::parse(&profile.owner).to_string(),
        domain: Domain::parse(&profile.domain).to_string(),
        attributes,
        sensitivity: finding.level,
        defaulted: finding.defaulted,
        legal_basis: finding.rationale.clone(),
        citations,
        strategy: strategy.name.clone(),
        technique: strategy.technique(),
        strategy_rationale: strategy.rationale.clone(),
        score: result.score,
        log: result.audit.clone(),
    }
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "{REPORT_TITLE}");
        let _ = writeln!(w, "Request {}", self.request_id);
        let _ = writeln!(w);
        let _ = writeln!(w, "Requester: {}", self.requester);
        let _ = writeln!(w, "Trust level (KYU): {}", self.trust);
        let _ = writeln!(w, "Purpose: {}", self.purpose);
        let _ = writeln!(w, "Dataset: {}", self.dataset);
        let _ = writeln!(w, "Owner (data principal): {}", self.owner);
        let _ = writeln!(w, "Domain: {}", self.domain);
        let names: Vec<&str> = self.attributes.iter().map(|a| a.name.as_str()).collect();
        let _ = writeln!(w, "Requested attributes: {}", names.join(", "));
        let _ = writeln!(w);
        let _ = writeln!(w, "Sensitivity: {}", self.sensitivity);
        if self.defaulted {
            let _ = writeln!(w, "Legal basis: {DEFAULT_LOW_RULE}");
        } else {
            let _ = writeln!(w, "Legal basis:");
            for line in self.legal_basis.lines() {
                let _ = writeln!(w, "  - {line}");
            }
            let _ = writeln!(w, "Citations: {}", self.citations.join("; "));
        }
        let _ = writeln!(w, "Attributes:");
        for a in &self.attributes {
            let level = a.level.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
            let _ = write!(
                w,
                "  {} ({}): {}, sensitivity {}",
                a.name, a.class, a.action, level
            );
            if !a.citations.is_empty() {
                let _ = write!(w, ", under {}", a.citations.join("; "));
            }
            let _ = writeln!(w);
        }
        let _ = writeln!(w);
        let _ = writeln!(w, "Strategy: {} ({})", self.strategy, self.technique);
        let _ = writeln!(w, "Rationale: {}", self.strategy_rationale);
        let _ = writeln!(w, "Anonymisation Score: {}", format_score(self.score));
        let _ = writeln!(w);
        let _ = writeln!(w, "Field-level transformations:");
        for e in &self.log {
            let _ = writeln!(
                w,
                "  row {} {}: {} -> {} [{}, d={:.4}]",
                e.row_index, e.column, e.original, e.transformed, e.action, e.distance
            );
        }
        let _ = writeln!(w);
        let _ = writeln!(w, "{STRUCTURED_MARKER}");
        let _ = writeln!(w, "{}", self.to_json());
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Reads the structured block back out of a rendered report.
    pub fn from_text(text: &str) -> Result<Self> {
        let json = text
            .split_once(STRUCTURED_MARKER)
            .map(|(_, j)| j)
            .unwrap_or(text);
        Ok(serde_json::from_str(json.trim())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TraceVerdict {
    Pass,
    Diverged { row: usize, column: String },
    ScoreMismatch { recorded: f64, recomputed: f64 },
    Malformed(String),
}

impl TraceVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, TraceVerdict::Pass)
    }
}

impl std::fmt::Display for TraceVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceVerdict::Pass => f.write_str("PASS"),
            TraceVerdict::Diverged { row, column } => {
                write!(f, "diverged at row {row}, column {column}")
            }
            TraceVerdict::ScoreMismatch {
                recorded,
                recomputed,
            } => {
                write!(f, "score recorded {recorded} but recomputed {recomputed}")
            }
            TraceVerdict::Malformed(m) => write!(f, "malformed trace: {m}"),
        }
    }
}

/// Replays the audit log onto `original` and compares with the result.
pub fn verify_trace(
    original: &TableSlice,
    result: &TransformResult,
    metadata: &DatasetMetadata,
) -> TraceVerdict {
    if original.columns != result.slice.columns || original.row_count() != result.slice.row_count()
    {
        return TraceVerdict::Malformed("result shape differs from the original slice".into());
    }
    let cells = original.row_count() * original.column_count();
    if result.audit.len() != cells {
        return TraceVerdict::Malformed(format!(
            "audit has {} entries for {cells} cells",
            result.audit.len()
        ));
    }
    let col_index: BTreeMap<&str, usize> = original
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut replay = original.clone();
    let mut seen = vec![false; cells];
    let mut located = Vec::with_capacity(cells);
    for e in &result.audit {
        let Some(&c) = col_index.get(e.column.as_str()) else {
            return TraceVerdict::Malformed(format!("audit names unknown column `{}`", e.column));
        };
        if e.row_index >= original.row_count() {
            return TraceVerdict::Malformed(format!("audit row {} out of range", e.row_index));
        }
        let slot = e.row_index * original.column_count() + c;
        if std::mem::replace(&mut seen[slot], true) {
            return TraceVerdict::Malformed(format!(
                "duplicate audit entry for ({}, {})",
                e.row_index, e.column
            ));
        }
        if original.rows[e.row_index][c] != e.original {
            return TraceVerdict::Diverged {
                row: e.row_index,
                column: e.column.clone(),
            };
        }
        replay.rows[e.row_index][c] = e.transformed.clone();
        located.push((e, c));
    }
    for (r, (a, b)) in replay.rows.iter().zip(&result.slice.rows).enumerate() {
        if let Some(c) = a.iter().zip(b).position(|(x, y)| x != y) {
            return TraceVerdict::Diverged {
                row: r,
                column: original.columns[c].clone(),
            };
        }
    }
    let mut contexts: BTreeMap<(usize, String), ColumnContext> = BTreeMap::new();
    let mut distances = Vec::with_capacity(cells);
    for (e, c) in located {
        let hierarchy = match &e.action {
            AnonymizationAction::GeneralizeCategory(h) => h.clone(),
            _ => String::new(),
        };
        let ctx = contexts.entry((c, hierarchy.clone())).or_insert_with(|| {
            let h = (!hierarchy.is_empty()).then_some(hierarchy.as_str());
            ColumnContext::for_column(original, c, metadata, h)
        });
        match cell_distance(&e.original, &e.transformed, &e.action, ctx) {
            Ok(d) if (d - e.distance).abs() <= 1e-12 => distances.push(d),
            _ => {
                return TraceVerdict::Diverged {
                    row: e.row_index,
                    column: e.column.clone(),
                }
            }
        }
    }
    let recomputed = anonymisation_score(distances, cells);
    if (recomputed - result.score).abs() > 1e-12 {
        return TraceVerdict::ScoreMismatch {
            recorded: result.score,
            recomputed,
        };
    }
    TraceVerdict::Pass
}

/// Rebuilds a [`TransformResult`] from written outputs: the anonymized CSV,
/// the JSON-lines audit log and the recorded score. CSV cells take the type
/// of the matching audit entry when their text agrees with it.
pub fn load_result(csv_text: &str, audit_text: &str, score: f64) -> Result<TransformResult> {
    let audit = audit_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(AuditEntry::from_line)
        .collect::<Result<Vec<_>>>()?;
    let mut slice = TableSlice::read_csv_untyped(csv_text.as_bytes())?;
    let by_cell: BTreeMap<(usize, &str), &Cell> = audit
        .iter()
        .map(|e| ((e.row_index, e.column.as_str()), &e.transformed))
        .collect();
    let columns = slice.columns.clone();
    for (r, row) in slice.rows.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            if let Some(&logged) = by_cell.get(&(r, columns[c].as_str())) {
                if logged.render().unwrap_or("") == cell.render().unwrap_or("") {
                    *cell = logged.clone();
                }
            }
        }
    }
    Ok(TransformResult {
        slice,
        audit,
        score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anonymize::apply_strategy;
    use crate::model::{Cell, ClassActions, ColumnKind};
    use crate::store::ColumnMeta;

    fn fixture() -> (TableSlice, DatasetMetadata, Strategy) {
        let slice = TableSlice::new(
            vec!["customer_id".into(), "annual_income".into()],
            vec![
                vec![Cell::Text("C1".into()), Cell::Number("2170516.25".into())],
                vec![Cell::Text("C2".into()), Cell::Number("845000.10".into())],
            ],
        )
        .unwrap();
        let meta = DatasetMetadata {
            dataset_id: "Finance_Banking_Adult_FinanceBanking.csv".into(),
            domain: "Finance_Banking".into(),
            owner: "Adult".into(),
            name: "FinanceBanking".into(),
            columns: vec![
                ColumnMeta {
                    name: "customer_id".into(),
                    kind: ColumnKind::IdentifierLike,
                    class: AttributeClass::Identifier,
                },
                ColumnMeta {
                    name: "annual_income".into(),
                    kind: ColumnKind::Numeric,
                    class: AttributeClass::SensitiveValue,
                },
            ],
            hierarchies: Default::default(),
        };
        let strategy = Strategy {
            name: "PartialMask".into(),
            actions: ClassActions {
                identifier: AnonymizationAction::Pseudonymize,
                quasi_identifier: AnonymizationAction::GeneralizeNumeric(4),
                sensitive_value: AnonymizationAction::MaskPartial(0.5),
            },
            rationale: "r".into(),
            encrypt_alternative: false,
        };
        (slice, meta, strategy)
    }

    #[test]
    fn untampered_passes_and_tamper_is_located() {
        let (slice, meta, strategy) = fixture();
        let result = apply_strategy(&slice, &strategy, &meta, b"k", "Sec 7").unwrap();
        assert_eq!(result.slice.rows[0][1], Cell::Text("*****16.25".into()));
        assert_eq!(verify_trace(&slice, &result, &meta), TraceVerdict::Pass);

        let mut bad = result.clone();
        bad.audit[3].transformed = Cell::Text("****00.10".into());
        assert_eq!(
            verify_trace(&slice, &bad, &meta),
            TraceVerdict::Diverged {
                row: 1,
                column: "annual_income".into()
            }
        );

        let mut bad = result.clone();
        bad.slice.rows[0][0] = Cell::Text("pid_0000000000000000".into());
        assert_eq!(
            verify_trace(&slice, &bad, &meta),
            TraceVerdict::Diverged {
                row: 0,
                column: "customer_id".into()
            }
        );

        let mut bad = result.clone();
        bad.score += 1e-9;
        assert!(matches!(
            verify_trace(&slice, &bad, &meta),
            TraceVerdict::ScoreMismatch { .. }
        ));
    }

    #[test]
    fn report_states_score_and_round_trips() {
        let (slice, meta, strategy) = fixture();
        let result = apply_strategy(&slice, &strategy, &meta, b"k", "").unwrap();
        let request = AccessRequest::new(
            "person_1@gmail.com",
            "Organisational Use",
            vec!["customer_id".into(), "annual_income".into()],
            "Finance_Banking_Adult_FinanceBanking.csv",
        )
        .unwrap();
        let finding = SensitivityFinding {
            level: SensitivityLevel::High,
            matched: vec![],
            rationale: DEFAULT_LOW_RULE.into(),
            defaulted: true,
            attributes: vec![],
        };
        let profile = DataProfile {
            dataset_id: meta.dataset_id.clone(),
            domain: meta.domain.clone(),
            owner: meta.owner.clone(),
            sensitivity: finding.level,
            trust: TrustLevel::Moderate,
            matched_tuples: vec![],
        };
        let report = render_report(&request, &profile, &finding, &strategy, &result);
        let text = report.to_text();
        assert!(text.contains("Anonymisation Score: 0.7639"), "{text}");
        assert!(text.contains("Domain: Finance & Banking"));
        assert!(text.contains("Owner (data principal): Adult Individual"));
        assert!(text.contains(DEFAULT_LOW_RULE));
        assert_eq!(Report::from_text(&text).unwrap(), report);
    }
}
