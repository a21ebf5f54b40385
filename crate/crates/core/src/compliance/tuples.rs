use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canon::{Domain, KnownDomain, KnownPrincipal, Principal};
use crate::compliance::ner::{AnnotationKind, Gazetteer};
use crate::compliance::rules::ExtractedRule;
use crate::compliance::segment::SectionUnit;
use crate::model::{ComplianceTuple, RuleClause, SensitivityLevel};

/// Rules of one section with the principals, domains and receivers found
/// alongside them. Unresolved fields stay `None`/empty for curation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleGroup {
    pub principal: Option<String>,
    pub domain: Option<String>,
    pub receivers: Vec<String>,
    pub rules: Vec<RuleClause>,
    /// Heading of the originating section.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurationEntry {
    pub group: RuleGroup,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleConstruction {
    pub tuples: Vec<ComplianceTuple>,
    pub curation: Vec<CurationEntry>,
}

fn push_unique(v: &mut Vec<String>, s: &str) {
    if !v.iter().any(|x| x == s) {
        v.push(s.to_string());
    }
}

fn paragraph_spans(body: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, _) in body.match_indices("\n\n") {
        spans.push((start, i));
        start = i + 2;
    }
    spans.push((start, body.len()));
    spans
}

/// Groups a section's rules by every (principal, domain) pair mentioned in
/// the same paragraph or in the section heading.
pub fn annotate_section(
    section: &SectionUnit,
    rules: &[ExtractedRule],
    gazetteer: &Gazetteer<AnnotationKind>,
) -> Vec<RuleGroup> {
    let mut groups = Vec::new();
    for (ps, pe) in paragraph_spans(&section.body) {
        let clauses: Vec<RuleClause> = rules
            .iter()
            .filter(|r| r.span.0 >= ps && r.span.1 <= pe)
            .map(|r| r.clause.clone())
            .collect();
        if clauses.is_empty() {
            continue;
        }
        let mut principals = Vec::new();
        let mut domains = Vec::new();
        let mut receivers = Vec::new();
        for text in [section.heading.as_str(), &section.body[ps..pe]] {
            for m in gazetteer.scan(text) {
                match m.kind {
                    AnnotationKind::Principal => push_unique(&mut principals, m.canonical),
                    AnnotationKind::Domain => push_unique(&mut domains, m.canonical),
                    AnnotationKind::Receiver => push_unique(&mut receivers, m.canonical),
                }
            }
        }
        let principals: Vec<Option<String>> = if principals.is_empty() {
            vec![None]
        } else {
            principals.into_iter().map(Some).collect()
        };
        let domains: Vec<Option<String>> = if domains.is_empty() {
            vec![None]
        } else {
            domains.into_iter().map(Some).collect()
        };
        for p in &principals {
            for d in &domains {
                groups.push(RuleGroup {
                    principal: p.clone(),
                    domain: d.clone(),
                    receivers: receivers.clone(),
                    rules: clauses.clone(),
                    source: section.heading.clone(),
                });
            }
        }
    }
    groups
}

/// Default sensitivity for machine-built tuples: health, finance and child
/// data are High, everything else Moderate.
pub fn default_sensitivity(principal: &str, domain: &str) -> SensitivityLevel {
    let high_domain = matches!(
        Domain::parse(domain).known(),
        Some(KnownDomain::Healthcare | KnownDomain::Finance)
    );
    let child = Principal::parse(principal) == Principal::Known(KnownPrincipal::Child);
    if high_domain || child {
        SensitivityLevel::High
    } else {
        SensitivityLevel::Moderate
    }
}

/// One tuple per (principal, domain); incomplete groups go to curation.
/// Groups sharing a key are merged in input order.
pub fn construct_tuples(groups: &[RuleGroup]) -> TupleConstruction {
    let mut out = TupleConstruction::default();
    let mut merged: BTreeMap<(String, String), usize> = BTreeMap::new();
    for group in groups {
        if group.rules.is_empty() {
            continue;
        }
        let (principal, domain) = match (&group.principal, &group.domain) {
            (Some(p), Some(d)) if !group.receivers.is_empty() => (p, d),
            _ => {
                let mut missing = Vec::new();
                if group.principal.is_none() {
                    missing.push("principal");
                }
                if group.domain.is_none() {
                    missing.push("domain");
                }
                if group.receivers.is_empty() {
                    missing.push("receiving entity");
                }
                out.curation.push(CurationEntry {
                    group: group.clone(),
                    reason: format!("unresolved {}", missing.join(", ")),
                });
                continue;
            }
        };
        let key = (principal.clone(), domain.clone());
        match merged.get(&key) {
            Some(&idx) => {
                let t = &mut out.tuples[idx];
                for r in &group.rules {
                    if !t.rules.contains(r) {
                        t.rules.push(r.clone());
                    }
                }
                for r in &group.receivers {
                    push_unique(&mut t.receiving_entities, r);
                }
            }
            None => {
                merged.insert(key, out.tuples.len());
                out.tuples.push(ComplianceTuple {
                    data_principal: principal.clone(),
                    domain: domain.clone(),
                    rules: group.rules.clone(),
                    receiving_entities: group.receivers.clone(),
                    sensitivity: default_sensitivity(principal, domain),
                    validated: false,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Modality, RuleAction};

    fn rule() -> RuleClause {
        RuleClause::new(
            Modality::OnlyIf,
            RuleAction::Share,
            "explicit consent",
            "Sec 7(f–g)",
        )
        .unwrap()
    }

    #[test]
    fn missing_role_goes_to_curation() {
        let group = RuleGroup {
            principal: None,
            domain: Some("Healthcare".into()),
            receivers: vec!["Doctors".into()],
            rules: vec![rule()],
            source: String::new(),
        };
        let out = construct_tuples(&[group]);
        assert!(out.tuples.is_empty());
        assert_eq!(out.curation.len(), 1);
        assert!(out.curation[0].reason.contains("principal"));
    }

    #[test]
    fn empty_rule_list_yields_nothing() {
        let group = RuleGroup {
            principal: Some("Adult Individual".into()),
            domain: Some("Healthcare".into()),
            receivers: vec!["Doctors".into()],
            rules: vec![],
            source: String::new(),
        };
        let out = construct_tuples(&[group]);
        assert!(out.tuples.is_empty() && out.curation.is_empty());
    }

    #[test]
    fn same_key_groups_merge() {
        let mk = |recv: &str| RuleGroup {
            principal: Some("Adult Individual".into()),
            domain: Some("Healthcare".into()),
            receivers: vec![recv.into()],
            rules: vec![rule()],
            source: String::new(),
        };
        let out = construct_tuples(&[mk("Doctors"), mk("Insurers")]);
        assert_eq!(out.tuples.len(), 1);
        assert_eq!(out.tuples[0].receiving_entities, ["Doctors", "Insurers"]);
        assert_eq!(out.tuples[0].rules.len(), 1);
        assert!(!out.tuples[0].validated);
        assert_eq!(out.tuples[0].sensitivity, SensitivityLevel::High);
    }

    #[test]
    fn default_sensitivity_rule() {
        assert_eq!(
            default_sensitivity("Adult Individual", "Travel"),
            SensitivityLevel::Moderate
        );
        assert_eq!(
            default_sensitivity("Child", "Travel"),
            SensitivityLevel::High
        );
        assert_eq!(
            default_sensitivity("State", "Finance & Banking"),
            SensitivityLevel::High
        );
    }
}
