//! Sensitivity resolution against the compliance repository.

use serde::{Deserialize, Serialize};

use crate::canon::{Domain, Principal};
use crate::compliance::ComplianceRepository;
use crate::error::Result;
use crate::model::{AttributeClass, ComplianceTuple, SensitivityLevel};
use crate::store::DatasetMetadata;

pub const DEFAULT_LOW_RULE: &str =
    "no compliance tuple covers this domain and data principal; data is classified Low sensitivity by default";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeFinding {
    pub name: String,
    pub class: AttributeClass,
    /// Set for sensitive values, which inherit the finding's level.
    pub level: Option<SensitivityLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensitivityFinding {
    pub level: SensitivityLevel,
    pub matched: Vec<ComplianceTuple>,
    pub rationale: String,
    pub defaulted: bool,
    pub attributes: Vec<AttributeFinding>,
}

impl SensitivityFinding {
    /// Distinct citations of all matched tuples, in match order.
    pub fn citations(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in &self.matched {
            for c in t.citations() {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    }
}

pub fn match_tuples<'a>(
    repository: &'a ComplianceRepository,
    domain: &str,
    principal: &str,
) -> Vec<&'a ComplianceTuple> {
    repository.matching(&Domain::parse(domain), &Principal::parse(principal))
}

fn describe_tuple(t: &ComplianceTuple) -> String {
    let rules: Vec<String> = t
        .rules
        .iter()
        .map(|r| {
            let mut s = format!("{} {}", r.modality.as_str(), r.action.as_str());
            if !r.condition.is_empty() {
                s.push_str(&format!(" \"{}\"", r.condition));
            }
            if !r.citation.is_empty() {
                s.push_str(&format!(" [{}]", r.citation));
            }
            s
        })
        .collect();
    format!(
        "{} / {} ({}): {}; receivers: {}",
        t.data_principal,
        t.domain,
        t.sensitivity,
        rules.join("; "),
        t.receiving_entities.join(", ")
    )
}

pub fn assess_sensitivity(
    matches: &[&ComplianceTuple],
    requested_attributes: &[String],
    metadata: &DatasetMetadata,
) -> SensitivityFinding {
    let (level, rationale, defaulted) = match matches.iter().map(|t| t.sensitivity).max() {
        None => (SensitivityLevel::Low, DEFAULT_LOW_RULE.to_string(), true),
        Some(level) => {
            let lines: Vec<String> = matches.iter().map(|t| describe_tuple(t)).collect();
            (level, lines.join("\n"), false)
        }
    };
    let attributes = requested_attributes
        .iter()
        .map(|name| {
            let class = metadata
                .column(name)
                .map(|c| c.class)
                .unwrap_or(AttributeClass::SensitiveValue);
            AttributeFinding {
                name: name.clone(),
                class,
                level: (class == AttributeClass::SensitiveValue).then_some(level),
            }
        })
        .collect();
    SensitivityFinding {
        level,
        matched: matches.iter().map(|t| (*t).clone()).collect(),
        rationale,
        defaulted,
        attributes,
    }
}

/// What an external classifier sees.
#[derive(Debug, Clone, Copy)]
pub struct ClassifierContext<'a> {
    pub repository: &'a ComplianceRepository,
    pub metadata: &'a DatasetMetadata,
    pub domain: &'a str,
    pub principal: &'a str,
    pub requested_attributes: &'a [String],
}

/// Pluggable sensitivity classifier, e.g. a client for a remote model.
pub trait SensitivityClassifier: Send + Sync {
    fn classify(&self, ctx: &ClassifierContext<'_>) -> Result<SensitivityFinding>;
}

pub fn assess_in_context(ctx: &ClassifierContext<'_>) -> SensitivityFinding {
    let matches = match_tuples(ctx.repository, ctx.domain, ctx.principal);
    assess_sensitivity(&matches, ctx.requested_attributes, ctx.metadata)
}

/// Accepts an external finding only when every tuple it relies on has been
/// validated; otherwise, or on failure, falls back to [`assess_sensitivity`].
pub fn classifier_port(
    classifier: Option<&dyn SensitivityClassifier>,
    ctx: &ClassifierContext<'_>,
) -> SensitivityFinding {
    let Some(classifier) = classifier else {
        return assess_in_context(ctx);
    };
    match classifier.classify(ctx) {
        Ok(finding)
            if !finding.matched.is_empty() && finding.matched.iter().all(|t| t.validated) =>
        {
            finding
        }
        Ok(_) => {
            log::info!("external finding rests on unvalidated tuples; using repository assessment");
            assess_in_context(ctx)
        }
        Err(e) => {
            log::warn!("sensitivity classifier failed: {e}; using repository assessment");
            assess_in_context(ctx)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::model::{ColumnKind, Modality, RuleAction, RuleClause};
    use crate::store::ColumnMeta;

    fn finance_meta() -> DatasetMetadata {
        let col = |name: &str, class| ColumnMeta {
            name: name.into(),
            kind: ColumnKind::Numeric,
            class,
        };
        DatasetMetadata {
            dataset_id: "Finance_Banking_Adult_FinanceBanking.csv".into(),
            domain: "Finance_Banking".into(),
            owner: "Adult".into(),
            name: "FinanceBanking".into(),
            columns: vec![
                col("customer_id", AttributeClass::Identifier),
                col("annual_income", AttributeClass::SensitiveValue),
                col("loan_status", AttributeClass::SensitiveValue),
                col("monthly_expenditure", AttributeClass::SensitiveValue),
            ],
            hierarchies: Default::default(),
        }
    }

    fn attrs() -> Vec<String> {
        ["annual_income", "loan_status", "monthly_expenditure"]
            .map(String::from)
            .to_vec()
    }

    #[test]
    fn healthcare_adult_matches_table_row() {
        let repo = ComplianceRepository::shipped();
        let m = match_tuples(&repo, "healthcare", " adult individual ");
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].receiving_entities, ["Doctors", "Insurers"]);
    }

    #[test]
    fn child_healthcare_forbids_marketing() {
        let repo = ComplianceRepository::shipped();
        let m = match_tuples(&repo, "Healthcare", "Child (<18 years)");
        assert!(m
            .iter()
            .flat_map(|t| &t.rules)
            .any(|r| r.modality == Modality::MustNot && r.condition.contains("marketing")));
        assert!(match_tuples(&repo, "Astrology", "Adult Individual").is_empty());
    }

    #[test]
    fn finance_case_is_high() {
        let repo = ComplianceRepository::shipped();
        let meta = finance_meta();
        let m = match_tuples(&repo, &meta.domain, &meta.owner);
        let f = assess_sensitivity(&m, &attrs(), &meta);
        assert_eq!(f.level, SensitivityLevel::High);
        assert!(!f.defaulted);
        for c in f.citations() {
            assert!(f.rationale.contains(c));
        }
        assert!(f
            .attributes
            .iter()
            .all(|a| a.level == Some(SensitivityLevel::High)));
    }

    #[test]
    fn unmatched_defaults_low() {
        let f = assess_sensitivity(&[], &attrs(), &finance_meta());
        assert_eq!(f.level, SensitivityLevel::Low);
        assert!(f.defaulted && f.matched.is_empty());
        assert_eq!(f.rationale, DEFAULT_LOW_RULE);
    }

    fn tuple(level: SensitivityLevel, validated: bool) -> ComplianceTuple {
        ComplianceTuple {
            data_principal: "Adult Individual".into(),
            domain: "Finance & Banking".into(),
            rules: vec![RuleClause::new(Modality::May, RuleAction::Share, "x", "Sec 1").unwrap()],
            receiving_entities: vec!["Banks".into()],
            sensitivity: level,
            validated,
        }
    }

    #[test]
    fn max_over_matches() {
        let a = tuple(SensitivityLevel::Moderate, true);
        let b = tuple(SensitivityLevel::High, true);
        let f = assess_sensitivity(&[&a, &b], &attrs(), &finance_meta());
        assert_eq!(f.level, SensitivityLevel::High);
    }

    struct Fixed(Result<SensitivityFinding, String>);

    impl SensitivityClassifier for Fixed {
        fn classify(&self, _: &ClassifierContext<'_>) -> Result<SensitivityFinding> {
            self.0.clone().map_err(Error::Classifier)
        }
    }

    fn external(validated: bool) -> SensitivityFinding {
        SensitivityFinding {
            level: SensitivityLevel::High,
            matched: vec![tuple(SensitivityLevel::High, validated)],
            rationale: "external".into(),
            defaulted: false,
            attributes: vec![],
        }
    }

    #[test]
    fn classifier_gate() {
        let repo = ComplianceRepository::new();
        let meta = finance_meta();
        let a = attrs();
        let ctx = ClassifierContext {
            repository: &repo,
            metadata: &meta,
            domain: "Finance & Banking",
            principal: "Adult Individual",
            requested_attributes: &a,
        };
        let baseline = assess_in_context(&ctx);
        assert_eq!(classifier_port(None, &ctx), baseline);
        let ok = Fixed(Ok(external(true)));
        assert_eq!(
            classifier_port(Some(&ok), &ctx).level,
            SensitivityLevel::High
        );
        let unvalidated = Fixed(Ok(external(false)));
        assert_eq!(classifier_port(Some(&unvalidated), &ctx), baseline);
        let failing = Fixed(Err("timeout".into()));
        assert_eq!(classifier_port(Some(&failing), &ctx), baseline);
    }
}
