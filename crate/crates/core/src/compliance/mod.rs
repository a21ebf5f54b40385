//! Regulation text → compliance repository.
//!
//! Five stages, each usable on its own: [`extract_text`],
//! [`segment_sections`], [`recognize_entities`], [`extract_rules`] and
//! [`construct_tuples`]. [`CompliancePipeline`] runs them in order.

pub mod ner;
pub mod repository;
pub mod rules;
pub mod segment;
pub mod text;
pub mod tuples;

pub use ner::{recognize_entities, AnnotationKind, EntityKind, EntityMention, Gazetteer};
pub use repository::ComplianceRepository;
pub use rules::{extract_rules, ExtractedRule};
pub use segment::{segment_sections, HeadingPatterns, SectionUnit, Theme};
pub use text::extract_text;
pub use tuples::{annotate_section, construct_tuples, CurationEntry, RuleGroup, TupleConstruction};

use crate::error::Result;

/// Excerpt of regulation text used as a fixture and CLI default.
pub const DPDP_EXCERPT: &str = include_str!("../../data/dpdp_excerpt.txt");

#[derive(Debug, Clone)]
pub struct CompliancePipeline {
    pub headings: HeadingPatterns,
    pub entities: Gazetteer<EntityKind>,
    pub annotations: Gazetteer<AnnotationKind>,
}

impl Default for CompliancePipeline {
    fn default() -> Self {
        CompliancePipeline {
            headings: HeadingPatterns::default(),
            entities: Gazetteer::regulation_entities(),
            annotations: Gazetteer::tuple_annotations(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub sections: Vec<SectionUnit>,
    pub repository: ComplianceRepository,
    pub curation: Vec<CurationEntry>,
    /// Rules whose modality was downgraded for lack of a condition.
    pub review: Vec<ExtractedRule>,
}

impl CompliancePipeline {
    pub fn run(&self, source: &[u8]) -> Result<PipelineOutput> {
        let text = extract_text(source)?;
        let sections = if text.is_empty() {
            Vec::new()
        } else {
            segment_sections(&text, &self.headings)
        };
        let mut groups = Vec::new();
        let mut review = Vec::new();
        for section in &sections {
            let mentions = recognize_entities(section, &self.entities);
            let rules = extract_rules(section, &mentions);
            review.extend(rules.iter().filter(|r| r.needs_review).cloned());
            groups.extend(annotate_section(section, &rules, &self.annotations));
        }
        let built = construct_tuples(&groups);
        let mut repository = ComplianceRepository::new();
        repository.push_comment("machine-extracted tuples; validated=false until reviewed");
        for t in built.tuples {
            repository.push(t);
        }
        Ok(PipelineOutput {
            sections,
            repository,
            curation: built.curation,
            review,
        })
    }
}
