//! Gazetteer entity recognition.
//!
//! Scanning is longest-match, ASCII case-insensitive, and respects word
//! boundaries. Offsets are byte offsets into the scanned text.

use serde::{Deserialize, Serialize};

use crate::canon::{KnownDomain, KnownPrincipal};
use crate::compliance::segment::SectionUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    DataCategory,
    Role,
    Jurisdiction,
    Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub kind: EntityKind,
    pub surface: String,
    pub canonical: String,
    pub offset: usize,
}

impl EntityMention {
    pub fn end(&self) -> usize {
        self.offset + self.surface.len()
    }
}

#[derive(Debug, Clone)]
struct Entry<K> {
    surface: String,
    kind: K,
    canonical: String,
}

/// A closed list of surface forms, each mapped to a kind and canonical form.
#[derive(Debug, Clone)]
pub struct Gazetteer<K> {
    entries: Vec<Entry<K>>,
}

/// One longest match found by [`Gazetteer::scan`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match<'a, K> {
    pub kind: K,
    pub canonical: &'a str,
    pub start: usize,
    pub end: usize,
}

impl<K: Copy> Gazetteer<K> {
    pub fn new() -> Self {
        Gazetteer {
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, kind: K, canonical: &str, surfaces: &[&str]) -> &mut Self {
        for s in surfaces {
            self.entries.push(Entry {
                surface: s.to_ascii_lowercase(),
                kind,
                canonical: canonical.to_string(),
            });
        }
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scan<'g>(&'g self, text: &str) -> Vec<Match<'g, K>> {
        let lower = text.to_ascii_lowercase();
        let bytes = lower.as_bytes();
        let is_word = |b: u8| b.is_ascii_alphanumeric() || b >= 0x80;
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < bytes.len() {
            let at_word_start = is_word(bytes[pos]) && (pos == 0 || !is_word(bytes[pos - 1]));
            if !at_word_start {
                pos += 1;
                continue;
            }
            let best = self
                .entries
                .iter()
                .filter(|e| {
                    let end = pos + e.surface.len();
                    lower[pos..].starts_with(&e.surface)
                        && (end == bytes.len() || !is_word(bytes[end]))
                })
                .max_by_key(|e| e.surface.len());
            match best {
                Some(e) => {
                    out.push(Match {
                        kind: e.kind,
                        canonical: &e.canonical,
                        start: pos,
                        end: pos + e.surface.len(),
                    });
                    pos += e.surface.len();
                }
                None => pos += 1,
            }
        }
        out
    }
}

impl<K: Copy> Default for Gazetteer<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl Gazetteer<EntityKind> {
    /// Data categories, roles, jurisdictions and processing actions.
    pub fn regulation_entities() -> Self {
        let mut g = Gazetteer::new();
        g.add(
            EntityKind::DataCategory,
            "personal",
            &["personal data", "personal"],
        )
        .add(
            EntityKind::DataCategory,
            "sensitive",
            &["sensitive personal data", "sensitive data", "sensitive"],
        )
        .add(
            EntityKind::DataCategory,
            "anonymized",
            &[
                "anonymized data",
                "anonymised data",
                "anonymized",
                "anonymised",
            ],
        )
        .add(
            EntityKind::Role,
            "Data Principal",
            &["data principal", "data principals"],
        )
        .add(
            EntityKind::Role,
            "Data Fiduciary",
            &[
                "data fiduciary",
                "data fiduciaries",
                "significant data fiduciary",
            ],
        )
        .add(
            EntityKind::Role,
            "Consent Manager",
            &["consent manager", "consent managers"],
        )
        .add(
            EntityKind::Jurisdiction,
            "India",
            &["india", "territory of india"],
        )
        .add(
            EntityKind::Jurisdiction,
            "foreign territory",
            &[
                "outside india",
                "territory outside india",
                "country or territory outside india",
                "foreign territory",
                "foreign territories",
                "foreign country",
            ],
        )
        .add(
            EntityKind::Action,
            "collection",
            &[
                "collect",
                "collects",
                "collected",
                "collecting",
                "collection",
            ],
        )
        .add(
            EntityKind::Action,
            "processing",
            &["process", "processes", "processed", "processing"],
        )
        .add(
            EntityKind::Action,
            "sharing",
            &[
                "share",
                "shares",
                "shared",
                "sharing",
                "disclose",
                "disclosed",
                "disclosure",
            ],
        )
        .add(
            EntityKind::Action,
            "erasure",
            &[
                "erase", "erased", "erasure", "erasing", "delete", "deleted", "deletion",
            ],
        );
        g
    }
}

/// Annotations used to group rules into tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnnotationKind {
    Principal,
    Domain,
    Receiver,
}

impl Gazetteer<AnnotationKind> {
    pub fn tuple_annotations() -> Self {
        let mut g = Gazetteer::new();
        let principal_surfaces: &[(KnownPrincipal, &[&str])] = &[
            (
                KnownPrincipal::AdultIndividual,
                &["adult individual", "adult individuals", "adult", "adults"],
            ),
            (
                KnownPrincipal::Child,
                &["child", "children", "minor", "minors"],
            ),
            (
                KnownPrincipal::PersonWithDisability,
                &[
                    "person with disability",
                    "persons with disability",
                    "person with a disability",
                ],
            ),
            (
                KnownPrincipal::HinduUndividedFamily,
                &["hindu undivided family", "huf"],
            ),
            (
                KnownPrincipal::CompanyFirm,
                &["company", "firm", "companies"],
            ),
            (
                KnownPrincipal::Association,
                &[
                    "association of persons",
                    "body of individuals",
                    "association",
                ],
            ),
            (KnownPrincipal::State, &["the state"]),
            (
                KnownPrincipal::ArtificialJuristicPerson,
                &["artificial juristic person", "ngo"],
            ),
        ];
        for (p, surfaces) in principal_surfaces {
            g.add(AnnotationKind::Principal, p.name(), surfaces);
        }
        let domain_surfaces: &[(KnownDomain, &[&str])] = &[
            (
                KnownDomain::ECommerce,
                &["e-commerce", "ecommerce", "online retail"],
            ),
            (
                KnownDomain::Healthcare,
                &["healthcare", "health care", "medical", "health"],
            ),
            (
                KnownDomain::SocialMedia,
                &["social media", "social network"],
            ),
            (KnownDomain::Education, &["education", "educational"]),
            (
                KnownDomain::Telecom,
                &["telecom", "telecommunication", "telecommunications"],
            ),
            (KnownDomain::Finance, &["finance", "banking", "financial"]),
            (
                KnownDomain::Startups,
                &["startup", "startups", "it services"],
            ),
            (KnownDomain::Travel, &["travel", "tourism"]),
            (
                KnownDomain::Employment,
                &["employment", "employee", "employees", "payroll"],
            ),
            (
                KnownDomain::Government,
                &[
                    "government services",
                    "government benefits",
                    "public services",
                ],
            ),
        ];
        for (d, surfaces) in domain_surfaces {
            g.add(AnnotationKind::Domain, d.long_name(), surfaces);
        }
        let receivers: &[(&str, &[&str])] = &[
            ("Doctors", &["doctor", "doctors", "physician", "physicians"]),
            ("Insurers", &["insurer", "insurers", "insurance company"]),
            (
                "Guardian",
                &[
                    "guardian",
                    "guardians",
                    "lawful guardian",
                    "parent",
                    "parents",
                ],
            ),
            ("Emergency Services", &["emergency services"]),
            (
                "Government",
                &["government", "central government", "state government"],
            ),
            (
                "Government Departments",
                &["government departments", "departments"],
            ),
            ("Contractors", &["contractor", "contractors"]),
            ("Tax Authorities", &["tax authorities", "tax authority"]),
            ("Legal Entities", &["legal entities"]),
            (
                "Legal Authorities",
                &["legal authorities", "law enforcement"],
            ),
            (
                "Internal Company Departments",
                &["internal company departments"],
            ),
            ("Internal Teams", &["internal teams"]),
            ("Government Schemes", &["government schemes"]),
            ("Credit Bureaus", &["credit bureau", "credit bureaus"]),
            ("RBI", &["rbi", "reserve bank of india"]),
            ("Banks", &["bank", "banks"]),
            ("Employers", &["employer", "employers"]),
            ("Schools", &["school", "schools"]),
            ("Hospitals", &["hospital", "hospitals"]),
            ("Telecom Regulator", &["telecom regulator", "trai"]),
            (
                "Service Providers",
                &["service provider", "service providers", "processors"],
            ),
        ];
        for (canon, surfaces) in receivers {
            g.add(AnnotationKind::Receiver, canon, surfaces);
        }
        g
    }
}

/// Entity mentions in a section body.
pub fn recognize_entities(
    section: &SectionUnit,
    gazetteer: &Gazetteer<EntityKind>,
) -> Vec<EntityMention> {
    gazetteer
        .scan(&section.body)
        .into_iter()
        .map(|m| EntityMention {
            kind: m.kind,
            surface: section.body[m.start..m.end].to_string(),
            canonical: m.canonical.to_string(),
            offset: m.start,
        })
        .collect()
}
