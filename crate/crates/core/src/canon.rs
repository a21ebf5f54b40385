//! Canonical domain and data-principal names with alias resolution.
//!
//! Domains are the ten sectors used for clustering and score tables. Several
//! sectors also go by a longer regulatory label (`Finance & Banking`,
//! `Government Services`, ...); both forms resolve to the same variant.
//! Matching is case-insensitive and ignores punctuation.

use std::fmt;
use std::hash::{Hash, Hasher};

/// Lowercase, `&` spelled out, punctuation folded to single spaces.
pub fn normalize_key(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for ch in s.trim().replace('&', " and ").chars() {
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum KnownDomain {
    ECommerce,
    Healthcare,
    SocialMedia,
    Education,
    Telecom,
    Finance,
    Startups,
    Travel,
    Employment,
    Government,
}

impl KnownDomain {
    pub const ALL: [KnownDomain; 10] = [
        KnownDomain::ECommerce,
        KnownDomain::Healthcare,
        KnownDomain::SocialMedia,
        KnownDomain::Education,
        KnownDomain::Telecom,
        KnownDomain::Finance,
        KnownDomain::Startups,
        KnownDomain::Travel,
        KnownDomain::Employment,
        KnownDomain::Government,
    ];

    /// Sector name used in score tables and cluster labels.
    pub fn short_name(self) -> &'static str {
        match self {
            KnownDomain::ECommerce => "E-commerce",
            KnownDomain::Healthcare => "Healthcare",
            KnownDomain::SocialMedia => "Social Media",
            KnownDomain::Education => "Education",
            KnownDomain::Telecom => "Telecom",
            KnownDomain::Finance => "Finance",
            KnownDomain::Startups => "Startups",
            KnownDomain::Travel => "Travel",
            KnownDomain::Employment => "Employment",
            KnownDomain::Government => "Government",
        }
    }

    /// Regulatory label where one exists, otherwise the short name.
    pub fn long_name(self) -> &'static str {
        match self {
            KnownDomain::Finance => "Finance & Banking",
            KnownDomain::Government => "Government Services",
            KnownDomain::Employment => "Employment & HR Tech",
            KnownDomain::Startups => "Startups and IT Services",
            other => other.short_name(),
        }
    }

    fn aliases(self) -> &'static [&'static str] {
        match self {
            KnownDomain::ECommerce => &["e commerce", "ecommerce", "retail", "online retail"],
            KnownDomain::Healthcare => &["healthcare", "health care", "health", "medical"],
            KnownDomain::SocialMedia => &["social media", "social", "social network"],
            KnownDomain::Education => &["education", "edtech", "school"],
            KnownDomain::Telecom => &["telecom", "telecommunications", "telecommunication"],
            KnownDomain::Finance => &[
                "finance",
                "finance and banking",
                "finance banking",
                "banking",
                "fintech",
            ],
            KnownDomain::Startups => &[
                "startups",
                "startup",
                "startups and it services",
                "it services",
            ],
            KnownDomain::Travel => &["travel", "travel and hospitality", "tourism"],
            KnownDomain::Employment => &[
                "employment",
                "employment and hr tech",
                "hr tech",
                "hr",
                "human resources",
            ],
            KnownDomain::Government => {
                &["government", "government services", "public sector", "govt"]
            }
        }
    }

    pub fn from_alias(s: &str) -> Option<Self> {
        let key = normalize_key(s);
        KnownDomain::ALL
            .into_iter()
            .find(|d| d.aliases().iter().any(|a| *a == key))
    }
}

/// A domain name, canonical where it resolves.
#[derive(Debug, Clone)]
pub enum Domain {
    Known(KnownDomain),
    Other(String),
}

impl Domain {
    pub fn parse(s: &str) -> Self {
        match KnownDomain::from_alias(s) {
            Some(d) => Domain::Known(d),
            None => Domain::Other(s.trim().to_string()),
        }
    }

    pub fn known(&self) -> Option<KnownDomain> {
        match self {
            Domain::Known(d) => Some(*d),
            Domain::Other(_) => None,
        }
    }

    pub fn short_name(&self) -> &str {
        match self {
            Domain::Known(d) => d.short_name(),
            Domain::Other(s) => s,
        }
    }

    fn key(&self) -> String {
        match self {
            Domain::Known(d) => d.short_name().to_string(),
            Domain::Other(s) => normalize_key(s),
        }
    }
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Domain::Known(a), Domain::Known(b)) => a == b,
            (Domain::Other(_), Domain::Other(_)) => self.key() == other.key(),
            _ => false,
        }
    }
}

impl Eq for Domain {}

impl Hash for Domain {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Known(d) => f.write_str(d.long_name()),
            Domain::Other(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KnownPrincipal {
    AdultIndividual,
    Child,
    PersonWithDisability,
    HinduUndividedFamily,
    CompanyFirm,
    Association,
    State,
    ArtificialJuristicPerson,
}

impl KnownPrincipal {
    pub const ALL: [KnownPrincipal; 8] = [
        KnownPrincipal::AdultIndividual,
        KnownPrincipal::Child,
        KnownPrincipal::PersonWithDisability,
        KnownPrincipal::HinduUndividedFamily,
        KnownPrincipal::CompanyFirm,
        KnownPrincipal::Association,
        KnownPrincipal::State,
        KnownPrincipal::ArtificialJuristicPerson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KnownPrincipal::AdultIndividual => "Adult Individual",
            KnownPrincipal::Child => "Child (<18 years)",
            KnownPrincipal::PersonWithDisability => "Person with Disability (via guardian)",
            KnownPrincipal::HinduUndividedFamily => "Hindu Undivided Family (HUF)",
            KnownPrincipal::CompanyFirm => "Company/Firm",
            KnownPrincipal::Association => "Association or Body of Individuals",
            KnownPrincipal::State => "State",
            KnownPrincipal::ArtificialJuristicPerson => {
                "Artificial Juristic Person (e.g., Trust, NGO)"
            }
        }
    }

    fn aliases(self) -> &'static [&'static str] {
        match self {
            KnownPrincipal::AdultIndividual => {
                &["adult individual", "adult", "adults", "individual"]
            }
            KnownPrincipal::Child => &["child 18 years", "child", "children", "minor", "minors"],
            KnownPrincipal::PersonWithDisability => &[
                "person with disability via guardian",
                "person with disability",
                "persons with disability",
                "disabled",
            ],
            KnownPrincipal::HinduUndividedFamily => &[
                "hindu undivided family huf",
                "hindu undivided family",
                "huf",
            ],
            KnownPrincipal::CompanyFirm => &["company firm", "company", "firm", "employer"],
            KnownPrincipal::Association => &[
                "association or body of individuals",
                "association",
                "body of individuals",
            ],
            KnownPrincipal::State => &["state"],
            KnownPrincipal::ArtificialJuristicPerson => &[
                "artificial juristic person e g trust ngo",
                "artificial juristic person",
                "trust",
                "ngo",
            ],
        }
    }

    pub fn from_alias(s: &str) -> Option<Self> {
        let key = normalize_key(s);
        KnownPrincipal::ALL
            .into_iter()
            .find(|p| p.aliases().iter().any(|a| *a == key))
    }
}

#[derive(Debug, Clone)]
pub enum Principal {
    Known(KnownPrincipal),
    Other(String),
}

impl Principal {
    pub fn parse(s: &str) -> Self {
        match KnownPrincipal::from_alias(s) {
            Some(p) => Principal::Known(p),
            None => Principal::Other(s.trim().to_string()),
        }
    }

    fn key(&self) -> String {
        match self {
            Principal::Known(p) => p.name().to_string(),
            Principal::Other(s) => normalize_key(s),
        }
    }
}

impl PartialEq for Principal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Principal::Known(a), Principal::Known(b)) => a == b,
            (Principal::Other(_), Principal::Other(_)) => self.key() == other.key(),
            _ => false,
        }
    }
}

impl Eq for Principal {}

impl Hash for Principal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Display for Principal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Principal::Known(p) => f.write_str(p.name()),
            Principal::Other(s) => f.write_str(s),
        }
    }
}
