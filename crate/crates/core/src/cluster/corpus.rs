//! Seeded synthetic domain corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canon::KnownDomain;

/// Vocabulary every domain draws from.
pub const SHARED_WORDS: &[&str] = &[
    "data",
    "user",
    "record",
    "service",
    "information",
    "system",
    "policy",
    "request",
    "platform",
    "account",
    "report",
    "process",
    "access",
    "details",
    "team",
];

pub fn keyword_pool(domain: KnownDomain) -> &'static [&'static str] {
    match domain {
        KnownDomain::ECommerce => &[
            "cart",
            "checkout",
            "order",
            "shipping",
            "seller",
            "buyer",
            "product",
            "catalog",
            "discount",
            "refund",
            "marketplace",
            "delivery",
            "coupon",
            "wishlist",
            "inventory",
            "merchant",
            "purchase",
            "returns",
        ],
        KnownDomain::Healthcare => &[
            "patient",
            "doctor",
            "diagnosis",
            "hospital",
            "prescription",
            "clinic",
            "treatment",
            "nurse",
            "symptom",
            "medication",
            "surgery",
            "insurer",
            "vaccine",
            "pathology",
            "radiology",
            "ward",
            "therapy",
            "allergy",
        ],
        KnownDomain::SocialMedia => &[
            "post",
            "follower",
            "feed",
            "hashtag",
            "like",
            "share",
            "comment",
            "profile",
            "influencer",
            "story",
            "timeline",
            "friend",
            "reel",
            "viral",
            "mention",
            "creator",
            "repost",
            "trending",
        ],
        KnownDomain::Education => &[
            "student",
            "school",
            "teacher",
            "exam",
            "grade",
            "curriculum",
            "classroom",
            "syllabus",
            "homework",
            "enrollment",
            "tuition",
            "lecture",
            "scholarship",
            "semester",
            "campus",
            "marks",
            "attendance",
            "pupil",
        ],
        KnownDomain::Telecom => &[
            "subscriber",
            "sim",
            "tariff",
            "roaming",
            "bandwidth",
            "tower",
            "prepaid",
            "postpaid",
            "broadband",
            "spectrum",
            "handset",
            "recharge",
            "porting",
            "operator",
            "network",
            "signal",
            "calls",
            "sms",
        ],
        KnownDomain::Finance => &[
            "loan",
            "credit",
            "bank",
            "income",
            "interest",
            "mortgage",
            "deposit",
            "borrower",
            "emi",
            "kyc",
            "repayment",
            "collateral",
            "investment",
            "savings",
            "ledger",
            "lender",
            "cheque",
            "overdraft",
        ],
        KnownDomain::Startups => &[
            "founder",
            "funding",
            "investor",
            "saas",
            "cloud",
            "api",
            "deployment",
            "venture",
            "pitch",
            "equity",
            "incubator",
            "devops",
            "sprint",
            "prototype",
            "valuation",
            "accelerator",
            "microservice",
            "seed",
        ],
        KnownDomain::Travel => &[
            "flight",
            "hotel",
            "booking",
            "passport",
            "itinerary",
            "airline",
            "visa",
            "tourist",
            "luggage",
            "reservation",
            "destination",
            "boarding",
            "resort",
            "cruise",
            "ticket",
            "layover",
            "holiday",
            "checkin",
        ],
        KnownDomain::Employment => &[
            "employee",
            "payroll",
            "salary",
            "recruitment",
            "resume",
            "hiring",
            "appraisal",
            "onboarding",
            "attrition",
            "leave",
            "manager",
            "candidate",
            "interview",
            "workforce",
            "benefits",
            "promotion",
            "timesheet",
            "offboarding",
        ],
        KnownDomain::Government => &[
            "citizen",
            "ministry",
            "aadhaar",
            "subsidy",
            "welfare",
            "census",
            "ration",
            "municipal",
            "pension",
            "scheme",
            "licence",
            "permit",
            "certificate",
            "tax",
            "grievance",
            "panchayat",
            "department",
            "voter",
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDoc {
    pub id: String,
    pub domain: KnownDomain,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub docs_per_domain: usize,
    pub words_per_doc: usize,
    /// Share of words drawn from the shared pool rather than the domain pool.
    pub shared_fraction: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            docs_per_domain: 6,
            words_per_doc: 40,
            shared_fraction: 0.3,
        }
    }
}

const CONNECTIVES: &[&str] = &["the", "of", "and", "for", "with", "to", "in"];

/// `docs_per_domain` documents for each of the ten domains, in domain order.
pub fn synthetic_corpus(params: &CorpusParams, seed: u64) -> Vec<LabeledDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::with_capacity(params.docs_per_domain * KnownDomain::ALL.len());
    for domain in KnownDomain::ALL {
        let pool = keyword_pool(domain);
        for i in 0..params.docs_per_domain {
            let mut words = Vec::with_capacity(params.words_per_doc * 2);
            for _ in 0..params.words_per_doc {
                let w = if rng.gen_bool(params.shared_fraction) {
                    SHARED_WORDS.choose(&mut rng)
                } else {
                    pool.choose(&mut rng)
                };
                words.push(*w.expect("non-empty pool"));
                if rng.gen_bool(0.25) {
                    words.push(CONNECTIVES.choose(&mut rng).expect("non-empty"));
                }
            }
            docs.push(LabeledDoc {
                id: format!(
                    "{}-{i:02}",
                    domain.short_name().to_lowercase().replace(' ', "_")
                ),
                domain,
                text: words.join(" "),
            });
        }
    }
    docs
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn pools_are_disjoint() {
        let mut seen = BTreeSet::new();
        for d in KnownDomain::ALL {
            for w in keyword_pool(d) {
                assert!(seen.insert(*w), "`{w}` appears in two pools");
                assert!(!SHARED_WORDS.contains(w));
            }
        }
    }

    #[test]
    fn corpus_shape_and_determinism() {
        let a = synthetic_corpus(&CorpusParams::default(), 5);
        assert_eq!(a.len(), 60);
        assert_eq!(a, synthetic_corpus(&CorpusParams::default(), 5));
        assert_ne!(a, synthetic_corpus(&CorpusParams::default(), 6));
    }
}
