use std::collections::BTreeSet;

use regex::Regex;

use crate::error::{Error, Result};
use crate::model::{
    AccessRequest, EmailClass, PurposeClass, RequestProfile, TrustLevel, UserProfile,
};
use crate::store::DatasetMetadata;

pub const DEFAULT_FREE_MAIL: &[&str] = &["gmail.com", "yahoo.com", "hotmail.com", "outlook.com"];

pub const DEFAULT_PURPOSE_KEYWORDS: &[(&str, PurposeClass)] = &[
    ("organisational", PurposeClass::OrganizationalUse),
    ("organizational", PurposeClass::OrganizationalUse),
    ("organisation", PurposeClass::OrganizationalUse),
    ("organization", PurposeClass::OrganizationalUse),
    ("self", PurposeClass::SelfUse),
    ("personal use", PurposeClass::SelfUse),
    ("external", PurposeClass::ExternalUse),
    ("third party", PurposeClass::ExternalUse),
    ("third-party", PurposeClass::ExternalUse),
    ("marketing", PurposeClass::ExternalUse),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct TrustFeatures {
    pub email: EmailClass,
    pub purpose: PurposeClass,
}

impl TrustFeatures {
    pub fn grid() -> [TrustFeatures; 6] {
        let mut out = [TrustFeatures {
            email: EmailClass::Personal,
            purpose: PurposeClass::ExternalUse,
        }; 6];
        let mut i = 0;
        for email in [EmailClass::Personal, EmailClass::Organizational] {
            for purpose in [
                PurposeClass::ExternalUse,
                PurposeClass::SelfUse,
                PurposeClass::OrganizationalUse,
            ] {
                out[i] = TrustFeatures { email, purpose };
                i += 1;
            }
        }
        out
    }

    pub fn of(profile: &RequestProfile) -> Self {
        TrustFeatures {
            email: profile.user_profile.email_class,
            purpose: profile.intent,
        }
    }
}

/// floor((email code + purpose code) / 2).
pub fn oracle_trust(features: TrustFeatures) -> TrustLevel {
    let code = (features.email.trust_code() + features.purpose.trust_code()) / 2;
    TrustLevel::from_code(code).expect("codes stay within 0..=2")
}

#[derive(Debug, Clone)]
pub struct RequestInterpreter {
    free_mail: BTreeSet<String>,
    purposes: Vec<(Regex, PurposeClass)>,
}

impl Default for RequestInterpreter {
    fn default() -> Self {
        RequestInterpreter::new(
            DEFAULT_FREE_MAIL.iter().map(|s| s.to_string()),
            DEFAULT_PURPOSE_KEYWORDS
                .iter()
                .map(|(k, c)| (k.to_string(), *c)),
        )
    }
}

fn keyword_regex(keyword: &str) -> Regex {
    Regex::new(&format!(r"(?i)\b{}\b", regex::escape(keyword.trim())))
        .expect("escaped keyword compiles")
}

/// One free-mail domain per line; `#` comments.
pub fn parse_free_mail(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_ascii_lowercase)
        .collect()
}

/// `keyword = Class` per line, Class one of OrganizationalUse, SelfUse,
/// ExternalUse.
pub fn parse_purpose_keywords(text: &str) -> Result<Vec<(String, PurposeClass)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (kw, class) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(idx + 1, "expected `keyword = Class`"))?;
        let class = match class.trim() {
            "OrganizationalUse" => PurposeClass::OrganizationalUse,
            "SelfUse" => PurposeClass::SelfUse,
            "ExternalUse" => PurposeClass::ExternalUse,
            other => {
                return Err(Error::parse(
                    idx + 1,
                    format!("unknown purpose class `{other}`"),
                ))
            }
        };
        if kw.trim().is_empty() {
            return Err(Error::parse(idx + 1, "empty keyword"));
        }
        out.push((kw.trim().to_string(), class));
    }
    Ok(out)
}

impl RequestInterpreter {
    pub fn new(
        free_mail: impl IntoIterator<Item = String>,
        purposes: impl IntoIterator<Item = (String, PurposeClass)>,
    ) -> Self {
        RequestInterpreter {
            free_mail: free_mail
                .into_iter()
                .map(|d| d.trim().to_ascii_lowercase())
                .collect(),
            purposes: purposes
                .into_iter()
                .map(|(k, c)| (keyword_regex(&k), c))
                .collect(),
        }
    }

    pub fn email_class(&self, email: &str) -> EmailClass {
        let domain = email
            .rsplit_once('@')
            .map(|(_, d)| d.trim().to_ascii_lowercase())
            .unwrap_or_default();
        let personal = self
            .free_mail
            .iter()
            .any(|f| domain == *f || domain.ends_with(&format!(".{f}")));
        if personal {
            EmailClass::Personal
        } else {
            EmailClass::Organizational
        }
    }

    /// Purpose class and a low-confidence flag. When several classes match,
    /// the lowest-trust one wins.
    pub fn purpose_class(&self, purpose: &str) -> (PurposeClass, bool) {
        self.purposes
            .iter()
            .filter(|(re, _)| re.is_match(purpose))
            .map(|(_, c)| *c)
            .min_by_key(|c| c.trust_code())
            .map(|c| (c, false))
            .unwrap_or((PurposeClass::ExternalUse, true))
    }

    pub fn interpret_request(
        &self,
        request: &AccessRequest,
        metadata: &DatasetMetadata,
    ) -> Result<RequestProfile> {
        request.validate()?;
        let mut missing = Vec::new();
        let mut data_type = Vec::new();
        for attr in &request.requested_attributes {
            match metadata.column(attr) {
                Some(c) => data_type.push((attr.clone(), c.kind)),
                None => missing.push(attr.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::UnknownAttributes {
                dataset: metadata.dataset_id.clone(),
                missing,
            });
        }
        let (intent, low_confidence) = self.purpose_class(&request.purpose);
        Ok(RequestProfile {
            user_profile: UserProfile {
                email_class: self.email_class(&request.email),
                email: request.email.trim().to_string(),
            },
            intent,
            data_type,
            access_purpose: request.purpose.clone(),
            low_confidence,
        })
    }
}
