//! Shared vocabulary for the governance pipeline.
//!
//! Everything here is plain immutable data. Parsing of the line-oriented
//! repository and policy formats lives with the modules that own those
//! formats; this module only provides the token-level `Display`/`FromStr`
//! pairs they build on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::canon::{Domain, Principal};
use crate::error::{Error, Result};

macro_rules! three_level {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            Low = 0,
            Moderate = 1,
            High = 2,
        }

        impl $name {
            pub const ALL: [$name; 3] = [$name::Low, $name::Moderate, $name::High];

            pub fn code(self) -> u8 {
                self as u8
            }

            pub fn from_code(code: u8) -> Option<Self> {
                match code {
                    0 => Some($name::Low),
                    1 => Some($name::Moderate),
                    2 => Some($name::High),
                    _ => None,
                }
            }

            pub fn as_str(self) -> &'static str {
                match self {
                    $name::Low => "Low",
                    $name::Moderate => "Moderate",
                    $name::High => "High",
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    "low" | "l" => Ok($name::Low),
                    "moderate" | "medium" | "m" => Ok($name::Moderate),
                    "high" | "h" => Ok($name::High),
                    other => Err(Error::Config(format!(
                        "unknown {} `{other}`",
                        stringify!($name)
                    ))),
                }
            }
        }
    };
}

three_level!(
    /// Requester trust (the KYU score).
    TrustLevel
);
three_level!(
    /// Sensitivity of the requested data.
    SensitivityLevel
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EmailClass {
    Personal,
    Organizational,
}

impl EmailClass {
    /// Ordinal trust contribution.
    pub fn trust_code(self) -> u8 {
        match self {
            EmailClass::Personal => 0,
            EmailClass::Organizational => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PurposeClass {
    ExternalUse,
    SelfUse,
    OrganizationalUse,
}

impl PurposeClass {
    /// Ordinal trust contribution.
    pub fn trust_code(self) -> u8 {
        match self {
            PurposeClass::ExternalUse => 0,
            PurposeClass::SelfUse => 1,
            PurposeClass::OrganizationalUse => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PurposeClass::ExternalUse => "External Use",
            PurposeClass::SelfUse => "Self Use",
            PurposeClass::OrganizationalUse => "Organisational Use",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Text,
    IdentifierLike,
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ColumnKind::Numeric => "Numeric",
            ColumnKind::Categorical => "Categorical",
            ColumnKind::Text => "Text",
            ColumnKind::IdentifierLike => "IdentifierLike",
        };
        f.write_str(s)
    }
}

/// Per-column role that decides which strategy action applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttributeClass {
    Identifier,
    QuasiIdentifier,
    SensitiveValue,
}

impl AttributeClass {
    pub const ALL: [AttributeClass; 3] = [
        AttributeClass::Identifier,
        AttributeClass::QuasiIdentifier,
        AttributeClass::SensitiveValue,
    ];
}

impl fmt::Display for AttributeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AttributeClass::Identifier => "Identifier",
            AttributeClass::QuasiIdentifier => "QuasiIdentifier",
            AttributeClass::SensitiveValue => "SensitiveValue",
        };
        f.write_str(s)
    }
}

impl FromStr for AttributeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['_', '-', ' '], "")
            .as_str()
        {
            "identifier" | "id" => Ok(AttributeClass::Identifier),
            "quasiidentifier" | "quasi" | "qi" => Ok(AttributeClass::QuasiIdentifier),
            "sensitivevalue" | "sensitive" => Ok(AttributeClass::SensitiveValue),
            _ => Err(Error::Config(format!("unknown attribute class `{s}`"))),
        }
    }
}

/// One table cell. Numbers keep their source text so that projection never
/// re-renders a value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Null,
    Number(String),
    Text(String),
}

impl Cell {
    pub fn is_null(&self) -> bool {
        matches!(self, Cell::Null)
    }

    /// Text rendering; `None` for null.
    pub fn render(&self) -> Option<&str> {
        match self {
            Cell::Null => None,
            Cell::Number(s) | Cell::Text(s) => Some(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Number(s) => s.trim().parse().ok(),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.render().unwrap_or(""))
    }
}

/// A raw data access request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessRequest {
    pub email: String,
    pub purpose: String,
    pub requested_attributes: Vec<String>,
    pub source_file: String,
}

impl AccessRequest {
    pub fn new(
        email: impl Into<String>,
        purpose: impl Into<String>,
        requested_attributes: Vec<String>,
        source_file: impl Into<String>,
    ) -> Result<Self> {
        let request = AccessRequest {
            email: email.into(),
            purpose: purpose.into(),
            requested_attributes,
            source_file: source_file.into(),
        };
        request.validate()?;
        Ok(request)
    }

    pub fn validate(&self) -> Result<()> {
        let email = self.email.trim();
        if email.is_empty() {
            return Err(Error::InvalidRequest("email is empty".into()));
        }
        let ats = email.matches('@').count();
        if ats != 1 {
            return Err(Error::InvalidRequest(format!(
                "email `{email}` must contain exactly one '@' (found {ats})"
            )));
        }
        if self.requested_attributes.is_empty() {
            return Err(Error::InvalidRequest("no requested attributes".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for attr in &self.requested_attributes {
            if !seen.insert(attr.as_str()) {
                return Err(Error::InvalidRequest(format!(
                    "attribute `{attr}` requested twice"
                )));
            }
        }
        if self.source_file.trim().is_empty() {
            return Err(Error::InvalidRequest("source file is empty".into()));
        }
        Ok(())
    }

    /// Parses the labelled block form:
    ///
    /// ```text
    /// Email: person_1@gmail.com
    /// Purpose: Organisational Use
    /// Requested Attributes: annual_income, loan_status
    /// Source File: Finance_Banking_Adult_FinanceBanking.csv
    /// ```
    ///
    /// Labels are case-insensitive; an optional leading `User Request:` line
    /// and blank lines are ignored.
    pub fn parse_block(text: &str) -> Result<Self> {
        let mut email = None;
        let mut purpose = None;
        let mut attrs = None;
        let mut source = None;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((label, value)) = line.split_once(':') else {
                return Err(Error::parse(
                    idx + 1,
                    format!("expected `Label: value`, got `{line}`"),
                ));
            };
            let value = value.trim();
            match label.trim().to_ascii_lowercase().as_str() {
                "user request" if value.is_empty() => {}
                "email" => email = Some(value.to_string()),
                "purpose" => purpose = Some(value.to_string()),
                "requested attributes" => {
                    attrs = Some(
                        value
                            .split(',')
                            .map(|a| a.trim().to_string())
                            .filter(|a| !a.is_empty())
                            .collect::<Vec<_>>(),
                    )
                }
                "source file" => source = Some(value.to_string()),
                other => {
                    return Err(Error::parse(idx + 1, format!("unknown field `{other}`")));
                }
            }
        }
        let missing = |name: &str| Error::InvalidRequest(format!("missing field `{name}`"));
        AccessRequest::new(
            email.ok_or_else(|| missing("Email"))?,
            purpose.ok_or_else(|| missing("Purpose"))?,
            attrs.ok_or_else(|| missing("Requested Attributes"))?,
            source.ok_or_else(|| missing("Source File"))?,
        )
    }

    pub fn to_block(&self) -> String {
        format!(
            "Email: {}\nPurpose: {}\nRequested Attributes: {}\nSource File: {}\n",
            self.email,
            self.purpose,
            self.requested_attributes.join(", "),
            self.source_file
        )
    }

    /// Short deterministic identifier derived from the request content.
    pub fn request_id(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.to_block().as_bytes());
        hex::encode(&digest[..6])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub email_class: EmailClass,
    pub email: String,
}

/// Parsed form of an [`AccessRequest`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestProfile {
    pub user_profile: UserProfile,
    pub intent: PurposeClass,
    pub data_type: Vec<(String, ColumnKind)>,
    pub access_purpose: String,
    /// Set when the purpose matched no keyword and the conservative default
    /// was used.
    pub low_confidence: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    MustNot,
    OnlyIf,
    May,
    Must,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::MustNot => "MustNot",
            Modality::OnlyIf => "OnlyIf",
            Modality::May => "May",
            Modality::Must => "Must",
        }
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MustNot" => Ok(Modality::MustNot),
            "OnlyIf" => Ok(Modality::OnlyIf),
            "May" => Ok(Modality::May),
            "Must" => Ok(Modality::Must),
            _ => Err(Error::Config(format!("unknown modality `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleAction {
    Collect,
    Process,
    Share,
    Erase,
}

impl RuleAction {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleAction::Collect => "Collect",
            RuleAction::Process => "Process",
            RuleAction::Share => "Share",
            RuleAction::Erase => "Erase",
        }
    }
}

impl FromStr for RuleAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Collect" => Ok(RuleAction::Collect),
            "Process" => Ok(RuleAction::Process),
            "Share" => Ok(RuleAction::Share),
            "Erase" => Ok(RuleAction::Erase),
            _ => Err(Error::Config(format!("unknown rule action `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleClause {
    pub modality: Modality,
    pub action: RuleAction,
    pub condition: String,
    pub citation: String,
}

impl RuleClause {
    pub fn new(
        modality: Modality,
        action: RuleAction,
        condition: impl Into<String>,
        citation: impl Into<String>,
    ) -> Result<Self> {
        let clause = RuleClause {
            modality,
            action,
            condition: condition.into(),
            citation: citation.into(),
        };
        if clause.condition.trim().is_empty()
            && matches!(clause.modality, Modality::MustNot | Modality::OnlyIf)
        {
            return Err(Error::Consistency(format!(
                "{} rule requires a condition",
                clause.modality.as_str()
            )));
        }
        Ok(clause)
    }
}

/// One row of the compliance repository.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceTuple {
    /// Principal as written in the source; matching goes through [`Principal`].
    pub data_principal: String,
    /// Domain as written in the source; matching goes through [`Domain`].
    pub domain: String,
    pub rules: Vec<RuleClause>,
    pub receiving_entities: Vec<String>,
    pub sensitivity: SensitivityLevel,
    pub validated: bool,
}

impl ComplianceTuple {
    pub fn validate(&self) -> Result<()> {
        if self.data_principal.trim().is_empty() {
            return Err(Error::Consistency(
                "tuple has an empty data principal".into(),
            ));
        }
        if self.domain.trim().is_empty() {
            return Err(Error::Consistency("tuple has an empty domain".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::Consistency("tuple has no rules".into()));
        }
        if self.receiving_entities.is_empty() {
            return Err(Error::Consistency("tuple has no receiving entities".into()));
        }
        if self.receiving_entities.iter().any(|r| r.trim().is_empty()) {
            return Err(Error::Consistency(
                "tuple has a blank receiving entity".into(),
            ));
        }
        Ok(())
    }

    pub fn principal(&self) -> Principal {
        Principal::parse(&self.data_principal)
    }

    pub fn canonical_domain(&self) -> Domain {
        Domain::parse(&self.domain)
    }

    /// Distinct citations in rule order.
    pub fn citations(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for rule in &self.rules {
            let c = rule.citation.as_str();
            if !c.is_empty() && !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }
}

/// A per-cell transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnonymizationAction {
    NoOp,
    MaskPartial(f64),
    MaskFull,
    GeneralizeNumeric(u32),
    GeneralizeCategory(String),
    Pseudonymize,
    Encrypt,
    Suppress,
}

impl AnonymizationAction {
    pub fn mask_partial(fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Config(format!(
                "mask fraction {fraction} must lie strictly inside (0, 1)"
            )));
        }
        Ok(AnonymizationAction::MaskPartial(fraction))
    }

    pub fn generalize_numeric(bin_count: u32) -> Result<Self> {
        if bin_count < 2 {
            return Err(Error::Config(format!(
                "bin count {bin_count} must be at least 2"
            )));
        }
        Ok(AnonymizationAction::GeneralizeNumeric(bin_count))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AnonymizationAction::MaskPartial(p) => Self::mask_partial(*p).map(drop),
            AnonymizationAction::GeneralizeNumeric(b) => Self::generalize_numeric(*b).map(drop),
            AnonymizationAction::GeneralizeCategory(h) if h.trim().is_empty() => Err(
                Error::Config("category hierarchy reference is empty".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Protection rank used by the policy monotonicity lint.
    pub fn strength(&self) -> u8 {
        match self {
            AnonymizationAction::NoOp => 0,
            AnonymizationAction::GeneralizeNumeric(_)
            | AnonymizationAction::GeneralizeCategory(_) => 1,
            AnonymizationAction::MaskPartial(_) => 2,
            AnonymizationAction::Pseudonymize
            | AnonymizationAction::MaskFull
            | AnonymizationAction::Encrypt => 3,
            AnonymizationAction::Suppress => 4,
        }
    }

    /// True when `self` protects strictly less than `other`.
    pub fn is_weaker_than(&self, other: &AnonymizationAction) -> bool {
        use AnonymizationAction::*;
        match (self, other) {
            (MaskPartial(a), MaskPartial(b)) => a < b,
            // fewer bins = coarser output
            (GeneralizeNumeric(a), GeneralizeNumeric(b)) => a > b,
            _ => self.strength() < other.strength(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AnonymizationAction::NoOp => "no anonymisation",
            AnonymizationAction::MaskPartial(_) => "partial masking",
            AnonymizationAction::MaskFull => "full masking",
            AnonymizationAction::GeneralizeNumeric(_) => "numeric generalization",
            AnonymizationAction::GeneralizeCategory(_) => "category generalization",
            AnonymizationAction::Pseudonymize => "pseudonymization",
            AnonymizationAction::Encrypt => "encryption",
            AnonymizationAction::Suppress => "suppression",
        }
    }
}

impl fmt::Display for AnonymizationAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnonymizationAction::NoOp => f.write_str("noop"),
            AnonymizationAction::MaskPartial(p) => write!(f, "mask_partial({p})"),
            AnonymizationAction::MaskFull => f.write_str("mask_full"),
            AnonymizationAction::GeneralizeNumeric(b) => write!(f, "generalize({b})"),
            AnonymizationAction::GeneralizeCategory(h) => write!(f, "generalize_category({h})"),
            AnonymizationAction::Pseudonymize => f.write_str("pseudonymize"),
            AnonymizationAction::Encrypt => f.write_str("encrypt"),
            AnonymizationAction::Suppress => f.write_str("suppress"),
        }
    }
}

impl FromStr for AnonymizationAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once('(') {
            Some((head, rest)) => {
                let arg = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Config(format!("unclosed parenthesis in `{s}`")))?;
                (head.trim(), Some(arg.trim()))
            }
            None => (s, None),
        };
        let need_arg = || arg.ok_or_else(|| Error::Config(format!("`{head}` needs an argument")));
        let action = match (head, arg) {
            ("noop", None) => AnonymizationAction::NoOp,
            ("mask_full", None) => AnonymizationAction::MaskFull,
            ("pseudonymize", None) => AnonymizationAction::Pseudonymize,
            ("encrypt", None) => AnonymizationAction::Encrypt,
            ("suppress", None) => AnonymizationAction::Suppress,
            ("mask_partial", _) => {
                let p: f64 = need_arg()?
                    .parse()
                    .map_err(|_| Error::Config(format!("bad mask fraction in `{s}`")))?;
                AnonymizationAction::mask_partial(p)?
            }
            ("generalize", _) => {
                let b: u32 = need_arg()?
                    .parse()
                    .map_err(|_| Error::Config(format!("bad bin count in `{s}`")))?;
                AnonymizationAction::generalize_numeric(b)?
            }
            ("generalize_category", _) => {
                let action = AnonymizationAction::GeneralizeCategory(need_arg()?.to_string());
                action.validate()?;
                action
            }
            _ => return Err(Error::Config(format!("unknown action `{s}`"))),
        };
        Ok(action)
    }
}

/// Action per attribute class. Total by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassActions {
    pub identifier: AnonymizationAction,
    pub quasi_identifier: AnonymizationAction,
    pub sensitive_value: AnonymizationAction,
}

impl ClassActions {
    pub fn uniform(action: AnonymizationAction) -> Self {
        ClassActions {
            identifier: action.clone(),
            quasi_identifier: action.clone(),
            sensitive_value: action,
        }
    }

    pub fn get(&self, class: AttributeClass) -> &AnonymizationAction {
        match class {
            AttributeClass::Identifier => &self.identifier,
            AttributeClass::QuasiIdentifier => &self.quasi_identifier,
            AttributeClass::SensitiveValue => &self.sensitive_value,
        }
    }

    pub fn get_mut(&mut self, class: AttributeClass) -> &mut AnonymizationAction {
        match class {
            AttributeClass::Identifier => &mut self.identifier,
            AttributeClass::QuasiIdentifier => &mut self.quasi_identifier,
            AttributeClass::SensitiveValue => &mut self.sensitive_value,
        }
    }
}

/// The privacy action plan chosen for one request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub name: String,
    pub actions: ClassActions,
    pub rationale: String,
    /// Sensitive values may be encrypted instead of masked.
    #[serde(default)]
    pub encrypt_alternative: bool,
}

impl Strategy {
    pub fn action_for(&self, class: AttributeClass) -> &AnonymizationAction {
        self.actions.get(class)
    }

    pub fn is_raw(&self) -> bool {
        AttributeClass::ALL
            .iter()
            .all(|c| *self.action_for(*c) == AnonymizationAction::NoOp)
    }

    /// Human-facing description of the dominant technique.
    pub fn technique(&self) -> String {
        if self.is_raw() {
            return "No Anonymisation".to_string();
        }
        let strongest = AttributeClass::ALL
            .iter()
            .map(|c| self.action_for(*c))
            .max_by_key(|a| a.strength())
            .expect("three classes");
        // Sensitive values drive the headline when they are transformed.
        let headline = match &self.actions.sensitive_value {
            AnonymizationAction::NoOp => strongest,
            other => other,
        };
        headline.label().to_string()
    }

    /// Replaces masked sensitive values with encryption when allowed.
    pub fn with_encryption(mut self) -> Self {
        if self.encrypt_alternative && self.actions.sensitive_value == AnonymizationAction::MaskFull
        {
            self.actions.sensitive_value = AnonymizationAction::Encrypt;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataProfile {
    pub dataset_id: String,
    pub domain: String,
    pub owner: String,
    pub sensitivity: SensitivityLevel,
    pub trust: TrustLevel,
    pub matched_tuples: Vec<ComplianceTuple>,
}

/// Field-level transformation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub row_index: usize,
    pub column: String,
    pub original: Cell,
    pub transformed: Cell,
    pub action: AnonymizationAction,
    pub distance: f64,
    pub justification: String,
}

impl AuditEntry {
    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.distance) {
            return Err(Error::Consistency(format!(
                "distance {} outside [0,1] at ({}, {})",
                self.distance, self.row_index, self.column
            )));
        }
        if self.action == AnonymizationAction::NoOp
            && (self.original != self.transformed || self.distance != 0.0)
        {
            return Err(Error::Consistency(format!(
                "no-op entry changed the cell at ({}, {})",
                self.row_index, self.column
            )));
        }
        Ok(())
    }

    /// One line of the audit log (JSON lines).
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("audit entry serializes")
    }

    pub fn from_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_order_matches_codes() {
        for a in TrustLevel::ALL {
            for b in TrustLevel::ALL {
                assert_eq!(a < b, a.code() < b.code());
            }
        }
        for a in SensitivityLevel::ALL {
            for b in SensitivityLevel::ALL {
                assert_eq!(a.cmp(&b), a.code().cmp(&b.code()));
            }
        }
        assert_eq!(TrustLevel::from_code(3), None);
    }

    #[test]
    fn request_email_validation() {
        let attrs = vec!["a".to_string()];
        assert!(AccessRequest::new("x@y.com", "Self Use", attrs.clone(), "f.csv").is_ok());
        assert!(AccessRequest::new("xy.com", "Self Use", attrs.clone(), "f.csv").is_err());
        assert!(AccessRequest::new("x@@y.com", "Self Use", attrs.clone(), "f.csv").is_err());
        assert!(AccessRequest::new("", "Self Use", attrs, "f.csv").is_err());
        assert!(AccessRequest::new("x@y.com", "p", vec![], "f.csv").is_err());
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(AccessRequest::new("x@y.com", "p", dup, "f.csv").is_err());
    }

    #[test]
    fn request_block_parses_case_study() {
        let text = "User Request:\nEmail: person_1@gmail.com\nPurpose: Organisational Use\n\
                    Requested Attributes: annual_income, loan_status, monthly_expenditure\n\
                    Source File: Finance_Banking_Adult_FinanceBanking.csv\n";
        let req = AccessRequest::parse_block(text).unwrap();
        assert_eq!(req.email, "person_1@gmail.com");
        assert_eq!(
            req.requested_attributes,
            ["annual_income", "loan_status", "monthly_expenditure"]
        );
        assert_eq!(AccessRequest::parse_block(&req.to_block()).unwrap(), req);
    }

    #[test]
    fn action_parameters_are_checked() {
        assert!(AnonymizationAction::mask_partial(0.0).is_err());
        assert!(AnonymizationAction::mask_partial(1.0).is_err());
        assert!(AnonymizationAction::mask_partial(0.5).is_ok());
        assert!(AnonymizationAction::generalize_numeric(1).is_err());
        assert!("mask_partial(1.5)".parse::<AnonymizationAction>().is_err());
        assert!("generalize(1)".parse::<AnonymizationAction>().is_err());
        assert!("rot13".parse::<AnonymizationAction>().is_err());
    }

    #[test]
    fn action_text_round_trip() {
        let actions = [
            AnonymizationAction::NoOp,
            AnonymizationAction::MaskPartial(0.25),
            AnonymizationAction::MaskFull,
            AnonymizationAction::GeneralizeNumeric(4),
            AnonymizationAction::GeneralizeCategory("occupation".into()),
            AnonymizationAction::Pseudonymize,
            AnonymizationAction::Encrypt,
            AnonymizationAction::Suppress,
        ];
        for a in actions {
            assert_eq!(a.to_string().parse::<AnonymizationAction>().unwrap(), a);
        }
    }

    #[test]
    fn noop_audit_entry_must_be_identity() {
        let mut entry = AuditEntry {
            row_index: 0,
            column: "c".into(),
            original: Cell::Number("1".into()),
            transformed: Cell::Number("1".into()),
            action: AnonymizationAction::NoOp,
            distance: 0.0,
            justification: String::new(),
        };
        assert!(entry.check().is_ok());
        entry.transformed = Cell::Text("*".into());
        assert!(entry.check().is_err());
        assert_eq!(AuditEntry::from_line(&entry.to_line()).unwrap(), entry);
    }
}
