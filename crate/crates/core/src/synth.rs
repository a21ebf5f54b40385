//! Seeded synthetic datasets and request batches for each sector.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canon::KnownDomain;
use crate::error::{Error, Result};
use crate::model::{AccessRequest, AttributeClass, ColumnKind};
use crate::store::{DataStore, DatasetMetadata, Sidecar, SidecarColumn};

/// The finance request used throughout the examples.
pub const FINANCE_REQUEST: &str = "User Request:
Email: person_1@gmail.com
Purpose: Organisational Use
Requested Attributes: annual_income, loan_status, monthly_expenditure
Source File: Finance_Banking_Adult_FinanceBanking.csv
";

const CITIES: &[&str] = &[
    "Bengaluru",
    "Mumbai",
    "Delhi",
    "Chennai",
    "Pune",
    "Kolkata",
    "Hyderabad",
    "Jaipur",
];
const GENDERS: &[&str] = &["Female", "Male", "Other"];

#[derive(Debug, Clone, Copy)]
enum Gen {
    Id(&'static str),
    Age,
    Pick(&'static [&'static str]),
    /// Two-decimal amount in `[lo, hi)`.
    Amount(u64, u64),
}

#[derive(Debug, Clone, Copy)]
struct ColumnSpec {
    name: &'static str,
    class: AttributeClass,
    gen: Gen,
}

const fn col(name: &'static str, class: AttributeClass, gen: Gen) -> ColumnSpec {
    ColumnSpec { name, class, gen }
}

use AttributeClass::{Identifier as Id, QuasiIdentifier as Qi, SensitiveValue as Sv};

/// Sector-specific columns after the shared `record_id, age, city` prefix.
fn sensitive_columns(domain: KnownDomain) -> [ColumnSpec; 2] {
    match domain {
        KnownDomain::ECommerce => [
            col("order_value", Sv, Gen::Amount(100, 99_999)),
            col(
                "payment_method",
                Sv,
                Gen::Pick(&["Card", "UPI", "Wallet", "COD"]),
            ),
        ],
        KnownDomain::Healthcare => [
            col(
                "diagnosis",
                Sv,
                Gen::Pick(&["Diabetes", "Asthma", "Hypertension", "Migraine"]),
            ),
            col("treatment_cost", Sv, Gen::Amount(500, 500_000)),
        ],
        KnownDomain::SocialMedia => [
            col("follower_count", Sv, Gen::Amount(0, 1_000_000)),
            col(
                "account_status",
                Sv,
                Gen::Pick(&["Active", "Dormant", "Suspended"]),
            ),
        ],
        KnownDomain::Education => [
            col("exam_score", Sv, Gen::Amount(0, 100)),
            col(
                "school_type",
                Sv,
                Gen::Pick(&["Public", "Private", "Aided"]),
            ),
        ],
        KnownDomain::Telecom => [
            col("monthly_bill", Sv, Gen::Amount(99, 9_999)),
            col("plan_type", Sv, Gen::Pick(&["Prepaid", "Postpaid"])),
        ],
        KnownDomain::Finance => [
            col("annual_income", Sv, Gen::Amount(1_000_000, 9_999_999)),
            col("loan_status", Sv, Gen::Pick(&["Approved", "Rejected"])),
        ],
        KnownDomain::Startups => [
            col("funding_amount", Sv, Gen::Amount(100_000, 99_999_999)),
            col(
                "funding_stage",
                Sv,
                Gen::Pick(&["Seed", "SeriesA", "SeriesB"]),
            ),
        ],
        KnownDomain::Travel => [
            col("booking_amount", Sv, Gen::Amount(1_000, 300_000)),
            col(
                "travel_class",
                Sv,
                Gen::Pick(&["Economy", "Business", "First"]),
            ),
        ],
        KnownDomain::Employment => [
            col("salary", Sv, Gen::Amount(200_000, 5_000_000)),
            col(
                "performance_rating",
                Sv,
                Gen::Pick(&["Exceeds", "Meets", "Below"]),
            ),
        ],
        KnownDomain::Government => [
            col("subsidy_amount", Sv, Gen::Amount(1_000, 200_000)),
            col(
                "scheme_name",
                Sv,
                Gen::Pick(&["Housing", "Pension", "Ration"]),
            ),
        ],
    }
}

/// A generated CSV with its sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub file_name: String,
    pub csv: String,
    pub sidecar: Sidecar,
}

impl SyntheticDataset {
    pub fn sidecar_text(&self) -> String {
        toml::to_string(&self.sidecar).expect("sidecar serializes")
    }

    pub fn column_names(&self) -> Vec<String> {
        self.csv
            .lines()
            .next()
            .map(|h| h.split(',').map(String::from).collect())
            .unwrap_or_default()
    }

    pub fn ingest(&self, store: &mut DataStore) -> Result<DatasetMetadata> {
        store.ingest_reader(&self.file_name, self.csv.as_bytes(), Some(&self.sidecar))
    }

    /// Writes `<file_name>` and its `.meta.toml` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(&self.file_name);
        std::fs::write(&path, &self.csv).map_err(|e| Error::io(&path, e))?;
        let side = Sidecar::default_path(&path);
        std::fs::write(&side, self.sidecar_text()).map_err(|e| Error::io(&side, e))?;
        Ok(path)
    }
}

fn render(gen: Gen, row: usize, rng: &mut ChaCha8Rng) -> String {
    match gen {
        Gen::Id(prefix) => format!("{prefix}{:05}", row + 1),
        Gen::Age => rng.gen_range(18..80).to_string(),
        Gen::Pick(values) => values.choose(rng).expect("non-empty").to_string(),
        Gen::Amount(lo, hi) => {
            let cents = rng.gen_range(lo * 100..hi * 100);
            format!("{}.{:02}", cents / 100, cents % 100)
        }
    }
}

fn build(
    file_name: String,
    domain: &str,
    specs: &[ColumnSpec],
    rows: usize,
    seed: u64,
) -> SyntheticDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = specs.iter().map(|s| s.name).collect::<Vec<_>>().join(",");
    csv.push('\n');
    for r in 0..rows {
        let line: Vec<String> = specs.iter().map(|s| render(s.gen, r, &mut rng)).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    let columns: BTreeMap<String, SidecarColumn> = specs
        .iter()
        .map(|s| {
            let kind = match s.gen {
                Gen::Id(_) => ColumnKind::IdentifierLike,
                Gen::Age | Gen::Amount(..) => ColumnKind::Numeric,
                Gen::Pick(_) => ColumnKind::Categorical,
            };
            (
                s.name.to_string(),
                SidecarColumn {
                    class: Some(s.class),
                    kind: Some(kind),
                },
            )
        })
        .collect();
    SyntheticDataset {
        sidecar: Sidecar {
            domain: Some(domain.to_string()),
            owner: Some("Adult Individual".to_string()),
            name: file_name
                .trim_end_matches(".csv")
                .rsplit('_')
                .next()
                .map(String::from),
            columns,
            hierarchies: BTreeMap::new(),
        },
        file_name,
        csv,
    }
}

/// The finance table behind [`FINANCE_REQUEST`]; incomes are ten characters
/// wide (`2170516.25`).
pub fn finance_dataset(rows: usize, seed: u64) -> SyntheticDataset {
    let specs = [
        col("customer_id", Id, Gen::Id("CUST")),
        col("age", Qi, Gen::Age),
        col("gender", Qi, Gen::Pick(GENDERS)),
        col("city", Qi, Gen::Pick(CITIES)),
        col("annual_income", Sv, Gen::Amount(1_000_000, 9_999_999)),
        col("loan_status", Sv, Gen::Pick(&["Approved", "Rejected"])),
        col("monthly_expenditure", Sv, Gen::Amount(10_000, 99_999)),
    ];
    build(
        "Finance_Banking_Adult_FinanceBanking.csv".to_string(),
        KnownDomain::Finance.long_name(),
        &specs,
        rows,
        seed,
    )
}

pub fn domain_dataset(domain: KnownDomain, rows: usize, seed: u64) -> SyntheticDataset {
    let [a, b] = sensitive_columns(domain);
    let specs = [
        col("record_id", Id, Gen::Id("REC")),
        col("age", Qi, Gen::Age),
        col("city", Qi, Gen::Pick(CITIES)),
        a,
        b,
    ];
    let token: String = domain
        .short_name()
        .chars()
        .filter(|c| c.is_alphanumeric())
        .collect();
    build(
        format!("{token}_Adult_{token}Records.csv"),
        domain.long_name(),
        &specs,
        rows,
        seed,
    )
}

/// Requester contexts used for batches, one per trust level.
pub const REQUESTERS: &[(&str, &str)] = &[
    ("analyst@bank.co.in", "Organisational Use"),
    ("person_1@gmail.com", "Organisational Use"),
    ("person_2@gmail.com", "marketing campaign"),
];

/// Every column of `dataset` requested by each of [`REQUESTERS`].
pub fn batch_requests(dataset: &SyntheticDataset) -> Vec<AccessRequest> {
    REQUESTERS
        .iter()
        .map(|(email, purpose)| {
            AccessRequest::new(
                *email,
                *purpose,
                dataset.column_names(),
                dataset.file_name.clone(),
            )
            .expect("well-formed synthetic request")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finance_incomes_are_ten_chars() {
        let ds = finance_dataset(200, 1);
        let mut store = DataStore::new();
        let meta = ds.ingest(&mut store).unwrap();
        assert_eq!(meta.domain, "Finance & Banking");
        assert_eq!(meta.owner, "Adult Individual");
        let idx = meta.column_index("annual_income").unwrap();
        assert_eq!(ds.csv.lines().count(), 201);
        for line in ds.csv.lines().skip(1) {
            assert_eq!(line.split(',').nth(idx).unwrap().len(), 10);
        }
        assert_eq!(ds, finance_dataset(200, 1));
    }

    #[test]
    fn every_domain_ingests() {
        let mut store = DataStore::new();
        for (i, d) in KnownDomain::ALL.into_iter().enumerate() {
            let meta = domain_dataset(d, 20, i as u64).ingest(&mut store).unwrap();
            assert_eq!(meta.canonical_domain().known(), Some(d));
            assert_eq!(meta.columns.len(), 5);
        }
        assert_eq!(store.len(), 10);
    }

    #[test]
    fn sidecar_text_parses_back() {
        let ds = domain_dataset(KnownDomain::Travel, 5, 0);
        assert_eq!(Sidecar::parse(&ds.sidecar_text()).unwrap(), ds.sidecar);
    }

    #[test]
    fn finance_request_parses() {
        let r = AccessRequest::parse_block(FINANCE_REQUEST).unwrap();
        assert_eq!(r.source_file, finance_dataset(1, 0).file_name);
    }
}
