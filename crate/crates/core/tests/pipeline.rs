use privgov_core::audit::{load_result, verify_trace, Report, TraceVerdict};
use privgov_core::cluster::{
    synthetic_corpus, ClusterModel, ClusterParams, CorpusDoc, CorpusParams,
};
use privgov_core::engine::{Config, DomainSource, Engine, TrustScorer};
use privgov_core::model::{AccessRequest, AttributeClass, SensitivityLevel, TrustLevel};
use privgov_core::policy::PolicyMatrix;
use privgov_core::synth::{self, FINANCE_REQUEST};

fn finance_request() -> AccessRequest {
    AccessRequest::parse_block(FINANCE_REQUEST).unwrap()
}

#[test]
fn identical_inputs_give_identical_reports() {
    let run = || {
        let mut e = Engine::from_config(&Config::default()).unwrap();
        synth::finance_dataset(120, 9).ingest(&mut e.store).unwrap();
        let ev = e.evaluate(&finance_request()).unwrap();
        (ev.report.to_text(), ev.result.slice.to_csv_string())
    };
    assert_eq!(run(), run());
}

#[test]
fn report_cites_law_for_every_sensitive_attribute() {
    let mut e = Engine::new(b"k".to_vec());
    synth::finance_dataset(20, 2).ingest(&mut e.store).unwrap();
    let mut req = finance_request();
    req.requested_attributes = vec!["customer_id".into(), "age".into(), "annual_income".into()];
    let ev = e.evaluate(&req).unwrap();
    for a in &ev.report.attributes {
        if a.class == AttributeClass::SensitiveValue {
            assert!(!a.citations.is_empty(), "{} lacks citations", a.name);
        }
    }
    let text = ev.report.to_text();
    assert!(text.contains("Trust level (KYU): Moderate"));
    assert!(text.contains("Domain: Finance & Banking"));
    assert!(text.contains("Owner (data principal): Adult Individual"));
    assert!(text.contains("Sec 7(d)"));
    assert!(text.contains("customer_id: CUST00001 -> pid_"));
}

#[test]
fn raw_report_says_no_anonymisation() {
    let mut e = Engine::new(b"k".to_vec());
    e.store
        .ingest_reader(
            "Agriculture_Farmer_Crops.csv",
            "crop,yield\nWheat,3.5\n".as_bytes(),
            None,
        )
        .unwrap();
    let req = AccessRequest::new(
        "a@agri.org",
        "Organisational Use",
        vec!["crop".into(), "yield".into()],
        "Agriculture_Farmer_Crops.csv",
    )
    .unwrap();
    let ev = e.evaluate(&req).unwrap();
    assert_eq!(ev.trust, TrustLevel::High);
    assert!(ev.finding.defaulted);
    let text = ev.report.to_text();
    assert!(text.contains("Anonymisation Score: 0.0000"));
    assert!(text.contains("No Anonymisation"));
    assert!(text.contains(privgov_core::sensitivity::DEFAULT_LOW_RULE));
}

#[test]
fn healthcare_report_carries_table_citation() {
    let mut e = Engine::new(b"k".to_vec());
    e.store
        .ingest_reader(
            "Healthcare_Adult_Patients.csv",
            "patient_id,diagnosis\nP1,Asthma\nP2,Diabetes\n".as_bytes(),
            None,
        )
        .unwrap();
    let req = AccessRequest::new(
        "dr@hospital.org",
        "Self Use",
        vec!["diagnosis".into()],
        "Healthcare_Adult_Patients.csv",
    )
    .unwrap();
    let ev = e.evaluate(&req).unwrap();
    assert_eq!(ev.finding.level, SensitivityLevel::High);
    assert!(ev.report.to_text().contains("Sec 7(f–g)"));
}

#[test]
fn outputs_on_disk_replay_and_detect_tampering() {
    let mut e = Engine::new(b"k".to_vec());
    synth::finance_dataset(30, 4).ingest(&mut e.store).unwrap();
    let req = finance_request();
    let ev = e.evaluate(&req).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let [csv, report, audit] = ev.write_outputs(dir.path()).unwrap();
    let report = Report::from_text(&std::fs::read_to_string(report).unwrap()).unwrap();
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    let audit_text = std::fs::read_to_string(&audit).unwrap();
    let meta = e.store.metadata(&req.source_file).unwrap();

    let loaded = load_result(&csv_text, &audit_text, report.score).unwrap();
    assert_eq!(loaded, ev.result);
    assert_eq!(
        verify_trace(&ev.original, &loaded, meta),
        TraceVerdict::Pass
    );

    let tampered = csv_text.replacen("****", "***x", 1);
    let loaded = load_result(&tampered, &audit_text, report.score).unwrap();
    assert_eq!(
        verify_trace(&ev.original, &loaded, meta),
        TraceVerdict::Diverged {
            row: 0,
            column: "annual_income".into()
        }
    );
}

#[test]
fn config_files_drive_the_engine() {
    let dir = tempfile::tempdir().unwrap();
    let strict: String = PolicyMatrix::shipped_text()
        .lines()
        .map(|l| match l.starts_with("Moderate High ") {
            true => "Moderate High Strict pseudonymize mask_full mask_full\n".to_string(),
            false => format!("{l}\n"),
        })
        .collect();
    std::fs::write(dir.path().join("policy.txt"), strict).unwrap();
    std::fs::write(
        dir.path().join("free_mail.txt"),
        "# personal providers\nexample.net\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("purposes.txt"),
        "organisational use = OrganizationalUse\nself use = SelfUse\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("privgov.toml"),
        "key = \"k\"\npolicy = \"policy.txt\"\nfree_mail = \"free_mail.txt\"\npurpose_keywords = \"purposes.txt\"\n\
         trust_model = \"trust.json\"\n[trust]\nsamples = 300\n",
    )
    .unwrap();
    let cfg = Config::load(&dir.path().join("privgov.toml")).unwrap();
    let mut e = Engine::from_config(&cfg).unwrap();
    assert!(matches!(e.trust, TrustScorer::Model(_)));
    synth::finance_dataset(20, 1).ingest(&mut e.store).unwrap();

    let mut req = finance_request();
    req.email = "someone@example.net".into();
    let ev = e.evaluate(&req).unwrap();
    assert_eq!(ev.trust, TrustLevel::Moderate);
    assert_eq!(ev.strategy.name, "Strict");
    assert_eq!(ev.result.score, 1.0);

    // gmail is no longer personal under this configuration
    let ev = e.evaluate(&finance_request()).unwrap();
    assert_eq!(ev.trust, TrustLevel::High);
}

#[test]
fn clustering_maps_unknown_domains() {
    let corpus: Vec<CorpusDoc> = synthetic_corpus(&CorpusParams::default(), 1)
        .iter()
        .map(CorpusDoc::from)
        .collect();
    let mut e = Engine::new(b"k".to_vec());
    e.cluster_model = Some(ClusterModel::build(&corpus, &ClusterParams::default()).unwrap());
    e.store
        .ingest_reader(
            "Lending_Adult_Book.csv",
            "borrower_id,loan,emi,credit\nB1,1000,50,700\nB2,2000,90,650\n".as_bytes(),
            None,
        )
        .unwrap();
    let req = AccessRequest::new(
        "x@gmail.com",
        "Organisational Use",
        vec!["loan".into()],
        "Lending_Adult_Book.csv",
    )
    .unwrap();
    let ev = e.evaluate(&req).unwrap();
    let DomainSource::Clustering(m) = &ev.domain_source else {
        panic!("metadata domain used");
    };
    assert_eq!(m.label, "Finance");
    assert_eq!(ev.data_profile.domain, "Finance & Banking");
    assert_eq!(ev.finding.level, SensitivityLevel::High);
}

#[test]
fn encryption_preference_applies_only_where_allowed() {
    let mut e = Engine::new(b"k".to_vec());
    e.prefer_encryption = true;
    synth::finance_dataset(10, 1).ingest(&mut e.store).unwrap();
    let mut req = finance_request();
    req.purpose = "marketing outreach".into();
    let ev = e.evaluate(&req).unwrap();
    assert_eq!(ev.trust, TrustLevel::Low);
    assert_eq!(ev.strategy.name, "FullProtect");
    assert_eq!(ev.strategy.technique(), "encryption");
    let meta = e.store.metadata(&req.source_file).unwrap();
    assert!(ev.verify(meta).is_pass());
    let ev = e.evaluate(&finance_request()).unwrap();
    assert_eq!(ev.strategy.technique(), "partial masking");
}
