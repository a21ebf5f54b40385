mod common;

use std::collections::HashSet;

use privgov_core::anonymize::{
    apply_strategy, decrypt, encrypt, mask_value, pseudonymize, MASK_CHAR,
};
use privgov_core::audit::{verify_trace, TraceVerdict};
use privgov_core::compliance::ComplianceRepository;
use privgov_core::model::{AccessRequest, SensitivityLevel, Strategy};
use privgov_core::sensitivity::{assess_sensitivity, match_tuples, DEFAULT_LOW_RULE};
use privgov_core::store::DataStore;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn pseudonyms_do_not_collide_over_ten_thousand_values() {
    let key = b"collision-scan";
    let mut seen = HashSet::new();
    for i in 0..10_000 {
        let token = pseudonymize(&format!("CUST{i:05}"), key);
        assert!(token.starts_with("pid_") && token.len() == 20);
        assert!(seen.insert(token), "collision at {i}");
    }
    assert_eq!(
        pseudonymize("CUST00001", key),
        pseudonymize("CUST00001", key)
    );
    assert_ne!(
        pseudonymize("CUST00001", key),
        pseudonymize("CUST00001", b"other")
    );
}

// smallest k with k / L >= p
fn masked_count_oracle(len: usize, p: f64) -> usize {
    (0..=len)
        .find(|&k| k as f64 >= p * len as f64 - 1e-9)
        .unwrap()
}

fn random_slice(
    seed: u64,
    null_rate: f64,
) -> (
    privgov_core::store::TableSlice,
    privgov_core::store::DatasetMetadata,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = DataStore::new();
    let rows = (seed % 30) as usize + 1;
    let meta = common::random_dataset(&mut store, "t.csv", rows, null_rate, &mut rng);
    let cols = meta.columns.iter().map(|c| c.name.clone()).collect();
    let req = AccessRequest::new("a@b.c", "x", cols, "t.csv").unwrap();
    let slice = store
        .fetch(&store.build_query(&req, &meta).unwrap())
        .unwrap();
    (slice, meta)
}

fn strategy(seed: u64) -> Strategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    Strategy {
        name: "random".into(),
        actions: common::random_actions(&mut rng),
        rationale: String::new(),
        encrypt_alternative: false,
    }
}

proptest! {
    #[test]
    fn masking_matches_char_count_oracle(v in "[a-zA-Z0-9 .,é]{0,40}", p in 0.01f64..=1.0) {
        let out = mask_value(&v, p).unwrap();
        let len = v.chars().count();
        let k = masked_count_oracle(len, p);
        prop_assert_eq!(out.chars().count(), len);
        prop_assert_eq!(out.chars().take_while(|c| *c == MASK_CHAR).count(), k);
        prop_assert!(out.chars().skip(k).eq(v.chars().skip(k)));
    }

    #[test]
    fn encryption_round_trips(v in ".{0,30}", key in prop::collection::vec(any::<u8>(), 1..16)) {
        prop_assert_eq!(decrypt(&encrypt(&v, &key), &key).unwrap(), v);
    }

    #[test]
    fn score_matches_brute_force(seed in any::<u64>()) {
        let (slice, meta) = random_slice(seed, 0.2);
        let st = strategy(seed);
        let result = apply_strategy(&slice, &st, &meta, b"k", "j").unwrap();
        let oracle = common::oracle_score(&slice, &result, &st.actions, &meta);
        prop_assert!((oracle - result.score).abs() <= 1e-12, "{} vs {}", result.score, oracle);
        prop_assert!((0.0..=1.0).contains(&result.score));
        prop_assert_eq!(verify_trace(&slice, &result, &meta), TraceVerdict::Pass);
    }

    #[test]
    fn single_cell_tamper_is_located(seed in any::<u64>(), r in any::<prop::sample::Index>(), c in any::<prop::sample::Index>()) {
        let (slice, meta) = random_slice(seed, 0.1);
        let result = apply_strategy(&slice, &strategy(seed), &meta, b"k", "j").unwrap();
        let (r, c) = (r.index(slice.row_count()), c.index(slice.column_count()));
        let mut bad = result.clone();
        bad.slice.rows[r][c] = common::tampered(&bad.slice.rows[r][c]);
        prop_assert_eq!(
            verify_trace(&slice, &bad, &meta),
            TraceVerdict::Diverged { row: r, column: slice.columns[c].clone() }
        );
    }

    #[test]
    fn empty_repository_defaults_low(domain in "[A-Za-z &]{1,20}", principal in "[A-Za-z ()]{1,20}") {
        let (_, meta) = random_slice(1, 0.0);
        let repo = ComplianceRepository::new();
        let m = match_tuples(&repo, &domain, &principal);
        let f = assess_sensitivity(&m, &["amount".to_string()], &meta);
        prop_assert_eq!(f.level, SensitivityLevel::Low);
        prop_assert!(f.defaulted && f.matched.is_empty());
        prop_assert_eq!(f.rationale, DEFAULT_LOW_RULE);
    }
}
