use privgov_core::cluster::preprocess;

#[test]
fn preprocess_matches_golden_tokens() {
    let input = include_str!("data/preprocess_input.txt");
    let expected: Vec<&str> = include_str!("data/preprocess_expected.txt")
        .lines()
        .collect();
    assert_eq!(preprocess(input).unwrap(), expected);
}
