#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use privgov_core::anonymize::TransformResult;
use privgov_core::model::{AnonymizationAction, AttributeClass, Cell, ClassActions, ColumnKind};
use privgov_core::store::{DataStore, DatasetMetadata, Sidecar, SidecarColumn, TableSlice};
use rand::seq::SliceRandom;
use rand::Rng;

pub const COLUMNS: [(&str, AttributeClass, ColumnKind); 5] = [
    (
        "rid",
        AttributeClass::Identifier,
        ColumnKind::IdentifierLike,
    ),
    ("age", AttributeClass::QuasiIdentifier, ColumnKind::Numeric),
    (
        "city",
        AttributeClass::QuasiIdentifier,
        ColumnKind::Categorical,
    ),
    (
        "amount",
        AttributeClass::SensitiveValue,
        ColumnKind::Numeric,
    ),
    ("remark", AttributeClass::SensitiveValue, ColumnKind::Text),
];

const CITIES: &[&str] = &["Pune", "Agra", "Surat", "Kochi"];
const WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "epsilon", "zeta"];

/// A random table over [`COLUMNS`] ingested into `store`; nulls appear with
/// probability `null_rate` outside the identifier column.
pub fn random_dataset(
    store: &mut DataStore,
    id: &str,
    rows: usize,
    null_rate: f64,
    rng: &mut impl Rng,
) -> DatasetMetadata {
    let mut csv = COLUMNS.map(|c| c.0).join(",") + "\n";
    for r in 0..rows {
        let mut cells = vec![format!("R{r:04}")];
        let age = rng.gen_range(1..99).to_string();
        cells.push(maybe(age, null_rate, rng));
        let city = CITIES.choose(rng).unwrap().to_string();
        cells.push(maybe(city, null_rate, rng));
        let amount = format!(
            "{}.{:02}",
            rng.gen_range(0..1_000_000),
            rng.gen_range(0..100)
        );
        cells.push(maybe(amount, null_rate, rng));
        let n = rng.gen_range(1..4);
        let remark = (0..n)
            .map(|_| *WORDS.choose(rng).unwrap())
            .collect::<Vec<_>>()
            .join(" ");
        cells.push(maybe(remark, null_rate, rng));
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    let sidecar = Sidecar {
        domain: Some("Finance".into()),
        owner: Some("Adult Individual".into()),
        name: Some("Random".into()),
        columns: COLUMNS
            .iter()
            .map(|(n, class, kind)| {
                (
                    n.to_string(),
                    SidecarColumn {
                        class: Some(*class),
                        kind: Some(*kind),
                    },
                )
            })
            .collect(),
        hierarchies: BTreeMap::new(),
    };
    store
        .ingest_reader(id, csv.as_bytes(), Some(&sidecar))
        .unwrap()
}

fn maybe(v: String, null_rate: f64, rng: &mut impl Rng) -> String {
    if rng.gen_bool(null_rate) {
        String::new()
    } else {
        v
    }
}

pub fn random_action(rng: &mut impl Rng, column: &str) -> AnonymizationAction {
    match rng.gen_range(0..8) {
        0 => AnonymizationAction::NoOp,
        1 => AnonymizationAction::MaskPartial(rng.gen_range(0.05..0.95)),
        2 => AnonymizationAction::MaskFull,
        3 => AnonymizationAction::GeneralizeNumeric(rng.gen_range(2..8)),
        4 => AnonymizationAction::GeneralizeCategory(column.to_string()),
        5 => AnonymizationAction::Pseudonymize,
        6 => AnonymizationAction::Encrypt,
        _ => AnonymizationAction::Suppress,
    }
}

pub fn random_actions(rng: &mut impl Rng) -> ClassActions {
    ClassActions {
        identifier: random_action(rng, "rid"),
        quasi_identifier: random_action(rng, "city"),
        sensitive_value: random_action(rng, "remark"),
    }
}

/// Per-cell distance recomputed from the two slices alone.
pub fn oracle_distance(
    original: &Cell,
    transformed: &Cell,
    action: &AnonymizationAction,
    kind: ColumnKind,
    column: &[&Cell],
) -> f64 {
    let Some(o) = original.render() else {
        return 0.0;
    };
    let numbers: Vec<f64> = column.iter().filter_map(|c| c.as_f64()).collect();
    let distinct: BTreeSet<&str> = column.iter().filter_map(|c| c.render()).collect();
    let category = |t: &Cell| {
        if t == original || distinct.len() < 2 {
            0.0
        } else {
            1.0 - 1.0 / distinct.len() as f64
        }
    };
    match action {
        AnonymizationAction::NoOp => 0.0,
        AnonymizationAction::MaskPartial(_) | AnonymizationAction::MaskFull => {
            let t = transformed.render().unwrap();
            let changed = o.chars().zip(t.chars()).filter(|(a, b)| a != b).count();
            changed as f64 / o.chars().count() as f64
        }
        AnonymizationAction::GeneralizeNumeric(b) if kind == ColumnKind::Numeric => {
            let lo = numbers.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = numbers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                1.0 / *b as f64
            } else {
                0.0
            }
        }
        AnonymizationAction::GeneralizeNumeric(_) | AnonymizationAction::GeneralizeCategory(_) => {
            category(transformed)
        }
        AnonymizationAction::Pseudonymize
        | AnonymizationAction::Encrypt
        | AnonymizationAction::Suppress => 1.0,
    }
}

/// Mean oracle distance over every cell of `original`.
pub fn oracle_score(
    original: &TableSlice,
    result: &TransformResult,
    actions: &ClassActions,
    metadata: &DatasetMetadata,
) -> f64 {
    let mut total = 0.0;
    let cells = original.row_count() * original.column_count();
    for (c, name) in original.columns.iter().enumerate() {
        let meta = metadata.column(name).unwrap();
        let action = actions.get(meta.class);
        let column: Vec<&Cell> = original.column_values(c).collect();
        for r in 0..original.row_count() {
            total += oracle_distance(
                &original.rows[r][c],
                &result.slice.rows[r][c],
                action,
                meta.kind,
                &column,
            );
        }
    }
    if cells == 0 {
        0.0
    } else {
        total / cells as f64
    }
}

/// A cell value guaranteed to differ from `cell`.
pub fn tampered(cell: &Cell) -> Cell {
    match cell {
        Cell::Null => Cell::Text("x".into()),
        Cell::Number(s) | Cell::Text(s) => Cell::Text(format!("{s}~")),
    }
}
