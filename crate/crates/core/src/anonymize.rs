//! Cell transforms, distance functions and the Anonymisation Score.

use std::collections::{BTreeMap, BTreeSet};

use hmac::{Hmac, Mac};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::error::{Error, Result};
use crate::model::{AnonymizationAction, AuditEntry, Cell, ColumnKind, Strategy};
use crate::store::{DatasetMetadata, TableSlice};

type HmacSha256 = Hmac<Sha256>;

pub const MASK_CHAR: char = '*';
pub const PSEUDONYM_PREFIX: &str = "pid_";
pub const CIPHER_PREFIX: &str = "enc_";
/// Label used when a column has no declared hierarchy.
pub const ANY_CATEGORY: &str = "*";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformResult {
    pub slice: TableSlice,
    pub audit: Vec<AuditEntry>,
    pub score: f64,
}

fn masked_prefix_len(len: usize, fraction: f64) -> usize {
    // the epsilon keeps p·L that is integral in exact arithmetic from rounding up
    let k = (fraction * len as f64 - 1e-9).ceil();
    (k.max(0.0) as usize).min(len)
}

/// Replaces the first ⌈p·L⌉ characters with `*`.
pub fn mask_value(v: &str, fraction: f64) -> Result<String> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "mask fraction {fraction} must lie in (0, 1]"
        )));
    }
    let len = v.chars().count();
    let k = masked_prefix_len(len, fraction);
    Ok(std::iter::repeat_n(MASK_CHAR, k)
        .chain(v.chars().skip(k))
        .collect())
}

fn render_bound(x: f64) -> String {
    let rounded = (x * 1e6).round() / 1e6;
    if rounded == 0.0 {
        "0".to_string()
    } else {
        rounded.to_string()
    }
}

/// Equal-width bin of `v` over `[min, max]`, rendered `[a,b)` (top bin
/// closed). `None` for a degenerate column.
pub fn generalize_numeric(v: f64, bin_count: u32, min: f64, max: f64) -> Result<Option<String>> {
    if bin_count < 2 {
        return Err(Error::Config(format!(
            "bin count {bin_count} must be at least 2"
        )));
    }
    let range = max - min;
    if range <= 0.0 {
        return Ok(None);
    }
    if !(min..=max).contains(&v) {
        return Err(Error::Consistency(format!(
            "{v} lies outside column range [{min}, {max}]"
        )));
    }
    let width = range / f64::from(bin_count);
    let idx = (((v - min) / width).floor() as u32).min(bin_count - 1);
    let lo = min + width * f64::from(idx);
    if idx == bin_count - 1 {
        Ok(Some(format!(
            "[{},{}]",
            render_bound(lo),
            render_bound(max)
        )))
    } else {
        let hi = min + width * f64::from(idx + 1);
        Ok(Some(format!("[{},{})", render_bound(lo), render_bound(hi))))
    }
}

fn mac(key: &[u8]) -> HmacSha256 {
    HmacSha256::new_from_slice(key).expect("HMAC accepts keys of any length")
}

/// Keyed deterministic token: `pid_` + 16 hex digits of HMAC-SHA256.
pub fn pseudonymize(v: &str, key: &[u8]) -> String {
    let mut m = mac(key);
    m.update(b"pseudonym\0");
    m.update(v.as_bytes());
    let digest = m.finalize().into_bytes();
    format!("{PSEUDONYM_PREFIX}{}", hex::encode(&digest[..8]))
}

fn keystream(key: &[u8], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + 32);
    let mut counter: u64 = 0;
    while out.len() < len {
        let mut m = mac(key);
        m.update(b"keystream\0");
        m.update(&counter.to_be_bytes());
        out.extend_from_slice(&m.finalize().into_bytes());
        counter += 1;
    }
    out.truncate(len);
    out
}

/// Reversible keyed substitution. Not a security primitive.
pub fn encrypt(v: &str, key: &[u8]) -> String {
    let ks = keystream(key, v.len());
    let bytes: Vec<u8> = v.bytes().zip(ks).map(|(b, k)| b ^ k).collect();
    format!("{CIPHER_PREFIX}{}", hex::encode(bytes))
}

pub fn decrypt(token: &str, key: &[u8]) -> Result<String> {
    let body = token
        .strip_prefix(CIPHER_PREFIX)
        .ok_or_else(|| Error::Consistency(format!("`{token}` is not an encrypted token")))?;
    let bytes =
        hex::decode(body).map_err(|e| Error::Consistency(format!("bad ciphertext: {e}")))?;
    let ks = keystream(key, bytes.len());
    let plain: Vec<u8> = bytes.iter().zip(ks).map(|(b, k)| b ^ k).collect();
    String::from_utf8(plain)
        .map_err(|e| Error::Consistency(format!("decrypted bytes are not UTF-8: {e}")))
}

/// What a distance function needs to know about the column.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColumnContext {
    /// Min and max over the column's numeric cells.
    pub range: Option<(f64, f64)>,
    /// Leaf → (output class, number of leaves collapsed into it).
    pub categories: BTreeMap<String, (String, usize)>,
}

impl ColumnContext {
    /// Builds the context for one column of `slice`.
    pub fn for_column(
        slice: &TableSlice,
        col: usize,
        metadata: &DatasetMetadata,
        hierarchy: Option<&str>,
    ) -> Self {
        let name = &slice.columns[col];
        let mut range: Option<(f64, f64)> = None;
        let mut distinct = BTreeSet::new();
        for cell in slice.column_values(col) {
            if let Some(x) = cell.as_f64() {
                range = Some(match range {
                    None => (x, x),
                    Some((lo, hi)) => (lo.min(x), hi.max(x)),
                });
            }
            if let Some(s) = cell.render() {
                distinct.insert(s.to_string());
            }
        }
        let declared = hierarchy
            .and_then(|h| metadata.hierarchies.get(h))
            .or_else(|| metadata.hierarchies.get(name.as_str()));
        let categories = match declared {
            Some(h) => h
                .groups
                .iter()
                .flat_map(|(parent, leaves)| {
                    leaves
                        .iter()
                        .map(move |leaf| (leaf.clone(), (parent.clone(), leaves.len())))
                })
                .collect(),
            None => {
                let c = distinct.len();
                distinct
                    .into_iter()
                    .map(|v| (v, (ANY_CATEGORY.to_string(), c)))
                    .collect()
            }
        };
        ColumnContext { range, categories }
    }
}

/// Resolves the policy action against the column: numeric generalization of
/// a non-numeric column becomes category generalization over that column.
pub fn effective_action(
    action: &AnonymizationAction,
    column: &str,
    kind: ColumnKind,
) -> AnonymizationAction {
    match action {
        AnonymizationAction::GeneralizeNumeric(_) if kind != ColumnKind::Numeric => {
            AnonymizationAction::GeneralizeCategory(column.to_string())
        }
        other => other.clone(),
    }
}

/// Applies one action to one cell. Nulls pass through.
pub fn transform_cell(
    cell: &Cell,
    action: &AnonymizationAction,
    ctx: &ColumnContext,
    key: &[u8],
) -> Result<Cell> {
    let Some(text) = cell.render() else {
        return Ok(Cell::Null);
    };
    let out = match action {
        AnonymizationAction::NoOp => cell.clone(),
        AnonymizationAction::MaskPartial(p) => Cell::Text(mask_value(text, *p)?),
        AnonymizationAction::MaskFull => Cell::Text(mask_value(text, 1.0)?),
        AnonymizationAction::GeneralizeNumeric(b) => {
            let x = cell
                .as_f64()
                .ok_or_else(|| Error::Consistency(format!("`{text}` is not numeric")))?;
            let (lo, hi) = ctx.range.ok_or_else(|| {
                Error::Consistency("numeric generalization without a column range".into())
            })?;
            match generalize_numeric(x, *b, lo, hi)? {
                Some(bin) => Cell::Text(bin),
                None => cell.clone(),
            }
        }
        AnonymizationAction::GeneralizeCategory(_) => match ctx.categories.get(text) {
            Some((parent, c)) if *c > 1 => Cell::Text(parent.clone()),
            _ => cell.clone(),
        },
        AnonymizationAction::Pseudonymize => Cell::Text(pseudonymize(text, key)),
        AnonymizationAction::Encrypt => Cell::Text(encrypt(text, key)),
        AnonymizationAction::Suppress => Cell::Null,
    };
    Ok(out)
}

fn mismatch(original: &Cell, transformed: &Cell, action: &AnonymizationAction) -> Error {
    Error::Consistency(format!(
        "`{transformed}` cannot result from {action} applied to `{original}`"
    ))
}

/// Normalized distance D(original, transformed) in [0, 1].
pub fn cell_distance(
    original: &Cell,
    transformed: &Cell,
    action: &AnonymizationAction,
    ctx: &ColumnContext,
) -> Result<f64> {
    let Some(text) = original.render() else {
        return if transformed.is_null() {
            Ok(0.0)
        } else {
            Err(mismatch(original, transformed, action))
        };
    };
    let len = text.chars().count();
    let unchanged = original == transformed;
    let d = match action {
        AnonymizationAction::NoOp => {
            if !unchanged {
                return Err(mismatch(original, transformed, action));
            }
            0.0
        }
        AnonymizationAction::MaskPartial(_) | AnonymizationAction::MaskFull => {
            let p = match action {
                AnonymizationAction::MaskPartial(p) => *p,
                _ => 1.0,
            };
            if transformed.render() != Some(mask_value(text, p)?.as_str()) {
                return Err(mismatch(original, transformed, action));
            }
            if len == 0 {
                0.0
            } else {
                masked_prefix_len(len, p) as f64 / len as f64
            }
        }
        AnonymizationAction::GeneralizeNumeric(b) => match ctx.range {
            Some((lo, hi)) if hi > lo => {
                if unchanged {
                    return Err(mismatch(original, transformed, action));
                }
                let width = (hi - lo) / f64::from(*b);
                (width / (hi - lo)).min(1.0)
            }
            _ => {
                if !unchanged {
                    return Err(mismatch(original, transformed, action));
                }
                0.0
            }
        },
        AnonymizationAction::GeneralizeCategory(_) => match ctx.categories.get(text) {
            Some((parent, c)) if *c > 1 => {
                if transformed.render() != Some(parent.as_str()) {
                    return Err(mismatch(original, transformed, action));
                }
                1.0 - 1.0 / *c as f64
            }
            _ => {
                if !unchanged {
                    return Err(mismatch(original, transformed, action));
                }
                0.0
            }
        },
        AnonymizationAction::Pseudonymize | AnonymizationAction::Encrypt => {
            let prefix = if *action == AnonymizationAction::Pseudonymize {
                PSEUDONYM_PREFIX
            } else {
                CIPHER_PREFIX
            };
            match transformed.render() {
                Some(t) if t.starts_with(prefix) => 1.0,
                _ => return Err(mismatch(original, transformed, action)),
            }
        }
        AnonymizationAction::Suppress => {
            if !transformed.is_null() {
                return Err(mismatch(original, transformed, action));
            }
            1.0
        }
    };
    Ok(d)
}

/// Per-column effective actions and contexts for `slice` under `strategy`.
pub fn column_plan(
    slice: &TableSlice,
    strategy: &Strategy,
    metadata: &DatasetMetadata,
) -> Result<Vec<(AnonymizationAction, ColumnContext)>> {
    slice
        .columns
        .iter()
        .enumerate()
        .map(|(col, name)| {
            let meta = metadata.column(name).ok_or_else(|| {
                Error::Config(format!(
                    "column `{name}` has no attribute class in {}",
                    metadata.dataset_id
                ))
            })?;
            let action = effective_action(strategy.action_for(meta.class), name, meta.kind);
            let hierarchy = match &action {
                AnonymizationAction::GeneralizeCategory(h) => Some(h.as_str()),
                _ => None,
            };
            let ctx = ColumnContext::for_column(slice, col, metadata, hierarchy);
            Ok((action, ctx))
        })
        .collect()
}

/// Mean of per-cell distances over all N·M cells.
pub fn anonymisation_score(distances: impl IntoIterator<Item = f64>, cells: usize) -> f64 {
    if cells == 0 {
        return 0.0;
    }
    distances.into_iter().sum::<f64>() / cells as f64
}

pub fn apply_strategy(
    slice: &TableSlice,
    strategy: &Strategy,
    metadata: &DatasetMetadata,
    key: &[u8],
    justification: &str,
) -> Result<TransformResult> {
    let plan = column_plan(slice, strategy, metadata)?;
    let mut rows = Vec::with_capacity(slice.row_count());
    let mut audit = Vec::with_capacity(slice.row_count() * slice.column_count());
    for (r, row) in slice.rows.iter().enumerate() {
        let mut out_row = Vec::with_capacity(row.len());
        for (c, cell) in row.iter().enumerate() {
            let (action, ctx) = &plan[c];
            let transformed = transform_cell(cell, action, ctx, key)?;
            let distance = cell_distance(cell, &transformed, action, ctx)?;
            audit.push(AuditEntry {
                row_index: r,
                column: slice.columns[c].clone(),
                original: cell.clone(),
                transformed: transformed.clone(),
                action: action.clone(),
                distance,
                justification: justification.to_string(),
            });
            out_row.push(transformed);
        }
        rows.push(out_row);
    }
    let score = anonymisation_score(audit.iter().map(|e| e.distance), audit.len());
    Ok(TransformResult {
        slice: TableSlice::new(slice.columns.clone(), rows)?,
        audit,
        score,
    })
}
