//! Trust × sensitivity policy matrix.
//!
//! File format, one line per pair, whitespace separated:
//!
//! ```text
//! # trust  sensitivity  strategy  identifier  quasi_identifier  sensitive_value  [alt=encrypt]
//! High     Low          Raw       noop        noop              noop
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{
    AnonymizationAction, AttributeClass, ClassActions, SensitivityLevel, Strategy, TrustLevel,
};

const SHIPPED: &str = include_str!("../data/default_policy.txt");

/// A strategy template as stored in the matrix; rationale is filled at lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCell {
    pub name: String,
    pub actions: ClassActions,
    pub encrypt_alternative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyMatrix {
    entries: BTreeMap<(TrustLevel, SensitivityLevel), PolicyCell>,
    pub source: Option<PathBuf>,
}

fn raw() -> PolicyCell {
    PolicyCell {
        name: "Raw".into(),
        actions: ClassActions::uniform(AnonymizationAction::NoOp),
        encrypt_alternative: false,
    }
}

fn generalize() -> PolicyCell {
    PolicyCell {
        name: "Generalize".into(),
        actions: ClassActions {
            identifier: AnonymizationAction::NoOp,
            quasi_identifier: AnonymizationAction::GeneralizeNumeric(4),
            sensitive_value: AnonymizationAction::NoOp,
        },
        encrypt_alternative: false,
    }
}

fn partial_mask() -> PolicyCell {
    PolicyCell {
        name: "PartialMask".into(),
        actions: ClassActions {
            identifier: AnonymizationAction::Pseudonymize,
            quasi_identifier: AnonymizationAction::GeneralizeNumeric(4),
            sensitive_value: AnonymizationAction::MaskPartial(0.5),
        },
        encrypt_alternative: false,
    }
}

fn full_protect() -> PolicyCell {
    PolicyCell {
        name: "FullProtect".into(),
        actions: ClassActions {
            identifier: AnonymizationAction::Pseudonymize,
            quasi_identifier: AnonymizationAction::MaskFull,
            sensitive_value: AnonymizationAction::MaskFull,
        },
        encrypt_alternative: true,
    }
}

fn pair_label(t: TrustLevel, s: SensitivityLevel) -> String {
    format!("({t}, {s})")
}

impl PolicyMatrix {
    /// The built-in matrix; identical to the shipped policy file.
    pub fn default_matrix() -> Self {
        use SensitivityLevel as S;
        use TrustLevel as T;
        let cells = [
            (T::High, S::Low, raw()),
            (T::Moderate, S::Low, raw()),
            (T::Low, S::Low, generalize()),
            (T::High, S::Moderate, generalize()),
            (T::Moderate, S::Moderate, partial_mask()),
            (T::Low, S::Moderate, partial_mask()),
            (T::High, S::High, partial_mask()),
            (T::Moderate, S::High, partial_mask()),
            (T::Low, S::High, full_protect()),
        ];
        PolicyMatrix {
            entries: cells.into_iter().map(|(t, s, c)| ((t, s), c)).collect(),
            source: None,
        }
    }

    pub fn shipped_text() -> &'static str {
        SHIPPED
    }

    pub fn from_cells(
        cells: impl IntoIterator<Item = (TrustLevel, SensitivityLevel, PolicyCell)>,
    ) -> Result<Self> {
        let m = PolicyMatrix {
            entries: cells.into_iter().map(|(t, s, c)| ((t, s), c)).collect(),
            source: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn cell(&self, trust: TrustLevel, sensitivity: SensitivityLevel) -> Option<&PolicyCell> {
        self.entries.get(&(trust, sensitivity))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Totality, per-action parameter checks and the monotone-protection lint.
    pub fn validate(&self) -> Result<()> {
        let mut missing = Vec::new();
        for t in TrustLevel::ALL {
            for s in SensitivityLevel::ALL {
                if !self.entries.contains_key(&(t, s)) {
                    missing.push(pair_label(t, s));
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::Policy(format!(
                "missing pairs: {}",
                missing.join(", ")
            )));
        }
        for cell in self.entries.values() {
            for class in AttributeClass::ALL {
                cell.actions.get(class).validate()?;
            }
        }
        let mut violations = Vec::new();
        // Pairs (weaker-or-equal context, stricter context).
        let mut steps = Vec::new();
        for t in TrustLevel::ALL {
            for w in SensitivityLevel::ALL.windows(2) {
                steps.push(((t, w[0]), (t, w[1])));
            }
        }
        for s in SensitivityLevel::ALL {
            for w in TrustLevel::ALL.windows(2) {
                steps.push(((w[1], s), (w[0], s)));
            }
        }
        for (lenient, strict) in steps {
            let a = &self.entries[&lenient];
            let b = &self.entries[&strict];
            for class in AttributeClass::ALL {
                if b.actions.get(class).is_weaker_than(a.actions.get(class)) {
                    violations.push(format!(
                        "{} {class} `{}` is weaker than {} `{}`",
                        pair_label(strict.0, strict.1),
                        b.actions.get(class),
                        pair_label(lenient.0, lenient.1),
                        a.actions.get(class)
                    ));
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Policy(format!(
                "non-monotone matrix: {}",
                violations.join("; ")
            )))
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !(6..=7).contains(&fields.len()) {
                return Err(Error::parse(
                    line_no,
                    format!("expected 6 or 7 fields, found {}", fields.len()),
                ));
            }
            let err = |e: Error| Error::parse(line_no, e.to_string());
            let trust: TrustLevel = fields[0].parse().map_err(err)?;
            let sensitivity: SensitivityLevel = fields[1].parse().map_err(err)?;
            let actions = ClassActions {
                identifier: fields[3].parse().map_err(err)?,
                quasi_identifier: fields[4].parse().map_err(err)?,
                sensitive_value: fields[5].parse().map_err(err)?,
            };
            let encrypt_alternative = match fields.get(6) {
                None => false,
                Some(&"alt=encrypt") => true,
                Some(other) => {
                    return Err(Error::parse(line_no, format!("unknown option `{other}`")))
                }
            };
            let cell = PolicyCell {
                name: fields[2].to_string(),
                actions,
                encrypt_alternative,
            };
            if entries.insert((trust, sensitivity), cell).is_some() {
                return Err(Error::parse(
                    line_no,
                    format!("duplicate entry for {}", pair_label(trust, sensitivity)),
                ));
            }
        }
        let m = PolicyMatrix {
            entries,
            source: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(
            "# trust  sensitivity  strategy  identifier  quasi_identifier  sensitive_value  [alt=encrypt]\n",
        );
        for s in SensitivityLevel::ALL {
            for t in TrustLevel::ALL.iter().rev() {
                if let Some(c) = self.entries.get(&(*t, s)) {
                    let _ = write!(
                        out,
                        "{:<9}{:<13}{:<13}{:<14}{:<18}{}",
                        t.as_str(),
                        s.as_str(),
                        c.name,
                        c.actions.identifier.to_string(),
                        c.actions.quasi_identifier.to_string(),
                        c.actions.sensitive_value
                    );
                    if c.encrypt_alternative {
                        out.push_str("  alt=encrypt");
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::parse(&text)?;
        m.source = Some(path.to_path_buf());
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

impl Default for PolicyMatrix {
    fn default() -> Self {
        Self::default_matrix()
    }
}

pub fn load_policy(path: &Path) -> Result<PolicyMatrix> {
    PolicyMatrix::load(path)
}

/// Looks up the strategy for a pair. The matrix is total once validated.
pub fn select_strategy(
    matrix: &PolicyMatrix,
    trust: TrustLevel,
    sensitivity: SensitivityLevel,
) -> Strategy {
    let cell = matrix
        .cell(trust, sensitivity)
        .expect("validated policy matrix is total");
    let mut rationale = format!(
        "trust {trust} and sensitivity {sensitivity} map to {}: identifiers {}, quasi-identifiers {}, sensitive values {}",
        cell.name,
        cell.actions.identifier.label(),
        cell.actions.quasi_identifier.label(),
        cell.actions.sensitive_value.label()
    );
    if cell.encrypt_alternative {
        rationale.push_str("; encryption may replace masking");
    }
    Strategy {
        name: cell.name.clone(),
        actions: cell.actions.clone(),
        rationale,
        encrypt_alternative: cell.encrypt_alternative,
    }
}
