//! Named example systems.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::group::{GroupDoc, QuotientKind, TableDoc};
use crate::space::{BackendDoc, LevelDoc, Space, SpaceDoc, SpaceError, Tail};

pub const DEFAULT_DEPTH: u32 = 12;
pub const DEFAULT_BUDGET: u32 = 10;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown corpus entry {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Builder parameters; unset fields take the entry's default.
#[derive(Clone, Debug, Default)]
pub struct Params {
    /// Number of odometer levels below level 0.
    pub depth: Option<u32>,
    /// Oracle budget for subshifts.
    pub budget: Option<u32>,
    /// Number of points for `periodic_k`.
    pub k: Option<u64>,
}

/// What the entry is expected to satisfy; tests re-derive each claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpectedProperties {
    /// `None` when the engines are left to decide.
    pub free: Option<bool>,
    pub minimal: Option<bool>,
    pub kind: QuotientKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub expected: ExpectedProperties,
}

pub fn entries() -> Vec<CorpusEntry> {
    let entry = |name, description, free, minimal, kind| CorpusEntry {
        name,
        description,
        expected: ExpectedProperties { free, minimal, kind },
    };
    vec![
        entry("fibonacci", "Z on the Fibonacci subshift a->ab, b->a", Some(true), Some(true), QuotientKind::Z),
        entry(
            "thue_morse",
            "Dinf on the Thue-Morse subshift a->ab, b->ba by affine index maps",
            None,
            Some(true),
            QuotientKind::Dinf,
        ),
        entry("binary_odometer", "Z on lim Z/2^n", Some(true), Some(true), QuotientKind::Z),
        entry(
            "dihedral_odometer",
            "Dinf on lim Dinf/2^nZ by left multiplication",
            Some(true),
            Some(true),
            QuotientKind::Dinf,
        ),
        entry(
            "z_cross_z2_product",
            "Z x Z/2 on (binary odometer) x {0,1}",
            Some(true),
            Some(true),
            QuotientKind::Z,
        ),
        entry("periodic_k", "Z on k points (periodic_3, periodic_5, ...)", Some(false), Some(true), QuotientKind::Z),
    ]
}

fn moduli(depth: u32) -> Vec<LevelDoc> {
    (0..=depth).map(|n| LevelDoc::Modulus(1u64 << n)).collect()
}

fn substitution(rules: &[(&str, &str)]) -> BTreeMap<String, String> {
    rules.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

/// Parses `periodic_k` and `periodic_<k>`.
fn periodic_size(name: &str, params: &Params) -> Option<u64> {
    let rest = name.strip_prefix("periodic_")?;
    if rest == "k" {
        Some(params.k.unwrap_or(3))
    } else {
        rest.parse().ok()
    }
}

pub fn system_doc(name: &str, params: &Params) -> Result<SpaceDoc, CorpusError> {
    let depth = params.depth.unwrap_or(DEFAULT_DEPTH);
    let budget = params.budget.unwrap_or(DEFAULT_BUDGET);
    let doc = match name {
        "fibonacci" => SpaceDoc {
            group: GroupDoc::trivial(QuotientKind::Z),
            backend: BackendDoc::Subshift {
                alphabet: vec!["a".into(), "b".into()],
                substitution: substitution(&[("a", "ab"), ("b", "a")]),
                seed: "a".into(),
                window_budget: budget,
            },
        },
        "thue_morse" => SpaceDoc {
            group: GroupDoc::trivial(QuotientKind::Dinf),
            backend: BackendDoc::Subshift {
                alphabet: vec!["a".into(), "b".into()],
                substitution: substitution(&[("a", "ab"), ("b", "ba")]),
                seed: "a".into(),
                window_budget: budget,
            },
        },
        "binary_odometer" => SpaceDoc {
            group: GroupDoc::trivial(QuotientKind::Z),
            backend: BackendDoc::Odometer {
                levels: moduli(depth),
                tail: Tail::Truncated,
            },
        },
        "dihedral_odometer" => SpaceDoc {
            group: GroupDoc::trivial(QuotientKind::Dinf),
            backend: BackendDoc::Odometer {
                levels: moduli(depth),
                tail: Tail::Truncated,
            },
        },
        "z_cross_z2_product" => SpaceDoc {
            group: GroupDoc {
                quotient: QuotientKind::Z,
                h: Some(TableDoc {
                    size: 2,
                    table: vec![vec![0, 1], vec![1, 0]],
                    identity: 0,
                }),
                alpha: BTreeMap::new(),
                sigma: BTreeMap::new(),
            },
            backend: BackendDoc::Odometer {
                levels: moduli(depth),
                tail: Tail::Truncated,
            },
        },
        other => match periodic_size(other, params) {
            Some(k) if k > 0 => SpaceDoc {
                group: GroupDoc::trivial(QuotientKind::Z),
                backend: BackendDoc::Odometer {
                    levels: vec![LevelDoc::Modulus(k)],
                    tail: Tail::Stable,
                },
            },
            _ => return Err(CorpusError::Unknown(other.to_string())),
        },
    };
    Ok(doc)
}

pub fn build_system(name: &str, params: &Params) -> Result<Space, CorpusError> {
    Ok(Space::from_doc(system_doc(name, params)?)?)
}
