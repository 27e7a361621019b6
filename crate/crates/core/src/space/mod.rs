//! Zero-dimensional compact Γ-spaces with exact clopen algebra.
//!
//! Two backends: odometers (inverse limits of finite quotient groups, acted on
//! by left multiplication) and substitution subshifts with a language oracle.
//! Clopen sets are finite unions of cylinders; every operation returns a set in
//! canonical form.

mod odometer;
mod subshift;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical;
use crate::group::{Element, GroupDoc, GroupError, GroupSpec};

pub use odometer::{LevelDoc, Odometer, TableLevelDoc, Tail};
pub use subshift::{least_period, OracleAnswer, Subshift};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl SpaceError {
    pub fn is_budget(&self) -> bool {
        matches!(self, SpaceError::Budget(_))
    }
}

/// Cylinders at one odometer level: a set of cosets of `Q_level`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CosetSet {
    pub level: usize,
    pub cosets: Vec<usize>,
}

/// Full patterns on the window `[start, start + len)`.
///
/// `len == 0` with the single empty word is the whole space; no words at all is
/// the empty set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternSet {
    pub start: i64,
    pub len: usize,
    pub words: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClopenSet {
    Cosets(CosetSet),
    Patterns(PatternSet),
}

impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClopenSet::Cosets(c) => write!(f, "level {} cosets {:?}", c.level, c.cosets),
            ClopenSet::Patterns(p) => write!(f, "window [{}, +{}) words {:?}", p.start, p.len, p.words),
        }
    }
}

/// A finite approximation of a point: the coset sequence down to some level,
/// or the letters on a window.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointPrefix {
    Cosets { cosets: Vec<usize> },
    Pattern { start: i64, word: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Emptiness {
    Empty,
    NonEmpty,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Yes,
    No,
    Unknown,
}

impl Decision {
    pub fn and(self, other: Decision) -> Decision {
        match (self, other) {
            (Decision::No, _) | (_, Decision::No) => Decision::No,
            (Decision::Yes, Decision::Yes) => Decision::Yes,
            _ => Decision::Unknown,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coverage {
    Covers,
    /// A nonempty cylinder outside the union of translates.
    NotCovered(ClopenSet),
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClopenOp {
    Union,
    Intersect,
    Complement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum BackendDoc {
    Odometer {
        levels: Vec<LevelDoc>,
        #[serde(default)]
        tail: Tail,
    },
    Subshift {
        alphabet: Vec<String>,
        substitution: BTreeMap<String, String>,
        seed: String,
        #[serde(rename = "windowBudget")]
        window_budget: u32,
    },
}

/// JSON form of a [`Space`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub group: GroupDoc,
    #[serde(flatten)]
    pub backend: BackendDoc,
}

#[derive(Debug)]
pub(crate) enum Backend {
    Odometer(Odometer),
    Subshift(Subshift),
}

/// A Γ-space presentation.
#[derive(Debug)]
pub struct Space {
    group: GroupSpec,
    backend: Backend,
    doc: SpaceDoc,
}

impl Space {
    pub fn from_doc(doc: SpaceDoc) -> Result<Space, SpaceError> {
        let group = GroupSpec::from_doc(doc.group.clone())?;
        let backend = match &doc.backend {
            BackendDoc::Odometer { levels, tail } => {
                Backend::Odometer(Odometer::from_doc(&group, levels, *tail)?)
            }
            BackendDoc::Subshift {
                alphabet,
                substitution,
                seed,
                window_budget,
            } => Backend::Subshift(Subshift::from_doc(&group, alphabet, substitution, seed, *window_budget)?),
        };
        Ok(Space { group, backend, doc })
    }

    pub fn from_json(text: &str) -> Result<Space, SpaceError> {
        let doc: SpaceDoc =
            serde_json::from_str(text).map_err(|e| SpaceError::Invalid(format!("system JSON: {e}")))?;
        Space::from_doc(doc)
    }

    pub fn doc(&self) -> &SpaceDoc {
        &self.doc
    }

    pub fn to_json(&self) -> String {
        canonical::to_string(&self.doc)
    }

    /// Digest of the canonical presentation. The oracle budget is a resource
    /// setting, not part of the space, and is left out.
    pub fn digest(&self) -> String {
        let mut value = canonical::to_value(&self.doc);
        if let Some(obj) = value.as_object_mut() {
            obj.remove("windowBudget");
        }
        canonical::digest_value(&value)
    }

    /// Same presentation with a different oracle budget (subshifts only).
    pub fn with_budget(&self, budget: u32) -> Result<Space, SpaceError> {
        let mut doc = self.doc.clone();
        if let BackendDoc::Subshift { window_budget, .. } = &mut doc.backend {
            *window_budget = budget;
        }
        Space::from_doc(doc)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn odometer(&self) -> Option<&Odometer> {
        match &self.backend {
            Backend::Odometer(o) => Some(o),
            Backend::Subshift(_) => None,
        }
    }

    pub fn subshift(&self) -> Option<&Subshift> {
        match &self.backend {
            Backend::Subshift(s) => Some(s),
            Backend::Odometer(_) => None,
        }
    }

    pub fn whole(&self) -> ClopenSet {
        match &self.backend {
            Backend::Odometer(o) => ClopenSet::Cosets(o.whole()),
            Backend::Subshift(_) => ClopenSet::Patterns(subshift::whole()),
        }
    }

    pub fn empty(&self) -> ClopenSet {
        match &self.backend {
            Backend::Odometer(_) => ClopenSet::Cosets(odometer::empty()),
            Backend::Subshift(_) => ClopenSet::Patterns(subshift::empty()),
        }
    }

    fn cosets<'a>(&self, c: &'a ClopenSet) -> Result<&'a CosetSet, SpaceError> {
        match c {
            ClopenSet::Cosets(s) => Ok(s),
            ClopenSet::Patterns(_) => Err(SpaceError::Invalid("pattern set given to an odometer".into())),
        }
    }

    fn patterns<'a>(&self, c: &'a ClopenSet) -> Result<&'a PatternSet, SpaceError> {
        match c {
            ClopenSet::Patterns(s) => Ok(s),
            ClopenSet::Cosets(_) => Err(SpaceError::Invalid("coset set given to a subshift".into())),
        }
    }

    /// Checks a set literal against the presentation and puts it in canonical form.
    pub fn canonicalize(&self, c: &ClopenSet) -> Result<ClopenSet, SpaceError> {
        match &self.backend {
            Backend::Odometer(o) => Ok(ClopenSet::Cosets(o.canonicalize(self.cosets(c)?)?)),
            Backend::Subshift(s) => Ok(ClopenSet::Patterns(s.canonicalize(self.patterns(c)?)?)),
        }
    }

    /// `g·C`.
    pub fn translate(&self, g: &Element, c: &ClopenSet) -> Result<ClopenSet, SpaceError> {
        self.group.check(g)?;
        match &self.backend {
            Backend::Odometer(o) => Ok(ClopenSet::Cosets(o.translate(&self.group, g, self.cosets(c)?)?)),
            Backend::Subshift(s) => Ok(ClopenSet::Patterns(s.translate(g, self.patterns(c)?)?)),
        }
    }

    /// `A·C = ⋃_{g ∈ A} g·C`.
    pub fn translate_all(&self, elements: &[Element], c: &ClopenSet) -> Result<ClopenSet, SpaceError> {
        let mut acc = self.empty();
        for g in elements {
            acc = self.union(&acc, &self.translate(g, c)?)?;
        }
        Ok(acc)
    }

    pub fn union(&self, a: &ClopenSet, b: &ClopenSet) -> Result<ClopenSet, SpaceError> {
        match &self.backend {
            Backend::Odometer(o) => Ok(ClopenSet::Cosets(o.union(self.cosets(a)?, self.cosets(b)?)?)),
            Backend::Subshift(s) => Ok(ClopenSet::Patterns(s.union(self.patterns(a)?, self.patterns(b)?)?)),
        }
    }

    pub fn intersect(&self, a: &ClopenSet, b: &ClopenSet) -> Result<ClopenSet, SpaceError> {
        match &self.backend {
            Backend::Odometer(o) => Ok(ClopenSet::Cosets(o.intersect(self.cosets(a)?, self.cosets(b)?)?)),
            Backend::Subshift(s) => Ok(ClopenSet::Patterns(s.intersect(self.patterns(a)?, self.patterns(b)?)?)),
        }
    }

    /// `X ∖ C`.
    pub fn complement(&self, c: &ClopenSet) -> Result<ClopenSet, SpaceError> {
        match &self.backend {
            Backend::Odometer(o) => Ok(ClopenSet::Cosets(o.complement(self.cosets(c)?)?)),
            Backend::Subshift(s) => Ok(ClopenSet::Patterns(s.complement(self.patterns(c)?)?)),
        }
    }

    pub fn difference(&self, a: &ClopenSet, b: &ClopenSet) -> Result<ClopenSet, SpaceError> {
        self.intersect(a, &self.complement(b)?)
    }

    /// Boolean operation dispatcher; `Complement` takes exactly one argument,
    /// `Union`/`Intersect` fold over any number (empty union = ∅, empty
    /// intersection = X).
    pub fn clopen_algebra(&self, op: ClopenOp, args: &[ClopenSet]) -> Result<ClopenSet, SpaceError> {
        match op {
            ClopenOp::Complement => match args {
                [c] => self.complement(c),
                _ => Err(SpaceError::Invalid("complement takes one argument".into())),
            },
            ClopenOp::Union => args.iter().try_fold(self.empty(), |acc, c| self.union(&acc, c)),
            ClopenOp::Intersect => args.iter().try_fold(self.whole(), |acc, c| self.intersect(&acc, c)),
        }
    }

    pub fn is_empty(&self, c: &ClopenSet) -> Emptiness {
        match (&self.backend, c) {
            (Backend::Odometer(_), ClopenSet::Cosets(s)) => {
                if s.cosets.is_empty() {
                    Emptiness::Empty
                } else {
                    Emptiness::NonEmpty
                }
            }
            (Backend::Subshift(sub), ClopenSet::Patterns(p)) => sub.is_empty(p),
            _ => Emptiness::Unknown,
        }
    }

    /// `A ⊆ B`, decided through emptiness of `A ∖ B`.
    pub fn is_subset(&self, a: &ClopenSet, b: &ClopenSet) -> Decision {
        match self.difference(a, b) {
            Ok(d) => match self.is_empty(&d) {
                Emptiness::Empty => Decision::Yes,
                Emptiness::NonEmpty => Decision::No,
                Emptiness::Unknown => Decision::Unknown,
            },
            Err(_) => Decision::Unknown,
        }
    }

    pub fn same_set(&self, a: &ClopenSet, b: &ClopenSet) -> Decision {
        self.is_subset(a, b).and(self.is_subset(b, a))
    }

    /// Decides `X = F·C`.
    pub fn covers_space(&self, elements: &[Element], c: &ClopenSet) -> Coverage {
        let rest = match self.translate_all(elements, c).and_then(|u| self.complement(&u)) {
            Ok(r) => r,
            Err(_) => return Coverage::Unknown,
        };
        match self.is_empty(&rest) {
            Emptiness::Empty => Coverage::Covers,
            Emptiness::Unknown => Coverage::Unknown,
            Emptiness::NonEmpty => Coverage::NotCovered(self.single_cylinder(&rest)),
        }
    }

    /// One cylinder from a nonempty canonical set.
    pub fn single_cylinder(&self, c: &ClopenSet) -> ClopenSet {
        match c {
            ClopenSet::Cosets(s) => ClopenSet::Cosets(CosetSet {
                level: s.level,
                cosets: s.cosets.iter().take(1).copied().collect(),
            }),
            ClopenSet::Patterns(p) => ClopenSet::Patterns(PatternSet {
                start: p.start,
                len: p.len,
                words: p.words.iter().take(1).cloned().collect(),
            }),
        }
    }

    /// Whether the point with prefix `x` lies in `C`.
    pub fn member(&self, x: &PointPrefix, c: &ClopenSet) -> Result<bool, SpaceError> {
        match (&self.backend, x) {
            (Backend::Odometer(o), PointPrefix::Cosets { cosets }) => o.member(cosets, self.cosets(c)?),
            (Backend::Subshift(s), PointPrefix::Pattern { start, word }) => {
                s.member(*start, word, self.patterns(c)?)
            }
            _ => Err(SpaceError::Invalid("point prefix does not match the backend".into())),
        }
    }

    /// The cylinder determined by a point prefix at its full resolution.
    pub fn cylinder_of(&self, x: &PointPrefix) -> Result<ClopenSet, SpaceError> {
        match (&self.backend, x) {
            (Backend::Odometer(o), PointPrefix::Cosets { cosets }) => {
                o.check_point(cosets)?;
                let level = cosets.len() - 1;
                o.canonicalize(&CosetSet {
                    level,
                    cosets: vec![cosets[level]],
                })
                .map(ClopenSet::Cosets)
            }
            (Backend::Subshift(s), PointPrefix::Pattern { start, word }) => s
                .canonicalize(&PatternSet {
                    start: *start,
                    len: word.len(),
                    words: vec![word.clone()],
                })
                .map(ClopenSet::Patterns),
            _ => Err(SpaceError::Invalid("point prefix does not match the backend".into())),
        }
    }

    /// The prefix of `g·x`, where it is determined by the prefix of `x`.
    pub fn act_on_point(&self, g: &Element, x: &PointPrefix) -> Result<PointPrefix, SpaceError> {
        self.group.check(g)?;
        match (&self.backend, x) {
            (Backend::Odometer(o), PointPrefix::Cosets { cosets }) => Ok(PointPrefix::Cosets {
                cosets: o.act_on_point(&self.group, g, cosets)?,
            }),
            (Backend::Subshift(s), PointPrefix::Pattern { start, word }) => {
                let moved = s.translate(
                    g,
                    &PatternSet {
                        start: *start,
                        len: word.len(),
                        words: vec![word.clone()],
                    },
                )?;
                Ok(PointPrefix::Pattern {
                    start: moved.start,
                    word: moved.words[0].clone(),
                })
            }
            _ => Err(SpaceError::Invalid("point prefix does not match the backend".into())),
        }
    }
}
