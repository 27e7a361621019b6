//! Freeness certificates: for `γ ≠ e`, a clopen partition of `X` whose cells
//! `P` all satisfy `γP ∩ P = ∅`. Such a partition exists iff `γ` has no fixed
//! point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::Element;
use crate::space::{ClopenSet, CosetSet, Decision, Emptiness, PatternSet, PointPrefix, Space, SpaceError, Tail};

/// Largest window radius tried on subshifts.
pub const MAX_WINDOW_RADIUS: i64 = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessCertificate {
    pub gamma: Element,
    pub partition: Vec<ClopenSet>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreenessError {
    #[error("{gamma} fixes the point prefix {witness:?}")]
    FixedPointFound { gamma: Element, witness: PointPrefix },
    #[error("unknown: {0}")]
    Unknown(String),
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreeBallReport {
    pub radius: u64,
    pub certificates: Vec<FreenessCertificate>,
}

pub fn freeness_certificate(space: &Space, gamma: &Element) -> Result<FreenessCertificate, FreenessError> {
    let group = space.group();
    group.check(gamma).map_err(SpaceError::from)?;
    if *gamma == group.identity() {
        return Err(FreenessError::Input("gamma must not be the identity".into()));
    }
    if let Some(o) = space.odometer() {
        let level = (0..o.depth()).find(|&n| o.image(group, gamma, n) != o.identity(n));
        return match (level, o.tail()) {
            (Some(n), _) => Ok(FreenessCertificate {
                gamma: *gamma,
                partition: (0..o.level_size(n))
                    .map(|c| ClopenSet::Cosets(CosetSet { level: n, cosets: vec![c] }))
                    .collect(),
            }),
            (None, Tail::Stable) => Err(FreenessError::FixedPointFound {
                gamma: *gamma,
                witness: PointPrefix::Cosets {
                    cosets: o.identity_point(o.depth() - 1),
                },
            }),
            (None, Tail::Truncated) => Err(FreenessError::Unknown(format!(
                "{gamma} acts trivially on all {} presented levels",
                o.depth()
            ))),
        };
    }
    subshift_certificate(space, gamma)
}

/// Cells are the admissible patterns on a window mapped onto itself by
/// reflections, doubling the radius until every cell moves off itself.
fn subshift_certificate(space: &Space, gamma: &Element) -> Result<FreenessCertificate, FreenessError> {
    let sub = space.subshift().expect("subshift backend");
    let centre = if gamma.q.is_reflection() { gamma.q.shift().div_euclid(2) } else { 0 };
    let mut r = 1;
    loop {
        let start = centre - r;
        let len = if gamma.q.is_reflection() {
            (gamma.q.shift() - 2 * start + 1) as usize
        } else {
            (2 * r + 1) as usize
        };
        let words = match sub.language(len) {
            Ok(words) => words,
            Err(e) if e.is_budget() => return Err(FreenessError::Unknown(e.to_string())),
            Err(e) => return Err(e.into()),
        };
        let mut partition = Vec::with_capacity(words.len());
        let mut stuck = None;
        for w in words.iter() {
            let cell = ClopenSet::Patterns(PatternSet {
                start,
                len,
                words: vec![w.clone()],
            });
            let meet = space.translate(gamma, &cell).and_then(|t| space.intersect(&t, &cell));
            match meet.map(|m| space.is_empty(&m)) {
                Ok(Emptiness::Empty) => partition.push(cell),
                Ok(_) => {
                    stuck = Some(w.clone());
                    break;
                }
                Err(e) if e.is_budget() => return Err(FreenessError::Unknown(e.to_string())),
                Err(e) => return Err(e.into()),
            }
        }
        match stuck {
            None => {
                return Ok(FreenessCertificate {
                    gamma: *gamma,
                    partition,
                })
            }
            Some(word) if 2 * r > MAX_WINDOW_RADIUS => {
                return Err(FreenessError::FixedPointFound {
                    gamma: *gamma,
                    witness: PointPrefix::Pattern { start, word },
                })
            }
            Some(_) => r *= 2,
        }
    }
}

/// Re-checks a certificate with clopen algebra: the cells cover `X`, are
/// pairwise disjoint, and each is moved off itself by `γ`.
pub fn check_freeness_certificate(space: &Space, cert: &FreenessCertificate) -> Decision {
    let empty = |c: Result<ClopenSet, SpaceError>| match c.map(|c| space.is_empty(&c)) {
        Ok(Emptiness::Empty) => Decision::Yes,
        Ok(Emptiness::NonEmpty) => Decision::No,
        Ok(Emptiness::Unknown) | Err(_) => Decision::Unknown,
    };
    if !space.group().contains(&cert.gamma) || cert.gamma == space.group().identity() {
        return Decision::No;
    }
    let mut verdict = Decision::Yes;
    let mut union = space.empty();
    for (i, p) in cert.partition.iter().enumerate() {
        verdict = verdict.and(empty(
            space.translate(&cert.gamma, p).and_then(|t| space.intersect(&t, p)),
        ));
        for q in &cert.partition[i + 1..] {
            verdict = verdict.and(empty(space.intersect(p, q)));
        }
        match space.union(&union, p) {
            Ok(u) => union = u,
            Err(_) => return Decision::Unknown,
        }
        if verdict == Decision::No {
            return verdict;
        }
    }
    let whole = space.whole();
    verdict.and(space.same_set(&union, &whole))
}

/// Certificates for every `γ ∈ p⁻¹(B_R) ∖ {e}`, computed in parallel; the
/// reported failure is the first in canonical order.
pub fn check_free_ball(space: &Space, radius: u64) -> Result<FreeBallReport, FreenessError> {
    if radius == 0 {
        return Err(FreenessError::Input("radius must be at least 1".into()));
    }
    let e = space.group().identity();
    let gammas: Vec<Element> = space
        .group()
        .preimage_ball(radius)
        .elements
        .into_iter()
        .filter(|g| *g != e)
        .collect();
    let results: Vec<_> = gammas.par_iter().map(|g| freeness_certificate(space, g)).collect();
    let certificates = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(FreeBallReport { radius, certificates })
}
