//! The two-set cover, the transition sets `F(U, E)`, and the certification
//! pipeline for `dad = 1`.
//!
//! `F(U, E)` is the set of `g = g_n⋯g_1` (`gᵢ ∈ E`) such that some `x ∈ U`
//! has every partial product `g_j⋯g_1·x ∈ U`. It is computed through the
//! attainability sets `D_g = {g⁻¹y : such a path ends at y = gx}`, a least
//! fixpoint of `D_e = U`, `D_{hg} ⊇ h·D_g ∩ U`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{self, Bounds, CoverSets, DadCertificate, FSets, SearchOrder, Verdict};
use crate::group::{Element, GroupSpec, QuotientKind};
use crate::marker::{find_marker, Marker, MarkerError};
use crate::quotient::QuotientSystem;
use crate::space::{ClopenSet, Decision, Emptiness, PointPrefix, Space, SpaceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DadError {
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Marker(#[from] MarkerError),
    #[error("cap exceeded: {0} is attainable beyond the cap")]
    CapExceeded(Element),
    #[error("marker radius {have} is below 5N = {need}")]
    InsufficientRadius { have: u64, need: u64 },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

impl From<crate::group::GroupError> for DadError {
    fn from(e: crate::group::GroupError) -> Self {
        DadError::Space(e.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverPair {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "U0")]
    pub u0: ClopenSet,
    #[serde(rename = "U1")]
    pub u1: ClopenSet,
    pub marker: Marker,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attain {
    pub g: Element,
    pub set: ClopenSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FSetResult {
    pub elements: Vec<Element>,
    pub attain: Vec<Attain>,
    pub exact: bool,
    #[serde(rename = "capUsed")]
    pub cap_used: u64,
}

impl FSetResult {
    pub fn contains(&self, g: &Element) -> bool {
        self.elements.contains(g)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassSample {
    pub point: PointPrefix,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivClassReport {
    pub samples: Vec<ClassSample>,
    #[serde(rename = "maxClassSize")]
    pub max_class_size: usize,
    /// `|F(U, E)|`, or `None` if the cap was exceeded.
    pub bound: Option<usize>,
}

/// Where equivalence classes are sampled.
#[derive(Clone, Debug)]
pub enum Sampling {
    /// Every coset of one odometer level.
    Level(usize),
    /// Classes of the given points, explored through group elements.
    Points(Vec<PointPrefix>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientSide {
    pub set: String,
    /// `F(p⁻¹(Uᵢ), E)` on `X`.
    pub lhs: Vec<Element>,
    /// `F(Uᵢ, q(E))` on `X/K`.
    pub rhs: Vec<Element>,
    /// Elements of the left side whose image is not on the right side.
    pub missing: Vec<Element>,
    pub exact: bool,
}

impl QuotientSide {
    pub fn contained(&self) -> bool {
        self.missing.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub sides: Vec<QuotientSide>,
}

impl QuotientReport {
    pub fn contained(&self) -> bool {
        self.sides.iter().all(QuotientSide::contained)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CertifyOptions {
    /// Refuse to issue a certificate that relied on unknown oracle answers.
    pub strict: bool,
    /// Added to both caps.
    pub slack: u64,
}

/// Smallest `N` with `E ⊆ p⁻¹(B_N)`.
pub fn normalize_e(group: &GroupSpec, e_set: &[Element]) -> u64 {
    e_set.iter().map(|g| group.length(g)).max().unwrap_or(0)
}

/// `E ∪ E⁻¹ ∪ {e}` in canonical order.
pub fn symmetrize(group: &GroupSpec, e_set: &[Element]) -> Result<Vec<Element>, DadError> {
    let mut out = vec![group.identity()];
    for g in e_set {
        out.push(*g);
        out.push(group.inverse(g)?);
    }
    out.sort();
    out.dedup();
    group.sort_canonical(&mut out);
    Ok(out)
}

/// `U₀ = p⁻¹(B_N)·U`, `U₁ = X ∖ U₀`.
pub fn build_cover(space: &Space, n: u64, marker: &Marker) -> Result<CoverPair, DadError> {
    if marker.disjoint_radius < 5 * n {
        return Err(DadError::InsufficientRadius {
            have: marker.disjoint_radius,
            need: 5 * n,
        });
    }
    let ball = space.group().preimage_ball(n).elements;
    let u0 = space.translate_all(&ball, &marker.u)?;
    let u1 = space.complement(&u0)?;
    Ok(CoverPair {
        n,
        u0,
        u1,
        marker: marker.clone(),
    })
}

/// Sort key realising the canonical element order.
fn order_key(group: &GroupSpec, g: &Element) -> (u64, bool, usize, Element) {
    (group.length(g), group.iota(g.q) < 0, g.h, *g)
}

/// Least fixpoint of the attainability sets, processed in canonical order.
///
/// `E` is symmetrized and `e` added. Oracle answers that are unknown keep the
/// candidate (over-approximating) and clear `exact`.
pub fn compute_f_set(space: &Space, u: &ClopenSet, e_set: &[Element], cap: u64) -> Result<FSetResult, DadError> {
    let group = space.group();
    let moves = symmetrize(group, e_set)?;
    let u = space.canonicalize(u)?;
    let mut exact = true;
    match space.is_empty(&u) {
        Emptiness::Empty => {
            return Ok(FSetResult {
                elements: Vec::new(),
                attain: Vec::new(),
                exact: true,
                cap_used: 0,
            })
        }
        Emptiness::Unknown => exact = false,
        Emptiness::NonEmpty => {}
    }
    let e = group.identity();
    let mut attain: HashMap<Element, ClopenSet> = HashMap::from([(e, u.clone())]);
    let mut queue = BTreeMap::from([(order_key(group, &e), ())]);
    while let Some(((_, _, _, g), ())) = queue.pop_first() {
        let dg = attain[&g].clone();
        for h in &moves {
            let hg = group.multiply(h, &g)?;
            let step = match space.translate(h, &dg).and_then(|t| space.intersect(&t, &u)) {
                Ok(c) => match space.is_empty(&c) {
                    Emptiness::Empty => continue,
                    Emptiness::NonEmpty => c,
                    Emptiness::Unknown => {
                        exact = false;
                        c
                    }
                },
                Err(err) if err.is_budget() => {
                    exact = false;
                    u.clone()
                }
                Err(err) => return Err(err.into()),
            };
            if group.length(&hg) > cap {
                return Err(DadError::CapExceeded(hg));
            }
            let merged = match attain.get(&hg) {
                None => step,
                Some(old) => {
                    if space.is_subset(&step, old) == Decision::Yes {
                        continue;
                    }
                    let merged = match space.union(old, &step) {
                        Ok(m) => m,
                        Err(err) if err.is_budget() => {
                            exact = false;
                            u.clone()
                        }
                        Err(err) => return Err(err.into()),
                    };
                    if merged == *old {
                        continue;
                    }
                    merged
                }
            };
            attain.insert(hg, merged);
            queue.insert(order_key(group, &hg), ());
        }
    }
    let mut elements: Vec<Element> = attain.keys().copied().collect();
    group.sort_canonical(&mut elements);
    let cap_used = elements.iter().map(|g| group.length(g)).max().unwrap_or(0);
    let attain = elements
        .iter()
        .map(|g| Attain {
            g: *g,
            set: attain.remove(g).expect("listed"),
        })
        .collect();
    Ok(FSetResult {
        elements,
        attain,
        exact,
        cap_used,
    })
}

/// Connected components of `x ~ gx` (`g ∈ E ∪ E⁻¹`, both ends in `U`).
pub fn equivalence_classes(
    space: &Space,
    u: &ClopenSet,
    e_set: &[Element],
    sampling: &Sampling,
    cap: u64,
) -> Result<EquivClassReport, DadError> {
    let group = space.group();
    let moves = symmetrize(group, e_set)?;
    let u = space.canonicalize(u)?;
    let bound = match compute_f_set(space, &u, e_set, cap) {
        Ok(f) => Some(f.elements.len()),
        Err(DadError::CapExceeded(_)) => None,
        Err(err) => return Err(err),
    };
    let samples = match sampling {
        Sampling::Level(n) => level_classes(space, &u, &moves, *n)?,
        Sampling::Points(points) => point_classes(space, &u, &moves, points, cap)?,
    };
    Ok(EquivClassReport {
        max_class_size: samples.iter().map(|s| s.size).max().unwrap_or(0),
        samples,
        bound,
    })
}

fn level_classes(space: &Space, u: &ClopenSet, moves: &[Element], n: usize) -> Result<Vec<ClassSample>, DadError> {
    let o = space
        .odometer()
        .ok_or_else(|| DadError::Input("level sampling needs an odometer".into()))?;
    if n >= o.depth() {
        return Err(SpaceError::Resolution(format!("level {n} is beyond the presented depth")).into());
    }
    let ClopenSet::Cosets(s) = u else {
        unreachable!("odometer sets are coset sets")
    };
    if s.level > n {
        return Err(SpaceError::Resolution(format!("U lives at level {}, below level {n}", s.level)).into());
    }
    let cosets = o.lift(s, n);
    let size = o.level_size(n);
    let mut inside = vec![false; size];
    for c in cosets {
        inside[c] = true;
    }
    let images: Vec<usize> = moves.iter().map(|g| o.image(space.group(), g, n)).collect();
    let mut seen = vec![false; size];
    let mut out = Vec::new();
    for start in 0..size {
        if !inside[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 0;
        while let Some(c) = queue.pop_front() {
            count += 1;
            for &a in &images {
                let d = o.mul(n, a, c);
                if inside[d] && !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
        out.push(ClassSample {
            point: PointPrefix::Cosets {
                cosets: o.point_of(n, start),
            },
            size: count,
        });
    }
    Ok(out)
}

fn point_classes(
    space: &Space,
    u: &ClopenSet,
    moves: &[Element],
    points: &[PointPrefix],
    cap: u64,
) -> Result<Vec<ClassSample>, DadError> {
    let group = space.group();
    let mut out = Vec::new();
    for x in points {
        if !space.member(x, u)? {
            return Err(DadError::Input(format!("sample point {x:?} is not in U")));
        }
        let e = group.identity();
        let mut seen = vec![e];
        let mut queue = VecDeque::from([e]);
        while let Some(g) = queue.pop_front() {
            for h in moves {
                let hg = group.multiply(h, &g)?;
                if seen.contains(&hg) {
                    continue;
                }
                let y = space.act_on_point(&hg, x)?;
                if !space.member(&y, u)? {
                    continue;
                }
                if group.length(&hg) > cap {
                    return Err(DadError::CapExceeded(hg));
                }
                seen.push(hg);
                queue.push_back(hg);
            }
        }
        out.push(ClassSample {
            point: x.clone(),
            size: seen.len(),
        });
    }
    Ok(out)
}

/// Checks `F(π⁻¹(Uᵢ), E) ⊆ q⁻¹(F(Uᵢ, q(E)))` for each named set `Uᵢ` of `X/K`.
pub fn quotient_pullback(
    space: &Space,
    quotient: &QuotientSystem,
    cover: &[(String, ClopenSet)],
    e_set: &[Element],
    cap: u64,
) -> Result<QuotientReport, DadError> {
    let target = quotient.target();
    let q_e = quotient.map_elements(e_set);
    let mut sides = Vec::new();
    for (name, ui) in cover {
        let pulled = quotient.pull_back(space, ui)?;
        let lhs = compute_f_set(space, &pulled, e_set, cap)?;
        let rhs = compute_f_set(target, ui, &q_e, cap)?;
        let missing = lhs
            .elements
            .iter()
            .filter(|g| !rhs.contains(&quotient.map_element(g)))
            .copied()
            .collect();
        sides.push(QuotientSide {
            set: name.clone(),
            lhs: lhs.elements,
            rhs: rhs.elements,
            missing,
            exact: lhs.exact && rhs.exact,
        });
    }
    Ok(QuotientReport {
        n: normalize_e(space.group(), e_set),
        sides,
    })
}

/// The cover of `X/K` from its own marker at radius `5N`, with `E = p⁻¹(B_N)`.
pub fn quotient_check(space: &Space, k: &[Element], n: u64, slack: u64) -> Result<QuotientReport, DadError> {
    let quotient = QuotientSystem::new(space, k).map_err(|e| DadError::Input(e.to_string()))?;
    let target = quotient.target();
    let marker = find_marker(target, (5 * n).max(1))?;
    let cover = build_cover(target, n, &marker)?;
    let e_set = space.group().preimage_ball(n).elements;
    let mut report = QuotientReport { n, sides: Vec::new() };
    for (name, ui, cap) in [("U0", &cover.u0, 3 * n), ("U1", &cover.u1, 2 * marker.m + n)] {
        let part = quotient_pullback(space, &quotient, &[(name.to_string(), ui.clone())], &e_set, cap + slack)?;
        report.sides.extend(part.sides);
    }
    Ok(report)
}

/// The full pipeline: marker at radius `5N`, cover, both F-sets under the
/// caps `3N` and `2M + N`, and the certificate.
pub fn certify_dad_one(space: &Space, n: u64, options: CertifyOptions) -> Result<DadCertificate, DadError> {
    let group = space.group();
    if group.kind() == QuotientKind::Finite {
        return Err(DadError::Input("Γ is finite, hence locally finite, and dad = 0".into()));
    }
    if n == 0 {
        return Err(DadError::Input("N must be at least 1".into()));
    }
    let marker = find_marker(space, 5 * n)?;
    let cover = build_cover(space, n, &marker)?;
    let e_set = group.preimage_ball(n).elements;
    let bounds = Bounds {
        u0: 3 * n,
        u1: 2 * marker.m + n,
    };
    let f0 = compute_f_set(space, &cover.u0, &e_set, bounds.u0 + options.slack)?;
    let f1 = compute_f_set(space, &cover.u1, &e_set, bounds.u1 + options.slack)?;
    for (f, r) in [(&f0, bounds.u0), (&f1, bounds.u1)] {
        if let Some(g) = f.elements.iter().find(|g| group.length(g) > r) {
            return Err(DadError::CapExceeded(*g));
        }
    }
    let exact = f0.exact && f1.exact;
    if options.strict && !exact {
        return Err(DadError::Inconclusive("unknown oracle answers were used".into()));
    }
    Ok(DadCertificate {
        version: certificate::VERSION,
        group_digest: group.digest(),
        space_digest: space.digest(),
        n,
        marker,
        cover: CoverSets {
            u0: cover.u0,
            u1: cover.u1,
        },
        fsets: FSets { u0: f0, u1: f1 },
        bounds,
        lower_bound: certificate::LOWER_BOUND.to_string(),
        verdict: Verdict { dad: 1 },
        exact,
        search_order: SearchOrder {
            iota: group.kind().iota_orientation().to_string(),
            elements: certificate::ELEMENT_ORDER.to_string(),
            markers: certificate::MARKER_ORDER.to_string(),
            seed_order: certificate::SEED_ORDER.to_string(),
        },
    })
}
