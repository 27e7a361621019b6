//! Markers: clopen `U` with `U ∩ gU = ∅` for `g ∈ p⁻¹(B_R) ∖ {e}` and finitely
//! many translates covering `X`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Element, QuotientElement};
use crate::quotient::QuotientSystem;
use crate::space::{
    least_period, ClopenSet, CosetSet, Coverage, Decision, Emptiness, PatternSet, PointPrefix, Space,
    SpaceError, Tail,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marker {
    #[serde(rename = "U")]
    pub u: ClopenSet,
    #[serde(rename = "disjointRadius")]
    pub disjoint_radius: u64,
    #[serde(rename = "coverSet")]
    pub cover_set: Vec<Element>,
    #[serde(rename = "M")]
    pub m: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarkerError {
    #[error("no marker found: {0}")]
    NoMarkerFound(String),
    #[error("periodic obstruction: {0} acts trivially on a nonempty clopen set")]
    PeriodicObstruction(Element),
    #[error("cannot separate the point from its translate by {0}")]
    CannotSeparate(Element),
    #[error("factor map is not equivariant: {0}")]
    NotEquivariant(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum MarkerCheck {
    Verified,
    Failed(String),
    Inconclusive(String),
}

/// Largest `M` tried before giving up on covering.
const MAX_COVER_RADIUS: u64 = 4096;

fn nontrivial_ball(space: &Space, radius: u64) -> Vec<Element> {
    let e = space.group().identity();
    space
        .group()
        .preimage_ball(radius)
        .elements
        .into_iter()
        .filter(|g| *g != e)
        .collect()
}

/// Finds the first marker in the deterministic search order: the smallest
/// odometer level, or the shortlex-first subshift word.
pub fn find_marker(space: &Space, radius: u64) -> Result<Marker, MarkerError> {
    if radius == 0 {
        return Err(SpaceError::Invalid("marker radius must be at least 1".into()).into());
    }
    let u = if space.odometer().is_some() {
        odometer_marker_set(space, radius)?
    } else {
        subshift_marker_set(space, radius)?
    };
    let lower = match space.subshift() {
        Some(_) => recurrence_lower_bound(space, &u),
        None => diameter_lower_bound(space, &u),
    };
    let m = covering_radius(space, &u, lower)?;
    let cover_set = greedy_cover(space, &u, m)?;
    Ok(Marker {
        u,
        disjoint_radius: radius,
        cover_set,
        m,
    })
}

fn odometer_marker_set(space: &Space, radius: u64) -> Result<ClopenSet, MarkerError> {
    let o = space.odometer().expect("odometer backend");
    let group = space.group();
    let ball = nontrivial_ball(space, radius);
    for n in 0..o.depth() {
        let e = o.identity(n);
        if ball.iter().all(|g| o.image(group, g, n) != e) {
            // The image of Γ is all of Q_n, which acts transitively on itself,
            // so one coset is a complete set of orbit representatives.
            let u = ClopenSet::Cosets(CosetSet { level: n, cosets: vec![e] });
            return Ok(space.canonicalize(&u)?);
        }
    }
    let top = o.top();
    let e = o.identity(top);
    match o.tail() {
        Tail::Stable => {
            let g = ball
                .into_iter()
                .find(|g| o.image(group, g, top) == e)
                .expect("some element survives to the top level");
            Err(MarkerError::PeriodicObstruction(g))
        }
        Tail::Truncated => Err(MarkerError::NoMarkerFound(format!(
            "no listed level separates p⁻¹(B_{radius}); the presentation stops at level {top}"
        ))),
    }
}

fn subshift_marker_set(space: &Space, radius: u64) -> Result<ClopenSet, MarkerError> {
    let sub = space.subshift().expect("subshift backend");
    let ball = nontrivial_ball(space, radius);
    let mut len = radius as usize + 1;
    loop {
        let words = sub.language(len)?;
        let mut periods = Vec::new();
        for w in words.iter() {
            let p = least_period(w.as_bytes());
            periods.push(p);
            if p as u64 <= radius {
                continue;
            }
            let u = space.canonicalize(&ClopenSet::Patterns(PatternSet {
                start: 0,
                len,
                words: vec![w.clone()],
            }))?;
            if disjoint_from_translates(space, &u, &ball)? {
                return Ok(u);
            }
        }
        let p = periods[0];
        if len as u64 > 2 * radius + 1 && periods.iter().all(|&x| x == p) {
            // Every window is p-periodic, so the translation by p fixes every point.
            let k = QuotientElement::translation(p as i64);
            return Err(MarkerError::PeriodicObstruction(Element::new(0, k)));
        }
        len += 1;
    }
}

/// `Ok(false)` when some translate meets `u`; `Err` when the oracle cannot decide.
fn disjoint_from_translates(space: &Space, u: &ClopenSet, ball: &[Element]) -> Result<bool, SpaceError> {
    for g in ball {
        let meet = space.intersect(u, &space.translate(g, u)?)?;
        match space.is_empty(&meet) {
            Emptiness::Empty => {}
            Emptiness::NonEmpty => return Ok(false),
            Emptiness::Unknown => return Err(SpaceError::Budget(format!("emptiness of U ∩ {g}U"))),
        }
    }
    Ok(true)
}

/// Smallest `M` with `|p⁻¹(B_M)| ≥ |Q_n| / |U|`, a counting bound for
/// single-level markers.
fn diameter_lower_bound(space: &Space, u: &ClopenSet) -> u64 {
    let (Some(o), ClopenSet::Cosets(c)) = (space.odometer(), u) else {
        return 0;
    };
    let needed = o.level_size(c.level).div_ceil(c.cosets.len().max(1));
    let h = space.group().h_order();
    (0..).find(|&m: &u64| h * (2 * m as usize + 1) >= needed).unwrap()
}

/// For ℤ-subshifts: a window of `2M + 1` consecutive starting positions must
/// contain an occurrence of the marker word, so `M ≥ (gap − 1) / 2` for every
/// gap between consecutive occurrences in a long substitution word.
fn recurrence_lower_bound(space: &Space, u: &ClopenSet) -> u64 {
    let (Some(sub), ClopenSet::Patterns(p)) = (space.subshift(), u) else {
        return 0;
    };
    if space.group().kind() != crate::group::QuotientKind::Z || p.words.len() != 1 {
        return 0;
    }
    let w = p.words[0].as_bytes();
    let mut scan = sub.seed().to_vec();
    let mut rounds = 0;
    while scan.len() < 64 * w.len().max(1) && rounds < sub.budget() {
        scan = sub.apply(&scan);
        rounds += 1;
    }
    let starts: Vec<usize> = (0..scan.len().saturating_sub(w.len() - 1))
        .filter(|&i| &scan[i..i + w.len()] == w)
        .collect();
    let gap = starts.windows(2).map(|x| x[1] - x[0]).max().unwrap_or(0) as u64;
    gap.saturating_sub(1) / 2
}

/// Smallest `M ≥ lower` with `p⁻¹(B_M)·U = X`.
fn covering_radius(space: &Space, u: &ClopenSet, lower: u64) -> Result<u64, MarkerError> {
    for m in lower..=MAX_COVER_RADIUS {
        let ball = space.group().preimage_ball(m).elements;
        match space.covers_space(&ball, u) {
            Coverage::Covers => return Ok(m),
            Coverage::NotCovered(_) => {}
            Coverage::Unknown => {
                return Err(SpaceError::Budget(format!("covering by p⁻¹(B_{m})·U is undecided")).into())
            }
        }
    }
    Err(MarkerError::NoMarkerFound(format!(
        "translates within radius {MAX_COVER_RADIUS} do not cover"
    )))
}

/// Elements of `p⁻¹(B_M)` in canonical order, kept when they add coverage.
fn greedy_cover(space: &Space, u: &ClopenSet, m: u64) -> Result<Vec<Element>, MarkerError> {
    let mut covered = space.empty();
    let mut out = Vec::new();
    let whole = space.whole();
    for g in space.group().preimage_ball(m).elements {
        let t = space.translate(&g, u)?;
        if space.is_subset(&t, &covered) != Decision::Yes {
            covered = space.union(&covered, &t)?;
            out.push(g);
            if space.is_subset(&whole, &covered) == Decision::Yes {
                break;
            }
        }
    }
    Ok(out)
}

/// Separating neighbourhoods around one point: for each `g ∈ E` a cylinder
/// `V_g ∋ x` disjoint from a cylinder `W_g ∋ gx`, and
/// `U = ⋂ V_g ∩ ⋂ g⁻¹W_g`, so that `U ∩ gU ⊆ V_g ∩ W_g = ∅`.
pub fn marker_from_point(space: &Space, x: &PointPrefix, e_set: &[Element]) -> Result<ClopenSet, MarkerError> {
    let group = space.group();
    let mut u = space.cylinder_of(x)?;
    if e_set.is_empty() {
        return Ok(u);
    }
    u = space.whole();
    for g in e_set {
        let gx = space.act_on_point(g, x)?;
        let (v, w) = separate(x, &gx).ok_or(MarkerError::CannotSeparate(*g))?;
        let back = space.translate(&group.inverse(g).map_err(SpaceError::from)?, &space.canonicalize(&w)?)?;
        u = space.intersect(&u, &space.canonicalize(&v)?)?;
        u = space.intersect(&u, &back)?;
    }
    Ok(u)
}

/// Cylinders on the first coordinate where two prefixes differ.
fn separate(x: &PointPrefix, y: &PointPrefix) -> Option<(ClopenSet, ClopenSet)> {
    match (x, y) {
        (PointPrefix::Cosets { cosets: a }, PointPrefix::Cosets { cosets: b }) => {
            let n = (0..a.len().min(b.len())).find(|&n| a[n] != b[n])?;
            let cyl = |c| ClopenSet::Cosets(CosetSet { level: n, cosets: vec![c] });
            Some((cyl(a[n]), cyl(b[n])))
        }
        (PointPrefix::Pattern { start: sa, word: wa }, PointPrefix::Pattern { start: sb, word: wb }) => {
            let lo = (*sa).max(*sb);
            let hi = (sa + wa.len() as i64).min(sb + wb.len() as i64);
            let at = |s: i64, w: &str, j: i64| w.as_bytes()[(j - s) as usize];
            let j = (lo..hi).find(|&j| at(*sa, wa, j) != at(*sb, wb, j))?;
            let cyl = |c: u8| {
                ClopenSet::Patterns(PatternSet {
                    start: j,
                    len: 1,
                    words: vec![(c as char).to_string()],
                })
            };
            Some((cyl(at(*sa, wa, j)), cyl(at(*sb, wb, j))))
        }
        _ => None,
    }
}

/// Re-checks both marker conditions from scratch.
pub fn verify_marker(space: &Space, m: &Marker) -> MarkerCheck {
    let mut unknown: Option<String> = None;
    let u = match space.canonicalize(&m.u) {
        Ok(u) => u,
        Err(e) if e.is_budget() => return MarkerCheck::Inconclusive(e.to_string()),
        Err(e) => return MarkerCheck::Failed(format!("U is not a clopen set of this space: {e}")),
    };
    for g in nontrivial_ball(space, m.disjoint_radius) {
        let meet = space.translate(&g, &u).and_then(|t| space.intersect(&u, &t));
        match meet.map(|c| space.is_empty(&c)) {
            Ok(Emptiness::Empty) => {}
            Ok(Emptiness::NonEmpty) => return MarkerCheck::Failed(format!("disjointness: U ∩ {g}U is nonempty")),
            Ok(Emptiness::Unknown) | Err(_) => {
                unknown.get_or_insert_with(|| format!("emptiness of U ∩ {g}U"));
            }
        }
    }
    let group = space.group();
    if let Some(g) = m.cover_set.iter().find(|g| !group.contains(g) || group.length(g) > m.m) {
        return MarkerCheck::Failed(format!("cover: {g} lies outside p⁻¹(B_{})", m.m));
    }
    match space.covers_space(&m.cover_set, &u) {
        Coverage::Covers => {}
        Coverage::NotCovered(w) => return MarkerCheck::Failed(format!("cover: {w} is not covered")),
        Coverage::Unknown => {
            unknown.get_or_insert_with(|| "covering".to_string());
        }
    }
    match unknown {
        None => MarkerCheck::Verified,
        Some(what) => MarkerCheck::Inconclusive(what),
    }
}

/// A Γ-equivariant map `X → Y` along which markers on `Y` are pulled back.
pub enum FactorMap<'a> {
    Identity,
    /// `Y` is the odometer made of the first levels of `X`.
    LevelCollapse,
    /// `Y = X/K`; elements of `Γ/K` are lifted to `Γ`.
    Quotient(&'a QuotientSystem),
    /// Letter-to-letter code on subshifts with the same group.
    LetterCode(&'a BTreeMap<char, char>),
}

/// `p⁻¹(V)` with the same radii.
pub fn pullback_marker(source: &Space, target: &Space, map: &FactorMap, m: &Marker) -> Result<Marker, MarkerError> {
    let not_eq = |msg: &str| MarkerError::NotEquivariant(msg.to_string());
    let (u, cover_set) = match map {
        FactorMap::Identity => {
            if source.digest() != target.digest() {
                return Err(not_eq("identity between different presentations"));
            }
            (source.canonicalize(&m.u)?, m.cover_set.clone())
        }
        FactorMap::LevelCollapse => {
            let (Some(src), Some(dst)) = (source.odometer(), target.odometer()) else {
                return Err(not_eq("level collapse needs two odometers"));
            };
            if source.group() != target.group() || dst.depth() > src.depth() {
                return Err(not_eq("target is not a truncation of the source"));
            }
            let group = source.group();
            let mut gens = group.generator_lifts();
            gens.extend((0..group.h_order()).map(|h| Element::new(h, QuotientElement::IDENTITY)));
            for n in 0..dst.depth() {
                if src.level_size(n) != dst.level_size(n)
                    || gens.iter().any(|g| src.image(group, g, n) != dst.image(group, g, n))
                    || (n > 0
                        && (0..src.level_size(n)).any(|c| src.project_to(n, c, n - 1) != dst.project_to(n, c, n - 1)))
                {
                    return Err(not_eq(&format!("levels disagree at {n}")));
                }
            }
            (source.canonicalize(&target.canonicalize(&m.u)?)?, m.cover_set.clone())
        }
        FactorMap::Quotient(q) => {
            if q.target().digest() != target.digest() {
                return Err(not_eq("quotient target differs from the marker's space"));
            }
            let u = q.pull_back(source, &m.u)?;
            let cover = m.cover_set.iter().map(|g| Element::new(lift_class(q, source, g.h), g.q)).collect();
            (u, cover)
        }
        FactorMap::LetterCode(code) => {
            let (Some(src), Some(dst)) = (source.subshift(), target.subshift()) else {
                return Err(not_eq("letter codes need two subshifts"));
            };
            if source.group() != target.group() {
                return Err(not_eq("letter code between different groups"));
            }
            let ClopenSet::Patterns(v) = target.canonicalize(&m.u)? else {
                unreachable!()
            };
            let apply = |w: &str| -> Option<String> { w.chars().map(|c| code.get(&c).copied()).collect() };
            for len in [v.len, v.len + 1] {
                let mut image: Vec<String> = src
                    .language(len)?
                    .iter()
                    .map(|w| apply(w).ok_or_else(|| not_eq("code misses a letter")))
                    .collect::<Result<_, _>>()?;
                image.sort();
                image.dedup();
                if image.as_slice() != dst.language(len)?.as_slice() {
                    return Err(not_eq(&format!("code does not map the language onto the target at length {len}")));
                }
            }
            let words = src
                .language(v.len)?
                .iter()
                .filter(|w| apply(w).is_some_and(|img| v.words.contains(&img)))
                .cloned()
                .collect();
            let u = source.canonicalize(&ClopenSet::Patterns(PatternSet {
                start: v.start,
                len: v.len,
                words,
            }))?;
            (u, m.cover_set.clone())
        }
    };
    Ok(Marker {
        u,
        disjoint_radius: m.disjoint_radius,
        cover_set,
        m: m.m,
    })
}

fn lift_class(q: &QuotientSystem, source: &Space, class: usize) -> usize {
    (0..source.group().h_order())
        .find(|&h| q.map_element(&Element::new(h, QuotientElement::IDENTITY)).h == class)
        .expect("H → H/K is onto")
}
