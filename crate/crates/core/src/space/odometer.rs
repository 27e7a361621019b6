//! Odometers: inverse limits `X = lim Q_n` of finite quotient groups of Γ,
//! with Γ acting by left multiplication through `ρ_n : Γ → Q_n`.
//!
//! A level is either a modulus `m` (meaning `Q = (ℤ or D∞)/mℤ × H`, valid for
//! direct-product extensions) or an explicit multiplication table with the
//! images of `H` and of the generator lifts.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{CosetSet, SpaceError};
use crate::group::{Element, FiniteGroupTable, GroupSpec, QuotientKind};

/// What lies below the last listed level.
///
/// `Truncated`: the chain continues but is unknown; questions needing more
/// resolution are a budget problem. `Stable`: the last level is the whole
/// space (a finite Γ-set).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    #[default]
    Truncated,
    Stable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableLevelDoc {
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    /// Projection onto the previous level; absent on level 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub project: Option<Vec<usize>>,
    #[serde(rename = "hImages", default, skip_serializing_if = "Option::is_none")]
    pub h_images: Option<Vec<usize>>,
    #[serde(rename = "genImages")]
    pub gen_images: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelDoc {
    Modulus(u64),
    Table(TableLevelDoc),
}

#[derive(Clone, Debug)]
enum Level {
    Modulus {
        m: u64,
        dihedral: bool,
        h: FiniteGroupTable,
    },
    Table {
        group: FiniteGroupTable,
        gens: Vec<usize>,
        h_images: Vec<usize>,
        project: Vec<usize>,
    },
}

impl Level {
    fn affine_size(m: u64, dihedral: bool) -> usize {
        if dihedral {
            2 * m as usize
        } else {
            m as usize
        }
    }

    fn size(&self) -> usize {
        match self {
            Level::Modulus { m, dihedral, h } => Level::affine_size(*m, *dihedral) * h.order(),
            Level::Table { group, .. } => group.order(),
        }
    }

    fn identity(&self) -> usize {
        match self {
            Level::Modulus { h, .. } => h.identity(),
            Level::Table { group, .. } => group.identity(),
        }
    }

    fn decode(m: u64, a: usize) -> (i64, i64) {
        let m = m as usize;
        if a < m {
            (1, a as i64)
        } else {
            (-1, (a - m) as i64)
        }
    }

    fn encode(m: u64, eps: i64, k: i64) -> usize {
        let k = k.rem_euclid(m as i64) as usize;
        if eps > 0 {
            k
        } else {
            m as usize + k
        }
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        match self {
            Level::Modulus { m, h, .. } => {
                let n = h.order();
                let (d, k1) = Level::decode(*m, a / n);
                let (e, k2) = Level::decode(*m, b / n);
                Level::encode(*m, d * e, d * k2 + k1) * n + h.mul(a % n, b % n)
            }
            Level::Table { group, .. } => group.mul(a, b),
        }
    }

    fn inv(&self, a: usize) -> usize {
        match self {
            Level::Modulus { m, h, .. } => {
                let n = h.order();
                let (d, k) = Level::decode(*m, a / n);
                Level::encode(*m, d, -d * k) * n + h.inv(a % n)
            }
            Level::Table { group, .. } => group.inv(a),
        }
    }

    fn image(&self, group: &GroupSpec, g: &Element) -> usize {
        match self {
            Level::Modulus { m, h, .. } => Level::encode(*m, g.q.eps() as i64, g.q.shift()) * h.order() + g.h,
            Level::Table {
                group: table,
                gens,
                h_images,
                ..
            } => {
                let mut x = h_images[g.h];
                for (gen, exp) in group.lift_word(g.q) {
                    let y = if exp > 0 { gens[gen] } else { table.inv(gens[gen]) };
                    x = table.mul(x, y);
                }
                x
            }
        }
    }
}

/// An odometer presentation with validated levels.
#[derive(Clone, Debug)]
pub struct Odometer {
    levels: Vec<Level>,
    tail: Tail,
}

pub(crate) fn empty() -> CosetSet {
    CosetSet {
        level: 0,
        cosets: Vec::new(),
    }
}

impl Odometer {
    pub fn from_doc(group: &GroupSpec, docs: &[LevelDoc], tail: Tail) -> Result<Odometer, SpaceError> {
        if docs.is_empty() {
            return Err(SpaceError::Invalid("odometer needs at least one level".into()));
        }
        let moduli = docs.iter().all(|d| matches!(d, LevelDoc::Modulus(_)));
        let tables = docs.iter().all(|d| matches!(d, LevelDoc::Table(_)));
        if !moduli && !tables {
            return Err(SpaceError::Invalid("odometer levels must be all moduli or all tables".into()));
        }
        let levels = if moduli {
            Odometer::modulus_levels(group, docs)?
        } else {
            Odometer::table_levels(group, docs)?
        };
        Ok(Odometer { levels, tail })
    }

    fn modulus_levels(group: &GroupSpec, docs: &[LevelDoc]) -> Result<Vec<Level>, SpaceError> {
        let n = group.h_order();
        let gens = match group.kind() {
            QuotientKind::Z => 1,
            QuotientKind::Dinf => 2,
            QuotientKind::Finite => 0,
        };
        let identity: Vec<usize> = (0..n).collect();
        let e = group.h_group().identity();
        for i in 0..gens {
            let split = group.alpha(i) == identity.as_slice()
                && (group.kind() != QuotientKind::Dinf || group.sigma(i) == e);
            if !split {
                return Err(SpaceError::Invalid(
                    "modulus levels need a direct-product group; use table levels".into(),
                ));
            }
        }
        let dihedral = group.kind() == QuotientKind::Dinf;
        let mut out = Vec::with_capacity(docs.len());
        let mut prev: Option<u64> = None;
        for doc in docs {
            let LevelDoc::Modulus(m) = doc else { unreachable!() };
            let m = *m;
            if m == 0 {
                return Err(SpaceError::Invalid("modulus must be positive".into()));
            }
            if group.kind() == QuotientKind::Finite && m != 1 {
                return Err(SpaceError::Invalid("finite quotient only admits modulus 1".into()));
            }
            if let Some(p) = prev {
                if m % p != 0 {
                    return Err(SpaceError::Invalid(format!("modulus {m} is not a multiple of {p}")));
                }
            }
            prev = Some(m);
            out.push(Level::Modulus {
                m,
                dihedral,
                h: group.h_group().clone(),
            });
        }
        Ok(out)
    }

    fn table_levels(group: &GroupSpec, docs: &[LevelDoc]) -> Result<Vec<Level>, SpaceError> {
        let mut out: Vec<Level> = Vec::with_capacity(docs.len());
        for (idx, doc) in docs.iter().enumerate() {
            let LevelDoc::Table(t) = doc else { unreachable!() };
            let table = FiniteGroupTable::new(t.table.clone(), t.identity)
                .map_err(|err| SpaceError::Invalid(format!("level {idx}: {err}")))?;
            let size = table.order();
            let h_images = match &t.h_images {
                Some(v) => v.clone(),
                None if group.h_is_trivial() => vec![table.identity()],
                None => {
                    return Err(SpaceError::Invalid(format!("level {idx}: hImages required for nontrivial H")))
                }
            };
            let gen_count = group.generator_lifts().len();
            if h_images.len() != group.h_order() || t.gen_images.len() != gen_count {
                return Err(SpaceError::Invalid(format!("level {idx}: wrong number of images")));
            }
            if h_images.iter().chain(&t.gen_images).any(|&x| x >= size) {
                return Err(SpaceError::Invalid(format!("level {idx}: image out of range")));
            }
            let bad = |what: &str| SpaceError::Invalid(format!("level {idx}: {what}"));
            let hg = group.h_group();
            for a in 0..hg.order() {
                for b in 0..hg.order() {
                    if h_images[hg.mul(a, b)] != table.mul(h_images[a], h_images[b]) {
                        return Err(bad("hImages is not a homomorphism"));
                    }
                }
            }
            for (i, &x) in t.gen_images.iter().enumerate() {
                let xi = table.inv(x);
                for h in 0..hg.order() {
                    let lhs = table.mul(table.mul(x, h_images[h]), xi);
                    if lhs != h_images[group.alpha(i)[h]] {
                        return Err(bad("generator image does not respect alpha"));
                    }
                }
                if group.kind() == QuotientKind::Dinf && table.mul(x, x) != h_images[group.sigma(i)] {
                    return Err(bad("generator image does not respect sigma"));
                }
            }
            if generated_size(&table, h_images.iter().chain(&t.gen_images).copied()) != size {
                return Err(bad("the image of Γ is not the whole level group"));
            }
            let project = match (idx, &t.project) {
                (0, None) => Vec::new(),
                (0, Some(_)) => return Err(bad("level 0 has no projection")),
                (_, None) => return Err(bad("missing projection")),
                (_, Some(p)) => {
                    let below = &out[idx - 1];
                    if p.len() != size || p.iter().any(|&x| x >= below.size()) {
                        return Err(bad("projection has wrong shape"));
                    }
                    for a in 0..size {
                        for b in 0..size {
                            if p[table.mul(a, b)] != below.mul(p[a], p[b]) {
                                return Err(bad("projection is not a homomorphism"));
                            }
                        }
                    }
                    let Level::Table {
                        gens: bg,
                        h_images: bh,
                        ..
                    } = below
                    else {
                        unreachable!()
                    };
                    if t.gen_images.iter().zip(bg).any(|(&x, &y)| p[x] != y)
                        || h_images.iter().zip(bh).any(|(&x, &y)| p[x] != y)
                    {
                        return Err(bad("projection does not commute with the images of Γ"));
                    }
                    p.clone()
                }
            };
            out.push(Level::Table {
                group: table,
                gens: t.gen_images.clone(),
                h_images,
                project,
            });
        }
        Ok(out)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn level_size(&self, n: usize) -> usize {
        self.levels[n].size()
    }

    pub fn identity(&self, n: usize) -> usize {
        self.levels[n].identity()
    }

    pub fn mul(&self, n: usize, a: usize, b: usize) -> usize {
        self.levels[n].mul(a, b)
    }

    pub fn inv(&self, n: usize, a: usize) -> usize {
        self.levels[n].inv(a)
    }

    /// `ρ_n(g)`.
    pub fn image(&self, group: &GroupSpec, g: &Element, n: usize) -> usize {
        self.levels[n].image(group, g)
    }

    /// Projection of a level-`from` coset down to level `to ≤ from`.
    pub fn project_to(&self, from: usize, a: usize, to: usize) -> usize {
        debug_assert!(to <= from);
        match (&self.levels[from], &self.levels[to]) {
            (Level::Modulus { m: mf, h, .. }, Level::Modulus { m: mt, .. }) => {
                let n = h.order();
                let (eps, k) = Level::decode(*mf, a / n);
                Level::encode(*mt, eps, k) * n + a % n
            }
            _ => {
                let mut x = a;
                for lvl in (to + 1..=from).rev() {
                    let Level::Table { project, .. } = &self.levels[lvl] else {
                        unreachable!()
                    };
                    x = project[x];
                }
                x
            }
        }
    }

    fn check_set(&self, s: &CosetSet) -> Result<(), SpaceError> {
        if s.level >= self.depth() {
            return Err(SpaceError::Resolution(format!(
                "level {} is below the last known level {}",
                s.level,
                self.top()
            )));
        }
        let size = self.level_size(s.level);
        if let Some(c) = s.cosets.iter().find(|&&c| c >= size) {
            return Err(SpaceError::Invalid(format!("coset {c} out of range at level {}", s.level)));
        }
        Ok(())
    }

    fn mask(&self, s: &CosetSet) -> Vec<bool> {
        let mut mask = vec![false; self.level_size(s.level)];
        for &c in &s.cosets {
            mask[c] = true;
        }
        mask
    }

    /// The cosets of level `level ≥ s.level` lying in `s`.
    pub fn lift(&self, s: &CosetSet, level: usize) -> Vec<usize> {
        debug_assert!(level >= s.level);
        let mask = self.mask(s);
        (0..self.level_size(level))
            .filter(|&c| mask[self.project_to(level, c, s.level)])
            .collect()
    }

    pub fn whole(&self) -> CosetSet {
        CosetSet {
            level: 0,
            cosets: (0..self.level_size(0)).collect(),
        }
    }

    /// Sorts, deduplicates and descends to the smallest level at which the
    /// set is a union of cylinders.
    pub fn canonicalize(&self, s: &CosetSet) -> Result<CosetSet, SpaceError> {
        self.check_set(s)?;
        let mut cosets = s.cosets.clone();
        cosets.sort_unstable();
        cosets.dedup();
        if cosets.is_empty() {
            return Ok(empty());
        }
        let mut level = s.level;
        while level > 0 {
            let fiber = self.level_size(level) / self.level_size(level - 1);
            let mut below: Vec<usize> = cosets.iter().map(|&c| self.project_to(level, c, level - 1)).collect();
            below.sort_unstable();
            below.dedup();
            if below.len() * fiber != cosets.len() {
                break;
            }
            cosets = below;
            level -= 1;
        }
        Ok(CosetSet { level, cosets })
    }

    pub fn translate(&self, group: &GroupSpec, g: &Element, s: &CosetSet) -> Result<CosetSet, SpaceError> {
        self.check_set(s)?;
        let x = self.image(group, g, s.level);
        let cosets = s.cosets.iter().map(|&c| self.mul(s.level, x, c)).collect();
        self.canonicalize(&CosetSet { level: s.level, cosets })
    }

    fn combine(&self, a: &CosetSet, b: &CosetSet, keep: impl Fn(bool, bool) -> bool) -> Result<CosetSet, SpaceError> {
        self.check_set(a)?;
        self.check_set(b)?;
        let level = a.level.max(b.level);
        let ma = self.mask(a);
        let mb = self.mask(b);
        let cosets = (0..self.level_size(level))
            .filter(|&c| keep(ma[self.project_to(level, c, a.level)], mb[self.project_to(level, c, b.level)]))
            .collect();
        self.canonicalize(&CosetSet { level, cosets })
    }

    pub fn union(&self, a: &CosetSet, b: &CosetSet) -> Result<CosetSet, SpaceError> {
        self.combine(a, b, |x, y| x || y)
    }

    pub fn intersect(&self, a: &CosetSet, b: &CosetSet) -> Result<CosetSet, SpaceError> {
        self.combine(a, b, |x, y| x && y)
    }

    pub fn complement(&self, s: &CosetSet) -> Result<CosetSet, SpaceError> {
        self.check_set(s)?;
        let mask = self.mask(s);
        let cosets = (0..mask.len()).filter(|&c| !mask[c]).collect();
        self.canonicalize(&CosetSet { level: s.level, cosets })
    }

    /// A point prefix is a compatible coset sequence for levels `0..=L`.
    pub fn check_point(&self, cosets: &[usize]) -> Result<(), SpaceError> {
        if cosets.is_empty() {
            return Err(SpaceError::Resolution("empty point prefix".into()));
        }
        if cosets.len() > self.depth() {
            return Err(SpaceError::Invalid("point prefix is longer than the presentation".into()));
        }
        for (n, &c) in cosets.iter().enumerate() {
            if c >= self.level_size(n) {
                return Err(SpaceError::Invalid(format!("coset {c} out of range at level {n}")));
            }
            if n > 0 && self.project_to(n, c, n - 1) != cosets[n - 1] {
                return Err(SpaceError::Invalid(format!("point prefix is inconsistent at level {n}")));
            }
        }
        Ok(())
    }

    pub fn member(&self, cosets: &[usize], s: &CosetSet) -> Result<bool, SpaceError> {
        self.check_point(cosets)?;
        self.check_set(s)?;
        if s.level >= cosets.len() {
            return Err(SpaceError::Resolution(format!(
                "prefix reaches level {}, set lives at level {}",
                cosets.len() - 1,
                s.level
            )));
        }
        Ok(s.cosets.binary_search(&cosets[s.level]).is_ok())
    }

    pub fn act_on_point(&self, group: &GroupSpec, g: &Element, cosets: &[usize]) -> Result<Vec<usize>, SpaceError> {
        self.check_point(cosets)?;
        Ok(cosets
            .iter()
            .enumerate()
            .map(|(n, &c)| self.mul(n, self.image(group, g, n), c))
            .collect())
    }

    /// The point whose every coordinate is the identity coset, up to `level`.
    pub fn identity_point(&self, level: usize) -> Vec<usize> {
        (0..=level).map(|n| self.identity(n)).collect()
    }

    /// The level-`n` cosets `c` with `project(c)` fixed: the point prefix of
    /// the coset `c` at level `n`.
    pub fn point_of(&self, n: usize, c: usize) -> Vec<usize> {
        (0..=n).map(|m| self.project_to(n, c, m)).collect()
    }

    /// Levels of `X/K` and, per level, the map from cosets of `X` to cosets of
    /// `X/K`. `class_of` sends `H` to `H/K` (as produced by
    /// [`GroupSpec::quotient_by`]); `k` lists the elements of `K ⊆ H`.
    pub fn quotient(
        &self,
        k: &[usize],
        class_of: &[usize],
        quotient_order: usize,
    ) -> Result<(Vec<LevelDoc>, Vec<Vec<usize>>), SpaceError> {
        let mut docs = Vec::with_capacity(self.depth());
        let mut maps: Vec<Vec<usize>> = Vec::with_capacity(self.depth());
        for (n, level) in self.levels.iter().enumerate() {
            match level {
                Level::Modulus { m, h, .. } => {
                    let hn = h.order();
                    maps.push((0..level.size()).map(|c| (c / hn) * quotient_order + class_of[c % hn]).collect());
                    docs.push(LevelDoc::Modulus(*m));
                }
                Level::Table {
                    group,
                    gens,
                    h_images,
                    project,
                } => {
                    let kn: Vec<usize> = k.iter().map(|&x| h_images[x]).collect();
                    for &g in &(0..group.order()).collect::<Vec<_>>() {
                        for &x in &kn {
                            let conj = group.mul(group.mul(g, x), group.inv(g));
                            if !kn.contains(&conj) {
                                return Err(SpaceError::Invalid(format!(
                                    "image of K is not normal at level {n}"
                                )));
                            }
                        }
                    }
                    let (classes, reps) = coset_classes(group, &kn);
                    let table: Vec<Vec<usize>> = reps
                        .iter()
                        .map(|&a| reps.iter().map(|&b| classes[group.mul(a, b)]).collect())
                        .collect();
                    let h_img: Vec<usize> = (0..quotient_order)
                        .map(|c| {
                            let rep = class_of.iter().position(|&x| x == c).expect("classes are onto");
                            classes[h_images[rep]]
                        })
                        .collect();
                    let proj = if n == 0 {
                        None
                    } else {
                        Some(reps.iter().map(|&r| maps[n - 1][project[r]]).collect())
                    };
                    docs.push(LevelDoc::Table(TableLevelDoc {
                        table,
                        identity: classes[group.identity()],
                        project: proj,
                        h_images: Some(h_img),
                        gen_images: gens.iter().map(|&x| classes[x]).collect(),
                    }));
                    maps.push(classes);
                }
            }
        }
        Ok((docs, maps))
    }

    /// The first `count` levels as explicit tables, for finite truncations.
    pub fn truncated_docs(&self, count: usize) -> Vec<LevelDoc> {
        self.levels
            .iter()
            .take(count)
            .map(|level| match level {
                Level::Modulus { m, .. } => LevelDoc::Modulus(*m),
                Level::Table {
                    group,
                    gens,
                    h_images,
                    project,
                } => LevelDoc::Table(TableLevelDoc {
                    table: group.table().to_vec(),
                    identity: group.identity(),
                    project: if project.is_empty() { None } else { Some(project.clone()) },
                    h_images: Some(h_images.clone()),
                    gen_images: gens.clone(),
                }),
            })
            .collect()
    }
}

fn generated_size(table: &FiniteGroupTable, gens: impl Iterator<Item = usize>) -> usize {
    let gens: Vec<usize> = gens.collect();
    let mut seen = vec![false; table.order()];
    let mut queue = VecDeque::from([table.identity()]);
    seen[table.identity()] = true;
    let mut count = 1;
    while let Some(x) = queue.pop_front() {
        for &g in &gens {
            for y in [table.mul(x, g), table.mul(x, table.inv(g))] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
    }
    count
}

/// Cosets `xK` of a normal subgroup, numbered by smallest representative.
fn coset_classes(table: &FiniteGroupTable, k: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut classes = vec![usize::MAX; table.order()];
    let mut reps = Vec::new();
    for a in 0..table.order() {
        if classes[a] == usize::MAX {
            for &x in k {
                classes[table.mul(a, x)] = reps.len();
            }
            reps.push(a);
        }
    }
    (classes, reps)
}
