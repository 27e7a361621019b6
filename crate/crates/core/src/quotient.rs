//! Quotients `X → X/K` by a finite normal subgroup `K ⊆ H`, with the group
//! map `q : Γ → Γ/K`.

use serde::{Deserialize, Serialize};

use crate::group::{Element, GroupSpec, QuotientElement};
use crate::space::{BackendDoc, ClopenSet, CosetSet, PointPrefix, Space, SpaceDoc, SpaceError};

/// JSON form of `K`: its elements, each with trivial quotient part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupDoc {
    pub elements: Vec<Element>,
}

#[derive(Debug)]
pub struct QuotientSystem {
    target: Space,
    class_of: Vec<usize>,
    // Per odometer level, coset of X ↦ coset of X/K. Empty for subshifts.
    maps: Vec<Vec<usize>>,
}

impl QuotientSystem {
    pub fn new(space: &Space, k: &[Element]) -> Result<QuotientSystem, SpaceError> {
        let group = space.group();
        let mut k_h = Vec::with_capacity(k.len());
        for g in k {
            group.check(g)?;
            if g.q != QuotientElement::IDENTITY {
                return Err(SpaceError::Invalid(format!(
                    "K must be finite: {g} has nontrivial image in Γ/H"
                )));
            }
            k_h.push(g.h);
        }
        let (quotient_group, class_of) = group.quotient_by(&k_h)?;
        let (target, maps) = match (&space.doc().backend, space.odometer()) {
            (BackendDoc::Odometer { tail, .. }, Some(o)) => {
                let mut k_sorted = k_h.clone();
                k_sorted.sort_unstable();
                k_sorted.dedup();
                let (levels, maps) = o.quotient(&k_sorted, &class_of, quotient_group.h_order())?;
                let doc = SpaceDoc {
                    group: quotient_group.doc().clone(),
                    backend: BackendDoc::Odometer { levels, tail: *tail },
                };
                (Space::from_doc(doc)?, maps)
            }
            _ => {
                // Subshift groups have trivial H, so K is trivial.
                (Space::from_doc(space.doc().clone())?, Vec::new())
            }
        };
        let system = QuotientSystem {
            target,
            class_of,
            maps,
        };
        system.check_equivariance(space)?;
        Ok(system)
    }

    /// `π(ρ_n(g)·c) = ρ'_n(q(g))·π(c)` for generator lifts and `H`, all levels.
    fn check_equivariance(&self, space: &Space) -> Result<(), SpaceError> {
        let (Some(src), Some(dst)) = (space.odometer(), self.target.odometer()) else {
            return Ok(());
        };
        let group = space.group();
        let mut gens = group.generator_lifts();
        gens.extend((0..group.h_order()).map(|h| Element::new(h, QuotientElement::IDENTITY)));
        for g in &gens {
            let qg = self.map_element(g);
            for n in 0..src.depth() {
                let a = src.image(group, g, n);
                let b = dst.image(self.target.group(), &qg, n);
                for c in 0..src.level_size(n) {
                    if self.maps[n][src.mul(n, a, c)] != dst.mul(n, b, self.maps[n][c]) {
                        return Err(SpaceError::Invalid(format!(
                            "quotient map is not equivariant for {g} at level {n}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    /// `q(h, x) = (hK, x)`.
    pub fn map_element(&self, g: &Element) -> Element {
        Element::new(self.class_of[g.h], g.q)
    }

    pub fn map_elements(&self, gs: &[Element]) -> Vec<Element> {
        let mut out: Vec<Element> = gs.iter().map(|g| self.map_element(g)).collect();
        out.sort();
        out.dedup();
        self.target.group().sort_canonical(&mut out);
        out
    }

    /// `q⁻¹(S)` in canonical order.
    pub fn preimage_elements(&self, source: &GroupSpec, gs: &[Element]) -> Vec<Element> {
        let mut out: Vec<Element> = gs
            .iter()
            .flat_map(|g| {
                (0..self.class_of.len())
                    .filter(move |&h| self.class_of[h] == g.h)
                    .map(move |h| Element::new(h, g.q))
            })
            .collect();
        source.sort_canonical(&mut out);
        out
    }

    /// `π⁻¹(C)` for a clopen set `C` of `X/K`.
    pub fn pull_back(&self, space: &Space, c: &ClopenSet) -> Result<ClopenSet, SpaceError> {
        let c = self.target.canonicalize(c)?;
        match (&c, space.odometer()) {
            (ClopenSet::Cosets(s), Some(_)) => {
                let map = &self.maps[s.level];
                let cosets = (0..map.len())
                    .filter(|&x| s.cosets.binary_search(&map[x]).is_ok())
                    .collect();
                space.canonicalize(&ClopenSet::Cosets(CosetSet { level: s.level, cosets }))
            }
            _ => space.canonicalize(&c),
        }
    }

    pub fn map_point(&self, x: &PointPrefix) -> PointPrefix {
        match x {
            PointPrefix::Cosets { cosets } => PointPrefix::Cosets {
                cosets: cosets.iter().enumerate().map(|(n, &c)| self.maps[n][c]).collect(),
            },
            other => other.clone(),
        }
    }
}
