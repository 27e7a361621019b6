//! Certificates that `dad(Γ ↷ X) = 1`, and their verifier.
//!
//! The verifier re-checks every obligation with clopen algebra and group
//! arithmetic only. It never runs the fixpoint: the attainability sets `D_g`
//! ship with the certificate and only their closure is checked.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::dad::FSetResult;
use crate::group::Element;
use crate::marker::Marker;
use crate::space::{ClopenSet, Coverage, Decision, Emptiness, Space};

pub const VERSION: u32 = 1;
pub const LOWER_BOUND: &str = "quotient infinite => not locally finite";
pub const ELEMENT_ORDER: &str = "length, then positive iota before negative, then h";
pub const MARKER_ORDER: &str = "odometer: smallest level; subshift: shortlex";
pub const SEED_ORDER: &str = "fixed";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSets {
    #[serde(rename = "U0")]
    pub u0: ClopenSet,
    #[serde(rename = "U1")]
    pub u1: ClopenSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FSets {
    #[serde(rename = "U0")]
    pub u0: FSetResult,
    #[serde(rename = "U1")]
    pub u1: FSetResult,
}

/// Radii of the balls `B_{3N}` and `B_{2M+N}` containing `p(F(Uᵢ, E))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(rename = "U0")]
    pub u0: u64,
    #[serde(rename = "U1")]
    pub u1: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub dad: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOrder {
    pub iota: String,
    pub elements: String,
    pub markers: String,
    #[serde(rename = "seedOrder")]
    pub seed_order: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DadCertificate {
    pub version: u32,
    #[serde(rename = "groupDigest")]
    pub group_digest: String,
    #[serde(rename = "spaceDigest")]
    pub space_digest: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub marker: Marker,
    pub cover: CoverSets,
    pub fsets: FSets,
    pub bounds: Bounds,
    #[serde(rename = "lowerBound")]
    pub lower_bound: String,
    pub verdict: Verdict,
    pub exact: bool,
    #[serde(rename = "searchOrder")]
    pub search_order: SearchOrder,
}

impl DadCertificate {
    pub fn to_json(&self) -> String {
        canonical::to_string(self)
    }

    pub fn from_json(text: &str) -> Result<DadCertificate, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CertVerdict {
    Valid,
    Invalid { obligation: String, detail: String },
    Inconclusive(String),
}

impl CertVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, CertVerdict::Valid)
    }

    pub fn obligation(&self) -> Option<&str> {
        match self {
            CertVerdict::Invalid { obligation, .. } => Some(obligation),
            _ => None,
        }
    }
}

type Check = Result<(), CertVerdict>;

fn invalid(obligation: &str, detail: impl Into<String>) -> CertVerdict {
    CertVerdict::Invalid {
        obligation: obligation.to_string(),
        detail: detail.into(),
    }
}

struct Verifier<'a> {
    space: &'a Space,
    unknown: Option<String>,
}

impl Verifier<'_> {
    fn note_unknown(&mut self, what: String) {
        self.unknown.get_or_insert(what);
    }

    fn empty(&mut self, c: &ClopenSet, obligation: &str, what: impl FnOnce() -> String) -> Check {
        match self.space.is_empty(c) {
            Emptiness::Empty => Ok(()),
            Emptiness::NonEmpty => Err(invalid(obligation, what())),
            Emptiness::Unknown => {
                self.note_unknown(format!("{obligation}: {}", what()));
                Ok(())
            }
        }
    }

    fn decide(&mut self, d: Decision, obligation: &str, what: impl FnOnce() -> String) -> Check {
        match d {
            Decision::Yes => Ok(()),
            Decision::No => Err(invalid(obligation, what())),
            Decision::Unknown => {
                self.note_unknown(format!("{obligation}: {}", what()));
                Ok(())
            }
        }
    }

    /// Runs a clopen computation; budget exhaustion is inconclusive, any other
    /// error makes the obligation fail.
    fn compute(&mut self, r: Result<ClopenSet, crate::space::SpaceError>, obligation: &str) -> Result<Option<ClopenSet>, CertVerdict> {
        match r {
            Ok(c) => Ok(Some(c)),
            Err(e) if e.is_budget() => {
                self.note_unknown(format!("{obligation}: {e}"));
                Ok(None)
            }
            Err(e) => Err(invalid(obligation, e.to_string())),
        }
    }

    fn format(&mut self, cert: &DadCertificate) -> Check {
        let space = self.space;
        if cert.version != VERSION {
            return Err(invalid("format", format!("unsupported version {}", cert.version)));
        }
        if cert.group_digest != space.group().digest() || cert.space_digest != space.digest() {
            return Err(invalid("format", "digest does not match the system"));
        }
        if cert.n == 0 {
            return Err(invalid("format", "N must be at least 1"));
        }
        if cert.marker.disjoint_radius < 5 * cert.n {
            return Err(invalid("format", "marker radius is below 5N"));
        }
        Ok(())
    }

    /// (a) `U ∩ gU = ∅` for `g ∈ p⁻¹(B_{5N}) ∖ {e}`.
    fn disjointness(&mut self, cert: &DadCertificate) -> Check {
        let space = self.space;
        let Some(u) = self.compute(space.canonicalize(&cert.marker.u), "disjointness")? else {
            return Ok(());
        };
        let e = space.group().identity();
        for g in space.group().preimage_ball(5 * cert.n).elements {
            if g == e {
                continue;
            }
            let meet = space.translate(&g, &u).and_then(|t| space.intersect(&u, &t));
            if let Some(meet) = self.compute(meet, "disjointness")? {
                self.empty(&meet, "disjointness", || format!("U meets {g}U"))?;
            }
        }
        Ok(())
    }

    /// (b) `coverSet ⊆ p⁻¹(B_M)` and `coverSet·U = X`.
    fn covering(&mut self, cert: &DadCertificate) -> Check {
        let space = self.space;
        let group = space.group();
        let m = &cert.marker;
        if let Some(g) = m.cover_set.iter().find(|g| !group.contains(g) || group.length(g) > m.m) {
            return Err(invalid("covering", format!("{g} is outside p⁻¹(B_{})", m.m)));
        }
        match space.covers_space(&m.cover_set, &m.u) {
            Coverage::Covers => Ok(()),
            Coverage::NotCovered(w) => Err(invalid("covering", format!("{w} is not covered"))),
            Coverage::Unknown => {
                self.note_unknown("covering".into());
                Ok(())
            }
        }
    }

    /// (c) `U₀ = p⁻¹(B_N)·U` and `U₁ = X ∖ U₀`.
    fn cover(&mut self, cert: &DadCertificate) -> Check {
        let space = self.space;
        let ball = space.group().preimage_ball(cert.n).elements;
        let u0 = space.translate_all(&ball, &cert.marker.u);
        if let Some(u0) = self.compute(u0, "cover")? {
            let same = space.same_set(&u0, &cert.cover.u0);
            self.decide(same, "cover", || "U0 differs from p⁻¹(B_N)·U".into())?;
        }
        let u1 = space.complement(&cert.cover.u0);
        if let Some(u1) = self.compute(u1, "cover")? {
            let same = space.same_set(&u1, &cert.cover.u1);
            self.decide(same, "cover", || "U1 differs from X ∖ U0".into())?;
        }
        Ok(())
    }

    /// (d) `D_e = Uᵢ`, `D_g ⊆ Uᵢ`, and `h·D_g ∩ Uᵢ ⊆ D_{hg}` with `hg` listed.
    fn closure(&mut self, name: &str, u: &ClopenSet, f: &FSetResult, ball: &[Element]) -> Check {
        let space = self.space;
        let group = space.group();
        let keys: Vec<Element> = f.attain.iter().map(|a| a.g).collect();
        if keys != f.elements {
            return Err(invalid("closure", format!("{name}: attainability sets do not match the listed elements")));
        }
        let attain: HashMap<Element, &ClopenSet> = f.attain.iter().map(|a| (a.g, &a.set)).collect();
        if attain.len() != keys.len() {
            return Err(invalid("closure", format!("{name}: repeated element")));
        }
        if let Some(g) = f.elements.iter().find(|g| !group.contains(g)) {
            return Err(invalid("closure", format!("{name}: {g} is not a group element")));
        }
        let e = group.identity();
        match attain.get(&e) {
            Some(d) => {
                let same = space.same_set(d, u);
                self.decide(same, "closure", || format!("{name}: D_e differs from {name}"))?;
            }
            None => {
                if space.is_empty(u) != Emptiness::Empty {
                    return Err(invalid("closure", format!("{name}: e is not listed")));
                }
            }
        }
        for (g, d) in &attain {
            let inside = space.is_subset(d, u);
            self.decide(inside, "closure", || format!("{name}: D_{g} is not inside {name}"))?;
        }
        for g in &f.elements {
            let d = attain[g];
            for h in ball {
                let hg = group.mul_unchecked(h, g);
                let step = space.translate(h, d).and_then(|t| space.intersect(&t, u));
                let Some(step) = self.compute(step, "closure")? else {
                    continue;
                };
                match (space.is_empty(&step), attain.get(&hg)) {
                    (Emptiness::Empty, _) => {}
                    (_, None) => {
                        return Err(invalid("closure", format!("{name}: {hg} = {h}·{g} is reachable but not listed")));
                    }
                    (_, Some(target)) => {
                        let sub = space.is_subset(&step, target);
                        self.decide(sub, "closure", || format!("{name}: {h}·D_{g} ∩ {name} ⊄ D_{hg}"))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// (e) claimed radii are `3N` and `2M + N` and contain the listed sets.
    fn bounds(&mut self, cert: &DadCertificate) -> Check {
        let group = self.space.group();
        let expected = Bounds {
            u0: 3 * cert.n,
            u1: 2 * cert.marker.m + cert.n,
        };
        if cert.bounds != expected {
            return Err(invalid("bounds", format!("claimed radii {:?}, expected {:?}", cert.bounds, expected)));
        }
        for (name, f, r) in [("U0", &cert.fsets.u0, expected.u0), ("U1", &cert.fsets.u1, expected.u1)] {
            if let Some(g) = f.elements.iter().find(|g| group.length(g) > r) {
                return Err(invalid("bounds", format!("{name}: {g} lies outside B_{r}")));
            }
        }
        Ok(())
    }

    /// (f) Γ is not locally finite, so `dad ≥ 1`; with (a)–(e), `dad = 1`.
    fn lower_bound(&mut self, cert: &DadCertificate) -> Check {
        if !self.space.group().kind().is_infinite() {
            return Err(invalid("lower-bound", "the quotient is finite"));
        }
        if cert.lower_bound != LOWER_BOUND {
            return Err(invalid("lower-bound", format!("unknown justification {:?}", cert.lower_bound)));
        }
        if cert.verdict.dad != 1 {
            return Err(invalid("lower-bound", format!("verdict dad = {} is not what was shown", cert.verdict.dad)));
        }
        Ok(())
    }
}

/// Checks obligations in order: format and digests, (a) marker disjointness,
/// (b) covering, (c) the cover, (d) F-set closure, (e) bounds, (f) the lower
/// bound and verdict. Returns the first failure; `Inconclusive` if nothing
/// failed but some oracle answer was unknown.
pub fn verify_certificate(space: &Space, cert: &DadCertificate) -> CertVerdict {
    let mut v = Verifier { space, unknown: None };
    let ball = space.group().preimage_ball(cert.n).elements;
    let run = |v: &mut Verifier| -> Check {
        v.format(cert)?;
        v.disjointness(cert)?;
        v.covering(cert)?;
        v.cover(cert)?;
        v.closure("U0", &cert.cover.u0, &cert.fsets.u0, &ball)?;
        v.closure("U1", &cert.cover.u1, &cert.fsets.u1, &ball)?;
        v.bounds(cert)?;
        v.lower_bound(cert)
    };
    match run(&mut v) {
        Err(verdict) => verdict,
        Ok(()) => match v.unknown {
            None => CertVerdict::Valid,
            Some(what) => CertVerdict::Inconclusive(what),
        },
    }
}
