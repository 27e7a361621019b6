//! Reference computations for tests, written from first principles:
//! affine maps on ℤ, Cayley-graph BFS, explicit coset models and path
//! enumeration. Nothing here calls the engines.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use dadw_core::group::{Element, QuotientElement, QuotientKind};

/// `x ↦ eps·x + k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Aff {
    pub eps: i64,
    pub k: i64,
}

impl Aff {
    pub const ID: Aff = Aff { eps: 1, k: 0 };

    pub fn then(self, first: Aff) -> Aff {
        // (self ∘ first)(x) = eps·(first.eps·x + first.k) + k
        Aff {
            eps: self.eps * first.eps,
            k: self.eps * first.k + self.k,
        }
    }

    pub fn inv(self) -> Aff {
        Aff {
            eps: self.eps,
            k: -self.eps * self.k,
        }
    }

    pub fn of(q: QuotientElement) -> Aff {
        Aff {
            eps: q.eps() as i64,
            k: q.shift(),
        }
    }

    pub fn to_q(self) -> QuotientElement {
        if self.eps > 0 {
            QuotientElement::translation(self.k)
        } else {
            QuotientElement::reflection(self.k)
        }
    }
}

pub const S: Aff = Aff { eps: -1, k: 0 };
pub const T: Aff = Aff { eps: -1, k: 1 };

/// Word lengths in the Cayley graph of `⟨s, t⟩`, by BFS out to `radius`.
pub fn dinf_lengths(radius: u64) -> HashMap<Aff, u64> {
    let mut dist = HashMap::from([(Aff::ID, 0)]);
    let mut queue = VecDeque::from([Aff::ID]);
    while let Some(g) = queue.pop_front() {
        let d = dist[&g];
        if d == radius {
            continue;
        }
        for gen in [S, T] {
            let h = gen.then(g);
            if !dist.contains_key(&h) {
                dist.insert(h, d + 1);
                queue.push_back(h);
            }
        }
    }
    dist
}

/// `p⁻¹(B_N)` with `H = ℤ/h_order`, by BFS distances.
pub fn preimage_ball(kind: QuotientKind, h_order: usize, n: u64) -> Vec<Element> {
    let qs: Vec<Aff> = match kind {
        QuotientKind::Z => (-(n as i64)..=n as i64).map(|k| Aff { eps: 1, k }).collect(),
        QuotientKind::Dinf => dinf_lengths(n).into_keys().collect(),
        QuotientKind::Finite => vec![Aff::ID],
    };
    let mut out: Vec<Element> = qs
        .into_iter()
        .flat_map(|q| (0..h_order).map(move |h| Element::new(h, q.to_q())))
        .collect();
    out.sort();
    out
}

/// One odometer level `Aff(m) × ℤ/h_order`, cosets numbered
/// `(k mod m or m + k mod m) · h_order + h`.
#[derive(Clone, Copy, Debug)]
pub struct LevelModel {
    pub modulus: i64,
    pub h_order: usize,
}

impl LevelModel {
    pub fn size(&self, dihedral: bool) -> usize {
        let affine = if dihedral { 2 * self.modulus } else { self.modulus };
        affine as usize * self.h_order
    }

    fn decode(&self, c: usize) -> (Aff, usize) {
        let a = (c / self.h_order) as i64;
        let h = c % self.h_order;
        if a < self.modulus {
            (Aff { eps: 1, k: a }, h)
        } else {
            (Aff { eps: -1, k: a - self.modulus }, h)
        }
    }

    fn encode(&self, a: Aff, h: usize) -> usize {
        let k = a.k.rem_euclid(self.modulus);
        let idx = if a.eps > 0 { k } else { self.modulus + k };
        idx as usize * self.h_order + h
    }

    /// Left multiplication by `g` on the coset `c`.
    pub fn act(&self, g: &Element, c: usize) -> usize {
        let (a, h) = self.decode(c);
        self.encode(Aff::of(g.q).then(a), (g.h + h) % self.h_order)
    }

    /// Projection to the coarser level with modulus `to.modulus`.
    pub fn project(&self, c: usize, to: &LevelModel) -> usize {
        let (a, h) = self.decode(c);
        to.encode(a, h)
    }
}

fn mul(g: &Element, f: &Element, h_order: usize) -> Element {
    Element::new(
        (g.h + f.h) % h_order,
        Aff::of(g.q).then(Aff::of(f.q)).to_q(),
    )
}

/// `F(U, E)` by path enumeration over the cosets of one level: all `g`
/// reached from `(x, e)`, `x ∈ U`, by steps in `E ∪ E⁻¹` keeping `g·x ∈ U`,
/// with at most `max_steps` steps.
pub fn odometer_fset(level: &LevelModel, u: &HashSet<usize>, e_set: &[Element], max_steps: usize) -> BTreeSet<Element> {
    let moves = symmetric(e_set, level.h_order);
    let e = Element::new(0, QuotientElement::IDENTITY);
    let mut out = BTreeSet::new();
    for &x in u {
        let mut seen = HashSet::from([e]);
        let mut frontier = vec![e];
        for _ in 0..max_steps {
            let mut next = Vec::new();
            for g in &frontier {
                for h in &moves {
                    let hg = mul(h, g, level.h_order);
                    if u.contains(&level.act(&hg, x)) && seen.insert(hg) {
                        next.push(hg);
                    }
                }
            }
            frontier = next;
        }
        out.extend(seen);
    }
    out
}

fn symmetric(e_set: &[Element], h_order: usize) -> Vec<Element> {
    let mut out: Vec<Element> = vec![Element::new(0, QuotientElement::IDENTITY)];
    for g in e_set {
        out.push(*g);
        let q = Aff::of(g.q).inv();
        out.push(Element::new((h_order - g.h) % h_order, q.to_q()));
    }
    out.sort();
    out.dedup();
    out
}

/// Sizes of the classes of `x ~ gx` (`g ∈ E ∪ E⁻¹`, both in `U`) on one level.
pub fn odometer_classes(level: &LevelModel, u: &HashSet<usize>, e_set: &[Element]) -> Vec<usize> {
    let moves = symmetric(e_set, level.h_order);
    let mut seen = HashSet::new();
    let mut sizes = Vec::new();
    let mut start: Vec<usize> = u.iter().copied().collect();
    start.sort_unstable();
    for x in start {
        if !seen.insert(x) {
            continue;
        }
        let mut stack = vec![x];
        let mut size = 0;
        while let Some(y) = stack.pop() {
            size += 1;
            for h in &moves {
                let z = level.act(h, y);
                if u.contains(&z) && seen.insert(z) {
                    stack.push(z);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// `σⁿ(seed)` for a substitution given as `(letter, image)` pairs.
pub fn iterate(rules: &[(char, &str)], seed: &str, n: usize) -> String {
    let mut w = seed.to_string();
    for _ in 0..n {
        w = w
            .chars()
            .map(|c| rules.iter().find(|(a, _)| *a == c).expect("letter").1)
            .collect();
    }
    w
}

pub fn factors(word: &str, len: usize) -> BTreeSet<String> {
    let b = word.as_bytes();
    (0..=b.len().saturating_sub(len))
        .filter(|&i| i + len <= b.len())
        .map(|i| String::from_utf8(b[i..i + len].to_vec()).unwrap())
        .collect()
}

/// `F(U, E)` for a ℤ-subshift with `U` the patterns `words` on
/// `[start, start + len)` and `E = {−n..n}`: the shifts `t` reached from 0
/// by steps of size at most `n` along which `t·x ∈ U`, over every
/// position of `sample` as `x`. A shift `t` puts `x_{i−t}` at `i`.
pub fn subshift_fset(sample: &str, start: i64, len: usize, words: &BTreeSet<String>, n: i64, reach: i64) -> BTreeSet<i64> {
    let b = sample.as_bytes();
    let in_u = |origin: i64, t: i64| {
        let from = origin + start - t;
        if from < 0 || from as usize + len > b.len() {
            return None;
        }
        let w = std::str::from_utf8(&b[from as usize..from as usize + len]).unwrap();
        Some(words.contains(w))
    };
    let mut out = BTreeSet::new();
    let margin = reach + len as i64 + start.abs();
    for origin in margin..(b.len() as i64 - margin) {
        if in_u(origin, 0) != Some(true) {
            continue;
        }
        let mut seen = BTreeSet::from([0i64]);
        let mut stack = vec![0i64];
        while let Some(t) = stack.pop() {
            for step in -n..=n {
                let s = t + step;
                if s.abs() > reach || seen.contains(&s) {
                    continue;
                }
                if in_u(origin, s) == Some(true) {
                    seen.insert(s);
                    stack.push(s);
                }
            }
        }
        out.extend(seen);
    }
    out
}
