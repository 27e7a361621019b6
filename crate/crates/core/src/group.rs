//! Infinite virtually cyclic groups presented as finite-by-(ℤ or D∞) extensions.
//!
//! An element is a pair `(h, q)` standing for `h · w(q)`, where `h` indexes the
//! finite normal subgroup `H` and `w(q)` is the reduced word of generator lifts
//! representing the quotient element `q`. Quotient elements are affine
//! isometries `x ↦ εx + k` of ℤ; for ℤ itself `ε` is always `+1`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("element {0} does not belong to this group")]
    Mismatch(String),
    #[error("invalid finite group table: {0}")]
    InvalidTable(String),
    #[error("invalid extension data: {0}")]
    InvalidExtension(String),
}

/// Which group `Γ/H` is.
///
/// `Finite` (trivial quotient, `Γ = H`) is accepted so that finite groups can
/// be loaded and rejected by the certification pipeline with a proper error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuotientKind {
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "Dinf")]
    Dinf,
    #[serde(rename = "Finite")]
    Finite,
}

impl fmt::Display for QuotientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuotientKind::Z => "Z",
            QuotientKind::Dinf => "Dinf",
            QuotientKind::Finite => "Finite",
        })
    }
}

/// An affine isometry `x ↦ eps·x + k` of ℤ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawQuotient", into = "RawQuotient")]
pub struct QuotientElement {
    eps: i8,
    k: i64,
}

#[derive(Serialize, Deserialize)]
struct RawQuotient {
    eps: i64,
    k: i64,
}

impl TryFrom<RawQuotient> for QuotientElement {
    type Error = String;

    fn try_from(raw: RawQuotient) -> Result<Self, Self::Error> {
        match raw.eps {
            1 => Ok(QuotientElement::translation(raw.k)),
            -1 => Ok(QuotientElement::reflection(raw.k)),
            other => Err(format!("eps must be +1 or -1, got {other}")),
        }
    }
}

impl From<QuotientElement> for RawQuotient {
    fn from(q: QuotientElement) -> Self {
        RawQuotient {
            eps: q.eps as i64,
            k: q.k,
        }
    }
}

impl QuotientElement {
    pub const IDENTITY: QuotientElement = QuotientElement { eps: 1, k: 0 };
    /// `s : x ↦ −x`.
    pub const S: QuotientElement = QuotientElement { eps: -1, k: 0 };
    /// `t : x ↦ −x + 1`.
    pub const T: QuotientElement = QuotientElement { eps: -1, k: 1 };

    pub const fn translation(k: i64) -> Self {
        QuotientElement { eps: 1, k }
    }

    pub const fn reflection(k: i64) -> Self {
        QuotientElement { eps: -1, k }
    }

    pub fn eps(self) -> i8 {
        self.eps
    }

    pub fn shift(self) -> i64 {
        self.k
    }

    pub fn is_reflection(self) -> bool {
        self.eps < 0
    }

    /// Composition `self ∘ rhs`: `(δ,k₁)(ε,k₂) = (δε, δk₂ + k₁)`.
    pub fn compose(self, rhs: QuotientElement) -> QuotientElement {
        QuotientElement {
            eps: self.eps * rhs.eps,
            k: self.eps as i64 * rhs.k + self.k,
        }
    }

    pub fn inverse(self) -> QuotientElement {
        QuotientElement {
            eps: self.eps,
            k: -(self.eps as i64) * self.k,
        }
    }

    pub fn apply(self, x: i64) -> i64 {
        self.eps as i64 * x + self.k
    }
}

impl fmt::Display for QuotientElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.eps > 0 {
            write!(f, "(+1,{})", self.k)
        } else {
            write!(f, "(-1,{})", self.k)
        }
    }
}

/// Lifted generators appearing in reduced words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Letter {
    S,
    T,
}

impl QuotientKind {
    pub fn is_infinite(self) -> bool {
        !matches!(self, QuotientKind::Finite)
    }

    pub fn contains(self, q: QuotientElement) -> bool {
        match self {
            QuotientKind::Z => !q.is_reflection(),
            QuotientKind::Dinf => true,
            QuotientKind::Finite => q == QuotientElement::IDENTITY,
        }
    }

    /// Symmetric generating set of the quotient: `{±1}` for ℤ, `{s, t}` for D∞.
    pub fn generators(self) -> Vec<QuotientElement> {
        match self {
            QuotientKind::Z => vec![QuotientElement::translation(1), QuotientElement::translation(-1)],
            QuotientKind::Dinf => vec![QuotientElement::S, QuotientElement::T],
            QuotientKind::Finite => vec![],
        }
    }

    /// Word length: `|k|` on ℤ; on D∞ a translation by `k` is `(ts)^k` of length
    /// `2|k|` and the reflection `(−1, k)` has length `|2k − 1|`.
    pub fn word_length(self, q: QuotientElement) -> u64 {
        match self {
            QuotientKind::Z | QuotientKind::Finite => q.k.unsigned_abs(),
            QuotientKind::Dinf => self.iota(q).unsigned_abs(),
        }
    }

    /// The isometry `ι : Q → ℤ` with `ι(e) = 0` and `d(g,h) = |ι(g) − ι(h)|`
    /// for the right-invariant metric `d(g,h) = |gh⁻¹|`.
    ///
    /// Orientation on D∞: `ι(s) = +1`, `ι(t) = −1`.
    pub fn iota(self, q: QuotientElement) -> i64 {
        match self {
            QuotientKind::Z | QuotientKind::Finite => q.k,
            QuotientKind::Dinf => {
                if q.is_reflection() {
                    1 - 2 * q.k
                } else {
                    2 * q.k
                }
            }
        }
    }

    pub fn from_iota(self, i: i64) -> QuotientElement {
        match self {
            QuotientKind::Z | QuotientKind::Finite => QuotientElement::translation(i),
            QuotientKind::Dinf => {
                if i.rem_euclid(2) == 0 {
                    QuotientElement::translation(i / 2)
                } else {
                    QuotientElement::reflection((1 - i) / 2)
                }
            }
        }
    }

    /// Orientation tag recorded in certificates.
    pub fn iota_orientation(self) -> &'static str {
        match self {
            QuotientKind::Z => "identity",
            QuotientKind::Dinf => "s=+1,t=-1",
            QuotientKind::Finite => "none",
        }
    }

    pub fn ball(self, radius: u64) -> Vec<QuotientElement> {
        let mut out = match self {
            QuotientKind::Finite => vec![QuotientElement::IDENTITY],
            _ => {
                let r = radius as i64;
                (-r..=r).map(|i| self.from_iota(i)).collect()
            }
        };
        out.sort_by(|a, b| self.canonical_cmp(*a, *b));
        out
    }

    /// Breadth-first order: by word length, then `ι > 0` before `ι < 0`.
    pub fn canonical_cmp(self, a: QuotientElement, b: QuotientElement) -> Ordering {
        let key = |q| (self.word_length(q), self.iota(q) < 0);
        key(a).cmp(&key(b))
    }

    fn reduced_word(self, q: QuotientElement) -> Vec<Letter> {
        debug_assert_eq!(self, QuotientKind::Dinf);
        let m = self.iota(q);
        let n = m.unsigned_abs() as usize;
        // Built right to left: outward from e, positive side starts with s.
        let (first, second) = if m > 0 {
            (Letter::S, Letter::T)
        } else {
            (Letter::T, Letter::S)
        };
        let mut word: Vec<Letter> = (0..n)
            .map(|i| if i % 2 == 0 { first } else { second })
            .collect();
        word.reverse();
        word
    }
}

/// A finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupTable {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroupTable {
    /// Validates the table exhaustively: closure, identity, Latin square
    /// (hence inverses) and associativity.
    pub fn new(table: Vec<Vec<usize>>, identity: usize) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::InvalidTable("empty table".into()));
        }
        if identity >= n {
            return Err(GroupError::InvalidTable(format!("identity {identity} out of range")));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::InvalidTable(format!("row {i} has length {}", row.len())));
            }
            let mut seen = vec![false; n];
            for &x in row {
                if x >= n || seen[x] {
                    return Err(GroupError::InvalidTable(format!("row {i} is not a permutation")));
                }
                seen[x] = true;
            }
        }
        for j in 0..n {
            let mut seen = vec![false; n];
            for row in &table {
                if seen[row[j]] {
                    return Err(GroupError::InvalidTable(format!("column {j} is not a permutation")));
                }
                seen[row[j]] = true;
            }
        }
        for a in 0..n {
            if table[identity][a] != a || table[a][identity] != a {
                return Err(GroupError::InvalidTable(format!("{identity} is not an identity")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(GroupError::InvalidTable(format!(
                            "not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        let inverse = (0..n)
            .map(|a| (0..n).find(|&b| table[a][b] == identity).unwrap())
            .collect();
        Ok(FiniteGroupTable {
            table,
            identity,
            inverse,
        })
    }

    pub fn trivial() -> Self {
        FiniteGroupTable {
            table: vec![vec![0]],
            identity: 0,
            inverse: vec![0],
        }
    }

    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0);
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroupTable {
            table,
            identity: 0,
            inverse: (0..n).map(|a| (n - a) % n).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn is_automorphism(&self, perm: &[usize]) -> bool {
        let n = self.order();
        if perm.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &x in perm {
            if x >= n || seen[x] {
                return false;
            }
            seen[x] = true;
        }
        (0..n).all(|a| (0..n).all(|b| perm[self.mul(a, b)] == self.mul(perm[a], perm[b])))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDoc {
    pub size: usize,
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
}

/// JSON form of a [`GroupSpec`].
///
/// `alpha` maps generator names (`"z"` for ℤ, `"s"`/`"t"` for D∞) to the
/// automorphism `h ↦ x̃ h x̃⁻¹` of `H`; `sigma` gives the squares `s̃²`, `t̃²`
/// under keys `"ss"`, `"tt"`. Missing entries are trivial, and `H` may be
/// omitted when trivial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDoc {
    pub quotient: QuotientKind,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<TableDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub alpha: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sigma: BTreeMap<String, usize>,
}

impl GroupDoc {
    pub fn trivial(quotient: QuotientKind) -> Self {
        GroupDoc {
            quotient,
            h: None,
            alpha: BTreeMap::new(),
            sigma: BTreeMap::new(),
        }
    }
}

/// A group element `(h, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Element {
    pub h: usize,
    pub q: QuotientElement,
}

impl Element {
    pub const IDENTITY_TRIVIAL_H: Element = Element {
        h: 0,
        q: QuotientElement::IDENTITY,
    };

    pub fn new(h: usize, q: QuotientElement) -> Self {
        Element { h, q }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[h={}, q={}]", self.h, self.q)
    }
}

/// A finite, canonically ordered ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball<T> {
    pub radius: u64,
    pub elements: Vec<T>,
}

impl<T> Ball<T> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// An infinite virtually cyclic group as extension data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupDoc", into = "GroupDoc")]
pub struct GroupSpec {
    kind: QuotientKind,
    h: FiniteGroupTable,
    // ℤ: [φ_z]; D∞: [φ_s, φ_t]
    alpha: Vec<Vec<usize>>,
    // powers of φ_z up to its order
    alpha_powers: Vec<Vec<usize>>,
    // D∞: [s̃², t̃²]
    sigma: [usize; 2],
    doc: GroupDoc,
}

impl TryFrom<GroupDoc> for GroupSpec {
    type Error = GroupError;

    fn try_from(doc: GroupDoc) -> Result<Self, Self::Error> {
        GroupSpec::from_doc(doc)
    }
}

impl From<GroupSpec> for GroupDoc {
    fn from(g: GroupSpec) -> Self {
        g.doc
    }
}

impl GroupSpec {
    pub fn trivial(kind: QuotientKind) -> Self {
        GroupSpec::from_doc(GroupDoc::trivial(kind)).expect("trivial extension is valid")
    }

    pub fn from_doc(doc: GroupDoc) -> Result<Self, GroupError> {
        let h = match &doc.h {
            None => FiniteGroupTable::trivial(),
            Some(t) => {
                if t.size != t.table.len() {
                    return Err(GroupError::InvalidTable(format!(
                        "size {} does not match table with {} rows",
                        t.size,
                        t.table.len()
                    )));
                }
                FiniteGroupTable::new(t.table.clone(), t.identity)?
            }
        };
        let n = h.order();
        let names: &[&str] = match doc.quotient {
            QuotientKind::Z => &["z"],
            QuotientKind::Dinf => &["s", "t"],
            QuotientKind::Finite => &[],
        };
        for key in doc.alpha.keys() {
            if !names.contains(&key.as_str()) {
                return Err(GroupError::InvalidExtension(format!(
                    "unknown alpha generator {key:?} for quotient {}",
                    doc.quotient
                )));
            }
        }
        let alpha: Vec<Vec<usize>> = names
            .iter()
            .map(|name| doc.alpha.get(*name).cloned().unwrap_or_else(|| (0..n).collect()))
            .collect();
        for (name, perm) in names.iter().zip(&alpha) {
            if !h.is_automorphism(perm) {
                return Err(GroupError::InvalidExtension(format!(
                    "alpha[{name}] is not an automorphism of H"
                )));
            }
        }
        let mut sigma = [h.identity(); 2];
        for (key, &val) in &doc.sigma {
            let slot = match (doc.quotient, key.as_str()) {
                (QuotientKind::Dinf, "ss") => 0,
                (QuotientKind::Dinf, "tt") => 1,
                _ => {
                    return Err(GroupError::InvalidExtension(format!(
                        "unknown sigma entry {key:?} for quotient {}",
                        doc.quotient
                    )))
                }
            };
            if val >= n {
                return Err(GroupError::InvalidExtension(format!("sigma[{key}] out of range")));
            }
            sigma[slot] = val;
        }
        if doc.quotient == QuotientKind::Dinf {
            // x̃ must commute with x̃² and conjugation by x̃ twice is conjugation by x̃².
            for (i, name) in ["s", "t"].iter().enumerate() {
                let phi = &alpha[i];
                let c = sigma[i];
                if phi[c] != c {
                    return Err(GroupError::InvalidExtension(format!(
                        "alpha[{name}] does not fix sigma[{name}{name}]"
                    )));
                }
                for x in 0..n {
                    let inner = h.mul(h.mul(c, x), h.inv(c));
                    if phi[phi[x]] != inner {
                        return Err(GroupError::InvalidExtension(format!(
                            "alpha[{name}]² is not conjugation by sigma[{name}{name}]"
                        )));
                    }
                }
            }
        }
        let mut alpha_powers = vec![(0..n).collect::<Vec<_>>()];
        if doc.quotient == QuotientKind::Z {
            loop {
                let last = alpha_powers.last().unwrap();
                let next: Vec<usize> = last.iter().map(|&x| alpha[0][x]).collect();
                if next.iter().enumerate().all(|(i, &x)| i == x) {
                    break;
                }
                alpha_powers.push(next);
            }
        }
        let spec = GroupSpec {
            kind: doc.quotient,
            h,
            alpha,
            alpha_powers,
            sigma,
            doc,
        };
        spec.check_associativity()?;
        Ok(spec)
    }

    fn check_associativity(&self) -> Result<(), GroupError> {
        let radius = if self.h.order() * 5 <= 40 { 2 } else { 1 };
        let sample = self.preimage_ball(radius).elements;
        for a in &sample {
            for b in &sample {
                let ab = self.mul_unchecked(a, b);
                for c in &sample {
                    let left = self.mul_unchecked(&ab, c);
                    let right = self.mul_unchecked(a, &self.mul_unchecked(b, c));
                    if left != right {
                        return Err(GroupError::InvalidExtension(format!(
                            "multiplication is not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn doc(&self) -> &GroupDoc {
        &self.doc
    }

    pub fn digest(&self) -> String {
        canonical::digest(&self.doc)
    }

    pub fn kind(&self) -> QuotientKind {
        self.kind
    }

    pub fn h_group(&self) -> &FiniteGroupTable {
        &self.h
    }

    pub fn h_order(&self) -> usize {
        self.h.order()
    }

    pub fn h_is_trivial(&self) -> bool {
        self.h.order() == 1
    }

    /// Automorphism of `H` induced by the lift of generator `index`
    /// (`0 = z` for ℤ; `0 = s`, `1 = t` for D∞).
    pub fn alpha(&self, index: usize) -> &[usize] {
        &self.alpha[index]
    }

    /// `s̃²` (`index = 0`) or `t̃²` (`index = 1`) for D∞.
    pub fn sigma(&self, index: usize) -> usize {
        self.sigma[index]
    }

    pub fn identity(&self) -> Element {
        Element::new(self.h.identity(), QuotientElement::IDENTITY)
    }

    pub fn contains(&self, a: &Element) -> bool {
        a.h < self.h.order() && self.kind.contains(a.q)
    }

    pub fn check(&self, a: &Element) -> Result<(), GroupError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(GroupError::Mismatch(format!("{a} (quotient {})", self.kind)))
        }
    }

    /// `φ_{w(q)}(h)`: conjugation of `h` by the lift of `q`.
    fn conjugate_by_lift(&self, q: QuotientElement, h: usize) -> usize {
        match self.kind {
            QuotientKind::Finite => h,
            QuotientKind::Z => {
                let ord = self.alpha_powers.len() as i64;
                self.alpha_powers[q.k.rem_euclid(ord) as usize][h]
            }
            QuotientKind::Dinf => {
                if self.h_is_trivial() {
                    return h;
                }
                let word = self.kind.reduced_word(q);
                self.conjugate_by_word(&word, h)
            }
        }
    }

    fn conjugate_by_word(&self, word: &[Letter], mut h: usize) -> usize {
        for letter in word.iter().rev() {
            h = self.alpha[*letter as usize][h];
        }
        h
    }

    pub(crate) fn mul_unchecked(&self, a: &Element, b: &Element) -> Element {
        let q = a.q.compose(b.q);
        let h = self.h.mul(a.h, self.conjugate_by_lift(a.q, b.h));
        let h = match self.kind {
            QuotientKind::Dinf if !self.h_is_trivial() => {
                // Cancel the junction of w(q₁)w(q₂); each x̃x̃ = x̃² is pushed left.
                let mut left = self.kind.reduced_word(a.q);
                let right = self.kind.reduced_word(b.q);
                let mut acc = h;
                for letter in right {
                    if left.last() != Some(&letter) {
                        break;
                    }
                    left.pop();
                    let pushed = self.conjugate_by_word(&left, self.sigma[letter as usize]);
                    acc = self.h.mul(acc, pushed);
                }
                acc
            }
            _ => h,
        };
        Element::new(h, q)
    }

    /// Group product; errors if either argument is not an element of this group.
    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element, GroupError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub(crate) fn inv_unchecked(&self, a: &Element) -> Element {
        let qi = a.q.inverse();
        let e = self.h.identity();
        let c = self.mul_unchecked(&Element::new(e, a.q), &Element::new(e, qi)).h;
        let tail = self.h.mul(self.h.inv(c), self.h.inv(a.h));
        self.mul_unchecked(&Element::new(e, qi), &Element::new(tail, QuotientElement::IDENTITY))
    }

    pub fn inverse(&self, a: &Element) -> Result<Element, GroupError> {
        self.check(a)?;
        Ok(self.inv_unchecked(a))
    }

    /// The quotient map `p(h, q) = q`.
    pub fn quotient_map(&self, a: &Element) -> QuotientElement {
        a.q
    }

    pub fn word_length(&self, q: QuotientElement) -> u64 {
        self.kind.word_length(q)
    }

    /// Word length of `p(a)`.
    pub fn length(&self, a: &Element) -> u64 {
        self.kind.word_length(a.q)
    }

    pub fn iota(&self, q: QuotientElement) -> i64 {
        self.kind.iota(q)
    }

    pub fn ball(&self, radius: u64) -> Ball<QuotientElement> {
        Ball {
            radius,
            elements: self.kind.ball(radius),
        }
    }

    /// `p⁻¹(B_N) = H × B_N` in canonical order.
    pub fn preimage_ball(&self, radius: u64) -> Ball<Element> {
        let elements = self
            .kind
            .ball(radius)
            .into_iter()
            .flat_map(|q| (0..self.h.order()).map(move |h| Element::new(h, q)))
            .collect();
        Ball { radius, elements }
    }

    /// Breadth-first canonical order on elements: by `|p(g)|`, then the sign of
    /// `ι(p(g))` (positive first), then `h`.
    pub fn canonical_cmp(&self, a: &Element, b: &Element) -> Ordering {
        self.kind.canonical_cmp(a.q, b.q).then(a.h.cmp(&b.h))
    }

    pub fn sort_canonical(&self, elements: &mut [Element]) {
        elements.sort_by(|a, b| self.canonical_cmp(a, b));
    }

    /// `Γ/K` for a finite normal subgroup `K ⊆ H`, listed by its elements of
    /// `H`, together with the class map `H → H/K`.
    pub fn quotient_by(&self, k: &[usize]) -> Result<(GroupSpec, Vec<usize>), GroupError> {
        let h = &self.h;
        let n = h.order();
        let bad = |what: &str| GroupError::InvalidExtension(format!("K is not {what}"));
        if k.iter().any(|&x| x >= n) {
            return Err(bad("a subset of H"));
        }
        let mut members = vec![false; n];
        for &x in k {
            members[x] = true;
        }
        if !members[h.identity()] {
            return Err(bad("a subgroup (missing identity)"));
        }
        let k: Vec<usize> = (0..n).filter(|&x| members[x]).collect();
        for &a in &k {
            for &b in &k {
                if !members[h.mul(a, b)] {
                    return Err(bad("closed under multiplication"));
                }
            }
            for g in 0..n {
                if !members[h.mul(h.mul(g, a), h.inv(g))] {
                    return Err(bad("normal in H"));
                }
            }
            if self.alpha.iter().any(|phi| !members[phi[a]]) {
                return Err(bad("normal in Γ"));
            }
        }
        let mut class_of = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for a in 0..n {
            if class_of[a] == usize::MAX {
                for &x in &k {
                    class_of[h.mul(a, x)] = reps.len();
                }
                reps.push(a);
            }
        }
        let m = reps.len();
        let mut doc = GroupDoc::trivial(self.kind);
        if m > 1 {
            doc.h = Some(TableDoc {
                size: m,
                table: reps
                    .iter()
                    .map(|&a| reps.iter().map(|&b| class_of[h.mul(a, b)]).collect())
                    .collect(),
                identity: class_of[h.identity()],
            });
            for (name, perm) in self.doc.alpha.iter() {
                let induced: Vec<usize> = reps.iter().map(|&r| class_of[perm[r]]).collect();
                if induced.iter().enumerate().any(|(i, &x)| i != x) {
                    doc.alpha.insert(name.clone(), induced);
                }
            }
            for (name, &c) in self.doc.sigma.iter() {
                if class_of[c] != class_of[h.identity()] {
                    doc.sigma.insert(name.clone(), class_of[c]);
                }
            }
        }
        Ok((GroupSpec::from_doc(doc)?, class_of))
    }

    /// Lifts of the quotient generators (`z` or `s`, `t`) with trivial `H` part.
    pub fn generator_lifts(&self) -> Vec<Element> {
        let e = self.h.identity();
        match self.kind {
            QuotientKind::Z => vec![Element::new(e, QuotientElement::translation(1))],
            QuotientKind::Dinf => vec![
                Element::new(e, QuotientElement::S),
                Element::new(e, QuotientElement::T),
            ],
            QuotientKind::Finite => vec![],
        }
    }

    /// Writes `a` as `h · x₁ ⋯ x_n` with each `xᵢ` an index into
    /// [`generator_lifts`](Self::generator_lifts) (negative exponents for ℤ are
    /// reported as `(0, -1)` pairs). Used to evaluate homomorphisms out of Γ.
    pub fn lift_word(&self, q: QuotientElement) -> Vec<(usize, i64)> {
        match self.kind {
            QuotientKind::Finite => vec![],
            QuotientKind::Z => {
                let step = if q.k >= 0 { 1 } else { -1 };
                vec![(0, step); q.k.unsigned_abs() as usize]
            }
            QuotientKind::Dinf => self
                .kind
                .reduced_word(q)
                .into_iter()
                .map(|l| (l as usize, 1))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_table() -> TableDoc {
        TableDoc {
            size: 2,
            table: vec![vec![0, 1], vec![1, 0]],
            identity: 0,
        }
    }

    #[test]
    fn dihedral_generator_products() {
        let d = QuotientKind::Dinf;
        let ts = QuotientElement::T.compose(QuotientElement::S);
        assert_eq!(ts, QuotientElement::translation(1));
        assert_eq!(QuotientElement::S.compose(QuotientElement::S), QuotientElement::IDENTITY);
        assert_eq!(QuotientElement::T.compose(QuotientElement::T), QuotientElement::IDENTITY);
        assert_eq!(d.word_length(QuotientElement::S), 1);
        assert_eq!(d.word_length(QuotientElement::T), 1);
        assert_eq!(d.word_length(QuotientElement::IDENTITY), 0);
        assert_eq!(d.word_length(ts), 2);
    }

    #[test]
    fn z_lengths_and_balls() {
        let z = QuotientKind::Z;
        assert_eq!(z.word_length(QuotientElement::translation(-2)), 2);
        let ball: Vec<i64> = z.ball(2).iter().map(|q| q.shift()).collect();
        assert_eq!(ball, vec![0, 1, -1, 2, -2]);
        assert_eq!(QuotientKind::Dinf.ball(1).len(), 3);
        assert_eq!(QuotientKind::Dinf.ball(5).len(), 11);
        assert_eq!(
            QuotientKind::Dinf.ball(1),
            vec![QuotientElement::IDENTITY, QuotientElement::S, QuotientElement::T]
        );
    }

    #[test]
    fn product_with_z2_multiplies_componentwise() {
        let g = GroupSpec::from_doc(GroupDoc {
            quotient: QuotientKind::Z,
            h: Some(z2_table()),
            alpha: BTreeMap::new(),
            sigma: BTreeMap::new(),
        })
        .unwrap();
        let a = Element::new(1, QuotientElement::translation(3));
        let b = Element::new(1, QuotientElement::translation(-3));
        assert_eq!(g.multiply(&a, &b).unwrap(), g.identity());
        assert_eq!(g.quotient_map(&Element::new(1, QuotientElement::translation(7))).shift(), 7);
    }

    #[test]
    fn mismatched_elements_are_rejected() {
        let g = GroupSpec::trivial(QuotientKind::Z);
        let refl = Element::new(0, QuotientElement::S);
        assert!(matches!(g.multiply(&refl, &g.identity()), Err(GroupError::Mismatch(_))));
        let out_of_range = Element::new(3, QuotientElement::IDENTITY);
        assert!(g.inverse(&out_of_range).is_err());
    }

    #[test]
    fn iota_of_identity_is_zero() {
        assert_eq!(QuotientKind::Dinf.iota(QuotientElement::IDENTITY), 0);
        assert_eq!(QuotientKind::Z.iota(QuotientElement::translation(5)), 5);
        for i in -20..=20 {
            let q = QuotientKind::Dinf.from_iota(i);
            assert_eq!(QuotientKind::Dinf.iota(q), i);
        }
    }

    #[test]
    fn bad_tables_are_rejected() {
        let not_latin = vec![vec![0, 1], vec![1, 1]];
        assert!(FiniteGroupTable::new(not_latin, 0).is_err());
        let bad_identity = vec![vec![1, 0], vec![0, 1]];
        assert!(FiniteGroupTable::new(bad_identity, 0).is_err());
    }

    #[test]
    fn nonsplit_dihedral_extension_is_associative() {
        // H = ℤ/2 with s̃² = 1 (central): every lift of s has order 4.
        let g = GroupSpec::from_doc(GroupDoc {
            quotient: QuotientKind::Dinf,
            h: Some(z2_table()),
            alpha: BTreeMap::new(),
            sigma: [("ss".to_string(), 1)].into_iter().collect(),
        })
        .unwrap();
        let s = Element::new(0, QuotientElement::S);
        let s2 = g.multiply(&s, &s).unwrap();
        assert_eq!(s2, Element::new(1, QuotientElement::IDENTITY));
        let s4 = g.multiply(&s2, &s2).unwrap();
        assert_eq!(s4, g.identity());
        let inv = g.inverse(&s).unwrap();
        assert_eq!(g.multiply(&s, &inv).unwrap(), g.identity());
    }

    #[test]
    fn quotient_by_h_gives_the_quotient_group() {
        let g = GroupSpec::from_doc(GroupDoc {
            quotient: QuotientKind::Z,
            h: Some(z2_table()),
            alpha: BTreeMap::new(),
            sigma: BTreeMap::new(),
        })
        .unwrap();
        let (q, class_of) = g.quotient_by(&[0, 1]).unwrap();
        assert_eq!(q, GroupSpec::trivial(QuotientKind::Z));
        assert_eq!(class_of, vec![0, 0]);
        let (same, ids) = g.quotient_by(&[0]).unwrap();
        assert_eq!(same.h_order(), 2);
        assert_eq!(ids, vec![0, 1]);
        assert!(g.quotient_by(&[1]).is_err());
    }

    #[test]
    fn inconsistent_cocycle_is_rejected() {
        // H = ℤ/3, alpha[s] = inversion, s̃² = 1 is not fixed by inversion.
        let table = (0..3).map(|a| (0..3).map(|b| (a + b) % 3).collect()).collect();
        let doc = GroupDoc {
            quotient: QuotientKind::Dinf,
            h: Some(TableDoc {
                size: 3,
                table,
                identity: 0,
            }),
            alpha: [("s".to_string(), vec![0, 2, 1])].into_iter().collect(),
            sigma: [("ss".to_string(), 1)].into_iter().collect(),
        };
        assert!(matches!(GroupSpec::from_doc(doc), Err(GroupError::InvalidExtension(_))));
    }
}
