//! Substitution subshifts over ℤ, acted on by ℤ or D∞ through affine index
//! maps: `g = (ε, k)` moves the letter at position `i` to position `εi + k`.
//!
//! The language oracle is exact for primitive substitutions. The 2-letter
//! language is the closure of the 2-factors of `σ(c)` under `uv ↦ 2-factors of
//! σ(uv)`; longer words of length `n` are exactly the factors of
//! `σᵏ(u)σᵏ(v)` for `uv` in the 2-letter language, once every `σᵏ(c)` has
//! length at least `n − 1`. That `k` is bounded by the window budget.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{Emptiness, PatternSet, SpaceError};
use crate::group::{Element, GroupSpec, QuotientKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleAnswer {
    Admissible,
    Forbidden,
    Unknown,
}

#[derive(Debug)]
pub struct Subshift {
    alphabet: Vec<u8>,
    rules: HashMap<u8, Vec<u8>>,
    seed: Vec<u8>,
    budget: u32,
    kind: QuotientKind,
    pairs: Vec<[u8; 2]>,
    languages: Mutex<HashMap<usize, Arc<Vec<String>>>>,
}

pub(crate) fn whole() -> PatternSet {
    PatternSet {
        start: 0,
        len: 0,
        words: vec![String::new()],
    }
}

pub(crate) fn empty() -> PatternSet {
    PatternSet {
        start: 0,
        len: 0,
        words: Vec::new(),
    }
}

/// Smallest `p ≥ 1` with `w[i] = w[i + p]` wherever both are defined.
pub fn least_period(w: &[u8]) -> usize {
    (1..w.len())
        .find(|&p| (0..w.len() - p).all(|i| w[i] == w[i + p]))
        .unwrap_or(w.len())
}

fn budget_error(n: usize) -> SpaceError {
    SpaceError::Budget(format!("the language of length {n} needs more substitution iterations"))
}

impl Subshift {
    pub fn from_doc(
        group: &GroupSpec,
        alphabet: &[String],
        substitution: &BTreeMap<String, String>,
        seed: &str,
        budget: u32,
    ) -> Result<Subshift, SpaceError> {
        let invalid = |msg: String| SpaceError::Invalid(msg);
        if !group.h_is_trivial() {
            return Err(invalid("subshifts support groups with trivial H only".into()));
        }
        if !group.kind().is_infinite() {
            return Err(invalid("subshifts need an infinite quotient".into()));
        }
        let mut letters = Vec::new();
        for a in alphabet {
            match a.as_bytes() {
                [c] if c.is_ascii_graphic() && !letters.contains(c) => letters.push(*c),
                _ => return Err(invalid(format!("bad alphabet letter {a:?}"))),
            }
        }
        if letters.is_empty() {
            return Err(invalid("empty alphabet".into()));
        }
        let mut rules = HashMap::new();
        for (k, v) in substitution {
            let [c] = k.as_bytes() else {
                return Err(invalid(format!("substitution key {k:?} is not a letter")));
            };
            if !letters.contains(c) || v.is_empty() || v.bytes().any(|b| !letters.contains(&b)) {
                return Err(invalid(format!("bad substitution rule {k:?} -> {v:?}")));
            }
            rules.insert(*c, v.as_bytes().to_vec());
        }
        if rules.len() != letters.len() {
            return Err(invalid("every letter needs a substitution rule".into()));
        }
        if seed.is_empty() || seed.bytes().any(|b| !letters.contains(&b)) {
            return Err(invalid(format!("bad seed {seed:?}")));
        }
        let mut sub = Subshift {
            alphabet: letters,
            rules,
            seed: seed.as_bytes().to_vec(),
            budget,
            kind: group.kind(),
            pairs: Vec::new(),
            languages: Mutex::new(HashMap::new()),
        };
        if !sub.is_primitive() {
            return Err(invalid("substitution is not primitive".into()));
        }
        sub.pairs = sub.two_letter_language();
        if sub.kind == QuotientKind::Dinf {
            // Later lengths are checked when first computed.
            sub.language(2)?;
        }
        Ok(sub)
    }

    fn is_primitive(&self) -> bool {
        let n = self.alphabet.len();
        let idx = |c: u8| self.alphabet.iter().position(|&x| x == c).unwrap();
        let step: Vec<Vec<bool>> = self
            .alphabet
            .iter()
            .map(|&c| {
                let mut row = vec![false; n];
                for &d in &self.rules[&c] {
                    row[idx(d)] = true;
                }
                row
            })
            .collect();
        let mut power = step.clone();
        for _ in 0..(n - 1) * (n - 1) + 1 {
            if power.iter().all(|row| row.iter().all(|&x| x)) {
                return true;
            }
            power = (0..n)
                .map(|i| (0..n).map(|j| (0..n).any(|m| power[i][m] && step[m][j])).collect())
                .collect();
        }
        false
    }

    fn two_letter_language(&self) -> Vec<[u8; 2]> {
        let mut found: BTreeSet<[u8; 2]> = BTreeSet::new();
        for &c in &self.alphabet {
            for w in self.rules[&c].windows(2) {
                found.insert([w[0], w[1]]);
            }
        }
        loop {
            let mut next = found.clone();
            for [u, v] in &found {
                let image = self.apply(&[*u, *v]);
                for w in image.windows(2) {
                    next.insert([w[0], w[1]]);
                }
            }
            if next.len() == found.len() {
                return found.into_iter().collect();
            }
            found = next;
        }
    }

    pub fn kind(&self) -> QuotientKind {
        self.kind
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    pub fn alphabet(&self) -> &[u8] {
        &self.alphabet
    }

    pub fn seed(&self) -> &[u8] {
        &self.seed
    }

    pub fn apply(&self, word: &[u8]) -> Vec<u8> {
        word.iter().flat_map(|c| self.rules[c].iter().copied()).collect()
    }

    /// `σᵏ(word)`.
    pub fn iterate(&self, word: &[u8], k: u32) -> Vec<u8> {
        let mut w = word.to_vec();
        for _ in 0..k {
            w = self.apply(&w);
        }
        w
    }

    /// Smallest `k ≤ budget` with `|σᵏ(c)| ≥ len` for every letter.
    fn iterations_for(&self, len: usize) -> Option<u32> {
        let mut lengths: Vec<usize> = vec![1; self.alphabet.len()];
        for k in 0..=self.budget {
            if lengths.iter().all(|&l| l >= len) {
                return Some(k);
            }
            lengths = self
                .alphabet
                .iter()
                .map(|c| {
                    self.rules[c]
                        .iter()
                        .map(|d| lengths[self.alphabet.iter().position(|x| x == d).unwrap()])
                        .sum()
                })
                .collect();
        }
        None
    }

    /// All admissible words of length `n`, sorted.
    pub fn language(&self, n: usize) -> Result<Arc<Vec<String>>, SpaceError> {
        if let Some(l) = self.languages.lock().expect("language cache").get(&n) {
            return Ok(l.clone());
        }
        let words: BTreeSet<Vec<u8>> = match n {
            0 => BTreeSet::from([Vec::new()]),
            1 => self.alphabet.iter().map(|&c| vec![c]).collect(),
            2 => self.pairs.iter().map(|p| p.to_vec()).collect(),
            _ => {
                let k = self.iterations_for(n - 1).ok_or_else(|| budget_error(n))?;
                let mut out = BTreeSet::new();
                for pair in &self.pairs {
                    let block = self.iterate(pair, k);
                    for w in block.windows(n) {
                        out.insert(w.to_vec());
                    }
                }
                out
            }
        };
        if self.kind == QuotientKind::Dinf {
            for w in &words {
                let rev: Vec<u8> = w.iter().rev().copied().collect();
                if !words.contains(&rev) {
                    return Err(SpaceError::Invalid(format!(
                        "language is not closed under reversal at length {n}; D∞ does not act"
                    )));
                }
            }
        }
        let list: Arc<Vec<String>> = Arc::new(
            words
                .into_iter()
                .map(|w| String::from_utf8(w).expect("ASCII alphabet"))
                .collect(),
        );
        self.languages
            .lock()
            .expect("language cache")
            .insert(n, list.clone());
        Ok(list)
    }

    pub fn admissible(&self, word: &str) -> OracleAnswer {
        match self.language(word.len()) {
            Ok(l) => {
                if l.binary_search_by(|w| w.as_str().cmp(word)).is_ok() {
                    OracleAnswer::Admissible
                } else {
                    OracleAnswer::Forbidden
                }
            }
            Err(_) => OracleAnswer::Unknown,
        }
    }

    fn check_set(&self, p: &PatternSet) -> Result<(), SpaceError> {
        for w in &p.words {
            if w.len() != p.len {
                return Err(SpaceError::Invalid(format!(
                    "pattern {w:?} does not fill a window of length {}",
                    p.len
                )));
            }
            if w.bytes().any(|b| !self.alphabet.contains(&b)) {
                return Err(SpaceError::Invalid(format!("pattern {w:?} uses letters outside the alphabet")));
            }
        }
        Ok(())
    }

    /// Refinement of `p` to the window `[start, start + len) ⊇ p`'s window.
    fn refine(&self, p: &PatternSet, start: i64, len: usize) -> Result<Vec<String>, SpaceError> {
        if p.len == 0 {
            return Ok(if p.words.is_empty() {
                Vec::new()
            } else {
                self.language(len)?.to_vec()
            });
        }
        debug_assert!(start <= p.start && p.start + p.len as i64 <= start + len as i64);
        let offset = (p.start - start) as usize;
        let keep: BTreeSet<&str> = p.words.iter().map(String::as_str).collect();
        Ok(self
            .language(len)?
            .iter()
            .filter(|w| keep.contains(&w[offset..offset + p.len]))
            .cloned()
            .collect())
    }

    pub fn canonicalize(&self, p: &PatternSet) -> Result<PatternSet, SpaceError> {
        self.check_set(p)?;
        let lang = self.language(p.len)?;
        let mut words: Vec<String> = p
            .words
            .iter()
            .filter(|w| lang.binary_search(w).is_ok())
            .cloned()
            .collect();
        words.sort_unstable();
        words.dedup();
        if words.is_empty() {
            return Ok(empty());
        }
        if p.len == 0 || words.len() == lang.len() {
            return Ok(whole());
        }
        Ok(PatternSet {
            start: p.start,
            len: p.len,
            words,
        })
    }

    pub fn translate(&self, g: &Element, p: &PatternSet) -> Result<PatternSet, SpaceError> {
        self.check_set(p)?;
        let q = g.q;
        let moved = if q.is_reflection() {
            let hi = p.start + p.len as i64 - 1;
            PatternSet {
                start: q.apply(hi),
                len: p.len,
                words: p.words.iter().map(|w| w.chars().rev().collect()).collect(),
            }
        } else {
            PatternSet {
                start: q.apply(p.start),
                len: p.len,
                words: p.words.clone(),
            }
        };
        self.canonicalize(&moved)
    }

    fn hull(a: &PatternSet, b: &PatternSet) -> (i64, usize) {
        let pieces: Vec<&PatternSet> = [a, b].into_iter().filter(|p| p.len > 0).collect();
        if pieces.is_empty() {
            return (0, 0);
        }
        let lo = pieces.iter().map(|p| p.start).min().unwrap();
        let hi = pieces.iter().map(|p| p.start + p.len as i64).max().unwrap();
        (lo, (hi - lo) as usize)
    }

    fn combine(&self, a: &PatternSet, b: &PatternSet, union: bool) -> Result<PatternSet, SpaceError> {
        self.check_set(a)?;
        self.check_set(b)?;
        let (start, len) = Subshift::hull(a, b);
        let ra: BTreeSet<String> = self.refine(a, start, len)?.into_iter().collect();
        let rb: BTreeSet<String> = self.refine(b, start, len)?.into_iter().collect();
        let words = if union {
            ra.union(&rb).cloned().collect()
        } else {
            ra.intersection(&rb).cloned().collect()
        };
        self.canonicalize(&PatternSet { start, len, words })
    }

    pub fn union(&self, a: &PatternSet, b: &PatternSet) -> Result<PatternSet, SpaceError> {
        self.combine(a, b, true)
    }

    pub fn intersect(&self, a: &PatternSet, b: &PatternSet) -> Result<PatternSet, SpaceError> {
        self.combine(a, b, false)
    }

    pub fn complement(&self, p: &PatternSet) -> Result<PatternSet, SpaceError> {
        self.check_set(p)?;
        let keep: BTreeSet<&String> = p.words.iter().collect();
        let words = self
            .language(p.len)?
            .iter()
            .filter(|w| !keep.contains(w))
            .cloned()
            .collect();
        self.canonicalize(&PatternSet {
            start: p.start,
            len: p.len,
            words,
        })
    }

    pub fn is_empty(&self, p: &PatternSet) -> Emptiness {
        if self.check_set(p).is_err() {
            return Emptiness::Unknown;
        }
        let mut unknown = false;
        for w in &p.words {
            match self.admissible(w) {
                OracleAnswer::Admissible => return Emptiness::NonEmpty,
                OracleAnswer::Unknown => unknown = true,
                OracleAnswer::Forbidden => {}
            }
        }
        if unknown {
            Emptiness::Unknown
        } else {
            Emptiness::Empty
        }
    }

    pub fn member(&self, start: i64, word: &str, p: &PatternSet) -> Result<bool, SpaceError> {
        self.check_set(p)?;
        if p.len == 0 {
            return Ok(!p.words.is_empty());
        }
        let offset = p.start - start;
        if offset < 0 || offset as usize + p.len > word.len() {
            return Err(SpaceError::Resolution(format!(
                "prefix on [{start}, {}) does not cover [{}, {})",
                start + word.len() as i64,
                p.start,
                p.start + p.len as i64
            )));
        }
        let offset = offset as usize;
        let piece = &word[offset..offset + p.len];
        Ok(p.words.iter().any(|w| w == piece))
    }

    /// Admissible one-letter extensions of `word` to the left and right; the
    /// oracle's witness that a nonempty cylinder extends.
    pub fn extensions(&self, word: &str) -> Result<Vec<String>, SpaceError> {
        let n = word.len() + 2;
        Ok(self
            .language(n)?
            .iter()
            .filter(|w| &w[1..n - 1] == word)
            .cloned()
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fibonacci(budget: u32) -> Subshift {
        let rules = [("a".to_string(), "ab".to_string()), ("b".to_string(), "a".to_string())]
            .into_iter()
            .collect();
        Subshift::from_doc(
            &GroupSpec::trivial(QuotientKind::Z),
            &["a".into(), "b".into()],
            &rules,
            "a",
            budget,
        )
        .unwrap()
    }

    #[test]
    fn fibonacci_complexity() {
        let f = fibonacci(10);
        for n in 0..=10 {
            assert_eq!(f.language(n).unwrap().len(), n + 1, "length {n}");
        }
        assert_eq!(f.admissible("bb"), OracleAnswer::Forbidden);
        assert_eq!(f.admissible("aa"), OracleAnswer::Admissible);
    }

    #[test]
    fn budget_limits_window_length() {
        let f = fibonacci(3);
        // |σ³(b)| = 3, so length 4 is the longest decidable window.
        assert!(f.language(4).is_ok());
        assert!(f.language(5).is_err());
        assert_eq!(f.admissible("abaab"), OracleAnswer::Unknown);
    }

    #[test]
    fn least_periods() {
        assert_eq!(least_period(b"abaab"), 3);
        assert_eq!(least_period(b"aaaa"), 1);
        assert_eq!(least_period(b"abab"), 2);
        assert_eq!(least_period(b"ab"), 2);
    }

    #[test]
    fn canonical_form_prunes_and_sorts() {
        let f = fibonacci(10);
        let p = PatternSet {
            start: 0,
            len: 2,
            words: vec!["ba".into(), "bb".into(), "ab".into(), "ba".into()],
        };
        let c = f.canonicalize(&p).unwrap();
        assert_eq!(c.words, vec!["ab".to_string(), "ba".to_string()]);
        assert_eq!(f.canonicalize(&c).unwrap(), c);
        let all = PatternSet {
            start: 3,
            len: 2,
            words: vec!["aa".into(), "ab".into(), "ba".into()],
        };
        assert_eq!(f.canonicalize(&all).unwrap(), whole());
    }

    #[test]
    fn non_primitive_rejected() {
        let rules = [("a".to_string(), "a".to_string()), ("b".to_string(), "ab".to_string())]
            .into_iter()
            .collect();
        let r = Subshift::from_doc(
            &GroupSpec::trivial(QuotientKind::Z),
            &["a".into(), "b".into()],
            &rules,
            "a",
            10,
        );
        assert!(r.is_err());
    }

    #[test]
    fn reflection_reverses_window() {
        let f = fibonacci(10);
        let p = PatternSet {
            start: 2,
            len: 3,
            words: vec!["aab".into()],
        };
        let g = Element::new(0, crate::group::QuotientElement::reflection(0));
        let expected = PatternSet {
            start: -4,
            len: 3,
            words: vec!["baa".into()],
        };
        assert_eq!(f.translate(&g, &p).unwrap(), f.canonicalize(&expected).unwrap());
    }
}
