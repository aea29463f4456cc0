//! Path queries as words over relation names.
//!
//! A path query `R1(x1,x2), ..., Rk(xk,xk+1)` is identified with the word
//! `R1 R2 ... Rk`. This module holds the word combinatorics that decide the
//! complexity of certain answering: rewinding, the three prefix/factor
//! conditions, the regular-expression normal forms and episodes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;

use crate::error::{Error, ParseError, Result};

/// A relation name. Names are interned behind an `Arc` so that words and
/// facts clone cheaply.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelName(Arc<str>);

impl RelName {
    /// Builds a relation name, checking the identifier syntax
    /// `[A-Za-z][A-Za-z0-9_]*`.
    pub fn new(name: &str) -> std::result::Result<Self, ParseError> {
        if let Some(pos) = identifier_error(name, false) {
            return Err(ParseError::new(pos, format!("invalid relation name {name:?}")));
        }
        Ok(RelName(Arc::from(name)))
    }

    /// Builds a name without syntax checks. Used for names in reserved
    /// namespaces (such as `__ext_N`) that user input can never produce.
    pub(crate) fn new_unchecked(name: &str) -> Self {
        RelName(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for RelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Returns the offset of the first character violating the identifier
/// syntax, if any. `allow_underscore_start` widens the first character class.
pub(crate) fn identifier_error(s: &str, allow_underscore_start: bool) -> Option<usize> {
    let mut chars = s.chars();
    match chars.next() {
        None => return Some(0),
        Some(c) if c.is_ascii_alphabetic() || (allow_underscore_start && c == '_') => {}
        Some(_) => return Some(0),
    }
    s.char_indices().skip(1).find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '_')).map(|(i, _)| i)
}

/// A word over relation names; the empty word is allowed as a value but is
/// rejected by the classification functions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<RelName>);

impl Word {
    pub fn new(symbols: Vec<RelName>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Parses either a run of single uppercase letters (`RXRY`) or names
    /// separated by dashes (`Emp-Mgr-Emp`). Any other dash-free identifier
    /// is read as a one-atom query.
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let lead = text.len() - text.trim_start().len();
        let body = text.trim();
        if body.is_empty() {
            return Err(ParseError::new(0, "empty query"));
        }
        if body.contains('-') {
            let mut symbols = Vec::new();
            let mut start = 0;
            for part in body.split('-') {
                let rel = RelName::new(part).map_err(|e| ParseError::new(lead + start + e.offset, e.message))?;
                symbols.push(rel);
                start += part.len() + 1;
            }
            return Ok(Word(symbols));
        }
        if body.chars().all(|c| c.is_ascii_uppercase()) {
            let symbols = body.chars().map(|c| RelName::new_unchecked(&c.to_string())).collect();
            return Ok(Word(symbols));
        }
        RelName::new(body).map(|r| Word(vec![r])).map_err(|e| ParseError::new(lead + e.offset, e.message))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[RelName] {
        &self.0
    }

    pub fn first(&self) -> Option<&RelName> {
        self.0.first()
    }

    pub fn last(&self) -> Option<&RelName> {
        self.0.last()
    }

    pub fn slice(&self, from: usize, to: usize) -> Word {
        Word(self.0[from..to].to_vec())
    }

    pub fn prefix(&self, len: usize) -> Word {
        self.slice(0, len)
    }

    pub fn suffix_from(&self, from: usize) -> Word {
        self.slice(from, self.len())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, rel: RelName) {
        self.0.push(rel);
    }

    pub fn pow(&self, k: usize) -> Word {
        Word(self.0.iter().cycle().take(self.0.len() * k).cloned().collect())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_suffix_of(&self, other: &Word) -> bool {
        other.0.ends_with(&self.0)
    }

    pub fn is_factor_of(&self, other: &Word) -> bool {
        !factor_offsets(&self.0, &other.0).is_empty()
    }

    /// Offsets at which `self` occurs in `other`.
    pub fn occurrences_in(&self, other: &Word) -> Vec<usize> {
        factor_offsets(&self.0, &other.0)
    }

    pub fn is_self_join_free(&self) -> bool {
        self.0.iter().all_unique()
    }

    pub fn alphabet(&self) -> BTreeSet<RelName> {
        self.0.iter().cloned().collect()
    }

    /// The word `q[..=j] ++ q[i+1..]` obtained by rewinding the occurrences
    /// at positions `i < j` of the same symbol.
    pub fn rewind_at(&self, i: usize, j: usize) -> Word {
        debug_assert!(i < j && self.0[i] == self.0[j]);
        let mut v = self.0[..=j].to_vec();
        v.extend_from_slice(&self.0[i + 1..]);
        Word(v)
    }

    /// All position pairs `i < j` carrying the same symbol.
    pub fn repeated_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).filter(move |&j| self.0[i] == self.0[j]).map(move |j| (i, j)))
    }
}

pub(crate) fn factor_offsets<T: PartialEq>(needle: &[T], hay: &[T]) -> Vec<usize> {
    if needle.len() > hay.len() {
        return Vec::new();
    }
    (0..=hay.len() - needle.len()).filter(|&o| hay[o..o + needle.len()] == *needle).collect()
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let compact = self.0.iter().all(|r| r.0.len() == 1 && r.0.chars().all(|c| c.is_ascii_uppercase()));
        if compact {
            for r in &self.0 {
                f.write_str(&r.0)?;
            }
            Ok(())
        } else {
            write!(f, "{}", self.0.iter().join("-"))
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Word::parse(s)
    }
}

impl From<Vec<RelName>> for Word {
    fn from(v: Vec<RelName>) -> Self {
        Word(v)
    }
}

/// Every word obtained from `q` by one rewinding step.
pub fn rewind_all(q: &Word) -> BTreeSet<Word> {
    q.repeated_pairs().map(|(i, j)| q.rewind_at(i, j)).collect()
}

fn non_empty(q: &Word) -> Result<()> {
    if q.is_empty() {
        Err(Error::EmptyQuery)
    } else {
        Ok(())
    }
}

/// `q` is a prefix of every one-step rewinding of itself.
pub fn satisfies_c1(q: &Word) -> Result<bool> {
    non_empty(q)?;
    Ok(q.repeated_pairs().all(|(i, j)| q.is_prefix_of(&q.rewind_at(i, j))))
}

/// `q` is a factor of every one-step rewinding of itself.
pub fn satisfies_c3(q: &Word) -> Result<bool> {
    non_empty(q)?;
    Ok(q.repeated_pairs().all(|(i, j)| q.is_factor_of(&q.rewind_at(i, j))))
}

/// The factor condition plus the constraint on three consecutive
/// occurrences `R v1 R v2 R w` of a symbol: either `v1 = v2` or `w` is a
/// prefix of `v1`.
pub fn satisfies_c2(q: &Word) -> Result<bool> {
    if !satisfies_c3(q)? {
        return Ok(false);
    }
    Ok(consecutive_triples(q).all(|(i, j, k)| {
        let s = q.symbols();
        let v1 = &s[i + 1..j];
        let v2 = &s[j + 1..k];
        let w = &s[k + 1..];
        v1 == v2 || v1.starts_with(w)
    }))
}

/// Triples `i < j < k` of consecutive occurrences of one symbol.
pub(crate) fn consecutive_triples(q: &Word) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
    q.alphabet().into_iter().flat_map(move |rel| {
        let pos: Vec<usize> = q.symbols().iter().enumerate().filter(|(_, r)| **r == rel).map(|(i, _)| i).collect();
        pos.windows(3).map(|w| (w[0], w[1], w[2])).collect::<Vec<_>>()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Fo,
    NlComplete,
    PtimeComplete,
    ConpComplete,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Fo => "FO",
            Tier::NlComplete => "NL_COMPLETE",
            Tier::PtimeComplete => "PTIME_COMPLETE",
            Tier::ConpComplete => "CONP_COMPLETE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub tier: Tier,
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
}

pub fn classify(q: &Word) -> Result<Classification> {
    let c1 = satisfies_c1(q)?;
    let c2 = satisfies_c2(q)?;
    let c3 = satisfies_c3(q)?;
    let tier = if c1 {
        Tier::Fo
    } else if c2 {
        Tier::NlComplete
    } else if c3 {
        Tier::PtimeComplete
    } else {
        Tier::ConpComplete
    };
    Ok(Classification { tier, c1, c2, c3 })
}

/// The four regular-expression shapes over a self-join-free word `uvw`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BForm {
    /// `q` is a prefix of `w v^k`.
    B1,
    /// `q` is a factor of `u^j w v^k`.
    B2a,
    /// `q` is a factor of `(uv)^k w v`.
    B2b,
    /// `q` is a factor of `u w (uv)^k`.
    B3,
}

impl fmt::Display for BForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BForm::B1 => "B1",
            BForm::B2a => "B2a",
            BForm::B2b => "B2b",
            BForm::B3 => "B3",
        })
    }
}

/// A concrete embedding of a query into one of the [`BForm`] patterns.
/// `j` is only meaningful for `B2a` and is zero otherwise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BWitness {
    pub form: BForm,
    pub u: Word,
    pub v: Word,
    pub w: Word,
    pub j: usize,
    pub k: usize,
    pub offset: usize,
}

impl BWitness {
    /// The pattern word this witness refers to.
    pub fn expand(&self) -> Word {
        pattern(self.form, &self.u, &self.v, &self.w, self.j, self.k)
    }

    /// Checks that `q` sits in the expanded pattern at `offset`, as a prefix
    /// for `B1`.
    pub fn embeds(&self, q: &Word) -> bool {
        let p = self.expand();
        let ok_shape = self.form != BForm::B1 || self.offset == 0;
        ok_shape
            && self.offset + q.len() <= p.len()
            && p.symbols()[self.offset..self.offset + q.len()] == *q.symbols()
            && self.u.concat(&self.v).concat(&self.w).is_self_join_free()
    }
}

fn pattern(form: BForm, u: &Word, v: &Word, w: &Word, j: usize, k: usize) -> Word {
    match form {
        BForm::B1 => w.concat(&v.pow(k)),
        BForm::B2a => u.pow(j).concat(w).concat(&v.pow(k)),
        BForm::B2b => u.concat(v).pow(k).concat(w).concat(v),
        BForm::B3 => u.concat(w).concat(&u.concat(v).pow(k)),
    }
}

fn div_ceil(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Embeddings of `q` into the `B1`, `B2a`, `B2b` and `B3` shapes.
///
/// Since `uvw` is self-join-free and every symbol of `q` must occur in the
/// pattern, `uvw` ranges over the orderings of the alphabet of `q`. For each
/// shape the exponents are the least ones that still contain the occurrence;
/// larger exponents add nothing because each pattern is a factor of the one
/// with bigger exponents.
pub fn decompose(q: &Word) -> Result<BTreeSet<BWitness>> {
    non_empty(q)?;
    let n = q.len();
    let alphabet: Vec<RelName> = q.alphabet().into_iter().collect();
    let mut out = BTreeSet::new();
    for perm in alphabet.iter().cloned().permutations(alphabet.len()) {
        let m = perm.len();
        for a in 0..=m {
            for b in a..=m {
                let u = Word(perm[..a].to_vec());
                let v = Word(perm[a..b].to_vec());
                let w = Word(perm[b..].to_vec());
                if u.is_empty() {
                    b1_witnesses(q, &v, &w, &mut out);
                }
                b2a_witnesses(q, &u, &v, &w, &mut out);
                let uv = u.concat(&v);
                let kmax = if uv.is_empty() { 0 } else { n / uv.len() + 2 };
                // (uv)^K w v
                let big = uv.pow(kmax).concat(&w).concat(&v);
                for o in q.occurrences_in(&big) {
                    let drop = if uv.is_empty() { 0 } else { (o / uv.len()).min(kmax) };
                    out.insert(BWitness {
                        form: BForm::B2b,
                        u: u.clone(),
                        v: v.clone(),
                        w: w.clone(),
                        j: 0,
                        k: kmax - drop,
                        offset: o - drop * uv.len(),
                    });
                }
                // u w (uv)^K
                let head = u.concat(&w);
                let big = head.concat(&uv.pow(kmax));
                for o in q.occurrences_in(&big) {
                    let end = o + n;
                    let k = if end > head.len() { div_ceil(end - head.len(), uv.len()) } else { 0 };
                    out.insert(BWitness {
                        form: BForm::B3,
                        u: u.clone(),
                        v: v.clone(),
                        w: w.clone(),
                        j: 0,
                        k,
                        offset: o,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn b1_witnesses(q: &Word, v: &Word, w: &Word, out: &mut BTreeSet<BWitness>) {
    let n = q.len();
    let k = if n <= w.len() {
        0
    } else if v.is_empty() {
        return;
    } else {
        div_ceil(n - w.len(), v.len())
    };
    if q.is_prefix_of(&w.concat(&v.pow(k))) {
        out.insert(BWitness { form: BForm::B1, u: Word::empty(), v: v.clone(), w: w.clone(), j: 0, k, offset: 0 });
    }
}

fn b2a_witnesses(q: &Word, u: &Word, v: &Word, w: &Word, out: &mut BTreeSet<BWitness>) {
    let n = q.len();
    let jmax = if u.is_empty() { 0 } else { n / u.len() + 2 };
    let kmax = if v.is_empty() { 0 } else { n / v.len() + 2 };
    let big = u.pow(jmax).concat(w).concat(&v.pow(kmax));
    let tail_start = jmax * u.len() + w.len();
    for o in q.occurrences_in(&big) {
        let drop = if u.is_empty() { 0 } else { (o / u.len()).min(jmax) };
        let end = o + n;
        let k = if end > tail_start { div_ceil(end - tail_start, v.len()) } else { 0 };
        out.insert(BWitness {
            form: BForm::B2a,
            u: u.clone(),
            v: v.clone(),
            w: w.clone(),
            j: jmax - drop,
            k,
            offset: o - drop * u.len(),
        });
    }
}

/// Searches for the factor pattern that separates the factor condition from
/// the stronger NL condition: a self-join-free `uvw` with `u` non-empty such
/// that either `v` is non-empty and `last(u) w u v u first(v)` is a factor of
/// `q`, or `v` is empty, `w` is non-empty and `last(u) w u u first(u)` is a
/// factor of `q`. Returns the first hit as `(u, v, w)`.
pub fn find_c2_obstruction(q: &Word) -> Option<(Word, Word, Word)> {
    let alphabet: Vec<RelName> = q.alphabet().into_iter().collect();
    for size in 1..=alphabet.len() {
        for perm in alphabet.iter().cloned().permutations(size) {
            for a in 1..=size {
                for b in a..=size {
                    let u = Word(perm[..a].to_vec());
                    let v = Word(perm[a..b].to_vec());
                    let w = Word(perm[b..].to_vec());
                    let lu = Word(vec![u.last().unwrap().clone()]);
                    let pat = if let Some(fv) = v.first() {
                        lu.concat(&w).concat(&u).concat(&v).concat(&u).concat(&Word(vec![fv.clone()]))
                    } else if !w.is_empty() {
                        let fu = Word(vec![u.first().unwrap().clone()]);
                        lu.concat(&w).concat(&u).concat(&u).concat(&fu)
                    } else {
                        continue;
                    };
                    if pat.is_factor_of(q) {
                        return Some((u, v, w));
                    }
                }
            }
        }
    }
    None
}

/// A factor `R u R` of the query where `R` does not occur in `u`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Episode {
    pub offset: usize,
    pub word: Word,
    /// The part of the query left of the episode is a suffix of `(Ru)^*`.
    pub left_repeating: bool,
    /// The part right of the episode is a prefix of `(uR)^*`.
    pub right_repeating: bool,
}

pub fn find_episodes(q: &Word) -> Vec<Episode> {
    let s = q.symbols();
    let mut out = Vec::new();
    for i in 0..s.len() {
        let Some(d) = s[i + 1..].iter().position(|r| *r == s[i]) else { continue };
        let j = i + 1 + d;
        let ru = &s[i..j];
        let ur = &s[i + 1..=j];
        let left = &s[..i];
        let right = &s[j + 1..];
        let left_repeating = left.iter().rev().zip(ru.iter().rev().cycle()).all(|(a, b)| a == b);
        let right_repeating = right.iter().zip(ur.iter().cycle()).all(|(a, b)| a == b);
        out.push(Episode { offset: i, word: Word(s[i..=j].to_vec()), left_repeating, right_repeating });
    }
    out
}
