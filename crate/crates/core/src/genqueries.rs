//! Path queries in which some junctions are constants.
//!
//! A generalized path query `R1(s1,s2), ..., Rk(sk,sk+1)` is stored as its
//! relation word plus the `k + 1` junctions. Variables are anonymous: all
//! variable junctions are distinct, so a junction is either a fresh
//! variable or a constant.
//!
//! Text syntax alternates junctions and relation names, separated by
//! whitespace: `_ R _ S :0 T :1 R _`. A plain word such as `RXRY` stands
//! for the query with only variable junctions.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};
use crate::instance::{Constant, Fact, Instance};
use crate::oracle::{Atom, Bcq, Term};
use crate::solvers::terminal::fixed_head_certain;
use crate::solvers::{solve, Method};
use crate::words::{classify, consecutive_triples, Classification, RelName, Tier, Word};

/// Fresh relation used by the extended query.
pub const EXT_RELATION: &str = "__ext_N";
/// Fresh constant paired with the end constant in the extended instance.
pub const EXT_CONSTANT: &str = "__ext_d";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Junction {
    Var,
    Const(Constant),
}

/// `γ`: the constant closing a characteristic prefix, or `⊤` if it ends in
/// a variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EndMarker {
    Top,
    Const(Constant),
}

impl fmt::Display for EndMarker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndMarker::Top => f.write_str("⊤"),
            EndMarker::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneralizedPathQuery {
    relations: Word,
    junctions: Vec<Junction>,
}

impl GeneralizedPathQuery {
    /// Checks that there is one more junction than relations and that no
    /// constant is used at two junctions.
    pub fn new(relations: Word, junctions: Vec<Junction>) -> std::result::Result<Self, ParseError> {
        if junctions.len() != relations.len() + 1 {
            return Err(ParseError::new(0, "need exactly one more junction than relations"));
        }
        let mut seen = BTreeSet::new();
        for j in &junctions {
            if let Junction::Const(c) = j {
                if !seen.insert(c.clone()) {
                    return Err(ParseError::new(0, format!("constant {c} occurs at two junctions")));
                }
            }
        }
        Ok(GeneralizedPathQuery { relations, junctions })
    }

    /// The query `q^γ`: the word `q` whose last junction is `γ`.
    pub fn anchored(q: &Word, end: &EndMarker) -> Self {
        let mut junctions = vec![Junction::Var; q.len() + 1];
        if let EndMarker::Const(c) = end {
            junctions[q.len()] = Junction::Const(c.clone());
        }
        GeneralizedPathQuery { relations: q.clone(), junctions }
    }

    pub fn from_word(q: &Word) -> Self {
        Self::anchored(q, &EndMarker::Top)
    }

    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let tokens: Vec<(usize, &str)> = tokenize(text);
        let junction_syntax = tokens.first().is_some_and(|(_, t)| t.starts_with('_') || t.starts_with(':'));
        if !junction_syntax {
            let q = Word::parse(text.trim())?;
            if q.is_empty() {
                return Err(ParseError::new(0, "empty query"));
            }
            return Ok(Self::from_word(&q));
        }
        let mut relations = Vec::new();
        let mut junctions = Vec::new();
        for (i, &(off, tok)) in tokens.iter().enumerate() {
            if i % 2 == 0 {
                junctions.push(match tok {
                    "_" => Junction::Var,
                    _ if tok.starts_with(':') => Junction::Const(
                        Constant::new(&tok[1..]).map_err(|e| ParseError::new(off + 1 + e.offset, e.message))?,
                    ),
                    _ => return Err(ParseError::new(off, format!("expected a junction, found {tok:?}"))),
                });
            } else {
                relations.push(RelName::new(tok).map_err(|e| ParseError::new(off + e.offset, e.message))?);
            }
        }
        if tokens.len().is_multiple_of(2) {
            return Err(ParseError::new(text.chars().count(), "query must end with a junction"));
        }
        if relations.is_empty() {
            return Err(ParseError::new(0, "query needs at least one relation"));
        }
        Self::new(Word::new(relations), junctions)
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn relations(&self) -> &Word {
        &self.relations
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn has_constants(&self) -> bool {
        self.junctions.iter().any(|j| matches!(j, Junction::Const(_)))
    }

    pub fn constants(&self) -> BTreeSet<Constant> {
        self.junctions
            .iter()
            .filter_map(|j| match j {
                Junction::Const(c) => Some(c.clone()),
                Junction::Var => None,
            })
            .collect()
    }

    /// The query as a conjunctive query with variables `x1, x2, ...` named
    /// by junction position.
    pub fn to_bcq(&self) -> Bcq {
        let term = |i: usize| match &self.junctions[i] {
            Junction::Var => Term::Var(format!("x{}", i + 1)),
            Junction::Const(c) => Term::Const(c.clone()),
        };
        Bcq::new(
            self.relations
                .symbols()
                .iter()
                .enumerate()
                .map(|(i, r)| Atom { rel: r.clone(), key: term(i), value: term(i + 1) })
                .collect(),
        )
    }

    fn end_marker(&self) -> EndMarker {
        match self.junctions.last() {
            Some(Junction::Const(c)) => EndMarker::Const(c.clone()),
            _ => EndMarker::Top,
        }
    }
}

fn tokenize(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (chars, (b, ch)) in text.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((s, sc)) = start.take() {
                out.push((sc, &text[s..b]));
            }
        } else if start.is_none() {
            start = Some((b, chars));
        }
    }
    if let Some((s, sc)) = start {
        out.push((sc, &text[s..]));
    }
    out
}

impl fmt::Display for GeneralizedPathQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in self.junctions.iter().enumerate() {
            if i > 0 {
                write!(f, " {} ", self.relations.symbols()[i - 1])?;
            }
            match j {
                Junction::Var => f.write_str("_")?,
                Junction::Const(c) => write!(f, ":{c}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for GeneralizedPathQuery {
    type Err = ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        Self::parse(s)
    }
}

/// Length of the characteristic prefix: the number of leading atoms whose
/// key is a variable.
fn chr_len(q: &GeneralizedPathQuery) -> usize {
    q.junctions[..q.len()].iter().position(|j| matches!(j, Junction::Const(_))).unwrap_or(q.len())
}

/// The longest prefix whose keys are all variables. It may have no atoms
/// when the first junction is a constant.
pub fn characteristic_prefix(q: &GeneralizedPathQuery) -> GeneralizedPathQuery {
    let l = chr_len(q);
    GeneralizedPathQuery { relations: q.relations.prefix(l), junctions: q.junctions[..=l].to_vec() }
}

/// The characteristic prefix as a word with its end marker.
pub fn characteristic_word(q: &GeneralizedPathQuery) -> (Word, EndMarker) {
    let chr = characteristic_prefix(q);
    let end = chr.end_marker();
    (chr.relations, end)
}

pub fn ext_relation() -> RelName {
    RelName::new_unchecked(EXT_RELATION)
}

fn ext_constant() -> Constant {
    Constant::new(EXT_CONSTANT).expect("valid constant")
}

/// The constant-free query whose certain answers decide those of `q`: the
/// characteristic prefix followed by a fresh relation when `q` has
/// constants.
pub fn extend(q: &GeneralizedPathQuery) -> Word {
    if !q.has_constants() {
        return q.relations.clone();
    }
    let mut w = characteristic_prefix(q).relations;
    w.push(ext_relation());
    w
}

/// Is there a homomorphism from `a` to `b`? Since junctions of a path
/// query are distinct, a homomorphism maps consecutive atoms to
/// consecutive atoms and is fixed by the offset of the first one.
pub fn homomorphism_exists(a: &GeneralizedPathQuery, b: &GeneralizedPathQuery, prefix_only: bool) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let last = if prefix_only { 0 } else { b.len() - a.len() };
    (0..=last).any(|o| {
        a.relations.symbols() == &b.relations.symbols()[o..o + a.len()]
            && a.junctions.iter().enumerate().all(|(i, j)| match j {
                Junction::Var => true,
                Junction::Const(c) => b.junctions[o + i] == Junction::Const(c.clone()),
            })
    })
}

/// The three conditions, evaluated on the characteristic prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DConditions {
    pub d1: bool,
    pub d2: bool,
    pub d3: bool,
}

pub fn d_conditions(q: &GeneralizedPathQuery) -> DConditions {
    let (p, end) = characteristic_word(q);
    let chr = GeneralizedPathQuery::anchored(&p, &end);
    let mut d1 = true;
    let mut d3 = true;
    for (i, j) in p.repeated_pairs() {
        let target = GeneralizedPathQuery::anchored(&p.rewind_at(i, j), &end);
        d1 &= homomorphism_exists(&chr, &target, true);
        d3 &= homomorphism_exists(&chr, &target, false);
    }
    let d2 = d3
        && consecutive_triples(&p).all(|(i, j, k)| {
            let s = p.symbols();
            s[i + 1..j] == s[j + 1..k]
                || homomorphism_exists(
                    &GeneralizedPathQuery::anchored(&p.suffix_from(k), &end),
                    &GeneralizedPathQuery::anchored(&p.slice(i, j), &end),
                    true,
                )
        });
    DConditions { d1, d2, d3 }
}

/// Tier from the conditions on the characteristic prefix.
pub fn classify_generalized(q: &GeneralizedPathQuery) -> Classification {
    if !q.has_constants() {
        return classify(&q.relations).expect("generalized queries are non-empty");
    }
    let DConditions { d1, d2, d3 } = d_conditions(q);
    let tier = match (d1, d2, d3) {
        (true, _, _) => Tier::Fo,
        (_, true, _) => Tier::NlComplete,
        (_, _, true) => Tier::PtimeComplete,
        _ => Tier::ConpComplete,
    };
    Classification { tier, c1: d1, c2: d2, c3: d3 }
}

/// Certain answer for a generalized query.
///
/// The query splits at its constant junctions into variable-disjoint
/// pieces whose answers are combined by conjunction. The characteristic
/// prefix is answered through its extended word on `db` plus the fact
/// `__ext_N(c, __ext_d)` for its end constant `c`; every piece headed by a
/// constant is answered by the terminal test for its head, after the same
/// extension if it ends in a constant. `cap` limits the
/// counterexample search used for the hardest tier.
pub fn solve_generalized(db: &Instance, q: &GeneralizedPathQuery, cap: u64) -> Result<bool> {
    for c in db.active_domain().iter().chain(q.constants().iter()) {
        if c.as_str().starts_with("__ext_") {
            return Err(Error::ReservedName(c.to_string()));
        }
    }
    let l = chr_len(q);
    if l > 0 {
        let (p, end) = characteristic_word(q);
        let ok = match end {
            EndMarker::Top => solve(db, &p, Method::Auto, cap)?.answer,
            EndMarker::Const(c) => {
                let mut w = p;
                w.push(ext_relation());
                solve(&extended(db, &c), &w, Method::Auto, cap)?.answer
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    let mut start = l;
    while start < q.len() {
        let Junction::Const(head) = &q.junctions[start] else { unreachable!("pieces start at constants") };
        let end = (start + 1..=q.len()).find(|&j| matches!(q.junctions[j], Junction::Const(_))).unwrap_or(q.len());
        let mut word = q.relations.slice(start, end);
        let instance = match &q.junctions[end] {
            Junction::Const(tail) => {
                word.push(ext_relation());
                extended(db, tail)
            }
            Junction::Var => db.clone(),
        };
        if !fixed_head_certain(&instance, &word, head) {
            return Ok(false);
        }
        start = end;
    }
    Ok(true)
}

fn extended(db: &Instance, c: &Constant) -> Instance {
    let mut out = db.clone();
    out.insert(Fact::new(ext_relation(), c.clone(), ext_constant()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::certain_bruteforce;

    fn g(s: &str) -> GeneralizedPathQuery {
        s.parse().unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn c(s: &str) -> EndMarker {
        EndMarker::Const(Constant::from(s))
    }

    #[test]
    fn parsing() {
        let q = g("_ R _ S :0 T :1 R _");
        assert_eq!(q.to_string(), "_ R _ S :0 T :1 R _");
        assert_eq!(q.to_bcq().to_string(), "R(x1,x2),S(x2,\"0\"),T(\"0\",\"1\"),R(\"1\",x5)");
        assert_eq!(g("RXRY"), GeneralizedPathQuery::from_word(&w("RXRY")));
        assert_eq!(GeneralizedPathQuery::parse("_ R :0 S :0").unwrap_err().offset, 0);
        assert_eq!(GeneralizedPathQuery::parse("_ R _ 5").unwrap_err().offset, 6);
        assert!(GeneralizedPathQuery::parse("_ R").is_err());
        assert!(GeneralizedPathQuery::parse("_").is_err());
    }

    #[test]
    fn prefixes_and_extensions() {
        let q = g("_ R _ S :0 T :1 R _");
        assert_eq!(characteristic_prefix(&q), g("_ R _ S :0"));
        assert_eq!(extend(&q).to_string(), "R-S-__ext_N");
        assert_eq!(characteristic_prefix(&g("RXRY")), g("RXRY"));
        assert_eq!(extend(&g("RXRY")), w("RXRY"));
        let head = characteristic_prefix(&g(":0 T :1 R _"));
        assert!(head.is_empty());
        assert_eq!(characteristic_word(&g(":0 T :1 R _")), (Word::empty(), c("0")));
        assert_eq!(extend(&g("_ R :0")).to_string(), "R-__ext_N");
    }

    #[test]
    fn homomorphisms() {
        let a = GeneralizedPathQuery::anchored(&w("RR"), &c("1"));
        let b = GeneralizedPathQuery::anchored(&w("RRR"), &c("1"));
        assert!(homomorphism_exists(&a, &b, false));
        assert!(!homomorphism_exists(&a, &b, true));
        assert!(homomorphism_exists(&a, &a, true));
        let r = GeneralizedPathQuery::from_word(&w("R"));
        let sr = GeneralizedPathQuery::from_word(&w("SR"));
        assert!(homomorphism_exists(&r, &sr, false));
        assert!(!homomorphism_exists(&r, &sr, true));
    }

    #[test]
    fn classification() {
        for q in ["RR", "RXRY", "RXRYRY", "ARRX", "RXRXRYRY"] {
            assert_eq!(classify_generalized(&g(q)), classify(&w(q)).unwrap());
        }
        assert_eq!(classify_generalized(&g("_ R _ R :1 S _")).tier, Tier::NlComplete);
        assert_eq!(classify_generalized(&g("_ A _ R _ R _ X :1")).tier, Tier::ConpComplete);
        assert_eq!(classify_generalized(&g("_ R _ X :1")).tier, Tier::Fo);
    }

    #[test]
    fn solving() {
        let q = g("_ R _ S :0 T :1 R _");
        let db: Instance = "R(a,b)\nS(b,0)\nT(0,1)\nR(1,z)\n".parse().unwrap();
        assert!(solve_generalized(&db, &q, 1000).unwrap());
        let missing: Instance = "R(a,b)\nS(b,0)\nR(1,z)\n".parse().unwrap();
        assert!(!solve_generalized(&missing, &q, 1000).unwrap());
        let conflict: Instance = "R(a,b)\nS(b,0)\nS(b,2)\nT(0,1)\nR(1,z)\n".parse().unwrap();
        let truth = certain_bruteforce(&conflict, &q.to_bcq(), 1000).unwrap().certain;
        assert!(!truth);
        assert_eq!(solve_generalized(&conflict, &q, 1000).unwrap(), truth);
        let reserved: Instance = "R(a,__ext_d)\n".parse().unwrap();
        assert!(matches!(solve_generalized(&reserved, &q, 1000), Err(Error::ReservedName(_))));
    }
}
