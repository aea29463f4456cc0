//! Reference semantics by exhaustive enumeration.
//!
//! Everything here enumerates repairs and is exponential; it exists to
//! check the polynomial algorithms and to answer small instances.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::automata::AcceptTable;
use crate::error::{Error, ParseError, Result};
use crate::instance::{Constant, Fact, Indexed, Instance, NONE};
use crate::words::{RelName, Word};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(Constant),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "\"{c}\""),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub rel: RelName,
    pub key: Term,
    pub value: Term,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.rel, self.key, self.value)
    }
}

/// A Boolean conjunctive query over binary relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bcq {
    pub atoms: Vec<Atom>,
}

impl Bcq {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Bcq { atoms }
    }

    /// The path query `R1(x1,x2), ..., Rk(xk,xk+1)`.
    pub fn from_word(q: &Word) -> Self {
        let var = |i: usize| Term::Var(format!("x{}", i + 1));
        Bcq {
            atoms: q
                .symbols()
                .iter()
                .enumerate()
                .map(|(i, r)| Atom { rel: r.clone(), key: var(i), value: var(i + 1) })
                .collect(),
        }
    }

    /// The path query with its first variable replaced by `c`.
    pub fn fixed_head(q: &Word, c: &Constant) -> Self {
        let mut b = Bcq::from_word(q);
        if let Some(a) = b.atoms.first_mut() {
            a.key = Term::Const(c.clone());
        }
        b
    }

    /// Parses `R(x,y),S(y,"c")`: lowercase tokens are variables, quoted
    /// tokens are constants.
    pub fn parse(text: &str) -> std::result::Result<Bcq, ParseError> {
        let mut p = BcqParser { s: text, pos: 0 };
        let mut atoms = Vec::new();
        loop {
            p.skip_ws();
            atoms.push(p.atom()?);
            p.skip_ws();
            if p.pos == text.len() {
                break;
            }
            p.expect(',')?;
        }
        Ok(Bcq { atoms })
    }

    pub fn constants(&self) -> BTreeSet<Constant> {
        self.atoms
            .iter()
            .flat_map(|a| [&a.key, &a.value])
            .filter_map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect()
    }
}

impl fmt::Display for Bcq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for Bcq {
    type Err = ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Bcq::parse(s)
    }
}

struct BcqParser<'a> {
    s: &'a str,
    pos: usize,
}

impl BcqParser<'_> {
    fn skip_ws(&mut self) {
        while self.s[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.s[self.pos..].chars().next().unwrap().len_utf8();
        }
    }

    fn expect(&mut self, c: char) -> std::result::Result<(), ParseError> {
        self.skip_ws();
        if self.s[self.pos..].starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::new(self.pos, format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while self.s[self.pos..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        &self.s[start..self.pos]
    }

    fn atom(&mut self) -> std::result::Result<Atom, ParseError> {
        let start = self.pos;
        let name = self.ident().to_string();
        let rel = RelName::new(&name).map_err(|_| ParseError::new(start, "expected relation name"))?;
        self.expect('(')?;
        let key = self.term()?;
        self.expect(',')?;
        let value = self.term()?;
        self.expect(')')?;
        Ok(Atom { rel, key, value })
    }

    fn term(&mut self) -> std::result::Result<Term, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.s[self.pos..].starts_with('"') {
            self.pos += 1;
            let body_start = self.pos;
            let name = self.ident().to_string();
            if !self.s[self.pos..].starts_with('"') {
                return Err(ParseError::new(self.pos, "expected closing quote"));
            }
            self.pos += 1;
            let c = Constant::new(&name).map_err(|e| ParseError::new(body_start + e.offset, e.message))?;
            return Ok(Term::Const(c));
        }
        let name = self.ident().to_string();
        if name.starts_with(|c: char| c.is_ascii_lowercase()) {
            Ok(Term::Var(name))
        } else {
            Err(ParseError::new(start, "expected a lowercase variable or a quoted constant"))
        }
    }
}

/// Which facts of an indexed instance are visible to query evaluation.
#[derive(Clone, Copy)]
pub(crate) enum View<'a> {
    All,
    /// One fact id per block; `NONE` marks a block left out.
    Choice(&'a [u32]),
}

impl View<'_> {
    fn facts_in_block<'b>(&'b self, idx: &'b Indexed, b: u32) -> impl Iterator<Item = u32> + 'b {
        let (all, one): (&[u32], Option<u32>) = match self {
            View::All => (&idx.blocks[b as usize], None),
            View::Choice(ch) => (&[], Some(ch[b as usize]).filter(|&f| f != NONE)),
        };
        all.iter().copied().chain(one)
    }
}

#[derive(Clone, Copy)]
enum T {
    Var(usize),
    Const(u32),
}

/// A query compiled against an indexed instance.
pub(crate) struct Compiled {
    atoms: Vec<(u32, T, T)>,
    nvars: usize,
    /// Some atom mentions a relation or constant absent from the instance.
    impossible: bool,
}

impl Compiled {
    pub fn new(idx: &Indexed, q: &Bcq) -> Self {
        let mut vars: Vec<String> = Vec::new();
        let mut impossible = false;
        let mut term = |t: &Term, impossible: &mut bool| match t {
            Term::Var(v) => {
                let i = vars.iter().position(|x| x == v).unwrap_or_else(|| {
                    vars.push(v.clone());
                    vars.len() - 1
                });
                T::Var(i)
            }
            Term::Const(c) => match idx.const_ids.get(c) {
                Some(&id) => T::Const(id),
                None => {
                    *impossible = true;
                    T::Const(NONE)
                }
            },
        };
        let mut atoms = Vec::new();
        for a in &q.atoms {
            let k = term(&a.key, &mut impossible);
            let v = term(&a.value, &mut impossible);
            match idx.rel_ids.get(&a.rel) {
                Some(&r) => atoms.push((r, k, v)),
                None => impossible = true,
            }
        }
        let nvars = vars.len();
        Compiled { atoms, nvars, impossible }
    }

    pub fn satisfied(&self, idx: &Indexed, view: View<'_>) -> bool {
        if self.impossible {
            return false;
        }
        let mut env = vec![NONE; self.nvars];
        let mut done = vec![false; self.atoms.len()];
        self.search(idx, view, &mut env, &mut done, self.atoms.len())
    }

    fn search(&self, idx: &Indexed, view: View<'_>, env: &mut [u32], done: &mut [bool], left: usize) -> bool {
        if left == 0 {
            return true;
        }
        let val = |t: T, env: &[u32]| match t {
            T::Var(i) => env[i],
            T::Const(c) => c,
        };
        // Prefer an atom whose key is already bound.
        let pick =
            (0..self.atoms.len()).filter(|&i| !done[i]).max_by_key(|&i| val(self.atoms[i].1, env) != NONE).unwrap();
        let (r, kt, vt) = self.atoms[pick];
        let key = val(kt, env);
        let blocks: Vec<u32> =
            if key != NONE { idx.block(r, key).into_iter().collect() } else { idx.rel_blocks[r as usize].clone() };
        done[pick] = true;
        for b in blocks {
            for fi in view.facts_in_block(idx, b) {
                let (_, fk, fv) = idx.facts[fi as usize];
                let saved = env.to_vec();
                if bind(kt, fk, env) && bind(vt, fv, env) && self.search(idx, view, env, done, left - 1) {
                    done[pick] = false;
                    return true;
                }
                env.copy_from_slice(&saved);
            }
        }
        done[pick] = false;
        false
    }
}

fn bind(t: T, c: u32, env: &mut [u32]) -> bool {
    match t {
        T::Const(x) => x == c,
        T::Var(i) if env[i] == NONE => {
            env[i] = c;
            true
        }
        T::Var(i) => env[i] == c,
    }
}

/// Is there a valuation mapping every atom of `q` into `r`?
pub fn satisfies_bcq(r: &Instance, q: &Bcq) -> bool {
    let idx = Indexed::new(r);
    Compiled::new(&idx, q).satisfied(&idx, View::All)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertainOutcome {
    pub certain: bool,
    pub repairs_checked: u64,
    /// A repair that falsifies the query, when there is one.
    pub counterexample: Option<Instance>,
}

/// Certain answer by enumerating repairs, stopping at the first one that
/// falsifies `q`.
pub fn certain_bruteforce(db: &Instance, q: &Bcq, cap: u64) -> Result<CertainOutcome> {
    let idx = Indexed::new(db);
    let compiled = Compiled::new(&idx, q);
    let mut choices = idx.choices(cap)?;
    let mut checked = 0;
    while let Some(ch) = choices.next_choice() {
        checked += 1;
        if !compiled.satisfied(&idx, View::Choice(ch)) {
            return Ok(CertainOutcome {
                certain: false,
                repairs_checked: checked,
                counterexample: Some(idx.repair_instance(ch)),
            });
        }
    }
    Ok(CertainOutcome { certain: true, repairs_checked: checked, counterexample: None })
}

/// States added by `f`: prefixes `uR` such that the automaton started in
/// `u` accepts a path of `r` beginning with `f`.
pub fn states_set(f: &Fact, r: &Instance, q: &Word) -> Result<BTreeSet<Word>> {
    if !r.is_consistent() {
        return Err(Error::Inconsistent);
    }
    if !r.contains(f) {
        return Err(Error::Precondition(format!("{f} is not in the instance")));
    }
    let idx = Indexed::new(r);
    let choice: Vec<u32> = (0..idx.facts.len() as u32).collect();
    let word = idx.word_ids_lenient(q.symbols());
    let table = AcceptTable::compute(&idx, &choice, &word);
    let fi = idx.fact_id(f).unwrap();
    Ok(fact_states(&idx, &table, &word, fi).into_iter().map(|s| q.prefix(s)).collect())
}

fn fact_states(idx: &Indexed, table: &AcceptTable, word: &[u32], fi: u32) -> Vec<usize> {
    let (r, _, v) = idx.facts[fi as usize];
    (0..word.len()).filter(|&i| word[i] == r && table.get(v, i + 1)).map(|i| i + 1).collect()
}

/// For every fact of `db`, the intersection of its states sets over the
/// repairs that contain it. Indexed by fact id of [`Indexed::new`].
pub(crate) fn all_min_states(idx: &Indexed, q: &Word, cap: u64) -> Result<Vec<BTreeSet<usize>>> {
    let word = idx.word_ids_lenient(q.symbols());
    let mut cs: Vec<Option<BTreeSet<usize>>> = vec![None; idx.facts.len()];
    let mut choices = idx.choices(cap)?;
    while let Some(ch) = choices.next_choice() {
        let table = AcceptTable::compute(idx, ch, &word);
        for &fi in ch {
            let ss: BTreeSet<usize> = fact_states(idx, &table, &word, fi).into_iter().collect();
            let slot = &mut cs[fi as usize];
            *slot = Some(match slot.take() {
                None => ss,
                Some(prev) => prev.intersection(&ss).copied().collect(),
            });
        }
    }
    Ok(cs.into_iter().map(|s| s.unwrap_or_default()).collect())
}

/// Intersection of the states sets of `f` over all repairs of `db`
/// containing `f`.
pub fn min_states_set(f: &Fact, db: &Instance, q: &Word, cap: u64) -> Result<BTreeSet<Word>> {
    let idx = Indexed::new(db);
    let fi = idx.fact_id(f).ok_or_else(|| Error::Precondition(format!("{f} is not in the instance")))?;
    let word = idx.word_ids_lenient(q.symbols());
    let mut acc: Option<BTreeSet<usize>> = None;
    let mut choices = idx.choices_pinned(&[fi], cap)?;
    while let Some(ch) = choices.next_choice() {
        let table = AcceptTable::compute(&idx, ch, &word);
        let ss: BTreeSet<usize> = fact_states(&idx, &table, &word, fi).into_iter().collect();
        acc = Some(match acc {
            None => ss,
            Some(prev) => prev.intersection(&ss).copied().collect(),
        });
    }
    Ok(acc.unwrap_or_default().into_iter().map(|s| q.prefix(s)).collect())
}

/// Picks in every block a fact whose minimal states set equals the
/// intersection over the block, taking the first such fact in sort order.
pub fn build_minimal_repair(db: &Instance, q: &Word, cap: u64) -> Result<Instance> {
    let idx = Indexed::new(db);
    let cs = all_min_states(&idx, q, cap)?;
    let mut out = Instance::new();
    for block in &idx.blocks {
        let meet = block
            .iter()
            .map(|&f| cs[f as usize].clone())
            .reduce(|a, b| a.intersection(&b).copied().collect())
            .unwrap_or_default();
        let Some(&chosen) = block.iter().find(|&&f| cs[f as usize] == meet) else {
            return Err(Error::Precondition(format!(
                "no fact of the block of {} attains the intersection",
                idx.fact(block[0])
            )));
        };
        out.insert(idx.fact(chosen));
    }
    Ok(out)
}

/// Start set of `q` in every repair, paired with the repair.
pub fn start_sets(db: &Instance, q: &Word, cap: u64) -> Result<Vec<(Instance, BTreeSet<Constant>)>> {
    let idx = Indexed::new(db);
    let word = idx.word_ids_lenient(q.symbols());
    let mut out = Vec::new();
    let mut choices = idx.choices(cap)?;
    while let Some(ch) = choices.next_choice() {
        let table = AcceptTable::compute(&idx, ch, &word);
        let start =
            (0..idx.n_consts() as u32).filter(|&c| table.get(c, 0)).map(|c| idx.consts[c as usize].clone()).collect();
        out.push((idx.repair_instance(ch), start));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::DEFAULT_MAX_REPAIRS as CAP;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn all_pairs() -> Instance {
        "R(a,a)\nR(a,b)\nR(b,a)\nR(b,b)\nS(a,a)\nS(a,b)\nS(b,a)\nS(b,b)\n".parse().unwrap()
    }

    fn branching() -> Instance {
        "R(0,1)\nR(1,2)\nR(1,3)\nR(2,3)\nX(3,4)\n".parse().unwrap()
    }

    #[test]
    fn parse_bcq() {
        let q = Bcq::parse("R(x,y), S(y,\"0\")").unwrap();
        assert_eq!(q.atoms.len(), 2);
        assert_eq!(q.to_string(), "R(x,y),S(y,\"0\")");
        assert_eq!(Bcq::parse("R(x,Y)").unwrap_err().offset, 4);
        assert!(Bcq::parse("R(x,y) S(y,z)").is_err());
    }

    #[test]
    fn all_pairs_queries() {
        let q1 = Bcq::parse("R(x,y),R(y,x)").unwrap();
        let q2 = Bcq::parse("R(x,y),S(y,x)").unwrap();
        assert!(certain_bruteforce(&all_pairs(), &q1, CAP).unwrap().certain);
        let out = certain_bruteforce(&all_pairs(), &q2, CAP).unwrap();
        assert!(!out.certain);
        assert!(!satisfies_bcq(&out.counterexample.unwrap(), &q2));
    }

    #[test]
    fn conflicting_block() {
        let db: Instance = "R(a,b)\nR(a,c)\n".parse().unwrap();
        assert!(!certain_bruteforce(&db, &Bcq::from_word(&w("RR")), CAP).unwrap().certain);
    }

    #[test]
    fn states_sets() {
        let r: Instance = "R(a,b)\nR(b,c)\nR(c,d)\nX(d,e)\nR(d,e)\n".parse().unwrap();
        let q = w("RRX");
        let got = states_set(&Fact::lit("R", "b", "c"), &r, &q).unwrap();
        assert_eq!(got, [w("R"), w("RR")].into_iter().collect());
        assert!(states_set(&Fact::lit("R", "d", "e"), &r, &q).unwrap().is_empty());
        let single = states_set(&Fact::lit("R", "a", "b"), &r, &w("R")).unwrap();
        assert_eq!(single, [w("R")].into_iter().collect());
    }

    #[test]
    fn minimal_states_and_repair() {
        let db = branching();
        let q = w("RRX");
        assert_eq!(
            min_states_set(&Fact::lit("R", "1", "2"), &db, &q, CAP).unwrap(),
            [w("R"), w("RR")].into_iter().collect()
        );
        assert_eq!(
            min_states_set(&Fact::lit("R", "0", "1"), &db, &q, CAP).unwrap(),
            [w("R"), w("RR")].into_iter().collect()
        );
        let r = build_minimal_repair(&db, &q, CAP).unwrap();
        assert!(r.contains(&Fact::lit("R", "1", "3")));
        assert!(r.is_consistent());
    }
}
