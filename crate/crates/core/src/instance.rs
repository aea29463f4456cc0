//! Database instances over binary relations whose first attribute is the
//! primary key, and their repairs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, ParseError, Result};
use crate::words::{identifier_error, RelName};

/// Default cap on the number of repairs an enumeration may visit.
pub const DEFAULT_MAX_REPAIRS: u64 = 1 << 20;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constant(Arc<str>);

impl Constant {
    /// Constants use the characters `[A-Za-z0-9_]`, so plain numbers such as
    /// `0` are valid.
    pub fn new(name: &str) -> std::result::Result<Self, ParseError> {
        match name.char_indices().find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '_')) {
            _ if name.is_empty() => Err(ParseError::new(0, "empty constant")),
            Some((i, _)) => Err(ParseError::new(i, format!("invalid constant {name:?}"))),
            None => Ok(Constant(Arc::from(name))),
        }
    }

    pub(crate) fn new_unchecked(name: &str) -> Self {
        Constant(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Names starting with two underscores are reserved for generated
    /// constants.
    pub fn is_reserved(&self) -> bool {
        self.0.starts_with("__")
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Constant {
    /// Panics on invalid syntax; meant for literals in code and tests.
    fn from(s: &str) -> Self {
        Constant::new(s).expect("valid constant literal")
    }
}

/// A fact `rel(key, value)`. Facts order by relation, then key, then value.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub rel: RelName,
    pub key: Constant,
    pub value: Constant,
}

impl Fact {
    pub fn new(rel: RelName, key: Constant, value: Constant) -> Self {
        Fact { rel, key, value }
    }

    /// Shorthand for literals, e.g. `Fact::lit("R", "a", "b")`.
    pub fn lit(rel: &str, key: &str, value: &str) -> Self {
        Fact {
            rel: RelName::new(rel).expect("valid relation literal"),
            key: Constant::from(key),
            value: Constant::from(value),
        }
    }

    pub fn key_equal(&self, other: &Fact) -> bool {
        self.rel == other.rel && self.key == other.key
    }

    pub fn parse(text: &str) -> std::result::Result<Fact, ParseError> {
        parse_fact(text, 0)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.rel, self.key, self.value)
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn parse_fact(line: &str, base: usize) -> std::result::Result<Fact, ParseError> {
    let err = |i: usize, m: &str| ParseError::new(base + i, m.to_string());
    let open = line.find('(').ok_or_else(|| err(line.len(), "expected '('"))?;
    let rel_txt = line[..open].trim();
    let rel_start = line[..open].find(|c: char| !c.is_whitespace()).unwrap_or(open);
    if let Some(i) = identifier_error(rel_txt, true) {
        return Err(err(rel_start + i, "invalid relation name"));
    }
    let close = line.rfind(')').ok_or_else(|| err(line.len(), "expected ')'"))?;
    if close < open {
        return Err(err(close, "unexpected ')'"));
    }
    if let Some(i) = line[close + 1..].find(|c: char| !c.is_whitespace()) {
        return Err(err(close + 1 + i, "trailing characters after fact"));
    }
    let inner = &line[open + 1..close];
    let comma = inner.find(',').ok_or_else(|| err(close, "expected ','"))?;
    let mut terms = Vec::new();
    for (start, txt) in [(open + 1, &inner[..comma]), (open + 2 + comma, &inner[comma + 1..])] {
        let lead = txt.len() - txt.trim_start().len();
        let t = txt.trim();
        if t.is_empty() {
            return Err(err(start + lead, "missing constant"));
        }
        let c = Constant::new(t).map_err(|e| err(start + lead + e.offset, "invalid constant"))?;
        terms.push(c);
    }
    let value = terms.pop().unwrap();
    let key = terms.pop().unwrap();
    Ok(Fact { rel: RelName::new_unchecked(rel_txt), key, value })
}

/// A block: the maximal set of key-equal facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub rel: RelName,
    pub key: Constant,
    pub facts: Vec<Fact>,
}

/// A finite set of facts.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Instance {
    facts: BTreeSet<Fact>,
}

impl Instance {
    pub fn new() -> Self {
        Instance::default()
    }

    pub fn from_facts<I: IntoIterator<Item = Fact>>(facts: I) -> Self {
        Instance { facts: facts.into_iter().collect() }
    }

    pub fn insert(&mut self, f: Fact) -> bool {
        self.facts.insert(f)
    }

    pub fn extend<I: IntoIterator<Item = Fact>>(&mut self, facts: I) {
        self.facts.extend(facts);
    }

    pub fn contains(&self, f: &Fact) -> bool {
        self.facts.contains(f)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Facts in sorted order.
    pub fn facts(&self) -> impl Iterator<Item = &Fact> + '_ {
        self.facts.iter()
    }

    pub fn active_domain(&self) -> BTreeSet<Constant> {
        self.facts.iter().flat_map(|f| [f.key.clone(), f.value.clone()]).collect()
    }

    pub fn relations(&self) -> BTreeSet<RelName> {
        self.facts.iter().map(|f| f.rel.clone()).collect()
    }

    /// Blocks sorted by `(relation, key)`, facts inside a block sorted.
    pub fn blocks(&self) -> Vec<Block> {
        let mut map: BTreeMap<(RelName, Constant), Vec<Fact>> = BTreeMap::new();
        for f in &self.facts {
            map.entry((f.rel.clone(), f.key.clone())).or_default().push(f.clone());
        }
        map.into_iter().map(|((rel, key), facts)| Block { rel, key, facts }).collect()
    }

    /// The block containing facts `rel(key, *)`, possibly empty.
    pub fn block_of(&self, rel: &RelName, key: &Constant) -> Vec<&Fact> {
        self.facts.iter().filter(|f| &f.rel == rel && &f.key == key).collect()
    }

    /// Consistent means no two distinct key-equal facts.
    pub fn is_consistent(&self) -> bool {
        let mut prev: Option<&Fact> = None;
        for f in &self.facts {
            if let Some(p) = prev {
                if p.key_equal(f) {
                    return false;
                }
            }
            prev = Some(f);
        }
        true
    }

    /// Number of repairs, saturating at `u128::MAX`.
    pub fn repair_count(&self) -> u128 {
        self.blocks().iter().fold(1u128, |acc, b| acc.saturating_mul(b.facts.len() as u128))
    }

    /// Enumerates all repairs, refusing when there are more than `cap`.
    pub fn repairs(&self, cap: u64) -> Result<Repairs> {
        let needed = self.repair_count();
        if needed > cap as u128 {
            return Err(Error::RepairCap { needed, cap });
        }
        Ok(Repairs::new(self.blocks()))
    }

    pub fn parse(text: &str) -> std::result::Result<Instance, ParseError> {
        let mut facts = BTreeSet::new();
        let mut base = 0;
        for (lineno, raw) in text.split_inclusive('\n').enumerate() {
            let line = raw.trim_end_matches(['\n', '\r']);
            let t = line.trim_start();
            if !(t.is_empty() || t.starts_with('#')) {
                let f = parse_fact(line, base).map_err(|e| ParseError { line: Some(lineno + 1), ..e })?;
                facts.insert(f);
            }
            base += raw.chars().count();
        }
        Ok(Instance { facts })
    }

    /// One fact per line in sorted order; the inverse of [`Instance::parse`].
    pub fn serialize(&self) -> String {
        self.facts.iter().map(|f| format!("{f}\n")).collect()
    }

    pub fn union(&self, other: &Instance) -> Instance {
        Instance { facts: self.facts.union(&other.facts).cloned().collect() }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.facts.iter()).finish()
    }
}

impl FromStr for Instance {
    type Err = ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Instance::parse(s)
    }
}

impl FromIterator<Fact> for Instance {
    fn from_iter<I: IntoIterator<Item = Fact>>(iter: I) -> Self {
        Instance::from_facts(iter)
    }
}

/// Mixed-radix enumeration of repairs over the sorted blocks; the last block
/// varies fastest.
pub struct Repairs {
    blocks: Vec<Block>,
    digits: Vec<usize>,
    done: bool,
}

impl Repairs {
    fn new(blocks: Vec<Block>) -> Self {
        let digits = vec![0; blocks.len()];
        Repairs { blocks, digits, done: false }
    }
}

impl Iterator for Repairs {
    type Item = Instance;

    fn next(&mut self) -> Option<Instance> {
        if self.done {
            return None;
        }
        let repair =
            Instance { facts: self.blocks.iter().zip(&self.digits).map(|(b, &d)| b.facts[d].clone()).collect() };
        self.done = true;
        for i in (0..self.blocks.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.blocks[i].facts.len() {
                self.done = false;
                break;
            }
            self.digits[i] = 0;
        }
        Some(repair)
    }
}

pub(crate) const NONE: u32 = u32::MAX;

/// Integer-indexed copy of an instance used by the evaluation routines.
/// Constants, relations and facts are numbered in sorted order; blocks are
/// numbered in `(relation, key)` order.
#[derive(Debug, Clone)]
pub(crate) struct Indexed {
    pub consts: Vec<Constant>,
    pub const_ids: HashMap<Constant, u32>,
    pub rels: Vec<RelName>,
    pub rel_ids: HashMap<RelName, u32>,
    /// `(rel, key, value)` per fact.
    pub facts: Vec<(u32, u32, u32)>,
    pub blocks: Vec<Vec<u32>>,
    pub block_of_fact: Vec<u32>,
    /// Block index per `rel * consts + key`, or `NONE`.
    pub block_at: Vec<u32>,
    /// Block indices per relation.
    pub rel_blocks: Vec<Vec<u32>>,
    /// Fact indices per `rel * consts + value`.
    pub incoming: Vec<Vec<u32>>,
}

impl Indexed {
    pub fn new(db: &Instance) -> Self {
        Self::with_extra(db, std::iter::empty())
    }

    /// Also interns `extra` constants that may not occur in `db`.
    pub fn with_extra<'a>(db: &Instance, extra: impl IntoIterator<Item = &'a Constant>) -> Self {
        let mut cset = db.active_domain();
        cset.extend(extra.into_iter().cloned());
        let consts: Vec<Constant> = cset.into_iter().collect();
        let const_ids: HashMap<Constant, u32> = consts.iter().enumerate().map(|(i, c)| (c.clone(), i as u32)).collect();
        let rels: Vec<RelName> = db.relations().into_iter().collect();
        let rel_ids: HashMap<RelName, u32> = rels.iter().enumerate().map(|(i, r)| (r.clone(), i as u32)).collect();
        let m = consts.len();
        let mut facts = Vec::with_capacity(db.len());
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        let mut block_of_fact = Vec::with_capacity(db.len());
        let mut block_at = vec![NONE; rels.len() * m];
        let mut rel_blocks = vec![Vec::new(); rels.len()];
        let mut incoming = vec![Vec::new(); rels.len() * m];
        for (fi, f) in db.facts().enumerate() {
            let r = rel_ids[&f.rel];
            let k = const_ids[&f.key];
            let v = const_ids[&f.value];
            facts.push((r, k, v));
            let slot = r as usize * m + k as usize;
            if block_at[slot] == NONE {
                block_at[slot] = blocks.len() as u32;
                rel_blocks[r as usize].push(blocks.len() as u32);
                blocks.push(Vec::new());
            }
            let b = block_at[slot];
            blocks[b as usize].push(fi as u32);
            block_of_fact.push(b);
            incoming[r as usize * m + v as usize].push(fi as u32);
        }
        Indexed { consts, const_ids, rels, rel_ids, facts, blocks, block_of_fact, block_at, rel_blocks, incoming }
    }

    pub fn n_consts(&self) -> usize {
        self.consts.len()
    }

    pub fn block(&self, rel: u32, key: u32) -> Option<u32> {
        let b = self.block_at[rel as usize * self.consts.len() + key as usize];
        (b != NONE).then_some(b)
    }

    pub fn fact(&self, i: u32) -> Fact {
        let (r, k, v) = self.facts[i as usize];
        Fact {
            rel: self.rels[r as usize].clone(),
            key: self.consts[k as usize].clone(),
            value: self.consts[v as usize].clone(),
        }
    }

    pub fn fact_id(&self, f: &Fact) -> Option<u32> {
        let r = *self.rel_ids.get(&f.rel)?;
        let k = *self.const_ids.get(&f.key)?;
        let v = *self.const_ids.get(&f.value)?;
        let b = self.block(r, k)?;
        self.blocks[b as usize].iter().copied().find(|&fi| self.facts[fi as usize].2 == v)
    }

    /// Maps a word to relation ids; `None` if some relation is absent.
    pub fn word_ids(&self, symbols: &[RelName]) -> Option<Vec<u32>> {
        symbols.iter().map(|r| self.rel_ids.get(r).copied()).collect()
    }

    /// Maps a word to relation ids. Relations absent from the instance get
    /// distinct ids at or above `rels.len()`.
    pub fn word_ids_lenient(&self, symbols: &[RelName]) -> Vec<u32> {
        let mut absent: Vec<&RelName> = Vec::new();
        symbols
            .iter()
            .map(|r| match self.rel_ids.get(r) {
                Some(&id) => id,
                None => {
                    let pos = absent.iter().position(|a| *a == r).unwrap_or_else(|| {
                        absent.push(r);
                        absent.len() - 1
                    });
                    (self.rels.len() + pos) as u32
                }
            })
            .collect()
    }

    /// Builds the instance made of the chosen fact per block.
    pub fn repair_instance(&self, choice: &[u32]) -> Instance {
        Instance::from_facts(choice.iter().map(|&fi| self.fact(fi)))
    }

    pub fn repair_count(&self) -> u128 {
        self.blocks.iter().fold(1u128, |a, b| a.saturating_mul(b.len() as u128))
    }

    /// Checks the cap and returns an odometer over fact choices.
    pub fn choices(&self, cap: u64) -> Result<Choices<'_>> {
        let needed = self.repair_count();
        if needed > cap as u128 {
            return Err(Error::RepairCap { needed, cap });
        }
        Ok(Choices::new(self, Vec::new()))
    }

    /// Like [`Indexed::choices`] but with some blocks pinned to one fact.
    pub fn choices_pinned(&self, pinned: &[u32], cap: u64) -> Result<Choices<'_>> {
        let mut needed = 1u128;
        for (bi, b) in self.blocks.iter().enumerate() {
            if !pinned.iter().any(|&f| self.block_of_fact[f as usize] as usize == bi) {
                needed = needed.saturating_mul(b.len() as u128);
            }
        }
        if needed > cap as u128 {
            return Err(Error::RepairCap { needed, cap });
        }
        Ok(Choices::new(self, pinned.to_vec()))
    }
}

/// Odometer over one fact per block. `current` yields fact ids indexed by
/// block.
pub(crate) struct Choices<'a> {
    idx: &'a Indexed,
    digits: Vec<usize>,
    fixed: Vec<bool>,
    current: Vec<u32>,
    started: bool,
    done: bool,
}

impl<'a> Choices<'a> {
    fn new(idx: &'a Indexed, pinned: Vec<u32>) -> Self {
        let nb = idx.blocks.len();
        let mut digits = vec![0; nb];
        let mut fixed = vec![false; nb];
        for f in pinned {
            let b = idx.block_of_fact[f as usize] as usize;
            fixed[b] = true;
            digits[b] = idx.blocks[b].iter().position(|&x| x == f).unwrap();
        }
        let current = (0..nb).map(|b| idx.blocks[b][digits[b]]).collect();
        Choices { idx, digits, fixed, current, started: false, done: false }
    }

    /// Advances to the next repair; returns the fact choice or `None`.
    pub fn next_choice(&mut self) -> Option<&[u32]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        for b in (0..self.digits.len()).rev() {
            if self.fixed[b] {
                continue;
            }
            self.digits[b] += 1;
            if self.digits[b] < self.idx.blocks[b].len() {
                self.current[b] = self.idx.blocks[b][self.digits[b]];
                return Some(&self.current);
            }
            self.digits[b] = 0;
            self.current[b] = self.idx.blocks[b][0];
        }
        self.done = true;
        None
    }
}

/// Successor table of a consistent set of facts: `succ[rel * m + key]`.
pub(crate) struct Succ {
    pub m: usize,
    pub succ: Vec<u32>,
}

impl Succ {
    pub fn from_choice(idx: &Indexed, choice: &[u32]) -> Self {
        let m = idx.n_consts();
        let mut succ = vec![NONE; idx.rels.len() * m];
        for &fi in choice {
            let (r, k, v) = idx.facts[fi as usize];
            succ[r as usize * m + k as usize] = v;
        }
        Succ { m, succ }
    }

    #[inline]
    pub fn get(&self, rel: u32, key: u32) -> Option<u32> {
        let v = self.succ[rel as usize * self.m + key as usize];
        (v != NONE).then_some(v)
    }
}
