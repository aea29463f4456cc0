//! Instance generators from reachability, SAT and monotone circuit value.
//!
//! Each generator turns an input of the source problem and a query `q`
//! from the matching class into an instance whose certain answer encodes
//! the source answer:
//!
//! * reachability: `s` reaches `t` iff the instance is a "no" instance of
//!   a query violating the first condition;
//! * SAT: the formula is satisfiable iff the instance is a "no" instance
//!   of a query violating the factor condition;
//! * MCVP: the circuit outputs 1 iff the instance is a "yes" instance of a
//!   query satisfying the factor condition but not the second one.
//!
//! Instances are unions of gadgets, canonical paths whose interior
//! constants are fresh names `__g<n>`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};
use crate::instance::{Constant, Fact, Instance};
use crate::words::{consecutive_triples, satisfies_c3, RelName, Word};

/// Source of fresh constants `__g<seed>`, `__g<seed+1>`, ...
#[derive(Debug, Clone)]
pub struct FreshNames {
    next: u64,
}

impl FreshNames {
    pub fn new(seed: u64) -> Self {
        FreshNames { next: seed }
    }

    pub fn fresh(&mut self) -> Constant {
        let c = Constant::new_unchecked(&format!("__g{}", self.next));
        self.next += 1;
        c
    }
}

/// The path with trace `q` from `a` to `b`; a missing endpoint and every
/// interior node is a fresh constant. An empty `q` yields no facts and
/// needs `a = b` when both are given.
pub fn gadget(names: &mut FreshNames, q: &Word, a: Option<&Constant>, b: Option<&Constant>) -> Result<Vec<Fact>> {
    if q.is_empty() {
        return match (a, b) {
            (None, None) => Err(Error::Precondition("gadget of the empty word needs an endpoint".into())),
            (Some(x), Some(y)) if x != y => {
                Err(Error::Precondition(format!("empty gadget cannot join distinct constants {x} and {y}")))
            }
            _ => Ok(Vec::new()),
        };
    }
    let n = q.len();
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(a.cloned().unwrap_or_else(|| names.fresh()));
    for _ in 1..n {
        nodes.push(names.fresh());
    }
    nodes.push(b.cloned().unwrap_or_else(|| names.fresh()));
    Ok(q.symbols()
        .iter()
        .enumerate()
        .map(|(i, r)| Fact::new(r.clone(), nodes[i].clone(), nodes[i + 1].clone()))
        .collect())
}

/// A factorization `q = u R v R w` at two occurrences `i < j` of `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub u: Word,
    pub r: RelName,
    pub v: Word,
    pub w: Word,
}

impl Split {
    fn at(q: &Word, i: usize, j: usize) -> Self {
        Split { u: q.prefix(i), r: q.symbols()[i].clone(), v: q.slice(i + 1, j), w: q.suffix_from(j + 1) }
    }

    /// `R v`.
    pub fn rv(&self) -> Word {
        Word::new(vec![self.r.clone()]).concat(&self.v)
    }

    /// `R w`.
    pub fn rw(&self) -> Word {
        Word::new(vec![self.r.clone()]).concat(&self.w)
    }
}

/// First split (in order of `(i, j)`) where `q` is not a prefix of its
/// rewinding.
pub fn prefix_violation(q: &Word) -> Option<Split> {
    q.repeated_pairs().find(|&(i, j)| !q.is_prefix_of(&q.rewind_at(i, j))).map(|(i, j)| Split::at(q, i, j))
}

/// First split where `q` is not a factor of its rewinding.
pub fn factor_violation(q: &Word) -> Option<Split> {
    q.repeated_pairs().find(|&(i, j)| !q.is_factor_of(&q.rewind_at(i, j))).map(|(i, j)| Split::at(q, i, j))
}

/// `q = u R v1 R v2 R w` at three consecutive occurrences of `R` with
/// `v1 ≠ v2` and `Rw` not a prefix of `Rv1`; `v` is the longest common
/// prefix of `v1` and `v2`, which continue with `v1p` and `v2p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSplit {
    pub u: Word,
    pub r: RelName,
    pub v1: Word,
    pub v2: Word,
    pub w: Word,
    pub v: Word,
    pub v1p: Word,
    pub v2p: Word,
}

pub fn triple_violation(q: &Word) -> Option<TripleSplit> {
    let mut triples: Vec<(usize, usize, usize)> = consecutive_triples(q).collect();
    triples.sort();
    triples.into_iter().find_map(|(i, j, k)| {
        let s = q.symbols();
        let (v1, v2, w) = (&s[i + 1..j], &s[j + 1..k], &s[k + 1..]);
        if v1 == v2 || v1.starts_with(w) {
            return None;
        }
        let l = v1.iter().zip(v2).take_while(|(a, b)| a == b).count();
        Some(TripleSplit {
            u: q.prefix(i),
            r: s[i].clone(),
            v1: Word::new(v1.to_vec()),
            v2: Word::new(v2.to_vec()),
            w: Word::new(w.to_vec()),
            v: Word::new(v1[..l].to_vec()),
            v1p: Word::new(v1[l..].to_vec()),
            v2p: Word::new(v2[l..].to_vec()),
        })
    })
}

fn reject_reserved<'a>(names: impl IntoIterator<Item = &'a Constant>) -> Result<()> {
    for c in names {
        if c.is_reserved() {
            return Err(Error::ReservedName(c.to_string()));
        }
    }
    Ok(())
}

fn add(db: &mut Instance, names: &mut FreshNames, q: &Word, a: Option<&Constant>, b: Option<&Constant>) -> Result<()> {
    db.extend(gadget(names, q, a, b)?);
    Ok(())
}

/// A directed graph with source and target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    pub vertices: BTreeSet<Constant>,
    pub edges: BTreeSet<(Constant, Constant)>,
    pub s: Constant,
    pub t: Constant,
}

impl Digraph {
    pub fn new(
        vertices: impl IntoIterator<Item = Constant>,
        edges: impl IntoIterator<Item = (Constant, Constant)>,
        s: Constant,
        t: Constant,
    ) -> Self {
        let edges: BTreeSet<_> = edges.into_iter().collect();
        let mut vertices: BTreeSet<_> = vertices.into_iter().collect();
        vertices.extend(edges.iter().flat_map(|(a, b)| [a.clone(), b.clone()]));
        vertices.insert(s.clone());
        vertices.insert(t.clone());
        Digraph { vertices, edges, s, t }
    }

    /// Header `s=<v> t=<v>` followed by one edge `a b` per line; `#`
    /// starts a comment.
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let mut st: Option<(Constant, Constant)> = None;
        let mut edges = Vec::new();
        let mut offset = 0;
        for (ln, raw) in text.split_inclusive('\n').enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = line.split_whitespace().collect();
            let at = |msg: String| ParseError::at_line(ln + 1, offset, msg);
            let konst = |tok: &str| Constant::new(tok).map_err(|e| at(e.message));
            if !toks.is_empty() {
                if st.is_none() {
                    let (Some(s), Some(t), 2) = (
                        toks.first().and_then(|x| x.strip_prefix("s=")),
                        toks.get(1).and_then(|x| x.strip_prefix("t=")),
                        toks.len(),
                    ) else {
                        return Err(at("expected header s=<vertex> t=<vertex>".into()));
                    };
                    st = Some((konst(s)?, konst(t)?));
                } else if toks.len() == 2 {
                    edges.push((konst(toks[0])?, konst(toks[1])?));
                } else {
                    return Err(at(format!("expected an edge `a b`, found {:?}", line.trim())));
                }
            }
            offset += raw.chars().count();
        }
        let (s, t) = st.ok_or_else(|| ParseError::new(offset, "missing header s=<vertex> t=<vertex>"))?;
        Ok(Digraph::new([], edges, s, t))
    }

    fn successors(&self) -> BTreeMap<&Constant, Vec<&Constant>> {
        let mut out: BTreeMap<&Constant, Vec<&Constant>> = BTreeMap::new();
        for (a, b) in &self.edges {
            out.entry(a).or_default().push(b);
        }
        out
    }

    pub fn is_acyclic(&self) -> bool {
        let succ = self.successors();
        let mut indeg: BTreeMap<&Constant, usize> = self.vertices.iter().map(|v| (v, 0)).collect();
        for (_, b) in &self.edges {
            *indeg.get_mut(b).unwrap() += 1;
        }
        let mut ready: Vec<&Constant> = indeg.iter().filter(|(_, &d)| d == 0).map(|(v, _)| *v).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for &y in succ.get(v).map(|x| x.as_slice()).unwrap_or(&[]) {
                let d = indeg.get_mut(y).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(y);
                }
            }
        }
        seen == self.vertices.len()
    }

    /// Is there a directed path (possibly empty) from `s` to `t`?
    pub fn reaches(&self) -> bool {
        let succ = self.successors();
        let mut seen = BTreeSet::from([&self.s]);
        let mut stack = vec![&self.s];
        while let Some(v) = stack.pop() {
            for &y in succ.get(v).map(|x| x.as_slice()).unwrap_or(&[]) {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen.contains(&self.t)
    }
}

impl fmt::Display for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "s={} t={}", self.s, self.t)?;
        for (a, b) in &self.edges {
            writeln!(f, "{a} {b}")?;
        }
        Ok(())
    }
}

impl FromStr for Digraph {
    type Err = ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        Digraph::parse(s)
    }
}

/// Builds an instance that has a repair falsifying `q` iff `g` has a path
/// from `s` to `t`. `q` must violate the prefix condition and `g` must be
/// acyclic.
pub fn reduce_reachability(g: &Digraph, q: &Word, seed: u64) -> Result<Instance> {
    let split =
        prefix_violation(q).ok_or_else(|| Error::Precondition(format!("{q} satisfies the prefix condition")))?;
    if !g.is_acyclic() {
        return Err(Error::Precondition("graph must be acyclic".into()));
    }
    reject_reserved(&g.vertices)?;
    let mut names = FreshNames::new(seed);
    let s1 = names.fresh();
    let t1 = names.fresh();
    let mut db = Instance::new();
    for x in g.vertices.iter().chain([&s1]) {
        if !split.u.is_empty() {
            add(&mut db, &mut names, &split.u, None, Some(x))?;
        }
    }
    let rv = split.rv();
    for (x, y) in g.edges.iter().chain([&(s1.clone(), g.s.clone()), &(g.t.clone(), t1.clone())]) {
        add(&mut db, &mut names, &rv, Some(x), Some(y))?;
    }
    let rw = split.rw();
    for x in &g.vertices {
        add(&mut db, &mut names, &rw, Some(x), None)?;
    }
    Ok(db)
}

/// A CNF formula over variables `1..=vars`; literals are non-zero
/// integers, negative for negated variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new(vars: usize, clauses: Vec<Vec<i32>>) -> std::result::Result<Self, ParseError> {
        for c in &clauses {
            if c.is_empty() {
                return Err(ParseError::new(0, "empty clause"));
            }
            if let Some(l) = c.iter().find(|l| **l == 0 || l.unsigned_abs() as usize > vars) {
                return Err(ParseError::new(0, format!("literal {l} out of range")));
            }
        }
        Ok(Cnf { vars, clauses })
    }

    /// DIMACS: comment lines start with `c`, the header is
    /// `p cnf <vars> <clauses>`, clauses end with `0`.
    pub fn parse_dimacs(text: &str) -> std::result::Result<Self, ParseError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        let mut offset = 0;
        for (ln, raw) in text.split_inclusive('\n').enumerate() {
            let line = raw.trim();
            let at = |msg: String| ParseError::at_line(ln + 1, offset, msg);
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            } else if line.starts_with('p') {
                let toks: Vec<&str> = line.split_whitespace().collect();
                match (toks.as_slice(), header) {
                    ([_, "cnf", v, c], None) => {
                        let v = v.parse().map_err(|_| at(format!("bad variable count {v:?}")))?;
                        let c = c.parse().map_err(|_| at(format!("bad clause count {c:?}")))?;
                        header = Some((v, c));
                    }
                    _ => return Err(at("expected a single header `p cnf <vars> <clauses>`".into())),
                }
            } else {
                let Some((vars, _)) = header else { return Err(at("clause before header".into())) };
                for tok in line.split_whitespace() {
                    let l: i32 = tok.parse().map_err(|_| at(format!("bad literal {tok:?}")))?;
                    if l == 0 {
                        if current.is_empty() {
                            return Err(at("empty clause".into()));
                        }
                        clauses.push(std::mem::take(&mut current));
                    } else if l.unsigned_abs() as usize > vars {
                        return Err(at(format!("literal {l} exceeds the declared {vars} variables")));
                    } else {
                        current.push(l);
                    }
                }
            }
            offset += raw.chars().count();
        }
        let (vars, count) = header.ok_or_else(|| ParseError::new(offset, "missing header"))?;
        if !current.is_empty() {
            clauses.push(current);
        }
        if clauses.len() != count {
            return Err(ParseError::new(offset, format!("header declares {count} clauses, found {}", clauses.len())));
        }
        Cnf::new(vars, clauses)
    }

    /// Tries all assignments.
    pub fn is_satisfiable(&self) -> bool {
        (0u64..1 << self.vars).any(|bits| {
            self.clauses.iter().all(|c| {
                c.iter().any(|&l| {
                    let val = bits >> (l.unsigned_abs() - 1) & 1 == 1;
                    val == (l > 0)
                })
            })
        })
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.vars, self.clauses.len())?;
        for c in &self.clauses {
            for l in c {
                write!(f, "{l} ")?;
            }
            writeln!(f, "0")?;
        }
        Ok(())
    }
}

fn var_const(i: u32) -> Constant {
    Constant::new_unchecked(&format!("x{i}"))
}

/// Builds an instance that has a repair falsifying `q` iff `f` is
/// satisfiable. `q` must violate the factor condition. Variable `i` is the
/// constant `x<i>`, clause `j` (from 1) the constant `C<j>`.
pub fn reduce_sat(f: &Cnf, q: &Word, seed: u64) -> Result<Instance> {
    let split =
        factor_violation(q).ok_or_else(|| Error::Precondition(format!("{q} satisfies the factor condition")))?;
    let mut names = FreshNames::new(seed);
    let mut db = Instance::new();
    let rw = split.rw();
    let rvrw = split.rv().concat(&rw);
    let urv = split.u.concat(&split.rv());
    for z in 1..=f.vars as u32 {
        add(&mut db, &mut names, &rw, Some(&var_const(z)), None)?;
        add(&mut db, &mut names, &rvrw, Some(&var_const(z)), None)?;
    }
    for (j, clause) in f.clauses.iter().enumerate() {
        let c = Constant::new_unchecked(&format!("C{}", j + 1));
        let lits: BTreeSet<i32> = clause.iter().copied().collect();
        for l in lits {
            let word = if l > 0 { &split.u } else { &urv };
            add(&mut db, &mut names, word, Some(&c), Some(&var_const(l.unsigned_abs())))?;
        }
    }
    Ok(db)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Input(bool),
    Gate(GateKind, Constant, Constant),
}

/// A monotone circuit in topological order with an assignment to its
/// inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneCircuit {
    pub nodes: Vec<(Constant, Node)>,
    pub output: Constant,
}

impl MonotoneCircuit {
    /// Checks names are unique, operands are defined earlier and the
    /// output exists.
    pub fn new(nodes: Vec<(Constant, Node)>, output: Constant) -> std::result::Result<Self, ParseError> {
        let mut seen = BTreeSet::new();
        for (name, node) in &nodes {
            if let Node::Gate(_, a, b) = node {
                for x in [a, b] {
                    if !seen.contains(x) {
                        return Err(ParseError::new(0, format!("operand {x} of {name} is not defined before it")));
                    }
                }
            }
            if !seen.insert(name.clone()) {
                return Err(ParseError::new(0, format!("node {name} defined twice")));
            }
        }
        if !seen.contains(&output) {
            return Err(ParseError::new(0, format!("output {output} is not a node")));
        }
        Ok(MonotoneCircuit { nodes, output })
    }

    /// One node per line: `<name> INPUT <0|1>`, `<name> AND <a> <b>`,
    /// `<name> OR <a> <b>`; the last line is `OUTPUT <name>`.
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let mut nodes = Vec::new();
        let mut output = None;
        let mut offset = 0;
        for (ln, raw) in text.split_inclusive('\n').enumerate() {
            let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
            let at = |msg: String| ParseError::at_line(ln + 1, offset, msg);
            let konst = |tok: &str| Constant::new(tok).map_err(|e| at(e.message));
            if !toks.is_empty() && output.is_some() {
                return Err(at("OUTPUT must be the last line".into()));
            }
            match toks.as_slice() {
                [] => {}
                ["OUTPUT", o] => output = Some(konst(o)?),
                [n, "INPUT", "0"] => nodes.push((konst(n)?, Node::Input(false))),
                [n, "INPUT", "1"] => nodes.push((konst(n)?, Node::Input(true))),
                [n, op @ ("AND" | "OR"), a, b] => {
                    let kind = if *op == "AND" { GateKind::And } else { GateKind::Or };
                    nodes.push((konst(n)?, Node::Gate(kind, konst(a)?, konst(b)?)));
                }
                _ => return Err(at(format!("cannot read node line {:?}", raw.trim()))),
            }
            offset += raw.chars().count();
        }
        let output = output.ok_or_else(|| ParseError::new(offset, "missing OUTPUT line"))?;
        MonotoneCircuit::new(nodes, output).map_err(|e| ParseError::new(offset, e.message))
    }

    pub fn values(&self) -> BTreeMap<Constant, bool> {
        let mut val = BTreeMap::new();
        for (name, node) in &self.nodes {
            let v = match node {
                Node::Input(b) => *b,
                Node::Gate(GateKind::And, a, b) => val[a] && val[b],
                Node::Gate(GateKind::Or, a, b) => val[a] || val[b],
            };
            val.insert(name.clone(), v);
        }
        val
    }

    pub fn evaluate(&self) -> bool {
        self.values()[&self.output]
    }
}

impl fmt::Display for MonotoneCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, node) in &self.nodes {
            match node {
                Node::Input(b) => writeln!(f, "{name} INPUT {}", u8::from(*b))?,
                Node::Gate(k, a, b) => {
                    writeln!(f, "{name} {} {a} {b}", if *k == GateKind::And { "AND" } else { "OR" })?
                }
            }
        }
        writeln!(f, "OUTPUT {}", self.output)
    }
}

impl FromStr for MonotoneCircuit {
    type Err = ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        MonotoneCircuit::parse(s)
    }
}

/// Builds an instance that is a "yes" instance for `q` iff the circuit
/// outputs 1. `q` must satisfy the factor condition but not the second
/// condition.
///
/// When `v1p` is empty the OR gadget's `c1` is the operand `g1` itself;
/// when `v2p` is empty, `c2` is `c1`. The first identification is not
/// sound: `g1` then carries a `v2p` edge, so a path `c2 -Rv1-> g2 -v2p->`
/// can spell `Rw` (see `empty_v1p_breaks_or_gates`). The equivalence only
/// holds when `v1p` is non-empty.
pub fn reduce_mcvp(c: &MonotoneCircuit, q: &Word, seed: u64) -> Result<Instance> {
    let t = triple_violation(q)
        .filter(|_| satisfies_c3(q).unwrap_or(false))
        .ok_or_else(|| Error::Precondition(format!("{q} must satisfy the factor condition and violate the second")))?;
    reject_reserved(c.nodes.iter().map(|(n, _)| n))?;
    let r = Word::new(vec![t.r.clone()]);
    let rv1 = r.concat(&t.v1);
    let rv = r.concat(&t.v);
    let rw = r.concat(&t.w);
    let rv2rw = r.concat(&t.v2).concat(&rw);
    let mut names = FreshNames::new(seed);
    let mut db = Instance::new();
    add(&mut db, &mut names, &t.u.concat(&rv1), None, Some(&c.output))?;
    for (name, node) in &c.nodes {
        match node {
            Node::Input(true) => add(&mut db, &mut names, &rv2rw, Some(name), None)?,
            Node::Input(false) => {}
            Node::Gate(kind, g1, g2) => {
                if !t.u.is_empty() {
                    add(&mut db, &mut names, &t.u, None, Some(name))?;
                }
                add(&mut db, &mut names, &rv2rw, Some(name), None)?;
                match kind {
                    GateKind::And => {
                        add(&mut db, &mut names, &rv1, Some(name), Some(g1))?;
                        add(&mut db, &mut names, &rv1, Some(name), Some(g2))?;
                    }
                    GateKind::Or => {
                        let c1 = if t.v1p.is_empty() { g1.clone() } else { names.fresh() };
                        let c2 = if t.v2p.is_empty() { c1.clone() } else { names.fresh() };
                        add(&mut db, &mut names, &rv, Some(name), Some(&c1))?;
                        add(&mut db, &mut names, &t.v1p, Some(&c1), Some(g1))?;
                        add(&mut db, &mut names, &t.v2p, Some(&c1), Some(&c2))?;
                        if !t.u.is_empty() {
                            add(&mut db, &mut names, &t.u, None, Some(&c2))?;
                        }
                        add(&mut db, &mut names, &rv1, Some(&c2), Some(g2))?;
                        add(&mut db, &mut names, &rw, Some(&c2), None)?;
                    }
                }
            }
        }
    }
    Ok(db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{certain_bruteforce, Bcq};

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn k(s: &str) -> Constant {
        Constant::from(s)
    }

    fn certain(db: &Instance, q: &Word) -> bool {
        certain_bruteforce(db, &Bcq::from_word(q), 1 << 22).unwrap().certain
    }

    #[test]
    fn gadgets() {
        let mut names = FreshNames::new(0);
        let g = gadget(&mut names, &w("RX"), Some(&k("1")), None).unwrap();
        assert_eq!(g, vec![Fact::lit("R", "1", "__g0"), Fact::lit("X", "__g0", "__g1")]);
        assert_eq!(gadget(&mut names, &w("R"), Some(&k("a")), Some(&k("b"))).unwrap(), vec![Fact::lit("R", "a", "b")]);
        let mut all = BTreeSet::new();
        for _ in 0..2 {
            for f in gadget(&mut names, &w("RR"), None, None).unwrap() {
                all.insert(f.key);
                all.insert(f.value);
            }
        }
        assert_eq!(all.len(), 6);
        assert!(gadget(&mut names, &Word::empty(), None, None).is_err());
        assert!(gadget(&mut names, &Word::empty(), Some(&k("a")), None).unwrap().is_empty());
    }

    #[test]
    fn reachability_example() {
        let g: Digraph = "s=s t=t\ns a\na t\n".parse().unwrap();
        let q = w("RXRY");
        let db = reduce_reachability(&g, &q, 0).unwrap();
        assert_eq!(db.len(), 14);
        assert!(g.reaches());
        assert!(!certain(&db, &q));
        let none = Digraph::new([k("s"), k("t")], [], k("s"), k("t"));
        assert!(certain(&reduce_reachability(&none, &q, 0).unwrap(), &q));
        assert!(reduce_reachability(&g, &w("RX"), 0).is_err());
        let cyclic: Digraph = "s=a t=b\na b\nb a\n".parse().unwrap();
        assert!(reduce_reachability(&cyclic, &q, 0).is_err());
    }

    #[test]
    fn sat_example() {
        let f = Cnf::parse_dimacs("c example\np cnf 3 2\n1 -2 0\n2 -3 0\n").unwrap();
        let q = w("ARRX");
        let db = reduce_sat(&f, &q, 0).unwrap();
        assert_eq!(db.len(), 21);
        assert!(f.is_satisfiable());
        assert!(!certain(&db, &q));
        let unsat = Cnf::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert!(!unsat.is_satisfiable());
        assert!(certain(&reduce_sat(&unsat, &q, 0).unwrap(), &q));
        assert!(reduce_sat(&f, &w("RRX"), 0).is_err());
    }

    #[test]
    fn mcvp_examples() {
        let q = w("RXRYRY");
        let and: MonotoneCircuit = "x1 INPUT 1\nx2 INPUT 0\no AND x1 x2\nOUTPUT o\n".parse().unwrap();
        assert!(!and.evaluate());
        assert!(!certain(&reduce_mcvp(&and, &q, 0).unwrap(), &q));
        let or: MonotoneCircuit = "x1 INPUT 1\nx2 INPUT 0\no OR x1 x2\nOUTPUT o\n".parse().unwrap();
        assert!(or.evaluate());
        assert!(certain(&reduce_mcvp(&or, &q, 0).unwrap(), &q));
        assert!(reduce_mcvp(&or, &w("RXRY"), 0).is_err());
        assert!(reduce_mcvp(&or, &w("ARRX"), 0).is_err());
    }

    #[test]
    fn empty_v1p_breaks_or_gates() {
        let q = w("RRXRX");
        let t = triple_violation(&q).unwrap();
        assert!(t.v1p.is_empty());
        let c: MonotoneCircuit = "x INPUT 0\no OR x x\nOUTPUT o\n".parse().unwrap();
        assert!(!c.evaluate());
        assert!(certain(&reduce_mcvp(&c, &q, 0).unwrap(), &q));
        // Empty v2p is fine.
        let q = w("RSRRR");
        assert!(triple_violation(&q).unwrap().v2p.is_empty());
        assert!(!certain(&reduce_mcvp(&c, &q, 0).unwrap(), &q));
    }

    #[test]
    fn splits() {
        let t = triple_violation(&w("RXRYRY")).unwrap();
        assert_eq!((t.v1, t.v2, t.w, t.v), (w("X"), w("Y"), w("Y"), Word::empty()));
        let t = triple_violation(&w("RRSRS")).unwrap();
        assert_eq!((t.v1p, t.v2p), (Word::empty(), w("S")));
        let s = factor_violation(&w("ARRX")).unwrap();
        assert_eq!((s.u, s.v, s.w), (w("A"), Word::empty(), w("X")));
        assert!(prefix_violation(&w("RXRX")).is_none());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(Digraph::parse("a b\n").unwrap_err().line, Some(1));
        assert_eq!(Digraph::parse("s=a t=b\na b c\n").unwrap_err().offset, 8);
        assert_eq!(Cnf::parse_dimacs("p cnf 1 1\n2 0\n").unwrap_err().line, Some(2));
        assert!(Cnf::parse_dimacs("p cnf 1 2\n1 0\n").is_err());
        assert!(MonotoneCircuit::parse("o AND a b\nOUTPUT o\n").is_err());
        assert!(MonotoneCircuit::parse("a INPUT 1\nOUTPUT a\nb INPUT 0\n").is_err());
    }
}
