//! The ε-NFA of a path query and acceptance of paths in consistent
//! instances.
//!
//! States are the prefixes of the query, identified by their length.
//! Reading symbol `q[i]` moves from state `i` to `i + 1`; an ε-transition
//! leads from a prefix to every shorter non-empty prefix ending in the same
//! symbol. The query itself is the only accepting state.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::instance::{Constant, Indexed, Instance, Succ};
use crate::words::{RelName, Word};

#[derive(Debug, Clone)]
pub struct QueryNfa {
    query: Word,
    initial: usize,
    backward: Vec<(usize, usize)>,
}

/// One transition; `label` is `None` for ε.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub from: Word,
    pub label: Option<RelName>,
    pub to: Word,
}

impl QueryNfa {
    pub fn new(q: &Word) -> Self {
        let s = q.symbols();
        let mut backward = Vec::new();
        for j in 1..=s.len() {
            for i in 1..j {
                if s[i - 1] == s[j - 1] {
                    backward.push((j, i));
                }
            }
        }
        QueryNfa { query: q.clone(), initial: 0, backward }
    }

    /// The same automaton started in state `start`, which must be a prefix.
    pub fn with_start(q: &Word, start: &Word) -> Result<Self> {
        if !start.is_prefix_of(q) {
            return Err(Error::Precondition(format!("{start} is not a prefix of {q}")));
        }
        let mut nfa = QueryNfa::new(q);
        nfa.initial = start.len();
        Ok(nfa)
    }

    pub fn query(&self) -> &Word {
        &self.query
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> usize {
        self.query.len()
    }

    pub fn state_count(&self) -> usize {
        self.query.len() + 1
    }

    /// `(from, to)` pairs of ε-transitions, by prefix length.
    pub fn backward_transitions(&self) -> &[(usize, usize)] {
        &self.backward
    }

    pub fn forward_count(&self) -> usize {
        self.query.len()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let q = &self.query;
        let mut out: Vec<Edge> = (0..q.len())
            .map(|i| Edge { from: q.prefix(i), label: Some(q.symbols()[i].clone()), to: q.prefix(i + 1) })
            .collect();
        out.extend(self.backward.iter().map(|&(j, i)| Edge { from: q.prefix(j), label: None, to: q.prefix(i) }));
        out
    }

    /// Adds every state reachable by ε-moves.
    pub fn close(&self, states: &mut [bool]) {
        let s = self.query.symbols();
        for j in (2..states.len()).rev() {
            if states[j] {
                for i in 1..j {
                    if s[i - 1] == s[j - 1] {
                        states[i] = true;
                    }
                }
            }
        }
    }

    /// One symbol step followed by ε-closure.
    pub fn step(&self, states: &[bool], sym: &RelName) -> Vec<bool> {
        let s = self.query.symbols();
        let mut next = vec![false; states.len()];
        for i in 0..s.len() {
            if states[i] && s[i] == *sym {
                next[i + 1] = true;
            }
        }
        self.close(&mut next);
        next
    }

    pub fn initial_states(&self) -> Vec<bool> {
        let mut st = vec![false; self.state_count()];
        st[self.initial] = true;
        self.close(&mut st);
        st
    }

    pub fn accepts(&self, trace: &Word) -> bool {
        let mut st = self.initial_states();
        for sym in trace.symbols() {
            st = self.step(&st, sym);
            if !st.iter().any(|&b| b) {
                return false;
            }
        }
        st[self.accepting()]
    }

    /// Words of length at most `max_len` accepted by the automaton, found by
    /// exploring only live prefixes.
    pub fn language_upto(&self, max_len: usize) -> BTreeSet<Word> {
        let alphabet: Vec<RelName> = self.query.alphabet().into_iter().collect();
        let mut out = BTreeSet::new();
        let mut stack = vec![(Word::empty(), self.initial_states())];
        while let Some((w, st)) = stack.pop() {
            if st[self.accepting()] {
                out.insert(w.clone());
            }
            if w.len() == max_len {
                continue;
            }
            for a in &alphabet {
                let next = self.step(&st, a);
                if next.iter().any(|&b| b) {
                    let mut w2 = w.clone();
                    w2.push(a.clone());
                    stack.push((w2, next));
                }
            }
        }
        out
    }
}

impl fmt::Display for QueryNfa {
    /// One `(state, label, state)` line per transition.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in self.edges() {
            let label = e.label.map(|r| r.to_string()).unwrap_or_else(|| "ε".into());
            writeln!(f, "({}, {}, {})", e.from, label, e.to)?;
        }
        Ok(())
    }
}

pub fn build_nfa(q: &Word, start: &Word) -> Result<QueryNfa> {
    QueryNfa::with_start(q, start)
}

/// All words of length at most `max_len` obtainable from `q` by repeated
/// rewinding, `q` included.
pub fn closure_upto(q: &Word, max_len: usize) -> Result<BTreeSet<Word>> {
    if max_len < q.len() {
        return Err(Error::Precondition(format!("bound {max_len} is shorter than {q}")));
    }
    let mut seen = BTreeSet::from([q.clone()]);
    let mut queue = VecDeque::from([q.clone()]);
    while let Some(w) = queue.pop_front() {
        for (i, j) in w.repeated_pairs().collect::<Vec<_>>() {
            // Rewinding adds j - i symbols.
            if w.len() + (j - i) > max_len {
                continue;
            }
            let r = w.rewind_at(i, j);
            if seen.insert(r.clone()) {
                queue.push_back(r);
            }
        }
    }
    Ok(seen)
}

/// For a consistent set of facts: the pairs `(constant, state)` such that
/// some path starting at the constant drives the automaton from that state
/// to acceptance. Indexed as `c * (n + 1) + state`.
pub(crate) struct AcceptTable {
    pub n: usize,
    pub acc: Vec<bool>,
}

impl AcceptTable {
    /// `word` holds relation ids of the query as produced by
    /// [`Indexed::word_ids_lenient`].
    pub fn compute(idx: &Indexed, choice: &[u32], word: &[u32]) -> Self {
        let n = word.len();
        let m = idx.n_consts();
        let stride = n + 1;
        let mut acc = vec![false; m * stride];
        // preds[rel * m + value] -> keys, restricted to the chosen facts.
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); idx.rels.len() * m];
        for &fi in choice {
            let (r, k, v) = idx.facts[fi as usize];
            preds[r as usize * m + v as usize].push(k);
        }
        let mut queue = VecDeque::new();
        for c in 0..m {
            acc[c * stride + n] = true;
            queue.push_back((c as u32, n));
        }
        while let Some((d, s)) = queue.pop_front() {
            if s == 0 {
                continue;
            }
            // ε-moves: longer prefixes ending in the same symbol reach s.
            for j in s + 1..=n {
                if word[j - 1] == word[s - 1] && !acc[d as usize * stride + j] {
                    acc[d as usize * stride + j] = true;
                    queue.push_back((d, j));
                }
            }
            let r = word[s - 1];
            if (r as usize) < idx.rels.len() {
                for &c in &preds[r as usize * m + d as usize] {
                    let slot = c as usize * stride + s - 1;
                    if !acc[slot] {
                        acc[slot] = true;
                        queue.push_back((c, s - 1));
                    }
                }
            }
        }
        AcceptTable { n, acc }
    }

    #[inline]
    pub fn get(&self, c: u32, state: usize) -> bool {
        self.acc[c as usize * (self.n + 1) + state]
    }
}

fn consistent_index(r: &Instance) -> Result<(Indexed, Vec<u32>)> {
    if !r.is_consistent() {
        return Err(Error::Inconsistent);
    }
    let idx = Indexed::new(r);
    let choice = (0..idx.facts.len() as u32).collect();
    Ok((idx, choice))
}

/// Constants of the consistent instance `r` from which some path is
/// accepted by the query automaton.
///
/// With `use_min` the acceptance is decided by a subset simulation that
/// stops at the first accepted prefix; this computes the same set by a
/// different route and serves as a cross-check.
pub fn start_set(q: &Word, r: &Instance, use_min: bool) -> Result<BTreeSet<Constant>> {
    let (idx, choice) = consistent_index(r)?;
    let word = idx.word_ids_lenient(q.symbols());
    let m = idx.n_consts() as u32;
    if !use_min {
        let table = AcceptTable::compute(&idx, &choice, &word);
        return Ok((0..m).filter(|&c| table.get(c, 0)).map(|c| idx.consts[c as usize].clone()).collect());
    }
    let nfa = QueryNfa::new(q);
    let succ = Succ::from_choice(&idx, &choice);
    let mut out = BTreeSet::new();
    for c in 0..m {
        let mut seen: HashSet<(u32, Vec<bool>)> = HashSet::new();
        let mut stack = vec![(c, nfa.initial_states())];
        let mut found = false;
        while let Some((d, st)) = stack.pop() {
            if st[nfa.accepting()] {
                found = true;
                break;
            }
            if !seen.insert((d, st.clone())) {
                continue;
            }
            for (ri, rel) in idx.rels.iter().enumerate() {
                if let Some(e) = succ.get(ri as u32, d) {
                    let next = nfa.step(&st, rel);
                    if next.iter().any(|&b| b) {
                        stack.push((e, next));
                    }
                }
            }
        }
        if found {
            out.insert(idx.consts[c as usize].clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Fact;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn epsilon_edges_of_rxrrr() {
        let nfa = QueryNfa::new(&w("RXRRR"));
        let got: BTreeSet<(String, String)> = nfa
            .edges()
            .into_iter()
            .filter(|e| e.label.is_none())
            .map(|e| (e.from.to_string(), e.to.to_string()))
            .collect();
        let want: BTreeSet<(String, String)> =
            [("RXR", "R"), ("RXRR", "R"), ("RXRR", "RXR"), ("RXRRR", "R"), ("RXRRR", "RXR"), ("RXRRR", "RXRR")]
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn small_automata() {
        let r = QueryNfa::new(&w("R"));
        assert_eq!((r.state_count(), r.forward_count(), r.backward_transitions().len()), (2, 1, 0));
        let rrx = QueryNfa::new(&w("RRX"));
        assert_eq!(rrx.backward_transitions(), &[(2, 1)]);
        assert!(rrx.accepts(&w("RRX")));
        assert!(rrx.accepts(&w("RRRX")));
        assert!(!rrx.accepts(&w("RX")));
        assert!(!QueryNfa::new(&w("ARRX")).accepts(&w("ARXRX")));
        assert!(build_nfa(&w("RRX"), &w("X")).is_err());
        assert_eq!(format!("{rrx}").lines().count(), 4);
        assert!(format!("{rrx}").contains("(RR, ε, R)"));
    }

    #[test]
    fn closures() {
        let set = |v: &[&str]| v.iter().map(|s| w(s)).collect::<BTreeSet<_>>();
        assert_eq!(closure_upto(&w("RRX"), 5).unwrap(), set(&["RRX", "RRRX", "RRRRX"]));
        assert_eq!(closure_upto(&w("RSTU"), 10).unwrap(), set(&["RSTU"]));
        assert_eq!(closure_upto(&w("RXRX"), 8).unwrap(), set(&["RXRX", "RXRXRX", "RXRXRXRX"]));
        for q in ["RRX", "RXRX", "RXRYRY", "ARRX"] {
            let q = w(q);
            let b = q.len() + 4;
            assert_eq!(QueryNfa::new(&q).language_upto(b), closure_upto(&q, b).unwrap());
        }
    }

    #[test]
    fn start_sets_of_two_repairs() {
        let q = w("RRX");
        let r1 = Instance::from_facts([
            Fact::lit("R", "0", "1"),
            Fact::lit("R", "1", "2"),
            Fact::lit("R", "2", "3"),
            Fact::lit("X", "3", "4"),
        ]);
        let r2 = Instance::from_facts([
            Fact::lit("R", "0", "1"),
            Fact::lit("R", "1", "3"),
            Fact::lit("R", "2", "3"),
            Fact::lit("X", "3", "4"),
        ]);
        let c = |v: &[&str]| v.iter().map(|s| Constant::from(*s)).collect::<BTreeSet<_>>();
        for min in [false, true] {
            assert_eq!(start_set(&q, &r1, min).unwrap(), c(&["0", "1"]));
            assert_eq!(start_set(&q, &r2, min).unwrap(), c(&["0"]));
        }
        let bad = Instance::from_facts([Fact::lit("R", "0", "1"), Fact::lit("R", "0", "2")]);
        assert_eq!(start_set(&q, &bad, false), Err(Error::Inconsistent));
    }
}
