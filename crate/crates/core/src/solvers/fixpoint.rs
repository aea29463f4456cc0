//! Least-fixpoint computation of the pairs `(c, u)` such that every repair
//! has a path from `c` accepted by the automaton started in state `u`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::instance::{Constant, Indexed, Instance};
use crate::words::{satisfies_c3, Word};

/// The relation `N` after saturation. States are prefix lengths.
#[derive(Debug, Clone)]
pub struct FixpointRun {
    pub query: Word,
    /// Pairs in insertion order; the first `|adom|` are the initial ones.
    pub order: Vec<(Constant, usize)>,
    pub initial_count: usize,
    members: BTreeSet<(Constant, usize)>,
}

impl FixpointRun {
    pub fn contains(&self, c: &Constant, state: usize) -> bool {
        self.members.contains(&(c.clone(), state))
    }

    /// All pairs as `(constant, prefix)`.
    pub fn pairs(&self) -> BTreeSet<(Constant, Word)> {
        self.members.iter().map(|(c, s)| (c.clone(), self.query.prefix(*s))).collect()
    }

    /// Pairs added by the iterative rule, in insertion order.
    pub fn derived(&self) -> Vec<(Constant, Word)> {
        self.order[self.initial_count..].iter().map(|(c, s)| (c.clone(), self.query.prefix(*s))).collect()
    }

    /// Constants paired with the empty prefix, in sort order.
    pub fn starts(&self) -> Vec<Constant> {
        self.members.iter().filter(|(_, s)| *s == 0).map(|(c, _)| c.clone()).collect()
    }
}

/// Saturates `N` with a worklist. For each block and state `i` a counter
/// records how many facts of the block already reach a pair in `N` at
/// state `i + 1`; the rule fires when the counter reaches the block size.
pub fn fixpoint_run(db: &Instance, q: &Word) -> FixpointRun {
    let idx = Indexed::new(db);
    let (_, order_ids, initial_count) = saturate(&idx, q);
    let order: Vec<(Constant, usize)> = order_ids.iter().map(|&(c, s)| (idx.consts[c as usize].clone(), s)).collect();
    let members = order.iter().cloned().collect();
    FixpointRun { query: q.clone(), order, initial_count, members }
}

/// Returns the membership table (`c * (n+1) + state`), the insertion order
/// and the number of initial pairs.
pub(crate) fn saturate(idx: &Indexed, q: &Word) -> (Vec<bool>, Vec<(u32, usize)>, usize) {
    let word = idx.word_ids_lenient(q.symbols());
    let n = word.len();
    let m = idx.n_consts();
    let stride = n + 1;
    let mut inn = vec![false; m * stride];
    let mut order = Vec::new();
    let mut counters = vec![0u32; idx.blocks.len() * n.max(1)];
    let mut head = 0;

    fn add(inn: &mut [bool], order: &mut Vec<(u32, usize)>, stride: usize, c: u32, s: usize) {
        let slot = c as usize * stride + s;
        if !inn[slot] {
            inn[slot] = true;
            order.push((c, s));
        }
    }

    for c in 0..m as u32 {
        add(&mut inn, &mut order, stride, c, n);
    }
    let initial = order.len();
    while head < order.len() {
        let (y, s) = order[head];
        head += 1;
        if s == 0 {
            continue;
        }
        let r = word[s - 1];
        if r as usize >= idx.rels.len() {
            continue;
        }
        for &fi in &idx.incoming[r as usize * m + y as usize] {
            let b = idx.block_of_fact[fi as usize] as usize;
            let cnt = &mut counters[b * n + (s - 1)];
            *cnt += 1;
            if *cnt as usize == idx.blocks[b].len() {
                let c = idx.facts[fi as usize].1;
                let u = s - 1;
                add(&mut inn, &mut order, stride, c, u);
                if u >= 1 {
                    for j in u + 1..=n {
                        if word[j - 1] == word[u - 1] {
                            add(&mut inn, &mut order, stride, c, j);
                        }
                    }
                }
            }
        }
    }
    (inn, order, initial)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixpointOutcome {
    pub certain: bool,
    /// Least constant `c` with `(c, ε)` in `N`.
    pub witness: Option<Constant>,
    /// For "no" answers, a repair without any path accepted from the
    /// initial state.
    pub counterexample: Option<Instance>,
}

/// Decides certainty for a query satisfying the factor condition.
pub fn fixpoint_solve(db: &Instance, q: &Word) -> Result<FixpointOutcome> {
    if !satisfies_c3(q)? {
        return Err(Error::Inapplicable { method: "fixpoint".into(), class: "CONP_COMPLETE".into() });
    }
    Ok(fixpoint_decide(db, q))
}

pub(crate) fn fixpoint_decide(db: &Instance, q: &Word) -> FixpointOutcome {
    let idx = Indexed::new(db);
    let (inn, _, _) = saturate(&idx, q);
    let stride = q.len() + 1;
    let witness = (0..idx.n_consts()).find(|&c| inn[c * stride]).map(|c| idx.consts[c].clone());
    if witness.is_some() {
        return FixpointOutcome { certain: true, witness, counterexample: None };
    }
    FixpointOutcome { certain: false, witness: None, counterexample: Some(falsifying_repair(&idx, q, &inn)) }
}

/// In every block `R(a,*)`, take the longest prefix `u R` of `q` with
/// `(a, u)` outside `N` and keep a fact `R(a,b)` with `(b, uR)` outside `N`.
/// Blocks without such a prefix keep their first fact.
fn falsifying_repair(idx: &Indexed, q: &Word, inn: &[bool]) -> Instance {
    let word = idx.word_ids_lenient(q.symbols());
    let stride = word.len() + 1;
    let mut out = Instance::new();
    for block in &idx.blocks {
        let (r, a, _) = idx.facts[block[0] as usize];
        let longest = (0..word.len()).rev().find(|&i| word[i] == r && !inn[a as usize * stride + i]);
        let chosen = match longest {
            Some(i) => *block
                .iter()
                .find(|&&f| !inn[idx.facts[f as usize].2 as usize * stride + i + 1])
                .expect("saturated N leaves a witness fact"),
            None => block[0],
        };
        out.insert(idx.fact(chosen));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{satisfies_bcq, Bcq};

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn ladder_run() {
        let db: Instance = "R(0,1)\nR(1,2)\nR(2,3)\nR(1,4)\nR(2,4)\nR(3,4)\nX(4,5)\n".parse().unwrap();
        let run = fixpoint_run(&db, &w("RRX"));
        assert_eq!(run.initial_count, 6);
        let got: BTreeSet<(String, String)> =
            run.derived().into_iter().map(|(c, u)| (c.to_string(), u.to_string())).collect();
        let want: BTreeSet<(String, String)> = [
            ("4", "RR"),
            ("3", "R"),
            ("3", "RR"),
            ("2", "R"),
            ("2", "RR"),
            ("1", "R"),
            ("1", "RR"),
            ("0", "R"),
            ("0", "RR"),
            ("0", "ε"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(got, want);
        assert_eq!(run.derived().len(), 10);
        assert!(fixpoint_solve(&db, &w("RRX")).unwrap().certain);
    }

    #[test]
    fn small_cases() {
        let branching: Instance = "R(0,1)\nR(1,2)\nR(1,3)\nR(2,3)\nX(3,4)\n".parse().unwrap();
        assert!(fixpoint_solve(&branching, &w("RRX")).unwrap().certain);
        let no: Instance = "R(a,b)\nR(a,c)\nX(b,d)\n".parse().unwrap();
        let out = fixpoint_solve(&no, &w("RRX")).unwrap();
        assert!(!out.certain);
        let cex = out.counterexample.unwrap();
        assert!(cex.is_consistent());
        assert!(!satisfies_bcq(&cex, &Bcq::from_word(&w("RRX"))));
        assert!(fixpoint_solve(&no, &w("ARRX")).is_err());
    }
}
