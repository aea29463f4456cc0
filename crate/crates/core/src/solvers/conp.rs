//! Counterexample search for queries outside the polynomial tiers.
//!
//! Depth-first over block choices, singleton blocks first. A branch is cut
//! as soon as the facts chosen so far already contain a path with the
//! query's trace, since every completion would satisfy the query.

use crate::error::{Error, Result};
use crate::instance::{Indexed, Instance, NONE};
use crate::oracle::{Bcq, Compiled, View};
use crate::words::Word;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub certain: bool,
    /// Search nodes visited, one per block assignment.
    pub nodes: u64,
    pub counterexample: Option<Instance>,
}

/// Looks for a repair without a path of trace `q`; fails with
/// [`Error::SearchCap`] after `cap` nodes.
pub fn conp_search(db: &Instance, q: &Word, cap: u64) -> Result<SearchOutcome> {
    let idx = Indexed::new(db);
    let compiled = Compiled::new(&idx, &Bcq::from_word(q));
    let mut order: Vec<usize> = (0..idx.blocks.len()).collect();
    order.sort_by_key(|&b| (idx.blocks[b].len(), b));
    let mut s = Search { idx: &idx, compiled: &compiled, order, choice: vec![NONE; idx.blocks.len()], nodes: 0, cap };
    let found = s.go(0)?;
    let nodes = s.nodes;
    Ok(match found {
        true => SearchOutcome { certain: false, nodes, counterexample: Some(idx.repair_instance(&s.choice)) },
        false => SearchOutcome { certain: true, nodes, counterexample: None },
    })
}

struct Search<'a> {
    idx: &'a Indexed,
    compiled: &'a Compiled,
    order: Vec<usize>,
    choice: Vec<u32>,
    nodes: u64,
    cap: u64,
}

impl Search<'_> {
    /// True once `choice` is a full repair falsifying the query.
    fn go(&mut self, depth: usize) -> Result<bool> {
        if self.compiled.satisfied(self.idx, View::Choice(&self.choice)) {
            return Ok(false);
        }
        let Some(&b) = self.order.get(depth) else { return Ok(true) };
        for i in 0..self.idx.blocks[b].len() {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::SearchCap { cap: self.cap });
            }
            self.choice[b] = self.idx.blocks[b][i];
            if self.go(depth + 1)? {
                return Ok(true);
            }
        }
        self.choice[b] = NONE;
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Fact;

    #[test]
    fn finds_the_falsifying_repair() {
        let db: Instance = "A(0,1)\nR(1,2)\nR(2,3)\nX(3,4)\nR(2,5)\nR(5,6)\nX(6,7)\n".parse().unwrap();
        let out = conp_search(&db, &Word::parse("ARRX").unwrap(), 1000).unwrap();
        assert!(!out.certain);
        assert!(out.counterexample.unwrap().contains(&Fact::lit("R", "2", "5")));
    }

    #[test]
    fn cap_is_enforced() {
        let mut db = Instance::new();
        for k in 0..12 {
            db.insert(Fact::lit("R", &k.to_string(), "a"));
            db.insert(Fact::lit("R", &k.to_string(), "b"));
        }
        db.insert(Fact::lit("X", "a", "z"));
        db.insert(Fact::lit("X", "b", "z"));
        assert!(conp_search(&db, &Word::parse("RX").unwrap(), 1 << 20).unwrap().certain);
        assert_eq!(conp_search(&db, &Word::parse("RRX").unwrap(), 10), Err(Error::SearchCap { cap: 10 }));
    }
}
