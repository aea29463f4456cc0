//! Terminal constants.
//!
//! `c` is terminal for `q` when some consistent path from `c` whose trace
//! is a proper prefix of `q` has no consistent extension with trace `q`.
//! Equivalently, some repair has no path with trace `q` from `c`, so the
//! query with head fixed to `c` is certain iff `c` is not terminal.
//!
//! The nested formula `∃y R(x,y) ∧ ∀y (R(x,y) → φ(y))` only agrees with
//! this when a path with trace `q` never meets the same block twice, e.g.
//! for self-join-free `q`. On `{R(c,c), R(c,e), R(e,c), X(c,z)}` every
//! repair has an `RRX`-path from `c`, yet the formula rejects `c` because
//! the successor `e` alone does not start an `RX`-path. The search below
//! tracks the facts already used and is exact.

use crate::instance::{Constant, Indexed, Instance};
use crate::words::Word;

/// Is there a repair of `db` without a path from `c` with trace `q`? The
/// empty word is never terminal; constants outside the active domain are
/// terminal for every non-empty word.
pub fn is_terminal(db: &Instance, c: &Constant, q: &Word) -> bool {
    let idx = Indexed::new(db);
    match idx.const_ids.get(c) {
        Some(&id) => TerminalTest::new(&idx, q).is_terminal(&idx, id),
        None => !q.is_empty(),
    }
}

/// Certain answer of `q` with its first variable replaced by `c`.
pub fn fixed_head_certain(db: &Instance, q: &Word, c: &Constant) -> bool {
    !is_terminal(db, c, q)
}

/// Terminal test for one word against one indexed instance.
pub(crate) struct TerminalTest {
    /// `None` when some relation of the word does not occur.
    word: Option<Vec<u32>>,
    empty: bool,
}

impl TerminalTest {
    pub fn new(idx: &Indexed, q: &Word) -> Self {
        TerminalTest { word: idx.word_ids(q.symbols()), empty: q.is_empty() }
    }

    pub fn is_terminal(&self, idx: &Indexed, c: u32) -> bool {
        if self.empty {
            return false;
        }
        let Some(word) = &self.word else { return true };
        let mut used = Vec::new();
        let mut terminal = false;
        extends(idx, word, c, &mut used, &mut terminal);
        terminal
    }
}

/// Explores consistent paths from `at` with trace a prefix of `word`.
/// Returns whether the current path extends to the whole word and sets
/// `terminal` once some path does not.
fn extends(idx: &Indexed, word: &[u32], at: u32, used: &mut Vec<(u32, u32, u32)>, terminal: &mut bool) -> bool {
    if *terminal {
        return false;
    }
    let Some((&r, rest)) = word.split_first() else { return true };
    let mut any = false;
    if let Some(b) = idx.block(r, at) {
        let fixed = used.iter().find(|(ur, uk, _)| *ur == r && *uk == at).map(|&(_, _, v)| v);
        for &fi in &idx.blocks[b as usize] {
            let v = idx.facts[fi as usize].2;
            if fixed.is_some_and(|x| x != v) {
                continue;
            }
            used.push((r, at, v));
            any |= extends(idx, rest, v, used, terminal);
            used.pop();
            if *terminal {
                return false;
            }
        }
    }
    if !any {
        *terminal = true;
    }
    any
}
