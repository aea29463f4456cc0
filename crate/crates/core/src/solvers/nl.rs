//! The NL procedure for queries satisfying the second condition.
//!
//! Such a query has the shape `A B^* C` as far as certainty is concerned:
//! every repair has a path from `c` with trace in the rewinding closure iff
//! it has one with trace in `A B^k C` for some `k ≥ 0`. Here `B` is
//! self-join-free and `A` ends with a full copy of `B`. Two factorizations
//! give this shape:
//!
//! * `q = U w V` with `U` a factor of `u^ω` ending on a `u` boundary, `w`
//!   and `V` (a prefix of `v^ω`) over fresh symbols: `A = U`, `B = u`,
//!   `C = w V`;
//! * `q = P w v` with `P` a factor of `(uv)^ω` ending on a boundary:
//!   `A = P`, `B = uv`, `C = w v`.
//!
//! In both cases `|A| > |B|` is required, otherwise no rewinding happens
//! inside `A` and the query already satisfies the first condition.
//!
//! Writing `T_p` for the constants terminal for `p`, a constant `d`
//! satisfies `P(d)` if some `B`-walk from `d` stays inside `T_C` and ends in
//! `T_B` or revisits a constant. `O(c)` holds if `c ∈ T_A` or a consistent
//! `A`-path leads from `c` to some `d` with `P(d)`. The instance is a "yes"
//! instance iff some constant falsifies `O`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::instance::{Constant, Indexed, Instance};
use crate::solvers::terminal::TerminalTest;
use crate::words::{satisfies_c1, satisfies_c2, BForm, RelName, Word};

/// The factorization used by the NL procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NlWitness {
    pub form: BForm,
    pub u: Word,
    pub v: Word,
    pub w: Word,
    /// Number of loop copies covering the prefix, counting a partial copy.
    pub k: usize,
    /// The partial copy at the start of the prefix (a proper suffix of the
    /// loop block).
    pub s: Word,
    pub prefix: Word,
    pub block: Word,
    pub tail: Word,
}

impl fmt::Display for NlWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} u={} v={} w={} k={} s={} (prefix {} loop {} tail {})",
            self.form, self.u, self.v, self.w, self.k, self.s, self.prefix, self.block, self.tail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NlPlan {
    /// Every rewinding of `q` extends `q`; certainty holds iff some constant
    /// is not terminal for `q`.
    Direct,
    Loop(NlWitness),
}

impl fmt::Display for NlPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NlPlan::Direct => f.write_str("direct"),
            NlPlan::Loop(w) => write!(f, "{w}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NlOutcome {
    pub certain: bool,
    /// Least constant falsifying `O` (or not terminal, for direct plans).
    pub witness: Option<Constant>,
    pub plan: NlPlan,
}

/// Length of the period block if `x` is a factor of `b^ω` for a
/// self-join-free `b`, whose length is then the alphabet size of `x`.
fn sjf_period(x: &[RelName]) -> Option<usize> {
    let p = x.iter().collect::<BTreeSet<_>>().len();
    let head = &x[..p.min(x.len())];
    let distinct = head.iter().collect::<BTreeSet<_>>().len() == head.len();
    (distinct && (p..x.len()).all(|t| x[t] == x[t - p])).then_some(p)
}

fn disjoint(a: &[RelName], b: &[RelName]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

fn sjf(a: &[RelName]) -> bool {
    a.iter().collect::<BTreeSet<_>>().len() == a.len()
}

/// `q = U w V` with a repeating `U`; see the module documentation.
fn b2a_split(q: &Word) -> Option<NlWitness> {
    let s = q.symbols();
    let n = s.len();
    for i in 0..=n {
        let big_u = &s[..i];
        let Some(pu) = sjf_period(big_u) else { continue };
        if i <= pu {
            continue;
        }
        for j in i..n {
            let w = &s[i..j];
            let big_v = &s[j..];
            let Some(pv) = sjf_period(big_v) else { continue };
            if !(sjf(w) && disjoint(big_u, w) && disjoint(big_u, big_v) && disjoint(w, big_v)) {
                continue;
            }
            let rem = i % pu;
            return Some(NlWitness {
                form: BForm::B2a,
                u: Word::new(s[i - pu..i].to_vec()),
                v: Word::new(big_v[..pv].to_vec()),
                w: Word::new(w.to_vec()),
                k: if pv == 0 { 0 } else { big_v.len().div_ceil(pv) },
                s: Word::new(s[..rem].to_vec()),
                prefix: q.prefix(i),
                block: Word::new(s[i - pu..i].to_vec()),
                tail: q.suffix_from(i),
            });
        }
    }
    None
}

/// `q = P w v` with a repeating `P` whose period block ends with `v`.
pub(crate) fn b2b_split(q: &Word) -> Option<NlWitness> {
    let s = q.symbols();
    let n = s.len();
    for lv in 0..n {
        for lw in 0..=n - lv {
            if lv + lw == 0 {
                continue;
            }
            let cut = n - lv - lw;
            let big_p = &s[..cut];
            let v = &s[n - lv..];
            let w = &s[cut..n - lv];
            let Some(p) = sjf_period(big_p) else { continue };
            if cut <= p || p < lv {
                continue;
            }
            let block = &big_p[cut - p..];
            if !block.ends_with(v) || !sjf(w) || !disjoint(w, block) {
                continue;
            }
            let rem = cut % p;
            return Some(NlWitness {
                form: BForm::B2b,
                u: Word::new(block[..p - lv].to_vec()),
                v: Word::new(v.to_vec()),
                w: Word::new(w.to_vec()),
                k: cut / p + 1,
                s: Word::new(s[..rem].to_vec()),
                prefix: q.prefix(cut),
                block: Word::new(block.to_vec()),
                tail: q.suffix_from(cut),
            });
        }
    }
    None
}

/// Chooses the plan for a query satisfying the second condition.
pub fn nl_plan(q: &Word) -> Result<NlPlan> {
    if !satisfies_c2(q)? {
        return Err(Error::Inapplicable { method: "nl".into(), class: "non-NL".into() });
    }
    if satisfies_c1(q)? {
        return Ok(NlPlan::Direct);
    }
    b2a_split(q)
        .or_else(|| b2b_split(q))
        .map(NlPlan::Loop)
        .ok_or_else(|| Error::NlNotCovered(format!("{q} has no repeating prefix followed by a tail")))
}

pub fn nl_solve(db: &Instance, q: &Word) -> Result<NlOutcome> {
    let plan = nl_plan(q)?;
    let idx = Indexed::new(db);
    let witness = match &plan {
        NlPlan::Direct => {
            let t = TerminalTest::new(&idx, q);
            (0..idx.n_consts() as u32).find(|&c| !t.is_terminal(&idx, c))
        }
        NlPlan::Loop(w) => loop_witness(&idx, w),
    };
    Ok(NlOutcome { certain: witness.is_some(), witness: witness.map(|c| idx.consts[c as usize].clone()), plan })
}

fn loop_witness(idx: &Indexed, plan: &NlWitness) -> Option<u32> {
    let m = idx.n_consts();
    let t_a = TerminalTest::new(idx, &plan.prefix);
    let t_b = TerminalTest::new(idx, &plan.block);
    let t_c = TerminalTest::new(idx, &plan.tail);
    let in_tc: Vec<bool> = (0..m as u32).map(|d| t_c.is_terminal(idx, d)).collect();
    let in_tb: Vec<bool> = (0..m as u32).map(|d| t_b.is_terminal(idx, d)).collect();

    // B-edges inside T_C. B is self-join-free, so every path is consistent.
    let block_ids = idx.word_ids(plan.block.symbols());
    let succ: Vec<Vec<u32>> = (0..m as u32)
        .map(|d| match (&block_ids, in_tc[d as usize]) {
            (Some(ids), true) => path_ends(idx, d, ids, false).into_iter().filter(|&e| in_tc[e as usize]).collect(),
            _ => Vec::new(),
        })
        .collect();
    let reach = |d: u32| -> Vec<bool> {
        let mut seen = vec![false; m];
        let mut queue = VecDeque::from([d]);
        seen[d as usize] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &succ[x as usize] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    };
    let on_cycle: Vec<bool> = (0..m as u32).map(|d| succ[d as usize].iter().any(|&y| reach(y)[d as usize])).collect();
    let p: Vec<bool> = (0..m as u32)
        .map(|d| in_tc[d as usize] && reach(d).iter().enumerate().any(|(x, &r)| r && (in_tb[x] || on_cycle[x])))
        .collect();

    let prefix_ids = idx.word_ids(plan.prefix.symbols());
    (0..m as u32).find(|&c| {
        let o = t_a.is_terminal(idx, c)
            || prefix_ids.as_ref().is_some_and(|ids| path_ends(idx, c, ids, true).iter().any(|&d| p[d as usize]));
        !o
    })
}

/// End points of paths from `c` with the given trace; with `consistent`
/// the path may not use two distinct key-equal facts.
pub(crate) fn path_ends(idx: &Indexed, c: u32, word: &[u32], consistent: bool) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    let mut used: Vec<(u32, u32, u32)> = Vec::new();
    fn go(
        idx: &Indexed,
        at: u32,
        word: &[u32],
        consistent: bool,
        used: &mut Vec<(u32, u32, u32)>,
        out: &mut BTreeSet<u32>,
    ) {
        let Some((&r, rest)) = word.split_first() else {
            out.insert(at);
            return;
        };
        let Some(b) = idx.block(r, at) else { return };
        let fixed =
            if consistent { used.iter().find(|(ur, uk, _)| *ur == r && *uk == at).map(|&(_, _, v)| v) } else { None };
        for &fi in &idx.blocks[b as usize] {
            let v = idx.facts[fi as usize].2;
            if fixed.is_some_and(|x| x != v) {
                continue;
            }
            used.push((r, at, v));
            go(idx, v, rest, consistent, used, out);
            used.pop();
        }
    }
    go(idx, c, word, consistent, &mut used, &mut out);
    out
}
