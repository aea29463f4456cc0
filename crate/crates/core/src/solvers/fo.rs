//! First-order rewritings of path queries and their evaluation.
//!
//! For `q = R w` the formula `ψ_q(x)` says that `x` has an outgoing
//! `R`-fact and every `R`-successor of `x` satisfies `ψ_w`. The sentence
//! `∃x ψ_q(x)` expresses certainty for queries whose rewindings all extend
//! `q`; the fixed-head variant `∃x (ψ_q(x) ∧ x = c)` expresses certainty of
//! the query with its first variable replaced by `c`, for any path query.

use std::fmt;

use crate::error::{Error, Result};
use crate::instance::{Constant, Indexed, Instance, NONE};
use crate::words::{satisfies_c1, RelName, Word};

/// Variables are numbered; `Var(i)` renders as `x{i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub usize);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FoTerm {
    Var(Var),
    Const(Constant),
}

impl fmt::Display for FoTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoTerm::Var(v) => write!(f, "{v}"),
            FoTerm::Const(c) => write!(f, "\"{c}\""),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FoFormula {
    Atom { rel: RelName, key: FoTerm, value: FoTerm },
    Eq(Var, Constant),
    And(Box<FoFormula>, Box<FoFormula>),
    Implies(Box<FoFormula>, Box<FoFormula>),
    Exists(Var, Box<FoFormula>),
    Forall(Var, Box<FoFormula>),
}

impl FoFormula {
    pub fn and(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: Var, body: FoFormula) -> Self {
        FoFormula::Exists(v, Box::new(body))
    }

    pub fn forall(v: Var, body: FoFormula) -> Self {
        FoFormula::Forall(v, Box::new(body))
    }

    fn atom(rel: &RelName, key: Var, value: Var) -> Self {
        FoFormula::Atom { rel: rel.clone(), key: FoTerm::Var(key), value: FoTerm::Var(value) }
    }

    fn is_binary(&self) -> bool {
        matches!(self, FoFormula::And(..) | FoFormula::Implies(..))
    }

    /// Number of nodes, a rough size measure.
    pub fn size(&self) -> usize {
        match self {
            FoFormula::Atom { .. } | FoFormula::Eq(..) => 1,
            FoFormula::And(a, b) | FoFormula::Implies(a, b) => 1 + a.size() + b.size(),
            FoFormula::Exists(_, b) | FoFormula::Forall(_, b) => 1 + b.size(),
        }
    }
}

impl fmt::Display for FoFormula {
    /// Binary connectives are always parenthesized; a quantifier body is
    /// wrapped in parentheses unless it already is.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoFormula::Atom { rel, key, value } => write!(f, "{rel}({key},{value})"),
            FoFormula::Eq(v, c) => write!(f, "{v} = \"{c}\""),
            FoFormula::And(a, b) => write!(f, "({a} & {b})"),
            FoFormula::Implies(a, b) => write!(f, "({a} -> {b})"),
            FoFormula::Exists(v, b) | FoFormula::Forall(v, b) => {
                let q = if matches!(self, FoFormula::Exists(..)) { 'E' } else { 'A' };
                if b.is_binary() {
                    write!(f, "{q} {v}.{b}")
                } else {
                    write!(f, "{q} {v}.({b})")
                }
            }
        }
    }
}

/// `ψ_q(x1)` for a non-empty path query `q`; atom `i` uses the variables
/// `x{i}` and `x{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoRewriting {
    pub query: Word,
    pub psi: FoFormula,
}

impl FoRewriting {
    pub fn new(q: &Word) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::EmptyQuery);
        }
        let s = q.symbols();
        let k = s.len();
        let mut phi = FoFormula::exists(Var(k + 1), FoFormula::atom(&s[k - 1], Var(k), Var(k + 1)));
        for i in (1..k).rev() {
            let r = &s[i - 1];
            phi = FoFormula::and(
                FoFormula::exists(Var(i + 1), FoFormula::atom(r, Var(i), Var(i + 1))),
                FoFormula::forall(Var(i + 1), FoFormula::implies(FoFormula::atom(r, Var(i), Var(i + 1)), phi)),
            );
        }
        Ok(FoRewriting { query: q.clone(), psi: phi })
    }

    /// `∃x1 ψ_q(x1)`.
    pub fn sentence(&self) -> FoFormula {
        FoFormula::exists(Var(1), self.psi.clone())
    }

    /// `∃x1 (ψ_q(x1) ∧ x1 = c)`.
    pub fn fixed_head(&self, c: &Constant) -> FoFormula {
        FoFormula::exists(Var(1), FoFormula::and(self.psi.clone(), FoFormula::Eq(Var(1), c.clone())))
    }
}

/// The rewriting of a query whose rewindings all extend it.
pub fn build_fo_rewriting(q: &Word) -> Result<FoFormula> {
    if !satisfies_c1(q)? {
        return Err(Error::Inapplicable { method: "fo".into(), class: "non-FO".into() });
    }
    Ok(FoRewriting::new(q)?.sentence())
}

/// Evaluates a sentence under active-domain semantics.
pub fn eval_fo(formula: &FoFormula, db: &Instance) -> Result<bool> {
    let ev = Evaluator::new(db);
    ev.eval(formula, &mut Env::default())
}

#[derive(Default, Clone)]
struct Env(Vec<u32>);

impl Env {
    fn get(&self, v: Var) -> Option<u32> {
        self.0.get(v.0).copied().filter(|&c| c != NONE)
    }

    fn set(&mut self, v: Var, c: u32) -> u32 {
        if self.0.len() <= v.0 {
            self.0.resize(v.0 + 1, NONE);
        }
        std::mem::replace(&mut self.0[v.0], c)
    }
}

/// Evaluator over an indexed instance. Quantifiers guarded by an atom
/// `R(t, x)` with `t` bound only range over the `R`-successors of `t`, which
/// keeps evaluation of the rewritings linear in the instance.
pub(crate) struct Evaluator {
    idx: Indexed,
}

impl Evaluator {
    pub fn new(db: &Instance) -> Self {
        Evaluator { idx: Indexed::new(db) }
    }

    pub fn const_id(&self, c: &Constant) -> Option<u32> {
        self.idx.const_ids.get(c).copied()
    }

    pub fn constants(&self) -> &[Constant] {
        &self.idx.consts
    }

    /// `ψ(x1)` with `x1` bound to the constant with id `c`.
    pub fn holds_at(&self, psi: &FoFormula, c: u32) -> Result<bool> {
        let mut env = Env::default();
        env.set(Var(1), c);
        self.eval(psi, &mut env)
    }

    fn term(&self, t: &FoTerm, env: &Env) -> Result<Option<u32>> {
        match t {
            FoTerm::Var(v) => env.get(*v).map(Some).ok_or(Error::UnboundVariable(v.0)),
            FoTerm::Const(c) => Ok(self.const_id(c)),
        }
    }

    fn successors(&self, rel: &RelName, key: u32) -> Vec<u32> {
        let Some(&r) = self.idx.rel_ids.get(rel) else { return Vec::new() };
        match self.idx.block(r, key) {
            Some(b) => self.idx.blocks[b as usize].iter().map(|&f| self.idx.facts[f as usize].2).collect(),
            None => Vec::new(),
        }
    }

    /// Candidate values for `v` when the body is guarded.
    fn guard(&self, v: Var, body: &FoFormula, env: &Env, universal: bool) -> Result<Option<Vec<u32>>> {
        let g = match (universal, body) {
            (true, FoFormula::Implies(a, _)) => a.as_ref(),
            (false, FoFormula::And(a, b)) => {
                if let FoFormula::Eq(x, c) = b.as_ref() {
                    if *x == v {
                        return Ok(Some(self.const_id(c).into_iter().collect()));
                    }
                }
                a.as_ref()
            }
            (false, other) => other,
            _ => return Ok(None),
        };
        match g {
            FoFormula::Atom { rel, key, value: FoTerm::Var(x) } if *x == v && *key != FoTerm::Var(v) => {
                match self.term(key, env)? {
                    Some(k) => Ok(Some(self.successors(rel, k))),
                    None => Ok(Some(Vec::new())),
                }
            }
            _ => Ok(None),
        }
    }

    fn eval(&self, f: &FoFormula, env: &mut Env) -> Result<bool> {
        match f {
            FoFormula::Atom { rel, key, value } => {
                let (Some(k), Some(v)) = (self.term(key, env)?, self.term(value, env)?) else {
                    return Ok(false);
                };
                Ok(self.successors(rel, k).contains(&v))
            }
            FoFormula::Eq(v, c) => {
                let x = env.get(*v).ok_or(Error::UnboundVariable(v.0))?;
                Ok(self.const_id(c) == Some(x))
            }
            FoFormula::And(a, b) => Ok(self.eval(a, env)? && self.eval(b, env)?),
            FoFormula::Implies(a, b) => Ok(!self.eval(a, env)? || self.eval(b, env)?),
            FoFormula::Exists(v, body) | FoFormula::Forall(v, body) => {
                let universal = matches!(f, FoFormula::Forall(..));
                let domain = match self.guard(*v, body, env, universal)? {
                    Some(d) => d,
                    None => (0..self.idx.n_consts() as u32).collect(),
                };
                for c in domain {
                    let saved = env.set(*v, c);
                    let r = self.eval(body, env);
                    env.set(*v, saved);
                    if r? != universal {
                        return Ok(!universal);
                    }
                }
                Ok(universal)
            }
        }
    }
}
