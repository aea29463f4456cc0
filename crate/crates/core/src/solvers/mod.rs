//! Decision procedures per complexity tier and the dispatcher that picks
//! one from the classification of the query.

pub mod conp;
pub mod datalog;
pub mod fixpoint;
pub mod fo;
pub mod nl;
pub mod terminal;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::{Constant, Instance};
use crate::oracle::{certain_bruteforce, Bcq};
use crate::words::{classify, Classification, Tier, Word};

pub use conp::{conp_search, SearchOutcome};
pub use datalog::emit_datalog;
pub use fixpoint::{fixpoint_run, fixpoint_solve, FixpointOutcome, FixpointRun};
pub use fo::{build_fo_rewriting, eval_fo, FoFormula, FoRewriting, FoTerm, Var};
pub use nl::{nl_plan, nl_solve, NlOutcome, NlPlan, NlWitness};
pub use terminal::{fixed_head_certain, is_terminal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Auto,
    Fo,
    Nl,
    Fixpoint,
    /// Depth-first counterexample search.
    Search,
    BruteForce,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Auto => "auto",
            Method::Fo => "fo",
            Method::Nl => "nl",
            Method::Fixpoint => "fixpoint",
            Method::Search => "search",
            Method::BruteForce => "bruteforce",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "auto" => Method::Auto,
            "fo" => Method::Fo,
            "nl" => Method::Nl,
            "fixpoint" => Method::Fixpoint,
            "search" => Method::Search,
            "bruteforce" => Method::BruteForce,
            _ => return Err(format!("unknown method {s:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub answer: bool,
    pub classification: Classification,
    /// The procedure that produced the answer.
    pub method: Method,
    pub witness: Option<Constant>,
    pub counterexample: Option<Instance>,
    /// Set when the requested procedure handed over to another one.
    pub note: Option<String>,
}

/// Decides whether every repair of `db` has a path with trace `q`.
///
/// `cap` bounds the repairs enumerated by [`Method::BruteForce`] and the
/// nodes visited by [`Method::Search`].
pub fn solve(db: &Instance, q: &Word, method: Method, cap: u64) -> Result<SolveReport> {
    let classification = classify(q)?;
    let inapplicable = |m: &str| Error::Inapplicable { method: m.into(), class: classification.tier.to_string() };
    let method = match method {
        Method::Auto => match classification.tier {
            Tier::Fo => Method::Fo,
            Tier::NlComplete => Method::Nl,
            Tier::PtimeComplete => Method::Fixpoint,
            Tier::ConpComplete => Method::Search,
        },
        Method::Fo if !classification.c1 => return Err(inapplicable("fo")),
        Method::Nl if !classification.c2 => return Err(inapplicable("nl")),
        Method::Fixpoint if !classification.c3 => return Err(inapplicable("fixpoint")),
        m => m,
    };
    let report = |answer, method, witness, counterexample, note| SolveReport {
        answer,
        classification,
        method,
        witness,
        counterexample,
        note,
    };
    Ok(match method {
        Method::Fo => {
            let rw = FoRewriting::new(q)?;
            let ev = fo::Evaluator::new(db);
            let mut witness = None;
            for c in 0..ev.constants().len() as u32 {
                if ev.holds_at(&rw.psi, c)? {
                    witness = Some(ev.constants()[c as usize].clone());
                    break;
                }
            }
            report(witness.is_some(), Method::Fo, witness, None, None)
        }
        Method::Nl => match nl_solve(db, q) {
            Ok(out) => report(out.certain, Method::Nl, out.witness, None, None),
            Err(Error::NlNotCovered(why)) => {
                let out = fixpoint::fixpoint_decide(db, q);
                let note = format!("nl procedure does not cover this query ({why}); used fixpoint");
                report(out.certain, Method::Fixpoint, out.witness, out.counterexample, Some(note))
            }
            Err(e) => return Err(e),
        },
        Method::Fixpoint => {
            let out = fixpoint::fixpoint_decide(db, q);
            report(out.certain, Method::Fixpoint, out.witness, out.counterexample, None)
        }
        Method::Search => {
            let out = conp_search(db, q, cap)?;
            report(out.certain, Method::Search, None, out.counterexample, None)
        }
        Method::BruteForce => {
            let out = certain_bruteforce(db, &Bcq::from_word(q), cap)?;
            report(out.certain, Method::BruteForce, None, out.counterexample, None)
        }
        Method::Auto => unreachable!("resolved above"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Fact;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn dispatch_examples() {
        let detour: Instance = "A(0,1)\nR(1,2)\nR(2,3)\nX(3,4)\nR(2,5)\nR(5,6)\nX(6,7)\n".parse().unwrap();
        let r = solve(&detour, &w("ARRX"), Method::Auto, 1 << 20).unwrap();
        assert!(!r.answer);
        assert_eq!(r.method, Method::Search);
        assert!(r.counterexample.unwrap().contains(&Fact::lit("R", "2", "5")));

        let branching: Instance = "R(0,1)\nR(1,2)\nR(1,3)\nR(2,3)\nX(3,4)\n".parse().unwrap();
        let r = solve(&branching, &w("RRX"), Method::Auto, 1 << 20).unwrap();
        assert!(r.answer);
        assert_eq!(r.method, Method::Nl);

        let path: Instance = "R(0,1)\nX(1,2)\nR(2,3)\nX(3,4)\n".parse().unwrap();
        let r = solve(&path, &w("RXRX"), Method::Auto, 1 << 20).unwrap();
        assert!(r.answer);
        assert_eq!((r.method, r.witness), (Method::Fo, Some(Constant::from("0"))));
    }

    #[test]
    fn fallback_and_inapplicable() {
        let db: Instance = "R(a,b)\nX(b,c)\nR(c,d)\nY(d,e)\nR(e,f)\nY(f,g)\n".parse().unwrap();
        assert!(matches!(solve(&db, &w("RXRYRY"), Method::Nl, 100), Err(Error::Inapplicable { .. })));
        assert!(matches!(solve(&db, &w("ARRX"), Method::Fixpoint, 100), Err(Error::Inapplicable { .. })));
        assert!(matches!(solve(&db, &w("RRX"), Method::Fo, 100), Err(Error::Inapplicable { .. })));
        let r = solve(&db, &w("RXRYRY"), Method::Auto, 100).unwrap();
        assert!(r.answer && r.note.is_none());
    }
}
