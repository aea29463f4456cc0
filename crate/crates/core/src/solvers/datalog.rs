//! Linear Datalog with stratified negation for the `P`/`O` predicates of
//! the NL procedure, emitted as text.
//!
//! The program is built for queries of the form `s (uv)^e w v`. Relation
//! `R` becomes predicate `r`; `rkey(X)` holds when `X` is the key of some
//! `R`-fact, `c(X)` ranges over the active domain and
//! `consistent(X1,X2,X3,X4)` states that two key-equal facts `(X1,X2)` and
//! `(X3,X4)` of the same relation agree on the value. These are left as
//! input predicates.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::solvers::nl::b2b_split;
use crate::words::{RelName, Word};

const RESERVED: &[&str] = &["c", "p", "o", "consistent", "uvterminal", "wvterminal", "uvpath"];

struct Lit {
    neg: bool,
    pred: String,
    args: Vec<usize>,
}

struct Rule {
    head: Lit,
    body: Vec<Lit>,
}

fn lit(pred: &str, args: &[usize]) -> Lit {
    Lit { neg: false, pred: pred.to_string(), args: args.to_vec() }
}

fn not(pred: &str, args: &[usize]) -> Lit {
    Lit { neg: true, pred: pred.to_string(), args: args.to_vec() }
}

impl Rule {
    /// Rules with at most two variables use `X`, `Y`; others `X1, X2, ...`.
    fn render(&self) -> String {
        let vars: BTreeSet<usize> =
            std::iter::once(&self.head).chain(&self.body).flat_map(|l| l.args.iter().copied()).collect();
        let name = |v: usize| {
            if vars.len() <= 2 {
                let pos = vars.iter().position(|&x| x == v).unwrap();
                ["X", "Y"][pos].to_string()
            } else {
                format!("X{v}")
            }
        };
        let show = |l: &Lit| {
            let args: Vec<String> = l.args.iter().map(|&v| name(v)).collect();
            format!("{}{}({})", if l.neg { "not " } else { "" }, l.pred, args.join(","))
        };
        let body: Vec<String> = self.body.iter().map(show).collect();
        format!("{} :- {}.", show(&self.head), body.join(", "))
    }
}

struct Names {
    prefixed: bool,
}

impl Names {
    fn rel(&self, r: &RelName) -> String {
        let low = r.as_str().to_ascii_lowercase();
        if self.prefixed {
            format!("rel_{low}")
        } else {
            low
        }
    }

    fn key(&self, r: &RelName) -> String {
        format!("{}key", self.rel(r))
    }
}

/// Atoms of `word` chained from variable `from`.
fn chain(names: &Names, word: &[RelName], from: usize) -> Vec<Lit> {
    word.iter().enumerate().map(|(i, r)| lit(&names.rel(r), &[from + i, from + i + 1])).collect()
}

/// Rules saying that some path with a proper prefix of the self-join-free
/// `word` as trace cannot be extended.
fn terminal_rules(names: &Names, head: &str, word: &[RelName]) -> Vec<Rule> {
    let mut out = vec![Rule { head: lit(head, &[1]), body: vec![lit("c", &[1]), not(&names.key(&word[0]), &[1])] }];
    for i in 1..word.len() {
        let mut body = chain(names, &word[..i], 1);
        body.push(not(&names.key(&word[i]), &[i + 1]));
        out.push(Rule { head: lit(head, &[1]), body });
    }
    out
}

/// Emits the program for `q`; requires a factorization `s (uv)^e w v` with
/// a repeating prefix.
pub fn emit_datalog(q: &Word) -> Result<String> {
    let plan = b2b_split(q).ok_or_else(|| Error::Precondition("B2B witness required".into()))?;
    let lowered: Vec<String> = q.alphabet().iter().map(|r| r.as_str().to_ascii_lowercase()).collect();
    let clash = lowered.iter().collect::<BTreeSet<_>>().len() != lowered.len()
        || lowered.iter().any(|l| RESERVED.contains(&l.as_str()) || l.ends_with("terminal"));
    let names = Names { prefixed: clash };

    let uv = plan.block.symbols();
    let wv = plan.tail.symbols();
    let s = plan.s.symbols();
    let e = (plan.prefix.len() - s.len()) / uv.len();
    let a_name = if s.is_empty() {
        format!("uv{e}terminal")
    } else {
        let low: String = s.iter().map(|r| r.as_str().to_ascii_lowercase()).collect();
        format!("{low}_uv{e}terminal")
    };

    let mut groups: Vec<Vec<Rule>> = Vec::new();

    let mut g = terminal_rules(&names, "uvterminal", uv);
    g.extend(terminal_rules(&names, "wvterminal", wv));
    groups.push(g);

    let mut g = Vec::new();
    if !s.is_empty() {
        g.extend(terminal_rules(&names, &a_name, s));
    }
    for i in 0..e {
        let pre: Vec<RelName> = s.iter().chain(uv.iter().cycle().take(i * uv.len())).cloned().collect();
        let mut body = chain(&names, &pre, 1);
        body.push(lit("uvterminal", &[pre.len() + 1]));
        g.push(Rule { head: lit(&a_name, &[1]), body });
    }
    groups.push(g);

    let l = uv.len();
    let mut base = chain(&names, uv, 1);
    base.extend((1..=l + 1).map(|v| lit("wvterminal", &[v])));
    let mut step = vec![lit("uvpath", &[1, 2])];
    step.extend(chain(&names, uv, 2));
    step.extend((3..=l + 2).map(|v| lit("wvterminal", &[v])));
    groups.push(vec![
        Rule { head: lit("uvpath", &[1, l + 1]), body: base },
        Rule { head: lit("uvpath", &[1, l + 2]), body: step },
    ]);

    groups.push(vec![
        Rule { head: lit("p", &[1]), body: vec![lit("uvterminal", &[1]), lit("wvterminal", &[1])] },
        Rule { head: lit("p", &[1]), body: vec![lit("uvpath", &[1, 2]), lit("uvterminal", &[2])] },
        Rule { head: lit("p", &[1]), body: vec![lit("uvpath", &[1, 2]), lit("uvpath", &[2, 2])] },
    ]);

    let a = plan.prefix.symbols();
    let mut body = chain(&names, a, 1);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if a[i] == a[j] {
                body.push(lit("consistent", &[i + 1, i + 2, j + 1, j + 2]));
            }
        }
    }
    body.push(lit("p", &[a.len() + 1]));
    groups
        .push(vec![Rule { head: lit("o", &[1]), body: vec![lit(&a_name, &[1])] }, Rule { head: lit("o", &[1]), body }]);

    let text: Vec<String> = groups.iter().map(|g| g.iter().map(|r| r.render() + "\n").collect::<String>()).collect();
    Ok(text.join("\n"))
}
