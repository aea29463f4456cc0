//! Seeded random words and instances for tests and workload generation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::genqueries::{GeneralizedPathQuery, Junction};
use crate::instance::{Constant, Fact, Instance};
use crate::words::{RelName, Word};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Relation names `R`, `X`, `Y`, `Z`, `S`, `T`, truncated to `size`.
pub fn alphabet(size: usize) -> Vec<RelName> {
    ["R", "X", "Y", "Z", "S", "T"][..size.min(6)].iter().map(|s| RelName::new(s).unwrap()).collect()
}

/// A word of length `1..=max_len` over `letters`.
pub fn random_word(rng: &mut SampleRng, letters: &[RelName], max_len: usize) -> Word {
    let len = rng.gen_range(1..=max_len);
    Word::new((0..len).map(|_| letters.choose(rng).unwrap().clone()).collect())
}

/// Every word of length exactly `len` over `letters`, in lexicographic
/// order of indices.
pub fn all_words(letters: &[RelName], len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                letters.iter().map(move |r| {
                    let mut w = w.clone();
                    w.push(r.clone());
                    w
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct InstanceShape {
    /// Constants are drawn from `0..pool`.
    pub pool: usize,
    pub max_blocks: usize,
    pub max_block_size: usize,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape { pool: 5, max_blocks: 10, max_block_size: 3 }
    }
}

/// An instance over `rels` with at most `shape.max_blocks` blocks. With
/// probability one half the instance also contains a path with trace
/// `hint`, so that query answers are not almost always false.
pub fn random_instance(rng: &mut SampleRng, rels: &[RelName], hint: Option<&Word>, shape: InstanceShape) -> Instance {
    let consts: Vec<Constant> = (0..shape.pool).map(|i| Constant::from(i.to_string().as_str())).collect();
    let mut db = Instance::new();
    let mut keys = std::collections::BTreeSet::new();
    if let Some(q) = hint.filter(|_| rng.gen_bool(0.5)) {
        let mut at = consts.choose(rng).unwrap().clone();
        for r in q.symbols() {
            if keys.len() >= shape.max_blocks {
                break;
            }
            let next = consts.choose(rng).unwrap().clone();
            keys.insert((r.clone(), at.clone()));
            db.insert(Fact::new(r.clone(), at, next.clone()));
            at = next;
        }
    }
    let target = rng.gen_range(1..=shape.max_blocks);
    let mut tries = 0;
    while keys.len() < target && tries < 4 * shape.max_blocks {
        tries += 1;
        let r = rels.choose(rng).unwrap().clone();
        let k = consts.choose(rng).unwrap().clone();
        if !keys.insert((r.clone(), k.clone())) {
            continue;
        }
        let size = rng.gen_range(1..=shape.max_block_size);
        for v in consts.choose_multiple(rng, size) {
            db.insert(Fact::new(r.clone(), k.clone(), v.clone()));
        }
    }
    // Widen some hinted blocks so that they become conflicts.
    let existing: Vec<Fact> = db.facts().cloned().collect();
    for f in existing {
        if db.block_of(&f.rel, &f.key).len() < shape.max_block_size && rng.gen_bool(0.3) {
            db.insert(Fact::new(f.rel.clone(), f.key.clone(), consts.choose(rng).unwrap().clone()));
        }
    }
    db
}

/// A generalized query of length `1..=max_len`; each junction is a
/// distinct constant from `0..pool` with probability `p_const`.
pub fn random_generalized(
    rng: &mut SampleRng,
    letters: &[RelName],
    max_len: usize,
    pool: usize,
    p_const: f64,
) -> GeneralizedPathQuery {
    let word = random_word(rng, letters, max_len);
    let mut free: Vec<usize> = (0..pool).collect();
    free.shuffle(rng);
    let junctions = (0..=word.len())
        .map(|_| match free.last() {
            Some(_) if rng.gen_bool(p_const) => {
                Junction::Const(Constant::from(free.pop().unwrap().to_string().as_str()))
            }
            _ => Junction::Var,
        })
        .collect();
    GeneralizedPathQuery::new(word, junctions).expect("constants are distinct")
}
