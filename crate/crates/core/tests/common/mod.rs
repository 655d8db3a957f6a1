//! Independent reference implementations and generators shared by the
//! integration tests. Nothing here calls the search code it is compared
//! against.

#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use embq::catalog::complete;
use embq::logic::{Binding, Formula, QuantifierDef, Registry};
use embq::{Structure, Vocabulary};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All tuples of length `len` over `0..n`, last position fastest.
pub fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn random_structure(rng: &mut impl Rng, vocab: &Vocabulary, n: usize, p: f64) -> Structure {
    let mut s = Structure::numbered(vocab.clone(), n).unwrap();
    for (name, arity) in vocab.sorted() {
        for t in tuples(n, arity) {
            if rng.gen_bool(p) {
                s.add_idx(&name, &t).unwrap();
            }
        }
    }
    s
}

/// Every {E:2}-structure on `n` elements, by bitmask over the n² pairs.
pub fn all_graphs(n: usize) -> Vec<Structure> {
    let pairs = tuples(n, 2);
    (0..1u32 << pairs.len())
        .map(|mask| {
            let mut s = Structure::numbered(Vocabulary::graph(), n).unwrap();
            for (i, t) in pairs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    s.add_idx("E", t).unwrap();
                }
            }
            s
        })
        .collect()
}

/// Random {E:2}-structure with 0..=max_n elements.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Structure> {
    (0..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let mut s = Structure::numbered(Vocabulary::graph(), n).unwrap();
            for (i, t) in tuples(n, 2).iter().enumerate() {
                if bits[i] {
                    s.add_idx("E", t).unwrap();
                }
            }
            s
        })
    })
}

fn relation_list(a: &Structure) -> Vec<(String, usize)> {
    a.vocab().sorted()
}

fn holds(a: &Structure, rel: &str, t: &[usize]) -> bool {
    a.holds(a.rel_index(rel).unwrap(), t)
}

/// Injections `0..n → 0..m` in lexicographic order.
pub fn injections(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(
        n: usize,
        m: usize,
        cur: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for y in 0..m {
            if !used[y] {
                used[y] = true;
                cur.push(y);
                go(n, m, cur, used, out);
                cur.pop();
                used[y] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, m, &mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Does `f` preserve and reflect every relation.
pub fn is_embedding(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    let mut image = f.to_vec();
    image.sort_unstable();
    image.dedup();
    if image.len() != f.len() {
        return false;
    }
    relation_list(a).iter().all(|(rel, arity)| {
        tuples(a.len(), *arity).iter().all(|t| {
            let ft: Vec<usize> = t.iter().map(|&x| f[x]).collect();
            holds(a, rel, t) == holds(b, rel, &ft)
        })
    })
}

pub fn is_homomorphism(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    relation_list(a).iter().all(|(rel, arity)| {
        tuples(a.len(), *arity).iter().all(|t| {
            let ft: Vec<usize> = t.iter().map(|&x| f[x]).collect();
            !holds(a, rel, t) || holds(b, rel, &ft)
        })
    })
}

/// All embeddings sending each pinned `x` to `y`, by trying every injection.
pub fn brute_embeddings(a: &Structure, b: &Structure, pins: &[(usize, usize)]) -> Vec<Vec<usize>> {
    injections(a.len(), b.len())
        .into_iter()
        .filter(|f| pins.iter().all(|&(x, y)| f[x] == y) && is_embedding(a, b, f))
        .collect()
}

/// Whether an embedding extending `pins` exists, by plain backtracking that
/// checks every relation tuple among the elements assigned so far.
pub fn backtrack_embeds(a: &Structure, b: &Structure, pins: &[(usize, usize)]) -> bool {
    fn consistent(a: &Structure, b: &Structure, f: &[usize]) -> bool {
        let k = f.len() - 1;
        relation_list(a).iter().all(|(rel, arity)| {
            tuples(f.len(), *arity)
                .iter()
                .filter(|t| t.contains(&k))
                .all(|t| {
                    let ft: Vec<usize> = t.iter().map(|&x| f[x]).collect();
                    holds(a, rel, t) == holds(b, rel, &ft)
                })
        })
    }
    fn go(a: &Structure, b: &Structure, pins: &[(usize, usize)], f: &mut Vec<usize>) -> bool {
        let x = f.len();
        if x == a.len() {
            return true;
        }
        let pinned = pins.iter().find(|p| p.0 == x).map(|p| p.1);
        for y in 0..b.len() {
            if pinned.is_some_and(|p| p != y) || f.contains(&y) {
                continue;
            }
            f.push(y);
            if consistent(a, b, f) && go(a, b, pins, f) {
                return true;
            }
            f.pop();
        }
        false
    }
    let conflicting = pins
        .iter()
        .any(|p| pins.iter().any(|q| (p.0 == q.0) != (p.1 == q.1)));
    a.len() <= b.len() && !conflicting && go(a, b, pins, &mut Vec::new())
}

pub fn brute_embeds(a: &Structure, b: &Structure) -> bool {
    !brute_embeddings(a, b, &[]).is_empty()
}

pub fn brute_homomorphism_exists(a: &Structure, b: &Structure) -> bool {
    tuples(b.len(), a.len())
        .iter()
        .any(|f| is_homomorphism(a, b, f))
}

pub fn brute_isomorphic(a: &Structure, b: &Structure) -> bool {
    a.len() == b.len() && brute_embeds(a, b)
}

/// Unmemoized game value in the textbook order: Duplicator commits to a
/// pair (f, g), then Spoiler picks a side and a tuple, repetitions allowed,
/// of any length up to the size of that side.
pub fn oracle_survives(a: &Structure, b: &Structure, pairs: &[(usize, usize)], n: usize) -> bool {
    if n == 0 {
        return true;
    }
    let back: Vec<(usize, usize)> = pairs.iter().map(|&(x, y)| (y, x)).collect();
    let fs = brute_embeddings(a, b, pairs);
    let gs = brute_embeddings(b, a, &back);
    let moves_a: Vec<Vec<usize>> = (0..=a.len()).flat_map(|k| tuples(a.len(), k)).collect();
    let moves_b: Vec<Vec<usize>> = (0..=b.len()).flat_map(|k| tuples(b.len(), k)).collect();
    let extend = |extra: Vec<(usize, usize)>| {
        let mut p = pairs.to_vec();
        p.extend(extra);
        p.sort_unstable();
        p.dedup();
        p
    };
    fs.iter().any(|f| {
        gs.iter().any(|g| {
            moves_a.iter().all(|c| {
                oracle_survives(a, b, &extend(c.iter().map(|&x| (x, f[x])).collect()), n - 1)
            }) && moves_b.iter().all(|d| {
                oracle_survives(a, b, &extend(d.iter().map(|&y| (g[y], y)).collect()), n - 1)
            })
        })
    })
}

pub fn unary() -> Vocabulary {
    Vocabulary::new([("U", 1)]).unwrap()
}

/// The quantifiers used across tests: closures of K2 and K3, a count, a
/// homomorphism closure and a substructure-closed complement.
pub fn test_registry() -> Registry {
    let mut reg = Registry::new();
    reg.insert(QuantifierDef::embedding_closure("Qk2", vec![complete(2)]).unwrap());
    reg.insert(QuantifierDef::count_at_least("Qhas2", "U", 2).unwrap());
    reg.insert(QuantifierDef::homomorphism_closure("Qhom", vec![complete(2)]).unwrap());
    reg.insert(
        QuantifierDef::complement(
            "Qnot",
            QuantifierDef::embedding_closure("Qnot.inner", vec![complete(3)]).unwrap(),
        )
        .unwrap(),
    );
    reg.insert(QuantifierDef::embedding_closure("Qtri", vec![complete(3)]).unwrap());
    reg
}

/// Random formulas over a vocabulary and registry. Every connective and
/// quantifier uses one unit of depth, so the quantifier rank is at most the
/// depth.
pub struct FormulaGen<'a> {
    pub vocab: &'a Vocabulary,
    pub quantifiers: Vec<Arc<QuantifierDef>>,
    pub pool: Vec<String>,
}

impl<'a> FormulaGen<'a> {
    pub fn new(vocab: &'a Vocabulary, reg: &Registry) -> Self {
        FormulaGen {
            vocab,
            quantifiers: reg.iter().cloned().collect(),
            pool: ["x", "y", "z", "w"].iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn without_quantifiers(mut self) -> Self {
        self.quantifiers.clear();
        self
    }

    fn leaf(&self, rng: &mut impl Rng, scope: &[String]) -> Formula {
        if scope.is_empty() {
            return if rng.gen_bool(0.5) {
                Formula::True
            } else {
                Formula::False
            };
        }
        let symbols = self.vocab.sorted();
        if symbols.is_empty() || rng.gen_bool(0.25) {
            let x = scope.choose(rng).unwrap();
            let y = scope.choose(rng).unwrap();
            return Formula::eq(x, y);
        }
        let (rel, arity) = symbols.choose(rng).unwrap();
        let args: Vec<String> = (0..*arity)
            .map(|_| scope.choose(rng).unwrap().clone())
            .collect();
        Formula::atom(rel, args)
    }

    pub fn formula(&self, rng: &mut impl Rng, depth: usize, scope: &[String]) -> Formula {
        if depth == 0 || rng.gen_bool(0.15) {
            return self.leaf(rng, scope);
        }
        let pick = rng.gen_range(0..if self.quantifiers.is_empty() { 6 } else { 8 });
        match pick {
            0 => Formula::not(self.formula(rng, depth - 1, scope)),
            1 => Formula::and(vec![
                self.formula(rng, depth - 1, scope),
                self.formula(rng, depth - 1, scope),
            ]),
            2 => Formula::or(vec![
                self.formula(rng, depth - 1, scope),
                self.formula(rng, depth - 1, scope),
            ]),
            3..=5 => {
                let v = self.pool.choose(rng).unwrap().clone();
                let mut inner = scope.to_vec();
                if !inner.contains(&v) {
                    inner.push(v.clone());
                }
                let body = self.formula(rng, depth - 1, &inner);
                if pick == 5 {
                    Formula::forall(&v, body)
                } else {
                    Formula::exists(&v, body)
                }
            }
            _ => {
                let q = self.quantifiers.choose(rng).unwrap().clone();
                let bindings = (0..q.sigma.len())
                    .map(|i| {
                        let vars: Vec<String> = self
                            .pool
                            .choose_multiple(rng, q.sigma.arity_at(i))
                            .cloned()
                            .collect();
                        let mut inner = scope.to_vec();
                        for v in &vars {
                            if !inner.contains(v) {
                                inner.push(v.clone());
                            }
                        }
                        Binding::new(vars, self.formula(rng, depth - 1, &inner))
                    })
                    .collect();
                Formula::qapp(q, bindings)
            }
        }
    }

    pub fn sentence(&self, rng: &mut impl Rng, depth: usize) -> Formula {
        self.formula(rng, depth, &[])
    }
}

/// A random permutation of `a` with fresh numeric ids.
pub fn shuffled(rng: &mut impl Rng, a: &Structure) -> Structure {
    let mut perm: Vec<usize> = (0..a.len()).collect();
    perm.shuffle(rng);
    a.permute(&perm, (0..a.len()).map(|i| i.to_string()).collect())
        .unwrap()
}
