//! Atomic types: the complete quantifier-free description of a tuple.
//!
//! A type over `n` variables is stored as an equality pattern (a restricted
//! growth string assigning each variable to a block) plus the set of relation
//! facts that hold among the blocks. Every fact not listed is false, so the
//! literal set is complete and the representation is canonical.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{evaluate_idx, Formula};
use crate::structure::{all_tuples, Structure, Vocabulary};

/// Default cap on the number of types `enumerate_atomic_types` may produce.
pub const TYPE_CAP: usize = 1_000_000;

/// A relation fact over block indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fact {
    pub rel: String,
    pub blocks: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AtomicType {
    /// Block of each variable; blocks are numbered in order of first use.
    pub eq_pattern: Vec<usize>,
    pub facts: BTreeSet<Fact>,
}

impl AtomicType {
    pub fn arity(&self) -> usize {
        self.eq_pattern.len()
    }

    pub fn blocks(&self) -> usize {
        self.eq_pattern.iter().map(|b| b + 1).max().unwrap_or(0)
    }

    /// The equality pattern as a partition of variable positions.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut parts = vec![Vec::new(); self.blocks()];
        for (i, &b) in self.eq_pattern.iter().enumerate() {
            parts[b].push(i);
        }
        parts
    }

    /// One element per block, relations exactly the listed facts. Elements
    /// are named `b0`, `b1`, ...
    pub fn canonical_model(&self, vocab: &Vocabulary) -> Result<Structure> {
        let ids = (0..self.blocks()).map(|b| format!("b{b}")).collect();
        let mut s = Structure::new(vocab.clone(), ids)?;
        for fact in &self.facts {
            s.add_idx(&fact.rel, &fact.blocks)?;
        }
        Ok(s)
    }

    /// The tuple realizing this type in its canonical model.
    pub fn canonical_tuple(&self) -> Vec<usize> {
        self.eq_pattern.clone()
    }

    /// Type of the sub-tuple at `positions`.
    pub fn restrict(&self, positions: &[usize]) -> AtomicType {
        let mut renumber: Vec<Option<usize>> = vec![None; self.blocks()];
        let mut next = 0;
        let eq_pattern = positions
            .iter()
            .map(|&p| {
                let b = self.eq_pattern[p];
                *renumber[b].get_or_insert_with(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        let facts = self
            .facts
            .iter()
            .filter_map(|f| {
                let blocks = f
                    .blocks
                    .iter()
                    .map(|&b| renumber[b])
                    .collect::<Option<Vec<_>>>()?;
                Some(Fact {
                    rel: f.rel.clone(),
                    blocks,
                })
            })
            .collect();
        AtomicType { eq_pattern, facts }
    }

    /// Conjunction of the complete literal set over `vars`. Equalities are
    /// stated against the first variable of each block; relation literals use
    /// block representatives.
    pub fn to_formula(&self, vocab: &Vocabulary, vars: &[String]) -> Formula {
        assert_eq!(vars.len(), self.arity());
        let parts = self.partition();
        let reps: Vec<&str> = parts.iter().map(|p| vars[p[0]].as_str()).collect();
        let mut lits = Vec::new();
        for (i, &b) in self.eq_pattern.iter().enumerate() {
            if parts[b][0] != i {
                lits.push(Formula::eq(reps[b], &vars[i]));
            }
        }
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                lits.push(Formula::neq(reps[i], reps[j]));
            }
        }
        for (rel, arity) in vocab.sorted() {
            for t in all_tuples(reps.len(), arity) {
                let atom = Formula::atom(&rel, t.iter().map(|&b| reps[b]));
                let fact = Fact {
                    rel: rel.clone(),
                    blocks: t,
                };
                lits.push(if self.facts.contains(&fact) {
                    atom
                } else {
                    Formula::not(atom)
                });
            }
        }
        Formula::conjunction(lits)
    }
}

/// Canonical order: arity, then equality pattern, then fact sets compared as
/// membership vectors over the sorted fact list (absent < present).
impl Ord for AtomicType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.arity()
            .cmp(&other.arity())
            .then_with(|| self.eq_pattern.cmp(&other.eq_pattern))
            .then_with(|| {
                let first_diff = self.facts.symmetric_difference(&other.facts).min();
                match first_diff {
                    None => Ordering::Equal,
                    Some(f) if self.facts.contains(f) => Ordering::Greater,
                    Some(_) => Ordering::Less,
                }
            })
    }
}

impl PartialOrd for AtomicType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for AtomicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .partition()
            .iter()
            .map(|p| {
                let xs: Vec<String> = p.iter().map(|i| (i + 1).to_string()).collect();
                format!("{{{}}}", xs.join(","))
            })
            .collect();
        let facts: Vec<String> = self
            .facts
            .iter()
            .map(|fact| {
                let xs: Vec<String> = fact.blocks.iter().map(|b| (b + 1).to_string()).collect();
                format!("{}({})", fact.rel, xs.join(","))
            })
            .collect();
        write!(f, "[{}] {{{}}}", parts.join(""), facts.join(", "))
    }
}

/// Atomic type of the tuple (given by indices) in `a`.
pub fn atomic_type_idx(a: &Structure, tuple: &[usize]) -> AtomicType {
    let mut reps: Vec<usize> = Vec::new();
    let eq_pattern: Vec<usize> = tuple
        .iter()
        .map(|e| match reps.iter().position(|r| r == e) {
            Some(b) => b,
            None => {
                reps.push(*e);
                reps.len() - 1
            }
        })
        .collect();
    let mut facts = BTreeSet::new();
    let mut image = Vec::new();
    for (r, (rel, arity)) in a.vocab().symbols().enumerate() {
        for t in all_tuples(reps.len(), arity) {
            image.clear();
            image.extend(t.iter().map(|&b| reps[b]));
            if a.holds(r, &image) {
                facts.insert(Fact {
                    rel: rel.to_string(),
                    blocks: t,
                });
            }
        }
    }
    AtomicType { eq_pattern, facts }
}

pub fn atomic_type(a: &Structure, tuple: &[&str]) -> Result<AtomicType> {
    let idx = a.tuple_indices(tuple.iter().copied())?;
    Ok(atomic_type_idx(a, &idx))
}

/// Restricted growth strings of length `n` in lexicographic order.
pub fn restricted_growth_strings(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for b in 0..=limit {
            prefix.push(b);
            go(prefix, max.max(b), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), 0, n, &mut out);
    out
}

fn fact_universe(vocab: &Vocabulary, blocks: usize) -> Vec<Fact> {
    let mut facts = Vec::new();
    for (rel, arity) in vocab.sorted() {
        for t in all_tuples(blocks, arity) {
            facts.push(Fact {
                rel: rel.clone(),
                blocks: t,
            });
        }
    }
    facts
}

/// Number of atomic `n`-types over `vocab`, saturating at `usize::MAX`.
pub fn count_atomic_types(vocab: &Vocabulary, n: usize) -> usize {
    restricted_growth_strings(n)
        .iter()
        .map(|rgs| {
            let blocks = rgs.iter().map(|b| b + 1).max().unwrap_or(0);
            let m = fact_universe(vocab, blocks).len();
            if m >= usize::BITS as usize {
                usize::MAX
            } else {
                1usize << m
            }
        })
        .fold(0usize, |acc, c| acc.saturating_add(c))
}

pub fn enumerate_atomic_types(vocab: &Vocabulary, n: usize) -> Result<Vec<AtomicType>> {
    enumerate_atomic_types_capped(vocab, n, TYPE_CAP)
}

/// Every consistent atomic `n`-type exactly once, in canonical order.
pub fn enumerate_atomic_types_capped(
    vocab: &Vocabulary,
    n: usize,
    cap: usize,
) -> Result<Vec<AtomicType>> {
    let total = count_atomic_types(vocab, n);
    if total > cap {
        return Err(Error::cap(
            format!("enumerating {n}-types ({total} types)"),
            cap,
        ));
    }
    let mut out = Vec::with_capacity(total);
    for rgs in restricted_growth_strings(n) {
        let blocks = rgs.iter().map(|b| b + 1).max().unwrap_or(0);
        let universe = fact_universe(vocab, blocks);
        let m = universe.len();
        for mask in 0u64..(1u64 << m) {
            let facts = universe
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> (m - 1 - j) & 1 == 1)
                .map(|(_, f)| f.clone())
                .collect();
            out.push(AtomicType {
                eq_pattern: rgs.clone(),
                facts,
            });
        }
    }
    Ok(out)
}

/// A quantifier-free formula in normal form: the disjunction of a set of
/// atomic types over a fixed tuple of variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDisjunction {
    pub vars: Vec<String>,
    pub types: BTreeSet<AtomicType>,
}

impl TypeDisjunction {
    pub fn empty(vars: Vec<String>) -> Self {
        TypeDisjunction {
            vars,
            types: BTreeSet::new(),
        }
    }

    pub fn is_false(&self) -> bool {
        self.types.is_empty()
    }

    /// Whether the tuple (assigned to `vars` in order) satisfies the disjunction.
    pub fn holds_idx(&self, a: &Structure, tuple: &[usize]) -> bool {
        self.types.contains(&atomic_type_idx(a, tuple))
    }

    pub fn to_formula(&self, vocab: &Vocabulary) -> Formula {
        Formula::disjunction(
            self.types
                .iter()
                .map(|t| t.to_formula(vocab, &self.vars))
                .collect(),
        )
    }

    /// All `vars`-types not in the disjunction.
    pub fn complement(&self, vocab: &Vocabulary) -> Result<TypeDisjunction> {
        let types = enumerate_atomic_types(vocab, self.vars.len())?
            .into_iter()
            .filter(|t| !self.types.contains(t))
            .collect();
        Ok(TypeDisjunction {
            vars: self.vars.clone(),
            types,
        })
    }

    /// Same formula expressed over `vars`, which must contain every variable
    /// of `self`.
    pub fn lift(&self, vocab: &Vocabulary, vars: &[String]) -> Result<TypeDisjunction> {
        if vars == self.vars.as_slice() {
            return Ok(self.clone());
        }
        let positions = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::Invalid(format!("cannot lift: `{v}` missing")))
            })
            .collect::<Result<Vec<_>>>()?;
        let types = enumerate_atomic_types(vocab, vars.len())?
            .into_iter()
            .filter(|t| self.types.contains(&t.restrict(&positions)))
            .collect();
        Ok(TypeDisjunction {
            vars: vars.to_vec(),
            types,
        })
    }
}

impl fmt::Display for TypeDisjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.types.is_empty() {
            return write!(f, "false");
        }
        let parts: Vec<String> = self.types.iter().map(|t| t.to_string()).collect();
        write!(f, "({}) {}", self.vars.join(","), parts.join(" | "))
    }
}

/// Types over `vars` whose canonical model satisfies the quantifier-free `phi`.
pub fn qf_to_type_disjunction(
    phi: &Formula,
    vocab: &Vocabulary,
    vars: &[String],
) -> Result<TypeDisjunction> {
    if !phi.is_quantifier_free() {
        return Err(Error::NotQuantifierFree(phi.to_string()));
    }
    if let Some(v) = phi.free_vars().into_iter().find(|v| !vars.contains(v)) {
        return Err(Error::UnassignedVariable(v));
    }
    let mut types = BTreeSet::new();
    for t in enumerate_atomic_types(vocab, vars.len())? {
        let model = t.canonical_model(vocab)?;
        let env: Vec<(String, usize)> = vars.iter().cloned().zip(t.canonical_tuple()).collect();
        if evaluate_idx(&model, phi, &env)? {
            types.insert(t);
        }
    }
    Ok(TypeDisjunction {
        vars: vars.to_vec(),
        types,
    })
}
