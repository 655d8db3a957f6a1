//! Homogeneity checking, quantifier elimination on homogeneous structures,
//! and stabilization of formulas along embedding chains.
//!
//! On a finite structure every self-embedding is a bijection, so
//! quasi-homogeneity and homogeneity coincide and the checker searches for
//! automorphisms.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{evaluate_idx, evaluate_sentence, Binding, Formula, QuantifierDef};
use crate::morphism::{embeds, find_idx, Matcher, MorphismKind};
use crate::structure::{all_tuples, Structure, Vocabulary};
use crate::types::{atomic_type_idx, qf_to_type_disjunction, AtomicType, TypeDisjunction};

/// Default size cap for the homogeneity checker.
pub const HOMOG_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub homogeneous: bool,
    /// Two tuples of equal atomic type that no self-embedding relates.
    pub counterexample: Option<(Vec<String>, Vec<String>)>,
    /// Orbit representatives examined, over all tuple lengths.
    pub representatives: usize,
}

pub fn is_quasi_homogeneous(a: &Structure) -> Result<HomogeneityReport> {
    is_quasi_homogeneous_with(a, MorphismKind::Isomorphism, HOMOG_CAP)
}

/// Level-by-level check. Level k keeps one representative per orbit of
/// injective k-tuples; for each representative ā and each pair of
/// extensions ā c, ā d of equal type, a self-map of `kind` fixing ā and
/// sending c to d must exist. When all pass, the representatives ā c (one
/// per type) are exactly the orbits of level k + 1.
pub fn is_quasi_homogeneous_with(
    a: &Structure,
    kind: MorphismKind,
    cap: usize,
) -> Result<HomogeneityReport> {
    if a.len() > cap {
        return Err(Error::cap(
            format!("homogeneity check on {} elements", a.len()),
            cap,
        ));
    }
    let matcher = Matcher::new(kind, a, a)?;
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    let mut representatives = 1;
    for _ in 0..a.len() {
        let mut next = Vec::new();
        for rep in &level {
            let mut groups: Vec<(AtomicType, usize)> = Vec::new();
            let mut ext = rep.clone();
            ext.push(0);
            for c in (0..a.len()).filter(|c| !rep.contains(c)) {
                *ext.last_mut().unwrap() = c;
                let t = atomic_type_idx(a, &ext);
                match groups.iter().find(|(u, _)| *u == t) {
                    Some(&(_, c0)) => {
                        let mut pins: Vec<(usize, usize)> = rep.iter().map(|&x| (x, x)).collect();
                        pins.push((c0, c));
                        if matcher.find(&pins)?.is_none() {
                            let mut left = rep.clone();
                            left.push(c0);
                            return Ok(HomogeneityReport {
                                homogeneous: false,
                                counterexample: Some((a.tuple_ids(&left), a.tuple_ids(&ext))),
                                representatives,
                            });
                        }
                    }
                    None => {
                        groups.push((t, c));
                        next.push(ext.clone());
                    }
                }
            }
        }
        representatives += next.len();
        level = next;
    }
    Ok(HomogeneityReport {
        homogeneous: true,
        counterexample: None,
        representatives,
    })
}

fn require_homogeneous(a: &Structure) -> Result<()> {
    let report = is_quasi_homogeneous(a)?;
    match report.counterexample {
        None => Ok(()),
        Some((left, right)) => Err(Error::NotQuasiHomogeneous { left, right }),
    }
}

/// Realized types of tuples satisfying `phi`, assigned to `vars` in order.
fn realized_types(a: &Structure, phi: &Formula, vars: &[String]) -> Result<BTreeSet<AtomicType>> {
    let mut types = BTreeSet::new();
    for t in all_tuples(a.len(), vars.len()) {
        let env: Vec<(String, usize)> = vars.iter().cloned().zip(t.iter().copied()).collect();
        if evaluate_idx(a, phi, &env)? {
            types.insert(atomic_type_idx(a, &t));
        }
    }
    Ok(types)
}

/// Exhaustively check A ⊨ ∀x̄ (θ ↔ φ), evaluating θ as a formula.
pub fn verify_equivalence(a: &Structure, phi: &Formula, theta: &TypeDisjunction) -> Result<bool> {
    let theta_f = theta.to_formula(a.vocab());
    for t in all_tuples(a.len(), theta.vars.len()) {
        let env: Vec<(String, usize)> = theta.vars.iter().cloned().zip(t.iter().copied()).collect();
        if evaluate_idx(a, phi, &env)? != evaluate_idx(a, &theta_f, &env)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// θ = the atomic types realized in A by tuples satisfying φ. Free
/// variables are taken in order of first occurrence.
pub fn eliminate_quantifiers(a: &Structure, phi: &Formula) -> Result<TypeDisjunction> {
    require_homogeneous(a)?;
    let vars = phi.free_vars();
    let theta = TypeDisjunction {
        types: realized_types(a, phi, &vars)?,
        vars,
    };
    if !verify_equivalence(a, phi, &theta)? {
        return Err(Error::VerificationFailed(format!(
            "type disjunction for `{phi}` is not equivalent on {a}"
        )));
    }
    Ok(theta)
}

/// A sequence of structures with each member embeddable in the next.
#[derive(Clone, Debug)]
pub struct Chain {
    structures: Vec<Structure>,
    embeddings: Vec<Vec<usize>>,
}

impl Chain {
    pub fn new(structures: Vec<Structure>) -> Result<Chain> {
        if let Some(first) = structures.first() {
            for s in &structures[1..] {
                first.vocab().ensure_same(s.vocab())?;
            }
        }
        let mut embeddings = Vec::new();
        for (i, pair) in structures.windows(2).enumerate() {
            match find_idx(MorphismKind::Embedding, &pair[0], &pair[1], &[])? {
                Some(f) => embeddings.push(f),
                None => return Err(Error::NotAChain { index: i }),
            }
        }
        Ok(Chain {
            structures,
            embeddings,
        })
    }

    pub fn len(&self) -> usize {
        self.structures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structures.is_empty()
    }

    pub fn structures(&self) -> &[Structure] {
        &self.structures
    }

    /// Embedding of member i into member i + 1, as indices.
    pub fn embedding(&self, i: usize) -> &[usize] {
        &self.embeddings[i]
    }

    fn vocab(&self) -> Result<&Vocabulary> {
        self.structures
            .first()
            .map(Structure::vocab)
            .ok_or_else(|| Error::Invalid("empty chain".into()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeChainReport {
    pub formula: String,
    pub vars: Vec<String>,
    /// T_i for each member of the chain.
    pub type_sets: Vec<BTreeSet<AtomicType>>,
    /// T_i ⊆ T_{i+1} for every i.
    pub monotone: bool,
    /// Least k with T_k = T_j for all later j in the chain.
    pub stabilization_index: usize,
    pub theta: TypeDisjunction,
}

fn require_chain_homogeneous(chain: &Chain) -> Result<()> {
    for s in chain.structures() {
        require_homogeneous(s)?;
    }
    Ok(())
}

fn check_shape(phi: &Formula) -> Result<()> {
    match phi {
        Formula::QApp { bindings, .. } if bindings.iter().all(|b| b.body.is_quantifier_free()) => {
            Ok(())
        }
        _ => Err(Error::FormulaShape(format!(
            "expected a quantifier application over quantifier-free bodies, got `{phi}`"
        ))),
    }
}

fn type_chain_over(chain: &Chain, phi: &Formula, vars: &[String]) -> Result<TypeChainReport> {
    let type_sets = chain
        .structures()
        .iter()
        .map(|s| realized_types(s, phi, vars))
        .collect::<Result<Vec<_>>>()?;
    let monotone = type_sets.windows(2).all(|w| w[0].is_subset(&w[1]));
    let last = type_sets.len().saturating_sub(1);
    let mut k = last;
    while k > 0 && type_sets[k - 1] == type_sets[last] {
        k -= 1;
    }
    Ok(TypeChainReport {
        formula: phi.to_string(),
        vars: vars.to_vec(),
        monotone,
        stabilization_index: k,
        theta: TypeDisjunction {
            vars: vars.to_vec(),
            types: type_sets.last().cloned().unwrap_or_default(),
        },
        type_sets,
    })
}

/// Types realized together with φ = Q(x̄ψ) along the chain.
pub fn type_chain(chain: &Chain, phi: &Formula) -> Result<TypeChainReport> {
    chain.vocab()?;
    check_shape(phi)?;
    require_chain_homogeneous(chain)?;
    type_chain_over(chain, phi, &phi.free_vars())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stabilization {
    /// From this chain index on, θ is equivalent to the formula.
    pub index: usize,
    pub theta: TypeDisjunction,
}

/// Recursive elimination along the chain: quantifier-free parts become type
/// disjunctions; each quantifier application over already-eliminated bodies
/// is stabilized with [`type_chain`]. First-order ∃ is the counting
/// quantifier with threshold 1, and ∀ is ¬∃¬.
pub fn stabilize_formula(chain: &Chain, phi: &Formula) -> Result<Stabilization> {
    let vocab = chain.vocab()?.clone();
    require_chain_homogeneous(chain)?;
    let exists = Arc::new(QuantifierDef::count_at_least("exists", "U", 1)?);
    let out = stabilize(chain, &vocab, phi, &exists)?;
    for s in &chain.structures()[out.index..] {
        if !verify_equivalence(s, phi, &out.theta)? {
            return Err(Error::VerificationFailed(format!(
                "stabilized form of `{phi}` disagrees on {s}"
            )));
        }
    }
    Ok(out)
}

fn stabilize(
    chain: &Chain,
    vocab: &Vocabulary,
    phi: &Formula,
    exists: &Arc<QuantifierDef>,
) -> Result<Stabilization> {
    let vars = phi.free_vars();
    if phi.is_quantifier_free() {
        return Ok(Stabilization {
            index: 0,
            theta: qf_to_type_disjunction(phi, vocab, &vars)?,
        });
    }
    match phi {
        Formula::Not(g) => {
            let s = stabilize(chain, vocab, g, exists)?;
            Ok(Stabilization {
                index: s.index,
                theta: s.theta.complement(vocab)?,
            })
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let conj = matches!(phi, Formula::And(_));
            let mut index = 0;
            let mut acc: Option<BTreeSet<AtomicType>> = None;
            for g in gs {
                let s = stabilize(chain, vocab, g, exists)?;
                index = index.max(s.index);
                let lifted = s.theta.lift(vocab, &vars)?.types;
                acc = Some(match acc {
                    None => lifted,
                    Some(prev) if conj => prev.intersection(&lifted).cloned().collect(),
                    Some(prev) => prev.union(&lifted).cloned().collect(),
                });
            }
            Ok(Stabilization {
                index,
                theta: TypeDisjunction {
                    vars,
                    types: acc.unwrap_or_default(),
                },
            })
        }
        Formula::Exists(v, g) => {
            let app = Formula::QApp {
                quantifier: exists.clone(),
                bindings: vec![Binding {
                    vars: vec![v.clone()],
                    body: (**g).clone(),
                }],
            };
            stabilize(chain, vocab, &app, exists)
        }
        Formula::Forall(v, g) => {
            let dual = Formula::not(Formula::exists(v, Formula::not((**g).clone())));
            stabilize(chain, vocab, &dual, exists)
        }
        Formula::QApp {
            quantifier,
            bindings,
        } => {
            let mut index = 0;
            let mut reduced = Vec::with_capacity(bindings.len());
            for b in bindings {
                let s = stabilize(chain, vocab, &b.body, exists)?;
                index = index.max(s.index);
                reduced.push(Binding {
                    vars: b.vars.clone(),
                    body: s.theta.to_formula(vocab),
                });
            }
            let app = Formula::QApp {
                quantifier: quantifier.clone(),
                bindings: reduced,
            };
            let report = type_chain_over(chain, &app, &vars)?;
            let sets = &report.type_sets;
            // re-measure stabilization on the suffix where the bodies are exact
            let last = sets.len() - 1;
            let mut k = last;
            while k > index && sets[k - 1] == sets[last] {
                k -= 1;
            }
            if k > 0 && k == last {
                return Err(Error::ChainTooShort {
                    subformula: phi.to_string(),
                });
            }
            Ok(Stabilization {
                index: k.max(index),
                theta: report.theta,
            })
        }
        Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => unreachable!(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntichainMember {
    /// Position in the catalog.
    pub index: usize,
    pub truth: bool,
}

/// A pairwise incomparable set of stabilizers of φ such that every catalog
/// member is comparable with one of them. Greedy in catalog order; if the
/// greedy pass gets stuck, the smallest such set is found by exhaustive
/// search.
pub fn stabilizer_antichain(catalog: &[Structure], phi: &Formula) -> Result<Vec<AntichainMember>> {
    let first = catalog
        .first()
        .ok_or_else(|| Error::Invalid("empty catalog".into()))?;
    for s in catalog {
        first.vocab().ensure_same(s.vocab())?;
    }
    let n = catalog.len();
    let truth = catalog
        .iter()
        .map(|s| evaluate_sentence(s, phi))
        .collect::<Result<Vec<_>>>()?;
    let mut le = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            le[i][j] = i == j || embeds(&catalog[i], &catalog[j])?;
        }
    }
    let comparable = |i: usize, j: usize| le[i][j] || le[j][i];
    let stabilizer: Vec<bool> = (0..n)
        .map(|i| (0..n).all(|j| !le[i][j] || truth[j] == truth[i]))
        .collect();
    let covers = |set: &[usize]| (0..n).all(|j| set.iter().any(|&i| comparable(i, j)));

    let mut chosen: Vec<usize> = Vec::new();
    let mut remaining: Vec<usize> = (0..n).collect();
    while !remaining.is_empty() {
        let Some(&pick) = remaining.iter().find(|&&i| stabilizer[i]) else {
            break;
        };
        chosen.push(pick);
        remaining.retain(|&j| !comparable(pick, j));
    }
    if !remaining.is_empty() {
        chosen = smallest_cover(n, &stabilizer, &comparable, &covers)
            .ok_or_else(|| Error::Invalid("no stabilizing antichain covers the catalog".into()))?;
    }
    // drop members whose removal keeps the cover
    let mut i = chosen.len();
    while i > 0 {
        i -= 1;
        let mut without = chosen.clone();
        without.remove(i);
        if !without.is_empty() && covers(&without) {
            chosen = without;
        }
    }
    chosen.sort_unstable();
    Ok(chosen
        .into_iter()
        .map(|index| AntichainMember {
            index,
            truth: truth[index],
        })
        .collect())
}

fn smallest_cover(
    n: usize,
    stabilizer: &[bool],
    comparable: &dyn Fn(usize, usize) -> bool,
    covers: &dyn Fn(&[usize]) -> bool,
) -> Option<Vec<usize>> {
    let candidates: Vec<usize> = (0..n).filter(|&i| stabilizer[i]).collect();
    fn search(
        cands: &[usize],
        start: usize,
        size: usize,
        cur: &mut Vec<usize>,
        comparable: &dyn Fn(usize, usize) -> bool,
        covers: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == size {
            return covers(cur);
        }
        for k in start..cands.len() {
            let c = cands[k];
            if cur.iter().any(|&d| comparable(c, d)) {
                continue;
            }
            cur.push(c);
            if search(cands, k + 1, size, cur, comparable, covers) {
                return true;
            }
            cur.pop();
        }
        false
    }
    for size in 1..=candidates.len() {
        let mut cur = Vec::new();
        if search(&candidates, 0, size, &mut cur, comparable, covers) {
            return Some(cur);
        }
    }
    None
}

/// The characteristic sentence of A: B satisfies it iff B ≅ A.
pub fn describe_structure(a: &Structure) -> Formula {
    let vars: Vec<String> = (1..=a.len()).map(|i| format!("x{i}")).collect();
    let idx: Vec<usize> = (0..a.len()).collect();
    let diagram = atomic_type_idx(a, &idx).to_formula(a.vocab(), &vars);
    let closure = Formula::forall(
        "y",
        Formula::disjunction(vars.iter().map(|v| Formula::eq("y", v)).collect()),
    );
    let mut body = Formula::conjunction(
        [diagram, closure]
            .into_iter()
            .filter(|f| *f != Formula::True)
            .collect(),
    );
    for v in vars.iter().rev() {
        body = Formula::exists(v, body);
    }
    body
}
