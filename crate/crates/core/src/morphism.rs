//! Backtracking search for embeddings, homomorphisms and isomorphisms between
//! finite structures, and the transform that reduces homomorphism-closed
//! quantifiers to embedding-closed ones.
//!
//! Source elements are assigned pinned-first, then in universe order; target
//! candidates are tried in universe order. Two filters prune candidates
//! before the incremental relation check: the diagonal facts of each element
//! must match, and for injective kinds each per-(relation, position) incidence
//! count of the source element must not exceed that of the target.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{all_tuples, Structure, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphismKind {
    Embedding,
    Homomorphism,
    Isomorphism,
}

impl MorphismKind {
    fn injective(self) -> bool {
        !matches!(self, MorphismKind::Homomorphism)
    }
}

impl fmt::Display for MorphismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MorphismKind::Embedding => "embedding",
            MorphismKind::Homomorphism => "homomorphism",
            MorphismKind::Isomorphism => "isomorphism",
        })
    }
}

/// Source id to target id, in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialMap {
    pub map: IndexMap<String, String>,
}

impl PartialMap {
    pub fn new() -> Self {
        PartialMap::default()
    }

    pub fn from_pairs<S: Into<String>, T: Into<String>>(
        pairs: impl IntoIterator<Item = (S, T)>,
    ) -> Result<Self> {
        let mut m = PartialMap::new();
        for (s, t) in pairs {
            m.insert(s.into(), t.into())?;
        }
        Ok(m)
    }

    /// Parse `a=b,c=d`; whitespace around items is ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = PartialMap::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (s, t) = item.split_once('=').ok_or_else(|| {
                Error::InconsistentPins(format!("`{item}` is not of the form x=y"))
            })?;
            m.insert(s.trim().to_string(), t.trim().to_string())?;
        }
        Ok(m)
    }

    /// Add a pair; mapping a source twice to different targets is an error.
    pub fn insert(&mut self, source: String, target: String) -> Result<()> {
        match self.map.get(&source) {
            Some(t) if *t != target => Err(Error::InconsistentPins(format!(
                "`{source}` mapped to both `{t}` and `{target}`"
            ))),
            Some(_) => Ok(()),
            None => {
                self.map.insert(source, target);
                Ok(())
            }
        }
    }

    pub fn get(&self, source: &str) -> Option<&str> {
        self.map.get(source).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.map.values().all(|t| seen.insert(t))
    }

    fn to_indices(&self, a: &Structure, b: &Structure) -> Result<Vec<(usize, usize)>> {
        self.map
            .iter()
            .map(|(s, t)| Ok((a.element(s)?, b.element(t)?)))
            .collect()
    }

    fn from_indices(a: &Structure, b: &Structure, f: &[usize]) -> Self {
        PartialMap {
            map: f
                .iter()
                .enumerate()
                .map(|(x, &y)| (a.id(x).to_string(), b.id(y).to_string()))
                .collect(),
        }
    }

    /// `g ∘ self`, defined where both are.
    pub fn then(&self, g: &PartialMap) -> PartialMap {
        PartialMap {
            map: self
                .map
                .iter()
                .filter_map(|(s, t)| g.get(t).map(|u| (s.clone(), u.to_string())))
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MorphismQuery {
    pub kind: MorphismKind,
    pub source: Structure,
    pub target: Structure,
    pub pins: PartialMap,
    pub limit: Option<usize>,
}

impl MorphismQuery {
    pub fn new(kind: MorphismKind, source: Structure, target: Structure) -> Self {
        MorphismQuery {
            kind,
            source,
            target,
            pins: PartialMap::new(),
            limit: None,
        }
    }

    pub fn with_pins(mut self, pins: PartialMap) -> Self {
        self.pins = pins;
        self
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = Some(limit);
        self
    }
}

/// Whether the total map `f` satisfies the conditions of `kind`.
pub fn check_morphism(
    kind: MorphismKind,
    a: &Structure,
    b: &Structure,
    f: &PartialMap,
) -> Result<bool> {
    a.vocab().ensure_same(b.vocab())?;
    let mut image = Vec::with_capacity(a.len());
    for id in a.ids() {
        let t = f
            .get(id)
            .ok_or_else(|| Error::Invalid(format!("map is not total: `{id}` unmapped")))?;
        image.push(b.element(t)?);
    }
    Ok(check_idx(kind, a, b, &image))
}

pub fn check_embedding(a: &Structure, b: &Structure, f: &PartialMap) -> Result<bool> {
    check_morphism(MorphismKind::Embedding, a, b, f)
}

/// Index-level check; `a` and `b` must share a vocabulary.
pub fn check_idx(kind: MorphismKind, a: &Structure, b: &Structure, f: &[usize]) -> bool {
    if kind.injective() {
        let mut seen = vec![false; b.len()];
        for &y in f {
            if std::mem::replace(&mut seen[y], true) {
                return false;
            }
        }
        if kind == MorphismKind::Isomorphism && a.len() != b.len() {
            return false;
        }
    }
    let mut image = Vec::new();
    for (r, (name, arity)) in a.vocab().symbols().enumerate() {
        let rb = b.vocab().index_of(name).unwrap();
        for t in all_tuples(a.len(), arity) {
            image.clear();
            image.extend(t.iter().map(|&x| f[x]));
            let (x, y) = (a.holds(r, &t), b.holds(rb, &image));
            let ok = if kind.injective() { x == y } else { !x || y };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Precomputed data for repeated searches between one pair of structures.
pub struct Matcher<'a> {
    kind: MorphismKind,
    a: &'a Structure,
    b: &'a Structure,
    /// Relation index in `b` for each relation of `a`.
    rel_map: Vec<usize>,
    arities: Vec<usize>,
    diag_a: Vec<Vec<bool>>,
    diag_b: Vec<Vec<bool>>,
    deg_a: Vec<Vec<usize>>,
    deg_b: Vec<Vec<usize>>,
}

fn diagonals(s: &Structure) -> Vec<Vec<bool>> {
    (0..s.len())
        .map(|x| {
            s.vocab()
                .symbols()
                .enumerate()
                .map(|(r, (_, k))| s.holds(r, &vec![x; k]))
                .collect()
        })
        .collect()
}

fn incidence(s: &Structure, order: &[usize]) -> Vec<Vec<usize>> {
    let width: usize = s.vocab().symbols().map(|(_, k)| k).sum();
    let mut deg = vec![vec![0; width]; s.len()];
    let mut offset = 0;
    for &r in order {
        let rel = s.relation(r);
        for t in rel.tuples() {
            for (p, &x) in t.iter().enumerate() {
                deg[x][offset + p] += 1;
            }
        }
        offset += rel.arity();
    }
    deg
}

impl<'a> Matcher<'a> {
    pub fn new(kind: MorphismKind, a: &'a Structure, b: &'a Structure) -> Result<Self> {
        a.vocab().ensure_same(b.vocab())?;
        let rel_map: Vec<usize> = a
            .vocab()
            .symbols()
            .map(|(n, _)| b.vocab().index_of(n).unwrap())
            .collect();
        let arities = a.vocab().symbols().map(|(_, k)| k).collect();
        let (deg_a, deg_b) = if kind.injective() {
            let own: Vec<usize> = (0..a.vocab().len()).collect();
            (incidence(a, &own), incidence(b, &rel_map))
        } else {
            (Vec::new(), Vec::new())
        };
        // diagonal vectors of b are reordered to a's relation order
        let diag_b = diagonals(b)
            .into_iter()
            .map(|d| rel_map.iter().map(|&r| d[r]).collect())
            .collect();
        Ok(Matcher {
            kind,
            a,
            b,
            rel_map,
            arities,
            diag_a: diagonals(a),
            diag_b,
            deg_a,
            deg_b,
        })
    }

    fn compatible(&self, x: usize, y: usize) -> bool {
        let (da, db) = (&self.diag_a[x], &self.diag_b[y]);
        let diag_ok = if self.kind.injective() {
            da == db
        } else {
            da.iter().zip(db).all(|(p, q)| !p || *q)
        };
        diag_ok
            && (!self.kind.injective()
                || self.deg_a[x]
                    .iter()
                    .zip(&self.deg_b[y])
                    .all(|(p, q)| p <= q))
    }

    /// Relation tuples over assigned elements that involve `x` agree with the
    /// image under `f`.
    fn consistent(&self, f: &[usize], assigned: &[usize], x: usize) -> bool {
        let mut t = Vec::new();
        let mut image = Vec::new();
        for (r, &k) in self.arities.iter().enumerate() {
            let rb = self.rel_map[r];
            for pos in all_tuples(assigned.len(), k) {
                if !pos.iter().any(|&p| assigned[p] == x) {
                    continue;
                }
                t.clear();
                t.extend(pos.iter().map(|&p| assigned[p]));
                image.clear();
                image.extend(t.iter().map(|&e| f[e]));
                let (p, q) = (self.a.holds(r, &t), self.b.holds(rb, &image));
                let ok = if self.kind.injective() {
                    p == q
                } else {
                    !p || q
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// Visit every morphism extending `pins` in search order; the visitor
    /// returns `false` to stop. Returns whether the search ran to completion.
    pub fn for_each(
        &self,
        pins: &[(usize, usize)],
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool> {
        let (n, m) = (self.a.len(), self.b.len());
        let mut pinned: Vec<Option<usize>> = vec![None; n];
        for &(x, y) in pins {
            if x >= n || y >= m {
                return Err(Error::InconsistentPins("pin out of range".into()));
            }
            match pinned[x] {
                Some(z) if z != y => {
                    return Err(Error::InconsistentPins(format!(
                        "`{}` pinned to both `{}` and `{}`",
                        self.a.id(x),
                        self.b.id(z),
                        self.b.id(y)
                    )))
                }
                _ => pinned[x] = Some(y),
            }
        }
        if self.kind.injective() {
            let mut seen = vec![false; m];
            for y in pinned.iter().flatten() {
                if std::mem::replace(&mut seen[*y], true) {
                    return Err(Error::InconsistentPins(format!(
                        "two elements pinned to `{}` under an injective kind",
                        self.b.id(*y)
                    )));
                }
            }
            if n > m || (self.kind == MorphismKind::Isomorphism && n != m) {
                return Ok(true);
            }
        }
        if n > 0 && m == 0 {
            return Ok(true);
        }
        let mut order: Vec<usize> = Vec::with_capacity(n);
        for &(x, _) in pins {
            if !order.contains(&x) {
                order.push(x);
            }
        }
        order.extend((0..n).filter(|x| pinned[*x].is_none()));

        let mut f = vec![usize::MAX; n];
        let mut used = vec![false; m];
        let mut assigned = Vec::with_capacity(n);
        let mut stopped = false;
        self.extend(
            &order,
            &pinned,
            &mut f,
            &mut used,
            &mut assigned,
            visit,
            &mut stopped,
        );
        Ok(!stopped)
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        order: &[usize],
        pinned: &[Option<usize>],
        f: &mut Vec<usize>,
        used: &mut Vec<bool>,
        assigned: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
        stopped: &mut bool,
    ) {
        let i = assigned.len();
        if i == order.len() {
            if !visit(f) {
                *stopped = true;
            }
            return;
        }
        let x = order[i];
        let candidates: Box<dyn Iterator<Item = usize>> = match pinned[x] {
            Some(y) => Box::new(std::iter::once(y)),
            None => Box::new(0..self.b.len()),
        };
        for y in candidates {
            if (self.kind.injective() && used[y]) || !self.compatible(x, y) {
                continue;
            }
            f[x] = y;
            assigned.push(x);
            if self.consistent(f, assigned, x) {
                used[y] = true;
                self.extend(order, pinned, f, used, assigned, visit, stopped);
                used[y] = false;
            }
            assigned.pop();
            f[x] = usize::MAX;
            if *stopped {
                return;
            }
        }
    }

    pub fn find(&self, pins: &[(usize, usize)]) -> Result<Option<Vec<usize>>> {
        let mut out = None;
        self.for_each(pins, &mut |f| {
            out = Some(f.to_vec());
            false
        })?;
        Ok(out)
    }

    pub fn enumerate(
        &self,
        pins: &[(usize, usize)],
        limit: Option<usize>,
    ) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        if limit == Some(0) {
            return Ok(out);
        }
        self.for_each(pins, &mut |f| {
            out.push(f.to_vec());
            limit.is_none_or(|l| out.len() < l)
        })?;
        Ok(out)
    }
}

/// First morphism of `kind` from `a` to `b` extending the index pins.
pub fn find_idx(
    kind: MorphismKind,
    a: &Structure,
    b: &Structure,
    pins: &[(usize, usize)],
) -> Result<Option<Vec<usize>>> {
    Matcher::new(kind, a, b)?.find(pins)
}

pub fn find_morphism(q: &MorphismQuery) -> Result<Option<PartialMap>> {
    let pins = q.pins.to_indices(&q.source, &q.target)?;
    let found = find_idx(q.kind, &q.source, &q.target, &pins)?;
    Ok(found.map(|f| PartialMap::from_indices(&q.source, &q.target, &f)))
}

pub fn enumerate_morphisms(q: &MorphismQuery) -> Result<Vec<PartialMap>> {
    let pins = q.pins.to_indices(&q.source, &q.target)?;
    let all = Matcher::new(q.kind, &q.source, &q.target)?.enumerate(&pins, q.limit)?;
    Ok(all
        .iter()
        .map(|f| PartialMap::from_indices(&q.source, &q.target, f))
        .collect())
}

/// `a ≤ b`.
pub fn embeds(a: &Structure, b: &Structure) -> Result<bool> {
    Ok(find_idx(MorphismKind::Embedding, a, b, &[])?.is_some())
}

pub fn bi_embeddable(a: &Structure, b: &Structure) -> Result<bool> {
    Ok(embeds(a, b)? && embeds(b, a)?)
}

pub fn isomorphic(a: &Structure, b: &Structure) -> Result<bool> {
    Ok(find_idx(MorphismKind::Isomorphism, a, b, &[])?.is_some())
}

/// Automorphisms of `a` as index permutations, in search order.
pub fn automorphisms(
    a: &Structure,
    pins: &[(usize, usize)],
    limit: Option<usize>,
) -> Result<Vec<Vec<usize>>> {
    Matcher::new(MorphismKind::Isomorphism, a, a)?.enumerate(pins, limit)
}

/// Name of the complement symbol for `rel` in the transformed vocabulary.
pub fn complement_symbol(rel: &str) -> String {
    format!("{rel}_*")
}

/// Vocabulary τ ∪ {R_* : R ∈ τ} ∪ {N}. A name already taken in τ gets
/// underscores appended until it is fresh.
pub fn f_vocabulary(vocab: &Vocabulary) -> Vocabulary {
    let mut out = vocab.clone();
    let fresh = |out: &Vocabulary, base: String| {
        let mut name = base;
        while out.index_of(&name).is_some() {
            name.push('_');
        }
        name
    };
    for (rel, k) in vocab.symbols() {
        let name = fresh(&out, complement_symbol(rel));
        out.push(name, k).unwrap();
    }
    let n = fresh(&out, "N".to_string());
    out.push(n, 2).unwrap();
    out
}

/// F(A): the relations of A, their complements, and inequality. A
/// homomorphism F(A) → F(B) is exactly an embedding A → B.
pub fn f_transform(a: &Structure) -> Structure {
    let vocab = f_vocabulary(a.vocab());
    let k = a.vocab().len();
    let mut out = Structure::with_universe(vocab, a.universe().clone()).unwrap();
    let n = a.len();
    let names: Vec<String> = out.vocab().symbols().map(|(s, _)| s.to_string()).collect();
    for (r, (_, arity)) in a.vocab().symbols().enumerate() {
        for t in all_tuples(n, arity) {
            let target = if a.holds(r, &t) { r } else { k + r };
            out.add_idx(&names[target], &t).unwrap();
        }
    }
    for x in 0..n {
        for y in 0..n {
            if x != y {
                out.add_idx(&names[2 * k], &[x, y]).unwrap();
            }
        }
    }
    out
}

/// Whether F(G) maps homomorphically into `a` for some generator G.
pub fn hom_closure_member(generators: &[Structure], a: &Structure) -> Result<bool> {
    for g in generators {
        let fg = f_transform(g);
        if find_idx(MorphismKind::Homomorphism, &fg, a, &[])?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}
