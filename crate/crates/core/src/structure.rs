//! Relational vocabularies and finite structures.
//!
//! Elements are addressed by string ids at the API boundary and by their
//! position in the universe everywhere else. Relations are stored densely as
//! bit tables of size `|A|^arity`, which is the right trade-off for the
//! desk-scale structures this crate works with.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest relation table we are willing to allocate.
const MAX_TABLE: usize = 1 << 26;

/// Relation symbols with their arities, in declaration order.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    symbols: Vec<(String, usize)>,
}

impl Vocabulary {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut vocab = Vocabulary::default();
        for (name, arity) in symbols {
            vocab.push(name.into(), arity)?;
        }
        Ok(vocab)
    }

    /// Graph vocabulary `{E:2}`.
    pub fn graph() -> Self {
        Vocabulary {
            symbols: vec![("E".to_string(), 2)],
        }
    }

    pub fn push(&mut self, name: String, arity: usize) -> Result<()> {
        if name.is_empty() {
            return Err(Error::InvalidVocabulary("empty symbol name".into()));
        }
        if arity == 0 {
            return Err(Error::InvalidVocabulary(format!(
                "symbol `{name}` must have positive arity"
            )));
        }
        if self.index_of(&name).is_some() {
            return Err(Error::InvalidVocabulary(format!(
                "duplicate symbol `{name}`"
            )));
        }
        self.symbols.push((name, arity));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&str, usize)> {
        self.symbols.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|(n, _)| n == name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.index_of(name).map(|i| self.symbols[i].1)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.symbols[index].0
    }

    pub fn arity_at(&self, index: usize) -> usize {
        self.symbols[index].1
    }

    /// Symbols sorted by name; the canonical order used by atomic types and
    /// canonical forms.
    pub fn sorted(&self) -> Vec<(String, usize)> {
        let mut s = self.symbols.clone();
        s.sort();
        s
    }

    /// Same set of symbols with the same arities, in any order.
    pub fn same_symbols(&self, other: &Vocabulary) -> bool {
        self.sorted() == other.sorted()
    }

    pub fn ensure_same(&self, other: &Vocabulary) -> Result<()> {
        if self.same_symbols(other) {
            Ok(())
        } else {
            Err(Error::VocabularyMismatch(format!("{self} vs {other}")))
        }
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|(_, a)| *a).max().unwrap_or(0)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidVocabulary(e.to_string()))
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.same_symbols(other)
    }
}

impl Eq for Vocabulary {}

impl Hash for Vocabulary {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.sorted().hash(state);
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (n, a)) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}:{a}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let map: IndexMap<&str, usize> = self.symbols().collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = IndexMap::<String, usize>::deserialize(deserializer)?;
        Vocabulary::new(map).map_err(serde::de::Error::custom)
    }
}

/// Element ids of a structure together with a reverse index.
#[derive(Debug, Default)]
pub struct Universe {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Universe {
    pub fn new(ids: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidStructure(format!("duplicate element `{id}`")));
            }
        }
        Ok(Universe { ids, index })
    }

    pub fn numbered(n: usize) -> Self {
        Universe::new((0..n).map(|i| i.to_string()).collect()).expect("distinct ids")
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

/// A relation over `0..n` stored as a dense bit table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    arity: usize,
    n: usize,
    bits: Vec<bool>,
}

impl Relation {
    pub fn empty(arity: usize, n: usize) -> Result<Self> {
        let size = table_size(n, arity)?;
        Ok(Relation {
            arity,
            n,
            bits: vec![false; size],
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    fn offset(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.arity);
        tuple.iter().fold(0, |acc, &e| acc * self.n + e)
    }

    #[inline]
    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.bits[self.offset(tuple)]
    }

    pub fn set(&mut self, tuple: &[usize], value: bool) {
        let off = self.offset(tuple);
        self.bits[off] = value;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Member tuples in lexicographic order.
    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let (n, arity) = (self.n, self.arity);
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(mut off, _)| {
                let mut t = vec![0; arity];
                for slot in t.iter_mut().rev() {
                    *slot = off % n;
                    off /= n;
                }
                t
            })
    }
}

fn table_size(n: usize, arity: usize) -> Result<usize> {
    let mut size: usize = 1;
    for _ in 0..arity {
        size = size
            .checked_mul(n)
            .filter(|s| *s <= MAX_TABLE)
            .ok_or_else(|| Error::cap("relation table size", MAX_TABLE))?;
    }
    Ok(size)
}

/// Iterates over all tuples in `0..n` of the given length, lexicographically.
pub fn all_tuples(n: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = if len == 0 {
        1
    } else if n == 0 {
        0
    } else {
        n.checked_pow(len as u32).unwrap_or(usize::MAX)
    };
    (0..total).map(move |mut code| {
        let mut t = vec![0; len];
        for slot in t.iter_mut().rev() {
            *slot = code % n.max(1);
            code /= n.max(1);
        }
        t
    })
}

/// A finite relational structure.
#[derive(Clone, Debug)]
pub struct Structure {
    vocab: Vocabulary,
    universe: Arc<Universe>,
    relations: Vec<Relation>,
}

impl Structure {
    /// Empty interpretation of every symbol over the given universe.
    pub fn new(vocab: Vocabulary, universe: Vec<String>) -> Result<Self> {
        Self::with_universe(vocab, Arc::new(Universe::new(universe)?))
    }

    pub fn with_universe(vocab: Vocabulary, universe: Arc<Universe>) -> Result<Self> {
        let n = universe.len();
        let relations = vocab
            .symbols()
            .map(|(_, a)| Relation::empty(a, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Structure {
            vocab,
            universe,
            relations,
        })
    }

    /// Structure over `{"0", .., "n-1"}` with empty relations.
    pub fn numbered(vocab: Vocabulary, n: usize) -> Result<Self> {
        Self::with_universe(vocab, Arc::new(Universe::numbered(n)))
    }

    /// Adds a tuple given by element ids.
    pub fn add(&mut self, rel: &str, tuple: &[&str]) -> Result<()> {
        let idx = self.tuple_indices(tuple.iter().copied())?;
        self.add_idx(rel, &idx)
    }

    pub fn add_idx(&mut self, rel: &str, tuple: &[usize]) -> Result<()> {
        let r = self.rel_index(rel)?;
        self.check_tuple(r, tuple)?;
        self.relations[r].set(tuple, true);
        Ok(())
    }

    pub fn remove_idx(&mut self, rel: &str, tuple: &[usize]) -> Result<()> {
        let r = self.rel_index(rel)?;
        self.check_tuple(r, tuple)?;
        self.relations[r].set(tuple, false);
        Ok(())
    }

    fn check_tuple(&self, r: usize, tuple: &[usize]) -> Result<()> {
        let arity = self.vocab.arity_at(r);
        if tuple.len() != arity {
            return Err(Error::Arity {
                symbol: self.vocab.name(r).to_string(),
                expected: arity,
                found: tuple.len(),
            });
        }
        if let Some(bad) = tuple.iter().find(|e| **e >= self.len()) {
            return Err(Error::UnknownElement(format!("#{bad}")));
        }
        Ok(())
    }

    pub fn rel_index(&self, rel: &str) -> Result<usize> {
        self.vocab
            .index_of(rel)
            .ok_or_else(|| Error::UnknownRelation(rel.to_string()))
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    pub fn id(&self, i: usize) -> &str {
        self.universe.id(i)
    }

    pub fn ids(&self) -> &[String] {
        self.universe.ids()
    }

    pub fn element(&self, id: &str) -> Result<usize> {
        self.universe
            .position(id)
            .ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    pub fn tuple_indices<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<Vec<usize>> {
        ids.into_iter().map(|id| self.element(id)).collect()
    }

    pub fn tuple_ids(&self, tuple: &[usize]) -> Vec<String> {
        tuple.iter().map(|&e| self.id(e).to_string()).collect()
    }

    pub fn relation(&self, r: usize) -> &Relation {
        &self.relations[r]
    }

    pub fn relation_by_name(&self, rel: &str) -> Result<&Relation> {
        Ok(&self.relations[self.rel_index(rel)?])
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    #[inline]
    pub fn holds(&self, r: usize, tuple: &[usize]) -> bool {
        self.relations[r].contains(tuple)
    }

    /// Interpretation of `rel` as id tuples, lexicographic by index.
    pub fn tuples_of(&self, rel: &str) -> Result<Vec<Vec<String>>> {
        let r = self.relation_by_name(rel)?;
        Ok(r.tuples().map(|t| self.tuple_ids(&t)).collect())
    }

    /// Same structure with relations reordered to match `vocab`.
    pub fn reorder_to(&self, vocab: &Vocabulary) -> Result<Structure> {
        self.vocab.ensure_same(vocab)?;
        let relations = vocab
            .symbols()
            .map(|(n, _)| self.relations[self.vocab.index_of(n).unwrap()].clone())
            .collect();
        Ok(Structure {
            vocab: vocab.clone(),
            universe: self.universe.clone(),
            relations,
        })
    }

    /// Same relations over a universe with fresh ids.
    pub fn relabel(&self, ids: Vec<String>) -> Result<Structure> {
        if ids.len() != self.len() {
            return Err(Error::InvalidStructure("relabeling changes size".into()));
        }
        Ok(Structure {
            vocab: self.vocab.clone(),
            universe: Arc::new(Universe::new(ids)?),
            relations: self.relations.clone(),
        })
    }

    /// Image of the structure under a bijection `old index -> new index`,
    /// keeping the id list order of the new positions.
    pub fn permute(&self, perm: &[usize], ids: Vec<String>) -> Result<Structure> {
        let mut out = Structure::new(self.vocab.clone(), ids)?;
        for (r, rel) in self.relations.iter().enumerate() {
            for t in rel.tuples() {
                let image: Vec<usize> = t.iter().map(|&e| perm[e]).collect();
                out.relations[r].set(&image, true);
            }
        }
        Ok(out)
    }

    pub fn from_json_str(text: &str) -> Result<Structure> {
        let raw: StructureJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidStructure(e.to_string()))?;
        raw.try_into()
    }

    pub fn from_json_file(path: &Path) -> Result<Structure> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let raw: StructureJson = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        raw.try_into()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(StructureJson::from(self)).expect("structure serializes")
    }
}

impl PartialEq for Universe {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids
    }
}

impl Eq for Universe {}

/// Equality is literal: same ids in the same order and the same relations.
impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        if self.universe != other.universe || !self.vocab.same_symbols(&other.vocab) {
            return false;
        }
        self.vocab.symbols().enumerate().all(|(i, (name, _))| {
            let j = other.vocab.index_of(name).unwrap();
            self.relations[i] == other.relations[j]
        })
    }
}

impl Eq for Structure {}

impl Hash for Structure {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.universe.ids.hash(state);
        for (name, _) in self.vocab.sorted() {
            name.hash(state);
            self.relations[self.vocab.index_of(&name).unwrap()].hash(state);
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureJson {
    vocabulary: Vocabulary,
    universe: Vec<String>,
    #[serde(default)]
    relations: IndexMap<String, Vec<Vec<String>>>,
}

impl TryFrom<StructureJson> for Structure {
    type Error = Error;

    fn try_from(raw: StructureJson) -> Result<Structure> {
        let mut s = Structure::new(raw.vocabulary, raw.universe)?;
        for (rel, tuples) in &raw.relations {
            for t in tuples {
                let idx = s.tuple_indices(t.iter().map(String::as_str))?;
                s.add_idx(rel, &idx)?;
            }
        }
        Ok(s)
    }
}

impl From<&Structure> for StructureJson {
    fn from(s: &Structure) -> Self {
        let relations = s
            .vocab
            .symbols()
            .enumerate()
            .map(|(i, (name, _))| {
                (
                    name.to_string(),
                    s.relations[i].tuples().map(|t| s.tuple_ids(&t)).collect(),
                )
            })
            .collect();
        StructureJson {
            vocabulary: s.vocab.clone(),
            universe: s.ids().to_vec(),
            relations,
        }
    }
}

impl Serialize for Structure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StructureJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        StructureJson::deserialize(deserializer)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

/// Substructure induced on `subset`, keeping the original universe order.
pub fn induced_substructure(a: &Structure, subset: &[&str]) -> Result<Structure> {
    let mut keep = subset
        .iter()
        .map(|id| a.element(id))
        .collect::<Result<Vec<_>>>()?;
    keep.sort_unstable();
    keep.dedup();
    induced_by_indices(a, &keep)
}

/// `keep` must be sorted and duplicate-free.
pub fn induced_by_indices(a: &Structure, keep: &[usize]) -> Result<Structure> {
    let ids = keep.iter().map(|&e| a.id(e).to_string()).collect();
    let mut out = Structure::new(a.vocab.clone(), ids)?;
    let mut new_index = vec![usize::MAX; a.len()];
    for (i, &e) in keep.iter().enumerate() {
        new_index[e] = i;
    }
    for (r, rel) in a.relations.iter().enumerate() {
        for t in rel.tuples() {
            if t.iter().all(|&e| new_index[e] != usize::MAX) {
                let image: Vec<usize> = t.iter().map(|&e| new_index[e]).collect();
                out.relations[r].set(&image, true);
            }
        }
    }
    Ok(out)
}

/// Disjoint union; elements are tagged `l.<id>` and `r.<id>`.
pub fn disjoint_union(a: &Structure, b: &Structure) -> Result<Structure> {
    disjoint_union_tagged(a, b, "l", "r")
}

pub fn disjoint_union_tagged(
    a: &Structure,
    b: &Structure,
    left_tag: &str,
    right_tag: &str,
) -> Result<Structure> {
    a.vocab.ensure_same(&b.vocab)?;
    let ids = a
        .ids()
        .iter()
        .map(|id| format!("{left_tag}.{id}"))
        .chain(b.ids().iter().map(|id| format!("{right_tag}.{id}")))
        .collect();
    let mut out = Structure::new(a.vocab.clone(), ids)?;
    let offset = a.len();
    for (r, (name, _)) in a.vocab.symbols().enumerate() {
        for t in a.relations[r].tuples() {
            out.relations[r].set(&t, true);
        }
        for t in b.relation_by_name(name)?.tuples() {
            let shifted: Vec<usize> = t.iter().map(|e| e + offset).collect();
            out.relations[r].set(&shifted, true);
        }
    }
    Ok(out)
}

/// Default size cap for brute-force canonicalization.
pub const CANONICAL_CAP: usize = 10;

/// Isomorphism invariant: equal for two structures iff they are isomorphic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub size: usize,
    pub vocabulary: Vec<(String, usize)>,
    /// Membership bits of every relation (sorted by name) over every tuple of
    /// the relabeled universe, lexicographic; the least such string over all
    /// relabelings.
    pub bits: Vec<bool>,
}

pub fn canonical_form(a: &Structure) -> Result<CanonicalForm> {
    canonical_form_capped(a, CANONICAL_CAP)
}

pub fn canonical_form_capped(a: &Structure, cap: usize) -> Result<CanonicalForm> {
    let n = a.len();
    if n > cap {
        return Err(Error::cap(
            format!("canonical form of a {n}-element structure"),
            cap,
        ));
    }
    let order: Vec<usize> = a
        .vocab
        .sorted()
        .iter()
        .map(|(name, _)| a.vocab.index_of(name).unwrap())
        .collect();
    let encode = |perm: &[usize], out: &mut Vec<bool>| {
        out.clear();
        for &r in &order {
            let arity = a.vocab.arity_at(r);
            let mut image = vec![0; arity];
            for t in all_tuples(n, arity) {
                for (slot, &e) in image.iter_mut().zip(&t) {
                    *slot = perm[e];
                }
                out.push(a.relations[r].contains(&image));
            }
        }
    };
    // perm[new label] = old element
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = Vec::new();
    encode(&perm, &mut best);
    let mut current = Vec::with_capacity(best.len());
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            encode(&perm, &mut current);
            if current < best {
                std::mem::swap(&mut best, &mut current);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(CanonicalForm {
        size: n,
        vocabulary: a.vocab.sorted(),
        bits: best,
    })
}

/// Every structure over `vocab` with universe `0..n`, in binary-counter
/// order over the dense relation tables.
pub fn all_structures(vocab: &Vocabulary, n: usize, cap: usize) -> Result<Vec<Structure>> {
    let slots: usize = vocab
        .symbols()
        .map(|(_, a)| table_size(n, a))
        .sum::<Result<usize>>()?;
    if slots >= usize::BITS as usize - 1 || (1usize << slots) > cap {
        return Err(Error::cap(
            format!("enumerating all {n}-element structures"),
            cap,
        ));
    }
    let base = Structure::numbered(vocab.clone(), n)?;
    let mut out = Vec::with_capacity(1 << slots);
    for code in 0..(1usize << slots) {
        let mut s = base.clone();
        let mut bit = 0;
        for rel in s.relations.iter_mut() {
            for b in rel.bits.iter_mut() {
                *b = code >> bit & 1 == 1;
                bit += 1;
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// One representative per isomorphism class of `n`-element structures,
/// sorted by canonical form.
pub fn structures_up_to_iso(vocab: &Vocabulary, n: usize, cap: usize) -> Result<Vec<Structure>> {
    let mut reps: BTreeMap<CanonicalForm, Structure> = BTreeMap::new();
    for s in all_structures(vocab, n, cap)? {
        let cf = canonical_form_capped(&s, n)?;
        reps.entry(cf).or_insert(s);
    }
    Ok(reps.into_values().collect())
}
