//! Generalized quantifiers defined by generator closures or counting, and a
//! registry loaded from JSON.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::morphism::{find_idx, MorphismKind};
use crate::structure::{Structure, Vocabulary};

#[derive(Clone, Debug, PartialEq)]
pub enum Semantics {
    /// Structures into which some generator embeds.
    EmbeddingClosure(Vec<Structure>),
    /// Structures receiving a homomorphism from some generator.
    HomomorphismClosure(Vec<Structure>),
    /// Complement of the inner (embedding-closed) class; substructure-closed.
    SubstructureClosedComplement(Box<QuantifierDef>),
    /// At least `k` elements satisfy the single unary symbol.
    CountAtLeast(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantifierDef {
    pub name: String,
    pub sigma: Vocabulary,
    pub semantics: Semantics,
}

impl QuantifierDef {
    pub fn new(name: impl Into<String>, sigma: Vocabulary, semantics: Semantics) -> Result<Self> {
        let q = QuantifierDef {
            name: name.into(),
            sigma,
            semantics,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn embedding_closure(name: &str, generators: Vec<Structure>) -> Result<Self> {
        let sigma = first_vocab(name, &generators)?;
        QuantifierDef::new(name, sigma, Semantics::EmbeddingClosure(generators))
    }

    pub fn homomorphism_closure(name: &str, generators: Vec<Structure>) -> Result<Self> {
        let sigma = first_vocab(name, &generators)?;
        QuantifierDef::new(name, sigma, Semantics::HomomorphismClosure(generators))
    }

    pub fn count_at_least(name: &str, symbol: &str, k: usize) -> Result<Self> {
        QuantifierDef::new(
            name,
            Vocabulary::new([(symbol, 1)])?,
            Semantics::CountAtLeast(k),
        )
    }

    pub fn complement(name: &str, inner: QuantifierDef) -> Result<Self> {
        QuantifierDef::new(
            name,
            inner.sigma.clone(),
            Semantics::SubstructureClosedComplement(Box::new(inner)),
        )
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidQuantifier(format!("{}: {msg}", self.name)));
        if self.name.is_empty() {
            return Err(Error::InvalidQuantifier("empty quantifier name".into()));
        }
        match &self.semantics {
            Semantics::EmbeddingClosure(gens) | Semantics::HomomorphismClosure(gens) => {
                if gens.is_empty() {
                    return bad("closure quantifiers need at least one generator".into());
                }
                for g in gens {
                    if !g.vocab().same_symbols(&self.sigma) {
                        return bad(format!(
                            "generator vocabulary {} differs from {}",
                            g.vocab(),
                            self.sigma
                        ));
                    }
                }
            }
            Semantics::SubstructureClosedComplement(inner) => {
                if !inner.sigma.same_symbols(&self.sigma) {
                    return bad("inner quantifier has a different vocabulary".into());
                }
            }
            Semantics::CountAtLeast(_) => {
                if self.sigma.len() != 1 || self.sigma.arity_at(0) != 1 {
                    return bad("count quantifiers take exactly one unary symbol".into());
                }
            }
        }
        Ok(())
    }

    /// True when the defining class is closed upward under embeddings.
    pub fn is_embedding_closed(&self) -> bool {
        !matches!(self.semantics, Semantics::SubstructureClosedComplement(_))
    }

    /// Whether `s` belongs to the defining class.
    pub fn member(&self, s: &Structure) -> Result<bool> {
        self.sigma.ensure_same(s.vocab())?;
        Ok(match &self.semantics {
            Semantics::EmbeddingClosure(gens) => {
                let mut found = false;
                for g in gens {
                    if find_idx(MorphismKind::Embedding, g, s, &[])?.is_some() {
                        found = true;
                        break;
                    }
                }
                found
            }
            Semantics::HomomorphismClosure(gens) => {
                let mut found = false;
                for g in gens {
                    if find_idx(MorphismKind::Homomorphism, g, s, &[])?.is_some() {
                        found = true;
                        break;
                    }
                }
                found
            }
            Semantics::SubstructureClosedComplement(inner) => !inner.member(s)?,
            Semantics::CountAtLeast(k) => s.relation(0).len() >= *k,
        })
    }

    /// Registry JSON with generators inlined.
    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("name".into(), Value::String(self.name.clone()));
        obj.insert("sigma".into(), serde_json::to_value(&self.sigma).unwrap());
        match &self.semantics {
            Semantics::EmbeddingClosure(g) | Semantics::HomomorphismClosure(g) => {
                let kind = if matches!(self.semantics, Semantics::EmbeddingClosure(_)) {
                    "embedding_closure"
                } else {
                    "homomorphism_closure"
                };
                obj.insert("kind".into(), kind.into());
                obj.insert(
                    "generators".into(),
                    Value::Array(g.iter().map(Structure::to_json).collect()),
                );
            }
            Semantics::SubstructureClosedComplement(inner) => {
                obj.insert("kind".into(), "substructure_complement".into());
                obj.insert("inner".into(), inner.to_json());
            }
            Semantics::CountAtLeast(k) => {
                obj.insert("kind".into(), "count_at_least".into());
                obj.insert("k".into(), (*k).into());
            }
        }
        Value::Object(obj)
    }
}

fn first_vocab(name: &str, generators: &[Structure]) -> Result<Vocabulary> {
    generators
        .first()
        .map(|g| g.vocab().clone())
        .ok_or_else(|| Error::InvalidQuantifier(format!("{name}: no generators")))
}

pub fn quantifier_member(q: &QuantifierDef, s: &Structure) -> Result<bool> {
    q.member(s)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DefJson {
    name: Option<String>,
    sigma: Option<Vocabulary>,
    kind: String,
    #[serde(default)]
    generators: Vec<Value>,
    k: Option<usize>,
    inner: Option<Box<DefJson>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RegistryJson {
    Many(Vec<Value>),
    One(Value),
}

/// Named quantifiers available to the parser, in registration order.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    defs: IndexMap<String, Arc<QuantifierDef>>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    pub fn insert(&mut self, def: QuantifierDef) -> Arc<QuantifierDef> {
        let def = Arc::new(def);
        self.defs.insert(def.name.clone(), def.clone());
        def
    }

    pub fn get(&self, name: &str) -> Option<&Arc<QuantifierDef>> {
        self.defs.get(name)
    }

    pub fn require(&self, name: &str) -> Result<Arc<QuantifierDef>> {
        self.get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownQuantifier(name.to_string()))
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<QuantifierDef>> {
        self.defs.values()
    }

    pub fn merge(&mut self, other: Registry) {
        self.defs.extend(other.defs);
    }

    /// Parse a registry document: one definition object or an array of them.
    /// Generator entries are inline structure objects or paths relative to
    /// `base`.
    pub fn from_json_str(text: &str, base: &Path) -> Result<Registry> {
        let raw: RegistryJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidQuantifier(format!("registry: {e}")))?;
        let items = match raw {
            RegistryJson::Many(v) => v,
            RegistryJson::One(v) => vec![v],
        };
        let mut reg = Registry::new();
        for (i, item) in items.into_iter().enumerate() {
            let def: DefJson = serde_json::from_value(item)
                .map_err(|e| Error::InvalidQuantifier(format!("registry entry {i}: {e}")))?;
            reg.insert(build(def, None, base)?);
        }
        Ok(reg)
    }

    pub fn from_json_file(path: &Path) -> Result<Registry> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Registry::from_json_str(&text, &base)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.defs.values().map(|d| d.to_json()).collect())
    }
}

fn build(
    def: DefJson,
    parent: Option<(&str, Option<&Vocabulary>)>,
    base: &Path,
) -> Result<QuantifierDef> {
    let name = def
        .name
        .or_else(|| parent.map(|(n, _)| format!("{n}.inner")))
        .ok_or_else(|| Error::InvalidQuantifier("missing `name`".into()))?;
    let generators = def
        .generators
        .into_iter()
        .map(|g| load_generator(g, base))
        .collect::<Result<Vec<_>>>()?;
    let sigma = match (def.sigma, parent) {
        (Some(s), _) => Some(s),
        (None, Some((_, Some(s)))) => Some(s.clone()),
        (None, _) if !generators.is_empty() => Some(generators[0].vocab().clone()),
        (None, _) => None,
    };
    let need_sigma = || {
        sigma
            .clone()
            .ok_or_else(|| Error::InvalidQuantifier(format!("{name}: missing `sigma`")))
    };
    let semantics = match def.kind.as_str() {
        "embedding_closure" => Semantics::EmbeddingClosure(generators),
        "homomorphism_closure" => Semantics::HomomorphismClosure(generators),
        "count_at_least" => Semantics::CountAtLeast(
            def.k
                .ok_or_else(|| Error::InvalidQuantifier(format!("{name}: missing `k`")))?,
        ),
        "substructure_complement" => {
            let inner = def
                .inner
                .ok_or_else(|| Error::InvalidQuantifier(format!("{name}: missing `inner`")))?;
            let sigma = need_sigma().ok();
            let inner = build(*inner, Some((name.as_str(), sigma.as_ref())), base)?;
            let sigma = inner.sigma.clone();
            return QuantifierDef::new(
                name,
                sigma,
                Semantics::SubstructureClosedComplement(Box::new(inner)),
            );
        }
        other => {
            return Err(Error::InvalidQuantifier(format!(
                "{name}: unknown kind `{other}`"
            )))
        }
    };
    QuantifierDef::new(name.clone(), need_sigma()?, semantics)
}

fn load_generator(value: Value, base: &Path) -> Result<Structure> {
    match value {
        Value::String(rel) => {
            let path: PathBuf = base.join(rel);
            if !path.exists() {
                return Err(Error::Io {
                    path,
                    source: std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        "generator file not found",
                    ),
                });
            }
            Structure::from_json_file(&path)
        }
        obj @ Value::Object(_) => serde_json::from_value(obj)
            .map_err(|e| Error::InvalidQuantifier(format!("inline generator: {e}"))),
        other => Err(Error::InvalidQuantifier(format!(
            "generator must be a path or an object, got {other}"
        ))),
    }
}
