//! Interpretations of one vocabulary in another, capture-avoiding
//! substitution, and elimination of a quantifier given a defining sentence.

use std::collections::{BTreeSet, HashMap};

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::structure::{all_structures, all_tuples, Structure, Vocabulary};

use super::eval::{evaluate_idx, evaluate_sentence};
use super::formula::{Binding, Formula};
use super::quantifier::QuantifierDef;

/// Definition of one σ-symbol: parameters and a τ-formula over them.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationDef {
    pub params: Vec<String>,
    pub body: Formula,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interpretation {
    pub sigma: Vocabulary,
    pub defs: IndexMap<String, RelationDef>,
}

impl Interpretation {
    /// Checks that every σ-symbol is defined with matching arity and that
    /// bodies mention no variables beyond their parameters.
    pub fn new(sigma: Vocabulary, defs: IndexMap<String, RelationDef>) -> Result<Self> {
        for (name, arity) in sigma.symbols() {
            let def = defs
                .get(name)
                .ok_or_else(|| Error::Invalid(format!("no definition for `{name}`")))?;
            if def.params.len() != arity {
                return Err(Error::Arity {
                    symbol: name.to_string(),
                    expected: arity,
                    found: def.params.len(),
                });
            }
            let extra: Vec<String> = def
                .body
                .free_vars()
                .into_iter()
                .filter(|v| !def.params.contains(v))
                .collect();
            if !extra.is_empty() {
                return Err(Error::FreeVariables(extra));
            }
        }
        if let Some(k) = defs.keys().find(|k| sigma.index_of(k).is_none()) {
            return Err(Error::UnknownRelation(k.clone()));
        }
        Ok(Interpretation { sigma, defs })
    }

    pub fn single<S: Into<String>>(
        rel: &str,
        params: impl IntoIterator<Item = S>,
        body: Formula,
    ) -> Result<Self> {
        let params: Vec<String> = params.into_iter().map(Into::into).collect();
        let sigma = Vocabulary::new([(rel, params.len())])?;
        let mut defs = IndexMap::new();
        defs.insert(rel.to_string(), RelationDef { params, body });
        Interpretation::new(sigma, defs)
    }
}

/// A name based on `base` that is not in `used`; it is added to `used`.
pub fn fresh_variable(base: &str, used: &mut BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
    let stem = if stem.is_empty() { "v" } else { stem };
    let mut i = 1;
    loop {
        let cand = format!("{stem}_{i}");
        if used.insert(cand.clone()) {
            return cand;
        }
        i += 1;
    }
}

/// Replace free occurrences of variables per `map`, renaming binders of `f`
/// that would capture a substituted name.
pub fn substitute_vars(
    f: &Formula,
    map: &HashMap<String, String>,
    used: &mut BTreeSet<String>,
) -> Formula {
    let rename = |v: &String, map: &HashMap<String, String>| {
        map.get(v).cloned().unwrap_or_else(|| v.clone())
    };
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom { rel, args } => Formula::Atom {
            rel: rel.clone(),
            args: args.iter().map(|v| rename(v, map)).collect(),
        },
        Formula::Eq(x, y) => Formula::Eq(rename(x, map), rename(y, map)),
        Formula::Not(g) => Formula::not(substitute_vars(g, map, used)),
        Formula::And(gs) => {
            Formula::And(gs.iter().map(|g| substitute_vars(g, map, used)).collect())
        }
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| substitute_vars(g, map, used)).collect()),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let (v, inner) = bind(std::slice::from_ref(v), map, used);
            let body = substitute_vars(g, &inner, used);
            if matches!(f, Formula::Exists(..)) {
                Formula::Exists(v[0].clone(), Box::new(body))
            } else {
                Formula::Forall(v[0].clone(), Box::new(body))
            }
        }
        Formula::QApp {
            quantifier,
            bindings,
        } => Formula::QApp {
            quantifier: quantifier.clone(),
            bindings: bindings
                .iter()
                .map(|b| {
                    let (vars, inner) = bind(&b.vars, map, used);
                    Binding {
                        vars,
                        body: substitute_vars(&b.body, &inner, used),
                    }
                })
                .collect(),
        },
    }
}

/// Binder handling: bound names stop being substituted, and a bound name
/// equal to some substituted image is renamed fresh.
fn bind(
    vars: &[String],
    map: &HashMap<String, String>,
    used: &mut BTreeSet<String>,
) -> (Vec<String>, HashMap<String, String>) {
    let mut inner = map.clone();
    let mut out = Vec::with_capacity(vars.len());
    for v in vars {
        inner.remove(v);
    }
    let images: BTreeSet<&String> = inner.values().collect();
    let captured: Vec<bool> = vars.iter().map(|v| images.contains(v)).collect();
    for (v, cap) in vars.iter().zip(captured) {
        if cap {
            let fresh = fresh_variable(v, used);
            inner.insert(v.clone(), fresh.clone());
            out.push(fresh);
        } else {
            out.push(v.clone());
        }
    }
    (out, inner)
}

/// Replace every atom whose symbol is in `defs` by the instantiated body.
fn substitute_atoms(
    f: &Formula,
    defs: &IndexMap<String, RelationDef>,
    used: &mut BTreeSet<String>,
) -> Formula {
    match f {
        Formula::Atom { rel, args } => match defs.get(rel) {
            Some(def) => {
                let map: HashMap<String, String> = def
                    .params
                    .iter()
                    .cloned()
                    .zip(args.iter().cloned())
                    .collect();
                substitute_vars(&def.body, &map, used)
            }
            None => f.clone(),
        },
        Formula::True | Formula::False | Formula::Eq(..) => f.clone(),
        Formula::Not(g) => Formula::not(substitute_atoms(g, defs, used)),
        Formula::And(gs) => {
            Formula::And(gs.iter().map(|g| substitute_atoms(g, defs, used)).collect())
        }
        Formula::Or(gs) => {
            Formula::Or(gs.iter().map(|g| substitute_atoms(g, defs, used)).collect())
        }
        Formula::Exists(v, g) => Formula::exists(v, substitute_atoms(g, defs, used)),
        Formula::Forall(v, g) => Formula::forall(v, substitute_atoms(g, defs, used)),
        Formula::QApp {
            quantifier,
            bindings,
        } => Formula::QApp {
            quantifier: quantifier.clone(),
            bindings: bindings
                .iter()
                .map(|b| Binding {
                    vars: b.vars.clone(),
                    body: substitute_atoms(&b.body, defs, used),
                })
                .collect(),
        },
    }
}

fn used_names(f: &Formula, defs: &IndexMap<String, RelationDef>) -> BTreeSet<String> {
    let mut used = f.all_vars();
    for d in defs.values() {
        used.extend(d.body.all_vars());
        used.extend(d.params.iter().cloned());
    }
    used
}

/// φ* over τ with A, ā ⊨ φ* iff Ψ(A), ā ⊨ φ.
pub fn substitute_interpretation(phi: &Formula, interp: &Interpretation) -> Result<Formula> {
    for (rel, arity) in phi.relation_symbols() {
        match interp.sigma.arity(&rel) {
            None => return Err(Error::UnknownRelation(rel)),
            Some(k) if k != arity => {
                return Err(Error::Arity {
                    symbol: rel,
                    expected: k,
                    found: arity,
                })
            }
            Some(_) => {}
        }
    }
    let mut used = used_names(phi, &interp.defs);
    Ok(substitute_atoms(phi, &interp.defs, &mut used))
}

/// Ψ(A): same universe, R = {ā : A ⊨ ψ_R(ā)}.
pub fn apply_interpretation(interp: &Interpretation, a: &Structure) -> Result<Structure> {
    let mut out = Structure::with_universe(interp.sigma.clone(), a.universe().clone())?;
    for (name, def) in &interp.defs {
        for t in all_tuples(a.len(), def.params.len()) {
            let env: Vec<(String, usize)> =
                def.params.iter().cloned().zip(t.iter().copied()).collect();
            if evaluate_idx(a, &def.body, &env)? {
                out.add_idx(name, &t)?;
            }
        }
    }
    Ok(out)
}

/// Largest number of structures the defining-sentence spot check visits.
const SPOT_CHECK_LIMIT: usize = 4096;

/// Compare ψ with the quantifier's membership on every σ-structure of size
/// at most 3, provided there are few enough of them.
fn spot_check(q: &QuantifierDef, psi: &Formula) -> Result<()> {
    for n in 0..=3 {
        let structures = match all_structures(&q.sigma, n, SPOT_CHECK_LIMIT) {
            Ok(s) => s,
            Err(e) if e.is_cap() => break,
            Err(e) => return Err(e),
        };
        for s in structures {
            if evaluate_sentence(&s, psi)? != q.member(&s)? {
                return Err(Error::VerificationFailed(format!(
                    "`{psi}` does not define `{}`: they disagree on {s}",
                    q.name
                )));
            }
        }
    }
    Ok(())
}

/// Replace each application of `name` by `psi` with its atoms replaced by
/// the bound bodies; nested applications are rewritten innermost-first.
pub fn rewrite_defined_quantifier(phi: &Formula, name: &str, psi: &Formula) -> Result<Formula> {
    let mut q_seen: Option<QuantifierDef> = None;
    phi.visit(&mut |f| {
        if let Formula::QApp { quantifier, .. } = f {
            if quantifier.name == name && q_seen.is_none() {
                q_seen = Some((**quantifier).clone());
            }
        }
    });
    let Some(q) = q_seen else {
        return Ok(phi.clone());
    };
    let free = psi.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free));
    }
    for (rel, arity) in psi.relation_symbols() {
        if q.sigma.arity(&rel) != Some(arity) {
            return Err(Error::VocabularyMismatch(format!(
                "`{rel}/{arity}` is not a symbol of {}",
                q.sigma
            )));
        }
    }
    spot_check(&q, psi)?;
    let mut used = phi.all_vars();
    used.extend(psi.all_vars());
    Ok(rewrite(phi, name, psi, &q.sigma, &mut used))
}

fn rewrite(
    f: &Formula,
    name: &str,
    psi: &Formula,
    sigma: &Vocabulary,
    used: &mut BTreeSet<String>,
) -> Formula {
    let go = |g: &Formula, used: &mut BTreeSet<String>| rewrite(g, name, psi, sigma, used);
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => f.clone(),
        Formula::Not(g) => Formula::not(go(g, used)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| go(g, used)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| go(g, used)).collect()),
        Formula::Exists(v, g) => Formula::exists(v, go(g, used)),
        Formula::Forall(v, g) => Formula::forall(v, go(g, used)),
        Formula::QApp {
            quantifier,
            bindings,
        } => {
            let bindings: Vec<Binding> = bindings
                .iter()
                .map(|b| Binding {
                    vars: b.vars.clone(),
                    body: go(&b.body, used),
                })
                .collect();
            if quantifier.name != name {
                return Formula::QApp {
                    quantifier: quantifier.clone(),
                    bindings,
                };
            }
            // ψ's binders must not capture free variables of the bodies
            let mut renamed = HashMap::new();
            let fresh_psi = freshen_bound(psi, &mut renamed, used);
            let defs: IndexMap<String, RelationDef> = sigma
                .symbols()
                .zip(bindings)
                .map(|((rel, _), b)| {
                    (
                        rel.to_string(),
                        RelationDef {
                            params: b.vars,
                            body: b.body,
                        },
                    )
                })
                .collect();
            substitute_atoms(&fresh_psi, &defs, used)
        }
    }
}

/// Rename every bound variable of `f` to a fresh name.
fn freshen_bound(
    f: &Formula,
    map: &mut HashMap<String, String>,
    used: &mut BTreeSet<String>,
) -> Formula {
    let rename = |v: &String, map: &HashMap<String, String>| {
        map.get(v).cloned().unwrap_or_else(|| v.clone())
    };
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom { rel, args } => Formula::Atom {
            rel: rel.clone(),
            args: args.iter().map(|v| rename(v, map)).collect(),
        },
        Formula::Eq(x, y) => Formula::Eq(rename(x, map), rename(y, map)),
        Formula::Not(g) => Formula::not(freshen_bound(g, map, used)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| freshen_bound(g, map, used)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| freshen_bound(g, map, used)).collect()),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let fresh = fresh_variable(v, used);
            let old = map.insert(v.clone(), fresh.clone());
            let body = freshen_bound(g, map, used);
            restore(map, v, old);
            if matches!(f, Formula::Exists(..)) {
                Formula::Exists(fresh, Box::new(body))
            } else {
                Formula::Forall(fresh, Box::new(body))
            }
        }
        Formula::QApp {
            quantifier,
            bindings,
        } => Formula::QApp {
            quantifier: quantifier.clone(),
            bindings: bindings
                .iter()
                .map(|b| {
                    let fresh: Vec<String> =
                        b.vars.iter().map(|v| fresh_variable(v, used)).collect();
                    let olds: Vec<Option<String>> = b
                        .vars
                        .iter()
                        .zip(&fresh)
                        .map(|(v, n)| map.insert(v.clone(), n.clone()))
                        .collect();
                    let body = freshen_bound(&b.body, map, used);
                    for (v, old) in b.vars.iter().zip(olds).rev() {
                        restore(map, v, old);
                    }
                    Binding { vars: fresh, body }
                })
                .collect(),
        },
    }
}

fn restore(map: &mut HashMap<String, String>, v: &str, old: Option<String>) {
    match old {
        Some(o) => {
            map.insert(v.to_string(), o);
        }
        None => {
            map.remove(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{haertig_chain, unary_pair};
    use crate::logic::{parse_formula, parse_formula_loose, Registry};
    use crate::structure::all_tuples;

    fn regularity() -> Interpretation {
        let body = parse_formula(
            "(U(x) & U(y)) | (V(x) & V(y))",
            &unary_pair(),
            &Registry::new(),
        )
        .unwrap();
        Interpretation::single("E", ["x", "y"], body).unwrap()
    }

    #[test]
    fn simple_substitution() {
        let body = parse_formula("U(x) & V(x)", &unary_pair(), &Registry::new()).unwrap();
        let i = Interpretation::single("R", ["x"], body.clone()).unwrap();
        let phi = Formula::atom("R", ["x"]);
        assert_eq!(substitute_interpretation(&phi, &i).unwrap(), body);
        let phi = Formula::atom("S", ["x"]);
        assert!(matches!(
            substitute_interpretation(&phi, &i),
            Err(Error::UnknownRelation(_))
        ));
    }

    #[test]
    fn regularity_interpretation() {
        let i = regularity();
        let phi = parse_formula_loose("exists x. E(x,x)", &Registry::new()).unwrap();
        let star = substitute_interpretation(&phi, &i).unwrap();
        assert_eq!(
            star.to_string(),
            "exists x. ((U(x) & U(x)) | (V(x) & V(x)))"
        );

        let g = apply_interpretation(&i, &haertig_chain(3)).unwrap();
        assert_eq!(g.relation(0).len(), 8);
        assert!(g.holds(0, &[0, 2]) && g.holds(0, &[1, 3]) && !g.holds(0, &[0, 1]));
    }

    #[test]
    fn capture_is_avoided() {
        // ψ_R(x, y) = exists y. (y != x & R0(y)) style body with a binder named
        // like the argument we substitute in
        let sigma_body = parse_formula(
            "exists z. (U(z) & !(z = x) & V(y))",
            &unary_pair(),
            &Registry::new(),
        )
        .unwrap();
        let i = Interpretation::single("R", ["x", "y"], sigma_body).unwrap();
        let phi = parse_formula_loose("forall z. R(z, w)", &Registry::new()).unwrap();
        let star = substitute_interpretation(&phi, &i).unwrap();
        let a = haertig_chain(3);
        let psi_a = apply_interpretation(&i, &a).unwrap();
        for w in 0..a.len() {
            let env = vec![("w".to_string(), w)];
            assert_eq!(
                evaluate_idx(&a, &star, &env).unwrap(),
                evaluate_idx(&psi_a, &phi, &env).unwrap(),
                "w = {w}, star = {star}"
            );
        }
        for t in all_tuples(a.len(), 2) {
            let env = vec![("z".to_string(), t[0]), ("w".to_string(), t[1])];
            let phi = parse_formula_loose("R(z, w)", &Registry::new()).unwrap();
            let star = substitute_interpretation(&phi, &i).unwrap();
            assert_eq!(
                evaluate_idx(&a, &star, &env).unwrap(),
                evaluate_idx(&psi_a, &phi, &env).unwrap()
            );
        }
    }

    #[test]
    fn interpretation_validation() {
        let body = parse_formula_loose("E(x, z)", &Registry::new()).unwrap();
        assert!(matches!(
            Interpretation::single("R", ["x", "y"], body),
            Err(Error::FreeVariables(_))
        ));
    }

    #[test]
    fn rewrite_count_quantifier() {
        let mut reg = Registry::new();
        let c1 = reg.insert(QuantifierDef::count_at_least("C1", "U", 1).unwrap());
        let v = unary_pair();
        let phi = parse_formula("C1[y: U(y) & !(y = x)]", &v, &reg).unwrap();
        let psi = parse_formula("exists x. U(x)", &c1.sigma, &reg).unwrap();
        let out = rewrite_defined_quantifier(&phi, "C1", &psi).unwrap();
        assert!(!out.to_string().contains("C1["), "{out}");
        let a = haertig_chain(4);
        for x in 0..a.len() {
            let env = vec![("x".to_string(), x)];
            assert_eq!(
                evaluate_idx(&a, &out, &env).unwrap(),
                evaluate_idx(&a, &phi, &env).unwrap()
            );
        }

        let wrong = parse_formula("forall x. U(x)", &c1.sigma, &reg).unwrap();
        assert!(matches!(
            rewrite_defined_quantifier(&phi, "C1", &wrong),
            Err(Error::VerificationFailed(_))
        ));
    }
}
