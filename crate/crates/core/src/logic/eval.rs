//! Model checking over finite structures.

use crate::error::{Error, Result};
use crate::structure::{all_tuples, Structure};

use super::formula::{Binding, Formula};
use super::quantifier::QuantifierDef;

/// Variable bindings as a stack; later entries shadow earlier ones.
struct Env {
    stack: Vec<(String, usize)>,
}

impl Env {
    fn lookup(&self, v: &str) -> Result<usize> {
        self.stack
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|(_, e)| *e)
            .ok_or_else(|| Error::UnassignedVariable(v.to_string()))
    }
}

/// Evaluate with an assignment of element ids.
pub fn evaluate(a: &Structure, phi: &Formula, assignment: &[(&str, &str)]) -> Result<bool> {
    let env = assignment
        .iter()
        .map(|(v, id)| Ok((v.to_string(), a.element(id)?)))
        .collect::<Result<Vec<_>>>()?;
    evaluate_idx(a, phi, &env)
}

/// Evaluate with an assignment of element indices.
pub fn evaluate_idx(a: &Structure, phi: &Formula, env: &[(String, usize)]) -> Result<bool> {
    let mut env = Env {
        stack: env.to_vec(),
    };
    eval(a, phi, &mut env)
}

pub fn evaluate_sentence(a: &Structure, phi: &Formula) -> Result<bool> {
    let free = phi.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free));
    }
    evaluate_idx(a, phi, &[])
}

fn eval(a: &Structure, phi: &Formula, env: &mut Env) -> Result<bool> {
    Ok(match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom { rel, args } => {
            let r = a.rel_index(rel)?;
            let arity = a.vocab().arity_at(r);
            if arity != args.len() {
                return Err(Error::Arity {
                    symbol: rel.clone(),
                    expected: arity,
                    found: args.len(),
                });
            }
            let t = args
                .iter()
                .map(|v| env.lookup(v))
                .collect::<Result<Vec<_>>>()?;
            a.holds(r, &t)
        }
        Formula::Eq(x, y) => env.lookup(x)? == env.lookup(y)?,
        Formula::Not(f) => !eval(a, f, env)?,
        Formula::And(fs) => {
            for f in fs {
                if !eval(a, f, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for f in fs {
                if eval(a, f, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Exists(v, f) | Formula::Forall(v, f) => {
            let want = matches!(phi, Formula::Exists(..));
            for e in 0..a.len() {
                env.stack.push((v.clone(), e));
                let r = eval(a, f, env);
                env.stack.pop();
                if r? == want {
                    return Ok(want);
                }
            }
            !want
        }
        Formula::QApp {
            quantifier,
            bindings,
        } => {
            let s = build_sigma_structure(a, quantifier, bindings, env)?;
            quantifier.member(&s)?
        }
    })
}

fn build_sigma_structure(
    a: &Structure,
    q: &QuantifierDef,
    bindings: &[Binding],
    env: &mut Env,
) -> Result<Structure> {
    if bindings.len() != q.sigma.len() {
        return Err(Error::FormulaShape(format!(
            "`{}` takes {} bindings, got {}",
            q.name,
            q.sigma.len(),
            bindings.len()
        )));
    }
    let mut s = Structure::with_universe(q.sigma.clone(), a.universe().clone())?;
    for (i, b) in bindings.iter().enumerate() {
        let (name, arity) = (q.sigma.name(i).to_string(), q.sigma.arity_at(i));
        if b.vars.len() != arity {
            return Err(Error::Arity {
                symbol: name,
                expected: arity,
                found: b.vars.len(),
            });
        }
        let depth = env.stack.len();
        for t in all_tuples(a.len(), arity) {
            env.stack.truncate(depth);
            env.stack
                .extend(b.vars.iter().cloned().zip(t.iter().copied()));
            let holds = eval(a, &b.body, env);
            env.stack.truncate(depth);
            if holds? {
                s.add_idx(&name, &t)?;
            }
        }
    }
    Ok(s)
}

/// The σ-structure a quantifier application defines in `a` under `env`.
pub fn quantifier_structure(
    a: &Structure,
    q: &QuantifierDef,
    bindings: &[Binding],
    env: &[(String, usize)],
) -> Result<Structure> {
    let mut env = Env {
        stack: env.to_vec(),
    };
    build_sigma_structure(a, q, bindings, &mut env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{complete, haertig_chain};
    use crate::logic::{parse_formula, Registry};
    use crate::structure::Vocabulary;

    fn has3() -> Registry {
        let mut g = Structure::numbered(Vocabulary::new([("U", 1)]).unwrap(), 3).unwrap();
        for i in 0..3 {
            g.add_idx("U", &[i]).unwrap();
        }
        let mut reg = Registry::new();
        reg.insert(QuantifierDef::embedding_closure("Q", vec![g]).unwrap());
        reg
    }

    #[test]
    fn examples() {
        let k3 = complete(3);
        let reg = Registry::new();
        let f = parse_formula("forall x. exists y. E(x,y)", k3.vocab(), &reg).unwrap();
        assert!(evaluate_sentence(&k3, &f).unwrap());
        assert!(evaluate_sentence(&k3, &Formula::True).unwrap());

        let reg = has3();
        let a4 = haertig_chain(4);
        let f = parse_formula("Q[x: U(x)]", a4.vocab(), &reg).unwrap();
        assert!(evaluate_sentence(&a4, &f).unwrap());
        assert!(!evaluate_sentence(&haertig_chain(3), &f).unwrap());
    }

    #[test]
    fn free_variables_and_assignment() {
        let k3 = complete(3);
        let f = Formula::atom("E", ["x", "y"]);
        assert!(matches!(
            evaluate_sentence(&k3, &f),
            Err(Error::FreeVariables(_))
        ));
        assert!(matches!(
            evaluate(&k3, &f, &[("x", "0")]),
            Err(Error::UnassignedVariable(v)) if v == "y"
        ));
        assert!(evaluate(&k3, &f, &[("x", "0"), ("y", "1")]).unwrap());
        assert!(!evaluate(&k3, &f, &[("x", "0"), ("y", "0")]).unwrap());
    }

    #[test]
    fn shadowing_and_outer_variables_in_bindings() {
        let a = haertig_chain(4);
        let reg = has3();
        // inner x shadows the outer one
        let f = parse_formula("exists x. (V(x) & exists x. U(x))", a.vocab(), &reg).unwrap();
        assert!(evaluate_sentence(&a, &f).unwrap());
        // body refers to the outer z: {x : U(x) & x != z} has 2 elements
        let f = parse_formula("Q[x: U(x) & x != z]", a.vocab(), &reg).unwrap();
        assert!(!evaluate(&a, &f, &[("z", "0")]).unwrap());
        assert!(evaluate(&a, &f, &[("z", "1")]).unwrap());
    }
}
