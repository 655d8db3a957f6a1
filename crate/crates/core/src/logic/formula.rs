use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::quantifier::QuantifierDef;

/// One argument of a generalized quantifier: the variables it binds and the
/// body defining the corresponding relation.
#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub vars: Vec<String>,
    pub body: Formula,
}

impl Binding {
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = S>, body: Formula) -> Self {
        Binding {
            vars: vars.into_iter().map(Into::into).collect(),
            body,
        }
    }
}

/// First-order formulas over relational vocabularies, extended with
/// applications of registered generalized quantifiers. Terms are variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom {
        rel: String,
        args: Vec<String>,
    },
    Eq(String, String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    QApp {
        quantifier: Arc<QuantifierDef>,
        bindings: Vec<Binding>,
    },
}

impl Formula {
    pub fn atom<S: Into<String>>(rel: &str, args: impl IntoIterator<Item = S>) -> Formula {
        Formula::Atom {
            rel: rel.to_string(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn eq(x: &str, y: &str) -> Formula {
        Formula::Eq(x.to_string(), y.to_string())
    }

    pub fn neq(x: &str, y: &str) -> Formula {
        Formula::not(Formula::eq(x, y))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        Formula::Or(fs)
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Forall(var.to_string(), Box::new(body))
    }

    pub fn qapp(quantifier: Arc<QuantifierDef>, bindings: Vec<Binding>) -> Formula {
        Formula::QApp {
            quantifier,
            bindings,
        }
    }

    /// Conjunction that collapses the empty and singleton cases.
    pub fn conjunction(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::True,
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    pub fn disjunction(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::False,
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let note = |v: &String, bound: &Vec<String>, out: &mut Vec<String>| {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { args, .. } => args.iter().for_each(|v| note(v, bound, out)),
            Formula::Eq(x, y) => {
                note(x, bound, out);
                note(y, bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().for_each(|f| f.collect_free(bound, out))
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
            Formula::QApp { bindings, .. } => {
                for b in bindings {
                    let depth = bound.len();
                    bound.extend(b.vars.iter().cloned());
                    b.body.collect_free(bound, out);
                    bound.truncate(depth);
                }
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom { args, .. } => out.extend(args.iter().cloned()),
            Formula::Eq(x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                out.insert(v.clone());
            }
            Formula::QApp { bindings, .. } => {
                for b in bindings {
                    out.extend(b.vars.iter().cloned());
                }
            }
            _ => {}
        });
        out
    }

    /// Number of distinct variable names; a metric only.
    pub fn variable_count(&self) -> usize {
        self.all_vars().len()
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit(f)),
            Formula::QApp { bindings, .. } => bindings.iter().for_each(|b| b.body.visit(f)),
            _ => {}
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        let mut qf = true;
        self.visit(&mut |f| {
            if matches!(
                f,
                Formula::Exists(..) | Formula::Forall(..) | Formula::QApp { .. }
            ) {
                qf = false;
            }
        });
        qf
    }

    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0)
            }
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_rank(),
            Formula::QApp { bindings, .. } => {
                1 + bindings
                    .iter()
                    .map(|b| b.body.quantifier_rank())
                    .max()
                    .unwrap_or(0)
            }
        }
    }

    /// Relation symbols used in atoms, with the arity at which they occur.
    pub fn relation_symbols(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Atom { rel, args } = f {
                if !out.iter().any(|(r, _)| r == rel) {
                    out.push((rel.clone(), args.len()));
                }
            }
        });
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => 0,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.depth(),
            Formula::And(fs) | Formula::Or(fs) => {
                1 + fs.iter().map(Formula::depth).max().unwrap_or(0)
            }
            Formula::QApp { bindings, .. } => {
                1 + bindings.iter().map(|b| b.body.depth()).max().unwrap_or(0)
            }
        }
    }

    fn needs_parens_as_operand(&self) -> bool {
        matches!(
            self,
            Formula::Exists(..) | Formula::Forall(..) | Formula::Eq(..)
        )
    }
}

/// Canonical ASCII rendering; `parse_formula` reads it back to the same AST.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom { rel, args } => write!(f, "{rel}({})", args.join(",")),
            Formula::Eq(x, y) => write!(f, "{x} = {y}"),
            Formula::Not(g) => {
                if g.needs_parens_as_operand() {
                    write!(f, "!({g})")
                } else {
                    write!(f, "!{g}")
                }
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let op = if matches!(self, Formula::And(_)) {
                    " & "
                } else {
                    " | "
                };
                if gs.is_empty() {
                    return write!(f, "{}", if op == " & " { "true" } else { "false" });
                }
                if gs.len() == 1 {
                    return write!(f, "{}", gs[0]);
                }
                write!(f, "(")?;
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{op}")?;
                    }
                    if matches!(g, Formula::Exists(..) | Formula::Forall(..)) {
                        write!(f, "({g})")?;
                    } else {
                        write!(f, "{g}")?;
                    }
                }
                write!(f, ")")
            }
            Formula::Exists(v, g) => write!(f, "exists {v}. {g}"),
            Formula::Forall(v, g) => write!(f, "forall {v}. {g}"),
            Formula::QApp {
                quantifier,
                bindings,
            } => {
                write!(f, "{}[", quantifier.name)?;
                for (i, b) in bindings.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{}: {}", b.vars.join(","), b.body)?;
                }
                write!(f, "]")
            }
        }
    }
}
