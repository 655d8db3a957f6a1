//! First-order logic with generalized quantifiers: syntax, parsing, model
//! checking, and interpretations.

mod eval;
mod formula;
mod interp;
mod parser;
mod quantifier;

pub use eval::{evaluate, evaluate_idx, evaluate_sentence, quantifier_structure};
pub use formula::{Binding, Formula};
pub use interp::{
    apply_interpretation, fresh_variable, rewrite_defined_quantifier, substitute_interpretation,
    substitute_vars, Interpretation, RelationDef,
};
pub use parser::{parse_formula, parse_formula_loose};
pub use quantifier::{quantifier_member, QuantifierDef, Registry, Semantics};

/// Quantifier rank: nesting depth of first-order and generalized quantifiers.
pub fn quantifier_rank(phi: &Formula) -> usize {
    phi.quantifier_rank()
}
