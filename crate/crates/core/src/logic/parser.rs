//! Recursive-descent parser for the formula language.
//!
//! ```text
//! formula := disj
//! disj    := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '!' unary | quant | atom
//! quant   := ('exists' | 'forall') var (','? var)* '.'? formula
//! atom    := 'true' | 'false' | '(' formula ')' | R '(' vars ')'
//!          | Q '[' vars ':' formula (';' vars ':' formula)* ']'
//!          | var '=' var | var '!=' var
//! ```
//!
//! Unicode `∃ ∀ ¬ ∧ ∨ ≠` are accepted as synonyms. A quantifier body extends
//! as far to the right as possible.

use crate::error::{Error, Result};
use crate::structure::Vocabulary;

use super::formula::{Binding, Formula};
use super::quantifier::Registry;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Colon,
    Semi,
    Not,
    And,
    Or,
    Eq,
    Neq,
    Exists,
    Forall,
    True,
    False,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::End => "end of input".into(),
            other => format!(
                "`{}`",
                match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBrack => "[",
                    Tok::RBrack => "]",
                    Tok::Comma => ",",
                    Tok::Dot => ".",
                    Tok::Colon => ":",
                    Tok::Semi => ";",
                    Tok::Not => "!",
                    Tok::And => "&",
                    Tok::Or => "|",
                    Tok::Eq => "=",
                    Tok::Neq => "!=",
                    Tok::Exists => "exists",
                    Tok::Forall => "forall",
                    Tok::True => "true",
                    Tok::False => "false",
                    Tok::Ident(_) | Tok::End => unreachable!(),
                }
            ),
        }
    }
}

struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '*' | '\'')
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| is_ident_char(c)) {
                s.push(bump(&mut chars));
            }
            match s.as_str() {
                "exists" => Tok::Exists,
                "forall" => Tok::Forall,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(s),
            }
        } else {
            bump(&mut chars);
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                '&' | '∧' => Tok::And,
                '|' | '∨' => Tok::Or,
                '=' => Tok::Eq,
                '≠' => Tok::Neq,
                '¬' | '~' => Tok::Not,
                '∃' => Tok::Exists,
                '∀' => Tok::Forall,
                '!' => {
                    if chars.peek() == Some(&'=') {
                        bump(&mut chars);
                        Tok::Neq
                    } else {
                        Tok::Not
                    }
                }
                other => {
                    return Err(Error::Parse {
                        line: l,
                        column: col,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        };
        out.push(Token {
            tok,
            line: l,
            column: col,
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    vocab: Option<&'a Vocabulary>,
    registry: &'a Registry,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, pos: usize, message: String) -> Error {
        let t = &self.toks[pos];
        Error::Parse {
            line: t.line,
            column: t.column,
            message,
        }
    }

    fn error(&self, message: String) -> Error {
        self.error_at(self.pos, message)
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.advance() {
            Tok::Ident(s) => Ok(s),
            other => {
                self.pos -= 1;
                Err(self.error(format!("expected {what}, found {}", other.describe())))
            }
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut parts = vec![self.conj()?];
        while *self.peek() == Tok::Or {
            self.advance();
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.advance();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::Not => {
                self.advance();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Exists | Tok::Forall => self.quantified(),
            _ => self.atom(),
        }
    }

    /// A variable in a quantifier prefix: an identifier not starting an atom.
    fn starts_var(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_))
            && !matches!(
                self.peek_at(1),
                Tok::LParen | Tok::LBrack | Tok::Eq | Tok::Neq
            )
    }

    fn quantified(&mut self) -> Result<Formula> {
        let universal = self.advance() == Tok::Forall;
        let mut vars = vec![self.ident("a variable")?];
        loop {
            if *self.peek() == Tok::Comma {
                self.advance();
                vars.push(self.ident("a variable")?);
            } else if self.starts_var() {
                vars.push(self.ident("a variable")?);
            } else {
                break;
            }
        }
        if *self.peek() == Tok::Dot {
            self.advance();
        }
        let mut body = self.formula()?;
        for v in vars.iter().rev() {
            body = if universal {
                Formula::forall(v, body)
            } else {
                Formula::exists(v, body)
            };
        }
        Ok(body)
    }

    fn var_list(&mut self, close: Tok) -> Result<Vec<String>> {
        let mut vars = Vec::new();
        if *self.peek() == close {
            return Ok(vars);
        }
        vars.push(self.ident("a variable")?);
        while *self.peek() == Tok::Comma {
            self.advance();
            vars.push(self.ident("a variable")?);
        }
        Ok(vars)
    }

    fn atom(&mut self) -> Result<Formula> {
        let start = self.pos;
        match self.advance() {
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => match self.peek().clone() {
                Tok::LParen => {
                    self.advance();
                    let args = self.var_list(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    if let Some(vocab) = self.vocab {
                        let arity = vocab.arity(&name).ok_or_else(|| {
                            self.error_at(start, format!("unknown relation symbol `{name}`"))
                        })?;
                        if arity != args.len() {
                            return Err(self.error_at(
                                start,
                                format!(
                                    "arity mismatch for `{name}`: expected {arity}, got {}",
                                    args.len()
                                ),
                            ));
                        }
                    }
                    Ok(Formula::Atom { rel: name, args })
                }
                Tok::LBrack => {
                    self.advance();
                    self.qapp(name, start)
                }
                Tok::Eq | Tok::Neq => {
                    let negated = self.advance() == Tok::Neq;
                    let rhs = self.ident("a variable")?;
                    let eq = Formula::Eq(name, rhs);
                    Ok(if negated { Formula::not(eq) } else { eq })
                }
                other => Err(self.error(format!(
                    "expected `(`, `[`, `=` or `!=` after `{name}`, found {}",
                    other.describe()
                ))),
            },
            other => {
                self.pos = start;
                Err(self.error(format!("expected a formula, found {}", other.describe())))
            }
        }
    }

    fn qapp(&mut self, name: String, start: usize) -> Result<Formula> {
        let q = self
            .registry
            .get(&name)
            .cloned()
            .ok_or_else(|| self.error_at(start, format!("unknown quantifier `{name}`")))?;
        let mut bindings = Vec::new();
        loop {
            let at = self.pos;
            let vars = self.var_list(Tok::Colon)?;
            self.expect(Tok::Colon)?;
            let body = self.formula()?;
            let i = bindings.len();
            if i < q.sigma.len() && vars.len() != q.sigma.arity_at(i) {
                return Err(self.error_at(
                    at,
                    format!(
                        "binding {} of `{name}` binds {} variables, but `{}` has arity {}",
                        i + 1,
                        vars.len(),
                        q.sigma.name(i),
                        q.sigma.arity_at(i)
                    ),
                ));
            }
            bindings.push(Binding { vars, body });
            match self.advance() {
                Tok::Semi => continue,
                Tok::RBrack => break,
                other => {
                    self.pos -= 1;
                    return Err(
                        self.error(format!("expected `;` or `]`, found {}", other.describe()))
                    );
                }
            }
        }
        if bindings.len() != q.sigma.len() {
            return Err(self.error_at(
                start,
                format!(
                    "`{name}` takes {} bindings, got {}",
                    q.sigma.len(),
                    bindings.len()
                ),
            ));
        }
        Ok(Formula::QApp {
            quantifier: q,
            bindings,
        })
    }
}

fn parse(text: &str, vocab: Option<&Vocabulary>, registry: &Registry) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vocab,
        registry,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.error(format!("unexpected {} after formula", p.peek().describe())));
    }
    Ok(f)
}

/// Parse and check relation symbols and arities against `vocab`.
pub fn parse_formula(text: &str, vocab: &Vocabulary, registry: &Registry) -> Result<Formula> {
    parse(text, Some(vocab), registry)
}

/// Parse without a vocabulary; relation symbols are unchecked.
pub fn parse_formula_loose(text: &str, registry: &Registry) -> Result<Formula> {
    parse(text, None, registry)
}
