//! Group word expressions.
//!
//! ```text
//! expr     := factor+
//! factor   := atom ('^' exponent)*
//! atom     := name | '1' | '(' expr ')' | '[' expr ',' expr ']'
//! exponent := '-'? (integer | name | '(' expsum ')' | '[' expr ',' expr ']')
//! expsum   := ('+'|'-')? term (('+'|'-') term)*
//! term     := efactor+
//! efactor  := integer | name ('^' exponent)? | '(' expsum ')' | '[' expr ',' expr ']' ('^' exponent)?
//! name     := letter (digit | '_')* | '{' identifier '}'
//! ```
//!
//! Conventions: `a^b = b⁻¹ab`, `a^(x+y) = a^x a^y`, `a^(xy) = (a^x)^y` and
//! `[a,b] = a⁻¹b⁻¹ab`. An upper-case name that is not itself a generator denotes
//! the inverse of its lower-case form. Inside exponents a name bound in the
//! variable environment (such as `p`) is an integer.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::automaton::{SignedState, Transducer, IDENTITY};
use crate::word::GroupWord;

/// The expression grammar, for usage messages.
pub const GRAMMAR: &str = "\
expr     := factor+
factor   := atom ('^' exponent)*
atom     := name | '1' | '(' expr ')' | '[' expr ',' expr ']'
exponent := '-'? (integer | name | '(' expsum ')' | '[' expr ',' expr ']')
expsum   := ('+'|'-')? term (('+'|'-') term)*
term     := efactor+
efactor  := integer | name ('^' exponent)? | '(' expsum ')' | '[' expr ',' expr ']' ('^' exponent)?
name     := letter (digit | '_')* | '{' identifier '}'
a^b = b^-1 a b, [a,b] = a^-1 b^-1 a b, upper case denotes an inverse
";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("syntax error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("exponent {0} too large")]
    ExponentTooLarge(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordExpr {
    Identity,
    Gen(String),
    Product(Vec<WordExpr>),
    Power(Box<WordExpr>, Exponent),
    Commutator(Box<WordExpr>, Box<WordExpr>),
}

/// A signed sum of exponent terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exponent(pub Vec<ExpTerm>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpTerm {
    pub negative: bool,
    pub factors: Vec<ExpFactor>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpFactor {
    Int(i64),
    /// A variable if bound, otherwise conjugation by a generator.
    Name(String),
    Conjugator(WordExpr),
    Sum(Exponent),
}

/// Name resolution for evaluation.
pub trait Generators {
    /// `Some(None)` is the identity, `Some(Some(s))` a signed generator.
    fn lookup(&self, name: &str) -> Option<Option<SignedState>>;

    fn resolve(&self, name: &str) -> Option<Option<SignedState>> {
        if let Some(r) = self.lookup(name) {
            return Some(r);
        }
        let mut chars = name.chars();
        let first = chars.next()?;
        if first.is_ascii_uppercase() {
            let lower: String = std::iter::once(first.to_ascii_lowercase())
                .chain(chars)
                .collect();
            if let Some(Some(s)) = self.lookup(&lower) {
                return Some(Some(s.inverse()));
            }
        }
        None
    }
}

impl Generators for Transducer {
    fn lookup(&self, name: &str) -> Option<Option<SignedState>> {
        let s = self.canonical(SignedState::positive(self.state_by_name(name)?));
        if s.state() == IDENTITY {
            Some(None)
        } else {
            Some(Some(s))
        }
    }
}

impl Generators for [String] {
    fn lookup(&self, name: &str) -> Option<Option<SignedState>> {
        self.iter()
            .position(|n| n == name)
            .map(|i| Some(SignedState::positive(i)))
    }
}

impl Generators for Vec<String> {
    fn lookup(&self, name: &str) -> Option<Option<SignedState>> {
        self.as_slice().lookup(name)
    }
}

const MAX_EXPONENT: i64 = 1 << 20;

impl WordExpr {
    pub fn eval<G: Generators + ?Sized>(&self, gens: &G) -> Result<GroupWord, EvalError> {
        self.eval_with(gens, &HashMap::new())
    }

    pub fn eval_with<G: Generators + ?Sized>(
        &self,
        gens: &G,
        vars: &HashMap<String, i64>,
    ) -> Result<GroupWord, EvalError> {
        match self {
            WordExpr::Identity => Ok(GroupWord::empty()),
            WordExpr::Gen(name) => match gens.resolve(name) {
                Some(Some(s)) => Ok(GroupWord::generator(s)),
                Some(None) => Ok(GroupWord::empty()),
                None => Err(EvalError::UnknownGenerator(name.clone())),
            },
            WordExpr::Product(parts) => {
                let mut out = GroupWord::empty();
                for p in parts {
                    out.extend_word(&p.eval_with(gens, vars)?);
                }
                Ok(out)
            }
            WordExpr::Power(base, exp) => {
                let b = base.eval_with(gens, vars)?;
                apply_exponent(&b, exp, gens, vars)
            }
            WordExpr::Commutator(x, y) => Ok(GroupWord::commutator(
                &x.eval_with(gens, vars)?,
                &y.eval_with(gens, vars)?,
            )),
        }
    }

    /// True if `name` occurs anywhere, as a generator or as an exponent symbol.
    pub fn mentions(&self, name: &str) -> bool {
        match self {
            WordExpr::Identity => false,
            WordExpr::Gen(n) => n == name,
            WordExpr::Product(parts) => parts.iter().any(|p| p.mentions(name)),
            WordExpr::Power(b, e) => b.mentions(name) || e.mentions(name),
            WordExpr::Commutator(x, y) => x.mentions(name) || y.mentions(name),
        }
    }
}

impl Exponent {
    fn mentions(&self, name: &str) -> bool {
        self.0.iter().flat_map(|t| &t.factors).any(|f| match f {
            ExpFactor::Int(_) => false,
            ExpFactor::Name(n) => n == name,
            ExpFactor::Conjugator(e) => e.mentions(name),
            ExpFactor::Sum(s) => s.mentions(name),
        })
    }
}

fn apply_exponent<G: Generators + ?Sized>(
    base: &GroupWord,
    exp: &Exponent,
    gens: &G,
    vars: &HashMap<String, i64>,
) -> Result<GroupWord, EvalError> {
    let mut out = GroupWord::empty();
    for term in &exp.0 {
        let mut cur = base.clone();
        for f in &term.factors {
            cur = match f {
                ExpFactor::Int(k) => checked_pow(&cur, *k)?,
                ExpFactor::Name(n) => match vars.get(n) {
                    Some(&k) => checked_pow(&cur, k)?,
                    None => cur.conjugate(&WordExpr::Gen(n.clone()).eval_with(gens, vars)?),
                },
                ExpFactor::Conjugator(e) => cur.conjugate(&e.eval_with(gens, vars)?),
                ExpFactor::Sum(s) => apply_exponent(&cur, s, gens, vars)?,
            };
        }
        if term.negative {
            cur = cur.inverse();
        }
        out.extend_word(&cur);
    }
    Ok(out)
}

fn checked_pow(w: &GroupWord, k: i64) -> Result<GroupWord, EvalError> {
    if k.abs() > MAX_EXPONENT || (w.len() as i64).saturating_mul(k.abs()) > (MAX_EXPONENT << 4) {
        return Err(EvalError::ExponentTooLarge(k));
    }
    Ok(w.pow(k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Int(i64),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse().map_err(|_| ParseError {
                position: start,
                message: "integer too large".into(),
            })?;
            out.push((start, Tok::Int(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Name(chars[start..i].iter().collect())));
        } else if c == '{' {
            let start = i;
            let end = chars[i..]
                .iter()
                .position(|&c| c == '}')
                .map(|p| p + i)
                .ok_or(ParseError {
                    position: start,
                    message: "unterminated `{`".into(),
                })?;
            let name: String = chars[start + 1..end].iter().collect();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ParseError {
                    position: start,
                    message: "bad name in braces".into(),
                });
            }
            out.push((start, Tok::Name(name)));
            i = end + 1;
        } else if "()[],^+-".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError {
                position: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn position(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, message: &str) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.position(),
            message: message.to_string(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected `{c}`"))
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Name(_)) | Some(Tok::Int(1)) | Some(Tok::Sym('(')) | Some(Tok::Sym('['))
        )
    }

    fn expr(&mut self) -> Result<WordExpr, ParseError> {
        let mut factors = Vec::new();
        while self.starts_atom() {
            factors.push(self.factor()?);
        }
        match factors.len() {
            0 => self.err("expected a generator, `(` or `[`"),
            1 => Ok(factors.pop().expect("one factor")),
            _ => Ok(WordExpr::Product(factors)),
        }
    }

    fn factor(&mut self) -> Result<WordExpr, ParseError> {
        let mut base = self.atom()?;
        while self.eat('^') {
            base = WordExpr::Power(Box::new(base), self.exponent()?);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<WordExpr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(WordExpr::Gen(n))
            }
            Some(Tok::Int(1)) => {
                self.pos += 1;
                Ok(WordExpr::Identity)
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Sym('[')) => self.commutator(),
            _ => self.err("expected a generator, `(` or `[`"),
        }
    }

    fn commutator(&mut self) -> Result<WordExpr, ParseError> {
        self.expect('[')?;
        let x = self.expr()?;
        self.expect(',')?;
        let y = self.expr()?;
        self.expect(']')?;
        Ok(WordExpr::Commutator(Box::new(x), Box::new(y)))
    }

    /// The single exponent directly following `^`.
    fn exponent(&mut self) -> Result<Exponent, ParseError> {
        let negative = self.eat('-');
        let factor = match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                self.pos += 1;
                ExpFactor::Int(k)
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                ExpFactor::Name(n)
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let s = self.expsum()?;
                self.expect(')')?;
                ExpFactor::Sum(s)
            }
            Some(Tok::Sym('[')) => ExpFactor::Conjugator(self.commutator()?),
            _ => return self.err("expected an exponent"),
        };
        Ok(Exponent(vec![ExpTerm {
            negative,
            factors: vec![factor],
        }]))
    }

    fn expsum(&mut self) -> Result<Exponent, ParseError> {
        let mut terms = Vec::new();
        let mut negative = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        loop {
            let factors = self.expterm()?;
            terms.push(ExpTerm { negative, factors });
            if self.eat('+') {
                negative = false;
            } else if self.eat('-') {
                negative = true;
            } else {
                break;
            }
        }
        Ok(Exponent(terms))
    }

    fn expterm(&mut self) -> Result<Vec<ExpFactor>, ParseError> {
        let mut factors = Vec::new();
        loop {
            match self.peek().cloned() {
                Some(Tok::Int(k)) => {
                    self.pos += 1;
                    factors.push(ExpFactor::Int(k));
                }
                Some(Tok::Name(n)) => {
                    self.pos += 1;
                    if self.eat('^') {
                        let e = self.exponent()?;
                        factors.push(ExpFactor::Conjugator(WordExpr::Power(
                            Box::new(WordExpr::Gen(n)),
                            e,
                        )));
                    } else {
                        factors.push(ExpFactor::Name(n));
                    }
                }
                Some(Tok::Sym('(')) => {
                    self.pos += 1;
                    let s = self.expsum()?;
                    self.expect(')')?;
                    factors.push(ExpFactor::Sum(s));
                }
                Some(Tok::Sym('[')) => {
                    let mut c = self.commutator()?;
                    while self.eat('^') {
                        c = WordExpr::Power(Box::new(c), self.exponent()?);
                    }
                    factors.push(ExpFactor::Conjugator(c));
                }
                _ => break,
            }
        }
        if factors.is_empty() {
            return self.err("expected an exponent term");
        }
        Ok(factors)
    }
}

/// Parses a word expression.
pub fn parse_word(text: &str) -> Result<WordExpr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
    };
    if p.peek().is_none() {
        return Ok(WordExpr::Identity);
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parses and evaluates in one step.
pub fn eval_word<G: Generators + ?Sized>(gens: &G, text: &str) -> Result<GroupWord, WordError> {
    Ok(parse_word(text)?.eval(gens)?)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl fmt::Display for WordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordExpr::Identity => f.write_str("1"),
            WordExpr::Gen(n)
                if n.len() == 1 || n[1..].chars().all(|c| c.is_ascii_digit() || c == '_') =>
            {
                f.write_str(n)
            }
            WordExpr::Gen(n) => write!(f, "{{{n}}}"),
            WordExpr::Product(ps) => {
                for p in ps {
                    match p {
                        WordExpr::Product(_) => write!(f, "({p})")?,
                        _ => write!(f, "{p}")?,
                    }
                }
                Ok(())
            }
            WordExpr::Power(b, e) => {
                match **b {
                    WordExpr::Product(_) => write!(f, "({b})")?,
                    _ => write!(f, "{b}")?,
                }
                write!(f, "^{e}")
            }
            WordExpr::Commutator(x, y) => write!(f, "[{x},{y}]"),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let simple = self.0.len() == 1 && !self.0[0].negative && self.0[0].factors.len() == 1;
        if simple {
            return write_factor(f, &self.0[0].factors[0]);
        }
        f.write_str("(")?;
        for (i, t) in self.0.iter().enumerate() {
            if t.negative {
                f.write_str("-")?;
            } else if i > 0 {
                f.write_str("+")?;
            }
            for (j, factor) in t.factors.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write_factor(f, factor)?;
            }
        }
        f.write_str(")")
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, factor: &ExpFactor) -> fmt::Result {
    match factor {
        ExpFactor::Int(k) => write!(f, "{k}"),
        ExpFactor::Name(n) => write!(f, "{}", WordExpr::Gen(n.clone())),
        ExpFactor::Conjugator(e) => match e {
            WordExpr::Gen(_) | WordExpr::Commutator(..) => write!(f, "{e}"),
            _ => write!(f, "({e})"),
        },
        ExpFactor::Sum(s) => write!(f, "{s}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::builtin;

    fn gamma_word(text: &str) -> GroupWord {
        eval_word(&builtin("gamma", None).unwrap(), text).unwrap()
    }

    #[test]
    fn commutator_expands() {
        assert_eq!(gamma_word("[a,b]"), gamma_word("ABab"));
        assert_eq!(gamma_word("[a,b]"), gamma_word("a^-1 b^-1 a b"));
        // [a,b] = a^(-1+b)
        assert_eq!(gamma_word("[a,b]"), gamma_word("a^(-1+b)"));
    }

    #[test]
    fn free_cancellation() {
        assert!(gamma_word("aA").is_empty());
        assert!(gamma_word("").is_empty());
        assert!(gamma_word("1").is_empty());
        assert!(gamma_word("{id}").is_empty());
    }

    #[test]
    fn exponent_sums_and_products() {
        let names: Vec<String> = ["a", "t"].iter().map(|s| s.to_string()).collect();
        let w = |s: &str| eval_word(&names, s).unwrap();
        assert_eq!(
            w("a^(t a t^2 + t a t + t a)"),
            w("a^(t a t t) a^(t a t) a^(t a)")
        );
        assert_eq!(w("a^(t a t t)"), w("TTATatatt"));
        assert_eq!(w("a^((1+ta)8)"), w("(a a^(ta))^8"));
        assert_eq!(w("a^(1+tat^2+(1+ta)2)"), w("a a^(tatt) (a a^(ta))^2"));
        assert_eq!(w("a^(t^2-2)"), w("TTatt A A"));
        assert_eq!(w("a^-t"), w("Ta^-1 t"));
    }

    #[test]
    fn variables_in_exponents() {
        let t = builtin("gamma", None).unwrap();
        let e = parse_word("[[a^p,b^p],b^p]").unwrap();
        assert!(e.mentions("p"));
        let vars = HashMap::from([("p".to_string(), 2)]);
        assert_eq!(
            e.eval_with(&t, &vars).unwrap(),
            gamma_word("[[a^2,b^2],b^2]")
        );
        let e = parse_word("[[b^p,a^(2p)],a^(2p)]").unwrap();
        assert_eq!(
            e.eval_with(&t, &vars).unwrap(),
            gamma_word("[[b^2,a^4],a^4]")
        );
        assert_eq!(e.eval(&t), Err(EvalError::UnknownGenerator("p".into())));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_word("[a,b").unwrap_err().position, 4);
        assert_eq!(parse_word("a^").unwrap_err().position, 2);
        assert_eq!(parse_word("a $").unwrap_err().position, 2);
        let t = builtin("gamma", None).unwrap();
        assert_eq!(
            eval_word(&t, "az"),
            Err(WordError::Eval(EvalError::UnknownGenerator("z".into())))
        );
    }

    #[test]
    fn display_round_trips() {
        let names: Vec<String> = ["a", "b", "t"].iter().map(|s| s.to_string()).collect();
        for s in [
            "[[a^2,b^2],b^2]",
            "a^(t a t^2+t a t+t a)",
            "b^(t^2-2)",
            "[[[b,t^-1],b],b]",
            "(ab)^3 a^b",
        ] {
            let e = parse_word(s).unwrap();
            let again = parse_word(&e.to_string()).unwrap();
            assert_eq!(
                e.eval(&names).unwrap(),
                again.eval(&names).unwrap(),
                "{s} vs {e}"
            );
        }
    }
}
