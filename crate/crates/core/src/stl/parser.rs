//! Recursive-descent parser for the STL text syntax.
//!
//! ```text
//! formula  := or
//! or       := and ("|" and)*
//! and      := until ("&" until)*
//! until    := unary ("U" interval? until)?
//! unary    := "!" unary | atom
//! atom     := ("G" | "F") interval? "(" formula ")" | pred | "(" formula ")"
//! pred     := expr ("<" | "<=" | ">" | ">=") expr
//! interval := "[" num "," num "]"
//! ```
//!
//! A parenthesis at atom position is ambiguous between an arithmetic group and
//! a nested formula; the predicate reading is tried first and the parser
//! backtracks on failure.

use std::fmt;

use thiserror::Error;

use super::{BinOp, Cmp, Expr, Formula, Interval};

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at line {}, column {}: {}", self.line, self.col, self.msg)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Cmp(Cmp),
    Bang,
    Amp,
    Pipe,
    Globally,
    Eventually,
    Until,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("{other:?}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok, width: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned { tok, line: l0, col: c0 });
            *i += width;
            *col += width;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '[' => push(Tok::LBrack, 1, &mut i, &mut col),
            ']' => push(Tok::RBrack, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            '*' => push(Tok::Star, 1, &mut i, &mut col),
            '/' => push(Tok::Slash, 1, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Pipe, 1, &mut i, &mut col),
            '<' | '>' => {
                let eq = chars.get(i + 1) == Some(&'=');
                let cmp = match (c, eq) {
                    ('<', false) => Cmp::Lt,
                    ('<', true) => Cmp::Le,
                    ('>', false) => Cmp::Gt,
                    _ => Cmp::Ge,
                };
                push(Tok::Cmp(cmp), if eq { 2 } else { 1 }, &mut i, &mut col);
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let s: String = chars[start..j].iter().collect();
                let v: f64 = s.parse().map_err(|_| ParseError {
                    line: l0,
                    col: c0,
                    msg: format!("invalid number `{s}`"),
                })?;
                push(Tok::Num(v), j - start, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[start..j].iter().collect();
                let tok = match s.as_str() {
                    "G" => Tok::Globally,
                    "F" => Tok::Eventually,
                    "U" => Tok::Until,
                    _ => Tok::Ident(s),
                };
                push(tok, j - start, &mut i, &mut col);
            }
            other => {
                return Err(ParseError { line, col, msg: format!("unexpected character `{other}`") });
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Furthest failure seen, reported when every alternative fails.
    furthest: Option<(usize, ParseError)>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn fail<T>(&mut self, msg: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        let err = ParseError { line: s.line, col: s.col, msg: msg.into() };
        match &self.furthest {
            Some((p, _)) if *p > self.pos => {}
            _ => self.furthest = Some((self.pos, err.clone())),
        }
        Err(err)
    }

    fn unexpected<T>(&mut self, what: &str) -> PResult<T> {
        let found = self.peek().describe();
        self.fail(format!("expected {what}, found {found}"))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.unexpected(what)
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Formula> {
        let mut lhs = self.until()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> PResult<Formula> {
        let lhs = self.unary()?;
        if self.eat(&Tok::Until) {
            let interval = self.opt_interval()?;
            let rhs = self.until()?;
            return Ok(Formula::until(interval, lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Formula> {
        match self.peek() {
            Tok::Globally | Tok::Eventually => {
                let globally = *self.peek() == Tok::Globally;
                self.pos += 1;
                let interval = self.opt_interval()?;
                self.expect(Tok::LParen, "`(` after temporal operator")?;
                let body = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(if globally {
                    Formula::globally(interval, body)
                } else {
                    Formula::eventually(interval, body)
                })
            }
            _ => {
                let save = self.pos;
                match self.predicate() {
                    Ok(f) => Ok(f),
                    Err(pred_err) => {
                        self.pos = save;
                        if self.eat(&Tok::LParen) {
                            let inner = self.formula()?;
                            self.expect(Tok::RParen, "`)`")?;
                            Ok(inner)
                        } else {
                            Err(pred_err)
                        }
                    }
                }
            }
        }
    }

    fn predicate(&mut self) -> PResult<Formula> {
        let lhs = self.expr()?;
        let cmp = match self.peek() {
            Tok::Cmp(c) => *c,
            _ => return self.unexpected("comparison operator"),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(Formula::pred(lhs, cmp, rhs))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Minus => {
                self.pos += 1;
                Ok(Expr::neg(self.factor()?))
            }
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::Ident(n) => {
                self.pos += 1;
                Ok(Expr::Var(n))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.unexpected("expression"),
        }
    }

    fn opt_interval(&mut self) -> PResult<Option<Interval>> {
        if !self.eat(&Tok::LBrack) {
            return Ok(None);
        }
        let start = self.pos;
        let lo = self.number()?;
        self.expect(Tok::Comma, "`,`")?;
        let hi = self.number()?;
        self.expect(Tok::RBrack, "`]`")?;
        match Interval::new(lo, hi) {
            Some(i) => Ok(Some(i)),
            None => {
                self.pos = start;
                self.fail(format!("invalid interval [{lo},{hi}]: need 0 <= lo < hi"))
            }
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match *self.peek() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(v)
            }
            _ => self.unexpected("number"),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, furthest: None };
    let result = p.formula().and_then(|f| {
        if *p.peek() == Tok::Eof {
            Ok(f)
        } else {
            p.unexpected("end of input")
        }
    });
    result.map_err(|e| match p.furthest.take() {
        Some((_, far)) => far,
        None => e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::Predicate;

    fn p(s: &str) -> Formula {
        parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn globally_with_interval() {
        let expected = Formula::globally(
            Interval::new(0.0, 5.0),
            Formula::Pred(Predicate::new(
                Expr::bin(BinOp::Sub, Expr::var("dist"), Expr::Num(5.0)),
                false,
            )),
        );
        assert_eq!(p("G[0,5](dist - 5 >= 0)"), expected);
    }

    #[test]
    fn negated_comparison_normalizes() {
        let expected = Formula::not(Formula::Pred(Predicate::new(Expr::neg(Expr::var("dist")), false)));
        assert_eq!(p("!(dist <= 0)"), expected);
    }

    #[test]
    fn strictness_is_recorded() {
        match p("dist > 0") {
            Formula::Pred(pr) => assert!(pr.strict),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence() {
        // ! > U > & > |
        let f = p("!a > 0 U[0,1] b > 0 & c > 0 | d > 0");
        match f {
            Formula::Or(lhs, _) => match *lhs {
                Formula::And(u, _) => match *u {
                    Formula::Until(_, n, _) => assert!(matches!(*n, Formula::Not(_))),
                    other => panic!("{other:?}"),
                },
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn arithmetic_parens_vs_formula_parens() {
        assert!(matches!(p("(dist - 5) * 2 >= 0"), Formula::Pred(_)));
        assert!(matches!(p("((a > 0)) & (b < 1)"), Formula::And(..)));
    }

    #[test]
    fn unbounded_operators_flagged() {
        assert!(p("G(dist > 0)").has_unbounded());
        assert!(p("a > 0 U b > 0").has_unbounded());
        assert!(!p("F[0,1](a > 0)").has_unbounded());
    }

    #[test]
    fn pretty_print_reparses() {
        for s in [
            "G[0,5](dist - 5 >= 0)",
            "!(dist <= 0)",
            "a > 0 U[1,2] b <= -3.5",
            "F[0.5,2.5](x * y / 2 < 1e-3) | !(G(z >= x + 1))",
            "-x + 2 >= -(y - 1)",
        ] {
            let f = p(s);
            assert_eq!(p(&f.to_string()), f, "{s} -> {f}");
        }
    }

    #[test]
    fn errors_carry_location() {
        let e = parse("G[0,5](dist >= )").unwrap_err();
        assert_eq!((e.line, e.col), (1, 16), "{e}");
        let e = parse("a > 0 &\n  b >").unwrap_err();
        assert_eq!(e.line, 2, "{e}");
        assert!(parse("G[5,1](a > 0)").unwrap_err().msg.contains("interval"));
        assert!(parse("a > 0 $").is_err());
        assert!(parse("").is_err());
    }
}
