//! Concrete syntax for terms and paths.
//!
//! Terms:
//! ```text
//! term := atom+                        (application, left-associative)
//! atom := ident | "(" term ")" | "\" ident "." atom
//! ```
//! A lambda body is a single atom, so `(\x.((\y.(y x)) (\w.(z w))) v)`
//! reads as the application of `\x.((\y.(y x)) (\w.(z w)))` to `v`.
//!
//! Paths:
//! ```text
//! path := "rho[" end "]" | "beta[" term "=>" term "]" | "eta[" term "=>" term "]"
//!       | "alpha[" term "=>" term "]" | "#" ident ":" end "->" end
//!       | "sigma(" path ")" | "tau(" path "," path ")" | "xi(" ident "." path ")"
//!       | "mu(" term "," path ")" | "nu(" path "," term ")"
//!       | rule "(" path "," path ")"          rule ∈ {sr,ss,tr,tsr,trr,tlr,tt}
//! ```
//! `beta[...]`/`eta[...]` are validated against the actual one-step
//! contractions of the written subject; compound constructors are validated
//! for endpoint agreement on construction.

use std::fmt;

use thiserror::Error;

use crate::path::{
    mk_alpha, mk_atom, mk_mu, mk_nu, mk_sigma, mk_tau, mk_xi, Endpoint, Path,
};
use crate::rewrite::{validate_rule_step, RuleId};
use crate::term::{alpha_eq, contraction_sites, RedexKind, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Backslash,
    Dot,
    Comma,
    Colon,
    Hash,
    Arrow,    // ->
    FatArrow, // =>
    Ident(String),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::LBracket => write!(f, "["),
            Token::RBracket => write!(f, "]"),
            Token::Backslash => write!(f, "\\"),
            Token::Dot => write!(f, "."),
            Token::Comma => write!(f, ","),
            Token::Colon => write!(f, ":"),
            Token::Hash => write!(f, "#"),
            Token::Arrow => write!(f, "->"),
            Token::FatArrow => write!(f, "=>"),
            Token::Ident(s) => write!(f, "{s}"),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

struct Lexer;

impl Lexer {
    fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, ParseError> {
        let mut out = Vec::new();
        let bytes: Vec<char> = src.chars().collect();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let start = i;
            match c {
                c if c.is_whitespace() => {
                    i += 1;
                }
                '(' => {
                    out.push((Token::LParen, start));
                    i += 1;
                }
                ')' => {
                    out.push((Token::RParen, start));
                    i += 1;
                }
                '[' => {
                    out.push((Token::LBracket, start));
                    i += 1;
                }
                ']' => {
                    out.push((Token::RBracket, start));
                    i += 1;
                }
                '\\' | 'λ' => {
                    out.push((Token::Backslash, start));
                    i += 1;
                }
                '.' => {
                    out.push((Token::Dot, start));
                    i += 1;
                }
                ',' => {
                    out.push((Token::Comma, start));
                    i += 1;
                }
                ':' => {
                    out.push((Token::Colon, start));
                    i += 1;
                }
                '#' => {
                    out.push((Token::Hash, start));
                    i += 1;
                }
                '-' if i + 1 < bytes.len() && bytes[i + 1] == '>' => {
                    out.push((Token::Arrow, start));
                    i += 2;
                }
                '=' if i + 1 < bytes.len() && bytes[i + 1] == '>' => {
                    out.push((Token::FatArrow, start));
                    i += 2;
                }
                c if is_ident_char(c) => {
                    let mut j = i;
                    while j < bytes.len() && is_ident_char(bytes[j]) {
                        j += 1;
                    }
                    out.push((Token::Ident(bytes[i..j].iter().collect()), start));
                    i = j;
                }
                other => {
                    return Err(err_at(src, start, format!("unexpected character '{other}'")))
                }
            }
        }
        Ok(out)
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in src.chars().enumerate() {
        if i == offset {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn err_at(src: &str, offset: usize, msg: String) -> ParseError {
    let (line, col) = line_col(src, offset);
    ParseError { line, col, msg }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Token, usize)>,
    pos: usize,
}

const PATH_PAREN_KEYWORDS: &[&str] = &[
    "sigma", "tau", "xi", "mu", "nu", "sr", "ss", "tr", "tsr", "trr", "tlr", "tt",
];
const PATH_BRACKET_KEYWORDS: &[&str] = &["rho", "beta", "eta", "alpha"];

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        Ok(Parser {
            src,
            toks: Lexer::tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Token> {
        self.toks.get(self.pos + 1).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.src.len())
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        err_at(self.src, self.offset(), msg.into())
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        match self.next() {
            Some(ref t) if *t == want => Ok(()),
            Some(t) => Err(err_at(
                self.src,
                self.toks[self.pos - 1].1,
                format!("expected '{want}', found '{t}'"),
            )),
            None => Err(self.error(format!("expected '{want}', found end of input"))),
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.next() {
            Some(Token::Ident(s)) => Ok(s),
            Some(t) => Err(err_at(
                self.src,
                self.toks[self.pos - 1].1,
                format!("expected identifier, found '{t}'"),
            )),
            None => Err(self.error("expected identifier, found end of input")),
        }
    }

    fn at_term_atom_start(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::Ident(_)) | Some(Token::LParen) | Some(Token::Backslash)
        )
    }

    // term := atom+  (left-associative application)
    fn term(&mut self) -> Result<Term, ParseError> {
        let mut cur = self.term_atom()?;
        while self.at_term_atom_start() {
            let next = self.term_atom()?;
            cur = Term::app(cur, next);
        }
        Ok(cur)
    }

    fn term_atom(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Token::Ident(_)) => {
                let name = self.expect_ident()?;
                Ok(Term::var(name))
            }
            Some(Token::LParen) => {
                self.expect(Token::LParen)?;
                let t = self.term()?;
                self.expect(Token::RParen)?;
                Ok(t)
            }
            Some(Token::Backslash) => {
                self.expect(Token::Backslash)?;
                let binder = self.expect_ident()?;
                self.expect(Token::Dot)?;
                let body = self.term_atom()?;
                Ok(Term::abs(binder, body))
            }
            _ => Err(self.error("expected a term")),
        }
    }

    /// True when the upcoming tokens start a path rather than a term.
    fn at_path_start(&self) -> bool {
        match self.peek() {
            Some(Token::Hash) => true,
            Some(Token::Ident(name)) => match self.peek2() {
                Some(Token::LParen) => PATH_PAREN_KEYWORDS.contains(&name.as_str()),
                Some(Token::LBracket) => PATH_BRACKET_KEYWORDS.contains(&name.as_str()),
                _ => false,
            },
            _ => false,
        }
    }

    fn endpoint(&mut self) -> Result<Endpoint, ParseError> {
        if self.at_path_start() {
            Ok(Endpoint::path(self.path()?))
        } else {
            Ok(Endpoint::Term(self.term()?))
        }
    }

    fn lift(&self, offset: usize, res: Result<Path, crate::path::PathError>) -> Result<Path, ParseError> {
        res.map_err(|e| err_at(self.src, offset, e.to_string()))
    }

    fn path(&mut self) -> Result<Path, ParseError> {
        let start = self.offset();
        match self.peek() {
            Some(Token::Hash) => {
                self.expect(Token::Hash)?;
                let name = self.expect_ident()?;
                self.expect(Token::Colon)?;
                let src = self.endpoint()?;
                self.expect(Token::Arrow)?;
                let tgt = self.endpoint()?;
                self.lift(start, mk_atom(name, src, tgt))
            }
            Some(Token::Ident(_)) => {
                let kw = self.expect_ident()?;
                match kw.as_str() {
                    "rho" => {
                        self.expect(Token::LBracket)?;
                        let e = self.endpoint()?;
                        self.expect(Token::RBracket)?;
                        Ok(Path::Rho(e))
                    }
                    "beta" | "eta" => {
                        self.expect(Token::LBracket)?;
                        let from = self.term()?;
                        self.expect(Token::FatArrow)?;
                        let to = self.term()?;
                        self.expect(Token::RBracket)?;
                        let kind = if kw == "beta" {
                            RedexKind::Beta
                        } else {
                            RedexKind::Eta
                        };
                        let site = contraction_sites(&from)
                            .into_iter()
                            .find(|s| s.kind == kind && alpha_eq(&s.result, &to))
                            .ok_or_else(|| {
                                err_at(
                                    self.src,
                                    start,
                                    format!("'{to}' is not a one-step {kw} contraction of '{from}'"),
                                )
                            })?;
                        Ok(Path::from_site(&from, &site))
                    }
                    "alpha" => {
                        self.expect(Token::LBracket)?;
                        let from = self.term()?;
                        self.expect(Token::FatArrow)?;
                        let to = self.term()?;
                        self.expect(Token::RBracket)?;
                        self.lift(start, mk_alpha(from, to))
                    }
                    "sigma" => {
                        self.expect(Token::LParen)?;
                        let p = self.path()?;
                        self.expect(Token::RParen)?;
                        Ok(mk_sigma(p))
                    }
                    "tau" => {
                        self.expect(Token::LParen)?;
                        let l = self.path()?;
                        self.expect(Token::Comma)?;
                        let r = self.path()?;
                        self.expect(Token::RParen)?;
                        self.lift(start, mk_tau(l, r))
                    }
                    "xi" => {
                        self.expect(Token::LParen)?;
                        let binder = self.expect_ident()?;
                        self.expect(Token::Dot)?;
                        let body = self.path()?;
                        self.expect(Token::RParen)?;
                        self.lift(start, mk_xi(binder, body))
                    }
                    "mu" => {
                        self.expect(Token::LParen)?;
                        let fun = self.term()?;
                        self.expect(Token::Comma)?;
                        let arg = self.path()?;
                        self.expect(Token::RParen)?;
                        self.lift(start, mk_mu(fun, arg))
                    }
                    "nu" => {
                        self.expect(Token::LParen)?;
                        let fun = self.path()?;
                        self.expect(Token::Comma)?;
                        let arg = self.term()?;
                        self.expect(Token::RParen)?;
                        self.lift(start, mk_nu(fun, arg))
                    }
                    rule_name => {
                        let rule: RuleId = rule_name.parse().map_err(|_| {
                            err_at(self.src, start, format!("expected a path, found '{kw}'"))
                        })?;
                        self.expect(Token::LParen)?;
                        let from = self.path()?;
                        self.expect(Token::Comma)?;
                        let to = self.path()?;
                        self.expect(Token::RParen)?;
                        if !validate_rule_step(rule, &from, &to) {
                            return Err(err_at(
                                self.src,
                                start,
                                format!("paths do not match the schema of rule {rule}"),
                            ));
                        }
                        Ok(Path::RuleStep {
                            rule,
                            from: Box::new(from),
                            to: Box::new(to),
                        })
                    }
                }
            }
            _ => Err(self.error("expected a path")),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }
}

/// Parse a complete term.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

/// Parse a complete path.
pub fn parse_path(src: &str) -> Result<Path, ParseError> {
    let mut p = Parser::new(src)?;
    let path = p.path()?;
    p.finish()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_simple_terms() {
        assert_eq!(parse_term("x").unwrap(), Term::var("x"));
        assert_eq!(
            parse_term("(\\x.x)").unwrap(),
            Term::abs("x", Term::var("x"))
        );
        assert_eq!(
            parse_term("(f x y)").unwrap(),
            Term::app(Term::app(Term::var("f"), Term::var("x")), Term::var("y"))
        );
    }

    #[test]
    fn lambda_sugar() {
        let t = parse_term("\\x.\\y.(x y)").unwrap();
        assert_eq!(
            t,
            Term::abs("x", Term::abs("y", Term::app(Term::var("x"), Term::var("y"))))
        );
    }

    #[test]
    fn example_term_shape() {
        // A lambda atom applied to v: the application is at the root.
        let t = parse_term("(\\x.((\\y.(y x)) (\\w.(z w))) v)").unwrap();
        match t {
            Term::App(fun, arg) => {
                assert!(matches!(*fun, Term::Abs(..)));
                assert_eq!(*arg, Term::var("v"));
            }
            other => panic!("expected application at root, got {other}"),
        }
    }

    #[test]
    fn term_print_parse_round_trip() {
        for s in ["x", "(\\x.x)", "((\\x.(x x)) (\\y.(z y)))", "(f (g h))"] {
            let t = parse_term(s).unwrap();
            assert_eq!(parse_term(&t.to_string()).unwrap(), t);
        }
    }

    #[test]
    fn parse_paths() {
        let p = parse_path("rho[a]").unwrap();
        assert_eq!(p, Path::Rho(Endpoint::Term(Term::var("a"))));

        let p = parse_path("#r:a -> b").unwrap();
        assert_eq!(p, Path::atom("r", Term::var("a"), Term::var("b")));

        let p = parse_path("sigma(sigma(#r:a -> b))").unwrap();
        assert!(matches!(p, Path::Sigma(_)));

        let p = parse_path("tau(#t:a -> b, #u:b -> c)").unwrap();
        assert!(matches!(p, Path::Tau(..)));
    }

    #[test]
    fn parse_tau_rejects_mismatch() {
        assert!(parse_path("tau(#t:a -> b, #u:c -> d)").is_err());
    }

    #[test]
    fn parse_beta_step_validates() {
        assert!(parse_path("beta[((\\y.(y v)) z) => (z v)]").is_ok());
        assert!(parse_path("beta[((\\y.(y v)) z) => (v z)]").is_err());
        assert!(parse_path("eta[(\\x.(z x)) => z]").is_ok());
    }

    #[test]
    fn parse_error_location() {
        let e = parse_term("(\\x.x") .unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.col > 1);
    }

    #[test]
    fn path_print_parse_round_trip() {
        for s in [
            "rho[a]",
            "#r:a -> b",
            "sigma(#r:a -> b)",
            "tau(tau(#p:a -> b, #q:b -> c), #r:c -> d)",
            "xi(x.#r:a -> b)",
            "mu(f, #r:a -> b)",
            "nu(#r:a -> b, c)",
            "alpha[(\\x.x) => (\\y.y)]",
            "rho[#r:a -> b]",
        ] {
            let p = parse_path(s).unwrap();
            let printed = p.to_string();
            let again = parse_path(&printed).unwrap();
            assert!(again.aeq(&p), "round trip failed for {s}: {printed}");
        }
    }
}
