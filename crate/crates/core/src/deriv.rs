//! Derivation files.
//!
//! A derivation is written as one nested record
//! `(rule <tag> (conclusion <judgment>) (premises <derivation>*)
//! (discharge <label>*))`. Judgments, proof terms and types are nested
//! records too; embedded paths use the path concrete syntax inside a
//! quoted string. Semicolon comments run to end of line.

use std::fmt::Write as _;

use thiserror::Error;

use crate::kernel::{Derivation, EqAxiomKind, Judgment, ProofTerm, RuleTag, TypeExpr};
use crate::parse::{parse_path, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerivError {
    #[error("derivation syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error(transparent)]
    Path(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexpr {
    Atom(String),
    Str(String),
    List(Vec<Sexpr>),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Atom(String),
    Str(String),
    Eof,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, msg: impl Into<String>) -> DerivError {
        DerivError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.src.get(self.pos)?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b';') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, DerivError> {
        self.skip_trivia();
        let Some(b) = self.peek() else {
            return Ok(Token::Eof);
        };
        match b {
            b'(' => {
                self.bump();
                Ok(Token::Open)
            }
            b')' => {
                self.bump();
                Ok(Token::Close)
            }
            b'"' => {
                self.bump();
                let mut out = String::new();
                loop {
                    match self.bump() {
                        Some(b'"') => return Ok(Token::Str(out)),
                        Some(b'\\') => match self.bump() {
                            Some(c @ (b'"' | b'\\')) => out.push(c as char),
                            _ => return Err(self.err("bad escape in string")),
                        },
                        Some(c) => out.push(c as char),
                        None => return Err(self.err("unterminated string")),
                    }
                }
            }
            _ => {
                let mut out = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_whitespace() || matches!(c, b'(' | b')' | b'"' | b';') {
                        break;
                    }
                    out.push(c as char);
                    self.bump();
                }
                if out.is_empty() {
                    Err(self.err(format!("unexpected character {:?}", b as char)))
                } else {
                    Ok(Token::Atom(out))
                }
            }
        }
    }
}

fn parse_sexpr(lex: &mut Lexer<'_>) -> Result<Sexpr, DerivError> {
    match lex.next_token()? {
        Token::Open => {
            let mut items = Vec::new();
            loop {
                lex.skip_trivia();
                if lex.peek() == Some(b')') {
                    lex.bump();
                    return Ok(Sexpr::List(items));
                }
                if lex.peek().is_none() {
                    return Err(lex.err("unterminated list"));
                }
                items.push(parse_sexpr(lex)?);
            }
        }
        Token::Close => Err(lex.err("unexpected ')'")),
        Token::Atom(a) => Ok(Sexpr::Atom(a)),
        Token::Str(s) => Ok(Sexpr::Str(s)),
        Token::Eof => Err(lex.err("unexpected end of input")),
    }
}

fn form_err(msg: impl Into<String>) -> DerivError {
    DerivError::Syntax {
        line: 0,
        col: 0,
        msg: msg.into(),
    }
}

fn expect_list<'a>(s: &'a Sexpr, what: &str) -> Result<&'a [Sexpr], DerivError> {
    match s {
        Sexpr::List(items) => Ok(items),
        _ => Err(form_err(format!("expected {what} record"))),
    }
}

fn expect_atom<'a>(s: &'a Sexpr, what: &str) -> Result<&'a str, DerivError> {
    match s {
        Sexpr::Atom(a) => Ok(a),
        _ => Err(form_err(format!("expected {what}"))),
    }
}

fn tagged<'a>(s: &'a Sexpr, what: &str) -> Result<(&'a str, &'a [Sexpr]), DerivError> {
    let items = expect_list(s, what)?;
    let head = items
        .first()
        .ok_or_else(|| form_err(format!("empty {what} record")))?;
    Ok((expect_atom(head, what)?, &items[1..]))
}

fn sexpr_to_path(s: &Sexpr) -> Result<crate::path::Path, DerivError> {
    match s {
        Sexpr::Str(text) => Ok(parse_path(text)?),
        _ => Err(form_err("expected a quoted path string")),
    }
}

fn sexpr_to_type(s: &Sexpr) -> Result<TypeExpr, DerivError> {
    let (tag, rest) = tagged(s, "type")?;
    match (tag, rest) {
        ("base", [Sexpr::Atom(name)]) => Ok(TypeExpr::base(name.clone())),
        ("id", [carrier, lhs, rhs]) => Ok(TypeExpr::id(
            sexpr_to_type(carrier)?,
            sexpr_to_pt(lhs)?,
            sexpr_to_pt(rhs)?,
        )),
        ("pi", [Sexpr::Atom(binder), dom, cod]) => Ok(TypeExpr::pi(
            binder.clone(),
            sexpr_to_type(dom)?,
            sexpr_to_type(cod)?,
        )),
        ("arrow", [from, to]) => Ok(TypeExpr::arrow(sexpr_to_type(from)?, sexpr_to_type(to)?)),
        _ => Err(form_err(format!("bad type record ({tag} ...)"))),
    }
}

fn sexpr_to_pt(s: &Sexpr) -> Result<ProofTerm, DerivError> {
    let (tag, rest) = tagged(s, "proof term")?;
    match (tag, rest) {
        ("tvar", [Sexpr::Atom(name)]) => Ok(ProofTerm::var(name.clone())),
        ("lam", [Sexpr::Atom(binder), body]) => {
            Ok(ProofTerm::lam(binder.clone(), sexpr_to_pt(body)?))
        }
        ("app", [fun, arg]) => Ok(ProofTerm::apply(sexpr_to_pt(fun)?, sexpr_to_pt(arg)?)),
        ("witness", [path, lhs, rhs]) => Ok(ProofTerm::witness(
            sexpr_to_path(path)?,
            sexpr_to_pt(lhs)?,
            sexpr_to_pt(rhs)?,
        )),
        ("rewr", [major, Sexpr::Atom(bound), minor]) => Ok(ProofTerm::rewr(
            sexpr_to_pt(major)?,
            bound.clone(),
            sexpr_to_pt(minor)?,
        )),
        ("epath", [path]) => Ok(ProofTerm::EmbeddedPath(sexpr_to_path(path)?)),
        _ => Err(form_err(format!("bad proof term record ({tag} ...)"))),
    }
}

fn sexpr_to_judgment(s: &Sexpr) -> Result<Judgment, DerivError> {
    let (tag, rest) = tagged(s, "judgment")?;
    match (tag, rest) {
        ("typing", [subject, ty]) => {
            Ok(Judgment::Typing(sexpr_to_pt(subject)?, sexpr_to_type(ty)?))
        }
        ("patheq", [lhs, path, rhs, ty]) => Ok(Judgment::PathJudg {
            lhs: sexpr_to_pt(lhs)?,
            path: sexpr_to_path(path)?,
            rhs: sexpr_to_pt(rhs)?,
            ty: sexpr_to_type(ty)?,
        }),
        ("istype", [ty]) => Ok(Judgment::IsType(sexpr_to_type(ty)?)),
        _ => Err(form_err(format!("bad judgment record ({tag} ...)"))),
    }
}

fn tag_from_str(s: &str, label: Option<&str>) -> Result<RuleTag, DerivError> {
    let axiom = |k| Ok(RuleTag::EqAxiom(k));
    match s {
        "hyp" => match label {
            Some(l) => Ok(RuleTag::Hyp(l.to_string())),
            None => Err(form_err("hyp requires a label")),
        },
        "id-f" => Ok(RuleTag::IdF),
        "id-i1" => Ok(RuleTag::IdI1),
        "id-i2" => Ok(RuleTag::IdI2),
        "id-e1" => Ok(RuleTag::IdE1),
        "id-e2" => Ok(RuleTag::IdE2),
        "pi-i" => Ok(RuleTag::PiI),
        "pi-e" => Ok(RuleTag::PiE),
        "ax-rho" => axiom(EqAxiomKind::Rho),
        "ax-sigma" => axiom(EqAxiomKind::Sigma),
        "ax-tau" => axiom(EqAxiomKind::Tau),
        "ax-xi" => axiom(EqAxiomKind::Xi),
        "ax-mu" => axiom(EqAxiomKind::Mu),
        "ax-nu" => axiom(EqAxiomKind::Nu),
        "ax-beta" => axiom(EqAxiomKind::Beta),
        "ax-eta" => axiom(EqAxiomKind::Eta),
        other => Err(form_err(format!("unknown rule tag {other}"))),
    }
}

fn tag_to_strings(tag: &RuleTag) -> (String, Option<String>) {
    match tag {
        RuleTag::Hyp(l) => ("hyp".into(), Some(l.clone())),
        RuleTag::IdF => ("id-f".into(), None),
        RuleTag::IdI1 => ("id-i1".into(), None),
        RuleTag::IdI2 => ("id-i2".into(), None),
        RuleTag::IdE1 => ("id-e1".into(), None),
        RuleTag::IdE2 => ("id-e2".into(), None),
        RuleTag::PiI => ("pi-i".into(), None),
        RuleTag::PiE => ("pi-e".into(), None),
        RuleTag::EqAxiom(k) => (format!("ax-{k}"), None),
    }
}

fn sexpr_to_derivation(s: &Sexpr) -> Result<Derivation, DerivError> {
    let (head, rest) = tagged(s, "derivation")?;
    if head != "rule" {
        return Err(form_err(format!("expected (rule ...), found ({head} ...)")));
    }
    let mut idx = 0;
    let tag_atom = rest
        .get(idx)
        .ok_or_else(|| form_err("missing rule tag"))
        .and_then(|t| expect_atom(t, "rule tag").map(str::to_string))?;
    idx += 1;
    let label = match rest.get(idx) {
        Some(Sexpr::Atom(l)) if tag_atom == "hyp" => {
            idx += 1;
            Some(l.clone())
        }
        _ => None,
    };
    let rule = tag_from_str(&tag_atom, label.as_deref())?;
    let mut conclusion = None;
    let mut premises = Vec::new();
    let mut discharged = Vec::new();
    for item in &rest[idx..] {
        let (section, body) = tagged(item, "derivation section")?;
        match section {
            "conclusion" => match body {
                [j] => conclusion = Some(sexpr_to_judgment(j)?),
                _ => return Err(form_err("conclusion takes one judgment")),
            },
            "premises" => {
                for p in body {
                    premises.push(sexpr_to_derivation(p)?);
                }
            }
            "discharge" => {
                for l in body {
                    discharged.push(expect_atom(l, "discharge label")?.to_string());
                }
            }
            other => return Err(form_err(format!("unknown section ({other} ...)"))),
        }
    }
    Ok(Derivation {
        rule,
        premises,
        conclusion: conclusion.ok_or_else(|| form_err("missing (conclusion ...)"))?,
        discharged,
    })
}

/// Parse a derivation file: one derivation record per file.
pub fn parse_derivation(src: &str) -> Result<Derivation, DerivError> {
    let mut lex = Lexer::new(src);
    let sexpr = parse_sexpr(&mut lex)?;
    lex.skip_trivia();
    if lex.peek().is_some() {
        return Err(lex.err("trailing input after derivation"));
    }
    sexpr_to_derivation(&sexpr)
}

fn quote(text: &str) -> String {
    let escaped = text.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

fn render_type(ty: &TypeExpr, out: &mut String) {
    match ty {
        TypeExpr::Base(n) => {
            let _ = write!(out, "(base {n})");
        }
        TypeExpr::IdT(c, l, r) => {
            out.push_str("(id ");
            render_type(c, out);
            out.push(' ');
            render_pt(l, out);
            out.push(' ');
            render_pt(r, out);
            out.push(')');
        }
        TypeExpr::Pi(x, d, c) => {
            let _ = write!(out, "(pi {x} ");
            render_type(d, out);
            out.push(' ');
            render_type(c, out);
            out.push(')');
        }
        TypeExpr::Arrow(f, t) => {
            out.push_str("(arrow ");
            render_type(f, out);
            out.push(' ');
            render_type(t, out);
            out.push(')');
        }
    }
}

fn render_pt(pt: &ProofTerm, out: &mut String) {
    match pt {
        ProofTerm::TermVar(x) => {
            let _ = write!(out, "(tvar {x})");
        }
        ProofTerm::Lam(x, body) => {
            let _ = write!(out, "(lam {x} ");
            render_pt(body, out);
            out.push(')');
        }
        ProofTerm::Apply(f, a) => {
            out.push_str("(app ");
            render_pt(f, out);
            out.push(' ');
            render_pt(a, out);
            out.push(')');
        }
        ProofTerm::PathWitness { path, lhs, rhs } => {
            let _ = write!(out, "(witness {} ", quote(&path.to_string()));
            render_pt(lhs, out);
            out.push(' ');
            render_pt(rhs, out);
            out.push(')');
        }
        ProofTerm::Rewr { major, bound, minor } => {
            out.push_str("(rewr ");
            render_pt(major, out);
            let _ = write!(out, " {bound} ");
            render_pt(minor, out);
            out.push(')');
        }
        ProofTerm::EmbeddedPath(p) => {
            let _ = write!(out, "(epath {})", quote(&p.to_string()));
        }
    }
}

fn render_judgment(j: &Judgment, out: &mut String) {
    match j {
        Judgment::Typing(t, ty) => {
            out.push_str("(typing ");
            render_pt(t, out);
            out.push(' ');
            render_type(ty, out);
            out.push(')');
        }
        Judgment::PathJudg { lhs, path, rhs, ty } => {
            out.push_str("(patheq ");
            render_pt(lhs, out);
            let _ = write!(out, " {} ", quote(&path.to_string()));
            render_pt(rhs, out);
            out.push(' ');
            render_type(ty, out);
            out.push(')');
        }
        Judgment::IsType(ty) => {
            out.push_str("(istype ");
            render_type(ty, out);
            out.push(')');
        }
    }
}

fn render_node(d: &Derivation, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    let (tag, label) = tag_to_strings(&d.rule);
    let _ = write!(out, "{pad}(rule {tag}");
    if let Some(l) = label {
        let _ = write!(out, " {l}");
    }
    let _ = write!(out, "\n{pad}  (conclusion ");
    render_judgment(&d.conclusion, out);
    out.push(')');
    if !d.premises.is_empty() {
        let _ = write!(out, "\n{pad}  (premises\n");
        for (i, p) in d.premises.iter().enumerate() {
            render_node(p, indent + 2, out);
            if i + 1 < d.premises.len() {
                out.push('\n');
            }
        }
        out.push(')');
    }
    if !d.discharged.is_empty() {
        let _ = write!(out, "\n{pad}  (discharge {})", d.discharged.join(" "));
    }
    out.push(')');
}

/// Render a derivation in the file format; parseable by
/// [`parse_derivation`].
pub fn render_derivation(d: &Derivation) -> String {
    let mut out = String::new();
    render_node(d, 0, &mut out);
    out.push('\n');
    out
}
