//! Untyped λ-calculus substrate: terms, α-equivalence, capture-avoiding
//! substitution and one-step β/η contraction discovery.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    /// Normalization ran out of fuel; the untyped calculus may diverge.
    #[error("no normal form within {fuel} steps")]
    FuelExhausted { fuel: usize },
}

/// An untyped λ-term. Variables are named; binders are renamed on demand
/// during substitution so printed output stays close to the input names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Abs(String, Box<Term>),
    App(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn abs(binder: impl Into<String>, body: Term) -> Term {
        Term::Abs(binder.into(), Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    /// The subterm at `position` (a sequence of child indices), if any.
    /// Children: `Abs` has the body at 0; `App` has the function at 0 and
    /// the argument at 1.
    pub fn subterm(&self, position: &[usize]) -> Option<&Term> {
        let mut cur = self;
        for &i in position {
            cur = match (cur, i) {
                (Term::Abs(_, body), 0) => body,
                (Term::App(fun, _), 0) => fun,
                (Term::App(_, arg), 1) => arg,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Replace the subterm at `position` with `new`, returning the whole term.
    pub fn replace_at(&self, position: &[usize], new: Term) -> Option<Term> {
        match position.split_first() {
            None => Some(new),
            Some((&i, rest)) => match (self, i) {
                (Term::Abs(x, body), 0) => {
                    Some(Term::abs(x.clone(), body.replace_at(rest, new)?))
                }
                (Term::App(fun, arg), 0) => {
                    Some(Term::app(fun.replace_at(rest, new)?, (**arg).clone()))
                }
                (Term::App(fun, arg), 1) => {
                    Some(Term::app((**fun).clone(), arg.replace_at(rest, new)?))
                }
                _ => None,
            },
        }
    }
}

/// The free variables of `t` under standard binding.
pub fn free_vars(t: &Term) -> BTreeSet<String> {
    match t {
        Term::Var(x) => {
            let mut s = BTreeSet::new();
            s.insert(x.clone());
            s
        }
        Term::Abs(x, body) => {
            let mut s = free_vars(body);
            s.remove(x);
            s
        }
        Term::App(fun, arg) => {
            let mut s = free_vars(fun);
            s.extend(free_vars(arg));
            s
        }
    }
}

/// A name based on `base` that does not occur in `avoid`. The base itself is
/// preferred; otherwise counter suffixes are tried.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    if !avoid.contains(base) {
        return base.to_string();
    }
    let mut i = 1usize;
    loop {
        let cand = format!("{stem}{i}");
        if !avoid.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}

/// Capture-avoiding substitution `[replacement/x]body`. Bound variables are
/// renamed to fresh names when they would capture a free variable of the
/// replacement.
pub fn substitute(body: &Term, x: &str, replacement: &Term) -> Term {
    match body {
        Term::Var(y) => {
            if y == x {
                replacement.clone()
            } else {
                body.clone()
            }
        }
        Term::App(fun, arg) => Term::app(
            substitute(fun, x, replacement),
            substitute(arg, x, replacement),
        ),
        Term::Abs(y, inner) => {
            if y == x {
                body.clone()
            } else if !free_vars(inner).contains(x) {
                // x does not occur; nothing to substitute below.
                body.clone()
            } else if free_vars(replacement).contains(y) {
                // Renaming required or y would capture a free variable.
                let mut avoid = free_vars(replacement);
                avoid.extend(free_vars(inner));
                avoid.insert(x.to_string());
                let y2 = fresh_name(y, &avoid);
                let renamed = substitute(inner, y, &Term::var(y2.clone()));
                Term::abs(y2, substitute(&renamed, x, replacement))
            } else {
                Term::abs(y.clone(), substitute(inner, x, replacement))
            }
        }
    }
}

/// Equality up to renaming of bound variables.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, env: &mut Vec<(String, String)>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                // The innermost binding of either name decides.
                for (l, r) in env.iter().rev() {
                    if l == x || r == y {
                        return l == x && r == y;
                    }
                }
                x == y
            }
            (Term::App(f1, a1), Term::App(f2, a2)) => go(f1, f2, env) && go(a1, a2, env),
            (Term::Abs(x, b1), Term::Abs(y, b2)) => {
                env.push((x.clone(), y.clone()));
                let ok = go(b1, b2, env);
                env.pop();
                ok
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// Kind of a one-step contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RedexKind {
    Beta,
    Eta,
}

impl fmt::Display for RedexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RedexKind::Beta => write!(f, "beta"),
            RedexKind::Eta => write!(f, "eta"),
        }
    }
}

/// One redex occurrence in a subject term, together with the whole-term
/// result of contracting exactly that occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RedexSite {
    pub position: Vec<usize>,
    pub kind: RedexKind,
    pub result: Term,
}

/// Every β- and η-redex occurrence in `t`, in preorder traversal order.
pub fn contraction_sites(t: &Term) -> Vec<RedexSite> {
    let mut out = Vec::new();
    collect_sites(t, t, &mut Vec::new(), &mut out);
    out
}

fn collect_sites(root: &Term, node: &Term, pos: &mut Vec<usize>, out: &mut Vec<RedexSite>) {
    match node {
        Term::App(fun, arg) => {
            if let Term::Abs(x, body) = &**fun {
                let contractum = substitute(body, x, arg);
                let result = root
                    .replace_at(pos, contractum)
                    .expect("position addresses a node of the subject term");
                out.push(RedexSite {
                    position: pos.clone(),
                    kind: RedexKind::Beta,
                    result,
                });
            }
            pos.push(0);
            collect_sites(root, fun, pos, out);
            pos.pop();
            pos.push(1);
            collect_sites(root, arg, pos, out);
            pos.pop();
        }
        Term::Abs(x, body) => {
            if let Term::App(fun, arg) = &**body {
                if matches!(&**arg, Term::Var(y) if y == x) && !free_vars(fun).contains(x) {
                    let result = root
                        .replace_at(pos, (**fun).clone())
                        .expect("position addresses a node of the subject term");
                    out.push(RedexSite {
                        position: pos.clone(),
                        kind: RedexKind::Eta,
                        result,
                    });
                }
            }
            pos.push(0);
            collect_sites(root, body, pos, out);
            pos.pop();
        }
        Term::Var(_) => {}
    }
}

/// Repeatedly contracts redexes until no site remains or fuel runs out,
/// returning the final term and the contraction history.
///
/// Strategy: η-sites are contracted before β-sites, leftmost-outermost
/// within each kind. This reproduces textbook conversion sequences where
/// η-simplifications are performed eagerly.
pub fn normalize_term(t: &Term, fuel: usize) -> Result<(Term, Vec<RedexSite>), TermError> {
    let mut cur = t.clone();
    let mut history = Vec::new();
    for _ in 0..fuel {
        let sites = contraction_sites(&cur);
        let next = sites
            .iter()
            .find(|s| s.kind == RedexKind::Eta)
            .or_else(|| sites.first());
        match next {
            None => return Ok((cur, history)),
            Some(site) => {
                cur = site.result.clone();
                history.push(site.clone());
            }
        }
    }
    if contraction_sites(&cur).is_empty() {
        Ok((cur, history))
    } else {
        Err(TermError::FuelExhausted { fuel })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Abs(x, body) => write!(f, "(\\{x}.{body})"),
            Term::App(fun, arg) => write!(f, "({fun} {arg})"),
        }
    }
}
