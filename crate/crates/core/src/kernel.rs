//! Derivation checker for the path-based identity type.
//!
//! The rules are formation (Id-F), two introductions (Id-I₁ on a path
//! judgment, Id-I₂ on a path between paths), two eliminations (Id-E₁/Id-E₂
//! via the REWR constructor) and the equality-theory axiom leaves. A
//! derivation is an explicit tree supplied by the caller; this module
//! checks it, it does not search for proofs.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::path::{Endpoint, Path};
use crate::term::{alpha_eq, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    /// A node whose premises or conclusion do not instantiate its rule.
    #[error("rule mismatch at node {at:?}: {reason}")]
    RuleMismatch { at: Vec<usize>, reason: String },
    /// Hypotheses left open at the root.
    #[error("undischarged hypotheses: {labels:?}")]
    UndischargedHypothesis { labels: Vec<String> },
    /// Witness or judgment endpoints disagree with the path's endpoints.
    #[error("endpoint mismatch at node {at:?}: expected {expected}, found {found}")]
    EndpointMismatch {
        at: Vec<usize>,
        expected: String,
        found: String,
    },
}

/// Types: base types, identity types, dependent products, and the
/// non-dependent arrow (sugar for Π, identified during checking).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeExpr {
    Base(String),
    IdT(Box<TypeExpr>, Box<ProofTerm>, Box<ProofTerm>),
    Pi(String, Box<TypeExpr>, Box<TypeExpr>),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
}

impl TypeExpr {
    pub fn base(name: impl Into<String>) -> TypeExpr {
        TypeExpr::Base(name.into())
    }

    pub fn id(carrier: TypeExpr, lhs: ProofTerm, rhs: ProofTerm) -> TypeExpr {
        TypeExpr::IdT(Box::new(carrier), Box::new(lhs), Box::new(rhs))
    }

    pub fn pi(binder: impl Into<String>, dom: TypeExpr, cod: TypeExpr) -> TypeExpr {
        TypeExpr::Pi(binder.into(), Box::new(dom), Box::new(cod))
    }

    pub fn arrow(from: TypeExpr, to: TypeExpr) -> TypeExpr {
        TypeExpr::Arrow(Box::new(from), Box::new(to))
    }
}

/// Proof terms: λ-fragment, path witnesses `s(a,b)`, the REWR eliminator
/// and embedded paths (used when the compared objects are themselves
/// paths, as in the groupoid inhabitants).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofTerm {
    TermVar(String),
    Lam(String, Box<ProofTerm>),
    Apply(Box<ProofTerm>, Box<ProofTerm>),
    PathWitness {
        path: Path,
        lhs: Box<ProofTerm>,
        rhs: Box<ProofTerm>,
    },
    Rewr {
        major: Box<ProofTerm>,
        bound: String,
        minor: Box<ProofTerm>,
    },
    EmbeddedPath(Path),
}

impl ProofTerm {
    pub fn var(name: impl Into<String>) -> ProofTerm {
        ProofTerm::TermVar(name.into())
    }

    pub fn lam(binder: impl Into<String>, body: ProofTerm) -> ProofTerm {
        ProofTerm::Lam(binder.into(), Box::new(body))
    }

    pub fn apply(fun: ProofTerm, arg: ProofTerm) -> ProofTerm {
        ProofTerm::Apply(Box::new(fun), Box::new(arg))
    }

    pub fn witness(path: Path, lhs: ProofTerm, rhs: ProofTerm) -> ProofTerm {
        ProofTerm::PathWitness {
            path,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn rewr(major: ProofTerm, bound: impl Into<String>, minor: ProofTerm) -> ProofTerm {
        ProofTerm::Rewr {
            major: Box::new(major),
            bound: bound.into(),
            minor: Box::new(minor),
        }
    }

    /// Embed a λ-term into the proof-term syntax.
    pub fn from_term(t: &Term) -> ProofTerm {
        match t {
            Term::Var(x) => ProofTerm::var(x.clone()),
            Term::Abs(x, body) => ProofTerm::lam(x.clone(), ProofTerm::from_term(body)),
            Term::App(f, a) => {
                ProofTerm::apply(ProofTerm::from_term(f), ProofTerm::from_term(a))
            }
        }
    }

    /// View the λ-fragment of a proof term as a λ-term.
    pub fn as_term(&self) -> Option<Term> {
        match self {
            ProofTerm::TermVar(x) => Some(Term::var(x.clone())),
            ProofTerm::Lam(x, body) => Some(Term::abs(x.clone(), body.as_term()?)),
            ProofTerm::Apply(f, a) => Some(Term::app(f.as_term()?, a.as_term()?)),
            _ => None,
        }
    }
}

/// Equality of proof terms, up to α on embedded λ-terms and paths.
pub fn pt_eq(a: &ProofTerm, b: &ProofTerm) -> bool {
    match (a, b) {
        (ProofTerm::TermVar(x), ProofTerm::TermVar(y)) => x == y,
        (ProofTerm::Lam(x, m), ProofTerm::Lam(y, n)) => x == y && pt_eq(m, n),
        (ProofTerm::Apply(f, m), ProofTerm::Apply(g, n)) => pt_eq(f, g) && pt_eq(m, n),
        (
            ProofTerm::PathWitness { path: p, lhs: l1, rhs: r1 },
            ProofTerm::PathWitness { path: q, lhs: l2, rhs: r2 },
        ) => p.aeq(q) && pt_eq(l1, l2) && pt_eq(r1, r2),
        (
            ProofTerm::Rewr { major: m1, bound: g1, minor: h1 },
            ProofTerm::Rewr { major: m2, bound: g2, minor: h2 },
        ) => g1 == g2 && pt_eq(m1, m2) && pt_eq(h1, h2),
        (ProofTerm::EmbeddedPath(p), ProofTerm::EmbeddedPath(q)) => p.aeq(q),
        _ => false,
    }
}

fn ty_mentions(ty: &TypeExpr, var: &str) -> bool {
    fn pt_mentions(pt: &ProofTerm, var: &str) -> bool {
        match pt {
            ProofTerm::TermVar(x) => x == var,
            ProofTerm::Lam(x, body) => x != var && pt_mentions(body, var),
            ProofTerm::Apply(f, a) => pt_mentions(f, var) || pt_mentions(a, var),
            ProofTerm::PathWitness { lhs, rhs, .. } => {
                pt_mentions(lhs, var) || pt_mentions(rhs, var)
            }
            ProofTerm::Rewr { major, minor, .. } => {
                pt_mentions(major, var) || pt_mentions(minor, var)
            }
            ProofTerm::EmbeddedPath(_) => false,
        }
    }
    match ty {
        TypeExpr::Base(_) => false,
        TypeExpr::IdT(c, l, r) => {
            ty_mentions(c, var) || pt_mentions(l, var) || pt_mentions(r, var)
        }
        TypeExpr::Pi(x, d, c) => ty_mentions(d, var) || (x != var && ty_mentions(c, var)),
        TypeExpr::Arrow(f, t) => ty_mentions(f, var) || ty_mentions(t, var),
    }
}

/// Type equality; Arrow is identified with a Π whose binder is unused.
pub fn ty_eq(a: &TypeExpr, b: &TypeExpr) -> bool {
    match (a, b) {
        (TypeExpr::Base(x), TypeExpr::Base(y)) => x == y,
        (TypeExpr::IdT(c1, l1, r1), TypeExpr::IdT(c2, l2, r2)) => {
            ty_eq(c1, c2) && pt_eq(l1, l2) && pt_eq(r1, r2)
        }
        (TypeExpr::Pi(x, d1, c1), TypeExpr::Pi(y, d2, c2)) => {
            ty_eq(d1, d2) && x == y && ty_eq(c1, c2)
        }
        (TypeExpr::Arrow(f1, t1), TypeExpr::Arrow(f2, t2)) => ty_eq(f1, f2) && ty_eq(t1, t2),
        (TypeExpr::Arrow(f, t), TypeExpr::Pi(x, d, c))
        | (TypeExpr::Pi(x, d, c), TypeExpr::Arrow(f, t)) => {
            !ty_mentions(c, x) && ty_eq(f, d) && ty_eq(t, c)
        }
        _ => false,
    }
}

/// Substitute a proof term for a term variable in a type (used by Π-E).
pub fn subst_type(ty: &TypeExpr, var: &str, arg: &ProofTerm) -> TypeExpr {
    fn subst_pt(pt: &ProofTerm, var: &str, arg: &ProofTerm) -> ProofTerm {
        match pt {
            ProofTerm::TermVar(x) if x == var => arg.clone(),
            ProofTerm::TermVar(_) | ProofTerm::EmbeddedPath(_) => pt.clone(),
            ProofTerm::Lam(x, body) if x == var => pt.clone(),
            ProofTerm::Lam(x, body) => ProofTerm::lam(x.clone(), subst_pt(body, var, arg)),
            ProofTerm::Apply(f, a) => {
                ProofTerm::apply(subst_pt(f, var, arg), subst_pt(a, var, arg))
            }
            ProofTerm::PathWitness { path, lhs, rhs } => ProofTerm::PathWitness {
                path: path.clone(),
                lhs: Box::new(subst_pt(lhs, var, arg)),
                rhs: Box::new(subst_pt(rhs, var, arg)),
            },
            ProofTerm::Rewr { major, bound, minor } => ProofTerm::Rewr {
                major: Box::new(subst_pt(major, var, arg)),
                bound: bound.clone(),
                minor: Box::new(subst_pt(minor, var, arg)),
            },
        }
    }
    match ty {
        TypeExpr::Base(_) => ty.clone(),
        TypeExpr::IdT(c, l, r) => TypeExpr::id(
            subst_type(c, var, arg),
            subst_pt(l, var, arg),
            subst_pt(r, var, arg),
        ),
        TypeExpr::Pi(x, d, c) if x == var => {
            TypeExpr::pi(x.clone(), subst_type(d, var, arg), (**c).clone())
        }
        TypeExpr::Pi(x, d, c) => TypeExpr::pi(
            x.clone(),
            subst_type(d, var, arg),
            subst_type(c, var, arg),
        ),
        TypeExpr::Arrow(f, t) => {
            TypeExpr::arrow(subst_type(f, var, arg), subst_type(t, var, arg))
        }
    }
}

/// Judgments: typing `t : A`, path judgments `a =_s b : A`, and type
/// formation `A type` (the conclusion form of Id-F).
#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Judgment {
    Typing(ProofTerm, TypeExpr),
    PathJudg {
        lhs: ProofTerm,
        path: Path,
        rhs: ProofTerm,
        ty: TypeExpr,
    },
    IsType(TypeExpr),
}

/// Axiom leaves of the equality theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqAxiomKind {
    Rho,
    Sigma,
    Tau,
    Xi,
    Mu,
    Nu,
    Beta,
    Eta,
}

impl fmt::Display for EqAxiomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EqAxiomKind::Rho => "rho",
            EqAxiomKind::Sigma => "sigma",
            EqAxiomKind::Tau => "tau",
            EqAxiomKind::Xi => "xi",
            EqAxiomKind::Mu => "mu",
            EqAxiomKind::Nu => "nu",
            EqAxiomKind::Beta => "beta",
            EqAxiomKind::Eta => "eta",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleTag {
    Hyp(String),
    IdF,
    IdI1,
    IdI2,
    IdE1,
    IdE2,
    PiI,
    PiE,
    EqAxiom(EqAxiomKind),
}

/// A natural-deduction derivation tree. `discharged` lists the hypothesis
/// labels this node closes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: RuleTag,
    pub premises: Vec<Derivation>,
    pub conclusion: Judgment,
    pub discharged: Vec<String>,
}

impl Derivation {
    pub fn leaf(rule: RuleTag, conclusion: Judgment) -> Derivation {
        Derivation {
            rule,
            premises: vec![],
            conclusion,
            discharged: vec![],
        }
    }

    pub fn node(
        rule: RuleTag,
        premises: Vec<Derivation>,
        conclusion: Judgment,
        discharged: Vec<&str>,
    ) -> Derivation {
        Derivation {
            rule,
            premises,
            conclusion,
            discharged: discharged.into_iter().map(String::from).collect(),
        }
    }
}

fn endpoint_matches(ep: &Endpoint, pt: &ProofTerm) -> bool {
    match (ep, pt) {
        (Endpoint::Term(t), _) => pt.as_term().is_some_and(|u| alpha_eq(t, &u)),
        (Endpoint::Path(p), ProofTerm::EmbeddedPath(q)) => p.aeq(q),
        _ => false,
    }
}

type Hypotheses = Vec<(String, Judgment)>;

struct Checker;

impl Checker {
    fn mismatch(at: &[usize], reason: impl Into<String>) -> KernelError {
        KernelError::RuleMismatch {
            at: at.to_vec(),
            reason: reason.into(),
        }
    }

    fn endpoints(at: &[usize], expected: impl fmt::Display, found: impl fmt::Display) -> KernelError {
        KernelError::EndpointMismatch {
            at: at.to_vec(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    fn check_node(d: &Derivation, at: &mut Vec<usize>) -> Result<Hypotheses, KernelError> {
        let mut open: Hypotheses = Vec::new();
        for (i, premise) in d.premises.iter().enumerate() {
            at.push(i);
            open.extend(Self::check_node(premise, at)?);
            at.pop();
        }
        Self::check_rule(d, at)?;
        if let RuleTag::Hyp(label) = &d.rule {
            open.push((label.clone(), d.conclusion.clone()));
        }
        for label in &d.discharged {
            open.retain(|(l, _)| l != label);
        }
        Ok(open)
    }

    fn premise_path_judgment<'a>(
        d: &'a Derivation,
        idx: usize,
        at: &[usize],
    ) -> Result<(&'a ProofTerm, &'a Path, &'a ProofTerm, &'a TypeExpr), KernelError> {
        match d.premises.get(idx).map(|p| &p.conclusion) {
            Some(Judgment::PathJudg { lhs, path, rhs, ty }) => Ok((lhs, path, rhs, ty)),
            _ => Err(Self::mismatch(
                at,
                format!("premise {idx} must be a path judgment"),
            )),
        }
    }

    fn premise_typing<'a>(
        d: &'a Derivation,
        idx: usize,
        at: &[usize],
    ) -> Result<(&'a ProofTerm, &'a TypeExpr), KernelError> {
        match d.premises.get(idx).map(|p| &p.conclusion) {
            Some(Judgment::Typing(t, ty)) => Ok((t, ty)),
            _ => Err(Self::mismatch(
                at,
                format!("premise {idx} must be a typing judgment"),
            )),
        }
    }

    /// The discharged path hypothesis of an elimination: an open leaf of
    /// the minor premise labeled `bound`, of shape `a =_{#bound} b : A`.
    fn find_path_hypothesis(
        minor: &Derivation,
        bound: &str,
        at: &[usize],
    ) -> Result<(ProofTerm, ProofTerm, TypeExpr), KernelError> {
        fn scan(d: &Derivation, bound: &str) -> Option<Judgment> {
            if let RuleTag::Hyp(l) = &d.rule {
                if l == bound {
                    return Some(d.conclusion.clone());
                }
            }
            d.premises.iter().find_map(|p| scan(p, bound))
        }
        match scan(minor, bound) {
            Some(Judgment::PathJudg { lhs, path, rhs, ty }) => match path {
                Path::Atom { ref name, .. } if name == bound => Ok((lhs, rhs, ty)),
                other => Err(Self::mismatch(
                    at,
                    format!("hypothesis {bound} must carry the atom #{bound}, found {other}"),
                )),
            },
            Some(_) => Err(Self::mismatch(
                at,
                format!("hypothesis {bound} must be a path judgment"),
            )),
            None => Err(Self::mismatch(
                at,
                format!("no hypothesis labeled {bound} in the minor premise"),
            )),
        }
    }

    fn check_rule(d: &Derivation, at: &[usize]) -> Result<(), KernelError> {
        match &d.rule {
            RuleTag::Hyp(_) => {
                if !d.premises.is_empty() {
                    return Err(Self::mismatch(at, "hypothesis leaves take no premises"));
                }
                Ok(())
            }
            RuleTag::IdF => {
                let (a, ty_a) = Self::premise_typing(d, 0, at)?;
                let (b, ty_b) = Self::premise_typing(d, 1, at)?;
                if !ty_eq(ty_a, ty_b) {
                    return Err(Self::mismatch(at, "Id-F premises must share a carrier"));
                }
                match &d.conclusion {
                    Judgment::IsType(TypeExpr::IdT(c, l, r))
                        if ty_eq(c, ty_a) && pt_eq(l, a) && pt_eq(r, b) =>
                    {
                        Ok(())
                    }
                    _ => Err(Self::mismatch(
                        at,
                        "Id-F must conclude that the identity type of its premises is a type",
                    )),
                }
            }
            RuleTag::IdI1 => {
                let (a, s, b, ty) = Self::premise_path_judgment(d, 0, at)?;
                match &d.conclusion {
                    Judgment::Typing(
                        ProofTerm::PathWitness { path, lhs, rhs },
                        TypeExpr::IdT(carrier, tl, tr),
                    ) => {
                        if !path.aeq(s) {
                            return Err(Self::mismatch(
                                at,
                                "witness path must be the premise path",
                            ));
                        }
                        if !endpoint_matches(&path.source(), lhs) {
                            return Err(Self::endpoints(at, path.source(), lhs_str(lhs)));
                        }
                        if !endpoint_matches(&path.target(), rhs) {
                            return Err(Self::endpoints(at, path.target(), lhs_str(rhs)));
                        }
                        if !(pt_eq(lhs, a) && pt_eq(rhs, b)) {
                            return Err(Self::endpoints(at, format!("{}, {}", lhs_str(a), lhs_str(b)), format!("{}, {}", lhs_str(lhs), lhs_str(rhs))));
                        }
                        if !(ty_eq(carrier, ty) && pt_eq(tl, a) && pt_eq(tr, b)) {
                            return Err(Self::mismatch(
                                at,
                                "conclusion type must be the identity type of the premise",
                            ));
                        }
                        Ok(())
                    }
                    _ => Err(Self::mismatch(
                        at,
                        "Id-I1 must conclude a path witness typing",
                    )),
                }
            }
            RuleTag::IdI2 => {
                let (a1, s, b1, ty1) = Self::premise_path_judgment(d, 0, at)?;
                let (a2, t, b2, ty2) = Self::premise_path_judgment(d, 1, at)?;
                let (zl, z, zr, zt) = Self::premise_path_judgment(d, 2, at)?;
                if !(pt_eq(a1, a2) && pt_eq(b1, b2) && ty_eq(ty1, ty2)) {
                    return Err(Self::mismatch(at, "Id-I2 premises must be parallel paths"));
                }
                let want_id = TypeExpr::id(ty1.clone(), a1.clone(), b1.clone());
                if !(matches!(zl, ProofTerm::EmbeddedPath(p) if p.aeq(s))
                    && matches!(zr, ProofTerm::EmbeddedPath(p) if p.aeq(t)))
                {
                    return Err(Self::mismatch(
                        at,
                        "third premise must connect the two premise paths",
                    ));
                }
                if !ty_eq(zt, &want_id) {
                    return Err(Self::mismatch(
                        at,
                        "third premise must live in the identity type of the endpoints",
                    ));
                }
                if !(z.source().aeq(&Endpoint::path(s.clone()))
                    && z.target().aeq(&Endpoint::path(t.clone())))
                {
                    return Err(Self::endpoints(at, format!("{s} -> {t}"), z));
                }
                match &d.conclusion {
                    Judgment::PathJudg { lhs, path, rhs, ty } => {
                        let want_l = ProofTerm::witness(s.clone(), a1.clone(), b1.clone());
                        let want_r = ProofTerm::witness(t.clone(), a1.clone(), b1.clone());
                        if !(pt_eq(lhs, &want_l) && pt_eq(rhs, &want_r) && ty_eq(ty, &want_id)) {
                            return Err(Self::mismatch(
                                at,
                                "Id-I2 must conclude equality of the two witnesses",
                            ));
                        }
                        if !(path.source().aeq(&Endpoint::path(s.clone()))
                            && path.target().aeq(&Endpoint::path(t.clone())))
                        {
                            return Err(Self::endpoints(at, format!("{s} -> {t}"), path));
                        }
                        Ok(())
                    }
                    _ => Err(Self::mismatch(at, "Id-I2 must conclude a path judgment")),
                }
            }
            RuleTag::IdE1 => {
                let (m, major_ty) = Self::premise_typing(d, 0, at)?;
                let (h, c) = Self::premise_typing(d, 1, at)?;
                let (rewr_major, bound, rewr_minor, concl_ty) = match &d.conclusion {
                    Judgment::Typing(ProofTerm::Rewr { major, bound, minor }, ty) => {
                        (major, bound, minor, ty)
                    }
                    _ => {
                        return Err(Self::mismatch(
                            at,
                            "Id-E1 must conclude a REWR typing",
                        ))
                    }
                };
                if !d.discharged.contains(bound) {
                    return Err(Self::mismatch(
                        at,
                        format!("Id-E1 must discharge its bound hypothesis {bound}"),
                    ));
                }
                let (ha, hb, hty) =
                    Self::find_path_hypothesis(&d.premises[1], bound, at)?;
                let (id_carrier, id_l, id_r) = match major_ty {
                    TypeExpr::IdT(c, l, r) => (c, l, r),
                    _ => {
                        return Err(Self::mismatch(
                            at,
                            "major premise must type against an identity type",
                        ))
                    }
                };
                if !(ty_eq(&hty, id_carrier) && pt_eq(&ha, id_l) && pt_eq(&hb, id_r)) {
                    return Err(Self::endpoints(
                        at,
                        format!("{}, {}", lhs_str(id_l), lhs_str(id_r)),
                        format!("{}, {}", lhs_str(&ha), lhs_str(&hb)),
                    ));
                }
                if !(pt_eq(rewr_major, m) && pt_eq(rewr_minor, h)) {
                    return Err(Self::mismatch(
                        at,
                        "REWR must combine the major and minor premises",
                    ));
                }
                if !ty_eq(concl_ty, c) {
                    return Err(Self::mismatch(
                        at,
                        "Id-E1 conclusion type must be the minor premise type",
                    ));
                }
                Ok(())
            }
            RuleTag::IdE2 => {
                let (p, r, q, rty) = Self::premise_path_judgment(d, 0, at)?;
                let (h, c) = Self::premise_typing(d, 1, at)?;
                let _ = r;
                if !matches!(rty, TypeExpr::IdT(..)) {
                    return Err(Self::mismatch(
                        at,
                        "Id-E2 first premise must connect identity proofs",
                    ));
                }
                match &d.conclusion {
                    Judgment::PathJudg { lhs, rhs, ty, .. } => {
                        let (bound, ok) = match (lhs, rhs) {
                            (
                                ProofTerm::Rewr { major: m1, bound: g1, minor: h1 },
                                ProofTerm::Rewr { major: m2, bound: g2, minor: h2 },
                            ) => (
                                g1.clone(),
                                g1 == g2
                                    && pt_eq(m1, p)
                                    && pt_eq(m2, q)
                                    && pt_eq(h1, h)
                                    && pt_eq(h2, h),
                            ),
                            _ => {
                                return Err(Self::mismatch(
                                    at,
                                    "Id-E2 must conclude equality of two REWR terms",
                                ))
                            }
                        };
                        if !ok {
                            return Err(Self::mismatch(
                                at,
                                "the two REWR terms must share the minor construction",
                            ));
                        }
                        if !d.discharged.contains(&bound) {
                            return Err(Self::mismatch(
                                at,
                                format!("Id-E2 must discharge its bound hypothesis {bound}"),
                            ));
                        }
                        Self::find_path_hypothesis(&d.premises[1], &bound, at)?;
                        if !ty_eq(ty, c) {
                            return Err(Self::mismatch(
                                at,
                                "Id-E2 conclusion type must be the minor premise type",
                            ));
                        }
                        Ok(())
                    }
                    _ => Err(Self::mismatch(at, "Id-E2 must conclude a path judgment")),
                }
            }
            RuleTag::PiI => {
                let (body, body_ty) = Self::premise_typing(d, 0, at)?;
                match &d.conclusion {
                    Judgment::Typing(ProofTerm::Lam(x, inner), ty) => {
                        if !pt_eq(inner, body) {
                            return Err(Self::mismatch(
                                at,
                                "abstraction body must be the premise subject",
                            ));
                        }
                        let (dom, cod) = match ty {
                            TypeExpr::Pi(y, dom, cod) => {
                                if y != x {
                                    return Err(Self::mismatch(
                                        at,
                                        "Π binder must match the abstraction binder",
                                    ));
                                }
                                (dom, cod)
                            }
                            TypeExpr::Arrow(dom, cod) => (dom, cod),
                            _ => {
                                return Err(Self::mismatch(
                                    at,
                                    "Π-I must conclude a Π or arrow type",
                                ))
                            }
                        };
                        if !ty_eq(cod, body_ty) {
                            return Err(Self::mismatch(
                                at,
                                "codomain must be the premise type",
                            ));
                        }
                        // Discharged term hypotheses must match the domain.
                        for label in &d.discharged {
                            if let Some(j) = find_hypothesis(&d.premises[0], label) {
                                match j {
                                    Judgment::Typing(ProofTerm::TermVar(v), hty)
                                        if v == *x && ty_eq(&hty, dom) => {}
                                    Judgment::Typing(t, hty)
                                        if pt_eq(&t, &ProofTerm::var(x.clone()))
                                            && ty_eq(&hty, dom) => {}
                                    other => {
                                        // A hypothesis of unrelated shape may be discharged
                                        // only if it is the bound variable's typing.
                                        if let Judgment::Typing(_, hty) = &other {
                                            if !ty_eq(hty, dom) {
                                                return Err(Self::mismatch(
                                                    at,
                                                    format!(
                                                        "discharged hypothesis {label} does not match the domain"
                                                    ),
                                                ));
                                            }
                                        } else {
                                            return Err(Self::mismatch(
                                                at,
                                                format!(
                                                    "discharged hypothesis {label} is not a typing hypothesis"
                                                ),
                                            ));
                                        }
                                    }
                                }
                            }
                        }
                        Ok(())
                    }
                    _ => Err(Self::mismatch(at, "Π-I must conclude an abstraction typing")),
                }
            }
            RuleTag::PiE => {
                let (f, fty) = Self::premise_typing(d, 0, at)?;
                let (arg, aty) = Self::premise_typing(d, 1, at)?;
                let (dom, cod_applied) = match fty {
                    TypeExpr::Pi(x, dom, cod) => (dom, subst_type(cod, x, arg)),
                    TypeExpr::Arrow(dom, cod) => (dom, (**cod).clone()),
                    _ => {
                        return Err(Self::mismatch(
                            at,
                            "Π-E major premise must have a Π or arrow type",
                        ))
                    }
                };
                if !ty_eq(aty, dom) {
                    return Err(Self::mismatch(at, "argument type must match the domain"));
                }
                match &d.conclusion {
                    Judgment::Typing(ProofTerm::Apply(g, a), ty)
                        if pt_eq(g, f) && pt_eq(a, arg) && ty_eq(ty, &cod_applied) =>
                    {
                        Ok(())
                    }
                    _ => Err(Self::mismatch(
                        at,
                        "Π-E must conclude the application at the instantiated codomain",
                    )),
                }
            }
            RuleTag::EqAxiom(kind) => Self::check_axiom(*kind, d, at),
        }
    }

    fn check_axiom(kind: EqAxiomKind, d: &Derivation, at: &[usize]) -> Result<(), KernelError> {
        let (lhs, path, rhs, ty) = match &d.conclusion {
            Judgment::PathJudg { lhs, path, rhs, ty } => (lhs, path, rhs, ty),
            _ => {
                return Err(Self::mismatch(
                    at,
                    "equality axioms conclude path judgments",
                ))
            }
        };
        // Endpoint agreement holds for every axiom conclusion.
        let check_ends = |at: &[usize]| -> Result<(), KernelError> {
            if !endpoint_matches(&path.source(), lhs) {
                return Err(Self::endpoints(at, path.source(), lhs_str(lhs)));
            }
            if !endpoint_matches(&path.target(), rhs) {
                return Err(Self::endpoints(at, path.target(), lhs_str(rhs)));
            }
            Ok(())
        };
        match kind {
            EqAxiomKind::Rho => {
                let (a, aty) = Self::premise_typing(d, 0, at)?;
                if !(pt_eq(lhs, a) && pt_eq(rhs, a) && ty_eq(ty, aty)) {
                    return Err(Self::mismatch(at, "ρ relates a term to itself"));
                }
                if !matches!(path, Path::Rho(_)) {
                    return Err(Self::mismatch(at, "ρ axiom must carry a ρ path"));
                }
                check_ends(at)
            }
            EqAxiomKind::Sigma => {
                let (a, s, b, pty) = Self::premise_path_judgment(d, 0, at)?;
                if !ty_eq(ty, pty) {
                    return Err(Self::mismatch(at, "σ preserves the carrier type"));
                }
                match path {
                    Path::Sigma(inner) if inner.aeq(s) => {}
                    _ => return Err(Self::mismatch(at, "σ axiom must invert the premise path")),
                }
                if !(pt_eq(lhs, b) && pt_eq(rhs, a)) {
                    return Err(Self::endpoints(
                        at,
                        format!("{}, {}", lhs_str(b), lhs_str(a)),
                        format!("{}, {}", lhs_str(lhs), lhs_str(rhs)),
                    ));
                }
                check_ends(at)
            }
            EqAxiomKind::Tau => {
                let (a, t, b1, ty1) = Self::premise_path_judgment(d, 0, at)?;
                let (b2, u, c, ty2) = Self::premise_path_judgment(d, 1, at)?;
                if !(pt_eq(b1, b2) && ty_eq(ty1, ty2) && ty_eq(ty, ty1)) {
                    return Err(Self::mismatch(at, "τ premises must compose"));
                }
                match path {
                    Path::Tau(l, r) if l.aeq(t) && r.aeq(u) => {}
                    _ => {
                        return Err(Self::mismatch(
                            at,
                            "τ axiom must compose the premise paths",
                        ))
                    }
                }
                if !(pt_eq(lhs, a) && pt_eq(rhs, c)) {
                    return Err(Self::endpoints(
                        at,
                        format!("{}, {}", lhs_str(a), lhs_str(c)),
                        format!("{}, {}", lhs_str(lhs), lhs_str(rhs)),
                    ));
                }
                check_ends(at)
            }
            EqAxiomKind::Beta => {
                if !matches!(path, Path::BetaStep { .. }) {
                    return Err(Self::mismatch(at, "β axiom must carry a β step"));
                }
                check_ends(at)
            }
            EqAxiomKind::Eta => {
                if !matches!(path, Path::EtaStep { .. }) {
                    return Err(Self::mismatch(at, "η axiom must carry an η step"));
                }
                check_ends(at)
            }
            EqAxiomKind::Xi => {
                let (m, p, n, _) = Self::premise_path_judgment(d, 0, at)?;
                match path {
                    Path::Xi { binder, body } if body.aeq(p) => {
                        let want_l = ProofTerm::lam(binder.clone(), m.clone());
                        let want_r = ProofTerm::lam(binder.clone(), n.clone());
                        if !(pt_eq(lhs, &want_l) && pt_eq(rhs, &want_r)) {
                            return Err(Self::mismatch(
                                at,
                                "ξ conclusion must abstract both premise endpoints",
                            ));
                        }
                        check_ends(at)
                    }
                    _ => Err(Self::mismatch(at, "ξ axiom must carry a ξ path over the premise")),
                }
            }
            EqAxiomKind::Mu => {
                let (m, p, n, _) = Self::premise_path_judgment(d, 0, at)?;
                match path {
                    Path::Mu { fun, arg } if arg.aeq(p) => {
                        let fun_pt = term_to_pt(fun);
                        let want_l = ProofTerm::apply(fun_pt.clone(), m.clone());
                        let want_r = ProofTerm::apply(fun_pt, n.clone());
                        if !(pt_eq(lhs, &want_l) && pt_eq(rhs, &want_r)) {
                            return Err(Self::mismatch(
                                at,
                                "μ conclusion must apply the function to both endpoints",
                            ));
                        }
                        check_ends(at)
                    }
                    _ => Err(Self::mismatch(at, "μ axiom must carry a μ path over the premise")),
                }
            }
            EqAxiomKind::Nu => {
                let (m, p, n, _) = Self::premise_path_judgment(d, 0, at)?;
                match path {
                    Path::Nu { fun, arg } if fun.aeq(p) => {
                        let arg_pt = term_to_pt(arg);
                        let want_l = ProofTerm::apply(m.clone(), arg_pt.clone());
                        let want_r = ProofTerm::apply(n.clone(), arg_pt);
                        if !(pt_eq(lhs, &want_l) && pt_eq(rhs, &want_r)) {
                            return Err(Self::mismatch(
                                at,
                                "ν conclusion must apply both endpoints to the argument",
                            ));
                        }
                        check_ends(at)
                    }
                    _ => Err(Self::mismatch(at, "ν axiom must carry a ν path over the premise")),
                }
            }
        }
    }
}

fn find_hypothesis(d: &Derivation, label: &str) -> Option<Judgment> {
    if let RuleTag::Hyp(l) = &d.rule {
        if l == label {
            return Some(d.conclusion.clone());
        }
    }
    d.premises.iter().find_map(|p| find_hypothesis(p, label))
}

fn term_to_pt(t: &Term) -> ProofTerm {
    ProofTerm::from_term(t)
}

fn lhs_str(pt: &ProofTerm) -> String {
    format!("{pt}")
}

/// Check a derivation, returning its conclusion and the hypotheses still
/// open at the root.
pub fn check_with_hypotheses(
    d: &Derivation,
) -> Result<(Judgment, Vec<(String, Judgment)>), KernelError> {
    let open = Checker::check_node(d, &mut Vec::new())?;
    Ok((d.conclusion.clone(), open))
}

/// Check a complete derivation. Succeeds iff every node instantiates its
/// rule and no hypothesis is left open at the root.
pub fn check(d: &Derivation) -> Result<Judgment, KernelError> {
    let (_, open) = check_with_hypotheses(d)?;
    if !open.is_empty() {
        let mut labels: Vec<String> = open.into_iter().map(|(l, _)| l).collect();
        labels.dedup();
        return Err(KernelError::UndischargedHypothesis { labels });
    }
    Ok(d.conclusion.clone())
}

/// What a single REWR reduction did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewrReduction {
    Beta,
    Eta,
    None,
}

/// Substitute a path for every free occurrence of the atom `name` in the
/// paths embedded in a proof term.
pub fn subst_path_atom(pt: &ProofTerm, name: &str, path: &Path) -> ProofTerm {
    fn in_path(p: &Path, name: &str, repl: &Path) -> Path {
        match p {
            Path::Atom { name: n, .. } if n == name => repl.clone(),
            Path::Atom { name: n, src, tgt } => Path::Atom {
                name: n.clone(),
                src: in_endpoint(src, name, repl),
                tgt: in_endpoint(tgt, name, repl),
            },
            Path::Rho(e) => Path::Rho(in_endpoint(e, name, repl)),
            Path::Sigma(inner) => Path::Sigma(Box::new(in_path(inner, name, repl))),
            Path::Tau(l, r) => Path::Tau(
                Box::new(in_path(l, name, repl)),
                Box::new(in_path(r, name, repl)),
            ),
            Path::Xi { binder, body } => Path::Xi {
                binder: binder.clone(),
                body: Box::new(in_path(body, name, repl)),
            },
            Path::Mu { fun, arg } => Path::Mu {
                fun: fun.clone(),
                arg: Box::new(in_path(arg, name, repl)),
            },
            Path::Nu { fun, arg } => Path::Nu {
                fun: Box::new(in_path(fun, name, repl)),
                arg: arg.clone(),
            },
            Path::RuleStep { rule, from, to } => Path::RuleStep {
                rule: *rule,
                from: Box::new(in_path(from, name, repl)),
                to: Box::new(in_path(to, name, repl)),
            },
            Path::BetaStep { .. } | Path::EtaStep { .. } | Path::AlphaStep { .. } => p.clone(),
        }
    }
    fn in_endpoint(e: &Endpoint, name: &str, repl: &Path) -> Endpoint {
        match e {
            Endpoint::Term(_) => e.clone(),
            Endpoint::Path(p) => Endpoint::path(in_path(p, name, repl)),
        }
    }
    match pt {
        ProofTerm::TermVar(_) => pt.clone(),
        ProofTerm::Lam(x, body) => ProofTerm::lam(x.clone(), subst_path_atom(body, name, path)),
        ProofTerm::Apply(f, a) => ProofTerm::apply(
            subst_path_atom(f, name, path),
            subst_path_atom(a, name, path),
        ),
        ProofTerm::PathWitness { path: p, lhs, rhs } => ProofTerm::PathWitness {
            path: in_path(p, name, path),
            lhs: Box::new(subst_path_atom(lhs, name, path)),
            rhs: Box::new(subst_path_atom(rhs, name, path)),
        },
        ProofTerm::Rewr { major, bound, minor } => {
            let minor = if bound == name {
                // Shadowed; the binder captures the name below.
                (**minor).clone()
            } else {
                subst_path_atom(minor, name, path)
            };
            ProofTerm::Rewr {
                major: Box::new(subst_path_atom(major, name, path)),
                bound: bound.clone(),
                minor: Box::new(minor),
            }
        }
        ProofTerm::EmbeddedPath(p) => ProofTerm::EmbeddedPath(in_path(p, name, path)),
    }
}

/// Substitute a proof term for a free term variable.
pub fn subst_term_var(pt: &ProofTerm, var: &str, repl: &ProofTerm) -> ProofTerm {
    match pt {
        ProofTerm::TermVar(x) if x == var => repl.clone(),
        ProofTerm::TermVar(_) | ProofTerm::EmbeddedPath(_) => pt.clone(),
        ProofTerm::Lam(x, _) if x == var => pt.clone(),
        ProofTerm::Lam(x, body) => ProofTerm::lam(x.clone(), subst_term_var(body, var, repl)),
        ProofTerm::Apply(f, a) => ProofTerm::apply(
            subst_term_var(f, var, repl),
            subst_term_var(a, var, repl),
        ),
        ProofTerm::PathWitness { path, lhs, rhs } => ProofTerm::PathWitness {
            path: path.clone(),
            lhs: Box::new(subst_term_var(lhs, var, repl)),
            rhs: Box::new(subst_term_var(rhs, var, repl)),
        },
        ProofTerm::Rewr { major, bound, minor } => ProofTerm::Rewr {
            major: Box::new(subst_term_var(major, var, repl)),
            bound: bound.clone(),
            minor: Box::new(subst_term_var(minor, var, repl)),
        },
    }
}

/// Outermost-first single REWR reduction.
///
/// η: `REWR(e, t.t(a,b))` reduces to `e` when the minor term is exactly
/// the trivial witness over the bound variable. β: when the major premise
/// is a path witness, its path is substituted for the bound atom in the
/// minor term. Returns the input unchanged with `None` when no redex
/// exists.
pub fn reduce_rewr(t: &ProofTerm) -> (ProofTerm, RewrReduction) {
    if let ProofTerm::Rewr { major, bound, minor } = t {
        // η first: the trivial minor construction.
        if let ProofTerm::PathWitness { path: Path::Atom { name, .. }, .. } = &**minor {
            if name == bound {
                return ((**major).clone(), RewrReduction::Eta);
            }
        }
        if let ProofTerm::PathWitness { path, .. } = &**major {
            return (subst_path_atom(minor, bound, path), RewrReduction::Beta);
        }
    }
    // No redex at the root; recurse into children, leftmost-outermost.
    macro_rules! descend {
        ($child:expr, $rebuild:expr) => {{
            let (reduced, how) = reduce_rewr($child);
            if how != RewrReduction::None {
                return ($rebuild(reduced), how);
            }
        }};
    }
    match t {
        ProofTerm::Lam(x, body) => {
            let x = x.clone();
            descend!(body, |b| ProofTerm::lam(x.clone(), b));
        }
        ProofTerm::Apply(f, a) => {
            let (fc, ac) = ((**f).clone(), (**a).clone());
            descend!(f, |g| ProofTerm::apply(g, ac.clone()));
            descend!(a, |b| ProofTerm::apply(fc.clone(), b));
        }
        ProofTerm::Rewr { major, bound, minor } => {
            let (mj, bd, mn) = ((**major).clone(), bound.clone(), (**minor).clone());
            descend!(major, |m| ProofTerm::rewr(m, bd.clone(), mn.clone()));
            descend!(minor, |m| ProofTerm::rewr(mj.clone(), bd.clone(), m));
        }
        ProofTerm::PathWitness { path, lhs, rhs } => {
            let (p, l, r) = (path.clone(), (**lhs).clone(), (**rhs).clone());
            descend!(lhs, |x| ProofTerm::witness(p.clone(), x, r.clone()));
            descend!(rhs, |x| ProofTerm::witness(p.clone(), l.clone(), x));
        }
        ProofTerm::TermVar(_) | ProofTerm::EmbeddedPath(_) => {}
    }
    (t.clone(), RewrReduction::None)
}

/// Iterate `reduce_rewr` to a fixpoint, returning the reduct and the tags
/// of the performed reductions.
pub fn reduce_rewr_fixpoint(t: &ProofTerm) -> (ProofTerm, Vec<RewrReduction>) {
    let mut cur = t.clone();
    let mut tags = Vec::new();
    loop {
        let (next, how) = reduce_rewr(&cur);
        if how == RewrReduction::None {
            return (cur, tags);
        }
        tags.push(how);
        cur = next;
    }
}

/// The three path-based constructions: reflexivity, symmetry and
/// transitivity of the identity type, as complete derivation trees.
pub fn builtin_constructions() -> BTreeMap<&'static str, Derivation> {
    let mut out = BTreeMap::new();
    out.insert("refl", builtin_refl());
    out.insert("symm", builtin_symm());
    out.insert("trans", builtin_trans());
    out
}

fn base_a() -> TypeExpr {
    TypeExpr::base("A")
}

fn builtin_refl() -> Derivation {
    let a = ProofTerm::var("a");
    let hyp_a = Derivation::leaf(
        RuleTag::Hyp("a".into()),
        Judgment::Typing(a.clone(), base_a()),
    );
    let rho = Path::Rho(Endpoint::Term(Term::var("a")));
    let ax = Derivation::node(
        RuleTag::EqAxiom(EqAxiomKind::Rho),
        vec![hyp_a],
        Judgment::PathJudg {
            lhs: a.clone(),
            path: rho.clone(),
            rhs: a.clone(),
            ty: base_a(),
        },
        vec![],
    );
    let witness = ProofTerm::witness(rho, a.clone(), a.clone());
    let id_aa = TypeExpr::id(base_a(), a.clone(), a.clone());
    let intro = Derivation::node(
        RuleTag::IdI1,
        vec![ax],
        Judgment::Typing(witness.clone(), id_aa.clone()),
        vec![],
    );
    Derivation::node(
        RuleTag::PiI,
        vec![intro],
        Judgment::Typing(
            ProofTerm::lam("a", witness),
            TypeExpr::pi("a", base_a(), id_aa),
        ),
        vec!["a"],
    )
}

fn builtin_symm() -> Derivation {
    let (a, b, p) = (ProofTerm::var("a"), ProofTerm::var("b"), ProofTerm::var("p"));
    let atom_t = Path::atom("t", Term::var("a"), Term::var("b"));
    let hyp_t = Derivation::leaf(
        RuleTag::Hyp("t".into()),
        Judgment::PathJudg {
            lhs: a.clone(),
            path: atom_t.clone(),
            rhs: b.clone(),
            ty: base_a(),
        },
    );
    let sigma_t = Path::Sigma(Box::new(atom_t));
    let ax_sigma = Derivation::node(
        RuleTag::EqAxiom(EqAxiomKind::Sigma),
        vec![hyp_t],
        Judgment::PathJudg {
            lhs: b.clone(),
            path: sigma_t.clone(),
            rhs: a.clone(),
            ty: base_a(),
        },
        vec![],
    );
    let id_ab = TypeExpr::id(base_a(), a.clone(), b.clone());
    let id_ba = TypeExpr::id(base_a(), b.clone(), a.clone());
    let witness = ProofTerm::witness(sigma_t, b.clone(), a.clone());
    let intro = Derivation::node(
        RuleTag::IdI1,
        vec![ax_sigma],
        Judgment::Typing(witness.clone(), id_ba.clone()),
        vec![],
    );
    let hyp_p = Derivation::leaf(
        RuleTag::Hyp("p".into()),
        Judgment::Typing(p.clone(), id_ab.clone()),
    );
    let rewr = ProofTerm::rewr(p, "t", witness);
    let elim = Derivation::node(
        RuleTag::IdE1,
        vec![hyp_p, intro],
        Judgment::Typing(rewr.clone(), id_ba.clone()),
        vec!["t"],
    );
    let lam_p = ProofTerm::lam("p", rewr);
    let arr = TypeExpr::arrow(id_ab, id_ba);
    let pi_p = Derivation::node(
        RuleTag::PiI,
        vec![elim],
        Judgment::Typing(lam_p.clone(), arr.clone()),
        vec!["p"],
    );
    let lam_b = ProofTerm::lam("b", lam_p);
    let pi_b_ty = TypeExpr::pi("b", base_a(), arr);
    let pi_b = Derivation::node(
        RuleTag::PiI,
        vec![pi_p],
        Judgment::Typing(lam_b.clone(), pi_b_ty.clone()),
        vec![],
    );
    Derivation::node(
        RuleTag::PiI,
        vec![pi_b],
        Judgment::Typing(
            ProofTerm::lam("a", lam_b),
            TypeExpr::pi("a", base_a(), pi_b_ty),
        ),
        vec![],
    )
}

fn builtin_trans() -> Derivation {
    let (a, b, c) = (ProofTerm::var("a"), ProofTerm::var("b"), ProofTerm::var("c"));
    let (w, s) = (ProofTerm::var("w"), ProofTerm::var("s"));
    let atom_t = Path::atom("t", Term::var("a"), Term::var("b"));
    let atom_u = Path::atom("u", Term::var("b"), Term::var("c"));
    let hyp_t = Derivation::leaf(
        RuleTag::Hyp("t".into()),
        Judgment::PathJudg {
            lhs: a.clone(),
            path: atom_t.clone(),
            rhs: b.clone(),
            ty: base_a(),
        },
    );
    let hyp_u = Derivation::leaf(
        RuleTag::Hyp("u".into()),
        Judgment::PathJudg {
            lhs: b.clone(),
            path: atom_u.clone(),
            rhs: c.clone(),
            ty: base_a(),
        },
    );
    let tau_tu = Path::Tau(Box::new(atom_t), Box::new(atom_u));
    let ax_tau = Derivation::node(
        RuleTag::EqAxiom(EqAxiomKind::Tau),
        vec![hyp_t, hyp_u],
        Judgment::PathJudg {
            lhs: a.clone(),
            path: tau_tu.clone(),
            rhs: c.clone(),
            ty: base_a(),
        },
        vec![],
    );
    let id_ab = TypeExpr::id(base_a(), a.clone(), b.clone());
    let id_bc = TypeExpr::id(base_a(), b.clone(), c.clone());
    let id_ac = TypeExpr::id(base_a(), a.clone(), c.clone());
    let witness = ProofTerm::witness(tau_tu, a.clone(), c.clone());
    let intro = Derivation::node(
        RuleTag::IdI1,
        vec![ax_tau],
        Judgment::Typing(witness.clone(), id_ac.clone()),
        vec![],
    );
    let hyp_s = Derivation::leaf(
        RuleTag::Hyp("s".into()),
        Judgment::Typing(s.clone(), id_bc.clone()),
    );
    let rewr_inner = ProofTerm::rewr(s, "u", witness);
    let elim_inner = Derivation::node(
        RuleTag::IdE1,
        vec![hyp_s, intro],
        Judgment::Typing(rewr_inner.clone(), id_ac.clone()),
        vec!["u"],
    );
    let hyp_w = Derivation::leaf(
        RuleTag::Hyp("w".into()),
        Judgment::Typing(w.clone(), id_ab.clone()),
    );
    let rewr_outer = ProofTerm::rewr(w, "t", rewr_inner);
    let elim_outer = Derivation::node(
        RuleTag::IdE1,
        vec![hyp_w, elim_inner],
        Judgment::Typing(rewr_outer.clone(), id_ac.clone()),
        vec!["t"],
    );
    let lam_s = ProofTerm::lam("s", rewr_outer);
    let arr_s = TypeExpr::arrow(id_bc, id_ac);
    let pi_s = Derivation::node(
        RuleTag::PiI,
        vec![elim_outer],
        Judgment::Typing(lam_s.clone(), arr_s.clone()),
        vec!["s"],
    );
    let lam_w = ProofTerm::lam("w", lam_s);
    let arr_w = TypeExpr::arrow(id_ab, arr_s);
    let pi_w = Derivation::node(
        RuleTag::PiI,
        vec![pi_s],
        Judgment::Typing(lam_w.clone(), arr_w.clone()),
        vec!["w"],
    );
    let lam_c = ProofTerm::lam("c", lam_w);
    let pi_c_ty = TypeExpr::pi("c", base_a(), arr_w);
    let pi_c = Derivation::node(
        RuleTag::PiI,
        vec![pi_w],
        Judgment::Typing(lam_c.clone(), pi_c_ty.clone()),
        vec![],
    );
    let lam_b = ProofTerm::lam("b", lam_c);
    let pi_b_ty = TypeExpr::pi("b", base_a(), pi_c_ty);
    let pi_b = Derivation::node(
        RuleTag::PiI,
        vec![pi_c],
        Judgment::Typing(lam_b.clone(), pi_b_ty.clone()),
        vec![],
    );
    Derivation::node(
        RuleTag::PiI,
        vec![pi_b],
        Judgment::Typing(
            ProofTerm::lam("a", lam_b),
            TypeExpr::pi("a", base_a(), pi_b_ty),
        ),
        vec![],
    )
}

impl fmt::Display for ProofTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProofTerm::TermVar(x) => write!(f, "{x}"),
            ProofTerm::Lam(x, body) => write!(f, "\\{x}.{body}"),
            ProofTerm::Apply(g, a) => write!(f, "({g} {a})"),
            ProofTerm::PathWitness { path, lhs, rhs } => {
                write!(f, "({path})({lhs}, {rhs})")
            }
            ProofTerm::Rewr { major, bound, minor } => {
                write!(f, "REWR({major}, {bound}^.{minor})")
            }
            ProofTerm::EmbeddedPath(p) => write!(f, "{p}"),
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Base(n) => write!(f, "{n}"),
            TypeExpr::IdT(c, l, r) => write!(f, "Id_{{{c}}}({l}, {r})"),
            TypeExpr::Pi(x, d, c) => write!(f, "Pi({x}:{d}).{c}"),
            TypeExpr::Arrow(a, b) => write!(f, "({a} -> {b})"),
        }
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Judgment::Typing(t, ty) => write!(f, "{t} : {ty}"),
            Judgment::PathJudg { lhs, path, rhs, ty } => {
                write!(f, "{lhs} ={{{path}}} {rhs} : {ty}")
            }
            Judgment::IsType(ty) => write!(f, "{ty} type"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_check() {
        for (name, d) in builtin_constructions() {
            let j = check(&d).unwrap_or_else(|e| panic!("{name} failed: {e}"));
            assert_eq!(j, d.conclusion, "{name}");
        }
    }

    #[test]
    fn refl_conclusion_shape() {
        let refl = &builtin_constructions()["refl"];
        match &refl.conclusion {
            Judgment::Typing(t, ty) => {
                assert_eq!(t.to_string(), "\\a.(rho[a])(a, a)");
                assert!(matches!(ty, TypeExpr::Pi(..)));
            }
            other => panic!("unexpected conclusion {other}"),
        }
        // refl uses no elimination rule.
        fn has_elim(d: &Derivation) -> bool {
            matches!(d.rule, RuleTag::IdE1 | RuleTag::IdE2)
                || d.premises.iter().any(has_elim)
        }
        assert!(!has_elim(refl));
    }

    #[test]
    fn trans_conclusion_type() {
        let trans = &builtin_constructions()["trans"];
        match &trans.conclusion {
            Judgment::Typing(_, ty) => {
                let a = ProofTerm::var("a");
                let b = ProofTerm::var("b");
                let c = ProofTerm::var("c");
                let base = TypeExpr::base("A");
                let want = TypeExpr::pi(
                    "a",
                    base.clone(),
                    TypeExpr::pi(
                        "b",
                        base.clone(),
                        TypeExpr::pi(
                            "c",
                            base.clone(),
                            TypeExpr::arrow(
                                TypeExpr::id(base.clone(), a.clone(), b.clone()),
                                TypeExpr::arrow(
                                    TypeExpr::id(base.clone(), b, c.clone()),
                                    TypeExpr::id(base, a, c),
                                ),
                            ),
                        ),
                    ),
                );
                assert!(ty_eq(ty, &want));
            }
            other => panic!("unexpected conclusion {other}"),
        }
    }

    #[test]
    fn broken_symm_endpoint_mismatch() {
        // Replace the witness path by rho[b]: the witness would need
        // endpoints (b, a).
        let mut symm = builtin_constructions()["symm"].clone();
        fn patch(d: &mut Derivation) {
            if let Judgment::Typing(ProofTerm::PathWitness { path, .. }, _) = &mut d.conclusion
            {
                if matches!(path, Path::Sigma(_)) {
                    *path = Path::Rho(Endpoint::Term(Term::var("b")));
                }
            }
            for p in &mut d.premises {
                patch(p);
            }
        }
        patch(&mut symm);
        assert!(matches!(
            check(&symm),
            Err(KernelError::EndpointMismatch { .. })
                | Err(KernelError::RuleMismatch { .. })
        ));
        // Must specifically be an endpoint failure at the Id-I1 node when
        // only the witness path is swapped and the premise is adjusted.
        fn patch_both(d: &mut Derivation) {
            patch(d);
        }
        let mut symm2 = builtin_constructions()["symm"].clone();
        patch_both(&mut symm2);
        fn fix_axiom(d: &mut Derivation) {
            if matches!(d.rule, RuleTag::EqAxiom(EqAxiomKind::Sigma)) {
                // Turn the sigma axiom into a rho axiom over b.
                d.rule = RuleTag::EqAxiom(EqAxiomKind::Rho);
                d.premises = vec![Derivation::leaf(
                    RuleTag::Hyp("t".into()),
                    Judgment::Typing(ProofTerm::var("b"), TypeExpr::base("A")),
                )];
                d.conclusion = Judgment::PathJudg {
                    lhs: ProofTerm::var("b"),
                    path: Path::Rho(Endpoint::Term(Term::var("b"))),
                    rhs: ProofTerm::var("b"),
                    ty: TypeExpr::base("A"),
                };
            }
            for p in &mut d.premises {
                fix_axiom(p);
            }
        }
        fix_axiom(&mut symm2);
        assert!(matches!(
            check(&symm2),
            Err(KernelError::EndpointMismatch { .. })
        ));
    }

    #[test]
    fn missing_discharge_rejected() {
        let mut symm = builtin_constructions()["symm"].clone();
        // Drop the outer-most discharge of p at the Π-I node.
        fn drop_p(d: &mut Derivation) {
            d.discharged.retain(|l| l != "p");
            for q in &mut d.premises {
                drop_p(q);
            }
        }
        drop_p(&mut symm);
        assert!(matches!(
            check(&symm),
            Err(KernelError::UndischargedHypothesis { .. })
        ));
    }

    #[test]
    fn rewr_eta_reduction() {
        let e = ProofTerm::var("e");
        let trivial = ProofTerm::witness(
            Path::atom("t", Term::var("a"), Term::var("b")),
            ProofTerm::var("a"),
            ProofTerm::var("b"),
        );
        let t = ProofTerm::rewr(e.clone(), "t", trivial);
        let (red, how) = reduce_rewr(&t);
        assert_eq!(how, RewrReduction::Eta);
        assert_eq!(red, e);
    }

    #[test]
    fn rewr_beta_reduction() {
        // REWR(m(a,b), g.minor(g)) -> minor with g := the path of m.
        let m_path = Path::Sigma(Box::new(Path::atom("q", Term::var("b"), Term::var("a"))));
        let major = ProofTerm::witness(m_path.clone(), ProofTerm::var("a"), ProofTerm::var("b"));
        let minor = ProofTerm::witness(
            Path::Sigma(Box::new(Path::atom("g", Term::var("a"), Term::var("b")))),
            ProofTerm::var("b"),
            ProofTerm::var("a"),
        );
        let t = ProofTerm::rewr(major, "g", minor);
        let (red, how) = reduce_rewr(&t);
        assert_eq!(how, RewrReduction::Beta);
        let want = ProofTerm::witness(
            Path::Sigma(Box::new(m_path)),
            ProofTerm::var("b"),
            ProofTerm::var("a"),
        );
        assert!(pt_eq(&red, &want));
    }

    #[test]
    fn rewr_no_redex() {
        let t = ProofTerm::var("x");
        let (red, how) = reduce_rewr(&t);
        assert_eq!(how, RewrReduction::None);
        assert_eq!(red, t);
    }

    #[test]
    fn trans_instantiated_reduces_in_two_beta_steps() {
        // Extract the REWR body of trans and plug in concrete witnesses.
        let trans = &builtin_constructions()["trans"];
        let body = match &trans.conclusion {
            Judgment::Typing(t, _) => t.clone(),
            _ => unreachable!(),
        };
        // Strip the five abstractions a b c w s.
        let mut cur = body;
        for _ in 0..5 {
            cur = match cur {
                ProofTerm::Lam(_, inner) => *inner,
                other => panic!("expected abstraction, got {other}"),
            };
        }
        let p_path = Path::atom("p", Term::var("a"), Term::var("b"));
        let q_path = Path::atom("q", Term::var("b"), Term::var("c"));
        let wit_p = ProofTerm::witness(p_path.clone(), ProofTerm::var("a"), ProofTerm::var("b"));
        let wit_q = ProofTerm::witness(q_path.clone(), ProofTerm::var("b"), ProofTerm::var("c"));
        let inst = subst_term_var(&subst_term_var(&cur, "w", &wit_p), "s", &wit_q);
        let (result, tags) = reduce_rewr_fixpoint(&inst);
        assert_eq!(tags, vec![RewrReduction::Beta, RewrReduction::Beta]);
        let want = ProofTerm::witness(
            Path::Tau(Box::new(p_path), Box::new(q_path)),
            ProofTerm::var("a"),
            ProofTerm::var("c"),
        );
        assert!(pt_eq(&result, &want), "got {result}");
    }

    #[test]
    fn fixpoint_bounded_by_rewr_count() {
        let trans = &builtin_constructions()["trans"];
        let body = match &trans.conclusion {
            Judgment::Typing(t, _) => t.clone(),
            _ => unreachable!(),
        };
        fn count_rewr(t: &ProofTerm) -> usize {
            match t {
                ProofTerm::Rewr { major, minor, .. } => {
                    1 + count_rewr(major) + count_rewr(minor)
                }
                ProofTerm::Lam(_, b) => count_rewr(b),
                ProofTerm::Apply(f, a) => count_rewr(f) + count_rewr(a),
                ProofTerm::PathWitness { lhs, rhs, .. } => count_rewr(lhs) + count_rewr(rhs),
                _ => 0,
            }
        }
        let (_, tags) = reduce_rewr_fixpoint(&body);
        assert!(tags.len() <= count_rewr(&body));
    }

    #[test]
    fn subject_reduction_for_instantiated_trans() {
        // The reduct of the instantiated trans body is itself derivable
        // at the same type, via Id-I1 over the τ axiom.
        let a = ProofTerm::var("a");
        let b = ProofTerm::var("b");
        let c = ProofTerm::var("c");
        let p_path = Path::atom("p", Term::var("a"), Term::var("b"));
        let q_path = Path::atom("q", Term::var("b"), Term::var("c"));
        let hyp_p = Derivation::leaf(
            RuleTag::Hyp("p".into()),
            Judgment::PathJudg {
                lhs: a.clone(),
                path: p_path.clone(),
                rhs: b.clone(),
                ty: base_a(),
            },
        );
        let hyp_q = Derivation::leaf(
            RuleTag::Hyp("q".into()),
            Judgment::PathJudg {
                lhs: b.clone(),
                path: q_path.clone(),
                rhs: c.clone(),
                ty: base_a(),
            },
        );
        let tau = Path::Tau(Box::new(p_path), Box::new(q_path));
        let ax = Derivation::node(
            RuleTag::EqAxiom(EqAxiomKind::Tau),
            vec![hyp_p, hyp_q],
            Judgment::PathJudg {
                lhs: a.clone(),
                path: tau.clone(),
                rhs: c.clone(),
                ty: base_a(),
            },
            vec![],
        );
        let witness = ProofTerm::witness(tau, a.clone(), c.clone());
        let d = Derivation::node(
            RuleTag::IdI1,
            vec![ax],
            Judgment::Typing(witness, TypeExpr::id(base_a(), a, c)),
            vec![],
        );
        // Open hypotheses p, q remain; check the rule structure only.
        let open = Checker::check_node(&d, &mut Vec::new()).unwrap();
        assert_eq!(open.len(), 2);
    }

    #[test]
    fn id_f_formation() {
        let a = ProofTerm::var("a");
        let b = ProofTerm::var("b");
        let d = Derivation::node(
            RuleTag::IdF,
            vec![
                Derivation::leaf(
                    RuleTag::Hyp("a".into()),
                    Judgment::Typing(a.clone(), base_a()),
                ),
                Derivation::leaf(
                    RuleTag::Hyp("b".into()),
                    Judgment::Typing(b.clone(), base_a()),
                ),
            ],
            Judgment::IsType(TypeExpr::id(base_a(), a, b)),
            vec![],
        );
        let open = Checker::check_node(&d, &mut Vec::new()).unwrap();
        assert_eq!(open.len(), 2);
    }
}
