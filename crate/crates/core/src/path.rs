//! Computational paths as first-class expression trees.
//!
//! A path proves the equality of its two endpoints. Level-0 paths run
//! between λ-terms; higher paths run between paths. Every node carries
//! enough information to recompute its endpoints structurally.

use std::fmt;

use thiserror::Error;

use crate::rewrite::RuleId;
use crate::term::{
    alpha_eq, contraction_sites, normalize_term, RedexKind, RedexSite, Term, TermError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    /// Composition of paths whose endpoints do not meet.
    #[error("endpoint mismatch: expected {expected}, found {found}")]
    EndpointMismatch { expected: String, found: String },
    /// History step whose subject is not the previous step's result.
    #[error("non-consecutive history at step {index}")]
    NonConsecutive { index: usize },
    /// An α-step between terms that are not α-equivalent.
    #[error("terms are not alpha-equivalent: {from} vs {to}")]
    NotAlphaEquivalent { from: String, to: String },
    /// A congruence constructor applied to a higher-level path.
    #[error("congruence constructors require term endpoints")]
    NotATermEndpoint,
    /// Atom endpoints at different levels.
    #[error("atom endpoints have different levels")]
    LevelMismatch,
    #[error(transparent)]
    Term(#[from] TermError),
}

/// One end of a path: a λ-term (level 0) or another path (level n ≥ 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Term(Term),
    Path(Box<Path>),
}

impl Endpoint {
    pub fn term(t: Term) -> Endpoint {
        Endpoint::Term(t)
    }

    pub fn path(p: Path) -> Endpoint {
        Endpoint::Path(Box::new(p))
    }

    /// Equality up to α on embedded terms.
    pub fn aeq(&self, other: &Endpoint) -> bool {
        match (self, other) {
            (Endpoint::Term(a), Endpoint::Term(b)) => alpha_eq(a, b),
            (Endpoint::Path(a), Endpoint::Path(b)) => a.aeq(b),
            _ => false,
        }
    }
}

/// A computational path. Constructors mirror the equality theory: ρ
/// (reflexivity), σ (symmetry), τ (transitivity), ξ (congruence under
/// abstraction), μ/ν (application congruences), basic β/η/α steps, named
/// atoms for schematic reasoning, and rule steps one level up.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Path {
    Rho(Endpoint),
    BetaStep { subject: Term, site: RedexSite },
    EtaStep { subject: Term, site: RedexSite },
    AlphaStep { from: Term, to: Term },
    Atom { name: String, src: Endpoint, tgt: Endpoint },
    Sigma(Box<Path>),
    Tau(Box<Path>, Box<Path>),
    Xi { binder: String, body: Box<Path> },
    Mu { fun: Term, arg: Box<Path> },
    Nu { fun: Box<Path>, arg: Term },
    RuleStep { rule: RuleId, from: Box<Path>, to: Box<Path> },
}

impl Path {
    pub fn source(&self) -> Endpoint {
        match self {
            Path::Rho(e) => e.clone(),
            Path::BetaStep { subject, .. } | Path::EtaStep { subject, .. } => {
                Endpoint::Term(subject.clone())
            }
            Path::AlphaStep { from, .. } => Endpoint::Term(from.clone()),
            Path::Atom { src, .. } => src.clone(),
            Path::Sigma(p) => p.target(),
            Path::Tau(l, _) => l.source(),
            Path::Xi { binder, body } => wrap_abs(binder, body.source()),
            Path::Mu { fun, arg } => wrap_app_right(fun, arg.source()),
            Path::Nu { fun, arg } => wrap_app_left(fun.source(), arg),
            Path::RuleStep { from, .. } => Endpoint::Path(from.clone()),
        }
    }

    pub fn target(&self) -> Endpoint {
        match self {
            Path::Rho(e) => e.clone(),
            Path::BetaStep { site, .. } | Path::EtaStep { site, .. } => {
                Endpoint::Term(site.result.clone())
            }
            Path::AlphaStep { to, .. } => Endpoint::Term(to.clone()),
            Path::Atom { tgt, .. } => tgt.clone(),
            Path::Sigma(p) => p.source(),
            Path::Tau(_, r) => r.target(),
            Path::Xi { binder, body } => wrap_abs(binder, body.target()),
            Path::Mu { fun, arg } => wrap_app_right(fun, arg.target()),
            Path::Nu { fun, arg } => wrap_app_left(fun.target(), arg),
            Path::RuleStep { to, .. } => Endpoint::Path(to.clone()),
        }
    }

    /// Level of the path: 0 between terms, n+1 between level-n paths.
    pub fn level(&self) -> usize {
        match self.source() {
            Endpoint::Term(_) => 0,
            Endpoint::Path(p) => 1 + p.level(),
        }
    }

    /// Structural equality up to α on embedded terms. Atom names, binder
    /// names and rule tags are compared exactly.
    pub fn aeq(&self, other: &Path) -> bool {
        match (self, other) {
            (Path::Rho(a), Path::Rho(b)) => a.aeq(b),
            (
                Path::BetaStep { subject: s1, site: t1 },
                Path::BetaStep { subject: s2, site: t2 },
            )
            | (
                Path::EtaStep { subject: s1, site: t1 },
                Path::EtaStep { subject: s2, site: t2 },
            ) => alpha_eq(s1, s2) && t1.position == t2.position && alpha_eq(&t1.result, &t2.result),
            (Path::AlphaStep { from: f1, to: t1 }, Path::AlphaStep { from: f2, to: t2 }) => {
                alpha_eq(f1, f2) && alpha_eq(t1, t2)
            }
            (
                Path::Atom { name: n1, src: s1, tgt: t1 },
                Path::Atom { name: n2, src: s2, tgt: t2 },
            ) => n1 == n2 && s1.aeq(s2) && t1.aeq(t2),
            (Path::Sigma(a), Path::Sigma(b)) => a.aeq(b),
            (Path::Tau(l1, r1), Path::Tau(l2, r2)) => l1.aeq(l2) && r1.aeq(r2),
            (
                Path::Xi { binder: b1, body: p1 },
                Path::Xi { binder: b2, body: p2 },
            ) => b1 == b2 && p1.aeq(p2),
            (Path::Mu { fun: f1, arg: a1 }, Path::Mu { fun: f2, arg: a2 }) => {
                alpha_eq(f1, f2) && a1.aeq(a2)
            }
            (Path::Nu { fun: f1, arg: a1 }, Path::Nu { fun: f2, arg: a2 }) => {
                f1.aeq(f2) && alpha_eq(a1, a2)
            }
            (
                Path::RuleStep { rule: r1, from: f1, to: t1 },
                Path::RuleStep { rule: r2, from: f2, to: t2 },
            ) => r1 == r2 && f1.aeq(f2) && t1.aeq(t2),
            _ => false,
        }
    }

    /// Convenience atom between two terms.
    pub fn atom(name: impl Into<String>, src: Term, tgt: Term) -> Path {
        Path::Atom {
            name: name.into(),
            src: Endpoint::Term(src),
            tgt: Endpoint::Term(tgt),
        }
    }

    /// Basic step from a redex site, picking β/η by the site's kind.
    pub fn from_site(subject: &Term, site: &RedexSite) -> Path {
        match site.kind {
            RedexKind::Beta => Path::BetaStep {
                subject: subject.clone(),
                site: site.clone(),
            },
            RedexKind::Eta => Path::EtaStep {
                subject: subject.clone(),
                site: site.clone(),
            },
        }
    }
}

fn wrap_abs(binder: &str, e: Endpoint) -> Endpoint {
    match e {
        Endpoint::Term(t) => Endpoint::Term(Term::abs(binder, t)),
        Endpoint::Path(_) => unreachable!("xi over a higher-level path is rejected at construction"),
    }
}

fn wrap_app_right(fun: &Term, e: Endpoint) -> Endpoint {
    match e {
        Endpoint::Term(t) => Endpoint::Term(Term::app(fun.clone(), t)),
        Endpoint::Path(_) => unreachable!("mu over a higher-level path is rejected at construction"),
    }
}

fn wrap_app_left(e: Endpoint, arg: &Term) -> Endpoint {
    match e {
        Endpoint::Term(t) => Endpoint::Term(Term::app(t, arg.clone())),
        Endpoint::Path(_) => unreachable!("nu over a higher-level path is rejected at construction"),
    }
}

pub fn mk_rho(at: Endpoint) -> Path {
    Path::Rho(at)
}

pub fn mk_sigma(p: Path) -> Path {
    Path::Sigma(Box::new(p))
}

/// Composition; the endpoints must meet up to α.
pub fn mk_tau(p: Path, q: Path) -> Result<Path, PathError> {
    let mid_l = p.target();
    let mid_r = q.source();
    if !mid_l.aeq(&mid_r) {
        return Err(PathError::EndpointMismatch {
            expected: mid_l.to_string(),
            found: mid_r.to_string(),
        });
    }
    Ok(Path::Tau(Box::new(p), Box::new(q)))
}

pub fn mk_xi(binder: impl Into<String>, body: Path) -> Result<Path, PathError> {
    if !matches!(body.source(), Endpoint::Term(_)) {
        return Err(PathError::NotATermEndpoint);
    }
    Ok(Path::Xi {
        binder: binder.into(),
        body: Box::new(body),
    })
}

pub fn mk_mu(fun: Term, arg_path: Path) -> Result<Path, PathError> {
    if !matches!(arg_path.source(), Endpoint::Term(_)) {
        return Err(PathError::NotATermEndpoint);
    }
    Ok(Path::Mu {
        fun,
        arg: Box::new(arg_path),
    })
}

pub fn mk_nu(fun_path: Path, arg: Term) -> Result<Path, PathError> {
    if !matches!(fun_path.source(), Endpoint::Term(_)) {
        return Err(PathError::NotATermEndpoint);
    }
    Ok(Path::Nu {
        fun: Box::new(fun_path),
        arg,
    })
}

pub fn mk_alpha(from: Term, to: Term) -> Result<Path, PathError> {
    if !alpha_eq(&from, &to) {
        return Err(PathError::NotAlphaEquivalent {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    Ok(Path::AlphaStep { from, to })
}

pub fn mk_atom(name: impl Into<String>, src: Endpoint, tgt: Endpoint) -> Result<Path, PathError> {
    let same_level = match (&src, &tgt) {
        (Endpoint::Term(_), Endpoint::Term(_)) => true,
        (Endpoint::Path(a), Endpoint::Path(b)) => a.level() == b.level(),
        _ => false,
    };
    if !same_level {
        return Err(PathError::LevelMismatch);
    }
    Ok(Path::Atom {
        name: name.into(),
        src,
        tgt,
    })
}

/// Check that `site` is a valid contraction of `subject`.
fn site_applies(subject: &Term, site: &RedexSite) -> bool {
    contraction_sites(subject)
        .iter()
        .any(|s| s.position == site.position && s.kind == site.kind && s.result == site.result)
}

/// Turn a consecutive contraction history into a path: empty → ρ, one step
/// → the basic step, otherwise a left-associated τ-chain.
pub fn path_from_history(start: &Term, history: &[RedexSite]) -> Result<Path, PathError> {
    let mut subject = start.clone();
    let mut acc: Option<Path> = None;
    for (index, site) in history.iter().enumerate() {
        if !site_applies(&subject, site) {
            return Err(PathError::NonConsecutive { index });
        }
        let step = Path::from_site(&subject, site);
        acc = Some(match acc {
            None => step,
            Some(prev) => mk_tau(prev, step)?,
        });
        subject = site.result.clone();
    }
    Ok(acc.unwrap_or_else(|| Path::Rho(Endpoint::Term(start.clone()))))
}

/// Search for a βη-conversion path from `m` to `n` by normalizing both
/// sides and joining at the common normal form. Returns `None` when the
/// normal forms differ.
pub fn find_betaeta_path(m: &Term, n: &Term, fuel: usize) -> Result<Option<Path>, PathError> {
    let (nf_m, hist_m) = normalize_term(m, fuel)?;
    let (nf_n, hist_n) = normalize_term(n, fuel)?;
    if !alpha_eq(&nf_m, &nf_n) {
        return Ok(None);
    }
    let mut segments: Vec<Path> = Vec::new();
    if !hist_m.is_empty() {
        segments.push(path_from_history(m, &hist_m)?);
    }
    if nf_m != nf_n {
        segments.push(mk_alpha(nf_m, nf_n.clone())?);
    }
    if !hist_n.is_empty() {
        segments.push(mk_sigma(path_from_history(n, &hist_n)?));
    }
    let path = match segments.into_iter().reduce(|a, b| {
        mk_tau(a, b).expect("segments chain at the shared normal form")
    }) {
        Some(p) => p,
        None => Path::Rho(Endpoint::Term(m.clone())),
    };
    Ok(Some(path))
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Term(t) => write!(f, "{t}"),
            Endpoint::Path(p) => write!(f, "{p}"),
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Path::Rho(e) => write!(f, "rho[{e}]"),
            Path::BetaStep { subject, site } => write!(f, "beta[{subject} => {}]", site.result),
            Path::EtaStep { subject, site } => write!(f, "eta[{subject} => {}]", site.result),
            Path::AlphaStep { from, to } => write!(f, "alpha[{from} => {to}]"),
            Path::Atom { name, src, tgt } => write!(f, "#{name}:{src} -> {tgt}"),
            Path::Sigma(p) => write!(f, "sigma({p})"),
            Path::Tau(l, r) => write!(f, "tau({l}, {r})"),
            Path::Xi { binder, body } => write!(f, "xi({binder}.{body})"),
            Path::Mu { fun, arg } => write!(f, "mu({fun}, {arg})"),
            Path::Nu { fun, arg } => write!(f, "nu({fun}, {arg})"),
            Path::RuleStep { rule, from, to } => write!(f, "{rule}({from}, {to})"),
        }
    }
}
