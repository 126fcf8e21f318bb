//! Groupoid laws and globular towers.
//!
//! The six laws (associativity, the two units, the two inverses, double
//! inversion) hold up to propositional equality: both sides of each law
//! normalize to the same path, and the normalization trace provides an
//! explicit higher-level witness. Towers of paths between paths form a
//! globular set; the source/target identities are checked by direct
//! endpoint recomputation. Level-1 paths and above are never themselves
//! normalized; no rewrite rules exist at those levels here.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::kernel::{
    check_with_hypotheses, Derivation, Judgment, KernelError, ProofTerm, RuleTag, TypeExpr,
};
use crate::path::{mk_rho, mk_sigma, mk_tau, Endpoint, Path};
use crate::rewrite::{normalize_path, RuleId};
use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupoidError {
    /// Both sides of a law failed to reach a common normal form.
    #[error("law {law} failed: lhs normalizes to {lhs_nf}, rhs to {rhs_nf}")]
    LawFailed {
        law: LawName,
        lhs_nf: String,
        rhs_nf: String,
    },
    /// A tower layer's endpoints do not chain onto the previous layer.
    #[error("malformed tower: {reason}")]
    MalformedTower { reason: String },
    /// Levels are defined for paths, not bare terms.
    #[error("level is undefined for a bare term endpoint")]
    NotAPath,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LawName {
    Assoc,
    LeftUnit,
    RightUnit,
    LeftInverse,
    RightInverse,
    DoubleSym,
}

impl LawName {
    pub const ALL: [LawName; 6] = [
        LawName::Assoc,
        LawName::LeftUnit,
        LawName::RightUnit,
        LawName::LeftInverse,
        LawName::RightInverse,
        LawName::DoubleSym,
    ];
}

impl fmt::Display for LawName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LawName::Assoc => "assoc",
            LawName::LeftUnit => "left_unit",
            LawName::RightUnit => "right_unit",
            LawName::LeftInverse => "left_inverse",
            LawName::RightInverse => "right_inverse",
            LawName::DoubleSym => "double_sym",
        };
        write!(f, "{s}")
    }
}

/// A law instantiated over fresh composable atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidLaw {
    pub name: LawName,
    pub lhs: Path,
    pub rhs: Path,
    pub witness_rule: RuleId,
}

/// Instantiate a law schema over the chain x -> y -> z -> w with atoms
/// p: x->y, q: y->z, r: z->w (only as many as the law mentions).
pub fn instantiate(name: LawName) -> GroupoidLaw {
    let (x, y, z, w) = (Term::var("x"), Term::var("y"), Term::var("z"), Term::var("w"));
    let p = Path::atom("p", x.clone(), y.clone());
    let q = Path::atom("q", y.clone(), z.clone());
    let r3 = Path::atom("r", z.clone(), w);
    let r = Path::atom("r", x.clone(), y.clone());
    let tau = |a: Path, b: Path| mk_tau(a, b).expect("composable by construction");
    let (lhs, rhs, witness_rule) = match name {
        LawName::Assoc => (
            tau(tau(p.clone(), q.clone()), r3.clone()),
            tau(p, tau(q, r3)),
            RuleId::Tt,
        ),
        LawName::LeftUnit => (
            tau(mk_rho(Endpoint::Term(x)), r.clone()),
            r,
            RuleId::Tlr,
        ),
        LawName::RightUnit => (
            tau(r.clone(), mk_rho(Endpoint::Term(y))),
            r,
            RuleId::Trr,
        ),
        LawName::LeftInverse => (
            tau(mk_sigma(r.clone()), r),
            mk_rho(Endpoint::Term(y)),
            RuleId::Tsr,
        ),
        LawName::RightInverse => (
            tau(r.clone(), mk_sigma(r)),
            mk_rho(Endpoint::Term(x)),
            RuleId::Tr,
        ),
        LawName::DoubleSym => (mk_sigma(mk_sigma(r.clone())), r, RuleId::Ss),
    };
    GroupoidLaw {
        name,
        lhs,
        rhs,
        witness_rule,
    }
}

/// The outcome of verifying a law: the common normal form, the level-1
/// witness path from lhs to rhs, and the typing judgment for the
/// inhabitant of the corresponding identity type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub law: LawName,
    pub lhs: Path,
    pub rhs: Path,
    pub normal_form: Path,
    pub witness: Path,
    pub judgment: Judgment,
}

/// Normalize both sides of the law and assemble the witness from the two
/// traces: forward trace of the lhs composed with the reversed trace of
/// the rhs. Trivial sides are dropped, so single-step laws yield a bare
/// rule step.
pub fn verify_law(law: &GroupoidLaw) -> Result<Witness, GroupoidError> {
    let (lhs_nf, lhs_trace) = normalize_path(&law.lhs);
    let (rhs_nf, rhs_trace) = normalize_path(&law.rhs);
    if lhs_nf != rhs_nf {
        return Err(GroupoidError::LawFailed {
            law: law.name,
            lhs_nf: lhs_nf.to_string(),
            rhs_nf: rhs_nf.to_string(),
        });
    }
    let forward = (!lhs_trace.steps.is_empty()).then(|| lhs_trace.as_path());
    let backward = (!rhs_trace.steps.is_empty()).then(|| mk_sigma(rhs_trace.as_path()));
    let witness = match (forward, backward) {
        (Some(f), Some(b)) => mk_tau(f, b).expect("traces meet at the normal form"),
        (Some(f), None) => f,
        (None, Some(b)) => b,
        (None, None) => mk_rho(Endpoint::path(law.lhs.clone())),
    };
    let judgment = witness_judgment(law, &witness)?;
    Ok(Witness {
        law: law.name,
        lhs: law.lhs.clone(),
        rhs: law.rhs.clone(),
        normal_form: lhs_nf,
        witness: witness.clone(),
        judgment,
    })
}

/// Run the witness through the identity-introduction rule: the level-1
/// path inhabits Id over the identity type of the laws' shared term
/// endpoints.
fn witness_judgment(law: &GroupoidLaw, witness: &Path) -> Result<Judgment, GroupoidError> {
    let (src, tgt) = match (law.lhs.source(), law.lhs.target()) {
        (Endpoint::Term(s), Endpoint::Term(t)) => {
            (ProofTerm::from_term(&s), ProofTerm::from_term(&t))
        }
        _ => return Err(GroupoidError::NotAPath),
    };
    let carrier = TypeExpr::id(TypeExpr::base("A"), src, tgt);
    let lhs_pt = ProofTerm::EmbeddedPath(law.lhs.clone());
    let rhs_pt = ProofTerm::EmbeddedPath(law.rhs.clone());
    let premise = Derivation::leaf(
        RuleTag::Hyp("w".into()),
        Judgment::PathJudg {
            lhs: lhs_pt.clone(),
            path: witness.clone(),
            rhs: rhs_pt.clone(),
            ty: carrier.clone(),
        },
    );
    let inhabitant = ProofTerm::witness(witness.clone(), lhs_pt.clone(), rhs_pt.clone());
    let id_ty = TypeExpr::id(carrier, lhs_pt, rhs_pt);
    let intro = Derivation::node(
        RuleTag::IdI1,
        vec![premise],
        Judgment::Typing(inhabitant, id_ty),
        vec![],
    );
    let (judgment, _open) = check_with_hypotheses(&intro)?;
    Ok(judgment)
}

/// Verify all six laws over fresh composable atoms.
pub fn verify_all() -> Result<Vec<Witness>, GroupoidError> {
    LawName::ALL.iter().map(|n| verify_law(&instantiate(*n))).collect()
}

/// The level of an endpoint: defined for path endpoints only.
pub fn endpoint_level(e: &Endpoint) -> Result<usize, GroupoidError> {
    match e {
        Endpoint::Term(_) => Err(GroupoidError::NotAPath),
        Endpoint::Path(p) => Ok(p.level()),
    }
}

/// A tower of paths between paths: a base pair of terms, then one pair
/// of parallel paths per layer, each connecting the previous layer's
/// pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobularInstance {
    pub base: (Term, Term),
    pub layers: Vec<(Path, Path)>,
}

impl GlobularInstance {
    /// Total number of items, counting the base term pair.
    pub fn depth(&self) -> usize {
        self.layers.len() + 1
    }
}

/// Check the globular identities s(s(x)) = s(t(x)) and t(s(x)) = t(t(x))
/// for every path above the first layer, by direct endpoint
/// recomputation. Broken endpoint chaining is a malformed tower, not a
/// globular failure.
pub fn globular_check(instance: &GlobularInstance) -> Result<bool, GroupoidError> {
    let malformed = |reason: String| GroupoidError::MalformedTower { reason };
    for (k, (a, b)) in instance.layers.iter().enumerate() {
        let (want_src, want_tgt) = if k == 0 {
            (
                Endpoint::Term(instance.base.0.clone()),
                Endpoint::Term(instance.base.1.clone()),
            )
        } else {
            let (pa, pb) = &instance.layers[k - 1];
            (Endpoint::path(pa.clone()), Endpoint::path(pb.clone()))
        };
        for side in [a, b] {
            if side.level() != k {
                return Err(malformed(format!(
                    "layer {} path {side} has level {}, expected {k}",
                    k + 1,
                    side.level()
                )));
            }
            if !side.source().aeq(&want_src) {
                return Err(malformed(format!(
                    "layer {} path {side} does not start at the previous layer",
                    k + 1
                )));
            }
            if !side.target().aeq(&want_tgt) {
                return Err(malformed(format!(
                    "layer {} path {side} does not end at the previous layer",
                    k + 1
                )));
            }
        }
    }
    // The identities proper, recomputed from the paths themselves.
    for (k, (a, b)) in instance.layers.iter().enumerate().skip(1) {
        let _ = k;
        for x in [a, b] {
            let (s, t) = (x.source(), x.target());
            let (sp, tp) = match (s, t) {
                (Endpoint::Path(sp), Endpoint::Path(tp)) => (sp, tp),
                _ => return Ok(false),
            };
            if !sp.source().aeq(&tp.source()) || !sp.target().aeq(&tp.target()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Build a random tower: a random level-0 path, its normal form, the
/// trace path between them, and further layers padded with unit
/// compositions and their reversed unit-law steps.
pub fn random_tower(seed: u64, depth: usize) -> GlobularInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = random_level0_path(&mut rng);
    let (base_src, base_tgt) = match (phi.source(), phi.target()) {
        (Endpoint::Term(s), Endpoint::Term(t)) => (s, t),
        _ => unreachable!("level-0 paths have term endpoints"),
    };
    let (nf, trace) = normalize_path(&phi);
    let mut layers = vec![(phi, nf)];
    while layers.len() + 1 < depth {
        let (a, b) = layers.last().unwrap().clone();
        let w = if layers.len() == 1 {
            trace.as_path()
        } else {
            // a = previous w, b = tau(a', rho); connect via the reversed
            // right-unit step built one level down.
            layers_connector(&a, &b)
        };
        let padded = mk_tau(w.clone(), mk_rho(Endpoint::path(b))).expect("shared endpoint");
        layers.push((w, padded));
    }
    GlobularInstance {
        base: (base_src, base_tgt),
        layers,
    }
}

/// A path from `w` to `tau(w, rho)` one level up: the reversed
/// right-unit rewrite step.
fn layers_connector(w: &Path, padded: &Path) -> Path {
    mk_sigma(Path::RuleStep {
        rule: RuleId::Trr,
        from: Box::new(padded.clone()),
        to: Box::new(w.clone()),
    })
}

fn random_level0_path(rng: &mut ChaCha8Rng) -> Path {
    let chain = rng.gen_range(1..=3usize);
    let term = |i: usize| Term::var(format!("x{i}"));
    let atom = |i: usize| Path::atom(format!("p{i}"), term(i - 1), term(i));
    let mut pos = rng.gen_range(0..=chain);
    let steps = rng.gen_range(1..=6usize);
    let mut acc: Option<Path> = None;
    for _ in 0..steps {
        let forward_ok = pos < chain;
        let backward_ok = pos > 0;
        let choice = rng.gen_range(0..3u8);
        let prim = match choice {
            0 if forward_ok => {
                pos += 1;
                atom(pos)
            }
            1 if backward_ok => {
                let a = atom(pos);
                pos -= 1;
                mk_sigma(a)
            }
            _ => mk_rho(Endpoint::Term(term(pos))),
        };
        acc = Some(match acc {
            None => prim,
            Some(p) => mk_tau(p, prim).expect("walk is composable"),
        });
    }
    let mut path = acc.expect("at least one step");
    if rng.gen_bool(0.3) {
        path = mk_sigma(mk_sigma(path));
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::Trace;

    #[test]
    fn all_six_laws_verify() {
        let witnesses = verify_all().expect("laws hold");
        assert_eq!(witnesses.len(), 6);
        for w in &witnesses {
            assert!(w.witness.source().aeq(&Endpoint::path(w.lhs.clone())));
            assert!(w.witness.target().aeq(&Endpoint::path(w.rhs.clone())));
        }
    }

    #[test]
    fn witnesses_map_one_to_one_onto_rules() {
        for name in LawName::ALL {
            let law = instantiate(name);
            let w = verify_law(&law).expect("law holds");
            match &w.witness {
                Path::RuleStep { rule, from, to } => {
                    assert_eq!(*rule, law.witness_rule, "{name}");
                    assert!(from.aeq(&law.lhs));
                    assert!(to.aeq(&law.rhs));
                }
                other => panic!("{name}: expected a single rule step, got {other}"),
            }
        }
    }

    #[test]
    fn witness_level_is_one() {
        for name in LawName::ALL {
            let w = verify_law(&instantiate(name)).unwrap();
            assert_eq!(w.witness.level(), 1);
        }
    }

    #[test]
    fn law_sides_share_endpoints() {
        for name in LawName::ALL {
            let law = instantiate(name);
            assert!(law.lhs.source().aeq(&law.rhs.source()), "{name}");
            assert!(law.lhs.target().aeq(&law.rhs.target()), "{name}");
        }
    }

    #[test]
    fn level_stable_under_normalization() {
        for name in LawName::ALL {
            let law = instantiate(name);
            let (nf, _) = normalize_path(&law.lhs);
            assert_eq!(law.lhs.level(), nf.level());
        }
    }

    #[test]
    fn endpoint_level_rejects_terms() {
        assert_eq!(
            endpoint_level(&Endpoint::Term(Term::var("a"))),
            Err(GroupoidError::NotAPath)
        );
        let p = Path::atom("r", Term::var("a"), Term::var("b"));
        assert_eq!(endpoint_level(&Endpoint::path(p)), Ok(0));
    }

    #[test]
    fn rule_step_between_level0_paths_has_level_one() {
        let r = Path::atom("r", Term::var("x"), Term::var("y"));
        let ss = Path::RuleStep {
            rule: RuleId::Ss,
            from: Box::new(mk_sigma(mk_sigma(r.clone()))),
            to: Box::new(r),
        };
        assert_eq!(ss.level(), 1);
    }

    #[test]
    fn handmade_tower_passes() {
        let (a, b) = (Term::var("a"), Term::var("b"));
        let theta = Path::atom("theta", a.clone(), b.clone());
        let alpha = Path::atom("alpha", a.clone(), b.clone());
        let phi = crate::path::mk_atom(
            "phi",
            Endpoint::path(theta.clone()),
            Endpoint::path(alpha.clone()),
        )
        .unwrap();
        let inst = GlobularInstance {
            base: (a, b),
            layers: vec![(theta, alpha), (phi.clone(), phi)],
        };
        assert_eq!(globular_check(&inst), Ok(true));
    }

    #[test]
    fn mismatched_layer_is_malformed() {
        let (a, b, c) = (Term::var("a"), Term::var("b"), Term::var("c"));
        let theta = Path::atom("theta", a.clone(), b.clone());
        let alpha = Path::atom("alpha", a.clone(), c);
        let phi = Path::Atom {
            name: "phi".into(),
            src: Endpoint::path(theta.clone()),
            tgt: Endpoint::path(alpha.clone()),
        };
        let inst = GlobularInstance {
            base: (a, b),
            layers: vec![(theta, alpha), (phi.clone(), phi)],
        };
        assert!(matches!(
            globular_check(&inst),
            Err(GroupoidError::MalformedTower { .. })
        ));
    }

    #[test]
    fn random_towers_pass() {
        for seed in 0..200 {
            for depth in 2..=4 {
                let tower = random_tower(seed, depth);
                assert_eq!(tower.depth(), depth, "seed {seed}");
                assert_eq!(
                    globular_check(&tower),
                    Ok(true),
                    "seed {seed} depth {depth}"
                );
            }
        }
    }

    #[test]
    fn trace_pipeline_towers_pass() {
        // Towers assembled directly from normalization traces.
        for name in LawName::ALL {
            let law = instantiate(name);
            let (nf, trace) = normalize_path(&law.lhs);
            let w: Path = Trace::as_path(&trace);
            let (src, tgt) = match (law.lhs.source(), law.lhs.target()) {
                (Endpoint::Term(s), Endpoint::Term(t)) => (s, t),
                _ => unreachable!(),
            };
            let inst = GlobularInstance {
                base: (src, tgt),
                layers: vec![(law.lhs.clone(), nf), (w.clone(), w)],
            };
            assert_eq!(globular_check(&inst), Ok(true), "{name}");
        }
    }
}
