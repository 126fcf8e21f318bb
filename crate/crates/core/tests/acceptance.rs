//! End-to-end acceptance suite. Each test prints one PASS line; a failed
//! assertion is the corresponding FAIL.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use compath::groupoid::{self, LawName};
use compath::kernel::{
    self, builtin_constructions, check, reduce_rewr, reduce_rewr_fixpoint, subst_term_var,
    Derivation, EqAxiomKind, Judgment, KernelError, ProofTerm, RewrReduction, RuleTag, TypeExpr,
};
use compath::parse::parse_term;
use compath::path::{find_betaeta_path, Endpoint};
use compath::rewrite::{
    apply_rule, enumerate_chain_paths, joinability_harness, matching_rules, measure,
    normalize_path, positions_innermost,
};
use compath::{Path, RuleId, Term};

fn count_basic_steps_in_order(p: &Path, out: &mut Vec<&'static str>) {
    match p {
        Path::BetaStep { .. } => out.push("beta"),
        Path::EtaStep { .. } => out.push("eta"),
        Path::Sigma(inner) => count_basic_steps_in_order(inner, out),
        Path::Tau(l, r) => {
            count_basic_steps_in_order(l, out);
            count_basic_steps_in_order(r, out);
        }
        Path::Xi { body, .. } => count_basic_steps_in_order(body, out),
        Path::Mu { arg, .. } => count_basic_steps_in_order(arg, out),
        Path::Nu { fun, .. } => count_basic_steps_in_order(fun, out),
        _ => {}
    }
}

fn tau_nodes(p: &Path) -> usize {
    match p {
        Path::Tau(l, r) => 1 + tau_nodes(l) + tau_nodes(r),
        Path::Sigma(inner) => tau_nodes(inner),
        Path::Xi { body, .. } => tau_nodes(body),
        Path::Mu { arg, .. } => tau_nodes(arg),
        Path::Nu { fun, .. } => tau_nodes(fun),
        _ => 0,
    }
}

#[test]
fn acceptance_1_example_reproduction() {
    let started = Instant::now();
    let m = parse_term(r"(\x.((\y.(y x)) (\w.(z w))) v)").unwrap();
    let n = parse_term("(z v)").unwrap();
    let path = find_betaeta_path(&m, &n, 1000)
        .unwrap()
        .expect("terms are joinable");
    let mut steps = Vec::new();
    count_basic_steps_in_order(&path, &mut steps);
    assert_eq!(steps, vec!["eta", "beta", "beta"]);
    assert_eq!(tau_nodes(&path), 2);
    assert!(path.source().aeq(&Endpoint::Term(m)));
    assert!(path.target().aeq(&Endpoint::Term(n)));
    // Ground shape tau(tau(eta, beta), beta).
    match &path {
        Path::Tau(l, r) => {
            assert!(matches!(**r, Path::BetaStep { .. }));
            match &**l {
                Path::Tau(ll, lr) => {
                    assert!(matches!(**ll, Path::EtaStep { .. }));
                    assert!(matches!(**lr, Path::BetaStep { .. }));
                }
                other => panic!("expected nested tau, got {other}"),
            }
        }
        other => panic!("expected tau at root, got {other}"),
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 1, "took {elapsed:?}");
    println!("ACCEPTANCE 1 PASS: example path has steps eta,beta,beta under 2 tau nodes ({elapsed:?})");
}

#[test]
fn acceptance_2_groupoid_laws() {
    let started = Instant::now();
    let mut seen = Vec::new();
    for name in LawName::ALL {
        let law = groupoid::instantiate(name);
        let (lhs_nf, _) = normalize_path(&law.lhs);
        let (rhs_nf, _) = normalize_path(&law.rhs);
        assert_eq!(lhs_nf, rhs_nf, "{name}: normal forms differ");
        let w = groupoid::verify_law(&law).expect("law holds");
        match &w.witness {
            Path::RuleStep { rule, from, to } => {
                assert_eq!(*rule, law.witness_rule, "{name}");
                assert!(from.aeq(&law.lhs));
                assert!(to.aeq(&law.rhs));
                seen.push(*rule);
            }
            other => panic!("{name}: witness is not a single rule step: {other}"),
        }
    }
    let mut expected = vec![
        RuleId::Tt,
        RuleId::Tlr,
        RuleId::Trr,
        RuleId::Tsr,
        RuleId::Tr,
        RuleId::Ss,
    ];
    let mut got = seen.clone();
    expected.sort_by_key(|r| format!("{r}"));
    got.sort_by_key(|r| format!("{r}"));
    assert_eq!(got, expected, "witnesses are not one-to-one with the rules");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 1, "took {elapsed:?}");
    println!("ACCEPTANCE 2 PASS: six groupoid laws verified, witnesses map one-to-one onto tt,tlr,trr,tsr,tr,ss ({elapsed:?})");
}

#[test]
fn acceptance_3_termination_certificate() {
    let started = Instant::now();
    let subjects = enumerate_chain_paths(2, 8);
    assert!(!subjects.is_empty());
    let mut applications = 0usize;
    for subject in &subjects {
        for pos in positions_innermost(subject) {
            for rule in matching_rules(subject, &pos) {
                let reduced = apply_rule(subject, &pos, rule).unwrap();
                assert!(
                    measure(&reduced) < measure(subject),
                    "measure did not decrease: {rule} at {pos:?} on {subject}"
                );
                applications += 1;
            }
        }
        let (nf, trace) = normalize_path(subject);
        assert!(trace.is_valid(), "invalid trace for {subject}");
        for pos in positions_innermost(&nf) {
            assert!(
                matching_rules(&nf, &pos).is_empty(),
                "normal form {nf} still has a redex at {pos:?}"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 3 PASS: {} paths (<=8 nodes, 2 atoms), {} rule applications all strictly decrease the measure; every normal form is redex-free ({elapsed:?})",
        subjects.len(),
        applications
    );
}

#[test]
fn acceptance_4_joinability_report() {
    let report = joinability_harness(2, 6, 200_000).expect("harness within budget");
    for d in &report.divergent {
        assert!(d.normal_forms.len() >= 2);
        for nf in &d.normal_forms {
            assert!(
                nf.source().aeq(&d.subject.source()),
                "divergence witness {nf} broke the source of {}",
                d.subject
            );
            assert!(
                nf.target().aeq(&d.subject.target()),
                "divergence witness {nf} broke the target of {}",
                d.subject
            );
        }
    }
    let mut lines = vec![format!(
        "ACCEPTANCE 4 PASS: harness completed over {} paths; {} non-joinable subject(s) reported",
        report.paths_enumerated,
        report.divergent.len()
    )];
    for d in &report.divergent {
        let nfs: Vec<String> = d.normal_forms.iter().map(|p| p.to_string()).collect();
        lines.push(format!("  witness: {} => {{{}}}", d.subject, nfs.join(", ")));
    }
    println!("{}", lines.join("\n"));
}

fn patch_tree(d: &mut Derivation, f: &impl Fn(&mut Derivation)) {
    f(d);
    for p in &mut d.premises {
        patch_tree(p, f);
    }
}

enum Expected {
    RuleMismatch,
    Undischarged,
    EndpointMismatch,
}

impl Expected {
    fn matches(&self, e: &KernelError) -> bool {
        matches!(
            (self, e),
            (Expected::RuleMismatch, KernelError::RuleMismatch { .. })
                | (Expected::Undischarged, KernelError::UndischargedHypothesis { .. })
                | (
                    Expected::EndpointMismatch,
                    KernelError::EndpointMismatch { .. }
                )
        )
    }
}

#[test]
fn acceptance_5_kernel_soundness() {
    let builtins = builtin_constructions();
    for (name, d) in &builtins {
        check(d).unwrap_or_else(|e| panic!("builtin {name} rejected: {e}"));
    }

    let mut mutations: Vec<(&str, Derivation, Expected)> = Vec::new();

    // 1. refl without its binder discharge.
    let mut m = builtins["refl"].clone();
    m.discharged.clear();
    mutations.push(("refl missing discharge", m, Expected::Undischarged));

    // 2. symm with the sigma leaf replaced by a rho leaf: the inner
    // witness would need endpoints (b, a).
    let mut m = builtins["symm"].clone();
    patch_tree(&mut m, &|d| {
        if matches!(d.rule, RuleTag::EqAxiom(EqAxiomKind::Sigma)) {
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
        if let Judgment::Typing(ProofTerm::PathWitness { path, .. }, _) = &mut d.conclusion {
            if matches!(path, Path::Sigma(_)) {
                *path = Path::Rho(Endpoint::Term(Term::var("b")));
            }
        }
    });
    mutations.push(("symm sigma leaf replaced by rho", m, Expected::EndpointMismatch));

    // 3. symm where the elimination forgets to discharge its bound
    // hypothesis.
    let mut m = builtins["symm"].clone();
    patch_tree(&mut m, &|d| {
        if matches!(d.rule, RuleTag::IdE1) {
            d.discharged.retain(|l| l != "t");
        }
    });
    mutations.push(("symm elimination without discharge", m, Expected::RuleMismatch));

    // 4. symm with the sigma axiom conclusion endpoints swapped.
    let mut m = builtins["symm"].clone();
    patch_tree(&mut m, &|d| {
        if matches!(d.rule, RuleTag::EqAxiom(EqAxiomKind::Sigma)) {
            if let Judgment::PathJudg { lhs, rhs, .. } = &mut d.conclusion {
                std::mem::swap(lhs, rhs);
            }
        }
    });
    mutations.push(("symm swapped axiom endpoints", m, Expected::EndpointMismatch));

    // 5. trans with the outer elimination concluding the wrong type.
    let mut m = builtins["trans"].clone();
    let wrong = TypeExpr::id(
        TypeExpr::base("A"),
        ProofTerm::var("a"),
        ProofTerm::var("b"),
    );
    patch_tree(&mut m, &|d| {
        if matches!(d.rule, RuleTag::IdE1) && d.discharged.contains(&"t".to_string()) {
            if let Judgment::Typing(_, ty) = &mut d.conclusion {
                *ty = wrong.clone();
            }
        }
    });
    mutations.push(("trans wrong elimination type", m, Expected::RuleMismatch));

    // 6. trans without the discharge of its second proof hypothesis.
    let mut m = builtins["trans"].clone();
    patch_tree(&mut m, &|d| {
        d.discharged.retain(|l| l != "s");
    });
    mutations.push(("trans missing discharge", m, Expected::Undischarged));

    // 7. refl with the rho leaf retagged as sigma.
    let mut m = builtins["refl"].clone();
    patch_tree(&mut m, &|d| {
        if matches!(d.rule, RuleTag::EqAxiom(EqAxiomKind::Rho)) {
            d.rule = RuleTag::EqAxiom(EqAxiomKind::Sigma);
        }
    });
    mutations.push(("refl wrong axiom leaf", m, Expected::RuleMismatch));

    // 8. symm with the major hypothesis typed at the inverted identity
    // type: the discharged path hypothesis no longer matches.
    let mut m = builtins["symm"].clone();
    patch_tree(&mut m, &|d| {
        if let RuleTag::Hyp(l) = &d.rule {
            if l == "p" {
                d.conclusion = Judgment::Typing(
                    ProofTerm::var("p"),
                    TypeExpr::id(
                        TypeExpr::base("A"),
                        ProofTerm::var("b"),
                        ProofTerm::var("a"),
                    ),
                );
            }
        }
    });
    mutations.push(("symm inverted major type", m, Expected::EndpointMismatch));

    // 9. trans with the tau axiom composing in the wrong order.
    let mut m = builtins["trans"].clone();
    patch_tree(&mut m, &|d| {
        if matches!(d.rule, RuleTag::EqAxiom(EqAxiomKind::Tau)) {
            if let Judgment::PathJudg {
                path: Path::Tau(l, r),
                ..
            } = &mut d.conclusion
            {
                std::mem::swap(l, r);
            }
        }
    });
    mutations.push(("trans reversed composition", m, Expected::RuleMismatch));

    // 10. trans with the introduced witness endpoints swapped.
    let mut m = builtins["trans"].clone();
    patch_tree(&mut m, &|d| {
        if matches!(d.rule, RuleTag::IdI1) {
            if let Judgment::Typing(ProofTerm::PathWitness { lhs, rhs, .. }, _) =
                &mut d.conclusion
            {
                std::mem::swap(lhs, rhs);
            }
        }
    });
    mutations.push(("trans swapped witness endpoints", m, Expected::EndpointMismatch));

    assert_eq!(mutations.len(), 10);
    for (label, d, expected) in &mutations {
        match check(d) {
            Ok(j) => panic!("mutation {label} was accepted: {j}"),
            Err(e) => assert!(
                expected.matches(&e),
                "mutation {label} rejected with wrong error class: {e}"
            ),
        }
    }
    println!("ACCEPTANCE 5 PASS: refl, symm, trans check; 10 mutations rejected with the correct error classes");
}

#[test]
fn acceptance_6_rewr_reductions() {
    // η in one step.
    let e = ProofTerm::var("e");
    let trivial = ProofTerm::witness(
        Path::atom("t", Term::var("a"), Term::var("b")),
        ProofTerm::var("a"),
        ProofTerm::var("b"),
    );
    let (red, how) = reduce_rewr(&ProofTerm::rewr(e.clone(), "t", trivial));
    assert_eq!(how, RewrReduction::Eta);
    assert!(kernel::pt_eq(&red, &e));

    // β substitutes the major path for the bound atom.
    let m_path = Path::atom("m", Term::var("a"), Term::var("b"));
    let major = ProofTerm::witness(m_path.clone(), ProofTerm::var("a"), ProofTerm::var("b"));
    let minor = ProofTerm::witness(
        Path::Sigma(Box::new(Path::atom("g", Term::var("a"), Term::var("b")))),
        ProofTerm::var("b"),
        ProofTerm::var("a"),
    );
    let (red, how) = reduce_rewr(&ProofTerm::rewr(major, "g", minor));
    assert_eq!(how, RewrReduction::Beta);
    let want = ProofTerm::witness(
        Path::Sigma(Box::new(m_path)),
        ProofTerm::var("b"),
        ProofTerm::var("a"),
    );
    assert!(kernel::pt_eq(&red, &want));

    // trans instantiated with concrete witnesses: exactly two β steps,
    // ending in a witness over τ of the two input paths.
    let trans = &builtin_constructions()["trans"];
    let mut body = match &trans.conclusion {
        Judgment::Typing(t, _) => t.clone(),
        _ => unreachable!(),
    };
    for _ in 0..5 {
        body = match body {
            ProofTerm::Lam(_, inner) => *inner,
            other => panic!("expected abstraction, got {other}"),
        };
    }
    let p_path = Path::atom("p", Term::var("a"), Term::var("b"));
    let q_path = Path::atom("q", Term::var("b"), Term::var("c"));
    let wit_p = ProofTerm::witness(p_path.clone(), ProofTerm::var("a"), ProofTerm::var("b"));
    let wit_q = ProofTerm::witness(q_path.clone(), ProofTerm::var("b"), ProofTerm::var("c"));
    let inst = subst_term_var(&subst_term_var(&body, "w", &wit_p), "s", &wit_q);
    let (result, tags) = reduce_rewr_fixpoint(&inst);
    assert_eq!(tags, vec![RewrReduction::Beta, RewrReduction::Beta]);
    let want = ProofTerm::witness(
        Path::Tau(Box::new(p_path), Box::new(q_path)),
        ProofTerm::var("a"),
        ProofTerm::var("c"),
    );
    assert!(kernel::pt_eq(&result, &want), "got {result}");
    println!("ACCEPTANCE 6 PASS: REWR η in one step, β substitutes; instantiated trans reduces in exactly 2 β steps to a witness over τ(p, q)");
}

#[test]
fn acceptance_7_globular_towers() {
    let started = Instant::now();
    let mut checked = 0u32;
    for seed in 0..1000u64 {
        let depth = 2 + (seed % 3) as usize;
        let tower = groupoid::random_tower(seed, depth);
        assert!(tower.depth() <= 4);
        assert_eq!(
            groupoid::globular_check(&tower),
            Ok(true),
            "tower for seed {seed} failed"
        );
        checked += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}");
    println!("ACCEPTANCE 7 PASS: {checked} seeded towers of depth <= 4 satisfy the globular identities ({elapsed:?})");
}

#[test]
fn acceptance_8_endpoint_preservation() {
    let pool: Vec<Path> = enumerate_chain_paths(2, 7)
        .into_iter()
        .filter(|p| {
            positions_innermost(p)
                .iter()
                .any(|pos| !matching_rules(p, pos).is_empty())
        })
        .collect();
    assert!(!pool.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut applications = 0u32;
    while applications < 10_000 {
        let subject = &pool[rng.gen_range(0..pool.len())];
        let positions = positions_innermost(subject);
        let pos = &positions[rng.gen_range(0..positions.len())];
        let rules = matching_rules(subject, pos);
        if rules.is_empty() {
            continue;
        }
        let rule = rules[rng.gen_range(0..rules.len())];
        let reduced = apply_rule(subject, pos, rule).unwrap();
        assert!(
            reduced.source().aeq(&subject.source()),
            "{rule} at {pos:?} changed the source of {subject}"
        );
        assert!(
            reduced.target().aeq(&subject.target()),
            "{rule} at {pos:?} changed the target of {subject}"
        );
        applications += 1;
    }
    println!("ACCEPTANCE 8 PASS: {applications} random rule applications preserve endpoints up to α");
}
