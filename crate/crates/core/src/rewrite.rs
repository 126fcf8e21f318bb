//! Rewrite system over path expressions.
//!
//! Seven rules remove redundancies built from ρ, σ and τ:
//!
//! ```text
//! sr:  sigma(rho)          -> rho
//! ss:  sigma(sigma(r))     -> r
//! tr:  tau(r, sigma(r))    -> rho  (at source of r)
//! tsr: tau(sigma(r), r)    -> rho  (at target of r)
//! trr: tau(r, rho)         -> r
//! tlr: tau(rho, r)         -> r
//! tt:  tau(tau(t, r), s)   -> tau(t, tau(r, s))
//! ```
//!
//! Every application strictly decreases the lexicographic measure
//! `(node count, Σ over tau nodes of left-child node count)`, so
//! normalization terminates. Each rewrite step is itself a path one level
//! up; a whole normalization trace composes those steps with τ.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::path::{Endpoint, Path};
use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("rule {rule} is not applicable at position {position:?}")]
    RuleNotApplicable { rule: RuleId, position: Vec<usize> },
    #[error("joinability exploration exceeded the budget of {budget} paths")]
    BudgetExceeded { budget: usize },
}

/// Identifier of one of the seven reduction rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Sr,
    Ss,
    Tr,
    Tsr,
    Trr,
    Tlr,
    Tt,
}

impl RuleId {
    /// All rules in matching priority order.
    pub const ALL: [RuleId; 7] = [
        RuleId::Sr,
        RuleId::Ss,
        RuleId::Tr,
        RuleId::Tsr,
        RuleId::Trr,
        RuleId::Tlr,
        RuleId::Tt,
    ];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleId::Sr => "sr",
            RuleId::Ss => "ss",
            RuleId::Tr => "tr",
            RuleId::Tsr => "tsr",
            RuleId::Trr => "trr",
            RuleId::Tlr => "tlr",
            RuleId::Tt => "tt",
        };
        write!(f, "{s}")
    }
}

impl FromStr for RuleId {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "sr" => Ok(RuleId::Sr),
            "ss" => Ok(RuleId::Ss),
            "tr" => Ok(RuleId::Tr),
            "tsr" => Ok(RuleId::Tsr),
            "trr" => Ok(RuleId::Trr),
            "tlr" => Ok(RuleId::Tlr),
            "tt" => Ok(RuleId::Tt),
            _ => Err(()),
        }
    }
}

/// Rewritable children of a path node. Rule steps are snapshots, not
/// rewrite positions, so they are leaves here (as are basic steps).
fn children(p: &Path) -> Vec<&Path> {
    match p {
        Path::Sigma(inner) => vec![inner],
        Path::Tau(l, r) => vec![l, r],
        Path::Xi { body, .. } => vec![body],
        Path::Mu { arg, .. } => vec![arg],
        Path::Nu { fun, .. } => vec![fun],
        _ => vec![],
    }
}

/// The subpath at a tree address, if the address is valid.
pub fn subpath<'a>(p: &'a Path, at: &[usize]) -> Option<&'a Path> {
    let mut cur = p;
    for &i in at {
        cur = *children(cur).get(i)?;
    }
    Some(cur)
}

fn replace_subpath(p: &Path, at: &[usize], new: Path) -> Option<Path> {
    match at.split_first() {
        None => Some(new),
        Some((&i, rest)) => {
            let mut out = p.clone();
            match (&mut out, i) {
                (Path::Sigma(inner), 0) => **inner = replace_subpath(inner, rest, new)?,
                (Path::Tau(l, _), 0) => **l = replace_subpath(l, rest, new)?,
                (Path::Tau(_, r), 1) => **r = replace_subpath(r, rest, new)?,
                (Path::Xi { body, .. }, 0) => **body = replace_subpath(body, rest, new)?,
                (Path::Mu { arg, .. }, 0) => **arg = replace_subpath(arg, rest, new)?,
                (Path::Nu { fun, .. }, 0) => **fun = replace_subpath(fun, rest, new)?,
                _ => return None,
            }
            Some(out)
        }
    }
}

/// Number of path nodes (rule steps and basic steps count as one node).
pub fn node_count(p: &Path) -> usize {
    1 + children(p).iter().map(|c| node_count(c)).sum::<usize>()
}

/// All tree addresses of `p` in leftmost-innermost (post-order) order.
pub fn positions_innermost(p: &Path) -> Vec<Vec<usize>> {
    fn go(p: &Path, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for (i, c) in children(p).into_iter().enumerate() {
            prefix.push(i);
            go(c, prefix, out);
            prefix.pop();
        }
        out.push(prefix.clone());
    }
    let mut out = Vec::new();
    go(p, &mut Vec::new(), &mut out);
    out
}

fn rule_matches(rule: RuleId, node: &Path) -> bool {
    match rule {
        RuleId::Sr => matches!(node, Path::Sigma(inner) if matches!(**inner, Path::Rho(_))),
        RuleId::Ss => matches!(node, Path::Sigma(inner) if matches!(**inner, Path::Sigma(_))),
        RuleId::Tr => match node {
            Path::Tau(l, r) => matches!(&**r, Path::Sigma(inner) if **inner == **l),
            _ => false,
        },
        RuleId::Tsr => match node {
            Path::Tau(l, r) => matches!(&**l, Path::Sigma(inner) if **inner == **r),
            _ => false,
        },
        RuleId::Trr => matches!(node, Path::Tau(_, r) if matches!(**r, Path::Rho(_))),
        RuleId::Tlr => matches!(node, Path::Tau(l, _) if matches!(**l, Path::Rho(_))),
        RuleId::Tt => matches!(node, Path::Tau(l, _) if matches!(**l, Path::Tau(..))),
    }
}

/// Every rule whose left-hand schema matches the node at `at`, in priority
/// order. Several rules can overlap on one node (e.g. `tau(rho, rho)`).
pub fn matching_rules(p: &Path, at: &[usize]) -> Vec<RuleId> {
    match subpath(p, at) {
        None => vec![],
        Some(node) => RuleId::ALL
            .into_iter()
            .filter(|r| rule_matches(*r, node))
            .collect(),
    }
}

/// The first rule (in the fixed priority order sr, ss, tr, tsr, trr, tlr,
/// tt) whose schema matches at `at`.
pub fn match_rule(p: &Path, at: &[usize]) -> Option<RuleId> {
    matching_rules(p, at).into_iter().next()
}

fn rule_rhs(rule: RuleId, node: &Path) -> Path {
    match (rule, node) {
        (RuleId::Sr, Path::Sigma(inner)) => (**inner).clone(),
        (RuleId::Ss, Path::Sigma(inner)) => match &**inner {
            Path::Sigma(r) => (**r).clone(),
            _ => unreachable!(),
        },
        (RuleId::Tr, Path::Tau(l, _)) => Path::Rho(l.source()),
        (RuleId::Tsr, Path::Tau(_, r)) => Path::Rho(r.target()),
        (RuleId::Trr, Path::Tau(l, _)) => (**l).clone(),
        (RuleId::Tlr, Path::Tau(_, r)) => (**r).clone(),
        (RuleId::Tt, Path::Tau(l, s)) => match &**l {
            Path::Tau(t, r) => Path::Tau(
                t.clone(),
                Box::new(Path::Tau(r.clone(), s.clone())),
            ),
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

/// Replace the subnode at `at` by the right-hand side of `rule`. Endpoints
/// of the whole path are preserved.
pub fn apply_rule(p: &Path, at: &[usize], rule: RuleId) -> Result<Path, RewriteError> {
    let node = subpath(p, at).ok_or_else(|| RewriteError::RuleNotApplicable {
        rule,
        position: at.to_vec(),
    })?;
    if !rule_matches(rule, node) {
        return Err(RewriteError::RuleNotApplicable {
            rule,
            position: at.to_vec(),
        });
    }
    let rhs = rule_rhs(rule, node);
    Ok(replace_subpath(p, at, rhs).expect("address validated above"))
}

/// Check that `to` is obtained from `from` by one application of `rule`.
pub fn validate_rule_step(rule: RuleId, from: &Path, to: &Path) -> bool {
    positions_innermost(from).iter().any(|pos| {
        matching_rules(from, pos).contains(&rule)
            && apply_rule(from, pos, rule).is_ok_and(|r| r == *to)
    })
}

/// Lexicographic termination measure: every rule application strictly
/// decreases it. The seven size-reducing rules drop the first component;
/// `tt` keeps it and drops the τ-left-weight component.
pub fn measure(p: &Path) -> (usize, usize) {
    fn tau_left_weight(p: &Path) -> usize {
        let own = match p {
            Path::Tau(l, _) => node_count(l),
            _ => 0,
        };
        own + children(p).iter().map(|c| tau_left_weight(c)).sum::<usize>()
    }
    (node_count(p), tau_left_weight(p))
}

/// One recorded rewrite: whole-path snapshots before and after applying
/// `rule` at `position`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: RuleId,
    pub position: Vec<usize>,
    pub before: Path,
    pub after: Path,
}

/// A full normalization history, interpretable as a path one level up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub initial: Path,
    pub steps: Vec<RewriteStep>,
}

impl Trace {
    pub fn final_path(&self) -> &Path {
        self.steps.last().map(|s| &s.after).unwrap_or(&self.initial)
    }

    /// Consecutive snapshots must chain.
    pub fn is_valid(&self) -> bool {
        let mut cur = &self.initial;
        for step in &self.steps {
            if step.before != *cur {
                return false;
            }
            cur = &step.after;
        }
        true
    }

    /// The trace as a level-(n+1) path: rule steps composed with τ, or ρ
    /// of the initial path for an empty trace.
    pub fn as_path(&self) -> Path {
        let mut steps = self.steps.iter().map(|s| Path::RuleStep {
            rule: s.rule,
            from: Box::new(s.before.clone()),
            to: Box::new(s.after.clone()),
        });
        match steps.next() {
            None => Path::Rho(Endpoint::path(self.initial.clone())),
            Some(first) => steps.fold(first, |acc, step| {
                Path::Tau(Box::new(acc), Box::new(step))
            }),
        }
    }
}

/// Deterministic normalization: repeatedly apply the first matching rule
/// in leftmost-innermost position order with the fixed rule priority,
/// until no rule matches.
pub fn normalize_path(p: &Path) -> (Path, Trace) {
    let mut cur = p.clone();
    let mut steps = Vec::new();
    loop {
        let redex = positions_innermost(&cur)
            .into_iter()
            .find_map(|pos| match_rule(&cur, &pos).map(|rule| (pos, rule)));
        match redex {
            None => break,
            Some((pos, rule)) => {
                let after = apply_rule(&cur, &pos, rule).expect("matched above");
                steps.push(RewriteStep {
                    rule,
                    position: pos,
                    before: cur.clone(),
                    after: after.clone(),
                });
                cur = after;
            }
        }
    }
    let trace = Trace {
        initial: p.clone(),
        steps,
    };
    (cur, trace)
}

/// A subject none of whose reducts reach a common normal form, with the
/// full set of distinct normal forms as witnesses.
#[derive(Debug, Clone)]
pub struct Divergence {
    pub subject: Path,
    pub normal_forms: Vec<Path>,
}

#[derive(Debug, Clone)]
pub struct JoinabilityReport {
    pub atom_count: usize,
    pub max_nodes: usize,
    pub paths_enumerated: usize,
    pub divergent: Vec<Divergence>,
}

impl JoinabilityReport {
    pub fn all_joinable(&self) -> bool {
        self.divergent.is_empty()
    }
}

/// Enumerate every well-formed path built from ρ, σ, τ and `atom_count`
/// atoms arranged in a composable chain `x0 -> x1 -> ...`, up to
/// `max_nodes` nodes.
pub fn enumerate_chain_paths(atom_count: usize, max_nodes: usize) -> Vec<Path> {
    let terms: Vec<Term> = (0..=atom_count).map(|i| Term::var(format!("x{i}"))).collect();
    // by_size[n] maps (source index, target index) to the paths of that size.
    let mut by_size: Vec<HashMap<(usize, usize), Vec<Path>>> = vec![HashMap::new(); max_nodes + 1];
    if max_nodes >= 1 {
        for (i, t) in terms.iter().enumerate() {
            by_size[1]
                .entry((i, i))
                .or_default()
                .push(Path::Rho(Endpoint::Term(t.clone())));
        }
        for i in 0..atom_count {
            by_size[1].entry((i, i + 1)).or_default().push(Path::atom(
                format!("p{}", i + 1),
                terms[i].clone(),
                terms[i + 1].clone(),
            ));
        }
    }
    for size in 2..=max_nodes {
        let mut level: HashMap<(usize, usize), Vec<Path>> = HashMap::new();
        for (&(s, t), paths) in &by_size[size - 1] {
            for p in paths {
                level
                    .entry((t, s))
                    .or_default()
                    .push(Path::Sigma(Box::new(p.clone())));
            }
        }
        for left_size in 1..size - 1 {
            let right_size = size - 1 - left_size;
            let rights = by_size[right_size].clone();
            for (&(ls, lt), lefts) in &by_size[left_size] {
                for (&(rs, rt), rpaths) in &rights {
                    if lt != rs {
                        continue;
                    }
                    for l in lefts {
                        for r in rpaths {
                            level.entry((ls, rt)).or_default().push(Path::Tau(
                                Box::new(l.clone()),
                                Box::new(r.clone()),
                            ));
                        }
                    }
                }
            }
        }
        by_size[size] = level;
    }
    by_size
        .into_iter()
        .flat_map(|level| level.into_values().flatten())
        .collect()
}

/// All normal forms reachable from `p` by any reduction sequence.
fn all_normal_forms(
    p: &Path,
    memo: &mut HashMap<Path, BTreeSet<String>>,
    store: &mut HashMap<String, Path>,
    visited_budget: &mut usize,
) -> Result<BTreeSet<String>, RewriteError> {
    if let Some(nfs) = memo.get(p) {
        return Ok(nfs.clone());
    }
    if *visited_budget == 0 {
        return Err(RewriteError::BudgetExceeded { budget: 0 });
    }
    *visited_budget -= 1;
    let mut reducts = Vec::new();
    for pos in positions_innermost(p) {
        for rule in matching_rules(p, &pos) {
            reducts.push(apply_rule(p, &pos, rule).expect("rule matched"));
        }
    }
    let nfs = if reducts.is_empty() {
        let key = p.to_string();
        store.entry(key.clone()).or_insert_with(|| p.clone());
        BTreeSet::from([key])
    } else {
        let mut acc = BTreeSet::new();
        for q in reducts {
            acc.extend(all_normal_forms(&q, memo, store, visited_budget)?);
        }
        acc
    };
    memo.insert(p.clone(), nfs.clone());
    Ok(nfs)
}

/// Exhaustive joinability check over small path instances: enumerates
/// every chain path, explores all reduction sequences, and reports every
/// subject with more than one reachable normal form.
pub fn joinability_harness(
    atom_count: usize,
    max_nodes: usize,
    budget: usize,
) -> Result<JoinabilityReport, RewriteError> {
    assert!(atom_count <= 3, "harness is desk-scale: atom_count <= 3");
    assert!(max_nodes <= 9, "harness is desk-scale: max_nodes <= 9");
    let subjects = enumerate_chain_paths(atom_count, max_nodes);
    if subjects.len() > budget {
        return Err(RewriteError::BudgetExceeded { budget });
    }
    let mut memo = HashMap::new();
    let mut store = HashMap::new();
    let mut remaining = budget;
    let mut divergent = Vec::new();
    for subject in &subjects {
        let nfs = all_normal_forms(subject, &mut memo, &mut store, &mut remaining)
            .map_err(|_| RewriteError::BudgetExceeded { budget })?;
        if nfs.len() > 1 {
            divergent.push(Divergence {
                subject: subject.clone(),
                normal_forms: nfs.iter().map(|k| store[k].clone()).collect(),
            });
        }
    }
    Ok(JoinabilityReport {
        atom_count,
        max_nodes,
        paths_enumerated: subjects.len(),
        divergent,
    })
}
