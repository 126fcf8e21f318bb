//! Command-line front end: parsing, path search, path normalization,
//! derivation checking, groupoid verification, globular towers and the
//! joinability harness.

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use compath::deriv::{parse_derivation, DerivError};
use compath::groupoid::{self, LawName};
use compath::kernel;
use compath::parse::{parse_path, parse_term};
use compath::path::find_betaeta_path;
use compath::rewrite::{joinability_harness, normalize_path};
use compath::{Path, TermError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ParseKind {
    Term,
    Path,
}

#[derive(Parser)]
#[command(name = "compath", about = "Computational paths: equality proofs between λ-terms")]
struct Cli {
    /// Output format: human text or line-delimited JSON records.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term or path and print its canonical form.
    Parse {
        #[arg(long, value_enum, default_value_t = ParseKind::Term)]
        kind: ParseKind,
        input: String,
    },
    /// Find a path between two βη-equal terms.
    Path {
        lhs: String,
        rhs: String,
        /// Reduction-step budget per term.
        #[arg(long, default_value_t = 1000)]
        fuel: usize,
    },
    /// Normalize a path under the seven rewrite rules and print the trace.
    NormalizePath { input: String },
    /// Check a derivation file and print the validated judgment.
    Check { file: String },
    /// Verify the six groupoid laws over fresh composable atoms.
    Groupoid,
    /// Run the randomized globular-tower property.
    Globular {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        /// Maximum tower depth, counting the base term pair.
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Exhaustively check joinability of small paths and report
    /// divergences.
    Joinability {
        #[arg(long, default_value_t = 2)]
        atoms: usize,
        #[arg(long, default_value_t = 6)]
        max_nodes: usize,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
    },
}

/// Exit 1: well-formed input, negative outcome.
struct DomainFailure(String);

/// Exit 2: unparseable or unusable input.
struct UsageFailure(String);

enum Failure {
    Domain(DomainFailure),
    Usage(UsageFailure),
}

impl From<DomainFailure> for Failure {
    fn from(e: DomainFailure) -> Failure {
        Failure::Domain(e)
    }
}

impl From<UsageFailure> for Failure {
    fn from(e: UsageFailure) -> Failure {
        Failure::Usage(e)
    }
}

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(UsageFailure(e.to_string()))
}

fn domain(e: impl fmt::Display) -> Failure {
    Failure::Domain(DomainFailure(e.to_string()))
}

fn count_basic_steps(p: &Path) -> usize {
    match p {
        Path::BetaStep { .. } | Path::EtaStep { .. } => 1,
        Path::Sigma(inner) => count_basic_steps(inner),
        Path::Tau(l, r) => count_basic_steps(l) + count_basic_steps(r),
        Path::Xi { body, .. } => count_basic_steps(body),
        Path::Mu { arg, .. } => count_basic_steps(arg),
        Path::Nu { fun, .. } => count_basic_steps(fun),
        Path::RuleStep { from, to, .. } => count_basic_steps(from) + count_basic_steps(to),
        _ => 0,
    }
}

fn count_tau_nodes(p: &Path) -> usize {
    match p {
        Path::Tau(l, r) => 1 + count_tau_nodes(l) + count_tau_nodes(r),
        Path::Sigma(inner) => count_tau_nodes(inner),
        Path::Xi { body, .. } => count_tau_nodes(body),
        Path::Mu { arg, .. } => count_tau_nodes(arg),
        Path::Nu { fun, .. } => count_tau_nodes(fun),
        Path::RuleStep { from, to, .. } => count_tau_nodes(from) + count_tau_nodes(to),
        _ => 0,
    }
}

fn emit(format: Format, text: String, record: serde_json::Value) {
    match format {
        Format::Text => println!("{text}"),
        Format::Records => println!("{record}"),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let format = cli.format;
    match cli.command {
        Command::Parse { kind, input } => {
            match kind {
                ParseKind::Term => {
                    let t = parse_term(&input).map_err(usage)?;
                    emit(
                        format,
                        t.to_string(),
                        json!({"kind": "term", "parsed": t.to_string()}),
                    );
                }
                ParseKind::Path => {
                    let p = parse_path(&input).map_err(usage)?;
                    emit(
                        format,
                        p.to_string(),
                        json!({
                            "kind": "path",
                            "parsed": p.to_string(),
                            "source": p.source().to_string(),
                            "target": p.target().to_string(),
                            "level": p.level(),
                        }),
                    );
                }
            }
            Ok(())
        }
        Command::Path { lhs, rhs, fuel } => {
            let m = parse_term(&lhs).map_err(usage)?;
            let n = parse_term(&rhs).map_err(usage)?;
            let found = match find_betaeta_path(&m, &n, fuel) {
                Ok(found) => found,
                Err(compath::PathError::Term(TermError::FuelExhausted { .. })) => None,
                Err(e) => return Err(domain(e)),
            };
            match found {
                Some(p) => {
                    emit(
                        format,
                        format!(
                            "{p}\nbasic steps: {}, tau nodes: {}",
                            count_basic_steps(&p),
                            count_tau_nodes(&p)
                        ),
                        json!({
                            "joinable": true,
                            "path": p.to_string(),
                            "basic_steps": count_basic_steps(&p),
                            "tau_nodes": count_tau_nodes(&p),
                        }),
                    );
                    Ok(())
                }
                None => {
                    emit(
                        format,
                        "not joinable within fuel".into(),
                        json!({"joinable": false, "fuel": fuel}),
                    );
                    Err(domain("not joinable within fuel"))
                }
            }
        }
        Command::NormalizePath { input } => {
            let p = parse_path(&input).map_err(usage)?;
            let (nf, trace) = normalize_path(&p);
            match format {
                Format::Text => {
                    println!("normal form: {nf}");
                    println!("steps: {}", trace.steps.len());
                    for step in &trace.steps {
                        println!(
                            "  {} at {:?}: {} => {}",
                            step.rule, step.position, step.before, step.after
                        );
                    }
                }
                Format::Records => {
                    println!("{}", json!({"initial": p.to_string()}));
                    for step in &trace.steps {
                        println!(
                            "{}",
                            json!({
                                "rule": step.rule.to_string(),
                                "position": step.position,
                                "before": step.before.to_string(),
                                "after": step.after.to_string(),
                            })
                        );
                    }
                    println!("{}", json!({"final": nf.to_string()}));
                }
            }
            Ok(())
        }
        Command::Check { file } => {
            let src = std::fs::read_to_string(&file)
                .map_err(|e| usage(format!("cannot read {file}: {e}")))?;
            let d = match parse_derivation(&src) {
                Ok(d) => d,
                Err(e @ (DerivError::Syntax { .. } | DerivError::Path(_))) => {
                    return Err(usage(e))
                }
            };
            match kernel::check(&d) {
                Ok(j) => {
                    emit(
                        format,
                        format!("checked: {j}"),
                        json!({"checked": true, "judgment": j.to_string()}),
                    );
                    Ok(())
                }
                Err(e) => {
                    emit(
                        format,
                        format!("rejected: {e}"),
                        json!({"checked": false, "error": e.to_string()}),
                    );
                    Err(domain(e))
                }
            }
        }
        Command::Groupoid => {
            for name in LawName::ALL {
                let law = groupoid::instantiate(name);
                let w = groupoid::verify_law(&law).map_err(domain)?;
                emit(
                    format,
                    format!(
                        "{name}: {} = {}\n  normal form: {}\n  witness: {}\n  inhabits: {}",
                        w.lhs, w.rhs, w.normal_form, w.witness, w.judgment
                    ),
                    json!({
                        "law": name.to_string(),
                        "lhs": w.lhs.to_string(),
                        "rhs": w.rhs.to_string(),
                        "normal_form": w.normal_form.to_string(),
                        "witness": w.witness.to_string(),
                        "judgment": w.judgment.to_string(),
                    }),
                );
            }
            Ok(())
        }
        Command::Globular { seed, count, depth } => {
            if !(2..=4).contains(&depth) {
                return Err(usage("depth must be between 2 and 4"));
            }
            let mut failures = 0u64;
            for i in 0..count {
                let tower = groupoid::random_tower(seed.wrapping_add(i), depth);
                match groupoid::globular_check(&tower) {
                    Ok(true) => {}
                    Ok(false) => failures += 1,
                    Err(e) => return Err(domain(e)),
                }
            }
            emit(
                format,
                format!("towers: {count}, depth: {depth}, failures: {failures}"),
                json!({"towers": count, "depth": depth, "failures": failures}),
            );
            if failures > 0 {
                return Err(domain(format!("{failures} towers failed")));
            }
            Ok(())
        }
        Command::Joinability {
            atoms,
            max_nodes,
            budget,
        } => {
            if atoms > 3 || max_nodes > 9 {
                return Err(usage("harness is desk-scale: atoms <= 3, max-nodes <= 9"));
            }
            let report = joinability_harness(atoms, max_nodes, budget).map_err(domain)?;
            match format {
                Format::Text => {
                    println!(
                        "paths enumerated: {} (atoms: {}, max nodes: {})",
                        report.paths_enumerated, report.atom_count, report.max_nodes
                    );
                    if report.all_joinable() {
                        println!("all subjects joinable");
                    } else {
                        println!("divergent subjects: {}", report.divergent.len());
                        for d in &report.divergent {
                            let nfs: Vec<String> =
                                d.normal_forms.iter().map(Path::to_string).collect();
                            println!("  {} => {{{}}}", d.subject, nfs.join(", "));
                        }
                    }
                }
                Format::Records => {
                    println!(
                        "{}",
                        json!({
                            "paths_enumerated": report.paths_enumerated,
                            "atoms": report.atom_count,
                            "max_nodes": report.max_nodes,
                            "divergent_count": report.divergent.len(),
                        })
                    );
                    for d in &report.divergent {
                        let nfs: Vec<String> =
                            d.normal_forms.iter().map(Path::to_string).collect();
                        println!(
                            "{}",
                            json!({"subject": d.subject.to_string(), "normal_forms": nfs})
                        );
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(DomainFailure(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(UsageFailure(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
