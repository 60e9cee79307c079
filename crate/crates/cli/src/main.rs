//! pentaforge: generate, check, classify, build k-expressions for, and color
//! the structured graph families.
//!
//! Exit codes: 0 success / positive result, 1 negative result (not in class,
//! simplicial vertex, verification failure, not k-colorable), 2 input error,
//! 3 internal contradiction.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pentaforge_core::cliquewidth::{eval_matches, expr_for_certificate, to_text, width};
use pentaforge_core::coloring::{chromatic_structured, ColoringError};
use pentaforge_core::families::{random_member_with, FamilyError, FamilyTag};
use pentaforge_core::graph::Graph;
use pentaforge_core::patterns::forbidden_profile;
use pentaforge_core::recognizer::{
    classify, verify_certificate_detailed, ClassifyOutcome, RecognizerError,
};
use pentaforge_core::Certificate;

#[derive(Parser)]
#[command(
    name = "pentaforge",
    version,
    about = "structured graph families: generation, recognition, clique-width, coloring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a family member (graph file plus certificate JSON)
    Gen(GenArgs),
    /// Forbidden-pattern profile and simplicial/universal report
    Check(PathArgs),
    /// Structural classification with a verifiable certificate
    Classify(PathArgs),
    /// Bounded-width k-expression for a class member
    Cwd(PathArgs),
    /// Exact chromatic number (or k-colorability with --k)
    Color(ColorArgs),
    /// Check a certificate against a graph
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// pentagon | basket | villa | mansion | crown | ring | hyperhole |
    /// thicken | base:<name>
    family: String,
    /// Size budget (vertex count cap)
    #[arg(long, default_value_t = 16)]
    budget: usize,
    /// RNG seed; falls back to PENTAFORGE_SEED
    #[arg(long)]
    seed: Option<u64>,
    /// Size parameter: t for pentagon/villa/mansion, k for ring/hyperhole
    #[arg(long)]
    t: Option<usize>,
    /// Number of instances (JSON lines on stdout)
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Output graph file (certificate goes to <stem>.cert.json)
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Also write a DOT rendering
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct PathArgs {
    /// Graph file (text `p`/`e` format, or JSON)
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ColorArgs {
    path: PathBuf,
    /// Decision mode: is the graph k-colorable?
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    certificate: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Check(args) => cmd_check(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Cwd(args) => cmd_cwd(args),
        Command::Color(args) => cmd_color(args),
        Command::Verify(args) => cmd_verify(args),
    };
    ExitCode::from(code)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

fn read_graph(path: &Path) -> Result<Graph, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let parsed = if text.trim_start().starts_with('{') {
        Graph::from_json(&text)
    } else {
        Graph::from_text(&text)
    };
    parsed.map_err(|e| format!("{}: {e}", path.display()))
}

fn resolve_seed(seed: Option<u64>) -> Result<u64, String> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var("PENTAFORGE_SEED") {
        Ok(v) => v
            .parse()
            .map_err(|_| format!("PENTAFORGE_SEED is not a valid seed: '{v}'")),
        Err(_) => Err("a seed is required: pass --seed or set PENTAFORGE_SEED".into()),
    }
}

fn family_error_code(e: &FamilyError) -> u8 {
    match e {
        FamilyError::PostCheck(_) => EXIT_INTERNAL,
        _ => EXIT_INPUT,
    }
}

fn cmd_gen(args: GenArgs) -> u8 {
    let Some(tag) = FamilyTag::parse(&args.family) else {
        return fail(
            EXIT_INPUT,
            format!(
                "unknown family '{}'; expected pentagon, basket, villa, mansion, crown, ring, hyperhole, thicken, or base:<name>",
                args.family
            ),
        );
    };
    let seed = match resolve_seed(args.seed) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    if args.count == 0 {
        return fail(EXIT_INPUT, "--count must be at least 1");
    }
    if args.count > 1 && (args.out.is_some() || args.dot.is_some()) {
        return fail(
            EXIT_INPUT,
            "--count > 1 writes JSON lines to stdout; drop -o/--dot",
        );
    }
    for i in 0..args.count {
        let instance_seed = seed.wrapping_add(i as u64);
        let (g, cert) = match random_member_with(&tag, args.budget, instance_seed, args.t) {
            Ok(out) => out,
            Err(e) => return fail(family_error_code(&e), e),
        };
        if let Some(out) = &args.out {
            if let Err(e) = fs::write(out, g.to_text()) {
                return fail(EXIT_INPUT, format!("{}: {e}", out.display()));
            }
            if let Some(cert) = &cert {
                let cert_path = out.with_extension("cert.json");
                if let Err(e) = fs::write(&cert_path, cert.to_json() + "\n") {
                    return fail(EXIT_INPUT, format!("{}: {e}", cert_path.display()));
                }
            }
            if let Some(dot) = &args.dot {
                if let Err(e) = fs::write(dot, g.to_dot()) {
                    return fail(EXIT_INPUT, format!("{}: {e}", dot.display()));
                }
            }
            println!(
                "{}",
                json!({
                    "seed": instance_seed,
                    "family": args.family,
                    "n": g.n(),
                    "edges": g.edge_count(),
                    "graph_file": out.display().to_string(),
                })
            );
        } else {
            match args.format {
                Format::Json => {
                    let cert_value: Value = match &cert {
                        Some(c) => serde_json::from_str(&c.to_json()).unwrap(),
                        None => Value::Null,
                    };
                    println!(
                        "{}",
                        json!({
                            "seed": instance_seed,
                            "family": args.family,
                            "graph": serde_json::from_str::<Value>(&g.to_json()).unwrap(),
                            "certificate": cert_value,
                        })
                    );
                }
                Format::Text => {
                    print!("# seed {instance_seed}\n{}", g.to_text());
                    if let Some(c) = &cert {
                        println!("# certificate: {}", c.to_json());
                    }
                }
            }
        }
    }
    EXIT_OK
}

fn cmd_check(args: PathArgs) -> u8 {
    let g = match read_graph(&args.path) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let profile = forbidden_profile(&g);
    let simplicial = g.simplicial_vertices().to_vec();
    let universal = g.universal_vertices().to_vec();
    match args.format {
        Format::Json => {
            let mut v: Value = serde_json::from_str(&profile.to_json()).unwrap();
            v["simplicial"] = json!(simplicial);
            v["universal"] = json!(universal);
            println!("{v}");
        }
        Format::Text => {
            println!("in_class: {}", profile.in_class);
            println!("in_class_57: {}", profile.in_class_57);
            for (p, e) in &profile.witnesses {
                match e {
                    Some(emb) => println!("{}: {:?}", p.name(), emb.map),
                    None => println!("{}: absent", p.name()),
                }
            }
            println!("simplicial: {simplicial:?}");
            println!("universal: {universal:?}");
        }
    }
    if profile.in_class {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

fn cmd_classify(args: PathArgs) -> u8 {
    let g = match read_graph(&args.path) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    match classify(&g) {
        Ok(ClassifyOutcome::InClassNoSimplicial(cert)) => {
            match args.format {
                Format::Json => println!(
                    "{}",
                    json!({
                        "outcome": "certificate",
                        "certificate": serde_json::from_str::<Value>(&cert.to_json()).unwrap(),
                    })
                ),
                Format::Text => println!("certificate ({}): {}", cert.core_kind(), cert.to_json()),
            }
            EXIT_OK
        }
        Ok(ClassifyOutcome::HasSimplicial(v)) => {
            match args.format {
                Format::Json => println!("{}", json!({"outcome": "has_simplicial", "vertex": v})),
                Format::Text => println!("in class, simplicial vertex {v}"),
            }
            EXIT_NEGATIVE
        }
        Ok(ClassifyOutcome::NotInClass { pattern, witness }) => {
            match args.format {
                Format::Json => println!(
                    "{}",
                    json!({
                        "outcome": "not_in_class",
                        "pattern": pattern.name(),
                        "witness": witness.map,
                    })
                ),
                Format::Text => {
                    println!(
                        "not in class: induced {} at {:?}",
                        pattern.name(),
                        witness.map
                    )
                }
            }
            EXIT_NEGATIVE
        }
        Err(e @ RecognizerError::Internal(_)) => fail(EXIT_INTERNAL, e),
    }
}

fn cmd_cwd(args: PathArgs) -> u8 {
    let g = match read_graph(&args.path) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let cert = match classify(&g) {
        Ok(ClassifyOutcome::InClassNoSimplicial(cert)) => cert,
        Ok(ClassifyOutcome::HasSimplicial(v)) => {
            return fail(
                EXIT_NEGATIVE,
                format!("no expression: graph has a simplicial vertex ({v})"),
            )
        }
        Ok(ClassifyOutcome::NotInClass { pattern, .. }) => {
            return fail(
                EXIT_NEGATIVE,
                format!(
                    "no expression: graph is not in the class (induced {})",
                    pattern.name()
                ),
            )
        }
        Err(e) => return fail(EXIT_INTERNAL, e),
    };
    let e = match expr_for_certificate(&g, &cert) {
        Ok(e) => e,
        Err(e) => return fail(EXIT_INTERNAL, e),
    };
    let verified = eval_matches(&g, &e);
    let text = to_text(&e);
    match args.format {
        Format::Json => println!(
            "{}",
            json!({"width": width(&e), "expr": text, "verified": verified})
        ),
        Format::Text => {
            println!("width: {}", width(&e));
            println!("verified: {verified}");
            println!("{text}");
        }
    }
    if verified {
        EXIT_OK
    } else {
        fail(
            EXIT_INTERNAL,
            "expression does not evaluate back to the input",
        )
    }
}

fn cmd_color(args: ColorArgs) -> u8 {
    let g = match read_graph(&args.path) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let result = match chromatic_structured(&g) {
        Ok(r) => r,
        Err(e @ ColoringError::NotInClass { .. }) => return fail(EXIT_NEGATIVE, e),
        Err(e) => return fail(EXIT_INTERNAL, e),
    };
    match args.k {
        Some(k) => {
            let colorable = result.chi <= k;
            match args.format {
                Format::Json => {
                    let assignment: Value = if colorable {
                        assignment_json(&result.assignment)
                    } else {
                        Value::Null
                    };
                    println!(
                        "{}",
                        json!({"k": k, "colorable": colorable, "chi": result.chi, "assignment": assignment})
                    );
                }
                Format::Text => println!("{k}-colorable: {colorable} (chi = {})", result.chi),
            }
            if colorable {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            }
        }
        None => {
            match args.format {
                Format::Json => println!(
                    "{}",
                    json!({"chi": result.chi, "assignment": assignment_json(&result.assignment)})
                ),
                Format::Text => {
                    println!("chi: {}", result.chi);
                    println!("assignment: {:?}", result.assignment);
                }
            }
            EXIT_OK
        }
    }
}

fn assignment_json(assignment: &[usize]) -> Value {
    let map: serde_json::Map<String, Value> = assignment
        .iter()
        .enumerate()
        .map(|(v, &c)| (v.to_string(), json!(c)))
        .collect();
    Value::Object(map)
}

fn cmd_verify(args: VerifyArgs) -> u8 {
    let g = match read_graph(&args.graph) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let cert_text = match fs::read_to_string(&args.certificate) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", args.certificate.display())),
    };
    let cert = match Certificate::from_json(&cert_text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", args.certificate.display())),
    };
    let fails = verify_certificate_detailed(&g, &cert);
    let ok = fails.is_empty();
    match args.format {
        Format::Json => println!("{}", json!({"verified": ok, "failures": fails})),
        Format::Text => {
            println!("verified: {ok}");
            for f in &fails {
                println!("failed clause: {f}");
            }
        }
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}
