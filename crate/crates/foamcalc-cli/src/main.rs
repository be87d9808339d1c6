//! Batch front end: evaluate pre-foams, survey the flat evaluation, count
//! Tait colorings, compute quantum dimensions, Gram matrices, state-space
//! ranks, the relation suite, and the four-periodic square.
//!
//! Exit codes: 0 success, 1 mathematical-consistency failure, 2 input
//! error.

use clap::{Parser, Subcommand};
use foamcalc_core::eval::relations::{check_all_relations, check_local_relation, RelationName};
use foamcalc_core::eval::{eval_closed_decorated, eval_closed_threads};
use foamcalc_core::foamspace::linalg::{
    gram_rank, normalize_entries, smith_invariant_factors, square_complex_check, NormMatrix,
};
use foamcalc_core::foamspace::spaces::{generators, gram_matrix, qdim};
use foamcalc_core::jflat::{jflat_survey, JflatOutcome, Strategy};
use foamcalc_core::json;
use foamcalc_core::prefoam::{catalog, PreFoam};
use foamcalc_core::ring::{apply_to_poly, apply_to_rd, BaseChange};
use foamcalc_core::web::Web;
use serde::Deserialize;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "foamcalc", version, about = "Exact evaluation of SL(3) pre-foams over GF(2)")]
struct Cli {
    /// Worker threads for coloring sums (default: FOAMCALC_THREADS or 1).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed pre-foam (prefoam-v1).
    Eval {
        input: PathBuf,
        /// Base change: R, k, psi:a,b,c, psi-loc:a,b,c, phi, locD.
        #[arg(long, default_value = "R")]
        base: String,
    },
    /// Run the flat evaluation over every perfect matching.
    Jflat {
        input: PathBuf,
        /// Explore recursive cancellation through freshly created edges.
        #[arg(long)]
        recursive: bool,
    },
    /// Count (or list) the Tait colorings of a web (web-v1).
    Tait {
        input: PathBuf,
        #[arg(long)]
        list: bool,
    },
    /// Graded dimension of the state space over the ground field.
    Qdim { input: PathBuf },
    /// Rank of the Gram matrix over the fraction field of the target,
    /// compared with the Tait count.
    Rank {
        input: PathBuf,
        #[arg(long, default_value = "psi-loc:0,0,1")]
        base: String,
        /// Also print Smith invariant factors (one-variable targets).
        #[arg(long)]
        smith: bool,
    },
    /// Print the generator Gram matrix under a base change.
    Gram {
        input: PathBuf,
        #[arg(long, default_value = "k")]
        base: String,
    },
    /// Verify the local-relation suite.
    CheckRelations {
        /// A single relation name; all when omitted.
        relation: Option<String>,
    },
    /// Emit a catalog pre-foam as prefoam-v1 JSON.
    Catalog { name: String, params: Vec<String> },
    /// Build and test the four-periodic complex at a square site
    /// (site-v1: a web plus a designated half-edge).
    Square {
        input: PathBuf,
        #[arg(long, default_value = "psi-loc:0,0,1")]
        base: String,
    },
}

#[derive(Deserialize)]
struct SiteV1 {
    schema: String,
    web: json::WebV1,
    half: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("FOAMCALC_THREADS").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(1)
        .max(1);
    match run(&cli, threads) {
        Ok(code) => code,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
        Err(CliError::Math(msg)) => {
            eprintln!("inconsistency: {}", msg);
            ExitCode::from(1)
        }
    }
}

enum CliError {
    Input(String),
    Math(String),
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn math_err(e: impl std::fmt::Display) -> CliError {
    CliError::Math(e.to_string())
}

fn read_prefoam(path: &PathBuf) -> Result<PreFoam, CliError> {
    let text = std::fs::read_to_string(path).map_err(input_err)?;
    let v: json::PreFoamV1 = serde_json::from_str(&text).map_err(input_err)?;
    let foam = json::prefoam_from_json(&v).map_err(input_err)?;
    let report = foam.validate();
    if !report.ok() {
        return Err(CliError::Input(format!("invalid pre-foam: {}", report)));
    }
    Ok(foam)
}

fn read_web(path: &PathBuf) -> Result<Web, CliError> {
    let text = std::fs::read_to_string(path).map_err(input_err)?;
    let v: json::WebV1 = serde_json::from_str(&text).map_err(input_err)?;
    json::web_from_json(&v).map_err(input_err)
}

fn parse_base(s: &str) -> Result<BaseChange, CliError> {
    BaseChange::parse(s).map_err(CliError::Input)
}

fn run(cli: &Cli, threads: usize) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Eval { input, base } => {
            let foam = read_prefoam(input)?;
            let bc = parse_base(base)?;
            let rendered = if foam.has_decorations() {
                let rd = eval_closed_decorated(&foam).map_err(math_err)?;
                let target = if matches!(bc, BaseChange::Identity) {
                    BaseChange::LocalizeD
                } else {
                    bc
                };
                apply_to_rd(&rd, target).map_err(math_err)?.to_string()
            } else {
                let p = eval_closed_threads(&foam, threads).map_err(math_err)?;
                apply_to_poly(&p, bc).map_err(math_err)?.to_string()
            };
            if cli.json {
                println!("{}", json!({ "value": rendered }));
            } else {
                println!("{}", rendered);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Jflat { input, recursive } => {
            let foam = read_prefoam(input)?;
            let strategy =
                if *recursive { Strategy::Recursive } else { Strategy::PerfectMatching };
            let outcome = jflat_survey(&foam, strategy).map_err(math_err)?;
            if cli.json {
                let (kind, values) = match &outcome {
                    JflatOutcome::WellDefined(v) => ("well-defined", vec![*v as u8]),
                    JflatOutcome::Ambiguous { values, .. } => {
                        ("ambiguous", values.iter().map(|v| *v as u8).collect())
                    }
                };
                println!("{}", json!({ "outcome": kind, "values": values }));
            } else {
                println!("{}", outcome);
                if let JflatOutcome::Ambiguous { witnesses, .. } = &outcome {
                    for (matching, value, trace) in witnesses {
                        let edges: Vec<String> = matching.iter().map(|e| e.to_string()).collect();
                        println!("matching {{{}}} -> {}", edges.join(","), *value as u8);
                        print!("{}", trace);
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Tait { input, list } => {
            let web = read_web(input)?;
            let colorings = web.tait_colorings();
            if cli.json {
                let listed: Vec<serde_json::Value> = if *list {
                    colorings
                        .iter()
                        .map(|t| json!({ "edges": t.edge_colors, "loops": t.loop_colors }))
                        .collect()
                } else {
                    Vec::new()
                };
                println!("{}", json!({ "count": colorings.len(), "colorings": listed }));
            } else {
                println!("{}", colorings.len());
                if *list {
                    for t in &colorings {
                        let edges: Vec<String> =
                            t.edge_colors.iter().map(|(e, c)| format!("{}:{}", e, c)).collect();
                        let loops: Vec<String> =
                            t.loop_colors.iter().map(|c| c.to_string()).collect();
                        println!("edges {{{}}} loops [{}]", edges.join(","), loops.join(","));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Qdim { input } => {
            let web = read_web(input)?;
            let q = qdim(&web).map_err(math_err)?;
            if cli.json {
                println!("{}", json!({ "qdim": q.to_string() }));
            } else {
                println!("{}", q);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rank { input, base, smith } => {
            let web = read_web(input)?;
            let bc = parse_base(base)?;
            let gens = generators(&web).map_err(math_err)?;
            let gram = gram_matrix(&gens, bc).map_err(math_err)?;
            let rank = gram_rank(&gram).map_err(math_err)?;
            let tait = web.tait_count();
            let factors = if *smith {
                match normalize_entries(&gram.entries).map_err(math_err)? {
                    NormMatrix::Poly(m)
                        if !m.is_empty()
                            && matches!(
                                m[0][0].alphabet,
                                foamcalc_core::ring::Alphabet::Single(_)
                            ) =>
                    {
                        Some(
                            smith_invariant_factors(m)
                                .map_err(math_err)?
                                .iter()
                                .map(|f| f.to_string())
                                .collect::<Vec<_>>(),
                        )
                    }
                    _ => None,
                }
            } else {
                None
            };
            if cli.json {
                println!(
                    "{}",
                    json!({ "rank": rank, "tait": tait, "matches": rank == tait,
                            "invariant_factors": factors })
                );
            } else {
                println!("rank {} (Tait count {})", rank, tait);
                if let Some(f) = factors {
                    println!("invariant factors: {}", f.join(" | "));
                }
            }
            if bc.d_localizable() && rank != tait {
                return Err(CliError::Math(format!(
                    "rank {} differs from the Tait count {}",
                    rank, tait
                )));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gram { input, base } => {
            let web = read_web(input)?;
            let bc = parse_base(base)?;
            let gens = generators(&web).map_err(math_err)?;
            let gram = gram_matrix(&gens, bc).map_err(math_err)?;
            if cli.json {
                let rows: Vec<Vec<String>> = gram
                    .entries
                    .iter()
                    .map(|r| r.iter().map(|e| e.to_string()).collect())
                    .collect();
                println!("{}", json!({ "degrees": gram.degrees, "entries": rows }));
            } else {
                println!("{} generators, degrees {:?}", gens.len(), gram.degrees);
                for row in &gram.entries {
                    let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
                    println!("[{}]", cells.join(", "));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckRelations { relation } => {
            let reports = match relation {
                Some(name) => {
                    let r = RelationName::parse(name)
                        .ok_or_else(|| CliError::Input(format!("UnknownRelation: `{}`", name)))?;
                    vec![check_local_relation(r).map_err(math_err)?]
                }
                None => check_all_relations().map_err(math_err)?,
            };
            if cli.json {
                let rows: Vec<serde_json::Value> = reports
                    .iter()
                    .map(|r| json!({ "relation": r.relation.name(), "instances": r.instances }))
                    .collect();
                println!("{}", json!({ "relations": rows }));
            } else {
                for r in &reports {
                    println!("{}", r);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Catalog { name, params } => {
            let foam = catalog::by_name(name, params).map_err(CliError::Input)?;
            let v = json::prefoam_to_json(&foam);
            println!("{}", serde_json::to_string_pretty(&v).map_err(input_err)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Square { input, base } => {
            let text = std::fs::read_to_string(input).map_err(input_err)?;
            let site: SiteV1 = serde_json::from_str(&text).map_err(input_err)?;
            if site.schema != "site-v1" {
                return Err(CliError::Input(format!("SchemaVersionMismatch: `{}`", site.schema)));
            }
            let web = json::web_from_json(&site.web).map_err(input_err)?;
            let bc = parse_base(base)?;
            let report = square_complex_check(&web, site.half, bc).map_err(math_err)?;
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "tait": report.tait,
                        "space_ranks": report.space_ranks,
                        "map_ranks": report.map_ranks,
                        "d_squared_zero": report.d_squared_zero,
                        "exact": report.exact,
                        "rank_identity": report.rank_identity,
                    })
                );
            } else {
                println!("Tait counts (I,H,=,||): {:?}", report.tait);
                println!("space ranks: {:?}", report.space_ranks);
                println!("map ranks: {:?}", report.map_ranks);
                println!("d.d = 0: {}", report.d_squared_zero);
                println!("exact: {}", report.exact);
                println!("rank identity: {}", report.rank_identity);
            }
            if !report.d_squared_zero {
                return Err(CliError::Math("square differentials do not compose to zero".into()));
            }
            if bc.d_localizable() && !report.exact {
                return Err(CliError::Math("square is not exact over a localizable base".into()));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
