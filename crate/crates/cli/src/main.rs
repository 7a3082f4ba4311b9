use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multigap::breaking::{break_check, jigsaw_audit, BreakQuery, BreakVerdict};
use multigap::embeddings::SearchBudget;
use multigap::gaps::{order_le, GapSpec, Verdict};
use multigap::types::{type_records, MAX_TYPE_ALPHABET};
use multigap_cli::audit::{run_audit, strong_analysis, Status};
use multigap_cli::cache::{resolve_cache_dir, MatrixCache};

#[derive(Parser)]
#[command(name = "multigap", version, about = "Finite combinatorics of analytic multiple gaps")]
struct Cli {
    /// Directory for cached order matrices.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Disable the on-disk cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Run on a single thread.
    #[arg(long, global = true)]
    no_parallel: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Types of the n-adic tree.
    Types {
        #[command(subcommand)]
        command: TypesCommand,
    },
    /// Symbolic gaps and the order between them.
    Gaps {
        #[command(subcommand)]
        command: GapsCommand,
    },
    /// B-breaking of record gaps.
    Breaking {
        #[command(subcommand)]
        command: BreakingCommand,
    },
    /// Reproduce the tables and counts.
    Audit {
        #[command(subcommand)]
        command: AuditCommand,
    },
}

#[derive(Subcommand)]
enum TypesCommand {
    Enum {
        #[arg(long)]
        n: u8,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct BudgetArg {
    /// JSON file with a search budget; defaults apply otherwise.
    #[arg(long)]
    budget: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GapsCommand {
    /// Minimal classes of the strong candidates over n letters.
    EnumStrong {
        #[arg(long)]
        n: u8,
        /// Group classes up to coordinate permutations.
        #[arg(long)]
        upto_perm: bool,
        #[arg(long)]
        json: bool,
    },
    /// Decide LEFT ≤ RIGHT.
    Order {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[command(flatten)]
        budget: BudgetArg,
    },
}

#[derive(Subcommand)]
enum BreakingCommand {
    /// Search a witness that GAP is B-broken.
    Check {
        #[arg(long)]
        gap: PathBuf,
        /// Comma-separated side indices.
        #[arg(long)]
        set: String,
        #[command(flatten)]
        budget: BudgetArg,
    },
    /// Per-B verdicts for every nonempty B.
    Jigsaw {
        #[arg(long)]
        gap: PathBuf,
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        budget: BudgetArg,
    },
}

#[derive(Subcommand)]
enum AuditCommand {
    PaperTables {
        /// Write the JSON report here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArg,
    },
}

struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn read_gap(path: &Path) -> Result<GapSpec, Usage> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    GapSpec::from_json(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn read_budget(arg: &BudgetArg) -> Result<SearchBudget, Usage> {
    match &arg.budget {
        None => Ok(SearchBudget::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", p.display())))
        }
    }
}

fn parse_set(text: &str) -> Result<BTreeSet<usize>, Usage> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(|e| Usage(format!("--set {text}: {e}"))))
        .collect()
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("plain data"));
}

fn run(cli: Cli) -> Result<ExitCode, Usage> {
    let cache = MatrixCache::new(if cli.no_cache { None } else { resolve_cache_dir(cli.cache_dir.as_deref()) });
    match cli.command {
        Command::Types { command: TypesCommand::Enum { n, json } } => {
            if n == 0 || n > MAX_TYPE_ALPHABET {
                return Err(Usage(format!("--n must lie in 1..={MAX_TYPE_ALPHABET}")));
            }
            let records = type_records(n)?;
            if json {
                print_json(&records);
            } else {
                println!("id\ttext\tmax\ttop_comb");
                for r in &records {
                    println!("{}\t{}\t{}\t{}", r.id, r.text, r.max, r.top_comb);
                }
                println!("count {}", records.len());
            }
        }
        Command::Gaps { command: GapsCommand::EnumStrong { n, upto_perm, json } } => {
            if n == 0 || n > 3 {
                return Err(Usage("--n must lie in 1..=3".into()));
            }
            let (analysis, _) = strong_analysis(n, &cache)?;
            let classes = &analysis.classes.classes;
            let groups: Vec<Vec<usize>> = if upto_perm {
                analysis.quotient.letters_and_sides.clone()
            } else {
                (0..classes.len()).map(|k| vec![k]).collect()
            };
            if json {
                let rows: Vec<_> = groups
                    .iter()
                    .map(|g| {
                        serde_json::json!({
                            "classes": g,
                            "representative": analysis.candidates[classes[g[0]][0]],
                            "members": g.iter().map(|&k| classes[k].len()).sum::<usize>(),
                        })
                    })
                    .collect();
                print_json(&serde_json::json!({
                    "n": n,
                    "candidates": analysis.candidates.len(),
                    "minimal": analysis.classes.minimal.len(),
                    "classes": classes.len(),
                    "upto_perm_letters_and_sides": analysis.quotient.letters_and_sides.len(),
                    "upto_perm_sides_only": analysis.quotient.sides_only.len(),
                    "rows": rows,
                }));
            } else {
                println!("candidates {}", analysis.candidates.len());
                println!("minimal {}", analysis.classes.minimal.len());
                for (i, g) in groups.iter().enumerate() {
                    println!("{}\t{}", i + 1, analysis.candidates[classes[g[0]][0]]);
                }
                if upto_perm {
                    println!("classes {} (sides-only convention: {})", groups.len(), analysis.quotient.sides_only.len());
                } else {
                    println!("classes {}", groups.len());
                }
            }
        }
        Command::Gaps { command: GapsCommand::Order { left, right, budget } } => {
            let (g, h) = (read_gap(&left)?, read_gap(&right)?);
            let r = order_le(&g, &h, &read_budget(&budget)?)?;
            print_json(&r);
            if r.verdict == Verdict::UnknownBounded {
                eprintln!("UNKNOWN_bounded: no witness within the budget; this is not a refutation");
            }
        }
        Command::Breaking { command: BreakingCommand::Check { gap, set, budget } } => {
            let q = BreakQuery::new(read_gap(&gap)?, parse_set(&set)?, read_budget(&budget)?)?;
            let r = break_check(&q)?;
            print_json(&r);
            if r.verdict == BreakVerdict::NotBrokenBounded {
                eprintln!("NOT_BROKEN_bounded: no witness within the budget; this is not a proof");
            }
        }
        Command::Breaking { command: BreakingCommand::Jigsaw { gap, csv, budget } } => {
            let a = jigsaw_audit(&read_gap(&gap)?, &read_budget(&budget)?)?;
            if csv {
                println!("# {}", a.scope);
                print!("{}", a.to_csv());
            } else {
                print_json(&a);
            }
        }
        Command::Audit { command: AuditCommand::PaperTables { out, budget } } => {
            let report = run_audit(cli.seed, &read_budget(&budget)?, &cache)?;
            for e in &report.entries {
                let status = match e.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::DiscrepancyKnown => "DISCREPANCY_KNOWN",
                };
                eprintln!("{:<3} {:<17} {}: {}", e.id, status, e.anchor, e.computed);
            }
            let text = serde_json::to_string_pretty(&report).expect("plain data");
            if let Some(path) = out {
                std::fs::write(&path, &text).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
            }
            println!("{text}");
            if report.failures() > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.no_parallel {
        rayon::ThreadPoolBuilder::new().num_threads(1).build_global().expect("first pool initialization");
    }
    match run(cli) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
