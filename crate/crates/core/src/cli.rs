//! The `tap` command line.
//!
//! Exit codes: 0 success, 2 infeasible instance, 3 parse or usage error,
//! 4 internal invariant violation (including a failed audit).

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, TapError};
use crate::instance::{
    generate, link_lookup, origin_pairs, parse_problem, parse_solution, reduce_graph,
    solution_text, GenParams, GraphInput, Instance, Problem, Reduction, TreeModel,
};
use crate::oracle::{self, exact_opt, verify_cover};
use crate::solver::{default_root, preprocess, tree_cover, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "tap",
    version,
    about = "Tree augmentation: solve, check and benchmark"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance with the approximation algorithm.
    Solve {
        file: PathBuf,
        /// Check each contraction against the credit of an optimal cover
        /// (small instances only).
        #[arg(long)]
        audit: bool,
        /// Print contraction records to stderr.
        #[arg(long)]
        trace: bool,
        /// Root node (1-based); defaults to the lowest-id internal node.
        #[arg(long)]
        root: Option<usize>,
    },
    /// Solve an instance exactly by exhaustive search.
    Exact {
        file: PathBuf,
        #[arg(long, default_value_t = oracle::DEFAULT_EXACT_LIMIT)]
        limit: usize,
    },
    /// Check that a solution file covers the instance.
    Verify { file: PathBuf, solution: PathBuf },
    /// Print twins, locked leaves, the excluded set and the leaf matching.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        root: Option<usize>,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long, default_value_t = 8)]
        nodes: usize,
        #[arg(long = "extra-links", default_value_t = 4)]
        extra_links: usize,
        #[arg(long, default_value = "random")]
        model: TreeModel,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the pass that makes every tree edge coverable.
        #[arg(long)]
        allow_infeasible: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the solver with the exact optimum on random instances.
    Bench {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long = "max-nodes", default_value_t = 10)]
        max_nodes: usize,
        #[arg(long = "max-extra-links", default_value_t = 8)]
        max_extra_links: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        audit: bool,
    },
}

pub fn exit_code(err: &TapError) -> i32 {
    match err {
        TapError::Infeasible { .. } => EXIT_INFEASIBLE,
        TapError::Internal(_) => EXIT_INTERNAL,
        TapError::Parse(_)
        | TapError::InvalidInstance(_)
        | TapError::Disconnected
        | TapError::LimitExceeded { .. }
        | TapError::Io(_) => EXIT_USAGE,
    }
}

/// Runs the CLI on stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, err) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// A parsed input file, reduced to a tree instance when it is a graph.
struct Loaded {
    instance: Instance,
    graph: Option<(GraphInput, Reduction)>,
}

impl Loaded {
    /// Input-level endpoint pairs of instance links.
    fn pairs(&self, links: &[usize]) -> Vec<(usize, usize)> {
        match &self.graph {
            Some((g, red)) => origin_pairs(g, red, links),
            None => links.iter().map(|&i| self.instance.links()[i]).collect(),
        }
    }

    fn input_node_count(&self) -> usize {
        match &self.graph {
            Some((g, _)) => g.node_count,
            None => self.instance.node_count(),
        }
    }
}

fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path)?;
    match parse_problem(&text)? {
        Problem::Tap(instance) => Ok(Loaded {
            instance,
            graph: None,
        }),
        Problem::Graph(g) => {
            let red = reduce_graph(&g)?;
            Ok(Loaded {
                instance: red.instance.clone(),
                graph: Some((g, red)),
            })
        }
    }
}

fn root_arg(loaded: &Loaded, root: Option<usize>) -> Result<Option<usize>> {
    let Some(r) = root else { return Ok(None) };
    let n = loaded.input_node_count();
    if r == 0 || r > n {
        return Err(TapError::InvalidInstance(format!(
            "root {r} out of range 1..={n}"
        )));
    }
    Ok(Some(match &loaded.graph {
        Some((_, red)) => red.node_map[r - 1],
        None => r - 1,
    }))
}

fn execute(command: Command, err: &mut dyn Write) -> Result<String> {
    match command {
        Command::Solve {
            file,
            audit,
            trace,
            root,
        } => {
            let loaded = load(&file)?;
            let opts = SolveOptions {
                root_override: root_arg(&loaded, root)?,
                audit,
                trace,
                seed: 0,
            };
            let sol = tree_cover(&loaded.instance, &opts)?;
            let mut log = String::new();
            for (i, rec) in sol.stats.trace.iter().enumerate() {
                if trace {
                    let _ = writeln!(log, "{rec}");
                }
                if let Some(a) = sol.stats.audit.get(i) {
                    let _ = writeln!(log, "{a}");
                }
            }
            let _ = err.write_all(log.as_bytes());
            Ok(solution_text(&loaded.pairs(&sol.links)))
        }
        Command::Exact { file, limit } => {
            let loaded = load(&file)?;
            let (_, links) = exact_opt(&loaded.instance, limit)?;
            Ok(solution_text(&loaded.pairs(&links)).replacen("s tap", "s opt", 1))
        }
        Command::Verify { file, solution } => {
            let loaded = load(&file)?;
            let text = std::fs::read_to_string(&solution)?;
            let pairs = parse_solution(&text, loaded.input_node_count())?;
            Ok(if verify_input(&loaded, &pairs) {
                "valid\n".to_string()
            } else {
                "invalid\n".to_string()
            })
        }
        Command::Analyze { file, root } => {
            let loaded = load(&file)?;
            let root = root_arg(&loaded, root)?.unwrap_or_else(|| default_root(&loaded.instance));
            Ok(analyze_text(&loaded.instance, root))
        }
        Command::Gen {
            nodes,
            extra_links,
            model,
            seed,
            allow_infeasible,
            out,
        } => {
            let params = GenParams {
                nodes,
                extra_link_count: extra_links,
                model,
                ensure_feasible: !allow_infeasible,
            };
            let text = generate(&params, seed).to_text();
            match out {
                Some(path) => {
                    std::fs::write(path, text)?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Command::Bench {
            trials,
            max_nodes,
            max_extra_links,
            seed,
            audit,
        } => {
            let summary = bench(trials, max_nodes, max_extra_links, seed, audit);
            Ok(format!(
                "bench {} {}/{} {}\n",
                summary.trials, summary.max_ratio.0, summary.max_ratio.1, summary.violations
            ))
        }
    }
}

/// Every listed pair must be an input link and together they must cover
/// the (reduced) tree.
fn verify_input(loaded: &Loaded, pairs: &[(usize, usize)]) -> bool {
    match &loaded.graph {
        None => {
            let lookup = link_lookup(&loaded.instance);
            pairs
                .iter()
                .all(|&(u, v)| lookup.contains_key(&(u.min(v), u.max(v))))
                && verify_cover(&loaded.instance, pairs)
        }
        Some((g, red)) => {
            let known: std::collections::HashSet<(usize, usize)> =
                g.links.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
            if !pairs
                .iter()
                .all(|&(u, v)| known.contains(&(u.min(v), u.max(v))))
            {
                return false;
            }
            let mapped: Vec<(usize, usize)> = pairs
                .iter()
                .map(|&(u, v)| (red.node_map[u], red.node_map[v]))
                .filter(|(a, b)| a != b)
                .collect();
            verify_cover(&red.instance, &mapped)
        }
    }
}

fn join(ids: impl IntoIterator<Item = usize>) -> String {
    ids.into_iter()
        .map(|x| (x + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn join_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> String {
    pairs
        .into_iter()
        .map(|(u, v)| format!("{}-{}", u + 1, v + 1))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn analyze_text(inst: &Instance, root: usize) -> String {
    let pre = preprocess(inst, root);
    let ends = |id: usize| pre.links.get(id).ends();
    let mut out = String::new();
    let _ = writeln!(out, "root {}", root + 1);
    let _ = writeln!(out, "leaves {}", join(pre.tree.leaves()));
    let _ = writeln!(out, "closed-links {}", pre.links.len());
    let _ = writeln!(
        out,
        "twins {}",
        join_pairs(pre.report.twin_links.iter().map(|&i| ends(i)))
    );
    let _ = writeln!(out, "stems {}", join(pre.report.stems.keys().copied()));
    for (a, info) in &pre.report.locked {
        let _ = writeln!(
            out,
            "locked {} twin {} third {} tree {}",
            a + 1,
            info.twin + 1,
            info.third + 1,
            info.locking_tree_root + 1
        );
    }
    let _ = writeln!(
        out,
        "w {}",
        join_pairs(pre.report.w.iter().map(|&i| ends(i)))
    );
    let _ = writeln!(
        out,
        "matching {}",
        join_pairs(pre.matching.pairs().iter().copied())
    );
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchSummary {
    pub trials: usize,
    /// Largest solver/optimum ratio seen, reduced; `0/1` if nothing compared.
    pub max_ratio: (usize, usize),
    pub violations: usize,
}

enum Trial {
    Compared { size: usize, opt: usize },
    Skipped,
    Violation,
}

fn run_trial(
    index: usize,
    max_nodes: usize,
    max_extra_links: usize,
    seed: u64,
    audit: bool,
) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let nodes = rng.gen_range(4..=max_nodes.max(4));
    let extra = rng.gen_range(0..=max_extra_links);
    let model = TreeModel::ALL[rng.gen_range(0..TreeModel::ALL.len())];
    let params = GenParams {
        nodes,
        extra_link_count: extra,
        model,
        ensure_feasible: true,
    };
    let inst = generate(&params, rng.gen());
    let opts = SolveOptions {
        audit,
        ..SolveOptions::default()
    };
    let Ok(sol) = tree_cover(&inst, &opts) else {
        return Trial::Violation;
    };
    let pairs: Vec<_> = sol.links.iter().map(|&i| inst.links()[i]).collect();
    if !verify_cover(&inst, &pairs) {
        return Trial::Violation;
    }
    match exact_opt(&inst, oracle::DEFAULT_EXACT_LIMIT) {
        Ok((opt, _)) if opt > 0 => {
            if 2 * sol.size() > 3 * opt {
                Trial::Violation
            } else {
                Trial::Compared {
                    size: sol.size(),
                    opt,
                }
            }
        }
        _ => Trial::Skipped,
    }
}

/// Runs `trials` independent generate/solve/exact comparisons in parallel;
/// the summary does not depend on scheduling.
pub fn bench(
    trials: usize,
    max_nodes: usize,
    max_extra_links: usize,
    seed: u64,
    audit: bool,
) -> BenchSummary {
    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(i, max_nodes, max_extra_links, seed, audit))
        .collect();
    let mut max_ratio = (0usize, 1usize);
    let mut violations = 0;
    for r in results {
        match r {
            Trial::Compared { size, opt } => {
                if size * max_ratio.1 > max_ratio.0 * opt {
                    let g = size.gcd(&opt);
                    max_ratio = (size / g, opt / g);
                }
            }
            Trial::Violation => violations += 1,
            Trial::Skipped => {}
        }
    }
    BenchSummary {
        trials,
        max_ratio,
        violations,
    }
}
