//! Command-line front end. [`run`] is pure apart from reading input files,
//! so tests can drive it directly.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::automaton::AutomatonFile;
use crate::covers::{nonuniform_experiment, DEFAULT_ATTEMPT_CAP};
use crate::extension::{connector, gamma_m, monoid_injectivity_check, strict_growth_verdict, ExtensionError};
use crate::freegroup::ReducedWord;
use crate::scalar::{format_decimal, parse_rational};
use crate::spectral::{growth_rate, SpectralError};
use crate::stallings::{build_core, subgroup_automaton, CoreGraph, CoreGraphFile, SubgroupRecord};
use crate::{Automaton, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNCERTIFIED: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "qcgrowth", version, about = "Certified growth rates of regular languages and free-group subgroups")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Spectral radius, period and growth rate of an automaton.
    Spectral {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "1e-9")]
        tol: String,
    },
    /// Word counts by length.
    Census {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "n-max", default_value_t = 12)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Folded core graph of a subgroup of F_r.
    Stallings {
        #[arg(long, default_value_t = 2)]
        rank: usize,
        /// Comma-separated reduced words, uppercase for inverses.
        #[arg(long, conflicts_with = "input")]
        gens: Option<String>,
        /// Core graph JSON instead of generators.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Certified comparison of the subgroup growth rate with 2r - 1.
    Verdict {
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, conflicts_with = "input")]
        gens: Option<String>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value = "1e-9")]
        tol: String,
        /// Also enumerate the extension up to this length.
        #[arg(long = "check-n", default_value_t = 6)]
        check_n: usize,
    },
    /// Growth of punctured large-girth covers, k = 1..=kmax.
    Nonuniform {
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "1e-9")]
        tol: String,
        #[arg(long, default_value_t = DEFAULT_ATTEMPT_CAP)]
        attempts: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Extension automaton of a subgroup by a free-factor element.
    #[command(name = "gamma-m")]
    GammaM {
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long)]
        gens: String,
        /// Connector element; found automatically when omitted.
        #[arg(long)]
        g: Option<String>,
        #[arg(long, default_value_t = 1)]
        cofactor: u64,
    },
}

/// Exit status and text for standard output and standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn uncertified(stdout: String, why: impl Into<String>) -> Self {
        Self { code: EXIT_UNCERTIFIED, stdout, stderr: why.into() }
    }

    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, stdout: String::new(), stderr: message.into() }
    }
}

pub fn run(cfg: &RunConfig) -> Outcome {
    match &cfg.command {
        Command::Spectral { input, tol } => spectral(input, tol),
        Command::Census { input, n_max, format } => census(input, *n_max, *format),
        Command::Stallings { rank, gens, input } => stallings(*rank, gens.as_deref(), input.as_deref()),
        Command::Verdict { rank, gens, input, tol, check_n } => {
            verdict(*rank, gens.as_deref(), input.as_deref(), tol, *check_n)
        }
        Command::Nonuniform { kmax, seed, tol, attempts, format } => nonuniform(*kmax, *seed, tol, *attempts, *format),
        Command::GammaM { rank, gens, g, cofactor } => gamma(*rank, gens, g.as_deref(), *cofactor),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn parse_tol(text: &str) -> Result<Rational, Outcome> {
    match parse_rational(text) {
        Some(t) if t > Rational::from_integer(0.into()) => Ok(t),
        _ => Err(Outcome::input(format!("--tol: `{text}` is not a positive decimal or fraction"))),
    }
}

fn read(path: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(path).map_err(|e| Outcome::input(format!("{}: {e}", path.display())))
}

fn load_automaton(path: &Path) -> Result<Automaton, Outcome> {
    let text = read(path)?;
    let file: AutomatonFile = serde_json::from_str(&text)
        .map_err(|e| Outcome::input(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
    Automaton::from_file(&file).map_err(|e| Outcome::input(format!("{}: {e}", path.display())))
}

/// Parses `"aa,b"` into reduced words; non-reduced input is refused.
pub fn parse_generators(text: &str, rank: usize) -> Result<Vec<ReducedWord>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .enumerate()
        .map(|(i, g)| {
            let w = ReducedWord::parse(g).map_err(|e| format!("--gens: generator {} `{g}`: {e}", i + 1))?;
            w.check_rank(rank).map_err(|e| format!("--gens: generator {} `{g}`: {e}", i + 1))?;
            Ok(w)
        })
        .collect()
}

fn load_subgroup(rank: usize, gens: Option<&str>, input: Option<&Path>) -> Result<SubgroupRecord, Outcome> {
    if !(1..=26).contains(&rank) {
        return Err(Outcome::input(format!("--rank: {rank} is outside 1..=26")));
    }
    match (gens, input) {
        (Some(g), _) => {
            let words = parse_generators(g, rank).map_err(Outcome::input)?;
            build_core(&words, rank).map_err(|e| Outcome::input(format!("--gens: {e}")))
        }
        (None, Some(path)) => {
            let text = read(path)?;
            let file: CoreGraphFile = serde_json::from_str(&text)
                .map_err(|e| Outcome::input(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
            let core = CoreGraph::from_file(&file).map_err(|e| Outcome::input(format!("{}: {e}", path.display())))?;
            Ok(SubgroupRecord::from_core(core))
        }
        (None, None) => Err(Outcome::input("either --gens or --in is required")),
    }
}

fn spectral(input: &Path, tol: &str) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let tol = parse_tol(tol)?;
        let g = load_automaton(input)?;
        let report = match growth_rate(&g, &tol) {
            Ok(r) => r,
            Err(SpectralError::EmptyLanguage) => return Err(Outcome::input(format!("{}: language is empty", input.display()))),
            Err(e) => return Ok(Outcome::uncertified(String::new(), e.to_string())),
        };
        let mut v = report.to_json();
        v["rho"]["decimal"] = json!([
            format_decimal(&report.rho.lower, 12, false),
            format_decimal(&report.rho.upper, 12, true)
        ]);
        v["converged"] = json!(report.rho.converged);
        let out = pretty(&v);
        Ok(if report.rho.within(&tol) || report.rho.width() == Rational::from_integer(0.into()) {
            Outcome::ok(out)
        } else {
            Outcome::uncertified(out, "enclosure wider than the tolerance")
        })
    };
    run().unwrap_or_else(|e| e)
}

fn census(input: &Path, n_max: usize, format: Format) -> Outcome {
    let g = match load_automaton(input) {
        Ok(g) => g,
        Err(e) => return e,
    };
    let c = g.census(n_max);
    let out = match format {
        Format::Json => pretty(&json!({
            "per_length": c.per_length.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "cumulative": c.cumulative.iter().map(ToString::to_string).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut s = String::from("n,count,cumulative\n");
            for (n, (w, f)) in c.per_length.iter().zip(&c.cumulative).enumerate() {
                s.push_str(&format!("{n},{w},{f}\n"));
            }
            s
        }
    };
    Outcome::ok(out)
}

fn subgroup_json(rec: &SubgroupRecord) -> Value {
    json!({
        "generators": rec.generators.iter().map(ReducedWord::compact).collect::<Vec<_>>(),
        "rank": rec.rank,
        "finite_index": rec.finite_index,
        "index": rec.index(),
        "core": serde_json::to_value(rec.core.to_file()).expect("core graph serializes"),
    })
}

fn stallings(rank: usize, gens: Option<&str>, input: Option<&Path>) -> Outcome {
    match load_subgroup(rank, gens, input) {
        Ok(rec) => Outcome::ok(pretty(&subgroup_json(&rec))),
        Err(e) => e,
    }
}

fn verdict(rank: usize, gens: Option<&str>, input: Option<&Path>, tol: &str, check_n: usize) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let tol = parse_tol(tol)?;
        let rec = load_subgroup(rank, gens, input)?;
        let v = match strict_growth_verdict(&rec, rank, &tol) {
            Ok(v) => v,
            Err(e @ (ExtensionError::FiniteIndexSubgroup | ExtensionError::RankTooSmall)) => {
                return Err(Outcome::input(e.to_string()))
            }
            Err(e) => return Ok(Outcome::uncertified(String::new(), e.to_string())),
        };
        let mut out = v.to_json();
        let gm = gamma_m(&subgroup_automaton(&rec), &v.g_used, 1).map_err(|e| Outcome::input(e.to_string()))?;
        let check = monoid_injectivity_check(&gm, &rec, &v.g_used, check_n);
        out["injectivity"] = match &check {
            Ok(r) => json!({
                "n": r.n,
                "f_M": r.cumulative.iter().map(|c| c.0).collect::<Vec<_>>(),
                "f_G": r.cumulative.iter().map(|c| c.1).collect::<Vec<_>>(),
                "injective": true,
            }),
            Err(e) => json!({ "n": check_n, "injective": false, "error": e.to_string() }),
        };
        out["lambda_H"]["decimal"] = json!([
            format_decimal(&v.lambda_h.lower, 12, false),
            format_decimal(&v.lambda_h.upper, 12, true)
        ]);
        let text = pretty(&out);
        Ok(if v.certified && check.is_ok() {
            Outcome::ok(text)
        } else {
            Outcome::uncertified(text, v.diagnostics.join("; "))
        })
    };
    run().unwrap_or_else(|e| e)
}

fn nonuniform(kmax: usize, seed: u64, tol: &str, attempts: usize, format: Format) -> Outcome {
    let tol = match parse_tol(tol) {
        Ok(t) => t,
        Err(e) => return e,
    };
    if kmax == 0 {
        return Outcome::input("--kmax must be at least 1");
    }
    let report = match nonuniform_experiment(kmax, &tol, seed, attempts) {
        Ok(r) => r,
        Err(e) => return Outcome::uncertified(String::new(), e.to_string()),
    };
    let out = match format {
        Format::Csv => report.to_csv(),
        Format::Json => pretty(&json!(report
            .rows
            .iter()
            .map(|r| json!({
                "k": r.k,
                "degree": r.degree,
                "girth": r.girth,
                "lambda": { "lower": r.lambda.lower.to_string(), "upper": r.lambda.upper.to_string() },
                "bound_lower": r.bound.0.to_string(),
                "certified": r.certified,
                "ktree_subtrees": r.ktree_subtrees,
            }))
            .collect::<Vec<_>>())),
    };
    if report.all_certified() {
        Outcome::ok(out)
    } else {
        Outcome::uncertified(out, "some rows are not certified")
    }
}

fn gamma(rank: usize, gens: &str, g: Option<&str>, cofactor: u64) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let rec = load_subgroup(rank, Some(gens), None)?;
        let g = match g {
            Some(text) => {
                let w = ReducedWord::parse(text).map_err(|e| Outcome::input(format!("--g: `{text}`: {e}")))?;
                w.check_rank(rank).map_err(|e| Outcome::input(format!("--g: `{text}`: {e}")))?;
                w
            }
            None => connector(&rec).map_err(|e| Outcome::input(e.to_string()))?,
        };
        let gm = gamma_m(&subgroup_automaton(&rec), &g, cofactor).map_err(|e| Outcome::input(e.to_string()))?;
        let mut v: Value = serde_json::from_str(&gm.to_json()).expect("automaton JSON round-trips");
        v["g"] = json!(g.compact());
        Ok(Outcome::ok(pretty(&v)))
    };
    run().unwrap_or_else(|e| e)
}
