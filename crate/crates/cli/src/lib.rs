//! The `embq` command line: argument parsing, file loading, dispatch to the
//! library, and report output.
//!
//! Exit codes: 0 for a positive answer or success, 1 for a negative answer,
//! 2 for usage, input or I/O errors, 3 when a resource cap is exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use embq::catalog::catalog_generate;
use embq::game::symbolic::{SymConfig, SymEqStructure};
use embq::game::{
    self, play_interactive, replay, GameConfig, GameInstance, Player, Position, Transcript,
};
use embq::logic::{evaluate, parse_formula, Registry};
use embq::morphism::{enumerate_morphisms, find_morphism, MorphismKind, MorphismQuery, PartialMap};
use embq::qelim::{
    eliminate_quantifiers, is_quasi_homogeneous, stabilize_formula, type_chain, Chain,
    HomogeneityReport, Stabilization, TypeChainReport,
};
use embq::types::TypeDisjunction;
use embq::zeroone::{estimate_mu_with_jobs, SampleConfig};
use embq::{Error, Structure, Vocabulary};

pub const EXIT_POSITIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "embq",
    version,
    about = "Embedding-closed quantifiers on finite structures"
)]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,

    /// Largest universe accepted in input structures.
    #[arg(long, global = true, env = "EMBQ_CAP_SIZE", default_value_t = 64)]
    pub cap_size: usize,

    /// Master seed for sampling.
    #[arg(long, global = true, env = "EMBQ_SEED", default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Embedding,
    Hom,
    Iso,
}

impl From<KindArg> for MorphismKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Embedding => MorphismKind::Embedding,
            KindArg::Hom => MorphismKind::Homomorphism,
            KindArg::Iso => MorphismKind::Isomorphism,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search for a morphism between two structures.
    Embed {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long, value_enum, default_value = "embedding")]
        kind: KindArg,
        /// Required images, as `x=y,...`.
        #[arg(long)]
        pin: Option<String>,
        /// List up to N morphisms instead of the first one.
        #[arg(long, value_name = "N")]
        enumerate: Option<usize>,
    },
    /// Evaluate a formula in a structure.
    Check {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        quantifiers: Option<PathBuf>,
        /// Values of free variables, as `x=a,...`.
        #[arg(long)]
        assign: Option<String>,
    },
    /// Quantifier-free equivalent of a formula in a quasi-homogeneous structure.
    Qe {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        quantifiers: Option<PathBuf>,
    },
    /// Decide quasi-homogeneity.
    Homog {
        #[arg(long)]
        structure: PathBuf,
    },
    /// Realized types of a quantifier application along a chain.
    Chain {
        #[arg(long, num_args = 1.., required = true)]
        structures: Vec<PathBuf>,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        quantifiers: Option<PathBuf>,
        /// Stabilize an arbitrary formula instead of reporting types.
        #[arg(long)]
        stabilize: bool,
    },
    /// Solve the embedding game.
    Game(GameArgs),
    /// Estimate how often a sentence holds in random structures.
    Zeroone {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        quantifiers: Option<PathBuf>,
    },
    /// Named structures.
    Catalog {
        #[command(subcommand)]
        command: CatalogCommand,
    },
}

#[derive(Subcommand, Debug)]
pub enum CatalogCommand {
    /// Print a catalog structure as JSON.
    Gen {
        name: String,
        /// Parameter `key=value`; comma-separated values become lists.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true)]
pub struct GameArgs {
    #[command(subcommand)]
    pub play: Option<GameCommand>,
    #[command(flatten)]
    pub sides: SidesArgs,
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    /// Include the strategy or refutation in the report.
    #[arg(long)]
    pub witness: bool,
    /// Elements pinned in the left structure, comma-separated.
    #[arg(long)]
    pub pin_left: Option<String>,
    #[arg(long)]
    pub pin_right: Option<String>,
    /// Longest Spoiler tuple.
    #[arg(long)]
    pub width: Option<usize>,
    /// Most memoized positions.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap_states: usize,
    /// Most rounds for the symbolic game.
    #[arg(long, default_value_t = game::symbolic::SYM_ROUND_CAP)]
    pub cap_rounds: usize,
}

#[derive(Args, Debug)]
pub struct SidesArgs {
    #[arg(long)]
    pub left: Option<PathBuf>,
    #[arg(long)]
    pub right: Option<PathBuf>,
    /// Play on equivalence structures given by class profiles.
    #[arg(long)]
    pub symbolic: bool,
    /// `(size x count),...` with size and count natural, aleph0 or aleph1.
    #[arg(long)]
    pub left_profile: Option<String>,
    #[arg(long)]
    pub right_profile: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum GameCommand {
    /// Play against the solver on standard input.
    Play {
        #[command(flatten)]
        sides: SidesArgs,
        #[arg(long = "as", default_value = "spoiler")]
        role: String,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Save the transcript here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Replay a saved transcript instead of reading moves.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub kind: MorphismKind,
    pub found: bool,
    pub map: Option<IndexMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<IndexMap<String, String>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub formula: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QeReport {
    pub formula: String,
    pub theta: String,
    pub disjunction: TypeDisjunction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameReport {
    pub symbolic: bool,
    pub survives: bool,
    pub rounds: usize,
    pub positions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub identical: bool,
    pub transcript: Transcript,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroOneRow {
    pub size: usize,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub successes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroOneReport {
    pub formula: String,
    pub samples: usize,
    pub seed: u64,
    pub p: f64,
    pub rows: Vec<ZeroOneRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: String,
    pub exit_code: i32,
}

/// A finished command: what to print and how to exit.
struct Outcome {
    json: Value,
    text: String,
    code: i32,
}

impl Outcome {
    fn new<T: Serialize>(report: &T, text: String, positive: bool) -> Outcome {
        Outcome {
            json: serde_json::to_value(report).expect("reports serialize"),
            text,
            code: if positive {
                EXIT_POSITIVE
            } else {
                EXIT_NEGATIVE
            },
        }
    }
}

/// Runs one command line; prompts for interactive play go to `err` in JSON
/// mode so that `out` holds only the report.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_POSITIVE
            };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(&cli, input, out, err) {
        Ok(o) => {
            let _ = match cli.format {
                Format::Json => writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&o.json).expect("json")
                ),
                Format::Text => write!(out, "{}", o.text),
            };
            o.code
        }
        Err(e) => {
            let code = if e.is_cap() { EXIT_CAP } else { EXIT_ERROR };
            let _ = writeln!(err, "error: {e}");
            if cli.format == Format::Json {
                let report = ErrorReport {
                    error: e.to_string(),
                    exit_code: code,
                };
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&report).expect("json")
                );
            }
            code
        }
    }
}

fn load_structure(path: &Path, cap: usize) -> Result<Structure, Error> {
    let s = Structure::from_json_file(path)?;
    if s.len() > cap {
        return Err(Error::cap(
            format!("universe of {} ({} elements)", path.display(), s.len()),
            cap,
        ));
    }
    Ok(s)
}

fn load_registry(path: Option<&Path>) -> Result<Registry, Error> {
    path.map_or_else(|| Ok(Registry::new()), Registry::from_json_file)
}

fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn dispatch(
    cli: &Cli,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Outcome, Error> {
    if cli.cap_size == 0 {
        return Err(Error::InvalidParams("--cap-size must be positive".into()));
    }
    let cap = cli.cap_size;
    match &cli.command {
        Command::Embed {
            from,
            to,
            kind,
            pin,
            enumerate,
        } => {
            let mut q = MorphismQuery::new(
                (*kind).into(),
                load_structure(from, cap)?,
                load_structure(to, cap)?,
            );
            if let Some(pin) = pin {
                q = q.with_pins(PartialMap::parse(pin)?);
            }
            let report = match enumerate {
                Some(limit) => {
                    let maps: Vec<_> = enumerate_morphisms(&q.with_limit(*limit))?
                        .into_iter()
                        .map(|m| m.map)
                        .collect();
                    EmbedReport {
                        kind: (*kind).into(),
                        found: !maps.is_empty(),
                        map: maps.first().cloned(),
                        maps: Some(maps),
                    }
                }
                None => {
                    let map = find_morphism(&q)?.map(|m| m.map);
                    EmbedReport {
                        kind: (*kind).into(),
                        found: map.is_some(),
                        map,
                        maps: None,
                    }
                }
            };
            let mut text = String::new();
            match &report.maps {
                Some(maps) => {
                    for m in maps {
                        writeln!(text, "{}", show_map(m)).unwrap();
                    }
                    writeln!(text, "{} {}(s) found", maps.len(), report.kind).unwrap();
                }
                None => match &report.map {
                    Some(m) => writeln!(text, "{}", show_map(m)).unwrap(),
                    None => writeln!(text, "no {} exists", report.kind).unwrap(),
                },
            }
            let found = report.found;
            Ok(Outcome::new(&report, text, found))
        }
        Command::Check {
            structure,
            formula,
            quantifiers,
            assign,
        } => {
            let a = load_structure(structure, cap)?;
            let reg = load_registry(quantifiers.as_deref())?;
            let phi = parse_formula(formula, a.vocab(), &reg)?;
            let assign = match assign {
                Some(text) => PartialMap::parse(text)?,
                None => PartialMap::new(),
            };
            let env: Vec<(&str, &str)> = assign
                .map
                .iter()
                .map(|(v, e)| (v.as_str(), e.as_str()))
                .collect();
            let holds = evaluate(&a, &phi, &env)?;
            let report = CheckReport {
                formula: phi.to_string(),
                holds,
            };
            Ok(Outcome::new(&report, format!("{holds}\n"), holds))
        }
        Command::Qe {
            structure,
            formula,
            quantifiers,
        } => {
            let a = load_structure(structure, cap)?;
            let reg = load_registry(quantifiers.as_deref())?;
            let phi = parse_formula(formula, a.vocab(), &reg)?;
            let theta = eliminate_quantifiers(&a, &phi)?;
            let report = QeReport {
                formula: phi.to_string(),
                theta: theta.to_formula(a.vocab()).to_string(),
                disjunction: theta,
            };
            let text = format!("{}\n", report.theta);
            Ok(Outcome::new(&report, text, true))
        }
        Command::Homog { structure } => {
            let a = load_structure(structure, cap)?;
            let report: HomogeneityReport = is_quasi_homogeneous(&a)?;
            let text = match &report.counterexample {
                None => "quasi-homogeneous\n".to_string(),
                Some((l, r)) => format!(
                    "not quasi-homogeneous: ({}) and ({}) share a type but no self-embedding maps one to the other\n",
                    l.join(","),
                    r.join(",")
                ),
            };
            let yes = report.homogeneous;
            Ok(Outcome::new(&report, text, yes))
        }
        Command::Chain {
            structures,
            formula,
            quantifiers,
            stabilize,
        } => {
            let members = structures
                .iter()
                .map(|p| load_structure(p, cap))
                .collect::<Result<Vec<_>, _>>()?;
            let reg = load_registry(quantifiers.as_deref())?;
            let phi = parse_formula(formula, members[0].vocab(), &reg)?;
            let vocab = members[0].vocab().clone();
            let chain = Chain::new(members)?;
            if *stabilize {
                let s: Stabilization = stabilize_formula(&chain, &phi)?;
                let text = format!("from index {}: {}\n", s.index, s.theta.to_formula(&vocab));
                Ok(Outcome::new(&s, text, true))
            } else {
                let r: TypeChainReport = type_chain(&chain, &phi)?;
                let mut text = String::new();
                for (i, t) in r.type_sets.iter().enumerate() {
                    writeln!(text, "T_{i}: {} type(s)", t.len()).unwrap();
                }
                writeln!(
                    text,
                    "monotone: {}, stable from index {}\ntheta: {}",
                    r.monotone,
                    r.stabilization_index,
                    r.theta.to_formula(&vocab)
                )
                .unwrap();
                let ok = r.monotone;
                Ok(Outcome::new(&r, text, ok))
            }
        }
        Command::Game(args) => match &args.play {
            Some(GameCommand::Play {
                sides,
                role,
                rounds,
                transcript,
                replay: saved,
            }) => {
                let inst = instance(sides, None, None, cap)?;
                let role: Player = role.parse()?;
                if let Some(path) = saved {
                    let old: Transcript =
                        serde_json::from_str(&read_text(path)?).map_err(|source| Error::Json {
                            path: path.clone(),
                            source,
                        })?;
                    let new = replay(&inst, &old)?;
                    let identical = new == old;
                    let report = ReplayReport {
                        identical,
                        transcript: new,
                    };
                    let text = format!(
                        "{}\nreplay {}\n",
                        report.transcript.log.join("\n"),
                        if identical { "identical" } else { "differs" }
                    );
                    return Ok(Outcome::new(&report, text, identical));
                }
                let prompts: &mut dyn Write = if cli.format == Format::Json { err } else { out };
                let t = play_interactive(&inst, role, *rounds, input, prompts)?;
                if let Some(path) = transcript {
                    std::fs::write(path, serde_json::to_string_pretty(&t).expect("json")).map_err(
                        |source| Error::Io {
                            path: path.clone(),
                            source,
                        },
                    )?;
                }
                Ok(Outcome {
                    json: serde_json::to_value(&t).expect("json"),
                    text: String::new(),
                    code: EXIT_POSITIVE,
                })
            }
            None => solve_game(args, cap),
        },
        Command::Zeroone {
            vocab,
            formula,
            sizes,
            samples,
            p,
            jobs,
            quantifiers,
        } => {
            let v = Vocabulary::from_json_str(&read_text(vocab)?)?;
            let reg = load_registry(quantifiers.as_deref())?;
            let phi = parse_formula(formula, &v, &reg)?;
            let mut rows = Vec::new();
            let mut text = String::new();
            for &size in sizes {
                if size > cap {
                    return Err(Error::cap(format!("sample size {size}"), cap));
                }
                let cfg = SampleConfig::new(v.clone(), size, *samples, cli.seed).with_p(*p)?;
                let m = estimate_mu_with_jobs(&phi, &cfg, *jobs)?;
                writeln!(
                    text,
                    "n={size}: {:.4} [{:.4}, {:.4}]",
                    m.estimate, m.low, m.high
                )
                .unwrap();
                rows.push(ZeroOneRow {
                    size,
                    estimate: m.estimate,
                    low: m.low,
                    high: m.high,
                    successes: m.successes,
                });
            }
            let report = ZeroOneReport {
                formula: phi.to_string(),
                samples: *samples,
                seed: cli.seed,
                p: *p,
                rows,
            };
            Ok(Outcome::new(&report, text, true))
        }
        Command::Catalog {
            command: CatalogCommand::Gen { name, params, out },
        } => {
            let s = catalog_generate(name, &parse_params(params)?)?;
            let json = s.to_json();
            if let Some(path) = out {
                std::fs::write(path, serde_json::to_string_pretty(&json).expect("json")).map_err(
                    |source| Error::Io {
                        path: path.clone(),
                        source,
                    },
                )?;
            }
            Ok(Outcome {
                text: format!("{s}\n"),
                json,
                code: EXIT_POSITIVE,
            })
        }
    }
}

fn show_map(m: &IndexMap<String, String>) -> String {
    m.iter()
        .map(|(k, v)| format!("{k}->{v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_params(params: &[String]) -> Result<Map<String, Value>, Error> {
    let mut out = Map::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::InvalidParams(format!("`{p}` is not of the form key=value")))?;
        let number = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map(Value::from)
                .map_err(|_| Error::InvalidParams(format!("`{k}`: `{s}` is not a natural number")))
        };
        let value = if v.contains(',') {
            Value::Array(v.split(',').map(number).collect::<Result<_, _>>()?)
        } else {
            number(v)?
        };
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

fn split_ids(text: Option<&String>) -> Vec<String> {
    text.map(|t| {
        t.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    })
    .unwrap_or_default()
}

fn instance(
    sides: &SidesArgs,
    pin_left: Option<&String>,
    pin_right: Option<&String>,
    cap: usize,
) -> Result<GameInstance, Error> {
    if sides.symbolic || sides.left_profile.is_some() || sides.right_profile.is_some() {
        let profile = |p: &Option<String>, flag: &str| {
            p.as_deref()
                .ok_or_else(|| Error::InvalidParams(format!("symbolic games need {flag}")))
                .and_then(SymEqStructure::parse_profile)
        };
        return Ok(GameInstance::Symbolic {
            left: profile(&sides.left_profile, "--left-profile")?,
            right: profile(&sides.right_profile, "--right-profile")?,
        });
    }
    let path = |p: &Option<PathBuf>, flag: &str| {
        p.clone()
            .ok_or_else(|| Error::InvalidParams(format!("finite games need {flag}")))
    };
    let left = load_structure(&path(&sides.left, "--left")?, cap)?;
    let right = load_structure(&path(&sides.right, "--right")?, cap)?;
    Ok(GameInstance::Finite(Position::new(
        left,
        split_ids(pin_left),
        right,
        split_ids(pin_right),
    )?))
}

fn solve_game(args: &GameArgs, cap: usize) -> Result<Outcome, Error> {
    let report = match instance(
        &args.sides,
        args.pin_left.as_ref(),
        args.pin_right.as_ref(),
        cap,
    )? {
        GameInstance::Finite(p) => {
            let cfg = GameConfig {
                width: args.width,
                memo_cap: args.cap_states,
            };
            let o = game::duplicator_survives_with(&p, args.rounds, cfg)?;
            GameReport {
                symbolic: false,
                survives: o.survives,
                rounds: o.rounds,
                positions: o.positions,
                witness: args
                    .witness
                    .then(|| serde_json::to_value(&o.witness).expect("json")),
            }
        }
        GameInstance::Symbolic { left, right } => {
            let cfg = SymConfig {
                round_cap: args.cap_rounds,
                memo_cap: args.cap_states,
            };
            let o = game::sym_game_with(&left, &right, args.rounds, cfg)?;
            GameReport {
                symbolic: true,
                survives: o.survives,
                rounds: o.rounds,
                positions: o.positions,
                witness: args
                    .witness
                    .then(|| serde_json::to_value(&o.witness).expect("json")),
            }
        }
    };
    let mut text = if report.survives {
        format!("Duplicator survives {} round(s)\n", report.rounds)
    } else {
        format!("Spoiler wins within {} round(s)\n", report.rounds)
    };
    if let Some(w) = &report.witness {
        writeln!(text, "{}", serde_json::to_string_pretty(w).expect("json")).unwrap();
    }
    let survives = report.survives;
    Ok(Outcome::new(&report, text, survives))
}
