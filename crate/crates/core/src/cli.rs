//! Command-line front end. Data tables go to stdout (or `--out`), summaries
//! to stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::embezzlement::{StructuredEngine, IDEAL_EMB_CAP};
use crate::error::{Error, Result};
use crate::exchange::{exchange_row, ExchangeInstance, ExchangeRow};
use crate::games::{
    build_tchsh, classical_value, correlation_distance, correlation_of_strategy, correlation_value, shipped_emb,
    shipped_three_chsh, strategy_value, EmbQuestionMap, NonlocalGame, Part,
};
use crate::numerics::TiltedParams;
use crate::report::{fmt_real, loglog_slope, loglog_svg, write_run, Format, RunManifest, Table};
use crate::seesaw::{optimize_ladder, SeesawConfig};
use crate::strategies::{ideal_emb, ideal_tchsh, ideal_three_chsh, trivial_strategy, QuantumStrategy};

#[derive(Debug, Parser)]
#[command(name = "bellforge", version, about = "Non-local game values, embezzlement curves and see-saw search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory for output files and manifest.json (default: table on stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value of a strategy in a game.
    Value {
        #[arg(long)]
        game: String,
        #[arg(long)]
        strategy: String,
    },
    /// Structured value curve of the ideal embezzlement strategies.
    Curve {
        #[command(flatten)]
        ds: DSelection,
        /// Also write a log-log plot of epsilon (needs --out).
        #[arg(long)]
        plot: bool,
    },
    /// Distance of each dense ideal correlation to the limit correlation.
    Nonclosure {
        /// Largest d to evaluate.
        #[arg(long, default_value_t = 6)]
        d: usize,
    },
    /// Coherent state exchange success probabilities.
    Exchange {
        #[command(flatten)]
        ds: DSelection,
        /// Qutrit levels of the entangled branch, e.g. 1,2.
        #[arg(long, default_value = "1,2")]
        phi_levels: String,
    },
    /// See-saw search for good strategies of fixed local dimensions.
    Seesaw {
        #[arg(long)]
        game: String,
        /// Local dimensions `A,B`; repeat to climb a ladder of dimensions.
        #[arg(long, required = true)]
        dims: Vec<String>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Best deterministic (classical) value by exhaustive enumeration.
    Classical {
        #[arg(long)]
        game: String,
    },
    /// Write a game or strategy as JSON.
    Export {
        #[arg(long, conflicts_with = "strategy", required_unless_present = "strategy")]
        game: Option<String>,
        #[arg(long)]
        strategy: Option<String>,
        /// Game the strategy answers (needed by builtin:trivial).
        #[arg(long = "for-game")]
        for_game: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct DSelection {
    /// Comma-separated list of d values.
    #[arg(long, value_delimiter = ',', conflicts_with = "d_range")]
    pub d: Vec<usize>,
    /// Geometric range START:END[:FACTOR] (factor defaults to 2).
    #[arg(long)]
    pub d_range: Option<String>,
}

impl DSelection {
    /// Sorted, deduplicated d values.
    pub fn resolve(&self) -> Result<Vec<usize>> {
        let mut ds = match &self.d_range {
            Some(r) => parse_d_range(r)?,
            None => self.d.clone(),
        };
        if ds.is_empty() {
            return Err(Error::invalid("give --d or --d-range"));
        }
        if ds.contains(&0) {
            return Err(Error::invalid("d values must be at least 1"));
        }
        ds.sort_unstable();
        ds.dedup();
        Ok(ds)
    }
}

pub fn parse_d_range(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| -> Result<usize> {
        p.trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad number `{p}` in d range `{s}`")))
    };
    let (start, end, factor) = match parts.as_slice() {
        [a, b] => (num(a)?, num(b)?, 2),
        [a, b, f] => (num(a)?, num(b)?, num(f)?),
        _ => return Err(Error::invalid(format!("d range must be START:END[:FACTOR], got `{s}`"))),
    };
    if start == 0 || factor < 2 || end < start {
        return Err(Error::invalid(format!("d range `{s}` needs 1 <= START <= END and FACTOR >= 2")));
    }
    let mut out = Vec::new();
    let mut d = start;
    while d <= end {
        out.push(d);
        d = match d.checked_mul(factor) {
            Some(next) => next,
            None => break,
        };
    }
    Ok(out)
}

/// A resolved game plus, for the composed game, its question bookkeeping.
pub struct ResolvedGame {
    pub game: NonlocalGame,
    pub emb_map: Option<EmbQuestionMap>,
    pub file: Option<PathBuf>,
}

fn parse_kv<'a>(field: &'a str, key: &str) -> Option<&'a str> {
    field.strip_prefix(key)?.strip_prefix('=')
}

/// `builtin:tchsh:alpha=A[:flipped]` or `beta=B`; returns `(alpha, flipped)`.
fn parse_tchsh(rest: &[&str], whole: &str) -> Result<(f64, bool)> {
    let mut alpha = None;
    let mut flipped = false;
    for field in rest {
        if let Some(v) = parse_kv(field, "alpha") {
            alpha = Some(parse_real(v, whole)?);
        } else if let Some(v) = parse_kv(field, "beta") {
            alpha = Some(TiltedParams::from_beta(parse_real(v, whole)?)?.alpha);
        } else if *field == "flipped" {
            flipped = true;
        } else {
            return Err(Error::UnresolvedRef(whole.to_string()));
        }
    }
    let alpha = alpha.ok_or_else(|| Error::UnresolvedRef(format!("{whole} (missing alpha=)")))?;
    Ok((alpha, flipped))
}

fn parse_real(v: &str, whole: &str) -> Result<f64> {
    v.parse().map_err(|_| Error::UnresolvedRef(format!("{whole} (bad number `{v}`)")))
}

pub fn resolve_game(r: &str) -> Result<ResolvedGame> {
    if let Some(spec) = r.strip_prefix("builtin:") {
        let fields: Vec<&str> = spec.split(':').collect();
        let plain = |game| ResolvedGame {
            game,
            emb_map: None,
            file: None,
        };
        return match fields.as_slice() {
            ["tchsh", rest @ ..] => {
                let (alpha, flipped) = parse_tchsh(rest, r)?;
                Ok(plain(build_tchsh(alpha, flipped)?))
            }
            ["three-chsh"] => Ok(plain(shipped_three_chsh())),
            ["emb"] => {
                let (game, map) = shipped_emb();
                Ok(ResolvedGame {
                    game,
                    emb_map: Some(map),
                    file: None,
                })
            }
            _ => Err(Error::UnresolvedRef(r.to_string())),
        };
    }
    let path = Path::new(r.strip_prefix("file:").unwrap_or(r));
    if !path.exists() {
        return Err(Error::UnresolvedRef(r.to_string()));
    }
    Ok(ResolvedGame {
        game: NonlocalGame::from_path(path)?,
        emb_map: None,
        file: Some(path.to_path_buf()),
    })
}

pub struct ResolvedStrategy {
    pub strategy: QuantumStrategy,
    /// `d` when the strategy is the ideal embezzlement strategy.
    pub emb_d: Option<usize>,
    pub file: Option<PathBuf>,
}

pub fn resolve_strategy(r: &str, game: Option<&NonlocalGame>) -> Result<ResolvedStrategy> {
    let plain = |strategy| ResolvedStrategy {
        strategy,
        emb_d: None,
        file: None,
    };
    if let Some(spec) = r.strip_prefix("builtin:") {
        let fields: Vec<&str> = spec.split(':').collect();
        return match fields.as_slice() {
            ["tchsh", rest @ ..] => {
                let (alpha, flipped) = parse_tchsh(rest, r)?;
                Ok(plain(ideal_tchsh(alpha, flipped)?))
            }
            ["three-chsh"] => Ok(plain(ideal_three_chsh())),
            ["emb", d] => {
                let d: usize = parse_kv(d, "d")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::UnresolvedRef(r.to_string()))?;
                Ok(ResolvedStrategy {
                    strategy: ideal_emb(d)?,
                    emb_d: Some(d),
                    file: None,
                })
            }
            ["trivial"] => {
                let g = game.ok_or_else(|| Error::UnresolvedRef(format!("{r} (needs a game for its shape)")))?;
                Ok(plain(trivial_strategy(g.nx, g.ny, g.na, g.nb)?))
            }
            _ => Err(Error::UnresolvedRef(r.to_string())),
        };
    }
    let path = Path::new(r.strip_prefix("file:").unwrap_or(r));
    if !path.exists() {
        return Err(Error::UnresolvedRef(r.to_string()));
    }
    Ok(ResolvedStrategy {
        strategy: QuantumStrategy::from_path(path)?,
        emb_d: None,
        file: Some(path.to_path_buf()),
    })
}

fn parse_pair(s: &str, what: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => {
            let a = a.trim().parse().map_err(|_| Error::invalid(format!("bad {what} `{s}`")))?;
            let b = b.trim().parse().map_err(|_| Error::invalid(format!("bad {what} `{s}`")))?;
            Ok((a, b))
        }
        _ => Err(Error::invalid(format!("{what} must look like A,B, got `{s}`"))),
    }
}

/// What a subcommand produced.
pub struct Outcome {
    pub stem: String,
    pub table: Table,
    pub manifest: RunManifest,
    /// Human summary for stderr.
    pub summary: String,
    /// Additional files `(name, contents)` written next to the table.
    pub extras: Vec<(String, String)>,
    /// Raw JSON document to emit instead of the table (export).
    pub document: Option<String>,
}

impl Outcome {
    fn new(stem: &str, table: Table, manifest: RunManifest) -> Self {
        Self {
            stem: stem.to_string(),
            table,
            manifest,
            summary: String::new(),
            extras: Vec::new(),
            document: None,
        }
    }
}

fn note_input(m: &mut RunManifest, label: &str, file: &Option<PathBuf>) -> Result<()> {
    if let Some(p) = file {
        m.add_input(label, p)?;
    }
    Ok(())
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Value { game, strategy } => cmd_value(game, strategy),
        Command::Curve { ds, plot } => cmd_curve(&ds.resolve()?, *plot),
        Command::Nonclosure { d } => cmd_nonclosure(*d),
        Command::Exchange { ds, phi_levels } => cmd_exchange(&ds.resolve()?, parse_pair(phi_levels, "--phi-levels")?),
        Command::Seesaw {
            game,
            dims,
            restarts,
            seed,
            max_iters,
            tol,
        } => {
            let dims = dims.iter().map(|d| parse_pair(d, "--dims")).collect::<Result<Vec<_>>>()?;
            let mut cfg = SeesawConfig::new(dims[0].0, dims[0].1);
            cfg.restarts = *restarts;
            cfg.seed = *seed;
            cfg.max_iters = *max_iters;
            cfg.tol = *tol;
            cmd_seesaw(game, &dims, &cfg)
        }
        Command::Classical { game } => cmd_classical(game),
        Command::Export {
            game,
            strategy,
            for_game,
        } => cmd_export(game.as_deref(), strategy.as_deref(), for_game.as_deref()),
    }
}

pub fn cmd_value(game_ref: &str, strategy_ref: &str) -> Result<Outcome> {
    let g = resolve_game(game_ref)?;
    let s = resolve_strategy(strategy_ref, Some(&g.game))?;
    let mut m = RunManifest::new("value");
    m.param("game", game_ref).param("strategy", strategy_ref);
    note_input(&mut m, "game", &g.file)?;
    note_input(&mut m, "strategy", &s.file)?;
    let value = strategy_value(&g.game, &s.strategy)?;
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["value".into(), value.into()]);
    let mut summary = format!("value = {}\n", fmt_real(value));
    if let Some(map) = &g.emb_map {
        let c = correlation_of_strategy(&s.strategy)?;
        let parts = map.contributions(&g.game, &c)?;
        for part in Part::ALL {
            let name = format!("part_{part}");
            table.push(vec![name.as_str().into(), parts.restricted(part).into()]);
            let _ = writeln!(summary, "{name} (restricted) = {}", fmt_real(parts.restricted(part)));
        }
        if let Some(d) = s.emb_d {
            let engine = StructuredEngine::shipped();
            let structured = engine.emb_value(&crate::embezzlement::gram_summary(d)?);
            table.push(vec!["structured_value".into(), structured.into()]);
            let _ = writeln!(
                summary,
                "structured = {}  (dense - structured = {:.3e})",
                fmt_real(structured),
                value - structured
            );
        }
    }
    let mut out = Outcome::new("value", table, m);
    out.summary = summary;
    Ok(out)
}

pub fn cmd_curve(ds: &[usize], plot: bool) -> Result<Outcome> {
    let engine = StructuredEngine::shipped();
    let rows = engine.curve(ds)?;
    let mut m = RunManifest::new("curve");
    m.param("d", ds.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
        .param("plot", plot);
    let mut table = Table::new(&crate::embezzlement::CurveRow::HEADER);
    for r in &rows {
        let mut row = vec![r.d.into()];
        row.extend(r.values().iter().map(|&v| v.into()));
        table.push(row);
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.d as f64, r.epsilon)).collect();
    let slope = loglog_slope(&points);
    let mut summary = format!("ideal value = {}\n", fmt_real(engine.ideal_value()));
    match slope {
        Some(s) => {
            let _ = writeln!(summary, "log-log slope of epsilon vs d = {s:.6}");
        }
        None => summary.push_str("log-log slope needs at least two d values\n"),
    }
    let mut out = Outcome::new("curve", table, m);
    if plot {
        let svg = loglog_svg(
            &points,
            "epsilon(d) = ideal value - value of S_d",
            "d",
            "epsilon",
            "manifest sha256={manifest_sha256}",
        );
        out.extras.push(("curve.svg".to_string(), svg));
    }
    out.summary = summary;
    Ok(out)
}

pub fn cmd_nonclosure(d_max: usize) -> Result<Outcome> {
    if d_max == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    if d_max > IDEAL_EMB_CAP {
        return Err(Error::cap("dense ideal_emb index d", d_max as u128, IDEAL_EMB_CAP as u128));
    }
    let engine = StructuredEngine::shipped();
    let limit = engine.limit_correlation();
    let limit_value = correlation_value(engine.game(), &limit)?;
    let mut m = RunManifest::new("nonclosure");
    m.param("d", d_max);
    let mut table = Table::new(&["d", "linf_distance", "value", "limit_value"]);
    for d in 1..=d_max {
        let c = correlation_of_strategy(&ideal_emb(d)?)?;
        let dist = correlation_distance(&c, &limit)?;
        let value = correlation_value(engine.game(), &c)?;
        table.push(vec![d.into(), dist.into(), value.into(), limit_value.into()]);
    }
    let mut out = Outcome::new("nonclosure", table, m);
    out.summary = format!(
        "limit correlation value = {}\nideal value            = {}\n",
        fmt_real(limit_value),
        fmt_real(engine.ideal_value())
    );
    Ok(out)
}

pub fn cmd_exchange(ds: &[usize], levels: (usize, usize)) -> Result<Outcome> {
    let inst = ExchangeInstance::new(levels)?;
    let mut m = RunManifest::new("exchange");
    m.param("d", ds.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
        .param("phi_levels", format!("{},{}", levels.0, levels.1));
    let mut table = Table::new(&ExchangeRow::HEADER);
    let mut summary = String::from("log base 2 in the bound; local_dim = qutrit x embezzler half x output qubit\n");
    for &d in ds {
        let r = exchange_row(d, &inst)?;
        if r.success_prob > r.ltw_bound {
            let _ = writeln!(summary, "d = {d}: success probability exceeds the bound");
        }
        table.push(vec![r.d.into(), r.local_dim.into(), r.success_prob.into(), r.ltw_bound.into()]);
    }
    let mut out = Outcome::new("exchange", table, m);
    out.summary = summary;
    Ok(out)
}

pub fn cmd_seesaw(game_ref: &str, dims: &[(usize, usize)], cfg: &SeesawConfig) -> Result<Outcome> {
    let g = resolve_game(game_ref)?;
    let mut m = RunManifest::new("seesaw");
    m.param("game", game_ref)
        .param(
            "dims",
            dims.iter().map(|(a, b)| format!("{a},{b}")).collect::<Vec<_>>().join(";"),
        )
        .param("restarts", cfg.restarts)
        .param("max_iters", cfg.max_iters)
        .param("tol", fmt_real(cfg.tol));
    m.seed = Some(cfg.seed);
    note_input(&mut m, "game", &g.file)?;
    let reports = optimize_ladder(&g.game, dims, cfg)?;
    let mut table = Table::new(&["dim_a", "dim_b", "restart", "best_value", "iterations", "converged"]);
    let mut summary = String::new();
    let ideal = g.emb_map.as_ref().map(|_| StructuredEngine::shipped().ideal_value());
    for rep in &reports {
        for r in &rep.restarts {
            table.push(vec![
                rep.config.dim_a.into(),
                rep.config.dim_b.into(),
                r.restart.into(),
                r.best_value.into(),
                r.iterations.into(),
                r.converged.into(),
            ]);
        }
        let _ = write!(
            summary,
            "dims ({}, {}): best = {}",
            rep.config.dim_a,
            rep.config.dim_b,
            fmt_real(rep.best_value)
        );
        if let Some(w) = ideal {
            let _ = write!(summary, "  (ideal - best = {:.3e})", w - rep.best_value);
        }
        summary.push('\n');
    }
    let mut out = Outcome::new("seesaw", table, m);
    out.extras.push((
        "seesaw_report.json".to_string(),
        serde_json::to_string_pretty(&reports.iter().map(|r| r.summary_json()).collect::<Vec<_>>())? + "\n",
    ));
    out.summary = summary;
    Ok(out)
}

pub fn cmd_classical(game_ref: &str) -> Result<Outcome> {
    let g = resolve_game(game_ref)?;
    let mut m = RunManifest::new("classical");
    m.param("game", game_ref);
    note_input(&mut m, "game", &g.file)?;
    let v = classical_value(&g.game)?;
    let mut table = Table::new(&["game", "classical_value"]);
    table.push(vec![g.game.name.as_str().into(), v.into()]);
    let mut out = Outcome::new("classical", table, m);
    out.summary = format!("classical value = {}\n", fmt_real(v));
    Ok(out)
}

pub fn cmd_export(game: Option<&str>, strategy: Option<&str>, for_game: Option<&str>) -> Result<Outcome> {
    let mut m = RunManifest::new("export");
    let (stem, doc) = match (game, strategy) {
        (Some(gr), None) => {
            m.param("game", gr);
            let g = resolve_game(gr)?;
            note_input(&mut m, "game", &g.file)?;
            ("game", serde_json::to_string_pretty(&g.game.to_file())?)
        }
        (None, Some(sr)) => {
            m.param("strategy", sr);
            let g = for_game.map(resolve_game).transpose()?;
            let s = resolve_strategy(sr, g.as_ref().map(|g| &g.game))?;
            note_input(&mut m, "strategy", &s.file)?;
            ("strategy", serde_json::to_string(&s.strategy.to_file())?)
        }
        _ => return Err(Error::invalid("export needs exactly one of --game or --strategy")),
    };
    let mut out = Outcome::new(stem, Table::default(), m);
    out.document = Some(doc + "\n");
    Ok(out)
}

/// Apply `BELLFORGE_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("BELLFORGE_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("BELLFORGE_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::invalid("BELLFORGE_THREADS must be at least 1"));
        }
        // a pool may already exist when embedded; keeping it is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Run a parsed command line and write its outputs. Returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = configure_threads().and_then(|()| run(&cli.command)).and_then(|mut outcome| {
        eprint!("{}", outcome.summary);
        let format: Format = cli.format.into();
        if let Some(doc) = outcome.document.take() {
            match &cli.out {
                Some(dir) => {
                    let extras = vec![(format!("{}.json", outcome.stem), doc)];
                    for p in write_run(dir, &outcome.stem, None, format, &mut outcome.manifest, &extras)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => print!("{doc}"),
            }
            return Ok(());
        }
        match &cli.out {
            Some(dir) => {
                let written = write_run(
                    dir,
                    &outcome.stem,
                    Some(&outcome.table),
                    format,
                    &mut outcome.manifest,
                    &outcome.extras,
                )?;
                for p in written {
                    eprintln!("wrote {}", p.display());
                }
            }
            None => {
                if !outcome.extras.is_empty() && outcome.stem == "curve" {
                    return Err(Error::invalid("--plot needs --out"));
                }
                let digest = outcome.manifest.digest();
                match format {
                    Format::Csv => print!("{}", outcome.table.to_csv(&digest)),
                    Format::Json => print!("{}", outcome.table.to_json(&digest)),
                }
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_range_is_geometric() {
        assert_eq!(parse_d_range("1:16").unwrap(), vec![1, 2, 4, 8, 16]);
        assert_eq!(parse_d_range("3:100:10").unwrap(), vec![3, 30]);
        assert!(parse_d_range("0:4").is_err());
        assert!(parse_d_range("4:2").is_err());
        assert!(parse_d_range("1:4:1").is_err());
        assert!(parse_d_range("1").is_err());
    }

    #[test]
    fn d_list_sorted() {
        let sel = DSelection {
            d: vec![8, 2, 4, 2],
            d_range: None,
        };
        assert_eq!(sel.resolve().unwrap(), vec![2, 4, 8]);
    }

    #[test]
    fn refs_resolve() {
        let g = resolve_game("builtin:tchsh:alpha=1").unwrap().game;
        assert_eq!(g.shape(), (2, 2, 2, 2));
        assert!(resolve_game("builtin:tchsh:alpha=0.5:flipped").is_ok());
        assert!(resolve_game("builtin:tchsh:beta=0.4").is_ok());
        assert!(resolve_game("builtin:emb").unwrap().emb_map.is_some());
        assert!(matches!(resolve_game("builtin:nope"), Err(Error::UnresolvedRef(_))));
        assert!(matches!(resolve_game("/no/such/file.json"), Err(Error::UnresolvedRef(_))));
        assert!(resolve_strategy("builtin:trivial", None).is_err());
        assert!(resolve_strategy("builtin:trivial", Some(&g)).is_ok());
        assert_eq!(resolve_strategy("builtin:emb:d=2", None).unwrap().emb_d, Some(2));
        assert!(resolve_strategy("builtin:emb:k=2", None).is_err());
    }

    #[test]
    fn value_of_chsh() {
        let out = cmd_value("builtin:tchsh:alpha=1", "builtin:tchsh:alpha=1").unwrap();
        let v = out.table.reals("value").unwrap()[0];
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn classical_chsh_is_half() {
        let out = cmd_classical("builtin:tchsh:alpha=1").unwrap();
        assert_eq!(out.table.reals("classical_value").unwrap(), vec![0.5]);
    }
}
