//! `shilov`: batch front end. Every run writes one JSON record and exits with
//! 0 (success), 1 (usage), 2 (precondition violated) or 3 (numerical failure).

mod cli;
mod commands;
mod config;
mod parse;
mod record;

use clap::error::ErrorKind as ClapKind;
use clap::Parser;
use cli::{Cli, Command, Global};
use commands::Failure;
use config::RunConfig;
use record::Record;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

const EXIT_USAGE: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn name(c: &Command) -> &'static str {
    match c {
        Command::Metric(_) => "metric",
        Command::ShilovCheck(_) => "shilov-check",
        Command::Orbit(_) => "orbit",
        Command::Jeval(_) => "jeval",
        Command::Jinv(_) => "jinv",
        Command::Witness(_) => "witness",
        Command::ProductDensity(_) => "product-density",
        Command::BroadCheck(_) => "broad-check",
        Command::Special(_) => "special",
        Command::Classpoly(_) => "classpoly",
        Command::Selftest(_) => "selftest",
    }
}

fn build_config(g: &Global) -> Result<RunConfig, String> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(m) = g.truncation {
        cfg.truncation = m;
    }
    if let Some(d) = g.orbit_depth {
        cfg.orbit_depth = d;
    }
    for t in &g.tolerances {
        let (k, v) = t.split_once('=').ok_or_else(|| format!("--tol {t:?}: expected NAME=VALUE"))?;
        let v = parse::real(v)?;
        cfg.tolerances.insert(k.trim().to_string(), v);
    }
    if let Some(o) = &g.output {
        cfg.output_path = Some(o.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(c: &Command, cfg: &RunConfig, rec: &mut Record) -> Result<(), Failure> {
    match c {
        Command::Metric(a) => commands::metric(a, cfg, rec),
        Command::ShilovCheck(a) => commands::shilov_check(a, cfg, rec),
        Command::Orbit(a) => commands::orbit(a, cfg, rec),
        Command::Jeval(a) => commands::jeval(a, cfg, rec),
        Command::Jinv(a) => commands::jinv(a, cfg, rec),
        Command::Witness(a) => commands::witness(a, cfg, rec),
        Command::ProductDensity(a) => commands::product_density(a, cfg, rec),
        Command::BroadCheck(a) => commands::broad_check(a, cfg, rec),
        Command::Special(a) => commands::special(a, cfg, rec),
        Command::Classpoly(a) => commands::classpoly(a, cfg, rec),
        Command::Selftest(a) => commands::selftest(a, cfg, rec),
    }
}

fn config_value(cfg: &RunConfig) -> serde_json::Map<String, serde_json::Value> {
    let mut m = serde_json::Map::new();
    m.insert("truncation".into(), cfg.truncation.into());
    m.insert("orbit_depth".into(), cfg.orbit_depth.into());
    m.insert("height".into(), cfg.height.into());
    m.insert("coef_bound".into(), cfg.coef_bound.into());
    m.insert("seed".into(), cfg.seed.into());
    m.insert("hodge_denom_bound".into(), cfg.hodge_denom_bound.into());
    m.insert(
        "tolerances".into(),
        serde_json::Value::Object(cfg.tolerances.iter().map(|(k, v)| (k.clone(), record::real(*v))).collect()),
    );
    m
}

fn emit(value: &serde_json::Value, path: Option<&str>) -> std::io::Result<()> {
    let mut line = serde_json::to_string(value)?;
    line.push('\n');
    match path {
        Some(p) => std::fs::write(p, line),
        None => std::io::stdout().lock().write_all(line.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let start = Instant::now();
    let command = name(&cli.command);
    let mut rec = Record::new(command);
    let cfg = match build_config(&cli.global) {
        Ok(c) => c,
        Err(m) => {
            eprintln!("error: {m}");
            let out = cli.global.output.as_ref().map(|p| p.display().to_string());
            let v = rec.finish("error", Some(("precondition", m)), start.elapsed().as_secs_f64() * 1e3);
            let _ = emit(&v, out.as_deref());
            return ExitCode::from(EXIT_PRECONDITION);
        }
    };
    rec.config = config_value(&cfg);
    let result = dispatch(&cli.command, &cfg, &mut rec);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let (value, code) = match result {
        Ok(()) => (rec.finish("ok", None, elapsed), ExitCode::SUCCESS),
        Err(Failure::Precondition(m)) => {
            eprintln!("error: {m}");
            (rec.finish("error", Some(("precondition", m)), elapsed), ExitCode::from(EXIT_PRECONDITION))
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            (rec.finish("error", Some(("numerical", m)), elapsed), ExitCode::from(EXIT_NUMERICAL))
        }
    };
    if let Err(e) = emit(&value, cfg.output_path.as_deref()) {
        eprintln!("error: cannot write result: {e}");
        return ExitCode::from(EXIT_NUMERICAL);
    }
    code
}
