//! Command implementations behind the thin clap layer in `main.rs`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use tractlab_core::complexity::{
    approx_number, info_complexity, std_complexity_bound, Criterion, SearchOutcome,
};
use tractlab_core::recovery::{run_experiment, ConcentrationPolicy, ExperimentConfig};
use tractlab_core::spectrum::Spectrum;
use tractlab_core::tractability::{
    classify_exp_korobov, classify_weighted_korobov, Mode, Notion, TractabilityVerdict,
};
use tractlab_core::KernelModel;

use crate::model_file::load_model;
use crate::output::{f17, manifest_path, OutputTarget, RunManifest, Table};
use crate::UsageError;

/// Shared per-invocation context: the raw argv (recorded into the
/// manifest), global flags, and the wall-clock start.
pub struct RunCtx {
    pub argv: Vec<String>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub json: bool,
    started: Instant,
}

impl RunCtx {
    pub fn new(argv: Vec<String>, model: Option<PathBuf>, out: Option<PathBuf>, seed: u64, json: bool) -> Self {
        RunCtx { argv, model, out, seed, json, started: Instant::now() }
    }

    fn require_model(&self) -> Result<(KernelModel, Vec<u8>)> {
        let path = self
            .model
            .as_ref()
            .ok_or_else(|| anyhow!(UsageError("--model <file> is required".into())))?;
        let model = load_model(path)?;
        let bytes = std::fs::read(path)
            .with_context(|| format!("cannot read model file {}", path.display()))?;
        Ok((model, bytes))
    }

    /// Write the table to the target and, for file outputs, the manifest.
    fn emit(&self, table: &Table, config_bytes: &[u8]) -> Result<()> {
        if self.json && self.out.is_none() {
            bail!(UsageError("--json needs --out (stdout runs have no mirror)".into()));
        }
        let target = OutputTarget { out: self.out.clone(), json_mirror: self.json };
        let written = target.write(table)?;
        if let Some(out) = &self.out {
            let wall = self.started.elapsed().as_millis();
            let manifest =
                RunManifest::new(self.argv.clone(), config_bytes, self.seed, wall, &written)?;
            manifest.save(&manifest_path(out))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

pub fn cmd_spectrum(ctx: &RunCtx, count: usize) -> Result<i32> {
    if count == 0 {
        bail!(UsageError("--count must be at least 1".into()));
    }
    let (model, config_bytes) = ctx.require_model()?;
    let d = model.d();
    let mut spectrum = Spectrum::new(model)?;
    let mut header: Vec<String> = vec!["rank".into(), "value".into()];
    for j in 1..=d {
        header.push(format!("h_{j}"));
    }
    let mut table =
        Table { header, rows: Vec::with_capacity(count) };
    for entry in spectrum.entries(count) {
        let mut row = vec![entry.rank.to_string(), f17(entry.value)];
        row.extend(entry.index.iter().map(|h| h.to_string()));
        table.push(row);
    }
    ctx.emit(&table, &config_bytes)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// complexity
// ---------------------------------------------------------------------------

pub struct ComplexityParams {
    pub eps_grid: String,
    pub eps_count: usize,
    pub criterion: String,
    pub c1: u64,
    pub c2: f64,
    pub cap: u64,
}

/// Parse an epsilon grid: either a single value or `start:end:scale` with
/// scale `log` or `lin`; both endpoints are included.
pub fn parse_eps_grid(spec: &str, count: usize) -> Result<Vec<f64>> {
    let parse_val = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| anyhow!(UsageError(format!("bad epsilon value `{s}`"))))?;
        if !(v > 0.0) || !v.is_finite() {
            bail!(UsageError(format!("epsilon must be positive and finite, got `{s}`")));
        }
        Ok(v)
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![parse_val(single)?]),
        [start, end, scale] => {
            let a = parse_val(start)?;
            let b = parse_val(end)?;
            if count < 2 {
                bail!(UsageError("--eps-count must be at least 2 for a range".into()));
            }
            let log_scale = match *scale {
                "log" => true,
                "lin" => false,
                other => bail!(UsageError(format!(
                    "bad grid scale `{other}` (expected log or lin)"
                ))),
            };
            let n = count as f64 - 1.0;
            let grid = (0..count)
                .map(|i| {
                    let t = i as f64 / n;
                    if log_scale {
                        (a.ln() + (b.ln() - a.ln()) * t).exp()
                    } else {
                        a + (b - a) * t
                    }
                })
                .collect();
            Ok(grid)
        }
        _ => bail!(UsageError(format!(
            "bad epsilon grid `{spec}` (expected a value or start:end:scale)"
        ))),
    }
}

fn parse_criterion(name: &str) -> Result<Criterion> {
    match name.to_ascii_lowercase().as_str() {
        "abs" => Ok(Criterion::Abs),
        "nor" => Ok(Criterion::Nor),
        other => bail!(UsageError(format!("bad criterion `{other}` (expected abs or nor)"))),
    }
}

pub fn cmd_complexity(ctx: &RunCtx, params: &ComplexityParams) -> Result<i32> {
    let grid = parse_eps_grid(&params.eps_grid, params.eps_count)?;
    let criterion = parse_criterion(&params.criterion)?;
    let (model, config_bytes) = ctx.require_model()?;
    let mut spectrum = Spectrum::new(model)?;
    let mut table = Table::new(&["epsilon", "n_all", "n_std_bound", "a_{n+1}", "status"]);
    let mut any_capped = false;
    for &eps in &grid {
        let all = info_complexity(&mut spectrum, eps, criterion, params.cap)?;
        let std_bound =
            std_complexity_bound(&mut spectrum, eps, criterion, params.c1, params.c2, params.cap)?;
        let (n_all_cell, a_cell) = match all {
            SearchOutcome::Found(n) => {
                (n.to_string(), f17(approx_number(&mut spectrum, n)))
            }
            SearchOutcome::CapExceeded { tail_at_cap, .. } => {
                (String::new(), f17(tail_at_cap.sqrt()))
            }
        };
        let n_std_cell = match std_bound {
            SearchOutcome::Found(n) => n.to_string(),
            SearchOutcome::CapExceeded { .. } => String::new(),
        };
        let capped = all.found().is_none() || std_bound.found().is_none();
        any_capped |= capped;
        table.push(vec![
            f17(eps),
            n_all_cell,
            n_std_cell,
            a_cell,
            if capped { "cap" } else { "ok" }.into(),
        ]);
    }
    ctx.emit(&table, &config_bytes)?;
    if any_capped {
        eprintln!("complexity: some rows exceeded the search cap {}", params.cap);
        Ok(3)
    } else {
        Ok(0)
    }
}

// ---------------------------------------------------------------------------
// tract
// ---------------------------------------------------------------------------

pub struct TractParams {
    pub sweep: bool,
    pub notion: Option<String>,
    pub mode: Option<String>,
    pub criterion: Option<String>,
    pub s: Option<f64>,
    pub t: Option<f64>,
}

fn parse_mode(name: &str) -> Result<Mode> {
    match name.to_ascii_lowercase().as_str() {
        "alg" => Ok(Mode::Alg),
        "exp" => Ok(Mode::Exp),
        other => bail!(UsageError(format!("bad mode `{other}` (expected alg or exp)"))),
    }
}

fn parse_notion(name: &str, s: Option<f64>, t: Option<f64>) -> Result<Notion> {
    let base = name.to_ascii_lowercase().replace('-', "_");
    let notion = match base.as_str() {
        "spt" => Notion::Spt,
        "pt" => Notion::Pt,
        "qpt" => Notion::Qpt,
        "uwt" => Notion::Uwt,
        "wt" => Notion::Wt,
        "st_wt" | "stwt" => {
            let (s, t) = match (s, t) {
                (Some(s), Some(t)) => (s, t),
                _ => bail!(UsageError("--notion st_wt needs --s and --t".into())),
            };
            return Ok(Notion::StWt { s, t });
        }
        other => bail!(UsageError(format!(
            "bad notion `{other}` (expected spt, pt, qpt, uwt, wt, or st_wt)"
        ))),
    };
    if s.is_some() || t.is_some() {
        bail!(UsageError("--s/--t only apply to --notion st_wt".into()));
    }
    Ok(notion)
}

fn classify(model: &KernelModel, mode: Mode, notion: Notion, criterion: Criterion) -> Result<TractabilityVerdict> {
    let verdict = match model {
        KernelModel::WeightedKorobov { r, g, .. } => {
            classify_weighted_korobov(g, r, mode, notion, criterion)?
        }
        KernelModel::ExpKorobov { a, b, omega, .. } => {
            classify_exp_korobov(a, b, *omega, mode, notion, criterion)?
        }
    };
    Ok(verdict)
}

fn verdict_row(family: &str, verdict: &TractabilityVerdict) -> Vec<String> {
    let (s_cell, t_cell) = match verdict.notion {
        Notion::StWt { s, t } => (f17(s), f17(t)),
        _ => (String::new(), String::new()),
    };
    vec![
        family.to_string(),
        verdict.mode.name().to_string(),
        verdict.criterion.name().to_string(),
        verdict.notion.name().to_string(),
        s_cell,
        t_cell,
        verdict.holds.name().to_string(),
        verdict.certificate.quantity.map(f17).unwrap_or_default(),
        verdict.certificate.detail.clone(),
    ]
}

const TRACT_HEADER: [&str; 9] =
    ["family", "mode", "criterion", "notion", "s", "t", "holds", "quantity", "detail"];

pub fn cmd_tract(ctx: &RunCtx, params: &TractParams) -> Result<i32> {
    let (model, config_bytes) = ctx.require_model()?;
    let criterion = parse_criterion(params.criterion.as_deref().unwrap_or("abs"))?;
    let family = model.family_name();
    let mut table = Table::new(&TRACT_HEADER);
    if params.sweep {
        let modes = match params.mode.as_deref() {
            Some(m) => vec![parse_mode(m)?],
            None => vec![Mode::Alg, Mode::Exp],
        };
        let mut notions = vec![Notion::Spt, Notion::Pt, Notion::Qpt, Notion::Uwt, Notion::Wt];
        match (params.s, params.t) {
            (Some(s), Some(t)) => notions.push(Notion::StWt { s, t }),
            (None, None) => {}
            _ => bail!(UsageError("sweep takes --s and --t together or not at all".into())),
        }
        for &mode in &modes {
            for &notion in &notions {
                let verdict = classify(&model, mode, notion, criterion)?;
                table.push(verdict_row(family, &verdict));
            }
        }
    } else {
        let notion_name = params
            .notion
            .as_deref()
            .ok_or_else(|| anyhow!(UsageError("--notion is required for classify".into())))?;
        let notion = parse_notion(notion_name, params.s, params.t)?;
        let mode = parse_mode(params.mode.as_deref().unwrap_or("alg"))?;
        let verdict = classify(&model, mode, notion, criterion)?;
        table.push(verdict_row(family, &verdict));
    }
    ctx.emit(&table, &config_bytes)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// recover
// ---------------------------------------------------------------------------

pub struct RecoverParams {
    pub config: Option<PathBuf>,
    pub m: Option<String>,
    pub seeds: Option<usize>,
    pub beta: Option<f64>,
    pub subsample: Option<String>,
    pub factor: Option<f64>,
    pub lower: Option<f64>,
    pub grid: Option<usize>,
    pub concentration: Option<String>,
    pub timings: bool,
}

/// TOML mirror of the recover knobs; explicit flags win over file values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecoverFileConfig {
    model: Option<PathBuf>,
    m: Option<Vec<usize>>,
    seeds: Option<usize>,
    beta: Option<f64>,
    subsample: Option<String>,
    factor: Option<f64>,
    lower: Option<f64>,
    grid: Option<usize>,
    concentration: Option<String>,
    timings: Option<bool>,
}

fn parse_m_list(spec: &str) -> Result<Vec<usize>> {
    let values = spec
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!(UsageError(format!("bad m value `{}`", tok.trim()))))
        })
        .collect::<Result<Vec<usize>>>()?;
    if values.is_empty() || values.iter().any(|&m| m < 1) {
        bail!(UsageError("--m needs a comma-separated list of integers ≥ 1".into()));
    }
    Ok(values)
}

fn parse_on_off(name: &str, flag: &str) -> Result<bool> {
    match name.to_ascii_lowercase().as_str() {
        "on" => Ok(true),
        "off" => Ok(false),
        other => bail!(UsageError(format!("bad {flag} value `{other}` (expected on or off)"))),
    }
}

fn parse_concentration(name: &str) -> Result<ConcentrationPolicy> {
    match name.to_ascii_lowercase().as_str() {
        "off" => Ok(ConcentrationPolicy::Off),
        "first" => Ok(ConcentrationPolicy::FirstTrial),
        "all" => Ok(ConcentrationPolicy::All),
        other => bail!(UsageError(format!(
            "bad concentration policy `{other}` (expected off, first, or all)"
        ))),
    }
}

pub fn cmd_recover(ctx: &RunCtx, params: &RecoverParams) -> Result<i32> {
    let mut config_bytes = Vec::new();
    let file_cfg = match &params.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            config_bytes.extend_from_slice(text.as_bytes());
            toml::from_str::<RecoverFileConfig>(&text).map_err(|e| {
                anyhow!(UsageError(format!("config file {}: {e}", path.display())))
            })?
        }
        None => RecoverFileConfig::default(),
    };

    let model_path = ctx.model.clone().or(file_cfg.model);
    let ctx_with_model = RunCtx {
        argv: ctx.argv.clone(),
        model: model_path,
        out: ctx.out.clone(),
        seed: ctx.seed,
        json: ctx.json,
        started: ctx.started,
    };
    let (model, model_bytes) = ctx_with_model.require_model()?;
    config_bytes.extend_from_slice(&model_bytes);

    let m_values = match &params.m {
        Some(spec) => parse_m_list(spec)?,
        None => file_cfg.m.unwrap_or_else(|| vec![8, 16, 32]),
    };
    if m_values.is_empty() || m_values.iter().any(|&m| m < 1) {
        bail!(UsageError("m list needs integers ≥ 1".into()));
    }
    let seeds = params.seeds.or(file_cfg.seeds).unwrap_or(10);
    if seeds < 1 {
        bail!(UsageError("--seeds must be at least 1".into()));
    }
    let beta = params.beta.or(file_cfg.beta).unwrap_or(10.0);
    let subsample = parse_on_off(
        params.subsample.as_deref().or(file_cfg.subsample.as_deref()).unwrap_or("off"),
        "--subsample",
    )?;
    let factor = params.factor.or(file_cfg.factor).unwrap_or(40.0);
    let lower = params.lower.or(file_cfg.lower).unwrap_or(0.5);
    let grid = params.grid.or(file_cfg.grid).unwrap_or(64);
    let concentration = parse_concentration(
        params.concentration.as_deref().or(file_cfg.concentration.as_deref()).unwrap_or("first"),
    )?;
    let timings = params.timings || file_cfg.timings.unwrap_or(false);

    let mut config = ExperimentConfig::new(model);
    config.m_values = m_values;
    config.trials = seeds;
    config.master_seed = ctx.seed;
    config.beta = beta;
    config.subsample = subsample;
    config.subsample_factor = factor;
    config.subsample_lower_bound = lower;
    config.grid_per_dim = grid;
    config.concentration = concentration;

    let run = run_experiment(&config)?;

    let mut table =
        Table::new(&["m", "n", "J", "error", "a_{m+1}", "ratio", "concentration", "wall_ms"]);
    for report in &run.reports {
        table.push(vec![
            report.m.to_string(),
            report.n.to_string(),
            report.subset_size.unwrap_or(report.n).to_string(),
            f17(report.error),
            f17(report.benchmark),
            f17(report.ratio),
            report.concentration.map(f17).unwrap_or_default(),
            // Wall times are only printed on request: the default output
            // must be byte-reproducible across re-runs.
            if timings { report.wall_ms.to_string() } else { "0".to_string() },
        ]);
    }
    ctx_with_model.emit(&table, &config_bytes)?;
    if run.failures.is_empty() {
        Ok(0)
    } else {
        for failure in &run.failures {
            eprintln!(
                "recover: m={} trial={} failed: {}",
                failure.m, failure.trial, failure.error
            );
        }
        Ok(3)
    }
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

pub fn cmd_replay(
    manifest_file: &Path,
    rerun: impl Fn(&[String]) -> Result<i32>,
) -> Result<i32> {
    let manifest = RunManifest::load(manifest_file)?;
    match manifest.command.first().map(String::as_str) {
        None => bail!(UsageError("manifest records an empty command".into())),
        Some("replay") => bail!(UsageError("manifest records a replay; nothing to re-run".into())),
        Some(_) => {}
    }
    let inner = rerun(&manifest.command)?;
    let mut mismatched = false;
    for record in &manifest.outputs {
        let path = Path::new(&record.path);
        let fresh = crate::output::sha256_file(path)?;
        if fresh == record.sha256 {
            println!("replay: verified {}", record.path);
        } else {
            mismatched = true;
            println!("replay: MISMATCH {}", record.path);
        }
    }
    if mismatched {
        eprintln!("replay: outputs differ from the recorded run");
        Ok(3)
    } else {
        Ok(inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_grid_forms() {
        let single = parse_eps_grid("0.5", 50).unwrap();
        assert_eq!(single, vec![0.5]);
        let grid = parse_eps_grid("1e-1:1e-3:log", 3).unwrap();
        assert_eq!(grid.len(), 3);
        assert!((grid[0] - 1e-1).abs() < 1e-15);
        assert!((grid[1] - 1e-2).abs() < 1e-15);
        assert!((grid[2] - 1e-3).abs() < 1e-15);
        let lin = parse_eps_grid("0.1:0.3:lin", 3).unwrap();
        assert!((lin[1] - 0.2).abs() < 1e-15);
        assert!(parse_eps_grid("1:2", 5).is_err());
        assert!(parse_eps_grid("-1:2:log", 5).is_err());
        assert!(parse_eps_grid("1:2:cubic", 5).is_err());
    }

    #[test]
    fn m_list_parsing() {
        assert_eq!(parse_m_list("8,16,32").unwrap(), vec![8, 16, 32]);
        assert_eq!(parse_m_list(" 4 ").unwrap(), vec![4]);
        assert!(parse_m_list("8,zero").is_err());
        assert!(parse_m_list("0").is_err());
    }

    #[test]
    fn notion_parsing() {
        assert_eq!(parse_notion("SPT", None, None).unwrap(), Notion::Spt);
        assert!(matches!(
            parse_notion("st-wt", Some(1.0), Some(0.5), ).unwrap(),
            Notion::StWt { .. }
        ));
        assert!(parse_notion("st_wt", Some(1.0), None).is_err());
        assert!(parse_notion("wt", Some(1.0), Some(1.0)).is_err());
        assert!(parse_notion("mystery", None, None).is_err());
    }
}
