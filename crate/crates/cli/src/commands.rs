//! Subcommand implementations.

use ionqec_core::analytics::budget;
use ionqec_core::circuit::{insert_refocussing, lower_cnots, merge_rotations, IonLayout};
use ionqec_core::estimator::{loglog_fit, pseudo_threshold, SweepAxis};
use ionqec_core::noise::{CrosstalkMode, NoiseParams};
use toml::{Table, Value};

use crate::config::{self, RunSettings};
use crate::output::{self, num, CsvTable, NOISE_COLUMNS};
use crate::runner::{self, Estimate, Method};
use crate::{circuit_text, Cli, CliError, Command};

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Presets => {
            for (name, text) in crate::presets::PRESETS {
                let about = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                println!("{name:16} {about}");
            }
            Ok(())
        }
        Command::Compile { input, refocus, layout } => compile(input, *refocus, layout, cli),
        Command::Analyze => analyze(&effective_config(cli, false)?, cli),
        Command::Simulate => simulate(&effective_config(cli, true)?, cli),
        Command::Sweep => sweep(&effective_config(cli, true)?, cli),
        Command::Paths => paths(&effective_config(cli, true)?, cli),
    }
}

fn merge(into: &mut Table, from: Table) {
    for (k, v) in from {
        match (into.get_mut(&k), v) {
            (Some(Value::Table(a)), Value::Table(b)) => merge(a, b),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

/// Preset, then config file, then `--set`, then dedicated flags.
pub fn effective_config(cli: &Cli, simulation: bool) -> Result<Table, CliError> {
    let mut t = Table::new();
    if let Some(name) = &cli.preset {
        let text = crate::presets::get(name).ok_or_else(|| CliError::Config(format!("unknown preset `{name}`")))?;
        merge(&mut t, config::parse(text).map_err(CliError::Config)?);
    }
    if let Some(path) = &cli.config {
        merge(&mut t, config::load(path)?);
    }
    for s in &cli.set {
        config::apply_override(&mut t, s)?;
    }
    if simulation {
        if let Some(seed) = cli.seed {
            let seed = i64::try_from(seed).map_err(|_| CliError::Config("--seed must be below 2^63".into()))?;
            config::set(&mut t, "run", "seed", Value::Integer(seed));
        }
        if let Some(b) = &cli.backend {
            config::BackendChoice::parse(b)?;
            config::set(&mut t, "run", "backend", Value::String(b.clone()));
        }
        config::check_keys(&t, &["run", "noise", "durations", "sweep"])?;
    } else {
        config::check_keys(&t, &["budget"])?;
    }
    Ok(t)
}

fn estimate_columns(first: &[&str]) -> Vec<String> {
    let mut c: Vec<String> = first.iter().map(|s| s.to_string()).collect();
    c.extend(
        ["backend", "p_log", "err", "n_samples", "failures", "capped", "zero_failure_bound"]
            .iter()
            .map(|s| s.to_string()),
    );
    c
}

fn estimate_fields(e: &Estimate) -> Vec<String> {
    let x = &e.estimate;
    vec![
        e.method.as_str().to_string(),
        num(x.p_log),
        num(x.err),
        x.n_samples.to_string(),
        x.failures.to_string(),
        x.capped.to_string(),
        x.zero_failure_bound.map(num).unwrap_or_default(),
    ]
}

fn with_noise_columns(mut c: Vec<String>) -> Vec<String> {
    c.extend(NOISE_COLUMNS.iter().map(|s| s.to_string()));
    c.push("config_hash".into());
    c
}

fn simulate(t: &Table, cli: &Cli) -> Result<(), CliError> {
    let params = config::noise(t)?;
    let run = config::run_settings(t)?;
    let method = runner::resolve(run.backend, &params)?;
    let protocol = runner::protocol(params, config::durations(t)?)?;
    let hash = output::config_hash(t);
    let mut table = CsvTable::new(with_noise_columns(estimate_columns(&["target"])));
    for &target in &run.targets {
        let e = runner::estimate(&protocol, target, method, &run)?;
        eprintln!(
            "{:5} p_log = {:.4e} ± {:.2e} ({} samples, {})",
            target.as_str(),
            e.estimate.p_log,
            e.estimate.err,
            e.estimate.n_samples,
            method.as_str()
        );
        let mut row = vec![target.as_str().to_string()];
        row.extend(estimate_fields(&e));
        row.extend(output::noise_fields(&params));
        row.push(hash.clone());
        table.rows.push(row);
    }
    output::emit(&table.render(&output::header("simulate", t))?, cli.out.as_deref())
}

fn incoherent_partner(mode: CrosstalkMode) -> Option<CrosstalkMode> {
    match mode {
        CrosstalkMode::EntanglingCoherent => Some(CrosstalkMode::EntanglingIncoherent),
        CrosstalkMode::StarkCoherent => Some(CrosstalkMode::StarkIncoherent),
        _ => None,
    }
}

struct Row {
    series: usize,
    target: &'static str,
    x: f64,
    params: NoiseParams,
    estimate: Estimate,
}

fn run_sweep(t: &Table, run: &RunSettings) -> Result<(config::SweepSpec, Vec<Row>), CliError> {
    let base = config::noise(t)?;
    let durations = config::durations(t)?;
    let spec = config::sweep_spec(t, &base)?;
    let mut methods = Vec::new();
    for s in &spec.series {
        for &x in &spec.grid {
            let p = spec.axis.apply(&s.params, x);
            p.validate().map_err(|e| CliError::Config(format!("series {}: {e}", s.label)))?;
            methods.push(runner::resolve(run.backend, &p)?);
        }
    }
    let mut rows = Vec::new();
    let mut m = methods.into_iter();
    for (i, s) in spec.series.iter().enumerate() {
        for &x in &spec.grid {
            let params = spec.axis.apply(&s.params, x);
            let method = m.next().unwrap_or(Method::Tableau);
            let protocol = runner::protocol(params, durations)?;
            for &target in &run.targets {
                let estimate = runner::estimate(&protocol, target, method, run)?;
                eprintln!(
                    "[{}] {} {}={:.3e}: p_log = {:.4e} ± {:.2e}",
                    s.label,
                    target.as_str(),
                    spec.axis.as_str(),
                    x,
                    estimate.estimate.p_log,
                    estimate.estimate.err
                );
                rows.push(Row {
                    series: i,
                    target: target.as_str(),
                    x,
                    params,
                    estimate,
                });
            }
        }
    }
    Ok((spec, rows))
}

fn sweep(t: &Table, cli: &Cli) -> Result<(), CliError> {
    let run = config::run_settings(t)?;
    let (spec, rows) = run_sweep(t, &run)?;
    let hash = output::config_hash(t);
    let mut cols = estimate_columns(&["series", "target", "axis", "x"]);
    cols.push("coherent_ratio".into());
    let mut table = CsvTable::new(with_noise_columns(cols));
    for r in &rows {
        let ratio = incoherent_partner(r.params.crosstalk_mode).and_then(|partner| {
            rows.iter()
                .find(|o| {
                    o.target == r.target && o.x == r.x && o.params == NoiseParams { crosstalk_mode: partner, ..r.params }
                })
                .filter(|o| o.estimate.estimate.p_log > 0.0)
                .map(|o| r.estimate.estimate.p_log / o.estimate.estimate.p_log)
        });
        let mut row = vec![spec.series[r.series].label.clone(), r.target.to_string(), spec.axis.as_str().to_string(), num(r.x)];
        row.extend(estimate_fields(&r.estimate));
        row.push(ratio.map(num).unwrap_or_default());
        row.extend(output::noise_fields(&r.params));
        row.push(hash.clone());
        table.rows.push(row);
    }
    for (i, s) in spec.series.iter().enumerate() {
        for target in &run.targets {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.series == i && r.target == target.as_str())
                .map(|r| (r.x, r.estimate.estimate.p_log))
                .collect();
            let line = match spec.axis {
                SweepAxis::PMs => format!(
                    "pseudo_threshold series={} target={} value={}",
                    s.label,
                    target.as_str(),
                    pseudo_threshold(&pts).map_or_else(|| "absent".to_string(), num)
                ),
                SweepAxis::PC => format!(
                    "loglog_slope series={} target={} value={}",
                    s.label,
                    target.as_str(),
                    loglog_fit(&pts).map_or_else(|| "undefined".to_string(), |(b, _, sb)| format!("{} sigma={}", num(b), num(sb)))
                ),
            };
            eprintln!("{line}");
            table.footer.push(line);
        }
    }
    output::emit(&table.render(&output::header("sweep", t))?, cli.out.as_deref())
}

fn paths(t: &Table, cli: &Cli) -> Result<(), CliError> {
    let params = config::noise(t)?;
    let run = config::run_settings(t)?;
    runner::resolve(config::BackendChoice::Paths, &params)?;
    let protocol = runner::protocol(params, config::durations(t)?)?;
    let hash = output::config_hash(t);
    let cols: Vec<String> = ["target", "p_logical", "accepted_weight", "restart_weight", "pruned_weight", "leaves"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut table = CsvTable::new(with_noise_columns(cols));
    for &target in &run.targets {
        let e = runner::estimate(&protocol, target, Method::Paths, &run)?;
        let Some(p) = e.paths else { continue };
        eprintln!("{:5} p_logical = {:.6e} over {} leaves", target.as_str(), p.p_logical, p.leaves);
        let mut row = vec![
            target.as_str().to_string(),
            num(p.p_logical),
            num(p.accepted_weight),
            num(p.restart_weight),
            num(p.pruned_weight),
            p.leaves.to_string(),
        ];
        row.extend(output::noise_fields(&params));
        row.push(hash.clone());
        table.rows.push(row);
    }
    output::emit(&table.render(&output::header("paths", t))?, cli.out.as_deref())
}

fn analyze(t: &Table, cli: &Cli) -> Result<(), CliError> {
    let input = config::budget_input(t)?;
    let b = budget(&input).map_err(|e| CliError::Config(e.to_string()))?;
    let mut table = CsvTable::new(vec!["quantity".into(), "value".into()]);
    let rows: [(&str, String); 13] = [
        ("chi", num(b.chi)),
        ("eps_ct_ms", num(b.eps_ct_ms)),
        ("eps_ct_off", num(b.eps_ct_off)),
        ("eps_ct_dw", num(b.eps_ct_dw)),
        ("eps_ct_loops", num(b.eps_ct_loops)),
        ("eps_ct_deph", num(b.eps_ct_deph)),
        ("eps_ct_int", num(b.eps_ct_int)),
        ("eps_ct_total", num(b.eps_ct_total)),
        ("total_clamped", b.total_clamped.to_string()),
        ("n_ms", b.n_ms.to_string()),
        ("n_ct", b.n_ct.to_string()),
        ("p_ms", num(b.p_ms)),
        ("p_ct", num(b.p_ct)),
    ];
    for (k, v) in rows {
        table.rows.push(vec![k.into(), v]);
    }
    if b.total_clamped {
        let w = "warning: total crosstalk infidelity was negative and is clamped at 0".to_string();
        eprintln!("{w}");
        table.footer.push(w);
    }
    output::emit(&table.render(&output::header("analyze", t))?, cli.out.as_deref())
}

fn compile(input: &std::path::Path, refocus: bool, layout: &str, cli: &Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let c = circuit_text::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let layout = match layout {
        "linear" => IonLayout::linear(c.num_ions()),
        "steane" => IonLayout::steane(),
        _ => return Err(CliError::Config(format!("unknown layout `{layout}` (linear, steane)"))),
    };
    if c.num_ions() != layout.num_ions() {
        return Err(CliError::Config(format!("circuit declares {} ions, layout has {}", c.num_ions(), layout.num_ions())));
    }
    let mut native = merge_rotations(&lower_cnots(&c));
    if refocus {
        native = insert_refocussing(&native, &layout);
    }
    output::emit(&circuit_text::format(&native), cli.out.as_deref())
}
