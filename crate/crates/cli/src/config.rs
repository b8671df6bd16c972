//! TOML run configuration, `--set` overrides and typed extraction.

use std::path::Path;

use ionqec_core::analytics::MsBudgetInput;
use ionqec_core::circuit::DurationTable;
use ionqec_core::estimator::{log_grid, AdaptivePolicy, SweepAxis};
use ionqec_core::noise::NoiseParams;
use ionqec_core::steane::Target;
use toml::{Table, Value};

use crate::CliError;

/// Prefix of the header lines that carry the effective configuration.
pub const CONFIG_LINE: &str = "#! ";

const RUN_KEYS: &[&str] = &["seed", "backend", "targets", "samples", "adaptive", "rel_err", "initial", "cap", "prune", "chunk"];
const NOISE_KEYS: &[&str] = &[
    "p_1q",
    "p_ms",
    "p_c",
    "crosstalk_mode",
    "refocussing",
    "p_sp",
    "p_m",
    "prep_leak_fraction",
    "t1",
    "t2",
    "leak_branching",
    "p_sg",
];
const DURATION_KEYS: &[&str] = &["ms_gate", "one_qubit", "measurement", "reset", "recool", "repump"];
const SWEEP_KEYS: &[&str] = &["axis", "lo", "hi", "per_decade", "values", "series"];
const BUDGET_KEYS: &[&str] = &[
    "n", "m", "omega_ratios", "omega", "delta", "eta_n", "omega_n", "nbar_n", "m_jn", "t_g", "t2", "gamma_i", "eps_ms",
];

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Reads a TOML file, or the configuration echoed in the header of a CSV
/// file written by this tool.
pub fn load(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<Table, String> {
    let body: String = if text.lines().any(|l| l.starts_with(CONFIG_LINE)) {
        text.lines()
            .filter_map(|l| l.strip_prefix(CONFIG_LINE))
            .map(|l| format!("{l}\n"))
            .collect()
    } else {
        text.to_string()
    };
    body.parse::<Table>().map_err(|e| e.to_string())
}

/// Applies `section.key=value`. The value is read as a TOML value, falling
/// back to a bare string.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{spec}` is not key=value")))?;
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("bad override key `{key}`")));
    }
    let mut t = table;
    for part in &path[..path.len() - 1] {
        t = t
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| config_err(format!("`{part}` is not a table")))?;
    }
    t.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}

pub fn set(table: &mut Table, section: &str, key: &str, value: Value) {
    let t = table
        .entry(section.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    if let Some(t) = t.as_table_mut() {
        t.insert(key.to_string(), value);
    }
}

/// Rejects unknown sections and keys.
pub fn check_keys(table: &Table, sections: &[&str]) -> Result<(), CliError> {
    for (name, value) in table {
        let allowed = match name.as_str() {
            "run" => RUN_KEYS,
            "noise" => NOISE_KEYS,
            "durations" => DURATION_KEYS,
            "sweep" => SWEEP_KEYS,
            "budget" => BUDGET_KEYS,
            _ => return Err(config_err(format!("unknown section [{name}]"))),
        };
        if !sections.contains(&name.as_str()) {
            return Err(config_err(format!("section [{name}] is not used by this command")));
        }
        let t = value
            .as_table()
            .ok_or_else(|| config_err(format!("`{name}` must be a table")))?;
        if let Some(k) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(config_err(format!("unknown key `{name}.{k}`")));
        }
    }
    Ok(())
}

fn section<'a>(table: &'a Table, name: &str) -> Option<&'a Table> {
    table.get(name).and_then(Value::as_table)
}

fn float(v: &Value, key: &str) -> Result<f64, CliError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(config_err(format!("`{key}` must be a number"))),
    }
}

fn uint(v: &Value, key: &str) -> Result<u64, CliError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::Float(f) if *f >= 0.0 && f.fract() == 0.0 && *f < 1.8e19 => Ok(*f as u64),
        _ => Err(config_err(format!("`{key}` must be a non-negative integer"))),
    }
}

fn string<'a>(v: &'a Value, key: &str) -> Result<&'a str, CliError> {
    v.as_str().ok_or_else(|| config_err(format!("`{key}` must be a string")))
}

fn floats(v: &Value, key: &str) -> Result<Vec<f64>, CliError> {
    v.as_array()
        .ok_or_else(|| config_err(format!("`{key}` must be an array")))?
        .iter()
        .map(|x| float(x, key))
        .collect()
}

/// Fills `params` from a table of noise keys.
pub fn apply_noise(params: &mut NoiseParams, t: &Table, prefix: &str) -> Result<(), CliError> {
    for (k, v) in t {
        let key = format!("{prefix}.{k}");
        match k.as_str() {
            "p_1q" => params.p_1q = float(v, &key)?,
            "p_ms" => params.p_ms = float(v, &key)?,
            "p_c" => params.p_c = float(v, &key)?,
            "crosstalk_mode" => {
                params.crosstalk_mode = string(v, &key)?
                    .parse()
                    .map_err(|_| config_err(format!("unknown crosstalk mode in `{key}`")))?
            }
            "refocussing" => params.refocussing = v.as_bool().ok_or_else(|| config_err(format!("`{key}` must be a boolean")))?,
            "p_sp" => params.p_sp = float(v, &key)?,
            "p_m" => params.p_m = float(v, &key)?,
            "prep_leak_fraction" => params.prep_leak_fraction = float(v, &key)?,
            "t1" => params.t1 = float(v, &key)?,
            "t2" => params.t2 = float(v, &key)?,
            "leak_branching" => params.leak_branching = float(v, &key)?,
            "p_sg" => params.p_sg = float(v, &key)?,
            _ => return Err(config_err(format!("unknown key `{key}`"))),
        }
    }
    params
        .validate()
        .map_err(|e| config_err(format!("[{prefix}] {e}")))
}

pub fn noise(table: &Table) -> Result<NoiseParams, CliError> {
    let mut p = NoiseParams::default();
    if let Some(t) = section(table, "noise") {
        apply_noise(&mut p, t, "noise")?;
    }
    p.validate().map_err(|e| config_err(e.to_string()))?;
    Ok(p)
}

pub fn durations(table: &Table) -> Result<DurationTable, CliError> {
    let mut d = DurationTable::default();
    if let Some(t) = section(table, "durations") {
        for (k, v) in t {
            let x = float(v, &format!("durations.{k}"))?;
            match k.as_str() {
                "ms_gate" => d.ms_gate = x,
                "one_qubit" => d.one_qubit = x,
                "measurement" => d.measurement = x,
                "reset" => d.reset = x,
                "recool" => d.recool = x,
                "repump" => d.repump = x,
                _ => return Err(config_err(format!("unknown key `durations.{k}`"))),
            }
        }
    }
    if !d.is_valid() {
        return Err(config_err("durations must be finite and non-negative"));
    }
    Ok(d)
}

/// Simulator selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendChoice {
    /// Tableau for stochastic noise, path enumeration for coherent-only
    /// noise, dense otherwise.
    Auto,
    Tableau,
    Dense,
    Paths,
}

impl BackendChoice {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "auto" => Ok(Self::Auto),
            "tableau" => Ok(Self::Tableau),
            "dense" => Ok(Self::Dense),
            "paths" => Ok(Self::Paths),
            _ => Err(config_err(format!("unknown backend `{s}` (auto, tableau, dense, paths)"))),
        }
    }
}

/// Sample budget for Monte Carlo estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    Fixed(u64),
    Adaptive(AdaptivePolicy),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub seed: u64,
    pub backend: BackendChoice,
    pub targets: Vec<Target>,
    pub sampling: Sampling,
    /// Branch weight below which path enumeration stops descending.
    pub prune: f64,
    /// Trials per parallel work item.
    pub chunk: u64,
}

pub fn run_settings(table: &Table) -> Result<RunSettings, CliError> {
    let empty = Table::new();
    let t = section(table, "run").unwrap_or(&empty);
    let get_u = |k: &str, d: u64| t.get(k).map_or(Ok(d), |v| uint(v, &format!("run.{k}")));
    let get_f = |k: &str, d: f64| t.get(k).map_or(Ok(d), |v| float(v, &format!("run.{k}")));
    let targets = match t.get("targets") {
        None => Target::BOTH.to_vec(),
        Some(v) => v
            .as_array()
            .ok_or_else(|| config_err("`run.targets` must be an array"))?
            .iter()
            .map(|x| string(x, "run.targets")?.parse::<Target>().map_err(config_err))
            .collect::<Result<_, _>>()?,
    };
    if targets.is_empty() {
        return Err(config_err("`run.targets` is empty"));
    }
    let adaptive = match t.get("adaptive") {
        None => false,
        Some(v) => v.as_bool().ok_or_else(|| config_err("`run.adaptive` must be a boolean"))?,
    };
    let defaults = AdaptivePolicy::default();
    let sampling = if adaptive {
        let policy = AdaptivePolicy {
            initial: get_u("initial", defaults.initial)?,
            cap: get_u("cap", defaults.cap)?,
            rel_err: get_f("rel_err", defaults.rel_err)?,
            ..defaults
        };
        if policy.initial == 0 || policy.cap == 0 || policy.cap > 100_000_000 {
            return Err(config_err("adaptive sampling needs initial ≥ 1 and 1 ≤ cap ≤ 1e8"));
        }
        Sampling::Adaptive(policy)
    } else {
        let n = get_u("samples", 100_000)?;
        if n == 0 {
            return Err(config_err("`run.samples` must be at least 1"));
        }
        Sampling::Fixed(n)
    };
    let backend = match t.get("backend") {
        None => BackendChoice::Auto,
        Some(v) => BackendChoice::parse(string(v, "run.backend")?)?,
    };
    let chunk = get_u("chunk", 5_000)?.max(1);
    Ok(RunSettings {
        seed: get_u("seed", 1)?,
        backend,
        targets,
        sampling,
        prune: get_f("prune", 1e-15)?,
        chunk,
    })
}

/// A named set of noise overrides swept as one curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub params: NoiseParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub series: Vec<Series>,
}

pub fn sweep_spec(table: &Table, base: &NoiseParams) -> Result<SweepSpec, CliError> {
    let t = section(table, "sweep").ok_or_else(|| config_err("missing [sweep] section"))?;
    let axis: SweepAxis = string(t.get("axis").ok_or_else(|| config_err("missing `sweep.axis`"))?, "sweep.axis")?
        .parse()
        .map_err(|_| config_err("`sweep.axis` must be `p_ms` or `p_c`"))?;
    let grid = if let Some(v) = t.get("values") {
        floats(v, "sweep.values")?
    } else {
        let need = |k: &str| t.get(k).ok_or_else(|| config_err(format!("missing `sweep.{k}` (or give `sweep.values`)")));
        let lo = float(need("lo")?, "sweep.lo")?;
        let hi = float(need("hi")?, "sweep.hi")?;
        let per = uint(need("per_decade")?, "sweep.per_decade")?;
        if !(lo > 0.0 && hi >= lo && per > 0) {
            return Err(config_err("sweep needs 0 < lo ≤ hi and per_decade ≥ 1"));
        }
        log_grid(lo, hi, per as usize)
    };
    if grid.is_empty() {
        return Err(config_err("sweep grid is empty"));
    }
    if grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(config_err("sweep values must be probabilities"));
    }
    let mut series = Vec::new();
    match t.get("series") {
        None => series.push(Series {
            label: "base".into(),
            params: *base,
        }),
        Some(v) => {
            let arr = v
                .as_array()
                .ok_or_else(|| config_err("`sweep.series` must be an array of tables"))?;
            for (i, s) in arr.iter().enumerate() {
                let st = s
                    .as_table()
                    .ok_or_else(|| config_err("`sweep.series` must be an array of tables"))?;
                let mut p = *base;
                apply_noise(&mut p, st, &format!("sweep.series[{i}]"))?;
                let label = st
                    .iter()
                    .map(|(k, v)| format!("{k}={}", v.as_str().map_or_else(|| v.to_string(), str::to_string)))
                    .collect::<Vec<_>>()
                    .join(";");
                series.push(Series {
                    label: if label.is_empty() { "base".into() } else { label },
                    params: p,
                });
            }
        }
    }
    if series.is_empty() {
        return Err(config_err("`sweep.series` is empty"));
    }
    Ok(SweepSpec { axis, grid, series })
}

fn require<'a>(t: &'a Table, k: &str) -> Result<&'a Value, CliError> {
    t.get(k).ok_or_else(|| config_err(format!("missing field `budget.{k}`")))
}

pub fn budget_input(table: &Table) -> Result<MsBudgetInput, CliError> {
    let t = section(table, "budget").ok_or_else(|| config_err("missing [budget] section"))?;
    let f = |k: &str| float(require(t, k)?, &format!("budget.{k}"));
    let fv = |k: &str| floats(require(t, k)?, &format!("budget.{k}"));
    let m_jn = require(t, "m_jn")?
        .as_array()
        .ok_or_else(|| config_err("`budget.m_jn` must be an array of arrays"))?
        .iter()
        .map(|row| floats(row, "budget.m_jn"))
        .collect::<Result<Vec<_>, _>>()?;
    let input = MsBudgetInput {
        n: uint(require(t, "n")?, "budget.n")? as usize,
        m: uint(require(t, "m")?, "budget.m")? as usize,
        omega_ratios: fv("omega_ratios")?,
        omega: f("omega")?,
        delta: f("delta")?,
        eta_n: fv("eta_n")?,
        omega_n: fv("omega_n")?,
        nbar_n: fv("nbar_n")?,
        m_jn,
        t_g: f("t_g")?,
        t2: f("t2")?,
        gamma_i: f("gamma_i")?,
        eps_ms: f("eps_ms")?,
    };
    input.validate().map_err(|e| config_err(e.to_string()))?;
    Ok(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_values_and_create_tables() {
        let mut t = Table::new();
        apply_override(&mut t, "noise.p_c=1e-3").unwrap();
        apply_override(&mut t, "noise.crosstalk_mode=stark-coherent").unwrap();
        apply_override(&mut t, "run.targets=[\"zero\"]").unwrap();
        let p = noise(&t).unwrap();
        assert_eq!(p.p_c, 1e-3);
        assert_eq!(p.crosstalk_mode.as_str(), "stark-coherent");
        assert_eq!(run_settings(&t).unwrap().targets, vec![Target::Zero]);
        assert!(apply_override(&mut t, "noise.p_c").is_err());
        assert!(apply_override(&mut t, "noise..x=1").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let t: Table = "[noise]\np_cc = 1.0".parse().unwrap();
        assert!(check_keys(&t, &["noise"]).is_err());
        let t: Table = "[budget]\nn = 2".parse().unwrap();
        assert!(check_keys(&t, &["noise"]).is_err());
        let t: Table = "[noise]\np_ms = 2.0".parse().unwrap();
        assert!(noise(&t).is_err());
    }

    #[test]
    fn header_lines_are_read_back() {
        let csv = "# ionqec simulate\n#! [noise]\n#! p_ms = 0.001\nx,y\n1,2\n";
        let t = parse(csv).unwrap();
        assert_eq!(noise(&t).unwrap().p_ms, 1e-3);
    }

    #[test]
    fn sweep_grid_and_series() {
        let t: Table = "[sweep]\naxis = \"p_ms\"\nlo = 1e-4\nhi = 1e-2\nper_decade = 8\n[[sweep.series]]\np_c = 1e-6\ncrosstalk_mode = \"entangling-incoherent\"\n"
            .parse()
            .unwrap();
        let s = sweep_spec(&t, &NoiseParams::default()).unwrap();
        assert_eq!(s.grid.len(), 17);
        assert_eq!(s.series.len(), 1);
        assert_eq!(s.series[0].params.p_c, 1e-6);
        let bad: Table = "[sweep]\naxis = \"p_ms\"\nvalues = []\n".parse().unwrap();
        assert!(sweep_spec(&bad, &NoiseParams::default()).is_err());
    }

    #[test]
    fn missing_budget_field_names_it() {
        let t: Table = "[budget]\nn = 2\n".parse().unwrap();
        match budget_input(&t) {
            Err(CliError::Config(m)) => assert!(m.contains("budget.m"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
