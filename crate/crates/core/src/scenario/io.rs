//! JSON configuration and CSV trace loading, dumping and hashing.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    validate_scenario, Annualization, Bounds, CostParams, GeneratorKind, GeneratorSpec, LineSpec,
    Scenario, StorageSpec, TraceSet,
};
use crate::{Error, Result};

pub(crate) const DEMAND_FILE: &str = "demand.csv";
pub(crate) const AVAILABILITY_FILE: &str = "availability.csv";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capital_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capital_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fixed_om: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variable_om: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fuel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    discount_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lifetime: Option<f64>,
}

impl CostConfig {
    fn from_params(c: &CostParams) -> Self {
        CostConfig {
            capital_power: Some(c.capital_power),
            capital_energy: Some(c.capital_energy),
            fixed_om: Some(c.fixed_om),
            variable_om: Some(c.variable_om),
            fuel: Some(c.fuel),
            discount_rate: Some(c.discount_rate),
            lifetime: Some(c.lifetime),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DefaultsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    discount_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lifetime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pv: Option<CostConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wind: Option<CostConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    baseload: Option<CostConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flexible: Option<CostConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    storage: Option<CostConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    line: Option<CostConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorConfig {
    id: String,
    node: String,
    kind: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    technology: Option<String>,
    #[serde(default)]
    existing_power: f64,
    #[serde(default)]
    new_power: Bounds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    annual_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trace: Option<String>,
    #[serde(default)]
    costs: CostConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StorageConfig {
    id: String,
    node: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    technology: Option<String>,
    #[serde(default)]
    existing_power: f64,
    #[serde(default)]
    existing_energy: f64,
    #[serde(default)]
    new_power: Bounds,
    #[serde(default)]
    new_energy: Bounds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    charge_efficiency: f64,
    discharge_efficiency: f64,
    #[serde(default)]
    costs: CostConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineConfig {
    id: String,
    from: String,
    to: String,
    #[serde(default)]
    length: f64,
    #[serde(default)]
    existing_power: f64,
    #[serde(default)]
    new_power: Bounds,
    #[serde(default)]
    costs: CostConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum YearsConfig {
    Count(usize),
    Lengths(Vec<usize>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HorizonConfig {
    resolution: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    years: Option<YearsConfig>,
    /// Tile a single year of traces across every year of the horizon.
    #[serde(default)]
    repeat_traces: bool,
    #[serde(default)]
    capital_annualization: Annualization,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReliabilityConfig {
    standard: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fixed_cost_threshold: Option<f64>,
    #[serde(default = "default_penalty_scale")]
    penalty_scale: f64,
}

fn default_penalty_scale() -> f64 {
    1e6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    nodes: Vec<String>,
    #[serde(default)]
    lines: Vec<LineConfig>,
    #[serde(default)]
    generators: Vec<GeneratorConfig>,
    #[serde(default)]
    storages: Vec<StorageConfig>,
    #[serde(default)]
    defaults: DefaultsConfig,
    horizon: HorizonConfig,
    reliability: ReliabilityConfig,
}

fn resolve_costs(
    own: &CostConfig,
    category: Option<&CostConfig>,
    defaults: &DefaultsConfig,
    location: &str,
) -> Result<CostParams> {
    let pick = |f: fn(&CostConfig) -> Option<f64>| f(own).or_else(|| category.and_then(f));
    let discount_rate = pick(|c| c.discount_rate)
        .or(defaults.discount_rate)
        .ok_or_else(|| Error::schema(location, "discount_rate is not set and has no default"))?;
    let lifetime = pick(|c| c.lifetime)
        .or(defaults.lifetime)
        .ok_or_else(|| Error::schema(location, "lifetime is not set and has no default"))?;
    Ok(CostParams {
        capital_power: pick(|c| c.capital_power).unwrap_or(0.0),
        capital_energy: pick(|c| c.capital_energy).unwrap_or(0.0),
        fixed_om: pick(|c| c.fixed_om).unwrap_or(0.0),
        variable_om: pick(|c| c.variable_om).unwrap_or(0.0),
        fuel: pick(|c| c.fuel).unwrap_or(0.0),
        discount_rate,
        lifetime,
    })
}

/// Reads a CSV of numeric columns keyed by header.
pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut cols = vec![Vec::new(); headers.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::schema(
                    format!("{}:{}", path.display(), row + 2),
                    format!("column {} value {field:?} is not a number", headers[j]),
                )
            })?;
            cols[j].push(v);
        }
    }
    Ok((headers, cols))
}

/// Writes equal-length numeric columns under the given headers.
pub fn write_columns(path: &Path, headers: &[&str], cols: &[&[f64]]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(headers).map_err(csv_err)?;
    let rows = cols.first().map_or(0, |c| c.len());
    let mut rec = Vec::with_capacity(cols.len());
    for t in 0..rows {
        rec.clear();
        rec.extend(cols.iter().map(|c| c[t].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads a scenario from a JSON configuration and a directory holding
/// `demand.csv` (MW, one column per node) and `availability.csv`.
///
/// The result is validated; any violation becomes a schema error.
pub fn load_scenario(
    config_path: impl AsRef<Path>,
    trace_dir: impl AsRef<Path>,
) -> Result<Scenario> {
    let config_path = config_path.as_ref();
    let trace_dir = trace_dir.as_ref();
    let text = fs::read_to_string(config_path).map_err(|e| Error::io(config_path, e))?;
    let cfg: ConfigFile = serde_json::from_str(&text).map_err(|e| {
        Error::schema(
            format!("{}:{}:{}", config_path.display(), e.line(), e.column()),
            e.to_string(),
        )
    })?;

    let node_of = |id: &str, location: String| -> Result<usize> {
        cfg.nodes
            .iter()
            .position(|n| n == id)
            .ok_or_else(|| Error::schema(location, format!("unknown node {id:?}")))
    };

    let (demand_headers, demand_cols) = read_columns(&trace_dir.join(DEMAND_FILE))?;
    let mut demand = Vec::with_capacity(cfg.nodes.len());
    for n in &cfg.nodes {
        let j = demand_headers.iter().position(|h| h == n).ok_or_else(|| {
            Error::schema(DEMAND_FILE, format!("no demand column for node {n:?}"))
        })?;
        demand.push(
            demand_cols[j]
                .iter()
                .map(|mw| mw / 1000.0)
                .collect::<Vec<f64>>(),
        );
    }
    let trace_len = demand.first().map_or(0, Vec::len);

    let needs_availability = cfg
        .generators
        .iter()
        .any(|g| g.kind != GeneratorKind::Flexible);
    let avail_path = trace_dir.join(AVAILABILITY_FILE);
    let mut availability = BTreeMap::new();
    if needs_availability || avail_path.exists() {
        let (headers, cols) = read_columns(&avail_path)?;
        for (h, c) in headers.into_iter().zip(cols) {
            if c.len() != trace_len {
                return Err(Error::TraceLength {
                    trace: format!("{AVAILABILITY_FILE}:{h}"),
                    expected: trace_len,
                    found: c.len(),
                });
            }
            availability.insert(h, c);
        }
    }

    let r = cfg.horizon.resolution;
    if !(r > 0.0) {
        return Err(Error::schema("horizon.resolution", "must be positive"));
    }
    let mut years = match &cfg.horizon.years {
        Some(YearsConfig::Lengths(v)) => v.clone(),
        Some(YearsConfig::Count(n)) => {
            if *n == 0 {
                return Err(Error::schema("horizon.years", "must be at least 1"));
            }
            let total = if cfg.horizon.repeat_traces {
                trace_len * n
            } else {
                trace_len
            };
            if total % n != 0 {
                return Err(Error::schema(
                    "horizon.years",
                    format!("{total} intervals do not split into {n} equal years"),
                ));
            }
            vec![total / n; *n]
        }
        None => {
            let per_year = (8760.0 / r).round() as usize;
            if per_year > 0 && trace_len >= per_year && trace_len % per_year == 0 {
                vec![per_year; trace_len / per_year]
            } else {
                vec![trace_len]
            }
        }
    };
    years.retain(|&t| t > 0);
    let horizon: usize = years.iter().sum();
    if cfg.horizon.repeat_traces && horizon != trace_len {
        if trace_len == 0 || years.iter().any(|&t| t != trace_len) {
            return Err(Error::TraceLength {
                trace: DEMAND_FILE.into(),
                expected: years.first().copied().unwrap_or(0),
                found: trace_len,
            });
        }
        let tile = |v: &Vec<f64>| {
            v.iter()
                .copied()
                .cycle()
                .take(horizon)
                .collect::<Vec<f64>>()
        };
        demand = demand.iter().map(tile).collect();
        for v in availability.values_mut() {
            *v = tile(v);
        }
    } else if horizon != trace_len {
        return Err(Error::TraceLength {
            trace: DEMAND_FILE.into(),
            expected: horizon,
            found: trace_len,
        });
    }

    let mut generators = Vec::with_capacity(cfg.generators.len());
    for (i, g) in cfg.generators.iter().enumerate() {
        let loc = format!("generators[{i}] ({})", g.id);
        let category = match g.kind {
            GeneratorKind::Pv => cfg.defaults.pv.as_ref(),
            GeneratorKind::Wind => cfg.defaults.wind.as_ref(),
            GeneratorKind::Baseload => cfg.defaults.baseload.as_ref(),
            GeneratorKind::Flexible => cfg.defaults.flexible.as_ref(),
        };
        let trace = match g.kind {
            GeneratorKind::Flexible => g.trace.clone(),
            _ => {
                let col = g.trace.clone().unwrap_or_else(|| g.id.clone());
                if !availability.contains_key(&col) {
                    return Err(Error::schema(
                        format!("{loc}.trace"),
                        format!(
                            "generator {} references missing availability column {col:?}",
                            g.id
                        ),
                    ));
                }
                Some(col)
            }
        };
        generators.push(GeneratorSpec {
            id: g.id.clone(),
            node: node_of(&g.node, format!("{loc}.node"))?,
            kind: g.kind,
            technology: g
                .technology
                .clone()
                .unwrap_or_else(|| g.kind.as_str().to_string()),
            existing_power: g.existing_power,
            new_power: g.new_power,
            annual_energy: g.annual_energy,
            trace,
            costs: resolve_costs(&g.costs, category, &cfg.defaults, &loc)?,
        });
    }

    let mut storages = Vec::with_capacity(cfg.storages.len());
    for (i, k) in cfg.storages.iter().enumerate() {
        let loc = format!("storages[{i}] ({})", k.id);
        storages.push(StorageSpec {
            id: k.id.clone(),
            node: node_of(&k.node, format!("{loc}.node"))?,
            technology: k.technology.clone().unwrap_or_else(|| "storage".into()),
            existing_power: k.existing_power,
            existing_energy: k.existing_energy,
            new_power: k.new_power,
            new_energy: k.new_energy,
            duration: k.duration,
            charge_efficiency: k.charge_efficiency,
            discharge_efficiency: k.discharge_efficiency,
            costs: resolve_costs(&k.costs, cfg.defaults.storage.as_ref(), &cfg.defaults, &loc)?,
        });
    }

    let mut lines = Vec::with_capacity(cfg.lines.len());
    for (i, l) in cfg.lines.iter().enumerate() {
        let loc = format!("lines[{i}] ({})", l.id);
        lines.push(LineSpec {
            id: l.id.clone(),
            from: node_of(&l.from, format!("{loc}.from"))?,
            to: node_of(&l.to, format!("{loc}.to"))?,
            length: l.length,
            existing_power: l.existing_power,
            new_power: l.new_power,
            costs: resolve_costs(&l.costs, cfg.defaults.line.as_ref(), &cfg.defaults, &loc)?,
        });
    }

    let scenario = Scenario {
        nodes: cfg.nodes.clone(),
        lines,
        generators,
        storages,
        traces: TraceSet {
            demand,
            availability,
        },
        resolution: r,
        years,
        reliability: cfg.reliability.standard,
        fixed_cost_threshold: cfg
            .reliability
            .fixed_cost_threshold
            .unwrap_or(f64::INFINITY),
        penalty_scale: cfg.reliability.penalty_scale,
        annualization: cfg.horizon.capital_annualization,
    };
    let violations = validate_scenario(&scenario);
    if let Some(v) = violations.first() {
        let rest: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::schema(v.entity.clone(), rest.join("; ")));
    }
    Ok(scenario)
}

fn to_config(s: &Scenario) -> ConfigFile {
    ConfigFile {
        nodes: s.nodes.clone(),
        lines: s
            .lines
            .iter()
            .map(|l| LineConfig {
                id: l.id.clone(),
                from: s.nodes[l.from].clone(),
                to: s.nodes[l.to].clone(),
                length: l.length,
                existing_power: l.existing_power,
                new_power: l.new_power,
                costs: CostConfig::from_params(&l.costs),
            })
            .collect(),
        generators: s
            .generators
            .iter()
            .map(|g| GeneratorConfig {
                id: g.id.clone(),
                node: s.nodes[g.node].clone(),
                kind: g.kind,
                technology: Some(g.technology.clone()),
                existing_power: g.existing_power,
                new_power: g.new_power,
                annual_energy: g.annual_energy,
                trace: g.trace.clone(),
                costs: CostConfig::from_params(&g.costs),
            })
            .collect(),
        storages: s
            .storages
            .iter()
            .map(|k| StorageConfig {
                id: k.id.clone(),
                node: s.nodes[k.node].clone(),
                technology: Some(k.technology.clone()),
                existing_power: k.existing_power,
                existing_energy: k.existing_energy,
                new_power: k.new_power,
                new_energy: k.new_energy,
                duration: k.duration,
                charge_efficiency: k.charge_efficiency,
                discharge_efficiency: k.discharge_efficiency,
                costs: CostConfig::from_params(&k.costs),
            })
            .collect(),
        defaults: DefaultsConfig::default(),
        horizon: HorizonConfig {
            resolution: s.resolution,
            years: Some(YearsConfig::Lengths(s.years.clone())),
            repeat_traces: false,
            capital_annualization: s.annualization,
        },
        reliability: ReliabilityConfig {
            standard: s.reliability,
            fixed_cost_threshold: s
                .fixed_cost_threshold
                .is_finite()
                .then_some(s.fixed_cost_threshold),
            penalty_scale: s.penalty_scale,
        },
    }
}

/// Writes `config.json`, `demand.csv` and `availability.csv` into `dir`.
///
/// Costs are written fully resolved on every asset, so the output does not
/// depend on the defaults the scenario was loaded with.
pub fn dump_scenario(s: &Scenario, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cfg_path = dir.join("config.json");
    let json = serde_json::to_string_pretty(&to_config(s)).map_err(|source| Error::Json {
        path: cfg_path.clone(),
        source,
    })?;
    fs::write(&cfg_path, json + "\n").map_err(|e| Error::io(&cfg_path, e))?;

    let demand_mw: Vec<Vec<f64>> = s
        .traces
        .demand
        .iter()
        .map(|d| d.iter().map(|gw| gw * 1000.0).collect())
        .collect();
    let headers: Vec<&str> = s.nodes.iter().map(String::as_str).collect();
    let cols: Vec<&[f64]> = demand_mw.iter().map(Vec::as_slice).collect();
    write_columns(&dir.join(DEMAND_FILE), &headers, &cols)?;

    if !s.traces.availability.is_empty() {
        let headers: Vec<&str> = s.traces.availability.keys().map(String::as_str).collect();
        let cols: Vec<&[f64]> = s.traces.availability.values().map(Vec::as_slice).collect();
        write_columns(&dir.join(AVAILABILITY_FILE), &headers, &cols)?;
    }
    Ok(())
}

/// Hex SHA-256 over the resolved configuration and the raw trace values.
pub fn scenario_hash(s: &Scenario) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&to_config(s)).expect("config always serializes"));
    for d in &s.traces.demand {
        for x in d {
            h.update(x.to_bits().to_le_bytes());
        }
    }
    for (k, v) in &s.traces.availability {
        h.update(k.as_bytes());
        for x in v {
            h.update(x.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::make_synthetic;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    fn minimal_config(extra_generator: &str) -> String {
        format!(
            r#"{{
  "nodes": ["A"],
  "generators": [
    {{"id": "gas", "node": "A", "kind": "flexible", "annual_energy": 1000,
      "new_power": {{"min": 0, "max": 5}}, "costs": {{"capital_power": 900, "fuel": 80}}}}
    {extra_generator}
  ],
  "storages": [
    {{"id": "bat", "node": "A", "charge_efficiency": 0.9, "discharge_efficiency": 0.9,
      "new_power": {{"min": 0, "max": 2}}, "new_energy": {{"min": 0, "max": 8}}}}
  ],
  "defaults": {{"discount_rate": 0.05, "lifetime": 25, "storage": {{"capital_energy": 150}}}},
  "horizon": {{"resolution": 1}},
  "reliability": {{"standard": 0.99998}}
}}"#
        )
    }

    fn demand_csv(rows: usize) -> String {
        let mut s = String::from("A\n");
        for t in 0..rows {
            s.push_str(&format!("{}\n", 1000 + 10 * t));
        }
        s
    }

    #[test]
    fn minimal_one_node_day() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "config.json", &minimal_config(""));
        write(dir.path(), DEMAND_FILE, &demand_csv(24));
        let s = load_scenario(dir.path().join("config.json"), dir.path()).unwrap();
        assert_eq!(s.years, vec![24]);
        assert_eq!(s.traces.demand[0][0], 1.0);
        assert_eq!(s.generators[0].costs.lifetime, 25.0);
        assert_eq!(s.storages[0].costs.capital_energy, 150.0);
        assert_eq!(s.penalty_scale, 1e6);
        assert!(s.fixed_cost_threshold.is_infinite());
    }

    #[test]
    fn missing_availability_column_names_generator() {
        let dir = tempfile::tempdir().unwrap();
        let pv = r#", {"id": "solar_a", "node": "A", "kind": "pv", "trace": "nope"}"#;
        write(dir.path(), "config.json", &minimal_config(pv));
        write(dir.path(), DEMAND_FILE, &demand_csv(24));
        let avail: String = std::iter::once("other\n".to_string())
            .chain((0..24).map(|_| "0.5\n".to_string()))
            .collect();
        write(dir.path(), AVAILABILITY_FILE, &avail);
        let err = load_scenario(dir.path().join("config.json"), dir.path()).unwrap_err();
        match err {
            Error::Schema { message, .. } => assert!(message.contains("solar_a"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn year_list_must_match_trace_length() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = minimal_config("").replace(
            r#""resolution": 1"#,
            r#""resolution": 1, "years": [12, 13]"#,
        );
        write(dir.path(), "config.json", &cfg);
        write(dir.path(), DEMAND_FILE, &demand_csv(24));
        assert!(matches!(
            load_scenario(dir.path().join("config.json"), dir.path()),
            Err(Error::TraceLength {
                expected: 25,
                found: 24,
                ..
            })
        ));
    }

    #[test]
    fn repeated_traces_tile_per_year() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = minimal_config("").replace(
            r#""resolution": 1"#,
            r#""resolution": 1, "years": 3, "repeat_traces": true"#,
        );
        write(dir.path(), "config.json", &cfg);
        write(dir.path(), DEMAND_FILE, &demand_csv(24));
        let s = load_scenario(dir.path().join("config.json"), dir.path()).unwrap();
        assert_eq!(s.years, vec![24, 24, 24]);
        assert_eq!(s.traces.demand[0][24], s.traces.demand[0][0]);
        assert_eq!(s.traces.demand[0].len(), 72);
    }

    #[test]
    fn missing_lifetime_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = minimal_config("").replace(r#", "lifetime": 25"#, "");
        write(dir.path(), "config.json", &cfg);
        write(dir.path(), DEMAND_FILE, &demand_csv(24));
        let err = load_scenario(dir.path().join("config.json"), dir.path()).unwrap_err();
        assert!(err.to_string().contains("gas"), "{err}");
    }

    #[test]
    fn malformed_json_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "config.json",
            "{\"nodes\": [\"A\"], \"horizon\": {}}",
        );
        write(dir.path(), DEMAND_FILE, &demand_csv(2));
        let err = load_scenario(dir.path().join("config.json"), dir.path()).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("resolution"), "{text}");
        assert!(text.contains("config.json:1:"), "{text}");
    }

    #[test]
    fn dump_then_load_round_trips() {
        let s = make_synthetic(5, 3, 2, 1.0);
        let dir = tempfile::tempdir().unwrap();
        dump_scenario(&s, dir.path()).unwrap();
        let back = load_scenario(dir.path().join("config.json"), dir.path()).unwrap();
        assert_traces_close(&s, &back);
        let mut back = back;
        back.traces = s.traces.clone();
        assert_eq!(s, back);
    }

    pub(crate) fn assert_traces_close(a: &Scenario, b: &Scenario) {
        assert_eq!(a.traces.demand.len(), b.traces.demand.len());
        for (x, y) in a.traces.demand.iter().zip(&b.traces.demand) {
            assert_eq!(x.len(), y.len());
            for (p, q) in x.iter().zip(y) {
                assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
            }
        }
        assert_eq!(a.traces.availability, b.traces.availability);
    }

    #[test]
    fn hash_tracks_content() {
        let a = make_synthetic(1, 2, 1, 1.0);
        let mut b = a.clone();
        assert_eq!(scenario_hash(&a), scenario_hash(&b));
        b.reliability = 0.9;
        assert_ne!(scenario_hash(&a), scenario_hash(&b));
    }
}
