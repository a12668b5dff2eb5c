//! Flat key-value configuration files: one `key = value` per line, `#`
//! comments, no sections. Unknown keys are rejected by the consumer so typos
//! cannot silently change a run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use opcost_core::bounds::{ClassConstraint, HypothesisClassSpec};
use opcost_core::optimizer::Bias;
use opcost_core::problems::bilinear::{box_policy_grid, segment_simplex_grid};
use opcost_core::problems::dag::{PrecedenceDag, PrecedenceEdge};
use opcost_core::problems::{BilinearGame, KnapsackSpec, OpCostProblem, StaffingSpec};

use crate::CliError;

/// Parsed key-value pairs in file order (later duplicates are an error).
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    /// Directory of the source file; relative paths resolve against it.
    pub base_dir: PathBuf,
}

/// Parse configuration text. Duplicate keys and malformed lines error with
/// their line number.
pub fn parse_config_str(text: &str) -> Result<Config, CliError> {
    let mut values = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(CliError::Parse(format!("line {lineno}: expected 'key = value'")));
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        if key.is_empty() {
            return Err(CliError::Parse(format!("line {lineno}: empty key")));
        }
        if !key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        {
            return Err(CliError::Parse(format!("line {lineno}: invalid key '{key}'")));
        }
        if values.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::Parse(format!("line {lineno}: duplicate key '{key}'")));
        }
    }
    Ok(Config { values, base_dir: PathBuf::from(".") })
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config_str(&text).map_err(|e| e.with_context(path))?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    Ok(cfg)
}

impl Config {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Consume a key; the validator calls [`Config::finish`] at the end so
    /// leftovers are caught.
    pub fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    pub fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Parse(format!("key '{key}': cannot parse '{raw}'"))),
        }
    }

    pub fn take_path(&mut self, key: &str) -> Option<PathBuf> {
        self.take(key).map(|raw| {
            let p = PathBuf::from(raw);
            if p.is_relative() {
                self.base_dir.join(p)
            } else {
                p
            }
        })
    }

    /// All keys starting with a prefix, in lexicographic order.
    pub fn take_prefixed(&mut self, prefix: &str) -> Vec<(String, String)> {
        let keys: Vec<String> = self
            .values
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect();
        keys.into_iter()
            .map(|k| {
                let v = self.values.remove(&k).expect("key listed above");
                (k, v)
            })
            .collect()
    }

    /// Error out if any key was never consumed.
    pub fn finish(self) -> Result<(), CliError> {
        if let Some(key) = self.values.keys().next() {
            return Err(CliError::Parse(format!("unknown key '{key}'")));
        }
        Ok(())
    }
}

pub fn parse_f64_list(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|c| {
            let t = c.trim();
            t.parse::<f64>()
                .map_err(|_| CliError::Parse(format!("cannot parse number '{t}'")))
        })
        .collect()
}

pub fn parse_bias(raw: &str) -> Result<Bias, CliError> {
    match raw {
        "optimistic" => Ok(Bias::Optimistic),
        "pessimistic" => Ok(Bias::Pessimistic),
        other => Err(CliError::Parse(format!(
            "bias must be 'optimistic' or 'pessimistic', got '{other}'"
        ))),
    }
}

/// Decision-problem description from config keys. See the README for the
/// full schema.
pub fn problem_from_config(cfg: &mut Config) -> Result<OpCostProblem, CliError> {
    let kind = cfg
        .take("problem")
        .ok_or_else(|| CliError::Parse("missing key 'problem'".into()))?;
    match kind.as_str() {
        "scheduling" => {
            let events: usize = cfg
                .take_parsed("dag_events")?
                .ok_or_else(|| CliError::Parse("scheduling needs 'dag_events'".into()))?;
            let source: usize = cfg.take_parsed("dag_source")?.unwrap_or(0);
            let sink: usize = cfg
                .take_parsed("dag_sink")?
                .ok_or_else(|| CliError::Parse("scheduling needs 'dag_sink'".into()))?;
            let raw_edges = cfg
                .take("dag_edges")
                .ok_or_else(|| CliError::Parse("scheduling needs 'dag_edges'".into()))?;
            let mut edges = Vec::new();
            for part in raw_edges.split(';') {
                let nums: Vec<&str> = part.split(',').map(str::trim).collect();
                if nums.len() != 3 {
                    return Err(CliError::Parse(format!(
                        "dag_edges entry '{part}' is not 'from,to,instance'"
                    )));
                }
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| CliError::Parse(format!("dag_edges: bad index '{s}'")))
                };
                edges.push(PrecedenceEdge {
                    from_event: parse(nums[0])?,
                    to_event: parse(nums[1])?,
                    instance_index: parse(nums[2])?,
                });
            }
            let dag = PrecedenceDag::new(events, edges, source, sink)?;
            Ok(OpCostProblem::Scheduling { dag })
        }
        "knapsack" => {
            let costs = parse_f64_list(
                &cfg.take("fixed_costs")
                    .ok_or_else(|| CliError::Parse("knapsack needs 'fixed_costs'".into()))?,
            )?;
            let capacity: usize = cfg
                .take_parsed("capacity")?
                .ok_or_else(|| CliError::Parse("knapsack needs 'capacity'".into()))?;
            Ok(OpCostProblem::Knapsack { spec: KnapsackSpec::new(Array1::from(costs), capacity)? })
        }
        "staffing" => {
            let periods: usize = cfg
                .take_parsed("num_periods")?
                .ok_or_else(|| CliError::Parse("staffing needs 'num_periods'".into()))?;
            let raw = cfg
                .take("shift_periods")
                .ok_or_else(|| CliError::Parse("staffing needs 'shift_periods'".into()))?;
            let max_per: usize = cfg
                .take_parsed("max_periods_per_shift")?
                .ok_or_else(|| CliError::Parse("staffing needs 'max_periods_per_shift'".into()))?;
            let shifts: Vec<&str> = raw.split(';').collect();
            let mut coverage = Array2::zeros((periods, shifts.len()));
            for (j, span) in shifts.iter().enumerate() {
                let (lo, hi) = span
                    .trim()
                    .split_once('-')
                    .ok_or_else(|| CliError::Parse(format!("shift span '{span}' is not 'lo-hi'")))?;
                let lo: usize = lo.trim().parse().map_err(|_| {
                    CliError::Parse(format!("shift span '{span}': bad start"))
                })?;
                let hi: usize = hi.trim().parse().map_err(|_| {
                    CliError::Parse(format!("shift span '{span}': bad end"))
                })?;
                if hi < lo || hi >= periods {
                    return Err(CliError::Parse(format!("shift span '{span}' out of range")));
                }
                for i in lo..=hi {
                    coverage[(i, j)] = 1;
                }
            }
            Ok(OpCostProblem::Staffing { spec: StaffingSpec::new(coverage, max_per)? })
        }
        "bilinear" => {
            let raw_m = cfg
                .take("interaction")
                .ok_or_else(|| CliError::Parse("bilinear needs 'interaction'".into()))?;
            let rows: Vec<Vec<f64>> = raw_m
                .split('|')
                .map(parse_f64_list)
                .collect::<Result<_, _>>()?;
            let dim = rows.len();
            let p = rows.first().map(Vec::len).unwrap_or(0);
            if dim == 0 || p == 0 || rows.iter().any(|r| r.len() != p) {
                return Err(CliError::Parse("interaction rows must be non-empty and equal length".into()));
            }
            let mut interaction = Array2::zeros((dim, p));
            for (i, r) in rows.iter().enumerate() {
                for (j, &v) in r.iter().enumerate() {
                    interaction[(i, j)] = v;
                }
            }
            let policy_cost = Array1::from(parse_f64_list(
                &cfg.take("policy_cost")
                    .ok_or_else(|| CliError::Parse("bilinear needs 'policy_cost'".into()))?,
            )?);
            let raw_grid = cfg
                .take("policy_grid")
                .ok_or_else(|| CliError::Parse("bilinear needs 'policy_grid'".into()))?;
            let policies = parse_policy_grid(&raw_grid, dim)?;
            Ok(OpCostProblem::Bilinear {
                game: BilinearGame::new(interaction, policy_cost, policies)?,
            })
        }
        other => Err(CliError::Parse(format!("unknown problem kind '{other}'"))),
    }
}

/// `simplex:<points>` (two-coordinate segment simplex) or
/// `box:lo,hi;lo,hi:<points-per-axis>`.
fn parse_policy_grid(raw: &str, dim: usize) -> Result<Vec<Array1<f64>>, CliError> {
    if let Some(points) = raw.strip_prefix("simplex:") {
        let points: usize = points
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("policy_grid: bad point count in '{raw}'")))?;
        if dim != 2 {
            return Err(CliError::Parse("simplex policy grid needs a 2-dimensional game".into()));
        }
        return Ok(segment_simplex_grid(points)?);
    }
    if let Some(rest) = raw.strip_prefix("box:") {
        let (spans, points) = rest
            .rsplit_once(':')
            .ok_or_else(|| CliError::Parse(format!("policy_grid: '{raw}' misses ':points'")))?;
        let points: usize = points
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("policy_grid: bad point count in '{raw}'")))?;
        let bounds: Vec<(f64, f64)> = spans
            .split(';')
            .map(|s| {
                let nums = parse_f64_list(s)?;
                if nums.len() != 2 {
                    return Err(CliError::Parse(format!("policy_grid span '{s}' is not 'lo,hi'")));
                }
                Ok((nums[0], nums[1]))
            })
            .collect::<Result<_, CliError>>()?;
        if bounds.len() != dim {
            return Err(CliError::Parse("policy_grid box dimension != game dimension".into()));
        }
        return Ok(box_policy_grid(&bounds, points)?);
    }
    Err(CliError::Parse(format!("policy_grid '{raw}' must start with 'simplex:' or 'box:'")))
}

/// Hypothesis-class description from config keys: `p`, `r` (a number or
/// `inf`), `x_b`, `b_b`, and `constraint_<i> = c1,...,cp : delta` rows.
pub fn class_spec_from_config(cfg: &mut Config) -> Result<HypothesisClassSpec, CliError> {
    let p: usize = cfg
        .take_parsed("p")?
        .ok_or_else(|| CliError::Parse("bound spec needs 'p'".into()))?;
    let r = match cfg.take("r") {
        None => 2.0,
        Some(raw) if raw == "inf" => f64::INFINITY,
        Some(raw) => raw
            .parse::<f64>()
            .map_err(|_| CliError::Parse(format!("key 'r': cannot parse '{raw}'")))?,
    };
    let x_b: f64 = cfg
        .take_parsed("x_b")?
        .ok_or_else(|| CliError::Parse("bound spec needs 'x_b'".into()))?;
    let b_b: f64 = cfg
        .take_parsed("b_b")?
        .ok_or_else(|| CliError::Parse("bound spec needs 'b_b'".into()))?;
    let mut constraints = Vec::new();
    for (key, raw) in cfg.take_prefixed("constraint_") {
        let (coeffs, delta) = raw
            .rsplit_once(':')
            .ok_or_else(|| CliError::Parse(format!("{key}: expected 'c1,...,cp : delta'")))?;
        let c = parse_f64_list(coeffs)?;
        if c.len() != p {
            return Err(CliError::Parse(format!("{key}: {} coefficients for p = {p}", c.len())));
        }
        let delta: f64 = delta
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("{key}: bad margin '{delta}'")))?;
        constraints.push(ClassConstraint { c: Array1::from(c), delta });
    }
    Ok(HypothesisClassSpec::new(p, r, x_b, b_b, constraints)?)
}
