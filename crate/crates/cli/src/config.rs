//! Flat `key = value` run configuration.
//!
//! Sources are layered: built-in defaults, then the config file, then
//! `--set KEY=VALUE` pairs, then the dedicated flags. Every key is checked
//! against the operation it feeds and errors name the key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use muck_core::experiments::default_deltas;
use muck_core::{CharacteristicKind, Family};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Martingale,
    Hilbert,
    Riesz,
    Maximal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    One,
    TwoValued,
    Power(f64),
    Random(f64),
    File(PathBuf),
}

impl WeightSpec {
    /// Short id for CSV rows.
    pub fn id(&self) -> String {
        match self {
            WeightSpec::One => "one".into(),
            WeightSpec::TwoValued => "two-valued".into(),
            WeightSpec::Power(a) => format!("power:{a}"),
            WeightSpec::Random(a) => format!("random:{a}"),
            WeightSpec::File(p) => format!("file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Haar,
    Ramp,
    Logsin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid_levels: u32,
    pub circle_points: usize,
    pub interval_family: Family,
    pub p: f64,
    pub delta_grid: Vec<f64>,
    pub seed: u64,
    pub operator: OperatorKind,
    /// `identity`, `alternating`, `random` or an explicit `+-` string.
    pub signs: String,
    pub output_dir: PathBuf,
    pub norm_tol: f64,
    pub char_tol: f64,
    /// Iteration cap of the `L^2` engine.
    pub norm_budget: usize,
    /// Operator applications per `L^p` estimate.
    pub lp_budget: usize,
    /// Norm evaluations per sharpness search.
    pub search_budget: usize,
    pub weight: WeightSpec,
    pub other_weight: WeightSpec,
    pub direction: Direction,
    pub kind: CharacteristicKind,
    pub count: Option<usize>,
    pub amplitude: f64,
    pub c_max: f64,
    pub c0: f64,
    pub terms: usize,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_levels: 10,
            circle_points: 512,
            interval_family: Family::Dyadic,
            p: 2.0,
            delta_grid: default_deltas(),
            seed: 0,
            operator: OperatorKind::Martingale,
            signs: "alternating".into(),
            output_dir: PathBuf::from("muck-out"),
            norm_tol: 1e-10,
            char_tol: 1e-10,
            norm_budget: 100_000,
            lp_budget: 2000,
            search_budget: 64,
            weight: WeightSpec::One,
            other_weight: WeightSpec::One,
            direction: Direction::Ramp,
            kind: CharacteristicKind::Ap(2.0),
            count: None,
            amplitude: 1.0,
            c_max: 2.0,
            c0: muck_core::interpolation::DEFAULT_C0,
            terms: 6,
            svg: false,
        }
    }
}

pub const KEYS: [&str; 24] = [
    "grid_levels",
    "circle_points",
    "interval_family",
    "p",
    "delta_grid",
    "seed",
    "operator",
    "signs",
    "output_dir",
    "norm_tol",
    "char_tol",
    "norm_budget",
    "lp_budget",
    "search_budget",
    "weight",
    "other_weight",
    "direction",
    "kind",
    "count",
    "amplitude",
    "c_max",
    "c0",
    "terms",
    "svg",
];

/// Ordered `key -> value` pairs; later sources overwrite earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    /// `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = ConfigMap::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(line, format!("line {} is not key=value", n + 1)))?;
            map.set(k.trim(), v.trim());
        }
        Ok(map)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_owned(), value.into());
    }

    /// `KEY=VALUE` from the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair.split_once('=').ok_or_else(|| CliError::config(pair, "expected KEY=VALUE"))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

fn number<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| CliError::config(key, format!("cannot parse {v:?}")))
}

fn weight_spec(key: &str, v: &str) -> Result<WeightSpec> {
    let spec = match v.split_once(':') {
        None if v == "one" => WeightSpec::One,
        None if v == "two-valued" => WeightSpec::TwoValued,
        Some(("power", a)) => WeightSpec::Power(number(key, a)?),
        Some(("random", a)) => WeightSpec::Random(number(key, a)?),
        Some(("file", p)) => WeightSpec::File(PathBuf::from(p)),
        _ => {
            return Err(CliError::config(
                key,
                format!("unknown weight {v:?}; use one, two-valued, power:A, random:A or file:PATH"),
            ))
        }
    };
    match spec {
        WeightSpec::Power(a) if !(a > -1.0) => Err(CliError::config(key, "power exponent must exceed -1")),
        WeightSpec::Random(a) if !(a > 0.0 && a <= 50.0) => {
            Err(CliError::config(key, "random amplitude must lie in (0, 50]"))
        }
        s => Ok(s),
    }
}

fn kind(key: &str, v: &str, p: f64) -> Result<CharacteristicKind> {
    Ok(match v {
        "a1" => CharacteristicKind::A1,
        "ap" => CharacteristicKind::Ap(p),
        "ainfty" => CharacteristicKind::AInfinity,
        "bmo" => CharacteristicKind::Bmo,
        "blo" => CharacteristicKind::Blo,
        _ => return Err(CliError::config(key, format!("unknown characteristic {v:?}"))),
    })
}

fn check(ok: bool, key: &str, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(key, msg))
    }
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(unknown) = map.0.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::config(unknown, "unknown key"));
        }
        let get = |k: &str| map.get(k);
        if let Some(v) = get("grid_levels") {
            cfg.grid_levels = number("grid_levels", v)?;
        }
        if let Some(v) = get("circle_points") {
            cfg.circle_points = number("circle_points", v)?;
        }
        if let Some(v) = get("interval_family") {
            cfg.interval_family = match v {
                "dyadic" => Family::Dyadic,
                "shifted" => Family::Shifted,
                _ => return Err(CliError::config("interval_family", "expected dyadic or shifted")),
            };
        }
        if let Some(v) = get("p") {
            cfg.p = number("p", v)?;
        }
        if let Some(v) = get("delta_grid") {
            cfg.delta_grid = v.split(',').map(|d| number("delta_grid", d.trim())).collect::<Result<_>>()?;
        }
        if let Some(v) = get("seed") {
            cfg.seed = number("seed", v)?;
        }
        if let Some(v) = get("operator") {
            cfg.operator = match v {
                "mt" => OperatorKind::Martingale,
                "hilbert" => OperatorKind::Hilbert,
                "riesz" => OperatorKind::Riesz,
                "maximal" => OperatorKind::Maximal,
                _ => return Err(CliError::config("operator", "expected mt, hilbert, riesz or maximal")),
            };
        }
        if let Some(v) = get("signs") {
            cfg.signs = v.to_owned();
        }
        if let Some(v) = get("output_dir") {
            cfg.output_dir = PathBuf::from(v);
        }
        if let Some(v) = get("norm_tol") {
            cfg.norm_tol = number("norm_tol", v)?;
        }
        if let Some(v) = get("char_tol") {
            cfg.char_tol = number("char_tol", v)?;
        }
        if let Some(v) = get("norm_budget") {
            cfg.norm_budget = number("norm_budget", v)?;
        }
        if let Some(v) = get("lp_budget") {
            cfg.lp_budget = number("lp_budget", v)?;
        }
        if let Some(v) = get("search_budget") {
            cfg.search_budget = number("search_budget", v)?;
        }
        if let Some(v) = get("weight") {
            cfg.weight = weight_spec("weight", v)?;
        }
        if let Some(v) = get("other_weight") {
            cfg.other_weight = weight_spec("other_weight", v)?;
        }
        if let Some(v) = get("direction") {
            cfg.direction = match v {
                "haar" => Direction::Haar,
                "ramp" => Direction::Ramp,
                "logsin" => Direction::Logsin,
                _ => return Err(CliError::config("direction", "expected haar, ramp or logsin")),
            };
        }
        if let Some(v) = get("count") {
            cfg.count = Some(number("count", v)?);
        }
        if let Some(v) = get("amplitude") {
            cfg.amplitude = number("amplitude", v)?;
        }
        if let Some(v) = get("c_max") {
            cfg.c_max = number("c_max", v)?;
        }
        if let Some(v) = get("c0") {
            cfg.c0 = number("c0", v)?;
        }
        if let Some(v) = get("terms") {
            cfg.terms = number("terms", v)?;
        }
        if let Some(v) = get("svg") {
            cfg.svg = number("svg", v)?;
        }
        // depends on p, so parsed last
        cfg.kind = kind("kind", get("kind").unwrap_or("ap"), cfg.p)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        check((1..=24).contains(&self.grid_levels), "grid_levels", "must lie in 1..=24")?;
        check(
            self.circle_points >= 4 && self.circle_points.is_power_of_two() && self.circle_points <= 1 << 24,
            "circle_points",
            "must be a power of two in [4, 2^24]",
        )?;
        check(self.p > 1.0 && self.p.is_finite(), "p", "must lie in (1, inf)")?;
        check(!self.delta_grid.is_empty(), "delta_grid", "must not be empty")?;
        check(
            self.delta_grid.iter().all(|d| *d > 0.0 && *d < 1.0),
            "delta_grid",
            "entries must lie in (0, 1)",
        )?;
        check(self.delta_grid.windows(2).all(|w| w[0] < w[1]), "delta_grid", "must be strictly increasing")?;
        check(self.norm_tol > 0.0 && self.norm_tol < 1.0, "norm_tol", "must lie in (0, 1)")?;
        check(self.char_tol >= 0.0 && self.char_tol < 1.0, "char_tol", "must lie in [0, 1)")?;
        check(self.norm_budget > 0, "norm_budget", "must be positive")?;
        check(self.lp_budget > 0, "lp_budget", "must be positive")?;
        check(self.search_budget > 0, "search_budget", "must be positive")?;
        check(self.count != Some(0), "count", "must be positive")?;
        check(self.amplitude > 0.0 && self.amplitude <= 50.0, "amplitude", "must lie in (0, 50]")?;
        check(self.c_max > 1.0, "c_max", "must exceed 1")?;
        check(self.c0 > 0.0, "c0", "must be positive")?;
        check(self.terms >= 1, "terms", "must be positive")?;
        Ok(())
    }
}
