//! Line-oriented `key = value` experiment configs.
//!
//! `#` starts a comment. Lists are comma separated and each item may be an
//! inclusive range `start:end` or `start:step:end`, e.g. `m1_values = 20:2:120`.
//! Unknown keys and repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::channel::{ScenarioConfig, UlaConfig};
use crate::units::dbm_to_watts;
use crate::{Error, Result};

pub const DEFAULT_TRIALS: usize = 10_000;

const KEYS: &[&str] = &[
    "num_users",
    "nlos_paths",
    "cell_radius_m",
    "min_distance_m",
    "bs_antennas",
    "ue_antennas",
    "pmax_dbm",
    "noise_dbm",
    "seed",
    "trials",
    "threads",
    "gain_ratio",
    "m1_values",
    "pmax_sweep_dbm",
    "allocation",
    "max_group_size",
    "split_antennas",
    "split_angles_deg",
    "full_angle_deg",
    "grid_points",
];

/// Parsed config file; `None` means "use the command's default".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub num_users: Option<usize>,
    pub nlos_paths: Option<usize>,
    pub cell_radius_m: Option<f64>,
    pub min_distance_m: Option<f64>,
    pub bs_antennas: Option<usize>,
    pub ue_antennas: Option<usize>,
    pub pmax_dbm: Option<f64>,
    pub noise_dbm: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub threads: Option<usize>,
    pub gain_ratio: Option<f64>,
    pub m1_values: Option<Vec<usize>>,
    pub pmax_sweep_dbm: Option<Vec<f64>>,
    pub allocation: Option<Vec<usize>>,
    pub max_group_size: Option<usize>,
    pub split_antennas: Option<Vec<usize>>,
    pub split_angles_deg: Option<Vec<f64>>,
    pub full_angle_deg: Option<f64>,
    pub grid_points: Option<usize>,
}

fn config_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn parse_scalar<T: std::str::FromStr>(s: &str, line: usize, key: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| config_err(line, format!("invalid value {s:?} for {key}")))
}

fn parse_float_list(s: &str, line: usize, key: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let parts: Vec<f64> = item
            .split(':')
            .map(|p| parse_scalar::<f64>(p, line, key))
            .collect::<Result<_>>()?;
        let (start, step, end) = match parts[..] {
            [v] => {
                out.push(v);
                continue;
            }
            [a, b] => (a, 1.0, b),
            [a, st, b] => (a, st, b),
            _ => return Err(config_err(line, format!("bad range {item:?} for {key}"))),
        };
        if !(step > 0.0) || end < start {
            return Err(config_err(line, format!("empty or non-increasing range {item:?} for {key}")));
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        out.extend((0..=n).map(|i| start + step * i as f64));
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(config_err(line, format!("non-finite value in {key}")));
    }
    Ok(out)
}

fn parse_int_list(s: &str, line: usize, key: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let parts: Vec<usize> = item
            .split(':')
            .map(|p| parse_scalar::<usize>(p, line, key))
            .collect::<Result<_>>()?;
        match parts[..] {
            [v] => out.push(v),
            [a, b] if a <= b => out.extend(a..=b),
            [a, st, b] if a <= b && st > 0 => out.extend((a..=b).step_by(st)),
            _ => return Err(config_err(line, format!("bad range {item:?} for {key}"))),
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = BTreeMap::new();
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected `key = value`, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(config_err(line, format!("unknown key {key:?}")));
            }
            if let Some(first) = seen.insert(key.to_string(), line) {
                return Err(config_err(line, format!("{key} already set on line {first}")));
            }
            match key {
                "num_users" => cfg.num_users = Some(parse_scalar(value, line, key)?),
                "nlos_paths" => cfg.nlos_paths = Some(parse_scalar(value, line, key)?),
                "cell_radius_m" => cfg.cell_radius_m = Some(parse_scalar(value, line, key)?),
                "min_distance_m" => cfg.min_distance_m = Some(parse_scalar(value, line, key)?),
                "bs_antennas" => cfg.bs_antennas = Some(parse_scalar(value, line, key)?),
                "ue_antennas" => cfg.ue_antennas = Some(parse_scalar(value, line, key)?),
                "pmax_dbm" => cfg.pmax_dbm = Some(parse_scalar(value, line, key)?),
                "noise_dbm" => cfg.noise_dbm = Some(parse_scalar(value, line, key)?),
                "seed" => cfg.seed = Some(parse_scalar(value, line, key)?),
                "trials" => cfg.trials = Some(parse_scalar(value, line, key)?),
                "threads" => cfg.threads = Some(parse_scalar(value, line, key)?),
                "gain_ratio" => cfg.gain_ratio = Some(parse_scalar(value, line, key)?),
                "m1_values" => cfg.m1_values = Some(parse_int_list(value, line, key)?),
                "pmax_sweep_dbm" => cfg.pmax_sweep_dbm = Some(parse_float_list(value, line, key)?),
                "allocation" => cfg.allocation = Some(parse_int_list(value, line, key)?),
                "max_group_size" => cfg.max_group_size = Some(parse_scalar(value, line, key)?),
                "split_antennas" => cfg.split_antennas = Some(parse_int_list(value, line, key)?),
                "split_angles_deg" => cfg.split_angles_deg = Some(parse_float_list(value, line, key)?),
                "full_angle_deg" => cfg.full_angle_deg = Some(parse_scalar(value, line, key)?),
                "grid_points" => cfg.grid_points = Some(parse_scalar(value, line, key)?),
                _ => unreachable!("key list and match arms agree"),
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Resolves a sweep, filling unset keys with the defaults of `kind`.
    pub fn sweep_spec(&self, kind: SweepKind) -> Result<SweepSpec> {
        let default_users = match kind {
            SweepKind::AntennaSweep => 2,
            SweepKind::PowerSweep => 5,
            SweepKind::BeamPattern => 1,
            SweepKind::Snapshot => 2,
        };
        let bs = self.bs_antennas.unwrap_or(128);
        let ue = self.ue_antennas.unwrap_or(10);
        let pmax_dbm = self.pmax_dbm.unwrap_or(46.0);
        let noise_dbm = self.noise_dbm.unwrap_or(-88.0);
        for (name, v) in [("pmax_dbm", pmax_dbm), ("noise_dbm", noise_dbm)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        let scenario = ScenarioConfig {
            num_users: self.num_users.unwrap_or(default_users),
            num_nlos_paths: self.nlos_paths.unwrap_or(30),
            cell_radius: self.cell_radius_m.unwrap_or(500.0),
            min_distance: self.min_distance_m.unwrap_or(10.0),
            bs_config: UlaConfig::new(bs).map_err(|e| Error::Config(e.to_string()))?,
            ue_config: UlaConfig::new(ue).map_err(|e| Error::Config(e.to_string()))?,
            max_power: dbm_to_watts(pmax_dbm),
            noise_variance: dbm_to_watts(noise_dbm),
            rng_seed: self.seed.unwrap_or(0),
        };
        scenario.validate().map_err(|e| Error::Config(e.to_string()))?;
        let k = scenario.num_users;
        if let Some(r) = self.gain_ratio {
            if !(r >= 1.0 && r.is_finite()) {
                return Err(Error::Config(format!("gain_ratio must be >= 1, got {r}")));
            }
            if k != 2 {
                return Err(Error::Config("gain_ratio applies to two-user scenarios only".into()));
            }
        }
        let trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let spec = SweepSpec {
            kind,
            trials,
            threads: self.threads.unwrap_or(0),
            pmax_dbm,
            noise_dbm,
            gain_ratio: self.gain_ratio,
            m1_values: self
                .m1_values
                .clone()
                .unwrap_or_else(|| (1..bs.max(2)).collect()),
            pmax_sweep_dbm: self
                .pmax_sweep_dbm
                .clone()
                .unwrap_or_else(|| (0..=8).map(|i| 30.0 + 2.0 * i as f64).collect()),
            allocation: self.allocation.clone().unwrap_or_else(|| default_allocation(k, bs)),
            max_group_size: self.max_group_size.unwrap_or(k),
            split_antennas: self.split_antennas.clone().unwrap_or_else(|| vec![50, 78]),
            split_angles_deg: self.split_angles_deg.clone().unwrap_or_else(|| vec![70.0, 90.0]),
            full_angle_deg: self.full_angle_deg.unwrap_or(120.0),
            grid_points: self.grid_points.unwrap_or(crate::beam::DEFAULT_GRID_POINTS),
            scenario,
        };
        spec.check()?;
        Ok(spec)
    }
}

/// `M_1 = round(100/128 M_BS)` for the strongest user, the rest split evenly.
pub fn default_allocation(num_users: usize, bs_antennas: usize) -> Vec<usize> {
    if num_users <= 1 {
        return vec![bs_antennas; num_users];
    }
    let m1 = ((bs_antennas as f64) * 100.0 / 128.0).round() as usize;
    let rest = (bs_antennas - m1) / (num_users - 1);
    let mut alloc = vec![rest.max(1); num_users];
    alloc[0] = m1;
    alloc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    BeamPattern,
    AntennaSweep,
    PowerSweep,
    /// Per-drop tables at a single power and allocation.
    Snapshot,
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub trials: usize,
    /// Worker threads; 0 uses rayon's default.
    pub threads: usize,
    pub scenario: ScenarioConfig,
    pub pmax_dbm: f64,
    pub noise_dbm: f64,
    /// Pins `|alpha_1| / |alpha_2|` after each drop.
    pub gain_ratio: Option<f64>,
    pub m1_values: Vec<usize>,
    pub pmax_sweep_dbm: Vec<f64>,
    pub allocation: Vec<usize>,
    pub max_group_size: usize,
    pub split_antennas: Vec<usize>,
    pub split_angles_deg: Vec<f64>,
    pub full_angle_deg: f64,
    pub grid_points: usize,
}

impl SweepSpec {
    /// Feasibility checks that do not depend on random drops.
    pub fn check(&self) -> Result<()> {
        let k = self.scenario.num_users;
        let bs = self.scenario.bs_config.num_antennas();
        match self.kind {
            SweepKind::AntennaSweep => {
                if k != 2 {
                    return Err(Error::Constraint(format!("antenna sweep needs 2 users, got {k}")));
                }
                if self.m1_values.is_empty() {
                    return Err(Error::Config("m1_values is empty".into()));
                }
                if let Some(&bad) = self.m1_values.iter().find(|&&m| m == 0 || m >= bs) {
                    return Err(Error::Constraint(format!("M_1 = {bad} leaves no antennas in 1..{bs}")));
                }
            }
            SweepKind::PowerSweep => {
                if self.pmax_sweep_dbm.is_empty() {
                    return Err(Error::Config("pmax_sweep_dbm is empty".into()));
                }
            }
            SweepKind::Snapshot => {}
            SweepKind::BeamPattern => {
                if self.split_antennas.len() != self.split_angles_deg.len() {
                    return Err(Error::Config("split_antennas and split_angles_deg differ in length".into()));
                }
                if self.split_antennas.iter().sum::<usize>() > bs || self.split_antennas.contains(&0) {
                    return Err(Error::Constraint(format!(
                        "split {:?} does not fit {bs} antennas",
                        self.split_antennas
                    )));
                }
                let angles = self.split_angles_deg.iter().chain(std::iter::once(&self.full_angle_deg));
                if angles.clone().any(|&a| !(a > 0.0 && a < 180.0)) {
                    return Err(Error::Config("beam angles must be in (0, 180) degrees".into()));
                }
                if self.grid_points < 3 {
                    return Err(Error::Config("grid_points must be at least 3".into()));
                }
            }
        }
        if matches!(self.kind, SweepKind::PowerSweep | SweepKind::Snapshot) {
            if self.allocation.len() != k {
                return Err(Error::Constraint(format!(
                    "allocation has {} entries for {k} users",
                    self.allocation.len()
                )));
            }
            if self.allocation.contains(&0) || self.allocation.iter().sum::<usize>() > bs {
                return Err(Error::Constraint(format!(
                    "allocation {:?} does not fit {bs} antennas",
                    self.allocation
                )));
            }
        }
        if self.max_group_size == 0 || self.max_group_size < k && self.kind != SweepKind::BeamPattern {
            return Err(Error::Constraint(format!(
                "max_group_size {} cannot hold the {k} users of a single chain",
                self.max_group_size
            )));
        }
        Ok(())
    }

    /// Config text that reproduces this spec when parsed again.
    pub fn to_config_text(&self) -> String {
        fn join<T: std::fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let s = &self.scenario;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").expect("write to String");
        kv("num_users", s.num_users.to_string());
        kv("nlos_paths", s.num_nlos_paths.to_string());
        kv("cell_radius_m", s.cell_radius.to_string());
        kv("min_distance_m", s.min_distance.to_string());
        kv("bs_antennas", s.bs_config.num_antennas().to_string());
        kv("ue_antennas", s.ue_config.num_antennas().to_string());
        kv("pmax_dbm", self.pmax_dbm.to_string());
        kv("noise_dbm", self.noise_dbm.to_string());
        kv("seed", s.rng_seed.to_string());
        kv("trials", self.trials.to_string());
        if let Some(r) = self.gain_ratio {
            kv("gain_ratio", r.to_string());
        }
        match self.kind {
            SweepKind::AntennaSweep => kv("m1_values", join(&self.m1_values)),
            SweepKind::PowerSweep => {
                kv("pmax_sweep_dbm", join(&self.pmax_sweep_dbm));
                kv("allocation", join(&self.allocation));
            }
            SweepKind::Snapshot => kv("allocation", join(&self.allocation)),
            SweepKind::BeamPattern => {
                kv("split_antennas", join(&self.split_antennas));
                kv("split_angles_deg", join(&self.split_angles_deg));
                kv("full_angle_deg", self.full_angle_deg.to_string());
                kv("grid_points", self.grid_points.to_string());
            }
        }
        kv("max_group_size", self.max_group_size.to_string());
        out
    }
}
