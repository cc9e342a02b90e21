//! Run configuration: strict line-oriented `key = value` text with
//! `[section]` headers. Unknown sections or keys are rejected with the line
//! number; all invariants are enforced with messages naming the field.

use std::path::{Path, PathBuf};

use crate::error::{Result, VmxError};
use crate::fields::EInit;
use crate::kinetic::{InitialData, Pusher};
use crate::vec3::Vec3;

/// Which analytic initial-data family the run starts from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialFamily {
    ThermalCloud,
    ColdCloud,
    VacuumPulse,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    // box
    pub cells: usize,
    pub length: f64,
    // time
    pub dt: f64,
    pub n_steps: usize,
    // particles / initial data
    pub family: InitialFamily,
    pub amplitude: f64,
    pub center: Vec3,
    pub rx: f64,
    pub rp: f64,
    pub nx_particles: usize,
    pub np_particles: usize,
    pub pusher: Pusher,
    // fields
    pub e_init: EInit,
    // diagnostics
    pub cadence: usize,
    pub sphere_polar: usize,
    pub sphere_azimuth: usize,
    pub theta_q: Vec<(f64, f64)>,
    pub local_energy_radius: f64,
    pub lemma51_params: Vec<(f64, f64)>,
    pub lemma23_alphas: Vec<f64>,
    // history
    pub record_history: bool,
    pub horizon: f64,
    // verifications
    pub enabled_checks: Vec<String>,
    // output
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cells: 16,
            length: 6.0,
            dt: 0.02,
            n_steps: 200,
            family: InitialFamily::ThermalCloud,
            amplitude: 0.4,
            center: Vec3::new(3.0, 3.0, 3.0),
            rx: 0.6,
            rp: 0.4,
            nx_particles: 16,
            np_particles: 2,
            pusher: Pusher::Rk4,
            e_init: EInit::DiscretePoisson,
            cadence: 10,
            sphere_polar: 8,
            sphere_azimuth: 16,
            theta_q: vec![(2.0, 1.4), (3.0, 1.05)],
            local_energy_radius: 1.0,
            lemma51_params: vec![(1.0, 0.1), (2.0, 0.05)],
            lemma23_alphas: vec![0.2, 0.5],
            record_history: false,
            horizon: 10.0,
            enabled_checks: vec!["all".to_string()],
            output_dir: PathBuf::from("vmx-out"),
            seed: 42,
        }
    }
}

impl RunConfig {
    pub fn h(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn max_stable_dt(&self) -> f64 {
        self.h() / 3.0f64.sqrt()
    }

    pub fn t_end(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn initial_data(&self) -> InitialData {
        match self.family {
            InitialFamily::ThermalCloud => {
                InitialData::thermal_cloud(self.amplitude, self.center, self.rx, self.rp)
            }
            InitialFamily::ColdCloud => {
                InitialData::cold_cloud(self.amplitude, self.center, self.rx)
            }
            InitialFamily::VacuumPulse => {
                InitialData::vacuum_pulse(self.amplitude, self.center, self.rx)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invariant = |field: &str, message: String| -> Result<()> {
            Err(VmxError::ConfigInvariant { field: field.to_string(), message })
        };
        if self.cells == 0 || self.length <= 0.0 {
            return invariant("box.cells", "box must have positive size".into());
        }
        if self.dt <= 0.0 {
            return invariant("time.dt", "dt must be positive".into());
        }
        if self.dt > self.max_stable_dt() * (1.0 + 1e-12) {
            return invariant(
                "time.dt",
                format!(
                    "dt = {} violates the stability bound dt <= h/sqrt(3) = {}",
                    self.dt,
                    self.max_stable_dt()
                ),
            );
        }
        if self.n_steps > 0 {
            if self.cadence == 0 || self.n_steps % self.cadence != 0 {
                return invariant(
                    "diagnostics.cadence",
                    format!("cadence {} must divide n_steps {}", self.cadence, self.n_steps),
                );
            }
        }
        if self.horizon > self.t_end() + 1e-12 && self.record_history && self.n_steps > 0 {
            return invariant(
                "history.horizon",
                format!("horizon {} exceeds run length {}", self.horizon, self.t_end()),
            );
        }
        // the initial support must fit inside the box; growth during the run
        // is bounded by |v| < 1 and enforced at runtime (escape halts the run)
        let dist_to_wall = [self.center.x, self.center.y, self.center.z]
            .iter()
            .map(|c| c.min(self.length - c))
            .fold(f64::INFINITY, f64::min);
        if self.rx >= dist_to_wall {
            return invariant(
                "particles.rx",
                format!(
                    "support radius {} reaches the box boundary (distance {})",
                    self.rx, dist_to_wall
                ),
            );
        }
        if self.nx_particles == 0 || (self.family == InitialFamily::ThermalCloud && self.np_particles == 0) {
            return invariant("particles.nx", "particle lattice must be non-empty".into());
        }
        for (_, q) in &self.theta_q {
            if *q < 1.0 {
                return invariant("diagnostics.theta_q", format!("q = {q} must be >= 1"));
            }
        }
        Ok(())
    }

    /// Canonical echo of the configuration (stable ordering, used for the
    /// provenance hash and the report).
    pub fn echo(&self) -> String {
        let mut s = String::new();
        s.push_str("[box]\n");
        s.push_str(&format!("cells = {}\n", self.cells));
        s.push_str(&format!("length = {}\n", self.length));
        s.push_str("[time]\n");
        s.push_str(&format!("dt = {}\n", self.dt));
        s.push_str(&format!("n_steps = {}\n", self.n_steps));
        s.push_str("[particles]\n");
        s.push_str(&format!(
            "initial = {}\n",
            match self.family {
                InitialFamily::ThermalCloud => "thermal_cloud",
                InitialFamily::ColdCloud => "cold_cloud",
                InitialFamily::VacuumPulse => "vacuum_pulse",
            }
        ));
        s.push_str(&format!("amplitude = {}\n", self.amplitude));
        s.push_str(&format!(
            "center = {} {} {}\n",
            self.center.x, self.center.y, self.center.z
        ));
        s.push_str(&format!("rx = {}\n", self.rx));
        s.push_str(&format!("rp = {}\n", self.rp));
        s.push_str(&format!("nx = {}\n", self.nx_particles));
        s.push_str(&format!("np = {}\n", self.np_particles));
        s.push_str(&format!(
            "pusher = {}\n",
            match self.pusher {
                Pusher::Rk4 => "rk4",
                Pusher::Boris => "boris",
            }
        ));
        s.push_str("[fields]\n");
        s.push_str(&format!(
            "e_init = {}\n",
            match self.e_init {
                EInit::Analytic => "analytic",
                EInit::DiscretePoisson => "discrete_poisson",
                EInit::ExactSymbolPoisson => "exact_symbol",
            }
        ));
        s.push_str("[diagnostics]\n");
        s.push_str(&format!("cadence = {}\n", self.cadence));
        s.push_str(&format!("sphere_polar = {}\n", self.sphere_polar));
        s.push_str(&format!("sphere_azimuth = {}\n", self.sphere_azimuth));
        let tq: Vec<String> =
            self.theta_q.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        s.push_str(&format!("theta_q = {}\n", tq.join(", ")));
        s.push_str(&format!("local_energy_radius = {}\n", self.local_energy_radius));
        let l51: Vec<String> =
            self.lemma51_params.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        s.push_str(&format!("lemma51 = {}\n", l51.join(", ")));
        let l23: Vec<String> = self.lemma23_alphas.iter().map(|a| format!("{a}")).collect();
        s.push_str(&format!("lemma23_alpha = {}\n", l23.join(", ")));
        s.push_str("[history]\n");
        s.push_str(&format!("record = {}\n", self.record_history));
        s.push_str(&format!("horizon = {}\n", self.horizon));
        s.push_str("[verifications]\n");
        s.push_str(&format!("enabled = {}\n", self.enabled_checks.join(", ")));
        s.push_str("[output]\n");
        s.push_str(&format!("directory = {}\n", self.output_dir.display()));
        s.push_str("[run]\n");
        s.push_str(&format!("seed = {}\n", self.seed));
        s
    }
}

/// Parse and validate a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| VmxError::io(path.display().to_string(), e))?;
    parse_config(&text, &path.display().to_string())
}

pub fn parse_config(text: &str, path: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    let err = |line: usize, message: String| VmxError::Config {
        path: path.to_string(),
        line,
        message,
    };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw).trim().to_string();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(err(lineno, format!("malformed section header `{line}`")));
            }
            section = line[1..line.len() - 1].trim().to_string();
            const SECTIONS: &[&str] = &[
                "box",
                "time",
                "particles",
                "fields",
                "diagnostics",
                "history",
                "verifications",
                "output",
                "run",
            ];
            if !SECTIONS.contains(&section.as_str()) {
                return Err(err(lineno, format!("unknown section `{section}`")));
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(lineno, format!("expected `key = value`, got `{line}`")));
        };
        let key = key.trim();
        let value = value.trim();
        let full = format!("{section}.{key}");
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| err(lineno, format!("`{full}`: invalid number `{v}`")))
        };
        let parse_usize = |v: &str| -> Result<usize> {
            v.parse::<usize>().map_err(|_| err(lineno, format!("`{full}`: invalid integer `{v}`")))
        };
        match full.as_str() {
            "box.cells" => cfg.cells = parse_usize(value)?,
            "box.length" => cfg.length = parse_f64(value)?,
            "time.dt" => cfg.dt = parse_f64(value)?,
            "time.n_steps" => cfg.n_steps = parse_usize(value)?,
            "particles.initial" => {
                cfg.family = match value {
                    "thermal_cloud" => InitialFamily::ThermalCloud,
                    "cold_cloud" => InitialFamily::ColdCloud,
                    "vacuum_pulse" => InitialFamily::VacuumPulse,
                    other => {
                        return Err(err(lineno, format!("unknown initial data family `{other}`")))
                    }
                }
            }
            "particles.amplitude" => cfg.amplitude = parse_f64(value)?,
            "particles.center" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(err(lineno, "`particles.center`: need three numbers".into()));
                }
                cfg.center =
                    Vec3::new(parse_f64(parts[0])?, parse_f64(parts[1])?, parse_f64(parts[2])?);
            }
            "particles.rx" => cfg.rx = parse_f64(value)?,
            "particles.rp" => cfg.rp = parse_f64(value)?,
            "particles.nx" => cfg.nx_particles = parse_usize(value)?,
            "particles.np" => cfg.np_particles = parse_usize(value)?,
            "particles.pusher" => {
                cfg.pusher = match value {
                    "rk4" => Pusher::Rk4,
                    "boris" => Pusher::Boris,
                    other => return Err(err(lineno, format!("unknown pusher `{other}`"))),
                }
            }
            "fields.e_init" => {
                cfg.e_init = match value {
                    "analytic" => EInit::Analytic,
                    "discrete_poisson" => EInit::DiscretePoisson,
                    "exact_symbol" => EInit::ExactSymbolPoisson,
                    other => return Err(err(lineno, format!("unknown e_init `{other}`"))),
                }
            }
            "diagnostics.cadence" => cfg.cadence = parse_usize(value)?,
            "diagnostics.sphere_polar" => cfg.sphere_polar = parse_usize(value)?,
            "diagnostics.sphere_azimuth" => cfg.sphere_azimuth = parse_usize(value)?,
            "diagnostics.theta_q" => {
                cfg.theta_q = parse_pair_list(value)
                    .map_err(|m| err(lineno, format!("`diagnostics.theta_q`: {m}")))?;
            }
            "diagnostics.local_energy_radius" => cfg.local_energy_radius = parse_f64(value)?,
            "diagnostics.lemma51" => {
                cfg.lemma51_params = parse_pair_list(value)
                    .map_err(|m| err(lineno, format!("`diagnostics.lemma51`: {m}")))?;
            }
            "diagnostics.lemma23_alpha" => {
                cfg.lemma23_alphas = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err(lineno, "`diagnostics.lemma23_alpha`: bad list".into()))?;
            }
            "history.record" => {
                cfg.record_history = match value {
                    "true" => true,
                    "false" => false,
                    other => return Err(err(lineno, format!("`history.record`: `{other}`"))),
                }
            }
            "history.horizon" => cfg.horizon = parse_f64(value)?,
            "verifications.enabled" => {
                cfg.enabled_checks =
                    value.split(',').map(|v| v.trim().to_string()).collect();
            }
            "output.directory" => cfg.output_dir = PathBuf::from(value),
            "run.seed" => {
                cfg.seed = value
                    .parse::<u64>()
                    .map_err(|_| err(lineno, format!("`run.seed`: invalid integer `{value}`")))?;
            }
            _ => return Err(err(lineno, format!("unknown key `{full}`"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn parse_pair_list(value: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    for item in value.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (a, b) = item.split_once(':').ok_or_else(|| format!("expected a:b, got `{item}`"))?;
        let a = a.trim().parse::<f64>().map_err(|_| format!("bad number `{a}`"))?;
        let b = b.trim().parse::<f64>().map_err(|_| format!("bad number `{b}`"))?;
        out.push((a, b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("[time]\nn_steps = 100\ncadence_is_not_here = 1", "test");
        assert!(cfg.is_err()); // unknown key rejected
        let cfg = parse_config("[time]\nn_steps = 100\n", "test").unwrap();
        assert_eq!(cfg.n_steps, 100);
        assert_eq!(cfg.cells, 16);
        assert!(!cfg.echo().is_empty());
    }

    #[test]
    fn stability_bound_is_named() {
        let text = "[box]\ncells = 16\nlength = 4.0\n[time]\ndt = 0.3\n";
        let e = parse_config(text, "test").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("h/sqrt(3)"), "{msg}");
        assert!(msg.contains("time.dt"), "{msg}");
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let text = "[box]\ncells = 16\nwat = 3\n";
        let e = parse_config(text, "cfg.txt").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("cfg.txt:3"), "{msg}");
        assert!(msg.contains("box.wat"), "{msg}");
    }

    #[test]
    fn cadence_must_divide_steps() {
        let text = "[time]\nn_steps = 100\n[diagnostics]\ncadence = 7\n";
        let e = parse_config(text, "test").unwrap_err();
        assert!(e.to_string().contains("cadence"));
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "# header\n[time]\n# comment\ndt = 0.04  # inline\nn_steps = 10\n\n[diagnostics]\ncadence = 5\n";
        let cfg = parse_config(text, "test").unwrap();
        assert_eq!(cfg.dt, 0.04);
        assert_eq!(cfg.n_steps, 10);
    }

    #[test]
    fn echo_roundtrips() {
        let cfg = RunConfig::default();
        let echoed = parse_config(&cfg.echo(), "echo").unwrap();
        assert_eq!(echoed.echo(), cfg.echo());
    }
}
