//! Flat key-value run configuration with a versioned schema.
//!
//! The format is one `key = value` pair per line, `#` comments, and a
//! mandatory `schema_version`.  Unknown keys are hard errors so typos never
//! silently fall back to defaults.

use crate::model::{make_preset_state, ConeSurface, PointInteraction, Preset, RadialState};
use crate::numerics::QuadratureSpec;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const SCHEMA_VERSION: u32 = 1;

/// Resolved run configuration with every field defaulted.
#[derive(Debug, Clone)]
pub struct Config {
    pub schema_version: u32,
    pub alpha: f64,
    pub preset: String,
    pub sigma: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub cone_solid_angle: f64,
    pub radii: Vec<f64>,
    pub t_start: f64,
    pub t_max: Option<f64>,
    pub grid_r: Vec<f64>,
    pub grid_t: Vec<f64>,
    pub ray_speed: f64,
    pub window: (f64, f64),
    pub momentum_max: f64,
    pub momentum_step: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            schema_version: SCHEMA_VERSION,
            alpha: 0.0,
            preset: "gaussian".into(),
            sigma: 1.0,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            cone_solid_angle: 4.0 * PI,
            radii: vec![10.0, 20.0, 40.0],
            t_start: 1.0,
            t_max: None,
            grid_r: vec![2.0, 6.5, 11.0, 15.5, 20.0],
            grid_t: vec![1.0, 3.25, 5.5, 7.75, 10.0],
            ray_speed: 1.0,
            window: (10.0, 200.0),
            momentum_max: 8.0,
            momentum_step: 0.02,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Config(format!("key '{key}': expected a number, got '{v}'")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| parse_f64(key, s.trim()))
        .collect::<Result<Vec<f64>>>()
}

impl Config {
    /// Parse the flat key-value text; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", ln + 1))
            })?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "schema_version" => {
                    cfg.schema_version = v.parse::<u32>().map_err(|_| {
                        Error::Config(format!("key 'schema_version': bad integer '{v}'"))
                    })?
                }
                "alpha" => cfg.alpha = parse_f64(key, v)?,
                "preset" => cfg.preset = v.to_string(),
                "sigma" => cfg.sigma = parse_f64(key, v)?,
                "abs_tol" => cfg.abs_tol = parse_f64(key, v)?,
                "rel_tol" => cfg.rel_tol = parse_f64(key, v)?,
                "max_subdivisions" => {
                    cfg.max_subdivisions = v.parse::<usize>().map_err(|_| {
                        Error::Config(format!("key 'max_subdivisions': bad integer '{v}'"))
                    })?
                }
                "cone_solid_angle" => cfg.cone_solid_angle = parse_f64(key, v)?,
                "radii" => cfg.radii = parse_list(key, v)?,
                "t_start" => cfg.t_start = parse_f64(key, v)?,
                "t_max" => cfg.t_max = Some(parse_f64(key, v)?),
                "grid_r" => cfg.grid_r = parse_list(key, v)?,
                "grid_t" => cfg.grid_t = parse_list(key, v)?,
                "ray_speed" => cfg.ray_speed = parse_f64(key, v)?,
                "window_t_min" => cfg.window.0 = parse_f64(key, v)?,
                "window_t_max" => cfg.window.1 = parse_f64(key, v)?,
                "momentum_max" => cfg.momentum_max = parse_f64(key, v)?,
                "momentum_step" => cfg.momentum_step = parse_f64(key, v)?,
                _ => return Err(Error::Config(format!("unknown key '{key}'"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Config> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} not supported (tool speaks {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.abs_tol >= 1.0 {
            return Err(Error::Config(format!(
                "key 'abs_tol': {} >= 1 makes every result vacuous",
                self.abs_tol
            )));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Config(format!(
                "key 'sigma': must be > 0, got {}",
                self.sigma
            )));
        }
        if self.preset_kind().is_err() {
            return Err(Error::Config(format!(
                "key 'preset': unknown preset '{}'",
                self.preset
            )));
        }
        if !(self.t_start > 0.0) {
            return Err(Error::Config("key 't_start': must be > 0".into()));
        }
        if self.radii.is_empty() || self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "key 'radii': must be a non-empty increasing list".into(),
            ));
        }
        if !(self.cone_solid_angle > 0.0 && self.cone_solid_angle <= 4.0 * PI + 1e-12) {
            return Err(Error::Config(
                "key 'cone_solid_angle': must lie in (0, 4 pi]".into(),
            ));
        }
        Ok(())
    }

    pub fn preset_kind(&self) -> Result<Preset> {
        match self.preset.as_str() {
            "gaussian" => Ok(Preset::Gaussian { sigma: self.sigma }),
            "exponential" => Ok(Preset::ExponentialDecay),
            "w_projected" => Ok(Preset::WProjectedExponential),
            "bound_orthogonal" => Ok(Preset::BoundOrthogonal { alpha: self.alpha }),
            other => Err(Error::Config(format!("unknown preset '{other}'"))),
        }
    }

    pub fn quad_spec(&self) -> QuadratureSpec {
        let mut s = QuadratureSpec::default();
        s.abs_tol = self.abs_tol;
        s.rel_tol = self.rel_tol;
        s.max_subdivisions = self.max_subdivisions;
        s
    }

    pub fn interaction(&self) -> Result<PointInteraction> {
        PointInteraction::at_origin(self.alpha)
    }

    pub fn state(&self) -> Result<RadialState> {
        make_preset_state(self.preset_kind()?)
    }

    pub fn cone(&self) -> Result<ConeSurface> {
        ConeSurface::new(self.cone_solid_angle, [0.0, 0.0, 1.0])
    }

    /// Stable key order view of the resolved configuration, for manifests.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut m = BTreeMap::new();
        m.insert("schema_version".into(), self.schema_version.to_string());
        m.insert("alpha".into(), format!("{}", self.alpha));
        m.insert("preset".into(), self.preset.clone());
        m.insert("sigma".into(), format!("{}", self.sigma));
        m.insert("abs_tol".into(), format!("{}", self.abs_tol));
        m.insert("rel_tol".into(), format!("{}", self.rel_tol));
        m.insert(
            "max_subdivisions".into(),
            self.max_subdivisions.to_string(),
        );
        m.insert(
            "cone_solid_angle".into(),
            format!("{}", self.cone_solid_angle),
        );
        m.insert("radii".into(), list(&self.radii));
        m.insert("t_start".into(), format!("{}", self.t_start));
        m.insert(
            "t_max".into(),
            self.t_max.map(|v| format!("{v}")).unwrap_or_default(),
        );
        m.insert("grid_r".into(), list(&self.grid_r));
        m.insert("grid_t".into(), list(&self.grid_t));
        m.insert("ray_speed".into(), format!("{}", self.ray_speed));
        m.insert("window_t_min".into(), format!("{}", self.window.0));
        m.insert("window_t_max".into(), format!("{}", self.window.1));
        m.insert("momentum_max".into(), format!("{}", self.momentum_max));
        m.insert("momentum_step".into(), format!("{}", self.momentum_step));
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::parse("schema_version = 1\n").unwrap();
        assert_eq!(cfg.alpha, 0.0);
        assert_eq!(cfg.preset, "gaussian");
        assert_eq!(cfg.radii, vec![10.0, 20.0, 40.0]);
    }

    #[test]
    fn parses_lists_and_comments() {
        let cfg = Config::parse(
            "# comment\nalpha = 1.0\nradii = 5, 10, 15 # trailing\npreset = exponential\n",
        )
        .unwrap();
        assert_eq!(cfg.alpha, 1.0);
        assert_eq!(cfg.radii, vec![5.0, 10.0, 15.0]);
        assert_eq!(cfg.preset, "exponential");
    }

    #[test]
    fn unknown_key_is_a_hard_error_naming_the_key() {
        let err = Config::parse("alhpa = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("alhpa"), "{err}");
    }

    #[test]
    fn loose_tolerance_is_rejected() {
        let err = Config::parse("abs_tol = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("abs_tol"), "{err}");
    }

    #[test]
    fn negative_sigma_is_rejected() {
        let err = Config::parse("sigma = -2.0\n").unwrap_err();
        assert!(err.to_string().contains("sigma"), "{err}");
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        assert!(Config::parse("schema_version = 99\n").is_err());
    }
}
