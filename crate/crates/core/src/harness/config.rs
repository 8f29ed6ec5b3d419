//! INI-style report configuration.
//!
//! ```text
//! [model]
//! p = 2
//! c = 1
//! delta = 1
//! phi0 = 0.01
//!
//! [checks]
//! enabled = lambertw, equilibria, theorem1, theorem2, step2, manifold, pde
//! ```
//!
//! Every section and key is optional; unknown ones are rejected. An empty
//! `enabled` list selects no checks.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckGroup {
    Lambertw,
    Equilibria,
    Theorem1,
    Theorem2,
    Step2,
    Manifold,
    Pde,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 7] = [
        CheckGroup::Lambertw,
        CheckGroup::Equilibria,
        CheckGroup::Theorem1,
        CheckGroup::Theorem2,
        CheckGroup::Step2,
        CheckGroup::Manifold,
        CheckGroup::Pde,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckGroup::Lambertw => "lambertw",
            CheckGroup::Equilibria => "equilibria",
            CheckGroup::Theorem1 => "theorem1",
            CheckGroup::Theorem2 => "theorem2",
            CheckGroup::Step2 => "step2",
            CheckGroup::Manifold => "manifold",
            CheckGroup::Pde => "pde",
        }
    }
}

impl FromStr for CheckGroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown check group '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambertSettings {
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremSettings {
    pub checkpoints: Vec<f64>,
    /// Integration tolerance for the full-system orbit.
    pub tol: f64,
    /// Smaller anchor for the refinement comparison; `None` skips it.
    pub refine_phi0: Option<f64>,
    /// Left end of the reduced-flow oracle window `[oracle_xi_min, 0]`.
    pub oracle_xi_min: f64,
    pub oracle_tol: f64,
    /// Finite-difference window for the decay slope.
    pub slope_window: (f64, f64),
}

impl Default for TheoremSettings {
    fn default() -> Self {
        Self {
            checkpoints: vec![-2.0, -4.0, -6.0, -8.0, -10.0, -12.0],
            tol: 1e-14,
            refine_phi0: Some(1e-3),
            oracle_xi_min: -15.0,
            oracle_tol: 1e-12,
            slope_window: (-12.0, -8.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step2Settings {
    pub phi0: f64,
    /// `s = -10^k` for `k = 1..=max_exponent`.
    pub max_exponent: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSettings {
    pub phi0: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSettings {
    pub phi0: f64,
    pub seed: f64,
    pub tol: f64,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeSettings {
    pub phi0: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub t_end: f64,
    pub safety: f64,
    pub level: f64,
    pub snapshot_every: f64,
    /// Half-width of the shape-comparison window around the initial front.
    pub shape_window: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    pub p: u32,
    pub c: f64,
    pub delta: u8,
    pub phi0: f64,
    pub groups: Vec<CheckGroup>,
    pub lambertw: LambertSettings,
    pub equilibria: Vec<(u32, f64)>,
    pub theorem1: OrbitSettings,
    pub theorem2: TheoremSettings,
    pub step2: Step2Settings,
    pub manifold: ManifoldSettings,
    pub pde: PdeSettings,
    pub out_dir: PathBuf,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            p: 2,
            c: 1.0,
            delta: 1,
            phi0: 1e-2,
            groups: CheckGroup::ALL.to_vec(),
            lambertw: LambertSettings { samples: 10_000 },
            equilibria: vec![(2, 1.0), (2, 5.0), (4, 1.0), (4, 5.0)],
            theorem1: OrbitSettings {
                phi0: 1e-2,
                tol: 1e-10,
            },
            theorem2: TheoremSettings::default(),
            step2: Step2Settings {
                phi0: 0.1,
                max_exponent: 6,
            },
            manifold: ManifoldSettings {
                phi0: 0.1,
                seed: 1e-4,
                tol: 1e-10,
                window: (1e-3, 1e-1),
            },
            pde: PdeSettings {
                phi0: 0.1,
                x_min: -30.0,
                x_max: 30.0,
                dx: 0.05,
                t_end: 3.0,
                safety: 0.4,
                level: 0.5,
                snapshot_every: 0.25,
                shape_window: 10.0,
            },
            out_dir: PathBuf::from("report"),
        }
    }
}

fn num<T: FromStr>(section: &str, key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("[{section}] {key}: cannot parse '{v}'")))
}

fn list<T: FromStr>(section: &str, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(section, key, s))
        .collect()
}

fn pair(section: &str, key: &str, v: &str) -> Result<(f64, f64)> {
    match list::<f64>(section, key, v)?.as_slice() {
        &[a, b] if a < b => Ok((a, b)),
        _ => Err(Error::Config(format!(
            "[{section}] {key}: expected 'lo, hi' with lo < hi"
        ))),
    }
}

impl ReportConfig {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.p, self.c, self.delta)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = Self::default();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if props.iter().next().is_some() {
                    return Err(Error::Config("keys outside any section".into()));
                }
                continue;
            };
            for (key, v) in props.iter() {
                cfg.set(section, key, v)?;
            }
        }
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, v: &str) -> Result<()> {
        let s = section;
        match (section, key) {
            ("model", "p") => self.p = num(s, key, v)?,
            ("model", "c") => self.c = num(s, key, v)?,
            ("model", "delta") => self.delta = num(s, key, v)?,
            ("model", "phi0") => self.phi0 = num(s, key, v)?,
            ("checks", "enabled") => {
                self.groups = v
                    .split(',')
                    .map(str::trim)
                    .filter(|g| !g.is_empty())
                    .map(CheckGroup::from_str)
                    .collect::<Result<_>>()?
            }
            ("lambertw", "samples") => self.lambertw.samples = num(s, key, v)?,
            ("equilibria", "sets") => {
                self.equilibria = v
                    .split(',')
                    .map(str::trim)
                    .filter(|e| !e.is_empty())
                    .map(|e| {
                        let (p, c) = e.split_once(':').ok_or_else(|| {
                            Error::Config(format!("[equilibria] sets: expected 'p:c', got '{e}'"))
                        })?;
                        Ok((num(s, key, p)?, num(s, key, c)?))
                    })
                    .collect::<Result<_>>()?
            }
            ("theorem1", "phi0") => self.theorem1.phi0 = num(s, key, v)?,
            ("theorem1", "tol") => self.theorem1.tol = num(s, key, v)?,
            ("theorem2", "checkpoints") => self.theorem2.checkpoints = list(s, key, v)?,
            ("theorem2", "tol") => self.theorem2.tol = num(s, key, v)?,
            ("theorem2", "refine_phi0") => {
                self.theorem2.refine_phi0 = match v.trim() {
                    "" | "none" => None,
                    t => Some(num(s, key, t)?),
                }
            }
            ("theorem2", "oracle_xi_min") => self.theorem2.oracle_xi_min = num(s, key, v)?,
            ("theorem2", "oracle_tol") => self.theorem2.oracle_tol = num(s, key, v)?,
            ("theorem2", "slope_window") => self.theorem2.slope_window = pair(s, key, v)?,
            ("step2", "phi0") => self.step2.phi0 = num(s, key, v)?,
            ("step2", "max_exponent") => self.step2.max_exponent = num(s, key, v)?,
            ("manifold", "phi0") => self.manifold.phi0 = num(s, key, v)?,
            ("manifold", "seed") => self.manifold.seed = num(s, key, v)?,
            ("manifold", "tol") => self.manifold.tol = num(s, key, v)?,
            ("manifold", "window") => self.manifold.window = pair(s, key, v)?,
            ("pde", "phi0") => self.pde.phi0 = num(s, key, v)?,
            ("pde", "xmin") => self.pde.x_min = num(s, key, v)?,
            ("pde", "xmax") => self.pde.x_max = num(s, key, v)?,
            ("pde", "dx") => self.pde.dx = num(s, key, v)?,
            ("pde", "t_end") => self.pde.t_end = num(s, key, v)?,
            ("pde", "safety") => self.pde.safety = num(s, key, v)?,
            ("pde", "level") => self.pde.level = num(s, key, v)?,
            ("pde", "snapshot_every") => self.pde.snapshot_every = num(s, key, v)?,
            ("pde", "shape_window") => self.pde.shape_window = num(s, key, v)?,
            ("output", "dir") => self.out_dir = PathBuf::from(v.trim()),
            _ => return Err(Error::Config(format!("unknown key [{section}] {key}"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_default() {
        assert_eq!(ReportConfig::parse("").unwrap(), ReportConfig::default());
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = ReportConfig::parse(
            "[model]\np = 4\nc = 2.5\n[checks]\nenabled = pde, lambertw\n\
             [equilibria]\nsets = 2:5\n[theorem2]\ncheckpoints = -1, -3\nrefine_phi0 = none\n",
        )
        .unwrap();
        assert_eq!((cfg.p, cfg.c, cfg.delta), (4, 2.5, 1));
        assert_eq!(cfg.groups, vec![CheckGroup::Pde, CheckGroup::Lambertw]);
        assert_eq!(cfg.equilibria, vec![(2, 5.0)]);
        assert_eq!(cfg.theorem2.checkpoints, vec![-1.0, -3.0]);
        assert_eq!(cfg.theorem2.refine_phi0, None);
    }

    #[test]
    fn empty_check_list() {
        let cfg = ReportConfig::parse("[checks]\nenabled =\n").unwrap();
        assert!(cfg.groups.is_empty());
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ReportConfig::parse("[model]\nq = 1\n").is_err());
        assert!(ReportConfig::parse("[model]\np = two\n").is_err());
        assert!(ReportConfig::parse("[checks]\nenabled = bogus\n").is_err());
        assert!(ReportConfig::parse("[equilibria]\nsets = 2-5\n").is_err());
        assert!(ReportConfig::parse("[manifold]\nwindow = 0.1, 0.01\n").is_err());
        assert!(ReportConfig::parse("p = 2\n").is_err());
    }
}
