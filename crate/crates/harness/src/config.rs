//! Run configuration: flat `key=value` files and their validation.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use elrkfv_core::convection::Dissipation;
use elrkfv_core::problems::{registry_build, ProblemSpec};
use elrkfv_core::stepper::SpeedMode;
use elrkfv_core::{StepOptions, TimeScheme, WenoParams};

use crate::error::{HarnessError, Result};
use crate::norms::L2Convention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    #[default]
    Strang,
    FourthOrder,
    None,
}

impl FromStr for Splitting {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strang" => Ok(Splitting::Strang),
            "fourth-order" | "fourth" | "yoshida" => Ok(Splitting::FourthOrder),
            "none" => Ok(Splitting::None),
            _ => Err(HarnessError::config(format!(
                "splitting `{s}` (strang | fourth-order | none)"
            ))),
        }
    }
}

impl Splitting {
    pub fn name(self) -> &'static str {
        match self {
            Splitting::Strang => "strang",
            Splitting::FourthOrder => "fourth-order",
            Splitting::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    /// Cells per dimension.
    pub n: usize,
    pub cfl: f64,
    /// Defaults to the problem's final time.
    pub final_time: Option<f64>,
    /// Defaults to the problem's scheme.
    pub scheme: Option<String>,
    pub splitting: Splitting,
    pub gauss_order: usize,
    pub weno: WenoParams,
    pub dissipation: Dissipation,
    pub max_halvings: u32,
    pub l2: L2Convention,
    pub out: Option<PathBuf>,
    pub snapshots: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "transport-1d-const".into(),
            n: 100,
            cfl: 1.0,
            final_time: None,
            scheme: None,
            splitting: Splitting::Strang,
            gauss_order: 3,
            weno: WenoParams::default(),
            dissipation: Dissipation::Local,
            max_halvings: 40,
            l2: L2Convention::Root,
            out: None,
            snapshots: Vec::new(),
        }
    }
}

/// A config with its problem and time scheme resolved.
#[derive(Clone)]
pub struct Resolved {
    pub problem: ProblemSpec,
    pub scheme: TimeScheme,
    pub final_time: f64,
    pub opts: StepOptions,
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| HarnessError::config(format!("{key}: cannot parse `{v}`")))
}

impl RunConfig {
    /// Applies one `key=value` entry. Keys match the long CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "problem" => self.problem = v.to_string(),
            "n" => self.n = parse_num(key, v)?,
            "cfl" => self.cfl = parse_num(key, v)?,
            "tfinal" | "final-time" => self.final_time = Some(parse_num(key, v)?),
            "scheme" => self.scheme = Some(v.to_string()),
            "split" | "splitting" => self.splitting = v.parse()?,
            "gauss-order" => self.gauss_order = parse_num(key, v)?,
            "weno-gamma-hi" => self.weno.gamma_hi = parse_num(key, v)?,
            "weno-gamma-lo" => self.weno.gamma_lo = parse_num(key, v)?,
            "weno-eps" => self.weno.epsilon = parse_num(key, v)?,
            "weno-power" => self.weno.power = parse_num(key, v)?,
            "dissipation" => {
                self.dissipation = match v {
                    "local" => Dissipation::Local,
                    "global" => Dissipation::Global,
                    _ => return Err(HarnessError::config(format!("dissipation `{v}` (local | global)"))),
                }
            }
            "max-halvings" => self.max_halvings = parse_num(key, v)?,
            "l2" => self.l2 = v.parse()?,
            "out" => self.out = Some(PathBuf::from(v)),
            "snapshots" => {
                self.snapshots = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_num("snapshots", s.trim()))
                    .collect::<Result<_>>()?
            }
            other => return Err(HarnessError::config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_pairs(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        self.apply_text(&text)
    }

    /// The config as `key=value` pairs, in the same vocabulary [`set`](Self::set) reads.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut p = vec![
            ("problem".to_string(), self.problem.clone()),
            ("n".into(), self.n.to_string()),
            ("cfl".into(), self.cfl.to_string()),
        ];
        if let Some(t) = self.final_time {
            p.push(("tfinal".into(), t.to_string()));
        }
        if let Some(s) = &self.scheme {
            p.push(("scheme".into(), s.clone()));
        }
        p.push(("split".into(), self.splitting.name().into()));
        p.push(("gauss-order".into(), self.gauss_order.to_string()));
        p.push(("weno-gamma-hi".into(), self.weno.gamma_hi.to_string()));
        p.push(("weno-gamma-lo".into(), self.weno.gamma_lo.to_string()));
        p.push(("weno-eps".into(), self.weno.epsilon.to_string()));
        p.push(("weno-power".into(), self.weno.power.to_string()));
        p.push((
            "dissipation".into(),
            match self.dissipation {
                Dissipation::Local => "local",
                Dissipation::Global => "global",
            }
            .into(),
        ));
        p.push(("max-halvings".into(), self.max_halvings.to_string()));
        p.push(("l2".into(), self.l2.name().into()));
        if let Some(o) = &self.out {
            p.push(("out".into(), o.display().to_string()));
        }
        if !self.snapshots.is_empty() {
            let s: Vec<String> = self.snapshots.iter().map(|t| t.to_string()).collect();
            p.push(("snapshots".into(), s.join(",")));
        }
        p
    }

    /// Looks up the problem and scheme and rejects incompatible settings.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.n < 5 {
            return Err(HarnessError::config(format!("n = {} (need at least 5 cells)", self.n)));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(HarnessError::config(format!("cfl = {}", self.cfl)));
        }
        if !(1..=10).contains(&self.gauss_order) {
            return Err(HarnessError::config(format!("gauss-order = {}", self.gauss_order)));
        }
        self.weno
            .validate()
            .map_err(|e| HarnessError::config(e.to_string()))?;
        for &t in &self.snapshots {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(HarnessError::config(format!("snapshot time {t}")));
            }
        }
        let problem = registry_build(&self.problem, self.final_time)
            .map_err(|e| HarnessError::config(e.to_string()))?;
        let scheme_name = self
            .scheme
            .clone()
            .unwrap_or_else(|| problem.default_scheme().to_string());
        let scheme =
            TimeScheme::by_name(&scheme_name).map_err(|e| HarnessError::config(e.to_string()))?;
        let eps = problem.epsilon();
        if eps > 0.0 && !scheme.is_imex() {
            return Err(HarnessError::config(format!(
                "{} has diffusion (eps = {eps}); use an IMEX scheme instead of {}",
                problem.name(),
                scheme.name()
            )));
        }
        if problem.dimension() == 2 {
            match self.splitting {
                Splitting::None => {
                    return Err(HarnessError::config(format!(
                        "{} is two-dimensional and needs a splitting",
                        problem.name()
                    )))
                }
                Splitting::FourthOrder if eps > 0.0 => {
                    return Err(HarnessError::config(
                        "fourth-order splitting needs backward substeps and cannot be used with diffusion",
                    ))
                }
                _ => {}
            }
        }
        Ok(Resolved {
            final_time: problem.final_time(),
            problem,
            scheme,
            opts: StepOptions {
                weno: self.weno,
                speeds: SpeedMode::RankineHugoniot,
                dissipation: self.dissipation,
                max_halvings: self.max_halvings,
            },
        })
    }
}

/// `key=value` lines; `#` starts a comment line.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(HarnessError::config(format!(
                "line {}: expected key=value, got `{line}`",
                i + 1
            )));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_files_and_round_trips() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nproblem = cd-1d-const\nn=200\ncfl=0.95\nscheme=IMEX(2,3,3)\nsnapshots=0.25, 0.5\n")
            .unwrap();
        assert_eq!(c.problem, "cd-1d-const");
        assert_eq!(c.n, 200);
        assert_eq!(c.snapshots, vec![0.25, 0.5]);
        let mut d = RunConfig::default();
        for (k, v) in c.to_pairs() {
            d.set(&k, &v).unwrap();
        }
        assert_eq!(c, d);
        assert!(c.apply_text("bogus").is_err());
        assert!(c.apply_text("colour=red").is_err());
    }

    #[test]
    fn incompatibilities_are_config_errors() {
        let mut c = RunConfig {
            problem: "cd-1d-const".into(),
            scheme: Some("rk4".into()),
            ..Default::default()
        };
        assert!(matches!(c.resolve(), Err(HarnessError::Config(_))));
        c.scheme = Some("IMEX(2,3,3)".into());
        assert!(c.resolve().is_ok());

        let mut c = RunConfig {
            problem: "cd-2d-const".into(),
            splitting: Splitting::FourthOrder,
            ..Default::default()
        };
        assert!(matches!(c.resolve(), Err(HarnessError::Config(_))));
        c.splitting = Splitting::None;
        assert!(matches!(c.resolve(), Err(HarnessError::Config(_))));
        c.splitting = Splitting::Strang;
        assert!(c.resolve().is_ok());

        let c = RunConfig {
            problem: "no-such-problem".into(),
            ..Default::default()
        };
        assert!(matches!(c.resolve(), Err(HarnessError::Config(_))));
    }
}
