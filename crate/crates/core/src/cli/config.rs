//! Run configuration: a TOML file with one table per concern.
//!
//! ```toml
//! [grid]
//! dim = 2
//! min = [-1.5, -1.5]
//! max = [1.5, 1.5]
//! n = [128, 128]
//!
//! [medium]
//! lambda = 1.0
//! mu = 1.0
//!
//! [domain]
//! omega = "ball"
//! omega_center = [0.0, 0.0]
//! omega_radius = 1.0
//! omega0 = "ball"
//! omega0_center = [0.0, 0.0]
//! omega0_radius = 0.6
//!
//! [solver]
//! t_final = 2.5
//! ```
//!
//! Every error names the offending key as `section.key`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::grid::{DomainSpec, Grid, Region};
use crate::io;
use crate::medium::{build_medium, FieldSpec, GaussianBump, Medium};
use crate::phantom::{Bump, PhantomKind, Profile};
use crate::solver::{default_strength, SolverConfig};
use crate::visibility::Sampling;

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["dim", "min", "max", "n"]),
    (
        "medium",
        &["lambda", "mu", "lambda_bumps", "mu_bumps", "lambda_file", "mu_file"],
    ),
    (
        "domain",
        &[
            "omega", "omega_center", "omega_radius", "omega_min", "omega_max", "omega0",
            "omega0_center", "omega0_radius", "omega0_min", "omega0_max",
        ],
    ),
    (
        "solver",
        &["t_final", "cfl", "dt", "pml_width", "pml_strength", "record_stride"],
    ),
    (
        "phantom",
        &[
            "kind", "centers", "amplitudes", "profile", "radii", "sigmas", "center", "radius",
            "half_width", "amplitude", "count", "min_radius", "max_radius", "seed", "file",
        ],
    ),
    (
        "reconstruction",
        &["trace", "ground_truth", "max_iters", "tol", "record_timing"],
    ),
    (
        "visibility",
        &["t", "spacing", "directions", "jitter", "seed", "check_reentry", "dump_rays"],
    ),
    ("oracle", &["write_matrices"]),
    ("sweep", &["command", "key", "values"]),
];

/// Typed access to one table, reporting errors as `section.key`.
pub struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn key(&self, k: &str) -> String {
        format!("{}.{k}", self.name)
    }

    fn err(&self, k: &str, reason: impl Into<String>) -> Error {
        Error::config(self.key(k), reason)
    }

    pub fn present(&self) -> bool {
        self.table.is_some()
    }

    pub fn value(&self, k: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(k))
    }

    fn require<T>(&self, k: &str, v: Result<Option<T>>) -> Result<T> {
        v?.ok_or_else(|| self.err(k, "missing"))
    }

    pub fn f64(&self, k: &str) -> Result<Option<f64>> {
        self.value(k).map(|v| as_f64(v).ok_or_else(|| self.err(k, "expected a number"))).transpose()
    }

    pub fn req_f64(&self, k: &str) -> Result<f64> {
        self.require(k, self.f64(k))
    }

    pub fn usize(&self, k: &str) -> Result<Option<usize>> {
        self.value(k)
            .map(|v| {
                v.as_integer()
                    .filter(|i| *i >= 0)
                    .map(|i| i as usize)
                    .ok_or_else(|| self.err(k, "expected a non-negative integer"))
            })
            .transpose()
    }

    pub fn req_usize(&self, k: &str) -> Result<usize> {
        self.require(k, self.usize(k))
    }

    pub fn bool(&self, k: &str) -> Result<Option<bool>> {
        self.value(k)
            .map(|v| v.as_bool().ok_or_else(|| self.err(k, "expected true or false")))
            .transpose()
    }

    pub fn str(&self, k: &str) -> Result<Option<&'a str>> {
        self.value(k)
            .map(|v| v.as_str().ok_or_else(|| self.err(k, "expected a string")))
            .transpose()
    }

    pub fn req_str(&self, k: &str) -> Result<&'a str> {
        self.require(k, self.str(k))
    }

    pub fn vec_f64(&self, k: &str) -> Result<Option<Vec<f64>>> {
        self.value(k)
            .map(|v| {
                v.as_array()
                    .and_then(|a| a.iter().map(as_f64).collect::<Option<Vec<_>>>())
                    .ok_or_else(|| self.err(k, "expected an array of numbers"))
            })
            .transpose()
    }

    pub fn req_vec_f64(&self, k: &str) -> Result<Vec<f64>> {
        self.require(k, self.vec_f64(k))
    }

    pub fn vec_vec_f64(&self, k: &str) -> Result<Option<Vec<Vec<f64>>>> {
        self.value(k)
            .map(|v| {
                v.as_array()
                    .and_then(|a| {
                        a.iter()
                            .map(|row| row.as_array()?.iter().map(as_f64).collect::<Option<Vec<_>>>())
                            .collect::<Option<Vec<_>>>()
                    })
                    .ok_or_else(|| self.err(k, "expected an array of number arrays"))
            })
            .transpose()
    }

    /// Point of the grid dimension.
    fn point(&self, k: &str, dim: usize) -> Result<Vec<f64>> {
        let p = self.req_vec_f64(k)?;
        if p.len() != dim {
            return Err(self.err(k, format!("expected {dim} coordinates, got {}", p.len())));
        }
        Ok(p)
    }

    fn path(&self, k: &str, base: &Path) -> Result<Option<PathBuf>> {
        Ok(self.str(k)?.map(|s| base.join(s)))
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// The parsed file: the raw table plus the directory relative paths refer to.
#[derive(Debug, Clone)]
pub struct ConfigFile {
    pub table: Table,
    pub base: PathBuf,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| {
            let key = e.message().split('`').nth(1).unwrap_or("config").to_string();
            Error::config(key, e.to_string().trim().replace('\n', " "))
        })?;
        for (name, value) in &table {
            let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == name) else {
                return Err(Error::config(name.clone(), "unknown section"));
            };
            let t = value
                .as_table()
                .ok_or_else(|| Error::config(name.clone(), "expected a [section]"))?;
            if let Some(k) = t.keys().find(|k| !keys.contains(&k.as_str())) {
                return Err(Error::config(format!("{name}.{k}"), "unknown key"));
            }
        }
        Ok(ConfigFile {
            table,
            base: base.to_path_buf(),
        })
    }

    pub fn section(&self, name: &'static str) -> Section<'_> {
        Section {
            name,
            table: self.table.get(name).and_then(Value::as_table),
        }
    }

    /// Replaces `section.key` (used by sweeps).
    pub fn set(&mut self, dotted: &str, value: Value) -> Result<()> {
        let (s, k) = dotted
            .split_once('.')
            .ok_or_else(|| Error::config("sweep.key", format!("`{dotted}` is not of the form section.key")))?;
        if !SECTIONS.iter().any(|(name, keys)| *name == s && keys.contains(&k)) {
            return Err(Error::config("sweep.key", format!("`{dotted}` is not a known key")));
        }
        let t = self
            .table
            .entry(s)
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::config(s, "expected a [section]"))?;
        t.insert(k.to_string(), value);
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        let s = self.section("grid");
        let dim = s.req_usize("dim")?;
        if !(2..=3).contains(&dim) {
            return Err(s.err("dim", "must be 2 or 3"));
        }
        let min = s.point("min", dim)?;
        let max = s.point("max", dim)?;
        let n: Vec<usize> = match s.value("n") {
            Some(Value::Integer(_)) => vec![s.req_usize("n")?; dim],
            _ => {
                let v = s.req_vec_f64("n")?;
                if v.len() != dim || v.iter().any(|x| x.fract() != 0.0 || *x < 0.0) {
                    return Err(s.err("n", format!("expected {dim} point counts")));
                }
                v.into_iter().map(|x| x as usize).collect()
            }
        };
        Grid::new(dim, &min, &max, &n).map_err(|e| s.err("n", e.to_string()))
    }

    fn field_spec(&self, grid: &Grid, name: &str) -> Result<(FieldSpec, Option<PathBuf>)> {
        let s = self.section("medium");
        let file_key = format!("{name}_file");
        let bumps_key = format!("{name}_bumps");
        if let Some(path) = s.path(&file_key, &self.base)? {
            if s.value(name).is_some() || s.value(&bumps_key).is_some() {
                return Err(s.err(&file_key, format!("conflicts with medium.{name}")));
            }
            let bytes = io::read_bytes(&path).map_err(|e| s.err(&file_key, e.to_string()))?;
            let values = io::decode_scalar(&bytes, grid).map_err(|e| s.err(&file_key, e.to_string()))?;
            return Ok((FieldSpec::Raw(values), Some(path)));
        }
        let base = s.req_f64(name)?;
        let Some(list) = s.value(&bumps_key) else {
            return Ok((FieldSpec::Constant(base), None));
        };
        let arr = list
            .as_array()
            .ok_or_else(|| s.err(&bumps_key, "expected an array of tables"))?;
        let mut bumps = Vec::new();
        for (i, b) in arr.iter().enumerate() {
            let key = format!("{bumps_key}[{i}]");
            let t = b.as_table().ok_or_else(|| s.err(&key, "expected a table"))?;
            let get = |k: &str| t.get(k).and_then(as_f64).ok_or_else(|| s.err(&key, format!("needs number `{k}`")));
            let center: Vec<f64> = t
                .get("center")
                .and_then(Value::as_array)
                .and_then(|a| a.iter().map(as_f64).collect())
                .filter(|c: &Vec<f64>| c.len() == grid.dim())
                .ok_or_else(|| s.err(&key, format!("needs `center` with {} coordinates", grid.dim())))?;
            let spread = get("spread")?;
            if !(spread > 0.0) {
                return Err(s.err(&key, "spread must be positive"));
            }
            bumps.push(GaussianBump::new(&center, get("amplitude")?, spread));
        }
        Ok((FieldSpec::Bumps { base, bumps }, None))
    }

    /// The medium and any raw parameter files it was read from.
    pub fn medium(&self, grid: &Grid) -> Result<(Medium, Vec<PathBuf>)> {
        let (l, lf) = self.field_spec(grid, "lambda")?;
        let (m, mf) = self.field_spec(grid, "mu")?;
        let medium = build_medium(grid, l, m).map_err(|e| match e {
            Error::NonPositiveParameter { parameter, .. } => Error::config(format!("medium.{parameter}"), e.to_string()),
            e => e,
        })?;
        Ok((medium, lf.into_iter().chain(mf).collect()))
    }

    fn region(&self, name: &str, dim: usize) -> Result<Region> {
        let s = self.section("domain");
        match s.req_str(name)? {
            "ball" => {
                let c = s.point(&format!("{name}_center"), dim)?;
                let rk = format!("{name}_radius");
                let r = s.req_f64(&rk)?;
                if !(r > 0.0) {
                    return Err(s.err(&rk, "must be positive"));
                }
                Ok(Region::ball(&c, r))
            }
            "box" => {
                let lo = s.point(&format!("{name}_min"), dim)?;
                let hi = s.point(&format!("{name}_max"), dim)?;
                if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                    return Err(s.err(&format!("{name}_max"), "must exceed the minimum corner"));
                }
                Ok(Region::cuboid(&lo, &hi))
            }
            other => Err(s.err(name, format!("unknown shape `{other}` (ball or box)"))),
        }
    }

    pub fn domain(&self, grid: &Grid) -> Result<DomainSpec> {
        let omega = self.region("omega", grid.dim())?;
        let omega0 = self.region("omega0", grid.dim())?;
        DomainSpec::new(grid, omega, omega0).map_err(|e| Error::config("domain.omega0", e.to_string()))
    }

    pub fn solver(&self, medium: &Medium) -> Result<SolverConfig> {
        let s = self.section("solver");
        let t_final = s.req_f64("t_final")?;
        if !(t_final > 0.0) {
            return Err(s.err("t_final", "must be positive"));
        }
        let cfl = s.f64("cfl")?.unwrap_or(0.5);
        let mut cfg = SolverConfig::for_medium(medium, t_final, cfl);
        if let Some(dt) = s.f64("dt")? {
            cfg.dt = dt;
        }
        let width = s.usize("pml_width")?.unwrap_or(cfg.pml_width);
        let strength = match s.f64("pml_strength")? {
            Some(v) => v,
            None => default_strength(medium, width),
        };
        cfg = cfg.with_pml(width, strength);
        cfg.record_stride = s.usize("record_stride")?.unwrap_or(1);
        cfg.validate(medium).map_err(|e| match e {
            Error::InvalidConfig { key, reason } => Error::config(format!("solver.{key}"), reason),
            e => e,
        })?;
        Ok(cfg)
    }

    pub fn phantom(&self, domain: &DomainSpec) -> Result<Option<PhantomSource>> {
        let s = self.section("phantom");
        if !s.present() {
            return Ok(None);
        }
        let dim = domain.grid().dim();
        let kind = match s.req_str("kind")? {
            "file" => {
                let path = s.path("file", &self.base)?.ok_or_else(|| s.err("file", "missing"))?;
                return Ok(Some(PhantomSource::File(path)));
            }
            "bumps" => {
                let centers = s.vec_vec_f64("centers")?.ok_or_else(|| s.err("centers", "missing"))?;
                let amps = s.vec_vec_f64("amplitudes")?.ok_or_else(|| s.err("amplitudes", "missing"))?;
                let (sizes, size_key, gaussian) = match s.str("profile")?.unwrap_or("compact") {
                    "compact" => (s.req_vec_f64("radii")?, "radii", false),
                    "gaussian" => (s.req_vec_f64("sigmas")?, "sigmas", true),
                    other => return Err(s.err("profile", format!("unknown profile `{other}`"))),
                };
                if amps.len() != centers.len() {
                    return Err(s.err("amplitudes", "needs one entry per center"));
                }
                if sizes.len() != centers.len() {
                    return Err(s.err(size_key, "needs one entry per center"));
                }
                let mut bumps = Vec::new();
                for ((c, a), r) in centers.iter().zip(&amps).zip(&sizes) {
                    if c.len() != dim {
                        return Err(s.err("centers", format!("each center needs {dim} coordinates")));
                    }
                    if a.len() != dim {
                        return Err(s.err("amplitudes", format!("each amplitude needs {dim} components")));
                    }
                    if !(*r > 0.0) {
                        return Err(s.err(size_key, "must be positive"));
                    }
                    let mut center = [0.0; 3];
                    center[..dim].copy_from_slice(c);
                    let mut amplitude = [0.0; 3];
                    amplitude[..dim].copy_from_slice(a);
                    let profile = if gaussian {
                        Profile::Gaussian { sigma: *r }
                    } else {
                        Profile::Compact { radius: *r }
                    };
                    bumps.push(Bump {
                        center,
                        amplitude,
                        profile,
                    });
                }
                PhantomKind::Bumps(bumps)
            }
            "annulus" => {
                let mut center = [0.0; 3];
                center[..dim].copy_from_slice(&s.point("center", dim)?);
                PhantomKind::Annulus {
                    center,
                    radius: s.req_f64("radius")?,
                    half_width: s.req_f64("half_width")?,
                    amplitude: s.req_f64("amplitude")?,
                }
            }
            "random" => PhantomKind::RandomSmooth {
                count: s.req_usize("count")?,
                min_radius: s.req_f64("min_radius")?,
                max_radius: s.req_f64("max_radius")?,
                amplitude: s.req_f64("amplitude")?,
                seed: s.usize("seed")?.unwrap_or(0) as u64,
            },
            other => return Err(s.err("kind", format!("unknown phantom kind `{other}`"))),
        };
        Ok(Some(PhantomSource::Analytic(kind)))
    }

    pub fn reconstruction(&self) -> Result<ReconstructionSettings> {
        let s = self.section("reconstruction");
        let max_iters = s.usize("max_iters")?.unwrap_or(8);
        if max_iters == 0 {
            return Err(s.err("max_iters", "must be at least 1"));
        }
        let tol = s.f64("tol")?.unwrap_or(1e-6);
        if !(tol > 0.0) {
            return Err(s.err("tol", "must be positive"));
        }
        Ok(ReconstructionSettings {
            trace: s.path("trace", &self.base)?,
            ground_truth: s.path("ground_truth", &self.base)?,
            max_iters,
            tol,
            record_timing: s.bool("record_timing")?.unwrap_or(false),
        })
    }

    pub fn visibility(&self, grid: &Grid) -> Result<VisibilitySettings> {
        let s = self.section("visibility");
        let t = match s.f64("t")? {
            Some(t) => t,
            None => self
                .section("solver")
                .f64("t_final")?
                .ok_or_else(|| s.err("t", "missing (and no solver.t_final to fall back on)"))?,
        };
        if !(t > 0.0) {
            return Err(s.err("t", "must be positive"));
        }
        let mut sampling = Sampling::for_grid(grid);
        if let Some(v) = s.f64("spacing")? {
            if !(v > 0.0) {
                return Err(s.err("spacing", "must be positive"));
            }
            sampling.spacing = v;
        }
        if let Some(v) = s.usize("directions")? {
            if v < 32 {
                return Err(s.err("directions", "need at least 32"));
            }
            sampling.directions = v;
        }
        if let Some(v) = s.f64("jitter")? {
            if !(0.0..0.5).contains(&v) {
                return Err(s.err("jitter", "must lie in [0, 0.5)"));
            }
            sampling.jitter = v;
        }
        if let Some(v) = s.usize("seed")? {
            sampling.seed = v as u64;
        }
        Ok(VisibilitySettings {
            t,
            sampling,
            check_reentry: s.bool("check_reentry")?.unwrap_or(false),
            dump_rays: s.bool("dump_rays")?.unwrap_or(false),
        })
    }

    pub fn sweep(&self) -> Result<SweepSpec> {
        let s = self.section("sweep");
        let command = s.req_str("command")?.to_string();
        if !["forward", "reconstruct", "visibility", "oracle"].contains(&command.as_str()) {
            return Err(s.err("command", format!("cannot sweep `{command}`")));
        }
        let key = s.req_str("key")?.to_string();
        let values = s
            .value("values")
            .and_then(Value::as_array)
            .cloned()
            .ok_or_else(|| s.err("values", "expected an array"))?;
        if values.is_empty() {
            return Err(s.err("values", "must not be empty"));
        }
        // the key must be overridable
        self.clone().set(&key, values[0].clone())?;
        Ok(SweepSpec { command, key, values })
    }

    /// Keys present in the file, for the manifest.
    pub fn keys(&self) -> BTreeSet<String> {
        self.table
            .iter()
            .flat_map(|(s, v)| {
                v.as_table()
                    .into_iter()
                    .flat_map(move |t| t.keys().map(move |k| format!("{s}.{k}")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhantomSource {
    Analytic(PhantomKind),
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ReconstructionSettings {
    pub trace: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    pub max_iters: usize,
    pub tol: f64,
    pub record_timing: bool,
}

#[derive(Debug, Clone)]
pub struct VisibilitySettings {
    pub t: f64,
    pub sampling: Sampling,
    pub check_reentry: bool,
    pub dump_rays: bool,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub command: String,
    pub key: String,
    pub values: Vec<Value>,
}
