//! The subcommands. Each returns a few headline metrics (used by sweeps).

use std::path::Path;

use rayon::prelude::*;
use toml::Value;

use super::config::{ConfigFile, PhantomSource};
use super::output::{key_value_csv, matrix_csv, num, opt, Csv, Manifest, OutDir};
use crate::error::{Error, Mode, Result};
use crate::field::VectorField;
use crate::grid::DomainSpec;
use crate::io;
use crate::medium::Medium;
use crate::neumann::{NeumannOperator, ReconstructOptions};
use crate::oracle::assemble_small_oracle;
use crate::phantom::make_phantom;
use crate::solver::{ElasticSolver, SolverConfig};
use crate::visibility::{certify_with, Verdict};

pub type Metrics = Vec<(&'static str, f64)>;

/// Which command to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Forward,
    Reconstruct,
    Visibility,
    Oracle,
}

impl Kind {
    pub fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "forward" => Kind::Forward,
            "reconstruct" => Kind::Reconstruct,
            "visibility" => Kind::Visibility,
            "oracle" => Kind::Oracle,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Forward => "forward",
            Kind::Reconstruct => "reconstruct",
            Kind::Visibility => "visibility",
            Kind::Oracle => "oracle",
        }
    }

    /// Names of the metrics the command returns, in order.
    pub fn metric_names(self) -> &'static [&'static str] {
        match self {
            Kind::Forward => &["trace_max_abs", "final_energy_inside"],
            Kind::Reconstruct => &["iterations", "final_residual", "contraction_estimate", "final_error_h"],
            Kind::Visibility => &["sharp_t_estimate", "worst_margin", "pass"],
            Kind::Oracle => &["h_norm", "h_norm_svd", "spectral_radius"],
        }
    }

    pub fn run(self, cfg: &ConfigFile, out: &Path, log: &dyn Fn(&str)) -> Result<Metrics> {
        match self {
            Kind::Forward => forward(cfg, out, log),
            Kind::Reconstruct => reconstruct(cfg, out, log),
            Kind::Visibility => visibility(cfg, out, log),
            Kind::Oracle => oracle(cfg, out, log),
        }
    }
}

/// Solver-level configuration errors carry bare key names.
fn solver_key(e: Error) -> Error {
    match e {
        Error::InvalidConfig { key, reason } if !key.contains('.') => {
            let key = if key == "trace" { "reconstruction.trace".to_string() } else { format!("solver.{key}") };
            Error::InvalidConfig { key, reason }
        }
        e => e,
    }
}

struct Setup {
    medium: Medium,
    domain: DomainSpec,
    inputs: Vec<std::path::PathBuf>,
}

fn setup(cfg: &ConfigFile) -> Result<Setup> {
    let grid = cfg.grid()?;
    let (medium, inputs) = cfg.medium(&grid)?;
    let domain = cfg.domain(&grid)?;
    Ok(Setup {
        medium,
        domain,
        inputs,
    })
}

fn resolved(s: &Setup, c: &SolverConfig, steps: usize) -> Vec<(String, Value)> {
    let g = s.medium.grid();
    let arr = |v: &[f64]| Value::Array(v.iter().map(|x| Value::Float(*x)).collect());
    vec![
        ("dim".into(), Value::Integer(g.dim() as i64)),
        ("n".into(), Value::Array(g.n().iter().map(|n| Value::Integer(*n as i64)).collect())),
        ("h".into(), arr(g.h())),
        ("c_plus".into(), Value::Float(s.medium.c_plus)),
        ("c_minus".into(), Value::Float(s.medium.c_minus)),
        ("cfl".into(), Value::Float(c.cfl)),
        ("dt".into(), Value::Float(c.dt)),
        ("t_final".into(), Value::Float(c.t_final)),
        ("steps".into(), Value::Integer(steps as i64)),
        ("pml_width".into(), Value::Integer(c.pml_width as i64)),
        ("pml_strength".into(), Value::Float(c.pml_strength)),
        ("record_stride".into(), Value::Integer(c.record_stride as i64)),
        ("surface_points".into(), Value::Integer(s.domain.surface().len() as i64)),
    ]
}

fn results(m: &Metrics) -> Vec<(String, Value)> {
    m.iter().map(|(k, v)| (k.to_string(), Value::Float(*v))).collect()
}

/// Reads a field file, reporting problems against `key`.
fn read_field(path: &Path, domain: &DomainSpec, key: &str) -> Result<VectorField> {
    let bytes = io::read_bytes(path).map_err(|e| Error::config(key, e.to_string()))?;
    io::decode_field(&bytes, domain.grid()).map_err(|e| Error::config(key, e.to_string()))
}

/// The phantom and, for file phantoms, its path.
fn load_phantom(cfg: &ConfigFile, domain: &DomainSpec) -> Result<Option<(VectorField, Option<std::path::PathBuf>)>> {
    Ok(match cfg.phantom(domain)? {
        None => None,
        Some(PhantomSource::Analytic(kind)) => Some((make_phantom(&kind, domain)?, None)),
        Some(PhantomSource::File(path)) => {
            let f = read_field(&path, domain, "phantom.file")?;
            f.check_vanishes_outside(domain.omega0_mask(), "phantom")?;
            Some((f, Some(path)))
        }
    })
}

pub fn forward(cfg: &ConfigFile, out: &Path, log: &dyn Fn(&str)) -> Result<Metrics> {
    let s = setup(cfg)?;
    let sc = cfg.solver(&s.medium)?;
    let (f, phantom_file) = load_phantom(cfg, &s.domain)?
        .ok_or_else(|| Error::config("phantom", "forward needs a [phantom] section"))?;
    let solver = ElasticSolver::new(&s.medium, &s.domain, &sc).map_err(solver_key)?;
    log(&format!(
        "forward: grid {:?}, {} steps of dt = {:e}, {} surface points",
        s.medium.grid().n(),
        solver.steps(),
        sc.dt,
        s.domain.surface().len()
    ));
    let (trace, state) = solver.forward(&f)?;
    let energy = solver.energy_flux_report(&f)?;

    let mut dir = OutDir::create(out)?;
    dir.write("trace.ebt", &io::encode_trace(&trace))?;
    dir.write("final_state.ews", &io::encode_state(&state))?;
    let mut csv = Csv::new(&["t", "energy_inside", "energy_outside", "absorbed"]);
    for r in &energy {
        csv.row(vec![num(r.t), num(r.inside), num(r.outside), num(r.absorbed)]);
    }
    dir.write("energy.csv", csv.render().as_bytes())?;

    let metrics: Metrics = vec![
        ("trace_max_abs", trace.max_abs()),
        ("final_energy_inside", energy.last().map(|r| r.inside).unwrap_or(0.0)),
    ];
    let mut inputs = s.inputs.clone();
    inputs.extend(phantom_file);
    dir.finish(Manifest {
        command: "forward",
        config: cfg.table.clone(),
        inputs,
        resolved: resolved(&s, &sc, solver.steps()),
        results: results(&metrics),
    })?;
    Ok(metrics)
}

pub fn reconstruct(cfg: &ConfigFile, out: &Path, log: &dyn Fn(&str)) -> Result<Metrics> {
    let s = setup(cfg)?;
    let sc = cfg.solver(&s.medium)?;
    let rs = cfg.reconstruction()?;
    let op = NeumannOperator::new(&s.medium, &s.domain, &sc).map_err(solver_key)?;
    let mut inputs = s.inputs.clone();

    let mut truth = None;
    if let Some(p) = &rs.ground_truth {
        truth = Some(read_field(p, &s.domain, "reconstruction.ground_truth")?);
        inputs.push(p.clone());
    }
    let g = match &rs.trace {
        Some(p) => {
            let bytes = io::read_bytes(p).map_err(|e| Error::config("reconstruction.trace", e.to_string()))?;
            let g = io::decode_trace(&bytes, s.domain.surface())
                .map_err(|e| Error::config("reconstruction.trace", e.to_string()))?;
            inputs.push(p.clone());
            g
        }
        None => {
            // synthetic data from the phantom, which doubles as ground truth
            let (f, file) = load_phantom(cfg, &s.domain)?.ok_or_else(|| {
                Error::config("reconstruction.trace", "missing (and no [phantom] to synthesize data from)")
            })?;
            inputs.extend(file);
            log("reconstruct: synthesizing data from the phantom");
            let g = op.forward(&f)?;
            truth.get_or_insert(f);
            g
        }
    };
    log(&format!(
        "reconstruct: {} steps, up to {} iterations",
        op.solver().steps(),
        rs.max_iters
    ));
    let report = op
        .reconstruct(
            &g,
            &ReconstructOptions {
                max_iters: rs.max_iters,
                tol: rs.tol,
                ground_truth: truth.as_ref(),
            },
        )
        .map_err(solver_key)?;

    let mut dir = OutDir::create(out)?;
    let mut csv = Csv::new(&["j", "residual", "error_h", "error_l2", "ratio", "seconds", "data_residual"]);
    for r in &report.iterations {
        log(&format!(
            "  j = {:2}  residual {:.4e}  error_h {}  ratio {}",
            r.j,
            r.residual,
            r.error_h.map(|e| format!("{e:.4e}")).unwrap_or("-".into()),
            r.ratio.map(|e| format!("{e:.4}")).unwrap_or("-".into()),
        ));
        let seconds = if rs.record_timing { r.seconds } else { 0.0 };
        csv.row(vec![
            r.j.to_string(),
            num(r.residual),
            opt(r.error_h),
            opt(r.error_l2),
            opt(r.ratio),
            num(seconds),
            num(r.data_residual),
        ]);
    }
    dir.write("report.csv", csv.render().as_bytes())?;
    dir.write("terminal.ewf", &io::encode_field(&report.terminal_f))?;

    let last = report.iterations.last().expect("at least one row");
    let metrics: Metrics = vec![
        ("iterations", (report.iterations.len() - 1) as f64),
        ("final_residual", last.residual),
        ("contraction_estimate", report.contraction_estimate),
        ("final_error_h", last.error_h.unwrap_or(f64::NAN)),
    ];
    let mut res = results(&metrics);
    res.push(("converged".into(), Value::Boolean(report.converged)));
    dir.finish(Manifest {
        command: "reconstruct",
        config: cfg.table.clone(),
        inputs,
        resolved: resolved(&s, &sc, op.solver().steps()),
        results: res,
    })?;
    Ok(metrics)
}

pub fn visibility(cfg: &ConfigFile, out: &Path, log: &dyn Fn(&str)) -> Result<Metrics> {
    let s = setup(cfg)?;
    let vs = cfg.visibility(s.medium.grid())?;
    let d = s.medium.grid().dim();
    let p = s.medium.speed(Mode::P);
    let sh = s.medium.speed(Mode::S);
    log(&format!(
        "visibility: T = {}, spacing {}, {} directions",
        vs.t, vs.sampling.spacing, vs.sampling.directions
    ));
    let cert = certify_with(p.as_ref(), sh.as_ref(), s.domain.omega(), vs.t, &vs.sampling, vs.check_reentry)?;
    log(&format!(
        "  sharp T estimate {:.6}, verdict {:?}",
        cert.sharp_t_estimate, cert.verdict
    ));

    let mut dir = OutDir::create(out)?;
    let coords = |p: &[f64; 3]| p[..d].iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ");
    let rows = vec![
        ("t", num(cert.t)),
        ("verdict", format!("{:?}", cert.verdict).to_lowercase()),
        ("sharp_t_estimate", num(cert.sharp_t_estimate)),
        ("worst_margin_p", num(cert.worst_margin_p)),
        ("worst_margin_s", num(cert.worst_margin_s)),
        ("sampled_points", cert.sampled_points.to_string()),
        ("directions", cert.directions.to_string()),
        ("spacing", num(cert.spacing)),
        ("worst_origin", coords(&cert.worst_sample.0)),
        ("worst_direction", coords(&cert.worst_sample.1)),
        ("worst_mode", cert.worst_sample.2.to_string()),
        ("trapped", cert.trapped.len().to_string()),
        ("reentering", cert.reentering.to_string()),
    ];
    dir.write("certificate.csv", key_value_csv(&rows).as_bytes())?;
    if vs.dump_rays {
        let mut csv = Csv::new(&["origin", "direction", "mode", "tau_plus", "tau_minus", "reenters"]);
        for r in &cert.rays {
            csv.row(vec![
                coords(&r.origin),
                coords(&r.direction),
                r.mode.to_string(),
                num(r.tau_plus),
                num(r.tau_minus),
                r.reenters.to_string(),
            ]);
        }
        dir.write("rays.csv", csv.render().as_bytes())?;
    }
    let metrics: Metrics = vec![
        ("sharp_t_estimate", cert.sharp_t_estimate),
        ("worst_margin", cert.worst_margin()),
        ("pass", (cert.verdict == Verdict::Pass) as u8 as f64),
    ];
    dir.finish(Manifest {
        command: "visibility",
        config: cfg.table.clone(),
        inputs: s.inputs.clone(),
        resolved: vec![
            ("t".into(), Value::Float(vs.t)),
            ("spacing".into(), Value::Float(vs.sampling.spacing)),
            ("directions".into(), Value::Integer(vs.sampling.directions as i64)),
            ("jitter".into(), Value::Float(vs.sampling.jitter)),
            ("seed".into(), Value::Integer(vs.sampling.seed as i64)),
            ("c_plus".into(), Value::Float(s.medium.c_plus)),
            ("c_minus".into(), Value::Float(s.medium.c_minus)),
        ],
        results: results(&metrics),
    })?;
    Ok(metrics)
}

pub fn oracle(cfg: &ConfigFile, out: &Path, log: &dyn Fn(&str)) -> Result<Metrics> {
    let s = setup(cfg)?;
    let sc = cfg.solver(&s.medium)?;
    let write_matrices = cfg.section("oracle").bool("write_matrices")?.unwrap_or(true);
    let steps = sc.validate(&s.medium)?;
    log(&format!("oracle: grid {:?}, {steps} steps", s.medium.grid().n()));
    let o = assemble_small_oracle(&s.medium, &s.domain, &sc).map_err(|e| match e {
        Error::TooLarge { .. } => Error::config("grid.n", e.to_string()),
        e => solver_key(e),
    })?;
    log(&format!(
        "  {} unknowns, |K|_H = {:.6} (svd {:.6}), spectral radius {:.6}",
        o.unknowns(),
        o.h_norm,
        o.h_norm_svd,
        o.spectral_radius
    ));
    let mut dir = OutDir::create(out)?;
    let rows = vec![
        ("unknowns", o.unknowns().to_string()),
        ("trace_length", o.lambda_hat.nrows().to_string()),
        ("h_norm", num(o.h_norm)),
        ("h_norm_svd", num(o.h_norm_svd)),
        ("power_iterations", o.power_iterations.to_string()),
        ("spectral_radius", num(o.spectral_radius)),
    ];
    dir.write("oracle.csv", key_value_csv(&rows).as_bytes())?;
    if write_matrices {
        dir.write("lambda_hat.csv", matrix_csv(&o.lambda_hat).as_bytes())?;
        dir.write("a_hat.csv", matrix_csv(&o.a_hat).as_bytes())?;
    }
    let metrics: Metrics = vec![
        ("h_norm", o.h_norm),
        ("h_norm_svd", o.h_norm_svd),
        ("spectral_radius", o.spectral_radius),
    ];
    dir.finish(Manifest {
        command: "oracle",
        config: cfg.table.clone(),
        inputs: s.inputs.clone(),
        resolved: resolved(&s, &sc, steps),
        results: results(&metrics),
    })?;
    Ok(metrics)
}

/// Runs the swept command once per value, each into `out/sweep_NNN`, and
/// writes a summary table.
pub fn sweep(cfg: &ConfigFile, out: &Path, log: &(dyn Fn(&str) + Sync)) -> Result<Metrics> {
    let spec = cfg.sweep()?;
    let kind = Kind::parse(&spec.command).expect("validated");
    let entries: Vec<(usize, ConfigFile)> = spec
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut c = cfg.clone();
            c.table.remove("sweep");
            c.set(&spec.key, v.clone())?;
            Ok((i, c))
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<(i32, Option<Metrics>)> = entries
        .par_iter()
        .map(|(i, c)| {
            let dir = out.join(format!("sweep_{i:03}"));
            log(&format!("sweep: entry {i}, {} = {}", spec.key, spec.values[*i]));
            match kind.run(c, &dir, log) {
                Ok(m) => (0, Some(m)),
                Err(e) => {
                    log(&format!("sweep: entry {i} failed: {e}"));
                    let _ = std::fs::create_dir_all(&dir);
                    let _ = std::fs::write(dir.join("error.txt"), format!("{e}\n"));
                    (super::exit_code(&e), None)
                }
            }
        })
        .collect();

    let mut dir = OutDir::create(out)?;
    let mut header = vec!["index", "value", "exit_code"];
    header.extend_from_slice(kind.metric_names());
    let mut csv = Csv::new(&header);
    for (i, (code, m)) in outcomes.iter().enumerate() {
        let mut row = vec![i.to_string(), spec.values[i].to_string(), code.to_string()];
        match m {
            Some(m) => row.extend(m.iter().map(|(_, v)| num(*v))),
            None => row.extend(kind.metric_names().iter().map(|_| String::new())),
        }
        csv.row(row);
    }
    dir.write("sweep.csv", csv.render().as_bytes())?;
    let failed = outcomes.iter().filter(|(c, _)| *c != 0).count();
    let metrics: Metrics = vec![("entries", outcomes.len() as f64), ("failed", failed as f64)];
    dir.finish(Manifest {
        command: "sweep",
        config: cfg.table.clone(),
        inputs: Vec::new(),
        resolved: vec![
            ("command".into(), Value::String(spec.command.clone())),
            ("key".into(), Value::String(spec.key.clone())),
        ],
        results: results(&metrics),
    })?;
    Ok(metrics)
}
