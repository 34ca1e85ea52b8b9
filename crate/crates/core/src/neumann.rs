//! The time-reversal operator `A g = 𝒫_Ω₀ v(0)`, the error operator
//! `K = I − AΛ` and the Neumann-series reconstruction
//!
//! ```text
//! f₀ = A g,    f_k = A g + K f_{k−1}
//! ```
//!
//! whose increments `f_k − f_{k−1} = K^k A g` shrink geometrically when `K`
//! is a contraction.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::extension::ExtensionSolver;
use crate::field::VectorField;
use crate::grid::DomainSpec;
use crate::medium::Medium;
use crate::norms::{h_seminorm_masked, l2_norm_masked};
use crate::solver::{BoundaryTrace, ElasticSolver, SolverConfig};

/// Ratio above which an iteration counts as stalled.
pub const STALL_RATIO: f64 = 0.999;
/// Consecutive stalled iterations that abort the series.
pub const STALL_LIMIT: usize = 5;

/// `Λ`, `A` and `K` for one medium, domain and solver configuration.
pub struct NeumannOperator<'a> {
    medium: &'a Medium,
    domain: &'a DomainSpec,
    solver: ElasticSolver<'a>,
    ext_omega: ExtensionSolver<'a>,
    ext_omega0: ExtensionSolver<'a>,
}

impl<'a> NeumannOperator<'a> {
    pub fn new(medium: &'a Medium, domain: &'a DomainSpec, config: &SolverConfig) -> Result<Self> {
        let solver = ElasticSolver::new(medium, domain, config)?;
        let ext_omega = ExtensionSolver::from_mask(medium, domain.omega_mask().clone())?;
        let ext_omega0 = ExtensionSolver::from_mask(medium, domain.omega0_mask().clone())?;
        debug_assert_eq!(ext_omega.boundary_nodes(), &domain.surface().nodes[..]);
        Ok(NeumannOperator {
            medium,
            domain,
            solver,
            ext_omega,
            ext_omega0,
        })
    }

    pub fn solver(&self) -> &ElasticSolver<'a> {
        &self.solver
    }

    pub fn medium(&self) -> &Medium {
        self.medium
    }

    pub fn domain(&self) -> &DomainSpec {
        self.domain
    }

    pub(crate) fn omega0_extension(&self) -> &ExtensionSolver<'a> {
        &self.ext_omega0
    }

    /// `Λf`: the boundary trace of the forward solution.
    pub fn forward(&self, f: &VectorField) -> Result<BoundaryTrace> {
        Ok(self.solver.forward(f)?.0)
    }

    /// `A g`: time reversal from the elastic extension of `g(T)`, projected onto Ω₀.
    pub fn apply_a(&self, g: &BoundaryTrace) -> Result<VectorField> {
        let k = g.samples().checked_sub(1).ok_or_else(|| Error::config("trace", "no samples"))?;
        let (phi, _) = self.ext_omega.extend(g.sample(k))?;
        let v0 = self.solver.time_reversal(g, &phi)?;
        self.ext_omega0.project(&v0.u)
    }

    /// `K f = f − AΛf`.
    pub fn apply_k(&self, f: &VectorField) -> Result<VectorField> {
        let af = self.apply_a(&self.forward(f)?)?;
        f.sub(&af)
    }

    pub fn h_norm(&self, f: &VectorField) -> Result<f64> {
        h_seminorm_masked(self.medium, f, self.domain.omega0_mask())
    }

    /// Runs the Neumann series on the data `g`.
    pub fn reconstruct(&self, g: &BoundaryTrace, opts: &ReconstructOptions) -> Result<ReconstructionReport> {
        if opts.max_iters == 0 {
            return Err(Error::config("reconstruction.max_iters", "must be at least 1"));
        }
        if !(opts.tol > 0.0) {
            return Err(Error::config("reconstruction.tol", "must be positive"));
        }
        let mask0 = self.domain.omega0_mask();
        let errors = |f: &VectorField| -> Result<(Option<f64>, Option<f64>)> {
            match opts.ground_truth {
                None => Ok((None, None)),
                Some(t) => {
                    let diff = f.sub(t)?;
                    let nh = h_seminorm_masked(self.medium, t, mask0)?;
                    let nl = l2_norm_masked(t, mask0)?;
                    if nh <= 1e-14 || nl <= 1e-14 {
                        return Err(Error::ZeroTruth);
                    }
                    Ok((
                        Some(h_seminorm_masked(self.medium, &diff, mask0)? / nh),
                        Some(l2_norm_masked(&diff, mask0)? / nl),
                    ))
                }
            }
        };
        let g_norm = l2(&g.values);
        let data_residual = |lf: &BoundaryTrace| -> f64 {
            if g_norm == 0.0 {
                return l2(&lf.values);
            }
            let diff: f64 = lf.values.iter().zip(&g.values).map(|(a, b)| (a - b) * (a - b)).sum();
            diff.sqrt() / g_norm
        };

        let clock = Instant::now();
        let ag = self.apply_a(g)?;
        let inc0 = self.h_norm(&ag)?;
        let (eh, el) = errors(&ag)?;
        let mut rows = vec![IterationRecord {
            j: 0,
            residual: inc0,
            error_h: eh,
            error_l2: el,
            ratio: None,
            seconds: clock.elapsed().as_secs_f64(),
            data_residual: f64::NAN,
        }];
        let mut f = ag.clone();
        let mut prev_inc = inc0;
        let mut first_inc = None;
        let mut stalled = 0;
        let mut converged = inc0 == 0.0;
        let mut last_trace = None;
        if !converged {
            for k in 1..=opts.max_iters {
                let clock = Instant::now();
                let lf = self.forward(&f)?;
                rows[k - 1].data_residual = data_residual(&lf);
                let alf = self.apply_a(&lf)?;
                // f_k = A g + f_{k−1} − AΛ f_{k−1}
                let mut next = ag.clone();
                next.axpy(1.0, &f)?;
                next.axpy(-1.0, &alf)?;
                let inc = self.h_norm(&next.sub(&f)?)?;
                let ratio = if prev_inc > 0.0 { inc / prev_inc } else { 0.0 };
                let (eh, el) = errors(&next)?;
                rows.push(IterationRecord {
                    j: k,
                    residual: inc,
                    error_h: eh,
                    error_l2: el,
                    ratio: Some(ratio),
                    seconds: clock.elapsed().as_secs_f64(),
                    data_residual: f64::NAN,
                });
                f = next;
                let first = *first_inc.get_or_insert(inc);
                if inc <= opts.tol * first {
                    converged = true;
                    break;
                }
                if ratio > STALL_RATIO {
                    stalled += 1;
                    if stalled >= STALL_LIMIT {
                        return Err(Error::NoProgress { iteration: k, ratio });
                    }
                } else {
                    stalled = 0;
                }
                prev_inc = inc;
            }
            last_trace = Some(self.forward(&f)?);
        }
        let last = rows.len() - 1;
        rows[last].data_residual = match &last_trace {
            Some(t) => data_residual(t),
            None => data_residual(&BoundaryTrace {
                values: vec![0.0; g.values.len()],
                ..g.clone()
            }),
        };
        let contraction_estimate = rows
            .iter()
            .filter_map(|r| r.ratio)
            .fold(f64::NAN, |m: f64, r| if m.is_nan() { r } else { m.max(r) });
        Ok(ReconstructionReport {
            iterations: rows,
            contraction_estimate,
            converged,
            terminal_f: f,
            config_echo: self.config_echo(opts),
        })
    }

    fn config_echo(&self, opts: &ReconstructOptions) -> Vec<(String, String)> {
        let g = self.medium.grid();
        let c = self.solver.config();
        let mut out = vec![
            ("dim".into(), g.dim().to_string()),
            ("n".into(), format!("{:?}", g.n())),
            ("h".into(), format!("{:?}", g.h())),
            ("dt".into(), format!("{:e}", c.dt)),
            ("cfl".into(), c.cfl.to_string()),
            ("t_final".into(), c.t_final.to_string()),
            ("pml_width".into(), c.pml_width.to_string()),
            ("pml_strength".into(), format!("{:e}", c.pml_strength)),
            ("record_stride".into(), c.record_stride.to_string()),
            ("max_iters".into(), opts.max_iters.to_string()),
            ("tol".into(), format!("{:e}", opts.tol)),
        ];
        out.push(("c_plus".into(), format!("{:e}", self.medium.c_plus)));
        out.push(("c_minus".into(), format!("{:e}", self.medium.c_minus)));
        out
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
pub struct ReconstructOptions<'t> {
    pub max_iters: usize,
    pub tol: f64,
    pub ground_truth: Option<&'t VectorField>,
}

impl Default for ReconstructOptions<'_> {
    fn default() -> Self {
        ReconstructOptions {
            max_iters: 8,
            tol: 1e-6,
            ground_truth: None,
        }
    }
}

/// Diagnostics of one term of the series.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub j: usize,
    /// `‖f_j − f_{j−1}‖_H(Ω₀)` (with `f_{−1} = 0`).
    pub residual: f64,
    /// `‖f_j − f‖_H / ‖f‖_H` when a ground truth is given.
    pub error_h: Option<f64>,
    pub error_l2: Option<f64>,
    /// `residual_j / residual_{j−1}`, an estimate of `‖K‖`.
    pub ratio: Option<f64>,
    pub seconds: f64,
    /// `‖Λf_j − g‖ / ‖g‖` over all trace samples.
    pub data_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub iterations: Vec<IterationRecord>,
    /// Largest increment ratio observed (NaN with a single row).
    pub contraction_estimate: f64,
    pub converged: bool,
    pub terminal_f: VectorField,
    pub config_echo: Vec<(String, String)>,
}

impl ReconstructionReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.iterations.iter().filter_map(|r| r.ratio).collect()
    }
}

pub fn apply_a(
    medium: &Medium,
    domain: &DomainSpec,
    g: &BoundaryTrace,
    config: &SolverConfig,
) -> Result<VectorField> {
    NeumannOperator::new(medium, domain, config)?.apply_a(g)
}

pub fn apply_k(
    medium: &Medium,
    domain: &DomainSpec,
    f: &VectorField,
    config: &SolverConfig,
) -> Result<VectorField> {
    NeumannOperator::new(medium, domain, config)?.apply_k(f)
}

pub fn reconstruct(
    medium: &Medium,
    domain: &DomainSpec,
    g: &BoundaryTrace,
    config: &SolverConfig,
    opts: &ReconstructOptions,
) -> Result<ReconstructionReport> {
    NeumannOperator::new(medium, domain, config)?.reconstruct(g, opts)
}
