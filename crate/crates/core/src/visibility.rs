//! Geodesic ray tracing in the metrics `c⁻² dx²` and the visibility certificate.
//!
//! Rays follow the Hamiltonian flow of `H(x, ξ) = c(x)² |ξ|² / 2`:
//!
//! ```text
//! ẋ = c² ξ,    ξ̇ = −c ∇c |ξ|²
//! ```
//!
//! integrated with classical RK4. The covector is renormalized to `|ξ| = 1/c(x)`
//! after every step so the curve has unit speed in the metric, and elapsed time
//! equals travel time. The first crossing of ∂Ω in each time direction is located
//! by bisecting the length of the final step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Mode, Result};
use crate::grid::{dist, DomainSpec, Grid, Point, Region};
use crate::medium::Medium;

/// A smooth scalar wave speed with its gradient.
pub trait SpeedField: Sync {
    fn dim(&self) -> usize;
    fn speed(&self, p: &Point) -> f64;
    fn gradient(&self, p: &Point) -> Point;
}

/// Speed given by closures.
pub struct AnalyticSpeed<F, G> {
    dim: usize,
    speed: F,
    gradient: G,
}

impl<F, G> AnalyticSpeed<F, G>
where
    F: Fn(&Point) -> f64 + Sync,
    G: Fn(&Point) -> Point + Sync,
{
    pub fn new(dim: usize, speed: F, gradient: G) -> Self {
        AnalyticSpeed {
            dim,
            speed,
            gradient,
        }
    }
}

impl<F, G> SpeedField for AnalyticSpeed<F, G>
where
    F: Fn(&Point) -> f64 + Sync,
    G: Fn(&Point) -> Point + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn speed(&self, p: &Point) -> f64 {
        (self.speed)(p)
    }

    fn gradient(&self, p: &Point) -> Point {
        (self.gradient)(p)
    }
}

/// Constant speed.
pub struct ConstantSpeed {
    pub dim: usize,
    pub c: f64,
}

impl SpeedField for ConstantSpeed {
    fn dim(&self) -> usize {
        self.dim
    }

    fn speed(&self, _: &Point) -> f64 {
        self.c
    }

    fn gradient(&self, _: &Point) -> Point {
        [0.0; 3]
    }
}

/// Tensor-product cubic B-spline interpolant of nodal speeds (C², so the ray
/// equations have a C¹ right-hand side). Mirror boundary conditions.
pub struct GridSpeed {
    grid: Grid,
    coeffs: Vec<f64>,
}

impl GridSpeed {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Self {
        let mut coeffs = values;
        let strides = grid.strides();
        for a in 0..grid.dim() {
            let n = grid.n()[a];
            let s = strides[a];
            let mut line = vec![0.0; n];
            for start in 0..grid.len() {
                if grid.coords(start)[a] != 0 {
                    continue;
                }
                for (k, v) in line.iter_mut().enumerate() {
                    *v = coeffs[start + k * s];
                }
                prefilter(&mut line);
                for (k, v) in line.iter().enumerate() {
                    coeffs[start + k * s] = *v;
                }
            }
        }
        GridSpeed {
            grid: grid.clone(),
            coeffs,
        }
    }

    fn eval(&self, p: &Point) -> (f64, Point) {
        let d = self.grid.dim();
        let mut base = [0isize; 3];
        let mut w = [[0.0; 4]; 3];
        let mut dw = [[0.0; 4]; 3];
        for a in 0..d {
            let t = (p[a] - self.grid.min()[a]) / self.grid.h()[a];
            let i = t.floor();
            let f = t - i;
            base[a] = i as isize - 1;
            for k in 0..4 {
                let x = f + 1.0 - k as f64;
                w[a][k] = bspline3(x);
                dw[a][k] = bspline3_deriv(x) / self.grid.h()[a];
            }
        }
        let strides = self.grid.strides();
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        let count = 4usize.pow(d as u32);
        for m in 0..count {
            let mut idx = 0;
            let mut k = [0usize; 3];
            let mut mm = m;
            for a in 0..d {
                k[a] = mm % 4;
                mm /= 4;
                let j = mirror(base[a] + k[a] as isize, self.grid.n()[a]);
                idx += j * strides[a];
            }
            let c = self.coeffs[idx];
            let wt: f64 = (0..d).map(|a| w[a][k[a]]).product();
            value += c * wt;
            for a in 0..d {
                let g: f64 = (0..d)
                    .map(|b| if b == a { dw[b][k[b]] } else { w[b][k[b]] })
                    .product();
                grad[a] += c * g;
            }
        }
        (value, grad)
    }
}

impl SpeedField for GridSpeed {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn speed(&self, p: &Point) -> f64 {
        self.eval(p).0
    }

    fn gradient(&self, p: &Point) -> Point {
        self.eval(p).1
    }
}

fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * (n - 1);
    let mut j = i.rem_euclid(period);
    if j >= n {
        j = period - j;
    }
    j as usize
}

fn bspline3(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1.0 {
        2.0 / 3.0 - ax * ax + 0.5 * ax * ax * ax
    } else if ax < 2.0 {
        (2.0 - ax).powi(3) / 6.0
    } else {
        0.0
    }
}

fn bspline3_deriv(x: f64) -> f64 {
    let ax = x.abs();
    let s = x.signum();
    if ax < 1.0 {
        s * (-2.0 * ax + 1.5 * ax * ax)
    } else if ax < 2.0 {
        -s * 0.5 * (2.0 - ax).powi(2)
    } else {
        0.0
    }
}

/// Solves `(c[i-1] + 4 c[i] + c[i+1]) / 6 = f[i]` with mirrored ends.
fn prefilter(line: &mut [f64]) {
    let n = line.len();
    let mut diag = vec![4.0 / 6.0; n];
    let mut upper = vec![1.0 / 6.0; n];
    let lower = 1.0 / 6.0;
    upper[0] = 2.0 / 6.0;
    let last_lower = 2.0 / 6.0;
    // forward elimination
    for i in 1..n {
        let l = if i == n - 1 { last_lower } else { lower };
        let m = l / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        line[i] -= m * line[i - 1];
    }
    line[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        line[i] = (line[i] - upper[i] * line[i + 1]) / diag[i];
    }
    upper.clear();
}

#[derive(Debug, Clone)]
pub struct RayOptions {
    /// RK4 step in travel-time units.
    pub step: f64,
    /// Give up (trapped ray) once this much time has elapsed in one direction.
    pub time_budget: f64,
    /// Continue past the first exit and report whether the ray re-enters Ω.
    pub check_reentry: bool,
    /// Keep every accepted point of the forward branch.
    pub record_path: bool,
}

impl RayOptions {
    /// Step of about 1/400 of the crossing time at the reference speed; budget
    /// of ten straight-line crossings at the slowest sampled speed.
    pub fn for_region(speed: &dyn SpeedField, omega: &Region) -> Self {
        let dim = speed.dim();
        let (lo, hi) = omega.bounding_box(dim);
        let mut cmin = f64::INFINITY;
        let mut cmax: f64 = 0.0;
        let m = 17usize;
        for k in 0..m.pow(dim as u32) {
            let mut p = [0.0; 3];
            let mut kk = k;
            for a in 0..dim {
                p[a] = lo[a] + (hi[a] - lo[a]) * (kk % m) as f64 / (m - 1) as f64;
                kk /= m;
            }
            let c = speed.speed(&p);
            cmin = cmin.min(c);
            cmax = cmax.max(c);
        }
        let diam = omega.diameter(dim);
        RayOptions {
            step: diam / (400.0 * cmax),
            time_budget: 10.0 * diam / cmin,
            check_reentry: false,
            record_path: false,
        }
    }
}

/// Outcome of tracing one phase-space point in both time directions.
#[derive(Debug, Clone)]
pub struct RayResult {
    pub origin: Point,
    pub direction: Point,
    pub mode: Mode,
    pub tau_plus: f64,
    pub tau_minus: f64,
    /// Exit points of the forward and backward branches.
    pub exit_points: [Point; 2],
    /// Set when `check_reentry` found the ray back inside Ω after its first exit.
    pub reenters: bool,
    /// Forward-branch samples `(t, x)` when `record_path` is on.
    pub path: Vec<(f64, Point)>,
}

#[derive(Clone, Copy)]
struct State {
    x: Point,
    xi: Point,
}

fn rhs(speed: &dyn SpeedField, s: &State) -> State {
    let d = speed.dim();
    let c = speed.speed(&s.x);
    let g = speed.gradient(&s.x);
    let xi2: f64 = (0..d).map(|a| s.xi[a] * s.xi[a]).sum();
    let mut out = State {
        x: [0.0; 3],
        xi: [0.0; 3],
    };
    for a in 0..d {
        out.x[a] = c * c * s.xi[a];
        out.xi[a] = -c * g[a] * xi2;
    }
    out
}

fn rk4(speed: &dyn SpeedField, s: &State, dt: f64) -> State {
    let d = speed.dim();
    let shift = |base: &State, k: &State, f: f64| {
        let mut o = *base;
        for a in 0..d {
            o.x[a] += f * k.x[a];
            o.xi[a] += f * k.xi[a];
        }
        o
    };
    let k1 = rhs(speed, s);
    let k2 = rhs(speed, &shift(s, &k1, 0.5 * dt));
    let k3 = rhs(speed, &shift(s, &k2, 0.5 * dt));
    let k4 = rhs(speed, &shift(s, &k3, dt));
    let mut o = *s;
    for a in 0..d {
        o.x[a] += dt / 6.0 * (k1.x[a] + 2.0 * k2.x[a] + 2.0 * k3.x[a] + k4.x[a]);
        o.xi[a] += dt / 6.0 * (k1.xi[a] + 2.0 * k2.xi[a] + 2.0 * k3.xi[a] + k4.xi[a]);
    }
    normalize(speed, &mut o);
    o
}

fn normalize(speed: &dyn SpeedField, s: &mut State) {
    let d = speed.dim();
    let c = speed.speed(&s.x);
    let len = (0..d).map(|a| s.xi[a] * s.xi[a]).sum::<f64>().sqrt();
    let f = 1.0 / (c * len);
    for a in 0..d {
        s.xi[a] *= f;
    }
}

/// Bisection tolerance on the exit time.
const EXIT_TOL: f64 = 1e-10;

struct Branch {
    tau: f64,
    exit: Point,
    reenters: bool,
}

fn trace_branch(
    speed: &dyn SpeedField,
    omega: &Region,
    start: State,
    sign: f64,
    opts: &RayOptions,
    mut path: Option<&mut Vec<(f64, Point)>>,
) -> Option<Branch> {
    let d = speed.dim();
    let dt = sign * opts.step;
    let mut s = start;
    let mut t: f64 = 0.0;
    if let Some(p) = path.as_deref_mut() {
        p.push((0.0, s.x));
    }
    loop {
        if t.abs() >= opts.time_budget {
            return None;
        }
        let next = rk4(speed, &s, dt);
        if omega.signed_distance(&next.x, d) >= 0.0 {
            // bisect the step length for the crossing
            let (mut lo, mut hi) = (0.0, opts.step);
            while hi - lo > EXIT_TOL {
                let mid = 0.5 * (lo + hi);
                let trial = rk4(speed, &s, sign * mid);
                if omega.signed_distance(&trial.x, d) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let frac = 0.5 * (lo + hi);
            let exit = rk4(speed, &s, sign * frac).x;
            let tau = t + sign * frac;
            if let Some(p) = path.as_deref_mut() {
                p.push((tau, exit));
            }
            let reenters = opts.check_reentry && reentry(speed, omega, next, t + dt, dt, opts);
            return Some(Branch {
                tau,
                exit,
                reenters,
            });
        }
        s = next;
        t += dt;
        if let Some(p) = path.as_deref_mut() {
            p.push((t, s.x));
        }
    }
}

fn reentry(
    speed: &dyn SpeedField,
    omega: &Region,
    mut s: State,
    mut t: f64,
    dt: f64,
    opts: &RayOptions,
) -> bool {
    let d = speed.dim();
    while t.abs() < opts.time_budget {
        s = rk4(speed, &s, dt);
        t += dt;
        if omega.signed_distance(&s.x, d) < 0.0 {
            return true;
        }
    }
    false
}

/// Traces the geodesic through `(x, ξ)` forward and backward in time until it
/// first meets ∂Ω. `xi` is any nonzero direction; it is rescaled to unit length
/// in the metric. The backward branch integrates the flow with a negative step.
pub fn trace_geodesic(
    speed: &dyn SpeedField,
    omega: &Region,
    x: &Point,
    xi: &Point,
    mode: Mode,
    opts: &RayOptions,
) -> Result<RayResult> {
    let d = speed.dim();
    if !omega.contains(x, d) {
        return Err(Error::InvalidDomain(format!(
            "ray origin {:?} is not inside omega",
            &x[..d]
        )));
    }
    let mut start = State { x: *x, xi: *xi };
    normalize(speed, &mut start);
    let trapped = || Error::TrappedRay {
        origin: x[..d].to_vec(),
        direction: xi[..d].to_vec(),
        mode,
    };
    let mut path = Vec::new();
    let fwd = trace_branch(
        speed,
        omega,
        start,
        1.0,
        opts,
        opts.record_path.then_some(&mut path),
    )
    .ok_or_else(trapped)?;
    let bwd = trace_branch(speed, omega, start, -1.0, opts, None).ok_or_else(trapped)?;
    Ok(RayResult {
        origin: *x,
        direction: *xi,
        mode,
        tau_plus: fwd.tau,
        tau_minus: bwd.tau,
        exit_points: [fwd.exit, bwd.exit],
        reenters: fwd.reenters || bwd.reenters,
        path,
    })
}

/// Phase-space sampling: base points on a jittered lattice covering Ω plus its
/// centroid, and evenly spread directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampling {
    pub spacing: f64,
    pub directions: usize,
    /// Jitter amplitude as a fraction of `spacing`.
    pub jitter: f64,
    pub seed: u64,
}

impl Sampling {
    /// Lattice spacing of four cells and 32 directions.
    pub fn for_grid(grid: &Grid) -> Self {
        Sampling {
            spacing: 4.0 * grid.h_max(),
            directions: 32,
            jitter: 0.25,
            seed: 7,
        }
    }

    /// Halved spacing and doubled direction count.
    pub fn refined(&self) -> Self {
        Sampling {
            spacing: 0.5 * self.spacing,
            directions: 2 * self.directions,
            ..self.clone()
        }
    }

    pub fn base_points(&self, omega: &Region, dim: usize) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (lo, hi) = omega.bounding_box(dim);
        let center = omega.center(dim);
        let mut counts = [1usize; 3];
        for a in 0..dim {
            counts[a] = ((hi[a] - lo[a]) / self.spacing).floor() as usize + 1;
        }
        let total: usize = counts[..dim].iter().product();
        let mut pts = vec![center];
        for k in 0..total {
            let mut p = [0.0; 3];
            let mut kk = k;
            for a in 0..dim {
                let i = kk % counts[a];
                kk /= counts[a];
                // lattice centered on the region's centroid
                let offset = (i as f64 - (counts[a] - 1) as f64 / 2.0) * self.spacing;
                let j: f64 = rng.random_range(-1.0..1.0);
                p[a] = center[a] + offset + j * self.jitter * self.spacing;
            }
            if omega.signed_distance(&p, dim) < -1e-9 {
                pts.push(p);
            }
        }
        pts
    }

    pub fn direction_set(&self, dim: usize) -> Vec<Point> {
        let n = self.directions;
        if dim == 2 {
            (0..n)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    [th.cos(), th.sin(), 0.0]
                })
                .collect()
        } else {
            // Fibonacci sphere
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    [r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
    }
}

/// `sup (τ₊ − τ₋)/2` over sampled phase-space points: half the longest
/// geodesic chord found.
pub fn half_chord_sup(speed: &dyn SpeedField, omega: &Region, sampling: &Sampling) -> Result<f64> {
    let d = speed.dim();
    let opts = RayOptions::for_region(speed, omega);
    let mut best: f64 = 0.0;
    for x in sampling.base_points(omega, d) {
        for xi in sampling.direction_set(d) {
            let r = trace_geodesic(speed, omega, &x, &xi, Mode::S, &opts)?;
            best = best.max(0.5 * (r.tau_plus - r.tau_minus));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// Sampled check of the visibility condition: every phase-space point must
/// reach ∂Ω within `T` in at least one time direction, for both modes.
#[derive(Debug, Clone)]
pub struct VisibilityCertificate {
    pub t: f64,
    pub sampled_points: usize,
    pub directions: usize,
    pub spacing: f64,
    /// `min over samples of T − min{τ₊, −τ₋}` for the P and S modes.
    pub worst_margin_p: f64,
    pub worst_margin_s: f64,
    pub verdict: Verdict,
    /// `sup over samples and modes of min{τ₊, −τ₋}`.
    pub sharp_t_estimate: f64,
    /// The sample attaining the estimate.
    pub worst_sample: (Point, Point, Mode),
    /// Rays that failed to exit within the budget.
    pub trapped: Vec<(Point, Point, Mode)>,
    /// Rays that re-entered Ω after leaving (only with `check_reentry`).
    pub reentering: usize,
    pub rays: Vec<RayResult>,
}

impl VisibilityCertificate {
    pub fn worst_margin(&self) -> f64 {
        self.worst_margin_p.min(self.worst_margin_s)
    }
}

/// Certifies the visibility condition for the medium's P and S speeds on Ω.
pub fn certify_visibility(
    medium: &Medium,
    domain: &DomainSpec,
    t: f64,
    sampling: &Sampling,
) -> Result<VisibilityCertificate> {
    let p = medium.speed(Mode::P);
    let s = medium.speed(Mode::S);
    certify_with(p.as_ref(), s.as_ref(), domain.omega(), t, sampling, false)
}

pub fn certify_with(
    p_speed: &dyn SpeedField,
    s_speed: &dyn SpeedField,
    omega: &Region,
    t: f64,
    sampling: &Sampling,
    check_reentry: bool,
) -> Result<VisibilityCertificate> {
    if !(t > 0.0) {
        return Err(Error::config("visibility.t", "observation time must be positive"));
    }
    if sampling.directions < 32 {
        return Err(Error::config(
            "visibility.directions",
            "need at least 32 directions per base point",
        ));
    }
    let d = s_speed.dim();
    let base = sampling.base_points(omega, d);
    let dirs = sampling.direction_set(d);
    let mut worst = [f64::INFINITY; 2];
    let mut sharp = f64::NEG_INFINITY;
    let mut worst_sample = (base[0], dirs[0], Mode::S);
    let mut trapped = Vec::new();
    let mut rays = Vec::new();
    let mut reentering = 0;
    for (mi, (mode, speed)) in [(Mode::P, p_speed), (Mode::S, s_speed)].into_iter().enumerate() {
        let mut opts = RayOptions::for_region(speed, omega);
        opts.check_reentry = check_reentry;
        for x in &base {
            for xi in &dirs {
                match trace_geodesic(speed, omega, x, xi, mode, &opts) {
                    Ok(r) => {
                        let m = r.tau_plus.min(-r.tau_minus);
                        worst[mi] = worst[mi].min(t - m);
                        if m > sharp {
                            sharp = m;
                            worst_sample = (*x, *xi, mode);
                        }
                        reentering += r.reenters as usize;
                        rays.push(r);
                    }
                    Err(Error::TrappedRay { .. }) => {
                        worst[mi] = f64::NEG_INFINITY;
                        trapped.push((*x, *xi, mode));
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let verdict = if worst[0] > 0.0 && worst[1] > 0.0 && trapped.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VisibilityCertificate {
        t,
        sampled_points: base.len(),
        directions: dirs.len(),
        spacing: sampling.spacing,
        worst_margin_p: worst[0],
        worst_margin_s: worst[1],
        verdict,
        sharp_t_estimate: sharp,
        worst_sample,
        trapped,
        reentering,
        rays,
    })
}

/// Refines the sampling until the sharp-time estimate changes by less than
/// `tol`; returns the sequence of estimates.
pub fn refine_sharp_time(
    p_speed: &dyn SpeedField,
    s_speed: &dyn SpeedField,
    omega: &Region,
    sampling: &Sampling,
    tol: f64,
    max_rounds: usize,
) -> Result<Vec<f64>> {
    let mut est = Vec::new();
    let mut s = sampling.clone();
    for _ in 0..max_rounds {
        let c = certify_with(p_speed, s_speed, omega, f64::MAX, &s, false)?;
        est.push(c.sharp_t_estimate);
        let n = est.len();
        if n >= 2 && (est[n - 1] - est[n - 2]).abs() < tol {
            break;
        }
        s = s.refined();
    }
    Ok(est)
}

/// Travel time `∫ c⁻¹ |dx|` along a recorded path (midpoint rule per chord).
pub fn path_travel_time(speed: &dyn SpeedField, path: &[(f64, Point)]) -> f64 {
    let d = speed.dim();
    path.windows(2)
        .map(|w| {
            let (a, b) = (&w[0].1, &w[1].1);
            let mut mid = [0.0; 3];
            for k in 0..d {
                mid[k] = 0.5 * (a[k] + b[k]);
            }
            dist(a, b, d) / speed.speed(&mid)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_disk() -> Region {
        Region::ball(&[0.0, 0.0], 1.0)
    }

    fn radial() -> impl SpeedField {
        AnalyticSpeed::new(
            2,
            |p: &Point| 1.0 + p[0] * p[0] + p[1] * p[1],
            |p: &Point| [2.0 * p[0], 2.0 * p[1], 0.0],
        )
    }

    /// Adaptive Simpson quadrature.
    fn quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64) -> f64 {
            let m = 0.5 * (a + b);
            let l = simpson(f, a, m);
            let r = simpson(f, m, b);
            if (l + r - whole).abs() < 15.0 * tol {
                l + r + (l + r - whole) / 15.0
            } else {
                rec(f, a, m, l, 0.5 * tol) + rec(f, m, b, r, 0.5 * tol)
            }
        }
        rec(f, a, b, simpson(f, a, b), tol)
    }

    #[test]
    fn constant_speed_from_center() {
        let c1 = ConstantSpeed { dim: 2, c: 1.0 };
        let opts = RayOptions::for_region(&c1, &unit_disk());
        for xi in Sampling::for_grid(&Grid::uniform(2, -1.0, 1.0, 9).unwrap()).direction_set(2) {
            let r = trace_geodesic(&c1, &unit_disk(), &[0.0; 3], &xi, Mode::S, &opts).unwrap();
            assert!((r.tau_plus - 1.0).abs() < 1e-9);
            assert!((r.tau_minus + 1.0).abs() < 1e-9);
            for k in 0..2 {
                assert!((r.exit_points[0][k] + r.exit_points[1][k]).abs() < 1e-9);
            }
        }
        let c2 = ConstantSpeed { dim: 2, c: 2.0 };
        let opts = RayOptions::for_region(&c2, &unit_disk());
        let r = trace_geodesic(&c2, &unit_disk(), &[0.0; 3], &[0.0, 1.0, 0.0], Mode::P, &opts)
            .unwrap();
        assert!((r.tau_plus - 0.5).abs() < 1e-9);
    }

    #[test]
    fn radial_speed_matches_quadrature() {
        let oracle = quad(&|r: f64| 1.0 / (1.0 + r * r), 0.0, 1.0, 1e-14);
        assert!((oracle - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        let s = radial();
        let opts = RayOptions::for_region(&s, &unit_disk());
        let r = trace_geodesic(&s, &unit_disk(), &[0.0; 3], &[0.6, 0.8, 0.0], Mode::S, &opts)
            .unwrap();
        assert!((r.tau_plus - oracle).abs() < 1e-8, "{}", r.tau_plus);
        assert!((r.tau_minus + oracle).abs() < 1e-8);
    }

    #[test]
    fn rk4_exit_time_converges_at_fourth_order() {
        let s = radial();
        let mut taus = Vec::new();
        for step in [0.1, 0.05, 0.025] {
            let opts = RayOptions {
                step,
                time_budget: 10.0,
                check_reentry: false,
                record_path: false,
            };
            let r =
                trace_geodesic(&s, &unit_disk(), &[0.0; 3], &[1.0, 0.0, 0.0], Mode::S, &opts)
                    .unwrap();
            taus.push(r.tau_plus);
        }
        let ratio = (taus[2] - taus[1]).abs() / (taus[1] - taus[0]).abs();
        assert!(ratio <= 1.5 / 15.0, "ratio {ratio}");
    }

    #[test]
    fn reversing_direction_swaps_exit_times() {
        let s = AnalyticSpeed::new(
            2,
            |p: &Point| 1.0 + 0.3 * (3.0 * p[0]).sin() * (2.0 * p[1]).cos(),
            |p: &Point| {
                [
                    0.9 * (3.0 * p[0]).cos() * (2.0 * p[1]).cos(),
                    -0.6 * (3.0 * p[0]).sin() * (2.0 * p[1]).sin(),
                    0.0,
                ]
            },
        );
        let opts = RayOptions::for_region(&s, &unit_disk());
        let x = [0.2, -0.3, 0.0];
        let xi = [0.3, 0.7, 0.0];
        let a = trace_geodesic(&s, &unit_disk(), &x, &xi, Mode::S, &opts).unwrap();
        let b = trace_geodesic(&s, &unit_disk(), &x, &[-0.3, -0.7, 0.0], Mode::S, &opts).unwrap();
        assert!((b.tau_plus + a.tau_minus).abs() < 1e-8);
        assert!((a.tau_plus + b.tau_minus).abs() < 1e-8);
    }

    #[test]
    fn traced_time_equals_metric_length() {
        let s = radial();
        let opts = RayOptions {
            step: 1e-3,
            time_budget: 10.0,
            check_reentry: false,
            record_path: true,
        };
        let r = trace_geodesic(&s, &unit_disk(), &[0.3, 0.1, 0.0], &[0.2, 1.0, 0.0], Mode::S, &opts)
            .unwrap();
        let len = path_travel_time(&s, &r.path);
        assert!((len - r.tau_plus).abs() / r.tau_plus < 1e-6, "{len} {}", r.tau_plus);
    }

    #[test]
    fn exit_points_lie_on_boundary() {
        let s = radial();
        let opts = RayOptions::for_region(&s, &unit_disk());
        let r = trace_geodesic(&s, &unit_disk(), &[0.3, 0.1, 0.0], &[0.2, 1.0, 0.0], Mode::S, &opts)
            .unwrap();
        for e in r.exit_points {
            assert!(unit_disk().signed_distance(&e, 2).abs() < 1e-8);
        }
        assert!(r.tau_plus > 0.0 && r.tau_minus < 0.0);
    }

    #[test]
    fn trapping_speed_reports_trapped_ray() {
        // speed vanishing toward the rim: the ray never reaches ∂Ω within the budget
        let s = AnalyticSpeed::new(
            2,
            |p: &Point| (1.0 - (p[0] * p[0] + p[1] * p[1])).max(1e-3),
            |p: &Point| [-2.0 * p[0], -2.0 * p[1], 0.0],
        );
        let opts = RayOptions {
            step: 0.01,
            time_budget: 3.0,
            check_reentry: false,
            record_path: false,
        };
        let e = trace_geodesic(&s, &unit_disk(), &[0.0; 3], &[1.0, 0.0, 0.0], Mode::S, &opts);
        assert!(matches!(e, Err(Error::TrappedRay { .. })));
    }

    #[test]
    fn certificate_for_homogeneous_disk() {
        let c = ConstantSpeed { dim: 2, c: 1.0 };
        let cp = ConstantSpeed { dim: 2, c: 3f64.sqrt() };
        let grid = Grid::uniform(2, -1.5, 1.5, 61).unwrap();
        let sampling = Sampling::for_grid(&grid);
        let pass = certify_with(&cp, &c, &unit_disk(), 1.1, &sampling, false).unwrap();
        assert_eq!(pass.verdict, Verdict::Pass);
        assert!((pass.sharp_t_estimate - 1.0).abs() < 1e-8);
        assert!(pass.worst_sample.0[0].abs() < 1e-12 && pass.worst_sample.0[1].abs() < 1e-12);
        let fail = certify_with(&cp, &c, &unit_disk(), 0.5, &sampling, false).unwrap();
        assert_eq!(fail.verdict, Verdict::Fail);
        assert!(fail.worst_margin_s < 0.0);
    }

    #[test]
    fn grid_speed_interpolates_smooth_fields() {
        let g = Grid::uniform(2, -1.0, 1.0, 41).unwrap();
        let f = |p: &Point| 1.0 + 0.3 * (p[0]).sin() * (p[1]).cos();
        let vals: Vec<f64> = (0..g.len()).map(|i| f(&g.point(i))).collect();
        let gs = GridSpeed::new(&g, vals);
        // exact at nodes
        let i = g.index(&[13, 29]);
        assert!((gs.speed(&g.point(i)) - f(&g.point(i))).abs() < 1e-12);
        let p = [0.123, -0.311, 0.0];
        assert!((gs.speed(&p) - f(&p)).abs() < 1e-5);
        let gr = gs.gradient(&p);
        let exact = [0.3 * p[0].cos() * p[1].cos(), -0.3 * p[0].sin() * p[1].sin()];
        assert!((gr[0] - exact[0]).abs() < 1e-3 && (gr[1] - exact[1]).abs() < 1e-3);
    }
}
