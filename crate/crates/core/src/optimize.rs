//! B-spline trajectory refinement.
//!
//! The objective is a weighted sum of four terms evaluated on the control
//! polygon: squared second differences (smoothness), a hinge on clearance
//! below `d_thr` at each control point (collision), a hinge on per-axis
//! velocity-control-point overshoot (velocity), and a squared-softplus
//! penalty on acceleration control points that leave the per-axis bounds
//! (acceleration feasibility). Which bounds govern an acceleration term is
//! decided by the height of its leading control point: above the altitude
//! threshold the flight bounds apply, at or below it the ground bounds.
//!
//! All gradients are analytic; ESDF spatial derivatives use the exact
//! gradient of the trilinear interpolant so the collision gradient matches
//! finite differences of the cost.

use crate::bounds::BoundsPair;
use crate::esdf::Esdf;
use crate::spline::UniformBSpline;
use crate::types::Vec3;
use serde::{Deserialize, Serialize};

/// Weights and knobs for the trajectory objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeConfig {
    pub lambda_smooth: f64,
    pub lambda_collision: f64,
    pub lambda_velocity: f64,
    pub lambda_accel: f64,
    /// Softplus sharpness (1/(m/s²)).
    pub beta: f64,
    /// Velocity limit per axis (m/s).
    pub v_max: f64,
    /// Clearance below which the collision cost activates (m).
    pub d_thr: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            lambda_smooth: 1.0,
            lambda_collision: 10.0,
            lambda_velocity: 1.0,
            lambda_accel: 1.0,
            beta: 10.0,
            v_max: 3.0,
            d_thr: 0.4,
            max_iterations: 100,
            gradient_tolerance: 1e-4,
        }
    }
}

/// Numerically stable `softplus(x) = ln(1 + e^(βx))/β`.
pub fn softplus(x: f64, beta: f64) -> f64 {
    debug_assert!(beta > 0.0);
    x.max(0.0) + (-beta * x.abs()).exp().ln_1p() / beta
}

/// Derivative of softplus: the logistic `σ(βx)`.
fn softplus_grad(x: f64, beta: f64) -> f64 {
    1.0 / (1.0 + (-beta * x).exp())
}

fn hinge(x: f64) -> f64 {
    x.max(0.0)
}

/// Gradient accumulator over control points.
type Grad = Vec<Vec3>;

fn zero_grad(n: usize) -> Grad {
    vec![Vec3::zeros(); n]
}

/// Smoothness: `Σ ‖Q_{i+2} − 2Q_{i+1} + Q_i‖²` over the control polygon.
pub fn smoothness_cost(spline: &UniformBSpline) -> (f64, Grad) {
    let q = spline.control_points();
    let mut cost = 0.0;
    let mut grad = zero_grad(q.len());
    for i in 0..q.len().saturating_sub(2) {
        let d = q[i + 2] - 2.0 * q[i + 1] + q[i];
        cost += d.norm_squared();
        let g = 2.0 * d;
        grad[i] += g;
        grad[i + 1] -= 2.0 * g;
        grad[i + 2] += g;
    }
    (cost, grad)
}

/// Collision: `Σ hinge(d_thr − dist(Q_i))²` at every control point. Points
/// outside the map read clearance = truncation.
pub fn collision_cost(spline: &UniformBSpline, esdf: &Esdf, d_thr: f64) -> (f64, Grad) {
    let q = spline.control_points();
    let mut cost = 0.0;
    let mut grad = zero_grad(q.len());
    for (i, p) in q.iter().enumerate() {
        let s = esdf.sample(*p);
        let dist = if s.out_of_bounds {
            esdf.truncation()
        } else {
            s.distance
        };
        let violation = hinge(d_thr - dist);
        if violation > 0.0 {
            cost += violation * violation;
            if !s.out_of_bounds {
                // d(cost)/dQ = -2·violation·∇dist
                grad[i] -= 2.0 * violation * esdf.sample_gradient(*p);
            }
        }
    }
    (cost, grad)
}

/// Velocity: `Σ_axes Σ_i hinge(|V_i| − v_max)²` over velocity control points.
pub fn velocity_cost(spline: &UniformBSpline, v_max: f64) -> (f64, Grad) {
    let q = spline.control_points();
    let dt = spline.knot_dt();
    let mut cost = 0.0;
    let mut grad = zero_grad(q.len());
    for i in 0..q.len().saturating_sub(1) {
        let v = (q[i + 1] - q[i]) / dt;
        for axis in 0..3 {
            let over = hinge(v[axis].abs() - v_max);
            if over > 0.0 {
                cost += over * over;
                let g = 2.0 * over * v[axis].signum() / dt;
                grad[i][axis] -= g;
                grad[i + 1][axis] += g;
            }
        }
    }
    (cost, grad)
}

/// Acceleration feasibility: squared softplus of per-axis bound violations on
/// the acceleration control points `A_i`, summed over
/// `i = degree−2 ..= N−degree`, bounds selected by the height of `Q_i`.
pub fn accel_penalty(
    spline: &UniformBSpline,
    bounds: &BoundsPair,
    altitude_threshold: f64,
    beta: f64,
) -> (f64, Grad) {
    let q = spline.control_points();
    let n = q.len() - 1; // highest control-point index
    let p_b = spline.degree();
    let dt2 = spline.knot_dt() * spline.knot_dt();
    let mut cost = 0.0;
    let mut grad = zero_grad(q.len());
    if p_b < 2 || n < p_b {
        return (cost, grad);
    }
    let lo_i = p_b - 2;
    let hi_i = n - p_b; // inclusive
    for i in lo_i..=hi_i {
        if i + 2 > n {
            break;
        }
        let a = (q[i + 2] - 2.0 * q[i + 1] + q[i]) / dt2;
        let b = bounds.select(q[i].z, altitude_threshold);
        for axis in 0..3 {
            let under = b.min[axis] - a[axis];
            let over = a[axis] - b.max[axis];
            let sp_under = softplus(under, beta);
            let sp_over = softplus(over, beta);
            cost += sp_under * sp_under + sp_over * sp_over;
            // d/dA = -2·sp(under)·σ(β·under) + 2·sp(over)·σ(β·over)
            let da = -2.0 * sp_under * softplus_grad(under, beta)
                + 2.0 * sp_over * softplus_grad(over, beta);
            let g = da / dt2;
            grad[i][axis] += g;
            grad[i + 1][axis] -= 2.0 * g;
            grad[i + 2][axis] += g;
        }
    }
    (cost, grad)
}

/// Weighted total objective and its gradient.
pub fn total_cost(
    spline: &UniformBSpline,
    cfg: &OptimizeConfig,
    esdf: &Esdf,
    bounds: &BoundsPair,
    altitude_threshold: f64,
) -> (f64, Grad) {
    let n = spline.control_points().len();
    let mut cost = 0.0;
    let mut grad = zero_grad(n);
    let mut add = |c: f64, g: Grad, w: f64| {
        cost += w * c;
        for (acc, gi) in grad.iter_mut().zip(g) {
            *acc += w * gi;
        }
    };
    if cfg.lambda_smooth != 0.0 {
        let (c, g) = smoothness_cost(spline);
        add(c, g, cfg.lambda_smooth);
    }
    if cfg.lambda_collision != 0.0 {
        let (c, g) = collision_cost(spline, esdf, cfg.d_thr);
        add(c, g, cfg.lambda_collision);
    }
    if cfg.lambda_velocity != 0.0 {
        let (c, g) = velocity_cost(spline, cfg.v_max);
        add(c, g, cfg.lambda_velocity);
    }
    if cfg.lambda_accel != 0.0 {
        let (c, g) = accel_penalty(spline, bounds, altitude_threshold, cfg.beta);
        add(c, g, cfg.lambda_accel);
    }
    (cost, grad)
}

/// Outcome of one optimization run.
#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub spline: UniformBSpline,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    /// Gradient norm dropped below tolerance.
    pub converged: bool,
    /// Line search hit a non-finite cost; best-so-far was returned.
    pub degraded: bool,
}

/// Limited-memory quasi-Newton minimization of the total objective over the
/// interior control points. The first and last `degree` control points are
/// boundary conditions and never move.
pub fn optimize(
    initial: &UniformBSpline,
    cfg: &OptimizeConfig,
    esdf: &Esdf,
    bounds: &BoundsPair,
    altitude_threshold: f64,
) -> OptimizeResult {
    let n = initial.control_points().len();
    let p_b = initial.degree();
    let free_lo = p_b;
    let free_hi = n.saturating_sub(p_b); // exclusive
    let (initial_cost, _) = total_cost(initial, cfg, esdf, bounds, altitude_threshold);

    if free_lo >= free_hi {
        return OptimizeResult {
            spline: initial.clone(),
            initial_cost,
            final_cost: initial_cost,
            iterations: 0,
            converged: true,
            degraded: false,
        };
    }
    let n_free = free_hi - free_lo;
    let dim = n_free * 3;

    let mut spline = initial.clone();
    let pack = |s: &UniformBSpline| -> Vec<f64> {
        let mut x = Vec::with_capacity(dim);
        for q in &s.control_points()[free_lo..free_hi] {
            x.extend_from_slice(&[q.x, q.y, q.z]);
        }
        x
    };
    let unpack = |s: &mut UniformBSpline, x: &[f64]| {
        for (i, q) in s.control_points_mut()[free_lo..free_hi].iter_mut().enumerate() {
            *q = Vec3::new(x[3 * i], x[3 * i + 1], x[3 * i + 2]);
        }
    };
    let eval = |s: &mut UniformBSpline, x: &[f64]| -> (f64, Vec<f64>) {
        unpack(s, x);
        let (c, g) = total_cost(s, cfg, esdf, bounds, altitude_threshold);
        let mut gx = Vec::with_capacity(dim);
        for gi in &g[free_lo..free_hi] {
            gx.extend_from_slice(&[gi.x, gi.y, gi.z]);
        }
        (c, gx)
    };

    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let norm = |a: &[f64]| dot(a, a).sqrt();

    let mut x = pack(&spline);
    let (mut fx, mut gx) = eval(&mut spline, &x);
    let mut best_x = x.clone();
    let mut best_f = fx;

    // L-BFGS history.
    const HISTORY: usize = 8;
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();

    let mut converged = norm(&gx) < cfg.gradient_tolerance;
    let mut degraded = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iterations {
        if converged {
            break;
        }
        iterations += 1;

        // Two-loop recursion for the search direction.
        let mut q = gx.clone();
        let mut alphas = vec![0.0; s_hist.len()];
        for i in (0..s_hist.len()).rev() {
            let alpha = rho_hist[i] * dot(&s_hist[i], &q);
            alphas[i] = alpha;
            for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
                *qj -= alpha * yj;
            }
        }
        if let (Some(s_last), Some(y_last)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s_last, y_last) / dot(y_last, y_last).max(1e-300);
            for qj in q.iter_mut() {
                *qj *= gamma;
            }
        }
        for i in 0..s_hist.len() {
            let beta = rho_hist[i] * dot(&y_hist[i], &q);
            for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
                *qj += (alphas[i] - beta) * sj;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&gx, &dir);
        if !(slope < 0.0) {
            // Not a descent direction (stale curvature); fall back to steepest.
            dir = gx.iter().map(|v| -v).collect();
            slope = dot(&gx, &dir);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // Backtracking Armijo line search.
        let mut step = 1.0;
        let c1 = 1e-4;
        let mut accepted = false;
        for _ in 0..40 {
            let x_new: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (f_new, g_new) = eval(&mut spline, &x_new);
            if !f_new.is_finite() {
                degraded = true;
                step *= 0.5;
                continue;
            }
            if f_new <= fx + c1 * step * slope {
                // Update history.
                let s_vec: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y_vec: Vec<f64> = g_new.iter().zip(&gx).map(|(a, b)| a - b).collect();
                let sy = dot(&s_vec, &y_vec);
                if sy > 1e-12 {
                    s_hist.push(s_vec);
                    y_hist.push(y_vec);
                    rho_hist.push(1.0 / sy);
                    if s_hist.len() > HISTORY {
                        s_hist.remove(0);
                        y_hist.remove(0);
                        rho_hist.remove(0);
                    }
                }
                x = x_new;
                fx = f_new;
                gx = g_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        if fx < best_f {
            best_f = fx;
            best_x = x.clone();
        }
        if norm(&gx) < cfg.gradient_tolerance {
            converged = true;
        }
    }

    unpack(&mut spline, &best_x);
    OptimizeResult {
        spline,
        initial_cost,
        final_cost: best_f.min(initial_cost),
        iterations,
        converged,
        degraded,
    }
}
