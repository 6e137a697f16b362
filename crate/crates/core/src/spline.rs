//! Uniform B-splines over 3D control points.
//!
//! Knots are implicit and equally spaced: knot `i` sits at `i·Δt`. For a
//! degree-p spline with control points `Q_0..Q_N` the evaluable parameter
//! range is `[p·Δt, (N+1)·Δt]`. Differencing the control polygon gives the
//! derivative splines directly: `V_i = (Q_{i+1} − Q_i)/Δt` and
//! `A_i = (V_{i+1} − V_i)/Δt`, which is what the optimizer's velocity and
//! acceleration costs index.

use crate::types::Vec3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplineError {
    #[error("need at least degree+1 control points, got {0}")]
    TooFewPoints(usize),
    #[error("path must contain at least 2 states")]
    DegeneratePath,
}

/// One sampled state along a planned path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub time: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

/// Uniform B-spline: degree, knot spacing, control points.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBSpline {
    control_points: Vec<Vec3>,
    knot_dt: f64,
    degree: usize,
}

/// Position/velocity/acceleration at one parameter value. `clamped` is set
/// when the query fell outside the valid range and was evaluated at the
/// nearer end.
#[derive(Debug, Clone, Copy)]
pub struct SplineSample {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub clamped: bool,
}

/// De Boor evaluation on uniform knots. `shift` moves the knot origin: the
/// derivative spline of a uniform spline lives on the same grid shifted by
/// one knot.
fn de_boor(points: &[Vec3], degree: usize, shift: usize, dt: f64, t: f64) -> Vec3 {
    let n = points.len();
    debug_assert!(n > degree);
    let knot = |i: usize| (i + shift) as f64 * dt;
    let mut k = (t / dt).floor() as isize - shift as isize;
    k = k.clamp(degree as isize, (n - 1) as isize);
    let k = k as usize;
    let mut d: Vec<Vec3> = (0..=degree).map(|j| points[j + k - degree]).collect();
    for r in 1..=degree {
        for j in (r..=degree).rev() {
            let i = j + k - degree;
            let denom = knot(i + degree - r + 1) - knot(i);
            let alpha = (t - knot(i)) / denom;
            d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
        }
    }
    d[degree]
}

impl UniformBSpline {
    pub fn new(
        control_points: Vec<Vec3>,
        knot_dt: f64,
        degree: usize,
    ) -> Result<Self, SplineError> {
        assert!(knot_dt > 0.0, "knot spacing must be positive");
        assert!(degree >= 2, "degree must be at least 2");
        if control_points.len() < degree + 1 {
            return Err(SplineError::TooFewPoints(control_points.len()));
        }
        Ok(Self {
            control_points,
            knot_dt,
            degree,
        })
    }

    pub fn control_points(&self) -> &[Vec3] {
        &self.control_points
    }

    pub fn control_points_mut(&mut self) -> &mut [Vec3] {
        &mut self.control_points
    }

    pub fn knot_dt(&self) -> f64 {
        self.knot_dt
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// First valid parameter value.
    pub fn t_start(&self) -> f64 {
        self.degree as f64 * self.knot_dt
    }

    /// Last valid parameter value.
    pub fn t_end(&self) -> f64 {
        self.control_points.len() as f64 * self.knot_dt
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    /// Velocity control points `(Q_{i+1} − Q_i)/Δt`.
    pub fn velocity_control_points(&self) -> Vec<Vec3> {
        self.control_points
            .windows(2)
            .map(|w| (w[1] - w[0]) / self.knot_dt)
            .collect()
    }

    /// Acceleration control points `(Q_{i+2} − 2Q_{i+1} + Q_i)/Δt²`.
    pub fn accel_control_points(&self) -> Vec<Vec3> {
        let dt2 = self.knot_dt * self.knot_dt;
        self.control_points
            .windows(3)
            .map(|w| (w[2] - 2.0 * w[1] + w[0]) / dt2)
            .collect()
    }

    /// Evaluate position and its first two derivatives, clamping out-of-range
    /// parameters to the nearer end.
    pub fn evaluate(&self, t: f64) -> SplineSample {
        let clamped = t < self.t_start() || t > self.t_end();
        let tc = t.clamp(self.t_start(), self.t_end());
        let position = de_boor(&self.control_points, self.degree, 0, self.knot_dt, tc);
        let vel_pts = self.velocity_control_points();
        let velocity = de_boor(&vel_pts, self.degree - 1, 1, self.knot_dt, tc);
        let acc_pts = self.accel_control_points();
        let acceleration = de_boor(&acc_pts, self.degree - 2, 2, self.knot_dt, tc);
        SplineSample {
            position,
            velocity,
            acceleration,
            clamped,
        }
    }

    /// Sample the whole spline at a fixed time step, endpoints included.
    pub fn sample_uniform(&self, sample_dt: f64) -> Vec<PathPoint> {
        let mut out = Vec::new();
        let mut t = self.t_start();
        let end = self.t_end();
        while t < end - 1e-12 {
            let s = self.evaluate(t);
            out.push(PathPoint {
                time: t - self.t_start(),
                position: s.position,
                velocity: s.velocity,
                acceleration: s.acceleration,
            });
            t += sample_dt;
        }
        let s = self.evaluate(end);
        out.push(PathPoint {
            time: end - self.t_start(),
            position: s.position,
            velocity: s.velocity,
            acceleration: s.acceleration,
        });
        out
    }
}

/// Control points that pin the spline's start to `(p, v, a)`.
/// For a uniform spline the boundary state determines the first three points.
fn head_points(p: Vec3, v: Vec3, a: Vec3, dt: f64) -> [Vec3; 3] {
    let q1 = p - a * dt * dt / 6.0;
    let q0 = q1 - v * dt + a * dt * dt / 2.0;
    let q2 = q0 + 2.0 * v * dt;
    [q0, q1, q2]
}

/// Control points that pin the spline's end to `(p, v, a)` (mirror of
/// [`head_points`]).
fn tail_points(p: Vec3, v: Vec3, a: Vec3, dt: f64) -> [Vec3; 3] {
    let qm1 = p - a * dt * dt / 6.0; // Q_{N-1}
    let qm2 = qm1 - v * dt + a * dt * dt / 2.0; // Q_{N-2}
    let qn = qm2 + 2.0 * v * dt; // Q_N
    [qm2, qm1, qn]
}

/// Basis weight of control point `base+j` at parameter `t`, computed by
/// running De Boor with an indicator control polygon.
fn basis_weights(degree: usize, shift: usize, dt: f64, t: f64, n_points: usize) -> (usize, Vec<f64>) {
    let knot = |i: usize| (i + shift) as f64 * dt;
    let mut k = (t / dt).floor() as isize - shift as isize;
    k = k.clamp(degree as isize, (n_points - 1) as isize);
    let k = k as usize;
    let base = k - degree;
    let mut weights = vec![0.0; degree + 1];
    for w in 0..=degree {
        let mut d = vec![0.0f64; degree + 1];
        d[w] = 1.0;
        for r in 1..=degree {
            for j in (r..=degree).rev() {
                let i = j + k - degree;
                let denom = knot(i + degree - r + 1) - knot(i);
                let alpha = (t - knot(i)) / denom;
                d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
            }
        }
        weights[w] = d[degree];
    }
    (base, weights)
}

/// Fit a spline to a timed path: the first and last `degree` control points
/// reproduce the boundary position/velocity/acceleration exactly, interior
/// points least-squares fit the samples.
///
/// Currently implemented for cubic splines (the planner default); the
/// boundary pinning uses the three-point endpoint identities.
pub fn fit_from_path(
    path: &[PathPoint],
    knot_dt: f64,
    degree: usize,
) -> Result<UniformBSpline, SplineError> {
    assert_eq!(degree, 3, "path fitting is implemented for cubic splines");
    if path.len() < 2 {
        // Degenerate fallback: a stationary spline at the single point.
        if let Some(p) = path.first() {
            let pts = vec![p.position; degree + 2];
            return UniformBSpline::new(pts, knot_dt, degree);
        }
        return Err(SplineError::DegeneratePath);
    }
    let t0 = path[0].time;
    let total = path.last().unwrap().time - t0;
    if total <= 1e-9 {
        let pts = vec![path[0].position; degree + 2];
        return UniformBSpline::new(pts, knot_dt, degree);
    }
    let spans = ((total / knot_dt).round() as usize).max(1);
    let dt = total / spans as f64;
    let n_points = spans + degree; // N + 1

    let first = path[0];
    let last = *path.last().unwrap();
    let head = head_points(first.position, first.velocity, first.acceleration, dt);
    let tail = tail_points(last.position, last.velocity, last.acceleration, dt);

    let mut points = vec![Vec3::zeros(); n_points];
    points[0] = head[0];
    points[1] = head[1];
    points[2] = head[2];
    points[n_points - 3] = tail[0];
    points[n_points - 2] = tail[1];
    points[n_points - 1] = tail[2];

    let free_lo = 3usize;
    let free_hi = n_points.saturating_sub(3); // exclusive
    if free_lo < free_hi {
        let n_free = free_hi - free_lo;
        let t_start = degree as f64 * dt;
        // Least-squares system per axis over the interior points.
        let mut rows: Vec<(Vec<(usize, f64)>, Vec3)> = Vec::new();
        for s in path {
            let t = t_start + (s.time - t0);
            let (base, w) = basis_weights(degree, 0, dt, t, n_points);
            let mut free_terms = Vec::new();
            let mut rhs = s.position;
            for (j, wj) in w.iter().enumerate() {
                let idx = base + j;
                if idx >= free_lo && idx < free_hi {
                    free_terms.push((idx - free_lo, *wj));
                } else {
                    rhs -= points[idx] * *wj;
                }
            }
            rows.push((free_terms, rhs));
        }
        // Seed rows touching no free point contribute nothing.
        let m = rows.len();
        let mut a = nalgebra::DMatrix::<f64>::zeros(m, n_free);
        let mut b = nalgebra::DMatrix::<f64>::zeros(m, 3);
        for (r, (terms, rhs)) in rows.iter().enumerate() {
            for (c, w) in terms {
                a[(r, *c)] = *w;
            }
            for axis in 0..3 {
                b[(r, axis)] = rhs[axis];
            }
        }
        let svd = a.svd(true, true);
        let sol = svd.solve(&b, 1e-12).expect("least-squares solve");
        for i in 0..n_free {
            points[free_lo + i] = Vec3::new(sol[(i, 0)], sol[(i, 1)], sol[(i, 2)]);
        }
    }

    UniformBSpline::new(points, dt, degree)
}
