//! Disturbance-adaptive acceleration intervals.
//!
//! The planner's feasible acceleration set per axis is an interval whose
//! width is fixed by the actuator capacity and whose center shifts with the
//! current disturbance estimate. A tailwind therefore widens what the planner
//! may demand downwind and narrows it upwind, which is exactly the signal
//! the search's directional penalty and the mode switcher react to. An
//! interval that ends up entirely on one side of zero is not an error.

use crate::types::{Mode, Vec3, VehicleParams};
use serde::{Deserialize, Serialize};

/// Per-axis feasible acceleration intervals (m/s²) for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelBounds {
    pub min: Vec3,
    pub max: Vec3,
    pub mode: Mode,
}

impl AccelBounds {
    pub fn interval(&self, axis: usize) -> (f64, f64) {
        (self.min[axis], self.max[axis])
    }

    /// Width of the interval on an axis.
    pub fn width(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn contains(&self, a: Vec3) -> bool {
        (0..3).all(|axis| a[axis] >= self.min[axis] - 1e-12 && a[axis] <= self.max[axis] + 1e-12)
    }

    /// Clamp an acceleration into the bounds component-wise.
    pub fn clamp(&self, a: Vec3) -> Vec3 {
        Vec3::new(
            a.x.clamp(self.min.x, self.max.x),
            a.y.clamp(self.min.y, self.max.y),
            a.z.clamp(self.min.z, self.max.z),
        )
    }

    /// Sum over axes of the distance from `a` to the nearer interval edge.
    /// Negative when `a` lies outside the bounds.
    pub fn margin(&self, a: Vec3) -> f64 {
        (0..3)
            .map(|axis| (a[axis] - self.min[axis]).min(self.max[axis] - a[axis]))
            .sum()
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) / 2.0
    }
}

/// Flight-mode bounds. Lateral axes get symmetric thrust capacity shifted by
/// the estimate; the vertical axis spans `[d̂_z, F_max_z/m + d̂_z]` because
/// thrust cannot be negative.
pub fn air_bounds(d1_hat: Vec3, p: &VehicleParams) -> AccelBounds {
    let ax = p.f1_max.x / p.mass;
    let ay = p.f1_max.y / p.mass;
    let az = p.f1_max.z / p.mass;
    AccelBounds {
        min: Vec3::new(-ax + d1_hat.x, -ay + d1_hat.y, d1_hat.z),
        max: Vec3::new(ax + d1_hat.x, ay + d1_hat.y, az + d1_hat.z),
        mode: Mode::Air,
    }
}

/// Ground-mode bounds. The vertical interval is pinned to `[0, 0]`: wheels
/// cannot accelerate the vehicle off the plane.
pub fn land_bounds(d2_hat: Vec3, p: &VehicleParams) -> AccelBounds {
    let ax = p.f2_max[0] / p.mass;
    let ay = p.f2_max[1] / p.mass;
    AccelBounds {
        min: Vec3::new(-ax + d2_hat.x, -ay + d2_hat.y, 0.0),
        max: Vec3::new(ax + d2_hat.x, ay + d2_hat.y, 0.0),
        mode: Mode::Land,
    }
}

/// The air/land bounds pair a planning cycle works with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsPair {
    pub air: AccelBounds,
    pub land: AccelBounds,
}

impl BoundsPair {
    pub fn new(air: AccelBounds, land: AccelBounds) -> Self {
        debug_assert_eq!(air.mode, Mode::Air);
        debug_assert_eq!(land.mode, Mode::Land);
        Self { air, land }
    }

    /// Zero-disturbance bounds (the fixed-bounds baseline). The flight pair
    /// still carries the hover-gravity offset on z: with no wind the flight
    /// disturbance estimate reads `(0, 0, −g)` by definition.
    pub fn frozen(p: &VehicleParams) -> Self {
        Self {
            air: air_bounds(Vec3::new(0.0, 0.0, -p.gravity), p),
            land: land_bounds(Vec3::zeros(), p),
        }
    }

    /// Bounds governing a trajectory point at altitude `z`: air above the
    /// threshold, land at or below it.
    pub fn select(&self, z: f64, altitude_threshold: f64) -> &AccelBounds {
        if z > altitude_threshold {
            &self.air
        } else {
            &self.land
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::GRAVITY;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(mass: f64, f1: [f64; 3], f2: [f64; 2]) -> VehicleParams {
        VehicleParams {
            mass,
            f1_max: Vec3::new(f1[0], f1[1], f1[2]),
            f2_max: f2,
            ..VehicleParams::default()
        }
    }

    #[test]
    fn air_bounds_still_air() {
        let p = params(1.0, [5.0, 5.0, 20.0], [3.0, 3.0]);
        let b = air_bounds(Vec3::new(0.0, 0.0, -GRAVITY), &p);
        assert_relative_eq!(b.min.x, -5.0);
        assert_relative_eq!(b.max.x, 5.0);
        assert_relative_eq!(b.min.y, -5.0);
        assert_relative_eq!(b.max.y, 5.0);
        assert_relative_eq!(b.min.z, -9.81);
        assert_relative_eq!(b.max.z, 10.19);
    }

    #[test]
    fn air_bounds_shift_against_headwind() {
        let p = params(1.0, [5.0, 5.0, 20.0], [3.0, 3.0]);
        let b = air_bounds(Vec3::new(-2.0, 0.0, -GRAVITY), &p);
        assert_relative_eq!(b.min.x, -7.0);
        assert_relative_eq!(b.max.x, 3.0);
    }

    #[test]
    fn air_bounds_zero_estimate_identity() {
        let p = params(1.0, [5.0, 5.0, 20.0], [3.0, 3.0]);
        let b = air_bounds(Vec3::zeros(), &p);
        assert_relative_eq!(b.min.x, -5.0);
        assert_relative_eq!(b.max.x, 5.0);
        assert_relative_eq!(b.min.z, 0.0);
        assert_relative_eq!(b.max.z, 20.0);
    }

    #[test]
    fn land_bounds_cases() {
        let p = params(1.0, [5.0, 5.0, 20.0], [3.0, 3.0]);
        let b = land_bounds(Vec3::zeros(), &p);
        assert_relative_eq!(b.min.x, -3.0);
        assert_relative_eq!(b.max.x, 3.0);
        assert_eq!(b.min.z, 0.0);
        assert_eq!(b.max.z, 0.0);

        let rolling = land_bounds(Vec3::new(-1.5, 0.0, 0.0), &p);
        assert_relative_eq!(rolling.min.x, -4.5);
        assert_relative_eq!(rolling.max.x, 1.5);

        // Severe resistance: the whole forward interval goes negative;
        // propagated, not rejected.
        let severe = land_bounds(Vec3::new(-3.1, 0.0, 0.0), &p);
        assert_relative_eq!(severe.min.x, -6.1);
        assert_relative_eq!(severe.max.x, -0.1);
        assert!(severe.max.x < 0.0);
    }

    #[test]
    fn width_is_disturbance_invariant_and_shift_affine() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let p = params(
                rng.gen_range(0.5..4.0),
                [
                    rng.gen_range(1.0..20.0),
                    rng.gen_range(1.0..20.0),
                    rng.gen_range(5.0..40.0),
                ],
                [rng.gen_range(1.0..15.0), rng.gen_range(1.0..15.0)],
            );
            let d = Vec3::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-12.0..2.0),
            );
            let delta = Vec3::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );

            let a = air_bounds(d, &p);
            for axis in 0..2 {
                assert!((a.width(axis) - 2.0 * p.f1_max[axis] / p.mass).abs() < 1e-12);
            }
            assert!((a.width(2) - p.f1_max.z / p.mass).abs() < 1e-12);
            let a2 = air_bounds(d + delta, &p);
            for axis in 0..3 {
                assert!((a2.min[axis] - (a.min[axis] + delta[axis])).abs() < 1e-12);
                assert!((a2.max[axis] - (a.max[axis] + delta[axis])).abs() < 1e-12);
                assert!(a.min[axis] <= a.max[axis]);
            }

            let dl = Vec3::new(d.x, d.y, 0.0);
            let l = land_bounds(dl, &p);
            for axis in 0..2 {
                assert!((l.width(axis) - 2.0 * p.f2_max[axis] / p.mass).abs() < 1e-12);
                assert!(l.min[axis] <= l.max[axis]);
            }
            assert_eq!(l.min.z, 0.0);
            assert_eq!(l.max.z, 0.0);
        }
    }

    #[test]
    fn margin_and_clamp() {
        let p = params(1.0, [5.0, 5.0, 20.0], [3.0, 3.0]);
        let b = air_bounds(Vec3::new(0.0, 0.0, -5.0), &p);
        let inside = Vec3::new(0.0, 0.0, 0.0);
        assert!(b.contains(inside));
        assert!(b.margin(inside) > 0.0);
        let outside = Vec3::new(9.0, 0.0, 0.0);
        assert!(!b.contains(outside));
        assert!(b.contains(b.clamp(outside)));
    }

    #[test]
    fn select_by_altitude() {
        let p = VehicleParams::default();
        let pair = BoundsPair::frozen(&p);
        assert_eq!(pair.select(1.0, 0.5).mode, Mode::Air);
        assert_eq!(pair.select(0.5, 0.5).mode, Mode::Land);
        assert_eq!(pair.select(0.0, 0.5).mode, Mode::Land);
    }
}
