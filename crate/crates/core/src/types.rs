//! Domain types shared by every module: vectors, locomotion mode, vehicle
//! state and physical parameters.

use serde::{Deserialize, Serialize};

/// 3D vector (m, m/s, m/s², or N depending on context).
pub type Vec3 = nalgebra::Vector3<f64>;

/// Standard gravity (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Gravity acceleration vector `[0, 0, g]` in the z-up world frame.
pub fn gravity_vec() -> Vec3 {
    Vec3::new(0.0, 0.0, GRAVITY)
}

/// Active locomotion mode of the bimodal vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Wheeled ground locomotion on the z = 0 plane.
    Land,
    /// Quadrotor flight.
    Air,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Land => write!(f, "land"),
            Mode::Air => write!(f, "air"),
        }
    }
}

/// Full kinematic state of the vehicle plus the active mode.
///
/// Attitude is the Euler triple (roll φ, pitch θ, yaw ψ) mapping body to
/// world. In `Land` mode the vehicle keeps a horizontal orientation: roll and
/// pitch are zero, position.z is zero, and the attitude reduces to yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub position: Vec3,
    pub velocity: Vec3,
    /// Euler angles (roll, pitch, yaw) in radians.
    pub attitude: Vec3,
    /// Euler-angle rates (rad/s).
    pub angular_velocity: Vec3,
    pub mode: Mode,
    /// Simulation time (s).
    pub time: f64,
}

impl VehicleState {
    /// Resting ground state at `position` (z forced to 0) facing `yaw`.
    pub fn grounded(position: Vec3, yaw: f64) -> Self {
        Self {
            position: Vec3::new(position.x, position.y, 0.0),
            velocity: Vec3::zeros(),
            attitude: Vec3::new(0.0, 0.0, yaw),
            angular_velocity: Vec3::zeros(),
            mode: Mode::Land,
            time: 0.0,
        }
    }

    /// Hovering flight state at `position` facing `yaw`.
    pub fn hovering(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            attitude: Vec3::new(0.0, 0.0, yaw),
            angular_velocity: Vec3::zeros(),
            mode: Mode::Air,
            time: 0.0,
        }
    }

    pub fn yaw(&self) -> f64 {
        self.attitude.z
    }

    /// All components finite, and the Land-mode plane/attitude constraints hold.
    pub fn is_valid(&self) -> bool {
        let finite = self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.attitude.iter().all(|v| v.is_finite())
            && self.angular_velocity.iter().all(|v| v.is_finite())
            && self.time.is_finite();
        if !finite {
            return false;
        }
        match self.mode {
            Mode::Land => {
                self.position.z == 0.0 && self.attitude.x == 0.0 && self.attitude.y == 0.0
            }
            Mode::Air => {
                self.attitude.x.abs() < std::f64::consts::FRAC_PI_2
                    && self.attitude.y.abs() < std::f64::consts::FRAC_PI_2
            }
        }
    }
}

/// Physical parameters of the vehicle.
///
/// `f1_max` is the per-axis maximum thrust available in flight; `f2_max` the
/// per-axis maximum driving force on the ground (x, y). The wheel geometry
/// follows the four-wheel differential-drive layout: `half_track` is the
/// lateral distance from the centerline to each wheel pair, `offset_front`
/// and `offset_rear` the longitudinal distances to the front (wheels 1, 2)
/// and rear (wheels 3, 4) axles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleParams {
    /// Mass (kg).
    pub mass: f64,
    /// Diagonal moments of inertia (Jx, Jy, Jz) in kg·m².
    pub inertia: Vec3,
    /// Max thrust per axis (N) in flight: x, y, z.
    pub f1_max: Vec3,
    /// Max driving force per axis (N) on the ground: x, y.
    pub f2_max: [f64; 2],
    /// Half track width w (m).
    pub half_track: f64,
    /// Longitudinal offset b of the front axle (m).
    pub offset_front: f64,
    /// Longitudinal offset a of the rear axle (m).
    pub offset_rear: f64,
    /// Motor torque coefficient in flight (N·m / rpm²).
    pub k_torque_air: f64,
    /// Motor torque coefficient on the ground (N·m / rpm²).
    pub k_torque_land: f64,
    /// Gravity (m/s²).
    pub gravity: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            mass: 1.5,
            inertia: Vec3::new(0.03, 0.03, 0.05),
            f1_max: Vec3::new(7.5, 7.5, 30.0),
            f2_max: [9.0, 9.0],
            half_track: 0.2,
            offset_front: 0.15,
            offset_rear: 0.15,
            k_torque_air: 4.0e-4,
            k_torque_land: 4.0e-3,
            gravity: GRAVITY,
        }
    }
}

impl VehicleParams {
    /// Derive the lateral thrust capacity from total thrust and a tilt limit:
    /// `f1_max.{x,y} = total·sin(tilt)`, `f1_max.z = total`.
    pub fn with_tilt_limit(mut self, total_thrust: f64, max_tilt_rad: f64) -> Self {
        let lateral = total_thrust * max_tilt_rad.sin();
        self.f1_max = Vec3::new(lateral, lateral, total_thrust);
        self
    }

    /// Mass and force limits positive, geometry positive.
    pub fn is_valid(&self) -> bool {
        self.mass > 0.0
            && self.inertia.iter().all(|j| *j > 0.0)
            && self.f1_max.iter().all(|f| *f > 0.0)
            && self.f2_max.iter().all(|f| *f > 0.0)
            && self.half_track > 0.0
            && self.offset_front > 0.0
            && self.offset_rear > 0.0
            && self.k_torque_air > 0.0
            && self.k_torque_land > 0.0
            && self.gravity > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn land_state_stays_on_plane() {
        let s = VehicleState::grounded(Vec3::new(1.0, 2.0, 3.0), 0.4);
        assert_eq!(s.position.z, 0.0);
        assert!(s.is_valid());
    }

    #[test]
    fn air_state_rejects_extreme_tilt() {
        let mut s = VehicleState::hovering(Vec3::new(0.0, 0.0, 1.0), 0.0);
        assert!(s.is_valid());
        s.attitude.x = 2.0;
        assert!(!s.is_valid());
    }

    #[test]
    fn default_params_valid() {
        assert!(VehicleParams::default().is_valid());
    }

    #[test]
    fn tilt_limit_decomposition() {
        let p = VehicleParams::default().with_tilt_limit(30.0, 30f64.to_radians());
        assert!((p.f1_max.x - 15.0).abs() < 1e-12);
        assert!((p.f1_max.z - 30.0).abs() < 1e-12);
    }
}
