//! Unified disturbance estimator for both locomotion modes.
//!
//! Either mode's translational dynamics abstract to the second-order system
//! `r̈ = u + d`, where `u` is the nominal input derived from the mode's model
//! and `d` the lumped disturbance. A first-order low-pass filter
//! `G(s) = 1/(T·s + 1)` reconstructs `d` from the discrepancy between the
//! measured acceleration (velocity differencing) and the nominal input:
//! `T·d̂̇ + d̂ = Δv/Δt − u₀`.
//!
//! Note the flight-mode convention: the nominal input `u₁ = F1·R3(Θ)/m` does
//! not include gravity, so the flight-mode disturbance `d₁ = −g − d_air/m`
//! converges to `(0, 0, −9.81)` in still air. Consumers that want the wind
//! alone must add the gravity vector back (see [`crate::switch`]).

use crate::dynamics::{self, LandInput};
use crate::types::{gravity_vec, Mode, Vec3, VehicleParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObserverError {
    #[error("non-finite velocity sample fed to the estimator; state was reset")]
    NonFiniteVelocity,
}

/// Filtered lumped disturbance estimate (m/s²) for one mode at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceEstimate {
    pub d_hat: Vec3,
    pub mode: Mode,
    pub timestamp: f64,
}

impl DisturbanceEstimate {
    /// Magnitude that the mode-switch thresholds compare against: the raw
    /// norm on the ground, the gravity-compensated norm in the air.
    pub fn threshold_magnitude(&self) -> f64 {
        match self.mode {
            Mode::Land => self.d_hat.norm(),
            Mode::Air => gravity_compensated_air_magnitude(self.d_hat),
        }
    }
}

/// Wind magnitude of a flight-mode estimate: `‖d̂₁ + g‖`. Removes the
/// gravity component inherent to the flight-mode disturbance definition so
/// thresholds compare against the wind, not against 9.81.
pub fn gravity_compensated_air_magnitude(d1_hat: Vec3) -> f64 {
    (d1_hat + gravity_vec()).norm()
}

/// Nominal flight input `u₁ = F1·R3(Θ)/m` (no gravity, no compensation).
pub fn nominal_input_air(thrust: f64, attitude: Vec3, p: &VehicleParams) -> Vec3 {
    thrust * dynamics::thrust_axis(attitude) / p.mass
}

/// Nominal ground input `u₂ = M⁻¹·C(ψ)·F`.
pub fn nominal_input_land(input: &LandInput, yaw: f64, p: &VehicleParams) -> Vec3 {
    let total = 2.0 * (input.left + input.right);
    Vec3::new(total * yaw.cos() / p.mass, total * yaw.sin() / p.mass, 0.0)
}

/// First-order disturbance estimator with exact zero-order-hold updates:
/// `d̂⁺ = d̂·e^(−dt/T) + (1 − e^(−dt/T))·(Δv/dt − u₀)`, unconditionally stable
/// for any step size.
#[derive(Debug, Clone)]
pub struct UdeEstimator {
    time_constant: f64,
    mode: Mode,
    d_hat: Vec3,
    v_prev: Option<Vec3>,
    /// Time since construction or the last reset (s); estimates are transient
    /// until this comfortably exceeds the time constant.
    age: f64,
    timestamp: f64,
}

impl UdeEstimator {
    pub fn new(time_constant: f64, mode: Mode) -> Self {
        assert!(time_constant > 0.0, "filter time constant must be positive");
        Self {
            time_constant,
            mode,
            d_hat: Vec3::zeros(),
            v_prev: None,
            age: 0.0,
            timestamp: 0.0,
        }
    }

    pub fn time_constant(&self) -> f64 {
        self.time_constant
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Time since the last reset (s).
    pub fn age(&self) -> f64 {
        self.age
    }

    /// Clear the filter state. Called on mode switches: the two modes'
    /// disturbances live in different force spaces.
    pub fn reset(&mut self, mode: Mode, timestamp: f64) {
        self.mode = mode;
        self.d_hat = Vec3::zeros();
        self.v_prev = None;
        self.age = 0.0;
        self.timestamp = timestamp;
    }

    pub fn estimate(&self) -> DisturbanceEstimate {
        DisturbanceEstimate {
            d_hat: self.d_hat,
            mode: self.mode,
            timestamp: self.timestamp,
        }
    }

    /// Advance the filter with the measured velocity and the nominal input
    /// (excluding disturbance compensation) applied over the last `dt`.
    pub fn update(
        &mut self,
        v_now: Vec3,
        u0_sample: Vec3,
        dt: f64,
    ) -> Result<DisturbanceEstimate, ObserverError> {
        assert!(dt > 0.0, "dt must be positive");
        if !v_now.iter().all(|v| v.is_finite()) {
            self.reset(self.mode, self.timestamp);
            return Err(ObserverError::NonFiniteVelocity);
        }
        self.timestamp += dt;
        self.age += dt;
        let Some(v_prev) = self.v_prev else {
            self.v_prev = Some(v_now);
            return Ok(self.estimate());
        };
        let accel = (v_now - v_prev) / dt;
        let mut raw = accel - u0_sample;
        if self.mode == Mode::Land {
            raw.z = 0.0;
        }
        let alpha = (-dt / self.time_constant).exp();
        self.d_hat = self.d_hat * alpha + raw * (1.0 - alpha);
        if self.mode == Mode::Land {
            self.d_hat.z = 0.0;
        }
        self.v_prev = Some(v_now);
        Ok(self.estimate())
    }
}
