//! Continuous-time dynamics of both locomotion modes, fixed-step RK4
//! integration, and the motor power model used for energy accounting.
//!
//! Flight translational dynamics: `m·r̈ = F1·R3(Θ) − d_air − m·g`, where `R3`
//! is the body-z thrust axis in the world frame and `d_air` the lumped
//! aerodynamic disturbance force (note the sign: a positive `d_air.x` pushes
//! the vehicle toward −x). Rotational dynamics: `J·Θ̈ = τ − c(Θ̇) − n` with the
//! gyroscopic coupling term `c`.
//!
//! Ground dynamics use the pairwise-equal wheel assumption (both wheels on a
//! side share one force), giving `M·r̈ = C(ψ)·F − H(ψ)·d_land` and
//! `Jz·ψ̈ = (−F_left + F_right)·w − M_r`. The resistive forces in `d_land`
//! carry the sign of the wheel velocity they act on, so the minus sign in the
//! equations makes them oppose motion.

use crate::types::{Mode, Vec3, VehicleParams, VehicleState};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("state became non-finite during integration at t={0}")]
    NonFiniteState(f64),
    #[error("input mode {input} does not match state mode {state}")]
    ModeMismatch { input: Mode, state: Mode },
}

/// Flight-mode input: total thrust along the body z axis plus body torques.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightInput {
    /// Total thrust (N), non-negative.
    pub thrust: f64,
    /// Rotational torques (N·m).
    pub torque: Vec3,
}

/// Land-mode input: left-side and right-side per-wheel driving forces (N).
/// Each side's two wheels share the same force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandInput {
    pub left: f64,
    pub right: f64,
}

/// Per-wheel resistive forces (N) in the body frame. Wheel order: 1
/// front-left, 2 front-right, 3 rear-right, 4 rear-left. Components carry the
/// sign of the wheel velocity they oppose (see module docs).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroundResistance {
    pub longitudinal: [f64; 4],
    pub lateral: [f64; 4],
}

impl GroundResistance {
    /// Aggregate longitudinal resistance R_x.
    pub fn total_longitudinal(&self) -> f64 {
        self.longitudinal.iter().sum()
    }

    /// Aggregate lateral resistance R_y.
    pub fn total_lateral(&self) -> f64 {
        self.lateral.iter().sum()
    }

    /// Body-frame disturbance vector `[R_x, R_y, 0]`.
    pub fn as_disturbance(&self) -> Vec3 {
        Vec3::new(self.total_longitudinal(), self.total_lateral(), 0.0)
    }
}

/// Unknown external torque acting on the rotational dynamics (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExternalTorque(pub Vec3);

/// Body-z thrust direction in the world frame for Euler angles (φ, θ, ψ).
pub fn thrust_axis(attitude: Vec3) -> Vec3 {
    let (phi, theta, psi) = (attitude.x, attitude.y, attitude.z);
    Vec3::new(
        phi.cos() * theta.sin() * psi.cos() + phi.sin() * psi.sin(),
        phi.cos() * theta.sin() * psi.sin() - phi.sin() * psi.cos(),
        theta.cos() * phi.cos(),
    )
}

/// Translational acceleration in flight.
pub fn flight_accel(state: &VehicleState, input: &FlightInput, d_air: Vec3, p: &VehicleParams) -> Vec3 {
    let thrust_world = input.thrust * thrust_axis(state.attitude);
    (thrust_world - d_air) / p.mass - Vec3::new(0.0, 0.0, p.gravity)
}

/// Gyroscopic coupling term c(Θ̇) of the rotational dynamics.
fn gyro_coupling(rates: Vec3, p: &VehicleParams) -> Vec3 {
    let (jx, jy, jz) = (p.inertia.x, p.inertia.y, p.inertia.z);
    let (phi_dot, theta_dot, psi_dot) = (rates.x, rates.y, rates.z);
    Vec3::new(
        (jy - jz) * psi_dot * theta_dot,
        (jz - jx) * phi_dot * psi_dot,
        (jx - jy) * phi_dot * theta_dot,
    )
}

/// Euler-angle acceleration in flight: `Θ̈ = J⁻¹(τ − c(Θ̇) − n)`.
pub fn flight_angular_accel(
    state: &VehicleState,
    input: &FlightInput,
    external: &ExternalTorque,
    p: &VehicleParams,
) -> Vec3 {
    let rhs = input.torque - gyro_coupling(state.angular_velocity, p) - external.0;
    Vec3::new(rhs.x / p.inertia.x, rhs.y / p.inertia.y, rhs.z / p.inertia.z)
}

/// Input matrix C(ψ) applied to the side forces; both columns point along the
/// heading, each wheel pair contributing twice its per-wheel force.
fn land_force_world(yaw: f64, input: &LandInput) -> Vec3 {
    let total = 2.0 * (input.left + input.right);
    Vec3::new(total * yaw.cos(), total * yaw.sin(), 0.0)
}

/// Rotation H(ψ) mapping the body-frame disturbance to the world frame.
fn rotate_body_to_world(yaw: f64, v: Vec3) -> Vec3 {
    Vec3::new(
        yaw.cos() * v.x - yaw.sin() * v.y,
        yaw.sin() * v.x + yaw.cos() * v.y,
        v.z,
    )
}

/// Translational acceleration on the ground; third component is always zero.
pub fn land_accel(state: &VehicleState, input: &LandInput, d_land: Vec3, p: &VehicleParams) -> Vec3 {
    let yaw = state.yaw();
    let net = land_force_world(yaw, input) - rotate_body_to_world(yaw, d_land);
    // M = diag(m, m, 1); the third row is the trivial 0 = 0 equation.
    Vec3::new(net.x / p.mass, net.y / p.mass, 0.0)
}

/// Resistive yaw moment from asymmetric wheel friction:
/// `M_r = [(R_x2 + R_x3) − (R_x1 + R_x4)]·w/2 + (R_y1 + R_y2)·b − (R_y3 + R_y4)·a`.
pub fn resistive_moment(res: &GroundResistance, p: &VehicleParams) -> f64 {
    let rx = &res.longitudinal;
    let ry = &res.lateral;
    ((rx[1] + rx[2]) - (rx[0] + rx[3])) * p.half_track / 2.0
        + (ry[0] + ry[1]) * p.offset_front
        - (ry[2] + ry[3]) * p.offset_rear
}

/// Yaw acceleration on the ground: `ψ̈ = ((−F_left + F_right)·w − M_r) / Jz`.
pub fn land_yaw_accel(input: &LandInput, resistive: f64, p: &VehicleParams) -> f64 {
    ((-input.left + input.right) * p.half_track - resistive) / p.inertia.z
}

/// Mode-matching control input for one integration step.
#[derive(Debug, Clone, Copy)]
pub enum ControlInput {
    Flight(FlightInput),
    Land(LandInput),
}

impl ControlInput {
    pub fn mode(&self) -> Mode {
        match self {
            ControlInput::Flight(_) => Mode::Air,
            ControlInput::Land(_) => Mode::Land,
        }
    }
}

/// Disturbances held constant over one integration step.
#[derive(Debug, Clone, Copy, Default)]
pub struct Disturbances {
    /// Aerodynamic disturbance force (N), the `d_air` of the flight dynamics.
    pub d_air: Vec3,
    /// Ground resistance per wheel.
    pub resistance: GroundResistance,
    /// External torque on the flight rotational dynamics.
    pub torque: ExternalTorque,
}

#[derive(Clone, Copy)]
struct Deriv {
    vel: Vec3,
    acc: Vec3,
    att_rate: Vec3,
    ang_acc: Vec3,
}

fn derivative(
    state: &VehicleState,
    input: &ControlInput,
    dist: &Disturbances,
    p: &VehicleParams,
) -> Deriv {
    match input {
        ControlInput::Flight(f) => Deriv {
            vel: state.velocity,
            acc: flight_accel(state, f, dist.d_air, p),
            att_rate: state.angular_velocity,
            ang_acc: flight_angular_accel(state, f, &dist.torque, p),
        },
        ControlInput::Land(l) => {
            let d_land = dist.resistance.as_disturbance();
            let m_r = resistive_moment(&dist.resistance, p);
            Deriv {
                vel: Vec3::new(state.velocity.x, state.velocity.y, 0.0),
                acc: land_accel(state, l, d_land, p),
                att_rate: Vec3::new(0.0, 0.0, state.angular_velocity.z),
                ang_acc: Vec3::new(0.0, 0.0, land_yaw_accel(l, m_r, p)),
            }
        }
    }
}

fn advance(state: &VehicleState, d: &Deriv, dt: f64) -> VehicleState {
    VehicleState {
        position: state.position + d.vel * dt,
        velocity: state.velocity + d.acc * dt,
        attitude: state.attitude + d.att_rate * dt,
        angular_velocity: state.angular_velocity + d.ang_acc * dt,
        mode: state.mode,
        time: state.time + dt,
    }
}

/// Classical 4th-order Runge–Kutta advance of the active mode's dynamics.
///
/// Land mode keeps the state on the ground plane (z, roll, pitch pinned to
/// zero). Air mode clamps at the ground plane rather than passing through it.
pub fn step(
    state: &VehicleState,
    input: &ControlInput,
    dist: &Disturbances,
    dt: f64,
    p: &VehicleParams,
) -> Result<VehicleState, DynamicsError> {
    assert!(dt > 0.0, "dt must be positive");
    if input.mode() != state.mode {
        return Err(DynamicsError::ModeMismatch {
            input: input.mode(),
            state: state.mode,
        });
    }

    let k1 = derivative(state, input, dist, p);
    let s2 = advance(state, &k1, dt / 2.0);
    let k2 = derivative(&s2, input, dist, p);
    let s3 = advance(state, &k2, dt / 2.0);
    let k3 = derivative(&s3, input, dist, p);
    let s4 = advance(state, &k3, dt);
    let k4 = derivative(&s4, input, dist, p);

    let blend = |a: Vec3, b: Vec3, c: Vec3, d: Vec3| (a + 2.0 * b + 2.0 * c + d) / 6.0;
    let mut next = VehicleState {
        position: state.position + blend(k1.vel, k2.vel, k3.vel, k4.vel) * dt,
        velocity: state.velocity + blend(k1.acc, k2.acc, k3.acc, k4.acc) * dt,
        attitude: state.attitude + blend(k1.att_rate, k2.att_rate, k3.att_rate, k4.att_rate) * dt,
        angular_velocity: state.angular_velocity
            + blend(k1.ang_acc, k2.ang_acc, k3.ang_acc, k4.ang_acc) * dt,
        mode: state.mode,
        time: state.time + dt,
    };

    match state.mode {
        Mode::Land => {
            next.position.z = 0.0;
            next.velocity.z = 0.0;
            next.attitude.x = 0.0;
            next.attitude.y = 0.0;
            next.angular_velocity.x = 0.0;
            next.angular_velocity.y = 0.0;
        }
        Mode::Air => {
            // Ground contact: do not integrate through the floor.
            if next.position.z < 0.0 {
                next.position.z = 0.0;
                if next.velocity.z < 0.0 {
                    next.velocity.z = 0.0;
                }
            }
        }
    }

    let finite = next.position.iter().all(|v| v.is_finite())
        && next.velocity.iter().all(|v| v.is_finite())
        && next.attitude.iter().all(|v| v.is_finite())
        && next.angular_velocity.iter().all(|v| v.is_finite());
    if !finite {
        return Err(DynamicsError::NonFiniteState(state.time));
    }
    Ok(next)
}

/// Mechanical power of one motor: `P = τ·ω` with `τ = k·rpm²` and
/// `ω = (2π/60)·rpm`.
pub fn motor_power(rpm: f64, k_torque: f64) -> f64 {
    debug_assert!(rpm >= 0.0);
    let torque = k_torque * rpm * rpm;
    let omega = std::f64::consts::TAU / 60.0 * rpm;
    torque * omega
}

/// Motor speed that produces `torque` under the quadratic torque model.
pub fn rpm_for_torque(torque: f64, k_torque: f64) -> f64 {
    (torque.max(0.0) / k_torque).sqrt()
}
