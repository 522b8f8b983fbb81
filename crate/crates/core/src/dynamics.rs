//! Point-mass double-integrator model of the center of mass.
//!
//! The state is ordered per axis as `[p_x, v_x, p_y, v_y, p_z, v_z]`, the
//! input is the CoM acceleration. Y is vertical and points against gravity;
//! X and Z are horizontal.
//!
//! The continuous system is nilpotent, so its zero-order-hold discretization
//! has an exact closed form: `A` is the identity with `dt` on each
//! position-velocity coupling and `B` holds `dt²/2` on position rows and
//! `dt` on velocity rows.

use nalgebra::{Matrix6, Matrix6x3, Vector3, Vector6};

use crate::error::{invalid, Result};

/// Default gravitational acceleration, m/s².
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Index of the vertical (anti-gravity) axis.
pub const VERTICAL_AXIS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoMState {
    /// meters
    pub position: Vector3<f64>,
    /// meters / second
    pub velocity: Vector3<f64>,
}

impl CoMState {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        Self { position, velocity }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|v| v.is_finite())
    }

    /// State vector in model order `[p_x, v_x, p_y, v_y, p_z, v_z]`.
    pub fn to_vector6(&self) -> Vector6<f64> {
        let (p, v) = (&self.position, &self.velocity);
        Vector6::new(p.x, v.x, p.y, v.y, p.z, v.z)
    }

    pub fn from_vector6(x: &Vector6<f64>) -> Self {
        Self::new(Vector3::new(x[0], x[2], x[4]), Vector3::new(x[1], x[3], x[5]))
    }
}

/// CoM acceleration, m/s².
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accel3(pub Vector3<f64>);

impl Accel3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0 * k)
    }
}

impl From<Vector3<f64>> for Accel3 {
    fn from(v: Vector3<f64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    dt: f64,
    half_dt2: f64,
    a: Matrix6<f64>,
    b: Matrix6x3<f64>,
}

/// Exact zero-order-hold discretization at sample period `dt` seconds.
pub fn discretize(dt: f64) -> Result<DiscreteModel> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("sample period must be positive and finite, got {dt}")));
    }
    let half_dt2 = dt * dt / 2.0;
    let mut a = Matrix6::identity();
    let mut b = Matrix6x3::zeros();
    for axis in 0..3 {
        let (p, v) = (2 * axis, 2 * axis + 1);
        a[(p, v)] = dt;
        b[(p, axis)] = half_dt2;
        b[(v, axis)] = dt;
    }
    Ok(DiscreteModel { dt, half_dt2, a, b })
}

impl DiscreteModel {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// State-transition matrix.
    pub fn a(&self) -> &Matrix6<f64> {
        &self.a
    }

    /// Input matrix.
    pub fn b(&self) -> &Matrix6x3<f64> {
        &self.b
    }

    /// One step `x' = A x + B u`, evaluated per axis.
    #[inline]
    pub fn step(&self, x: &CoMState, u: &Accel3) -> CoMState {
        CoMState {
            position: x.position + x.velocity * self.dt + u.0 * self.half_dt2,
            velocity: x.velocity + u.0 * self.dt,
        }
    }

    /// States `x[1..=n_samples]` starting at `x1` and driven by
    /// `inputs[k]` between samples `k` and `k + 1` (so `n_samples − 1`
    /// inputs are consumed).
    pub fn propagate(&self, x1: &CoMState, inputs: &[Accel3], n_samples: usize) -> Result<Vec<CoMState>> {
        if n_samples == 0 {
            return Err(invalid("a horizon needs at least one sample"));
        }
        if inputs.len() != n_samples - 1 {
            return Err(invalid(format!(
                "{} inputs supplied for {n_samples} samples (expected {})",
                inputs.len(),
                n_samples - 1
            )));
        }
        let mut states = Vec::with_capacity(n_samples);
        states.push(*x1);
        let mut x = *x1;
        for u in inputs {
            x = self.step(&x, u);
            states.push(x);
        }
        Ok(states)
    }
}

/// Net CoM acceleration from the summed ground reaction force:
/// `u = (R − m·g·ŷ) / m`.
pub fn grf_to_acceleration(grf: &Vector3<f64>, mass: f64, gravity: f64) -> Result<Accel3> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(invalid(format!("mass must be positive, got {mass}")));
    }
    let mut u = grf / mass;
    u[VERTICAL_AXIS] = (grf[VERTICAL_AXIS] - mass * gravity) / mass;
    Ok(Accel3(u))
}
