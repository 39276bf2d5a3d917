//! Euler-angle rigid-body attitude model and rotor torque mixing.
//!
//! The attitude is η = (φ, θ, ψ) with body inertia diag(Ix, Iy, Iz). In
//! these coordinates the dynamics take the Lagrangian form
//!
//! ```text
//! J(η) η̈ + C(η, η̇) η̇ + d = τ
//! ```
//!
//! where J = Wᵀ diag(Ix, Iy, Iz) W and W(η) maps Euler rates to body
//! rates. det W = cos θ, so the model degenerates as |θ| → π/2; every
//! operation here refuses states inside a guard band of that singularity
//! instead of returning garbage. C is built from the Christoffel symbols
//! of J, which makes J̇ - 2C skew-symmetric, the property the energy and
//! stability arguments lean on.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::Error;
use crate::{Mat3, Vec3, Vec4};

/// Half-width of the guard band around |θ| = π/2 rejected by all ops.
pub const GIMBAL_MARGIN: f64 = 1e-6;

/// Condition-number cap on J(η) before inversion is refused.
pub const MAX_CONDITION: f64 = 1e8;

/// Relative margin below `omega_max` that saturated speeds clamp to, so
/// clamped outputs still satisfy the strict `|ω| < omega_max` invariant.
const OMEGA_CLAMP_MARGIN: f64 = 1e-12;

/// Attitude torque (τφ, τθ, τψ) in N·m.
pub type Torque = Vec3;

/// Physical constants of the vehicle. All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "PlantParamsRaw")]
pub struct PlantParams {
    /// Rotor arm length ℓ in m.
    pub arm_length: f64,
    /// Thrust coefficient k in N·s²; rotor thrust is k ω².
    pub thrust_coeff: f64,
    /// Drag (yaw) coefficient b in N·m·s².
    pub drag_coeff: f64,
    /// Diagonal body inertia (Ix, Iy, Iz) in kg·m².
    pub inertia: Vec3,
    /// Hardware rotor speed limit in rad/s.
    pub omega_max: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantParamsRaw {
    arm_length: f64,
    thrust_coeff: f64,
    drag_coeff: f64,
    inertia: Vec3,
    omega_max: f64,
}

impl TryFrom<PlantParamsRaw> for PlantParams {
    type Error = Error;

    fn try_from(raw: PlantParamsRaw) -> Result<Self, Error> {
        PlantParams::new(
            raw.arm_length,
            raw.thrust_coeff,
            raw.drag_coeff,
            raw.inertia,
            raw.omega_max,
        )
    }
}

impl PlantParams {
    pub fn new(
        arm_length: f64,
        thrust_coeff: f64,
        drag_coeff: f64,
        inertia: Vec3,
        omega_max: f64,
    ) -> Result<Self, Error> {
        let positive = |v: f64, name: &str| -> Result<(), Error> {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
            Ok(())
        };
        positive(arm_length, "arm_length")?;
        positive(thrust_coeff, "thrust_coeff")?;
        positive(drag_coeff, "drag_coeff")?;
        positive(omega_max, "omega_max")?;
        for (i, v) in inertia.iter().enumerate() {
            positive(*v, &format!("inertia[{i}]"))?;
        }
        Ok(PlantParams {
            arm_length,
            thrust_coeff,
            drag_coeff,
            inertia,
            omega_max,
        })
    }

    fn inertia_diag(&self) -> Mat3 {
        Mat3::from_diagonal(&self.inertia)
    }
}

/// Attitude state: angles η and rates η̇.
///
/// Valid states live in the open box |φ| < π/2, |θ| < π/2 with finite
/// rates; [`EulerState::new`] rejects everything else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "EulerStateRaw")]
pub struct EulerState {
    pub eta: Vec3,
    pub eta_dot: Vec3,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EulerStateRaw {
    eta: Vec3,
    eta_dot: Vec3,
}

impl TryFrom<EulerStateRaw> for EulerState {
    type Error = Error;

    fn try_from(raw: EulerStateRaw) -> Result<Self, Error> {
        EulerState::new(raw.eta, raw.eta_dot)
    }
}

impl EulerState {
    pub fn new(eta: Vec3, eta_dot: Vec3) -> Result<Self, Error> {
        if !(eta.iter().all(|v| v.is_finite()) && eta_dot.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite("EulerState"));
        }
        if eta.x.abs() >= FRAC_PI_2 || eta.y.abs() >= FRAC_PI_2 {
            return Err(Error::InvalidParameter(format!(
                "attitude ({}, {}) outside the open box |phi|, |theta| < pi/2",
                eta.x, eta.y
            )));
        }
        Ok(EulerState { eta, eta_dot })
    }
}

/// Rotor angular speeds (ω1..ω4) in rad/s. Consumers require
/// |ωi| < `omega_max` of the plant they are used with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorSpeeds {
    pub omega: Vec4,
}

/// Result of inverting a torque demand into rotor speeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorCommand {
    pub speeds: RotorSpeeds,
    /// True when any speed had to be clamped at the hardware limit; the
    /// returned speeds then realize a different torque than requested.
    pub saturated: bool,
}

fn gimbal_guard(eta: &Vec3) -> Result<(), Error> {
    if !eta.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("eta"));
    }
    if eta.y.abs() >= FRAC_PI_2 - GIMBAL_MARGIN {
        return Err(Error::GimbalSingularity { theta: eta.y });
    }
    Ok(())
}

/// Euler-rate transform W(η): body rates ω = W η̇.
///
/// ```text
///     | 1    0      -sin θ       |
/// W = | 0  cos φ   cos θ sin φ   |
///     | 0  -sin φ  cos θ cos φ   |
/// ```
///
/// det W = cos θ. Errors inside the gimbal guard band.
pub fn euler_rate_transform(eta: &Vec3) -> Result<Mat3, Error> {
    gimbal_guard(eta)?;
    let (sp, cp) = eta.x.sin_cos();
    let (st, ct) = eta.y.sin_cos();
    Ok(Mat3::new(
        1.0, 0.0, -st, //
        0.0, cp, ct * sp, //
        0.0, -sp, ct * cp,
    ))
}

/// Partial derivatives (∂W/∂φ, ∂W/∂θ); ∂W/∂ψ = 0.
fn w_partials(eta: &Vec3) -> (Mat3, Mat3) {
    let (sp, cp) = eta.x.sin_cos();
    let (st, ct) = eta.y.sin_cos();
    let d_phi = Mat3::new(
        0.0, 0.0, 0.0, //
        0.0, -sp, ct * cp, //
        0.0, -cp, -ct * sp,
    );
    let d_theta = Mat3::new(
        0.0, 0.0, -ct, //
        0.0, 0.0, -st * sp, //
        0.0, 0.0, -st * cp,
    );
    (d_phi, d_theta)
}

impl PlantParams {
    /// Configuration-space inertia J(η) = Wᵀ diag(Ix, Iy, Iz) W.
    /// Symmetric positive definite away from the gimbal singularity.
    pub fn inertia_matrix(&self, eta: &Vec3) -> Result<Mat3, Error> {
        let w = euler_rate_transform(eta)?;
        let m = self.inertia_diag();
        Ok(w.transpose() * m * w)
    }

    /// (∂J/∂φ, ∂J/∂θ, ∂J/∂ψ); the last is identically zero.
    pub fn inertia_matrix_partials(&self, eta: &Vec3) -> Result<[Mat3; 3], Error> {
        let w = euler_rate_transform(eta)?;
        let (dw_phi, dw_theta) = w_partials(eta);
        let m = self.inertia_diag();
        let dj = |dw: &Mat3| dw.transpose() * m * w + w.transpose() * m * dw;
        Ok([dj(&dw_phi), dj(&dw_theta), Mat3::zeros()])
    }

    /// Coriolis matrix C(η, η̇) from the Christoffel symbols of J:
    ///
    /// ```text
    /// C_kj = Σ_i ½ (∂J_kj/∂η_i + ∂J_ki/∂η_j - ∂J_ij/∂η_k) η̇_i
    /// ```
    ///
    /// With this construction J̇ - 2C is skew-symmetric and C is linear
    /// in η̇, so C(η, 0) = 0.
    pub fn coriolis_matrix(&self, state: &EulerState) -> Result<Mat3, Error> {
        if !state.eta_dot.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("eta_dot"));
        }
        let dj = self.inertia_matrix_partials(&state.eta)?;
        let qd = state.eta_dot;
        let mut c = Mat3::zeros();
        for k in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for i in 0..3 {
                    acc += 0.5 * (dj[i][(k, j)] + dj[j][(k, i)] - dj[k][(i, j)]) * qd[i];
                }
                c[(k, j)] = acc;
            }
        }
        Ok(c)
    }

    /// Coriolis/centrifugal torque N(η, η̇) = C(η, η̇) η̇.
    pub fn coriolis_vector(&self, state: &EulerState) -> Result<Vec3, Error> {
        Ok(self.coriolis_matrix(state)? * state.eta_dot)
    }

    /// J(η)⁻¹ by the closed-form 3×3 inverse, refused when the spectral
    /// condition number of J exceeds [`MAX_CONDITION`].
    pub fn inertia_inverse(&self, eta: &Vec3) -> Result<Mat3, Error> {
        let j = self.inertia_matrix(eta)?;
        let eigs = sym_eigenvalues(&j);
        let (lo, hi) = (eigs[2], eigs[0]);
        if !(lo > 0.0) || hi / lo > MAX_CONDITION {
            return Err(Error::IllConditioned {
                cond: if lo > 0.0 { hi / lo } else { f64::INFINITY },
            });
        }
        j.try_inverse()
            .ok_or(Error::IllConditioned { cond: f64::INFINITY })
    }

    /// Forward dynamics: η̈ = J⁻¹ (τ - C η̇ - d).
    pub fn attitude_accel(&self, state: &EulerState, tau: &Torque, d: &Vec3) -> Result<Vec3, Error> {
        if !tau.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tau"));
        }
        if !d.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("d"));
        }
        let j_inv = self.inertia_inverse(&state.eta)?;
        let n = self.coriolis_vector(state)?;
        Ok(j_inv * (tau - n - d))
    }

    /// Torque produced by the four rotors:
    ///
    /// ```text
    /// τφ = ℓ k (ω2² - ω4²)
    /// τθ = ℓ k (-ω1² + ω3²)
    /// τψ = b (-ω1² + ω2² - ω3² + ω4²)
    /// ```
    pub fn torque_from_rotors(&self, rotors: &RotorSpeeds) -> Result<Torque, Error> {
        for (i, w) in rotors.omega.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite("rotor speed"));
            }
            if w.abs() >= self.omega_max {
                return Err(Error::RotorOverspeed {
                    rotor: i + 1,
                    omega: *w,
                    omega_max: self.omega_max,
                });
            }
        }
        let s = rotors.omega.map(|w| w * w);
        let lk = self.arm_length * self.thrust_coeff;
        Ok(Vec3::new(
            lk * (s[1] - s[3]),
            lk * (-s[0] + s[2]),
            self.drag_coeff * (-s[0] + s[1] - s[2] + s[3]),
        ))
    }

    /// Invert a torque demand (plus a total thrust T = k Σ ωi²) into
    /// rotor speeds. Speeds above the hardware limit are clamped just
    /// below `omega_max` and flagged; a demand that needs ωi² < 0 is
    /// infeasible at this thrust and is an error.
    pub fn rotors_from_torque(&self, tau: &Torque, thrust: f64) -> Result<RotorCommand, Error> {
        if !tau.iter().all(|v| v.is_finite()) || !thrust.is_finite() {
            return Err(Error::NonFinite("rotor mix input"));
        }
        if thrust < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "thrust must be >= 0, got {thrust}"
            )));
        }
        let lk = self.arm_length * self.thrust_coeff;
        let a = thrust / self.thrust_coeff;
        let p = tau.x / lk;
        let q = tau.y / lk;
        let r = tau.z / self.drag_coeff;
        // Split total squared speed between the two rotor pairs, then
        // within each pair by the roll/pitch demand.
        let odd = (a - r) / 2.0; // s1 + s3
        let even = (a + r) / 2.0; // s2 + s4
        let s = [
            (odd - q) / 2.0,
            (even + p) / 2.0,
            (odd + q) / 2.0,
            (even - p) / 2.0,
        ];
        for (i, si) in s.iter().enumerate() {
            if *si < 0.0 {
                return Err(Error::InfeasibleMix {
                    rotor: i + 1,
                    squared: *si,
                });
            }
        }
        let cap = self.omega_max * (1.0 - OMEGA_CLAMP_MARGIN);
        let mut saturated = false;
        let omega = Vec4::from_fn(|i, _| {
            let w = s[i].sqrt();
            if w > cap {
                saturated = true;
                cap
            } else {
                w
            }
        });
        Ok(RotorCommand {
            speeds: RotorSpeeds { omega },
            saturated,
        })
    }
}

/// Eigenvalues of a symmetric 3×3 matrix, descending, by the closed-form
/// trigonometric solution of the characteristic cubic. Deterministic and
/// cheap enough for per-stage condition checks.
pub fn sym_eigenvalues(m: &Mat3) -> [f64; 3] {
    let p1 = m[(0, 1)] * m[(0, 1)] + m[(0, 2)] * m[(0, 2)] + m[(1, 2)] * m[(1, 2)];
    if p1 == 0.0 {
        let mut d = [m[(0, 0)], m[(1, 1)], m[(2, 2)]];
        d.sort_by(|a, b| b.partial_cmp(a).unwrap());
        return d;
    }
    let q = m.trace() / 3.0;
    let p2 = (m[(0, 0)] - q).powi(2) + (m[(1, 1)] - q).powi(2) + (m[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = (m - Mat3::from_diagonal_element(q)) / p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    [hi, 3.0 * q - hi - lo, lo]
}

/// Induced 2-norm (largest singular value) of a 3×3 matrix.
pub fn induced_two_norm(m: &Mat3) -> f64 {
    let gram = m.transpose() * m;
    sym_eigenvalues(&gram)[0].max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> PlantParams {
        PlantParams::new(
            0.225,
            2.98e-6,
            1.14e-7,
            Vec3::new(4.856e-3, 4.856e-3, 8.801e-3),
            1200.0,
        )
        .unwrap()
    }

    fn random_eta(rng: &mut ChaCha8Rng) -> Vec3 {
        Vec3::new(
            rng.random_range(-1.2..1.2),
            rng.random_range(-1.2..1.2),
            rng.random_range(-3.0..3.0),
        )
    }

    #[test]
    fn w_at_origin_is_identity() {
        let w = euler_rate_transform(&Vec3::zeros()).unwrap();
        assert_relative_eq!(w, Mat3::identity(), epsilon = 1e-15);
    }

    #[test]
    fn w_determinant_is_cos_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let eta = random_eta(&mut rng);
            let w = euler_rate_transform(&eta).unwrap();
            assert_relative_eq!(w.determinant(), eta.y.cos(), epsilon = 1e-13);
        }
    }

    #[test]
    fn w_rejects_near_gimbal_lock() {
        let inside = FRAC_PI_2 - 0.99 * GIMBAL_MARGIN;
        let err = euler_rate_transform(&Vec3::new(0.3, inside, 0.0)).unwrap_err();
        assert!(matches!(err, Error::GimbalSingularity { .. }));
        let outside = FRAC_PI_2 - 1.1 * GIMBAL_MARGIN;
        assert!(euler_rate_transform(&Vec3::new(0.3, -outside, 0.0)).is_ok());
    }

    #[test]
    fn inertia_matrix_at_origin_is_body_inertia() {
        let p = params();
        let j = p.inertia_matrix(&Vec3::zeros()).unwrap();
        assert_relative_eq!(j, Mat3::from_diagonal(&p.inertia), epsilon = 1e-18);
    }

    #[test]
    fn inertia_matrix_is_symmetric_positive_definite() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let eta = random_eta(&mut rng);
            let j = p.inertia_matrix(&eta).unwrap();
            assert_relative_eq!(j, j.transpose(), epsilon = 1e-18);
            let eigs = sym_eigenvalues(&j);
            assert!(eigs[2] > 0.0, "lambda_min = {} at eta = {eta}", eigs[2]);
        }
    }

    #[test]
    fn inertia_partials_match_finite_differences() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-6;
        for _ in 0..50 {
            let eta = random_eta(&mut rng);
            let dj = p.inertia_matrix_partials(&eta).unwrap();
            for axis in 0..3 {
                let mut lo = eta;
                let mut hi = eta;
                lo[axis] -= h;
                hi[axis] += h;
                let fd = (p.inertia_matrix(&hi).unwrap() - p.inertia_matrix(&lo).unwrap())
                    / (2.0 * h);
                assert_relative_eq!(dj[axis], fd, epsilon = 1e-9, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn jdot_minus_two_c_is_skew_symmetric() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let eta = random_eta(&mut rng);
            let eta_dot = Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let state = EulerState::new(eta, eta_dot).unwrap();
            let dj = p.inertia_matrix_partials(&eta).unwrap();
            let j_dot = dj[0] * eta_dot.x + dj[1] * eta_dot.y + dj[2] * eta_dot.z;
            let c = p.coriolis_matrix(&state).unwrap();
            let s = j_dot - 2.0 * c;
            let sym = s + s.transpose();
            assert!(
                sym.amax() < 1e-12,
                "J̇ - 2C not skew at eta = {eta}: max |S + Sᵀ| = {}",
                sym.amax()
            );
        }
    }

    #[test]
    fn coriolis_vanishes_at_zero_rates() {
        let p = params();
        let state = EulerState::new(Vec3::new(0.4, -0.3, 1.0), Vec3::zeros()).unwrap();
        let c = p.coriolis_matrix(&state).unwrap();
        assert_eq!(c, Mat3::zeros());
    }

    #[test]
    fn torque_from_rotors_worked_example() {
        let p = PlantParams::new(0.2, 3e-6, 1e-7, Vec3::new(1e-2, 1e-2, 2e-2), 1200.0).unwrap();
        let r = RotorSpeeds {
            omega: Vec4::new(400.0, 500.0, 400.0, 300.0),
        };
        let tau = p.torque_from_rotors(&r).unwrap();
        assert_relative_eq!(tau.x, 0.096, epsilon = 1e-12);
        assert_relative_eq!(tau.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(tau.z, 0.002, epsilon = 1e-12);
    }

    #[test]
    fn torque_from_rotors_rejects_overspeed() {
        let p = params();
        let r = RotorSpeeds {
            omega: Vec4::new(400.0, 1200.0, 400.0, 300.0),
        };
        assert!(matches!(
            p.torque_from_rotors(&r),
            Err(Error::RotorOverspeed { rotor: 2, .. })
        ));
    }

    #[test]
    fn rotor_mix_round_trips_through_torque() {
        let p = params();
        let thrust = p.thrust_coeff * p.omega_max.powi(2); // baseline ω ≈ 600
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let tau = Vec3::new(
                rng.random_range(-0.2..0.2),
                rng.random_range(-0.2..0.2),
                rng.random_range(-0.02..0.02),
            );
            let cmd = p.rotors_from_torque(&tau, thrust).unwrap();
            assert!(!cmd.saturated);
            let back = p.torque_from_rotors(&cmd.speeds).unwrap();
            assert_relative_eq!(back, tau, epsilon = 1e-9);
        }
    }

    #[test]
    fn rotor_mix_clamps_and_flags_saturation() {
        let p = params();
        // High thrust pushes the baseline speed near the cap; roll demand
        // pushes rotor 2 past it.
        let thrust = p.thrust_coeff * 4.0 * (0.99 * p.omega_max).powi(2);
        let tau = Vec3::new(0.3, 0.0, 0.0);
        let cmd = p.rotors_from_torque(&tau, thrust).unwrap();
        assert!(cmd.saturated);
        assert!(cmd.speeds.omega.iter().all(|w| w.abs() < p.omega_max));
        // Saturation honesty: the realized torque differs from the demand.
        let back = p.torque_from_rotors(&cmd.speeds).unwrap();
        assert!((back - tau).norm() > 1e-3);
    }

    #[test]
    fn rotor_mix_detects_infeasible_demand() {
        let p = params();
        let thrust = p.thrust_coeff * 1e4; // tiny thrust, no headroom
        let tau = Vec3::new(0.5, 0.0, 0.0);
        assert!(matches!(
            p.rotors_from_torque(&tau, thrust),
            Err(Error::InfeasibleMix { .. })
        ));
    }

    #[test]
    fn attitude_accel_at_origin_matches_diagonal_model() {
        let p = params();
        let state = EulerState::new(Vec3::zeros(), Vec3::zeros()).unwrap();
        let tau = Vec3::new(1e-3, -2e-3, 5e-4);
        let d = Vec3::new(1e-4, 0.0, -1e-4);
        let acc = p.attitude_accel(&state, &tau, &d).unwrap();
        let expect = Vec3::new(
            (tau.x - d.x) / p.inertia.x,
            (tau.y - d.y) / p.inertia.y,
            (tau.z - d.z) / p.inertia.z,
        );
        assert_relative_eq!(acc, expect, epsilon = 1e-12);
    }

    #[test]
    fn inertia_inverse_refused_when_ill_conditioned() {
        let p = params();
        let eta = Vec3::new(0.0, FRAC_PI_2 - 2e-6, 0.0);
        assert!(matches!(
            p.inertia_inverse(&eta),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn inertia_inverse_matches_identity_product() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let eta = random_eta(&mut rng);
            let j = p.inertia_matrix(&eta).unwrap();
            let j_inv = p.inertia_inverse(&eta).unwrap();
            assert_relative_eq!(j * j_inv, Mat3::identity(), epsilon = 1e-10);
        }
    }

    #[test]
    fn sym_eigenvalues_match_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a = Mat3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let m = a.transpose() * a + Mat3::from_diagonal_element(0.1);
            let mine = sym_eigenvalues(&m);
            let mut theirs: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            theirs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for k in 0..3 {
                assert_relative_eq!(mine[k], theirs[k], epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn euler_state_rejects_out_of_box_attitude() {
        assert!(EulerState::new(Vec3::new(1.6, 0.0, 0.0), Vec3::zeros()).is_err());
        assert!(EulerState::new(Vec3::new(0.0, -1.58, 0.0), Vec3::zeros()).is_err());
        assert!(EulerState::new(Vec3::new(0.0, f64::NAN, 0.0), Vec3::zeros()).is_err());
        assert!(EulerState::new(Vec3::new(0.3, 1.2, 10.0), Vec3::zeros()).is_ok());
    }

    #[test]
    fn plant_params_reject_nonpositive_values() {
        assert!(PlantParams::new(0.0, 3e-6, 1e-7, Vec3::new(1e-2, 1e-2, 2e-2), 1200.0).is_err());
        assert!(PlantParams::new(0.2, 3e-6, 1e-7, Vec3::new(1e-2, -1e-2, 2e-2), 1200.0).is_err());
    }
}
