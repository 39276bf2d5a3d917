//! Feedback-linearizing tracking controller with a robust switching term.
//!
//! Tracking error e = η_d - η, stacked as E = (e, ė). The commanded
//! acceleration and applied torque are
//!
//! ```text
//! u = η̈_d + K_r ė + K_η e
//! τ = Ĵ(η) u + N̂(η, η̇) + d̂ + γ
//! ```
//!
//! with hatted quantities from the (possibly mismatched) model. Pushing τ
//! through the true plant leaves η̈ = u - v + J⁻¹γ, where
//!
//! ```text
//! v = (I - Ĵ J⁻¹) u - J⁻¹ (ΔN + Δd)
//! ```
//!
//! collects every modeling error. [`v_bound`] evaluates a per-axis affine
//! envelope for |v|, [`delta_gain`] sizes the switching magnitude δ from
//! it, and [`gamma`] applies δ along s = BᵀQE with a σ boundary layer so
//! the control stays continuous.

use serde::{Deserialize, Serialize};

use crate::dynamics::{EulerState, PlantParams, Torque};
use crate::error::Error;
use crate::lyapunov::LyapunovCert;
use crate::{Mat3, Vec3, Vec6};

/// Diagonal PD gain matrices K_η and K_r, stored by their diagonals.
/// All entries strictly positive, which keeps the error dynamics Hurwitz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "GainsRaw")]
pub struct Gains {
    pub k_eta: Vec3,
    pub k_r: Vec3,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsRaw {
    k_eta: Vec3,
    k_r: Vec3,
}

impl TryFrom<GainsRaw> for Gains {
    type Error = Error;

    fn try_from(raw: GainsRaw) -> Result<Self, Error> {
        Gains::new(raw.k_eta, raw.k_r)
    }
}

impl Gains {
    pub fn new(k_eta: Vec3, k_r: Vec3) -> Result<Self, Error> {
        for (name, v) in [("k_eta", &k_eta), ("k_r", &k_r)] {
            for (i, g) in v.iter().enumerate() {
                if !g.is_finite() || *g <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "{name}[{i}] must be finite and > 0, got {g}"
                    )));
                }
            }
        }
        Ok(Gains { k_eta, k_r })
    }

    pub fn k_eta_mat(&self) -> Mat3 {
        Mat3::from_diagonal(&self.k_eta)
    }

    pub fn k_r_mat(&self) -> Mat3 {
        Mat3::from_diagonal(&self.k_r)
    }
}

/// Assumption budget the robustness argument is certified against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RobustBoundsRaw")]
pub struct RobustBounds {
    /// D: cap on ‖d̂ - d‖, the disturbance estimate error.
    pub delta_d_max: f64,
    /// D̄: cap on ‖d‖ + D, total disturbance headroom. Strictly above D.
    pub d_total_max: f64,
    /// S: cap on ‖N̂ - N‖, the Coriolis model error.
    pub delta_n_max: f64,
    /// H: cap on ‖η̈_d‖, the reference acceleration.
    pub ref_accel_max: f64,
    /// ξ: cap on ‖I - Ĵ J⁻¹‖, the inertia mismatch, in [0, 1].
    pub inertia_mismatch_max: f64,
    /// β_min ≤ ‖J⁻¹‖ ≤ β_max over the flight envelope.
    pub beta_min: f64,
    pub beta_max: f64,
    /// σ: boundary-layer half-width on ‖BᵀQE‖. Strictly positive.
    pub sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RobustBoundsRaw {
    delta_d_max: f64,
    d_total_max: f64,
    delta_n_max: f64,
    ref_accel_max: f64,
    inertia_mismatch_max: f64,
    beta_min: f64,
    beta_max: f64,
    sigma: f64,
}

impl TryFrom<RobustBoundsRaw> for RobustBounds {
    type Error = Error;

    fn try_from(raw: RobustBoundsRaw) -> Result<Self, Error> {
        RobustBounds::new(
            raw.delta_d_max,
            raw.d_total_max,
            raw.delta_n_max,
            raw.ref_accel_max,
            raw.inertia_mismatch_max,
            raw.beta_min,
            raw.beta_max,
            raw.sigma,
        )
    }
}

impl RobustBounds {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        delta_d_max: f64,
        d_total_max: f64,
        delta_n_max: f64,
        ref_accel_max: f64,
        inertia_mismatch_max: f64,
        beta_min: f64,
        beta_max: f64,
        sigma: f64,
    ) -> Result<Self, Error> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        for (name, v) in [
            ("delta_d_max", delta_d_max),
            ("d_total_max", d_total_max),
            ("delta_n_max", delta_n_max),
            ("ref_accel_max", ref_accel_max),
            ("inertia_mismatch_max", inertia_mismatch_max),
            ("beta_min", beta_min),
            ("beta_max", beta_max),
            ("sigma", sigma),
        ] {
            if !v.is_finite() {
                return fail(format!("{name} must be finite, got {v}"));
            }
        }
        if delta_d_max < 0.0 {
            return fail(format!("delta_d_max must be >= 0, got {delta_d_max}"));
        }
        if d_total_max <= delta_d_max {
            return fail(format!(
                "d_total_max must exceed delta_d_max, got {d_total_max} <= {delta_d_max}"
            ));
        }
        if delta_n_max < 0.0 {
            return fail(format!("delta_n_max must be >= 0, got {delta_n_max}"));
        }
        if ref_accel_max <= 0.0 {
            return fail(format!("ref_accel_max must be > 0, got {ref_accel_max}"));
        }
        if !(0.0..=1.0).contains(&inertia_mismatch_max) {
            return fail(format!(
                "inertia_mismatch_max must lie in [0, 1], got {inertia_mismatch_max}"
            ));
        }
        if beta_min <= 0.0 || beta_max < beta_min {
            return fail(format!(
                "need 0 < beta_min <= beta_max, got {beta_min}, {beta_max}"
            ));
        }
        if sigma <= 0.0 {
            return fail(format!("sigma must be > 0, got {sigma}"));
        }
        Ok(RobustBounds {
            delta_d_max,
            d_total_max,
            delta_n_max,
            ref_accel_max,
            inertia_mismatch_max,
            beta_min,
            beta_max,
            sigma,
        })
    }
}

/// Per-axis shape of the |v| envelope: axis i contributes
/// `rate_coeff[i]·|E_{i+3}| + err_coeff[i]·|E_i|` inside the ξ(...) term
/// of [`v_bound`]. Coefficients are nonnegative and should dominate the
/// corresponding K_r and K_η entries for the envelope to be sound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "VBoundTemplateRaw")]
pub struct VBoundTemplate {
    pub rate_coeff: Vec3,
    pub err_coeff: Vec3,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VBoundTemplateRaw {
    rate_coeff: Vec3,
    err_coeff: Vec3,
}

impl TryFrom<VBoundTemplateRaw> for VBoundTemplate {
    type Error = Error;

    fn try_from(raw: VBoundTemplateRaw) -> Result<Self, Error> {
        VBoundTemplate::new(raw.rate_coeff, raw.err_coeff)
    }
}

impl VBoundTemplate {
    pub fn new(rate_coeff: Vec3, err_coeff: Vec3) -> Result<Self, Error> {
        for (name, v) in [("rate_coeff", &rate_coeff), ("err_coeff", &err_coeff)] {
            for (i, c) in v.iter().enumerate() {
                if !c.is_finite() || *c < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "{name}[{i}] must be finite and >= 0, got {c}"
                    )));
                }
            }
        }
        Ok(VBoundTemplate {
            rate_coeff,
            err_coeff,
        })
    }
}

/// What the controller believes about the plant: a proportional inertia
/// model Ĵ = (1 + μ)J, the matching Coriolis model N̂ = (1 + μ)N, and a
/// constant disturbance estimate d̂.
///
/// Fields are private because the ops require Ĵ to stay positive
/// definite, i.e. 1 + μ > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "ModelEstimatesRaw")]
pub struct ModelEstimates {
    plant: PlantParams,
    mismatch: f64,
    d_hat: Vec3,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelEstimatesRaw {
    plant: PlantParams,
    mismatch: f64,
    d_hat: Vec3,
}

impl TryFrom<ModelEstimatesRaw> for ModelEstimates {
    type Error = Error;

    fn try_from(raw: ModelEstimatesRaw) -> Result<Self, Error> {
        ModelEstimates::new(raw.plant, raw.mismatch, raw.d_hat)
    }
}

impl ModelEstimates {
    pub fn new(plant: PlantParams, mismatch: f64, d_hat: Vec3) -> Result<Self, Error> {
        if !mismatch.is_finite() || mismatch <= -1.0 {
            return Err(Error::InvalidParameter(format!(
                "mismatch must be finite and > -1, got {mismatch}"
            )));
        }
        if d_hat.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "d_hat must be finite, got {d_hat:?}"
            )));
        }
        Ok(ModelEstimates {
            plant,
            mismatch,
            d_hat,
        })
    }

    pub fn plant(&self) -> &PlantParams {
        &self.plant
    }

    pub fn mismatch(&self) -> f64 {
        self.mismatch
    }

    pub fn d_hat(&self) -> Vec3 {
        self.d_hat
    }

    /// Ĵ(η) = (1 + μ) J(η).
    pub fn j_hat(&self, eta: &Vec3) -> Result<Mat3, Error> {
        Ok(self.plant.inertia_matrix(eta)? * (1.0 + self.mismatch))
    }

    /// N̂(η, η̇) = (1 + μ) C(η, η̇) η̇.
    pub fn n_hat(&self, state: &EulerState) -> Result<Vec3, Error> {
        Ok(self.plant.coriolis_vector(state)? * (1.0 + self.mismatch))
    }
}

/// Stack E = (e, ė) with e = η_d - η and ė = η̇_d - η̇.
pub fn error_state(state: &EulerState, eta_d: &Vec3, eta_d_dot: &Vec3) -> Vec6 {
    let e = eta_d - state.eta;
    let e_dot = eta_d_dot - state.eta_dot;
    let mut out = Vec6::zeros();
    out.fixed_rows_mut::<3>(0).copy_from(&e);
    out.fixed_rows_mut::<3>(3).copy_from(&e_dot);
    out
}

/// Commanded error-space acceleration u = η̈_d + K_r ė + K_η e.
pub fn control_u(ref_ddot: &Vec3, gains: &Gains, e_vec: &Vec6) -> Vec3 {
    let e = e_vec.fixed_rows::<3>(0).clone_owned();
    let e_dot = e_vec.fixed_rows::<3>(3).clone_owned();
    ref_ddot + gains.k_r_mat() * e_dot + gains.k_eta_mat() * e
}

/// Robust switching term along s = BᵀQE:
///
/// ```text
/// γ = (δ/‖s‖) s   if ‖s‖ ≥ σ
/// γ = (δ/σ) s     otherwise
/// ```
///
/// Continuous across ‖s‖ = σ, and ‖γ‖ ≤ δ everywhere. δ must be ≥ 0.
pub fn gamma(cert: &LyapunovCert, bounds: &RobustBounds, e_vec: &Vec6, delta: f64) -> Vec3 {
    debug_assert!(delta >= 0.0, "delta must be >= 0, got {delta}");
    let s = cert.switching_signal(e_vec);
    let s_norm = s.norm();
    if s_norm >= bounds.sigma {
        s * (delta / s_norm)
    } else {
        s * (delta / bounds.sigma)
    }
}

/// Per-axis envelope on the lumped uncertainty:
///
/// ```text
/// vb_i = ξ (H + a_i |E_{i+3}| + b_i |E_i|) + β_max (S + D)
/// ```
///
/// with (a, b) from the template. Every component is nonnegative.
pub fn v_bound(bounds: &RobustBounds, template: &VBoundTemplate, e_vec: &Vec6) -> Vec3 {
    Vec3::from_fn(|i, _| {
        bounds.inertia_mismatch_max
            * (bounds.ref_accel_max
                + template.rate_coeff[i] * e_vec[i + 3].abs()
                + template.err_coeff[i] * e_vec[i].abs())
            + bounds.beta_max * (bounds.delta_n_max + bounds.delta_d_max)
    })
}

/// Switching magnitude δ = ‖vb‖₂ / β_min.
pub fn delta_gain(bounds: &RobustBounds, vb: &Vec3) -> f64 {
    vb.norm() / bounds.beta_min
}

/// Applied torque τ = Ĵ u + N̂ + d̂ + γ. Fails near the gimbal
/// singularity, where the model quantities are not trustworthy.
pub fn control_tau(
    est: &ModelEstimates,
    state: &EulerState,
    u: &Vec3,
    gam: &Vec3,
) -> Result<Torque, Error> {
    Ok(est.j_hat(&state.eta)? * u + est.n_hat(state)? + est.d_hat + gam)
}

/// Lumped uncertainty v = (I - Ĵ J⁻¹) u - J⁻¹ (ΔN + Δd), with
/// ΔN = N̂ - N and Δd = d̂ - d taken against the true plant.
pub fn uncertainty_v(
    params: &PlantParams,
    est: &ModelEstimates,
    state: &EulerState,
    u: &Vec3,
    d: &Vec3,
) -> Result<Vec3, Error> {
    let j_inv = params.inertia_inverse(&state.eta)?;
    let j_hat = est.j_hat(&state.eta)?;
    let delta_n = est.n_hat(state)? - params.coriolis_vector(state)?;
    let delta_d = est.d_hat - d;
    Ok((Mat3::identity() - j_hat * j_inv) * u - j_inv * (delta_n + delta_d))
}
