//! Quadratic Lyapunov certificate for the closed-loop error dynamics.
//!
//! With E = (e, ė) the tracking error obeys Ė = AE + B(v - J⁻¹γ), where
//!
//! ```text
//! A = |   0     I  |      B = | 0 |
//!     | -K_η  -K_r |          | I |
//! ```
//!
//! For positive diagonal gains A is Hurwitz, so AᵀQ + QA = -P has a
//! unique symmetric positive-definite solution Q for any SPD P. Along
//! trajectories V = EᵀQE then satisfies
//!
//! ```text
//! V̇ = -EᵀPE + 2 EᵀQB (v - J⁻¹γ)
//! ```
//!
//! which is the quantity the runtime monitor and the emitted stability
//! conjectures reason about. P defaults to the identity; Q is always
//! computed, never configured.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::controller::Gains;
use crate::error::Error;
use crate::{Mat3, Mat6, Mat6x3, Vec3, Vec6};

/// Frobenius-norm cap on ‖AᵀQ + QA + P‖ for an acceptable certificate.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Which side of the σ boundary layer the robust term operated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// ‖BᵀQE‖ < σ: the smoothed, linearly scaled robust term.
    BoundaryLayer,
    /// ‖BᵀQE‖ ≥ σ: the full sliding-style robust term.
    Outside,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::BoundaryLayer => "boundary_layer",
            Branch::Outside => "outside",
        })
    }
}

impl std::str::FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "boundary_layer" => Ok(Branch::BoundaryLayer),
            "outside" => Ok(Branch::Outside),
            other => Err(format!("unknown branch {other:?}")),
        }
    }
}

/// One logged point of the error trajectory, as the monitor sees it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTrajectorySample {
    pub t: f64,
    pub e_vec: Vec6,
    pub v_lyap: f64,
    pub v_dot: f64,
    pub branch: Branch,
}

/// The assembled certificate (A, B, Q, P) for a fixed gain set.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovCert {
    a: Mat6,
    b: Mat6x3,
    q: Mat6,
    p: Mat6,
    gains: Gains,
    residual: f64,
}

/// Serializable digest of a certificate, written next to simulation logs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertSummary {
    pub q: Mat6,
    pub q_eigenvalues: Vec<f64>,
    pub p_eigenvalues: Vec<f64>,
    pub residual: f64,
}

/// A = [0 I; -K_η -K_r] in block form.
pub fn build_a(gains: &Gains) -> Mat6 {
    let mut a = Mat6::zeros();
    a.fixed_view_mut::<3, 3>(0, 3).copy_from(&Mat3::identity());
    a.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-gains.k_eta_mat()));
    a.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-gains.k_r_mat()));
    a
}

fn b_matrix() -> Mat6x3 {
    let mut b = Mat6x3::zeros();
    b.fixed_view_mut::<3, 3>(3, 0).copy_from(&Mat3::identity());
    b
}

fn check_spd(m: &Mat6, name: &str) -> Result<(), Error> {
    if (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
        return Err(Error::LyapunovSolve(format!("{name} is not symmetric")));
    }
    let min_eig = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(min_eig > 0.0) {
        return Err(Error::LyapunovSolve(format!(
            "{name} is not positive definite (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

/// Solve AᵀQ + QA = -P for symmetric positive-definite Q.
///
/// The equation is vectorized through the Kronecker identity
/// vec(AᵀQ + QA) = (I ⊗ Aᵀ + Aᵀ ⊗ I) vec(Q) and solved densely by LU;
/// at 36 unknowns that is exact enough that the Frobenius residual
/// stays far below [`RESIDUAL_TOL`]. Rejects non-Hurwitz A.
pub fn solve_lyapunov(a: &Mat6, p: &Mat6) -> Result<Mat6, Error> {
    let max_re = a
        .complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_re >= 0.0 {
        return Err(Error::NonHurwitz { max_re });
    }
    check_spd(p, "P")?;

    let at = DMatrix::from_fn(6, 6, |i, j| a[(j, i)]);
    let eye = DMatrix::<f64>::identity(6, 6);
    let m = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = DVector::from_iterator(36, p.iter().map(|x| -x));
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::LyapunovSolve("singular Kronecker system".into()))?;
    let q_raw = Mat6::from_iterator(sol.iter().copied());
    let q = (q_raw + q_raw.transpose()) * 0.5;

    let residual = (a.transpose() * q + q * a + p).norm();
    if !(residual < RESIDUAL_TOL) {
        return Err(Error::LyapunovSolve(format!(
            "residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )));
    }
    check_spd(&q, "Q")?;
    Ok(q)
}

impl LyapunovCert {
    /// Certificate for the given gains with P = I₆.
    pub fn new(gains: Gains) -> Result<Self, Error> {
        Self::with_p(gains, Mat6::identity())
    }

    /// Certificate for the given gains and an explicit SPD P.
    pub fn with_p(gains: Gains, p: Mat6) -> Result<Self, Error> {
        let a = build_a(&gains);
        let q = solve_lyapunov(&a, &p)?;
        let residual = (a.transpose() * q + q * a + p).norm();
        Ok(LyapunovCert {
            a,
            b: b_matrix(),
            q,
            p,
            gains,
            residual,
        })
    }

    pub fn a(&self) -> &Mat6 {
        &self.a
    }

    pub fn b(&self) -> &Mat6x3 {
        &self.b
    }

    pub fn q(&self) -> &Mat6 {
        &self.q
    }

    pub fn p(&self) -> &Mat6 {
        &self.p
    }

    pub fn gains(&self) -> &Gains {
        &self.gains
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// s = BᵀQE, the switching signal of the robust term. With B = [0; I]
    /// this is the bottom three rows of Q applied to E.
    pub fn switching_signal(&self, e_vec: &Vec6) -> Vec3 {
        self.q.fixed_view::<3, 6>(3, 0) * e_vec
    }

    pub fn summary(&self) -> CertSummary {
        let mut q_eigs: Vec<f64> = self.q.symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut p_eigs: Vec<f64> = self.p.symmetric_eigen().eigenvalues.iter().copied().collect();
        q_eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        p_eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        CertSummary {
            q: self.q,
            q_eigenvalues: q_eigs,
            p_eigenvalues: p_eigs,
            residual: self.residual,
        }
    }
}

/// V(E) = EᵀQE. Exactly zero at E = 0.
pub fn v_of(cert: &LyapunovCert, e_vec: &Vec6) -> f64 {
    e_vec.dot(&(cert.q * e_vec))
}

/// Right-hand side of the error dynamics, Ė = AE + B(v - J⁻¹γ).
/// `j_inv_gamma` is the already-applied J⁻¹γ product.
pub fn error_dynamics_rhs(cert: &LyapunovCert, e_vec: &Vec6, v: &Vec3, j_inv_gamma: &Vec3) -> Vec6 {
    cert.a * e_vec + cert.b * (v - j_inv_gamma)
}

/// Analytic V̇ = -EᵀPE + 2(EᵀQB)·(v - J⁻¹γ), with the branch that the
/// robust term takes at this E reported alongside (‖BᵀQE‖ vs σ).
pub fn v_dot(
    cert: &LyapunovCert,
    sigma: f64,
    e_vec: &Vec6,
    v: &Vec3,
    j_inv: &Mat3,
    gam: &Vec3,
) -> (f64, Branch) {
    let s = cert.switching_signal(e_vec);
    let branch = if s.norm() >= sigma {
        Branch::Outside
    } else {
        Branch::BoundaryLayer
    };
    let val = -e_vec.dot(&(cert.p * e_vec)) + 2.0 * s.dot(&(v - j_inv * gam));
    (val, branch)
}

/// Worst-case V̇ over all v admissible under the per-axis bound `vb`:
/// each component of v is placed at its bound with the sign that fights
/// 2EᵀQB, and the always-stabilizing γ term is dropped. A negative
/// return certifies V̇ < 0 for every admissible v at this E.
pub fn stability_margin(cert: &LyapunovCert, e_vec: &Vec6, vb: &Vec3) -> f64 {
    let s = cert.switching_signal(e_vec);
    let mut worst = -e_vec.dot(&(cert.p * e_vec));
    for i in 0..3 {
        worst += 2.0 * s[i].abs() * vb[i];
    }
    worst
}
