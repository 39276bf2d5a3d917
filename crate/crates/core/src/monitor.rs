//! Streaming stability monitor.
//!
//! Each trajectory sample is checked against the standing assumptions
//! the robust controller needs (disturbance, Coriolis-error, reference
//! acceleration, inertia mismatch, and inverse-inertia bounds, plus an
//! attitude envelope) and against the Lyapunov decrease condition, then
//! folded into a debounced three-state verdict machine. The V̇ test uses
//! the same analytic expression as [`crate::lyapunov::v_dot`] rather
//! than differencing the logged V numerically.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::controller::{ModelEstimates, RobustBounds};
use crate::dynamics::{induced_two_norm, EulerState};
use crate::error::Error;
use crate::lyapunov::{self, LyapunovCert};
use crate::sim::log::Sample;
use crate::sim::ReferenceSpec;
use crate::Mat3;

pub const DEBOUNCE_DEFAULT: usize = 5;
pub const E_FLOOR_DEFAULT: f64 = 1e-3;

/// Why a sample was flagged. Ordering is the declaration order, which
/// fixes the serialization order inside a cause set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    LyapunovPositive,
    DisturbanceBound,
    DeltaNBound,
    RefAccelBound,
    InertiaMismatchBound,
    JInvNormBound,
    EnvelopeExit,
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Cause::LyapunovPositive => "lyapunov_positive",
            Cause::DisturbanceBound => "disturbance_bound",
            Cause::DeltaNBound => "delta_n_bound",
            Cause::RefAccelBound => "ref_accel_bound",
            Cause::InertiaMismatchBound => "inertia_mismatch_bound",
            Cause::JInvNormBound => "j_inv_norm_bound",
            Cause::EnvelopeExit => "envelope_exit",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorState {
    Stable,
    Warning,
    Violation,
}

impl fmt::Display for MonitorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MonitorState::Stable => "stable",
            MonitorState::Warning => "warning",
            MonitorState::Violation => "violation",
        };
        f.write_str(s)
    }
}

/// Attitude box the monitor enforces. This is a mission envelope, not
/// the model's validity region: limits at or beyond π/2 are accepted,
/// and the state-space guards then fire first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "EnvelopeRaw")]
pub struct Envelope {
    pub phi_max: f64,
    pub theta_max: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeRaw {
    phi_max: f64,
    theta_max: f64,
}

impl Envelope {
    pub fn new(phi_max: f64, theta_max: f64) -> Result<Self, Error> {
        for (name, v) in [("phi_max", phi_max), ("theta_max", theta_max)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "envelope {name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(Envelope { phi_max, theta_max })
    }
}

impl TryFrom<EnvelopeRaw> for Envelope {
    type Error = Error;
    fn try_from(raw: EnvelopeRaw) -> Result<Self, Error> {
        Envelope::new(raw.phi_max, raw.theta_max)
    }
}

/// Everything the verdict machine is parameterized by.
pub struct MonitorConfig {
    pub bounds: RobustBounds,
    pub cert: LyapunovCert,
    /// Consecutive flagged samples before Warning hardens to Violation,
    /// and consecutive clean samples before Warning relaxes to Stable.
    pub debounce_n: usize,
    /// ‖E‖ below which a non-negative V̇ is benign: inside the boundary
    /// layer the smoothed robust term only guarantees ultimate
    /// boundedness, so flagging there would be a false alarm.
    pub e_floor: f64,
    pub envelope: Envelope,
}

impl MonitorConfig {
    pub fn new(
        bounds: RobustBounds,
        cert: LyapunovCert,
        debounce_n: usize,
        e_floor: f64,
        envelope: Envelope,
    ) -> Result<Self, Error> {
        if debounce_n < 1 {
            return Err(Error::InvalidParameter(
                "debounce_n must be >= 1".into(),
            ));
        }
        if !e_floor.is_finite() || e_floor < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "e_floor must be finite and >= 0, got {e_floor}"
            )));
        }
        Ok(MonitorConfig {
            bounds,
            cert,
            debounce_n,
            e_floor,
            envelope,
        })
    }
}

/// Signed margins, bound minus value, for every per-sample check:
/// positive is healthy, negative is violated. `None` marks a check that
/// could not be evaluated because the sample sits outside the model's
/// valid state space (which itself raises [`Cause::EnvelopeExit`]).
///
/// The disturbance budget D is checked in two readings, the raw size
/// `d_norm` (D - ‖d‖) and the estimate error `delta_d` (D - ‖d̂ - d‖),
/// alongside the headline total `d_total` (D̄ - (‖d‖ + D)); any of the
/// three going negative raises [`Cause::DisturbanceBound`] and the
/// record shows which one it was.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SampleMargins {
    pub lyapunov: Option<f64>,
    pub d_total: f64,
    pub d_norm: f64,
    pub delta_d: f64,
    pub delta_n: Option<f64>,
    pub ref_accel: f64,
    pub mismatch: Option<f64>,
    pub j_inv: Option<f64>,
    pub envelope: f64,
}

/// The machine's view of the most recent sample.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub state: MonitorState,
    pub t: f64,
    pub causes: BTreeSet<Cause>,
    pub margins: SampleMargins,
}

/// Emitted whenever the verdict state changes; `causes` and `margins`
/// are those of the sample that triggered the change.
#[derive(Clone, Debug, Serialize)]
pub struct Transition {
    pub t: f64,
    pub from: MonitorState,
    pub to: MonitorState,
    pub causes: BTreeSet<Cause>,
    pub margins: SampleMargins,
}

pub struct Monitor {
    config: MonitorConfig,
    est: ModelEstimates,
    reference: ReferenceSpec,
    state: MonitorState,
    bad_streak: usize,
    clean_streak: usize,
    last: Option<Verdict>,
}

impl Monitor {
    /// `est` carries both the true plant and the controller's model of
    /// it; `reference` must be the one the run tracked, since the
    /// reference acceleration is recomputed here rather than logged.
    pub fn new(config: MonitorConfig, est: ModelEstimates, reference: ReferenceSpec) -> Self {
        Monitor {
            config,
            est,
            reference,
            state: MonitorState::Stable,
            bad_streak: 0,
            clean_streak: 0,
            last: None,
        }
    }

    pub fn state(&self) -> MonitorState {
        self.state
    }

    pub fn current(&self) -> Option<&Verdict> {
        self.last.as_ref()
    }

    /// The three J-dependent quantities: inertia mismatch norm, Coriolis
    /// model error norm, and inverse-inertia norm. Fails where the model
    /// itself is undefined.
    fn j_dependent(&self, sample: &Sample) -> Result<(f64, f64, f64), Error> {
        let st = EulerState::new(sample.eta, sample.eta_dot)?;
        let plant = self.est.plant();
        let j_inv = plant.inertia_inverse(&st.eta)?;
        let j_hat = self.est.j_hat(&st.eta)?;
        let mismatch = induced_two_norm(&(Mat3::identity() - j_hat * j_inv));
        let delta_n = (self.est.n_hat(&st)? - plant.coriolis_vector(&st)?).norm();
        Ok((mismatch, delta_n, induced_two_norm(&j_inv)))
    }

    /// Evaluate the standing assumption bounds at one sample.
    pub fn check_assumptions(&self, sample: &Sample) -> (BTreeSet<Cause>, SampleMargins) {
        let b = &self.config.bounds;
        let d_size = sample.d.norm();
        let (_, _, ref_ddot) = self.reference.eval(sample.t);

        let d_total = b.d_total_max - (d_size + b.delta_d_max);
        let d_norm = b.delta_d_max - d_size;
        let delta_d = b.delta_d_max - (self.est.d_hat() - sample.d).norm();
        let ref_accel = b.ref_accel_max - ref_ddot.norm();
        let envelope = (self.config.envelope.phi_max - sample.eta.x.abs())
            .min(self.config.envelope.theta_max - sample.eta.y.abs());

        let mut causes = BTreeSet::new();
        let (mismatch, delta_n, j_inv) = match self.j_dependent(sample) {
            Ok((mism, dn, jn)) => (
                Some(b.inertia_mismatch_max - mism),
                Some(b.delta_n_max - dn),
                Some((b.beta_max - jn).min(jn - b.beta_min)),
            ),
            Err(_) => {
                causes.insert(Cause::EnvelopeExit);
                (None, None, None)
            }
        };

        if d_total.min(d_norm).min(delta_d) < 0.0 {
            causes.insert(Cause::DisturbanceBound);
        }
        if delta_n.is_some_and(|m| m < 0.0) {
            causes.insert(Cause::DeltaNBound);
        }
        if ref_accel < 0.0 {
            causes.insert(Cause::RefAccelBound);
        }
        if mismatch.is_some_and(|m| m < 0.0) {
            causes.insert(Cause::InertiaMismatchBound);
        }
        if j_inv.is_some_and(|m| m < 0.0) {
            causes.insert(Cause::JInvNormBound);
        }
        if envelope < 0.0 {
            causes.insert(Cause::EnvelopeExit);
        }

        let margins = SampleMargins {
            lyapunov: None,
            d_total,
            d_norm,
            delta_d,
            delta_n,
            ref_accel,
            mismatch,
            j_inv,
            envelope,
        };
        (causes, margins)
    }

    /// Recompute V̇ analytically from the sample's E, v and γ, and test
    /// it for decrease. Non-negative V̇ is only a violation outside the
    /// e_floor ball. Returns `(None, false)` where J⁻¹ is unavailable.
    pub fn check_lyapunov(&self, sample: &Sample) -> (Option<f64>, bool) {
        let j_inv = match self.est.plant().inertia_inverse(&sample.eta) {
            Ok(j) => j,
            Err(_) => return (None, false),
        };
        let (v_dot, _) = lyapunov::v_dot(
            &self.config.cert,
            self.config.bounds.sigma,
            &sample.e_vec,
            &sample.v,
            &j_inv,
            &sample.gamma,
        );
        let violated = v_dot >= 0.0 && sample.e_vec.norm() > self.config.e_floor;
        (Some(-v_dot), violated)
    }

    /// Fold one sample into the verdict machine.
    ///
    /// Stable turns to Warning on a flagged sample (or straight to
    /// Violation when debounce_n = 1); Warning hardens to Violation
    /// after debounce_n consecutive flagged samples, counting the one
    /// that raised the Warning, and relaxes to Stable after debounce_n
    /// consecutive clean samples. Violation is absorbing. Samples must
    /// arrive with non-decreasing t.
    pub fn feed(&mut self, sample: &Sample) -> Result<Option<Transition>, Error> {
        if let Some(prev) = self.last.as_ref().map(|v| v.t) {
            if sample.t < prev {
                return Err(Error::OutOfOrderSample { prev, t: sample.t });
            }
        }

        let (mut causes, mut margins) = self.check_assumptions(sample);
        let (lyap_margin, lyap_violated) = self.check_lyapunov(sample);
        margins.lyapunov = lyap_margin;
        if lyap_violated {
            causes.insert(Cause::LyapunovPositive);
        }

        let bad = !causes.is_empty();
        if bad {
            self.bad_streak += 1;
            self.clean_streak = 0;
        } else {
            self.clean_streak += 1;
            self.bad_streak = 0;
        }

        let from = self.state;
        let to = match (from, bad) {
            (MonitorState::Violation, _) => MonitorState::Violation,
            (_, true) if self.bad_streak >= self.config.debounce_n => MonitorState::Violation,
            (_, true) => MonitorState::Warning,
            (MonitorState::Warning, false) if self.clean_streak < self.config.debounce_n => {
                MonitorState::Warning
            }
            (_, false) => MonitorState::Stable,
        };

        self.state = to;
        self.last = Some(Verdict {
            state: to,
            t: sample.t,
            causes: causes.clone(),
            margins,
        });
        Ok((to != from).then(|| Transition {
            t: sample.t,
            from,
            to,
            causes,
            margins,
        }))
    }
}
