//! Deterministic fixed-step closed-loop simulation.
//!
//! A [`Scenario`] scripts the reference trajectory, disturbance torque
//! schedule, model mismatch, and integration grid. [`runner::run`]
//! integrates plant + controller with classical RK4 at a fixed step,
//! holding the commanded torque constant across each step (zero-order
//! hold) and routing it through the rotor mix so actuator saturation is
//! physical. Identical scenarios produce byte-identical logs.

pub mod log;
pub mod runner;

pub use log::{CsvSampleReader, Sample, TrajectoryLog};
pub use runner::{run, simulate_open_loop, ClosedLoop, RunOutput};

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::controller::RobustBounds;
use crate::dynamics::EulerState;
use crate::error::Error;
use crate::Vec3;

/// Reference signal for one Euler axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AxisRef {
    Constant {
        value: f64,
    },
    Sinusoid {
        amplitude: f64,
        frequency_hz: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Smooth transition from `before` to `after` over
    /// [`at`, `at` + `rise_time`] along the quintic 6x⁵ - 15x⁴ + 10x³,
    /// which starts and ends with zero velocity and acceleration.
    Step {
        before: f64,
        after: f64,
        at: f64,
        rise_time: f64,
    },
}

impl AxisRef {
    fn validate(&self) -> Result<(), Error> {
        let finite = |v: f64, name: &str| -> Result<(), Error> {
            if !v.is_finite() {
                return Err(Error::Scenario(format!("{name} must be finite, got {v}")));
            }
            Ok(())
        };
        match self {
            AxisRef::Constant { value } => finite(*value, "constant value"),
            AxisRef::Sinusoid {
                amplitude,
                frequency_hz,
                phase,
                offset,
            } => {
                finite(*amplitude, "amplitude")?;
                finite(*frequency_hz, "frequency_hz")?;
                finite(*phase, "phase")?;
                finite(*offset, "offset")?;
                if *frequency_hz < 0.0 {
                    return Err(Error::Scenario(format!(
                        "frequency_hz must be >= 0, got {frequency_hz}"
                    )));
                }
                Ok(())
            }
            AxisRef::Step {
                before,
                after,
                at,
                rise_time,
            } => {
                finite(*before, "before")?;
                finite(*after, "after")?;
                finite(*at, "at")?;
                finite(*rise_time, "rise_time")?;
                if *at < 0.0 {
                    return Err(Error::Scenario(format!("step at must be >= 0, got {at}")));
                }
                if *rise_time <= 0.0 {
                    return Err(Error::Scenario(format!(
                        "step rise_time must be > 0 (an instantaneous step has unbounded \
                         reference acceleration), got {rise_time}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// (position, velocity, acceleration) at time t.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match self {
            AxisRef::Constant { value } => (*value, 0.0, 0.0),
            AxisRef::Sinusoid {
                amplitude,
                frequency_hz,
                phase,
                offset,
            } => {
                let w = TAU * frequency_hz;
                let arg = w * t + phase;
                (
                    offset + amplitude * arg.sin(),
                    amplitude * w * arg.cos(),
                    -amplitude * w * w * arg.sin(),
                )
            }
            AxisRef::Step {
                before,
                after,
                at,
                rise_time,
            } => {
                let x = ((t - at) / rise_time).clamp(0.0, 1.0);
                let x2 = x * x;
                let s = x2 * x * (10.0 - 15.0 * x + 6.0 * x2);
                let sp = 30.0 * x2 * (1.0 - 2.0 * x + x2);
                let spp = 60.0 * x * (1.0 - 3.0 * x + 2.0 * x2);
                let span = after - before;
                (
                    before + span * s,
                    span * sp / rise_time,
                    span * spp / (rise_time * rise_time),
                )
            }
        }
    }

    /// Upper bound on |acceleration| over all t.
    pub fn sup_accel(&self) -> f64 {
        match self {
            AxisRef::Constant { .. } => 0.0,
            AxisRef::Sinusoid {
                amplitude,
                frequency_hz,
                ..
            } => {
                let w = TAU * frequency_hz;
                amplitude.abs() * w * w
            }
            // max |s''| of the quintic on [0, 1] is 10/sqrt(3).
            AxisRef::Step {
                before,
                after,
                rise_time,
                ..
            } => (after - before).abs() * (10.0 / 3f64.sqrt()) / (rise_time * rise_time),
        }
    }
}

/// Per-axis reference trajectory η_d(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    pub roll: AxisRef,
    pub pitch: AxisRef,
    pub yaw: AxisRef,
}

impl ReferenceSpec {
    pub fn hold(eta: Vec3) -> Self {
        ReferenceSpec {
            roll: AxisRef::Constant { value: eta[0] },
            pitch: AxisRef::Constant { value: eta[1] },
            yaw: AxisRef::Constant { value: eta[2] },
        }
    }

    fn validate(&self) -> Result<(), Error> {
        self.roll.validate()?;
        self.pitch.validate()?;
        self.yaw.validate()
    }

    /// (η_d, η̇_d, η̈_d) at time t.
    pub fn eval(&self, t: f64) -> (Vec3, Vec3, Vec3) {
        let (p0, v0, a0) = self.roll.eval(t);
        let (p1, v1, a1) = self.pitch.eval(t);
        let (p2, v2, a2) = self.yaw.eval(t);
        (
            Vec3::new(p0, p1, p2),
            Vec3::new(v0, v1, v2),
            Vec3::new(a0, a1, a2),
        )
    }

    /// Upper bound on ‖η̈_d(t)‖₂ (root of summed per-axis squares, which
    /// is conservative because the axis maxima need not coincide in t).
    pub fn sup_accel(&self) -> f64 {
        let a = Vec3::new(
            self.roll.sup_accel(),
            self.pitch.sup_accel(),
            self.yaw.sup_accel(),
        );
        a.norm()
    }
}

/// One torque disturbance segment; segments sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DisturbanceSegment {
    Constant {
        torque: Vec3,
    },
    /// Raised-cosine pulse: peak · ½(1 - cos(2π(t-start)/width)) on
    /// [start, start+width], zero outside. Smooth and bounded by peak.
    Gust {
        peak: Vec3,
        start: f64,
        width: f64,
    },
    /// Uniform torque in [-amplitude, amplitude] per axis, redrawn each
    /// integration step from the scenario seed and held across the step.
    Noise {
        amplitude: Vec3,
    },
}

impl DisturbanceSegment {
    fn validate(&self, duration: f64) -> Result<(), Error> {
        let finite3 = |v: &Vec3, name: &str| -> Result<(), Error> {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Scenario(format!("{name} must be finite, got {v:?}")));
            }
            Ok(())
        };
        match self {
            DisturbanceSegment::Constant { torque } => finite3(torque, "constant torque"),
            DisturbanceSegment::Gust { peak, start, width } => {
                finite3(peak, "gust peak")?;
                if !start.is_finite() || *start < 0.0 {
                    return Err(Error::Scenario(format!(
                        "gust start must be >= 0, got {start}"
                    )));
                }
                if !width.is_finite() || *width <= 0.0 {
                    return Err(Error::Scenario(format!(
                        "gust width must be > 0, got {width}"
                    )));
                }
                if start + width > duration {
                    return Err(Error::Scenario(format!(
                        "gust [{start}, {}] extends past duration {duration}",
                        start + width
                    )));
                }
                Ok(())
            }
            DisturbanceSegment::Noise { amplitude } => {
                finite3(amplitude, "noise amplitude")?;
                if amplitude.iter().any(|a| *a < 0.0) {
                    return Err(Error::Scenario(format!(
                        "noise amplitude must be >= 0, got {amplitude:?}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Smooth (non-random) contribution at time t.
    fn eval_smooth(&self, t: f64) -> Vec3 {
        match self {
            DisturbanceSegment::Constant { torque } => *torque,
            DisturbanceSegment::Gust { peak, start, width } => {
                if t < *start || t > start + width {
                    Vec3::zeros()
                } else {
                    let phase = TAU * (t - start) / width;
                    peak * (0.5 * (1.0 - phase.cos()))
                }
            }
            DisturbanceSegment::Noise { .. } => Vec3::zeros(),
        }
    }
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "ScenarioRaw")]
pub struct Scenario {
    pub duration: f64,
    pub dt: f64,
    pub initial: EulerState,
    pub reference: ReferenceSpec,
    pub disturbance: Vec<DisturbanceSegment>,
    /// Proportional inertia mismatch μ of the controller's model.
    pub mismatch: f64,
    /// Controller's constant disturbance estimate d̂.
    pub d_hat: Vec3,
    /// Seed for randomized (noise) segments.
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioRaw {
    duration: f64,
    dt: f64,
    initial: EulerState,
    reference: ReferenceSpec,
    #[serde(default)]
    disturbance: Vec<DisturbanceSegment>,
    #[serde(default)]
    mismatch: f64,
    #[serde(default = "Vec3::zeros")]
    d_hat: Vec3,
    #[serde(default)]
    seed: u64,
}

impl TryFrom<ScenarioRaw> for Scenario {
    type Error = Error;

    fn try_from(raw: ScenarioRaw) -> Result<Self, Error> {
        Scenario::new(
            raw.duration,
            raw.dt,
            raw.initial,
            raw.reference,
            raw.disturbance,
            raw.mismatch,
            raw.d_hat,
            raw.seed,
        )
    }
}

impl Scenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        duration: f64,
        dt: f64,
        initial: EulerState,
        reference: ReferenceSpec,
        disturbance: Vec<DisturbanceSegment>,
        mismatch: f64,
        d_hat: Vec3,
        seed: u64,
    ) -> Result<Self, Error> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::Scenario(format!("dt must be > 0, got {dt}")));
        }
        if !duration.is_finite() || duration < dt {
            return Err(Error::Scenario(format!(
                "duration must be >= dt, got duration {duration}, dt {dt}"
            )));
        }
        reference.validate()?;
        for seg in &disturbance {
            seg.validate(duration)?;
        }
        if !mismatch.is_finite() || mismatch <= -1.0 {
            return Err(Error::Scenario(format!(
                "mismatch must be finite and > -1, got {mismatch}"
            )));
        }
        if d_hat.iter().any(|x| !x.is_finite()) {
            return Err(Error::Scenario(format!("d_hat must be finite, got {d_hat:?}")));
        }
        Ok(Scenario {
            duration,
            dt,
            initial,
            reference,
            disturbance,
            mismatch,
            d_hat,
            seed,
        })
    }

    /// Number of integration steps; the log holds `steps() + 1` samples.
    pub fn steps(&self) -> usize {
        // Small relative slack so grid-aligned durations (e.g. 3.5 / 1e-3)
        // are not truncated by division roundoff.
        (self.duration / self.dt * (1.0 + 1e-12)).floor() as usize
    }

    /// The reference must respect the certified acceleration budget
    /// sup‖η̈_d‖ < H; runs are refused at load otherwise.
    pub fn validate_against(&self, bounds: &RobustBounds) -> Result<(), Error> {
        let sup = self.reference.sup_accel();
        if sup >= bounds.ref_accel_max {
            return Err(Error::Scenario(format!(
                "reference acceleration bound violated: sup ||eta_d_ddot|| = {sup:.6} \
                 >= ref_accel_max = {} (the certificate assumes sup ||eta_d_ddot|| < H)",
                bounds.ref_accel_max
            )));
        }
        Ok(())
    }

    /// Sum of smooth disturbance segments at time t (noise excluded).
    pub fn disturbance_smooth(&self, t: f64) -> Vec3 {
        self.disturbance
            .iter()
            .map(|s| s.eval_smooth(t))
            .fold(Vec3::zeros(), |acc, d| acc + d)
    }

    /// Whether any segment requires per-step random draws.
    pub fn has_noise(&self) -> bool {
        self.disturbance
            .iter()
            .any(|s| matches!(s, DisturbanceSegment::Noise { .. }))
    }

    /// Total noise amplitude vector (sum over noise segments).
    pub fn noise_amplitude(&self) -> Vec3 {
        self.disturbance
            .iter()
            .filter_map(|s| match s {
                DisturbanceSegment::Noise { amplitude } => Some(*amplitude),
                _ => None,
            })
            .fold(Vec3::zeros(), |acc, a| acc + a)
    }
}
