//! Closed-loop and open-loop fixed-step RK4 integration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controller::{
    self, Gains, ModelEstimates, RobustBounds, VBoundTemplate,
};
use crate::dynamics::{EulerState, PlantParams};
use crate::error::Error;
use crate::lyapunov::{self, LyapunovCert};
use crate::sim::log::{Sample, TrajectoryLog};
use crate::sim::Scenario;
use crate::{Vec3, Vec6};

/// Everything fixed across one run: plant truth, controller model, and
/// the certificate the robust term switches on.
pub struct ClosedLoop<'a> {
    pub plant: &'a PlantParams,
    pub est: &'a ModelEstimates,
    pub gains: &'a Gains,
    pub bounds: &'a RobustBounds,
    pub template: &'a VBoundTemplate,
    pub cert: &'a LyapunovCert,
}

/// A finished (or aborted) run. `abort` carries the failure that stopped
/// integration early; the log always holds every sample produced before
/// the failure, so a partial trajectory is still inspectable.
pub struct RunOutput {
    pub log: TrajectoryLog,
    pub abort: Option<Error>,
}

struct ControlEval {
    sample: Sample,
    tau_applied: Vec3,
}

impl ClosedLoop<'_> {
    /// Thrust the rotor mix is asked to hold: all four rotors at 3/4 of
    /// the hardware limit. With total rotor capacity above ω_max² per
    /// rotor, a growing single-axis torque demand hits the high-side
    /// clamp (saturated flag) before any rotor is asked for negative
    /// thrust; a half-limit baseline would make the clamp unreachable.
    fn hover_thrust(&self) -> f64 {
        let omega_hover = 0.75 * self.plant.omega_max;
        4.0 * self.plant.thrust_coeff * omega_hover * omega_hover
    }

    /// Evaluate the controller and diagnostics at one sample point. The
    /// returned applied torque is the commanded torque after rotor-mix
    /// quantization and saturation, held for the following step.
    fn evaluate(&self, scenario: &Scenario, state: &EulerState, t: f64, d: Vec3) -> Result<ControlEval, Error> {
        let (eta_ref, eta_ref_dot, eta_ref_ddot) = scenario.reference.eval(t);
        let e_vec = controller::error_state(state, &eta_ref, &eta_ref_dot);
        let u = controller::control_u(&eta_ref_ddot, self.gains, &e_vec);
        let vb = controller::v_bound(self.bounds, self.template, &e_vec);
        let delta = controller::delta_gain(self.bounds, &vb);
        let gam = controller::gamma(self.cert, self.bounds, &e_vec, delta);
        let tau_cmd = controller::control_tau(self.est, state, &u, &gam)?;

        let command = self.plant.rotors_from_torque(&tau_cmd, self.hover_thrust())?;
        let tau_applied = self.plant.torque_from_rotors(&command.speeds)?;

        let v = controller::uncertainty_v(self.plant, self.est, state, &u, &d)?;
        let j_inv = self.plant.inertia_inverse(&state.eta)?;
        let v_lyap = lyapunov::v_of(self.cert, &e_vec);
        let (v_dot, branch) =
            lyapunov::v_dot(self.cert, self.bounds.sigma, &e_vec, &v, &j_inv, &gam);

        Ok(ControlEval {
            sample: Sample {
                t,
                eta: state.eta,
                eta_dot: state.eta_dot,
                eta_ref,
                e: e_vec.fixed_rows::<3>(0).clone_owned(),
                e_dot: e_vec.fixed_rows::<3>(3).clone_owned(),
                e_vec,
                tau: tau_applied,
                omega: command.speeds.omega,
                d,
                v,
                gamma: gam,
                v_lyap,
                v_dot,
                branch,
                saturated: command.saturated,
            },
            tau_applied,
        })
    }
}

fn offset_state(y: &EulerState, k: &Vec6, h: f64) -> Result<EulerState, Error> {
    let eta = y.eta + k.fixed_rows::<3>(0) * h;
    // A stage can step straight over the gimbal guard band (it is far
    // narrower than one step's pitch advance); classify that as the
    // singularity it is rather than a generic state-validity failure.
    if eta.y.abs() >= std::f64::consts::FRAC_PI_2 - crate::dynamics::GIMBAL_MARGIN {
        return Err(Error::GimbalSingularity { theta: eta.y });
    }
    EulerState::new(eta, y.eta_dot + k.fixed_rows::<3>(3) * h)
}

/// One classical RK4 step of the attitude dynamics under the torque
/// `tau(s)` and disturbance `d(s)`, both functions of absolute time.
fn rk4_step(
    plant: &PlantParams,
    y: &EulerState,
    t: f64,
    dt: f64,
    tau: &dyn Fn(f64) -> Vec3,
    d: &dyn Fn(f64) -> Vec3,
) -> Result<EulerState, Error> {
    let f = |s: &EulerState, time: f64| -> Result<Vec6, Error> {
        let accel = plant.attitude_accel(s, &tau(time), &d(time))?;
        let mut out = Vec6::zeros();
        out.fixed_rows_mut::<3>(0).copy_from(&s.eta_dot);
        out.fixed_rows_mut::<3>(3).copy_from(&accel);
        Ok(out)
    };
    let half = 0.5 * dt;
    let k1 = f(y, t)?;
    let k2 = f(&offset_state(y, &k1, half)?, t + half)?;
    let k3 = f(&offset_state(y, &k2, half)?, t + half)?;
    let k4 = f(&offset_state(y, &k3, dt)?, t + dt)?;
    offset_state(y, &((k1 + k2 * 2.0 + k3 * 2.0 + k4) / 6.0), dt)
}

/// Run a scenario to completion (or abort). The controller is evaluated
/// once per step at the step start and its mixed torque held across the
/// step; smooth disturbance segments are evaluated continuously inside
/// the RK4 stages, noise segments are redrawn per step and held.
pub fn run(cl: &ClosedLoop<'_>, scenario: &Scenario) -> Result<RunOutput, Error> {
    scenario.validate_against(cl.bounds)?;

    let steps = scenario.steps();
    let dt = scenario.dt;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let has_noise = scenario.has_noise();
    let noise_amp = scenario.noise_amplitude();

    let mut log = TrajectoryLog {
        samples: Vec::with_capacity(steps + 1),
    };
    let mut state = scenario.initial;

    for k in 0..=steps {
        let t = k as f64 * dt;
        let noise = if has_noise {
            Vec3::from_fn(|i, _| {
                if noise_amp[i] > 0.0 {
                    rng.random_range(-noise_amp[i]..=noise_amp[i])
                } else {
                    0.0
                }
            })
        } else {
            Vec3::zeros()
        };
        let d_now = scenario.disturbance_smooth(t) + noise;

        let eval = match cl.evaluate(scenario, &state, t, d_now) {
            Ok(ev) => ev,
            Err(e) => {
                return Ok(RunOutput {
                    log,
                    abort: Some(Error::SimAbort {
                        t,
                        source: Box::new(e),
                    }),
                })
            }
        };
        log.samples.push(eval.sample);

        if k < steps {
            let tau_held = eval.tau_applied;
            let d_fn = |time: f64| scenario.disturbance_smooth(time) + noise;
            match rk4_step(cl.plant, &state, t, dt, &|_| tau_held, &d_fn) {
                Ok(next) => state = next,
                Err(e) => {
                    return Ok(RunOutput {
                        log,
                        abort: Some(Error::SimAbort {
                            t,
                            source: Box::new(e),
                        }),
                    })
                }
            }
        }
    }

    Ok(RunOutput { log, abort: None })
}

/// Integrate the plant alone under scripted torque and disturbance,
/// both evaluated continuously (at every RK4 stage). This is the smooth
/// fixed ODE used for integrator-order verification; the closed loop
/// cannot serve that purpose because halving dt also halves the control
/// update interval and thereby changes the system being integrated.
pub fn simulate_open_loop(
    plant: &PlantParams,
    initial: &EulerState,
    tau: &dyn Fn(f64) -> Vec3,
    d: &dyn Fn(f64) -> Vec3,
    dt: f64,
    steps: usize,
) -> Result<EulerState, Error> {
    let mut state = *initial;
    for k in 0..steps {
        state = rk4_step(plant, &state, k as f64 * dt, dt, tau, d)?;
    }
    Ok(state)
}
