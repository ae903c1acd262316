//! Fixed-step time loop.

use super::{step, Params, SchemeId, SchemeState, StepReport};
use crate::diagnostics::{RunFailure, RunLedger, StepRecord};
use crate::error::{Error, Result};

/// Callback invoked once for the initial level and once after every step.
pub trait Observer {
    fn observe(&mut self, state: &SchemeState, record: &StepRecord);
}

impl<F: FnMut(&SchemeState, &StepRecord)> Observer for F {
    fn observe(&mut self, state: &SchemeState, record: &StepRecord) {
        self(state, record)
    }
}

/// Result of a run: its ledger and the last state reached.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub ledger: RunLedger,
    pub state: SchemeState,
}

/// Number of full steps of size `dt` in `[0, t_final]` and the length of the
/// trailing short step (zero when `dt` divides `t_final`).
pub fn step_plan(t_final: f64, dt: f64) -> (usize, f64) {
    let ratio = t_final / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        return (nearest as usize, 0.0);
    }
    let full = ratio.floor();
    (full as usize, t_final - full * dt)
}

/// Advances `initial` to `t_final`. Scheme errors end the run early and are
/// recorded in the ledger rather than returned.
pub fn run(
    scheme: SchemeId,
    initial: SchemeState,
    params: &Params,
    t_final: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutcome> {
    params.solver.validate()?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "final time must be nonnegative, got {t_final}"
        )));
    }
    if scheme.uses_sigma() && initial.sigma.is_none() {
        return Err(Error::InvalidParameter("uvs state is missing sigma".into()));
    }
    let mut ledger = RunLedger::new(scheme, &initial, params);
    for o in observers.iter_mut() {
        o.observe(&initial, ledger.last());
    }
    let (full, short) = step_plan(t_final, params.dt());
    let total = full + usize::from(short > 0.0);
    let t0 = initial.t;
    let mut state = initial;
    for k in 0..total {
        let step_params = if k < full { *params } else { params.with_dt(short) };
        let result: Result<(SchemeState, StepReport)> = step(scheme, &state, &step_params);
        match result {
            Ok((mut next, report)) => {
                next.t = if k < full {
                    t0 + (k + 1) as f64 * params.dt()
                } else {
                    t0 + t_final
                };
                let record =
                    StepRecord::compute(scheme, Some(&state), &next, Some(&report), &step_params);
                ledger.weak_estimate_accumulate(&next.v, step_params.dt());
                ledger.push(record);
                for o in observers.iter_mut() {
                    o.observe(&next, ledger.last());
                }
                state = next;
            }
            Err(e) => {
                let e = e.at_step(state.n + 1, state.t);
                ledger.failure = Some(RunFailure {
                    step: state.n + 1,
                    time: state.t,
                    reason: e.to_string(),
                });
                break;
            }
        }
    }
    Ok(RunOutcome { ledger, state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Mesh1D, NodalField};
    use crate::schemes::{PhysicalParams, SolverParams};

    fn params(m: &Mesh1D, dt: f64) -> Params {
        Params {
            physical: PhysicalParams::new(5.0, 2.0).unwrap(),
            solver: SolverParams::new(dt, m),
        }
    }

    #[test]
    fn plan_handles_divisible_and_remainder() {
        assert_eq!(step_plan(0.3, 1e-6), (300_000, 0.0));
        assert_eq!(step_plan(1e-4, 1e-8), (10_000, 0.0));
        assert_eq!(step_plan(0.0, 0.1), (0, 0.0));
        let (n, r) = step_plan(1.0, 0.3);
        assert_eq!(n, 3);
        assert!((r - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_length_run_has_one_record() {
        let m = Mesh1D::new(0.0, 1.0, 11).unwrap();
        let s = SchemeState::initial(
            SchemeId::Uv,
            NodalField::constant(m, 1.0),
            NodalField::constant(m, 1.0),
        )
        .unwrap();
        let out = run(SchemeId::Uv, s, &params(&m, 0.1), 0.0, &mut []).unwrap();
        assert_eq!(out.ledger.records.len(), 1);
        assert_eq!(out.state.n, 0);
    }

    #[test]
    fn short_final_step_reaches_final_time() {
        let m = Mesh1D::new(0.0, 1.0, 21).unwrap();
        let u = NodalField::interpolate(m, |x| 1.0 + 0.2 * (3.0 * x).cos());
        let v = NodalField::interpolate(m, |x| 1.0 + 0.1 * x);
        let s = SchemeState::initial(SchemeId::UvAd, u, v).unwrap();
        let mut seen = Vec::new();
        let mut obs = |st: &SchemeState, _: &StepRecord| seen.push(st.t);
        let out = run(SchemeId::UvAd, s, &params(&m, 0.03), 0.1, &mut [&mut obs]).unwrap();
        assert_eq!(out.ledger.completed_steps(), 4);
        assert_eq!(out.state.t, 0.1);
        assert_eq!(seen.len(), 5);
        assert!(out.ledger.weak_estimate_holds());
    }

    #[test]
    fn failures_are_recorded() {
        let m = Mesh1D::new(0.0, 1.0, 21).unwrap();
        let u = NodalField::interpolate(m, |x| 1.0 + 0.5 * (6.0 * x).cos());
        let v = NodalField::interpolate(m, |x| 1.0 + 0.5 * (3.0 * x).sin());
        let s = SchemeState::initial(SchemeId::UvNd, u, v).unwrap();
        let mut p = params(&m, 1e-3);
        p.solver.max_iter = 1;
        let out = run(SchemeId::UvNd, s, &p, 0.01, &mut []).unwrap();
        let f = out.ledger.failure.as_ref().unwrap();
        assert_eq!(f.step, 1);
        assert!(f.reason.contains("did not converge"));
        assert_eq!(out.ledger.records.len(), 1);
    }
}
