//! Two agents on a line heading for a common destination.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::optimizer::{argmin_quadratic, LinearConstraint, Quadratic1D, QuadraticProgram};
use crate::scenario::{
    Branch, ContactSchedule, CorridorScenario, EtaSample, SolveReport, TwoAgentSchedule,
};
use crate::trajectory::{sample_times, PiecewiseTrajectory, Segment};

const GAP_SLACK: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;
const ETA_SAMPLES: f64 = 200.0;

fn expect_agents(sc: &CorridorScenario, n: usize) -> Result<()> {
    if sc.len() == n {
        Ok(())
    } else {
        Err(Error::BadAgentCount(sc.len()))
    }
}

/// `Λ₁₂ = ½(ρ₁(0) - ρ₂(0) - (L₁ + L₂))`.
pub fn lambda12(sc: &CorridorScenario) -> f64 {
    sc.lambda(0)
}

/// Contact level `a₂(s₁² - s₂²)/(2s₂)` under `ā₁ = (s₁/s₂)ā₂`.
pub fn eta12_level(sc: &CorridorScenario, a2: f64) -> Result<f64> {
    expect_agents(sc, 2)?;
    if !(a2 > 0.0) {
        return Err(Error::NonPositiveControl(a2));
    }
    let (s1, s2) = (sc.speeds[0], sc.speeds[1]);
    Ok(a2 * (s1 * s1 - s2 * s2) / (2.0 * s2))
}

pub fn contact_time_two(sc: &CorridorScenario, a2: f64) -> Result<TwoAgentSchedule> {
    let eta = eta12_level(sc, a2)?;
    Ok(TwoAgentSchedule {
        t_f12: closing_time(lambda12(sc), eta, sc.horizon),
    })
}

/// Contact time for arbitrary controls, where the closing level is
/// `(a₁s₁ - a₂s₂)/2`.
pub fn contact_time_general(sc: &CorridorScenario, a1: f64, a2: f64) -> Result<TwoAgentSchedule> {
    expect_agents(sc, 2)?;
    let eta = 0.5 * (a1 * sc.speeds[0] - a2 * sc.speeds[1]);
    Ok(TwoAgentSchedule {
        t_f12: closing_time(lambda12(sc), eta, sc.horizon),
    })
}

/// `Λ/η` when it is at most `horizon`.
pub(crate) fn closing_time(lambda: f64, eta: f64, horizon: f64) -> Option<f64> {
    if lambda == 0.0 {
        return (eta >= 0.0).then_some(0.0);
    }
    if !(eta > 0.0) {
        return None;
    }
    let t = lambda / eta;
    (t <= horizon * (1.0 + 1e-12)).then_some(t.min(horizon))
}

/// Smallest `a₂` with `t_f12 ≤ T`.
pub fn a2_lower_bound(sc: &CorridorScenario) -> f64 {
    let (s1, s2) = (sc.speeds[0], sc.speeds[1]);
    2.0 * s2 * lambda12(sc) / (sc.horizon * (s1 * s1 - s2 * s2))
}

fn contact_quadratic(sc: &CorridorScenario) -> Result<Quadratic1D> {
    let (s1, s2) = (sc.speeds[0], sc.speeds[1]);
    let t = sc.horizon;
    let lam = lambda12(sc);
    let k = t * (s1 * s1 + s2 * s2) / (2.0 * s2);
    let (c1, c2) = (sc.rho[0] - lam, sc.rho[1] + lam);
    let effort = 0.5 * sc.tau * t * (s1 * s1 / (s2 * s2) + 1.0);
    Quadratic1D::on_half_line(
        k * k + effort,
        -k * (c1 + c2),
        0.5 * (c1 * c1 + c2 * c2),
        a2_lower_bound(sc),
    )
}

/// Cost when the agents meet before `T` and move as one block afterwards.
pub fn cost_contact_branch(sc: &CorridorScenario, a2: f64) -> Result<f64> {
    expect_agents(sc, 2)?;
    let q = contact_quadratic(sc)?;
    if a2 < q.lo {
        return Err(Error::BelowContactBound {
            control: a2,
            bound: q.lo,
        });
    }
    Ok(q.eval(a2))
}

/// Cost when the agents never touch.
pub fn cost_free_branch(sc: &CorridorScenario, a1: f64, a2: f64) -> Result<f64> {
    expect_agents(sc, 2)?;
    let (s1, s2) = (sc.speeds[0], sc.speeds[1]);
    let t = sc.horizon;
    if t * (a1 * s1 - a2 * s2) > 2.0 * lambda12(sc) + GAP_SLACK {
        return Err(Error::ContactWouldOccur);
    }
    let r1 = sc.rho[0] - t * a1 * s1;
    let r2 = sc.rho[1] - t * a2 * s2;
    Ok(0.5 * (r1 * r1 + r2 * r2) + 0.5 * sc.tau * t * (a1 * a1 + a2 * a2))
}

/// Free-flight QP: independent quadratics plus the no-contact half-plane.
pub(crate) fn free_program(sc: &CorridorScenario) -> QuadraticProgram {
    let n = sc.len();
    let t = sc.horizon;
    let mut hessian = DMatrix::zeros(n, n);
    let mut gradient = DVector::zeros(n);
    let mut constant = 0.0;
    let mut constraints = Vec::new();
    for i in 0..n {
        let s = sc.speeds[i];
        hessian[(i, i)] = t * t * s * s + sc.tau * t;
        gradient[i] = -t * s * sc.rho[i];
        constant += 0.5 * sc.rho[i] * sc.rho[i];
        constraints.push(LinearConstraint::lower_bound(n, i, 0.0));
    }
    for i in 0..n - 1 {
        let mut row = vec![0.0; n];
        row[i] = -t * sc.speeds[i];
        row[i + 1] = t * sc.speeds[i + 1];
        constraints.push(LinearConstraint::new(row, -2.0 * sc.lambda(i) - GAP_SLACK));
    }
    QuadraticProgram {
        hessian,
        gradient,
        constant,
        constraints,
    }
}

/// `true` when `(j, sum)` should replace the incumbent `(best_j, best_sum)`.
pub(crate) fn better(j: f64, sum: f64, best_j: f64, best_sum: f64) -> bool {
    if (j - best_j).abs() <= TIE_TOL * best_j.abs().max(1.0) {
        sum < best_sum
    } else {
        j < best_j
    }
}

pub fn solve_two(sc: &CorridorScenario) -> Result<SolveReport> {
    expect_agents(sc, 2)?;
    let (s1, s2) = (sc.speeds[0], sc.speeds[1]);
    let (a2, j_contact) = argmin_quadratic(&contact_quadratic(sc)?)?;
    let contact = [s1 / s2 * a2, a2];

    let (free, j_free) = free_program(sc).solve()?;
    let (controls, cost, branch) =
        if better(j_free, free.iter().sum(), j_contact, contact.iter().sum()) {
            ([free[0], free[1]], j_free, Branch::NoContact)
        } else {
            (contact, j_contact, Branch::PairContact)
        };
    let schedule = contact_time_general(sc, controls[0], controls[1])?;
    let trajectories = trajectories_two(sc, controls, &schedule);
    let eta = eta_samples_two(sc, controls, &schedule);
    Ok(SolveReport {
        tau: sc.tau,
        controls: controls.to_vec(),
        cost,
        schedule: ContactSchedule::Two(schedule),
        trajectories,
        eta,
        branch,
        extended: false,
    })
}

/// A constant-speed stretch of an axis coordinate: `ρ' = -speed` on `[t0, t1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Stretch {
    pub t0: f64,
    pub t1: f64,
    pub speed: f64,
}

/// Maps an axis profile starting at `rho0` back to the plane.
pub(crate) fn axis_path(
    sc: &CorridorScenario,
    rho0: f64,
    stretches: &[Stretch],
) -> PiecewiseTrajectory {
    let mut rho = rho0;
    let mut pieces = Vec::with_capacity(stretches.len());
    for st in stretches {
        pieces.push(Segment::line(
            st.t0,
            st.t1,
            sc.point_at(rho),
            sc.axis * st.speed,
        ));
        rho -= st.speed * (st.t1 - st.t0);
    }
    PiecewiseTrajectory::from_pieces(pieces)
}

/// Piecewise-linear paths: own speeds until contact, the block speed
/// `(a₁s₁ + a₂s₂)/2` afterwards.
pub fn trajectories_two(
    sc: &CorridorScenario,
    a: [f64; 2],
    schedule: &TwoAgentSchedule,
) -> Vec<PiecewiseTrajectory> {
    let t_end = sc.horizon;
    let own = [a[0] * sc.speeds[0], a[1] * sc.speeds[1]];
    let block = 0.5 * (own[0] + own[1]);
    (0..2)
        .map(|i| {
            let stretches = match schedule.t_f12 {
                Some(t) => vec![
                    Stretch {
                        t0: 0.0,
                        t1: t,
                        speed: own[i],
                    },
                    Stretch {
                        t0: t,
                        t1: t_end,
                        speed: block,
                    },
                ],
                None => vec![Stretch {
                    t0: 0.0,
                    t1: t_end,
                    speed: own[i],
                }],
            };
            axis_path(sc, sc.rho[i], &stretches)
        })
        .collect()
}

fn eta_samples_two(
    sc: &CorridorScenario,
    a: [f64; 2],
    schedule: &TwoAgentSchedule,
) -> Vec<EtaSample> {
    let level = (0.5 * (a[0] * sc.speeds[0] - a[1] * sc.speeds[1])).max(0.0);
    let mut times = sample_times(0.0, sc.horizon, sc.horizon / ETA_SAMPLES);
    times.extend(schedule.t_f12);
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
        .into_iter()
        .map(|t| {
            let on = schedule.t_f12.is_some_and(|tf| t >= tf);
            EtaSample {
                t,
                values: vec![if on { level } else { 0.0 }],
            }
        })
        .collect()
}
