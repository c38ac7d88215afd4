//! Three agents on a line: which pair meets first, the piecewise
//! multipliers, and the optimal controls.

use nalgebra::{DMatrix, DVector};

use crate::corridor_two::{axis_path, better, closing_time, free_program, Stretch};
use crate::error::{Error, Result};
use crate::optimizer::{argmin_quadratic, LinearConstraint, Quadratic1D, QuadraticProgram};
use crate::scenario::{
    Branch, ContactSchedule, CorridorScenario, EtaSample, SolveReport, ThreeAgentSchedule,
    ThreeCase,
};
use crate::trajectory::{sample_times, PiecewiseTrajectory};

const SIMULTANEOUS_TOL: f64 = 1e-9;
const ETA_SAMPLES: f64 = 200.0;

/// Control-effort term of the cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Effort {
    /// `(τT/2) Σ a_i²`.
    #[default]
    Quadratic,
    /// `(τT/2) a₃ Σ s_i²/s₃²`, linear in `a₃`. Only the triple-contact
    /// branch is searched.
    Linear,
}

fn expect_three(sc: &CorridorScenario) -> Result<()> {
    if sc.len() == 3 {
        Ok(())
    } else {
        Err(Error::BadAgentCount(sc.len()))
    }
}

fn sq(sc: &CorridorScenario) -> [f64; 3] {
    [
        sc.speeds[0] * sc.speeds[0],
        sc.speeds[1] * sc.speeds[1],
        sc.speeds[2] * sc.speeds[2],
    ]
}

/// `Λ₁₂/(s₁² - s₂²) - Λ₂₃/(s₂² - s₃²)`; negative when agents 1 and 2 meet first.
pub fn discriminant(sc: &CorridorScenario) -> f64 {
    let q = sq(sc);
    sc.lambda(0) / (q[0] - q[1]) - sc.lambda(1) / (q[1] - q[2])
}

pub fn case_discriminant(sc: &CorridorScenario) -> Result<ThreeCase> {
    expect_three(sc)?;
    let q = sq(sc);
    let scale = (sc.lambda(0) / (q[0] - q[1]))
        .abs()
        .max((sc.lambda(1) / (q[1] - q[2])).abs());
    let d = discriminant(sc);
    Ok(
        if d.abs() <= SIMULTANEOUS_TOL * scale.max(f64::MIN_POSITIVE) || (d == 0.0) {
            ThreeCase::Simultaneous
        } else if d < 0.0 {
            ThreeCase::Pair12First
        } else {
            ThreeCase::Pair23First
        },
    )
}

/// Piecewise-constant multiplier levels under the ratio relations
/// `a_i = (s_i/s₃) a₃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeAgentMultipliers {
    pub schedule: ThreeAgentSchedule,
    /// Level of `η₁₂` on the pair-only window (zero unless 1–2 meet first).
    pub eta12_pair: f64,
    /// Level of `η₂₃` on the pair-only window (zero unless 2–3 meet first).
    pub eta23_pair: f64,
    pub eta12_triple: f64,
    pub eta23_triple: f64,
}

impl ThreeAgentMultipliers {
    pub fn eta12_at(&self, t: f64) -> f64 {
        let s = &self.schedule;
        match (s.t_f123, s.t_f12) {
            (Some(t3), _) if t >= t3 => self.eta12_triple,
            (_, Some(t2)) if t >= t2 => self.eta12_pair,
            _ => 0.0,
        }
    }

    pub fn eta23_at(&self, t: f64) -> f64 {
        let s = &self.schedule;
        match (s.t_f123, s.t_f23) {
            (Some(t3), _) if t >= t3 => self.eta23_triple,
            (_, Some(t2)) if t >= t2 => self.eta23_pair,
            _ => 0.0,
        }
    }
}

/// `k = a₃/s₃`; every speed and multiplier is `k` times a speed-squared
/// combination.
fn ratio(sc: &CorridorScenario, a3: f64) -> Result<f64> {
    if !(a3 > 0.0) {
        return Err(Error::NonPositiveControl(a3));
    }
    Ok(a3 / sc.speeds[2])
}

/// Unclipped event times `(t12, t23, t123)` for `k = a₃/s₃`.
fn raw_times(sc: &CorridorScenario, case: ThreeCase, k: f64) -> (f64, f64, f64) {
    let q = sq(sc);
    let (l12, l23) = (sc.lambda(0), sc.lambda(1));
    match case {
        ThreeCase::Pair12First => {
            let t12 = l12 / ((q[0] - q[1]) * k / 2.0);
            let eta23 = (q[0] + q[1] - 2.0 * q[2]) * k / 3.0;
            let t123 = 2.0 * (2.0 * l23 + l12) / (3.0 * eta23);
            (t12, t123, t123)
        }
        ThreeCase::Pair23First => {
            let t23 = l23 / ((q[1] - q[2]) * k / 2.0);
            let eta12 = (2.0 * q[0] - q[1] - q[2]) * k / 3.0;
            let t123 = 2.0 * (2.0 * l12 + l23) / (3.0 * eta12);
            (t123, t23, t123)
        }
        ThreeCase::Simultaneous => {
            let t123 = 2.0 * l12 / ((q[0] - q[1]) * k);
            (t123, t123, t123)
        }
    }
}

pub fn contact_times_three(
    sc: &CorridorScenario,
    a3: f64,
    case: ThreeCase,
) -> Result<ThreeAgentSchedule> {
    expect_three(sc)?;
    let k = ratio(sc, a3)?;
    let (t12, t23, t123) = raw_times(sc, case, k);
    let t_end = sc.horizon;
    let clip = |t: f64| (t <= t_end * (1.0 + 1e-12)).then_some(t.min(t_end));
    Ok(ThreeAgentSchedule {
        t_f12: clip(t12),
        t_f23: clip(t23),
        t_f123: clip(t123),
        case,
    })
}

pub fn eta_profiles_three(
    sc: &CorridorScenario,
    a3: f64,
    case: ThreeCase,
) -> Result<ThreeAgentMultipliers> {
    let schedule = contact_times_three(sc, a3, case)?;
    let k = ratio(sc, a3)?;
    let q = sq(sc);
    let (eta12_pair, eta23_pair) = match case {
        ThreeCase::Pair12First => ((q[0] - q[1]) * k / 2.0, 0.0),
        ThreeCase::Pair23First => (0.0, (q[1] - q[2]) * k / 2.0),
        ThreeCase::Simultaneous => (0.0, 0.0),
    };
    Ok(ThreeAgentMultipliers {
        schedule,
        eta12_pair,
        eta23_pair,
        eta12_triple: (2.0 * q[0] - q[1] - q[2]) * k / 3.0,
        eta23_triple: (q[0] + q[1] - 2.0 * q[2]) * k / 3.0,
    })
}

/// Speed profiles of the triple-contact branch, before clipping at `T`.
fn triple_stretches(sc: &CorridorScenario, a3: f64, case: ThreeCase) -> Result<[Vec<Stretch>; 3]> {
    let k = ratio(sc, a3)?;
    let q = sq(sc);
    let t_end = sc.horizon;
    let (t12, t23, t123) = raw_times(sc, case, k);
    let own = [q[0] * k, q[1] * k, q[2] * k];
    let all = (q[0] + q[1] + q[2]) * k / 3.0;
    let seg = |t0: f64, t1: f64, speed: f64| Stretch {
        t0: t0.min(t_end),
        t1: t1.min(t_end),
        speed,
    };
    Ok(match case {
        ThreeCase::Pair12First => {
            let pair = (q[0] + q[1]) * k / 2.0;
            [
                vec![
                    seg(0.0, t12, own[0]),
                    seg(t12, t123, pair),
                    seg(t123, t_end, all),
                ],
                vec![
                    seg(0.0, t12, own[1]),
                    seg(t12, t123, pair),
                    seg(t123, t_end, all),
                ],
                vec![seg(0.0, t123, own[2]), seg(t123, t_end, all)],
            ]
        }
        ThreeCase::Pair23First => {
            let pair = (q[1] + q[2]) * k / 2.0;
            [
                vec![seg(0.0, t123, own[0]), seg(t123, t_end, all)],
                vec![
                    seg(0.0, t23, own[1]),
                    seg(t23, t123, pair),
                    seg(t123, t_end, all),
                ],
                vec![
                    seg(0.0, t23, own[2]),
                    seg(t23, t123, pair),
                    seg(t123, t_end, all),
                ],
            ]
        }
        ThreeCase::Simultaneous => {
            [0, 1, 2].map(|i| vec![seg(0.0, t123, own[i]), seg(t123, t_end, all)])
        }
    })
}

fn travelled(stretches: &[Stretch]) -> f64 {
    stretches.iter().map(|s| s.speed * (s.t1 - s.t0)).sum()
}

/// Paths of the triple-contact branch under the ratio relations.
pub fn trajectories_three(
    sc: &CorridorScenario,
    a3: f64,
    schedule: &ThreeAgentSchedule,
) -> Result<Vec<PiecewiseTrajectory>> {
    expect_three(sc)?;
    let stretches = triple_stretches(sc, a3, schedule.case)?;
    Ok((0..3)
        .map(|i| axis_path(sc, sc.rho[i], &stretches[i]))
        .collect())
}

/// Smallest `a₃` with `t_f123 ≤ T`.
pub fn a3_lower_bound(sc: &CorridorScenario, case: ThreeCase) -> f64 {
    let (_, _, t123_at_unit_k) = raw_times(sc, case, 1.0);
    sc.speeds[2] * t123_at_unit_k / sc.horizon
}

/// `ρ_i(T) = c_i - K a₃` on the triple branch; returns `(c, K)`.
fn triple_affine(sc: &CorridorScenario, case: ThreeCase) -> Result<([f64; 3], f64)> {
    let q = sq(sc);
    let big_k = sc.horizon * (q[0] + q[1] + q[2]) / (3.0 * sc.speeds[2]);
    let a3 = a3_lower_bound(sc, case).max(1.0);
    let stretches = triple_stretches(sc, a3, case)?;
    let c = [0, 1, 2].map(|i| sc.rho[i] - travelled(&stretches[i]) + big_k * a3);
    Ok((c, big_k))
}

fn triple_quadratic(sc: &CorridorScenario, case: ThreeCase, effort: Effort) -> Result<Quadratic1D> {
    let (c, big_k) = triple_affine(sc, case)?;
    let q = sq(sc);
    let weight = 0.5 * sc.tau * sc.horizon * (q[0] + q[1] + q[2]) / q[2];
    let lo = a3_lower_bound(sc, case);
    let (c2, c1) = match effort {
        Effort::Quadratic => (1.5 * big_k * big_k + weight, -big_k * c.iter().sum::<f64>()),
        Effort::Linear => (1.5 * big_k * big_k, -big_k * c.iter().sum::<f64>() + weight),
    };
    Quadratic1D::on_half_line(c2, c1, 0.5 * c.iter().map(|v| v * v).sum::<f64>(), lo)
}

/// Triple-branch cost as a function of `a₃` (requires `t_f123 ≤ T`).
pub fn cost_triple_branch(sc: &CorridorScenario, a3: f64, effort: Effort) -> Result<f64> {
    expect_three(sc)?;
    let q = triple_quadratic(sc, case_discriminant(sc)?, effort)?;
    if a3 < q.lo {
        return Err(Error::BelowContactBound {
            control: a3,
            bound: q.lo,
        });
    }
    Ok(q.eval(a3))
}

/// Agents 1–2 meet before `T` under `a₁ = (s₁/s₂)a₂`; agent 3 never touched.
/// Variables `(a₂, a₃)`.
fn pair12_program(sc: &CorridorScenario) -> QuadraticProgram {
    let [s1, s2, s3] = [sc.speeds[0], sc.speeds[1], sc.speeds[2]];
    let t = sc.horizon;
    let (l12, l23) = (sc.lambda(0), sc.lambda(1));
    let k2 = (s1 * s1 + s2 * s2) / (2.0 * s2);
    let (c1, c2) = (sc.rho[0] - l12, sc.rho[1] + l12);
    let w2 = s1 * s1 / (s2 * s2) + 1.0;
    QuadraticProgram {
        hessian: DMatrix::from_row_slice(
            2,
            2,
            &[
                2.0 * t * t * k2 * k2 + sc.tau * t * w2,
                0.0,
                0.0,
                t * t * s3 * s3 + sc.tau * t,
            ],
        ),
        gradient: DVector::from_vec(vec![-t * k2 * (c1 + c2), -t * s3 * sc.rho[2]]),
        constant: 0.5 * (c1 * c1 + c2 * c2 + sc.rho[2] * sc.rho[2]),
        constraints: vec![
            LinearConstraint::lower_bound(2, 0, 2.0 * s2 * l12 / (t * (s1 * s1 - s2 * s2))),
            LinearConstraint::lower_bound(2, 1, 0.0),
            LinearConstraint::new(vec![-t * k2, t * s3], -(2.0 * l23 + l12)),
        ],
    }
}

/// Agents 2–3 meet before `T` under `a₂ = (s₂/s₃)a₃`; agent 1 never touches.
/// Variables `(a₁, a₃)`.
fn pair23_program(sc: &CorridorScenario) -> QuadraticProgram {
    let [s1, s2, s3] = [sc.speeds[0], sc.speeds[1], sc.speeds[2]];
    let t = sc.horizon;
    let (l12, l23) = (sc.lambda(0), sc.lambda(1));
    let k3 = (s2 * s2 + s3 * s3) / (2.0 * s3);
    let (c2, c3) = (sc.rho[1] - l23, sc.rho[2] + l23);
    let w3 = s2 * s2 / (s3 * s3) + 1.0;
    QuadraticProgram {
        hessian: DMatrix::from_row_slice(
            2,
            2,
            &[
                t * t * s1 * s1 + sc.tau * t,
                0.0,
                0.0,
                2.0 * t * t * k3 * k3 + sc.tau * t * w3,
            ],
        ),
        gradient: DVector::from_vec(vec![-t * s1 * sc.rho[0], -t * k3 * (c2 + c3)]),
        constant: 0.5 * (sc.rho[0] * sc.rho[0] + c2 * c2 + c3 * c3),
        constraints: vec![
            LinearConstraint::lower_bound(2, 0, 0.0),
            LinearConstraint::lower_bound(2, 1, 2.0 * s3 * l23 / (t * (s2 * s2 - s3 * s3))),
            LinearConstraint::new(vec![-t * s1, t * k3], -(2.0 * l12 + l23)),
        ],
    }
}

struct Candidate {
    controls: [f64; 3],
    cost: f64,
    branch: Branch,
}

pub fn solve_three(sc: &CorridorScenario) -> Result<SolveReport> {
    solve_three_with(sc, Effort::Quadratic)
}

pub fn solve_three_with(sc: &CorridorScenario, effort: Effort) -> Result<SolveReport> {
    expect_three(sc)?;
    let case = case_discriminant(sc)?;
    let s = [sc.speeds[0], sc.speeds[1], sc.speeds[2]];
    let (a3, j) = argmin_quadratic(&triple_quadratic(sc, case, effort)?)?;
    let mut best = Candidate {
        controls: [s[0] / s[2] * a3, s[1] / s[2] * a3, a3],
        cost: j,
        branch: Branch::TripleContact,
    };
    if effort == Effort::Quadratic {
        let mut consider = |controls: [f64; 3], cost: f64, branch| {
            if better(
                cost,
                controls.iter().sum(),
                best.cost,
                best.controls.iter().sum(),
            ) {
                best = Candidate {
                    controls,
                    cost,
                    branch,
                };
            }
        };
        if let Ok((x, j)) = free_program(sc).solve() {
            consider([x[0], x[1], x[2]], j, Branch::NoContact);
        }
        if let Ok((x, j)) = pair12_program(sc).solve() {
            consider([s[0] / s[1] * x[0], x[0], x[1]], j, Branch::Pair12Only);
        }
        if let Ok((x, j)) = pair23_program(sc).solve() {
            consider([x[0], s[1] / s[2] * x[1], x[1]], j, Branch::Pair23Only);
        }
    }
    let Candidate {
        controls,
        cost,
        branch,
    } = best;
    let (schedule, trajectories, eta) = if branch == Branch::TripleContact {
        let m = eta_profiles_three(sc, controls[2], case)?;
        let paths = trajectories_three(sc, controls[2], &m.schedule)?;
        let eta = eta_samples(sc, &m.schedule, |t| [m.eta12_at(t), m.eta23_at(t)]);
        (m.schedule, paths, eta)
    } else {
        partial_contact(sc, controls, branch, case)
    };
    Ok(SolveReport {
        tau: sc.tau,
        controls: controls.to_vec(),
        cost,
        schedule: ContactSchedule::Three(schedule),
        trajectories,
        eta,
        branch,
        extended: branch != Branch::TripleContact,
    })
}

/// Schedule, paths and multipliers when at most one pair meets: the
/// two-agent block solution on that pair plus a free third agent.
fn partial_contact(
    sc: &CorridorScenario,
    a: [f64; 3],
    branch: Branch,
    case: ThreeCase,
) -> (ThreeAgentSchedule, Vec<PiecewiseTrajectory>, Vec<EtaSample>) {
    let t_end = sc.horizon;
    let own = [0, 1, 2].map(|i| a[i] * sc.speeds[i]);
    let free = |i: usize| {
        vec![Stretch {
            t0: 0.0,
            t1: t_end,
            speed: own[i],
        }]
    };
    let joined = |i: usize, j: usize, tf: Option<f64>| match tf {
        Some(tf) => {
            let block = 0.5 * (own[i] + own[j]);
            (
                vec![
                    Stretch {
                        t0: 0.0,
                        t1: tf,
                        speed: own[i],
                    },
                    Stretch {
                        t0: tf,
                        t1: t_end,
                        speed: block,
                    },
                ],
                vec![
                    Stretch {
                        t0: 0.0,
                        t1: tf,
                        speed: own[j],
                    },
                    Stretch {
                        t0: tf,
                        t1: t_end,
                        speed: block,
                    },
                ],
            )
        }
        None => (free(i), free(j)),
    };
    let level = |i: usize, j: usize| (0.5 * (own[i] - own[j])).max(0.0);
    let (t12, t23, stretches) = match branch {
        Branch::Pair12Only => {
            let tf = closing_time(sc.lambda(0), level(0, 1), t_end);
            let (p, q) = joined(0, 1, tf);
            (tf, None, [p, q, free(2)])
        }
        Branch::Pair23Only => {
            let tf = closing_time(sc.lambda(1), level(1, 2), t_end);
            let (p, q) = joined(1, 2, tf);
            (None, tf, [free(0), p, q])
        }
        _ => (None, None, [free(0), free(1), free(2)]),
    };
    let schedule = ThreeAgentSchedule {
        t_f12: t12,
        t_f23: t23,
        t_f123: None,
        case,
    };
    let paths = (0..3)
        .map(|i| axis_path(sc, sc.rho[i], &stretches[i]))
        .collect();
    let (e12, e23) = (level(0, 1), level(1, 2));
    let eta = eta_samples(sc, &schedule, |t| {
        [
            if t12.is_some_and(|tf| t >= tf) {
                e12
            } else {
                0.0
            },
            if t23.is_some_and(|tf| t >= tf) {
                e23
            } else {
                0.0
            },
        ]
    });
    (schedule, paths, eta)
}

fn eta_samples<F: Fn(f64) -> [f64; 2]>(
    sc: &CorridorScenario,
    schedule: &ThreeAgentSchedule,
    at: F,
) -> Vec<EtaSample> {
    let mut times = sample_times(0.0, sc.horizon, sc.horizon / ETA_SAMPLES);
    times.extend(
        schedule
            .t_f12
            .into_iter()
            .chain(schedule.t_f23)
            .chain(schedule.t_f123),
    );
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
        .into_iter()
        .map(|t| EtaSample {
            t,
            values: at(t).to_vec(),
        })
        .collect()
}
