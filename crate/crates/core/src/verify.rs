//! Cross-checks of the closed-form solutions against the catching-up oracle.

use crate::corridor_three::{solve_three_with, Effort};
use crate::corridor_two::solve_two;
use crate::error::Result;
use crate::scenario::{Branch, ContactSchedule, Scenario, SolveReport};
use crate::single_agent::{self, contact_geometry, control_lower_bound, CostBranch};
use crate::sweeping::{simulate, simulated_cost, SimConfig, SimWorld};
use crate::trajectory::{sample_times, PiecewiseTrajectory};

/// Allowed sup-norm deviation per unit step.
pub const DEVIATION_PER_STEP: f64 = 50.0;
/// Allowed cost gap per unit step.
pub const COST_GAP_PER_STEP: f64 = 500.0;
const GEOMETRY_TOL: f64 = 1e-9;
const RATIO_TOL: f64 = 1e-12;
const MID_ARC_PROBES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub step: f64,
    pub max_deviation: f64,
    pub cost_analytic: f64,
    pub cost_simulated: f64,
}

impl Comparison {
    pub fn cost_gap(&self) -> f64 {
        (self.cost_simulated - self.cost_analytic).abs()
    }

    pub fn deviation_ok(&self) -> bool {
        self.max_deviation <= DEVIATION_PER_STEP * self.step
    }

    pub fn cost_ok(&self) -> bool {
        self.cost_gap() <= COST_GAP_PER_STEP * self.step
    }
}

/// `½ Σ ‖x_i(T) - x_des‖² + (τT/2) Σ a_i²` read off analytic paths.
pub fn path_cost(world: &SimWorld, paths: &[PiecewiseTrajectory], controls: &[f64]) -> f64 {
    let terminal: f64 = paths
        .iter()
        .map(|p| {
            p.position_at(world.horizon)
                .distance(world.destination)
                .powi(2)
        })
        .sum();
    0.5 * terminal + 0.5 * world.tau * world.horizon * controls.iter().map(|a| a * a).sum::<f64>()
}

/// Runs the oracle at step `h` and measures how far it strays from `paths`.
pub fn compare(
    world: &SimWorld,
    paths: &[PiecewiseTrajectory],
    controls: &[f64],
    cost_analytic: f64,
    h: f64,
) -> Result<Comparison> {
    let trace = simulate(world, controls, &SimConfig::new(h))?;
    let max_deviation = trace
        .times
        .iter()
        .zip(&trace.positions)
        .flat_map(|(&t, config)| {
            config
                .iter()
                .zip(paths)
                .map(move |(x, p)| x.distance(p.position_at(t)))
        })
        .fold(0.0, f64::max);
    Ok(Comparison {
        step: trace.times.get(1).copied().unwrap_or(h),
        max_deviation,
        cost_analytic,
        cost_simulated: simulated_cost(&trace, world, controls),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Nonpenetration, `η ≥ 0`, `J ≥ 0` and the control-ratio identities.
pub fn invariant_checks(scenario: &Scenario, report: &SolveReport) -> Vec<Check> {
    let mut checks = Vec::new();
    let (horizon, worst_gap) = match scenario {
        Scenario::Single(sc) => {
            let path = &report.trajectories[0];
            let worst = sample_times(0.0, sc.horizon, sc.horizon / 2000.0)
                .into_iter()
                .map(|t| path.position_at(t).distance(sc.obstacle_center) - sc.contact_radius())
                .fold(f64::INFINITY, f64::min);
            (sc.horizon, worst)
        }
        Scenario::Corridor(sc) => {
            let worst = sample_times(0.0, sc.horizon, sc.horizon / 2000.0)
                .into_iter()
                .flat_map(|t| {
                    (0..sc.len() - 1).map(move |i| {
                        let gap = sc.axis.dot(
                            report.trajectories[i + 1].position_at(t)
                                - report.trajectories[i].position_at(t),
                        );
                        gap - sc.agents[i].radius - sc.agents[i + 1].radius
                    })
                })
                .fold(f64::INFINITY, f64::min);
            (sc.horizon, worst)
        }
    };
    checks.push(Check::new(
        "nonpenetration",
        worst_gap >= -GEOMETRY_TOL,
        format!("smallest gap {worst_gap:.3e} over [0, {horizon}]"),
    ));
    let eta_min = report
        .eta
        .iter()
        .flat_map(|e| e.values.iter().copied())
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::new(
        "eta_nonnegative",
        eta_min >= 0.0,
        format!("smallest multiplier {eta_min:.3e}"),
    ));
    checks.push(Check::new(
        "cost_nonnegative",
        report.cost >= 0.0,
        format!("J = {}", report.cost),
    ));

    if let Scenario::Corridor(sc) = scenario {
        let a = &report.controls;
        let s = &sc.speeds;
        let residual = match report.branch {
            Branch::PairContact | Branch::Pair12Only => Some((a[0] * s[1] - a[1] * s[0]).abs()),
            Branch::Pair23Only => Some((a[1] * s[2] - a[2] * s[1]).abs()),
            Branch::TripleContact => Some(
                (a[0] * s[2] - a[2] * s[0])
                    .abs()
                    .max((a[1] * s[2] - a[2] * s[1]).abs()),
            ),
            _ => None,
        };
        if let Some(r) = residual {
            let scale = a
                .iter()
                .zip(s)
                .map(|(x, y)| (x * y).abs())
                .fold(1.0, f64::max);
            checks.push(Check::new(
                "ratio_identity",
                r <= RATIO_TOL * scale,
                format!("residual {r:.3e}"),
            ));
        }
    }
    checks
}

/// Probes controls that leave the agent on the obstacle at `T` and checks
/// that none beats the reported optimum.
pub fn mid_arc_check(
    sc: &crate::scenario::SingleScenario,
    report: &SolveReport,
    h: f64,
) -> Result<Option<Check>> {
    let Some(g) = contact_geometry(sc)? else {
        return Ok(None);
    };
    let lo = g.pre_contact_distance / (sc.speed * sc.horizon);
    let hi = control_lower_bound(sc, &g);
    if !(hi > lo) {
        return Ok(None);
    }
    let world = SimWorld::from_single(sc);
    let cfg = SimConfig::new(h);
    let mut best = f64::INFINITY;
    for k in 1..MID_ARC_PROBES {
        let a = lo + (hi - lo) * k as f64 / MID_ARC_PROBES as f64;
        let trace = simulate(&world, &[a], &cfg)?;
        best = best.min(simulated_cost(&trace, &world, &[a]));
    }
    let slack = COST_GAP_PER_STEP * h;
    Ok(Some(Check::new(
        "mid_arc_not_better",
        best >= report.cost - slack,
        format!(
            "best probed mid-arc cost {best:.6} vs optimum {:.6}",
            report.cost
        ),
    )))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub solve: SolveReport,
    pub comparison: Comparison,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.comparison.deviation_ok()
            && self.comparison.cost_ok()
            && self.checks.iter().all(|c| c.passed)
    }

    pub fn lines(&self) -> Vec<String> {
        let c = &self.comparison;
        let mut out = vec![
            format!("controls: {:?}", self.solve.controls),
            format!(
                "max trajectory deviation: {:.6} (tolerance {:.6}) {}",
                c.max_deviation,
                DEVIATION_PER_STEP * c.step,
                verdict(c.deviation_ok())
            ),
            format!(
                "cost gap: {:.6} (analytic {:.6}, simulated {:.6}, tolerance {:.6}) {}",
                c.cost_gap(),
                c.cost_analytic,
                c.cost_simulated,
                COST_GAP_PER_STEP * c.step,
                verdict(c.cost_ok())
            ),
        ];
        out.extend(
            self.checks
                .iter()
                .map(|k| format!("{}: {} {}", k.name, k.detail, verdict(k.passed))),
        );
        out
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

pub fn solve_scenario(scenario: &Scenario, effort: Effort) -> Result<SolveReport> {
    match scenario {
        Scenario::Single(sc) => single_agent::solve(sc),
        Scenario::Corridor(sc) if sc.len() == 2 => solve_two(sc),
        Scenario::Corridor(sc) => solve_three_with(sc, effort),
    }
}

/// Solves, simulates the optimum at step `h`, and runs every check.
pub fn verify(scenario: &Scenario, h: f64) -> Result<VerifyReport> {
    let solve = solve_scenario(scenario, Effort::Quadratic)?;
    let world = match scenario {
        Scenario::Single(sc) => SimWorld::from_single(sc),
        Scenario::Corridor(sc) => SimWorld::from_corridor(sc),
    };
    let comparison = compare(&world, &solve.trajectories, &solve.controls, solve.cost, h)?;
    let mut checks = invariant_checks(scenario, &solve);
    if let Scenario::Single(sc) = scenario {
        checks.extend(mid_arc_check(sc, &solve, h)?);
        if let ContactSchedule::Single(s) = solve.schedule {
            if s.t_f.is_some() {
                let c = single_agent::cost(sc, contact_geometry(sc)?.as_ref(), solve.controls[0])?;
                let expected = if s.t_l.is_some() {
                    CostBranch::Arc
                } else {
                    CostBranch::MidArc
                };
                checks.push(Check::new(
                    "closed_form_branch",
                    c.branch == expected,
                    format!("{:?}", c.branch),
                ));
            }
        }
    }
    Ok(VerifyReport {
        solve,
        comparison,
        checks,
    })
}
