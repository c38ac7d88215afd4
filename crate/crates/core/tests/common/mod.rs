#![allow(dead_code)]

use std::path::PathBuf;

use crowd_sweep::corridor_three::Effort;
use crowd_sweep::scenario::Scenario;
use crowd_sweep::scenario::{parse_scenario, ContactSchedule, CorridorAgent, EtaSample};
use crowd_sweep::single_agent::{contact_geometry, SingleContactGeometry};
use crowd_sweep::trajectory::sample_times;
use crowd_sweep::verify::solve_scenario;
use crowd_sweep::{CorridorScenario, SingleScenario, SolveReport, Vec2};
use proptest::prelude::*;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> Scenario {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    parse_scenario(&text).unwrap()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

/// `τ, a, t_f, t_l, J`
pub const COLLINEAR: [[f64; 5]; 10] = [
    [1.0, 2.675632, 0.840923, 4.929998, 21.532945],
    [2.0, 2.668700, 0.843107, 4.942803, 42.954320],
    [3.0, 2.661804, 0.845291, 4.955609, 64.264990],
    [4.0, 2.654944, 0.847476, 4.968414, 85.465812],
    [5.0, 2.648119, 0.849660, 4.981219, 106.557632],
    [6.0, 2.641329, 0.851844, 4.994024, 127.541289],
    [7.0, 2.634573, 0.854028, 5.006829, 148.417612],
    [8.0, 2.627853, 0.856212, 5.019635, 169.187424],
    [9.0, 2.621166, 0.858397, 5.032440, 189.851537],
    [10.0, 2.614513, 0.860581, 5.045245, 210.410756],
];

pub const OFFSET: [[f64; 5]; 10] = [
    [1.0, 2.771724, 1.018491, 5.275958, 23.107381],
    [2.0, 2.764543, 1.021136, 5.289662, 46.095035],
    [3.0, 2.757400, 1.023782, 5.303366, 68.963889],
    [4.0, 2.750293, 1.026427, 5.317069, 91.714863],
    [5.0, 2.743223, 1.029072, 5.330773, 114.348866],
    [6.0, 2.736189, 1.031718, 5.344477, 136.866796],
    [7.0, 2.729191, 1.034363, 5.358181, 159.269545],
    [8.0, 2.722229, 1.037009, 5.371885, 181.557995],
    [9.0, 2.715302, 1.039654, 5.385588, 203.733017],
    [10.0, 2.708411, 1.042300, 5.399292, 225.795476],
];

/// `τ, a, J`
pub const CLEAR: [[f64; 3]; 10] = [
    [1.0, 0.9974025924461699, 2.992207792207821],
    [2.0, 0.9948186479096565, 5.968911917098474],
    [3.0, 0.992248057110637, 8.930232558139565],
    [4.0, 0.9896907167795382, 11.876288659793842],
    [5.0, 0.9871465247276625, 14.807197943444757],
    [6.0, 0.984615379889146, 17.72307692307695],
    [7.0, 0.9820971819338324, 20.624040920716144],
    [8.0, 0.9795918320755072, 23.510204081632683],
    [9.0, 0.9770992320887493, 26.381679389313003],
    [10.0, 0.9746192847468523, 29.23857868020307],
];

/// `τ, a1, a2, t_f12, J`
pub const PAIR_AXIS: [[f64; 5]; 10] = [
    [1.0, 1.195021, 0.597510, 2.510417, 14.377593],
    [2.0, 1.190083, 0.595041, 2.520833, 19.710744],
    [3.0, 1.185185, 0.592593, 2.531250, 25.000000],
    [4.0, 1.180328, 0.590164, 2.541667, 30.245902],
    [5.0, 1.175510, 0.587755, 2.552083, 35.448980],
    [6.0, 1.170732, 0.585366, 2.562500, 40.609756],
    [7.0, 1.165992, 0.582996, 2.572917, 45.728745],
    [8.0, 1.161290, 0.580645, 2.583333, 50.806452],
    [9.0, 1.156626, 0.578313, 2.593750, 55.843373],
    [10.0, 1.152000, 0.576000, 2.604167, 60.840000],
];

pub const PAIR_DIAGONAL: [[f64; 5]; 10] = [
    [1.0, 1.166355, 0.728972, 2.170803, 21.685981],
    [2.0, 1.164179, 0.727612, 2.174861, 27.350746],
    [3.0, 1.162011, 0.726257, 2.178918, 32.994413],
    [4.0, 1.159851, 0.724907, 2.182976, 38.617100],
    [5.0, 1.157699, 0.723562, 2.187033, 44.218924],
    [6.0, 1.155556, 0.722222, 2.191091, 49.800000],
    [7.0, 1.153420, 0.720887, 2.195149, 55.360444],
    [8.0, 1.151291, 0.719557, 2.199206, 60.900369],
    [9.0, 1.149171, 0.718232, 2.203264, 66.419890],
    [10.0, 1.147059, 0.716912, 2.207321, 71.919118],
];

/// `τ, a1, a2, a3, t_f12, t_f23, J`
pub const TRIPLE_AXIS: [[f64; 7]; 10] = [
    [
        1.0, 1.306309, 0.653154, 0.272148, 2.296547, 2.796989, 60.465,
    ],
    [
        2.0, 1.291812, 0.645906, 0.269128, 2.322319, 2.828377, 84.660,
    ],
    [
        3.0, 1.277315, 0.638658, 0.266107, 2.348676, 2.860477, 108.585,
    ],
    [
        4.0, 1.262819, 0.631409, 0.263087, 2.375638, 2.893314, 132.240,
    ],
    [
        5.0, 1.248322, 0.624161, 0.260067, 2.403226, 2.926914, 155.625,
    ],
    [
        6.0, 1.233825, 0.616913, 0.257047, 2.431462, 2.961303, 178.740,
    ],
    [
        7.0, 1.219329, 0.609664, 0.254027, 2.460370, 2.996510, 201.585,
    ],
    [
        8.0, 1.204832, 0.602416, 0.251007, 2.489973, 3.032564, 224.160,
    ],
    [
        9.0, 1.190336, 0.595168, 0.247987, 2.520298, 3.069497, 246.465,
    ],
    [
        10.0, 1.175839, 0.587919, 0.244966, 2.551370, 3.107340, 268.500,
    ],
];

pub const TRIPLE_DIAGONAL: [[f64; 7]; 10] = [
    [
        1.0, 1.322654, 0.423249, 0.264531, 2.750828, 1.527018, 87.065833,
    ],
    [
        2.0, 1.314776, 0.420728, 0.262955, 2.767311, 1.536168, 109.663333,
    ],
    [
        3.0, 1.306898, 0.418207, 0.261380, 2.783992, 1.545428, 132.125833,
    ],
    [
        4.0, 1.299020, 0.415686, 0.259804, 2.800877, 1.554801, 154.453333,
    ],
    [
        5.0, 1.291141, 0.413165, 0.258228, 2.817967, 1.564288, 176.645833,
    ],
    [
        6.0, 1.283263, 0.410644, 0.256653, 2.835267, 1.573891, 198.703333,
    ],
    [
        7.0, 1.275385, 0.408123, 0.255077, 2.852780, 1.583613, 220.625833,
    ],
    [
        8.0, 1.267507, 0.405602, 0.253501, 2.870512, 1.593456, 242.413333,
    ],
    [
        9.0, 1.259629, 0.403081, 0.251926, 2.888465, 1.603422, 264.065833,
    ],
    [
        10.0, 1.251751, 0.400560, 0.250350, 2.906644, 1.613513, 285.583333,
    ],
];

/// Worst relative error of a solved row against a table row, column by
/// column. `cols` picks which table columns are compared to `got`.
pub fn row_errors(got: &[f64], want: &[f64]) -> Vec<f64> {
    got.iter().zip(want).map(|(&g, &w)| rel_err(g, w)).collect()
}

pub fn solve_row(scenario: &Scenario, tau: f64, effort: Effort) -> SolveReport {
    solve_scenario(&scenario.with_tau(tau), effort).unwrap()
}

/// Numbers a report contributes to its table row, in column order after τ.
pub fn row_values(r: &SolveReport) -> Vec<Option<f64>> {
    let mut v: Vec<Option<f64>> = r.controls.iter().map(|&a| Some(a)).collect();
    match r.schedule {
        ContactSchedule::Single(s) => v.extend([s.t_f, s.t_l]),
        ContactSchedule::Two(s) => v.push(s.t_f12),
        ContactSchedule::Three(s) => v.extend([s.t_f12, s.t_f23]),
    }
    v.push(Some(r.cost));
    v
}

pub fn max_row_error(r: &SolveReport, want: &[f64]) -> f64 {
    row_values(r)
        .iter()
        .zip(want)
        .map(|(g, &w)| g.map_or(f64::INFINITY, |g| rel_err(g, w)))
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Independent cost evaluators

/// Single agent: straight run, arc, and straight run again, evaluated in
/// closed form for any control.
pub fn single_cost_exact(sc: &SingleScenario, geom: Option<&SingleContactGeometry>, a: f64) -> f64 {
    let t = sc.horizon;
    let d0 = sc.start.distance(sc.destination);
    let effort = 0.5 * sc.tau * t * a * a;
    let v = sc.speed * a;
    let Some(g) = geom.filter(|g| v * t > g.pre_contact_distance) else {
        return 0.5 * (d0 - v * t).powi(2) + effort;
    };
    let r = sc.contact_radius();
    let t_f = g.pre_contact_distance / v;
    let sweep = g.theta.to_radians();
    let on_arc = a * (t - t_f) / r;
    if on_arc <= sweep {
        let end = sc.obstacle_center
            + (g.contact_point - sc.obstacle_center).rotated(g.orientation.sign::<f64>() * on_arc);
        return 0.5 * end.distance(sc.destination).powi(2) + effort;
    }
    let t_l = t_f + sweep * r / a;
    let rest = g.leave_point.distance(sc.destination) - v * (t - t_l);
    0.5 * rest * rest + effort
}

/// One-dimensional corridor dynamics, advanced event by event. Touching
/// agents move with the pooled average of their desired speeds.
pub fn corridor_final_rho(sc: &CorridorScenario, controls: &[f64]) -> Vec<f64> {
    let n = sc.len();
    let radii = sc.radii();
    let desired: Vec<f64> = (0..n).map(|i| -controls[i] * sc.speeds[i]).collect();
    let mut rho = sc.rho.clone();
    let mut t = 0.0;
    let scale = rho[0].max(1.0);
    loop {
        let gap = |rho: &[f64], i: usize| rho[i] - rho[i + 1] - radii[i] - radii[i + 1];
        let touching: Vec<bool> = (0..n - 1).map(|i| gap(&rho, i) <= 1e-12 * scale).collect();
        let vel = pooled_velocities(&desired, &touching);
        let mut dt = sc.horizon - t;
        for i in 0..n - 1 {
            let closing = vel[i + 1] - vel[i];
            if closing > 0.0 && !touching[i] {
                dt = dt.min(gap(&rho, i) / closing);
            }
        }
        for i in 0..n {
            rho[i] += vel[i] * dt;
        }
        t += dt;
        if t >= sc.horizon * (1.0 - 1e-15) {
            return rho;
        }
        for i in 0..n - 1 {
            if gap(&rho, i).abs() <= 1e-12 * scale {
                let mid = 0.5 * (rho[i] + rho[i + 1]);
                let half = 0.5 * (radii[i] + radii[i + 1]);
                rho[i] = mid + half;
                rho[i + 1] = mid - half;
            }
        }
    }
}

/// Projection of desired velocities onto `v_i ≥ v_{i+1}` across touching
/// pairs: pool-adjacent-violators within each touching chain.
fn pooled_velocities(desired: &[f64], touching: &[bool]) -> Vec<f64> {
    let mut out = Vec::with_capacity(desired.len());
    let mut start = 0;
    while start < desired.len() {
        let mut end = start;
        while end < touching.len() && touching[end] {
            end += 1;
        }
        let mut blocks: Vec<(f64, usize)> = Vec::new();
        for &v in &desired[start..=end] {
            blocks.push((v, 1));
            while blocks.len() > 1 {
                let (b, nb) = blocks[blocks.len() - 1];
                let (a, na) = blocks[blocks.len() - 2];
                if a / na as f64 >= b / nb as f64 {
                    break;
                }
                blocks.pop();
                blocks.pop();
                blocks.push((a + b, na + nb));
            }
        }
        for (sum, count) in blocks {
            out.extend(std::iter::repeat_n(sum / count as f64, count));
        }
        start = end + 1;
    }
    out
}

pub fn corridor_cost_exact(sc: &CorridorScenario, controls: &[f64]) -> f64 {
    let rho = corridor_final_rho(sc, controls);
    let terminal: f64 = rho.iter().map(|r| r * r).sum();
    let effort: f64 = controls.iter().map(|a| a * a).sum();
    0.5 * terminal + 0.5 * sc.tau * sc.horizon * effort
}

/// Tensor grid, then repeated zoom around the best node.
pub fn grid_minimum<F: Fn(&[f64]) -> f64>(
    f: F,
    hi: &[f64],
    nodes: usize,
    levels: usize,
) -> (Vec<f64>, f64) {
    let dim = hi.len();
    let mut lo_b = vec![0.0; dim];
    let mut hi_b = hi.to_vec();
    let mut best = vec![0.0; dim];
    let mut best_f = f(&best);
    for _ in 0..levels {
        let steps: Vec<f64> = (0..dim)
            .map(|k| (hi_b[k] - lo_b[k]) / (nodes - 1) as f64)
            .collect();
        let mut idx = vec![0usize; dim];
        let mut x = vec![0.0; dim];
        loop {
            for k in 0..dim {
                x[k] = lo_b[k] + steps[k] * idx[k] as f64;
            }
            let v = f(&x);
            if v < best_f {
                best_f = v;
                best.copy_from_slice(&x);
            }
            let mut k = 0;
            while k < dim {
                idx[k] += 1;
                if idx[k] < nodes {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == dim {
                break;
            }
        }
        for k in 0..dim {
            lo_b[k] = (best[k] - 2.0 * steps[k]).max(0.0);
            hi_b[k] = best[k] + 2.0 * steps[k];
        }
    }
    (best, best_f)
}

// ---------------------------------------------------------------------------
// Random scenarios

prop_compose! {
    pub fn single_scenario()(
        horizon in 3.0..9.0f64,
        dist in 20.0..70.0f64,
        heading in 0.0..std::f64::consts::TAU,
        along in 0.3..0.7f64,
        lateral in -1.2..1.2f64,
        obstacle_radius in 1.0..5.0f64,
        agent_radius in 0.5..4.0f64,
        tau in 0.2..10.0f64,
        dest in (-20.0..20.0f64, -20.0..20.0f64),
    ) -> Option<SingleScenario> {
        let destination = Vec2::new(dest.0, dest.1);
        let dir = Vec2::new(heading.cos(), heading.sin());
        let reach = obstacle_radius + agent_radius;
        let center = destination + dir * (dist * along) + dir.perp() * (lateral * reach);
        SingleScenario::new(
            horizon,
            destination + dir * dist,
            destination,
            center,
            obstacle_radius,
            agent_radius,
            tau,
        )
        .ok()
        .filter(|sc| sc.start.distance(center) > reach * 1.01)
    }
}

prop_compose! {
    pub fn corridor_scenario(n: usize)(
        horizon in 3.0..9.0f64,
        heading in 0.0..std::f64::consts::TAU,
        front in 2.0..20.0f64,
        gaps in proptest::collection::vec(0.0..25.0f64, n - 1),
        radii in proptest::collection::vec(0.5..6.0f64, n),
        tau in 0.2..10.0f64,
        dest in (-20.0..20.0f64, -20.0..20.0f64),
    ) -> CorridorScenario {
        let destination = Vec2::new(dest.0, dest.1);
        let dir = Vec2::new(heading.cos(), heading.sin());
        let mut rho = vec![front + radii[n - 1]];
        for i in (0..n - 1).rev() {
            let next = rho[0] + radii[i] + radii[i + 1] + gaps[i];
            rho.insert(0, next);
        }
        let agents: Vec<CorridorAgent> = rho
            .iter()
            .zip(&radii)
            .map(|(&r, &radius)| CorridorAgent { start: destination + dir * r, radius })
            .collect();
        CorridorScenario::new(horizon, destination, tau, &agents).unwrap()
    }
}

// ---------------------------------------------------------------------------
// Invariant suites

pub const GAP_TOL: f64 = 1e-8;
pub const EXACT_TOL: f64 = 1e-9;
pub const GRID_TOL: f64 = 1e-3;

fn eta_min(eta: &[EtaSample]) -> f64 {
    eta.iter()
        .flat_map(|e| e.values.iter().copied())
        .fold(f64::INFINITY, f64::min)
}

pub fn check_single(sc: &SingleScenario) -> Result<(), String> {
    let r = solve_scenario(&Scenario::Single(sc.clone()), Effort::Quadratic)
        .map_err(|e| e.to_string())?;
    let path = &r.trajectories[0];
    let reach = sc.contact_radius();
    let scale = sc.start.distance(sc.destination).max(1.0);
    for t in sample_times(0.0, sc.horizon, sc.horizon / 1000.0) {
        let gap = path.position_at(t).distance(sc.obstacle_center) - reach;
        if gap < -GAP_TOL * scale {
            return Err(format!("penetration {gap:e} at t = {t}"));
        }
    }
    if eta_min(&r.eta) < 0.0 {
        return Err("negative multiplier".into());
    }
    let a = r.controls[0];
    if let ContactSchedule::Single(s) = r.schedule {
        if let (Some(t_f), Some(t_l)) = (s.t_f, s.t_l) {
            for k in 1..50 {
                let t = t_f + (t_l.min(sc.horizon) - t_f) * k as f64 / 50.0;
                let speed = path.velocity_at(t).norm();
                if (speed - a).abs() > EXACT_TOL * a.max(1.0) {
                    return Err(format!("arc speed {speed} vs control {a}"));
                }
                let off = (path.position_at(t).distance(sc.obstacle_center) - reach).abs();
                if off > EXACT_TOL * scale {
                    return Err(format!("left the obstacle mid-arc by {off:e}"));
                }
            }
        }
    }
    let geom = contact_geometry(sc).map_err(|e| e.to_string())?;
    let f = |x: &[f64]| single_cost_exact(sc, geom.as_ref(), x[0]);
    let own = f(&[a]);
    if (own - r.cost).abs() > 1e-7 * r.cost.max(1.0) {
        return Err(format!("reported J {} but evaluator gives {own}", r.cost));
    }
    let hi = (2.0 * f(&[0.0]) / (sc.tau * sc.horizon)).sqrt().max(2.0);
    let (at, grid) = grid_minimum(f, &[hi], 4001, 4);
    if r.cost > grid + GRID_TOL {
        return Err(format!(
            "grid beats solver: J {} at a = {a} vs {grid} at a = {}",
            r.cost, at[0]
        ));
    }
    Ok(())
}

pub fn check_corridor(sc: &CorridorScenario) -> Result<(), String> {
    let r = solve_scenario(&Scenario::Corridor(sc.clone()), Effort::Quadratic)
        .map_err(|e| e.to_string())?;
    let n = sc.len();
    let radii = sc.radii();
    let rho_at = |i: usize, t: f64| {
        sc.axis
            .dot(sc.destination - r.trajectories[i].position_at(t))
    };
    let scale = sc.rho[0].max(1.0);
    let advance: f64 = (0..n).map(|i| r.controls[i] * sc.speeds[i]).sum();
    let total0: f64 = sc.rho.iter().sum();
    let contact = match r.schedule {
        ContactSchedule::Two(s) => vec![s.t_f12],
        ContactSchedule::Three(s) => vec![s.t_f12, s.t_f23],
        ContactSchedule::Single(_) => return Err("wrong schedule kind".into()),
    };
    for t in sample_times(0.0, sc.horizon, sc.horizon / 1000.0) {
        for i in 0..n - 1 {
            let gap = rho_at(i, t) - rho_at(i + 1, t) - radii[i] - radii[i + 1];
            if gap < -GAP_TOL * scale {
                return Err(format!(
                    "overlap {gap:e} between {i} and {} at t = {t}",
                    i + 1
                ));
            }
            if let Some(tc) = contact[i] {
                if t >= tc && gap.abs() > EXACT_TOL * scale {
                    return Err(format!(
                        "pair {i} separated by {gap:e} after contact at t = {t}"
                    ));
                }
            }
        }
        let total: f64 = (0..n).map(|i| rho_at(i, t)).sum();
        if (total - (total0 - advance * t)).abs() > EXACT_TOL * scale {
            return Err(format!("total advance drifted at t = {t}"));
        }
    }
    if eta_min(&r.eta) < 0.0 {
        return Err("negative multiplier".into());
    }
    let f = |x: &[f64]| corridor_cost_exact(sc, x);
    let own = f(&r.controls);
    if (own - r.cost).abs() > 1e-7 * r.cost.max(1.0) {
        return Err(format!("reported J {} but evaluator gives {own}", r.cost));
    }
    let zero = vec![0.0; n];
    let hi = (2.0 * f(&zero) / (sc.tau * sc.horizon)).sqrt().max(2.0);
    let nodes = if n == 2 { 81 } else { 21 };
    let (at, grid) = grid_minimum(f, &vec![hi; n], nodes, 8);
    if r.cost > grid + GRID_TOL {
        return Err(format!(
            "grid beats solver: J {} at {:?} vs {grid} at {at:?}",
            r.cost, r.controls
        ));
    }
    Ok(())
}
