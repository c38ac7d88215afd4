//! Catching-up discretization of the perturbed sweeping process,
//! `x_{k+1} = Π_C(x_k + h U(x_k))`, for any number of disk agents and
//! circular obstacles.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{unit_direction, Vec2};
use crate::scenario::{CorridorScenario, SingleScenario};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Obstacle {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimAgent {
    pub start: Vec2,
    pub radius: f64,
    /// Nominal speed `s_i`; the desired speed is `a_i s_i`.
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimWorld {
    pub agents: Vec<SimAgent>,
    pub obstacles: Vec<Obstacle>,
    pub destination: Vec2,
    pub horizon: f64,
    pub tau: f64,
}

impl SimWorld {
    pub fn from_single(sc: &SingleScenario) -> Self {
        Self {
            agents: vec![SimAgent {
                start: sc.start,
                radius: sc.agent_radius,
                speed: sc.speed,
            }],
            obstacles: vec![Obstacle {
                center: sc.obstacle_center,
                radius: sc.obstacle_radius,
            }],
            destination: sc.destination,
            horizon: sc.horizon,
            tau: sc.tau,
        }
    }

    pub fn from_corridor(sc: &CorridorScenario) -> Self {
        Self {
            agents: sc
                .agents
                .iter()
                .zip(&sc.speeds)
                .map(|(a, &speed)| SimAgent {
                    start: a.start,
                    radius: a.radius,
                    speed,
                })
                .collect(),
            obstacles: Vec::new(),
            destination: sc.destination,
            horizon: sc.horizon,
            tau: sc.tau,
        }
    }

    pub fn initial(&self) -> Vec<Vec2> {
        self.agents.iter().map(|a| a.start).collect()
    }

    /// Agent–obstacle constraints (agent-major), then agent pairs in
    /// lexicographic order.
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut out = Vec::new();
        for agent in 0..self.agents.len() {
            for obstacle in 0..self.obstacles.len() {
                out.push(Constraint::Obstacle { agent, obstacle });
            }
        }
        for i in 0..self.agents.len() {
            for j in i + 1..self.agents.len() {
                out.push(Constraint::Pair(i, j));
            }
        }
        out
    }

    /// Signed distance `D` of one constraint.
    pub fn gap(&self, config: &[Vec2], c: Constraint) -> f64 {
        match c {
            Constraint::Obstacle { agent, obstacle } => {
                let o = self.obstacles[obstacle];
                config[agent].distance(o.center) - (o.radius + self.agents[agent].radius)
            }
            Constraint::Pair(i, j) => {
                config[i].distance(config[j]) - (self.agents[i].radius + self.agents[j].radius)
            }
        }
    }

    pub fn min_gap(&self, config: &[Vec2]) -> f64 {
        self.constraints()
            .into_iter()
            .map(|c| self.gap(config, c))
            .fold(f64::INFINITY, f64::min)
    }

    fn check_controls(&self, controls: &[f64]) -> Result<()> {
        if controls.len() != self.agents.len() {
            return Err(Error::ControlCount {
                expected: self.agents.len(),
                found: controls.len(),
            });
        }
        if let Some(&bad) = controls.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
            return Err(Error::NonPositiveControl(bad));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    Obstacle { agent: usize, obstacle: usize },
    Pair(usize, usize),
}

/// Speed of an agent sliding along an obstacle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContactSpeed {
    /// Plain catching-up: the tangential part of `U` survives.
    Projected,
    /// The agent turns about the obstacle at speed `a` (the closed forms'
    /// normalization).
    Normalized,
}

/// How the desired direction evolves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadingPolicy {
    /// Always aim at the destination.
    Retarget,
    /// Keep the current heading except while touching an obstacle, where
    /// the agent re-aims at the destination every step.
    HoldUntilContact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub step: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Record every `stride`-th step (the final state is always kept).
    pub stride: usize,
    pub contact_speed: ContactSpeed,
    pub heading: HeadingPolicy,
}

impl SimConfig {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            max_iterations: 50,
            tolerance: 1e-10,
            stride: 1,
            contact_speed: ContactSpeed::Normalized,
            heading: HeadingPolicy::HoldUntilContact,
        }
    }

    pub fn with_stride(self, stride: usize) -> Self {
        Self { stride, ..self }
    }
}

/// `U_i = -a_i s_i (x_i - x_des)/‖x_i - x_des‖`, zero at the destination.
pub fn desired_velocity(config: &[Vec2], controls: &[f64], world: &SimWorld) -> Vec<Vec2> {
    config
        .iter()
        .zip(controls)
        .zip(&world.agents)
        .map(|((&x, &a), agent)| {
            unit_direction(world.destination, x)
                .map(|d| d * (a * agent.speed))
                .unwrap_or_else(|_| Vec2::zero())
        })
        .collect()
}

/// Result of one projection: the admissible configuration and the total
/// displacement applied through each constraint (per agent for pairs).
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub config: Vec<Vec2>,
    pub displacement: Vec<f64>,
}

/// Cyclic constraint correction: obstacles push radially, pairs split the
/// overlap equally along their center line.
pub fn project_admissible(
    config: &[Vec2],
    world: &SimWorld,
    cfg: &SimConfig,
) -> Result<Projection> {
    let constraints = world.constraints();
    let mut x = config.to_vec();
    let mut displacement = vec![0.0; constraints.len()];
    let mut violation = f64::INFINITY;
    for _ in 0..cfg.max_iterations.max(1) {
        for (k, &c) in constraints.iter().enumerate() {
            let gap = world.gap(&x, c);
            if gap >= 0.0 {
                continue;
            }
            match c {
                Constraint::Obstacle { agent, obstacle } => {
                    let o = world.obstacles[obstacle];
                    let reach = o.radius + world.agents[agent].radius;
                    let n = unit_direction(x[agent], o.center).unwrap_or(Vec2::new(0.0, 1.0));
                    x[agent] = o.center + n * reach;
                    displacement[k] += -gap;
                }
                Constraint::Pair(i, j) => {
                    let n = unit_direction(x[i], x[j]).unwrap_or(Vec2::new(1.0, 0.0));
                    let half = -0.5 * gap;
                    x[i] += n * half;
                    x[j] -= n * half;
                    displacement[k] += half;
                }
            }
        }
        violation = constraints
            .iter()
            .map(|&c| -world.gap(&x, c))
            .fold(0.0, f64::max);
        if violation <= cfg.tolerance {
            return Ok(Projection {
                config: x,
                displacement,
            });
        }
    }
    Err(Error::ProjectionStalled {
        violation,
        iterations: cfg.max_iterations,
    })
}

/// One plain step `Π_C(x + h U(x))`.
pub fn catching_up_step(
    config: &[Vec2],
    controls: &[f64],
    world: &SimWorld,
    h: f64,
    cfg: &SimConfig,
) -> Result<Vec<Vec2>> {
    let u = desired_velocity(config, controls, world);
    let moved: Vec<Vec2> = config.iter().zip(&u).map(|(&x, &v)| x + v * h).collect();
    Ok(project_admissible(&moved, world, cfg)?.config)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimTrace {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<Vec2>>,
    /// Per recorded step, one flag per constraint.
    pub active: Vec<Vec<bool>>,
    /// Recovered multipliers per recorded step and constraint.
    pub eta: Vec<Vec<f64>>,
    /// `∫ τ/2 Σ a_i² dt`.
    pub running_cost: f64,
}

impl SimTrace {
    pub fn final_positions(&self) -> &[Vec2] {
        self.positions.last().map_or(&[], Vec::as_slice)
    }

    /// Linear interpolation of agent `i` at time `t`.
    pub fn position_at(&self, agent: usize, t: f64) -> Vec2 {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            return self.positions[0][agent];
        }
        if k >= self.times.len() {
            return self.positions[self.times.len() - 1][agent];
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
        self.positions[k - 1][agent].lerp(self.positions[k][agent], w)
    }
}

const ON_CIRCLE_TOL: f64 = 1e-9;
const ACTIVE_TOL: f64 = 1e-9;

fn touching_obstacle(world: &SimWorld, agent: usize, x: Vec2) -> Option<usize> {
    world.obstacles.iter().position(|o| {
        let reach = o.radius + world.agents[agent].radius;
        (x.distance(o.center) - reach).abs() <= ON_CIRCLE_TOL * reach
    })
}

/// Integrates from `t = 0` to `T` with constant controls.
pub fn simulate(world: &SimWorld, controls: &[f64], cfg: &SimConfig) -> Result<SimTrace> {
    world.check_controls(controls)?;
    if !(cfg.step > 0.0) || cfg.step > world.horizon / 10.0 {
        return Err(Error::InvalidValue {
            field: "h",
            reason: format!("step must lie in (0, T/10], got {}", cfg.step),
        });
    }
    let steps = (world.horizon / cfg.step).round().max(1.0) as usize;
    let h = world.horizon / steps as f64;
    let stride = cfg.stride.max(1);
    let constraints = world.constraints();
    let n_obstacle = world.agents.len() * world.obstacles.len();

    let mut x = world.initial();
    let mut heading: Vec<Vec2> = x
        .iter()
        .map(|&p| unit_direction(world.destination, p).unwrap_or_else(|_| Vec2::zero()))
        .collect();
    let effort: f64 = controls.iter().map(|a| a * a).sum::<f64>() * 0.5 * world.tau;

    let mut trace = SimTrace::default();
    trace.times.push(0.0);
    trace.positions.push(x.clone());
    trace.active.push(
        constraints
            .iter()
            .map(|&c| world.gap(&x, c) <= ACTIVE_TOL)
            .collect(),
    );
    trace.eta.push(vec![0.0; constraints.len()]);

    for k in 1..=steps {
        let mut eta = vec![0.0; constraints.len()];
        let mut moved = x.clone();
        for i in 0..x.len() {
            let contact = touching_obstacle(world, i, x[i]);
            let aim = unit_direction(world.destination, x[i]).unwrap_or_else(|_| Vec2::zero());
            let dir = match cfg.heading {
                HeadingPolicy::Retarget => aim,
                HeadingPolicy::HoldUntilContact => {
                    if contact.is_some() {
                        heading[i] = aim;
                    }
                    heading[i]
                }
            };
            let u = dir * (controls[i] * world.agents[i].speed);
            let slide = match (cfg.contact_speed, contact) {
                (ContactSpeed::Normalized, Some(o)) => {
                    let center = world.obstacles[o].center;
                    let n = unit_direction(x[i], center).unwrap_or(Vec2::new(0.0, 1.0));
                    let inward = u.dot(n);
                    (inward < 0.0).then_some((o, center, n, inward))
                }
                _ => None,
            };
            moved[i] = match slide {
                Some((o, center, n, inward)) => {
                    let reach = world.obstacles[o].radius + world.agents[i].radius;
                    let tangential = u.dot(n.perp());
                    let sense = if tangential.abs() <= 1e-12 * u.norm() || tangential > 0.0 {
                        1.0
                    } else {
                        -1.0
                    };
                    eta[i * world.obstacles.len() + o] = -inward;
                    center + (x[i] - center).rotated(sense * h * controls[i] / reach)
                }
                None => x[i] + u * h,
            };
        }
        let projection = project_admissible(&moved, world, cfg)?;
        for (k, d) in projection.displacement.iter().enumerate() {
            if k >= n_obstacle || eta[k] == 0.0 {
                eta[k] = d / h;
            }
        }
        x = projection.config;
        let t = k as f64 * h;
        if k % stride == 0 || k == steps {
            trace.times.push(if k == steps { world.horizon } else { t });
            trace.positions.push(x.clone());
            trace.active.push(
                constraints
                    .iter()
                    .zip(&eta)
                    .map(|(&c, &e)| e > 0.0 || world.gap(&x, c) <= ACTIVE_TOL)
                    .collect(),
            );
            trace.eta.push(eta);
        }
    }
    trace.running_cost = effort * world.horizon;
    Ok(trace)
}

/// `½ Σ ‖x_i(T) - x_des‖² + (τT/2) Σ a_i²`.
pub fn simulated_cost(trace: &SimTrace, world: &SimWorld, controls: &[f64]) -> f64 {
    let terminal: f64 = trace
        .final_positions()
        .iter()
        .map(|p| p.distance(world.destination).powi(2))
        .sum();
    0.5 * terminal + 0.5 * world.tau * world.horizon * controls.iter().map(|a| a * a).sum::<f64>()
}

const GRID_POINTS: usize = 101;

/// Multi-resolution grid search over a box: 101 points per dimension, then
/// zoom ×10 around the incumbent. Ties go to the lexicographically smaller
/// control vector.
pub fn grid_refine_search<F>(mut f: F, lo: &[f64], hi: &[f64], levels: usize) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = lo.len();
    let mut a = lo.to_vec();
    let mut b = hi.to_vec();
    let mut best = lo.to_vec();
    let mut best_f = f(&best);
    for _ in 0..levels.max(1) {
        let mut idx = vec![0usize; dim];
        let mut point = vec![0.0; dim];
        loop {
            for d in 0..dim {
                point[d] = a[d] + (b[d] - a[d]) * idx[d] as f64 / (GRID_POINTS - 1) as f64;
            }
            let v = f(&point);
            if v < best_f || (v == best_f && point < best) {
                best_f = v;
                best.copy_from_slice(&point);
            }
            let mut d = 0;
            while d < dim {
                idx[d] += 1;
                if idx[d] < GRID_POINTS {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == dim {
                break;
            }
        }
        for d in 0..dim {
            let half = (b[d] - a[d]) / 20.0;
            a[d] = (best[d] - half).max(lo[d]);
            b[d] = (best[d] + half).min(hi[d]);
        }
    }
    (best, best_f)
}

/// Grid search on the oracle's cost.
pub fn grid_refine_search_sim(
    world: &SimWorld,
    cfg: &SimConfig,
    lo: &[f64],
    hi: &[f64],
    levels: usize,
) -> (Vec<f64>, f64) {
    grid_refine_search(
        |a| {
            simulate(world, a, cfg)
                .map(|tr| simulated_cost(&tr, world, a))
                .unwrap_or(f64::INFINITY)
        },
        lo,
        hi,
        levels,
    )
}

/// `t, x1, y1, …, active_flags, eta_hat_1..k`.
pub fn write_trace_csv<W: Write>(trace: &SimTrace, out: &mut W) -> std::io::Result<()> {
    let n = trace.positions.first().map_or(0, Vec::len);
    let k = trace.eta.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    for i in 1..=n {
        header.push(format!("x{i}"));
        header.push(format!("y{i}"));
    }
    header.push("active_flags".into());
    header.extend((1..=k).map(|c| format!("eta_hat_{c}")));
    writeln!(out, "{}", header.join(","))?;
    for (s, t) in trace.times.iter().enumerate() {
        let mut row = vec![format!("{t:.9}")];
        for p in &trace.positions[s] {
            row.push(format!("{:.9}", p.x));
            row.push(format!("{:.9}", p.y));
        }
        row.push(
            trace.active[s]
                .iter()
                .map(|&f| if f { "1" } else { "0" })
                .collect::<Vec<_>>()
                .join(";"),
        );
        row.extend(trace.eta[s].iter().map(|e| format!("{e:.9}")));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
