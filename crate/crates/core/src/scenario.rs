//! Scenario documents, validation, the corridor axis reduction and the
//! solver report shape.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::trajectory::PiecewiseTrajectory;

const COLLINEAR_TOL: f64 = 1e-9;
const OVERLAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScenarioDoc {
    Single(SingleDoc),
    Corridor(CorridorDoc),
}

impl ScenarioDoc {
    fn kind(&self) -> &'static str {
        match self {
            ScenarioDoc::Single(_) => "single",
            ScenarioDoc::Corridor(_) => "corridor",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleDoc {
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub start: Option<[f64; 2]>,
    pub destination: Option<[f64; 2]>,
    pub obstacle: Option<ObstacleDoc>,
    pub agent_radius: Option<f64>,
    pub tau: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleDoc {
    pub center: Option<[f64; 2]>,
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorridorDoc {
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub destination: Option<[f64; 2]>,
    pub tau: Option<f64>,
    pub agents: Option<Vec<AgentDoc>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub start: Option<[f64; 2]>,
    pub radius: Option<f64>,
}

fn required<T>(value: Option<T>, field: &'static str) -> Result<T> {
    value.ok_or(Error::MissingField(field))
}

fn finite(value: f64, field: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(field))
    }
}

fn point(value: Option<[f64; 2]>, field: &'static str) -> Result<Vec2> {
    let [x, y] = required(value, field)?;
    Ok(Vec2::new(finite(x, field)?, finite(y, field)?))
}

fn positive(value: Option<f64>, field: &'static str) -> Result<f64> {
    let v = finite(required(value, field)?, field)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidValue {
            field,
            reason: format!("must be positive, got {v}"),
        })
    }
}

fn non_negative(value: Option<f64>, field: &'static str) -> Result<f64> {
    let v = finite(required(value, field)?, field)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidValue {
            field,
            reason: format!("must be non-negative, got {v}"),
        })
    }
}

/// One agent, one circular obstacle.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleScenario {
    pub horizon: f64,
    pub start: Vec2,
    pub destination: Vec2,
    pub obstacle_center: Vec2,
    pub obstacle_radius: f64,
    pub agent_radius: f64,
    pub tau: f64,
    /// `‖destination - start‖ / T`.
    pub speed: f64,
}

impl SingleScenario {
    pub fn new(
        horizon: f64,
        start: Vec2,
        destination: Vec2,
        obstacle_center: Vec2,
        obstacle_radius: f64,
        agent_radius: f64,
        tau: f64,
    ) -> Result<Self> {
        Self::from_doc(SingleDoc {
            horizon: Some(horizon),
            start: Some(start.into()),
            destination: Some(destination.into()),
            obstacle: Some(ObstacleDoc {
                center: Some(obstacle_center.into()),
                radius: Some(obstacle_radius),
            }),
            agent_radius: Some(agent_radius),
            tau: Some(tau),
        })
    }

    fn from_doc(doc: SingleDoc) -> Result<Self> {
        let horizon = positive(doc.horizon, "T")?;
        let start = point(doc.start, "start")?;
        let destination = point(doc.destination, "destination")?;
        let obstacle = required(doc.obstacle, "obstacle")?;
        let obstacle_center = point(obstacle.center, "obstacle.center")?;
        let obstacle_radius = positive(obstacle.radius, "obstacle.radius")?;
        let agent_radius = positive(doc.agent_radius, "agent_radius")?;
        let tau = non_negative(doc.tau, "tau")?;

        let required_gap = agent_radius + obstacle_radius;
        let distance = start.distance(obstacle_center);
        if distance < required_gap {
            return Err(Error::InfeasibleStart {
                distance,
                required: required_gap,
            });
        }
        if destination.distance(obstacle_center) <= required_gap {
            return Err(Error::DestinationInsideObstacle);
        }
        Ok(Self {
            horizon,
            start,
            destination,
            obstacle_center,
            obstacle_radius,
            agent_radius,
            tau,
            speed: destination.distance(start) / horizon,
        })
    }

    pub fn to_doc(&self) -> SingleDoc {
        SingleDoc {
            horizon: Some(self.horizon),
            start: Some(self.start.into()),
            destination: Some(self.destination.into()),
            obstacle: Some(ObstacleDoc {
                center: Some(self.obstacle_center.into()),
                radius: Some(self.obstacle_radius),
            }),
            agent_radius: Some(self.agent_radius),
            tau: Some(self.tau),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioDoc::Single(self.to_doc()))
            .expect("scenario documents always serialize")
    }

    /// Inflated obstacle radius `L + r`.
    pub fn contact_radius(&self) -> f64 {
        self.agent_radius + self.obstacle_radius
    }

    /// `‖destination - start‖`.
    pub fn distance(&self) -> f64 {
        self.destination.distance(self.start)
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self {
            tau,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorridorAgent {
    pub start: Vec2,
    pub radius: f64,
}

/// Two or three agents on a common line through the destination, indexed
/// farthest first.
#[derive(Clone, Debug, PartialEq)]
pub struct CorridorScenario {
    pub horizon: f64,
    pub destination: Vec2,
    pub tau: f64,
    pub agents: Vec<CorridorAgent>,
    /// Unit vector pointing from the agents toward the destination.
    pub axis: Vec2,
    /// Signed distances to the destination along `axis`, decreasing.
    pub rho: Vec<f64>,
    /// `rho[i] / T`.
    pub speeds: Vec<f64>,
}

impl CorridorScenario {
    pub fn new(
        horizon: f64,
        destination: Vec2,
        tau: f64,
        agents: &[CorridorAgent],
    ) -> Result<Self> {
        Self::from_doc(CorridorDoc {
            horizon: Some(horizon),
            destination: Some(destination.into()),
            tau: Some(tau),
            agents: Some(
                agents
                    .iter()
                    .map(|a| AgentDoc {
                        start: Some(a.start.into()),
                        radius: Some(a.radius),
                    })
                    .collect(),
            ),
        })
    }

    fn from_doc(doc: CorridorDoc) -> Result<Self> {
        let horizon = positive(doc.horizon, "T")?;
        let destination = point(doc.destination, "destination")?;
        let tau = non_negative(doc.tau, "tau")?;
        let raw = required(doc.agents, "agents")?;
        if !(2..=3).contains(&raw.len()) {
            return Err(Error::BadAgentCount(raw.len()));
        }
        let mut agents = Vec::with_capacity(raw.len());
        for a in raw {
            agents.push(CorridorAgent {
                start: point(a.start, "agents.start")?,
                radius: positive(a.radius, "agents.radius")?,
            });
        }
        let starts: Vec<Vec2> = agents.iter().map(|a| a.start).collect();
        let (axis, rho) = corridor_reduce(&starts, destination)?;

        let mut order: Vec<usize> = (0..agents.len()).collect();
        order.sort_by(|&i, &j| rho[j].total_cmp(&rho[i]));
        let agents: Vec<CorridorAgent> = order.iter().map(|&i| agents[i]).collect();
        let rho: Vec<f64> = order.iter().map(|&i| rho[i]).collect();

        if let Some(&last) = rho.last() {
            if !(last > 0.0) {
                return Err(Error::InvalidValue {
                    field: "agents.start",
                    reason: "every agent must lie strictly before the destination on one side"
                        .into(),
                });
            }
        }
        let scale = rho[0].max(1.0);
        for i in 0..rho.len() - 1 {
            let gap = rho[i] - rho[i + 1] - (agents[i].radius + agents[i + 1].radius);
            if gap < -OVERLAP_TOL * scale {
                return Err(Error::InitialOverlap {
                    first: i + 1,
                    second: i + 2,
                    gap,
                });
            }
        }
        let speeds = rho.iter().map(|r| r / horizon).collect();
        Ok(Self {
            horizon,
            destination,
            tau,
            agents,
            axis,
            rho,
            speeds,
        })
    }

    pub fn to_doc(&self) -> CorridorDoc {
        CorridorDoc {
            horizon: Some(self.horizon),
            destination: Some(self.destination.into()),
            tau: Some(self.tau),
            agents: Some(
                self.agents
                    .iter()
                    .map(|a| AgentDoc {
                        start: Some(a.start.into()),
                        radius: Some(a.radius),
                    })
                    .collect(),
            ),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioDoc::Corridor(self.to_doc()))
            .expect("scenario documents always serialize")
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.radius).collect()
    }

    /// Half the initial slack between agents `i` and `i + 1` (0-based),
    /// `½(ρ_i - ρ_{i+1} - L_i - L_{i+1})`, clamped at zero.
    pub fn lambda(&self, i: usize) -> f64 {
        let slack =
            self.rho[i] - self.rho[i + 1] - self.agents[i].radius - self.agents[i + 1].radius;
        (0.5 * slack).max(0.0)
    }

    /// Planar point at signed axis coordinate `rho`.
    pub fn point_at(&self, rho: f64) -> Vec2 {
        self.destination - self.axis * rho
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self {
            tau,
            ..self.clone()
        }
    }
}

/// Axis from the agents toward `destination` and the signed coordinates
/// `ρ_i = ⟨destination - x_i, e⟩`.
pub fn corridor_reduce(positions: &[Vec2], destination: Vec2) -> Result<(Vec2, Vec<f64>)> {
    let farthest = positions
        .iter()
        .copied()
        .max_by(|a, b| a.distance(destination).total_cmp(&b.distance(destination)));
    let Some(farthest) = farthest else {
        return Ok((Vec2::new(1.0, 0.0), Vec::new()));
    };
    let reach = farthest.distance(destination);
    if reach == 0.0 {
        return Ok((Vec2::new(1.0, 0.0), vec![0.0; positions.len()]));
    }
    let axis = (destination - farthest) * (1.0 / reach);
    let scale = reach.max(1.0);
    let mut rho = Vec::with_capacity(positions.len());
    for &p in positions {
        let offset = destination - p;
        let deviation = offset.cross(axis).abs();
        if deviation > COLLINEAR_TOL * scale {
            return Err(Error::NotCollinear { deviation });
        }
        rho.push(offset.dot(axis));
    }
    Ok((axis, rho))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    Single(SingleScenario),
    Corridor(CorridorScenario),
}

impl Scenario {
    pub fn tau(&self) -> f64 {
        match self {
            Scenario::Single(s) => s.tau,
            Scenario::Corridor(c) => c.tau,
        }
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        match self {
            Scenario::Single(s) => Scenario::Single(s.with_tau(tau)),
            Scenario::Corridor(c) => Scenario::Corridor(c.with_tau(tau)),
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            Scenario::Single(s) => s.to_json(),
            Scenario::Corridor(c) => c.to_json(),
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    match serde_json::from_str::<ScenarioDoc>(text)? {
        ScenarioDoc::Single(doc) => SingleScenario::from_doc(doc).map(Scenario::Single),
        ScenarioDoc::Corridor(doc) => CorridorScenario::from_doc(doc).map(Scenario::Corridor),
    }
}

pub fn parse_single(text: &str) -> Result<SingleScenario> {
    match serde_json::from_str::<ScenarioDoc>(text)? {
        ScenarioDoc::Single(doc) => SingleScenario::from_doc(doc),
        other => Err(Error::WrongKind {
            expected: "single",
            found: other.kind().into(),
        }),
    }
}

pub fn parse_corridor(text: &str) -> Result<CorridorScenario> {
    match serde_json::from_str::<ScenarioDoc>(text)? {
        ScenarioDoc::Corridor(doc) => CorridorScenario::from_doc(doc),
        other => Err(Error::WrongKind {
            expected: "corridor",
            found: other.kind().into(),
        }),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SingleSchedule {
    pub t_f: Option<f64>,
    pub t_l: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TwoAgentSchedule {
    pub t_f12: Option<f64>,
}

/// Which pair touches first in the three-agent corridor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ThreeCase {
    Pair12First,
    Pair23First,
    Simultaneous,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeAgentSchedule {
    pub t_f12: Option<f64>,
    pub t_f23: Option<f64>,
    pub t_f123: Option<f64>,
    pub case: ThreeCase,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ContactSchedule {
    Single(SingleSchedule),
    Two(TwoAgentSchedule),
    Three(ThreeAgentSchedule),
}

/// Multipliers at time `t`, one entry per constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaSample {
    pub t: f64,
    pub values: Vec<f64>,
}

/// Which closed-form branch produced the optimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Nobody touches anything before `T`.
    NoContact,
    /// The agent slides along the obstacle and leaves before `T`.
    ObstacleArc,
    /// Agents 1 and 2 meet and travel together.
    PairContact,
    /// All three agents end up in one block.
    TripleContact,
    /// Agents 1 and 2 meet, agent 3 stays clear.
    Pair12Only,
    /// Agents 2 and 3 meet, agent 1 stays clear.
    Pair23Only,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub tau: f64,
    pub controls: Vec<f64>,
    pub cost: f64,
    pub schedule: ContactSchedule,
    pub trajectories: Vec<PiecewiseTrajectory>,
    pub eta: Vec<EtaSample>,
    pub branch: Branch,
    /// Set for branches the closed forms do not spell out.
    pub extended: bool,
}
