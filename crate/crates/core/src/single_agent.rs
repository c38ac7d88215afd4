//! One agent steering around one circular obstacle with a constant control.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{
    angle_between_deg, circle_circle_intersections, segment_circle_first_hit, unit_direction,
    Orientation, Vec2,
};
use crate::optimizer::{argmin_quadratic, minimize_scalar, Quadratic1D};
use crate::scenario::{
    Branch, ContactSchedule, EtaSample, SingleScenario, SingleSchedule, SolveReport,
};
use crate::trajectory::{sample_times, PiecewiseTrajectory, Segment};

const TIE_TOL: f64 = 1e-9;
const SEARCH_TOL: f64 = 1e-12;
const ETA_SAMPLES: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleContactGeometry {
    pub mu: f64,
    pub contact_point: Vec2,
    pub leave_point: Vec2,
    /// Degrees.
    pub theta: f64,
    /// `μ ‖x_des - x⁰‖`.
    pub pre_contact_distance: f64,
    pub orientation: Orientation,
}

impl SingleContactGeometry {
    /// Length of the contact arc, `π θ (L + r) / 180`.
    pub fn arc_length(&self, sc: &SingleScenario) -> f64 {
        PI * self.theta * sc.contact_radius() / 180.0
    }
}

/// Where the agent first meets the inflated obstacle and where it peels off
/// toward the destination. `None` when the straight path stays clear.
pub fn contact_geometry(sc: &SingleScenario) -> Result<Option<SingleContactGeometry>> {
    let radius = sc.contact_radius();
    let center = sc.obstacle_center;
    let dest = sc.destination;
    let thales_radius = 0.5 * dest.distance(center);
    if thales_radius * 2.0 <= radius {
        return Err(Error::DestinationInsideObstacle);
    }
    if sc.start == dest {
        return Ok(None);
    }
    let Some(mu) = segment_circle_first_hit(sc.start, dest, center, radius) else {
        return Ok(None);
    };
    let contact_point = sc.start.lerp(dest, mu);
    // a path that only grazes the disk, or starts on it heading away, never pushes
    if (dest - sc.start).dot(contact_point - center) >= 0.0 {
        return Ok(None);
    }

    let thales_center = (center + dest) * 0.5;
    let candidates = circle_circle_intersections(center, radius, thales_center, thales_radius)?;
    let radial = contact_point - center;
    let scale = radius.max(dest.distance(sc.start));
    let leave_point = match candidates.as_slice() {
        [] => return Err(Error::DestinationInsideObstacle),
        [only] => *only,
        [p, q, ..] => {
            let dp = p.distance(contact_point);
            let dq = q.distance(contact_point);
            if (dp - dq).abs() <= TIE_TOL * scale {
                if radial.cross(*p - center) >= 0.0 {
                    *p
                } else {
                    *q
                }
            } else if dp < dq {
                *p
            } else {
                *q
            }
        }
    };
    let theta = angle_between_deg(radial, leave_point - center)?;
    let orientation = Orientation::from_sign(radial.cross(leave_point - center));
    Ok(Some(SingleContactGeometry {
        mu,
        contact_point,
        leave_point,
        theta,
        pre_contact_distance: mu * sc.distance(),
        orientation,
    }))
}

pub fn contact_times(
    sc: &SingleScenario,
    geom: &SingleContactGeometry,
    a: f64,
) -> Result<SingleSchedule> {
    if !(a > 0.0) {
        return Err(Error::NonPositiveControl(a));
    }
    let t_f = geom.pre_contact_distance / (sc.speed * a);
    let t_l = t_f + geom.arc_length(sc) / a;
    Ok(SingleSchedule {
        t_f: Some(t_f),
        t_l: Some(t_l),
    })
}

/// Smallest control for which the agent leaves the obstacle by `T`.
pub fn control_lower_bound(sc: &SingleScenario, geom: &SingleContactGeometry) -> f64 {
    let approach = geom.contact_point.distance(sc.start);
    let approach_time = if approach == 0.0 {
        0.0
    } else {
        approach / sc.speed
    };
    (approach_time + geom.arc_length(sc)) / sc.horizon
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostBranch {
    /// Never touches the obstacle before `T`.
    Straight,
    /// Leaves the obstacle before `T`.
    Arc,
    /// Still on the obstacle at `T`.
    MidArc,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostEval {
    pub value: f64,
    pub branch: CostBranch,
}

fn effort(sc: &SingleScenario, a: f64) -> f64 {
    0.5 * sc.tau * sc.horizon * a * a
}

/// `c2 a² + c1 a + c0` for `½(reach - sTa)² + τTa²/2`.
fn branch_quadratic(sc: &SingleScenario, reach: f64, lo: f64, hi: f64) -> Result<Quadratic1D> {
    let st = sc.speed * sc.horizon;
    Quadratic1D::new(
        0.5 * (st * st + sc.tau * sc.horizon),
        -st * reach,
        0.5 * reach * reach,
        lo,
        hi,
    )
}

/// Effective path length of the arc branch: `‖x_l - x_des‖ + s·arc + d(μ)`.
fn arc_reach(sc: &SingleScenario, geom: &SingleContactGeometry) -> f64 {
    geom.leave_point.distance(sc.destination)
        + sc.speed * geom.arc_length(sc)
        + geom.pre_contact_distance
}

/// Position at `T` for a control that is still sliding along the obstacle.
fn mid_arc_end(sc: &SingleScenario, geom: &SingleContactGeometry, a: f64) -> Vec2 {
    let t_f = geom.pre_contact_distance / (sc.speed * a);
    let turn = geom.orientation.sign::<f64>() * a * (sc.horizon - t_f) / sc.contact_radius();
    sc.obstacle_center + (geom.contact_point - sc.obstacle_center).rotated(turn)
}

pub fn cost(sc: &SingleScenario, geom: Option<&SingleContactGeometry>, a: f64) -> Result<CostEval> {
    if !(a >= 0.0) {
        return Err(Error::NonPositiveControl(a));
    }
    let travelled = sc.speed * a * sc.horizon;
    match geom {
        Some(g) if travelled > g.pre_contact_distance => {
            if a >= control_lower_bound(sc, g) {
                let miss = arc_reach(sc, g) - travelled;
                Ok(CostEval {
                    value: 0.5 * miss * miss + effort(sc, a),
                    branch: CostBranch::Arc,
                })
            } else {
                let miss = mid_arc_end(sc, g, a).distance(sc.destination);
                Ok(CostEval {
                    value: 0.5 * miss * miss + effort(sc, a),
                    branch: CostBranch::MidArc,
                })
            }
        }
        _ => {
            let miss = sc.distance() - travelled;
            Ok(CostEval {
                value: 0.5 * miss * miss + effort(sc, a),
                branch: CostBranch::Straight,
            })
        }
    }
}

/// Piecewise path: straight approach, arc about the obstacle, straight exit.
pub fn trajectory(
    sc: &SingleScenario,
    geom: Option<&SingleContactGeometry>,
    a: f64,
) -> Result<PiecewiseTrajectory> {
    if !(a >= 0.0) {
        return Err(Error::NonPositiveControl(a));
    }
    let t_end = sc.horizon;
    let heading =
        |from: Vec2| unit_direction(sc.destination, from).unwrap_or_else(|_| Vec2::zero());
    let free_speed = sc.speed * a;
    let geom = match geom {
        Some(g) if free_speed * t_end > g.pre_contact_distance => g,
        _ => {
            return Ok(PiecewiseTrajectory::new(vec![Segment::line(
                0.0,
                t_end,
                sc.start,
                heading(sc.start) * free_speed,
            )]))
        }
    };
    let schedule = contact_times(sc, geom, a)?;
    let (t_f, t_l) = (schedule.t_f.unwrap(), schedule.t_l.unwrap());
    let t_l = t_l.min(t_end);
    let rate = geom.orientation.sign::<f64>() * a / sc.contact_radius();
    Ok(PiecewiseTrajectory::from_pieces([
        Segment::line(0.0, t_f, sc.start, heading(sc.start) * free_speed),
        Segment::arc(t_f, t_l, sc.obstacle_center, geom.contact_point, rate),
        Segment::line(
            t_l,
            t_end,
            geom.leave_point,
            heading(geom.leave_point) * free_speed,
        ),
    ]))
}

/// Contact multiplier: the inward part of the desired velocity while the
/// agent slides along the obstacle, zero otherwise.
pub fn eta_at(sc: &SingleScenario, geom: Option<&SingleContactGeometry>, a: f64, t: f64) -> f64 {
    let Some(g) = geom else {
        return 0.0;
    };
    let Ok(schedule) = contact_times(sc, g, a) else {
        return 0.0;
    };
    let (t_f, t_l) = (schedule.t_f.unwrap(), schedule.t_l.unwrap());
    if t < t_f || t > t_l {
        return 0.0;
    }
    let rate = g.orientation.sign::<f64>() * a / sc.contact_radius();
    let x = sc.obstacle_center + (g.contact_point - sc.obstacle_center).rotated(rate * (t - t_f));
    let (Ok(to_dest), Ok(normal)) = (
        unit_direction(x, sc.destination),
        unit_direction(x, sc.obstacle_center),
    ) else {
        return 0.0;
    };
    (sc.speed * a * to_dest.dot(normal)).max(0.0)
}

fn eta_samples(
    sc: &SingleScenario,
    geom: Option<&SingleContactGeometry>,
    a: f64,
) -> Vec<EtaSample> {
    let mut times = sample_times(0.0, sc.horizon, sc.horizon / ETA_SAMPLES);
    if let Some(g) = geom {
        if let Ok(s) = contact_times(sc, g, a) {
            times.extend(s.t_f.into_iter().chain(s.t_l).filter(|&t| t <= sc.horizon));
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
        .into_iter()
        .map(|t| EtaSample {
            t,
            values: vec![eta_at(sc, geom, a, t)],
        })
        .collect()
}

/// Optimal constant control over the straight, mid-arc and arc branches.
pub fn solve(sc: &SingleScenario) -> Result<SolveReport> {
    let geom = contact_geometry(sc)?;
    let st = sc.speed * sc.horizon;
    if st == 0.0 && sc.tau == 0.0 {
        return report(sc, geom.as_ref(), 0.0, 0.0, false);
    }
    let (mut a, mut j, mut arc) = match &geom {
        None => {
            let q = branch_quadratic(sc, sc.distance(), 0.0, f64::INFINITY)?;
            let (a, j) = argmin_quadratic(&q)?;
            (a, j, false)
        }
        Some(g) => {
            let hi = g.pre_contact_distance / st;
            let (a, j) = argmin_quadratic(&branch_quadratic(sc, sc.distance(), 0.0, hi)?)?;
            (a, j, false)
        }
    };
    if let Some(g) = &geom {
        let lo = control_lower_bound(sc, g);
        let (a2, j2) =
            argmin_quadratic(&branch_quadratic(sc, arc_reach(sc, g), lo, f64::INFINITY)?)?;
        if j2 < j {
            a = a2;
            j = j2;
            arc = true;
        }
        let entry = g.pre_contact_distance / st;
        if lo > entry {
            let mid = |x: f64| {
                0.5 * mid_arc_end(sc, g, x).distance(sc.destination).powi(2) + effort(sc, x)
            };
            let (a3, j3) = minimize_scalar(mid, entry, lo, SEARCH_TOL);
            if j3 < j * (1.0 - TIE_TOL) {
                a = a3;
                j = j3;
                arc = true;
            }
        }
    }
    report(sc, geom.as_ref(), a, j, arc)
}

fn report(
    sc: &SingleScenario,
    geom: Option<&SingleContactGeometry>,
    a: f64,
    j: f64,
    arc: bool,
) -> Result<SolveReport> {
    let (schedule, geom_used) = match geom {
        Some(g) if arc => {
            let mut s = contact_times(sc, g, a)?;
            s.t_l = s.t_l.filter(|&t| t <= sc.horizon * (1.0 + TIE_TOL));
            (s, Some(g))
        }
        _ => (SingleSchedule::default(), None),
    };
    let path = trajectory(sc, geom_used, a)?;
    Ok(SolveReport {
        tau: sc.tau,
        controls: vec![a],
        cost: j,
        schedule: ContactSchedule::Single(schedule),
        trajectories: vec![path],
        eta: eta_samples(sc, geom_used, a),
        branch: if arc {
            Branch::ObstacleArc
        } else {
            Branch::NoContact
        },
        extended: arc && schedule.t_l.is_none(),
    })
}
