//! Time-indexed chains of straight and circular pieces.

use crate::geometry::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentKind {
    /// `start + velocity · (t - t0)`.
    Line { start: Vec2, velocity: Vec2 },
    /// Rotation of `start` about `center` at `angular_rate` rad per unit time,
    /// positive counter-clockwise.
    Arc {
        center: Vec2,
        start: Vec2,
        angular_rate: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn line(t0: f64, t1: f64, start: Vec2, velocity: Vec2) -> Self {
        Self {
            t0,
            t1,
            kind: SegmentKind::Line { start, velocity },
        }
    }

    pub fn arc(t0: f64, t1: f64, center: Vec2, start: Vec2, angular_rate: f64) -> Self {
        Self {
            t0,
            t1,
            kind: SegmentKind::Arc {
                center,
                start,
                angular_rate,
            },
        }
    }

    pub fn position_at(&self, t: f64) -> Vec2 {
        let dt = t - self.t0;
        match self.kind {
            SegmentKind::Line { start, velocity } => start + velocity * dt,
            SegmentKind::Arc {
                center,
                start,
                angular_rate,
            } => center + (start - center).rotated(angular_rate * dt),
        }
    }

    pub fn velocity_at(&self, t: f64) -> Vec2 {
        match self.kind {
            SegmentKind::Line { velocity, .. } => velocity,
            SegmentKind::Arc {
                center,
                angular_rate,
                ..
            } => (self.position_at(t) - center).perp() * angular_rate,
        }
    }

    pub fn end(&self) -> Vec2 {
        self.position_at(self.t1)
    }
}

/// One agent's path over `[0, T]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PiecewiseTrajectory {
    pub segments: Vec<Segment>,
}

impl PiecewiseTrajectory {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    /// Drops zero-length pieces, keeping at least one.
    pub fn from_pieces(pieces: impl IntoIterator<Item = Segment>) -> Self {
        let all: Vec<Segment> = pieces.into_iter().collect();
        let kept: Vec<Segment> = all.iter().copied().filter(|s| s.t1 > s.t0).collect();
        if kept.is_empty() {
            Self::new(all.into_iter().take(1).collect())
        } else {
            Self::new(kept)
        }
    }

    pub fn start_time(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.t0)
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t1)
    }

    fn segment_for(&self, t: f64) -> Option<&Segment> {
        let idx = self.segments.partition_point(|s| s.t1 < t);
        self.segments.get(idx).or_else(|| self.segments.last())
    }

    /// Position at `t`; times outside the covered span extrapolate the
    /// nearest piece.
    pub fn position_at(&self, t: f64) -> Vec2 {
        self.segment_for(t)
            .map_or_else(Vec2::zero, |s| s.position_at(t))
    }

    pub fn velocity_at(&self, t: f64) -> Vec2 {
        self.segment_for(t)
            .map_or_else(Vec2::zero, |s| s.velocity_at(t))
    }

    /// Uniform samples `0, dt, 2dt, …` up to and including the end time.
    pub fn sample(&self, dt: f64) -> Vec<(f64, Vec2)> {
        sample_times(self.start_time(), self.end_time(), dt)
            .into_iter()
            .map(|t| (t, self.position_at(t)))
            .collect()
    }

    /// Largest jump between consecutive pieces.
    pub fn max_joint_gap(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| w[0].end().distance(w[1].position_at(w[1].t0)))
            .fold(0.0, f64::max)
    }
}

/// `t0, t0 + dt, …` with the final time always included.
pub fn sample_times(t0: f64, t1: f64, dt: f64) -> Vec<f64> {
    if !(dt > 0.0) || !(t1 > t0) {
        return vec![t0];
    }
    let n = ((t1 - t0) / dt).floor() as usize;
    let mut out: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * dt).collect();
    if t1 - out[n] > 1e-12 * t1.abs().max(1.0) {
        out.push(t1);
    } else {
        out[n] = t1;
    }
    out
}
