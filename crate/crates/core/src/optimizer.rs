//! Deterministic minimizers used by the analytic solvers.
//!
//! Ties are always broken toward the smaller control.

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::error::{Error, Result};

/// `c2 x² + c1 x + c0` restricted to `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadratic1D<T = f64> {
    pub c2: T,
    pub c1: T,
    pub c0: T,
    pub lo: T,
    /// May be `T::infinity()`.
    pub hi: T,
}

impl<T: Float> Quadratic1D<T> {
    pub fn new(c2: T, c1: T, c0: T, lo: T, hi: T) -> Result<Self> {
        if !(c2 > T::zero()) {
            return Err(Error::NotStrictlyConvex(c2.to_f64().unwrap_or(f64::NAN)));
        }
        if !(lo <= hi) {
            return Err(Error::EmptyInterval {
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { c2, c1, c0, lo, hi })
    }

    pub fn on_half_line(c2: T, c1: T, c0: T, lo: T) -> Result<Self> {
        Self::new(c2, c1, c0, lo, T::infinity())
    }

    pub fn eval(&self, x: T) -> T {
        (self.c2 * x + self.c1) * x + self.c0
    }
}

/// Clamped vertex of a strictly convex quadratic and its value.
pub fn argmin_quadratic<T: Float>(q: &Quadratic1D<T>) -> Result<(T, T)> {
    if !(q.lo <= q.hi) {
        return Err(Error::EmptyInterval {
            lo: q.lo.to_f64().unwrap_or(f64::NAN),
            hi: q.hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    let two = T::one() + T::one();
    let vertex = -q.c1 / (two * q.c2);
    let x = vertex.max(q.lo).min(q.hi);
    Ok((x, q.eval(x)))
}

const SCAN_POINTS: usize = 1001;

/// Golden-section refinement after a 1001-point bracketing scan.
///
/// Returns the lowest point seen; on equal values the smaller abscissa wins,
/// so a constant function returns `lo`.
pub fn minimize_scalar<T, F>(mut f: F, lo: T, hi: T, tol: T) -> (T, T)
where
    T: Float,
    F: FnMut(T) -> T,
{
    if !(hi > lo) {
        return (lo, f(lo));
    }
    let n = T::from(SCAN_POINTS - 1).unwrap();
    let at = |i: usize| -> T {
        if i == SCAN_POINTS - 1 {
            hi
        } else {
            lo + (hi - lo) * T::from(i).unwrap() / n
        }
    };
    let mut best_i = 0;
    let mut best_f = f(lo);
    for i in 1..SCAN_POINTS {
        let fi = f(at(i));
        if fi < best_f {
            best_f = fi;
            best_i = i;
        }
    }
    let mut best_x = at(best_i);
    let mut a = at(best_i.saturating_sub(1));
    let mut b = at((best_i + 1).min(SCAN_POINTS - 1));

    let inv_phi = (T::from(5.0).unwrap().sqrt() - T::one()) / (T::one() + T::one());
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    let mut guard = 0;
    while b - a > tol && guard < 500 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
        guard += 1;
    }
    let two = T::one() + T::one();
    let mid = (a + b) / two;
    let fm = f(mid);
    if fm < best_f || (fm == best_f && mid < best_x) {
        best_x = mid;
        best_f = fm;
    }
    (best_x, best_f)
}

/// Linear inequality `row · x ≥ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub row: Vec<f64>,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(row: Vec<f64>, rhs: f64) -> Self {
        Self { row, rhs }
    }

    /// `x[index] ≥ bound`.
    pub fn lower_bound(dim: usize, index: usize, bound: f64) -> Self {
        let mut row = vec![0.0; dim];
        row[index] = 1.0;
        Self { row, rhs: bound }
    }

    fn slack(&self, x: &[f64]) -> f64 {
        self.row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.rhs
    }
}

/// `½ xᵀ H x + gᵀ x + c` subject to linear inequalities, for a handful of
/// variables. Solved exactly by enumerating active sets.
#[derive(Clone, Debug)]
pub struct QuadraticProgram {
    pub hessian: DMatrix<f64>,
    pub gradient: DVector<f64>,
    pub constant: f64,
    pub constraints: Vec<LinearConstraint>,
}

impl QuadraticProgram {
    pub fn objective(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        0.5 * v.dot(&(&self.hessian * &v)) + self.gradient.dot(&v) + self.constant
    }

    /// Global minimizer (the problem is assumed convex). Among minimizers
    /// with equal value the one with smaller component sum wins.
    pub fn solve(&self) -> Result<(Vec<f64>, f64)> {
        let n = self.gradient.len();
        let m = self.constraints.len();
        let scale = self
            .constraints
            .iter()
            .map(|c| {
                c.rhs
                    .abs()
                    .max(c.row.iter().fold(0.0f64, |a, b| a.max(b.abs())))
            })
            .fold(1.0f64, f64::max);
        let feas_tol = 1e-10 * scale;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for mask in 0u32..(1u32 << m) {
            let active: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            if active.len() > n {
                continue;
            }
            let k = active.len();
            let mut kkt = DMatrix::<f64>::zeros(n + k, n + k);
            let mut rhs = DVector::<f64>::zeros(n + k);
            kkt.view_mut((0, 0), (n, n)).copy_from(&self.hessian);
            for i in 0..n {
                rhs[i] = -self.gradient[i];
            }
            for (j, &ci) in active.iter().enumerate() {
                let c = &self.constraints[ci];
                for i in 0..n {
                    kkt[(n + j, i)] = c.row[i];
                    kkt[(i, n + j)] = c.row[i];
                }
                rhs[n + j] = c.rhs;
            }
            let Some(sol) = kkt.lu().solve(&rhs) else {
                continue;
            };
            let x: Vec<f64> = sol.iter().take(n).copied().collect();
            if x.iter().any(|v| !v.is_finite()) {
                continue;
            }
            if self.constraints.iter().any(|c| c.slack(&x) < -feas_tol) {
                continue;
            }
            let value = self.objective(&x);
            let better = match &best {
                None => true,
                Some((bx, bv)) => {
                    let tie = (value - bv).abs() <= 1e-12 * bv.abs().max(1.0);
                    if tie {
                        x.iter().sum::<f64>() < bx.iter().sum::<f64>()
                    } else {
                        value < *bv
                    }
                }
            };
            if better {
                best = Some((x, value));
            }
        }
        best.ok_or(Error::Infeasible)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic_vertex_and_clamp() {
        let q = Quadratic1D::new(1.0, -4.0, 4.0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert_eq!(argmin_quadratic(&q).unwrap(), (2.0, 0.0));
        let q = Quadratic1D::new(1.0, -4.0, 4.0, 3.0, 10.0).unwrap();
        assert_eq!(argmin_quadratic(&q).unwrap(), (3.0, 1.0));
        assert!(matches!(
            Quadratic1D::new(1.0, 0.0, 0.0, 2.0, 1.0),
            Err(Error::EmptyInterval { .. })
        ));
        assert!(matches!(
            Quadratic1D::new(0.0, 1.0, 0.0, 0.0, 1.0),
            Err(Error::NotStrictlyConvex(_))
        ));
    }

    #[test]
    fn free_flight_cost_closed_form() {
        // s = 8, T = 6, D = 48, tau = 1
        let (s, t, d, tau) = (8.0, 6.0, 48.0, 1.0);
        let q = Quadratic1D::on_half_line(
            (s * s * t * t + tau * t) / 2.0,
            -s * t * d,
            d * d / 2.0,
            0.0,
        )
        .unwrap();
        let (a, _) = argmin_quadratic(&q).unwrap();
        assert_abs_diff_eq!(a, 2304.0 / 2310.0, epsilon = 1e-15);
    }

    #[test]
    fn golden_section() {
        let (x, _) = minimize_scalar(|x: f64| (x - std::f64::consts::PI).powi(2), 0.0, 10.0, 1e-8);
        assert_abs_diff_eq!(x, std::f64::consts::PI, epsilon = 1e-8);
        let (x, _) = minimize_scalar(|_x: f64| 3.0, 1.0, 2.0, 1e-8);
        assert_eq!(x, 1.0);
        // argmin at the boundary
        let (x, _) = minimize_scalar(|x: f64| x, 1.0, 2.0, 1e-10);
        assert_eq!(x, 1.0);
        let (x, _) = minimize_scalar(|x: f32| (x - 0.5).powi(2), 0.0, 1.0, 1e-5);
        assert!((x - 0.5).abs() < 1e-4);
    }

    #[test]
    fn golden_agrees_with_vertex() {
        let q = Quadratic1D::new(1155.0, -6180.7, 8000.0, 2.2, f64::INFINITY).unwrap();
        let (xq, _) = argmin_quadratic(&q).unwrap();
        let (xg, _) = minimize_scalar(|x| q.eval(x), 2.2, 10.0, 1e-9);
        assert_abs_diff_eq!(xq, xg, epsilon = 1e-8);
    }

    #[test]
    fn qp_projects_onto_constraint() {
        // min (x-2)² + (y-2)² s.t. x + y <= 2  (written as -x - y >= -2)
        let qp = QuadraticProgram {
            hessian: DMatrix::from_diagonal_element(2, 2, 2.0),
            gradient: DVector::from_vec(vec![-4.0, -4.0]),
            constant: 8.0,
            constraints: vec![
                LinearConstraint::new(vec![-1.0, -1.0], -2.0),
                LinearConstraint::lower_bound(2, 0, 0.0),
                LinearConstraint::lower_bound(2, 1, 0.0),
            ],
        };
        let (x, f) = qp.solve().unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn qp_interior_and_infeasible() {
        let qp = QuadraticProgram {
            hessian: DMatrix::from_diagonal_element(1, 1, 2.0),
            gradient: DVector::from_vec(vec![-2.0]),
            constant: 0.0,
            constraints: vec![LinearConstraint::lower_bound(1, 0, 0.0)],
        };
        assert_abs_diff_eq!(qp.solve().unwrap().0[0], 1.0, epsilon = 1e-14);
        let bad = QuadraticProgram {
            constraints: vec![
                LinearConstraint::lower_bound(1, 0, 2.0),
                LinearConstraint::new(vec![-1.0], 0.0),
            ],
            ..qp
        };
        assert!(matches!(bad.solve(), Err(Error::Infeasible)));
    }
}
