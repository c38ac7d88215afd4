mod common;

use common::*;
use crowd_sweep::corridor_three::Effort;
use crowd_sweep::corridor_two::contact_time_general;
use crowd_sweep::scenario::{Branch, ContactSchedule, Scenario, ThreeCase};

fn corridor(s: &Scenario) -> &crowd_sweep::CorridorScenario {
    match s {
        Scenario::Corridor(c) => c,
        Scenario::Single(_) => panic!("expected a corridor fixture"),
    }
}

fn check_rows<const N: usize>(name: &str, rows: &[[f64; N]], effort: Effort, tol: f64) {
    let sc = fixture(name);
    for row in rows {
        let r = solve_row(&sc, row[0], effort);
        let err = max_row_error(&r, &row[1..]);
        assert!(
            err <= tol,
            "{name} tau = {}: worst relative error {err:e}",
            row[0]
        );
    }
}

#[test]
fn collinear_obstacle_rows() {
    check_rows("collinear", &COLLINEAR, Effort::Quadratic, 1e-4);
}

#[test]
fn offset_obstacle_rows() {
    check_rows("offset", &OFFSET, Effort::Quadratic, 1e-4);
}

#[test]
fn clear_path_rows() {
    let sc = fixture("clear");
    for row in CLEAR {
        let tau = row[0];
        let r = solve_row(&sc, tau, Effort::Quadratic);
        assert!((r.controls[0] - 2304.0 / (2304.0 + 6.0 * tau)).abs() <= 1e-9);
        assert!((r.controls[0] - row[1]).abs() <= 1e-8);
        assert!(rel_err(r.cost, row[2]) <= 1e-6);
        assert_eq!(r.branch, Branch::NoContact);
        let ContactSchedule::Single(s) = r.schedule else {
            panic!()
        };
        assert_eq!((s.t_f, s.t_l), (None, None));
    }
}

#[test]
fn two_agents_on_axis_rows() {
    check_rows("pair_axis", &PAIR_AXIS, Effort::Quadratic, 1e-5);
    let sc = fixture("pair_axis");
    let c = corridor(&sc);
    for row in PAIR_AXIS {
        let r = solve_row(&sc, row[0], Effort::Quadratic);
        let lhs = r.controls[0] * c.speeds[1];
        let rhs = r.controls[1] * c.speeds[0];
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
        assert_eq!(r.branch, Branch::PairContact);
    }
}

#[test]
fn two_agents_on_diagonal_rows() {
    check_rows("pair_diagonal", &PAIR_DIAGONAL, Effort::Quadratic, 1e-5);
    let sc = fixture("pair_diagonal");
    let free = contact_time_general(corridor(&sc), 1.0, 1.0).unwrap();
    assert!(rel_err(free.t_f12.unwrap(), 4.114382) <= 1e-5);
}

#[test]
fn three_agents_on_axis_rows() {
    let sc = fixture("triple_axis");
    for row in TRIPLE_AXIS {
        let r = solve_row(&sc, row[0], Effort::Linear);
        let got = row_values(&r);
        for k in 0..5 {
            let err = rel_err(got[k].unwrap(), row[k + 1]);
            assert!(err <= 1e-5, "tau = {} column {k}: {err:e}", row[0]);
        }
        assert!(rel_err(r.cost, row[6]) <= 1e-3);
        let ContactSchedule::Three(s) = r.schedule else {
            panic!()
        };
        assert_eq!(s.case, ThreeCase::Pair12First);
    }
}

#[test]
fn three_agents_on_diagonal_rows() {
    check_rows("triple_diagonal", &TRIPLE_DIAGONAL, Effort::Linear, 1e-5);
    let sc = fixture("triple_diagonal");
    for row in TRIPLE_DIAGONAL {
        let r = solve_row(&sc, row[0], Effort::Linear);
        let ContactSchedule::Three(s) = r.schedule else {
            panic!()
        };
        assert_eq!(s.case, ThreeCase::Pair23First);
        assert!((r.controls[0] / r.controls[2] - 5.0).abs() <= 1e-9);
        assert!((r.controls[1] / r.controls[2] - 1.6).abs() <= 1e-9);
    }
}

#[test]
fn quadratic_effort_beats_linear_controls() {
    for name in ["triple_axis", "triple_diagonal"] {
        let sc = fixture(name);
        let c = corridor(&sc);
        for tau in [1.0, 5.0, 10.0] {
            let best = solve_row(&sc, tau, Effort::Quadratic);
            let table = solve_row(&sc, tau, Effort::Linear);
            let table_true = corridor_cost_exact(&c.with_tau(tau), &table.controls);
            assert!(best.cost <= table_true + 1e-9, "{name} tau = {tau}");
            assert!(
                (corridor_cost_exact(&c.with_tau(tau), &best.controls) - best.cost).abs() < 1e-9
            );
        }
    }
}
