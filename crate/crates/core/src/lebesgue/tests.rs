use super::*;
use crate::geometry::sample_free_system;
use std::time::Duration;

fn shapes() -> (Shape, Shape) {
    let area: f64 = 0.15;
    (Shape::disk(vec![0.5, 0.5], (area / std::f64::consts::PI).sqrt()), Shape::square(vec![0.1, 0.2], area.sqrt()))
}

fn disk_square_window(side: i64, m: u32, seed: u64) -> CosetWindow {
    let (a, b) = shapes();
    let sys = sample_free_system(seed, 2, 2, m).unwrap();
    extract_window(&a, &b, &sys, &TorusPoint::new(vec![0.25, 0.6]), &Rect::centered_cube(2, side)).unwrap()
}

fn params(ladder: &[i64], levels: usize) -> LebesgueParams {
    LebesgueParams { ladder: ladder.to_vec(), levels, mutant: false, check_invariants: true }
}

#[test]
fn identity_instance_matches_everything_in_place() {
    let win0 = disk_square_window(128, 3, 5);
    let win = CosetWindow::from_bits(win0.base.clone(), win0.sys.clone(), win0.a_bits.clone(), win0.a_bits.clone()).unwrap();
    let run = run_lebesgue(&win, &params(&[8, 16], 1), None).unwrap();
    assert_eq!(run.reports[0].unmatched_fraction, 0.0);
    assert_eq!(run.reports[1].unmatched_fraction, 0.0);
    for (i, j) in run.matching.edges() {
        assert_eq!(i, j);
    }
}

#[test]
fn small_run_reports_and_invariants() {
    let win = disk_square_window(384, 4, 9);
    let run = run_lebesgue(&win, &params(&[4, 16, 64], 2), None).unwrap();
    assert_eq!(run.reports.len(), 3);
    assert!(run.aborted.is_none());
    run.matching.validate(&win.a_bits, &win.b_bits).unwrap();
    for r in &run.reports {
        for f in [r.uncovered_fraction, r.unmatched_fraction, r.changed.prune, r.changed.rematch, r.changed.refine] {
            assert!((0.0..=1.0).contains(&f));
        }
        assert_eq!(r.one_part_violations, r.over_bound_cubes);
    }
    assert_eq!(run.reports[0].one_part_violations, 0);
    // The stable map records the last change level of every changed cell.
    assert!(run.stable_since.iter().any(|&s| s == 2));
    let again = run_lebesgue(&win, &params(&[4, 16, 64], 2), None).unwrap();
    assert_eq!(again.matching, run.matching);
    assert_eq!(again.reports, run.reports);
}

#[test]
fn window_too_small_for_margin() {
    let win = disk_square_window(64, 4, 9);
    let err = run_lebesgue(&win, &params(&[4, 16, 32], 2), None).unwrap_err();
    assert!(err.to_string().contains("taint margin"), "{err}");
}

#[test]
fn expired_deadline_keeps_level_zero() {
    let win = disk_square_window(128, 2, 3);
    let past = Instant::now() - Duration::from_secs(1);
    let run = run_lebesgue(&win, &params(&[4, 8, 16], 2), Some(past)).unwrap();
    assert_eq!(run.reports.len(), 1);
    assert!(run.aborted.is_some());
}

#[test]
fn equivariance_and_mutant() {
    let (a, b) = shapes();
    let sys = sample_free_system(13, 2, 2, 3).unwrap();
    let u = TorusPoint::new(vec![0.31, 0.77]);
    let w = Rect::centered_cube(2, 256);
    let p = params(&[4, 8, 16, 32], 1);
    let zero = equivariance_check(&a, &b, &sys, &u, &[0, 0], &w, &p).unwrap();
    assert!(zero.equal && zero.compared > 0);
    let rep = equivariance_check(&a, &b, &sys, &u, &[3, -2], &w, &p).unwrap();
    assert!(rep.equal, "{rep:?}");
    let mutant = LebesgueParams { mutant: true, ..p };
    let rep = equivariance_check(&a, &b, &sys, &u, &[3, -2], &w, &mutant).unwrap();
    assert!(!rep.equal);
    assert!(equivariance_check(&a, &b, &sys, &u, &[500, 0], &w, &params(&[4, 8, 16, 32], 1)).is_err());
}
