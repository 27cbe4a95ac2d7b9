use num_complex::Complex64;

use resonance::eigen::{c_normalize, eig_general, DEFAULT_TOL_DEFECT, DEFAULT_TOL_RESID};
use resonance::ep::{check_ep_relation, default_gap_tol, find_eps_2x2, find_near_coalescence, EpKind, DEFAULT_RIGIDITY_TOL};
use resonance::model::{fig1_model, LevelModel, LevelSpec};
use resonance::rigidity::phase_rigidity;
use resonance::sweep::{sweep, ParameterGrid, SweepOptions};

#[test]
fn fig1_pair_has_one_real_axis_ep_at_two_thirds() {
    let model = fig1_model(2).unwrap();
    let eps: Vec<_> = find_eps_2x2(&model, (0, 1), (0.0, 2.0)).unwrap().into_iter().filter(|c| c.kind == EpKind::Ep).collect();
    assert_eq!(eps.len(), 1);
    assert!((eps[0].a_star - 2.0 / 3.0).abs() <= 1e-12);
    assert!(eps[0].gap < 1e-7);
}

#[test]
fn states_near_the_ep_are_self_orthogonal_and_aligned() {
    let model = fig1_model(2).unwrap();
    let a_star = find_eps_2x2(&model, (0, 1), (0.0, 2.0)).unwrap()[0].a_star;
    for a in [a_star - 1e-7, a_star + 1e-7] {
        let sys = c_normalize(&eig_general(&model.hamiltonian(a), DEFAULT_TOL_RESID).unwrap(), DEFAULT_TOL_DEFECT).unwrap();
        for phi in &sys.vectors {
            assert!(phase_rigidity(phi).unwrap().norm() <= 1e-3);
        }
        assert!(check_ep_relation(&sys.vectors[0], &sys.vectors[1]).unwrap() <= 1e-2);
    }
}

#[test]
fn detector_finds_the_two_level_ep_on_the_default_grid() {
    let model = fig1_model(2).unwrap();
    let grid = ParameterGrid::new(0.0, 2.0, 2001).unwrap();
    let traj = sweep(&model, &grid, &SweepOptions::default()).unwrap();
    let found = find_near_coalescence(&traj, default_gap_tol(&traj), DEFAULT_RIGIDITY_TOL);
    assert_eq!(found.len(), 1);
    assert!((found[0].a_star - 2.0 / 3.0).abs() <= grid.step());
    assert_eq!(found[0].kind, EpKind::Ep);
}

#[test]
fn hermitian_model_has_no_near_coalescences() {
    let specs: Vec<LevelSpec> = resonance::model::fig1_levels().into_iter().take(4).map(|l| LevelSpec::new(l.alpha, l.beta, 0.0)).collect();
    let model = LevelModel::with_uniform_coupling(specs, Complex64::new(0.2, 0.0)).unwrap();
    let traj = sweep(&model, &ParameterGrid::new(0.0, 2.0, 2001).unwrap(), &SweepOptions::default()).unwrap();
    assert!(find_near_coalescence(&traj, default_gap_tol(&traj), DEFAULT_RIGIDITY_TOL).is_empty());
}

#[test]
fn six_levels_have_no_more_candidates_than_three() {
    let grid = ParameterGrid::new(0.0, 2.0, 2001).unwrap();
    let count = |n: usize| {
        let traj = sweep(&fig1_model(n).unwrap(), &grid, &SweepOptions::default()).unwrap();
        find_near_coalescence(&traj, default_gap_tol(&traj), DEFAULT_RIGIDITY_TOL).len()
    };
    assert!(count(6) <= count(3));
}
