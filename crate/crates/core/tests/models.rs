mod common;

use common::*;
use posmild::benchmarks::epidemic_mass_balance;
use posmild::lattice::min_component;
use posmild::models::{
    build_epidemic, build_epidemic_unvalidated, build_oncology, build_predator_prey, epidemic_shift, oncology_shift,
    predator_shift, Control, EpidemicParams, OncologyGrid, OncologyParams, PredatorPreyParams, Profile,
};
use posmild::semigroup::{apply_semigroup, is_metzler};
use posmild::solver::{solve, SolverConfig};
use posmild::Error;
use rand::Rng;

/// Errors at 256 and 512 nodes per window; the scheme is first order, so the second must
/// be close to half the first.
fn refine(run: impl Fn(usize) -> f64) -> [f64; 2] {
    let errs = [run(256), run(512)];
    assert!(errs[1] <= 0.55 * errs[0], "{errs:?}");
    errs
}

#[test]
fn epidemic_without_transfer_decays() {
    let p = EpidemicParams {
        gamma: 0.0,
        alpha: 0.0,
        ..Default::default()
    };
    assert!(matches!(build_epidemic(&p, 20), Err(Error::Parameter(_))));
    let built = build_epidemic_unvalidated(&p, 20).unwrap();
    let mut y0 = vec![0.0; 21];
    y0[0] = 1.0;
    let errs = refine(|nodes| {
        let cfg = SolverConfig {
            horizon: 3.0,
            quadrature_nodes_per_window: nodes,
            ..Default::default()
        };
        let traj = solve(&built.problem, &y0, &cfg).unwrap();
        let mut err: f64 = 0.0;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!(s[1..].iter().all(|v| *v == 0.0));
            err = err.max((s[0] - (-p.mu0 * t).exp()).abs());
        }
        err
    });
    assert!(errs[1] < 1e-3, "{errs:?}");
}

#[test]
fn epidemic_generator_is_metzler_for_random_parameters() {
    let mut rg = rng(31);
    for _ in 0..50 {
        let kappa = rg.gen_range(0.1..2.0);
        let p = EpidemicParams {
            gamma: rg.gen_range(0.0..1.0),
            mu0: rg.gen_range(0.01..1.0),
            alpha: rg.gen_range(0.01..2.0),
            beta: rg.gen_range(0.01..2.0),
            nu: rg.gen_range(0.01..2.0),
            kappa,
            i_max: kappa + rg.gen_range(1.0..30.0),
            mu: Profile::Affine {
                at_start: 0.0,
                slope: rg.gen_range(0.0..0.1),
            },
            phi: Profile::Exponential {
                amplitude: 1.0,
                rate: rg.gen_range(0.1..3.0),
            },
            base_dir: None,
        };
        let p = EpidemicParams {
            mu: match p.mu {
                Profile::Affine { slope, .. } => Profile::Affine { at_start: p.mu0, slope },
                other => other,
            },
            ..p
        };
        let built = build_epidemic(&p, rg.gen_range(2..80)).unwrap();
        assert!(is_metzler(&built.problem.generator));
    }
}

#[test]
fn epidemic_mass_error_decreases_with_cells() {
    let errs: Vec<f64> = [25, 50, 100]
        .iter()
        .map(|&n| epidemic_mass_balance(n, 4 * n, 5.0).unwrap().error)
        .collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
}

#[test]
fn predator_free_prey_follows_linear_dynamics() {
    let p = PredatorPreyParams::default();
    let built = build_predator_prey(&p, 30).unwrap();
    let mut y0 = built.default_initial.0.clone();
    y0[30] = 0.0;
    let errs = refine(|nodes| {
        let cfg = SolverConfig {
            horizon: 4.0,
            quadrature_nodes_per_window: nodes,
            ..Default::default()
        };
        let traj = solve(&built.problem, &y0, &cfg).unwrap();
        let mut err: f64 = 0.0;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert_eq!(s[30], 0.0);
            let want = apply_semigroup(&built.problem.generator, *t, &y0).unwrap();
            err = err.max(rel_err(s, &want));
        }
        err
    });
    assert!(errs[1] < 1e-2, "{errs:?}");
}

#[test]
fn predator_prey_stays_in_cone() {
    let built = build_predator_prey(&PredatorPreyParams::default(), 40).unwrap();
    let space = &built.problem.space;
    let mut rg = rng(32);
    let cfg = SolverConfig {
        horizon: 5.0,
        quadrature_nodes_per_window: 8,
        ..Default::default()
    };
    for _ in 0..100 {
        let norm = rg.gen_range(0.1..2.0);
        let y0 = random_cone_state(&mut rg, space, norm);
        let traj = solve(&built.problem, &y0, &cfg).unwrap();
        for s in &traj.states {
            let tau = 1e-12 * (1.0 + space.norm_of(s));
            assert!(min_component(s).0 >= -tau);
        }
    }
}

#[test]
fn oncology_drug_free_stays_drug_free() {
    let grid = OncologyGrid::Interval { length: 1.0, cells: 12 };
    let p = OncologyParams {
        u: Control::Constant(0.0),
        ..Default::default()
    };
    let built = build_oncology(&p, &grid).unwrap();
    let mut y0 = built.default_initial.0.clone();
    y0[24..].fill(0.0);
    let cfg = SolverConfig {
        horizon: 2.0,
        ..Default::default()
    };
    let traj = solve(&built.problem, &y0, &cfg).unwrap();
    for s in &traj.states {
        assert!(s[24..].iter().all(|v| *v == 0.0));
    }
}

#[test]
fn oncology_carrying_capacity_is_an_equilibrium() {
    let grid = OncologyGrid::Rectangle { lx: 1.0, ly: 1.0, nx: 4, ny: 3 };
    let p = OncologyParams {
        u: Control::Constant(0.0),
        ..Default::default()
    };
    let built = build_oncology(&p, &grid).unwrap();
    let n = grid.cells();
    let mut y0 = vec![0.0; 3 * n];
    y0[..n].fill(p.k[0]);
    let errs = refine(|nodes| {
        let cfg = SolverConfig {
            horizon: 2.0,
            quadrature_nodes_per_window: nodes,
            ..Default::default()
        };
        let traj = solve(&built.problem, &y0, &cfg).unwrap();
        let mut err: f64 = 0.0;
        for s in &traj.states {
            assert!(s[n..].iter().all(|v| *v == 0.0));
            err = s[..n].iter().fold(err, |e, v| e.max((v - p.k[0]).abs() / p.k[0]));
        }
        err
    });
    assert!(errs[1] < 1e-2, "{errs:?}");
}

#[test]
fn shift_examples() {
    let p = EpidemicParams {
        beta: 0.5,
        ..Default::default()
    };
    assert_eq!(epidemic_shift(&p, 2.0), 1.0);

    let p = PredatorPreyParams {
        gamma_pred: Profile::Constant(0.2),
        ..Default::default()
    };
    assert!((predator_shift(&p, 50, 3.0).unwrap() - 0.6).abs() < 1e-15);

    let p = OncologyParams {
        a: [0.5, 0.4, 1.0],
        alpha12: 0.0,
        alpha21: 0.0,
        kappa13: 0.0,
        kappa23: 0.0,
        ..Default::default()
    };
    for m in [0.1, 1.0, 10.0] {
        assert!(oncology_shift(&p, m) >= 1.0);
    }
}

#[test]
fn invalid_parameters_name_the_constraint() {
    let cases: Vec<(Result<_, Error>, &str)> = vec![
        (build_epidemic(&EpidemicParams { beta: 0.0, ..Default::default() }, 10), "beta"),
        (build_epidemic(&EpidemicParams { gamma: -1.0, ..Default::default() }, 10), "gamma"),
        (build_epidemic(&EpidemicParams { i_max: 0.5, ..Default::default() }, 10), "i_max"),
        (build_predator_prey(&PredatorPreyParams { alpha: 1.5, ..Default::default() }, 10), "alpha"),
        (
            build_oncology(
                &OncologyParams { kappa13: 0.01, kappa23: 0.02, ..Default::default() },
                &OncologyGrid::Interval { length: 1.0, cells: 5 },
            ),
            "kappa",
        ),
        (
            build_oncology(
                &OncologyParams { u: Control::Constant(-0.1), ..Default::default() },
                &OncologyGrid::Interval { length: 1.0, cells: 5 },
            ),
            "u",
        ),
    ];
    for (r, name) in cases {
        match r {
            Err(Error::Parameter(msg)) => assert!(msg.contains(name), "{msg}"),
            other => panic!("expected parameter error naming {name}, got {:?}", other.map(|b| b.name)),
        }
    }
}
