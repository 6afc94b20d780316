use proptest::prelude::*;
use qgamebound::csep::{game_to_csep, CSepProblem};
use qgamebound::gamecore::{swap_operator, Game};
use qgamebound::hierarchy::dense::marginal_ab1;
use qgamebound::hierarchy::*;
use qgamebound::linalg::{self, partial_trace_r, to_complex, RMat};
use qgamebound::sdpsolve::{solve, SolveOptions, Status};

fn solved(p: &CSepProblem, n: usize, m: Method) -> (HierarchySdp, qgamebound::sdpsolve::Solution) {
    let h = build(p, n, m, &BuildOptions::default()).unwrap();
    let s = solve(&h.problem, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, Status::Optimal, "{} n={n}", m.name());
    (h, s)
}

#[test]
fn method_names_roundtrip() {
    for m in [Method::Dense, Method::Sym, Method::Bose, Method::BoseReduced] {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert!("npa".parse::<Method>().is_err());
}

#[test]
fn toy_game_is_classical_at_every_level() {
    let p = game_to_csep(&Game::chsh(1));
    let mut prev = f64::INFINITY;
    for n in 1..=3 {
        let v = solved(&p, n, Method::Sym).1.dual_value;
        assert!(v <= prev + 1e-7, "n={n}: {v} > {prev}");
        prev = v;
    }
    assert!((prev - 0.75).abs() < 1e-6);
    let dense = solved(&p, 2, Method::Dense).1.dual_value;
    assert!((dense - 0.75).abs() < 1e-6);
}

#[test]
fn chsh_first_level() {
    let p = game_to_csep(&Game::chsh(2));
    let (d, s) = (solved(&p, 1, Method::Dense).1.dual_value, solved(&p, 1, Method::Sym).1.dual_value);
    assert!((d - s).abs() < 1e-6);
    assert!(s >= 0.853553);
}

/// The decoded dense extension is a state whose `A B₁` marginal carries the
/// objective and whose marginals meet the instance's constraints.
#[test]
fn decoded_extension_is_feasible() {
    let p = game_to_csep(&Game::chsh(1));
    for m in [Method::Dense, Method::Sym] {
        let (h, s) = solved(&p, 2, m);
        let ext = h.extension(&s.x, 4096).unwrap();
        assert!((ext.trace() - 1.0).abs() < 1e-7);
        assert!(linalg::min_eig_r(&ext) > -1e-7);
        let ab = marginal_ab1(&ext, h.d_a, h.copy_dim, 2);
        assert!((p.value(&to_complex(&ab)) - s.primal_value).abs() < 1e-6);
        let ra = partial_trace_r(&ab, &[h.d_a, h.copy_dim], &[1]);
        let rb = partial_trace_r(&ab, &[h.d_a, h.copy_dim], &[0]);
        assert!(p.alice_violation(&to_complex(&ra)) < 1e-7);
        assert!(p.bob_violation(&to_complex(&rb)) < 1e-7);
        // exchangeable copies
        let sw = RMat::identity(h.d_a, h.d_a).kronecker(&swap_operator(h.copy_dim));
        assert!(linalg::max_abs_diff_r(&(&sw * &ext * &sw), &ext) < 1e-7);
    }
}

/// Bose extensions live on the symmetric subspace of the copies.
#[test]
fn bose_extension_is_bose_symmetric() {
    let p = CSepProblem::unconstrained(2, 2, (RMat::identity(4, 4) - swap_operator(2)) * 0.5).unwrap();
    for m in [Method::Bose, Method::BoseReduced] {
        let (h, s) = solved(&p, 2, m);
        assert_eq!(h.copy_dim, 4);
        let ext = h.extension(&s.x, 4096).unwrap();
        let sw = RMat::identity(2, 2).kronecker(&swap_operator(4));
        assert!(linalg::max_abs_diff_r(&(&sw * &ext), &ext) < 1e-7, "{}", m.name());
        assert!((s.dual_value - 0.75).abs() < 1e-6);
    }
}

#[test]
fn caps_are_reported() {
    let p = game_to_csep(&Game::chsh(2));
    let tight = BuildOptions { block_cap: 10, ..Default::default() };
    assert!(matches!(build(&p, 2, Method::Dense, &tight), Err(qgamebound::Error::Cap(_))));
    assert!(matches!(build(&p, 6, Method::Dense, &BuildOptions::default()), Err(qgamebound::Error::Cap(_))));
    assert!(build(&p, 0, Method::Sym, &BuildOptions::default()).is_err());
}

#[test]
fn source_hash_is_stable() {
    let a = game_to_csep(&Game::chsh(2));
    let b = game_to_csep(&Game::chsh(2));
    assert_eq!(source_hash(&a), source_hash(&b));
    assert_ne!(source_hash(&a), source_hash(&game_to_csep(&Game::chsh(1))));
}

#[test]
fn gap_certificate_consistency() {
    let c = GapCertificate { upper: 0.9, lower: 0.85, definetti_bound: 1.0, level: 2, distortion: distortion(8, 8) };
    assert!(c.is_consistent());
    assert!(!GapCertificate { lower: 0.95, ..c }.is_consistent());
    assert_eq!(distortion(8, 8), 16.0);
    assert_eq!(distortion(1, 1000), 18.0 * 1000f64.sqrt());
}

proptest! {
    #[test]
    fn gaps_shrink_like_inverse_sqrt(da in 2usize..50, db in 2usize..50, t in 1usize..4, n in 1usize..10_000) {
        let dims = GapDims { d_a: da, d_b: db, assist: t };
        for v in [GapVariant::Game, GapVariant::Bose, GapVariant::Rounding] {
            let g1 = definetti_gap(dims, n, v);
            let g4 = definetti_gap(dims, 4 * n, v);
            prop_assert!((g1 / g4 - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn level_for_epsilon_is_minimal(da in 2usize..30, db in 2usize..30, eps in 0.05f64..5.0) {
        let dims = GapDims { d_a: da, d_b: db, assist: 1 };
        for v in [GapVariant::Game, GapVariant::Bose, GapVariant::Rounding] {
            let n = level_for_epsilon(dims, eps, v) as usize;
            prop_assert!(definetti_gap(dims, n, v) <= eps);
            prop_assert!(n == 1 || definetti_gap(dims, n - 1, v) > eps);
        }
    }
}
