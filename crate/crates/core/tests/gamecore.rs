use proptest::prelude::*;
use qgamebound::gamecore::*;
use qgamebound::linalg::{kron_c, CMat};

#[test]
fn chsh_rule_matrix_and_classical_value() {
    let g = Game::chsh(1);
    let v = rule_matrix(&g);
    assert_eq!(v.nrows(), 16);
    // a1 ⊕ a2 = q1 ∧ q2 holds for half of the 16 quadruples
    assert_eq!(v.iter().filter(|&&x| x == 1.0).count(), 8);
    assert_eq!(classical_value(&g).unwrap(), 0.75);
    assert_eq!(classical_value(&Game::chsh(3)).unwrap(), 0.75);
}

#[test]
fn json_roundtrip_and_validation() {
    let g = Game::chsh(2);
    let back = Game::from_json(&g.to_json()).unwrap();
    assert_eq!(back, g);
    assert!(back.wins(1, 0, 1, 1) && !back.wins(0, 0, 1, 1));
    let bad = include_str!("../data/bad_pi.json");
    assert!(Game::from_json(bad).unwrap_err().to_string().contains("pi1"));
    assert!(Game::new(2, 2, 1, vec![0.5; 2], vec![0.5; 2], vec![[2, 0, 0, 0]]).is_err());
    assert!(Game::new(2, 2, 0, vec![0.5; 2], vec![0.5; 2], vec![]).is_err());
    let loaded = Game::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/chsh.json")).unwrap();
    assert_eq!(loaded.n_t, 2);
}

#[test]
fn all_win_game_has_value_one() {
    let g = Game::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/allwin.json")).unwrap();
    assert_eq!(classical_value(&g).unwrap(), 1.0);
}

#[test]
fn tsirelson_value() {
    let g = Game::chsh(2);
    let v = evaluate_strategy(&g, &tsirelson_strategy()).unwrap();
    assert!((v - (0.5 + 0.5f64.sqrt() / 2.0)).abs() < 1e-12);
}

#[test]
fn seesaw_reaches_tsirelson() {
    let g = Game::chsh(2);
    let best = (0..4).map(|s| seesaw_optimize(&g, s, 50).unwrap().1).fold(0.0, f64::max);
    assert!(best > 0.8535 && best < 0.853554, "{best}");
}

#[test]
fn swap_operator_swaps() {
    let s = swap_operator(3);
    assert_eq!(&s * &s, qgamebound::linalg::RMat::identity(9, 9));
    let a = CMat::from_fn(3, 3, |i, j| (i * 3 + j) as f64 * num_complex::Complex64::new(1.0, 0.0));
    let b = CMat::identity(3, 3);
    let sc = qgamebound::linalg::to_complex(&s);
    assert_eq!(&sc * kron_c(&a, &b) * &sc, kron_c(&b, &a));
}

#[test]
fn classical_cap_is_enforced() {
    let g = Game::from_rule(3, 3, 1, vec![1.0 / 3.0; 3], vec![1.0 / 3.0; 3], |a, b, _, _| a == b).unwrap();
    assert!(classical_value_capped(&g, 10).is_err());
    assert_eq!(classical_value_capped(&g, 100).unwrap(), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_strategies_are_valid_and_bounded(seed in any::<u64>(), nt in 1usize..=3) {
        let g = Game::chsh(nt);
        let s = random_strategy(&g, seed);
        prop_assert!(s.validate(1e-9).is_ok());
        let v = evaluate_strategy(&g, &s).unwrap();
        prop_assert!((-1e-12..=0.853554).contains(&v));
    }

    #[test]
    fn seesaw_never_decreases(seed in any::<u64>()) {
        let g = Game::chsh(2);
        let s = random_strategy(&g, seed);
        let v0 = evaluate_strategy(&g, &s).unwrap();
        let (s1, v1) = seesaw_from(&g, s, 3).unwrap();
        prop_assert!(v1 >= v0 - 1e-9);
        prop_assert!((evaluate_strategy(&g, &s1).unwrap() - v1).abs() < 1e-9);
    }

    #[test]
    fn deterministic_strategies_stay_classical(alice in prop::collection::vec(0usize..2, 2), bob in prop::collection::vec(0usize..2, 2)) {
        let g = Game::chsh(1);
        let s = deterministic_strategy(&g, &alice, &bob, CMat::identity(1, 1));
        prop_assert!(evaluate_strategy(&g, &s).unwrap() <= 0.75 + 1e-12);
    }

    #[test]
    fn repaired_povms_are_complete(seed in any::<u64>(), d in 1usize..4, k in 1usize..4) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<CMat> = (0..k).map(|_| qgamebound::linalg::random::hermitian(&mut rng, d)).collect();
        let fixed = repair_povm(&raw);
        let sum = fixed.iter().fold(CMat::zeros(d, d), |a, m| a + m);
        prop_assert!(qgamebound::linalg::max_abs_diff_c(&sum, &CMat::identity(d, d)) < 1e-9);
        for m in &fixed {
            prop_assert!(qgamebound::linalg::min_eig_c(m) > -1e-9);
        }
    }
}
