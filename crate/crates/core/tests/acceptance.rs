//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! A criterion listed in `KNOWN_RED` is reported as FAIL but does not fail the
//! process; any other failure exits nonzero.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qgamebound::blockreduce::{block_transform_general, dense_from_orbit_coefficients, dense_transform, polytabloid};
use qgamebound::csep::{assemblage_from_strategy, game_to_csep, strategy_from_assemblage, Assemblage, CSepProblem};
use qgamebound::gamecore::{classical_value, swap_operator, Game, Strategy};
use qgamebound::hierarchy::{build, definetti_gap, level_for_epsilon, BuildOptions, GapDims, GapVariant, Method};
use qgamebound::invbasis::{coefficients_bose, dense_bose, dense_from_bose_coefficients, dense_orbit_matrix, string_index, trace_bose, DENSE_CAP};
use qgamebound::linalg::{self, kron_c, max_abs_diff_c, min_eig_r, random, to_complex, trace_c, CMat, RMat};
use qgamebound::rounding::{game_lower_bound, round_sweep, ExtensionLayout, LowerOptions};
use qgamebound::sdpsolve::{solve, SolveOptions, Status};
use qgamebound::symcomb::{binomial, orbit_representatives, partitions, schur_dim, types, FrequencyMatrix, Partition, Tableau, TypeVector};

/// Criteria that cannot be met as stated; see README "Known deviations".
const KNOWN_RED: &[usize] = &[6];

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn upper(p: &CSepProblem, n: usize, m: Method) -> f64 {
    let h = build(p, n, m, &BuildOptions::default()).expect("build");
    let s = solve(&h.problem, &SolveOptions::default()).expect("solve");
    assert_eq!(s.status, Status::Optimal, "{} n={n}", m.name());
    s.dual_value
}

fn swap_problem() -> CSepProblem {
    CSepProblem::unconstrained(2, 2, swap_operator(2)).unwrap()
}

fn anti_problem() -> CSepProblem {
    CSepProblem::unconstrained(2, 2, (RMat::identity(4, 4) - swap_operator(2)) * 0.5).unwrap()
}

fn toy_problem() -> CSepProblem {
    game_to_csep(&Game::chsh(1))
}

// ---------------------------------------------------------------- 1

fn reference_orbit_matrices() -> Vec<RMat> {
    let unit = |cells: &[(usize, usize)]| {
        let mut m = RMat::zeros(4, 4);
        for &(i, j) in cells {
            m[(i - 1, j - 1)] = 1.0;
        }
        m
    };
    vec![
        unit(&[(1, 1)]),
        unit(&[(4, 4)]),
        unit(&[(2, 2), (3, 3)]),
        unit(&[(1, 2), (1, 3)]),
        unit(&[(2, 1), (3, 1)]),
        unit(&[(1, 4)]),
        unit(&[(4, 1)]),
        unit(&[(2, 3), (3, 2)]),
        unit(&[(3, 4), (2, 4)]),
        unit(&[(4, 2), (4, 3)]),
    ]
}

fn criterion_1() -> Outcome {
    let reps = orbit_representatives(2, 2);
    check(reps.len() == 10, format!("{} classes", reps.len()))?;
    let mut expected = reference_orbit_matrices();
    let mut sum = RMat::zeros(4, 4);
    for m in &reps {
        let c = dense_orbit_matrix(m, DENSE_CAP).map_err(|e| e.to_string())?;
        sum += &c;
        let pos = expected.iter().position(|e| *e == c).ok_or_else(|| format!("class {m:?} not among the reference matrices"))?;
        expected.remove(pos);
    }
    check(expected.is_empty(), "unmatched reference matrices")?;
    check(sum.iter().all(|&x| x == 1.0), "sum is not all-ones")?;
    Ok("10 classes, exact match, Σ = J₄".into())
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let t = TypeVector::new(vec![1, 1]);
    let c = dense_bose(&t, &t, DENSE_CAP).map_err(|e| e.to_string())?;
    let mut want = RMat::zeros(4, 4);
    for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        want[(i, j)] = 1.0;
    }
    check(c == want, format!("C∨ = {c}"))?;
    let tab = Tableau::new(Partition::new(vec![2]).unwrap(), vec![vec![0, 1]]).map_err(|e| e.to_string())?;
    let u = nalgebra::DVector::from_vec(polytabloid(&tab, 2).map_err(|e| e.to_string())?.dense());
    check(u.as_slice() == [0.0, 1.0, 1.0, 0.0], format!("u_τ = {:?}", u.as_slice()))?;
    let q = (u.transpose() * &c * &u)[(0, 0)];
    check(q == 4.0, format!("uᵀCu = {q}"))?;
    let tr = trace_bose(&t, &t, 2).map_err(|e| e.to_string())?;
    check(tr == 2u32.into(), format!("trace = {tr}"))?;
    Ok("C∨ matrix, uᵀCu = 4, trace = 2".into())
}

// ---------------------------------------------------------------- 3

fn apply_perm(idx: usize, perm: &[usize], d: usize) -> usize {
    let n = perm.len();
    let s = qgamebound::invbasis::index_string(idx, d, n);
    let t: Vec<usize> = (0..n).map(|k| s[perm[k]]).collect();
    string_index(&t, d)
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    qgamebound::symcomb::distinct_permutations(&(0..n).collect::<Vec<_>>())
}

/// `(1/n!) Σ_π (I ⊗ P_π) M (I ⊗ P_π)ᵀ` on `side ⊗ (C^d)^{⊗n}`.
fn twirl(m: &RMat, side: usize, n: usize, d: usize) -> RMat {
    let total = d.pow(n as u32);
    let perms = all_perms(n);
    let mut out = RMat::zeros(m.nrows(), m.ncols());
    for p in &perms {
        let map: Vec<usize> = (0..total).map(|i| apply_perm(i, p, d)).collect();
        for s in 0..side {
            for sp in 0..side {
                for a in 0..total {
                    for b in 0..total {
                        out[(s * total + map[a], sp * total + map[b])] += m[(s * total + a, sp * total + b)];
                    }
                }
            }
        }
    }
    out / perms.len() as f64
}

fn orbit_coeffs(z: &RMat, side: usize, n: usize, d: usize) -> BTreeMap<(usize, usize, FrequencyMatrix), f64> {
    let total = d.pow(n as u32);
    let mut out = BTreeMap::new();
    for m in orbit_representatives(n, d) {
        let (a, b) = m.representative();
        let (ia, ib) = (string_index(&a, d), string_index(&b, d));
        for s in 0..side {
            for sp in 0..side {
                out.insert((s, sp, m.clone()), z[(s * total + ia, sp * total + ib)]);
            }
        }
    }
    out
}

fn integer_invariant(rng: &mut ChaCha8Rng, side: usize, n: usize, d: usize) -> BTreeMap<(usize, usize, FrequencyMatrix), f64> {
    let mut out = BTreeMap::new();
    for m in orbit_representatives(n, d) {
        for s in 0..side {
            for sp in 0..side {
                let key = (s, sp, m.clone());
                let mirror = (sp, s, m.transpose());
                let v = match out.get(&mirror) {
                    Some(&v) => v,
                    None => rng.gen_range(-3i32..=3) as f64,
                };
                out.insert(key, v);
            }
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut samples, mut psd_cases) = (0, [0usize; 2]);
    for (n, d) in [(2usize, 2usize), (3, 2), (2, 3), (4, 2)] {
        for trial in 0..26 {
            let side = 1 + trial % 2;
            // exact part: integer coefficients make every product exact in f64
            let coeffs = integer_invariant(&mut rng, side, n, d);
            let z = dense_from_orbit_coefficients(&coeffs, n, d, side, DENSE_CAP).map_err(|e| e.to_string())?;
            check(z == z.transpose(), "invariant matrix not symmetric")?;
            for lam in partitions(n, d) {
                let fast = block_transform_general(&coeffs, &lam, d, side);
                let slow = dense_transform(&z, &lam, d, side, DENSE_CAP).map_err(|e| e.to_string())?;
                check(fast == slow, format!("(n,d)=({n},{d}) λ={:?}: transforms differ", lam.parts()))?;
            }
            // PSD equivalence near the boundary
            let dim = side * d.pow(n as u32);
            let g = RMat::from_fn(dim, 2, |_, _| random::gaussian(&mut rng));
            let mut zf = twirl(&(&g * g.transpose()), side, n, d);
            let shift = min_eig_r(&zf) + if trial % 2 == 0 { -1e-5 } else { 1e-5 };
            zf -= RMat::identity(dim, dim) * shift;
            let cf = orbit_coeffs(&zf, side, n, d);
            let rebuilt = dense_from_orbit_coefficients(&cf, n, d, side, DENSE_CAP).map_err(|e| e.to_string())?;
            check(linalg::max_abs_diff_r(&rebuilt, &zf) <= 1e-12, "twirled matrix not in the orbit span")?;
            let mut blocks_psd = true;
            for lam in partitions(n, d) {
                let fast = block_transform_general(&cf, &lam, d, side);
                let slow = dense_transform(&zf, &lam, d, side, DENSE_CAP).map_err(|e| e.to_string())?;
                let scale = slow.amax().max(1.0);
                check(linalg::max_abs_diff_r(&fast, &slow) <= 1e-12 * scale, "float transforms differ")?;
                blocks_psd &= min_eig_r(&fast) >= -1e-9;
            }
            let dense_psd = min_eig_r(&zf) >= -1e-9;
            check(dense_psd == blocks_psd, format!("PSD mismatch: dense {dense_psd} blocks {blocks_psd}"))?;
            psd_cases[dense_psd as usize] += 1;
            samples += 2;
        }
    }
    Ok(format!("{samples} matrices; PSD/non-PSD cases {}/{}", psd_cases[1], psd_cases[0]))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let cases: Vec<(&str, CSepProblem, Vec<usize>)> = vec![
        ("toy", toy_problem(), vec![2]),
        ("swap", swap_problem(), vec![2, 3]),
        ("anti", anti_problem(), vec![2, 3]),
    ];
    for (name, p, ns) in &cases {
        for &n in ns {
            let dense = upper(p, n, Method::Dense);
            let sym = upper(p, n, Method::Sym);
            worst = worst.max((dense - sym).abs());
            check((dense - sym).abs() <= 1e-6, format!("{name} n={n}: dense {dense} sym {sym}"))?;
            if *name != "toy" {
                let b = upper(p, n, Method::Bose);
                let br = upper(p, n, Method::BoseReduced);
                worst = worst.max((b - br).abs());
                check((b - br).abs() <= 1e-6, format!("{name} n={n}: bose {b} bose-reduced {br}"))?;
            }
        }
    }
    Ok(format!("max |dense − reduced| = {worst:.1e}"))
}

// ---------------------------------------------------------------- 5

fn bose_gap(n: usize) -> f64 {
    definetti_gap(GapDims { d_a: 2, d_b: 2, assist: 1 }, n, GapVariant::Bose)
}

fn criterion_5() -> Outcome {
    let swap = upper(&swap_problem(), 3, Method::BoseReduced);
    check((swap - 1.0).abs() <= 1e-3, format!("swap n=3: {swap}"))?;
    check(swap - 1.0 <= bose_gap(3), "swap gap exceeds bound")?;
    let anti: Vec<f64> = (1..=3).map(|n| upper(&anti_problem(), n, Method::BoseReduced)).collect();
    for (i, v) in anti.iter().enumerate() {
        check(*v >= 0.5 - 1e-7, format!("anti n={}: {v} < 0.5", i + 1))?;
        check(v - 0.5 <= bose_gap(i + 1), format!("anti n={}: gap exceeds bound", i + 1))?;
    }
    check(anti.windows(2).all(|w| w[1] <= w[0] + 1e-7), format!("anti not monotone: {anti:?}"))?;
    Ok(format!("swap(3) = {swap:.6}; anti(1..3) = {:.4} {:.4} {:.4}", anti[0], anti[1], anti[2]))
}

// ---------------------------------------------------------------- 6

struct Chsh {
    classical: f64,
    u1: f64,
    u2: f64,
    lower: f64,
    violation: f64,
}

fn chsh() -> &'static Chsh {
    static CELL: OnceLock<Chsh> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = Game::chsh(2);
        let p = game_to_csep(&g);
        let u1 = upper(&p, 1, Method::Sym);
        let h = build(&p, 2, Method::Sym, &BuildOptions::default()).unwrap();
        let s = solve(&h.problem, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        let res = game_lower_bound(&g, &p, &h, &s.x, &LowerOptions::default()).unwrap();
        Chsh { classical: classical_value(&g).unwrap(), u1, u2: s.dual_value, lower: res.lower, violation: res.max_violation }
    })
}

fn criterion_6() -> Outcome {
    let c = chsh();
    let gap = definetti_gap(GapDims::for_game(&Game::chsh(2)), 2, GapVariant::Rounding);
    let subs = [
        ("classical = 0.75", c.classical == 0.75),
        ("U₂ ≥ 0.853553 − 1e-6", c.u2 >= 0.853553 - 1e-6),
        ("U₂ ≤ 1", c.u2 <= 1.0),
        ("U₂ ≤ U₁ + 1e-7", c.u2 <= c.u1 + 1e-7),
        ("L ≥ 0.8535", c.lower >= 0.8535),
        ("L ≤ U₂ + 1e-7", c.lower <= c.u2 + 1e-7),
        ("U₂ − L ≤ rounding gap", c.u2 - c.lower <= gap),
    ];
    let failed: Vec<&str> = subs.iter().filter(|s| !s.1).map(|s| s.0).collect();
    let detail = format!("U₁ = {:.7}, U₂ = {:.7}, L = {:.8}, gap bound {gap:.3}", c.u1, c.u2, c.lower);
    if failed.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; failed: {}", failed.join(", ")))
    }
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    let cases: Vec<(CSepProblem, Vec<(usize, Method)>)> = vec![
        (toy_problem(), vec![(2, Method::Dense), (2, Method::Sym)]),
        (swap_problem(), vec![(2, Method::Sym), (3, Method::Dense), (3, Method::BoseReduced)]),
        (anti_problem(), vec![(2, Method::Dense), (3, Method::Sym), (3, Method::BoseReduced)]),
    ];
    for (p, runs) in &cases {
        for &(n, m) in runs {
            let h = build(p, n, m, &BuildOptions::default()).unwrap();
            let s = solve(&h.problem, &SolveOptions::default()).unwrap();
            let ext = to_complex(&h.extension(&s.x, 4096).map_err(|e| e.to_string())?);
            for rp in round_sweep(&ext, ExtensionLayout::from(&h), p).map_err(|e| e.to_string())? {
                worst = worst.max(rp.max_violation(p));
                points += 1;
            }
        }
    }
    worst = worst.max(chsh().violation);
    check(worst <= 1e-7, format!("max violation {worst:.2e}"))?;
    Ok(format!("{points} rounded points + CHSH sweep; max violation {worst:.1e}"))
}

// ---------------------------------------------------------------- 8

fn random_strategy(rng: &mut ChaCha8Rng, d: usize, schmidt: usize) -> Strategy {
    // pure state with coefficient matrix of rank `schmidt`
    let g = random::ginibre(rng, d, schmidt) * random::ginibre(rng, schmidt, d);
    let mut psi = linalg::CVec::from_iterator(d * d, g.iter().copied());
    psi /= Complex64::new(psi.norm(), 0.0);
    let rho = &psi * psi.adjoint();
    let (nq, na) = (rng.gen_range(1..=3), rng.gen_range(2..=3));
    let alice = (0..nq).map(|_| random::povm(rng, d, na)).collect();
    let bob = (0..nq).map(|_| random::povm(rng, d, na)).collect();
    Strategy { rho, alice, bob }
}

fn asm_diff(a: &Assemblage, b: &Assemblage) -> f64 {
    a.ops.iter().flatten().zip(b.ops.iter().flatten()).map(|(x, y)| max_abs_diff_c(x, y)).fold(0.0, f64::max)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst, mut deficient) = (0.0f64, 0);
    for i in 0..100 {
        let d = 1 + i % 4;
        let schmidt = if i % 3 == 0 && d > 1 { d - 1 } else { d };
        deficient += (schmidt < d) as usize;
        let s = random_strategy(&mut rng, d, schmidt);
        let a1 = assemblage_from_strategy(&s);
        let s2 = strategy_from_assemblage(&a1, s.bob.clone());
        s2.validate(1e-9).map_err(|e| e.to_string())?;
        worst = worst.max(asm_diff(&a1, &assemblage_from_strategy(&s2)));
    }
    check(worst <= 1e-9, format!("roundtrip error {worst:.2e}"))?;

    let mut ident: f64 = 0.0;
    for d in 1..=4 {
        let a = random::ginibre(&mut rng, d, d);
        let id = CMat::identity(d, d);
        let phi = linalg::CVec::from_fn(d * d, |k, _| if k / d == k % d { linalg::C1 } else { linalg::C0 });
        ident = ident.max(((kron_c(&a, &id) * &phi) - (kron_c(&id, &a.transpose()) * &phi)).camax());
        let x = random::ginibre(&mut rng, d, d);
        let y = random::ginibre(&mut rng, d, d);
        let f = to_complex(&swap_operator(d));
        ident = ident.max((trace_c(&(kron_c(&x, &y) * f)) - trace_c(&(&x * &y))).norm());
    }
    check(ident <= 1e-12, format!("transpose/swap identities off by {ident:.2e}"))?;
    Ok(format!("100 instances ({deficient} rank-deficient), roundtrip {worst:.1e}, identities {ident:.1e}"))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    for n in 1..=5usize {
        for d in 1..=3usize {
            let weyl: u64 = partitions(n, d).iter().map(|l| {
                let s = qgamebound::symcomb::to_u64(&schur_dim(l, d)).unwrap();
                s * s
            }).sum();
            let orbits = orbit_representatives(n, d).len() as u64;
            check(weyl == orbits, format!("n={n} d={d}: Σ schur² {weyl} vs {orbits} orbits"))?;
            let sym = types(n, d).len() as u64;
            let binom = qgamebound::symcomb::to_u64(&binomial(n + d - 1, n)).unwrap();
            // enumeration: count non-decreasing strings among all dⁿ
            let sorted = (0..d.pow(n as u32))
                .filter(|&i| qgamebound::invbasis::index_string(i, d, n).windows(2).all(|w| w[0] <= w[1]))
                .count() as u64;
            check(sym == binom && binom == sorted, format!("n={n} d={d}: sym dims {sym} {binom} {sorted}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut cases = 0;
    for n in 1..=8usize {
        for d in 1..=4usize {
            if d.pow(n as u32) > 256 {
                continue;
            }
            let ts = types(n, d);
            let mut want = RMat::zeros(d.pow(n as u32), d.pow(n as u32));
            for t in &ts {
                for tp in &ts {
                    let z = rng.gen_range(-5i32..=5) as f64;
                    want += dense_bose(t, tp, DENSE_CAP).map_err(|e| e.to_string())? * z;
                }
            }
            let (coeffs, queries) = coefficients_bose(|a, b| want[(a, b)], n, d);
            let binom = qgamebound::symcomb::to_u64(&binomial(n + d - 1, n)).unwrap() as usize;
            check(queries == binom * binom, format!("n={n} d={d}: {queries} queries"))?;
            let got = dense_from_bose_coefficients(&coeffs, n, d, DENSE_CAP).map_err(|e| e.to_string())?;
            check(got == want, format!("n={n} d={d}: reconstruction differs"))?;
            cases += 1;
        }
    }
    Ok(format!("identities for n ≤ 5, d ≤ 3; {cases} exact Bose reconstructions"))
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Outcome {
    let ln2 = std::f64::consts::LN_2;
    for &(da, db, t) in &[(8usize, 8usize, 2usize), (2, 2, 1), (27, 27, 3), (4, 9, 1)] {
        let dims = GapDims { d_a: da, d_b: db, assist: t };
        for n in [1usize, 2, 7, 100] {
            let nf = n as f64;
            let game = 2.0 * (t as f64).powi(3) * (4.0 * ln2).sqrt() * ((da as f64).log2() / nf).sqrt();
            let bose = f64::min(18.0 * ((da * db * db) as f64).sqrt(), 2.0 * (db * db) as f64)
                * (4.0 * ln2).sqrt()
                * ((da as f64).ln() / nf).sqrt();
            let round = f64::min(18.0 * ((da * db) as f64).sqrt(), 2.0 * db as f64) * (2.0 * ln2 * (da as f64).log2() / nf).sqrt();
            for (v, want) in [(GapVariant::Game, game), (GapVariant::Bose, bose), (GapVariant::Rounding, round)] {
                let got = definetti_gap(dims, n, v);
                check((got - want).abs() <= 1e-12 * want.max(1.0), format!("{v:?} dims {da},{db},{t} n={n}: {got} vs {want}"))?;
            }
        }
    }
    // CHSH, nT = 2: 2·8·√(4 ln 2)·√(3/n) ≤ 0.1  ⇔  n ≥ 3072·ln 2 / 0.01
    let level = level_for_epsilon(GapDims::for_game(&Game::chsh(2)), 0.1, GapVariant::Game);
    let want = (3072.0 * ln2 / 0.01f64).ceil() as u64;
    check(level == want, format!("CHSH ε=0.1 level {level}, expected {want}"))?;
    check(level == 212_935, format!("CHSH level {level}"))?;

    // observed gaps of the separable and CHSH suites
    let c = chsh();
    let game_gap = definetti_gap(GapDims::for_game(&Game::chsh(2)), 2, GapVariant::Game);
    check(c.u2 - c.lower <= game_gap, "CHSH gap exceeds the game bound")?;
    for n in 2..=3 {
        let s = upper(&swap_problem(), n, Method::Bose) - 1.0;
        let a = upper(&anti_problem(), n, Method::Bose) - 0.5;
        check(s.max(a) <= bose_gap(n), format!("n={n}: observed gap exceeds Bose bound"))?;
    }
    Ok(format!("formulas match; CHSH ε=0.1 level {level}; observed gaps within bounds"))
}

fn main() {
    let suites: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (k, f) in suites {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => {
                println!("criterion {k:>2}: PASS ({secs:.1}s) {msg}");
                if KNOWN_RED.contains(&k) {
                    println!("              note: listed as known red but passed");
                }
            }
            Err(msg) => {
                let tag = if KNOWN_RED.contains(&k) { " [known]" } else { "" };
                println!("criterion {k:>2}: FAIL{tag} ({secs:.1}s) {msg}");
                if !KNOWN_RED.contains(&k) {
                    unexpected.push(k);
                }
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
