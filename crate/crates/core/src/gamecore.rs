//! Two-player free non-local games: the game model, exact strategy evaluation,
//! the classical value by brute force and a see-saw optimizer.
//!
//! Composite game index order is `(a1, a2, q1, q2)` with `a1` outermost:
//! `idx = ((a1 * nA + a2) * nQ + q1) * nQ + q2`.

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{EqConstraint, PsdBlock, SdpProblem, SparseSym};
use crate::linalg::{self, herm_eig, herm_fn, hermitize, kron_c, partial_trace_c, trace_c, CMat, RMat, C0, C1};
use crate::sdpsolve::{self, SolveOptions, Status};

/// Default cap on `nA^nQ` for [`classical_value`].
pub const CLASSICAL_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Game {
    #[serde(rename = "num_answers")]
    pub n_a: usize,
    #[serde(rename = "num_questions")]
    pub n_q: usize,
    #[serde(rename = "assist_dim")]
    pub n_t: usize,
    pub pi1: Vec<f64>,
    pub pi2: Vec<f64>,
    /// Winning quadruples `[a1, a2, q1, q2]`.
    pub win: Vec<[usize; 4]>,
    #[serde(skip)]
    table: Vec<bool>,
}

impl Game {
    pub fn new(n_a: usize, n_q: usize, n_t: usize, pi1: Vec<f64>, pi2: Vec<f64>, win: Vec<[usize; 4]>) -> Result<Self> {
        let mut g = Game { n_a, n_q, n_t, pi1, pi2, win, table: Vec::new() };
        g.validate()?;
        Ok(g)
    }

    /// Build from a rule predicate `V(a1, a2, q1, q2)`.
    pub fn from_rule(
        n_a: usize,
        n_q: usize,
        n_t: usize,
        pi1: Vec<f64>,
        pi2: Vec<f64>,
        rule: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let mut win = Vec::new();
        for a1 in 0..n_a {
            for a2 in 0..n_a {
                for q1 in 0..n_q {
                    for q2 in 0..n_q {
                        if rule(a1, a2, q1, q2) {
                            win.push([a1, a2, q1, q2]);
                        }
                    }
                }
            }
        }
        Game::new(n_a, n_q, n_t, pi1, pi2, win)
    }

    /// CHSH with uniform questions: win iff `a1 xor a2 == q1 and q2`.
    pub fn chsh(n_t: usize) -> Self {
        Game::from_rule(2, 2, n_t, vec![0.5; 2], vec![0.5; 2], |a1, a2, q1, q2| (a1 ^ a2) == (q1 & q2))
            .expect("valid")
    }

    fn validate(&mut self) -> Result<()> {
        if self.n_a == 0 || self.n_q == 0 || self.n_t == 0 {
            return Err(Error::invalid("num_answers, num_questions and assist_dim must be >= 1"));
        }
        for (name, pi) in [("pi1", &self.pi1), ("pi2", &self.pi2)] {
            if pi.len() != self.n_q {
                return Err(Error::invalid(format!("{name} has length {}, expected {}", pi.len(), self.n_q)));
            }
            if pi.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
                return Err(Error::invalid(format!("{name} entries must be strictly positive")));
            }
            let s: f64 = pi.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("{name} sums to {s}, not 1")));
            }
        }
        let mut table = vec![false; self.n_a * self.n_a * self.n_q * self.n_q];
        for w in &self.win {
            if w[0] >= self.n_a || w[1] >= self.n_a || w[2] >= self.n_q || w[3] >= self.n_q {
                return Err(Error::invalid(format!("win entry {w:?} out of range")));
            }
            table[self.index(w[0], w[1], w[2], w[3])] = true;
        }
        self.table = table;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut g: Game = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Game::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn index(&self, a1: usize, a2: usize, q1: usize, q2: usize) -> usize {
        ((a1 * self.n_a + a2) * self.n_q + q1) * self.n_q + q2
    }

    pub fn wins(&self, a1: usize, a2: usize, q1: usize, q2: usize) -> bool {
        self.table[self.index(a1, a2, q1, q2)]
    }

    pub fn v(&self, a1: usize, a2: usize, q1: usize, q2: usize) -> f64 {
        if self.wins(a1, a2, q1, q2) {
            1.0
        } else {
            0.0
        }
    }

    /// Local dimension `nA * nQ * nT` of each party in the separability reformulation.
    pub fn party_dim(&self) -> usize {
        self.n_a * self.n_q * self.n_t
    }
}

/// Diagonal rule matrix on `A1 A2 Q1 Q2`.
pub fn rule_matrix(game: &Game) -> RMat {
    let n = game.n_a * game.n_a * game.n_q * game.n_q;
    let mut m = RMat::zeros(n, n);
    for (i, &w) in game.table.iter().enumerate() {
        if w {
            m[(i, i)] = 1.0;
        }
    }
    m
}

/// `S = Σ |i⟩⟨j| ⊗ |j⟩⟨i|`.
pub fn swap_operator(d: usize) -> RMat {
    let mut s = RMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(i * d + j, j * d + i)] = 1.0;
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    /// Shared state on `T ⊗ T̂`.
    pub rho: CMat,
    /// `alice[q1][a1]`.
    pub alice: Vec<Vec<CMat>>,
    /// `bob[q2][a2]`.
    pub bob: Vec<Vec<CMat>>,
}

impl Strategy {
    pub fn dim(&self) -> usize {
        self.alice.first().and_then(|f| f.first()).map_or(0, |m| m.nrows())
    }

    /// Check the state and POVM invariants.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let d = self.dim();
        if self.rho.nrows() != d * d {
            return Err(Error::dim(format!("state side {} != {}", self.rho.nrows(), d * d)));
        }
        if linalg::min_eig_c(&self.rho) < -tol || (trace_c(&self.rho).re - 1.0).abs() > tol {
            return Err(Error::invalid("shared state is not a density matrix"));
        }
        for fam in self.alice.iter().chain(&self.bob) {
            let mut sum = CMat::zeros(d, d);
            for e in fam {
                if e.nrows() != d {
                    return Err(Error::dim("POVM element dimension"));
                }
                if linalg::min_eig_c(e) < -tol {
                    return Err(Error::invalid("POVM element not positive semidefinite"));
                }
                sum += e;
            }
            if linalg::max_abs_diff_c(&sum, &linalg::identity_c(d)) > tol {
                return Err(Error::invalid("POVM family does not sum to identity"));
            }
        }
        Ok(())
    }
}

fn check_dims(game: &Game, s: &Strategy) -> Result<()> {
    let d = game.n_t;
    let shape_ok = |fam: &Vec<Vec<CMat>>| {
        fam.len() == game.n_q && fam.iter().all(|f| f.len() == game.n_a && f.iter().all(|m| m.nrows() == d && m.ncols() == d))
    };
    if s.rho.nrows() != d * d || !shape_ok(&s.alice) || !shape_ok(&s.bob) {
        return Err(Error::dim("strategy shape does not match the game"));
    }
    Ok(())
}

/// `tr[(E ⊗ D) ρ]` without forming the Kronecker product.
fn pair_expectation(e: &CMat, dm: &CMat, rho: &CMat) -> f64 {
    let d = e.nrows();
    let mut acc = C0;
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                for l in 0..d {
                    // (E⊗D)_{(j l),(i k)} ρ_{(i k),(j l)}
                    acc += e[(j, i)] * dm[(l, k)] * rho[(i * d + k, j * d + l)];
                }
            }
        }
    }
    acc.re
}

pub fn evaluate_strategy(game: &Game, s: &Strategy) -> Result<f64> {
    check_dims(game, s)?;
    let mut val = 0.0;
    for q1 in 0..game.n_q {
        for q2 in 0..game.n_q {
            let w = game.pi1[q1] * game.pi2[q2];
            for a1 in 0..game.n_a {
                for a2 in 0..game.n_a {
                    if game.wins(a1, a2, q1, q2) {
                        val += w * pair_expectation(&s.alice[q1][a1], &s.bob[q2][a2], &s.rho);
                    }
                }
            }
        }
    }
    Ok(val)
}

/// Exact classical value: brute force over Alice's deterministic strategies with
/// Bob best-responding per question.
pub fn classical_value(game: &Game) -> Result<f64> {
    classical_value_capped(game, CLASSICAL_CAP)
}

pub fn classical_value_capped(game: &Game, cap: usize) -> Result<f64> {
    let count = (game.n_a as u128).checked_pow(game.n_q as u32).filter(|&c| c <= cap as u128);
    let Some(count) = count else {
        return Err(Error::cap(format!("{}^{} deterministic strategies exceed cap {cap}", game.n_a, game.n_q)));
    };
    let mut best = 0.0f64;
    let mut f = vec![0usize; game.n_q];
    for _ in 0..count {
        let mut total = 0.0;
        for q2 in 0..game.n_q {
            let mut br = 0.0f64;
            for a2 in 0..game.n_a {
                let v: f64 = (0..game.n_q).map(|q1| game.pi1[q1] * game.v(f[q1], a2, q1, q2)).sum();
                br = br.max(v);
            }
            total += game.pi2[q2] * br;
        }
        best = best.max(total);
        for x in f.iter_mut() {
            *x += 1;
            if *x < game.n_a {
                break;
            }
            *x = 0;
        }
    }
    Ok(best)
}

/// Deterministic strategy embedded with rank-one computational-basis POVMs.
pub fn deterministic_strategy(game: &Game, alice: &[usize], bob: &[usize], rho: CMat) -> Strategy {
    let d = game.n_t;
    let fam = |f: &[usize]| -> Vec<Vec<CMat>> {
        f.iter()
            .map(|&a| (0..game.n_a).map(|x| if x == a { linalg::identity_c(d) } else { CMat::zeros(d, d) }).collect())
            .collect()
    };
    Strategy { rho, alice: fam(alice), bob: fam(bob) }
}

/// `Σ π1 π2 V (E ⊗ D)`, the operator whose expectation in ρ is the game value.
pub fn game_operator(game: &Game, alice: &[Vec<CMat>], bob: &[Vec<CMat>]) -> CMat {
    let d = game.n_t;
    let mut op = CMat::zeros(d * d, d * d);
    for q1 in 0..game.n_q {
        for q2 in 0..game.n_q {
            let w = Complex64::new(game.pi1[q1] * game.pi2[q2], 0.0);
            for a1 in 0..game.n_a {
                for a2 in 0..game.n_a {
                    if game.wins(a1, a2, q1, q2) {
                        op += kron_c(&alice[q1][a1], &bob[q2][a2]) * w;
                    }
                }
            }
        }
    }
    op
}

/// Real-parametrized Hermitian `d x d` matrix: `d` diagonal entries, then
/// `(re, im)` per strict upper pair.
fn herm_params(d: usize) -> usize {
    d * d
}

fn herm_embedding_coeffs(d: usize) -> Vec<SparseSym> {
    let side = 2 * d;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(SparseSym::new(side, vec![(i, i, 1.0), (i + d, i + d, 1.0)]));
    }
    for i in 0..d {
        for j in i + 1..d {
            out.push(SparseSym::new(side, vec![(i, j, 1.0), (i + d, j + d, 1.0)]));
            out.push(SparseSym::new(side, vec![(i, j + d, -1.0), (j, i + d, 1.0)]));
        }
    }
    out
}

fn herm_from_params(x: &[f64], d: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(x[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            m[(i, j)] = Complex64::new(x[k], x[k + 1]);
            m[(j, i)] = Complex64::new(x[k], -x[k + 1]);
            k += 2;
        }
    }
    m
}

fn herm_objective(k: &CMat) -> Vec<f64> {
    let d = k.nrows();
    let mut c = Vec::with_capacity(d * d);
    for i in 0..d {
        c.push(k[(i, i)].re);
    }
    for i in 0..d {
        for j in i + 1..d {
            c.push(2.0 * k[(i, j)].re);
            c.push(2.0 * k[(i, j)].im);
        }
    }
    c
}

/// Clip tiny negative parts and restore completeness exactly.
pub fn repair_povm(elems: &[CMat]) -> Vec<CMat> {
    let d = elems[0].nrows();
    let pos: Vec<CMat> = elems.iter().map(|e| herm_fn(e, |x| x.max(0.0))).collect();
    let s = pos.iter().fold(CMat::zeros(d, d), |a, m| a + m);
    let (vals, _) = herm_eig(&s);
    if vals[0] < 1e-12 {
        // fall back to adding the deficit to the first element
        let mut out = pos.clone();
        out[0] += linalg::identity_c(d) - s;
        out[0] = herm_fn(&out[0], |x| x.max(0.0));
        return out;
    }
    let sinv = herm_fn(&s, |x| 1.0 / x.sqrt());
    pos.iter().map(|e| hermitize(&(&sinv * e * &sinv))).collect()
}

/// Maximize `Σ_a tr[E_a K_a]` over POVMs `{E_a}` by a small SDP.
pub fn optimize_povm(ks: &[CMat]) -> Result<Vec<CMat>> {
    let d = ks[0].nrows();
    let k = ks.len();
    let p = herm_params(d);
    let emb = herm_embedding_coeffs(d);
    let mut objective = Vec::with_capacity(k * p);
    for km in ks {
        objective.extend(herm_objective(&hermitize(km)));
    }
    let blocks = (0..k)
        .map(|a| PsdBlock {
            side: 2 * d,
            constant: SparseSym::new(2 * d, vec![]),
            coeffs: emb.iter().enumerate().map(|(v, s)| (a * p + v, s.clone())).collect(),
        })
        .collect();
    let eqs = (0..p)
        .map(|v| EqConstraint {
            coeffs: (0..k).map(|a| (a * p + v, 1.0)).collect(),
            rhs: if v < d { 1.0 } else { 0.0 },
        })
        .collect();
    let prob = SdpProblem::new(k * p, objective, blocks, eqs, "povm", 1);
    let sol = sdpsolve::solve(&prob, &SolveOptions::default())?;
    if sol.status == Status::Infeasible {
        return Err(Error::numerical("POVM subproblem reported infeasible"));
    }
    let elems: Vec<CMat> = (0..k).map(|a| herm_from_params(&sol.x[a * p..(a + 1) * p], d)).collect();
    Ok(repair_povm(&elems))
}

/// Leading eigenvector projector of a Hermitian operator.
fn top_state(op: &CMat) -> CMat {
    let (_, vecs) = herm_eig(op);
    let v = vecs.column(vecs.ncols() - 1).into_owned();
    &v * v.adjoint()
}

fn alice_effective(game: &Game, s: &Strategy, q1: usize) -> Vec<CMat> {
    let d = game.n_t;
    (0..game.n_a)
        .map(|a1| {
            let mut k = CMat::zeros(d, d);
            for q2 in 0..game.n_q {
                for a2 in 0..game.n_a {
                    if game.wins(a1, a2, q1, q2) {
                        let w = Complex64::new(game.pi1[q1] * game.pi2[q2], 0.0);
                        let m = kron_c(&linalg::identity_c(d), &s.bob[q2][a2]) * &s.rho;
                        k += partial_trace_c(&m, &[d, d], &[1]) * w;
                    }
                }
            }
            // tr[(E⊗I)M] = tr[E tr_2 M]; only the Hermitian part contributes
            hermitize(&k)
        })
        .collect()
}

fn bob_effective(game: &Game, s: &Strategy, q2: usize) -> Vec<CMat> {
    let d = game.n_t;
    (0..game.n_a)
        .map(|a2| {
            let mut k = CMat::zeros(d, d);
            for q1 in 0..game.n_q {
                for a1 in 0..game.n_a {
                    if game.wins(a1, a2, q1, q2) {
                        let w = Complex64::new(game.pi1[q1] * game.pi2[q2], 0.0);
                        let m = kron_c(&s.alice[q1][a1], &linalg::identity_c(d)) * &s.rho;
                        k += partial_trace_c(&m, &[d, d], &[0]) * w;
                    }
                }
            }
            hermitize(&k)
        })
        .collect()
}

/// Random initial strategy for the see-saw.
pub fn random_strategy(game: &Game, seed: u64) -> Strategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = game.n_t;
    let alice = (0..game.n_q).map(|_| linalg::random::povm(&mut rng, d, game.n_a)).collect();
    let bob = (0..game.n_q).map(|_| linalg::random::povm(&mut rng, d, game.n_a)).collect();
    let psi = linalg::random::ginibre(&mut rng, d * d, 1);
    let rho = &psi * psi.adjoint();
    let t = trace_c(&rho);
    Strategy { rho: rho / t, alice, bob }
}

/// See-saw from a random seed.
pub fn seesaw_optimize(game: &Game, seed: u64, iters: usize) -> Result<(Strategy, f64)> {
    if iters == 0 {
        return Err(Error::invalid("see-saw needs at least one iteration"));
    }
    seesaw_from(game, random_strategy(game, seed), iters)
}

/// See-saw started from `start`; every accepted update weakly increases the value.
pub fn seesaw_from(game: &Game, start: Strategy, iters: usize) -> Result<(Strategy, f64)> {
    let mut s = start;
    let mut val = evaluate_strategy(game, &s)?;
    for _ in 0..iters {
        let before = val;
        // state step
        let mut cand = s.clone();
        cand.rho = top_state(&game_operator(game, &s.alice, &s.bob));
        let v = evaluate_strategy(game, &cand)?;
        if v > val {
            s = cand;
            val = v;
        }
        // Alice step
        let mut cand = s.clone();
        for q1 in 0..game.n_q {
            cand.alice[q1] = optimize_povm(&alice_effective(game, &s, q1))?;
        }
        let v = evaluate_strategy(game, &cand)?;
        if v > val {
            s = cand;
            val = v;
        }
        // Bob step
        let mut cand = s.clone();
        for q2 in 0..game.n_q {
            cand.bob[q2] = optimize_povm(&bob_effective(game, &s, q2))?;
        }
        let v = evaluate_strategy(game, &cand)?;
        if v > val {
            s = cand;
            val = v;
        }
        if val - before < 1e-13 {
            break;
        }
    }
    Ok((s, val))
}

/// Maximally entangled state `|Φ⟩⟨Φ|` on `d ⊗ d`.
pub fn max_entangled(d: usize) -> CMat {
    let mut v = CMat::zeros(d * d, 1);
    for i in 0..d {
        v[(i * d + i, 0)] = C1 / Complex64::new((d as f64).sqrt(), 0.0);
    }
    &v * v.adjoint()
}

/// The optimal CHSH strategy on a maximally entangled qubit pair.
pub fn tsirelson_strategy() -> Strategy {
    let proj = |theta: f64| -> Vec<CMat> {
        let (c, s) = (theta.cos(), theta.sin());
        let v = CMat::from_row_slice(2, 1, &[Complex64::new(c, 0.0), Complex64::new(s, 0.0)]);
        let p = &v * v.adjoint();
        vec![p.clone(), linalg::identity_c(2) - p]
    };
    let pi = std::f64::consts::PI;
    Strategy {
        rho: max_entangled(2),
        alice: vec![proj(0.0), proj(pi / 4.0)],
        bob: vec![proj(pi / 8.0), proj(-pi / 8.0)],
    }
}
