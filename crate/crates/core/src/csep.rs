//! Constrained separability problems, the game reformulation on the
//! `(A1 Q1 T̃)(A2 Q2 T̂)` cut, assemblages, and the pretty-good constructions
//! that turn assemblages back into strategies.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamecore::{swap_operator, Game, Strategy};
use crate::linalg::{self, herm_eig, hermitize, kron_c, partial_trace_c, trace_c, CMat, CVec, RMat, C0};

/// Cutoff below which eigenvalues of `σ` count as outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// `tr_L X = W_M ⊗ tr_{LM} X` on a marginal with factors `[L, M, R]`.
    TraceOutFixed,
    /// `Ω(X) = X` with `Ω` the identity map; always satisfied.
    FixedPointIdentity,
}

/// Linear constraint on one party's marginal. Factors are listed as
/// `[traced, fixed, rest]`; `W` acts on the fixed factor and is real symmetric
/// (every instance built here has real data).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearMarginalConstraint {
    pub kind: ConstraintKind,
    pub factor_dims: Vec<usize>,
    pub traced_factor: usize,
    pub fixed_factor: usize,
    pub fixed_operator: RMat,
}

impl LinearMarginalConstraint {
    pub fn trace_out(l: usize, m: usize, r: usize, w: RMat) -> Result<Self> {
        let c = LinearMarginalConstraint {
            kind: ConstraintKind::TraceOutFixed,
            factor_dims: vec![l, m, r],
            traced_factor: 0,
            fixed_factor: 1,
            fixed_operator: w,
        };
        c.validate(l * m * r)?;
        Ok(c)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.factor_dims[0], self.factor_dims[1], self.factor_dims[2])
    }

    pub fn validate(&self, marginal_dim: usize) -> Result<()> {
        if self.kind == ConstraintKind::FixedPointIdentity {
            return Ok(());
        }
        if self.factor_dims.len() != 3 || self.traced_factor != 0 || self.fixed_factor != 1 {
            return Err(Error::Unsupported("marginal constraints must use factor order [traced, fixed, rest]".into()));
        }
        let (l, m, r) = self.dims();
        if l * m * r != marginal_dim {
            return Err(Error::dim(format!("constraint factors {l}*{m}*{r} != marginal dimension {marginal_dim}")));
        }
        let w = &self.fixed_operator;
        if w.nrows() != m || w.ncols() != m {
            return Err(Error::dim("fixed operator does not act on the fixed factor"));
        }
        if linalg::max_abs_diff_r(w, &w.transpose()) > 1e-12 {
            return Err(Error::invalid("fixed operator is not symmetric"));
        }
        if linalg::min_eig_r(w) < -1e-12 || (w.trace() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("fixed operator must be PSD with unit trace"));
        }
        Ok(())
    }

    /// `tr_L X − W ⊗ tr_{LM} X`, the quantity the constraint sets to zero.
    pub fn residual(&self, x: &CMat) -> CMat {
        let (l, m, r) = self.dims();
        if self.kind == ConstraintKind::FixedPointIdentity {
            return CMat::zeros(m * r, m * r);
        }
        let lhs = partial_trace_c(x, &[l, m, r], &[0]);
        let rest = partial_trace_c(x, &[l, m, r], &[0, 1]);
        lhs - kron_c(&linalg::to_complex(&self.fixed_operator), &rest)
    }

    pub fn violation(&self, x: &CMat) -> f64 {
        self.residual(x).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CSepProblem {
    pub dim_a: usize,
    pub dim_b: usize,
    /// `G` on `A ⊗ B`.
    pub objective: RMat,
    pub scale: f64,
    pub alice_constraints: Vec<LinearMarginalConstraint>,
    pub bob_constraints: Vec<LinearMarginalConstraint>,
    /// Dimension of the classical leading factor of `A` (1 if none); the rest is quantum.
    pub classical_a: usize,
    /// Dimension of the classical leading factor of `B` (1 if none).
    pub classical_b: usize,
}

impl CSepProblem {
    /// Abstract instance with only normalization constraints.
    pub fn unconstrained(dim_a: usize, dim_b: usize, objective: RMat) -> Result<Self> {
        let p = CSepProblem {
            dim_a,
            dim_b,
            objective,
            scale: 1.0,
            alice_constraints: vec![],
            bob_constraints: vec![],
            classical_a: 1,
            classical_b: 1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim_a * self.dim_b;
        if self.objective.nrows() != n || self.objective.ncols() != n {
            return Err(Error::dim(format!("objective must have side {n}")));
        }
        if self.objective.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("objective has non-finite entries"));
        }
        if linalg::max_abs_diff_r(&self.objective, &self.objective.transpose()) > 1e-12 {
            return Err(Error::invalid("objective is not symmetric"));
        }
        for c in &self.alice_constraints {
            c.validate(self.dim_a)?;
        }
        for c in &self.bob_constraints {
            c.validate(self.dim_b)?;
        }
        if !self.dim_a.is_multiple_of(self.classical_a) || !self.dim_b.is_multiple_of(self.classical_b) {
            return Err(Error::dim("classical factor does not divide the party dimension"));
        }
        Ok(())
    }

    /// `scale * tr[G (ρ_A ⊗ ρ_B)]`.
    pub fn product_value(&self, rho_a: &CMat, rho_b: &CMat) -> f64 {
        self.scale * trace_c(&(linalg::to_complex(&self.objective) * kron_c(rho_a, rho_b))).re
    }

    /// `scale * tr[G ρ_AB]`.
    pub fn value(&self, rho_ab: &CMat) -> f64 {
        self.scale * trace_c(&(linalg::to_complex(&self.objective) * rho_ab)).re
    }

    pub fn alice_violation(&self, rho_a: &CMat) -> f64 {
        self.alice_constraints.iter().map(|c| c.violation(rho_a)).fold(0.0, f64::max)
    }

    pub fn bob_violation(&self, rho_b: &CMat) -> f64 {
        self.bob_constraints.iter().map(|c| c.violation(rho_b)).fold(0.0, f64::max)
    }
}

/// Reformulate a game as a bipartite constrained separability problem on
/// `A = A1 Q1 T̃`, `B = A2 Q2 T̂` with `G = V ⊗ S` and scale `|T|`.
pub fn game_to_csep(game: &Game) -> CSepProblem {
    let (na, nq, nt) = (game.n_a, game.n_q, game.n_t);
    let d = game.party_dim();
    let s = swap_operator(nt);
    let mut g = RMat::zeros(d * d, d * d);
    let a_idx = |a: usize, q: usize, t: usize| (a * nq + q) * nt + t;
    for a1 in 0..na {
        for q1 in 0..nq {
            for a2 in 0..na {
                for q2 in 0..nq {
                    if !game.wins(a1, a2, q1, q2) {
                        continue;
                    }
                    for t in 0..nt {
                        for u in 0..nt {
                            for tp in 0..nt {
                                for up in 0..nt {
                                    let sv = s[(t * nt + u, tp * nt + up)];
                                    if sv != 0.0 {
                                        let r = a_idx(a1, q1, t) * d + a_idx(a2, q2, u);
                                        let c = a_idx(a1, q1, tp) * d + a_idx(a2, q2, up);
                                        g[(r, c)] = sv;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let w_a = RMat::from_diagonal(&nalgebra::DVector::from_vec(game.pi1.clone()));
    let w_b = RMat::from_diagonal(&nalgebra::DVector::from_vec(game.pi2.clone()))
        .kronecker(&(RMat::identity(nt, nt) / nt as f64));
    CSepProblem {
        dim_a: d,
        dim_b: d,
        objective: g,
        scale: nt as f64,
        alice_constraints: vec![LinearMarginalConstraint::trace_out(na, nq, nt, w_a).expect("valid weights")],
        bob_constraints: vec![LinearMarginalConstraint::trace_out(na, nq * nt, 1, w_b).expect("valid weights")],
        classical_a: na * nq,
        classical_b: na * nq,
    }
}

/// `α(a|q)` without the `π1(q)` weight: `Σ_a α(a|q) = σ` for every `q`, `tr σ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Assemblage {
    /// `ops[q][a]`.
    pub ops: Vec<Vec<CMat>>,
}

impl Assemblage {
    pub fn dim(&self) -> usize {
        self.ops[0][0].nrows()
    }

    pub fn sigma(&self) -> CMat {
        let d = self.dim();
        self.ops[0].iter().fold(CMat::zeros(d, d), |a, m| a + m)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let sigma = self.sigma();
        for fam in &self.ops {
            let mut s = CMat::zeros(sigma.nrows(), sigma.ncols());
            for m in fam {
                if linalg::min_eig_c(m) < -tol {
                    return Err(Error::invalid("assemblage element not PSD"));
                }
                s += m;
            }
            if linalg::max_abs_diff_c(&s, &sigma) > tol {
                return Err(Error::invalid("assemblage signals: Σ_a α(a|q) depends on q"));
            }
        }
        if (trace_c(&sigma).re - 1.0).abs() > tol {
            return Err(Error::invalid("assemblage is not normalized"));
        }
        Ok(())
    }

    /// The `A`-party state `Σ π1(q) |a q⟩⟨a q| ⊗ α(a|q)`.
    pub fn alice_state(&self, pi1: &[f64]) -> CMat {
        let nq = self.ops.len();
        let na = self.ops[0].len();
        let d = self.dim();
        let mut out = CMat::zeros(na * nq * d, na * nq * d);
        for q in 0..nq {
            for a in 0..na {
                let off = (a * nq + q) * d;
                let blk = &self.ops[q][a] * Complex64::new(pi1[q], 0.0);
                out.view_mut((off, off), (d, d)).copy_from(&blk);
            }
        }
        out
    }

    /// Parse a (possibly non-block-diagonal) `A`-party state back into an assemblage.
    pub fn from_alice_state(state: &CMat, game: &Game) -> Self {
        let (na, nq, d) = (game.n_a, game.n_q, game.n_t);
        let ops = (0..nq)
            .map(|q| {
                (0..na)
                    .map(|a| {
                        let off = (a * nq + q) * d;
                        hermitize(&state.view((off, off), (d, d)).into_owned()) / Complex64::new(game.pi1[q], 0.0)
                    })
                    .collect()
            })
            .collect();
        Assemblage { ops }
    }
}

/// The `B`-party state `Σ π2(q) |a q⟩⟨a q| ⊗ D(a|q) / nT`.
pub fn bob_state(game: &Game, bob: &[Vec<CMat>]) -> CMat {
    let (na, nq, d) = (game.n_a, game.n_q, game.n_t);
    let mut out = CMat::zeros(na * nq * d, na * nq * d);
    for q in 0..nq {
        for a in 0..na {
            let off = (a * nq + q) * d;
            let blk = &bob[q][a] * Complex64::new(game.pi2[q] / d as f64, 0.0);
            out.view_mut((off, off), (d, d)).copy_from(&blk);
        }
    }
    out
}

/// Parse a `B`-party state into Bob's POVMs `D(a|q) = nT · block / π2(q)`.
pub fn bob_povm_from_state(state: &CMat, game: &Game) -> Vec<Vec<CMat>> {
    let (na, nq, d) = (game.n_a, game.n_q, game.n_t);
    (0..nq)
        .map(|q| {
            (0..na)
                .map(|a| {
                    let off = (a * nq + q) * d;
                    hermitize(&state.view((off, off), (d, d)).into_owned()) * Complex64::new(d as f64 / game.pi2[q], 0.0)
                })
                .collect()
        })
        .collect()
}

/// Steered states `α(a|q) = tr_T[(E(a|q) ⊗ I) ρ]` on `T̂`.
pub fn assemblage_from_strategy(s: &Strategy) -> Assemblage {
    let d = s.dim();
    let ops = s
        .alice
        .iter()
        .map(|fam| {
            fam.iter()
                .map(|e| hermitize(&partial_trace_c(&(kron_c(e, &linalg::identity_c(d)) * &s.rho), &[d, d], &[0])))
                .collect()
        })
        .collect();
    Assemblage { ops }
}

/// Pretty-good purification `(√σ ⊗ I)|Ψ⟩` of the average state, written in the
/// eigenbasis of `σ`, with pretty-good measurements for Alice. Off the support of
/// `σ` each element gets `(I − Π)/nA` so the families stay complete.
pub fn strategy_from_assemblage(asm: &Assemblage, bob: Vec<Vec<CMat>>) -> Strategy {
    let d = asm.dim();
    let na = asm.ops[0].len();
    let (vals, u) = herm_eig(&asm.sigma());
    let lam: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    let inv_sqrt: Vec<f64> = lam.iter().map(|&v| if v > SUPPORT_CUTOFF { 1.0 / v.sqrt() } else { 0.0 }).collect();
    let mut proj_off = CMat::zeros(d, d);
    for k in 0..d {
        if lam[k] <= SUPPORT_CUTOFF {
            let col = u.column(k);
            proj_off += col * col.adjoint();
        }
    }
    let alice = asm
        .ops
        .iter()
        .map(|fam| {
            fam.iter()
                .map(|alpha| {
                    let ap = u.adjoint() * alpha * &u;
                    let mut fp = CMat::zeros(d, d);
                    for l in 0..d {
                        for k in 0..d {
                            // F'_{lk} = α'_{kl} / sqrt(λ_k λ_l)
                            fp[(l, k)] = ap[(k, l)] * Complex64::new(inv_sqrt[k] * inv_sqrt[l], 0.0);
                        }
                    }
                    let f = &u * fp * u.adjoint();
                    hermitize(&(f + &proj_off / Complex64::new(na as f64, 0.0)))
                })
                .collect()
        })
        .collect();
    let mut psi = CVec::zeros(d * d);
    for k in 0..d {
        let ek = u.column(k);
        for i in 0..d {
            for j in 0..d {
                psi[i * d + j] += ek[i] * ek[j] * Complex64::new(lam[k].sqrt(), 0.0);
            }
        }
    }
    let norm = psi.norm();
    if norm > 0.0 {
        psi /= Complex64::new(norm, 0.0);
    }
    Strategy { rho: &psi * psi.adjoint(), alice, bob }
}

/// `(√ρ ⊗ I) Σ_i |i⟩|i⟩`, normalized.
pub fn purify_pretty_good(rho: &CMat) -> Result<CVec> {
    let d = rho.nrows();
    let (vals, _) = herm_eig(rho);
    if vals[0] < -1e-9 {
        return Err(Error::invalid(format!("state has negative eigenvalue {}", vals[0])));
    }
    let sq = linalg::herm_fn(rho, |x| x.max(0.0).sqrt());
    let mut psi = CVec::from_element(d * d, C0);
    for i in 0..d {
        for a in 0..d {
            psi[a * d + i] = sq[(a, i)];
        }
    }
    let n = psi.norm();
    if n == 0.0 {
        return Err(Error::invalid("state is zero"));
    }
    Ok(psi / Complex64::new(n, 0.0))
}
