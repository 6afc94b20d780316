//! Embedded primal–dual interior-point solver for [`SdpProblem`]s, plus SDPA
//! sparse-format export/import for handing larger instances to external solvers.
//!
//! The pipeline is: presolve (singleton/doubleton equality elimination, rank
//! reduction of the remaining equalities, splitting blocks into connected
//! components) followed by a Mehrotra predictor–corrector method with
//! Nesterov–Todd scaling on the reduced problem.

mod ipm;
mod presolve;
mod sdpa;

pub use sdpa::{export_sdpa, from_sdpa_str, import_sdpa, to_sdpa_string};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::SdpProblem;
use crate::linalg::RMat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
    /// The objective is unbounded above (detected in presolve or by a diverging iterate).
    Unbounded,
    /// Iteration cap or numerical breakdown; the solution holds the best iterate.
    NumericalLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Largest admissible side of any input block.
    pub block_cap: usize,
    /// Largest admissible number of free variables after presolve (the Schur matrix is dense).
    pub max_vars: usize,
    pub verbose: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-8, max_iter: 200, block_cap: 2000, max_vars: 8000, verbose: false }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Default::default() }
    }
}

/// Solver output in terms of the original problem.
///
/// The primal is `max c·x` over `F(x) ⪰ 0, E x = f`; the dual is
/// `min Σ⟨X_k, F0_k⟩ + f·w` over `X_k ⪰ 0` with `c_i + Σ⟨X_k, F_ik⟩ = (Eᵀw)_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    pub x: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|dual_value − primal_value|`.
    pub gap: f64,
    /// `F_k(x)` for every input block.
    pub primal_blocks: Vec<RMat>,
    pub dual_blocks: Vec<RMat>,
    /// Multipliers of the input equalities (least-squares fit; empty when too large to form).
    pub dual_multipliers: Vec<f64>,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

impl Solution {
    /// Best available estimate of the optimal value: the dual bound when optimal.
    pub fn value(&self) -> f64 {
        self.primal_value
    }

    pub fn min_block_eigenvalue(&self) -> f64 {
        self.primal_blocks.iter().map(crate::linalg::min_eig_r).fold(f64::INFINITY, f64::min)
    }
}

pub fn solve(p: &SdpProblem, opts: &SolveOptions) -> Result<Solution> {
    if !(opts.tol >= 1e-10) {
        return Err(Error::invalid(format!("tolerance {} below 1e-10", opts.tol)));
    }
    p.validate()?;
    if let Some(b) = p.blocks.iter().find(|b| b.side > opts.block_cap) {
        return Err(Error::cap(format!(
            "block of side {} exceeds the cap of {}; export the problem and use an external solver",
            b.side, opts.block_cap
        )));
    }
    let red = match presolve::presolve(p)? {
        presolve::Outcome::Reduced(r) => r,
        presolve::Outcome::Infeasible => return Ok(trivial(p, Status::Infeasible)),
        presolve::Outcome::Unbounded => return Ok(trivial(p, Status::Unbounded)),
    };
    if red.problem.nv > opts.max_vars {
        return Err(Error::cap(format!(
            "{} free variables after presolve exceed the cap of {}; export the problem and use an external solver",
            red.problem.nv, opts.max_vars
        )));
    }
    let run = ipm::run(&red.problem, opts);
    Ok(red.recover(p, run))
}

fn trivial(p: &SdpProblem, status: Status) -> Solution {
    let x = vec![0.0; p.num_vars];
    let (v, inf) = match status {
        Status::Infeasible => (f64::NEG_INFINITY, f64::INFINITY),
        _ => (f64::INFINITY, f64::INFINITY),
    };
    Solution {
        status,
        primal_blocks: p.blocks.iter().map(|b| b.value(&x)).collect(),
        dual_blocks: p.blocks.iter().map(|b| RMat::zeros(b.side, b.side)).collect(),
        x,
        primal_value: v,
        dual_value: v,
        gap: f64::INFINITY,
        dual_multipliers: vec![],
        iterations: 0,
        primal_infeasibility: inf,
        dual_infeasibility: inf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{EqConstraint, PsdBlock, SparseSym};

    /// Variables are the upper triangle of a `d×d` symmetric matrix, row-major.
    fn full_matrix_problem(d: usize, obj: &RMat, traces: &[f64]) -> SdpProblem {
        let mut coeffs = vec![];
        let mut c = vec![];
        let mut tr = vec![];
        for i in 0..d {
            for j in i..d {
                let v = coeffs.len();
                coeffs.push((v, SparseSym::new(d, vec![(i, j, 1.0)])));
                c.push(if i == j { obj[(i, i)] } else { 2.0 * obj[(i, j)] });
                if i == j {
                    tr.push((v, 1.0));
                }
            }
        }
        let eqs = traces.iter().map(|&t| EqConstraint { coeffs: tr.clone(), rhs: t }).collect();
        let block = PsdBlock { side: d, constant: SparseSym::new(d, vec![]), coeffs };
        SdpProblem::new(c.len(), c, vec![block], eqs, "test", 0)
    }

    #[test]
    fn diag_projector() {
        let obj = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0]));
        let s = solve(&full_matrix_problem(2, &obj, &[1.0]), &SolveOptions::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn swap_top_eigenvalue() {
        let mut swap = RMat::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                swap[(a * 2 + b, b * 2 + a)] = 1.0;
            }
        }
        let s = solve(&full_matrix_problem(4, &swap, &[1.0]), &SolveOptions::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_value - 1.0).abs() < 1e-7, "{}", s.primal_value);
        assert!(s.primal_value <= s.dual_value + 10.0 * 1e-8);
        assert!(s.min_block_eigenvalue() >= -1e-8);
    }

    #[test]
    fn conflicting_traces_are_infeasible() {
        let obj = RMat::identity(2, 2);
        let s = solve(&full_matrix_problem(2, &obj, &[1.0, 2.0]), &SolveOptions::default()).unwrap();
        assert_eq!(s.status, Status::Infeasible);
    }

    #[test]
    fn random_lmi_matches_eigenvalue() {
        // max t  s.t.  A − t I ⪰ 0  has value λ_min(A)
        let a = RMat::from_row_slice(3, 3, &[2.0, 0.5, 0.1, 0.5, 1.0, -0.3, 0.1, -0.3, 3.0]);
        let mut ent = vec![];
        for i in 0..3 {
            for j in i..3 {
                ent.push((i, j, a[(i, j)]));
            }
        }
        let block = PsdBlock {
            side: 3,
            constant: SparseSym::new(3, ent),
            coeffs: vec![(0, SparseSym::new(3, (0..3).map(|i| (i, i, -1.0)).collect()))],
        };
        let p = SdpProblem::new(1, vec![1.0], vec![block], vec![], "test", 0);
        let s = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_value - crate::linalg::min_eig_r(&a)).abs() < 1e-7);
    }

    #[test]
    fn unused_variable_with_objective_is_unbounded() {
        let block = PsdBlock { side: 1, constant: SparseSym::new(1, vec![(0, 0, 1.0)]), coeffs: vec![] };
        let p = SdpProblem::new(1, vec![1.0], vec![block], vec![], "test", 0);
        assert_eq!(solve(&p, &SolveOptions::default()).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn deterministic() {
        let obj = RMat::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.2, 0.5, 0.7, 0.0, 0.7, -1.0]);
        let p = full_matrix_problem(3, &obj, &[1.0]);
        let a = solve(&p, &SolveOptions::default()).unwrap();
        let b = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(a.primal_value, b.primal_value);
    }
}
