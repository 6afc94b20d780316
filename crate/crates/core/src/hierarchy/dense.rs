//! Plain extendability SDP: a state on `A ⊗ B^{⊗n}`, invariant under permuting
//! the `B` copies, whose `A B_1` marginal is scored and whose marginals obey the
//! instance's linear constraints. Every matrix entry is its own variable;
//! symmetries enter as equalities, which presolve collapses.

use std::collections::HashMap;

use super::{class_of, to_eq, BuildOptions, Decoder, EqConstraint, HierarchySdp, LinExpr, Method, PsdBlock, SdpProblem, SparseSym};
use crate::csep::{CSepProblem, ConstraintKind, LinearMarginalConstraint};
use crate::error::{Error, Result};
use crate::linalg::{digits, flat, RMat};

/// Variables for the upper triangle of a symmetric matrix, restricted by a support predicate.
pub(crate) struct DenseVars {
    pub dim: usize,
    pub pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

impl DenseVars {
    pub fn new(dim: usize, allowed: impl Fn(usize, usize) -> bool) -> Self {
        let mut pairs = vec![];
        let mut index = HashMap::new();
        for i in 0..dim {
            for j in i..dim {
                if allowed(i, j) {
                    index.insert((i, j), pairs.len());
                    pairs.push((i, j));
                }
            }
        }
        DenseVars { dim, pairs, index }
    }

    pub fn var(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.index.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn block(&self) -> PsdBlock {
        PsdBlock {
            side: self.dim,
            constant: SparseSym::new(self.dim, vec![]),
            coeffs: self.pairs.iter().enumerate().map(|(k, &(i, j))| (k, SparseSym::new(self.dim, vec![(i, j, 1.0)]))).collect(),
        }
    }

    pub fn trace_eq(&self) -> EqConstraint {
        let coeffs = (0..self.dim).filter_map(|i| self.var(i, i).map(|v| (v, 1.0))).collect();
        EqConstraint { coeffs, rhs: 1.0 }
    }

    /// Objective coefficients for `tr[K ρ]` with `K` given entrywise.
    pub fn objective(&self, k: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        self.pairs.iter().map(|&(i, j)| if i == j { k(i, i) } else { k(i, j) + k(j, i) }).collect()
    }
}

/// Equalities `Σ_l X[(p,l,m,q),(p',l,m',q')] = W[m,m'] Σ_{l,m''} X[(p,l,m'',q),(p',l,m'',q')]`
/// for a matrix `X` on `P ⊗ L ⊗ M ⊗ Q` given entrywise as linear expressions.
pub(crate) fn trace_out_equations(
    dp: usize,
    c: &LinearMarginalConstraint,
    dq: usize,
    x: impl Fn(usize, usize) -> LinExpr,
) -> Vec<EqConstraint> {
    if c.kind == ConstraintKind::FixedPointIdentity {
        return vec![];
    }
    let (l, m, _) = c.dims();
    let w = &c.fixed_operator;
    let idx = |p: usize, li: usize, mi: usize, q: usize| ((p * l + li) * m + mi) * dq + q;
    let keys: Vec<(usize, usize, usize)> =
        (0..dp).flat_map(|p| (0..m).flat_map(move |mi| (0..dq).map(move |q| (p, mi, q)))).collect();
    let mut out = vec![];
    for (a, &(p, mi, q)) in keys.iter().enumerate() {
        for &(pp, mj, qq) in &keys[a..] {
            let mut e = LinExpr::new();
            for li in 0..l {
                super::add_expr(&mut e, &x(idx(p, li, mi, q), idx(pp, li, mj, qq)), 1.0);
            }
            let wv = w[(mi, mj)];
            if wv != 0.0 {
                for li in 0..l {
                    for mk in 0..m {
                        super::add_expr(&mut e, &x(idx(p, li, mk, q), idx(pp, li, mk, qq)), -wv);
                    }
                }
            }
            if let Some(eq) = to_eq(e, 0.0) {
                out.push(eq);
            }
        }
    }
    out
}

pub(crate) fn check_side(side: usize, opts: &BuildOptions) -> Result<()> {
    if side > opts.block_cap {
        return Err(Error::cap(format!("PSD block of side {side} exceeds the cap of {}", opts.block_cap)));
    }
    Ok(())
}

fn single(v: Option<usize>) -> LinExpr {
    v.map(|v| LinExpr::from([(v, 1.0)])).unwrap_or_default()
}

pub fn build_dense_sdp(p: &CSepProblem, n: usize, opts: &BuildOptions) -> Result<HierarchySdp> {
    let (da, db) = (p.dim_a, p.dim_b);
    let total = super::checked_pow(db, n).ok_or_else(|| Error::cap("dimension overflows"))?;
    let dim = da.checked_mul(total).ok_or_else(|| Error::cap("dimension overflows"))?;
    check_side(dim, opts)?;
    let dims: Vec<usize> = std::iter::once(da).chain(std::iter::repeat_n(db, n)).collect();

    let vars = DenseVars::new(dim, |i, j| {
        if !opts.dephase {
            return true;
        }
        let (di, dj) = (digits(i, &dims), digits(j, &dims));
        class_of(di[0], da, p.classical_a) == class_of(dj[0], da, p.classical_a)
            && (1..=n).all(|k| class_of(di[k], db, p.classical_b) == class_of(dj[k], db, p.classical_b))
    });

    let mut eqs = vec![vars.trace_eq()];
    // permutation invariance under adjacent transpositions of copies
    for (v, &(i, j)) in vars.pairs.iter().enumerate() {
        let (di, dj) = (digits(i, &dims), digits(j, &dims));
        for k in 1..n {
            let (mut si, mut sj) = (di.clone(), dj.clone());
            si.swap(k, k + 1);
            sj.swap(k, k + 1);
            let w = vars.var(flat(&si, &dims), flat(&sj, &dims)).expect("support is permutation invariant");
            if w > v {
                eqs.push(EqConstraint { coeffs: vec![(v, 1.0), (w, -1.0)], rhs: 0.0 });
            }
        }
    }
    for c in &p.alice_constraints {
        let (_, _, r) = c.dims();
        eqs.extend(trace_out_equations(1, c, r * total, |a, b| single(vars.var(a, b))));
    }
    // Bob: tr_{(B_L)_1} ρ = W ⊗ ρ on the full state, A kept
    let tail = total / db;
    for c in &p.bob_constraints {
        let (_, _, r) = c.dims();
        eqs.extend(trace_out_equations(da, c, r * tail, |a, b| single(vars.var(a, b))));
    }

    let g = &p.objective;
    let objective = vars.objective(|i, j| {
        let (si, bi, ri) = (i / total, (i % total) / tail, i % tail);
        let (sj, bj, rj) = (j / total, (j % total) / tail, j % tail);
        if ri != rj {
            0.0
        } else {
            p.scale * g[(si * db + bi, sj * db + bj)]
        }
    });

    let problem = SdpProblem::new(vars.len(), objective, vec![vars.block()], eqs, "dense", n);
    Ok(HierarchySdp {
        problem,
        method: Method::Dense,
        n,
        d_a: da,
        copy_dim: db,
        decoder: Decoder::Dense { dim, pairs: vars.pairs.clone() },
    })
}

/// `tr_{B_2..B_n}` of a dense extension on `A ⊗ B^{⊗n}`.
pub fn marginal_ab1(rho: &RMat, d_a: usize, copy_dim: usize, n: usize) -> RMat {
    let dims: Vec<usize> = std::iter::once(d_a).chain(std::iter::repeat_n(copy_dim, n)).collect();
    let traced: Vec<usize> = (2..=n).collect();
    crate::linalg::partial_trace_r(rho, &dims, &traced)
}
