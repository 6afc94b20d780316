use std::collections::BTreeMap;

use nalgebra::DVector;

use super::ipm::IpmResult;
use super::{Solution, Status};
use crate::error::Result;
use crate::hierarchy::{PsdBlock, SdpProblem, SparseSym};
use crate::linalg::RMat;

const COEF_EPS: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;
/// Multipliers are only fitted when the equality system is at most this many rows.
const MULTIPLIER_ROWS_CAP: usize = 800;

#[derive(Clone, Copy, Debug)]
enum Rep {
    Root,
    /// `x_i = s · x_p + t`
    Link { p: usize, s: f64, t: f64 },
    Fixed(f64),
}

/// Affine union-find over the variables.
struct Affine {
    reps: Vec<Rep>,
}

impl Affine {
    /// `x_i = s · x_root + t`, or `(None, 0, t)` when fixed.
    fn resolve(&mut self, i: usize) -> (Option<usize>, f64, f64) {
        let mut chain = vec![];
        let mut cur = i;
        let (root, mut s, mut t) = loop {
            match self.reps[cur] {
                Rep::Root => break (Some(cur), 1.0, 0.0),
                Rep::Fixed(t) => break (None, 0.0, t),
                Rep::Link { p, .. } => {
                    chain.push(cur);
                    cur = p;
                }
            }
        };
        // compose from the root outwards and compress the path
        for &v in chain.iter().rev() {
            if let Rep::Link { s: sv, t: tv, .. } = self.reps[v] {
                t = sv * t + tv;
                s *= sv;
                self.reps[v] = match root {
                    Some(r) => Rep::Link { p: r, s, t },
                    None => Rep::Fixed(t),
                };
            }
        }
        if root.is_none() {
            s = 0.0;
        }
        (root, s, t)
    }
}

pub(super) enum Outcome {
    Reduced(Reduced),
    Infeasible,
    Unbounded,
}

/// Where a component of an input block went.
struct Piece {
    block: usize,
    /// Reduced block index, or `None` for constant-only components.
    reduced: Option<usize>,
    indices: Vec<usize>,
}

pub(super) struct Reduced {
    pub problem: ReducedProblem,
    /// Original variable `i` equals `s · y_j + t` (`j = None`: constant).
    map: Vec<(Option<usize>, f64, f64)>,
    pieces: Vec<Piece>,
}

pub(super) struct ReducedProblem {
    pub nv: usize,
    pub c: DVector<f64>,
    pub c0: f64,
    pub blocks: Vec<PsdBlock>,
    pub e: RMat,
    pub f: DVector<f64>,
}

pub(super) fn presolve(p: &SdpProblem) -> Result<Outcome> {
    let n = p.num_vars;
    let mut aff = Affine { reps: vec![Rep::Root; n] };
    let mut active = vec![true; p.eqs.len()];

    // singleton and doubleton rows, iterated to a fixed point
    loop {
        let mut changed = false;
        for (k, eq) in p.eqs.iter().enumerate() {
            if !active[k] {
                continue;
            }
            let (acc, rhs) = substitute_row(&mut aff, &eq.coeffs, eq.rhs);
            match acc.len() {
                0 => {
                    if rhs.abs() > 1e-9 * (1.0 + eq.rhs.abs()) {
                        return Ok(Outcome::Infeasible);
                    }
                }
                1 => {
                    let (&r, &a) = acc.iter().next().unwrap();
                    aff.reps[r] = Rep::Fixed(rhs / a);
                }
                2 => {
                    let mut it = acc.iter();
                    let (&r1, &a1) = it.next().unwrap();
                    let (&r2, &a2) = it.next().unwrap();
                    // eliminate the variable with the larger coefficient
                    let ((rb, ab), (rs, as_)) =
                        if a1.abs() >= a2.abs() { ((r1, a1), (r2, a2)) } else { ((r2, a2), (r1, a1)) };
                    aff.reps[rb] = Rep::Link { p: rs, s: -as_ / ab, t: rhs / ab };
                }
                _ => continue,
            }
            active[k] = false;
            changed = true;
        }
        if !changed {
            break;
        }
    }

    let resolved: Vec<(Option<usize>, f64, f64)> = (0..n).map(|i| aff.resolve(i)).collect();

    // substitute into blocks
    let mut sub_blocks = vec![];
    for b in &p.blocks {
        let mut constant = b.constant.entries.clone();
        let mut per_root: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
        for (v, f) in &b.coeffs {
            let (r, s, t) = resolved[*v];
            if t != 0.0 {
                constant.extend(f.entries.iter().map(|&(i, j, x)| (i, j, t * x)));
            }
            if let Some(r) = r {
                per_root.entry(r).or_default().extend(f.entries.iter().map(|&(i, j, x)| (i, j, s * x)));
            }
        }
        let constant = clean(SparseSym::new(b.side, constant));
        let coeffs: Vec<(usize, SparseSym)> = per_root
            .into_iter()
            .map(|(r, e)| (r, clean(SparseSym::new(b.side, e))))
            .filter(|(_, f)| !f.is_empty())
            .collect();
        sub_blocks.push(PsdBlock { side: b.side, constant, coeffs });
    }

    // remaining equality rows
    let mut rows: Vec<(BTreeMap<usize, f64>, f64)> = vec![];
    for (k, eq) in p.eqs.iter().enumerate() {
        if active[k] {
            rows.push(substitute_row(&mut aff, &eq.coeffs, eq.rhs));
        }
    }

    // objective
    let mut c0 = 0.0;
    let mut c_root: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, &ci) in p.objective.iter().enumerate() {
        let (r, s, t) = resolved[i];
        c0 += ci * t;
        if let Some(r) = r {
            *c_root.entry(r).or_insert(0.0) += ci * s;
        }
    }

    // surviving variables: roots appearing in a block or an equality
    let mut used = vec![false; n];
    for b in &sub_blocks {
        for (r, _) in &b.coeffs {
            used[*r] = true;
        }
    }
    for (row, _) in &rows {
        for r in row.keys() {
            used[*r] = true;
        }
    }
    let cmax = p.objective.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    for (&r, &cv) in &c_root {
        if !used[r] && cv.abs() > COEF_EPS * cmax {
            return Ok(Outcome::Unbounded);
        }
    }
    let mut index = vec![usize::MAX; n];
    let mut nv = 0;
    for r in 0..n {
        if used[r] {
            index[r] = nv;
            nv += 1;
        }
    }
    let map: Vec<(Option<usize>, f64, f64)> = resolved
        .iter()
        .map(|&(r, s, t)| match r {
            Some(r) if used[r] => (Some(index[r]), s, t),
            _ => (None, 0.0, t),
        })
        .collect();
    let mut c = DVector::zeros(nv);
    for (&r, &cv) in &c_root {
        if used[r] {
            c[index[r]] = cv;
        }
    }

    // rank-reduce the equalities
    let (e, f) = match reduce_rows(&rows, &index, nv) {
        Some(ef) => ef,
        None => return Ok(Outcome::Infeasible),
    };

    // split blocks into connected components
    let mut blocks = vec![];
    let mut pieces = vec![];
    for (k, b) in sub_blocks.iter().enumerate() {
        for comp in components(b) {
            let mut local = vec![usize::MAX; b.side];
            for (li, &gi) in comp.iter().enumerate() {
                local[gi] = li;
            }
            let restrict = |f: &SparseSym| {
                SparseSym::new(
                    comp.len(),
                    f.entries
                        .iter()
                        .filter(|&&(i, _, _)| local[i] != usize::MAX)
                        .map(|&(i, j, v)| (local[i], local[j], v))
                        .collect(),
                )
            };
            let constant = restrict(&b.constant);
            let coeffs: Vec<(usize, SparseSym)> = b
                .coeffs
                .iter()
                .map(|(r, f)| (index[*r], restrict(f)))
                .filter(|(_, f)| !f.is_empty())
                .collect();
            if coeffs.is_empty() {
                let m = constant.to_dense();
                let scale = constant.max_abs().max(1.0);
                if crate::linalg::min_eig_r(&m) < -1e-9 * scale {
                    return Ok(Outcome::Infeasible);
                }
                pieces.push(Piece { block: k, reduced: None, indices: comp });
            } else {
                pieces.push(Piece { block: k, reduced: Some(blocks.len()), indices: comp.clone() });
                blocks.push(PsdBlock { side: comp.len(), constant, coeffs });
            }
        }
    }

    Ok(Outcome::Reduced(Reduced { problem: ReducedProblem { nv, c, c0, blocks, e, f }, map, pieces }))
}

fn substitute_row(aff: &mut Affine, coeffs: &[(usize, f64)], rhs: f64) -> (BTreeMap<usize, f64>, f64) {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    let mut rhs = rhs;
    let scale = coeffs.iter().fold(0.0f64, |a, c| a.max(c.1.abs()));
    for &(v, c) in coeffs {
        let (r, s, t) = aff.resolve(v);
        rhs -= c * t;
        if let Some(r) = r {
            *acc.entry(r).or_insert(0.0) += c * s;
        }
    }
    acc.retain(|_, v| v.abs() > COEF_EPS * scale);
    (acc, rhs)
}

fn clean(mut f: SparseSym) -> SparseSym {
    let m = f.max_abs();
    f.entries.retain(|e| e.2.abs() > COEF_EPS * m.max(1e-300));
    f
}

/// Keep a maximal independent subset of rows (column-pivoted QR of `Eᵀ`);
/// `None` if the dropped rows are inconsistent with the kept ones.
fn reduce_rows(rows: &[(BTreeMap<usize, f64>, f64)], index: &[usize], nv: usize) -> Option<(RMat, DVector<f64>)> {
    let m = rows.len();
    if m == 0 {
        return Some((RMat::zeros(0, nv), DVector::zeros(0)));
    }
    let mut e = RMat::zeros(m, nv);
    let mut f = DVector::zeros(m);
    for (k, (row, rhs)) in rows.iter().enumerate() {
        for (&r, &v) in row {
            e[(k, index[r])] = v;
        }
        f[k] = *rhs;
    }
    // scale rows to unit max-norm so the rank threshold is meaningful
    for k in 0..m {
        let s = e.row(k).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if s > 0.0 {
            e.row_mut(k).scale_mut(1.0 / s);
            f[k] /= s;
        }
    }
    let qr = e.transpose().col_piv_qr();
    let r = qr.r();
    let kdim = r.nrows().min(r.ncols());
    let r00 = if kdim > 0 { r[(0, 0)].abs() } else { 0.0 };
    let rank = (0..kdim).take_while(|&i| r[(i, i)].abs() > RANK_TOL * r00.max(1e-300)).count();
    let mut order = RMat::from_fn(1, m, |_, j| j as f64);
    qr.p().permute_columns(&mut order);
    let mut keep: Vec<usize> = (0..rank).map(|i| order[(0, i)] as usize).collect();
    keep.sort_unstable();

    let ek = RMat::from_fn(keep.len(), nv, |i, j| e[(keep[i], j)]);
    let fk = DVector::from_fn(keep.len(), |i, _| f[keep[i]]);
    if keep.len() < m {
        // minimum-norm solution of the kept rows must satisfy the dropped ones
        let gram = &ek * ek.transpose();
        let y = gram.cholesky()?.solve(&fk);
        let x0 = ek.transpose() * y;
        let res = &e * &x0 - &f;
        let fnorm = f.amax();
        if res.amax() > 1e-8 * (1.0 + fnorm) {
            return None;
        }
    }
    Some((ek, fk))
}

/// Connected components of the sparsity graph of a block (isolated all-zero
/// indices are dropped: they only impose `0 ⪰ 0`).
fn components(b: &PsdBlock) -> Vec<Vec<usize>> {
    let n = b.side;
    let mut parent: Vec<usize> = (0..n).collect();
    let mut touched = vec![false; n];
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mats = std::iter::once(&b.constant).chain(b.coeffs.iter().map(|(_, f)| f));
    for f in mats {
        for &(i, j, _) in &f.entries {
            touched[i] = true;
            touched[j] = true;
            let (a, c) = (find(&mut parent, i), find(&mut parent, j));
            if a != c {
                parent[a.max(c)] = a.min(c);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        if touched[i] {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
    }
    groups.into_values().collect()
}

impl Reduced {
    pub(super) fn recover(&self, p: &SdpProblem, run: IpmResult) -> Solution {
        let x: Vec<f64> = self
            .map
            .iter()
            .map(|&(j, s, t)| match j {
                Some(j) => s * run.y[j] + t,
                None => t,
            })
            .collect();
        let primal_blocks: Vec<RMat> = p.blocks.iter().map(|b| b.value(&x)).collect();
        let mut dual_blocks: Vec<RMat> = p.blocks.iter().map(|b| RMat::zeros(b.side, b.side)).collect();
        for piece in &self.pieces {
            if let Some(r) = piece.reduced {
                let xr = &run.duals[r];
                for (a, &ga) in piece.indices.iter().enumerate() {
                    for (b, &gb) in piece.indices.iter().enumerate() {
                        dual_blocks[piece.block][(ga, gb)] = xr[(a, b)];
                    }
                }
            }
        }
        let dual_multipliers = fit_multipliers(p, &dual_blocks);
        let primal_value = p.objective_value(&x);
        let dual_value = run.dobj + self.problem.c0;
        let (eq_res, min_eig) = p.feasibility(&x);
        let primal_infeasibility = eq_res.max((-min_eig).max(0.0));
        let status = match run.status {
            Status::Optimal if primal_infeasibility > 10.0 * run.tol => Status::NumericalLimit,
            s => s,
        };
        Solution {
            status,
            x,
            primal_value,
            dual_value,
            gap: (dual_value - primal_value).abs(),
            primal_blocks,
            dual_blocks,
            dual_multipliers,
            iterations: run.iterations,
            primal_infeasibility,
            dual_infeasibility: run.dinf,
        }
    }
}

/// Least-squares `w` with `Eᵀ w ≈ c + A*(X)` on the original equalities.
fn fit_multipliers(p: &SdpProblem, duals: &[RMat]) -> Vec<f64> {
    let m = p.eqs.len();
    if m == 0 || m > MULTIPLIER_ROWS_CAP {
        return vec![];
    }
    let mut rhs = DVector::from_vec(p.objective.clone());
    for (b, xk) in p.blocks.iter().zip(duals) {
        for (v, f) in &b.coeffs {
            rhs[*v] += f.dot(xk);
        }
    }
    let mut e = RMat::zeros(m, p.num_vars);
    for (k, eq) in p.eqs.iter().enumerate() {
        for &(v, c) in &eq.coeffs {
            e[(k, v)] += c;
        }
    }
    let mut gram = &e * e.transpose();
    let reg = 1e-12 * (gram.trace() / m as f64).max(1e-300);
    for k in 0..m {
        gram[(k, k)] += reg;
    }
    match gram.cholesky() {
        Some(ch) => ch.solve(&(&e * rhs)).iter().copied().collect(),
        None => vec![],
    }
}
