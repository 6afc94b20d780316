use nalgebra::{Cholesky, DVector, Dyn};

use super::presolve::ReducedProblem;
use super::{SolveOptions, Status};
use crate::hierarchy::SparseSym;
use crate::linalg::RMat;

const STEP_FRACTION: f64 = 0.98;
const DIVERGENCE: f64 = 1e12;

pub(super) struct IpmResult {
    pub status: Status,
    pub y: Vec<f64>,
    pub duals: Vec<RMat>,
    pub dobj: f64,
    pub dinf: f64,
    pub iterations: usize,
    pub tol: f64,
}

/// Coefficient matrix with its entries grouped by column (both triangles).
struct Expanded {
    var: usize,
    sym: SparseSym,
    cols: Vec<(usize, Vec<(usize, f64)>)>,
}

impl Expanded {
    fn new(var: usize, sym: &SparseSym) -> Self {
        let mut by_col: std::collections::BTreeMap<usize, Vec<(usize, f64)>> = Default::default();
        for &(i, j, v) in &sym.entries {
            by_col.entry(j).or_default().push((i, v));
            if i != j {
                by_col.entry(i).or_default().push((j, v));
            }
        }
        Expanded { var, sym: sym.clone(), cols: by_col.into_iter().collect() }
    }

    /// `A F B` for symmetric `A`, `B`.
    fn sandwich(&self, a: &RMat, b: &RMat) -> RMat {
        let n = a.nrows();
        let k = self.cols.len();
        let mut t = RMat::zeros(n, k);
        let mut bc = RMat::zeros(k, n);
        for (c, (col, ents)) in self.cols.iter().enumerate() {
            for &(row, v) in ents {
                t.column_mut(c).axpy(v, &a.column(row), 1.0);
            }
            bc.row_mut(c).copy_from(&b.row(*col));
        }
        t * bc
    }
}

struct Block {
    side: usize,
    f0: RMat,
    coeffs: Vec<Expanded>,
}

struct Iterate {
    y: DVector<f64>,
    w: DVector<f64>,
    z: Vec<RMat>,
    x: Vec<RMat>,
}

struct Direction {
    dy: DVector<f64>,
    dw: DVector<f64>,
    dz: Vec<RMat>,
    dx: Vec<RMat>,
}

struct Ctx<'a> {
    p: &'a ReducedProblem,
    blocks: Vec<Block>,
    ete: RMat,
    rho: f64,
}

impl<'a> Ctx<'a> {
    fn new(p: &'a ReducedProblem) -> Self {
        let blocks = p
            .blocks
            .iter()
            .map(|b| Block {
                side: b.side,
                f0: b.constant.to_dense(),
                coeffs: b.coeffs.iter().map(|(v, f)| Expanded::new(*v, f)).collect(),
            })
            .collect();
        let ete = p.e.transpose() * &p.e;
        Ctx { p, blocks, ete, rho: 0.0 }
    }

    /// `F0 + Σ y_i F_i` per block (`with_const = false` drops `F0`).
    fn apply(&self, y: &DVector<f64>, with_const: bool) -> Vec<RMat> {
        self.blocks
            .iter()
            .map(|b| {
                let mut m = if with_const { b.f0.clone() } else { RMat::zeros(b.side, b.side) };
                for e in &b.coeffs {
                    let v = y[e.var];
                    if v != 0.0 {
                        e.sym.add_to(&mut m, v);
                    }
                }
                m
            })
            .collect()
    }

    /// `(⟨X, F_i⟩)_i`.
    fn adjoint(&self, xs: &[RMat]) -> DVector<f64> {
        let mut out = DVector::zeros(self.p.nv);
        for (b, x) in self.blocks.iter().zip(xs) {
            for e in &b.coeffs {
                out[e.var] += e.sym.dot(x);
            }
        }
        out
    }

    /// `M_ij = Σ_k tr(F_ik X_k F_jk Z_k⁻¹)`.
    fn schur(&self, xs: &[RMat], zinv: &[RMat]) -> RMat {
        let nv = self.p.nv;
        let mut m = RMat::zeros(nv, nv);
        for ((b, x), zi) in self.blocks.iter().zip(xs).zip(zinv) {
            for (ii, ei) in b.coeffs.iter().enumerate() {
                let pm = ei.sandwich(zi, x);
                for ej in &b.coeffs[ii..] {
                    let val = ej.sym.dot(&pm);
                    m[(ei.var, ej.var)] += val;
                    if ei.var != ej.var {
                        m[(ej.var, ei.var)] += val;
                    }
                }
            }
        }
        m
    }
}

fn inner(a: &RMat, b: &RMat) -> f64 {
    a.dot(b)
}

fn sym(m: RMat) -> RMat {
    (&m + m.transpose()) * 0.5
}

fn chol(m: &RMat) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(sym(m.clone()))
}

/// Cholesky with escalating diagonal regularization.
fn chol_reg(m: &RMat) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let n = m.nrows();
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0f64, f64::max).max(1e-300);
    let mut delta = 1e-14 * scale;
    for _ in 0..10 {
        let mut r = m.clone();
        for i in 0..n {
            r[(i, i)] += delta;
        }
        if let Some(c) = Cholesky::new(r) {
            return Some(c);
        }
        delta *= 100.0;
    }
    None
}

/// Largest `α ≤ 1` keeping `X + α ΔX ⪰ 0`, damped by the step fraction.
fn step_length(l: &Cholesky<f64, Dyn>, d: &RMat) -> f64 {
    let lm = l.l();
    let a = match lm.solve_lower_triangular(d) {
        Some(a) => a,
        None => return 0.0,
    };
    let b = match lm.solve_lower_triangular(&a.transpose()) {
        Some(b) => b,
        None => return 0.0,
    };
    let lmin = crate::linalg::min_eig_r(&sym(b));
    if lmin >= 0.0 {
        1.0
    } else {
        (STEP_FRACTION * (-1.0 / lmin)).min(1.0)
    }
}

pub(super) fn run(p: &ReducedProblem, opts: &SolveOptions) -> IpmResult {
    let mut ctx = Ctx::new(p);
    let nv = p.nv;
    let neq = p.e.nrows();
    let nblk: usize = ctx.blocks.iter().map(|b| b.side).sum();

    if nv == 0 {
        // nothing to optimize; constant blocks were checked in presolve
        return IpmResult {
            status: Status::Optimal,
            y: vec![],
            duals: ctx.blocks.iter().map(|b| RMat::zeros(b.side, b.side)).collect(),
            dobj: 0.0,
            dinf: 0.0,
            iterations: 0,
            tol: opts.tol,
        };
    }

    // starting point
    let mut z0 = vec![];
    let mut x0 = vec![];
    for b in &ctx.blocks {
        let n = b.side as f64;
        let mut fmax = b.f0.norm();
        let mut ratio = 0.0f64;
        for e in &b.coeffs {
            let nf = e.sym.to_dense().norm();
            fmax = fmax.max(nf);
            ratio = ratio.max((1.0 + p.c[e.var].abs()) / (1.0 + nf));
        }
        let eta = 10f64.max(n.sqrt()).max(fmax);
        let xi = 10f64.max(n.sqrt()).max(n * ratio);
        z0.push(RMat::identity(b.side, b.side) * eta);
        x0.push(RMat::identity(b.side, b.side) * xi);
    }
    let mut it = Iterate { y: DVector::zeros(nv), w: DVector::zeros(neq), z: z0, x: x0 };

    let bnorm = ctx.blocks.iter().map(|b| b.f0.amax()).fold(p.f.amax(), f64::max);
    let cnorm = p.c.amax();

    let mut best: Option<(f64, Vec<f64>, Vec<RMat>, f64, f64)> = None;
    let mut status = Status::NumericalLimit;
    let mut stalls = 0;
    let mut iterations = 0;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let fy = ctx.apply(&it.y, true);
        let rp: Vec<RMat> = fy.iter().zip(&it.z).map(|(f, z)| f - z).collect();
        let rd = &p.c + ctx.adjoint(&it.x) - p.e.transpose() * &it.w;
        let re = &p.f - &p.e * &it.y;
        let pobj = p.c.dot(&it.y) + p.c0;
        let dobj = ctx.blocks.iter().zip(&it.x).map(|(b, x)| inner(&b.f0, x)).sum::<f64>() + p.f.dot(&it.w) + p.c0;
        let xz: f64 = it.x.iter().zip(&it.z).map(|(x, z)| inner(x, z)).sum();
        let mu = xz / nblk.max(1) as f64;
        let denom = 1.0f64.max(pobj.abs()).max(dobj.abs());
        let relgap = (dobj - pobj).abs().max(xz) / denom;
        let pinf = rp.iter().map(|r| r.amax()).fold(re.amax(), f64::max) / (1.0 + bnorm);
        let dinf = rd.amax() / (1.0 + cnorm);
        if opts.verbose {
            eprintln!("{iter:3} p={pobj:+.9e} d={dobj:+.9e} gap={relgap:.2e} pinf={pinf:.2e} dinf={dinf:.2e}");
        }
        let merit = relgap.max(pinf).max(dinf);
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, it.y.iter().copied().collect(), it.x.clone(), dobj - p.c0, dinf));
        }
        if relgap <= opts.tol && pinf <= opts.tol && dinf <= opts.tol {
            status = Status::Optimal;
            break;
        }
        let xnorm = it.x.iter().map(|x| x.amax()).fold(it.w.amax(), f64::max);
        if xnorm > DIVERGENCE && pinf > opts.tol.sqrt() {
            status = Status::Infeasible;
            break;
        }
        if it.y.amax() > DIVERGENCE && dinf > opts.tol.sqrt() {
            status = Status::Unbounded;
            break;
        }
        if iter == opts.max_iter {
            break;
        }

        // factorizations
        let lx: Option<Vec<_>> = it.x.iter().map(chol).collect();
        let lz: Option<Vec<_>> = it.z.iter().map(chol).collect();
        let (lx, lz) = match (lx, lz) {
            (Some(a), Some(b)) => (a, b),
            _ => break,
        };
        let zinv: Vec<RMat> = lz.iter().map(|l| l.inverse()).collect();
        let m = ctx.schur(&it.x, &zinv);
        if neq > 0 {
            let md = m.trace() / nv as f64;
            let ed = ctx.ete.trace() / nv as f64;
            ctx.rho = if ed > 0.0 { md.max(1e-8) / ed } else { 0.0 };
        }
        let k = &m + &ctx.ete * ctx.rho;
        let kch = match chol_reg(&k) {
            Some(c) => c,
            None => break,
        };
        let (kinv_et, sch) = if neq > 0 {
            let kinv_et = kch.solve(&p.e.transpose());
            let s = &p.e * &kinv_et;
            match chol_reg(&sym(s)) {
                Some(c) => (kinv_et, Some(c)),
                None => break,
            }
        } else {
            (RMat::zeros(nv, 0), None)
        };
        // HKM: ΔX = Rc − sym(X ΔZ Z⁻¹)
        let hkm = |x: &RMat, d: &RMat, zi: &RMat| sym(x * d * zi);
        let wrw: Vec<RMat> = it.x.iter().zip(&rp).zip(&zinv).map(|((x, r), zi)| hkm(x, r, zi)).collect();

        let solve_dir = |rc: &[RMat]| -> Direction {
            let tmp: Vec<RMat> = rc.iter().zip(&wrw).map(|(a, b)| a - b).collect();
            let g = ctx.adjoint(&tmp) + &rd;
            let kkt = |r1: &DVector<f64>, r2: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
                let mut rhs = r1.clone();
                if neq > 0 {
                    rhs += p.e.transpose() * r2 * ctx.rho;
                }
                let kg = kch.solve(&rhs);
                match &sch {
                    Some(s) => {
                        let dw = s.solve(&(&p.e * &kg - r2));
                        (kg - &kinv_et * &dw, dw)
                    }
                    None => (kg, DVector::zeros(0)),
                }
            };
            let (mut dy, mut dw) = kkt(&g, &re);
            // iterative refinement against the unregularized system
            for _ in 0..2 {
                let r1 = &g - &m * &dy - p.e.transpose() * &dw;
                let r2 = &re - &p.e * &dy;
                let (cy, cw) = kkt(&r1, &r2);
                dy += cy;
                dw += cw;
            }
            let ady = ctx.apply(&dy, false);
            let dz: Vec<RMat> = rp.iter().zip(&ady).map(|(r, a)| r + a).collect();
            let dx: Vec<RMat> =
                rc.iter().zip(it.x.iter().zip(&zinv)).zip(&dz).map(|((r, (x, zi)), d)| r - hkm(x, d, zi)).collect();
            Direction { dy, dw, dz, dx }
        };
        let steps = |d: &Direction| -> (f64, f64) {
            let ap = lz.iter().zip(&d.dz).map(|(l, dz)| step_length(l, dz)).fold(1.0, f64::min);
            let ad = lx.iter().zip(&d.dx).map(|(l, dx)| step_length(l, dx)).fold(1.0, f64::min);
            (ap, ad)
        };

        // predictor
        let rc_aff: Vec<RMat> = it.x.iter().map(|x| -x).collect();
        let da = solve_dir(&rc_aff);
        let (ap, ad) = steps(&da);
        let mu_aff: f64 = it
            .x
            .iter()
            .zip(&da.dx)
            .zip(it.z.iter().zip(&da.dz))
            .map(|((x, dx), (z, dz))| inner(&(x + dx * ad), &(z + dz * ap)))
            .sum::<f64>()
            / nblk as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let rc: Vec<RMat> = it
            .x
            .iter()
            .zip(&zinv)
            .zip(da.dx.iter().zip(&da.dz))
            .map(|((x, zi), (dx, dz))| zi * (sigma * mu) - x - sym(dx * dz * zi))
            .collect();
        let d = solve_dir(&rc);
        let (ap, ad) = steps(&d);
        if opts.verbose {
            eprintln!("     sigma={sigma:.2e} ap={ap:.3} ad={ad:.3}");
        }
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        it.y += &d.dy * ap;
        for (z, dz) in it.z.iter_mut().zip(&d.dz) {
            *z = sym(&*z + dz * ap);
        }
        for (x, dx) in it.x.iter_mut().zip(&d.dx) {
            *x = sym(&*x + dx * ad);
        }
        it.w += &d.dw * ad;
    }

    if status == Status::Optimal {
        let dobj = ctx.blocks.iter().zip(&it.x).map(|(b, x)| inner(&b.f0, x)).sum::<f64>() + p.f.dot(&it.w);
        let rd = &p.c + ctx.adjoint(&it.x) - p.e.transpose() * &it.w;
        return IpmResult {
            status,
            y: it.y.iter().copied().collect(),
            duals: it.x,
            dobj,
            dinf: rd.amax() / (1.0 + cnorm),
            iterations,
            tol: opts.tol,
        };
    }
    let (_, y, duals, dobj, dinf) = best.expect("at least one iterate");
    IpmResult { status, y, duals, dobj, dinf, iterations, tol: opts.tol }
}
