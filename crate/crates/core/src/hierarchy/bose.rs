//! Bose-symmetric extensions: a state on `A ⊗ (B B̄)^{⊗n}` supported on
//! `A ⊗ ∨ⁿ(B B̄)`. The Bob constraint acts on the last copy with `B̄` traced out.

use std::collections::{BTreeMap, HashMap};

use super::dense::{check_side, trace_out_equations, DenseVars};
use super::{class_of, to_eq, BuildOptions, Decoder, EqConstraint, HierarchySdp, LinExpr, Method, PsdBlock, SdpProblem, SparseSym};
use crate::csep::{CSepProblem, ConstraintKind};
use crate::error::{Error, Result};
use crate::invbasis::big_to_f64;
use crate::linalg::{digits, flat};
use crate::symcomb::{multinomial, type_index, types, TypeVector};

pub fn build_bose_sdp(p: &CSepProblem, n: usize, opts: &BuildOptions) -> Result<HierarchySdp> {
    let (da, db) = (p.dim_a, p.dim_b);
    let e = db * db;
    let total = super::checked_pow(e, n).ok_or_else(|| Error::cap("dimension overflows"))?;
    let dim = da.checked_mul(total).ok_or_else(|| Error::cap("dimension overflows"))?;
    check_side(dim, opts)?;
    let dims: Vec<usize> = std::iter::once(da).chain(std::iter::repeat_n(e, n)).collect();
    let vars = DenseVars::new(dim, |i, j| {
        !opts.dephase || class_of(i / total, da, p.classical_a) == class_of(j / total, da, p.classical_a)
    });

    let mut eqs = vec![vars.trace_eq()];
    // Bose symmetry: ρ[π i, j] = ρ[i, j] for adjacent transpositions π
    for (v, &(i, j)) in vars.pairs.iter().enumerate() {
        for (row, col) in [(i, j), (j, i)] {
            let dr = digits(row, &dims);
            for k in 1..n {
                let mut sr = dr.clone();
                sr.swap(k, k + 1);
                let w = vars.var(flat(&sr, &dims), col).expect("support is permutation invariant");
                if w > v {
                    eqs.push(EqConstraint { coeffs: vec![(v, 1.0), (w, -1.0)], rhs: 0.0 });
                }
            }
        }
    }
    let single = |a: usize, b: usize| vars.var(a, b).map(|v| LinExpr::from([(v, 1.0)])).unwrap_or_default();
    for c in &p.alice_constraints {
        let (_, _, r) = c.dims();
        eqs.extend(trace_out_equations(1, c, r * total, single));
    }
    let head = total / e;
    for c in &p.bob_constraints {
        let (_, _, r) = c.dims();
        // X on (BB̄)^{n-1} ⊗ L ⊗ M ⊗ R with A and the last B̄ traced
        eqs.extend(trace_out_equations(head, c, r, |a, b| {
            let mut ex = LinExpr::new();
            let (pre_a, b_a) = (a / db, a % db);
            let (pre_b, b_b) = (b / db, b % db);
            for s in 0..da {
                for bar in 0..db {
                    let i = s * total + pre_a * e + b_a * db + bar;
                    let j = s * total + pre_b * e + b_b * db + bar;
                    if let Some(v) = vars.var(i, j) {
                        *ex.entry(v).or_insert(0.0) += 1.0;
                    }
                }
            }
            ex
        }));
    }

    let tail = total / e;
    let g = &p.objective;
    let objective = vars.objective(|i, j| {
        let (si, ci, ri) = (i / total, (i % total) / tail, i % tail);
        let (sj, cj, rj) = (j / total, (j % total) / tail, j % tail);
        if ri != rj || ci % db != cj % db {
            0.0
        } else {
            p.scale * g[(si * db + ci / db, sj * db + cj / db)]
        }
    });
    let problem = SdpProblem::new(vars.len(), objective, vec![vars.block()], eqs, "bose", n);
    Ok(HierarchySdp {
        problem,
        method: Method::Bose,
        n,
        d_a: da,
        copy_dim: e,
        decoder: Decoder::Dense { dim, pairs: vars.pairs.clone() },
    })
}

type Key = (usize, usize, usize, usize);

pub fn build_bose_reduced_sdp(p: &CSepProblem, n: usize, opts: &BuildOptions) -> Result<HierarchySdp> {
    let (da, db) = (p.dim_a, p.dim_b);
    let e = db * db;
    let ts = types(n, e);
    let k = ts.len();
    let side = da.checked_mul(k).ok_or_else(|| Error::cap("dimension overflows"))?;
    check_side(side, opts)?;
    let mult: Vec<f64> = ts.iter().map(|t| multinomial(n, t).map(|m| big_to_f64(&m))).collect::<Result<_>>()?;

    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut keys: Vec<Vec<Key>> = vec![];
    for s in 0..da {
        for sp in 0..da {
            if opts.dephase && class_of(s, da, p.classical_a) != class_of(sp, da, p.classical_a) {
                continue;
            }
            for t in 0..k {
                for tp in 0..k {
                    let key = (s, sp, t, tp);
                    if index.contains_key(&key) {
                        continue;
                    }
                    let tkey = (sp, s, tp, t);
                    let v = keys.len();
                    index.insert(key, v);
                    if tkey != key {
                        index.insert(tkey, v);
                        keys.push(vec![key, tkey]);
                    } else {
                        keys.push(vec![key]);
                    }
                }
            }
        }
    }
    let nv = keys.len();
    let var = |s: usize, sp: usize, t: usize, tp: usize| index.get(&(s, sp, t, tp)).copied();

    // PSD block: entry ((s,t),(s',t')) = m(t) m(t') x
    let mut per_var: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
    for s in 0..da {
        for sp in s..da {
            for t in 0..k {
                for tp in 0..k {
                    let (row, col) = (s * k + t, sp * k + tp);
                    if row > col {
                        continue;
                    }
                    if let Some(v) = var(s, sp, t, tp) {
                        per_var.entry(v).or_default().push((row, col, mult[t] * mult[tp]));
                    }
                }
            }
        }
    }
    let block = PsdBlock {
        side,
        constant: SparseSym::new(side, vec![]),
        coeffs: per_var.into_iter().map(|(v, e)| (v, SparseSym::new(side, e))).collect(),
    };

    let mut eqs = vec![];
    let mut tr = LinExpr::new();
    for s in 0..da {
        for t in 0..k {
            if let Some(v) = var(s, s, t, t) {
                *tr.entry(v).or_insert(0.0) += mult[t];
            }
        }
    }
    eqs.extend(to_eq(tr, 1.0));

    for c in &p.alice_constraints {
        if c.kind == ConstraintKind::FixedPointIdentity {
            continue;
        }
        let (l, mdim, r) = c.dims();
        let w = &c.fixed_operator;
        let sidx = |li: usize, mi: usize, ri: usize| (li * mdim + mi) * r + ri;
        for mi in 0..mdim {
            for ri in 0..r {
                for mj in 0..mdim {
                    for rj in 0..r {
                        for t in 0..k {
                            for tp in 0..k {
                                if ((mi, ri), t) > ((mj, rj), tp) {
                                    continue;
                                }
                                let mut ex = LinExpr::new();
                                for li in 0..l {
                                    if let Some(v) = var(sidx(li, mi, ri), sidx(li, mj, rj), t, tp) {
                                        *ex.entry(v).or_insert(0.0) += 1.0;
                                    }
                                }
                                let wv = w[(mi, mj)];
                                if wv != 0.0 {
                                    for li in 0..l {
                                        for mk in 0..mdim {
                                            if let Some(v) = var(sidx(li, mk, ri), sidx(li, mk, rj), t, tp) {
                                                *ex.entry(v).or_insert(0.0) -= wv;
                                            }
                                        }
                                    }
                                }
                                eqs.extend(to_eq(ex, 0.0));
                            }
                        }
                    }
                }
            }
        }
    }

    // Bob: y_{t,t'} = Σ_s x_{s,s,t,t'}; trace L and B̄ of the last copy
    let y = |t: &TypeVector, tp: &TypeVector| -> LinExpr {
        let (Some(a), Some(b)) = (type_index(&ts, t), type_index(&ts, tp)) else { return LinExpr::new() };
        let mut ex = LinExpr::new();
        for s in 0..da {
            if let Some(v) = var(s, s, a, b) {
                *ex.entry(v).or_insert(0.0) += 1.0;
            }
        }
        ex
    };
    let rest = types(n - 1, e);
    for c in &p.bob_constraints {
        if c.kind == ConstraintKind::FixedPointIdentity {
            continue;
        }
        let (l, mdim, r) = c.dims();
        let w = &c.fixed_operator;
        let sym = |li: usize, mi: usize, ri: usize, bar: usize| ((li * mdim + mi) * r + ri) * db + bar;
        for mi in 0..mdim {
            for ri in 0..r {
                for mj in 0..mdim {
                    for rj in 0..r {
                        for (ua, u) in rest.iter().enumerate() {
                            for (ub, up) in rest.iter().enumerate() {
                                if ((mi, ri), ua) > ((mj, rj), ub) {
                                    continue;
                                }
                                let mut ex = LinExpr::new();
                                for li in 0..l {
                                    for bar in 0..db {
                                        let term = y(&u.plus(sym(li, mi, ri, bar)), &up.plus(sym(li, mj, rj, bar)));
                                        super::add_expr(&mut ex, &term, 1.0);
                                    }
                                }
                                let wv = w[(mi, mj)];
                                if wv != 0.0 {
                                    for li in 0..l {
                                        for mk in 0..mdim {
                                            for bar in 0..db {
                                                let term = y(&u.plus(sym(li, mk, ri, bar)), &up.plus(sym(li, mk, rj, bar)));
                                                super::add_expr(&mut ex, &term, -wv);
                                            }
                                        }
                                    }
                                }
                                eqs.extend(to_eq(ex, 0.0));
                            }
                        }
                    }
                }
            }
        }
    }

    // objective: ρ_{AB1}[(s,b),(s',b')] = Σ x_{s,s',t,t'} Σ_{b̄} [t − e_{(b,b̄)} = t' − e_{(b',b̄)}] mult(n−1, ·)
    let mut objective = vec![0.0; nv];
    let g = &p.objective;
    for u in &rest {
        let mu = big_to_f64(&multinomial(n - 1, u)?);
        for bar in 0..db {
            for b in 0..db {
                let t = type_index(&ts, &u.plus(b * db + bar)).expect("type exists");
                for bp in 0..db {
                    let tp = type_index(&ts, &u.plus(bp * db + bar)).expect("type exists");
                    for s in 0..da {
                        for sp in 0..da {
                            let gv = g[(s * db + b, sp * db + bp)];
                            if gv == 0.0 {
                                continue;
                            }
                            if let Some(v) = var(s, sp, t, tp) {
                                objective[v] += p.scale * gv * mu;
                            }
                        }
                    }
                }
            }
        }
    }

    let problem = SdpProblem::new(nv, objective, vec![block], eqs, "bose-reduced", n);
    Ok(HierarchySdp { problem, method: Method::BoseReduced, n, d_a: da, copy_dim: e, decoder: Decoder::BoseSym { keys } })
}
