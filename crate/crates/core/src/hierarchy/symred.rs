//! The extendability SDP written in the `S_n`-invariant basis
//! `ρ = Σ x_{s,s',D} |s⟩⟨s'| ⊗ C_D` and block-diagonalized over partitions of `n`.

use std::collections::{BTreeMap, HashMap};

use super::dense::check_side;
use super::{class_of, to_eq, BuildOptions, Decoder, HierarchySdp, LinExpr, Method, PsdBlock, SdpProblem, SparseSym};
use crate::blockreduce::TransformTable;
use crate::csep::{CSepProblem, ConstraintKind};
use crate::error::Result;
use crate::invbasis::big_to_f64;
use crate::symcomb::{multinomial, orbit_representatives, partitions, types, FrequencyMatrix, TypeVector};

type Key = (usize, usize, FrequencyMatrix);

struct OrbitVars {
    index: HashMap<Key, usize>,
    keys: Vec<Vec<Key>>,
}

impl OrbitVars {
    fn var(&self, s: usize, sp: usize, m: &FrequencyMatrix) -> Option<usize> {
        self.index.get(&(s, sp, m.clone())).copied()
    }
}

fn diag_matrix(t: &TypeVector) -> FrequencyMatrix {
    let d = t.d();
    let mut m = FrequencyMatrix::zeros(d);
    for i in 0..d {
        m.entries[i * d + i] = t.counts[i];
    }
    m
}

pub fn build_sym_reduced_sdp(p: &CSepProblem, n: usize, opts: &BuildOptions) -> Result<HierarchySdp> {
    let (da, db) = (p.dim_a, p.dim_b);
    let orbs = orbit_representatives(n, db);
    let allowed = |s: usize, sp: usize, m: &FrequencyMatrix| -> bool {
        if !opts.dephase {
            return true;
        }
        class_of(s, da, p.classical_a) == class_of(sp, da, p.classical_a)
            && (0..db).all(|i| {
                (0..db).all(|j| m.get(i, j) == 0 || class_of(i, db, p.classical_b) == class_of(j, db, p.classical_b))
            })
    };

    // variables tied by transposition: x_{s,s',D} = x_{s',s,Dᵀ}
    let mut vars = OrbitVars { index: HashMap::new(), keys: vec![] };
    for s in 0..da {
        for sp in 0..da {
            for m in &orbs {
                if !allowed(s, sp, m) || vars.index.contains_key(&(s, sp, m.clone())) {
                    continue;
                }
                let v = vars.keys.len();
                let key = (s, sp, m.clone());
                let tkey = (sp, s, m.transpose());
                vars.index.insert(key.clone(), v);
                if tkey != key {
                    vars.index.insert(tkey.clone(), v);
                    vars.keys.push(vec![key, tkey]);
                } else {
                    vars.keys.push(vec![key]);
                }
            }
        }
    }
    let nv = vars.keys.len();

    // one PSD block per partition
    let mut blocks = vec![];
    for lambda in partitions(n, db) {
        let table = TransformTable::new(&lambda, db);
        let k = table.size();
        let side = da * k;
        check_side(side, opts)?;
        let mut per_var: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
        for s in 0..da {
            for sp in s..da {
                for tau in 0..k {
                    for gamma in 0..k {
                        let (row, col) = (s * k + tau, sp * k + gamma);
                        if row > col {
                            continue;
                        }
                        for (m, c) in table.entry(tau, gamma) {
                            if let Some(v) = vars.var(s, sp, m) {
                                per_var.entry(v).or_default().push((row, col, *c as f64));
                            }
                        }
                    }
                }
            }
        }
        blocks.push(PsdBlock {
            side,
            constant: SparseSym::new(side, vec![]),
            coeffs: per_var.into_iter().map(|(v, e)| (v, SparseSym::new(side, e))).filter(|(_, f)| !f.is_empty()).collect(),
        });
    }

    let mut eqs = vec![];
    // normalization
    let mut tr = LinExpr::new();
    for t in types(n, db) {
        let d = diag_matrix(&t);
        let mult = big_to_f64(&multinomial(n, &t)?);
        for s in 0..da {
            if let Some(v) = vars.var(s, s, &d) {
                *tr.entry(v).or_insert(0.0) += mult;
            }
        }
    }
    eqs.extend(to_eq(tr, 1.0));

    // Alice: coefficientwise in C_D
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
                        for m in &orbs {
                            let mt = m.transpose();
                            if ((mi, ri), m) > ((mj, rj), &mt) {
                                continue;
                            }
                            let mut e = LinExpr::new();
                            for li in 0..l {
                                if let Some(v) = vars.var(sidx(li, mi, ri), sidx(li, mj, rj), m) {
                                    *e.entry(v).or_insert(0.0) += 1.0;
                                }
                            }
                            let wv = w[(mi, mj)];
                            if wv != 0.0 {
                                for li in 0..l {
                                    for mk in 0..mdim {
                                        if let Some(v) = vars.var(sidx(li, mk, ri), sidx(li, mk, rj), m) {
                                            *e.entry(v).or_insert(0.0) -= wv;
                                        }
                                    }
                                }
                            }
                            eqs.extend(to_eq(e, 0.0));
                        }
                    }
                }
            }
        }
    }

    // Bob: tr_{(B_L)_1} ρ = W ⊗ ρ with A kept, coefficientwise in |s⟩⟨s'| ⊗ C_D over the other copies
    let rest_orbs = orbit_representatives(n - 1, db);
    for c in &p.bob_constraints {
        if c.kind == ConstraintKind::FixedPointIdentity {
            continue;
        }
        let (l, mdim, r) = c.dims();
        let w = &c.fixed_operator;
        let bidx = |li: usize, mi: usize, ri: usize| (li * mdim + mi) * r + ri;
        for s in 0..da {
            for sp in 0..da {
                for mi in 0..mdim {
                    for ri in 0..r {
                        for mj in 0..mdim {
                            for rj in 0..r {
                                for m in &rest_orbs {
                                    let mt = m.transpose();
                                    if ((s, mi, ri), m) > ((sp, mj, rj), &mt) {
                                        continue;
                                    }
                                    let mut e = LinExpr::new();
                                    for li in 0..l {
                                        if let Some(v) = vars.var(s, sp, &m.plus(bidx(li, mi, ri), bidx(li, mj, rj))) {
                                            *e.entry(v).or_insert(0.0) += 1.0;
                                        }
                                    }
                                    let wv = w[(mi, mj)];
                                    if wv != 0.0 {
                                        for li in 0..l {
                                            for mk in 0..mdim {
                                                if let Some(v) = vars.var(s, sp, &m.plus(bidx(li, mk, ri), bidx(li, mk, rj))) {
                                                    *e.entry(v).or_insert(0.0) -= wv;
                                                }
                                            }
                                        }
                                    }
                                    eqs.extend(to_eq(e, 0.0));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // objective: scale · tr[G ρ_{AB1}], ρ_{AB1} = Σ x_{s,s',D} |s⟩⟨s'| ⊗ Σ_{ij} [D − e_ij diagonal] mult |i⟩⟨j|
    let mut objective = vec![0.0; nv];
    let g = &p.objective;
    for t in types(n - 1, db) {
        let base = diag_matrix(&t);
        let mult = big_to_f64(&multinomial(n - 1, &t)?);
        for s in 0..da {
            for sp in 0..da {
                for i in 0..db {
                    for j in 0..db {
                        let gv = g[(s * db + i, sp * db + j)];
                        if gv == 0.0 {
                            continue;
                        }
                        if let Some(v) = vars.var(s, sp, &base.plus(i, j)) {
                            objective[v] += p.scale * gv * mult;
                        }
                    }
                }
            }
        }
    }

    let problem = SdpProblem::new(nv, objective, blocks, eqs, "sym", n);
    Ok(HierarchySdp { problem, method: Method::Sym, n, d_a: da, copy_dim: db, decoder: Decoder::Sym { keys: vars.keys } })
}

