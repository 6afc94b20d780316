//! PSD-preserving block transforms of S_n-invariant operators.
//!
//! For a partition `λ` the representative matrix `U_λ` has one column per
//! semistandard tableau, the (unnormalized, integer) polytabloid `u_τ`. For an
//! invariant `Z` the congruence `U_λᵀ Z U_λ` over all `λ` is a faithful PSD test.
//! Boxes map to tensor positions in row-major reading order.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invbasis::string_index;
use crate::linalg::RMat;
use crate::symcomb::{
    distinct_permutations, multinomial, signed_permutations, types, FrequencyMatrix, Partition,
    Tableau, TypeVector,
};

/// Sparse integer vector in the `d^n`-dimensional tensor space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polytabloid {
    pub tableau: Tableau,
    pub d: usize,
    /// `(flat index, coefficient)`, sorted by index, no zeros.
    pub entries: Vec<(usize, i64)>,
}

impl Polytabloid {
    pub fn norm_sq(&self) -> i64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }
    pub fn dense(&self) -> Vec<f64> {
        let n = self.tableau.shape.n();
        let mut v = vec![0.0; self.d.pow(n as u32)];
        for &(i, c) in &self.entries {
            v[i] = c as f64;
        }
        v
    }
}

/// Row-wise distinct rearrangements of a tableau's rows (the tabloid class).
fn row_equivalent(t: &Tableau) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for row in &t.rows {
        let perms = distinct_permutations(row);
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for prefix in &out {
            for p in &perms {
                let mut f = prefix.clone();
                f.push(p.clone());
                next.push(f);
            }
        }
        out = next;
    }
    out
}

/// Column contents of a filling, column by column.
fn columns(filling: &[Vec<usize>], shape: &Partition) -> Vec<Vec<usize>> {
    let conj = shape.conjugate();
    conj.iter()
        .enumerate()
        .map(|(j, &h)| (0..h).map(|i| filling[i][j]).collect())
        .collect()
}

pub fn polytabloid(t: &Tableau, d: usize) -> Result<Polytabloid> {
    if !t.is_semistandard() {
        return Err(Error::invalid("polytabloid: tableau is not semistandard"));
    }
    if t.rows.iter().flatten().any(|&x| x >= d) {
        return Err(Error::invalid("polytabloid: entry exceeds local dimension"));
    }
    let shape = &t.shape;
    let conj = shape.conjugate();
    let col_perms: Vec<Vec<(Vec<usize>, i64)>> = conj.iter().map(|&h| signed_permutations(h)).collect();
    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
    let mut filling: Vec<Vec<usize>> = shape.parts().iter().map(|&p| vec![0; p]).collect();
    for base in row_equivalent(t) {
        // iterate over the product of column permutations with a mixed-radix counter
        let mut idx = vec![0usize; conj.len()];
        loop {
            let mut sign = 1;
            for (j, &k) in idx.iter().enumerate() {
                let (p, s) = &col_perms[j][k];
                sign *= s;
                for (i, &pi) in p.iter().enumerate() {
                    filling[i][j] = base[pi][j];
                }
            }
            let word: Vec<usize> = filling.iter().flatten().copied().collect();
            *acc.entry(string_index(&word, d)).or_insert(0) += sign;
            let mut c = 0;
            while c < idx.len() {
                idx[c] += 1;
                if idx[c] < col_perms[c].len() {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
            if c == idx.len() {
                break;
            }
        }
    }
    Ok(Polytabloid {
        tableau: t.clone(),
        d,
        entries: acc.into_iter().filter(|&(_, v)| v != 0).collect(),
    })
}

/// Dense `U_λ` (columns are polytabloids in tableau order).
pub fn representative_matrix(lambda: &Partition, d: usize, cap: usize) -> Result<RMat> {
    let n = lambda.n();
    let total = d.checked_pow(n as u32).filter(|&t| t <= cap).ok_or_else(|| {
        Error::cap(format!("dense U_λ on {d}^{n} exceeds cap {cap}"))
    })?;
    let tabs = crate::symcomb::semistandard_tableaux(lambda, d);
    let mut u = RMat::zeros(total, tabs.len());
    for (c, t) in tabs.iter().enumerate() {
        for (i, v) in polytabloid(t, d)?.entries {
            u[(i, c)] = v as f64;
        }
    }
    Ok(u)
}

/// One real symmetric block per partition.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlockMatrix {
    pub blocks: BTreeMap<Partition, RMat>,
}

impl BlockMatrix {
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks.values().map(crate::linalg::min_eig_r).fold(f64::INFINITY, f64::min)
    }
}

/// Bose (row-shape) transform: entry `((s,τ),(s',γ)) = m(τ) m(γ) z_{s,s',τ,γ}`.
/// `coeffs` is keyed by `(s, s', t, t')` with `t, t'` indices into `types(n, d)`.
pub fn block_transform_row(
    coeffs: &BTreeMap<(usize, usize, usize, usize), f64>,
    n: usize,
    d: usize,
    side_dim: usize,
) -> RMat {
    let ts = types(n, d);
    let mult: Vec<f64> = ts.iter().map(|t| crate::invbasis::big_to_f64(&multinomial(n, t).unwrap())).collect();
    let k = ts.len();
    let mut out = RMat::zeros(side_dim * k, side_dim * k);
    for (&(s, sp, t, tp), &z) in coeffs {
        out[(s * k + t, sp * k + tp)] += mult[t] * mult[tp] * z;
    }
    out
}

/// Integer polynomial in the `d²` variables `x_ij`, monomials keyed by exponent matrix.
type Poly = HashMap<FrequencyMatrix, i64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = FrequencyMatrix {
                d: ma.d,
                entries: ma.entries.iter().zip(&mb.entries).map(|(x, y)| x + y).collect(),
            };
            *out.entry(m).or_insert(0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Expansion of `u_τᵀ A_D u_γ` over all orbits `D`: the monomial coefficients of
/// `G_{τ,γ}(x) = Σ_{a,b} u_τ[a] u_γ[b] Π_k x_{a_k b_k}`, computed column by column
/// as `h! · Σ_π sgn(π) Π_k x_{τ'(k,j), γ'(π k, j)}` summed over row-equivalent
/// fillings `τ'`, `γ'`.
pub fn g_polynomial(tau: &Tableau, gamma: &Tableau, d: usize) -> BTreeMap<FrequencyMatrix, i64> {
    assert_eq!(tau.shape, gamma.shape, "G polynomial needs equal shapes");
    let shape = &tau.shape;
    let conj = shape.conjugate();
    let perms: Vec<Vec<(Vec<usize>, i64)>> = conj.iter().map(|&h| signed_permutations(h)).collect();
    let fact: Vec<i64> = conj.iter().map(|&h| (1..=h as i64).product()).collect();
    let tf = row_equivalent(tau);
    let gf = row_equivalent(gamma);
    let mut total = Poly::new();
    for ft in &tf {
        let ct = columns(ft, shape);
        for fg in &gf {
            let cg = columns(fg, shape);
            let mut prod: Poly = Poly::from([(FrequencyMatrix::zeros(d), 1)]);
            for j in 0..conj.len() {
                let mut col = Poly::new();
                for (p, s) in &perms[j] {
                    let mut m = FrequencyMatrix::zeros(d);
                    for k in 0..conj[j] {
                        m.entries[ct[j][k] * d + cg[j][p[k]]] += 1;
                    }
                    *col.entry(m).or_insert(0) += s * fact[j];
                }
                col.retain(|_, c| *c != 0);
                prod = poly_mul(&prod, &col);
                if prod.is_empty() {
                    break;
                }
            }
            for (m, c) in prod {
                *total.entry(m).or_insert(0) += c;
            }
        }
    }
    total.into_iter().filter(|&(_, c)| c != 0).collect()
}

/// Direct evaluation of `u_τᵀ A_D u_γ` for every `D` from the sparse polytabloids.
pub fn sparse_pairing(pt: &Polytabloid, pg: &Polytabloid) -> BTreeMap<FrequencyMatrix, i64> {
    let d = pt.d;
    let n = pt.tableau.shape.n();
    let mut out: BTreeMap<FrequencyMatrix, i64> = BTreeMap::new();
    for &(a, ca) in &pt.entries {
        let sa = crate::invbasis::index_string(a, d, n);
        for &(b, cb) in &pg.entries {
            let sb = crate::invbasis::index_string(b, d, n);
            *out.entry(FrequencyMatrix::of_pair(&sa, &sb, d)).or_insert(0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Memoized transform coefficients for one `(λ, d)`.
#[derive(Clone, Debug)]
pub struct TransformTable {
    pub lambda: Partition,
    pub d: usize,
    pub tableaux: Vec<Tableau>,
    /// `coeff[τ][γ]` lists `(D, u_τᵀ A_D u_γ)`.
    coeff: Vec<Vec<Vec<(FrequencyMatrix, i64)>>>,
}

impl TransformTable {
    pub fn new(lambda: &Partition, d: usize) -> Self {
        let tableaux = crate::symcomb::semistandard_tableaux(lambda, d);
        let k = tableaux.len();
        let mut coeff = vec![vec![Vec::new(); k]; k];
        for i in 0..k {
            for j in i..k {
                let g: Vec<(FrequencyMatrix, i64)> = g_polynomial(&tableaux[i], &tableaux[j], d).into_iter().collect();
                if i != j {
                    // u_γᵀ A_{Dᵀ} u_τ = u_τᵀ A_D u_γ
                    coeff[j][i] = g.iter().map(|(m, c)| (m.transpose(), *c)).collect();
                    coeff[j][i].sort();
                }
                coeff[i][j] = g;
            }
        }
        TransformTable { lambda: lambda.clone(), d, tableaux, coeff }
    }

    pub fn size(&self) -> usize {
        self.tableaux.len()
    }

    pub fn entry(&self, tau: usize, gamma: usize) -> &[(FrequencyMatrix, i64)] {
        &self.coeff[tau][gamma]
    }

    /// `(I_side ⊗ U_λ)ᵀ Z (I_side ⊗ U_λ)` for `Z = Σ z_{s,s',D} |s⟩⟨s'| ⊗ A_D`.
    pub fn transform(&self, coeffs: &BTreeMap<(usize, usize, FrequencyMatrix), f64>, side_dim: usize) -> RMat {
        let k = self.size();
        let mut out = RMat::zeros(side_dim * k, side_dim * k);
        for s in 0..side_dim {
            for sp in 0..side_dim {
                for t in 0..k {
                    for g in 0..k {
                        let mut acc = 0.0;
                        for (m, c) in &self.coeff[t][g] {
                            if let Some(z) = coeffs.get(&(s, sp, m.clone())) {
                                acc += z * *c as f64;
                            }
                        }
                        out[(s * k + t, sp * k + g)] = acc;
                    }
                }
            }
        }
        out
    }
}

/// General-shape transform via the G polynomial.
pub fn block_transform_general(
    coeffs: &BTreeMap<(usize, usize, FrequencyMatrix), f64>,
    lambda: &Partition,
    d: usize,
    side_dim: usize,
) -> RMat {
    TransformTable::new(lambda, d).transform(coeffs, side_dim)
}

/// Same transform through explicit sparse polytabloid pairings (test fallback).
pub fn block_transform_sparse(
    coeffs: &BTreeMap<(usize, usize, FrequencyMatrix), f64>,
    lambda: &Partition,
    d: usize,
    side_dim: usize,
) -> Result<RMat> {
    let tabs = crate::symcomb::semistandard_tableaux(lambda, d);
    let polys: Vec<Polytabloid> = tabs.iter().map(|t| polytabloid(t, d)).collect::<Result<_>>()?;
    let k = tabs.len();
    let mut out = RMat::zeros(side_dim * k, side_dim * k);
    for t in 0..k {
        for g in 0..k {
            let pairing = sparse_pairing(&polys[t], &polys[g]);
            for s in 0..side_dim {
                for sp in 0..side_dim {
                    let mut acc = 0.0;
                    for (m, c) in &pairing {
                        if let Some(z) = coeffs.get(&(s, sp, m.clone())) {
                            acc += z * *c as f64;
                        }
                    }
                    out[(s * k + t, sp * k + g)] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Dense oracle: `(I_side ⊗ U_λ)ᵀ Z (I_side ⊗ U_λ)`.
pub fn dense_transform(z: &RMat, lambda: &Partition, d: usize, side_dim: usize, cap: usize) -> Result<RMat> {
    let u = representative_matrix(lambda, d, cap)?;
    if z.nrows() != side_dim * u.nrows() || z.ncols() != z.nrows() {
        return Err(Error::dim(format!(
            "dense_transform: Z has side {}, expected {}",
            z.nrows(),
            side_dim * u.nrows()
        )));
    }
    let full = RMat::identity(side_dim, side_dim).kronecker(&u);
    Ok(full.transpose() * z * full)
}

/// Dense `Σ z_{s,s',D} |s⟩⟨s'| ⊗ A_D`.
pub fn dense_from_orbit_coefficients(
    coeffs: &BTreeMap<(usize, usize, FrequencyMatrix), f64>,
    n: usize,
    d: usize,
    side_dim: usize,
    cap: usize,
) -> Result<RMat> {
    let total = d.checked_pow(n as u32).filter(|&t| t <= cap).ok_or_else(|| Error::cap("dense orbit reconstruction"))?;
    let mut out = RMat::zeros(side_dim * total, side_dim * total);
    for ((s, sp, m), &z) in coeffs {
        for (a, b) in crate::invbasis::orbit_pairs(m) {
            out[(s * total + a, sp * total + b)] += z;
        }
    }
    Ok(out)
}

/// Polytabloid of the row shape with content `t`: the sum of all strings of type `t`.
pub fn row_polytabloid(t: &TypeVector) -> Result<Polytabloid> {
    let shape = Partition::new(vec![t.n()])?;
    let tab = Tableau::new(shape, vec![t.canonical_string()])?;
    polytabloid(&tab, t.d())
}

/// All partitions of `n` with at most `d` rows, each paired with its table.
pub fn all_tables(n: usize, d: usize) -> Vec<TransformTable> {
    crate::symcomb::partitions(n, d).iter().map(|l| TransformTable::new(l, d)).collect()
}
