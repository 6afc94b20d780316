//! Canonical bases of S_n-invariant operator spaces.
//!
//! * Full space: `A_D = sum_{(a,b): D(a,b) = D} |a><b|`, one 0/1 matrix per orbit of
//!   index pairs, labelled by a [`FrequencyMatrix`].
//! * Symmetric subspace: `C_{t,t'} = |s_t><s_t'|` with `|s_t>` the unnormalized sum of
//!   all strings of type `t`; equivalently `C_{t,t'} = sum_{D in T(t,t')} A_D` over
//!   contingency tables with margins `(t, t')`.
//!
//! Strings map to flat indices big-endian (copy 1 is the most significant digit).

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::symcomb::{
    contingency_tables, multinomial, types, FrequencyMatrix, TypeVector,
};

/// Default cap on `d^n` for dense materialization.
pub const DENSE_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    /// `A_D` on the full tensor power.
    Full,
    /// `C_{t,t'}` on the symmetric subspace (row/column sums of `d`).
    Bose,
}

/// One element of an invariant basis. For `Bose`, `d` is any member of the
/// class; the element is identified by its margins.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantBasisElement {
    pub d: FrequencyMatrix,
    pub local_dim: usize,
    pub n: usize,
    pub kind: BasisKind,
}

impl InvariantBasisElement {
    pub fn full(d: FrequencyMatrix) -> Self {
        let (local_dim, n) = (d.d, d.n());
        InvariantBasisElement { d, local_dim, n, kind: BasisKind::Full }
    }
    pub fn bose(t: &TypeVector, tp: &TypeVector) -> Result<Self> {
        let d = contingency_tables(t, tp)?.into_iter().next().expect("nonempty");
        let (local_dim, n) = (d.d, d.n());
        Ok(InvariantBasisElement { d, local_dim, n, kind: BasisKind::Bose })
    }
    /// Number of nonzero entries (orbit size, or product of type multinomials).
    pub fn support_size(&self) -> BigUint {
        match self.kind {
            BasisKind::Full => self.d.orbit_size(),
            BasisKind::Bose => {
                multinomial(self.n, &self.d.row_sums()).unwrap()
                    * multinomial(self.n, &self.d.col_sums()).unwrap()
            }
        }
    }
    pub fn dense(&self, cap: usize) -> Result<RMat> {
        match self.kind {
            BasisKind::Full => dense_orbit_matrix(&self.d, cap),
            BasisKind::Bose => dense_bose(&self.d.row_sums(), &self.d.col_sums(), cap),
        }
    }
}

/// `|i><j|` on a side factor tensored with an invariant core element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideBasisElement {
    pub side_pair: (usize, usize),
    pub side_dim: usize,
    pub core: InvariantBasisElement,
}

pub fn string_index(s: &[usize], d: usize) -> usize {
    s.iter().fold(0, |acc, &x| acc * d + x)
}

pub fn index_string(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut s = vec![0; n];
    for k in (0..n).rev() {
        s[k] = idx % d;
        idx /= d;
    }
    s
}

fn check_cap(d: usize, n: usize, cap: usize) -> Result<usize> {
    let mut total: usize = 1;
    for _ in 0..n {
        total = total.checked_mul(d).ok_or_else(|| Error::cap("d^n overflows"))?;
    }
    if total > cap {
        return Err(Error::cap(format!("dense materialization of {d}^{n} = {total} exceeds cap {cap}")));
    }
    Ok(total)
}

/// All index pairs `(a, b)` of the orbit labelled by `d`.
pub fn orbit_pairs(m: &FrequencyMatrix) -> Vec<(usize, usize)> {
    let d = m.d;
    let n = m.n();
    let mut out = Vec::new();
    let mut rem = m.entries.clone();
    let mut a = vec![0usize; n];
    let mut b = vec![0usize; n];
    fn rec(
        k: usize,
        n: usize,
        d: usize,
        rem: &mut Vec<usize>,
        a: &mut Vec<usize>,
        b: &mut Vec<usize>,
        out: &mut Vec<(usize, usize)>,
    ) {
        if k == n {
            out.push((string_index(a, d), string_index(b, d)));
            return;
        }
        for cell in 0..d * d {
            if rem[cell] > 0 {
                rem[cell] -= 1;
                a[k] = cell / d;
                b[k] = cell % d;
                rec(k + 1, n, d, rem, a, b, out);
                rem[cell] += 1;
            }
        }
    }
    rec(0, n, d, &mut rem, &mut a, &mut b, &mut out);
    out
}

/// Dense 0/1 matrix `A_D`.
pub fn dense_orbit_matrix(m: &FrequencyMatrix, cap: usize) -> Result<RMat> {
    let total = check_cap(m.d, m.n(), cap)?;
    let mut out = RMat::zeros(total, total);
    for (a, b) in orbit_pairs(m) {
        out[(a, b)] = 1.0;
    }
    Ok(out)
}

/// All strings of type `t`, as flat indices.
pub fn type_strings(t: &TypeVector) -> Vec<usize> {
    let d = t.d();
    crate::symcomb::distinct_permutations(&t.canonical_string())
        .into_iter()
        .map(|s| string_index(&s, d))
        .collect()
}

/// Dense `C_{t,t'} = |s_t><s_t'|`.
pub fn dense_bose(t: &TypeVector, tp: &TypeVector, cap: usize) -> Result<RMat> {
    let total = check_cap(t.d(), t.n(), cap)?;
    let mut out = RMat::zeros(total, total);
    for a in type_strings(t) {
        for b in type_strings(tp) {
            out[(a, b)] = 1.0;
        }
    }
    Ok(out)
}

/// The orbit labels whose sum is `C_{t,t'}`.
pub fn bose_from_full(t: &TypeVector, tp: &TypeVector) -> Result<Vec<FrequencyMatrix>> {
    contingency_tables(t, tp)
}

/// `tr A_D`: nonzero only for diagonal `D`.
pub fn trace_full(m: &FrequencyMatrix) -> BigUint {
    if m.is_diagonal() {
        multinomial(m.n(), &m.diagonal()).unwrap()
    } else {
        BigUint::zero()
    }
}

/// `tr C_{t,t'} = multinomial(n, t) * [t == t']`.
pub fn trace_bose(t: &TypeVector, tp: &TypeVector, n: usize) -> Result<BigUint> {
    if t.n() != n || tp.n() != n {
        return Err(Error::invalid("trace_bose: types do not sum to n"));
    }
    Ok(if t == tp { multinomial(n, t)? } else { BigUint::zero() })
}

/// Partial trace of `C_{t,t'}` over copies `2..n`, as a list of
/// `(coefficient, (a1, b1))` single-copy matrix units. Empty when the types differ
/// by more than one unit transfer. When `t == t'` every symbol present in `t`
/// contributes a diagonal unit.
pub fn ptrace_tail_bose(t: &TypeVector, tp: &TypeVector, n: usize) -> Result<Vec<(BigUint, (usize, usize))>> {
    if t.n() != n || tp.n() != n || n == 0 {
        return Err(Error::invalid("ptrace_tail_bose: need equal type sums n >= 1"));
    }
    let d = t.d();
    let mut out = Vec::new();
    for x in 0..d {
        let Some(tr) = t.minus(x) else { continue };
        for y in 0..d {
            let Some(tpr) = tp.minus(y) else { continue };
            if tr == tpr {
                out.push((multinomial(n - 1, &tr)?, (x, y)));
            }
        }
    }
    Ok(out)
}

/// Split off copy 1 of `A_D`: `A_D = sum_{(i,j)} |i><j| (x) A_{D - e_ij}` over `n-1` copies.
pub fn branch_full(m: &FrequencyMatrix) -> Vec<((usize, usize), FrequencyMatrix)> {
    let d = m.d;
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if let Some(r) = m.minus(i, j) {
                out.push(((i, j), r));
            }
        }
    }
    out
}

/// One term of the branching of a Bose element when the `L` part of the last
/// copy is traced out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchTerm {
    pub t_red: TypeVector,
    pub tp_red: TypeVector,
    /// Matrix unit on the remaining `R` factor of the last copy.
    pub r_pair: (usize, usize),
    pub multiplicity: usize,
}

/// Trace the `L` factor of the last copy of `C_{t,t'}` where each copy has
/// composite dimension `d_l * d_r` (symbol `x = x_l * d_r + x_r`). The result is
/// expanded in `C^{(n-1)}_{u,u'} (x) |i><j|_R`.
pub fn branch_subfactor(t: &TypeVector, tp: &TypeVector, d_l: usize, d_r: usize) -> Result<Vec<BranchTerm>> {
    let d = t.d();
    if d != d_l * d_r || tp.d() != d {
        return Err(Error::dim(format!("branch_subfactor: local dim {d} != {d_l}*{d_r}")));
    }
    if t.n() != tp.n() || t.n() == 0 {
        return Err(Error::invalid("branch_subfactor: need equal type sums n >= 1"));
    }
    let mut acc: BTreeMap<(TypeVector, TypeVector, (usize, usize)), usize> = BTreeMap::new();
    for l in 0..d_l {
        for xr in 0..d_r {
            let x = l * d_r + xr;
            let Some(tr) = t.minus(x) else { continue };
            for yr in 0..d_r {
                let y = l * d_r + yr;
                let Some(tpr) = tp.minus(y) else { continue };
                *acc.entry((tr.clone(), tpr, (xr, yr))).or_insert(0) += 1;
            }
        }
    }
    Ok(acc
        .into_iter()
        .map(|((t_red, tp_red, r_pair), multiplicity)| BranchTerm { t_red, tp_red, r_pair, multiplicity })
        .collect())
}

/// Recover the coefficients `z_{t,t'}` of an operator `sum z C_{t,t'}` supported on
/// the symmetric subspace, querying one entry per `(t, t')` class at the
/// representative pair of the canonical (first) contingency table.
/// Returns the coefficients keyed by indices into `types(n, d)` and the query count.
pub fn coefficients_bose(
    mut oracle: impl FnMut(usize, usize) -> f64,
    n: usize,
    d: usize,
) -> (BTreeMap<(usize, usize), f64>, usize) {
    let ts = types(n, d);
    let mut out = BTreeMap::new();
    let mut queries = 0;
    for (i, t) in ts.iter().enumerate() {
        for (j, tp) in ts.iter().enumerate() {
            let tab = contingency_tables(t, tp).expect("same n");
            let (a, b) = tab[0].representative();
            let v = oracle(string_index(&a, d), string_index(&b, d));
            queries += 1;
            out.insert((i, j), v);
        }
    }
    (out, queries)
}

/// Reconstruct `sum z C_{t,t'}` densely from coefficients keyed by type indices.
pub fn dense_from_bose_coefficients(coeffs: &BTreeMap<(usize, usize), f64>, n: usize, d: usize, cap: usize) -> Result<RMat> {
    let total = check_cap(d, n, cap)?;
    let ts = types(n, d);
    let strings: Vec<Vec<usize>> = ts.iter().map(type_strings).collect();
    let mut out = RMat::zeros(total, total);
    for (&(i, j), &z) in coeffs {
        if z == 0.0 {
            continue;
        }
        for &a in &strings[i] {
            for &b in &strings[j] {
                out[(a, b)] += z;
            }
        }
    }
    Ok(out)
}

pub fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcomb::orbit_representatives;

    #[test]
    fn orbit_matrices_partition_all_ones() {
        for (n, d) in [(2usize, 2usize), (3, 2), (2, 3)] {
            let mut sum = RMat::zeros(d.pow(n as u32), d.pow(n as u32));
            for m in orbit_representatives(n, d) {
                sum += dense_orbit_matrix(&m, DENSE_CAP).unwrap();
            }
            assert!(sum.iter().all(|&x| x == 1.0));
        }
    }

    #[test]
    fn bose_traces() {
        let t = TypeVector::new(vec![1, 1]);
        assert_eq!(trace_bose(&t, &t, 2).unwrap(), BigUint::from(2u32));
        let a = TypeVector::new(vec![2, 0]);
        let b = TypeVector::new(vec![0, 2]);
        assert!(trace_bose(&a, &b, 2).unwrap().is_zero());
        let c = TypeVector::new(vec![2, 1]);
        assert_eq!(trace_bose(&c, &c, 3).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn ptrace_tail_examples() {
        let a = TypeVector::new(vec![2, 0]);
        let b = TypeVector::new(vec![1, 1]);
        let c = TypeVector::new(vec![0, 2]);
        assert_eq!(ptrace_tail_bose(&a, &a, 2).unwrap(), vec![(BigUint::from(1u32), (0, 0))]);
        assert_eq!(ptrace_tail_bose(&a, &b, 2).unwrap(), vec![(BigUint::from(1u32), (0, 1))]);
        assert!(ptrace_tail_bose(&a, &c, 2).unwrap().is_empty());
    }

    #[test]
    fn branch_full_matches_dense() {
        let m = FrequencyMatrix::from_rows(&[&[2, 1], &[0, 0]]);
        let parts = branch_full(&m);
        assert_eq!(parts.len(), 2);
        let dense = dense_orbit_matrix(&m, DENSE_CAP).unwrap();
        let mut rebuilt = RMat::zeros(8, 8);
        for ((i, j), r) in &parts {
            let mut e = RMat::zeros(2, 2);
            e[(*i, *j)] = 1.0;
            rebuilt += e.kronecker(&dense_orbit_matrix(r, DENSE_CAP).unwrap());
        }
        assert_eq!(rebuilt, dense);
        let sizes: Vec<u64> = parts.iter().map(|(_, r)| r.orbit_size().to_u64().unwrap()).collect();
        assert_eq!(sizes, vec![2, 1]);
    }
}
