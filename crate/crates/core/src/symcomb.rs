//! Exact combinatorics of the symmetric-group action on tensor powers:
//! partitions, type vectors, semistandard tableaux, frequency matrices and
//! contingency tables.
//!
//! Symbols are 0-based (`0..d`) everywhere in code. Orderings are fixed once:
//! type vectors lexicographic, frequency matrices row-major lexicographic,
//! tableaux lexicographic on their reading word (rows top to bottom).

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer partition, parts weakly decreasing and positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        parts.retain(|&p| p > 0);
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!("partition parts not nonincreasing: {parts:?}")));
        }
        Ok(Partition { parts })
    }
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }
    pub fn height(&self) -> usize {
        self.parts.len()
    }
    /// Column lengths (conjugate partition).
    pub fn conjugate(&self) -> Vec<usize> {
        let w = self.parts.first().copied().unwrap_or(0);
        (0..w).map(|j| self.parts.iter().filter(|&&p| p > j).count()).collect()
    }
    /// Hook length of box (i, j).
    pub fn hook(&self, i: usize, j: usize) -> usize {
        let col = self.conjugate();
        (self.parts[i] - j - 1) + (col[j] - i - 1) + 1
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// All partitions of `n` with at most `max_height` parts, in reverse-lexicographic
/// order starting from `(n)`.
pub fn partitions(n: usize, max_height: usize) -> Vec<Partition> {
    fn rec(rem: usize, maxp: usize, h: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        if h == 0 {
            return;
        }
        for p in (1..=rem.min(maxp)).rev() {
            cur.push(p);
            rec(rem - p, p, h - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, max_height, &mut Vec::new(), &mut out);
    out
}

/// Weight of a string: how often each of the `d` symbols occurs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeVector {
    pub counts: Vec<usize>,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Self {
        TypeVector { counts }
    }
    pub fn of_string(s: &[usize], d: usize) -> Self {
        let mut counts = vec![0; d];
        for &x in s {
            counts[x] += 1;
        }
        TypeVector { counts }
    }
    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }
    pub fn d(&self) -> usize {
        self.counts.len()
    }
    /// The sorted string of this type (symbol 0 first).
    pub fn canonical_string(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.n());
        for (x, &c) in self.counts.iter().enumerate() {
            s.extend(std::iter::repeat_n(x, c));
        }
        s
    }
    /// Remove one occurrence of symbol `x`.
    pub fn minus(&self, x: usize) -> Option<TypeVector> {
        if self.counts[x] == 0 {
            return None;
        }
        let mut c = self.counts.clone();
        c[x] -= 1;
        Some(TypeVector { counts: c })
    }
    pub fn plus(&self, x: usize) -> TypeVector {
        let mut c = self.counts.clone();
        c[x] += 1;
        TypeVector { counts: c }
    }
}

/// All type vectors of length `d` summing to `n`, lexicographically sorted.
pub fn types(n: usize, d: usize) -> Vec<TypeVector> {
    fn rec(pos: usize, rem: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<TypeVector>) {
        if pos + 1 == d {
            cur.push(rem);
            out.push(TypeVector { counts: cur.clone() });
            cur.pop();
            return;
        }
        for c in 0..=rem {
            cur.push(c);
            rec(pos + 1, rem - c, d, cur, out);
            cur.pop();
        }
    }
    assert!(d >= 1, "types: d must be positive");
    let mut out = Vec::new();
    rec(0, n, d, &mut Vec::new(), &mut out);
    out
}

/// Position of a type vector in [`types`] order (binary search).
pub fn type_index(all: &[TypeVector], t: &TypeVector) -> Option<usize> {
    all.binary_search(t).ok()
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// n! / prod t_i!, exact.
pub fn multinomial(n: usize, t: &TypeVector) -> Result<BigUint> {
    if t.n() != n {
        return Err(Error::invalid(format!("type {:?} does not sum to {n}", t.counts)));
    }
    let mut acc = factorial(n);
    for &c in &t.counts {
        acc /= factorial(c);
    }
    Ok(acc)
}

/// Convenience: multinomial as f64 (exact below 2^53).
pub fn multinomial_f64(t: &TypeVector) -> f64 {
    multinomial(t.n(), t).expect("consistent").to_f64().unwrap_or(f64::INFINITY)
}

/// Semistandard Young tableau: rows nondecreasing, columns strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tableau {
    pub shape: Partition,
    /// `rows[i][j]` is the 0-based symbol in box (i, j).
    pub rows: Vec<Vec<usize>>,
}

impl Tableau {
    pub fn new(shape: Partition, rows: Vec<Vec<usize>>) -> Result<Self> {
        if rows.len() != shape.height() || rows.iter().zip(shape.parts()).any(|(r, &p)| r.len() != p) {
            return Err(Error::invalid("tableau rows do not match its shape"));
        }
        Ok(Tableau { shape, rows })
    }

    pub fn is_semistandard(&self) -> bool {
        let rows_ok = self.rows.iter().all(|r| r.windows(2).all(|w| w[0] <= w[1]));
        let cols_ok = (1..self.rows.len()).all(|i| {
            (0..self.rows[i].len()).all(|j| self.rows[i - 1][j] < self.rows[i][j])
        });
        rows_ok && cols_ok
    }

    /// Row-major reading word; also the assignment of boxes to tensor positions.
    pub fn reading_word(&self) -> Vec<usize> {
        self.rows.iter().flatten().copied().collect()
    }

    pub fn content(&self, d: usize) -> TypeVector {
        TypeVector::of_string(&self.reading_word(), d)
    }
}

/// All semistandard tableaux of shape `lambda` over `d` symbols, sorted by reading word.
pub fn semistandard_tableaux(lambda: &Partition, d: usize) -> Vec<Tableau> {
    let parts = lambda.parts().to_vec();
    let n = lambda.n();
    let mut cells = Vec::with_capacity(n);
    for (i, &p) in parts.iter().enumerate() {
        for j in 0..p {
            cells.push((i, j));
        }
    }
    let mut rows: Vec<Vec<usize>> = parts.iter().map(|&p| vec![0; p]).collect();
    let mut out = Vec::new();
    fn rec(
        k: usize,
        cells: &[(usize, usize)],
        rows: &mut Vec<Vec<usize>>,
        d: usize,
        shape: &Partition,
        out: &mut Vec<Tableau>,
    ) {
        if k == cells.len() {
            out.push(Tableau { shape: shape.clone(), rows: rows.clone() });
            return;
        }
        let (i, j) = cells[k];
        let lo_row = if j > 0 { rows[i][j - 1] } else { 0 };
        let lo_col = if i > 0 { rows[i - 1][j] + 1 } else { 0 };
        let lo = lo_row.max(lo_col);
        for v in lo..d {
            rows[i][j] = v;
            rec(k + 1, cells, rows, d, shape, out);
        }
    }
    if lambda.height() <= d {
        rec(0, &cells, &mut rows, d, lambda, &mut out);
    }
    out.sort_by_key(|a| a.reading_word());
    out
}

/// Dimension of the Weyl module via the hook-content formula.
pub fn schur_dim(lambda: &Partition, d: usize) -> BigUint {
    if lambda.height() > d {
        return BigUint::zero();
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for (i, &p) in lambda.parts().iter().enumerate() {
        for j in 0..p {
            num *= BigUint::from(d + j - i);
            den *= BigUint::from(lambda.hook(i, j));
        }
    }
    num / den
}

/// Dimension of the Specht module (number of standard tableaux), hook length formula.
pub fn specht_dim(lambda: &Partition) -> BigUint {
    let mut den = BigUint::one();
    for (i, &p) in lambda.parts().iter().enumerate() {
        for j in 0..p {
            den *= BigUint::from(lambda.hook(i, j));
        }
    }
    factorial(lambda.n()) / den
}

/// d x d nonnegative integer matrix counting symbol pairs `(a_k, b_k)`; identifies
/// an S_n-orbit of index pairs `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrequencyMatrix {
    pub d: usize,
    /// Row-major entries.
    pub entries: Vec<usize>,
}

impl FrequencyMatrix {
    pub fn zeros(d: usize) -> Self {
        FrequencyMatrix { d, entries: vec![0; d * d] }
    }
    pub fn from_rows(rows: &[&[usize]]) -> Self {
        let d = rows.len();
        let entries = rows.iter().flat_map(|r| r.iter().copied()).collect();
        FrequencyMatrix { d, entries }
    }
    /// Frequency matrix of a pair of strings.
    pub fn of_pair(a: &[usize], b: &[usize], d: usize) -> Self {
        let mut m = Self::zeros(d);
        for (&x, &y) in a.iter().zip(b) {
            m.entries[x * d + y] += 1;
        }
        m
    }
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.entries[i * self.d + j]
    }
    pub fn n(&self) -> usize {
        self.entries.iter().sum()
    }
    pub fn row_sums(&self) -> TypeVector {
        TypeVector::new((0..self.d).map(|i| (0..self.d).map(|j| self.get(i, j)).sum()).collect())
    }
    pub fn col_sums(&self) -> TypeVector {
        TypeVector::new((0..self.d).map(|j| (0..self.d).map(|i| self.get(i, j)).sum()).collect())
    }
    pub fn transpose(&self) -> Self {
        let d = self.d;
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.entries[j * d + i] = self.get(i, j);
            }
        }
        m
    }
    pub fn is_diagonal(&self) -> bool {
        (0..self.d).all(|i| (0..self.d).all(|j| i == j || self.get(i, j) == 0))
    }
    pub fn diagonal(&self) -> TypeVector {
        TypeVector::new((0..self.d).map(|i| self.get(i, i)).collect())
    }
    /// Remove one unit at (i, j).
    pub fn minus(&self, i: usize, j: usize) -> Option<Self> {
        let k = i * self.d + j;
        if self.entries[k] == 0 {
            return None;
        }
        let mut m = self.clone();
        m.entries[k] -= 1;
        Some(m)
    }
    pub fn plus(&self, i: usize, j: usize) -> Self {
        let mut m = self.clone();
        m.entries[i * self.d + j] += 1;
        m
    }
    /// Representative pair: `a` lists row symbols, `b` column symbols, cells in row-major order.
    pub fn representative(&self) -> (Vec<usize>, Vec<usize>) {
        let mut a = Vec::with_capacity(self.n());
        let mut b = Vec::with_capacity(self.n());
        for i in 0..self.d {
            for j in 0..self.d {
                for _ in 0..self.get(i, j) {
                    a.push(i);
                    b.push(j);
                }
            }
        }
        (a, b)
    }
    /// Orbit size n! / prod D_ij!.
    pub fn orbit_size(&self) -> BigUint {
        let mut acc = factorial(self.n());
        for &e in &self.entries {
            acc /= factorial(e);
        }
        acc
    }
}

/// All `d x d` frequency matrices with entry sum `n`, row-major lexicographic order.
pub fn orbit_representatives(n: usize, d: usize) -> Vec<FrequencyMatrix> {
    types(n, d * d)
        .into_iter()
        .map(|t| FrequencyMatrix { d, entries: t.counts })
        .collect()
}

/// Position of `m` within [`orbit_representatives`] order.
pub fn orbit_index(all: &[FrequencyMatrix], m: &FrequencyMatrix) -> Option<usize> {
    all.binary_search(m).ok()
}

/// Nonnegative integer matrices with row sums `t` and column sums `tp`, in
/// row-major lexicographic order.
pub fn contingency_tables(t: &TypeVector, tp: &TypeVector) -> Result<Vec<FrequencyMatrix>> {
    let d = t.d();
    if tp.d() != d {
        return Err(Error::invalid("contingency tables: type lengths differ"));
    }
    if t.n() != tp.n() {
        return Err(Error::invalid("contingency tables: margins sum to different totals"));
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; d * d];
    let mut col_rem = tp.counts.clone();
    fn rec(
        cell: usize,
        d: usize,
        row_rem: &mut Vec<usize>,
        col_rem: &mut Vec<usize>,
        cur: &mut Vec<usize>,
        out: &mut Vec<FrequencyMatrix>,
    ) {
        if cell == d * d {
            if row_rem.iter().all(|&r| r == 0) && col_rem.iter().all(|&c| c == 0) {
                out.push(FrequencyMatrix { d, entries: cur.clone() });
            }
            return;
        }
        let (i, j) = (cell / d, cell % d);
        let maxv = row_rem[i].min(col_rem[j]);
        // last column of a row must absorb the remainder
        let minv = if j == d - 1 { row_rem[i] } else { 0 };
        if minv > maxv {
            return;
        }
        for v in minv..=maxv {
            cur[cell] = v;
            row_rem[i] -= v;
            col_rem[j] -= v;
            rec(cell + 1, d, row_rem, col_rem, cur, out);
            row_rem[i] += v;
            col_rem[j] += v;
        }
        cur[cell] = 0;
    }
    let mut row_rem = t.counts.clone();
    rec(0, d, &mut row_rem, &mut col_rem, &mut cur, &mut out);
    Ok(out)
}

/// Multiset permutations of a sorted slice, lexicographic.
pub fn distinct_permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = items.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    // next_permutation loop
    loop {
        let n = cur.len();
        if n < 2 {
            break;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

/// All permutations of `0..k` with their signs.
pub fn signed_permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
    let base: Vec<usize> = (0..k).collect();
    distinct_permutations(&base)
        .into_iter()
        .map(|p| {
            let mut inv = 0;
            for a in 0..k {
                for b in a + 1..k {
                    if p[a] > p[b] {
                        inv += 1;
                    }
                }
            }
            let s = if inv % 2 == 0 { 1 } else { -1 };
            (p, s)
        })
        .collect()
}

pub fn to_u64(x: &BigUint) -> Option<u64> {
    x.to_u64()
}
