//! Small dense linear-algebra helpers shared by the quantum-side modules.
//!
//! Composite indices are big-endian throughout: for factors with dimensions
//! `[d0, d1, ..]` the flat index of `(i0, i1, ..)` is `i0*d1*d2.. + i1*d2.. + ..`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;
pub type CVec = DVector<Complex64>;

pub const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn kron_c(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_r(a: &RMat, b: &RMat) -> RMat {
    a.kronecker(b)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|x| x.re)
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn symmetrize(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

pub fn trace_c(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Split a flat index into digits for the given factor dimensions.
pub fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

pub fn flat(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Partial trace over the subsystems listed in `traced` (indices into `dims`).
pub fn partial_trace_c(m: &CMat, dims: &[usize], traced: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    assert_eq!(m.nrows(), total, "partial trace: dims do not match matrix");
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
    let kdims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let kd: usize = kdims.iter().product();
    let td: usize = tdims.iter().product();
    let mut out = CMat::zeros(kd, kd);
    let mut full = vec![0usize; dims.len()];
    for r in 0..kd {
        let rd = digits(r, &kdims);
        for c in 0..kd {
            let cd = digits(c, &kdims);
            let mut acc = C0;
            for t in 0..td {
                let tdg = digits(t, &tdims);
                for (p, &k) in kept.iter().enumerate() {
                    full[k] = rd[p];
                }
                for (p, &k) in traced.iter().enumerate() {
                    full[k] = tdg[p];
                }
                let i = flat(&full, dims);
                for (p, &k) in kept.iter().enumerate() {
                    full[k] = cd[p];
                }
                let j = flat(&full, dims);
                acc += m[(i, j)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

pub fn partial_trace_r(m: &RMat, dims: &[usize], traced: &[usize]) -> RMat {
    real_part(&partial_trace_c(&to_complex(m), dims, traced))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let e = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        vecs.set_column(c, &e.eigenvectors.column(k));
    }
    (vals, vecs)
}

pub fn sym_eig(m: &RMat) -> (Vec<f64>, RMat) {
    let n = m.nrows();
    let e = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let mut vecs = RMat::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        vecs.set_column(c, &e.eigenvectors.column(k));
    }
    (vals, vecs)
}

pub fn min_eig_c(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    herm_eig(m).0[0]
}

pub fn min_eig_r(m: &RMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    sym_eig(m).0[0]
}

/// Apply `f` to the spectrum of a Hermitian matrix.
pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = herm_eig(m);
    let n = m.nrows();
    let mut d = CMat::zeros(n, n);
    for (k, v) in vals.iter().enumerate() {
        d[(k, k)] = Complex64::new(f(*v), 0.0);
    }
    &vecs * d * vecs.adjoint()
}

/// Clip eigenvalues below zero (those at or above `-tol`) and renormalize to unit trace.
/// Returns `None` if an eigenvalue is below `-tol` or the trace vanishes.
pub fn clip_density(m: &CMat, tol: f64) -> Option<CMat> {
    let (vals, _) = herm_eig(m);
    if vals.first().copied().unwrap_or(0.0) < -tol {
        return None;
    }
    let c = herm_fn(m, |x| x.max(0.0));
    let t = trace_c(&c).re;
    if t <= 0.0 {
        return None;
    }
    Some(c / Complex64::new(t, 0.0))
}

/// Frobenius distance, max-abs entry.
pub fn max_abs_diff_c(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff_r(a: &RMat, b: &RMat) -> f64 {
    (a - b).iter().map(|z| z.abs()).fold(0.0, f64::max)
}

pub fn identity_c(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn basis_proj(d: usize, i: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, i)] = C1;
    m
}

/// Real symmetric embedding `[[Re, -Im], [Im, Re]]` of a Hermitian matrix.
pub fn real_embedding(m: &CMat) -> RMat {
    let n = m.nrows();
    let mut r = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            r[(i, j)] = z.re;
            r[(i + n, j + n)] = z.re;
            r[(i, j + n)] = -z.im;
            r[(i + n, j)] = z.im;
        }
    }
    r
}

pub mod random {
    //! Random test objects (seeded by the caller's RNG).
    use super::*;

    pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
        // Box-Muller; keeps us off an extra distribution crate.
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn ginibre<R: Rng>(rng: &mut R, r: usize, c: usize) -> CMat {
        CMat::from_fn(r, c, |_, _| Complex64::new(gaussian(rng), gaussian(rng)))
    }

    /// Random density matrix of the given rank (rank = d gives full rank).
    pub fn density<R: Rng>(rng: &mut R, d: usize, rank: usize) -> CMat {
        let g = ginibre(rng, d, rank.max(1));
        let m = &g * g.adjoint();
        let t = trace_c(&m);
        m / t
    }

    pub fn real_density<R: Rng>(rng: &mut R, d: usize) -> RMat {
        let g = RMat::from_fn(d, d, |_, _| gaussian(rng));
        let m = &g * g.transpose();
        let t = m.trace();
        m / t
    }

    pub fn unitary<R: Rng>(rng: &mut R, d: usize) -> CMat {
        let g = ginibre(rng, d, d);
        let qr = g.qr();
        qr.q()
    }

    pub fn hermitian<R: Rng>(rng: &mut R, d: usize) -> CMat {
        hermitize(&ginibre(rng, d, d))
    }

    /// Random POVM with `k` outcomes on dimension `d`.
    pub fn povm<R: Rng>(rng: &mut R, d: usize, k: usize) -> Vec<CMat> {
        let raw: Vec<CMat> = (0..k)
            .map(|_| {
                let g = ginibre(rng, d, d);
                &g * g.adjoint()
            })
            .collect();
        let s: CMat = raw.iter().fold(CMat::zeros(d, d), |acc, m| acc + m);
        let sinv = herm_fn(&s, |x| 1.0 / x.sqrt());
        raw.iter().map(|m| hermitize(&(&sinv * m * &sinv))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random::density(&mut rng, 2, 2);
        let b = random::density(&mut rng, 3, 3);
        let ab = kron_c(&a, &b);
        assert!(max_abs_diff_c(&partial_trace_c(&ab, &[2, 3], &[1]), &a) < 1e-12);
        assert!(max_abs_diff_c(&partial_trace_c(&ab, &[2, 3], &[0]), &b) < 1e-12);
    }

    #[test]
    fn digits_roundtrip() {
        let dims = [2, 3, 4];
        for i in 0..24 {
            assert_eq!(flat(&digits(i, &dims), &dims), i);
        }
    }

    #[test]
    fn embedding_preserves_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random::density(&mut rng, 3, 2);
        assert!(min_eig_r(&real_embedding(&r)) > -1e-12);
    }
}
