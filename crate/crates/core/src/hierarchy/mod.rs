//! SDP hierarchies of outer approximations and their de Finetti gap certificates.
//!
//! Four builders share one solver-agnostic problem type:
//! * [`dense::build_dense_sdp`] – the plain extendability SDP on `A ⊗ B^n`;
//! * [`symred::build_sym_reduced_sdp`] – the same program in the invariant basis,
//!   block-diagonalized over all partitions;
//! * [`bose::build_bose_sdp`] – Bose-symmetric extensions on `A ⊗ (B B̄)^n`;
//! * [`bose::build_bose_reduced_sdp`] – the Bose program on the symmetric subspace.

pub mod bose;
pub mod dense;
mod problem;
pub mod symred;

pub use problem::{EqConstraint, ProblemMeta, PsdBlock, SdpProblem, SparseSym};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::csep::CSepProblem;
use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::symcomb::FrequencyMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dense,
    Sym,
    Bose,
    BoseReduced,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::Sym => "sym",
            Method::Bose => "bose",
            Method::BoseReduced => "bose-reduced",
        }
    }

    pub fn is_bose(self) -> bool {
        matches!(self, Method::Bose | Method::BoseReduced)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Method::Dense),
            "sym" => Ok(Method::Sym),
            "bose" => Ok(Method::Bose),
            "bose-reduced" => Ok(Method::BoseReduced),
            _ => Err(Error::invalid(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Keep only entries diagonal in the classical registers (exact for every
    /// instance produced by [`crate::csep::game_to_csep`]).
    pub dephase: bool,
    /// Largest PSD block side a builder may emit.
    pub block_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { dephase: true, block_cap: 2000 }
    }
}

/// How to turn a solution vector back into a dense extension.
#[derive(Clone, Debug)]
pub enum Decoder {
    /// Variable `k` is the entry `pairs[k]` (and its transpose) of the dense matrix.
    Dense { dim: usize, pairs: Vec<(usize, usize)> },
    /// Variable `k` is the coefficient of `|s⟩⟨s'| ⊗ C_D` (and its transpose) for each key.
    Sym { keys: Vec<Vec<(usize, usize, FrequencyMatrix)>> },
    /// Variable `k` is the coefficient of `|s⟩⟨s'| ⊗ C^∨_{t,t'}` (type indices) for each key.
    BoseSym { keys: Vec<Vec<(usize, usize, usize, usize)>> },
}

/// A built hierarchy SDP with the layout of its extension.
#[derive(Clone, Debug)]
pub struct HierarchySdp {
    pub problem: SdpProblem,
    pub method: Method,
    pub n: usize,
    pub d_a: usize,
    /// Local dimension of one copy: `d_B`, or `d_B²` for the Bose variants.
    pub copy_dim: usize,
    pub decoder: Decoder,
}

impl HierarchySdp {
    /// Dense extension `ρ` on `A ⊗ copy^{⊗n}` (index `s·copy_dimⁿ + string`, copy 1 most significant).
    pub fn extension(&self, x: &[f64], cap: usize) -> Result<RMat> {
        let total = checked_pow(self.copy_dim, self.n).ok_or_else(|| Error::cap("extension dimension overflows"))?;
        let dim = self.d_a * total;
        if dim > cap {
            return Err(Error::cap(format!("dense extension of side {dim} exceeds cap {cap}")));
        }
        let mut rho = RMat::zeros(dim, dim);
        match &self.decoder {
            Decoder::Dense { pairs, .. } => {
                for (k, &(i, j)) in pairs.iter().enumerate() {
                    rho[(i, j)] = x[k];
                    rho[(j, i)] = x[k];
                }
            }
            Decoder::Sym { keys } => {
                for (k, ks) in keys.iter().enumerate() {
                    for (s, sp, m) in ks {
                        for (a, b) in crate::invbasis::orbit_pairs(m) {
                            rho[(s * total + a, sp * total + b)] = x[k];
                        }
                    }
                }
            }
            Decoder::BoseSym { keys } => {
                let ts = crate::symcomb::types(self.n, self.copy_dim);
                let strings: Vec<Vec<usize>> = ts.iter().map(crate::invbasis::type_strings).collect();
                for (k, ks) in keys.iter().enumerate() {
                    for &(s, sp, t, tp) in ks {
                        for &a in &strings[t] {
                            for &b in &strings[tp] {
                                rho[(s * total + a, sp * total + b)] = x[k];
                            }
                        }
                    }
                }
            }
        }
        Ok(rho)
    }
}

pub(crate) fn checked_pow(d: usize, n: usize) -> Option<usize> {
    (0..n).try_fold(1usize, |acc, _| acc.checked_mul(d))
}

/// SHA-256 of the canonical JSON encoding of an instance.
pub fn source_hash(p: &CSepProblem) -> String {
    let json = serde_json::to_string(p).expect("instance serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Build the level-`n` relaxation of `p` with the chosen method.
pub fn build(p: &CSepProblem, n: usize, method: Method, opts: &BuildOptions) -> Result<HierarchySdp> {
    p.validate()?;
    if n == 0 {
        return Err(Error::invalid("hierarchy level must be at least 1"));
    }
    let mut h = match method {
        Method::Dense => dense::build_dense_sdp(p, n, opts)?,
        Method::Sym => symred::build_sym_reduced_sdp(p, n, opts)?,
        Method::Bose => bose::build_bose_sdp(p, n, opts)?,
        Method::BoseReduced => bose::build_bose_reduced_sdp(p, n, opts)?,
    };
    h.problem.meta.source_hash = source_hash(p);
    Ok(h)
}

/// Linear expression accumulator keyed by variable.
pub(crate) type LinExpr = BTreeMap<usize, f64>;

pub(crate) fn add_expr(acc: &mut LinExpr, e: &LinExpr, scale: f64) {
    for (&k, &v) in e {
        *acc.entry(k).or_insert(0.0) += scale * v;
    }
}

/// Equality `expr = rhs`, or `None` if every coefficient vanishes and `rhs == 0`.
pub(crate) fn to_eq(expr: LinExpr, rhs: f64) -> Option<EqConstraint> {
    let scale = expr.values().fold(0.0f64, |a, v| a.max(v.abs()));
    let coeffs: Vec<(usize, f64)> = expr.into_iter().filter(|(_, v)| v.abs() > 1e-14 * scale).collect();
    if coeffs.is_empty() && rhs == 0.0 {
        None
    } else {
        Some(EqConstraint { coeffs, rhs })
    }
}

/// Classical label of index `i` of a factor of dimension `d` whose leading
/// classical register has dimension `c`.
pub(crate) fn class_of(i: usize, d: usize, c: usize) -> usize {
    i / (d / c)
}

/// Which de Finetti bound to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapVariant {
    /// Game hierarchy: `2|T|³ √(4 ln 2) √(log₂(|A||Q||T|)/n)`.
    Game,
    /// Bose hierarchy: `min{18√(d_A d_B²), 2 d_B²} √(4 ln 2) √(ln d_A / n)`.
    Bose,
    /// Rounding: `min{18√(d_A d_B), 2 d_B} √(2 ln 2 · log₂ d_A / n)`.
    Rounding,
}

/// Dimensions entering the bounds. For [`GapVariant::Game`] `d_a = |A||Q||T|` and
/// `assist = |T|`; the other variants use `d_a`, `d_b` only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapDims {
    pub d_a: usize,
    pub d_b: usize,
    pub assist: usize,
}

impl GapDims {
    pub fn for_game(game: &crate::gamecore::Game) -> Self {
        GapDims { d_a: game.party_dim(), d_b: game.party_dim(), assist: game.n_t }
    }
}

/// `min{18 √(d_A d_B), 2 d_B}`.
pub fn distortion(d_a: usize, d_b: usize) -> f64 {
    (18.0 * ((d_a * d_b) as f64).sqrt()).min(2.0 * d_b as f64)
}

pub fn definetti_gap(dims: GapDims, n: usize, variant: GapVariant) -> f64 {
    assert!(n >= 1, "level must be positive");
    let n = n as f64;
    let ln2 = std::f64::consts::LN_2;
    match variant {
        GapVariant::Game => {
            let t = dims.assist as f64;
            2.0 * t.powi(3) * (4.0 * ln2).sqrt() * ((dims.d_a as f64).log2() / n).sqrt()
        }
        GapVariant::Bose => {
            let dbb = dims.d_b * dims.d_b;
            distortion(dims.d_a, dbb) * (4.0 * ln2).sqrt() * ((dims.d_a as f64).ln() / n).sqrt()
        }
        GapVariant::Rounding => {
            distortion(dims.d_a, dims.d_b) * (2.0 * ln2 * (dims.d_a as f64).log2() / n).sqrt()
        }
    }
}

/// Smallest `n` with `definetti_gap(n) <= eps`.
pub fn level_for_epsilon(dims: GapDims, eps: f64, variant: GapVariant) -> u64 {
    assert!(eps > 0.0, "epsilon must be positive");
    let g1 = definetti_gap(dims, 1, variant);
    if g1 <= eps {
        return 1;
    }
    // gap(n) = g1 / sqrt(n): start from the closed form and fix rounding at the edge
    let mut n = ((g1 / eps).powi(2)).ceil().max(1.0) as u64;
    while n > 1 && definetti_gap(dims, (n - 1) as usize, variant) <= eps {
        n -= 1;
    }
    while definetti_gap(dims, n as usize, variant) > eps {
        n += 1;
    }
    n
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub upper: f64,
    pub lower: f64,
    pub definetti_bound: f64,
    pub level: usize,
    pub distortion: f64,
}

impl GapCertificate {
    pub fn is_consistent(&self) -> bool {
        self.lower <= self.upper + 1e-7 && self.definetti_bound >= 0.0
    }
}
