//! Inner bounds from hierarchy solutions: measure the first `m` copies of an
//! extension with an informationally complete POVM, keep the conditional
//! `A`/`B_{m+1}` marginals as a separable mixture, and read a strategy off the
//! best piece.

use num_complex::Complex64;

use crate::csep::{bob_povm_from_state, strategy_from_assemblage, Assemblage, CSepProblem};
use crate::error::{Error, Result};
use crate::gamecore::{evaluate_strategy, random_strategy, repair_povm, seesaw_from, Game, Strategy};
use crate::hierarchy::HierarchySdp;
use crate::linalg::{self, herm_eig, herm_fn, hermitize, kron_c, partial_trace_c, trace_c, CMat, C0, C1};

/// Outcomes with probability at or below this are dropped.
pub const MIN_OUTCOME_PROB: f64 = 1e-12;
/// Largest number of joint outcomes `round_extension` will enumerate.
pub const MAX_OUTCOMES: usize = 1 << 16;

#[derive(Clone, Debug)]
pub struct IcPovm {
    pub elements: Vec<CMat>,
    pub frame: Vec<CMat>,
}

impl IcPovm {
    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// Outcome probabilities `tr[M_i ρ]`.
    pub fn probabilities(&self, rho: &CMat) -> Vec<f64> {
        self.elements.iter().map(|m| trace_c(&(m * rho)).re).collect()
    }

    /// Recover `ρ` from outcome probabilities by solving the Gram system of the elements.
    pub fn reconstruct(&self, probs: &[f64]) -> Result<CMat> {
        let k = self.elements.len();
        let d = self.dim();
        let gram = nalgebra::DMatrix::<f64>::from_fn(k, k, |i, j| trace_c(&(&self.elements[i] * &self.elements[j])).re);
        let rhs = nalgebra::DVector::from_column_slice(probs);
        let coef = gram.lu().solve(&rhs).ok_or_else(|| Error::numerical("IC POVM Gram matrix is singular"))?;
        let mut out = CMat::zeros(d, d);
        for (m, c) in self.elements.iter().zip(coef.iter()) {
            out += m * Complex64::new(*c, 0.0);
        }
        Ok(out)
    }
}

/// Symmetrized frame POVM on `C^d` built from the `d²` projectors onto
/// `|j⟩`, `(|j⟩+|k⟩)/√2` and `(|j⟩+i|k⟩)/√2`.
pub fn ic_povm(d: usize) -> Result<IcPovm> {
    if d == 0 {
        return Err(Error::invalid("IC POVM needs d ≥ 1"));
    }
    let ket = |entries: &[(usize, Complex64)]| {
        let mut v = CMat::zeros(d, 1);
        for &(i, z) in entries {
            v[(i, 0)] = z;
        }
        let n = v.norm();
        &v * v.adjoint() / Complex64::new(n * n, 0.0)
    };
    let mut frame = vec![];
    for j in 0..d {
        frame.push(ket(&[(j, C1)]));
    }
    for j in 0..d {
        for k in j + 1..d {
            frame.push(ket(&[(j, C1), (k, C1)]));
            frame.push(ket(&[(j, C1), (k, Complex64::new(0.0, 1.0))]));
        }
    }
    let s = frame.iter().fold(CMat::zeros(d, d), |a, p| a + p);
    let s_isqrt = herm_fn(&s, |x| 1.0 / x.sqrt());
    let elements = frame.iter().map(|p| hermitize(&(&s_isqrt * p * &s_isqrt))).collect();
    Ok(IcPovm { elements, frame })
}

/// How an extension matrix is laid out: `A ⊗ copy^{⊗n}`, where a copy is `B`
/// or, for the Bose variants, `B B̄`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtensionLayout {
    pub d_a: usize,
    pub copy_dim: usize,
    pub n: usize,
    pub bose: bool,
}

impl From<&HierarchySdp> for ExtensionLayout {
    fn from(h: &HierarchySdp) -> Self {
        ExtensionLayout { d_a: h.d_a, copy_dim: h.copy_dim, n: h.n, bose: h.method.is_bose() }
    }
}

#[derive(Clone, Debug)]
pub struct RoundedPiece {
    pub weight: f64,
    pub state_a: CMat,
    pub state_b: CMat,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct RoundedPoint {
    pub m: usize,
    pub pieces: Vec<RoundedPiece>,
    pub lower_bound: f64,
    pub best_piece: usize,
}

impl RoundedPoint {
    pub fn best(&self) -> &RoundedPiece {
        &self.pieces[self.best_piece]
    }

    /// Largest marginal-constraint violation over all pieces.
    pub fn max_violation(&self, p: &CSepProblem) -> f64 {
        self.pieces
            .iter()
            .map(|pc| p.alice_violation(&pc.state_a).max(p.bob_violation(&pc.state_b)))
            .fold(0.0, f64::max)
    }

    /// `Σ p(z) ρ_{A|z} ⊗ ρ_{B|z}`.
    pub fn mixture(&self) -> CMat {
        let d = self.pieces[0].state_a.nrows() * self.pieces[0].state_b.nrows();
        self.pieces
            .iter()
            .fold(CMat::zeros(d, d), |acc, pc| acc + kron_c(&pc.state_a, &pc.state_b) * Complex64::new(pc.weight, 0.0))
    }
}

/// Per-copy POVM: computational basis on the classical factor, IC frame on the rest.
fn copy_povm(copy_dim: usize, classical: usize) -> Result<Vec<CMat>> {
    let q = copy_dim / classical;
    let ic = ic_povm(q)?;
    let mut out = vec![];
    for c in 0..classical {
        let proj = linalg::basis_proj(classical, c);
        for e in &ic.elements {
            out.push(kron_c(&proj, e));
        }
    }
    Ok(out)
}

/// `tr_C[(I_pre ⊗ E ⊗ I_post) R]` for `R` on `pre ⊗ C ⊗ post`.
fn contract(r: &CMat, pre: usize, c: usize, post: usize, e: &CMat) -> CMat {
    let out_dim = pre * post;
    let mut out = CMat::zeros(out_dim, out_dim);
    let idx = |p: usize, i: usize, q: usize| (p * c + i) * post + q;
    for p in 0..pre {
        for q in 0..post {
            for pp in 0..pre {
                for qq in 0..post {
                    let mut acc = C0;
                    for i in 0..c {
                        for j in 0..c {
                            let ev = e[(j, i)];
                            if ev != C0 {
                                acc += ev * r[(idx(p, i, q), idx(pp, j, qq))];
                            }
                        }
                    }
                    out[(p * post + q, pp * post + qq)] = acc;
                }
            }
        }
    }
    out
}

/// Clip small negative eigenvalues and renormalize to unit trace.
fn clean_state(m: &CMat) -> Result<CMat> {
    let h = hermitize(m);
    let (vals, _) = herm_eig(&h);
    let t = trace_c(&h).re;
    if vals[0] < -1e-6 * t.abs() {
        return Err(Error::numerical(format!("conditional state has eigenvalue {}", vals[0])));
    }
    let c = herm_fn(&h, |x| x.max(0.0));
    let t = trace_c(&c).re;
    if t <= 0.0 {
        return Err(Error::numerical("conditional state vanished"));
    }
    Ok(c / Complex64::new(t, 0.0))
}

/// Condition an extension on the outcomes of measuring copies `1..m` and keep
/// the `(A, B_{m+1})` conditional marginals as product pieces.
pub fn round_extension(ext: &CMat, layout: ExtensionLayout, p: &CSepProblem, m: usize) -> Result<RoundedPoint> {
    let ExtensionLayout { d_a, copy_dim, n, bose } = layout;
    // m = 0 (no conditioning, product of marginals) is only used for n = 1
    if n == 0 || m >= n || (m == 0 && n > 1) {
        return Err(Error::invalid(format!("m = {m} must lie in 1..{}", n.saturating_sub(1))));
    }
    let expected = if bose { p.dim_b * p.dim_b } else { p.dim_b };
    if d_a != p.dim_a || copy_dim != expected {
        return Err(Error::dim("extension layout does not match the instance"));
    }
    let total = crate::hierarchy::checked_pow(copy_dim, n).and_then(|t| t.checked_mul(d_a));
    if total != Some(ext.nrows()) || ext.ncols() != ext.nrows() {
        return Err(Error::dim("extension has the wrong side"));
    }
    let tr = trace_c(ext).re;
    if (tr - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!("extension has trace {tr}")));
    }
    if linalg::min_eig_c(ext) < -1e-6 {
        return Err(Error::invalid("extension is not PSD"));
    }

    let povm = copy_povm(copy_dim, p.classical_b)?;
    let outcomes = crate::hierarchy::checked_pow(povm.len(), m).unwrap_or(usize::MAX);
    if outcomes > MAX_OUTCOMES {
        return Err(Error::cap(format!("{outcomes} joint outcomes exceed the cap of {MAX_OUTCOMES}")));
    }

    // trace copies m+2..n, leaving A ⊗ C_1..C_m ⊗ C_{m+1}
    let dims: Vec<usize> = std::iter::once(d_a).chain(std::iter::repeat_n(copy_dim, n)).collect();
    let traced: Vec<usize> = (m + 2..=n).collect();
    let reduced = if traced.is_empty() { ext.clone() } else { partial_trace_c(ext, &dims, &traced) };

    let mut conditionals: Vec<CMat> = vec![];
    // depth-first over copies, contracting copy 1 of the remaining chain each time
    let mut stack: Vec<(CMat, usize)> = vec![(reduced, m)];
    while let Some((r, left)) = stack.pop() {
        if left == 0 {
            conditionals.push(r);
            continue;
        }
        let post = copy_dim.pow(left as u32);
        for e in povm.iter().rev() {
            stack.push((contract(&r, d_a, copy_dim, post, e), left - 1));
        }
    }

    let g = linalg::to_complex(&p.objective);
    let mut pieces = vec![];
    for c in conditionals {
        let prob = trace_c(&c).re;
        if prob <= MIN_OUTCOME_PROB {
            continue;
        }
        let sa = partial_trace_c(&c, &[d_a, copy_dim], &[1]);
        let sb = if bose {
            partial_trace_c(&c, &[d_a, p.dim_b, p.dim_b], &[0, 2])
        } else {
            partial_trace_c(&c, &[d_a, copy_dim], &[0])
        };
        let (state_a, state_b) = match (clean_state(&sa), clean_state(&sb)) {
            (Ok(a), Ok(b)) => (a, b),
            // solver noise dominates the conditional state of a rare outcome
            _ if prob < 1e-6 => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let value = p.scale * trace_c(&(&g * kron_c(&state_a, &state_b))).re;
        pieces.push(RoundedPiece { weight: prob, state_a, state_b, value });
    }
    if pieces.is_empty() {
        return Err(Error::numerical("every outcome has negligible probability"));
    }
    let wsum: f64 = pieces.iter().map(|pc| pc.weight).sum();
    for pc in &mut pieces {
        pc.weight /= wsum;
    }
    let lower_bound = pieces.iter().map(|pc| pc.weight * pc.value).sum();
    let best_piece = (0..pieces.len()).fold(0, |b, i| if pieces[i].value > pieces[b].value { i } else { b });
    Ok(RoundedPoint { m, pieces, lower_bound, best_piece })
}

/// Round for every `m` in `1..n` (just `m = 0` when `n = 1`).
pub fn round_sweep(ext: &CMat, layout: ExtensionLayout, p: &CSepProblem) -> Result<Vec<RoundedPoint>> {
    sweep_range(layout.n).map(|m| round_extension(ext, layout, p, m)).collect()
}

fn sweep_range(n: usize) -> std::ops::Range<usize> {
    if n <= 1 {
        0..1
    } else {
        1..n
    }
}

/// Turn the best piece of a game-derived rounding into a strategy, and its exact value.
pub fn strategy_from_rounding(game: &Game, rp: &RoundedPoint) -> Result<(Strategy, f64)> {
    let best = rp.best();
    let d = game.party_dim();
    if best.state_a.nrows() != d || best.state_b.nrows() != d {
        return Err(Error::dim("rounded point does not come from this game"));
    }
    let asm = Assemblage::from_alice_state(&best.state_a, game);
    asm.validate(1e-6)?;
    let bob: Vec<Vec<CMat>> = bob_povm_from_state(&best.state_b, game).iter().map(|f| repair_povm(f)).collect();
    let s = strategy_from_assemblage(&asm, bob);
    let v = evaluate_strategy(game, &s)?;
    Ok((s, v))
}

/// See-saw initialized from `strategy`; the value never drops below the start.
pub fn warm_start_seesaw(game: &Game, strategy: Strategy, iters: usize) -> Result<(Strategy, f64)> {
    if iters == 0 {
        let v = evaluate_strategy(game, &strategy)?;
        return Ok((strategy, v));
    }
    seesaw_from(game, strategy, iters)
}

/// Convex mixture `(1−t)·s + t·r` of every component with a seeded random strategy `r`.
/// Stays feasible; used to break the ties a highly symmetric warm start leaves the see-saw.
pub fn jitter_strategy(game: &Game, s: &Strategy, seed: u64, t: f64) -> Strategy {
    let r = random_strategy(game, seed);
    let (a, b) = (Complex64::new(1.0 - t, 0.0), Complex64::new(t, 0.0));
    let mix = |x: &[Vec<CMat>], y: &[Vec<CMat>]| -> Vec<Vec<CMat>> {
        x.iter().zip(y).map(|(fx, fy)| fx.iter().zip(fy).map(|(p, q)| p * a + q * b).collect()).collect()
    };
    Strategy { rho: &s.rho * a + &r.rho * b, alice: mix(&s.alice, &r.alice), bob: mix(&s.bob, &r.bob) }
}

#[derive(Clone, Debug)]
pub struct LowerOptions {
    /// Conditioning depth; `None` sweeps every admissible `m`.
    pub m: Option<usize>,
    pub seesaw_iters: usize,
    pub seed: u64,
    /// Weight of the seeded random strategy mixed into the warm start for the second see-saw run.
    pub jitter: f64,
    /// Largest extension side materialized for rounding.
    pub extension_cap: usize,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions { m: None, seesaw_iters: 20, seed: 0, jitter: 0.1, extension_cap: 4096 }
    }
}

#[derive(Clone, Debug)]
pub struct LowerResult {
    /// Conditioning depth of the best rounded strategy.
    pub m: usize,
    /// `scale·tr[G·mixture]` of that rounding.
    pub mixture_value: f64,
    /// Exact value of the strategy read off the best piece.
    pub rounded_value: f64,
    /// Final lower bound after the see-saw.
    pub lower: f64,
    pub strategy: Strategy,
    /// Largest marginal-constraint violation over all pieces of all roundings.
    pub max_violation: f64,
}

/// Round a solved game hierarchy, extract strategies, and polish the best one by see-saw:
/// once from the rounded strategy and once from its seeded jitter, keeping the better.
pub fn game_lower_bound(game: &Game, p: &CSepProblem, h: &HierarchySdp, x: &[f64], opts: &LowerOptions) -> Result<LowerResult> {
    let ext = linalg::to_complex(&h.extension(x, opts.extension_cap)?);
    let layout = ExtensionLayout::from(h);
    let ms: Vec<usize> = match opts.m {
        Some(m) => vec![m],
        None => sweep_range(layout.n).collect(),
    };
    let mut best: Option<(usize, f64, Strategy, f64)> = None;
    let mut max_violation: f64 = 0.0;
    let mut last_err = None;
    for m in ms {
        let rp = round_extension(&ext, layout, p, m)?;
        max_violation = max_violation.max(rp.max_violation(p));
        match strategy_from_rounding(game, &rp) {
            Ok((s, v)) => {
                if best.as_ref().is_none_or(|b| v > b.3) {
                    best = Some((m, rp.lower_bound, s, v));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let (m, mixture_value, start, rounded_value) =
        best.ok_or_else(|| last_err.unwrap_or_else(|| Error::numerical("no rounding produced a strategy")))?;
    let (mut strategy, mut lower) = warm_start_seesaw(game, start.clone(), opts.seesaw_iters)?;
    if opts.jitter > 0.0 && opts.seesaw_iters > 0 {
        let (s2, v2) = warm_start_seesaw(game, jitter_strategy(game, &start, opts.seed, opts.jitter), opts.seesaw_iters)?;
        if v2 > lower {
            strategy = s2;
            lower = v2;
        }
    }
    Ok(LowerResult { m, mixture_value, rounded_value, lower, strategy, max_violation })
}
