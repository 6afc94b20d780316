use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RMat;

/// Sparse real symmetric matrix, upper-triangle entries `(i, j, v)` with `i <= j`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseSym {
    pub side: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    /// Entries may be given in either triangle; duplicates are summed and zeros dropped.
    pub fn new(side: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        let mut e: Vec<(usize, usize, f64)> =
            entries.into_iter().map(|(i, j, v)| if i <= j { (i, j, v) } else { (j, i, v) }).collect();
        e.sort_by_key(|a| (a.0, a.1));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(e.len());
        for (i, j, v) in e {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        out.retain(|x| x.2 != 0.0);
        SparseSym { side, entries: out }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self) -> RMat {
        let mut m = RMat::zeros(self.side, self.side);
        self.add_to(&mut m, 1.0);
        m
    }

    pub fn add_to(&self, m: &mut RMat, scale: f64) {
        for &(i, j, v) in &self.entries {
            m[(i, j)] += scale * v;
            if i != j {
                m[(j, i)] += scale * v;
            }
        }
    }

    /// `⟨self, m⟩ = tr(self · m)` for symmetric `m`.
    pub fn dot(&self, m: &RMat) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * m[(i, j)] } else { v * (m[(i, j)] + m[(j, i)]) })
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.abs()).fold(0.0, f64::max)
    }
}

/// LMI block `F0 + Σ x_i F_i ⪰ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdBlock {
    pub side: usize,
    pub constant: SparseSym,
    pub coeffs: Vec<(usize, SparseSym)>,
}

impl PsdBlock {
    pub fn value(&self, x: &[f64]) -> RMat {
        let mut m = self.constant.to_dense();
        for (v, f) in &self.coeffs {
            f.add_to(&mut m, x[*v]);
        }
        m
    }
}

/// `Σ coeff_i x_i = rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqConstraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl EqConstraint {
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, c)| c * x[i]).sum::<f64>() - self.rhs
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub formulation: String,
    pub level: usize,
    pub source_hash: String,
}

/// `maximize c·x  s.t.  F0_k + Σ x_i F_ik ⪰ 0 for every block k,  E x = f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<PsdBlock>,
    pub eqs: Vec<EqConstraint>,
    pub meta: ProblemMeta,
}

impl SdpProblem {
    pub fn new(
        num_vars: usize,
        objective: Vec<f64>,
        blocks: Vec<PsdBlock>,
        eqs: Vec<EqConstraint>,
        formulation: &str,
        level: usize,
    ) -> Self {
        SdpProblem {
            num_vars,
            objective,
            blocks,
            eqs,
            meta: ProblemMeta { formulation: formulation.to_string(), level, source_hash: String::new() },
        }
    }

    pub fn with_source_hash(mut self, hash: impl Into<String>) -> Self {
        self.meta.source_hash = hash.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::invalid("objective length differs from variable count"));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if b.side == 0 {
                return Err(Error::invalid(format!("block {k} has side 0")));
            }
            let mats = std::iter::once(&b.constant).chain(b.coeffs.iter().map(|(_, f)| f));
            for f in mats {
                if f.side != b.side || f.entries.iter().any(|&(i, j, _)| i >= b.side || j >= b.side) {
                    return Err(Error::invalid(format!("block {k} has an entry out of range")));
                }
            }
            if b.coeffs.iter().any(|(v, _)| *v >= self.num_vars) {
                return Err(Error::invalid(format!("block {k} references an unknown variable")));
            }
        }
        for (k, e) in self.eqs.iter().enumerate() {
            if e.coeffs.is_empty() {
                return Err(Error::invalid(format!("equality {k} has no coefficients")));
            }
            if e.coeffs.iter().any(|&(v, _)| v >= self.num_vars) {
                return Err(Error::invalid(format!("equality {k} references an unknown variable")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest equality residual and most negative block eigenvalue at `x`.
    pub fn feasibility(&self, x: &[f64]) -> (f64, f64) {
        let eq = self.eqs.iter().map(|e| e.residual(x).abs()).fold(0.0, f64::max);
        let eig = self.blocks.iter().map(|b| crate::linalg::min_eig_r(&b.value(x))).fold(f64::INFINITY, f64::min);
        (eq, eig)
    }

    pub fn total_psd_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.side).sum()
    }
}
