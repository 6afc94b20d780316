//! SDPA sparse format (`.dat-s`).
//!
//! SDPA solves `min c·x  s.t.  Σ x_i F_i − F_0 ⪰ 0`. A problem `max c·x, F0 + Σ x_i F_i ⪰ 0`
//! is written with the objective and `F_0` negated. Equalities `a·x = b` become a trailing
//! diagonal block holding the pair `a·x − b ≥ 0`, `−a·x + b ≥ 0`; the importer recognizes
//! such negated pairs and turns them back into equalities.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hierarchy::{EqConstraint, PsdBlock, SdpProblem, SparseSym};

pub fn to_sdpa_string(p: &SdpProblem) -> Result<String> {
    p.validate()?;
    if p.num_vars == 0 {
        return Err(Error::invalid("problem has no variables"));
    }
    if p.blocks.is_empty() && p.eqs.is_empty() {
        return Err(Error::invalid("problem has no constraints"));
    }
    let mut out = String::new();
    let nblocks = p.blocks.len() + usize::from(!p.eqs.is_empty());
    let mut sizes: Vec<String> = p.blocks.iter().map(|b| b.side.to_string()).collect();
    if !p.eqs.is_empty() {
        sizes.push(format!("-{}", 2 * p.eqs.len()));
    }
    let _ = writeln!(out, "{}", p.num_vars);
    let _ = writeln!(out, "{nblocks}");
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = p.objective.iter().map(|c| fmt(-c)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));

    // matno -> blkno -> entries
    let mut mats: BTreeMap<usize, BTreeMap<usize, Vec<(usize, usize, f64)>>> = BTreeMap::new();
    for (k, b) in p.blocks.iter().enumerate() {
        let c = mats.entry(0).or_default().entry(k + 1).or_default();
        c.extend(b.constant.entries.iter().map(|&(i, j, v)| (i, j, -v)));
        for (v, f) in &b.coeffs {
            mats.entry(v + 1).or_default().entry(k + 1).or_default().extend(f.entries.iter().copied());
        }
    }
    let eb = p.blocks.len() + 1;
    for (e, eq) in p.eqs.iter().enumerate() {
        let (r0, r1) = (2 * e, 2 * e + 1);
        let c = mats.entry(0).or_default().entry(eb).or_default();
        c.push((r0, r0, eq.rhs));
        c.push((r1, r1, -eq.rhs));
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for &(v, a) in &eq.coeffs {
            *merged.entry(v).or_insert(0.0) += a;
        }
        for (v, a) in merged {
            let m = mats.entry(v + 1).or_default().entry(eb).or_default();
            m.push((r0, r0, a));
            m.push((r1, r1, -a));
        }
    }
    for (matno, blocks) in &mats {
        for (blkno, ents) in blocks {
            let mut ents = ents.clone();
            ents.sort_by_key(|a| (a.0, a.1));
            for (i, j, v) in ents {
                if v != 0.0 {
                    let _ = writeln!(out, "{matno} {blkno} {} {} {}", i + 1, j + 1, fmt(v));
                }
            }
        }
    }
    Ok(out)
}

/// Shortest representation that parses back to the same `f64`.
fn fmt(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v}")
}

pub fn export_sdpa(p: &SdpProblem, path: impl AsRef<Path>) -> Result<()> {
    let s = to_sdpa_string(p)?;
    std::fs::write(path, s)?;
    Ok(())
}

pub fn import_sdpa(path: impl AsRef<Path>) -> Result<SdpProblem> {
    from_sdpa_str(&std::fs::read_to_string(path)?)
}

pub fn from_sdpa_str(s: &str) -> Result<SdpProblem> {
    let lines = s
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('*') && !l.starts_with('"'));
    let mut tokens: Vec<Vec<String>> = vec![];
    for l in lines {
        let cleaned: String = l.chars().map(|c| if "{}(),".contains(c) { ' ' } else { c }).collect();
        tokens.push(cleaned.split_whitespace().map(str::to_string).collect());
    }
    let bad = |what: &str| Error::invalid(format!("malformed SDPA file: {what}"));
    let mut it = tokens.into_iter();
    let mut next_line = |what: &str| it.next().ok_or_else(|| bad(what));
    let m: usize = next_line("missing variable count")?.first().and_then(|t| t.parse().ok()).ok_or_else(|| bad("variable count"))?;
    let nb: usize = next_line("missing block count")?.first().and_then(|t| t.parse().ok()).ok_or_else(|| bad("block count"))?;
    let sizes: Vec<i64> = next_line("missing block sizes")?
        .iter()
        .map(|t| t.parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("block sizes"))?;
    if sizes.len() != nb || sizes.contains(&0) {
        return Err(bad("block sizes"));
    }
    let c: Vec<f64> = next_line("missing objective")?
        .iter()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("objective"))?;
    if m == 0 || c.len() != m {
        return Err(bad("objective length"));
    }
    // ents[blk][matno] = (i, j, v) zero-based, upper triangle
    let mut ents: Vec<BTreeMap<usize, Vec<(usize, usize, f64)>>> = vec![BTreeMap::new(); nb];
    for line in it {
        if line.len() != 5 {
            return Err(bad("entry line"));
        }
        let matno: usize = line[0].parse().map_err(|_| bad("matno"))?;
        let blk: usize = line[1].parse().map_err(|_| bad("blkno"))?;
        let i: usize = line[2].parse().map_err(|_| bad("row"))?;
        let j: usize = line[3].parse().map_err(|_| bad("col"))?;
        let v: f64 = line[4].parse().map_err(|_| bad("value"))?;
        if matno > m || blk == 0 || blk > nb || i == 0 || j == 0 {
            return Err(bad("entry index"));
        }
        let side = sizes[blk - 1].unsigned_abs() as usize;
        if i > side || j > side || (sizes[blk - 1] < 0 && i != j) {
            return Err(bad("entry out of block"));
        }
        let (i, j) = if i <= j { (i - 1, j - 1) } else { (j - 1, i - 1) };
        ents[blk - 1].entry(matno).or_default().push((i, j, v));
    }

    let objective: Vec<f64> = c.iter().map(|v| -v).collect();
    let mut blocks = vec![];
    let mut eqs = vec![];
    for (k, &size) in sizes.iter().enumerate() {
        let side = size.unsigned_abs() as usize;
        let data = &ents[k];
        let to_block = |rows: Option<usize>| -> PsdBlock {
            let pick = |e: &[(usize, usize, f64)]| -> Vec<(usize, usize, f64)> {
                e.iter().filter(|x| rows.is_none_or(|r| x.0 == r)).map(|&(i, j, v)| match rows {
                    Some(_) => (0, 0, v),
                    None => (i, j, v),
                }).collect()
            };
            let s = if rows.is_some() { 1 } else { side };
            let constant = SparseSym::new(s, pick(data.get(&0).map_or(&[][..], |v| v)).into_iter().map(|(i, j, v)| (i, j, -v)).collect());
            let coeffs = data
                .iter()
                .filter(|(mat, _)| **mat > 0)
                .map(|(mat, e)| (mat - 1, SparseSym::new(s, pick(e))))
                .filter(|(_, f)| !f.is_empty())
                .collect();
            PsdBlock { side: s, constant, coeffs }
        };
        if size > 0 {
            blocks.push(to_block(None));
            continue;
        }
        // diagonal block: per-row linear inequalities, or negated pairs = equalities
        let row = |r: usize| -> BTreeMap<usize, f64> {
            let mut out = BTreeMap::new();
            for (mat, e) in data {
                for &(i, _, v) in e {
                    if i == r {
                        *out.entry(*mat).or_insert(0.0) += v;
                    }
                }
            }
            out
        };
        let rows: Vec<BTreeMap<usize, f64>> = (0..side).map(row).collect();
        let paired = side.is_multiple_of(2)
            && (0..side / 2).all(|e| {
                let (a, b) = (&rows[2 * e], &rows[2 * e + 1]);
                a.len() == b.len() && a.iter().all(|(k, v)| b.get(k) == Some(&-v))
            });
        if paired {
            for e in 0..side / 2 {
                let r = &rows[2 * e];
                let coeffs: Vec<(usize, f64)> = r.iter().filter(|(m, _)| **m > 0).map(|(m, v)| (m - 1, *v)).collect();
                if coeffs.is_empty() {
                    return Err(bad("equality without variables"));
                }
                eqs.push(EqConstraint { coeffs, rhs: r.get(&0).copied().unwrap_or(0.0) });
            }
        } else {
            for r in 0..side {
                blocks.push(to_block(Some(r)));
            }
        }
    }
    let p = SdpProblem::new(m, objective, blocks, eqs, "sdpa-import", 0);
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial() -> SdpProblem {
        let block = PsdBlock {
            side: 1,
            constant: SparseSym::new(1, vec![]),
            coeffs: vec![(0, SparseSym::new(1, vec![(0, 0, 1.0)]))],
        };
        SdpProblem::new(1, vec![-1.0], vec![block], vec![], "trivial", 0)
    }

    #[test]
    fn trivial_file_bytes() {
        let s = to_sdpa_string(&trivial()).unwrap();
        assert_eq!(s, "1\n1\n1\n1\n1 1 1 1 1\n");
        assert_eq!(s.lines().count(), 5);
    }

    #[test]
    fn roundtrip_with_equalities() {
        let block = PsdBlock {
            side: 2,
            constant: SparseSym::new(2, vec![(0, 1, 0.25)]),
            coeffs: vec![
                (0, SparseSym::new(2, vec![(0, 0, 1.0)])),
                (1, SparseSym::new(2, vec![(1, 1, 1.0), (0, 1, -0.1)])),
            ],
        };
        let eq = EqConstraint { coeffs: vec![(0, 1.0), (1, 1.0 / 3.0)], rhs: 0.7 };
        let p = SdpProblem::new(2, vec![1.0, 0.1], vec![block], vec![eq], "t", 0);
        let q = from_sdpa_str(&to_sdpa_string(&p).unwrap()).unwrap();
        assert_eq!(p.blocks, q.blocks);
        assert_eq!(p.eqs, q.eqs);
        assert_eq!(p.objective, q.objective);
    }

    #[test]
    fn rejects_empty() {
        let p = SdpProblem::new(0, vec![], vec![], vec![], "t", 0);
        assert!(to_sdpa_string(&p).is_err());
        assert!(from_sdpa_str("1\n1\n2\n").is_err());
        assert!(from_sdpa_str("0\n1\n1\n\n").is_err());
    }
}
