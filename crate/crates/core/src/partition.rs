//! Block-row partitions and symmetric reorderings.
//!
//! A [`Partition`] splits `0..n` into `p` consecutive, non-empty ranges. When
//! it carries a permutation, the ranges refer to the permuted ordering:
//! row `k` of the permuted system is row `perm[k]` of the original.

use std::ops::Range;
use std::path::Path;

use crate::error::{DdpsError, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    boundaries: Vec<usize>,
    perm: Option<Vec<usize>>,
    inv_perm: Option<Vec<usize>>,
}

impl Partition {
    /// Validates `boundaries` (strictly increasing from 0) and `perm` (a true
    /// permutation of `0..n`).
    pub fn new(boundaries: Vec<usize>, perm: Option<Vec<usize>>) -> Result<Self> {
        if boundaries.len() < 2 || boundaries[0] != 0 {
            return Err(DdpsError::InvalidConfig(
                "partition boundaries must start at 0 and hold at least one part".into(),
            ));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DdpsError::InvalidConfig(
                "empty or decreasing partition block".into(),
            ));
        }
        let n = *boundaries.last().unwrap();
        let inv_perm = match &perm {
            None => None,
            Some(p) => {
                if p.len() != n {
                    return Err(DdpsError::DimensionMismatch {
                        expected: n,
                        got: p.len(),
                    });
                }
                let mut inv = vec![usize::MAX; n];
                for (new, &old) in p.iter().enumerate() {
                    if old >= n || inv[old] != usize::MAX {
                        return Err(DdpsError::InvalidConfig("perm is not a permutation".into()));
                    }
                    inv[old] = new;
                }
                Some(inv)
            }
        };
        Ok(Partition {
            boundaries,
            perm,
            inv_perm,
        })
    }

    /// `p` consecutive blocks whose sizes differ by at most one, larger first.
    pub fn contiguous(n: usize, p: usize) -> Result<Self> {
        if p == 0 || p > n {
            return Err(DdpsError::InvalidPartCount { parts: p, n });
        }
        let (q, r) = (n / p, n % p);
        let mut boundaries = Vec::with_capacity(p + 1);
        boundaries.push(0);
        for i in 0..p {
            boundaries.push(boundaries[i] + q + usize::from(i < r));
        }
        Partition::new(boundaries, None)
    }

    /// Groups rows by part id (ascending), keeping original order within a
    /// part. `expected_parts`, when given, bounds the admissible ids.
    pub fn from_part_vector(parts: &[usize], expected_parts: Option<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(DdpsError::BadPartVector("empty part vector".into()));
        }
        let p = parts.iter().max().unwrap() + 1;
        if let Some(e) = expected_parts {
            if p > e {
                return Err(DdpsError::BadPartVector(format!(
                    "part id {} out of range for {e} parts",
                    p - 1
                )));
            }
        }
        let p = expected_parts.unwrap_or(p);
        let mut sizes = vec![0usize; p];
        for &id in parts {
            sizes[id] += 1;
        }
        if let Some(missing) = sizes.iter().position(|&s| s == 0) {
            return Err(DdpsError::BadPartVector(format!("part {missing} is empty")));
        }
        let mut boundaries = vec![0usize; p + 1];
        for i in 0..p {
            boundaries[i + 1] = boundaries[i] + sizes[i];
        }
        let mut next = boundaries.clone();
        let mut perm = vec![0usize; parts.len()];
        for (row, &id) in parts.iter().enumerate() {
            perm[next[id]] = row;
            next[id] += 1;
        }
        Partition::new(boundaries, Some(perm))
    }

    /// Reads a METIS-style part vector: `n` whitespace-separated 0-based ids.
    pub fn read_file(
        path: impl AsRef<Path>,
        n: usize,
        expected_parts: Option<usize>,
    ) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DdpsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let ids = text
            .split_whitespace()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| DdpsError::BadPartVector(format!("'{t}' is not an integer")))
                    .and_then(|v| {
                        usize::try_from(v)
                            .map_err(|_| DdpsError::BadPartVector(format!("negative part id {v}")))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        if ids.len() != n {
            return Err(DdpsError::BadPartVector(format!(
                "expected {n} part ids, found {}",
                ids.len()
            )));
        }
        Partition::from_part_vector(&ids, expected_parts)
    }

    /// Recursive level-set bisection of the graph of a structurally symmetric
    /// matrix. Each cut splits a breadth-first ordering started from a
    /// pseudo-peripheral vertex; whole components are first placed on the
    /// side with more room when they fit.
    pub fn bisection(s: &CsrMatrix, p: usize) -> Result<Self> {
        s.ensure_square()?;
        let n = s.n_rows();
        if p == 0 || p > n {
            return Err(DdpsError::InvalidPartCount { parts: p, n });
        }
        let mut parts = Vec::with_capacity(p);
        let mut work = Bisector::new(s);
        work.split((0..n).collect(), p, &mut parts);
        let mut boundaries = vec![0usize];
        let mut perm = Vec::with_capacity(n);
        for mut part in parts {
            part.sort_unstable();
            perm.extend_from_slice(&part);
            boundaries.push(perm.len());
        }
        Partition::new(boundaries, Some(perm))
    }

    pub fn n(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    pub fn parts(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn range(&self, i: usize) -> Range<usize> {
        self.boundaries[i]..self.boundaries[i + 1]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn perm(&self) -> Option<&[usize]> {
        self.perm.as_deref()
    }

    pub fn inv_perm(&self) -> Option<&[usize]> {
        self.inv_perm.as_deref()
    }

    /// Part that owns position `k` of the (permuted) ordering.
    pub fn part_of(&self, k: usize) -> usize {
        self.boundaries.partition_point(|&b| b <= k) - 1
    }

    /// Part id of each ORIGINAL row.
    pub fn part_vector(&self) -> Vec<usize> {
        let n = self.n();
        let mut ids = vec![0usize; n];
        for i in 0..self.parts() {
            for k in self.range(i) {
                let row = self.perm.as_ref().map_or(k, |p| p[k]);
                ids[row] = i;
            }
        }
        ids
    }

    /// Number of undirected off-diagonal edges of `s` joining different parts.
    pub fn edge_cut(&self, s: &CsrMatrix) -> usize {
        let ids = self.part_vector();
        s.triplets()
            .filter(|&(i, j, _)| i < j && ids[i] != ids[j])
            .count()
    }

    /// Scatters a solution of the permuted system back to original order.
    pub fn unpermute(&self, x: &[f64]) -> Vec<f64> {
        match &self.perm {
            None => x.to_vec(),
            Some(perm) => {
                let mut out = vec![0.0; x.len()];
                for (k, &row) in perm.iter().enumerate() {
                    out[row] = x[k];
                }
                out
            }
        }
    }
}

/// `(|A| + |Aᵀ|) / 2`.
pub fn symmetrize_pattern(a: &CsrMatrix) -> Result<CsrMatrix> {
    a.ensure_square()?;
    let mut entries = Vec::with_capacity(2 * a.nnz());
    for (i, j, v) in a.triplets() {
        let h = 0.5 * v.abs();
        entries.push((i, j, h));
        entries.push((j, i, h));
    }
    CsrMatrix::from_triplets(a.n_rows(), a.n_cols(), &entries)
}

/// Returns `(P A Pᵀ, P f)` for the partition's permutation (identity when
/// absent).
pub fn apply_permutation(
    a: &CsrMatrix,
    f: &[f64],
    part: &Partition,
) -> Result<(CsrMatrix, Vec<f64>)> {
    a.ensure_square()?;
    if a.n_rows() != part.n() {
        return Err(DdpsError::DimensionMismatch {
            expected: part.n(),
            got: a.n_rows(),
        });
    }
    if f.len() != a.n_rows() {
        return Err(DdpsError::DimensionMismatch {
            expected: a.n_rows(),
            got: f.len(),
        });
    }
    match (part.perm(), part.inv_perm()) {
        (Some(perm), Some(inv)) => Ok((
            permute_symmetric(a, perm, inv),
            perm.iter().map(|&row| f[row]).collect(),
        )),
        _ => Ok((a.clone(), f.to_vec())),
    }
}

pub(crate) fn permute_symmetric(a: &CsrMatrix, perm: &[usize], inv: &[usize]) -> CsrMatrix {
    let entries: Vec<_> = perm
        .iter()
        .enumerate()
        .flat_map(|(new_i, &old_i)| {
            let (cols, vals) = a.row(old_i);
            cols.iter()
                .zip(vals)
                .map(move |(&j, &v)| (new_i, inv[j], v))
        })
        .collect();
    CsrMatrix::from_triplets(a.n_rows(), a.n_cols(), &entries)
        .expect("permutation keeps indices in range")
}

struct Bisector<'a> {
    s: &'a CsrMatrix,
    member: Vec<bool>,
    seen: Vec<bool>,
    placed: Vec<bool>,
}

impl<'a> Bisector<'a> {
    fn new(s: &'a CsrMatrix) -> Self {
        let n = s.n_rows();
        Bisector {
            s,
            member: vec![false; n],
            seen: vec![false; n],
            placed: vec![false; n],
        }
    }

    fn split(&mut self, verts: Vec<usize>, parts: usize, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            out.push(verts);
            return;
        }
        let left_parts = parts.div_ceil(2);
        // floor(m k1 / k) >= k1 and the remainder >= k - k1 because m >= k
        let left_size = verts.len() * left_parts / parts;
        let (left, right) = self.halve(&verts, left_size);
        self.split(left, left_parts, out);
        self.split(right, parts - left_parts, out);
    }

    fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.s
            .row(v)
            .0
            .iter()
            .copied()
            .filter(move |&u| u != v && self.member[u])
    }

    fn degree(&self, v: usize) -> usize {
        self.neighbors(v).count()
    }

    /// Breadth-first order and per-vertex levels from `root` within the
    /// current vertex set.
    fn bfs(&mut self, root: usize) -> (Vec<usize>, Vec<usize>) {
        let mut order = vec![root];
        let mut levels = vec![0usize];
        self.seen[root] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            let next: Vec<usize> = self.neighbors(v).filter(|&u| !self.seen[u]).collect();
            for u in next {
                self.seen[u] = true;
                order.push(u);
                levels.push(levels[head] + 1);
            }
            head += 1;
        }
        for &v in &order {
            self.seen[v] = false;
        }
        (order, levels)
    }

    /// BFS ordering of the component containing `start`, rooted at a
    /// pseudo-peripheral vertex.
    fn peripheral_order(&mut self, start: usize) -> Vec<usize> {
        let (mut order, mut levels) = self.bfs(start);
        for _ in 0..8 {
            let ecc = *levels.last().unwrap();
            let candidate = order
                .iter()
                .zip(&levels)
                .filter(|&(_, &l)| l == ecc)
                .map(|(&v, _)| v)
                .min_by_key(|&v| (self.degree(v), v))
                .unwrap();
            let (cand_order, cand_levels) = self.bfs(candidate);
            if *cand_levels.last().unwrap() > ecc {
                order = cand_order;
                levels = cand_levels;
            } else {
                break;
            }
        }
        order
    }

    fn halve(&mut self, verts: &[usize], left_size: usize) -> (Vec<usize>, Vec<usize>) {
        for &v in verts {
            self.member[v] = true;
        }
        let mut components = Vec::new();
        for &v in verts {
            if !self.placed[v] {
                let (comp, _) = self.bfs(v);
                for &u in &comp {
                    self.placed[u] = true;
                }
                components.push(comp);
            }
        }

        let mut room = [left_size, verts.len() - left_size];
        let mut sides: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        let mut leftover = Vec::new();
        for comp in components {
            let lighter = usize::from(room[1] > room[0]);
            let side = if comp.len() <= room[lighter] {
                Some(lighter)
            } else if comp.len() <= room[1 - lighter] {
                Some(1 - lighter)
            } else {
                None
            };
            match side {
                Some(s) => {
                    room[s] -= comp.len();
                    sides[s].extend(comp);
                }
                None => leftover.push(comp[0]),
            }
        }
        let mut tail = Vec::new();
        for start in leftover {
            tail.extend(self.peripheral_order(start));
        }
        let (head, rest) = tail.split_at(room[0]);
        sides[0].extend_from_slice(head);
        sides[1].extend_from_slice(rest);

        for &v in verts {
            self.member[v] = false;
            self.placed[v] = false;
        }
        let [left, right] = sides;
        (left, right)
    }
}
