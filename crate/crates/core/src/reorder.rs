//! Offline similarity-based channel reordering.
//!
//! Correlated channels are paired so that they land in the same block. The
//! similarity between two channels is the absolute cosine similarity of
//! their spatial planes, averaged over a calibration set. Two pairing
//! strategies are provided:
//!
//! * **greedy** repeatedly takes the globally most similar remaining pair;
//! * **heuristic** repeatedly takes the remaining channel with the smallest
//!   similarity row-sum (the most isolated one) and pairs it with its most
//!   similar remaining partner.
//!
//! Larger groups are formed by pairing the pairs again on group-mean
//! similarity, see [`group_channels`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tensor::{Element, FeatureMap, Level};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds a matrix from rows. Must be square, symmetric and within
    /// `[0, 1]`; the diagonal is ignored.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(invalid(format!("similarity matrix row has {} entries, expected {n}", row.len())));
            }
            values.extend_from_slice(row);
        }
        let m = SimilarityMatrix { n, values };
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let s = m.get(i, j);
                if !(0.0..=1.0).contains(&s) {
                    return Err(invalid(format!("similarity s[{i}][{j}] = {s} outside [0, 1]")));
                }
                if s != m.get(j, i) {
                    return Err(invalid(format!("similarity matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n.max(1)).map(<[f64]>::to_vec).take(self.n).collect()
    }
}

/// Mean absolute cosine similarity between channel planes over `calibration`.
/// All-zero channels are similar to nothing.
pub fn similarity_matrix<T: Element>(calibration: &[FeatureMap<T>]) -> Result<SimilarityMatrix> {
    let first = calibration.first().ok_or_else(|| invalid("calibration set is empty"))?;
    let n = first.dims().channels;
    if let Some(bad) = calibration.iter().find(|m| m.dims().channels != n) {
        return Err(invalid(format!("calibration maps disagree on channel count: {n} vs {}", bad.dims().channels)));
    }
    let mut values = vec![0.0; n * n];
    for map in calibration {
        let planes: Vec<Vec<f64>> =
            (0..n).map(|c| map.channel(c).iter().map(|v| v.level().to_f64()).collect()).collect();
        let norms: Vec<f64> = planes.iter().map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        for i in 0..n {
            for j in i..n {
                let s = if norms[i] == 0.0 || norms[j] == 0.0 {
                    0.0
                } else {
                    let dot: f64 = planes[i].iter().zip(&planes[j]).map(|(a, b)| a * b).sum();
                    (dot / (norms[i] * norms[j])).abs().min(1.0)
                };
                values[i * n + j] += s;
                if i != j {
                    values[j * n + i] += s;
                }
            }
        }
    }
    let count = calibration.len() as f64;
    values.iter_mut().for_each(|v| *v /= count);
    Ok(SimilarityMatrix { n, values })
}

/// A reordering of channels: `order[k]` is the source channel placed at
/// position `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelPermutation {
    order: Vec<usize>,
}

impl ChannelPermutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &c in &order {
            if c >= order.len() || std::mem::replace(&mut seen[c], true) {
                return Err(invalid(format!("{order:?} is not a permutation")));
            }
        }
        Ok(ChannelPermutation { order })
    }

    pub fn identity(n: usize) -> Self {
        ChannelPermutation { order: (0..n).collect() }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn invert(&self) -> Self {
        let mut order = vec![0; self.order.len()];
        for (dst, &src) in self.order.iter().enumerate() {
            order[src] = dst;
        }
        ChannelPermutation { order }
    }
}

/// Moves whole channel planes: output channel `k` is input channel `order[k]`.
pub fn apply_permutation<T: Element>(map: &FeatureMap<T>, perm: &ChannelPermutation) -> Result<FeatureMap<T>> {
    let dims = map.dims();
    if perm.len() != dims.channels {
        return Err(invalid(format!(
            "permutation over {} channels applied to a map with {}",
            perm.len(),
            dims.channels
        )));
    }
    let mut data = Vec::with_capacity(dims.len());
    for &src in perm.order() {
        data.extend_from_slice(map.channel(src));
    }
    FeatureMap::new(dims, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingMethod {
    Greedy,
    Heuristic,
}

/// Pairs indices `0..n` of a symmetric similarity function. Each pair is
/// returned lower index first, in selection order. An odd leftover comes
/// back as a singleton at the end.
fn pair_up(n: usize, sim: impl Fn(usize, usize) -> f64, method: PairingMethod) -> Vec<Vec<usize>> {
    let mut alive: Vec<usize> = (0..n).collect();
    let mut groups = Vec::with_capacity(n.div_ceil(2));
    while alive.len() >= 2 {
        let (a, b) = match method {
            PairingMethod::Greedy => {
                let mut best = (alive[0], alive[1]);
                let mut best_s = f64::NEG_INFINITY;
                for (x, &i) in alive.iter().enumerate() {
                    for &j in &alive[x + 1..] {
                        let s = sim(i, j);
                        if s > best_s {
                            best_s = s;
                            best = (i, j);
                        }
                    }
                }
                best
            }
            PairingMethod::Heuristic => {
                let row_sum = |i: usize| alive.iter().filter(|&&j| j != i).map(|&j| sim(i, j)).sum::<f64>();
                let mut seed = alive[0];
                let mut seed_sum = row_sum(seed);
                for &i in &alive[1..] {
                    let s = row_sum(i);
                    if s < seed_sum {
                        seed = i;
                        seed_sum = s;
                    }
                }
                let mut partner = None;
                let mut partner_s = f64::NEG_INFINITY;
                for &j in alive.iter().filter(|&&j| j != seed) {
                    let s = sim(seed, j);
                    if s > partner_s {
                        partner_s = s;
                        partner = Some(j);
                    }
                }
                (seed, partner.expect("at least two channels remain"))
            }
        };
        alive.retain(|&c| c != a && c != b);
        groups.push(vec![a.min(b), a.max(b)]);
    }
    groups.extend(alive.into_iter().map(|c| vec![c]));
    groups
}

pub fn greedy_pairing(matrix: &SimilarityMatrix) -> ChannelPermutation {
    pairing(matrix, PairingMethod::Greedy)
}

pub fn heuristic_pairing(matrix: &SimilarityMatrix) -> ChannelPermutation {
    pairing(matrix, PairingMethod::Heuristic)
}

pub fn pairing(matrix: &SimilarityMatrix, method: PairingMethod) -> ChannelPermutation {
    group_channels(matrix, method, 2)
}

/// Groups channels into runs of `group_size` (a power of two) by pairing
/// channels, then pairing the pairs on mean inter-group similarity, and so
/// on. Returns the concatenated group order.
pub fn group_channels(matrix: &SimilarityMatrix, method: PairingMethod, group_size: usize) -> ChannelPermutation {
    let mut groups: Vec<Vec<usize>> = (0..matrix.len()).map(|c| vec![c]).collect();
    let mut size = 1;
    while size < group_size.max(2) && groups.len() > 1 {
        let sim = |a: usize, b: usize| {
            let (ga, gb) = (&groups[a], &groups[b]);
            let total: f64 = ga.iter().flat_map(|&i| gb.iter().map(move |&j| matrix.get(i, j))).sum();
            total / (ga.len() * gb.len()) as f64
        };
        let merged = pair_up(groups.len(), sim, method)
            .into_iter()
            .map(|ids| ids.into_iter().flat_map(|g| groups[g].iter().copied()).collect())
            .collect();
        groups = merged;
        size *= 2;
    }
    ChannelPermutation { order: groups.into_iter().flatten().collect() }
}
