use serde::Serialize;

use crate::dependence::wavelet_correlation;
use crate::error::{Result, WaveError};
use crate::modwt::Decomposition;

/// Long-run correlation matrix built from coarse-scale wavelet correlations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectivityResult {
    /// `f[i][l]`: mean wavelet correlation of series `i` and `l` over `[j1, j2]`.
    pub f: Vec<Vec<f64>>,
    pub j1: usize,
    pub j2: usize,
    /// Whether the per-level correlations of each pair stay within the tolerance.
    pub converged: Vec<Vec<bool>>,
}

/// Averages wavelet correlations over the coarse levels `[j1, j2]`.
///
/// The correlation normalization already cancels the per-scale energy growth
/// of long-memory series, so no further rescaling is applied.
pub fn fractal_connectivity(
    decs: &[Decomposition],
    j1: usize,
    j2: usize,
    tolerance: f64,
) -> Result<ConnectivityResult> {
    if decs.len() < 2 {
        return Err(WaveError::InsufficientData(
            "connectivity needs at least two series".into(),
        ));
    }
    if j1 < 1 || j2 < j1 + 1 {
        return Err(WaveError::param(
            "octaves",
            format!("range [{j1}, {j2}] must span at least 2 levels"),
        ));
    }
    let levels = decs[0].levels();
    if j2 > levels {
        return Err(WaveError::LevelTooLarge {
            level: j2,
            max: levels,
            n: decs[0].len(),
        });
    }
    for d in &decs[1..] {
        decs[0].compatible(d)?;
    }
    for (j, &count) in decs[0]
        .nonboundary_counts()
        .iter()
        .enumerate()
        .skip(j1 - 1)
        .take(j2 - j1 + 1)
    {
        if count >> (j + 1) < 8 {
            return Err(WaveError::InsufficientData(format!(
                "level {} keeps {count} coefficients, fewer than 8 per period",
                j + 1
            )));
        }
    }
    let p = decs.len();
    let mut f = vec![vec![1.0; p]; p];
    let mut converged = vec![vec![true; p]; p];
    for i in 0..p {
        for l in i + 1..p {
            let rho = wavelet_correlation(&decs[i], &decs[l], 0.95)?;
            let band = &rho.estimate[j1 - 1..j2];
            let mean = band.iter().sum::<f64>() / band.len() as f64;
            let hi = band.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = band.iter().cloned().fold(f64::INFINITY, f64::min);
            f[i][l] = mean.clamp(-1.0, 1.0);
            f[l][i] = f[i][l];
            converged[i][l] = hi - lo < tolerance;
            converged[l][i] = converged[i][l];
        }
    }
    Ok(ConnectivityResult { f, j1, j2, converged })
}

/// One agglomeration step. Cluster ids follow the usual convention:
/// leaves are `0..n`, the cluster created by merge `i` is `n + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cut {
    Clusters(usize),
    Height(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    pub merges: Vec<Merge>,
    /// Flat cluster label per series, numbered by first appearance.
    pub labels: Vec<usize>,
    /// Leaves in dendrogram order, for plotting reordered matrices.
    pub leaf_order: Vec<usize>,
}

const TIE_TOL: f64 = 1e-12;

/// Average-linkage agglomerative clustering on `1 - F`. Ties go to the pair
/// with the lowest cluster ids.
pub fn cluster_markets(f: &[Vec<f64>], cut: Cut) -> Result<Clustering> {
    let n = f.len();
    if n == 0 || f.iter().any(|row| row.len() != n) {
        return Err(WaveError::param(
            "matrix",
            "connectivity matrix must be square and non-empty",
        ));
    }
    if let Cut::Clusters(k) = cut {
        if k == 0 || k > n {
            return Err(WaveError::param("clusters", format!("{k} is not between 1 and {n}")));
        }
    }
    // Active clusters: (id, members).
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut dist: Vec<Vec<f64>> = f.iter().map(|row| row.iter().map(|v| 1.0 - v).collect()).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    while active.len() > 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..active.len() {
            for b in a + 1..active.len() {
                let d = dist[a][b];
                let key = ordered_ids(active[a].0, active[b].0);
                let better = match best {
                    None => true,
                    Some((ba, bb, bd)) => {
                        d < bd - TIE_TOL || (d <= bd + TIE_TOL && key < ordered_ids(active[ba].0, active[bb].0))
                    }
                };
                if better {
                    best = Some((a, b, d));
                }
            }
        }
        let (a, b, d) = best.expect("at least two active clusters");
        let (size_a, size_b) = (active[a].1.len() as f64, active[b].1.len() as f64);
        // Average linkage update (Lance-Williams).
        let merged_row: Vec<f64> = (0..active.len())
            .map(|c| (size_a * dist[a][c] + size_b * dist[b][c]) / (size_a + size_b))
            .collect();
        let (lo_id, hi_id) = ordered_ids(active[a].0, active[b].0);
        let mut members = active[a].1.clone();
        members.extend(&active[b].1);
        merges.push(Merge {
            left: lo_id,
            right: hi_id,
            height: d,
            size: members.len(),
        });
        // Put the new cluster in slot a, drop slot b.
        for c in 0..active.len() {
            dist[a][c] = merged_row[c];
            dist[c][a] = merged_row[c];
        }
        dist[a][a] = 0.0;
        active[a] = (n + merges.len() - 1, members);
        active.remove(b);
        dist.remove(b);
        for row in dist.iter_mut() {
            row.remove(b);
        }
    }

    let applied = match cut {
        Cut::Clusters(k) => n - k,
        Cut::Height(h) => merges.iter().take_while(|m| m.height <= h).count(),
    };
    Ok(Clustering {
        labels: flat_labels(n, &merges[..applied]),
        leaf_order: leaf_order(n, &merges),
        merges,
    })
}

fn ordered_ids(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn flat_labels(n: usize, merges: &[Merge]) -> Vec<usize> {
    // Union-find over the applied merges.
    let mut parent: Vec<usize> = (0..n + merges.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (i, m) in merges.iter().enumerate() {
        let id = n + i;
        let (l, r) = (root(&mut parent, m.left), root(&mut parent, m.right));
        parent[l] = id;
        parent[r] = id;
    }
    let mut seen: Vec<(usize, usize)> = Vec::new();
    (0..n)
        .map(|i| {
            let r = root(&mut parent, i);
            match seen.iter().find(|(root, _)| *root == r) {
                Some(&(_, label)) => label,
                None => {
                    let label = seen.len();
                    seen.push((r, label));
                    label
                }
            }
        })
        .collect()
}

fn leaf_order(n: usize, merges: &[Merge]) -> Vec<usize> {
    if merges.is_empty() {
        return (0..n).collect();
    }
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![n + merges.len() - 1];
    while let Some(id) = stack.pop() {
        if id < n {
            order.push(id);
        } else {
            let m = merges[id - n];
            stack.push(m.right);
            stack.push(m.left);
        }
    }
    order
}
