use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::filters::FilterPair;
use crate::error::{Result, WaveError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Periodic,
    Brickwall,
    Reflection,
}

impl BoundaryMode {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Brickwall => "brickwall",
            BoundaryMode::Reflection => "reflection",
        }
    }
}

impl FromStr for BoundaryMode {
    type Err = WaveError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(BoundaryMode::Periodic),
            "brickwall" | "brick-wall" => Ok(BoundaryMode::Brickwall),
            "reflection" | "reflect" => Ok(BoundaryMode::Reflection),
            _ => Err(WaveError::param(
                "boundary",
                format!("unknown boundary mode {s:?} (expected periodic, brickwall or reflection)"),
            )),
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Largest admissible decomposition level for a series of length `n`.
pub fn max_level(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        n.ilog2() as usize
    }
}

/// Width of the level-`j` equivalent filter, `(2^j - 1)(L - 1) + 1`.
pub fn equivalent_width(filter_len: usize, j: usize) -> usize {
    ((1usize << j) - 1) * (filter_len - 1) + 1
}

/// MODWT coefficients of one series.
///
/// Internally the transform runs on a working series that is the input itself
/// (periodic, brickwall) or the input followed by its mirror image
/// (reflection); accessors expose only the first `n` values.
#[derive(Debug, Clone)]
pub struct Decomposition {
    filter: FilterPair,
    mode: BoundaryMode,
    n: usize,
    details: Vec<Vec<f64>>,
    smooth: Vec<f64>,
    masks: Vec<Vec<bool>>,
}

pub fn modwt_transform(x: &[f64], levels: usize, filter: &FilterPair, mode: BoundaryMode) -> Result<Decomposition> {
    let n = x.len();
    if n < filter.len() {
        return Err(WaveError::InsufficientData(format!(
            "series of length {n} is shorter than the {} filter (length {})",
            filter.name(),
            filter.len()
        )));
    }
    if levels == 0 {
        return Err(WaveError::param("levels", "must be at least 1"));
    }
    if levels > max_level(n) {
        return Err(WaveError::LevelTooLarge {
            level: levels,
            max: max_level(n),
            n,
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(WaveError::param("series", format!("non-finite value at index {i}")));
    }

    let work: Vec<f64> = match mode {
        BoundaryMode::Reflection => x.iter().copied().chain(x.iter().rev().copied()).collect(),
        _ => x.to_vec(),
    };
    let (details, smooth) = pyramid(&work, levels, filter);

    let masks = (1..=levels)
        .map(|j| match mode {
            BoundaryMode::Brickwall => {
                let skip = (equivalent_width(filter.len(), j) - 1).min(n);
                (0..n).map(|t| t >= skip).collect()
            }
            _ => vec![true; n],
        })
        .collect();

    Ok(Decomposition {
        filter: filter.clone(),
        mode,
        n,
        details,
        smooth,
        masks,
    })
}

/// Forward pyramid with MODWT filters `h/sqrt(2)`, `g/sqrt(2)` and
/// circular filtering at stride `2^(j-1)`.
fn pyramid(x: &[f64], levels: usize, filter: &FilterPair) -> (Vec<Vec<f64>>, Vec<f64>) {
    let m = x.len();
    let h: Vec<f64> = filter.wavelet().iter().map(|v| v / std::f64::consts::SQRT_2).collect();
    let g: Vec<f64> = filter.scaling().iter().map(|v| v / std::f64::consts::SQRT_2).collect();
    let mut v = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    for j in 1..=levels {
        let stride = (1usize << (j - 1)) % m;
        let mut w_next = vec![0.0; m];
        let mut v_next = vec![0.0; m];
        for t in 0..m {
            let mut idx = t;
            let (mut sw, mut sv) = (0.0, 0.0);
            for (hl, gl) in h.iter().zip(&g) {
                sw += hl * v[idx];
                sv += gl * v[idx];
                idx = (idx + m - stride) % m;
            }
            w_next[t] = sw;
            v_next[t] = sv;
        }
        details.push(w_next);
        v = v_next;
    }
    (details, v)
}

/// One inverse pyramid step: rebuilds `V_{j-1}` from `W_j` and `V_j`.
/// Either input may be absent (treated as zero).
fn inverse_step(w: Option<&[f64]>, v: Option<&[f64]>, j: usize, filter: &FilterPair) -> Vec<f64> {
    let m = w.or(v).map(|s| s.len()).unwrap_or(0);
    let stride = (1usize << (j - 1)) % m.max(1);
    let s2 = std::f64::consts::SQRT_2;
    let mut out = vec![0.0; m];
    for (t, o) in out.iter_mut().enumerate() {
        let mut idx = t;
        let mut acc = 0.0;
        for l in 0..filter.len() {
            if let Some(w) = w {
                acc += filter.wavelet()[l] / s2 * w[idx];
            }
            if let Some(v) = v {
                acc += filter.scaling()[l] / s2 * v[idx];
            }
            idx = (idx + stride) % m;
        }
        *o = acc;
    }
    out
}

/// Additive multiresolution components: `x = sum_j details[j] + smooth`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mra {
    pub details: Vec<Vec<f64>>,
    pub smooth: Vec<f64>,
}

impl Decomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn filter(&self) -> &FilterPair {
        &self.filter
    }

    /// Wavelet coefficients at level `j` (1-based).
    pub fn details(&self, j: usize) -> &[f64] {
        &self.details[j - 1][..self.n]
    }

    /// Scaling coefficients at the coarsest level.
    pub fn smooth(&self) -> &[f64] {
        &self.smooth[..self.n]
    }

    pub fn nonboundary_mask(&self, j: usize) -> &[bool] {
        &self.masks[j - 1]
    }

    pub fn nonboundary_counts(&self) -> Vec<usize> {
        self.masks.iter().map(|m| m.iter().filter(|&&b| b).count()).collect()
    }

    /// Level-`j` coefficients that survive the boundary mask.
    pub fn unmasked(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.details(j)
            .iter()
            .zip(self.nonboundary_mask(j))
            .filter(|(_, &keep)| keep)
            .map(|(v, _)| *v)
    }

    /// Whether two decompositions can be compared coefficient by coefficient.
    pub fn compatible(&self, other: &Decomposition) -> Result<()> {
        if self.n != other.n
            || self.levels() != other.levels()
            || self.mode != other.mode
            || self.filter.kind() != other.filter.kind()
        {
            return Err(WaveError::Mismatch(format!(
                "decompositions differ (n {} vs {}, J {} vs {}, {} vs {}, {} vs {})",
                self.n,
                other.n,
                self.levels(),
                other.levels(),
                self.mode,
                other.mode,
                self.filter.name(),
                other.filter.name()
            )));
        }
        Ok(())
    }

    /// Per-level detail series and smooth whose sum is the original input.
    pub fn mra(&self) -> Result<Mra> {
        if self.mode == BoundaryMode::Brickwall {
            return Err(WaveError::NotReconstructible("brickwall"));
        }
        let levels = self.levels();
        let mut details = Vec::with_capacity(levels);
        for j in 1..=levels {
            let mut d = inverse_step(Some(&self.details[j - 1]), None, j, &self.filter);
            for k in (1..j).rev() {
                d = inverse_step(None, Some(&d), k, &self.filter);
            }
            d.truncate(self.n);
            details.push(d);
        }
        let mut s = self.smooth.clone();
        for k in (1..=levels).rev() {
            s = inverse_step(None, Some(&s), k, &self.filter);
        }
        s.truncate(self.n);
        Ok(Mra { details, smooth: s })
    }
}

/// Decomposes several series with shared settings, in parallel.
pub fn modwt_panel<S: AsRef<[f64]> + Sync>(
    series: &[S],
    levels: usize,
    filter: &FilterPair,
    mode: BoundaryMode,
) -> Result<Vec<Decomposition>> {
    series
        .par_iter()
        .map(|x| modwt_transform(x.as_ref(), levels, filter, mode))
        .collect()
}

pub fn nonboundary_counts(dec: &Decomposition) -> Vec<usize> {
    dec.nonboundary_counts()
}

/// Sum of MRA components, which reproduces the transformed series.
pub fn mra_reconstruct(dec: &Decomposition) -> Result<Vec<f64>> {
    let mra = dec.mra()?;
    let mut out = mra.smooth;
    for d in &mra.details {
        for (o, v) in out.iter_mut().zip(d) {
            *o += v;
        }
    }
    Ok(out)
}
