//! Tie-averaged ranks, the rank normalization chain, and the evaluation
//! statistics used to compare rank vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ranks in `[1, n]`: rank 1 is the largest value, tied values share the
/// mean of the positions they span.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub ranks: Vec<f64>,
}

impl RankVector {
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

pub fn rank_transform(values: &[f64]) -> Result<RankVector> {
    if values.is_empty() {
        return Err(Error::config("cannot rank an empty sequence"));
    }
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::NaN(i));
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    Ok(RankVector { ranks })
}

/// Per-feature standardization statistics (population standard deviation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: f64,
    pub std: f64,
}

impl NormalizationStats {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DegenerateFeature("no values".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if !(std > 0.0) || !std.is_finite() {
            return Err(Error::DegenerateFeature(format!(
                "standard deviation {std} over {} values",
                values.len()
            )));
        }
        Ok(NormalizationStats { mean, std })
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    #[inline]
    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// Steps one and two of the chain: divide by the network size, then map
/// `(0, 1]` onto `(-1, 1]`.
#[inline]
pub fn scale_rank(rank: f64, n: usize) -> f64 {
    2.0 * (rank / n as f64) - 1.0
}

#[inline]
pub fn unscale_rank(scaled: f64, n: usize) -> f64 {
    (scaled + 1.0) / 2.0 * n as f64
}

/// Full normalization chain for one rank vector. When `stats` is `None` they
/// are fitted on the scaled values (training mode) and returned.
pub fn normalize_chain(
    ranks: &RankVector,
    stats: Option<NormalizationStats>,
) -> Result<(Vec<f64>, NormalizationStats)> {
    let n = ranks.len();
    let scaled: Vec<f64> = ranks.ranks.iter().map(|&r| scale_rank(r, n)).collect();
    let stats = match stats {
        Some(s) => s,
        None => NormalizationStats::fit(&scaled)?,
    };
    Ok((scaled.into_iter().map(|x| stats.apply(x)).collect(), stats))
}

/// Inverse of [`normalize_chain`]: standardized values back to ranks.
pub fn denormalize_chain(values: &[f64], n: usize, stats: NormalizationStats) -> Vec<f64> {
    values
        .iter()
        .map(|&z| unscale_rank(stats.invert(z), n))
        .collect()
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::config("need at least two observations"));
    }
    if let Some(i) = x.iter().chain(y).position(|v| v.is_nan()) {
        return Err(Error::NaN(i % x.len()));
    }
    Ok(())
}

/// Kendall τ-b by Knight's merge-count algorithm, O(n log n).
///
/// With n0 = n(n-1)/2, n1/n2 the pairs tied in x/y, n3 the pairs tied in
/// both and S the discordant pairs (swaps of a merge sort on y within the
/// x order), τ-b = (n0 - n1 - n2 + n3 - 2S) / √((n0 - n1)(n0 - n2)).
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b])
            .unwrap()
            .then(y[a].partial_cmp(&y[b]).unwrap())
    });

    let mut n1 = 0u64;
    let mut n3 = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        n1 += tie_pairs(j - i);
        let mut k = i;
        while k < j {
            let mut l = k + 1;
            while l < j && y[idx[l]] == y[idx[k]] {
                l += 1;
            }
            n3 += tie_pairs(l - k);
            k = l;
        }
        i = j;
    }

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut n2 = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        n2 += tie_pairs(j - i);
        i = j;
    }

    let n0 = tie_pairs(n);
    let concordant_minus_discordant = n0 as i64 - n1 as i64 - n2 as i64 + n3 as i64 - 2 * swaps as i64;
    tau_from_counts(concordant_minus_discordant, n0 - n2, n0 - n1)
}

#[inline]
fn tie_pairs(k: usize) -> u64 {
    let k = k as u64;
    k * k.saturating_sub(1) / 2
}

/// `(C - D) / √((C + D + Tx)(C + D + Ty))`, where `C + D + Tx` is the number
/// of pairs not tied in y and `C + D + Ty` the number not tied in x.
pub(crate) fn tau_from_counts(c_minus_d: i64, untied_y: u64, untied_x: u64) -> Result<f64> {
    if untied_x == 0 || untied_y == 0 {
        return Err(Error::TauUndefined);
    }
    Ok(c_minus_d as f64 / ((untied_x as f64) * (untied_y as f64)).sqrt())
}

/// Bottom-up merge sort counting strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if v[j] < v[i] {
                    swaps += (mid - i) as u64;
                    buf[k] = v[j];
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - i)].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + (hi - j)].copy_from_slice(&v[j..hi]);
            lo = hi;
        }
        v.copy_from_slice(buf);
        width *= 2;
    }
    swaps
}

pub fn r_squared(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_pair(pred, target)?;
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let ss_tot: f64 = target.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ConstantTarget);
    }
    let ss_res: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch(pred.len(), target.len()));
    }
    if pred.is_empty() {
        return Err(Error::config("mse of empty sequence"));
    }
    Ok(pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64)
}

/// One method evaluated on one network for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub network: String,
    pub method: String,
    pub metric: String,
    pub tau_b: f64,
    pub r2: f64,
    pub mse: f64,
    pub seconds: f64,
}

pub const EVAL_CSV_HEADER: &str = "network,method,metric,tau_b,r2,mse,seconds";

impl EvalReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.network, self.method, self.metric, self.tau_b, self.r2, self.mse, self.seconds
        )
    }

    pub fn parse_csv_row(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 7 {
            return Err(Error::Schema(format!("expected 7 report fields, got {}", f.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Schema(format!("bad number {s:?}")))
        };
        Ok(EvalReport {
            network: f[0].to_string(),
            method: f[1].to_string(),
            metric: f[2].to_string(),
            tau_b: num(f[3])?,
            r2: num(f[4])?,
            mse: num(f[5])?,
            seconds: num(f[6])?,
        })
    }
}

/// Mean and half-width of a 99% normal confidence interval,
/// `2.576 · s / √k` with the sample standard deviation `s`.
pub fn mean_ci99(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, 2.576 * var.sqrt() / (k as f64).sqrt())
}
