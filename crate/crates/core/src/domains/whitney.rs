//! Greedy coverings by balls `B(xi_j, tau(xi_j))` and their partitions of unity.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::symbols::profile::bump;
use crate::symbols::dist;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WhitneyOptions {
    /// Candidate spacing as a fraction of the local `tau`.
    pub spacing: f64,
    /// Cap on the number of candidate centers.
    pub max_candidates: usize,
    /// Rounds of gap repair before coverage failure is reported.
    pub max_repairs: usize,
    /// A probe counts as covered when it lies within this fraction of some radius.
    pub probe_margin: f64,
}

impl Default for WhitneyOptions {
    fn default() -> Self {
        WhitneyOptions { spacing: 0.05, max_candidates: 4_000_000, max_repairs: 8, probe_margin: 0.8 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WhitneyCover {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub kappa: f64,
    /// Largest number of other balls met by a single ball.
    pub n_max: usize,
    /// Centers added after the greedy pass to close gaps between candidates.
    pub repaired: usize,
}

fn candidates_1d(lo: f64, hi: f64, tau: &dyn Fn(&[f64]) -> f64, spacing: f64, cap: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![vec![lo]];
    let mut x = lo;
    while x < hi {
        x = (x + spacing * tau(&[x])).min(hi);
        out.push(vec![x]);
        if out.len() > cap {
            return Err(Error::Precondition(format!("more than {cap} candidate centers; tau is too small for this box")));
        }
    }
    Ok(out)
}

/// Quadtree cell centers as candidates; cell corners are returned as extra coverage probes.
fn candidates_2d(lo: &[f64], hi: &[f64], tau: &dyn Fn(&[f64]) -> f64, spacing: f64, cap: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut out = Vec::new();
    let mut probes = Vec::new();
    let mut stack = vec![(lo[0], lo[1], hi[0], hi[1])];
    while let Some((x0, y0, x1, y1)) = stack.pop() {
        let c = [(x0 + x1) / 2.0, (y0 + y1) / 2.0];
        let size = (x1 - x0).max(y1 - y0);
        if size <= spacing * tau(&c) {
            out.push(c.to_vec());
            for p in [[x0, y0], [x1, y0], [x0, y1], [x1, y1]] {
                probes.push(p.to_vec());
            }
        } else {
            stack.push((x0, y0, c[0], c[1]));
            stack.push((c[0], y0, x1, c[1]));
            stack.push((x0, c[1], c[0], y1));
            stack.push((c[0], c[1], x1, y1));
        }
        if out.len() > cap {
            return Err(Error::Precondition(format!("more than {cap} candidate centers; tau is too small for this box")));
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    probes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    probes.dedup();
    Ok((out, probes))
}

/// Largest `|tau(a) - tau(b)| / |a - b|` over consecutive candidates.
fn sampled_lipschitz(cands: &[Vec<f64>], taus: &[f64]) -> f64 {
    let mut k = 0.0f64;
    for i in 1..cands.len() {
        let d = dist(&cands[i], &cands[i - 1]);
        if d > 0.0 {
            k = k.max((taus[i] - taus[i - 1]).abs() / d);
        }
    }
    k
}

/// Bucket grid on the admitted centers, one level per octave of radius.
struct Index {
    levels: Vec<(f64, std::collections::HashMap<Vec<i64>, Vec<usize>>)>,
}

impl Index {
    fn new() -> Self {
        Index { levels: Vec::new() }
    }

    fn level_of(r: f64) -> f64 {
        2f64.powi(r.log2().ceil() as i32)
    }

    fn key(x: &[f64], cell: f64) -> Vec<i64> {
        x.iter().map(|v| (v / cell).floor() as i64).collect()
    }

    fn insert(&mut self, j: usize, x: &[f64], r: f64) {
        let cell = Self::level_of(r);
        let pos = match self.levels.iter().position(|(c, _)| *c == cell) {
            Some(p) => p,
            None => {
                self.levels.push((cell, Default::default()));
                self.levels.len() - 1
            }
        };
        self.levels[pos].1.entry(Self::key(x, cell)).or_default().push(j);
    }

    /// Indices whose stored ball may meet `B(x, r)`. Cheap when `r` is at most
    /// twice every stored radius, which the decreasing scan order guarantees.
    fn near(&self, x: &[f64], r: f64, out: &mut Vec<usize>) {
        out.clear();
        for (cell, map) in &self.levels {
            let reach = r + cell;
            let lo = Self::key(&x.iter().map(|v| v - reach).collect::<Vec<_>>(), *cell);
            let hi = Self::key(&x.iter().map(|v| v + reach).collect::<Vec<_>>(), *cell);
            let (b0, b1) = if x.len() > 1 { (lo[1], hi[1]) } else { (0, 0) };
            for i in lo[0]..=hi[0] {
                for j in b0..=b1 {
                    let key = if x.len() > 1 { vec![i, j] } else { vec![i] };
                    if let Some(v) = map.get(&key) {
                        out.extend_from_slice(v);
                    }
                }
            }
        }
    }
}

/// Greedy cover of the box `[lo, hi]` by balls `B(xi_j, tau(xi_j))`.
///
/// Candidates are scanned by decreasing `tau`; a candidate is admitted when
/// `B(xi, tau(xi) / 2)` is disjoint from the admitted half-balls. Gaps left
/// between candidates are closed by admitting the uncovered sample points.
pub fn whitney_cover(lo: &[f64], hi: &[f64], tau: &dyn Fn(&[f64]) -> f64, kappa: f64, opts: &WhitneyOptions) -> Result<WhitneyCover> {
    let d = lo.len();
    if d == 0 || d > 2 || hi.len() != d {
        return Err(invalid("box", "needs matching bounds in d = 1 or 2"));
    }
    if lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
        return Err(invalid("box", "needs lo < hi"));
    }
    if !(0.0..1.0).contains(&kappa) {
        return Err(invalid("kappa", format!("{kappa} is outside [0, 1)")));
    }
    let (cands, corner_probes) = if d == 1 {
        (candidates_1d(lo[0], hi[0], tau, opts.spacing, opts.max_candidates)?, vec![])
    } else {
        candidates_2d(lo, hi, tau, opts.spacing, opts.max_candidates)?
    };
    let taus: Vec<f64> = cands.iter().map(|c| tau(c)).collect();
    if let Some(i) = taus.iter().position(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::Precondition(format!("tau({:?}) = {} is not positive", cands[i], taus[i])));
    }
    let observed = sampled_lipschitz(&cands, &taus);
    if observed > kappa * (1.0 + 1e-6) + 1e-12 {
        return Err(Error::Precondition(format!("sampled Lipschitz constant of tau is {observed:.4}, above kappa = {kappa}")));
    }
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| taus[b].total_cmp(&taus[a]).then(cands[a].partial_cmp(&cands[b]).unwrap_or(Ordering::Equal)));

    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut radii: Vec<f64> = Vec::new();
    let mut index = Index::new();
    let mut near = Vec::new();
    for &i in &order {
        let (c, r) = (&cands[i], taus[i]);
        index.near(c, r / 2.0, &mut near);
        if near.iter().all(|&j| dist(c, &centers[j]) >= (r + radii[j]) / 2.0) {
            index.insert(centers.len(), c, r / 2.0);
            centers.push(c.clone());
            radii.push(r);
        }
    }

    let mut cover = WhitneyCover { lo: lo.to_vec(), hi: hi.to_vec(), centers, radii, kappa, n_max: 0, repaired: 0 };
    // gap repair on the candidates and the points between them
    let probes: Vec<Vec<f64>> = if d == 1 {
        cands.windows(2).map(|w| vec![(w[0][0] + w[1][0]) / 2.0]).chain(cands.iter().cloned()).collect()
    } else {
        cands.iter().cloned().chain(corner_probes).collect()
    };
    let mut full = Index::new();
    for j in 0..cover.len() {
        full.insert(j, &cover.centers[j], cover.radii[j]);
    }
    let mut near = Vec::new();
    let margin = opts.probe_margin;
    let mut covered = |p: &[f64], cover: &WhitneyCover, full: &Index| -> bool {
        full.near(p, 0.0, &mut near);
        near.iter().any(|&j| dist(p, &cover.centers[j]) < margin * cover.radii[j])
    };
    for round in 0..=opts.max_repairs {
        let gaps: Vec<&Vec<f64>> = probes.iter().filter(|p| !covered(p, &cover, &full)).collect();
        if gaps.is_empty() {
            break;
        }
        if round == opts.max_repairs {
            return Err(Error::Coverage { point: gaps[0].clone() });
        }
        for g in gaps {
            if !covered(g, &cover, &full) {
                full.insert(cover.len(), g, tau(g));
                cover.centers.push(g.clone());
                cover.radii.push(tau(g));
                cover.repaired += 1;
            }
        }
    }
    cover.n_max = cover.intersection_counts().into_iter().max().unwrap_or(0);
    Ok(cover)
}

impl WhitneyCover {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    fn phi(&self, j: usize, x: &[f64]) -> f64 {
        let r = dist(x, &self.centers[j]);
        if r >= self.radii[j] {
            0.0
        } else {
            bump(r, 0.0, self.radii[j])
        }
    }

    pub fn sum_phi(&self, x: &[f64]) -> f64 {
        (0..self.len()).map(|j| self.phi(j, x)).sum()
    }

    /// `psi_j = phi_j / sum_k phi_k`, with `phi_j` the cutoff bump on `B(xi_j, tau_j)`.
    pub fn psi(&self, j: usize, x: &[f64]) -> f64 {
        let p = self.phi(j, x);
        if p == 0.0 {
            return 0.0;
        }
        p / self.sum_phi(x)
    }

    pub fn psi_sum(&self, x: &[f64]) -> f64 {
        let s = self.sum_phi(x);
        if s == 0.0 {
            return 0.0;
        }
        (0..self.len()).map(|j| self.phi(j, x) / s).sum()
    }

    /// Number of other balls meeting each ball.
    pub fn intersection_counts(&self) -> Vec<usize> {
        let n = self.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| self.centers[a][0].total_cmp(&self.centers[b][0]));
        let rmax = self.radii.iter().cloned().fold(0.0, f64::max);
        let mut counts = vec![0usize; n];
        for (pos, &i) in idx.iter().enumerate() {
            for &j in &idx[pos + 1..] {
                if self.centers[j][0] - self.centers[i][0] >= self.radii[i] + rmax {
                    break;
                }
                if dist(&self.centers[i], &self.centers[j]) < self.radii[i] + self.radii[j] {
                    counts[i] += 1;
                    counts[j] += 1;
                }
            }
        }
        counts
    }

    /// Extremes of `tau_j / tau_k` over intersecting pairs.
    pub fn radius_ratio_range(&self) -> (f64, f64) {
        let (mut lo, mut hi) = (1.0f64, 1.0f64);
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                if dist(&self.centers[i], &self.centers[j]) < self.radii[i] + self.radii[j] {
                    let r = self.radii[i] / self.radii[j];
                    lo = lo.min(r.min(1.0 / r));
                    hi = hi.max(r.max(1.0 / r));
                }
            }
        }
        (lo, hi)
    }

    /// Observed `max tau_j^m |d^m psi_j|` for `m = 0, 1, 2` by central differences
    /// along the coordinate axes at the given points.
    pub fn derivative_constants(&self, points: &[Vec<f64>]) -> [f64; 3] {
        let mut c = [0.0f64; 3];
        for x in points {
            for j in 0..self.len() {
                let r = dist(x, &self.centers[j]);
                if r >= self.radii[j] {
                    continue;
                }
                let t = self.radii[j];
                let h = 1e-3 * t;
                c[0] = c[0].max(self.psi(j, x));
                for k in 0..x.len() {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += h;
                    xm[k] -= h;
                    let (fp, f0, fm) = (self.psi(j, &xp), self.psi(j, x), self.psi(j, &xm));
                    c[1] = c[1].max(((fp - fm) / (2.0 * h)).abs() * t);
                    c[2] = c[2].max(((fp - 2.0 * f0 + fm) / (h * h)).abs() * t * t);
                }
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{tau_metric, LipschitzDomain};

    #[test]
    fn constant_tau_cover() {
        let c = 0.1;
        let cover = whitney_cover(&[0.0], &[1.0], &|_| c, 0.0, &WhitneyOptions::default()).unwrap();
        assert!(cover.len() <= (1.0f64 / c).ceil() as usize + 1, "{} balls", cover.len());
        assert!(cover.n_max <= 3, "n_max {}", cover.n_max);
        for k in 0..=1000 {
            let x = [k as f64 / 1000.0];
            assert!((cover.psi_sum(&x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_metric_cover_shrinks_near_origin() {
        let alpha = 8.0;
        let tau = |x: &[f64]| tau_metric(x, &LipschitzDomain::HalflinePos, alpha).unwrap();
        let cover = whitney_cover(&[-2.0], &[2.0], &tau, 1.0 / 16.0, &WhitneyOptions::default()).unwrap();
        let t0 = 1.0 / (32.0 * alpha);
        let nearest = (0..cover.len()).min_by(|&a, &b| cover.centers[a][0].abs().total_cmp(&cover.centers[b][0].abs())).unwrap();
        let r = cover.radii[nearest];
        assert!(r >= t0 && r <= t0 / (1.0 - 1.0 / 16.0), "{r} vs {t0}");
        let k = 1.0 / 16.0;
        let (lo, hi) = cover.radius_ratio_range();
        assert!(lo >= (1.0 - k) / (1.0 + k) - 1e-12 && hi <= (1.0 + k) / (1.0 - k) + 1e-12);
    }

    #[test]
    fn rejects_fast_tau() {
        let r = whitney_cover(&[0.0], &[1.0], &|x| 0.01 + 2.0 * x[0], 0.5, &WhitneyOptions::default());
        assert!(r.is_err());
    }

    #[test]
    fn planar_cover_is_partition() {
        let dom = LipschitzDomain::Epigraph { phi: super::super::Phi::Constant { c: 0.0 }, frame: Default::default() };
        let tau = |x: &[f64]| tau_metric(x, &dom, 2.0).unwrap();
        let opts = WhitneyOptions { spacing: 0.25, ..Default::default() };
        let cover = whitney_cover(&[-0.5, -0.5], &[0.5, 0.5], &tau, 1.0 / 16.0, &opts).unwrap();
        for k in 0..200 {
            let x = [-0.5 + (k as f64 * 0.618).fract(), -0.5 + (k as f64 * 0.377).fract()];
            assert!((cover.psi_sum(&x) - 1.0).abs() < 1e-10);
        }
        assert!(cover.n_max < 200);
    }
}
