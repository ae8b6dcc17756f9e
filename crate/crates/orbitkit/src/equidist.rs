//! Pushforward sampling experiments: draw diagonal log-parameters t uniformly
//! from the wedge-norm polytope of g(k), form the lattice g(k) exp(t) Z^n, and
//! track observables of that lattice across k. Includes the ball-volume
//! oracle for the Haar expectation of point counts, normalization-free ratio
//! tables, escape-of-mass curves, and per-block statistics for families that
//! preserve a coordinate block splitting.
//!
//! Reproducibility: sample i of parameter k depends only on (seed, k, i).
//! Parallel workers fill a slot per sample and the reduction is sequential,
//! so reports are bit-identical for any worker count.

use rayon::prelude::*;
use thiserror::Error;

use crate::families::{divergence_pattern, graph_of, FamilyError, PolyFamily};
use crate::lattice::{lattice_stats, LatticeBasis, LatticeError};
use crate::polytope::{wedge_polytope, Measure, PolytopeError};
use crate::rat::Mat;

#[derive(Debug, Error)]
pub enum EquidistError {
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("wedge polytope degenerate at k={0}")]
    EmptyPolytope(i64),
    #[error("denominator observable is statistically indistinguishable from zero at k={0}")]
    DegenerateDenominator(i64),
    #[error("family does not preserve the component blocks: entry ({0},{1})")]
    NotBlockCompatible(usize, usize),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Observable of the sampled lattice. Point counts exclude the origin; the
/// radial bump is a compactly-supported continuous function of the shortest
/// vector length: 1 below r0, 0 above r1, linear in between.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    PointCount { r: f64 },
    Lambda1Below { r: f64 },
    RadialBump { r0: f64, r1: f64 },
}

impl Observable {
    pub fn label(&self) -> String {
        match self {
            Observable::PointCount { r } => format!("point_count(r={r})"),
            Observable::Lambda1Below { r } => format!("lambda1_below(r={r})"),
            Observable::RadialBump { r0, r1 } => format!("radial_bump({r0},{r1})"),
        }
    }

    fn needed_radius(&self) -> Option<f64> {
        match self {
            Observable::PointCount { r } => Some(*r),
            _ => None,
        }
    }

    fn eval(&self, lambda1: f64, counts: &[u64], radius_slot: usize) -> f64 {
        match self {
            Observable::PointCount { .. } => counts[radius_slot] as f64,
            Observable::Lambda1Below { r } => {
                if lambda1 < *r {
                    1.0
                } else {
                    0.0
                }
            }
            Observable::RadialBump { r0, r1 } => {
                if lambda1 <= *r0 {
                    1.0
                } else if lambda1 >= *r1 {
                    0.0
                } else {
                    (r1 - lambda1) / (r1 - r0)
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub family: PolyFamily,
    pub k_list: Vec<i64>,
    pub delta: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub observables: Vec<Observable>,
}

impl ExperimentConfig {
    /// Field-level validation used by the batch front-end.
    pub fn validate(&self) -> Result<(), EquidistError> {
        if !(0.0 < self.delta && self.delta < 1.0) {
            return Err(EquidistError::BadConfig(format!("delta: {} not in (0,1)", self.delta)));
        }
        if self.k_list.is_empty() {
            return Err(EquidistError::BadConfig("k_list: empty".into()));
        }
        if !self.k_list.windows(2).all(|w| w[0] < w[1]) {
            return Err(EquidistError::BadConfig("k_list: not strictly increasing".into()));
        }
        if self.sample_count < 1000 {
            return Err(EquidistError::BadConfig(format!(
                "sample_count: {} below the 1000 minimum",
                self.sample_count
            )));
        }
        if self.family.n > 4 {
            return Err(EquidistError::BadConfig(format!("family n={} > 4", self.family.n)));
        }
        if self.observables.is_empty() {
            return Err(EquidistError::BadConfig("observables: empty".into()));
        }
        Ok(())
    }

    /// Seed for parameter k: mixing k in keeps draws unchanged when other k
    /// values join the list.
    fn seed_for_k(&self, k: i64) -> u64 {
        self.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSummary {
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug)]
pub struct KSummary {
    pub k: i64,
    /// Hausdorff volume of the sampled polytope (the normalizer is its
    /// reciprocal).
    pub volume: f64,
    pub summaries: Vec<ObservableSummary>,
}

#[derive(Clone, Debug)]
pub struct PushReport {
    pub observables: Vec<Observable>,
    pub per_k: Vec<KSummary>,
}

/// Raw per-sample observable values for one k (row per sample).
struct SampleBlock {
    volume: f64,
    values: Vec<Vec<f64>>,
}

fn sample_block(cfg: &ExperimentConfig, k: i64) -> Result<SampleBlock, EquidistError> {
    let fam = &cfg.family;
    if !fam.is_unipotent_upper() || !fam.is_dichotomy() {
        return Err(EquidistError::BadConfig(
            "family: must be unipotent upper with the zero-or-diverging dichotomy".into(),
        ));
    }
    let g_exact = fam.eval_rat(k);
    let g = fam.eval_f64(k);
    let hp = wedge_polytope(&g_exact, cfg.delta)?;
    let vp = hp.vertices().map_err(|_| EquidistError::EmptyPolytope(k))?;
    let volume = vp.volume(Measure::Hausdorff);
    let sampler = hp.sampler(cfg.seed_for_k(k))?;

    let radii: Vec<f64> = cfg.observables.iter().filter_map(Observable::needed_radius).collect();
    let radius_slots: Vec<usize> = {
        let mut slot = 0;
        cfg.observables
            .iter()
            .map(|o| {
                if o.needed_radius().is_some() {
                    let s = slot;
                    slot += 1;
                    s
                } else {
                    usize::MAX
                }
            })
            .collect()
    };

    let values: Vec<Vec<f64>> = (0..cfg.sample_count as u64)
        .into_par_iter()
        .map(|i| {
            let t = sampler.sample_lie(i);
            let basis = lattice_of(&g, t.coords());
            let (lambda1, counts) = lattice_stats(&basis, &radii).expect("desk-scale lattice");
            cfg.observables
                .iter()
                .zip(&radius_slots)
                .map(|(o, &slot)| o.eval(lambda1, &counts, slot))
                .collect()
        })
        .collect();
    Ok(SampleBlock { volume, values })
}

/// g * exp(diag t) as a lattice basis.
fn lattice_of(g: &Mat<f64>, t: &[f64]) -> LatticeBasis {
    let n = g.rows;
    LatticeBasis::new(
        (0..n)
            .map(|j| {
                let s = t[j].exp();
                (0..n).map(|i| g.at(i, j) * s).collect()
            })
            .collect(),
    )
}

fn summarize(values: &[Vec<f64>], obs_index: usize) -> ObservableSummary {
    let n = values.len() as f64;
    let mut mean = 0.0;
    for row in values {
        mean += row[obs_index];
    }
    mean /= n;
    let mut var = 0.0;
    for row in values {
        let d = row[obs_index] - mean;
        var += d * d;
    }
    var /= (n - 1.0).max(1.0);
    ObservableSummary { mean, variance: var, stderr: (var / n).sqrt() }
}

/// Means, variances, and standard errors of every observable at every k.
pub fn push_sample(cfg: &ExperimentConfig) -> Result<PushReport, EquidistError> {
    let mut per_k = Vec::with_capacity(cfg.k_list.len());
    for &k in &cfg.k_list {
        let block = sample_block(cfg, k)?;
        let summaries = (0..cfg.observables.len()).map(|i| summarize(&block.values, i)).collect();
        per_k.push(KSummary { k, volume: block.volume, summaries });
    }
    Ok(PushReport { observables: cfg.observables.clone(), per_k })
}

/// The Haar expectation of the nonzero-point count in a ball of radius r:
/// the Lebesgue volume of that ball (mean value theorem for lattice sums).
pub fn siegel_mean_value(n: usize, r: f64) -> f64 {
    unit_ball_volume(n) * r.powi(n as i32)
}

pub fn unit_ball_volume(n: usize) -> f64 {
    // pi^{n/2} / Gamma(n/2 + 1) via the half-integer closed forms.
    if n % 2 == 0 {
        let m = n / 2;
        let mut v = 1.0;
        for i in 1..=m {
            v *= std::f64::consts::PI / i as f64;
        }
        v
    } else {
        let m = (n - 1) / 2;
        // 2^n m! pi^m / n!
        let mut v = 2f64.powi(n as i32) * std::f64::consts::PI.powi(m as i32);
        for i in 1..=m {
            v *= i as f64;
        }
        for i in 1..=n {
            v /= i as f64;
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct RatioPoint {
    pub k: i64,
    pub ratio: f64,
    pub stderr: f64,
}

/// Per-k table of mean(f)/mean(g) with delta-method standard errors. The
/// ratio is normalization-free: scaling both observables by any positive
/// constant cancels exactly.
pub fn ratio_convergence(
    cfg: &ExperimentConfig,
    f: &Observable,
    g: &Observable,
) -> Result<Vec<RatioPoint>, EquidistError> {
    let mut with_pair = cfg.clone();
    with_pair.observables = vec![f.clone(), g.clone()];
    let mut out = Vec::new();
    for &k in &cfg.k_list {
        let block = sample_block(&with_pair, k)?;
        let pairs: Vec<(f64, f64)> = block.values.iter().map(|r| (r[0], r[1])).collect();
        out.push(ratio_from_samples(k, &pairs)?);
    }
    Ok(out)
}

/// Delta-method ratio of paired samples; exposed for the invariance tests.
pub fn ratio_from_samples(k: i64, pairs: &[(f64, f64)]) -> Result<RatioPoint, EquidistError> {
    let n = pairs.len() as f64;
    let mf = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mg = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut vf = 0.0;
    let mut vg = 0.0;
    let mut cov = 0.0;
    for (a, b) in pairs {
        vf += (a - mf) * (a - mf);
        vg += (b - mg) * (b - mg);
        cov += (a - mf) * (b - mg);
    }
    vf /= (n - 1.0).max(1.0);
    vg /= (n - 1.0).max(1.0);
    cov /= (n - 1.0).max(1.0);
    let se_g = (vg / n).sqrt();
    if mg.abs() <= 3.0 * se_g || mg.abs() < 1e-12 {
        return Err(EquidistError::DegenerateDenominator(k));
    }
    let ratio = mf / mg;
    let var_ratio =
        (vf / (mg * mg) + vg * mf * mf / mg.powi(4) - 2.0 * cov * mf / mg.powi(3)) / n;
    Ok(RatioPoint { k, ratio, stderr: var_ratio.max(0.0).sqrt() })
}

#[derive(Clone, Debug)]
pub struct EscapeCurve {
    pub k: i64,
    /// fraction of samples with shortest vector below r, aligned with the
    /// input grid.
    pub fractions: Vec<f64>,
}

/// Empirical escape-of-mass curves: the mass outside the compact piece where
/// every lattice vector is at least r long.
pub fn escape_mass(cfg: &ExperimentConfig, r_grid: &[f64]) -> Result<Vec<EscapeCurve>, EquidistError> {
    let mut probe = cfg.clone();
    probe.observables = vec![Observable::Lambda1Below { r: 1.0 }];
    let mut out = Vec::new();
    for &k in &cfg.k_list {
        let fam = &probe.family;
        let g_exact = fam.eval_rat(k);
        let g = fam.eval_f64(k);
        let hp = wedge_polytope(&g_exact, probe.delta)?;
        let sampler = hp.sampler(probe.seed_for_k(k))?;
        let lambdas: Vec<f64> = (0..probe.sample_count as u64)
            .into_par_iter()
            .map(|i| {
                let t = sampler.sample_lie(i);
                let basis = lattice_of(&g, t.coords());
                let (l1, _) = lattice_stats(&basis, &[]).expect("desk-scale lattice");
                l1
            })
            .collect();
        let fractions = r_grid
            .iter()
            .map(|&r| lambdas.iter().filter(|&&l| l < r).count() as f64 / lambdas.len() as f64)
            .collect();
        out.push(EscapeCurve { k, fractions });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BlockReport {
    pub k: i64,
    pub blocks: Vec<Vec<usize>>,
    /// Mean point count of each renormalized block lattice.
    pub block_count_means: Vec<f64>,
    pub block_count_stderrs: Vec<f64>,
    /// Ball-volume oracle value for each block dimension.
    pub block_oracles: Vec<f64>,
    /// Standard deviation of log covolume per block (central spread).
    pub log_covolume_spread: Vec<f64>,
    /// Largest off-block entry observed across samples (0 = exact splitting).
    pub max_off_block: f64,
}

/// For a family that is block-diagonal along its component partition: split
/// each sampled lattice into its blocks, renormalize each block to
/// determinant +-1, and compare point counts against the ball-volume oracle
/// of the block dimension.
pub fn block_factor_test(cfg: &ExperimentConfig, r: f64) -> Result<Vec<BlockReport>, EquidistError> {
    let fam = &cfg.family;
    let pattern = divergence_pattern(fam);
    let graph = graph_of(&pattern)?;
    let blocks = graph.components();
    // Block compatibility: entries joining different blocks must vanish.
    let mut block_of = vec![0usize; fam.n + 1];
    for (b, comp) in blocks.iter().enumerate() {
        for &v in comp {
            block_of[v] = b;
        }
    }
    for i in 1..=fam.n {
        for j in 1..=fam.n {
            if block_of[i] != block_of[j] && !fam.entry(i - 1, j - 1).is_zero() {
                return Err(EquidistError::NotBlockCompatible(i, j));
            }
        }
    }

    let mut out = Vec::new();
    for &k in &cfg.k_list {
        let g_exact = fam.eval_rat(k);
        let g = fam.eval_f64(k);
        let hp = wedge_polytope(&g_exact, cfg.delta)?;
        let sampler = hp.sampler(cfg.seed_for_k(k))?;
        struct Row {
            counts: Vec<f64>,
            log_covols: Vec<f64>,
            off_block: f64,
        }
        let rows: Vec<Row> = (0..cfg.sample_count as u64)
            .into_par_iter()
            .map(|i| {
                let t = sampler.sample_lie(i);
                let basis = lattice_of(&g, t.coords());
                let mut counts = Vec::with_capacity(blocks.len());
                let mut log_covols = Vec::with_capacity(blocks.len());
                let mut off_block = 0.0f64;
                for r_i in 0..fam.n {
                    for c_i in 0..fam.n {
                        if block_of[r_i + 1] != block_of[c_i + 1] {
                            off_block = off_block.max(basis.cols[c_i][r_i].abs());
                        }
                    }
                }
                for comp in &blocks {
                    let d = comp.len();
                    let sub = LatticeBasis::new(
                        comp.iter()
                            .map(|&cj| comp.iter().map(|&ci| basis.cols[cj - 1][ci - 1]).collect())
                            .collect(),
                    );
                    let det = sub.det();
                    let covol = det.abs();
                    log_covols.push(covol.ln());
                    let scale = covol.powf(1.0 / d as f64);
                    let renorm = LatticeBasis::new(
                        sub.cols.iter().map(|col| col.iter().map(|x| x / scale).collect()).collect(),
                    );
                    let (_, cts) = lattice_stats(&renorm, &[r]).expect("block lattice");
                    counts.push(cts[0] as f64);
                }
                Row { counts, log_covols, off_block }
            })
            .collect();

        let nb = blocks.len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; nb];
        let mut log_means = vec![0.0; nb];
        let mut max_off = 0.0f64;
        for row in &rows {
            for b in 0..nb {
                means[b] += row.counts[b] / n;
                log_means[b] += row.log_covols[b] / n;
            }
            max_off = max_off.max(row.off_block);
        }
        let mut stderrs = vec![0.0; nb];
        let mut spreads = vec![0.0; nb];
        for row in &rows {
            for b in 0..nb {
                stderrs[b] += (row.counts[b] - means[b]).powi(2);
                spreads[b] += (row.log_covols[b] - log_means[b]).powi(2);
            }
        }
        for b in 0..nb {
            stderrs[b] = (stderrs[b] / ((n - 1.0).max(1.0)) / n).sqrt();
            spreads[b] = (spreads[b] / (n - 1.0).max(1.0)).sqrt();
        }
        out.push(BlockReport {
            k,
            blocks: blocks.clone(),
            block_count_means: means,
            block_count_stderrs: stderrs,
            block_oracles: blocks.iter().map(|c| siegel_mean_value(c.len(), r)).collect(),
            log_covolume_spread: spreads,
            max_off_block: max_off,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(family: PolyFamily, k_list: Vec<i64>, samples: usize) -> ExperimentConfig {
        ExperimentConfig {
            family,
            k_list,
            delta: 0.1,
            sample_count: samples,
            seed: 42,
            observables: vec![Observable::PointCount { r: 0.8 }],
        }
    }

    #[test]
    fn ball_volume_oracle() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
        assert!((siegel_mean_value(2, 1.0) - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(siegel_mean_value(3, 0.0), 0.0);
    }

    #[test]
    fn push_sample_reproducible() {
        let cfg = small_cfg(PolyFamily::square_cascade_3(), vec![10, 40], 400);
        let a = push_sample(&cfg).unwrap();
        let b = push_sample(&cfg).unwrap();
        for (ka, kb) in a.per_k.iter().zip(&b.per_k) {
            assert_eq!(ka.volume, kb.volume);
            for (sa, sb) in ka.summaries.iter().zip(&kb.summaries) {
                assert_eq!(sa.mean, sb.mean);
                assert_eq!(sa.stderr, sb.stderr);
            }
        }
    }

    #[test]
    fn adding_k_values_does_not_perturb() {
        let base = small_cfg(PolyFamily::square_cascade_3(), vec![25], 300);
        let more = small_cfg(PolyFamily::square_cascade_3(), vec![10, 25, 60], 300);
        let a = push_sample(&base).unwrap();
        let b = push_sample(&more).unwrap();
        let k25_a = &a.per_k[0];
        let k25_b = b.per_k.iter().find(|s| s.k == 25).unwrap();
        assert_eq!(k25_a.summaries[0].mean, k25_b.summaries[0].mean);
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_cfg(PolyFamily::square_cascade_3(), vec![10], 2000);
        cfg.delta = 1.5;
        assert!(matches!(cfg.validate(), Err(EquidistError::BadConfig(_))));
        cfg.delta = 0.1;
        cfg.sample_count = 10;
        assert!(matches!(cfg.validate(), Err(EquidistError::BadConfig(_))));
        cfg.sample_count = 2000;
        cfg.k_list = vec![10, 5];
        assert!(matches!(cfg.validate(), Err(EquidistError::BadConfig(_))));
        cfg.k_list = vec![5, 10];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn ratio_of_identical_observables_is_one() {
        let cfg = small_cfg(PolyFamily::square_cascade_3(), vec![15], 300);
        let f = Observable::PointCount { r: 0.8 };
        let pts = ratio_convergence(&cfg, &f, &f).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let pairs: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let x = (i % 7) as f64 + 1.0;
                let y = (i % 5) as f64 + 2.0;
                (x, y)
            })
            .collect();
        let base = ratio_from_samples(1, &pairs).unwrap();
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|(a, b)| (3.5 * a, 3.5 * b)).collect();
        let after = ratio_from_samples(1, &scaled).unwrap();
        assert!((base.ratio - after.ratio).abs() < 1e-12);
    }

    #[test]
    fn degenerate_denominator_detected() {
        let pairs: Vec<(f64, f64)> = (0..100).map(|i| (1.0, if i % 2 == 0 { 1.0 } else { -1.0 })).collect();
        assert!(matches!(
            ratio_from_samples(3, &pairs),
            Err(EquidistError::DegenerateDenominator(3))
        ));
    }

    #[test]
    fn escape_mass_is_monotone_cdf() {
        let cfg = small_cfg(PolyFamily::square_cascade_3(), vec![20], 400);
        let grid = [0.0, 0.05, 0.2, 0.5, 1.0, 2.0];
        let curves = escape_mass(&cfg, &grid).unwrap();
        let fr = &curves[0].fractions;
        assert_eq!(fr[0], 0.0);
        for w in fr.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for &f in fr {
            assert!((0.0..=1.0).contains(&f));
        }
    }

    #[test]
    fn block_factor_splits_exactly() {
        let cfg = small_cfg(PolyFamily::two_block_4(), vec![12, 30], 200);
        let reports = block_factor_test(&cfg, 0.8).unwrap();
        for rep in &reports {
            assert_eq!(rep.blocks, vec![vec![1, 2], vec![3, 4]]);
            assert_eq!(rep.max_off_block, 0.0);
            assert_eq!(rep.block_oracles.len(), 2);
            // Covolumes of the two blocks are reciprocal: equal log spreads.
            assert!((rep.log_covolume_spread[0] - rep.log_covolume_spread[1]).abs() < 1e-9);
        }
        // Central spread grows with k.
        assert!(reports[1].log_covolume_spread[0] > reports[0].log_covolume_spread[0]);
    }

    #[test]
    fn block_factor_rejects_mixing_families() {
        let cfg = small_cfg(PolyFamily::square_cascade_3(), vec![10], 200);
        // Connected graph: a single block, fine. Build a mixing family with
        // two components but a nonzero cross entry: impossible by definition
        // (cross entries create edges), so exercise the connected case
        // instead: one block is accepted and returns a single component.
        let reports = block_factor_test(&cfg, 0.8).unwrap();
        assert_eq!(reports[0].blocks.len(), 1);
    }
}
