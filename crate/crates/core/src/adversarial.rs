//! Hard-instance generators: distributions in the `D_∞ ≤ ln 2` neighborhood
//! of a base distribution that any estimator must pay for, plus a regret
//! harness comparing measured error against the target-rate calculators.
//!
//! The mass-moving constructions work on grids, so exact normalization is
//! maintained by moving a fixed amount of mass proportionally out of one
//! region and into another; every scale factor stays inside [1/2, 2], which
//! keeps the density-ratio bound structural rather than checked after the
//! fact.

use std::collections::BTreeMap;

use crate::dist::DiscreteDistribution;
use crate::dp::PrivacyLedger;
use crate::error::{Error, Result};
use crate::hst::Hst;
use crate::onedim::{estimate_1d, psmm_baseline, target_rate_1d, OneDimConfig};
use crate::rng::Rng;
use crate::tree::{estimate_tree, target_rate_tree, TreeConfig};
use crate::wasserstein::w1_cdf;

/// Outcome of a neighbor construction: the distribution, or the input
/// unchanged when the construction degenerates (quantiles collide).
#[derive(Debug, Clone)]
pub struct Neighbor {
    pub distribution: DiscreteDistribution,
    pub degenerate: bool,
}

/// Move 1/(2k) of mass from the lower tail (at or below `q_{1/k}`) to the
/// upper tail (at or above `q_{1−1/k}`), each proportionally. The middle
/// CDF gap is exactly 1/(2k), so `W(P,Q) ≥ (1/2k)(q_{1−1/k} − q_{1/k})`,
/// and both scale factors stay in [1/2, 3/2], so `D_∞(P,Q) ≤ ln 2`.
pub fn hard_privacy_neighbor(p: &DiscreteDistribution, k: usize) -> Result<Neighbor> {
    p.grid()?;
    if k < 2 {
        return Err(Error::param(format!("neighbor construction needs k >= 2, got {k}")));
    }
    let alpha = 1.0 / k as f64;
    let lo = p.quantile_index(alpha)?;
    let hi = p.quantile_index(1.0 - alpha)?;
    if lo >= hi {
        return Ok(Neighbor { distribution: p.clone(), degenerate: true });
    }
    let moved = alpha / 2.0;
    let head: f64 = p.weights()[..=lo].iter().sum();
    let tail: f64 = p.weights()[hi..].iter().sum();
    // Quantile definition gives head ≥ 1/k and tail ≥ 1/k, so the factors
    // below are within [1/2, 1] and [1, 3/2].
    let head_scale = 1.0 - moved / head;
    let tail_scale = 1.0 + moved / tail;
    let mut weights = p.weights().to_vec();
    for w in weights[..=lo].iter_mut() {
        *w *= head_scale;
    }
    for w in weights[hi..].iter_mut() {
        *w *= tail_scale;
    }
    let distribution = DiscreteDistribution::new(p.domain().clone(), weights)?;
    Ok(Neighbor { distribution, degenerate: false })
}

/// Dyadic-scale mass shifts that mimic sampling noise: for each scale
/// `i ≥ 2`, move up to `min{1/√(2^i·n), 2^{−i}/2}` of mass from the upper
/// dyadic quantile band into the lower one, proportionally on both sides
/// and capped so every density ratio stays within a factor 2.
pub fn hard_empirical_neighbor(p: &DiscreteDistribution, n: usize) -> Result<Neighbor> {
    p.grid()?;
    if n < 4 {
        return Err(Error::param(format!("neighbor construction needs n >= 4, got {n}")));
    }
    let mut weights = p.weights().to_vec();
    let log_n = (n as f64).log2();
    let mut changed = false;
    let mut i = 2u32;
    loop {
        let alpha_lo = (0.5f64).powi(i as i32);
        let alpha_hi = (0.5f64).powi(i as i32 - 1);
        // Lower band (q_{1/2^i}, q_{1/2^{i−1}}], upper band mirrored.
        let lo_a = p.quantile_index(alpha_lo)?;
        let lo_b = p.quantile_index(alpha_hi)?;
        let hi_a = p.quantile_index(1.0 - alpha_hi)?;
        let hi_b = p.quantile_index(1.0 - alpha_lo)?;
        let lower: Vec<usize> = ((lo_a + 1)..=lo_b).collect();
        let upper: Vec<usize> = ((hi_a + 1)..=hi_b).collect();
        if i as f64 > log_n && (lower.is_empty() || upper.is_empty()) {
            break;
        }
        let lower_mass: f64 = lower.iter().map(|&x| p.weight(x)).sum();
        let upper_mass: f64 = upper.iter().map(|&x| p.weight(x)).sum();
        if lower_mass > 0.0 && upper_mass > 0.0 {
            let target = if (i as f64) < log_n {
                ((2.0f64).powi(i as i32) / n as f64).sqrt() * alpha_lo
            } else {
                0.5 * alpha_lo
            };
            // Gain factor on the lower band ≤ 2, loss factor ≥ 1/2.
            let moved = target.min(lower_mass).min(upper_mass / 2.0);
            if moved > 0.0 {
                let gain = 1.0 + moved / lower_mass;
                let loss = 1.0 - moved / upper_mass;
                for &x in &lower {
                    weights[x] = p.weight(x) * gain;
                }
                for &x in &upper {
                    weights[x] = p.weight(x) * loss;
                }
                changed = true;
            }
        }
        if i > 64 {
            break;
        }
        i += 1;
    }
    if !changed {
        return Ok(Neighbor { distribution: p.clone(), degenerate: true });
    }
    let distribution = DiscreteDistribution::new(p.domain().clone(), weights)?;
    Ok(Neighbor { distribution, degenerate: false })
}

/// Partition the support by dyadic probability scale:
/// scale `s` holds the points with `P(x) ∈ (2^{−s−1}, 2^{−s}]`.
pub fn scale_partition(p: &DiscreteDistribution) -> BTreeMap<u32, Vec<usize>> {
    let mut scales: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (x, &w) in p.weights().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let mut s = 0u32;
        while (0.5f64).powi(s as i32 + 1) >= w {
            s += 1;
        }
        scales.entry(s).or_default().push(x);
    }
    scales
}

/// A sampled Assouad net: support atoms paired up, one distribution per
/// hypercube corner, each corner moving `perturbation` between the atoms of
/// every pair according to its sign.
#[derive(Debug, Clone)]
pub struct AssouadNet {
    pub pairs: Vec<(usize, usize)>,
    pub corners: Vec<Vec<i8>>,
    pub distributions: Vec<DiscreteDistribution>,
    /// Set when fewer than two support atoms exist and the net is empty.
    pub degenerate: bool,
}

/// Build (a sample of) the Assouad net around `p`. Requires
/// `perturbation ≤ half the smallest paired mass`, which bounds every
/// density ratio by 2. At most `max_corners` corners are materialized
/// (all of them when the hypercube is small enough).
pub fn assouad_net_discrete(
    p: &DiscreteDistribution,
    perturbation: f64,
    pairing_seed: u64,
    max_corners: usize,
) -> Result<AssouadNet> {
    if !(perturbation > 0.0) {
        return Err(Error::param(format!("perturbation must be positive, got {perturbation}")));
    }
    let mut support: Vec<usize> = p.support().collect();
    if support.len() < 2 {
        return Ok(AssouadNet {
            pairs: Vec::new(),
            corners: Vec::new(),
            distributions: Vec::new(),
            degenerate: true,
        });
    }
    let mut rng = Rng::new(pairing_seed);
    rng.shuffle(&mut support);
    let pair_count = support.len() / 2;
    let pairs: Vec<(usize, usize)> =
        (0..pair_count).map(|j| (support[2 * j], support[2 * j + 1])).collect();
    let min_paired_mass = pairs
        .iter()
        .flat_map(|&(a, b)| [p.weight(a), p.weight(b)])
        .fold(f64::INFINITY, f64::min);
    if perturbation > 0.5 * min_paired_mass {
        return Err(Error::param(format!(
            "perturbation {perturbation} exceeds half the minimum paired mass {min_paired_mass}"
        )));
    }

    let corners: Vec<Vec<i8>> = if pair_count < 63 && (1usize << pair_count) <= max_corners {
        (0..(1usize << pair_count))
            .map(|bits| {
                (0..pair_count).map(|j| if bits >> j & 1 == 1 { 1 } else { -1 }).collect()
            })
            .collect()
    } else {
        (0..max_corners)
            .map(|_| (0..pair_count).map(|_| if rng.below(2) == 1 { 1 } else { -1 }).collect())
            .collect()
    };

    let mut distributions = Vec::with_capacity(corners.len());
    for corner in &corners {
        let mut weights = p.weights().to_vec();
        for (&(a, b), &sign) in pairs.iter().zip(corner) {
            let delta = perturbation * sign as f64;
            weights[a] += delta;
            weights[b] -= delta;
        }
        distributions.push(DiscreteDistribution::new(p.domain().clone(), weights)?);
    }
    Ok(AssouadNet { pairs, corners, distributions, degenerate: false })
}

/// Which estimator a regret evaluation drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegretEstimator {
    OneDim,
    Tree,
    Psmm,
}

/// Median measured error over Monte-Carlo trials against the matching
/// target-rate calculator.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RegretReport {
    pub estimator: String,
    pub measured_error_median: f64,
    pub target_rate: f64,
    /// `measured / target`; 0 when both vanish, ∞ when only the target does.
    pub ratio: f64,
    pub trials: usize,
}

/// Options for [`regret_report`].
pub struct RegretOptions<'a> {
    pub n: usize,
    pub eps: f64,
    pub trials: usize,
    pub k_override: Option<usize>,
    pub psmm_buckets: usize,
    pub onedim: OneDimConfig,
    pub tree: TreeConfig,
    /// Tree to estimate on (required for the tree estimator).
    pub hst: Option<&'a Hst>,
}

impl Default for RegretOptions<'_> {
    fn default() -> Self {
        RegretOptions {
            n: 1000,
            eps: 1.0,
            trials: 20,
            k_override: None,
            psmm_buckets: 40,
            onedim: OneDimConfig::default(),
            tree: TreeConfig::default(),
            hst: None,
        }
    }
}

/// Run `trials` seeded estimations of samples from `p` and compare the
/// median Wasserstein error with the target rate for this instance.
pub fn regret_report(
    p: &DiscreteDistribution,
    estimator: RegretEstimator,
    options: &RegretOptions<'_>,
    rng: &mut Rng,
) -> Result<RegretReport> {
    let trials = options.trials.max(1);
    let mut errors = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut trial_rng = rng.split(trial as u64);
        let data = p.sample_dataset(options.n, &mut trial_rng)?;
        let error = match estimator {
            RegretEstimator::OneDim => {
                let mut ledger = PrivacyLedger::new();
                let out = estimate_1d(
                    &data,
                    options.eps,
                    p.grid()?,
                    &options.onedim,
                    &mut trial_rng,
                    options.k_override,
                    &mut ledger,
                )?;
                w1_cdf(p, &out)?
            }
            RegretEstimator::Psmm => {
                let out = psmm_baseline(&data, p.grid()?, options.psmm_buckets)?;
                w1_cdf(p, &out)?
            }
            RegretEstimator::Tree => {
                let tree = require_tree(options)?;
                let (out, _) = estimate_tree(
                    &data,
                    tree,
                    p.domain().clone(),
                    options.eps,
                    &options.tree,
                    &mut trial_rng,
                )?;
                let gp = tree.node_function(p)?;
                let gq = tree.node_function(&out)?;
                crate::wasserstein::w1_tree(tree, &gp, &gq)?
            }
        };
        errors.push(error);
    }
    errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let measured = errors[errors.len() / 2];

    let target = match estimator {
        RegretEstimator::OneDim | RegretEstimator::Psmm => {
            let mut rate_rng = rng.split(u64::MAX);
            target_rate_1d(p, options.n, options.eps, 1.0, 16, &mut rate_rng)?.total()
        }
        RegretEstimator::Tree => {
            let tree = require_tree(options)?;
            target_rate_tree(p, tree, options.n, options.eps, options.tree.kappa_delta)?
                .sum_over_levels
        }
    };
    let ratio = if measured == 0.0 {
        0.0
    } else if target == 0.0 {
        f64::INFINITY
    } else {
        measured / target
    };
    Ok(RegretReport {
        estimator: match estimator {
            RegretEstimator::OneDim => "1d",
            RegretEstimator::Tree => "tree",
            RegretEstimator::Psmm => "psmm",
        }
        .to_string(),
        measured_error_median: measured,
        target_rate: target,
        ratio,
        trials,
    })
}

fn require_tree<'a>(options: &RegretOptions<'a>) -> Result<&'a Hst> {
    options.hst.ok_or_else(|| Error::param("tree estimator needs an HST"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{d_infinity, kl, tv, Domain};
    use crate::grid::GridDomain;

    fn uniform(len: usize) -> DiscreteDistribution {
        let g = GridDomain::new(0.0, (len - 1) as f64, 1.0).unwrap();
        DiscreteDistribution::uniform(Domain::Grid(g))
    }

    fn point_mass(len: usize, at: usize) -> DiscreteDistribution {
        let g = GridDomain::new(0.0, (len - 1) as f64, 1.0).unwrap();
        DiscreteDistribution::point_mass(Domain::Grid(g), at).unwrap()
    }

    #[test]
    fn privacy_neighbor_degenerates_on_point_mass() {
        let p = point_mass(100, 50);
        let out = hard_privacy_neighbor(&p, 10).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.distribution.weight(50), 1.0);
    }

    #[test]
    fn privacy_neighbor_ratio_and_wasserstein_bound() {
        let p = uniform(1000);
        let k = 10;
        let out = hard_privacy_neighbor(&p, k).unwrap();
        assert!(!out.degenerate);
        let q = &out.distribution;

        // Ratio bound is structural: D_∞ ≤ ln 2, max pointwise ratio ≤ 2.
        let dinf = d_infinity(&p, q).unwrap();
        assert!(dinf <= (2.0f64).ln() + 1e-12, "D_inf = {dinf}");

        // The move is engineered so W(P,Q) clears the inter-quantile span.
        let lo = p.quantile(0.1).unwrap();
        let hi = p.quantile(0.9).unwrap();
        let w = w1_cdf(&p, q).unwrap();
        assert!(
            w >= (hi - lo) / (2.0 * k as f64) - 1e-9,
            "W = {w} below span bound {}",
            (hi - lo) / (2.0 * k as f64)
        );
    }

    #[test]
    fn empirical_neighbor_point_mass_degenerates() {
        let p = point_mass(64, 10);
        let out = hard_empirical_neighbor(&p, 1024).unwrap();
        assert!(out.degenerate);
    }

    #[test]
    fn empirical_neighbor_kl_scales_like_log_n_over_n() {
        // KL(P,Q) stays below c·ln(n)/n across n for a frozen c; the
        // construction shifts ~1/√(2^i n) mass per dyadic band.
        let p = uniform(1 << 12);
        let frozen_c = 8.0;
        for exp in [8u32, 10, 12] {
            let n = 1usize << exp;
            let out = hard_empirical_neighbor(&p, n).unwrap();
            assert!(!out.degenerate);
            let q = &out.distribution;
            assert!(d_infinity(&p, q).unwrap() <= (2.0f64).ln() + 1e-12);
            let divergence = kl(&p, q).unwrap();
            let cap = frozen_c * (n as f64).ln() / n as f64;
            assert!(divergence <= cap, "n={n}: KL {divergence} above {cap}");
        }
    }

    #[test]
    fn empirical_neighbor_moves_wasserstein_mass() {
        // The same dyadic shifts that keep KL small must still push W(P,Q)
        // up to the quantile-span sum the construction aims for.
        let p = uniform(1 << 12);
        let n = 1 << 10;
        let out = hard_empirical_neighbor(&p, n).unwrap();
        let q = &out.distribution;
        let w = w1_cdf(&p, q).unwrap();
        let mut span_sum = 0.0;
        let log_n = (n as f64).log2() as i32;
        for j in 2..log_n {
            let a = (0.5f64).powi(j);
            let span = p.quantile(1.0 - a).unwrap() - p.quantile(a).unwrap();
            span_sum += span / ((2.0f64).powi(j) * n as f64).sqrt();
        }
        assert!(w >= 0.25 * span_sum - 1e-9, "W = {w} below quarter of span sum {span_sum}");
    }

    #[test]
    fn scale_partition_examples() {
        let p = point_mass(10, 3);
        let scales = scale_partition(&p);
        assert_eq!(scales.len(), 1);
        assert_eq!(scales[&0], vec![3]);

        // (1/2, 1/4, 1/4): 1/2 sits in (1/4, 1/2] = scale 1; the quarters
        // sit in (1/8, 1/4] = scale 2.
        let g = GridDomain::new(0.0, 2.0, 1.0).unwrap();
        let p = DiscreteDistribution::on_grid(g, vec![0.5, 0.25, 0.25]).unwrap();
        let scales = scale_partition(&p);
        assert_eq!(scales[&1], vec![0]);
        assert_eq!(scales[&2], vec![1, 2]);
    }

    #[test]
    fn scale_partition_covers_support_disjointly() {
        let mut rng = Rng::new(60);
        for _ in 0..50 {
            let raw: Vec<f64> = (0..20).map(|_| rng.uniform()).collect();
            let s: f64 = raw.iter().sum();
            let g = GridDomain::new(0.0, 19.0, 1.0).unwrap();
            let p =
                DiscreteDistribution::on_grid(g, raw.iter().map(|w| w / s).collect()).unwrap();
            let scales = scale_partition(&p);
            let mut seen = std::collections::BTreeSet::new();
            for (_, xs) in &scales {
                for &x in xs {
                    assert!(seen.insert(x), "point {x} in two scales");
                }
            }
            assert_eq!(seen.len(), p.support().count());
        }
    }

    #[test]
    fn assouad_two_atom_net() {
        let g = GridDomain::new(0.0, 1.0, 1.0).unwrap();
        let p = DiscreteDistribution::on_grid(g, vec![0.5, 0.5]).unwrap();
        let kappa = 0.01;
        let net = assouad_net_discrete(&p, kappa, 7, 64).unwrap();
        assert_eq!(net.pairs.len(), 1);
        assert_eq!(net.distributions.len(), 2);
        // Both corners shift one atom up and the other down by κ, so the
        // corner pair sits at TV = 2κ.
        for d in &net.distributions {
            let up = d.weights().iter().cloned().fold(0.0f64, f64::max);
            assert!((up - 0.51).abs() < 1e-12);
            assert!(d_infinity(&p, d).unwrap() <= (2.0f64).ln() + 1e-12);
        }
        let t = tv(&net.distributions[0], &net.distributions[1]).unwrap();
        assert!((t - 2.0 * kappa).abs() < 1e-12);
    }

    #[test]
    fn assouad_tv_tracks_hamming_distance() {
        let p = uniform(8);
        let pert = 0.05;
        let net = assouad_net_discrete(&p, pert, 3, 64).unwrap();
        assert_eq!(net.pairs.len(), 4);
        assert_eq!(net.distributions.len(), 16);
        for (ci, corner_i) in net.corners.iter().enumerate() {
            for (cj, corner_j) in net.corners.iter().enumerate() {
                let hamming =
                    corner_i.iter().zip(corner_j).filter(|(a, b)| a != b).count() as f64;
                let t = tv(&net.distributions[ci], &net.distributions[cj]).unwrap();
                assert!(
                    (t - 2.0 * pert * hamming).abs() < 1e-12,
                    "corners {ci},{cj}: tv {t}, hamming {hamming}"
                );
            }
        }
        // Opposite corners differ on every pair.
        let all_plus = net.corners.iter().position(|c| c.iter().all(|&s| s == 1)).unwrap();
        let all_minus = net.corners.iter().position(|c| c.iter().all(|&s| s == -1)).unwrap();
        let t = tv(&net.distributions[all_plus], &net.distributions[all_minus]).unwrap();
        assert!((t - 2.0 * pert * 4.0).abs() < 1e-12);
    }

    #[test]
    fn assouad_degenerate_and_invalid_inputs() {
        let p = point_mass(10, 4);
        let net = assouad_net_discrete(&p, 0.01, 1, 8).unwrap();
        assert!(net.degenerate);
        assert!(net.distributions.is_empty());

        let g = GridDomain::new(0.0, 1.0, 1.0).unwrap();
        let p = DiscreteDistribution::on_grid(g, vec![0.9, 0.1]).unwrap();
        // Half the minimum paired mass is 0.05.
        assert!(assouad_net_discrete(&p, 0.06, 1, 8).is_err());
    }

    #[test]
    fn regret_point_mass_noiseless_is_zero() {
        let p = point_mass(100, 30);
        let mut rng = Rng::new(1);
        let options = RegretOptions {
            n: 200,
            eps: f64::INFINITY,
            trials: 5,
            ..RegretOptions::default()
        };
        let report = regret_report(&p, RegretEstimator::OneDim, &options, &mut rng).unwrap();
        assert_eq!(report.measured_error_median, 0.0);
        assert_eq!(report.ratio, 0.0);
    }

    #[test]
    fn regret_ratio_finite_on_uniform_sweep() {
        let p = uniform(256);
        for (i, n) in [200usize, 2000].into_iter().enumerate() {
            let mut rng = Rng::new(100 + i as u64);
            let options = RegretOptions { n, eps: 1.0, trials: 9, ..RegretOptions::default() };
            let report =
                regret_report(&p, RegretEstimator::OneDim, &options, &mut rng).unwrap();
            assert!(report.ratio.is_finite());
            assert!(report.target_rate > 0.0);
        }
    }

    #[test]
    fn regret_psmm_trails_quantile_estimator_on_concentrated_input() {
        // Two nearby heavy atoms on a wide grid: fixed buckets pay the
        // bucket width, quantiles do not.
        let g = GridDomain::new(0.0, 999.0, 1.0).unwrap();
        let mut w = vec![0.0; 1000];
        w[430] = 1.0 / 3.0;
        w[440] = 2.0 / 3.0;
        let p = DiscreteDistribution::on_grid(g, w).unwrap();
        let options = RegretOptions {
            n: 1600,
            eps: f64::INFINITY,
            trials: 5,
            k_override: Some(10),
            ..RegretOptions::default()
        };
        let mut rng = Rng::new(5);
        let quantile = regret_report(&p, RegretEstimator::OneDim, &options, &mut rng).unwrap();
        let mut rng = Rng::new(5);
        let psmm = regret_report(&p, RegretEstimator::Psmm, &options, &mut rng).unwrap();
        assert!(quantile.measured_error_median < psmm.measured_error_median);
    }
}
