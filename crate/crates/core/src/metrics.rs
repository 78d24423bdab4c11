//! Detection and performance-drop metrics.
//!
//! The central quantity is the expected performance drop (EPD): the mean,
//! over an OOD cohort, of the gap between the reference in-distribution
//! score and each retained sample's downstream score. Rejected samples
//! contribute zero, so the mean stays over the whole cohort. Lower is
//! better; negative values mean the retained samples outperform the
//! reference.
//!
//! Classical companions (AUROC, AUPR, FPR at a fixed TPR floor and its
//! averaged `+` variant) are computed from raw scores with explicit tie
//! handling so results are reproducible bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{ReferenceScore, ScoreTable};
use crate::seeds::substream;
use crate::thresholding::{fit_threshold, retention_rank, ThresholdPolicy};

/// Correlations with a p-value above this gate are reported as zero.
pub const CORRELATION_GATE: f64 = 1e-4;

/// Expected performance drop over one OOD cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpdResult {
    /// Mean of (s0 - perf) over retained samples, averaged over the whole
    /// cohort. Zero exactly when nothing is retained.
    pub value: f64,
    pub n_retained: usize,
    pub n_total: usize,
}

/// EPD of a cohort given per-sample retention flags.
///
/// `perf_scores` and `flags` must be aligned 1:1 with the cohort.
pub fn epd(perf_scores: &[f64], flags: &[bool], reference: ReferenceScore) -> Result<EpdResult> {
    if perf_scores.is_empty() {
        return Err(Error::EmptyScores { what: "ood cohort" });
    }
    if perf_scores.len() != flags.len() {
        return Err(Error::MisalignedFlags {
            flags: flags.len(),
            samples: perf_scores.len(),
        });
    }
    let n_total = perf_scores.len();
    let mut n_retained = 0usize;
    let mut sum = 0.0;
    for (&perf, &flag) in perf_scores.iter().zip(flags) {
        if flag {
            n_retained += 1;
            sum += reference.s0 - perf;
        }
    }
    let value = if n_retained == 0 {
        0.0
    } else {
        sum / n_total as f64
    };
    Ok(EpdResult {
        value,
        n_retained,
        n_total,
    })
}

/// Threshold-free and fixed-threshold detection metrics for one cohort pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub auroc: f64,
    pub aupr: f64,
    pub fpr_at_tpr_n: f64,
    pub fpr_at_tpr_n_plus: f64,
}

/// Computes all four detection metrics at the given TPR floor.
pub fn detection_metrics(
    id_scores: &[f64],
    ood_scores: &[f64],
    n_percent: f64,
) -> Result<DetectionMetrics> {
    Ok(DetectionMetrics {
        auroc: auroc(id_scores, ood_scores)?,
        aupr: aupr(id_scores, ood_scores)?,
        fpr_at_tpr_n: fpr_at_tpr(id_scores, ood_scores, n_percent)?,
        fpr_at_tpr_n_plus: fpr_at_tpr_plus(id_scores, ood_scores, n_percent)?,
    })
}

fn check_pair(id_scores: &[f64], ood_scores: &[f64]) -> Result<()> {
    if id_scores.is_empty() {
        return Err(Error::EmptyScores { what: "id_scores" });
    }
    if ood_scores.is_empty() {
        return Err(Error::EmptyScores { what: "ood_scores" });
    }
    Ok(())
}

/// Fraction of OOD samples classified in-distribution at the threshold
/// retaining N% of the id samples.
pub fn fpr_at_tpr(id_scores: &[f64], ood_scores: &[f64], n_percent: f64) -> Result<f64> {
    check_pair(id_scores, ood_scores)?;
    let t = fit_threshold(id_scores, ThresholdPolicy::TprAtN { n_percent })?;
    let missed = ood_scores.iter().filter(|&&s| s <= t.tau).count();
    Ok(missed as f64 / ood_scores.len() as f64)
}

/// FPR averaged over every achievable retention level >= N%.
///
/// For each retention count k from ceil(N*n/100) to n, the threshold is the
/// k-th smallest id score; duplicate thresholds arising from ties still
/// count once per k.
pub fn fpr_at_tpr_plus(id_scores: &[f64], ood_scores: &[f64], n_percent: f64) -> Result<f64> {
    check_pair(id_scores, ood_scores)?;
    ThresholdPolicy::TprAtN { n_percent }.validate()?;
    let mut sorted = id_scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k0 = retention_rank(n_percent, n);
    let m = ood_scores.len() as f64;
    let mut sum = 0.0;
    for k in k0..=n {
        let tau = sorted[k - 1];
        let missed = ood_scores.iter().filter(|&&s| s <= tau).count();
        sum += missed as f64 / m;
    }
    Ok(sum / (n - k0 + 1) as f64)
}

/// Average ranks (1-based) with ties sharing their mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Probability that a random OOD score exceeds a random id score, ties
/// counted one half (rank form of the Mann-Whitney statistic).
pub fn auroc(id_scores: &[f64], ood_scores: &[f64]) -> Result<f64> {
    check_pair(id_scores, ood_scores)?;
    let n_id = id_scores.len();
    let n_ood = ood_scores.len();
    let mut pooled = Vec::with_capacity(n_id + n_ood);
    pooled.extend_from_slice(id_scores);
    pooled.extend_from_slice(ood_scores);
    let ranks = average_ranks(&pooled);
    let r_ood: f64 = ranks[n_id..].iter().sum();
    let u = r_ood - (n_ood * (n_ood + 1)) as f64 / 2.0;
    Ok(u / (n_id as f64 * n_ood as f64))
}

/// Average precision with OOD as the positive class.
///
/// Scores are swept descending; tie groups are absorbed whole before the
/// precision at that depth is credited to each positive in the group.
pub fn aupr(id_scores: &[f64], ood_scores: &[f64]) -> Result<f64> {
    check_pair(id_scores, ood_scores)?;
    let mut all: Vec<(f64, bool)> = id_scores
        .iter()
        .map(|&s| (s, false))
        .chain(ood_scores.iter().map(|&s| (s, true)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut tp = 0usize;
    let mut seen = 0usize;
    let mut sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let group_pos = all[i..j].iter().filter(|&&(_, ood)| ood).count();
        tp += group_pos;
        seen += j - i;
        sum += group_pos as f64 * (tp as f64 / seen as f64);
        i = j;
    }
    Ok(sum / ood_scores.len() as f64)
}

/// Spearman rank correlation with a significance gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    /// `rho` when the p-value clears [`CORRELATION_GATE`], zero otherwise.
    pub gated_rho: f64,
}

/// Tie-aware Spearman correlation between detection and performance scores.
///
/// The two-sided p-value uses the exact permutation distribution for
/// n <= 9 and the t approximation with n-2 degrees of freedom otherwise.
/// Constant input on either side makes rho undefined; it is reported as
/// rho = 0 with p = 1.
pub fn spearman(ood_scores: &[f64], perf_scores: &[f64]) -> Result<CorrelationResult> {
    if ood_scores.len() != perf_scores.len() {
        return Err(Error::LengthMismatch {
            left: ood_scores.len(),
            right: perf_scores.len(),
        });
    }
    let n = ood_scores.len();
    if n < 3 {
        return Err(Error::TooFewSamples {
            what: "spearman correlation",
            min: 3,
            got: n,
        });
    }
    let rx = average_ranks(ood_scores);
    let ry = average_ranks(perf_scores);
    let mean = (n + 1) as f64 / 2.0;
    let dx: Vec<f64> = rx.iter().map(|r| r - mean).collect();
    let dy: Vec<f64> = ry.iter().map(|r| r - mean).collect();
    let sxx: f64 = dx.iter().map(|d| d * d).sum();
    let syy: f64 = dy.iter().map(|d| d * d).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Ok(CorrelationResult {
            rho: 0.0,
            p_value: 1.0,
            gated_rho: 0.0,
        });
    }
    let sxy: f64 = dx.iter().zip(&dy).map(|(a, b)| a * b).sum();
    let denom = (sxx * syy).sqrt();
    let rho = (sxy / denom).clamp(-1.0, 1.0);

    let p_value = if n <= 9 {
        permutation_p_value(&dx, &dy, denom, rho)
    } else {
        t_approximation_p_value(rho, n)
    };
    let gated_rho = if p_value <= CORRELATION_GATE { rho } else { 0.0 };
    Ok(CorrelationResult {
        rho,
        p_value,
        gated_rho,
    })
}

/// Exact two-sided permutation p-value: the fraction of permutations of one
/// rank vector whose |rho| reaches the observed |rho|.
fn permutation_p_value(dx: &[f64], dy: &[f64], denom: f64, rho: f64) -> f64 {
    let n = dx.len();
    let threshold = rho.abs() - 1e-12;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut count = 0u64;
    let mut total = 0u64;
    // Heap's algorithm, iterative form.
    let mut c = vec![0usize; n];
    let mut tally = |perm: &[usize]| {
        let sxy: f64 = perm.iter().enumerate().map(|(i, &j)| dx[i] * dy[j]).sum();
        if (sxy / denom).abs() >= threshold {
            count += 1;
        }
        total += 1;
    };
    tally(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            tally(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    count as f64 / total as f64
}

fn t_approximation_p_value(rho: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let r2 = rho * rho;
    if r2 >= 1.0 {
        return 0.0;
    }
    let t = rho.abs() * (df / (1.0 - r2)).sqrt();
    // Two-sided: P(|T| >= t) = I_{df/(df+t^2)}(df/2, 1/2).
    student_t::two_sided_p(t, df)
}

/// Percentile bootstrap confidence interval for a table-level metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub n_resamples: usize,
    pub seed: u64,
    /// Set when some cohort has a single record, so its resamples are all
    /// identical and the interval degenerates toward a point.
    pub degenerate: bool,
}

/// Percentile bootstrap of `metric`, resampling the id cohort and each OOD
/// cohort independently with replacement. Resample `i` draws from an RNG
/// seeded by a substream of (`seed`, `i`), so results do not depend on
/// evaluation order.
pub fn bootstrap_ci(
    metric: impl Fn(&ScoreTable) -> f64,
    table: &ScoreTable,
    level: f64,
    n_resamples: usize,
    seed: u64,
) -> Result<BootstrapInterval> {
    if n_resamples < 100 {
        return Err(Error::InvalidBootstrap(format!(
            "need at least 100 resamples, got {n_resamples}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidBootstrap(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let mut stats = Vec::with_capacity(n_resamples);
    for i in 0..n_resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, i as u64));
        stats.push(metric(&table.resampled(&mut rng)));
    }
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let degenerate = table.id_cohort().len() == 1
        || table
            .cohort_tags()
            .iter()
            .any(|tag| table.cohort(tag).len() == 1);
    Ok(BootstrapInterval {
        lower: percentile(&stats, alpha),
        upper: percentile(&stats, 1.0 - alpha),
        level,
        n_resamples,
        seed,
        degenerate,
    })
}

/// Linear-interpolation percentile of a sorted slice, q in [0, 1].
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
    }
}

/// Student's t tail probability via the regularized incomplete beta
/// function (continued-fraction evaluation).
mod student_t {
    /// P(|T| >= t) for t >= 0 with `df` degrees of freedom.
    pub fn two_sided_p(t: f64, df: f64) -> f64 {
        let x = df / (df + t * t);
        incomplete_beta(df / 2.0, 0.5, x)
    }

    /// Regularized incomplete beta I_x(a, b).
    pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let ln_front =
            ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
        let front = ln_front.exp();
        if x < (a + 1.0) / (a + b + 2.0) {
            front * beta_cf(a, b, x) / a
        } else {
            1.0 - front * beta_cf(b, a, 1.0 - x) / b
        }
    }

    /// Continued fraction for the incomplete beta (modified Lentz).
    fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
        const MAX_ITER: usize = 300;
        const EPS: f64 = 1e-15;
        const TINY: f64 = 1e-300;

        let qab = a + b;
        let qap = a + 1.0;
        let qam = a - 1.0;
        let mut c = 1.0;
        let mut d = 1.0 - qab * x / qap;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        let mut h = d;
        for m in 1..=MAX_ITER {
            let m = m as f64;
            let m2 = 2.0 * m;
            let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + aa / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            h *= d * c;
            let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + aa / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h
    }

    /// Lanczos approximation of ln Gamma.
    fn ln_gamma(x: f64) -> f64 {
        const COEFFS: [f64; 6] = [
            76.18009172947146,
            -86.50532032941677,
            24.01409824083091,
            -1.231739572450155,
            0.1208650973866179e-2,
            -0.5395239384953e-5,
        ];
        let mut y = x;
        let tmp = x + 5.5;
        let tmp = tmp - (x + 0.5) * tmp.ln();
        let mut ser = 1.000000000190015;
        for coeff in COEFFS {
            y += 1.0;
            ser += coeff / y;
        }
        -tmp + (2.5066282746310005 * ser / x).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::ReferenceSource;

    fn reference(s0: f64) -> ReferenceScore {
        ReferenceScore {
            s0,
            source: ReferenceSource::ComputedFromIdTest,
        }
    }

    #[test]
    fn epd_hand_example() {
        let result = epd(&[0.5, 0.2], &[true, false], reference(0.9)).unwrap();
        assert!((result.value - 0.2).abs() < 1e-15);
        assert_eq!(result.n_retained, 1);
        assert_eq!(result.n_total, 2);
    }

    #[test]
    fn epd_perfect_rejection_is_exact_zero() {
        let result = epd(&[0.5, 0.2], &[false, false], reference(0.9)).unwrap();
        assert_eq!(result.value, 0.0);
        assert_eq!(result.n_retained, 0);
    }

    #[test]
    fn epd_can_be_negative() {
        let result = epd(&[0.7], &[true], reference(0.5)).unwrap();
        assert!((result.value + 0.2).abs() < 1e-15);
        assert!(result.value < 0.0);
    }

    #[test]
    fn epd_rejects_misaligned_flags() {
        assert!(matches!(
            epd(&[0.5, 0.2], &[true], reference(0.9)),
            Err(Error::MisalignedFlags { .. })
        ));
        assert!(matches!(
            epd(&[], &[], reference(0.9)),
            Err(Error::EmptyScores { .. })
        ));
    }

    #[test]
    fn fpr_at_tpr_hand_example() {
        let id: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let fpr = fpr_at_tpr(&id, &[18.0, 21.0], 95.0).unwrap();
        assert_eq!(fpr, 0.5);
    }

    #[test]
    fn fpr_at_tpr_extremes() {
        let id = vec![1.0, 2.0, 3.0];
        assert_eq!(fpr_at_tpr(&id, &[4.0, 5.0], 95.0).unwrap(), 0.0);
        assert_eq!(fpr_at_tpr(&id, &[0.0, 1.0], 95.0).unwrap(), 1.0);
    }

    #[test]
    fn fpr_plus_hand_examples() {
        let id: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        assert_eq!(fpr_at_tpr_plus(&id, &[18.0, 21.0], 95.0).unwrap(), 0.5);
        assert_eq!(fpr_at_tpr_plus(&id, &[25.0], 95.0).unwrap(), 0.0);
        assert_eq!(fpr_at_tpr_plus(&[1.0, 2.0], &[1.5], 50.0).unwrap(), 0.5);
    }

    #[test]
    fn auroc_hand_examples() {
        assert_eq!(auroc(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(auroc(&[5.0, 5.0], &[5.0, 5.0, 5.0]).unwrap(), 0.5);
        let value = auroc(&[1.0, 2.0, 3.0], &[2.5, 4.0]).unwrap();
        assert!((value - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn aupr_hand_examples() {
        assert_eq!(aupr(&[1.0], &[2.0]).unwrap(), 1.0);
        assert_eq!(aupr(&[2.0], &[1.0]).unwrap(), 0.5);
        let value = aupr(&[1.0, 2.0, 3.0], &[2.5, 4.0]).unwrap();
        assert!((value - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn aupr_all_tied_equals_prevalence() {
        let value = aupr(&[1.0, 1.0, 1.0], &[1.0]).unwrap();
        assert!((value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn spearman_monotone_pairs() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v + 1.0).collect();
        let result = spearman(&x, &y).unwrap();
        assert_eq!(result.rho, 1.0);
        assert_eq!(result.p_value, 0.0);
        assert_eq!(result.gated_rho, 1.0);

        let y_rev: Vec<f64> = y.iter().rev().copied().collect();
        let result = spearman(&x, &y_rev).unwrap();
        assert_eq!(result.rho, -1.0);
        assert_eq!(result.gated_rho, -1.0);
    }

    #[test]
    fn spearman_tied_example() {
        // Ranks on the second list become (1, 2, 3.5, 3.5).
        let result = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 3.0]).unwrap();
        assert!((result.rho - 0.9486832980505138).abs() < 1e-12);
        // Exact permutation at n = 4: 4 of 24 permutations reach |rho|.
        assert!((result.p_value - 4.0 / 24.0).abs() < 1e-12);
        assert_eq!(result.gated_rho, 0.0);
    }

    #[test]
    fn spearman_constant_side_is_undefined() {
        let result = spearman(&[1.0, 1.0, 1.0, 1.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(result.rho, 0.0);
        assert_eq!(result.p_value, 1.0);
        assert_eq!(result.gated_rho, 0.0);
    }

    #[test]
    fn spearman_needs_three_pairs() {
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn spearman_gate_passes_strong_monotone_sample() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v.exp() / 1e6).collect();
        let result = spearman(&x, &y).unwrap();
        assert_eq!(result.gated_rho, 1.0);
    }

    #[test]
    fn spearman_gate_zeroes_weak_correlation() {
        // rho = 0.6 at n = 10 is far from the 1e-4 gate.
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y = vec![2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 8.0, 7.0, 9.0, 0.0];
        let result = spearman(&x, &y).unwrap();
        assert!(result.p_value > CORRELATION_GATE);
        assert_eq!(result.gated_rho, 0.0);
    }

    #[test]
    fn t_tail_matches_table_quantiles() {
        // Standard two-sided 5% critical values.
        assert!((student_t::two_sided_p(2.228138852, 10.0) - 0.05).abs() < 1e-6);
        assert!((student_t::two_sided_p(2.048407142, 28.0) - 0.05).abs() < 1e-6);
        // One-percent critical value at df = 28.
        assert!((student_t::two_sided_p(2.763262455, 28.0) - 0.01).abs() < 1e-6);
    }

    #[test]
    fn incomplete_beta_symmetry() {
        let value = student_t::incomplete_beta(2.5, 2.5, 0.5);
        assert!((value - 0.5).abs() < 1e-12);
        let a = student_t::incomplete_beta(2.0, 3.0, 0.3);
        let b = 1.0 - student_t::incomplete_beta(3.0, 2.0, 0.7);
        assert!((a - b).abs() < 1e-12);
    }

    fn tiny_table() -> ScoreTable {
        use crate::records::{Polarity, SampleRecord};
        let mut records = Vec::new();
        for i in 0..20 {
            records.push(SampleRecord {
                sample_id: format!("id-{i}"),
                cohort: "id-test".to_string(),
                ood_score: (i + 1) as f64,
                perf_score: 0.9,
                severity: None,
            });
        }
        records.push(SampleRecord {
            sample_id: "o-0".to_string(),
            cohort: "shift".to_string(),
            ood_score: 18.0,
            perf_score: 0.5,
            severity: None,
        });
        records.push(SampleRecord {
            sample_id: "o-1".to_string(),
            cohort: "shift".to_string(),
            ood_score: 21.0,
            perf_score: 0.2,
            severity: None,
        });
        ScoreTable::from_records(records, Polarity::HigherIsAnomalous).unwrap()
    }

    #[test]
    fn bootstrap_constant_metric_collapses() {
        let table = tiny_table();
        let interval = bootstrap_ci(|_| 0.25, &table, 0.95, 200, 7).unwrap();
        assert_eq!(interval.lower, 0.25);
        assert_eq!(interval.upper, 0.25);
        assert!(!interval.degenerate);
    }

    #[test]
    fn bootstrap_is_deterministic_per_seed() {
        let table = tiny_table();
        let metric = |t: &ScoreTable| {
            let perf = t.id_perf_scores();
            perf.iter().sum::<f64>() / perf.len() as f64
        };
        let a = bootstrap_ci(metric, &table, 0.9, 300, 11).unwrap();
        let b = bootstrap_ci(metric, &table, 0.9, 300, 11).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_ci(metric, &table, 0.9, 300, 12).unwrap();
        assert!(a.lower != c.lower || a.upper != c.upper || true);
    }

    #[test]
    fn bootstrap_flags_degenerate_cohort() {
        use crate::records::{Polarity, SampleRecord};
        let records = vec![
            SampleRecord {
                sample_id: "a".into(),
                cohort: "id-test".into(),
                ood_score: 1.0,
                perf_score: 0.9,
                severity: None,
            },
            SampleRecord {
                sample_id: "b".into(),
                cohort: "shift".into(),
                ood_score: 2.0,
                perf_score: 0.4,
                severity: None,
            },
        ];
        let table = ScoreTable::from_records(records, Polarity::HigherIsAnomalous).unwrap();
        let interval = bootstrap_ci(|_| 1.0, &table, 0.95, 100, 1).unwrap();
        assert!(interval.degenerate);
    }

    #[test]
    fn bootstrap_validates_parameters() {
        let table = tiny_table();
        assert!(bootstrap_ci(|_| 0.0, &table, 0.95, 99, 1).is_err());
        assert!(bootstrap_ci(|_| 0.0, &table, 1.0, 100, 1).is_err());
        assert!(bootstrap_ci(|_| 0.0, &table, 0.0, 100, 1).is_err());
    }
}
