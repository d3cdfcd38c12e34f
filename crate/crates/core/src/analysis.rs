//! Distances between a finite-time walk distribution and its limit law.

use alloc::vec::Vec;

use crate::limit::{LimitLaw, LimitModel};
use crate::walk::{self, CoinKind, InitialSpin, PositionDistribution};
use crate::{Error, Result};

/// Rescaled distance kept between the gap edge and the gap-mass window.
pub const GAP_MARGIN: f64 = 0.01;
/// Highest moment order reported by [`compare`] and [`moment_report`].
pub const MAX_REPORT_MOMENT: u32 = 4;
/// Normalization slack accepted for empirical distributions.
const NORM_TOLERANCE: f64 = 1e-9;

/// Step CDF of `X / scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    scale: f64,
    /// `(y, P(X / scale ≤ y))` at every lattice point, `y` increasing.
    points: Vec<(f64, f64)>,
}

impl EmpiricalCdf {
    pub fn new(dist: &PositionDistribution, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidArgument("scale must be positive"));
        }
        let mut acc = 0.0;
        let points = dist
            .entries()
            .iter()
            .map(|&(x, p)| {
                acc += p;
                (x as f64 / scale, acc)
            })
            .collect();
        Ok(EmpiricalCdf { scale, points })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Right-continuous value at `y`.
    pub fn eval(&self, y: f64) -> f64 {
        let idx = self.points.partition_point(|&(p, _)| p <= y);
        if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].1
        }
    }
}

fn check_normalized(dist: &PositionDistribution) -> Result<()> {
    if (dist.total() - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::InvalidArgument("distribution is not normalized"));
    }
    Ok(())
}

/// Sup-distance between the step CDF of `X / scale` and a continuous CDF.
///
/// The supremum is taken over both one-sided limits at every lattice point
/// and over `extra_points` (e.g. support endpoints).
pub fn ks_distance_with<F: Fn(f64) -> f64>(
    dist: &PositionDistribution,
    scale: f64,
    cdf: F,
    extra_points: &[f64],
) -> Result<f64> {
    check_normalized(dist)?;
    let empirical = EmpiricalCdf::new(dist, scale)?;
    let mut worst: f64 = 0.0;
    let mut before = 0.0;
    for &(y, after) in empirical.points() {
        let g = cdf(y);
        worst = worst.max((before - g).abs()).max((after - g).abs());
        before = after;
    }
    for &e in extra_points {
        worst = worst.max((empirical.eval(e) - cdf(e)).abs());
    }
    Ok(worst.min(1.0))
}

/// KS distance between `X / scale` and the limit law.
pub fn ks_distance(dist: &PositionDistribution, scale: f64, law: &LimitLaw) -> Result<f64> {
    let endpoints = law.model().support_intervals().endpoints();
    ks_distance_with(dist, scale, |y| law.cdf(y), &endpoints)
}

/// Probability that `|X / scale|` lies at least [`GAP_MARGIN`] inside the
/// zero-mass gap of the limit law.
pub fn gap_mass(dist: &PositionDistribution, scale: f64, model: &LimitModel) -> Result<f64> {
    let Some(gap) = model.support_intervals().gap() else {
        return Err(Error::NoGap);
    };
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument("scale must be positive"));
    }
    let window = gap - GAP_MARGIN;
    Ok(dist
        .entries()
        .iter()
        .filter(|&&(x, _)| (x as f64 / scale).abs() <= window)
        .map(|&(_, p)| p)
        .sum())
}

/// KS distance between `X` and `-X`.
pub fn mirror_asymmetry(dist: &PositionDistribution) -> f64 {
    let entries = dist.entries();
    let reach = entries.iter().map(|&(x, _)| x.unsigned_abs()).max().unwrap_or(0) as i64;
    let len = (2 * reach + 1) as usize;
    let mut mass = alloc::vec![0.0; len];
    for &(x, p) in entries {
        mass[(x + reach) as usize] += p;
    }
    // prefix[i] = P(X ≤ i - reach), suffix[i] = P(X ≥ i - reach). Both are
    // accumulated from the outside in, so a symmetric input gives exactly 0.
    let mut prefix = alloc::vec![0.0; len];
    let mut suffix = alloc::vec![0.0; len];
    let mut acc = 0.0;
    for i in 0..len {
        acc += mass[i];
        prefix[i] = acc;
    }
    acc = 0.0;
    for i in (0..len).rev() {
        acc += mass[i];
        suffix[i] = acc;
    }
    // P(-X ≤ y) = P(X ≥ -y)
    (0..len)
        .map(|i| (prefix[i] - suffix[len - 1 - i]).abs())
        .fold(0.0, f64::max)
}

/// `|E[(X_T/T)^r] - limit moment|` for one `(T, r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentError {
    pub t: usize,
    pub r: u32,
    pub empirical: f64,
    pub limit: f64,
    pub error: f64,
}

fn limit_moments(model: &LimitModel, r_max: u32) -> Result<Vec<f64>> {
    (0..=r_max).map(|r| model.kspace_moment(r)).collect()
}

fn moment_errors_for(
    dist: &PositionDistribution,
    scale: f64,
    limits: &[f64],
) -> Result<Vec<MomentError>> {
    limits
        .iter()
        .enumerate()
        .map(|(r, &limit)| {
            let empirical = walk::empirical_moment(dist, r as u32, scale)?;
            Ok(MomentError {
                t: dist.time(),
                r: r as u32,
                empirical,
                limit,
                error: (empirical - limit).abs(),
            })
        })
        .collect()
}

/// Moment errors of `X_T / T` against the k-space moments, for every `T` in
/// `times` and `r ≤ r_max`.
pub fn moment_report(model: &LimitModel, times: &[usize], r_max: u32) -> Result<Vec<MomentError>> {
    if r_max > MAX_REPORT_MOMENT {
        return Err(Error::InvalidArgument("moment report goes up to r = 4"));
    }
    let limits = limit_moments(model, r_max)?;
    let protocol = model.protocol()?;
    let mut out = Vec::with_capacity(times.len() * (r_max as usize + 1));
    for &t in times {
        if t == 0 {
            return Err(Error::InvalidArgument("moment report needs T > 0"));
        }
        let dist = walk::distribution(&walk::evolve(model.spin(), &protocol, t));
        out.extend(moment_errors_for(&dist, t as f64, &limits)?);
    }
    Ok(out)
}

/// Finite-time versus limit comparison at one time `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub t: usize,
    pub coin: CoinKind,
    pub spin: InitialSpin,
    pub ks_distance: f64,
    /// `(r, |empirical - limit|)` for `r = 0..=r_max`.
    pub moment_errors: Vec<(u32, f64)>,
    /// `None` when the limit law has no gap.
    pub gap_mass: Option<f64>,
    pub mirror_asymmetry: f64,
}

/// Compares a given distribution of `X_T` with the limit law, rescaling by
/// `T = dist.time()`.
pub fn compare_distribution(
    law: &LimitLaw,
    dist: &PositionDistribution,
    limit_moments: &[f64],
) -> Result<ComparisonReport> {
    let t = dist.time();
    if t == 0 {
        return Err(Error::InvalidArgument("comparison needs T > 0"));
    }
    let scale = t as f64;
    let model = law.model();
    let gap = match gap_mass(dist, scale, model) {
        Ok(m) => Some(m),
        Err(Error::NoGap) => None,
        Err(e) => return Err(e),
    };
    Ok(ComparisonReport {
        t,
        coin: model.coin().kind(),
        spin: *model.spin(),
        ks_distance: ks_distance(dist, scale, law)?,
        moment_errors: moment_errors_for(dist, scale, limit_moments)?
            .into_iter()
            .map(|m| (m.r, m.error))
            .collect(),
        gap_mass: gap,
        mirror_asymmetry: mirror_asymmetry(dist),
    })
}

/// Runs the walk of `law`'s model to time `t` and compares with the limit.
pub fn compare(law: &LimitLaw, t: usize, r_max: u32) -> Result<ComparisonReport> {
    if r_max > MAX_REPORT_MOMENT {
        return Err(Error::InvalidArgument("comparison reports moments up to r = 4"));
    }
    let model = law.model();
    let limits = limit_moments(model, r_max)?;
    let dist = walk::distribution(&walk::evolve(model.spin(), &model.protocol()?, t));
    compare_distribution(law, &dist, &limits)
}

/// Comparisons at the off-phase times `3t + 1` and `3t + 2`, both against
/// the unmodified limit law of `X_{3t} / 3t`.
pub fn offphase_compare(
    law: &LimitLaw,
    t: usize,
) -> Result<(ComparisonReport, ComparisonReport)> {
    if t == 0 {
        return Err(Error::InvalidArgument("off-phase comparison needs t ≥ 1"));
    }
    Ok((compare(law, 3 * t + 1, MAX_REPORT_MOMENT)?, compare(law, 3 * t + 2, MAX_REPORT_MOMENT)?))
}
