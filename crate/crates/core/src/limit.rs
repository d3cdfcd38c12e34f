//! Long-time limit law of `X_{3t} / 3t`.
//!
//! Two independent routes are provided:
//!
//! - the closed-form density `{1 - χ(x)} f(x)` on the positive support
//!   interval plus its mirrored counterpart, evaluated pointwise in `x`;
//! - the quasi-momentum picture, where the three-step evolution
//!   `Ŝ(k) Ĉ(k)²` (with `Ĉ(k) = Ŝ(k) C`, `Ŝ(k) = diag(e^{ik}, e^{-ik})`) is
//!   diagonalized and the eigenvector weights are pushed forward through the
//!   group velocities `h_j(k) = iλ'_j(k) / 3λ_j(k)`.
//!
//! The limit CDF and the k-space moments use the second route, which has a
//! bounded integrand; the density has inverse-square-root singularities at
//! all four support endpoints.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};


#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::quad::{self, pairwise_sum, DEFAULT_K_POINTS};
use crate::walk::{CoinKind, CoinOperator, InitialSpin, StepProtocol};
use crate::{Complex, Error, Result};

/// Distance from a support endpoint below which the density is not evaluated.
pub const ENDPOINT_TOLERANCE: f64 = 1e-12;
/// Distance from `k ∈ {0, ±π}` below which the eigenvalues are treated as equal.
pub const K_TOLERANCE: f64 = 1e-9;
/// Negative radicands above this value are clamped to zero.
const RADICAND_CLAMP: f64 = -1e-9;

/// The two open intervals carrying the limit law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportIntervals {
    /// `((1 - 4|a|²)/3, sqrt(1 + 8|a|²)/3)`
    pub positive: (f64, f64),
    /// `-reverse(positive)`
    pub negative: (f64, f64),
}

impl SupportIntervals {
    /// Outer endpoint `sqrt(1 + 8|a|²)/3`.
    pub fn hull(&self) -> f64 {
        self.positive.1
    }

    /// Half-width of the zero-mass gap around the origin, if there is one.
    pub fn gap(&self) -> Option<f64> {
        (self.positive.0 > 0.0).then_some(self.positive.0)
    }

    pub fn endpoints(&self) -> [f64; 4] {
        [self.negative.0, self.negative.1, self.positive.0, self.positive.1]
    }

    pub fn contains(&self, x: f64) -> bool {
        let inside = |(lo, hi): (f64, f64)| lo < x && x < hi;
        inside(self.positive) || inside(self.negative)
    }
}

/// Eigen decomposition of the three-step Fourier-space evolution at one `k`.
///
/// Index 0 holds branch `j = 1`, index 1 holds `j = 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenSystem {
    pub k: f64,
    pub lambda: [Complex; 2],
    pub vectors: [[Complex; 2]; 2],
    pub norms: [f64; 2],
    pub velocities: [f64; 2],
}

/// `(-1)^j` for `j ∈ {1, 2}`.
fn branch_sign(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Trigonometric pieces shared by the eigen formulas.
#[derive(Clone, Copy, Debug)]
struct Pieces {
    /// `c² cos 3k + s² cos k`
    re_lambda: f64,
    /// `sqrt(1 - re_lambda²)`
    root: f64,
    /// `c² sin 3k + s² sin k`
    im_part: f64,
    /// `4 c² s² sin² k`, equal to `root² - im_part²`.
    cross_sq: f64,
    sin_k: f64,
}

/// Dispersion of the `[C(θ), C(θ), I]` walk; depends only on `cos θ`, `sin θ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dispersion {
    c: f64,
    s: f64,
}

impl Dispersion {
    pub fn new(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Dispersion { c, s }
    }

    /// Dispersion of a rotation coin; other kinds are rejected.
    pub fn of_coin(coin: &CoinOperator) -> Result<Self> {
        match coin.kind() {
            CoinKind::Rotation { theta } => Ok(Dispersion::new(theta)),
            _ => Err(Error::UnsupportedCoin),
        }
    }

    pub fn cos_theta(&self) -> f64 {
        self.c
    }

    pub fn sin_theta(&self) -> f64 {
        self.s
    }

    /// Largest group speed `sqrt(1 + 8c²)/3`.
    pub fn max_speed(&self) -> f64 {
        (1.0 + 8.0 * self.c * self.c).sqrt() / 3.0
    }

    fn pieces(&self, k: f64) -> Pieces {
        let (c2, s2) = (self.c * self.c, self.s * self.s);
        let (sin_k, cos_k) = k.sin_cos();
        let (sin_3k, cos_3k) = (3.0 * k).sin_cos();
        let (sin_h3, cos_h3) = (1.5 * k).sin_cos();
        let (sin_h, cos_h) = (0.5 * k).sin_cos();
        // 1 ∓ re_lambda written as sums of squares so that the radicand
        // keeps full relative precision near k = 0, ±π.
        let one_minus = 2.0 * (c2 * sin_h3 * sin_h3 + s2 * sin_h * sin_h);
        let one_plus = 2.0 * (c2 * cos_h3 * cos_h3 + s2 * cos_h * cos_h);
        Pieces {
            re_lambda: c2 * cos_3k + s2 * cos_k,
            root: (one_minus * one_plus).sqrt(),
            im_part: c2 * sin_3k + s2 * sin_k,
            cross_sq: 4.0 * c2 * s2 * sin_k * sin_k,
            sin_k,
        }
    }

    fn check_k(k: f64) -> Result<f64> {
        if !k.is_finite() {
            return Err(Error::InvalidArgument("quasi-momentum must be finite"));
        }
        let reduced = crate::walk::wrap_angle(k + PI) - PI;
        if reduced.abs() <= K_TOLERANCE || PI - reduced.abs() <= K_TOLERANCE {
            return Err(Error::DegenerateQuasimomentum { k });
        }
        Ok(reduced)
    }

    /// `σ·im_part + root` without cancellation, `σ = ±1`.
    fn signed_sum(p: &Pieces, sigma: f64) -> f64 {
        if sigma * p.im_part >= 0.0 {
            p.root + sigma * p.im_part
        } else {
            p.cross_sq / (p.root + p.im_part.abs())
        }
    }

    /// `σ·(im_part + σ·root)`, the lower eigenvector component up to sign.
    fn lower_component(p: &Pieces, sigma: f64) -> f64 {
        sigma * Dispersion::signed_sum(p, sigma)
    }

    fn velocity_from(&self, k: f64, p: &Pieces, sigma: f64) -> f64 {
        let (c2, s2) = (self.c * self.c, self.s * self.s);
        sigma * (3.0 * c2 * (3.0 * k).sin() + s2 * p.sin_k) / (3.0 * p.root)
    }

    /// Eigenvalues, normalized eigenvectors, normalizations and group
    /// velocities at quasi-momentum `k`.
    pub fn eigen_system(&self, k: f64) -> Result<EigenSystem> {
        let k = Dispersion::check_k(k)?;
        let p = self.pieces(k);
        let upper = -2.0 * self.c * self.s * p.sin_k * Complex::from_polar(1.0, 2.0 * k);
        let mut sys = EigenSystem {
            k,
            lambda: [Complex::new(0.0, 0.0); 2],
            vectors: [[Complex::new(0.0, 0.0); 2]; 2],
            norms: [0.0; 2],
            velocities: [0.0; 2],
        };
        for (idx, j) in [1usize, 2].into_iter().enumerate() {
            let sigma = branch_sign(j);
            let norm = 2.0 * p.root * Dispersion::signed_sum(&p, sigma);
            let scale = 1.0 / norm.sqrt();
            sys.lambda[idx] = Complex::new(p.re_lambda, -sigma * p.root);
            sys.vectors[idx] = [
                upper * scale,
                Complex::new(Dispersion::lower_component(&p, sigma) * scale, 0.0),
            ];
            sys.norms[idx] = norm;
            sys.velocities[idx] = self.velocity_from(k, &p, sigma);
        }
        Ok(sys)
    }

    /// `h_j(k) = iλ'_j(k) / 3λ_j(k)` for `j ∈ {1, 2}`.
    pub fn group_velocity(&self, k: f64, j: usize) -> Result<f64> {
        if j != 1 && j != 2 {
            return Err(Error::InvalidArgument("branch index must be 1 or 2"));
        }
        let k = Dispersion::check_k(k)?;
        let p = self.pieces(k);
        Ok(self.velocity_from(k, &p, branch_sign(j)))
    }

    /// `(h_j(k), |⟨v_j(k)|ψ⟩|²)` for both branches; `k` must be non-degenerate.
    fn branches(&self, k: f64, psi: [Complex; 2]) -> [(f64, f64); 2] {
        let p = self.pieces(k);
        let upper = -2.0 * self.c * self.s * p.sin_k * Complex::from_polar(1.0, 2.0 * k);
        let mut out = [(0.0, 0.0); 2];
        for (idx, j) in [1usize, 2].into_iter().enumerate() {
            let sigma = branch_sign(j);
            let norm = 2.0 * p.root * Dispersion::signed_sum(&p, sigma);
            let lower = Dispersion::lower_component(&p, sigma);
            let overlap = upper.conj() * psi[0] + psi[1] * lower;
            out[idx] = (self.velocity_from(k, &p, sigma), overlap.norm_sqr() / norm);
        }
        out
    }

    /// One-sided limits of `h_1` at the cell boundary `k_b = -π + b·2π/n`.
    /// Returns `(limit from the left, limit from the right)`.
    fn boundary_velocity(&self, b: usize, n: usize) -> (f64, f64) {
        let speed = self.max_speed();
        // h_1(k) → ∓speed as k → 0±, and → ±speed as k → ±π∓.
        if b == 0 || b == n {
            (-speed, speed)
        } else if 2 * b == n {
            (speed, -speed)
        } else {
            let k = -PI + b as f64 * TAU / n as f64;
            let p = self.pieces(k);
            let h = self.velocity_from(k, &p, -1.0);
            (h, h)
        }
    }
}

/// Fourier-space matrix of one full period `Ŝ U_{p-1} ⋯ Ŝ U_0` at `k`.
pub fn fourier_cycle(protocol: &StepProtocol, k: f64) -> [[Complex; 2]; 2] {
    let shift = [Complex::from_polar(1.0, k), Complex::from_polar(1.0, -k)];
    let mut acc = [
        [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
    ];
    for coin in protocol.coins() {
        let m = coin.entries();
        let mut next = [[Complex::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                next[i][j] = shift[i] * (m[i][0] * acc[0][j] + m[i][1] * acc[1][j]);
            }
        }
        acc = next;
    }
    acc
}

/// Free-function form of [`Dispersion::eigen_system`] for a rotation coin.
pub fn eigen_system(coin: &CoinOperator, k: f64) -> Result<EigenSystem> {
    Dispersion::of_coin(coin)?.eigen_system(k)
}

/// Free-function form of [`Dispersion::group_velocity`] for a rotation coin.
pub fn group_velocity(coin: &CoinOperator, k: f64, j: usize) -> Result<f64> {
    Dispersion::of_coin(coin)?.group_velocity(k, j)
}

/// Coin and initial spin, with the quantities the limit law is built from.
///
/// For a general coin `(γ, δ, ξ, θ)` the law equals the rotation-coin law at
/// `θ` with the phase-adjusted spin `(α e^{iξ}, β e^{-iξ})`; the walk it
/// describes is `[U, U, J(U)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitModel {
    coin: CoinOperator,
    spin: InitialSpin,
    effective: InitialSpin,
    dispersion: Dispersion,
    a_abs: f64,
    b_abs: f64,
    /// `|α|² - |β|²`
    population: f64,
    /// `Re(a α conj(b β))`
    cross: f64,
}

impl LimitModel {
    pub fn new(coin: CoinOperator, spin: InitialSpin) -> Result<Self> {
        let (dispersion, effective) = match coin.kind() {
            CoinKind::Rotation { theta } => (Dispersion::new(theta), spin),
            CoinKind::General { xi, theta, .. } => {
                let eff = InitialSpin::new(
                    spin.alpha() * Complex::from_polar(1.0, xi),
                    spin.beta() * Complex::from_polar(1.0, -xi),
                )?;
                (Dispersion::new(theta), eff)
            }
            _ => return Err(Error::UnsupportedCoin),
        };
        let (a_abs, b_abs) = (coin.a().norm(), coin.b().norm());
        if !(a_abs * b_abs > 0.0) || (a_abs * a_abs + b_abs * b_abs - 1.0).abs() > 1e-12 {
            return Err(Error::DegenerateCoin);
        }
        let (alpha, beta) = (spin.alpha(), spin.beta());
        Ok(LimitModel {
            coin,
            spin,
            effective,
            dispersion,
            a_abs,
            b_abs,
            population: alpha.norm_sqr() - beta.norm_sqr(),
            cross: (coin.a() * alpha * (coin.b() * beta).conj()).re,
        })
    }

    /// Rotation coin at `theta` with the given spin.
    pub fn rotation(theta: f64, spin: InitialSpin) -> Result<Self> {
        LimitModel::new(CoinOperator::rotation(theta)?, spin)
    }

    pub fn coin(&self) -> &CoinOperator {
        &self.coin
    }

    pub fn spin(&self) -> &InitialSpin {
        &self.spin
    }

    /// Spin seen by the equivalent rotation-coin walk.
    pub fn effective_spin(&self) -> &InitialSpin {
        &self.effective
    }

    pub fn dispersion(&self) -> &Dispersion {
        &self.dispersion
    }

    pub fn a_abs(&self) -> f64 {
        self.a_abs
    }

    pub fn b_abs(&self) -> f64 {
        self.b_abs
    }

    /// The walk whose limit this model describes.
    pub fn protocol(&self) -> Result<StepProtocol> {
        match self.coin.kind() {
            CoinKind::Rotation { theta } => StepProtocol::three_period(theta),
            _ => StepProtocol::with_j_step(self.coin),
        }
    }

    pub fn support_intervals(&self) -> SupportIntervals {
        let a2 = self.a_abs * self.a_abs;
        let lo = (1.0 - 4.0 * a2) / 3.0;
        let hi = (1.0 + 8.0 * a2).sqrt() / 3.0;
        SupportIntervals { positive: (lo, hi), negative: (-hi, -lo) }
    }

    /// `D(x) = 1 + 8|a|² - 9|a|² x²`, clamped to zero against roundoff.
    pub fn d_factor(&self, x: f64) -> Result<f64> {
        let a2 = self.a_abs * self.a_abs;
        let d = 1.0 + 8.0 * a2 - 9.0 * a2 * x * x;
        if d >= 0.0 {
            Ok(d)
        } else if d >= RADICAND_CLAMP {
            Ok(0.0)
        } else {
            Err(Error::OutsideSupportHull { x })
        }
    }

    /// Initial-condition weight `χ(α, β; x)`; reduces to `ν` for rotation coins.
    pub fn chi_weight(&self, x: f64) -> Result<f64> {
        let (a, b) = (self.a_abs, self.b_abs);
        let a2 = a * a;
        let root_d = self.d_factor(x)?.sqrt();
        let denom = 1.0 + 8.0 * a2;
        let linear = (9.0 * a2 * a2 * self.population + 3.0 * (1.0 + 6.0 * a2) * self.cross)
            / (a2 * denom);
        let radical = (a2 * b * b * self.population - (1.0 + 2.0 * a2) * self.cross)
            / (a2 * b * denom);
        Ok(linear * x + radical * root_d)
    }

    fn near_endpoint(&self, x: f64) -> bool {
        self.support_intervals()
            .endpoints()
            .iter()
            .any(|&e| (x - e).abs() <= ENDPOINT_TOLERANCE)
    }

    /// Symmetric part `f(x)` of the density on the positive support interval.
    pub fn density_f(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.support_intervals().positive;
        if (x - lo).abs() <= ENDPOINT_TOLERANCE || (x - hi).abs() <= ENDPOINT_TOLERANCE {
            return Err(Error::EndpointSingularity { x });
        }
        if !(lo < x && x < hi) {
            return Err(Error::OutsideSupport { x });
        }
        self.f_unchecked(x)
    }

    fn f_unchecked(&self, x: f64) -> Result<f64> {
        let (a2, b) = (self.a_abs * self.a_abs, self.b_abs);
        let d = self.d_factor(x)?;
        let root_d = d.sqrt();
        let x2 = x * x;
        let w_plus = -(1.0 - 4.0 * a2) + 3.0 * (1.0 - 2.0 * a2) * x2 + 2.0 * b * x * root_d;
        let w_minus = 1.0 + 8.0 * a2 - 3.0 * (1.0 + 2.0 * a2) * x2 - 2.0 * b * x * root_d;
        if !(w_plus > 0.0 && w_minus > 0.0 && root_d > 0.0) {
            return Err(Error::EndpointSingularity { x });
        }
        let num = b * (b * x + root_d).powi(2);
        Ok(num / (PI * (1.0 - x2) * w_plus.sqrt() * w_minus.sqrt() * root_d))
    }

    /// Limit density of `X_{3t} / 3t` at `x`; zero off the support.
    pub fn limit_density(&self, x: f64) -> Result<f64> {
        if self.near_endpoint(x) {
            return Err(Error::EndpointSingularity { x });
        }
        let support = self.support_intervals();
        let (lo, hi) = support.positive;
        let mut value = 0.0;
        if lo < x && x < hi {
            value += (1.0 - self.chi_weight(x)?) * self.f_unchecked(x)?;
        }
        if -hi < x && x < -lo {
            value += (1.0 + self.chi_weight(-x)?) * self.f_unchecked(-x)?;
        }
        Ok(value)
    }

    /// `∫_lo^hi limit_density` by an `n`-node cosine-substituted midpoint rule
    /// on each support piece, which absorbs the endpoint singularities.
    pub fn density_integral(&self, lo: f64, hi: f64, n: usize) -> f64 {
        self.weighted_density_integral(lo, hi, n, |_| 1.0)
    }

    /// `∫_lo^hi g(x) limit_density(x) dx`, same scheme as
    /// [`Self::density_integral`].
    pub fn weighted_density_integral<G: Fn(f64) -> f64>(
        &self,
        lo: f64,
        hi: f64,
        n: usize,
        g: G,
    ) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        let (p_lo, p_hi) = self.support_intervals().positive;
        let branch = |x: f64, sign: f64| {
            let chi = self.chi_weight(x).unwrap_or(0.0);
            (1.0 - sign * chi) * self.f_unchecked(x).unwrap_or(0.0)
        };
        // Positive branch on [lo, hi] ∩ I₊.
        let plus = quad::cosine_midpoint(lo.max(p_lo), hi.min(p_hi), n, |x| {
            g(x) * branch(x, 1.0)
        });
        // Mirrored branch, substituted y = -x: [-hi, -lo] ∩ I₊.
        let minus = quad::cosine_midpoint((-hi).max(p_lo), (-lo).min(p_hi), n, |y| {
            g(-y) * branch(y, -1.0)
        });
        plus + minus
    }

    fn psi0(&self) -> [Complex; 2] {
        [self.effective.alpha(), self.effective.beta()]
    }

    fn moment_sum(&self, r: u32, n: usize) -> f64 {
        let psi = self.psi0();
        let terms: Vec<f64> = quad::k_midpoints(n)
            .map(|k| {
                let [(h1, w1), (h2, w2)] = self.dispersion.branches(k, psi);
                h1.powi(r as i32) * w1 + h2.powi(r as i32) * w2
            })
            .collect();
        pairwise_sum(&terms) / n as f64
    }

    /// `∫ Σ_j h_j(k)^r |⟨v_j(k)|ψ̂₀⟩|² dk/2π`, the `r`-th moment of the limit
    /// law, on a midpoint grid of `2n` cells; the error estimate is the
    /// difference from the `n`-cell value.
    pub fn kspace_moment_with_error(&self, r: u32, n: usize) -> Result<(f64, f64)> {
        if r > crate::walk::MAX_MOMENT_ORDER {
            return Err(Error::InvalidArgument("moment order above 8"));
        }
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument("k grid size must be even"));
        }
        let coarse = self.moment_sum(r, n);
        let fine = self.moment_sum(r, 2 * n);
        Ok((fine, (fine - coarse).abs()))
    }

    /// [`Self::kspace_moment_with_error`] at the default grid.
    pub fn kspace_moment(&self, r: u32) -> Result<f64> {
        self.kspace_moment_with_error(r, DEFAULT_K_POINTS).map(|(v, _)| v)
    }

    /// `(lo, hi, mass)` for each of the `n` k-cells of both branches: the cell
    /// carries `w_j(k_mid)/n`, spread uniformly over the range of `h_j` across it.
    fn cell_ramps(&self, n: usize) -> Vec<(f64, f64, f64)> {
        let disp = self.dispersion;
        let psi = self.psi0();
        let mut out = Vec::with_capacity(2 * n);
        let mut right_edge = disp.boundary_velocity(0, n).1;
        for (i, k) in quad::k_midpoints(n).enumerate() {
            let left_edge = right_edge;
            let (before, after) = disp.boundary_velocity(i + 1, n);
            right_edge = after;
            let weights = disp.branches(k, psi);
            // h_2 = -h_1 on the same cell.
            for (sigma, (_, w)) in [(1.0, weights[0]), (-1.0, weights[1])] {
                let (a, b) = (sigma * left_edge, sigma * before);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                out.push((lo, hi, w / n as f64));
            }
        }
        out
    }

    /// Bin masses of the pushforward of the k-space weights through the group
    /// velocity, with `h` taken linear across each k-cell.
    pub fn pushforward_density(&self, bins: usize, k_points: usize) -> Result<Histogram> {
        if bins < 100 {
            return Err(Error::InvalidArgument("pushforward needs at least 100 bins"));
        }
        if k_points < 2 || !k_points.is_multiple_of(2) {
            return Err(Error::InvalidArgument("k grid size must be even"));
        }
        let width = 2.0 / bins as f64;
        let mut mass = vec![0.0; bins];
        let bin_of = |x: f64| (((x + 1.0) / width).max(0.0) as usize).min(bins - 1);
        for (lo, hi, m) in self.cell_ramps(k_points) {
            if hi - lo <= STEP_WIDTH {
                mass[bin_of(0.5 * (lo + hi))] += m;
                continue;
            }
            let density = m / (hi - lo);
            for (i, slot) in mass.iter_mut().enumerate().take(bin_of(hi) + 1).skip(bin_of(lo)) {
                let a = (-1.0 + i as f64 * width).max(lo);
                let b = (-1.0 + (i + 1) as f64 * width).min(hi);
                if b > a {
                    *slot += density * (b - a);
                }
            }
        }
        Ok(Histogram { lo: -1.0, width, mass })
    }
}

/// Free-function form of [`LimitModel::support_intervals`].
pub fn support_intervals(model: &LimitModel) -> SupportIntervals {
    model.support_intervals()
}

/// Binned probability mass over `[lo, lo + width·bins)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub mass: Vec<f64>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let a = self.lo + i as f64 * self.width;
        (a, a + self.width)
    }

    pub fn density(&self, i: usize) -> f64 {
        self.mass[i] / self.width
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.mass)
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Cells narrower than this in `x` are deposited as point masses.
const STEP_WIDTH: f64 = 1e-10;

/// The limit law with a precomputed CDF.
///
/// The CDF is the pushforward of the k-space weights: each of the `n` cells of
/// each branch carries mass `w_j(k_mid)/n`, spread uniformly over the range
/// of `h_j` across the cell. This is exact up to `O(1/n²)` away from the
/// support endpoints.
#[derive(Clone, Debug)]
pub struct LimitLaw {
    model: LimitModel,
    breakpoints: Vec<f64>,
    cdf_at: Vec<f64>,
    slope_after: Vec<f64>,
}

impl LimitLaw {
    pub fn new(model: LimitModel) -> Self {
        LimitLaw::with_k_points(model, DEFAULT_K_POINTS)
            .expect("default k grid is even")
    }

    pub fn with_k_points(model: LimitModel, n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument("k grid size must be even"));
        }
        let ramps = model.cell_ramps(n);
        // (position, slope change, jump)
        let mut events: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * ramps.len());
        for (lo, hi, mass) in ramps {
            if hi - lo > STEP_WIDTH {
                let slope = mass / (hi - lo);
                events.push((lo, slope, 0.0));
                events.push((hi, -slope, 0.0));
            } else {
                events.push((0.5 * (lo + hi), 0.0, mass));
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut breakpoints = Vec::with_capacity(events.len());
        let mut cdf_at = Vec::with_capacity(events.len());
        let mut slope_after = Vec::with_capacity(events.len());
        let mut slope = Compensated::default();
        let mut cdf = Compensated::default();
        let mut idx = 0;
        while idx < events.len() {
            let x = events[idx].0;
            if let (Some(&prev_x), Some(&prev_s)) = (breakpoints.last(), slope_after.last()) {
                cdf.add(prev_s * (x - prev_x));
            }
            while idx < events.len() && events[idx].0 == x {
                slope.add(events[idx].1);
                cdf.add(events[idx].2);
                idx += 1;
            }
            let value = cdf_at.last().map_or(cdf.value(), |&p: &f64| cdf.value().max(p));
            breakpoints.push(x);
            cdf_at.push(value);
            slope_after.push(slope.value().max(0.0));
        }
        if let Some(s) = slope_after.last_mut() {
            *s = 0.0;
        }
        Ok(LimitLaw { model, breakpoints, cdf_at, slope_after })
    }

    pub fn model(&self) -> &LimitModel {
        &self.model
    }

    /// `P(X ≤ x)` for the limit law.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        if idx == 0 {
            return 0.0;
        }
        let i = idx - 1;
        let mut value = self.cdf_at[i] + self.slope_after[i] * (x - self.breakpoints[i]);
        if let Some(&next) = self.cdf_at.get(i + 1) {
            value = value.min(next);
        }
        value
    }

    /// Total mass, `1` up to quadrature roundoff.
    pub fn total_mass(&self) -> f64 {
        self.cdf_at.last().copied().unwrap_or(0.0)
    }
}

/// `P(X ≤ x)` for the limit law of `model` on the default grid.
///
/// Builds the pushforward table on every call; keep a [`LimitLaw`] around
/// when evaluating many points.
pub fn limit_cdf(model: &LimitModel, x: f64) -> f64 {
    LimitLaw::new(*model).cdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn spin(a: (f64, f64), b: (f64, f64)) -> InitialSpin {
        InitialSpin::new(Complex::new(a.0, a.1), Complex::new(b.0, b.1)).unwrap()
    }

    fn up() -> InitialSpin {
        spin((1.0, 0.0), (0.0, 0.0))
    }

    #[test]
    fn support_examples() {
        let m = LimitModel::rotation(FRAC_PI_4, InitialSpin::symmetric()).unwrap();
        let s = m.support_intervals();
        assert!((s.positive.0 + 1.0 / 3.0).abs() < 1e-15);
        assert!((s.positive.1 - 5f64.sqrt() / 3.0).abs() < 1e-15);
        assert_eq!(s.negative, (-s.positive.1, -s.positive.0));
        assert_eq!(s.gap(), None);

        let m = LimitModel::rotation(2.0 * PI / 5.0, InitialSpin::symmetric()).unwrap();
        let s = m.support_intervals();
        assert!((s.positive.0 - 0.206_011_329_583_298).abs() < 1e-12);
        assert!((s.positive.1 - 0.442_710_342_034_685).abs() < 1e-14);
        assert!(s.gap().is_some());
    }

    #[test]
    fn support_nonempty_for_all_angles() {
        for i in 1..400 {
            let theta = i as f64 * TAU / 400.0 + 1e-3;
            let Ok(m) = LimitModel::rotation(theta, up()) else { continue };
            let (lo, hi) = m.support_intervals().positive;
            assert!(lo.abs() < hi, "theta={theta}");
        }
    }

    #[test]
    fn d_factor_examples() {
        let m = LimitModel::rotation(FRAC_PI_4, up()).unwrap();
        assert!((m.d_factor(0.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((m.d_factor(0.9).unwrap() - 1.355).abs() < 1e-14);
        let theta = 2.0 * PI / 5.0;
        let m = LimitModel::rotation(theta, up()).unwrap();
        let a2 = theta.cos().powi(2);
        let hull = m.support_intervals().hull();
        let expect = (1.0 + 8.0 * a2) * (1.0 - a2);
        assert!((m.d_factor(hull).unwrap() - expect).abs() < 1e-14);
        assert!(matches!(m.d_factor(2.0), Err(Error::OutsideSupportHull { .. })));
    }

    #[test]
    fn chi_vanishes_for_symmetric_spin() {
        for theta in [0.3, FRAC_PI_4, 2.0 * PI / 5.0, 2.5] {
            let m = LimitModel::rotation(theta, InitialSpin::symmetric()).unwrap();
            let (lo, hi) = m.support_intervals().positive;
            for i in 1..50 {
                let x = lo + (hi - lo) * i as f64 / 50.0;
                assert!(m.chi_weight(x).unwrap().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn chi_hand_value_spin_up() {
        let m = LimitModel::rotation(FRAC_PI_4, up()).unwrap();
        assert!((m.chi_weight(0.0).unwrap() - 10f64.sqrt() / 10.0).abs() < 1e-15);
    }

    /// ν written directly in terms of the signed cos θ, sin θ.
    fn nu_direct(theta: f64, s: &InitialSpin, x: f64) -> f64 {
        let (sn, c) = theta.sin_cos();
        let pop = s.alpha().norm_sqr() - s.beta().norm_sqr();
        let re = (s.alpha() * s.beta().conj()).re;
        let d = 1.0 + 8.0 * c * c - 9.0 * c * c * x * x;
        (9.0 * c.powi(3) * pop + 3.0 * sn * (1.0 + 6.0 * c * c) * re) * x
            / (c * (1.0 + 8.0 * c * c))
            + sn / (c * sn.abs() * (1.0 + 8.0 * c * c))
                * (c * sn * pop - (1.0 + 2.0 * c * c) * re)
                * d.sqrt()
    }

    #[test]
    fn chi_specializes_to_nu() {
        let s = spin((0.6, 0.0), (0.48, 0.64));
        for theta in [0.4, 1.2, 2.0, 3.6, 5.5] {
            let m = LimitModel::rotation(theta, s).unwrap();
            let (lo, hi) = m.support_intervals().positive;
            for i in 1..20 {
                let x = lo + (hi - lo) * i as f64 / 20.0;
                let got = m.chi_weight(x).unwrap();
                assert!((got - nu_direct(theta, &s, x)).abs() < 1e-12, "theta={theta} x={x}");
            }
        }
    }

    #[test]
    fn density_errors_and_zeros() {
        let m = LimitModel::rotation(2.0 * PI / 5.0, up()).unwrap();
        let (lo, hi) = m.support_intervals().positive;
        assert!(matches!(m.density_f(hi), Err(Error::EndpointSingularity { .. })));
        assert!(matches!(m.density_f(lo), Err(Error::EndpointSingularity { .. })));
        assert!(matches!(m.density_f(0.0), Err(Error::OutsideSupport { .. })));
        assert!(matches!(m.limit_density(-lo), Err(Error::EndpointSingularity { .. })));
        assert_eq!(m.limit_density(0.9).unwrap(), 0.0);
        assert_eq!(m.limit_density(0.0).unwrap(), 0.0);
        assert!(m.density_f(0.5 * (lo + hi)).unwrap() > 0.0);
    }

    #[test]
    fn symmetric_spin_gives_even_density() {
        let m = LimitModel::rotation(FRAC_PI_4, InitialSpin::symmetric()).unwrap();
        for i in 1..200 {
            let x = -0.99 + 1.98 * i as f64 / 200.0 + 1e-4;
            let (p, q) = (m.limit_density(x), m.limit_density(-x));
            if let (Ok(p), Ok(q)) = (p, q) {
                assert!((p - q).abs() <= 1e-13 * p.max(1.0), "x={x}");
            }
        }
    }

    #[test]
    fn density_normalized() {
        for theta in [FRAC_PI_4, 2.0 * PI / 5.0, PI / 5.0, 2.2] {
            for s in [InitialSpin::symmetric(), up(), spin((0.6, 0.0), (0.0, -0.8))] {
                let m = LimitModel::rotation(theta, s).unwrap();
                let total = m.density_integral(-1.0, 1.0, 4096);
                assert!((total - 1.0).abs() < 1e-8, "theta={theta} total={total}");
            }
        }
    }

    #[test]
    fn eigen_at_quarter_turn() {
        let sys = eigen_system(&CoinOperator::rotation(FRAC_PI_4).unwrap(), FRAC_PI_2).unwrap();
        assert!((sys.lambda[0] - Complex::new(0.0, 1.0)).norm() < 1e-15);
        assert!((sys.lambda[1] - Complex::new(0.0, -1.0)).norm() < 1e-15);
        assert!((sys.velocities[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((sys.velocities[1] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_rejects_degenerate_k() {
        let coin = CoinOperator::rotation(0.5).unwrap();
        for k in [0.0, PI, -PI, 1e-10, PI - 1e-10] {
            assert!(matches!(
                eigen_system(&coin, k),
                Err(Error::DegenerateQuasimomentum { .. })
            ));
        }
        let general = CoinOperator::general(0.1, 0.2, 0.3, 0.5).unwrap();
        assert_eq!(eigen_system(&general, 1.0), Err(Error::UnsupportedCoin));
        assert!(group_velocity(&coin, 1.0, 3).is_err());
    }

    #[test]
    fn eigen_residual_and_norms() {
        for theta in [0.3, FRAC_PI_4, 1.2, 2.0 * PI / 5.0, 4.0] {
            let coin = CoinOperator::rotation(theta).unwrap();
            let proto = StepProtocol::three_period(theta).unwrap();
            for i in 0..257 {
                let k = -PI + (i as f64 + 0.37) * TAU / 257.0;
                let sys = eigen_system(&coin, k).unwrap();
                let m = fourier_cycle(&proto, k);
                for j in 0..2 {
                    let v = sys.vectors[j];
                    let mv = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
                    let res = ((mv[0] - sys.lambda[j] * v[0]).norm_sqr()
                        + (mv[1] - sys.lambda[j] * v[1]).norm_sqr())
                    .sqrt();
                    assert!(res <= 1e-12, "theta={theta} k={k} res={res}");
                    assert!((v[0].norm_sqr() + v[1].norm_sqr() - 1.0).abs() <= 1e-13);
                }
                let ip = sys.vectors[0][0].conj() * sys.vectors[1][0]
                    + sys.vectors[0][1].conj() * sys.vectors[1][1];
                assert!(ip.norm() <= 1e-12);
                assert_eq!(sys.velocities[0], -sys.velocities[1]);
            }
        }
    }

    #[test]
    fn kspace_moments_basic() {
        let m = LimitModel::rotation(FRAC_PI_4, InitialSpin::symmetric()).unwrap();
        assert!((m.kspace_moment(0).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.kspace_moment(1).unwrap().abs() < 1e-12);
        let (m2, err) = m.kspace_moment_with_error(2, 1 << 14).unwrap();
        assert!(err < 1e-8, "{err}");
        let by_density = m.density_integral(-1.0, 1.0, 1 << 13);
        assert!((by_density - 1.0).abs() < 1e-8);
        assert!(m2 > 0.0 && m2 < 1.0);
        assert!(m.kspace_moment(9).is_err());
    }

    #[test]
    fn cdf_limits_and_symmetry() {
        let m = LimitModel::rotation(FRAC_PI_4, InitialSpin::symmetric()).unwrap();
        let law = LimitLaw::with_k_points(m, 1 << 14).unwrap();
        let hull = m.support_intervals().hull();
        assert_eq!(law.cdf(-hull - 1e-6), 0.0);
        assert!((law.cdf(hull + 1e-6) - 1.0).abs() < 1e-10);
        assert!((law.cdf(0.0) - 0.5).abs() < 1e-8, "{}", law.cdf(0.0));
        let mut prev = 0.0;
        for i in 0..=2000 {
            let x = -1.0 + i as f64 * 1e-3;
            let v = law.cdf(x);
            assert!(v >= prev);
            prev = v;
        }
        assert!(LimitLaw::with_k_points(m, 7).is_err());
    }

    #[test]
    fn general_coin_model_uses_phase_adjusted_spin() {
        let s = spin((0.6, 0.0), (0.0, 0.8));
        let coin = CoinOperator::general(0.3, -0.7, 0.45, 1.1).unwrap();
        let m = LimitModel::new(coin, s).unwrap();
        let eff = m.effective_spin();
        assert!((eff.alpha() - Complex::from_polar(0.6, 0.45)).norm() < 1e-15);
        assert!((eff.beta() - Complex::from_polar(0.8, FRAC_PI_2 - 0.45)).norm() < 1e-15);
        let proto = m.protocol().unwrap();
        assert_eq!(proto.period(), 3);
        assert_eq!(proto.coins()[2].kind(), CoinKind::JOf);
        let j = CoinOperator::identity();
        assert_eq!(LimitModel::new(j, s), Err(Error::UnsupportedCoin));
    }
}
