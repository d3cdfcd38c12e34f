//! Exact state-vector evolution of a two-state walk on the integer line.
//!
//! One step applies the coin at every site and then shifts: the spin-0
//! amplitude moves from `x` to `x - 1`, the spin-1 amplitude from `x` to
//! `x + 1`. A protocol of period `p` applies `coins[t % p]` at time `t`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};


#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Complex, Error, Result};

/// Tolerance for rejecting coin angles at multiples of π/2.
pub const ANGLE_TOLERANCE: f64 = 1e-9;
/// Entrywise tolerance of the unitarity check.
pub const UNITARY_TOLERANCE: f64 = 1e-12;
/// Tolerance on `|α|² + |β|² = 1`.
pub const SPIN_NORM_TOLERANCE: f64 = 1e-12;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// Amplitudes of the two spin states at one lattice site.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Spinor {
    pub spin0: Complex,
    pub spin1: Complex,
}

impl Spinor {
    pub const ZERO: Spinor = Spinor { spin0: ZERO, spin1: ZERO };

    pub const fn new(spin0: Complex, spin1: Complex) -> Self {
        Spinor { spin0, spin1 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.spin0.norm_sqr() + self.spin1.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.spin0.is_finite() && self.spin1.is_finite()
    }
}

/// How a coin was built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoinKind {
    /// `[[cos θ, sin θ], [sin θ, -cos θ]]`.
    Rotation { theta: f64 },
    /// `diag(e^{iγ}, e^{iδ}) · Rotation(θ) · diag(e^{iξ}, e^{-iξ})`.
    General { gamma: f64, delta: f64, xi: f64, theta: f64 },
    /// The diagonal companion `diag(1, -conj(a)·d / |a|²)` of another coin.
    JOf,
    Identity,
    /// Any checked unitary matrix.
    Matrix,
}

/// A 2×2 unitary acting on the spin space, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinOperator {
    entries: [[Complex; 2]; 2],
    kind: CoinKind,
}

/// Reduces an angle into `[0, 2π)`.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let r = theta % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::InvalidArgument("coin angle must be finite"));
    }
    let reduced = wrap_angle(theta);
    let forbidden = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2, TAU];
    if forbidden
        .iter()
        .any(|&f| (reduced - f).abs() <= ANGLE_TOLERANCE)
    {
        return Err(Error::ForbiddenAngle { theta });
    }
    Ok(())
}

impl CoinOperator {
    /// Wraps an arbitrary matrix after checking `U†U = I` entrywise.
    pub fn from_matrix(entries: [[Complex; 2]; 2]) -> Result<Self> {
        let coin = CoinOperator { entries, kind: CoinKind::Matrix };
        let deviation = coin.unitarity_deviation();
        if !(deviation <= UNITARY_TOLERANCE) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(coin)
    }

    pub fn identity() -> Self {
        CoinOperator { entries: [[ONE, ZERO], [ZERO, ONE]], kind: CoinKind::Identity }
    }

    /// The real rotation-reflection coin with angle `theta`.
    pub fn rotation(theta: f64) -> Result<Self> {
        check_angle(theta)?;
        let (s, c) = theta.sin_cos();
        let (c, s) = (Complex::new(c, 0.0), Complex::new(s, 0.0));
        Ok(CoinOperator { entries: [[c, s], [s, -c]], kind: CoinKind::Rotation { theta } })
    }

    /// The phase-dressed rotation coin.
    ///
    /// Entries are `a = e^{i(γ+ξ)} cos θ`, `b = e^{i(γ-ξ)} sin θ`,
    /// `c = e^{i(δ+ξ)} sin θ`, `d = -e^{i(δ-ξ)} cos θ`.
    pub fn general(gamma: f64, delta: f64, xi: f64, theta: f64) -> Result<Self> {
        check_angle(theta)?;
        if !(gamma.is_finite() && delta.is_finite() && xi.is_finite()) {
            return Err(Error::InvalidArgument("coin phases must be finite"));
        }
        let (s, c) = theta.sin_cos();
        let left = [Complex::from_polar(1.0, gamma), Complex::from_polar(1.0, delta)];
        let right = [Complex::from_polar(1.0, xi), Complex::from_polar(1.0, -xi)];
        let rot = [[c, s], [s, -c]];
        let mut entries = [[ZERO; 2]; 2];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = left[i] * right[j] * rot[i][j];
            }
        }
        Ok(CoinOperator { entries, kind: CoinKind::General { gamma, delta, xi, theta } })
    }

    /// `J = diag(1, -conj(a)·d / |a|²)`, the coin of the third step in the
    /// general-unitary model. For a real rotation coin this is the identity.
    pub fn j_of(u: &CoinOperator) -> Result<Self> {
        let a = u.a();
        let a_sq = a.norm_sqr();
        if !(a.norm() > 1e-12) {
            return Err(Error::DegenerateCoin);
        }
        let lower = -(a.conj() * u.d()) / a_sq;
        Ok(CoinOperator { entries: [[ONE, ZERO], [ZERO, lower]], kind: CoinKind::JOf })
    }

    pub fn a(&self) -> Complex {
        self.entries[0][0]
    }
    pub fn b(&self) -> Complex {
        self.entries[0][1]
    }
    pub fn c(&self) -> Complex {
        self.entries[1][0]
    }
    pub fn d(&self) -> Complex {
        self.entries[1][1]
    }

    pub fn entries(&self) -> [[Complex; 2]; 2] {
        self.entries
    }

    pub fn kind(&self) -> CoinKind {
        self.kind
    }

    /// True when the matrix is exactly the identity.
    pub fn is_identity(&self) -> bool {
        self.entries == [[ONE, ZERO], [ZERO, ONE]]
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let m = &self.entries;
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let prod = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
                let target = if i == j { ONE } else { ZERO };
                let dev = (prod - target).norm();
                worst = if dev.is_nan() { f64::NAN } else { worst.max(dev) };
            }
        }
        worst
    }

    #[inline]
    pub fn apply(&self, v: Spinor) -> Spinor {
        let m = &self.entries;
        Spinor {
            spin0: m[0][0] * v.spin0 + m[0][1] * v.spin1,
            spin1: m[1][0] * v.spin0 + m[1][1] * v.spin1,
        }
    }

    #[inline]
    fn apply_spin0(&self, v: Spinor) -> Complex {
        self.entries[0][0] * v.spin0 + self.entries[0][1] * v.spin1
    }

    #[inline]
    fn apply_spin1(&self, v: Spinor) -> Complex {
        self.entries[1][0] * v.spin0 + self.entries[1][1] * v.spin1
    }
}

/// Free-function form of [`CoinOperator::rotation`].
pub fn make_rotation_coin(theta: f64) -> Result<CoinOperator> {
    CoinOperator::rotation(theta)
}

/// Free-function form of [`CoinOperator::general`].
pub fn make_general_coin(gamma: f64, delta: f64, xi: f64, theta: f64) -> Result<CoinOperator> {
    CoinOperator::general(gamma, delta, xi, theta)
}

/// Free-function form of [`CoinOperator::j_of`].
pub fn make_j_coin(u: &CoinOperator) -> Result<CoinOperator> {
    CoinOperator::j_of(u)
}

/// Spin of the walker at the origin at time zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialSpin {
    alpha: Complex,
    beta: Complex,
}

impl InitialSpin {
    pub fn new(alpha: Complex, beta: Complex) -> Result<Self> {
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if !((norm_sq - 1.0).abs() <= SPIN_NORM_TOLERANCE) {
            return Err(Error::UnnormalizedSpin { norm_sq });
        }
        Ok(InitialSpin { alpha, beta })
    }

    /// `(1/√2, i/√2)`, the spin for which the limit law is mirror symmetric.
    pub fn symmetric() -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        InitialSpin { alpha: Complex::new(h, 0.0), beta: Complex::new(0.0, h) }
    }

    pub fn alpha(&self) -> Complex {
        self.alpha
    }

    pub fn beta(&self) -> Complex {
        self.beta
    }

    pub fn spinor(&self) -> Spinor {
        Spinor::new(self.alpha, self.beta)
    }
}

/// Periodic coin sequence. The coin applied at time `t` is `coins[t % p]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProtocol {
    coins: Vec<CoinOperator>,
}

impl StepProtocol {
    pub fn new(coins: Vec<CoinOperator>) -> Result<Self> {
        if coins.is_empty() {
            return Err(Error::EmptyProtocol);
        }
        for coin in &coins {
            let deviation = coin.unitarity_deviation();
            if !(deviation <= UNITARY_TOLERANCE) {
                return Err(Error::NotUnitary { deviation });
            }
        }
        Ok(StepProtocol { coins })
    }

    /// `[C, C, I]` with the rotation coin `C(θ)`.
    pub fn three_period(theta: f64) -> Result<Self> {
        let c = CoinOperator::rotation(theta)?;
        Ok(StepProtocol { coins: vec![c, c, CoinOperator::identity()] })
    }

    /// `[U, U, J(U)]` for an arbitrary coin `U`.
    pub fn with_j_step(u: CoinOperator) -> Result<Self> {
        let j = CoinOperator::j_of(&u)?;
        StepProtocol::new(vec![u, u, j])
    }

    pub fn period(&self) -> usize {
        self.coins.len()
    }

    pub fn coins(&self) -> &[CoinOperator] {
        &self.coins
    }

    pub fn coin_at(&self, t: usize) -> &CoinOperator {
        &self.coins[t % self.coins.len()]
    }
}

/// Wavefunction at time `t`. Slot `i` holds position `i - origin_offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    t: usize,
    origin_offset: usize,
    amplitudes: Vec<Spinor>,
}

impl WalkState {
    /// Point mass at the origin, with room for `capacity` steps.
    pub fn at_origin(spin: &InitialSpin, capacity: usize) -> Self {
        let mut amplitudes = vec![Spinor::ZERO; 2 * capacity + 1];
        amplitudes[capacity] = spin.spinor();
        WalkState { t: 0, origin_offset: capacity, amplitudes }
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn origin_offset(&self) -> usize {
        self.origin_offset
    }

    pub fn amplitudes(&self) -> &[Spinor] {
        &self.amplitudes
    }

    /// Amplitude at position `x`; zero outside the stored window.
    pub fn amplitude(&self, x: i64) -> Spinor {
        let slot = x + self.origin_offset as i64;
        if slot < 0 || slot as usize >= self.amplitudes.len() {
            Spinor::ZERO
        } else {
            self.amplitudes[slot as usize]
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        let terms: Vec<f64> = self.amplitudes.iter().map(Spinor::norm_sqr).collect();
        crate::quad::pairwise_sum(&terms)
    }

    /// Applies the coin at every site without shifting.
    pub fn apply_coin(&self, coin: &CoinOperator) -> WalkState {
        WalkState {
            t: self.t,
            origin_offset: self.origin_offset,
            amplitudes: self.amplitudes.iter().map(|&v| coin.apply(v)).collect(),
        }
    }

    fn widened(&self, half_width: usize) -> WalkState {
        if half_width <= self.origin_offset {
            return self.clone();
        }
        let pad = half_width - self.origin_offset;
        let mut amplitudes = vec![Spinor::ZERO; 2 * half_width + 1];
        amplitudes[pad..pad + self.amplitudes.len()].copy_from_slice(&self.amplitudes);
        WalkState { t: self.t, origin_offset: half_width, amplitudes }
    }

    /// Writes `coin` followed by the shift into `out`, which must have the
    /// same window and hold a state of parity opposite to `self` (or zeros).
    fn step_into(&self, coin: &CoinOperator, out: &mut WalkState) {
        debug_assert_eq!(self.origin_offset, out.origin_offset);
        debug_assert!(self.t < self.origin_offset);
        let o = self.origin_offset as i64;
        let reach = self.t as i64 + 1;
        let src = &self.amplitudes;
        let dst = &mut out.amplitudes;
        let at = |x: i64| (x + o) as usize;
        if coin.is_identity() {
            let mut x = -reach;
            while x <= reach {
                dst[at(x)] = Spinor::new(src[at(x + 1)].spin0, src[at(x - 1)].spin1);
                x += 2;
            }
        } else {
            let mut x = -reach;
            while x <= reach {
                dst[at(x)] = Spinor::new(
                    coin.apply_spin0(src[at(x + 1)]),
                    coin.apply_spin1(src[at(x - 1)]),
                );
                x += 2;
            }
        }
        out.t = self.t + 1;
    }
}

/// One coin-and-shift step.
pub fn step(state: &WalkState, coin: &CoinOperator) -> WalkState {
    // The source window needs one spare slot on each side of the support.
    let src = state.widened(state.t + 2);
    let mut out = WalkState {
        t: 0,
        origin_offset: src.origin_offset,
        amplitudes: vec![Spinor::ZERO; src.amplitudes.len()],
    };
    src.step_into(coin, &mut out);
    out
}

/// Evolves the origin-localized `spin` for `steps` steps under `protocol`.
pub fn evolve(spin: &InitialSpin, protocol: &StepProtocol, steps: usize) -> WalkState {
    let capacity = steps + 1;
    let mut current = WalkState::at_origin(spin, capacity);
    let mut next = WalkState {
        t: 0,
        origin_offset: capacity,
        amplitudes: vec![Spinor::ZERO; 2 * capacity + 1],
    };
    for t in 0..steps {
        current.step_into(protocol.coin_at(t), &mut next);
        core::mem::swap(&mut current, &mut next);
    }
    current
}

/// Position probabilities at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionDistribution {
    t: usize,
    entries: Vec<(i64, f64)>,
}

impl PositionDistribution {
    /// Builds a distribution from `(x, p)` pairs with strictly increasing `x`.
    pub fn from_entries(t: usize, entries: Vec<(i64, f64)>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument("positions must be strictly increasing"));
        }
        if entries.iter().any(|&(_, p)| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("probabilities must be finite and nonnegative"));
        }
        Ok(PositionDistribution { t, entries })
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn entries(&self) -> &[(i64, f64)] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        let p: Vec<f64> = self.entries.iter().map(|e| e.1).collect();
        crate::quad::pairwise_sum(&p)
    }

    pub fn probability(&self, x: i64) -> f64 {
        self.entries
            .binary_search_by_key(&x, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }
}

/// `p(x) = |ψ₀(x)|² + |ψ₁(x)|²` on the reachable sites `x ≡ t (mod 2)`,
/// `|x| ≤ t`.
pub fn distribution(state: &WalkState) -> PositionDistribution {
    let t = state.t as i64;
    let entries = (0..=state.t)
        .map(|i| {
            let x = -t + 2 * i as i64;
            (x, state.amplitude(x).norm_sqr())
        })
        .collect();
    PositionDistribution { t: state.t, entries }
}

/// Largest moment order accepted by [`empirical_moment`].
pub const MAX_MOMENT_ORDER: u32 = 8;

/// `Σ_x (x / scale)^r p(x)`.
pub fn empirical_moment(dist: &PositionDistribution, r: u32, scale: f64) -> Result<f64> {
    if r > MAX_MOMENT_ORDER {
        return Err(Error::InvalidArgument("moment order above 8"));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument("scale must be positive"));
    }
    let terms: Vec<f64> = dist
        .entries
        .iter()
        .map(|&(x, p)| (x as f64 / scale).powi(r as i32) * p)
        .collect();
    Ok(crate::quad::pairwise_sum(&terms))
}
