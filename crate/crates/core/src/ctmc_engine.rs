//! Exact reaction-network simulation via the random time change
//! representation `X(t) = x + Σ_k ζ_k Y_k(∫₀ᵗ λ_k(X(s)) ds)`.
//!
//! Each unit-rate Poisson process `Y_k` is realized by its own random stream,
//! so two simulations handed the same stream see identical clocks. That is
//! the common-random-numbers device used by the coupled baselines.

use crate::error::{check_len, Error, Result};
use crate::models::CrnModel;
use crate::rng::Stream;
use crate::scalar::Scalar;

/// Default explosion guard: jumps allowed per path.
pub const DEFAULT_MAX_JUMPS: usize = 10_000_000;

/// A piecewise-constant reaction-network trajectory on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrnPath<S> {
    pub horizon: S,
    species: usize,
    jump_times: Vec<S>,
    reaction_ids: Vec<usize>,
    /// Initial state followed by every post-jump state.
    states: Vec<i64>,
    reaction_counts: Vec<u64>,
}

impl<S: Scalar> CrnPath<S> {
    fn start(x0: &[i64], reactions: usize, horizon: S) -> Self {
        Self {
            horizon,
            species: x0.len(),
            jump_times: Vec::new(),
            reaction_ids: Vec::new(),
            states: x0.to_vec(),
            reaction_counts: vec![0; reactions],
        }
    }

    fn record(&mut self, t: S, reaction: usize, x: &[i64]) {
        self.jump_times.push(t);
        self.reaction_ids.push(reaction);
        self.states.extend_from_slice(x);
        self.reaction_counts[reaction] += 1;
    }

    pub fn jump_times(&self) -> &[S] {
        &self.jump_times
    }

    pub fn reaction_ids(&self) -> &[usize] {
        &self.reaction_ids
    }

    /// `R_k(horizon)`: firings of each reaction.
    pub fn reaction_counts(&self) -> &[u64] {
        &self.reaction_counts
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    /// State after `j` jumps (`j = 0` is the initial state).
    pub fn state(&self, j: usize) -> &[i64] {
        &self.states[j * self.species..(j + 1) * self.species]
    }

    pub fn initial(&self) -> &[i64] {
        self.state(0)
    }

    pub fn terminal(&self) -> &[i64] {
        self.state(self.jump_times.len())
    }

    /// Right-continuous state `X(t)`.
    pub fn state_at(&self, t: S) -> &[i64] {
        let jumps = self.jump_times.partition_point(|&tj| tj <= t);
        self.state(jumps)
    }
}

/// Paths from `x` and `x + ζ_k` simulated under the split coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPairPath<S> {
    pub primary: CrnPath<S>,
    pub shifted: CrnPath<S>,
}

/// Unit-rate Poisson clocks in the modified next reaction method.
struct UnitClocks<S> {
    streams: Vec<Stream>,
    /// Internal time `∫ λ ds` consumed by each channel.
    internal: Vec<S>,
    /// Internal time of each channel's next firing.
    next_firing: Vec<S>,
}

impl<S: Scalar> UnitClocks<S> {
    fn new(stream: &Stream, channels: usize) -> Self {
        let mut streams: Vec<Stream> = (0..channels).map(|c| stream.derive(c as u64)).collect();
        let next_firing = streams.iter_mut().map(|s| s.exp1::<S>()).collect();
        Self {
            streams,
            internal: vec![S::zero(); channels],
            next_firing,
        }
    }

    /// Channel firing first and the real-time wait, or `None` if all rates vanish.
    fn next(&self, rates: &[S]) -> Option<(usize, S)> {
        let mut best: Option<(usize, S)> = None;
        for (c, &rate) in rates.iter().enumerate() {
            if rate > S::zero() {
                let wait = (self.next_firing[c] - self.internal[c]) / rate;
                if best.is_none_or(|(_, b)| wait < b) {
                    best = Some((c, wait));
                }
            }
        }
        best
    }

    fn advance(&mut self, rates: &[S], dt: S) {
        for (internal, &rate) in self.internal.iter_mut().zip(rates) {
            *internal += rate * dt;
        }
    }

    fn fire(&mut self, channel: usize) {
        self.internal[channel] = self.next_firing[channel];
        let e = self.streams[channel].exp1::<S>();
        self.next_firing[channel] += e;
    }
}

fn checked_propensities<S: Scalar, M: CrnModel<S> + ?Sized>(model: &M, x: &[i64], theta: &[S]) -> Result<Vec<S>> {
    let lambda = model.propensities(x, theta);
    check_len("propensities", lambda.len(), model.reaction_count())?;
    for (k, &rate) in lambda.iter().enumerate() {
        if !(rate >= S::zero()) || !rate.is_finite() {
            return Err(Error::NegativePropensity {
                reaction: k,
                value: rate.to_f64_lossy(),
            });
        }
    }
    Ok(lambda)
}

fn apply(x: &mut [i64], zeta: &[i64]) {
    for (xi, z) in x.iter_mut().zip(zeta) {
        *xi += z;
    }
}

fn check_initial<S: Scalar, M: CrnModel<S> + ?Sized>(model: &M, x0: &[i64], horizon: S) -> Result<()> {
    check_len("initial state", x0.len(), model.species_count())?;
    if x0.iter().any(|&v| v < 0) {
        return Err(Error::ModelContract(format!("initial state {x0:?} has negative counts")));
    }
    if !(horizon >= S::zero()) || !horizon.is_finite() {
        return Err(Error::Config(format!("horizon {horizon} must be nonnegative")));
    }
    Ok(())
}

/// Exact path on `[0, horizon]` with an explicit jump cap.
pub fn simulate_crn_path_capped<S: Scalar, M: CrnModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[i64],
    horizon: S,
    stream: &Stream,
    max_jumps: usize,
) -> Result<CrnPath<S>> {
    check_initial(model, x0, horizon)?;
    let m = model.reaction_count();
    let mut clocks = UnitClocks::new(stream, m);
    let mut path = CrnPath::start(x0, m, horizon);
    let mut x = x0.to_vec();
    let mut t = S::zero();
    loop {
        let lambda = checked_propensities(model, &x, theta)?;
        match clocks.next(&lambda) {
            Some((k, wait)) if t + wait <= horizon => {
                t += wait;
                clocks.advance(&lambda, wait);
                clocks.fire(k);
                apply(&mut x, model.stoichiometry(k));
                path.record(t, k, &x);
                if path.jump_count() > max_jumps {
                    return Err(Error::Explosion { cap: max_jumps });
                }
            }
            _ => {
                clocks.advance(&lambda, horizon - t);
                return Ok(path);
            }
        }
    }
}

/// Exact path on `[0, horizon]` by the modified next reaction method.
pub fn simulate_crn_path<S: Scalar, M: CrnModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x0: &[i64],
    horizon: S,
    stream: &Stream,
) -> Result<CrnPath<S>> {
    simulate_crn_path_capped(model, theta, x0, horizon, stream, DEFAULT_MAX_JUMPS)
}

/// Split-coupled simulation of two chains started at `x1` and `x2`.
///
/// Reaction `j` is driven by three unit-rate clocks: one at rate
/// `min(λ_j(X¹), λ_j(X²))` that moves both chains, and one for each positive
/// remainder that moves only its own chain. Each marginal is exact.
pub fn simulate_split_coupled<S: Scalar, M: CrnModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x1: &[i64],
    x2: &[i64],
    horizon: S,
    stream: &Stream,
    max_jumps: usize,
) -> Result<CoupledPairPath<S>> {
    check_initial(model, x1, horizon)?;
    check_initial(model, x2, horizon)?;
    let m = model.reaction_count();
    let mut clocks = UnitClocks::new(stream, 3 * m);
    let mut primary = CrnPath::start(x1, m, horizon);
    let mut shifted = CrnPath::start(x2, m, horizon);
    let (mut a, mut b) = (x1.to_vec(), x2.to_vec());
    let mut rates = vec![S::zero(); 3 * m];
    let mut t = S::zero();
    loop {
        let la = checked_propensities(model, &a, theta)?;
        let lb = checked_propensities(model, &b, theta)?;
        for j in 0..m {
            let common = la[j].min(lb[j]);
            rates[3 * j] = common;
            rates[3 * j + 1] = la[j] - common;
            rates[3 * j + 2] = lb[j] - common;
        }
        match clocks.next(&rates) {
            Some((channel, wait)) if t + wait <= horizon => {
                t += wait;
                clocks.advance(&rates, wait);
                clocks.fire(channel);
                let (j, part) = (channel / 3, channel % 3);
                let zeta = model.stoichiometry(j);
                if part != 2 {
                    apply(&mut a, zeta);
                    primary.record(t, j, &a);
                }
                if part != 1 {
                    apply(&mut b, zeta);
                    shifted.record(t, j, &b);
                }
                if primary.jump_count() + shifted.jump_count() > max_jumps {
                    return Err(Error::Explosion { cap: max_jumps });
                }
            }
            _ => return Ok(CoupledPairPath { primary, shifted }),
        }
    }
}

/// Coupled auxiliary pair from `x` and `x + ζ_k` over `[t_start, T]`
/// (returned on the shifted clock `[0, T − t_start]`).
pub fn simulate_coupled_pair<S: Scalar, M: CrnModel<S> + ?Sized>(
    model: &M,
    theta: &[S],
    x: &[i64],
    k: usize,
    t_start: S,
    stream: &Stream,
) -> Result<CoupledPairPath<S>> {
    if k >= model.reaction_count() {
        return Err(Error::ModelContract(format!(
            "reaction index {k} out of range for {} reactions",
            model.reaction_count()
        )));
    }
    let horizon = model.horizon();
    if !(t_start >= S::zero() && t_start < horizon) {
        return Err(Error::Config(format!("coupling start {t_start} outside [0, {horizon})")));
    }
    let mut shifted = x.to_vec();
    apply(&mut shifted, model.stoichiometry(k));
    if shifted.iter().any(|&v| v < 0) {
        return Err(Error::ModelContract(format!(
            "shifting {x:?} by reaction {k} leaves the nonnegative orthant"
        )));
    }
    simulate_split_coupled(model, theta, x, &shifted, horizon - t_start, stream, DEFAULT_MAX_JUMPS)
}
