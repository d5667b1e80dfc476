//! Exact stationary state of the single-atom laser master equation
//!
//! ```text
//! dρ/dt = g[a†σ − σ†a, ρ] + (κ/2) D[a]ρ + (γ/2) D[σ]ρ + (Γ/2) D[σ†]ρ,
//! D[A]ρ = 2AρA† − A†Aρ − ρA†A,
//! ```
//!
//! with level 1 the ground state and `σ = |1⟩⟨2|`, in a Fock basis
//! truncated at `N` photons.
//!
//! The Liouvillian conserves the excitation-number coherence order, and the
//! steady state lies entirely in the order-zero sector. Its unknowns are
//! `P1(n) = ρ11[n,n]`, `P2(n) = ρ22[n,n]` and `C(n) = ρ12[n,n−1]`, all real.
//! Ordered by excitation manifold they form a linear system of bandwidth
//! four, which is solved directly with iterative refinement. The full
//! Liouvillian is applied to the assembled density matrix afterwards to
//! report an independent stationarity residual.

use crate::coeffs::CoeffTable;
use crate::coeffs::polynomials;
use crate::error::{Error, Result};
use crate::linear_theory::linear_theory;
use crate::numerics::{ln_poisson_kernel, BandedMatrix, PoissonSeries};
use crate::params::{reduce, RateSet};
use crate::qsolution::{FieldMoments, ProfileKind, QProfile, Shape};
use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::PI;

/// Smallest cutoff accepted by [`steady_state`].
pub const MIN_CUTOFF: usize = 4;
/// Largest population allowed in the top three Fock states.
pub const TAIL_LIMIT: f64 = 1e-8;
/// Cutoff used without a lasing window.
pub const SUB_THRESHOLD_CUTOFF: usize = 40;
const MAX_DOUBLINGS: usize = 5;

/// Stationary density matrix in sector form.
///
/// Every block is real; elements outside the zero-coherence sector vanish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState {
    pub rates: RateSet,
    pub cutoff: usize,
    p1: Vec<f64>,
    p2: Vec<f64>,
    // coh[n] = ρ12[n, n−1]; coh[0] = 0
    coh: Vec<f64>,
    pub residual_norm: f64,
    pub tail_mass: f64,
}

impl SteadyState {
    pub fn rho11(&self, n: usize, m: usize) -> f64 {
        if n == m { self.p1[n] } else { 0.0 }
    }

    pub fn rho22(&self, n: usize, m: usize) -> f64 {
        if n == m { self.p2[n] } else { 0.0 }
    }

    /// `⟨1,n|ρ|2,m⟩`.
    pub fn rho12(&self, n: usize, m: usize) -> f64 {
        if n == m + 1 { self.coh[n] } else { 0.0 }
    }

    /// `⟨2,n|ρ|1,m⟩`.
    pub fn rho21(&self, n: usize, m: usize) -> f64 {
        self.rho12(m, n)
    }

    /// Photon-number distribution `p_n = ρ11[n,n] + ρ22[n,n]`.
    pub fn populations(&self) -> Vec<f64> {
        self.p1.iter().zip(&self.p2).map(|(a, b)| a + b).collect()
    }

    pub fn ground_populations(&self) -> &[f64] {
        &self.p1
    }

    pub fn excited_populations(&self) -> &[f64] {
        &self.p2
    }

    /// `ρ12[n, n−1]` for `n = 0..=N`, with a zero first entry.
    pub fn coherences(&self) -> &[f64] {
        &self.coh
    }

    pub fn trace(&self) -> f64 {
        self.p1.iter().chain(&self.p2).sum()
    }

    /// `⟨σ_z⟩ = Σ (P2 − P1)`.
    pub fn inversion(&self) -> f64 {
        self.p2.iter().sum::<f64>() - self.p1.iter().sum::<f64>()
    }

    pub fn min_population(&self) -> f64 {
        self.p1.iter().chain(&self.p2).copied().fold(f64::INFINITY, f64::min)
    }

    /// Full density matrix on `|atom, n⟩`, index `atom·(N+1) + n`, with
    /// atom 0 the ground level.
    pub fn dense(&self) -> DMatrix<f64> {
        let n1 = self.cutoff + 1;
        let mut rho = DMatrix::zeros(2 * n1, 2 * n1);
        for n in 0..n1 {
            rho[(n, n)] = self.p1[n];
            rho[(n1 + n, n1 + n)] = self.p2[n];
            if n >= 1 {
                rho[(n, n1 + n - 1)] = self.coh[n];
                rho[(n1 + n - 1, n)] = self.coh[n];
            }
        }
        rho
    }
}

fn validate_rates(rates: &RateSet) -> Result<()> {
    let ok = |v: f64| v.is_finite() && v > 0.0;
    if !(ok(rates.pump_rate) || rates.pump_rate == 0.0)
        || !ok(rates.decay_rate)
        || !ok(rates.cavity_rate)
        || !(rates.coupling.is_finite() && rates.coupling >= 0.0)
    {
        return Err(Error::Domain(format!("invalid rates for the master equation: {rates:?}")));
    }
    Ok(())
}

struct Layout {
    n: usize,
}

impl Layout {
    fn dim(&self) -> usize {
        3 * self.n + 2
    }

    fn p1(&self, n: usize) -> usize {
        if n == 0 { 0 } else { 3 * n - 2 }
    }

    fn p2(&self, m: usize) -> usize {
        if m < self.n { 3 * m + 2 } else { 3 * self.n + 1 }
    }

    fn c(&self, n: usize) -> usize {
        debug_assert!(n >= 1);
        3 * n
    }
}

fn sector_matrix(rates: &RateSet, big_n: usize) -> BandedMatrix {
    let RateSet {
        pump_rate: pump,
        decay_rate: gam,
        cavity_rate: kap,
        coupling: g,
    } = *rates;
    let l = Layout { n: big_n };
    let mut a = BandedMatrix::zeros(l.dim(), 4, 4);
    for n in 0..=big_n {
        let nf = n as f64;
        // ground populations
        let row = l.p1(n);
        if n >= 1 {
            a.add(row, l.c(n), 2.0 * g * nf.sqrt());
        }
        if n < big_n {
            a.add(row, l.p1(n + 1), kap * (nf + 1.0));
        }
        a.add(row, row, -(kap * nf + pump));
        a.add(row, l.p2(n), gam);
        // excited populations
        let row = l.p2(n);
        if n < big_n {
            a.add(row, l.c(n + 1), -2.0 * g * (nf + 1.0).sqrt());
            a.add(row, l.p2(n + 1), kap * (nf + 1.0));
        }
        a.add(row, row, -(kap * nf + gam));
        a.add(row, l.p1(n), pump);
        // coherences ρ12[n, n−1]
        if n >= 1 {
            let row = l.c(n);
            a.add(row, l.p2(n - 1), g * nf.sqrt());
            a.add(row, l.p1(n), -g * nf.sqrt());
            if n < big_n {
                a.add(row, l.c(n + 1), kap * (nf * (nf + 1.0)).sqrt());
            }
            a.add(row, row, -(0.5 * kap * (2.0 * nf - 1.0) + 0.5 * (pump + gam)));
        }
    }
    a
}

/// Solves for the stationary state at cutoff `N`.
pub fn steady_state(rates: &RateSet, cutoff: usize) -> Result<SteadyState> {
    let state = solve_sector(rates, cutoff)?;
    if state.tail_mass >= TAIL_LIMIT {
        return Err(Error::CutoffTooSmall {
            cutoff,
            tail_mass: state.tail_mass,
        });
    }
    Ok(state)
}

/// The stationary state at cutoff `N` without the tail-mass check.
pub fn solve_sector(rates: &RateSet, cutoff: usize) -> Result<SteadyState> {
    validate_rates(rates)?;
    if cutoff < MIN_CUTOFF {
        return Err(Error::Domain(format!("cutoff {cutoff} below {MIN_CUTOFF}")));
    }
    let l = Layout { n: cutoff };
    let mut a = sector_matrix(rates, cutoff);
    // the population equations sum to zero; one of them is replaced by
    // fixing the scale at the expected photon-number peak
    let pin = l.p1(expected_peak(rates).min(cutoff));
    a.clear_row(pin);
    a.set(pin, pin, 1.0);
    let mut b = vec![0.0; l.dim()];
    b[pin] = 1.0;
    let x = a.solve_refined(&b).map_err(Error::Numerical)?;

    let mut p1: Vec<f64> = (0..=cutoff).map(|n| x[l.p1(n)]).collect();
    let mut p2: Vec<f64> = (0..=cutoff).map(|n| x[l.p2(n)]).collect();
    let mut coh: Vec<f64> = (0..=cutoff).map(|n| if n == 0 { 0.0 } else { x[l.c(n)] }).collect();
    let trace: f64 = p1.iter().chain(&p2).sum();
    if !(trace.is_finite() && trace > 0.0) {
        return Err(Error::Numerical(crate::numerics::NumericsError::Singular { index: pin }));
    }
    for v in p1.iter_mut().chain(p2.iter_mut()).chain(coh.iter_mut()) {
        *v /= trace;
    }
    let tail_mass = (cutoff - 2..=cutoff).map(|n| p1[n] + p2[n]).sum();
    let mut state = SteadyState {
        rates: *rates,
        cutoff,
        p1,
        p2,
        coh,
        residual_norm: 0.0,
        tail_mass,
    };
    state.residual_norm = liouvillian(rates, cutoff, &state.dense()).amax();
    Ok(state)
}

fn expected_peak(rates: &RateSet) -> usize {
    match reduce(rates) {
        Ok(p) => {
            let lin = linear_theory(&p);
            if lin.valid { lin.i0.round() as usize } else { 0 }
        }
        Err(_) => 0,
    }
}

/// `ceil(I0 + 10√max(I0, 1) + 20)` inside the lasing window, otherwise 40.
pub fn cutoff_policy(rates: &RateSet) -> usize {
    match reduce(rates) {
        Ok(p) => {
            let lin = linear_theory(&p);
            if lin.valid {
                (lin.i0 + 10.0 * lin.i0.max(1.0).sqrt() + 20.0).ceil() as usize
            } else {
                SUB_THRESHOLD_CUTOFF
            }
        }
        Err(_) => SUB_THRESHOLD_CUTOFF,
    }
}

/// Steady state at the policy cutoff, doubled while the tail is too heavy.
pub fn solve(rates: &RateSet) -> Result<SteadyState> {
    solve_from(rates, cutoff_policy(rates))
}

/// As [`solve`], starting from an explicit cutoff.
pub fn solve_from(rates: &RateSet, cutoff: usize) -> Result<SteadyState> {
    let mut n = cutoff.max(MIN_CUTOFF);
    for _ in 0..MAX_DOUBLINGS {
        match steady_state(rates, n) {
            Err(Error::CutoffTooSmall { .. }) => n *= 2,
            other => return other,
        }
    }
    steady_state(rates, n)
}

/// Sparse operator on `|atom, n⟩` as `(row, col, value)` triples.
struct Op(Vec<(usize, usize, f64)>);

impl Op {
    fn adjoint(&self) -> Op {
        Op(self.0.iter().map(|&(r, c, v)| (c, r, v)).collect())
    }

    /// `A ρ`.
    fn left(&self, rho: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
        for &(r, c, v) in &self.0 {
            for j in 0..rho.ncols() {
                out[(r, j)] += v * rho[(c, j)];
            }
        }
        out
    }

    /// `ρ A`.
    fn right(&self, rho: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
        for &(r, c, v) in &self.0 {
            for i in 0..rho.nrows() {
                out[(i, c)] += v * rho[(i, r)];
            }
        }
        out
    }

    /// `A† A`, for operators with at most one entry per column.
    fn number(&self) -> Op {
        let mut diag = std::collections::BTreeMap::new();
        for &(_, c, v) in &self.0 {
            *diag.entry(c).or_insert(0.0) += v * v;
        }
        Op(diag.into_iter().map(|(k, v)| (k, k, v)).collect())
    }
}

fn dissipator(op: &Op, rho: &DMatrix<f64>) -> DMatrix<f64> {
    let jump = op.adjoint().right(&op.left(rho));
    let n = op.number();
    2.0 * jump - n.left(rho) - n.right(rho)
}

/// Applies the master-equation Liouvillian to a dense density matrix.
pub fn liouvillian(rates: &RateSet, cutoff: usize, rho: &DMatrix<f64>) -> DMatrix<f64> {
    let n1 = cutoff + 1;
    let k = |atom: usize, n: usize| atom * n1 + n;
    let a = Op((1..n1)
        .flat_map(|n| (0..2).map(move |at| (k(at, n - 1), k(at, n), (n as f64).sqrt())))
        .collect());
    let sigma = Op((0..n1).map(|n| (k(0, n), k(1, n), 1.0)).collect());
    let sigma_dag = sigma.adjoint();
    // X = a†σ − σ†a
    let mut x: Vec<(usize, usize, f64)> = (0..cutoff)
        .map(|n| (k(0, n + 1), k(1, n), ((n + 1) as f64).sqrt()))
        .collect();
    x.extend((1..n1).map(|n| (k(1, n - 1), k(0, n), -(n as f64).sqrt())));
    let x = Op(x);

    let commutator = x.left(rho) - x.right(rho);
    rates.coupling * commutator
        + 0.5 * rates.cavity_rate * dissipator(&a, rho)
        + 0.5 * rates.decay_rate * dissipator(&sigma, rho)
        + 0.5 * rates.pump_rate * dissipator(&sigma_dag, rho)
}

/// Phase-averaged Husimi function `Q(I) = (1/π) Σ p_n e^{−I} Iⁿ/n!`.
pub fn q_from_state(state: &SteadyState) -> Result<QProfile> {
    let params = reduce(&state.rates)?;
    let shape = Shape::Oracle {
        series: PoissonSeries::new(&state.populations()),
        cutoff: state.cutoff,
    };
    let mut q = QProfile::build(ProfileKind::Oracle, params, shape, vec![])?;
    // already normalized by the trace
    q.ln_norm = 0.0;
    q.normalized = true;
    q.resample();
    Ok(q)
}

/// `ρΣ(I) = ρ12(I) + ρ21(I) = (2/π) Σ_{n≥1} C(n) √(K_n(I) K_{n−1}(I))`.
pub fn coherence_profile(state: &SteadyState, grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&i| {
            let s: f64 = (1..=state.cutoff)
                .filter(|&n| state.coh[n] != 0.0)
                .map(|n| {
                    let lk = 0.5 * (ln_poisson_kernel(n, i) + ln_poisson_kernel(n - 1, i));
                    state.coh[n] * if lk.is_finite() { lk.exp() } else { 0.0 }
                })
                .sum();
            2.0 * s / PI
        })
        .collect()
}

/// Evaluation grid for the residual checks: geometric near the origin,
/// uniform across the support.
pub fn residual_grid(state: &SteadyState) -> Vec<f64> {
    let n = state.cutoff as f64;
    let hi = n + 10.0 * n.sqrt() + 10.0;
    let geo = 120;
    let lo: f64 = 1e-3;
    let mut g: Vec<f64> = (0..geo)
        .map(|k| lo * (hi / lo).powf(k as f64 / (geo - 1) as f64))
        .collect();
    g.extend((1..=400).map(|k| hi * k as f64 / 400.0));
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// `max |ρΣ − (κ/g)√I (Q + Q')| / max |ρΣ|` on the residual grid.
pub fn continuity_residual(state: &SteadyState) -> Result<f64> {
    if !(state.rates.coupling > 0.0) {
        return Err(Error::Domain("continuity identity needs g > 0".into()));
    }
    let grid = residual_grid(state);
    let series = PoissonSeries::new(&state.populations());
    let lhs = coherence_profile(state, &grid);
    let ratio = state.rates.cavity_rate / state.rates.coupling;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (&i, &l) in grid.iter().zip(&lhs) {
        let rhs = ratio * i.sqrt() * (series.value(i) + series.derivative(1, i)) / PI;
        worst = worst.max((l - rhs).abs());
        scale = scale.max(l.abs());
    }
    Ok(worst / scale)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeResidual {
    /// `(I, |Σ f_ν Q^(ν)| / Σ |f_ν Q^(ν)|)` at each retained grid point.
    pub points: Vec<(f64, f64)>,
    pub max: f64,
}

/// Residual of `Σ_ν f_ν(I) Q^(ν)(I) = 0` for the oracle `Q`, with the
/// derivatives taken analytically. Points past the cutoff, where `Q` is
/// only the Poisson smear of the last few levels, and points where
/// `Q < 1e−12·max Q` are skipped.
pub fn ode_residual(state: &SteadyState, table: &CoeffTable) -> OdeResidual {
    let polys = polynomials(table);
    let series = PoissonSeries::new(&state.populations());
    let grid = residual_grid(state);
    let derivs: Vec<[f64; 6]> = grid.iter().map(|&i| series.derivatives(i)).collect();
    let peak = derivs.iter().map(|d| d[0]).fold(0.0, f64::max);
    let mut points = vec![];
    for (&i, d) in grid.iter().zip(&derivs) {
        if i > state.cutoff as f64 || d[0] < 1e-12 * peak {
            continue;
        }
        let terms: Vec<f64> = (0..6).map(|nu| polys.eval(nu, i) * d[nu]).collect();
        let sum: f64 = terms.iter().sum();
        let abs: f64 = terms.iter().map(|t| t.abs()).sum();
        points.push((i, sum.abs() / abs));
    }
    let max = points.iter().map(|p| p.1).fold(0.0, f64::max);
    OdeResidual { points, max }
}

/// Photon statistics from the Fock distribution.
pub fn moments_exact(state: &SteadyState) -> FieldMoments {
    let p = state.populations();
    let mean: f64 = p.iter().enumerate().map(|(n, v)| n as f64 * v).sum();
    let var: f64 = p
        .iter()
        .enumerate()
        .map(|(n, v)| (n as f64 - mean).powi(2) * v)
        .sum();
    let second = var + mean * mean;
    FieldMoments {
        mean_photon: mean,
        mean_i_q: mean + 1.0,
        second_moment_i_q: second + 3.0 * mean + 2.0,
        mandel_qf: (mean >= 1e-12).then(|| var / mean - 1.0),
    }
}
