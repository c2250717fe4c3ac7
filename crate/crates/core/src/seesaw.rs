//! See-saw search: alternate the shared state (top eigenvector of the Bell
//! operator) with each player's measurements until the value stalls.
//!
//! Results are lower bounds found by local search, never certificates.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::{strategy_value, NonlocalGame};
use crate::numerics::{eig_projectors, polar_factor, principal_eigvec, random, Operator, StateVector, C64};
use crate::strategies::{validate_strategy, QuantumStrategy};

/// Cap on `(dim_a · dim_b)²`, the Bell operator's entry count.
pub const MEMORY_CAP: u128 = 100_000_000;
/// Inner polar iterations per multi-outcome measurement update.
const POLAR_STEPS: usize = 25;
/// Trajectories in reports are thinned to at most this many points.
pub const TRAJECTORY_POINTS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeesawConfig {
    pub dim_a: usize,
    pub dim_b: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl SeesawConfig {
    pub fn new(dim_a: usize, dim_b: usize) -> Self {
        Self {
            dim_a,
            dim_b,
            restarts: 20,
            max_iters: 500,
            tol: 1e-9,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_a < 2 || self.dim_b < 2 {
            return Err(Error::invalid("see-saw dimensions must be at least 2"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("see-saw needs at least one restart"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::invalid("see-saw tolerance must be positive"));
        }
        let entries = ((self.dim_a * self.dim_b) as u128).pow(2);
        if entries > MEMORY_CAP {
            return Err(Error::cap("Bell operator entries", entries, MEMORY_CAP));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RestartResult {
    pub restart: usize,
    pub best_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(sweep, value)` after each full sweep; sweep 0 is the initial point.
    pub trajectory: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct SeesawReport {
    pub config: SeesawConfig,
    pub best_value: f64,
    pub best_restart: usize,
    pub best_strategy: QuantumStrategy,
    pub restarts: Vec<RestartResult>,
}

impl SeesawReport {
    /// JSON summary with thinned trajectories; omits the strategy itself.
    pub fn summary_json(&self) -> serde_json::Value {
        let restarts: Vec<_> = self
            .restarts
            .iter()
            .map(|r| {
                serde_json::json!({
                    "restart": r.restart,
                    "best_value": r.best_value,
                    "iterations": r.iterations,
                    "converged": r.converged,
                    "trajectory": thin(&r.trajectory, TRAJECTORY_POINTS),
                })
            })
            .collect();
        serde_json::json!({
            "config": self.config,
            "best_value": self.best_value,
            "best_restart": self.best_restart,
            "restarts": restarts,
        })
    }
}

/// Keep at most `n` evenly spaced points, always including the last.
fn thin(points: &[(usize, f64)], n: usize) -> Vec<(usize, f64)> {
    if points.len() <= n {
        return points.to_vec();
    }
    let step = points.len().div_ceil(n);
    let mut out: Vec<_> = points.iter().step_by(step).copied().collect();
    if out.last() != points.last() {
        out.pop();
        out.push(*points.last().expect("nonempty"));
    }
    out
}

fn check_shapes(g: &NonlocalGame, s: &QuantumStrategy) -> Result<()> {
    if s.questions() != (g.nx, g.ny) || s.answers() != (g.na, g.nb) {
        return Err(Error::shape(format!(
            "strategy {:?}/{:?} vs game {:?}",
            s.questions(),
            s.answers(),
            g.shape()
        )));
    }
    Ok(())
}

/// `Σ_{x,y} D(x,y) Σ_{b} V(x,y,a,b) Q_y^b`, Bob's side contracted for one `(x, a)`.
fn bob_weighted(g: &NonlocalGame, s: &QuantumStrategy, x: usize, a: usize) -> DMatrix<C64> {
    let mut acc = DMatrix::from_element(s.dim_b, s.dim_b, C64::new(0.0, 0.0));
    for y in 0..g.ny {
        let d = g.dist(x, y);
        if d == 0.0 {
            continue;
        }
        for b in 0..g.nb {
            let w = d * g.score(x, y, a, b);
            if w != 0.0 {
                acc += s.meas_b[y][b].matrix() * C64::new(w, 0.0);
            }
        }
    }
    acc
}

/// `B = Σ D·V·P_x^a ⊗ Q_y^b`, so that `ω(S, G) = ⟨Ψ|B|Ψ⟩`.
pub fn bell_operator(g: &NonlocalGame, s: &QuantumStrategy) -> Result<Operator> {
    check_shapes(g, s)?;
    let n = s.dim_a * s.dim_b;
    let mut total = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for x in 0..g.nx {
        for a in 0..g.na {
            let q = bob_weighted(g, s, x, a);
            total += s.meas_a[x][a].matrix().kronecker(&q);
        }
    }
    Operator::from_matrix(total)
}

/// Per-answer operators `M^a` with `ω = Σ_a tr(P^a M^a)` for Alice's question `x`.
fn alice_targets(g: &NonlocalGame, s: &QuantumStrategy, psi: &DMatrix<C64>, x: usize) -> Vec<Operator> {
    (0..g.na)
        .map(|a| {
            let q = bob_weighted(g, s, x, a);
            // tr((P ⊗ Q)|Ψ⟩⟨Ψ|) = tr(P · M Qᵀ M†)
            let m = psi * q.transpose() * psi.adjoint();
            Operator::from_matrix(m).expect("square").hermitian_part()
        })
        .collect()
}

fn bob_targets(g: &NonlocalGame, s: &QuantumStrategy, psi: &DMatrix<C64>, y: usize) -> Vec<Operator> {
    let conj = psi.conjugate();
    (0..g.nb)
        .map(|b| {
            let mut acc = DMatrix::from_element(s.dim_a, s.dim_a, C64::new(0.0, 0.0));
            for x in 0..g.nx {
                let d = g.dist(x, y);
                if d == 0.0 {
                    continue;
                }
                for a in 0..g.na {
                    let w = d * g.score(x, y, a, b);
                    if w != 0.0 {
                        acc += s.meas_a[x][a].matrix() * C64::new(w, 0.0);
                    }
                }
            }
            // tr((P ⊗ Q)|Ψ⟩⟨Ψ|) = tr(Q · Mᵀ Pᵀ M̄)
            let m = psi.transpose() * acc.transpose() * &conj;
            Operator::from_matrix(m).expect("square").hermitian_part()
        })
        .collect()
}

fn objective(targets: &[Operator], meas: &[Operator]) -> f64 {
    targets
        .iter()
        .zip(meas)
        .map(|(m, p)| (p * m).trace().re)
        .sum()
}

/// Best projective measurement for the given targets, never worse than `current`.
fn improve_measurement(targets: &[Operator], current: &[Operator]) -> Vec<Operator> {
    let before = objective(targets, current);
    let candidate = if targets.len() == 2 {
        let diff = (&targets[0] - &targets[1]).hermitian_part();
        let split = eig_projectors(&diff).expect("hermitized");
        let rest = &split.minus + &split.kernel;
        vec![split.plus, rest]
    } else {
        polar_update(targets, current)
    };
    if objective(targets, &candidate) + 1e-13 >= before {
        candidate
    } else {
        current.to_vec()
    }
}

/// Columns of `U` grouped by outcome, plus the rank of each outcome.
fn frame_of(current: &[Operator]) -> (Operator, Vec<usize>) {
    let n = current[0].dim();
    let mut labelled = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (a, p) in current.iter().enumerate() {
        labelled += p.matrix() * C64::new((a + 1) as f64, 0.0);
    }
    let labelled = Operator::from_matrix(labelled).expect("square").hermitian_part();
    let eig = labelled.matrix().clone().symmetric_eigen();
    let mut order: Vec<(usize, usize)> = (0..n)
        .map(|k| {
            let a = (eig.eigenvalues[k].round() as isize - 1).clamp(0, current.len() as isize - 1) as usize;
            (a, k)
        })
        .collect();
    order.sort();
    let mut ranks = vec![0; current.len()];
    let mut u = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (col, &(a, k)) in order.iter().enumerate() {
        ranks[a] += 1;
        u.set_column(col, &eig.eigenvectors.column(k));
    }
    (Operator::from_matrix(u).expect("square"), ranks)
}

fn projectors_from_frame(u: &Operator, ranks: &[usize]) -> Vec<Operator> {
    let n = u.dim();
    let mut start = 0;
    ranks
        .iter()
        .map(|&r| {
            let cols = u.matrix().columns(start, r);
            start += r;
            let p = if r == 0 {
                DMatrix::from_element(n, n, C64::new(0.0, 0.0))
            } else {
                cols * cols.adjoint()
            };
            Operator::from_matrix(p).expect("square").hermitian_part()
        })
        .collect()
}

/// Minorize-maximize on `U ↦ Σ_a tr(U Π_a U† M^a)`: shifting every `M^a` to
/// be PSD makes the objective convex, so `U ← polar(Σ_a M^a U Π_a)` never
/// decreases it.
fn polar_update(targets: &[Operator], current: &[Operator]) -> Vec<Operator> {
    let n = current[0].dim();
    let shift = targets.iter().map(|m| m.max_abs() * n as f64).fold(0.0, f64::max);
    let shifted: Vec<Operator> = targets
        .iter()
        .map(|m| m + &Operator::identity(n).scale(shift))
        .collect();
    let (mut u, ranks) = frame_of(current);
    let mut best = projectors_from_frame(&u, &ranks);
    let mut best_val = objective(targets, &best);
    for _ in 0..POLAR_STEPS {
        let mut grad = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        let mut start = 0;
        for (m, &r) in shifted.iter().zip(&ranks) {
            if r > 0 {
                let cols = u.matrix().columns(start, r).into_owned();
                let block = m.matrix() * cols;
                grad.columns_mut(start, r).copy_from(&block);
            }
            start += r;
        }
        u = polar_factor(&Operator::from_matrix(grad).expect("square"));
        let meas = projectors_from_frame(&u, &ranks);
        let val = objective(targets, &meas);
        let gained = val - best_val;
        if gained > 0.0 {
            best = meas;
            best_val = val;
        }
        if gained <= 1e-14 {
            break;
        }
    }
    best
}

fn random_strategy(g: &NonlocalGame, cfg: &SeesawConfig, rng: &mut ChaCha8Rng) -> Result<QuantumStrategy> {
    let state = random::haar_state(vec![cfg.dim_a, cfg.dim_b], rng);
    let meas_a = (0..g.nx)
        .map(|_| random::projective_measurement(cfg.dim_a, g.na, rng))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|q| q.into_iter().map(|p| p.hermitian_part()).collect())
        .collect();
    let meas_b = (0..g.ny)
        .map(|_| random::projective_measurement(cfg.dim_b, g.nb, rng))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|q| q.into_iter().map(|p| p.hermitian_part()).collect())
        .collect();
    QuantumStrategy::new(cfg.dim_a, cfg.dim_b, state, meas_a, meas_b)
}

/// One see-saw sweep: state, then Alice's measurements, then Bob's.
fn sweep(g: &NonlocalGame, s: &mut QuantumStrategy) -> Result<()> {
    let bell = bell_operator(g, s)?.hermitian_part();
    let (_, top) = principal_eigvec(&bell)?;
    s.state = StateVector::new(vec![s.dim_a, s.dim_b], top.amps().iter().copied().collect())?;
    let psi = s.state_matrix();
    let new_a: Vec<Vec<Operator>> = (0..g.nx)
        .map(|x| improve_measurement(&alice_targets(g, s, &psi, x), &s.meas_a[x]))
        .collect();
    s.meas_a = new_a;
    let new_b: Vec<Vec<Operator>> = (0..g.ny)
        .map(|y| improve_measurement(&bob_targets(g, s, &psi, y), &s.meas_b[y]))
        .collect();
    s.meas_b = new_b;
    Ok(())
}

/// Ascend from a given starting strategy.
pub fn ascend(
    g: &NonlocalGame,
    mut s: QuantumStrategy,
    max_iters: usize,
    tol: f64,
) -> Result<(QuantumStrategy, RestartResult)> {
    check_shapes(g, &s)?;
    let mut value = strategy_value(g, &s)?;
    let mut trajectory = vec![(0, value)];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iters {
        sweep(g, &mut s)?;
        let next = strategy_value(g, &s)?;
        trajectory.push((it, next));
        iterations = it;
        let gained = next - value;
        value = next;
        if gained < tol {
            converged = true;
            break;
        }
    }
    debug_assert!(validate_strategy(&s).max_defect() < 1e-8);
    Ok((
        s,
        RestartResult {
            restart: 0,
            best_value: value,
            iterations,
            converged,
            trajectory,
        },
    ))
}

pub fn optimize(g: &NonlocalGame, cfg: &SeesawConfig) -> Result<SeesawReport> {
    cfg.validate()?;
    let runs: Vec<(QuantumStrategy, RestartResult)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ r as u64);
            let start = random_strategy(g, cfg, &mut rng)?;
            let (s, mut res) = ascend(g, start, cfg.max_iters, cfg.tol)?;
            res.restart = r;
            Ok((s, res))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, (_, res)) in runs.iter().enumerate() {
        if res.best_value > runs[best].1.best_value {
            best = k;
        }
    }
    let best_strategy = runs[best].0.clone();
    let best_value = strategy_value(g, &best_strategy)?;
    Ok(SeesawReport {
        config: cfg.clone(),
        best_value,
        best_restart: best,
        best_strategy,
        restarts: runs.into_iter().map(|(_, r)| r).collect(),
    })
}

/// `S ⊗ (|0⟩|0⟩, I, I)`: the same correlation on larger local spaces.
pub fn pad_strategy(s: &QuantumStrategy, factor_a: usize, factor_b: usize) -> Result<QuantumStrategy> {
    if factor_a == 0 || factor_b == 0 {
        return Err(Error::invalid("padding factors must be positive"));
    }
    let (da, db) = (s.dim_a * factor_a, s.dim_b * factor_b);
    let psi = s.state_matrix();
    let mut m = DMatrix::from_element(da, db, C64::new(0.0, 0.0));
    for i in 0..s.dim_a {
        for j in 0..s.dim_b {
            m[(i * factor_a, j * factor_b)] = psi[(i, j)];
        }
    }
    let state = StateVector::from_matrix(vec![da, db], &m)?;
    let grow = |meas: &[Vec<Operator>], f: usize| -> Vec<Vec<Operator>> {
        meas.iter()
            .map(|q| q.iter().map(|p| p.tensor(&Operator::identity(f))).collect())
            .collect()
    };
    QuantumStrategy::new(da, db, state, grow(&s.meas_a, factor_a), grow(&s.meas_b, factor_b))
}

/// Run `optimize` at each dimension pair in turn. From the second level on,
/// the previous level's best strategy, padded, is ascended as one extra
/// start, so best values never decrease along the ladder.
pub fn optimize_ladder(g: &NonlocalGame, dims: &[(usize, usize)], cfg: &SeesawConfig) -> Result<Vec<SeesawReport>> {
    let mut reports: Vec<SeesawReport> = Vec::with_capacity(dims.len());
    for &(da, db) in dims {
        let level = SeesawConfig {
            dim_a: da,
            dim_b: db,
            ..cfg.clone()
        };
        let mut report = optimize(g, &level)?;
        if let Some(prev) = reports.last() {
            let p = &prev.best_strategy;
            if da % p.dim_a != 0 || db % p.dim_b != 0 {
                return Err(Error::invalid(format!(
                    "ladder dims ({da}, {db}) are not multiples of ({}, {})",
                    p.dim_a, p.dim_b
                )));
            }
            let start = pad_strategy(p, da / p.dim_a, db / p.dim_b)?;
            let (s, mut res) = ascend(g, start, cfg.max_iters, cfg.tol)?;
            res.restart = report.restarts.len();
            let value = strategy_value(g, &s)?;
            if value > report.best_value {
                report.best_value = value;
                report.best_restart = res.restart;
                report.best_strategy = s;
            }
            report.restarts.push(res);
        }
        reports.push(report);
    }
    Ok(reports)
}
