//! Coherent state exchange: a referee hands the provers one of two orthogonal
//! qutrit states in superposition and checks that they return the matching
//! qubit GHZ component.
//!
//! Register order: `R`, then Alice `(S, A′, F_A)`, then Bob `(T, B′, F_B)`,
//! each group most significant first. `F` is the fresh output qubit.

use serde::Serialize;

use crate::embezzlement::{gamma_dense, EmbeddedShift};
use crate::error::{Error, Result};
use crate::numerics::{Operator, StateVector, C64};

/// Largest embezzler index evaluated densely.
pub const EXCHANGE_CAP: usize = 8;

/// Referee side of the game.
#[derive(Clone, Debug)]
pub struct ExchangeInstance {
    /// Qutrit levels carrying the entangled branch.
    pub phi_plus_levels: (usize, usize),
    /// `(1/√2)(|0⟩|00⟩ + |1⟩|φ⁺⟩)` on `R ⊗ S ⊗ T`.
    pub referee_state: StateVector,
}

impl ExchangeInstance {
    pub fn new(levels: (usize, usize)) -> Result<Self> {
        let (l0, l1) = levels;
        if l0 == l1 || l0 > 2 || l1 > 2 {
            return Err(Error::invalid(format!("phi+ levels must be two distinct qutrit levels, got {levels:?}")));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = [0.0; 18];
        amps[0] += h;
        // R = 1 block starts at 9; ST index = 3s + t
        amps[9 + 3 * l0 + l0] += 0.5;
        amps[9 + 3 * l1 + l1] += 0.5;
        Ok(Self {
            phi_plus_levels: levels,
            referee_state: StateVector::from_real(vec![2, 3, 3], &amps)?,
        })
    }

    /// `⟨00|φ⁺⟩` on `S ⊗ T`.
    pub fn branch_overlap(&self) -> f64 {
        let (l0, l1) = self.phi_plus_levels;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        h * (f64::from(u8::from(l0 == 0)) + f64::from(u8::from(l1 == 0)))
    }

    /// `(Π₀, Π₁)` on `R ⊗ F_A ⊗ F_B` with `Π₁ = |γ⟩⟨γ|`.
    pub fn projectors() -> (Operator, Operator) {
        let pi1 = Operator::outer(&ghz());
        (&Operator::identity(8) - &pi1, pi1)
    }
}

impl Default for ExchangeInstance {
    fn default() -> Self {
        Self::new((1, 2)).expect("default levels are valid")
    }
}

/// `(|000⟩ + |111⟩)/√2`.
pub fn ghz() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = [0.0; 8];
    amps[0] = h;
    amps[7] = h;
    StateVector::from_real(vec![2, 2, 2], &amps).expect("shape")
}

/// Prover side: embezzler halves and one local permutation unitary each.
#[derive(Clone, Debug)]
pub struct ExchangeStrategy {
    pub d: usize,
    /// Shared auxiliary state on `A′ ⊗ B′`.
    pub aux: StateVector,
    /// `u|k⟩ = |perm[k]⟩` on `S ⊗ A′ ⊗ F`.
    pub perm_a: Vec<usize>,
    pub perm_b: Vec<usize>,
}

/// Register bookkeeping reported with results.
#[derive(Clone, Debug, Serialize)]
pub struct ExchangeLayout {
    pub qutrit: usize,
    pub embezzler: usize,
    pub output: usize,
    pub local_dim: usize,
}

impl ExchangeStrategy {
    pub fn embezzler_dim(&self) -> usize {
        1 << self.d
    }

    /// `3 · 2^d · 2`.
    pub fn local_dim(&self) -> usize {
        self.perm_a.len()
    }

    pub fn layout(&self) -> ExchangeLayout {
        ExchangeLayout {
            qutrit: 3,
            embezzler: self.embezzler_dim(),
            output: 2,
            local_dim: self.local_dim(),
        }
    }

    pub fn unitary_a(&self) -> Operator {
        Operator::permutation(&self.perm_a)
    }

    pub fn unitary_b(&self) -> Operator {
        Operator::permutation(&self.perm_b)
    }

    /// Same strategy with the embezzler halves exchanged between provers.
    pub fn swapped(&self) -> Self {
        let n = self.embezzler_dim();
        let mut amps = vec![C64::new(0.0, 0.0); n * n];
        for a in 0..n {
            for b in 0..n {
                amps[b * n + a] = self.aux.amp(a * n + b);
            }
        }
        Self {
            d: self.d,
            aux: StateVector::new(vec![n, n], amps).expect("shape"),
            perm_a: self.perm_b.clone(),
            perm_b: self.perm_a.clone(),
        }
    }
}

/// Provers share `Γ_d`, apply the corrected embedded shift to (qutrit,
/// embezzler half), then move qutrit levels {0, 1} into the output qubit.
/// A qutrit left at level 2 acts as a flag.
pub fn build_exchange_strategy(d: usize) -> Result<ExchangeStrategy> {
    if d == 0 {
        return Err(Error::invalid("embezzler index d must be at least 1"));
    }
    if d > EXCHANGE_CAP {
        return Err(Error::cap("dense exchange index d", d as u128, EXCHANGE_CAP as u128));
    }
    let shift = EmbeddedShift::new(d)?;
    let n = 1usize << d;
    let perm: Vec<usize> = (0..3 * n * 2)
        .map(|k| {
            let (sa, f) = (k / 2, k % 2);
            let image = shift.perm()[sa];
            let (s, a) = (image / n, image % n);
            // |1⟩_S|0⟩_F ↔ |0⟩_S|1⟩_F
            let (s, f) = match (s, f) {
                (1, 0) => (0, 1),
                (0, 1) => (1, 0),
                other => other,
            };
            (s * n + a) * 2 + f
        })
        .collect();
    Ok(ExchangeStrategy {
        d,
        aux: gamma_dense(d)?,
        perm_a: perm.clone(),
        perm_b: perm,
    })
}

/// Joint state before the provers act, in the module's register order.
fn initial_state(s: &ExchangeStrategy, inst: &ExchangeInstance) -> Vec<C64> {
    let n = s.embezzler_dim();
    let local = s.local_dim();
    let mut amps = vec![C64::new(0.0, 0.0); 2 * local * local];
    for r in 0..2 {
        for st in 0..9 {
            let z = inst.referee_state.amp(r * 9 + st);
            if z == C64::new(0.0, 0.0) {
                continue;
            }
            let (sq, tq) = (st / 3, st % 3);
            for a in 0..n {
                for b in 0..n {
                    let g = s.aux.amp(a * n + b);
                    if g == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let ia = (sq * n + a) * 2;
                    let ib = (tq * n + b) * 2;
                    amps[(r * local + ia) * local + ib] = z * g;
                }
            }
        }
    }
    amps
}

fn apply_provers(s: &ExchangeStrategy, amps: &[C64]) -> Vec<C64> {
    let local = s.local_dim();
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    for r in 0..2 {
        for i in 0..local {
            for j in 0..local {
                let z = amps[(r * local + i) * local + j];
                if z != C64::new(0.0, 0.0) {
                    out[(r * local + s.perm_a[i]) * local + s.perm_b[j]] = z;
                }
            }
        }
    }
    out
}

/// `⟨Π₁⟩` where `Π₁ = |γ⟩⟨γ|` on `(R, F_A, F_B)` and the output qubit is the
/// least significant digit of each local index.
pub fn referee_accept(amps: &[C64], local: usize) -> Result<f64> {
    if local % 2 != 0 || amps.len() != 2 * local * local {
        return Err(Error::shape("final state does not match the register layout"));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rest = local / 2;
    let mut total = 0.0;
    for ia in 0..rest {
        for ib in 0..rest {
            let zero = amps[(ia * 2) * local + ib * 2];
            let one = amps[(local + ia * 2 + 1) * local + ib * 2 + 1];
            total += ((zero + one) * h).norm_sqr();
        }
    }
    Ok(total)
}

/// Probability the referee accepts.
pub fn success_probability(s: &ExchangeStrategy, inst: &ExchangeInstance) -> Result<f64> {
    let n = s.embezzler_dim();
    if s.perm_a.len() != 6 * n || s.perm_b.len() != 6 * n || s.aux.len() != n * n {
        return Err(Error::shape("strategy registers do not match its embezzler index"));
    }
    let after = apply_provers(s, &initial_state(s, inst));
    referee_accept(&after, s.local_dim())
}

/// Probability that either prover's qutrit ends at level 2.
pub fn flag_probability(s: &ExchangeStrategy, inst: &ExchangeInstance) -> f64 {
    let n = s.embezzler_dim();
    let local = s.local_dim();
    let after = apply_provers(s, &initial_state(s, inst));
    let flagged = |k: usize| k / (2 * n) == 2;
    let mut total = 0.0;
    for r in 0..2 {
        for i in 0..local {
            for j in 0..local {
                if flagged(i) || flagged(j) {
                    total += after[(r * local + i) * local + j].norm_sqr();
                }
            }
        }
    }
    total
}

/// `1 − 1/(32 · log₂²(3n))` for prover local dimension `n`.
pub fn ltw_bound(local_dim: usize) -> Result<f64> {
    if local_dim == 0 {
        return Err(Error::invalid("local dimension must be positive"));
    }
    let l = (3.0 * local_dim as f64).log2();
    Ok(1.0 - 1.0 / (32.0 * l * l))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExchangeRow {
    pub d: usize,
    pub local_dim: usize,
    pub success_prob: f64,
    pub ltw_bound: f64,
}

impl ExchangeRow {
    pub const HEADER: [&'static str; 4] = ["d", "local_dim", "success_prob", "ltw_bound"];
}

pub fn exchange_row(d: usize, inst: &ExchangeInstance) -> Result<ExchangeRow> {
    let s = build_exchange_strategy(d)?;
    Ok(ExchangeRow {
        d,
        local_dim: s.local_dim(),
        success_prob: success_probability(&s, inst)?,
        ltw_bound: ltw_bound(s.local_dim())?,
    })
}
