//! The embezzling family `Γ_d`, its left-shift unitaries, and an exact
//! structured evaluator for the ideal embezzlement-game strategies at any `d`.
//!
//! Every overlap reduces to `⟨term_j|term_k⟩ = r^{|j−k|}` with `r = 1/√2`
//! (one factor `⟨11|EPR⟩` per register pair where the terms differ).

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::{
    correlation_value, shipped_emb, strategy_value, Correlation, EmbQuestionMap, NonlocalGame, Part,
    EMB_ALICE_SPLIT, EMB_BOB_SPLIT, EMB_TILT_ALPHA,
};
use crate::numerics::{Operator, StateVector, TiltedParams, C64};
use crate::strategies::{ideal_three_chsh, tchsh_projectors, three_chsh_measurements};

/// Largest `d` for which `Γ_d` and the shift are built as dense arrays.
pub const DENSE_CAP: usize = 10;
/// Largest `d` for the dense ideal strategy; its 33 local operators of side
/// `3·2^d` would need several GB at `d = 10`.
pub const IDEAL_EMB_CAP: usize = 8;

const R: f64 = FRAC_1_SQRT_2;
const TAIL_CUTOFF: f64 = 1.0 / (1u64 << 60) as f64;

fn check_dense(d: usize, what: &'static str, cap: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("embezzler index d must be at least 1"));
    }
    if d > cap {
        return Err(Error::cap(what, d as u128, cap as u128));
    }
    Ok(())
}

/// Amplitude of `|a⟩|a⟩` in the unnormalized sum of terms `j ∈ lo..=hi`,
/// where term `j` has its first `j` pairs in `|11⟩` and the rest in EPR.
fn diagonal_amp(a: usize, d: usize, lo: usize, hi: usize) -> f64 {
    let mut total = 0.0;
    for j in lo..=hi {
        // pairs 1..=j are the j most significant bits and must all be set
        let top = if j == 0 { 0 } else { a >> (d - j) };
        if top == (1 << j) - 1 {
            total += R.powi((d - j) as i32);
        }
    }
    total
}

fn family_state(d: usize, lo: usize, hi: usize) -> Result<StateVector> {
    let n = 1usize << d;
    let norm = gram_summary(d)?.n_d.sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n {
        amps[a * n + a] = C64::new(diagonal_amp(a, d, lo, hi) / norm, 0.0);
    }
    StateVector::new(vec![n, n], amps)
}

/// `Γ_d` on `A′ ⊗ B′`, `A′` block most significant, pair 1 the leading qubit
/// of each block.
pub fn gamma_dense(d: usize) -> Result<StateVector> {
    check_dense(d, "dense embezzler index d", DENSE_CAP)?;
    family_state(d, 1, d)
}

/// `γ′_d`, the embezzler left behind after one shift: terms `j = 0..d−1`.
pub fn shifted_gamma_dense(d: usize) -> Result<StateVector> {
    check_dense(d, "dense embezzler index d", DENSE_CAP)?;
    family_state(d, 0, d - 1)
}

/// Basis map of the cyclic left shift on `d + 1` qubit registers; register 0
/// is the most significant bit.
fn shift_index(n: usize, d: usize, corrected: bool) -> usize {
    let mask = (1usize << (d + 1)) - 1;
    let shifted = ((n << 1) | (n >> d)) & mask;
    if corrected {
        shifted ^ (1 << d)
    } else {
        shifted
    }
}

/// Left shift on `(ℂ²)^{⊗(d+1)}`; `corrected` follows it with `σˣ` on
/// register 0.
pub fn shift_unitary(d: usize, corrected: bool) -> Result<Operator> {
    check_dense(d, "dense shift index d", DENSE_CAP)?;
    let perm: Vec<usize> = (0..1usize << (d + 1)).map(|n| shift_index(n, d, corrected)).collect();
    Ok(Operator::permutation(&perm))
}

/// The corrected shift embedded on qutrit levels {1, 2}:
/// `W̃ = |0⟩⟨0| ⊗ I ⊕ (V ⊗ I) W′ (V† ⊗ I)` on `ℂ³ ⊗ (ℂ²)^{⊗d}`.
#[derive(Clone, Debug)]
pub struct EmbeddedShift {
    pub d: usize,
    perm: Vec<usize>,
}

impl EmbeddedShift {
    pub fn new(d: usize) -> Result<Self> {
        check_dense(d, "dense shift index d", DENSE_CAP)?;
        let n = 1usize << d;
        let perm = (0..3 * n)
            .map(|k| {
                let (level, a) = (k / n, k % n);
                if level == 0 {
                    return k;
                }
                let image = shift_index((level - 1) * n + a, d, true);
                (image / n + 1) * n + image % n
            })
            .collect();
        Ok(Self { d, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// `W̃|k⟩ = |perm[k]⟩`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn matrix(&self) -> Operator {
        Operator::permutation(&self.perm)
    }

    /// `W̃† M W̃`.
    pub fn conjugate(&self, m: &Operator) -> Operator {
        let n = self.dim();
        assert_eq!(m.dim(), n, "operator does not act on the shifted space");
        let src = m.matrix();
        let out = nalgebra::DMatrix::from_fn(n, n, |i, j| src[(self.perm[i], self.perm[j])]);
        Operator::from_matrix(out).expect("square")
    }

    /// `(W̃ ⊗ W̃)|Ψ⟩` for a state on two copies of the shifted space.
    pub fn apply_both(&self, state: &StateVector) -> Result<StateVector> {
        let n = self.dim();
        if state.len() != n * n {
            return Err(Error::shape(format!("state of length {} vs {n}x{n}", state.len())));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                amps[self.perm[i] * n + self.perm[j]] = state.amp(i * n + j);
            }
        }
        StateVector::new(state.dims().to_vec(), amps)
    }
}

/// `|front⟩ ⊗ |Γ⟩` regrouped so each player holds (front half, embezzler half).
pub fn attach_embezzler(front: &StateVector, front_dim: usize, gamma: &StateVector) -> Result<StateVector> {
    let f = front.as_matrix(front_dim)?;
    if f.ncols() != front_dim {
        return Err(Error::shape("front state must be on two equal local spaces"));
    }
    let n = (gamma.len() as f64).sqrt().round() as usize;
    if n * n != gamma.len() {
        return Err(Error::shape("embezzler state must be on two equal local spaces"));
    }
    let local = front_dim * n;
    let mut amps = vec![C64::new(0.0, 0.0); local * local];
    for i in 0..front_dim {
        for j in 0..front_dim {
            let z = f[(i, j)];
            if z == C64::new(0.0, 0.0) {
                continue;
            }
            for a in 0..n {
                for b in 0..n {
                    amps[(i * n + a) * local + (j * n + b)] = z * gamma.amp(a * n + b);
                }
            }
        }
    }
    StateVector::new(vec![local, local], amps)
}

/// Overlap quantities of `Γ_d` and its shift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmbezzlerGram {
    pub d: usize,
    /// `N_d = Σ_{j,k=1..d} r^{|j−k|}`.
    pub n_d: f64,
    /// `⟨Γ_d|γ′_d⟩`.
    pub x_d: f64,
    /// `1 − x_d = (1 − r^d)/N_d`, kept separately to avoid cancellation.
    pub gap: f64,
    /// `‖|11⟩γ′_d − |11⟩Γ_d‖ = √(2 − 2x_d)`.
    pub deviation: f64,
    /// `⟨Γ_d|ψ⟩` for the shift applied on one side only.
    pub y_d: f64,
}

/// Gram quantities from running sums over `m = |j−k|` ascending. The sum
/// stops once the remaining tail, at most `d·r^m/(1−r)`, is below `2^−60` of
/// the partial sum, so the cost is `O(min(d, log d))` per index.
pub fn gram_summary(d: usize) -> Result<EmbezzlerGram> {
    if d == 0 {
        return Err(Error::invalid("embezzler index d must be at least 1"));
    }
    let tail_factor = d as f64 / (1.0 - R);
    let mut off_diagonal = 0.0;
    let mut power = 1.0;
    for m in 1..d {
        power *= R;
        off_diagonal += (d - m) as f64 * power;
        if tail_factor * power * R < off_diagonal * TAIL_CUTOFF {
            break;
        }
    }
    let n_d = d as f64 + 2.0 * off_diagonal;
    let r_d = R.powi(d.min(i32::MAX as usize) as i32);
    let gap = (1.0 - r_d) / n_d;
    let geometric = (1.0 - r_d) / (1.0 - R);
    Ok(EmbezzlerGram {
        d,
        n_d,
        x_d: 1.0 - gap,
        gap,
        deviation: (2.0 * gap).sqrt(),
        y_d: geometric * geometric / n_d,
    })
}

/// `gram_summary` for each `d`, evaluated independently in parallel.
pub fn gram_sweep(ds: &[usize]) -> Result<Vec<EmbezzlerGram>> {
    ds.par_iter().map(|&d| gram_summary(d)).collect()
}

/// Literal double sum `Σ_j Σ_k r^{|j−k|}` over `j, k ∈ lo..lo+d`, `j`
/// ascending then `k` ascending. `O(d²)`; used as an oracle.
pub fn pairwise_normalizer(d: usize, lo: usize) -> f64 {
    let powers: Vec<f64> = (0..d).map(|m| R.powi(m as i32)).collect();
    let mut total = 0.0;
    for j in lo..lo + d {
        for k in lo..lo + d {
            total += powers[j.abs_diff(k)];
        }
    }
    total
}

type Block = Matrix3<f64>;

fn real_block(op: &Operator) -> Block {
    assert_eq!(op.dim(), 3);
    Block::from_fn(|i, j| {
        let z = op.get(i, j);
        debug_assert!(z.im == 0.0);
        z.re
    })
}

/// Nonzero residual overlaps `⟨χ_ij|χ_kl⟩` of the state written as
/// `Σ |i⟩|j⟩ ⊗ χ_ij`, for one choice of which players have been shifted.
type Overlap = ((usize, usize), (usize, usize), f64);

fn residual_overlaps(shift_a: bool, shift_b: bool, x: f64, y: f64) -> Vec<Overlap> {
    let third = 1.0 / 3.0;
    let mut entries = Vec::new();
    let mut sym = |p: (usize, usize), q: (usize, usize), v: f64| {
        entries.push((p, q, v));
        if p != q {
            entries.push((q, p, v));
        }
    };
    match (shift_a, shift_b) {
        (false, false) => {
            for i in 0..3 {
                for k in 0..3 {
                    entries.push(((i, i), (k, k), third));
                }
            }
        }
        (true, true) => {
            sym((0, 0), (0, 0), third);
            sym((1, 1), (1, 1), 2.0 * third);
            sym((0, 0), (1, 1), 2f64.sqrt() * third * x);
        }
        (false, true) => {
            for p in [(0, 0), (1, 1), (2, 1)] {
                sym(p, p, third);
            }
            sym((0, 0), (2, 1), third * y);
        }
        (true, false) => {
            for p in [(0, 0), (1, 1), (1, 2)] {
                sym(p, p, third);
            }
            sym((0, 0), (1, 2), third * y);
        }
    }
    entries
}

/// Measurement blocks and per-pair evaluation of the ideal strategies `S_d`
/// on the composed game, parameterized by the Gram quantities only.
#[derive(Clone, Debug)]
pub struct StructuredEngine {
    game: NonlocalGame,
    map: EmbQuestionMap,
    blocks_a: Vec<Vec<Block>>,
    blocks_b: Vec<Vec<Block>>,
    /// Ideal 3-CHSH value on the sub-game.
    pub omega_three: f64,
    /// `part_b(d) = coef_a + coef_b·x_d`.
    pub coef_a: f64,
    pub coef_b: f64,
}

impl StructuredEngine {
    pub fn new(game: NonlocalGame, map: EmbQuestionMap, three_chsh: &NonlocalGame) -> Result<Self> {
        let (three_a, three_b) = three_chsh_measurements();
        let (first, second) = tchsh_projectors(EMB_TILT_ALPHA, true)?;
        let low = |p: &[Operator; 2]| -> Vec<Block> {
            let mut v: Vec<Block> = p
                .iter()
                .map(|q| {
                    Block::from_fn(|i, j| if i < 2 && j < 2 { q.get(i, j).re } else { 0.0 })
                })
                .collect();
            let mut rest = Block::zeros();
            rest[(2, 2)] = 1.0;
            v.push(rest);
            v
        };
        let mut blocks_a: Vec<Vec<Block>> = three_a.iter().map(|q| q.iter().map(real_block).collect()).collect();
        blocks_a.extend(second.iter().map(low));
        let mut blocks_b: Vec<Vec<Block>> = three_b.iter().map(|q| q.iter().map(real_block).collect()).collect();
        blocks_b.extend(first.iter().map(low));
        let omega_three = strategy_value(three_chsh, &ideal_three_chsh())?;
        let mut engine = Self {
            game,
            map,
            blocks_a,
            blocks_b,
            omega_three,
            coef_a: 0.0,
            coef_b: 0.0,
        };
        let at_zero = engine.part_b_at(0.0)?;
        let at_one = engine.part_b_at(1.0)?;
        engine.coef_a = at_zero;
        engine.coef_b = at_one - at_zero;
        Ok(engine)
    }

    /// Engine for the shipped 3-CHSH fixture, built once.
    pub fn shipped() -> &'static StructuredEngine {
        static ENGINE: OnceLock<StructuredEngine> = OnceLock::new();
        ENGINE.get_or_init(|| {
            let (game, map) = shipped_emb();
            let three = crate::games::shipped_three_chsh();
            StructuredEngine::new(game, map, &three).expect("shipped engine builds")
        })
    }

    pub fn game(&self) -> &NonlocalGame {
        &self.game
    }

    pub fn map(&self) -> &EmbQuestionMap {
        &self.map
    }

    /// Correlation with `⟨Γ|γ′⟩ = x` and one-sided overlap `y`.
    pub fn correlation_at(&self, x: f64, y: f64) -> Result<Correlation> {
        let (nx, ny) = (self.blocks_a.len(), self.blocks_b.len());
        let overlaps: Vec<_> = [(false, false), (false, true), (true, false), (true, true)]
            .iter()
            .map(|&(sa, sb)| residual_overlaps(sa, sb, x, y))
            .collect();
        Correlation::from_fn((nx, ny, 3, 3), |qx, qy, a, b| {
            let config = 2 * usize::from(qx >= EMB_ALICE_SPLIT) + usize::from(qy >= EMB_BOB_SPLIT);
            let (pa, pb) = (&self.blocks_a[qx][a], &self.blocks_b[qy][b]);
            overlaps[config]
                .iter()
                .map(|&((i, j), (k, l), v)| pa[(i, k)] * pb[(j, l)] * v)
                .sum()
        })
    }

    fn part_b_at(&self, x: f64) -> Result<f64> {
        let c = self.correlation_at(x, 0.0)?;
        Ok(self.map.contributions(&self.game, &c)?.restricted(Part::B))
    }

    pub fn correlation(&self, d: usize) -> Result<Correlation> {
        let g = gram_summary(d)?;
        self.correlation_at(g.x_d, g.y_d)
    }

    /// Limit `d → ∞`: `x = 1`, `y = 0`.
    pub fn limit_correlation(&self) -> Correlation {
        self.correlation_at(1.0, 0.0).expect("limit correlation is valid")
    }

    /// `⅓(ω̂₃ + 3/√17 + 1)`.
    pub fn ideal_value(&self) -> f64 {
        let tilted = TiltedParams::from_alpha(EMB_TILT_ALPHA).expect("fixed ratio").quantum_value();
        (self.omega_three + tilted + 1.0) / 3.0
    }

    pub fn part_b(&self, g: &EmbezzlerGram) -> f64 {
        self.coef_a + self.coef_b * g.x_d
    }

    pub fn emb_value(&self, g: &EmbezzlerGram) -> f64 {
        (self.omega_three + self.part_b(g) + 1.0) / 3.0
    }

    /// `ω̂* − emb_value`, from the gap directly.
    pub fn epsilon(&self, g: &EmbezzlerGram) -> f64 {
        self.coef_b * g.gap / 3.0
    }

    pub fn curve_row(&self, d: usize) -> Result<CurveRow> {
        let g = gram_summary(d)?;
        Ok(CurveRow {
            d,
            n_d: g.n_d,
            x_d: g.x_d,
            deviation: g.deviation,
            part_b: self.part_b(&g),
            emb_value: self.emb_value(&g),
            epsilon: self.epsilon(&g),
        })
    }

    pub fn curve(&self, ds: &[usize]) -> Result<Vec<CurveRow>> {
        ds.par_iter().map(|&d| self.curve_row(d)).collect()
    }

    /// Value of a correlation on the composed game.
    pub fn value_of(&self, c: &Correlation) -> Result<f64> {
        correlation_value(&self.game, c)
    }
}

/// One line of the value curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub d: usize,
    pub n_d: f64,
    pub x_d: f64,
    pub deviation: f64,
    pub part_b: f64,
    pub emb_value: f64,
    pub epsilon: f64,
}

impl CurveRow {
    pub const HEADER: [&'static str; 7] = ["d", "n_d", "x_d", "deviation", "part_b", "emb_value", "epsilon"];

    pub fn values(&self) -> [f64; 6] {
        [self.n_d, self.x_d, self.deviation, self.part_b, self.emb_value, self.epsilon]
    }
}

/// Part-(b) restricted value of `S_d` from the structured engine.
pub fn part_b_value_structured(d: usize) -> Result<f64> {
    Ok(StructuredEngine::shipped().part_b(&gram_summary(d)?))
}

/// `ω(S_d, G_emb)` from the structured engine.
pub fn emb_value(d: usize) -> Result<f64> {
    Ok(StructuredEngine::shipped().emb_value(&gram_summary(d)?))
}

pub fn limit_correlation() -> Correlation {
    StructuredEngine::shipped().limit_correlation()
}
