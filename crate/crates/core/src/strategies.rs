//! Quantum strategies and the ideal constructions for every game in the crate.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::embezzlement::{attach_embezzler, gamma_dense, EmbeddedShift, IDEAL_EMB_CAP};
use crate::error::{Error, Result};
use crate::numerics::{
    eig_projectors, embed_low, embed_v, sigma_x, sigma_z, tilted_paulis, Operator, StateVector,
    TiltedParams, C64,
};

/// Per-question tolerance on `Σ_a P^a = I` and `P² = P`.
pub const MEASUREMENT_TOL: f64 = 1e-10;

/// Shared state and projective measurements for both players.
#[derive(Clone, Debug)]
pub struct QuantumStrategy {
    pub dim_a: usize,
    pub dim_b: usize,
    pub state: StateVector,
    pub meas_a: Vec<Vec<Operator>>,
    pub meas_b: Vec<Vec<Operator>>,
}

impl QuantumStrategy {
    /// Build and check against [`MEASUREMENT_TOL`].
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        state: StateVector,
        meas_a: Vec<Vec<Operator>>,
        meas_b: Vec<Vec<Operator>>,
    ) -> Result<Self> {
        let s = Self {
            dim_a,
            dim_b,
            state,
            meas_a,
            meas_b,
        };
        s.check_shapes()?;
        let diag = validate_strategy(&s);
        if !diag.is_valid(MEASUREMENT_TOL) {
            return Err(Error::invalid(format!("strategy fails validation: {diag}")));
        }
        Ok(s)
    }

    fn check_shapes(&self) -> Result<()> {
        if self.state.len() != self.dim_a * self.dim_b {
            return Err(Error::shape(format!(
                "state has {} amplitudes, dims are {}x{}",
                self.state.len(),
                self.dim_a,
                self.dim_b
            )));
        }
        for (side, meas, dim) in [("A", &self.meas_a, self.dim_a), ("B", &self.meas_b, self.dim_b)] {
            if meas.is_empty() {
                return Err(Error::shape(format!("player {side} has no questions")));
            }
            let n = meas[0].len();
            if n == 0 || meas.iter().any(|m| m.len() != n) {
                return Err(Error::shape(format!("player {side} has ragged answer sets")));
            }
            if meas.iter().flatten().any(|op| op.dim() != dim) {
                return Err(Error::shape(format!("player {side} operator is not {dim}x{dim}")));
            }
        }
        Ok(())
    }

    /// Amplitudes as a `dim_a × dim_b` matrix.
    pub fn state_matrix(&self) -> DMatrix<C64> {
        self.state.as_matrix(self.dim_a).expect("state shape checked at construction")
    }

    pub fn questions(&self) -> (usize, usize) {
        (self.meas_a.len(), self.meas_b.len())
    }

    pub fn answers(&self) -> (usize, usize) {
        (self.meas_a[0].len(), self.meas_b[0].len())
    }

    pub fn to_file(&self) -> StrategyFile {
        let pairs = |z: &C64| [z.re, z.im];
        let op = |o: &Operator| {
            let m = o.matrix();
            let n = o.dim();
            let mut out = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    out.push(pairs(&m[(i, j)]));
                }
            }
            out
        };
        StrategyFile {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            state: self.state.amps().iter().map(pairs).collect(),
            meas_a: self.meas_a.iter().map(|q| q.iter().map(op).collect()).collect(),
            meas_b: self.meas_b.iter().map(|q| q.iter().map(op).collect()).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: StrategyFile = serde_json::from_str(s).map_err(|e| Error::schema(e.to_string()))?;
        file.into_strategy()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json_str(&text)
    }
}

/// JSON form: amplitudes and row-major matrix entries as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyFile {
    pub dim_a: usize,
    pub dim_b: usize,
    pub state: Vec<[f64; 2]>,
    pub meas_a: Vec<Vec<Vec<[f64; 2]>>>,
    pub meas_b: Vec<Vec<Vec<[f64; 2]>>>,
}

impl StrategyFile {
    pub fn into_strategy(self) -> Result<QuantumStrategy> {
        let amps: Vec<C64> = self.state.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let state = StateVector::new(vec![self.dim_a, self.dim_b], amps)?;
        let op = |dim: usize, entries: &Vec<[f64; 2]>| -> Result<Operator> {
            if entries.len() != dim * dim {
                return Err(Error::schema(format!(
                    "operator has {} entries, expected {}",
                    entries.len(),
                    dim * dim
                )));
            }
            Operator::from_matrix(DMatrix::from_fn(dim, dim, |i, j| {
                let [re, im] = entries[i * dim + j];
                C64::new(re, im)
            }))
        };
        let side = |dim: usize, list: &Vec<Vec<Vec<[f64; 2]>>>| -> Result<Vec<Vec<Operator>>> {
            list.iter()
                .map(|q| q.iter().map(|e| op(dim, e)).collect())
                .collect()
        };
        let meas_a = side(self.dim_a, &self.meas_a)?;
        let meas_b = side(self.dim_b, &self.meas_b)?;
        QuantumStrategy::new(self.dim_a, self.dim_b, state, meas_a, meas_b)
    }
}

/// Worst-case defects of a strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StrategyDiagnostics {
    /// `max |Σ_a P^a − I|` over questions of both players.
    pub completeness: f64,
    /// `max |P² − P|`.
    pub idempotence: f64,
    pub hermiticity: f64,
    /// `| ‖Ψ‖ − 1 |`.
    pub norm: f64,
}

impl StrategyDiagnostics {
    pub fn is_valid(&self, tol: f64) -> bool {
        self.completeness <= tol && self.idempotence <= tol && self.hermiticity <= tol && self.norm <= tol
    }

    pub fn max_defect(&self) -> f64 {
        self.completeness.max(self.idempotence).max(self.hermiticity).max(self.norm)
    }
}

impl std::fmt::Display for StrategyDiagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "completeness {:.3e}, idempotence {:.3e}, hermiticity {:.3e}, norm {:.3e}",
            self.completeness, self.idempotence, self.hermiticity, self.norm
        )
    }
}

pub fn validate_strategy(s: &QuantumStrategy) -> StrategyDiagnostics {
    let mut diag = StrategyDiagnostics {
        norm: s.state.norm_defect(),
        ..Default::default()
    };
    for (meas, dim) in [(&s.meas_a, s.dim_a), (&s.meas_b, s.dim_b)] {
        for question in meas {
            let mut sum = Operator::zeros(dim);
            for p in question {
                sum = &sum + p;
                diag.idempotence = diag.idempotence.max(p.idempotence_defect());
                diag.hermiticity = diag.hermiticity.max(p.hermiticity_defect());
            }
            diag.completeness = diag.completeness.max(sum.max_abs_diff(&Operator::identity(dim)));
        }
    }
    diag
}

/// Two-outcome projectors `[(I+O)/2, (I−O)/2]` of a ±1 observable.
fn binary(o: &Operator) -> [Operator; 2] {
    let split = eig_projectors(o).expect("Pauli-type observables are Hermitian");
    [split.plus, split.minus]
}

/// Swap answer labels and conjugate by `σˣ`.
fn flip(p: [Operator; 2]) -> [Operator; 2] {
    let x = sigma_x();
    [p[1].conjugate_by(&x), p[0].conjugate_by(&x)]
}

/// Two binary measurements, indexed `[question][answer]`.
pub type BinaryMeasurements = [[Operator; 2]; 2];

/// Qubit projectors for tilted CHSH as `(first player, second player)`.
pub fn tchsh_projectors(alpha: f64, flipped: bool) -> Result<(BinaryMeasurements, BinaryMeasurements)> {
    let params = TiltedParams::from_alpha(alpha)?;
    let (tz, tx) = tilted_paulis(&params);
    let mut first = [binary(&sigma_z()), binary(&sigma_x())];
    let mut second = [binary(&tz), binary(&tx)];
    if flipped {
        first = first.map(flip);
        second = second.map(flip);
    }
    Ok((first, second))
}

/// The optimal tilted CHSH strategy; `flipped` swaps answers and the basis
/// of the shared state to match the flipped game.
pub fn ideal_tchsh(alpha: f64, flipped: bool) -> Result<QuantumStrategy> {
    let (first, second) = tchsh_projectors(alpha, flipped)?;
    let norm = (1.0 + alpha * alpha).sqrt();
    let amps = if flipped {
        [alpha / norm, 0.0, 0.0, 1.0 / norm]
    } else {
        [1.0 / norm, 0.0, 0.0, alpha / norm]
    };
    let state = StateVector::from_real(vec![2, 2], &amps)?;
    QuantumStrategy::new(
        2,
        2,
        state,
        first.into_iter().map(Vec::from).collect(),
        second.into_iter().map(Vec::from).collect(),
    )
}

fn maximally_entangled_qutrits() -> StateVector {
    let c = 1.0 / 3f64.sqrt();
    let mut amps = [0.0; 9];
    for i in 0..3 {
        amps[i * 3 + i] = c;
    }
    StateVector::from_real(vec![3, 3], &amps).expect("shape")
}

fn level(k: usize) -> Operator {
    Operator::basis_projector(3, k)
}

/// Two-outcome qubit projectors placed on levels {0, 1}, level 2 as a third answer.
fn low_block(p: [Operator; 2]) -> Vec<Operator> {
    vec![
        embed_low(&p[0]).expect("qubit"),
        embed_low(&p[1]).expect("qubit"),
        level(2),
    ]
}

/// `|0⟩⟨0|` as answer 0, qubit projectors pushed to levels {1, 2}.
fn high_block(p: [Operator; 2]) -> Vec<Operator> {
    vec![
        level(0),
        embed_v(&p[0]).expect("qubit"),
        embed_v(&p[1]).expect("qubit"),
    ]
}

/// Qutrit measurements of the ideal 3-CHSH strategy, `(Alice, Bob)`.
pub fn three_chsh_measurements() -> (Vec<Vec<Operator>>, Vec<Vec<Operator>>) {
    let (tz, tx) = tilted_paulis(&TiltedParams::from_alpha(1.0).expect("alpha = 1"));
    let alice = vec![
        vec![level(0), level(1), level(2)],
        low_block(binary(&sigma_x())),
        high_block(binary(&sigma_x())),
    ];
    let bob = vec![
        low_block(binary(&tz)),
        low_block(binary(&tx)),
        high_block(binary(&tz)),
        high_block(binary(&tx)),
    ];
    (alice, bob)
}

pub fn ideal_three_chsh() -> QuantumStrategy {
    let (alice, bob) = three_chsh_measurements();
    QuantumStrategy::new(3, 3, maximally_entangled_qutrits(), alice, bob)
        .expect("ideal 3-CHSH strategy is valid")
}

/// `P ⊗ I_n` for a qutrit operator `P`.
fn with_identity(p: &Operator, n: usize) -> Operator {
    p.tensor(&Operator::identity(n))
}

/// The ideal strategy `S_d` for the embezzlement game, built densely.
pub fn ideal_emb(d: usize) -> Result<QuantumStrategy> {
    if d == 0 {
        return Err(Error::invalid("embezzler index d must be at least 1"));
    }
    if d > IDEAL_EMB_CAP {
        return Err(Error::cap("dense ideal_emb index d", d as u128, IDEAL_EMB_CAP as u128));
    }
    let n = 1usize << d;
    let local = 3 * n;
    let state = attach_embezzler(&maximally_entangled_qutrits(), 3, &gamma_dense(d)?)?;

    let shift = EmbeddedShift::new(d)?;
    let (three_a, three_b) = three_chsh_measurements();
    let (first, second) = tchsh_projectors(crate::games::EMB_TILT_ALPHA, true)?;
    // Bob is the first tilted CHSH player, Alice the second.
    let shifted = |p: [Operator; 2]| -> Vec<Operator> {
        low_block(p)
            .iter()
            .map(|op| shift.conjugate(&with_identity(op, n)))
            .collect()
    };
    let mut meas_a: Vec<Vec<Operator>> = three_a
        .iter()
        .map(|q| q.iter().map(|p| with_identity(p, n)).collect())
        .collect();
    meas_a.extend(second.into_iter().map(shifted));
    let mut meas_b: Vec<Vec<Operator>> = three_b
        .iter()
        .map(|q| q.iter().map(|p| with_identity(p, n)).collect())
        .collect();
    meas_b.extend(first.into_iter().map(shifted));
    QuantumStrategy::new(local, local, state, meas_a, meas_b)
}

/// One-dimensional strategy that always answers 0.
pub fn trivial_strategy(nx: usize, ny: usize, na: usize, nb: usize) -> Result<QuantumStrategy> {
    let answer = |n: usize| -> Vec<Operator> {
        (0..n)
            .map(|k| if k == 0 { Operator::identity(1) } else { Operator::zeros(1) })
            .collect()
    };
    QuantumStrategy::new(
        1,
        1,
        StateVector::basis(vec![1, 1], 0),
        vec![answer(na); nx],
        vec![answer(nb); ny],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{build_tchsh, shipped_emb, shipped_three_chsh, strategy_value};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn apply_local_a(s: &QuantumStrategy, p: &Operator) -> StateVector {
        s.state.apply(&p.tensor(&Operator::identity(s.dim_b))).unwrap()
    }

    #[test]
    fn tchsh_alpha_one_value() {
        let g = build_tchsh(1.0, false).unwrap();
        let v = strategy_value(&g, &ideal_tchsh(1.0, false).unwrap()).unwrap();
        assert!((v - FRAC_1_SQRT_2).abs() < 1e-12, "{v}");
    }

    #[test]
    fn tchsh_value_matches_closed_form() {
        for &alpha in &[0.2, 0.5, FRAC_1_SQRT_2, 0.9, 1.0] {
            let want = TiltedParams::from_alpha(alpha).unwrap().quantum_value();
            for flipped in [false, true] {
                let g = build_tchsh(alpha, flipped).unwrap();
                let v = strategy_value(&g, &ideal_tchsh(alpha, flipped).unwrap()).unwrap();
                assert!((v - want).abs() < 1e-12, "alpha {alpha} flipped {flipped}: {v} vs {want}");
            }
        }
        let v = TiltedParams::from_alpha(FRAC_1_SQRT_2).unwrap().quantum_value();
        assert!((v - 3.0 / 17f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tchsh_self_test_identity() {
        for &alpha in &[0.3, FRAC_1_SQRT_2, 1.0] {
            let s = ideal_tchsh(alpha, false).unwrap();
            let got = apply_local_a(&s, &s.meas_a[0][0]);
            let want = StateVector::from_real(vec![2, 2], &[1.0 / (1.0 + alpha * alpha).sqrt(), 0.0, 0.0, 0.0])
                .unwrap();
            assert!(got.max_distance(&want) < 1e-15);
        }
    }

    #[test]
    fn flipped_state_and_first_projector() {
        let alpha = FRAC_1_SQRT_2;
        let s = ideal_tchsh(alpha, true).unwrap();
        let c = 1.0 / 3f64.sqrt();
        let want = StateVector::from_real(vec![2, 2], &[c, 0.0, 0.0, 2f64.sqrt() * c]).unwrap();
        assert!(s.state.max_distance(&want) < 1e-15);
        let got = apply_local_a(&s, &s.meas_a[0][0]);
        let want = StateVector::from_real(vec![2, 2], &[c, 0.0, 0.0, 0.0]).unwrap();
        assert!(got.max_distance(&want) < 1e-15);
    }

    #[test]
    fn three_chsh_tables() {
        let s = ideal_three_chsh();
        for k in 0..3 {
            assert_eq!(s.meas_a[0][k].max_abs_diff(&level(k)), 0.0);
            let got = apply_local_a(&s, &s.meas_a[0][k]);
            let mut amps = [0.0; 9];
            amps[k * 3 + k] = 1.0 / 3f64.sqrt();
            let want = StateVector::from_real(vec![3, 3], &amps).unwrap();
            assert!(got.max_distance(&want) < 1e-15);
        }
        assert_eq!(s.meas_b[0][2].max_abs_diff(&level(2)), 0.0);
        assert_eq!(s.meas_b[2][0].max_abs_diff(&level(0)), 0.0);
    }

    #[test]
    fn three_chsh_value_on_fixture() {
        let v = strategy_value(&shipped_three_chsh(), &ideal_three_chsh()).unwrap();
        assert!((v - 2f64.sqrt() / 3.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn validation_reports_scaled_operators() {
        let mut s = ideal_tchsh(1.0, false).unwrap();
        assert!(validate_strategy(&s).max_defect() < 1e-12);
        s.meas_a[0] = s.meas_a[0].iter().map(|p| p.scale(0.5)).collect();
        let diag = validate_strategy(&s);
        assert!((diag.completeness - 0.5).abs() < 1e-12);
        assert!(!diag.is_valid(MEASUREMENT_TOL));
    }

    #[test]
    fn new_rejects_incomplete_measurements() {
        let s = ideal_tchsh(1.0, false).unwrap();
        let mut meas_a = s.meas_a.clone();
        meas_a[1].pop();
        meas_a[1].push(Operator::zeros(2));
        assert!(QuantumStrategy::new(2, 2, s.state.clone(), meas_a, s.meas_b.clone()).is_err());
        let wrong_dim = vec![vec![Operator::identity(3), Operator::zeros(3)]];
        assert!(QuantumStrategy::new(2, 2, s.state, wrong_dim, s.meas_b).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = ideal_three_chsh();
        let back = QuantumStrategy::from_json_str(&s.to_json().unwrap()).unwrap();
        assert_eq!(back.state.max_distance(&s.state), 0.0);
        for (p, q) in back.meas_b.iter().flatten().zip(s.meas_b.iter().flatten()) {
            assert_eq!(p.max_abs_diff(q), 0.0);
        }
    }

    #[test]
    fn emb_d1_state() {
        let s = ideal_emb(1).unwrap();
        assert_eq!(s.dim_a, 6);
        // (1/√3) Σ_i |i1⟩_A |i1⟩_B
        let c = 1.0 / 3f64.sqrt();
        for i in 0..36 {
            let (a, b) = (i / 6, i % 6);
            let want = if a == b && a % 2 == 1 { c } else { 0.0 };
            assert!((s.state.amp(i).re - want).abs() < 1e-15 && s.state.amp(i).im == 0.0);
        }
    }

    #[test]
    fn emb_validates_and_part_c_is_one() {
        let (g, map) = shipped_emb();
        for d in 1..=3 {
            let s = ideal_emb(d).unwrap();
            assert!(validate_strategy(&s).max_defect() < 1e-10);
            let c = crate::games::correlation_of_strategy(&s).unwrap();
            let parts = map.contributions(&g, &c).unwrap();
            assert!((parts.restricted(crate::games::Part::C) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn emb_cap() {
        assert!(matches!(ideal_emb(IDEAL_EMB_CAP + 1), Err(Error::CapExceeded { .. })));
        assert!(ideal_emb(0).is_err());
    }

    #[test]
    fn trivial_strategy_answers_zero() {
        let g = build_tchsh(1.0, false).unwrap();
        let s = trivial_strategy(2, 2, 2, 2).unwrap();
        assert_eq!(strategy_value(&g, &s).unwrap(), 0.5);
    }
}
