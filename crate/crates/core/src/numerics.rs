//! Dense complex linear algebra used everywhere else in the crate.
//!
//! Layout convention: composite systems are stored row-major with the
//! first (Alice-side) subsystem most significant. `tensor(a, b)` puts the
//! indices of `a` in the high digits.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Eigenvalues with magnitude below this are classified as kernel.
pub const KERNEL_TOL: f64 = 1e-9;
/// Absolute Hermiticity tolerance, scaled by `max(1, max |m_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Singular values below this are completed freely in `polar_factor`.
pub const SINGULAR_TOL: f64 = 1e-12;

/// A pure state on a finite-dimensional composite system.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::shape(format!("invalid subsystem dims {dims:?}")));
        }
        if amps.len() != len {
            return Err(Error::shape(format!(
                "state with dims {dims:?} needs {len} amplitudes, got {}",
                amps.len()
            )));
        }
        Ok(Self {
            dims,
            amps: DVector::from_vec(amps),
        })
    }

    pub fn from_real(dims: Vec<usize>, amps: &[f64]) -> Result<Self> {
        Self::new(dims, amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Self {
        let len: usize = dims.iter().product();
        assert!(index < len, "basis index {index} out of range {len}");
        let mut amps = DVector::from_element(len, ZERO);
        amps[index] = ONE;
        Self { dims, amps }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amp(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn norm_defect(&self) -> f64 {
        (self.norm() - 1.0).abs()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        Ok(Self {
            dims: self.dims.clone(),
            amps: self.amps.unscale(n),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            dims,
            amps: self.amps.kronecker(&other.amps),
        }
    }

    pub fn apply(&self, op: &Operator) -> Result<StateVector> {
        if op.dim() != self.len() {
            return Err(Error::shape(format!(
                "operator of dim {} applied to state of length {}",
                op.dim(),
                self.len()
            )));
        }
        Ok(Self {
            dims: self.dims.clone(),
            amps: &op.0 * &self.amps,
        })
    }

    /// Reshape as a `rows × (len / rows)` coefficient matrix, row index =
    /// high digits.
    pub fn as_matrix(&self, rows: usize) -> Result<DMatrix<C64>> {
        if rows == 0 || self.len() % rows != 0 {
            return Err(Error::shape(format!(
                "cannot split length {} into {rows} rows",
                self.len()
            )));
        }
        let cols = self.len() / rows;
        Ok(DMatrix::from_row_iterator(rows, cols, self.amps.iter().copied()))
    }

    /// Inverse of [`as_matrix`](Self::as_matrix).
    pub fn from_matrix(dims: Vec<usize>, m: &DMatrix<C64>) -> Result<Self> {
        let mut amps = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                amps.push(m[(r, c)]);
            }
        }
        Self::new(dims, amps)
    }

    /// Largest entrywise distance between amplitude vectors.
    pub fn max_distance(&self, other: &StateVector) -> f64 {
        assert_eq!(self.len(), other.len());
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        (&self.amps - &other.amps).norm()
    }
}

/// `(ua ⊗ ub)|Ψ⟩` computed as `ua·M·ubᵀ` on the coefficient matrix, so the
/// Kronecker product is never formed.
pub fn apply_local(state: &StateVector, ua: &Operator, ub: &Operator) -> Result<StateVector> {
    if ua.dim() * ub.dim() != state.len() {
        return Err(Error::shape(format!(
            "local operators {}x{} on a state of length {}",
            ua.dim(),
            ub.dim(),
            state.len()
        )));
    }
    let m = state.as_matrix(ua.dim())?;
    let out = &ua.0 * m * ub.0.transpose();
    StateVector::from_matrix(state.dims.clone(), &out)
}

/// Square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::from_element(n, n, ZERO))
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::shape(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    /// Row-major real entries.
    pub fn from_real(n: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), n * n);
        Self(DMatrix::from_row_iterator(
            n,
            n,
            entries.iter().map(|&e| C64::new(e, 0.0)),
        ))
    }

    /// Diagonal operator.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        Self(m)
    }

    /// `|k⟩⟨k|` on `ℂⁿ`.
    pub fn basis_projector(n: usize, k: usize) -> Self {
        let mut m = DMatrix::from_element(n, n, ZERO);
        m[(k, k)] = ONE;
        Self(m)
    }

    /// `|v⟩⟨v|`.
    pub fn outer(v: &StateVector) -> Self {
        Self(v.amps() * v.amps().adjoint())
    }

    /// Permutation matrix sending basis state `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (j, &i) in perm.iter().enumerate() {
            m[(i, j)] = ONE;
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn tensor(&self, other: &Operator) -> Operator {
        Self(self.0.kronecker(&other.0))
    }

    /// `u† · self · u`.
    pub fn conjugate_by(&self, u: &Operator) -> Operator {
        Self(u.0.adjoint() * &self.0 * &u.0)
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Operator {
        Self((&self.0 + self.0.adjoint()).scale(0.5))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M − M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL * self.max_abs().max(1.0)
    }

    /// `max |M² − M|`.
    pub fn idempotence_defect(&self) -> f64 {
        (&self.0 * &self.0 - &self.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `max |U†U − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        (self.0.adjoint() * &self.0 - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `Σ_ij A_ij B_ij` (no conjugation). Equals `tr(A Bᵀ)`.
    pub fn bilinear_sum(&self, other: &Operator) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(ZERO, |acc, (a, b)| acc + a * b)
    }

    /// `⟨v|self|v⟩`.
    pub fn expectation(&self, v: &StateVector) -> C64 {
        v.amps().dotc(&(&self.0 * v.amps()))
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

/// Kronecker product with `a`'s indices most significant.
pub trait Tensor {
    fn kron(&self, other: &Self) -> Self;
}

impl Tensor for Operator {
    fn kron(&self, other: &Self) -> Self {
        self.tensor(other)
    }
}

impl Tensor for StateVector {
    fn kron(&self, other: &Self) -> Self {
        self.tensor(other)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.kron(b)
}

pub fn sigma_x() -> Operator {
    Operator::from_real(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_y() -> Operator {
    Operator::from_matrix(DMatrix::from_row_slice(
        2,
        2,
        &[ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
    ))
    .expect("square")
}

pub fn sigma_z() -> Operator {
    Operator::diagonal(&[1.0, -1.0])
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn epr() -> StateVector {
    StateVector::from_real(vec![2, 2], &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).expect("shape")
}

/// Parameters of the tilted CHSH family, all derived from one of `alpha`
/// or `beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltedParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub mu: f64,
}

impl TiltedParams {
    /// From the state ratio `α ∈ (0, 1]`.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        let theta = alpha.atan();
        let s = 2.0 * alpha / (1.0 + alpha * alpha);
        let beta = 2.0 * ((1.0 - s * s) / (1.0 + s * s)).sqrt();
        Ok(Self {
            alpha,
            beta,
            theta,
            mu: s.atan(),
        })
    }

    /// From the tilt `β ∈ [0, 2)`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(0.0..2.0).contains(&beta) {
            return Err(Error::invalid(format!("beta must lie in [0, 2), got {beta}")));
        }
        let s = ((4.0 - beta * beta) / (4.0 + beta * beta)).sqrt();
        let theta = 0.5 * s.asin();
        Ok(Self {
            alpha: theta.tan(),
            beta,
            theta,
            mu: s.atan(),
        })
    }

    /// `sin 2θ`.
    pub fn sin_two_theta(&self) -> f64 {
        (2.0 * self.theta).sin()
    }

    /// Maximal violation `¼·√(8 + 2β²)` of the tilted CHSH game.
    pub fn quantum_value(&self) -> f64 {
        0.25 * (8.0 + 2.0 * self.beta * self.beta).sqrt()
    }

    /// Largest deviation from the defining relations.
    pub fn consistency_defect(&self) -> f64 {
        let s = ((4.0 - self.beta.powi(2)) / (4.0 + self.beta.powi(2))).sqrt();
        let d1 = (self.theta.tan() - self.alpha).abs();
        let d2 = (self.sin_two_theta() - s).abs();
        let d3 = (self.mu - self.sin_two_theta().atan()).abs();
        d1.max(d2).max(d3)
    }
}

/// Tilted Paulis `(cos μ σᶻ + sin μ σˣ, cos μ σᶻ − sin μ σˣ)`.
pub fn tilted_paulis(p: &TiltedParams) -> (Operator, Operator) {
    let (s, c) = p.mu.sin_cos();
    let tz = Operator::from_real(2, &[c, s, s, -c]);
    let tx = Operator::from_real(2, &[c, -s, -s, -c]);
    (tz, tx)
}

/// Projectors onto the strictly positive, strictly negative and kernel
/// eigenspaces of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct EigenSplit {
    pub plus: Operator,
    pub minus: Operator,
    pub kernel: Operator,
}

pub fn eig_projectors(m: &Operator) -> Result<EigenSplit> {
    if !m.is_hermitian() {
        return Err(Error::NotHermitian {
            defect: m.hermiticity_defect(),
        });
    }
    let n = m.dim();
    let id = Operator::identity(n);
    // Spectrum inside {-1, 0, 1}: closed form, exact up to rounding of m.
    let sq = m * m;
    let cube = &sq * m;
    if cube.max_abs_diff(m) <= 1e-12 {
        let plus = (&sq + m).scale(0.5);
        let minus = (&sq - m).scale(0.5);
        let kernel = &id - &sq;
        return Ok(EigenSplit {
            plus,
            minus,
            kernel,
        });
    }
    let eig = m.hermitian_part().0.symmetric_eigen();
    let mut plus = DMatrix::from_element(n, n, ZERO);
    let mut minus = DMatrix::from_element(n, n, ZERO);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        if lambda > KERNEL_TOL {
            plus += v * v.adjoint();
        } else if lambda < -KERNEL_TOL {
            minus += v * v.adjoint();
        }
    }
    let plus = Operator(plus);
    let minus = Operator(minus);
    let kernel = &(&id - &plus) - &minus;
    Ok(EigenSplit {
        plus,
        minus,
        kernel,
    })
}

/// Pushforward `V o V†` along the isometry `|0⟩ ↦ |1⟩, |1⟩ ↦ |2⟩`.
pub fn embed_v(o: &Operator) -> Result<Operator> {
    embed_qubit_block(o, 1)
}

/// A qubit operator acting on levels {0, 1} of a qutrit, zero on |2⟩.
pub fn embed_low(o: &Operator) -> Result<Operator> {
    embed_qubit_block(o, 0)
}

fn embed_qubit_block(o: &Operator, offset: usize) -> Result<Operator> {
    if o.dim() != 2 {
        return Err(Error::shape(format!("expected a 2x2 operator, got dim {}", o.dim())));
    }
    let mut m = DMatrix::from_element(3, 3, ZERO);
    for i in 0..2 {
        for j in 0..2 {
            m[(i + offset, j + offset)] = o.get(i, j);
        }
    }
    Ok(Operator(m))
}

/// Unitary `U` maximizing `Re tr(U† m)`, i.e. the unitary polar factor.
pub fn polar_factor(m: &Operator) -> Operator {
    let n = m.dim();
    let svd = m.0.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    debug_assert_eq!(u.ncols(), n);
    Operator(u * v_t)
}

/// Unit eigenvector of the largest eigenvalue, phase fixed so the first
/// non-negligible amplitude is real and positive.
pub fn principal_eigvec(m: &Operator) -> Result<(f64, StateVector)> {
    if !m.is_hermitian() {
        return Err(Error::NotHermitian {
            defect: m.hermiticity_defect(),
        });
    }
    let n = m.dim();
    let eig = m.hermitian_part().0.symmetric_eigen();
    let mut best = 0;
    for k in 1..n {
        if eig.eigenvalues[k] > eig.eigenvalues[best] {
            best = k;
        }
    }
    let v: Vec<C64> = eig.eigenvectors.column(best).iter().copied().collect();
    let state = fix_phase(StateVector::new(vec![n], v)?).normalized()?;
    Ok((eig.eigenvalues[best], state))
}

/// Rotate the global phase so the first amplitude above 1e-9 is real positive.
pub fn fix_phase(v: StateVector) -> StateVector {
    let lead = v.amps().iter().find(|z| z.norm() > 1e-9).copied();
    match lead {
        Some(z) => {
            let phase = z.conj() / z.norm();
            StateVector {
                dims: v.dims,
                amps: v.amps.map(|a| a * phase),
            }
        }
        None => v,
    }
}

/// Seeded sampling of random states, Hermitian matrices and measurements.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    }

    /// Haar-random unit vector.
    pub fn haar_state<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> StateVector {
        let n: usize = dims.iter().product();
        let amps: Vec<C64> = (0..n).map(|_| gaussian_c64(rng)).collect();
        StateVector::new(dims, amps)
            .expect("shape")
            .normalized()
            .expect("nonzero with probability one")
    }

    /// Sample from the Gaussian unitary ensemble.
    pub fn gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Operator {
        let g = DMatrix::from_fn(n, n, |_, _| gaussian_c64(rng));
        Operator((&g + g.adjoint()).scale(0.5))
    }

    /// Square complex Gaussian matrix (not Hermitian).
    pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Operator {
        Operator(DMatrix::from_fn(n, n, |_, _| gaussian_c64(rng)))
    }

    /// Projective measurement with `outcomes` elements built from the
    /// eigenvectors of a GUE sample, each eigenvector assigned to a uniformly
    /// random outcome.
    pub fn projective_measurement<R: Rng + ?Sized>(
        n: usize,
        outcomes: usize,
        rng: &mut R,
    ) -> Vec<Operator> {
        let h = gue(n, rng);
        let eig = h.0.symmetric_eigen();
        let mut projectors = vec![DMatrix::from_element(n, n, ZERO); outcomes];
        for k in 0..n {
            let a = rng.gen_range(0..outcomes);
            let v = eig.eigenvectors.column(k);
            projectors[a] += v * v.adjoint();
        }
        projectors.into_iter().map(Operator).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ket(n: usize, k: usize) -> StateVector {
        StateVector::basis(vec![n], k)
    }

    #[test]
    fn tensor_basics() {
        let i4 = tensor(&Operator::identity(2), &Operator::identity(2));
        assert_eq!(i4, Operator::identity(4));
        let zz = tensor(&sigma_z(), &sigma_z());
        let diag: Vec<f64> = (0..4).map(|i| zz.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
        let v = tensor(&ket(2, 0), &ket(2, 1));
        assert_eq!(v, StateVector::basis(vec![2, 2], 1));
    }

    #[test]
    fn eig_projectors_sigma_z() {
        let s = eig_projectors(&sigma_z()).unwrap();
        assert_eq!(s.plus, Operator::basis_projector(2, 0));
        assert_eq!(s.minus, Operator::basis_projector(2, 1));
        assert!(s.kernel.max_abs() < 1e-15);
    }

    #[test]
    fn eig_projectors_embedded_sigma_z() {
        let vz = embed_v(&sigma_z()).unwrap();
        assert_eq!(vz, Operator::diagonal(&[0.0, 1.0, -1.0]));
        let s = eig_projectors(&vz).unwrap();
        assert_eq!(s.plus, Operator::basis_projector(3, 1));
        assert_eq!(s.minus, Operator::basis_projector(3, 2));
        assert_eq!(s.kernel, Operator::basis_projector(3, 0));
    }

    #[test]
    fn eig_projectors_sigma_x_is_hadamard_basis() {
        let s = eig_projectors(&sigma_x()).unwrap();
        let plus = Operator::from_real(2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(s.plus.max_abs_diff(&plus) < 1e-15);
        assert!((&s.plus * &s.minus).max_abs() < 1e-15);
    }

    #[test]
    fn eig_projectors_general_spectrum() {
        let m = Operator::from_real(3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let s = eig_projectors(&m).unwrap();
        // eigenvalues 3, 1, 0
        assert!((s.plus.trace().re - 2.0).abs() < 1e-12);
        assert!(s.minus.max_abs() < 1e-12);
        assert!((s.kernel.get(2, 2).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_projectors_rejects_non_hermitian() {
        let m = Operator::from_real(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(eig_projectors(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn tilted_paulis_at_alpha_one() {
        let p = TiltedParams::from_alpha(1.0).unwrap();
        assert_eq!(p.beta, 0.0);
        assert!((p.mu - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let (tz, tx) = tilted_paulis(&p);
        let r = FRAC_1_SQRT_2;
        let want_z = (&sigma_z() + &sigma_x()).scale(r);
        let want_x = (&sigma_z() - &sigma_x()).scale(r);
        assert!(tz.max_abs_diff(&want_z) < 1e-15);
        assert!(tx.max_abs_diff(&want_x) < 1e-15);
    }

    #[test]
    fn tilted_sum_identity() {
        for &alpha in &[0.1, 0.5, FRAC_1_SQRT_2, 1.0] {
            let p = TiltedParams::from_alpha(alpha).unwrap();
            let (tz, tx) = tilted_paulis(&p);
            let want = sigma_z().scale(2.0 * p.mu.cos());
            assert!((&tz + &tx).max_abs_diff(&want) < 1e-15);
        }
    }

    #[test]
    fn tilted_params_round_trip() {
        let p = TiltedParams::from_alpha(FRAC_1_SQRT_2).unwrap();
        assert!((p.beta - 2.0 / 17f64.sqrt()).abs() < 1e-15);
        assert!(p.consistency_defect() < 1e-12);
        let q = TiltedParams::from_beta(p.beta).unwrap();
        assert!((q.alpha - p.alpha).abs() < 1e-12);
        assert!(TiltedParams::from_alpha(0.0).is_err());
        assert!(TiltedParams::from_alpha(1.5).is_err());
        assert!(TiltedParams::from_beta(2.0).is_err());
    }

    #[test]
    fn embed_v_examples() {
        assert_eq!(
            embed_v(&Operator::identity(2)).unwrap(),
            Operator::diagonal(&[0.0, 1.0, 1.0])
        );
        let vx = embed_v(&sigma_x()).unwrap();
        assert_eq!(
            vx,
            Operator::from_real(3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0])
        );
        assert!(embed_v(&Operator::identity(3)).is_err());
    }

    #[test]
    fn polar_examples() {
        assert!(polar_factor(&Operator::identity(3)).max_abs_diff(&Operator::identity(3)) < 1e-14);
        assert!(polar_factor(&sigma_x().scale(2.0)).max_abs_diff(&sigma_x()) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = polar_factor(&random::ginibre(4, &mut rng));
        assert!(polar_factor(&u).max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn polar_of_singular_matrix_is_unitary() {
        let m = Operator::basis_projector(3, 1);
        let u = polar_factor(&m);
        assert!(u.unitarity_defect() < 1e-12);
        assert!((u.get(1, 1).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn principal_eigvec_examples() {
        let (l, v) = principal_eigvec(&sigma_z()).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
        assert!(v.max_distance(&ket(2, 0)) < 1e-14);
        let (_, v) = principal_eigvec(&sigma_z().scale(-1.0)).unwrap();
        assert!(v.max_distance(&ket(2, 1)) < 1e-14);
        let (_, v) = principal_eigvec(&sigma_x()).unwrap();
        let plus = StateVector::from_real(vec![2], &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert!(v.max_distance(&plus) < 1e-14);
        assert!(v.amp(0).re > 0.0);
        assert!(principal_eigvec(&Operator::from_real(2, &[0.0, 1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn state_helpers() {
        let e = epr();
        assert!(e.norm_defect() < 1e-15);
        let m = e.as_matrix(2).unwrap();
        let back = StateVector::from_matrix(vec![2, 2], &m).unwrap();
        assert_eq!(back, e);
        assert!(StateVector::new(vec![2, 2], vec![ONE; 3]).is_err());
        assert!(sigma_y().is_hermitian());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(20))]

            #[test]
            fn tilted_paulis_are_involutions(alpha in 1e-3f64..=1.0) {
                let p = TiltedParams::from_alpha(alpha).unwrap();
                prop_assert!(p.consistency_defect() < 1e-12);
                let (tz, tx) = tilted_paulis(&p);
                prop_assert!((&tz * &tz).max_abs_diff(&Operator::identity(2)) < 1e-10);
                prop_assert!((&tx * &tx).max_abs_diff(&Operator::identity(2)) < 1e-10);
                prop_assert!(tz.is_hermitian() && tx.is_hermitian());
            }

            #[test]
            fn eig_split_resolves_identity(seed in any::<u64>(), n in 2usize..6) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let h = random::gue(n, &mut rng);
                let s = eig_projectors(&h).unwrap();
                let sum = &(&s.plus + &s.minus) + &s.kernel;
                prop_assert!(sum.max_abs_diff(&Operator::identity(n)) < 1e-10);
                for p in [&s.plus, &s.minus, &s.kernel] {
                    prop_assert!(p.idempotence_defect() < 1e-10);
                }
                prop_assert!((&s.plus * &s.minus).max_abs() < 1e-10);
            }

            #[test]
            fn embed_v_preserves_products(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random::ginibre(2, &mut rng);
                let b = random::ginibre(2, &mut rng);
                let lhs = embed_v(&(&a * &b)).unwrap();
                let rhs = &embed_v(&a).unwrap() * &embed_v(&b).unwrap();
                prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            #[test]
            fn polar_factor_is_optimal_unitary(seed in any::<u64>(), n in 1usize..6) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = random::ginibre(n, &mut rng);
                let u = polar_factor(&m);
                prop_assert!(u.unitarity_defect() < 1e-10);
                let best = (&u.adjoint() * &m).trace().re;
                // no competitor unitary does better
                for _ in 0..3 {
                    let w = polar_factor(&random::ginibre(n, &mut rng));
                    prop_assert!((&w.adjoint() * &m).trace().re <= best + 1e-10);
                }
            }
        }
    }
}
