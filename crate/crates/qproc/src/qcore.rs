//! Complex linear algebra over the 2ⁿ-dimensional Hilbert space: standard
//! gates, the Pauli basis, and process-matrix (χ) construction.
//!
//! Conventions, used everywhere in this crate:
//!
//! - Matrices are row = output basis state, column = input basis state.
//! - Qubit 0 is the most significant bit of a basis label: the bit of
//!   qubit `q` in label `j` is `(j >> (n - 1 - q)) & 1`.
//! - The Pauli basis is ordered lexicographically over (I, X, Y, Z) per
//!   qubit, most significant qubit first, so element 0 is the identity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest supported qubit count for dense-matrix work.
pub const MAX_QUBITS: usize = 4;

const UNITARITY_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Bit of qubit `q` in the `n`-qubit basis label `label` (qubit 0 = MSB).
#[inline]
pub fn bit_of(label: usize, qubit: usize, n: usize) -> usize {
    (label >> (n - 1 - qubit)) & 1
}

/// `label` with the bit of qubit `q` forced to `value`.
#[inline]
pub fn with_bit(label: usize, qubit: usize, n: usize, value: usize) -> usize {
    let mask = 1 << (n - 1 - qubit);
    if value == 0 {
        label & !mask
    } else {
        label | mask
    }
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("qubit count must be at least 1".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qubit count {n} above the supported envelope ({MAX_QUBITS})"
        )));
    }
    Ok(())
}

/// Normalization convention for Pauli coefficients and χ.
///
/// `TraceOne` divides traces by 2ⁿ so that tr χ = 1; `TraceD` divides by
/// √(2ⁿ) so that tr χ = 2ⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    TraceOne,
    TraceD,
}

impl Normalization {
    /// Nominal trace of an exactly constructed χ under this convention.
    pub fn chi_trace(&self, n: usize) -> f64 {
        match self {
            Normalization::TraceOne => 1.0,
            Normalization::TraceD => (1u64 << n) as f64,
        }
    }
}

/// Dense unitary on n qubits, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    n: usize,
    matrix: CMatrix,
}

impl UnitaryOperator {
    /// Wrap a matrix, checking that it is square with dimension 2ⁿ and
    /// unitary to within `1e-10`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "unitary must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        if dim < 2 || dim != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "unitary dimension {dim} is not a power of two >= 2"
            )));
        }
        check_qubit_count(n)?;
        let gram = matrix.adjoint() * &matrix;
        let dev = unitarity_deviation(&gram);
        if dev > UNITARITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not unitary: max |U†U - I| = {dev:.3e}"
            )));
        }
        Ok(Self { n, matrix })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Entry ⟨row|U|col⟩.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        Ok(Self { n, matrix: CMatrix::identity(1 << n, 1 << n) })
    }

    pub fn pauli_x() -> Self {
        Self { n: 1, matrix: mat2([c(0.0), c(1.0), c(1.0), c(0.0)]) }
    }

    pub fn pauli_y() -> Self {
        Self { n: 1, matrix: mat2([c(0.0), ci(-1.0), ci(1.0), c(0.0)]) }
    }

    pub fn pauli_z() -> Self {
        Self { n: 1, matrix: mat2([c(1.0), c(0.0), c(0.0), c(-1.0)]) }
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { n: 1, matrix: mat2([c(h), c(h), c(h), c(-h)]) }
    }

    /// Phase gate S = diag(1, i).
    pub fn phase_s() -> Self {
        Self { n: 1, matrix: mat2([c(1.0), c(0.0), c(0.0), ci(1.0)]) }
    }

    /// Controlled-X between two qubits of an n-qubit register.
    pub fn cx(n: usize, control: usize, target: usize) -> Result<Self> {
        check_qubit_count(n)?;
        if control >= n || target >= n || control == target {
            return Err(Error::InvalidArgument(format!(
                "invalid CX qubits ({control}, {target}) for n = {n}"
            )));
        }
        let dim = 1 << n;
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let row = if bit_of(col, control, n) == 1 {
                col ^ (1 << (n - 1 - target))
            } else {
                col
            };
            m[(row, col)] = c(1.0);
        }
        Ok(Self { n, matrix: m })
    }

    /// Embed a single-qubit operator on qubit `q` of an n-qubit register.
    pub fn embedded(single: &UnitaryOperator, qubit: usize, n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        if single.n != 1 {
            return Err(Error::InvalidArgument("embedded() expects a single-qubit operator".into()));
        }
        if qubit >= n {
            return Err(Error::InvalidArgument(format!("qubit index {qubit} out of range for n = {n}")));
        }
        let left = CMatrix::identity(1 << qubit, 1 << qubit);
        let right_dim = 1 << (n - 1 - qubit);
        let right = CMatrix::identity(right_dim, right_dim);
        let matrix = left.kronecker(&single.matrix).kronecker(&right);
        Ok(Self { n, matrix })
    }

    /// Tensor product, `self` on the more significant qubits.
    pub fn tensor(&self, other: &UnitaryOperator) -> Result<Self> {
        check_qubit_count(self.n + other.n)?;
        Ok(Self { n: self.n + other.n, matrix: self.matrix.kronecker(&other.matrix) })
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &UnitaryOperator) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose operators on {} and {} qubits",
                self.n, rhs.n
            )));
        }
        Ok(Self { n: self.n, matrix: &self.matrix * &rhs.matrix })
    }

    pub fn adjoint(&self) -> Self {
        Self { n: self.n, matrix: self.matrix.adjoint() }
    }

    pub(crate) fn from_matrix_unchecked(n: usize, matrix: CMatrix) -> Self {
        Self { n, matrix }
    }
}

/// Max entry deviation of a Gram matrix from the identity.
fn unitarity_deviation(gram: &CMatrix) -> f64 {
    let dim = gram.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { c(1.0) } else { c(0.0) };
            dev = dev.max((gram[(i, j)] - target).norm());
        }
    }
    dev
}

#[inline]
fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[inline]
fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

fn mat2(entries: [Complex64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &entries)
}

/// The 4ⁿ n-qubit Pauli operators in lexicographic (I, X, Y, Z) order,
/// most significant qubit first. Element 0 is the identity.
pub fn pauli_basis(n: usize) -> Result<Vec<UnitaryOperator>> {
    check_qubit_count(n)?;
    let singles = [
        UnitaryOperator::identity(1)?,
        UnitaryOperator::pauli_x(),
        UnitaryOperator::pauli_y(),
        UnitaryOperator::pauli_z(),
    ];
    let mut basis = Vec::with_capacity(1 << (2 * n));
    for k in 0..(1usize << (2 * n)) {
        let mut op = singles[pauli_digit(k, 0, n)].clone();
        for q in 1..n {
            op = op.tensor(&singles[pauli_digit(k, q, n)])?;
        }
        basis.push(op);
    }
    Ok(basis)
}

/// Base-4 digit of qubit `q` in Pauli index `k` (0=I, 1=X, 2=Y, 3=Z).
#[inline]
fn pauli_digit(k: usize, qubit: usize, n: usize) -> usize {
    (k >> (2 * (n - 1 - qubit))) & 3
}

/// Label such as "IX" for a Pauli basis index.
pub fn pauli_label(k: usize, n: usize) -> String {
    const CHARS: [char; 4] = ['I', 'X', 'Y', 'Z'];
    (0..n).map(|q| CHARS[pauli_digit(k, q, n)]).collect()
}

/// Expansion coefficients of a unitary in the Pauli basis.
#[derive(Debug, Clone)]
pub struct PauliCoefficients {
    pub n: usize,
    pub u: CVector,
    pub normalization: Normalization,
}

/// u_k = tr(U·P_k) / 2ⁿ (`TraceOne`) or tr(U·P_k) / √(2ⁿ) (`TraceD`).
pub fn pauli_coefficients(u: &UnitaryOperator, normalization: Normalization) -> PauliCoefficients {
    let n = u.num_qubits();
    let dim = u.dim() as f64;
    let scale = match normalization {
        Normalization::TraceOne => 1.0 / dim,
        Normalization::TraceD => 1.0 / dim.sqrt(),
    };
    let basis = pauli_basis(n).expect("validated qubit count");
    let coeffs = basis
        .iter()
        .map(|p| (u.matrix() * p.matrix()).trace() * c(scale))
        .collect::<Vec<_>>();
    PauliCoefficients { n, u: CVector::from_vec(coeffs), normalization }
}

/// Rebuild the operator matrix from its Pauli coefficients.
pub fn unitary_from_coefficients(coeffs: &PauliCoefficients) -> CMatrix {
    let dim = 1 << coeffs.n;
    let scale = match coeffs.normalization {
        Normalization::TraceOne => 1.0,
        Normalization::TraceD => 1.0 / (dim as f64).sqrt(),
    };
    let basis = pauli_basis(coeffs.n).expect("validated qubit count");
    let mut m = CMatrix::zeros(dim, dim);
    for (k, p) in basis.iter().enumerate() {
        m += p.matrix() * (coeffs.u[k] * c(scale));
    }
    m
}

/// Process matrix χ in the Pauli basis: the process acts as
/// Σ_kl χ_kl P_k ρ P_l (times 1/2ⁿ under `TraceD`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    pub n: usize,
    pub chi: CMatrix,
    pub normalization: Normalization,
}

impl ProcessMatrix {
    /// Wrap an externally estimated χ; requires Hermiticity within 1e-9.
    pub fn from_matrix(n: usize, chi: CMatrix, normalization: Normalization) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1 << (2 * n);
        if chi.nrows() != dim || chi.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "chi for n = {n} must be {dim}x{dim}, got {}x{}",
                chi.nrows(),
                chi.ncols()
            )));
        }
        let herm_dev = (&chi - chi.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_dev > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "chi is not Hermitian: max |chi - chi†| = {herm_dev:.3e}"
            )));
        }
        Ok(Self { n, chi, normalization })
    }

    pub fn dim(&self) -> usize {
        1 << (2 * self.n)
    }

    pub fn trace(&self) -> Complex64 {
        self.chi.trace()
    }
}

/// χ = u·u† for a unitary process, rank 1 and positive semidefinite.
pub fn chi_from_unitary(u: &UnitaryOperator, normalization: Normalization) -> ProcessMatrix {
    let coeffs = pauli_coefficients(u, normalization);
    let chi = &coeffs.u * coeffs.u.adjoint();
    ProcessMatrix { n: u.num_qubits(), chi, normalization }
}

/// Apply a process matrix to a density matrix: Σ_kl χ_kl P_k ρ P_l, scaled
/// by the convention factor so the result equals U ρ U† for χ built from U.
pub fn apply_process(chi: &ProcessMatrix, rho: &CMatrix) -> Result<CMatrix> {
    let dim = 1 << chi.n;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "density matrix must be {dim}x{dim}, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let scale = match chi.normalization {
        Normalization::TraceOne => 1.0,
        Normalization::TraceD => 1.0 / dim as f64,
    };
    let basis = pauli_basis(chi.n)?;
    let mut out = CMatrix::zeros(dim, dim);
    for k in 0..chi.dim() {
        for l in 0..chi.dim() {
            let coeff = chi.chi[(k, l)] * c(scale);
            if coeff.norm() < 1e-300 {
                continue;
            }
            out += basis[k].matrix() * rho * basis[l].matrix() * coeff;
        }
    }
    Ok(out)
}

/// Haar-ish random unitary from the QR decomposition of a complex Gaussian
/// matrix, with the R diagonal phases normalized away.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> Result<UnitaryOperator> {
    check_qubit_count(n)?;
    let dim = 1 << n;
    let g = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(standard_normal(rng), standard_normal(rng)));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Fix the phase convention so the distribution is exactly Haar.
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / c(d.norm()) } else { c(1.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    UnitaryOperator::new(q)
}

/// Box-Muller standard normal draw.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn pauli_basis_one_qubit() {
        let basis = pauli_basis(1).unwrap();
        assert_eq!(basis.len(), 4);
        assert_eq!(basis[0], UnitaryOperator::identity(1).unwrap());
        assert_eq!(basis[1], UnitaryOperator::pauli_x());
        assert_eq!(basis[2], UnitaryOperator::pauli_y());
        assert_eq!(basis[3], UnitaryOperator::pauli_z());
    }

    #[test]
    fn pauli_basis_two_qubit_ordering() {
        let basis = pauli_basis(2).unwrap();
        assert_eq!(basis.len(), 16);
        let ii = UnitaryOperator::identity(2).unwrap();
        assert_eq!(max_entry_diff(basis[0].matrix(), ii.matrix()), 0.0);
        let xx = UnitaryOperator::pauli_x().tensor(&UnitaryOperator::pauli_x()).unwrap();
        assert_eq!(max_entry_diff(basis[5].matrix(), xx.matrix()), 0.0);
        assert_eq!(pauli_label(5, 2), "XX");
        assert_eq!(pauli_label(0, 2), "II");
        assert_eq!(pauli_label(7, 2), "XZ");
    }

    #[test]
    fn pauli_elements_square_to_identity() {
        for n in 1..=2 {
            let id = CMatrix::identity(1 << n, 1 << n);
            for p in pauli_basis(n).unwrap() {
                assert!(max_entry_diff(&(p.matrix() * p.matrix()), &id) < 1e-14);
            }
        }
    }

    #[test]
    fn pauli_basis_rejects_zero_qubits() {
        assert!(matches!(pauli_basis(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn coefficients_of_identity_and_x() {
        let id = UnitaryOperator::identity(1).unwrap();
        let u = pauli_coefficients(&id, Normalization::TraceOne);
        assert_abs_diff_eq!(u.u[0].re, 1.0, epsilon = 1e-14);
        for k in 1..4 {
            assert!(u.u[k].norm() < 1e-14);
        }
        let x = pauli_coefficients(&UnitaryOperator::pauli_x(), Normalization::TraceOne);
        assert_abs_diff_eq!(x.u[1].re, 1.0, epsilon = 1e-14);
        assert!(x.u[0].norm() < 1e-14 && x.u[2].norm() < 1e-14 && x.u[3].norm() < 1e-14);
    }

    #[test]
    fn coefficients_of_hadamard() {
        // H = (X + Z)/sqrt(2), so u = (0, 1/sqrt(2), 0, 1/sqrt(2)).
        let h = pauli_coefficients(&UnitaryOperator::hadamard(), Normalization::TraceOne);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(h.u[0].norm() < 1e-14 && h.u[2].norm() < 1e-14);
        assert_abs_diff_eq!(h.u[1].re, s, epsilon = 1e-14);
        assert_abs_diff_eq!(h.u[3].re, s, epsilon = 1e-14);
    }

    #[test]
    fn coefficient_norms_match_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=2 {
            let u = random_unitary(n, &mut rng).unwrap();
            let one = pauli_coefficients(&u, Normalization::TraceOne);
            let norm1: f64 = one.u.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(norm1, 1.0, epsilon = 1e-10);
            let d = pauli_coefficients(&u, Normalization::TraceD);
            let normd: f64 = d.u.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(normd, (1u64 << n) as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn coefficients_invert_to_the_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 1..=3 {
            let u = random_unitary(n, &mut rng).unwrap();
            for norm in [Normalization::TraceOne, Normalization::TraceD] {
                let coeffs = pauli_coefficients(&u, norm);
                let rebuilt = unitary_from_coefficients(&coeffs);
                assert!(max_entry_diff(&rebuilt, u.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn chi_of_hadamard() {
        let chi = chi_from_unitary(&UnitaryOperator::hadamard(), Normalization::TraceOne);
        // XX, XZ, ZX, ZZ entries are 1/2; everything else vanishes.
        for k in 0..4 {
            for l in 0..4 {
                let expected = if (k == 1 || k == 3) && (l == 1 || l == 3) { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(chi.chi[(k, l)].re, expected, epsilon = 1e-13);
                assert_abs_diff_eq!(chi.chi[(k, l)].im, 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn chi_of_identity() {
        let chi = chi_from_unitary(&UnitaryOperator::identity(1).unwrap(), Normalization::TraceOne);
        assert_abs_diff_eq!(chi.chi[(0, 0)].re, 1.0, epsilon = 1e-13);
        let off: f64 = chi.chi.iter().map(|z| z.norm()).sum::<f64>() - 1.0;
        assert!(off.abs() < 1e-12);
    }

    #[test]
    fn chi_of_cx_is_real_rank_one() {
        let cx = UnitaryOperator::cx(2, 0, 1).unwrap();
        for norm in [Normalization::TraceOne, Normalization::TraceD] {
            let chi = chi_from_unitary(&cx, norm);
            let max_im = chi.chi.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            assert!(max_im < 1e-13);
            assert_abs_diff_eq!(chi.trace().re, norm.chi_trace(2), epsilon = 1e-10);
            // Rank 1: second singular value negligible.
            let svals = chi.chi.clone().svd(false, false).singular_values;
            assert!(svals[1] < 1e-10 * svals[0]);
        }
    }

    #[test]
    fn chi_is_hermitian_for_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..5 {
            let u = random_unitary(2, &mut rng).unwrap();
            let chi = chi_from_unitary(&u, Normalization::TraceOne);
            assert!(max_entry_diff(&chi.chi, &chi.chi.adjoint()) < 1e-12);
        }
    }

    #[test]
    fn process_action_equals_conjugation() {
        // Σ_kl χ_kl P_k ρ P_l (with convention scale) must equal U ρ U†.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut cases: Vec<UnitaryOperator> = vec![
            UnitaryOperator::identity(1).unwrap(),
            UnitaryOperator::pauli_x(),
            UnitaryOperator::hadamard(),
            UnitaryOperator::cx(2, 0, 1).unwrap(),
        ];
        for _ in 0..20 {
            let n = 1 + (rng.random::<u32>() % 2) as usize;
            cases.push(random_unitary(n, &mut rng).unwrap());
        }
        for u in cases {
            let n = u.num_qubits();
            let rho = random_density(n, &mut rng);
            let expected = u.matrix() * &rho * u.matrix().adjoint();
            for norm in [Normalization::TraceOne, Normalization::TraceD] {
                let chi = chi_from_unitary(&u, norm);
                let got = apply_process(&chi, &rho).unwrap();
                assert!(max_entry_diff(&got, &expected) < 1e-10);
            }
        }
    }

    fn random_density<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
        let dim = 1 << n;
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(standard_normal(rng), standard_normal(rng))
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        m / tr
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3 {
            for _ in 0..5 {
                let u = random_unitary(n, &mut rng).unwrap();
                let gram = u.matrix().adjoint() * u.matrix();
                assert!(max_entry_diff(&gram, &CMatrix::identity(u.dim(), u.dim())) < 1e-12);
            }
        }
    }

    #[test]
    fn named_gates_are_unitary_to_1e12() {
        let gates = [
            UnitaryOperator::pauli_x(),
            UnitaryOperator::pauli_y(),
            UnitaryOperator::pauli_z(),
            UnitaryOperator::hadamard(),
            UnitaryOperator::phase_s(),
            UnitaryOperator::cx(2, 1, 0).unwrap(),
        ];
        for g in gates {
            let gram = g.matrix().adjoint() * g.matrix();
            assert!(max_entry_diff(&gram, &CMatrix::identity(g.dim(), g.dim())) < 1e-12);
        }
    }

    #[test]
    fn constructor_rejects_non_unitary() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.5), c(0.0), c(1.0)]);
        assert!(UnitaryOperator::new(m).is_err());
        let m3 = CMatrix::identity(3, 3);
        assert!(UnitaryOperator::new(m3).is_err());
    }

    #[test]
    fn bit_helpers_use_msb_first_labels() {
        // Label 0b10 on two qubits: qubit 0 set, qubit 1 clear.
        assert_eq!(bit_of(2, 0, 2), 1);
        assert_eq!(bit_of(2, 1, 2), 0);
        assert_eq!(with_bit(0, 0, 2, 1), 2);
        assert_eq!(with_bit(3, 1, 2, 0), 2);
    }
}
