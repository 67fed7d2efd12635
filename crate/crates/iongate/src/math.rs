//! Dense complex linear algebra for few-qubit dynamics: matrices, state
//! vectors, Pauli strings, operator embedding and Hermitian propagators.
//!
//! Conventions: |0⟩ is the +1 eigenstate of σz, |1⟩ the −1 eigenstate, and
//! the basis index of |b₀b₁…⟩ reads qubit 0 as the most significant bit.
//! All angular frequencies are rad/s with ħ absorbed, so a Hamiltonian `h`
//! passed to [`expm_herm`] is H/ħ and the propagator is exp(−i h t).

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MathError {
    #[error("matrix is not Hermitian (max |A - A†| = {0:.3e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("duplicate qubit index {0}")]
    DuplicateQubit(usize),
    #[error("invalid Pauli character '{0}' (expected I, X, Y or Z)")]
    BadPauliChar(char),
    #[error("eigensolver failed to converge after {0} sweeps")]
    NoConvergence(usize),
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.max_abs_diff(&self.dagger()) < tol
    }

    /// Largest deviation of U†U from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        self.dagger().mul(self).max_abs_diff(&CMatrix::identity(self.rows))
    }

    /// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
    /// Returns (eigenvalues, V) with `self = V diag(λ) V†`; eigenvalues are
    /// sorted ascending.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMatrix), MathError> {
        let scale = self.max_abs().max(1.0);
        let herm_defect = self.max_abs_diff(&self.dagger());
        if self.rows != self.cols || herm_defect > 1e-12 * scale {
            return Err(MathError::NotHermitian(herm_defect));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut v = CMatrix::identity(n);
        let max_sweeps = 64;
        for sweep in 0..=max_sweeps {
            let off: f64 = (0..n)
                .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
                .map(|(p, q)| a[(p, q)].norm_sqr())
                .sum();
            if off.sqrt() <= 1e-15 * scale {
                break;
            }
            if sweep == max_sweeps {
                return Err(MathError::NoConvergence(max_sweeps));
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let b = a[(p, q)];
                    if b.norm() <= 1e-300 {
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let theta = 0.5 * (2.0 * b.norm()).atan2(app - aqq);
                    let c = theta.cos();
                    let phase = b / b.norm();
                    let s = C64::new(theta.sin(), 0.0) * phase.conj();
                    // apply A <- J† A J on rows/cols p,q
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * c + akq * s;
                        a[(k, q)] = -akp * s.conj() + akq * c;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = apk * c + aqk * s.conj();
                        a[(q, k)] = -apk * s + aqk * c;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c + vkq * s;
                        v[(k, q)] = -vkp * s.conj() + vkq * c;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
        let eigvals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut vs = CMatrix::zeros(n, n);
        for (newcol, &oldcol) in order.iter().enumerate() {
            for k in 0..n {
                vs[(k, newcol)] = v[(k, oldcol)];
            }
        }
        Ok((eigvals, vs))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Tensor product a ⊗ b.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let f = a[(ia, ja)];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out[(ia * b.rows + ib, ja * b.cols + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// exp(−i h t) for Hermitian `h` (angular-frequency units), via full
/// eigendecomposition. Rejects non-Hermitian input.
pub fn expm_herm(h: &CMatrix, t: f64) -> Result<CMatrix, MathError> {
    let (vals, v) = h.eigh()?;
    let n = h.rows();
    let mut d = CMatrix::zeros(n, n);
    for (i, lam) in vals.iter().enumerate() {
        d[(i, i)] = C64::from_polar(1.0, -lam * t);
    }
    Ok(v.mul(&d).mul(&v.dagger()))
}

/// Embed `op` (acting on `targets`, first index most significant) into an
/// `n`-qubit operator, identity elsewhere.
pub fn embed(op: &CMatrix, targets: &[usize], n: usize) -> Result<CMatrix, MathError> {
    let k = targets.len();
    if op.rows() != (1 << k) || op.cols() != (1 << k) {
        return Err(MathError::DimensionMismatch(format!(
            "operator is {}x{}, expected {}x{} for {} target(s)",
            op.rows(),
            op.cols(),
            1 << k,
            1 << k,
            k
        )));
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(MathError::QubitOutOfRange { index: t, n_qubits: n });
        }
        if targets[..i].contains(&t) {
            return Err(MathError::DuplicateQubit(t));
        }
    }
    let dim = 1usize << n;
    let sub = |full: usize| -> usize {
        targets
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((full >> (n - 1 - q)) & 1))
    };
    let rest_mask: usize =
        (0..n).filter(|q| !targets.contains(q)).map(|q| 1usize << (n - 1 - q)).sum();
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if i & rest_mask == j & rest_mask {
                out[(i, j)] = op[(sub(i), sub(j))];
            }
        }
    }
    Ok(out)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    ])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
    ])
}

/// In-plane Pauli axis cos(φ)σx + sin(φ)σy.
pub fn pauli_axis(phi: f64) -> CMatrix {
    pauli_x().scale(C64::new(phi.cos(), 0.0)).add(&pauli_y().scale(C64::new(phi.sin(), 0.0)))
}

/// Rotation exp(−i(angle/2)(cos φ σx + sin φ σy)): the `angle^phase` gate.
pub fn rotation(phi: f64, angle: f64) -> CMatrix {
    let half = 0.5 * angle;
    CMatrix::identity(2)
        .scale(C64::new(half.cos(), 0.0))
        .add(&pauli_axis(phi).scale(C64::new(0.0, -half.sin())))
}

/// A word over {I, X, Y, Z}; one letter per qubit, leftmost letter on the
/// most significant qubit (lexicographic ordering matches base-4 digits).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    label: String,
}

impl PauliString {
    pub fn new(label: &str) -> Result<Self, MathError> {
        for ch in label.chars() {
            if !matches!(ch, 'I' | 'X' | 'Y' | 'Z') {
                return Err(MathError::BadPauliChar(ch));
            }
        }
        Ok(Self { label: label.to_string() })
    }

    /// The i-th string of `n` qubits in lexicographic order (i in base 4,
    /// digits I=0, X=1, Y=2, Z=3).
    pub fn from_index(index: usize, n_qubits: usize) -> Self {
        let letters = ['I', 'X', 'Y', 'Z'];
        let label: String = (0..n_qubits)
            .map(|q| letters[(index >> (2 * (n_qubits - 1 - q))) & 3])
            .collect();
        Self { label }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_qubits(&self) -> usize {
        self.label.len()
    }

    pub fn is_identity(&self) -> bool {
        self.label.chars().all(|c| c == 'I')
    }

    /// Letters restricted to `subset` are all I.
    pub fn is_identity_on(&self, subset: &[usize]) -> bool {
        self.label
            .chars()
            .enumerate()
            .all(|(q, c)| c == 'I' || !subset.contains(&q))
    }

    pub fn matrix(&self) -> CMatrix {
        let mut out = CMatrix::identity(1);
        for ch in self.label.chars() {
            let p = match ch {
                'I' => CMatrix::identity(2),
                'X' => pauli_x(),
                'Y' => pauli_y(),
                _ => pauli_z(),
            };
            out = kron(&out, &p);
        }
        out
    }
}

/// Tensor-product matrix of a Pauli string label.
pub fn pauli_matrix(p: &PauliString) -> CMatrix {
    p.matrix()
}

/// Normalized amplitude vector over the 2ⁿ computational basis states.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Computational basis state |index⟩.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { n_qubits, amplitudes }
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self, MathError> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(MathError::DimensionMismatch(format!(
                "{} amplitudes for {} qubits",
                amplitudes.len(),
                n_qubits
            )));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// ψ ← U ψ. Panics on dimension mismatch.
    pub fn apply(&self, u: &CMatrix) -> StateVector {
        assert_eq!(u.cols(), self.dim(), "operator/state dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); u.rows()];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..u.cols() {
                *o += u[(i, j)] * self.amplitudes[j];
            }
        }
        StateVector { n_qubits: self.n_qubits, amplitudes: out }
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}
