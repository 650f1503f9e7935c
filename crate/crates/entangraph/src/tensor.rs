//! Dense complex linear algebra over labeled multi-party registers.
//!
//! A register is described by a [`DimVector`]: an ordered list of per-party
//! dimensions (qubits, qudits) with distinct single-character labels. The
//! leftmost party occupies the most significant digit of the computational
//! index, so for a register (a, b) the basis state ∣10⟩ has a = 1, b = 0.
//!
//! Matrices are stored dense and row-major. The intended regime is small
//! registers (total dimension ≤ 4096 by default), where a dependency-free
//! cyclic Jacobi eigensolver is deterministic and plenty fast.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default ceiling on the total Hilbert-space dimension of a register.
pub const DEFAULT_DIM_CAP: usize = 4096;

static DIM_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DIM_CAP);

/// Current register dimension cap.
pub fn dim_cap() -> usize {
    DIM_CAP.load(Ordering::Relaxed)
}

/// Override the register dimension cap (see the `ENTANGRAPH_DIM_CAP`
/// environment variable honored by the CLI). Values below 2 are clamped.
pub fn set_dim_cap(cap: usize) {
    DIM_CAP.store(cap.max(2), Ordering::Relaxed);
}

/// Single-character party label (`a`, `b`, ..., `z`, `ν`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Label(pub char);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<char> for Label {
    fn from(c: char) -> Self {
        Label(c)
    }
}

impl Label {
    /// Parse a label from a one-character string.
    pub fn parse(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Ok(Label(c)),
            _ => Err(Error::Parse(format!(
                "label must be a single character, got `{s}`"
            ))),
        }
    }
}

/// Ordered per-party dimensions plus distinct labels for a register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimVector {
    dims: Vec<usize>,
    labels: Vec<Label>,
}

impl DimVector {
    /// Build a register description. Every dimension must be ≥ 2, labels must
    /// be distinct, and the total dimension must stay within [`dim_cap`].
    pub fn new(dims: Vec<usize>, labels: Vec<Label>) -> Result<Self> {
        if dims.is_empty() || dims.len() != labels.len() {
            return Err(Error::Argument(format!(
                "dimension/label lengths mismatch ({} vs {})",
                dims.len(),
                labels.len()
            )));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::Argument(format!("party dimension {d} < 2")));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Argument(format!("duplicate party label `{l}`")));
            }
        }
        let cap = dim_cap();
        let mut total: usize = 1;
        for &d in &dims {
            total = total
                .checked_mul(d)
                .filter(|&t| t <= cap)
                .ok_or(Error::Capacity {
                    total: usize::MAX,
                    cap,
                })?;
        }
        if total > cap {
            return Err(Error::Capacity { total, cap });
        }
        Ok(DimVector { dims, labels })
    }

    /// All-qubit register over the given labels.
    pub fn qubits(labels: Vec<Label>) -> Result<Self> {
        let dims = vec![2; labels.len()];
        DimVector::new(dims, labels)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn party_count(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn contains(&self, label: Label) -> bool {
        self.labels.contains(&label)
    }

    /// Position of a label within the register.
    pub fn position(&self, label: Label) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(Error::UnknownLabel(label))
    }

    /// Positions of a label set, returned in register order. Rejects unknown
    /// labels, duplicates, and the empty set.
    pub fn positions(&self, labels: &[Label]) -> Result<Vec<usize>> {
        if labels.is_empty() {
            return Err(Error::Argument("empty label set".into()));
        }
        let mut positions = Vec::with_capacity(labels.len());
        for &l in labels {
            let p = self.position(l)?;
            if positions.contains(&p) {
                return Err(Error::Argument(format!("duplicate label `{l}` in set")));
            }
            positions.push(p);
        }
        positions.sort_unstable();
        Ok(positions)
    }

    /// Sub-register over the parties at `positions` (ascending).
    pub(crate) fn subregister(&self, positions: &[usize]) -> DimVector {
        DimVector {
            dims: positions.iter().map(|&p| self.dims[p]).collect(),
            labels: positions.iter().map(|&p| self.labels[p]).collect(),
        }
    }

    /// Mixed-radix strides; the leftmost party is the most significant digit.
    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    pub(crate) fn digits_into(&self, index: usize, out: &mut [usize]) {
        let mut rem = index;
        for (i, &d) in self.dims.iter().enumerate().rev() {
            out[i] = rem % d;
            rem /= d;
        }
    }
}

fn ensure_finite(entries: &[Complex64]) -> Result<()> {
    if entries.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Argument(
            "non-finite entry (NaN/Inf) rejected".into(),
        ))
    }
}

/// Pure state: a complex amplitude vector over a labeled register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: DimVector,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(dims: DimVector, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != dims.total_dim() {
            return Err(Error::Argument(format!(
                "amplitude count {} does not match register dimension {}",
                amplitudes.len(),
                dims.total_dim()
            )));
        }
        ensure_finite(&amplitudes)?;
        Ok(PureState { dims, amplitudes })
    }

    /// All-zero-amplitude state (useful as an accumulator).
    pub fn zero(dims: DimVector) -> Self {
        let n = dims.total_dim();
        PureState {
            dims,
            amplitudes: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn dim_vector(&self) -> &DimVector {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub(crate) fn set_amplitude(&mut self, index: usize, value: Complex64) {
        self.amplitudes[index] = value;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Rescale to unit norm. Fails on (numerically) zero vectors.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 < 1e-300 {
            return Err(Error::Argument("cannot normalize a zero state".into()));
        }
        let inv = 1.0 / n2.sqrt();
        Ok(PureState {
            dims: self.dims.clone(),
            amplitudes: self.amplitudes.iter().map(|c| c * inv).collect(),
        })
    }

    /// ⟨self∣other⟩ with conjugation on `self`. Registers must have equal
    /// dimension lists (labels are not compared).
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dims.dims() != other.dims.dims() {
            return Err(Error::Argument(
                "inner product on unequal dimensions".into(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product; label sets must stay disjoint.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let dims = DimVector::new(
            [self.dims.dims(), other.dims.dims()].concat(),
            [self.dims.labels(), other.dims.labels()].concat(),
        )?;
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(PureState { dims, amplitudes })
    }

    /// Projector ∣ψ⟩⟨ψ∣ (unnormalized: trace equals ‖ψ‖²).
    pub fn outer(&self) -> DenseMatrix {
        let d = self.dims.total_dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            if self.amplitudes[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                entries[i * d + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DenseMatrix {
            dims: self.dims.clone(),
            entries,
        }
    }

    /// Apply a one-party operator (square, matching that party's dimension).
    /// The result is not renormalized.
    pub fn apply_one_party_op(&self, label: Label, op: &DenseMatrix) -> Result<PureState> {
        let pos = self.dims.position(label)?;
        let d = self.dims.dims()[pos];
        if op.dims.total_dim() != d {
            return Err(Error::Argument(format!(
                "operator dimension {} does not match party `{label}` dimension {d}",
                op.dims.total_dim()
            )));
        }
        let stride = self.dims.strides()[pos];
        let total = self.dims.total_dim();
        let mut out = vec![Complex64::new(0.0, 0.0); total];
        for base in 0..total {
            let digit = (base / stride) % d;
            if digit != 0 {
                continue;
            }
            // `base` ranges over indices with this party's digit = 0.
            for i in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += op.get(i, k) * self.amplitudes[base + k * stride];
                }
                out[base + i * stride] = acc;
            }
        }
        PureState::new(self.dims.clone(), out)
    }

    /// Schmidt rank across a bipartition: the number of eigenvalues of the
    /// reduced Gram matrix on the `cut` side exceeding `tol` times the largest
    /// eigenvalue.
    pub fn schmidt_rank(&self, cut: &[Label], tol: f64) -> Result<usize> {
        if self.norm_sqr() < 1e-300 {
            return Err(Error::Argument("Schmidt rank of a zero vector".into()));
        }
        let cut_pos = self.dims.positions(cut)?;
        if cut_pos.len() == self.dims.party_count() {
            return Err(Error::Argument(
                "cut must be a proper subset of the register".into(),
            ));
        }
        let rest_pos: Vec<usize> = (0..self.dims.party_count())
            .filter(|p| !cut_pos.contains(p))
            .collect();
        let d_cut: usize = cut_pos.iter().map(|&p| self.dims.dims()[p]).product();
        let d_rest: usize = rest_pos.iter().map(|&p| self.dims.dims()[p]).product();

        // Reshape ψ into a d_cut × d_rest matrix.
        let mut m = vec![Complex64::new(0.0, 0.0); d_cut * d_rest];
        let n = self.dims.party_count();
        let mut digits = vec![0usize; n];
        for (idx, &a) in self.amplitudes.iter().enumerate() {
            self.dims.digits_into(idx, &mut digits);
            let mut row = 0;
            for &p in &cut_pos {
                row = row * self.dims.dims()[p] + digits[p];
            }
            let mut col = 0;
            for &p in &rest_pos {
                col = col * self.dims.dims()[p] + digits[p];
            }
            m[row * d_rest + col] = a;
        }

        // Gram matrix on the cut side; its eigenvalues are the squared
        // Schmidt coefficients.
        let mut gram = vec![Complex64::new(0.0, 0.0); d_cut * d_cut];
        for r1 in 0..d_cut {
            for r2 in 0..d_cut {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..d_rest {
                    acc += m[r1 * d_rest + c] * m[r2 * d_rest + c].conj();
                }
                gram[r1 * d_cut + r2] = acc;
            }
        }
        let (values, _) = jacobi_hermitian(d_cut, gram, 1e-12)?;
        let max = values.last().copied().unwrap_or(0.0);
        if max <= 0.0 {
            return Err(Error::Numeric("degenerate Gram matrix".into()));
        }
        Ok(values.iter().filter(|&&v| v > tol * max).count())
    }
}

/// Square dense complex matrix over a labeled register, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dims: DimVector,
    entries: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn new(dims: DimVector, entries: Vec<Complex64>) -> Result<Self> {
        let d = dims.total_dim();
        if entries.len() != d * d {
            return Err(Error::Argument(format!(
                "entry count {} does not match {d}×{d}",
                entries.len()
            )));
        }
        ensure_finite(&entries)?;
        Ok(DenseMatrix { dims, entries })
    }

    pub fn zeros(dims: DimVector) -> Self {
        let d = dims.total_dim();
        DenseMatrix {
            dims,
            entries: vec![Complex64::new(0.0, 0.0); d * d],
        }
    }

    pub fn identity(dims: DimVector) -> Self {
        let d = dims.total_dim();
        let mut m = DenseMatrix::zeros(dims);
        for i in 0..d {
            m.entries[i * d + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn from_diagonal(dims: DimVector, diagonal: &[f64]) -> Result<Self> {
        let d = dims.total_dim();
        if diagonal.len() != d {
            return Err(Error::Argument("diagonal length mismatch".into()));
        }
        let mut m = DenseMatrix::zeros(dims);
        for (i, &v) in diagonal.iter().enumerate() {
            m.entries[i * d + i] = Complex64::new(v, 0.0);
        }
        Ok(m)
    }

    pub fn dim_vector(&self) -> &DimVector {
        &self.dims
    }

    pub fn size(&self) -> usize {
        self.dims.total_dim()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.size() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        let d = self.size();
        self.entries[row * d + col] = value;
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.size();
        (0..d).map(|i| self.entries[i * d + i]).sum()
    }

    pub fn scaled(&self, factor: f64) -> DenseMatrix {
        DenseMatrix {
            dims: self.dims.clone(),
            entries: self.entries.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// max over (i, j) of ∣M(i,j) − conj(M(j,i))∣.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.size();
        let mut defect: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let diff = (self.get(i, j) - self.get(j, i).conj()).norm();
                defect = defect.max(diff);
            }
        }
        defect
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest entrywise absolute difference against another matrix of the
    /// same size.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Result<f64> {
        if self.size() != other.size() {
            return Err(Error::Argument("matrix size mismatch".into()));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.size() != other.size() {
            return Err(Error::Argument("matrix size mismatch".into()));
        }
        let d = self.size();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let aik = self.entries[i * d + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += aik * other.entries[k * d + j];
                }
            }
        }
        Ok(DenseMatrix {
            dims: self.dims.clone(),
            entries,
        })
    }

    /// Kronecker product. The registers are concatenated, so labels must be
    /// disjoint and the combined dimension must respect the cap.
    pub fn kron(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        let dims = DimVector::new(
            [self.dims.dims(), other.dims.dims()].concat(),
            [self.dims.labels(), other.dims.labels()].concat(),
        )?;
        let da = self.size();
        let db = other.size();
        let d = da * db;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for ia in 0..da {
            for ja in 0..da {
                let a = self.entries[ia * da + ja];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for ib in 0..db {
                    for jb in 0..db {
                        entries[(ia * db + ib) * d + (ja * db + jb)] =
                            a * other.entries[ib * db + jb];
                    }
                }
            }
        }
        Ok(DenseMatrix { dims, entries })
    }

    /// Trace out every party not in `keep`; the result keeps the original
    /// register order. Trace and Hermiticity are preserved.
    pub fn partial_trace(&self, keep: &[Label]) -> Result<DenseMatrix> {
        let keep_pos = self.dims.positions(keep)?;
        let n = self.dims.party_count();
        let removed: Vec<usize> = (0..n).filter(|p| !keep_pos.contains(p)).collect();
        let out_dims = self.dims.subregister(&keep_pos);
        if removed.is_empty() {
            return Ok(self.clone());
        }
        let d = self.size();
        let d_out = out_dims.total_dim();
        // Precompute, per basis index, its digits collapsed onto the kept
        // and the removed parties; the main loop is then a flat D² pass.
        let mut keep_key = vec![0usize; d];
        let mut removed_key = vec![0usize; d];
        let mut digits = vec![0usize; n];
        for i in 0..d {
            self.dims.digits_into(i, &mut digits);
            let mut k = 0;
            for &p in &keep_pos {
                k = k * self.dims.dims()[p] + digits[p];
            }
            keep_key[i] = k;
            let mut r = 0;
            for &p in &removed {
                r = r * self.dims.dims()[p] + digits[p];
            }
            removed_key[i] = r;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); d_out * d_out];
        for i in 0..d {
            let row = keep_key[i] * d_out;
            for j in 0..d {
                if removed_key[i] == removed_key[j] {
                    out[row + keep_key[j]] += self.entries[i * d + j];
                }
            }
        }
        DenseMatrix::new(out_dims, out)
    }

    /// Transpose the matrix on a nonempty proper subset of its parties.
    pub fn partial_transpose(&self, subset: &[Label]) -> Result<DenseMatrix> {
        let subset_pos = self.dims.positions(subset)?;
        let n = self.dims.party_count();
        if subset_pos.len() == n {
            return Err(Error::Argument(
                "partial transpose subset must be a proper subset".into(),
            ));
        }
        let d = self.size();
        // Split every index into its subset part and the rest; transposing
        // swaps the subset parts of the row and column indices.
        let strides = self.dims.strides();
        let mut subset_key = vec![0usize; d];
        let mut digits = vec![0usize; n];
        for (i, key) in subset_key.iter_mut().enumerate() {
            self.dims.digits_into(i, &mut digits);
            *key = subset_pos.iter().map(|&p| digits[p] * strides[p]).sum();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            let rest_i = i - subset_key[i];
            for j in 0..d {
                let it = rest_i + subset_key[j];
                let jt = (j - subset_key[j]) + subset_key[i];
                out[it * d + jt] = self.entries[i * d + j];
            }
        }
        DenseMatrix::new(self.dims.clone(), out)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// sweeps. Sweeps run until the off-diagonal Frobenius norm drops below
    /// `tol·‖M‖`, or fail after 100 sweeps. Eigenvalues are ascending.
    pub fn hermitian_eigen(&self, tol: f64) -> Result<EigenResult> {
        let scale = self.frobenius_norm().max(1.0);
        if self.hermiticity_defect() > 1e-10 * scale {
            return Err(Error::Contract(format!(
                "hermitian_eigen on non-Hermitian input (defect {:.3e})",
                self.hermiticity_defect()
            )));
        }
        let d = self.size();
        // Symmetrize to scrub accumulated floating-point asymmetry.
        let mut a = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] = 0.5 * (self.entries[i * d + j] + self.entries[j * d + i].conj());
            }
        }
        let (values, vectors) = jacobi_hermitian(d, a, tol)?;
        Ok(EigenResult {
            values,
            vectors: DenseMatrix {
                dims: self.dims.clone(),
                entries: vectors,
            },
        })
    }
}

/// Sorted eigenvalues plus the aligned unitary of column eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl EigenResult {
    /// The `k`-th eigenvector as a pure state over the matrix register.
    pub fn vector(&self, k: usize) -> PureState {
        let d = self.vectors.size();
        let amplitudes = (0..d).map(|i| self.vectors.get(i, k)).collect();
        PureState {
            dims: self.vectors.dims.clone(),
            amplitudes,
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

const MAX_JACOBI_SWEEPS: usize = 100;

fn offdiag_norm(n: usize, a: &[Complex64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Cyclic complex Jacobi on a Hermitian matrix (row-major, consumed).
/// Returns ascending eigenvalues and the matching column eigenvectors.
fn jacobi_hermitian(
    n: usize,
    mut a: Vec<Complex64>,
    tol: f64,
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let scale = {
        let s: f64 = a.iter().map(|c| c.norm_sqr()).sum();
        s.sqrt()
    };
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let threshold = tol * scale;
    let mut converged = offdiag_norm(n, &a) <= threshold;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let alpha = a[p * n + p].re;
                let gamma = a[q * n + q].re;
                let u = apq / r; // unit phase of the pivot
                let theta = (gamma - alpha) / (2.0 * r);
                // Smaller-magnitude root of t² − 2θt − 1 = 0.
                let t = -theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let new_pp = alpha * c * c + 2.0 * r * s * c + gamma * s * s;
                let new_qq = alpha * s * s - 2.0 * r * s * c + gamma * c * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let np = c * akp + s * u.conj() * akq;
                    let nq = -s * u * akp + c * akq;
                    a[k * n + p] = np;
                    a[p * n + k] = np.conj();
                    a[k * n + q] = nq;
                    a[q * n + k] = nq.conj();
                }
                a[p * n + p] = Complex64::new(new_pp, 0.0);
                a[q * n + q] = Complex64::new(new_qq, 0.0);
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp + s * u.conj() * vkq;
                    v[k * n + q] = -s * u * vkp + c * vkq;
                }
            }
        }
        converged = offdiag_norm(n, &a) <= threshold;
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "Jacobi eigensolver did not converge in {MAX_JACOBI_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = vec![Complex64::new(0.0, 0.0); n * n];
    for (newcol, &oldcol) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + newcol] = v[k * n + oldcol];
        }
    }
    Ok((values, vectors))
}
