//! Entanglement-structure analysis of small mixed states.
//!
//! The workflow mirrors the partial-transpose bookkeeping used to classify
//! the benchmark state: for every party subset T (∣T∣ ≥ 2) of a density
//! matrix, the spectra of all partial transposes of ρ_T are computed. A
//! subset is declared entangled when every cut is NPT, or — when the cuts
//! disagree — when ρ_T still owns an eigenvector that is entangled across
//! every bipartition of T. Two-party subsets are settled by the transpose
//! criterion alone, which is conclusive at 2×2.
//!
//! The surviving subsets form an [`EntPolynomial`] after the redundancy
//! rule removes every monomial whose one-smaller faces are all present.
//!
//! These are procedure-level verdicts: the eigenvector fallback is a
//! heuristic, not a complete separability test, and no maximality claim is
//! attached to a flagged subset.
//!
//! Everything here is a pure function of its inputs. Subset spectra are
//! independent computations, so callers may parallelize across subsets;
//! the built-in sweep evaluates them in a fixed (size, lexicographic)
//! order and its reports are deterministic.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tensor::{DenseMatrix, Label};

/// Absolute threshold below which a transpose eigenvalue counts as negative
/// (on the trace-normalized scale).
pub const NPT_EPS: f64 = 1e-9;

/// Eigenvalue threshold for the eigenvector fallback.
const FALLBACK_EIGENVALUE_EPS: f64 = 1e-9;

/// Relative Schmidt-rank tolerance used by the fallback.
const SCHMIDT_TOL: f64 = 1e-8;

/// Solver tolerance for every spectrum computed here.
const EIGEN_TOL: f64 = 1e-12;

/// A set of at least two party labels; one term of an [`EntPolynomial`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Monomial {
    parties: BTreeSet<Label>,
}

impl Monomial {
    pub fn new<I: IntoIterator<Item = Label>>(labels: I) -> Result<Self> {
        let parties: BTreeSet<Label> = labels.into_iter().collect();
        if parties.len() < 2 {
            return Err(Error::Argument(
                "a monomial needs at least two parties".into(),
            ));
        }
        Ok(Monomial { parties })
    }

    pub fn parse(s: &str) -> Result<Self> {
        Monomial::new(s.chars().map(Label))
    }

    pub fn len(&self) -> usize {
        self.parties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parties.is_empty() // never true; construction requires ≥ 2 parties
    }

    pub fn contains(&self, label: Label) -> bool {
        self.parties.contains(&label)
    }

    pub fn parties(&self) -> impl Iterator<Item = Label> + '_ {
        self.parties.iter().copied()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.parties.iter().copied().collect()
    }

    /// All subsets with one party removed (still valid monomials only when
    /// the result keeps ≥ 2 parties; single labels are returned regardless
    /// for presence checks).
    fn faces(&self) -> Vec<BTreeSet<Label>> {
        self.parties
            .iter()
            .map(|drop| self.parties.iter().copied().filter(|l| l != drop).collect())
            .collect()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.parties {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A set of monomials describing which party subsets are entangled.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct EntPolynomial {
    monomials: BTreeSet<Monomial>,
}

impl EntPolynomial {
    pub fn empty() -> Self {
        EntPolynomial::default()
    }

    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(monomials: I) -> Self {
        EntPolynomial {
            monomials: monomials.into_iter().collect(),
        }
    }

    /// Parse `+`-separated monomials (`abc+ad+be`); whitespace is ignored
    /// and `0` (or the empty string) denotes the zero polynomial.
    pub fn parse(text: &str) -> Result<Self> {
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() || cleaned == "0" {
            return Ok(EntPolynomial::empty());
        }
        let mut monomials = BTreeSet::new();
        for term in cleaned.split('+') {
            if term.is_empty() {
                return Err(Error::Parse("empty monomial between `+` separators".into()));
            }
            if !term.chars().all(|c| c.is_ascii_lowercase()) {
                return Err(Error::Parse(format!(
                    "monomial `{term}` must use lowercase single-letter variables"
                )));
            }
            let m = Monomial::parse(term)?;
            if m.len() != term.chars().count() {
                return Err(Error::Parse(format!(
                    "repeated variable in monomial `{term}`"
                )));
            }
            monomials.insert(m);
        }
        Ok(EntPolynomial { monomials })
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.monomials.contains(m)
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.monomials.iter()
    }

    /// Every label appearing in some monomial.
    pub fn variables(&self) -> BTreeSet<Label> {
        self.monomials.iter().flat_map(|m| m.parties()).collect()
    }

    /// Canonical listing: size descending, lexicographic within a size.
    pub fn canonical(&self) -> Vec<&Monomial> {
        let mut v: Vec<&Monomial> = self.monomials.iter().collect();
        v.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        v
    }

    /// Apply the redundancy rule: walking monomials from the largest size
    /// down, drop one exactly when every face with one fewer party is still
    /// present. Within a size the walk order is immaterial (faces are
    /// strictly smaller), so the result is deterministic.
    pub fn simplify(&self) -> EntPolynomial {
        let mut alive: BTreeSet<BTreeSet<Label>> =
            self.monomials.iter().map(|m| m.parties.clone()).collect();
        for m in self.canonical() {
            if m.faces().iter().all(|f| alive.contains(f)) {
                alive.remove(&m.parties);
            }
        }
        EntPolynomial {
            monomials: alive
                .into_iter()
                .map(|parties| Monomial { parties })
                .collect(),
        }
    }

    /// Remove every monomial containing `x` (tracing that party out).
    pub fn set_variable_zero(&self, x: Label) -> EntPolynomial {
        EntPolynomial {
            monomials: self
                .monomials
                .iter()
                .filter(|m| !m.contains(x))
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for EntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self.canonical().iter().map(|m| m.to_string()).collect();
        write!(f, "{}", terms.join("+"))
    }
}

/// Spectrum of one partial transpose of a reduced state.
#[derive(Clone, Debug)]
pub struct CutReport {
    pub cut: Vec<Label>,
    pub spectrum: Vec<f64>,
    pub min_eigenvalue: f64,
    pub npt: bool,
}

/// All cut spectra for one party subset.
#[derive(Clone, Debug)]
pub struct SubsetReport {
    pub parties: Vec<Label>,
    pub cuts: Vec<CutReport>,
}

impl SubsetReport {
    pub fn all_cuts_npt(&self) -> bool {
        self.cuts.iter().all(|c| c.npt)
    }

    pub fn any_cut_npt(&self) -> bool {
        self.cuts.iter().any(|c| c.npt)
    }
}

/// Transpose spectra for every subset of a density matrix, subsets ordered
/// by (size, lexicographic).
#[derive(Clone, Debug)]
pub struct PptReport {
    pub subsets: Vec<SubsetReport>,
}

impl PptReport {
    pub fn subset(&self, parties: &[Label]) -> Option<&SubsetReport> {
        let key: BTreeSet<Label> = parties.iter().copied().collect();
        self.subsets
            .iter()
            .find(|s| s.parties.len() == key.len() && s.parties.iter().all(|l| key.contains(l)))
    }
}

/// How a subset verdict was reached.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DecisionBasis {
    /// Two-party subset settled by the transpose criterion alone.
    PairPpt,
    /// Every cut of the subset has a negative transpose eigenvalue.
    AllCutsNpt,
    /// Mixed cuts; the eigenvector fallback decided.
    EigenvectorFallback,
    /// Every cut is PPT; the subset is treated as not entangled.
    AllCutsPpt,
}

impl DecisionBasis {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecisionBasis::PairPpt => "ppt",
            DecisionBasis::AllCutsNpt => "npt-all-cuts",
            DecisionBasis::EigenvectorFallback => "eigenvector-fallback",
            DecisionBasis::AllCutsPpt => "ppt-all-cuts",
        }
    }
}

/// Full analysis bundle: spectra, per-subset verdicts, final polynomial.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub report: PptReport,
    pub verdicts: Vec<(Monomial, bool, DecisionBasis)>,
    pub polynomial: EntPolynomial,
}

fn subsets_of(labels: &[Label], min_size: usize) -> Vec<Vec<Label>> {
    let n = labels.len();
    let mut out: Vec<Vec<Label>> = Vec::new();
    for mask in 1u32..(1 << n) {
        if (mask.count_ones() as usize) < min_size {
            continue;
        }
        let subset: Vec<Label> = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| labels[i])
            .collect();
        out.push(subset);
    }
    // Size ascending, then lexicographic.
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Validate, normalize, and return a trace-one copy of a density matrix.
fn normalized_density(rho: &DenseMatrix) -> Result<DenseMatrix> {
    let scale = rho.frobenius_norm().max(1.0);
    if rho.hermiticity_defect() > 1e-10 * scale {
        return Err(Error::Contract("density matrix is not Hermitian".into()));
    }
    let tr = rho.trace();
    if tr.re <= 1e-12 || tr.im.abs() > 1e-10 * scale {
        return Err(Error::Contract(format!(
            "density matrix trace {tr} is not positive"
        )));
    }
    let normalized = rho.scaled(1.0 / tr.re);
    let eig = normalized.hermitian_eigen(EIGEN_TOL)?;
    if eig.min_value() < -NPT_EPS {
        return Err(Error::Contract(format!(
            "density matrix is not positive semidefinite (min eigenvalue {:.3e})",
            eig.min_value()
        )));
    }
    Ok(normalized)
}

/// Spectra of every partial transpose of every reduced subset (∣T∣ ≥ 2) of
/// `rho`, after trace normalization. Cut spectra are reported for each
/// nonempty proper cut, including complements (whose spectra must agree).
pub fn ppt_sweep(rho: &DenseMatrix) -> Result<PptReport> {
    let rho = normalized_density(rho)?;
    let labels = rho.dim_vector().labels().to_vec();
    let mut subsets = Vec::new();
    for parties in subsets_of(&labels, 2) {
        let reduced = rho.partial_trace(&parties)?;
        let mut cuts = Vec::new();
        for cut in subsets_of(&parties, 1) {
            if cut.len() == parties.len() {
                continue;
            }
            let pt = reduced.partial_transpose(&cut)?;
            let eig = pt.hermitian_eigen(EIGEN_TOL)?;
            let min = eig.min_value();
            cuts.push(CutReport {
                cut,
                min_eigenvalue: min,
                npt: min < -NPT_EPS,
                spectrum: eig.values,
            });
        }
        subsets.push(SubsetReport { parties, cuts });
    }
    Ok(PptReport { subsets })
}

/// Fallback test for subsets whose cuts disagree: true when the reduced
/// state has at least one eigenvector (eigenvalue > 1e-9) whose Schmidt rank
/// is ≥ 2 across every bipartition of the subset.
pub fn eigenvector_fallback(rho_subset: &DenseMatrix) -> Result<bool> {
    let labels = rho_subset.dim_vector().labels().to_vec();
    if labels.len() < 2 {
        return Ok(false);
    }
    let eig = rho_subset.hermitian_eigen(EIGEN_TOL)?;
    // Canonical halves: bipartitions containing the first label.
    let bipartitions: Vec<Vec<Label>> = subsets_of(&labels, 1)
        .into_iter()
        .filter(|cut| cut.len() < labels.len() && cut.contains(&labels[0]))
        .collect();
    for (k, &value) in eig.values.iter().enumerate() {
        if value <= FALLBACK_EIGENVALUE_EPS {
            continue;
        }
        let vector = eig.vector(k);
        let mut genuinely_multipartite = true;
        for cut in &bipartitions {
            if vector.schmidt_rank(cut, SCHMIDT_TOL)? < 2 {
                genuinely_multipartite = false;
                break;
            }
        }
        if genuinely_multipartite {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Run the full sweep and per-subset verdicts.
pub fn analyze_density(rho: &DenseMatrix) -> Result<Analysis> {
    let normalized = normalized_density(rho)?;
    let report = ppt_sweep(rho)?;
    let mut verdicts = Vec::new();
    for subset in &report.subsets {
        let monomial = Monomial::new(subset.parties.iter().copied())?;
        let (entangled, basis) = if subset.parties.len() == 2 {
            (subset.any_cut_npt(), DecisionBasis::PairPpt)
        } else if subset.all_cuts_npt() {
            (true, DecisionBasis::AllCutsNpt)
        } else if subset.any_cut_npt() {
            let reduced = normalized.partial_trace(&subset.parties)?;
            (
                eigenvector_fallback(&reduced)?,
                DecisionBasis::EigenvectorFallback,
            )
        } else {
            (false, DecisionBasis::AllCutsPpt)
        };
        verdicts.push((monomial, entangled, basis));
    }
    let polynomial = EntPolynomial::from_monomials(
        verdicts
            .iter()
            .filter(|(_, e, _)| *e)
            .map(|(m, _, _)| m.clone()),
    )
    .simplify();
    Ok(Analysis {
        report,
        verdicts,
        polynomial,
    })
}

/// The set of party subsets declared entangled by the sweep + fallback.
pub fn entangled_subsets(rho: &DenseMatrix) -> Result<BTreeSet<Monomial>> {
    Ok(analyze_density(rho)?
        .verdicts
        .into_iter()
        .filter(|(_, e, _)| *e)
        .map(|(m, _, _)| m)
        .collect())
}

/// Entanglement polynomial of a density matrix: the entangled subsets after
/// the redundancy rule.
pub fn extract_polynomial(rho: &DenseMatrix) -> Result<EntPolynomial> {
    Ok(analyze_density(rho)?.polynomial)
}

fn fmt_fixed6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

impl Analysis {
    /// JSON report: per-subset spectra at fixed 6-decimal formatting, NPT
    /// flags, verdicts, and the canonical polynomial string. Keys are sorted.
    pub fn to_json(&self) -> Value {
        let subsets: Vec<Value> = self
            .report
            .subsets
            .iter()
            .zip(&self.verdicts)
            .map(|(subset, (monomial, entangled, basis))| {
                let cuts: Vec<Value> = subset
                    .cuts
                    .iter()
                    .map(|c| {
                        json!({
                            "cut": c.cut.iter().map(|l| l.to_string()).collect::<String>(),
                            "min_eigenvalue": fmt_fixed6(c.min_eigenvalue),
                            "npt": c.npt,
                            "spectrum": c.spectrum.iter().map(|&v| fmt_fixed6(v)).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({
                    "cuts": cuts,
                    "decided_by": basis.as_str(),
                    "entangled": entangled,
                    "parties": monomial.to_string(),
                })
            })
            .collect();
        json!({
            "polynomial": self.polynomial.to_string(),
            "subsets": subsets,
        })
    }
}
