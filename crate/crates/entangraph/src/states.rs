//! Constructors for the states and bases used throughout the crate.
//!
//! The channel family is ∣N¹⟩ = (∣0…0⟩ + ∣1…1⟩)/√2 over parties a, b, c, …
//! The benchmark mixed state comes from a four-qubit system coupled to a
//! six-level qudit ν; see [`psi34`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{DimVector, Label, PureState};

/// Bloch-sphere parameters (θ, φ) of the qubit to be teleported:
/// cos(θ/2)∣0⟩ + e^{iφ} sin(θ/2)∣1⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputQubitParams {
    theta: f64,
    phi: f64,
}

impl InputQubitParams {
    /// θ must lie in [0, π], φ in [0, 2π).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::Argument(format!("theta {theta} outside [0, π]")));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::Argument(format!("phi {phi} outside [0, 2π)")));
        }
        Ok(InputQubitParams { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Rotation angle ω of the single-qubit measurement basis, restricted to the
/// open interval (0, π/2) so that sin ω and cos ω are both nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationAngle {
    omega: f64,
}

impl RotationAngle {
    pub fn new(omega: f64) -> Result<Self> {
        if omega <= 0.0 || omega >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Argument(format!("omega {omega} outside (0, π/2)")));
        }
        Ok(RotationAngle { omega })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn sin(&self) -> f64 {
        self.omega.sin()
    }

    pub fn cos(&self) -> f64 {
        self.omega.cos()
    }
}

impl Default for RotationAngle {
    fn default() -> Self {
        RotationAngle {
            omega: std::f64::consts::FRAC_PI_4,
        }
    }
}

/// Labels a, b, c, … for an n-party channel.
pub fn channel_labels(n: usize) -> Vec<Label> {
    (0..n).map(|i| Label((b'a' + i as u8) as char)).collect()
}

/// Conventional owner name for a channel party (Alice, Bob, Cliff, …).
pub fn party_owner(label: Label) -> String {
    match label.0 {
        'z' | 'a' => "alice".into(),
        'b' => "bob".into(),
        'c' => "cliff".into(),
        'd' => "dave".into(),
        'e' => "emily".into(),
        'f' => "fred".into(),
        other => format!("party-{other}"),
    }
}

/// ∣N¹⟩ over n parties: (∣0…0⟩ + ∣1…1⟩)/√2, labels a, b, c, …
pub fn ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::Argument(format!(
            "a shared channel needs ≥ 2 parties, got {n}"
        )));
    }
    if n > 25 {
        return Err(Error::Argument("channel labels limited to a..y".into()));
    }
    let dims = DimVector::qubits(channel_labels(n))?;
    let d = dims.total_dim();
    let mut state = PureState::zero(dims);
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    state.set_amplitude(0, amp);
    state.set_amplitude(d - 1, amp);
    Ok(state)
}

/// The qubit whose state is teleported, labeled z:
/// cos(θ/2)∣0⟩ + e^{iφ} sin(θ/2)∣1⟩.
pub fn input_qubit(params: &InputQubitParams) -> PureState {
    let dims = DimVector::qubits(vec![Label('z')]).expect("single qubit fits any cap");
    let half = params.theta / 2.0;
    let amplitudes = vec![
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), params.phi),
    ];
    PureState::new(dims, amplitudes).expect("finite amplitudes")
}

/// The four Bell vectors Φ⁺, Φ⁻, Ψ⁺, Ψ⁻ over a generic qubit pair (a, b).
pub fn bell_basis() -> [PureState; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mk = |amps: [f64; 4]| {
        PureState::new(
            DimVector::qubits(vec![Label('a'), Label('b')]).unwrap(),
            amps.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
        .unwrap()
    };
    [
        mk([s, 0.0, 0.0, s]),  // Φ⁺
        mk([s, 0.0, 0.0, -s]), // Φ⁻
        mk([0.0, s, s, 0.0]),  // Ψ⁺
        mk([0.0, s, -s, 0.0]), // Ψ⁻
    ]
}

/// The rotated single-qubit basis {∣+⟩, ∣−⟩} defined by
/// ∣1⟩ = cos ω ∣+⟩ + sin ω ∣−⟩ and ∣0⟩ = −sin ω ∣+⟩ + cos ω ∣−⟩,
/// i.e. ∣+⟩ = −sin ω ∣0⟩ + cos ω ∣1⟩ and ∣−⟩ = cos ω ∣0⟩ + sin ω ∣1⟩.
pub fn rotated_basis(w: &RotationAngle) -> (PureState, PureState) {
    let dims = DimVector::qubits(vec![Label('q')]).unwrap();
    let plus = PureState::new(
        dims.clone(),
        vec![Complex64::new(-w.sin(), 0.0), Complex64::new(w.cos(), 0.0)],
    )
    .unwrap();
    let minus = PureState::new(
        dims,
        vec![Complex64::new(w.cos(), 0.0), Complex64::new(w.sin(), 0.0)],
    )
    .unwrap();
    (plus, minus)
}

/// The four-qubit + qudit benchmark state over (a, b, c, d, ν) with ν a
/// six-level qudit. Each of its six branches pairs an entangled sub-state
/// with a distinct qudit level:
///
/// ∣3¹⟩_abc ∣1⟩_d ∣0⟩_ν + ∣3¹⟩_abd ∣0⟩_c ∣1⟩_ν + ∣3¹⟩_acd ∣1⟩_b ∣2⟩_ν
/// + ∣3¹⟩_bcd ∣0⟩_a ∣3⟩_ν + ∣2¹⟩_ab ∣11⟩_cd ∣4⟩_ν + ∣2¹⟩_cd ∣11⟩_ab ∣5⟩_ν
///
/// Deliberately kept unnormalized: the squared norm is 6 (six orthonormal
/// branches), matching the convention of dropping the 1/12 prefactor from
/// the associated density matrix. Callers normalize on entry.
pub fn psi34() -> PureState {
    let dims = DimVector::new(
        vec![2, 2, 2, 2, 6],
        vec![Label('a'), Label('b'), Label('c'), Label('d'), Label('ν')],
    )
    .expect("96 ≤ default cap");
    let mut state = PureState::zero(dims);
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    // (abcd basis index, qudit level) pairs, one line per branch.
    let branches: [(usize, usize, usize); 6] = [
        (0b0001, 0b1111, 0), // ∣3¹⟩_abc ∣1⟩_d
        (0b0000, 0b1101, 1), // ∣3¹⟩_abd ∣0⟩_c
        (0b0100, 0b1111, 2), // ∣3¹⟩_acd ∣1⟩_b
        (0b0000, 0b0111, 3), // ∣3¹⟩_bcd ∣0⟩_a
        (0b0011, 0b1111, 4), // ∣2¹⟩_ab ∣11⟩_cd
        (0b1100, 0b1111, 5), // ∣2¹⟩_cd ∣11⟩_ab
    ];
    for (lo, hi, level) in branches {
        let idx_lo = lo * 6 + level;
        let idx_hi = hi * 6 + level;
        state.set_amplitude(idx_lo, state.amplitude(idx_lo) + amp);
        state.set_amplitude(idx_hi, state.amplitude(idx_hi) + amp);
    }
    state
}
