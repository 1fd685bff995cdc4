//! Generalised Cheshire-cat interferometer, its path/polarisation dual, and
//! their closed-form weak-value references.
//!
//! Generalised experiment (arm phase θ, elliptical-basis phase φ):
//!
//! ```text
//! |Φ_i⟩ = (e^{iθ}|A⟩ + |B⟩)|H⟩ / √2
//! |Φ_f⟩ = (|A⟩|H⟩ + |B⟩|V⟩) / √2
//! |L⟩, |R⟩ = (|H⟩ ± e^{iφ}|V⟩) / √2
//! σ_A = (|L⟩⟨L| - |R⟩⟨R|) ⊗ |A⟩⟨A|,   σ_B likewise on arm B
//! ```
//!
//! Dual experiment (paths and polarisations exchanged):
//!
//! ```text
//! |Ψ_i⟩ = (e^{iφ}|H⟩ + |V⟩)|A⟩ / √2,     |Ψ_f⟩ = |Φ_f⟩
//! |±⟩ = (|A⟩ ± e^{iθ}|B⟩) / √2
//! σ_H = (|+⟩⟨+| - |-⟩⟨-|) ⊗ |H⟩⟨H|,   σ_V likewise on V
//! ```
//!
//! Weak values are always computed from these states and operators rather
//! than taken from closed forms; see [`DUAL_PHASE_SIGN_NOTE`].

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{sandwich, Basis, HilbertError, Operator, Path, Polarisation, StateVector, Tensor};
use crate::weak::{weak_value, PrePostPair, WeakError, WeakValue};

/// Caveat attached to every dual-experiment report.
pub const DUAL_PHASE_SIGN_NOTE: &str = "sign convention: evaluating ⟨Ψ_f|σ_V|Ψ_i⟩/⟨Ψ_f|Ψ_i⟩ with \
|Ψ_i⟩ = (e^{iφ}|H⟩+|V⟩)|A⟩/√2 and |±⟩ = (|A⟩±e^{iθ}|B⟩)/√2 gives e^{i(θ-φ)}. The closed form \
e^{i(φ-θ)} often quoted for this weak value has the opposite sign of the imaginary part; the real \
parts agree. Reported values are the computed e^{i(θ-φ)}.";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("phase {name} must be finite, got {value}")]
    NonFinitePhase { name: &'static str, value: f64 },
    #[error("unknown operator '{0}'")]
    UnknownOperator(String),
    #[error("operator {operator} does not belong to the {kind} experiment")]
    WrongKind {
        operator: OperatorName,
        kind: ExperimentKind,
    },
    #[error("unknown experiment kind '{0}' (expected 'qcc' or 'dual')")]
    UnknownKind(String),
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("weak value of {operator} has non-zero real part {value} at φ = {phi}")]
    NonVanishingReference {
        operator: OperatorName,
        phi: f64,
        value: f64,
    },
    #[error(transparent)]
    Weak(#[from] WeakError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Phases of the interferometer: `theta` between the arms, `phi` of the
/// elliptical (or, for the dual, the pre-selected polarisation) basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QccConfig {
    pub theta: f64,
    pub phi: f64,
}

impl QccConfig {
    pub fn new(theta: f64, phi: f64) -> Result<Self, ExperimentError> {
        if !theta.is_finite() {
            return Err(ExperimentError::NonFinitePhase {
                name: "theta",
                value: theta,
            });
        }
        if !phi.is_finite() {
            return Err(ExperimentError::NonFinitePhase {
                name: "phi",
                value: phi,
            });
        }
        Ok(Self { theta, phi })
    }

    /// `(θ mod 2π, φ mod 2π)` for reporting.
    pub fn reduced(&self) -> (f64, f64) {
        (self.theta.rem_euclid(TAU), self.phi.rem_euclid(TAU))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "qcc")]
    GeneralisedQcc,
    #[serde(rename = "dual")]
    DualQcc,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::GeneralisedQcc => "qcc",
            ExperimentKind::DualQcc => "dual",
        }
    }

    /// The four observables of this experiment, in report order.
    pub fn operators(self) -> [OperatorName; 4] {
        match self {
            ExperimentKind::GeneralisedQcc => [
                OperatorName::A,
                OperatorName::B,
                OperatorName::SigmaA,
                OperatorName::SigmaB,
            ],
            ExperimentKind::DualQcc => [
                OperatorName::H,
                OperatorName::V,
                OperatorName::SigmaH,
                OperatorName::SigmaV,
            ],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qcc" | "generalised" | "generalized" => Ok(ExperimentKind::GeneralisedQcc),
            "dual" => Ok(ExperimentKind::DualQcc),
            _ => Err(ExperimentError::UnknownKind(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorName {
    A,
    B,
    #[serde(rename = "sigma_A")]
    SigmaA,
    #[serde(rename = "sigma_B")]
    SigmaB,
    H,
    V,
    #[serde(rename = "sigma_H")]
    SigmaH,
    #[serde(rename = "sigma_V")]
    SigmaV,
}

impl OperatorName {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorName::A => "A",
            OperatorName::B => "B",
            OperatorName::SigmaA => "sigma_A",
            OperatorName::SigmaB => "sigma_B",
            OperatorName::H => "H",
            OperatorName::V => "V",
            OperatorName::SigmaH => "sigma_H",
            OperatorName::SigmaV => "sigma_V",
        }
    }

    pub fn kind(self) -> ExperimentKind {
        match self {
            OperatorName::A | OperatorName::B | OperatorName::SigmaA | OperatorName::SigmaB => {
                ExperimentKind::GeneralisedQcc
            }
            _ => ExperimentKind::DualQcc,
        }
    }
}

impl fmt::Display for OperatorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let name = match s {
            "A" => OperatorName::A,
            "B" => OperatorName::B,
            "sigma_A" | "sigmaA" => OperatorName::SigmaA,
            "sigma_B" | "sigmaB" => OperatorName::SigmaB,
            "H" => OperatorName::H,
            "V" => OperatorName::V,
            "sigma_H" | "sigmaH" => OperatorName::SigmaH,
            "sigma_V" | "sigmaV" => OperatorName::SigmaV,
            _ => return Err(ExperimentError::UnknownOperator(s.to_owned())),
        };
        Ok(name)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `(|L⟩, |R⟩) = ((|H⟩ + e^{iφ}|V⟩)/√2, (|H⟩ - e^{iφ}|V⟩)/√2)`.
pub fn elliptical_states(phi: f64) -> (StateVector, StateVector) {
    let e = C64::from_polar(FRAC_1_SQRT_2, phi);
    let h = c(FRAC_1_SQRT_2, 0.0);
    (
        StateVector::new(Basis::Polarisation, vec![h, e]).expect("two amplitudes"),
        StateVector::new(Basis::Polarisation, vec![h, -e]).expect("two amplitudes"),
    )
}

/// `(|+⟩, |-⟩) = ((|A⟩ + e^{iθ}|B⟩)/√2, (|A⟩ - e^{iθ}|B⟩)/√2)`.
pub fn arm_superposition_states(theta: f64) -> (StateVector, StateVector) {
    let e = C64::from_polar(FRAC_1_SQRT_2, theta);
    let a = c(FRAC_1_SQRT_2, 0.0);
    (
        StateVector::new(Basis::Path, vec![a, e]).expect("two amplitudes"),
        StateVector::new(Basis::Path, vec![a, -e]).expect("two amplitudes"),
    )
}

/// `|L⟩⟨L| - |R⟩⟨R|` (or `|+⟩⟨+| - |-⟩⟨-|`) from a pair of basis states.
fn difference_of_projectors(up: &StateVector, down: &StateVector) -> Operator {
    Operator::projector(up)
        .and_then(|p| p.try_sub(&Operator::projector(down)?))
        .and_then(Operator::with_hermitian)
        .expect("orthonormal pair")
}

/// The shared post-selection `|Φ_f⟩ = (|A,H⟩ + |B,V⟩)/√2`.
pub fn post_selection_state() -> StateVector {
    StateVector::new(
        Basis::Composite,
        vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0)],
    )
    .expect("four amplitudes")
}

/// `|Φ_i⟩` and `|Φ_f⟩` of the generalised experiment.
pub fn build_qcc_states(cfg: &QccConfig) -> PrePostPair {
    let arms = StateVector::new(
        Basis::Path,
        vec![C64::from_polar(FRAC_1_SQRT_2, cfg.theta), c(FRAC_1_SQRT_2, 0.0)],
    )
    .expect("two amplitudes");
    let pre = arms
        .tensor(&StateVector::polarisation(Polarisation::H))
        .expect("path ⊗ polarisation");
    PrePostPair::new(pre, post_selection_state()).expect("normalised composite states")
}

/// `|Ψ_i⟩` and `|Ψ_f⟩` of the dual experiment.
pub fn build_dual_states(cfg: &QccConfig) -> PrePostPair {
    let pol = StateVector::new(
        Basis::Polarisation,
        vec![C64::from_polar(FRAC_1_SQRT_2, cfg.phi), c(FRAC_1_SQRT_2, 0.0)],
    )
    .expect("two amplitudes");
    let pre = pol.tensor(&StateVector::path(Path::A)).expect("polarisation ⊗ path");
    PrePostPair::new(pre, post_selection_state()).expect("normalised composite states")
}

pub fn build_states(kind: ExperimentKind, cfg: &QccConfig) -> PrePostPair {
    match kind {
        ExperimentKind::GeneralisedQcc => build_qcc_states(cfg),
        ExperimentKind::DualQcc => build_dual_states(cfg),
    }
}

#[derive(Debug, Clone)]
pub struct QccOperators {
    pub a: Operator,
    pub b: Operator,
    pub sigma_a: Operator,
    pub sigma_b: Operator,
}

#[derive(Debug, Clone)]
pub struct DualOperators {
    pub h: Operator,
    pub v: Operator,
    pub sigma_h: Operator,
    pub sigma_v: Operator,
}

fn arm_projector(path: Path) -> Operator {
    Operator::projector(&StateVector::path(path))
        .expect("basis ket")
        .tensor(&Operator::identity(Basis::Polarisation))
        .expect("path ⊗ polarisation")
}

fn polarisation_projector(pol: Polarisation) -> Operator {
    Operator::identity(Basis::Path)
        .tensor(&Operator::projector(&StateVector::polarisation(pol)).expect("basis ket"))
        .expect("path ⊗ polarisation")
}

/// `Â`, `B̂`, `σ̂_A`, `σ̂_B` of the generalised experiment.
pub fn build_qcc_operators(cfg: &QccConfig) -> QccOperators {
    let (l, r) = elliptical_states(cfg.phi);
    let pol = difference_of_projectors(&l, &r);
    let on_arm = |path: Path| {
        Operator::projector(&StateVector::path(path))
            .and_then(|p| p.tensor(&pol))
            .and_then(Operator::with_hermitian)
            .expect("hermitian product of commuting factors")
    };
    QccOperators {
        a: arm_projector(Path::A),
        b: arm_projector(Path::B),
        sigma_a: on_arm(Path::A),
        sigma_b: on_arm(Path::B),
    }
}

/// `Ĥ`, `V̂`, `σ̂_H`, `σ̂_V` of the dual experiment.
pub fn build_dual_operators(cfg: &QccConfig) -> DualOperators {
    let (plus, minus) = arm_superposition_states(cfg.theta);
    let phase = difference_of_projectors(&plus, &minus);
    let on_pol = |pol: Polarisation| {
        Operator::projector(&StateVector::polarisation(pol))
            .and_then(|p| phase.tensor(&p))
            .and_then(Operator::with_hermitian)
            .expect("hermitian product of commuting factors")
    };
    DualOperators {
        h: polarisation_projector(Polarisation::H),
        v: polarisation_projector(Polarisation::V),
        sigma_h: on_pol(Polarisation::H),
        sigma_v: on_pol(Polarisation::V),
    }
}

/// Looks up one named observable.
pub fn build_operator(name: OperatorName, cfg: &QccConfig) -> Operator {
    match name.kind() {
        ExperimentKind::GeneralisedQcc => {
            let ops = build_qcc_operators(cfg);
            match name {
                OperatorName::A => ops.a,
                OperatorName::B => ops.b,
                OperatorName::SigmaA => ops.sigma_a,
                _ => ops.sigma_b,
            }
        }
        ExperimentKind::DualQcc => {
            let ops = build_dual_operators(cfg);
            match name {
                OperatorName::H => ops.h,
                OperatorName::V => ops.v,
                OperatorName::SigmaH => ops.sigma_h,
                _ => ops.sigma_v,
            }
        }
    }
}

/// Composite index permutation for `|A⟩↔|H⟩, |B⟩↔|V⟩`: swaps `(A,V)` and `(B,H)`.
const DUAL_PERMUTATION: [usize; 4] = [0, 2, 1, 3];

/// Exchange of the path and polarisation roles, `|A⟩↔|H⟩`, `|B⟩↔|V⟩`.
pub trait Dualize: Sized {
    fn dualize(&self) -> Result<Self, HilbertError>;
}

impl Dualize for StateVector {
    fn dualize(&self) -> Result<Self, HilbertError> {
        if self.basis() != Basis::Composite {
            return Err(HilbertError::NotComposite(self.basis()));
        }
        Ok(self.permuted(&DUAL_PERMUTATION))
    }
}

impl Dualize for Operator {
    fn dualize(&self) -> Result<Self, HilbertError> {
        if self.basis() != Basis::Composite {
            return Err(HilbertError::NotComposite(self.basis()));
        }
        Ok(self.permuted(&DUAL_PERMUTATION))
    }
}

pub fn dualize<T: Dualize>(x: &T) -> Result<T, HilbertError> {
    x.dualize()
}

/// Closed-form weak values: `(1, 0, 0, e^{i(φ-θ)})` for the generalised
/// experiment and `(1, 0, 0, e^{i(θ-φ)})` for the dual.
pub fn reference_weak_values(kind: ExperimentKind, cfg: &QccConfig) -> [C64; 4] {
    let phase = match kind {
        ExperimentKind::GeneralisedQcc => cfg.phi - cfg.theta,
        ExperimentKind::DualQcc => cfg.theta - cfg.phi,
    };
    [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, phase)]
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEntry {
    pub computed: WeakValue,
    pub reference: C64,
}

impl ReportEntry {
    pub fn deviation(&self) -> f64 {
        (self.computed.value() - self.reference).norm()
    }
}

/// Weak values of the four observables of one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct WeakValueReport {
    pub kind: ExperimentKind,
    pub config: QccConfig,
    pub entries: IndexMap<OperatorName, ReportEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

impl WeakValueReport {
    pub fn get(&self, name: OperatorName) -> Option<&WeakValue> {
        self.entries.get(&name).map(|e| &e.computed)
    }

    pub fn max_deviation(&self) -> f64 {
        self.entries.values().map(ReportEntry::deviation).fold(0.0, f64::max)
    }
}

pub fn weak_value_report(kind: ExperimentKind, cfg: &QccConfig) -> Result<WeakValueReport, ExperimentError> {
    let pair = build_states(kind, cfg);
    let references = reference_weak_values(kind, cfg);
    let mut entries = IndexMap::new();
    for (name, reference) in kind.operators().into_iter().zip(references) {
        let computed = weak_value(&build_operator(name, cfg), &pair)?;
        entries.insert(name, ReportEntry { computed, reference });
    }
    Ok(WeakValueReport {
        kind,
        config: *cfg,
        entries,
        note: (kind == ExperimentKind::DualQcc).then_some(DUAL_PHASE_SIGN_NOTE),
    })
}

/// One row of a basis-rotation sweep: the two phase-sensitive weak values
/// (`σ_A`, `σ_B` or `σ_H`, `σ_V`) at a given φ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub phi: f64,
    pub first: WeakValue,
    pub second: WeakValue,
}

/// Rotates the measurement basis phase φ over `phi_grid` at fixed θ.
///
/// Fails if the first observable's weak value acquires a real part above
/// `1e-12` anywhere on the grid.
pub fn polarisation_sweep(
    kind: ExperimentKind,
    theta: f64,
    phi_grid: &[f64],
) -> Result<Vec<SweepRow>, ExperimentError> {
    if phi_grid.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    let [_, _, first_name, second_name] = kind.operators();
    phi_grid
        .iter()
        .map(|&phi| {
            let cfg = QccConfig::new(theta, phi)?;
            let pair = build_states(kind, &cfg);
            let first = weak_value(&build_operator(first_name, &cfg), &pair)?;
            let second = weak_value(&build_operator(second_name, &cfg), &pair)?;
            if first.re().abs() > 1e-12 {
                return Err(ExperimentError::NonVanishingReference {
                    operator: first_name,
                    phi,
                    value: first.re(),
                });
            }
            Ok(SweepRow { phi, first, second })
        })
        .collect()
}

/// Which phase-difference observable of the dual experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DualSigma {
    #[serde(rename = "sigma_H")]
    SigmaH,
    #[serde(rename = "sigma_V")]
    SigmaV,
}

/// `(⟨Ψ_i|σ|Ψ_i⟩, ⟨Ψ_f|σ|Ψ_f⟩, ⟨Ψ_f|σ|Ψ_i⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemporalElements {
    pub pre_expectation: C64,
    pub post_expectation: C64,
    pub transition: C64,
}

pub fn temporal_interference_elements(cfg: &QccConfig, which: DualSigma) -> TemporalElements {
    let pair = build_dual_states(cfg);
    let name = match which {
        DualSigma::SigmaH => OperatorName::SigmaH,
        DualSigma::SigmaV => OperatorName::SigmaV,
    };
    let op = build_operator(name, cfg);
    let (pre, post) = (pair.pre(), pair.post());
    let element = |bra, ket| sandwich(bra, &op, ket).expect("composite basis");
    TemporalElements {
        pre_expectation: element(pre, pre),
        post_expectation: element(post, post),
        transition: element(post, pre),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{eigendecompose, inner, BasisLabel};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    /// 4×4 matrix with entries from explicit ket-bra terms, built without
    /// the tensor machinery.
    fn from_terms(terms: &[(BasisLabel, BasisLabel, C64)]) -> Operator {
        let mut m = nalgebra::DMatrix::zeros(4, 4);
        for &(ket, bra, z) in terms {
            m[(ket.index(), bra.index())] += z;
        }
        Operator::new(Basis::Composite, m).unwrap()
    }

    const AH: BasisLabel = BasisLabel::new(Path::A, Polarisation::H);
    const AV: BasisLabel = BasisLabel::new(Path::A, Polarisation::V);
    const BH: BasisLabel = BasisLabel::new(Path::B, Polarisation::H);
    const BV: BasisLabel = BasisLabel::new(Path::B, Polarisation::V);

    #[test]
    fn qcc_pre_selection_amplitudes() {
        let pair = build_qcc_states(&QccConfig::new(0.0, 0.0).unwrap());
        let expected = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0];
        for (a, e) in pair.pre().amplitudes().iter().zip(expected) {
            assert!(close(*a, c(e, 0.0), 1e-15));
        }
        let original = build_qcc_states(&QccConfig::new(FRAC_PI_2, 0.0).unwrap());
        assert!(close(original.pre().amplitude(AH), c(0.0, FRAC_1_SQRT_2), 1e-15));
        assert!(close(original.pre().amplitude(BH), c(FRAC_1_SQRT_2, 0.0), 1e-15));
    }

    #[test]
    fn qcc_overlap_is_half_phase() {
        for theta in [0.0, 0.4, FRAC_PI_2, 2.5, -1.0] {
            let pair = build_qcc_states(&QccConfig::new(theta, 0.3).unwrap());
            assert!(close(pair.overlap(), C64::from_polar(0.5, theta), 1e-15));
        }
        let pair = build_qcc_states(&QccConfig::new(0.0, 0.0).unwrap());
        assert!(close(inner(pair.post(), pair.pre()).unwrap(), c(0.5, 0.0), 1e-15));
    }

    #[test]
    fn dual_pre_selection_amplitudes() {
        let phi = 0.8;
        let pair = build_dual_states(&QccConfig::new(0.1, phi).unwrap());
        let e = C64::from_polar(FRAC_1_SQRT_2, phi);
        let expected = [e, c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        for (a, e) in pair.pre().amplitudes().iter().zip(expected) {
            assert!(close(*a, e, 1e-15));
        }
        assert!(close(pair.overlap(), C64::from_polar(0.5, phi), 1e-15));
        let arm_b = arm_projector(Path::B);
        assert_eq!(sandwich(pair.pre(), &arm_b, pair.pre()).unwrap().norm(), 0.0);
    }

    #[test]
    fn elliptical_difference_matches_outer_product_expansion() {
        for phi in [0.0, 0.3, FRAC_PI_2, 2.0] {
            let (l, r) = elliptical_states(phi);
            let diff = difference_of_projectors(&l, &r);
            let expected = Operator::from_rows(
                Basis::Polarisation,
                &[
                    &[c(0.0, 0.0), C64::from_polar(1.0, -phi)],
                    &[C64::from_polar(1.0, phi), c(0.0, 0.0)],
                ],
            )
            .unwrap();
            assert!(diff.max_abs_diff(&expected).unwrap() < 1e-15);
        }
    }

    #[test]
    fn arm_difference_matches_outer_product_expansion() {
        for theta in [0.0, 1.1, FRAC_PI_2] {
            let (p, m) = arm_superposition_states(theta);
            let diff = difference_of_projectors(&p, &m);
            let expected = Operator::from_rows(
                Basis::Path,
                &[
                    &[c(0.0, 0.0), C64::from_polar(1.0, -theta)],
                    &[C64::from_polar(1.0, theta), c(0.0, 0.0)],
                ],
            )
            .unwrap();
            assert!(diff.max_abs_diff(&expected).unwrap() < 1e-15);
        }
    }

    #[test]
    fn plus_minus_recover_arm_a() {
        let (p, m) = arm_superposition_states(FRAC_PI_2);
        let sum = p.try_add(&m).unwrap().scale(c(FRAC_1_SQRT_2, 0.0));
        assert!(sum.max_abs_diff(&StateVector::path(Path::A)).unwrap() < 1e-15);
        // (|+⟩ - |-⟩)/√2 = e^{iθ}|B⟩ = i|B⟩ at θ = π/2
        let diff = p.try_sub(&m).unwrap().scale(c(FRAC_1_SQRT_2, 0.0));
        let ib = StateVector::path(Path::B).scale(c(0.0, 1.0));
        assert!(diff.max_abs_diff(&ib).unwrap() < 1e-15);
    }

    #[test]
    fn qcc_operators_match_explicit_matrices() {
        let phi = 0.9;
        let ops = build_qcc_operators(&QccConfig::new(0.2, phi).unwrap());
        let e = C64::from_polar(1.0, phi);
        let sigma_a = from_terms(&[(AH, AV, e.conj()), (AV, AH, e)]);
        let sigma_b = from_terms(&[(BH, BV, e.conj()), (BV, BH, e)]);
        assert!(ops.sigma_a.max_abs_diff(&sigma_a).unwrap() < 1e-15);
        assert!(ops.sigma_b.max_abs_diff(&sigma_b).unwrap() < 1e-15);
        let one = c(1.0, 0.0);
        assert!(
            ops.a
                .max_abs_diff(&from_terms(&[(AH, AH, one), (AV, AV, one)]))
                .unwrap()
                < 1e-15
        );
        assert!(
            ops.b
                .max_abs_diff(&from_terms(&[(BH, BH, one), (BV, BV, one)]))
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn dual_operators_match_explicit_matrices() {
        let theta = 1.3;
        let ops = build_dual_operators(&QccConfig::new(theta, 0.4).unwrap());
        let e = C64::from_polar(1.0, theta);
        let sigma_h = from_terms(&[(AH, BH, e.conj()), (BH, AH, e)]);
        let sigma_v = from_terms(&[(AV, BV, e.conj()), (BV, AV, e)]);
        assert!(ops.sigma_h.max_abs_diff(&sigma_h).unwrap() < 1e-15);
        assert!(ops.sigma_v.max_abs_diff(&sigma_v).unwrap() < 1e-15);
    }

    #[test]
    fn sigma_spectra() {
        let cfg = QccConfig::new(0.7, FRAC_PI_2).unwrap();
        for op in [build_qcc_operators(&cfg).sigma_a, build_dual_operators(&cfg).sigma_h] {
            let dec = eigendecompose(&op).unwrap();
            let ev = dec.eigenvalues();
            assert_eq!(ev.len(), 3);
            assert!((ev[0] + 1.0).abs() < 1e-12 && ev[1].abs() < 1e-12 && (ev[2] - 1.0).abs() < 1e-12);
            assert_eq!(dec.ranks(), vec![1, 2, 1]);
        }
    }

    #[test]
    fn sigma_a_eigenvectors_are_elliptical_states_in_arm_a() {
        let phi = 0.6;
        let ops = build_qcc_operators(&QccConfig::new(0.0, phi).unwrap());
        let (l, r) = elliptical_states(phi);
        let la = StateVector::path(Path::A).tensor(&l).unwrap();
        let ra = StateVector::path(Path::A).tensor(&r).unwrap();
        assert!(ops.sigma_a.apply(&la).unwrap().max_abs_diff(&la).unwrap() < 1e-15);
        let neg = ra.scale(c(-1.0, 0.0));
        assert!(ops.sigma_a.apply(&ra).unwrap().max_abs_diff(&neg).unwrap() < 1e-15);
    }

    #[test]
    fn weak_value_examples() {
        let cfg = QccConfig::new(FRAC_PI_2, FRAC_PI_2).unwrap();
        let report = weak_value_report(ExperimentKind::GeneralisedQcc, &cfg).unwrap();
        let values: Vec<C64> = report.entries.values().map(|e| e.computed.value()).collect();
        for (v, e) in values.iter().zip([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]) {
            assert!(close(*v, e, 1e-12));
        }
        assert!(report.note.is_none());

        let cfg = QccConfig::new(0.0, FRAC_PI_2).unwrap();
        let report = weak_value_report(ExperimentKind::GeneralisedQcc, &cfg).unwrap();
        assert!(close(
            report.get(OperatorName::SigmaB).unwrap().value(),
            c(0.0, 1.0),
            1e-12
        ));

        let cfg = QccConfig::new(FRAC_PI_3, FRAC_PI_3).unwrap();
        let report = weak_value_report(ExperimentKind::DualQcc, &cfg).unwrap();
        assert!(close(
            report.get(OperatorName::SigmaV).unwrap().value(),
            c(1.0, 0.0),
            1e-12
        ));
        assert_eq!(report.note, Some(DUAL_PHASE_SIGN_NOTE));

        // θ = π/2, φ = 0 → e^{i(θ-φ)} = i
        let cfg = QccConfig::new(FRAC_PI_2, 0.0).unwrap();
        let report = weak_value_report(ExperimentKind::DualQcc, &cfg).unwrap();
        assert!(close(
            report.get(OperatorName::SigmaV).unwrap().value(),
            c(0.0, 1.0),
            1e-12
        ));
        assert!(report.max_deviation() < 1e-12);
    }

    #[test]
    fn sweep_examples() {
        let rows = polarisation_sweep(ExperimentKind::GeneralisedQcc, 0.0, &[0.0, FRAC_PI_2, PI]).unwrap();
        let expected = [1.0, 0.0, -1.0];
        for (row, e) in rows.iter().zip(expected) {
            assert!((row.second.re() - e).abs() < 1e-12);
            assert!(row.first.re().abs() < 1e-12);
        }
        let rows = polarisation_sweep(ExperimentKind::GeneralisedQcc, 1.234, &[1.234]).unwrap();
        assert!((rows[0].second.re() - 1.0).abs() < 1e-12);
        assert_eq!(
            polarisation_sweep(ExperimentKind::DualQcc, 0.0, &[]).unwrap_err(),
            ExperimentError::EmptyGrid
        );
    }

    #[test]
    fn temporal_elements_examples() {
        let cfg = QccConfig::new(FRAC_PI_2, FRAC_PI_2).unwrap();
        let v = temporal_interference_elements(&cfg, DualSigma::SigmaV);
        assert!(close(v.transition, c(0.0, 0.5), 1e-15));
        assert!(v.pre_expectation.norm() < 1e-15 && v.post_expectation.norm() < 1e-15);
        let h = temporal_interference_elements(&QccConfig::new(0.3, 1.9).unwrap(), DualSigma::SigmaH);
        assert!(h.transition.norm() < 1e-15);
    }

    #[test]
    fn dualize_maps_qcc_pre_to_dual_pre() {
        let theta = 0.77;
        let qcc = build_qcc_states(&QccConfig::new(theta, 0.0).unwrap());
        let dual = build_dual_states(&QccConfig::new(0.0, theta).unwrap());
        assert!(dualize(qcc.pre()).unwrap().max_abs_diff(dual.pre()).unwrap() < 1e-15);
        let post = post_selection_state();
        assert_eq!(dualize(&post).unwrap(), post);
    }

    #[test]
    fn dualize_maps_qcc_operators_to_dual_operators() {
        // under |A⟩↔|H⟩, |B⟩↔|V⟩ the arm projectors become polarisation projectors
        let cfg = QccConfig::new(0.5, 0.5).unwrap();
        let qcc = build_qcc_operators(&cfg);
        let dual = build_dual_operators(&cfg);
        assert!(dualize(&qcc.a).unwrap().max_abs_diff(&dual.h).unwrap() < 1e-15);
        assert!(dualize(&qcc.b).unwrap().max_abs_diff(&dual.v).unwrap() < 1e-15);
        assert!(dualize(&qcc.sigma_a).unwrap().max_abs_diff(&dual.sigma_h).unwrap() < 1e-15);
        assert!(dualize(&qcc.sigma_b).unwrap().max_abs_diff(&dual.sigma_v).unwrap() < 1e-15);
    }

    #[test]
    fn dualize_rejects_factor_states() {
        assert_eq!(
            dualize(&StateVector::path(Path::A)),
            Err(HilbertError::NotComposite(Basis::Path))
        );
        assert!(dualize(&Operator::identity(Basis::Polarisation)).is_err());
    }

    #[test]
    fn names_round_trip() {
        for kind in [ExperimentKind::GeneralisedQcc, ExperimentKind::DualQcc] {
            assert_eq!(kind.as_str().parse::<ExperimentKind>().unwrap(), kind);
            for name in kind.operators() {
                assert_eq!(name.as_str().parse::<OperatorName>().unwrap(), name);
                assert_eq!(name.kind(), kind);
            }
        }
        assert!("sigma_C".parse::<OperatorName>().is_err());
        assert!("triple".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(QccConfig::new(f64::NAN, 0.0).is_err());
        assert!(QccConfig::new(0.0, f64::INFINITY).is_err());
        let (t, p) = QccConfig::new(-FRAC_PI_2, 5.0 * PI).unwrap().reduced();
        assert!((t - 1.5 * PI).abs() < 1e-12 && (p - PI).abs() < 1e-12);
    }
}
