//! Optical-table description language.
//!
//! A [`CircuitSpec`] is an ordered list of passive elements followed by a
//! set of projective detectors. [`compile`] turns the element list into a
//! unitary on path ⊗ polarisation (the first listed element acts first),
//! [`detector_distribution`] reads out click probabilities, and [`verify`]
//! checks that the trigger detector realises the post-selection onto
//! `|Φ_f⟩ = (|A,H⟩ + |B,V⟩)/√2`.
//!
//! Element conventions, with `|a⟩`, `|b⟩` the two arms:
//!
//! ```text
//! ps a θ      |a⟩ → e^{iθ}|a⟩ on both polarisations
//! hwp a [α]   Jones matrix [[cos 2α, sin 2α], [sin 2α, -cos 2α]] in arm a;
//!             the default α = π/4 swaps H ↔ V
//! bs a b      |a⟩ → (|a⟩ + i|b⟩)/√2, |b⟩ → (i|a⟩ + |b⟩)/√2
//! pbs a b     H keeps its arm; V changes arm picking up a factor i
//! ```

mod parse;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::experiments::{arm_superposition_states, post_selection_state, DualSigma};
use crate::hilbert::{inner, Basis, BasisLabel, HilbertError, Operator, Path, Polarisation, StateVector, C64};

pub use parse::{parse_phase, ParseError};

/// Key under which [`detector_distribution`] reports mass no detector sees.
pub const UNDETECTED: &str = "undetected";

/// Tolerance for the certainty and projector checks of [`verify`].
pub const VERIFY_TOLERANCE: f64 = 1e-10;

/// Name of the detector used for post-selection when present; otherwise the
/// first declared detector is the trigger.
pub const TRIGGER_NAME: &str = "D1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("trigger detector `{trigger}` does not select |Φ_f⟩ under any calibration")]
    VerificationFailed {
        trigger: String,
        report: Box<VerificationReport>,
    },
}

/// A phase or plate angle, kept in the form it was written.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    Literal(f64),
    /// `num·π/den`.
    PiFraction {
        num: i64,
        den: u64,
    },
}

impl Phase {
    pub const ZERO: Phase = Phase::Literal(0.0);

    pub fn radians(self) -> f64 {
        match self {
            Phase::Literal(x) => x,
            Phase::PiFraction { num, den } => num as f64 * PI / den as f64,
        }
    }

    fn is_zero(self) -> bool {
        self.radians() == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Ps { arm: Path, phase: Phase },
    Hwp { arm: Path, angle: Option<Phase> },
    Bs { a: Path, b: Path },
    Pbs { a: Path, b: Path },
}

/// Projective detector on an arm, optionally behind a polariser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detector {
    pub name: String,
    pub arm: Path,
    pub polarisation: Option<Polarisation>,
}

impl Detector {
    pub fn labels(&self) -> Vec<BasisLabel> {
        Polarisation::ALL
            .into_iter()
            .filter(|p| self.polarisation.is_none_or(|q| q == *p))
            .map(|p| BasisLabel::new(self.arm, p))
            .collect()
    }

    pub fn overlaps(&self, other: &Detector) -> bool {
        self.labels().iter().any(|l| other.labels().contains(l))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub elements: Vec<Element>,
    pub detectors: Vec<Detector>,
}

impl CircuitSpec {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        parse::parse(source)
    }

    /// The detector used for post-selection.
    pub fn trigger(&self) -> &Detector {
        self.detectors
            .iter()
            .find(|d| d.name == TRIGGER_NAME)
            .unwrap_or(&self.detectors[0])
    }

    /// Copy with phase shifters in front of every other element.
    pub fn with_input_phases(&self, a: Phase, b: Phase) -> Self {
        let mut elements = Vec::with_capacity(self.elements.len() + 2);
        for (arm, phase) in [(Path::A, a), (Path::B, b)] {
            if !phase.is_zero() {
                elements.push(Element::Ps { arm, phase });
            }
        }
        elements.extend_from_slice(&self.elements);
        Self {
            elements,
            detectors: self.detectors.clone(),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Ps { arm, phase } => write!(f, "ps {arm} {phase}"),
            Element::Hwp { arm, angle: None } => write!(f, "hwp {arm}"),
            Element::Hwp {
                arm,
                angle: Some(angle),
            } => write!(f, "hwp {arm} {angle}"),
            Element::Bs { a, b } => write!(f, "bs {a} {b}"),
            Element::Pbs { a, b } => write!(f, "pbs {a} {b}"),
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "detector {} {}", self.name, self.arm)?;
        if let Some(p) = self.polarisation {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

/// Canonical source form; parsing it gives back an equal spec.
impl fmt::Display for CircuitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.elements {
            writeln!(f, "{e}")?;
        }
        for d in &self.detectors {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

pub fn parse(source: &str) -> Result<CircuitSpec, ParseError> {
    parse::parse(source)
}

fn idx(path: Path, pol: Polarisation) -> usize {
    BasisLabel::new(path, pol).index()
}

fn element_matrix(element: &Element) -> DMatrix<C64> {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let mut m = DMatrix::<C64>::identity(4, 4);
    match *element {
        Element::Ps { arm, phase } => {
            let e = C64::from_polar(1.0, phase.radians());
            for p in Polarisation::ALL {
                m[(idx(arm, p), idx(arm, p))] = e;
            }
        }
        Element::Hwp { arm, angle } => {
            let (c, s) = match angle {
                None => (0.0, 1.0),
                Some(alpha) => {
                    let two = 2.0 * alpha.radians();
                    (two.cos(), two.sin())
                }
            };
            let (h, v) = (idx(arm, Polarisation::H), idx(arm, Polarisation::V));
            m[(h, h)] = C64::new(c, 0.0);
            m[(h, v)] = C64::new(s, 0.0);
            m[(v, h)] = C64::new(s, 0.0);
            m[(v, v)] = C64::new(-c, 0.0);
        }
        Element::Bs { a, b } => {
            let t = one * FRAC_1_SQRT_2;
            let r = i * FRAC_1_SQRT_2;
            for p in Polarisation::ALL {
                let (ia, ib) = (idx(a, p), idx(b, p));
                m[(ia, ia)] = t;
                m[(ib, ib)] = t;
                m[(ib, ia)] = r;
                m[(ia, ib)] = r;
            }
        }
        Element::Pbs { a, b } => {
            let (va, vb) = (idx(a, Polarisation::V), idx(b, Polarisation::V));
            m[(va, va)] = C64::new(0.0, 0.0);
            m[(vb, vb)] = C64::new(0.0, 0.0);
            m[(vb, va)] = i;
            m[(va, vb)] = i;
        }
    }
    m
}

/// `U = U_n ··· U_1`, flagged unitary.
pub fn compile(spec: &CircuitSpec) -> Result<Operator, CircuitError> {
    let u = spec
        .elements
        .iter()
        .fold(DMatrix::<C64>::identity(4, 4), |acc, e| element_matrix(e) * acc);
    Ok(Operator::new(Basis::Composite, u)?.with_unitary()?)
}

fn distribution_of(
    spec: &CircuitSpec,
    unitary: &Operator,
    input: &StateVector,
) -> Result<BTreeMap<String, f64>, CircuitError> {
    let out = unitary.apply(input)?;
    let weights: Vec<f64> = BasisLabel::ALL.iter().map(|l| out.amplitude(*l).norm_sqr()).collect();
    let mut seen = [false; 4];
    let mut dist = BTreeMap::new();
    for d in &spec.detectors {
        let p = d
            .labels()
            .iter()
            .map(|l| {
                seen[l.index()] = true;
                weights[l.index()]
            })
            .sum();
        dist.insert(d.name.clone(), p);
    }
    let undetected = (0..4).filter(|k| !seen[*k]).fold(0.0, |acc, k| acc + weights[k]);
    dist.insert(UNDETECTED.to_string(), undetected);
    Ok(dist)
}

/// Click probability per detector for `input` sent through the circuit,
/// plus [`UNDETECTED`].
pub fn detector_distribution(spec: &CircuitSpec, input: &StateVector) -> Result<BTreeMap<String, f64>, CircuitError> {
    distribution_of(spec, &compile(spec)?, input)
}

/// `U† P U` for the trigger detector: the input-side projector that
/// post-selection applies.
pub fn trigger_projector(spec: &CircuitSpec) -> Result<Operator, CircuitError> {
    let u = compile(spec)?;
    let mut p = Operator::zero(Basis::Composite);
    for l in spec.trigger().labels() {
        let k = StateVector::label(l);
        p = p.try_add(&Operator::projector(&k)?)?;
    }
    Ok(u.adjoint().compose(&p)?.compose(&u)?)
}

/// `|Φ_f⟩` followed by three states completing an orthonormal basis.
pub fn verification_basis() -> [(&'static str, StateVector); 4] {
    let s = FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let minus =
        StateVector::new(Basis::Composite, vec![C64::new(s, 0.0), z, z, C64::new(-s, 0.0)]).expect("four amplitudes");
    [
        ("phi_f", post_selection_state()),
        ("A,V", StateVector::label(BasisLabel::new(Path::A, Polarisation::V))),
        ("B,H", StateVector::label(BasisLabel::new(Path::B, Polarisation::H))),
        ("phi_f_minus", minus),
    ]
}

/// Candidate compensating phase per arm.
pub const CALIBRATION_PHASES: [Phase; 4] = [
    Phase::ZERO,
    Phase::PiFraction { num: 1, den: 2 },
    Phase::PiFraction { num: 1, den: 1 },
    Phase::PiFraction { num: 3, den: 2 },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationPhase {
    pub expr: String,
    pub radians: f64,
}

impl From<Phase> for CalibrationPhase {
    fn from(p: Phase) -> Self {
        Self {
            expr: p.to_string(),
            radians: p.radians(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    /// Calibrated circuit in canonical source form.
    pub circuit: String,
    pub trigger: String,
    pub calibration_phases: BTreeMap<Path, CalibrationPhase>,
    /// Labels of the columns of every `detector_matrix` row.
    pub basis: Vec<String>,
    /// Click probability of each detector (and of no detector) on each
    /// verification basis state.
    pub detector_matrix: IndexMap<String, Vec<f64>>,
    /// `max |U† P_trigger U - |Φ_f⟩⟨Φ_f||`.
    pub projector_deviation: f64,
    pub certainty: bool,
}

fn report_for(spec: &CircuitSpec, a: Phase, b: Phase) -> Result<VerificationReport, CircuitError> {
    let calibrated = spec.with_input_phases(a, b);
    let u = compile(&calibrated)?;
    let basis = verification_basis();
    let mut matrix: IndexMap<String, Vec<f64>> = calibrated
        .detectors
        .iter()
        .map(|d| (d.name.clone(), Vec::with_capacity(4)))
        .chain(std::iter::once((UNDETECTED.to_string(), Vec::new())))
        .collect();
    for (_, state) in &basis {
        for (name, p) in distribution_of(&calibrated, &u, state)? {
            matrix.get_mut(&name).expect("known detector").push(p);
        }
    }
    let trigger = calibrated.trigger().name.clone();
    let row = &matrix[&trigger];
    let certainty = (row[0] - 1.0).abs() <= VERIFY_TOLERANCE && row[1..].iter().all(|p| *p <= VERIFY_TOLERANCE);
    let target = Operator::projector(&basis[0].1)?;
    let projector_deviation = trigger_projector(&calibrated)?.max_abs_diff(&target)?;
    Ok(VerificationReport {
        circuit: calibrated.to_string(),
        trigger,
        calibration_phases: BTreeMap::from([(Path::A, a.into()), (Path::B, b.into())]),
        basis: basis.iter().map(|(n, _)| n.to_string()).collect(),
        detector_matrix: matrix,
        projector_deviation,
        certainty,
    })
}

/// Checks that the trigger detector clicks with certainty on `|Φ_f⟩` and
/// never on its orthogonal complement.
///
/// Beam-splitter phase conventions move `|Φ_f⟩` between output ports, so
/// compensating phases from [`CALIBRATION_PHASES`] are tried on each arm in
/// front of the circuit, arm A outermost; the first combination that works
/// is reported. If none does, the error carries the uncalibrated report.
pub fn verify(spec: &CircuitSpec) -> Result<VerificationReport, CircuitError> {
    for a in CALIBRATION_PHASES {
        for b in CALIBRATION_PHASES {
            let report = report_for(spec, a, b)?;
            if report.certainty {
                return Ok(report);
            }
        }
    }
    let report = report_for(spec, Phase::ZERO, Phase::ZERO)?;
    Err(CircuitError::VerificationFailed {
        trigger: report.trigger.clone(),
        report: Box::new(report),
    })
}

/// Branch weights of a photon through a phase-difference element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branching {
    pub undeflected: f64,
    pub left: f64,
    pub right: f64,
}

/// A weak `σ_H` or `σ_V` element: a polarising splitter that transmits one
/// polarisation untouched and acts as a beam-splitter on the other, whose
/// `|+⟩`/`|-⟩` arm components leave deflected left/right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakElementModel {
    pub kind: DualSigma,
    pub polarisation: Polarisation,
}

pub fn weak_element_model(kind: DualSigma, polarisation: Polarisation) -> WeakElementModel {
    WeakElementModel { kind, polarisation }
}

impl WeakElementModel {
    /// The polarisation the splitter acts on.
    pub fn active_polarisation(&self) -> Polarisation {
        match self.kind {
            DualSigma::SigmaH => Polarisation::H,
            DualSigma::SigmaV => Polarisation::V,
        }
    }

    /// Branching of a path state (normalised internally) at arm phase θ.
    pub fn branch(&self, path_state: &StateVector, theta: f64) -> Result<Branching, CircuitError> {
        if path_state.basis() != Basis::Path {
            return Err(HilbertError::BasisMismatch {
                left: Basis::Path,
                right: path_state.basis(),
            }
            .into());
        }
        if self.polarisation != self.active_polarisation() {
            return Ok(Branching {
                undeflected: 1.0,
                left: 0.0,
                right: 0.0,
            });
        }
        let psi = path_state.clone().normalise()?;
        let (plus, minus) = arm_superposition_states(theta);
        Ok(Branching {
            undeflected: 0.0,
            left: inner(&plus, &psi)?.norm_sqr(),
            right: inner(&minus, &psi)?.norm_sqr(),
        })
    }
}
