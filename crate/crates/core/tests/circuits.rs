use std::fs;
use std::path::PathBuf;

use cheshire_core::circuit::{
    compile, detector_distribution, parse, trigger_projector, verification_basis, verify, CircuitError, Element, Phase,
    UNDETECTED,
};
use cheshire_core::experiments::post_selection_state;
use cheshire_core::hilbert::{Operator, Path, Polarisation};

fn source(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "circuits", name].iter().collect();
    fs::read_to_string(path).unwrap()
}

#[test]
fn fig1a_element_sequence() {
    let spec = parse(&source("fig1a.circ")).unwrap();
    assert_eq!(
        spec.elements,
        vec![
            Element::Hwp {
                arm: Path::B,
                angle: None
            },
            Element::Ps {
                arm: Path::B,
                phase: Phase::PiFraction { num: 1, den: 2 }
            },
            Element::Bs { a: Path::A, b: Path::B },
            Element::Pbs { a: Path::A, b: Path::B },
        ]
    );
    let names: Vec<_> = spec.detectors.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names, ["D1", "D2", "D3"]);
    assert_eq!(spec.detectors[0].polarisation, Some(Polarisation::H));
}

#[test]
fn fig1a_fires_d1_only_for_the_post_selection_state() {
    let spec = parse(&source("fig1a.circ")).unwrap();
    for (i, (label, state)) in verification_basis().iter().enumerate() {
        let d = detector_distribution(&spec, state).unwrap();
        let expected = if i == 0 { 1.0 } else { 0.0 };
        assert!((d["D1"] - expected).abs() <= 1e-10, "{label}: {d:?}");
        let total: f64 = d.values().sum();
        assert!((total - 1.0).abs() <= 1e-10);
        assert!(d[UNDETECTED].abs() <= 1e-15);
    }
    let report = verify(&spec).unwrap();
    assert!(report.certainty);
    assert!(report.calibration_phases.values().all(|p| p.radians == 0.0));
    assert!(report.projector_deviation <= 1e-10);
}

#[test]
fn fig1b_selects_the_post_selection_projector_after_calibration() {
    let spec = parse(&source("fig1b.circ")).unwrap();
    let report = verify(&spec).unwrap();
    assert!(report.certainty);
    assert!(report.projector_deviation <= 1e-10, "{}", report.projector_deviation);
    assert_eq!(report.calibration_phases[&Path::A].expr, "0");
    assert_eq!(report.calibration_phases[&Path::B].expr, "3*pi/2");
    // The reported circuit is the calibrated one; it verifies as is.
    let calibrated = parse(&report.circuit).unwrap();
    let target = Operator::projector(&post_selection_state()).unwrap();
    let p = trigger_projector(&calibrated).unwrap();
    assert!(p.max_abs_diff(&target).unwrap() <= 1e-10);
    assert!(compile(&calibrated).unwrap().unitary_deviation() <= 1e-12);
}

#[test]
fn uncalibrated_fig1b_misses_certainty() {
    let spec = parse(&source("fig1b.circ")).unwrap();
    let d = detector_distribution(&spec, &post_selection_state()).unwrap();
    assert!(d["D1"] < 1.0 - 1e-3);
}

#[test]
fn negative_corpus_is_rejected_with_positions() {
    for (file, line, column) in [
        ("bad_arm.circ", 3, 6),
        ("bad_phase.circ", 1, 6),
        ("duplicate_detector.circ", 3, 10),
        ("no_detector.circ", 3, 8),
    ] {
        let err = parse(&source(file)).unwrap_err();
        assert_eq!((err.line, err.column), (line, column), "{file}: {err}");
    }
}

#[test]
fn unverifiable_circuit_fails_after_calibration() {
    let spec = parse(&source("unverifiable.circ")).unwrap();
    assert!(matches!(verify(&spec), Err(CircuitError::VerificationFailed { .. })));
}
