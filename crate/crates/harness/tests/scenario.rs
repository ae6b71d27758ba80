use sic_core::canceller::AlgorithmId;
use sic_core::decoder::DecodeMode;
use sic_harness::{Coherence, HarnessError, Scenario};

fn line_of(e: HarnessError) -> usize {
    match e {
        HarnessError::Scenario { line, .. } => line,
        other => panic!("expected a scenario error, got {other}"),
    }
}

#[test]
fn comments_blank_lines_and_whitespace() {
    let s = Scenario::parse(
        "# header\n\n  tag = demo   # trailing\nframe_len=32\nframe_shift = 24\n\talgorithms = nlms ,rls\n",
    )
    .unwrap();
    assert_eq!(s.tag, "demo");
    assert_eq!((s.frame_len, s.frame_shift, s.l()), (32, 24, 8));
    assert_eq!(s.algorithms, vec![AlgorithmId::Nlms, AlgorithmId::Rls]);
}

#[test]
fn empty_file_gives_defaults() {
    assert_eq!(Scenario::parse("").unwrap(), Scenario::default());
}

#[test]
fn unknown_key_is_rejected_with_line_number() {
    let e = Scenario::parse("tag = a\n\nframe_lenght = 64\n").unwrap_err();
    assert!(e.to_string().contains("frame_lenght"), "{e}");
    assert_eq!(line_of(e), 3);
}

#[test]
fn duplicate_key_is_rejected() {
    let e = Scenario::parse("frames = 10\nframes = 20\n").unwrap_err();
    assert_eq!(line_of(e), 2);
}

#[test]
fn malformed_lines_are_rejected() {
    assert_eq!(line_of(Scenario::parse("frames 10\n").unwrap_err()), 1);
    assert!(Scenario::parse("frames = ten\n").is_err());
    assert!(Scenario::parse("orthogonalize = maybe\n").is_err());
    assert!(Scenario::parse("algorithms = lms\n").is_err());
    assert!(Scenario::parse("tag = has space\n").is_err());
    assert!(Scenario::parse("tag = under_score\n").is_err());
}

#[test]
fn validation_rejects_inconsistent_values() {
    assert!(Scenario::parse("frame_shift = 64\n").is_err());
    assert!(Scenario::parse("frame_shift = 0\n").is_err());
    assert!(Scenario::parse("sinr_db = 5, 0\n").is_err());
    assert!(Scenario::parse("rls_lambda = 1.5\n").is_err());
    assert!(Scenario::parse("tail_fraction = 0\n").is_err());
    assert!(Scenario::parse("coherence_w = -3\n").is_err());
    assert!(Scenario::parse("realizations = 0\n").is_err());
}

#[test]
fn range_grid_includes_stop() {
    let s = Scenario::parse("sinr_db = -20:5:20\n").unwrap();
    assert_eq!(s.sinr_db, vec![-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]);
    let s = Scenario::parse("sinr_db = 0:3:10\n").unwrap();
    assert_eq!(s.sinr_db, vec![0.0, 3.0, 6.0, 9.0]);
    assert!(Scenario::parse("sinr_db = 0:-1:10\n").is_err());
    assert!(Scenario::parse("sinr_db = 0:1\n").is_err());
}

#[test]
fn coherence_and_mode_values() {
    let s = Scenario::parse("coherence_w = 1000\ncoherence_a = static\ndecode = perfect\nrls_lambda = 0.999\n").unwrap();
    assert_eq!(s.coherence_w, Coherence::Frames(1000.0));
    assert_eq!(s.coherence_a, Coherence::Static);
    assert_eq!(s.decode, DecodeMode::Perfect);
    assert_eq!(s.rls_lambda, Some(0.999));
    assert_eq!(Scenario::parse("coherence_w = inf\n").unwrap().coherence_w, Coherence::Static);
}

#[test]
fn canonical_rendering_round_trips() {
    for name in ["convergence", "sweep", "sweep-ortho", "decoding", "complexity"] {
        let s = Scenario::preset(name).unwrap();
        let back = Scenario::parse(&s.to_string()).unwrap();
        assert_eq!(back, s, "{name}");
        assert_eq!(back.hash(), s.hash());
    }
    let custom = Scenario::parse("sinr_db = -7.5, 2.25\ncoherence_w = 333.5\nrls_lambda = 0.9875\n").unwrap();
    assert_eq!(Scenario::parse(&custom.to_string()).unwrap(), custom);
}

#[test]
fn hash_tracks_content_not_formatting() {
    let a = Scenario::parse("frames = 10\n# note\n").unwrap();
    let b = Scenario::parse("  frames=10   \n").unwrap();
    let c = Scenario::parse("frames = 11\n").unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn presets_load_and_unknown_preset_fails() {
    let conv = Scenario::preset("convergence").unwrap();
    assert_eq!((conv.frame_len, conv.frame_shift, conv.basis.n()), (64, 56, 3));
    assert_eq!(conv.sinr_db, vec![-15.0]);
    assert_eq!(conv.frames, 400);
    assert!(!conv.orthogonalize);
    assert!(Scenario::preset("sweep-ortho").unwrap().orthogonalize);
    assert!(Scenario::preset("nope").is_err());
}

#[test]
fn tail_frames_rounds_and_clamps() {
    let mut s = Scenario::default();
    assert_eq!(s.tail_frames(), 100);
    s.frames = 3;
    s.tail_fraction = 0.1;
    assert_eq!(s.tail_frames(), 1);
    s.tail_fraction = 1.0;
    assert_eq!(s.tail_frames(), 3);
}
