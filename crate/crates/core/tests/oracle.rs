use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use ghostfringe::analytic::basic_pattern;
use ghostfringe::gate::{gate_pattern, mz_pattern, GateAngles};
use ghostfringe::mc::{
    compare_patterns, estimate_dn_corr, field_at_detector, sample_realization, EnsembleEstimate,
    EstimateOptions, IntensityKind, Layout, SourceModel, StderrMethod,
};
use ghostfringe::pattern::{Axis, GridPoint, Mode, Scan};
use ghostfringe::phys::BsConvention;
use ghostfringe::setup::{Arm, Geometry, PathLabel, SetupBasic, SetupGate, SetupMZ};
use ghostfringe::Execution;

const A: f64 = 0.5e-3;

fn symmetric() -> SetupBasic {
    SetupBasic::new(A, 500e-9, 1.0, 1.0, -5e-3, 5e-3, -5e-3, 5e-3).unwrap()
}

fn source() -> SourceModel {
    SourceModel::uniform(A, 256, 1.0).unwrap()
}

fn xc_scan() -> Vec<GridPoint> {
    Scan::new(Axis::Control, -1e-4, 1e-4, 5e-6, 0.0)
        .unwrap()
        .points()
}

fn run(
    geometry: Geometry,
    angles: Option<GateAngles>,
    grid: &[GridPoint],
    opts: &EstimateOptions,
) -> EnsembleEstimate {
    estimate_dn_corr(&source(), geometry, angles, grid, opts).unwrap()
}

#[test]
fn sequential_and_parallel_runs_are_bit_identical() {
    let gate: SetupGate = symmetric().into();
    let angles = Some(GateAngles::new(0.3, 1.1, 0.7, 2.0));
    let grid: Vec<GridPoint> = xc_scan().into_iter().step_by(5).collect();
    let mut opts = EstimateOptions::new(700, 9);
    opts.execution = Execution::Sequential;
    let seq = run(gate.into(), angles, &grid, &opts);
    opts.execution = Execution::Parallel;
    let par = run(gate.into(), angles, &grid, &opts);
    assert_eq!(seq, par);
    assert_eq!(run(gate.into(), angles, &grid, &opts), par);
    opts.seed = 10;
    assert_ne!(
        run(gate.into(), angles, &grid, &opts).pattern.values,
        par.pattern.values
    );
}

#[test]
fn stderr_shrinks_as_inverse_sqrt_n() {
    let grid = xc_scan();
    let median = |n: usize, method: StderrMethod| {
        let mut opts = EstimateOptions::new(n, 3);
        opts.stderr = method;
        let mut s = run(symmetric().into(), None, &grid, &opts).stderr;
        s.sort_by(f64::total_cmp);
        s[s.len() / 2]
    };
    for method in [StderrMethod::Influence, StderrMethod::BatchMeans] {
        let ratio = median(8000, method) / median(4000, method);
        let want = std::f64::consts::FRAC_1_SQRT_2;
        assert!((ratio / want - 1.0).abs() <= 0.2, "{method:?}: {ratio}");
    }
}

#[test]
fn stderr_is_positive_where_the_pattern_is() {
    let est = run(
        symmetric().into(),
        None,
        &xc_scan(),
        &EstimateOptions::new(1000, 4),
    );
    for (v, s) in est.pattern.values.iter().zip(&est.stderr) {
        assert!(*v <= 0.0 || *s > 0.0);
    }
    assert_eq!(est.pattern.stderr.as_ref(), Some(&est.stderr));
}

#[test]
fn beam_splitter_convention_does_not_change_estimates() {
    let grid: Vec<GridPoint> = xc_scan().into_iter().step_by(4).collect();
    let gate: SetupGate = symmetric().into();
    for (geometry, angles) in [
        (Geometry::from(symmetric()), None),
        (
            Geometry::from(gate),
            Some(GateAngles::new(0.3, 1.1, 0.7, 2.0)),
        ),
    ] {
        let mut opts = EstimateOptions::new(300, 5);
        let i = run(geometry, angles, &grid, &opts);
        opts.convention = BsConvention::PiReflection;
        let p = run(geometry, angles, &grid, &opts);
        for (a, b) in i.pattern.values.iter().zip(&p.pattern.values) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn peak_is_significant_and_dark_fringe_is_empty() {
    let s = symmetric();
    // x_C = λf/(2|x₁ − x₂|) puts the phase at π.
    let dark = s.lambda * s.f / (2.0 * (s.x2 - s.x1));
    let grid = [GridPoint::new(0.0, 0.0), GridPoint::new(dark, 0.0)];
    let est = run(s.into(), None, &grid, &EstimateOptions::new(10_000, 6));
    assert!(est.raw_covariance[0] > 5.0 * est.stderr[0] * est.reference_scale);
    assert!((est.pattern.values[0] / 4.0 - 1.0).abs() < 5.0 * est.stderr[0] / 4.0);
    assert!(
        est.pattern.values[1].abs() <= 3.0 * est.stderr[1],
        "{} ± {}",
        est.pattern.values[1],
        est.stderr[1]
    );
}

fn assert_agrees(reference: &ghostfringe::CorrelationPattern, est: &EnsembleEstimate) {
    let c = compare_patterns(reference, &est.pattern).unwrap();
    assert!(c.max_sigma_dev <= 4.0 && c.pearson >= 0.99, "{c:?}");
}

#[test]
fn oracle_matches_exact_basic_pattern() {
    let grid = xc_scan();
    let est = run(
        symmetric().into(),
        None,
        &grid,
        &EstimateOptions::new(20_000, 7),
    );
    assert_agrees(
        &basic_pattern(&symmetric(), &grid, Mode::Exact, Execution::Parallel),
        &est,
    );
}

#[test]
fn oracle_matches_exact_gate_pattern() {
    let gate: SetupGate = symmetric().into();
    let angles = GateAngles::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4, FRAC_PI_4);
    let grid = xc_scan();
    let est = run(
        gate.into(),
        Some(angles),
        &grid,
        &EstimateOptions::new(20_000, 8),
    );
    assert_agrees(
        &gate_pattern(&gate, angles, &grid, Mode::Exact, Execution::Parallel),
        &est,
    );
}

#[test]
fn oracle_matches_exact_mach_zehnder_pattern() {
    let l = 500e-9 / (2.0 * A);
    let d = 10.0 * l / (2.0 * 0.2);
    let mz = SetupMZ::new(A, 500e-9, 1.0, 0.2, d, d).unwrap();
    let angles = GateAngles::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4, 0.4);
    let grid = xc_scan();
    let est = run(
        mz.into(),
        Some(angles),
        &grid,
        &EstimateOptions::new(20_000, 9),
    );
    assert_agrees(
        &mz_pattern(&mz, angles, &grid, Mode::Exact, Execution::Parallel),
        &est,
    );
}

#[test]
fn independent_emitters_add_in_intensity() {
    let source = SourceModel::from_positions(A, vec![-1e-4, 2e-4], 1.0).unwrap();
    let layout = Layout::new(
        symmetric().into(),
        None,
        BsConvention::IReflection,
        &[PathLabel::C2],
    )
    .unwrap();
    let n = 10_000;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let r = sample_realization(&source, 12, i);
            field_at_detector(&r, &source, &layout, Arm::Control, 3e-5, None)
                .unwrap()
                .norm_sqr()
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    // Each emitter alone gives n̄·|κ|² = 1/2.
    assert!(
        (mean - 1.0).abs() <= 3.0 * sd / (n as f64).sqrt(),
        "{mean} ± {sd}"
    );
}

#[test]
fn unprojected_intensity_sums_the_polarization_components() {
    // φ_𝒞 = 0 leaves the control field purely H, so analyzing it at 0 loses nothing.
    let gate: SetupGate = symmetric().into();
    let grid: Vec<GridPoint> = xc_scan().into_iter().step_by(8).collect();
    let mut opts = EstimateOptions::new(400, 13);
    let h = run(
        gate.into(),
        Some(GateAngles::new(0.0, 0.6, 0.0, 0.0)),
        &grid,
        &opts,
    );
    let v = run(
        gate.into(),
        Some(GateAngles::new(0.0, 0.6, 0.0, FRAC_PI_2)),
        &grid,
        &opts,
    );
    opts.intensity = IntensityKind::Unprojected;
    let both = run(
        gate.into(),
        Some(GateAngles::new(0.0, 0.6, 1.0, 1.0)),
        &grid,
        &opts,
    );
    for k in 0..grid.len() {
        let sum = h.pattern.values[k] + v.pattern.values[k];
        assert!((both.pattern.values[k] - sum).abs() <= 1e-9 * sum.abs().max(1.0));
    }
}
