//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs under `cargo test` (custom harness).

use std::f64::consts::{FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ghostfringe::analytic::{
    basic_pattern, basic_pattern_with, dn_corr_basic, fringe_period_xc, g1_pairs, PhaseConvention,
};
use ghostfringe::gate::{dn_corr_gate, dn_corr_mz, mz_phase, p_cnot, GateAngles, TruthTable};
use ghostfringe::mc::{compare_patterns, estimate_dn_corr, EstimateOptions, SourceModel};
use ghostfringe::pattern::{
    visibility, Axis, CorrelationPattern, GridPoint, Mode, PatternMode, Scan,
};
use ghostfringe::phys::{tophat_ft, Complex64, SPEED_OF_LIGHT};
use ghostfringe::setup::{SetupBasic, SetupFree, SetupGate, SetupMZ};
use ghostfringe::Execution;

const A: f64 = 0.5e-3;
const LAMBDA: f64 = 500e-9;
const SEED: u64 = 1;

fn reference() -> SetupBasic {
    SetupBasic::new(A, LAMBDA, 1.0, 1.0, -5e-3, 5e-3, -5e-3, 5e-3).unwrap()
}

/// Interference phase written out directly from the geometry.
fn phi_oracle(s: &SetupBasic, x_c: f64, x_t: f64) -> f64 {
    let w = 2.0 * PI * SPEED_OF_LIGHT / s.lambda;
    let h = s.z * s.f / (s.z + s.f);
    w / (2.0 * SPEED_OF_LIGHT * h) * (s.x1 * s.x1 + s.x2p * s.x2p - s.x1p * s.x1p - s.x2 * s.x2)
        + w / (SPEED_OF_LIGHT * s.f) * (x_c * s.x2 - x_t * s.x2p - x_c * s.x1 + x_t * s.x1p)
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn fringe_law() -> Outcome {
    let s = reference();
    let diag = Scan::new(Axis::Diagonal, -2e-4, 2e-4, 2e-6, 0.0)
        .unwrap()
        .points();
    let xscan = Scan::new(Axis::Control, -2e-4, 2e-4, 1e-6, 0.0)
        .unwrap()
        .points();
    let mut asym_err: f64 = 0.0;
    let mut exact_err: f64 = 0.0;
    for grid in [&diag, &xscan] {
        let asym = basic_pattern(&s, grid, Mode::Asymptotic, Execution::Parallel);
        let exact = basic_pattern(&s, grid, Mode::Exact, Execution::Parallel);
        for (k, p) in grid.iter().enumerate() {
            let want = (Complex64::new(1.0, 0.0) + Complex64::cis(phi_oracle(&s, p.x_c, p.x_t)))
                .norm_sqr();
            asym_err = asym_err.max((asym.values[k] - want).abs());
            exact_err = exact_err.max((exact.values[k] - asym.values[k]).abs() / 4.0);
        }
    }
    // Period from the spacing of interior maxima of the x_C scan.
    let v: Vec<f64> = xscan
        .iter()
        .map(|p| dn_corr_basic(&s, p.x_c, p.x_t, Mode::Exact))
        .collect();
    let peaks: Vec<f64> = (1..v.len() - 1)
        .filter(|&k| v[k] >= v[k - 1] && v[k] > v[k + 1])
        .map(|k| xscan[k].x_c)
        .collect();
    let measured = (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64;
    let expected = fringe_period_xc(&s).unwrap();
    let step = 1e-6;
    check(
        asym_err <= 1e-12 && exact_err <= 0.01 && (measured - expected).abs() <= step && (expected - 5e-5).abs() < 1e-18,
        format!(
            "asymptotic err {asym_err:.1e}, exact-vs-asymptotic {:.3}% of peak, period {measured:.4e} m (expected {expected:.4e})",
            100.0 * exact_err
        ),
    )
}

fn cross_pair_suppression() -> Outcome {
    let bound = 1.0 / (20.0 * PI);
    let xs: Vec<f64> = (0..41).map(|k| -1e-3 + k as f64 * 5e-5).collect();
    let mut worst: f64 = 0.0;
    // Reference geometry, plus cross separations anywhere in [20, 21]·l_coh.
    for shift in [0.0, 0.1, 0.25, 0.5, 0.75, 1.0] {
        let d = 0.5 * shift * reference().l_coh();
        let s = SetupBasic::new(
            A,
            LAMBDA,
            1.0,
            1.0,
            -5e-3 - d,
            5e-3 + d,
            -5e-3 - d,
            5e-3 + d,
        )
        .unwrap();
        for &xc in &xs {
            for &xt in &xs {
                let p = g1_pairs(xc, xt, &s, PhaseConvention::Fresnel);
                worst = worst.max(p[0][1].value.norm()).max(p[1][0].value.norm());
            }
        }
    }
    check(
        worst <= bound,
        format!("max cross-pair amplitude {worst:.3e} of a coherent pair (bound {bound:.3e})"),
    )
}

/// Asymmetric pinholes: quadratic term −π in the halved convention, −2π in
/// the unhalved one.
fn arbitration_geometry() -> SetupBasic {
    SetupBasic::new(A, LAMBDA, 1.0, 1.0, -5e-3, 5.625e-3, -4.8e-3, 5.425e-3).unwrap()
}

fn phase_convention() -> Outcome {
    let s = arbitration_geometry();
    let grid = Scan::new(Axis::Diagonal, -1.25e-3, 1.25e-3, 6.25e-5, 0.0)
        .unwrap()
        .points();
    let source = SourceModel::uniform(A, 256, 1.0).unwrap();
    let est = estimate_dn_corr(
        &source,
        s.into(),
        None,
        &grid,
        &EstimateOptions::new(20_000, SEED),
    )
    .unwrap();
    let halved = basic_pattern(&s, &grid, Mode::Exact, Execution::Parallel);
    let unhalved = basic_pattern_with(
        &s,
        &grid,
        Mode::Exact,
        PhaseConvention::Unhalved,
        Execution::Parallel,
    );
    let good = compare_patterns(&halved, &est.pattern).unwrap();
    let bad = compare_patterns(&unhalved, &est.pattern).unwrap();
    check(
        good.max_sigma_dev <= 4.0 && bad.max_sigma_dev > 5.0,
        format!(
            "w/(2ch): max_sigma_dev {:.2}, pearson {:.4}; w/(ch): max_sigma_dev {:.1}, pearson {:.4}",
            good.max_sigma_dev, good.pearson, bad.max_sigma_dev, bad.pearson
        ),
    )
}

fn cnot_truth_table() -> Outcome {
    let gate: SetupGate = reference().into();
    let ideal = TruthTable::ideal_cnot();
    let asym = TruthTable::build(|a| dn_corr_gate(&gate, a, 0.0, 0.0, Mode::Asymptotic));
    let asym_err = asym.max_abs_diff(&ideal);
    let source = SourceModel::uniform(A, 256, 1.0).unwrap();
    let origin = [GridPoint::new(0.0, 0.0)];
    let mut worst: f64 = 0.0;
    for (r, &(ci, ti)) in TruthTable::LABELS.iter().enumerate() {
        for (c, &(co, to)) in TruthTable::LABELS.iter().enumerate() {
            let angles = GateAngles::basis(ci, ti, co, to);
            let est = estimate_dn_corr(
                &source,
                gate.into(),
                Some(angles),
                &origin,
                &EstimateOptions::new(20_000, SEED),
            )
            .unwrap();
            let reference = CorrelationPattern {
                grid: origin.to_vec(),
                values: vec![ideal.p[r][c]],
                mode: PatternMode::Asymptotic,
                stderr: None,
            };
            worst = worst.max(
                compare_patterns(&reference, &est.pattern)
                    .unwrap()
                    .max_sigma_dev,
            );
        }
    }
    check(
        asym_err <= 1e-15 && worst <= 3.0,
        format!(
            "asymptotic max deviation {asym_err:.1e}; Monte-Carlo worst entry {worst:.2} sigma"
        ),
    )
}

fn controlled_u_continuity() -> Outcome {
    let base = reference();
    let angles = GateAngles::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4, FRAC_PI_4);
    let w = 2.0 * PI / base.lambda;
    let mut err: f64 = 0.0;
    let mut span = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..=256 {
        let target = 2.0 * PI * k as f64 / 256.0;
        // x₁² − x₁′² = 2hφ/w
        let x1p = -(base.x1 * base.x1 - 2.0 * base.h() * target / w).sqrt();
        let s = SetupBasic::new(A, LAMBDA, 1.0, 1.0, base.x1, base.x2, x1p, base.x2p).unwrap();
        let gate: SetupGate = s.into();
        let phi = phi_oracle(&s, 0.0, 0.0);
        span = (span.0.min(phi), span.1.max(phi));
        let got = dn_corr_gate(&gate, angles, 0.0, 0.0, Mode::Asymptotic);
        err = err.max((got - (phi / 2.0).cos().powi(2)).abs());
    }
    check(
        err <= 1e-12 && span.0 <= 1e-9 && span.1 >= 2.0 * PI - 1e-9,
        format!(
            "phi over [{:.2e}, {:.6}], max |P - cos^2(phi/2)| {err:.1e}",
            span.0, span.1
        ),
    )
}

fn mz_equivalence() -> Outcome {
    let l = LAMBDA * 1.0 / (2.0 * A);
    let zbar = 0.2;
    let d = 10.0 * l / (2.0 * zbar);
    let s = SetupMZ::new(A, LAMBDA, 1.0, zbar, d, d).unwrap();
    let grid: Vec<f64> = (0..12).map(|k| k as f64 * PI / 6.0).collect();
    let mut cnot_err: f64 = 0.0;
    let mut tuples = 0;
    for &pc in &grid {
        for &pt in &grid {
            for &tc in &grid {
                for &tt in &grid {
                    let a = GateAngles::new(pc, pt, tc, tt);
                    for x in [-2e-4, 0.0, 3e-4] {
                        cnot_err = cnot_err
                            .max((dn_corr_mz(&s, a, x, x, Mode::Asymptotic) - p_cnot(a)).abs());
                    }
                    tuples += 1;
                }
            }
        }
    }
    // Quadratic expansion of the effective positions versus the closed form.
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut uniform = |lo: f64, hi: f64| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        lo + (hi - lo) * (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut rel: f64 = 0.0;
    for _ in 0..10_000 {
        let t = SetupMZ::new(
            A,
            LAMBDA,
            uniform(0.5, 2.0),
            uniform(0.05, 0.5),
            uniform(-0.05, 0.05),
            uniform(-0.05, 0.05),
        )
        .unwrap();
        let (xc, xt) = (uniform(-5e-3, 5e-3), uniform(-5e-3, 5e-3));
        let k = t.omega() / (2.0 * t.z * SPEED_OF_LIGHT);
        let (ec, et) = (xc + 2.0 * t.delta_c * t.zbar, xt + 2.0 * t.delta_t * t.zbar);
        let oracle = k * (ec * ec - et * et) - k * (xc * xc - xt * xt);
        let magnitude = k * (ec * ec + et * et + xc * xc + xt * xt);
        rel = rel.max((mz_phase(&t, xc, xt) - oracle).abs() / magnitude);
    }
    check(
        cnot_err <= 1e-12 && rel <= 1e-10,
        format!("{tuples} angle tuples: max |MZ - P_CNOT| {cnot_err:.1e}; phase vs expansion {rel:.1e} relative"),
    )
}

fn first_order_incoherence() -> Outcome {
    let s = reference();
    let ratio = (s.x1 - s.x2).abs() / s.l_coh();
    let grid = Scan::new(Axis::Control, -1e-4, 1e-4, 5e-6, 0.0)
        .unwrap()
        .points();
    let source = SourceModel::uniform(A, 256, 1.0).unwrap();
    let est = estimate_dn_corr(
        &source,
        s.into(),
        None,
        &grid,
        &EstimateOptions::new(10_000, SEED),
    )
    .unwrap();
    let v = visibility(&est.mean_intensity_c);
    check(
        v < 0.05 && ratio >= 20.0,
        format!(
            "single-detector visibility {:.2}% at separation ratio {ratio:.0}",
            100.0 * v
        ),
    )
}

fn hbt_baseline() -> Outcome {
    let s = SetupFree::new(A, LAMBDA, 1.0).unwrap();
    let grid = Scan::new(Axis::Target, -1e-3, 1e-3, 5e-5, 0.0)
        .unwrap()
        .points();
    let source = SourceModel::uniform(A, 256, 1.0).unwrap();
    let est = estimate_dn_corr(
        &source,
        s.into(),
        None,
        &grid,
        &EstimateOptions::new(10_000, SEED),
    )
    .unwrap();
    let envelope = CorrelationPattern {
        values: grid
            .iter()
            .map(|p| (tophat_ft(A, p.x_t - p.x_c, s.l_coh()).unwrap() / (2.0 * A)).powi(2))
            .collect(),
        grid,
        mode: PatternMode::Exact,
        stderr: None,
    };
    let c = compare_patterns(&envelope, &est.pattern).unwrap();
    check(
        c.pearson >= 0.99,
        format!(
            "pearson {:.5}, max_sigma_dev {:.2}",
            c.pearson, c.max_sigma_dev
        ),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "fringe law", Duration::from_secs(1), fringe_law),
        (
            2,
            "cross-pair suppression",
            Duration::from_secs(1),
            cross_pair_suppression,
        ),
        (
            3,
            "phase-convention arbitration",
            Duration::from_secs(120),
            phase_convention,
        ),
        (
            4,
            "CNOT truth table",
            Duration::from_secs(300),
            cnot_truth_table,
        ),
        (
            5,
            "controlled-U continuity",
            Duration::from_secs(1),
            controlled_u_continuity,
        ),
        (
            6,
            "Mach-Zehnder equivalence",
            Duration::from_secs(10),
            mz_equivalence,
        ),
        (
            7,
            "first-order incoherence",
            Duration::from_secs(60),
            first_order_incoherence,
        ),
        (8, "HBT baseline", Duration::from_secs(60), hbt_baseline),
    ];
    let mut failures = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let ok = out.passed && elapsed <= limit;
        if !ok {
            failures += 1;
        }
        println!(
            "{} [{id}] {name}: {} ({:.2?}, limit {:?})",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            elapsed,
            limit
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
