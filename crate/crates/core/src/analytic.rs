//! Closed-form correlations for the two-mask interferometer.
//!
//! Each pair of paths `(i, j)`, one pinhole per mask, contributes
//! `G_ij = B_i*(x_C)·B_j(x_T)·FT{|A|²}(x_i − x_j)`; the fluctuation correlation
//! is `|Σ G_ij|²`. Prefactors are dropped: envelopes are normalized to a peak
//! of one, so two fully coherent pairs in phase give 4.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pattern::{CorrelationPattern, GridPoint, Mode};
use crate::phys::{sinc, Complex64, SPEED_OF_LIGHT};
use crate::setup::{ControlPath, SetupBasic, SetupFree, TargetPath, Warning};

/// Ratio above which a "much greater than" condition is considered met;
/// its inverse is the bound for "much smaller than".
pub const STRONG_RATIO: f64 = 10.0;

/// Curvature of the pinhole phase term in `B_j`.
///
/// `Fresnel` is `ω/(2ch)`, what the propagator `exp(iβα²/2)` actually yields.
/// `Unhalved` is the `ω/(ch)` variant; it exists only so the Monte-Carlo
/// oracle can be shown to reject it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    #[default]
    Fresnel,
    Unhalved,
}

impl PhaseConvention {
    fn pinhole_factor(self) -> f64 {
        match self {
            PhaseConvention::Fresnel => 1.0,
            PhaseConvention::Unhalved => 2.0,
        }
    }
}

pub fn coherence_length(setup: &SetupBasic) -> f64 {
    setup.l_coh()
}

/// Unit-modulus phase factor `B_j(x_d)` of the path through pinhole `x_j`
/// to a detector at `x_d`, constant prefactors dropped.
pub fn b_phase(xj: f64, xd: f64, setup: &SetupBasic) -> Complex64 {
    b_phase_with(xj, xd, setup, PhaseConvention::Fresnel)
}

pub fn b_phase_with(
    xj: f64,
    xd: f64,
    setup: &SetupBasic,
    convention: PhaseConvention,
) -> Complex64 {
    Complex64::cis(b_phase_angle(xj, xd, setup, convention))
}

fn b_phase_angle(xj: f64, xd: f64, setup: &SetupBasic, convention: PhaseConvention) -> f64 {
    let k = setup.omega() / SPEED_OF_LIGHT;
    let detector = 0.5 * k / setup.f * xd * xd;
    let pinhole = 0.5 * convention.pinhole_factor() * k / setup.h() * xj * xj;
    detector + pinhole - k * xd * xj / setup.f
}

/// Coherence envelope of a pair of paths as a function of their transverse
/// separation, normalized to one at zero separation.
pub trait Envelope: Sync {
    fn normalized(&self, dx: f64) -> f64;
}

/// Uniform source of half-width `a`: `sinc(π·dx/l_coh)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopHat {
    pub l_coh: f64,
}

impl TopHat {
    pub fn for_setup(setup: &SetupBasic) -> Self {
        Self {
            l_coh: setup.l_coh(),
        }
    }
}

impl Envelope for TopHat {
    fn normalized(&self, dx: f64) -> f64 {
        sinc(PI * dx / self.l_coh)
    }
}

/// Contribution `G⁽¹⁾_{i,j}` of one pair of paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairContribution {
    pub i: ControlPath,
    pub j: TargetPath,
    /// Normalized coherence envelope, in [−1, 1].
    pub envelope: f64,
    /// Unwrapped phase of `B_i*(x_C)·B_j(x_T)` (rad).
    pub phase: f64,
    pub value: Complex64,
}

pub fn g1_pair(
    i: ControlPath,
    j: TargetPath,
    x_c: f64,
    x_t: f64,
    setup: &SetupBasic,
) -> PairContribution {
    g1_pair_with(
        i,
        j,
        x_c,
        x_t,
        setup,
        &TopHat::for_setup(setup),
        PhaseConvention::Fresnel,
    )
}

pub fn g1_pair_with(
    i: ControlPath,
    j: TargetPath,
    x_c: f64,
    x_t: f64,
    setup: &SetupBasic,
    envelope: &dyn Envelope,
    convention: PhaseConvention,
) -> PairContribution {
    let xi = setup.control_position(i);
    let xj = setup.target_position(j);
    let phase =
        b_phase_angle(xj, x_t, setup, convention) - b_phase_angle(xi, x_c, setup, convention);
    let env = envelope.normalized(xi - xj);
    PairContribution {
        i,
        j,
        envelope: env,
        phase,
        value: Complex64::from_polar(1.0, phase) * env,
    }
}

/// All four pair contributions, indexed `[control][target]`.
pub fn g1_pairs(
    x_c: f64,
    x_t: f64,
    setup: &SetupBasic,
    convention: PhaseConvention,
) -> [[PairContribution; 2]; 2] {
    let env = TopHat::for_setup(setup);
    ControlPath::ALL
        .map(|i| TargetPath::ALL.map(|j| g1_pair_with(i, j, x_c, x_t, setup, &env, convention)))
}

/// Interference phase between the (2,2′) and (1,1′) pairs. Raw, not wrapped.
pub fn phase_phi_basic(setup: &SetupBasic, x_c: f64, x_t: f64) -> f64 {
    phase_phi_basic_with(setup, x_c, x_t, PhaseConvention::Fresnel)
}

pub fn phase_phi_basic_with(
    setup: &SetupBasic,
    x_c: f64,
    x_t: f64,
    convention: PhaseConvention,
) -> f64 {
    let k = setup.omega() / SPEED_OF_LIGHT;
    let SetupBasic {
        x1,
        x2,
        x1p,
        x2p,
        f,
        ..
    } = *setup;
    let quadratic = 0.5 * convention.pinhole_factor() * k / setup.h()
        * (x1 * x1 + x2p * x2p - x1p * x1p - x2 * x2);
    let linear = k / f * (x_c * x2 - x_t * x2p - x_c * x1 + x_t * x1p);
    quadratic + linear
}

/// Wraps an angle to (−π, π], for display.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Normalized `⟨Δn(x_C) Δn(x_T)⟩`.
pub fn dn_corr_basic(setup: &SetupBasic, x_c: f64, x_t: f64, mode: Mode) -> f64 {
    dn_corr_basic_with(setup, x_c, x_t, mode, PhaseConvention::Fresnel)
}

pub fn dn_corr_basic_with(
    setup: &SetupBasic,
    x_c: f64,
    x_t: f64,
    mode: Mode,
    convention: PhaseConvention,
) -> f64 {
    match mode {
        Mode::Exact => {
            let sum: Complex64 = g1_pairs(x_c, x_t, setup, convention)
                .iter()
                .flatten()
                .map(|p| p.value)
                .sum();
            sum.norm_sqr()
        }
        Mode::Asymptotic => {
            let phi = phase_phi_basic_with(setup, x_c, x_t, convention);
            (Complex64::new(1.0, 0.0) + Complex64::cis(phi)).norm_sqr()
        }
    }
}

/// Amplitude carried by the incoherent pairs (1,2′) and (2,1′), in units of a
/// single fully coherent pair.
pub fn cross_pair_amplitude(setup: &SetupBasic, x_c: f64, x_t: f64) -> f64 {
    let p = g1_pairs(x_c, x_t, setup, PhaseConvention::Fresnel);
    p[0][1].value.norm() + p[1][0].value.norm()
}

/// Period `λf/|x₁ − x₂|` of the pattern as `x_C` varies at fixed `x_T`.
pub fn fringe_period_xc(setup: &SetupBasic) -> Result<f64> {
    let sep = (setup.x1 - setup.x2).abs();
    if sep == 0.0 {
        return Err(Error::DegenerateGeometry(
            "pinholes 1 and 2 coincide; the pattern does not vary with x_C".into(),
        ));
    }
    Ok(setup.lambda * setup.f / sep)
}

/// Separations in units of `l_coh` that decide whether only the (1,1′) and
/// (2,2′) pairs contribute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicConditions {
    /// `|x₁ − x₂′|/l_coh`, `|x₂ − x₁′|/l_coh`; should be large.
    pub cross: [f64; 2],
    /// `|x₁ − x₁′|/l_coh`, `|x₂ − x₂′|/l_coh`; should be small.
    pub main: [f64; 2],
}

impl BasicConditions {
    pub fn of(setup: &SetupBasic) -> Self {
        let l = setup.l_coh();
        Self {
            cross: [
                (setup.x1 - setup.x2p).abs() / l,
                (setup.x2 - setup.x1p).abs() / l,
            ],
            main: [
                (setup.x1 - setup.x1p).abs() / l,
                (setup.x2 - setup.x2p).abs() / l,
            ],
        }
    }

    pub fn warnings(&self) -> Vec<Warning> {
        let mut out = Vec::new();
        for (name, r) in ["|x1-x2'|/l_coh", "|x2-x1'|/l_coh"].iter().zip(self.cross) {
            if r < STRONG_RATIO {
                out.push(Warning::new(
                    *name,
                    format!("{r:.4} < {STRONG_RATIO}: cross pairs are not suppressed"),
                ));
            }
        }
        for (name, r) in ["|x1-x1'|/l_coh", "|x2-x2'|/l_coh"].iter().zip(self.main) {
            if r > 1.0 / STRONG_RATIO {
                out.push(Warning::new(
                    *name,
                    format!(
                        "{r:.4} > {}: main pair is not fully coherent",
                        1.0 / STRONG_RATIO
                    ),
                ));
            }
        }
        out
    }
}

/// Evaluates the pattern over a grid.
pub fn basic_pattern(
    setup: &SetupBasic,
    grid: &[GridPoint],
    mode: Mode,
    exec: Execution,
) -> CorrelationPattern {
    basic_pattern_with(setup, grid, mode, PhaseConvention::Fresnel, exec)
}

pub fn basic_pattern_with(
    setup: &SetupBasic,
    grid: &[GridPoint],
    mode: Mode,
    convention: PhaseConvention,
    exec: Execution,
) -> CorrelationPattern {
    CorrelationPattern::evaluate(grid, mode.into(), exec, |p| {
        dn_corr_basic_with(setup, p.x_c, p.x_t, mode, convention)
    })
}

/// Plain intensity interferometry without masks: `sinc²(π(x_T − x_C)/l_coh)`,
/// identical in both modes.
pub fn dn_corr_free(setup: &SetupFree, x_c: f64, x_t: f64) -> f64 {
    sinc(PI * (x_t - x_c) / setup.l_coh()).powi(2)
}

pub fn free_pattern(
    setup: &SetupFree,
    grid: &[GridPoint],
    mode: Mode,
    exec: Execution,
) -> CorrelationPattern {
    CorrelationPattern::evaluate(grid, mode.into(), exec, |p| {
        dn_corr_free(setup, p.x_c, p.x_t)
    })
}

/// Warnings relevant for evaluating `setup` in `mode`.
pub fn basic_warnings(setup: &SetupBasic, mode: Mode) -> Vec<Warning> {
    let mut w = setup.warnings();
    if mode == Mode::Asymptotic {
        w.extend(BasicConditions::of(setup).warnings());
    }
    w
}
