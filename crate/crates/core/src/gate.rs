//! Polarization-resolved correlations and controlled-U_φ gate simulation.
//!
//! Both gate interferometers reduce to four path pairs weighted by real
//! polarization coefficients `c_C,i · c_T,j`:
//!
//! * pinhole masks with polarizers: control `(cosθ_C cosφ_𝒞, sinθ_C sinφ_𝒞)`,
//!   target `(cos(θ_T − φ_𝒯), sin(θ_T + φ_𝒯))`;
//! * Mach-Zehnder: the same magnitudes, with the second path of each arm
//!   carrying a minus sign.
//!
//! In the asymptotic regime only `(1,1′)` and `(2,2′)` survive and the
//! correlation equals the controlled-U_φ joint probability.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::analytic::{g1_pairs, phase_phi_basic, BasicConditions, PhaseConvention, STRONG_RATIO};
use crate::exec::Execution;
use crate::pattern::{CorrelationPattern, GridPoint, Mode};
use crate::phys::{sinc, Complex64, SPEED_OF_LIGHT};
use crate::setup::{ControlPath, SetupGate, SetupMZ, TargetPath, Warning};

/// Phase threshold below which a controlled-U_φ is treated as a CNOT.
pub const CNOT_REGIME: f64 = 0.1;

/// Preparation plates `(φ_𝒞, φ_𝒯)` and analyzers `(θ_C, θ_T)`, in radians,
/// each reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateAngles {
    pub phi_c: f64,
    pub phi_t: f64,
    pub theta_c: f64,
    pub theta_t: f64,
}

impl GateAngles {
    pub fn new(phi_c: f64, phi_t: f64, theta_c: f64, theta_t: f64) -> Self {
        let r = |x: f64| {
            assert!(x.is_finite(), "gate angles must be finite");
            x.rem_euclid(2.0 * PI)
        };
        Self {
            phi_c: r(phi_c),
            phi_t: r(phi_t),
            theta_c: r(theta_c),
            theta_t: r(theta_t),
        }
    }

    /// Computational-basis setting: inputs are prepared and outputs analyzed
    /// along H (0) or V (π/2).
    pub fn basis(control_in: Bit, target_in: Bit, control_out: Bit, target_out: Bit) -> Self {
        Self::new(
            control_in.angle(),
            target_in.angle(),
            control_out.angle(),
            target_out.angle(),
        )
    }
}

/// Logical basis state: H ↔ 0 ↔ angle 0, V ↔ 1 ↔ angle π/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bit {
    H,
    V,
}

impl Bit {
    pub const ALL: [Bit; 2] = [Bit::H, Bit::V];

    pub fn angle(self) -> f64 {
        match self {
            Bit::H => 0.0,
            Bit::V => FRAC_PI_2,
        }
    }

    pub fn flip(self) -> Bit {
        match self {
            Bit::H => Bit::V,
            Bit::V => Bit::H,
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bit::H => "H",
            Bit::V => "V",
        })
    }
}

/// Joint probability `|cosφ_𝒞 cosθ_C cos(φ_𝒯−θ_T) + e^{iφ} sinφ_𝒞 sinθ_C sin(φ_𝒯+θ_T)|²`.
pub fn p_controlled_u(angles: GateAngles, phi: f64) -> f64 {
    let GateAngles {
        phi_c,
        phi_t,
        theta_c,
        theta_t,
    } = angles;
    let first = phi_c.cos() * theta_c.cos() * (phi_t - theta_t).cos();
    let second = phi_c.sin() * theta_c.sin() * (phi_t + theta_t).sin();
    (Complex64::new(first, 0.0) + Complex64::cis(phi) * second).norm_sqr()
}

pub fn p_cnot(angles: GateAngles) -> f64 {
    p_controlled_u(angles, 0.0)
}

/// Real polarization weights of the two paths of each arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCoefficients {
    pub control: [f64; 2],
    pub target: [f64; 2],
}

impl PathCoefficients {
    /// Weight `c_C,i · c_T,j` of a path pair.
    pub fn pair(&self, i: ControlPath, j: TargetPath) -> f64 {
        self.control[i.index()] * self.target[j.index()]
    }
}

/// Pinhole setup: H/V polarizers on 1/2, flip plate on 2′.
pub fn pinhole_coefficients(angles: GateAngles) -> PathCoefficients {
    let GateAngles {
        phi_c,
        phi_t,
        theta_c,
        theta_t,
    } = angles;
    PathCoefficients {
        control: [theta_c.cos() * phi_c.cos(), theta_c.sin() * phi_c.sin()],
        target: [(theta_t - phi_t).cos(), (theta_t + phi_t).sin()],
    }
}

/// Mach-Zehnder setup: the PBS paths and the flipped target path carry a sign.
pub fn mz_coefficients(angles: GateAngles) -> PathCoefficients {
    let p = pinhole_coefficients(angles);
    PathCoefficients {
        control: [p.control[0], -p.control[1]],
        target: [p.target[0], -p.target[1]],
    }
}

/// Normalized polarization-dependent `⟨Δn(x_C,θ_C) Δn(x_T,θ_T)⟩` for the
/// pinhole gate. The asymptotic value is exactly `p_controlled_u` at the
/// geometric phase.
pub fn dn_corr_gate(setup: &SetupGate, angles: GateAngles, x_c: f64, x_t: f64, mode: Mode) -> f64 {
    match mode {
        Mode::Asymptotic => p_controlled_u(angles, phase_phi_basic(&setup.basic, x_c, x_t)),
        Mode::Exact => {
            let coef = pinhole_coefficients(angles);
            let pairs = g1_pairs(x_c, x_t, &setup.basic, PhaseConvention::Fresnel);
            let mut sum = Complex64::new(0.0, 0.0);
            for i in ControlPath::ALL {
                for j in TargetPath::ALL {
                    sum += pairs[i.index()][j.index()].value * coef.pair(i, j);
                }
            }
            sum.norm_sqr()
        }
    }
}

/// `|φ|` at the detector positions; at most [`CNOT_REGIME`] means CNOT.
pub fn cnot_condition_margin(setup: &SetupGate, x_c: f64, x_t: f64) -> f64 {
    phase_phi_basic(&setup.basic, x_c, x_t).abs()
}

/// Geometric phase of the Mach-Zehnder gate,
/// `(2ω/(cz))·[z̄²(δ_C² − δ_T²) + z̄(x_C δ_C − x_T δ_T)]`.
pub fn mz_phase(setup: &SetupMZ, x_c: f64, x_t: f64) -> f64 {
    let SetupMZ {
        z,
        zbar,
        delta_c,
        delta_t,
        ..
    } = *setup;
    2.0 * setup.omega() / (SPEED_OF_LIGHT * z)
        * (zbar * zbar * (delta_c * delta_c - delta_t * delta_t)
            + zbar * (x_c * delta_c - x_t * delta_t))
}

/// Geometric factor of one Mach-Zehnder path pair: normalized envelope at the
/// effective separation times `exp(iω(x_C,i² − x_T,j²)/(2zc))`.
pub fn mz_pair(setup: &SetupMZ, i: ControlPath, j: TargetPath, x_c: f64, x_t: f64) -> Complex64 {
    let xc = setup.effective_position(i.into(), x_c);
    let xt = setup.effective_position(j.into(), x_t);
    let env = sinc(PI * (xt - xc) / setup.l_coh());
    let phase = setup.omega() * (xc * xc - xt * xt) / (2.0 * setup.z * SPEED_OF_LIGHT);
    Complex64::from_polar(env, phase)
}

pub fn dn_corr_mz(setup: &SetupMZ, angles: GateAngles, x_c: f64, x_t: f64, mode: Mode) -> f64 {
    match mode {
        Mode::Asymptotic => p_controlled_u(angles, mz_phase(setup, x_c, x_t)),
        Mode::Exact => {
            let coef = mz_coefficients(angles);
            let mut sum = Complex64::new(0.0, 0.0);
            for i in ControlPath::ALL {
                for j in TargetPath::ALL {
                    sum += mz_pair(setup, i, j, x_c, x_t) * coef.pair(i, j);
                }
            }
            sum.norm_sqr()
        }
    }
}

/// Dimensionless margins of the Mach-Zehnder validity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzMargins {
    /// `|δ_C|·2z̄/l_coh`, should be large.
    pub delta_c: f64,
    /// `|δ_T|·2z̄/l_coh`, should be large.
    pub delta_t: f64,
    /// `|δ_C − δ_T|·2z̄/l_coh`, should be small.
    pub delta_diff: f64,
    /// `|x_C − x_T|/l_coh`, should be small.
    pub detector_offset: f64,
    /// `|φ|`; small means CNOT.
    pub phase: f64,
}

pub fn mz_condition_margins(setup: &SetupMZ, x_c: f64, x_t: f64) -> MzMargins {
    let l = setup.l_coh();
    let scale = 2.0 * setup.zbar / l;
    MzMargins {
        delta_c: setup.delta_c.abs() * scale,
        delta_t: setup.delta_t.abs() * scale,
        delta_diff: (setup.delta_c - setup.delta_t).abs() * scale,
        detector_offset: (x_c - x_t).abs() / l,
        phase: mz_phase(setup, x_c, x_t).abs(),
    }
}

impl MzMargins {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.delta_c,
            self.delta_t,
            self.delta_diff,
            self.detector_offset,
            self.phase,
        ]
    }

    /// Violations of the conditions that make the asymptotic form valid.
    pub fn warnings(&self) -> Vec<Warning> {
        let mut out = Vec::new();
        let small = 1.0 / STRONG_RATIO;
        for (name, r) in [
            ("|delta_C|*2zbar/l_coh", self.delta_c),
            ("|delta_T|*2zbar/l_coh", self.delta_t),
        ] {
            if r < STRONG_RATIO {
                out.push(Warning::new(
                    name,
                    format!("{r:.4} < {STRONG_RATIO}: cross paths not suppressed"),
                ));
            }
        }
        for (name, r) in [
            ("|delta_C-delta_T|*2zbar/l_coh", self.delta_diff),
            ("|x_C-x_T|/l_coh", self.detector_offset),
        ] {
            if r > small {
                out.push(Warning::new(
                    name,
                    format!("{r:.4} > {small}: main paths not fully coherent"),
                ));
            }
        }
        out
    }
}

/// Validity report for the pinhole gate: the basic separation conditions and
/// the CNOT phase margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConditions {
    pub basic: BasicConditions,
    pub cnot_margin: f64,
}

impl GateConditions {
    pub fn of(setup: &SetupGate, x_c: f64, x_t: f64) -> Self {
        Self {
            basic: BasicConditions::of(&setup.basic),
            cnot_margin: cnot_condition_margin(setup, x_c, x_t),
        }
    }

    pub fn in_cnot_regime(&self) -> bool {
        self.cnot_margin <= CNOT_REGIME
    }
}

pub fn gate_pattern(
    setup: &SetupGate,
    angles: GateAngles,
    grid: &[GridPoint],
    mode: Mode,
    exec: Execution,
) -> CorrelationPattern {
    CorrelationPattern::evaluate(grid, mode.into(), exec, |p| {
        dn_corr_gate(setup, angles, p.x_c, p.x_t, mode)
    })
}

pub fn mz_pattern(
    setup: &SetupMZ,
    angles: GateAngles,
    grid: &[GridPoint],
    mode: Mode,
    exec: Execution,
) -> CorrelationPattern {
    CorrelationPattern::evaluate(grid, mode.into(), exec, |p| {
        dn_corr_mz(setup, angles, p.x_c, p.x_t, mode)
    })
}

/// Joint probabilities for the 4 computational input states (rows) and the
/// 4 analyzer settings (columns), both ordered HH, HV, VH, VV as
/// (control, target).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthTable {
    pub p: [[f64; 4]; 4],
}

impl TruthTable {
    pub const LABELS: [(Bit, Bit); 4] = [
        (Bit::H, Bit::H),
        (Bit::H, Bit::V),
        (Bit::V, Bit::H),
        (Bit::V, Bit::V),
    ];

    /// Fills the table by evaluating `f` at every basis setting.
    pub fn build(mut f: impl FnMut(GateAngles) -> f64) -> Self {
        let mut p = [[0.0; 4]; 4];
        for (r, &(ci, ti)) in Self::LABELS.iter().enumerate() {
            for (c, &(co, to)) in Self::LABELS.iter().enumerate() {
                p[r][c] = f(GateAngles::basis(ci, ti, co, to));
            }
        }
        Self { p }
    }

    /// Control H leaves the target alone; control V flips it.
    pub fn ideal_cnot() -> Self {
        let mut p = [[0.0; 4]; 4];
        for (r, &(ci, ti)) in Self::LABELS.iter().enumerate() {
            let out = match ci {
                Bit::H => (ci, ti),
                Bit::V => (ci, ti.flip()),
            };
            let c = Self::LABELS.iter().position(|&l| l == out).unwrap();
            p[r][c] = 1.0;
        }
        Self { p }
    }

    pub fn label(index: usize) -> String {
        let (c, t) = Self::LABELS[index];
        format!("{c}{t}")
    }

    pub fn max_abs_diff(&self, other: &TruthTable) -> f64 {
        self.p
            .iter()
            .flatten()
            .zip(other.p.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
