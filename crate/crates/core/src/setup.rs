//! Interferometer geometries. All lengths in metres, angles in radians.

use std::fmt;

use crate::error::{Error, Result};
use crate::phys::angular_frequency;

/// Detector arm. The control arm is the transmitted beam-splitter output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    Control,
    Target,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Control, Arm::Target];

    pub fn index(self) -> usize {
        match self {
            Arm::Control => 0,
            Arm::Target => 1,
        }
    }
}

/// Pinhole (or Mach-Zehnder path) in the control mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlPath {
    One,
    Two,
}

/// Pinhole (or Mach-Zehnder path) in the target mask, 1′ and 2′.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetPath {
    One,
    Two,
}

impl ControlPath {
    pub const ALL: [ControlPath; 2] = [ControlPath::One, ControlPath::Two];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl TargetPath {
    pub const ALL: [TargetPath; 2] = [TargetPath::One, TargetPath::Two];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Any of the four paths: 1 and 2 on the control side, 1′ and 2′ on the target side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathLabel {
    C1,
    C2,
    T1,
    T2,
}

impl PathLabel {
    pub fn arm(self) -> Arm {
        match self {
            PathLabel::C1 | PathLabel::C2 => Arm::Control,
            PathLabel::T1 | PathLabel::T2 => Arm::Target,
        }
    }

    /// Index within its own arm (0 for 1/1′, 1 for 2/2′).
    pub fn slot(self) -> usize {
        match self {
            PathLabel::C1 | PathLabel::T1 => 0,
            PathLabel::C2 | PathLabel::T2 => 1,
        }
    }

    pub fn of(arm: Arm, slot: usize) -> PathLabel {
        match (arm, slot) {
            (Arm::Control, 0) => PathLabel::C1,
            (Arm::Control, _) => PathLabel::C2,
            (Arm::Target, 0) => PathLabel::T1,
            (Arm::Target, _) => PathLabel::T2,
        }
    }
}

impl From<ControlPath> for PathLabel {
    fn from(p: ControlPath) -> Self {
        PathLabel::of(Arm::Control, p.index())
    }
}

impl From<TargetPath> for PathLabel {
    fn from(p: TargetPath) -> Self {
        PathLabel::of(Arm::Target, p.index())
    }
}

impl fmt::Display for PathLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathLabel::C1 => "1",
            PathLabel::C2 => "2",
            PathLabel::T1 => "1'",
            PathLabel::T2 => "2'",
        })
    }
}

/// Non-fatal validity notice (paraxial sanity, asymptotic-regime conditions).
#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub quantity: String,
    pub message: String,
}

impl Warning {
    pub fn new(quantity: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            quantity: quantity.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.quantity, self.message)
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGeometry {
            field,
            value,
            reason: "must be positive and finite",
        })
    }
}

fn finite(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGeometry {
            field,
            value,
            reason: "must be finite",
        })
    }
}

/// Geometry of the two-mask interferometer: chaotic source of half-width `a`,
/// masks at distance `z`, detectors a further `f` behind the masks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupBasic {
    pub a: f64,
    pub lambda: f64,
    pub z: f64,
    pub f: f64,
    pub x1: f64,
    pub x2: f64,
    pub x1p: f64,
    pub x2p: f64,
}

impl SetupBasic {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        lambda: f64,
        z: f64,
        f: f64,
        x1: f64,
        x2: f64,
        x1p: f64,
        x2p: f64,
    ) -> Result<Self> {
        let s = Self {
            a,
            lambda,
            z,
            f,
            x1,
            x2,
            x1p,
            x2p,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        positive("a", self.a)?;
        positive("lambda", self.lambda)?;
        positive("z", self.z)?;
        positive("f", self.f)?;
        finite("x1", self.x1)?;
        finite("x2", self.x2)?;
        finite("x1p", self.x1p)?;
        finite("x2p", self.x2p)
    }

    pub fn omega(&self) -> f64 {
        angular_frequency(self.lambda)
    }

    /// `h` with `1/h = 1/z + 1/f`.
    pub fn h(&self) -> f64 {
        self.z * self.f / (self.z + self.f)
    }

    /// Transverse coherence length `λz/(2a)` at the mask plane.
    pub fn l_coh(&self) -> f64 {
        self.lambda * self.z / (2.0 * self.a)
    }

    pub fn control_position(&self, p: ControlPath) -> f64 {
        match p {
            ControlPath::One => self.x1,
            ControlPath::Two => self.x2,
        }
    }

    pub fn target_position(&self, p: TargetPath) -> f64 {
        match p {
            TargetPath::One => self.x1p,
            TargetPath::Two => self.x2p,
        }
    }

    pub fn position(&self, p: PathLabel) -> f64 {
        match p {
            PathLabel::C1 => self.x1,
            PathLabel::C2 => self.x2,
            PathLabel::T1 => self.x1p,
            PathLabel::T2 => self.x2p,
        }
    }

    /// Paraxial sanity: transverse extents should stay below a tenth of `z`.
    pub fn warnings(&self) -> Vec<Warning> {
        let limit = self.z / 10.0;
        let widest = [self.a, self.x1, self.x2, self.x1p, self.x2p]
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max);
        if widest > limit {
            vec![Warning::new(
                "paraxial",
                format!("transverse extent {widest:e} m exceeds z/10 = {limit:e} m"),
            )]
        } else {
            Vec::new()
        }
    }
}

/// Pinhole interferometer with polarization optics: H polarizer on pinhole 1,
/// V polarizer on pinhole 2, flip plate on pinhole 2′, nothing on 1′.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupGate {
    pub basic: SetupBasic,
}

impl SetupGate {
    pub fn new(basic: SetupBasic) -> Self {
        Self { basic }
    }
}

impl From<SetupBasic> for SetupGate {
    fn from(basic: SetupBasic) -> Self {
        Self { basic }
    }
}

/// Mach-Zehnder variant: tilted mirrors replace the masks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupMZ {
    pub a: f64,
    pub lambda: f64,
    /// Source to detector longitudinal distance.
    pub z: f64,
    /// Mirrors to detectors.
    pub zbar: f64,
    pub delta_c: f64,
    pub delta_t: f64,
}

impl SetupMZ {
    pub fn new(a: f64, lambda: f64, z: f64, zbar: f64, delta_c: f64, delta_t: f64) -> Result<Self> {
        let s = Self {
            a,
            lambda,
            z,
            zbar,
            delta_c,
            delta_t,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        positive("a", self.a)?;
        positive("lambda", self.lambda)?;
        positive("z", self.z)?;
        positive("zbar", self.zbar)?;
        finite("delta_c", self.delta_c)?;
        finite("delta_t", self.delta_t)
    }

    pub fn omega(&self) -> f64 {
        angular_frequency(self.lambda)
    }

    /// `λz/(2a)` at the detector plane.
    pub fn l_coh(&self) -> f64 {
        self.lambda * self.z / (2.0 * self.a)
    }

    /// Effective transverse detector position seen through a given path:
    /// the tilted paths 1 and 1′ are displaced by `2·z̄·δ`.
    pub fn effective_position(&self, path: PathLabel, x_d: f64) -> f64 {
        match path {
            PathLabel::C1 => x_d + 2.0 * self.zbar * self.delta_c,
            PathLabel::T1 => x_d + 2.0 * self.zbar * self.delta_t,
            PathLabel::C2 | PathLabel::T2 => x_d,
        }
    }

    pub fn warnings(&self) -> Vec<Warning> {
        let mut out = Vec::new();
        for (name, d) in [("delta_c", self.delta_c), ("delta_t", self.delta_t)] {
            if d.abs() > 0.05 {
                out.push(Warning::new(
                    name,
                    format!("tilt {d} rad exceeds the small-angle range (0.05 rad)"),
                ));
            }
        }
        out
    }
}

/// Free propagation from the source straight to the detectors (no masks),
/// the plain intensity-interferometry configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupFree {
    pub a: f64,
    pub lambda: f64,
    /// Source to detector distance.
    pub z: f64,
}

impl SetupFree {
    pub fn new(a: f64, lambda: f64, z: f64) -> Result<Self> {
        positive("a", a)?;
        positive("lambda", lambda)?;
        positive("z", z)?;
        Ok(Self { a, lambda, z })
    }

    pub fn omega(&self) -> f64 {
        angular_frequency(self.lambda)
    }

    pub fn l_coh(&self) -> f64 {
        self.lambda * self.z / (2.0 * self.a)
    }
}

/// Any of the supported interferometers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Basic(SetupBasic),
    Gate(SetupGate),
    Mz(SetupMZ),
    Free(SetupFree),
}

impl Geometry {
    pub fn is_polarized(&self) -> bool {
        matches!(self, Geometry::Gate(_) | Geometry::Mz(_))
    }

    pub fn source_half_width(&self) -> f64 {
        match self {
            Geometry::Basic(s) => s.a,
            Geometry::Gate(s) => s.basic.a,
            Geometry::Mz(s) => s.a,
            Geometry::Free(s) => s.a,
        }
    }

    pub fn l_coh(&self) -> f64 {
        match self {
            Geometry::Basic(s) => s.l_coh(),
            Geometry::Gate(s) => s.basic.l_coh(),
            Geometry::Mz(s) => s.l_coh(),
            Geometry::Free(s) => s.l_coh(),
        }
    }
}

impl From<SetupBasic> for Geometry {
    fn from(s: SetupBasic) -> Self {
        Geometry::Basic(s)
    }
}

impl From<SetupGate> for Geometry {
    fn from(s: SetupGate) -> Self {
        Geometry::Gate(s)
    }
}

impl From<SetupMZ> for Geometry {
    fn from(s: SetupMZ) -> Self {
        Geometry::Mz(s)
    }
}

impl From<SetupFree> for Geometry {
    fn from(s: SetupFree) -> Self {
        Geometry::Free(s)
    }
}
