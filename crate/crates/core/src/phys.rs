//! Foundational numerics shared by every engine: the paraxial Fresnel
//! propagator, the Fourier envelope of a top-hat source and the Jones
//! elements that make up the polarization networks.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::Mul;

pub use num_complex::Complex64;

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s), exact by definition of the metre.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency ω = 2πc/λ of a quasi-monochromatic field.
pub fn angular_frequency(lambda: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda
}

/// Arguments of the paraxial propagator `exp(iβα²/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelArgs {
    /// Transverse offset (m).
    pub alpha: f64,
    /// Curvature ω/(cL) for a propagation length L (rad/m²).
    pub beta: f64,
}

impl FresnelArgs {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// Curvature for free propagation over `length` at angular frequency `omega`.
    pub fn for_length(alpha: f64, omega: f64, length: f64) -> Self {
        Self {
            alpha,
            beta: omega / (SPEED_OF_LIGHT * length),
        }
    }
}

/// The Fresnel propagator `exp(i·β·α²/2)`. Always unit modulus.
pub fn fresnel_phase(args: FresnelArgs) -> Complex64 {
    Complex64::cis(0.5 * args.beta * args.alpha * args.alpha)
}

/// `sin(x)/x` with the removable singularity at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Fourier transform of the intensity of a top-hat source of half-width `a`,
/// evaluated at the pinhole separation `dx`: `2a·sinc(π·dx/l_coh)`.
pub fn tophat_ft(a: f64, dx: f64, l_coh: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidGeometry {
            field: "a",
            value: a,
            reason: "source half-width must be positive",
        });
    }
    if !(l_coh > 0.0 && l_coh.is_finite()) {
        return Err(Error::InvalidGeometry {
            field: "l_coh",
            value: l_coh,
            reason: "coherence length must be positive",
        });
    }
    Ok(2.0 * a * sinc(PI * dx / l_coh))
}

/// 2×2 complex operator acting on (H, V) polarization amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    pub m: [[Complex64; 2]; 2],
}

/// Named optical elements of the interferometers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// Half-wave plate rotating H by the given angle.
    Rotation,
    PolarizerH,
    PolarizerV,
    /// Half-wave plate at π/4 exchanging H and V.
    Flip,
    Identity,
}

impl JonesMatrix {
    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self::new([[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]])
    }

    pub fn identity() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn zero() -> Self {
        Self::from_real([[0.0; 2]; 2])
    }

    /// `[[cosφ, sinφ], [sinφ, −cosφ]]`.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self::from_real([[c, s], [s, -c]])
    }

    pub fn polarizer_h() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, 0.0]])
    }

    pub fn polarizer_v() -> Self {
        Self::from_real([[0.0, 0.0], [0.0, 1.0]])
    }

    pub fn flip() -> Self {
        Self::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    /// Builds a named element. The angle must be given for rotations and only for them.
    pub fn element(kind: ElementKind, angle: Option<f64>) -> Result<Self> {
        match (kind, angle) {
            (ElementKind::Rotation, Some(phi)) => Ok(Self::rotation(phi)),
            (ElementKind::Rotation, None) => {
                Err(Error::argument("rotation element requires an angle"))
            }
            (_, Some(_)) => Err(Error::argument(format!(
                "{kind:?} element does not take an angle"
            ))),
            (ElementKind::PolarizerH, None) => Ok(Self::polarizer_h()),
            (ElementKind::PolarizerV, None) => Ok(Self::polarizer_v()),
            (ElementKind::Flip, None) => Ok(Self::flip()),
            (ElementKind::Identity, None) => Ok(Self::identity()),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = self.m;
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        Self { m }
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn apply(&self, v: JonesVector) -> JonesVector {
        let m = &self.m;
        JonesVector::new(m[0][0] * v.h + m[0][1] * v.v, m[1][0] * v.h + m[1][1] * v.v)
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }
}

impl std::ops::Add for JonesMatrix {
    type Output = JonesMatrix;

    fn add(self, rhs: JonesMatrix) -> JonesMatrix {
        let mut m = self.m;
        for (row, other) in m.iter_mut().zip(rhs.m) {
            for (x, y) in row.iter_mut().zip(other) {
                *x += y;
            }
        }
        JonesMatrix { m }
    }
}

impl Mul for JonesMatrix {
    type Output = JonesMatrix;

    fn mul(self, rhs: JonesMatrix) -> JonesMatrix {
        let (a, b) = (&self.m, &rhs.m);
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        JonesMatrix { m }
    }
}

/// Two-component (H, V) polarization state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub h: Complex64,
    pub v: Complex64,
}

impl JonesVector {
    pub const fn new(h: Complex64, v: Complex64) -> Self {
        Self { h, v }
    }

    pub fn horizontal() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Real unit direction `(cosθ, sinθ)` of a linear analyzer.
    pub fn analyzer(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(Complex64::new(c, 0.0), Complex64::new(s, 0.0))
    }

    /// Row-vector contraction `selfᵀ·other` (no conjugation; analyzers are real).
    pub fn project(&self, other: JonesVector) -> Complex64 {
        self.h * other.h + self.v * other.v
    }

    pub fn intensity(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }
}

/// Phase convention for the balanced non-polarizing beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BsConvention {
    /// `(1/√2)[[1, i], [i, 1]]`: reflection picks up a factor i.
    #[default]
    IReflection,
    /// `(1/√2)[[1, 1], [−1, 1]]`: the reflected arm picks up a phase π.
    PiReflection,
}

impl BsConvention {
    /// Amplitude from input port (0 = S, 1 = S′) to output arm (0 = C, 1 = T).
    pub fn amplitude(self, arm: usize, port: usize) -> Complex64 {
        let r = FRAC_1_SQRT_2;
        match (self, arm == port) {
            (_, true) => Complex64::new(r, 0.0),
            (BsConvention::IReflection, false) => Complex64::new(0.0, r),
            (BsConvention::PiReflection, false) => {
                if arm == 1 {
                    Complex64::new(-r, 0.0)
                } else {
                    Complex64::new(r, 0.0)
                }
            }
        }
    }
}

/// 4×4 beam-splitter matrix acting on `(S_H, S_V, S′_H, S′_V)`, i.e. the 2×2
/// block structure `(1/√2)[[I, iI], [iI, I]]`.
pub fn bs_block() -> [[Complex64; 4]; 4] {
    bs_block_with(BsConvention::IReflection)
}

pub fn bs_block_with(convention: BsConvention) -> [[Complex64; 4]; 4] {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for arm in 0..2 {
        for port in 0..2 {
            let s = convention.amplitude(arm, port);
            for pol in 0..2 {
                out[2 * arm + pol][2 * port + pol] = s;
            }
        }
    }
    out
}
