//! Stochastic-field Monte-Carlo oracle.
//!
//! The chaotic source is a row of independent point emitters with circular
//! complex-Gaussian amplitudes. Each realization is propagated to the
//! detectors with explicit paraxial kernels and the Jones factors of the
//! composed network; `⟨ΔI_C ΔI_T⟩` is then estimated over the ensemble.
//!
//! Amplitudes come from a counter-based stream keyed by `(seed, realization)`
//! with emitter `m` at a fixed word offset, so any realization can be
//! regenerated on its own and parallel runs match sequential ones bit for bit.

use std::f64::consts::PI;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gate::GateAngles;
use crate::network::{compose_network, NetworkKind, Port};
use crate::pattern::{CorrelationPattern, GridPoint, PatternMode};
use crate::phys::{BsConvention, Complex64, JonesVector, SPEED_OF_LIGHT};
use crate::setup::{Arm, Geometry, PathLabel};

pub const MIN_EMITTERS: usize = 64;
pub const MIN_REALIZATIONS: usize = 100;
pub const DEFAULT_EMITTERS: usize = 256;
pub const DEFAULT_BATCHES: usize = 10;

/// Realizations per work unit; fixed so the partition never depends on the
/// thread count.
const UNIT: usize = 128;

/// Equal-weight point emitters across `[−a, a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    pub a: f64,
    pub positions: Vec<f64>,
    pub mean_photon_number: f64,
}

impl SourceModel {
    /// `n_emitters` at the midpoints of equal cells of `[−a, a]`.
    pub fn uniform(a: f64, n_emitters: usize, mean_photon_number: f64) -> Result<Self> {
        if n_emitters < MIN_EMITTERS {
            return Err(Error::argument(format!(
                "n_emitters must be at least {MIN_EMITTERS}, got {n_emitters}"
            )));
        }
        let dx = 2.0 * a / n_emitters as f64;
        let positions = (0..n_emitters)
            .map(|m| -a + (m as f64 + 0.5) * dx)
            .collect();
        Self::from_positions(a, positions, mean_photon_number)
    }

    /// Arbitrary emitter positions, each strictly inside `(−a, a)`.
    pub fn from_positions(a: f64, positions: Vec<f64>, mean_photon_number: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidGeometry {
                field: "a",
                value: a,
                reason: "source half-width must be positive",
            });
        }
        if positions.is_empty() {
            return Err(Error::argument("source needs at least one emitter"));
        }
        if let Some(x) = positions
            .iter()
            .find(|x| x.abs().partial_cmp(&a) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::argument(format!(
                "emitter at {x} lies outside (-{a}, {a})"
            )));
        }
        if !(mean_photon_number > 0.0 && mean_photon_number.is_finite()) {
            return Err(Error::argument(format!(
                "mean_photon_number must be positive, got {mean_photon_number}"
            )));
        }
        Ok(Self {
            a,
            positions,
            mean_photon_number,
        })
    }

    pub fn n_emitters(&self) -> usize {
        self.positions.len()
    }
}

/// One draw of all emitter amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub amplitudes: Vec<Complex64>,
    pub seed: u64,
    pub index: u64,
}

fn unit_interval(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Circular Gaussian amplitude from two uniform words: `|α|²` is exponential
/// with mean `n̄`, the phase is uniform.
fn amplitude(rng: &mut ChaCha8Rng, mean_photon_number: f64) -> Complex64 {
    let u1 = 1.0 - unit_interval(rng.next_u64());
    let u2 = unit_interval(rng.next_u64());
    Complex64::from_polar((-mean_photon_number * u1.ln()).sqrt(), 2.0 * PI * u2)
}

fn fill_amplitudes(seed: u64, index: u64, mean_photon_number: f64, out: &mut [Complex64]) {
    let mut rng = stream(seed, index);
    for a in out.iter_mut() {
        *a = amplitude(&mut rng, mean_photon_number);
    }
}

/// Amplitude of emitter `m` alone; equal to `sample_realization(..).amplitudes[m]`.
pub fn emitter_amplitude(source: &SourceModel, seed: u64, index: u64, m: usize) -> Complex64 {
    let mut rng = stream(seed, index);
    // Four 32-bit words per emitter.
    rng.set_word_pos(4 * m as u128);
    amplitude(&mut rng, source.mean_photon_number)
}

pub fn sample_realization(source: &SourceModel, seed: u64, index: u64) -> Realization {
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); source.n_emitters()];
    fill_amplitudes(seed, index, source.mean_photon_number, &mut amplitudes);
    Realization {
        amplitudes,
        seed,
        index,
    }
}

/// What the detectors measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntensityKind {
    /// `|analyzer-projected field|²`.
    #[default]
    Projected,
    /// `|E_H|² + |E_V|²`, ignoring the analyzers.
    Unprojected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PathChannel {
    label: Option<PathLabel>,
    jones: JonesVector,
}

/// Propagation data of an interferometer: the open paths of each arm with
/// their Jones factors for an H-polarized source.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub geometry: Geometry,
    paths: [Vec<PathChannel>; 2],
    scale: [f64; 2],
}

impl Layout {
    /// `angles` supplies the preparation plates and is required for the
    /// polarized setups; analyzers are chosen per detector evaluation.
    pub fn new(
        geometry: Geometry,
        angles: Option<GateAngles>,
        convention: BsConvention,
        closed: &[PathLabel],
    ) -> Result<Self> {
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let mut paths: [Vec<PathChannel>; 2] = Default::default();
        let scale;
        match NetworkKind::of(&geometry) {
            Some(kind) => {
                let angles = angles.ok_or_else(|| {
                    Error::argument("preparation angles are required for polarized setups")
                })?;
                let net = compose_network(kind, angles, 0.0, convention);
                for arm in Arm::BOTH {
                    for slot in 0..2 {
                        let label = PathLabel::of(arm, slot);
                        let jones = net
                            .path_jones(arm, Port::S, label)
                            .apply(JonesVector::horizontal());
                        paths[arm.index()].push(PathChannel {
                            label: Some(label),
                            jones,
                        });
                    }
                }
                scale = match kind {
                    NetworkKind::Pinhole => [half, half],
                    NetworkKind::MachZehnder => [half, 0.5 * half],
                };
            }
            None => {
                for arm in Arm::BOTH {
                    let jones = JonesVector::new(
                        convention.amplitude(arm.index(), 0),
                        Complex64::new(0.0, 0.0),
                    );
                    let labels: Vec<Option<PathLabel>> = match geometry {
                        Geometry::Free(_) => vec![None],
                        _ => (0..2).map(|s| Some(PathLabel::of(arm, s))).collect(),
                    };
                    paths[arm.index()] = labels
                        .into_iter()
                        .map(|label| PathChannel { label, jones })
                        .collect();
                }
                scale = [half, half];
            }
        }
        for p in paths.iter_mut() {
            p.retain(|c| c.label.is_none_or(|l| !closed.contains(&l)));
        }
        Ok(Self {
            geometry,
            paths,
            scale,
        })
    }

    /// Magnitude of the scalar prefactor of each arm.
    pub fn arm_scale(&self, arm: Arm) -> f64 {
        self.scale[arm.index()]
    }

    /// Paraxial kernel from emitter `x_m` to a detector at `x_d` along a path.
    fn kernel(&self, label: Option<PathLabel>, x_m: f64, x_d: f64) -> Complex64 {
        let k = |omega: f64, len: f64, d: f64| omega * d * d / (2.0 * SPEED_OF_LIGHT * len);
        match (&self.geometry, label) {
            (Geometry::Basic(s), Some(p))
            | (Geometry::Gate(crate::setup::SetupGate { basic: s }), Some(p)) => {
                let w = s.omega();
                let x_p = s.position(p);
                Complex64::cis(k(w, s.z, x_m - x_p) + k(w, s.f, x_p - x_d))
            }
            (Geometry::Mz(s), Some(p)) => {
                let x_eff = s.effective_position(p, x_d);
                Complex64::cis(k(s.omega(), s.z, x_m - x_eff))
            }
            (Geometry::Free(s), None) => Complex64::cis(k(s.omega(), s.z, x_m - x_d)),
            _ => unreachable!("path label does not match geometry"),
        }
    }

    /// Emitter weights `w_m` with `E = Σ_m α_m w_m`, one row per measured
    /// polarization channel.
    fn weights(
        &self,
        source: &SourceModel,
        arm: Arm,
        x_d: f64,
        analyzer: Option<f64>,
        intensity: IntensityKind,
    ) -> Result<Vec<Vec<Complex64>>> {
        let polarized = self.geometry.is_polarized();
        let projections: Vec<Box<dyn Fn(JonesVector) -> Complex64>> =
            match (intensity, polarized, analyzer) {
                (IntensityKind::Projected, true, Some(theta)) => {
                    let a = JonesVector::analyzer(theta);
                    vec![Box::new(move |j| a.project(j))]
                }
                (IntensityKind::Projected, true, None) => {
                    return Err(Error::argument(
                        "an analyzer angle is required for polarized setups",
                    ))
                }
                (IntensityKind::Unprojected, true, _) => vec![
                    Box::new(|j: JonesVector| j.h),
                    Box::new(|j: JonesVector| j.v),
                ],
                (_, false, Some(_)) => {
                    return Err(Error::argument("unpolarized setups take no analyzer"))
                }
                (_, false, None) => vec![Box::new(|j: JonesVector| j.h)],
            };
        let paths = &self.paths[arm.index()];
        Ok(projections
            .iter()
            .map(|proj| {
                let coefs: Vec<(Option<PathLabel>, Complex64)> =
                    paths.iter().map(|c| (c.label, proj(c.jones))).collect();
                source
                    .positions
                    .iter()
                    .map(|&x_m| {
                        coefs
                            .iter()
                            .map(|&(l, c)| c * self.kernel(l, x_m, x_d))
                            .sum()
                    })
                    .collect()
            })
            .collect())
    }
}

/// Analyzer-projected (or scalar) field of one realization at a detector.
pub fn field_at_detector(
    realization: &Realization,
    source: &SourceModel,
    layout: &Layout,
    arm: Arm,
    x_d: f64,
    analyzer: Option<f64>,
) -> Result<Complex64> {
    if realization.amplitudes.len() != source.n_emitters() {
        return Err(Error::argument(
            "realization and source have different emitter counts",
        ));
    }
    let w = layout.weights(source, arm, x_d, analyzer, IntensityKind::Projected)?;
    Ok(w[0]
        .iter()
        .zip(&realization.amplitudes)
        .map(|(w, a)| w * a)
        .sum())
}

/// How the standard error of each grid value is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StderrMethod {
    /// Delta method on the per-realization influence
    /// `(I_C − μ_C)(I_T − μ_T) − cov`, with `n − 1` degrees of freedom.
    #[default]
    Influence,
    /// Spread of the per-batch estimates.
    BatchMeans,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    pub n_realizations: usize,
    pub seed: u64,
    pub batches: usize,
    pub stderr: StderrMethod,
    pub intensity: IntensityKind,
    pub convention: BsConvention,
    pub execution: Execution,
    pub closed_paths: Vec<PathLabel>,
}

impl EstimateOptions {
    pub fn new(n_realizations: usize, seed: u64) -> Self {
        Self {
            n_realizations,
            seed,
            batches: DEFAULT_BATCHES,
            stderr: StderrMethod::default(),
            intensity: IntensityKind::default(),
            convention: BsConvention::default(),
            execution: Execution::default(),
            closed_paths: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEstimate {
    /// Normalized `⟨ΔI_C ΔI_T⟩` with standard errors.
    pub pattern: CorrelationPattern,
    pub n_realizations: usize,
    pub stderr: Vec<f64>,
    /// Batch-means standard error, whichever method fills `stderr`.
    pub batch_stderr: Vec<f64>,
    /// Unnormalized covariance.
    pub raw_covariance: Vec<f64>,
    /// `⟨I_C⟩` and `⟨I_T⟩` in units of `n̄·N·|κ_d|²`.
    pub mean_intensity_c: Vec<f64>,
    pub mean_intensity_t: Vec<f64>,
    /// `(n̄·N·|κ_C|·|κ_T|)²`, the divisor taking raw covariances to the
    /// closed-form normalization.
    pub reference_scale: f64,
}

/// Shifted moment sums of `(X, Y) = (I_C − s_C, I_T − s_T)` at one grid point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: f64,
    x: f64,
    y: f64,
    xy: f64,
    xx: f64,
    yy: f64,
    xxy: f64,
    xyy: f64,
    xxyy: f64,
}

impl Moments {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        self.x += x;
        self.y += y;
        self.xy += x * y;
        self.xx += x * x;
        self.yy += y * y;
        self.xxy += x * x * y;
        self.xyy += x * y * y;
        self.xxyy += x * x * y * y;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.x += o.x;
        self.y += o.y;
        self.xy += o.xy;
        self.xx += o.xx;
        self.yy += o.yy;
        self.xxy += o.xxy;
        self.xyy += o.xyy;
        self.xxyy += o.xxyy;
    }

    /// Unbiased sample covariance.
    fn covariance(&self) -> f64 {
        (self.xy - self.x * self.y / self.n) / (self.n - 1.0)
    }

    /// Standard error of the covariance from the influence function.
    fn influence_stderr(&self) -> f64 {
        let n = self.n;
        let (a, b) = (self.x / n, self.y / n);
        let e = |s: f64| s / n;
        let fourth = e(self.xxyy) - 2.0 * b * e(self.xxy) + b * b * e(self.xx)
            - 2.0 * a * e(self.xyy)
            + 4.0 * a * b * e(self.xy)
            - 2.0 * a * b * b * e(self.x)
            + a * a * e(self.yy)
            - 2.0 * a * a * b * e(self.y)
            + a * a * b * b;
        let cov = e(self.xy) - a * b;
        ((fourth - cov * cov).max(0.0) / (n - 1.0)).sqrt()
    }
}

/// Detector positions of one arm, deduplicated, plus the index of each grid
/// point into them.
fn unique_positions(xs: impl Iterator<Item = f64>) -> (Vec<f64>, Vec<usize>) {
    let mut seen = std::collections::HashMap::new();
    let mut unique = Vec::new();
    let index = xs
        .map(|x| {
            *seen.entry(x.to_bits()).or_insert_with(|| {
                unique.push(x);
                unique.len() - 1
            })
        })
        .collect();
    (unique, index)
}

struct ArmWeights {
    /// `[position][channel]` rows of emitter weights.
    rows: Vec<Vec<Vec<Complex64>>>,
    /// Exact ensemble mean of the intensity at each position.
    expected: Vec<f64>,
}

impl ArmWeights {
    fn build(
        layout: &Layout,
        source: &SourceModel,
        arm: Arm,
        positions: &[f64],
        analyzer: Option<f64>,
        opts: &EstimateOptions,
        exec: Execution,
    ) -> Result<Self> {
        let rows = exec
            .map(positions, |&x| {
                layout.weights(source, arm, x, analyzer, opts.intensity)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let expected = rows
            .iter()
            .map(|chs| {
                source.mean_photon_number * chs.iter().flatten().map(|w| w.norm_sqr()).sum::<f64>()
            })
            .collect();
        Ok(Self { rows, expected })
    }

    fn intensities(&self, alpha: &[Complex64], out: &mut [f64]) {
        for (o, chs) in out.iter_mut().zip(&self.rows) {
            *o = chs
                .iter()
                .map(|w| {
                    w.iter()
                        .zip(alpha)
                        .map(|(w, a)| w * a)
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum();
        }
    }
}

/// Monte-Carlo estimate of the normalized `⟨ΔI_C ΔI_T⟩` on a grid.
///
/// For polarized setups `angles` fixes both preparation plates and analyzers.
pub fn estimate_dn_corr(
    source: &SourceModel,
    geometry: Geometry,
    angles: Option<GateAngles>,
    grid: &[GridPoint],
    opts: &EstimateOptions,
) -> Result<EnsembleEstimate> {
    let n = opts.n_realizations;
    if n < MIN_REALIZATIONS {
        return Err(Error::argument(format!(
            "n_realizations must be at least {MIN_REALIZATIONS}, got {n}"
        )));
    }
    if opts.batches < 2 || opts.batches > n {
        return Err(Error::argument(format!(
            "batches must lie in [2, n_realizations], got {}",
            opts.batches
        )));
    }
    if grid.is_empty() {
        return Err(Error::argument("empty grid"));
    }
    let layout = Layout::new(geometry, angles, opts.convention, &opts.closed_paths)?;
    let polarized = geometry.is_polarized();
    let analyzer = |theta: f64| polarized.then_some(theta);
    let analyzer_c = analyzer(angles.map_or(0.0, |a| a.theta_c));
    let analyzer_t = analyzer(angles.map_or(0.0, |a| a.theta_t));

    let (pos_c, idx_c) = unique_positions(grid.iter().map(|p| p.x_c));
    let (pos_t, idx_t) = unique_positions(grid.iter().map(|p| p.x_t));
    let exec = opts.execution;
    let wc = ArmWeights::build(
        &layout,
        source,
        Arm::Control,
        &pos_c,
        analyzer_c,
        opts,
        exec,
    )?;
    let wt = ArmWeights::build(&layout, source, Arm::Target, &pos_t, analyzer_t, opts, exec)?;

    // Work units never straddle a batch boundary.
    let mut units = Vec::new();
    for b in 0..opts.batches {
        let (lo, hi) = (b * n / opts.batches, (b + 1) * n / opts.batches);
        let mut s = lo;
        while s < hi {
            let e = (s + UNIT).min(hi);
            units.push((b, s, e));
            s = e;
        }
    }

    let partials = exec.map(&units, |&(_, lo, hi)| {
        let mut moments = vec![Moments::default(); grid.len()];
        let mut alpha = vec![Complex64::new(0.0, 0.0); source.n_emitters()];
        let mut ic = vec![0.0; pos_c.len()];
        let mut it = vec![0.0; pos_t.len()];
        for r in lo..hi {
            fill_amplitudes(opts.seed, r as u64, source.mean_photon_number, &mut alpha);
            wc.intensities(&alpha, &mut ic);
            wt.intensities(&alpha, &mut it);
            for (g, m) in moments.iter_mut().enumerate() {
                let (c, t) = (idx_c[g], idx_t[g]);
                m.push(ic[c] - wc.expected[c], it[t] - wt.expected[t]);
            }
        }
        moments
    });

    let mut batches = vec![vec![Moments::default(); grid.len()]; opts.batches];
    for (&(b, _, _), part) in units.iter().zip(&partials) {
        for (acc, m) in batches[b].iter_mut().zip(part) {
            acc.merge(m);
        }
    }
    let mut total = vec![Moments::default(); grid.len()];
    for batch in &batches {
        for (acc, m) in total.iter_mut().zip(batch) {
            acc.merge(m);
        }
    }

    let nbar_n = source.mean_photon_number * source.n_emitters() as f64;
    let (kc, kt) = (
        layout.arm_scale(Arm::Control),
        layout.arm_scale(Arm::Target),
    );
    let reference_scale = (nbar_n * kc * kt).powi(2);

    let raw_covariance: Vec<f64> = total.iter().map(Moments::covariance).collect();
    let values: Vec<f64> = raw_covariance.iter().map(|c| c / reference_scale).collect();
    let influence: Vec<f64> = total
        .iter()
        .map(|m| m.influence_stderr() / reference_scale)
        .collect();
    let nb = opts.batches as f64;
    let batch_stderr: Vec<f64> = (0..grid.len())
        .map(|g| {
            let covs: Vec<f64> = batches
                .iter()
                .map(|b| b[g].covariance() / reference_scale)
                .collect();
            let mean = covs.iter().sum::<f64>() / nb;
            let var = covs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (nb - 1.0);
            (var / nb).sqrt()
        })
        .collect();
    let stderr = match opts.stderr {
        StderrMethod::Influence => influence,
        StderrMethod::BatchMeans => batch_stderr.clone(),
    };
    let mean = |m: &Moments, expected: f64, k: f64| (m.x / m.n + expected) / (nbar_n * k * k);
    let mean_intensity_c = total
        .iter()
        .zip(&idx_c)
        .map(|(m, &c)| mean(m, wc.expected[c], kc))
        .collect();
    let mean_intensity_t = total
        .iter()
        .zip(&idx_t)
        .map(|(m, &t)| mean(m, wt.expected[t], kt))
        .collect();

    Ok(EnsembleEstimate {
        pattern: CorrelationPattern {
            grid: grid.to_vec(),
            values,
            mode: PatternMode::MonteCarlo,
            stderr: Some(stderr.clone()),
        },
        n_realizations: n,
        stderr,
        batch_stderr,
        raw_covariance,
        mean_intensity_c,
        mean_intensity_t,
        reference_scale,
    })
}

/// Differences below this (relative to the reference peak) are rounding
/// noise, e.g. a field blocked exactly by a crossed analyzer.
const NUMERIC_ZERO: f64 = 1e-12;

/// Agreement metrics between a reference pattern and an estimate carrying
/// standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// RMS difference over the reference peak.
    pub nrmse: f64,
    pub pearson: f64,
    /// Largest `|reference − estimate|/stderr`.
    pub max_sigma_dev: f64,
}

pub fn compare_patterns(
    reference: &CorrelationPattern,
    estimate: &CorrelationPattern,
) -> Result<Comparison> {
    if reference.grid != estimate.grid {
        return Err(Error::argument("patterns are sampled on different grids"));
    }
    let stderr = estimate
        .stderr
        .as_ref()
        .ok_or_else(|| Error::argument("estimate carries no standard errors"))?;
    let (a, m) = (&reference.values, &estimate.values);
    let len = a.len() as f64;
    let peak = a.iter().fold(0.0f64, |p, v| p.max(v.abs()));
    let zero = NUMERIC_ZERO * peak.max(1.0);
    let rms = (a.iter().zip(m).map(|(a, m)| (a - m).powi(2)).sum::<f64>() / len).sqrt();
    let max_sigma_dev = a
        .iter()
        .zip(m)
        .zip(stderr)
        .map(|((a, m), s)| {
            let d = (a - m).abs();
            if d <= zero {
                0.0
            } else {
                d / s
            }
        })
        .fold(0.0, f64::max);
    Ok(Comparison {
        nrmse: rms / peak,
        pearson: pearson(a, m),
        max_sigma_dev,
    })
}

/// Pearson correlation coefficient; NaN when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
