//! Symbolic block propagation matrices of the two gate interferometers.
//!
//! Every stage (source → beam splitter, beam splitter, free flight to the
//! plates, plates, plates → detectors) is a 2×2 block operator over the arms
//! `(C, T)` and source ports `(S, S′)`. Each block entry is a sum of terms
//! `coeff · Jones · g{segment}…g{segment}`; multiplying stages concatenates
//! the Green's-function segments, and the composition property
//! `g{a,b}·g{b,x} = g{a,x}` collapses each chain to one factor
//! `g_p{κ; s, x_d}` labelled by source port, path and arm.

use std::fmt;
use std::ops::Mul;

use crate::gate::GateAngles;
use crate::phys::{BsConvention, Complex64, JonesMatrix, JonesVector};
use crate::setup::{Arm, Geometry, PathLabel};

/// Beam-splitter input port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    /// The chaotic source.
    S,
    /// The unused port, in the vacuum state.
    SPrime,
}

impl Port {
    pub const BOTH: [Port; 2] = [Port::S, Port::SPrime];

    pub fn index(self) -> usize {
        match self {
            Port::S => 0,
            Port::SPrime => 1,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::S => "S",
            Port::SPrime => "S'",
        })
    }
}

/// End points of free-space segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Source(Port),
    BeamSplitter,
    Plate(Arm),
    /// A pinhole, or one path of a Mach-Zehnder arm.
    Path(PathLabel),
    Detector(Arm),
}

/// Symbolic Green's function `g{κ; from, to}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub from: Node,
    pub to: Node,
}

impl Segment {
    pub const fn new(from: Node, to: Node) -> Self {
        Self { from, to }
    }
}

/// One summand of a block entry. Segments are listed in propagation order.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub jones: JonesMatrix,
    pub segments: Vec<Segment>,
}

impl Term {
    fn new(coeff: Complex64, jones: JonesMatrix, segments: Vec<Segment>) -> Self {
        Self {
            coeff,
            jones,
            segments,
        }
    }

    /// `self` applied after `first`.
    fn after(&self, first: &Term) -> Term {
        let mut segments = first.segments.clone();
        segments.extend_from_slice(&self.segments);
        Term::new(self.coeff * first.coeff, self.jones * first.jones, segments)
    }
}

/// Block operator with rows indexed by output and columns by input.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicOp {
    pub blocks: [[Vec<Term>; 2]; 2],
}

impl SymbolicOp {
    fn diagonal(first: Vec<Term>, second: Vec<Term>) -> Self {
        Self {
            blocks: [[first, Vec::new()], [Vec::new(), second]],
        }
    }
}

impl Mul for &SymbolicOp {
    type Output = SymbolicOp;

    fn mul(self, rhs: &SymbolicOp) -> SymbolicOp {
        let mut blocks: [[Vec<Term>; 2]; 2] = Default::default();
        for (r, row) in blocks.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                for k in 0..2 {
                    for a in &self.blocks[r][k] {
                        for b in &rhs.blocks[k][c] {
                            entry.push(a.after(b));
                        }
                    }
                }
            }
        }
        SymbolicOp { blocks }
    }
}

/// Collapsed Green's function `g_p{κ; s, x_d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GreenFactor {
    pub source: Port,
    pub path: PathLabel,
    pub arm: Arm,
}

impl fmt::Display for GreenFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.arm {
            Arm::Control => "x_C",
            Arm::Target => "x_T",
        };
        write!(f, "g_{}{{k; {}, {}}}", self.path, self.source, d)
    }
}

/// Collapses a contiguous chain `source → … → path → … → detector`.
fn collapse(segments: &[Segment]) -> GreenFactor {
    let first = segments.first().expect("empty propagation chain");
    let last = segments.last().unwrap();
    for w in segments.windows(2) {
        assert_eq!(w[0].to, w[1].from, "discontinuous propagation chain");
    }
    let source = match first.from {
        Node::Source(p) => p,
        other => panic!("chain starts at {other:?}, not at a source"),
    };
    let arm = match last.to {
        Node::Detector(a) => a,
        other => panic!("chain ends at {other:?}, not at a detector"),
    };
    let mut paths = segments.iter().filter_map(|s| match s.to {
        Node::Path(p) => Some(p),
        _ => None,
    });
    let path = paths.next().expect("chain crosses no mask path");
    assert!(paths.next().is_none(), "chain crosses two mask paths");
    assert_eq!(path.arm(), arm, "path and detector in different arms");
    GreenFactor { source, path, arm }
}

/// One collapsed summand: the Jones factor (scalar prefactor included) of a
/// Green's function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTerm {
    pub green: GreenFactor,
    pub jones: JonesMatrix,
}

/// Composed propagation from `(S, S′)` to `(x_C, x_T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    pub kappa: f64,
    /// `entries[arm][port]`.
    pub entries: [[Vec<PathTerm>; 2]; 2],
}

impl BlockMatrix {
    /// Total Jones factor multiplying `g_p{κ; port, x_d}`.
    pub fn path_jones(&self, arm: Arm, port: Port, path: PathLabel) -> JonesMatrix {
        self.entries[arm.index()][port.index()]
            .iter()
            .filter(|t| t.green.path == path)
            .fold(JonesMatrix::zero(), |acc, t| acc + t.jones)
    }

    /// `(cosθ, sinθ)·M_{d,s}·input`, decomposed over the two paths of the arm.
    pub fn contract(
        &self,
        arm: Arm,
        port: Port,
        analyzer: f64,
        input: JonesVector,
    ) -> [Complex64; 2] {
        let a = JonesVector::analyzer(analyzer);
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for t in &self.entries[arm.index()][port.index()] {
            out[t.green.path.slot()] += a.project(t.jones.apply(input));
        }
        out
    }

    /// Contracted amplitude with each Green's function evaluated by `green`.
    pub fn evaluate(
        &self,
        arm: Arm,
        port: Port,
        analyzer: f64,
        input: JonesVector,
        green: impl Fn(GreenFactor, f64) -> Complex64,
    ) -> Complex64 {
        let a = JonesVector::analyzer(analyzer);
        self.entries[arm.index()][port.index()]
            .iter()
            .map(|t| a.project(t.jones.apply(input)) * green(t.green, self.kappa))
            .sum()
    }
}

/// Which interferometer to compose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkKind {
    /// Pinhole masks with polarizers and a flip plate.
    Pinhole,
    /// Tilted-mirror Mach-Zehnder arms.
    MachZehnder,
}

impl NetworkKind {
    pub fn of(geometry: &Geometry) -> Option<Self> {
        match geometry {
            Geometry::Gate(_) => Some(NetworkKind::Pinhole),
            Geometry::Mz(_) => Some(NetworkKind::MachZehnder),
            _ => None,
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn free(from: Node, to: Node) -> Term {
    Term::new(
        c(1.0, 0.0),
        JonesMatrix::identity(),
        vec![Segment::new(from, to)],
    )
}

fn to_detector(coeff: Complex64, jones: JonesMatrix, path: PathLabel) -> Term {
    let arm = path.arm();
    Term::new(
        coeff,
        jones,
        vec![
            Segment::new(Node::Plate(arm), Node::Path(path)),
            Segment::new(Node::Path(path), Node::Detector(arm)),
        ],
    )
}

/// Stage from the preparation plates to the detectors.
fn output_stage(kind: NetworkKind) -> SymbolicOp {
    let one = c(1.0, 0.0);
    match kind {
        NetworkKind::Pinhole => SymbolicOp::diagonal(
            vec![
                to_detector(one, JonesMatrix::polarizer_h(), PathLabel::C1),
                to_detector(one, JonesMatrix::polarizer_v(), PathLabel::C2),
            ],
            vec![
                to_detector(one, JonesMatrix::identity(), PathLabel::T1),
                to_detector(one, JonesMatrix::flip(), PathLabel::T2),
            ],
        ),
        NetworkKind::MachZehnder => SymbolicOp::diagonal(
            vec![
                to_detector(c(0.0, 1.0), JonesMatrix::polarizer_h(), PathLabel::C1),
                to_detector(c(0.0, -1.0), JonesMatrix::polarizer_v(), PathLabel::C2),
            ],
            vec![
                to_detector(c(0.0, 0.5), JonesMatrix::identity(), PathLabel::T1),
                to_detector(c(0.0, -0.5), JonesMatrix::flip(), PathLabel::T2),
            ],
        ),
    }
}

/// Stages from the sources to the preparation plates, in application order.
fn preparation_stages(angles: GateAngles, convention: BsConvention) -> [SymbolicOp; 4] {
    let initial = SymbolicOp::diagonal(
        vec![free(Node::Source(Port::S), Node::BeamSplitter)],
        vec![free(Node::Source(Port::SPrime), Node::BeamSplitter)],
    );
    let mut bs: [[Vec<Term>; 2]; 2] = Default::default();
    for (arm, row) in bs.iter_mut().enumerate() {
        for (port, entry) in row.iter_mut().enumerate() {
            entry.push(Term::new(
                convention.amplitude(arm, port),
                JonesMatrix::identity(),
                Vec::new(),
            ));
        }
    }
    let flight = SymbolicOp::diagonal(
        vec![free(Node::BeamSplitter, Node::Plate(Arm::Control))],
        vec![free(Node::BeamSplitter, Node::Plate(Arm::Target))],
    );
    let plate = |phi| {
        vec![Term::new(
            c(1.0, 0.0),
            JonesMatrix::rotation(phi),
            Vec::new(),
        )]
    };
    let plates = SymbolicOp::diagonal(plate(angles.phi_c), plate(angles.phi_t));
    [initial, SymbolicOp { blocks: bs }, flight, plates]
}

/// Composes the full interferometer symbolically and collapses every Green's
/// chain to a single `g_p{κ; s, x_d}`.
pub fn compose_network(
    kind: NetworkKind,
    angles: GateAngles,
    kappa: f64,
    convention: BsConvention,
) -> BlockMatrix {
    let total = compose_symbolic(kind, angles, convention);
    let mut entries: [[Vec<PathTerm>; 2]; 2] = Default::default();
    for (r, row) in total.blocks.iter().enumerate() {
        for (c, terms) in row.iter().enumerate() {
            entries[r][c] = terms
                .iter()
                .map(|t| PathTerm {
                    green: collapse(&t.segments),
                    jones: t.jones.scale(t.coeff),
                })
                .collect();
        }
    }
    BlockMatrix { kappa, entries }
}

/// Uncollapsed product `P₂·ℛ·P₁·BS·P_ini` with all segments kept.
pub fn compose_symbolic(
    kind: NetworkKind,
    angles: GateAngles,
    convention: BsConvention,
) -> SymbolicOp {
    let [initial, bs, flight, plates] = preparation_stages(angles, convention);
    let prep = &(&(&plates * &flight) * &bs) * &initial;
    &output_stage(kind) * &prep
}
