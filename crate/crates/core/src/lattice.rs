//! Honeycomb lattices clipped to circular sectors of opening angle `π/n`.
//!
//! All lengths are in units of the graphene lattice constant `a`. The sector
//! frame has its apex at the origin, the first straight edge along `+x` and
//! the second straight edge along the direction `α = π/n`.
//!
//! Sites are always stored in canonical order: ascending distance from the
//! apex, ties broken by ascending polar angle and then by lattice cell. This
//! makes construction deterministic and gives tip removal a natural order.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{atan2, ceil, cos, floor, round, sin, sqrt, SQRT_3};

/// Graphene lattice constant in Ångström.
pub const LATTICE_CONSTANT_ANGSTROM: f64 = 2.46;
/// Nearest-neighbour (carbon-carbon) distance in units of `a`.
pub const NN_DISTANCE: f64 = 0.577_350_269_189_625_8;

const EPS: f64 = 1e-9;
/// Sites closer than this to the apex are tagged [`EdgeTag::Tip`].
const TIP_RADIUS: f64 = 1.5;
/// Boundary sites within this distance of the arc are tagged [`EdgeTag::Arc`].
const ARC_BAND: f64 = 1.0;
/// Fraction of the radius that counts as the tip region for atom removal.
const TIP_REGION_FRACTION: f64 = 0.25;
const MIN_SITES: usize = 6;

/// Which termination the straight edge at `φ = 0` should have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    ZigzagFirstEdge,
    ArmchairFirstEdge,
}

/// One of the two straight edges of the sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    /// The edge along `φ = 0`.
    First,
    /// The edge along `φ = α`.
    Second,
}

/// How large the sector should be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SectorSize {
    /// Approximate number of atoms; the radius is chosen so the final
    /// count is as close as possible.
    TargetSize(usize),
    /// Sector radius in units of `a`.
    Radius(f64),
}

/// Structural modification applied after the perfect cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Perturbation {
    RemoveEdgeRow(Edge),
    AddEdgeRow(Edge),
    RemoveTipAtoms(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorSpec {
    /// Sector angle is `π / n`.
    pub n: u32,
    pub size: SectorSize,
    pub orientation: Orientation,
    pub perturbations: Vec<Perturbation>,
}

impl SectorSpec {
    pub fn with_target(n: u32, target: usize, orientation: Orientation) -> Self {
        SectorSpec { n, size: SectorSize::TargetSize(target), orientation, perturbations: Vec::new() }
    }

    pub fn with_radius(n: u32, radius: f64, orientation: Orientation) -> Self {
        SectorSpec { n, size: SectorSize::Radius(radius), orientation, perturbations: Vec::new() }
    }

    pub fn perturbed(mut self, p: Perturbation) -> Self {
        self.perturbations.push(p);
        self
    }

    pub fn alpha(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        match self.size {
            SectorSize::TargetSize(0) => return Err(Error::InvalidSpec("target_size must be positive".into())),
            SectorSize::Radius(r) if !(r.is_finite() && r > 0.0) => {
                return Err(Error::InvalidSpec(format!("radius must be positive and finite, got {r}")))
            }
            _ => {}
        }
        for p in &self.perturbations {
            if let Perturbation::RemoveTipAtoms(0) = p {
                return Err(Error::InvalidSpec("RemoveTipAtoms count must be at least 1".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sublattice {
    A,
    B,
}

impl Sublattice {
    /// `+1` on A, `-1` on B.
    pub fn sign(self) -> f64 {
        match self {
            Sublattice::A => 1.0,
            Sublattice::B => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    Interior,
    Zigzag,
    Armchair,
    MixedStraight,
    Arc,
    Tip,
}

/// Integer honeycomb coordinates: `(i, j)` unit cell and sublattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Cell {
    i: i32,
    j: i32,
    sub: Sublattice,
}

impl Cell {
    /// Position in the zigzag frame: `a1 = (1, 0)`, `a2 = (1/2, √3/2)`,
    /// B displaced by `(1/2, 1/(2√3))`.
    fn zigzag_position(self) -> [f64; 2] {
        let (i, j) = (self.i as f64, self.j as f64);
        let s = match self.sub {
            Sublattice::A => 0.0,
            Sublattice::B => 1.0,
        };
        [i + 0.5 * j + 0.5 * s, 0.5 * SQRT_3 * j + s / (2.0 * SQRT_3)]
    }

    fn nn(self) -> [Cell; 3] {
        let Cell { i, j, sub } = self;
        match sub {
            Sublattice::A => {
                let b = Sublattice::B;
                [Cell { i, j, sub: b }, Cell { i: i - 1, j, sub: b }, Cell { i, j: j - 1, sub: b }]
            }
            Sublattice::B => {
                let a = Sublattice::A;
                [Cell { i, j, sub: a }, Cell { i: i + 1, j, sub: a }, Cell { i, j: j + 1, sub: a }]
            }
        }
    }

    fn nnn(self) -> [Cell; 6] {
        let Cell { i, j, sub } = self;
        [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)].map(|(di, dj)| Cell { i: i + di, j: j + dj, sub })
    }
}

/// Maps lattice cells to the sector frame.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Frame {
    orientation: Orientation,
    alpha: f64,
}

impl Frame {
    /// Apex in the zigzag frame: an A atom for zigzag-first cuts, a hexagon
    /// centre for armchair-first cuts.
    fn apex(&self) -> [f64; 2] {
        match self.orientation {
            Orientation::ZigzagFirstEdge => [0.0, 0.0],
            Orientation::ArmchairFirstEdge => [0.5, -1.0 / (2.0 * SQRT_3)],
        }
    }

    fn to_sector(self, p: [f64; 2]) -> [f64; 2] {
        let c = self.apex();
        let (x, y) = (p[0] - c[0], p[1] - c[1]);
        match self.orientation {
            Orientation::ZigzagFirstEdge => [x, y],
            // rotate by -90 degrees so the armchair direction lies along +x
            Orientation::ArmchairFirstEdge => [y, -x],
        }
    }

    fn to_zigzag(self, q: [f64; 2]) -> [f64; 2] {
        let c = self.apex();
        match self.orientation {
            Orientation::ZigzagFirstEdge => [q[0] + c[0], q[1] + c[1]],
            Orientation::ArmchairFirstEdge => [-q[1] + c[0], q[0] + c[1]],
        }
    }

    fn position(&self, cell: Cell) -> [f64; 2] {
        self.to_sector(cell.zigzag_position())
    }

    /// Signed distance to an edge line, positive on the inside of the sector.
    fn edge_distance(&self, p: [f64; 2], edge: Edge) -> f64 {
        match edge {
            Edge::First => p[1],
            Edge::Second => sin(self.alpha) * p[0] - cos(self.alpha) * p[1],
        }
    }

    fn inside_wedge(&self, p: [f64; 2]) -> bool {
        self.edge_distance(p, Edge::First) >= -EPS && self.edge_distance(p, Edge::Second) >= -EPS
    }

    /// All cells whose sector-frame position is within `radius` of the apex
    /// and passes `keep`.
    fn cells_within(&self, radius: f64, mut keep: impl FnMut([f64; 2]) -> bool) -> Vec<Cell> {
        let c = self.apex();
        let reach = radius + 2.0;
        let jmax = ceil(reach / (0.5 * SQRT_3)) as i32 + 1;
        let mut out = Vec::new();
        for j in -jmax..=jmax {
            let xc = c[0] - 0.5 * j as f64;
            let ilo = floor(xc - reach) as i32 - 1;
            let ihi = ceil(xc + reach) as i32 + 1;
            for i in ilo..=ihi {
                for sub in [Sublattice::A, Sublattice::B] {
                    let cell = Cell { i, j, sub };
                    let p = self.position(cell);
                    if p[0] * p[0] + p[1] * p[1] <= (radius + EPS) * (radius + EPS) && keep(p) {
                        out.push(cell);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSite {
    pub index: usize,
    /// Sector-frame position in units of `a`.
    pub position: [f64; 2],
    pub sublattice: Sublattice,
    pub boundary: bool,
    pub edge_tag: EdgeTag,
}

impl LatticeSite {
    pub fn rho(&self) -> f64 {
        sqrt(self.position[0] * self.position[0] + self.position[1] * self.position[1])
    }

    pub fn phi(&self) -> f64 {
        atan2(self.position[1], self.position[0])
    }
}

/// A finite honeycomb flake cut to a circular sector.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    sites: Vec<LatticeSite>,
    cells: Vec<Cell>,
    nn: Vec<Vec<usize>>,
    nnn: Vec<Vec<usize>>,
    frame: Frame,
    n_sector: u32,
    radius: f64,
    l0: f64,
}

impl Lattice {
    pub fn sites(&self) -> &[LatticeSite] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn nn(&self) -> &[Vec<usize>] {
        &self.nn
    }

    pub fn nnn(&self) -> &[Vec<usize>] {
        &self.nnn
    }

    pub fn alpha(&self) -> f64 {
        self.frame.alpha
    }

    pub fn n_sector(&self) -> u32 {
        self.n_sector
    }

    pub fn orientation(&self) -> Orientation {
        self.frame.orientation
    }

    /// Radius of the cut in units of `a`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Dimensionless radius `L0 = sqrt(√3 N / (2α))`.
    pub fn l0(&self) -> f64 {
        self.l0
    }

    /// Iterator over nearest-neighbour bonds `(i, j)` with `i < j`.
    pub fn nn_bonds(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nn.iter().enumerate().flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Iterator over next-nearest-neighbour bonds `(i, j)` with `i < j`.
    pub fn nnn_bonds(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nnn.iter().enumerate().flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn edge_distance(&self, site: usize, edge: Edge) -> f64 {
        self.frame.edge_distance(self.sites[site].position, edge)
    }

    pub fn components(&self) -> usize {
        count_components(&self.nn)
    }

    fn from_cells(mut cells: Vec<Cell>, frame: Frame, n_sector: u32, radius: f64) -> Lattice {
        let key = |c: &Cell| {
            let p = frame.position(*c);
            (sqrt(p[0] * p[0] + p[1] * p[1]), atan2(p[1], p[0]))
        };
        cells.sort_by(|a, b| {
            let (ra, pa) = key(a);
            let (rb, pb) = key(b);
            // positions are exact up to rounding; compare on a fine grid
            let qa = (round(ra * 1e9) as i64, round(pa * 1e9) as i64);
            let qb = (round(rb * 1e9) as i64, round(pb * 1e9) as i64);
            qa.cmp(&qb).then_with(|| a.cmp(b))
        });
        let index: BTreeMap<Cell, usize> = cells.iter().enumerate().map(|(k, c)| (*c, k)).collect();
        let nn: Vec<Vec<usize>> = cells
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c.nn().iter().filter_map(|d| index.get(d).copied()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let nnn: Vec<Vec<usize>> = cells
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c.nnn().iter().filter_map(|d| index.get(d).copied()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let alpha = frame.alpha;
        let sites = cells
            .iter()
            .enumerate()
            .map(|(k, c)| LatticeSite {
                index: k,
                position: frame.position(*c),
                sublattice: c.sub,
                boundary: nn[k].len() < 3,
                edge_tag: EdgeTag::Interior,
            })
            .collect();
        let n = cells.len();
        let mut lat = Lattice { sites, cells, nn, nnn, frame, n_sector, radius, l0: l0_for(n, alpha) };
        classify_in_place(&mut lat);
        lat
    }
}

/// `L0 = sqrt(√3 N / (2α))`.
pub fn l0_for(n_sites: usize, alpha: f64) -> f64 {
    sqrt(SQRT_3 * n_sites as f64 / (2.0 * alpha))
}

fn count_components(adj: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    count
}

/// Candidate cells with precomputed neighbour indices, used to evaluate
/// many radii cheaply.
struct Candidates {
    cells: Vec<Cell>,
    rho: Vec<f64>,
    nn: Vec<Vec<usize>>,
}

impl Candidates {
    fn new(frame: &Frame, radius: f64) -> Candidates {
        let mut cells = frame.cells_within(radius, |p| frame.inside_wedge(p));
        let rho_of = |c: &Cell| {
            let p = frame.position(*c);
            sqrt(p[0] * p[0] + p[1] * p[1])
        };
        cells.sort_by(|a, b| rho_of(a).partial_cmp(&rho_of(b)).unwrap_or(Ordering::Equal).then_with(|| a.cmp(b)));
        let rho: Vec<f64> = cells.iter().map(rho_of).collect();
        let index: BTreeMap<Cell, usize> = cells.iter().enumerate().map(|(k, c)| (*c, k)).collect();
        let nn = cells.iter().map(|c| c.nn().iter().filter_map(|d| index.get(d).copied()).collect()).collect();
        Candidates { cells, rho, nn }
    }

    /// Keep the first `prefix` candidates, prune dangling atoms and return
    /// the largest connected component.
    fn keep(&self, prefix: usize) -> Vec<usize> {
        let alive: Vec<bool> = (0..self.cells.len()).map(|k| k < prefix).collect();
        prune_and_select(&self.nn, alive)
    }
}

/// Iteratively removes sites with fewer than two live neighbours, then
/// returns the largest remaining connected component (sorted indices).
fn prune_and_select(adj: &[Vec<usize>], mut alive: Vec<bool>) -> Vec<usize> {
    let n = adj.len();
    let mut degree: Vec<usize> = (0..n).map(|u| if alive[u] { adj[u].iter().filter(|&&v| alive[v]).count() } else { 0 }).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&u| alive[u] && degree[u] <= 1).collect();
    while let Some(u) = stack.pop() {
        if !alive[u] {
            continue;
        }
        alive[u] = false;
        for &v in &adj[u] {
            if alive[v] {
                degree[v] -= 1;
                if degree[v] == 1 {
                    stack.push(v);
                }
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut best: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if !alive[s] || comp[s] != usize::MAX {
            continue;
        }
        let mut members = vec![s];
        comp[s] = s;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if alive[v] && comp[v] == usize::MAX {
                    comp[v] = s;
                    members.push(v);
                    queue.push_back(v);
                }
            }
        }
        if members.len() > best.len() {
            best = members;
        }
    }
    best.sort_unstable();
    best
}

/// Builds the sector lattice described by `spec`, including its perturbations.
pub fn build_sector(spec: &SectorSpec) -> Result<Lattice> {
    spec.validate()?;
    let frame = Frame { orientation: spec.orientation, alpha: spec.alpha() };
    let (cells, radius) = match spec.size {
        SectorSize::Radius(r) => {
            let cand = Candidates::new(&frame, r);
            let kept = cand.keep(cand.cells.len());
            (kept.iter().map(|&k| cand.cells[k]).collect::<Vec<_>>(), r)
        }
        SectorSize::TargetSize(target) => cut_to_target(&frame, target)?,
    };
    if cells.len() < MIN_SITES {
        return Err(Error::TooSmall(cells.len()));
    }
    let mut lat = Lattice::from_cells(cells, frame, spec.n, radius);
    for p in &spec.perturbations {
        lat = apply_perturbation(&lat, *p)?;
    }
    Ok(lat)
}

/// Chooses the radius (one of the candidate shell radii) whose cut has a
/// site count closest to `target`.
fn cut_to_target(frame: &Frame, target: usize) -> Result<(Vec<Cell>, f64)> {
    let r0 = l0_for(target, frame.alpha);
    let mut r_max = 1.3 * r0 + 4.0;
    let cand = loop {
        let cand = Candidates::new(frame, r_max);
        if cand.keep(cand.cells.len()).len() >= target || r_max > 1e6 {
            break cand;
        }
        r_max *= 1.5;
    };
    // prefixes must contain whole shells of equal radius
    let mut shell_ends: Vec<usize> = Vec::new();
    for k in 0..cand.rho.len() {
        if k + 1 == cand.rho.len() || cand.rho[k + 1] - cand.rho[k] > EPS {
            shell_ends.push(k + 1);
        }
    }
    let (mut lo, mut hi) = (0usize, shell_ends.len() - 1);
    if cand.keep(shell_ends[hi]).len() < target {
        let kept = cand.keep(shell_ends[hi]);
        return Ok((kept.iter().map(|&k| cand.cells[k]).collect(), cand.rho[shell_ends[hi] - 1]));
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if cand.keep(shell_ends[mid]).len() >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut pick = lo;
    if lo > 0 {
        let above = cand.keep(shell_ends[lo]).len() - target;
        let below = target - cand.keep(shell_ends[lo - 1]).len();
        if below < above {
            pick = lo - 1;
        }
    }
    let kept = cand.keep(shell_ends[pick]);
    if kept.len() < MIN_SITES {
        return Err(Error::TooSmall(kept.len()));
    }
    Ok((kept.iter().map(|&k| cand.cells[k]).collect(), cand.rho[shell_ends[pick] - 1]))
}

/// Which straight edge a boundary site belongs to, if any.
fn nearest_edge(frame: &Frame, p: [f64; 2]) -> (Edge, f64) {
    let d1 = frame.edge_distance(p, Edge::First).abs();
    let d2 = frame.edge_distance(p, Edge::Second).abs();
    if d1 <= d2 {
        (Edge::First, d1)
    } else {
        (Edge::Second, d2)
    }
}

fn classify_in_place(lat: &mut Lattice) {
    let n = lat.sites.len();
    let degree: Vec<usize> = lat.nn.iter().map(|v| v.len()).collect();
    for k in 0..n {
        let p = lat.sites[k].position;
        let rho = sqrt(p[0] * p[0] + p[1] * p[1]);
        let boundary = degree[k] < 3;
        lat.sites[k].boundary = boundary;
        lat.sites[k].edge_tag = if !boundary {
            EdgeTag::Interior
        } else if rho < TIP_RADIUS {
            EdgeTag::Tip
        } else {
            let (_, dist) = nearest_edge(&lat.frame, p);
            let near_arc = rho > lat.radius - ARC_BAND && dist > 0.5;
            if near_arc || (dist > ARC_BAND.max(0.6) && rho > lat.radius - 2.0 * ARC_BAND) {
                EdgeTag::Arc
            } else {
                straight_tag(lat, k, &degree)
            }
        };
    }
}

/// Local bond geometry of a boundary atom: a zigzag atom has only
/// three-fold coordinated neighbours, an armchair atom sits in a boundary
/// dimer (exactly one two-fold coordinated partner).
fn straight_tag(lat: &Lattice, k: usize, degree: &[usize]) -> EdgeTag {
    if degree[k] < 2 {
        return EdgeTag::MixedStraight;
    }
    match lat.nn[k].iter().filter(|&&j| degree[j] < 3).count() {
        0 => EdgeTag::Zigzag,
        1 => EdgeTag::Armchair,
        _ => EdgeTag::MixedStraight,
    }
}

/// Recomputes boundary flags and edge tags from the current neighbour lists.
pub fn classify_edges(lat: &Lattice) -> Lattice {
    let mut out = lat.clone();
    classify_in_place(&mut out);
    out
}

/// Dominant termination of one straight edge (ignoring tip and arc sites).
pub fn edge_termination(lat: &Lattice, edge: Edge) -> EdgeTag {
    let (mut zig, mut arm, mut mixed) = (0usize, 0usize, 0usize);
    for s in lat.sites.iter().filter(|s| s.boundary) {
        let (e, _) = nearest_edge(&lat.frame, s.position);
        if e != edge {
            continue;
        }
        match s.edge_tag {
            EdgeTag::Zigzag => zig += 1,
            EdgeTag::Armchair => arm += 1,
            EdgeTag::MixedStraight => mixed += 1,
            _ => {}
        }
    }
    let total = zig + arm + mixed;
    if (total > 0 && mixed * 4 > total) || arm.min(zig) * 10 > arm.max(zig) {
        EdgeTag::MixedStraight
    } else if arm > zig {
        EdgeTag::Armchair
    } else {
        EdgeTag::Zigzag
    }
}

/// Applies one structural perturbation and rebuilds neighbour lists, flags,
/// `N` and `L0`.
pub fn apply_perturbation(lat: &Lattice, p: Perturbation) -> Result<Lattice> {
    let frame = lat.frame;
    let n = lat.len();
    let cells = match p {
        Perturbation::RemoveTipAtoms(count) => {
            let region = lat.sites.iter().filter(|s| s.rho() <= TIP_REGION_FRACTION * lat.radius).count();
            if count == 0 || count > region {
                return Err(Error::UnsupportedPerturbation(format!(
                    "cannot remove {count} tip atoms; tip region holds {region}"
                )));
            }
            // canonical order is (rho, phi), so the tip atoms come first
            let cells: Vec<Cell> = lat.cells[count..].to_vec();
            let probe = Lattice::from_cells(cells.clone(), frame, lat.n_sector, lat.radius);
            let comps = probe.components();
            if comps != 1 {
                return Err(Error::Disconnected { components: comps });
            }
            return Ok(probe);
        }
        Perturbation::RemoveEdgeRow(edge) => {
            let dist: Vec<f64> = (0..n).map(|k| frame.edge_distance(lat.sites[k].position, edge)).collect();
            let d_min = (0..n).filter(|&k| lat.sites[k].boundary).map(|k| dist[k]).fold(f64::INFINITY, f64::min);
            let row: Vec<bool> = (0..n).map(|k| lat.sites[k].boundary && dist[k] < d_min + 0.5 - EPS).collect();
            let alive: Vec<bool> = row.iter().map(|r| !r).collect();
            let removed_row = row.iter().filter(|&&r| r).count();
            if removed_row == 0 {
                return Err(Error::UnsupportedPerturbation("edge has no boundary row".into()));
            }
            let keep = prune_checked(&lat.nn, alive)?;
            keep.iter().map(|&k| lat.cells[k]).collect::<Vec<_>>()
        }
        Perturbation::AddEdgeRow(edge) => {
            let other = match edge {
                Edge::First => Edge::Second,
                Edge::Second => Edge::First,
            };
            let width = match edge_termination(lat, edge) {
                EdgeTag::Armchair => 0.5,
                _ => 0.5 * SQRT_3,
            };
            let d_min = lat.sites.iter().map(|s| frame.edge_distance(s.position, edge)).fold(f64::INFINITY, f64::min);
            let present: BTreeMap<Cell, usize> = lat.cells.iter().enumerate().map(|(k, c)| (*c, k)).collect();
            let added = frame.cells_within(lat.radius, |q| {
                let d = frame.edge_distance(q, edge);
                d < d_min - EPS && d >= d_min - width - EPS && frame.edge_distance(q, other) >= -EPS
            });
            let mut cells: Vec<Cell> = lat.cells.clone();
            cells.extend(added.into_iter().filter(|c| !present.contains_key(c)));
            if cells.len() == n {
                return Err(Error::UnsupportedPerturbation("no room to add a row along this edge".into()));
            }
            let index: BTreeMap<Cell, usize> = cells.iter().enumerate().map(|(k, c)| (*c, k)).collect();
            let adj: Vec<Vec<usize>> =
                cells.iter().map(|c| c.nn().iter().filter_map(|d| index.get(d).copied()).collect()).collect();
            let keep = prune_checked(&adj, vec![true; cells.len()])?;
            keep.iter().map(|&k| cells[k]).collect::<Vec<_>>()
        }
    };
    if cells.len() < MIN_SITES {
        return Err(Error::TooSmall(cells.len()));
    }
    Ok(Lattice::from_cells(cells, frame, lat.n_sector, lat.radius))
}

/// Like [`prune_and_select`] but refuses to silently drop a fragment.
fn prune_checked(adj: &[Vec<usize>], alive: Vec<bool>) -> Result<Vec<usize>> {
    let n = adj.len();
    let mut live = alive.clone();
    // prune without component selection first, to count components
    let mut degree: Vec<usize> = (0..n).map(|u| if live[u] { adj[u].iter().filter(|&&v| live[v]).count() } else { 0 }).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&u| live[u] && degree[u] <= 1).collect();
    while let Some(u) = stack.pop() {
        if !live[u] {
            continue;
        }
        live[u] = false;
        for &v in &adj[u] {
            if live[v] {
                degree[v] -= 1;
                if degree[v] == 1 {
                    stack.push(v);
                }
            }
        }
    }
    let sub: Vec<usize> = (0..n).filter(|&u| live[u]).collect();
    let mut local = vec![usize::MAX; n];
    for (k, &u) in sub.iter().enumerate() {
        local[u] = k;
    }
    let sub_adj: Vec<Vec<usize>> =
        sub.iter().map(|&u| adj[u].iter().filter(|&&v| live[v]).map(|&v| local[v]).collect()).collect();
    let comps = count_components(&sub_adj);
    if comps != 1 {
        return Err(Error::Disconnected { components: comps });
    }
    Ok(prune_and_select(adj, alive))
}

/// Site permutation realising the mirror about the bisector `φ = α/2`, if
/// the lattice has that symmetry.
pub fn reflection_map(lat: &Lattice) -> Option<Vec<usize>> {
    const GRID: f64 = 1e6;
    let quant = |p: [f64; 2]| (round(p[0] * GRID) as i64, round(p[1] * GRID) as i64);
    let lookup: BTreeMap<(i64, i64), usize> = lat.sites.iter().map(|s| (quant(s.position), s.index)).collect();
    let (c2, s2) = (cos(lat.alpha()), sin(lat.alpha()));
    let mut perm = Vec::with_capacity(lat.len());
    for s in &lat.sites {
        let [x, y] = s.position;
        let r = [c2 * x + s2 * y, s2 * x - c2 * y];
        let (qx, qy) = quant(r);
        let mut hit = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(&k) = lookup.get(&(qx + dx, qy + dy)) {
                    let q = lat.sites[k].position;
                    if (q[0] - r[0]).abs() < EPS && (q[1] - r[1]).abs() < EPS {
                        hit = Some(k);
                        break 'search;
                    }
                }
            }
        }
        perm.push(hit?);
    }
    Some(perm)
}

/// Convenience: the sector frame position of an arbitrary honeycomb point
/// given in zigzag-frame coordinates (used by tests and plots).
pub fn zigzag_to_sector(lat: &Lattice, p: [f64; 2]) -> [f64; 2] {
    lat.frame.to_sector(p)
}

/// Inverse of [`zigzag_to_sector`].
pub fn sector_to_zigzag(lat: &Lattice, q: [f64; 2]) -> [f64; 2] {
    lat.frame.to_zigzag(q)
}
