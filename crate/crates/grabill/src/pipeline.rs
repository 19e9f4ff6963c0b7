//! Config-driven experiment runs.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use anyhow::{bail, Context, Result};
use grabill_core::hamiltonian::{assemble, SparseHamiltonian};
use grabill_core::lattice::{build_sector, edge_termination, reflection_map, Edge, Lattice};
use grabill_core::lengthspec::{
    enumerate_orbits, length_spectrum, to_wavevectors, uniform_grid, LengthSpectrum, OrbitFamily, Regime, Taper,
    WavevectorSeq,
};
use grabill_core::lengthspec::orbits::MAX_ORBIT_LENGTH;
use grabill_core::qbilliard::{lowest_levels, match_band_edge, EdgeMatching, BAND_EDGE_REACH};
use grabill_core::rmtstats::{
    analyze, gue_reference, parity_split, poisson_reference, pool, realization, EnsembleKind, EnsembleRef,
    ReferenceSampling, StatOptions, StatReport,
};
use grabill_core::spectra::{full_spectrum, merge_parts, slice_seed, SpectrumRecord, WindowSolver, SLICE_TARGET};
use grabill_core::unfold::{polynomial_unfold, unfold_with_dos, HoneycombDos, UnfoldedSequence};
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::SpectrumCache;
use crate::config::{Analysis, ExperimentConfig, UnfoldMethodName};
use crate::export::{self, Outputs};
use crate::manifest::Manifest;
use crate::svg::{Plot, Series};

/// Matrices up to this size are diagonalized densely, once, and windows
/// are cut from the full spectrum.
pub const DENSE_LIMIT: usize = 2500;
/// Length-spectrum grid points per resolution cell.
const GRID_PER_RESOLUTION: f64 = 8.0;
/// Peaks below this length sit in the smooth-part background.
pub const MIN_PEAK_LENGTH: f64 = 0.5;
pub const PEAK_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub cache_dir: Option<PathBuf>,
    pub svg: bool,
}

/// A lattice and its Hamiltonian, with cached access to spectra.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub lattice: Lattice,
    pub hamiltonian: SparseHamiltonian,
    cache: SpectrumCache,
    computed: AtomicUsize,
    hits: AtomicUsize,
}

impl Experiment {
    pub fn prepare(config: &ExperimentConfig, opts: &RunOptions) -> Result<Self> {
        config.validate()?;
        let lattice = build_sector(&config.sector_spec()).context("building lattice")?;
        let hamiltonian = assemble(&lattice, &config.tb_params()).context("assembling Hamiltonian")?;
        let fallback = config.cache_dir.clone().unwrap_or_else(|| config.output_dir.join("cache"));
        let cache = SpectrumCache::resolve(opts.cache_dir.as_deref(), &fallback);
        log::info!("lattice: {} sites, L0 = {:.2}", lattice.len(), lattice.l0());
        Ok(Experiment { config: config.clone(), lattice, hamiltonian, cache, computed: AtomicUsize::new(0), hits: AtomicUsize::new(0) })
    }

    pub fn computed(&self) -> usize {
        self.computed.load(Ordering::Relaxed)
    }

    pub fn cache_hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    fn cached(&self, key: &str, compute: impl FnOnce() -> Result<SpectrumRecord>) -> Result<SpectrumRecord> {
        if let Some(r) = self.cache.load(key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(r);
        }
        let record = compute()?.with_hash(key);
        self.computed.fetch_add(1, Ordering::Relaxed);
        if let Err(e) = self.cache.store(key, &record, self.hamiltonian.dim()) {
            log::warn!("could not write spectrum cache: {e}");
        }
        Ok(record)
    }

    /// All eigenvalues in `(lo, hi)`, with eigenvectors when asked.
    pub fn window_spectrum(&self, lo: f64, hi: f64, vectors: bool) -> Result<SpectrumRecord> {
        let dim = self.hamiltonian.dim();
        if dim <= DENSE_LIMIT {
            let full = self.cached(&self.config.spectrum_key(None, vectors), || {
                let r = if vectors {
                    grabill_core::spectra::full_spectrum_with_vectors(&self.hamiltonian)?
                } else {
                    full_spectrum(&self.hamiltonian)?
                };
                Ok(r)
            })?;
            let keep: Vec<usize> = (0..full.len()).filter(|&i| full.eigenvalues[i] > lo && full.eigenvalues[i] < hi).collect();
            return Ok(SpectrumRecord {
                config_hash: full.config_hash.clone(),
                eigenvalues: keep.iter().map(|&i| full.eigenvalues[i]).collect(),
                eigenvectors: full.eigenvectors.as_ref().map(|v| keep.iter().map(|&i| v[i].clone()).collect()),
                window: Some((lo, hi)),
                method: full.method,
            });
        }
        self.cached(&self.config.spectrum_key(Some((lo, hi)), vectors), || {
            let solver = WindowSolver::new(&self.hamiltonian);
            let slices = solver.plan(lo, hi, SLICE_TARGET)?;
            log::info!("window [{lo}, {hi}]: {} levels in {} slices", slices.iter().map(|s| s.count).sum::<usize>(), slices.len());
            let parts = slices
                .par_iter()
                .enumerate()
                .map(|(k, s)| solver.solve(*s, vectors, slice_seed(k)))
                .collect::<grabill_core::Result<Vec<_>>>()?;
            Ok(merge_parts(parts, lo, hi, vectors))
        })
    }

    /// `(E_edge)` when the window lies within reach of a band edge.
    pub fn band_edge_near(&self, lo: f64, hi: f64) -> Option<f64> {
        let (bottom, top) = self.config.tb_params().band_edges();
        [top, bottom].into_iter().find(|&e| (lo - e).abs() <= BAND_EDGE_REACH + 1e-12 && (hi - e).abs() <= BAND_EDGE_REACH + 1e-12)
    }

    /// Wavevector conversion for the regime the window belongs to. Energies
    /// are measured from the Dirac point, or shifted so the nearest band
    /// edge sits at `±3`.
    pub fn wavevectors(&self, levels: &[f64], lo: f64, hi: f64) -> Result<WavevectorSeq> {
        let p = self.config.tb_params();
        let dirac = p.dirac_point();
        let (bottom, top) = p.band_edges();
        let l0 = self.lattice.l0();
        if (lo - dirac).abs() <= 1.0 && (hi - dirac).abs() <= 1.0 {
            let shifted: Vec<f64> = levels.iter().map(|e| e - dirac).collect();
            return Ok(to_wavevectors(&shifted, Regime::Dirac, l0)?);
        }
        let (from, to) = if (hi - top).abs() < (lo - bottom).abs() { (top, 3.0) } else { (bottom, -3.0) };
        let shifted: Vec<f64> = levels.iter().map(|e| e - from + to).collect();
        Ok(to_wavevectors(&shifted, Regime::BandEdge, l0)?)
    }
}

/// Poisson, GOE, 2GOE and GUE references; the Monte Carlo draws run in
/// parallel and are pooled in realization order.
pub fn references(sampling: &ReferenceSampling) -> Vec<EnsembleRef> {
    let mc = |kind| {
        let draws: Vec<_> = (0..sampling.realizations).into_par_iter().map(|k| realization(kind, sampling, k)).collect();
        pool(kind, sampling, &draws)
    };
    vec![poisson_reference(), mc(EnsembleKind::Goe), mc(EnsembleKind::TwoGoe), gue_reference()]
}

pub fn sampling_for(config: &ExperimentConfig) -> ReferenceSampling {
    ReferenceSampling {
        realizations: config.seeds.realizations,
        seed: config.seeds.reference,
        l_max: config.l_max.max(ReferenceSampling::default().l_step),
        ..ReferenceSampling::default()
    }
}

fn standard_dos() -> &'static HoneycombDos {
    static DOS: OnceLock<HoneycombDos> = OnceLock::new();
    DOS.get_or_init(HoneycombDos::standard)
}

pub fn unfold(config: &ExperimentConfig, levels: &[f64], lo: f64, hi: f64) -> Result<UnfoldedSequence> {
    Ok(match config.unfold.method {
        UnfoldMethodName::Polynomial => polynomial_unfold(levels, (lo, hi), config.unfold.degree)?,
        UnfoldMethodName::AnalyticDos => unfold_with_dos(levels, (lo, hi), standard_dos())?,
    })
}

pub fn stat_options(config: &ExperimentConfig) -> StatOptions {
    let n = config.l_max.floor().max(1.0) as usize;
    StatOptions { bin_width: config.bins, lengths: (1..=n).map(|l| l as f64).collect(), n_positions: None }
}

/// Length spectrum on `[0, l_max]` at a step of an eighth of the resolution.
pub fn length_curve(seq: &WavevectorSeq, l_max: f64) -> Result<LengthSpectrum> {
    let step = seq.resolution() / GRID_PER_RESOLUTION;
    Ok(length_spectrum(seq, &uniform_grid(l_max, step), Taper::Hann)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakMatch {
    pub l: f64,
    pub prominence: f64,
    pub orbit_length: Option<f64>,
    pub offset: Option<f64>,
    pub within_resolution: bool,
}

/// Significant peaks paired with the nearest orbit length.
pub fn match_peaks(spec: &LengthSpectrum, orbits: &[OrbitFamily], tolerance: f64) -> Vec<PeakMatch> {
    spec.significant_peaks(PEAK_FACTOR, MIN_PEAK_LENGTH)
        .iter()
        .map(|p| {
            let nearest = orbits.iter().map(|o| o.length).min_by(|a, b| (a - p.l).abs().total_cmp(&(b - p.l).abs()));
            let offset = nearest.map(|o| p.l - o);
            PeakMatch {
                l: p.l,
                prominence: p.prominence,
                orbit_length: nearest,
                offset,
                within_resolution: offset.is_some_and(|d| d.abs() <= tolerance),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct WindowResult {
    pub window: (f64, f64),
    pub levels: Vec<f64>,
    pub report: Option<StatReport>,
    pub lengths: Option<(LengthSpectrum, Vec<PeakMatch>)>,
    pub edge_matching: Option<EdgeMatching>,
    pub parity: Option<(StatReport, StatReport)>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub computed: usize,
    pub cache_hits: usize,
    pub windows: Vec<WindowResult>,
    pub output_dir: PathBuf,
}

fn window_dir(k: usize) -> String {
    format!("w{k}")
}

#[derive(Serialize)]
struct LatticeSummary {
    sites: usize,
    radius: f64,
    l0: f64,
    alpha: f64,
    first_edge: String,
    second_edge: String,
    nnn_ratio: f64,
    dirac_point: f64,
}

fn lattice_summary(exp: &Experiment) -> LatticeSummary {
    let p = exp.config.tb_params();
    LatticeSummary {
        sites: exp.lattice.len(),
        radius: exp.lattice.radius(),
        l0: exp.lattice.l0(),
        alpha: exp.lattice.alpha(),
        first_edge: format!("{:?}", edge_termination(&exp.lattice, Edge::First)),
        second_edge: format!("{:?}", edge_termination(&exp.lattice, Edge::Second)),
        nnn_ratio: p.nnn_ratio(),
        dirac_point: p.dirac_point(),
    }
}

/// Writes the lattice, its bonds and the Hamiltonian.
pub fn build(config: &ExperimentConfig, opts: &RunOptions) -> Result<Manifest> {
    let exp = Experiment::prepare(config, opts)?;
    let mut out = Outputs::new(&config.output_dir, &config.hash())?;
    out.json("config.json", config)?;
    out.json("lattice.json", &lattice_summary(&exp))?;
    export::write_lattice(&mut out, &exp.lattice)?;
    out.write("hamiltonian.mtx", &export::matrix_market(&exp.hamiltonian))?;
    out.finish()
}

/// Runs every analysis listed in the config on every window.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    let exp = Experiment::prepare(config, opts)?;
    run_with(&exp, opts)
}

pub fn run_with(exp: &Experiment, opts: &RunOptions) -> Result<RunSummary> {
    let config = &exp.config;
    let mut out = Outputs::new(&config.output_dir, &config.hash())?;
    out.json("config.json", config)?;
    out.json("lattice.json", &lattice_summary(exp))?;

    let vectors = config.wants(Analysis::Parity);
    let spectra: Vec<SpectrumRecord> = config
        .windows
        .par_iter()
        .map(|&[lo, hi]| exp.window_spectrum(lo, hi, vectors))
        .collect::<Result<_>>()?;

    let wants_stats = config.wants(Analysis::Nnsd) || config.wants(Analysis::Delta3) || config.wants(Analysis::Parity);
    let refs = if wants_stats { references(&sampling_for(config)) } else { Vec::new() };
    let orbits = if config.wants(Analysis::Lengths) {
        enumerate_orbits(exp.lattice.alpha(), config.l_max.min(MAX_ORBIT_LENGTH))?
    } else {
        Vec::new()
    };

    let mut results = Vec::new();
    for (k, (&[lo, hi], record)) in config.windows.iter().zip(&spectra).enumerate() {
        let dir = window_dir(k);
        let levels = record.eigenvalues.clone();
        export::write_spectrum(&mut out, &format!("{dir}/spectrum.csv"), &levels)?;
        let mut result = WindowResult { window: (lo, hi), levels: levels.clone(), report: None, lengths: None, edge_matching: None, parity: None };

        if config.wants(Analysis::Nnsd) || config.wants(Analysis::Delta3) {
            let seq = unfold(config, &levels, lo, hi).with_context(|| format!("unfolding window {k}"))?;
            export::write_unfolded(&mut out, &dir, &seq)?;
            let report = analyze(&seq, &refs, &stat_options(config))?;
            export::write_report(&mut out, &dir, &report, &refs, config.wants(Analysis::Nnsd), config.wants(Analysis::Delta3))?;
            if opts.svg {
                write_stat_plots(&mut out, &dir, &report, &refs)?;
            }
            log::info!("window {k} [{lo}, {hi}]: {} levels, {}", report.n_levels, report.verdict().label());
            result.report = Some(report);
        }

        if config.wants(Analysis::Lengths) {
            let seq = exp.wavevectors(&levels, lo, hi)?;
            let spec = length_curve(&seq, config.l_max)?;
            let matches = match_peaks(&spec, &orbits, spec.resolution);
            export::write_length_spectrum(&mut out, &format!("{dir}/length.csv"), &spec)?;
            export::write_orbits(&mut out, &format!("{dir}/orbits.csv"), &orbits)?;
            out.csv(format!("{dir}/peaks.csv"), matches.iter().cloned())?;
            if opts.svg {
                let plot = Plot {
                    title: format!("length spectrum, E/t in [{lo}, {hi}]"),
                    x_label: "l / L".into(),
                    y_label: "F(l)".into(),
                    series: vec![Series::line("F", spec.l.iter().copied().zip(spec.f.iter().copied()).collect())],
                    markers: orbits.iter().map(|o| o.length).collect(),
                };
                out.write(format!("{dir}/length.svg"), plot.render().as_bytes())?;
            }
            result.lengths = Some((spec, matches));
        }

        if config.wants(Analysis::QbMatch) {
            match exp.band_edge_near(lo, hi) {
                Some(edge) => {
                    let billiard = lowest_levels(exp.lattice.alpha(), levels.len() + levels.len() / 4 + 10)?;
                    let m = match_band_edge(&levels, edge, exp.lattice.l0(), &billiard)?;
                    export::write_edge_matching(&mut out, &format!("{dir}/qb_match.csv"), &m)?;
                    result.edge_matching = Some(m);
                }
                None => log::warn!("window {k} is not within {BAND_EDGE_REACH} t of a band edge; skipping qb_match"),
            }
        }

        if config.wants(Analysis::Parity) {
            let reflection = reflection_map(&exp.lattice);
            let split = parity_split(record, reflection.as_deref())?;
            if !split.unclassified.is_empty() {
                log::warn!("window {k}: {} states without a clear parity", split.unclassified.len());
            }
            let mut reports = Vec::new();
            for (name, part) in [("even", &split.even), ("odd", &split.odd)] {
                let sub = format!("{dir}/parity_{name}");
                export::write_spectrum(&mut out, &format!("{sub}/spectrum.csv"), part)?;
                let seq = unfold(config, part, lo, hi)?;
                let report = analyze(&seq, &refs, &stat_options(config))?;
                export::write_report(&mut out, &sub, &report, &refs, true, true)?;
                reports.push(report);
            }
            let odd = reports.pop().expect("two parities");
            let even = reports.pop().expect("two parities");
            result.parity = Some((even, odd));
        }
        results.push(result);
    }

    let (computed, cache_hits) = (exp.computed(), exp.cache_hits());
    if computed == 0 {
        log::info!("all {cache_hits} spectra served from cache");
    }
    let output_dir = out.root().to_path_buf();
    let manifest = out.finish()?;
    Ok(RunSummary { manifest, computed, cache_hits, windows: results, output_dir })
}

fn write_stat_plots(out: &mut Outputs, dir: &str, report: &StatReport, refs: &[EnsembleRef]) -> Result<()> {
    let centers = report.nnsd.centers();
    let s_max = centers.last().copied().unwrap_or(4.0).min(4.0);
    let grid: Vec<f64> = (0..=200).map(|i| s_max * i as f64 / 200.0).collect();
    let mut series = vec![Series::steps("data", centers.iter().copied().zip(report.nnsd.density.iter().copied()).filter(|p| p.0 <= s_max).collect())];
    series.extend(refs.iter().map(|r| Series::line(r.kind.name(), grid.iter().map(|&s| (s, r.pdf(s))).collect())));
    let plot = Plot { title: "nearest-neighbour spacings".into(), x_label: "s".into(), y_label: "P(s)".into(), series, markers: vec![] };
    out.write(format!("{dir}/nnsd.svg"), plot.render().as_bytes())?;

    let mut series = vec![Series::line("data", report.delta3.clone())];
    series.extend(refs.iter().filter_map(|r| {
        let pts: Vec<(f64, f64)> = report.delta3.iter().filter_map(|&(l, _)| r.delta3(l).map(|v| (l, v))).collect();
        (!pts.is_empty()).then(|| Series::line(r.kind.name(), pts))
    }));
    let plot = Plot { title: "spectral rigidity".into(), x_label: "L".into(), y_label: "Delta3(L)".into(), series, markers: vec![] };
    out.write(format!("{dir}/delta3.svg"), plot.render().as_bytes())?;
    Ok(())
}

/// Sector billiard levels, a few wavefunction rasters and the billiard's
/// own length spectrum.
pub fn quantum_billiard(config: &ExperimentConfig, count: usize, opts: &RunOptions) -> Result<Manifest> {
    if count < 1 {
        bail!("level count must be positive");
    }
    let alpha = config.sector_spec().alpha();
    let levels = lowest_levels(alpha, count)?;
    let mut out = Outputs::new(&config.output_dir, &config.hash())?;
    export::write_billiard(&mut out, "billiard.csv", &levels)?;
    for (i, level) in levels.iter().take(3).enumerate() {
        export::write_wavefunction(&mut out, &format!("wavefunction_{i}.csv"), level, alpha, 64, 32)?;
    }
    let ks: Vec<f64> = levels.iter().map(|l| l.k).collect();
    let seq = to_wavevectors(&ks, Regime::QuantumBilliard, 1.0)?;
    if seq.values.len() >= grabill_core::lengthspec::MIN_WAVEVECTORS {
        let spec = length_curve(&seq, config.l_max)?;
        let orbits = enumerate_orbits(alpha, config.l_max.min(MAX_ORBIT_LENGTH))?;
        export::write_length_spectrum(&mut out, "billiard_length.csv", &spec)?;
        export::write_orbits(&mut out, "orbits.csv", &orbits)?;
        out.csv("billiard_peaks.csv", match_peaks(&spec, &orbits, spec.resolution))?;
        if opts.svg {
            let plot = Plot {
                title: "quantum billiard length spectrum".into(),
                x_label: "l / L".into(),
                y_label: "F(l)".into(),
                series: vec![Series::line("F", spec.l.iter().copied().zip(spec.f.iter().copied()).collect())],
                markers: orbits.iter().map(|o| o.length).collect(),
            };
            out.write("billiard_length.svg", plot.render().as_bytes())?;
        }
    }
    out.finish()
}
