//! CSV, MatrixMarket and JSON writers.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use grabill_core::hamiltonian::SparseHamiltonian;
use grabill_core::lattice::{EdgeTag, Lattice, Sublattice};
use grabill_core::lengthspec::{LengthSpectrum, OrbitFamily};
use grabill_core::qbilliard::{sector_wavefunction, BilliardLevel, EdgeMatching};
use grabill_core::rmtstats::{EnsembleRef, StatReport};
use grabill_core::unfold::{UnfoldMap, UnfoldMethod, UnfoldedSequence};
use serde::Serialize;

use crate::manifest::Manifest;

/// Collects every file written under one output directory.
#[derive(Debug)]
pub struct Outputs {
    root: PathBuf,
    pub manifest: Manifest,
}

impl Outputs {
    pub fn new(root: impl Into<PathBuf>, config_hash: &str) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Outputs { root, manifest: Manifest::new(config_hash) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `bytes` to `rel` and records it.
    pub fn write(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel.as_ref());
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.manifest.add(rel.as_ref(), bytes);
        Ok(path)
    }

    pub fn csv<R: Serialize>(&mut self, rel: impl AsRef<Path>, rows: impl IntoIterator<Item = R>) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.write(rel, &bytes)
    }

    pub fn json<T: Serialize>(&mut self, rel: impl AsRef<Path>, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(rel, &bytes)
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(self) -> Result<Manifest> {
        let path = self.root.join(crate::manifest::MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(&self.manifest)?;
        bytes.push(b'\n');
        fs::write(&path, bytes)?;
        Ok(self.manifest)
    }
}

fn g12(x: f64) -> String {
    format!("{x:.11e}").parse::<f64>().map(|v| v.to_string()).unwrap_or_else(|_| x.to_string())
}

fn tag_name(t: EdgeTag) -> &'static str {
    match t {
        EdgeTag::Interior => "interior",
        EdgeTag::Zigzag => "zigzag",
        EdgeTag::Armchair => "armchair",
        EdgeTag::MixedStraight => "mixed",
        EdgeTag::Arc => "arc",
        EdgeTag::Tip => "tip",
    }
}

#[derive(Serialize)]
struct SiteRow<'a> {
    index: usize,
    x: String,
    y: String,
    sublattice: &'a str,
    boundary: bool,
    edge_tag: &'a str,
}

pub fn write_lattice(out: &mut Outputs, lat: &Lattice) -> Result<()> {
    out.csv(
        "sites.csv",
        lat.sites().iter().map(|s| SiteRow {
            index: s.index,
            x: g12(s.position[0]),
            y: g12(s.position[1]),
            sublattice: if s.sublattice == Sublattice::A { "A" } else { "B" },
            boundary: s.boundary,
            edge_tag: tag_name(s.edge_tag),
        }),
    )?;
    #[derive(Serialize)]
    struct Bond {
        i: usize,
        j: usize,
        order: u8,
    }
    let bonds = lat
        .nn_bonds()
        .map(|(i, j)| Bond { i, j, order: 1 })
        .chain(lat.nnn_bonds().map(|(i, j)| Bond { i, j, order: 2 }));
    out.csv("bonds.csv", bonds)?;
    Ok(())
}

/// Upper triangle in MatrixMarket coordinate format, 1-based.
pub fn matrix_market(h: &SparseHamiltonian) -> Vec<u8> {
    let entries: Vec<_> = h.triplets().filter(|&(i, j, _)| i <= j).collect();
    let mut w = BufWriter::new(Vec::new());
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric").unwrap();
    writeln!(w, "% tight-binding Hamiltonian, values in units of t").unwrap();
    writeln!(w, "{} {} {}", h.dim(), h.dim(), entries.len()).unwrap();
    // symmetric storage lists the lower triangle
    for (i, j, v) in entries {
        writeln!(w, "{} {} {}", j + 1, i + 1, v).unwrap();
    }
    w.into_inner().expect("in-memory writer")
}

#[derive(Serialize)]
struct LevelRow {
    index: usize,
    energy: f64,
}

pub fn write_spectrum(out: &mut Outputs, rel: &str, levels: &[f64]) -> Result<PathBuf> {
    out.csv(rel, levels.iter().enumerate().map(|(index, &energy)| LevelRow { index, energy }))
}

#[derive(Serialize)]
struct UnfoldSidecar {
    method: &'static str,
    degree: Option<usize>,
    window: [f64; 2],
    n_levels: usize,
    coefficients: Option<Vec<f64>>,
    center: Option<f64>,
    half_width: Option<f64>,
}

pub fn write_unfolded(out: &mut Outputs, dir: &str, seq: &UnfoldedSequence) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        value: f64,
    }
    out.csv(format!("{dir}/unfolded.csv"), seq.values.iter().map(|&value| Row { value }))?;
    let (method, degree) = match seq.method {
        UnfoldMethod::Polynomial(d) => ("polynomial", Some(d)),
        UnfoldMethod::AnalyticDos => ("analytic_dos", None),
    };
    let (coefficients, center, half_width) = match &seq.map {
        UnfoldMap::Polynomial { coeffs, center, half_width } => (Some(coeffs.clone()), Some(*center), Some(*half_width)),
        UnfoldMap::Dos { .. } => (None, None, None),
    };
    let side = UnfoldSidecar {
        method,
        degree,
        window: [seq.source_window.0, seq.source_window.1],
        n_levels: seq.len(),
        coefficients,
        center,
        half_width,
    };
    out.json(format!("{dir}/unfolded.json"), &side)?;
    Ok(())
}

/// Serializable mirror of a statistics report.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ReportFile {
    pub window: [f64; 2],
    pub n_levels: usize,
    pub bin_width: f64,
    pub nnsd: Vec<f64>,
    pub delta3: Vec<[f64; 2]>,
    /// Keyed by reference name.
    pub ks: std::collections::BTreeMap<String, f64>,
    pub verdict: String,
}

impl ReportFile {
    pub fn from_report(r: &StatReport) -> Self {
        ReportFile {
            window: [r.window.0, r.window.1],
            n_levels: r.n_levels,
            bin_width: r.nnsd.bin_width,
            nnsd: r.nnsd.density.clone(),
            delta3: r.delta3.iter().map(|&(l, v)| [l, v]).collect(),
            ks: r.ks.iter().map(|(k, v)| (k.name().to_string(), *v)).collect(),
            verdict: r.verdict().label().to_string(),
        }
    }

    pub fn to_report(&self) -> Result<StatReport> {
        use grabill_core::rmtstats::{EnsembleKind, Histogram};
        let mut ks = std::collections::BTreeMap::new();
        for (name, &v) in &self.ks {
            let kind = EnsembleKind::ALL
                .into_iter()
                .find(|k| k.name() == name)
                .with_context(|| format!("unknown reference `{name}`"))?;
            ks.insert(kind, v);
        }
        Ok(StatReport {
            nnsd: Histogram { bin_width: self.bin_width, density: self.nnsd.clone() },
            delta3: self.delta3.iter().map(|p| (p[0], p[1])).collect(),
            ks,
            n_levels: self.n_levels,
            window: (self.window[0], self.window[1]),
        })
    }
}

/// `nnsd.csv`, `delta3.csv`, `ks.json` plus reference columns for overlays.
pub fn write_report(out: &mut Outputs, dir: &str, report: &StatReport, refs: &[EnsembleRef], nnsd: bool, delta3: bool) -> Result<()> {
    if nnsd {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["bin_center".to_string(), "density".to_string()];
        header.extend(refs.iter().map(|r| r.kind.name().to_lowercase()));
        w.write_record(&header)?;
        for (c, d) in report.nnsd.centers().iter().zip(&report.nnsd.density) {
            let mut row = vec![c.to_string(), d.to_string()];
            row.extend(refs.iter().map(|r| r.pdf(*c).to_string()));
            w.write_record(&row)?;
        }
        out.write(format!("{dir}/nnsd.csv"), &w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
    }
    if delta3 {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["L".to_string(), "value".to_string()];
        header.extend(refs.iter().map(|r| r.kind.name().to_lowercase()));
        w.write_record(&header)?;
        for &(l, v) in &report.delta3 {
            let mut row = vec![l.to_string(), v.to_string()];
            row.extend(refs.iter().map(|r| r.delta3(l).map_or(String::new(), |x| x.to_string())));
            w.write_record(&row)?;
        }
        out.write(format!("{dir}/delta3.csv"), &w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
    }
    out.json(format!("{dir}/ks.json"), &ReportFile::from_report(report))?;
    Ok(())
}

#[derive(Serialize)]
struct BilliardRow {
    m: u32,
    n: u32,
    nu: f64,
    k: f64,
}

pub fn write_billiard(out: &mut Outputs, rel: &str, levels: &[BilliardLevel]) -> Result<PathBuf> {
    out.csv(rel, levels.iter().map(|l| BilliardRow { m: l.m, n: l.n, nu: l.order, k: l.k }))
}

/// `ψ(ρ, φ)` on an `n_rho × n_phi` polar grid of the unit sector.
pub fn write_wavefunction(out: &mut Outputs, rel: &str, level: &BilliardLevel, alpha: f64, n_rho: usize, n_phi: usize) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Row {
        rho: f64,
        phi: f64,
        psi: f64,
    }
    let mut rows = Vec::with_capacity(n_rho * n_phi);
    for i in 0..n_rho {
        let rho = (i as f64 + 0.5) / n_rho as f64;
        for j in 0..n_phi {
            let phi = alpha * (j as f64 + 0.5) / n_phi as f64;
            rows.push(Row { rho, phi, psi: sector_wavefunction(level, rho, phi, alpha)? });
        }
    }
    out.csv(rel, rows)
}

pub fn write_length_spectrum(out: &mut Outputs, rel: &str, spec: &LengthSpectrum) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Row {
        l: f64,
        #[serde(rename = "F")]
        f: f64,
    }
    out.csv(rel, spec.l.iter().zip(&spec.f).map(|(&l, &f)| Row { l, f }))
}

pub fn write_orbits(out: &mut Outputs, rel: &str, orbits: &[OrbitFamily]) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Row {
        length: f64,
        order: u32,
        p: u32,
        w: u32,
        #[serde(rename = "type")]
        kind: String,
    }
    out.csv(
        rel,
        orbits.iter().map(|o| Row {
            length: o.length,
            order: o.order,
            p: o.p,
            w: o.w,
            kind: match (o.through_apex, o.repetition) {
                (true, 1) => "diameter".into(),
                (true, r) => format!("diameter x{r}"),
                (false, 1) => "polygon".into(),
                (false, r) => format!("polygon x{r}"),
            },
        }),
    )
}

pub fn write_edge_matching(out: &mut Outputs, rel: &str, m: &EdgeMatching) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Row {
        energy: f64,
        m: u32,
        n: u32,
        k: f64,
        ratio: f64,
    }
    out.csv(rel, m.pairs.iter().map(|p| Row { energy: p.energy, m: p.level.m, n: p.level.n, k: p.level.k, ratio: p.ratio }))
}
