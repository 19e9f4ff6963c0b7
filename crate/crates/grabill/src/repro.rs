//! Built-in experiment configs for one-command desk-scale reruns.

use std::path::Path;

use crate::config::{
    Analysis, EdgeName, ExperimentConfig, OrientationName, ParamsConfig, PerturbationConfig, SectorConfig, SeedConfig,
    UnfoldConfig,
};

/// Desk-scale lattice size.
pub const DESK_SIZE: usize = 50_000;

pub const FIGURES: [(&str, &str); 7] = [
    ("fig2b", "15° zigzag sector, Dirac window [0.02, 0.2]: GOE statistics"),
    ("fig2f", "15° zigzag sector, band-edge window [2.95, 3]: Poisson statistics and billiard matching"),
    ("fig5", "15° zigzag sector, band-edge length spectrum with orbit markers"),
    ("fig6", "15° zigzag sector with t' = 0.1 t, Dirac window shifted to [0.32, 0.5]"),
    ("fig9c", "60° armchair sector, Dirac window [0.02, 0.2]: Poisson statistics"),
    ("fig9e", "60° armchair sector with one edge row removed, Dirac window: GOE statistics"),
    ("fig9-2goe", "60° armchair sector, window [0.7, 0.8]: two independent GOE spectra"),
];

fn base(n: u32, orientation: OrientationName, windows: Vec<[f64; 2]>, analyses: Vec<Analysis>, out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        sector: SectorConfig { n, target_size: Some(DESK_SIZE), radius: None, orientation, perturbations: vec![] },
        params: ParamsConfig::default(),
        windows,
        analyses,
        unfold: UnfoldConfig::default(),
        bins: 0.25,
        l_max: 20.0,
        seeds: SeedConfig::default(),
        output_dir: out.to_path_buf(),
        cache_dir: None,
    }
}

/// Config for a figure id, writing under `out`.
pub fn figure_config(id: &str, out: &Path) -> Option<ExperimentConfig> {
    use Analysis::*;
    use OrientationName::*;
    let dirac = vec![[0.02, 0.2]];
    let edge = vec![[2.95, 3.0]];
    let c = match id {
        "fig2b" => base(12, Zigzag, dirac, vec![Nnsd, Delta3], out),
        "fig2f" => base(12, Zigzag, edge, vec![Nnsd, Delta3, QbMatch], out),
        "fig5" => base(12, Zigzag, edge, vec![Lengths], out),
        "fig6" => {
            let mut c = base(12, Zigzag, vec![[0.32, 0.5]], vec![Nnsd, Delta3], out);
            c.params.t_prime = 0.1 * c.params.t;
            c
        }
        "fig9c" => base(3, Armchair, dirac, vec![Nnsd, Delta3], out),
        "fig9e" => {
            let mut c = base(3, Armchair, dirac, vec![Nnsd, Delta3], out);
            c.sector.perturbations.push(PerturbationConfig::RemoveEdgeRow { edge: EdgeName::Second });
            c
        }
        "fig9-2goe" => base(3, Armchair, vec![[0.7, 0.8]], vec![Nnsd, Delta3], out),
        _ => return None,
    };
    Some(c)
}
