use exciton::coupling::{coupling_element, dispersion_lattice_sum, dispersion_nn, CouplingKind};
use serde_json::json;

use super::num;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::Artifacts;

/// Band structure of the configured coupling over the Brillouin zone.
///
/// An untruncated dipolar model is summed out to the lattice extent.
pub fn run(config: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let mut model = config.coupling.model();
    let dim = config.lattice.dimensionality();
    let reach = *config.lattice.extent.iter().max().unwrap_or(&1) as f64;
    if model.kind == CouplingKind::Dipolar && model.truncation.is_none() {
        model.truncation = Some(reach);
    }
    let a = config.lattice.spacing;
    let n = config.run.samples;
    let ak = |i: usize| -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / (n - 1) as f64;

    let mut rows = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let ys: Vec<f64> = if dim == 2 { (0..n).map(ak).collect() } else { vec![0.0] };
    for &y in &ys {
        for i in 0..n {
            let x = ak(i);
            let e = dispersion_lattice_sum(&model, a, dim, [x / a, y / a])?;
            lo = lo.min(e);
            hi = hi.max(e);
            let nn = dispersion_nn(&model, a, x / a) + if dim == 2 { 2.0 * model.alpha_ref * y.cos() } else { 0.0 };
            rows.push(vec![num(x), num(y), num(e), num(nn)]);
        }
    }
    out.csv("dispersion.csv", &["ak_x", "ak_y", "energy_rad_s", "nearest_neighbor_rad_s"], rows)?;

    let alpha_x = coupling_element(&model, [1, 0])?;
    out.json(
        "summary.json",
        &json!({
            "experiment": "dispersion",
            "dimensionality": dim,
            "truncation_sites": model.truncation,
            "alpha_x_rad_s": alpha_x,
            "band_min_rad_s": lo,
            "band_max_rad_s": hi,
            "bandwidth_rad_s": hi - lo,
        }),
    )
}
