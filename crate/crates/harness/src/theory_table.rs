//! The `theory` command and the theory columns shared with simulations.

use phototaxis_core::analysis::RadialProfile;
use phototaxis_core::theory::{series_from_cumulants, BoltzmannModel, TheoryPrediction};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::output::{ensure_dir, num, write_csv, Layout, Manifest};

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub prediction: TheoryPrediction,
    /// `kappa_2 chi / D_f`.
    pub gain_first_order: f64,
    /// Gain from the truncated cumulant series.
    pub gain_series: f64,
}

pub struct TheoryPoint {
    pub model: BoltzmannModel,
    pub row: TheoryRow,
}

pub fn theory_point(cfg: &RunConfig, chi: f64, d_f: f64, lambda0: f64) -> Result<TheoryPoint> {
    let model = BoltzmannModel::new(cfg.theory_inputs(chi, d_f, lambda0))?;
    let prediction = model.predict();
    let terms = cfg.theory.series_terms.max(2);
    let k = model.cumulants(terms);
    let beta = model.inputs().beta();
    let row = TheoryRow {
        prediction,
        gain_first_order: k[1] * beta,
        gain_series: series_from_cumulants(&k, beta, cfg.theory.series_terms) - k[0],
    };
    Ok(TheoryPoint { model, row })
}

pub const THEORY_HEADER: [&str; 15] = [
    "chi",
    "z",
    "mean_phi",
    "gain",
    "gain_first_order",
    "gain_series",
    "alpha",
    "alpha_by_parts",
    "lambda1",
    "lambda2",
    "d1_direct",
    "d1_energy",
    "vs2",
    "d_f",
    "lambda0",
];

fn theory_csv_row(row: &TheoryRow, d_f: f64, lambda0: f64) -> Vec<String> {
    let p = &row.prediction;
    [
        p.chi,
        p.z,
        p.mean_phi,
        p.gain,
        row.gain_first_order,
        row.gain_series,
        p.alpha,
        p.alpha_by_parts,
        p.lambda1,
        p.lambda2,
        p.d1_direct,
        p.d1_energy,
        p.vs2,
        d_f,
        lambda0,
    ]
    .iter()
    .map(|&x| num(x))
    .collect()
}

pub fn write_radial(path: &std::path::Path, profile: &RadialProfile) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..profile.bins.count)
        .map(|i| {
            let (a, b) = profile.bins.edges(i);
            vec![num(a), num(b), num(profile.bins.center(i)), num(profile.density[i]), num(profile.fractions[i])]
        })
        .collect();
    write_csv(path, &["r_inner", "r_outer", "r_center", "density", "fraction"], &rows)
}

/// Resolves `D_f` and `lambda0` from explicit values or a calibration file.
pub fn theory_inputs_from(
    d_f: Option<f64>,
    lambda0: Option<f64>,
    calibration: &std::path::Path,
) -> Result<(f64, f64)> {
    if let (Some(d), Some(l)) = (d_f, lambda0) {
        return Ok((d, l));
    }
    match crate::calibrate::Calibration::read(calibration) {
        Ok(c) => Ok((d_f.unwrap_or(c.d_f), lambda0.unwrap_or(c.lambda0))),
        Err(HarnessError::MissingCalibration(_)) => Err(HarnessError::MissingTheoryInput(if d_f.is_none() {
            "D_f (--d-f)"
        } else {
            "lambda0 (--lambda0)"
        })),
        Err(e) => Err(e),
    }
}

/// Writes `theory.csv`, `cumulants.csv` and `radial_theory_<chi>.csv`.
pub fn cmd_theory(cfg: &RunConfig, d_f: f64, lambda0: f64, layout: &Layout) -> Result<Vec<TheoryRow>> {
    ensure_dir(&layout.root)?;
    let mut manifest = Manifest::new("theory", cfg);
    manifest.set("d_f", num(d_f));
    manifest.set("lambda0", num(lambda0));
    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    for &chi in &cfg.run.chi_list {
        let point = theory_point(cfg, chi, d_f, lambda0)?;
        let profile = point.model.radial_profile(cfg.analysis.n_bins)?;
        write_radial(&layout.per_chi("radial_theory", chi), &profile)?;
        csv_rows.push(theory_csv_row(&point.row, d_f, lambda0));
        rows.push(point.row);
    }
    write_csv(&layout.file("theory.csv"), &THEORY_HEADER, &csv_rows)?;

    let k = phototaxis_core::theory::illumination_cumulants(
        &cfg.light_params(),
        cfg.theory.quad_n,
        cfg.theory.series_terms,
    )?;
    let k_rows: Vec<Vec<String>> = k.iter().enumerate().map(|(i, &v)| vec![(i + 1).to_string(), num(v)]).collect();
    write_csv(&layout.file("cumulants.csv"), &["order", "cumulant"], &k_rows)?;
    manifest.write(&layout.file("manifest_theory.txt"))?;
    Ok(rows)
}
