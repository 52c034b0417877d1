use stabq_core::geometry::{make_window, sample_poisson, stream_rng, SpatialIndex};
use stabq_core::oracles::{GammaLaw, OracleLaw};
use stabq_core::scores::{voronoi_cell, FundamentalRegionScore};
use stabq_core::stats::ks_statistic;
use stabq_core::Error as CoreError;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::parallel::try_par_map;
use crate::report::{Check, Plot, Report, Table};

const AREA_LANE: u16 = 0xD0;
const REGION_LANE: u16 = 0xD1;
/// Windows processed per parallel batch; fixed so results do not depend on
/// the pool size.
const BATCH: u64 = 4;
const MAX_WINDOWS: u64 = 4096;
pub const FACE_COUNTS: std::ops::RangeInclusive<usize> = 4..=7;
const AREA_TOLERANCE: f64 = 0.02;
const GAMMA_KS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct FaceSample {
    pub faces: usize,
    pub areas: Vec<f64>,
    pub ks: f64,
}

#[derive(Debug, Clone)]
pub struct VoronoiOutcome {
    pub cells: usize,
    pub mean_area: f64,
    pub windows_used: u64,
    pub faces: Vec<FaceSample>,
    pub report: Report,
}

/// Mean interior cell area and face-conditional fundamental-region laws.
pub fn run_voronoi_sanity(cfg: &ExperimentConfig) -> Result<VoronoiOutcome> {
    if cfg.d != 2 {
        return Err(Error::Core(CoreError::PlanarOnly));
    }
    let n = cfg.voronoi.n;
    let window = make_window::<2>(n)?;
    let inner = window.shrink(cfg.trim_radius(n)?)?;

    let mut areas = Vec::new();
    let mut windows = 0;
    while areas.len() < cfg.voronoi.cells {
        let batch = batch_of(windows, |rep| {
            let index = SpatialIndex::new(sample_poisson(&window, &mut stream_rng(cfg.seed, rep, AREA_LANE)));
            let mut out = Vec::new();
            for y in index.points().iter().filter(|y| inner.contains(y)) {
                let cell = voronoi_cell(y, &index)?;
                if !cell.clipped {
                    out.push(cell.area());
                }
            }
            Ok(out)
        })?;
        windows += BATCH;
        areas.extend(batch.into_iter().flatten());
    }
    areas.truncate(cfg.voronoi.cells);
    let mean_area = areas.iter().sum::<f64>() / areas.len() as f64;

    let score = FundamentalRegionScore::default();
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); *FACE_COUNTS.end() + 1];
    let mut region_windows = 0;
    while FACE_COUNTS.clone().any(|m| buckets[m].len() < cfg.voronoi.per_face) {
        let batch = batch_of(region_windows, |rep| {
            let index = SpatialIndex::new(sample_poisson(&window, &mut stream_rng(cfg.seed, rep, REGION_LANE)));
            let mut out = Vec::new();
            for y in index.points().iter().filter(|y| inner.contains(y)) {
                match score.evaluate_with_faces(y, &index) {
                    Ok((area, faces)) if FACE_COUNTS.contains(&faces) => out.push((faces, area)),
                    Ok(_) | Err(CoreError::BoundaryAffected) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(out)
        })?;
        region_windows += BATCH;
        for (faces, area) in batch.into_iter().flatten() {
            buckets[faces].push(area);
        }
    }

    let mut report = Report::new("density-check");
    report
        .checks
        .push(Check::within("mean interior cell area", mean_area, 1.0 - AREA_TOLERANCE, 1.0 + AREA_TOLERANCE));
    let mut table = Table::new("voronoi_faces", &["faces", "samples", "mean_area", "ks"]);
    let mut faces = Vec::new();
    for m in FACE_COUNTS {
        let sample = std::mem::take(&mut buckets[m]);
        let law = GammaLaw::new(m as f64)?;
        let ks = ks_statistic(&sample, |x| law.cdf(x))?;
        let mean = sample.iter().sum::<f64>() / sample.len() as f64;
        table.push(vec![m.into(), sample.len().into(), mean.into(), ks.into()]);
        report.checks.push(Check::at_most(format!("fundamental region ks m={m}"), ks, GAMMA_KS));
        if m == 6 {
            let top = sample.iter().copied().fold(0.0, f64::max);
            report.plots.push(Plot::Histogram {
                name: "fundamental_region_m6".into(),
                samples: sample.clone(),
                density: (0..=200).map(|i| top * i as f64 / 200.0).map(|x| (x, law.pdf(x))).collect(),
            });
        }
        faces.push(FaceSample { faces: m, areas: sample, ks });
    }
    let mut cells = Table::new("voronoi_area", &["n", "cells", "windows", "mean_area"]);
    cells.push(vec![n.into(), areas.len().into(), windows.into(), mean_area.into()]);
    report.tables.push(cells);
    report.tables.push(table);
    Ok(VoronoiOutcome {
        cells: areas.len(),
        mean_area,
        windows_used: windows,
        faces,
        report,
    })
}

fn batch_of<T, F>(start: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if start >= MAX_WINDOWS {
        return Err(Error::Core(CoreError::InsufficientSample("Voronoi sample targets not reached")));
    }
    try_par_map(BATCH, |i| f(start + i))
}
