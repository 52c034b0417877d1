use rand_distr::{Distribution, StandardNormal};
use stabq_core::empirical::{build_ecdf, QuantileReference};
use stabq_core::geometry::{make_window, sample_poisson, stream_rng, SpatialIndex};
use stabq_core::scores::ScoreFunctional;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::family::{reference, with_score};
use crate::parallel::try_par_map;
use crate::report::{median, Check, LilTrack, Report, Table};

const LIL_LANE: u16 = 0xC0;
const CONTROL_LANE: u16 = 0xC1;
/// Running sups must fall in `[lower, upper] × ν̂`.
pub const NU_BAND: (f64, f64) = (0.2, 5.0);
pub const MIN_IN_BAND: f64 = 0.9;
/// Band for the median normalized running sup of the Gaussian walk.
pub const CONTROL_BAND: (f64, f64) = (0.8, 1.2);
/// The control walk is normalized from this step on; `ln ln 16 > 0`.
const CONTROL_START: u64 = 16;

#[derive(Debug, Clone)]
pub struct LilOutcome {
    pub reference: QuantileReference,
    pub tracks: Vec<LilTrack>,
    /// Replicate standard deviation of `√n (ψ̂ - ψ)` at the top of the ladder.
    pub nu_hat: f64,
    pub in_band_fraction: f64,
    /// Per seed, `sup_n S_n / √(2 n ln ln n)` of the Gaussian walk.
    pub control_sups: Vec<f64>,
    pub control_median: f64,
    pub report: Report,
}

fn lil_factor(n: f64) -> f64 {
    (2.0 * n.ln().ln()).sqrt()
}

pub fn run_lil(cfg: &ExperimentConfig) -> Result<LilOutcome> {
    let ladder: Vec<f64> = (0..=cfg.lil.rungs).map(|j| cfg.lil.n0 * 2f64.powi(j as i32)).collect();
    let (reference, estimates) = with_score!(cfg, tracks_for(cfg, &ladder))?;
    let nr = &ladder[ladder.len() - 1];
    let top: Vec<f64> = estimates.iter().map(|e| nr.sqrt() * (e[e.len() - 1] - reference.psi)).collect();
    let nu_hat = super::variance(&top).sqrt();

    let tracks: Vec<LilTrack> = estimates
        .iter()
        .enumerate()
        .map(|(seed, est)| {
            let normalized = ladder
                .iter()
                .zip(est)
                .map(|(&n, &q)| n.sqrt() * (q - reference.psi) / lil_factor(n))
                .collect();
            LilTrack::new(seed as u64, ladder.clone(), normalized)
        })
        .collect();
    let finite = tracks.iter().filter(|t| t.is_finite()).count() as f64 / tracks.len() as f64;
    let in_band = tracks
        .iter()
        .filter(|t| {
            let s = t.two_sided_sup();
            s.is_finite() && s >= NU_BAND.0 * nu_hat && s <= NU_BAND.1 * nu_hat
        })
        .count() as f64
        / tracks.len() as f64;

    let control = normal_control(cfg.seed, cfg.replicates as u64, cfg.lil.control_log2)?;
    let control_sups: Vec<f64> = control.iter().map(|c| *c.last().expect("non-empty control")).collect();
    let control_median = median(&control_sups);

    let mut report = Report::new("lil");
    report.checks.push(Check::within("finite trajectories fraction", finite, 1.0, 1.0));
    report.checks.push(Check::at_least("running sup within nu band fraction", in_band, MIN_IN_BAND));
    report.checks.push(Check::within(
        "normal control median running sup",
        control_median,
        CONTROL_BAND.0,
        CONTROL_BAND.1,
    ));
    report.notes.push(format!("nu_hat = {nu_hat}"));

    let mut table = Table::new(
        "lil",
        &["n", "replicate", "j", "psi_hat", "normalized", "running_sup", "running_inf"],
    );
    for (j, &n) in ladder.iter().enumerate() {
        for (t, est) in tracks.iter().zip(&estimates) {
            table.push(vec![
                n.into(),
                t.seed.into(),
                j.into(),
                est[j].into(),
                t.normalized[j].into(),
                t.running_sup[j].into(),
                t.running_inf[j].into(),
            ]);
        }
    }
    let mut ctable = Table::new("lil_control", &["n", "replicate", "running_sup"]);
    for j in 0..control[0].len() {
        let n = (CONTROL_START << j) as f64;
        for (seed, c) in control.iter().enumerate() {
            ctable.push(vec![n.into(), (seed as u64).into(), c[j].into()]);
        }
    }
    let mut summary = Table::new("lil_estimates", &["nu_hat", "in_band_fraction", "control_median"]);
    summary.push(vec![nu_hat.into(), in_band.into(), control_median.into()]);
    report.tables.push(table);
    report.tables.push(ctable);
    report.tables.push(summary);
    Ok(LilOutcome {
        reference,
        tracks,
        nu_hat,
        in_band_fraction: in_band,
        control_sups,
        control_median,
        report,
    })
}

/// `ψ̂` along the nested ladder for each seed: one window at the top volume,
/// restricted to each smaller window.
fn tracks_for<const D: usize, S>(
    score: &S,
    cfg: &ExperimentConfig,
    ladder: &[f64],
) -> Result<(QuantileReference, Vec<Vec<f64>>)>
where
    S: ScoreFunctional<D> + Sync + ?Sized,
{
    let r = reference::<D, S>(score, cfg, cfg.p)?;
    let top = make_window::<D>(ladder[ladder.len() - 1])?;
    let estimates = try_par_map(cfg.replicates as u64, |seed| {
        let full = sample_poisson(&top, &mut stream_rng(cfg.seed, seed, LIL_LANE));
        ladder
            .iter()
            .map(|&n| {
                let sub = full.restrict(&make_window::<D>(n)?)?;
                let ecdf = build_ecdf(&SpatialIndex::new(sub), score, cfg.trim_radius(n)?)?;
                Ok(ecdf.quantile(r.p)?.value)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok((r, estimates))
}

/// Running sups of `S_n / √(2 n ln ln n)` for Gaussian random walks of
/// `2^log2_steps` steps, read at `n = 16, 32, ..., 2^log2_steps`.
pub fn normal_control(seed: u64, walks: u64, log2_steps: u32) -> Result<Vec<Vec<f64>>> {
    let steps = 1u64 << log2_steps;
    try_par_map(walks, |w| {
        let mut rng = stream_rng(seed, w, CONTROL_LANE);
        let mut s = 0.0f64;
        let mut sup = f64::NEG_INFINITY;
        let mut out = Vec::new();
        let mut checkpoint = CONTROL_START;
        for n in 1..=steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            s += z;
            if n >= CONTROL_START {
                let nf = n as f64;
                sup = sup.max(s / (nf.sqrt() * lil_factor(nf)));
            }
            if n == checkpoint {
                out.push(sup);
                checkpoint <<= 1;
            }
        }
        Ok(out)
    })
}
