//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero exit
//! if any fails.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use stabq::experiments::{
    origin_radii, quantile_estimates, run_bahadur_rate, run_clt, run_coupling_ladder, run_knn_density, run_means,
    run_voronoi_sanity, MIN_SLOPE_GAP, REMAINDER_SLOPE,
};
use stabq::ExperimentConfig;
use stabq_core::empirical::{build_ecdf, EmpiricalCdf};
use stabq_core::geometry::{sample_poisson, stream_rng, uniform_point, Point, SpatialIndex, Window};
use stabq_core::oracles::{KnnConditionalLaw, KnnKthLaw, KnnMixtureLaw, OracleLaw, MIXTURE_TRUNCATION};
use stabq_core::scores::{
    stabilization_tail_fit, FundamentalRegionScore, KnnKthScore, KnnTotalScore, ScoreFunctional, Truncated,
    VoronoiDeviationScore,
};

type Outcome = Result<String, String>;

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).expect("valid config").0
}

fn within_budget(label: String, started: Instant, budget: Duration) -> Outcome {
    let took = started.elapsed();
    if took <= budget {
        Ok(format!("{label}; {:.1}s", took.as_secs_f64()))
    } else {
        Err(format!("{label}; {:.1}s exceeds {}s", took.as_secs_f64(), budget.as_secs()))
    }
}

fn density_oracle() -> Outcome {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let out = run_knn_density(&config(&format!(r#"{{"family": "knn-kth", "k": {k}, "n_ladder": [10000]}}"#)))
            .map_err(|e| e.to_string())?;
        for row in &out.rows {
            worst = worst.max(row.ks);
            if row.ks >= 0.03 {
                return Err(format!("k={k}: KS {} >= 0.03", row.ks));
            }
        }
    }
    within_budget(format!("max KS {worst:.4} < 0.03 for k = 1, 2, 3"), started, Duration::from_secs(60))
}

fn quantile_consistency() -> Outcome {
    let started = Instant::now();
    let target = (LN_2 / PI).sqrt();
    let oracle = KnnKthLaw::new(1, 2).unwrap().quantile(0.5).map_err(|e| e.to_string())?;
    if (target - 0.469718).abs() > 1e-6 || (oracle - target).abs() > 1e-9 {
        return Err(format!("reference mismatch: closed form {target}, oracle {oracle}"));
    }
    let cfg = config(r#"{"family": "knn-kth"}"#);
    let est = quantile_estimates(&cfg, 1e4, 20).map_err(|e| e.to_string())?;
    let mean_abs = est.iter().map(|q| (q - target).abs()).sum::<f64>() / est.len() as f64;
    if mean_abs > 0.01 {
        return Err(format!("mean |psi_hat - psi| = {mean_abs}"));
    }
    within_budget(format!("mean |psi_hat - 0.469718| = {mean_abs:.5} over 20 replicates"), started, Duration::from_secs(30))
}

fn bahadur_rate() -> Outcome {
    let out = run_bahadur_rate(&config(r#"{"family": "knn-kth"}"#)).map_err(|e| e.to_string())?;
    let (s, raw) = (out.remainder.slope, out.raw.slope);
    let msg = format!("remainder slope {s:.3}, raw slope {raw:.3}, gap {:.3}", raw - s);
    let in_band = (REMAINDER_SLOPE.0..=REMAINDER_SLOPE.1).contains(&s) && REMAINDER_SLOPE == (-0.95, -0.55);
    if in_band && raw - s >= MIN_SLOPE_GAP && MIN_SLOPE_GAP >= 0.1 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn summarize(report: &stabq::Report) -> Outcome {
    let text: Vec<String> = report.checks.iter().map(|c| format!("{} = {:.4}", c.name, c.value)).collect();
    if report.passed() && !report.checks.is_empty() {
        Ok(text.join(", "))
    } else {
        Err(text.join(", "))
    }
}

fn clt() -> Outcome {
    let out = run_clt(&config(r#"{"family": "knn-kth", "n_ladder": [16000], "replicates": 300}"#))
        .map_err(|e| e.to_string())?;
    summarize(&out.report)
}

fn means() -> Outcome {
    let out = run_means(&config(r#"{"family": "knn-kth", "n_ladder": [16000], "replicates": 300}"#))
        .map_err(|e| e.to_string())?;
    summarize(&out.report)
}

fn stabilization_tails() -> Outcome {
    let started = Instant::now();
    let cfg = config(r#"{"family": "knn-kth"}"#);
    let radii = origin_radii::<2, _>(&KnnKthScore::new(1).unwrap(), &cfg).map_err(|e| e.to_string())?;
    let fit = stabilization_tail_fit(&radii, 2.0).map_err(|e| e.to_string())?;
    let rel = (fit.rate - PI).abs() / PI;
    let label = format!("c_hat = {:.4} ({:.1}% from pi)", fit.rate, 100.0 * rel);
    if rel > 0.10 {
        return Err(label);
    }
    within_budget(label, started, Duration::from_secs(30))
}

fn coupling() -> Outcome {
    let out = run_coupling_ladder(&config(r#"{"family": "knn-kth", "coupling": {"n0": 256, "rungs": 6, "seeds": 50}}"#))
        .map_err(|e| e.to_string())?;
    let top = out.ladder[out.ladder.len() - 1];
    let msg = format!(
        "{:.0}% of {} seeds constant from some rung on, ladder {}..{top}",
        100.0 * out.stable_fraction,
        out.values.len(),
        out.ladder[0]
    );
    if out.ladder[0] == 256.0 && top == 16384.0 && out.values.len() == 50 && out.stable_fraction >= 0.95 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn voronoi() -> Outcome {
    let out = run_voronoi_sanity(&config(r#"{"family": "fundamental-region"}"#)).map_err(|e| e.to_string())?;
    let ks: Vec<String> = out.faces.iter().map(|f| format!("m={} KS {:.4}", f.faces, f.ks)).collect();
    let msg = format!("mean area {:.4} over {} cells; {}", out.mean_area, out.cells, ks.join(", "));
    let faces_ok = out.faces.len() == 4 && out.faces.iter().all(|f| f.ks < 0.05);
    if out.cells >= 10_000 && (out.mean_area - 1.0).abs() <= 0.02 && faces_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn square(side: f64) -> Window<2> {
    Window::new([-side / 2.0; 2], [side / 2.0; 2]).unwrap()
}

fn scores() -> Vec<Box<dyn ScoreFunctional<2>>> {
    vec![
        Box::new(KnnKthScore::new(1).unwrap()),
        Box::new(KnnKthScore::new(3).unwrap()),
        Box::new(KnnTotalScore::new(2).unwrap()),
        Box::new(VoronoiDeviationScore::new(0.2).unwrap()),
        Box::new(FundamentalRegionScore::default()),
    ]
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn invariant_suites() -> Outcome {
    let started = Instant::now();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let origin = Point::<2>::origin();
    for seed in 0..40u64 {
        let mut rng = stream_rng(1000 + seed, 0, 0);
        let cfg = sample_poisson(&square(14.0), &mut rng);
        let with_y = cfg.with_point(origin).map_err(|e| e.to_string())?;
        let idx = SpatialIndex::new(with_y.clone());
        let shift = Point::new([37.5 - seed as f64, -12.25 + 0.5 * seed as f64]);
        let moved = SpatialIndex::new(with_y.translate(&shift));
        for s in scores() {
            let (a, b) = (s.evaluate(&origin, &idx), s.evaluate(&(origin - shift), &moved));
            match (&a, &b) {
                (Ok(u), Ok(v)) => ensure((u - v).abs() <= 1e-9 * (1.0 + u.abs()), || format!("translation {} {u} {v}", s.name()))?,
                (Err(e), Err(f)) => ensure(e == f, || format!("translation {}: {e:?} vs {f:?}", s.name()))?,
                _ => return Err(format!("translation {}: {a:?} vs {b:?}", s.name())),
            }
            *counts.entry("translation").or_default() += 1;

            let Ok(radius) = s.stabilization_radius(&origin, &idx) else { continue };
            // Points added outside B(0, R) leave the score unchanged.
            let big = square(40.0);
            let carrier = with_y.rewindow(big).map_err(|e| e.to_string())?;
            let mut extra = Vec::new();
            while extra.len() < 15 {
                let p = uniform_point(&big, &mut rng);
                if p.dist(&origin) > radius + 0.01 {
                    extra.push(p);
                }
            }
            let full = SpatialIndex::new(carrier.union(&extra).map_err(|e| e.to_string())?);
            let local = SpatialIndex::new(carrier.within_ball(&origin, radius + 0.01));
            let (u, v) = (s.evaluate(&origin, &full), s.evaluate(&origin, &local));
            ensure(u == v, || format!("stabilization {}: {u:?} vs {v:?}", s.name()))?;
            *counts.entry("constructive stabilization").or_default() += 1;

            for margin in [0.0, 0.5, 2.0] {
                match (s.evaluate(&origin, &idx), s.evaluate_truncated(&origin, &idx, radius + margin)) {
                    (Ok(u), Ok(Truncated::Value(v))) => ensure(u == v, || format!("truncation {}: {u} vs {v}", s.name()))?,
                    (Err(e), Err(f)) => ensure(e == f, || format!("truncation {}", s.name()))?,
                    (u, v) => return Err(format!("truncation {}: {u:?} vs {v:?}", s.name())),
                }
                *counts.entry("xi_r = xi").or_default() += 1;
            }
        }

        // Brute-force kNN on the same pattern.
        let pts = with_y.points().to_vec();
        for (q, y) in pts.iter().enumerate().step_by(7) {
            let k = 1 + q % 6;
            let mut brute: Vec<(f64, Point<2>)> = pts.iter().filter(|p| *p != y).map(|p| (p.dist2(y), *p)).collect();
            brute.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.lex_cmp(&b.1)));
            let got = idx.knn(y, k).map_err(|e| e.to_string())?;
            for (g, (d2, p)) in got.iter().zip(&brute) {
                ensure(g.point == *p && (g.distance - d2.sqrt()).abs() <= 1e-12, || format!("knn seed {seed} q {q}"))?;
            }
            ensure(got.len() == k.min(brute.len()), || "knn length".into())?;
            *counts.entry("brute-force knn").or_default() += 1;
        }

        // Order-statistic identities of the ECDF and its quantiles.
        let ecdf = build_ecdf(&SpatialIndex::new(cfg.clone()), &KnnKthScore::new(1).unwrap(), 0.0).map_err(|e| e.to_string())?;
        let m = ecdf.len();
        let mut direct: Vec<f64> = cfg
            .points()
            .iter()
            .map(|y| KnnKthScore::new(1).unwrap().evaluate(y, &SpatialIndex::new(cfg.clone())).unwrap())
            .collect();
        direct.sort_by(f64::total_cmp);
        ensure(ecdf.values() == &direct[..], || "untrimmed ecdf values".into())?;
        check_quantiles(&ecdf, m)?;
        *counts.entry("ecdf/quantile identities").or_default() += 1;
    }
    let from_scores = EmpiricalCdf::from_scores(vec![3.0, 1.0, 2.0, 2.0, 5.0]).map_err(|e| e.to_string())?;
    check_quantiles(&from_scores, 5)?;

    let r = 2f64.sqrt();
    let lambda = PI * r * r;
    for k in [1u32, 2, 3] {
        let kth = KnnKthLaw::new(k, 2).unwrap();
        let plain = KnnMixtureLaw::new(k, 2, r, 0, MIXTURE_TRUNCATION).unwrap();
        let extended = KnnMixtureLaw::extended(k, 2, r).unwrap();
        for i in 0..60 {
            let s = 0.05 + 3.0 * i as f64 / 60.0;
            let (mut g, mut gbar, mut w) = (0.0, 0.0, (-lambda).exp());
            for j in 0..200u32 {
                if j > 0 {
                    w *= lambda / j as f64;
                }
                g += w * KnnConditionalLaw::new(j, k, 2, r).unwrap().pdf(s);
                gbar += w * KnnConditionalLaw::new(j + 1, k, 2, r).unwrap().pdf(s);
            }
            ensure((g - kth.pdf(s)).abs() < 1e-8 && (plain.pdf(s) - g).abs() < 1e-8, || format!("g mixture k={k} s={s}"))?;
            ensure((extended.pdf(s) - gbar).abs() < 1e-8, || format!("g-bar mixture k={k} s={s}"))?;
            *counts.entry("mixture identities").or_default() += 1;
        }
    }
    let label = counts.iter().map(|(k, v)| format!("{k} x{v}")).collect::<Vec<_>>().join(", ");
    within_budget(label, started, Duration::from_secs(120))
}

fn check_quantiles(f: &EmpiricalCdf, m: usize) -> Result<(), String> {
    let sorted = f.values();
    for i in 1..200 {
        let p = i as f64 / 200.0;
        let q = f.quantile(p).map_err(|e| e.to_string())?;
        let rank = (1..=m).find(|&j| j as f64 / m as f64 >= p).unwrap();
        ensure(q.rank == rank && q.value == sorted[rank - 1], || format!("quantile rank at p={p}"))?;
        ensure(f.eval(q.value) >= p && f.eval(q.value.next_down()) < p, || format!("quantile inversion at p={p}"))?;
    }
    ensure(f.eval(sorted[m - 1]) == 1.0 && f.eval(sorted[0].next_down()) == 0.0, || "ecdf endpoints".into())
}

const DETERMINISM_CONFIG: &str = r#"{
  "family": "knn-kth",
  "n_ladder": [400, 800, 1600, 3200],
  "replicates": 100,
  "seed": 11,
  "density": {"origin_samples": 2000},
  "lil": {"n0": 256, "rungs": 6, "control_log2": 12},
  "coupling": {"n0": 256, "rungs": 4, "seeds": 8}
}"#;

fn run_all(dir: &Path, out: &str, threads: &str) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_stabq"))
        .args(["all", "--config", "config.json", "--out", out, "--svg"])
        .env("STABQ_THREADS", threads)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    match status.status.code() {
        Some(0) | Some(1) => Ok(()),
        code => Err(format!("exit {code:?}: {}", String::from_utf8_lossy(&status.stderr))),
    }
}

fn csv_files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|e| e == "csv" || e == "svg") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            out.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(tmp.path().join("config.json"), DETERMINISM_CONFIG).map_err(|e| e.to_string())?;
    run_all(tmp.path(), "a", "1")?;
    run_all(tmp.path(), "b", "2")?;
    let compare = Instant::now();
    let (a, b) = (csv_files(&tmp.path().join("a"))?, csv_files(&tmp.path().join("b"))?);
    if a.keys().ne(b.keys()) {
        return Err("different file sets".into());
    }
    let csvs = a.keys().filter(|k| k.ends_with(".csv")).count();
    if csvs < 20 {
        return Err(format!("only {csvs} CSV files written"));
    }
    if let Some(name) = a.keys().find(|k| a[*k] != b[*k]) {
        return Err(format!("{name} differs between STABQ_THREADS=1 and 2"));
    }
    let manifest = |d: &str| -> Result<serde_json::Value, String> {
        let text = std::fs::read_to_string(tmp.path().join(d).join("manifest.json")).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    let (ma, mb) = (manifest("a")?, manifest("b")?);
    if ma["config_hash"] != mb["config_hash"] || ma["files"] != mb["files"] {
        return Err("manifests disagree".into());
    }
    within_budget(
        format!("{csvs} CSV and {} SVG files byte-identical across thread counts", a.len() - csvs),
        compare,
        Duration::from_secs(60),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("density oracle", density_oracle),
        ("quantile consistency", quantile_consistency),
        ("bahadur rate", bahadur_rate),
        ("clt", clt),
        ("trimmed and winsorized means", means),
        ("stabilization tails", stabilization_tails),
        ("coupling stabilization", coupling),
        ("voronoi sanity", voronoi),
        ("invariant suites", invariant_suites),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
