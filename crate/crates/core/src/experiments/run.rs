use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, TaskSpec};
use crate::error::{Error, Result};
use crate::estimators::{
    ball_shape, check_renormalization, estimate_crossing, estimate_ind, estimate_mu, estimate_one_arm, BallParams,
    BallRegime, Sampling,
};
use crate::io::{write_binary, write_csv, write_point_cloud_csv};
use crate::metric::Medium;
use crate::par::Execution;
use crate::rng::RngSeed;
use crate::stats::Estimate;

/// Column set shared by every task.
pub const CSV_HEADER: [&str; 8] = ["quantity", "scale", "mean", "stderr", "ci_low", "ci_high", "replicas", "note"];

/// Root label of every stream drawn by a run.
pub const RUN_LABEL: &str = "run";

/// One CSV row. Warning rows carry a note starting with `warning:`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub quantity: String,
    pub scale: Option<f64>,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub replicas: usize,
    pub note: String,
}

impl ResultRow {
    pub fn estimate(quantity: &str, scale: Option<f64>, e: &Estimate) -> Self {
        Self {
            quantity: quantity.into(),
            scale,
            mean: Some(e.mean),
            stderr: Some(e.stderr),
            ci_low: Some(e.ci_low),
            ci_high: Some(e.ci_high),
            replicas: e.replicas,
            note: String::new(),
        }
    }

    pub fn value(quantity: &str, scale: Option<f64>, value: f64, replicas: usize) -> Self {
        Self {
            quantity: quantity.into(),
            scale,
            mean: Some(value),
            stderr: None,
            ci_low: None,
            ci_high: None,
            replicas,
            note: String::new(),
        }
    }

    pub fn warning(quantity: &str, scale: Option<f64>, replicas: usize, message: &str) -> Self {
        Self {
            quantity: quantity.into(),
            scale,
            mean: None,
            stderr: None,
            ci_low: None,
            ci_high: None,
            replicas,
            note: format!("warning: {message}"),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn is_warning(&self) -> bool {
        self.note.starts_with("warning:")
    }
}

/// Shortest decimal form that parses back to the same `f64`.
fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

pub fn results_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(fail)?;
    for r in rows {
        w.write_record([
            r.quantity.clone(),
            num(r.scale),
            num(r.mean),
            num(r.stderr),
            num(r.ci_low),
            num(r.ci_high),
            r.replicas.to_string(),
            r.note.clone(),
        ])
        .map_err(fail)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Everything a task produced, before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutput {
    pub rows: Vec<ResultRow>,
    /// Stream families (labels below the run root), one per independent estimate.
    pub streams: Vec<String>,
    /// Extra artifacts: file name and contents.
    pub files: Vec<(String, Vec<u8>)>,
}

impl TaskOutput {
    pub fn csv(&self) -> Result<Vec<u8>> {
        results_csv(&self.rows)
    }
}

fn sampling(cfg: &ExperimentConfig, exec: Execution) -> Sampling {
    Sampling { replicas: cfg.task.replicas(), seed: RngSeed::new(cfg.seed, 0, RUN_LABEL), exec }
}

/// Runs the configured task in memory.
pub fn run_task(cfg: &ExperimentConfig, exec: Execution) -> Result<TaskOutput> {
    let model = cfg.model_spec();
    let run = sampling(cfg, exec);
    let r = run.replicas;
    let mut rows = Vec::new();
    let mut streams = Vec::new();
    let mut files = Vec::new();
    match &cfg.task {
        TaskSpec::Sample { half_width, .. } => {
            let grid = model.domain(*half_width)?;
            let per = run.run("sample", |seed| {
                let medium = model.realize_on(&grid, seed)?;
                let cloud = model.point_cloud(&grid, seed)?;
                Ok((medium, cloud))
            })?;
            streams.push("sample".into());
            let mut summary = Vec::new();
            for (i, (medium, cloud)) in per.iter().enumerate() {
                let (quantity, value) = sample_files(&mut files, i, medium)?;
                if let Some((cloud, radii, key)) = cloud {
                    let mut buf = Vec::new();
                    write_point_cloud_csv(&mut buf, cloud, radii.as_deref(), *key)?;
                    files.push((format!("points-r{i}.csv"), buf));
                }
                rows.push(ResultRow::value(quantity, Some(i as f64), value, 1));
                summary.push((quantity, value));
            }
            let values: Vec<f64> = summary.iter().map(|s| s.1).collect();
            rows.push(ResultRow::estimate(summary[0].0, None, &Estimate::from_samples(&values)));
        }
        TaskSpec::Mu { direction, n, .. } => {
            let curve = estimate_mu(&model, direction, n, &run)?;
            for p in &curve.points {
                streams.push(format!("mu/n{}", p.n));
                let mut row = ResultRow::estimate("mu", Some(p.n as f64), &p.estimate);
                if p.triangle_violations > 0 {
                    row = row.with_note(format!("warning: {} triangle-inequality violations", p.triangle_violations));
                }
                rows.push(row);
            }
            for c in &curve.subadditivity {
                let mut row = ResultRow::value("subadditivity_excess", Some(c.n as f64), c.excess, r);
                row.stderr = Some(c.slack / 3.0);
                row.note = format!("m={} holds={}", c.m, c.holds);
                rows.push(row);
            }
        }
        TaskSpec::OneArm { radii, window, .. } => {
            let window = window.map(|[a, b]| a..b);
            let curve = estimate_one_arm(&model, radii, window, &run)?;
            for (x, e) in &curve.points {
                streams.push(format!("one-arm/R{x}"));
                rows.push(ResultRow::estimate("one_arm", Some(*x), e));
            }
            match (&curve.exponent, &curve.fit_note) {
                (Some(e), _) => rows.push(ResultRow::estimate("one_arm_exponent", None, e)),
                (None, Some(note)) => rows.push(ResultRow::warning("one_arm_exponent", None, r, note)),
                (None, None) => {}
            }
        }
        TaskSpec::Crossing { rect, scales, colour, .. } => {
            for (s, e) in estimate_crossing(&model, rect, scales, *colour, &run)? {
                streams.push(format!("crossing/j{colour}/s{s}"));
                rows.push(ResultRow::estimate("crossing", Some(s), &e));
            }
        }
        TaskSpec::Ind { q, s, delta, .. } => {
            let e = estimate_ind(&model, *q, *s, *delta, &run)?;
            streams.push(format!("ind/Q{q}/S{s}"));
            rows.push(ResultRow::estimate("ind_defect", Some(*q), &e).with_note(format!("S={s} delta={delta}")));
        }
        TaskSpec::Renorm { q, r: rr, s, delta, .. } => {
            let rep = check_renormalization(&model, *q, *rr, *s, *delta, &run)?;
            streams.extend([format!("renorm/lhs/S{s}"), format!("renorm/small/R{rr}"), format!("renorm/ind/Q{q}/R{rr}")]);
            rows.push(ResultRow::estimate("lhs", Some(*s), &rep.lhs));
            rows.push(ResultRow::estimate("p_small", Some(*rr), &rep.p_small));
            rows.push(ResultRow::estimate("ind", Some(*q), &rep.ind));
            let mut rhs = ResultRow::value("rhs", Some(*s), rep.rhs, r);
            rhs.ci_low = Some(rep.rhs_low);
            rhs.ci_high = Some(rep.rhs_high);
            rows.push(rhs);
            rows.push(ResultRow::value("big_n", None, rep.big_n as f64, r));
            rows.push(ResultRow::value("n", None, rep.n as f64, r));
            rows.push(ResultRow::value("k_max", None, rep.k_max as f64, r));
            rows.push(ResultRow::value("c_d", None, rep.c_d, r));
            let verdict = format!("{:?}", rep.verdict).to_lowercase();
            let vacuous = if rep.vacuous { " (vacuous: n = 0)" } else { "" };
            rows.push(ResultRow::value("verdict", None, f64::NAN, r).with_note(format!("{verdict}{vacuous}")));
            rows.last_mut().unwrap().mean = None;
            for c in &rep.caveats {
                rows.push(ResultRow::warning("caveat", None, r, c));
            }
        }
        TaskSpec::BallShape { t, bins, half_width, pilot_replicas, pilot_factor, .. } => {
            let params = BallParams {
                bins: *bins,
                half_width: *half_width,
                pilot_replicas: *pilot_replicas,
                pilot_factor: *pilot_factor,
            };
            let fit = ball_shape(&model, t, &params, &run)?;
            streams.extend(["ball/pilot".to_string(), "ball/extent".to_string()]);
            for (a, e) in fit.angles.iter().zip(&fit.pilot_mu) {
                rows.push(ResultRow::estimate("pilot_mu", Some(*a), e));
            }
            for (a, e) in fit.angles.iter().zip(&fit.directional_mu) {
                rows.push(ResultRow::estimate("directional_mu", Some(*a), e));
            }
            for b in &fit.scales {
                let row = match b.hausdorff {
                    Some(d) => ResultRow::value("hausdorff", Some(b.t), d, r),
                    None => ResultRow::warning("hausdorff", Some(b.t), r, "no limit shape in the vanishing regime"),
                };
                rows.push(row);
                let mut g = ResultRow::value("growth", Some(b.t), b.growth, r);
                if b.touches_boundary {
                    g.note = "warning: ball reached the domain boundary".into();
                }
                rows.push(g);
            }
            let regime = match fit.regime {
                BallRegime::Convex => "convex",
                BallRegime::VanishingMu => "vanishing-mu",
            };
            let mut row = ResultRow::value("regime", None, fit.mu_distance, r);
            row.note = regime.into();
            rows.push(row);
        }
    }
    Ok(TaskOutput { rows, streams, files })
}

fn sample_files(files: &mut Vec<(String, Vec<u8>)>, i: usize, medium: &Medium) -> Result<(&'static str, f64)> {
    match medium {
        Medium::Continuum(c) => {
            let mut bin = Vec::new();
            write_binary(&mut bin, c)?;
            let mut text = Vec::new();
            write_csv(&mut text, c)?;
            files.push((format!("sample-r{i}.bin"), bin));
            files.push((format!("sample-r{i}.csv"), text));
            if c.first_non_binary().is_none() {
                Ok(("white_fraction", c.white_fraction()))
            } else {
                Ok(("mean_density", c.density().iter().sum::<f64>() / c.density().len() as f64))
            }
        }
        Medium::Lattice(w) => {
            let grid = w.grid();
            let dim = grid.dim();
            let mut text = String::from(if dim == 2 { "x,y,axis,weight\n" } else { "x,y,z,axis,weight\n" });
            let mut sum = 0.0;
            let mut count = 0usize;
            for v in 0..grid.node_count() {
                let m = grid.multi(v);
                for axis in 0..dim {
                    if m[axis] + 1 >= grid.extents()[axis] {
                        continue;
                    }
                    let x = w.weight(v, axis);
                    sum += x;
                    count += 1;
                    let c = grid.coords(v);
                    let coords: Vec<String> = c[..dim].iter().map(|c| format!("{c}")).collect();
                    text.push_str(&format!("{},{axis},{x}\n", coords.join(",")));
                }
            }
            files.push((format!("weights-r{i}.csv"), text.into_bytes()));
            Ok(("mean_weight", sum / count.max(1) as f64))
        }
    }
}

/// SHA-256 of the canonical config (thread count excluded), hex.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical().as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamRecord {
    pub family: String,
    /// Full label; replica `r` of the family is stream `(master, r, label)`.
    pub label: String,
    pub master: u64,
    pub replicas: usize,
}

/// Summary of a finished run; serialized as the JSONL manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub task: String,
    pub config: String,
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub streams: Vec<StreamRecord>,
    pub wall_seconds: f64,
    pub warnings: usize,
}

impl RunManifest {
    /// Run header line followed by one object for the task.
    pub fn to_jsonl(&self) -> String {
        let header = serde_json::json!({
            "record": "run",
            "config_hash": self.config_hash,
            "seed": self.seed,
            "version": self.version,
            "config": self.config,
            "files": self.files,
            "wall_seconds": self.wall_seconds,
        });
        let task = serde_json::json!({
            "record": "task",
            "task": self.task,
            "seed": self.seed,
            "streams": self.streams,
            "rows_file": "results.csv",
            "warnings": self.warnings,
            "wall_seconds": self.wall_seconds,
        });
        format!("{header}\n{task}\n")
    }
}

/// Fresh directory `<root>/<hash16>-<seed>[-k]`; existing runs are never touched.
pub fn fresh_run_dir(root: &Path, cfg: &ExperimentConfig) -> Result<PathBuf> {
    fs::create_dir_all(root)?;
    let base = format!("{}-{}", &config_hash(cfg)[..16], cfg.seed);
    for k in 0.. {
        let name = if k == 0 { base.clone() } else { format!("{base}-{k}") };
        let dir = root.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

/// Runs `cfg` with its own thread count and writes config, CSV and manifest
/// into a fresh subdirectory of `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let output = Execution::with_threads(cfg.threads, || run_task(cfg, Execution::Parallel))?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let dir = fresh_run_dir(out, cfg)?;
    let mut names = vec!["config.toml".to_string(), "results.csv".to_string()];
    fs::write(dir.join("config.toml"), cfg.canonical())?;
    fs::write(dir.join("results.csv"), output.csv()?)?;
    for (name, bytes) in &output.files {
        fs::write(dir.join(name), bytes)?;
        names.push(name.clone());
    }
    names.push("manifest.jsonl".into());
    let root = RngSeed::new(cfg.seed, 0, RUN_LABEL);
    let manifest = RunManifest {
        config_hash: config_hash(cfg),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        task: cfg.task.name().into(),
        config: cfg.canonical(),
        dir: dir.clone(),
        files: names,
        streams: output
            .streams
            .iter()
            .map(|f| StreamRecord { family: f.clone(), label: root.child(f).label, master: cfg.seed, replicas: cfg.task.replicas() })
            .collect(),
        wall_seconds,
        warnings: output.rows.iter().filter(|r| r.is_warning()).count(),
    };
    fs::write(dir.join("manifest.jsonl"), manifest.to_jsonl())?;
    Ok(manifest)
}

/// Process exit code for a failed run: 2 for configuration problems, 3 for
/// an exceeded resource budget, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } => 3,
        Error::Io(_) | Error::Format(_) => 1,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::validate_config;

    fn cfg(text: &str) -> ExperimentConfig {
        validate_config(text).unwrap()
    }

    const CONSTANT_MU: &str = "seed = 3\n[model]\nkind = \"constant\"\nvalue = 1.0\n[grid]\nspacing = 0.5\n[task]\nkind = \"mu\"\nreplicas = 4\ndirection = [1.0, 0.0]\nn = [4, 8]\n";

    #[test]
    fn constant_mu_rows_are_exact() {
        let out = run_task(&cfg(CONSTANT_MU), Execution::Sequential).unwrap();
        let mu: Vec<_> = out.rows.iter().filter(|r| r.quantity == "mu").collect();
        assert_eq!(mu.len(), 2);
        for r in mu {
            assert_eq!(r.mean, Some(1.0));
            assert_eq!(r.stderr, Some(0.0));
        }
        let text = String::from_utf8(out.csv().unwrap()).unwrap();
        assert!(text.starts_with("quantity,scale,mean,stderr,ci_low,ci_high,replicas,note\nmu,4,1,0,1,1,4,\n"), "{text}");
    }

    #[test]
    fn parallel_and_sequential_csv_agree() {
        let c = cfg("seed = 5\n[model]\nkind = \"bernoulli-lattice\"\np = 0.5\n[task]\nkind = \"one-arm\"\nreplicas = 40\nradii = [3.0, 5.0, 7.0]\n");
        let a = run_task(&c, Execution::Parallel).unwrap().csv().unwrap();
        let b = run_task(&c, Execution::Sequential).unwrap().csv().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hash_ignores_threads() {
        let a = cfg(CONSTANT_MU);
        let mut b = a.clone();
        b.threads = Some(7);
        assert_eq!(config_hash(&a), config_hash(&b));
        b.seed = 4;
        assert_ne!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn csv_quotes_notes_with_commas() {
        let rows = vec![ResultRow::warning("x", Some(0.5), 3, "a, b")];
        let text = String::from_utf8(results_csv(&rows).unwrap()).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "x,0.5,,,,,3,\"warning: a, b\"");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Budget { nodes: 2, budget: 1 }), 3);
        assert_eq!(exit_code(&Error::param("p", "bad")), 2);
        assert_eq!(exit_code(&Error::Io("disk".into())), 1);
    }
}
