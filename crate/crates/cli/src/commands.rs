use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use romforge::fom::{generate_snapshots, ParameterSpace, DESIGN_NAMES};
use romforge::io::{
    load_surrogate, read_design_table, save_surrogate, write_atomic, write_design_table,
    SnapshotSet,
};
use romforge::linalg::SnapshotMatrix;
use romforge::rom::{
    cae_gpr_offline, canonical_order, five_fold_cv, pod_gpr_offline, Method, Provenance, RomModel,
    RomSurrogate,
};
use romforge::RomError;

use crate::config::RunConfig;
use crate::csvio::{export_csv, import_csv};
use crate::error::CliError;
use crate::plot::{companion_csv, render_svg, series_from_report};

/// Names of the velocity channels written by `generate`.
pub const CHANNEL_NAMES: [&str; 2] = ["u", "v"];

fn channel_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|c| {
            CHANNEL_NAMES
                .get(c)
                .map_or_else(|| format!("c{c}"), |s| s.to_string())
        })
        .collect()
}

/// `<path minus extension>.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

/// Where snapshot data comes from: a snapshot file, or one CSV per channel.
#[derive(Debug, Clone)]
pub enum DataSource {
    Snapshot(PathBuf),
    Csv {
        files: Vec<PathBuf>,
        ny: usize,
        nx: usize,
    },
}

impl DataSource {
    pub fn load(&self) -> Result<SnapshotSet, CliError> {
        match self {
            DataSource::Snapshot(p) => Ok(SnapshotSet::load(p)?),
            DataSource::Csv { files, ny, nx } => import_csv(files, *ny, *nx),
        }
    }
}

pub fn generate(cfg: &RunConfig, out: &Path, csv_dir: Option<&Path>) -> Result<(), CliError> {
    let space = ParameterSpace::new(cfg.bounds.clone())?;
    let start = Instant::now();
    let ds = generate_snapshots(&space, cfg.n_samples, cfg.seed, &cfg.generate)?;
    for s in &ds.summaries {
        match &s.error {
            None => println!(
                "solve {:4}: converged in {} iterations (residual {:.3e})",
                s.index, s.iterations, s.residual
            ),
            Some(e) => println!("solve {:4}: FAILED: {e}", s.index),
        }
    }
    let set = SnapshotSet::from_dataset(&ds);
    set.save(out)?;
    let design_path = sibling(out, "design.txt");
    write_design_table(&design_path, &DESIGN_NAMES, &ds.design)?;
    println!(
        "wrote {} snapshots (N = {}, grid {}x{}) to {} and {} in {:.1} s",
        set.len(),
        set.state_dim(),
        set.ny,
        set.nx,
        out.display(),
        design_path.display(),
        start.elapsed().as_secs_f64()
    );
    if let Some(dir) = csv_dir {
        let stem = out
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("snapshots");
        export_csv(&set, dir, stem, &CHANNEL_NAMES)?;
    }
    Ok(())
}

/// Splits off `max(1, n/10)` validation samples for early stopping, chosen
/// by a seeded permutation of the canonically ordered design.
pub fn train_validation_split(design: &[Vec<f64>], seed: u64) -> (Vec<usize>, Vec<usize>) {
    let canon = canonical_order(design);
    let mut perm = canon.clone();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = (design.len() / 10).max(1);
    let val: Vec<usize> = canon
        .iter()
        .copied()
        .filter(|i| perm[..n_val].contains(i))
        .collect();
    let train = canon.iter().copied().filter(|i| !val.contains(i)).collect();
    (train, val)
}

pub fn train(
    cfg: &RunConfig,
    method: Method,
    k: usize,
    data: &DataSource,
    out: &Path,
) -> Result<RomSurrogate, CliError> {
    let set = data.load()?;
    let mats = set.snapshot_matrices()?;
    let start = Instant::now();
    let (model, epochs) = match method {
        Method::PodGpr => {
            let per = mats
                .iter()
                .map(|s| pod_gpr_offline(s, k, &cfg.gpr, cfg.seed))
                .collect::<Result<Vec<_>, _>>()?;
            (RomModel::PodGpr(per), 0)
        }
        Method::CaeGpr => {
            if !set.is_structured() {
                return Err(CliError::usage(
                    "cae-gpr needs gridded data; this snapshot file is unstructured (n_y = n_x = 0)",
                ));
            }
            if set.len() < 2 {
                return Err(CliError::usage(
                    "cae-gpr needs at least two snapshots (one for validation)",
                ));
            }
            let (tr, va) = train_validation_split(&set.design, cfg.seed);
            let train: Vec<SnapshotMatrix> = mats
                .iter()
                .map(|s| s.select(&tr))
                .collect::<Result<_, _>>()?;
            let val: Vec<SnapshotMatrix> = mats
                .iter()
                .map(|s| s.select(&va))
                .collect::<Result<_, _>>()?;
            let tr_refs: Vec<&SnapshotMatrix> = train.iter().collect();
            let va_refs: Vec<&SnapshotMatrix> = val.iter().collect();
            let (m, hist) = cae_gpr_offline(
                &tr_refs, &va_refs, set.ny, set.nx, k, &cfg.cae, &cfg.gpr, cfg.seed,
            )?;
            println!(
                "trained autoencoder: {} epochs, best epoch {} (validation loss {:.4e})",
                hist.epochs(),
                hist.best_epoch,
                hist.best_val_loss()
            );
            (RomModel::CaeGpr(m), hist.epochs() as u64)
        }
    };
    let wall_time_s = start.elapsed().as_secs_f64();
    let provenance = Provenance {
        seed: cfg.seed,
        config_digest: cfg.digest(),
        wall_time_s,
        epochs,
    };
    let surrogate = RomSurrogate::new(model, set.ny, set.nx, provenance)?;
    save_surrogate(out, &surrogate)?;
    println!(
        "wrote {method} surrogate (k = {k}) to {} in {wall_time_s:.1} s",
        out.display()
    );
    Ok(surrogate)
}

/// Query points for `predict`: inline `--mu` values or a design table.
#[derive(Debug, Clone)]
pub enum Queries {
    Inline(Vec<Vec<f64>>),
    Table(PathBuf),
}

pub fn parse_mu(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad --mu value '{t}'")))
        })
        .collect()
}

pub fn predict(
    surrogate: &Path,
    queries: &Queries,
    out: &Path,
    csv_dir: Option<&Path>,
) -> Result<SnapshotSet, CliError> {
    let s = load_surrogate(surrogate)?;
    let points = match queries {
        Queries::Inline(v) => v.clone(),
        Queries::Table(p) => read_design_table(p)?,
    };
    if points.is_empty() {
        return Err(CliError::usage("no query points"));
    }
    println!(
        "{} surrogate, k = {}, {} channels",
        s.method(),
        s.k(),
        s.channels()
    );
    let n_state = s.state_dim();
    let mut channels = vec![nalgebra::DMatrix::zeros(n_state, points.len()); s.channels()];
    for (j, mu) in points.iter().enumerate() {
        let pred = s.predict(mu)?;
        for (c, x) in pred.iter().enumerate() {
            channels[c].set_column(j, &nalgebra::DVector::from_column_slice(x));
        }
    }
    let (ny, nx) = s.grid();
    let set = SnapshotSet::new(points, channels, ny, nx)?;
    set.save(out)?;
    println!("wrote {} predictions to {}", set.len(), out.display());
    if let Some(dir) = csv_dir {
        let stem = out
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("prediction");
        export_csv(&set, dir, stem, &CHANNEL_NAMES)?;
    }
    Ok(set)
}

pub fn evaluate(
    cfg: &RunConfig,
    data: &DataSource,
    methods: &[Method],
    k_override: Option<&[usize]>,
    out: &Path,
) -> Result<romforge::rom::CvReport, CliError> {
    let set = data.load()?;
    let mats = set.snapshot_matrices()?;
    let mut cv = cfg.cv_config();
    if let Some(ks) = k_override {
        cv.pod_ks = ks.to_vec();
        cv.cae_ks = ks.to_vec();
    }
    if !methods.contains(&Method::PodGpr) {
        cv.pod_ks.clear();
    }
    if !methods.contains(&Method::CaeGpr) {
        cv.cae_ks.clear();
    }
    if !cv.cae_ks.is_empty() && !set.is_structured() {
        return Err(CliError::usage(
            "cae-gpr needs gridded data; this snapshot file is unstructured",
        ));
    }
    let report = five_fold_cv(
        &mats,
        &channel_names(mats.len()),
        (set.ny, set.nx),
        &cv,
        cfg.seed,
    )?;
    write_atomic(out, report.to_csv().as_bytes())?;
    let timing = sibling(out, "timing.csv");
    write_atomic(&timing, report.timing_csv().as_bytes())?;
    println!("wrote {} and {}", out.display(), timing.display());
    Ok(report)
}

pub fn plot(report: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let bytes = std::fs::read(report).map_err(|e| RomError::io(report, e))?;
    let by_channel = series_from_report(&report.display().to_string(), &bytes)?;
    std::fs::create_dir_all(out_dir).map_err(|e| RomError::io(out_dir, e))?;
    let mut written = Vec::new();
    for (channel, series) in &by_channel {
        let svg = render_svg(&format!("cross-validation errors, {channel}"), series)?;
        let path = out_dir.join(format!("errors_{channel}.svg"));
        write_atomic(&path, svg.as_bytes())?;
        let csv_path = out_dir.join(format!("errors_{channel}.csv"));
        write_atomic(&csv_path, companion_csv(series).as_bytes())?;
        println!("wrote {}", path.display());
        written.push(path);
    }
    Ok(written)
}
