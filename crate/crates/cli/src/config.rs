//! `key = value` run configuration. Unknown or repeated keys are errors.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use romforge::fom::GenerateConfig;
use romforge::gpr::{GprConfig, KernelFamily};
use romforge::rom::{CaeTrainConfig, CvConfig, Method, ScalingMode};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub generate: GenerateConfig,
    pub bounds: Vec<(f64, f64)>,
    pub n_samples: usize,
    pub method: Method,
    pub k: usize,
    pub pod_k_list: Vec<usize>,
    pub cae_k_list: Vec<usize>,
    pub cae: CaeTrainConfig,
    pub gpr: GprConfig,
    pub data_path: PathBuf,
    pub surrogate_path: PathBuf,
    pub prediction_path: PathBuf,
    pub report_path: PathBuf,
    pub plot_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cv = CvConfig::default();
        RunConfig {
            seed: 0,
            generate: GenerateConfig::default(),
            bounds: vec![(1.0, 2.0), (1.0, 2.0), (100.0, 400.0)],
            n_samples: 500,
            method: Method::PodGpr,
            k: 5,
            pod_k_list: cv.pod_ks,
            cae_k_list: cv.cae_ks,
            cae: cv.cae,
            gpr: cv.gpr,
            data_path: "snapshots.rsnap".into(),
            surrogate_path: "surrogate.rsurr".into(),
            prediction_path: "prediction.rsnap".into(),
            report_path: "cv_report.csv".into(),
            plot_dir: "plots".into(),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("{key}: cannot parse '{v}'"))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{key}: expected true or false, got '{v}'")),
    }
}

fn parse_bounds(key: &str, v: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("{key}: expected 'lo, hi', got '{v}'"));
    }
    let lo: f64 = parse_num(key, parts[0])?;
    let hi: f64 = parse_num(key, parts[1])?;
    if !(lo < hi) {
        return Err(format!(
            "{key}: lower bound {lo} must be below upper bound {hi}"
        ));
    }
    Ok((lo, hi))
}

/// Comma-separated ROM dimensions. `a..b` is an inclusive range and
/// `a..b:s` steps by `s`.
pub fn parse_k_list(v: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, rest)) = item.split_once("..") {
            let (b, step) = match rest.split_once(':') {
                Some((b, s)) => (b, parse_num::<usize>("k list", s.trim())?),
                None => (rest, 1),
            };
            let a: usize = parse_num("k list", a.trim())?;
            let b: usize = parse_num("k list", b.trim())?;
            if step == 0 || a > b {
                return Err(format!("k list: bad range '{item}'"));
            }
            out.extend((a..=b).step_by(step));
        } else {
            out.push(parse_num("k list", item)?);
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(format!("k list '{v}' must name positive dimensions"));
    }
    Ok(out)
}

fn render_k_list(ks: &[usize]) -> String {
    ks.iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub const KEYS: &[&str] = &[
    "seed",
    "nx",
    "ny",
    "lid_speed",
    "solver_tol",
    "solver_max_iters",
    "sor_omega",
    "vorticity_relax",
    "central_blend",
    "poisson_sweeps",
    "allow_partial",
    "lx_bounds",
    "ly_bounds",
    "re_bounds",
    "n_samples",
    "method",
    "k",
    "pod_k_list",
    "cae_k_list",
    "cae_width_scale",
    "cae_epochs",
    "cae_patience",
    "cae_batch",
    "cae_learning_rate",
    "cae_alpha",
    "cae_scaling",
    "gpr_kernel",
    "gpr_nu",
    "gpr_noise",
    "gpr_restarts",
    "gpr_max_iters",
    "data_path",
    "surrogate_path",
    "prediction_path",
    "report_path",
    "plot_dir",
];

impl RunConfig {
    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        let g = &mut self.generate;
        match key {
            "seed" => self.seed = parse_num(key, v)?,
            "nx" => g.nx = parse_num(key, v)?,
            "ny" => g.ny = parse_num(key, v)?,
            "lid_speed" => g.lid_speed = parse_num(key, v)?,
            "solver_tol" => g.solver.tol = parse_num(key, v)?,
            "solver_max_iters" => g.solver.max_iters = parse_num(key, v)?,
            "sor_omega" => g.solver.sor_omega = parse_num(key, v)?,
            "vorticity_relax" => g.solver.vorticity_relax = parse_num(key, v)?,
            "central_blend" => g.solver.central_blend = parse_num(key, v)?,
            "poisson_sweeps" => g.solver.poisson_sweeps = parse_num(key, v)?,
            "allow_partial" => g.allow_partial = parse_bool(key, v)?,
            "lx_bounds" => self.bounds[0] = parse_bounds(key, v)?,
            "ly_bounds" => self.bounds[1] = parse_bounds(key, v)?,
            "re_bounds" => self.bounds[2] = parse_bounds(key, v)?,
            "n_samples" => self.n_samples = parse_num(key, v)?,
            "method" => self.method = v.parse().map_err(|e: romforge::RomError| e.to_string())?,
            "k" => self.k = parse_num(key, v)?,
            "pod_k_list" => self.pod_k_list = parse_k_list(v)?,
            "cae_k_list" => self.cae_k_list = parse_k_list(v)?,
            "cae_width_scale" => self.cae.width_scale = parse_num(key, v)?,
            "cae_epochs" => self.cae.max_epochs = parse_num(key, v)?,
            "cae_patience" => self.cae.patience = parse_num(key, v)?,
            "cae_batch" => self.cae.batch_size = parse_num(key, v)?,
            "cae_learning_rate" => self.cae.learning_rate = parse_num(key, v)?,
            "cae_alpha" => self.cae.leaky_slope = parse_num(key, v)?,
            "cae_scaling" => {
                self.cae.scaling = ScalingMode::from_str(v).map_err(|e| e.to_string())?;
            }
            "gpr_kernel" => {
                self.gpr.family = KernelFamily::from_str(v).map_err(|e| e.to_string())?
            }
            "gpr_nu" => self.gpr.nu = parse_num(key, v)?,
            "gpr_noise" => self.gpr.noise = parse_num(key, v)?,
            "gpr_restarts" => self.gpr.restarts = parse_num(key, v)?,
            "gpr_max_iters" => self.gpr.max_iters = parse_num(key, v)?,
            "data_path" => self.data_path = v.into(),
            "surrogate_path" => self.surrogate_path = v.into(),
            "prediction_path" => self.prediction_path = v.into(),
            "report_path" => self.report_path = v.into(),
            "plot_dir" => self.plot_dir = v.into(),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        let g = &self.generate;
        let b = |(lo, hi): (f64, f64)| format!("{lo}, {hi}");
        match key {
            "seed" => self.seed.to_string(),
            "nx" => g.nx.to_string(),
            "ny" => g.ny.to_string(),
            "lid_speed" => g.lid_speed.to_string(),
            "solver_tol" => format!("{:e}", g.solver.tol),
            "solver_max_iters" => g.solver.max_iters.to_string(),
            "sor_omega" => g.solver.sor_omega.to_string(),
            "vorticity_relax" => g.solver.vorticity_relax.to_string(),
            "central_blend" => g.solver.central_blend.to_string(),
            "poisson_sweeps" => g.solver.poisson_sweeps.to_string(),
            "allow_partial" => g.allow_partial.to_string(),
            "lx_bounds" => b(self.bounds[0]),
            "ly_bounds" => b(self.bounds[1]),
            "re_bounds" => b(self.bounds[2]),
            "n_samples" => self.n_samples.to_string(),
            "method" => self.method.to_string(),
            "k" => self.k.to_string(),
            "pod_k_list" => render_k_list(&self.pod_k_list),
            "cae_k_list" => render_k_list(&self.cae_k_list),
            "cae_width_scale" => self.cae.width_scale.to_string(),
            "cae_epochs" => self.cae.max_epochs.to_string(),
            "cae_patience" => self.cae.patience.to_string(),
            "cae_batch" => self.cae.batch_size.to_string(),
            "cae_learning_rate" => format!("{:e}", self.cae.learning_rate),
            "cae_alpha" => self.cae.leaky_slope.to_string(),
            "cae_scaling" => self.cae.scaling.name().to_string(),
            "gpr_kernel" => self.gpr.family.name().to_string(),
            "gpr_nu" => self.gpr.nu.to_string(),
            "gpr_noise" => format!("{:e}", self.gpr.noise),
            "gpr_restarts" => self.gpr.restarts.to_string(),
            "gpr_max_iters" => self.gpr.max_iters.to_string(),
            "data_path" => self.data_path.display().to_string(),
            "surrogate_path" => self.surrogate_path.display().to_string(),
            "prediction_path" => self.prediction_path.display().to_string(),
            "report_path" => self.report_path.display().to_string(),
            "plot_dir" => self.plot_dir.display().to_string(),
            _ => unreachable!("key list and getter out of sync: {key}"),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Config { line: i + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(bad(format!("key '{key}' given twice")));
            }
            cfg.set(key, value.trim()).map_err(bad)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| romforge::RomError::io(path, e))?;
        Self::parse(&text)
    }

    /// Every key in a fixed order; parsing the result gives back `self`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key));
        }
        s
    }

    /// SHA-256 of [`RunConfig::render`].
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.render().as_bytes()).into()
    }

    pub fn cv_config(&self) -> CvConfig {
        CvConfig {
            pod_ks: self.pod_k_list.clone(),
            cae_ks: self.cae_k_list.clone(),
            gpr: self.gpr.clone(),
            cae: self.cae.clone(),
        }
    }
}
