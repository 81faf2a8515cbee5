use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;
use willmore_core::{Error, Result};

pub const THREADS_ENV: &str = "WILLMORE_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidParameter(format!(
                "format must be csv or json, got '{s}'"
            ))),
        }
    }
}

/// Flags shared by every subcommand. Each can also be given in a `--config`
/// file as `name = value` (long flag name without dashes); flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Catalog surface name (see `surfaces`).
    #[arg(long)]
    pub surface: Option<String>,
    /// Mesh file (.obj, .off or .ndim) instead of a catalog surface.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Surface parameters, e.g. `a=1,cutoff=500`.
    #[arg(long)]
    pub params: Option<String>,
    /// Shorthand for the `offset` parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    /// Shorthand for the `cutoff` parameter.
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Center of density balls, comma separated; defaults to the origin.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    /// Largest radius of the density schedule.
    #[arg(long = "r-max")]
    pub r_max: Option<f64>,
    /// Number of radii in the density schedule (spanning two decades).
    #[arg(long = "n-radii")]
    pub n_radii: Option<usize>,
    /// Inversion base point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub base: Option<String>,
    /// Flatness centers separated by `;`, each `x,y,z` or `pole`.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<String>,
    /// Flatness scales, comma separated.
    #[arg(long)]
    pub scales: Option<String>,
    /// Sample spacing as a fraction of each flatness scale.
    #[arg(long = "spacing-ratio")]
    pub spacing_ratio: Option<f64>,
    /// Starting radius of small-radius density fits.
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Parameter samples per chart for pointwise checks.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Mesh refinement relative to each chart's grid.
    #[arg(long)]
    pub refine: Option<usize>,
    /// Relative tolerance of the finite topology verdict.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Seed for sampled parameter points.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to WILLMORE_LAB_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    /// key = value file supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved run settings. `threads` and `out` are excluded from the
/// saved copy since they do not affect results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub surface: Option<String>,
    pub mesh: Option<PathBuf>,
    pub params: Option<String>,
    pub offset: Option<f64>,
    pub cutoff: Option<f64>,
    pub center: Option<String>,
    pub r_max: Option<f64>,
    pub n_radii: usize,
    pub base: Option<String>,
    pub xi: Option<String>,
    pub scales: Option<String>,
    pub spacing_ratio: Option<f64>,
    pub sigma0: f64,
    pub samples: usize,
    pub refine: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub format: Option<Format>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

const KEYS: &[&str] = &[
    "surface",
    "mesh",
    "params",
    "offset",
    "cutoff",
    "center",
    "r-max",
    "n-radii",
    "base",
    "xi",
    "scales",
    "spacing-ratio",
    "sigma0",
    "samples",
    "refine",
    "tolerance",
    "seed",
    "format",
    "out",
    "threads",
];

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: format!("expected key = value, got '{line}'"),
        })?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("unknown key '{k}'"),
            });
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::InvalidParameter(format!("config value '{v}' for '{key}' is invalid")))
        })
        .transpose()
}

impl RunConfig {
    pub fn resolve(command: &str, args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => parse_config(&fs::read_to_string(p)?)?,
            None => BTreeMap::new(),
        };
        let env_threads = std::env::var(THREADS_ENV).ok().map(|v| {
            v.parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))
        });
        let threads = match pick(args.threads, &file, "threads")? {
            Some(t) => Some(t),
            None => env_threads.transpose()?,
        };
        if threads == Some(0) {
            return Err(Error::InvalidParameter("threads must be at least 1".into()));
        }
        let cfg = RunConfig {
            command: command.to_string(),
            surface: pick(args.surface.clone(), &file, "surface")?,
            mesh: pick(args.mesh.clone(), &file, "mesh")?,
            params: pick(args.params.clone(), &file, "params")?,
            offset: pick(args.offset, &file, "offset")?,
            cutoff: pick(args.cutoff, &file, "cutoff")?,
            center: pick(args.center.clone(), &file, "center")?,
            r_max: pick(args.r_max, &file, "r-max")?,
            n_radii: pick(args.n_radii, &file, "n-radii")?.unwrap_or(13),
            base: pick(args.base.clone(), &file, "base")?,
            xi: pick(args.xi.clone(), &file, "xi")?,
            scales: pick(args.scales.clone(), &file, "scales")?,
            spacing_ratio: pick(args.spacing_ratio, &file, "spacing-ratio")?,
            sigma0: pick(args.sigma0, &file, "sigma0")?.unwrap_or(0.04),
            samples: pick(args.samples, &file, "samples")?.unwrap_or(100),
            refine: pick(args.refine, &file, "refine")?.unwrap_or(2),
            tolerance: pick(args.tolerance, &file, "tolerance")?.unwrap_or(0.02),
            seed: pick(args.seed, &file, "seed")?.unwrap_or(0),
            format: pick(args.format, &file, "format")?,
            out: pick(args.out.clone(), &file, "out")?.unwrap_or_else(|| PathBuf::from(".")),
            threads,
        };
        if cfg.surface.is_some() == cfg.mesh.is_some() {
            return Err(Error::InvalidParameter(
                "give exactly one of --surface and --mesh".into(),
            ));
        }
        Ok(cfg)
    }

    /// The settings as a config file that reproduces this run.
    pub fn to_text(&self) -> String {
        let mut s = format!("# {} run\n", self.command);
        let value = serde_json::to_value(self).expect("config serializes");
        for (k, v) in value.as_object().expect("config is an object") {
            if k == "command" || v.is_null() {
                continue;
            }
            let text = match v {
                serde_json::Value::String(x) => x.clone(),
                other => other.to_string(),
            };
            let _ = writeln!(s, "{} = {}", k.replace('_', "-"), text);
        }
        s
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }
}
