use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use mvfc::dataset::{generate_synthetic, write_multiview, SyntheticSpec};
use mvfc::harness::{self, ExperimentConfig, Metric};
use mvfc::stats::{self, ScoreTable};

#[derive(Parser)]
#[command(
    name = "mvfc",
    version,
    about = "Multi-view fuzzy clustering experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One seeded run of the first grid cell; prints its metrics.
    Fit {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Write the run's convergence trace to this CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Full grid × runs experiment; writes report.csv, summary.json, traces/.
    Grid {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Friedman test and Holm post-hoc on a datasets × algorithms score CSV.
    Stats {
        scores: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Smaller scores are better.
        #[arg(long)]
        lower_is_better: bool,
        /// Also write friedman.csv and holm.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic multi-view dataset (view_k.csv, labels.csv).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 150)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        clusters: usize,
        /// Hidden rank; defaults to the cluster count.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "10,8")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Experiment settings: a TOML file, then flag overrides.
#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// fcm | cofkm | hss | shared_nmf+fcm
    #[arg(long)]
    algorithm: Option<String>,

    /// View CSVs (samples as rows), comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    views: Vec<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    has_header: bool,
    #[arg(long)]
    no_normalize: bool,

    #[arg(long)]
    synth_n: Option<usize>,
    #[arg(long)]
    synth_clusters: Option<usize>,
    #[arg(long)]
    synth_rank: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    synth_dims: Vec<usize>,
    #[arg(long)]
    synth_noise: Option<f64>,
    #[arg(long)]
    synth_seed: Option<u64>,

    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    rank: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    fuzzifier: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    cofkm_eta: Vec<f64>,
    /// Fill unset λ, η and r axes with the full search ranges.
    #[arg(long)]
    full_ranges: bool,

    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    h_inner_steps: Option<usize>,
}

fn path_value(p: &Path) -> Value {
    Value::String(p.to_string_lossy().into_owned())
}

fn int(v: impl TryInto<i64>) -> Result<Value> {
    Ok(Value::Integer(
        v.try_into()
            .map_err(|_| anyhow::anyhow!("integer out of range"))?,
    ))
}

fn table_mut<'a>(t: &'a mut Table, key: &str) -> Result<&'a mut Table> {
    let entry = t
        .entry(key.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    entry
        .as_table_mut()
        .with_context(|| format!("config key {key:?} must be a table"))
}

/// Resolves relative dataset and output paths against the config file's
/// directory.
fn rebase_paths(t: &mut Table, base: &Path) {
    let rebase = |v: &mut Value| {
        if let Value::String(s) = v {
            if Path::new(s.as_str()).is_relative() {
                *s = base.join(s.as_str()).to_string_lossy().into_owned();
            }
        }
    };
    if let Some(v) = t.get_mut("output_dir") {
        rebase(v);
    }
    if let Some(Value::Table(ds)) = t.get_mut("dataset") {
        if let Some(v) = ds.get_mut("labels") {
            rebase(v);
        }
        if let Some(Value::Array(views)) = ds.get_mut("views") {
            views.iter_mut().for_each(rebase);
        }
    }
}

impl ExperimentArgs {
    fn to_config(&self) -> Result<ExperimentConfig> {
        let mut t = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                let mut t: Table = text
                    .parse()
                    .with_context(|| format!("parsing config {}", path.display()))?;
                let base = path.parent().unwrap_or(Path::new("."));
                rebase_paths(&mut t, base);
                t
            }
            None => Table::new(),
        };

        if let Some(a) = &self.algorithm {
            t.insert("algorithm".into(), Value::String(a.clone()));
        }

        if !self.views.is_empty() || self.labels.is_some() {
            let ds = table_mut(&mut t, "dataset")?;
            if ds.get("kind").and_then(Value::as_str) != Some("files") {
                ds.clear();
                ds.insert("kind".into(), Value::String("files".into()));
            }
            if !self.views.is_empty() {
                ds.insert(
                    "views".into(),
                    Value::Array(self.views.iter().map(|p| path_value(p)).collect()),
                );
            }
            if let Some(l) = &self.labels {
                ds.insert("labels".into(), path_value(l));
            }
        }
        if self.has_header || self.no_normalize {
            let ds = table_mut(&mut t, "dataset")?;
            if self.has_header {
                ds.insert("has_header".into(), Value::Boolean(true));
            }
            if self.no_normalize {
                ds.insert("normalize".into(), Value::Boolean(false));
            }
        }

        let synth_given = self.synth_n.is_some()
            || self.synth_clusters.is_some()
            || self.synth_rank.is_some()
            || !self.synth_dims.is_empty()
            || self.synth_noise.is_some()
            || self.synth_seed.is_some();
        if synth_given {
            let ds = table_mut(&mut t, "dataset")?;
            if ds.get("kind").and_then(Value::as_str) != Some("synthetic") {
                ds.clear();
                ds.insert("kind".into(), Value::String("synthetic".into()));
                ds.insert("n".into(), int(150)?);
                ds.insert("c_true".into(), int(3)?);
                ds.insert("r_true".into(), int(3)?);
                ds.insert("view_dims".into(), Value::Array(vec![int(10)?, int(8)?]));
                ds.insert("noise_sigma".into(), Value::Float(0.0));
                ds.insert("seed".into(), int(0)?);
            }
            if let Some(n) = self.synth_n {
                ds.insert("n".into(), int(n)?);
            }
            if let Some(c) = self.synth_clusters {
                ds.insert("c_true".into(), int(c)?);
                if self.synth_rank.is_none() {
                    ds.insert("r_true".into(), int(c)?);
                }
            }
            if let Some(r) = self.synth_rank {
                ds.insert("r_true".into(), int(r)?);
            }
            if !self.synth_dims.is_empty() {
                let dims = self
                    .synth_dims
                    .iter()
                    .map(|&d| int(d))
                    .collect::<Result<_>>()?;
                ds.insert("view_dims".into(), Value::Array(dims));
            }
            if let Some(s) = self.synth_noise {
                ds.insert("noise_sigma".into(), Value::Float(s));
            }
            if let Some(s) = self.synth_seed {
                ds.insert("seed".into(), int(s)?);
            }
        }

        let floats = |v: &[f64]| Value::Array(v.iter().map(|&x| Value::Float(x)).collect());
        let grid_overrides: [(&str, Option<Value>); 5] = [
            (
                "lambda",
                (!self.lambda.is_empty()).then(|| floats(&self.lambda)),
            ),
            ("eta", (!self.eta.is_empty()).then(|| floats(&self.eta))),
            (
                "rank",
                if self.rank.is_empty() {
                    None
                } else {
                    Some(Value::Array(
                        self.rank.iter().map(|&r| int(r)).collect::<Result<_>>()?,
                    ))
                },
            ),
            (
                "fuzzifier",
                (!self.fuzzifier.is_empty()).then(|| floats(&self.fuzzifier)),
            ),
            (
                "cofkm_eta",
                (!self.cofkm_eta.is_empty()).then(|| floats(&self.cofkm_eta)),
            ),
        ];
        for (key, value) in grid_overrides {
            if let Some(v) = value {
                table_mut(&mut t, "grid")?.insert(key.into(), v);
            }
        }
        if self.full_ranges {
            table_mut(&mut t, "grid")?.insert("full_ranges".into(), Value::Boolean(true));
        }

        if let Some(c) = self.clusters {
            t.insert("clusters".into(), int(c)?);
        }
        if let Some(r) = self.runs {
            t.insert("runs_per_cell".into(), int(r)?);
        }
        if let Some(s) = self.base_seed {
            t.insert("base_seed".into(), int(s)?);
        }
        if let Some(o) = &self.output_dir {
            t.insert("output_dir".into(), path_value(o));
        }
        if let Some(x) = self.tol {
            t.insert("tol".into(), Value::Float(x));
        }
        if let Some(x) = self.t_max {
            t.insert("t_max".into(), int(x)?);
        }
        if let Some(x) = self.h_inner_steps {
            t.insert("h_inner_steps".into(), int(x)?);
        }

        if !t.contains_key("dataset") {
            bail!("no dataset: pass --config, --views/--labels, or --synth-* flags");
        }
        if !t.contains_key("algorithm") {
            bail!("no algorithm: pass --algorithm or set it in the config");
        }
        Value::Table(t)
            .try_into()
            .context("invalid experiment configuration")
    }
}

fn fit(exp: &ExperimentArgs, trace: Option<&Path>) -> Result<()> {
    let cfg = exp.to_config()?;
    let plan = harness::plan(&cfg)?;
    let cell = &plan.cells[0];
    let record = harness::run_once(&cfg, &plan, cell, 0)?;
    println!("dataset     {}", plan.dataset_name);
    println!("algorithm   {}", cfg.algorithm.name());
    println!("seed        {}", record.seed);
    println!("params      {}", describe_params(cell));
    println!("nmi         {:.6}", record.nmi);
    println!("ri          {:.6}", record.ri);
    println!("objective   {:.6e}", record.objective);
    println!("iterations  {}", record.iterations);
    println!("converged   {}", record.converged);
    if let Some(path) = trace {
        let mut buf = Vec::new();
        record.trace.write_csv(&mut buf)?;
        fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn describe_params(cell: &harness::CellParams) -> String {
    let mut parts = vec![format!("m={}", cell.fuzzifier)];
    if let Some(x) = cell.lambda {
        parts.push(format!("lambda={x}"));
    }
    if let Some(x) = cell.eta {
        parts.push(format!("eta={x}"));
    }
    if let Some(x) = cell.rank {
        parts.push(format!("r={x}"));
    }
    if let Some(x) = cell.cofkm_eta {
        parts.push(format!("cofkm_eta={x}"));
    }
    parts.join(" ")
}

fn grid(exp: &ExperimentArgs) -> Result<()> {
    let cfg = exp.to_config()?;
    let report = harness::run_and_write(&cfg)?;
    println!(
        "{} cells × {} runs of {} on {} written to {}",
        report.cells.len(),
        report.runs_per_cell,
        cfg.algorithm.name(),
        report.dataset,
        cfg.output_dir.display()
    );
    for metric in [Metric::Nmi, Metric::Ri] {
        let cell = report.best_cell(metric);
        let agg = match metric {
            Metric::Nmi => cell.nmi,
            Metric::Ri => cell.ri,
        };
        println!(
            "best {:?} (oracle selection): cell {} [{}] mean {:.4} variance {:.4e}",
            metric,
            cell.cell,
            describe_params(&cell.params),
            agg.mean,
            agg.variance
        );
    }
    Ok(())
}

fn run_stats(scores: &Path, alpha: f64, lower_is_better: bool, out: Option<&Path>) -> Result<()> {
    let table = ScoreTable::read_csv(scores, !lower_is_better)?;
    let fr = stats::friedman(&table, alpha)?;
    let holm = stats::holm_posthoc(&fr, table.n_datasets(), alpha);
    print!("{}", stats::render_friedman(&fr));
    println!();
    print!("{}", stats::render_holm(&holm));
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("friedman.csv"), stats::friedman_csv(&fr))?;
        fs::write(dir.join("holm.csv"), stats::holm_csv(&holm))?;
    }
    Ok(())
}

fn synth(spec: &SyntheticSpec, out: &Path) -> Result<()> {
    let ds = generate_synthetic(spec)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let files = write_multiview(&ds, out)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit { exp, trace } => fit(&exp, trace.as_deref()),
        Command::Grid { exp } => grid(&exp),
        Command::Stats {
            scores,
            alpha,
            lower_is_better,
            out,
        } => run_stats(&scores, alpha, lower_is_better, out.as_deref()),
        Command::Synth {
            out,
            n,
            clusters,
            rank,
            dims,
            noise,
            seed,
        } => synth(
            &SyntheticSpec {
                n,
                c_true: clusters,
                r_true: rank.unwrap_or(clusters),
                view_dims: dims,
                noise_sigma: noise,
                seed,
            },
            &out,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
