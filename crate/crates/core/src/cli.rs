//! `gpdiag` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::artifact::{read_json, to_json_with_provenance, write_atomic, Provenance};
use crate::dataset::{
    load_manifest, synth_records, ClassSignature, DatasetManifest, FaultDataset, FusionMode, ManifestClass,
    RecordFormat, SynthSpec,
};
use crate::diagnoser::{Diagnoser, PipelineConfig};
use crate::error::{Error, Result};
use crate::eval::{grid_search, misclassified_csv, noise_sweep, stratified_cv, ConfusionMatrix, CvConfig};
use crate::features::{ExtractorConfig, FeatureMethod};
use crate::gpc::GpcConfig;

/// Synthetic dataset request; anything omitted takes the generator default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthRequest {
    pub n_classes: usize,
    pub samples_per_class: usize,
    pub points_per_channel: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_rate_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<ClassSignature>>,
}

impl SynthRequest {
    pub fn to_spec(&self) -> SynthSpec {
        let mut spec = SynthSpec::with_classes(self.n_classes, self.samples_per_class, self.points_per_channel);
        if let Some(fs) = self.sampling_rate_hz {
            spec.sampling_rate_hz = fs;
        }
        if let Some(s) = self.noise_std {
            spec.noise_std = s;
        }
        if let Some(c) = &self.classes {
            spec.classes = c.clone();
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSource {
    /// A dataset manifest (signal files plus labels).
    Manifest(PathBuf),
    /// A `dataset.json` written by `ingest`.
    Dataset(PathBuf),
    /// Generated in memory from the master seed.
    Synth(SynthRequest),
}

fn default_method() -> FeatureMethod {
    FeatureMethod::KpcaGaussian
}

fn default_fusion() -> String {
    "concat".into()
}

fn default_noise() -> Vec<f64> {
    vec![0.0, 5.0, 10.0]
}

/// One JSON document describing an experiment. Command-line flags override
/// its fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<DatasetSource>,
    /// `concat` or the name of a single channel.
    pub fusion: String,
    pub method: FeatureMethod,
    pub pool: Vec<FeatureMethod>,
    pub extractor: ExtractorConfig,
    pub gpc: GpcConfig,
    pub cv: CvConfig,
    pub noise_percents: Vec<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            fusion: default_fusion(),
            method: default_method(),
            pool: FeatureMethod::DEFAULT_POOL.to_vec(),
            extractor: ExtractorConfig::default(),
            gpc: GpcConfig::default(),
            cv: CvConfig::default(),
            noise_percents: default_noise(),
            seed: None,
            out: None,
        }
    }
}

impl RunConfig {
    /// Reads a config file; relative dataset paths are taken relative to
    /// the file's directory.
    pub fn read(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        match &mut cfg.dataset {
            Some(DatasetSource::Manifest(p)) | Some(DatasetSource::Dataset(p)) if p.is_relative() => {
                *p = base.join(&*p);
            }
            _ => {}
        }
        Ok(cfg)
    }

    /// Hash of the configuration that determines results. The output
    /// directory is left out so relocating a run keeps its hash.
    pub fn sha256(&self) -> String {
        let mut hashed = self.clone();
        hashed.out = None;
        let text = serde_json::to_string(&hashed).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            extractor: self.extractor.clone(),
            gpc: self.gpc.clone(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "gpdiag", version, about = "Bearing-fault diagnosis with Gaussian-process classifiers")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct DataArgs {
    /// Dataset manifest to load.
    #[arg(long, conflicts_with = "dataset")]
    manifest: Option<PathBuf>,
    /// `dataset.json` written by `ingest`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// `concat` or a single channel name such as DE.
    #[arg(long)]
    fusion: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic recordings and their manifest.
    Synth {
        /// Synthetic dataset request (JSON); defaults to the config's.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Load a manifest, segment and fuse it into dataset.json.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Fit the extractor and ensemble on the whole dataset.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        method: Option<FeatureMethod>,
    },
    /// Classify segments with a trained model.
    Diagnose {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        extractor: PathBuf,
        /// Fused sample(s): CSV or raw little-endian f64.
        #[arg(long)]
        input: PathBuf,
    },
    /// Cross-validate every method of the pool on paired splits.
    Gridsearch {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated method ids.
        #[arg(long, value_delimiter = ',')]
        pool: Option<Vec<FeatureMethod>>,
    },
    /// Cross-validate one method at several noise levels.
    NoiseSweep {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        method: Option<FeatureMethod>,
        /// Comma-separated noise levels in percent.
        #[arg(long, value_delimiter = ',')]
        percents: Option<Vec<f64>>,
    },
    /// Cross-validate one method and write confusion and misclassification reports.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        method: Option<FeatureMethod>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        test_per_class: Option<usize>,
    },
}

impl DataArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = &self.manifest {
            cfg.dataset = Some(DatasetSource::Manifest(m.clone()));
        }
        if let Some(d) = &self.dataset {
            cfg.dataset = Some(DatasetSource::Dataset(d.clone()));
        }
        if let Some(f) = &self.fusion {
            cfg.fusion = f.clone();
        }
    }
}

struct Context {
    cfg: RunConfig,
    out: PathBuf,
    provenance: Provenance,
}

impl Context {
    fn new(cfg: RunConfig) -> Result<Self> {
        let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        let provenance = Provenance::new(cfg.sha256(), cfg.seed);
        Ok(Context { cfg, out, provenance })
    }

    fn seed(&self) -> Result<u64> {
        self.cfg
            .seed
            .ok_or_else(|| Error::InvalidArgument("a seed is required (--seed or \"seed\" in the config)".into()))
    }

    fn write_json(&self, name: &str, payload: &impl Serialize) -> Result<PathBuf> {
        let path = self.out.join(name);
        write_atomic(&path, to_json_with_provenance(payload, &self.provenance)?.as_bytes())?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.out.join(name);
        write_atomic(&path, text.as_bytes())?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn dataset(&self) -> Result<FaultDataset> {
        let fusion: FusionMode = self.cfg.fusion.parse()?;
        let ds = match &self.cfg.dataset {
            None => {
                return Err(Error::InvalidArgument(
                    "no dataset: pass --manifest or --dataset, or set \"dataset\" in the config".into(),
                ))
            }
            Some(DatasetSource::Manifest(p)) => load_manifest(p, &fusion)?,
            Some(DatasetSource::Dataset(p)) => {
                let ds: FaultDataset = read_json(p)?;
                ds.validate(false)?;
                select_channel(ds, &fusion)?
            }
            Some(DatasetSource::Synth(req)) => {
                let ds = crate::dataset::synth_dataset(&req.to_spec(), self.seed()?)?;
                select_channel(ds, &fusion)?
            }
        };
        log::info!(
            "dataset: {} samples, {} classes, channels {:?}",
            ds.len(),
            ds.class_map.len(),
            ds.channels
        );
        Ok(ds)
    }
}

/// Narrows an already fused dataset to one channel.
fn select_channel(ds: FaultDataset, fusion: &FusionMode) -> Result<FaultDataset> {
    let FusionMode::Single(name) = fusion else {
        return Ok(ds);
    };
    let c = ds
        .channels
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::UnknownChannel(name.clone()))?;
    let mut out = ds.clone();
    out.channels = vec![name.clone()];
    for (i, s) in out.samples.iter_mut().enumerate() {
        s.points = ds.channel_points(i, c).to_vec();
    }
    Ok(out)
}

#[derive(Serialize)]
struct Evaluation<'a> {
    method: FeatureMethod,
    cv: &'a crate::eval::CvResult,
    /// Confusion counts summed over the successful runs.
    confusion_total: Option<ConfusionMatrix>,
}

fn sum_confusions(cv: &crate::eval::CvResult) -> Option<ConfusionMatrix> {
    let mut iter = cv.runs.iter().filter_map(|r| r.confusion.as_ref());
    let mut total = iter.next()?.clone();
    for m in iter {
        for (row, add) in total.counts.iter_mut().zip(&m.counts) {
            for (a, b) in row.iter_mut().zip(add) {
                *a += b;
            }
        }
    }
    Some(total)
}

fn read_samples(path: &Path, input_len: usize) -> Result<Vec<Vec<f64>>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let values = match RecordFormat::from_path(path) {
        RecordFormat::Csv => crate::dataset::parse_csv(path, &bytes)?,
        RecordFormat::RawF64Le => crate::dataset::parse_raw(path, &bytes)?,
    };
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    if values.is_empty() || values.len() % input_len != 0 {
        return Err(Error::Shape(format!(
            "{}: {} values is not a whole number of {input_len}-point samples",
            path.display(),
            values.len()
        )));
    }
    Ok(values.chunks(input_len).map(<[f64]>::to_vec).collect())
}

fn cmd_synth(ctx: &Context, spec_path: Option<&Path>) -> Result<()> {
    let request = match (spec_path, &ctx.cfg.dataset) {
        (Some(p), _) => read_json::<SynthRequest>(p)?,
        (None, Some(DatasetSource::Synth(r))) => r.clone(),
        _ => return Err(Error::InvalidArgument("synth needs --spec or a synth dataset in the config".into())),
    };
    let spec = request.to_spec();
    let records = synth_records(&spec, ctx.seed()?)?;
    let mut classes = Vec::new();
    for (id, [de, fe]) in &records {
        let mut files = BTreeMap::new();
        for rec in [de, fe] {
            let name = format!("class{id}_{}.csv", rec.channel_id);
            let mut text = String::with_capacity(rec.samples.len() * 20);
            for v in &rec.samples {
                text.push_str(&v.to_string());
                text.push('\n');
            }
            ctx.write_text(&name, &text)?;
            files.insert(rec.channel_id.clone(), name);
        }
        classes.push(ManifestClass {
            id: *id,
            label: spec.classes[(*id - 1) as usize].label.clone(),
            files,
        });
    }
    let manifest = DatasetManifest {
        classes,
        sampling_rate_hz: spec.sampling_rate_hz,
        points_per_sample: spec.points_per_channel,
        samples_per_class: spec.samples_per_class,
        channels: Some(vec!["DE".into(), "FE".into()]),
        format: Some(RecordFormat::Csv),
    };
    ctx.write_json("manifest.json", &manifest)?;
    Ok(())
}

fn cmd_train(ctx: &Context) -> Result<()> {
    let ds = ctx.dataset()?;
    let d = Diagnoser::train(&ds, ctx.cfg.method, &ctx.cfg.pipeline(), ctx.seed()?)?;
    ctx.write_json("extractor.json", &d.extractor)?;
    ctx.write_json("model.json", &d.ensemble)?;
    Ok(())
}

fn cmd_diagnose(ctx: &Context, model: &Path, extractor: &Path, input: &Path) -> Result<()> {
    let d = Diagnoser::load(model, extractor)?;
    let results = read_samples(input, d.input_len())?
        .iter()
        .map(|s| d.diagnose(s))
        .collect::<Result<Vec<_>>>()?;
    let path = if results.len() == 1 {
        ctx.write_json("diagnosis.json", &results[0])?
    } else {
        ctx.write_json("diagnosis.json", &serde_json::json!({ "results": results }))?
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    print!("{text}");
    Ok(())
}

fn cmd_evaluate(ctx: &Context) -> Result<()> {
    let ds = ctx.dataset()?;
    let cv = stratified_cv(&ds, ctx.cfg.method, &ctx.cfg.pipeline(), &ctx.cfg.cv, ctx.seed()?)?;
    let total = sum_confusions(&cv);
    if let Some(m) = &total {
        ctx.write_text("confusion.csv", &m.to_csv())?;
    }
    ctx.write_text("misclassified.csv", &misclassified_csv(cv.misclassified()))?;
    ctx.write_json(
        "evaluation.json",
        &Evaluation {
            method: ctx.cfg.method,
            cv: &cv,
            confusion_total: total,
        },
    )?;
    log::info!("{}: mean {:.2}% (std {:.2})", cv.method, cv.mean, cv.std);
    Ok(())
}

fn cmd_gridsearch(ctx: &Context) -> Result<()> {
    let ds = ctx.dataset()?;
    let g = grid_search(&ds, &ctx.cfg.pool, &ctx.cfg.pipeline(), &ctx.cfg.cv, ctx.seed()?)?;
    for r in &g.results {
        log::info!("{}: mean {:.2}% (std {:.2}){}", r.method, r.mean, r.std, if r.failed { " failed" } else { "" });
    }
    log::info!("best method: {}", g.best_method);
    ctx.write_json("gridsearch.json", &g)?;
    Ok(())
}

fn cmd_noise_sweep(ctx: &Context) -> Result<()> {
    let ds = ctx.dataset()?;
    let levels = noise_sweep(
        &ds,
        &ctx.cfg.noise_percents,
        ctx.cfg.method,
        &ctx.cfg.pipeline(),
        &ctx.cfg.cv,
        ctx.seed()?,
    )?;
    ctx.write_json("noise_sweep.json", &serde_json::json!({ "levels": levels }))?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::read(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidArgument("--threads must be at least 1".into()));
        }
        // a pool may already exist when run() is called twice in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Synth { .. } | Command::Diagnose { .. } => {}
        Command::Ingest { data } | Command::Gridsearch { data, .. } => data.apply(&mut cfg),
        Command::Train { data, method }
        | Command::NoiseSweep { data, method, .. }
        | Command::Evaluate { data, method, .. } => {
            data.apply(&mut cfg);
            if let Some(m) = method {
                cfg.method = *m;
            }
        }
    }
    match &cli.command {
        Command::Gridsearch { pool: Some(p), .. } => cfg.pool = p.clone(),
        Command::NoiseSweep { percents: Some(p), .. } => cfg.noise_percents = p.clone(),
        Command::Evaluate {
            runs, test_per_class, ..
        } => {
            if let Some(r) = runs {
                cfg.cv.n_runs = *r;
            }
            if let Some(t) = test_per_class {
                cfg.cv.n_test_per_class = *t;
            }
        }
        _ => {}
    }

    let ctx = Context::new(cfg)?;
    match &cli.command {
        Command::Synth { spec } => cmd_synth(&ctx, spec.as_deref()),
        Command::Ingest { .. } => {
            let ds = ctx.dataset()?;
            ctx.write_json("dataset.json", &ds).map(|_| ())
        }
        Command::Train { .. } => cmd_train(&ctx),
        Command::Diagnose {
            model,
            extractor,
            input,
        } => cmd_diagnose(&ctx, model, extractor, input),
        Command::Gridsearch { .. } => cmd_gridsearch(&ctx),
        Command::NoiseSweep { .. } => cmd_noise_sweep(&ctx),
        Command::Evaluate { .. } => cmd_evaluate(&ctx),
    }
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit code: 0 success, 1 bad input or usage, 2 numerical failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 4, "gpc": {"budget": 10}}"#).unwrap();
        assert_eq!(cfg.seed, Some(4));
        assert_eq!(cfg.gpc.budget, 10);
        assert_eq!(cfg.gpc.n_restarts, 3);
        assert_eq!(cfg.pool.len(), 5);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 4}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"gpc": {"budjet": 4}}"#).is_err());
        let synth: RunConfig = serde_json::from_str(
            r#"{"dataset": {"synth": {"n_classes": 3, "samples_per_class": 4, "points_per_channel": 50}}}"#,
        )
        .unwrap();
        assert!(matches!(synth.dataset, Some(DatasetSource::Synth(_))));
    }

    #[test]
    fn hash_ignores_output_directory() {
        let mut a = RunConfig {
            seed: Some(1),
            ..RunConfig::default()
        };
        let h = a.sha256();
        a.out = Some("elsewhere".into());
        assert_eq!(a.sha256(), h);
        a.seed = Some(2);
        assert_ne!(a.sha256(), h);
        assert_eq!(h.len(), 64);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["gpdiag", "frobnicate"]), 1);
        assert_eq!(run(["gpdiag", "train", "--bogus"]), 1);
        assert_eq!(run(["gpdiag", "--help"]), 0);
    }
}
