//! Batch pipeline behind the `corrval` binary.
//!
//! Output tree under `--output`:
//!
//! ```text
//! subjects/<subject>/<variant>/{manifest.json,timeseries.csv,truth.json,labels.csv}
//! subjects/<subject>/<variant>/clusterings/<strategy>_<level>.json   (degrade)
//! subjects/<subject>/<variant>/mapping_<distance>.<fmt>              (map)
//! mapping_summary.<fmt>                                              (map)
//! scores.<fmt>                                                       (score)
//! distance_ranks.<fmt>, level_set_ci.<fmt>                           (evaluate-distances)
//! index_correlations.<fmt>                                           (evaluate-indices)
//! report/...                                                         (report)
//! ```
//!
//! Settings resolve as flags, then `CORRVAL_SEED` for the seed, then the JSON
//! file given by `--config`, then defaults.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::canonical::valid_patterns;
use crate::core_model::{segment_correlations, SegmentedClustering};
use crate::datagen::{self, degraded_set, generate_variant, read_subject, write_degraded, write_subject, SubjectSpec, Variant};
use crate::discrim_eval::{evaluate_distance, rank_distance_functions, CRITERIA, DEFAULT_BINS};
use crate::distances::DistanceFunction;
use crate::error::{Error, Result};
use crate::indices::{jaccard_index, ClusteringGeometry, IndexName};
use crate::mapping::{classification_report, map_all};
use crate::stats::{pearson_with_jaccard, step_down, wilcoxon_signed_rank, Sided};

pub const DEFAULT_SEED: u64 = 1;
/// Quality band for ground-truth clusterings.
pub const SWC_BAND: f64 = 0.8;
pub const DBI_BAND: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate synthetic subjects for every requested variant
    Generate,
    /// Map segment correlations to their nearest canonical pattern
    Map,
    /// Compute validity indices for the truth and degraded clusterings
    Score,
    /// Six-criterion evaluation and ranking of distance functions
    EvaluateDistances,
    /// Correlate internal indices with the Jaccard index
    EvaluateIndices,
    /// Write the 66 degraded clusterings per subject and variant
    Degrade,
    /// Summary tables for plotting, optionally checked against quality bands
    Report {
        /// Exit with status 4 when a check fails
        #[arg(long)]
        check: bool,
    },
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// JSON config file; flags take precedence over it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub subjects: Option<usize>,
    #[arg(long, global = true, env = "CORRVAL_SEED")]
    pub seed: Option<u64>,
    /// Comma-separated `<distribution>:<completeness>` list
    #[arg(long, global = true, value_delimiter = ',')]
    pub variants: Option<Vec<String>>,
    /// Comma-separated distance keys, e.g. `l1,l5,foerstner`
    #[arg(long, global = true, value_delimiter = ',')]
    pub distances: Option<Vec<String>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub indices: Option<Vec<String>>,
    /// Segment length range as `min-max`
    #[arg(long, global = true)]
    pub segment_length: Option<String>,
    #[arg(long, global = true)]
    pub segments: Option<usize>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads; 0 uses all cores
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Parser)]
#[command(name = "corrval", version, about = "Canonical-pattern validation of correlation-based clusterings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub subjects: Option<usize>,
    pub seed: Option<u64>,
    pub variants: Option<Vec<String>>,
    pub distances: Option<Vec<String>>,
    pub indices: Option<Vec<String>>,
    pub segment_length: Option<[usize; 2]>,
    pub segments: Option<usize>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub subjects: usize,
    pub seed: u64,
    pub variants: Vec<Variant>,
    /// `None` selects the command's own default.
    pub distances: Option<Vec<String>>,
    pub indices: Vec<IndexName>,
    pub segment_length: (usize, usize),
    pub segments: usize,
    pub output_dir: PathBuf,
    pub threads: usize,
    pub format: Format,
}

pub fn default_variants() -> Vec<Variant> {
    ["normal:complete", "normal:sparse", "downsampled:complete"]
        .iter()
        .map(|v| v.parse().unwrap())
        .collect()
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            subjects: 5,
            seed: DEFAULT_SEED,
            variants: default_variants(),
            distances: None,
            indices: IndexName::ALL.to_vec(),
            segment_length: (300, 3000),
            segments: 100,
            output_dir: PathBuf::from("corrval-out"),
            threads: 0,
            format: Format::Csv,
        }
    }

    pub fn resolve(command: Command, flags: &Flags) -> Result<Self> {
        let file: ConfigFile = match &flags.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("config {}: {e}", p.display())))?
            }
            None => ConfigFile::default(),
        };
        let mut c = Self::new(command);
        if let Some(v) = flags.subjects.or(file.subjects) {
            c.subjects = v;
        }
        if let Some(v) = flags.seed.or(file.seed) {
            c.seed = v;
        }
        if let Some(v) = flags.variants.clone().or(file.variants) {
            c.variants = v.iter().map(|s| s.trim().parse()).collect::<Result<_>>()?;
        }
        if let Some(v) = flags.distances.clone().or(file.distances) {
            for k in &v {
                k.trim().parse::<DistanceFunction>()?;
            }
            c.distances = Some(v.into_iter().map(|k| k.trim().to_string()).collect());
        }
        if let Some(v) = flags.indices.clone().or(file.indices) {
            c.indices = v.iter().map(|s| s.trim().parse()).collect::<Result<_>>()?;
        }
        if let Some(s) = &flags.segment_length {
            c.segment_length = parse_range(s)?;
        } else if let Some([lo, hi]) = file.segment_length {
            c.segment_length = (lo, hi);
        }
        if let Some(v) = flags.segments.or(file.segments) {
            c.segments = v;
        }
        if let Some(v) = flags.output.clone().or(file.output) {
            c.output_dir = v;
        }
        if let Some(v) = flags.threads.or(file.threads) {
            c.threads = v;
        }
        if let Some(v) = flags.format.or(file.format) {
            c.format = v;
        }
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if self.subjects == 0 {
            return Err(Error::Config("--subjects must be at least 1".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("no variants selected".into()));
        }
        let (lo, hi) = self.segment_length;
        if lo < 2 || lo > hi {
            return Err(Error::Config(format!("bad segment length range {lo}-{hi}")));
        }
        if self.segments == 0 {
            return Err(Error::Config("--segments must be at least 1".into()));
        }
        Ok(())
    }

    pub fn spec(&self, subject: u64) -> SubjectSpec {
        SubjectSpec {
            n_segments: self.segments,
            segment_length_range: self.segment_length,
            ..SubjectSpec::desk(self.seed, subject)
        }
    }

    /// Distances for this command, falling back to `default` keys.
    pub fn distances_or(&self, default: &[&str]) -> Result<Vec<DistanceFunction>> {
        match &self.distances {
            Some(keys) => keys.iter().map(|k| k.parse()).collect(),
            None => default.iter().map(|k| k.parse()).collect(),
        }
    }

    fn jobs(&self) -> Vec<(u64, Variant)> {
        (0..self.subjects as u64)
            .flat_map(|s| self.variants.iter().map(move |v| (s, *v)))
            .collect()
    }

    fn subject_dir(&self, subject: u64, v: Variant) -> PathBuf {
        self.output_dir.join("subjects").join(self.spec(subject).id()).join(v.slug())
    }

    fn table_path(&self, stem: &str) -> PathBuf {
        self.output_dir.join(format!("{stem}.{}", self.format.ext()))
    }
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("segment length {s:?} should look like 300-3000"));
    let (a, b) = s.split_once(['-', ':']).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// A string table written as CSV or as a JSON array of objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn col(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidInput(format!("table has no column {name:?}")))
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        match format {
            Format::Csv => {
                let mut wr = csv::Writer::from_path(path)?;
                wr.write_record(&self.columns)?;
                for r in &self.rows {
                    wr.write_record(r)?;
                }
                wr.flush()?;
            }
            Format::Json => {
                let records: Vec<serde_json::Map<String, Value>> = self
                    .rows
                    .iter()
                    .map(|r| self.columns.iter().cloned().zip(r.iter().map(|v| json_cell(v))).collect())
                    .collect();
                std::fs::write(path, serde_json::to_string_pretty(&records)?)?;
            }
        }
        Ok(())
    }

    pub fn read(path: &Path, format: Format) -> Result<Self> {
        if !path.exists() {
            return Err(Error::Config(format!("missing input {}; run the producing command first", path.display())));
        }
        match format {
            Format::Csv => {
                let mut rd = csv::Reader::from_path(path)?;
                let columns = rd.headers()?.iter().map(str::to_string).collect();
                let rows = rd
                    .records()
                    .map(|r| Ok(r?.iter().map(str::to_string).collect()))
                    .collect::<Result<_>>()?;
                Ok(Self { columns, rows })
            }
            Format::Json => {
                let records: Vec<serde_json::Map<String, Value>> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                let columns: Vec<String> = records.first().map(|r| r.keys().cloned().collect()).unwrap_or_default();
                let rows = records
                    .iter()
                    .map(|r| {
                        columns
                            .iter()
                            .map(|c| match r.get(c) {
                                Some(Value::String(s)) => s.clone(),
                                Some(Value::Null) | None => String::new(),
                                Some(v) => v.to_string(),
                            })
                            .collect()
                    })
                    .collect();
                Ok(Self { columns, rows })
            }
        }
    }
}

fn json_cell(v: &str) -> Value {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() && !v.starts_with('+') => serde_json::Number::from_f64(x).map_or_else(|| Value::String(v.into()), Value::Number),
        _ if v == "true" || v == "false" => Value::Bool(v == "true"),
        _ => Value::String(v.into()),
    }
}

fn num(v: &str) -> Result<f64> {
    match v {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => v.parse().map_err(|_| Error::InvalidInput(format!("not a number: {v:?}"))),
    }
}

/// Status printed on stdout after a successful command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub command: Command,
    pub written: Vec<PathBuf>,
    /// `Some(false)` when `report --check` found a failing check.
    pub check_passed: Option<bool>,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.command {
        Command::Generate => generate(cfg),
        Command::Degrade => degrade(cfg),
        Command::Map => map(cfg),
        Command::Score => score(cfg),
        Command::EvaluateDistances => evaluate_distances(cfg),
        Command::EvaluateIndices => evaluate_indices(cfg),
        Command::Report { check } => report(cfg, check),
    })
}

fn outcome(cfg: &RunConfig, written: Vec<PathBuf>) -> Outcome {
    Outcome { command: cfg.command, written, check_passed: None }
}

pub fn generate(cfg: &RunConfig) -> Result<Outcome> {
    let written = cfg
        .jobs()
        .par_iter()
        .map(|&(s, v)| {
            let spec = cfg.spec(s);
            let subject = generate_variant(&spec, v)?;
            let dir = cfg.subject_dir(s, v);
            write_subject(&dir, &spec, &subject)?;
            Ok(dir)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(outcome(cfg, written))
}

fn load(cfg: &RunConfig, s: u64, v: Variant) -> Result<datagen::Subject> {
    let dir = cfg.subject_dir(s, v);
    if !dir.join("manifest.json").exists() {
        return Err(Error::Config(format!("{} not generated; run `generate` first", dir.display())));
    }
    let (manifest, subject) = read_subject(&dir)?;
    if manifest.seed != cfg.seed || manifest.variant != v {
        return Err(Error::Config(format!("{} was generated with a different seed or variant", dir.display())));
    }
    Ok(subject)
}

pub fn degrade(cfg: &RunConfig) -> Result<Outcome> {
    let written = cfg
        .jobs()
        .par_iter()
        .map(|&(s, v)| {
            let subject = load(cfg, s, v)?;
            let set = degraded_set(&subject.truth, cfg.seed, s)?;
            let dir = cfg.subject_dir(s, v);
            write_degraded(&dir, &set)?;
            Ok(dir.join("clusterings"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(outcome(cfg, written))
}

pub fn map(cfg: &RunConfig) -> Result<Outcome> {
    let distances = cfg.distances_or(&["l1"])?;
    let patterns = valid_patterns(3)?;
    let results = cfg
        .jobs()
        .par_iter()
        .map(|&(s, v)| {
            let subject = load(cfg, s, v)?;
            let mats = segment_correlations(&subject.ts, subject.truth.segmentation())?;
            let mut rows = Vec::new();
            let mut written = Vec::new();
            for d in &distances {
                let assignments = map_all(&mats, &patterns, d)?;
                let mut t = Table::new(&["segment_index", "pattern_id", "distance", "margin", "truth"]);
                for (a, truth) in assignments.iter().zip(&subject.labels) {
                    t.push(vec![
                        a.segment_index.to_string(),
                        a.pattern_id.to_string(),
                        a.distance.to_string(),
                        a.runner_up_margin.to_string(),
                        truth.to_string(),
                    ]);
                }
                let path = cfg.subject_dir(s, v).join(format!("mapping_{}.{}", d.key(), cfg.format.ext()));
                t.write(&path, cfg.format)?;
                written.push(path);
                let pred: Vec<u64> = assignments.iter().map(|a| a.pattern_id).collect();
                let rep = classification_report(&subject.labels, &pred)?;
                rows.push(vec![subject.id.clone(), v.to_string(), d.key(), rep.macro_f1.to_string()]);
            }
            Ok((rows, written))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = Table::new(&["subject", "variant", "distance", "macro_f1"]);
    let mut written = Vec::new();
    for (rows, w) in results {
        rows.into_iter().for_each(|r| summary.push(r));
        written.extend(w);
    }
    let path = cfg.table_path("mapping_summary");
    summary.write(&path, cfg.format)?;
    written.push(path);
    Ok(outcome(cfg, written))
}

/// Truth plus the degraded clusterings found on disk, in file-name order.
fn clusterings(cfg: &RunConfig, s: u64, v: Variant, subject: &datagen::Subject) -> Result<Vec<(String, SegmentedClustering)>> {
    let dir = cfg.subject_dir(s, v).join("clusterings");
    let mut out = vec![("truth".to_string(), subject.truth.clone())];
    if dir.exists() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .map(|e| Ok(e?.path()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        files.sort();
        for f in files {
            let id = f.file_stem().unwrap().to_string_lossy().into_owned();
            out.push((id, SegmentedClustering::from_json(&std::fs::read_to_string(&f)?)?));
        }
    }
    Ok(out)
}

pub fn score(cfg: &RunConfig) -> Result<Outcome> {
    let distances = cfg.distances_or(&["l5"])?;
    let internal: Vec<IndexName> = cfg.indices.iter().copied().filter(|i| *i != IndexName::Jaccard).collect();
    let with_jaccard = cfg.indices.contains(&IndexName::Jaccard);
    let results = cfg
        .jobs()
        .par_iter()
        .map(|&(s, v)| {
            let subject = load(cfg, s, v)?;
            let n = subject.ts.n_rows();
            let mut rows = Vec::new();
            for (id, sc) in clusterings(cfg, s, v, &subject)? {
                let base = |index: &str, dist: &str, value: f64| {
                    vec![subject.id.clone(), v.to_string(), id.clone(), index.to_string(), dist.to_string(), value.to_string()]
                };
                if with_jaccard {
                    rows.push(base("jaccard", "none", jaccard_index(&subject.truth, &sc, n)?));
                }
                if internal.is_empty() {
                    continue;
                }
                let g = ClusteringGeometry::new(&subject.ts, &sc)?;
                for d in &distances {
                    for idx in &internal {
                        let value = match idx {
                            IndexName::Swc => g.swc(d),
                            IndexName::Dbi => g.dbi(d),
                            IndexName::Vrc => g.vrc(d),
                            IndexName::Pbm => g.pbm(d),
                            IndexName::Jaccard => unreachable!(),
                        }?;
                        rows.push(base(idx.as_str(), &d.key(), value));
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["subject", "variant", "clustering_id", "index", "distance", "value"]);
    results.into_iter().flatten().for_each(|r| t.push(r));
    let path = cfg.table_path("scores");
    t.write(&path, cfg.format)?;
    Ok(outcome(cfg, vec![path]))
}

pub fn evaluate_distances(cfg: &RunConfig) -> Result<Outcome> {
    let keys: Vec<&str> = crate::distances::DISTANCE_KEYS.to_vec();
    let distances = cfg.distances_or(&keys)?;
    let patterns = valid_patterns(3)?;
    let results = cfg
        .jobs()
        .par_iter()
        .map(|&(s, v)| {
            let subject = load(cfg, s, v)?;
            let mats = segment_correlations(&subject.ts, subject.truth.segmentation())?;
            let evals = distances
                .par_iter()
                .map(|d| evaluate_distance(&mats, &subject.labels, &patterns, d, DEFAULT_BINS))
                .collect::<Result<Vec<_>>>()?;
            let ranked = rank_distance_functions(&evals.iter().map(|e| (e.distance.clone(), e.criteria)).collect::<Vec<_>>());
            let mut ranks = Vec::new();
            for r in &ranked {
                for c in 0..6 {
                    ranks.push(vec![subject.id.clone(), v.to_string(), r.distance.clone(), CRITERIA[c].to_string(), r.values[c].to_string(), r.ranks[c].to_string()]);
                }
                ranks.push(vec![subject.id.clone(), v.to_string(), r.distance.clone(), "avg_rank".into(), String::new(), r.average_rank.to_string()]);
            }
            let mut cis = Vec::new();
            for e in &evals {
                for i in &e.monotonicity.intervals {
                    cis.push(vec![
                        subject.id.clone(),
                        v.to_string(),
                        e.distance.clone(),
                        i.from.to_string(),
                        i.to.to_string(),
                        i.difference.to_string(),
                        i.lower.to_string(),
                        i.upper.to_string(),
                    ]);
                }
            }
            Ok((ranks, cis))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ranks = Table::new(&["subject", "variant", "distance", "criterion", "value", "rank"]);
    let mut cis = Table::new(&["subject", "variant", "distance", "from_level", "to_level", "difference", "lower", "upper"]);
    for (r, c) in results {
        r.into_iter().for_each(|x| ranks.push(x));
        c.into_iter().for_each(|x| cis.push(x));
    }
    let (p1, p2) = (cfg.table_path("distance_ranks"), cfg.table_path("level_set_ci"));
    ranks.write(&p1, cfg.format)?;
    cis.write(&p2, cfg.format)?;
    Ok(outcome(cfg, vec![p1, p2]))
}

type ScoreKey = (String, String, String, String);

/// `(subject, variant, index, distance) → clustering id → value`.
fn scores_by_key(t: &Table) -> Result<BTreeMap<ScoreKey, BTreeMap<String, f64>>> {
    let [s, v, c, i, d, x] = ["subject", "variant", "clustering_id", "index", "distance", "value"].map(|n| t.col(n));
    let (s, v, c, i, d, x) = (s?, v?, c?, i?, d?, x?);
    let mut out: BTreeMap<ScoreKey, BTreeMap<String, f64>> = BTreeMap::new();
    for r in &t.rows {
        out.entry((r[s].clone(), r[v].clone(), r[i].clone(), r[d].clone()))
            .or_default()
            .insert(r[c].clone(), num(&r[x])?);
    }
    Ok(out)
}

pub fn evaluate_indices(cfg: &RunConfig) -> Result<Outcome> {
    let scores = scores_by_key(&Table::read(&cfg.table_path("scores"), cfg.format)?)?;
    let mut t = Table::new(&["subject", "variant", "index", "distance", "r", "p", "n", "viable"]);
    for ((s, v, idx, d), values) in &scores {
        if idx == "jaccard" {
            continue;
        }
        let Some(jac) = scores.get(&(s.clone(), v.clone(), "jaccard".into(), "none".into())) else {
            return Err(Error::Config("scores lack jaccard rows; rerun `score` with jaccard in --indices".into()));
        };
        let ids: Vec<&String> = values.keys().filter(|k| jac.contains_key(*k)).collect();
        let x: Vec<f64> = ids.iter().map(|k| values[*k]).collect();
        let y: Vec<f64> = ids.iter().map(|k| jac[*k]).collect();
        // infinite markers carry no linear information
        let finite: Vec<(f64, f64)> = x.iter().copied().zip(y).filter(|(a, _)| a.is_finite()).collect();
        let (fx, fy): (Vec<f64>, Vec<f64>) = finite.into_iter().unzip();
        let c = pearson_with_jaccard(&fx, &fy)?;
        t.push(vec![s.clone(), v.clone(), idx.clone(), d.clone(), c.r.to_string(), c.p_value.to_string(), c.n.to_string(), (c.r.abs() >= 0.5).to_string()]);
    }
    let path = cfg.table_path("index_correlations");
    t.write(&path, cfg.format)?;
    Ok(outcome(cfg, vec![path]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean with a two-sided 95% t-interval.
fn mean_ci(xs: &[f64]) -> Result<(f64, f64, f64)> {
    let m = mean(xs);
    if xs.len() < 2 {
        return Ok((m, m, m));
    }
    let n = xs.len() as f64;
    let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 1.0).map_err(|e| Error::Numerical(e.to_string()))?.inverse_cdf(0.975);
    let h = t * sd / n.sqrt();
    Ok((m, m - h, m + h))
}

pub fn report(cfg: &RunConfig, check: bool) -> Result<Outcome> {
    let dir = cfg.output_dir.join("report");
    let mut written = Vec::new();
    let mut checks = Vec::new();
    let mut write = |t: &Table, stem: &str| -> Result<()> {
        let p = dir.join(format!("{stem}.{}", cfg.format.ext()));
        t.write(&p, cfg.format)?;
        written.push(p);
        Ok(())
    };

    let scores_path = cfg.table_path("scores");
    if scores_path.exists() {
        let scores = scores_by_key(&Table::read(&scores_path, cfg.format)?)?;
        let truth_value = |s: &str, v: &str, idx: &str, d: &str| {
            scores.get(&(s.into(), v.into(), idx.into(), d.into())).and_then(|m| m.get("truth")).copied()
        };
        let mut thresholds = Table::new(&["subject", "variant", "distance", "swc", "dbi", "band"]);
        let mut ci = Table::new(&["variant", "distance", "index", "mean", "lower", "upper", "n"]);
        let mut per_group: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
        let keys: BTreeSet<(String, String, String)> = scores.keys().map(|(s, v, _, d)| (s.clone(), v.clone(), d.clone())).collect();
        for (s, v, d) in &keys {
            if let (Some(swc), Some(dbi)) = (truth_value(s, v, "swc", d), truth_value(s, v, "dbi", d)) {
                let band = if swc > SWC_BAND && dbi < DBI_BAND { "strong" } else { "weak" };
                thresholds.push(vec![s.clone(), v.clone(), d.clone(), swc.to_string(), dbi.to_string(), band.into()]);
            }
            for idx in ["swc", "dbi", "vrc", "pbm"] {
                if let Some(x) = truth_value(s, v, idx, d) {
                    per_group.entry((v.clone(), d.clone(), idx.into())).or_default().push(x);
                }
            }
        }
        for ((v, d, idx), xs) in &per_group {
            let (m, lo, hi) = mean_ci(xs)?;
            ci.push(vec![v.clone(), d.clone(), idx.clone(), m.to_string(), lo.to_string(), hi.to_string(), xs.len().to_string()]);
        }
        write(&thresholds, "thresholds")?;
        write(&ci, "ci_table")?;

        let mut scatter = Table::new(&["subject", "variant", "clustering_id", "index", "distance", "value", "jaccard"]);
        for ((s, v, idx, d), values) in &scores {
            if idx == "jaccard" {
                continue;
            }
            if let Some(jac) = scores.get(&(s.clone(), v.clone(), "jaccard".into(), "none".into())) {
                for (c, x) in values {
                    if let Some(j) = jac.get(c) {
                        scatter.push(vec![s.clone(), v.clone(), c.clone(), idx.clone(), d.clone(), x.to_string(), j.to_string()]);
                    }
                }
            }
        }
        write(&scatter, "index_jaccard_scatter")?;

        let nc = Variant::NORMAL_COMPLETE.to_string();
        let swc: Vec<f64> = keys.iter().filter(|(_, v, d)| *v == nc && d == "l5").filter_map(|(s, v, d)| truth_value(s, v, "swc", d)).collect();
        let dbi: Vec<f64> = keys.iter().filter(|(_, v, d)| *v == nc && d == "l5").filter_map(|(s, v, d)| truth_value(s, v, "dbi", d)).collect();
        if !swc.is_empty() && !dbi.is_empty() {
            let (ms, md) = (mean(&swc), mean(&dbi));
            checks.push(Check {
                name: "truth_band_normal_complete_l5".into(),
                passed: (0.95..=1.0).contains(&ms) && (0.0..=0.1).contains(&md),
                detail: format!("mean SWC {ms:.4} in [0.95, 1], mean DBI {md:.4} in [0, 0.1]"),
            });
        }
    }

    let corr_path = cfg.table_path("index_correlations");
    if corr_path.exists() {
        let t = Table::read(&corr_path, cfg.format)?;
        let [s, v, i, d, r] = ["subject", "variant", "index", "distance", "r"].map(|n| t.col(n));
        let (s, v, i, d, r) = (s?, v?, i?, d?, r?);
        let nc = Variant::NORMAL_COMPLETE.to_string();
        for (idx, ok) in [("swc", (|r: f64| r >= 0.85) as fn(f64) -> bool), ("dbi", |r: f64| r <= -0.85)] {
            let rs: Vec<(String, f64)> = t
                .rows
                .iter()
                .filter(|row| row[v] == nc && row[i] == idx && row[d] == "l5")
                .map(|row| Ok((row[s].clone(), num(&row[r])?)))
                .collect::<Result<_>>()?;
            if !rs.is_empty() {
                checks.push(Check {
                    name: format!("{idx}_l5_tracks_jaccard"),
                    passed: rs.iter().all(|(_, r)| ok(*r)),
                    detail: rs.iter().map(|(s, r)| format!("{s}: r={r:.3}")).collect::<Vec<_>>().join(", "),
                });
            }
        }
    }

    let map_path = cfg.table_path("mapping_summary");
    if map_path.exists() {
        let t = Table::read(&map_path, cfg.format)?;
        let [v, d, f] = ["variant", "distance", "macro_f1"].map(|n| t.col(n));
        let (v, d, f) = (v?, d?, f?);
        let mut by_group: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for row in &t.rows {
            by_group.entry((row[v].clone(), row[d].clone())).or_default().push(num(&row[f])?);
        }
        let mut summary = Table::new(&["variant", "distance", "mean_macro_f1", "min_macro_f1", "n"]);
        for ((variant, distance), xs) in &by_group {
            let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
            summary.push(vec![variant.clone(), distance.clone(), mean(xs).to_string(), min.to_string(), xs.len().to_string()]);
        }
        write(&summary, "mapping_f1")?;
        let nc = Variant::NORMAL_COMPLETE.to_string();
        let f1: Vec<f64> = t.rows.iter().filter(|r| r[v] == nc && r[d] == "l1").map(|r| num(&r[f])).collect::<Result<_>>()?;
        if !f1.is_empty() {
            let min = f1.iter().copied().fold(f64::INFINITY, f64::min);
            checks.push(Check { name: "mapping_f1_l1".into(), passed: min >= 0.99, detail: format!("min macro-F1 {min:.4} >= 0.99") });
        }
    }

    let ranks_path = cfg.table_path("distance_ranks");
    if ranks_path.exists() {
        let t = Table::read(&ranks_path, cfg.format)?;
        let [s, v, d, c, r] = ["subject", "variant", "distance", "criterion", "rank"].map(|n| t.col(n));
        let (s, v, d, c, r) = (s?, v?, d?, c?, r?);
        let mut avg: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>> = BTreeMap::new();
        for row in t.rows.iter().filter(|row| row[c] == "avg_rank") {
            avg.entry(row[v].clone()).or_default().entry(row[d].clone()).or_default().insert(row[s].clone(), num(&row[r])?);
        }
        let mut tests_json = Vec::new();
        for (variant, by_distance) in &avg {
            let subjects: BTreeSet<&String> = by_distance.values().flat_map(|m| m.keys()).collect();
            let mut cols = vec!["subject"];
            cols.extend(by_distance.keys().map(String::as_str));
            let mut heat = Table::new(&cols);
            for subj in &subjects {
                let mut row = vec![subj.to_string()];
                row.extend(by_distance.values().map(|m| m.get(*subj).map_or(String::new(), |x| x.to_string())));
                heat.push(row);
            }
            write(&heat, &format!("rank_heatmap_{}", variant.replace(':', "_")))?;

            let means: BTreeMap<&String, f64> = by_distance.iter().map(|(k, m)| (k, mean(&m.values().copied().collect::<Vec<_>>()))).collect();
            if let Some(best) = means.iter().min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(b.0))).map(|(k, _)| (*k).clone()) {
                let tests: Vec<(String, Option<_>)> = by_distance
                    .iter()
                    .filter(|(k, _)| **k != best)
                    .map(|(k, m)| {
                        let diffs: Vec<f64> = by_distance[&best]
                            .iter()
                            .filter_map(|(subj, b)| m.get(subj).map(|o| o - b))
                            .collect();
                        Ok((format!("{best} < {k}"), wilcoxon_signed_rank(&diffs, Sided::One, 0.05, 1e-3)?))
                    })
                    .collect::<Result<_>>()?;
                tests_json.extend(step_down(&format!("distance_ranking/{variant}"), &tests, 0.05));
            }
            if variant == &Variant::NORMAL_COMPLETE.to_string() && means.contains_key(&"l1".to_string()) {
                let mut sorted: Vec<f64> = means.values().copied().collect();
                sorted.sort_by(f64::total_cmp);
                let l1 = means[&"l1".to_string()];
                let position = sorted.iter().filter(|&&x| x < l1).count() + 1;
                checks.push(Check { name: "l1_top_two".into(), passed: position <= 2, detail: format!("l1 mean average rank {l1:.3}, position {position}") });
            }
        }
        let p = dir.join("tests.json");
        std::fs::create_dir_all(&dir)?;
        std::fs::write(&p, serde_json::to_string_pretty(&tests_json)?)?;
        written.push(p);
    }

    if written.is_empty() {
        return Err(Error::Config("nothing to report; run score, map or evaluate-distances first".into()));
    }
    let mut check_passed = None;
    if check {
        if checks.is_empty() {
            return Err(Error::Config("--check found no inputs to check".into()));
        }
        let p = dir.join("check.json");
        std::fs::write(&p, serde_json::to_string_pretty(&checks)?)?;
        written.push(p);
        check_passed = Some(checks.iter().all(|c| c.passed));
    }
    Ok(Outcome { command: cfg.command, written, check_passed })
}

/// Machine-readable error body printed on stderr.
pub fn error_json(e: &Error) -> Value {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() }, "exit_code": exit_code(e) })
}

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        "numerical" => 3,
        _ => 2,
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let err = Error::Config(e.to_string().trim().to_string());
            eprintln!("{}", error_json(&err));
            return 2;
        }
    };
    let result = RunConfig::resolve(cli.command, &cli.flags).and_then(|cfg| run(&cfg));
    match result {
        Ok(out) => {
            println!("{}", serde_json::to_string(&out).unwrap_or_default());
            if out.check_passed == Some(false) {
                4
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
