use std::path::{Path, PathBuf};

use clap::Args;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use egorank_core::classify::Bucket;
use egorank_core::corpus::{
    generate_synthetic_corpus, synthetic_embeddings, write_activity_csv, write_members_csv, ActivityRecord,
    SynthConfig,
};
use egorank_core::targets::TargetError;

use crate::config::{BucketFilter, PipelineConfig};
use crate::error::CliError;
use crate::pipeline::{analyze, ingest, rank, select, target_error, BucketRanking, Bundle, IngestReport, Resources, TOOL_VERSION};
use crate::report::{
    ranking_csv, ranking_csv_path, ranking_json_path, targets_json_path, validate_targets_report, write_bytes,
    write_json, RankingReport, TargetsReport,
};

pub fn bundle_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.out_dir.join("bundle.json")
}

pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<(Bundle, IngestReport), CliError> {
    cfg.validate()?;
    let (bundle, report) = ingest(cfg)?;
    write_json(&bundle_path(cfg), &bundle)?;
    write_json(&cfg.out_dir.join("ingest_report.json"), &report)?;
    info!(
        "ingested {} documents, {} members, {} flagged non-English",
        report.documents, report.members, report.flagged_non_english
    );
    Ok((bundle, report))
}

fn read_bundle(cfg: &PipelineConfig) -> Result<Bundle, CliError> {
    let p = bundle_path(cfg);
    if !p.is_file() {
        return Err(CliError::Data(format!("{} not found; run `ingest` first", p.display())));
    }
    crate::report::read_json(&p)
}

fn rank_all(cfg: &PipelineConfig, bundle: &Bundle) -> Result<Vec<BucketRanking>, CliError> {
    let res = Resources::load(cfg)?;
    let analysis = analyze(bundle, &res, cfg.parallel)?;
    let hash = cfg.hash();
    let mut out = Vec::new();
    for bucket in cfg.bucket.buckets() {
        let r = rank(&analysis, bucket, cfg)?;
        write_bytes(&ranking_csv_path(&cfg.out_dir, bucket), &ranking_csv(&r.ranking))?;
        let mut warnings = analysis.warnings.clone();
        warnings.extend(r.warnings.iter().cloned());
        let report = RankingReport {
            tool_version: TOOL_VERSION.into(),
            config_hash: hash.clone(),
            bucket: bucket.to_string(),
            normalization: cfg.normalization,
            scored_documents: r.scores.len(),
            warnings,
            entries: r.ranking.entries.clone(),
        };
        write_json(&ranking_json_path(&cfg.out_dir, bucket), &report)?;
        info!("{bucket}: {} members ranked", r.ranking.len());
        out.push(r);
    }
    Ok(out)
}

pub fn cmd_rank(cfg: &PipelineConfig) -> Result<Vec<BucketRanking>, CliError> {
    cfg.validate()?;
    rank_all(cfg, &read_bundle(cfg)?)
}

fn targets_for(cfg: &PipelineConfig, bundle: &Bundle, rankings: &[BucketRanking]) -> Result<Vec<TargetsReport>, CliError> {
    let hash = cfg.hash();
    let single = matches!(cfg.bucket, BucketFilter::One(_));
    let mut out = Vec::new();
    for r in rankings {
        let bucket: Bucket = r.ranking.bucket;
        let report = match select(&r.ranking, &bundle.members, cfg) {
            Ok(sel) => {
                for w in &sel.warnings {
                    warn!("{bucket}: {w}");
                }
                TargetsReport::from_selection(&sel, cfg.threshold, &hash)
            }
            Err(e @ TargetError::RankingTooSmall { .. }) if !single => {
                warn!("{bucket}: {e}");
                TargetsReport::failed(bucket, cfg.n_it, cfg.threshold, &hash, e.to_string())
            }
            Err(e) => return Err(target_error(e)),
        };
        let path = targets_json_path(&cfg.out_dir, bucket);
        write_json(&path, &report)?;
        out.push(validate_targets_report(&path)?);
    }
    Ok(out)
}

pub fn cmd_targets(cfg: &PipelineConfig) -> Result<Vec<TargetsReport>, CliError> {
    cfg.validate()?;
    let bundle = read_bundle(cfg)?;
    let rankings = rank_all(cfg, &bundle)?;
    targets_for(cfg, &bundle, &rankings)
}

/// Ingest, rank and select in one go.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<Vec<TargetsReport>, CliError> {
    let (bundle, _) = cmd_ingest(cfg)?;
    let rankings = rank_all(cfg, &bundle)?;
    targets_for(cfg, &bundle, &rankings)
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Directory that receives the datasets, resources and config
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub members: usize,
    #[arg(long, default_value_t = 40)]
    pub docs_per_member: usize,
    #[arg(long, default_value_t = 40)]
    pub ego_docs: usize,
    #[arg(long, default_value_t = 10)]
    pub planted: usize,
    #[arg(long, default_value_t = 2)]
    pub mega_members: usize,
    #[arg(long, default_value_t = 2)]
    pub group_members: usize,
    #[arg(long, default_value_t = 5000)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    #[arg(long, default_value_t = 15)]
    pub n_it: usize,
}

/// Ground truth written next to a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub seed: u64,
    pub ego_bucket: String,
    pub planted_members: Vec<String>,
    pub mega_members: Vec<String>,
    pub group_members: Vec<String>,
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(CliError::data)?;
    Ok(buf)
}

/// Writes a synthetic corpus as the nine dataset files, embeddings, a
/// training set, its ground truth and a ready-to-run config.
pub fn cmd_synth(args: &SynthArgs) -> Result<SynthTruth, CliError> {
    let mut sc = SynthConfig::demo(args.seed);
    sc.members = args.members;
    sc.docs_per_member = args.docs_per_member;
    sc.ego_docs = args.ego_docs;
    sc.planted = args.planted;
    sc.mega_members = args.mega_members;
    sc.group_members = args.group_members;
    let synth = generate_synthetic_corpus(&sc).map_err(|e| CliError::Config(e.to_string()))?;
    if args.dim == 0 {
        return Err(CliError::Config("dim must be positive".into()));
    }
    let dir = &args.out;
    for (n, docs) in &synth.corpus.datasets {
        let records: Vec<ActivityRecord> = docs.iter().map(ActivityRecord::from_document).collect();
        let bytes = csv_bytes(|b| write_activity_csv(b, &records))?;
        write_bytes(&dir.join(format!("dataset_{n}.csv")), &bytes)?;
    }
    let bytes = csv_bytes(|b| write_members_csv(b, &synth.corpus.members))?;
    write_bytes(&dir.join("dataset_5.csv"), &bytes)?;

    let store = synthetic_embeddings(&sc, args.vocab_size, args.dim);
    let mut emb = Vec::new();
    store.write(&mut emb).map_err(|e| CliError::io(dir, e))?;
    write_bytes(&dir.join("embeddings.txt"), &emb)?;

    let bytes = csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["text", "category"])?;
        for (t, c) in &synth.training {
            w.write_record([t.as_str(), c.name()])?;
        }
        w.flush()?;
        Ok(())
    })?;
    write_bytes(&dir.join("training.csv"), &bytes)?;

    let truth = SynthTruth {
        seed: args.seed,
        ego_bucket: sc.ego_bucket.to_string(),
        planted_members: synth.planted_members.iter().cloned().collect(),
        mega_members: synth.mega_members.iter().cloned().collect(),
        group_members: synth.group_members.iter().cloned().collect(),
    };
    write_json(&dir.join("truth.json"), &truth)?;

    let cfg = PipelineConfig {
        platform: sc.platform,
        ego_id: sc.ego_id.clone(),
        data_dir: PathBuf::from("."),
        embeddings: Some("embeddings.txt".into()),
        training: Some("training.csv".into()),
        since: Some(sc.window.since),
        until: Some(sc.window.until),
        bucket: BucketFilter::One(sc.ego_bucket),
        n_it: args.n_it,
        allow_small: args.n_it < egorank_core::targets::MIN_N_IT,
        seed: args.seed,
        out_dir: PathBuf::from("out"),
        ..PipelineConfig::default()
    };
    write_bytes(&dir.join("egorank.toml"), cfg.to_toml().as_bytes())?;
    info!("wrote synthetic corpus to {}", dir.display());
    Ok(truth)
}

/// Loads the config file if given, then applies flag overrides.
pub fn resolve_config(path: Option<&Path>, overrides: &crate::config::ConfigOverrides) -> Result<PipelineConfig, CliError> {
    let mut cfg = match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    cfg.apply(overrides);
    Ok(cfg)
}
