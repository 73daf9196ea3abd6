use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::manifest::{load_dataset, Manifest};
use super::provenance::{self, compare_outputs, Provenance, ReplayReport};
use super::synth::synth_eeg;
use crate::classify::{cross_validate_with_importance, shuffle_subject_labels, ModelKind};
use crate::error::{Error, Result};
use crate::features::io::open;
use crate::features::{
    fit_aperiodic, plv, read_conn_matrix, read_dataset, subject_features, write_conn_matrix, write_dataset,
    AperiodicFit, ConnMatrix, Dataset, PlvSource,
};
use crate::group::Group;
use crate::nbs::{nbs_test, GroupStack, Tail};
use crate::proxies::condition::{mean_spectrum, run_seed};
use crate::proxies::{
    fc_condition_run, run_condition_detailed, synthetic_priors, write_spectrum_csv, Condition, ConditionName, FcPrior,
    ProxyModel,
};
use crate::seed::{self, streams};
use crate::sigproc::{Band, BandName};
use crate::stats::{
    cohens_d, compare_effects, d_from_summary, eeg_reference, exponent_population, fc_exponent_population_fits,
    write_comparison_csv, EffectReport, EEG_N_AD, EEG_N_HC, PUBLISHED_EFFECTS,
};

#[derive(Debug, Parser)]
#[command(name = "neurobridge", version, about = "E/I network simulations and EEG analysis")]
pub struct Cli {
    /// TOML run configuration; defaults apply to anything omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_model(s: &str) -> Result<ModelKind> {
    match s.to_ascii_lowercase().as_str() {
        "snn" => Ok(ModelKind::Snn),
        "ann" => Ok(ModelKind::Ann),
        other => Err(Error::Config(format!("unknown classifier {other:?}"))),
    }
}

fn parse_proxy(s: &str) -> Result<ProxyModel> {
    ProxyModel::from_number(
        s.parse()
            .map_err(|_| Error::Config(format!("model must be 1 or 2, got {s:?}")))?,
    )
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic two-group EEG dataset and its manifest.
    Synth {
        #[arg(long, default_value_t = 20)]
        n_per_group: usize,
    },
    /// Per-epoch feature vectors of every subject in a manifest.
    Features {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Per-subject PLV matrices in every band.
    Plv {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Network-based statistic for one band and tail.
    Nbs {
        /// `plv_manifest.csv` written by `plv`.
        #[arg(long)]
        plv_manifest: PathBuf,
        #[arg(long)]
        band: BandName,
        #[arg(long)]
        tail: Tail,
    },
    /// Averaged relative spectrum of one condition.
    Sim {
        #[arg(long, value_parser = parse_proxy)]
        model: ProxyModel,
        #[arg(long)]
        condition: ConditionName,
        /// Defaults to `sim.n_runs`.
        #[arg(long)]
        runs: Option<usize>,
        /// Overrides the condition's inhibitory ratio.
        #[arg(long)]
        g_ratio: Option<f64>,
    },
    /// FC-informed, band-stitched spectrum of one group.
    FcSim {
        #[arg(long)]
        group: Group,
        /// Empirical priors from the group-mean PLV; synthetic when absent.
        #[arg(long)]
        plv_manifest: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Subject-disjoint cross-validation and feature attribution.
    Classify {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[arg(long)]
        shuffle_labels: bool,
        #[arg(long)]
        no_importance: bool,
    },
    /// Effect-size table against the EEG reference.
    CompareD {
        /// Simulate populations instead of using the bundled summaries.
        #[arg(long)]
        simulate: bool,
    },
    /// Re-run a recorded command and compare its outputs bit for bit.
    Replay {
        #[arg(long)]
        provenance: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Features { .. } => "features",
            Command::Plv { .. } => "plv",
            Command::Nbs { .. } => "nbs",
            Command::Sim { .. } => "sim",
            Command::FcSim { .. } => "fc-sim",
            Command::Classify { .. } => "classify",
            Command::CompareD { .. } => "compare-d",
            Command::Replay { .. } => "replay",
        }
    }

    fn input_paths_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            Command::Features { manifest } | Command::Plv { manifest } => vec![manifest],
            Command::Nbs { plv_manifest, .. } => vec![plv_manifest],
            Command::FcSim { plv_manifest, .. } => plv_manifest.iter_mut().collect(),
            Command::Classify { dataset, .. } => vec![dataset],
            Command::Replay { provenance } => vec![provenance],
            Command::Synth { .. } | Command::Sim { .. } | Command::CompareD { .. } => vec![],
        }
    }

    /// Fails on missing inputs and makes input paths absolute.
    fn preflight(&mut self) -> Result<()> {
        for p in self.input_paths_mut() {
            if !p.exists() {
                return Err(Error::MissingFile(p.clone()));
            }
            *p = std::fs::canonicalize(&*p)?;
        }
        if let Command::Sim { runs: Some(0), .. } | Command::FcSim { runs: Some(0), .. } = self {
            return Err(Error::Config("--runs must be >= 1".into()));
        }
        Ok(())
    }
}

/// Output directory bookkeeping for one command.
struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: PathBuf,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Ctx<'_> {
    /// Absolute path of a new output file, parents created.
    fn output(&mut self, rel: impl AsRef<Path>) -> Result<PathBuf> {
        let rel = rel.as_ref().to_path_buf();
        let p = self.out.join(&rel);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent)?;
        }
        self.outputs.push(rel);
        Ok(p)
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let p = self.output(rel)?;
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(p, text)?;
        Ok(())
    }
}

/// Runs `cmd` into `out` and writes its provenance record there.
pub fn execute(mut cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Provenance> {
    cfg.validate()?;
    cmd.preflight()?;
    if let Command::Replay { provenance } = &cmd {
        return Err(Error::Config(format!(
            "replay of {} must go through `replay`, not be recorded",
            provenance.display()
        )));
    }
    std::fs::create_dir_all(out)?;
    let mut ctx = Ctx {
        cfg,
        out: out.to_path_buf(),
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    match &cmd {
        Command::Synth { n_per_group } => cmd_synth(&mut ctx, *n_per_group)?,
        Command::Features { manifest } => cmd_features(&mut ctx, manifest)?,
        Command::Plv { manifest } => cmd_plv(&mut ctx, manifest)?,
        Command::Nbs {
            plv_manifest,
            band,
            tail,
        } => cmd_nbs(&mut ctx, plv_manifest, *band, *tail)?,
        Command::Sim {
            model,
            condition,
            runs,
            g_ratio,
        } => cmd_sim(&mut ctx, *model, *condition, *runs, *g_ratio)?,
        Command::FcSim {
            group,
            plv_manifest,
            runs,
        } => cmd_fc_sim(&mut ctx, *group, plv_manifest.as_deref(), *runs)?,
        Command::Classify {
            dataset,
            model,
            shuffle_labels,
            no_importance,
        } => cmd_classify(&mut ctx, dataset, *model, *shuffle_labels, !*no_importance)?,
        Command::CompareD { simulate } => cmd_compare_d(&mut ctx, *simulate)?,
        Command::Replay { .. } => unreachable!(),
    }
    let mut outputs = BTreeMap::new();
    for rel in &ctx.outputs {
        outputs.insert(rel.clone(), provenance::sha256_file(&out.join(rel))?);
    }
    let prov = Provenance {
        command: cmd,
        config: cfg.clone(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        modules: provenance::modules(),
        inputs: provenance::hash_inputs(&ctx.inputs)?,
        outputs,
    };
    prov.write(out)?;
    Ok(prov)
}

/// Re-runs the command recorded at `record` into `out` and compares output
/// hashes. The report is written to `out/replay_report.json`.
pub fn replay(record: &Path, out: &Path) -> Result<ReplayReport> {
    let prov = Provenance::read(record)?;
    let original_dir = record.parent().unwrap_or(Path::new("."));
    if out.exists() && std::fs::canonicalize(out)? == std::fs::canonicalize(original_dir)? {
        return Err(Error::Config(
            "replay output directory must differ from the original".into(),
        ));
    }
    for (p, h) in &prov.inputs {
        if &provenance::sha256_file(p)? != h {
            return Err(Error::Data(format!(
                "input {} changed since the recorded run",
                p.display()
            )));
        }
    }
    if prov.config.hash() != prov.config_hash {
        return Err(Error::Data("recorded config does not match its hash".into()));
    }
    let again = execute(prov.command.clone(), &prov.config, out)?;
    let report = compare_outputs(original_dir, &prov.outputs, &again.outputs);
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(out.join("replay_report.json"), text)?;
    Ok(report)
}

fn cmd_synth(ctx: &mut Ctx, n_per_group: usize) -> Result<()> {
    let m = synth_eeg(n_per_group, &ctx.cfg.synth, ctx.cfg.seed, &ctx.out)?;
    ctx.outputs.push(PathBuf::from("manifest.csv"));
    ctx.outputs.extend(m.subjects.iter().map(|s| s.path.clone()));
    Ok(())
}

fn manifest_inputs(ctx: &mut Ctx, manifest: &Path) -> Result<()> {
    let m = Manifest::read(manifest)?;
    ctx.inputs.push(manifest.to_path_buf());
    ctx.inputs.extend(m.subjects.iter().map(|s| m.resolve(s)));
    Ok(())
}

fn cmd_features(ctx: &mut Ctx, manifest: &Path) -> Result<()> {
    manifest_inputs(ctx, manifest)?;
    let layout = &ctx.cfg.features;
    let subjects = load_dataset(manifest, &ctx.cfg.preprocess, layout.epoch_len)?;
    let rows = subjects
        .par_iter()
        .map(|s| subject_features(&s.recording, layout, s.record.group, &s.record.subject_id))
        .collect::<Result<Vec<_>>>()?;
    let ds = Dataset {
        names: layout.names(),
        rows: rows.into_iter().flatten().collect(),
    };
    write_dataset(&ds, &ctx.output("features.csv")?)
}

/// Connectivity of one subject: over the whole recording, or the mean of
/// its epoch matrices.
fn subject_connectivity(
    s: &super::manifest::LoadedSubject,
    source: PlvSource,
) -> Result<BTreeMap<BandName, ConnMatrix>> {
    let id = s.record.subject_id.clone();
    let labels = s.record.labels.clone();
    BandName::ALL
        .iter()
        .map(|&b| {
            let band = Band::canonical(b);
            let values = match source {
                PlvSource::Recording => plv(&s.recording, &band)?.values,
                PlvSource::Epoch => {
                    if s.epochs.is_empty() {
                        return Err(Error::Data(format!("subject {id} has no complete epoch")));
                    }
                    let mut acc = Array2::<f64>::zeros((labels.len(), labels.len()));
                    for e in &s.epochs {
                        acc += &plv(e, &band)?.values;
                    }
                    acc / s.epochs.len() as f64
                }
            };
            Ok((b, ConnMatrix::new(values, band, id.clone(), labels.clone())?))
        })
        .collect()
}

const PLV_MANIFEST_HEADER: [&str; 4] = ["subject_id", "group", "band", "path"];

struct PlvEntry {
    subject_id: String,
    group: Group,
    band: BandName,
    path: PathBuf,
}

fn read_plv_manifest(path: &Path) -> Result<Vec<PlvEntry>> {
    let mut rdr = open(path)?;
    if rdr.headers()?.iter().ne(PLV_MANIFEST_HEADER.iter().copied()) {
        return Err(Error::Data(format!(
            "{}: header must be {}",
            path.display(),
            PLV_MANIFEST_HEADER.join(",")
        )));
    }
    let root = path.parent().unwrap_or(Path::new("."));
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(PlvEntry {
                subject_id: rec[0].to_string(),
                group: rec[1].parse()?,
                band: rec[2].parse()?,
                path: root.join(&rec[3]),
            })
        })
        .collect()
}

fn cmd_plv(ctx: &mut Ctx, manifest: &Path) -> Result<()> {
    manifest_inputs(ctx, manifest)?;
    let subjects = load_dataset(manifest, &ctx.cfg.preprocess, ctx.cfg.features.epoch_len)?;
    let source = ctx.cfg.features.plv_source;
    let mats = subjects
        .par_iter()
        .map(|s| subject_connectivity(s, source))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    for (s, per_band) in subjects.iter().zip(&mats) {
        for (b, m) in per_band {
            let rel = PathBuf::from("plv")
                .join(b.as_str())
                .join(format!("{}.csv", s.record.subject_id));
            write_conn_matrix(m, &ctx.output(&rel)?)?;
            entries.push([
                s.record.subject_id.clone(),
                s.record.group.to_string(),
                b.to_string(),
                rel.to_string_lossy().into_owned(),
            ]);
        }
    }
    let mut w = csv::Writer::from_path(ctx.output("plv_manifest.csv")?)?;
    w.write_record(PLV_MANIFEST_HEADER)?;
    for e in entries {
        w.write_record(&e)?;
    }
    w.flush()?;
    Ok(())
}

fn group_matrices(ctx: &mut Ctx, plv_manifest: &Path, band: BandName, group: Group) -> Result<Vec<ConnMatrix>> {
    let entries = read_plv_manifest(plv_manifest)?;
    let mut mats = Vec::new();
    for e in entries.iter().filter(|e| e.band == band && e.group == group) {
        ctx.inputs.push(e.path.clone());
        mats.push(read_conn_matrix(&e.path, Band::canonical(band), &e.subject_id)?);
    }
    Ok(mats)
}

fn write_labeled_matrix(path: &Path, labels: &[String], values: &Array2<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![String::new()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for (i, l) in labels.iter().enumerate() {
        let mut rec = vec![l.clone()];
        rec.extend(values.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_nbs(ctx: &mut Ctx, plv_manifest: &Path, band: BandName, tail: Tail) -> Result<()> {
    ctx.inputs.push(plv_manifest.to_path_buf());
    let b = Band::canonical(band);
    let hc = GroupStack::new(group_matrices(ctx, plv_manifest, band, Group::Hc)?, Group::Hc, b)?;
    let ad = GroupStack::new(group_matrices(ctx, plv_manifest, band, Group::Ad)?, Group::Ad, b)?;
    let result = nbs_test(&hc, &ad, &ctx.cfg.nbs, tail, ctx.cfg.seed)?;
    let stem = format!("nbs_{band}_{}", serde_json::to_value(tail)?.as_str().unwrap_or("tail"));
    let t_name = format!("{stem}_t.csv");
    write_labeled_matrix(&ctx.output(&t_name)?, &result.labels, &result.t_matrix)?;
    let mut report = result.report();
    report.t_matrix_path = Some(t_name);
    ctx.write_json(&format!("{stem}.json"), &report)
}

#[derive(Serialize)]
struct SimSidecar {
    model: u8,
    condition: Condition,
    n_runs: usize,
    duration_ms: f64,
    seeds: Vec<u64>,
    fit: AperiodicFit,
    run_exponents: Vec<f64>,
    spectrum: String,
}

fn cmd_sim(
    ctx: &mut Ctx,
    model: ProxyModel,
    name: ConditionName,
    runs: Option<usize>,
    g_ratio: Option<f64>,
) -> Result<()> {
    let mut cond = Condition::standard(name);
    if let Some(g) = g_ratio {
        cond = cond.with_g_ratio(g);
    }
    let n_runs = runs.unwrap_or(ctx.cfg.sim.n_runs);
    let run = run_condition_detailed(model, cond, &ctx.cfg.network, n_runs, ctx.cfg.seed)?;
    let range = model.fit_range_hz();
    let stem = format!("sim_m{}_{}", model.number(), name);
    let csv_name = format!("{stem}.csv");
    write_spectrum_csv(&run.mean, &ctx.output(&csv_name)?)?;
    let sidecar = SimSidecar {
        model: model.number(),
        condition: cond,
        n_runs,
        duration_ms: ctx.cfg.network.duration_ms,
        fit: fit_aperiodic(&run.mean, range)?,
        run_exponents: run
            .runs
            .iter()
            .map(|s| Ok(fit_aperiodic(s, range)?.exponent))
            .collect::<Result<Vec<_>>>()?,
        seeds: run.seeds,
        spectrum: csv_name,
    };
    ctx.write_json(&format!("{stem}.json"), &sidecar)
}

fn condition_of(group: Group) -> Condition {
    Condition::standard(match group {
        Group::Ad => ConditionName::Ad,
        Group::Hc => ConditionName::Hc,
    })
}

fn fc_priors(ctx: &mut Ctx, group: Group, plv_manifest: Option<&Path>) -> Result<BTreeMap<BandName, FcPrior>> {
    match plv_manifest {
        None => synthetic_priors(group, ctx.cfg.seed),
        Some(p) => {
            ctx.inputs.push(p.to_path_buf());
            ctx.cfg
                .fc
                .active_bands()
                .into_iter()
                .map(|b| Ok((b, FcPrior::from_group_mean(&group_matrices(ctx, p, b, group)?, b)?)))
                .collect()
        }
    }
}

#[derive(Serialize)]
struct FcSidecar {
    group: Group,
    condition: Condition,
    prior: &'static str,
    bands: Vec<BandName>,
    n_runs: usize,
    duration_ms: f64,
    fit: AperiodicFit,
    spectrum: String,
}

fn cmd_fc_sim(ctx: &mut Ctx, group: Group, plv_manifest: Option<&Path>, runs: Option<usize>) -> Result<()> {
    let priors = fc_priors(ctx, group, plv_manifest)?;
    let cfg = ctx.cfg;
    let cond = condition_of(group);
    let n_runs = runs.unwrap_or(cfg.sim.n_runs);
    let spectra = (0..n_runs)
        .map(|r| fc_condition_run(&priors, cond, &cfg.network, &cfg.fc, run_seed(cfg.seed, r)).map_err(|e| e.in_run(r)))
        .collect::<Result<Vec<_>>>()?;
    let mean = mean_spectrum(&spectra)?;
    let stem = format!("fc_sim_{group}");
    let csv_name = format!("{stem}.csv");
    write_spectrum_csv(&mean, &ctx.output(&csv_name)?)?;
    let sidecar = FcSidecar {
        group,
        condition: cond,
        prior: if plv_manifest.is_some() {
            "empirical"
        } else {
            "synthetic"
        },
        bands: cfg.fc.active_bands(),
        n_runs,
        duration_ms: cfg.network.duration_ms,
        fit: fit_aperiodic(&mean, cfg.fc.model.fit_range_hz())?,
        spectrum: csv_name,
    };
    ctx.write_json(&format!("{stem}.json"), &sidecar)
}

fn cmd_classify(ctx: &mut Ctx, dataset: &Path, kind: ModelKind, shuffle: bool, importance: bool) -> Result<()> {
    ctx.inputs.push(dataset.to_path_buf());
    let cfg = ctx.cfg;
    let mut ds = read_dataset(dataset)?;
    if shuffle {
        ds = shuffle_subject_labels(&ds, seed::derive(cfg.seed, &[streams::SHUFFLE]))?;
    }
    let method = importance.then_some(cfg.classify.importance);
    let (report, attribution) =
        cross_validate_with_importance(&ds, kind, &cfg.classify.train, cfg.classify.folds, cfg.seed, method)?;
    let tag = serde_json::to_value(kind)?.as_str().unwrap_or("model").to_string();
    let suffix = if shuffle { "_shuffled" } else { "" };
    let mut w = csv::Writer::from_path(ctx.output(format!("roc_{tag}{suffix}.csv"))?)?;
    w.write_record(["fpr", "tpr"])?;
    for (f, t) in &report.roc {
        w.write_record([f.to_string(), t.to_string()])?;
    }
    w.flush()?;
    ctx.write_json(&format!("cv_{tag}{suffix}.json"), &report)?;
    if let Some(a) = attribution {
        a.write_csv(&ctx.output(format!("importance_{tag}{suffix}.csv"))?)?;
    }
    Ok(())
}

/// One row of the effect-size table.
#[derive(Debug, Serialize)]
struct EffectRow {
    case: String,
    cohens_d: f64,
    s_pooled: f64,
    mean_ad: f64,
    mean_hc: f64,
    n_ad: usize,
    n_hc: usize,
    abs_delta_d_vs_eeg: Option<f64>,
    published_d: Option<f64>,
}

fn published_d(case: &str) -> Option<f64> {
    PUBLISHED_EFFECTS.iter().find(|p| p.case == case).map(|p| p.cohens_d)
}

fn simulated_effects(cfg: &RunConfig) -> Result<Vec<EffectReport>> {
    let n = cfg.stats.n_subjects;
    let pop_seed = |g: Group, k: u64| seed::derive(cfg.seed, &[streams::CONDITION, g.is_positive() as u64, k]);
    let mut out = Vec::new();
    for (case, model) in [("M. 1", ProxyModel::Membrane), ("M. 2", ProxyModel::Synaptic)] {
        let ad = exponent_population(
            model,
            Condition::AD,
            &cfg.network,
            n,
            pop_seed(Group::Ad, model.number() as u64),
        )?;
        let hc = exponent_population(
            model,
            Condition::HC,
            &cfg.network,
            n,
            pop_seed(Group::Hc, model.number() as u64),
        )?;
        out.push(cohens_d(case, &ad, &hc)?);
    }
    for (case, model) in [
        ("M. 1 FC-based", ProxyModel::Membrane),
        ("M. 2 FC-based", ProxyModel::Synaptic),
    ] {
        let fc = crate::proxies::FcConfig {
            model,
            ..cfg.fc.clone()
        };
        let k = 10 + model.number() as u64;
        let pop = |g: Group| -> Result<Vec<f64>> {
            let priors = synthetic_priors(g, cfg.seed)?;
            Ok(
                fc_exponent_population_fits(&priors, condition_of(g), &cfg.network, &fc, n, pop_seed(g, k))?
                    .iter()
                    .map(|f| f.exponent)
                    .collect(),
            )
        };
        out.push(cohens_d(case, &pop(Group::Ad)?, &pop(Group::Hc)?)?);
    }
    Ok(out)
}

fn cmd_compare_d(ctx: &mut Ctx, simulate: bool) -> Result<()> {
    let cfg = ctx.cfg;
    let eeg = eeg_reference();
    let models = if simulate {
        simulated_effects(cfg)?
    } else {
        PUBLISHED_EFFECTS
            .iter()
            .filter(|p| p.abs_delta_d.is_some())
            .map(|p| {
                d_from_summary(
                    p.case,
                    p.mean_ad,
                    p.mean_hc,
                    p.s_pooled,
                    cfg.stats.n_subjects,
                    cfg.stats.n_subjects,
                )
            })
            .collect::<Result<Vec<_>>>()?
    };
    let mut rows: Vec<EffectRow> = models
        .iter()
        .chain(std::iter::once(&eeg))
        .map(|r| EffectRow {
            case: r.case.clone(),
            cohens_d: r.cohens_d,
            s_pooled: r.s_pooled,
            mean_ad: r.mean_ad,
            mean_hc: r.mean_hc,
            n_ad: r.n_ad,
            n_hc: r.n_hc,
            abs_delta_d_vs_eeg: (r.case != eeg.case).then(|| (r.cohens_d - eeg.cohens_d).abs()),
            published_d: published_d(&r.case),
        })
        .collect();
    rows.iter_mut().for_each(|r| {
        if r.case == eeg.case {
            r.n_ad = EEG_N_AD;
            r.n_hc = EEG_N_HC;
        }
    });
    let mut w = csv::Writer::from_path(ctx.output("effect_sizes.csv")?)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    write_comparison_csv(&compare_effects(&models, &eeg), &ctx.output("comparison.csv")?)
}
