use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use scvs_core::mpe::{
    emit_scatter, mpe_vector, parse_molecules, write_descriptor_cache, DescriptorRow, FeatureScaler, MoleculeFormat,
};
use scvs_core::nn::{train_adam, Activation, LabeledPair, Mlp, MLP_FORMAT};
use scvs_core::sc::{
    expected_gate_output, gate_eval, sc_correlation, to_stochastic, FixedWord, GateKind, Lfsr, ScError,
};
use scvs_core::sc_nn::{quantize_weights, ScEngine, ScNetwork, SC_FORMAT};
use scvs_core::screening::literature::LiteratureComparison;
use scvs_core::screening::{
    build_split, evaluate_pairs, load_manifest, metrics, per_target_protocol, prepare, score_library, CompareReport,
    DescriptorTarget, FailedTarget, RankedList, Scorer, ScreeningReport, TargetMetrics,
};
use scvs_core::synth::{write_benchmark, SynthConfig};
use serde_json::json;

use crate::config::RunConfig;
use crate::exit::{Invalid, Numeric};
use crate::Scope;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Run configuration with command-specific settings attached.
fn provenance(cfg: &RunConfig, extra: serde_json::Value) -> serde_json::Value {
    let mut v = cfg.to_json_value();
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

pub fn descriptors(
    cfg: &RunConfig,
    inputs: &[PathBuf],
    format: Option<MoleculeFormat>,
    out: &Path,
    scatter: Option<&Path>,
) -> Result<()> {
    let mut rows = Vec::new();
    let mut molecules = Vec::new();
    let mut first_failure: Option<anyhow::Error> = None;
    let mut failures = 0;
    for path in inputs {
        let result = (|| -> Result<_> {
            let fmt = match format.or_else(|| MoleculeFormat::from_path(path)) {
                Some(f) => f,
                None => anyhow::bail!(Invalid(format!("{}: cannot infer format, pass --format", path.display()))),
            };
            let mols = parse_molecules(path, fmt)?;
            let vectors = mols
                .iter()
                .map(|m| mpe_vector(m, cfg.k).with_context(|| format!("{}: molecule {}", path.display(), m.id)))
                .collect::<Result<Vec<_>>>()?;
            Ok((mols, vectors))
        })();
        match result {
            Ok((mols, vectors)) => {
                log::info!("{}: {} molecules", path.display(), mols.len());
                rows.extend(mols.iter().zip(vectors).map(|(m, v)| DescriptorRow { molecule_id: m.id.clone(), vector: v }));
                molecules.extend(mols);
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                failures += 1;
                first_failure.get_or_insert(e);
            }
        }
    }
    let mut cache = Vec::new();
    write_descriptor_cache(&mut cache, &rows)?;
    write_file(out, std::str::from_utf8(&cache).expect("cache is utf-8"))?;
    if let Some(path) = scatter {
        write_file(path, &emit_scatter(&molecules, cfg.k)?)?;
    }
    eprintln!("{} descriptors written to {}", rows.len(), out.display());
    match first_failure {
        Some(e) => Err(e.context(format!("{failures} of {} inputs failed", inputs.len()))),
        None => Ok(()),
    }
}

fn load_targets(cfg: &RunConfig) -> Result<(Vec<DescriptorTarget>, Vec<FailedTarget>)> {
    let entries = load_manifest(cfg.manifest()?)?;
    let loaded: Vec<_> = entries.par_iter().map(|e| (e.target_id.clone(), e.load(cfg.k))).collect();
    let mut targets = Vec::new();
    let mut failed = Vec::new();
    for (target_id, result) in loaded {
        match result {
            Ok(t) => {
                if !t.skipped.is_empty() {
                    log::warn!("target {target_id}: {} compounds skipped", t.skipped.len());
                }
                targets.push(t);
            }
            Err(e) => {
                log::warn!("target {target_id} failed: {e}");
                failed.push(FailedTarget { target_id, reason: e.to_string() });
            }
        }
    }
    Ok((targets, failed))
}

pub fn train(cfg: &RunConfig, out: Option<PathBuf>) -> Result<()> {
    let (targets, failed) = load_targets(cfg)?;
    if let Some(f) = failed.first() {
        anyhow::bail!(Invalid(format!("target {} could not be loaded: {}", f.target_id, f.reason)));
    }
    let data = prepare(&targets, &cfg.split)?;
    let template = Mlp::new(&cfg.shape(), cfg.model.activation, cfg.model.init_seed)?;
    let (model, report) = train_adam(&template, &data.train, &cfg.train)?;
    let out = out.unwrap_or_else(|| cfg.paths.models.join("model.json"));
    write_file(&out, &(model.to_json() + "\n"))?;
    let scaler_path = cfg.scaler_path();
    write_file(&scaler_path, &(data.scaler.to_json() + "\n"))?;
    let log_path = out.with_extension("train.json");
    let log = json!({
        "run_config": provenance(cfg, json!({ "model_file": out, "scaler_file": scaler_path })),
        "shape": model.shape(),
        "train_pairs": data.train.len(),
        "test_pairs": data.test.len(),
        "report": report,
    });
    write_file(&log_path, &(serde_json::to_string_pretty(&log)? + "\n"))?;
    let last = report.loss_curve.last().copied().unwrap_or(f64::NAN);
    eprintln!(
        "trained {:?} {} on {} pairs: {} epochs, final loss {last:.4}; model {}, scaler {}, log {}",
        model.shape(),
        activation_name(model.activation()),
        data.train.len(),
        report.epochs_run,
        out.display(),
        scaler_path.display(),
        log_path.display()
    );
    Ok(())
}

fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Tanh => "tanh",
        Activation::Relu => "relu",
    }
}

pub fn quantize(cfg: &RunConfig, model_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let mlp = match load_model(model_path)? {
        Model::Float(m) => m,
        Model::Sc(_) => anyhow::bail!(Invalid(format!("{} is already a stochastic network", model_path.display()))),
    };
    if mlp.activation() == Activation::Tanh {
        anyhow::bail!(Invalid(format!(
            "{} uses tanh; the stochastic data path implements ReLU only. Retrain with --activation relu",
            model_path.display()
        )));
    }
    let net = quantize_weights(&mlp, &cfg.quantize_options()?)?;
    let out = out.unwrap_or_else(|| {
        let stem = model_path.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
        model_path.with_file_name(format!("{stem}.sc.json"))
    });
    write_file(&out, &(net.to_json() + "\n"))?;
    eprintln!(
        "quantized {:?} to {}-bit words, {}-bit streams: {}",
        net.shape(),
        net.width,
        net.stream_len,
        out.display()
    );
    Ok(())
}

enum Model {
    Float(Mlp),
    Sc(Box<ScEngine>),
}

impl Model {
    fn scorer(&self) -> &dyn Scorer {
        match self {
            Model::Float(m) => m,
            Model::Sc(e) => e.as_ref(),
        }
    }

    fn describe(&self) -> String {
        match self {
            Model::Float(m) => format!("mlp {:?} {}", m.shape(), activation_name(m.activation())),
            Model::Sc(e) => {
                let n = e.network();
                format!("sc {:?} width {} stream {}", n.shape(), n.width, n.stream_len)
            }
        }
    }
}

/// Dispatches on the file's version tag.
fn load_model(path: &Path) -> Result<Model> {
    let text = read_file(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Invalid(format!("{}: not JSON: {e}", path.display())))?;
    let version = value.get("version").and_then(|v| v.as_str()).unwrap_or_default();
    let context = || format!("loading {}", path.display());
    match version {
        MLP_FORMAT => Ok(Model::Float(Mlp::from_json(&text).with_context(context)?)),
        SC_FORMAT => {
            let net = ScNetwork::from_json(&text).with_context(context)?;
            Ok(Model::Sc(Box::new(ScEngine::new(net).with_context(context)?)))
        }
        other => Err(Invalid(format!("{}: unknown model version {other:?}", path.display())).into()),
    }
}

fn load_scaler(cfg: &RunConfig) -> Result<FeatureScaler> {
    let path = cfg.scaler_path();
    FeatureScaler::from_json(&read_file(&path)?).with_context(|| format!("loading {}", path.display()))
}

/// Scaled pairs of one target's held-out side.
fn test_pairs(t: &DescriptorTarget, cfg: &RunConfig, scaler: &FeatureScaler) -> Result<Vec<LabeledPair>> {
    let mut pairs = build_split(std::slice::from_ref(t), &cfg.split)?.test;
    for p in &mut pairs {
        p.features = scaler.transform(&p.features)?;
    }
    Ok(pairs)
}

struct Scored {
    report: ScreeningReport,
    inferences: usize,
    seconds: f64,
}

fn screen(cfg: &RunConfig, model: &Model, scope: Scope, extra: serde_json::Value) -> Result<Scored> {
    let scaler = load_scaler(cfg)?;
    let (targets, mut failed) = load_targets(cfg)?;
    let scorer = model.scorer();
    let start = Instant::now();
    let mut lists: Vec<(RankedList, usize)> = Vec::new();
    match scope {
        Scope::Test => {
            let mut pairs = Vec::new();
            let mut skipped = std::collections::BTreeMap::new();
            for t in &targets {
                match test_pairs(t, cfg, &scaler) {
                    Ok(p) => {
                        skipped.insert(t.target_id.clone(), t.skipped.len());
                        pairs.extend(p);
                    }
                    Err(e) => failed.push(FailedTarget { target_id: t.target_id.clone(), reason: format!("{e:#}") }),
                }
            }
            for list in evaluate_pairs(scorer, &pairs)? {
                let s = skipped[list.target_id()];
                lists.push((list, s));
            }
        }
        Scope::Library => {
            for t in &targets {
                lists.push((score_library(scorer, t, &scaler)?, t.skipped.len()));
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let inferences = lists.iter().map(|(l, _)| l.len()).sum();
    let mut rows = Vec::new();
    for (list, skipped) in lists {
        match metrics(&list) {
            Ok(m) => rows.push(TargetMetrics { target_id: list.target_id().to_string(), metrics: m, skipped }),
            Err(e) => failed.push(FailedTarget { target_id: list.target_id().to_string(), reason: e.to_string() }),
        }
    }
    failed.sort_by(|a, b| a.target_id.cmp(&b.target_id));
    let scope_name = match scope {
        Scope::Test => "test",
        Scope::Library => "library",
    };
    let mut extra = extra;
    extra["scope"] = json!(scope_name);
    let run_config = provenance(cfg, extra);
    let report = ScreeningReport::new(model.describe(), run_config, rows, failed);
    Ok(Scored { report, inferences, seconds })
}

fn print_summary(report: &ScreeningReport) {
    println!("model: {}", report.model);
    println!("{:<16} {:>7} {:>8} {:>8} {:>8}", "target", "auc", "ef1", "ef5", "ef10");
    for t in &report.targets {
        let m = &t.metrics;
        println!("{:<16} {:>7.4} {:>8.2} {:>8.2} {:>8.2}", t.target_id, m.auc, m.ef1, m.ef5, m.ef10);
    }
    for f in &report.failed_targets {
        println!("{:<16} failed: {}", f.target_id, f.reason);
    }
    if let Some(a) = &report.aggregate {
        let (auc, ef1) = a.per_target_row();
        println!("mean over {} targets: AUC {auc}, EF1% {ef1}, EF5% {:.2}, EF10% {:.2}", a.n_targets, a.mean_ef5, a.mean_ef10);
        let cells: Vec<String> = scvs_core::screening::THRESHOLD_LABELS
            .iter()
            .zip(a.thresholds.0)
            .map(|(l, v)| format!("{l}: {v}%"))
            .collect();
        println!("AUC thresholds: {}", cells.join(", "));
    }
}

pub struct EvaluateArgs {
    pub model: PathBuf,
    pub scope: Scope,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub literature: bool,
    pub label: Option<String>,
    pub throughput: Option<PathBuf>,
}

pub fn evaluate(cfg: &RunConfig, args: &EvaluateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let Scored { mut report, inferences, seconds } =
        screen(cfg, &model, args.scope, json!({ "model_file": args.model }))?;
    if args.literature {
        if let Some(a) = &report.aggregate {
            let label = args.label.clone().unwrap_or_else(|| report.model.clone());
            report.literature = Some(LiteratureComparison::new(&label, a.clone()));
        }
    }
    let out = args.report.clone().unwrap_or_else(|| cfg.paths.reports.join("report.json"));
    write_file(&out, &report.to_json())?;
    if let Some(csv) = &args.csv {
        write_file(csv, &report.to_csv())?;
    }
    let rate = if seconds > 0.0 { inferences as f64 / seconds } else { f64::INFINITY };
    eprintln!("throughput: {inferences} inferences in {seconds:.3} s ({rate:.0} inferences/s, measured natively)");
    if let Some(path) = &args.throughput {
        let t = json!({
            "model": report.model,
            "inferences": inferences,
            "seconds": seconds,
            "inferences_per_second": rate,
            "threads": rayon::current_num_threads(),
        });
        write_file(path, &(serde_json::to_string_pretty(&t)? + "\n"))?;
    }
    print_summary(&report);
    if report.targets.is_empty() {
        anyhow::bail!(Invalid("no target could be evaluated".into()));
    }
    eprintln!("report written to {}", out.display());
    Ok(())
}

pub fn compare(
    cfg: &RunConfig,
    software: &Path,
    hardware: &Path,
    scope: Scope,
    report: Option<PathBuf>,
    csv: Option<&Path>,
) -> Result<()> {
    let sw = screen(cfg, &load_model(software)?, scope, json!({ "model_file": software }))?.report;
    let hw = screen(cfg, &load_model(hardware)?, scope, json!({ "model_file": hardware }))?.report;
    let cmp = CompareReport::new(sw, hw);
    let out = report.unwrap_or_else(|| cfg.paths.reports.join("compare.json"));
    write_file(&out, &cmp.to_json())?;
    if let Some(path) = csv {
        write_file(path, &cmp.deltas_csv())?;
    }
    println!("{:<16} {:>7} {:>7} {:>8}", "target", "sw_auc", "hw_auc", "delta");
    for d in &cmp.deltas {
        println!("{:<16} {:>7.4} {:>7.4} {:>+8.4}", d.target_id, d.sw_auc, d.hw_auc, d.delta);
    }
    println!(
        "mean AUC drop {:.4}; hardware better on {} of {} targets",
        cmp.mean_auc_drop,
        cmp.hardware_better,
        cmp.deltas.len()
    );
    eprintln!("report written to {}", out.display());
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn sc_bench(cfg: &RunConfig, step: f64, out: Option<&Path>) -> Result<()> {
    if !(step > 0.0 && step <= 1.0) {
        anyhow::bail!(Invalid(format!("step {step} outside (0, 1]")));
    }
    let opts = cfg.quantize_options()?;
    let n = opts.stream_len;
    let r1 = Lfsr::new(opts.lfsr1)?.take_words(n);
    let r2 = Lfsr::new(opts.lfsr2)?.take_words(n);
    let steps = (2.0 / step).round() as i64;
    let grid: Vec<f64> = (0..=steps).map(|i| (-1.0 + i as f64 * step).clamp(-1.0, 1.0)).collect();
    let mut csv = String::from("gate,regime,x,y,c_measured,z_measured,z_formula\n");
    let mut xnor_product = 0.0f64;
    let mut worst_shared = [0.0f64; 3];
    let mut worst_formula = 0.0f64;
    for (regime, second) in [("independent", &r2), ("shared", &r1)] {
        for &x in &grid {
            let a = to_stochastic(FixedWord::encode(x, opts.width)?, &r1, n)?;
            for &y in &grid {
                let b = to_stochastic(FixedWord::encode(y, opts.width)?, second, n)?;
                let c = match sc_correlation(&a, &b) {
                    Ok(c) => Some(c),
                    Err(ScError::CorrelationUndefined { .. }) => None,
                    Err(e) => return Err(e.into()),
                };
                let (xs, ys) = (a.decode(), b.decode());
                for (k, kind) in GateKind::ALL.into_iter().enumerate() {
                    let z = gate_eval(kind, &a, &b)?.decode();
                    let formula = c.map(|c| expected_gate_output(kind, xs, ys, c)).transpose()?;
                    if let Some(f) = formula {
                        worst_formula = worst_formula.max((z - f).abs());
                    }
                    if regime == "independent" && kind == GateKind::Xnor {
                        xnor_product = xnor_product.max((z - x * y).abs());
                    }
                    if regime == "shared" {
                        let exact = match kind {
                            GateKind::And => xs.min(ys),
                            GateKind::Or => xs.max(ys),
                            GateKind::Xnor => 1.0 - (xs - ys).abs(),
                        };
                        worst_shared[k] = worst_shared[k].max((z - exact).abs());
                    }
                    csv.push_str(&format!(
                        "{},{regime},{x:.4},{y:.4},{},{z:.6},{}\n",
                        kind.name(),
                        fmt_opt(c),
                        fmt_opt(formula)
                    ));
                }
            }
        }
    }
    match out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    eprintln!("stream length {n}, {} grid points per regime", grid.len() * grid.len());
    eprintln!("independent XNOR: max |z - x*y| = {xnor_product:.4}");
    eprintln!(
        "shared: max |AND - min| = {:.2e}, |OR - max| = {:.2e}, |XNOR - (1-|x-y|)| = {:.2e}",
        worst_shared[0], worst_shared[1], worst_shared[2]
    );
    eprintln!("all regimes: max |z - closed form at measured C| = {worst_formula:.2e} (2/N = {:.2e})", 2.0 / n as f64);
    if !worst_formula.is_finite() {
        anyhow::bail!(Numeric("non-finite gate output".into()));
    }
    Ok(())
}

pub fn per_target(cfg: &RunConfig, report: Option<PathBuf>, csv: Option<&Path>, literature: bool) -> Result<()> {
    let (targets, mut failed) = load_targets(cfg)?;
    let template = Mlp::new(&cfg.shape(), cfg.model.activation, cfg.model.init_seed)?;
    let results: Vec<_> = targets.par_iter().map(|t| per_target_protocol(t, &template, &cfg.train)).collect();
    let mut rows = Vec::new();
    for (t, r) in targets.iter().zip(results) {
        match r {
            Ok(r) => {
                log::info!("{}: {} train / {} test pairs, auc {:.4}", t.target_id, r.train_size, r.test_size, r.metrics.auc);
                rows.push(TargetMetrics { target_id: t.target_id.clone(), metrics: r.metrics, skipped: t.skipped.len() });
            }
            Err(e) => failed.push(FailedTarget { target_id: t.target_id.clone(), reason: e.to_string() }),
        }
    }
    rows.sort_by(|a, b| a.target_id.cmp(&b.target_id));
    failed.sort_by(|a, b| a.target_id.cmp(&b.target_id));
    let run_config = provenance(cfg, json!({ "protocol": "per-target", "test_fraction": scvs_core::screening::PER_TARGET_TEST_FRACTION }));
    let model = format!("mlp {:?} {} per target", template.shape(), activation_name(cfg.model.activation));
    let mut rep = ScreeningReport::new(model, run_config, rows, failed);
    if literature {
        if let Some(a) = &rep.aggregate {
            rep.literature = Some(LiteratureComparison::new("per-target", a.clone()));
        }
    }
    let out = report.unwrap_or_else(|| cfg.paths.reports.join("per_target.json"));
    write_file(&out, &rep.to_json())?;
    if let Some(path) = csv {
        write_file(path, &rep.to_csv())?;
    }
    print_summary(&rep);
    if rep.targets.is_empty() {
        anyhow::bail!(Invalid("no target could be evaluated".into()));
    }
    eprintln!("report written to {}", out.display());
    Ok(())
}

pub fn synth(synth: &SynthConfig, out: &Path) -> Result<()> {
    if !(synth.spread.is_finite() && synth.spread >= 0.0) {
        anyhow::bail!(Invalid(format!("spread {} must be finite and non-negative", synth.spread)));
    }
    let manifest = write_benchmark(synth, out).with_context(|| format!("writing benchmark to {}", out.display()))?;
    eprintln!(
        "{} targets ({} actives, {} decoys each, seed {}) written; manifest {}",
        synth.targets,
        synth.actives_per_target,
        synth.decoys_per_target,
        synth.seed,
        manifest.display()
    );
    Ok(())
}
