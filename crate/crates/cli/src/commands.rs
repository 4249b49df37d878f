use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use graphnas_core::generators::{heterogeneity_augment, ws_flex_sweep, MANIFEST_FILE};
use graphnas_core::metrics::table::{format_real, FeatureRow, FeatureTable};
use graphnas_core::metrics::{featurize_with, Feature};
use graphnas_core::mlp::{write_epoch_csv, MlpDocument};
use graphnas_core::search::{
    multi_seed_statistics_with, predict_graph_with, read_jsonl, search as run_search, validate_trace, write_bucket_csv,
    write_cost_csv, write_jsonl, write_path_csv, MeasureFn, Mode, SearchStatus, SearchTrace,
};
use graphnas_core::surrogate::{
    feature_set_similarity, fit_ols, read_sfs_csv, sfs_with, write_sfs_csv, Dataset, RegressionModel, SfsTrace,
};
use graphnas_core::{Error, Graph, GraphPool};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::Recorder;
use crate::manifest::{Loaded, Manifest};
use crate::toy::ToyBench;
use crate::{Failure, SearchArgs};

pub const POOL_DIR: &str = "pool";
pub const FEATURES_CSV: &str = "features.csv";
pub const TABLE_CSV: &str = "table.csv";
pub const MODEL_JSON: &str = "model.json";
pub const SFS_CSV: &str = "sfs.csv";
pub const FIXED_FIRST_DIR: &str = "sfs_fixed_first";
pub const SIMILARITY_CSV: &str = "similarity.csv";
pub const SEARCH_DIR: &str = "search";
pub const PLOTS_DIR: &str = "plots";

pub struct Context {
    pub loaded: Loaded,
    pub out: PathBuf,
}

impl Context {
    pub fn new(loaded: Loaded) -> Self {
        let out = loaded.manifest.out.clone();
        Context { loaded, out }
    }

    fn m(&self) -> &Manifest {
        &self.loaded.manifest
    }

    fn recorder(&self, command: &'static str) -> Result<Recorder, Failure> {
        Recorder::new(&self.out, command)
    }

    fn finish(&self, rec: Recorder) -> Result<(), Failure> {
        rec.finish(&self.loaded.canonical, &self.loaded.sha256, self.m().seed)
    }

    fn load_pool(&self) -> Result<GraphPool, Failure> {
        let dir = self.out.join(POOL_DIR);
        if !dir.join(MANIFEST_FILE).exists() {
            return Err(Failure::invalid(format!(
                "no graph pool at {} (run `graphnas generate` first)",
                dir.display()
            )));
        }
        GraphPool::load(&dir).map_err(|e| Failure::from(e).context(format!("loading pool {}", dir.display())))
    }

    fn table_path(&self) -> PathBuf {
        self.m().fit.table.clone().unwrap_or_else(|| self.out.join(TABLE_CSV))
    }

    /// Feature table with a target on every row, split by the manifest seed.
    fn load_dataset(&self) -> Result<Dataset<f64>, Failure> {
        let path = self.table_path();
        let table = read_table(&path)?.ok_or_else(|| {
            Failure::invalid(format!(
                "no feature table at {} (run `graphnas train-toy`)",
                path.display()
            ))
        })?;
        if !table.has_targets() {
            return Err(Failure::invalid(format!(
                "feature table {} is missing `top1_error` targets",
                path.display()
            )));
        }
        Dataset::from_table(&table, self.m().stage_seed("split")).map_err(|e| Failure::from(e).context(path.display()))
    }
}

fn read_table(path: &Path) -> Result<Option<FeatureTable<f64>>, Failure> {
    if !path.exists() {
        return Ok(None);
    }
    let f = fs::File::open(path)?;
    FeatureTable::read_csv(BufReader::new(f))
        .map(Some)
        .map_err(|e| Failure::from(e).context(path.display()))
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let f = fs::File::open(path).map_err(|e| Failure::from(e).context(path.display()))?;
    Graph::read_edge_list(BufReader::new(f)).map_err(|e| Failure::from(e).context(path.display()))
}

pub fn generate(ctx: &Context) -> Result<(), Failure> {
    let m = ctx.m();
    let g = &m.generate;
    let mut pool = ws_flex_sweep(
        g.n,
        g.degree_min,
        m.degree_max(),
        g.degree_steps,
        g.p_steps,
        g.seeds_per_cell,
        m.stage_seed("generate"),
    )?;
    if pool.is_empty() {
        return Err(Failure::invalid("generator produced no connected graphs"));
    }
    if g.augment_rounds > 0 {
        pool = heterogeneity_augment(&pool, g.augment_rounds, g.rewires_per_round, m.stage_seed("augment"))?;
    }
    let mut rec = ctx.recorder("generate")?;
    // build next to the old pool and swap, so readers never see a mix
    let staging = ctx.out.join(format!(".{POOL_DIR}.staging"));
    let target = ctx.out.join(POOL_DIR);
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    pool.save(&staging)?;
    if target.exists() {
        fs::remove_dir_all(&target)?;
    }
    fs::rename(&staging, &target)?;
    rec.record_existing(&format!("{POOL_DIR}/{MANIFEST_FILE}"))?;
    for e in pool.entries() {
        rec.record_existing(&format!("{POOL_DIR}/{}.edges", e.id))?;
    }
    eprintln!(
        "generated {} graphs ({} distinct) in {}",
        pool.len(),
        pool.distinct_count(),
        target.display()
    );
    ctx.finish(rec)
}

pub fn featurize(ctx: &Context) -> Result<(), Failure> {
    let pool = ctx.load_pool()?;
    let seed = ctx.m().stage_seed("featurize");
    let opts = ctx.m().featurize_options();
    let results: Vec<(usize, graphnas_core::Result<FeatureRow<f64>>)> = pool
        .entries()
        .par_iter()
        .map(|e| {
            let t = Instant::now();
            let row = featurize_with(&e.graph, seed, &opts).map(|features| FeatureRow {
                graph_id: e.id,
                features,
                featurize_ms: Some(t.elapsed().as_secs_f64() * 1e3),
                target: None,
            });
            (e.id, row)
        })
        .collect();
    let mut table = FeatureTable::default();
    for (id, row) in results {
        match row {
            Ok(r) => table.rows.push(r),
            Err(Error::Disconnected) => eprintln!("skipping graph {id}: disconnected"),
            Err(e) => return Err(Failure::from(e).context(format!("graph {id}"))),
        }
    }
    let mut rec = ctx.recorder("featurize")?;
    rec.write_with(FEATURES_CSV, |w| table.write_csv_with(w, true, false))?;
    eprintln!("featurized {} of {} graphs", table.rows.len(), pool.len());
    ctx.finish(rec)
}

pub fn train_toy(ctx: &Context) -> Result<(), Failure> {
    let pool = ctx.load_pool()?;
    let features_path = ctx.out.join(FEATURES_CSV);
    let mut table = read_table(&features_path)?.ok_or_else(|| {
        Failure::invalid(format!(
            "no feature table at {} (run `graphnas featurize` first)",
            features_path.display()
        ))
    })?;
    let bench = ToyBench::new(&ctx.m().train, ctx.m().stage_seed("train"));
    let graphs: Vec<(usize, &Graph)> = table
        .rows
        .iter()
        .map(|r| {
            pool.get(r.graph_id)
                .map(|e| (r.graph_id, &e.graph))
                .ok_or_else(|| Failure::invalid(format!("feature table names graph {} not in the pool", r.graph_id)))
        })
        .collect::<Result<_, _>>()?;
    let measured = graphs
        .par_iter()
        .map(|&(id, g)| {
            bench
                .measure(g)
                .map_err(|e| Failure::from(e).context(format!("training graph {id}")))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rec = ctx.recorder("train-toy")?;
    let inits = ctx.m().train.inits;
    let mut targets = String::from("graph_id,top1_error");
    for k in 0..inits {
        targets.push_str(&format!(",init_{k}"));
    }
    targets.push('\n');
    for ((id, _), m) in graphs.iter().zip(&measured) {
        targets.push_str(&format!("{id},{}", format_real(m.top1_error)));
        for e in &m.per_init {
            targets.push_str(&format!(",{}", format_real(*e)));
        }
        targets.push('\n');
        rec.write_with(&format!("train/epochs/{id}.csv"), |w| write_epoch_csv(&m.history, w))?;
    }
    rec.write("train/targets.csv", targets.as_bytes())?;
    for (row, m) in table.rows.iter_mut().zip(&measured) {
        row.target = Some(m.top1_error);
    }
    rec.write_with(TABLE_CSV, |w| table.write_csv_with(w, true, true))?;
    if let Some((i, best)) = measured
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.top1_error.total_cmp(&b.1.top1_error))
    {
        let doc = MlpDocument::new(&best.spec, &best.params);
        let json = serde_json::to_string(&doc).map_err(|e| Failure::internal(e.to_string()))?;
        rec.write("train/best_mlp.json", json.as_bytes())?;
        eprintln!(
            "trained {} graphs on {} / {} points; best graph {} at top-1 error {:.4}",
            measured.len(),
            bench.train_len(),
            bench.held_out_len(),
            graphs[i].0,
            best.top1_error
        );
    }
    ctx.finish(rec)
}

/// Prefix of a plain SFS trace with the lowest TEST MSE.
fn best_prefix(trace: &SfsTrace<f64>) -> Vec<Feature> {
    let best = trace
        .steps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.test_mse.total_cmp(&b.1.test_mse))
        .map_or(0, |(i, _)| i + 1);
    trace.features()[..best].to_vec()
}

pub fn fit(ctx: &Context) -> Result<(), Failure> {
    let data = ctx.load_dataset()?;
    let features = match &ctx.m().fit.features {
        Some(f) => f.clone(),
        None => best_prefix(&sfs_with(&data, &Feature::ALL, None, ctx.m().sfs.criterion)?),
    };
    let model = fit_ols(&data, &features)?;
    let mut rec = ctx.recorder("fit")?;
    rec.write(MODEL_JSON, model.to_json()?.as_bytes())?;
    let names: Vec<&str> = model.features.iter().map(|f| f.name()).collect();
    match (&model.train, &model.test) {
        (Some(tr), Some(te)) => eprintln!(
            "fitted [{}]: train MSE {:.3e}, test MSE {:.3e}, test r {:.3}",
            names.join(", "),
            tr.mse,
            te.mse,
            te.pearson
        ),
        _ => eprintln!("fitted [{}]", names.join(", ")),
    }
    ctx.finish(rec)
}

pub fn sfs(ctx: &Context) -> Result<(), Failure> {
    let data = ctx.load_dataset()?;
    let cfg = &ctx.m().sfs;
    let mut rec = ctx.recorder("sfs")?;
    let plain = sfs_with(&data, &Feature::ALL, None, cfg.criterion)?;
    rec.write_with(SFS_CSV, |w| write_sfs_csv(&plain.records(), w))?;
    if !plain.skipped.is_empty() {
        let names: Vec<&str> = plain.skipped.iter().map(|f| f.name()).collect();
        eprintln!("constant on TRAIN, never selected: {}", names.join(", "));
    }
    if cfg.fixed_first {
        let mut traces = Vec::new();
        for f in Feature::ALL {
            if plain.skipped.contains(&f) {
                eprintln!("no fixed-first trace for constant feature {f}");
                continue;
            }
            let t = sfs_with(&data, &Feature::ALL, Some(f), cfg.criterion)?;
            rec.write_with(&format!("{FIXED_FIRST_DIR}/{f}.csv"), |w| {
                write_sfs_csv(&t.records(), w)
            })?;
            traces.push(t);
        }
        let shortest = traces.iter().map(SfsTrace::len).min().unwrap_or(0);
        let k = cfg.similarity_k.min(shortest);
        if k >= 2 {
            let sim = feature_set_similarity(&traces, k)?;
            let firsts: Vec<Feature> = traces.iter().map(|t| t.steps[0].feature).collect();
            let mut text = String::from("feature");
            for f in &firsts {
                text.push_str(&format!(",{f}"));
            }
            text.push('\n');
            for (f, row) in firsts.iter().zip(&sim) {
                text.push_str(f.name());
                for x in row {
                    text.push_str(&format!(",{}", format_real(*x)));
                }
                text.push('\n');
            }
            rec.write(SIMILARITY_CSV, text.as_bytes())?;
        }
    }
    let best = best_prefix(&plain);
    eprintln!(
        "SFS over {} steps; lowest test MSE after {} features",
        plain.len(),
        best.len()
    );
    ctx.finish(rec)
}

/// Run-level facts of a persisted search that the step records lack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub status: SearchStatus,
    pub seed: u64,
    pub start: String,
    pub initial_predicted: f64,
    pub initial_measured: Option<f64>,
    pub steps: usize,
    pub final_predicted: f64,
    pub wall_time_ms: f64,
}

fn load_model(path: &Path) -> Result<RegressionModel<f64>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::from(e).context(format!("model {} (run `graphnas fit` first)", path.display())))?;
    let model = RegressionModel::<f64>::from_json(&text)
        .map_err(|e| Failure::invalid(format!("model {}: {e}", path.display())))?;
    model
        .validate()
        .map_err(|e| Failure::invalid(format!("model {}: {e}", path.display())))?;
    Ok(model)
}

/// Pool graph with the extreme target (or prediction when no targets exist).
fn pick_from_pool(ctx: &Context, highest: bool, model: &RegressionModel<f64>) -> Result<(Graph, String), Failure> {
    let pool = ctx.load_pool()?;
    let scored: Vec<(usize, f64)> = match read_table(&ctx.table_path())? {
        Some(t) if t.has_targets() => t
            .rows
            .iter()
            .map(|r| (r.graph_id, r.target.unwrap_or(f64::NAN)))
            .collect(),
        _ => {
            let seed = ctx.m().stage_seed("featurize");
            let opts = ctx.m().featurize_options();
            pool.entries()
                .par_iter()
                .filter(|e| e.graph.is_connected())
                .map(|e| predict_graph_with(model, &e.graph, seed, &opts).map(|p| (e.id, p)))
                .collect::<graphnas_core::Result<_>>()?
        }
    };
    let key = |x: f64| if highest { -x } else { x };
    // lowest key wins; ties go to the smaller id
    let (id, score) = scored
        .into_iter()
        .filter(|(_, s)| s.is_finite())
        .min_by(|a, b| key(a.1).total_cmp(&key(b.1)).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Failure::invalid("no scored pool graph to start from"))?;
    let g = pool
        .get(id)
        .ok_or_else(|| Failure::invalid(format!("graph {id} is not in the pool")))?
        .graph
        .clone();
    Ok((g, format!("pool:{id} ({score})")))
}

fn resolve_start(ctx: &Context, spec: &str, model: &RegressionModel<f64>) -> Result<(Graph, String), Failure> {
    match spec {
        "auto" => pick_from_pool(ctx, ctx.m().search.mode == Mode::Minimize, model),
        "worst" => pick_from_pool(ctx, true, model),
        "best" => pick_from_pool(ctx, false, model),
        s => match s.parse::<usize>() {
            Ok(id) => {
                let pool = ctx.load_pool()?;
                let e = pool
                    .get(id)
                    .ok_or_else(|| Failure::invalid(format!("start graph {id} is not in the pool")))?;
                Ok((e.graph.clone(), format!("pool:{id}")))
            }
            Err(_) => Ok((read_graph(Path::new(s))?, s.to_string())),
        },
    }
}

fn final_predicted(trace: &SearchTrace<f64>) -> f64 {
    trace.steps.last().map_or(trace.initial_predicted, |s| s.predicted)
}

pub fn search(ctx: &Context, args: &SearchArgs) -> Result<(), Failure> {
    let model_path = args.model.clone().unwrap_or_else(|| ctx.out.join(MODEL_JSON));
    let model = load_model(&model_path)?;
    let start_spec = args.start.clone().unwrap_or_else(|| ctx.m().search.start.clone());
    let (g0, start_label) = resolve_start(ctx, &start_spec, &model)?;
    if !g0.is_connected() {
        return Err(Failure::invalid(format!("start graph {start_label} is disconnected")));
    }
    let seed = ctx.m().stage_seed("search");
    let cfg = ctx.m().search_config(seed);
    let bench = args
        .validate
        .as_ref()
        .map(|_| ToyBench::new(&ctx.m().train, ctx.m().stage_seed("train")));
    let measure = |g: &Graph| -> graphnas_core::Result<f64> {
        bench
            .as_ref()
            .expect("validation requested")
            .measure(g)
            .map(|m| m.top1_error)
    };

    let mut rec = ctx.recorder("search")?;
    rec.write(
        &format!("{SEARCH_DIR}/start.edges"),
        g0.to_edge_list_string().as_bytes(),
    )?;

    if let Some(n) = args.seeds {
        if n == 0 {
            return Err(Failure::invalid("--seeds must be at least 1"));
        }
        let m: Option<&MeasureFn<'_, f64>> = if bench.is_some() { Some(&measure) } else { None };
        let summary = multi_seed_statistics_with(&g0, &model, &cfg, n, ctx.m().search.bucket, m)?;
        let mut runs = String::from("run,seed,status,steps,final_predicted\n");
        for (i, (t, s)) in summary.traces.iter().zip(&summary.seeds).enumerate() {
            rec.write_with(&format!("{SEARCH_DIR}/runs/{i}.jsonl"), |w| write_jsonl(&t.steps, w))?;
            runs.push_str(&format!(
                "{i},{s},{},{},{}\n",
                status_name(t.status),
                t.steps.len(),
                format_real(final_predicted(t))
            ));
        }
        rec.write(&format!("{SEARCH_DIR}/runs.csv"), runs.as_bytes())?;
        rec.write_with(&format!("{SEARCH_DIR}/buckets.csv"), |w| {
            write_bucket_csv(&summary.buckets, w)
        })?;
        let completed = summary
            .statuses()
            .iter()
            .filter(|&&s| s == SearchStatus::Completed)
            .count();
        eprintln!(
            "{n} runs from {start_label}: {completed} reached {} steps, {} buckets",
            cfg.max_steps,
            summary.buckets.len()
        );
        return ctx.finish(rec);
    }

    let mut trace = run_search(&g0, &model, &cfg)?;
    if bench.is_some() {
        let (validated, failures) = validate_trace(&trace, |g, _| measure(g))?;
        for (step, e) in failures {
            eprintln!("measuring step {step} failed: {e}");
        }
        trace = validated;
    }
    let summary = SearchSummary {
        status: trace.status,
        seed,
        start: start_label.clone(),
        initial_predicted: trace.initial_predicted,
        initial_measured: trace.initial_measured,
        steps: trace.steps.len(),
        final_predicted: final_predicted(&trace),
        wall_time_ms: trace.wall_time_ms,
    };
    rec.write_with(&format!("{SEARCH_DIR}/trace.jsonl"), |w| write_jsonl(&trace.steps, w))?;
    rec.write(
        &format!("{SEARCH_DIR}/summary.json"),
        serde_json::to_string_pretty(&summary)
            .map_err(|e| Failure::internal(e.to_string()))?
            .as_bytes(),
    )?;
    rec.write(
        &format!("{SEARCH_DIR}/final.edges"),
        trace.final_graph.to_edge_list_string().as_bytes(),
    )?;
    rec.write_with(&format!("{SEARCH_DIR}/path.csv"), |w| write_path_csv(&trace, w))?;
    rec.write_with(&format!("{SEARCH_DIR}/cost.csv"), |w| write_cost_csv(&trace, w))?;
    ctx.finish(rec)?;
    eprintln!(
        "{} accepted steps from {start_label}: predicted {:.6} -> {:.6}",
        trace.steps.len(),
        trace.initial_predicted,
        summary.final_predicted
    );
    match trace.status {
        SearchStatus::Completed => Ok(()),
        SearchStatus::ConvergedLocal => Err(Failure::converged(format!(
            "local optimum after {} of {} steps",
            trace.steps.len(),
            cfg.max_steps
        ))),
    }
}

fn status_name(s: SearchStatus) -> &'static str {
    match s {
        SearchStatus::Completed => "completed",
        SearchStatus::ConvergedLocal => "converged_local",
    }
}

/// Rebuilds a persisted single-run trace from `search/`.
pub fn load_trace(dir: &Path) -> Result<Option<SearchTrace<f64>>, Failure> {
    let (steps_path, start_path, summary_path) = (
        dir.join("trace.jsonl"),
        dir.join("start.edges"),
        dir.join("summary.json"),
    );
    if !(steps_path.exists() && start_path.exists() && summary_path.exists()) {
        return Ok(None);
    }
    let initial = read_graph(&start_path)?;
    let summary: SearchSummary = serde_json::from_str(&fs::read_to_string(&summary_path)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", summary_path.display())))?;
    let steps = read_jsonl(BufReader::new(fs::File::open(&steps_path)?))
        .map_err(|e| Failure::from(e).context(steps_path.display()))?;
    let mut trace = SearchTrace {
        final_graph: initial.clone(),
        initial,
        initial_predicted: summary.initial_predicted,
        initial_measured: summary.initial_measured,
        steps,
        status: summary.status,
        wall_time_ms: summary.wall_time_ms,
    };
    let graphs = trace
        .graphs()
        .map_err(|e| Failure::from(e).context("replaying trace"))?;
    trace.final_graph = graphs.last().expect("initial graph").clone();
    Ok(Some(trace))
}

pub fn export_plots(ctx: &Context) -> Result<(), Failure> {
    let plots = ctx.out.join(PLOTS_DIR);
    if plots.exists() {
        fs::remove_dir_all(&plots)?;
    }
    fs::create_dir_all(&plots)?;
    let mut rec = ctx.recorder("export-plots")?;
    let mut made = 0usize;

    if let Some(table) = read_table(&ctx.table_path())?.filter(FeatureTable::has_targets) {
        for f in Feature::ALL {
            let mut text = format!("graph_id,{f},top1_error\n");
            for r in &table.rows {
                text.push_str(&format!(
                    "{},{},{}\n",
                    r.graph_id,
                    format_real(r.features[f]),
                    format_real(r.target.unwrap_or(f64::NAN))
                ));
            }
            rec.write(&format!("{PLOTS_DIR}/scatter/{f}.csv"), text.as_bytes())?;
            made += 1;
        }
    }

    let sfs_path = ctx.out.join(SFS_CSV);
    if sfs_path.exists() {
        let records = read_sfs_csv(fs::File::open(&sfs_path)?)?;
        rec.write_with(&format!("{PLOTS_DIR}/sfs.csv"), |w| write_sfs_csv(&records, w))?;
        made += 1;
    }
    for f in Feature::ALL {
        let p = ctx.out.join(FIXED_FIRST_DIR).join(format!("{f}.csv"));
        if p.exists() {
            let records = read_sfs_csv(fs::File::open(&p)?)?;
            rec.write_with(&format!("{PLOTS_DIR}/{FIXED_FIRST_DIR}/{f}.csv"), |w| {
                write_sfs_csv(&records, w)
            })?;
            made += 1;
        }
    }
    let sim = ctx.out.join(SIMILARITY_CSV);
    if sim.exists() {
        rec.write(&format!("{PLOTS_DIR}/{SIMILARITY_CSV}"), &fs::read(&sim)?)?;
        made += 1;
    }

    let search_dir = ctx.out.join(SEARCH_DIR);
    if let Some(trace) = load_trace(&search_dir)? {
        rec.write_with(&format!("{PLOTS_DIR}/search_path.csv"), |w| write_path_csv(&trace, w))?;
        rec.write_with(&format!("{PLOTS_DIR}/search_cost.csv"), |w| write_cost_csv(&trace, w))?;
        made += 2;
    }
    let buckets = search_dir.join("buckets.csv");
    if buckets.exists() {
        rec.write(&format!("{PLOTS_DIR}/search_buckets.csv"), &fs::read(&buckets)?)?;
        made += 1;
    }
    eprintln!("exported {made} plot tables to {}", plots.display());
    ctx.finish(rec)
}
