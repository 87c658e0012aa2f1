use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, Context as _};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use ddro_core::algorithms::{run_with_observer, AlgorithmConfig, IterationRecord, SolveOutcome};
use ddro_core::evaluation::{compare_variants, evaluate_plan, sample_scenarios, EvaluationSpec};
use ddro_core::instances::{
    default_case_study_path, generate_random, instance_to_json_with_manifest, load_case_study, load_instance,
    with_vertex_support, CaseStudyOptions, GeneratorSpec,
};
use ddro_core::model::{validate_instance, InvestmentPlan, NetworkInstance};
use ddro_core::solver::{Backend, SolverConfig};

use crate::manifest::{RunManifest, OUTPUT_SCHEMA};
use crate::{AlgorithmArgs, BenchmarkArgs, CompareArgs, EvaluateArgs, GenerateArgs, SolveArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_SOLVE: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

type CliResult<T> = Result<T, CliError>;

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> CliError {
    move |error| CliError { code, error }
}

impl From<ddro_core::Error> for CliError {
    fn from(e: ddro_core::Error) -> Self {
        use ddro_core::Error as E;
        let code = match e.root() {
            E::Solver(_) => EXIT_SOLVE,
            E::Io { .. } => EXIT_IO,
            _ => EXIT_VALIDATION,
        };
        CliError {
            code,
            error: anyhow::Error::new(e),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct FileConfig {
    solver: SolverConfig,
}

pub struct Context {
    solver: SolverConfig,
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(fail(EXIT_IO))?;
    }
    std::fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(fail(EXIT_IO))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| fail(EXIT_IO)(e.into()))?;
    text.push('\n');
    write_file(path, &text)
}

fn read_json(path: &Path) -> CliResult<serde_json::Value> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(fail(EXIT_IO))?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(fail(EXIT_VALIDATION))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Document<'a, T: Serialize> {
    schema: u64,
    manifest: serde_json::Value,
    #[serde(flatten)]
    body: &'a T,
}

fn document<T: Serialize>(manifest: RunManifest, body: &T) -> Document<'_, T> {
    Document {
        schema: OUTPUT_SCHEMA,
        manifest: manifest.finish().to_value(),
        body,
    }
}

impl AlgorithmArgs {
    fn config(&self) -> AlgorithmConfig {
        let mut c = AlgorithmConfig::new(self.algorithm)
            .with_variant(self.moment)
            .with_stop_gap(self.gap);
        c.time_limit = self.time_limit;
        c.threads = self.threads;
        c.max_iterations = self.max_iterations;
        c
    }
}

impl Context {
    pub fn new(config: Option<&Path>) -> CliResult<Self> {
        let file = match config {
            None => FileConfig::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))
                    .map_err(fail(EXIT_IO))?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))
                    .map_err(fail(EXIT_VALIDATION))?
            }
        };
        Ok(Self {
            solver: file.solver.with_env(),
        })
    }

    fn backend(&self) -> CliResult<Box<dyn Backend>> {
        self.solver.backend().map_err(|e| fail(EXIT_VALIDATION)(e.into()))
    }

    fn load(&self, path: &Path) -> CliResult<NetworkInstance> {
        Ok(load_instance(path)?)
    }

    fn apply_threads(&self, mut c: AlgorithmConfig) -> AlgorithmConfig {
        if c.threads.is_none() {
            c.threads = self.solver.threads;
        }
        c
    }

    pub fn generate(&self, a: &GenerateArgs) -> CliResult<u8> {
        let (instance, config) = if a.case_study {
            let mut o = CaseStudyOptions::default();
            if let Some(t) = a.target_sum {
                o.target_sum = t;
            }
            if let Some(p) = a.import_premium {
                o.import_premium_2050 = p;
            }
            if let Some(y) = a.operating_years {
                o.operating_years = y;
            }
            o.years = a.years.clone();
            let path = a.case_data.clone().unwrap_or_else(default_case_study_path);
            let x = load_case_study(&path, &o)?;
            (x, serde_json::to_value(&o).expect("options serialize"))
        } else {
            let mut spec = GeneratorSpec {
                n_supply: a.supply,
                n_demand: a.demand,
                n_port: a.ports,
                n_periods: a.periods,
                seed: a.seed,
                ..GeneratorSpec::default()
            };
            if let Some(t) = a.target_sum {
                spec.target_sum = t;
            }
            let mut x = generate_random(&spec)?;
            if let Some(k) = a.discrete {
                x = with_vertex_support(&x, k, a.seed)?;
            }
            let mut cfg = serde_json::to_value(&spec).expect("spec serializes");
            cfg["discrete"] = serde_json::json!(a.discrete);
            (x, cfg)
        };
        let violations = validate_instance(&instance);
        if !violations.is_empty() {
            return Err(ddro_core::Error::Validation(violations).into());
        }
        let manifest = RunManifest::new("generate", config).seed(a.seed).without_timestamps();
        write_file(&a.out, &instance_to_json_with_manifest(&instance, Some(manifest.to_value())))?;
        println!(
            "{}: {} supply, {} port, {} demand, {} periods; validation passed",
            instance.name,
            instance.n_supply(),
            instance.n_ports(),
            instance.n_demand(),
            instance.periods
        );
        Ok(EXIT_OK)
    }

    pub fn solve(&self, a: &SolveArgs) -> CliResult<u8> {
        let instance = self.load(&a.instance)?;
        let mut config = self.apply_threads(a.algo.config());
        config.dump_lp = a.dump_lp.clone();
        let manifest = RunManifest::new("solve", serde_json::to_value(&config).expect("config serializes")).instance(&instance);
        let backend = self.backend()?;
        let mut log_sink = match &a.log_file {
            Some(p) => Some(BufWriter::new(
                File::create(p)
                    .with_context(|| format!("creating {}", p.display()))
                    .map_err(fail(EXIT_IO))?,
            )),
            None => None,
        };
        let mut sink_error = None;
        let mut observer = |r: &IterationRecord| {
            if let Some(w) = log_sink.as_mut() {
                let line = serde_json::to_string(r).expect("records serialize");
                if let Err(e) = writeln!(w, "{line}").and_then(|_| w.flush()) {
                    sink_error.get_or_insert(e);
                }
            }
        };
        let outcome = run_with_observer(&instance, &config, backend.as_ref(), &mut observer)?;
        if let Some(e) = sink_error {
            return Err(fail(EXIT_IO)(anyhow!(e).context("writing the iteration log")));
        }
        write_json(&a.out, &document(manifest, &SolveBody { outcome: &outcome }))?;
        if let Some(dir) = &a.plot_data {
            write_plot_data(dir, &instance, &outcome)?;
        }
        info!(
            "{}: {:?}, objective {:.6}, bound {:.6}, gap {:.4}%, {} iterations",
            outcome.algorithm,
            outcome.status,
            outcome.objective,
            outcome.bound,
            100.0 * outcome.gap,
            outcome.iterations
        );
        Ok(if outcome.status.is_success() { EXIT_OK } else { EXIT_SOLVE })
    }

    pub fn evaluate(&self, a: &EvaluateArgs) -> CliResult<u8> {
        let instance = self.load(&a.instance)?;
        let plan = read_plan(&a.plan)?;
        let spec = EvaluationSpec {
            n_scenarios: a.scenarios,
            seed: a.seed,
            cv: a.cv,
            moment: a.moment,
            ..EvaluationSpec::default()
        };
        let backend = self.backend()?;
        let scenarios = sample_scenarios(&instance, &plan, &spec)?;
        let eval = evaluate_plan(&instance, &plan, &scenarios, backend.as_ref())?;
        let s = &eval.statistics;
        let csv = format!(
            "average,quantile50,quantile75,quantile90,cvar50,cvar75,cvar90,investmentCost\n{},{},{},{},{},{},{},{}\n",
            s.average, s.quantile50, s.quantile75, s.quantile90, s.cvar50, s.cvar75, s.cvar90, eval.investment_cost
        );
        write_file(&a.out, &csv)?;
        let manifest = RunManifest::new("evaluate", serde_json::to_value(&spec).expect("spec serializes"))
            .instance(&instance)
            .seed(a.seed);
        if let Some(p) = &a.json {
            write_json(p, &document(manifest, &eval))?;
        }
        if let Some(p) = &a.plot_data {
            let mut out = String::from("scenario,value\n");
            for (k, v) in eval.values.iter().enumerate() {
                let _ = writeln!(out, "{k},{v}");
            }
            write_file(p, &out)?;
        }
        Ok(EXIT_OK)
    }

    pub fn compare(&self, a: &CompareArgs) -> CliResult<u8> {
        let instance = self.load(&a.instance)?;
        let config = self.apply_threads(a.algo.config());
        let spec = EvaluationSpec {
            n_scenarios: a.scenarios,
            seed: a.seed,
            cv: a.cv,
            variants: a.variants.clone(),
            common_mean: a.common_mean,
            moment: a.algo.moment,
        };
        let backend = self.backend()?;
        let report = compare_variants(&instance, &spec, &config, backend.as_ref())?;
        for (v, e) in &report.failures {
            warn!("{v}: {e}");
        }
        write_file(&a.out, &report.to_csv())?;
        let manifest = RunManifest::new(
            "compare",
            serde_json::json!({ "evaluation": spec, "algorithm": config }),
        )
        .instance(&instance)
        .seed(a.seed);
        if let Some(p) = &a.json {
            write_json(p, &document(manifest, &report))?;
        }
        if let Some(p) = &a.plot_data {
            let mut out = String::from("scenario");
            for r in &report.rows {
                let _ = write!(out, ",{}", r.variant);
            }
            out.push('\n');
            for k in 0..spec.n_scenarios {
                let _ = write!(out, "{k}");
                for r in &report.rows {
                    let _ = write!(out, ",{}", r.evaluation.values[k]);
                }
                out.push('\n');
            }
            write_file(p, &out)?;
        }
        Ok(if report.failures.is_empty() { EXIT_OK } else { EXIT_SOLVE })
    }

    pub fn benchmark(&self, a: &BenchmarkArgs) -> CliResult<u8> {
        let cells = parse_grid(&a.grid).map_err(fail(EXIT_VALIDATION))?;
        let mut jobs: Vec<(usize, usize, usize, u64)> = Vec::new();
        for &(s, d, t) in &cells {
            for seed in 0..a.seeds {
                jobs.push((s, d, t, seed));
            }
        }
        let rows: Mutex<Vec<Option<String>>> = Mutex::new(vec![None; jobs.len()]);
        let errors: Mutex<Vec<String>> = Mutex::new(Vec::new());
        let next = AtomicUsize::new(0);
        let workers = a.jobs.max(1).min(jobs.len().max(1));
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| {
                    let backend = match self.backend() {
                        Ok(b) => b,
                        Err(e) => {
                            errors.lock().unwrap().push(e.error.to_string());
                            return;
                        }
                    };
                    loop {
                        let k = next.fetch_add(1, Ordering::SeqCst);
                        let Some(&(s, d, t, seed)) = jobs.get(k) else { break };
                        match benchmark_row(a, s, d, t, seed, backend.as_ref(), self.solver.threads) {
                            Ok(line) => rows.lock().unwrap()[k] = Some(line),
                            Err(e) => errors.lock().unwrap().push(format!("cell {s}/{d} T={t} seed {seed}: {e}")),
                        }
                    }
                });
            }
        });
        let mut csv = String::from("supply,demand,periods,seed");
        for alg in &a.algorithms {
            let _ = write!(csv, ",{alg}_status,{alg}_gap_pct,{alg}_iterations,{alg}_minutes");
        }
        csv.push('\n');
        for line in rows.into_inner().unwrap().into_iter().flatten() {
            csv.push_str(&line);
            csv.push('\n');
        }
        std::fs::create_dir_all(&a.out)
            .with_context(|| format!("creating {}", a.out.display()))
            .map_err(fail(EXIT_IO))?;
        write_file(&a.out.join("results.csv"), &csv)?;
        let manifest = RunManifest::new(
            "benchmark",
            serde_json::json!({
                "grid": a.grid, "seeds": a.seeds, "algorithms": a.algorithms,
                "gap": a.gap, "timeLimit": a.time_limit, "jobs": a.jobs,
            }),
        );
        write_json(&a.out.join("manifest.json"), &document(manifest, &serde_json::json!({})))?;
        let errors = errors.into_inner().unwrap();
        for e in &errors {
            warn!("{e}");
        }
        Ok(if errors.is_empty() { EXIT_OK } else { EXIT_SOLVE })
    }
}

#[derive(Serialize)]
struct SolveBody<'a> {
    outcome: &'a SolveOutcome,
}

fn benchmark_row(
    a: &BenchmarkArgs,
    s: usize,
    d: usize,
    t: usize,
    seed: u64,
    backend: &dyn Backend,
    threads: Option<u32>,
) -> anyhow::Result<String> {
    let instance = generate_random(&GeneratorSpec::new(s, d, t, seed))?;
    let mut line = format!("{s},{d},{t},{seed}");
    for &alg in &a.algorithms {
        let mut c = AlgorithmConfig::new(alg).with_stop_gap(a.gap).with_time_limit(a.time_limit);
        c.threads = threads;
        let o = run_with_observer(&instance, &c, backend, &mut |_| {})?;
        let _ = write!(line, ",{:?},{},{},{}", o.status, 100.0 * o.gap, o.iterations, o.seconds / 60.0);
        info!("{s}/{d} T={t} seed {seed} {alg}: {:?} after {} iterations", o.status, o.iterations);
    }
    Ok(line)
}

/// `S/D,S/D:T,T` into `(supply, demand, periods)` cells.
pub fn parse_grid(spec: &str) -> anyhow::Result<Vec<(usize, usize, usize)>> {
    let (nodes, periods) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("grid `{spec}` needs the form S/D,...:T,..."))?;
    let mut sizes = Vec::new();
    for item in nodes.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (s, d) = item.split_once('/').ok_or_else(|| anyhow!("cell `{item}` needs the form S/D"))?;
        sizes.push((s.trim().parse::<usize>()?, d.trim().parse::<usize>()?));
    }
    let periods: Vec<usize> = periods
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|p| p.parse::<usize>())
        .collect::<Result<_, _>>()?;
    if sizes.is_empty() || periods.is_empty() {
        return Err(anyhow!("grid `{spec}` is empty"));
    }
    if sizes.iter().any(|&(s, d)| s == 0 || d == 0) || periods.contains(&0) {
        return Err(anyhow!("grid counts must be positive"));
    }
    Ok(sizes
        .iter()
        .flat_map(|&(s, d)| periods.iter().map(move |&t| (s, d, t)))
        .collect())
}

fn read_plan(path: &Path) -> CliResult<InvestmentPlan> {
    let v = read_json(path)?;
    let node = v
        .get("outcome")
        .and_then(|o| o.get("plan"))
        .or_else(|| v.get("plan"))
        .unwrap_or(&v);
    serde_json::from_value(node.clone())
        .with_context(|| format!("no investment plan in {}", path.display()))
        .map_err(fail(EXIT_VALIDATION))
}

fn write_plot_data(dir: &PathBuf, instance: &NetworkInstance, outcome: &SolveOutcome) -> CliResult<()> {
    let mut bounds = String::from("iteration,lower,upper,gap\n");
    for r in &outcome.log {
        let _ = writeln!(bounds, "{},{},{},{}", r.iter, r.lb, r.ub, r.gap);
    }
    write_file(&dir.join("bounds.csv"), &bounds)?;
    let mut cap = String::from("site,period,capacity\n");
    for (i, id) in instance.supply_ids().iter().enumerate() {
        for t in 0..instance.periods {
            let label = instance.period_labels.get(t).cloned().unwrap_or_else(|| (t + 1).to_string());
            let _ = writeln!(cap, "{id},{label},{}", outcome.plan.cumulative(i, t));
        }
    }
    write_file(&dir.join("capacity.csv"), &cap)
}
