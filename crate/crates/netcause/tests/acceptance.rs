//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
//!
//! Run everything with `cargo test -p netcause --test acceptance`, or pick
//! criteria by number: `cargo test -p netcause --test acceptance -- 3 5`.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use netcause::core::crossfit::{self, make_folds, oracle_nuisances, NuisanceSource, NuisanceTable};
use netcause::core::embed::{loss, loss_gradient, EmbeddingModel, LinearHead, LossWeights, TrainConfig};
use netcause::core::estimators::{clip_propensities, estimate, Estimator, DEFAULT_CLIP_EPSILON};
use netcause::core::graph::{Graph, SamplerConfig, SbmSpec, WalkSampler};
use netcause::core::seed::{self, derive, Stage};
use netcause::core::simulate::{simulate_treatment_outcome, SimulatedDataset, SimulationConfig};
use netcause::core::units::UnitTable;
use netcause::pipeline::{self, Network};
use netcause::ExperimentConfig;
use rand::Rng;
use rand_distr::StandardNormal;

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "gradient matches central differences", budget: secs(10), run: gradient_correctness },
    Criterion { id: 2, name: "estimator algebra on enumerated datasets", budget: secs(30), run: estimator_algebra },
    Criterion { id: 3, name: "oracle-nuisance consistency", budget: secs(120), run: oracle_consistency },
    Criterion { id: 4, name: "double robustness", budget: secs(180), run: double_robustness },
    Criterion { id: 5, name: "influence-function interval coverage", budget: secs(600), run: ci_coverage },
    Criterion { id: 6, name: "end-to-end learned pipeline", budget: secs(900), run: learned_pipeline },
    Criterion { id: 7, name: "exogeneity sweep shape", budget: secs(1800), run: exogeneity_sweep },
    Criterion { id: 8, name: "masking contract", budget: secs(60), run: masking_contract },
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; exceeded {}s budget", c.budget.as_secs())),
            other => other,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {}. {} ({:.1}s): {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    if selected.is_empty() || selected.contains(&9) {
        println!("{}", pokec_stretch());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn core<T>(r: netcause::core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn net<T>(r: netcause::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- 1

struct Instance {
    model: EmbeddingModel,
    sample: netcause::core::graph::SubgraphSample,
    units: UnitTable,
    cfg: TrainConfig,
}

fn random_instance(seed: u64) -> Instance {
    let mut rng = seed::rng(seed);
    let n = rng.random_range(4..=20);
    let dim = rng.random_range(1..=4);
    let graph = loop {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|_| rng.random::<f64>() < 0.3)
            .collect();
        let (g, _) = Graph::from_edges(n, edges).unwrap();
        if g.edge_count() > 0 && (0..n).all(|v| g.degree(v) + 1 < n) {
            break g;
        }
    };
    let mut normal = |scale: f64| scale * rng.sample::<f64, _>(StandardNormal);
    let embeddings = (0..n * dim).map(|_| normal(0.7)).collect();
    let mut head = || LinearHead { weights: (0..dim).map(|_| normal(0.5)).collect(), bias: normal(0.5) };
    let heads = [head(), head()];
    let thead = head();
    let model = EmbeddingModel::from_parts(dim, embeddings, heads, thead).unwrap();
    let treatment = (0..n).map(|_| rng.random::<bool>()).collect();
    let outcome = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let folds: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
    let units = UnitTable::new(treatment, outcome).unwrap().with_folds(&folds).unwrap();
    let cfg = TrainConfig {
        dim,
        sampler: SamplerConfig {
            walk_edges: rng.random_range(1..=6),
            negatives_per_positive: rng.random_range(1..=3),
            ..SamplerConfig::default()
        },
        weights: LossWeights {
            edge: rng.random_range(0.1..2.0),
            outcome: rng.random_range(0.1..2.0),
            treatment: rng.random_range(0.1..2.0),
        },
        masked_fold: if rng.random::<bool>() { Some(rng.random_range(0..3)) } else { None },
        ..TrainConfig::default()
    };
    let sample = WalkSampler::new(&graph, cfg.sampler).unwrap().sample(&mut rng).unwrap();
    Instance { model, sample, units, cfg }
}

type Accessor = Box<dyn Fn(&mut EmbeddingModel) -> &mut f64>;

fn max_gradient_error(inst: &mut Instance) -> f64 {
    const H: f64 = 1e-5;
    let exact = loss_gradient(&inst.model, &inst.sample, &inst.units, &inst.cfg).unwrap();
    let dim = inst.model.dim();
    // Every parameter as (accessor, analytic derivative).
    let mut params: Vec<(Accessor, f64)> = Vec::new();
    for node in 0..inst.model.node_count() {
        for d in 0..dim {
            params.push((Box::new(move |m| &mut m.embedding_mut(node)[d]), exact.embedding(node).map_or(0.0, |e| e[d])));
        }
    }
    for arm in 0..2 {
        for d in 0..dim {
            params.push((Box::new(move |m| &mut m.outcome_heads[arm].weights[d]), exact.outcome_heads[arm].weights[d]));
        }
        params.push((Box::new(move |m| &mut m.outcome_heads[arm].bias), exact.outcome_heads[arm].bias));
    }
    for d in 0..dim {
        params.push((Box::new(move |m| &mut m.treatment_head.weights[d]), exact.treatment_head.weights[d]));
    }
    params.push((Box::new(|m| &mut m.treatment_head.bias), exact.treatment_head.bias));
    let mut worst: f64 = 0.0;
    for (get, analytic) in params {
        let x = *get(&mut inst.model);
        *get(&mut inst.model) = x + H;
        let up = loss(&inst.model, &inst.sample, &inst.units, &inst.cfg).unwrap();
        *get(&mut inst.model) = x - H;
        let down = loss(&inst.model, &inst.sample, &inst.units, &inst.cfg).unwrap();
        *get(&mut inst.model) = x;
        let numeric = (up - down) / (2.0 * H);
        worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0));
    }
    worst
}

fn gradient_correctness() -> Check {
    let worst = (0..20)
        .map(|s| max_gradient_error(&mut random_instance(derive(1, Stage::Sample, s))))
        .fold(0.0, f64::max);
    ensure(worst < 1e-5, format!("max relative error {worst:.2e} over 20 instances (< 1e-5)"))
}

// ---------------------------------------------------------------- 2

/// Direct evaluation of the four adjusted estimators on one dataset,
/// written from the formulas without sharing code with the library.
fn brute_force(t: &[bool], y: &[f64], q0: &[f64], q1: &[f64], g: &[f64], fold: &[usize]) -> [f64; 4] {
    let folds: Vec<Vec<usize>> = {
        let k = fold.iter().max().unwrap() + 1;
        (0..k).map(|f| (0..t.len()).filter(|&i| fold[i] == f).collect()).collect()
    };
    let avg = |per_unit: &dyn Fn(usize) -> f64| {
        folds.iter().map(|rows| rows.iter().map(|&i| per_unit(i)).sum::<f64>() / rows.len() as f64).sum::<f64>()
            / folds.len() as f64
    };
    let h = |i: usize| if t[i] { 1.0 / g[i] } else { -1.0 / (1.0 - g[i]) };
    let q_obs = |i: usize| if t[i] { q1[i] } else { q0[i] };
    let psi_q = avg(&|i| q1[i] - q0[i]);
    let psi_g = avg(&|i| h(i) * y[i]);
    let psi_a = avg(&|i| q1[i] - q0[i] + h(i) * (y[i] - q_obs(i)));
    let mut eps = vec![0.0; folds.len()];
    for (f, rows) in folds.iter().enumerate() {
        let num: f64 = rows.iter().map(|&i| h(i) * (y[i] - q_obs(i))).sum();
        let den: f64 = rows.iter().map(|&i| h(i) * h(i)).sum();
        eps[f] = num / den;
    }
    let psi_t = avg(&|i| (q1[i] + eps[fold[i]] / g[i]) - (q0[i] - eps[fold[i]] / (1.0 - g[i])));
    [psi_q, psi_g, psi_a, psi_t]
}

fn estimator_algebra() -> Check {
    const ESTIMATORS: [Estimator; 4] = [Estimator::Q, Estimator::Iptw, Estimator::Aiptw, Estimator::Tmle];
    let q0_grid = [-0.5, 1.0];
    let q1_grid = [0.25, 1.5];
    let g_grid = [0.2, 0.7];
    let outcomes: [[f64; 4]; 3] = [[-1.0, 0.5, 2.0, 0.0], [1.0, 1.0, -2.0, 3.5], [0.3, -0.7, 1.1, -1.9]];
    let fold_layouts: [[usize; 4]; 2] = [[0, 0, 0, 0], [0, 1, 0, 1]];
    let (mut datasets, mut worst) = (0usize, 0.0f64);
    for fold in &fold_layouts {
        for y in &outcomes {
            for tmask in 0..16u32 {
                let t: Vec<bool> = (0..4).map(|i| tmask >> i & 1 == 1).collect();
                // Every unit picks one of 8 (q0, q1, g) combinations.
                for nmask in 0..8u32.pow(4) {
                    let pick = |i: usize| (nmask / 8u32.pow(i as u32) % 8) as usize;
                    let q0: Vec<f64> = (0..4).map(|i| q0_grid[pick(i) & 1]).collect();
                    let q1: Vec<f64> = (0..4).map(|i| q1_grid[pick(i) >> 1 & 1]).collect();
                    let g: Vec<f64> = (0..4).map(|i| g_grid[pick(i) >> 2 & 1]).collect();
                    let expected = brute_force(&t, y, &q0, &q1, &g, fold);
                    let table = NuisanceTable::new(q0, q1, g, fold.to_vec(), vec![NuisanceSource::External; 4])
                        .map_err(|e| e.to_string())?;
                    let units = UnitTable::new(t.clone(), y.to_vec()).unwrap().with_folds(fold).unwrap();
                    for (e, want) in ESTIMATORS.iter().zip(expected) {
                        let got = core(estimate(*e, &table, &units))?.psi_hat;
                        worst = worst.max((got - want).abs());
                    }
                    datasets += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-10, format!("{datasets} datasets, max |difference| {worst:.1e} (<= 1e-10)"))
}

// ------------------------------------------------------------- 3, 4, 5

const LEVELS: [f64; 3] = [0.15, 0.5, 0.85];

/// Three equal blocks totalling `n` nodes, with average degree near 12.
fn sbm(n: usize) -> SbmSpec {
    let b = n / 3;
    let within = 10.0 / b as f64;
    SbmSpec { block_sizes: vec![b, b, n - 2 * b], within_prob: within, between_prob: within / 10.0 }
}

fn simulate_on_sbm(n: usize, beta: f64, seed: u64) -> Result<(SimulatedDataset, UnitTable, NuisanceTable), String> {
    let (_, attrs) = core(sbm(n).generate(derive(seed, Stage::Graph, 0)))?;
    let cfg = SimulationConfig { beta, propensity_levels: LEVELS.to_vec(), rng_seed: seed, ..Default::default() };
    let data = core(simulate_treatment_outcome(&attrs, &cfg))?;
    let folds = core(make_folds(n, 10, derive(seed, Stage::Folds, 0)))?;
    let units = core(data.units().and_then(|u| u.with_folds(folds.fold_of())))?;
    let oracle = core(oracle_nuisances(&data, &folds).and_then(|t| clip_propensities(&t, DEFAULT_CLIP_EPSILON)))?;
    Ok((data, units, oracle))
}

/// Population difference in means under the block design:
/// `1 + beta (E[g | t=1] - E[g | t=0])`.
fn unadjusted_limit(spec: &SbmSpec, beta: f64) -> f64 {
    let n: usize = spec.block_sizes.iter().sum();
    let w: Vec<f64> = spec.block_sizes.iter().map(|&b| b as f64 / n as f64).collect();
    let moment = |f: &dyn Fn(f64) -> f64| w.iter().zip(LEVELS).map(|(w, g)| w * f(g)).sum::<f64>();
    let treated = moment(&|g| g * g) / moment(&|g| g);
    let control = moment(&|g| g * (1.0 - g)) / moment(&|g| 1.0 - g);
    1.0 + beta * (treated - control)
}

fn oracle_consistency() -> Check {
    let n = 50_000;
    let (_, units, oracle) = simulate_on_sbm(n, 10.0, 3)?;
    let a = core(estimate(Estimator::Aiptw, &oracle, &units))?;
    let u = core(estimate(Estimator::Unadjusted, &oracle, &units))?;
    let limit = unadjusted_limit(&sbm(n), 10.0);
    let detail = format!(
        "AIPTW {:.4} (1 +- 0.03); unadjusted {:.4}, bias {:.3} (>= 0.5), closed form {limit:.4} +- 4 SE {:.4}",
        a.psi_hat,
        u.psi_hat,
        u.psi_hat - 1.0,
        4.0 * u.std_error()
    );
    ensure(
        (a.psi_hat - 1.0).abs() <= 0.03 && u.psi_hat - 1.0 >= 0.5 && (u.psi_hat - limit).abs() <= 4.0 * u.std_error(),
        detail,
    )
}

fn double_robustness() -> Check {
    let (_, units, oracle) = simulate_on_sbm(50_000, 10.0, 4)?;
    let n = oracle.len();
    let mut wrong_q = oracle.clone();
    wrong_q.q0 = vec![0.0; n];
    wrong_q.q1 = vec![0.0; n];
    let mut wrong_g = oracle.clone();
    wrong_g.g = vec![0.5; n];
    let a_q = core(estimate(Estimator::Aiptw, &wrong_q, &units))?.psi_hat;
    let a_g = core(estimate(Estimator::Aiptw, &wrong_g, &units))?.psi_hat;
    ensure(
        (a_q - 1.0).abs() <= 0.05 && (a_g - 1.0).abs() <= 0.05,
        format!("AIPTW with Q = 0: {a_q:.4}; with g = 0.5: {a_g:.4} (each 1 +- 0.05)"),
    )
}

fn ci_coverage() -> Check {
    let reps = 200u64;
    let mut covered = 0;
    for r in 0..reps {
        let (_, units, oracle) = simulate_on_sbm(5000, 1.0, derive(5, Stage::Simulate, r))?;
        if core(estimate(Estimator::Aiptw, &oracle, &units))?.covers(1.0) {
            covered += 1;
        }
    }
    let rate = covered as f64 / reps as f64;
    ensure((0.91..=0.99).contains(&rate), format!("{covered}/{reps} = {:.1}% covered (91%..99%)", 100.0 * rate))
}

// ------------------------------------------------------------- 6, 7

fn fixture(seed: u64) -> Result<(ExperimentConfig, Network), String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/sbm.toml");
    let mut cfg = net(ExperimentConfig::load(Some(&path), &[]))?;
    cfg.seed = seed;
    cfg.baselines = vec!["unadjusted".into()];
    let network = net(pipeline::load_network(&cfg))?;
    Ok((cfg, network))
}

fn psi(reports: &[netcause::core::estimators::EstimateReport], e: Estimator) -> f64 {
    reports.iter().find(|r| r.estimator == e).map(|r| r.psi_hat).expect("estimator reported")
}

fn learned_pipeline() -> Check {
    let mut wins = 0;
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for seed in 0..10 {
        let (cfg, network) = fixture(seed)?;
        let observed = net(pipeline::observe(&cfg, &network))?;
        let run = net(pipeline::estimate(&cfg, &network, &observed, None))?;
        let (a, u) = (psi(&run.reports, Estimator::Aiptw), psi(&run.reports, Estimator::Unadjusted));
        wins += usize::from((a - 1.0).abs() < (u - 1.0).abs());
        worst = worst.max((a - 1.0).abs());
        values.push(format!("{a:.3}/{u:.3}"));
    }
    ensure(
        wins >= 9 && worst <= 0.15,
        format!("AIPTW closer than unadjusted in {wins}/10 (>= 9); max |AIPTW - 1| {worst:.3} (<= 0.15); AIPTW/unadjusted [{}]", values.join(" ")),
    )
}

fn exogeneity_sweep() -> Check {
    let seeds = 5;
    let grid = [0.0, 0.25, 0.5, 0.75];
    let error = |e: Estimator, points: &[pipeline::SweepPoint], i: usize| (psi(&points[i].reports, e) - 1.0).abs();
    // Mean absolute error per (grid point, estimator).
    let tracked = [Estimator::Q, Estimator::Iptw, Estimator::Aiptw, Estimator::Tmle, Estimator::Unadjusted];
    let mut mae = vec![[0.0; 5]; grid.len()];
    for seed in 0..seeds {
        let (mut cfg, network) = fixture(seed)?;
        let observed = net(pipeline::observe(&cfg, &network))?;
        let base = net(pipeline::estimate(&cfg, &network, &observed, None))?.table;
        cfg.simulation.beta = 10.0;
        cfg.sweep.grid = grid.to_vec();
        let points = net(pipeline::sweep(&cfg, &network, &base))?;
        for (i, row) in mae.iter_mut().enumerate() {
            for (slot, &e) in row.iter_mut().zip(&tracked) {
                *slot += error(e, &points, i) / seeds as f64;
            }
        }
    }
    let last = grid.len() - 1;
    let robust_vs_q = mae[0][2] <= mae[0][0];
    let adjusted_vs_unadjusted = mae[last][..4].iter().all(|&m| m < mae[last][4]);
    let table: Vec<String> = grid
        .iter()
        .zip(&mae)
        .map(|(p, r)| format!("p={p}: Q {:.3} IPTW {:.3} AIPTW {:.3} TMLE {:.3} unadj {:.3}", r[0], r[1], r[2], r[3], r[4]))
        .collect();
    ensure(
        robust_vs_q && adjusted_vs_unadjusted,
        format!(
            "mean |error| over {seeds} seeds; p=0 AIPTW <= Q: {robust_vs_q}; p={} all adjusted < unadjusted: {adjusted_vs_unadjusted}; {}",
            grid[last],
            table.join("; ")
        ),
    )
}

// ---------------------------------------------------------------- 8

fn masking_contract() -> Check {
    let spec = SbmSpec { block_sizes: vec![100, 100, 100], within_prob: 0.1, between_prob: 0.01 };
    let (graph, attrs) = core(spec.generate(11))?;
    let data = core(simulate_treatment_outcome(&attrs, &SimulationConfig { rng_seed: 11, ..Default::default() }))?;
    let folds = core(make_folds(300, 4, 12))?;
    let units = core(data.units().and_then(|u| u.with_folds(folds.fold_of())))?;
    let cfg = TrainConfig {
        dim: 6,
        pretrain_steps: 300,
        step_count: 400,
        rng_seed: 13,
        sampler: SamplerConfig { walk_edges: 20, ..SamplerConfig::default() },
        ..TrainConfig::default()
    };
    let start = core(netcause::core::embed::pretrain(&graph, &cfg))?;
    let mut rng = seed::rng(14);
    for k in 0..folds.k() {
        let model = core(crossfit::train_fold(&start, &graph, &units, &cfg, k))?;
        let mut perturbed = units.clone();
        perturbed.relabel_fold(k, |_| (rng.random(), 3.0 * rng.sample::<f64, _>(StandardNormal)));
        if perturbed == units {
            return Err(format!("fold {k}: perturbation changed nothing"));
        }
        let again = core(crossfit::train_fold(&start, &graph, &perturbed, &cfg, k))?;
        if again != model {
            return Err(format!("fold {k}: model changed after relabelling its held-out units"));
        }
        let other = (k + 1) % folds.k();
        if core(crossfit::train_fold(&start, &graph, &perturbed, &cfg, other))? == core(crossfit::train_fold(&start, &graph, &units, &cfg, other))? {
            return Err(format!("fold {other}: labels of fold {k} had no effect on a model that sees them"));
        }
    }
    Ok(format!("{} per-fold models bit-identical under held-out relabelling", folds.k()))
}

// ---------------------------------------------------------------- 9

/// Not gating: runs only when `NETCAUSE_POKEC_CONFIG` names a config for the
/// ingested Pokec subset.
fn pokec_stretch() -> String {
    let Ok(path) = std::env::var("NETCAUSE_POKEC_CONFIG") else {
        return "SKIP 9. Pokec stretch (not gating): set NETCAUSE_POKEC_CONFIG to a config for the ingested subset".into();
    };
    let run = || -> Check {
        let mut cfg = net(ExperimentConfig::load(Some(Path::new(&path)), &[]))?;
        cfg.baselines = vec!["unadjusted".into(), "two_stage".into()];
        let network = net(pipeline::load_network(&cfg))?;
        let observed = net(pipeline::observe(&cfg, &network))?;
        let r = net(pipeline::estimate(&cfg, &network, &observed, None))?.reports;
        let err = |e| (psi(&r, e) - 1.0).abs();
        let detail = format!(
            "{} nodes, {} edges; AIPTW {:.3}, unadjusted {:.3}, two-stage {:.3}",
            network.graph.node_count(),
            network.graph.edge_count(),
            psi(&r, Estimator::Aiptw),
            psi(&r, Estimator::Unadjusted),
            psi(&r, Estimator::TwoStage)
        );
        let a = err(Estimator::Aiptw);
        ensure(a < err(Estimator::Unadjusted) && a < err(Estimator::TwoStage), detail)
    };
    match run() {
        Ok(d) => format!("PASS 9. Pokec stretch (not gating): {d}"),
        Err(d) => format!("FAIL 9. Pokec stretch (not gating): {d}"),
    }
}
