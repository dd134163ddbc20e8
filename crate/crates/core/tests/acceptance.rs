//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines print in order and unbuffered.
mod common;

use std::io::{BufRead, BufReader};
use std::path::PathBuf;
use std::time::Instant;

use common::{oracle_gradient_pair, quantize, random_raw, reference_train, trees_match, TestRng};
use gbdt_engine::io::{self, model_to_string, LoadOptions};
use gbdt_engine::loss::gradient_pair;
use gbdt_engine::node_trainer::build_histogram;
use gbdt_engine::parallel::merge_histograms;
use gbdt_engine::quantizer::{transform, BinMap, RawDataset};
use gbdt_engine::{
    estimate, evaluate_per_tree, train, CostParams, EngineMemory, FixedFormat, GradStats,
    TrainConfig,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Trees match a brute-force trainer on small random problems.
fn reference_equivalence() -> Outcome {
    let mut rng = TestRng::new(1001);
    let mut trained = std::time::Duration::ZERO;
    let mut nodes = 0;
    for case in 0..200 {
        let n = 2 + rng.below(255) as usize;
        let f = 1 + rng.below(8) as usize;
        let distinct = 1 + rng.below(16);
        let raw = random_raw(&mut rng, n, f, distinct, 0.1);
        let data = quantize(&raw);
        let cfg = TrainConfig {
            n_trees: 1 + rng.below(5) as usize,
            max_depth: 1 + rng.below(4) as usize,
            lambda: 0.25 + 2.0 * rng.unit(),
            gamma: if rng.chance(0.3) {
                0.01 * rng.unit()
            } else {
                0.0
            },
            eta: 0.1 + 0.9 * rng.unit(),
            subsample: 1.0,
            n_engines: 1 + rng.below(8) as usize,
            ..TrainConfig::default()
        };
        let t0 = Instant::now();
        let got = train(&data, raw.labels(), &cfg).map_err(|e| format!("case {case}: {e}"))?;
        trained += t0.elapsed();
        let want = reference_train(&data, raw.labels(), &cfg);
        for (t, (a, b)) in got.model.trees.iter().zip(&want.trees).enumerate() {
            trees_match(a, b, 1).map_err(|e| format!("case {case} tree {t}: {e}"))?;
            nodes += a.n_nodes();
        }
    }
    check(
        trained.as_secs_f64() < 60.0,
        format!(
            "200 datasets, {nodes} nodes within 1 ulp, training took {:.2}s",
            trained.as_secs_f64()
        ),
    )
}

/// Serialized models are byte-identical for any engine count.
fn engine_invariance() -> Outcome {
    let mut rng = TestRng::new(1002);
    let raw = random_raw(&mut rng, 10_000, 28, 64, 0.05);
    let data = quantize(&raw);
    let base = TrainConfig {
        n_trees: 20,
        max_depth: 3,
        subsample: 0.5,
        seed: 5,
        ..TrainConfig::default()
    };
    let mut files = Vec::new();
    for e in [1, 2, 4, 64] {
        let cfg = TrainConfig {
            n_engines: e,
            ..base.clone()
        };
        let model = train(&data, raw.labels(), &cfg)
            .map_err(|e| e.to_string())?
            .model;
        files.push(model_to_string(&model).map_err(|e| e.to_string())?);
    }
    let same = files.windows(2).all(|w| w[0] == w[1]);
    check(
        same,
        format!(
            "E in {{1,2,4,64}}: {} bytes each, identical = {same}",
            files[0].len()
        ),
    )
}

fn read_head(path: &PathBuf, n_rows: usize) -> Result<RawDataset, String> {
    let file = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut text = String::new();
    for line in BufReader::new(file).lines().take(n_rows) {
        text.push_str(&line.map_err(|e| e.to_string())?);
        text.push('\n');
    }
    io::read_dataset(text.as_bytes(), &LoadOptions::default()).map_err(|e| e.to_string())
}

/// Depth-1 stumps on the Higgs benchmark reach the expected AUC band.
fn higgs_auc() -> Outcome {
    const N: usize = 10_048;
    let path = std::env::var_os("HIGGS_CSV")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/HIGGS.csv"))
        });
    if !path.exists() {
        return Err(format!(
            "dataset not found at {} (set HIGGS_CSV)",
            path.display()
        ));
    }
    let all = read_head(&path, 2 * N)?;
    if all.n_samples() < 2 * N {
        return Err(format!("need {} rows, file has {}", 2 * N, all.n_samples()));
    }
    let (tr, va) = (all.slice(0, N).unwrap(), all.slice(N, 2 * N).unwrap());
    let bins = BinMap::fit(&tr, 255).map_err(|e| e.to_string())?;
    let cfg = TrainConfig {
        n_trees: 100,
        max_depth: 1,
        subsample: 0.5,
        ..TrainConfig::default()
    };
    let model = train(&transform(&tr, &bins).unwrap(), tr.labels(), &cfg)
        .map_err(|e| e.to_string())?
        .model;
    let per_tree = evaluate_per_tree(&model, &transform(&va, &bins).unwrap(), va.labels())
        .map_err(|e| e.to_string())?;
    check(
        (0.73..=0.78).contains(&per_tree.max),
        format!(
            "max validation AUC {:.4} after {} trees, band [0.73, 0.78]",
            per_tree.max, per_tree.best_trees
        ),
    )
}

/// Every histogram conserves the node totals and any sharding merges back.
fn histogram_conservation() -> Outcome {
    let mut rng = TestRng::new(1004);
    let fx = FixedFormat::default();
    for node in 0..1000 {
        let n = 1 + rng.below(400) as usize;
        let f = 1 + rng.below(8) as usize;
        let distinct = 1 + rng.below(40);
        let raw = random_raw(&mut rng, n, f, distinct, 0.1);
        let mut mem = EngineMemory::load(quantize(&raw), raw.labels(), 0.0, fx).unwrap();
        for i in 0..n {
            let s = rng.below(1 << 28) as i64 - (1 << 27);
            (mem.state.grad[i], mem.state.hess[i]) = gradient_pair(fx, s, raw.labels()[i]);
        }
        let active: Vec<usize> = (0..n).filter(|_| rng.chance(0.5)).collect();
        let mut whole = mem.clone();
        whole.init_index_table(&active).unwrap();
        let hist = build_histogram(&whole, (0, active.len()));
        let direct = active.iter().fold(GradStats::default(), |a, &i| {
            a + GradStats::new(mem.state.grad[i], mem.state.hess[i], 1)
        });
        if (0..f).any(|k| hist.feature_totals(k) != direct) {
            return Err(format!(
                "node {node}: a feature's bins do not sum to the node totals"
            ));
        }
        // Arbitrary assignment of samples to engines.
        let e = 1 + rng.below(16) as usize;
        let mut parts = vec![Vec::new(); e];
        for &i in &active {
            parts[rng.below(e as u64) as usize].push(i);
        }
        let shards: Vec<_> = parts
            .iter()
            .map(|idx| {
                let mut m = mem.clone();
                m.init_index_table(idx).unwrap();
                build_histogram(&m, (0, idx.len()))
            })
            .collect();
        if merge_histograms(&shards).unwrap() != hist {
            return Err(format!(
                "node {node}: {e}-way merge differs from the unsharded histogram"
            ));
        }
    }
    Ok("1000 nodes conserve totals, random shardings merge exactly".into())
}

/// Gradient and hessian equal the exactly rounded values.
fn gradient_exactness() -> Outcome {
    let mut rng = TestRng::new(1005);
    let fx = FixedFormat::default();
    for k in 0..10_000 {
        // Margins up to +-32, plus a band of near-zero ones.
        let s = if k % 4 == 0 {
            rng.below(1 << 20) as i64 - (1 << 19)
        } else {
            rng.below(1 << 30) as i64 - (1 << 29)
        };
        let y = rng.below(2) as u8;
        let (got, want) = (gradient_pair(fx, s, y), oracle_gradient_pair(s, y, 24));
        if got != want {
            return Err(format!("score {s} label {y}: got {got:?}, exact {want:?}"));
        }
    }
    Ok("10000 scores: grad and hess equal the 256-bit oracle".into())
}

/// Cycle estimate for the 64-engine benchmark configuration.
fn cost_estimate() -> Outcome {
    let mut rng = TestRng::new(1006);
    let raw = random_raw(&mut rng, 10_048, 28, 64, 0.0);
    let cfg = TrainConfig {
        n_trees: 100,
        max_depth: 1,
        subsample: 0.5,
        n_engines: 64,
        ..TrainConfig::default()
    };
    let out = train(&quantize(&raw), raw.labels(), &cfg).map_err(|e| e.to_string())?;
    let report = estimate(&out.log, 64, &CostParams::default()).map_err(|e| e.to_string())?;
    let ms = report.wall_seconds * 1e3;
    check(
        (0.5..=12.5).contains(&ms),
        format!(
            "{} cycles = {ms:.3} ms at 100 MHz, band [0.5, 12.5] ms",
            report.total_cycles
        ),
    )
}

/// Save, load, predict gives bitwise-identical predictions.
fn roundtrip() -> Outcome {
    let mut rng = TestRng::new(1007);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for k in 0..50 {
        let n = 20 + rng.below(300) as usize;
        let f = 1 + rng.below(10) as usize;
        let distinct = 2 + rng.below(100);
        let raw = random_raw(&mut rng, n, f, distinct, 0.1);
        let data = quantize(&raw);
        let cfg = TrainConfig {
            n_trees: 1 + rng.below(10) as usize,
            max_depth: 1 + rng.below(5) as usize,
            eta: 0.05 + 0.95 * rng.unit(),
            lambda: 0.1 + 3.0 * rng.unit(),
            subsample: 0.3 + 0.7 * rng.unit(),
            frac_bits: 8 + rng.below(33) as u32,
            seed: k,
            n_engines: 1 + rng.below(64) as usize,
            ..TrainConfig::default()
        };
        let model = train(&data, raw.labels(), &cfg)
            .map_err(|e| e.to_string())?
            .model;
        let path = dir.path().join("m.json");
        io::save_model(&model, &path).map_err(|e| e.to_string())?;
        let back = io::load_model(&path).map_err(|e| e.to_string())?;
        let same_raw = back.predict_raw(&data).unwrap() == model.predict_raw(&data).unwrap();
        let (a, b) = (
            back.predict_proba(&data).unwrap(),
            model.predict_proba(&data).unwrap(),
        );
        let same_p = a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
        if !(same_raw && same_p && back == model) {
            return Err(format!("model {k}: reloaded predictions differ"));
        }
    }
    Ok("50 models: predictions bitwise identical after reload".into())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("reference equivalence", reference_equivalence),
        ("engine-count invariance", engine_invariance),
        ("higgs validation auc", higgs_auc),
        ("histogram conservation", histogram_conservation),
        ("gradient exactness", gradient_exactness),
        ("cycle estimate band", cost_estimate),
        ("model round trip", roundtrip),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS  {}. {name}: {d} [{secs:.1}s]", k + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL  {}. {name}: {d} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
