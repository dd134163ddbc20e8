//! Depth-one boosting on the first rows of the HIGGS csv (label first,
//! then 28 features). Pass the file path as the first argument.
use std::io::{BufRead, BufReader};

use gbdt_engine::io::{read_dataset, LoadOptions};
use gbdt_engine::quantizer::{transform, BinMap};
use gbdt_engine::{estimate, evaluate_per_tree, train, CostParams, TrainConfig};

const N: usize = 10_048;

fn main() -> gbdt_engine::Result<()> {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: higgs_stumps <HIGGS.csv>");
        std::process::exit(2);
    };
    let mut text = String::new();
    for line in BufReader::new(std::fs::File::open(path)?)
        .lines()
        .take(2 * N)
    {
        text.push_str(&line?);
        text.push('\n');
    }
    let all = read_dataset(text.as_bytes(), &LoadOptions::default())?;
    let (tr, va) = (all.slice(0, N)?, all.slice(N, 2 * N)?);
    let bins = BinMap::fit(&tr, 255)?;
    let cfg = TrainConfig {
        n_trees: 100,
        max_depth: 1,
        subsample: 0.5,
        ..TrainConfig::default()
    };
    let out = train(&transform(&tr, &bins)?, tr.labels(), &cfg)?;
    let per_tree = evaluate_per_tree(&out.model, &transform(&va, &bins)?, va.labels())?;
    println!(
        "max validation auc {:.4} after {} trees",
        per_tree.max, per_tree.best_trees
    );
    let report = estimate(&out.log, cfg.n_engines, &CostParams::default())?;
    println!(
        "estimated {:.3} ms on {} engines",
        report.wall_seconds * 1e3,
        cfg.n_engines
    );
    Ok(())
}
