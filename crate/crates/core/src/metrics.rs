use crate::error::{Error, Result};
use crate::memory::QuantizedMatrix;
use crate::model::Model;

/// Rank-based (Mann-Whitney) ROC AUC with midranks for tied scores.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::UndefinedMetric("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs at least one positive and one negative label".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j share their mean.
        let midrank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = order[i..j].iter().filter(|&&k| labels[k] == 1).count();
        rank_sum_pos += midrank * pos_in_group as f64;
        i = j;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerTreeAuc {
    /// AUC after trees `1..=n`, in order.
    pub aucs: Vec<f64>,
    pub max: f64,
    /// 1-based tree count at which `max` is first reached.
    pub best_trees: usize,
}

/// Validation AUC after every tree and the best of them.
pub fn evaluate_per_tree(
    model: &Model,
    valid: &QuantizedMatrix,
    labels: &[u8],
) -> Result<PerTreeAuc> {
    if model.trees.is_empty() {
        return Err(Error::InvalidArgument("model has no trees".into()));
    }
    if labels.len() != valid.n_samples() {
        return Err(Error::Dimension(format!(
            "{} labels for {} samples",
            labels.len(),
            valid.n_samples()
        )));
    }
    let fx = model.fixed_format()?;
    let mut aucs = Vec::with_capacity(model.trees.len());
    model.for_each_stage(valid, |_, raw| {
        let margins: Vec<f64> = raw.iter().map(|&s| fx.dequantize(s)).collect();
        aucs.push(auc(&margins, labels)?);
        Ok(())
    })?;
    let (best, max) =
        aucs.iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, a)| if a > acc.1 { (i, a) } else { acc },
            );
    Ok(PerTreeAuc {
        aucs,
        max,
        best_trees: best + 1,
    })
}
