use crate::config::ModelParams;
use crate::error::{Error, Result};
use crate::fixed::FixedFormat;
use crate::memory::QuantizedMatrix;
use crate::quantizer::BinMap;
use crate::splitter::{shrunk_weight, TreeModel};

/// A trained ensemble together with everything needed to score new data.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: ModelParams,
    pub bin_map: BinMap,
    /// Raw fixed-point initial margin.
    pub base_score: i64,
    pub trees: Vec<TreeModel>,
}

impl Model {
    pub fn fixed_format(&self) -> Result<FixedFormat> {
        self.params.fixed_format()
    }

    fn check_matrix(&self, data: &QuantizedMatrix) -> Result<()> {
        if data.bin_map() != &self.bin_map {
            return Err(Error::Dimension(
                "data was quantized with a different bin map than the model".into(),
            ));
        }
        Ok(())
    }

    /// Raw fixed-point margins after the first `n_trees` trees.
    pub fn predict_raw_upto(&self, data: &QuantizedMatrix, n_trees: usize) -> Result<Vec<i64>> {
        self.check_matrix(data)?;
        let fx = self.fixed_format()?;
        let mut scores = vec![self.base_score; data.n_samples()];
        for tree in self.trees.iter().take(n_trees) {
            add_tree(fx, tree, self.params.eta, data, &mut scores)?;
        }
        Ok(scores)
    }

    pub fn predict_raw(&self, data: &QuantizedMatrix) -> Result<Vec<i64>> {
        self.predict_raw_upto(data, self.trees.len())
    }

    pub fn predict_margin(&self, data: &QuantizedMatrix) -> Result<Vec<f64>> {
        let fx = self.fixed_format()?;
        Ok(self
            .predict_raw(data)?
            .into_iter()
            .map(|s| fx.dequantize(s))
            .collect())
    }

    pub fn predict_proba(&self, data: &QuantizedMatrix) -> Result<Vec<f64>> {
        Ok(self
            .predict_margin(data)?
            .into_iter()
            .map(crate::loss::sigmoid)
            .collect())
    }

    /// Calls `visit(t, scores)` with the raw margins after each tree
    /// `t = 1..=n_trees`.
    pub fn for_each_stage(
        &self,
        data: &QuantizedMatrix,
        mut visit: impl FnMut(usize, &[i64]) -> Result<()>,
    ) -> Result<()> {
        self.check_matrix(data)?;
        let fx = self.fixed_format()?;
        let mut scores = vec![self.base_score; data.n_samples()];
        for (t, tree) in self.trees.iter().enumerate() {
            add_tree(fx, tree, self.params.eta, data, &mut scores)?;
            visit(t + 1, &scores)?;
        }
        Ok(())
    }
}

fn add_tree(
    fx: FixedFormat,
    tree: &TreeModel,
    eta: f64,
    data: &QuantizedMatrix,
    scores: &mut [i64],
) -> Result<()> {
    for (i, s) in scores.iter_mut().enumerate() {
        let w = tree.route(|f| data.get(i, f))?;
        *s += shrunk_weight(fx, w, eta);
    }
    Ok(())
}
