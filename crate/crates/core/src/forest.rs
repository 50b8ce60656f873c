//! Random regression forest: bagged CART trees with vector-valued leaves.
//!
//! Splits minimise the summed per-output squared error of the two children.
//! Candidate thresholds are midpoints between consecutive distinct feature
//! values; ties between equally good splits go to the lowest feature index
//! and then to the smallest threshold, so training is reproducible given the
//! data, the hyperparameters and the seed.

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

pub const FORMAT_TAG: &str = "stressuq-forest";
pub const FORMAT_VERSION: u32 = 1;

/// Which discrepancy quantity a forest predicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Scalar distance between reference and model barycentric points.
    P,
    /// Barycentric correction vector `(dx, dy)`.
    Pcorr,
    /// Correction vector plus Tait-Bryan angles of the frame rotation.
    PcorrAngles,
}

impl TargetKind {
    pub fn target_names(self) -> Vec<String> {
        let names: &[&str] = match self {
            TargetKind::P => &["p"],
            TargetKind::Pcorr => &["pcorr_x", "pcorr_y"],
            TargetKind::PcorrAngles => &["pcorr_x", "pcorr_y", "alpha", "beta", "gamma"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn n_targets(self) -> usize {
        match self {
            TargetKind::P => 1,
            TargetKind::Pcorr => 2,
            TargetKind::PcorrAngles => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TargetKind::P => "p",
            TargetKind::Pcorr => "pcorr",
            TargetKind::PcorrAngles => "pcorr_angles",
        }
    }

    /// Infers the kind from a forest's target names.
    pub fn from_target_names(names: &[String]) -> Option<Self> {
        [TargetKind::P, TargetKind::Pcorr, TargetKind::PcorrAngles]
            .into_iter()
            .find(|k| k.target_names() == names)
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "p" => Ok(TargetKind::P),
            "pcorr" => Ok(TargetKind::Pcorr),
            "pcorr_angles" => Ok(TargetKind::PcorrAngles),
            other => Err(Error::InvalidArgument(format!(
                "unknown target `{other}` (expected p, pcorr or pcorr_angles)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestHyperparams {
    pub max_depth: usize,
    /// Nodes with fewer samples than this become leaves.
    pub min_samples_split: usize,
    /// Number of features drawn at random for every split.
    pub max_features: usize,
    pub n_trees: usize,
    pub seed: u64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: bool,
}

fn default_bootstrap() -> bool {
    true
}

impl ForestHyperparams {
    /// Tuned settings per target kind.
    pub fn for_target(kind: TargetKind, seed: u64) -> Self {
        let (max_depth, min_samples_split, max_features, n_trees) = match kind {
            TargetKind::P => (6, 6, 3, 30),
            TargetKind::Pcorr => (9, 4, 3, 15),
            TargetKind::PcorrAngles => (9, 4, 3, 30),
        };
        Self {
            max_depth,
            min_samples_split,
            max_features,
            n_trees,
            seed,
            bootstrap: true,
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        let positive = [
            ("max_depth", self.max_depth),
            ("min_samples_split", self.min_samples_split),
            ("max_features", self.max_features),
            ("n_trees", self.n_trees),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if self.max_features > n_features {
            return Err(Error::InvalidArgument(format!(
                "max_features = {} exceeds the feature count {n_features}",
                self.max_features
            )));
        }
        Ok(())
    }

    fn tree_seed(&self, tree: usize) -> u64 {
        self.seed
            .wrapping_add((tree as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
    },
}

/// Single CART tree; node 0 is the root. Samples with
/// `x[feature] <= threshold` go left.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    n_outputs: usize,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn leaf_value(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Fits one tree on the rows in `idx` (duplicates allowed).
    pub fn fit(
        x: &Matrix,
        y: &Matrix,
        idx: Vec<usize>,
        hp: &ForestHyperparams,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut builder = TreeBuilder {
            x,
            y,
            hp,
            rng,
            nodes: Vec::new(),
        };
        // Rows sorted by content make every sum below independent of the
        // order in which the training rows were supplied.
        let mut idx = idx;
        idx.sort_by(|&a, &b| row_order(x, y, a, b));
        builder.grow(&mut idx, 0);
        Self {
            nodes: builder.nodes,
            n_outputs: y.n_cols(),
        }
    }
}

fn row_order(x: &Matrix, y: &Matrix, a: usize, b: usize) -> std::cmp::Ordering {
    let lex = |p: &[f64], q: &[f64]| {
        p.iter()
            .zip(q)
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    lex(x.row(a), x.row(b)).then_with(|| lex(y.row(a), y.row(b)))
}

struct TreeBuilder<'a> {
    x: &'a Matrix,
    y: &'a Matrix,
    hp: &'a ForestHyperparams,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let mean = self.mean(idx);
        self.nodes.push(Node::Leaf {
            value: mean.clone(),
        });

        if idx.len() < self.hp.min_samples_split
            || idx.len() < 2
            || depth >= self.hp.max_depth
            || self.constant_targets(idx)
        {
            return id;
        }
        let Some(best) = self.best_split(idx, &mean) else {
            return id;
        };

        // stable partition keeps sample order within each child
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x.get(i, best.feature) <= best.threshold);
        let l = self.grow(&mut left, depth + 1);
        let r = self.grow(&mut right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        id
    }

    fn mean(&self, idx: &[usize]) -> Vec<f64> {
        let mut m = vec![0.0; self.y.n_cols()];
        for &i in idx {
            for (acc, v) in m.iter_mut().zip(self.y.row(i)) {
                *acc += v;
            }
        }
        let n = idx.len() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    fn constant_targets(&self, idx: &[usize]) -> bool {
        let first = self.y.row(idx[0]);
        idx.iter().all(|&i| self.y.row(i) == first)
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let f = self.x.n_cols();
        if self.hp.max_features >= f {
            return (0..f).collect();
        }
        let mut chosen = sample(self.rng, f, self.hp.max_features).into_vec();
        chosen.sort_unstable();
        chosen
    }

    /// Maximises `sum_d (S_l^2 / n_l + S_r^2 / n_r)`, which is equivalent to
    /// minimising the summed child squared error.
    fn best_split(&mut self, idx: &[usize], mean: &[f64]) -> Option<BestSplit> {
        let n = idx.len();
        let d = self.y.n_cols();
        let total: Vec<f64> = mean.iter().map(|m| m * n as f64).collect();
        let parent_score: f64 = total.iter().map(|s| s * s / n as f64).sum();

        let mut best: Option<BestSplit> = None;
        let mut order: Vec<usize> = idx.to_vec();
        let mut left = vec![0.0; d];
        for feature in self.candidate_features() {
            // stable, so ties keep the canonical row order
            order.copy_from_slice(idx);
            order.sort_by(|&a, &b| self.x.get(a, feature).total_cmp(&self.x.get(b, feature)));
            left.iter_mut().for_each(|v| *v = 0.0);
            for pos in 0..n - 1 {
                let i = order[pos];
                for (acc, v) in left.iter_mut().zip(self.y.row(i)) {
                    *acc += v;
                }
                let lo = self.x.get(i, feature);
                let hi = self.x.get(order[pos + 1], feature);
                if !(lo < hi) {
                    continue;
                }
                let nl = (pos + 1) as f64;
                let nr = (n - pos - 1) as f64;
                let score: f64 = left
                    .iter()
                    .zip(&total)
                    .map(|(sl, st)| {
                        let sr = st - sl;
                        sl * sl / nl + sr * sr / nr
                    })
                    .sum();
                if score > parent_score && best.as_ref().is_none_or(|b| score > b.score) {
                    let mut threshold = lo + 0.5 * (hi - lo);
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionForest {
    trees: Vec<RegressionTree>,
    hyperparams: ForestHyperparams,
    feature_names: Vec<String>,
    target_names: Vec<String>,
}

fn check_data(x: &Matrix, y: &Matrix) -> Result<()> {
    if x.n_rows() == 0 {
        return Err(Error::InvalidArgument("empty training data".into()));
    }
    if x.n_rows() != y.n_rows() {
        return Err(Error::Dimension {
            context: "training rows",
            expected: x.n_rows(),
            got: y.n_rows(),
        });
    }
    if x.n_cols() == 0 || y.n_cols() == 0 {
        return Err(Error::InvalidArgument(
            "training data needs at least one feature and one target".into(),
        ));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidArgument(
            "training data contains non-finite values".into(),
        ));
    }
    Ok(())
}

impl RegressionForest {
    pub fn fit(x: &Matrix, y: &Matrix, hp: &ForestHyperparams) -> Result<Self> {
        let feature_names = (0..x.n_cols()).map(|i| format!("x{i}")).collect();
        let target_names = (0..y.n_cols()).map(|i| format!("y{i}")).collect();
        Self::fit_named(x, y, hp, feature_names, target_names)
    }

    pub fn fit_named(
        x: &Matrix,
        y: &Matrix,
        hp: &ForestHyperparams,
        feature_names: Vec<String>,
        target_names: Vec<String>,
    ) -> Result<Self> {
        check_data(x, y)?;
        hp.validate(x.n_cols())?;
        if feature_names.len() != x.n_cols() || target_names.len() != y.n_cols() {
            return Err(Error::InvalidArgument(
                "feature/target names do not match the data".into(),
            ));
        }
        let n = x.n_rows();
        let trees = (0..hp.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(hp.tree_seed(t));
                let idx = if hp.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                RegressionTree::fit(x, y, idx, hp, &mut rng)
            })
            .collect();
        Ok(Self {
            trees,
            hyperparams: hp.clone(),
            feature_names,
            target_names,
        })
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn hyperparams(&self) -> &ForestHyperparams {
        &self.hyperparams
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_names(&self) -> &[String] {
        &self.target_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_targets(&self) -> usize {
        self.target_names.len()
    }

    /// Mean of the trees' leaf vectors.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::Dimension {
                context: "forest input",
                expected: self.n_features(),
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.n_targets()];
        for tree in &self.trees {
            for (acc, v) in out.iter_mut().zip(tree.leaf_value(x)) {
                *acc += v;
            }
        }
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|v| *v /= n);
        Ok(out)
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::with_cols(self.n_targets());
        for row in x.rows() {
            out.push_row(&self.predict(row)?)?;
        }
        Ok(out)
    }

    /// Mean over samples and outputs of the squared prediction error.
    pub fn mse(&self, x: &Matrix, y: &Matrix) -> Result<f64> {
        if x.n_rows() != y.n_rows() {
            return Err(Error::Dimension {
                context: "mse rows",
                expected: x.n_rows(),
                got: y.n_rows(),
            });
        }
        if y.n_cols() != self.n_targets() {
            return Err(Error::Dimension {
                context: "mse targets",
                expected: self.n_targets(),
                got: y.n_cols(),
            });
        }
        if x.n_rows() == 0 {
            return Err(Error::InvalidArgument("mse of an empty set".into()));
        }
        let mut acc = 0.0;
        for (xr, yr) in x.rows().zip(y.rows()) {
            let p = self.predict(xr)?;
            acc += p.iter().zip(yr).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        }
        Ok(acc / (x.n_rows() * y.n_cols()) as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ForestDocument {
            format: FORMAT_TAG.to_string(),
            version: FORMAT_VERSION,
            hyperparams: self.hyperparams.clone(),
            feature_names: self.feature_names.clone(),
            target_names: self.target_names.clone(),
            trees: self.trees.iter().map(FlatTree::from_tree).collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let header: ForestHeader = serde_json::from_str(text).map_err(parse_error)?;
        if header.format.as_deref() != Some(FORMAT_TAG) {
            return Err(Error::Format {
                field: "format".into(),
                message: format!("expected `{FORMAT_TAG}`, found {:?}", header.format),
            });
        }
        if header.version != Some(FORMAT_VERSION) {
            return Err(Error::Format {
                field: "version".into(),
                message: format!(
                    "unsupported version {:?} (expected {FORMAT_VERSION})",
                    header.version
                ),
            });
        }
        let doc: ForestDocument = serde_json::from_str(text).map_err(parse_error)?;
        doc.into_forest()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_json()?.as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut s = String::new();
        r.read_to_string(&mut s)?;
        Self::from_json(&s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        message: e.to_string(),
    }
}

#[derive(Deserialize)]
struct ForestHeader {
    format: Option<String>,
    version: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct ForestDocument {
    format: String,
    version: u32,
    hyperparams: ForestHyperparams,
    feature_names: Vec<String>,
    target_names: Vec<String>,
    trees: Vec<FlatTree>,
}

/// Parallel node arrays; leaves carry `feature = -1` and no children.
#[derive(Serialize, Deserialize)]
struct FlatTree {
    feature: Vec<i64>,
    threshold: Vec<f64>,
    left: Vec<i64>,
    right: Vec<i64>,
    value: Vec<Vec<f64>>,
}

impl FlatTree {
    fn from_tree(tree: &RegressionTree) -> Self {
        let mut flat = FlatTree {
            feature: Vec::new(),
            threshold: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            value: Vec::new(),
        };
        for node in &tree.nodes {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    flat.feature.push(*feature as i64);
                    flat.threshold.push(*threshold);
                    flat.left.push(*left as i64);
                    flat.right.push(*right as i64);
                    flat.value.push(Vec::new());
                }
                Node::Leaf { value } => {
                    flat.feature.push(-1);
                    flat.threshold.push(0.0);
                    flat.left.push(-1);
                    flat.right.push(-1);
                    flat.value.push(value.clone());
                }
            }
        }
        flat
    }

    fn into_tree(self, t: usize, n_features: usize, n_outputs: usize) -> Result<RegressionTree> {
        let n = self.feature.len();
        let bad = |field: &str, message: String| Error::Format {
            field: format!("trees[{t}].{field}"),
            message,
        };
        for (name, len) in [
            ("threshold", self.threshold.len()),
            ("left", self.left.len()),
            ("right", self.right.len()),
            ("value", self.value.len()),
        ] {
            if len != n {
                return Err(bad(name, format!("length {len} differs from {n} nodes")));
            }
        }
        if n == 0 {
            return Err(bad("feature", "tree has no nodes".into()));
        }
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let f = self.feature[i];
            if f < 0 {
                let value = self.value[i].clone();
                if value.len() != n_outputs || !value.iter().all(|v| v.is_finite()) {
                    return Err(bad(
                        &format!("value[{i}]"),
                        format!("expected {n_outputs} finite outputs"),
                    ));
                }
                nodes.push(Node::Leaf { value });
            } else {
                let (l, r) = (self.left[i], self.right[i]);
                let child_ok = |c: i64| c > i as i64 && (c as usize) < n;
                if f as usize >= n_features {
                    return Err(bad(
                        &format!("feature[{i}]"),
                        format!("index {f} out of range"),
                    ));
                }
                if !child_ok(l) || !child_ok(r) {
                    return Err(bad(
                        &format!("left/right[{i}]"),
                        "invalid child index".into(),
                    ));
                }
                nodes.push(Node::Split {
                    feature: f as usize,
                    threshold: self.threshold[i],
                    left: l as usize,
                    right: r as usize,
                });
            }
        }
        Ok(RegressionTree { nodes, n_outputs })
    }
}

impl ForestDocument {
    fn into_forest(self) -> Result<RegressionForest> {
        let nf = self.feature_names.len();
        let nt = self.target_names.len();
        if self.trees.len() != self.hyperparams.n_trees {
            return Err(Error::Format {
                field: "trees".into(),
                message: format!(
                    "{} trees stored but n_trees = {}",
                    self.trees.len(),
                    self.hyperparams.n_trees
                ),
            });
        }
        let trees = self
            .trees
            .into_iter()
            .enumerate()
            .map(|(t, flat)| flat.into_tree(t, nf, nt))
            .collect::<Result<Vec<_>>>()?;
        Ok(RegressionForest {
            trees,
            hyperparams: self.hyperparams,
            feature_names: self.feature_names,
            target_names: self.target_names,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(max_depth: usize, n_trees: usize, bootstrap: bool) -> ForestHyperparams {
        ForestHyperparams {
            max_depth,
            min_samples_split: 2,
            max_features: 1,
            n_trees,
            seed: 7,
            bootstrap,
        }
    }

    #[test]
    fn single_sample_is_a_leaf() {
        let x = Matrix::from_rows(&[vec![0.3, 1.0, 4.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![2.5, -1.0]]).unwrap();
        let f = RegressionForest::fit(&x, &y, &ForestHyperparams::for_target(TargetKind::P, 1))
            .unwrap();
        assert!(f.trees().iter().all(|t| t.nodes().len() == 1));
        assert_eq!(f.predict(&[100.0, -3.0, 0.0]).unwrap(), vec![2.5, -1.0]);
    }

    #[test]
    fn separable_pair() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![0.0], vec![10.0]]).unwrap();
        let f = RegressionForest::fit(&x, &y, &hp(3, 1, false)).unwrap();
        let Node::Split { threshold, .. } = &f.trees()[0].nodes()[0] else {
            panic!("root should split");
        };
        assert!(*threshold > 0.0 && *threshold < 1.0);
        assert_eq!(f.predict(&[threshold - 1e-9]).unwrap(), vec![0.0]);
        assert_eq!(f.predict(&[threshold + 1e-9]).unwrap(), vec![10.0]);
    }

    #[test]
    fn constant_targets_predict_constant() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64, (i * i) as f64, -(i as f64)])
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y = Matrix::from_rows(&vec![vec![1.5]; 20]).unwrap();
        let f = RegressionForest::fit(&x, &y, &ForestHyperparams::for_target(TargetKind::P, 3))
            .unwrap();
        for t in f.trees() {
            assert_eq!(t.nodes().len(), 1);
        }
        assert_eq!(f.predict(&[7.5, -2.0, 1.0]).unwrap(), vec![1.5]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let y1 = Matrix::from_rows(&[vec![0.0]]).unwrap();
        assert!(RegressionForest::fit(&x, &y1, &hp(3, 1, false)).is_err());
        let empty = Matrix::with_cols(1);
        assert!(RegressionForest::fit(&empty, &empty, &hp(3, 1, false)).is_err());
        let xn = Matrix::from_rows(&[vec![f64::NAN], vec![1.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(RegressionForest::fit(&xn, &y, &hp(3, 1, false)).is_err());
        let mut too_many = hp(3, 1, false);
        too_many.max_features = 2;
        assert!(RegressionForest::fit(&x, &y, &too_many).is_err());
        let f = RegressionForest::fit(&x, &y, &hp(3, 1, false)).unwrap();
        assert!(matches!(
            f.predict(&[0.0, 1.0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn table_defaults() {
        let p = ForestHyperparams::for_target(TargetKind::P, 0);
        assert_eq!(
            (p.max_depth, p.min_samples_split, p.max_features, p.n_trees),
            (6, 6, 3, 30)
        );
        let c = ForestHyperparams::for_target(TargetKind::Pcorr, 0);
        assert_eq!(
            (c.max_depth, c.min_samples_split, c.max_features, c.n_trees),
            (9, 4, 3, 15)
        );
        let a = ForestHyperparams::for_target(TargetKind::PcorrAngles, 0);
        assert_eq!(
            (a.max_depth, a.min_samples_split, a.max_features, a.n_trees),
            (9, 4, 3, 30)
        );
    }

    #[test]
    fn version_and_empty_file_errors() {
        assert!(matches!(
            RegressionForest::from_json(""),
            Err(Error::Parse { .. })
        ));
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let f = RegressionForest::fit(&x, &y, &hp(2, 2, true)).unwrap();
        let text = f
            .to_json()
            .unwrap()
            .replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(
            RegressionForest::from_json(&text),
            Err(Error::Format { ref field, .. }) if field == "version"
        ));
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = RegressionForest::from_json("{\n  \"format\": \"stressuq-forest\",\n  oops\n}")
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn target_kind_names() {
        assert_eq!(
            "pcorr-angles".parse::<TargetKind>().unwrap(),
            TargetKind::PcorrAngles
        );
        assert_eq!(
            TargetKind::from_target_names(&TargetKind::Pcorr.target_names()),
            Some(TargetKind::Pcorr)
        );
    }
}
