//! Phase 1: between-class separation.
//!
//! For every element of every training instance, the mean absolute distance
//! to the corresponding elements of all other classes is computed. Within
//! each class and dimension the elements with the largest mean distances are
//! then retained, assembling intermediate templates per dimension. The
//! resulting vectors need not coincide with any original instance but always
//! stay inside the per-class, per-dimension bounding box of the training
//! data.

use rayon::prelude::*;

use crate::data::TrainingSet;
use crate::error::IatrError;

/// Phase-1 output `T'[n][k][l]` plus the provenance of every element.
#[derive(Debug, Clone, PartialEq)]
pub struct IntermediateTemplateSet {
    labels: Vec<String>,
    templates_per_class: usize,
    dim: usize,
    values: Vec<Vec<Vec<f64>>>,
    /// Source instance index (into the originating training set) per
    /// `[class][template][dim]` element.
    provenance: Vec<Vec<Vec<usize>>>,
    /// Mean between-class distances `d̄[n][i][l]`, kept when produced by
    /// [`phase1_reconstruct`]; absent for template sets loaded from disk.
    score_cache: Option<Vec<Vec<Vec<f64>>>>,
}

impl IntermediateTemplateSet {
    /// Assembles a template set from raw parts, validating shape invariants.
    ///
    /// Used by the store loader and by evaluation paths that treat raw
    /// instances as templates. Value/provenance agreement with an original
    /// training set cannot be checked here and is the caller's contract.
    pub fn from_parts(
        labels: Vec<String>,
        values: Vec<Vec<Vec<f64>>>,
        provenance: Vec<Vec<Vec<usize>>>,
        score_cache: Option<Vec<Vec<Vec<f64>>>>,
    ) -> Result<Self, IatrError> {
        if values.is_empty() {
            return Err(IatrError::EmptyTrainingSet);
        }
        if labels.len() != values.len() || provenance.len() != values.len() {
            return Err(IatrError::ShapeMismatch(
                "labels/values/provenance class counts differ".into(),
            ));
        }
        let k = values[0].len();
        let dim = values[0].first().map(Vec::len).unwrap_or(0);
        if k == 0 || dim == 0 {
            return Err(IatrError::ShapeMismatch("empty template matrix".into()));
        }
        for (class_values, class_prov) in values.iter().zip(&provenance) {
            if class_values.len() != k || class_prov.len() != k {
                return Err(IatrError::ShapeMismatch(
                    "per-class template counts differ".into(),
                ));
            }
            for (row, prow) in class_values.iter().zip(class_prov) {
                if row.len() != dim || prow.len() != dim {
                    return Err(IatrError::ShapeMismatch("template row dim differs".into()));
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(IatrError::NonFiniteValue);
                }
            }
        }
        // Per (class, dim), source indices must be distinct across templates.
        for (n, class_prov) in provenance.iter().enumerate() {
            for l in 0..dim {
                let mut seen: Vec<usize> = class_prov.iter().map(|row| row[l]).collect();
                seen.sort_unstable();
                if seen.windows(2).any(|w| w[0] == w[1]) {
                    return Err(IatrError::ShapeMismatch(format!(
                        "class {} dim {} repeats a source instance",
                        labels[n], l
                    )));
                }
            }
        }
        Ok(Self {
            labels,
            templates_per_class: k,
            dim,
            values,
            provenance,
            score_cache,
        })
    }

    /// Treats the raw training instances as templates (identity pass-through).
    ///
    /// Keeps the first `min_instances` instances of every class so that the
    /// per-class template count stays rectangular. This is the "phase 2
    /// applied directly to the training set" evaluation mode.
    pub fn from_raw_instances(train: &TrainingSet) -> Result<Self, IatrError> {
        let k = train.min_instances();
        let values: Vec<Vec<Vec<f64>>> = (0..train.num_classes())
            .map(|n| train.instances(n)[..k].to_vec())
            .collect();
        // Template row i comes verbatim from instance i.
        let provenance: Vec<Vec<Vec<usize>>> = (0..train.num_classes())
            .map(|_| (0..k).map(|i| vec![i; train.dim()]).collect())
            .collect();
        Self::from_parts(train.labels().to_vec(), values, provenance, None)
    }

    pub fn num_classes(&self) -> usize {
        self.values.len()
    }

    /// Per-class template count `K`.
    pub fn templates_per_class(&self) -> usize {
        self.templates_per_class
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, class: usize) -> &str {
        &self.labels[class]
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn templates(&self, class: usize) -> &[Vec<f64>] {
        &self.values[class]
    }

    pub fn value(&self, class: usize, template: usize, dim: usize) -> f64 {
        self.values[class][template][dim]
    }

    pub fn provenance(&self, class: usize, template: usize, dim: usize) -> usize {
        self.provenance[class][template][dim]
    }

    pub fn provenance_rows(&self, class: usize) -> &[Vec<usize>] {
        &self.provenance[class]
    }

    pub fn score_cache(&self) -> Option<&Vec<Vec<Vec<f64>>>> {
        self.score_cache.as_ref()
    }
}

/// Mean element-wise distance of every training element to the other classes.
///
/// `d̄[n][i][l]` is the mean over classes `m != n` of the per-class mean of
/// `|T[n][i][l] - T[m][j][l]|` over `j`. Reduction order is fixed (ascending
/// `j`, then ascending `m`) so results are bit-for-bit reproducible.
pub fn elementwise_mean_distance(train: &TrainingSet) -> Result<Vec<Vec<Vec<f64>>>, IatrError> {
    let n_classes = train.num_classes();
    if n_classes < 2 {
        return Err(IatrError::InsufficientClasses(n_classes));
    }
    let dim = train.dim();
    let scores: Vec<Vec<Vec<f64>>> = (0..n_classes)
        .into_par_iter()
        .map(|n| {
            train
                .instances(n)
                .iter()
                .map(|instance| {
                    let mut row = vec![0.0; dim];
                    for (l, slot) in row.iter_mut().enumerate() {
                        let x = instance[l];
                        let mut total = 0.0;
                        for m in 0..n_classes {
                            if m == n {
                                continue;
                            }
                            let others = train.instances(m);
                            let mut sum = 0.0;
                            for other in others {
                                sum += (x - other[l]).abs();
                            }
                            total += sum / others.len() as f64;
                        }
                        *slot = total / (n_classes - 1) as f64;
                    }
                    row
                })
                .collect()
        })
        .collect();
    Ok(scores)
}

/// Builds the intermediate template set, keeping per (class, dimension) the
/// `k` elements with the largest mean between-class distance.
///
/// Ties are broken toward the lower source instance index, which makes the
/// selection (and therefore the whole pipeline) deterministic.
pub fn phase1_reconstruct(
    train: &TrainingSet,
    k: usize,
) -> Result<IntermediateTemplateSet, IatrError> {
    let max_k = train.min_instances();
    if k == 0 || k > max_k {
        return Err(IatrError::BadK { k, max: max_k });
    }
    let scores = elementwise_mean_distance(train)?;
    let dim = train.dim();

    let mut values = Vec::with_capacity(train.num_classes());
    let mut provenance = Vec::with_capacity(train.num_classes());
    for n in 0..train.num_classes() {
        let instances = train.instances(n);
        let mut class_values = vec![vec![0.0; dim]; k];
        let mut class_prov = vec![vec![0usize; dim]; k];
        for l in 0..dim {
            let mut order: Vec<usize> = (0..instances.len()).collect();
            order.sort_by(|&a, &b| {
                scores[n][b][l]
                    .total_cmp(&scores[n][a][l])
                    .then(a.cmp(&b))
            });
            for (slot, &i) in order.iter().take(k).enumerate() {
                class_values[slot][l] = instances[i][l];
                class_prov[slot][l] = i;
            }
        }
        values.push(class_values);
        provenance.push(class_prov);
    }

    IntermediateTemplateSet::from_parts(
        train.labels().to_vec(),
        values,
        provenance,
        Some(scores),
    )
}

/// Default template retention: two thirds of the smallest class, at least 1.
pub fn default_retention(train: &TrainingSet) -> usize {
    retention_from_percent(train.min_instances(), 200.0 / 3.0)
}

/// Maps a retention percentage to an absolute `K`, clamped to `1..=instances`.
pub fn retention_from_percent(instances: usize, percent: f64) -> usize {
    let k = (percent / 100.0 * instances as f64).round() as isize;
    k.clamp(1, instances as isize) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(classes: Vec<Vec<Vec<f64>>>) -> TrainingSet {
        let labels = (0..classes.len()).map(|n| format!("c{n}")).collect();
        TrainingSet::new(labels, classes).unwrap()
    }

    #[test]
    fn symmetric_pair_distance() {
        // Two classes, one 1-D instance each: both elements sit distance 2 apart.
        let train = set(vec![vec![vec![0.0]], vec![vec![2.0]]]);
        let d = elementwise_mean_distance(&train).unwrap();
        assert_eq!(d[0][0][0], 2.0);
        assert_eq!(d[1][0][0], 2.0);
    }

    #[test]
    fn two_class_means_match_brute_force() {
        // class1 {3,5}, class2 {0,10}: means hand-computed over all (m, j).
        let train = set(vec![
            vec![vec![3.0], vec![5.0]],
            vec![vec![0.0], vec![10.0]],
        ]);
        let d = elementwise_mean_distance(&train).unwrap();
        assert_eq!(d[0][0][0], 5.0);
        assert_eq!(d[0][1][0], 5.0);
        assert_eq!(d[1][0][0], 4.0);
        assert_eq!(d[1][1][0], 6.0);
    }

    #[test]
    fn three_class_mean_averages_over_classes_uniformly() {
        // class1 {0} vs class2 {1,3} gives mean 2, vs class3 {10} gives 10;
        // the class means are averaged uniformly: (2 + 10) / 2 = 6.
        let train = set(vec![
            vec![vec![0.0]],
            vec![vec![1.0], vec![3.0]],
            vec![vec![10.0]],
        ]);
        let d = elementwise_mean_distance(&train).unwrap();
        assert_eq!(d[0][0][0], 6.0);
    }

    #[test]
    fn single_class_is_rejected() {
        let train = set(vec![vec![vec![1.0]]]);
        assert!(matches!(
            elementwise_mean_distance(&train),
            Err(IatrError::InsufficientClasses(1))
        ));
        assert!(matches!(
            phase1_reconstruct(&train, 1),
            Err(IatrError::InsufficientClasses(1))
        ));
    }

    #[test]
    fn reconstruction_assembles_per_dimension() {
        // Class A {(0,5),(9,1)} against class B {(5,5)}: dimension 1 keeps
        // instance 0 (distance 5 > 4), dimension 2 keeps instance 1 (4 > 0),
        // so the K=1 template (0,1) exists nowhere in the original set.
        let train = set(vec![
            vec![vec![0.0, 5.0], vec![9.0, 1.0]],
            vec![vec![5.0, 5.0]],
        ]);
        let tpl = phase1_reconstruct(&train, 1).unwrap();
        assert_eq!(tpl.templates(0), &[vec![0.0, 1.0]]);
        assert_eq!(tpl.provenance(0, 0, 0), 0);
        assert_eq!(tpl.provenance(0, 0, 1), 1);
        assert_eq!(tpl.templates(1), &[vec![5.0, 5.0]]);
    }

    #[test]
    fn full_retention_is_a_permutation() {
        let train = set(vec![
            vec![vec![1.0], vec![4.0], vec![2.0]],
            vec![vec![0.0], vec![9.0], vec![5.0]],
        ]);
        let tpl = phase1_reconstruct(&train, 3).unwrap();
        for n in 0..2 {
            let mut original: Vec<f64> = (0..3).map(|i| train.value(n, i, 0)).collect();
            let mut kept: Vec<f64> = (0..3).map(|k| tpl.value(n, k, 0)).collect();
            original.sort_by(f64::total_cmp);
            kept.sort_by(f64::total_cmp);
            assert_eq!(original, kept);
        }
    }

    #[test]
    fn k_out_of_range_is_rejected() {
        let train = set(vec![vec![vec![0.0]], vec![vec![2.0]]]);
        assert!(matches!(
            phase1_reconstruct(&train, 0),
            Err(IatrError::BadK { k: 0, max: 1 })
        ));
        assert!(matches!(
            phase1_reconstruct(&train, 2),
            Err(IatrError::BadK { k: 2, max: 1 })
        ));
    }

    #[test]
    fn constant_dimension_falls_back_to_index_order() {
        // Both dims of class A are constant: distances tie, so retention is
        // by ascending source index.
        let train = set(vec![
            vec![vec![7.0], vec![7.0], vec![7.0]],
            vec![vec![1.0], vec![2.0]],
        ]);
        let tpl = phase1_reconstruct(&train, 2).unwrap();
        assert_eq!(tpl.provenance(0, 0, 0), 0);
        assert_eq!(tpl.provenance(0, 1, 0), 1);
    }

    #[test]
    fn retention_percent_mapping() {
        assert_eq!(retention_from_percent(240, 200.0 / 3.0), 160);
        assert_eq!(retention_from_percent(240, 100.0), 240);
        assert_eq!(retention_from_percent(240, 0.01), 1);
        assert_eq!(retention_from_percent(3, 50.0), 2);
    }
}
