//! Core instance containers: the training tensor and query matrices.
//!
//! A [`TrainingSet`] holds, per class, a list of feature-vector instances;
//! classes may have different instance counts but every vector shares the
//! same dimensionality. A [`QuerySet`] holds the feature vectors extracted
//! from a single observation (for windowed time-series data one observation
//! usually yields several vectors).

use crate::error::IatrError;

/// Labeled per-class instance tensor `T[n][i][l]`.
///
/// Indices are 0-based internally; labels are opaque strings carried along
/// for reporting and serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    labels: Vec<String>,
    classes: Vec<Vec<Vec<f64>>>,
    dim: usize,
}

impl TrainingSet {
    /// Builds a validated training set.
    ///
    /// Requires at least one class, at least one instance per class, a
    /// consistent nonzero dimension, unique labels, and finite values.
    pub fn new(labels: Vec<String>, classes: Vec<Vec<Vec<f64>>>) -> Result<Self, IatrError> {
        if classes.is_empty() {
            return Err(IatrError::EmptyTrainingSet);
        }
        if labels.len() != classes.len() {
            return Err(IatrError::ShapeMismatch(format!(
                "{} labels for {} classes",
                labels.len(),
                classes.len()
            )));
        }
        for (n, label) in labels.iter().enumerate() {
            if labels[..n].contains(label) {
                return Err(IatrError::DuplicateLabel(label.clone()));
            }
        }
        let dim = match classes[0].first() {
            Some(v) if !v.is_empty() => v.len(),
            _ => return Err(IatrError::EmptyClass(labels[0].clone())),
        };
        for (n, instances) in classes.iter().enumerate() {
            if instances.is_empty() {
                return Err(IatrError::EmptyClass(labels[n].clone()));
            }
            for vector in instances {
                if vector.len() != dim {
                    return Err(IatrError::ShapeMismatch(format!(
                        "class {} has a vector of dim {} (expected {})",
                        labels[n],
                        vector.len(),
                        dim
                    )));
                }
                if vector.iter().any(|v| !v.is_finite()) {
                    return Err(IatrError::NonFiniteValue);
                }
            }
        }
        Ok(Self { labels, classes, dim })
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
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

    /// 0-based index of `label`, if enrolled.
    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn instances(&self, class: usize) -> &[Vec<f64>] {
        &self.classes[class]
    }

    pub fn instance_count(&self, class: usize) -> usize {
        self.classes[class].len()
    }

    /// Smallest per-class instance count; upper bound for the phase-1 `K`.
    pub fn min_instances(&self) -> usize {
        self.classes.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn value(&self, class: usize, instance: usize, dim: usize) -> f64 {
        self.classes[class][instance][dim]
    }

    pub fn iter_classes(&self) -> impl Iterator<Item = (&str, &[Vec<f64>])> {
        self.labels
            .iter()
            .zip(self.classes.iter())
            .map(|(l, c)| (l.as_str(), c.as_slice()))
    }
}

/// Query matrix `Q[r][l]`: the feature vectors of one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    vectors: Vec<Vec<f64>>,
    dim: usize,
}

impl QuerySet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self, IatrError> {
        let dim = match vectors.first() {
            Some(v) if !v.is_empty() => v.len(),
            _ => return Err(IatrError::EmptyQuerySet),
        };
        for vector in &vectors {
            if vector.len() != dim {
                return Err(IatrError::ShapeMismatch(format!(
                    "query vector of dim {} (expected {})",
                    vector.len(),
                    dim
                )));
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(IatrError::NonFiniteValue);
            }
        }
        Ok(Self { vectors, dim })
    }

    pub fn num_vectors(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn value(&self, vector: usize, dim: usize) -> f64 {
        self.vectors[vector][dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_ragged_input() {
        assert!(matches!(
            TrainingSet::new(vec![], vec![]),
            Err(IatrError::EmptyTrainingSet)
        ));
        assert!(matches!(
            TrainingSet::new(vec!["a".into()], vec![vec![]]),
            Err(IatrError::EmptyClass(_))
        ));
        let ragged = TrainingSet::new(
            vec!["a".into()],
            vec![vec![vec![1.0, 2.0], vec![1.0]]],
        );
        assert!(matches!(ragged, Err(IatrError::ShapeMismatch(_))));
    }

    #[test]
    fn rejects_non_finite_values() {
        let t = TrainingSet::new(vec!["a".into()], vec![vec![vec![f64::NAN]]]);
        assert!(matches!(t, Err(IatrError::NonFiniteValue)));
        let q = QuerySet::new(vec![vec![f64::INFINITY]]);
        assert!(matches!(q, Err(IatrError::NonFiniteValue)));
    }

    #[test]
    fn rejects_duplicate_labels() {
        let t = TrainingSet::new(
            vec!["a".into(), "a".into()],
            vec![vec![vec![1.0]], vec![vec![2.0]]],
        );
        assert!(matches!(t, Err(IatrError::DuplicateLabel(_))));
    }

    #[test]
    fn accessors_reflect_shape() {
        let t = TrainingSet::new(
            vec!["a".into(), "b".into()],
            vec![
                vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 5.0]],
                vec![vec![6.0, 7.0]],
            ],
        )
        .unwrap();
        assert_eq!(t.num_classes(), 2);
        assert_eq!(t.dim(), 2);
        assert_eq!(t.instance_count(0), 3);
        assert_eq!(t.min_instances(), 1);
        assert_eq!(t.class_index("b"), Some(1));
        assert_eq!(t.class_index("c"), None);
        assert_eq!(t.value(0, 1, 1), 3.0);
    }
}
