//! Phase 2: preferential matching between a query and the stored templates.
//!
//! For every candidate class the intermediate templates and the query vectors
//! are reconstructed together, per dimension, keeping only the elements on
//! the closest boundary between the two point sets. Classification then runs
//! a vector-wise Euclidean match between the reconstructed pair, one vote per
//! reconstructed query vector, and takes the majority.

use rayon::prelude::*;

use crate::data::QuerySet;
use crate::error::IatrError;
use crate::phase1::IntermediateTemplateSet;

/// Reconstructed pair for one candidate class: `T''[f][l]` and `Q'[s][l]`,
/// with the source template/query index of every element.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase2Pair {
    pub class_index: usize,
    pub templates: Vec<Vec<f64>>,
    pub template_sources: Vec<Vec<usize>>,
    pub queries: Vec<Vec<f64>>,
    pub query_sources: Vec<Vec<usize>>,
}

/// Outcome of a closed-set identification attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    /// Winning class (0-based index into the template set's labels).
    pub predicted: usize,
    /// Winning label, for convenience.
    pub predicted_label: String,
    /// Per reconstructed-query vote: `votes[s]` is the class whose
    /// reconstructed pair matched the s-th query vector best.
    pub votes: Vec<usize>,
    /// Per-class match distance `min_s min_f ||T''[f] - Q'[s]||`; lower is
    /// a better match.
    pub class_scores: Vec<f64>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        sum += d * d;
    }
    sum.sqrt()
}

/// Reconstructs the (template, query) pair for one candidate class.
///
/// Per dimension `l`, template elements are ranked by their distance to the
/// closest query element and query elements by their distance to the closest
/// template element; the best `f` and `s` of each are kept, ties toward the
/// lower source index.
pub fn phase2_reconstruct(
    tpl: &IntermediateTemplateSet,
    query: &QuerySet,
    class: usize,
    f: usize,
    s: usize,
) -> Result<Phase2Pair, IatrError> {
    if class >= tpl.num_classes() {
        return Err(IatrError::UnknownClass(format!("index {class}")));
    }
    if query.dim() != tpl.dim() {
        return Err(IatrError::ShapeMismatch(format!(
            "query dim {} vs template dim {}",
            query.dim(),
            tpl.dim()
        )));
    }
    let k = tpl.templates_per_class();
    let r = query.num_vectors();
    if f == 0 || f > k {
        return Err(IatrError::BadF { f, max: k });
    }
    if s == 0 || s > r {
        return Err(IatrError::BadS { s, max: r });
    }

    let dim = tpl.dim();
    let templates = tpl.templates(class);
    let mut out_templates = vec![vec![0.0; dim]; f];
    let mut out_template_sources = vec![vec![0usize; dim]; f];
    let mut out_queries = vec![vec![0.0; dim]; s];
    let mut out_query_sources = vec![vec![0usize; dim]; s];

    for l in 0..dim {
        // a(i): distance of template element i to its closest query element.
        let template_gap: Vec<f64> = (0..k)
            .map(|i| {
                let t = templates[i][l];
                (0..r)
                    .map(|ri| (t - query.value(ri, l)).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        // b(r): distance of query element r to its closest template element.
        let query_gap: Vec<f64> = (0..r)
            .map(|ri| {
                let q = query.value(ri, l);
                (0..k)
                    .map(|i| (templates[i][l] - q).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();

        let mut template_order: Vec<usize> = (0..k).collect();
        template_order.sort_by(|&a, &b| template_gap[a].total_cmp(&template_gap[b]).then(a.cmp(&b)));
        let mut query_order: Vec<usize> = (0..r).collect();
        query_order.sort_by(|&a, &b| query_gap[a].total_cmp(&query_gap[b]).then(a.cmp(&b)));

        for (slot, &i) in template_order.iter().take(f).enumerate() {
            out_templates[slot][l] = templates[i][l];
            out_template_sources[slot][l] = i;
        }
        for (slot, &ri) in query_order.iter().take(s).enumerate() {
            out_queries[slot][l] = query.value(ri, l);
            out_query_sources[slot][l] = ri;
        }
    }

    Ok(Phase2Pair {
        class_index: class,
        templates: out_templates,
        template_sources: out_template_sources,
        queries: out_queries,
        query_sources: out_query_sources,
    })
}

/// Match-score matrix `m[n][s]`: best template distance per class and
/// reconstructed query vector.
fn match_scores(
    tpl: &IntermediateTemplateSet,
    query: &QuerySet,
    f: usize,
    s: usize,
) -> Result<Vec<Vec<f64>>, IatrError> {
    (0..tpl.num_classes())
        .into_par_iter()
        .map(|n| {
            let pair = phase2_reconstruct(tpl, query, n, f, s)?;
            let scores = pair
                .queries
                .iter()
                .map(|q| {
                    pair.templates
                        .iter()
                        .map(|t| euclidean(t, q))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            Ok(scores)
        })
        .collect()
}

/// Majority vote with deterministic tie-breaking.
///
/// The most frequent label wins; among tied labels the one with the smaller
/// `tie_scores` value wins; a residual tie goes to the smaller index.
pub fn majority_vote(votes: &[usize], tie_scores: &[f64]) -> Result<usize, IatrError> {
    if votes.is_empty() {
        return Err(IatrError::EmptyVotes);
    }
    let mut counts = vec![0usize; tie_scores.len()];
    for &v in votes {
        counts[v] += 1;
    }
    let best = counts.iter().max().copied().unwrap_or(0);
    let winner = (0..tie_scores.len())
        .filter(|&n| counts[n] == best)
        .min_by(|&a, &b| tie_scores[a].total_cmp(&tie_scores[b]).then(a.cmp(&b)))
        .expect("at least one label holds the maximum count");
    Ok(winner)
}

/// Closed-set identification of one query observation.
///
/// Builds the reconstructed pair for every class, matches the `s`
/// reconstructed query vectors against the `f` reconstructed templates with
/// vector-wise Euclidean distance, votes per query vector, and resolves vote
/// ties by the smaller mean match score (then smaller class index).
pub fn classify(
    tpl: &IntermediateTemplateSet,
    query: &QuerySet,
    f: usize,
    s: usize,
) -> Result<ClassificationResult, IatrError> {
    let scores = match_scores(tpl, query, f, s)?;
    let n_classes = tpl.num_classes();

    let votes: Vec<usize> = (0..s)
        .map(|si| {
            (0..n_classes)
                .min_by(|&a, &b| scores[a][si].total_cmp(&scores[b][si]).then(a.cmp(&b)))
                .expect("at least one class")
        })
        .collect();

    let class_scores: Vec<f64> = scores
        .iter()
        .map(|per_s| per_s.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let mean_scores: Vec<f64> = scores
        .iter()
        .map(|per_s| per_s.iter().sum::<f64>() / per_s.len() as f64)
        .collect();

    let predicted = majority_vote(&votes, &mean_scores)?;
    Ok(ClassificationResult {
        predicted,
        predicted_label: tpl.label(predicted).to_string(),
        votes,
        class_scores,
    })
}

/// Verification score for a claimed identity: the minimum vector-wise
/// Euclidean distance over the claimed class's reconstructed pair. Lower
/// means more likely genuine.
pub fn verification_score(
    tpl: &IntermediateTemplateSet,
    query: &QuerySet,
    claimed: usize,
    f: usize,
    s: usize,
) -> Result<f64, IatrError> {
    if claimed >= tpl.num_classes() {
        return Err(IatrError::UnknownClass(format!("index {claimed}")));
    }
    let pair = phase2_reconstruct(tpl, query, claimed, f, s)?;
    let mut best = f64::INFINITY;
    for q in &pair.queries {
        for t in &pair.templates {
            best = best.min(euclidean(t, q));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TrainingSet;
    use crate::phase1::phase1_reconstruct;

    fn train(classes: Vec<Vec<Vec<f64>>>) -> TrainingSet {
        let labels = (0..classes.len()).map(|n| format!("c{n}")).collect();
        TrainingSet::new(labels, classes).unwrap()
    }

    #[test]
    fn exact_match_is_reconstructed_verbatim() {
        let t = train(vec![
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![vec![10.0, 20.0], vec![30.0, 40.0]],
        ]);
        let tpl = phase1_reconstruct(&t, 2).unwrap();
        // Query equal to one intermediate template of class 0.
        let probe: Vec<f64> = (0..2).map(|l| tpl.value(0, 0, l)).collect();
        let q = QuerySet::new(vec![probe.clone()]).unwrap();
        let pair = phase2_reconstruct(&tpl, &q, 0, 1, 1).unwrap();
        assert_eq!(pair.templates[0], probe);
        assert_eq!(pair.queries[0], probe);
    }

    #[test]
    fn one_dim_selection_follows_distance_table() {
        // Templates {1,4}, queries {2,10}: d = [[1,9],[2,6]], so a = (1,2)
        // and b = (1,6); F=S=1 keeps template 1 and query 2.
        let t = train(vec![
            vec![vec![1.0], vec![4.0]],
            vec![vec![100.0], vec![101.0]],
        ]);
        let tpl = phase1_reconstruct(&t, 2).unwrap();
        let q = QuerySet::new(vec![vec![2.0], vec![10.0]]).unwrap();
        let pair = phase2_reconstruct(&tpl, &q, 0, 1, 1).unwrap();
        assert_eq!(pair.templates, vec![vec![1.0]]);
        assert_eq!(pair.queries, vec![vec![2.0]]);
        assert_eq!(pair.query_sources, vec![vec![0]]);
    }

    #[test]
    fn shape_follows_f_and_s() {
        let instances: Vec<Vec<f64>> = (0..160).map(|i| vec![i as f64, -(i as f64)]).collect();
        let shifted: Vec<Vec<f64>> = (0..160).map(|i| vec![i as f64 + 500.0, 700.0]).collect();
        let t = train(vec![instances, shifted]);
        let tpl = phase1_reconstruct(&t, 160).unwrap();
        let q = QuerySet::new((0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect()).unwrap();
        let pair = phase2_reconstruct(&tpl, &q, 0, 4, 4).unwrap();
        assert_eq!(pair.templates.len(), 4);
        assert_eq!(pair.queries.len(), 4);
        assert_eq!(pair.templates[0].len(), 2);
        assert_eq!(pair.queries[0].len(), 2);
    }

    #[test]
    fn out_of_range_f_and_s_are_rejected() {
        let t = train(vec![vec![vec![0.0]], vec![vec![5.0]]]);
        let tpl = phase1_reconstruct(&t, 1).unwrap();
        let q = QuerySet::new(vec![vec![1.0]]).unwrap();
        assert!(matches!(
            phase2_reconstruct(&tpl, &q, 0, 2, 1),
            Err(IatrError::BadF { f: 2, max: 1 })
        ));
        assert!(matches!(
            phase2_reconstruct(&tpl, &q, 0, 1, 2),
            Err(IatrError::BadS { s: 2, max: 1 })
        ));
        assert!(matches!(
            phase2_reconstruct(&tpl, &q, 5, 1, 1),
            Err(IatrError::UnknownClass(_))
        ));
    }

    #[test]
    fn self_match_classifies_unanimously() {
        let t = train(vec![
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.5, 0.5]],
            vec![vec![20.0, 20.0], vec![21.0, 21.0], vec![20.5, 20.5]],
        ]);
        let tpl = phase1_reconstruct(&t, 2).unwrap();
        let q = QuerySet::new(vec![vec![20.0, 20.0], vec![21.0, 21.0]]).unwrap();
        let result = classify(&tpl, &q, 2, 2).unwrap();
        assert_eq!(result.predicted, 1);
        assert_eq!(result.predicted_label, "c1");
        assert!(result.votes.iter().all(|&v| v == 1));
    }

    #[test]
    fn hand_evaluated_two_class_case() {
        // class0 {0,0}, class1 {10,10}, Q = {1,2}, K=2, F=S=1.
        // Phase 2 keeps template 0 and query 1 for class0 (score 1) and
        // template 10 and query 2 for class1 (score 8).
        let t = train(vec![
            vec![vec![0.0], vec![0.0]],
            vec![vec![10.0], vec![10.0]],
        ]);
        let tpl = phase1_reconstruct(&t, 2).unwrap();
        let q = QuerySet::new(vec![vec![1.0], vec![2.0]]).unwrap();
        let result = classify(&tpl, &q, 1, 1).unwrap();
        assert_eq!(result.predicted, 0);
        assert!(result.votes.iter().all(|&v| v == 0));
        assert_eq!(result.class_scores, vec![1.0, 8.0]);

        // Same case through the verification path, claiming each class.
        assert_eq!(verification_score(&tpl, &q, 0, 1, 1).unwrap(), 1.0);
        assert_eq!(verification_score(&tpl, &q, 1, 1, 1).unwrap(), 8.0);
    }

    #[test]
    fn verification_of_stored_template_is_zero() {
        let t = train(vec![
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![vec![10.0, 20.0], vec![30.0, 40.0]],
        ]);
        let tpl = phase1_reconstruct(&t, 2).unwrap();
        let probe: Vec<f64> = (0..2).map(|l| tpl.value(1, 0, l)).collect();
        let q = QuerySet::new(vec![probe]).unwrap();
        assert_eq!(verification_score(&tpl, &q, 1, 1, 1).unwrap(), 0.0);
        assert!(matches!(
            verification_score(&tpl, &q, 9, 1, 1),
            Err(IatrError::UnknownClass(_))
        ));
    }

    #[test]
    fn majority_vote_tie_breaks() {
        assert_eq!(majority_vote(&[1, 1, 0], &[0.0, 0.0]).unwrap(), 1);
        // Tie on count: smaller tie score wins.
        assert_eq!(majority_vote(&[0, 1], &[0.5, 0.9]).unwrap(), 0);
        assert_eq!(majority_vote(&[0, 1], &[0.9, 0.5]).unwrap(), 1);
        // Residual tie: smaller index wins.
        assert_eq!(majority_vote(&[0, 1], &[0.7, 0.7]).unwrap(), 0);
        assert!(matches!(
            majority_vote(&[], &[0.0]),
            Err(IatrError::EmptyVotes)
        ));
    }

    #[test]
    fn vote_tie_resolved_by_mean_score_then_index() {
        // Templates at 0 and 10, queries {1, 8, 13}, S=2, F=1. Per-class
        // reconstruction keeps each class's two closest queries:
        // class0 matches (1, 8), class1 matches (2, 3). The vote splits
        // 1:1 and class1 wins on the smaller mean (2.5 < 4.5).
        let t = train(vec![
            vec![vec![0.0], vec![0.0]],
            vec![vec![10.0], vec![10.0]],
        ]);
        let tpl = phase1_reconstruct(&t, 2).unwrap();
        let q = QuerySet::new(vec![vec![1.0], vec![8.0], vec![13.0]]).unwrap();
        let result = classify(&tpl, &q, 1, 2).unwrap();
        assert_eq!(result.votes, vec![0, 1]);
        assert_eq!(result.predicted, 1);

        // Queries {1, 8, 17} give match scores (1, 8) vs (2, 7): still a
        // split vote but equal means (4.5), so the smaller index wins.
        let q = QuerySet::new(vec![vec![1.0], vec![8.0], vec![17.0]]).unwrap();
        let result = classify(&tpl, &q, 1, 2).unwrap();
        assert_eq!(result.votes, vec![0, 1]);
        assert_eq!(result.predicted, 0);
    }
}
