//! Cluster-average dimensionality reduction and word-similarity evaluation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::graph::{build_graph, maximum_spanning_tree, spectral_clustering, ClusterAssignment};
use crate::hoc::HocMatrix;
use crate::intrusion::SigmaOrder;
use crate::stats::{average_ranks, pearson};

/// Word pairs with gold similarity scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

/// Loads a TSV dataset `word_a<TAB>word_b<TAB>score`, optionally headed.
///
/// Duplicate unordered pairs and non-finite scores are rejected.
pub fn load_similarity_tsv(path: impl AsRef<Path>, name: &str) -> Result<SimilarityDataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(CoreError::Parse {
                path: display.clone(),
                line: lineno + 1,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let score: f64 = match fields[2].trim().parse() {
            Ok(v) => v,
            // tolerate a single header line
            Err(_) if lineno == 0 => continue,
            Err(_) => {
                return Err(CoreError::Parse {
                    path: display.clone(),
                    line: lineno + 1,
                    message: format!("bad score '{}'", fields[2]),
                })
            }
        };
        if !score.is_finite() {
            return Err(CoreError::Parse {
                path: display.clone(),
                line: lineno + 1,
                message: "non-finite score".into(),
            });
        }
        let (a, b) = (fields[0].to_string(), fields[1].to_string());
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        if !seen.insert(key) {
            return Err(CoreError::Parse {
                path: display.clone(),
                line: lineno + 1,
                message: format!("duplicate pair '{a}' / '{b}'"),
            });
        }
        pairs.push((a, b, score));
    }
    Ok(SimilarityDataset {
        name: name.to_string(),
        pairs,
    })
}

/// Embedding reduced by averaging the columns of each cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEmbedding {
    pub vectors: Array2<f64>,
    pub cluster_map: ClusterAssignment,
}

/// Averages the source columns of every cluster; reduced column `c` is the
/// mean of the columns assigned to cluster `c`.
pub fn cluster_average_reduce(s: &Array2<f64>, a: &ClusterAssignment) -> Result<ReducedEmbedding> {
    let d = s.ncols();
    if a.assignment.len() != d || a.assignment.keys().enumerate().any(|(i, &ax)| i != ax) {
        return Err(CoreError::InvalidParam(format!(
            "assignment must cover axes 0..{d} exactly once"
        )));
    }
    let members = a.members();
    for (c, m) in members.iter().enumerate() {
        if m.is_empty() {
            return Err(CoreError::EmptyCluster(c));
        }
    }
    let n = s.nrows();
    let mut vectors = Array2::zeros((n, a.k));
    for (c, m) in members.iter().enumerate() {
        let scale = 1.0 / m.len() as f64;
        for &axis in m {
            let col = s.column(axis);
            let mut out = vectors.column_mut(c);
            out.zip_mut_with(&col, |o, v| *o += v * scale);
        }
    }
    Ok(ReducedEmbedding {
        vectors,
        cluster_map: a.clone(),
    })
}

/// Random clustering baseline: axes shuffled by seed, dealt round-robin into
/// `k` clusters so no cluster is empty.
pub fn random_clustering(d: usize, k: usize, seed: u64) -> Result<ClusterAssignment> {
    if k < 1 || k > d {
        return Err(CoreError::InvalidParam(format!(
            "cluster count must be in 1..={d}, got {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut axes: Vec<usize> = (0..d).collect();
    axes.shuffle(&mut rng);
    let mut assignment = BTreeMap::new();
    for (slot, axis) in axes.into_iter().enumerate() {
        assignment.insert(axis, slot % k);
    }
    Ok(ClusterAssignment { assignment, k })
}

/// Spearman rank correlation: average ranks for ties, then Pearson on the
/// rank vectors.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CoreError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(CoreError::InvalidParam(
            "spearman needs at least 2 observations".into(),
        ));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    match pearson(&rx, &ry) {
        Some(r) => Ok(r),
        None => {
            let which = if rx.iter().all(|&v| v == rx[0]) { "first" } else { "second" };
            Err(CoreError::ConstantInput(if which == "first" {
                "first"
            } else {
                "second"
            }))
        }
    }
}

/// Outcome of scoring one dataset against one embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityEval {
    pub rho: f64,
    pub used: usize,
    pub skipped: usize,
}

/// Cosine-similarity evaluation against gold scores. Out-of-vocabulary
/// pairs are skipped and counted.
pub fn evaluate_similarity(
    vectors: &Array2<f64>,
    vocab: &[String],
    ds: &SimilarityDataset,
) -> Result<SimilarityEval> {
    if vocab.len() != vectors.nrows() {
        return Err(CoreError::LengthMismatch {
            left: vocab.len(),
            right: vectors.nrows(),
        });
    }
    let index: HashMap<&str, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let mut gold = Vec::new();
    let mut cosine = Vec::new();
    let mut skipped = 0usize;
    for (a, b, score) in &ds.pairs {
        let (ia, ib) = match (index.get(a.as_str()), index.get(b.as_str())) {
            (Some(&ia), Some(&ib)) => (ia, ib),
            _ => {
                skipped += 1;
                continue;
            }
        };
        let ra = vectors.row(ia);
        let rb = vectors.row(ib);
        let dot: f64 = ra.iter().zip(rb.iter()).map(|(x, y)| x * y).sum();
        let na: f64 = ra.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nb: f64 = rb.iter().map(|v| v * v).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            skipped += 1;
            continue;
        }
        gold.push(*score);
        cosine.push(dot / (na * nb));
    }
    if gold.len() < 2 {
        return Err(CoreError::TooFewPairs {
            usable: gold.len(),
            skipped,
        });
    }
    Ok(SimilarityEval {
        rho: spearman(&cosine, &gold)?,
        used: gold.len(),
        skipped,
    })
}

/// One (method, target-dimension) cell of the reduction benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionCell {
    pub k: usize,
    pub mean_rho: f64,
    pub per_seed: Vec<f64>,
}

/// Scores of the random-clustering baseline and spectral-clustering-on-MST
/// reduction across target dimensions, averaged over seeds and datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionBenchmark {
    pub dims: Vec<usize>,
    pub seeds: Vec<u64>,
    pub random: Vec<ReductionCell>,
    pub spectral: Vec<ReductionCell>,
}

/// Runs the reduction benchmark.
///
/// For every target dimension `k`: (a) seeded random clusterings and (b)
/// spectral clusterings of the maximum spanning tree over the full d-node
/// HOC graph (node set taken from `sigma`), each averaged over `seeds` after
/// reducing and evaluating on every dataset.
pub fn run_reduction_benchmark(
    s: &Array2<f64>,
    hoc: &HocMatrix,
    sigma: &SigmaOrder,
    vocab: &[String],
    datasets: &[SimilarityDataset],
    dims: &[usize],
    seeds: &[u64],
) -> Result<ReductionBenchmark> {
    let d = s.ncols();
    if sigma.sigma.len() != d {
        return Err(CoreError::LengthMismatch {
            left: sigma.sigma.len(),
            right: d,
        });
    }
    if datasets.is_empty() {
        return Err(CoreError::InvalidParam("no similarity datasets".into()));
    }
    if seeds.is_empty() {
        return Err(CoreError::InvalidParam("no seeds".into()));
    }
    for &k in dims {
        if k < 1 || k > d {
            return Err(CoreError::InvalidParam(format!(
                "target dimension {k} out of range 1..={d}"
            )));
        }
    }
    let graph = build_graph(hoc, &sigma.sigma)?;
    let mst = maximum_spanning_tree(&graph)?;

    let eval_assignment = |a: &ClusterAssignment| -> Result<f64> {
        let reduced = cluster_average_reduce(s, a)?;
        let mut total = 0.0;
        for ds in datasets {
            total += evaluate_similarity(&reduced.vectors, vocab, ds)?.rho;
        }
        Ok(total / datasets.len() as f64)
    };

    let mut random = Vec::with_capacity(dims.len());
    let mut spectral = Vec::with_capacity(dims.len());
    for &k in dims {
        let mut per_seed_random = Vec::with_capacity(seeds.len());
        let mut per_seed_spectral = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            per_seed_random.push(eval_assignment(&random_clustering(d, k, seed)?)?);
            per_seed_spectral.push(eval_assignment(&spectral_clustering(&mst, k, seed)?)?);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        random.push(ReductionCell {
            k,
            mean_rho: mean(&per_seed_random),
            per_seed: per_seed_random,
        });
        spectral.push(ReductionCell {
            k,
            mean_rho: mean(&per_seed_spectral),
            per_seed: per_seed_spectral,
        });
    }
    Ok(ReductionBenchmark {
        dims: dims.to_vec(),
        seeds: seeds.to_vec(),
        random,
        spectral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn assignment(pairs: &[(usize, usize)], k: usize) -> ClusterAssignment {
        ClusterAssignment {
            assignment: pairs.iter().copied().collect(),
            k,
        }
    }

    #[test]
    fn reduce_averages_merged_axes() {
        let s = array![[2.0, 4.0], [1.0, 3.0]];
        let a = assignment(&[(0, 0), (1, 0)], 1);
        let r = cluster_average_reduce(&s, &a).unwrap();
        assert_eq!(r.vectors, array![[3.0], [2.0]]);
    }

    #[test]
    fn singleton_clusters_are_identity() {
        let s = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let a = assignment(&[(0, 0), (1, 1), (2, 2)], 3);
        let r = cluster_average_reduce(&s, &a).unwrap();
        assert_eq!(r.vectors, s);
    }

    #[test]
    fn reduce_four_axes_into_two_pairs() {
        let s = array![[1.0, 3.0, 5.0, 7.0]];
        let a = assignment(&[(0, 0), (1, 0), (2, 1), (3, 1)], 2);
        let r = cluster_average_reduce(&s, &a).unwrap();
        assert_eq!(r.vectors, array![[2.0, 6.0]]);
    }

    #[test]
    fn empty_cluster_is_an_error() {
        let s = array![[1.0, 2.0]];
        let a = assignment(&[(0, 0), (1, 0)], 2);
        assert!(matches!(
            cluster_average_reduce(&s, &a),
            Err(CoreError::EmptyCluster(1))
        ));
    }

    #[test]
    fn random_clustering_deals_round_robin() {
        let a = random_clustering(5, 2, 0).unwrap();
        let sizes: Vec<usize> = a.members().iter().map(|m| m.len()).collect();
        let mut sorted = sizes.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![2, 3]);

        let singletons = random_clustering(4, 4, 1).unwrap();
        assert!(singletons.members().iter().all(|m| m.len() == 1));

        let one = random_clustering(4, 1, 2).unwrap();
        assert_eq!(one.members()[0].len(), 4);

        assert!(random_clustering(3, 4, 0).is_err());
    }

    #[test]
    fn random_clustering_is_seed_deterministic() {
        let a = random_clustering(10, 3, 7).unwrap();
        let b = random_clustering(10, 3, 7).unwrap();
        assert_eq!(a, b);
        let c = random_clustering(10, 3, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn spearman_monotone_is_one() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let up = [10.0, 20.0, 25.0, 100.0];
        let down = [5.0, 4.0, 3.0, -2.0];
        assert!((spearman(&x, &up).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &down).unwrap() + 1.0).abs() < 1e-12);
    }

    /// Independent oracle: rank with average ties, then Pearson, written
    /// without reusing the library helpers.
    fn spearman_brute(x: &[f64], y: &[f64]) -> f64 {
        fn ranks(v: &[f64]) -> Vec<f64> {
            v.iter()
                .map(|a| {
                    let less = v.iter().filter(|b| **b < *a).count() as f64;
                    let equal = v.iter().filter(|b| **b == *a).count() as f64;
                    less + (equal + 1.0) / 2.0
                })
                .collect()
        }
        let rx = ranks(x);
        let ry = ranks(y);
        let n = rx.len() as f64;
        let mx = rx.iter().sum::<f64>() / n;
        let my = ry.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut dx = 0.0;
        let mut dy = 0.0;
        for i in 0..rx.len() {
            num += (rx[i] - mx) * (ry[i] - my);
            dx += (rx[i] - mx).powi(2);
            dy += (ry[i] - my).powi(2);
        }
        num / (dx * dy).sqrt()
    }

    #[test]
    fn spearman_with_ties_matches_brute_force() {
        let x = [1.0, 2.0, 2.0, 3.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        let got = spearman(&x, &y).unwrap();
        let expected = spearman_brute(&x, &y);
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn spearman_errors() {
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(CoreError::LengthMismatch { .. })
        ));
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(CoreError::ConstantInput(_))
        ));
    }

    proptest! {
        #[test]
        fn spearman_invariant_under_increasing_transforms(
            values in proptest::collection::vec(-50.0f64..50.0, 5..40),
            others in proptest::collection::vec(-50.0f64..50.0, 5..40),
        ) {
            let n = values.len().min(others.len());
            let x = &values[..n];
            let y = &others[..n];
            let distinct = |v: &[f64]| v.iter().any(|a| *a != v[0]);
            prop_assume!(distinct(x) && distinct(y));
            let base = spearman(x, y).unwrap();
            let tx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            let ty: Vec<f64> = y.iter().map(|v| 3.0 * v + 11.0).collect();
            let transformed = spearman(&tx, &ty).unwrap();
            prop_assert!((base - transformed).abs() < 1e-9);
        }
    }

    fn toy_vocab(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    #[test]
    fn evaluate_similarity_perfect_order() {
        let vectors = array![
            [1.0, 0.0],
            [0.9, 0.1],
            [0.0, 1.0],
        ];
        let vocab = toy_vocab(3);
        let ds = SimilarityDataset {
            name: "toy".into(),
            pairs: vec![
                ("w0".into(), "w1".into(), 9.0),
                ("w0".into(), "w2".into(), 1.0),
            ],
        };
        let eval = evaluate_similarity(&vectors, &vocab, &ds).unwrap();
        assert!((eval.rho - 1.0).abs() < 1e-12);
        assert_eq!(eval.used, 2);
        assert_eq!(eval.skipped, 0);
    }

    #[test]
    fn evaluate_similarity_all_oov_is_an_error() {
        let vectors = array![[1.0, 0.0], [0.0, 1.0]];
        let vocab = toy_vocab(2);
        let ds = SimilarityDataset {
            name: "toy".into(),
            pairs: vec![("nope".into(), "also".into(), 1.0)],
        };
        assert!(matches!(
            evaluate_similarity(&vectors, &vocab, &ds),
            Err(CoreError::TooFewPairs { .. })
        ));
    }

    #[test]
    fn evaluate_similarity_hand_computed_four_pairs() {
        let vectors = array![
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [-1.0, 0.2],
        ];
        let vocab = toy_vocab(4);
        // cosines: (w0,w1)=0.7071, (w0,w2)=0, (w1,w2)=0.7071, (w0,w3)=-0.9806
        let ds = SimilarityDataset {
            name: "toy".into(),
            pairs: vec![
                ("w0".into(), "w1".into(), 8.0),
                ("w0".into(), "w2".into(), 3.0),
                ("w1".into(), "w2".into(), 7.0),
                ("w0".into(), "w3".into(), 1.0),
            ],
        };
        let eval = evaluate_similarity(&vectors, &vocab, &ds).unwrap();
        // gold ranks: (4, 2, 3, 1); cosine ranks: (3.5, 2, 3.5, 1)
        let expected = spearman_brute(&[0.7071, 0.0, 0.7071, -0.9806], &[8.0, 3.0, 7.0, 1.0]);
        assert!((eval.rho - expected).abs() < 1e-12);
    }

    #[test]
    fn evaluate_similarity_is_scale_invariant() {
        let vectors = array![
            [1.0, 2.0],
            [0.5, -1.0],
            [2.0, 0.3],
            [-1.0, 1.0],
        ];
        let vocab = toy_vocab(4);
        let ds = SimilarityDataset {
            name: "toy".into(),
            pairs: vec![
                ("w0".into(), "w1".into(), 5.0),
                ("w2".into(), "w3".into(), 2.0),
                ("w0".into(), "w2".into(), 7.0),
            ],
        };
        let a = evaluate_similarity(&vectors, &vocab, &ds).unwrap();
        let scaled = vectors.mapv(|v| 42.0 * v);
        let b = evaluate_similarity(&scaled, &vocab, &ds).unwrap();
        assert_eq!(a.rho, b.rho);
    }

    #[test]
    fn similarity_tsv_loader_rejects_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.tsv");
        std::fs::write(&path, "a\tb\t3.0\nb\ta\t4.0\n").unwrap();
        let err = load_similarity_tsv(&path, "ds").unwrap_err();
        assert!(err.to_string().contains("duplicate pair"), "{err}");
    }

    #[test]
    fn similarity_tsv_loader_accepts_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.tsv");
        std::fs::write(&path, "word1\tword2\tscore\na\tb\t3.5\n").unwrap();
        let ds = load_similarity_tsv(&path, "ds").unwrap();
        assert_eq!(ds.pairs.len(), 1);
        assert_eq!(ds.pairs[0].2, 3.5);
    }

    #[test]
    fn benchmark_shape_single_cell() {
        use crate::synthetic::{group_model, group_similarity_pairs, GroupModelConfig};
        let model = group_model(&GroupModelConfig {
            words: 300,
            groups: 4,
            axes_per_group: 2,
            ..Default::default()
        });
        let hoc = crate::hoc::hoc_matrix(&model.components).unwrap();
        let sigma = SigmaOrder {
            sigma: (0..model.components.ncols()).collect(),
        };
        let ds = SimilarityDataset {
            name: "toy".into(),
            pairs: group_similarity_pairs(&model, 40, 40, 5),
        };
        let bench = run_reduction_benchmark(
            &model.components,
            &hoc,
            &sigma,
            &model.vocab,
            &[ds],
            &[2],
            &[0],
        )
        .unwrap();
        assert_eq!(bench.random.len(), 1);
        assert_eq!(bench.spectral.len(), 1);
        assert_eq!(bench.random[0].per_seed.len(), 1);
    }

    #[test]
    fn benchmark_identity_dimension_matches_unreduced_score() {
        use crate::synthetic::{group_model, group_similarity_pairs, GroupModelConfig};
        let model = group_model(&GroupModelConfig {
            words: 240,
            groups: 4,
            axes_per_group: 2,
            ..Default::default()
        });
        let d = model.components.ncols();
        let hoc = crate::hoc::hoc_matrix(&model.components).unwrap();
        let sigma = SigmaOrder { sigma: (0..d).collect() };
        let ds = SimilarityDataset {
            name: "toy".into(),
            pairs: group_similarity_pairs(&model, 40, 40, 9),
        };
        let direct = evaluate_similarity(&model.components, &model.vocab, &ds).unwrap();
        let bench = run_reduction_benchmark(
            &model.components,
            &hoc,
            &sigma,
            &model.vocab,
            &[ds],
            &[d],
            &[0, 1],
        )
        .unwrap();
        // with k = d both clusterings are singletons, i.e. the identity
        for cell in bench.random.iter().chain(bench.spectral.iter()) {
            for rho in &cell.per_seed {
                assert!((rho - direct.rho).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn benchmark_is_deterministic_given_seed_list() {
        use crate::synthetic::{group_model, group_similarity_pairs, GroupModelConfig};
        let model = group_model(&GroupModelConfig {
            words: 200,
            groups: 4,
            axes_per_group: 2,
            ..Default::default()
        });
        let hoc = crate::hoc::hoc_matrix(&model.components).unwrap();
        let sigma = SigmaOrder {
            sigma: (0..model.components.ncols()).collect(),
        };
        let ds = SimilarityDataset {
            name: "toy".into(),
            pairs: group_similarity_pairs(&model, 30, 30, 2),
        };
        let run = || {
            run_reduction_benchmark(
                &model.components,
                &hoc,
                &sigma,
                &model.vocab,
                std::slice::from_ref(&ds),
                &[2, 4],
                &[0, 1, 2],
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }
}
