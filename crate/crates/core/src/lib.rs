//! Decomposition of embedding matrices into near-independent semantic
//! components, with analysis of the dependence that remains.
//!
//! The pipeline: load an embedding matrix, whiten it, rotate with FastICA,
//! then quantify the residual non-independence between components through
//! higher-order correlations. On top of that sit the downstream analyses:
//! per-word contribution decomposition, word-intrusion consistency scoring,
//! maximum spanning trees over HOC-weighted component graphs with spectral
//! clustering, cluster-average dimensionality reduction evaluated on word
//! similarity, and a pluggable pairwise-relatedness judge harness.

pub mod cache;
pub mod embedding;
pub mod error;
pub mod fastica;
pub mod graph;
pub mod hoc;
pub mod intrusion;
pub mod judge;
mod linalg;
pub mod reduction;
pub mod stats;
pub mod synthetic;
pub mod whitening;

pub use embedding::{
    load_frequencies, load_word2vec_text, normalize_rows, EmbeddingMatrix, FrequencyTable,
};
pub use error::{CoreError, Result};
pub use fastica::{amari_index, canonicalize, fit_ica, IcaConfig, IcaResult, Nonlinearity};
pub use graph::{
    build_graph, maximum_spanning_tree, minimum_spanning_tree, spectral_clustering,
    subtree_extract, tree_to_dot, ClusterAssignment, ComponentGraph, SpanningTree, TreeEdge,
};
pub use hoc::{
    frequency_correlation, hoc_histogram, hoc_matrix, top_contributors, top_words,
    ContributionList, FrequencyCorrelation, HocMatrix,
};
pub use intrusion::{
    intruder_pool, score_all_axes, score_axis, sigma_order, ConsistencyScore, IntrusionConfig,
    SigmaOrder,
};
pub use judge::{
    aggregate, build_trials, mock_judge, parse_response, resolve, AggregateRow, Judge,
    JudgeConfig, JudgeTrial, JudgeVerdict, LabelMap, ParsedVerdict, Resolved,
};
pub use reduction::{
    cluster_average_reduce, evaluate_similarity, load_similarity_tsv, random_clustering,
    run_reduction_benchmark, spearman, ReducedEmbedding, ReductionBenchmark, SimilarityDataset,
    SimilarityEval,
};
pub use whitening::{apply_whitening, fit_whitening, pca_view, WhiteningModel, DEFAULT_EPS};
