//! Graph commands: mst, cluster, subtree.

use std::collections::BTreeMap;

use clap::Args;
use icomp_core::cache;
use icomp_core::graph::{
    build_graph, maximum_spanning_tree, spectral_clustering, subtree_extract, tree_to_dot,
    SpanningTree,
};
use icomp_core::hoc::top_word_indices;
use icomp_core::EmbeddingMatrix;

use crate::artifacts::write_text;
use crate::config::{Provenance, Resolver};
use crate::{CmdError, Ctx};

/// Node labels "axis : top-word" under the display frequency filter.
fn node_labels(
    ctx: &Ctx,
    nodes: &[usize],
    min_freq: u64,
) -> Result<BTreeMap<usize, String>, CmdError> {
    let matrix: EmbeddingMatrix = ctx.cache.load_embedding()?;
    let (ica, _) = ctx.cache.load_ica()?;
    let mut labels = BTreeMap::new();
    for &axis in nodes {
        let idx = top_word_indices(&ica.components, matrix.freq(), axis, 1, min_freq)?;
        let idx = if idx.is_empty() {
            top_word_indices(&ica.components, matrix.freq(), axis, 1, 0)?
        } else {
            idx
        };
        if let Some(&t) = idx.first() {
            labels.insert(axis, matrix.word(t).to_string());
        }
    }
    Ok(labels)
}

#[derive(Args)]
pub struct MstArgs {
    /// Number of sigma-leading axes used as graph nodes.
    #[arg(long)]
    nodes: Option<usize>,
    /// Frequency filter for the node labels.
    #[arg(long)]
    label_min_freq: Option<u64>,
}

pub fn mst(ctx: &Ctx, args: MstArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let node_count = r.resolve("mst.nodes", args.nodes, 150)?;
    let label_min_freq = r.resolve("mst.label-min-freq", args.label_min_freq, 100)?;

    let hoc = ctx.cache.load_hoc()?;
    let (_, sigma) = ctx.cache.load_intrusion()?;
    let take = node_count.min(sigma.sigma.len());
    if take < node_count {
        eprintln!("warning: only {take} axes available (asked for {node_count})");
    }
    let nodes: Vec<usize> = sigma.sigma[..take].to_vec();
    let graph = build_graph(&hoc, &nodes)?;
    let tree = maximum_spanning_tree(&graph)?;

    let prov = Provenance::new("cache-mst", &r).with("nodes", take);
    cache::save_tree(&tree, &ctx.cache.tree_path(), &prov.meta_string())?;
    println!(
        "mst over {} nodes, total weight {:.6} -> {}",
        take,
        tree.total_weight(),
        ctx.cache.tree_path().display()
    );

    let labels = node_labels(ctx, &tree.nodes, label_min_freq)?;
    let header = Provenance::new("fig4-style", &r)
        .with("nodes", take)
        .with("label-min-freq", label_min_freq)
        .lines();
    let dot = tree_to_dot(&tree, &labels, &header, 5);
    ctx.ensure_out()?;
    let path = ctx.out_path("mst.dot");
    write_text(&path, &dot)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct ClusterArgs {
    /// Cluster count.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn cluster(ctx: &Ctx, args: ClusterArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let k = r.resolve("cluster.k", args.k, 10)?;
    let seed = r.resolve("cluster.seed", args.seed, 0)?;

    let tree: SpanningTree = ctx.cache.load_tree()?;
    let assignment = spectral_clustering(&tree, k, seed)?;

    let prov = Provenance::new("fig5-style", &r).with("seed", seed);
    let clusters: Vec<serde_json::Value> = assignment
        .members()
        .iter()
        .enumerate()
        .map(|(id, nodes)| {
            serde_json::json!({
                "id": id,
                "nodes": nodes,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "provenance": prov.json(),
        "k": assignment.k,
        "seed": seed,
        "clusters": clusters,
    });
    ctx.ensure_out()?;
    let path = ctx.out_path("clusters.json");
    write_text(
        &path,
        &(serde_json::to_string_pretty(&doc)
            .map_err(|e| CmdError::Data(e.to_string()))?
            + "\n"),
    )?;
    println!("wrote {} ({} clusters)", path.display(), assignment.k);
    Ok(())
}

#[derive(Args)]
pub struct SubtreeArgs {
    /// Root display axis.
    #[arg(long)]
    root: usize,
    /// Tree-hop radius around the root.
    #[arg(long)]
    radius: Option<usize>,
    /// Frequency filter for the node labels.
    #[arg(long)]
    label_min_freq: Option<u64>,
}

pub fn subtree(ctx: &Ctx, args: SubtreeArgs) -> Result<(), CmdError> {
    let mut r = Resolver::new(&ctx.config);
    let radius = r.resolve("subtree.radius", args.radius, 2)?;
    let label_min_freq = r.resolve("subtree.label-min-freq", args.label_min_freq, 100)?;
    r.note("subtree.root", args.root);

    let tree = ctx.cache.load_tree()?;
    let sub = subtree_extract(&tree, args.root, radius)?;
    let labels = node_labels(ctx, &sub.nodes, label_min_freq)?;
    let header = Provenance::new("fig4-style", &r)
        .with("root", args.root)
        .with("radius", radius)
        .lines();
    let dot = tree_to_dot(&sub, &labels, &header, 5);
    ctx.ensure_out()?;
    let path = ctx.out_path(&format!("subtree_{}_{radius}.dot", args.root));
    write_text(&path, &dot)?;
    println!("wrote {} ({} nodes)", path.display(), sub.nodes.len());
    Ok(())
}
