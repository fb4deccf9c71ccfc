//! Turns a multiset of sampled edges into a graph with a fixed edge count.
//! Random walks on a known graph stand in for generator output.
//!
//! cargo run --release --example assemble_graph

use dp_graphgen::assembler::{assemble_graph, count_edges, sequences_to_pairs, symmetrize};
use dp_graphgen::evaluation::{edge_overlap, max_degree, triangle_count};
use dp_graphgen::graph::{largest_connected_component, sample_random_walks, stochastic_block_model};

fn main() -> dp_graphgen::Result<()> {
    let g = largest_connected_component(&stochastic_block_model(&[100, 100], 0.1, 0.01, 2)?)?.graph;
    let walks = sample_random_walks(&g, 2, 50_000, 2, 0)?;
    let counts = count_edges(&sequences_to_pairs(&walks), g.num_nodes())?;
    let scores = symmetrize(&counts);
    let assembly = assemble_graph(&scores, g.num_edges(), 2)?;
    let out = &assembly.graph;
    println!("{}", serde_json::to_string_pretty(&assembly.manifest(walks.len()))?);
    println!("edges         {} -> {}", g.num_edges(), out.num_edges());
    println!("max degree    {} -> {}", max_degree(&g), max_degree(out));
    println!("triangles     {} -> {}", triangle_count(&g), triangle_count(out));
    println!("edge overlap  {:.4}", edge_overlap(out, &g));
    Ok(())
}
