//! Structural statistics of a seeded block-model graph's largest component.
//!
//! cargo run --release --example graph_stats

use dp_graphgen::evaluation::{
    assortativity, characteristic_path_length, clustering_coefficient, max_degree, mean_local_clustering,
    power_law_exponent, triangle_count,
};
use dp_graphgen::graph::{largest_connected_component, stochastic_block_model};

fn main() -> dp_graphgen::Result<()> {
    let g = stochastic_block_model(&[150, 150], 0.085, 0.005, 7)?;
    let lcc = largest_connected_component(&g)?;
    let g = &lcc.graph;
    let paths = characteristic_path_length(g)?;
    let fit = power_law_exponent(g)?;
    println!("nodes                  {}", g.num_nodes());
    println!("edges                  {}", g.num_edges());
    println!("max degree             {}", max_degree(g));
    println!("assortativity          {:?}", assortativity(g)?);
    println!("triangles              {}", triangle_count(g));
    println!("global clustering      {:.4}", clustering_coefficient(g));
    println!("mean local clustering  {:.4}", mean_local_clustering(g));
    println!("path length            {:.4}", paths.mean);
    println!("power-law exponent     {:.4} (x_min {})", fit.exponent, fit.x_min);
    Ok(())
}
