//! Holds out 15% of a graph's edges plus as many non-edges for validation
//! and writes the split to a directory.
//!
//! cargo run --release --example split_edges -- [out_dir]

use dp_graphgen::graph::{largest_connected_component, split_edges, stochastic_block_model};

fn main() -> dp_graphgen::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "split-example".into());
    let g = stochastic_block_model(&[60, 60], 0.2, 0.02, 1)?;
    let lcc = largest_connected_component(&g)?.graph;
    let split = split_edges(&lcc, 0.15, 1)?;
    assert!(split.train.is_connected());
    split.save(out.as_ref())?;
    println!("{}", serde_json::to_string_pretty(&split.manifest())?);
    println!("written to {out}/");
    Ok(())
}
