use super::{normalize, Graph, NodeId};
use crate::error::{Error, Result};

/// A connected subgraph relabeled to contiguous ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub graph: Graph,
    /// `original_ids[new_id]` is the node's id in the source graph.
    pub original_ids: Vec<NodeId>,
}

/// Extracts the largest connected component by node count.
///
/// Ties go to the component holding the smallest original node id. New ids
/// preserve the relative order of the original ones.
pub fn largest_connected_component(g: &Graph) -> Result<Component> {
    if g.num_nodes() == 0 {
        return Err(Error::EmptyInput("graph has no nodes".into()));
    }
    let labels = g.component_labels();
    let num_components = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; num_components];
    for &l in &labels {
        sizes[l] += 1;
    }
    // labels are ordered by smallest member, so the first maximum wins ties
    let best = (0..num_components)
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
        .unwrap();

    let original_ids: Vec<NodeId> = (0..g.num_nodes()).filter(|&u| labels[u] == best).collect();
    let mut new_id = vec![usize::MAX; g.num_nodes()];
    for (new, &old) in original_ids.iter().enumerate() {
        new_id[old] = new;
    }
    let mut edges: Vec<_> = g
        .edges()
        .iter()
        .filter(|&&(u, _)| labels[u] == best)
        .map(|&(u, v)| normalize(new_id[u], new_id[v]))
        .collect();
    edges.sort_unstable();
    Ok(Component {
        graph: Graph::from_sorted_unique(original_ids.len(), edges),
        original_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_largest_and_relabels() {
        let g = Graph::from_edges(5, [(3, 4), (0, 1), (1, 2)]).unwrap();
        let c = largest_connected_component(&g).unwrap();
        assert_eq!(c.graph.num_nodes(), 3);
        assert_eq!(c.original_ids, vec![0, 1, 2]);
        assert_eq!(c.graph.edges(), &[(0, 1), (1, 2)]);

        let g = Graph::from_edges(6, [(0, 5), (2, 3), (3, 4)]).unwrap();
        let c = largest_connected_component(&g).unwrap();
        assert_eq!(c.original_ids, vec![2, 3, 4]);
        assert_eq!(c.graph.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn connected_graph_is_unchanged() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let c = largest_connected_component(&g).unwrap();
        assert_eq!(c.graph, g);
        assert_eq!(c.original_ids, vec![0, 1, 2, 3]);
    }

    #[test]
    fn ties_go_to_smallest_node_id() {
        let g = Graph::from_edges(4, [(2, 3), (0, 1)]).unwrap();
        let c = largest_connected_component(&g).unwrap();
        assert_eq!(c.original_ids, vec![0, 1]);

        let g = Graph::from_edges(5, [(3, 4), (1, 2)]).unwrap();
        let c = largest_connected_component(&g).unwrap();
        assert_eq!(c.original_ids, vec![1, 2]);
    }
}
