use meshroute::graph::{LinkWeights, MeshTopology, NodeId, ShortestPaths, TopologyBuilder};
use meshroute::optim::{alter, oplus, splice};

fn ids(v: &[usize]) -> Vec<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}

/// Nodes 0..=13 (several isolated). From source 1: node 7 is cheaper than 2,
/// 5 cheaper than 4, and 9 cheaper than 10.
fn oplus_fixture() -> MeshTopology {
    let edges = [
        (1, 2, 3.0),
        (2, 4, 3.0),
        (4, 9, 3.0),
        (9, 13, 3.0),
        (1, 7, 1.0),
        (7, 5, 1.0),
        (5, 10, 5.0),
        (10, 13, 1.0),
        (5, 9, 1.0),
    ];
    let mut b = TopologyBuilder::new(14);
    for (u, v, c) in edges {
        b = b.link_with(u, v, LinkWeights::cost(c));
    }
    b.gateways(&[13]).build().unwrap()
}

#[test]
fn source_costs_order_nodes_as_required() {
    let t = oplus_fixture();
    let tree = ShortestPaths::compute(&t, NodeId(1), None);
    let c = |n| tree.cost_to(NodeId(n)).unwrap();
    // Independently summed along the cheapest chains of the fixture.
    assert_eq!(c(2), 3.0);
    assert_eq!(c(7), 1.0);
    assert_eq!(c(4), 6.0);
    assert_eq!(c(5), 2.0);
    assert_eq!(c(9), 3.0);
    assert_eq!(c(10), 7.0);
    assert_eq!(alter(NodeId(2), NodeId(7), &tree), NodeId(7));
    assert_eq!(alter(NodeId(4), NodeId(5), &tree), NodeId(5));
    assert_eq!(alter(NodeId(9), NodeId(10), &tree), NodeId(9));
}

#[test]
fn oplus_combines_position_by_position() {
    let t = oplus_fixture();
    let tree = ShortestPaths::compute(&t, NodeId(1), None);
    let pa = oplus(&ids(&[1, 2, 4, 9, 13]), &ids(&[1, 7, 5, 10, 13]), &tree);
    assert_eq!(pa, ids(&[1, 7, 5, 9, 13]));
    assert!(meshroute::validate_path(&t, &pa, true));
}

#[test]
fn crossover_children_before_repair() {
    let p1 = ids(&[1, 7, 5, 8, 12, 15, 21, 24, 25]);
    let p2 = ids(&[1, 7, 5, 10, 17, 19, 22, 25]);
    assert_eq!(splice(&p1, &p2, 3, 4), ids(&[1, 7, 5, 10, 12, 15, 21, 24, 25]));
    assert_eq!(splice(&p2, &p1, 3, 7), ids(&[1, 7, 5, 8, 12, 15, 21, 25]));
}
