//! Tree network topology: node roles, greedy tree construction under
//! capacity limits, and multi-hop delivery over the radio models.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::radio::{
    hop_latency_total, link_viable, rssi_at, rssi_at_noisy, LatencyTable, LinkPolicy,
    PathLossModel, RadioError, ThroughputSteps,
};

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("the node list must not contain a second coordinator (node {0})")]
    DuplicateCoordinator(usize),
    #[error("node {node} at ({x}, {y}) cannot attach to any parent under the tree constraints")]
    Unattachable { node: NodeId, x: f64, y: f64 },
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("{topology:?} topology is not supported: {reason}")]
    UnsupportedTopology {
        topology: Topology,
        reason: &'static str,
    },
    #[error(transparent)]
    Radio(#[from] RadioError),
}

/// Network-wide node identifier. The coordinator is always id 0.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Coordinator,
    Router,
    EndDevice,
}

impl Role {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ZC" | "COORDINATOR" => Some(Self::Coordinator),
            "ZR" | "ROUTER" => Some(Self::Router),
            "ZED" | "END_DEVICE" | "ENDDEVICE" => Some(Self::EndDevice),
            _ => None,
        }
    }

    fn can_parent(self) -> bool {
        matches!(self, Role::Coordinator | Role::Router)
    }
}

/// Supported network arrangements. Star and Mesh are rejected at build
/// time: star does not scale past the coordinator's direct range and mesh
/// route computation costs power the end devices do not have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Tree,
    Star,
    Mesh,
}

impl Default for Topology {
    fn default() -> Self {
        Topology::Tree
    }
}

/// Join limits for the tree: children per parent, tree depth, and routers
/// per parent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_children: u32,
    pub max_depth: u32,
    pub max_routers_per_parent: u32,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_children: 4,
            max_depth: 5,
            max_routers_per_parent: 2,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.max_children == 0 || self.max_depth == 0 || self.max_routers_per_parent == 0 {
            return Err(TreeError::UnsupportedTopology {
                topology: Topology::Tree,
                reason: "tree limits must all be at least 1",
            });
        }
        Ok(())
    }
}

/// A positioned radio node in the tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorNode {
    pub id: NodeId,
    pub role: Role,
    pub position: (f64, f64),
    pub parent: Option<NodeId>,
    pub depth: u32,
}

/// The rooted network tree. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkTree {
    pub nodes: Vec<SensorNode>,
    pub params: TreeParams,
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Builds the tree by greedy attachment: candidates join in ascending
/// distance-to-coordinator order (ties by ascending id), each to the
/// nearest already-attached coordinator/router that has spare capacity, a
/// viable deterministic-RSSI link, and room below the depth limit.
pub fn build_tree(
    coordinator_pos: (f64, f64),
    nodes: &[((f64, f64), Role)],
    params: TreeParams,
    pathloss: &PathLossModel,
    policy: &LinkPolicy,
    topology: Topology,
) -> Result<NetworkTree, TreeError> {
    match topology {
        Topology::Tree => {}
        Topology::Star => {
            return Err(TreeError::UnsupportedTopology {
                topology,
                reason: "a single hub cannot cover a large field of sensors",
            })
        }
        Topology::Mesh => {
            return Err(TreeError::UnsupportedTopology {
                topology,
                reason: "route discovery overhead defeats the low-power budget",
            })
        }
    }
    params.validate()?;
    pathloss.validate()?;
    policy.validate()?;

    let mut tree_nodes = vec![SensorNode {
        id: NodeId(0),
        role: Role::Coordinator,
        position: coordinator_pos,
        parent: None,
        depth: 0,
    }];
    for (i, (pos, role)) in nodes.iter().enumerate() {
        if *role == Role::Coordinator {
            return Err(TreeError::DuplicateCoordinator(i));
        }
        tree_nodes.push(SensorNode {
            id: NodeId(i as u32 + 1),
            role: *role,
            position: *pos,
            parent: None,
            depth: 0,
        });
    }

    // Join order: ascending distance to the coordinator, ties by id.
    let mut order: Vec<usize> = (1..tree_nodes.len()).collect();
    order.sort_by(|&a, &b| {
        let da = dist(tree_nodes[a].position, coordinator_pos);
        let db = dist(tree_nodes[b].position, coordinator_pos);
        da.total_cmp(&db).then(a.cmp(&b))
    });

    let mut attached = vec![false; tree_nodes.len()];
    attached[0] = true;
    let mut child_count = vec![0u32; tree_nodes.len()];
    let mut router_count = vec![0u32; tree_nodes.len()];

    for &idx in &order {
        let joining_pos = tree_nodes[idx].position;
        let joining_is_router = tree_nodes[idx].role == Role::Router;
        let mut best: Option<(f64, usize)> = None;
        for (pidx, parent) in tree_nodes.iter().enumerate() {
            if !attached[pidx] || !parent.role.can_parent() {
                continue;
            }
            if child_count[pidx] >= params.max_children {
                continue;
            }
            if joining_is_router && router_count[pidx] >= params.max_routers_per_parent {
                continue;
            }
            if parent.depth + 1 > params.max_depth {
                continue;
            }
            let d = dist(joining_pos, parent.position);
            let viable = match rssi_at(d, pathloss) {
                Ok(rssi) => link_viable(rssi, policy),
                Err(_) => false,
            };
            if !viable {
                continue;
            }
            let better = match best {
                None => true,
                Some((bd, bidx)) => d < bd || (d == bd && pidx < bidx),
            };
            if better {
                best = Some((d, pidx));
            }
        }
        match best {
            Some((_, pidx)) => {
                tree_nodes[idx].parent = Some(tree_nodes[pidx].id);
                tree_nodes[idx].depth = tree_nodes[pidx].depth + 1;
                attached[idx] = true;
                child_count[pidx] += 1;
                if joining_is_router {
                    router_count[pidx] += 1;
                }
            }
            None => {
                return Err(TreeError::Unattachable {
                    node: tree_nodes[idx].id,
                    x: joining_pos.0,
                    y: joining_pos.1,
                })
            }
        }
    }

    Ok(NetworkTree {
        nodes: tree_nodes,
        params,
    })
}

impl NetworkTree {
    pub fn node(&self, id: NodeId) -> Result<&SensorNode, TreeError> {
        self.nodes
            .get(id.0 as usize)
            .filter(|n| n.id == id)
            .ok_or(TreeError::UnknownNode(id))
    }

    pub fn coordinator(&self) -> &SensorNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Checks the structural invariants: one coordinator at depth 0, leaf
    /// end devices, parent/depth consistency and capacity limits.
    pub fn validate(&self) -> Result<(), String> {
        let coordinators = self
            .nodes
            .iter()
            .filter(|n| n.role == Role::Coordinator)
            .count();
        if coordinators != 1 {
            return Err(format!("expected exactly one coordinator, found {coordinators}"));
        }
        let root = self.coordinator();
        if root.parent.is_some() || root.depth != 0 {
            return Err("coordinator must be the root at depth 0".into());
        }
        let mut child_count = vec![0u32; self.nodes.len()];
        let mut router_count = vec![0u32; self.nodes.len()];
        for n in &self.nodes {
            if n.role == Role::Coordinator {
                continue;
            }
            let parent_id = match n.parent {
                Some(p) => p,
                None => return Err(format!("node {} has no parent", n.id)),
            };
            let parent = self
                .node(parent_id)
                .map_err(|e| e.to_string())?;
            if parent.role == Role::EndDevice {
                return Err(format!("end device {} has child {}", parent.id, n.id));
            }
            if n.depth != parent.depth + 1 {
                return Err(format!(
                    "node {} depth {} != parent depth {} + 1",
                    n.id, n.depth, parent.depth
                ));
            }
            if n.depth > self.params.max_depth {
                return Err(format!("node {} exceeds max depth", n.id));
            }
            child_count[parent_id.0 as usize] += 1;
            if n.role == Role::Router {
                router_count[parent_id.0 as usize] += 1;
            }
        }
        for (i, &c) in child_count.iter().enumerate() {
            if c > self.params.max_children {
                return Err(format!("node {i} has {c} children"));
            }
            if router_count[i] > self.params.max_routers_per_parent {
                return Err(format!("node {i} has {} router children", router_count[i]));
            }
        }
        Ok(())
    }

    /// Serializes the topology to JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }
}

/// The parent chain from `source` up to the coordinator, source first.
pub fn route_to_root(tree: &NetworkTree, source: NodeId) -> Result<Vec<NodeId>, TreeError> {
    let mut path = vec![source];
    let mut current = tree.node(source)?;
    while let Some(parent) = current.parent {
        path.push(parent);
        current = tree.node(parent)?;
    }
    Ok(path)
}

/// Per-link diagnostics for a delivery attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopReport {
    pub from: NodeId,
    pub to: NodeId,
    pub distance_m: f64,
    pub rssi_dbm: f64,
    pub viable: bool,
}

/// Outcome of sending a payload from a node to the coordinator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeliveryReport {
    pub source: NodeId,
    pub delivered: bool,
    pub total_latency_s: f64,
    pub hops: u32,
    pub per_hop: Vec<HopReport>,
    /// Weakest-link throughput along the path; `None` for a zero-hop path.
    pub min_throughput_bps: Option<u32>,
    pub path: Vec<NodeId>,
}

/// Radio models needed to evaluate a delivery.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioModels {
    pub latency: LatencyTable,
    pub pathloss: PathLossModel,
    pub policy: LinkPolicy,
    pub throughput: ThroughputSteps,
}

impl Default for RadioModels {
    fn default() -> Self {
        Self {
            latency: LatencyTable::default(),
            pathloss: PathLossModel::default(),
            policy: LinkPolicy::default(),
            throughput: ThroughputSteps::default(),
        }
    }
}

/// Sends `payload_bytes` from `source` to the coordinator, evaluating every
/// link on the way. With an RNG the per-link RSSI includes shadowing noise;
/// without one it is deterministic. Latency is still reported when a link
/// fails, for diagnostics.
pub fn deliver<R: Rng + ?Sized>(
    tree: &NetworkTree,
    source: NodeId,
    payload_bytes: u32,
    models: &RadioModels,
    mut rng: Option<&mut R>,
) -> Result<DeliveryReport, TreeError> {
    if payload_bytes == 0 {
        return Err(TreeError::Radio(RadioError::InvalidPayload));
    }
    let path = route_to_root(tree, source)?;
    let hops = (path.len() - 1) as u32;
    if hops == 0 {
        return Ok(DeliveryReport {
            source,
            delivered: true,
            total_latency_s: 0.0,
            hops: 0,
            per_hop: Vec::new(),
            min_throughput_bps: None,
            path,
        });
    }
    let mut per_hop = Vec::with_capacity(hops as usize);
    let mut min_tp: Option<u32> = None;
    let mut all_viable = true;
    for pair in path.windows(2) {
        let from = tree.node(pair[0])?;
        let to = tree.node(pair[1])?;
        let d = dist(from.position, to.position);
        let rssi = match rng.as_deref_mut() {
            Some(r) => rssi_at_noisy(d, &models.pathloss, r)?,
            None => rssi_at(d, &models.pathloss)?,
        };
        let viable = link_viable(rssi, &models.policy);
        all_viable &= viable;
        let tp = crate::radio::throughput_for(rssi, &models.throughput);
        min_tp = Some(min_tp.map_or(tp, |m| m.min(tp)));
        per_hop.push(HopReport {
            from: from.id,
            to: to.id,
            distance_m: d,
            rssi_dbm: rssi,
            viable,
        });
    }
    let total_latency_s = hop_latency_total(payload_bytes, hops, &models.latency)?;
    Ok(DeliveryReport {
        source,
        delivered: all_viable,
        total_latency_s,
        hops,
        per_hop,
        min_throughput_bps: min_tp,
        path,
    })
}

/// The reference six-node chain layout: coordinator, two routers and three
/// end devices, neighbors 10 m apart, the farthest end device three hops
/// out.
pub fn reference_chain_layout() -> ((f64, f64), Vec<((f64, f64), Role)>) {
    (
        (0.0, 0.0),
        vec![
            ((10.0, 0.0), Role::Router),
            ((20.0, 0.0), Role::Router),
            ((30.0, 0.0), Role::EndDevice),
            ((10.0, 10.0), Role::EndDevice),
            ((20.0, 10.0), Role::EndDevice),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn models() -> RadioModels {
        RadioModels::default()
    }

    fn build_reference_chain() -> NetworkTree {
        let (zc, nodes) = reference_chain_layout();
        build_tree(
            zc,
            &nodes,
            TreeParams::default(),
            &models().pathloss,
            &models().policy,
            Topology::Tree,
        )
        .unwrap()
    }

    #[test]
    fn reference_chain_depths_match_expected_hops() {
        let tree = build_reference_chain();
        tree.validate().unwrap();
        // Chain: ZC <- ZR1 <- ZR2 <- far ZED.
        assert_eq!(tree.node(NodeId(1)).unwrap().depth, 1);
        assert_eq!(tree.node(NodeId(2)).unwrap().depth, 2);
        assert_eq!(tree.node(NodeId(3)).unwrap().depth, 3);
        assert_eq!(tree.node(NodeId(3)).unwrap().parent, Some(NodeId(2)));
    }

    #[test]
    fn trivial_tree_is_just_the_coordinator() {
        let tree = build_tree(
            (5.0, 5.0),
            &[],
            TreeParams::default(),
            &models().pathloss,
            &models().policy,
            Topology::Tree,
        )
        .unwrap();
        assert_eq!(tree.len(), 1);
        assert_eq!(tree.coordinator().depth, 0);
        tree.validate().unwrap();
    }

    #[test]
    fn node_beyond_link_range_is_unattachable() {
        let err = build_tree(
            (0.0, 0.0),
            &[((900.0, 0.0), Role::Router)],
            TreeParams::default(),
            &models().pathloss,
            &models().policy,
            Topology::Tree,
        )
        .unwrap_err();
        match err {
            TreeError::Unattachable { node, x, .. } => {
                assert_eq!(node, NodeId(1));
                assert_eq!(x, 900.0);
            }
            other => panic!("expected Unattachable, got {other}"),
        }
    }

    #[test]
    fn star_and_mesh_are_rejected() {
        for topology in [Topology::Star, Topology::Mesh] {
            let err = build_tree(
                (0.0, 0.0),
                &[],
                TreeParams::default(),
                &models().pathloss,
                &models().policy,
                topology,
            )
            .unwrap_err();
            assert!(matches!(err, TreeError::UnsupportedTopology { .. }));
        }
    }

    #[test]
    fn second_coordinator_is_rejected() {
        let err = build_tree(
            (0.0, 0.0),
            &[((10.0, 0.0), Role::Coordinator)],
            TreeParams::default(),
            &models().pathloss,
            &models().policy,
            Topology::Tree,
        )
        .unwrap_err();
        assert!(matches!(err, TreeError::DuplicateCoordinator(0)));
    }

    #[test]
    fn end_devices_never_accept_children() {
        // A lone end device near the field edge, then another node whose
        // only near neighbor is that end device; it must skip to the router.
        let tree = build_tree(
            (0.0, 0.0),
            &[
                ((10.0, 0.0), Role::EndDevice),
                ((12.0, 0.0), Role::EndDevice),
            ],
            TreeParams::default(),
            &models().pathloss,
            &models().policy,
            Topology::Tree,
        )
        .unwrap();
        assert_eq!(tree.node(NodeId(2)).unwrap().parent, Some(NodeId(0)));
        tree.validate().unwrap();
    }

    #[test]
    fn route_to_root_walks_the_parent_chain() {
        let tree = build_reference_chain();
        let path = route_to_root(&tree, NodeId(3)).unwrap();
        assert_eq!(path, vec![NodeId(3), NodeId(2), NodeId(1), NodeId(0)]);
        assert_eq!(route_to_root(&tree, NodeId(0)).unwrap(), vec![NodeId(0)]);
        assert!(matches!(
            route_to_root(&tree, NodeId(99)),
            Err(TreeError::UnknownNode(_))
        ));
    }

    #[test]
    fn deliver_three_hops_hundred_bytes() {
        let tree = build_reference_chain();
        let report = deliver::<rand::rngs::StdRng>(&tree, NodeId(3), 100, &models(), None).unwrap();
        assert!(report.delivered);
        assert_eq!(report.hops, 3);
        assert_eq!(report.total_latency_s, 0.411);
        assert_eq!(report.per_hop.len(), 3);
        for hop in &report.per_hop {
            assert_relative_eq!(hop.distance_m, 10.0, epsilon = 1e-9);
            assert!(hop.viable);
        }
        // 10 m links sit in the -70..-60 band.
        assert_eq!(report.min_throughput_bps, Some(28_000));
    }

    #[test]
    fn deliver_from_coordinator_is_trivial() {
        let tree = build_reference_chain();
        let report = deliver::<rand::rngs::StdRng>(&tree, NodeId(0), 10, &models(), None).unwrap();
        assert!(report.delivered);
        assert_eq!(report.hops, 0);
        assert_eq!(report.total_latency_s, 0.0);
        assert_eq!(report.min_throughput_bps, None);
    }

    #[test]
    fn dead_link_reports_failure_with_latency() {
        // Thin the policy so a 10 m link fails: threshold above the
        // deterministic 10 m RSSI (-65.56 dBm) is rejected by validation,
        // so instead stretch one link well past viability.
        let (zc, mut nodes) = reference_chain_layout();
        nodes[2].0 = (20.0 + 750.0, 0.0); // far ZED now 750 m from its router
        let tree = build_tree(
            zc,
            &nodes,
            TreeParams::default(),
            &models().pathloss,
            &models().policy,
            Topology::Tree,
        );
        // 750 m deterministic RSSI ~ -138 dBm: the node cannot even join.
        assert!(matches!(tree, Err(TreeError::Unattachable { .. })));

        // Force the situation instead by hand-building a tree with a long
        // link, which models a link that degraded after joining.
        let mut tree = build_reference_chain();
        tree.nodes[3].position = (20.0 + 500.0, 0.0);
        let report = deliver::<rand::rngs::StdRng>(&tree, NodeId(3), 100, &models(), None).unwrap();
        assert!(!report.delivered);
        assert_eq!(report.total_latency_s, 0.411);
        assert!(report.per_hop.iter().any(|h| !h.viable));
    }

    #[test]
    fn hop_count_always_matches_route_length() {
        let tree = build_reference_chain();
        for node in &tree.nodes {
            let report =
                deliver::<rand::rngs::StdRng>(&tree, node.id, 50, &models(), None).unwrap();
            let path = route_to_root(&tree, node.id).unwrap();
            assert_eq!(report.hops as usize, path.len() - 1);
            assert_eq!(report.hops, node.depth);
        }
    }

    #[test]
    fn build_is_deterministic() {
        let (zc, nodes) = reference_chain_layout();
        let a = build_tree(
            zc,
            &nodes,
            TreeParams::default(),
            &models().pathloss,
            &models().policy,
            Topology::Tree,
        )
        .unwrap();
        let b = build_tree(
            zc,
            &nodes,
            TreeParams::default(),
            &models().pathloss,
            &models().policy,
            Topology::Tree,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tree_json_lists_all_nodes() {
        let tree = build_reference_chain();
        let json = tree.to_json();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["nodes"].as_array().unwrap().len(), 6);
        assert_eq!(parsed["nodes"][0]["role"], "Coordinator");
    }

    #[test]
    fn full_latency_matrix_matches_anchor_table_on_reference_chain() {
        let tree = build_reference_chain();
        // Depth 1, 2, 3 nodes exist: ids 1, 2, 3.
        let expected = [
            (NodeId(1), [(10, 0.048), (50, 0.090), (100, 0.114)]),
            (NodeId(2), [(10, 0.082), (50, 0.120), (100, 0.200)]),
            (NodeId(3), [(10, 0.115), (50, 0.224), (100, 0.411)]),
        ];
        for (id, rows) in expected {
            for (bytes, secs) in rows {
                let report =
                    deliver::<rand::rngs::StdRng>(&tree, id, bytes, &models(), None).unwrap();
                assert_eq!(report.total_latency_s, secs, "node {id} bytes {bytes}");
            }
        }
    }
}
