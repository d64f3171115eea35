//! The acquisition DAG.
//!
//! Nodes are states of information. Each node is identified by the set of
//! acquisition *units* taken so far; a unit is either a single raw sensor
//! (full DAG) or a selected sensor subset treated as one super-sensor
//! (union DAG). Every node carries the raw sensors it has acquired, which is
//! what edge costs and classifiers are defined over. The stop-and-classify
//! sink is implicit: it is the target of every [`Transition::Classify`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::SensorSubset;

/// Largest sensor count for which the exhaustive DAG is built.
pub const DEFAULT_NODE_CAP: usize = 12;
/// Largest number of selected subsets accepted by the union DAG.
pub const MAX_UNION_SUBSETS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    /// Stop and classify with the sensors acquired so far.
    Classify,
    /// Acquire unit `unit`, moving to node `to`.
    Acquire { unit: usize, to: NodeId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DagKind {
    Full,
    Union,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagNode {
    /// Acquired units (width = number of units).
    pub units: SensorSubset,
    /// Acquired raw sensors (width = number of raw sensors).
    pub sensors: SensorSubset,
    /// Outgoing edges in action order: `Classify` first, then acquisitions by unit index.
    pub transitions: Vec<Transition>,
}

/// Serialized form: the DAG is fully determined by its kind and units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct DagRecord {
    kind: DagKind,
    units: Vec<SensorSubset>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DagRecord", into = "DagRecord")]
pub struct AcquisitionDag {
    kind: DagKind,
    units: Vec<SensorSubset>,
    nodes: Vec<DagNode>,
    edge_offsets: Vec<usize>,
    edges: Vec<(NodeId, Transition)>,
    incoming: Vec<Vec<EdgeId>>,
    by_mask: HashMap<u64, NodeId>,
}

impl From<AcquisitionDag> for DagRecord {
    fn from(dag: AcquisitionDag) -> Self {
        DagRecord {
            kind: dag.kind,
            units: dag.units,
        }
    }
}

impl TryFrom<DagRecord> for AcquisitionDag {
    type Error = Error;

    fn try_from(r: DagRecord) -> Result<Self> {
        match r.kind {
            DagKind::Full => {
                let m = r.units.len();
                let dag = build_full_dag_capped(m, m.max(DEFAULT_NODE_CAP))?;
                if dag.units != r.units {
                    return Err(Error::InvalidStructure(
                        "full DAG units are not singletons".into(),
                    ));
                }
                Ok(dag)
            }
            DagKind::Union => build_union_dag(&r.units),
        }
    }
}

/// Exhaustive DAG over all subsets of `num_sensors` sensors, capped at [`DEFAULT_NODE_CAP`].
pub fn build_full_dag(num_sensors: usize) -> Result<AcquisitionDag> {
    build_full_dag_capped(num_sensors, DEFAULT_NODE_CAP)
}

pub fn build_full_dag_capped(num_sensors: usize, cap: usize) -> Result<AcquisitionDag> {
    if num_sensors == 0 {
        return Err(Error::Config("a DAG needs at least one sensor".into()));
    }
    if num_sensors > cap {
        return Err(Error::Capacity {
            sensors: num_sensors,
            cap,
        });
    }
    let units = (0..num_sensors)
        .map(|m| SensorSubset::from_ids(num_sensors, [m]))
        .collect();
    Ok(AcquisitionDag::from_units(DagKind::Full, units))
}

/// DAG over all unions of the given sensor subsets, each acquired as one unit.
pub fn build_union_dag(subsets: &[SensorSubset]) -> Result<AcquisitionDag> {
    if subsets.is_empty() || subsets.len() > MAX_UNION_SUBSETS {
        return Err(Error::Config(format!(
            "union DAG takes 1..={MAX_UNION_SUBSETS} subsets, got {}",
            subsets.len()
        )));
    }
    let width = subsets[0].width();
    if subsets.iter().any(|s| s.width() != width) {
        return Err(Error::Config("subsets disagree on sensor count".into()));
    }
    Ok(AcquisitionDag::from_units(DagKind::Union, subsets.to_vec()))
}

impl AcquisitionDag {
    fn from_units(kind: DagKind, units: Vec<SensorSubset>) -> Self {
        let t = units.len();
        let raw_width = units[0].width();
        let states = SensorSubset::enumerate_all(t);
        let by_mask: HashMap<u64, NodeId> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.low_mask(), NodeId(i)))
            .collect();

        let mut nodes = Vec::with_capacity(states.len());
        for state in &states {
            let sensors = state
                .iter()
                .fold(SensorSubset::empty(raw_width), |acc, u| acc.union(&units[u]));
            let mut transitions = vec![Transition::Classify];
            for unit in (0..t).filter(|&u| !state.contains(u)) {
                let to = by_mask[&state.with(unit).low_mask()];
                transitions.push(Transition::Acquire { unit, to });
            }
            nodes.push(DagNode {
                units: state.clone(),
                sensors,
                transitions,
            });
        }

        let mut dag = AcquisitionDag {
            kind,
            units,
            nodes,
            edge_offsets: Vec::new(),
            edges: Vec::new(),
            incoming: Vec::new(),
            by_mask,
        };
        dag.index_edges();
        dag
    }

    fn index_edges(&mut self) {
        self.edge_offsets.clear();
        self.edges.clear();
        self.incoming = vec![Vec::new(); self.nodes.len()];
        for (j, node) in self.nodes.iter().enumerate() {
            self.edge_offsets.push(self.edges.len());
            for &tr in &node.transitions {
                if let Transition::Acquire { to, .. } = tr {
                    self.incoming[to.0].push(EdgeId(self.edges.len()));
                }
                self.edges.push((NodeId(j), tr));
            }
        }
        self.edge_offsets.push(self.edges.len());
    }

    pub fn kind(&self) -> DagKind {
        self.kind
    }

    /// Raw sensor sets of the acquisition units.
    pub fn units(&self) -> &[SensorSubset] {
        &self.units
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    pub fn num_sensors(&self) -> usize {
        self.units[0].width()
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &DagNode {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn transitions(&self, id: NodeId) -> &[Transition] {
        &self.nodes[id.0].transitions
    }

    pub fn node_by_units(&self, units: &SensorSubset) -> Option<NodeId> {
        self.by_mask.get(&units.low_mask()).copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> (NodeId, Transition) {
        self.edges[e.0]
    }

    pub fn edge_id(&self, node: NodeId, action: usize) -> EdgeId {
        debug_assert!(action < self.nodes[node.0].transitions.len());
        EdgeId(self.edge_offsets[node.0] + action)
    }

    /// Outgoing edge ids of `node`, in action order.
    pub fn out_edges(&self, node: NodeId) -> impl Iterator<Item = EdgeId> {
        (self.edge_offsets[node.0]..self.edge_offsets[node.0 + 1]).map(EdgeId)
    }

    /// Acquisition edges ending at `node`.
    pub fn incoming(&self, node: NodeId) -> &[EdgeId] {
        &self.incoming[node.0]
    }

    pub fn num_acquisition_edges(&self) -> usize {
        self.edges
            .iter()
            .filter(|(_, t)| matches!(t, Transition::Acquire { .. }))
            .count()
    }

    pub fn num_classify_edges(&self) -> usize {
        self.edges.len() - self.num_acquisition_edges()
    }

    /// Distinct raw sensor sets over all nodes, in node order.
    pub fn distinct_sensor_sets(&self) -> Vec<SensorSubset> {
        let mut seen = std::collections::HashSet::new();
        self.nodes
            .iter()
            .filter(|n| seen.insert(n.sensors.clone()))
            .map(|n| n.sensors.clone())
            .collect()
    }

    /// Checks the structural invariants: acquisition edges strictly grow the unit set,
    /// every node can classify, and the all-units node can only classify.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidStructure("DAG has no nodes".into()));
        }
        if !self.nodes[0].units.is_empty() {
            return Err(Error::InvalidStructure("root is not the empty subset".into()));
        }
        for (j, node) in self.nodes.iter().enumerate() {
            let classify = node
                .transitions
                .iter()
                .filter(|t| matches!(t, Transition::Classify))
                .count();
            if classify != 1 {
                return Err(Error::InvalidStructure(format!(
                    "node {j} has {classify} classify edges"
                )));
            }
            for tr in &node.transitions {
                if let Transition::Acquire { to, .. } = *tr {
                    let target = self.nodes.get(to.0).ok_or_else(|| {
                        Error::InvalidStructure(format!("node {j} points at missing node {}", to.0))
                    })?;
                    if target.units.len() <= node.units.len() || !node.units.is_subset(&target.units) {
                        return Err(Error::InvalidStructure(format!(
                            "edge {j} -> {} does not grow the acquired set",
                            to.0
                        )));
                    }
                }
            }
            if node.units.len() == self.units.len() && node.transitions.len() != 1 {
                return Err(Error::InvalidStructure(
                    "the all-units node must only classify".into(),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_sensor_dag_shape() {
        let dag = build_full_dag(3).unwrap();
        assert_eq!(dag.len(), 8);
        assert_eq!(dag.num_acquisition_edges(), 12);
        assert_eq!(dag.num_classify_edges(), 8);
        dag.validate().unwrap();
        let full = dag.node(NodeId(7));
        assert_eq!(full.sensors, SensorSubset::full(3));
        assert_eq!(full.transitions, vec![Transition::Classify]);
    }

    #[test]
    fn single_sensor_dag() {
        let dag = build_full_dag(1).unwrap();
        assert_eq!(dag.len(), 2);
        assert_eq!(
            dag.transitions(dag.root()),
            &[
                Transition::Classify,
                Transition::Acquire {
                    unit: 0,
                    to: NodeId(1)
                }
            ]
        );
        assert_eq!(dag.transitions(NodeId(1)), &[Transition::Classify]);
        assert_eq!(dag.num_edges(), 3);
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            build_full_dag(13),
            Err(Error::Capacity { sensors: 13, cap: 12 })
        ));
        assert!(build_full_dag(12).is_ok());
        assert!(build_full_dag(0).is_err());
    }

    #[test]
    fn node_numbering_is_cardinality_then_mask() {
        let dag = build_full_dag(3).unwrap();
        let masks: Vec<u64> = dag.nodes().iter().map(|n| n.units.low_mask()).collect();
        assert_eq!(masks, vec![0, 1, 2, 4, 3, 5, 6, 7]);
    }

    #[test]
    fn acquisition_edges_differ_by_one_sensor() {
        let dag = build_full_dag(4).unwrap();
        for j in dag.node_ids() {
            for tr in dag.transitions(j) {
                if let Transition::Acquire { to, .. } = *tr {
                    let added = dag.node(to).sensors.difference(&dag.node(j).sensors);
                    assert_eq!(added.len(), 1);
                }
            }
        }
    }

    #[test]
    fn union_dag_over_overlapping_subsets() {
        let s = vec![
            SensorSubset::from_ids(4, [0, 1]),
            SensorSubset::from_ids(4, [1, 2]),
            SensorSubset::from_ids(4, [3]),
        ];
        let dag = build_union_dag(&s).unwrap();
        assert_eq!(dag.len(), 8);
        dag.validate().unwrap();
        let both = dag
            .node_by_units(&SensorSubset::from_ids(3, [0, 1]))
            .unwrap();
        assert_eq!(dag.node(both).sensors, SensorSubset::from_ids(4, [0, 1, 2]));
    }

    #[test]
    fn union_dag_size_limits() {
        assert!(build_union_dag(&[]).is_err());
        let nine: Vec<_> = (0..9).map(|i| SensorSubset::from_ids(9, [i])).collect();
        assert!(build_union_dag(&nine).is_err());
        let one = build_union_dag(&[SensorSubset::from_ids(5, [1, 3])]).unwrap();
        assert_eq!(one.len(), 2);
        assert_eq!(one.num_edges(), 3);
    }

    #[test]
    fn serde_rebuilds_indexes() {
        let s = vec![SensorSubset::from_ids(4, [0, 1]), SensorSubset::from_ids(4, [1, 3])];
        let dag = build_union_dag(&s).unwrap();
        let text = serde_json::to_string(&dag).unwrap();
        let back: AcquisitionDag = serde_json::from_str(&text).unwrap();
        assert_eq!(back, dag);
        let full = build_full_dag(3).unwrap();
        let back: AcquisitionDag =
            serde_json::from_str(&serde_json::to_string(&full).unwrap()).unwrap();
        assert_eq!(back, full);
    }

    #[test]
    fn incoming_edges_are_indexed() {
        let dag = build_full_dag(3).unwrap();
        let full = NodeId(7);
        assert_eq!(dag.incoming(full).len(), 3);
        assert!(dag.incoming(dag.root()).is_empty());
        for &e in dag.incoming(full) {
            let (_, tr) = dag.edge(e);
            assert!(matches!(tr, Transition::Acquire { to, .. } if to == full));
        }
    }
}
