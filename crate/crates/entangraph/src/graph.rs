//! Symbolic entanglement graphs with virtual nodes.
//!
//! Labeled nodes stand for parties; an entangled pair is a solid edge and a
//! k ≥ 3 entangled subset is an unlabeled *virtual* node joined by solid
//! edges to its k members. Three rules govern the calculus:
//!
//! 1. virtual nodes only join labeled nodes — two virtual nodes are never
//!    adjacent, and dashed (virtual-style) edges also join labeled nodes
//!    only;
//! 2. a virtual node is redundant, and must go, when its labeled neighbors
//!    are already chained among themselves by solid edges;
//! 3. tracing out a labeled node deletes the node, its edges, and every
//!    virtual node attached to it (releasing that hub's other members).
//!
//! On top of the static rules sit the protocol moves: a dashed edge marks a
//! pending Bell pairing, measurement turns it solid and carves the pair out
//! of the channel, and node statuses (channel / source / potential /
//! received) track who may still end up holding the teleported state.
//!
//! Graphs are value types: `add_*` builders mutate during construction,
//! while every calculus operation takes `&self` and returns a new graph,
//! so concurrent readers are safe. The representation is canonical by
//! construction (ordered maps and sets, hubs keyed by their sorted
//! neighborhoods), so derived `Eq` is canonical-form equality and DOT/JSON
//! output is byte-reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::analyzer::{EntPolynomial, Monomial};
use crate::error::{Error, Result};
use crate::tensor::Label;

/// Role of a labeled node in the current protocol stage.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NodeStatus {
    /// Red: a party of the entangled channel (or a measured-out qubit).
    Channel,
    /// Green: the qubit whose state is being sent.
    Source,
    /// Green in a red circle: may still acquire the teleported state.
    Potential,
    /// Green: holds the teleported state.
    Received,
}

impl NodeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeStatus::Channel => "channel",
            NodeStatus::Source => "source",
            NodeStatus::Potential => "potential",
            NodeStatus::Received => "received",
        }
    }
}

fn ordered(x: Label, y: Label) -> (Label, Label) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Labeled/virtual node graph with solid and dashed edges.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct EntGraph {
    labeled: BTreeMap<Label, NodeStatus>,
    solid: BTreeSet<(Label, Label)>,
    dashed: BTreeSet<(Label, Label)>,
    hubs: BTreeSet<Vec<Label>>,
}

impl EntGraph {
    pub fn new() -> Self {
        EntGraph::default()
    }

    pub fn is_empty(&self) -> bool {
        self.labeled.is_empty()
    }

    pub fn contains(&self, label: Label) -> bool {
        self.labeled.contains_key(&label)
    }

    pub fn status(&self, label: Label) -> Option<NodeStatus> {
        self.labeled.get(&label).copied()
    }

    pub fn labeled_nodes(&self) -> impl Iterator<Item = (Label, NodeStatus)> + '_ {
        self.labeled.iter().map(|(&l, &s)| (l, s))
    }

    pub fn solid_edges(&self) -> impl Iterator<Item = (Label, Label)> + '_ {
        self.solid.iter().copied()
    }

    pub fn dashed_edges(&self) -> impl Iterator<Item = (Label, Label)> + '_ {
        self.dashed.iter().copied()
    }

    /// Virtual nodes, each given by its sorted labeled neighborhood.
    pub fn hubs(&self) -> impl Iterator<Item = &[Label]> {
        self.hubs.iter().map(|h| h.as_slice())
    }

    pub fn add_labeled(&mut self, label: Label, status: NodeStatus) -> Result<()> {
        if self.labeled.contains_key(&label) {
            return Err(Error::Argument(format!("node `{label}` already present")));
        }
        self.labeled.insert(label, status);
        Ok(())
    }

    pub fn set_status(&mut self, label: Label, status: NodeStatus) -> Result<()> {
        match self.labeled.get_mut(&label) {
            Some(s) => {
                *s = status;
                Ok(())
            }
            None => Err(Error::UnknownLabel(label)),
        }
    }

    /// Add a solid edge between two labeled nodes (idempotent).
    pub fn add_solid_edge(&mut self, x: Label, y: Label) -> Result<()> {
        self.check_edge_endpoints(x, y)?;
        self.solid.insert(ordered(x, y));
        Ok(())
    }

    /// Add a dashed (virtual-style) edge between two labeled nodes.
    pub fn add_dashed_edge(&mut self, x: Label, y: Label) -> Result<()> {
        self.check_edge_endpoints(x, y)?;
        self.dashed.insert(ordered(x, y));
        Ok(())
    }

    fn check_edge_endpoints(&self, x: Label, y: Label) -> Result<()> {
        if x == y {
            return Err(Error::Argument(format!("self-edge on `{x}`")));
        }
        for l in [x, y] {
            if !self.labeled.contains_key(&l) {
                return Err(Error::UnknownLabel(l));
            }
        }
        Ok(())
    }

    /// Add a virtual node joined to ≥ 3 labeled members.
    pub fn add_hub(&mut self, members: &[Label]) -> Result<()> {
        let set: BTreeSet<Label> = members.iter().copied().collect();
        if set.len() < 3 {
            return Err(Error::Argument(
                "a virtual node joins at least three parties".into(),
            ));
        }
        for &l in &set {
            if !self.labeled.contains_key(&l) {
                return Err(Error::UnknownLabel(l));
            }
        }
        self.hubs.insert(set.into_iter().collect());
        Ok(())
    }

    fn hub_memberships(&self, x: Label) -> Vec<Vec<Label>> {
        self.hubs
            .iter()
            .filter(|h| h.contains(&x))
            .cloned()
            .collect()
    }

    fn has_entanglement_bond(&self, x: Label) -> bool {
        self.solid.iter().any(|&(a, b)| a == x || b == x)
            || self.hubs.iter().any(|h| h.contains(&x))
    }

    fn has_any_bond(&self, x: Label) -> bool {
        self.has_entanglement_bond(x) || self.dashed.iter().any(|&(a, b)| a == x || b == x)
    }

    /// Build the graph of a polynomial: one labeled node per variable, a
    /// solid edge per pair monomial, a virtual node per k ≥ 3 monomial —
    /// followed by redundant-virtual removal.
    pub fn from_polynomial(
        polynomial: &EntPolynomial,
        statuses: &BTreeMap<Label, NodeStatus>,
    ) -> Result<EntGraph> {
        let mut graph = EntGraph::new();
        for label in polynomial.variables() {
            let status = statuses
                .get(&label)
                .copied()
                .ok_or_else(|| Error::Argument(format!("no status given for `{label}`")))?;
            graph.add_labeled(label, status)?;
        }
        for monomial in polynomial.monomials() {
            let members = monomial.labels();
            match members.len() {
                0 | 1 => {
                    return Err(Error::Argument(
                        "monomial with fewer than two parties".into(),
                    ))
                }
                2 => graph.add_solid_edge(members[0], members[1])?,
                _ => graph.add_hub(&members)?,
            }
        }
        Ok(graph.remove_redundant_virtuals())
    }

    /// Read the polynomial back: one pair monomial per solid labeled–labeled
    /// edge plus one k-monomial per virtual node. Dashed edges do not count.
    pub fn to_polynomial(&self) -> EntPolynomial {
        let mut monomials = Vec::new();
        for &(x, y) in &self.solid {
            monomials.push(Monomial::new([x, y]).expect("edge has two parties"));
        }
        for hub in &self.hubs {
            monomials.push(Monomial::new(hub.iter().copied()).expect("hub has ≥ 3 parties"));
        }
        EntPolynomial::from_monomials(monomials)
    }

    /// Is the induced subgraph on `members` (solid labeled–labeled edges
    /// only) connected? This is the "chained among themselves" test.
    fn neighborhood_chained(&self, members: &[Label]) -> bool {
        if members.len() <= 1 {
            return true;
        }
        let set: BTreeSet<Label> = members.iter().copied().collect();
        let mut reached: BTreeSet<Label> = BTreeSet::new();
        let mut frontier = vec![members[0]];
        reached.insert(members[0]);
        while let Some(node) = frontier.pop() {
            for &(a, b) in &self.solid {
                let other = if a == node {
                    b
                } else if b == node {
                    a
                } else {
                    continue;
                };
                if set.contains(&other) && reached.insert(other) {
                    frontier.push(other);
                }
            }
        }
        reached.len() == set.len()
    }

    /// Delete every virtual node whose labeled neighbors are mutually
    /// chained by solid edges, repeating to a fixpoint. Removals never
    /// change the solid edge set, so the result is order-independent.
    pub fn remove_redundant_virtuals(&self) -> EntGraph {
        let mut graph = self.clone();
        loop {
            let redundant: Vec<Vec<Label>> = graph
                .hubs
                .iter()
                .filter(|h| graph.neighborhood_chained(h))
                .cloned()
                .collect();
            if redundant.is_empty() {
                return graph;
            }
            for hub in redundant {
                graph.hubs.remove(&hub);
            }
        }
    }

    /// Trace out a labeled node: the node, its edges, and every virtual node
    /// attached to it disappear (releasing those hubs' other members).
    pub fn remove_labeled_node(&self, x: Label) -> Result<EntGraph> {
        if !self.labeled.contains_key(&x) {
            return Err(Error::UnknownLabel(x));
        }
        let mut graph = self.clone();
        graph.labeled.remove(&x);
        graph.solid.retain(|&(a, b)| a != x && b != x);
        graph.dashed.retain(|&(a, b)| a != x && b != x);
        graph.hubs.retain(|h| !h.contains(&x));
        Ok(graph)
    }

    /// Prepare the source–channel Bell pairing: a dashed edge from the
    /// source qubit `x` to channel member `y`; `x` joins the measurement
    /// pair (turning red) and every other channel member becomes a
    /// potential receiver.
    pub fn bind_virtual_pair(&self, x: Label, y: Label) -> Result<EntGraph> {
        match self.status(x) {
            Some(NodeStatus::Source) => {}
            Some(other) => {
                return Err(Error::Contract(format!(
                    "`{x}` must be the source qubit, found status {}",
                    other.as_str()
                )))
            }
            None => return Err(Error::UnknownLabel(x)),
        }
        match self.status(y) {
            Some(NodeStatus::Channel) => {}
            Some(other) => {
                return Err(Error::Contract(format!(
                    "`{y}` must be a channel member, found status {}",
                    other.as_str()
                )))
            }
            None => return Err(Error::UnknownLabel(y)),
        }
        let mut graph = self.clone();
        let others: Vec<Label> = graph
            .labeled
            .iter()
            .filter(|&(&l, &s)| s == NodeStatus::Channel && l != y)
            .map(|(&l, _)| l)
            .collect();
        for l in others {
            graph.set_status(l, NodeStatus::Potential)?;
        }
        graph.set_status(x, NodeStatus::Channel)?;
        graph.add_dashed_edge(x, y)?;
        Ok(graph)
    }

    /// Mark two potential channel members as the next reduced-Bell pair:
    /// they lose their potentiality (turning red) and get a dashed bond.
    pub fn group_channel_pair(&self, x: Label, y: Label) -> Result<EntGraph> {
        for l in [x, y] {
            match self.status(l) {
                Some(NodeStatus::Potential) => {}
                Some(other) => {
                    return Err(Error::Contract(format!(
                        "`{l}` must be a potential receiver, found status {}",
                        other.as_str()
                    )))
                }
                None => return Err(Error::UnknownLabel(l)),
            }
        }
        let mut graph = self.clone();
        graph.set_status(x, NodeStatus::Channel)?;
        graph.set_status(y, NodeStatus::Channel)?;
        graph.add_dashed_edge(x, y)?;
        Ok(graph)
    }

    /// Detach `x` from the channel structure: its solid edges (except to an
    /// optional `keep` partner) are removed, and every hub containing it
    /// shrinks — a hub left with two members collapses into a direct solid
    /// edge, a hub left with fewer disappears.
    fn detach_bonds(&mut self, x: Label, keep: Option<Label>) {
        self.solid.retain(|&(a, b)| {
            if a != x && b != x {
                return true;
            }
            let other = if a == x { b } else { a };
            keep == Some(other)
        });
        for hub in self.hub_memberships(x) {
            self.hubs.remove(&hub);
            let rest: Vec<Label> = hub.into_iter().filter(|&l| l != x).collect();
            match rest.len() {
                0 | 1 => {}
                2 => {
                    self.solid.insert(ordered(rest[0], rest[1]));
                }
                _ => {
                    self.hubs.insert(rest);
                }
            }
        }
    }

    /// A potential receiver left with no bonds at all now holds the state.
    fn promote_released(&mut self) {
        let released: Vec<Label> = self
            .labeled
            .iter()
            .filter(|&(&l, &s)| s == NodeStatus::Potential && !self.has_any_bond(l))
            .map(|(&l, _)| l)
            .collect();
        for l in released {
            self.labeled.insert(l, NodeStatus::Received);
        }
    }

    /// Measure a pending pair: the dashed edge x–y becomes solid, both
    /// endpoints leave the channel structure (hub shrink / edge removal),
    /// and any potential receiver released by the split becomes `received`.
    ///
    /// Unlike [`EntGraph::remove_labeled_node`], which models tracing a party out,
    /// this keeps the remaining parties entangled with each other.
    pub fn finalize_measurement(&self, x: Label, y: Label) -> Result<EntGraph> {
        if !self.dashed.contains(&ordered(x, y)) {
            return Err(Error::Contract(format!(
                "no pending dashed edge between `{x}` and `{y}`"
            )));
        }
        let mut graph = self.clone();
        graph.dashed.remove(&ordered(x, y));
        graph.detach_bonds(x, Some(y));
        graph.detach_bonds(y, Some(x));
        graph.solid.insert(ordered(x, y));
        graph.set_status(x, NodeStatus::Channel)?;
        graph.set_status(y, NodeStatus::Channel)?;
        graph.promote_released();
        Ok(graph)
    }

    /// Split a single qubit off the channel after a rotated-basis
    /// measurement: it keeps standing as an isolated red node, the structure
    /// it leaves shrinks, and a freed potential receiver is promoted.
    pub fn release_node(&self, x: Label) -> Result<EntGraph> {
        if !self.labeled.contains_key(&x) {
            return Err(Error::UnknownLabel(x));
        }
        let mut graph = self.clone();
        graph.detach_bonds(x, None);
        graph.dashed.retain(|&(a, b)| a != x && b != x);
        graph.set_status(x, NodeStatus::Channel)?;
        graph.promote_released();
        Ok(graph)
    }

    /// Virtual node ids `v0`, `v1`, … in canonical (sorted-neighborhood)
    /// order.
    fn hub_ids(&self) -> Vec<(String, &Vec<Label>)> {
        self.hubs
            .iter()
            .enumerate()
            .map(|(i, h)| (format!("v{i}"), h))
            .collect()
    }

    /// Deterministic DOT rendering: labeled nodes as filled circles (red for
    /// channel, green for source/received, green with a doubled red border
    /// for potential), virtual nodes as small blue points, dashed edges
    /// dashed.
    pub fn to_dot(&self) -> String {
        if self.labeled.is_empty() && self.hubs.is_empty() {
            return "graph G { }\n".into();
        }
        let mut out = String::from("graph G {\n");
        out.push_str("  node [shape=circle, style=filled];\n");
        for (&label, &status) in &self.labeled {
            let attrs = match status {
                NodeStatus::Channel => "fillcolor=red",
                NodeStatus::Source => "fillcolor=green",
                NodeStatus::Potential => "fillcolor=green, color=red, peripheries=2",
                NodeStatus::Received => "fillcolor=green",
            };
            let _ = writeln!(out, "  \"{label}\" [{attrs}];");
        }
        let hubs = self.hub_ids();
        for (id, _) in &hubs {
            let _ = writeln!(out, "  \"{id}\" [shape=point, color=blue, width=0.1];");
        }
        for &(x, y) in &self.solid {
            let _ = writeln!(out, "  \"{x}\" -- \"{y}\";");
        }
        for (id, members) in &hubs {
            for l in members.iter() {
                let _ = writeln!(out, "  \"{l}\" -- \"{id}\";");
            }
        }
        for &(x, y) in &self.dashed {
            let _ = writeln!(out, "  \"{x}\" -- \"{y}\" [style=dashed];");
        }
        out.push_str("}\n");
        out
    }

    /// JSON value with sorted keys:
    /// `{edges:[{a,b,style}], nodes:[{id,kind,label?,status?}]}`.
    pub fn to_json_value(&self) -> Value {
        let mut nodes: Vec<Value> = Vec::new();
        for (&label, &status) in &self.labeled {
            nodes.push(json!({
                "id": label.to_string(),
                "kind": "labeled",
                "label": label.to_string(),
                "status": status.as_str(),
            }));
        }
        let hubs = self.hub_ids();
        for (id, _) in &hubs {
            nodes.push(json!({ "id": id, "kind": "virtual" }));
        }
        let mut edges: Vec<Value> = Vec::new();
        for &(x, y) in &self.solid {
            edges.push(json!({ "a": x.to_string(), "b": y.to_string(), "style": "solid" }));
        }
        for (id, members) in &hubs {
            for l in members.iter() {
                edges.push(json!({ "a": l.to_string(), "b": id, "style": "solid" }));
            }
        }
        for &(x, y) in &self.dashed {
            edges.push(json!({ "a": x.to_string(), "b": y.to_string(), "style": "dashed" }));
        }
        json!({ "edges": edges, "nodes": nodes })
    }

    /// Pretty-printed, newline-terminated JSON text.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value())
            .expect("graph JSON never fails to serialize");
        s.push('\n');
        s
    }
}
