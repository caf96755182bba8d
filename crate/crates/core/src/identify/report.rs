//! Identification results and their JSON and text views.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cyclefind::CycleClass;
use crate::fastp::syntax::{rendered_size, serialize_fastp, serialize_fastp_dag, TREE_RENDER_LIMIT};
use crate::fastp::Fastp;
use crate::model::NodeId;
use crate::rank::EdgeRank;

#[derive(Clone, Debug)]
pub enum Status {
    Identifiable(Fastp),
    /// Both roots of the cycle quadratic; `+√s` first.
    TwoIdentifiable(Fastp, Fastp),
    Unidentifiable,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Identifiable(_) => "identifiable",
            Status::TwoIdentifiable(..) => "two_identifiable",
            Status::Unidentifiable => "unidentifiable",
        }
    }

    pub fn fastps(&self) -> Vec<&Fastp> {
        match self {
            Status::Identifiable(f) => vec![f],
            Status::TwoIdentifiable(a, b) => vec![a, b],
            Status::Unidentifiable => vec![],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    RootEdge,
    Rank1,
    Propagation,
    Cycle,
}

#[derive(Clone, Debug)]
pub struct NodeResult {
    pub node: NodeId,
    pub parent: NodeId,
    pub status: Status,
    pub provenance: Option<Provenance>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentInfo {
    pub nodes: Vec<NodeId>,
    pub marked: Vec<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<NodeId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_class: Option<CycleClass>,
    pub status: &'static str,
}

#[derive(Clone, Debug)]
pub struct IdentReport {
    /// One entry per non-root node, ascending.
    pub nodes: Vec<NodeResult>,
    pub edge_ranks: Vec<EdgeRank>,
    pub rank1_marks: Vec<NodeId>,
    pub components: Vec<ComponentInfo>,
    pub notes: Vec<String>,
    pub anomalies: Vec<String>,
    pub seed: u64,
    pub prime: u64,
    pub error_target: f64,
    pub error_spent: f64,
    pub pit_tests: u64,
}

#[derive(Serialize)]
struct NodeJson<'a> {
    node: NodeId,
    parent: NodeId,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    fastp: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fastp_pair: Option<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fastp_dag: Option<Vec<Vec<String>>>,
    provenance: Option<&'a Provenance>,
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    seed: u64,
    prime: u64,
    error_target: f64,
    error_spent: f64,
    pit_tests: u64,
    edge_ranks: &'a [EdgeRank],
    rank1_marks: &'a [NodeId],
    components: &'a [ComponentInfo],
    notes: &'a [String],
    anomalies: &'a [String],
}

#[derive(Serialize)]
struct ReportJson<'a> {
    nodes: Vec<NodeJson<'a>>,
    diagnostics: Diagnostics<'a>,
}

fn small(f: &Fastp) -> bool {
    rendered_size(f) <= TREE_RENDER_LIMIT
}

impl IdentReport {
    pub fn node(&self, v: NodeId) -> Option<&NodeResult> {
        self.nodes.iter().find(|n| n.node == v)
    }

    fn json_value(&self) -> ReportJson<'_> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let fs = n.status.fastps();
                let fits = fs.iter().all(|f| small(f));
                let mut j = NodeJson {
                    node: n.node,
                    parent: n.parent,
                    status: n.status.name(),
                    fastp: None,
                    fastp_pair: None,
                    fastp_dag: None,
                    provenance: n.provenance.as_ref(),
                };
                if !fits {
                    j.fastp_dag = Some(fs.iter().map(|f| serialize_fastp_dag(f)).collect());
                } else if let [a, b] = fs[..] {
                    j.fastp_pair = Some([serialize_fastp(a), serialize_fastp(b)]);
                } else if let [a] = fs[..] {
                    j.fastp = Some(serialize_fastp(a));
                }
                j
            })
            .collect();
        ReportJson {
            nodes,
            diagnostics: Diagnostics {
                seed: self.seed,
                prime: self.prime,
                error_target: self.error_target,
                error_spent: self.error_spent,
                pit_tests: self.pit_tests,
                edge_ranks: &self.edge_ranks,
                rank1_marks: &self.rank1_marks,
                components: &self.components,
                notes: &self.notes,
                anomalies: &self.anomalies,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.json_value()).expect("report serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.json_value()).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let prov = n
                .provenance
                .map(|p| format!(" [{}]", serde_json::to_value(p).unwrap().as_str().unwrap_or("")))
                .unwrap_or_default();
            let _ = write!(out, "λ[{},{}]: {}", n.parent, n.node, n.status.name());
            for (k, f) in n.status.fastps().iter().enumerate() {
                let text = if small(f) {
                    serialize_fastp(f)
                } else {
                    format!("<{} DAG lines>", serialize_fastp_dag(f).len())
                };
                let _ = write!(out, "{} {text}", if k == 0 { " =" } else { " or" });
            }
            let _ = writeln!(out, "{prov}");
        }
        for c in &self.components {
            let _ = write!(out, "component {:?}: {}", c.nodes, c.status);
            if let Some(cy) = &c.cycle {
                let _ = write!(out, ", cycle {cy:?}");
            }
            if let Some(cl) = &c.cycle_class {
                let _ = write!(out, " ({cl:?})");
            }
            let _ = writeln!(out);
        }
        for a in &self.anomalies {
            let _ = writeln!(out, "anomaly: {a}");
        }
        let _ = writeln!(
            out,
            "seed {}, {} identity tests, error bound {:e}",
            self.seed, self.pit_tests, self.error_spent
        );
        out
    }
}
