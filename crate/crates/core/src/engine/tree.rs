use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::calculus::Rule;
use crate::syntax::{print, Formula};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Interior,
    Closed,
    /// Leaf of an open, fully expanded branch.
    Saturated,
    /// Leaf of a branch still open when the search stopped.
    Pending,
}

#[derive(Clone, Debug)]
pub struct ProofNode {
    pub id: usize,
    /// `None` for the root.
    pub rule: Option<Rule>,
    /// Nodes that introduced the premises, paired with the premise formulas.
    pub premises: Vec<(usize, Formula)>,
    pub formulas_added: Vec<Formula>,
    pub children: Vec<usize>,
    pub status: NodeStatus,
}

impl ProofNode {
    pub fn closure(&self) -> Option<Rule> {
        self.rule.filter(|r| r.is_closure())
    }
}

#[derive(Clone, Debug)]
pub struct ProofTree {
    pub nodes: Vec<ProofNode>,
}

impl ProofTree {
    pub fn root(&self) -> &ProofNode {
        &self.nodes[0]
    }

    pub fn is_closed(&self) -> bool {
        self.nodes.iter().all(|n| !n.children.is_empty() || n.status == NodeStatus::Closed)
    }

    /// Formulas on the path from the root to `leaf`.
    pub fn branch_formulas(&self, leaf: usize) -> Vec<Formula> {
        let mut parent = vec![usize::MAX; self.nodes.len()];
        for n in &self.nodes {
            for &c in &n.children {
                parent[c] = n.id;
            }
        }
        let mut path = vec![leaf];
        while parent[*path.last().unwrap()] != usize::MAX {
            path.push(parent[*path.last().unwrap()]);
        }
        let mut out: Vec<Formula> = Vec::new();
        for &i in path.iter().rev() {
            for f in &self.nodes[i].formulas_added {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        self.node_json(0)
    }

    fn node_json(&self, id: usize) -> Value {
        let n = &self.nodes[id];
        let mut v = json!({
            "id": n.id,
            "formulas_added": n.formulas_added.iter().map(print).collect::<Vec<_>>(),
            "rule": n.rule.map(|r| r.name()).unwrap_or("root"),
            "premises": n.premises.iter().map(|p| p.0).collect::<Vec<_>>(),
            "premise_formulas": n.premises.iter().map(|p| print(&p.1)).collect::<Vec<_>>(),
            "children": n.children.iter().map(|&c| self.node_json(c)).collect::<Vec<_>>(),
        });
        if let Some(r) = n.closure() {
            v["closure"] = json!(r.name());
        }
        match n.status {
            NodeStatus::Saturated => v["status"] = json!("saturated"),
            NodeStatus::Pending => v["status"] = json!("pending"),
            _ => {}
        }
        v
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph proof {\n  node [shape=box, fontname=\"monospace\"];\n");
        for n in &self.nodes {
            let mut label = format!("{}: {}", n.id, n.rule.map(|r| r.name()).unwrap_or("root"));
            if !n.premises.is_empty() {
                let ids: Vec<String> = n.premises.iter().map(|p| p.0.to_string()).collect();
                let _ = write!(label, " [{}]", ids.join(","));
            }
            for f in &n.formulas_added {
                label.push_str("\\n");
                label.push_str(&print(f));
            }
            if n.closure().is_some() {
                label.push_str("\\n⊥");
            }
            let style = match n.status {
                NodeStatus::Closed => ", color=red",
                NodeStatus::Saturated => ", color=blue",
                NodeStatus::Pending => ", style=dashed",
                NodeStatus::Interior => "",
            };
            let _ = writeln!(out, "  n{} [label=\"{}\"{}];", n.id, label.replace('"', "\\\""), style);
        }
        for n in &self.nodes {
            for c in &n.children {
                let _ = writeln!(out, "  n{} -> n{};", n.id, c);
            }
        }
        out.push_str("}\n");
        out
    }

    /// Plain-text rendering, one node per line, indented by depth.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            let n = &self.nodes[id];
            let pad = "  ".repeat(depth);
            let rule = n.rule.map(|r| r.name()).unwrap_or("root");
            let prem: Vec<String> = n.premises.iter().map(|p| p.0.to_string()).collect();
            let body = if n.closure().is_some() {
                "⊥".to_string()
            } else {
                n.formulas_added.iter().map(print).collect::<Vec<_>>().join(", ")
            };
            let _ = writeln!(
                out,
                "{pad}{id}. {body}    [{rule}{}{}]",
                if prem.is_empty() { "" } else { " " },
                prem.join(",")
            );
            let step = if n.children.len() > 1 { 1 } else { 0 };
            for &c in n.children.iter().rev() {
                stack.push((c, depth + step));
            }
        }
        out
    }
}
