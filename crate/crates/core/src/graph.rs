//! Causal diagrams and the reachability queries behind admissibility.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::scm::Scm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// A generative feature in `V`.
    Feature,
    Mixture,
    Label,
}

/// Directed plus bidirected graph over `V ∪ {X, Ŷ}`.
///
/// Built either from a model ([`CausalDiagram::induce`]) or from a bare
/// feature-level edge list ([`CausalDiagram::from_edges`]), in which case it
/// has no mixture or label node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalDiagram {
    names: Vec<String>,
    kinds: Vec<NodeKind>,
    index: HashMap<String, usize>,
    children: Vec<BTreeSet<usize>>,
    bidirected: BTreeSet<(usize, usize)>,
}

impl CausalDiagram {
    fn empty() -> Self {
        CausalDiagram {
            names: Vec::new(),
            kinds: Vec::new(),
            index: HashMap::new(),
            children: Vec::new(),
            bidirected: BTreeSet::new(),
        }
    }

    fn add_node(&mut self, name: &str, kind: NodeKind) -> Result<usize> {
        if self.index.contains_key(name) {
            return Err(Error::Precondition(format!("node `{name}` declared twice")));
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.kinds.push(kind);
        self.index.insert(name.to_string(), i);
        self.children.push(BTreeSet::new());
        Ok(i)
    }

    fn add_bidirected(&mut self, a: usize, b: usize) {
        if a != b {
            self.bidirected.insert((a.min(b), a.max(b)));
        }
    }

    /// The diagram a model induces:
    /// - `Vj -> Vi` when `Vj` appears in the equation of `Vi`;
    /// - `C -> X` for every endogenous mixture component `C`;
    /// - `T -> Ŷ` for every classifier input (`X -> Ŷ` for a pixel classifier);
    /// - `A <-> B` when the equations of `A` and `B` (the mixture counting as
    ///   an equation over its components) share an exogenous argument.
    pub fn induce(scm: &Scm) -> CausalDiagram {
        let mut g = CausalDiagram::empty();
        for n in scm.endogenous_names() {
            g.add_node(n, NodeKind::Feature).expect("unique names");
        }
        let mut exo_readers: HashMap<String, Vec<usize>> = HashMap::new();
        for v in scm.endogenous() {
            let child = g.index[&v.name];
            for r in v.expr.references() {
                if let Some(&parent) = g.index.get(&r) {
                    g.children[parent].insert(child);
                } else {
                    exo_readers.entry(r).or_default().push(child);
                }
            }
        }
        if let Some(m) = scm.mixture() {
            let x = g.add_node(&m.name, NodeKind::Mixture).expect("unique names");
            for c in &m.components {
                match g.index.get(c) {
                    Some(&i) if g.kinds[i] == NodeKind::Feature => {
                        g.children[i].insert(x);
                    }
                    _ => exo_readers.entry(c.clone()).or_default().push(x),
                }
            }
        }
        if let Some(c) = scm.classifier() {
            let y = g.add_node(&c.label, NodeKind::Label).expect("unique names");
            for u in &c.uses {
                let parent = g.index[u];
                g.children[parent].insert(y);
            }
        }
        for readers in exo_readers.values() {
            for (k, &a) in readers.iter().enumerate() {
                for &b in &readers[k + 1..] {
                    g.add_bidirected(a, b);
                }
            }
        }
        g
    }

    /// A feature-level diagram from edge lists. Fails on unknown endpoints
    /// or a directed cycle.
    pub fn from_edges(
        features: &[&str],
        directed: &[(&str, &str)],
        bidirected: &[(&str, &str)],
    ) -> Result<CausalDiagram> {
        let mut g = CausalDiagram::empty();
        for f in features {
            g.add_node(f, NodeKind::Feature)?;
        }
        for (a, b) in directed {
            let (a, b) = (g.node(a)?, g.node(b)?);
            g.children[a].insert(b);
        }
        for (a, b) in bidirected {
            let (a, b) = (g.node(a)?, g.node(b)?);
            g.add_bidirected(a, b);
        }
        if let Some(cycle_node) = g.find_cycle() {
            return Err(Error::Precondition(format!("directed cycle through `{}`", g.names[cycle_node])));
        }
        Ok(g)
    }

    fn find_cycle(&self) -> Option<usize> {
        let n = self.names.len();
        let mut indegree = vec![0usize; n];
        for cs in &self.children {
            for &c in cs {
                indegree[c] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for &c in &self.children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (seen < n).then(|| (0..n).find(|&i| indegree[i] > 0).expect("cycle member"))
    }

    pub(crate) fn node(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn kind(&self, name: &str) -> Option<NodeKind> {
        self.index.get(name).map(|&i| self.kinds[i])
    }

    pub fn nodes(&self) -> &[String] {
        &self.names
    }

    /// `V`, in declaration order.
    pub fn features(&self) -> Vec<&str> {
        self.names
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k == NodeKind::Feature)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn mixture(&self) -> Option<&str> {
        self.kinds.iter().position(|k| *k == NodeKind::Mixture).map(|i| self.names[i].as_str())
    }

    pub fn label(&self) -> Option<&str> {
        self.kinds.iter().position(|k| *k == NodeKind::Label).map(|i| self.names[i].as_str())
    }

    pub fn directed_edges(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (a, cs) in self.children.iter().enumerate() {
            for &b in cs {
                out.push((self.names[a].as_str(), self.names[b].as_str()));
            }
        }
        out
    }

    pub fn bidirected_edges(&self) -> Vec<(&str, &str)> {
        self.bidirected.iter().map(|&(a, b)| (self.names[a].as_str(), self.names[b].as_str())).collect()
    }

    pub fn parents(&self, name: &str) -> Result<BTreeSet<String>> {
        let i = self.node(name)?;
        Ok((0..self.names.len())
            .filter(|&p| self.children[p].contains(&i))
            .map(|p| self.names[p].clone())
            .collect())
    }

    pub(crate) fn descendant_indices(&self, sources: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in sources {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(i) = queue.pop_front() {
            for &c in &self.children[i] {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        seen
    }

    /// Every node reachable from some member of `w` by directed edges,
    /// including the members themselves.
    pub fn descendants<S: AsRef<str>>(&self, w: &[S]) -> Result<BTreeSet<String>> {
        let sources: Vec<usize> = w.iter().map(|n| self.node(n.as_ref())).collect::<Result<_>>()?;
        let seen = self.descendant_indices(&sources);
        Ok(self.names.iter().zip(seen).filter(|(_, s)| *s).map(|(n, _)| n.clone()).collect())
    }

    /// Features that are non-descendants of every member of `w`. Never
    /// contains a member of `w`. Empty `w` is rejected.
    pub fn non_descendants<S: AsRef<str>>(&self, w: &[S]) -> Result<BTreeSet<String>> {
        if w.is_empty() {
            return Err(Error::EmptyInterventionSet);
        }
        let sources: Vec<usize> = w.iter().map(|n| self.node(n.as_ref())).collect::<Result<_>>()?;
        let seen = self.descendant_indices(&sources);
        Ok(self
            .names
            .iter()
            .enumerate()
            .filter(|&(i, _)| self.kinds[i] == NodeKind::Feature && !seen[i])
            .map(|(_, n)| n.clone())
            .collect())
    }

    /// Line-oriented text export: `node N`, `A -> B`, `A <-> B`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (n, k) in self.names.iter().zip(&self.kinds) {
            let kind = match k {
                NodeKind::Feature => "feature",
                NodeKind::Mixture => "mixture",
                NodeKind::Label => "label",
            };
            let _ = writeln!(out, "node {n} {kind}");
        }
        for (a, b) in self.directed_edges() {
            let _ = writeln!(out, "{a} -> {b}");
        }
        for (a, b) in self.bidirected_edges() {
            let _ = writeln!(out, "{a} <-> {b}");
        }
        out
    }

    /// Graphviz rendering of the same graph; bidirected edges are dashed.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n");
        for n in &self.names {
            let _ = writeln!(out, "    \"{n}\";");
        }
        for (a, b) in self.directed_edges() {
            let _ = writeln!(out, "    \"{a}\" -> \"{b}\";");
        }
        for (a, b) in self.bidirected_edges() {
            let _ = writeln!(out, "    \"{a}\" -> \"{b}\" [dir=both, style=dashed];");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn chain() {
        let g = CausalDiagram::from_edges(&["A", "B", "C"], &[("A", "B"), ("B", "C")], &[]).unwrap();
        assert_eq!(g.non_descendants(&["B"]).unwrap(), set(&["A"]));
        assert_eq!(g.descendants(&["B"]).unwrap(), set(&["B", "C"]));
        assert_eq!(g.descendants::<&str>(&[]).unwrap(), set(&[]));
        assert!(matches!(g.non_descendants::<&str>(&[]), Err(Error::EmptyInterventionSet)));
        assert!(matches!(g.descendants(&["Z"]), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn rejects_cycles_and_unknown_endpoints() {
        assert!(CausalDiagram::from_edges(&["A", "B"], &[("A", "B"), ("B", "A")], &[]).is_err());
        assert!(CausalDiagram::from_edges(&["A"], &[("A", "B")], &[]).is_err());
        assert!(CausalDiagram::from_edges(&["A", "A"], &[], &[]).is_err());
    }

    #[test]
    fn text_export() {
        let g = CausalDiagram::from_edges(&["A", "B"], &[("A", "B")], &[("A", "B")]).unwrap();
        assert_eq!(g.to_text(), "node A feature\nnode B feature\nA -> B\nA <-> B\n");
        assert!(g.to_dot("g").contains("\"A\" -> \"B\" [dir=both, style=dashed];"));
    }
}
