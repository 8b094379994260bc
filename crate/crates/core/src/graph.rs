//! Known structure among the potential causes.
//!
//! The effect `Y` is implicit: it is a sink with (possibly unknown) parents among
//! the causes, and no latent variable points into it. Latent confounders among the
//! causes are given as bidirected pairs; when synthesizing data each maximal clique
//! of the bidirected graph becomes one latent root.

use std::fmt;

use crate::error::{Error, Result};
use crate::vars::{VarId, VarSet};

/// The three default three-level structures with five causes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// Two latent confounders over `{X1,X2}` and `{X3,X4,X5}`.
    A,
    /// One latent confounder over all five causes.
    B,
    /// Structure A plus the directed edge `X1 -> X2`.
    C,
}

impl Structure {
    pub const ALL: [Structure; 3] = [Structure::A, Structure::B, Structure::C];

    pub fn graph(self) -> GraphSpec {
        let groups: Vec<Vec<usize>> = match self {
            Structure::A | Structure::C => vec![vec![0, 1], vec![2, 3, 4]],
            Structure::B => vec![vec![0, 1, 2, 3, 4]],
        };
        let mut confounders = Vec::new();
        for g in &groups {
            for (i, &a) in g.iter().enumerate() {
                for &b in &g[i + 1..] {
                    confounders.push((VarId(a), VarId(b)));
                }
            }
        }
        let directed = match self {
            Structure::C => vec![(VarId(0), VarId(1))],
            _ => Vec::new(),
        };
        GraphSpec::new(5, directed, confounders, None).expect("default structures are valid")
    }

    pub fn label(self) -> &'static str {
        match self {
            Structure::A => "a",
            Structure::B => "b",
            Structure::C => "c",
        }
    }
}

impl std::str::FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(Structure::A),
            "b" | "B" => Ok(Structure::B),
            "c" | "C" => Ok(Structure::C),
            other => Err(Error::Parse(format!("unknown structure {other:?}"))),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    n_causes: usize,
    directed_edges: Vec<(VarId, VarId)>,
    confounders: Vec<(VarId, VarId)>,
    y_parents: Option<VarSet>,
}

impl GraphSpec {
    /// Validates and normalizes the structure. Edges are deduplicated and sorted;
    /// confounder pairs are stored with the smaller index first.
    pub fn new(
        n_causes: usize,
        directed_edges: Vec<(VarId, VarId)>,
        confounders: Vec<(VarId, VarId)>,
        y_parents: Option<VarSet>,
    ) -> Result<Self> {
        if n_causes == 0 {
            return Err(Error::InvalidGraph("at least one cause is required".into()));
        }
        if n_causes > crate::DEFAULT_MAX_CAUSES {
            return Err(Error::Capacity { n_causes, ceiling: crate::DEFAULT_MAX_CAUSES });
        }
        let check = |v: VarId| {
            if v.0 >= n_causes {
                Err(Error::InvalidGraph(format!("{v} is out of range for {n_causes} causes")))
            } else {
                Ok(())
            }
        };
        let mut directed = Vec::with_capacity(directed_edges.len());
        for (a, b) in directed_edges {
            check(a)?;
            check(b)?;
            if a == b {
                return Err(Error::InvalidGraph(format!("self loop on {a}")));
            }
            directed.push((a, b));
        }
        directed.sort();
        directed.dedup();

        let mut bidirected = Vec::with_capacity(confounders.len());
        for (a, b) in confounders {
            check(a)?;
            check(b)?;
            if a == b {
                return Err(Error::InvalidGraph(format!("confounder pair joins {a} to itself")));
            }
            bidirected.push((a.min(b), a.max(b)));
        }
        bidirected.sort();
        bidirected.dedup();

        if let Some(ps) = &y_parents {
            if let Some(v) = ps.max() {
                check(v)?;
            }
        }

        let graph = Self { n_causes, directed_edges: directed, confounders: bidirected, y_parents };
        if graph.topological_order().is_none() {
            return Err(Error::InvalidGraph("directed edges among causes form a cycle".into()));
        }
        Ok(graph)
    }

    pub fn n_causes(&self) -> usize {
        self.n_causes
    }

    pub fn directed_edges(&self) -> &[(VarId, VarId)] {
        &self.directed_edges
    }

    pub fn confounders(&self) -> &[(VarId, VarId)] {
        &self.confounders
    }

    pub fn y_parents(&self) -> Option<&VarSet> {
        self.y_parents.as_ref()
    }

    pub fn causes(&self) -> VarSet {
        VarSet::all(self.n_causes)
    }

    /// The same structure with the ground-truth parents of `Y` removed.
    pub fn without_y_parents(&self) -> GraphSpec {
        GraphSpec { y_parents: None, ..self.clone() }
    }

    pub fn with_y_parents(&self, parents: VarSet) -> Result<GraphSpec> {
        GraphSpec::new(
            self.n_causes,
            self.directed_edges.clone(),
            self.confounders.clone(),
            Some(parents),
        )
    }

    pub fn with_directed_edge(&self, from: VarId, to: VarId) -> Result<GraphSpec> {
        let mut edges = self.directed_edges.clone();
        edges.push((from, to));
        GraphSpec::new(self.n_causes, edges, self.confounders.clone(), self.y_parents.clone())
    }

    /// Directed children of `v` among the causes.
    pub fn children(&self, v: VarId) -> VarSet {
        VarSet::from_unsorted(self.directed_edges.iter().filter(|e| e.0 == v).map(|e| e.1))
    }

    /// Directed parents of `v` among the causes.
    pub fn parents(&self, v: VarId) -> VarSet {
        VarSet::from_unsorted(self.directed_edges.iter().filter(|e| e.1 == v).map(|e| e.0))
    }

    /// Kahn's algorithm, smallest index first. `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<VarId>> {
        let n = self.n_causes;
        let mut indegree = vec![0usize; n];
        for &(_, b) in &self.directed_edges {
            indegree[b.0] += 1;
        }
        let mut order = Vec::with_capacity(n);
        let mut done = vec![false; n];
        while order.len() < n {
            let next = (0..n).find(|&i| !done[i] && indegree[i] == 0)?;
            done[next] = true;
            order.push(VarId(next));
            for &(a, b) in &self.directed_edges {
                if a.0 == next {
                    indegree[b.0] -= 1;
                }
            }
        }
        Some(order)
    }

    /// Maximal cliques of the bidirected graph, each sorted, ordered by first member.
    /// Every clique stands for one latent root confounding all of its members.
    pub fn latent_groups(&self) -> Vec<VarSet> {
        let n = self.n_causes;
        let mut adj = vec![0usize; n];
        for &(a, b) in &self.confounders {
            adj[a.0] |= 1 << b.0;
            adj[b.0] |= 1 << a.0;
        }
        let mut cliques = Vec::new();
        let touched: usize = (0..n).filter(|&i| adj[i] != 0).fold(0, |m, i| m | 1 << i);
        bron_kerbosch(0, touched, 0, &adj, &mut cliques);
        let mut groups: Vec<VarSet> = cliques
            .into_iter()
            .map(|mask| VarSet::from_unsorted((0..n).filter(|i| mask >> i & 1 == 1).map(VarId)))
            .collect();
        groups.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));
        groups
    }
}

fn bron_kerbosch(r: usize, mut p: usize, mut x: usize, adj: &[usize], out: &mut Vec<usize>) {
    if p == 0 && x == 0 {
        if r.count_ones() >= 2 {
            out.push(r);
        }
        return;
    }
    while p != 0 {
        let v = p.trailing_zeros() as usize;
        bron_kerbosch(r | 1 << v, p & adj[v], x & adj[v], adj, out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}
