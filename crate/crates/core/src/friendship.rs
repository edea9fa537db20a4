//! Simple undirected friendship graph, the substrate for contact
//! preference.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FriendshipNetwork {
    n: usize,
    edges: BTreeSet<(u32, u32)>, // (min, max)
    adjacency: Vec<Vec<u32>>,    // sorted neighbor lists
}

impl FriendshipNetwork {
    pub fn new(n: usize, edge_list: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut edges = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edge_list {
            if a == b {
                return Err(Error::validation(format!("self friendship at node {a}")));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::validation(format!(
                    "edge ({a},{b}) outside 0..{n}"
                )));
            }
            let key = (a.min(b), a.max(b));
            if edges.insert(key) {
                adjacency[a as usize].push(b);
                adjacency[b as usize].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(FriendshipNetwork {
            n,
            edges,
            adjacency,
        })
    }

    pub fn empty(n: usize) -> Self {
        FriendshipNetwork {
            n,
            edges: BTreeSet::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.adjacency.iter().map(|a| a.len() as u32).collect()
    }

    pub fn friends(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    pub fn is_friend(&self, i: u32, j: u32) -> bool {
        self.adjacency[i as usize].binary_search(&j).is_ok()
    }

    /// Edges in (min, max) order, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    /// Restrict to the given nodes, relabelling them 0..len-1 in order.
    pub fn induced_subgraph(&self, nodes: &[u32]) -> FriendshipNetwork {
        let mut index = vec![u32::MAX; self.n];
        for (local, &g) in nodes.iter().enumerate() {
            index[g as usize] = local as u32;
        }
        let edges = self.edges.iter().filter_map(|&(a, b)| {
            let (la, lb) = (index[a as usize], index[b as usize]);
            (la != u32::MAX && lb != u32::MAX).then_some((la, lb))
        });
        FriendshipNetwork::new(nodes.len(), edges).expect("subgraph edges are valid")
    }

    /// Write as `i j` lines sorted by (i, j).
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (a, b) in self.edges() {
            writeln!(f, "{a} {b}")?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn load_edge_list(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<u32> {
                s.and_then(|v| v.parse().ok()).ok_or(Error::Parse {
                    line: idx + 1,
                    message: format!("bad edge line {line:?}"),
                })
            };
            let a = parse(parts.next())?;
            let b = parse(parts.next())?;
            edges.push((a, b));
        }
        FriendshipNetwork::new(n, edges)
    }
}
