use alloc::vec;
use alloc::vec::Vec;

use super::Graph;
use crate::error::{Error, Result};

/// Nodes within `radius` hops of `center`, sorted ascending (center included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KHopSubgraph {
    pub center: usize,
    pub radius: usize,
    pub members: Vec<usize>,
}

pub fn khop(g: &Graph, center: usize, radius: usize) -> Result<KHopSubgraph> {
    let mut extractor = KHopExtractor::new(g.num_nodes());
    let mut members = Vec::new();
    extractor.extract(g, center, radius, &mut members)?;
    Ok(KHopSubgraph {
        center,
        radius,
        members,
    })
}

/// Truncated BFS with scratch buffers reused across centers, so each call
/// costs time proportional to the neighborhood it visits.
#[derive(Debug, Clone)]
pub struct KHopExtractor {
    visited: Vec<bool>,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl KHopExtractor {
    pub fn new(num_nodes: usize) -> Self {
        Self {
            visited: vec![false; num_nodes],
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    /// Writes the sorted member list of the K-hop neighborhood into `members`.
    pub fn extract(
        &mut self,
        g: &Graph,
        center: usize,
        radius: usize,
        members: &mut Vec<usize>,
    ) -> Result<()> {
        let n = g.num_nodes();
        if center >= n {
            return Err(Error::NodeOutOfRange { node: center, nodes: n });
        }
        if self.visited.len() < n {
            self.visited.resize(n, false);
        }
        members.clear();
        self.frontier.clear();
        self.visited[center] = true;
        members.push(center);
        self.frontier.push(center);
        for _ in 0..radius {
            if self.frontier.is_empty() {
                break;
            }
            self.next.clear();
            for &u in &self.frontier {
                for &v in g.neighbors(u) {
                    if !self.visited[v] {
                        self.visited[v] = true;
                        members.push(v);
                        self.next.push(v);
                    }
                }
            }
            core::mem::swap(&mut self.frontier, &mut self.next);
        }
        for &m in members.iter() {
            self.visited[m] = false;
        }
        members.sort_unstable();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn path_two_hops() {
        let g = path(4);
        assert_eq!(khop(&g, 0, 2).unwrap().members, vec![0, 1, 2]);
        assert_eq!(khop(&g, 2, 1).unwrap().members, vec![1, 2, 3]);
    }

    #[test]
    fn zero_radius_is_center_only() {
        let g = path(5);
        for c in 0..5 {
            assert_eq!(khop(&g, c, 0).unwrap().members, vec![c]);
        }
    }

    #[test]
    fn center_out_of_range() {
        assert_eq!(
            khop(&path(3), 3, 1).unwrap_err(),
            Error::NodeOutOfRange { node: 3, nodes: 3 }
        );
    }

    #[test]
    fn extractor_reuse_does_not_leak_state() {
        let g = unlabeled(&[(0, 1), (1, 2), (3, 4)], 5, 1);
        let mut ex = KHopExtractor::new(5);
        let mut out = Vec::new();
        ex.extract(&g, 1, 3, &mut out).unwrap();
        assert_eq!(out, vec![0, 1, 2]);
        ex.extract(&g, 3, 3, &mut out).unwrap();
        assert_eq!(out, vec![3, 4]);
    }
}
