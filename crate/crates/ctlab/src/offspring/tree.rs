//! Rooted ordered trees with a degree-one root, plus the "PTREE 1" byte format.

use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("malformed tree stream: {0}")]
    Malformed(String),
    #[error("child-count sum violation: counts must keep the walk positive and end at -1")]
    Lukasiewicz,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type NodeId = u32;
const NO_PARENT: u32 = u32::MAX;

/// A rooted planar tree. The root is node 0 and has exactly one child; child
/// order is significant (it carries the planar embedding).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarTree {
    parents: Vec<u32>,
    children: Vec<Vec<NodeId>>,
}

impl PlanarTree {
    /// Tree with a root and its single child.
    pub fn single_edge() -> Self {
        PlanarTree { parents: vec![NO_PARENT, 0], children: vec![vec![1], vec![]] }
    }

    /// Build from the child counts of the non-root vertices in depth-first
    /// preorder starting at the root's unique child.
    pub fn from_child_counts(counts: &[u32]) -> Result<Self, TreeError> {
        let n = counts.len();
        if n == 0 {
            return Err(TreeError::Malformed("empty child-count sequence".into()));
        }
        // Lukasiewicz check: pending slots stay positive until the last vertex.
        let mut pending: i64 = 1;
        for (i, &c) in counts.iter().enumerate() {
            pending += i64::from(c) - 1;
            if pending <= 0 && i + 1 < n {
                return Err(TreeError::Lukasiewicz);
            }
        }
        if pending != 0 {
            return Err(TreeError::Lukasiewicz);
        }

        let mut tree = PlanarTree {
            parents: Vec::with_capacity(n + 1),
            children: Vec::with_capacity(n + 1),
        };
        tree.parents.push(NO_PARENT);
        tree.children.push(Vec::new());
        // Stack of parents still owed children; preorder ids are 1..=n.
        let mut stack: Vec<(NodeId, u32)> = vec![(0, 1)];
        for &c in counts {
            let (parent, left) = stack.pop().expect("slots balance");
            let id = tree.parents.len() as NodeId;
            tree.parents.push(parent);
            tree.children.push(Vec::with_capacity(c as usize));
            tree.children[parent as usize].push(id);
            if left > 1 {
                stack.push((parent, left - 1));
            }
            if c > 0 {
                stack.push((id, c));
            }
        }
        debug_assert!(stack.is_empty());
        Ok(tree)
    }

    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    /// |T|: the number of edges.
    pub fn edge_count(&self) -> usize {
        self.parents.len() - 1
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.parents[v as usize];
        (p != NO_PARENT).then_some(p)
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v as usize]
    }

    /// Degree sigma_v (children plus parent edge).
    pub fn degree(&self, v: NodeId) -> usize {
        self.children[v as usize].len() + usize::from(self.parents[v as usize] != NO_PARENT)
    }

    /// Vertices grouped by height, in planar (left-to-right) order per level.
    /// `levels()[k]` is D_k; `levels()[0]` is the root alone.
    pub fn levels(&self) -> Vec<Vec<NodeId>> {
        let mut levels = vec![vec![0]];
        loop {
            let last = levels.last().unwrap();
            let next: Vec<NodeId> = last
                .iter()
                .flat_map(|&v| self.children[v as usize].iter().copied())
                .collect();
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        levels
    }

    /// Child counts in preorder, the canonical encoding of the tree shape.
    pub fn preorder_child_counts(&self) -> Vec<u32> {
        let mut counts = Vec::with_capacity(self.edge_count());
        let mut stack = vec![self.children[0][0]];
        while let Some(v) = stack.pop() {
            let kids = &self.children[v as usize];
            counts.push(kids.len() as u32);
            stack.extend(kids.iter().rev());
        }
        counts
    }

    /// Height, level sizes |D_k| and ball edge counts |B_R|.
    pub fn stats(&self) -> TreeStats {
        let mut level_sizes = Vec::new();
        let mut frontier = vec![0u32];
        while !frontier.is_empty() {
            level_sizes.push(frontier.len() as u64);
            frontier = frontier
                .iter()
                .flat_map(|&v| self.children[v as usize].iter().copied())
                .collect();
        }
        let mut ball_sizes = Vec::with_capacity(level_sizes.len());
        let mut acc = 0;
        ball_sizes.push(0);
        for &d in &level_sizes[1..] {
            acc += d;
            ball_sizes.push(acc);
        }
        TreeStats { height: level_sizes.len() - 1, level_sizes, ball_sizes }
    }

    pub(crate) fn builder_with_root() -> PlanarTree {
        PlanarTree { parents: vec![NO_PARENT], children: vec![Vec::new()] }
    }

    pub(crate) fn add_child(&mut self, parent: NodeId) -> NodeId {
        let id = self.parents.len() as NodeId;
        self.parents.push(parent);
        self.children.push(Vec::new());
        self.children[parent as usize].push(id);
        id
    }
}

/// Heights measured from the root; `ball_sizes[R]` counts edges in B_R.
#[derive(Debug, Clone)]
pub struct TreeStats {
    pub height: usize,
    pub level_sizes: Vec<u64>,
    pub ball_sizes: Vec<u64>,
}

impl TreeStats {
    /// |D_k|, zero beyond the height.
    pub fn level_size(&self, k: usize) -> u64 {
        self.level_sizes.get(k).copied().unwrap_or(0)
    }

    /// |B_R| in edges, saturating at the full tree.
    pub fn ball_size(&self, r: usize) -> u64 {
        if r >= self.ball_sizes.len() {
            *self.ball_sizes.last().unwrap()
        } else {
            self.ball_sizes[r]
        }
    }
}

/// A height-capped window of a single-spine tree. `spine[i]` sits at height i
/// (`spine[0]` is the root); every spine vertex below the cap carries its
/// finite branches in planar order, with the spine continuation recorded as
/// one of the child slots.
#[derive(Debug, Clone)]
pub struct SpineTree {
    pub tree: PlanarTree,
    pub spine: Vec<NodeId>,
    pub height_cap: usize,
}

impl SpineTree {
    /// Number of finite branches hanging off spine vertex i (1-based height).
    pub fn branch_count(&self, i: usize) -> usize {
        let v = self.spine[i];
        let kids = self.tree.children(v).len();
        if i + 1 < self.spine.len() {
            kids - 1
        } else {
            kids
        }
    }
}

/// Write the "PTREE 1" format: magic line, edge count, preorder child counts.
pub fn serialize_tree<W: Write>(tree: &PlanarTree, w: &mut W) -> Result<(), TreeError> {
    writeln!(w, "PTREE 1")?;
    writeln!(w, "{}", tree.edge_count())?;
    let counts = tree.preorder_child_counts();
    let mut line = String::with_capacity(counts.len() * 2);
    for (i, c) in counts.iter().enumerate() {
        if i > 0 {
            line.push(' ');
        }
        line.push_str(&c.to_string());
    }
    writeln!(w, "{line}")?;
    Ok(())
}

/// Parse the "PTREE 1" format. Trailing `#`-comment lines are ignored.
pub fn deserialize_tree<R: BufRead>(r: &mut R) -> Result<PlanarTree, TreeError> {
    let mut lines = content_lines(r)?;
    if lines.len() < 3 {
        return Err(TreeError::Malformed("expected 3 lines".into()));
    }
    if lines[0].trim() != "PTREE 1" {
        return Err(TreeError::Malformed(format!("bad magic {:?}", lines[0])));
    }
    let n: usize = lines[1]
        .trim()
        .parse()
        .map_err(|_| TreeError::Malformed("bad edge count".into()))?;
    let counts: Vec<u32> = lines
        .remove(2)
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| TreeError::Malformed(format!("bad count {t:?}"))))
        .collect::<Result<_, _>>()?;
    if counts.len() != n {
        return Err(TreeError::Malformed(format!(
            "edge count {n} does not match {} child counts",
            counts.len()
        )));
    }
    PlanarTree::from_child_counts(&counts)
}

pub(crate) fn content_lines<R: BufRead>(r: &mut R) -> Result<Vec<String>, TreeError> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        out.push(line);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_stats() {
        let t = PlanarTree::single_edge();
        let s = t.stats();
        assert_eq!(s.height, 1);
        assert_eq!(s.level_size(1), 1);
        assert_eq!(s.ball_size(1), 1);
        assert_eq!(t.edge_count(), 1);
    }

    #[test]
    fn path_ball_sizes() {
        // Path of length 3: r - a - b - c.
        let t = PlanarTree::from_child_counts(&[1, 1, 0]).unwrap();
        let s = t.stats();
        assert_eq!(s.height, 3);
        assert_eq!(s.ball_size(2), 2);
        assert_eq!(s.level_sizes, vec![1, 1, 1, 1]);
    }

    #[test]
    fn lukasiewicz_rejects_bad_sequences() {
        assert!(PlanarTree::from_child_counts(&[0, 1]).is_err());
        assert!(PlanarTree::from_child_counts(&[2, 0]).is_err());
        assert!(PlanarTree::from_child_counts(&[1]).is_err());
        assert!(PlanarTree::from_child_counts(&[]).is_err());
        assert!(PlanarTree::from_child_counts(&[2, 0, 0]).is_ok());
    }

    #[test]
    fn preorder_round_trip() {
        let counts = vec![3, 0, 2, 0, 0, 1, 0];
        let t = PlanarTree::from_child_counts(&counts).unwrap();
        assert_eq!(t.preorder_child_counts(), counts);
        // Edge/vertex bookkeeping: sum of child counts over non-root vertices
        // equals edge_count - 1.
        let total: u32 = counts.iter().sum();
        assert_eq!(total as usize, t.edge_count() - 1);
    }

    #[test]
    fn serialization_round_trip() {
        let t = PlanarTree::from_child_counts(&[2, 1, 0, 0]).unwrap();
        let mut buf = Vec::new();
        serialize_tree(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("PTREE 1\n4\n2 1 0 0"), "{text}");
        let back = deserialize_tree(&mut buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn serialization_smallest_trees() {
        let mut buf = Vec::new();
        serialize_tree(&PlanarTree::single_edge(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "PTREE 1\n1\n0\n");
        let mut buf = Vec::new();
        serialize_tree(&PlanarTree::from_child_counts(&[1, 0]).unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "PTREE 1\n2\n1 0\n");
    }

    #[test]
    fn deserialize_rejects_garbage() {
        let cases = ["", "PTREE 2\n1\n0\n", "PTREE 1\n2\n0\n", "PTREE 1\n1\nx\n", "PTREE 1\n2\n1 1\n"];
        for c in cases {
            assert!(deserialize_tree(&mut c.as_bytes()).is_err(), "{c:?}");
        }
    }
}
