//! Compact decoder tree: subtrees whose frozen pattern makes them a Rate-0,
//! Rate-1, Repetition or single-parity-check code become leaves.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::code::CodeSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Rate0,
    Rate1,
    Rep,
    Spc,
    Branch,
}

impl NodeKind {
    pub fn is_leaf(self) -> bool {
        self != NodeKind::Branch
    }

    /// Information bits carried by a leaf of this kind and size.
    pub fn info_bits(self, size: usize) -> usize {
        match self {
            NodeKind::Rate0 | NodeKind::Branch => 0,
            NodeKind::Rate1 => size,
            NodeKind::Rep => 1,
            NodeKind::Spc => size - 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Rate0 => "Rate0",
            NodeKind::Rate1 => "Rate1",
            NodeKind::Rep => "Rep",
            NodeKind::Spc => "Spc",
            NodeKind::Branch => "Branch",
        }
    }
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifies a span by its frozen pattern (`true` = frozen).
///
/// Rate-0/Rate-1 take priority, so a size-1 span is never Rep or SPC, and the
/// size-2 pattern `[frozen, info]` (both a repetition and an SPC code) is Rep.
pub fn classify(frozen: &[bool]) -> Result<NodeKind> {
    let len = frozen.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "span length {len} is not a positive power of two"
        )));
    }
    let n_frozen = frozen.iter().filter(|&&f| f).count();
    Ok(if n_frozen == len {
        NodeKind::Rate0
    } else if n_frozen == 0 {
        NodeKind::Rate1
    } else if n_frozen == len - 1 && !frozen[len - 1] {
        NodeKind::Rep
    } else if n_frozen == 1 && frozen[0] {
        NodeKind::Spc
    } else {
        NodeKind::Branch
    })
}

/// Size caps on specialized leaves; oversized candidates are split instead.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_spc_size: Option<usize>,
    pub max_rep_size: Option<usize>,
}

impl TreeConfig {
    fn validate(&self) -> Result<()> {
        if self.max_spc_size == Some(0) || self.max_rep_size == Some(0) {
            return Err(Error::InvalidParameter("leaf size caps must be positive".into()));
        }
        Ok(())
    }

    fn allows(&self, kind: NodeKind, size: usize) -> bool {
        let cap = match kind {
            NodeKind::Spc => self.max_spc_size,
            NodeKind::Rep => self.max_rep_size,
            _ => None,
        };
        cap.is_none_or(|c| size <= c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// First u-index of the span.
    pub start: usize,
    /// Span length `Nv`.
    pub size: usize,
    /// Arena indices of the left and right child for branch nodes.
    pub children: Option<[usize; 2]>,
}

impl Node {
    pub fn bit_range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.size
    }
}

/// Decoder tree stored as an arena in depth-first pre-order; the root is node 0
/// and leaves appear left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderTree {
    nodes: Vec<Node>,
    leaves: Vec<usize>,
    block_len: usize,
}

impl DecoderTree {
    pub fn build(spec: &CodeSpec, config: TreeConfig) -> Result<Self> {
        Self::from_frozen_mask(spec.frozen_mask(), config)
    }

    pub fn from_frozen_mask(frozen: &[bool], config: TreeConfig) -> Result<Self> {
        config.validate()?;
        if frozen.len() < 2 || !frozen.len().is_power_of_two() {
            return Err(Error::BlockLength(frozen.len()));
        }
        let mut tree = DecoderTree {
            nodes: Vec::new(),
            leaves: Vec::new(),
            block_len: frozen.len(),
        };
        tree.grow(frozen, 0, frozen.len(), &config)?;
        Ok(tree)
    }

    fn grow(&mut self, frozen: &[bool], start: usize, size: usize, config: &TreeConfig) -> Result<usize> {
        let span = &frozen[start..start + size];
        let mut kind = classify(span)?;
        if kind.is_leaf() && !config.allows(kind, size) {
            kind = NodeKind::Branch;
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            kind,
            start,
            size,
            children: None,
        });
        if kind == NodeKind::Branch {
            let half = size / 2;
            let left = self.grow(frozen, start, half, config)?;
            let right = self.grow(frozen, start + half, half, config)?;
            self.nodes[id].children = Some([left, right]);
        } else {
            self.leaves.push(id);
        }
        Ok(id)
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Leaves in left-to-right (traversal) order.
    pub fn leaves(&self) -> impl ExactSizeIterator<Item = &Node> + '_ {
        self.leaves.iter().map(|&id| &self.nodes[id])
    }

    pub fn info_bits(&self) -> usize {
        self.leaves().map(|l| l.kind.info_bits(l.size)).sum()
    }

    pub fn count_leaves(&self, kind: NodeKind) -> usize {
        self.leaves().filter(|l| l.kind == kind).count()
    }

    /// Indented text dump, one node per line.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        self.dump_node(0, 0, &mut out);
        out
    }

    fn dump_node(&self, id: usize, depth: usize, out: &mut String) {
        let node = &self.nodes[id];
        let _ = writeln!(
            out,
            "{:indent$}{}({}) [{}, {})",
            "",
            node.kind,
            node.size,
            node.start,
            node.start + node.size,
            indent = 2 * depth
        );
        if let Some([l, r]) = node.children {
            self.dump_node(l, depth + 1, out);
            self.dump_node(r, depth + 1, out);
        }
    }

    /// Nested JSON view of the tree.
    pub fn to_doc(&self) -> TreeNodeDoc {
        self.node_doc(0)
    }

    fn node_doc(&self, id: usize) -> TreeNodeDoc {
        let node = &self.nodes[id];
        TreeNodeDoc {
            kind: node.kind,
            size: node.size,
            bit_range: [node.start, node.start + node.size],
            children: node
                .children
                .map(|[l, r]| vec![self.node_doc(l), self.node_doc(r)])
                .unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNodeDoc {
    pub kind: NodeKind,
    pub size: usize,
    pub bit_range: [usize; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeNodeDoc>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F: bool = true;
    const I: bool = false;

    fn leaf_list(tree: &DecoderTree) -> Vec<(NodeKind, usize)> {
        tree.leaves().map(|l| (l.kind, l.size)).collect()
    }

    fn mask_16_11() -> Vec<bool> {
        let mut m = vec![false; 16];
        for i in [0, 1, 2, 4, 8] {
            m[i] = true;
        }
        m
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&[F, F, F, F]).unwrap(), NodeKind::Rate0);
        assert_eq!(classify(&[F, F, F, I]).unwrap(), NodeKind::Rep);
        assert_eq!(classify(&[F, I, I, I]).unwrap(), NodeKind::Spc);
        assert_eq!(classify(&[I, I, I, I]).unwrap(), NodeKind::Rate1);
        assert_eq!(classify(&[F, F, I, I]).unwrap(), NodeKind::Branch);
        assert_eq!(classify(&[F]).unwrap(), NodeKind::Rate0);
        assert_eq!(classify(&[I]).unwrap(), NodeKind::Rate1);
        assert_eq!(classify(&[F, I]).unwrap(), NodeKind::Rep);
        assert_eq!(classify(&[I, F]).unwrap(), NodeKind::Branch);
        assert!(classify(&[]).is_err());
        assert!(classify(&[F, F, I]).is_err());
    }

    #[test]
    fn tree_16_11_matches_compact_representation() {
        let tree = DecoderTree::from_frozen_mask(&mask_16_11(), TreeConfig::default()).unwrap();
        assert_eq!(
            leaf_list(&tree),
            vec![(NodeKind::Rep, 4), (NodeKind::Spc, 4), (NodeKind::Spc, 8)]
        );
        let root = tree.root();
        assert_eq!((root.kind, root.size), (NodeKind::Branch, 16));
        let [l, r] = root.children.unwrap();
        assert_eq!((tree.node(l).kind, tree.node(l).size), (NodeKind::Branch, 8));
        assert_eq!((tree.node(r).kind, tree.node(r).bit_range()), (NodeKind::Spc, 8..16));
        assert_eq!(tree.info_bits(), 11);
    }

    #[test]
    fn spc_cap_splits_large_spc() {
        let config = TreeConfig {
            max_spc_size: Some(4),
            max_rep_size: None,
        };
        let tree = DecoderTree::from_frozen_mask(&mask_16_11(), config).unwrap();
        assert_eq!(
            leaf_list(&tree),
            vec![
                (NodeKind::Rep, 4),
                (NodeKind::Spc, 4),
                (NodeKind::Spc, 4),
                (NodeKind::Rate1, 4)
            ]
        );
        assert_eq!(tree.info_bits(), 11);
    }

    #[test]
    fn rep_cap_splits_large_rep() {
        let config = TreeConfig {
            max_spc_size: None,
            max_rep_size: Some(2),
        };
        let tree = DecoderTree::from_frozen_mask(&mask_16_11(), config).unwrap();
        assert_eq!(leaf_list(&tree)[..2], [(NodeKind::Rate0, 2), (NodeKind::Rep, 2)]);
        assert_eq!(tree.info_bits(), 11);
        assert!(DecoderTree::from_frozen_mask(&mask_16_11(), TreeConfig { max_spc_size: Some(0), max_rep_size: None }).is_err());
    }

    #[test]
    fn all_frozen_is_one_rate0_leaf() {
        let tree = DecoderTree::from_frozen_mask(&[true; 8], TreeConfig::default()).unwrap();
        assert_eq!(leaf_list(&tree), vec![(NodeKind::Rate0, 8)]);
        assert_eq!(tree.nodes().len(), 1);
    }

    #[test]
    fn dumps() {
        let tree = DecoderTree::from_frozen_mask(&mask_16_11(), TreeConfig::default()).unwrap();
        let text = tree.dump_text();
        assert_eq!(
            text,
            "Branch(16) [0, 16)\n  Branch(8) [0, 8)\n    Rep(4) [0, 4)\n    Spc(4) [4, 8)\n  Spc(8) [8, 16)\n"
        );
        let json = serde_json::to_value(tree.to_doc()).unwrap();
        assert_eq!(json["children"][1]["kind"], "Spc");
        assert_eq!(json["children"][1]["bit_range"], serde_json::json!([8, 16]));
    }

    proptest! {
        #[test]
        fn leaves_tile_and_carry_k(
            mask in proptest::collection::vec(any::<bool>(), 64),
            spc_cap in proptest::option::of(1usize..64),
            rep_cap in proptest::option::of(1usize..64),
        ) {
            let config = TreeConfig { max_spc_size: spc_cap, max_rep_size: rep_cap };
            let tree = DecoderTree::from_frozen_mask(&mask, config).unwrap();
            let mut next = 0;
            for leaf in tree.leaves() {
                prop_assert_eq!(leaf.start, next);
                next += leaf.size;
                if let (NodeKind::Spc, Some(c)) = (leaf.kind, spc_cap) { prop_assert!(leaf.size <= c); }
                if let (NodeKind::Rep, Some(c)) = (leaf.kind, rep_cap) { prop_assert!(leaf.size <= c); }
            }
            prop_assert_eq!(next, 64);
            prop_assert_eq!(tree.info_bits(), mask.iter().filter(|&&f| !f).count());
        }
    }
}
