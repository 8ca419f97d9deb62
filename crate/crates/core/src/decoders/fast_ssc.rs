use std::ops::ControlFlow;

use crate::code::{encode_nonsystematic, CodeSpec};
use crate::error::Result;
use crate::tree::{DecoderTree, Node, TreeConfig};
use crate::Llr;

use super::{check_llr, decode_leaf_into, f_minsum, g_update, Decoded};

/// Fast-SSC decoder: depth-first over the compact tree, decoding every leaf
/// with its dedicated constituent-code rule.
#[derive(Debug, Clone)]
pub struct FastSscDecoder {
    tree: DecoderTree,
}

impl FastSscDecoder {
    pub fn new(spec: &CodeSpec, config: TreeConfig) -> Result<Self> {
        Ok(Self::from_tree(DecoderTree::build(spec, config)?))
    }

    pub fn from_tree(tree: DecoderTree) -> Self {
        FastSscDecoder { tree }
    }

    pub fn tree(&self) -> &DecoderTree {
        &self.tree
    }

    pub fn decode(&self, llr: &[Llr]) -> Result<Decoded> {
        let mut codeword = vec![0u8; self.tree.block_len()];
        let _ = self.traverse(llr, &mut codeword, |_, _| ControlFlow::<()>::Continue(()))?;
        let u = encode_nonsystematic(&codeword)?;
        Ok(Decoded { codeword, u })
    }

    /// Runs the traversal, calling `visit(leaf, alpha)` after each leaf is
    /// decoded into `codeword`. A `Break` stops the traversal at once, leaving
    /// `codeword` partially built.
    pub(crate) fn traverse<B, V>(&self, llr: &[Llr], codeword: &mut [u8], mut visit: V) -> Result<ControlFlow<B>>
    where
        V: FnMut(&Node, &[Llr]) -> ControlFlow<B>,
    {
        check_llr(llr, self.tree.block_len())?;
        let mut scratch = vec![0.0; self.tree.block_len()];
        Ok(self.visit_node(0, llr, codeword, &mut scratch, &mut visit))
    }

    fn visit_node<B, V>(&self, id: usize, alpha: &[Llr], beta: &mut [u8], scratch: &mut [Llr], visit: &mut V) -> ControlFlow<B>
    where
        V: FnMut(&Node, &[Llr]) -> ControlFlow<B>,
    {
        let node = self.tree.node(id);
        let Some([left, right]) = node.children else {
            decode_leaf_into(node.kind, alpha, beta);
            return visit(node, alpha);
        };
        let half = alpha.len() / 2;
        let (buf, rest) = scratch.split_at_mut(half);
        let (a_lo, a_hi) = alpha.split_at(half);
        for ((o, &a), &b) in buf.iter_mut().zip(a_lo).zip(a_hi) {
            *o = f_minsum(a, b);
        }
        let (b_lo, b_hi) = beta.split_at_mut(half);
        self.visit_node(left, buf, b_lo, rest, visit)?;
        for (((o, &a), &b), &bit) in buf.iter_mut().zip(a_lo).zip(a_hi).zip(b_lo.iter()) {
            *o = g_update(a, b, bit);
        }
        self.visit_node(right, buf, b_hi, rest, visit)?;
        for (l, &r) in b_lo.iter_mut().zip(b_hi.iter()) {
            *l ^= r;
        }
        ControlFlow::Continue(())
    }
}
