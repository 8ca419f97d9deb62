//! Successive-cancellation family decoders over min-sum LLR arithmetic.
//!
//! All decoders share the same `f`/`g` kernels and hard-decision rule, which
//! is what makes SC, fast-SSC and list decoding with `L = 1` agree bit for bit.

mod fast_ssc;
mod list;
mod sc;

pub use fast_ssc::FastSscDecoder;
pub use list::{ListDecodeResult, ListDecoder};
pub use sc::ScDecoder;

use crate::channel::hard_decision;
use crate::error::{Error, Result};
use crate::tree::NodeKind;
use crate::Llr;

/// Min-sum check-node update: `sign(a)·sign(b)·min(|a|, |b|)`, `sign(0) = +1`.
#[inline]
pub fn f_minsum(a: Llr, b: Llr) -> Llr {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// Variable-node update: `b + (1 − 2u)·a`.
#[inline]
pub fn g_update(a: Llr, b: Llr, u: u8) -> Llr {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

/// Hard output of a decoder: the codeword estimate and the `u` behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub codeword: Vec<u8>,
    pub u: Vec<u8>,
}

/// `Σ α` folded by repeated halving, `α[i] ← α[i + h] + α[i]`. This is the
/// exact operation order SC follows down the right spine of a repetition node.
pub(crate) fn halving_sum(alpha: &[Llr]) -> Llr {
    let mut v = alpha.to_vec();
    let mut len = v.len();
    while len > 1 {
        let h = len / 2;
        for i in 0..h {
            v[i] = v[i + h] + v[i];
        }
        len = h;
    }
    v[0]
}

/// Decodes one constituent code into `beta` (its codeword).
pub(crate) fn decode_leaf_into(kind: NodeKind, alpha: &[Llr], beta: &mut [u8]) {
    match kind {
        NodeKind::Rate0 => beta.fill(0),
        NodeKind::Rate1 => {
            for (b, &a) in beta.iter_mut().zip(alpha) {
                *b = hard_decision(a);
            }
        }
        NodeKind::Rep => beta.fill(hard_decision(halving_sum(alpha))),
        NodeKind::Spc => {
            let mut parity = 0u8;
            let mut weakest = 0;
            for (i, (b, &a)) in beta.iter_mut().zip(alpha).enumerate() {
                *b = hard_decision(a);
                parity ^= *b;
                if a.abs() < alpha[weakest].abs() {
                    weakest = i;
                }
            }
            beta[weakest] ^= parity;
        }
        NodeKind::Branch => unreachable!("branch nodes are not leaves"),
    }
}

/// Decodes a constituent code of the given kind.
pub fn decode_leaf(kind: NodeKind, alpha: &[Llr]) -> Result<Vec<u8>> {
    let len = alpha.len();
    let size_ok = match kind {
        NodeKind::Branch => false,
        NodeKind::Spc => len >= 2 && len.is_power_of_two(),
        _ => len >= 1 && len.is_power_of_two(),
    };
    if !size_ok {
        return Err(Error::InvalidParameter(format!(
            "cannot decode a {kind} leaf of size {len}"
        )));
    }
    let mut beta = vec![0u8; len];
    decode_leaf_into(kind, alpha, &mut beta);
    Ok(beta)
}

pub(crate) fn check_llr(llr: &[Llr], n: usize) -> Result<()> {
    if llr.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: llr.len(),
        });
    }
    if let Some(i) = llr.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("LLR at index {i} is not finite")));
    }
    Ok(())
}
