//! CRC-aided successive-cancellation list decoding.
//!
//! Layered LLR and partial-sum buffers per path, shared between paths behind
//! `Rc` and copied only when a path writes to a layer it shares.

use std::rc::Rc;

use crate::channel::hard_decision;
use crate::code::{encode_nonsystematic, CodeSpec};
use crate::error::{Error, Result};
use crate::Llr;

use super::{check_llr, f_minsum, g_update};

#[derive(Debug, Clone, PartialEq)]
pub struct ListDecodeResult {
    pub codeword: Vec<u8>,
    pub u: Vec<u8>,
    /// The `k`-bit message read off the selected path.
    pub message: Vec<u8>,
    /// CRC verdict on `message`; `true` when the code has no CRC.
    pub crc_pass: bool,
    pub path_metric: f64,
}

#[derive(Debug, Clone)]
pub struct ListDecoder {
    spec: CodeSpec,
    list_size: usize,
}

#[derive(Clone)]
struct Path {
    /// `llr[d]` holds the α of the active node at depth `d` (`N >> d` values);
    /// index 0 is unused, the channel LLRs stand in for it.
    llr: Vec<Rc<Vec<Llr>>>,
    /// `bits[d]` collects the β of the node at depth `d` being assembled.
    bits: Vec<Rc<Vec<u8>>>,
    u: Rc<Vec<u8>>,
    metric: f64,
}

impl ListDecoder {
    pub fn new(spec: &CodeSpec, list_size: usize) -> Result<Self> {
        if list_size == 0 {
            return Err(Error::InvalidParameter("list size must be at least 1".into()));
        }
        Ok(ListDecoder {
            spec: spec.clone(),
            list_size,
        })
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn decode(&self, channel: &[Llr]) -> Result<ListDecodeResult> {
        let n = self.spec.block_len();
        check_llr(channel, n)?;
        let stages = self.spec.stages() as usize;

        let root = Path {
            llr: (0..=stages).map(|d| Rc::new(vec![0.0; if d == 0 { 0 } else { n >> d }])).collect(),
            bits: (0..stages).map(|d| Rc::new(vec![0u8; n >> d])).collect(),
            u: Rc::new(vec![0u8; n]),
            metric: 0.0,
        };
        let mut paths = vec![root];
        let mut candidates: Vec<(f64, usize, u8)> = Vec::with_capacity(2 * self.list_size);

        for i in 0..n {
            for path in paths.iter_mut() {
                path.compute_leaf_llr(channel, i, stages);
            }
            if self.spec.is_frozen(i) {
                for path in paths.iter_mut() {
                    let alpha = path.llr[stages][0];
                    if hard_decision(alpha) != 0 {
                        path.metric += alpha.abs();
                    }
                    path.commit(i, 0, stages);
                }
                continue;
            }
            candidates.clear();
            for (p, path) in paths.iter().enumerate() {
                let alpha = path.llr[stages][0];
                let hard = hard_decision(alpha);
                candidates.push((path.metric, p, hard));
                candidates.push((path.metric + alpha.abs(), p, hard ^ 1));
            }
            // Stable: on equal metrics the earlier path and its hard decision win.
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
            candidates.truncate(self.list_size);
            paths = candidates
                .iter()
                .map(|&(metric, p, bit)| {
                    let mut path = paths[p].clone();
                    path.metric = metric;
                    path.commit(i, bit, stages);
                    path
                })
                .collect();
        }

        paths.sort_by(|a, b| a.metric.total_cmp(&b.metric));
        let mut fallback = None;
        for path in &paths {
            let u = path.u.as_ref().clone();
            let codeword = encode_nonsystematic(&u)?;
            let message = self.spec.message_from_codeword(&codeword)?;
            let crc_pass = self.spec.crc_passes(&message);
            let result = ListDecodeResult {
                codeword,
                u,
                message,
                crc_pass,
                path_metric: path.metric,
            };
            if crc_pass {
                return Ok(result);
            }
            fallback.get_or_insert(result);
        }
        Ok(fallback.expect("at least one path survives"))
    }
}

impl Path {
    /// Brings `llr[stages][0]` up to date for leaf `i`, reusing every layer
    /// shared with leaf `i − 1`.
    fn compute_leaf_llr(&mut self, channel: &[Llr], i: usize, stages: usize) {
        let first = if i == 0 { 1 } else { stages - i.trailing_zeros() as usize };
        for d in first..=stages {
            let (parents, rest) = self.llr.split_at_mut(d);
            let parent: &[Llr] = if d == 1 { channel } else { &parents[d - 1] };
            let out = Rc::make_mut(&mut rest[0]);
            let half = out.len();
            let (a_lo, a_hi) = parent.split_at(half);
            if d == first && i != 0 {
                let left = &self.bits[d - 1][..half];
                for (((o, &a), &b), &bit) in out.iter_mut().zip(a_lo).zip(a_hi).zip(left) {
                    *o = g_update(a, b, bit);
                }
            } else {
                for ((o, &a), &b) in out.iter_mut().zip(a_lo).zip(a_hi) {
                    *o = f_minsum(a, b);
                }
            }
        }
    }

    /// Records `u_i = bit` and folds it into the partial sums.
    fn commit(&mut self, i: usize, bit: u8, stages: usize) {
        Rc::make_mut(&mut self.u)[i] = bit;
        let mut d = stages;
        let is_right = |d: usize| (i >> (stages - d)) & 1 == 1;
        // Leaf level: β is the single bit.
        let parent = Rc::make_mut(&mut self.bits[d - 1]);
        if !is_right(d) {
            parent[0] = bit;
            return;
        }
        parent[0] ^= bit;
        parent[1] = bit;
        d -= 1;
        while d > 0 {
            let (lower, upper) = self.bits.split_at_mut(d);
            let child: &[u8] = &upper[0];
            let parent = Rc::make_mut(&mut lower[d - 1]);
            let half = child.len();
            if !is_right(d) {
                parent[..half].copy_from_slice(child);
                return;
            }
            let (p_lo, p_hi) = parent.split_at_mut(half);
            for (l, &c) in p_lo.iter_mut().zip(child) {
                *l ^= c;
            }
            p_hi.copy_from_slice(child);
            d -= 1;
        }
    }
}
