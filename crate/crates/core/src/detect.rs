//! Blind detection metric.
//!
//! While a fast-SSC decoder walks the compact tree, every leaf adds a
//! kind-specific term to a running metric `D` (starting at 0):
//!
//! | leaf   | ΔD                                    |
//! |--------|---------------------------------------|
//! | Rate-0 | `(1/Nv) Σ α`                          |
//! | Rate-1 | 0                                     |
//! | Rep    | `(1/Nv) |Σ α|`                        |
//! | SPC    | `(−1)^p min |α|`, `p` = hard parity   |
//!
//! The frame is accepted (H1) when `D ≥ d`. Large `D` means the LLRs look
//! like a noisy codeword of this particular code.

use std::fmt::Write as _;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::channel::hard_decision;
use crate::code::CodeSpec;
use crate::decoders::FastSscDecoder;
use crate::error::{Error, Result};
use crate::tree::{DecoderTree, NodeKind, TreeConfig};
use crate::Llr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// No frame of this code present.
    H0,
    /// A frame of this code present.
    H1,
}

/// Accept-only early exit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyStop {
    pub accept_at: f64,
    pub min_fraction_traversed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub threshold_d: f64,
    /// SPC leaves larger than this add nothing to `D`.
    pub spc_max_size: Option<usize>,
    /// Only the first `⌈fraction · #SPC⌉` SPC leaves (traversal order) update `D`.
    pub spc_update_fraction: f64,
    pub spc_scale: f64,
    pub early_stop: Option<EarlyStop>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            threshold_d: 0.0,
            spc_max_size: None,
            spc_update_fraction: 1.0,
            spc_scale: 1.0,
            early_stop: None,
        }
    }
}

impl DetectorConfig {
    pub fn with_threshold(threshold_d: f64) -> Self {
        DetectorConfig {
            threshold_d,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.threshold_d.is_nan() {
            return bad("threshold is NaN".into());
        }
        if self.spc_max_size == Some(0) {
            return bad("spc_max_size must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.spc_update_fraction) {
            return bad(format!("spc_update_fraction {} outside [0, 1]", self.spc_update_fraction));
        }
        if !(self.spc_scale > 0.0 && self.spc_scale.is_finite()) {
            return bad(format!("spc_scale {} must be positive", self.spc_scale));
        }
        if let Some(es) = &self.early_stop {
            if !(es.min_fraction_traversed > 0.0 && es.min_fraction_traversed <= 1.0) {
                return bad(format!(
                    "min_fraction_traversed {} outside (0, 1]",
                    es.min_fraction_traversed
                ));
            }
            if es.accept_at.is_nan() {
                return bad("early-stop accept_at is NaN".into());
            }
        }
        Ok(())
    }

    /// Decision rule: `H1 ⇔ D ≥ d`.
    pub fn decide(&self, metric_d: f64) -> Hypothesis {
        if metric_d >= self.threshold_d {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub metric_d: f64,
    pub hypothesis: Hypothesis,
    /// Share of the `N` u-positions covered by the leaves visited.
    pub traversed_fraction: f64,
    /// Fast-SSC codeword estimate; absent after an early accept.
    pub codeword: Option<Vec<u8>>,
}

/// One leaf's update, for debugging traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafContribution {
    pub leaf_index: usize,
    pub kind: NodeKind,
    pub size: usize,
    pub delta_d: f64,
    pub cumulative_d: f64,
}

/// Rate-0 update: `D + (1/Nv) Σ α`.
pub fn metric_update_rate0(d_prev: f64, alpha: &[Llr]) -> f64 {
    d_prev + alpha.iter().sum::<f64>() / alpha.len() as f64
}

/// Repetition update: `D + (1/Nv) |Σ α|`; never decreases `D`.
pub fn metric_update_rep(d_prev: f64, alpha: &[Llr]) -> f64 {
    d_prev + alpha.iter().sum::<f64>().abs() / alpha.len() as f64
}

/// SPC update: `D ± scale · min |α|`, `+` when the hard decisions satisfy the
/// parity. Leaves above `config.spc_max_size` leave `D` unchanged.
pub fn metric_update_spc(d_prev: f64, alpha: &[Llr], config: &DetectorConfig) -> f64 {
    if config.spc_max_size.is_some_and(|cap| alpha.len() > cap) {
        return d_prev;
    }
    d_prev + config.spc_scale * spc_term(alpha)
}

fn spc_term(alpha: &[Llr]) -> f64 {
    let parity = alpha.iter().fold(0u8, |p, &a| p ^ hard_decision(a));
    let weakest = alpha.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()));
    if parity == 0 {
        weakest
    } else {
        -weakest
    }
}

/// Fast-SSC decoder with the detection metric riding along.
#[derive(Debug, Clone)]
pub struct Detector {
    decoder: FastSscDecoder,
    config: DetectorConfig,
    /// Per leaf (traversal order): whether an SPC leaf updates `D`.
    spc_counts: Vec<bool>,
}

impl Detector {
    pub fn new(spec: &CodeSpec, tree_config: TreeConfig, config: DetectorConfig) -> Result<Self> {
        Self::from_tree(DecoderTree::build(spec, tree_config)?, config)
    }

    pub fn from_tree(tree: DecoderTree, config: DetectorConfig) -> Result<Self> {
        config.validate()?;
        let n_spc = tree.count_leaves(NodeKind::Spc);
        let active = (config.spc_update_fraction * n_spc as f64).ceil() as usize;
        let mut ordinal = 0;
        let spc_counts = tree
            .leaves()
            .map(|leaf| {
                if leaf.kind != NodeKind::Spc {
                    return false;
                }
                ordinal += 1;
                ordinal <= active
            })
            .collect();
        Ok(Detector {
            decoder: FastSscDecoder::from_tree(tree),
            config,
            spc_counts,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn tree(&self) -> &DecoderTree {
        self.decoder.tree()
    }

    /// Same detector with another threshold; the tree is reused.
    pub fn with_threshold(&self, threshold_d: f64) -> Self {
        let mut d = self.clone();
        d.config.threshold_d = threshold_d;
        d
    }

    pub fn detect(&self, llr: &[Llr]) -> Result<DetectionResult> {
        self.run(llr, |_| {})
    }

    /// Like [`detect`](Self::detect) but also returns every leaf's update.
    pub fn detect_with_trace(&self, llr: &[Llr]) -> Result<(DetectionResult, Vec<LeafContribution>)> {
        let mut trace = Vec::with_capacity(self.spc_counts.len());
        let result = self.run(llr, |c| trace.push(c))?;
        Ok((result, trace))
    }

    fn leaf_delta(&self, leaf_index: usize, kind: NodeKind, alpha: &[Llr]) -> f64 {
        match kind {
            NodeKind::Rate0 => metric_update_rate0(0.0, alpha),
            NodeKind::Rep => metric_update_rep(0.0, alpha),
            NodeKind::Spc if self.spc_counts[leaf_index] => metric_update_spc(0.0, alpha, &self.config),
            _ => 0.0,
        }
    }

    fn run(&self, llr: &[Llr], mut on_leaf: impl FnMut(LeafContribution)) -> Result<DetectionResult> {
        let n = self.decoder.tree().block_len();
        let mut codeword = vec![0u8; n];
        let mut metric = 0.0;
        let mut covered = 0usize;
        let mut leaf_index = 0usize;
        let flow = self.decoder.traverse(llr, &mut codeword, |leaf, alpha| {
            let delta = self.leaf_delta(leaf_index, leaf.kind, alpha);
            metric += delta;
            covered = leaf.start + leaf.size;
            on_leaf(LeafContribution {
                leaf_index,
                kind: leaf.kind,
                size: leaf.size,
                delta_d: delta,
                cumulative_d: metric,
            });
            leaf_index += 1;
            match &self.config.early_stop {
                Some(es) if covered < n && metric >= es.accept_at => {
                    let fraction = covered as f64 / n as f64;
                    if fraction >= es.min_fraction_traversed {
                        ControlFlow::Break(fraction)
                    } else {
                        ControlFlow::Continue(())
                    }
                }
                _ => ControlFlow::Continue(()),
            }
        })?;
        Ok(match flow {
            ControlFlow::Break(fraction) => DetectionResult {
                metric_d: metric,
                hypothesis: Hypothesis::H1,
                traversed_fraction: fraction,
                codeword: None,
            },
            ControlFlow::Continue(()) => DetectionResult {
                metric_d: metric,
                hypothesis: self.config.decide(metric),
                traversed_fraction: 1.0,
                codeword: Some(codeword),
            },
        })
    }
}

/// CSV rendering of a metric trace.
pub fn trace_to_csv(trace: &[LeafContribution]) -> String {
    let mut out = String::from("leaf_index,kind,Nv,delta_d,cumulative_d\n");
    for c in trace {
        let _ = writeln!(
            out,
            "{},{},{},{:.16e},{:.16e}",
            c.leaf_index, c.kind, c.size, c.delta_d, c.cumulative_d
        );
    }
    out
}
