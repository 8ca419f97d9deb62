//! Independent oracles for construction, encoding and decoding.

use polar_blind::code::{construct_frozen_set, encode_nonsystematic};
use polar_blind::decoders::{FastSscDecoder, ScDecoder};
use polar_blind::detect::{Detector, DetectorConfig, Hypothesis};
use polar_blind::tree::{NodeKind, TreeConfig};
use polar_blind::{ChannelConfig, CodeSpec, Scenario};
use proptest::prelude::*;

/// `ln φ(x)` with `φ(x) = E[2 / (1 + e^L)]`, `L ~ N(x, 2x)`, by trapezoidal
/// quadrature in the log domain. No approximation formula involved.
fn ln_phi_exact(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let sd = (2.0 * x).sqrt();
    let (lo, hi) = (-x - 14.0 * sd, x + 14.0 * sd);
    let points = 3001;
    let du = (hi - lo) / (points - 1) as f64;
    let norm = 0.5 * (4.0 * std::f64::consts::PI * x).ln();
    let terms: Vec<f64> = (0..points)
        .map(|i| {
            let u = lo + du * i as f64;
            let softplus = if u > 0.0 { u + (-u).exp().ln_1p() } else { u.exp().ln_1p() };
            std::f64::consts::LN_2 - softplus - (u - x).powi(2) / (4.0 * x) - norm
        })
        .collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln() + du.ln()
}

fn inv_ln_phi_exact(l: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while ln_phi_exact(hi) > l {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ln_phi_exact(mid) > l {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ga_frozen_oracle(n: usize, k: usize, ebn0_db: f64) -> Vec<usize> {
    let rate = k as f64 / n as f64;
    let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0));
    let mut means = vec![2.0 / sigma2];
    while means.len() < n {
        let mut next = Vec::with_capacity(2 * means.len());
        for &m in &means {
            let l = ln_phi_exact(m);
            next.push(inv_ln_phi_exact(l + (2.0 - l.exp()).ln()));
            next.push(2.0 * m);
        }
        means = next;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
    let mut frozen = order[..n - k].to_vec();
    frozen.sort_unstable();
    frozen
}

#[test]
fn construction_matches_exact_density_evolution() {
    for (n, k) in [(16, 11), (64, 32), (512, 80)] {
        assert_eq!(construct_frozen_set(n, k, 2.0).unwrap(), ga_frozen_oracle(n, k, 2.0), "({n}, {k})");
    }
}

fn kronecker_encode(u: &[u8]) -> Vec<u8> {
    let n = u.len();
    // F^{⊗n}[i][j] = 1 iff every bit of j is set in i.
    (0..n)
        .map(|j| (0..n).filter(|&i| i & j == j).fold(0, |acc, i| acc ^ u[i]))
        .collect()
}

#[test]
fn butterfly_matches_matrix_exhaustively() {
    for n in [2usize, 4, 8] {
        for word in 0u32..(1 << n) {
            let u: Vec<u8> = (0..n).map(|i| ((word >> i) & 1) as u8).collect();
            assert_eq!(encode_nonsystematic(&u).unwrap(), kronecker_encode(&u));
        }
    }
}

fn noisy_frames(spec: &CodeSpec, ebn0: f64, count: u64, seed: u64) -> Vec<Vec<f64>> {
    let cfg = ChannelConfig::for_code(spec, ebn0, seed).unwrap();
    (0..count)
        .map(|t| polar_blind::channel::gen_frame(Scenario::RegTx, spec, &cfg, t).unwrap().llr)
        .collect()
}

#[test]
fn fast_ssc_equals_sc_with_and_without_caps() {
    let spec = CodeSpec::construct(512, 80, 2.0, None, true).unwrap();
    let sc = ScDecoder::new(&spec);
    let configs = [
        TreeConfig::default(),
        TreeConfig { max_spc_size: Some(4), max_rep_size: None },
        TreeConfig { max_spc_size: Some(2), max_rep_size: Some(4) },
    ];
    let decoders: Vec<_> = configs.iter().map(|c| FastSscDecoder::new(&spec, *c).unwrap()).collect();
    for llr in noisy_frames(&spec, 1.0, 300, 17) {
        let reference = sc.decode(&llr).unwrap();
        for d in &decoders {
            assert_eq!(d.decode(&llr).unwrap(), reference);
        }
    }
}

#[test]
fn detector_codeword_is_the_fast_ssc_codeword() {
    let spec = CodeSpec::construct(512, 80, 2.0, None, true).unwrap();
    let det = Detector::new(&spec, TreeConfig::default(), DetectorConfig::default()).unwrap();
    let fast = FastSscDecoder::new(&spec, TreeConfig::default()).unwrap();
    for llr in noisy_frames(&spec, 2.0, 200, 5) {
        let r = det.detect(&llr).unwrap();
        assert_eq!(r.codeword.unwrap(), fast.decode(&llr).unwrap().codeword);
    }
}

#[test]
fn metric_without_spc_is_rate0_plus_rep() {
    let spec = CodeSpec::construct(512, 80, 2.0, None, true).unwrap();
    let cfg = DetectorConfig { spc_update_fraction: 0.0, ..DetectorConfig::default() };
    let det = Detector::new(&spec, TreeConfig::default(), cfg).unwrap();
    let full = Detector::new(&spec, TreeConfig::default(), DetectorConfig::default()).unwrap();
    for llr in noisy_frames(&spec, 2.0, 50, 6) {
        let (r, trace) = det.detect_with_trace(&llr).unwrap();
        let kept: f64 = trace
            .iter()
            .filter(|c| matches!(c.kind, NodeKind::Rate0 | NodeKind::Rep))
            .map(|c| c.delta_d)
            .sum();
        assert!(trace.iter().filter(|c| c.kind == NodeKind::Spc).all(|c| c.delta_d == 0.0));
        assert!((r.metric_d - kept).abs() <= 1e-9 * kept.abs().max(1.0));
        let (_, full_trace) = full.detect_with_trace(&llr).unwrap();
        let sum: f64 = full_trace.iter().map(|c| c.delta_d).sum();
        assert!((full_trace.last().unwrap().cumulative_d - sum).abs() < 1e-9 * sum.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_llrs_scales_the_metric(seed in any::<u64>(), pow in -3i32..4) {
        let spec = CodeSpec::construct(128, 30, 2.0, None, false).unwrap();
        let det = Detector::new(&spec, TreeConfig::default(), DetectorConfig::default()).unwrap();
        let sc = ScDecoder::new(&spec);
        let llr = noisy_frames(&spec, 1.5, 1, seed).pop().unwrap();
        let c = 2f64.powi(pow);
        let scaled: Vec<f64> = llr.iter().map(|a| a * c).collect();
        let (a, b) = (det.detect(&llr).unwrap(), det.detect(&scaled).unwrap());
        prop_assert_eq!(b.metric_d, c * a.metric_d);
        prop_assert_eq!(a.codeword, b.codeword);
        prop_assert_eq!(sc.decode(&llr).unwrap(), sc.decode(&scaled).unwrap());
    }

    #[test]
    fn lowering_the_threshold_never_rejects(seed in any::<u64>(), d in -20.0f64..40.0, drop in 0.0f64..10.0) {
        let spec = CodeSpec::construct(128, 30, 2.0, None, false).unwrap();
        let llr = noisy_frames(&spec, 1.5, 1, seed).pop().unwrap();
        let hi = Detector::new(&spec, TreeConfig::default(), DetectorConfig::with_threshold(d)).unwrap();
        let lo = hi.with_threshold(d - drop);
        let (a, b) = (hi.detect(&llr).unwrap(), lo.detect(&llr).unwrap());
        prop_assert_eq!(a.metric_d, b.metric_d);
        if a.hypothesis == Hypothesis::H1 {
            prop_assert_eq!(b.hypothesis, Hypothesis::H1);
        }
    }
}
