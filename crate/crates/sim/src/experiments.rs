//! Monte-Carlo experiment drivers: metric CDFs, ROC, FER/BER and
//! candidate-pruning runs.

use polar_blind::channel::gen_frame;
use polar_blind::decoders::{FastSscDecoder, ListDecoder};
use polar_blind::{ChannelConfig, CodeSpec, Detector, Hypothesis, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::runner::{batched_until, par_trials};
use crate::stats::EmpiricalCdf;

/// The decoder run on frames the detector lets through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SubsequentDecoder {
    Sc,
    Scl { list_size: usize },
}

impl SubsequentDecoder {
    pub fn name(&self) -> String {
        match self {
            SubsequentDecoder::Sc => "sc".into(),
            SubsequentDecoder::Scl { list_size } => format!("scl{list_size}"),
        }
    }
}

/// Prior split of the null hypothesis between NoTx and RndTx.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H0Mix {
    pub notx: f64,
    pub rndtx: f64,
}

impl Default for H0Mix {
    fn default() -> Self {
        H0Mix { notx: 0.5, rndtx: 0.5 }
    }
}

impl H0Mix {
    pub fn new(notx: f64, rndtx: f64) -> Result<Self> {
        let mix = H0Mix { notx, rndtx };
        if !(notx >= 0.0 && rndtx >= 0.0 && ((notx + rndtx) - 1.0).abs() < 1e-9) {
            return Err(SimError::Config(format!(
                "H0 mixture weights {notx}, {rndtx} must be non-negative and sum to 1"
            )));
        }
        Ok(mix)
    }

    /// Trials of each null scenario out of `n`.
    pub fn split(&self, n: u64) -> (u64, u64) {
        let notx = ((self.notx * n as f64).round() as u64).min(n);
        (notx, n - notx)
    }
}

/// Code, detector, Eb/N0 normalization and seed shared by every experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: CodeSpec,
    pub detector: Detector,
    pub rate_for_normalization: f64,
    pub seed: u64,
}

impl Experiment {
    pub fn channel(&self, ebn0_db: f64) -> Result<ChannelConfig> {
        Ok(ChannelConfig::new(ebn0_db, self.rate_for_normalization, self.seed)?)
    }

    /// Detector metric of one generated trial.
    pub fn metric(&self, scenario: Scenario, ebn0_db: f64, trial: u64) -> Result<f64> {
        let frame = gen_frame(scenario, &self.spec, &self.channel(ebn0_db)?, trial)?;
        Ok(self.detector.detect(&frame.llr)?.metric_d)
    }

    /// Runs one trial through the detector and, for RegTx, the subsequent
    /// decoder.
    pub fn trial(
        &self,
        scenario: Scenario,
        ebn0_db: f64,
        trial: u64,
        decoder: &Labeler,
    ) -> Result<TrialRecord> {
        let frame = gen_frame(scenario, &self.spec, &self.channel(ebn0_db)?, trial)?;
        let detection = self.detector.detect(&frame.llr)?;
        let decodable = match &frame.message {
            None => false,
            Some(truth) => match decoder {
                // Fast-SSC reproduces SC bit for bit, so the detector's own
                // codeword is the SC decision.
                Labeler::Sc => match &detection.codeword {
                    Some(cw) => self.spec.message_from_codeword(cw)? == *truth,
                    None => {
                        let fast = FastSscDecoder::from_tree(self.detector.tree().clone());
                        let cw = fast.decode(&frame.llr)?.codeword;
                        self.spec.message_from_codeword(&cw)? == *truth
                    }
                },
                Labeler::Scl(list) => {
                    let out = list.decode(&frame.llr)?;
                    out.crc_pass && out.message == *truth
                }
            },
        };
        Ok(TrialRecord {
            trial_index: trial,
            scenario,
            ebn0_db,
            metric_d: detection.metric_d,
            decodable,
            detector_hypothesis: detection.hypothesis,
        })
    }

    pub fn labeler(&self, decoder: SubsequentDecoder) -> Result<Labeler> {
        Ok(match decoder {
            SubsequentDecoder::Sc => Labeler::Sc,
            SubsequentDecoder::Scl { list_size } => {
                if self.spec.crc().is_none() {
                    return Err(SimError::Config("CA-SCL needs a code with a CRC".into()));
                }
                Labeler::Scl(ListDecoder::new(&self.spec, list_size)?)
            }
        })
    }
}

/// A ready-to-run subsequent decoder.
#[derive(Debug, Clone)]
pub enum Labeler {
    Sc,
    Scl(ListDecoder),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub scenario: Scenario,
    pub ebn0_db: f64,
    pub metric_d: f64,
    /// RegTx frame recovered exactly by the subsequent decoder (CRC passing
    /// for CA-SCL). Always false for NoTx/RndTx.
    pub decodable: bool,
    pub detector_hypothesis: Hypothesis,
}

/// Metric samples per scenario at one operating point (no threshold applied).
pub fn run_metric_cdf(
    exp: &Experiment,
    ebn0_db: f64,
    scenarios: &[Scenario],
    n_trials: u64,
) -> Result<Vec<(Scenario, EmpiricalCdf)>> {
    if n_trials == 0 {
        return Err(SimError::Config("need at least one trial".into()));
    }
    scenarios
        .iter()
        .map(|&s| {
            let samples = par_trials(0..n_trials, |t| exp.metric(s, ebn0_db, t))
                .into_iter()
                .collect::<Result<Vec<f64>>>()?;
            Ok((s, EmpiricalCdf::new(samples)))
        })
        .collect()
}

/// Where the null-hypothesis trials come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H0Source {
    pub mix: H0Mix,
    /// Operating point of the H0 frames; `None` uses the RegTx point.
    pub ebn0_db: Option<f64>,
}

impl Default for H0Source {
    fn default() -> Self {
        H0Source {
            mix: H0Mix::default(),
            ebn0_db: None,
        }
    }
}

impl H0Source {
    /// RndTx only at a fixed operating point: the pessimistic null used for
    /// plotting.
    pub fn worst_case(ebn0_db: f64) -> Self {
        H0Source {
            mix: H0Mix { notx: 0.0, rndtx: 1.0 },
            ebn0_db: Some(ebn0_db),
        }
    }
}

/// `n_h1` RegTx trials labelled by `decoder` plus `n_h0` null trials.
pub fn run_trials(
    exp: &Experiment,
    ebn0_db: f64,
    decoder: SubsequentDecoder,
    n_h1: u64,
    n_h0: u64,
    h0: H0Source,
) -> Result<Vec<TrialRecord>> {
    let labeler = exp.labeler(decoder)?;
    let h0_ebn0 = h0.ebn0_db.unwrap_or(ebn0_db);
    let (n_notx, n_rndtx) = h0.mix.split(n_h0);
    let mut records = Vec::with_capacity((n_h1 + n_h0) as usize);
    for (scenario, count, point) in [
        (Scenario::RegTx, n_h1, ebn0_db),
        (Scenario::NoTx, n_notx, h0_ebn0),
        (Scenario::RndTx, n_rndtx, h0_ebn0),
    ] {
        for r in par_trials(0..count, |t| exp.trial(scenario, point, t, &labeler)) {
            records.push(r?);
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold_d: f64,
    pub p_miss: f64,
    pub p_fa: f64,
    pub n_miss: u64,
    pub n_fa: u64,
    pub n_f1: u64,
    pub n_f0: u64,
}

/// Metric samples split into F1 (decodable RegTx) and F0 (everything else),
/// each sorted.
#[derive(Debug, Clone)]
pub struct LabelledSamples {
    pub f1: Vec<f64>,
    pub f0: Vec<f64>,
}

impl LabelledSamples {
    pub fn from_records(records: &[TrialRecord]) -> Self {
        let (mut f1, mut f0) = (Vec::new(), Vec::new());
        for r in records {
            if r.scenario == Scenario::RegTx && r.decodable {
                f1.push(r.metric_d);
            } else {
                f0.push(r.metric_d);
            }
        }
        f1.sort_by(f64::total_cmp);
        f0.sort_by(f64::total_cmp);
        LabelledSamples { f1, f0 }
    }

    /// `P_miss = Pr(D < d | F1)`, `P_fa = Pr(D ≥ d | F0)`.
    pub fn roc_point(&self, threshold_d: f64) -> RocPoint {
        let n_miss = self.f1.partition_point(|&x| x < threshold_d) as u64;
        let n_fa = (self.f0.len() - self.f0.partition_point(|&x| x < threshold_d)) as u64;
        let (n_f1, n_f0) = (self.f1.len() as u64, self.f0.len() as u64);
        RocPoint {
            threshold_d,
            p_miss: n_miss as f64 / n_f1 as f64,
            p_fa: n_fa as f64 / n_f0 as f64,
            n_miss,
            n_fa,
            n_f1,
            n_f0,
        }
    }

    /// Smallest threshold whose false-alarm count is at most `⌊p_fa · |F0|⌋`.
    pub fn threshold_for_pfa(&self, p_fa: f64) -> Option<f64> {
        let n0 = self.f0.len();
        if n0 == 0 {
            return None;
        }
        let allowed = ((p_fa * n0 as f64).floor() as usize).min(n0);
        Some(if allowed == 0 {
            self.f0[n0 - 1].next_up()
        } else {
            // Thresholds just above a sample exclude it together with its ties.
            let candidate = self.f0[n0 - allowed];
            let above = self.f0.partition_point(|&x| x < candidate);
            if n0 - above <= allowed {
                candidate
            } else {
                candidate.next_up()
            }
        })
    }

    /// 512 evenly spaced thresholds over the sampled range plus the exact
    /// thresholds for `P_fa ∈ {1e-1, 1e-2, 1e-3}`, ascending.
    pub fn default_grid(&self) -> Vec<f64> {
        let all = self.f1.iter().chain(&self.f0);
        let lo = all.clone().cloned().fold(f64::INFINITY, f64::min);
        let hi = all.cloned().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            return Vec::new();
        }
        let mut grid: Vec<f64> = (0..512)
            .map(|i| if i == 511 { hi } else { lo + (hi - lo) * i as f64 / 511.0 })
            .collect();
        grid.extend([1e-1, 1e-2, 1e-3].iter().filter_map(|&p| self.threshold_for_pfa(p)));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }

    pub fn roc(&self, grid: &[f64]) -> Result<Vec<RocPoint>> {
        if self.f1.is_empty() || self.f0.is_empty() {
            return Err(SimError::UndefinedRate(format!(
                "|F1| = {}, |F0| = {}; both classes need samples",
                self.f1.len(),
                self.f0.len()
            )));
        }
        if grid.is_empty() {
            return Err(SimError::Config("threshold grid is empty".into()));
        }
        Ok(grid.iter().map(|&d| self.roc_point(d)).collect())
    }
}

#[derive(Debug, Clone)]
pub struct RocRun {
    pub records: Vec<TrialRecord>,
    pub points: Vec<RocPoint>,
}

/// ROC of the detector at one operating point, with decodability labels from
/// `decoder`. `grid = None` uses [`LabelledSamples::default_grid`].
pub fn run_roc(
    exp: &Experiment,
    ebn0_db: f64,
    decoder: SubsequentDecoder,
    n_per_hypothesis: u64,
    grid: Option<&[f64]>,
    h0: H0Source,
) -> Result<RocRun> {
    let records = run_trials(exp, ebn0_db, decoder, n_per_hypothesis, n_per_hypothesis, h0)?;
    let samples = LabelledSamples::from_records(&records);
    let points = match grid {
        Some(g) => samples.roc(g)?,
        None => samples.roc(&samples.default_grid())?,
    };
    Ok(RocRun { records, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_frames: u64,
    pub min_errors: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FerPoint {
    pub ebn0_db: f64,
    pub fer: f64,
    pub ber: f64,
    pub frames: u64,
    pub frame_errors: u64,
    /// Errors among payload bits (the CRC field is excluded).
    pub bit_errors: u64,
}

impl FerPoint {
    /// Fewer than 10 error events behind the rate.
    pub fn low_confidence(&self) -> bool {
        self.frame_errors < 10
    }
}

const FER_BATCH: u64 = 2000;

/// Frame/bit error rates of `decoder` on RegTx frames. Each point stops at the
/// first batch boundary where `min_errors` frame errors have accrued or
/// `max_frames` frames have run.
pub fn run_fer_ber(
    exp: &Experiment,
    decoder: SubsequentDecoder,
    ebn0_points: &[f64],
    stop: StopRule,
) -> Result<Vec<FerPoint>> {
    if stop.max_frames == 0 || stop.min_errors == 0 {
        return Err(SimError::Config("stop rule needs positive max_frames and min_errors".into()));
    }
    let labeler = exp.labeler(decoder)?;
    let fast = FastSscDecoder::from_tree(exp.detector.tree().clone());
    let payload_len = exp.spec.payload_len();
    ebn0_points
        .iter()
        .map(|&ebn0_db| {
            let channel = exp.channel(ebn0_db)?;
            let one = |t: u64| -> Result<(bool, u64)> {
                let frame = gen_frame(Scenario::RegTx, &exp.spec, &channel, t)?;
                let truth = frame.message.as_ref().expect("RegTx frames carry a message");
                let (message, ok) = match &labeler {
                    Labeler::Sc => {
                        let cw = fast.decode(&frame.llr)?.codeword;
                        (exp.spec.message_from_codeword(&cw)?, true)
                    }
                    Labeler::Scl(list) => {
                        let out = list.decode(&frame.llr)?;
                        (out.message, out.crc_pass)
                    }
                };
                let bit_errors = message[..payload_len]
                    .iter()
                    .zip(&truth[..payload_len])
                    .filter(|(a, b)| a != b)
                    .count() as u64;
                Ok((!ok || message != *truth, bit_errors))
            };
            let mut errors = 0u64;
            let mut seen = 0usize;
            let outcomes = batched_until(stop.max_frames, FER_BATCH, one, |done| {
                for r in &done[seen..] {
                    if let Ok((true, _)) = r {
                        errors += 1;
                    }
                }
                seen = done.len();
                errors >= stop.min_errors || done[..].iter().any(|r| r.is_err())
            });
            let mut point = FerPoint {
                ebn0_db,
                fer: 0.0,
                ber: 0.0,
                frames: outcomes.len() as u64,
                frame_errors: 0,
                bit_errors: 0,
            };
            for r in outcomes {
                let (frame_error, bits) = r?;
                point.frame_errors += u64::from(frame_error);
                point.bit_errors += bits;
            }
            point.fer = point.frame_errors as f64 / point.frames as f64;
            point.ber = point.bit_errors as f64 / (point.frames as f64 * payload_len as f64);
            Ok(point)
        })
        .collect()
}

/// Eb/N0 where the FER curve crosses `target`, by linear interpolation of
/// log FER between the two points that bracket it. Points must be sorted by
/// Eb/N0.
pub fn fer_crossing(points: &[FerPoint], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if !(a.fer >= target && b.fer < target && b.fer > 0.0) {
            return None;
        }
        let t = (a.fer.ln() - target.ln()) / (a.fer.ln() - b.fer.ln());
        Some(a.ebn0_db + t * (b.ebn0_db - a.ebn0_db))
    })
}

/// Runs `grid` point by point, stopping after the first point whose FER falls
/// below `target`.
pub fn run_fer_until_below(
    exp: &Experiment,
    decoder: SubsequentDecoder,
    grid: &[f64],
    stop: StopRule,
    target: f64,
) -> Result<Vec<FerPoint>> {
    let mut points = Vec::new();
    for &ebn0 in grid {
        let p = run_fer_ber(exp, decoder, &[ebn0], stop)?.remove(0);
        points.push(p);
        if p.fer < target {
            break;
        }
    }
    Ok(points)
}

/// Outcome of blind detection over repeated candidate search spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub grids: u64,
    pub n_candidates: u64,
    pub n_valid: u64,
    pub threshold_d: f64,
    /// Candidates kept, summed over grids.
    pub retained: u64,
    pub retained_per_grid: f64,
    pub retention_regtx: f64,
    pub retention_rndtx: f64,
    pub retention_notx: f64,
    /// Grids in which every valid candidate was kept.
    pub grids_all_valid_retained: u64,
    /// Per grid, the slots of the valid candidates that survived.
    pub surviving_valid: Vec<Vec<u64>>,
}

/// Builds `grids` search spaces of `n_candidates` blocks, `n_valid` of which
/// are RegTx frames in the leading slots and the rest null frames split by
/// `mix`, and reports what the detector keeps.
pub fn run_search_space(
    exp: &Experiment,
    ebn0_db: f64,
    n_candidates: u64,
    n_valid: u64,
    grids: u64,
    mix: H0Mix,
) -> Result<SearchReport> {
    if n_valid > n_candidates {
        return Err(SimError::Config(format!(
            "{n_valid} valid candidates do not fit in {n_candidates}"
        )));
    }
    let (n_notx, _) = mix.split(n_candidates - n_valid);
    let scenario_of = |slot: u64| {
        if slot < n_valid {
            Scenario::RegTx
        } else if slot < n_valid + n_notx {
            Scenario::NoTx
        } else {
            Scenario::RndTx
        }
    };
    let kept = par_trials(0..grids * n_candidates, |t| {
        let slot = t % n_candidates;
        exp.metric(scenario_of(slot), ebn0_db, t)
            .map(|d| exp.detector.config().decide(d) == Hypothesis::H1)
    })
    .into_iter()
    .collect::<Result<Vec<bool>>>()?;

    let mut per_class = [(0u64, 0u64); 3];
    let class = |s: Scenario| match s {
        Scenario::RegTx => 0,
        Scenario::RndTx => 1,
        Scenario::NoTx => 2,
    };
    let mut surviving_valid = Vec::with_capacity(grids as usize);
    let mut all_valid = 0;
    for grid in kept.chunks(n_candidates.max(1) as usize) {
        let mut survivors = Vec::new();
        for (slot, &k) in grid.iter().enumerate() {
            let c = class(scenario_of(slot as u64));
            per_class[c].0 += u64::from(k);
            per_class[c].1 += 1;
            if k && (slot as u64) < n_valid {
                survivors.push(slot as u64);
            }
        }
        if survivors.len() as u64 == n_valid {
            all_valid += 1;
        }
        surviving_valid.push(survivors);
    }
    let rate = |(k, n): (u64, u64)| if n == 0 { f64::NAN } else { k as f64 / n as f64 };
    let retained: u64 = per_class.iter().map(|c| c.0).sum();
    Ok(SearchReport {
        grids,
        n_candidates,
        n_valid,
        threshold_d: exp.detector.config().threshold_d,
        retained,
        retained_per_grid: retained as f64 / grids.max(1) as f64,
        retention_regtx: rate(per_class[0]),
        retention_rndtx: rate(per_class[1]),
        retention_notx: rate(per_class[2]),
        grids_all_valid_retained: all_valid,
        surviving_valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(ebn0_db: f64, fer: f64) -> FerPoint {
        FerPoint { ebn0_db, fer, ber: 0.0, frames: 1, frame_errors: 0, bit_errors: 0 }
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let pts = [pt(1.0, 1e-1), pt(2.0, 1e-2), pt(3.0, 1e-4)];
        assert!((fer_crossing(&pts, 1e-3).unwrap() - 2.5).abs() < 1e-12);
        assert!((fer_crossing(&pts, 1e-2).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fer_crossing(&pts, 1e-5), None);
    }

    #[test]
    fn h0_split_rounds() {
        assert_eq!(H0Mix::default().split(5), (3, 2));
        assert_eq!(H0Mix::new(0.0, 1.0).unwrap().split(7), (0, 7));
        assert!(H0Mix::new(0.6, 0.6).is_err());
    }
}
