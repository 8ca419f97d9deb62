use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polar_blind::channel::gen_frame;
use polar_blind::code::ga_llr_means;
use polar_blind::decoders::{FastSscDecoder, ListDecoder};
use polar_blind::Scenario;
use polar_sim::config::{Params, Settings};
use polar_sim::emit::{self, Cell, Format, Metadata, Table};
use polar_sim::experiments::{
    run_fer_ber, run_metric_cdf, run_roc, run_search_space, H0Source, SubsequentDecoder,
};
use polar_sim::runner::par_trials;
use polar_sim::stats::EmpiricalCdf;
use polar_sim::{Result, SimError};

#[derive(Parser)]
#[command(name = "polar-sim", version, about = "Polar-code blind detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frozen set and bit-channel reliabilities of the code.
    Construct(Common),
    /// Random payloads and their codewords.
    Encode(Common),
    /// Per-frame decoding outcomes on RegTx frames.
    Decode(Common),
    /// Per-trial detector records.
    Detect(Common),
    /// Empirical CDFs of the detection metric.
    Cdf(Common),
    /// ROC of the detector with decodability labels.
    Roc(Common),
    /// FER/BER of the subsequent decoder.
    Fer(Common),
    /// Candidate pruning over repeated search spaces.
    Searchspace(Common),
}

#[derive(Args)]
struct Common {
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    params: Params,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (command, common) = match cli.command {
        Command::Construct(c) => ("construct", c),
        Command::Encode(c) => ("encode", c),
        Command::Decode(c) => ("decode", c),
        Command::Detect(c) => ("detect", c),
        Command::Cdf(c) => ("cdf", c),
        Command::Roc(c) => ("roc", c),
        Command::Fer(c) => ("fer", c),
        Command::Searchspace(c) => ("searchspace", c),
    };
    let params = match &common.config {
        Some(path) => Params::from_file(path)?.overlay(&common.params),
        None => common.params.clone(),
    };
    let settings = params.resolve()?;
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(SimError::Config("threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| SimError::Config(e.to_string()))?;
    }
    let meta = Metadata::new(settings.experiment.seed, settings.config_hash.clone())
        .note("command", command);
    match command {
        "construct" => construct(&settings, meta),
        "encode" => encode(&settings, meta),
        "decode" => decode(&settings, meta),
        "detect" => detect(&settings, meta),
        "cdf" => cdf(&settings, meta),
        "roc" => roc(&settings, meta),
        "fer" => fer(&settings, meta),
        _ => searchspace(&settings, meta),
    }
}

fn output(table: &Table, meta: &Metadata, format: Format, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => table.write(meta, format, path),
        None => {
            print!("{}", table.render(meta, format)?);
            Ok(())
        }
    }
}

fn bits(v: &[u8]) -> String {
    v.iter().map(|&b| char::from(b'0' + b)).collect()
}

fn construct(s: &Settings, meta: Metadata) -> Result<()> {
    let spec = &s.experiment.spec;
    let means = ga_llr_means(spec.block_len(), spec.rate(), spec.design_snr_db())?;
    let leaves: Vec<String> = s
        .experiment
        .detector
        .tree()
        .leaves()
        .map(|node| format!("{}({})", node.kind, node.size))
        .collect();
    let meta = meta
        .note("frozen_count", spec.block_len() - spec.info_len())
        .note("leaves", leaves.join(" "));
    let mut t = Table::new(&["index", "frozen", "ga_llr_mean"]);
    for (i, m) in means.iter().enumerate() {
        t.push(vec![Cell::Int(i as u64), Cell::Bool(spec.is_frozen(i)), Cell::Float(*m)]);
    }
    output(&t, &meta, s.format, s.out.as_deref())
}

fn encode(s: &Settings, meta: Metadata) -> Result<()> {
    let exp = &s.experiment;
    let channel = exp.channel(s.ebn0_db[0])?;
    let frames = par_trials(0..s.trials, |t| gen_frame(Scenario::RegTx, &exp.spec, &channel, t));
    let mut t = Table::new(&["trial_index", "message", "codeword"]);
    for (i, f) in frames.into_iter().enumerate() {
        let f = f?;
        t.push(vec![
            Cell::Int(i as u64),
            Cell::Text(bits(f.message.as_deref().unwrap_or_default())),
            Cell::Text(bits(f.codeword.as_deref().unwrap_or_default())),
        ]);
    }
    output(&t, &meta, s.format, s.out.as_deref())
}

fn decode(s: &Settings, meta: Metadata) -> Result<()> {
    let exp = &s.experiment;
    let fast = FastSscDecoder::from_tree(exp.detector.tree().clone());
    let list = match s.decoder {
        SubsequentDecoder::Sc => None,
        SubsequentDecoder::Scl { list_size } => Some(ListDecoder::new(&exp.spec, list_size)?),
    };
    let payload = exp.spec.payload_len();
    let mut t = Table::new(&["trial_index", "ebn0_db", "decoder", "crc_pass", "frame_error", "bit_errors"]);
    for &ebn0 in &s.ebn0_db {
        let channel = exp.channel(ebn0)?;
        let rows = par_trials(0..s.trials, |i| -> Result<Vec<Cell>> {
            let frame = gen_frame(Scenario::RegTx, &exp.spec, &channel, i)?;
            let truth = frame.message.expect("RegTx frames carry a message");
            let (message, crc_pass) = match &list {
                Some(list) => {
                    let out = list.decode(&frame.llr)?;
                    (out.message, out.crc_pass)
                }
                None => {
                    let cw = fast.decode(&frame.llr)?.codeword;
                    let m = exp.spec.message_from_codeword(&cw)?;
                    let pass = exp.spec.crc().is_none() || exp.spec.crc_passes(&m);
                    (m, pass)
                }
            };
            let bit_errors = message[..payload].iter().zip(&truth[..payload]).filter(|(a, b)| a != b).count();
            Ok(vec![
                Cell::Int(i),
                Cell::Float(ebn0),
                Cell::Text(s.decoder.name()),
                Cell::Bool(crc_pass),
                Cell::Bool(message != truth),
                Cell::Int(bit_errors as u64),
            ])
        });
        for r in rows {
            t.push(r?);
        }
    }
    output(&t, &meta, s.format, s.out.as_deref())
}

fn detect(s: &Settings, meta: Metadata) -> Result<()> {
    let exp = &s.experiment;
    let labeler = exp.labeler(s.decoder)?;
    let mut records = Vec::new();
    for &ebn0 in &s.ebn0_db {
        for &scenario in &s.scenarios {
            for r in par_trials(0..s.trials, |i| exp.trial(scenario, ebn0, i, &labeler)) {
                records.push(r?);
            }
        }
    }
    let meta = meta
        .note("decoder", s.decoder.name())
        .note("threshold_d", emit::format_float(exp.detector.config().threshold_d));
    output(&emit::records_table(&records), &meta, s.format, s.out.as_deref())
}

fn highest(points: &[f64]) -> f64 {
    points.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn cdf(s: &Settings, mut meta: Metadata) -> Result<()> {
    let exp = &s.experiment;
    let mut cdfs: Vec<(String, f64, EmpiricalCdf)> = Vec::new();
    let h1: Vec<Scenario> = s.scenarios.iter().copied().filter(|s| !s.is_null()).collect();
    if s.worst_case_h0 {
        let top = highest(&s.ebn0_db);
        for &ebn0 in &s.ebn0_db {
            for (sc, c) in run_metric_cdf(exp, ebn0, &h1, s.trials)? {
                cdfs.push((sc.name().into(), ebn0, c));
            }
        }
        for (sc, c) in run_metric_cdf(exp, top, &[Scenario::RndTx], s.trials)? {
            cdfs.push((sc.name().into(), top, c));
        }
        meta = meta.note("worst_case_h0", format!("rndtx at {top} dB"));
    } else {
        for &ebn0 in &s.ebn0_db {
            for (sc, c) in run_metric_cdf(exp, ebn0, &s.scenarios, s.trials)? {
                cdfs.push((sc.name().into(), ebn0, c));
            }
        }
    }
    for (label, ebn0, c) in &cdfs {
        meta = meta.note(
            format!("median[{label}@{ebn0}dB]"),
            c.median().map_or("nan".into(), emit::format_float),
        );
    }
    meta = meta.note("trials_per_scenario", s.trials);
    output(&emit::cdf_table(&cdfs), &meta, s.format, s.out.as_deref())
}

/// `base` with `_{ebn0}dB` inserted before the extension.
fn point_path(base: &Path, ebn0: f64) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{ebn0}dB.{ext}"),
        None => format!("{stem}_{ebn0}dB"),
    };
    base.with_file_name(name)
}

fn roc(s: &Settings, meta: Metadata) -> Result<()> {
    let exp = &s.experiment;
    let h0 = if s.worst_case_h0 {
        H0Source::worst_case(highest(&s.ebn0_db))
    } else {
        H0Source { mix: s.h0_mix, ebn0_db: None }
    };
    for &ebn0 in &s.ebn0_db {
        let run = run_roc(exp, ebn0, s.decoder, s.trials, None, h0)?;
        let low = run.points.iter().filter(|p| p.n_miss < 10 || p.n_fa < 10).count();
        let meta = meta
            .clone()
            .note("ebn0_db", ebn0)
            .note("decoder", s.decoder.name())
            .note("h0_notx_weight", h0.mix.notx)
            .note("h0_ebn0_db", h0.ebn0_db.unwrap_or(ebn0))
            .note("low_confidence_rows", format!("{low} of {} (n_miss < 10 or n_fa < 10)", run.points.len()));
        let path = match &s.out {
            Some(p) if s.ebn0_db.len() > 1 => Some(point_path(p, ebn0)),
            other => other.clone(),
        };
        output(&emit::roc_table(&run.points), &meta, s.format, path.as_deref())?;
    }
    Ok(())
}

fn fer(s: &Settings, meta: Metadata) -> Result<()> {
    let points = run_fer_ber(&s.experiment, s.decoder, &s.ebn0_db, s.stop)?;
    let low: Vec<String> = points
        .iter()
        .filter(|p| p.low_confidence())
        .map(|p| format!("{}dB", p.ebn0_db))
        .collect();
    let meta = meta
        .note("max_frames", s.stop.max_frames)
        .note("min_errors", s.stop.min_errors)
        .note("low_confidence", if low.is_empty() { "none".into() } else { low.join(" ") });
    output(&emit::fer_table(&s.decoder.name(), &points), &meta, s.format, s.out.as_deref())
}

fn searchspace(s: &Settings, meta: Metadata) -> Result<()> {
    let ebn0 = s.ebn0_db[0];
    let report = run_search_space(&s.experiment, ebn0, s.candidates, s.valid, s.trials, s.h0_mix)?;
    let meta = meta.note("ebn0_db", ebn0);
    output(&emit::search_table(&report), &meta, s.format, s.out.as_deref())
}
