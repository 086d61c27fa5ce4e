//! Command-line driver tying the codec, metric, generator, and
//! refinement modules into reproducible file workflows.
//!
//! Every command is deterministic for a fixed `--seed`: batch work is
//! distributed over a worker pool capped by `ROADNET_SEQ_THREADS`, but
//! results are always emitted in input order. Failures print a
//! machine-readable JSON object `{code, message, location}` on stderr
//! and exit with status 1; flag errors exit with clap's usage status.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use roadnet_core::codec::coupled::{decode_coupled, encode_coupled};
use roadnet_core::codec::decoupled::{decode_decoupled, encode_decoupled};
use roadnet_core::codec::order::OrderingPolicy;
use roadnet_core::codec::sar::{decode_sar, encode_sar, SarSequence};
use roadnet_core::codec::vocab::Token;
use roadnet_core::io::{
    format_sar, format_tokens, parse_sar, parse_tokens, read_network, read_sdmap, read_token_bin,
    write_network, write_network_line, write_sdmap, write_sdmap_line, write_token_bin, IoError,
};
use roadnet_core::iso::explain_mismatch;
use roadnet_core::metrics::evaluate;
use roadnet_core::nar::{complexity_report, iterative_decode, NoisyOracle, PerfectOracle};
use roadnet_core::sdmap::{decode_sdmap, encode_sdmap, SdMap};
use roadnet_core::synth::{generate, generate_sdmap, GenConfig};
use roadnet_core::{BevFrame, CodecError, RoadNetwork};

#[derive(Parser)]
#[command(
    name = "roadnet",
    version,
    about = "Road-network sequence codec toolkit"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate synthetic road networks (or SD maps) as JSON
    Gen(GenArgs),
    /// Encode network JSON into token sequences
    Encode(EncodeArgs),
    /// Decode token sequences back into network JSON
    Decode(DecodeArgs),
    /// Generate, push through the file carrier, decode, and compare
    Roundtrip(RoundtripArgs),
    /// Score a predicted network against a ground-truth network
    Eval(EvalArgs),
    /// Run mask-predict refinement against a synthetic predictor
    Simulate(SimulateArgs),
    /// Emit token-step complexity counters per network
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Coupled,
    Decoupled,
    Sar,
    Sdmap,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    FrontRight,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Perfect,
    Noisy,
}

fn parse_frame(s: &str) -> Result<BevFrame, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err("expected x_min,x_max,y_min,y_max,resolution".into());
    }
    let mut vals = [0.0f64; 5];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .map_err(|_| format!("not a number: {part}"))?;
    }
    BevFrame::new(vals[0], vals[1], vals[2], vals[3], vals[4]).map_err(|e| e.to_string())
}

#[derive(Args)]
struct Shared {
    /// Random seed shared by generation and the random ordering policy
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Frame as x_min,x_max,y_min,y_max,resolution (meters)
    #[arg(long, value_parser = parse_frame)]
    frame: Option<BevFrame>,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Shared {
    fn frame(&self) -> BevFrame {
        self.frame.unwrap_or_else(BevFrame::default_urban)
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    shared: Shared,
    /// Number of samples
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// `sdmap` generates SD maps; anything else generates networks
    #[arg(long, value_enum, default_value_t = Format::Coupled)]
    format: Format,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    shared: Shared,
    /// Network JSON (or JSONL batch); SD-map JSON for `--format sdmap`
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
    /// Vertex and edge emission order
    #[arg(long, value_enum, default_value_t = Policy::FrontRight)]
    policy: Policy,
    /// Reject unknown fields and invalid networks while reading
    #[arg(long)]
    strict: bool,
    /// Write length-prefixed little-endian u16 rows instead of text
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    shared: Shared,
    /// Token text (or binary with `--binary`) produced by encode
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
    /// Read length-prefixed little-endian u16 rows instead of text
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct RoundtripArgs {
    #[command(flatten)]
    shared: Shared,
    #[arg(long, value_enum)]
    format: Format,
    /// Number of seeded samples to push through the carrier
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Policy::FrontRight)]
    policy: Policy,
    /// Round-trip through the binary carrier instead of token text
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    shared: Shared,
    /// Predicted network JSON
    pred: PathBuf,
    /// Ground-truth network JSON
    gt: PathBuf,
    /// Reject unknown fields and invalid networks while reading
    #[arg(long)]
    strict: bool,
    /// Also write one CSV row per threshold and family
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    shared: Shared,
    /// Number of seeded samples
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Refinement iterations (at least one)
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    iters: u64,
    #[arg(long, value_enum, default_value_t = Oracle::Noisy)]
    oracle: Oracle,
    #[arg(long, value_enum, default_value_t = Policy::FrontRight)]
    policy: Policy,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    shared: Shared,
    /// Number of seeded samples
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Refinement iterations assumed by the cost model
    #[arg(long, default_value_t = 3)]
    iters: usize,
}

/// A command failure carrying the machine-readable error envelope.
struct Failure {
    code: &'static str,
    message: String,
    location: Value,
}

impl Failure {
    fn new(code: &'static str, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
            location: Value::Null,
        }
    }

    fn at(mut self, location: Value) -> Failure {
        self.location = location;
        self
    }

    /// Adds one key to the location object without clobbering what a
    /// lower layer already recorded.
    fn with(mut self, key: &str, value: Value) -> Failure {
        match &mut self.location {
            Value::Object(map) => {
                map.insert(key.into(), value);
            }
            _ => self.location = json!({ key: value }),
        }
        self
    }

    fn from_io(err: IoError, file: &PathBuf) -> Failure {
        let location = match &err {
            IoError::Json(e) => json!({"file": file, "line": e.line(), "column": e.column()}),
            IoError::BadToken { index, .. } => json!({"file": file, "token_index": index}),
            IoError::Codec(c) => match c.position() {
                Some(pos) => json!({"file": file, "token_index": pos}),
                None => json!({"file": file}),
            },
            _ => json!({"file": file}),
        };
        Failure::new("data", err.to_string()).at(location)
    }

    fn from_codec(err: CodecError) -> Failure {
        let location = match err.position() {
            Some(pos) => json!({"token_index": pos}),
            None => Value::Null,
        };
        Failure::new("codec", err.to_string()).at(location)
    }
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        Failure::new("io", format!("{}: {e}", path.display())).at(json!({"file": path}))
    })
}

fn read_input_bytes(path: &PathBuf) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| {
        Failure::new("io", format!("{}: {e}", path.display())).at(json!({"file": path}))
    })
}

fn emit(out: &Option<PathBuf>, content: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| {
            Failure::new("io", format!("{}: {e}", path.display())).at(json!({"file": path}))
        }),
        None => std::io::stdout()
            .write_all(content)
            .map_err(|e| Failure::new("io", e.to_string())),
    }
}

fn emit_lines(out: &Option<PathBuf>, lines: &[String]) -> Result<(), Failure> {
    let content = if lines.is_empty() {
        String::new()
    } else {
        lines.join("\n") + "\n"
    };
    emit(out, content.as_bytes())
}

fn pool_threads() -> usize {
    match std::env::var("ROADNET_SEQ_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&t| t >= 1).unwrap_or(1),
        Err(_) => std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1),
    }
}

/// Applies `f` to every index with a bounded worker pool; the result
/// vector is ordered by index no matter how work was scheduled.
fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = pool_threads().min(n.max(1));
    if threads <= 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, T)>();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            let tx = tx.clone();
            let next = &next;
            let f = &f;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                if tx.send((i, f(i))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
        for (i, v) in rx {
            slots[i] = Some(v);
        }
        slots
            .into_iter()
            .map(|s| s.expect("worker produced every index"))
            .collect()
    })
}

fn ordering(policy: Policy, seed: u64) -> OrderingPolicy {
    match policy {
        Policy::FrontRight => OrderingPolicy::FrontRight,
        Policy::Random => OrderingPolicy::Random { seed },
    }
}

/// Accepts either one JSON document or one JSON document per line.
fn split_samples(text: &str) -> Vec<&str> {
    let trimmed = text.trim();
    if serde_json::from_str::<Value>(trimmed).is_ok() {
        return vec![trimmed];
    }
    trimmed
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
}

fn load_networks(path: &PathBuf, strict: bool) -> Result<Vec<RoadNetwork>, Failure> {
    let text = read_input(path)?;
    split_samples(&text)
        .iter()
        .enumerate()
        .map(|(i, sample)| {
            read_network(sample, strict)
                .map_err(|e| Failure::from_io(e, path).with("sample", json!(i)))
        })
        .collect()
}

fn load_sdmaps(path: &PathBuf, strict: bool) -> Result<Vec<SdMap>, Failure> {
    let text = read_input(path)?;
    split_samples(&text)
        .iter()
        .enumerate()
        .map(|(i, sample)| {
            read_sdmap(sample, strict)
                .map_err(|e| Failure::from_io(e, path).with("sample", json!(i)))
        })
        .collect()
}

fn run_gen(args: &GenArgs) -> Result<(), Failure> {
    let cfg = GenConfig {
        frame: args.shared.frame(),
        ..GenConfig::default()
    };
    let seed = args.shared.seed;
    let lines: Vec<String> = match args.format {
        Format::Sdmap => par_map(args.n, |i| {
            let map = generate_sdmap(seed.wrapping_add(i as u64), &cfg);
            if args.n == 1 {
                write_sdmap(&map)
            } else {
                write_sdmap_line(&map)
            }
        }),
        _ => par_map(args.n, |i| {
            let net = generate(seed.wrapping_add(i as u64), &cfg);
            if args.n == 1 {
                write_network(&net)
            } else {
                write_network_line(&net)
            }
        }),
    };
    emit_lines(&args.shared.out, &lines)
}

fn encode_one(
    net: &RoadNetwork,
    format: Format,
    policy: &OrderingPolicy,
) -> Result<Vec<Vec<Token>>, CodecError> {
    match format {
        Format::Coupled => Ok(vec![encode_coupled(net, policy)?]),
        Format::Decoupled => Ok(vec![encode_decoupled(net, policy)?]),
        Format::Sar => Ok(encode_sar(net, policy)?.rows().to_vec()),
        Format::Sdmap => unreachable!("sdmap encoding takes an SD map"),
    }
}

fn run_encode(args: &EncodeArgs) -> Result<(), Failure> {
    let policy = ordering(args.policy, args.shared.seed);
    let samples: Vec<Vec<Vec<Token>>> = match args.format {
        Format::Sdmap => load_sdmaps(&args.input, args.strict)?
            .iter()
            .map(|m| Ok(vec![encode_sdmap(m, &policy).map_err(Failure::from_codec)?]))
            .collect::<Result<_, Failure>>()?,
        _ => {
            let nets = load_networks(&args.input, args.strict)?;
            let encoded = par_map(nets.len(), |i| encode_one(&nets[i], args.format, &policy));
            encoded
                .into_iter()
                .enumerate()
                .map(|(i, r)| r.map_err(|e| Failure::from_codec(e).with("sample", json!(i))))
                .collect::<Result<_, Failure>>()?
        }
    };

    if args.binary {
        let mut buf = Vec::new();
        for rows in &samples {
            write_token_bin(&mut buf, rows).map_err(|e| Failure::new("io", e.to_string()))?;
        }
        emit(&args.shared.out, &buf)
    } else {
        let lines: Vec<String> = samples
            .iter()
            .map(|rows| match args.format {
                Format::Sar => {
                    let seq = SarSequence::from_rows(rows.clone())
                        .expect("encode produced a well-shaped grid");
                    format_sar(&seq)
                }
                _ => format_tokens(&rows[0]),
            })
            .collect();
        emit_lines(&args.shared.out, &lines)
    }
}

/// Token rows per sample from either carrier.
fn load_token_samples(args: &DecodeArgs) -> Result<Vec<Vec<Vec<Token>>>, Failure> {
    if args.binary {
        let bytes = read_input_bytes(&args.input)?;
        let mut cursor = bytes.as_slice();
        let mut samples = Vec::new();
        while let Some(rows) =
            read_token_bin(&mut cursor).map_err(|e| Failure::from_io(e, &args.input))?
        {
            samples.push(rows);
        }
        Ok(samples)
    } else {
        let text = read_input(&args.input)?;
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .enumerate()
            .map(|(i, line)| {
                let rows = match args.format {
                    Format::Sar => parse_sar(line).map(|seq| seq.rows().to_vec()),
                    _ => parse_tokens(line).map(|tokens| vec![tokens]),
                };
                rows.map_err(|e| Failure::from_io(e, &args.input).with("sample", json!(i)))
            })
            .collect()
    }
}

fn run_decode(args: &DecodeArgs) -> Result<(), Failure> {
    let frame = args.shared.frame();
    let samples = load_token_samples(args)?;
    let single = samples.len() == 1;
    let lines = samples
        .into_iter()
        .enumerate()
        .map(|(i, rows)| {
            let result = match args.format {
                Format::Coupled => decode_coupled(&rows.concat(), &frame).map(|net| {
                    if single {
                        write_network(&net)
                    } else {
                        write_network_line(&net)
                    }
                }),
                Format::Decoupled => decode_decoupled(&rows.concat(), &frame).map(|net| {
                    if single {
                        write_network(&net)
                    } else {
                        write_network_line(&net)
                    }
                }),
                Format::Sar => SarSequence::from_rows(rows)
                    .and_then(|seq| decode_sar(&seq, &frame))
                    .map(|net| {
                        if single {
                            write_network(&net)
                        } else {
                            write_network_line(&net)
                        }
                    }),
                Format::Sdmap => decode_sdmap(&rows.concat(), &frame).map(|map| {
                    if single {
                        write_sdmap(&map)
                    } else {
                        write_sdmap_line(&map)
                    }
                }),
            };
            result.map_err(|e| {
                Failure::from_codec(e)
                    .with("file", json!(args.input))
                    .with("sample", json!(i))
            })
        })
        .collect::<Result<Vec<String>, Failure>>()?;
    emit_lines(&args.shared.out, &lines)
}

/// One generate→encode→carrier→decode→compare cycle; `Ok` is the
/// token count pushed through the carrier.
fn roundtrip_sample(
    seed: u64,
    format: Format,
    policy: &OrderingPolicy,
    cfg: &GenConfig,
    binary: bool,
) -> Result<usize, String> {
    let frame = cfg.frame;
    if let Format::Sdmap = format {
        let map = generate_sdmap(seed, cfg);
        let tokens = encode_sdmap(&map, policy).map_err(|e| e.to_string())?;
        let carried = through_carrier(std::slice::from_ref(&tokens), binary)?;
        let back = decode_sdmap(&carried.concat(), &frame).map_err(|e| e.to_string())?;
        if sdmap_cells(&map)? != sdmap_cells(&back)? {
            return Err("decoded map lost nodes or links at cell level".into());
        }
        return Ok(tokens.len());
    }

    let net = generate(seed, cfg);
    let rows = encode_one(&net, format, policy).map_err(|e| e.to_string())?;
    let direct = match format {
        Format::Coupled => decode_coupled(&rows.concat(), &frame),
        Format::Decoupled => decode_decoupled(&rows.concat(), &frame),
        Format::Sar => decode_sar(
            &SarSequence::from_rows(rows.clone()).map_err(|e| e.to_string())?,
            &frame,
        ),
        Format::Sdmap => unreachable!(),
    }
    .map_err(|e| e.to_string())?;

    let carried_rows = through_carrier(&rows, binary)?;
    let carried = match format {
        Format::Coupled => decode_coupled(&carried_rows.concat(), &frame),
        Format::Decoupled => decode_decoupled(&carried_rows.concat(), &frame),
        Format::Sar => decode_sar(
            &SarSequence::from_rows(carried_rows).map_err(|e| e.to_string())?,
            &frame,
        ),
        Format::Sdmap => unreachable!(),
    }
    .map_err(|e| e.to_string())?;

    if let Some(why) = explain_mismatch(&net, &direct).map_err(|e| e.to_string())? {
        return Err(format!("in-memory round trip drifted: {why}"));
    }
    if write_network(&direct) != write_network(&carried) {
        return Err("file carrier decoded differently than memory".into());
    }
    Ok(rows.iter().map(Vec::len).sum())
}

/// Sorted node cells and link cell pairs: the content an SD-map
/// round trip must preserve exactly.
type SdCells = (Vec<(u16, u16)>, Vec<((u16, u16), (u16, u16))>);

fn sdmap_cells(map: &SdMap) -> Result<SdCells, String> {
    let frame = map.frame();
    let cell = |id: &roadnet_core::VertexId| -> Result<(u16, u16), String> {
        let i = map.node_index(id).ok_or("dangling link endpoint")?;
        frame
            .quantize(map.nodes()[i].point())
            .map_err(|e| e.to_string())
    };
    let mut nodes = Vec::with_capacity(map.nodes().len());
    for n in map.nodes() {
        nodes.push(frame.quantize(n.point()).map_err(|e| e.to_string())?);
    }
    nodes.sort_unstable();
    let mut links = Vec::with_capacity(map.links().len());
    for (s, t) in map.links() {
        links.push((cell(s)?, cell(t)?));
    }
    links.sort_unstable();
    Ok((nodes, links))
}

/// Serializes token rows to the chosen carrier and parses them back.
fn through_carrier(rows: &[Vec<Token>], binary: bool) -> Result<Vec<Vec<Token>>, String> {
    if binary {
        let mut buf = Vec::new();
        write_token_bin(&mut buf, rows).map_err(|e| e.to_string())?;
        let mut cursor = buf.as_slice();
        let parsed = read_token_bin(&mut cursor)
            .map_err(|e| e.to_string())?
            .ok_or("binary carrier came back empty")?;
        Ok(parsed)
    } else {
        rows.iter()
            .map(|row| parse_tokens(&format_tokens(row)).map_err(|e| e.to_string()))
            .collect()
    }
}

fn run_roundtrip(args: &RoundtripArgs) -> Result<(), Failure> {
    let cfg = GenConfig {
        frame: args.shared.frame(),
        ..GenConfig::default()
    };
    let policy = ordering(args.policy, args.shared.seed);
    let seed = args.shared.seed;
    let results = par_map(args.n, |i| {
        roundtrip_sample(
            seed.wrapping_add(i as u64),
            args.format,
            &policy,
            &cfg,
            args.binary,
        )
    });
    for (i, result) in results.iter().enumerate() {
        if let Err(why) = result {
            emit(
                &args.shared.out,
                format!(
                    "{i}/{} failed at seed {}: {why}\n",
                    args.n,
                    seed.wrapping_add(i as u64)
                )
                .as_bytes(),
            )?;
            return Err(Failure::new("roundtrip", why.clone()).at(json!({
                "sample": i,
                "seed": seed.wrapping_add(i as u64),
            })));
        }
    }
    let tokens: usize = results.iter().map(|r| *r.as_ref().unwrap_or(&0)).sum();
    emit(
        &args.shared.out,
        format!("{}/{} ok ({tokens} tokens)\n", args.n, args.n).as_bytes(),
    )
}

fn pr_json(sweep: &roadnet_core::PrSweep) -> Value {
    json!({
        "per_threshold": sweep.points.iter().map(|p| json!({
            "t": p.threshold, "p": p.precision, "r": p.recall, "f1": p.f1,
        })).collect::<Vec<_>>(),
        "mean": {"p": sweep.mean_precision, "r": sweep.mean_recall, "f1": sweep.mean_f1},
    })
}

fn run_eval(args: &EvalArgs) -> Result<(), Failure> {
    let pred = load_networks(&args.pred, args.strict)?;
    let gt = load_networks(&args.gt, args.strict)?;
    let (pred, gt) = match (pred.as_slice(), gt.as_slice()) {
        ([p], [g]) => (p, g),
        _ => {
            return Err(Failure::new(
                "data",
                "eval expects exactly one network per file",
            ));
        }
    };
    let report = evaluate(pred, gt);
    let doc = json!({
        "landmark": pr_json(&report.landmark),
        "reachability": pr_json(&report.reachability),
        "counts": {
            "pred_landmarks": report.pred_landmarks,
            "gt_landmarks": report.gt_landmarks,
            "pred_paths": report.pred_paths,
            "gt_paths": report.gt_paths,
        },
    });
    if let Some(csv) = &args.csv {
        let mut rows = vec!["family,threshold,precision,recall,f1".to_string()];
        for (family, sweep) in [
            ("landmark", &report.landmark),
            ("reachability", &report.reachability),
        ] {
            for p in &sweep.points {
                rows.push(format!(
                    "{family},{},{},{},{}",
                    p.threshold, p.precision, p.recall, p.f1
                ));
            }
        }
        fs::write(csv, rows.join("\n") + "\n").map_err(|e| {
            Failure::new("io", format!("{}: {e}", csv.display())).at(json!({"file": csv}))
        })?;
    }
    emit(
        &args.shared.out,
        (serde_json::to_string_pretty(&doc).expect("report serialization is infallible") + "\n")
            .as_bytes(),
    )
}

fn run_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let cfg = GenConfig {
        frame: args.shared.frame(),
        ..GenConfig::default()
    };
    let policy = ordering(args.policy, args.shared.seed);
    let seed = args.shared.seed;
    let lines = par_map(args.n, |i| -> Result<String, String> {
        let sample_seed = seed.wrapping_add(i as u64);
        let net = generate(sample_seed, &cfg);
        let seq = encode_sar(&net, &policy).map_err(|e| e.to_string())?;
        let target = seq.flat();
        let trace = match args.oracle {
            Oracle::Perfect => {
                let mut oracle = PerfectOracle::new(&target);
                iterative_decode(&mut oracle, &seq, args.iters as usize)
            }
            Oracle::Noisy => {
                let mut oracle = NoisyOracle::new(&target, sample_seed);
                iterative_decode(&mut oracle, &seq, args.iters as usize)
            }
        }
        .map_err(|e| e.to_string())?;
        Ok(serde_json::to_string(&json!({
            "sample": i,
            "seed": sample_seed,
            "n_iter": trace.n_iter,
            "valid_positions": trace.valid_positions,
            "accuracy": trace.accuracy,
            "exact": trace.exact,
            "iterations": trace.iterations.iter().map(|s| json!({
                "predicted": s.predicted,
                "remasked": s.remasked,
                "accuracy": s.accuracy,
            })).collect::<Vec<_>>(),
        }))
        .expect("trace serialization is infallible"))
    });
    let lines = lines
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Failure::new("codec", e).at(json!({"sample": i}))))
        .collect::<Result<Vec<String>, Failure>>()?;
    emit_lines(&args.shared.out, &lines)
}

fn run_report(args: &ReportArgs) -> Result<(), Failure> {
    let cfg = GenConfig {
        frame: args.shared.frame(),
        ..GenConfig::default()
    };
    let seed = args.shared.seed;
    let lines: Vec<String> = par_map(args.n, |i| {
        let sample_seed = seed.wrapping_add(i as u64);
        let net = generate(sample_seed, &cfg);
        let report = complexity_report(&net, args.iters);
        serde_json::to_string(&json!({
            "sample": i,
            "seed": sample_seed,
            "edges": report.edges,
            "key_points": report.key_points,
            "clauses": report.clauses,
            "n_iter": report.n_iter,
            "ar_token_steps": report.ar_token_steps,
            "sar_token_steps": report.sar_token_steps,
            "nar_token_steps": report.nar_token_steps,
            "sar_acceleration": report.sar_acceleration,
            "nar_acceleration": report.nar_acceleration,
        }))
        .expect("report serialization is infallible")
    });
    emit_lines(&args.shared.out, &lines)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.cmd {
        Cmd::Gen(args) => run_gen(args),
        Cmd::Encode(args) => run_encode(args),
        Cmd::Decode(args) => run_decode(args),
        Cmd::Roundtrip(args) => run_roundtrip(args),
        Cmd::Eval(args) => run_eval(args),
        Cmd::Simulate(args) => run_simulate(args),
        Cmd::Report(args) => run_report(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = run(&cli) {
        let envelope = json!({
            "code": failure.code,
            "message": failure.message,
            "location": failure.location,
        });
        eprintln!(
            "{}",
            serde_json::to_string(&envelope).expect("envelope serialization")
        );
        std::process::exit(1);
    }
}
