mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use asc_core::bitstream::{self, AnyEncodedTensor};
use asc_core::block::derive_cubical_shape;
use asc_core::codec::{self, encode, encode_permuted};
use asc_core::fmap::{load_fmap, store_fmap};
use asc_core::metrics::{quality, ScaleUsage};
use asc_core::reorder::{group_channels, similarity_matrix, ChannelPermutation, PairingMethod, SimilarityMatrix};
use asc_core::{AnyFeatureMap, BlockShape, CodecConfig, Element, EndpointMode, FeatureMap, ScalePolicy};
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{DecodeReport, EncodeReport, HwReport, ShapeReport};

#[derive(Parser)]
#[command(name = "asc", version, about = "Adaptive scale block codec for feature maps")]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, env = "ASC_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a .fmap file into an .asc stream.
    Encode(EncodeArgs),
    /// Decompress an .asc stream back into a .fmap file.
    Decode { input: PathBuf, output: PathBuf },
    /// Compare an original feature map with its reconstruction.
    Stats {
        original: PathBuf,
        reconstructed: PathBuf,
        /// Stream the reconstruction came from, for per-scale block counts.
        #[arg(long)]
        stream: Option<PathBuf>,
    },
    /// Print the cubical block shape for a block size.
    Shape { block_size: usize },
    /// Derive a channel permutation from calibration feature maps.
    Reorder(ReorderArgs),
    /// Operator census and equivalence check of the interpolation datapath.
    HwReport,
}

#[derive(Args)]
struct EncodeArgs {
    input: PathBuf,
    output: PathBuf,
    /// Samples per block; the shape is the cubical one for this size.
    #[arg(long, conflicts_with = "block_shape")]
    block_size: Option<usize>,
    /// Explicit block shape, e.g. 2x2x4.
    #[arg(long)]
    block_shape: Option<BlockShape>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    endpoints: u8,
    /// Zero-mask variable-bitrate mode.
    #[arg(long)]
    vbr: bool,
    #[arg(long, value_enum, default_value_t = ScaleArg::Adaptive)]
    scale: ScaleArg,
    /// Reorder channels by similarity, using the input itself as calibration.
    #[arg(long, value_enum, default_value_t = ReorderArg::None, conflicts_with = "permutation")]
    reorder: ReorderArg,
    /// Channel permutation as a JSON array of channel ids.
    #[arg(long)]
    permutation: Option<PathBuf>,
}

#[derive(Args)]
struct ReorderArgs {
    /// Calibration feature maps (.fmap), all with the same channel count.
    #[arg(required_unless_present = "matrix")]
    calibration: Vec<PathBuf>,
    /// Similarity matrix as a JSON array of rows, instead of calibration maps.
    #[arg(long, conflicts_with = "calibration")]
    matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Heuristic)]
    method: MethodArg,
    /// Channels per group; pairs are merged hierarchically up to this size.
    #[arg(long, default_value_t = 2)]
    group_size: usize,
    /// Also write the permutation to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Adaptive,
    Revised,
    Log,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ReorderArg {
    None,
    Greedy,
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Greedy,
    Heuristic,
}

impl From<MethodArg> for PairingMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Greedy => PairingMethod::Greedy,
            MethodArg::Heuristic => PairingMethod::Heuristic,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn load_map(path: &Path) -> Result<AnyFeatureMap> {
    load_fmap(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn read_permutation(path: &Path) -> Result<ChannelPermutation> {
    let order: Vec<usize> = serde_json::from_slice(&read(path)?)
        .with_context(|| format!("{} is not a JSON array of channel ids", path.display()))?;
    Ok(ChannelPermutation::new(order)?)
}

fn self_calibrated<T: Element>(map: &FeatureMap<T>, method: PairingMethod, group: usize) -> Result<ChannelPermutation> {
    let matrix = similarity_matrix(std::slice::from_ref(map))?;
    Ok(group_channels(&matrix, method, group))
}

fn encode_map<T: Element>(
    map: &FeatureMap<T>,
    config: &CodecConfig,
    reorder: ReorderArg,
    permutation: Option<&ChannelPermutation>,
) -> Result<Vec<u8>> {
    let derived = match reorder {
        ReorderArg::None => None,
        ReorderArg::Greedy => Some(self_calibrated(map, PairingMethod::Greedy, config.shape.channels)?),
        ReorderArg::Heuristic => Some(self_calibrated(map, PairingMethod::Heuristic, config.shape.channels)?),
    };
    let enc = match derived.as_ref().or(permutation) {
        Some(perm) => encode_permuted(map, config, perm)?,
        None => encode(map, config)?,
    };
    Ok(bitstream::serialize(&enc))
}

fn cmd_encode(args: &EncodeArgs) -> Result<()> {
    let map = load_map(&args.input)?;
    let shape = match (args.block_shape, args.block_size) {
        (Some(shape), _) => shape,
        (None, size) => derive_cubical_shape(size.unwrap_or(16))?,
    };
    let mode = if args.endpoints == 1 { EndpointMode::OneEndpoint } else { EndpointMode::TwoEndpoint };
    let scale = match args.scale {
        ScaleArg::Adaptive => ScalePolicy::Adaptive,
        ScaleArg::Revised => ScalePolicy::RevisedOnly,
        ScaleArg::Log => ScalePolicy::LogOnly,
    };
    let config = CodecConfig::new(shape, mode, map.format(), args.vbr)?.with_scale(scale);
    let permutation = args.permutation.as_deref().map(read_permutation).transpose()?;
    let bytes = match &map {
        AnyFeatureMap::Int8(m) => encode_map(m, &config, args.reorder, permutation.as_ref())?,
        AnyFeatureMap::Int16(m) => encode_map(m, &config, args.reorder, permutation.as_ref())?,
        AnyFeatureMap::Fp16(m) => encode_map(m, &config, args.reorder, permutation.as_ref())?,
    };
    write(&args.output, &bytes)?;
    let rate = bitstream::measured_rate(&bytes, &map)?;
    let report = EncodeReport::new(&config, map.dims(), &rate, bytes.len());
    eprintln!("{}", report.summary());
    print_json(&report)
}

fn cmd_decode(input: &Path, output: &Path) -> Result<()> {
    let stream = bitstream::deserialize(&read(input)?).with_context(|| format!("decoding {}", input.display()))?;
    let map: AnyFeatureMap = match &stream {
        AnyEncodedTensor::Int8(t) => codec::decode(t)?.into(),
        AnyEncodedTensor::Int16(t) => codec::decode(t)?.into(),
        AnyEncodedTensor::Fp16(t) => codec::decode(t)?.into(),
    };
    write(output, &store_fmap(&map))?;
    let report = DecodeReport::new(&stream);
    eprintln!("{}", report.summary());
    print_json(&report)
}

fn cmd_stats(original: &Path, reconstructed: &Path, stream: Option<&Path>) -> Result<()> {
    let mut report = quality(&load_map(original)?, &load_map(reconstructed)?)?;
    if let Some(path) = stream {
        let parsed = bitstream::deserialize(&read(path)?).with_context(|| format!("decoding {}", path.display()))?;
        let (revised_linear, log_linear) = parsed.scale_usage();
        report.scale_usage = Some(ScaleUsage { revised_linear, log_linear });
    }
    eprintln!("{}", report::quality_summary(&report));
    print_json(&report)
}

fn cmd_shape(block_size: usize) -> Result<()> {
    let shape = derive_cubical_shape(block_size)?;
    eprintln!("block size {block_size} -> {shape}");
    print_json(&ShapeReport::new(block_size, shape))
}

fn calibration_matrix(paths: &[PathBuf]) -> Result<SimilarityMatrix> {
    let maps = paths.iter().map(|p| load_map(p)).collect::<Result<Vec<_>>>()?;
    macro_rules! collect_as {
        ($variant:ident) => {
            maps.into_iter()
                .map(|m| match m {
                    AnyFeatureMap::$variant(m) => Ok(m),
                    other => bail!("calibration maps mix formats ({})", other.format()),
                })
                .collect::<Result<Vec<_>>>()
                .and_then(|maps| Ok(similarity_matrix(&maps)?))
        };
    }
    match maps.first() {
        Some(AnyFeatureMap::Int8(_)) => collect_as!(Int8),
        Some(AnyFeatureMap::Int16(_)) => collect_as!(Int16),
        Some(AnyFeatureMap::Fp16(_)) => collect_as!(Fp16),
        None => bail!("no calibration maps given"),
    }
}

fn cmd_reorder(args: &ReorderArgs) -> Result<()> {
    if args.group_size < 2 || !args.group_size.is_power_of_two() {
        bail!("group size must be a power of two >= 2, got {}", args.group_size);
    }
    let matrix = match &args.matrix {
        Some(path) => {
            let rows: Vec<Vec<f64>> = serde_json::from_slice(&read(path)?)
                .with_context(|| format!("{} is not a JSON array of rows", path.display()))?;
            SimilarityMatrix::from_rows(&rows)?
        }
        None => calibration_matrix(&args.calibration)?,
    };
    let perm = group_channels(&matrix, args.method.into(), args.group_size);
    let json = serde_json::to_string(&perm)?;
    if let Some(path) = &args.output {
        write(path, json.as_bytes())?;
    }
    eprintln!("{} channels, groups of {}: {:?}", perm.len(), args.group_size, perm.order());
    println!("{json}");
    Ok(())
}

fn cmd_hw_report() -> Result<()> {
    let report = HwReport::build();
    eprintln!("{}", report.summary());
    print_json(&report)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global()?;
    }
    match &cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Decode { input, output } => cmd_decode(input, output),
        Command::Stats { original, reconstructed, stream } => cmd_stats(original, reconstructed, stream.as_deref()),
        Command::Shape { block_size } => cmd_shape(*block_size),
        Command::Reorder(args) => cmd_reorder(args),
        Command::HwReport => cmd_hw_report(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
