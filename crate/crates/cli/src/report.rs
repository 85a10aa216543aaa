//! JSON reports printed on stdout, with one-line text summaries for stderr.

use asc_core::bitstream::{AnyEncodedTensor, RateReport};
use asc_core::hw::{build_interpolation_dag, count_ops, evaluate_tables, DagScale, DatapathVariant, OpCount};
use asc_core::metrics::{Psnr, QualityReport, ScaleUsage};
use asc_core::scales::build_table;
use asc_core::{BlockShape, CodecConfig, Dims, SampleFormat, ScaleKind, ScalePolicy};
use num_rational::Ratio;
use serde::Serialize;

#[derive(Serialize)]
pub struct Rate {
    pub numer: u64,
    pub denom: u64,
    pub value: f64,
}

impl From<Ratio<u64>> for Rate {
    fn from(r: Ratio<u64>) -> Self {
        Rate { numer: *r.numer(), denom: *r.denom(), value: *r.numer() as f64 / *r.denom() as f64 }
    }
}

#[derive(Serialize)]
pub struct ConfigReport {
    pub format: SampleFormat,
    pub dims: [usize; 3],
    pub block_shape: [usize; 3],
    pub endpoints: u32,
    pub vbr: bool,
    pub scale: ScalePolicy,
}

impl ConfigReport {
    fn new(config: &CodecConfig, dims: Dims) -> Self {
        ConfigReport {
            format: config.format,
            dims: [dims.width, dims.height, dims.channels],
            block_shape: [config.shape.width, config.shape.height, config.shape.channels],
            endpoints: config.mode.count(),
            vbr: config.vbr,
            scale: config.scale,
        }
    }
}

fn usage((revised_linear, log_linear): (usize, usize)) -> ScaleUsage {
    ScaleUsage { revised_linear, log_linear }
}

#[derive(Serialize)]
pub struct EncodeReport {
    #[serde(flatten)]
    pub config: ConfigReport,
    pub nominal_rate: Option<Rate>,
    pub measured_rate: Rate,
    pub uncompressed_bits: u64,
    pub payload_bits: u64,
    pub stream_bytes: usize,
    pub sparsity: f64,
    pub scale_usage: ScaleUsage,
}

impl EncodeReport {
    pub fn new(config: &CodecConfig, dims: Dims, rate: &RateReport, stream_bytes: usize) -> Self {
        EncodeReport {
            config: ConfigReport::new(config, dims),
            nominal_rate: rate.nominal.map(Rate::from),
            measured_rate: rate.measured.into(),
            uncompressed_bits: rate.uncompressed_bits,
            payload_bits: rate.payload_bits,
            stream_bytes,
            sparsity: rate.sparsity,
            scale_usage: usage(rate.scale_usage),
        }
    }

    pub fn summary(&self) -> String {
        let nominal = self.nominal_rate.as_ref().map_or("n/a".to_string(), |r| format!("{:.3}", r.value));
        format!(
            "encoded {} {}x{}x{} with blocks {}x{}x{}: nominal rate {nominal}, measured {:.3}, {} revised / {} log blocks",
            self.config.format,
            self.config.dims[0],
            self.config.dims[1],
            self.config.dims[2],
            self.config.block_shape[0],
            self.config.block_shape[1],
            self.config.block_shape[2],
            self.measured_rate.value,
            self.scale_usage.revised_linear,
            self.scale_usage.log_linear,
        )
    }
}

#[derive(Serialize)]
pub struct DecodeReport {
    #[serde(flatten)]
    pub config: ConfigReport,
    pub blocks: usize,
    pub permuted: bool,
    pub scale_usage: ScaleUsage,
}

impl DecodeReport {
    pub fn new(stream: &AnyEncodedTensor) -> Self {
        let (blocks, permuted) = match stream {
            AnyEncodedTensor::Int8(t) => (t.blocks().len(), t.permutation.is_some()),
            AnyEncodedTensor::Int16(t) => (t.blocks().len(), t.permutation.is_some()),
            AnyEncodedTensor::Fp16(t) => (t.blocks().len(), t.permutation.is_some()),
        };
        DecodeReport {
            config: ConfigReport::new(stream.config(), stream.dims()),
            blocks,
            permuted,
            scale_usage: usage(stream.scale_usage()),
        }
    }

    pub fn summary(&self) -> String {
        let [w, h, c] = self.config.dims;
        format!("decoded {} {w}x{h}x{c} from {} blocks", self.config.format, self.blocks)
    }
}

pub fn quality_summary(q: &QualityReport) -> String {
    let psnr = match q.psnr {
        Psnr::Finite(db) => format!("{db:.2} dB"),
        Psnr::Infinite => "inf".into(),
    };
    format!(
        "{} samples: L1 {} (mean {:.4}), MSE {:.4}, PSNR {psnr}, max error {}",
        q.samples, q.l1_total, q.l1_mean, q.mse, q.max_abs_error
    )
}

#[derive(Serialize)]
pub struct ShapeReport {
    pub block_size: usize,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl ShapeReport {
    pub fn new(block_size: usize, shape: BlockShape) -> Self {
        ShapeReport { block_size, width: shape.width, height: shape.height, channels: shape.channels }
    }
}

#[derive(Serialize)]
pub struct VariantReport {
    pub variant: DatapathVariant,
    pub counts: OpCount,
    pub reference: OpCount,
    pub matches_reference: bool,
    pub multiples: Vec<u32>,
}

#[derive(Serialize)]
pub struct Equivalence {
    /// `(min, max)` INT8 endpoint pairs evaluated.
    pub ranges: usize,
    /// Point and threshold values compared across both scales.
    pub values: usize,
    pub mismatches: usize,
}

#[derive(Serialize)]
pub struct HwReport {
    pub variants: Vec<VariantReport>,
    pub equivalence: Equivalence,
}

impl HwReport {
    pub fn build() -> Self {
        let variants = DatapathVariant::ALL
            .into_iter()
            .map(|variant| {
                let dag = build_interpolation_dag(variant);
                let counts = count_ops(&dag);
                VariantReport {
                    variant,
                    counts,
                    reference: variant.reference_counts(),
                    matches_reference: counts == variant.reference_counts(),
                    multiples: dag.multiples().into_iter().collect(),
                }
            })
            .collect();

        let dag = build_interpolation_dag(DatapathVariant::RevisedLinearShifted);
        let mut equivalence = Equivalence { ranges: 0, values: 0, mismatches: 0 };
        for min in -128i64..=127 {
            for max in min..=127 {
                let tables = evaluate_tables(&dag, min, max);
                for (kind, scale) in
                    [(ScaleKind::RevisedLinear, DagScale::RevisedLinear), (ScaleKind::LogLinear, DagScale::LogLinear)]
                {
                    let reference = build_table(kind, min, max).expect("min <= max");
                    let got = &tables[&scale];
                    let pairs = got
                        .points
                        .iter()
                        .zip(&reference.points)
                        .chain(got.thresholds.iter().zip(&reference.thresholds));
                    for (a, b) in pairs {
                        equivalence.values += 1;
                        equivalence.mismatches += usize::from(a != b);
                    }
                }
                equivalence.ranges += 1;
            }
        }
        HwReport { variants, equivalence }
    }

    pub fn summary(&self) -> String {
        let mut out =
            format!("{:<26} {:>8} {:>11} {:>7}   reference\n", "datapath", "dividers", "multipliers", "adders");
        for v in &self.variants {
            let name =
                serde_json::to_value(v.variant).ok().and_then(|j| j.as_str().map(str::to_owned)).unwrap_or_default();
            let r = v.reference;
            out.push_str(&format!(
                "{name:<26} {:>8} {:>11} {:>7}   {}/{}/{}{}\n",
                v.counts.dividers,
                v.counts.multipliers,
                v.counts.adders,
                r.dividers,
                r.multipliers,
                r.adders,
                if v.matches_reference { "" } else { " (differs)" }
            ));
        }
        out.push_str(&format!(
            "shifted datapath vs scale tables: {} INT8 ranges, {} values, {} mismatches",
            self.equivalence.ranges, self.equivalence.values, self.equivalence.mismatches
        ));
        out
    }
}
