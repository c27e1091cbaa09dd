//! Autoencoder checkpoints: a header line with the layer widths, then one
//! line per dense layer holding its weights (row-major, one row per output
//! unit), biases and Adagrad accumulators.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use linkevo_core::aurora::Autoencoder;
use serde::{Deserialize, Serialize};

use crate::Error;

pub const CHECKPOINT_FORMAT: &str = "linkevo-autoencoder";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub latent_layer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub layer: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub weight_accumulators: Vec<f64>,
    pub bias_accumulators: Vec<f64>,
}

pub fn write_checkpoint<W: Write>(ae: &Autoencoder, mut w: W) -> Result<(), Error> {
    let json = |e| Error::Json { line: 0, source: e };
    let io = Error::io("<checkpoint>");
    let header = CheckpointHeader {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        layer_sizes: ae.layer_sizes().to_vec(),
        latent_layer: ae.latent_layer(),
    };
    let mut out = serde_json::to_string(&header).map_err(json)?;
    out.push('\n');
    let (params, acc) = (ae.parameters(), ae.accumulators());
    let mut offset = 0;
    for (layer, pair) in ae.layer_sizes().windows(2).enumerate() {
        let (inputs, outputs) = (pair[0], pair[1]);
        let nw = inputs * outputs;
        let rec = LayerRecord {
            layer,
            inputs,
            outputs,
            weights: params[offset..offset + nw].to_vec(),
            biases: params[offset + nw..offset + nw + outputs].to_vec(),
            weight_accumulators: acc[offset..offset + nw].to_vec(),
            bias_accumulators: acc[offset + nw..offset + nw + outputs].to_vec(),
        };
        offset += nw + outputs;
        out.push_str(&serde_json::to_string(&rec).map_err(json)?);
        out.push('\n');
    }
    w.write_all(out.as_bytes()).map_err(io)?;
    w.flush().map_err(Error::io("<checkpoint>"))
}

pub fn read_checkpoint<R: BufRead>(r: R) -> Result<Autoencoder, Error> {
    let mut lines = r.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let (_, first) = lines.next().ok_or_else(|| Error::Format("empty checkpoint".into()))?;
    let header: CheckpointHeader =
        serde_json::from_str(&first.map_err(Error::io("<checkpoint>"))?).map_err(|source| Error::Json { line: 1, source })?;
    if header.format != CHECKPOINT_FORMAT || header.version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("not a version {CHECKPOINT_VERSION} autoencoder checkpoint")));
    }
    let mut params = Vec::new();
    let mut acc = Vec::new();
    let mut layers = 0;
    for (i, line) in lines {
        let rec: LayerRecord =
            serde_json::from_str(&line.map_err(Error::io("<checkpoint>"))?).map_err(|source| Error::Json { line: i + 1, source })?;
        let expected = header.layer_sizes.get(layers..layers + 2);
        if rec.layer != layers
            || expected != Some(&[rec.inputs, rec.outputs][..])
            || rec.weights.len() != rec.inputs * rec.outputs
            || rec.weight_accumulators.len() != rec.weights.len()
            || rec.biases.len() != rec.outputs
            || rec.bias_accumulators.len() != rec.outputs
        {
            return Err(Error::Format(format!("layer record on line {} does not match the header", i + 1)));
        }
        params.extend(rec.weights);
        params.extend(rec.biases);
        acc.extend(rec.weight_accumulators);
        acc.extend(rec.bias_accumulators);
        layers += 1;
    }
    if layers + 1 != header.layer_sizes.len() {
        return Err(Error::Format(format!("checkpoint has {layers} layers, header needs {}", header.layer_sizes.len().saturating_sub(1))));
    }
    Autoencoder::from_parts(header.layer_sizes, header.latent_layer, params, acc)
        .ok_or_else(|| Error::Format("inconsistent autoencoder checkpoint".into()))
}

pub fn save_checkpoint(ae: &Autoencoder, path: &Path) -> Result<(), Error> {
    let file = File::create(path).map_err(Error::io(path))?;
    write_checkpoint(ae, BufWriter::new(file))
}

pub fn load_checkpoint(path: &Path) -> Result<Autoencoder, Error> {
    let file = File::open(path).map_err(Error::io(path))?;
    read_checkpoint(BufReader::new(file)).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}
