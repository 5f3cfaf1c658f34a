use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{LmConfig, LmModel, NeuralError, Parameters, RankerConfig, RankerModel, Tensor};
use crate::corpus::Vocabulary;

const MAGIC: &[u8; 8] = b"PHNRANK\0";
pub const FORMAT_VERSION: u32 = 1;

/// Either kind of trained model.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Lm(LmModel),
    Ranker(RankerModel),
}

impl Model {
    pub fn vocab(&self) -> &Arc<Vocabulary> {
        match self {
            Model::Lm(m) => &m.vocab,
            Model::Ranker(m) => &m.vocab,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Lm(_) => "lm",
            Model::Ranker(_) => "ranker",
        }
    }

    /// The same model over an extended vocabulary; new rows are drawn from
    /// `rng` and frozen.
    pub fn with_vocab<R: rand::Rng + ?Sized>(&self, vocab: Arc<Vocabulary>, rng: &mut R) -> Result<Model, NeuralError> {
        Ok(match self {
            Model::Lm(m) => Model::Lm(m.with_vocab(vocab, rng)?),
            Model::Ranker(m) => Model::Ranker(m.with_vocab(vocab, rng)?),
        })
    }

    pub fn tensors(&self) -> Vec<(String, &Tensor)> {
        match self {
            Model::Lm(m) => m.tensors(),
            Model::Ranker(m) => m.tensors(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ModelSpec {
    Lm { config: LmConfig },
    Ranker { config: RankerConfig },
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    model: ModelSpec,
    vocab: Vocabulary,
    tensors: Vec<TensorEntry>,
}

/// Magic, version, header length, JSON header, then the tensors as
/// little-endian `f64` in header order. Offsets count values, not bytes.
pub fn write_checkpoint<W: Write>(model: &Model, mut out: W) -> Result<(), NeuralError> {
    let kind = match model {
        Model::Lm(m) => ModelSpec::Lm { config: m.config.clone() },
        Model::Ranker(m) => ModelSpec::Ranker { config: m.config.clone() },
    };
    let mut offset = 0;
    let mut entries = Vec::new();
    for (name, t) in model.tensors() {
        entries.push(TensorEntry {
            name,
            shape: t.shape().to_vec(),
            offset,
        });
        offset += t.len();
    }
    let header = Header {
        model: kind,
        vocab: (**model.vocab()).clone(),
        tensors: entries,
    };
    let json = serde_json::to_vec(&header).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    let mut buf = Vec::with_capacity(offset * 8);
    for (_, t) in model.tensors() {
        for v in t.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Model, NeuralError> {
    let bad = |m: &str| NeuralError::Checkpoint(m.to_string());
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != FORMAT_VERSION {
        return Err(NeuralError::Checkpoint(format!("unsupported format version {version}")));
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
    input.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    if raw.len() % 8 != 0 {
        return Err(bad("truncated tensor data"));
    }
    let values: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let vocab = Arc::new(header.vocab);
    let mut model = match header.model {
        ModelSpec::Lm { config } => Model::Lm(LmModel::zeros(config, vocab)),
        ModelSpec::Ranker { config } => Model::Ranker(RankerModel::zeros(config, vocab)),
    };
    let mut slots = match &mut model {
        Model::Lm(m) => m.tensors_mut(),
        Model::Ranker(m) => m.tensors_mut(),
    };
    if slots.len() != header.tensors.len() {
        return Err(NeuralError::Checkpoint(format!(
            "expected {} tensors, found {}",
            slots.len(),
            header.tensors.len()
        )));
    }
    for ((name, slot), entry) in slots.iter_mut().zip(&header.tensors) {
        if *name != entry.name || slot.shape() != entry.shape.as_slice() {
            return Err(NeuralError::Shape(format!(
                "tensor {}: expected {name} {:?}, found {} {:?}",
                entry.name,
                slot.shape(),
                entry.name,
                entry.shape
            )));
        }
        let end = entry.offset + slot.len();
        if end > values.len() {
            return Err(bad("truncated tensor data"));
        }
        slot.data_mut().copy_from_slice(&values[entry.offset..end]);
    }
    drop(slots);
    Ok(model)
}

pub fn checkpoint_bytes(model: &Model) -> Vec<u8> {
    let mut v = Vec::new();
    write_checkpoint(model, &mut v).expect("writing to memory");
    v
}

pub fn save_checkpoint(model: &Model, path: &std::path::Path) -> Result<(), NeuralError> {
    std::fs::write(path, checkpoint_bytes(model))?;
    Ok(())
}

pub fn load_checkpoint(path: &std::path::Path) -> Result<Model, NeuralError> {
    read_checkpoint(std::io::BufReader::new(std::fs::File::open(path)?))
}
