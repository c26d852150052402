use std::collections::HashMap;
use std::io::{Read, Write};

use super::OpcodeSequence;
use crate::{Error, Result};

pub const PAD_ID: u32 = 0;

/// Mnemonic ↔ id map. Id 0 is PAD; real opcodes get `1..V` in first-seen
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    ids: HashMap<String, u32>,
    mnemonics: Vec<String>,
}

impl Vocabulary {
    pub fn build<'a>(sequences: impl IntoIterator<Item = &'a OpcodeSequence>) -> Self {
        let mut vocab = Vocabulary::default();
        for seq in sequences {
            for op in &seq.opcodes {
                vocab.insert(op);
            }
        }
        vocab
    }

    fn insert(&mut self, mnemonic: &str) -> u32 {
        if let Some(&id) = self.ids.get(mnemonic) {
            return id;
        }
        let id = self.mnemonics.len() as u32 + 1;
        self.ids.insert(mnemonic.to_string(), id);
        self.mnemonics.push(mnemonic.to_string());
        id
    }

    /// Size including the PAD id.
    pub fn size(&self) -> usize {
        self.mnemonics.len() + 1
    }

    pub fn id(&self, mnemonic: &str) -> Option<u32> {
        self.ids.get(mnemonic).copied()
    }

    pub fn mnemonic(&self, id: u32) -> Option<&str> {
        match id {
            PAD_ID => None,
            id => self.mnemonics.get(id as usize - 1).map(String::as_str),
        }
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<&str> {
        ids.iter().filter_map(|&id| self.mnemonic(id)).collect()
    }

    /// `id,mnemonic` CSV with a header row; PAD is implicit.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "mnemonic"])?;
        for (k, m) in self.mnemonics.iter().enumerate() {
            w.write_record([(k + 1).to_string().as_str(), m])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut vocab = Vocabulary::default();
        for (k, record) in csv::Reader::from_reader(input).records().enumerate() {
            let record = record?;
            let id: u32 = record
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::data(format!("vocabulary line {}: bad id", k + 2)))?;
            let mnemonic = record
                .get(1)
                .ok_or_else(|| Error::data(format!("vocabulary line {}: missing mnemonic", k + 2)))?;
            if id as usize != k + 1 || vocab.ids.contains_key(mnemonic) {
                return Err(Error::data(format!(
                    "vocabulary line {}: ids must be contiguous from 1 and mnemonics unique",
                    k + 2
                )));
            }
            vocab.insert(mnemonic);
        }
        Ok(vocab)
    }
}

/// Maps mnemonics to ids; unknown mnemonics are an error.
pub fn encode(opcodes: &[String], vocab: &Vocabulary) -> Result<Vec<u32>> {
    opcodes
        .iter()
        .map(|op| vocab.id(op).ok_or_else(|| Error::UnknownOpcode(op.clone())))
        .collect()
}
