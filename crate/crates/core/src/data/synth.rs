//! Desk-scale stand-in corpus: two first-order Markov chains over mnemonics.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use super::{Label, OpcodeSequence};
use crate::{Error, Result};

const MNEMONICS: &[&str] = &[
    "mov", "push", "pop", "call", "ret", "jmp", "je", "jne", "cmp", "test", "add", "sub", "xor",
    "and", "or", "lea", "inc", "dec", "shl", "shr", "imul", "idiv", "nop", "leave", "movzx",
    "movsx", "sete", "setne", "ja", "jb", "jg", "jl", "int", "rep", "stos", "lods", "xchg", "not",
    "neg", "sar", "rol", "ror", "cdq", "fld", "fstp", "fild", "sbb", "adc", "bt", "cmovne",
];

fn mnemonic(k: usize) -> String {
    match MNEMONICS.get(k) {
        Some(m) => m.to_string(),
        None => format!("op{k}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    /// Row-stochastic `n × n` transition matrix.
    pub transitions: Vec<Vec<f64>>,
}

impl MarkovChain {
    fn random<R: Rng>(n: usize, concentration: f64, rng: &mut R) -> Self {
        let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
        let transitions = (0..n)
            .map(|_| {
                let mut row: Vec<f64> = (0..n).map(|_| gamma.sample(rng).max(1e-12)).collect();
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= total);
                row
            })
            .collect();
        MarkovChain { transitions }
    }

    pub fn states(&self) -> usize {
        self.transitions.len()
    }

    /// Stationary distribution by power iteration.
    pub fn stationary(&self) -> Vec<f64> {
        let n = self.states();
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..10_000 {
            let mut next = vec![0.0; n];
            for (i, row) in self.transitions.iter().enumerate() {
                for (j, &p) in row.iter().enumerate() {
                    next[j] += pi[i] * p;
                }
            }
            let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if delta < 1e-13 {
                break;
            }
        }
        pi
    }

    fn sample<R: Rng>(&self, len: usize, start: &WeightedIndex<f64>, rows: &[WeightedIndex<f64>], rng: &mut R) -> Vec<usize> {
        let mut state = start.sample(rng);
        let mut out = Vec::with_capacity(len);
        out.push(state);
        while out.len() < len {
            state = rows[state].sample(rng);
            out.push(state);
        }
        out
    }
}

/// Total-variation distance between two distributions.
pub(crate) fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_per_class: usize,
    pub vocab_size: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
    /// Lower bound on the TV distance between the two chains' stationary
    /// distributions.
    pub min_tv: f64,
    /// Dirichlet concentration of each transition row.
    pub concentration: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_per_class: 400,
            vocab_size: 16,
            min_len: 40,
            max_len: 120,
            seed: 0,
            min_tv: 0.3,
            concentration: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub sequences: Vec<OpcodeSequence>,
    pub benign: MarkovChain,
    pub malicious: MarkovChain,
    /// Mnemonic of each chain state.
    pub mnemonics: Vec<String>,
}

impl SyntheticCorpus {
    pub fn chain(&self, label: Label) -> &MarkovChain {
        match label {
            Label::Benign => &self.benign,
            Label::Malicious => &self.malicious,
        }
    }
}

/// Benign and malicious sequences drawn from two random Markov chains whose
/// stationary distributions differ by at least `min_tv`. Sequences start in
/// the stationary distribution; lengths are uniform in `[min_len, max_len]`.
/// Output alternates benign/malicious files.
pub fn generate_synthetic_corpus(params: &SynthParams) -> Result<SyntheticCorpus> {
    let p = params;
    if p.vocab_size < 4 {
        return Err(Error::config("synthetic vocabulary needs at least 4 mnemonics"));
    }
    if p.n_per_class == 0 || p.min_len == 0 || p.min_len > p.max_len {
        return Err(Error::config(format!(
            "need n_per_class >= 1 and 1 <= min_len <= max_len (got n={}, lengths {}..{})",
            p.n_per_class, p.min_len, p.max_len
        )));
    }
    if !(0.0..1.0).contains(&p.min_tv) || !(p.concentration > 0.0) {
        return Err(Error::config("min_tv must lie in [0, 1) and concentration be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut chains = None;
    for _ in 0..1000 {
        let benign = MarkovChain::random(p.vocab_size, p.concentration, &mut rng);
        let malicious = MarkovChain::random(p.vocab_size, p.concentration, &mut rng);
        if total_variation(&benign.stationary(), &malicious.stationary()) >= p.min_tv {
            chains = Some((benign, malicious));
            break;
        }
    }
    let (benign, malicious) = chains.ok_or_else(|| {
        Error::config(format!("could not draw chains {} apart in total variation", p.min_tv))
    })?;

    let mnemonics: Vec<String> = (0..p.vocab_size).map(mnemonic).collect();
    let samplers = |chain: &MarkovChain| -> (WeightedIndex<f64>, Vec<WeightedIndex<f64>>) {
        let start = WeightedIndex::new(chain.stationary()).expect("valid distribution");
        let rows = chain
            .transitions
            .iter()
            .map(|r| WeightedIndex::new(r).expect("valid row"))
            .collect();
        (start, rows)
    };
    let ben_s = samplers(&benign);
    let mal_s = samplers(&malicious);

    let mut sequences = Vec::with_capacity(2 * p.n_per_class);
    for k in 0..p.n_per_class {
        for label in Label::ALL {
            let (chain, (start, rows)) = match label {
                Label::Benign => (&benign, &ben_s),
                Label::Malicious => (&malicious, &mal_s),
            };
            let len = rng.random_range(p.min_len..=p.max_len);
            let states = chain.sample(len, start, rows, &mut rng);
            sequences.push(OpcodeSequence {
                file_id: format!("{}{k:05}", label.file_prefix()),
                label,
                opcodes: states.into_iter().map(|s| mnemonics[s].clone()).collect(),
            });
        }
    }
    Ok(SyntheticCorpus {
        sequences,
        benign,
        malicious,
        mnemonics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let p = SynthParams {
            n_per_class: 10,
            vocab_size: 8,
            min_len: 50,
            max_len: 100,
            seed: 7,
            ..SynthParams::default()
        };
        let a = generate_synthetic_corpus(&p).unwrap();
        let b = generate_synthetic_corpus(&p).unwrap();
        assert_eq!(a.sequences, b.sequences);
        assert_eq!(a.sequences.len(), 20);
        assert!(a.sequences.iter().all(|s| (50..=100).contains(&s.opcodes.len())));
        let c = generate_synthetic_corpus(&SynthParams { seed: 8, ..p }).unwrap();
        assert_ne!(a.sequences, c.sequences);
    }

    #[test]
    fn chains_respect_tv_floor() {
        let c = generate_synthetic_corpus(&SynthParams { n_per_class: 1, seed: 3, ..SynthParams::default() }).unwrap();
        let tv = total_variation(&c.benign.stationary(), &c.malicious.stationary());
        assert!(tv >= 0.3);
        for row in c.benign.transitions.iter().chain(&c.malicious.transitions) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_parameters_rejected() {
        let base = SynthParams::default();
        for bad in [
            SynthParams { vocab_size: 3, ..base.clone() },
            SynthParams { n_per_class: 0, ..base.clone() },
            SynthParams { min_len: 10, max_len: 5, ..base.clone() },
            SynthParams { min_len: 0, ..base.clone() },
            SynthParams { min_tv: 1.0, ..base.clone() },
        ] {
            assert!(matches!(generate_synthetic_corpus(&bad), Err(Error::Config(_))));
        }
    }
}
