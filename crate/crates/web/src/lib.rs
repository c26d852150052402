//! WebAssembly bindings for the static page in `www/`.

use opseq_core::analysis::{hierarchical_select, standardize, ResultTable, TableRow};
use opseq_core::data::quartiles;
use opseq_core::neural::{lstm_cell_forward, LstmLayer, Matrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn js_err(e: opseq_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct IqrView {
    q1: f64,
    q2: f64,
    q3: f64,
    iqr: f64,
    threshold: f64,
    kept: Vec<u8>,
}

#[wasm_bindgen]
impl IqrView {
    #[wasm_bindgen(getter)]
    pub fn q1(&self) -> f64 {
        self.q1
    }
    #[wasm_bindgen(getter)]
    pub fn q2(&self) -> f64 {
        self.q2
    }
    #[wasm_bindgen(getter)]
    pub fn q3(&self) -> f64 {
        self.q3
    }
    #[wasm_bindgen(getter)]
    pub fn iqr(&self) -> f64 {
        self.iqr
    }
    #[wasm_bindgen(getter)]
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
    /// 1 for every input value at or below the threshold.
    pub fn kept(&self) -> Vec<u8> {
        self.kept.clone()
    }
}

/// Quartiles of `lengths` and the upper-side cut `Q2 + multiplier · IQR`.
#[wasm_bindgen]
pub fn iqr_filter_view(lengths: &[f64], multiplier: f64) -> Result<IqrView, JsError> {
    let q = quartiles(lengths).map_err(js_err)?.with_multiplier(multiplier);
    let threshold = q.threshold.unwrap_or(f64::INFINITY);
    Ok(IqrView {
        q1: q.q1,
        q2: q.q2,
        q3: q.q3,
        iqr: q.iqr,
        threshold,
        kept: lengths.iter().map(|&v| u8::from(v <= threshold)).collect(),
    })
}

/// One step of a single-unit, single-input LSTM cell. `w`, `u` and `b` hold
/// the input, forget, candidate and output rows in that order.
/// Returns `[i, f, g, o, c, h]`.
#[wasm_bindgen]
pub fn lstm_cell_gates(x: f64, h_prev: f64, c_prev: f64, w: &[f64], u: &[f64], b: &[f64]) -> Result<Vec<f64>, JsError> {
    let layer = LstmLayer {
        w: Matrix::from_vec(4, 1, w.to_vec()).map_err(js_err)?,
        u: Matrix::from_vec(4, 1, u.to_vec()).map_err(js_err)?,
        b: b.to_vec(),
    };
    let out = lstm_cell_forward(&[x], &[h_prev], &[c_prev], &layer).map_err(js_err)?;
    Ok(vec![out.input_gate[0], out.forget_gate[0], out.candidate[0], out.output_gate[0], out.c[0], out.h[0]])
}

/// Full-factorial table with additive effects plus uniform noise. Factor `k`
/// is named after the k-th capital letter; its best level is drawn at random.
pub fn planted_table(effects: &[f64], levels: usize, noise: f64, seed: u64) -> opseq_core::Result<(ResultTable, Vec<usize>)> {
    if effects.is_empty() || effects.len() > 6 || !(2..=5).contains(&levels) {
        return Err(opseq_core::Error::Config("use 1 to 6 factors with 2 to 5 levels each".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offsets = Vec::with_capacity(effects.len());
    let mut best = Vec::with_capacity(effects.len());
    for _ in effects {
        let mut v: Vec<f64> = (0..levels).map(|i| -1.0 + 2.0 * i as f64 / (levels - 1) as f64).collect();
        v.shuffle(&mut rng);
        best.push(v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0));
        offsets.push(v);
    }
    let total = levels.pow(effects.len() as u32);
    let mut rows = Vec::with_capacity(total);
    for id in 0..total {
        let mut code = id;
        let mut loss = 1.0;
        let mut lv = Vec::with_capacity(effects.len());
        for (f, e) in effects.iter().enumerate() {
            let l = code % levels;
            code /= levels;
            loss += e * offsets[f][l];
            lv.push(format!("L{}", l + 1));
        }
        loss += noise * rng.random_range(-1.0..=1.0);
        rows.push(TableRow {
            config_id: format!("c{id}"),
            levels: lv,
            loss,
        });
    }
    let factors = (0..effects.len()).map(|k| ((b'A' + k as u8) as char).to_string()).collect();
    Ok((ResultTable::new(factors, rows)?, best))
}

#[wasm_bindgen]
pub struct PlantedRanking {
    factors: Vec<String>,
    levels: Vec<String>,
    scores: Vec<f64>,
    truth: Vec<String>,
    recovered: bool,
}

#[wasm_bindgen]
impl PlantedRanking {
    /// Factors in ranked order.
    pub fn factors(&self) -> Vec<String> {
        self.factors.clone()
    }
    pub fn levels(&self) -> Vec<String> {
        self.levels.clone()
    }
    pub fn scores(&self) -> Vec<f64> {
        self.scores.clone()
    }
    /// Planted `factor=level` pairs, largest effect first.
    pub fn truth(&self) -> Vec<String> {
        self.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn recovered(&self) -> bool {
        self.recovered
    }
}

pub fn rank_planted(effects: &[f64], levels: usize, noise: f64, seed: u64) -> opseq_core::Result<PlantedRanking> {
    let (table, best) = planted_table(effects, levels, noise, seed)?;
    let names = table.factors().to_vec();
    let ranking = hierarchical_select(&standardize(table)?, 1)?;
    let mut order: Vec<usize> = (0..effects.len()).collect();
    order.sort_by(|&a, &b| effects[b].total_cmp(&effects[a]));
    let truth: Vec<String> = order.iter().map(|&f| format!("{}=L{}", names[f], best[f] + 1)).collect();
    let found: Vec<String> = ranking.steps.iter().map(|s| format!("{}={}", s.factor, s.level)).collect();
    Ok(PlantedRanking {
        factors: ranking.steps.iter().map(|s| s.factor.clone()).collect(),
        levels: ranking.steps.iter().map(|s| s.level.clone()).collect(),
        scores: ranking.steps.iter().map(|s| s.score).collect(),
        recovered: found == truth,
        truth,
    })
}

/// Ranks a freshly planted table; see [`planted_table`].
#[wasm_bindgen]
pub fn planted_ranking(effects: &[f64], levels: usize, noise: f64, seed: u64) -> Result<PlantedRanking, JsError> {
    rank_planted(effects, levels, noise, seed).map_err(js_err)
}
