use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::lattice::Coord;
use crate::scalar::Scalar;
use crate::wavepacket::{k_transform, packet_stats, ExcitonState};

/// What a trajectory keeps besides the scalar diagnostics.
#[derive(Clone, Debug, Default)]
pub struct RecordOptions {
    /// Site whose occupation probability is tracked.
    pub target: Option<Coord>,
    /// Keep every `n`-th sampled state; 0 keeps none.
    pub snapshot_stride: usize,
}

/// Scalar diagnostics at one sampled time, always in `f64`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub time: f64,
    pub norm: f64,
    pub center: [f64; 2],
    pub width_sites: [f64; 2],
    pub width_m: [f64; 2],
    pub participation: f64,
    pub k_center_ak: [f64; 2],
    pub k_width_ak: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_probability: Option<f64>,
}

impl Diagnostics {
    pub fn of<T: Scalar>(state: &ExcitonState<T>, target: Option<Coord>) -> Self {
        let stats = packet_stats(state);
        let k = k_transform(state);
        let f2 = |v: [T; 2]| [v[0].as_f64(), v[1].as_f64()];
        Self {
            time: state.time().as_f64(),
            norm: state.norm_sqr().as_f64(),
            center: f2(stats.center),
            width_sites: f2(stats.width_sites),
            width_m: f2(stats.width_m),
            participation: stats.participation.as_f64(),
            k_center_ak: f2(k.center_ak()),
            k_width_ak: f2(k.width_ak()),
            target_probability: target.map(|c| state.probability(c).as_f64()),
        }
    }
}

/// Sampled trajectory of a propagation.
#[derive(Clone, Debug)]
pub struct RunRecord<T> {
    pub config: serde_json::Value,
    pub diagnostics: Vec<Diagnostics>,
    /// `(sample index, state)` pairs kept per the snapshot stride.
    pub snapshots: Vec<(usize, ExcitonState<T>)>,
    final_state: ExcitonState<T>,
    options: RecordOptions,
}

impl<T: Scalar> RunRecord<T> {
    pub fn new(initial: ExcitonState<T>, options: RecordOptions) -> Self {
        Self {
            config: serde_json::Value::Null,
            diagnostics: Vec::new(),
            snapshots: Vec::new(),
            final_state: initial,
            options,
        }
    }

    pub fn with_config(mut self, config: serde_json::Value) -> Self {
        self.config = config;
        self
    }

    pub fn push(&mut self, state: ExcitonState<T>) {
        let idx = self.diagnostics.len();
        self.diagnostics.push(Diagnostics::of(&state, self.options.target));
        let stride = self.options.snapshot_stride;
        if stride > 0 && idx.is_multiple_of(stride) {
            self.snapshots.push((idx, state.clone()));
        }
        self.final_state = state;
    }

    /// Most recent state (the initial one until something is pushed).
    pub fn final_state(&self) -> &ExcitonState<T> {
        &self.final_state
    }

    pub fn into_final_state(self) -> ExcitonState<T> {
        self.final_state
    }

    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.time).collect()
    }

    /// Largest `|Σ|C_n|² − 1|` over the samples.
    pub fn max_norm_drift(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| (d.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// One JSON object per sample; the config echo goes on the first line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        if !self.config.is_null() {
            serde_json::to_writer(&mut w, &serde_json::json!({ "config": self.config }))?;
            writeln!(w)?;
        }
        for d in &self.diagnostics {
            serde_json::to_writer(&mut w, d)?;
            writeln!(w)?;
        }
        Ok(())
    }
}
