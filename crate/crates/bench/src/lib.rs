//! Fixtures shared by the benchmarks.

use bayesreg::inference::ml_estimate;
use bayesreg::models::{sample, HomodynePhase, SqueezedState};
use bayesreg::rng::stream;
use bayesreg::{Batch, Dataset, MlOptions, MlResult, Setting, StatisticalModel};

/// One batch of `n` homodyne quadratures at the usual operating point.
pub fn homodyne_dataset(n: usize, seed: u64) -> (HomodynePhase, Dataset) {
    let model = HomodynePhase::new(0.7).expect("valid squeeze");
    let setting = Setting::new(vec![1.837]);
    let outcomes = sample(&model, &[1.179], &setting, n, &mut stream(seed, &[])).expect("valid inputs");
    let mut data = Dataset::new();
    data.push(Batch::new(&model, setting, outcomes).expect("outcomes match the model"));
    (model, data)
}

pub fn squeezed_dataset(n: usize, seed: u64) -> (SqueezedState, Dataset) {
    let model = SqueezedState::new();
    let setting = Setting::new(vec![0.27, 1.0]);
    let outcomes = sample(&model, &[3.258, 1.0517], &setting, n, &mut stream(seed, &[])).expect("valid inputs");
    let mut data = Dataset::new();
    data.push(Batch::new(&model, setting, outcomes).expect("outcomes match the model"));
    (model, data)
}

pub fn fit(model: &dyn StatisticalModel, data: &Dataset) -> MlResult {
    ml_estimate(model, data, &MlOptions::default()).expect("non-empty dataset")
}
