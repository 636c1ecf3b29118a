use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

/// Train/validation/test partition, 60/20/20.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
    pub seed: u64,
}

impl<T> DatasetSplit<T> {
    pub fn sizes(&self) -> [usize; 3] {
        [self.train.len(), self.validation.len(), self.test.len()]
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> DatasetSplit<U> {
        DatasetSplit {
            train: self.train.iter().map(&f).collect(),
            validation: self.validation.iter().map(&f).collect(),
            test: self.test.iter().map(&f).collect(),
            seed: self.seed,
        }
    }
}

/// Seeded shuffle, then cut at `floor(0.6 n)` and `floor(0.8 n)`; the
/// remainder goes to test.
pub fn split_dataset<T>(mut items: Vec<T>, seed: u64) -> Result<DatasetSplit<T>> {
    let n = items.len();
    if n < 5 {
        return Err(Error::TooFewPairs { needed: 5, got: n });
    }
    items.shuffle(&mut rng::stream(seed, "split"));
    let train_end = n * 3 / 5;
    let val_end = n * 4 / 5;
    let test = items.split_off(val_end);
    let validation = items.split_off(train_end);
    Ok(DatasetSplit {
        train: items,
        validation,
        test,
        seed,
    })
}
