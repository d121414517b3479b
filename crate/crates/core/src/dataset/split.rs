use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClassId, FaultDataset};
use crate::error::{Error, Result};

/// Train and test index sets with exactly `n_test_per_class` test samples
/// per class, each drawn uniformly without replacement. Both lists come back
/// in ascending index order.
pub fn stratified_split_indices(
    labels: &[ClassId],
    n_test_per_class: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut by_class: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
    for (i, &c) in labels.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    if n_test_per_class > 0 {
        if let Some((&class, idx)) = by_class.iter().find(|(_, v)| v.len() <= n_test_per_class) {
            return Err(Error::ClassTooSmall {
                class,
                have: idx.len(),
                need: n_test_per_class + 1,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = Vec::with_capacity(n_test_per_class * by_class.len());
    for idx in by_class.values_mut() {
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..n_test_per_class]);
    }
    test.sort_unstable();
    let mut in_test = vec![false; labels.len()];
    for &i in &test {
        in_test[i] = true;
    }
    let train = (0..labels.len()).filter(|&i| !in_test[i]).collect();
    Ok((train, test))
}

pub fn stratified_split(
    dataset: &FaultDataset,
    n_test_per_class: usize,
    seed: u64,
) -> Result<(FaultDataset, FaultDataset)> {
    let (train, test) = stratified_split_indices(&dataset.labels(), n_test_per_class, seed)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}
