//! Minority-class upsampling for imbalanced training sets.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::Label;
use crate::error::EvalError;

/// Duplicate minority-class entries (uniform, with replacement) until class
/// counts are equal, keeping every original entry, then shuffle.
pub fn upsample_minority<T: Clone>(
    items: &[(T, Label)],
    rng: &mut impl Rng,
) -> Result<Vec<(T, Label)>, EvalError> {
    let positives: Vec<&(T, Label)> = items.iter().filter(|(_, l)| l.is_positive()).collect();
    let negatives: Vec<&(T, Label)> = items.iter().filter(|(_, l)| !l.is_positive()).collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(EvalError::SingleClass);
    }
    let (minority, deficit) = if positives.len() < negatives.len() {
        (&positives, negatives.len() - positives.len())
    } else {
        (&negatives, positives.len() - negatives.len())
    };
    let mut out: Vec<(T, Label)> = items.to_vec();
    for _ in 0..deficit {
        let pick = minority[rng.gen_range(0..minority.len())];
        out.push(pick.clone());
    }
    out.shuffle(rng);
    Ok(out)
}
