//! False-inclusion loss and per-sample nonconformity scores.
//!
//! Filtering at surrogate level `s` keeps the set `{k : Â_k ≥ s}`. The
//! false-inclusion loss counts how many kept generations have gold score
//! below the quality threshold λ. The nonconformity score of a record is the
//! smallest attained threshold at which that loss drops to the allowance ρ;
//! by monotonicity, every threshold at or above it is also safe.
//!
//! The loss contract is pluggable: anything monotone in the selection set
//! with `loss(∅) = 0` preserves the conformal guarantee.

use crate::error::{Error, Result};
use crate::model::{Dataset, FilterConfig};

/// A loss over a selected subset of generations that is monotone in the
/// selection (`A ⊆ B` implies `loss(A) ≤ loss(B)`) and zero on the empty set.
///
/// `selected` holds indices into `golds`.
pub trait MonotoneLoss: Sync {
    fn loss(&self, selected: &[usize], golds: &[f64], lambda: f64) -> f64;
}

/// Counts selected generations whose gold score falls below λ.
#[derive(Debug, Clone, Copy, Default)]
pub struct FalseInclusionLoss;

impl MonotoneLoss for FalseInclusionLoss {
    fn loss(&self, selected: &[usize], golds: &[f64], lambda: f64) -> f64 {
        selected.iter().filter(|&&k| golds[k] < lambda).count() as f64
    }
}

/// Number of generations with surrogate score at least `s` whose gold score
/// is below `lambda`.
pub fn false_inclusion_loss(
    surrogates: &[f64],
    golds: &[f64],
    s: f64,
    lambda: f64,
) -> Result<usize> {
    if surrogates.len() != golds.len() {
        return Err(Error::invalid(format!(
            "surrogate/gold length mismatch: {} vs {}",
            surrogates.len(),
            golds.len()
        )));
    }
    Ok(surrogates
        .iter()
        .zip(golds)
        .filter(|(&surr, &gold)| surr >= s && gold < lambda)
        .count())
}

/// The threshold grid for one record: distinct surrogate values plus a
/// sentinel strictly above the maximum, so an empty selection (loss 0) is
/// always reachable.
pub fn threshold_grid(surrogates: &[f64]) -> Vec<f64> {
    let mut grid = surrogates.to_vec();
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    let max = *grid.last().expect("nonempty surrogates");
    grid.push(max + 1.0);
    grid
}

/// Smallest attained threshold whose filtered set incurs loss at most `rho`.
///
/// The infimum over continuous `s` may be unattained (the loss drops just
/// past a surrogate value, where the offending generation leaves the `≥ s`
/// selection); returning the smallest attained grid value keeps the filter
/// safe at the returned score itself.
pub fn nonconformity_score(
    surrogates: &[f64],
    golds: &[f64],
    lambda: f64,
    rho: u32,
    loss: &dyn MonotoneLoss,
) -> Result<f64> {
    if surrogates.is_empty() {
        return Err(Error::invalid("nonconformity score of an empty generation list"));
    }
    if surrogates.len() != golds.len() {
        return Err(Error::invalid(format!(
            "surrogate/gold length mismatch: {} vs {}",
            surrogates.len(),
            golds.len()
        )));
    }
    let grid = threshold_grid(surrogates);
    for &s in &grid {
        let selected: Vec<usize> =
            (0..surrogates.len()).filter(|&k| surrogates[k] >= s).collect();
        if loss.loss(&selected, golds, lambda) <= f64::from(rho) {
            return Ok(s);
        }
    }
    unreachable!("sentinel threshold empties the selection and L(∅) = 0 ≤ ρ")
}

/// Nonconformity score of every record in a gold-scored calibration set.
pub fn score_calibration_set(
    cal: &Dataset,
    config: &FilterConfig,
) -> Result<Vec<(String, f64)>> {
    let loss = FalseInclusionLoss;
    cal.records()
        .iter()
        .map(|rec| {
            let golds = rec.golds().ok_or_else(|| {
                Error::invalid(format!("{}: missing gold scores in calibration set", rec.sample_id))
            })?;
            let score = nonconformity_score(
                &rec.surrogates(),
                &golds,
                config.lambda,
                config.rho,
                &loss,
            )?;
            Ok((rec.sample_id.clone(), score))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_dataset, SampleRecord, ScoredGeneration};
    use crate::oracles::brute_force_nonconformity;
    use proptest::prelude::*;

    const SURR: [f64; 3] = [0.9, 0.6, 0.3];
    const GOLD: [f64; 3] = [0.7, 0.4, 0.8];

    #[test]
    fn loss_counts_bad_kept() {
        assert_eq!(false_inclusion_loss(&SURR, &GOLD, 0.5, 0.5).unwrap(), 1);
    }

    #[test]
    fn loss_zero_on_empty_selection() {
        assert_eq!(false_inclusion_loss(&SURR, &GOLD, 0.95, 0.5).unwrap(), 0);
    }

    #[test]
    fn loss_zero_when_lambda_zero() {
        for s in [0.0, 0.3, 0.6, 0.9] {
            assert_eq!(false_inclusion_loss(&SURR, &GOLD, s, 0.0).unwrap(), 0);
        }
    }

    #[test]
    fn loss_length_mismatch_rejected() {
        assert!(false_inclusion_loss(&SURR, &GOLD[..2], 0.5, 0.5).is_err());
    }

    #[test]
    fn score_at_rho_zero() {
        let s = nonconformity_score(&SURR, &GOLD, 0.5, 0, &FalseInclusionLoss).unwrap();
        assert_eq!(s, 0.9);
    }

    #[test]
    fn score_at_rho_one() {
        let s = nonconformity_score(&SURR, &GOLD, 0.5, 1, &FalseInclusionLoss).unwrap();
        assert_eq!(s, 0.3);
    }

    #[test]
    fn all_good_gives_min_surrogate() {
        let golds = [0.9, 0.8, 0.7];
        let s = nonconformity_score(&SURR, &golds, 0.5, 0, &FalseInclusionLoss).unwrap();
        assert_eq!(s, 0.3);
    }

    #[test]
    fn empty_generations_rejected() {
        assert!(nonconformity_score(&[], &[], 0.5, 0, &FalseInclusionLoss).is_err());
    }

    fn one_record(id: &str) -> SampleRecord {
        SampleRecord {
            sample_id: id.into(),
            embedding: vec![0.0, 0.0],
            label: "x".into(),
            generations: SURR
                .iter()
                .zip(GOLD)
                .enumerate()
                .map(|(k, (&surr, gold))| ScoredGeneration::new(format!("g{k}"), surr, Some(gold)))
                .collect(),
        }
    }

    #[test]
    fn calibration_scoring_composes() {
        let ds = validate_dataset(vec![one_record("a")], true).unwrap();
        let scores = score_calibration_set(&ds, &FilterConfig::default()).unwrap();
        assert_eq!(scores, vec![("a".to_string(), 0.9)]);
    }

    #[test]
    fn identical_records_get_equal_scores() {
        let ds = validate_dataset(vec![one_record("a"), one_record("b")], true).unwrap();
        let scores = score_calibration_set(&ds, &FilterConfig::default()).unwrap();
        assert_eq!(scores[0].1, scores[1].1);
    }

    proptest! {
        /// The loss is a nonincreasing step function of the threshold.
        #[test]
        fn loss_nonincreasing_in_threshold(
            pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..8),
            lambda in 0.0f64..=1.0,
        ) {
            let (surr, gold): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let mut prev = usize::MAX;
            let mut s = -0.1;
            while s <= 1.2 {
                let l = false_inclusion_loss(&surr, &gold, s, lambda).unwrap();
                prop_assert!(l <= prev);
                prev = l;
                s += 0.05;
            }
        }

        /// The fast score matches exhaustive grid enumeration and lands in
        /// the grid with a safe loss.
        #[test]
        fn score_matches_brute_force(
            pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..=8),
            lambda in 0.0f64..=1.0,
            rho in 0u32..3,
        ) {
            let (surr, gold): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let fast = nonconformity_score(&surr, &gold, lambda, rho, &FalseInclusionLoss).unwrap();
            let slow = brute_force_nonconformity(&surr, &gold, lambda, rho);
            prop_assert_eq!(fast, slow);
            prop_assert!(threshold_grid(&surr).contains(&fast));
            let realized = false_inclusion_loss(&surr, &gold, fast, lambda).unwrap();
            prop_assert!(realized as f64 <= f64::from(rho));
        }

        /// Raising the allowance never raises the score.
        #[test]
        fn score_nonincreasing_in_rho(
            pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..=8),
            lambda in 0.0f64..=1.0,
        ) {
            let (surr, gold): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let mut prev = f64::INFINITY;
            for rho in 0..4 {
                let s = nonconformity_score(&surr, &gold, lambda, rho, &FalseInclusionLoss).unwrap();
                prop_assert!(s <= prev);
                prev = s;
            }
        }
    }
}
