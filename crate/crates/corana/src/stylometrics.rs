//! Style statistics for an ordered sequence of factor-space points and a
//! Monte Carlo permutation test against randomized orderings.
//!
//! Three statistics summarize how a sequence moves through the space:
//!
//! * movement variability: sample standard deviation of the step lengths;
//! * tempo: negative least-squares slope of word counts against position,
//!   so beats that shorten towards the end give a positive tempo;
//! * mean rhythm: mean step length per word of the arriving beat.
//!
//! The permutation test reorders the (point, word count) pairs jointly and
//! asks how often the observed sequence beats a randomized one: lower
//! variability, higher tempo, higher mean rhythm. Comparisons are strict,
//! so ties never favour the observed sequence.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::seqclust::OrderedPoints;

#[derive(Debug, Error)]
pub enum StyleError {
    #[error("{coords} points but {counts} word counts")]
    LengthMismatch { coords: usize, counts: usize },
    #[error("sequence needs at least {min} beats, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("word count at position {0} is zero")]
    ZeroWordCount(usize),
    #[error("permutation test needs at least one trial")]
    NoTrials,
}

/// An ordered sequence of beats: coordinates plus the word count of each
/// beat. Lists are parallel and word counts are positive.
#[derive(Debug, Clone)]
pub struct SequenceProfile {
    coords: OrderedPoints,
    word_counts: Vec<u64>,
}

impl SequenceProfile {
    pub fn new(coords: OrderedPoints, word_counts: Vec<u64>) -> Result<Self, StyleError> {
        if word_counts.len() != coords.len() {
            return Err(StyleError::LengthMismatch {
                coords: coords.len(),
                counts: word_counts.len(),
            });
        }
        if coords.len() < 2 {
            return Err(StyleError::TooShort {
                min: 2,
                got: coords.len(),
            });
        }
        if let Some(pos) = word_counts.iter().position(|&c| c == 0) {
            return Err(StyleError::ZeroWordCount(pos));
        }
        Ok(SequenceProfile {
            coords,
            word_counts,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coords(&self) -> &OrderedPoints {
        &self.coords
    }

    pub fn word_counts(&self) -> &[u64] {
        &self.word_counts
    }

    /// The same beats in a new order. `order` must be a permutation of
    /// `0..n`; coordinates and word counts move together.
    fn reordered(&self, order: &[usize]) -> SequenceProfile {
        let points = order.iter().map(|&i| self.coords.point(i).to_vec()).collect();
        let labels = order
            .iter()
            .map(|&i| self.coords.labels()[i].clone())
            .collect();
        let word_counts = order.iter().map(|&i| self.word_counts[i]).collect();
        SequenceProfile {
            coords: OrderedPoints::new(labels, points).expect("permutation of valid points"),
            word_counts,
        }
    }
}

/// Step lengths of the sequence: the Euclidean distance between each pair
/// of consecutive points.
pub fn movements(coords: &OrderedPoints) -> Vec<f64> {
    (1..coords.len())
        .map(|t| coords.euclidean(t - 1, t))
        .collect()
}

/// The three style statistics of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StyleStats {
    pub movement_variability: f64,
    pub tempo: f64,
    pub mean_rhythm: f64,
}

/// Compute the style statistics of a profile.
pub fn style_stats(profile: &SequenceProfile) -> StyleStats {
    let steps = movements(profile.coords());
    StyleStats {
        movement_variability: sample_std(&steps),
        tempo: -least_squares_slope(profile.word_counts()),
        mean_rhythm: steps
            .iter()
            .enumerate()
            .map(|(t, m)| m / profile.word_counts()[t + 1] as f64)
            .sum::<f64>()
            / steps.len() as f64,
    }
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Least-squares slope of `values` against positions `1..=n`.
fn least_squares_slope(values: &[u64]) -> f64 {
    let n = values.len() as f64;
    let x_mean = (n + 1.0) / 2.0;
    let y_mean = values.iter().sum::<u64>() as f64 / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, &y) in values.iter().enumerate() {
        let dx = (t + 1) as f64 - x_mean;
        num += dx * (y as f64 - y_mean);
        den += dx * dx;
    }
    num / den
}

/// Observed value of one statistic and the fraction of randomized trials it
/// strictly beats, with the trial count and base seed that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatEntry {
    pub observed: f64,
    pub beat_fraction: f64,
    pub trials: u32,
    pub seed: u64,
}

/// Per-statistic percentile report of a permutation test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercentileReport {
    pub movement_variability: StatEntry,
    pub tempo: StatEntry,
    pub mean_rhythm: StatEntry,
}

impl PercentileReport {
    pub fn trials(&self) -> u32 {
        self.movement_variability.trials
    }

    pub fn seed(&self) -> u64 {
        self.movement_variability.seed
    }
}

/// Monte Carlo test the observed sequence against `trials` uniformly
/// random reorderings of its beats.
///
/// Each trial draws from its own ChaCha stream derived from
/// `(seed, trial index)`, so the report does not depend on execution order.
/// Word counts and coordinates are permuted jointly: a trial is a
/// reordering of beats, never a scramble of their contents. Coordinates
/// are taken as given; reordering rows of a contingency table permutes its
/// factor coordinates identically, so nothing needs to be recomputed.
pub fn permutation_test(
    profile: &SequenceProfile,
    trials: u32,
    seed: u64,
) -> Result<PercentileReport, StyleError> {
    if trials == 0 {
        return Err(StyleError::NoTrials);
    }
    if profile.len() < 3 {
        return Err(StyleError::TooShort {
            min: 3,
            got: profile.len(),
        });
    }
    let observed = style_stats(profile);
    let mut beats = [0u32; 3];
    let mut order: Vec<usize> = (0..profile.len()).collect();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64 + 1);
        order.shuffle(&mut rng);
        let randomized = style_stats(&profile.reordered(&order));
        if observed.movement_variability < randomized.movement_variability {
            beats[0] += 1;
        }
        if observed.tempo > randomized.tempo {
            beats[1] += 1;
        }
        if observed.mean_rhythm > randomized.mean_rhythm {
            beats[2] += 1;
        }
    }
    let entry = |observed: f64, beaten: u32| StatEntry {
        observed,
        beat_fraction: beaten as f64 / trials as f64,
        trials,
        seed,
    };
    Ok(PercentileReport {
        movement_variability: entry(observed.movement_variability, beats[0]),
        tempo: entry(observed.tempo, beats[1]),
        mean_rhythm: entry(observed.mean_rhythm, beats[2]),
    })
}
