//! Majority and weighted majority voting, with the Hoeffding-type error bound
//! for weighted votes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Label, ModelParams};
use crate::rng::{Seed, Stream};
use crate::scalar::Scalar;

/// Per-answer weights for a single task. Finite and not all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T>(Vec<T>);

impl<T: Scalar> WeightVector<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidWeights("non-finite weight".into()));
        }
        if weights.iter().all(|w| w.is_zero()) {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }
        Ok(WeightVector(weights))
    }

    pub fn uniform(len: usize) -> Result<Self> {
        Self::new(vec![T::one(); len])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> T {
        self.0.iter().map(|&w| w * w).sum::<T>().sqrt()
    }
}

/// Result of a vote. `margin` is the (weighted) sum before taking the sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteOutcome<M> {
    pub label: Label,
    pub margin: M,
    pub tie_broken: bool,
}

fn coin(seed: Seed) -> Label {
    if seed.rng(Stream::TieBreak).gen::<bool>() {
        Label::Pos
    } else {
        Label::Neg
    }
}

/// Sign of the margin, with a seeded fair coin on an exact zero.
pub fn decide<M: PartialOrd + Default + Copy>(margin: M, seed: Seed) -> VoteOutcome<M> {
    let zero = M::default();
    if margin > zero {
        VoteOutcome { label: Label::Pos, margin, tie_broken: false }
    } else if margin < zero {
        VoteOutcome { label: Label::Neg, margin, tie_broken: false }
    } else {
        VoteOutcome { label: coin(seed), margin, tie_broken: true }
    }
}

pub fn majority_vote(votes: &[Label], seed: Seed) -> Result<VoteOutcome<i64>> {
    if votes.is_empty() {
        return Err(Error::NoVotes);
    }
    let margin: i64 = votes.iter().map(|v| v.sign()).sum();
    Ok(decide(margin, seed))
}

pub fn weighted_majority_vote<T: Scalar>(
    votes: &[Label],
    weights: &WeightVector<T>,
    seed: Seed,
) -> Result<VoteOutcome<T>> {
    if votes.is_empty() {
        return Err(Error::NoVotes);
    }
    if votes.len() != weights.len() {
        return Err(Error::ShapeMismatch { votes: votes.len(), weights: weights.len() });
    }
    // summing each side separately keeps balanced equal-weight votes an exact tie
    let (mut pos, mut neg) = (T::zero(), T::zero());
    for (&v, &w) in votes.iter().zip(weights.as_slice()) {
        match v {
            Label::Pos => pos = pos + w,
            Label::Neg => neg = neg + w,
        }
    }
    Ok(decide(pos - neg, seed))
}

/// Natural log of the error bound `exp(-gamma^2 |N_i| / 2)` where
/// `gamma = sum(mu_j (2 f_j - 1)) / (||mu|| sqrt(|N_i|))`.
///
/// A non-positive `gamma` gives the trivial bound 1 (log 0).
pub fn log_hoeffding_bound<T: Scalar>(fidelities: &[T], weights: &WeightVector<T>) -> Result<T> {
    if fidelities.len() != weights.len() {
        return Err(Error::ShapeMismatch { votes: fidelities.len(), weights: weights.len() });
    }
    let half = T::lit(0.5);
    if let Some(f) = fidelities.iter().find(|&&f| !(f >= half && f <= T::one())) {
        return Err(Error::OutOfRange(format!("fidelity {f} outside [1/2, 1]")));
    }
    let norm = weights.norm();
    if norm.is_zero() {
        return Err(Error::InvalidWeights("zero weight norm".into()));
    }
    let len = T::from_count(fidelities.len());
    let two = T::lit(2.0);
    let num: T = fidelities
        .iter()
        .zip(weights.as_slice())
        .map(|(&f, &w)| w * (two * f - T::one()))
        .sum();
    let gamma = num / (norm * len.sqrt());
    if gamma <= T::zero() {
        return Ok(T::zero());
    }
    Ok(-gamma * gamma * len / two)
}

pub fn hoeffding_bound<T: Scalar>(fidelities: &[T], weights: &WeightVector<T>) -> Result<T> {
    log_hoeffding_bound(fidelities, weights).map(T::exp)
}

/// Weights `2p - 1` for matched answers and `2q - 1` otherwise.
///
/// Fails with `InvalidWeights` when every flag is unmatched and `q = 1/2`.
pub fn oracle_weights<T: Scalar>(params: &ModelParams<T>, matched: &[bool]) -> Result<WeightVector<T>> {
    let two = T::lit(2.0);
    let wm = two * params.p() - T::one();
    let wu = two * params.q() - T::one();
    WeightVector::new(matched.iter().map(|&m| if m { wm } else { wu }).collect())
}
