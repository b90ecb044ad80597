use super::Ranking;
use crate::env::ObservedState;

/// Maximum observed degree: score = known edges to probed targets.
pub fn rank_mod(state: &ObservedState) -> Ranking {
    let scores: Vec<f64> = (0..state.observed_count())
        .map(|i| {
            state
                .local_neighbors(i)
                .iter()
                .filter(|&&j| state.local_label(j) == Some(true))
                .count() as f64
        })
        .collect();
    Ranking::from_local_scores(state, &scores)
}
