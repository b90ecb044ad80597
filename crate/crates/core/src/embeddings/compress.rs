//! Reorder-and-truncate compression of an observed graph into a fixed-size
//! two-channel tensor.
//!
//! Slots are filled best-first from the ranking. Because probed nodes are
//! ranked too, a long episode could push every boundary node out of the top
//! `k`; the first `ceil(k / 2)` boundary nodes of the ranking are therefore
//! always kept, and the remaining slots take the best of everything else.
//! Slots keep ranking order, so slot 0 is the best-ranked retained node.

use super::Ranking;
use crate::env::ObservedState;

pub const LABEL_TARGET: f64 = 1.0;
pub const LABEL_BACKGROUND: f64 = -1.0;
pub const LABEL_UNKNOWN: f64 = 0.0;

/// Fixed-size agent input. `tensor` is channel-major `2 x k x k`: channel 0
/// holds known adjacency among slots, channel 1 holds known labels on the
/// diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedState {
    pub k: usize,
    /// Global node id per slot; `None` for padding.
    pub slots: Vec<Option<usize>>,
    pub tensor: Vec<f64>,
    /// True iff the slot holds a boundary node.
    pub mask: Vec<bool>,
}

impl RankedState {
    pub fn adj(&self, i: usize, j: usize) -> f64 {
        self.tensor[i * self.k + j]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.tensor[self.k * self.k + i * self.k + i]
    }

    pub fn valid_actions(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    /// Slot holding global node `v`, if retained.
    pub fn slot_of(&self, v: usize) -> Option<usize> {
        self.slots.iter().position(|&s| s == Some(v))
    }
}

/// Compresses `state` to `k` slots ordered by `ranking`. Panics if `k == 0`
/// or the ranking does not cover the observed nodes.
pub fn compress(state: &ObservedState, ranking: &Ranking, k: usize) -> RankedState {
    assert!(k >= 1, "compression size must be positive");
    assert_eq!(
        ranking.len(),
        state.observed_count(),
        "ranking must cover the observed nodes"
    );
    let order = ranking.order();
    let reserve = k.div_ceil(2);
    let mut keep = vec![false; order.len()];
    let mut kept = 0;
    for (i, &v) in order.iter().enumerate() {
        if kept == reserve {
            break;
        }
        if state.boundary().contains(&v) {
            keep[i] = true;
            kept += 1;
        }
    }
    for flag in keep.iter_mut() {
        if kept == k {
            break;
        }
        if !*flag {
            *flag = true;
            kept += 1;
        }
    }
    let mut slots: Vec<Option<usize>> = order
        .iter()
        .zip(&keep)
        .filter(|(_, &f)| f)
        .map(|(&v, _)| Some(v))
        .collect();
    slots.resize(k, None);

    let mut tensor = vec![0.0; 2 * k * k];
    let mut mask = vec![false; k];
    let locals: Vec<Option<usize>> = slots
        .iter()
        .map(|s| s.map(|v| state.local_index(v).expect("ranked node is observed")))
        .collect();
    let mut slot_of_local = vec![usize::MAX; state.observed_count()];
    for (s, l) in locals.iter().enumerate() {
        if let Some(l) = l {
            slot_of_local[*l] = s;
        }
    }
    for (s, l) in locals.iter().enumerate() {
        let Some(l) = *l else { continue };
        for &j in state.local_neighbors(l) {
            let t = slot_of_local[j];
            if t != usize::MAX {
                tensor[s * k + t] = 1.0;
            }
        }
        tensor[k * k + s * k + s] = match state.local_label(l) {
            Some(true) => LABEL_TARGET,
            Some(false) => LABEL_BACKGROUND,
            None => LABEL_UNKNOWN,
        };
        mask[s] = state.local_label(l).is_none();
    }
    RankedState {
        k,
        slots,
        tensor,
        mask,
    }
}
