//! Neural actor-critic for selective harvesting: a convolutional policy and
//! action-value network over compressed states, trained on-policy with a
//! clipped surrogate objective.

pub mod approximator;
pub mod trainer;

pub use approximator::{
    backward, backward_batch_into, backward_into, entropy, forward, forward_batch, softmax_policy, AdamState, Forward, Head, NetSpec,
    ParamSet, VALUE_SENTINEL,
};
pub use trainer::{
    advantage, advantages, compute_targets, policies, slot_values, evaluate_online, ppo_loss, rollout, train_offline,
    train_offline_on, value_loss, vanilla_pg_gradient, AdvantageMode, Agent, Checkpoint, EpochLog,
    Learner, OnlineConfig, ReplayBuffer, Selection, Target, TrainConfig, TrainOutcome, Transition,
};
