//! Multi-agent on-policy actor-critic training with a clipped surrogate
//! objective, plus the single-agent online regime used at evaluation time.

use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use harvest_core::embeddings::{compress, rank, EmbedConfig, RankedState, Ranking};
use harvest_core::generators::InstanceSpec;
use harvest_core::{seeds, EpisodeConfig, Error, GroundTruth, ObservedState, Result, TraceRecord};

use crate::approximator::{
    backward_batch_into, backward_into, entropy, forward, forward_batch, softmax_policy, AdamState,
    Head, NetSpec, ParamSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdvantageMode {
    /// Action value minus the mean over unmasked slots.
    Mean,
    /// Action value minus the sum over unmasked slots.
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Sample,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Steps per agent between batch updates.
    pub window: usize,
    /// Return horizon.
    pub horizon: usize,
    pub entropy_coef: f64,
    pub clip: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub agents: usize,
    pub epochs: usize,
    pub budget: usize,
    pub k: usize,
    pub channels: usize,
    pub layers: usize,
    pub kernel: usize,
    /// Filled from the experiment-wide embedding settings, not this table.
    #[serde(skip)]
    pub embed: EmbedConfig,
    pub preset: String,
    pub advantage: AdvantageMode,
    /// Add a bootstrapped tail value when a window cuts an episode.
    pub bootstrap: bool,
    /// Re-rank every `rerank_stride` probes; new nodes in between rank last.
    pub rerank_stride: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            window: 32,
            horizon: 4,
            entropy_coef: 0.2,
            clip: 0.1,
            gamma: 0.1,
            learning_rate: 1e-4,
            agents: 8,
            epochs: 100,
            budget: 120,
            k: 64,
            channels: 64,
            layers: 3,
            kernel: 3,
            embed: EmbedConfig::default(),
            preset: "nac-small".into(),
            advantage: AdvantageMode::Mean,
            bootstrap: false,
            rerank_stride: 1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn net(&self, head: Head) -> NetSpec {
        NetSpec {
            k: self.k,
            channels: self.channels,
            layers: self.layers,
            kernel: self.kernel,
            head,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("window", self.window),
            ("horizon", self.horizon),
            ("agents", self.agents),
            ("budget", self.budget),
            ("rerank_stride", self.rerank_stride),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return Err(Error::Config(format!("clip {} outside (0, 1)", self.clip)));
        }
        if !(self.gamma >= 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if !(self.learning_rate > 0.0) || !(self.entropy_coef >= 0.0) {
            return Err(Error::Config("learning rate must be positive and entropy coefficient non-negative".into()));
        }
        self.embed.validate()?;
        self.net(Head::Logits).validate()
    }
}

/// Hyperparameters of the single-agent online regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OnlineConfig {
    pub window: usize,
    pub horizon: usize,
    pub gamma: f64,
    pub clip: f64,
    pub entropy_coef: f64,
    pub learning_rate: f64,
    pub advantage: AdvantageMode,
    /// Keep updating parameters while harvesting.
    pub updates: bool,
    pub selection: Selection,
    pub rerank_stride: usize,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        OnlineConfig {
            window: 1,
            horizon: 1,
            gamma: 1.0,
            clip: 0.2,
            entropy_coef: 0.0,
            learning_rate: 1e-3,
            advantage: AdvantageMode::Mean,
            updates: true,
            selection: Selection::Sample,
            rerank_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: RankedState,
    pub action: usize,
    pub reward: u8,
    pub next: RankedState,
    pub agent: usize,
    pub episode: usize,
    pub step: usize,
    /// The episode ended with this transition.
    pub terminal: bool,
    /// Probability of `action` under the sampling policy.
    pub prob: f64,
}

/// On-policy buffer: one time-ordered lane per agent.
#[derive(Debug, Clone, Default)]
pub struct ReplayBuffer {
    pub lanes: Vec<Vec<Transition>>,
}

impl ReplayBuffer {
    pub fn new(agents: usize) -> Self {
        ReplayBuffer {
            lanes: vec![Vec::new(); agents],
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.lanes.len() <= t.agent {
            self.lanes.resize(t.agent + 1, Vec::new());
        }
        self.lanes[t.agent].push(t);
    }

    pub fn len(&self) -> usize {
        self.lanes.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&mut self) {
        self.lanes.iter_mut().for_each(Vec::clear);
    }

    /// Transitions lane by lane, in time order within each lane.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.lanes.iter().flatten()
    }
}

/// Truncated discounted return for one transition, in buffer order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub q: f64,
    /// `gamma^n` when the window, not the episode or horizon, cut the sum
    /// after `n` rewards; zero otherwise.
    pub tail_weight: f64,
    /// Buffer position whose `next` state continues the cut sum.
    pub tail_from: usize,
}

/// `Q_t = sum_{i < min(H, remaining)} gamma^i r_{t+i}`, never crossing an
/// episode end or the end of the agent's lane.
pub fn compute_targets(buffer: &ReplayBuffer, horizon: usize, gamma: f64) -> Vec<Target> {
    let mut out = Vec::with_capacity(buffer.len());
    let mut base = 0;
    for lane in &buffer.lanes {
        for t in 0..lane.len() {
            let mut q = 0.0;
            let mut w = 1.0;
            let mut i = 0;
            let mut ended = false;
            while i < horizon && t + i < lane.len() {
                let tr = &lane[t + i];
                if tr.episode != lane[t].episode {
                    ended = true;
                    break;
                }
                q += w * f64::from(tr.reward);
                w *= gamma;
                i += 1;
                if tr.terminal {
                    ended = true;
                    break;
                }
            }
            let cut = !ended && i < horizon;
            out.push(Target {
                q,
                tail_weight: if cut { w } else { 0.0 },
                tail_from: base + t + i - 1,
            });
        }
        base += lane.len();
    }
    out
}

/// Mean of the unmasked slot values: the state value under a uniform policy.
pub fn state_value(values: &[f64], mask: &[bool]) -> f64 {
    let (sum, n) = values
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, n), (&v, _)| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Adds bootstrapped tails `tail_weight * V(next)` from the value network.
pub fn add_bootstrap(
    targets: &mut [Target],
    buffer: &ReplayBuffer,
    value: &ParamSet,
) -> Result<()> {
    let flat: Vec<&Transition> = buffer.iter().collect();
    for t in targets.iter_mut().filter(|t| t.tail_weight > 0.0) {
        let next = &flat[t.tail_from].next;
        let f = forward(&value.spec, &value.values, &next.tensor, &next.mask)?;
        t.q += t.tail_weight * state_value(&f.output, &next.mask);
    }
    Ok(())
}

/// Samples per forward/backward chunk in the loss functions.
const CHUNK: usize = 32;

/// `(1/B) sum (y - Q(s)[a])^2` and its parameter gradient.
pub fn value_loss(value: &ParamSet, batch: &[(&RankedState, usize, f64)]) -> Result<(f64, Vec<f64>)> {
    let spec = &value.spec;
    let mut grad = vec![0.0; spec.param_count()];
    if batch.is_empty() {
        return Ok((0.0, grad));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for chunk in batch.chunks(CHUNK) {
        let inputs = chunk
            .iter()
            .map(|&(s, a, _)| check_action(s, a).map(|_| (s.tensor.as_slice(), s.mask.as_slice())))
            .collect::<Result<Vec<_>>>()?;
        let fwds = forward_batch(spec, &value.values, &inputs)?;
        let upstreams: Vec<Vec<f64>> = chunk
            .iter()
            .zip(&fwds)
            .map(|(&(_, a, y), f)| {
                let err = y - f.output[a];
                loss += scale * err * err;
                let mut u = vec![0.0; spec.k];
                u[a] = -2.0 * err * scale;
                u
            })
            .collect();
        backward_batch_into(spec, &value.values, &fwds, &upstreams, &mut grad)?;
    }
    Ok((loss, grad))
}

/// Per-slot values of each state.
pub fn slot_values(net: &ParamSet, states: &[&RankedState]) -> Result<Vec<Vec<f64>>> {
    let inputs: Vec<(&[f64], &[bool])> = states
        .iter()
        .map(|s| (s.tensor.as_slice(), s.mask.as_slice()))
        .collect();
    let mut out = Vec::with_capacity(states.len());
    for chunk in inputs.chunks(CHUNK) {
        out.extend(
            forward_batch(&net.spec, &net.values, chunk)?
                .into_iter()
                .map(|f| f.output),
        );
    }
    Ok(out)
}

/// Policy distributions of each state.
pub fn policies(theta: &ParamSet, states: &[&RankedState]) -> Result<Vec<Vec<f64>>> {
    Ok(slot_values(theta, states)?
        .into_iter()
        .zip(states)
        .map(|(logits, s)| softmax_policy(&logits, &s.mask))
        .collect())
}

fn check_action(s: &RankedState, a: usize) -> Result<()> {
    if a >= s.k || !s.mask[a] {
        return Err(Error::Contract(format!("slot {a} is not a valid action")));
    }
    Ok(())
}

/// Advantage of slot `a` from per-slot values.
pub fn advantage_from_values(values: &[f64], mask: &[bool], a: usize, mode: AdvantageMode) -> f64 {
    let baseline = match mode {
        AdvantageMode::Mean => state_value(values, mask),
        AdvantageMode::Sum => values.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| v).sum(),
    };
    values[a] - baseline
}

pub fn advantage(value: &ParamSet, s: &RankedState, a: usize, mode: AdvantageMode) -> Result<f64> {
    check_action(s, a)?;
    let f = forward(&value.spec, &value.values, &s.tensor, &s.mask)?;
    Ok(advantage_from_values(&f.output, &s.mask, a, mode))
}

/// Advantages of a batch of `(state, slot)` pairs.
pub fn advantages(value: &ParamSet, batch: &[(&RankedState, usize)], mode: AdvantageMode) -> Result<Vec<f64>> {
    for &(s, a) in batch {
        check_action(s, a)?;
    }
    let states: Vec<&RankedState> = batch.iter().map(|&(s, _)| s).collect();
    Ok(slot_values(value, &states)?
        .iter()
        .zip(batch)
        .map(|(v, &(s, a))| advantage_from_values(v, &s.mask, a, mode))
        .collect())
}

/// `min(rho A, clip(rho, 1 - eps, 1 + eps) A)`.
pub fn clipped_surrogate(rho: f64, adv: f64, eps: f64) -> f64 {
    (rho * adv).min(rho.clamp(1.0 - eps, 1.0 + eps) * adv)
}

#[derive(Debug, Clone)]
pub struct PolicyLoss {
    /// Negated objective (the quantity descended).
    pub loss: f64,
    pub grad: Vec<f64>,
    /// Mean policy entropy over the batch.
    pub entropy: f64,
}

/// Negated mean of `min(rho A, clip(rho) A) + c S[pi](s)` and its gradient.
/// `rho` compares the current policy with `theta_old`.
pub fn ppo_loss(
    theta: &ParamSet,
    theta_old: &ParamSet,
    batch: &[(&RankedState, usize)],
    advantages: &[f64],
    eps: f64,
    c: f64,
) -> Result<PolicyLoss> {
    let spec = &theta.spec;
    if theta_old.spec != *spec || advantages.len() != batch.len() {
        return Err(Error::Contract("policy batch and snapshot do not line up".into()));
    }
    let same = theta.values == theta_old.values;
    let mut grad = vec![0.0; spec.param_count()];
    let mut loss = 0.0;
    let mut total_entropy = 0.0;
    if batch.is_empty() {
        return Ok(PolicyLoss { loss, grad, entropy: 0.0 });
    }
    let scale = 1.0 / batch.len() as f64;
    for (chunk, achunk) in batch.chunks(CHUNK).zip(advantages.chunks(CHUNK)) {
        let inputs = chunk
            .iter()
            .map(|&(s, a)| check_action(s, a).map(|_| (s.tensor.as_slice(), s.mask.as_slice())))
            .collect::<Result<Vec<_>>>()?;
        let fwds = forward_batch(spec, &theta.values, &inputs)?;
        let old = if same {
            None
        } else {
            Some(forward_batch(spec, &theta_old.values, &inputs)?)
        };
        let mut upstreams = Vec::with_capacity(chunk.len());
        for (i, (&(s, a), &adv)) in chunk.iter().zip(achunk).enumerate() {
            let p = softmax_policy(&fwds[i].output, &s.mask);
            let p_old = match &old {
                None => p[a],
                Some(o) => softmax_policy(&o[i].output, &s.mask)[a],
            };
            if p_old <= 0.0 {
                return Err(Error::Contract(format!(
                    "sampling policy gave slot {a} zero probability"
                )));
            }
            let rho = p[a] / p_old;
            let h = entropy(&p);
            total_entropy += h;
            loss -= scale * (clipped_surrogate(rho, adv, eps) + c * h);

            let unclipped = rho * adv <= rho.clamp(1.0 - eps, 1.0 + eps) * adv;
            let mut upstream = vec![0.0; spec.k];
            for j in (0..spec.k).filter(|&j| s.mask[j]) {
                let mut d = 0.0;
                if unclipped {
                    let delta = if j == a { 1.0 } else { 0.0 };
                    d += adv * rho * (delta - p[j]);
                }
                if c != 0.0 && p[j] > 0.0 {
                    d -= c * p[j] * (p[j].ln() + h);
                }
                upstream[j] = -scale * d;
            }
            upstreams.push(upstream);
        }
        backward_batch_into(spec, &theta.values, &fwds, &upstreams, &mut grad)?;
    }
    Ok(PolicyLoss {
        loss,
        grad,
        entropy: total_entropy * scale,
    })
}

/// Gradient of `-(1/B) sum A log pi(a|s)`: the plain score-function
/// estimator, written independently of the surrogate.
pub fn vanilla_pg_gradient(
    theta: &ParamSet,
    batch: &[(&RankedState, usize)],
    advantages: &[f64],
) -> Result<Vec<f64>> {
    let spec = &theta.spec;
    let mut grad = vec![0.0; spec.param_count()];
    let scale = 1.0 / batch.len().max(1) as f64;
    for (s, &adv) in batch.iter().zip(advantages) {
        let f = forward(spec, &theta.values, &s.0.tensor, &s.0.mask)?;
        let p = softmax_policy(&f.output, &s.0.mask);
        // d log softmax_a / d z_j = [j == a] - p_j
        let upstream: Vec<f64> = (0..spec.k)
            .map(|j| -scale * adv * (f64::from(u8::from(j == s.1)) - p[j]))
            .collect();
        backward_into(spec, &theta.values, &f, &upstream, &mut grad)?;
    }
    Ok(grad)
}

/// Draws an index from `p` with one uniform variate.
pub fn sample_categorical(p: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let mut u = rng.random::<f64>();
    let mut last = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > 0.0 {
            if u < x {
                return i;
            }
            u -= x;
            last = i;
        }
    }
    last
}

/// Lowest slot of maximal probability.
pub fn greedy_slot(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > p[best] {
            best = i;
        }
    }
    best
}

/// One environment plus the bookkeeping to turn it into network input.
pub struct Agent {
    pub id: usize,
    pub episode: usize,
    gt: GroundTruth,
    state: ObservedState,
    ranked: RankedState,
    ranking: Ranking,
    since_rank: usize,
    embed: EmbedConfig,
    embed_seed: u64,
    k: usize,
    stride: usize,
    rng: ChaCha8Rng,
}

impl Agent {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: usize,
        episode: usize,
        gt: GroundTruth,
        episode_cfg: &EpisodeConfig,
        embed: &EmbedConfig,
        k: usize,
        stride: usize,
        seed: u64,
    ) -> Result<Self> {
        let state = ObservedState::reset(&gt, episode_cfg)?;
        let embed_seed = seeds::derive(seed, 1);
        let ranking = rank(&state, embed, seeds::derive(embed_seed, 0))?;
        let ranked = compress(&state, &ranking, k);
        Ok(Agent {
            id,
            episode,
            gt,
            state,
            ranked,
            ranking,
            since_rank: 0,
            embed: embed.clone(),
            embed_seed,
            k,
            stride: stride.max(1),
            rng: seeds::rng(seeds::derive(seed, 0)),
        })
    }

    pub fn is_done(&self) -> bool {
        self.state.is_done()
    }

    pub fn state(&self) -> &ObservedState {
        &self.state
    }

    pub fn ranked(&self) -> &RankedState {
        &self.ranked
    }

    pub fn ground_truth(&self) -> &GroundTruth {
        &self.gt
    }

    fn refresh(&mut self) -> Result<()> {
        self.since_rank += 1;
        if self.since_rank >= self.stride {
            self.since_rank = 0;
            let seed = seeds::derive(self.embed_seed, self.state.step() as u64);
            self.ranking = rank(&self.state, &self.embed, seed)?;
        } else {
            // Keep the old order; newly observed nodes go last, by id.
            let known = self.ranking.positions();
            let scores: Vec<f64> = self
                .state
                .observed()
                .iter()
                .map(|v| match known.get(v) {
                    Some(&pos) => -(pos as f64),
                    None => f64::NEG_INFINITY,
                })
                .collect();
            self.ranking = Ranking::from_scores(self.state.observed(), &scores);
        }
        self.ranked = compress(&self.state, &self.ranking, self.k);
        Ok(())
    }

    /// Probes the node in `slot` and re-embeds. Returns the transition.
    pub fn act(&mut self, slot: usize, prob: f64) -> Result<Transition> {
        check_action(&self.ranked, slot)?;
        let node = self.ranked.slots[slot].expect("unmasked slots hold nodes");
        let reward = self.state.probe(&self.gt, node)?;
        let before = self.ranked.clone();
        self.refresh()?;
        Ok(Transition {
            state: before,
            action: slot,
            reward,
            next: self.ranked.clone(),
            agent: self.id,
            episode: self.episode,
            step: self.state.step(),
            terminal: self.state.is_done(),
            prob,
        })
    }

    /// Policy distribution over the current slots.
    pub fn policy(&self, theta: &ParamSet) -> Result<Vec<f64>> {
        let f = forward(&theta.spec, &theta.values, &self.ranked.tensor, &self.ranked.mask)?;
        Ok(softmax_policy(&f.output, &self.ranked.mask))
    }

    /// Samples a slot from `theta` and acts on it.
    pub fn sample_step(&mut self, theta: &ParamSet) -> Result<Transition> {
        let p = self.policy(theta)?;
        let slot = sample_categorical(&p, &mut self.rng);
        self.act(slot, p[slot])
    }
}

/// Runs every unfinished agent for up to `window` steps under `theta_old`.
/// Agents advance in lockstep so each step shares one batched forward pass;
/// each agent draws only from its own generator.
pub fn rollout(
    agents: &mut [Agent],
    theta_old: &ParamSet,
    window: usize,
    buffer: &mut ReplayBuffer,
) -> Result<()> {
    for _ in 0..window {
        let active: Vec<usize> = (0..agents.len()).filter(|&i| !agents[i].is_done()).collect();
        if active.is_empty() {
            break;
        }
        let states: Vec<&RankedState> = active.iter().map(|&i| agents[i].ranked()).collect();
        let dists = policies(theta_old, &states)?;
        for (&i, p) in active.iter().zip(&dists) {
            let agent = &mut agents[i];
            let slot = sample_categorical(p, &mut agent.rng);
            buffer.push(agent.act(slot, p[slot])?);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub value_loss: f64,
    pub policy_loss: f64,
    pub entropy: f64,
    pub samples: usize,
}

pub struct Learner {
    pub policy: ParamSet,
    pub value: ParamSet,
    pub policy_adam: AdamState,
    pub value_adam: AdamState,
    pub horizon: usize,
    pub gamma: f64,
    pub clip: f64,
    pub entropy_coef: f64,
    pub advantage: AdvantageMode,
    pub bootstrap: bool,
}

impl Learner {
    /// Value step, advantages under the updated value network, then one
    /// policy step. The buffer must come from the current policy.
    pub fn update(&mut self, buffer: &ReplayBuffer) -> Result<UpdateStats> {
        let mut targets = compute_targets(buffer, self.horizon, self.gamma);
        if self.bootstrap {
            add_bootstrap(&mut targets, buffer, &self.value)?;
        }
        let flat: Vec<&Transition> = buffer.iter().collect();
        let vbatch: Vec<(&RankedState, usize, f64)> = flat
            .iter()
            .zip(&targets)
            .map(|(t, y)| (&t.state, t.action, y.q))
            .collect();
        let (vloss, vgrad) = value_loss(&self.value, &vbatch)?;
        ensure_finite("value loss", vloss, &vgrad, &flat, &targets)?;
        self.value_adam.step(&mut self.value.values, &vgrad);

        let pbatch: Vec<(&RankedState, usize)> = flat.iter().map(|t| (&t.state, t.action)).collect();
        let advantages = advantages(&self.value, &pbatch, self.advantage)?;
        let snapshot = self.policy.clone();
        let pl = ppo_loss(&self.policy, &snapshot, &pbatch, &advantages, self.clip, self.entropy_coef)?;
        ensure_finite("policy loss", pl.loss, &pl.grad, &flat, &targets)?;
        self.policy_adam.step(&mut self.policy.values, &pl.grad);
        Ok(UpdateStats {
            value_loss: vloss,
            policy_loss: pl.loss,
            entropy: pl.entropy,
            samples: flat.len(),
        })
    }
}

fn ensure_finite(
    what: &str,
    loss: f64,
    grad: &[f64],
    batch: &[&Transition],
    targets: &[Target],
) -> Result<()> {
    if loss.is_finite() && grad.iter().all(|g| g.is_finite()) {
        return Ok(());
    }
    let rows: Vec<String> = batch
        .iter()
        .zip(targets)
        .map(|(t, y)| {
            format!(
                "agent={} episode={} step={} slot={} reward={} prob={:e} target={:e}",
                t.agent, t.episode, t.step, t.action, t.reward, t.prob, y.q
            )
        })
        .collect();
    Err(Error::Numerical(format!(
        "{what} = {loss} over {} transitions:\n{}",
        batch.len(),
        rows.join("\n")
    )))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean undiscounted episode return over agents.
    pub mean_return: f64,
    pub mean_targets_found: f64,
    /// Sample-weighted mean policy entropy over the epoch's updates.
    pub policy_entropy: f64,
    /// Sample-weighted mean value loss over the epoch's updates.
    pub value_loss: f64,
}

impl EpochLog {
    pub const CSV_HEADER: &'static str =
        "epoch,mean_return,mean_targets_found,policy_entropy,value_loss";
}

impl fmt::Display for EpochLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            self.epoch, self.mean_return, self.mean_targets_found, self.policy_entropy, self.value_loss
        )
    }
}

/// Policy and value parameters, saved side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub policy: ParamSet,
    pub value: ParamSet,
}

impl Checkpoint {
    pub fn save(&self, dir: &Path) -> Result<()> {
        self.policy.save(dir, "policy")?;
        self.value.save(dir, "value")
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let policy = ParamSet::load(dir, "policy")?;
        let value = ParamSet::load(dir, "value")?;
        if policy.spec.head != Head::Logits || value.spec.head != Head::Values || policy.spec.k != value.spec.k {
            return Err(Error::Contract(format!(
                "checkpoint in {} pairs {} with {}",
                dir.display(),
                policy.spec,
                value.spec
            )));
        }
        Ok(Checkpoint { policy, value })
    }
}

pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub log: Vec<EpochLog>,
}

/// Seed streams of a training run.
pub mod streams {
    pub const POLICY_INIT: u64 = 0;
    pub const VALUE_INIT: u64 = 1;
    pub const INSTANCE: u64 = 2;
    pub const EPISODE: u64 = 3;
    pub const AGENT: u64 = 4;
}

/// Offline training on the preset named in `cfg`.
pub fn train_offline(cfg: &TrainConfig, on_epoch: impl FnMut(&EpochLog)) -> Result<TrainOutcome> {
    let spec = InstanceSpec::preset(&cfg.preset)?;
    train_offline_on(cfg, &spec, on_epoch)
}

/// Offline training: each epoch gives every agent a fresh instance and one
/// episode, updating after every window of steps.
pub fn train_offline_on(
    cfg: &TrainConfig,
    instances: &InstanceSpec,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let pspec = cfg.net(Head::Logits);
    let vspec = cfg.net(Head::Values);
    let stream = |s: u64| seeds::derive(cfg.seed, s);
    let policy = ParamSet::init(&pspec, &mut seeds::rng(stream(streams::POLICY_INIT)));
    let value = ParamSet::init(&vspec, &mut seeds::rng(stream(streams::VALUE_INIT)));
    let mut learner = Learner {
        policy_adam: AdamState::new(policy.values.len(), cfg.learning_rate),
        value_adam: AdamState::new(value.values.len(), cfg.learning_rate),
        policy,
        value,
        horizon: cfg.horizon,
        gamma: cfg.gamma,
        clip: cfg.clip,
        entropy_coef: cfg.entropy_coef,
        advantage: cfg.advantage,
        bootstrap: cfg.bootstrap,
    };
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut buffer = ReplayBuffer::new(cfg.agents);
    for epoch in 0..cfg.epochs {
        let mut agents = (0..cfg.agents)
            .map(|i| {
                let id = (epoch * cfg.agents + i) as u64;
                let gt = instances.generate(seeds::derive(stream(streams::INSTANCE), id))?;
                let ep = EpisodeConfig::sample(&gt, cfg.budget, seeds::derive(stream(streams::EPISODE), id))?;
                Agent::new(
                    i,
                    epoch,
                    gt,
                    &ep,
                    &cfg.embed,
                    cfg.k,
                    cfg.rerank_stride,
                    seeds::derive(stream(streams::AGENT), id),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let (mut vloss, mut ent, mut n) = (0.0, 0.0, 0usize);
        loop {
            buffer.clear();
            rollout(&mut agents, &learner.policy, cfg.window, &mut buffer)?;
            if buffer.is_empty() {
                break;
            }
            let stats = learner.update(&buffer)?;
            vloss += stats.value_loss * stats.samples as f64;
            ent += stats.entropy * stats.samples as f64;
            n += stats.samples;
        }
        let found: Vec<f64> = agents.iter().map(|a| a.state().targets_found() as f64).collect();
        let mean_found = found.iter().sum::<f64>() / found.len() as f64;
        let row = EpochLog {
            epoch,
            // Rewards are 1 per target probed, so the undiscounted return
            // equals targets found.
            mean_return: mean_found,
            mean_targets_found: mean_found,
            policy_entropy: if n > 0 { ent / n as f64 } else { 0.0 },
            value_loss: if n > 0 { vloss / n as f64 } else { 0.0 },
        };
        on_epoch(&row);
        log.push(row);
    }
    Ok(TrainOutcome {
        checkpoint: Checkpoint {
            policy: learner.policy,
            value: learner.value,
        },
        log,
    })
}

/// Harvests one instance with a single agent, optionally continuing to
/// learn with the online hyperparameters. The checkpoint is not modified.
pub fn evaluate_online(
    checkpoint: &Checkpoint,
    gt: &GroundTruth,
    episode: &EpisodeConfig,
    embed: &EmbedConfig,
    online: &OnlineConfig,
    seed: u64,
) -> Result<Vec<TraceRecord>> {
    let k = checkpoint.policy.spec.k;
    let mut agent = Agent::new(0, 0, gt.clone(), episode, embed, k, online.rerank_stride, seed)?;
    let mut learner = Learner {
        policy_adam: AdamState::new(checkpoint.policy.values.len(), online.learning_rate),
        value_adam: AdamState::new(checkpoint.value.values.len(), online.learning_rate),
        policy: checkpoint.policy.clone(),
        value: checkpoint.value.clone(),
        horizon: online.horizon,
        gamma: online.gamma,
        clip: online.clip,
        entropy_coef: online.entropy_coef,
        advantage: online.advantage,
        bootstrap: false,
    };
    let mut select_rng = seeds::rng(seeds::derive(seed, 2));
    let mut buffer = ReplayBuffer::new(1);
    let mut trace = Vec::with_capacity(episode.budget);
    while !agent.is_done() {
        let p = agent.policy(&learner.policy)?;
        let slot = match online.selection {
            Selection::Sample => sample_categorical(&p, &mut select_rng),
            Selection::Greedy => greedy_slot(&p),
        };
        let node = agent.ranked().slots[slot].expect("unmasked slots hold nodes");
        let t = agent.act(slot, p[slot])?;
        let s = agent.state();
        trace.push(TraceRecord {
            step: s.step(),
            action: node,
            reward: t.reward,
            boundary_size: s.boundary().len(),
            targets_found: s.targets_found(),
        });
        if online.updates {
            buffer.push(t);
            if buffer.len() >= online.window || agent.is_done() {
                learner.update(&buffer)?;
                buffer.clear();
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lane(rewards: &[u8], episode_ends: &[usize]) -> ReplayBuffer {
        let empty = RankedState {
            k: 1,
            slots: vec![None],
            tensor: vec![0.0; 2],
            mask: vec![false],
        };
        let mut b = ReplayBuffer::new(1);
        let mut episode = 0;
        for (t, &r) in rewards.iter().enumerate() {
            b.push(Transition {
                state: empty.clone(),
                action: 0,
                reward: r,
                next: empty.clone(),
                agent: 0,
                episode,
                step: t,
                terminal: episode_ends.contains(&t),
                prob: 1.0,
            });
            if episode_ends.contains(&t) {
                episode += 1;
            }
        }
        b
    }

    #[test]
    fn targets_examples() {
        let q = |b: &ReplayBuffer, h, g| compute_targets(b, h, g).iter().map(|t| t.q).collect::<Vec<_>>();
        assert_eq!(q(&lane(&[0, 0, 1], &[]), 3, 0.5)[0], 0.25);
        assert_eq!(q(&lane(&[1, 0, 1, 1], &[]), 1, 0.3), [1.0, 0.0, 1.0, 1.0]);
        assert!((q(&lane(&[1, 1], &[]), 4, 0.1)[0] - 1.1).abs() < 1e-15);
        // Episode end stops the sum.
        assert_eq!(q(&lane(&[0, 1, 1, 1], &[1]), 4, 1.0), [1.0, 1.0, 2.0, 1.0]);
        // gamma 1 with an unbounded horizon is the plain sum of what is left.
        assert_eq!(q(&lane(&[1, 0, 1, 1], &[]), usize::MAX, 1.0), [3.0, 2.0, 2.0, 1.0]);
        assert!(compute_targets(&ReplayBuffer::new(2), 4, 0.1).is_empty());
    }

    #[test]
    fn tails_mark_window_cuts_only() {
        let t = compute_targets(&lane(&[1, 0, 1], &[]), 2, 0.5);
        assert_eq!(t[0].tail_weight, 0.0);
        assert_eq!(t[2].tail_weight, 0.5);
        assert_eq!(t[2].tail_from, 2);
        let t = compute_targets(&lane(&[1, 0, 1], &[2]), 2, 0.5);
        assert_eq!(t[2].tail_weight, 0.0);
    }

    #[test]
    fn advantage_examples() {
        let all = [true; 4];
        assert_eq!(advantage_from_values(&[3.0; 4], &all, 2, AdvantageMode::Mean), 0.0);
        assert_eq!(advantage_from_values(&[2.0, 0.0, 0.0, 0.0], &all, 0, AdvantageMode::Mean), 1.5);
        assert_eq!(advantage_from_values(&[2.0, 0.0, 0.0, 0.0], &all, 0, AdvantageMode::Sum), 0.0);
        let m = crate::approximator::VALUE_SENTINEL;
        let mask = [true, true, false, false];
        assert_eq!(advantage_from_values(&[2.0, 0.0, m, m], &mask, 0, AdvantageMode::Mean), 1.0);
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clipped_surrogate(1.0, 0.7, 0.2), 0.7);
        assert_eq!(clipped_surrogate(1.5, 1.0, 0.2), 1.2);
        assert_eq!(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
        assert_eq!(clipped_surrogate(3.0, 2.0, f64::INFINITY), 6.0);
    }

    #[test]
    fn sampling_and_greedy() {
        assert_eq!(greedy_slot(&[0.1, 0.4, 0.4, 0.1]), 1);
        let mut rng = seeds::rng(1);
        for _ in 0..100 {
            let s = sample_categorical(&[0.0, 0.5, 0.0, 0.5], &mut rng);
            assert!(s == 1 || s == 3);
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig { clip: 1.5, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { window: 0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
    }
}
