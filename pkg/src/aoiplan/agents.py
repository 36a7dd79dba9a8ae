"""Learned planners over the episodic visit-order process.

Three planners live here: a weight-proportional random baseline, an
action-value network trained on replayed transitions, and the same
trainer fed by a recurrent state autoencoder instead of the raw last
state column. The autoencoder compresses the whole variable-length state
matrix into a fixed vector (final cell and hidden state of a recurrent
encoder), which is what makes the value network's input size independent
of how many updates an episode has accumulated.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Protocol

import numpy as np

from .errors import CheckpointError, DivergenceError
from .mdp import ScheduleEnv, StateMatrix
from .nnet import DenseNet, LstmCell, load_checkpoint, make_optimizer, save_checkpoint
from .scenario import Scenario
from .solver import TrajectorySolution

# ---------------------------------------------------------------------------
# Replay memory
# ---------------------------------------------------------------------------


class ReplayMemory:
    """Fixed-capacity ring buffer with uniform sampling (with replacement)."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self._items: list[Any] = []
        self._next = 0

    def push(self, item: Any) -> None:
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._next] = item
        self._next = (self._next + 1) % self.capacity

    def __len__(self) -> int:
        return len(self._items)

    def sample(self, rng: np.random.Generator, batch_size: int) -> list[Any]:
        if not self._items:
            raise ValueError("cannot sample from an empty replay memory")
        idx = rng.integers(0, len(self._items), size=batch_size)
        return [self._items[i] for i in idx]


# ---------------------------------------------------------------------------
# State representations
# ---------------------------------------------------------------------------


def normalize_state_columns(scenario: Scenario, state: StateMatrix) -> np.ndarray:
    """Scale a state matrix into [0, 1]: energies by each node's battery,
    times by the horizon. Columns come out as rows (time-major)."""
    m = scenario.num_nodes
    cols = state.columns
    out = np.empty((cols.shape[1], m + 1))
    batteries = scenario.batteries()
    out[:, :m] = (cols[:m, :] / batteries[:, None]).T
    out[:, m] = cols[m, :] / scenario.uav.horizon_s
    return out


def denormalize_state_columns(scenario: Scenario, normalized: np.ndarray) -> np.ndarray:
    """Inverse of normalize_state_columns, back to the matrix layout."""
    m = scenario.num_nodes
    cols = np.empty((m + 1, normalized.shape[0]))
    batteries = scenario.batteries()
    cols[:m, :] = (normalized[:, :m] * batteries[None, :]).T
    cols[m, :] = normalized[:, m] * scenario.uav.horizon_s
    return cols


@dataclass
class StateRepr:
    """Turns a state matrix into the fixed-size vector the value net sees.

    last_column mode uses the normalized most recent column. autoencoder
    mode runs a trained recurrent encoder over the normalized columns in
    reverse order and concatenates its final cell and hidden state.
    """

    scenario: Scenario
    mode: str = "last_column"
    encoder: LstmCell | None = None

    def __post_init__(self) -> None:
        if self.mode not in {"last_column", "autoencoder"}:
            raise ValueError(f"unknown state representation mode {self.mode!r}")
        if self.mode == "autoencoder" and self.encoder is None:
            raise ValueError("autoencoder mode needs a trained encoder")

    @property
    def size(self) -> int:
        if self.mode == "last_column":
            return self.scenario.num_nodes + 1
        assert self.encoder is not None
        return 2 * self.encoder.hidden_size

    def encode(self, state: StateMatrix) -> np.ndarray:
        normalized = normalize_state_columns(self.scenario, state)
        if self.mode == "last_column":
            return normalized[-1].copy()
        assert self.encoder is not None
        flipped = normalized[::-1].copy()
        hs, cs, _ = self.encoder.seq_forward(flipped)
        return np.concatenate([cs[-1], hs[-1]])


# ---------------------------------------------------------------------------
# Vector-observation task protocol
# ---------------------------------------------------------------------------


class VectorTask(Protocol):
    """Episodic task with vector observations, as the trainer sees it."""

    @property
    def num_actions(self) -> int: ...

    def reset(self) -> np.ndarray: ...

    def step(self, action: int) -> tuple[np.ndarray, float, bool]: ...


class ScheduleTask:
    """Visit-order environment wrapped behind a vector observation."""

    def __init__(
        self,
        scenario: Scenario,
        repr_: StateRepr,
        tol: float = 1e-6,
        infeasible_penalty: float = 0.0,
        solve_cache: dict[tuple[int, ...], TrajectorySolution] | None = None,
    ):
        self.env = ScheduleEnv(
            scenario,
            tol=tol,
            infeasible_penalty=infeasible_penalty,
            solve_cache=solve_cache,
        )
        self.repr = repr_

    @property
    def num_actions(self) -> int:
        return self.env.num_actions

    @property
    def metric(self) -> float:
        return self.env.metric

    @property
    def order(self) -> tuple[int, ...]:
        return self.env.order

    def reset(self) -> np.ndarray:
        return self.repr.encode(self.env.reset())

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        transition = self.env.step(action)
        return self.repr.encode(transition.next_state), transition.reward, transition.terminal


# ---------------------------------------------------------------------------
# Action-value training
# ---------------------------------------------------------------------------


@dataclass
class DqnConfig:
    """Knobs for the action-value trainer."""

    hidden_sizes: tuple[int, ...] = (64,)
    activation: str = "relu"
    lr: float = 0.01
    optimizer: str = "sgd"
    momentum: float = 0.0
    gamma: float = 1.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.02
    epsilon_decay_frac: float = 0.6
    replay_capacity: int = 10_000
    batch_size: int = 32
    grad_steps_per_episode: int = 1
    divergence_limit: float = 1e6
    infeasible_penalty: float = 0.0
    state_mode: str = "last_column"
    max_episode_steps: int = 10_000


def epsilon_at(episode: int, episodes: int, config: DqnConfig) -> float:
    """Linear decay from epsilon_start to epsilon_end over the first
    epsilon_decay_frac of training, constant afterwards."""
    span = max(1, int(round(config.epsilon_decay_frac * episodes)))
    if episode >= span:
        return config.epsilon_end
    frac = episode / span
    return config.epsilon_start + frac * (config.epsilon_end - config.epsilon_start)


@dataclass
class EpisodeStats:
    episode: int
    steps: int
    episode_return: float
    metric: float
    epsilon: float
    loss: float


def write_learning_curve_csv(path: str | Path, curve: list[EpisodeStats]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "steps", "return", "metric", "epsilon", "loss"])
        for row in curve:
            writer.writerow(
                [
                    row.episode,
                    row.steps,
                    f"{row.episode_return:.10g}",
                    f"{row.metric:.10g}" if np.isfinite(row.metric) else "",
                    f"{row.epsilon:.6g}",
                    f"{row.loss:.10g}" if np.isfinite(row.loss) else "",
                ]
            )


@dataclass
class QAgent:
    """Greedy policy over a trained action-value network."""

    net: DenseNet
    repr: StateRepr | None
    num_actions: int

    def q_values(self, obs: np.ndarray) -> np.ndarray:
        return self.net.forward(obs)

    def greedy_action(self, obs: np.ndarray) -> int:
        # np.argmax takes the first maximum, so ties resolve to the lowest
        # action index (terminate first).
        return int(np.argmax(self.q_values(obs)))


def _build_qnet(input_size: int, num_actions: int, config: DqnConfig, rng) -> DenseNet:
    sizes = (input_size, *config.hidden_sizes, num_actions)
    acts = tuple([config.activation] * len(config.hidden_sizes) + ["identity"])
    return DenseNet.init(sizes, acts, rng)


def dqn_train_task(
    task: VectorTask,
    config: DqnConfig,
    episodes: int,
    seed: int,
    net: DenseNet | None = None,
) -> tuple[DenseNet, list[EpisodeStats]]:
    """Train an action-value network on any vector-observation task.

    Per episode: roll out epsilon-greedily with the online net, then take
    the configured number of batch gradient steps against a target net
    snapshotted at the start of the episode's update phase. Returns the
    trained net and per-episode statistics.
    """
    rng = np.random.default_rng(seed)
    obs0 = task.reset()
    if net is None:
        net = _build_qnet(obs0.size, task.num_actions, config, rng)
    optimizer = make_optimizer(config.optimizer, config.lr, config.momentum)
    replay = ReplayMemory(config.replay_capacity)
    curve: list[EpisodeStats] = []

    for episode in range(episodes):
        eps = epsilon_at(episode, episodes, config)
        obs = task.reset()
        terminal = False
        ep_return = 0.0
        steps = 0
        while not terminal and steps < config.max_episode_steps:
            if rng.uniform() < eps:
                action = int(rng.integers(0, task.num_actions))
            else:
                action = int(np.argmax(net.forward(obs)))
            next_obs, reward, terminal = task.step(action)
            replay.push((obs, action, reward, next_obs, terminal))
            ep_return += reward
            obs = next_obs
            steps += 1

        target_net = net.clone()
        loss = float("nan")
        for _ in range(config.grad_steps_per_episode):
            batch = replay.sample(rng, config.batch_size)
            xs = np.stack([item[0] for item in batch])
            next_xs = np.stack([item[3] for item in batch])
            actions = np.array([item[1] for item in batch], dtype=int)
            rewards = np.array([item[2] for item in batch])
            terminals = np.array([item[4] for item in batch], dtype=bool)

            next_q = target_net.forward(next_xs)
            targets = rewards + np.where(
                terminals, 0.0, config.gamma * next_q.max(axis=1)
            )
            out, acts_cache = net.forward_cached(xs)
            picked = out[np.arange(len(batch)), actions]
            errors = picked - targets
            loss = float(np.mean(errors * errors))
            if not np.isfinite(loss) or loss > config.divergence_limit:
                raise DivergenceError(
                    f"training loss {loss:.3g} exceeded limit {config.divergence_limit:.3g}"
                )
            dy = np.zeros_like(out)
            dy[np.arange(len(batch)), actions] = 2.0 * errors / len(batch)
            dws, dbs, _ = net.backward(acts_cache, dy)
            flat = optimizer.step(net.params_flat(), net.grads_flat(dws, dbs))
            net.set_flat(flat)

        metric = getattr(task, "metric", float("nan"))
        curve.append(
            EpisodeStats(
                episode=episode,
                steps=steps,
                episode_return=ep_return,
                metric=float(metric),
                epsilon=eps,
                loss=loss,
            )
        )
    return net, curve


def dqn_train(
    scenario: Scenario,
    config: DqnConfig,
    episodes: int,
    seed: int,
    encoder: LstmCell | None = None,
) -> tuple[QAgent, list[EpisodeStats]]:
    """Train an action-value planner on a scenario.

    With state_mode 'autoencoder', pass the trained encoder; observations
    are then the encoder's compressed state instead of the raw last
    column.
    """
    repr_ = StateRepr(scenario=scenario, mode=config.state_mode, encoder=encoder)
    cache: dict[tuple[int, ...], TrajectorySolution] = {}
    task = ScheduleTask(
        scenario,
        repr_,
        infeasible_penalty=config.infeasible_penalty,
        solve_cache=cache,
    )
    net, curve = dqn_train_task(task, config, episodes, seed)
    agent = QAgent(net=net, repr=repr_, num_actions=task.num_actions)
    return agent, curve


def greedy_evaluate(
    agent: QAgent, scenario: Scenario, max_steps: int | None = None
) -> tuple[tuple[int, ...], float]:
    """Roll the greedy policy out once; returns (visit order, metric)."""
    if agent.repr is None:
        raise ValueError("agent has no state representation bound")
    task = ScheduleTask(scenario, agent.repr)
    obs = task.reset()
    steps = 0
    limit = max_steps if max_steps is not None else 100_000
    terminal = False
    while not terminal and steps < limit:
        action = agent.greedy_action(obs)
        obs, _, terminal = task.step(action)
        steps += 1
    return task.order, task.metric


def weight_based_rollout(
    scenario: Scenario,
    seed: int,
    solve_cache: dict[tuple[int, ...], TrajectorySolution] | None = None,
) -> tuple[tuple[int, ...], float, StateMatrix]:
    """Baseline policy: sample nodes in proportion to their weights until an
    append fails; never terminates voluntarily."""
    rng = np.random.default_rng(seed)
    env = ScheduleEnv(scenario, solve_cache=solve_cache)
    env.reset()
    weights = scenario.weights()
    while True:
        action = int(rng.choice(scenario.num_nodes, p=weights)) + 1
        transition = env.step(action)
        if transition.terminal:
            break
    return env.order, env.metric, env.state


def collect_states(
    scenario: Scenario,
    episodes: int,
    seed: int,
    solve_cache: dict[tuple[int, ...], TrajectorySolution] | None = None,
) -> list[StateMatrix]:
    """Gather a state corpus from weight-proportional episodes.

    Every state visited is kept, including each episode's initial state,
    so the encoder sees single-column matrices too.
    """
    rng = np.random.default_rng(seed)
    cache = solve_cache if solve_cache is not None else {}
    env = ScheduleEnv(scenario, solve_cache=cache)
    weights = scenario.weights()
    corpus: list[StateMatrix] = []
    for _ in range(episodes):
        env.reset()
        corpus.append(env.state)
        while True:
            action = int(rng.choice(scenario.num_nodes, p=weights)) + 1
            transition = env.step(action)
            if transition.terminal:
                break
            corpus.append(transition.next_state)
    return corpus


# ---------------------------------------------------------------------------
# Recurrent state autoencoder
# ---------------------------------------------------------------------------


@dataclass
class AutoencoderConfig:
    state_size: int = 8
    lr: float = 0.01
    optimizer: str = "adam"
    epochs: int = 50
    batch: str = "stochastic"  # or "full"
    divergence_limit: float = 1e6


@dataclass
class Seq2SeqAutoencoder:
    """Sequence autoencoder over normalized state-matrix columns.

    The encoder consumes the columns in reverse order, so its final input
    is always the fixed initial column; the compressed state is the
    concatenated final (cell, hidden) pair. The decoder, initialized from
    that pair, reproduces the same reversed sequence under teacher
    forcing, with a linear head mapping hidden states back to columns.
    """

    encoder: LstmCell
    decoder: LstmCell
    head: DenseNet

    @classmethod
    def init(cls, input_size: int, state_size: int, rng: np.random.Generator) -> "Seq2SeqAutoencoder":
        return cls(
            encoder=LstmCell.init(input_size, state_size, rng),
            decoder=LstmCell.init(input_size, state_size, rng),
            head=DenseNet.init((state_size, input_size), ("identity",), rng),
        )

    @property
    def state_size(self) -> int:
        return self.encoder.hidden_size

    def params_flat(self) -> np.ndarray:
        return np.concatenate(
            [self.encoder.params_flat(), self.decoder.params_flat(), self.head.params_flat()]
        )

    def set_flat(self, flat: np.ndarray) -> None:
        n_enc = self.encoder.params_flat().size
        n_dec = self.decoder.params_flat().size
        self.encoder.set_flat(flat[:n_enc])
        self.decoder.set_flat(flat[n_enc : n_enc + n_dec])
        self.head.set_flat(flat[n_enc + n_dec :])

    def encode_columns(self, normalized: np.ndarray) -> np.ndarray:
        flipped = normalized[::-1].copy()
        hs, cs, _ = self.encoder.seq_forward(flipped)
        return np.concatenate([cs[-1], hs[-1]])

    def loss_and_grad(self, normalized: np.ndarray) -> tuple[float, np.ndarray]:
        """Reconstruction MSE on one sequence and the full parameter gradient."""
        xs = normalized[::-1].copy()
        t_len, d_in = xs.shape
        k = self.state_size

        hs_e, cs_e, gates_e = self.encoder.seq_forward(xs)
        dec_in = np.zeros_like(xs)
        dec_in[1:] = xs[:-1]
        hs_d, cs_d, gates_d = self.decoder.seq_forward(dec_in, hs_e[-1], cs_e[-1])
        hidden = hs_d[1:]
        out, acts_cache = self.head.forward_cached(hidden)
        err = out - xs
        mse = float(np.mean(err * err))

        dy = 2.0 * err / err.size
        dws, dbs, dhidden = self.head.backward(acts_cache, dy)
        head_grad = self.head.grads_flat(dws, dbs)
        dwg_d, dbg_d, dh0_d, dc0_d, _ = self.decoder.seq_backward(
            dec_in, hs_d, cs_d, gates_d, dhidden, np.zeros(k), np.zeros(k)
        )
        dwg_e, dbg_e, _, _, _ = self.encoder.seq_backward(
            xs, hs_e, cs_e, gates_e, None, dh0_d, dc0_d
        )
        grad = np.concatenate(
            [dwg_e.ravel(), dbg_e.ravel(), dwg_d.ravel(), dbg_d.ravel(), head_grad]
        )
        return mse, grad

    def reconstruction_mse(self, normalized: np.ndarray) -> float:
        xs = normalized[::-1].copy()
        hs_e, cs_e, _ = self.encoder.seq_forward(xs)
        dec_in = np.zeros_like(xs)
        dec_in[1:] = xs[:-1]
        hs_d, _, _ = self.decoder.seq_forward(dec_in, hs_e[-1], cs_e[-1])
        out = self.head.forward(hs_d[1:])
        err = out - xs
        return float(np.mean(err * err))

    def to_arrays(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for prefix, module in (("enc", self.encoder), ("dec", self.decoder)):
            for name, arr in module.to_arrays():
                out.append((f"{prefix}_{name}", arr))
        for name, arr in self.head.to_arrays():
            out.append((f"head_{name}", arr))
        return out


@dataclass
class AutoencoderResult:
    model: Seq2SeqAutoencoder
    train_mse: list[float]
    test_mse: float
    num_train: int
    num_test: int


def autoencoder_train(
    scenario: Scenario,
    corpus: list[StateMatrix],
    config: AutoencoderConfig,
    seed: int,
) -> AutoencoderResult:
    """Train the autoencoder on a 70/30 split of the state corpus.

    batch='stochastic' steps per sequence; batch='full' averages the
    gradient over the whole training split per epoch (slower but the
    epoch losses descend monotonically at small learning rates).
    """
    if not corpus:
        raise ValueError("corpus must contain at least one state")
    rng = np.random.default_rng(seed)
    sequences = [normalize_state_columns(scenario, state) for state in corpus]
    if len(sequences) == 1:
        # Overfitting a singleton: train and test on the same sequence.
        train = test = sequences
    else:
        perm = rng.permutation(len(sequences))
        n_train = max(1, int(round(0.7 * len(sequences))))
        if n_train == len(sequences):
            n_train -= 1
        train = [sequences[i] for i in perm[:n_train]]
        test = [sequences[i] for i in perm[n_train:]]

    model = Seq2SeqAutoencoder.init(scenario.num_nodes + 1, config.state_size, rng)
    optimizer = make_optimizer(config.optimizer, config.lr)
    history: list[float] = []
    for _ in range(config.epochs):
        if config.batch == "full":
            total = 0.0
            grad_sum = None
            for seq in train:
                mse, grad = model.loss_and_grad(seq)
                total += mse
                grad_sum = grad if grad_sum is None else grad_sum + grad
            assert grad_sum is not None
            epoch_loss = total / len(train)
            if not np.isfinite(epoch_loss) or epoch_loss > config.divergence_limit:
                raise DivergenceError(f"autoencoder loss diverged: {epoch_loss:.3g}")
            flat = optimizer.step(model.params_flat(), grad_sum / len(train))
            model.set_flat(flat)
        else:
            order = rng.permutation(len(train))
            total = 0.0
            for i in order:
                mse, grad = model.loss_and_grad(train[i])
                total += mse
                if not np.isfinite(mse) or mse > config.divergence_limit:
                    raise DivergenceError(f"autoencoder loss diverged: {mse:.3g}")
                flat = optimizer.step(model.params_flat(), grad)
                model.set_flat(flat)
            epoch_loss = total / len(train)
        history.append(epoch_loss)

    test_mse = float(np.mean([model.reconstruction_mse(seq) for seq in test]))
    return AutoencoderResult(
        model=model,
        train_mse=history,
        test_mse=test_mse,
        num_train=len(train),
        num_test=len(test),
    )


@dataclass
class SearchResult:
    best_size: int
    results: dict[int, float]
    best: AutoencoderResult


# ---------------------------------------------------------------------------
# Checkpoint plumbing
# ---------------------------------------------------------------------------


def save_agent(path: str | Path, agent: QAgent) -> None:
    """Persist a trained planner, including its encoder when it has one."""
    if agent.repr is None:
        raise ValueError("agent has no state representation bound")
    arrays = [(f"net_{name}", arr) for name, arr in agent.net.to_arrays()]
    meta: dict[str, Any] = {
        "net_sizes": list(agent.net.sizes),
        "net_activations": list(agent.net.activations),
        "num_actions": agent.num_actions,
        "state_mode": agent.repr.mode,
        "num_nodes": agent.repr.scenario.num_nodes,
    }
    if agent.repr.mode == "autoencoder":
        assert agent.repr.encoder is not None
        for name, arr in agent.repr.encoder.to_arrays():
            arrays.append((f"enc_{name}", arr))
        meta["encoder_input_size"] = agent.repr.encoder.input_size
        meta["encoder_hidden_size"] = agent.repr.encoder.hidden_size
    save_checkpoint(path, "qnet", arrays, meta)


def load_agent(path: str | Path, scenario: Scenario) -> QAgent:
    """Rebuild a planner from a checkpoint against a compatible scenario."""
    kind, arrays, meta = load_checkpoint(path)
    if kind != "qnet":
        raise CheckpointError(f"expected a qnet checkpoint, found {kind!r}")
    if meta["num_nodes"] != scenario.num_nodes:
        raise CheckpointError(
            f"checkpoint was trained for {meta['num_nodes']} nodes, "
            f"scenario has {scenario.num_nodes}"
        )
    net = DenseNet.init(meta["net_sizes"], meta["net_activations"], np.random.default_rng(0))
    for i in range(len(net.ws)):
        net.ws[i] = arrays[f"net_w{i}"]
        net.bs[i] = arrays[f"net_b{i}"]
    encoder = None
    mode = meta["state_mode"]
    if mode == "autoencoder":
        encoder = LstmCell(
            input_size=int(meta["encoder_input_size"]),
            hidden_size=int(meta["encoder_hidden_size"]),
            wg=arrays["enc_wg"],
            bg=arrays["enc_bg"],
        )
    repr_ = StateRepr(scenario=scenario, mode=mode, encoder=encoder)
    return QAgent(net=net, repr=repr_, num_actions=int(meta["num_actions"]))


def save_autoencoder(path: str | Path, model: Seq2SeqAutoencoder, meta: dict[str, Any] | None = None) -> None:
    extra = dict(meta or {})
    extra["input_size"] = model.encoder.input_size
    extra["state_size"] = model.state_size
    save_checkpoint(path, "autoencoder", model.to_arrays(), extra)


def load_autoencoder(path: str | Path) -> tuple[Seq2SeqAutoencoder, dict[str, Any]]:
    kind, arrays, meta = load_checkpoint(path)
    if kind != "autoencoder":
        raise CheckpointError(f"expected an autoencoder checkpoint, found {kind!r}")
    d_in = int(meta["input_size"])
    k = int(meta["state_size"])
    model = Seq2SeqAutoencoder(
        encoder=LstmCell(input_size=d_in, hidden_size=k, wg=arrays["enc_wg"], bg=arrays["enc_bg"]),
        decoder=LstmCell(input_size=d_in, hidden_size=k, wg=arrays["dec_wg"], bg=arrays["dec_bg"]),
        head=DenseNet(
            sizes=(k, d_in),
            activations=("identity",),
            ws=[arrays["head_w0"]],
            bs=[arrays["head_b0"]],
        ),
    )
    return model, meta


def autoencoder_search(
    scenario: Scenario,
    corpus: list[StateMatrix],
    cell_sizes: list[int],
    hidden_sizes: list[int] | None = None,
    config: AutoencoderConfig | None = None,
    seed: int = 0,
) -> SearchResult:
    """Grid-search the compressed state size by held-out reconstruction MSE.

    The cell and hidden sizes of the recurrent state are one and the same
    in this cell design, so the two ranges must agree on their candidates;
    passing disjoint ranges is an error. Ties prefer the smaller size.
    """
    if hidden_sizes is None:
        candidates = sorted(set(int(v) for v in cell_sizes))
    else:
        candidates = sorted(set(int(v) for v in cell_sizes) & set(int(v) for v in hidden_sizes))
        if not candidates:
            raise ValueError(
                "cell and hidden sizes are coupled in this design; "
                "the candidate ranges must share at least one size"
            )
    base = config or AutoencoderConfig()
    results: dict[int, float] = {}
    best: AutoencoderResult | None = None
    best_size = -1
    for size in candidates:
        run = autoencoder_train(scenario, corpus, replace(base, state_size=size), seed)
        results[size] = run.test_mse
        if best is None or run.test_mse < results[best_size]:
            best = run
            best_size = size
    assert best is not None
    return SearchResult(best_size=best_size, results=results, best=best)
