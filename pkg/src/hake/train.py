"""Self-adversarial negative-sampling training with sparse Adam.

Batch construction: positives are sampled i.i.d. with replacement from the
train split; with neg_mode=both-alternating, even batch positions corrupt
the head and odd positions the tail. All randomness for batch position j
of step s comes from a child generator seeded with (seed, s, j), so any
parallel fan-out over positions reproduces the serial stream exactly.

The adversarial weights are treated as constants: no gradient flows
through the softmax. The reported batch loss is the mean over positives.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import kernels
from .data import DatasetBundle, Triple
from .errors import DataError, NumericError, UsageError
from .model import ModelParams, init_params, save_checkpoint

NEG_MODES = ("head", "tail", "both-alternating")
VARIANTS = ("full", "modulus_only", "phase_only", "mode")


@dataclass
class TrainConfig:
    k: int = 32
    gamma: float = 6.0
    alpha: float = 1.0
    n_neg: int = 16
    lr: float = 1e-3
    batch_size: int = 64
    max_steps: int = 5000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    variant: str = "full"
    bias: bool = True
    lambda_mod: float = 1.0
    # a uniformly random pair's phase distance concentrates near
    # lambda_phase * k * 2/pi; keeping that close to gamma at the default
    # k stops random phases from clearing the margin on their own, which
    # would starve the modulus tables of gradient
    lambda_phase: float = 0.3
    neg_mode: str = "both-alternating"
    self_adversarial: bool = True
    train_lambdas: bool = False
    checkpoint_every: int = 1000

    def validate(self) -> "TrainConfig":
        checks = [
            (self.k >= 1, "k must be >= 1"),
            (self.gamma > 0, "gamma must be > 0"),
            (self.alpha >= 0, "alpha must be >= 0"),
            (self.n_neg >= 1, "n_neg must be >= 1"),
            (self.lr >= 0, "lr must be >= 0"),
            (self.batch_size >= 1, "batch_size must be >= 1"),
            (self.max_steps >= 1, "max_steps must be >= 1"),
            (0 < self.adam_beta1 < 1, "adam_beta1 must be in (0,1)"),
            (0 < self.adam_beta2 < 1, "adam_beta2 must be in (0,1)"),
            (self.adam_eps > 0, "adam_eps must be > 0"),
            (self.variant in VARIANTS, f"variant must be one of {', '.join(VARIANTS)}"),
            (not (self.variant == "mode" and self.bias), "variant 'mode' has no bias term"),
            (self.lambda_mod >= 0, "lambda_mod must be >= 0"),
            (self.lambda_phase >= 0, "lambda_phase must be >= 0"),
            (self.neg_mode in NEG_MODES, f"neg_mode must be one of {', '.join(NEG_MODES)}"),
            (self.checkpoint_every >= 1, "checkpoint_every must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise UsageError(f"bad config: {message}")
        return self


_BOOL_FIELDS = {"bias", "self_adversarial", "train_lambdas"}
_STR_FIELDS = {"variant", "neg_mode"}
_INT_FIELDS = {"k", "n_neg", "batch_size", "max_steps", "seed", "checkpoint_every"}


def _parse_bool(key: str, value: str) -> bool:
    lowered = value.lower()
    if lowered in ("1", "true"):
        return True
    if lowered in ("0", "false"):
        return False
    raise DataError(f"config key {key}: expected a boolean (0/1/true/false), got {value!r}")


def parse_config_text(text: str, name: str = "<config>") -> TrainConfig:
    """key=value lines; blank lines and #-comments allowed; unknown keys are
    errors. Missing keys keep their defaults."""
    by_name = {f.name: f for f in fields(TrainConfig)}
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise DataError(f"{name}: line {lineno}: expected key=value, got {stripped!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in by_name:
            raise DataError(f"{name}: line {lineno}: unknown config key {key!r}")
        if key in _BOOL_FIELDS:
            overrides[key] = _parse_bool(key, value)
        elif key in _STR_FIELDS:
            overrides[key] = value
        else:
            caster = int if key in _INT_FIELDS else float
            try:
                overrides[key] = caster(value)
            except ValueError:
                raise DataError(f"{name}: line {lineno}: bad value for {key}: {value!r}") from None
    return replace(TrainConfig(), **overrides)


def load_config_file(path: str) -> TrainConfig:
    try:
        with open(path, encoding="utf-8") as f:
            return parse_config_text(f.read(), name=path)
    except OSError as exc:
        raise DataError(f"cannot read config file: {exc}") from None


def config_to_text(config: TrainConfig) -> str:
    lines = []
    for f in fields(TrainConfig):
        value = getattr(config, f.name)
        if isinstance(value, bool):
            value = int(value)
        lines.append(f"{f.name}={value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample_negatives(triple: Triple, n: int, mode: str, bundle: DatasetBundle,
                     rng: np.random.Generator) -> list:
    """n corrupted copies of the triple; mode is 'head' or 'tail'. A draw
    colliding with a train triple is rejected and redrawn up to 100 times,
    then kept. The relation is never corrupted."""
    if mode not in ("head", "tail"):
        raise UsageError(f"negative sampling mode must be head or tail, got {mode!r}")
    if n < 1:
        raise UsageError("need at least one negative")
    h, r, t = triple
    n_ent = bundle.n_entities
    train_set = bundle.train_set
    out = []
    for _ in range(n):
        for _attempt in range(100):
            e = int(rng.integers(0, n_ent))
            cand = Triple(e, r, t) if mode == "head" else Triple(h, r, e)
            if cand not in train_set:
                break
        out.append(cand)
    return out


def adversarial_weights(neg_scores, alpha: float) -> np.ndarray:
    """softmax(alpha * scores) with max subtraction; rows sum to 1.
    Works on (n,) or (B, n) arrays (softmax over the last axis)."""
    x = alpha * np.asarray(neg_scores, dtype=np.float64)
    x = x - x.max(axis=-1, keepdims=True)
    e = np.exp(x)
    return e / e.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# loss and gradients
# ---------------------------------------------------------------------------

@dataclass
class SparseGrads:
    """Loss gradient in scatter form: row indices plus per-row contributions
    (repeated indices accumulate). Entity rows carry both the h and t slices
    of every scored triple."""

    ent_idx: np.ndarray
    ent_mod: np.ndarray
    ent_phase: np.ndarray
    rel_idx: np.ndarray
    rel_mod: np.ndarray
    rel_bias: np.ndarray
    rel_phase: np.ndarray
    d_lambda_mod: float
    d_lambda_phase: float


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    return np.exp(-np.logaddexp(0.0, -x))


def _batch_loss_and_grads(params: ModelParams, h, r, t, n_pos: int,
                          config: TrainConfig) -> tuple:
    """Rows 0..n_pos-1 of the id arrays are positives; the rest are their
    negatives, n_neg consecutive rows per positive. Returns the mean loss
    over positives and the scatter-form gradient."""
    n_neg = config.n_neg
    d_mod, d_phase = kernels.triple_distances(
        *params.tables, h, r, t, params.variant_code, int(params.bias))
    d_tot = params.lambda_mod * d_mod + params.lambda_phase * d_phase
    d_pos = d_tot[:n_pos]
    d_neg = d_tot[n_pos:].reshape(n_pos, n_neg)

    if config.self_adversarial:
        w = adversarial_weights(-d_neg, config.alpha)
    else:
        w = np.full_like(d_neg, 1.0 / n_neg)

    loss_per_pos = _softplus(d_pos - config.gamma) \
        + (w * _softplus(config.gamma - d_neg)).sum(axis=1)
    loss = float(loss_per_pos.mean())
    if not np.isfinite(loss) or loss < 0.0:
        raise NumericError(f"loss is {loss} at step {params.step + 1}")

    c_pos = _sigmoid(d_pos - config.gamma) / n_pos
    c_neg = -(w * _sigmoid(config.gamma - d_neg)) / n_pos
    coeff = np.concatenate([c_pos, c_neg.reshape(-1)])

    rows = kernels.triple_grad_rows(*params.tables, h, r, t, coeff,
                                    params.lambda_mod, params.lambda_phase,
                                    params.variant_code, int(params.bias))
    gh_mod, gh_phase, gt_mod, gt_phase, gr_mod, gr_bias, gr_phase = rows
    grads = SparseGrads(
        ent_idx=np.concatenate([h, t]),
        ent_mod=np.concatenate([gh_mod, gt_mod]),
        ent_phase=np.concatenate([gh_phase, gt_phase]),
        rel_idx=r.copy(),
        rel_mod=gr_mod, rel_bias=gr_bias, rel_phase=gr_phase,
        d_lambda_mod=float(np.dot(coeff, d_mod)),
        d_lambda_phase=float(np.dot(coeff, d_phase)),
    )
    return loss, grads


def loss_and_grads(params: ModelParams, pos: Triple, negs: list,
                   config: TrainConfig) -> tuple:
    """Single-positive loss L = -log s(gamma - d_pos) - sum_i w_i log
    s(d_i - gamma) and its exact gradient (weights held constant)."""
    if not negs:
        raise UsageError("loss_and_grads needs at least one negative")
    cfg = replace(config, n_neg=len(negs))
    triples = [pos] + list(negs)
    h = np.array([tr[0] for tr in triples], dtype=np.int64)
    r = np.array([tr[1] for tr in triples], dtype=np.int64)
    t = np.array([tr[2] for tr in triples], dtype=np.int64)
    return _batch_loss_and_grads(params, h, r, t, 1, cfg)


# ---------------------------------------------------------------------------
# sparse Adam
# ---------------------------------------------------------------------------

@dataclass
class OptimizerState:
    m: dict
    v: dict
    m_lambda: np.ndarray = field(default_factory=lambda: np.zeros(2))
    v_lambda: np.ndarray = field(default_factory=lambda: np.zeros(2))
    step: int = 0


def init_optimizer(params: ModelParams) -> OptimizerState:
    names = ("ent_mod", "ent_phase", "rel_mod", "rel_bias", "rel_phase")
    return OptimizerState(
        m={name: np.zeros_like(getattr(params, name)) for name in names},
        v={name: np.zeros_like(getattr(params, name)) for name in names},
    )


def _dedup(idx: np.ndarray, contribs: list) -> tuple:
    uniq, inverse = np.unique(idx, return_inverse=True)
    dense = []
    for contrib in contribs:
        acc = np.zeros((uniq.size, contrib.shape[1]))
        kernels.scatter_add_rows(acc, inverse.astype(np.int64), contrib)
        dense.append(acc)
    return uniq, dense


def _adam_update(table, m, v, rows, grad, lr, beta1, beta2, eps, t, name):
    if not np.isfinite(grad).all():
        bad = rows[np.flatnonzero(~np.isfinite(grad).all(axis=1))[0]]
        raise NumericError(f"non-finite gradient in {name} row {bad}")
    m[rows] = beta1 * m[rows] + (1.0 - beta1) * grad
    v[rows] = beta2 * v[rows] + (1.0 - beta2) * grad * grad
    m_hat = m[rows] / (1.0 - beta1 ** t)
    v_hat = v[rows] / (1.0 - beta2 ** t)
    table[rows] -= lr * m_hat / (np.sqrt(v_hat) + eps)


def adam_step(params: ModelParams, state: OptimizerState, grads: SparseGrads,
              config: TrainConfig) -> None:
    """One sparse Adam update in place. Moments and bias correction touch
    only the rows present in grads; untouched rows do not decay."""
    state.step += 1
    t = state.step
    lr, b1, b2, eps = config.lr, config.adam_beta1, config.adam_beta2, config.adam_eps

    ent_rows, (g_emod, g_ephase) = _dedup(grads.ent_idx, [grads.ent_mod, grads.ent_phase])
    rel_rows, (g_rmod, g_rbias, g_rphase) = _dedup(
        grads.rel_idx, [grads.rel_mod, grads.rel_bias, grads.rel_phase])

    for name, rows, grad in (("ent_mod", ent_rows, g_emod),
                             ("ent_phase", ent_rows, g_ephase),
                             ("rel_mod", rel_rows, g_rmod),
                             ("rel_bias", rel_rows, g_rbias),
                             ("rel_phase", rel_rows, g_rphase)):
        _adam_update(getattr(params, name), state.m[name], state.v[name],
                     rows, grad, lr, b1, b2, eps, t, name)

    if config.train_lambdas:
        g = np.array([grads.d_lambda_mod, grads.d_lambda_phase])
        if not np.isfinite(g).all():
            raise NumericError("non-finite gradient in lambda coefficients")
        state.m_lambda = b1 * state.m_lambda + (1.0 - b1) * g
        state.v_lambda = b2 * state.v_lambda + (1.0 - b2) * g * g
        m_hat = state.m_lambda / (1.0 - b1 ** t)
        v_hat = state.v_lambda / (1.0 - b2 ** t)
        lams = np.array([params.lambda_mod, params.lambda_phase])
        lams -= lr * m_hat / (np.sqrt(v_hat) + eps)
        # projection keeps the coefficients in their valid range
        params.lambda_mod = float(max(lams[0], 0.0))
        params.lambda_phase = float(max(lams[1], 0.0))


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------

def _position_rng(seed: int, step: int, position: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, step, position)))


def _corruption_side(config: TrainConfig, position: int) -> str:
    if config.neg_mode == "both-alternating":
        return "head" if position % 2 == 0 else "tail"
    return config.neg_mode


def sample_batch(bundle: DatasetBundle, config: TrainConfig, step: int) -> tuple:
    """Id arrays for one batch: B positives followed by B*n_neg negatives
    (n_neg consecutive rows per positive)."""
    train = bundle.train
    n_train = len(train)
    pos = []
    negs = []
    for j in range(config.batch_size):
        rng = _position_rng(config.seed, step, j)
        triple = train[int(rng.integers(0, n_train))]
        pos.append(triple)
        negs.extend(sample_negatives(triple, config.n_neg,
                                     _corruption_side(config, j), bundle, rng))
    triples = pos + negs
    h = np.array([tr[0] for tr in triples], dtype=np.int64)
    r = np.array([tr[1] for tr in triples], dtype=np.int64)
    t = np.array([tr[2] for tr in triples], dtype=np.int64)
    return h, r, t


def _write_checkpoints(params: ModelParams, out_dir: str, step: int) -> None:
    os.makedirs(out_dir, exist_ok=True)
    save_checkpoint(params, os.path.join(out_dir, f"step_{step}.ckpt"))
    save_checkpoint(params, os.path.join(out_dir, "latest.ckpt"))


def train(bundle: DatasetBundle, config: TrainConfig, out_dir: str | None = None,
          log_fn=None, timing: bool = True) -> tuple:
    """Run the training loop; returns (params, log_lines).

    Logs `step=<n> loss=<f> ms_per_step=<f>` every 100 steps (ms omitted
    when timing is off); writes step_<n>.ckpt plus latest.ckpt into out_dir
    every checkpoint_every steps and at the end.
    """
    config.validate()
    if not bundle.train:
        raise DataError("empty train split")
    params = init_params((bundle.n_entities, bundle.n_relations, config.k),
                         config, np.random.default_rng(config.seed))
    state = init_optimizer(params)
    log_lines = []
    window_start = time.perf_counter()
    for step in range(1, config.max_steps + 1):
        h, r, t = sample_batch(bundle, config, step)
        loss, grads = _batch_loss_and_grads(params, h, r, t, config.batch_size, config)
        adam_step(params, state, grads, config)
        params.step = step
        if step % 100 == 0 or step == config.max_steps:
            now = time.perf_counter()
            window = 100 if step % 100 == 0 else step % 100
            line = f"step={step} loss={loss:.6f}"
            if timing:
                line += f" ms_per_step={(now - window_start) * 1000.0 / window:.3f}"
            window_start = now
            log_lines.append(line)
            if log_fn is not None:
                log_fn(line)
        if out_dir is not None and step % config.checkpoint_every == 0:
            _write_checkpoints(params, out_dir, step)
    if out_dir is not None and config.max_steps % config.checkpoint_every != 0:
        _write_checkpoints(params, out_dir, config.max_steps)
    return params, log_lines
