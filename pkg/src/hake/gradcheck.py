"""Finite-difference verification of the analytic gradients.

Backs the check-grad subcommand. Each draw builds a random parameter point
whose scored triples all sit inside the smooth region, then compares the
analytic gradients of the score and of the self-adversarial loss (weights
frozen, as in training) against central differences.

The subgradient conventions are only valid away from the kinks, so draws
are rejected until every triple clears SMOOTH_MARGIN: modulus distance and
|sin| of each phase argument above the margin, |raw rel_mod| and the bias
raws kept clear of 0 and of the clamp window by construction. The margin is
stricter than the 1e-3 smoothness boundary the tolerance is quoted for.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import model
from .data import Triple
from .errors import UsageError
from .train import TrainConfig, loss_and_grads

FD_STEP = 1e-6
TOLERANCE = 1e-5
RELERR_FLOOR = 1e-3
SMOOTH_MARGIN = 1e-2
DEFAULT_KS = (2, 8, 32)
DEFAULT_DRAWS = 100
N_NEG = 4

# rotation exercises every variant and both bias settings
VARIANT_CYCLE = (("full", True), ("full", False), ("modulus_only", True),
                 ("modulus_only", False), ("phase_only", False), ("mode", False))


@dataclass(frozen=True)
class GradCheckReport:
    n_draws: int
    max_rel_err: float
    worst_site: str
    elapsed_s: float

    @property
    def ok(self) -> bool:
        return self.max_rel_err <= TOLERANCE


def _relerr(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), RELERR_FLOOR)


def _smooth_draw(rng: np.random.Generator, k: int, variant: str, bias: bool):
    """Params plus [positive, negatives...] with every triple smooth."""
    pos = Triple(0, 0, 1)
    negs = [Triple(2 + j, 0, 1) if j % 2 == 0 else Triple(0, 0, 2 + j)
            for j in range(N_NEG)]
    triples = [pos] + negs
    n_ent = 2 + N_NEG
    h = np.array([tr.h for tr in triples], dtype=np.int64)
    r = np.array([tr.r for tr in triples], dtype=np.int64)
    t = np.array([tr.t for tr in triples], dtype=np.int64)
    for _ in range(500):
        params = model.ModelParams(
            ent_mod=rng.uniform(0.3, 1.0, (n_ent, k)) * rng.choice([-1.0, 1.0], (n_ent, k)),
            ent_phase=rng.uniform(0.0, 2.0 * np.pi, (n_ent, k)),
            rel_mod=rng.uniform(0.3, 1.0, (1, k)) * rng.choice([-1.0, 1.0], (1, k)),
            rel_bias=rng.uniform(0.15, 0.85, (1, k)) if bias else np.zeros((1, k)),
            rel_phase=rng.uniform(0.0, 2.0 * np.pi, (1, k)),
            lambda_mod=1.0, lambda_phase=1.0,
            variant=variant, bias=bias, seed=0)
        d_mod, _ = model.triple_distances(params, h, r, t)
        if variant != "phase_only" and np.any(d_mod <= SMOOTH_MARGIN):
            continue
        if variant in ("full", "phase_only"):
            delta = (params.ent_phase[h] + params.rel_phase[r] - params.ent_phase[t]) / 2.0
            if np.any(np.abs(np.sin(delta)) <= SMOOTH_MARGIN):
                continue
        return params, pos, negs
    raise RuntimeError("could not draw a smooth parameter point")


def _perturbed(params: model.ModelParams, table: str, row: int, dim: int,
               step: float) -> model.ModelParams:
    out = params.copy()
    getattr(out, table)[row, dim] += step
    return out


def _fd_row(params, table: str, row: int, f) -> np.ndarray:
    k = params.k
    out = np.empty(k)
    for dim in range(k):
        hi = f(_perturbed(params, table, row, dim, FD_STEP))
        lo = f(_perturbed(params, table, row, dim, -FD_STEP))
        out[dim] = (hi - lo) / (2.0 * FD_STEP)
    return out


def _fd_lambda(params, field: str, f) -> float:
    hi = f(replace(params, **{field: getattr(params, field) + FD_STEP}))
    lo = f(replace(params, **{field: getattr(params, field) - FD_STEP}))
    return (hi - lo) / (2.0 * FD_STEP)


def _check_score(params: model.ModelParams, pos: Triple) -> list:
    g = model.score_gradients(params, pos)
    f = lambda p: model.score(p, pos)
    sites = [("score h_mod", g.h_mod, _fd_row(params, "ent_mod", pos.h, f)),
             ("score h_phase", g.h_phase, _fd_row(params, "ent_phase", pos.h, f)),
             ("score t_mod", g.t_mod, _fd_row(params, "ent_mod", pos.t, f)),
             ("score t_phase", g.t_phase, _fd_row(params, "ent_phase", pos.t, f)),
             ("score r_mod", g.r_mod, _fd_row(params, "rel_mod", pos.r, f)),
             ("score r_bias", g.r_bias, _fd_row(params, "rel_bias", pos.r, f)),
             ("score r_phase", g.r_phase, _fd_row(params, "rel_phase", pos.r, f)),
             ("score lambda_mod", g.d_lambda_mod, _fd_lambda(params, "lambda_mod", f)),
             ("score lambda_phase", g.d_lambda_phase, _fd_lambda(params, "lambda_phase", f))]
    return [(name, float(_relerr(a, b).max())) for name, a, b in sites]


def _frozen_weight_loss(triples, config: TrainConfig, weights: np.ndarray):
    """Loss evaluator with the adversarial weights pinned to the base point,
    matching the stop-gradient the analytic derivation assumes."""
    h = np.array([tr.h for tr in triples], dtype=np.int64)
    r = np.array([tr.r for tr in triples], dtype=np.int64)
    t = np.array([tr.t for tr in triples], dtype=np.int64)

    def f(p):
        d_mod, d_phase = model.triple_distances(p, h, r, t)
        d = p.lambda_mod * d_mod + p.lambda_phase * d_phase
        neg_terms = weights * np.logaddexp(0.0, config.gamma - d[1:])
        return float(np.logaddexp(0.0, d[0] - config.gamma) + neg_terms.sum())

    return f


def _check_loss(params: model.ModelParams, pos: Triple, negs: list,
                config: TrainConfig) -> list:
    _, grads = loss_and_grads(params, pos, negs, config)
    dense = {name: np.zeros_like(getattr(params, name))
             for name in ("ent_mod", "ent_phase", "rel_mod", "rel_bias", "rel_phase")}
    np.add.at(dense["ent_mod"], grads.ent_idx, grads.ent_mod)
    np.add.at(dense["ent_phase"], grads.ent_idx, grads.ent_phase)
    np.add.at(dense["rel_mod"], grads.rel_idx, grads.rel_mod)
    np.add.at(dense["rel_bias"], grads.rel_idx, grads.rel_bias)
    np.add.at(dense["rel_phase"], grads.rel_idx, grads.rel_phase)

    d_mod, d_phase = model.triple_distances(
        params, [tr.h for tr in negs], [tr.r for tr in negs], [tr.t for tr in negs])
    d_neg = params.lambda_mod * d_mod + params.lambda_phase * d_phase
    if config.self_adversarial:
        from .train import adversarial_weights
        weights = adversarial_weights(-d_neg, config.alpha)
    else:
        weights = np.full(len(negs), 1.0 / len(negs))
    f = _frozen_weight_loss([pos] + negs, config, weights)

    sites = []
    for table in ("ent_mod", "ent_phase"):
        for row in range(params.n_entities):
            sites.append((f"loss {table}", dense[table][row], _fd_row(params, table, row, f)))
    for table in ("rel_mod", "rel_bias", "rel_phase"):
        sites.append((f"loss {table}", dense[table][0], _fd_row(params, table, 0, f)))
    sites.append(("loss lambda_mod", grads.d_lambda_mod, _fd_lambda(params, "lambda_mod", f)))
    sites.append(("loss lambda_phase", grads.d_lambda_phase, _fd_lambda(params, "lambda_phase", f)))
    return [(name, float(_relerr(a, b).max())) for name, a, b in sites]


def run_check(draws: int = DEFAULT_DRAWS, ks=DEFAULT_KS, seed: int = 0) -> GradCheckReport:
    if draws < 1:
        raise UsageError("check-grad needs at least one draw")
    ks = tuple(int(k) for k in ks)
    if not ks or any(k < 1 for k in ks):
        raise UsageError(f"bad embedding sizes for check-grad: {ks}")
    started = time.perf_counter()
    max_err = 0.0
    worst = "none"
    for i in range(draws):
        k = ks[i % len(ks)]
        variant, bias = VARIANT_CYCLE[i % len(VARIANT_CYCLE)]
        rng = np.random.default_rng(np.random.SeedSequence((seed, i)))
        params, pos, negs = _smooth_draw(rng, k, variant, bias)
        config = TrainConfig(k=k, variant=variant, bias=bias, n_neg=len(negs))
        for name, err in _check_score(params, pos) + _check_loss(params, pos, negs, config):
            if err > max_err:
                max_err = err
                worst = f"{name} (draw {i}, k={k}, {variant}, bias={int(bias)})"
    return GradCheckReport(n_draws=draws, max_rel_err=max_err, worst_site=worst,
                           elapsed_s=time.perf_counter() - started)


def report_lines(report: GradCheckReport, timing: bool = True) -> list:
    lines = [f"draws={report.n_draws}",
             f"max_rel_err={report.max_rel_err:.3e}",
             f"tolerance={TOLERANCE:.0e}",
             f"worst={report.worst_site}",
             f"status={'ok' if report.ok else 'FAIL'}"]
    if timing:
        lines.append(f"elapsed_s={report.elapsed_s:.2f}")
    return lines
