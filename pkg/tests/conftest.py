import sys
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hake.data import Triple
from hake.model import ModelParams


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.ensure_newline()
        terminalreporter.section("acceptance criteria", sep="-")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Shared list of verdict lines, echoed in the terminal summary."""
    return request.config._acceptance_lines


def toy_config(**overrides):
    """Minimal config duck-type accepted by init_params."""
    base = dict(k=4, gamma=6.0, lambda_mod=1.0, lambda_phase=1.0,
                variant="full", bias=False, seed=0)
    base.update(overrides)
    return SimpleNamespace(**base)


def random_params(n_ent, n_rel, k, variant="full", bias=False, seed=0,
                  lam1=1.0, lam2=1.0, rng=None):
    rng = rng if rng is not None else np.random.default_rng(seed)
    return ModelParams(
        ent_mod=rng.uniform(-1.0, 1.0, (n_ent, k)),
        ent_phase=rng.uniform(0.0, 2.0 * np.pi, (n_ent, k)),
        rel_mod=rng.uniform(-1.0, 1.0, (n_rel, k)),
        rel_bias=rng.uniform(-0.2, 1.2, (n_rel, k)) if bias else np.zeros((n_rel, k)),
        rel_phase=rng.uniform(0.0, 2.0 * np.pi, (n_rel, k)),
        lambda_mod=lam1, lambda_phase=lam2,
        variant=variant, bias=bias, seed=seed)


def smooth_point(k, variant="full", bias=False, seed=0, lam1=1.0, lam2=1.0,
                 n_ent=2, n_rel=1, rng=None):
    """(params, triple) with the triple at a smooth point: d_mod and every
    |raw rel_mod| well above 0, bias raw inside the clamp window, every
    phase argument away from multiples of pi. Central differences with step
    1e-6 are reliable there."""
    from hake.model import triple_distances

    rng = rng if rng is not None else np.random.default_rng(seed)
    triple = Triple(0, 0, min(1, n_ent - 1))
    for _ in range(500):
        params = ModelParams(
            ent_mod=rng.uniform(0.3, 1.0, (n_ent, k)) * rng.choice([-1.0, 1.0], (n_ent, k)),
            ent_phase=rng.uniform(0.0, 2.0 * np.pi, (n_ent, k)),
            rel_mod=rng.uniform(0.3, 1.0, (n_rel, k)) * rng.choice([-1.0, 1.0], (n_rel, k)),
            rel_bias=rng.uniform(0.15, 0.85, (n_rel, k)) if bias else np.zeros((n_rel, k)),
            rel_phase=rng.uniform(0.0, 2.0 * np.pi, (n_rel, k)),
            lambda_mod=lam1, lambda_phase=lam2,
            variant=variant, bias=bias, seed=seed)
        d_mod, _ = triple_distances(params, [triple.h], [triple.r], [triple.t])
        if variant != "phase_only" and d_mod[0] <= 1e-2:
            continue
        delta = (params.ent_phase[triple.h] + params.rel_phase[triple.r]
                 - params.ent_phase[triple.t]) / 2.0
        if variant in ("full", "phase_only") and np.any(np.abs(np.sin(delta)) <= 1e-2):
            continue
        return params, triple
    raise RuntimeError("could not draw a smooth parameter point")


def relerr(a, b, floor=1e-3):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


@pytest.fixture
def tiny_bundle():
    from hake.data import RawTriple, build_bundle

    train = [RawTriple("a", "r", "b"), RawTriple("b", "r", "c"),
             RawTriple("c", "s", "a"), RawTriple("a", "s", "c"),
             RawTriple("d", "r", "a"), RawTriple("b", "s", "d"),
             RawTriple("e", "r", "d"), RawTriple("d", "s", "e")]
    valid = [RawTriple("a", "r", "c"), RawTriple("e", "s", "a")]
    test = [RawTriple("b", "r", "d"), RawTriple("c", "s", "e")]
    return build_bundle(train, valid, test)
