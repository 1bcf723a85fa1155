"""Embedding parameters, distances, scores, analytic gradients, and the
checkpoint format.

Entities carry a modulus part and a phase part (k dimensions each, so the
full embedding width is 2k). Relations carry a modulus (positive via |raw|),
a mixture bias in (0,1) (hard clamp, zero gradient when clamped), and a
phase. The "mode" variant drops the phase/bias machinery and scores with
the raw signed relation modulus, ||h*r - t||_2.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from ._common import BIAS_EPS, VARIANT_CODES
from .data import Triple
from .errors import DataError
from . import kernels

CHECKPOINT_MAGIC = "hake1"
# Serialization order of the parameter tables in a checkpoint.
TABLE_NAMES = ("ent_mod", "ent_phase", "rel_mod", "rel_bias", "rel_phase")


@dataclass
class ModelParams:
    """The five parameter tables plus distance coefficients and metadata.

    rel_mod and rel_bias hold raw values; the effective modulus is |raw|
    and the effective bias is clamp(raw, eps, 1-eps). Phases are stored
    unwrapped; the sine in the phase distance supplies the periodicity.
    """

    ent_mod: np.ndarray
    ent_phase: np.ndarray
    rel_mod: np.ndarray
    rel_bias: np.ndarray
    rel_phase: np.ndarray
    lambda_mod: float
    lambda_phase: float
    variant: str
    bias: bool
    seed: int
    step: int = 0

    def __post_init__(self):
        if self.variant not in VARIANT_CODES:
            raise DataError(f"unknown variant {self.variant!r}")
        if self.variant == "mode" and self.bias:
            raise DataError("variant 'mode' has no bias term")
        shapes = {self.ent_mod.shape[1], self.ent_phase.shape[1],
                  self.rel_mod.shape[1], self.rel_bias.shape[1], self.rel_phase.shape[1]}
        if len(shapes) != 1:
            raise DataError(f"parameter tables disagree on k: {sorted(shapes)}")
        if not (np.isfinite(self.lambda_mod) and self.lambda_mod >= 0.0
                and np.isfinite(self.lambda_phase) and self.lambda_phase >= 0.0):
            raise DataError("lambda coefficients must be finite and non-negative")

    @property
    def n_entities(self) -> int:
        return self.ent_mod.shape[0]

    @property
    def n_relations(self) -> int:
        return self.rel_mod.shape[0]

    @property
    def k(self) -> int:
        return self.ent_mod.shape[1]

    @property
    def tables(self) -> tuple:
        return (self.ent_mod, self.ent_phase, self.rel_mod, self.rel_bias, self.rel_phase)

    @property
    def variant_code(self) -> int:
        return VARIANT_CODES[self.variant]

    def copy(self) -> "ModelParams":
        return replace(self, ent_mod=self.ent_mod.copy(), ent_phase=self.ent_phase.copy(),
                       rel_mod=self.rel_mod.copy(), rel_bias=self.rel_bias.copy(),
                       rel_phase=self.rel_phase.copy())


@dataclass
class GradSlices:
    """Gradient of one triple's score with respect to the touched rows."""

    h_mod: np.ndarray
    h_phase: np.ndarray
    t_mod: np.ndarray
    t_phase: np.ndarray
    r_mod: np.ndarray
    r_bias: np.ndarray
    r_phase: np.ndarray
    d_lambda_mod: float
    d_lambda_phase: float


def effective_modulus(raw: np.ndarray) -> np.ndarray:
    return np.abs(raw)


def effective_bias(raw: np.ndarray) -> np.ndarray:
    return np.clip(raw, BIAS_EPS, 1.0 - BIAS_EPS)


def init_params(dims: tuple, config, rng: np.random.Generator) -> ModelParams:
    """Fresh parameters. dims = (n_entities, n_relations, k).

    ent_mod ~ U[-b, b] with b = gamma/k (random symmetric signs), raw
    rel_mod ~ U[0, b], phases ~ U[0, 2pi), raw bias all 0 (effective bias
    starts at the clamp floor). Draw order is pinned: ent_mod, ent_phase,
    rel_mod, rel_phase.
    """
    n_ent, n_rel, k = dims
    if n_ent <= 0 or n_rel <= 0:
        raise DataError(f"zero-sized vocabulary: {n_ent} entities, {n_rel} relations")
    if k < 1:
        raise DataError(f"dimension k must be >= 1, got {k}")
    b = config.gamma / k
    two_pi = 2.0 * np.pi
    return ModelParams(
        ent_mod=rng.uniform(-b, b, size=(n_ent, k)),
        ent_phase=rng.uniform(0.0, two_pi, size=(n_ent, k)),
        rel_mod=rng.uniform(0.0, b, size=(n_rel, k)),
        rel_bias=np.zeros((n_rel, k)),
        rel_phase=rng.uniform(0.0, two_pi, size=(n_rel, k)),
        lambda_mod=float(config.lambda_mod),
        lambda_phase=float(config.lambda_phase),
        variant=config.variant,
        bias=bool(config.bias),
        seed=int(config.seed),
    )


def modulus_distance(h_row, r_row, bias_row, t_row, bias_on: bool) -> float:
    """||h*|r| + (h+t)*clamp(bias) - t||_2, or the unbiased form."""
    h = np.asarray(h_row, dtype=np.float64)
    t = np.asarray(t_row, dtype=np.float64)
    r = effective_modulus(np.asarray(r_row, dtype=np.float64))
    if bias_on:
        b = effective_bias(np.asarray(bias_row, dtype=np.float64))
        u = h * r + (h + t) * b - t
    else:
        u = h * r - t
    return float(np.linalg.norm(u))


def phase_distance(h_row, r_row, t_row) -> float:
    """||sin((h + r - t)/2)||_1; invariant under 2pi shifts of any entry."""
    delta = (np.asarray(h_row, dtype=np.float64) + np.asarray(r_row, dtype=np.float64)
             - np.asarray(t_row, dtype=np.float64)) / 2.0
    return float(np.abs(np.sin(delta)).sum())


def mode_distance(h_row, r_row, t_row) -> float:
    """||h*r - t||_2 with r unrestricted in sign."""
    u = (np.asarray(h_row, dtype=np.float64) * np.asarray(r_row, dtype=np.float64)
         - np.asarray(t_row, dtype=np.float64))
    return float(np.linalg.norm(u))


def _check_ids(params: ModelParams, h, r, t) -> None:
    if np.any(h < 0) or np.any(h >= params.n_entities) \
            or np.any(t < 0) or np.any(t >= params.n_entities):
        raise DataError("entity id out of range")
    if np.any(r < 0) or np.any(r >= params.n_relations):
        raise DataError("relation id out of range")


def triple_distances(params: ModelParams, h, r, t) -> tuple:
    """(d_mod, d_phase) arrays for id arrays h, r, t."""
    h = np.asarray(h, dtype=np.int64)
    r = np.asarray(r, dtype=np.int64)
    t = np.asarray(t, dtype=np.int64)
    _check_ids(params, h, r, t)
    return kernels.triple_distances(*params.tables, h, r, t,
                                    params.variant_code, int(params.bias))


def score_triples(params: ModelParams, h, r, t) -> np.ndarray:
    d_mod, d_phase = triple_distances(params, h, r, t)
    return -(params.lambda_mod * d_mod + params.lambda_phase * d_phase)


def score(params: ModelParams, triple: Triple) -> float:
    h, r, t = triple
    return float(score_triples(params, [h], [r], [t])[0])


def candidate_scores(params: ModelParams, query: Triple, direction: str) -> np.ndarray:
    """Scores of (e, r, t) for all e (replace_head) or (h, r, e) (replace_tail)."""
    if direction not in ("replace_head", "replace_tail"):
        raise DataError(f"invalid direction {direction!r}")
    h, r, t = query
    _check_ids(params, np.int64(h), np.int64(r), np.int64(t))
    return kernels.candidate_scores(*params.tables, int(h), int(r), int(t),
                                    int(direction == "replace_tail"),
                                    params.variant_code, int(params.bias),
                                    params.lambda_mod, params.lambda_phase)


def score_gradients(params: ModelParams, triple: Triple) -> GradSlices:
    """Analytic d score / d row for the five touched rows plus the lambdas.

    Subgradient conventions: 0 at d_mod = 0, sign(0) = 0 for |raw|, zero
    gradient where the bias clamp is active, sign(sin) = 0 at sin = 0.
    """
    h, r, t = triple
    harr = np.array([h], dtype=np.int64)
    rarr = np.array([r], dtype=np.int64)
    tarr = np.array([t], dtype=np.int64)
    _check_ids(params, harr, rarr, tarr)
    d_mod, d_phase = kernels.triple_distances(*params.tables, harr, rarr, tarr,
                                              params.variant_code, int(params.bias))
    coeff = np.array([-1.0])  # score = -(lam1*d_mod + lam2*d_phase)
    rows = kernels.triple_grad_rows(*params.tables, harr, rarr, tarr, coeff,
                                    params.lambda_mod, params.lambda_phase,
                                    params.variant_code, int(params.bias))
    gh_mod, gh_phase, gt_mod, gt_phase, gr_mod, gr_bias, gr_phase = rows
    return GradSlices(
        h_mod=gh_mod[0], h_phase=gh_phase[0],
        t_mod=gt_mod[0], t_phase=gt_phase[0],
        r_mod=gr_mod[0], r_bias=gr_bias[0], r_phase=gr_phase[0],
        d_lambda_mod=float(-d_mod[0]),
        d_lambda_phase=float(-d_phase[0]),
    )


def save_checkpoint(params: ModelParams, path: str) -> None:
    """Textual header plus the five tables as little-endian float64."""
    header = "\n".join([
        f"magic={CHECKPOINT_MAGIC}",
        f"entities={params.n_entities}",
        f"relations={params.n_relations}",
        f"dim={params.k}",
        f"variant={params.variant}",
        f"bias={int(params.bias)}",
        f"lambda_mod={params.lambda_mod!r}",
        f"lambda_phase={params.lambda_phase!r}",
        f"seed={params.seed}",
        f"step={params.step}",
        "end_header",
    ]) + "\n"
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        for name in TABLE_NAMES:
            getattr(params, name).astype("<f8").tofile(f)


def _read_header(f: io.BufferedReader, path: str) -> dict:
    fields = {}
    first = True
    while True:
        line = f.readline()
        if not line:
            raise DataError(f"{path}: truncated checkpoint header")
        text = line.decode("ascii", errors="replace").strip()
        if text == "end_header":
            return fields
        if "=" not in text:
            raise DataError(f"{path}: malformed header line {text!r}")
        key, value = text.split("=", 1)
        if first and (key != "magic" or value != CHECKPOINT_MAGIC):
            raise DataError(f"{path}: not a checkpoint (bad magic)")
        first = False
        fields[key] = value


def load_checkpoint(path: str) -> ModelParams:
    try:
        f = open(path, "rb")
    except OSError as exc:
        raise DataError(f"cannot open checkpoint: {exc}") from None
    with f:
        fields = _read_header(f, path)
        try:
            n_ent = int(fields["entities"])
            n_rel = int(fields["relations"])
            k = int(fields["dim"])
            variant = fields["variant"]
            bias = bool(int(fields["bias"]))
            lambda_mod = float(fields["lambda_mod"])
            lambda_phase = float(fields["lambda_phase"])
            seed = int(fields["seed"])
            step = int(fields["step"])
        except (KeyError, ValueError) as exc:
            raise DataError(f"{path}: bad checkpoint header: {exc}") from None
        if n_ent < 1 or n_rel < 1 or k < 1:
            raise DataError(f"{path}: non-positive dims in header")
        shapes = {"ent_mod": (n_ent, k), "ent_phase": (n_ent, k),
                  "rel_mod": (n_rel, k), "rel_bias": (n_rel, k), "rel_phase": (n_rel, k)}
        tables = {}
        for name in TABLE_NAMES:
            rows, cols = shapes[name]
            data = np.fromfile(f, dtype="<f8", count=rows * cols)
            if data.size != rows * cols:
                raise DataError(f"{path}: truncated table {name}")
            tables[name] = data.astype(np.float64).reshape(rows, cols)
        if f.read(1):
            raise DataError(f"{path}: trailing bytes after last table")
    return ModelParams(lambda_mod=lambda_mod, lambda_phase=lambda_phase,
                       variant=variant, bias=bias, seed=seed, step=step, **tables)
