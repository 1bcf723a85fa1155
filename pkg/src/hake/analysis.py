"""Diagnostics over trained parameters, exported as CSV.

Histograms of relation/entity moduli and phases, polar exports of entity
embeddings, differing-sign counts over linked vs unlinked entity pairs,
and residuals of the symmetry/inversion/composition relation patterns.
All outputs are CSV with a one-line header; nothing here plots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._common import LOG_RADIUS_FLOOR
from .data import DatasetBundle
from .errors import DataError, UsageError
from .model import ModelParams, effective_modulus

TWO_PI = 2.0 * np.pi

PATTERN_ARITY = {"symmetry": 1, "inversion": 2, "composition": 3}


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class PatternResidual:
    pattern: str
    mod_residual: np.ndarray
    phase_residual: np.ndarray


def _histogram(values: np.ndarray, bins: int, value_range: tuple | None = None) -> Histogram:
    # value_range=None lets the edges follow the data; phases get the fixed
    # circle range instead so bins stay comparable across relations.
    if bins < 1:
        raise UsageError("bins must be >= 1")
    counts, edges = np.histogram(values, bins=bins, range=value_range)
    hist = Histogram(bin_edges=edges, counts=counts)
    if hist.total != values.size:
        raise DataError("histogram dropped values outside the edge range")
    return hist


def _check_relation(params: ModelParams, rel_id: int) -> None:
    if not 0 <= rel_id < params.n_relations:
        raise DataError(f"relation id {rel_id} out of range (have {params.n_relations})")


def relation_modulus_histogram(params: ModelParams, rel_id: int, bins: int = 30) -> Histogram:
    """Histogram of the k effective (positive) modulus entries of one relation."""
    _check_relation(params, rel_id)
    values = effective_modulus(params.rel_mod[rel_id])
    return _histogram(values, bins)


def relation_phase_histogram(params: ModelParams, rel_id: int, bins: int = 30) -> Histogram:
    """Histogram of one relation's phases reduced mod 2pi, bins over [0, 2pi)."""
    _check_relation(params, rel_id)
    values = np.mod(params.rel_phase[rel_id], TWO_PI)
    return _histogram(values, bins, (0.0, TWO_PI))


def entity_modulus_histogram(params: ModelParams, bins: int = 30) -> Histogram:
    """Histogram over all |E|*k entity modulus magnitudes."""
    values = np.abs(params.ent_mod).reshape(-1)
    return _histogram(values, bins)


def entity_polar_export(params: ModelParams, entity_ids, log_scale: bool = False) -> list:
    """(entity, dim, radius, angle) rows, one per dimension of each entity.

    radius = |ent_mod|; with log_scale, radius = -log10(max(radius, 1e-8)),
    so smaller moduli plot at larger radii. angle = phase mod 2pi.
    """
    rows = []
    for e in entity_ids:
        e = int(e)
        if not 0 <= e < params.n_entities:
            raise DataError(f"entity id {e} out of range (have {params.n_entities})")
        radius = np.abs(params.ent_mod[e])
        if log_scale:
            radius = -np.log10(np.maximum(radius, LOG_RADIUS_FLOOR))
        angle = np.mod(params.ent_phase[e], TWO_PI)
        for d in range(params.k):
            rows.append((e, d, float(radius[d]), float(angle[d])))
    return rows


def sign_agreement_counts(params: ModelParams, pairs, labels) -> list:
    """(pair_id, label, diff_signs) rows: per pair, the number of dimensions
    where the two entities' modulus entries have opposite signs."""
    rows = []
    for i, ((a, b), label) in enumerate(zip(pairs, labels)):
        count = int(np.sum(params.ent_mod[a] * params.ent_mod[b] < 0.0))
        rows.append((i, label, count))
    return rows


def linked_unlinked_pairs(bundle: DatasetBundle, rng: np.random.Generator,
                          max_pairs: int | None = None) -> tuple:
    """Linked pairs are distinct (h, t) endpoint pairs of train edges; the
    unlinked sample has equal size, drawn uniformly and rejected against the
    filter in both directions. Rejection cannot see triples missing from the
    files, so an "unlinked" pair may still be semantically related.
    """
    linked = sorted({(h, t) for (h, _, t) in bundle.train if h != t})
    if not linked:
        raise DataError("no linked pairs: train split has no h != t edges")
    if max_pairs is not None and len(linked) > max_pairs:
        chosen = rng.permutation(len(linked))[:max_pairs]
        linked = [linked[i] for i in sorted(chosen)]
    connected = {(h, t) for (h, _, t) in bundle.filter}
    n_ent = bundle.n_entities
    unlinked = []
    attempts = 0
    while len(unlinked) < len(linked):
        attempts += 1
        if attempts > 1000 * len(linked):
            raise DataError("could not sample enough unlinked pairs")
        a = int(rng.integers(0, n_ent))
        b = int(rng.integers(0, n_ent))
        if a == b or (a, b) in connected or (b, a) in connected:
            continue
        unlinked.append((a, b))
    return linked, unlinked


def pattern_residual(params: ModelParams, rel_ids, pattern: str) -> PatternResidual:
    """Entrywise residuals of the relation-pattern equations.

    symmetry (r):        |r_m*r_m - 1|,      circ(2 r_p)
    inversion (r1,r2):   |r1_m - 1/r2_m|,    circ(r1_p + r2_p)
    composition (1,2,3): |r1_m - r2_m*r3_m|, circ(r1_p - r2_p - r3_p)
    where circ(x) = min(x mod 2pi, 2pi - x mod 2pi) in [0, pi].
    """
    if pattern not in PATTERN_ARITY:
        raise UsageError(f"unknown pattern {pattern!r}; "
                         f"choose from {', '.join(sorted(PATTERN_ARITY))}")
    rel_ids = [int(r) for r in rel_ids]
    if len(rel_ids) != PATTERN_ARITY[pattern]:
        raise UsageError(f"pattern {pattern} takes {PATTERN_ARITY[pattern]} "
                         f"relation ids, got {len(rel_ids)}")
    for rel_id in rel_ids:
        _check_relation(params, rel_id)
    mods = [effective_modulus(params.rel_mod[r]) for r in rel_ids]
    phases = [params.rel_phase[r] for r in rel_ids]
    if pattern == "symmetry":
        mod_res = np.abs(mods[0] * mods[0] - 1.0)
        phase_expr = 2.0 * phases[0]
    elif pattern == "inversion":
        with np.errstate(divide="ignore"):
            mod_res = np.abs(mods[0] - 1.0 / mods[1])
        phase_expr = phases[0] + phases[1]
    else:
        mod_res = np.abs(mods[0] - mods[1] * mods[2])
        phase_expr = phases[0] - phases[1] - phases[2]
    wrapped = np.mod(phase_expr, TWO_PI)
    phase_res = np.minimum(wrapped, TWO_PI - wrapped)
    return PatternResidual(pattern=pattern, mod_residual=mod_res, phase_residual=phase_res)


# ---------------------------------------------------------------------------
# CSV writers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def histogram_csv(hist: Histogram) -> str:
    lines = ["bin_lo,bin_hi,count"]
    for i in range(hist.counts.size):
        lines.append(f"{_fmt(hist.bin_edges[i])},{_fmt(hist.bin_edges[i + 1])},{hist.counts[i]}")
    return "\n".join(lines) + "\n"


def polar_csv(rows) -> str:
    lines = ["entity,dim,radius,angle"]
    for entity, dim, radius, angle in rows:
        lines.append(f"{entity},{dim},{_fmt(radius)},{_fmt(angle)}")
    return "\n".join(lines) + "\n"


def signs_csv(rows) -> str:
    lines = ["pair_id,label,diff_signs"]
    for pair_id, label, count in rows:
        lines.append(f"{pair_id},{label},{count}")
    return "\n".join(lines) + "\n"


def pattern_csv(residual: PatternResidual) -> str:
    lines = ["pattern,dim,mod_residual,phase_residual"]
    for d in range(residual.mod_residual.size):
        lines.append(f"{residual.pattern},{d},{_fmt(residual.mod_residual[d])},"
                     f"{_fmt(residual.phase_residual[d])}")
    return "\n".join(lines) + "\n"


def write_csv(text: str, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
