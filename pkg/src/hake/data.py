"""Triple file parsing, vocabulary construction, dataset bundles, and the
synthetic hierarchical KG generator.

File format: one triple per line, three fields separated by a single tab,
UTF-8. Ids are assigned by first appearance scanning train, then valid,
then test, so a bundle is reproducible from the files alone.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DataError

HYPERNYM = "hypernym"
MERONYM = "member_meronym"
SIMILAR = "similar_to"

SPLIT_FILENAMES = ("train.txt", "valid.txt", "test.txt")

# Published statistics of the common benchmark distributions, used only to
# cross-check and flag discrepancies; the files themselves stay authoritative.
REFERENCE_STATS = {
    "wn18rr": {"entities": 40493, "relations": 11, "train": 86835, "valid": 3034, "test": 3134},
    "fb15k-237": {"entities": 14541, "relations": 237, "train": 272115, "valid": 17535, "test": 20466},
    "yago3-10": {"entities": 123182, "relations": 37, "train": 1079040, "valid": 5000, "test": 5000},
}


class RawTriple(NamedTuple):
    head: str
    relation: str
    tail: str


class Triple(NamedTuple):
    h: int
    r: int
    t: int


class Vocabulary:
    """Bijection between string tokens and dense integer ids, entities and
    relations in separate id spaces."""

    def __init__(self, entity_tokens: Sequence[str], relation_tokens: Sequence[str]):
        self.entity_tokens = list(entity_tokens)
        self.relation_tokens = list(relation_tokens)
        self.entity_ids = {tok: i for i, tok in enumerate(self.entity_tokens)}
        self.relation_ids = {tok: i for i, tok in enumerate(self.relation_tokens)}
        if len(self.entity_ids) != len(self.entity_tokens):
            raise DataError("duplicate entity token in vocabulary")
        if len(self.relation_ids) != len(self.relation_tokens):
            raise DataError("duplicate relation token in vocabulary")

    @property
    def n_entities(self) -> int:
        return len(self.entity_tokens)

    @property
    def n_relations(self) -> int:
        return len(self.relation_tokens)

    def entity_id(self, token: str) -> int:
        try:
            return self.entity_ids[token]
        except KeyError:
            raise DataError(f"unknown entity token {token!r}") from None

    def relation_id(self, token: str) -> int:
        try:
            return self.relation_ids[token]
        except KeyError:
            raise DataError(f"unknown relation token {token!r}") from None


class DatasetBundle:
    """Vocabulary, ordered splits, and the filter index of all known true
    triples. Immutable after construction; safe for concurrent readers."""

    def __init__(self, vocab: Vocabulary, train: Sequence[Triple],
                 valid: Sequence[Triple], test: Sequence[Triple]):
        self.vocab = vocab
        self.train = [Triple(*t) for t in train]
        self.valid = [Triple(*t) for t in valid]
        self.test = [Triple(*t) for t in test]
        for split_name, split in (("train", self.train), ("valid", self.valid), ("test", self.test)):
            for tr in split:
                if not (0 <= tr.h < vocab.n_entities and 0 <= tr.t < vocab.n_entities):
                    raise DataError(f"{split_name} triple {tr} has entity id outside vocabulary")
                if not (0 <= tr.r < vocab.n_relations):
                    raise DataError(f"{split_name} triple {tr} has relation id outside vocabulary")
        self.filter = frozenset(self.train) | frozenset(self.valid) | frozenset(self.test)
        self.train_set = frozenset(self.train)
        tails: dict[tuple[int, int], list[int]] = {}
        heads: dict[tuple[int, int], list[int]] = {}
        for h, r, t in self.filter:
            tails.setdefault((h, r), []).append(t)
            heads.setdefault((r, t), []).append(h)
        self.tails_by_hr = {k: np.array(sorted(v), dtype=np.int64) for k, v in tails.items()}
        self.heads_by_rt = {k: np.array(sorted(v), dtype=np.int64) for k, v in heads.items()}
        self._arrays: dict[str, np.ndarray] = {}

    @property
    def n_entities(self) -> int:
        return self.vocab.n_entities

    @property
    def n_relations(self) -> int:
        return self.vocab.n_relations

    def split_array(self, name: str) -> np.ndarray:
        """(N, 3) int64 view of a split, cached."""
        if name not in self._arrays:
            split = {"train": self.train, "valid": self.valid, "test": self.test}[name]
            self._arrays[name] = np.array(split, dtype=np.int64).reshape(-1, 3)
        return self._arrays[name]

    def contains(self, h: int, r: int, t: int) -> bool:
        return (h, r, t) in self.filter


@dataclass(frozen=True)
class DatasetStats:
    entities: int
    relations: int
    train: int
    valid: int
    test: int

    def as_dict(self) -> dict[str, int]:
        return {"entities": self.entities, "relations": self.relations,
                "train": self.train, "valid": self.valid, "test": self.test}

    def kv_lines(self) -> list[str]:
        return [f"{k}={v}" for k, v in self.as_dict().items()]

    def table(self) -> str:
        rows = [("#E", self.entities), ("#R", self.relations),
                ("#TR", self.train), ("#VA", self.valid), ("#TE", self.test)]
        width = max(len(f"{v:,}") for _, v in rows)
        return "\n".join(f"{name:<4} {v:>{width},}" for name, v in rows)


def parse_triple_file(stream: io.TextIOBase | str, name: str = "<stream>") -> list[RawTriple]:
    """Parse tab-separated h-r-t lines into RawTriples, preserving order.

    Raises DataError (carrying the 1-based line number) for a line that does
    not have exactly 3 tab-separated non-empty fields, and for a file with no
    triples at all.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream.read().splitlines()
    triples: list[RawTriple] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataError(f"{name}: line {lineno}: expected 3 tab-separated fields, got {len(fields)}")
        head, rel, tail = (f.strip() for f in fields)
        if not head or not rel or not tail:
            raise DataError(f"{name}: line {lineno}: empty field after trimming")
        triples.append(RawTriple(head, rel, tail))
    if not triples:
        raise DataError(f"{name}: no triples found")
    return triples


def build_bundle(train: Sequence[RawTriple], valid: Sequence[RawTriple],
                 test: Sequence[RawTriple]) -> DatasetBundle:
    """Assign ids by first appearance over train, valid, test and assemble the
    bundle. A token that appears only in valid/test is a hard error: silently
    dropping such triples would corrupt the evaluation metrics.
    """
    ent_tokens: list[str] = []
    rel_tokens: list[str] = []
    ent_ids: dict[str, int] = {}
    rel_ids: dict[str, int] = {}

    def ent(token: str) -> int:
        if token not in ent_ids:
            ent_ids[token] = len(ent_tokens)
            ent_tokens.append(token)
        return ent_ids[token]

    def rel(token: str) -> int:
        if token not in rel_ids:
            rel_ids[token] = len(rel_tokens)
            rel_tokens.append(token)
        return rel_ids[token]

    train_ids = [Triple(ent(h), rel(r), ent(t)) for h, r, t in train]
    seen_ent = set(ent_ids)
    seen_rel = set(rel_ids)

    def check_seen(split_name: str, triples: Sequence[RawTriple]) -> list[Triple]:
        out = []
        for h, r, t in triples:
            for token in (h, t):
                if token not in seen_ent:
                    raise DataError(f"entity {token!r} appears in {split_name} but not in train")
            if r not in seen_rel:
                raise DataError(f"relation {r!r} appears in {split_name} but not in train")
            out.append(Triple(ent(h), rel(r), ent(t)))
        return out

    valid_ids = check_seen("valid", valid)
    test_ids = check_seen("test", test)
    vocab = Vocabulary(ent_tokens, rel_tokens)
    return DatasetBundle(vocab, train_ids, valid_ids, test_ids)


def load_bundle_files(train_path: str, valid_path: str, test_path: str) -> DatasetBundle:
    raws = []
    for path in (train_path, valid_path, test_path):
        if not os.path.exists(path):
            raise DataError(f"triple file not found: {path}")
        with open(path, encoding="utf-8") as f:
            raws.append(parse_triple_file(f, name=path))
    return build_bundle(*raws)


def load_bundle_dir(data_dir: str) -> DatasetBundle:
    return load_bundle_files(*(os.path.join(data_dir, n) for n in SPLIT_FILENAMES))


def dataset_stats(bundle: DatasetBundle) -> DatasetStats:
    return DatasetStats(bundle.n_entities, bundle.n_relations,
                        len(bundle.train), len(bundle.valid), len(bundle.test))


def compare_reference(stats: DatasetStats, reference: str) -> list[tuple[str, int, int]]:
    """Mismatches between file-derived counts and the named reference stats,
    as (field, file_value, reference_value) rows. Empty list = full match."""
    if reference not in REFERENCE_STATS:
        raise DataError(f"unknown reference dataset {reference!r}; known: {', '.join(sorted(REFERENCE_STATS))}")
    ref = REFERENCE_STATS[reference]
    actual = stats.as_dict()
    return [(k, actual[k], ref[k]) for k in ref if actual[k] != ref[k]]


def bundle_to_raw(bundle: DatasetBundle) -> tuple[list[RawTriple], list[RawTriple], list[RawTriple]]:
    """Inverse of build_bundle: splits as token triples, in order."""
    ents = bundle.vocab.entity_tokens
    rels = bundle.vocab.relation_tokens
    def back(split: Sequence[Triple]) -> list[RawTriple]:
        return [RawTriple(ents[h], rels[r], ents[t]) for h, r, t in split]
    return back(bundle.train), back(bundle.valid), back(bundle.test)


def format_triples(triples: Iterable[RawTriple]) -> str:
    return "".join(f"{h}\t{r}\t{t}\n" for h, r, t in triples)


def write_split_files(out_dir: str, train: Sequence[RawTriple], valid: Sequence[RawTriple],
                      test: Sequence[RawTriple]) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for name, triples in zip(SPLIT_FILENAMES, (train, valid, test)):
        with open(os.path.join(out_dir, name), "w", encoding="utf-8") as f:
            f.write(format_triples(triples))


# ---------------------------------------------------------------------------
# Synthetic hierarchical KG
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthSpec:
    """Complete b-ary tree of the given depth plus optional same-parent leaf
    links. Node tokens encode the path from the root ("n", "n.0", "n.0.2", ...)
    so an entity's tree level is recoverable from its token alone.
    """
    depth: int
    branching: int
    seed: int
    sibling_fraction: float

    def __post_init__(self):
        if self.depth < 2:
            raise ValueError(f"depth must be >= 2, got {self.depth}")
        if self.branching < 2:
            raise ValueError(f"branching must be >= 2, got {self.branching}")
        if not 0.0 <= self.sibling_fraction <= 1.0:
            raise ValueError(f"sibling_fraction must be in [0, 1], got {self.sibling_fraction}")


def node_depth(token: str) -> int:
    """Tree level of a synthetic entity token (root = 0)."""
    return token.count(".")


def synthetic_raw_triples(spec: SynthSpec) -> tuple[list[RawTriple], list[RawTriple], list[RawTriple]]:
    """Generate the synthetic KG and split it 80/10/10.

    Emits (child, hypernym, parent) for every tree edge, (parent,
    member_meronym, child) for the inverse direction, and both directions of
    similar_to for a sibling_fraction share of same-parent leaf pairs. The
    split is a seeded shuffle constrained so every entity and relation occurs
    in train; an instance too small to satisfy that is an error.
    """
    rng = np.random.default_rng(spec.seed)
    levels: list[list[str]] = [["n"]]
    for _ in range(spec.depth):
        levels.append([f"{parent}.{i}" for parent in levels[-1] for i in range(spec.branching)])

    triples: list[RawTriple] = []
    for parents, children in zip(levels, levels[1:]):
        for ci, child in enumerate(children):
            parent = parents[ci // spec.branching]
            triples.append(RawTriple(child, HYPERNYM, parent))
            triples.append(RawTriple(parent, MERONYM, child))

    leaves = levels[-1]
    pairs = []
    for g in range(0, len(leaves), spec.branching):
        group = leaves[g:g + spec.branching]
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                pairs.append((group[i], group[j]))
    n_chosen = int(len(pairs) * spec.sibling_fraction + 0.5)
    chosen = rng.permutation(len(pairs))[:n_chosen]
    for idx in sorted(chosen):
        x, y = pairs[idx]
        triples.append(RawTriple(x, SIMILAR, y))
        triples.append(RawTriple(y, SIMILAR, x))

    n = len(triples)
    n_valid = n // 10
    n_test = n // 10
    if n_valid == 0 or n_test == 0:
        raise DataError(f"synthetic KG too small to split: {n} triples")

    order = rng.permutation(n)
    uncovered_ents = {tok for level in levels for tok in level}
    uncovered_rels = {r for _, r, _ in triples}
    forced: list[int] = []
    rest: list[int] = []
    for idx in order:
        h, r, t = triples[idx]
        if h in uncovered_ents or t in uncovered_ents or r in uncovered_rels:
            uncovered_ents.discard(h)
            uncovered_ents.discard(t)
            uncovered_rels.discard(r)
            forced.append(idx)
        else:
            rest.append(idx)
    n_train = max(n - n_valid - n_test, len(forced))
    if n - n_train < n_valid + n_test:
        raise DataError("synthetic KG too small: train coverage leaves no room for valid/test")
    train_idx = forced + rest[:n_train - len(forced)]
    valid_idx = rest[n_train - len(forced):n_train - len(forced) + n_valid]
    test_idx = rest[n_train - len(forced) + n_valid:]
    return ([triples[i] for i in train_idx],
            [triples[i] for i in valid_idx],
            [triples[i] for i in test_idx])


def generate_synthetic_kg(spec: SynthSpec) -> DatasetBundle:
    return build_bundle(*synthetic_raw_triples(spec))
