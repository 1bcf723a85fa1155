import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hake.analysis import (
    Histogram,
    entity_modulus_histogram,
    entity_polar_export,
    histogram_csv,
    linked_unlinked_pairs,
    pattern_csv,
    pattern_residual,
    polar_csv,
    relation_modulus_histogram,
    relation_phase_histogram,
    sign_agreement_counts,
    signs_csv,
)
from hake.data import build_bundle, RawTriple
from hake.errors import DataError, UsageError
from hake.model import ModelParams

PI = np.pi


def make_params(ent_mod=None, ent_phase=None, rel_mod=None, rel_bias=None,
                rel_phase=None, n_ent=2, n_rel=1, k=2):
    """Params with explicit tables; unspecified ones are benign constants."""
    if ent_mod is not None:
        ent_mod = np.atleast_2d(np.asarray(ent_mod, dtype=np.float64))
        n_ent, k = ent_mod.shape
    if rel_mod is not None:
        rel_mod = np.atleast_2d(np.asarray(rel_mod, dtype=np.float64))
        n_rel, k = rel_mod.shape
    if rel_phase is not None:
        rel_phase = np.atleast_2d(np.asarray(rel_phase, dtype=np.float64))
        n_rel, k = rel_phase.shape

    def table(given, shape, fill):
        if given is None:
            return np.full(shape, fill, dtype=np.float64)
        return np.atleast_2d(np.asarray(given, dtype=np.float64))

    return ModelParams(
        ent_mod=table(ent_mod, (n_ent, k), 0.5),
        ent_phase=table(ent_phase, (n_ent, k), 0.0),
        rel_mod=table(rel_mod, (n_rel, k), 1.0),
        rel_bias=table(rel_bias, (n_rel, k), 0.0),
        rel_phase=table(rel_phase, (n_rel, k), 0.0),
        lambda_mod=1.0, lambda_phase=1.0,
        variant="full", bias=False, seed=0)


# ---------------------------------------------------------------------------
# histograms
# ---------------------------------------------------------------------------

def test_relation_modulus_histogram_constant_entries_single_bin():
    params = make_params(rel_mod=[[1.0] * 8])
    hist = relation_modulus_histogram(params, 0, bins=5)
    assert hist.total == 8
    assert hist.counts.max() == 8
    assert (hist.counts > 0).sum() == 1
    lo = hist.bin_edges[np.argmax(hist.counts)]
    hi = hist.bin_edges[np.argmax(hist.counts) + 1]
    assert lo <= 1.0 <= hi


def test_relation_modulus_histogram_applies_absolute_value():
    params = make_params(rel_mod=[[-0.5, 0.5]])
    hist = relation_modulus_histogram(params, 0, bins=4)
    occupied = np.nonzero(hist.counts)[0]
    assert occupied.size == 1
    assert hist.counts[occupied[0]] == 2
    assert hist.bin_edges[occupied[0]] <= 0.5 <= hist.bin_edges[occupied[0] + 1]


def test_relation_modulus_histogram_bad_relation():
    params = make_params()
    with pytest.raises(DataError):
        relation_modulus_histogram(params, 3)
    with pytest.raises(DataError):
        relation_modulus_histogram(params, -1)


def test_relation_phase_histogram_mod_reduction():
    params = make_params(rel_phase=[[2.0 * PI + PI / 2.0] * 6])
    hist = relation_phase_histogram(params, 0, bins=4)
    # fixed circle range: bin 1 of 4 is [pi/2, pi)
    assert hist.counts.tolist() == [0, 6, 0, 0]
    assert hist.bin_edges[0] == 0.0
    assert hist.bin_edges[-1] == pytest.approx(2.0 * PI)


def test_relation_phase_histogram_uniform_grid_one_per_bin():
    k = 12
    grid = np.arange(k) * (2.0 * PI / k)
    params = make_params(rel_phase=[grid])
    hist = relation_phase_histogram(params, 0, bins=k)
    assert hist.counts.tolist() == [1] * k


def test_entity_modulus_histogram_all_equal_single_bin():
    params = make_params(ent_mod=[[0.3, 0.3], [0.3, 0.3], [0.3, 0.3]])
    hist = entity_modulus_histogram(params, bins=7)
    assert hist.total == 6
    assert (hist.counts > 0).sum() == 1


def test_entity_modulus_histogram_tenths_one_per_bin():
    entries = np.array([0.1 * i for i in range(1, 11)])
    params = make_params(ent_mod=entries.reshape(2, 5))
    hist = entity_modulus_histogram(params, bins=10)
    assert hist.counts.tolist() == [1] * 10
    assert 0.0 <= hist.bin_edges[0]
    assert hist.bin_edges[-1] <= 1.0


def test_histogram_counts_sum_to_input_count():
    rng = np.random.default_rng(0)
    params = make_params(ent_mod=rng.normal(size=(6, 5)),
                         rel_mod=rng.normal(size=(3, 5)),
                         rel_phase=rng.uniform(-10, 10, size=(3, 5)))
    assert entity_modulus_histogram(params, bins=4).total == 30
    assert relation_modulus_histogram(params, 1, bins=3).total == 5
    assert relation_phase_histogram(params, 2, bins=9).total == 5


def test_histogram_rejects_zero_bins():
    params = make_params()
    with pytest.raises(UsageError):
        entity_modulus_histogram(params, bins=0)


@given(st.integers(min_value=1, max_value=40), st.integers(min_value=0, max_value=2 ** 31))
@settings(max_examples=30, deadline=None)
def test_histogram_total_invariant(bins, seed):
    rng = np.random.default_rng(seed)
    params = make_params(ent_mod=rng.normal(scale=3.0, size=(4, 6)))
    hist = entity_modulus_histogram(params, bins=bins)
    assert hist.total == 24
    assert len(hist.counts) == len(hist.bin_edges) - 1
    assert np.all(np.diff(hist.bin_edges) > 0)


# ---------------------------------------------------------------------------
# polar export
# ---------------------------------------------------------------------------

def test_polar_export_log_scale_reference_values():
    params = make_params(ent_mod=[[0.1, 1.0]], ent_phase=[[0.0, 3.0 * PI]])
    rows = entity_polar_export(params, [0], log_scale=True)
    assert rows[0] == (0, 0, pytest.approx(1.0), 0.0)
    assert rows[1][2] == pytest.approx(0.0)
    assert rows[1][3] == pytest.approx(PI)


def test_polar_export_linear_radius_is_magnitude():
    params = make_params(ent_mod=[[-0.25, 0.5]])
    rows = entity_polar_export(params, [0], log_scale=False)
    assert rows[0][2] == pytest.approx(0.25)
    assert rows[1][2] == pytest.approx(0.5)


def test_polar_export_row_per_dimension():
    rng = np.random.default_rng(1)
    params = make_params(ent_mod=rng.normal(size=(1, 500)))
    rows = entity_polar_export(params, [0], log_scale=False)
    assert len(rows) == 500
    assert [r[1] for r in rows] == list(range(500))


def test_polar_export_log_scale_floor():
    params = make_params(ent_mod=[[0.0, 1e-12]])
    rows = entity_polar_export(params, [0], log_scale=True)
    assert rows[0][2] == pytest.approx(8.0)
    assert rows[1][2] == pytest.approx(8.0)


def test_polar_export_bad_entity():
    params = make_params()
    with pytest.raises(DataError):
        entity_polar_export(params, [5], log_scale=False)


def test_polar_export_log_scale_strictly_decreasing_in_modulus():
    mods = np.array([[1e-7, 1e-3, 0.01, 0.2, 0.9, 1.5, 40.0]])
    params = make_params(ent_mod=mods)
    rows = entity_polar_export(params, [0], log_scale=True)
    radii = [r[2] for r in rows]
    assert all(a > b for a, b in zip(radii, radii[1:]))


# ---------------------------------------------------------------------------
# sign agreement
# ---------------------------------------------------------------------------

def test_sign_counts_identical_and_negated():
    ent = np.array([[0.5, -0.25, 1.0],
                    [0.5, -0.25, 1.0],
                    [-0.5, 0.25, -1.0]])
    params = make_params(ent_mod=ent)
    rows = sign_agreement_counts(params, [(0, 1), (0, 2)], ["linked", "unlinked"])
    assert rows == [(0, "linked", 0), (1, "unlinked", 3)]


def test_sign_counts_symmetric_in_pair_order():
    rng = np.random.default_rng(7)
    params = make_params(ent_mod=rng.normal(size=(10, 8)))
    fwd = sign_agreement_counts(params, [(2, 9), (4, 1)], ["a", "b"])
    rev = sign_agreement_counts(params, [(9, 2), (1, 4)], ["a", "b"])
    assert [r[2] for r in fwd] == [r[2] for r in rev]


def test_sign_counts_partial_disagreement():
    params = make_params(ent_mod=[[1.0, -1.0, 1.0, -1.0],
                                  [1.0, 1.0, -1.0, -1.0]])
    rows = sign_agreement_counts(params, [(0, 1)], ["linked"])
    assert rows[0][2] == 2


def _pair_bundle():
    raw = [RawTriple("a", "r", "b"), RawTriple("b", "r", "c"),
           RawTriple("c", "r", "d"), RawTriple("a", "r", "c"),
           RawTriple("e", "r", "f")]
    return build_bundle(raw, [RawTriple("a", "r", "d")], [RawTriple("b", "r", "d")])


def test_linked_unlinked_pair_sampling():
    bundle = _pair_bundle()
    rng = np.random.default_rng(0)
    linked, unlinked = linked_unlinked_pairs(bundle, rng)
    assert linked == [(0, 1), (0, 2), (1, 2), (2, 3), (4, 5)]
    assert len(unlinked) == len(linked)
    connected = {(h, t) for (h, _, t) in bundle.filter}
    for a, b in unlinked:
        assert a != b
        assert (a, b) not in connected
        assert (b, a) not in connected


def test_linked_unlinked_max_pairs_and_determinism():
    bundle = _pair_bundle()
    l1, u1 = linked_unlinked_pairs(bundle, np.random.default_rng(3), max_pairs=2)
    l2, u2 = linked_unlinked_pairs(bundle, np.random.default_rng(3), max_pairs=2)
    assert len(l1) == len(u1) == 2
    assert (l1, u1) == (l2, u2)
    assert set(l1) <= {(0, 1), (0, 2), (1, 2), (2, 3), (4, 5)}


def test_linked_pairs_require_distinct_endpoints():
    raw = [RawTriple("a", "r", "a"), RawTriple("b", "r", "b")]
    bundle = build_bundle(raw, [RawTriple("a", "r", "a")], [RawTriple("b", "r", "b")])
    with pytest.raises(DataError):
        linked_unlinked_pairs(bundle, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# pattern residuals
# ---------------------------------------------------------------------------

def test_symmetry_residual_zero_on_solution():
    params = make_params(rel_mod=[[1.0, 1.0]], rel_phase=[[PI, 0.0]])
    res = pattern_residual(params, [0], "symmetry")
    np.testing.assert_allclose(res.mod_residual, [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(res.phase_residual, [0.0, 0.0], atol=1e-15)


def test_symmetry_residual_nonzero_off_solution():
    params = make_params(rel_mod=[[2.0, 1.0]], rel_phase=[[PI / 2.0, 0.0]])
    res = pattern_residual(params, [0], "symmetry")
    assert res.mod_residual[0] == pytest.approx(3.0)
    assert res.phase_residual[0] == pytest.approx(PI)
    assert res.mod_residual[1] == 0.0 and res.phase_residual[1] == 0.0


def test_inversion_residual_zero_on_solution():
    params = make_params(rel_mod=[[2.0], [0.5]],
                         rel_phase=[[PI / 2.0], [3.0 * PI / 2.0]])
    res = pattern_residual(params, [0, 1], "inversion")
    np.testing.assert_allclose(res.mod_residual, [0.0], atol=1e-15)
    np.testing.assert_allclose(res.phase_residual, [0.0], atol=1e-12)


def test_composition_residual_zero_on_solution():
    params = make_params(rel_mod=[[6.0], [2.0], [3.0]],
                         rel_phase=[[PI / 2.0], [PI / 3.0], [PI / 6.0]])
    res = pattern_residual(params, [0, 1, 2], "composition")
    np.testing.assert_allclose(res.mod_residual, [0.0], atol=1e-15)
    np.testing.assert_allclose(res.phase_residual, [0.0], atol=1e-12)


def test_composition_residual_off_solution():
    params = make_params(rel_mod=[[5.0], [2.0], [3.0]],
                         rel_phase=[[0.0], [PI], [0.0]])
    res = pattern_residual(params, [0, 1, 2], "composition")
    assert res.mod_residual[0] == pytest.approx(1.0)
    assert res.phase_residual[0] == pytest.approx(PI)


def test_pattern_residual_wrong_arity():
    params = make_params(rel_mod=np.ones((3, 2)))
    with pytest.raises(UsageError):
        pattern_residual(params, [0, 1], "symmetry")
    with pytest.raises(UsageError):
        pattern_residual(params, [0], "inversion")
    with pytest.raises(UsageError):
        pattern_residual(params, [0, 1], "composition")
    with pytest.raises(UsageError):
        pattern_residual(params, [0], "reflexivity")


def test_pattern_residual_bad_relation_id():
    params = make_params(rel_mod=np.ones((2, 2)))
    with pytest.raises(DataError):
        pattern_residual(params, [0, 5], "inversion")


def test_pattern_residual_uses_effective_modulus():
    # raw -1 has effective modulus 1, so it sits on the symmetry manifold
    params = make_params(rel_mod=[[-1.0, -1.0]], rel_phase=[[0.0, 2.0 * PI]])
    res = pattern_residual(params, [0], "symmetry")
    np.testing.assert_allclose(res.mod_residual, [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(res.phase_residual, [0.0, 0.0], atol=1e-12)


@given(st.lists(st.floats(min_value=-50.0, max_value=50.0), min_size=2, max_size=2))
@settings(max_examples=50, deadline=None)
def test_phase_residual_range(phases):
    params = make_params(rel_mod=[[1.0, 1.0]], rel_phase=[phases])
    res = pattern_residual(params, [0], "symmetry")
    assert np.all(res.phase_residual >= 0.0)
    assert np.all(res.phase_residual <= PI + 1e-12)


# ---------------------------------------------------------------------------
# CSV writers
# ---------------------------------------------------------------------------

def test_histogram_csv_schema():
    hist = Histogram(bin_edges=np.array([0.0, 0.5, 1.0]), counts=np.array([3, 4]))
    text = histogram_csv(hist)
    lines = text.splitlines()
    assert lines[0] == "bin_lo,bin_hi,count"
    assert lines[1] == "0.0,0.5,3"
    assert lines[2] == "0.5,1.0,4"
    assert text.endswith("\n")


def test_polar_csv_schema():
    text = polar_csv([(0, 0, 1.0, 0.5), (0, 1, 0.25, 3.0)])
    lines = text.splitlines()
    assert lines[0] == "entity,dim,radius,angle"
    assert lines[1] == "0,0,1.0,0.5"
    assert lines[2] == "0,1,0.25,3.0"


def test_signs_csv_schema():
    text = signs_csv([(0, "linked", 2), (1, "unlinked", 7)])
    lines = text.splitlines()
    assert lines[0] == "pair_id,label,diff_signs"
    assert lines[1] == "0,linked,2"
    assert lines[2] == "1,unlinked,7"


def test_pattern_csv_schema():
    res = pattern_residual(make_params(rel_mod=[[1.0, 2.0]], rel_phase=[[0.0, PI]]),
                           [0], "symmetry")
    lines = pattern_csv(res).splitlines()
    assert lines[0] == "pattern,dim,mod_residual,phase_residual"
    assert lines[1] == "symmetry,0,0.0,0.0"
    assert lines[2].startswith("symmetry,1,3.0,")


def test_csv_floats_round_trip():
    # repr keeps full precision so the CSV is lossless for doubles
    value = 0.1 + 0.2
    text = polar_csv([(0, 0, value, value)])
    parsed = float(text.splitlines()[1].split(",")[2])
    assert parsed == value
