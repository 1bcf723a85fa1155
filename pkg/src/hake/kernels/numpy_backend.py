"""Vectorized numpy implementation of the kernel surface.

All functions take the five parameter tables positionally so the compiled
backend can share the exact signature. Tables are float64 C-contiguous,
ids are int64. Relation modulus is sign-free (|raw|) except under the
"mode" variant, which uses the raw signed values; the bias is clamped
into (0,1) at use with zero gradient outside the open interval.
"""

import numpy as np

from .._common import (
    BIAS_EPS,
    VARIANT_FULL,
    VARIANT_MODE,
    VARIANT_MODULUS_ONLY,
    VARIANT_PHASE_ONLY,
)

_MOD_VARIANTS = (VARIANT_FULL, VARIANT_MODULUS_ONLY, VARIANT_MODE)
_PHASE_VARIANTS = (VARIANT_FULL, VARIANT_PHASE_ONLY)


def triple_distances(ent_mod, ent_phase, rel_mod, rel_bias, rel_phase,
                     h, r, t, variant, bias_on):
    """Modulus and phase distances for N triples; inactive part stays 0."""
    n = h.shape[0]
    d_mod = np.zeros(n)
    d_phase = np.zeros(n)
    if variant in _MOD_VARIANTS:
        hm = ent_mod[h]
        tm = ent_mod[t]
        if variant == VARIANT_MODE:
            u = hm * rel_mod[r] - tm
        elif bias_on:
            rr = np.abs(rel_mod[r])
            bb = np.clip(rel_bias[r], BIAS_EPS, 1.0 - BIAS_EPS)
            u = hm * (rr + bb) + tm * (bb - 1.0)
        else:
            u = hm * np.abs(rel_mod[r]) - tm
        d_mod = np.sqrt(np.einsum("ij,ij->i", u, u))
    if variant in _PHASE_VARIANTS:
        delta = (ent_phase[h] + rel_phase[r] - ent_phase[t]) / 2.0
        d_phase = np.abs(np.sin(delta)).sum(axis=1)
    return d_mod, d_phase


def candidate_scores(ent_mod, ent_phase, rel_mod, rel_bias, rel_phase,
                     h, r, t, replace_tail, variant, bias_on, lam1, lam2):
    """Scores of one query against every entity in the replaced slot."""
    n_ent = ent_mod.shape[0]
    d_mod = 0.0
    d_phase = 0.0
    if variant in _MOD_VARIANTS:
        if variant == VARIANT_MODE:
            rr = rel_mod[r]
            if replace_tail:
                u = (ent_mod[h] * rr)[None, :] - ent_mod
            else:
                u = ent_mod * rr[None, :] - ent_mod[t][None, :]
        else:
            rr = np.abs(rel_mod[r])
            if bias_on:
                bb = np.clip(rel_bias[r], BIAS_EPS, 1.0 - BIAS_EPS)
                if replace_tail:
                    u = (ent_mod[h] * (rr + bb))[None, :] + ent_mod * (bb - 1.0)[None, :]
                else:
                    u = ent_mod * (rr + bb)[None, :] + (ent_mod[t] * (bb - 1.0))[None, :]
            else:
                if replace_tail:
                    u = (ent_mod[h] * rr)[None, :] - ent_mod
                else:
                    u = ent_mod * rr[None, :] - ent_mod[t][None, :]
        d_mod = np.sqrt(np.einsum("ij,ij->i", u, u))
    if variant in _PHASE_VARIANTS:
        if replace_tail:
            delta = ((ent_phase[h] + rel_phase[r])[None, :] - ent_phase) / 2.0
        else:
            delta = (ent_phase + (rel_phase[r] - ent_phase[t])[None, :]) / 2.0
        d_phase = np.abs(np.sin(delta)).sum(axis=1)
    del n_ent  # every variant fills at least one distance with an (E,) array
    return -(lam1 * d_mod + lam2 * d_phase)


def triple_grad_rows(ent_mod, ent_phase, rel_mod, rel_bias, rel_phase,
                     h, r, t, coeff, lam1, lam2, variant, bias_on):
    """Per-triple gradient rows of sum_n coeff[n]*(lam1*d_mod + lam2*d_phase).

    Returns (gh_mod, gh_phase, gt_mod, gt_phase, gr_mod, gr_bias, gr_phase),
    each (N,k). Contributions for h and t are kept separate even when
    h == t; the caller's scatter-add combines them. Subgradients at the
    non-smooth points (d=0, raw=0, sin=0, clamped bias) are all taken as 0.
    """
    n = h.shape[0]
    k = ent_mod.shape[1]
    zeros = lambda: np.zeros((n, k))
    gh_mod = zeros()
    gh_phase = zeros()
    gt_mod = zeros()
    gt_phase = zeros()
    gr_mod = zeros()
    gr_bias = zeros()
    gr_phase = zeros()

    if variant in _MOD_VARIANTS and lam1 != 0.0:
        hm = ent_mod[h]
        tm = ent_mod[t]
        raw = rel_mod[r]
        if variant == VARIANT_MODE:
            u = hm * raw - tm
        elif bias_on:
            rr = np.abs(raw)
            braw = rel_bias[r]
            bb = np.clip(braw, BIAS_EPS, 1.0 - BIAS_EPS)
            u = hm * (rr + bb) + tm * (bb - 1.0)
        else:
            rr = np.abs(raw)
            u = hm * rr - tm
        d = np.sqrt(np.einsum("ij,ij->i", u, u))
        cv = np.zeros((n, 1))
        np.divide(coeff * lam1, d, out=cv[:, 0], where=d > 0.0)
        v = cv * u
        if variant == VARIANT_MODE:
            gh_mod = v * raw
            gt_mod = -v
            gr_mod = v * hm
        elif bias_on:
            gh_mod = v * (rr + bb)
            gt_mod = v * (bb - 1.0)
            gr_mod = v * hm * np.sign(raw)
            live = (braw > BIAS_EPS) & (braw < 1.0 - BIAS_EPS)
            gr_bias = v * (hm + tm) * live
        else:
            gh_mod = v * rr
            gt_mod = -v
            gr_mod = v * hm * np.sign(raw)

    if variant in _PHASE_VARIANTS and lam2 != 0.0:
        delta = (ent_phase[h] + rel_phase[r] - ent_phase[t]) / 2.0
        gp = (coeff * lam2)[:, None] * 0.5 * np.sign(np.sin(delta)) * np.cos(delta)
        gh_phase = gp
        gr_phase = gp.copy()
        gt_phase = -gp

    return gh_mod, gh_phase, gt_mod, gt_phase, gr_mod, gr_bias, gr_phase


def scatter_add_rows(out, idx, contrib):
    """out[idx[n]] += contrib[n], accumulating over repeated ids."""
    np.add.at(out, idx, contrib)
