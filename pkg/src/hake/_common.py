"""Shared constants for the model and both kernel backends."""

# Effective relation bias is clamp(raw, BIAS_EPS, 1 - BIAS_EPS); the clamp
# has zero gradient outside the open interval.
BIAS_EPS = 1e-6

# Floor under the radius before taking -log10 in the polar export.
LOG_RADIUS_FLOOR = 1e-8

VARIANT_FULL = 0
VARIANT_MODULUS_ONLY = 1
VARIANT_PHASE_ONLY = 2
VARIANT_MODE = 3

VARIANT_CODES = {
    "full": VARIANT_FULL,
    "modulus_only": VARIANT_MODULUS_ONLY,
    "phase_only": VARIANT_PHASE_ONLY,
    "mode": VARIANT_MODE,
}

VARIANT_NAMES = {code: name for name, code in VARIANT_CODES.items()}
