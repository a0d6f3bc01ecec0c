"""Reference term lists and closed forms, transcribed verbatim for regression checks.

Operator sums use the compact notation of :func:`qwm.opalgebra.parse_sum`:
``a``, ``A`` = a†, ``b``, ``B`` = b†, ``1`` the identity.  All lists refer to
the alternating pattern starting with an ω₋ pulse.  Closed forms take
``(theta_minus, theta_plus)``.

Known transcription issues (kept as printed, see the README):

* the left-reduced N=5 list carries ``+A`` where the construction yields
  ``+bAbA``;
* the printed N=4 closed forms equal the algebra times ``sec²(θ₊/2)``
  (and ``V₁`` an extra factor 2), so they are unbounded near θ₊ = π.
"""
from __future__ import annotations

import numpy as np
from numpy import cos, sin, tan

__all__ = [
    "PRUNED",
    "RIGHT",
    "LEFT",
    "CLOSED_FORMS",
    "SINGULAR_THETA_PLUS",
    "TWO_PULSE_P3_CANDIDATES",
    "SPOT_VALUES",
]

PRUNED = {
    2: "1 - A - bA - B",
    3: "1 - aA - aB - 2A + AbA - bA - B",
    4: "1 - aA - aB - 2A + AbA - 3bA + bAbA - bB - 2B + BaA + BaB + BbA",
    5: "1 - 3aA + aAbA - 3aB + aBaA + aBaB + aBbA - 3A + AaA + AaB + 4AbA - AbAbA"
       " + AbB - 3bA + bAbA - bB - 2B + BaA + BaB + BbA",
    6: "1 - 3aA + aAbA - 3aB + aBaA + aBaB + aBbA - 3A + AaA + AaB + 4AbA - AbAbA"
       " + AbB - 6bA + bAaA + bAaB + 5bAbA - bAbAbA + bAbB - 3bB + bBaA + bBaB + bBbA"
       " - 3B + 4BaA - BaAbA + 4BaB - BaBaA - BaBaB - BaBbA + 4BbA - BbAbA + BbB",
}

RIGHT = {
    2: "-A - B",
    3: "-2A + AbA - B",
    4: "-2A + AbA - 2B + BaA + BaB + BbA",
    5: "-3A + AaA + AaB + 4AbA - AbAbA + AbB - 2B + BaA + BaB + BbA",
    6: "-3A + AaA + AaB + 4AbA - AbAbA + AbB - 3B + 4BaA - BaAbA + 4BaB - BaBaA"
       " - BaBaB - BaBbA + 4BbA - BbAbA + BbB",
}

LEFT = {
    2: "1 - aB",
    3: "1 - aA - aB - bA",
    4: "1 - aA - 3aB + aBaB - bA - bB",
    5: "1 - 3aA + aAbA - 3aB + aBaA + aBaB + aBbA - 3bA + A - bB",
    6: "1 - 3aA + aAaB + aAbA + aAbB - 6aB + aBaA + 5aBaB - aBaBaB + aBbA + aBbB"
       " - 3bA + bAaB + bAbA + bAbB - 3bB + bBaB",
}


def _s(x):
    return sin(x / 2)


def _c(x):
    return cos(x / 2)


CLOSED_FORMS = {
    3: {
        -5: lambda m, p: -_s(m) ** 3 * _s(p) ** 2 * _c(m),
        -3: lambda m, p: (2 * cos(m) + 1) * _s(m) ** 2 * _s(p) * _c(p),
        -1: lambda m, p: -(3 * cos(p) + 1) * sin(2 * m) / 8,
        1: lambda m, p: (1 - 2 * cos(m)) * _s(p) * _c(m) ** 2 * _c(p),
        3: lambda m, p: _s(m) * _s(p) ** 2 * _c(m) ** 3,
    },
    4: {
        7: lambda m, p: _s(m) ** 2 * _s(p) ** 4 * sin(m) / (cos(p) + 1),
        5: lambda m, p: -(3 * cos(m) + 2) * _s(m) ** 2 * _s(p) ** 3 / _c(p),
        3: lambda m, p: (15 * cos(m) * cos(p) + 11 * cos(m) + cos(p) + 1)
        * sin(m) * _s(p) ** 2 / (4 * (cos(p) + 1)),
        1: lambda m, p: (sin(m) ** 2 * (5 * cos(p) + 1) - cos(p) * (cos(m) + 3)) * tan(p / 2),
        -1: lambda m, p: sin(m) / (8 * (cos(p) + 1))
        * ((1 - cos(p)) ** 2 * (-15 * cos(m) - 1) + cos(m) * (20 - 36 * cos(p))),
        -3: lambda m, p: (cos(m) / 2 * (3 * cos(p) + 1) + cos(p)) * _s(m) ** 2 * tan(p / 2),
        -5: lambda m, p: -_s(m) ** 3 * _s(p) ** 2 * _c(m),
    },
}

# θ₊ values where the printed forms divide by zero
SINGULAR_THETA_PLUS = {3: (), 4: (np.pi,)}

# two competing expressions for the N=2, p=3 line (both up to a constant)
TWO_PULSE_P3_CANDIDATES = {
    "cos_theta_minus": lambda m, p: 0.5 * _s(p) ** 2 * cos(m),
    "sin_theta_minus": lambda m, p: 0.5 * sin(m) * _s(p) ** 2,
}

# (N, p, theta_minus, theta_plus) -> value
SPOT_VALUES = {
    (3, 3, np.pi / 2, np.pi / 2): 0.125,
    (3, -5, np.pi / 2, np.pi): -0.25,
}
