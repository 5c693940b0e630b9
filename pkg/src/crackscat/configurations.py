"""Crack configurations used by the demos, tests and shipped configs."""

from __future__ import annotations

from .geometry import ChebCrack, CrackSet, TrigCrack


def three_cracks() -> CrackSet:
    """Three separated trigonometric cracks (bottom right, bottom left, top)."""
    return CrackSet([
        TrigCrack(1.0, 0.5, [("cos", 1, 0.5), ("sin", 1, 0.2), ("cos", 3, -0.1)]),
        TrigCrack(-1.0, 0.5, [("sin", 1, -0.4), ("cos", 3, 0.1)], ay0=-1.0),
        TrigCrack(0.0, 1.0, [("cos", 1, 0.3), ("sin", 1, 0.2)], ay0=3.0),
    ])


def three_cracks_initial() -> CrackSet:
    """Flat, horizontally shifted starting segments for :func:`three_cracks`."""
    return CrackSet([
        ChebCrack(1.5, 0.5, (0.0,)),
        ChebCrack(-1.5, 0.5, (-1.0,)),
        ChebCrack(0.0, 1.0, (3.0,)),
    ])


def wavy_crack() -> CrackSet:
    """Single crack with a multi-scale profile, about three wavelengths wide at k = 9."""
    return CrackSet([
        TrigCrack(0.0, 1.0, [("cos", 2, 0.5), ("sin", 2, 0.2), ("cos", 6, -0.1), ("sin", 10, 0.1)]),
    ])


def wavy_crack_initial() -> CrackSet:
    return CrackSet([ChebCrack(0.2, 0.8, (0.0, 0.0))])
