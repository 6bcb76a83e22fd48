"""Named analytic germ functions with closed-form derivatives.

The registry covers the functions exercised by the worked examples:
sine waves amp*sin(w*x) + c, polynomials, pure powers x^lam, and shifted
parabolas a*(2x - s)^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Germ:
    name: str
    fn: object
    derivative: object | None = None
    hoelder: tuple[float, float] | None = None  # (A, beta) with |f'(x)-f'(y)| <= A|x-y|^beta

    def __call__(self, x):
        return self.fn(x)


def sine(amp: float = 1.0, omega: float = 1.0, offset: float = 0.0) -> Germ:
    """amp * sin(omega * x) + offset."""
    return Germ(
        f"sine(amp={amp},omega={omega},offset={offset})",
        lambda x: amp * np.sin(omega * np.asarray(x, dtype=float)) + offset,
        lambda x: amp * omega * np.cos(omega * np.asarray(x, dtype=float)),
        hoelder=(abs(amp) * omega * omega, 1.0),
    )


def polynomial(coeffs) -> Germ:
    """sum_j coeffs[j] x^j."""
    coeffs = tuple(float(c) for c in coeffs)
    dcoeffs = tuple(j * c for j, c in enumerate(coeffs))[1:]

    def fn(x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)

    def dfn(x):
        if not dcoeffs:
            return np.zeros_like(np.asarray(x, dtype=float))
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), dcoeffs)

    return Germ(f"poly({coeffs})", fn, dfn)


def power(lam: float) -> Germ:
    """x^lam for lam > 0 (derivative defined away from 0 when lam < 1)."""
    if lam <= 0:
        raise ValueError(f"exponent must be positive, got {lam}")
    return Germ(
        f"power({lam})",
        lambda x: np.asarray(x, dtype=float) ** lam,
        (lambda x: lam * np.asarray(x, dtype=float) ** (lam - 1.0)) if lam >= 1 else None,
    )


def parabola(scale: float = 1.0, shift: float = 1.0) -> Germ:
    """scale * (2x - shift)^2; covers -0.5(2x-1.1)^2 and -(2x-1)^2."""
    return Germ(
        f"parabola(scale={scale},shift={shift})",
        lambda x: scale * (2.0 * np.asarray(x, dtype=float) - shift) ** 2,
        lambda x: 4.0 * scale * (2.0 * np.asarray(x, dtype=float) - shift),
        hoelder=(8.0 * abs(scale), 1.0),
    )


def make_germ(kind: str, **params) -> Germ:
    makers = {"sine": sine, "poly": polynomial, "power": power, "parabola": parabola}
    if kind not in makers:
        raise ValueError(f"unknown germ kind {kind!r}; expected one of {sorted(makers)}")
    return makers[kind](**params)
