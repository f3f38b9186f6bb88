"""Deterministic combinatorial kernels.

Probabilists' Hermite polynomials, the exact Hermite-basis expansion of
monomials, the midpoint (second-order-centered) odd-order Taylor coefficient
table, and a small catalog of smooth two-variable test functions carrying
oracles for all partial derivatives up to total order three.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

MAX_TABLE_ORDER = 13


def hermite_eval(q: int, x):
    """H_q(x), probabilists' convention: H_{q+1} = x H_q - q H_{q-1}."""
    if q < 0:
        raise ValueError(f"Hermite index must be >= 0, got {q}")
    x = np.asarray(x, dtype=np.float64)
    prev = np.ones_like(x)
    if q == 0:
        return prev if x.ndim else float(prev)
    cur = x.copy()
    for k in range(1, q):
        prev, cur = cur, x * cur - k * prev
    return cur if x.ndim else float(cur)


@dataclass(frozen=True)
class HermiteExpansion:
    """Exact coefficients of x^p in the Hermite basis."""

    power: int
    coefficients: dict[int, Fraction]

    def evaluate(self, x) -> np.ndarray:
        """Reconstruct x^p through the expansion (floating point)."""
        x = np.asarray(x, dtype=np.float64)
        total = np.zeros_like(x)
        for q, c in self.coefficients.items():
            total += float(c) * hermite_eval(q, x)
        return total


@functools.lru_cache(maxsize=64)
def hermite_expand(p: int) -> HermiteExpansion:
    """x^p = sum_q coeff_q H_q(x), exact rationals, q of the same parity as p."""
    if p < 1:
        raise ValueError(f"power must be >= 1, got {p}")
    coeffs: dict[int, Fraction] = {0: Fraction(1)}
    for _ in range(p):
        nxt: dict[int, Fraction] = {}
        for q, c in coeffs.items():
            # x * H_q = H_{q+1} + q H_{q-1}
            nxt[q + 1] = nxt.get(q + 1, Fraction(0)) + c
            if q >= 1:
                nxt[q - 1] = nxt.get(q - 1, Fraction(0)) + q * c
        coeffs = nxt
    return HermiteExpansion(power=p, coefficients={q: c for q, c in coeffs.items() if c})


@dataclass(frozen=True)
class MidpointTaylorTable:
    """Coefficients C(a1, a2) of the midpoint difference expansion.

    f(b,d) - f(a,c) = sum C(a1,a2) d^{a1,a2}f(midpoint) (b-a)^{a1} (d-c)^{a2},
    exact for polynomials up to ``max_order``; even-total coefficients vanish.
    """

    max_order: int
    entries: dict[tuple[int, int], Fraction]

    def coefficient(self, a1: int, a2: int) -> Fraction:
        return self.entries[(a1, a2)]


def _monomial_partial(a1: int, a2: int, b1: int, b2: int, x: Fraction, y: Fraction) -> Fraction:
    """d^{b1,b2} (x^a1 y^a2) evaluated at exact rational (x, y)."""
    if b1 > a1 or b2 > a2:
        return Fraction(0)
    c = Fraction(math.factorial(a1), math.factorial(a1 - b1))
    c *= Fraction(math.factorial(a2), math.factorial(a2 - b2))
    return c * x ** (a1 - b1) * y ** (a2 - b2)


@functools.lru_cache(maxsize=4)
def midpoint_taylor_table(max_order: int) -> MidpointTaylorTable:
    """Solve for the C(a1,a2) in exact arithmetic, order by order.

    Plugging f = x^{a1} y^{a2} of total order k into the expansion leaves a
    single unknown once all lower-order coefficients are known, because the
    only order-k partial derivative surviving on a monomial is its own.
    """
    if not 1 <= max_order <= MAX_TABLE_ORDER:
        raise ValueError(f"max_order must be in [1, {MAX_TABLE_ORDER}], got {max_order}")
    a, b = Fraction(0), Fraction(1)
    c, d = Fraction(0), Fraction(3)
    mx, my = (a + b) / 2, (c + d) / 2
    entries: dict[tuple[int, int], Fraction] = {}
    for k in range(1, max_order + 1):
        for a1 in range(k + 1):
            a2 = k - a1
            lhs = b**a1 * d**a2 - a**a1 * c**a2
            for (b1, b2), coeff in entries.items():
                lhs -= (
                    coeff
                    * _monomial_partial(a1, a2, b1, b2, mx, my)
                    * (b - a) ** b1
                    * (d - c) ** b2
                )
            denom = (
                Fraction(math.factorial(a1) * math.factorial(a2))
                * (b - a) ** a1
                * (d - c) ** a2
            )
            entries[(a1, a2)] = lhs / denom
    return MidpointTaylorTable(max_order=max_order, entries=entries)


@dataclass(frozen=True)
class TestFunction2D:
    """Smooth f(x, y) together with all partials up to total order 3."""

    name: str
    bounded: bool
    _partials: dict[tuple[int, int], Callable]

    def __call__(self, x, y):
        return self._partials[(0, 0)](x, y)

    def partial(self, a1: int, a2: int) -> Callable:
        try:
            return self._partials[(a1, a2)]
        except KeyError:
            raise ValueError(
                f"test function {self.name!r} carries partials up to total order 3, "
                f"requested ({a1},{a2})"
            ) from None


def _sympy_function(name: str, expr_str: str, bounded: bool) -> TestFunction2D:
    import sympy as sp

    x, y = sp.symbols("x y")
    expr = sp.sympify(expr_str, locals={"x": x, "y": y})
    partials = {}
    for a1 in range(4):
        for a2 in range(4 - a1):
            der = sp.diff(expr, x, a1, y, a2)
            partials[(a1, a2)] = sp.lambdify((x, y), der, modules="numpy")
    return TestFunction2D(name=name, bounded=bounded, _partials=partials)


def _bump_function() -> TestFunction2D:
    """Compactly supported bump exp(-1/(1 - r^2/4)) on r < 2, zero outside."""
    import sympy as sp

    x, y = sp.symbols("x y")
    inner = sp.exp(-1 / (1 - (x**2 + y**2) / 4))
    partials = {}
    for a1 in range(4):
        for a2 in range(4 - a1):
            der = sp.lambdify((x, y), sp.diff(inner, x, a1, y, a2), modules="numpy")

            def deriv(xv, yv, der=der):
                xb, yb = np.broadcast_arrays(
                    np.asarray(xv, dtype=np.float64), np.asarray(yv, dtype=np.float64)
                )
                out = np.zeros(xb.shape)
                mask = xb**2 + yb**2 < 4.0 - 1e-12
                if mask.any():
                    out[mask] = der(xb[mask], yb[mask])
                return out if out.ndim else float(out)

            partials[(a1, a2)] = deriv
    return TestFunction2D(name="bump", bounded=True, _partials=partials)


def _monomial_function(a: int, b: int) -> TestFunction2D:
    name = _monomial_name(a, b)

    def make(a1: int, a2: int) -> Callable:
        if a1 > a or a2 > b:
            return lambda x, y: np.zeros(np.broadcast(x, y).shape)
        coef = float(
            math.factorial(a) // math.factorial(a - a1)
            * (math.factorial(b) // math.factorial(b - a2))
        )
        pa, pb = a - a1, b - a2

        def deriv(x, y, coef=coef, pa=pa, pb=pb):
            x = np.asarray(x, dtype=np.float64)
            y = np.asarray(y, dtype=np.float64)
            return coef * x**pa * y**pb

        return deriv

    partials = {(a1, a2): make(a1, a2) for a1 in range(4) for a2 in range(4 - a1)}
    return TestFunction2D(name=name, bounded=(a == 0 and b == 0), _partials=partials)


def _monomial_name(a: int, b: int) -> str:
    if a == 0 and b == 0:
        return "1"
    parts = []
    if a:
        parts.append("x" if a == 1 else f"x^{a}")
    if b:
        parts.append("y" if b == 1 else f"y^{b}")
    return "*".join(parts)


@functools.lru_cache(maxsize=1)
def _catalog() -> dict[str, TestFunction2D]:
    cat: dict[str, TestFunction2D] = {}
    for a in range(6):
        for b in range(6 - a):
            fn = _monomial_function(a, b)
            cat[fn.name] = fn
    cat["sin_x_cos_y"] = _sympy_function("sin_x_cos_y", "sin(x)*cos(y)", bounded=True)
    cat["bump"] = _bump_function()
    return cat


def test_function_names() -> list[str]:
    return sorted(_catalog())


def get_test_function(name: str) -> TestFunction2D:
    try:
        return _catalog()[name]
    except KeyError:
        raise ValueError(
            f"unknown test function {name!r}; available: {', '.join(test_function_names())}"
        ) from None
