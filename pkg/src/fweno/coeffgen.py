"""Exact coefficient tables for WENO reconstruction at the right cell edge.

Everything is derived with :class:`fractions.Fraction` on a unit-spaced grid
(node ``j`` sits at ``x = j``, the reconstruction point is ``x = 1/2``) and
lowered to float64 exactly once.  Tables are cached per ``(r, mode)`` and are
immutable afterwards.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb

import numpy as np

R_MIN, R_MAX = 2, 8

Poly = list  # coefficient list, index = power


class CoefficientError(ValueError):
    """Raised when a generated table violates one of its exactness checks."""


class DiscretizationMode(enum.Enum):
    POINT_VALUE = "point"
    CELL_AVERAGE = "average"

    @classmethod
    def parse(cls, value: str | DiscretizationMode) -> DiscretizationMode:
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "_")
        aliases = {"point": cls.POINT_VALUE, "point_value": cls.POINT_VALUE, "pointvalue": cls.POINT_VALUE,
                   "average": cls.CELL_AVERAGE, "cell_average": cls.CELL_AVERAGE, "cellaverage": cls.CELL_AVERAGE}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown discretization mode {value!r}") from None


# {{{ polynomial helpers


def _pmul(a: Poly, b: Poly) -> Poly:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _padd(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _pscale(a: Poly, s: Fraction) -> Poly:
    return [s * x for x in a]


def _pderiv(a: Poly) -> Poly:
    if len(a) <= 1:
        return [Fraction(0)]
    return [k * a[k] for k in range(1, len(a))]


def _peval(a: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for coef in reversed(a):
        acc = acc * x + coef
    return acc


def _pintegral(a: Poly, lo: Fraction, hi: Fraction) -> Fraction:
    prim = [Fraction(0)] + [a[k] / (k + 1) for k in range(len(a))]
    return _peval(prim, hi) - _peval(prim, lo)


def _lagrange_basis(nodes: list[Fraction]) -> list[Poly]:
    basis = []
    for k, xk in enumerate(nodes):
        poly: Poly = [Fraction(1)]
        for l, xl in enumerate(nodes):
            if l != k:
                poly = _pmul(poly, [-xl / (xk - xl), 1 / (xk - xl)])
        basis.append(poly)
    return basis


# }}}


def data_basis(nodes: list[int], mode: DiscretizationMode) -> list[Poly]:
    """Polynomials ``phi_j`` with ``p(x) = sum_j f_j phi_j(x)`` for data on ``nodes``.

    Point values use Lagrange interpolation.  Cell averages go through the
    primitive function: it is interpolated at the cell edges from cumulative
    sums of the averages and differentiated.
    """
    mode = DiscretizationMode.parse(mode)
    if mode is DiscretizationMode.POINT_VALUE:
        return _lagrange_basis([Fraction(n) for n in nodes])

    edges = [Fraction(2 * n - 1, 2) for n in nodes] + [Fraction(2 * nodes[-1] + 1, 2)]
    lam = [_pderiv(p) for p in _lagrange_basis(edges)]
    basis = []
    for j in range(len(nodes)):
        # f_j enters the primitive at every edge to its right
        acc: Poly = [Fraction(0)]
        for k in range(j + 1, len(edges)):
            acc = _padd(acc, lam[k])
        basis.append(acc)
    return basis


def substencil_nodes(r: int, i: int) -> list[int]:
    return list(range(-r + 1 + i, i + 1))


def js_quadratic_form(r: int, i: int, mode: DiscretizationMode) -> tuple[tuple[Fraction, ...], ...]:
    """Matrix of the Jiang-Shu indicator of substencil ``i`` as a quadratic form.

    ``A[a][b] = sum_k int_{-1/2}^{1/2} phi_a^(k) phi_b^(k) dx`` for
    ``k = 1..r-1``; on a unit grid the ``h^(2k-1)`` weights cancel the
    ``h^(-2k)`` of the derivatives, so the form does not depend on ``h``.
    """
    _check_r(r)
    if not 0 <= i < r:
        raise ValueError(f"substencil index {i} outside [0, {r - 1}]")
    basis = data_basis(substencil_nodes(r, i), mode)
    lo, hi = Fraction(-1, 2), Fraction(1, 2)
    derivs = []
    for phi in basis:
        ds, cur = [], phi
        for _ in range(r - 1):
            cur = _pderiv(cur)
            ds.append(cur)
        derivs.append(ds)

    mat = [[Fraction(0)] * r for _ in range(r)]
    for a in range(r):
        for b in range(a, r):
            val = sum((_pintegral(_pmul(derivs[a][k], derivs[b][k]), lo, hi) for k in range(r - 1)), Fraction(0))
            mat[a][b] = mat[b][a] = val
    return tuple(tuple(row) for row in mat)


@dataclass(frozen=True)
class SumOfSquares:
    """Pivoted LDL^T factors of a rank-deficient PSD quadratic form.

    ``x^T A x = sum_j beta[j] * (sum_{k >= j} gamma[j][k] * x[perm[k]])**2``
    with ``gamma[j][j] == 1``.
    """

    perm: tuple[int, ...]
    beta: tuple[Fraction, ...]
    gamma: tuple[tuple[Fraction, ...], ...]

    def evaluate(self, x) -> Fraction:
        y = [x[p] for p in self.perm]
        total = Fraction(0)
        for j, bj in enumerate(self.beta):
            lin = sum((self.gamma[j][k] * y[k] for k in range(j, len(y))), Fraction(0))
            total += bj * lin * lin
        return total

    def reassemble(self) -> tuple[tuple[Fraction, ...], ...]:
        """Rebuild ``A`` from the factors."""
        n = len(self.perm)
        mat = [[Fraction(0)] * n for _ in range(n)]
        for j, bj in enumerate(self.beta):
            row = self.gamma[j]
            for a in range(j, n):
                for b in range(j, n):
                    mat[self.perm[a]][self.perm[b]] += bj * row[a] * row[b]
        return tuple(tuple(r) for r in mat)


def ldl_sum_of_squares(A) -> SumOfSquares:
    """Factor a symmetric PSD rational matrix of rank ``n - 1`` into squares.

    Symmetric pivoting picks the largest remaining diagonal entry at each step
    (first index on ties).  The last pivot must come out exactly zero.
    """
    n = len(A)
    M = [[Fraction(x) for x in row] for row in A]
    for a in range(n):
        for b in range(a):
            if M[a][b] != M[b][a]:
                raise CoefficientError("matrix is not symmetric")
    perm = list(range(n))
    L = [[Fraction(int(a == b)) for b in range(n)] for a in range(n)]
    pivots: list[Fraction] = []

    for k in range(n):
        p = max(range(k, n), key=lambda j: (M[j][j], -j))
        if p != k:
            M[k], M[p] = M[p], M[k]
            for row in M:
                row[k], row[p] = row[p], row[k]
            perm[k], perm[p] = perm[p], perm[k]
            for col in range(k):
                L[k][col], L[p][col] = L[p][col], L[k][col]
        piv = M[k][k]
        if piv < 0:
            raise CoefficientError(f"negative pivot {piv} at step {k}")
        if piv == 0:
            if any(M[a][b] != 0 for a in range(k, n) for b in range(k, n)):
                raise CoefficientError("matrix is not positive semi-definite")
            pivots.extend([Fraction(0)] * (n - k))
            break
        pivots.append(piv)
        for a in range(k + 1, n):
            L[a][k] = M[a][k] / piv
        for a in range(k + 1, n):
            for b in range(k + 1, n):
                M[a][b] -= L[a][k] * M[k][b]
        for a in range(k + 1, n):
            M[a][k] = M[k][a] = Fraction(0)

    zeros = sum(1 for v in pivots if v == 0)
    if zeros != 1 or pivots[-1] != 0:
        raise CoefficientError(f"expected rank {n - 1}, got {n - zeros}")

    gamma = tuple(
        tuple(L[k][j] if k >= j else Fraction(0) for k in range(n)) for j in range(n - 1)
    )
    return SumOfSquares(perm=tuple(perm), beta=tuple(pivots[:-1]), gamma=gamma)


def _check_r(r: int) -> None:
    if not isinstance(r, (int, np.integer)) or not R_MIN <= r <= R_MAX:
        raise ValueError(f"r must be an integer in [{R_MIN}, {R_MAX}], got {r!r}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ReconstructionTable:
    r: int
    mode: DiscretizationMode
    exact_substencil: tuple[tuple[Fraction, ...], ...]
    exact_ideal: tuple[Fraction, ...]
    exact_ud: tuple[Fraction, ...]
    exact_full: tuple[Fraction, ...]
    js_forms: tuple[tuple[tuple[Fraction, ...], ...], ...]
    js_sos: tuple[SumOfSquares, ...]

    # float64 views, one rounding per entry

    @cached_property
    def substencil_coeffs(self) -> np.ndarray:
        return _readonly(np.array([[float(x) for x in row] for row in self.exact_substencil]))

    @cached_property
    def ideal_weights(self) -> np.ndarray:
        return _readonly(np.array([float(x) for x in self.exact_ideal]))

    @cached_property
    def ud_coeffs(self) -> np.ndarray:
        return _readonly(np.array([float(x) for x in self.exact_ud]))

    @cached_property
    def js_perm(self) -> np.ndarray:
        return _readonly(np.array([s.perm for s in self.js_sos], dtype=np.int64))

    @cached_property
    def js_beta(self) -> np.ndarray:
        return _readonly(np.array([[float(b) for b in s.beta] for s in self.js_sos]))

    @cached_property
    def js_gamma(self) -> np.ndarray:
        return _readonly(np.array([[[float(g) for g in row] for row in s.gamma] for s in self.js_sos]))

    @cached_property
    def lists(self) -> dict:
        """Plain-float copies for the scalar reference kernels."""
        return {
            "d": self.substencil_coeffs.tolist(),
            "c": self.ideal_weights.tolist(),
            "b": self.ud_coeffs.tolist(),
            "perm": self.js_perm.tolist(),
            "beta": self.js_beta.tolist(),
            "gamma": self.js_gamma.tolist(),
        }

    def dump(self) -> str:
        """Plain-text dump: rationals as ``p/q``, floats as shortest repr."""
        lines = [f"r {self.r}", f"mode {self.mode.value}"]

        def fmt(xs):
            return " ".join(str(x) for x in xs)

        for i, row in enumerate(self.exact_substencil):
            lines.append(f"substencil[{i}] rational {fmt(row)}")
            lines.append(f"substencil[{i}] float {fmt(repr(float(x)) for x in row)}")
        lines.append(f"ideal rational {fmt(self.exact_ideal)}")
        lines.append(f"ideal float {fmt(repr(float(x)) for x in self.exact_ideal)}")
        lines.append(f"undivided rational {fmt(self.exact_ud)}")
        for i, sos in enumerate(self.js_sos):
            lines.append(f"js[{i}] perm {fmt(sos.perm)}")
            lines.append(f"js[{i}] beta {fmt(sos.beta)}")
            for j, row in enumerate(sos.gamma):
                lines.append(f"js[{i}] gamma[{j}] {fmt(row)}")
        return "\n".join(lines) + "\n"


def _ideal_weights(sub: list[list[Fraction]], full: list[Fraction], r: int) -> list[Fraction]:
    # position j of the full stencil is touched by substencils 0..j (j < r),
    # which makes the system lower triangular in the first r positions
    c: list[Fraction] = []
    for j in range(r):
        acc = full[j] - sum((c[i] * sub[i][j - i] for i in range(j)), Fraction(0))
        if sub[j][0] == 0:
            raise CoefficientError(f"singular ideal-weight system at position {j}")
        c.append(acc / sub[j][0])
    for j in range(2 * r - 1):
        combined = sum((c[i] * sub[i][j - i] for i in range(r) if 0 <= j - i < r), Fraction(0))
        if combined != full[j]:
            raise CoefficientError(f"ideal weights do not reproduce the full stencil at {j}")
    if any(x <= 0 for x in c) or sum(c) != 1:
        raise CoefficientError(f"ideal weights not a convex combination: {c}")
    return c


def generate_table(r: int, mode: DiscretizationMode | str = DiscretizationMode.CELL_AVERAGE) -> ReconstructionTable:
    """All coefficients for order ``2r - 1``; one shared immutable table per (r, mode)."""
    _check_r(r)
    return _generate(int(r), DiscretizationMode.parse(mode))


@lru_cache(maxsize=None)
def _generate(r: int, mode: DiscretizationMode) -> ReconstructionTable:
    half = Fraction(1, 2)

    sub = []
    for i in range(r):
        basis = data_basis(substencil_nodes(r, i), mode)
        sub.append([_peval(phi, half) for phi in basis])
    full = [_peval(phi, half) for phi in data_basis(list(range(-r + 1, r)), mode)]
    for i, row in enumerate(sub):
        if sum(row) != 1:
            raise CoefficientError(f"substencil {i} does not reproduce constants")

    ideal = _ideal_weights(sub, full, r)
    ud = [Fraction((-1) ** k * comb(2 * r - 2, k)) for k in range(2 * r - 1)]

    forms, factors = [], []
    for i in range(r):
        A = js_quadratic_form(r, i, mode)
        sos = ldl_sum_of_squares(A)
        if sos.reassemble() != A:
            raise CoefficientError(f"sum-of-squares reassembly mismatch for substencil {i}")
        forms.append(A)
        factors.append(sos)

    return ReconstructionTable(
        r=r,
        mode=mode,
        exact_substencil=tuple(tuple(row) for row in sub),
        exact_ideal=tuple(ideal),
        exact_ud=tuple(ud),
        exact_full=tuple(full),
        js_forms=tuple(forms),
        js_sos=tuple(factors),
    )
