"""Single-window WENO kernels: indicators, weights and the final reconstruction.

These are the reference implementations.  They are written with plain
arithmetic so the same code runs on floats, on ``mpmath`` numbers, or on
:class:`Tally` values that count every addition, multiplication and division
(subtractions count as additions).  The solver uses the compiled copies in
:mod:`fweno._jit`, which are checked against these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .coeffgen import ReconstructionTable

DEFAULT_EPS = 1e-100
KINDS = ("js", "yc", "fweno")


class NonFiniteWeightsError(ArithmeticError):
    """The nonlinear weights overflowed or hit a zero denominator."""


@dataclass
class OpCounter:
    additions: int = 0
    multiplications: int = 0
    divisions: int = 0

    @property
    def total(self) -> int:
        # the cost tables total additions and multiplications only
        return self.additions + self.multiplications

    def __add__(self, other: OpCounter) -> OpCounter:
        return OpCounter(self.additions + other.additions,
                         self.multiplications + other.multiplications,
                         self.divisions + other.divisions)

    def scaled(self, n: int) -> OpCounter:
        return OpCounter(n * self.additions, n * self.multiplications, n * self.divisions)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.additions, self.multiplications, self.divisions)


class Tally:
    """A float that records arithmetic on a shared :class:`OpCounter`."""

    __slots__ = ("v", "ops")

    def __init__(self, v: float, ops: OpCounter):
        self.v = float(v)
        self.ops = ops

    @staticmethod
    def _val(o):
        return o.v if isinstance(o, Tally) else o

    def __add__(self, o):
        self.ops.additions += 1
        return Tally(self.v + self._val(o), self.ops)

    __radd__ = __add__

    def __sub__(self, o):
        self.ops.additions += 1
        return Tally(self.v - self._val(o), self.ops)

    def __rsub__(self, o):
        self.ops.additions += 1
        return Tally(self._val(o) - self.v, self.ops)

    def __mul__(self, o):
        self.ops.multiplications += 1
        return Tally(self.v * self._val(o), self.ops)

    __rmul__ = __mul__

    def __truediv__(self, o):
        self.ops.divisions += 1
        return Tally(self.v / self._val(o), self.ops)

    def __rtruediv__(self, o):
        self.ops.divisions += 1
        return Tally(self._val(o) / self.v, self.ops)

    def __lt__(self, o):
        return self.v < self._val(o)

    def __gt__(self, o):
        return self.v > self._val(o)

    def __float__(self):
        return self.v

    def __repr__(self):
        return f"Tally({self.v!r})"


@dataclass(frozen=True)
class WenoVariant:
    """Weight design and its exponents.

    ``s`` is used by JS only, ``s1``/``s2`` by YC and FWENO.  ``None`` means
    the default ``ceil(r/2)`` for the order it is used at; call
    :meth:`for_order` to fill it in.
    """

    kind: str
    s: int | None = None
    s1: int | None = None
    s2: int = 1
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in KINDS:
            raise ValueError(f"unknown WENO variant {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if not self.eps > 0:
            raise ValueError("epsilon must be positive")
        for name in ("s", "s1", "s2"):
            val = getattr(self, name)
            if val is not None and (int(val) != val or val < 1):
                raise ValueError(f"{name} must be a positive integer, got {val!r}")

    def for_order(self, r: int) -> WenoVariant:
        half = -(-r // 2)
        v = replace(self,
                    s=self.s if self.s is not None else half,
                    s1=self.s1 if self.s1 is not None else half)
        if v.kind == "js":
            if v.s < half:
                raise ValueError(f"JS exponent s={v.s} must be >= ceil(r/2)={half}")
        elif 2 * v.s1 * v.s2 < r:
            raise ValueError(f"exponents s1={v.s1}, s2={v.s2} violate s1*s2 >= r/2 for r={r}")
        return v

    @property
    def label(self) -> str:
        return {"js": "JS-WENO", "yc": "YC-WENO", "fweno": "FWENO"}[self.kind]


def _zero_like(x):
    if isinstance(x, Tally):
        return Tally(0.0, x.ops)
    return x * 0


def _clamp(x):
    # the recurrence can round a true zero to a tiny negative number
    return _zero_like(x) if x < 0 else x


def _ipow(x, n: int):
    y = x
    for _ in range(n - 1):
        y = y * x
    return y


def _wrap(values: Sequence, ops: OpCounter | None):
    if ops is None:
        return list(values)
    return [Tally(v, ops) for v in values]


def _unwrap(values):
    return [v.v if isinstance(v, Tally) else v for v in values]


def _check_window(window: Sequence, r: int | None = None) -> int:
    n = len(window)
    if n < 3 or n % 2 == 0:
        raise ValueError(f"window length must be 2r-1 with r >= 2, got {n}")
    rr = (n + 1) // 2
    if r is not None and rr != r:
        raise ValueError(f"window of length {n} does not match r={r}")
    return rr


def fast_indicators(window: Sequence, ops: OpCounter | None = None) -> list:
    """Sums of squared first differences over each substencil, via the recurrence."""
    r = _check_window(window)
    f = _wrap(window, ops)
    theta = [None]
    for j in range(1, 2 * r - 1):
        diff = f[j] - f[j - 1]
        theta.append(diff * diff)
    acc = theta[1]
    for j in range(2, r):
        acc = acc + theta[j]
    ind = [_clamp(acc)]
    for i in range(1, r):
        acc = acc - theta[i] + theta[i + r - 1]
        ind.append(_clamp(acc))
    return _unwrap(ind)


def fast_indicators_naive(window: Sequence) -> list:
    r = _check_window(window)
    out = []
    for i in range(r):
        acc = 0.0 * window[0]
        for j in range(1, r):
            diff = window[i + j] - window[i + j - 1]
            acc = acc + diff * diff
        out.append(acc)
    return out


def js_indicators(window: Sequence, table: ReconstructionTable, ops: OpCounter | None = None) -> list:
    """Jiang-Shu indicators evaluated as weighted sums of squares."""
    r = _check_window(window, table.r)
    f = _wrap(window, ops)
    perm, beta, gamma = table.lists["perm"], table.lists["beta"], table.lists["gamma"]
    out = []
    for i in range(r):
        x = f[i:i + r]
        acc = None
        for j in range(r - 1):
            lin = x[perm[i][j]]
            for k in range(j + 1, r):
                lin = lin + gamma[i][j][k] * x[perm[i][k]]
            term = beta[i][j] * (lin * lin)
            acc = term if acc is None else acc + term
        out.append(acc)
    return _unwrap(out)


def undivided_diff_sq(window: Sequence, table: ReconstructionTable, ops: OpCounter | None = None):
    _check_window(window, table.r)
    f = _wrap(window, ops)
    b = table.lists["b"]
    acc = b[0] * f[0]
    for k in range(1, len(f)):
        acc = acc + b[k] * f[k]
    sq = acc * acc
    return sq.v if isinstance(sq, Tally) else sq


def alphas(variant: WenoVariant, indicators: Sequence, d_r, ideal: Sequence,
           ops: OpCounter | None = None) -> list:
    """Unnormalized weights.

    JS: ``c_i / (I_i + eps)**s``.  YC/FWENO:
    ``c_i * (1 + d_r**s1 / (I_i**s1 + eps))**s2``.  ``d_r**s1`` is recomputed
    per weight, which is how the cost tables account for it.
    """
    r = len(indicators)
    v = variant.for_order(r)
    ind = _wrap(indicators, ops)
    out = []
    try:
        if v.kind == "js":
            for i in range(r):
                out.append(ideal[i] / _ipow(ind[i] + v.eps, v.s))
        else:
            dd = Tally(d_r, ops) if ops is not None else d_r
            for i in range(r):
                ratio = _ipow(dd, v.s1) / (_ipow(ind[i], v.s1) + v.eps)
                out.append(ideal[i] * _ipow(1 + ratio, v.s2))
    except (ZeroDivisionError, OverflowError) as exc:
        raise NonFiniteWeightsError(str(exc)) from exc
    out = _unwrap(out)
    if not all(math.isfinite(float(a)) and float(a) > 0 for a in out):
        raise NonFiniteWeightsError(f"non-finite or non-positive alpha: {out}")
    return out


def weights(alpha: Sequence, ops: OpCounter | None = None) -> list:
    a = _wrap(alpha, ops)
    total = a[0]
    for x in a[1:]:
        total = total + x
    inv = 1 / total
    return _unwrap([x * inv for x in a])


def substencil_values(window: Sequence, table: ReconstructionTable, ops: OpCounter | None = None) -> list:
    r = _check_window(window, table.r)
    f = _wrap(window, ops)
    d = table.lists["d"]
    out = []
    for i in range(r):
        acc = d[i][0] * f[i]
        for j in range(1, r):
            acc = acc + d[i][j] * f[i + j]
        out.append(acc)
    return _unwrap(out)


def combine(omega: Sequence, p: Sequence, ops: OpCounter | None = None):
    w = _wrap(omega, ops)
    acc = w[0] * p[0]
    for i in range(1, len(w)):
        acc = acc + w[i] * p[i]
    return acc.v if isinstance(acc, Tally) else acc


def indicators(window: Sequence, table: ReconstructionTable, variant: WenoVariant,
               ops: OpCounter | None = None) -> list:
    if variant.kind == "fweno":
        return fast_indicators(window, ops)
    return js_indicators(window, table, ops)


def nonlinear_weights(window: Sequence, table: ReconstructionTable, variant: WenoVariant,
                      ops: OpCounter | None = None) -> list:
    v = variant.for_order(table.r)
    ind = indicators(window, table, v, ops)
    d_r = 0.0 if v.kind == "js" else undivided_diff_sq(window, table, ops)
    return weights(alphas(v, ind, d_r, table.lists["c"], ops), ops)


def reconstruct(window: Sequence, table: ReconstructionTable, variant: WenoVariant,
                ops: OpCounter | None = None):
    """WENO value at the right edge ``x_{1/2}`` of the window's central cell."""
    p = substencil_values(window, table, ops)
    omega = nonlinear_weights(window, table, variant, ops)
    return combine(omega, p, ops)


STAGES = ("p", "I", "d", "alpha", "omega", "q")


def instrumented_costs(table: ReconstructionTable, variant: WenoVariant,
                       window: Sequence | None = None) -> dict[str, OpCounter]:
    """Per-stage operation counts of one full reconstruction, plus ``"total"``."""
    r = table.r
    v = variant.for_order(r)
    if window is None:
        window = [math.sin(1.0 + 0.7 * k) for k in range(2 * r - 1)]
    c = {name: OpCounter() for name in STAGES}
    p = substencil_values(window, table, c["p"])
    ind = indicators(window, table, v, c["I"])
    d_r = 0.0
    if v.kind != "js":
        d_r = undivided_diff_sq(window, table, c["d"])
    a = alphas(v, ind, d_r, table.lists["c"], c["alpha"])
    omega = weights(a, c["omega"])
    combine(omega, p, c["q"])
    total = OpCounter()
    for name in STAGES:
        total = total + c[name]
    c["total"] = total
    return c
