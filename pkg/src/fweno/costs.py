"""Closed-form operation counts per reconstruction for each weight design."""

from __future__ import annotations

from .kernels import OpCounter, WenoVariant


def closed_form(variant: WenoVariant, r: int) -> OpCounter:
    """Additions, multiplications and divisions for one reconstruction at order ``2r-1``."""
    v = variant.for_order(r)
    if v.kind == "js":
        s = v.s
        adds = (r**3 + 3 * r**2 - 4) // 2
        mults = (r**3 + 5 * r**2 + (2 * s - 2) * r) // 2
    elif v.kind == "yc":
        s1, s2 = v.s1, v.s2
        adds = (r**3 + 3 * r**2 + 6 * r - 8) // 2
        mults = (r**3 + 5 * r**2 + (4 * s1 + 2 * s2) * r) // 2
    else:
        s1, s2 = v.s1, v.s2
        adds = r**2 + 10 * r - 10
        mults = r**2 + (2 * s1 + s2 + 4) * r - 2
    return OpCounter(adds, mults, r + 1)


def closed_form_total(variant: WenoVariant, r: int) -> int:
    return closed_form(variant, r).total
