"""Initial/boundary data and exact solutions for the benchmark problems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .models import GAMMA, ConservationLaw, Splitting, conserved_from_primitive
from .solver import (DtRule, Grid, InflowFixed, OutflowExtrapolate, Periodic, Reflect,
                     TimeDependent)


@dataclass(frozen=True)
class Problem:
    name: str
    model: ConservationLaw
    domain: tuple
    T: float
    bcs: tuple
    initial: Callable
    exact: Callable | None = None
    splitting: Splitting = Splitting.GLOBAL_LF
    dt_rule: DtRule = DtRule.STANDARD
    cfl: float = 0.4
    s2: int = 1
    notes: dict = field(default_factory=dict)

    def grids(self, *N: int) -> tuple:
        if len(N) == 1 and len(self.domain) == 2:
            N = (N[0], N[0])
        if len(N) != len(self.domain):
            raise ValueError(f"{self.name} needs {len(self.domain)} grid sizes, got {N}")
        return tuple(Grid(lo, hi, n) for (lo, hi), n in zip(self.domain, N))

    def coords(self, grids: tuple) -> tuple:
        if len(grids) == 1:
            return (grids[0].nodes,)
        return tuple(np.meshgrid(grids[0].nodes, grids[1].nodes, indexing="ij"))


def _sine(x):
    return 0.25 + 0.5 * np.sin(np.pi * x)


def advection() -> Problem:
    periodic = ((Periodic(), Periodic()),)
    return Problem(
        name="advection", model=ConservationLaw("advection"), domain=((-1.0, 1.0),), T=1.0,
        bcs=periodic,
        initial=lambda grids: _sine(grids[0].nodes)[None, :],
        exact=lambda grids, t: _sine(grids[0].nodes - t)[None, :],
        dt_rule=DtRule.ORDER_MATCHED,
    )


def burgers_exact(x: np.ndarray, t: float, u0=_sine, du0=None, tol: float = 1e-15) -> np.ndarray:
    """Smooth Burgers solution by characteristics: ``u = u0(x - u t)``.

    Valid before the first shock forms; the foot ``xi`` of each characteristic
    solves ``xi + t u0(xi) = x`` by Newton iteration.
    """
    if du0 is None:
        du0 = lambda z: 0.5 * np.pi * np.cos(np.pi * z)
    x = np.asarray(x, dtype=float)
    xi = x - t * u0(x)
    for _ in range(100):
        F = xi + t * u0(xi) - x
        dF = 1.0 + t * du0(xi)
        if np.any(dF <= 0):
            raise ValueError(f"characteristics cross before t={t}")
        step = F / dF
        xi = xi - step
        if np.max(np.abs(step)) < tol:
            break
    return u0(xi)


def burgers_smooth() -> Problem:
    return Problem(
        name="burgers-smooth", model=ConservationLaw("burgers"), domain=((-1.0, 1.0),), T=0.3,
        bcs=((Periodic(), Periodic()),),
        initial=lambda grids: _sine(grids[0].nodes)[None, :],
        exact=lambda grids, t: burgers_exact(grids[0].nodes, t)[None, :],
        dt_rule=DtRule.ORDER_MATCHED,
    )


def burgers_shock() -> Problem:
    return Problem(
        name="burgers-shock", model=ConservationLaw("burgers"), domain=((-1.0, 1.0),), T=12.0,
        bcs=((Periodic(), Periodic()),),
        initial=lambda grids: _sine(grids[0].nodes)[None, :],
        splitting=Splitting.DONAT_MARQUINA,
        notes={"reference_N": 1600},
    )


def _euler1d(states_prim, gamma=GAMMA):
    rho, v, p = states_prim
    return conserved_from_primitive(rho, (v,), p, gamma)


SHU_OSHER_LEFT = (27.0 / 7.0, 4.0 * math.sqrt(35.0) / 9.0, 31.0 / 3.0)


def shu_osher(gamma: float = GAMMA) -> Problem:
    left = _euler1d(SHU_OSHER_LEFT, gamma)

    def initial(grids):
        x = grids[0].nodes
        behind = x <= -4.0
        rho = np.where(behind, SHU_OSHER_LEFT[0], 1.0 + 0.2 * np.sin(5.0 * x))
        v = np.where(behind, SHU_OSHER_LEFT[1], 0.0)
        p = np.where(behind, SHU_OSHER_LEFT[2], 1.0)
        return _euler1d((rho, v, p), gamma)

    return Problem(
        name="shu-osher", model=ConservationLaw("euler1d", gamma), domain=((-5.0, 5.0),), T=1.8,
        bcs=((InflowFixed(left), OutflowExtrapolate()),), initial=initial,
        splitting=Splitting.DONAT_MARQUINA, notes={"reference_N": 4000},
    )


SOD_LEFT = (1.0, 0.0, 1.0)
SOD_RIGHT = (0.125, 0.0, 0.1)


def sod(gamma: float = GAMMA) -> Problem:
    def initial(grids):
        x = grids[0].nodes
        left = x <= 0.5
        prim = [np.where(left, a, b) for a, b in zip(SOD_LEFT, SOD_RIGHT)]
        return _euler1d(prim, gamma)

    return Problem(
        name="sod", model=ConservationLaw("euler1d", gamma), domain=((0.0, 1.0),), T=0.1,
        bcs=((InflowFixed(_euler1d(SOD_LEFT, gamma)), InflowFixed(_euler1d(SOD_RIGHT, gamma))),),
        initial=initial, splitting=Splitting.DONAT_MARQUINA, notes={"reference_N": 8000},
    )


def _euler2d(rho, vx, vy, p, gamma=GAMMA):
    return conserved_from_primitive(rho, (vx, vy), p, gamma)


def dmr_states(gamma: float = GAMMA) -> tuple[np.ndarray, np.ndarray]:
    """Post-shock and pre-shock conserved states (rho, rho vx, rho vy, E)."""
    speed = 8.25
    vx = speed * math.cos(math.pi / 6)
    vy = -speed * math.sin(math.pi / 6)
    c1 = np.array([8.0, 8.0 * vx, 8.0 * vy, 563.5])
    c2 = np.array([1.4, 0.0, 0.0, 2.5])
    return c1, c2


def dmr_shock_x(y, t: float = 0.0):
    """x position of the incident shock at height ``y`` and time ``t``."""
    return 0.25 + (np.asarray(y, dtype=float) + 20.0 * t) / math.sqrt(3.0)


def dmr_initial_state(x, y, gamma: float = GAMMA) -> np.ndarray:
    c1, c2 = dmr_states(gamma)
    post = np.asarray(x) <= dmr_shock_x(y)
    return np.where(post[None, ...], c1.reshape((4,) + (1,) * post.ndim), c2.reshape((4,) + (1,) * post.ndim))


def dmr(gamma: float = GAMMA) -> Problem:
    c1, c2 = dmr_states(gamma)

    def bottom(t, x, mirror):
        # outflow ahead of the wedge tip, reflecting wall behind it
        out = np.repeat(mirror[:, :1, :], mirror.shape[1], axis=1)
        wall = mirror.copy()
        wall[2] = -wall[2]
        return np.where((x > 0.25)[None, None, :], wall, out)

    def top(t, x, mirror):
        post = (x <= dmr_shock_x(1.0, t))[None, None, :]
        shape = mirror.shape
        return np.where(post, c1.reshape(4, 1, 1), c2.reshape(4, 1, 1)) * np.ones(shape)

    def initial(grids):
        X, Y = np.meshgrid(grids[0].nodes, grids[1].nodes, indexing="ij")
        return dmr_initial_state(X, Y, gamma)

    return Problem(
        name="dmr", model=ConservationLaw("euler2d", gamma), domain=((0.0, 4.0), (0.0, 1.0)), T=0.2,
        bcs=((InflowFixed(c1), OutflowExtrapolate()), (TimeDependent(bottom), TimeDependent(top))),
        initial=initial, splitting=Splitting.DONAT_MARQUINA, notes={"default_N": (512, 128)},
    )


RIEMANN3_QUADRANTS = {
    # (x > 0.5, y > 0.5): (rho, vx, vy, p)
    (True, True): (1.5, 0.0, 0.0, 1.5),
    (False, True): (0.5323, 1.206, 0.0, 0.3),
    (False, False): (0.138, 1.206, 1.206, 0.029),
    (True, False): (0.5323, 0.0, 1.206, 0.3),
}


def riemann2d_initial_state(x, y, gamma: float = GAMMA) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    prim = np.zeros((4,) + x.shape)
    for (right, upper), vals in RIEMANN3_QUADRANTS.items():
        mask = ((x > 0.5) == right) & ((y > 0.5) == upper)
        for k in range(4):
            prim[k, mask] = vals[k]
    return _euler2d(*prim, gamma)


def riemann2d(gamma: float = GAMMA) -> Problem:
    def initial(grids):
        X, Y = np.meshgrid(grids[0].nodes, grids[1].nodes, indexing="ij")
        return riemann2d_initial_state(X, Y, gamma)

    outflow = (OutflowExtrapolate(), OutflowExtrapolate())
    return Problem(
        name="riemann2d", model=ConservationLaw("euler2d", gamma), domain=((0.0, 1.0), (0.0, 1.0)),
        T=0.3, bcs=(outflow, outflow), initial=initial, splitting=Splitting.DONAT_MARQUINA, s2=2,
        notes={"default_N": (256, 256), "reference_N": (512, 512)},
    )


def uniform2d(gamma: float = GAMMA) -> Problem:
    """A constant moving state on a periodic square; any change is an error."""
    state = _euler2d(1.0, 0.3, -0.2, 1.0, gamma)
    periodic = (Periodic(), Periodic())
    return Problem(
        name="uniform2d", model=ConservationLaw("euler2d", gamma), domain=((0.0, 1.0), (0.0, 1.0)),
        T=0.05, bcs=(periodic, periodic),
        initial=lambda grids: np.broadcast_to(state.reshape(4, 1, 1), (4, grids[0].N, grids[1].N)).copy(),
        exact=lambda grids, t: np.broadcast_to(state.reshape(4, 1, 1), (4, grids[0].N, grids[1].N)).copy(),
        splitting=Splitting.DONAT_MARQUINA, notes={"default_N": (32, 32)},
    )


PROBLEMS = {
    "advection": advection,
    "burgers-smooth": burgers_smooth,
    "burgers-shock": burgers_shock,
    "shu-osher": shu_osher,
    "sod": sod,
    "dmr": dmr,
    "riemann2d": riemann2d,
    "uniform2d": uniform2d,
}


def get_problem(name: str, gamma: float = GAMMA) -> Problem:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; expected one of {sorted(PROBLEMS)}") from None
    if factory in (advection, burgers_smooth, burgers_shock):
        return factory()
    return factory(gamma)


def restrict(fine: np.ndarray, fine_grids: tuple, coarse_grids: tuple) -> np.ndarray:
    """Sample a fine solution on coarse nodes.

    Coinciding nodes are copied, otherwise values are interpolated linearly.
    """
    fine = np.asarray(fine, dtype=float)
    if len(fine_grids) == 1:
        xf, xc = fine_grids[0].nodes, coarse_grids[0].nodes
        idx = _coincident(xf, xc)
        if idx is not None:
            return fine[:, idx]
        return np.stack([np.interp(xc, xf, comp) for comp in fine])
    ix = _coincident(fine_grids[0].nodes, coarse_grids[0].nodes)
    iy = _coincident(fine_grids[1].nodes, coarse_grids[1].nodes)
    if ix is not None and iy is not None:
        return fine[:, ix][:, :, iy]
    from scipy.interpolate import RegularGridInterpolator

    X, Y = np.meshgrid(coarse_grids[0].nodes, coarse_grids[1].nodes, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    out = []
    for comp in fine:
        interp = RegularGridInterpolator((fine_grids[0].nodes, fine_grids[1].nodes), comp,
                                         bounds_error=False, fill_value=None)
        out.append(interp(pts).reshape(X.shape))
    return np.stack(out)


def _coincident(xf: np.ndarray, xc: np.ndarray):
    hf = xf[1] - xf[0] if xf.size > 1 else 1.0
    idx = np.rint((xc - xf[0]) / hf).astype(int)
    if idx.min() < 0 or idx.max() >= xf.size:
        return None
    if np.allclose(xf[idx], xc, rtol=0, atol=1e-9 * hf):
        return idx
    return None
