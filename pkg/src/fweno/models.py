"""Conservation laws: linear advection, inviscid Burgers, and the Euler equations.

States are arrays whose first axis is the conserved component, so a scalar
field on N nodes has shape (1, N) and a 2D Euler field has shape (4, Nx, Ny).
Direction 0 is x and direction 1 is y.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _jit
from .coeffgen import ReconstructionTable
from .kernels import NonFiniteWeightsError, WenoVariant

GAMMA = 1.4


class InadmissibleStateError(ValueError):
    """Non-positive density or pressure, or a non-finite value."""


class Splitting(enum.Enum):
    GLOBAL_LF = "glf"
    LOCAL_LF = "llf"
    DONAT_MARQUINA = "dm"

    @classmethod
    def parse(cls, text: str | Splitting) -> Splitting:
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        aliases = {"glf": cls.GLOBAL_LF, "globallf": cls.GLOBAL_LF, "globallaxfriedrichs": cls.GLOBAL_LF,
                   "llf": cls.LOCAL_LF, "locallf": cls.LOCAL_LF, "locallaxfriedrichs": cls.LOCAL_LF,
                   "dm": cls.DONAT_MARQUINA, "donatmarquina": cls.DONAT_MARQUINA}
        if key not in aliases:
            raise ValueError(f"unknown splitting {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class ConservationLaw:
    name: str
    gamma: float = GAMMA

    def __post_init__(self):
        if self.name not in ("advection", "burgers", "euler1d", "euler2d"):
            raise ValueError(f"unknown model {self.name!r}")
        if self.is_euler and not self.gamma > 1.0:
            raise ValueError("gamma must exceed 1")

    @property
    def is_euler(self) -> bool:
        return self.name.startswith("euler")

    @property
    def m(self) -> int:
        return {"advection": 1, "burgers": 1, "euler1d": 3, "euler2d": 4}[self.name]

    @property
    def dim(self) -> int:
        return 2 if self.name == "euler2d" else 1

    @property
    def scalar_code(self) -> int:
        return _jit.MODEL_ADVECTION if self.name == "advection" else _jit.MODEL_BURGERS


def _as_states(model: ConservationLaw, U) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.ndim == 0 or U.shape[0] != model.m:
        if model.m == 1:
            return U.reshape((1,) + U.shape)
        raise ValueError(f"{model.name} states need {model.m} components on axis 0, got shape {U.shape}")
    return U


def _normal_index(model: ConservationLaw, direction: int) -> int:
    if direction not in (0, 1) or (direction == 1 and model.dim == 1):
        raise ValueError(f"direction {direction} invalid for {model.name}")
    return 1 + direction


def pressure(U, gamma: float = GAMMA) -> np.ndarray:
    """Pressure from conserved (rho, momentum..., E); any number of momenta."""
    U = np.asarray(U, dtype=float)
    rho = U[0]
    if np.any(~(rho > 0)):
        raise InadmissibleStateError("non-positive density")
    mom2 = np.sum(U[1:-1] ** 2, axis=0)
    return (gamma - 1.0) * (U[-1] - 0.5 * mom2 / rho)


def conserved_from_primitive(rho, velocity, p, gamma: float = GAMMA) -> np.ndarray:
    """(rho, v..., p) to (rho, rho v..., E); ``velocity`` is a sequence of components."""
    rho = np.asarray(rho, dtype=float)
    vel = [np.asarray(v, dtype=float) for v in velocity]
    kinetic = 0.5 * rho * sum(v * v for v in vel)
    E = np.asarray(p, dtype=float) / (gamma - 1.0) + kinetic
    return np.stack(np.broadcast_arrays(rho, *[rho * v for v in vel], E))


def primitive_from_conserved(U, gamma: float = GAMMA) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    p = pressure(U, gamma)
    return np.stack([U[0], *[U[k] / U[0] for k in range(1, U.shape[0] - 1)], p])


def check_admissible(model: ConservationLaw, U) -> None:
    U = np.asarray(U, dtype=float)
    if not np.all(np.isfinite(U)):
        idx = np.argwhere(~np.isfinite(U))[0]
        raise InadmissibleStateError(f"non-finite value at index {tuple(int(i) for i in idx)}")
    if model.is_euler:
        bad = ~(U[0] > 0)
        if np.any(bad):
            raise InadmissibleStateError(f"non-positive density at node {tuple(int(i) for i in np.argwhere(bad)[0])}")
        p = pressure(U, model.gamma)
        bad = ~(p > 0)
        if np.any(bad):
            raise InadmissibleStateError(f"non-positive pressure at node {tuple(int(i) for i in np.argwhere(bad)[0])}")


def flux(model: ConservationLaw, U, direction: int = 0) -> np.ndarray:
    U = _as_states(model, U)
    if model.name == "advection":
        return U.copy()
    if model.name == "burgers":
        return 0.5 * U * U
    a = _normal_index(model, direction)
    p = pressure(U, model.gamma)
    vn = U[a] / U[0]
    F = U * vn
    F[a] += p
    F[-1] += p * vn
    return F


def sound_speed(U, gamma: float = GAMMA) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    p = pressure(U, gamma)
    if np.any(~(p > 0)):
        raise InadmissibleStateError("non-positive pressure")
    return np.sqrt(gamma * p / U[0])


def max_wave_speed(model: ConservationLaw, U, direction: int = 0) -> float:
    U = _as_states(model, U)
    if model.name == "advection":
        return 1.0
    if model.name == "burgers":
        return float(np.max(np.abs(U)))
    a = _normal_index(model, direction)
    return float(np.max(np.abs(U[a] / U[0]) + sound_speed(U, model.gamma)))


def lf_split(f, u, alpha: float):
    """Lax-Friedrichs splitting ``f = f_plus + f_minus``."""
    f = np.asarray(f, dtype=float)
    u = np.asarray(u, dtype=float)
    return 0.5 * (f + alpha * u), 0.5 * (f - alpha * u)


def _direction_perm(model: ConservationLaw, direction: int) -> np.ndarray:
    perm = np.arange(model.m)
    if direction == 1:
        perm[[1, 2]] = [2, 1]
    return perm


def eigensystem(model: ConservationLaw, U_left, U_right=None, direction: int = 0):
    """(L, R, eigenvalues) of the flux Jacobian at the Roe average of two states.

    Scalar laws return 1x1 matrices and the Roe speed.
    """
    UL = _as_states(model, U_left).reshape(model.m)
    UR = UL if U_right is None else _as_states(model, U_right).reshape(model.m)
    one = np.ones((1, 1))
    if model.name == "advection":
        return one, one.copy(), np.ones(1)
    if model.name == "burgers":
        return one, one.copy(), np.array([0.5 * (UL[0] + UR[0])])
    _normal_index(model, direction)
    check_admissible(model, np.stack([UL, UR], axis=1))
    perm = _direction_perm(model, direction)
    ul, ur = UL[perm], UR[perm]
    m, gm1 = model.m, model.gamma - 1.0
    prim = []
    for s in (ul, ur):
        rho = s[0]
        vel = s[1:-1] / rho
        p = gm1 * (s[-1] - 0.5 * rho * np.dot(vel, vel))
        prim.append((rho, vel, (s[-1] + p) / rho))
    wl, wr = np.sqrt(prim[0][0]), np.sqrt(prim[1][0])
    vel = (wl * prim[0][1] + wr * prim[1][1]) / (wl + wr)
    H = (wl * prim[0][2] + wr * prim[1][2]) / (wl + wr)
    c2 = gm1 * (H - 0.5 * np.dot(vel, vel))
    if not c2 > 0:
        raise InadmissibleStateError("Roe-averaged sound speed is not real")
    L = np.empty((m, m))
    R = np.empty((m, m))
    lam = np.empty(m)
    _jit.euler_eigen(m, vel[0], vel[1] if m == 4 else 0.0, H, np.sqrt(c2), gm1, L, R, lam)
    # rows of R and columns of L are indexed by conserved component
    Rp = np.empty_like(R)
    Lp = np.empty_like(L)
    Rp[perm, :] = R
    Lp[:, perm] = L
    return Lp, Rp, lam


def table_args(table: ReconstructionTable) -> tuple:
    return (table.substencil_coeffs, table.ideal_weights, table.ud_coeffs,
            table.js_perm, table.js_beta, table.js_gamma)


def variant_args(variant: WenoVariant, r: int) -> tuple:
    v = variant.for_order(r)
    s = v.s if v.kind == "js" else 1
    return (_jit.KIND_CODES[v.kind], int(s), int(v.s1), int(v.s2), float(v.eps))


def donat_marquina_interface_flux(model: ConservationLaw, window, table: ReconstructionTable,
                                  variant: WenoVariant, direction: int = 0) -> np.ndarray:
    """Numerical flux between the two central states of ``2r`` consecutive states.

    ``window`` has shape (m, 2r) (or (2r,) for scalar laws); the interface
    lies between columns r-1 and r.
    """
    r = table.r
    W = _as_states(model, window)
    if W.shape[1] != 2 * r:
        raise ValueError(f"Donat-Marquina window needs {2 * r} states, got {W.shape[1]}")
    tab, vp = table_args(table), variant_args(variant, r)
    if not model.is_euler:
        fhat = np.empty(1)
        status, loc, _ = _jit.scalar_line(np.ascontiguousarray(W[0]), r, 0, model.scalar_code,
                                          _jit.SPLIT_CODES["dm"], 0.0, r, tab, vp, fhat)
        _raise_status(status, loc)
        return fhat
    perm = _direction_perm(model, direction)
    _normal_index(model, direction)
    line = np.ascontiguousarray(W[perm])
    fhat = np.empty((model.m, 1))
    status, loc, _ = _jit.euler_line(line, r, 0, model.gamma, _jit.SPLIT_CODES["dm"], 0.0, r, tab, vp, fhat)
    _raise_status(status, loc)
    out = np.empty(model.m)
    out[perm] = fhat[:, 0]
    return out


def _raise_status(status: int, loc: int, where: str = "") -> None:
    if status == _jit.BAD_STATE:
        raise InadmissibleStateError(f"inadmissible state at line index {loc}{where}")
    if status == _jit.NONFINITE:
        raise NonFiniteWeightsError(f"non-finite interface flux at line index {loc}{where}")
