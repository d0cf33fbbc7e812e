"""
Potential Zoo

Canonical potentials covering every regime the checks distinguish, plus the
parser for the compact names used in scenario files ("NU(0.3)", "BUMP(7)").
"""

import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from .convex_core import INF, DomainError, ExtGridFn
from .toric_model import ToricGeometry, ToricPotential


def zero(geom: ToricGeometry) -> ToricPotential:
    return geom.reference()


def const(geom: ToricGeometry, c: float) -> ToricPotential:
    """phi ≡ c."""
    return ToricPotential(geom, geom.g0.shift(-c), label=f"CONST({c:g})")


def nu_singular(geom: ToricGeometry, nu: float) -> ToricPotential:
    """Dual g0 on [nu, 1], +inf below: Lelong number nu at the low vertex.

    On the grid the effective Lelong number is the first node >= nu.
    """
    if geom.dim != 1:
        raise DomainError("NU potentials are one-dimensional")
    if not 0.0 < nu < 1.0:
        raise DomainError(f"nu must lie in (0, 1), got {nu}")
    p = geom.nodes
    values = np.where(p >= nu - 1e-12, geom.g0.values, INF)
    return ToricPotential(geom, ExtGridFn(geom.polytope_grid, values), label=f"NU({nu:g})")


def einf(geom: ToricGeometry) -> ToricPotential:
    """Dual g0 + 1/p - 1: unbounded with full mass (zero Lelong number)."""
    if geom.dim != 1:
        raise DomainError("EINF is one-dimensional")
    p = geom.nodes
    with np.errstate(divide="ignore"):
        extra = np.where(p > 0.0, 1.0 / np.where(p > 0.0, p, 1.0) - 1.0, INF)
    return ToricPotential(geom, ExtGridFn(geom.polytope_grid, geom.g0.values + extra), label="EINF")


@dataclass(frozen=True)
class BumpParameters:
    """Coefficients of the convex perturbation a(p-c)^2 + b p + d + e (p-k)_+."""

    a: float
    c: float
    b: float
    d: float
    e: float
    k: float

    @classmethod
    def draw(cls, seed: int) -> "BumpParameters":
        rng = np.random.default_rng(seed)
        return cls(
            a=float(rng.uniform(0.1, 0.5)),
            c=float(rng.uniform(0.2, 0.8)),
            b=float(rng.uniform(-0.3, 0.3)),
            d=float(rng.uniform(-0.2, 0.2)),
            e=float(rng.uniform(0.0, 0.4)),
            k=float(rng.uniform(0.3, 0.7)),
        )

    def evaluate(self, p: np.ndarray) -> np.ndarray:
        return self.a * (p - self.c) ** 2 + self.b * p + self.d + self.e * np.maximum(0.0, p - self.k)


def bump(geom: ToricGeometry, seed: int) -> ToricPotential:
    """Random bounded potential: g0 plus a small convex perturbation."""
    params = BumpParameters.draw(seed)
    if geom.dim == 1:
        extra = params.evaluate(geom.nodes)
    else:
        p1, p2 = geom.polytope_grid.points
        extra = np.where(geom.polytope_grid.mask, params.evaluate(p1) + params.evaluate(p2), 0.0)
    return ToricPotential(geom, geom.g0.with_values(geom.g0.values + extra), label=f"BUMP({seed})")


def from_table(geom: ToricGeometry, values: Sequence[Optional[float]], label: str = "TABLE") -> ToricPotential:
    """Explicit dual node values; None or 'inf' entries are +inf."""
    arr = np.array([INF if v is None else float(v) for v in values], dtype=float)
    return ToricPotential(geom, ExtGridFn(geom.polytope_grid, arr), label=label)


@dataclass(frozen=True)
class ZooEntry:
    name: str
    params: str
    regime: str
    build: Callable[..., ToricPotential]


ZOO: Dict[str, ZooEntry] = {
    "ZERO": ZooEntry("ZERO", "", "reference potential, bounded", lambda g: zero(g)),
    "CONST": ZooEntry("CONST", "c", "constant c, bounded; am = c", lambda g, c: const(g, c)),
    "NU": ZooEntry("NU", "nu", "Lelong number nu at the low vertex; not in E, c = -nu/2",
                   lambda g, nu: nu_singular(g, nu)),
    "EINF": ZooEntry("EINF", "", "unbounded, Lelong number 0, full mass; in E", lambda g: einf(g)),
    "BUMP": ZooEntry("BUMP", "seed", "random bounded convex perturbation of ZERO",
                     lambda g, seed: bump(g, int(seed))),
}

_SPEC = re.compile(r"^\s*([A-Za-z]+)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


def parse_potential(geom: ToricGeometry, spec: Union[str, Mapping]) -> ToricPotential:
    """Build a potential from "NAME(arg)" text or a mapping.

    Mappings take either ``{"zoo": "NU", "param": 0.3}`` or
    ``{"table": [...]}``; an optional ``shift`` adds a constant.
    """
    shift = 0.0
    if isinstance(spec, Mapping):
        shift = float(spec.get("shift", 0.0))
        if "table" in spec:
            pot = from_table(geom, spec["table"], label=str(spec.get("label", "TABLE")))
            return pot.shift(shift) if shift else pot
        name = str(spec.get("zoo", ""))
        arg = spec.get("param")
        text = name if arg is None else f"{name}({arg})"
    else:
        text = spec
    match = _SPEC.match(text)
    if not match:
        raise ValueError(f"cannot parse potential spec {text!r}")
    name, arg = match.group(1).upper(), match.group(2)
    if name not in ZOO:
        raise ValueError(f"unknown zoo potential {name!r}; known: {', '.join(ZOO)}")
    entry = ZOO[name]
    if entry.params and arg in (None, ""):
        raise ValueError(f"{name} needs a parameter ({entry.params})")
    if not entry.params and arg not in (None, ""):
        raise ValueError(f"{name} takes no parameter")
    pot = entry.build(geom, float(arg)) if entry.params else entry.build(geom)
    return pot.shift(shift) if shift else pot


def standard_zoo(geom: ToricGeometry) -> List[ToricPotential]:
    """The potentials the checks sweep over (all below ZERO up to CONST/BUMP)."""
    return [
        const(geom, -1.0),
        nu_singular(geom, 0.1),
        nu_singular(geom, 0.3),
        nu_singular(geom, 0.6),
        einf(geom),
    ]
