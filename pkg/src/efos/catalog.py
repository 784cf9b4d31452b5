"""Named tensors and operator families with documented constants.

Entries are addressed as ``name`` or ``catalog:name(param, ...)`` in
config files.  Constant tensors: the Cauchy-Riemann system, its
anisotropic generalization, and the real form of the Dirac operator.
Operator families: Lipschitz perturbations of a linear anchor and
oscillating-coefficient linear operators, both carrying analytically
known nearness bounds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .ellipticity import cached_nu
from .nonlinear import NonlinearOperator
from .tensor import ConstantTensor, contract, operator_norm

__all__ = [
    "CatalogEntry",
    "get",
    "names",
    "parse_catalog_ref",
    "cauchy_riemann",
    "generalized_cauchy_riemann",
    "dirac",
    "lipschitz_perturbation",
    "variable_linear",
    "SHAPE_FUNCTIONS",
]


def cauchy_riemann() -> ConstantTensor:
    """The 2 x (2 x 2) divergence/rotation pair: (Q11 + Q22, -Q12 + Q21)."""
    return generalized_cauchy_riemann(1.0, 1.0, 1.0, 1.0)


def generalized_cauchy_riemann(kappa: float, lam: float, mu: float, nu: float) -> ConstantTensor:
    """Anisotropic first-order pair (kappa Q11 + lam Q22, -mu Q12 + nu Q21).

    All four weights must be positive; equal weights recover the
    divergence/rotation pair.
    """
    for name, value in (("kappa", kappa), ("lam", lam), ("mu", mu), ("nu", nu)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    entries = np.zeros((2, 2, 2))
    entries[0, 0, 0] = kappa
    entries[0, 1, 1] = lam
    entries[1, 0, 1] = -mu
    entries[1, 1, 0] = nu
    return ConstantTensor(entries)


def dirac() -> ConstantTensor:
    """Real 4-component form of the three-variable Dirac operator.

    The four equations, with D_j u_b abbreviated by (b, j):

        (1,1) + (2,2) + (3,3) = f1
       -(1,2) + (2,1) + (4,3) = f2
       -(1,3) + (3,1) - (4,2) = f3
       -(2,3) + (3,2) + (4,1) = f4

    The direction matrix is orthogonal for every unit direction, so the
    ellipticity constant is exactly 1 and |det| is exactly 1.
    """
    entries = np.zeros((4, 4, 3))
    entries[0, 0, 0] = 1
    entries[0, 1, 1] = 1
    entries[0, 2, 2] = 1
    entries[1, 0, 1] = -1
    entries[1, 1, 0] = 1
    entries[1, 3, 2] = 1
    entries[2, 0, 2] = -1
    entries[2, 2, 0] = 1
    entries[2, 3, 1] = -1
    entries[3, 1, 2] = -1
    entries[3, 2, 1] = 1
    entries[3, 3, 0] = 1
    return ConstantTensor(entries)


def _shape_sin_q11(Q):
    out = np.zeros(Q.shape[:-2] + (Q.shape[-2],))
    out[..., 0] = np.sin(Q[..., 0, 0])
    return out


def _shape_tanh_row1(Q):
    n = Q.shape[-1]
    out = np.zeros(Q.shape[:-2] + (Q.shape[-2],))
    out[..., 0] = np.tanh(Q[..., 0, :].sum(axis=-1) / np.sqrt(n))
    return out


# Each shape is 1-Lipschitz in the Frobenius norm, so a perturbation
# lam * nu(A) * shape has nearness constant at most lam * nu(A).
SHAPE_FUNCTIONS = {
    "sin_q11": _shape_sin_q11,
    "tanh_trace": _shape_tanh_row1,
}


def _resolve_base(base) -> ConstantTensor:
    if isinstance(base, ConstantTensor):
        return base
    entry = _REGISTRY.get(str(base))
    if entry is None or entry.kind != "tensor":
        raise KeyError(f"unknown base tensor {base!r}")
    return entry.build()


def lipschitz_perturbation(base, lam: float, shape: str = "sin_q11") -> NonlinearOperator:
    """F(x, Q) = A:Q + lam nu(A) s(Q) with a 1-Lipschitz shape s.

    The declared nearness is lam * nu(A); the operator is strictly
    elliptic relative to A exactly when lam < 1 (larger lam is allowed
    but yields no contraction margin).
    """
    A = _resolve_base(base)
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    if shape not in SHAPE_FUNCTIONS:
        raise KeyError(f"unknown shape {shape!r}; choose from {sorted(SHAPE_FUNCTIONS)}")
    s = SHAPE_FUNCTIONS[shape]
    amp = lam * cached_nu(A)

    def evaluator(x, Q):
        return contract(A, Q) + amp * s(np.asarray(Q, dtype=float))

    return NonlinearOperator(
        evaluator=evaluator,
        anchor=A,
        declared_nearness=amp,
        name=f"lipschitz_perturbation({lam}, {shape})",
    )


def _default_direction_tensor(N: int, n: int) -> ConstantTensor:
    entries = np.zeros((N, N, n))
    entries[0, 0, 0] = 1.0
    return ConstantTensor(entries)


def variable_linear(base, eps: float, B: ConstantTensor | None = None) -> NonlinearOperator:
    """F(x, Q) = (A + eps cos(2 pi x1) B) : Q with a unit-norm modulation B.

    The declared nearness is eps * |B| = eps, attained at x1 = 0, so the
    operator is strictly elliptic relative to A iff eps < nu(A).
    """
    A = _resolve_base(base)
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    if B is None:
        B = _default_direction_tensor(A.N, A.n)
    if B.N != A.N or B.n != A.n:
        raise ValueError("modulation tensor must match the anchor's shape")
    nrm = operator_norm(B)
    if abs(nrm - 1.0) > 1e-12:
        raise ValueError(f"modulation tensor must have unit operator norm, got {nrm}")

    def evaluator(x, Q):
        x = np.asarray(x, dtype=float)
        osc = eps * np.cos(2.0 * np.pi * x[..., 0])
        return contract(A, Q) + osc[..., None] * contract(B, Q)

    return NonlinearOperator(
        evaluator=evaluator,
        anchor=A,
        declared_nearness=float(eps),
        name=f"variable_linear({eps})",
    )


@dataclass(frozen=True)
class CatalogEntry:
    """A named constructor plus its documented quantitative facts."""

    name: str
    kind: str  # "tensor" | "operator"
    build: callable
    params: str
    notes: str


_REGISTRY = {
    "cauchy_riemann": CatalogEntry(
        name="cauchy_riemann",
        kind="tensor",
        build=cauchy_riemann,
        params="",
        notes="nu = 1 (direction matrices are rotations); |det| = 1 on the circle",
    ),
    "generalized_cr": CatalogEntry(
        name="generalized_cr",
        kind="tensor",
        build=generalized_cauchy_riemann,
        params="kappa, lam, mu, nu > 0",
        notes="nu(2,1,1,1) = 2/sqrt(5); weights 1,1,1,1 recover cauchy_riemann",
    ),
    "dirac": CatalogEntry(
        name="dirac",
        kind="tensor",
        build=dirac,
        params="",
        notes="nu = 1, |det| = 1 on the sphere (orthogonal direction matrices)",
    ),
    "lipschitz_perturbation": CatalogEntry(
        name="lipschitz_perturbation",
        kind="operator",
        build=lipschitz_perturbation,
        params="base tensor name, lam >= 0, shape in {sin_q11, tanh_trace}",
        notes="declared nearness lam * nu(A); elliptic margin iff lam < 1",
    ),
    "variable_linear": CatalogEntry(
        name="variable_linear",
        kind="operator",
        build=variable_linear,
        params="base tensor name, eps >= 0",
        notes="declared nearness eps; elliptic margin iff eps < nu(A)",
    ),
}


def names() -> list:
    return sorted(_REGISTRY)


def get(name: str, params=()):
    """Construct a catalog entry by name with positional params.

    Returns a ConstantTensor for tensor entries and a NonlinearOperator
    for operator families.  Unknown names raise KeyError.
    """
    entry = _REGISTRY.get(name)
    if entry is None:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(names())}")
    return entry.build(*params)


_REF_RE = re.compile(r"^catalog:([a-z0-9_]+)(?:\((.*)\))?$")


def parse_catalog_ref(text: str):
    """Parse ``catalog:name(p1, p2, ...)`` into (name, params).

    Numeric params become floats, everything else stays a string.
    """
    m = _REF_RE.match(text.strip())
    if not m:
        raise ValueError(f"not a catalog reference: {text!r}")
    name, raw = m.group(1), m.group(2)
    params = []
    if raw:
        for tok in raw.split(","):
            tok = tok.strip()
            if not tok:
                continue
            try:
                params.append(float(tok))
            except ValueError:
                params.append(tok)
    return name, tuple(params)
