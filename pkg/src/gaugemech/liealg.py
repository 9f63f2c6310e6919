"""Matrix Lie groups and algebras in concrete coordinates.

A group is a subgroup of GL(m, R) described by a basis e_1..e_n of its Lie
algebra (m x m matrices), the structure constants c^k_ij of that basis, and
a membership residual for group elements.  Algebra vectors and coalgebra
vectors are plain float arrays of coordinates in the basis / dual basis;
the pairing between them is the coordinate dot product.

Tangent data on a group is kept in left trivialization: a tangent vector at
g is stored as the algebra coordinates xi of the curve t -> g exp(t xi).
In this trivialization TL_g is the identity on coordinates, TR_g acts as
Ad_{g^-1}, and the tangent-group product reads

    (g, xi) . (h, eta) = (g h, Ad_{h^-1} xi + eta).

Coadjoint conventions (fixed package-wide): <Ad*_g mu, x> = <mu, Ad_g x>
and <ad*_x mu, y> = <mu, [x, y]>, i.e. transposes of Ad_g and ad_x in
coordinates.  Note Ad*: g -> Ad*_g is then an anti-homomorphism.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Array = np.ndarray

EXP_TAYLOR_CUTOFF = 1e-24
LOG_SERIES_RADIUS = 0.5
MAX_SQUARE_ROOTS = 48


class LieDomainError(ValueError):
    """Input lies outside the domain of the requested matrix map."""


# ---------------------------------------------------------------------------
# matrix exponential / logarithm (scaling-and-squaring, tiny dense matrices)
# ---------------------------------------------------------------------------


def expm(a: Array) -> Array:
    """Matrix exponential by scaling-and-squaring with a full Taylor tail."""
    a = np.asarray(a, dtype=float)
    norm = np.linalg.norm(a)
    s = 0 if norm <= 0.5 else int(np.ceil(np.log2(norm / 0.5)))
    t = a / (2.0**s)
    out = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, 80):
        term = term @ t / k
        out = out + term
        if np.linalg.norm(term) < EXP_TAYLOR_CUTOFF:
            break
    for _ in range(s):
        out = out @ out
    return out


def _sqrtm(a: Array, tol: float = 1e-13, iters: int = 80) -> Array:
    """Principal square root via the Denman-Beavers iteration."""
    y = np.asarray(a, dtype=float)
    z = np.eye(a.shape[0])
    for _ in range(iters):
        try:
            yi = np.linalg.inv(y)
            zi = np.linalg.inv(z)
        except np.linalg.LinAlgError as exc:
            raise LieDomainError("matrix square root iteration became singular") from exc
        y, z = 0.5 * (y + zi), 0.5 * (z + yi)
        if np.linalg.norm(y @ y - a) <= tol * max(1.0, np.linalg.norm(a)):
            return y
    raise LieDomainError("matrix square root did not converge (eigenvalue near the negative real axis?)")


def logm(g: Array) -> Array:
    """Matrix logarithm by inverse scaling-and-squaring.

    Repeated principal square roots bring the argument within
    ||a - I|| < 0.5 of the identity, then the Mercator series applies.
    Raises LieDomainError outside the injectivity radius (e.g. a rotation
    by pi, whose principal square root does not exist).
    """
    a = np.asarray(g, dtype=float)
    m = a.shape[0]
    eigs = np.linalg.eigvals(a)
    on_negative_axis = (eigs.real <= 0.0) & (np.abs(eigs.imag) <= 1e-12 * np.abs(eigs) + 1e-14)
    if np.any(on_negative_axis):
        raise LieDomainError("logarithm outside injectivity radius (eigenvalue on the negative real axis)")
    k = 0
    while np.linalg.norm(a - np.eye(m)) >= LOG_SERIES_RADIUS:
        if k >= MAX_SQUARE_ROOTS:
            raise LieDomainError("logarithm outside injectivity radius")
        a = _sqrtm(a)
        k += 1
    w = a - np.eye(m)
    term = np.eye(m)
    out = np.zeros_like(a)
    for j in range(1, 120):
        term = term @ w
        out = out + ((-1.0) ** (j + 1)) * term / j
        if np.linalg.norm(term) < EXP_TAYLOR_CUTOFF:
            break
    return (2.0**k) * out


# ---------------------------------------------------------------------------
# group specification
# ---------------------------------------------------------------------------


@dataclass
class LieGroupSpec:
    """A matrix Lie group with an explicit algebra basis.

    ``basis`` has shape (dim, embed, embed); ``structure[i, j, k]`` is c^k_ij
    in [e_i, e_j] = sum_k c^k_ij e_k.  ``membership_residual`` maps an
    m x m matrix to a nonnegative defect (0 on the group); when absent, a
    generic test via log-and-expand is used.  Specs are immutable after
    construction.
    """

    name: str
    dim: int
    embed: int
    basis: Array
    structure: Array
    membership_residual: Callable[[Array], float] | None = None
    membership_tol: float = 1e-8
    _basis_pinv: Array = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.basis = np.asarray(self.basis, dtype=float).reshape(self.dim, self.embed, self.embed)
        self.structure = np.asarray(self.structure, dtype=float).reshape(self.dim, self.dim, self.dim)
        flat = self.basis.reshape(self.dim, -1)
        self._basis_pinv = np.linalg.pinv(flat)

    # -- coordinates --------------------------------------------------------

    def from_coords(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: expected ({self.dim},), got {x.shape}")
        return np.tensordot(x, self.basis, axes=1)

    def to_coords(self, mat: Array, check: bool = True, tol: float = 1e-8) -> Array:
        mat = np.asarray(mat, dtype=float)
        x = mat.reshape(-1) @ self._basis_pinv
        if check:
            resid = np.linalg.norm(self.from_coords(x) - mat)
            if resid > tol * max(1.0, np.linalg.norm(mat)):
                raise LieDomainError(f"matrix not in the algebra span of {self.name} (residual {resid:.2e})")
        return x

    def pair(self, mu: Array, x: Array) -> float:
        """Dual pairing <mu, x>: the coordinate dot product."""
        return float(np.dot(mu, x))

    # -- brackets and adjoints ----------------------------------------------

    def bracket(self, x: Array, y: Array) -> Array:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != (self.dim,) or y.shape != (self.dim,):
            raise ValueError("dimension mismatch in bracket")
        return np.einsum("ijk,i,j->k", self.structure, x, y)

    def ad(self, x: Array) -> Array:
        """Matrix of ad_x = [x, .] on algebra coordinates."""
        return np.einsum("ijk,i->kj", self.structure, np.asarray(x, dtype=float))

    def ad_star(self, x: Array) -> Array:
        """Matrix of ad*_x on coalgebra coordinates: <ad*_x mu, y> = <mu,[x,y]>."""
        return self.ad(x).T

    def Ad(self, g: Array) -> Array:
        """Matrix of Ad_g (conjugation) on algebra coordinates."""
        gi = np.linalg.inv(g)
        cols = [self.to_coords(g @ self.basis[i] @ gi, check=False) for i in range(self.dim)]
        return np.stack(cols, axis=1)

    def Ad_star(self, g: Array) -> Array:
        """Matrix of Ad*_g on coalgebra coordinates: <Ad*_g mu, x> = <mu, Ad_g x>."""
        return self.Ad(g).T

    # -- exponential map ------------------------------------------------------

    def exp(self, x: Array) -> Array:
        return expm(self.from_coords(x))

    def log(self, g: Array) -> Array:
        return self.to_coords(logm(np.asarray(g, dtype=float)))

    def identity(self) -> Array:
        return np.eye(self.embed)

    # -- membership and sampling ---------------------------------------------

    def contains(self, g: Array, tol: float | None = None) -> bool:
        return self.membership_defect(g) <= (self.membership_tol if tol is None else tol)

    def membership_defect(self, g: Array) -> float:
        g = np.asarray(g, dtype=float)
        if g.shape != (self.embed, self.embed):
            return float("inf")
        if self.membership_residual is not None:
            return float(self.membership_residual(g))
        try:
            x = self.log(g)
        except LieDomainError:
            return float("inf")
        return float(np.linalg.norm(self.exp(x) - g))

    def random_algebra(self, rng: np.random.Generator, scale: float = 0.5) -> Array:
        return scale * rng.standard_normal(self.dim)

    def random_coalgebra(self, rng: np.random.Generator, scale: float = 1.0) -> Array:
        return scale * rng.standard_normal(self.dim)

    def random_element(self, rng: np.random.Generator, scale: float = 0.5) -> Array:
        return self.exp(self.random_algebra(rng, scale))


# ---------------------------------------------------------------------------
# tangent group TG = G x| T_e G (left trivialization)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TangentGroupPoint:
    """Tangent vector X_g = TL_g(e) xi stored as (g, xi)."""

    base: Array
    left: Array


def tangent_group_product(spec: LieGroupSpec, a: TangentGroupPoint, b: TangentGroupPoint) -> TangentGroupPoint:
    """Tangent-group product X_g . Y_h = TL_g Y_h + TR_h X_g."""
    base = a.base @ b.base
    left = spec.Ad(np.linalg.inv(b.base)) @ a.left + b.left
    return TangentGroupPoint(base, left)


def tangent_group_inverse(spec: LieGroupSpec, a: TangentGroupPoint) -> TangentGroupPoint:
    return TangentGroupPoint(np.linalg.inv(a.base), -(spec.Ad(a.base) @ a.left))


def tangent_group_identity(spec: LieGroupSpec) -> TangentGroupPoint:
    return TangentGroupPoint(spec.identity(), np.zeros(spec.dim))


def tangent_embed(spec: LieGroupSpec, a: TangentGroupPoint) -> Array:
    """The tangent vector as an embedded matrix, g @ xi_matrix."""
    return a.base @ spec.from_coords(a.left)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def jacobi_defect(spec: LieGroupSpec) -> float:
    """Max norm of sum_cyc [[e_i,e_j],e_k] computed from structure constants."""
    worst = 0.0
    eye = np.eye(spec.dim)
    for i in range(spec.dim):
        for j in range(spec.dim):
            for k in range(spec.dim):
                s = spec.bracket(spec.bracket(eye[i], eye[j]), eye[k])
                s = s + spec.bracket(spec.bracket(eye[j], eye[k]), eye[i])
                s = s + spec.bracket(spec.bracket(eye[k], eye[i]), eye[j])
                worst = max(worst, float(np.max(np.abs(s))))
    return worst


def validate_spec(spec: LieGroupSpec, seed: int = 0) -> "SuiteReport":
    """Run all LieGroupSpec invariants; returns residuals, never raises."""
    from .report import SuiteReport
    from .rng import stream

    rep = SuiteReport(f"liealg.validate[{spec.name}]")
    anti = float(np.max(np.abs(spec.structure + np.transpose(spec.structure, (1, 0, 2)))))
    rep.add("antisymmetry", anti, 1e-12)
    rep.add("jacobi", jacobi_defect(spec), 1e-12)

    svals = np.linalg.svd(spec.basis.reshape(spec.dim, -1), compute_uv=False)
    rank = int(np.sum(svals > 1e-10 * svals[0]))
    rep.add("basis_independence", 0.0 if rank == spec.dim else 1.0, 0.5, rank=rank, min_singular_value=float(svals[-1]))

    worst = 0.0
    for i in range(spec.dim):
        for j in range(spec.dim):
            comm = spec.basis[i] @ spec.basis[j] - spec.basis[j] @ spec.basis[i]
            worst = max(worst, float(np.max(np.abs(comm - spec.from_coords(spec.structure[i, j])))))
    rep.add("structure_vs_commutator", worst, 1e-12)

    rng = stream(seed, f"liealg.validate/{spec.name}")
    worst = max(spec.membership_defect(spec.random_element(rng)) for _ in range(8))
    rep.add("exp_lands_in_group", worst, spec.membership_tol)
    return rep


# ---------------------------------------------------------------------------
# built-in groups
# ---------------------------------------------------------------------------


def _so3_membership(g: Array) -> float:
    return float(np.linalg.norm(g.T @ g - np.eye(3)) + abs(np.linalg.det(g) - 1.0))


def so3() -> LieGroupSpec:
    """SO(3) with the standard basis, [e_1, e_2] = e_3 (c^3_12 = 1)."""
    basis = np.zeros((3, 3, 3))
    basis[0] = [[0, 0, 0], [0, 0, -1], [0, 1, 0]]
    basis[1] = [[0, 0, 1], [0, 0, 0], [-1, 0, 0]]
    basis[2] = [[0, -1, 0], [1, 0, 0], [0, 0, 0]]
    structure = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        structure[i, j, k] = 1.0
        structure[j, i, k] = -1.0
    return LieGroupSpec("so3", 3, 3, basis, structure, _so3_membership)


def translation_group(n: int) -> LieGroupSpec:
    """Abelian R^n as (n+1)x(n+1) unipotent matrices [[I, v], [0, 1]]."""
    m = n + 1
    basis = np.zeros((n, m, m))
    for i in range(n):
        basis[i, i, n] = 1.0

    def membership(g: Array) -> float:
        model = np.eye(m)
        model[:n, n] = g[:n, n]
        return float(np.linalg.norm(g - model))

    return LieGroupSpec(f"r{n}", n, m, basis, np.zeros((n, n, n)), membership)


def torus(n: int) -> LieGroupSpec:
    """T^n as block-diagonal 2x2 rotations; angles wrap by construction."""
    m = 2 * n
    basis = np.zeros((n, m, m))
    for i in range(n):
        basis[i, 2 * i, 2 * i + 1] = -1.0
        basis[i, 2 * i + 1, 2 * i] = 1.0

    def membership(g: Array) -> float:
        defect = 0.0
        for i in range(n):
            blk = g[2 * i : 2 * i + 2, 2 * i : 2 * i + 2]
            defect += np.linalg.norm(blk.T @ blk - np.eye(2)) + abs(np.linalg.det(blk) - 1.0)
        mask = np.ones((m, m), dtype=bool)
        for i in range(n):
            mask[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = False
        defect += float(np.abs(g[mask]).sum())
        return float(defect)

    return LieGroupSpec(f"t{n}", n, m, basis, np.zeros((n, n, n)), membership)


def heisenberg3() -> LieGroupSpec:
    """Heisenberg group of 3x3 unitriangular matrices; [e_1, e_2] = e_3."""
    basis = np.zeros((3, 3, 3))
    basis[0, 0, 1] = 1.0
    basis[1, 1, 2] = 1.0
    basis[2, 0, 2] = 1.0
    structure = np.zeros((3, 3, 3))
    structure[0, 1, 2] = 1.0
    structure[1, 0, 2] = -1.0

    def membership(g: Array) -> float:
        model = np.eye(3)
        model[0, 1], model[1, 2], model[0, 2] = g[0, 1], g[1, 2], g[0, 2]
        return float(np.linalg.norm(g - model))

    return LieGroupSpec("heisenberg3", 3, 3, basis, structure, membership)


def builtin_group(name: str) -> LieGroupSpec:
    if name == "so3":
        return so3()
    if name == "heisenberg3":
        return heisenberg3()
    if name.startswith("r") and name[1:].isdigit():
        return translation_group(int(name[1:]))
    if name.startswith("t") and name[1:].isdigit():
        return torus(int(name[1:]))
    raise KeyError(f"unknown builtin group {name!r}")


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def spec_to_json(spec: LieGroupSpec) -> dict:
    entries = []
    for i in range(spec.dim):
        for j in range(spec.dim):
            for k in range(spec.dim):
                c = spec.structure[i, j, k]
                if c != 0.0:
                    entries.append([i, j, k, float(c)])
    return {
        "name": spec.name,
        "dim": spec.dim,
        "embed": spec.embed,
        "basis": [spec.basis[i].reshape(-1).tolist() for i in range(spec.dim)],
        "structure": entries,
    }


def spec_from_json(doc: dict) -> LieGroupSpec:
    name = doc["name"]
    dim, embed = int(doc["dim"]), int(doc["embed"])
    basis = np.array([np.asarray(row, dtype=float).reshape(embed, embed) for row in doc["basis"]])
    structure = np.zeros((dim, dim, dim))
    for i, j, k, c in doc["structure"]:
        structure[int(i), int(j), int(k)] = float(c)
    membership = None
    try:
        membership = builtin_group(name).membership_residual
    except KeyError:
        pass
    return LieGroupSpec(name, dim, embed, basis, structure, membership)


def save_spec(spec: LieGroupSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_json(spec), fh, indent=2)


def load_spec(path: str) -> LieGroupSpec:
    with open(path, encoding="utf-8") as fh:
        return spec_from_json(json.load(fh))
